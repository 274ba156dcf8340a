use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exclusion::ExclusionRegion;
use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::floquet::{floquet_record, normalized_floquet};
use crate::linalg::CMatrix;
use crate::multipoint::h_scaled;
use crate::ode::{dominant_growth_rate, propagate, OdeOptions};
use crate::operator::PeriodicOperator;
use crate::oracle::{
    principal_root, tilde_fundamental_scaled, tilde_h_closed_scaled, UnperturbedContext,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticQuantity {
    /// `max_j |r_j / e^{ω_k ζ b} − 1|`.
    MultiplierRatio,
    /// `max_{j,x} |u_j(x) / ũ_j(x) − 1|` on `x ∈ {b/4, b/2, 3b/4, b}`.
    FundamentalRatio,
    /// `|H / H̃ − 1|`.
    HRatio,
    /// `max_{k,x} |φ_k(x) / e^{ω_k ζ x} − 1|` on `x ∈ {b/4, b/2, 3b/4}`.
    PhiRatio,
    /// `max_j |(r_j'/r_j) / (ω_k b / (n λ^{(n−1)/n})) − 1|`.
    LogDerivative,
}

impl AsymptoticQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MultiplierRatio => "multiplier_ratio",
            Self::FundamentalRatio => "fundamental_ratio",
            Self::HRatio => "H_ratio",
            Self::PhiRatio => "phi_ratio",
            Self::LogDerivative => "log_derivative",
        }
    }

    fn needs_exclusion(&self) -> bool {
        matches!(
            self,
            Self::HRatio | Self::PhiRatio | Self::MultiplierRatio | Self::LogDerivative
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplePlan {
    /// `count` points on `arg λ = angle`, log-spaced in `|λ|`.
    Ray {
        angle: f64,
        r_min: f64,
        r_max: f64,
        count: usize,
    },
    /// `per_circle` points on each circle `|λ| = r`.
    Annuli {
        radii: Vec<f64>,
        per_circle: usize,
        phase: f64,
    },
}

pub fn sample_plan_lambdas(plan: &SamplePlan) -> Result<Vec<Complex64>> {
    match plan {
        SamplePlan::Ray {
            angle,
            r_min,
            r_max,
            count,
        } => {
            if !(*r_min > 0.0 && r_max > r_min) || *count < 2 {
                return Err(FloquetError::InvalidArgument(
                    "ray plan needs 0 < r_min < r_max and count ≥ 2".into(),
                ));
            }
            let (a, b) = (r_min.ln(), r_max.ln());
            Ok((0..*count)
                .map(|i| {
                    Complex64::from_polar(
                        (a + (b - a) * i as f64 / (*count - 1) as f64).exp(),
                        *angle,
                    )
                })
                .collect())
        }
        SamplePlan::Annuli {
            radii,
            per_circle,
            phase,
        } => {
            if radii.iter().any(|r| !(*r > 0.0)) || *per_circle == 0 {
                return Err(FloquetError::InvalidArgument(
                    "annulus plan needs positive radii".into(),
                ));
            }
            Ok(radii
                .iter()
                .flat_map(|&r| {
                    (0..*per_circle).map(move |i| {
                        Complex64::from_polar(r, phase + 2.0 * PI * i as f64 / *per_circle as f64)
                    })
                })
                .collect())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitSample {
    pub lambda: Complex64,
    pub abs_zeta: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    pub quantity: String,
    pub samples: Vec<FitSample>,
    /// Samples dropped for lying in `E_δ` or for failing to evaluate.
    pub skipped: Vec<(Complex64, String)>,
    /// `error ≈ K |ζ|^{−slope}`.
    pub constant: f64,
    pub slope: f64,
    /// Log-space residuals of the fit.
    pub residuals: Vec<f64>,
    /// All errors below `noise_floor`: nothing to fit.
    pub at_noise_floor: bool,
    pub noise_floor: f64,
    /// Largest error over the upper half of `|ζ|` is below that of the lower half.
    pub envelope_decreasing: bool,
    pub pass: bool,
}

const NOISE_FLOOR: f64 = 1e-10;
const MIN_SLOPE: f64 = 0.7;

/// Least squares `ln e = ln K − s ln x`; returns `(K, s, residuals)`.
pub fn fit_power_law(xs: &[f64], errors: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(errors)
        .filter(|(x, e)| **x > 0.0 && **e > 0.0 && e.is_finite())
        .map(|(x, e)| (x.ln(), e.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(FloquetError::FitDegenerate(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FloquetError::FitDegenerate(pts.len()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let beta = sxy / sxx;
    let alpha = my - beta * mx;
    let res = pts.iter().map(|p| p.1 - (alpha + beta * p.0)).collect();
    Ok((alpha.exp(), -beta, res))
}

fn omega(n: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

fn multiplier_error(op: &PeriodicOperator, lambda: Complex64, tol: &Tolerances) -> Result<f64> {
    let rec = floquet_record(op, lambda, tol)?;
    if !rec.pairing_unique {
        return Err(FloquetError::Classification(
            "multipliers do not pair one-to-one with roots of unity".into(),
        ));
    }
    let n = op.order();
    let zeta = principal_root(lambda, n);
    Ok(rec
        .log_multipliers
        .iter()
        .zip(&rec.pairing)
        .map(|(l, &k)| (l - omega(n, k) * zeta * op.period()).exp() - 1.0)
        .map(|d| d.norm())
        .fold(0.0, f64::max))
}

fn fundamental_error(op: &PeriodicOperator, lambda: Complex64, tol: &Tolerances) -> Result<f64> {
    let n = op.order();
    let b = op.period();
    let ctx = UnperturbedContext::new(n, b)?;
    let c = dominant_growth_rate(n, lambda);
    let xs: Vec<f64> = (1..=4).map(|i| i as f64 * b / 4.0).collect();
    let opts = OdeOptions::from_tolerances(tol).with_growth_shift(c);
    let p = propagate(op, lambda, 0.0, &CMatrix::identity(n, n), &xs, &opts)?;
    let mut worst: f64 = 0.0;
    for (s, (&x, &ls)) in xs.iter().zip(&p.log_scales).enumerate() {
        for j in 1..=n {
            let u = p.states[s][(0, j - 1)] * (ls - c * x).exp();
            let ut = tilde_fundamental_scaled(&ctx, x, lambda, j, 0, c)?;
            worst = worst.max((u / ut - 1.0).norm());
        }
    }
    Ok(worst)
}

fn h_error(op: &PeriodicOperator, lambda: Complex64, tol: &Tolerances) -> Result<f64> {
    let n = op.order();
    let ctx = UnperturbedContext::new(n, op.period())?;
    let h = h_scaled(op, lambda, tol)?;
    let c = dominant_growth_rate(n, lambda);
    let ht = tilde_h_closed_scaled(&ctx, lambda, c);
    let pairs = (n * (n - 1) / 2) as f64;
    let ln_ratio = h.ln() - ht.ln() - pairs * c * op.period();
    Ok((ln_ratio.exp() - 1.0).norm())
}

fn phi_error(op: &PeriodicOperator, lambda: Complex64, tol: &Tolerances) -> Result<f64> {
    let n = op.order();
    let b = op.period();
    let zeta = principal_root(lambda, n);
    let rec = floquet_record(op, lambda, tol)?;
    if !rec.pairing_unique {
        return Err(FloquetError::Classification(
            "multipliers do not pair one-to-one with roots of unity".into(),
        ));
    }
    let xs = [0.25 * b, 0.5 * b, 0.75 * b];
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let nf = normalized_floquet(op, lambda, i, tol)?;
        let w = omega(n, rec.pairing[i]) * zeta;
        let init = CMatrix::from_column_slice(n, 1, nf.coefficients.as_slice());
        // Integrate in the direction where this branch grows, using φ(x) = r φ(x − b) backwards.
        let forward = w.re >= 0.0;
        let targets: Vec<f64> = if forward {
            xs.to_vec()
        } else {
            xs.iter().rev().map(|x| x - b).collect()
        };
        let rate = w.re.abs();
        let opts =
            OdeOptions::from_tolerances(tol).with_growth_shift(if forward { rate } else { -rate });
        let p = propagate(op, lambda, 0.0, &init, &targets, &opts)?;
        for (k, &t) in targets.iter().enumerate() {
            let x = if forward { t } else { t + b };
            let mut ln_phi = p.states[k][(0, 0)].ln() + p.log_scales[k];
            if !forward {
                ln_phi += rec.log_multipliers[i];
            }
            worst = worst.max(((ln_phi - w * x).exp() - 1.0).norm());
        }
    }
    Ok(worst)
}

fn wrap_im(z: Complex64) -> Complex64 {
    Complex64::new(z.re, (z.im + PI).rem_euclid(2.0 * PI) - PI)
}

fn log_derivative_error(op: &PeriodicOperator, lambda: Complex64, tol: &Tolerances) -> Result<f64> {
    let n = op.order();
    let b = op.period();
    let zeta = principal_root(lambda, n);
    // Step chosen so that ζ moves by about 1e-3.
    let h = lambda * (1e-3 * n as f64 / zeta.norm().max(1.0));
    let recs: Vec<_> = [lambda + h, lambda - h]
        .iter()
        .map(|&l| floquet_record(op, l, tol))
        .collect::<Result<_>>()?;
    if recs.iter().any(|r| !r.pairing_unique) {
        return Err(FloquetError::Classification(
            "multipliers do not pair one-to-one with roots of unity".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let ip = recs[0]
            .pairing
            .iter()
            .position(|&q| q == k)
            .expect("bijective pairing");
        let im = recs[1]
            .pairing
            .iter()
            .position(|&q| q == k)
            .expect("bijective pairing");
        let d = wrap_im(recs[0].log_multipliers[ip] - recs[1].log_multipliers[im]) / (2.0 * h);
        let want = omega(n, k) * zeta * b / (n as f64 * lambda);
        worst = worst.max((d / want - 1.0).norm());
    }
    Ok(worst)
}

fn evaluate(
    q: AsymptoticQuantity,
    op: &PeriodicOperator,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<f64> {
    match q {
        AsymptoticQuantity::MultiplierRatio => multiplier_error(op, lambda, tol),
        AsymptoticQuantity::FundamentalRatio => fundamental_error(op, lambda, tol),
        AsymptoticQuantity::HRatio => h_error(op, lambda, tol),
        AsymptoticQuantity::PhiRatio => phi_error(op, lambda, tol),
        AsymptoticQuantity::LogDerivative => log_derivative_error(op, lambda, tol),
    }
}

/// Samples `|ratio − 1|` over the plan and fits `K |ζ|^{−s}`.
pub fn validate_asymptotics(
    op: &PeriodicOperator,
    quantity: AsymptoticQuantity,
    plan: &SamplePlan,
    delta: f64,
    tol: &Tolerances,
) -> Result<AsymptoticFit> {
    let n = op.order();
    let region = ExclusionRegion::new(delta, op.period(), n)?;
    let lambdas = sample_plan_lambdas(plan)?;
    let results: Vec<(Complex64, std::result::Result<f64, String>)> = lambdas
        .par_iter()
        .map(|&l| {
            let zeta = principal_root(l, n);
            if quantity.needs_exclusion() && region.contains(zeta).inside {
                return (l, Err("inside E_δ".to_string()));
            }
            if quantity == AsymptoticQuantity::FundamentalRatio && l.im == 0.0 && l.re < 0.0 {
                return (l, Err("negative real axis".to_string()));
            }
            (l, evaluate(quantity, op, l, tol).map_err(|e| e.to_string()))
        })
        .collect();
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (l, r) in results {
        match r {
            Ok(e) if e.is_finite() => samples.push(FitSample {
                lambda: l,
                abs_zeta: l.norm().powf(1.0 / n as f64),
                error: e,
            }),
            Ok(e) => skipped.push((l, format!("non-finite error {e}"))),
            Err(msg) => skipped.push((l, msg)),
        }
    }
    samples.sort_by(|a, b| a.abs_zeta.total_cmp(&b.abs_zeta));
    let at_noise_floor = !samples.is_empty() && samples.iter().all(|s| s.error < NOISE_FLOOR);
    let base = AsymptoticFit {
        quantity: quantity.name().to_string(),
        samples,
        skipped,
        constant: f64::NAN,
        slope: f64::NAN,
        residuals: Vec::new(),
        at_noise_floor,
        noise_floor: NOISE_FLOOR,
        envelope_decreasing: true,
        pass: at_noise_floor,
    };
    if at_noise_floor {
        return Ok(base);
    }
    let usable: Vec<&FitSample> = base
        .samples
        .iter()
        .filter(|s| s.error >= NOISE_FLOOR)
        .collect();
    let xs: Vec<f64> = usable.iter().map(|s| s.abs_zeta).collect();
    let es: Vec<f64> = usable.iter().map(|s| s.error).collect();
    let (k, s, res) = fit_power_law(&xs, &es)?;
    let half = es.len() / 2;
    let lower = es[..half].iter().cloned().fold(0.0, f64::max);
    let upper = es[half..].iter().cloned().fold(0.0, f64::max);
    let envelope_decreasing = upper < lower;
    Ok(AsymptoticFit {
        constant: k,
        slope: s,
        residuals: res,
        envelope_decreasing,
        pass: s >= MIN_SLOPE && envelope_decreasing,
        ..base
    })
}
