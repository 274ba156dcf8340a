//! Integration of `Y' = A(x; λ) Y` for the companion system of `𝓛u = λu`.

mod dop853;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::linalg::{CMatrix, CVector};
use crate::operator::PeriodicOperator;
use dop853::Stepper;

/// `(u, u', …, u^{(n−1)})` at a point.
pub type StateVector = CVector;

#[derive(Clone, Debug, PartialEq)]
pub struct OdeOptions {
    pub tol: f64,
    /// Step ceiling factor in `h ≤ factor / |λ|^{1/n}`.
    pub step_ceiling: f64,
    pub max_steps: usize,
    /// Integrates `e^{−c x} Y` instead of `Y`; used to keep large-|λ| solutions finite.
    pub growth_shift: f64,
    pub record_steps: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

impl OdeOptions {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self {
            tol: tol.ode_tol,
            step_ceiling: tol.step_ceiling,
            max_steps: tol.max_steps,
            growth_shift: 0.0,
            record_steps: false,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_growth_shift(mut self, c: f64) -> Self {
        self.growth_shift = c;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub x: f64,
    pub h: f64,
    pub error: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct Propagation {
    /// State at each requested target, scaled by `exp(−c (x − x0))` when a growth shift is set.
    pub states: Vec<CMatrix>,
    /// `c (x − x0)` for each target.
    pub log_scales: Vec<f64>,
    /// Accumulated local error estimates (relative).
    pub est_error: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub history: Vec<StepRecord>,
}

/// Largest `Re(ρ^l ζ)`: the exponential growth rate of the dominant unperturbed solution.
pub fn dominant_growth_rate(order: usize, lambda: Complex64) -> f64 {
    let r = lambda.norm().powf(1.0 / order as f64);
    if r == 0.0 {
        return 0.0;
    }
    let theta = lambda.arg().rem_euclid(2.0 * std::f64::consts::PI) / order as f64;
    (0..order)
        .map(|l| r * (theta + 2.0 * std::f64::consts::PI * l as f64 / order as f64).cos())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn step_ceiling(op: &PeriodicOperator, lambda: Complex64, opts: &OdeOptions) -> f64 {
    let zeta = lambda.norm().powf(1.0 / op.order() as f64);
    let mut h = f64::INFINITY;
    if zeta > 0.0 {
        h = opts.step_ceiling / zeta;
    }
    let mh = op.max_harmonic();
    if mh > 0 {
        h = h.min(op.period() / (4.0 * mh as f64));
    }
    h
}

/// Propagates the columns of `init` from `x0` through every target in `targets`.
///
/// Targets must all lie on one side of `x0` and be ordered away from it.
pub fn propagate(
    op: &PeriodicOperator,
    lambda: Complex64,
    x0: f64,
    init: &CMatrix,
    targets: &[f64],
    opts: &OdeOptions,
) -> Result<Propagation> {
    let n = op.order();
    if init.nrows() != n {
        return Err(FloquetError::InvalidArgument(format!(
            "initial state has {} rows, operator order is {n}",
            init.nrows()
        )));
    }
    if !(1e-14..=1e-4).contains(&opts.tol) {
        return Err(FloquetError::InvalidArgument(format!(
            "tolerance {} outside [1e-14, 1e-4]",
            opts.tol
        )));
    }
    if targets.iter().any(|t| !t.is_finite()) || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(FloquetError::InvalidArgument(
            "non-finite target or lambda".into(),
        ));
    }
    let dir = targets
        .iter()
        .find(|&&t| t != x0)
        .map(|&t| (t - x0).signum())
        .unwrap_or(1.0);
    let mut prev = x0;
    for &t in targets {
        if (t - prev) * dir < 0.0 {
            return Err(FloquetError::InvalidArgument(
                "targets must be ordered away from the start point".into(),
            ));
        }
        prev = t;
    }

    let m = init.ncols();
    let dim = n * m;
    let c = opts.growth_shift;
    let mut y: Vec<Complex64> = Vec::with_capacity(dim);
    for j in 0..m {
        for i in 0..n {
            y.push(init[(i, j)]);
        }
    }
    let mut coef = vec![Complex64::new(0.0, 0.0); n - 1];
    let unperturbed = op.is_unperturbed();
    let mut rhs = |x: f64, y: &[Complex64], dy: &mut [Complex64]| {
        if !unperturbed {
            op.eval_coefficients(x, &mut coef);
        }
        for j in 0..m {
            let col = &y[j * n..(j + 1) * n];
            let d = &mut dy[j * n..(j + 1) * n];
            for i in 0..n - 1 {
                d[i] = col[i + 1] - col[i] * c;
            }
            let mut acc = lambda * col[0] - col[n - 1] * c;
            if !unperturbed {
                for k in 0..n - 1 {
                    acc -= coef[k] * col[k];
                }
            }
            d[n - 1] = acc;
        }
    };

    let ceiling = step_ceiling(op, lambda, opts);
    let mut stepper = Stepper::new(dim);
    let mut f0 = vec![Complex64::new(0.0, 0.0); dim];
    let mut scale = vec![0.0; dim];
    let mut x = x0;
    rhs(x, &y, &mut f0);

    let total_span = targets.iter().map(|t| (t - x0).abs()).fold(0.0, f64::max);
    let mut h_nat = ceiling
        .min(0.1 * total_span.max(1e-3))
        .min(opts.tol.powf(0.125) * 4.0);
    if !h_nat.is_finite() || h_nat <= 0.0 {
        h_nat = 1e-3;
    }
    let beta = 0.04;
    let expo = 0.125 - 0.75 * beta;
    let mut err_old: f64 = 1e-4;
    let mut out = Propagation {
        states: Vec::with_capacity(targets.len()),
        log_scales: Vec::with_capacity(targets.len()),
        est_error: 0.0,
        accepted: 0,
        rejected: 0,
        history: Vec::new(),
    };

    let to_matrix = |y: &[Complex64]| {
        let mut mat = CMatrix::zeros(n, m);
        for j in 0..m {
            for i in 0..n {
                mat[(i, j)] = y[j * n + i];
            }
        }
        mat
    };

    for &target in targets {
        while (target - x) * dir > 0.0 {
            if out.accepted + out.rejected >= opts.max_steps {
                return Err(FloquetError::StepBudget {
                    lambda,
                    x,
                    max_steps: opts.max_steps,
                });
            }
            let remaining = (target - x).abs();
            let mut h = h_nat.min(ceiling);
            let clipped = h >= remaining;
            if clipped {
                h = remaining;
            }
            if h < 1e-14 * x.abs().max(1.0) && !clipped {
                return Err(FloquetError::StepUnderflow { lambda, x });
            }
            let hs = h * dir;
            stepper.step(&mut rhs, x, &y, &f0, hs);

            for j in 0..m {
                let lo = j * n;
                let hi = lo + n;
                let colmax = y[lo..hi]
                    .iter()
                    .chain(&stepper.y_new[lo..hi])
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                for i in lo..hi {
                    let mag = y[i].norm().max(stepper.y_new[i].norm());
                    scale[i] = opts.tol * (mag + 1e-3 * colmax);
                }
            }
            let err = stepper.error_norm(hs, &scale);
            if !err.is_finite() {
                return Err(FloquetError::StepUnderflow { lambda, x });
            }
            if opts.record_steps {
                out.history.push(StepRecord {
                    x,
                    h: hs,
                    error: err,
                    accepted: err <= 1.0,
                });
            }
            if err <= 1.0 {
                let fac = (0.9 * err.max(1e-10).powf(-expo) * err_old.powf(beta)).clamp(0.333, 6.0);
                err_old = err.max(1e-4);
                out.est_error += err * opts.tol;
                out.accepted += 1;
                x = if clipped { target } else { x + hs };
                y.copy_from_slice(&stepper.y_new);
                rhs(x, &y, &mut f0);
                let proposal = h * fac;
                if !clipped || proposal < h_nat {
                    h_nat = proposal;
                }
            } else {
                out.rejected += 1;
                let fac = (0.9 * err.powf(-0.125)).max(0.2);
                h_nat = h * fac;
                if h_nat < 1e-14 * x.abs().max(1.0) {
                    return Err(FloquetError::StepUnderflow { lambda, x });
                }
            }
        }
        out.states.push(to_matrix(&y));
        out.log_scales.push(c * (target - x0));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct IvpSolution {
    pub state: StateVector,
    pub est_error: f64,
}

/// Solution of `𝓛u = λu` with `(u, …, u^{(n−1)})(0) = init`, evaluated at `x_end`.
pub fn integrate_ivp(
    op: &PeriodicOperator,
    lambda: Complex64,
    init: &StateVector,
    x_end: f64,
    tol: f64,
) -> Result<IvpSolution> {
    let opts = OdeOptions::default().with_tol(tol);
    let init = CMatrix::from_column_slice(init.len(), 1, init.as_slice());
    let p = propagate(op, lambda, 0.0, &init, &[x_end], &opts)?;
    Ok(IvpSolution {
        state: p.states[0].column(0).into_owned(),
        est_error: p.est_error,
    })
}

#[derive(Clone, Debug)]
pub struct FundamentalMatrix {
    pub at_x: f64,
    pub lambda: Complex64,
    /// Column `j` holds `(u_j, u_j', …, u_j^{(n−1)})(x)`, times `exp(−log_scale)`.
    pub entries: CMatrix,
    pub est_error: f64,
    pub log_scale: f64,
}

pub fn fundamental_matrix(
    op: &PeriodicOperator,
    lambda: Complex64,
    x: f64,
    tol: f64,
) -> Result<FundamentalMatrix> {
    let opts = OdeOptions::default().with_tol(tol);
    Ok(fundamental_matrices(op, lambda, &[x], &opts)?.remove(0))
}

/// Fundamental matrices at several points in a single pass from 0.
pub fn fundamental_matrices(
    op: &PeriodicOperator,
    lambda: Complex64,
    xs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<FundamentalMatrix>> {
    let n = op.order();
    let id = CMatrix::identity(n, n);
    let p = propagate(op, lambda, 0.0, &id, xs, opts)?;
    Ok(p.states
        .into_iter()
        .zip(p.log_scales)
        .zip(xs)
        .map(|((entries, log_scale), &x)| FundamentalMatrix {
            at_x: x,
            lambda,
            entries,
            est_error: p.est_error,
            log_scale,
        })
        .collect())
}

/// CSV dump of a step history.
pub fn history_csv(history: &[StepRecord]) -> String {
    let mut s = String::from("x,h,error,accepted\n");
    for r in history {
        s.push_str(&format!(
            "{:e},{:e},{:e},{}\n",
            r.x, r.h, r.error, r.accepted as u8
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, determinant};
    use crate::operator::TrigPolynomial;

    #[test]
    fn cosh_sinh() {
        let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        let init = StateVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let sol = integrate_ivp(&op, c64(1.0, 0.0), &init, 1.0, 1e-12).unwrap();
        assert!((sol.state[0] - c64(1f64.cosh(), 0.0)).norm() < 1e-12);
        assert!((sol.state[1] - c64(1f64.sinh(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn polynomial_chain() {
        let op = PeriodicOperator::unperturbed(4, 1.0).unwrap();
        let init = StateVector::from_vec(vec![
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(0.0, 0.0),
            c64(1.0, 0.0),
        ]);
        let sol = integrate_ivp(&op, c64(0.0, 0.0), &init, 2.0, 1e-12).unwrap();
        let want = [8.0 / 6.0, 2.0, 2.0, 1.0];
        for (z, w) in sol.state.iter().zip(want) {
            assert!((z - c64(w, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn reverse_integration() {
        let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        let init = StateVector::from_vec(vec![c64(1.0, 0.0), c64(0.0, 0.0)]);
        let sol = integrate_ivp(&op, c64(-4.0, 0.0), &init, -0.7, 1e-12).unwrap();
        assert!((sol.state[0] - c64((2.0f64 * 0.7).cos(), 0.0)).norm() < 1e-12);
        assert!((sol.state[1] - c64(2.0 * (2.0f64 * 0.7).sin(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_at_zero() {
        let op = PeriodicOperator::hill(TrigPolynomial::cosine(1.0, 1, 1.0)).unwrap();
        let f = fundamental_matrix(&op, c64(3.0, 1.0), 0.0, 1e-12).unwrap();
        assert_eq!(f.entries, CMatrix::identity(2, 2));
    }

    #[test]
    fn third_order_series_entry() {
        let op = PeriodicOperator::unperturbed(3, 1.0).unwrap();
        let f = fundamental_matrix(&op, c64(1.0, 0.0), 1.0, 1e-12).unwrap();
        let mut series = 0.0;
        let mut fact = 1.0;
        for k in 0..10 {
            if k > 0 {
                fact *= ((3 * k - 2) * (3 * k - 1) * (3 * k)) as f64;
            }
            series += 1.0 / fact;
        }
        assert!((f.entries[(0, 0)] - c64(series, 0.0)).norm() < 1e-12);
        assert!((series - 1.16805831).abs() < 1e-8);
    }

    #[test]
    fn hill_determinant_is_one() {
        let op = PeriodicOperator::hill(TrigPolynomial::cosine(1.0, 1, 1.0)).unwrap();
        let f = fundamental_matrix(&op, c64(5.0, 0.0), 1.0, 1e-13).unwrap();
        assert!((determinant(&f.entries) - c64(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn growth_shift_scales_solution() {
        let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        let lam = c64(400.0, 0.0);
        let plain = fundamental_matrices(&op, lam, &[1.0], &OdeOptions::default()).unwrap();
        let shifted = fundamental_matrices(
            &op,
            lam,
            &[1.0],
            &OdeOptions::default().with_growth_shift(20.0),
        )
        .unwrap();
        let a = plain[0].entries[(0, 0)];
        let b = shifted[0].entries[(0, 0)] * shifted[0].log_scale.exp();
        assert!((a - b).norm() < 1e-11 * a.norm());
        assert_eq!(dominant_growth_rate(2, lam), 20.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        assert!(fundamental_matrix(&op, c64(1.0, 0.0), 1.0, 1e-3).is_err());
    }
}
