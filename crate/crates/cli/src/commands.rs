//! The subcommands. Each returns a JSON result plus optional grid data.

use std::path::Path;

use anyhow::{anyhow, Context};
use floquet::asymptotics::{
    definition1_sets, discriminant_zeros, spectrum_scan, validate_asymptotics, AsymptoticQuantity,
    SamplePlan,
};
use floquet::contour::Rect;
use floquet::floquet::{floquet_records, jordan_profile, monodromy_permutation};
use floquet::multipoint::{find_spectrum, h_eval};
use floquet::operator::{FormTag, OperatorConfig, PeriodicOperator};
use floquet::oracle::{
    const_coeff_multipliers, tilde_double_points, tilde_h, tilde_multipliers, ConstCoeffContext,
    UnperturbedContext,
};
use floquet::vandermonde::{confluent_det, ConfluentSpec};
use floquet::{Complex64, Tolerances};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{config_error, RunConfig};
use crate::output::csv_float;

pub const COMMANDS: [&str; 10] = [
    "multipliers",
    "jordan",
    "discriminant-zeros",
    "multipoint",
    "monodromy",
    "spectrum-scan",
    "oracle-check",
    "vandermonde-check",
    "asymptotics",
    "definition1-sets",
];

#[derive(Default)]
pub struct Outcome {
    pub operator: Option<OperatorConfig>,
    pub result: Value,
    /// For checking commands: whether every comparison passed.
    pub pass: Option<bool>,
    pub csv: Option<String>,
    pub diagnostics: Vec<String>,
    /// Per-point numerical failures; any entry makes the run exit with status 3.
    pub failures: Vec<String>,
}

fn to_value<T: Serialize>(x: &T) -> anyhow::Result<Value> {
    serde_json::to_value(x).context("serializing result")
}

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn run(command: &str, cfg: &RunConfig, base: &Path) -> anyhow::Result<Outcome> {
    let tol = &cfg.tolerances;
    if command == "vandermonde-check" {
        return vandermonde_check(cfg);
    }
    let (oc, op) = cfg.build_operator(base)?;
    let mut out = match command {
        "multipliers" => multipliers(cfg, &op, tol)?,
        "jordan" => jordan(cfg, &op, tol)?,
        "discriminant-zeros" => Outcome {
            result: to_value(&discriminant_zeros(&op, &cfg.rect()?, tol)?)?,
            ..Default::default()
        },
        "multipoint" => multipoint(cfg, &op, tol)?,
        "monodromy" => monodromy(cfg, &op, tol)?,
        "spectrum-scan" => spectrum(cfg, &op, tol)?,
        "oracle-check" => oracle_check(cfg, &op, tol)?,
        "asymptotics" => asymptotics(cfg, &op, tol)?,
        "definition1-sets" => Outcome {
            result: to_value(&definition1_sets(&op, &cfg.rect()?, tol)?)?,
            ..Default::default()
        },
        other => return Err(config_error(format!("unknown command '{other}'"))),
    };
    out.operator = Some(oc);
    Ok(out)
}

fn multipliers(
    cfg: &RunConfig,
    op: &PeriodicOperator,
    tol: &Tolerances,
) -> anyhow::Result<Outcome> {
    let pts = cfg.points()?;
    let n = op.order();
    let mut header = vec!["lambda_re".to_string(), "lambda_im".to_string()];
    for k in 0..n {
        header.push(format!("r{k}_re"));
        header.push(format!("r{k}_im"));
    }
    header.extend(["det_re", "det_im", "discriminant_mismatch", "est_error"].map(String::from));
    let mut csv = header.join(",") + "\n";
    let mut rows = Vec::new();
    let mut out = Outcome::default();
    for (lam, rec) in pts.iter().zip(floquet_records(op, &pts, tol)) {
        match rec {
            Ok(r) => {
                let mut cells = vec![csv_float(lam.re), csv_float(lam.im)];
                for m in &r.multipliers {
                    cells.push(csv_float(m.re));
                    cells.push(csv_float(m.im));
                }
                cells.extend([
                    csv_float(r.det.re),
                    csv_float(r.det.im),
                    csv_float(r.discriminant_mismatch()),
                    csv_float(r.est_error),
                ]);
                csv += &(cells.join(",") + "\n");
                rows.push(json!({
                    "lambda": c(*lam),
                    "multipliers": r.multipliers.iter().map(|z| c(*z)).collect::<Vec<_>>(),
                    "log_multipliers": r.log_multipliers.iter().map(|z| c(*z)).collect::<Vec<_>>(),
                    "det": c(r.det),
                    "discriminant": c(r.discriminant),
                    "discriminant_mismatch": r.discriminant_mismatch(),
                    "est_error": r.est_error,
                }));
            }
            Err(e) => out.failures.push(format!("λ = {lam}: {e}")),
        }
    }
    out.diagnostics.push(format!(
        "{} points, {} failed",
        pts.len(),
        out.failures.len()
    ));
    out.result = json!({ "points": rows });
    out.csv = Some(csv);
    Ok(out)
}

fn jordan(cfg: &RunConfig, op: &PeriodicOperator, tol: &Tolerances) -> anyhow::Result<Outcome> {
    let pts = cfg.points()?;
    let profiles: Vec<_> = pts
        .par_iter()
        .map(|&l| jordan_profile(op, l, tol))
        .collect();
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for (lam, p) in pts.iter().zip(profiles) {
        match p {
            Ok(p) => rows.push(json!({
                "lambda": c(*lam),
                "diagonalizable": p.is_diagonalizable(),
                "clusters": p.clusters.iter().map(|cl| json!({
                    "multiplier": c(cl.multiplier),
                    "algebraic": cl.algebraic,
                    "geometric": cl.geometric,
                    "block_sizes": cl.block_sizes,
                    "gap_ratio": cl.gap_ratio,
                })).collect::<Vec<_>>(),
            })),
            Err(e) => out.failures.push(format!("λ = {lam}: {e}")),
        }
    }
    out.result = json!({ "profiles": rows });
    Ok(out)
}

fn multipoint(cfg: &RunConfig, op: &PeriodicOperator, tol: &Tolerances) -> anyhow::Result<Outcome> {
    let res = find_spectrum(op, &cfg.rect()?, tol)?;
    let mut out = Outcome::default();
    for h in &res.hits {
        if let Some(e) = &h.classification_error {
            out.diagnostics
                .push(format!("μ = {}: classification failed: {e}", h.mu));
        }
    }
    out.result = to_value(&res)?;
    Ok(out)
}

fn monodromy(cfg: &RunConfig, op: &PeriodicOperator, tol: &Tolerances) -> anyhow::Result<Outcome> {
    let r = cfg
        .radius
        .ok_or_else(|| config_error("monodromy needs radius"))?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(config_error("radius must be positive"));
    }
    let trace = monodromy_permutation(op, r, cfg.steps, tol)?;
    let mut csv = String::from("theta,branch,value_re,value_im\n");
    for (t, vals) in trace.thetas.iter().zip(&trace.values) {
        for (k, v) in vals.iter().enumerate() {
            csv += &format!(
                "{},{k},{},{}\n",
                csv_float(*t),
                csv_float(v.re),
                csv_float(v.im)
            );
        }
    }
    Ok(Outcome {
        result: json!({
            "radius": r,
            "permutation": trace.permutation,
            "cycles": trace.cycles,
            "min_normalized_discriminant": trace.min_normalized_discriminant,
            "refinements": trace.refinements,
            "samples": trace.thetas.len(),
        }),
        csv: Some(csv),
        ..Default::default()
    })
}

fn spectrum(cfg: &RunConfig, op: &PeriodicOperator, tol: &Tolerances) -> anyhow::Result<Outcome> {
    let (lo, hi, n) = cfg.interval()?;
    let s = spectrum_scan(op, (lo, hi), n, tol)?;
    let mut csv = String::from("s,lambda,band_distance\n");
    for (x, d) in &s.samples {
        csv += &format!(
            "{},{},{}\n",
            csv_float(*x),
            csv_float(s.sign * x),
            csv_float(*d)
        );
    }
    Ok(Outcome {
        result: json!({ "sign": s.sign, "interval": [lo, hi], "bands": to_value(&s.bands)? }),
        csv: Some(csv),
        ..Default::default()
    })
}

fn asymptotics(
    cfg: &RunConfig,
    op: &PeriodicOperator,
    tol: &Tolerances,
) -> anyhow::Result<Outcome> {
    use AsymptoticQuantity::*;
    let qs = cfg.quantities.clone().unwrap_or_else(|| {
        vec![
            MultiplierRatio,
            FundamentalRatio,
            HRatio,
            PhiRatio,
            LogDerivative,
        ]
    });
    let plan = cfg.plan.clone().unwrap_or(SamplePlan::Ray {
        angle: 0.3,
        r_min: 1e2,
        r_max: 1e5,
        count: 12,
    });
    let mut out = Outcome::default();
    let mut fits = serde_json::Map::new();
    for q in qs {
        match validate_asymptotics(op, q, &plan, cfg.delta, tol) {
            Ok(f) => {
                fits.insert(q.name().to_string(), to_value(&f)?);
            }
            Err(e) => out.failures.push(format!("{}: {e}", q.name())),
        }
    }
    out.result = json!({ "plan": to_value(&plan)?, "delta": cfg.delta, "fits": fits });
    Ok(out)
}

fn vandermonde_check(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let (nodes, sizes) = match &cfg.vandermonde {
        Some(v) => (
            v.nodes.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            v.sizes.clone(),
        ),
        None => (
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
            ],
            vec![2, 3, 1],
        ),
    };
    let spec = ConfluentSpec::new(nodes, sizes).map_err(|e| config_error(e.to_string()))?;
    let d = confluent_det(&spec)?;
    let pass = d.rel_diff <= 1e-10;
    Ok(Outcome {
        result: json!({
            "nodes": spec.nodes.iter().map(|z| c(*z)).collect::<Vec<_>>(),
            "sizes": spec.sizes,
            "direct": c(d.direct),
            "product": c(d.product),
            "rel_diff": d.rel_diff,
        }),
        pass: Some(pass),
        ..Default::default()
    })
}

/// Greedy nearest matching of two multisets; returns the worst relative distance.
fn multiset_gap(found: &[Complex64], want: &[Complex64]) -> f64 {
    if found.len() != want.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; found.len()];
    let mut worst: f64 = 0.0;
    for w in want {
        let (i, d) = found
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, z)| (i, (z - w).norm() / w.norm().max(1e-300)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((0, f64::INFINITY));
        used[i] = true;
        worst = worst.max(d);
    }
    worst
}

fn sample_lambdas(r: f64) -> Vec<Complex64> {
    (0..24)
        .map(|k| {
            let m = r * 10f64.powf(-2.0 * (k % 6) as f64 / 5.0);
            Complex64::from_polar(m, 0.37 + 2.0 * std::f64::consts::PI * k as f64 / 24.0)
        })
        .collect()
}

fn oracle_check(
    cfg: &RunConfig,
    op: &PeriodicOperator,
    tol: &Tolerances,
) -> anyhow::Result<Outcome> {
    let (n, b, r) = (op.order(), op.period(), cfg.oracle_radius);
    if !(r > 0.0 && r.is_finite()) {
        return Err(config_error("oracle_radius must be positive"));
    }
    let lams = sample_lambdas(r);
    let records = floquet_records(op, &lams, tol);
    let mut worst_mult: f64 = 0.0;
    for (lam, rec) in lams.iter().zip(&records) {
        let rec = rec.as_ref().map_err(|e| anyhow!("λ = {lam}: {e}"))?;
        let want = match op.form() {
            FormTag::Unperturbed => tilde_multipliers(&UnperturbedContext::new(n, b)?, *lam),
            FormTag::Constant => {
                let gammas = op.coefficients().iter().map(|p| p.mean()).collect();
                const_coeff_multipliers(&ConstCoeffContext::new(n, b, gammas)?, *lam)?
            }
            _ => {
                return Err(config_error(
                    "oracle-check needs an unperturbed or constant-coefficient operator",
                ))
            }
        };
        worst_mult = worst_mult.max(multiset_gap(&rec.multipliers, &want));
    }
    let mult_pass = worst_mult <= 1e-8;
    let mut checks = serde_json::Map::new();
    checks.insert(
        "multipliers".into(),
        json!({ "samples": lams.len(), "worst_relative_error": worst_mult, "pass": mult_pass }),
    );
    let mut pass = mult_pass;
    if op.form() == FormTag::Unperturbed {
        let ctx = UnperturbedContext::new(n, b)?;
        let m_trunc = cfg.truncation.unwrap_or(tol.product_truncation);
        let worst_h = lams
            .par_iter()
            .map(|&l| -> anyhow::Result<f64> {
                let h = h_eval(op, l, tol)?.h_value();
                let o = tilde_h(&ctx, l, m_trunc).value;
                Ok((h - o).norm() / o.norm())
            })
            .collect::<anyhow::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let h_pass = worst_h <= 1e-8;
        checks.insert(
            "h_product".into(),
            json!({ "samples": lams.len(), "worst_relative_error": worst_h, "pass": h_pass }),
        );

        let mut want = Vec::new();
        for d in 1..n {
            for m in 1.. {
                let v = tilde_double_points(&ctx, m, d)?;
                if v.abs() > r {
                    break;
                }
                want.push(Complex64::new(v, 0.0));
            }
        }
        let res = find_spectrum(op, &Rect::new(-r, r, -r, r)?, tol)?;
        let found: Vec<Complex64> = res
            .hits
            .iter()
            .filter(|h| h.mu.norm() <= r)
            .flat_map(|h| std::iter::repeat(h.mu).take(h.m_a))
            .collect();
        let worst_z = multiset_gap(&found, &want);
        let z_pass = worst_z <= 1e-6;
        checks.insert(
            "h_zeros".into(),
            json!({
                "radius": r,
                "expected": want.len(),
                "found": found.len(),
                "worst_relative_error": if worst_z.is_finite() { json!(worst_z) } else { Value::Null },
                "pass": z_pass,
            }),
        );
        pass &= h_pass && z_pass;
    }
    Ok(Outcome {
        result: Value::Object(checks),
        pass: Some(pass),
        ..Default::default()
    })
}
