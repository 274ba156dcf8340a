//! The multipoint problem `𝓛u = λu`, `u(0) = u(b) = … = u((n−1)b) = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::contour::{find_zeros, ContourScan, Rect, Scaled, ScanOptions, ZeroHit};
use crate::error::{FloquetError, Result};
use crate::floquet::{floquet_chains_of, floquet_record, jordan_profile_of, FloquetRecord};
use crate::linalg::{self, rank_from_sigma, CMatrix, CVector};
use crate::ode::{dominant_growth_rate, propagate, OdeOptions};
use crate::operator::PeriodicOperator;

#[derive(Clone, Debug, Serialize)]
pub struct MultipointMatrix {
    pub lambda: Complex64,
    /// Row `k` holds `u_j(kb)`, `k = 0…n−1`, scaled by `e^{−row_log_scales[k]}`.
    pub m: CMatrix,
    pub row_log_scales: Vec<f64>,
    /// Rows `u_j(kb)` for `k = −back…n−1−back`; equals `M T^{−back}`, so has the same determinant.
    pub centered: CMatrix,
    pub centered_log_scales: Vec<f64>,
    pub back: usize,
    /// `H` from the centered rows.
    pub h: Scaled,
    /// `T^{−back}` up to a positive factor.
    #[serde(skip)]
    pub inverse_power: CMatrix,
}

impl MultipointMatrix {
    /// `H(λ)`; overflows to infinity for very large `|λ|`.
    pub fn h_value(&self) -> Complex64 {
        self.h.value()
    }

    /// `det M` from the forward rows.
    pub fn forward_determinant(&self) -> Scaled {
        Scaled::with_scale(
            linalg::determinant(&self.m),
            self.row_log_scales.iter().sum(),
        )
    }

    /// Determinant of the trailing `(n−1)×(n−1)` block of `M`, which equals `det M` since row 0 is `e₁`.
    pub fn reduced_determinant(&self) -> Scaled {
        let n = self.m.nrows();
        let sub = self.m.view((1, 1), (n - 1, n - 1)).into_owned();
        Scaled::with_scale(linalg::determinant(&sub), self.row_log_scales.iter().sum())
    }

    /// Unscaled forward rows; entries overflow when the scales are large.
    pub fn matrix(&self) -> CMatrix {
        let mut out = self.m.clone();
        for (k, mut row) in out.row_iter_mut().enumerate() {
            row.scale_mut(self.row_log_scales[k].exp());
        }
        out
    }
}

const SHIFT_THRESHOLD: f64 = 30.0;

fn shifted(tol: &Tolerances, rate: f64, span: f64, sign: f64) -> OdeOptions {
    let opts = OdeOptions::from_tolerances(tol);
    if rate * span > SHIFT_THRESHOLD {
        opts.with_growth_shift(sign * rate)
    } else {
        opts
    }
}

/// First rows of the fundamental matrix at `kb` for `k = 1…fwd` and `k = −1…−bwd`.
fn first_rows(
    op: &PeriodicOperator,
    lambda: Complex64,
    fwd: usize,
    bwd: usize,
    tol: &Tolerances,
) -> Result<(Vec<(CVector, f64)>, Vec<(CVector, f64)>, CMatrix)> {
    let n = op.order();
    let b = op.period();
    let id = CMatrix::identity(n, n);
    let row = |st: &CMatrix, ls: f64| -> (CVector, f64) {
        let v = CVector::from_fn(n, |j, _| st[(0, j)]);
        let mx = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let f = if mx > 0.0 { mx } else { 1.0 };
        (v / Complex64::new(f, 0.0), ls + f.ln())
    };
    let mut f_rows = Vec::new();
    if fwd > 0 {
        let opts = shifted(tol, dominant_growth_rate(n, lambda), fwd as f64 * b, 1.0);
        let targets: Vec<f64> = (1..=fwd).map(|k| k as f64 * b).collect();
        let p = propagate(op, lambda, 0.0, &id, &targets, &opts)?;
        f_rows = p
            .states
            .iter()
            .zip(&p.log_scales)
            .map(|(s, &l)| row(s, l))
            .collect();
    }
    let mut b_rows = Vec::new();
    let mut inv = id.clone();
    if bwd > 0 {
        // Backward growth is governed by the roots of (−1)^n λ.
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let opts = shifted(
            tol,
            dominant_growth_rate(n, lambda * sign),
            bwd as f64 * b,
            -1.0,
        );
        let targets: Vec<f64> = (1..=bwd).map(|k| -(k as f64) * b).collect();
        let p = propagate(op, lambda, 0.0, &id, &targets, &opts)?;
        b_rows = p
            .states
            .iter()
            .zip(&p.log_scales)
            .map(|(s, &l)| row(s, l))
            .collect();
        inv = p.states[bwd - 1].clone();
    }
    Ok((f_rows, b_rows, inv))
}

fn e1(n: usize) -> (CVector, f64) {
    let mut v = CVector::zeros(n);
    v[0] = Complex64::new(1.0, 0.0);
    (v, 0.0)
}

fn assemble(rows: &[&(CVector, f64)]) -> (CMatrix, Vec<f64>) {
    let n = rows.len();
    let m = CMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
    (m, rows.iter().map(|r| r.1).collect())
}

fn centered(
    n: usize,
    f_rows: &[(CVector, f64)],
    b_rows: &[(CVector, f64)],
    back: usize,
) -> (CMatrix, Vec<f64>) {
    let first = e1(n);
    let mut rows: Vec<&(CVector, f64)> = b_rows[..back].iter().rev().collect();
    rows.push(&first);
    rows.extend(f_rows[..n - 1 - back].iter());
    assemble(&rows)
}

/// `H(λ)` alone, from rows at `kb` centred on `x = 0`.
pub fn h_scaled(op: &PeriodicOperator, lambda: Complex64, tol: &Tolerances) -> Result<Scaled> {
    let n = op.order();
    let back = (n - 1) / 2;
    let (f_rows, b_rows, _) = first_rows(op, lambda, n - 1 - back, back, tol)?;
    let (c, ls) = centered(n, &f_rows, &b_rows, back);
    Ok(Scaled::with_scale(linalg::determinant(&c), ls.iter().sum()))
}

pub fn h_eval(
    op: &PeriodicOperator,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<MultipointMatrix> {
    let n = op.order();
    let back = (n - 1) / 2;
    let (f_rows, b_rows, inverse_power) = first_rows(op, lambda, n - 1, back, tol)?;
    let first = e1(n);
    let mut fw: Vec<&(CVector, f64)> = vec![&first];
    fw.extend(f_rows.iter());
    let (m, row_log_scales) = assemble(&fw);
    let (c, centered_log_scales) = centered(n, &f_rows, &b_rows, back);
    let h = Scaled::with_scale(linalg::determinant(&c), centered_log_scales.iter().sum());
    Ok(MultipointMatrix {
        lambda,
        m,
        row_log_scales,
        centered: c,
        centered_log_scales,
        back,
        h,
        inverse_power,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FloquetMember {
    pub multiplier: Complex64,
    pub rank: usize,
    pub coefficients: CVector,
    /// Whether `(T − r)g` lies in the eigenspace (trivially true for rank 1).
    pub predecessor_in_space: bool,
    pub predecessor_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenspaceReport {
    pub mu: Complex64,
    /// `‖T N − N T_D‖ / ‖T‖` for an orthonormal eigenspace basis `N`.
    pub invariance_residual: f64,
    pub members: Vec<FloquetMember>,
    pub pure_count: usize,
    pub generalized_count: usize,
    /// Largest `|ψ(kb)|` over `k = 0…2n` relative to the cancellation-free size of the sum.
    pub vanishing_residual: f64,
    pub vanishing_points: usize,
    /// Chain ranks fit inside the Jordan blocks of `T(μ)`; `None` when that profile is unavailable.
    pub consistent_with_t: Option<bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralHit {
    pub mu: Complex64,
    pub m_a: usize,
    pub m_g: usize,
    pub rank_gap_ratio: f64,
    pub rank_ambiguous: bool,
    /// Unit coefficient vectors in the fundamental basis.
    pub eigenbasis: Vec<CVector>,
    pub classification: Option<EigenspaceReport>,
    pub classification_error: Option<String>,
    pub zero: ZeroHit,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub scan: ContourScan,
    pub hits: Vec<SpectralHit>,
}

/// Geometric multiplicity and eigenbasis at a zero of `H`.
pub fn eigenspace(
    op: &PeriodicOperator,
    mu: Complex64,
    tol: &Tolerances,
) -> Result<(usize, f64, bool, Vec<CVector>)> {
    let mm = h_eval(op, mu, tol)?;
    let eq = linalg::equilibrate_rows(&mm.centered);
    let sigma = linalg::singular_values(&eq);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let dec = rank_from_sigma(&sigma, tol.rank_tol * smax, tol.rank_gap);
    let n = op.order();
    let null = linalg::null_space(&eq, dec.rank);
    let basis = null
        .column_iter()
        .map(|y| {
            // The centered matrix is `M T^{−back}`, so `c = T^{−back} y`.
            let c = &mm.inverse_power * y;
            let nrm = c.norm();
            c / Complex64::new(nrm, 0.0)
        })
        .collect();
    Ok((n - dec.rank, dec.gap_ratio, dec.ambiguous, basis))
}

pub fn find_spectrum(
    op: &PeriodicOperator,
    region: &Rect,
    tol: &Tolerances,
) -> Result<SpectrumResult> {
    tol.validate()?;
    let f = |l: Complex64| h_scaled(op, l, tol);
    let scan = find_zeros(
        &f,
        region,
        &ScanOptions::from_tolerances(tol).with_resolution(op.order(), op.period()),
    )?;
    let mut hits = Vec::with_capacity(scan.zeros.len());
    for z in &scan.zeros {
        let (m_g, gap, ambiguous, basis) = eigenspace(op, z.lambda, tol)?;
        let mut hit = SpectralHit {
            mu: z.lambda,
            m_a: z.multiplicity,
            m_g,
            rank_gap_ratio: gap,
            rank_ambiguous: ambiguous,
            eigenbasis: basis,
            classification: None,
            classification_error: None,
            zero: z.clone(),
        };
        match verify_theorem3(op, &hit, tol) {
            Ok(r) => hit.classification = Some(r),
            Err(e) => hit.classification_error = Some(e.to_string()),
        }
        hits.push(hit);
    }
    Ok(SpectrumResult { scan, hits })
}

fn frob(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Vanishing check: `max_k |e₁ᵀ T^k c| / (‖e₁ᵀ T^k‖ ‖c‖)` over `k = 0…2n`.
fn vanishing_residual(rec: &FloquetRecord, c: &CVector) -> f64 {
    let n = rec.order();
    let mut row = CMatrix::zeros(1, n);
    row[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for _ in 0..=2 * n {
        let v = (&row * c)[(0, 0)].norm();
        let scale = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * c.norm();
        worst = worst.max(v / scale.max(1e-300));
        row = &row * &rec.t;
        let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            row /= Complex64::new(m, 0.0);
        }
    }
    worst
}

/// Decomposes the eigenspace of a hit into pure and generalized Floquet solutions.
pub fn verify_theorem3(
    op: &PeriodicOperator,
    hit: &SpectralHit,
    tol: &Tolerances,
) -> Result<EigenspaceReport> {
    if hit.eigenbasis.is_empty() {
        return Err(FloquetError::Classification("empty eigenspace".into()));
    }
    let rec = floquet_record(op, hit.mu, tol)?;
    let n = op.order();
    let s = rec.log_scale;
    let big = CMatrix::from_columns(&hit.eigenbasis);
    let q = linalg::orthonormal_basis(&big, 1e-10);
    let g = q.ncols();
    let t = &rec.t;
    let td = q.adjoint() * t * &q;
    let invariance_residual = frob(&(t * &q - &q * &td)) / frob(t).max(1e-300);
    if invariance_residual > 1e-6 {
        return Err(FloquetError::Classification(format!(
            "eigenspace is not invariant under T: residual {invariance_residual:.3e}"
        )));
    }
    let ev = linalg::eigenvalues(&td)?;
    let mut profile = jordan_profile_of(&td, &ev, tol)?;
    profile.lambda = hit.mu;
    profile.log_scale = s;
    for cl in &mut profile.clusters {
        cl.multiplier *= s.exp();
    }
    let chains = floquet_chains_of(&profile)?;
    let proj = CMatrix::identity(n, n) - &q * q.adjoint();
    let mut members = Vec::new();
    for ch in &chains {
        let rs = ch.multiplier * (-s).exp();
        for (l, v) in ch.vectors.iter().enumerate() {
            let x = &q * v;
            let image = t * &x - &x * rs;
            let outside = (&proj * &image).norm() / (frob(t) * x.norm()).max(1e-300);
            members.push(FloquetMember {
                multiplier: ch.multiplier,
                rank: l + 1,
                coefficients: &x / Complex64::new(x.norm(), 0.0),
                predecessor_in_space: outside <= 1e-6,
                predecessor_residual: outside,
            });
        }
    }
    let vanishing_residual = hit
        .eigenbasis
        .iter()
        .map(|c| vanishing_residual(&rec, c))
        .fold(0.0, f64::max);
    let consistent_with_t = crate::floquet::jordan_profile(op, hit.mu, tol)
        .ok()
        .map(|tp| {
            chains.iter().all(|ch| {
                tp.clusters.iter().any(|cl| {
                    (cl.multiplier - ch.multiplier).norm()
                        <= 1e-3 * cl.multiplier.norm().max(1e-300)
                        && cl.block_sizes.first().copied().unwrap_or(0) >= ch.rank
                })
            })
        });
    let pure_count = members.iter().filter(|m| m.rank == 1).count();
    let generalized_count = members.len() - pure_count;
    let pass = members.len() == g
        && members.iter().all(|m| m.predecessor_in_space)
        && vanishing_residual <= 1e-7
        && consistent_with_t != Some(false);
    Ok(EigenspaceReport {
        mu: hit.mu,
        invariance_residual,
        members,
        pure_count,
        generalized_count,
        vanishing_residual,
        vanishing_points: 2 * n + 1,
        consistent_with_t,
        pass,
    })
}

/// Values `u(x_i)` of `u = Σ c_j u_j` at increasing points `xs ≥ 0`.
pub fn eigenfunction_values(
    op: &PeriodicOperator,
    lambda: Complex64,
    coefficients: &CVector,
    xs: &[f64],
    tol: &Tolerances,
) -> Result<CVector> {
    let fm = crate::ode::fundamental_matrices(op, lambda, xs, &OdeOptions::from_tolerances(tol))?;
    Ok(CVector::from_iterator(
        xs.len(),
        fm.iter()
            .map(|f| (f.entries.row(0) * coefficients)[(0, 0)] * f.log_scale.exp()),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroFlow {
    pub ts: Vec<f64>,
    pub counts: Vec<i64>,
    pub zeros: Vec<Vec<Complex64>>,
    /// `matching[i][a] = b`: zero `a` at `ts[i]` continues to zero `b` at `ts[i+1]`.
    pub matching: Vec<Vec<usize>>,
}

fn expand(z: &[ZeroHit]) -> Vec<Complex64> {
    z.iter()
        .flat_map(|h| std::iter::repeat(h.lambda).take(h.multiplicity))
        .collect()
}

fn nearest_matching(a: &[Complex64], b: &[Complex64]) -> (Vec<usize>, bool) {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut out = vec![usize::MAX; a.len()];
    let mut clean = true;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        out[i] = j;
        // Ambiguous if the move exceeds half the gap to the nearest other zero.
        let gap = a
            .iter()
            .enumerate()
            .filter(|(k, z)| *k != i && (*z - a[i]).norm() > 0.0)
            .map(|(_, z)| (z - a[i]).norm())
            .fold(f64::INFINITY, f64::min);
        if d > 0.5 * gap {
            clean = false;
        }
    }
    (out, clean)
}

/// Zeros of `H` for the homotopy `t ↦ t·op` (coefficientwise from the unperturbed operator),
/// `t = 0, 1/(steps−1), …, 1`, with the winding count over `region` required constant.
pub fn conserved_zero_flow(
    op: &PeriodicOperator,
    region: &Rect,
    steps: usize,
    tol: &Tolerances,
) -> Result<ZeroFlow> {
    if steps < 2 {
        return Err(FloquetError::InvalidArgument(
            "need at least two homotopy steps".into(),
        ));
    }
    let opts = ScanOptions {
        max_nudges: 0,
        ..ScanOptions::from_tolerances(tol)
    }
    .with_resolution(op.order(), op.period());
    let scan_at = |t: f64| -> Result<(i64, Vec<Complex64>)> {
        let opt = op.scaled(t)?;
        let f = |l: Complex64| h_scaled(&opt, l, tol);
        let s = find_zeros(&f, region, &opts)?;
        Ok((s.total, expand(&s.zeros)))
    };
    let mut ts = Vec::new();
    let mut counts = Vec::new();
    let mut zeros: Vec<Vec<Complex64>> = Vec::new();
    let mut matching = Vec::new();
    let grid: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
    for (i, &t) in grid.iter().enumerate() {
        let (count, zs) = scan_at(t).map_err(|e| match e {
            FloquetError::ZeroOnContour { .. } => FloquetError::CountJump {
                before: counts.first().copied().unwrap_or(-1),
                after: -1,
                t,
            },
            other => other,
        })?;
        if let Some(&c0) = counts.first() {
            if count != c0 {
                return Err(FloquetError::CountJump {
                    before: c0,
                    after: count,
                    t,
                });
            }
        }
        if i > 0 {
            let prev: &Vec<Complex64> = zeros.last().expect("previous step");
            let (mut m, mut clean) = nearest_matching(prev, &zs);
            // Refine between the two parameters when the nearest-neighbour match is ambiguous.
            let mut depth = 0;
            let mut t_lo = grid[i - 1];
            let mut lo = prev.clone();
            let mut chain: Vec<Vec<usize>> = Vec::new();
            while !clean && depth < 6 {
                let t_mid = 0.5 * (t_lo + t);
                let (_, mid) = scan_at(t_mid)?;
                let (m1, c1) = nearest_matching(&lo, &mid);
                chain.push(m1);
                lo = mid;
                t_lo = t_mid;
                let (m2, c2) = nearest_matching(&lo, &zs);
                m = m2;
                clean = c1 && c2;
                depth += 1;
            }
            for link in chain.iter().rev() {
                m = link
                    .iter()
                    .map(|&j| m.get(j).copied().unwrap_or(usize::MAX))
                    .collect();
            }
            matching.push(m);
        }
        ts.push(t);
        counts.push(count);
        zeros.push(zs);
    }
    Ok(ZeroFlow {
        ts,
        counts,
        zeros,
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn h_values_unperturbed() {
        let tol = Tolerances::default();
        let op2 = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        let h = h_eval(&op2, c(-PI * PI, 0.0), &tol).unwrap();
        assert!(h.h_value().norm() < 1e-12);
        assert_eq!(h.m[(0, 0)], c(1.0, 0.0));
        assert_eq!(h.m[(0, 1)], c(0.0, 0.0));
        for n in [2usize, 3, 4] {
            let b = 1.5f64;
            let op = PeriodicOperator::unperturbed(n, b).unwrap();
            let h = h_eval(&op, c(0.0, 0.0), &tol).unwrap();
            let want = b.powi((n * (n - 1) / 2) as i32);
            assert!((h.h_value() - want).norm() < 1e-10 * want);
            let red = h.reduced_determinant();
            assert!((red.value() - h.h_value()).norm() < 1e-9 * want);
            assert!((h.forward_determinant().value() - h.h_value()).norm() < 1e-9 * want);
        }
    }

    #[test]
    fn h_matches_product_oracle() {
        use crate::oracle::{tilde_h, UnperturbedContext};
        let tol = Tolerances::default();
        for n in [2usize, 3, 4] {
            let op = PeriodicOperator::unperturbed(n, 1.0).unwrap();
            let ctx = UnperturbedContext::new(n, 1.0).unwrap();
            for &l in &[c(3.0, 2.0), c(-50.0, 10.0), c(200.0, -80.0)] {
                let h = h_eval(&op, l, &tol).unwrap().h_value();
                let o = tilde_h(&ctx, l, 10_000).value;
                assert!((h - o).norm() < 1e-8 * o.norm(), "n={n} λ={l}: {h} vs {o}");
            }
        }
    }

    #[test]
    fn hill_dirichlet_zeros() {
        let tol = Tolerances::default();
        let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        let region = Rect::new(-45.0, 5.0, -3.0, 3.0).unwrap();
        let res = find_spectrum(&op, &region, &tol).unwrap();
        assert_eq!(res.hits.len(), 2);
        for (h, m) in res.hits.iter().zip([2.0, 1.0]) {
            let want = -PI * PI * m * m;
            assert!((h.mu - want).norm() < 1e-9 * want.abs());
            assert_eq!(h.m_a, 1);
            assert_eq!(h.m_g, 1);
            let cl = h.classification.as_ref().unwrap();
            assert!(cl.pass);
        }
    }

    #[test]
    fn zero_flow_constant_family() {
        let tol = Tolerances::default();
        let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
        let region = Rect::new(-15.0, -5.0, -2.0, 2.0).unwrap();
        let flow = conserved_zero_flow(&op, &region, 3, &tol).unwrap();
        assert!(flow.counts.iter().all(|&k| k == 1));
        assert_eq!(flow.matching, vec![vec![0], vec![0]]);
    }

    #[test]
    fn coexistence_examples() {
        let tol = Tolerances::default();
        let op4 = PeriodicOperator::unperturbed(4, 1.0).unwrap();
        let mu4 = -4.0 * PI.powi(4);
        let res = find_spectrum(&op4, &Rect::around(c(mu4, 0.0), 5.0).unwrap(), &tol).unwrap();
        assert_eq!(res.hits.len(), 1, "{:?}", res.scan.zeros);
        let h = &res.hits[0];
        assert!((h.mu - mu4).norm() < 1e-8 * mu4.abs(), "{}", h.mu);
        assert_eq!((h.m_a, h.m_g), (2, 2));
        let op6 = PeriodicOperator::unperturbed(6, 1.0).unwrap();
        let mu6 = -64.0 * PI.powi(6);
        let res = find_spectrum(&op6, &Rect::around(c(mu6, 0.0), 50.0).unwrap(), &tol).unwrap();
        assert_eq!(res.hits.len(), 1, "{:?}", res.scan.zeros);
        let h = &res.hits[0];
        assert!((h.mu - mu6).norm() < 1e-8 * mu6.abs(), "{}", h.mu);
        assert_eq!((h.m_a, h.m_g), (3, 3));
    }

    #[test]
    fn oscillator_square_classification() {
        let tol = Tolerances::default();
        let op =
            PeriodicOperator::constant(4, PI, &[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        let h = h_eval(&op, c(-1.0, 0.0), &tol).unwrap();
        assert!(h.h.ln_abs() < -20.0, "{}", h.h.ln_abs());
        let res = find_spectrum(&op, &Rect::around(c(-1.0, 0.0), 0.3).unwrap(), &tol).unwrap();
        assert_eq!(res.hits.len(), 1);
        let hit = &res.hits[0];
        assert_eq!(hit.m_g, 2);
        let cl = hit
            .classification
            .as_ref()
            .expect(hit.classification_error.as_deref().unwrap_or(""));
        assert_eq!((cl.pure_count, cl.generalized_count), (1, 1));
        assert!(cl
            .members
            .iter()
            .any(|m| m.rank == 2 && m.predecessor_in_space));
        assert!(cl.vanishing_residual <= 1e-7);
        assert!(cl.pass);
    }

    #[test]
    fn coexistence_eigenfunctions() {
        let tol = Tolerances::default();
        let op = PeriodicOperator::unperturbed(4, 1.0).unwrap();
        let mu = c(-4.0 * PI.powi(4), 0.0);
        let (m_g, _, _, basis) = eigenspace(&op, mu, &tol).unwrap();
        assert_eq!(m_g, 2);
        let xs: Vec<f64> = (1..40).map(|i| i as f64 * 0.07).collect();
        let got = CMatrix::from_columns(
            &basis
                .iter()
                .map(|cv| eigenfunction_values(&op, mu, cv, &xs, &tol).unwrap())
                .collect::<Vec<_>>(),
        );
        let want = CMatrix::from_fn(xs.len(), 2, |i, j| {
            let x = xs[i];
            let e = if j == 0 {
                (PI * x).exp()
            } else {
                (-PI * x).exp()
            };
            c(e * (PI * x).sin(), 0.0)
        });
        assert!(linalg::subspace_sine(&got, &want) < 1e-6);
    }
}
