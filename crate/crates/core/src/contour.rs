//! Zero location for entire functions on rectangles: winding counts by phase tracking,
//! recursive subdivision, circle moments and Newton polish.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{FloquetError, Result};
use crate::poly;

/// `mant · e^{log_scale}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Scaled {
    pub mant: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn new(v: Complex64) -> Self {
        Self {
            mant: v,
            log_scale: 0.0,
        }
    }

    pub fn with_scale(mant: Complex64, log_scale: f64) -> Self {
        Self { mant, log_scale }
    }

    /// Some branch of `log f`; `−∞` real part at an exact zero.
    pub fn ln(&self) -> Complex64 {
        self.mant.ln() + self.log_scale
    }

    pub fn ln_abs(&self) -> f64 {
        self.mant.norm().ln() + self.log_scale
    }

    pub fn value(&self) -> Complex64 {
        self.mant * self.log_scale.exp()
    }

    /// `self / other` without forming either value.
    pub fn ratio(&self, other: &Scaled) -> Complex64 {
        self.mant / other.mant * (self.log_scale - other.log_scale).exp()
    }

    pub fn is_zero(&self) -> bool {
        self.mant.norm() == 0.0
    }
}

/// A function whose zeros are sought.
pub trait ScannedFunction: Sync {
    fn eval(&self, lambda: Complex64) -> Result<Scaled>;
}

impl<F> ScannedFunction for F
where
    F: Fn(Complex64) -> Result<Scaled> + Sync,
{
    fn eval(&self, lambda: Complex64) -> Result<Scaled> {
        self(lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite())
            && re_max > re_min
            && im_max > im_min;
        if !ok {
            return Err(FloquetError::InvalidArgument(format!(
                "degenerate rectangle [{re_min}, {re_max}] × [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Square of half-width `r` about `c`.
    pub fn around(c: Complex64, r: f64) -> Result<Self> {
        Self::new(c.re - r, c.re + r, c.im - r, c.im + r)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diag(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn expanded(&self, frac: f64) -> Self {
        let dw = frac * self.width();
        let dh = frac * self.height();
        Self {
            re_min: self.re_min - dw,
            re_max: self.re_max + dw,
            im_min: self.im_min - dh,
            im_max: self.im_max + dh,
        }
    }

    /// Counter-clockwise corners starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn split(&self, fx: f64, fy: f64) -> [Rect; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        [
            Rect {
                re_min: self.re_min,
                re_max: xm,
                im_min: self.im_min,
                im_max: ym,
            },
            Rect {
                re_min: xm,
                re_max: self.re_max,
                im_min: self.im_min,
                im_max: ym,
            },
            Rect {
                re_min: xm,
                re_max: self.re_max,
                im_min: ym,
                im_max: self.im_max,
            },
            Rect {
                re_min: self.re_min,
                re_max: xm,
                im_min: ym,
                im_max: self.im_max,
            },
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub min_cell: f64,
    pub max_nudges: usize,
    pub max_evals: usize,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    /// Roots whose spread is below this fraction of the moment radius are merged.
    pub cluster_rel: f64,
    /// Known oscillation scale of the scanned function, if any.
    pub resolution: Option<RootResolution>,
}

/// The scanned function oscillates on the scale of `ζ b` with `ζ = λ^{1/n}`:
/// contour samples are kept at most `max_step` apart in `|ζ| b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootResolution {
    pub order: usize,
    pub period: f64,
    pub max_step: f64,
}

impl RootResolution {
    pub fn new(order: usize, period: f64) -> Self {
        Self {
            order,
            period,
            max_step: 0.5,
        }
    }

    /// Bound on the change of `ζ b` between `a` and `b`.
    fn span(&self, a: Complex64, b: Complex64) -> f64 {
        let n = self.order as f64;
        let d = (b - a).norm();
        let r = (0.5 * (a + b)).norm().max(d);
        self.period * d / (n * r.powf(1.0 - 1.0 / n))
    }
}

impl ScanOptions {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self {
            min_cell: tol.min_cell,
            max_nudges: tol.max_nudges,
            max_evals: tol.max_evals,
            newton_max_iter: tol.newton_max_iter,
            newton_tol: tol.newton_tol,
            cluster_rel: 1e-3,
            resolution: None,
        }
    }

    pub fn with_resolution(self, order: usize, period: f64) -> Self {
        Self {
            resolution: Some(RootResolution::new(order, period)),
            ..self
        }
    }
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self::from_tolerances(&Tolerances::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroMethod {
    Newton,
    Moments,
    Cluster,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroHit {
    pub lambda: Complex64,
    pub multiplicity: usize,
    pub method: ZeroMethod,
    /// Radius of the circle the moments were taken on.
    pub radius: f64,
    /// Last Newton step, or root spread for clusters.
    pub accuracy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellCount {
    pub rect: Rect,
    pub count: i64,
    pub depth: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContourScan {
    pub region: Rect,
    pub total: i64,
    pub cells: Vec<CellCount>,
    pub zeros: Vec<ZeroHit>,
    /// Smallest `min |f| / max |f|` over the samples of any accepted contour.
    pub boundary_clearance: f64,
    pub evaluations: usize,
    pub nudges: usize,
}

struct Evaluator<'a, F: ScannedFunction + ?Sized> {
    f: &'a F,
    cache: Mutex<HashMap<(u64, u64), Scaled>>,
    count: AtomicUsize,
    max: usize,
    resolution: Option<RootResolution>,
}

impl<'a, F: ScannedFunction + ?Sized> Evaluator<'a, F> {
    fn new(f: &'a F, opts: &ScanOptions) -> Self {
        Self {
            f,
            cache: Mutex::new(HashMap::new()),
            count: AtomicUsize::new(0),
            max: opts.max_evals,
            resolution: opts.resolution,
        }
    }

    fn key(z: Complex64) -> (u64, u64) {
        (z.re.to_bits(), z.im.to_bits())
    }

    fn eval_many(&self, zs: &[Complex64]) -> Result<Vec<Scaled>> {
        let missing: Vec<Complex64> = {
            let cache = self.cache.lock().expect("cache lock");
            zs.iter()
                .filter(|z| !cache.contains_key(&Self::key(**z)))
                .copied()
                .collect()
        };
        if !missing.is_empty() {
            let used = self.count.fetch_add(missing.len(), Ordering::SeqCst) + missing.len();
            if used > self.max {
                return Err(FloquetError::BudgetExhausted(self.max));
            }
            let vals: Vec<Result<Scaled>> = missing.par_iter().map(|&z| self.f.eval(z)).collect();
            let mut cache = self.cache.lock().expect("cache lock");
            for (z, v) in missing.iter().zip(vals) {
                cache.insert(Self::key(*z), v?);
            }
        }
        let cache = self.cache.lock().expect("cache lock");
        Ok(zs.iter().map(|z| cache[&Self::key(*z)]).collect())
    }
}

/// Phase change of `f` along the segment `a → b`, plus the extreme `ln |f|` seen.
///
/// An interval is accepted once its midpoint splits the phase step into two halves below `π/4`
/// that add up to the whole step, so an aliased `2π` rotation cannot slip through.
fn edge_phase<F: ScannedFunction + ?Sized>(
    ev: &Evaluator<F>,
    a: Complex64,
    b: Complex64,
    min_len: f64,
) -> Result<(f64, f64, f64)> {
    let point = |t: f64| {
        if t == 1.0 {
            b
        } else {
            Complex64::new(a.re + (b.re - a.re) * t, a.im + (b.im - a.im) * t)
        }
    };
    let len = (b - a).norm();
    let ts0: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
    let v0 = ev.eval_many(&ts0.iter().map(|&t| point(t)).collect::<Vec<_>>())?;
    if v0.iter().any(Scaled::is_zero) {
        return Err(FloquetError::ZeroOnContour { nudges: 0 });
    }
    let mut lo = v0.iter().map(Scaled::ln_abs).fold(f64::INFINITY, f64::min);
    let mut hi = v0
        .iter()
        .map(Scaled::ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut pending: Vec<(f64, f64, Scaled, Scaled)> = (0..8)
        .map(|i| (ts0[i], ts0[i + 1], v0[i], v0[i + 1]))
        .collect();
    let mut total = 0.0;
    while !pending.is_empty() {
        if pending.iter().any(|p| (p.1 - p.0) * len < min_len) {
            return Err(FloquetError::ZeroOnContour { nudges: 0 });
        }
        let mids: Vec<Complex64> = pending.iter().map(|p| point(0.5 * (p.0 + p.1))).collect();
        let vm = ev.eval_many(&mids)?;
        let mut next = Vec::new();
        for ((ta, tb, va, vb), m) in pending.into_iter().zip(vm) {
            if m.is_zero() {
                return Err(FloquetError::ZeroOnContour { nudges: 0 });
            }
            lo = lo.min(m.ln_abs());
            hi = hi.max(m.ln_abs());
            let d1 = m.ratio(&va).arg();
            let d2 = vb.ratio(&m).arg();
            let d = vb.ratio(&va).arg();
            let resolved = ev
                .resolution
                .map_or(true, |r| r.span(point(ta), point(tb)) <= r.max_step);
            if resolved
                && d1.abs() <= PI / 4.0
                && d2.abs() <= PI / 4.0
                && (d1 + d2 - d).abs() < 1e-6
            {
                total += d1 + d2;
            } else {
                let tm = 0.5 * (ta + tb);
                next.push((ta, tm, va, m));
                next.push((tm, tb, m, vb));
            }
        }
        pending = next;
    }
    Ok((total, lo, hi))
}

fn rect_winding<F: ScannedFunction + ?Sized>(ev: &Evaluator<F>, r: &Rect) -> Result<(i64, f64)> {
    let c = r.corners();
    let min_len = 1e-9 * r.width().max(r.height());
    let mut total = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..4 {
        let (p, l, h) = edge_phase(ev, c[i], c[(i + 1) % 4], min_len)?;
        total += p;
        lo = lo.min(l);
        hi = hi.max(h);
    }
    let w = total / (2.0 * PI);
    let k = w.round();
    if (w - k).abs() > 0.05 {
        return Err(FloquetError::ZeroOnContour { nudges: 0 });
    }
    Ok((k as i64, (lo - hi).exp()))
}

/// Winding number of `f` around the boundary of `rect`, with its clearance.
pub fn winding_count<F: ScannedFunction + ?Sized>(
    f: &F,
    rect: &Rect,
    opts: &ScanOptions,
) -> Result<(i64, f64)> {
    let ev = Evaluator::new(f, opts);
    rect_winding(&ev, rect)
}

struct CircleMoments {
    winding: i64,
    /// `Σ (z_i − c)^k`, `k = 1…winding`.
    power_sums: Vec<Complex64>,
}

fn circle_moments<F: ScannedFunction + ?Sized>(
    ev: &Evaluator<F>,
    c: Complex64,
    radius: f64,
    max_k: usize,
) -> Result<CircleMoments> {
    let mut k_pts = 64usize;
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let zs: Vec<Complex64> = (0..k_pts)
            .map(|j| c + Complex64::from_polar(radius, 2.0 * PI * j as f64 / k_pts as f64))
            .collect();
        let vals = ev.eval_many(&zs)?;
        if vals.iter().any(Scaled::is_zero) {
            return Err(FloquetError::ZeroOnContour { nudges: 0 });
        }
        let mut steps = Vec::with_capacity(k_pts);
        let mut smooth = true;
        for j in 0..k_pts {
            let d = vals[(j + 1) % k_pts].ratio(&vals[j]).arg();
            if d.abs() > PI / 4.0 {
                smooth = false;
            }
            steps.push(d);
        }
        let total: f64 = steps.iter().sum();
        let winding = (total / (2.0 * PI)).round() as i64;
        if smooth {
            let base = vals[0].ln();
            let mut g = Vec::with_capacity(k_pts);
            let mut phase = base.im;
            for j in 0..k_pts {
                if j > 0 {
                    phase += steps[j - 1];
                }
                let theta = 2.0 * PI * j as f64 / k_pts as f64;
                g.push(Complex64::new(
                    vals[j].ln_abs(),
                    phase - winding as f64 * theta,
                ));
            }
            let m = (winding.max(0) as usize).min(max_k);
            let sums: Vec<Complex64> = (1..=m)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, gj) in g.iter().enumerate() {
                        let theta = 2.0 * PI * (k * j % k_pts) as f64 / k_pts as f64;
                        acc += gj * Complex64::from_polar(1.0, theta);
                    }
                    -(acc / k_pts as f64) * (k as f64) * radius.powi(k as i32)
                })
                .collect();
            if let Some(p) = &prev {
                if p.len() == sums.len() {
                    let stable = p
                        .iter()
                        .zip(&sums)
                        .enumerate()
                        .all(|(k, (a, b))| (a - b).norm() <= 1e-11 * radius.powi(k as i32 + 1));
                    if stable {
                        return Ok(CircleMoments {
                            winding,
                            power_sums: sums,
                        });
                    }
                }
            }
            prev = Some(sums);
        }
        if k_pts >= 4096 {
            return match prev {
                Some(sums) if sums.len() == winding.max(0) as usize => Ok(CircleMoments {
                    winding,
                    power_sums: sums,
                }),
                _ => Err(FloquetError::RootFinder(
                    "circle moments did not converge".into(),
                )),
            };
        }
        k_pts *= 2;
    }
}

/// Newton iteration with a central-difference derivative.
fn newton<F: ScannedFunction + ?Sized>(
    ev: &Evaluator<F>,
    z0: Complex64,
    opts: &ScanOptions,
) -> Result<(Complex64, f64, bool)> {
    let mut z = z0;
    let mut last = f64::INFINITY;
    for _ in 0..opts.newton_max_iter {
        let h = 1e-6 * (1.0 + z.norm());
        let v = ev.eval_many(&[z, z + h, z - h])?;
        if v[0].is_zero() {
            return Ok((z, 0.0, true));
        }
        let dlog = (v[1].ratio(&v[0]) - v[2].ratio(&v[0])) / (2.0 * h);
        if dlog.norm() == 0.0 || !dlog.re.is_finite() {
            return Ok((z, last, false));
        }
        let step = Complex64::new(1.0, 0.0) / dlog;
        z -= step;
        last = step.norm();
        if last < opts.newton_tol * (1.0 + z.norm()) {
            return Ok((z, last, true));
        }
    }
    Ok((z, last, false))
}

fn split_fractions(nudge: usize) -> (f64, f64) {
    let off = 0.01 * nudge as f64 * if nudge % 2 == 0 { 1.0 } else { -1.0 };
    (0.5 - 0.0123 + off, 0.5 + 0.0171 - off)
}

struct ScanState {
    cells: Mutex<Vec<CellCount>>,
    clearance: Mutex<f64>,
    nudges: AtomicUsize,
}

fn resolve_cell<F: ScannedFunction + ?Sized>(
    ev: &Evaluator<F>,
    st: &ScanState,
    rect: Rect,
    count: i64,
    depth: usize,
    opts: &ScanOptions,
) -> Result<Vec<ZeroHit>> {
    st.cells
        .lock()
        .expect("lock")
        .push(CellCount { rect, count, depth });
    if count <= 0 {
        return Ok(Vec::new());
    }
    let size = rect.width().max(rect.height());
    let small = size <= opts.min_cell * (1.0 + rect.center().norm());
    let c = rect.center();
    let radius = 0.75 * rect.diag();
    let moments = circle_moments(ev, c, radius, count as usize);
    if let Ok(m) = &moments {
        if m.winding == count {
            let rel: Vec<Complex64> = if count == 1 {
                vec![m.power_sums[0]]
            } else {
                poly::roots(&poly::from_power_sums(&m.power_sums))?
            };
            let roots: Vec<Complex64> = rel.iter().map(|r| r + c).collect();
            let mean = roots.iter().sum::<Complex64>() / roots.len() as f64;
            let spread = roots.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
            if count == 1 {
                let (z, acc, ok) = newton(ev, roots[0], opts)?;
                if ok && rect.expanded(0.01).contains(z) {
                    return Ok(vec![ZeroHit {
                        lambda: z,
                        multiplicity: 1,
                        method: ZeroMethod::Newton,
                        radius,
                        accuracy: acc,
                    }]);
                }
                if small {
                    return Ok(vec![ZeroHit {
                        lambda: roots[0],
                        multiplicity: 1,
                        method: ZeroMethod::Moments,
                        radius,
                        accuracy: acc,
                    }]);
                }
            } else if spread < opts.cluster_rel * radius {
                return Ok(vec![ZeroHit {
                    lambda: mean,
                    multiplicity: count as usize,
                    method: ZeroMethod::Cluster,
                    radius,
                    accuracy: spread,
                }]);
            } else if small {
                return Ok(roots
                    .into_iter()
                    .map(|z| ZeroHit {
                        lambda: z,
                        multiplicity: 1,
                        method: ZeroMethod::Moments,
                        radius,
                        accuracy: spread,
                    })
                    .collect());
            }
        }
    }
    if small {
        return match moments {
            Err(e) => Err(e),
            Ok(_) => Err(FloquetError::RootFinder(format!(
                "could not isolate {count} zeros in a cell of size {size:.3e} at {c}"
            ))),
        };
    }
    let children = subdivide(ev, st, &rect, count, opts)?;
    let parts: Vec<Result<Vec<ZeroHit>>> = children
        .into_par_iter()
        .map(|(r, k)| resolve_cell(ev, st, r, k, depth + 1, opts))
        .collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn subdivide<F: ScannedFunction + ?Sized>(
    ev: &Evaluator<F>,
    st: &ScanState,
    rect: &Rect,
    count: i64,
    opts: &ScanOptions,
) -> Result<Vec<(Rect, i64)>> {
    let mut last_err = None;
    for nudge in 0..=opts.max_nudges {
        let (fx, fy) = split_fractions(nudge);
        let kids = rect.split(fx, fy);
        let counted: Vec<Result<(i64, f64)>> =
            kids.par_iter().map(|k| rect_winding(ev, k)).collect();
        let mut ok = Vec::with_capacity(4);
        let mut failed = false;
        for (k, r) in kids.iter().zip(counted) {
            match r {
                Ok((n, clr)) => {
                    let mut c = st.clearance.lock().expect("lock");
                    *c = c.min(clr);
                    ok.push((*k, n));
                }
                Err(e @ FloquetError::BudgetExhausted(_)) => return Err(e),
                Err(e) => {
                    last_err = Some(e);
                    failed = true;
                }
            }
        }
        if !failed {
            let sum: i64 = ok.iter().map(|x| x.1).sum();
            if sum == count {
                return Ok(ok);
            }
            last_err = Some(FloquetError::CountJump {
                before: count,
                after: sum,
                t: nudge as f64,
            });
        }
        st.nudges.fetch_add(1, Ordering::SeqCst);
    }
    Err(match last_err {
        Some(FloquetError::ZeroOnContour { .. }) | None => FloquetError::ZeroOnContour {
            nudges: opts.max_nudges,
        },
        Some(e) => e,
    })
}

/// All zeros of `f` in `region` with multiplicities. The region is grown by 1% (up to
/// `max_nudges` times) when its boundary passes through a zero.
pub fn find_zeros<F: ScannedFunction + ?Sized>(
    f: &F,
    region: &Rect,
    opts: &ScanOptions,
) -> Result<ContourScan> {
    let ev = Evaluator::new(f, opts);
    let mut rect = *region;
    let mut nudges = 0;
    let (total, clearance) = loop {
        match rect_winding(&ev, &rect) {
            Ok(v) => break v,
            Err(FloquetError::ZeroOnContour { .. }) if nudges < opts.max_nudges => {
                nudges += 1;
                rect = region.expanded(0.01 * nudges as f64);
            }
            Err(FloquetError::ZeroOnContour { .. }) => {
                return Err(FloquetError::ZeroOnContour { nudges });
            }
            Err(e) => return Err(e),
        }
    };
    if total < 0 {
        return Err(FloquetError::RootFinder(format!(
            "negative winding {total}: function has poles"
        )));
    }
    let st = ScanState {
        cells: Mutex::new(Vec::new()),
        clearance: Mutex::new(clearance),
        nudges: AtomicUsize::new(nudges),
    };
    let mut zeros = resolve_cell(&ev, &st, rect, total, 0, opts)?;
    zeros.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
    let mut cells = st.cells.into_inner().expect("lock");
    cells.sort_by(|a, b| {
        a.depth
            .cmp(&b.depth)
            .then(a.rect.re_min.total_cmp(&b.rect.re_min))
            .then(a.rect.im_min.total_cmp(&b.rect.im_min))
    });
    Ok(ContourScan {
        region: rect,
        total,
        cells,
        zeros,
        boundary_clearance: st.clearance.into_inner().expect("lock"),
        evaluations: ev.count.load(Ordering::SeqCst),
        nudges: st.nudges.load(Ordering::SeqCst),
    })
}
