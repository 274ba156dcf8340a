//! The pure-power operator D^n against closed forms written out here.

use std::f64::consts::PI;

use floquet::asymptotics::spectrum_scan;
use floquet::contour::{find_zeros, Rect, Scaled, ScanOptions};
use floquet::floquet::jordan_profile;
use floquet::multipoint::{find_spectrum, h_eval};
use floquet::operator::PeriodicOperator;
use floquet::oracle::{tilde_fundamental, tilde_h, UnperturbedContext};
use floquet::{Complex64, Tolerances};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(−1)^d (πm / (b sin(πd/n)))^n` for `m ≥ 1`, `1 ≤ d ≤ n−1`, sorted, repeated by coincidence.
fn double_points(n: usize, b: f64, r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for d in 1..n {
        let s = (PI * d as f64 / n as f64).sin();
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        for m in 1.. {
            let v = (PI * m as f64 / (b * s)).powi(n as i32);
            if v > r_max {
                break;
            }
            out.push(sign * v);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Zeros found by a scan, expanded by multiplicity and sorted by real part.
fn expanded(zeros: impl Iterator<Item = (Complex64, usize)>, r_max: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = zeros
        .filter(|(z, _)| z.norm() <= r_max)
        .flat_map(|(z, k)| std::iter::repeat(z).take(k))
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re));
    out
}

fn assert_matches(found: &[Complex64], want: &[f64], rel: f64) {
    assert_eq!(found.len(), want.len(), "found {found:?}, want {want:?}");
    for (z, w) in found.iter().zip(want) {
        assert!((z - w).norm() <= rel * w.abs(), "{z} vs {w}");
    }
}

#[test]
fn h_matches_product_on_grid() {
    let tol = Tolerances::default();
    for n in [2usize, 3, 4] {
        let op = PeriodicOperator::unperturbed(n, 1.0).unwrap();
        let ctx = UnperturbedContext::new(n, 1.0).unwrap();
        let mut worst = 0.0f64;
        for i in 0..10 {
            let r = 10f64.powf(1.0 + 2.0 * i as f64 / 9.0);
            for k in 0..20 {
                let lam = Complex64::from_polar(r, (k as f64 + 0.5) * PI / 10.0);
                let h = h_eval(&op, lam, &tol).unwrap().h_value();
                let o = tilde_h(&ctx, lam, 10_000).value;
                worst = worst.max((h - o).norm() / o.norm());
            }
        }
        assert!(worst <= 1e-8, "n={n}: worst relative gap {worst:.3e}");
    }
}

#[test]
fn multipoint_spectrum_is_the_double_point_set() {
    let tol = Tolerances::default();
    for (n, r_max) in [(3usize, 1e3), (4, 500.0)] {
        let op = PeriodicOperator::unperturbed(n, 1.0).unwrap();
        let res =
            find_spectrum(&op, &Rect::new(-r_max, r_max, -r_max, r_max).unwrap(), &tol).unwrap();
        for h in &res.hits {
            assert!(h.m_a >= h.m_g, "m_a {} < m_g {} at {}", h.m_a, h.m_g, h.mu);
            if h.m_a == 1 {
                assert_eq!(h.m_g, 1);
            }
        }
        let found = expanded(res.hits.iter().map(|h| (h.mu, h.m_a)), r_max);
        assert_matches(&found, &double_points(n, 1.0, r_max), 1e-6);
    }
}

#[test]
fn product_zeros_are_the_double_points() {
    let ctx = UnperturbedContext::new(3, 1.0).unwrap();
    let f = |l: Complex64| Ok(Scaled::new(tilde_h(&ctx, l, 2000).value));
    let r_max = 1e3;
    let scan = find_zeros(
        &f,
        &Rect::new(-r_max, r_max, -r_max, r_max).unwrap(),
        &ScanOptions::default().with_resolution(3, 1.0),
    )
    .unwrap();
    let found = expanded(scan.zeros.iter().map(|z| (z.lambda, z.multiplicity)), r_max);
    assert_matches(&found, &double_points(3, 1.0, r_max), 1e-9);
}

#[test]
fn first_fundamental_solution_has_real_negative_zeros() {
    for n in [3usize, 4] {
        let ctx = UnperturbedContext::new(n, 1.0).unwrap();
        let f = |l: Complex64| tilde_fundamental(&ctx, 1.0, l, 1).map(Scaled::new);
        let scan = find_zeros(
            &f,
            &Rect::new(-200.0, 200.0, -200.0, 200.0).unwrap(),
            &ScanOptions::default().with_resolution(n, 1.0),
        )
        .unwrap();
        let inside: Vec<_> = scan
            .zeros
            .iter()
            .filter(|z| z.lambda.norm() <= 200.0)
            .collect();
        assert!(!inside.is_empty());
        for z in inside {
            assert!(
                z.lambda.re < 0.0 && z.lambda.im.abs() < 1e-8 * z.lambda.norm(),
                "n={n}: zero at {}",
                z.lambda
            );
        }
    }
}

/// First `count` sign changes of `x ↦ ũ_j(x; λ)` on `(0, x_max]`, bisected.
fn x_zeros(ctx: &UnperturbedContext, lam: f64, j: usize, count: usize, x_max: f64) -> Vec<f64> {
    let g = |x: f64| tilde_fundamental(ctx, x, c(lam, 0.0), j).unwrap().re;
    let steps = 4000;
    let mut out = Vec::new();
    let mut prev = (1e-6, g(1e-6));
    for i in 1..=steps {
        let x = x_max * i as f64 / steps as f64;
        let v = g(x);
        if v.signum() != prev.1.signum() {
            let (mut a, mut b) = (prev.0, x);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if g(m).signum() == g(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
            if out.len() == count {
                break;
            }
        }
        prev = (x, v);
    }
    out
}

#[test]
fn x_zeros_interlace() {
    let lam = -10.0;
    for n in [3usize, 4] {
        let ctx = UnperturbedContext::new(n, 1.0).unwrap();
        let zeros: Vec<Vec<f64>> = (1..=n).map(|j| x_zeros(&ctx, lam, j, 3, 12.0)).collect();
        for (j, z) in zeros.iter().enumerate() {
            assert_eq!(z.len(), 3, "n={n}, j={}: {z:?}", j + 1);
        }
        // x^1_k < x^2_k < … < x^n_k < x^1_{k+1}
        let mut seq = Vec::new();
        for k in 0..3 {
            for j in 0..n {
                seq.push(zeros[j][k]);
            }
        }
        assert!(seq.windows(2).all(|w| w[0] < w[1]), "n={n}: {zeros:?}");
    }
}

#[test]
fn diagonalizable_away_from_zero() {
    let tol = Tolerances::default();
    for n in [2usize, 3, 4] {
        let op = PeriodicOperator::unperturbed(n, 1.0).unwrap();
        for i in 0..100 {
            let r = 10f64.powf(-1.0 + 3.0 * (i % 10) as f64 / 9.0);
            // Avoid the double-point rays exactly: angles offset from multiples of π/n.
            let lam = Complex64::from_polar(r, 0.3 + 2.0 * PI * (i / 10) as f64 / 10.0);
            let p = jordan_profile(&op, lam, &tol).unwrap();
            assert!(
                p.is_diagonalizable(),
                "n={n} λ={lam}: {:?}",
                p.clusters
                    .iter()
                    .map(|c| &c.block_sizes)
                    .collect::<Vec<_>>()
            );
        }
        let p = jordan_profile(&op, c(0.0, 0.0), &tol).unwrap();
        assert_eq!(p.clusters.len(), 1);
        assert_eq!(p.clusters[0].block_sizes, vec![n]);
    }
}

#[test]
fn even_order_single_band_from_zero() {
    let tol = Tolerances::default();
    let op = PeriodicOperator::unperturbed(4, 1.0).unwrap();
    let s = spectrum_scan(&op, (-50.0, 2000.0), 200, &tol).unwrap();
    assert_eq!(s.bands.len(), 1, "{:?}", s.bands);
    assert!(
        s.bands[0].lo.abs() <= tol.band_tol.max(1e-8),
        "{}",
        s.bands[0].lo
    );
}
