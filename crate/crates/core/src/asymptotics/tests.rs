use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::config::Tolerances;
use crate::contour::Rect;
use crate::floquet::{floquet_record, PolynomialLambdaMatrix};
use crate::linalg::CMatrix;
use crate::operator::{PeriodicOperator, TrigPolynomial};
use crate::oracle::{principal_root, tilde_double_points, UnperturbedContext};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hill(amp: f64) -> PeriodicOperator {
    PeriodicOperator::hill(TrigPolynomial::cosine(1.0, 1, amp)).unwrap()
}

#[test]
fn exclusion_centers() {
    let e = ExclusionRegion::new(0.1, 1.0, 2).unwrap();
    let hit = e.contains(e.center(1, 1, 2));
    assert!(hit.inside && hit.distance == 0.0);
    let origin = e.contains(c(0.0, 0.0));
    assert!(!origin.inside);
    assert!((origin.distance - PI).abs() < 1e-12);
    for n in [3usize, 4, 5] {
        let e = ExclusionRegion::new(1e-3, 1.0, n).unwrap();
        let ctx = UnperturbedContext::new(n, 1.0).unwrap();
        for m in 1..4 {
            for d in 1..n {
                let lam = tilde_double_points(&ctx, m, d).unwrap();
                let z0 = principal_root(c(lam, 0.0), n);
                for l in 0..n {
                    let z = z0 * ctx.rho_pow(l);
                    let h = e.contains(z);
                    assert!(
                        h.distance < 1e-9 * z.norm(),
                        "n={n} m={m} d={d} l={l}: {}",
                        h.distance
                    );
                }
            }
        }
    }
}

#[test]
fn exclusion_index_swap() {
    // Writing the center formula with j and k exchanged gives the center for −m.
    let e = ExclusionRegion::new(0.1, 1.3, 5).unwrap();
    let n = 5.0;
    for m in 1..4i64 {
        for k in 2..=5usize {
            for j in 1..k {
                let s = (PI * (j as f64 - k as f64) / n).sin();
                let swapped =
                    Complex64::from_polar(PI * m as f64 / (1.3 * s), -PI * (j + k - 2) as f64 / n);
                assert!((swapped - e.center(-m, j, k)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn annuli_avoid_region() {
    let e = ExclusionRegion::new(0.1, 1.0, 3).unwrap();
    let gaps = annulus_gaps(&e, 5.0, 100.0, 0.05);
    assert!(gaps.len() > 5);
    for (a, b) in gaps {
        for r in [a, 0.5 * (a + b), b] {
            for i in 0..720 {
                let z = Complex64::from_polar(r, 2.0 * PI * i as f64 / 720.0);
                assert!(!e.contains(z).inside, "r={r}");
            }
        }
    }
}

#[test]
fn gershgorin_examples() {
    let d = CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![
        c(1.0, 0.0),
        c(-2.0, 1.0),
    ]));
    let r = gershgorin_disks(&d).unwrap();
    assert!(r.disks.iter().all(|x| x.radius == 0.0 && x.isolated));
    assert!(r.contained && r.isolation_consistent);
    let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(3.0, 0.0)]);
    let r = gershgorin_disks(&a).unwrap();
    assert_eq!(r.disks[0].center, c(1.0, 0.0));
    assert!((r.disks[0].radius - 0.1).abs() < 1e-15 && (r.disks[1].radius - 0.2).abs() < 1e-15);
    assert!(r
        .disks
        .iter()
        .all(|x| x.isolated && x.eigenvalue_count == 1));
    // Direct 2×2 eigenvalues: 2 ± sqrt(1 + 0.02).
    let s = 1.02f64.sqrt();
    for want in [2.0 - s, 2.0 + s] {
        assert!(r.eigenvalues.iter().any(|z| (z - want).norm() < 1e-12));
    }
}

#[test]
fn gershgorin_isolates_multipliers_in_exponential_basis() {
    // Conjugating T by the matrix of (ρ^k ζ)^i makes it nearly diagonal for large |ζ|.
    let op = hill(1.0);
    let tol = Tolerances::default();
    let lam = Complex64::from_polar(4.0e4, 1.0);
    let n = 2;
    let zeta = principal_root(lam, n);
    let rec = floquet_record(&op, lam, &tol).unwrap();
    let v = CMatrix::from_fn(n, n, |i, k| {
        (Complex64::from_polar(1.0, PI * k as f64) * zeta).powu(i as u32)
    });
    let y = v.clone().try_inverse().unwrap() * &rec.t * v;
    let r = gershgorin_disks(&y).unwrap();
    assert!(r.contained);
    assert!(r
        .disks
        .iter()
        .all(|d| d.isolated && d.eigenvalue_count == 1));
}

#[test]
fn exp_gap_bounds() {
    let b = lemma_a1_bound(c(1.0, 0.0), 1.0).unwrap();
    assert_eq!(b.branch, BoundBranch::RealPart);
    assert!((b.bound - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    assert!((c(1.0, 0.0).exp() - 1.0).norm() >= b.bound);
    let z = c(0.0, 2.0 * PI * 3.0);
    let b = lemma_a1_bound(z, 0.5).unwrap();
    assert_eq!(b.branch, BoundBranch::Oscillatory);
    assert!(b.uncontrolled_remainder);
    assert!(b.bound < 1e-12);
    assert!((z.exp() - 1.0).norm() < 1e-12);
    for i in -100..=100 {
        for k in -100..=100 {
            let z = c(i as f64 * 0.5, k as f64 * 0.5);
            if z.re.abs() < 0.5 || z.norm() > 50.0 {
                continue;
            }
            let b = lemma_a1_bound(z, 0.5).unwrap();
            assert!((z.exp() - 1.0).norm() >= b.bound - 1e-15, "{z}");
        }
    }
}

#[test]
fn delta_for_beta() {
    let d = corollary_a1_delta(0.01).unwrap();
    assert!(d < 0.02);
    for i in 0..360 {
        let z = Complex64::from_polar(d, 2.0 * PI * i as f64 / 360.0);
        assert!((z.exp() - 1.0).norm() >= 0.01 * (1.0 - 1e-12));
    }
    assert!(corollary_a1_delta(0.5).unwrap() >= corollary_a1_delta(0.25).unwrap());
    let beta = 1e-4f64;
    let d = corollary_a1_delta(beta).unwrap();
    assert!((d - (-(-beta).ln_1p())).abs() < 1e-10);
    assert!((d / beta - 1.0).abs() < 1e-3);
    assert!(corollary_a1_delta(1.0).is_err());
}

#[test]
fn unperturbed_fits_sit_at_noise_floor() {
    let op = PeriodicOperator::unperturbed(3, 1.0).unwrap();
    let tol = Tolerances::default();
    let plan = SamplePlan::Ray {
        angle: 0.4,
        r_min: 10.0,
        r_max: 1e4,
        count: 8,
    };
    for q in [
        AsymptoticQuantity::MultiplierRatio,
        AsymptoticQuantity::HRatio,
        AsymptoticQuantity::FundamentalRatio,
    ] {
        let f = validate_asymptotics(&op, q, &plan, 0.5, &tol).unwrap();
        assert!(
            f.at_noise_floor && f.pass,
            "{}: {:?}",
            f.quantity,
            f.samples
        );
    }
}

#[test]
fn hill_fits_decay() {
    let op = hill(1.0);
    let tol = Tolerances::default();
    let plan = SamplePlan::Ray {
        angle: PI / 3.0,
        r_min: 1e2,
        r_max: 1e6,
        count: 12,
    };
    for q in [
        AsymptoticQuantity::MultiplierRatio,
        AsymptoticQuantity::HRatio,
        AsymptoticQuantity::FundamentalRatio,
        AsymptoticQuantity::PhiRatio,
        AsymptoticQuantity::LogDerivative,
    ] {
        let f = validate_asymptotics(&op, q, &plan, 0.5, &tol).unwrap();
        assert!(
            f.pass,
            "{}: slope {} {:?}",
            f.quantity,
            f.slope,
            f.samples.iter().map(|s| s.error).collect::<Vec<_>>()
        );
    }
}

#[test]
fn too_few_samples_is_degenerate() {
    assert!(matches!(
        fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.5, 0.3]),
        Err(crate::error::FloquetError::FitDegenerate(3))
    ));
}

#[test]
fn unperturbed_band() {
    let op = PeriodicOperator::unperturbed(2, 1.0).unwrap();
    let tol = Tolerances::default();
    let s = spectrum_scan(&op, (-10.0, 100.0), 110, &tol).unwrap();
    assert_eq!(s.bands.len(), 1);
    let b = s.bands[0];
    assert!(b.lo.abs() < 1e-8, "{}", b.lo);
    assert!(!b.lo_clipped && b.hi_clipped && b.hi == 100.0);
}

#[test]
fn oscillator_square_band_edge() {
    let op = PeriodicOperator::constant(4, PI, &[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
    let tol = Tolerances::default();
    let s = spectrum_scan(&op, (-3.0, 5.0), 80, &tol).unwrap();
    assert_eq!(s.bands.len(), 1);
    let edge = crate::oracle::const_coeff_spectrum_edge(2, &[0.0, 2.0]).unwrap();
    assert!((s.bands[0].lo - edge).abs() < 1e-6, "{}", s.bands[0].lo);
}

#[test]
fn hill_gap_near_first_antiperiodic_pair() {
    let op = hill(0.3);
    let tol = Tolerances::default();
    let s = spectrum_scan(&op, (5.0, 15.0), 200, &tol).unwrap();
    assert_eq!(s.bands.len(), 2, "{:?}", s.bands);
    let (gl, gh) = (s.bands[0].hi, s.bands[1].lo);
    assert!(gl < PI * PI + 0.5 && gh > PI * PI - 0.5 && gl < gh);
    // Inside the gap the trace exceeds 2 in modulus.
    let rec = floquet_record(&op, c(-0.5 * (gl + gh), 0.0), &tol).unwrap();
    let tr: Complex64 = rec.multipliers.iter().sum();
    assert!(tr.norm() > 2.0);
}

#[test]
fn pathology_examples() {
    let tol = Tolerances::default();
    let ex3 = PolynomialLambdaMatrix::from_real(
        2,
        &[
            &[1.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 2.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, 1.0],
        ],
    )
    .unwrap();
    let p = classify_point(&ex3, c(0.0, 0.0), &tol).unwrap();
    assert!(p.ramified && !p.jordan_anomaly);
    assert!(p.first_kind && !p.second_kind, "{:?}", p.clusters);
    let ex4 = PolynomialLambdaMatrix::from_real(
        2,
        &[
            &[1.0, -2.0, 1.0],
            &[-2.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0],
            &[1.0, 2.0, 1.0],
        ],
    )
    .unwrap();
    let p = classify_point(&ex4, c(0.0, 0.0), &tol).unwrap();
    assert!(!p.ramified && p.jordan_anomaly);
    assert!(p.second_kind && !p.first_kind, "{:?}", p.clusters);
}

#[test]
fn unperturbed_point_sets() {
    let op = PeriodicOperator::unperturbed(3, 1.0).unwrap();
    let tol = Tolerances::default();
    let r = definition1_sets(&op, &Rect::new(-300.0, 300.0, -300.0, 300.0).unwrap(), &tol).unwrap();
    let inside: Vec<_> = r
        .zeros
        .iter()
        .filter(|z| z.lambda.norm() <= 300.0)
        .collect();
    let lt = PI.powi(3) / (PI / 3.0).sin().powi(3);
    let want = [-lt, 0.0, lt];
    assert_eq!(inside.len(), 3, "{:?}", r.zeros);
    for (z, w) in inside.iter().zip(want) {
        assert!(
            (z.lambda - w).norm() < 1e-6 * (1.0 + w.abs()),
            "{} vs {w}",
            z.lambda
        );
    }
    assert_eq!(r.jordan_set.len(), 1);
    assert!(r.jordan_set[0].norm() < 1e-6);
    assert_eq!(r.branch_set.len(), 1);
    assert!(r.branch_set[0].norm() < 1e-6);
    assert!(r.jordan_subset_of_zeros && r.branch_subset_of_zeros);
    assert!(!r.any_first_kind && !r.any_second_kind);
}
