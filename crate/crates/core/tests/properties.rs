//! Randomized invariants.

use floquet::asymptotics::gershgorin_disks;
use floquet::floquet::{floquet_record, is_formally_self_adjoint};
use floquet::linalg::CMatrix;
use floquet::ode::fundamental_matrix;
use floquet::operator::{
    adjoint_operator, build_operator, shift_operator, PeriodicOperator, RawOperator, SymmetricSpec,
    TrigPolynomial,
};
use floquet::oracle::{tilde_double_points, UnperturbedContext};
use floquet::vandermonde::{confluent_det, ConfluentSpec};
use floquet::{Complex64, Tolerances};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly_gap(a: &TrigPolynomial, b: &TrigPolynomial) -> f64 {
    a.terms()
        .keys()
        .chain(b.terms().keys())
        .map(|&m| (a.coefficient(m) - b.coefficient(m)).norm())
        .fold(0.0, f64::max)
}

fn coeff_gap(a: &PeriodicOperator, b: &PeriodicOperator) -> f64 {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(p, q)| poly_gap(p, q))
        .fold(0.0, f64::max)
}

fn trig() -> impl Strategy<Value = Vec<(i64, f64, f64)>> {
    prop::collection::vec((-2i64..=2, -1.0f64..1.0, -1.0f64..1.0), 0..3)
}

/// Operators of order 2..=4 with small trigonometric coefficients, `p_{n−1}` included.
fn raw_operator() -> impl Strategy<Value = RawOperator> {
    (2usize..=4, 0.5f64..2.0)
        .prop_flat_map(|(n, b)| (Just(n), Just(b), prop::collection::vec(trig(), n)))
        .prop_map(|(n, b, terms)| RawOperator {
            order: n,
            period: b,
            coefficients: terms
                .into_iter()
                .enumerate()
                .map(|(k, t)| {
                    let t = t.into_iter().map(|(m, re, im)| (m, c(0.5 * re, 0.5 * im)));
                    (k, TrigPolynomial::new(b, t).unwrap())
                })
                .collect(),
            form: None,
        })
}

fn lambda(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0f64..r, 0.0f64..std::f64::consts::TAU).prop_map(|(m, a)| Complex64::from_polar(m, a))
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn shift_by_a_period_is_identity(raw in raw_operator(), xi in -3.0f64..3.0) {
        let op = build_operator(&raw).unwrap();
        let b = op.period();
        let gap = coeff_gap(&shift_operator(&op, xi + b), &shift_operator(&op, xi));
        let amp = op.coefficients().iter().flat_map(|p| p.terms().values()).map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(gap <= 1e-13 * amp, "gap {gap:e}, largest amplitude {amp:e}");
    }

    #[test]
    fn build_is_idempotent(raw in raw_operator()) {
        let op = build_operator(&raw).unwrap();
        let again = build_operator(&RawOperator {
            order: op.order(),
            period: op.period(),
            coefficients: op.coefficients().iter().cloned().enumerate().collect(),
            form: None,
        })
        .unwrap();
        prop_assert!(coeff_gap(&op, &again) == 0.0);
        prop_assert_eq!(op.form(), again.form());
    }

    #[test]
    fn symmetric_expansion_is_self_adjoint(
        nu in 1usize..=3,
        b in 0.5f64..2.0,
        amps in prop::collection::vec((1i64..=2, -1.0f64..1.0), 3),
    ) {
        let spec = SymmetricSpec {
            half_order: nu,
            period: b,
            a_coeffs: amps[..nu].iter().map(|&(m, a)| TrigPolynomial::cosine(b, m, a)).collect(),
        };
        let op = spec.expand().unwrap();
        prop_assert_eq!(op.order(), 2 * nu);
        prop_assert!(is_formally_self_adjoint(&op));
        // Cancellation in the adjoint is on the scale of the largest derivative amplitude.
        let w = 2.0 * std::f64::consts::PI / b;
        let scale = amps[..nu].iter().map(|&(m, a)| a.abs() * (w * m as f64).powi(2 * nu as i32)).fold(1.0, f64::max);
        prop_assert!(coeff_gap(&adjoint_operator(&op), &op) <= 1e-12 * scale);
    }

    #[test]
    fn double_points_reflect(n in 2usize..=8, m in 1usize..=5, d in 1usize..=7) {
        prop_assume!(d < n);
        let ctx = UnperturbedContext::new(n, 1.0).unwrap();
        let a = tilde_double_points(&ctx, m, d).unwrap();
        let b = tilde_double_points(&ctx, m, n - d).unwrap();
        let expect = if n % 2 == 0 { a } else { -a };
        prop_assert!((b - expect).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn gershgorin_contains_the_spectrum(
        n in 1usize..=6,
        entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 36),
        spread in 0.0f64..5.0,
    ) {
        let mut a = CMatrix::from_fn(n, n, |i, j| {
            let (re, im) = entries[i * 6 + j];
            c(re, im) * if i == j { 1.0 } else { 0.2 }
        });
        for i in 0..n {
            a[(i, i)] += c(spread * i as f64, 0.0);
        }
        let r = gershgorin_disks(&a).unwrap();
        prop_assert!(r.contained);
        prop_assert!(r.isolation_consistent);
    }

    #[test]
    fn confluent_routes_agree(
        nodes in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=3),
        sizes in prop::collection::vec(1usize..=3, 3),
    ) {
        let nodes: Vec<Complex64> = nodes.iter().map(|&(re, im)| c(re, im)).collect();
        let sep = nodes
            .iter()
            .enumerate()
            .flat_map(|(i, x)| nodes[..i].iter().map(move |y| (x - y).norm()))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(sep > 0.2);
        let spec = ConfluentSpec::new(nodes.clone(), sizes[..nodes.len()].to_vec()).unwrap();
        let d = confluent_det(&spec).unwrap();
        prop_assert!(d.rel_diff <= 1e-9, "{:?}", d);
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn fundamental_determinant_is_one(raw in raw_operator(), lam in lambda(100.0)) {
        let op = build_operator(&raw).unwrap();
        let f = fundamental_matrix(&op, lam, op.period(), 1e-11).unwrap();
        let growth = (op.order() as f64 * f.log_scale).exp();
        let det = f.entries.clone().lu().determinant() * growth;
        // Cancellation in the determinant is relative to the Hadamard bound.
        let hadamard = f.entries.column_iter().map(|col| col.norm()).product::<f64>() * growth;
        prop_assert!((det - 1.0).norm() <= 1e-8 * hadamard.max(1.0), "det {det}, hadamard {hadamard:e}");
    }

    #[test]
    fn multipliers_multiply_to_one(raw in raw_operator(), lam in lambda(200.0)) {
        let op = build_operator(&raw).unwrap();
        let rec = floquet_record(&op, lam, &Tolerances::default()).unwrap();
        prop_assert!((rec.det - 1.0).norm() <= 1e-7, "det {}", rec.det);
    }

    #[test]
    fn discriminant_routes_agree(raw in raw_operator(), lam in lambda(200.0)) {
        let op = build_operator(&raw).unwrap();
        let rec = floquet_record(&op, lam, &Tolerances::default()).unwrap();
        // The resultant route loses everything near a double point.
        prop_assume!(rec.normalized_discriminant() > 1e-4);
        prop_assert!(rec.discriminant_mismatch() <= 1e-6, "mismatch {:e}", rec.discriminant_mismatch());
    }

    #[test]
    fn multipliers_are_shift_invariant(raw in raw_operator(), lam in lambda(100.0), xi in 0.0f64..1.0) {
        let op = build_operator(&raw).unwrap();
        let tol = Tolerances::default();
        let a = floquet_record(&op, lam, &tol).unwrap().log_multipliers;
        let b = floquet_record(&shift_operator(&op, xi * op.period()), lam, &tol).unwrap().log_multipliers;
        // Match on exp of the logs; each must have a partner within 1e-7 relative.
        for za in &a {
            let best = b.iter().map(|zb| (za.exp() - zb.exp()).norm() / za.exp().norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-7, "{za} unmatched ({best:e})");
        }
    }
}
