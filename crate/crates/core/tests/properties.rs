//! Randomized invariants across the public API.

use std::collections::BTreeMap;

use cpn::coset::{self, FlowSpec};
use cpn::dynvars;
use cpn::geometry::{self, GeometryConfig, LocalPoint, StateVector};
use cpn::linalg::{self, CMatrix};
use cpn::nonlinear_kg::{geodesic_delta, PerturbationSpec};
use cpn::report::{Column, Format, RunReport, Table};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector(min: usize, max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), min..=max)
}

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(), n * n).prop_map(move |v| {
        let a = CMatrix::from_vec(n, n, v);
        (&a + a.adjoint()) * Complex64::from(0.5)
    })
}

fn nonzero(v: &[Complex64]) -> bool {
    linalg::norm(v) > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_is_unitary(f in vector(1, 12), tau in -20.0..20.0f64) {
        let t = coset::flow_matrix(&FlowSpec::new(f, tau).unwrap());
        prop_assert!(linalg::unitarity_defect(&t) < 1e-12);
    }

    #[test]
    fn flow_composes(f in vector(1, 6), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let spec = FlowSpec::new(f, a).unwrap();
        let ab = coset::flow_matrix(&spec.at(a)) * coset::flow_matrix(&spec.at(b));
        prop_assert!(linalg::max_abs(&(ab - coset::flow_matrix(&spec.at(a + b)))) < 1e-10);
    }

    #[test]
    fn chart_round_trip(v in vector(2, 10), radius in 0.1..50.0f64, chart_seed in 0usize..100) {
        prop_assume!(nonzero(&v));
        let psi = StateVector::with_radius(v, radius).unwrap();
        let chart = (0..psi.dim())
            .map(|k| (k + chart_seed) % psi.dim())
            .find(|&k| psi.amplitudes()[k].norm() > 1e-3 * radius)
            .unwrap();
        let p = geometry::to_local(&psi, chart).unwrap();
        let back = geometry::from_local(&p, radius, psi.amplitudes()[chart].arg());
        prop_assert!(linalg::max_abs_diff(back.amplitudes(), psi.amplitudes()) < 1e-10 * radius);
    }

    #[test]
    fn coset_round_trip(v in vector(2, 8), g in 0.1..5.0f64) {
        prop_assume!(nonzero(&v[1..]) && v[0].norm() > 1e-3);
        let psi = StateVector::with_radius(v, 2.0).unwrap();
        let spec = coset::extract_coset(&psi, g).unwrap();
        let lead = Complex64::from_polar(2.0, psi.amplitudes()[0].arg());
        let flowed: Vec<Complex64> = coset::flow_matrix(&spec).column(0).iter().map(|z| z * lead).collect();
        prop_assert!(linalg::max_abs_diff(&flowed, psi.amplitudes()) < 1e-12);
    }

    #[test]
    fn metric_is_hermitian_positive(pi in vector(1, 8), radius in 0.2..30.0f64, hbar in 0.1..3.0f64) {
        let cfg = GeometryConfig::new(pi.len() + 1, radius, hbar).unwrap();
        let m = geometry::fubini_study_metric(&LocalPoint::new(0, pi).unwrap(), &cfg);
        prop_assert_eq!(m.hermiticity_defect(), 0.0);
        prop_assert!(m.min_eigenvalue() > 0.0);
    }

    #[test]
    fn generator_fields_respect_commutators(p in hermitian(3), q in hermitian(3)) {
        let cfg = GeometryConfig::new(3, 1.0, 1.0).unwrap();
        prop_assert!(dynvars::homomorphism_residual(&p, &q, &cfg).unwrap() < 1e-12);
    }

    #[test]
    fn delta_is_homogeneous(v in vector(3, 3), lam in complex()) {
        prop_assume!(nonzero(&v[1..]) && v[0].norm() > 0.1 && lam.norm() > 0.1);
        let cfg = GeometryConfig::new(3, 3.0, 1.0).unwrap();
        let spec = PerturbationSpec::default();
        let base = geodesic_delta(&v, &spec, &cfg).unwrap().delta_coeffs;
        let scaled: Vec<Complex64> = v.iter().map(|z| z * lam).collect();
        let d = geodesic_delta(&scaled, &spec, &cfg).unwrap().delta_coeffs;
        let expected: Vec<Complex64> = base.iter().map(|z| z * lam).collect();
        prop_assert!(linalg::max_abs_diff(&d, &expected) < 1e-12 * (1.0 + linalg::norm(&expected)));
    }

    #[test]
    fn reports_round_trip(
        xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20),
        label in "[a-z ,\"#]{0,12}",
        value in "[ -~]{0,16}",
    ) {
        let mut cfg = BTreeMap::new();
        cfg.insert("note".to_string(), value);
        let mut r = RunReport::new(cfg);
        let zs: Vec<Complex64> = xs.iter().map(|x| Complex64::new(*x, -x / 3.0)).collect();
        let labels = vec![label.clone(); xs.len()];
        r.push_table(Table::new("t", vec![Column::real("x", xs), Column::complex("z", zs), Column::text("label", labels)]).unwrap());
        r.diag("label", label);
        for f in [Format::Json, Format::Csv] {
            let text = r.serialize(f).unwrap();
            prop_assert_eq!(&RunReport::parse(&text, f).unwrap(), &r);
        }
    }
}
