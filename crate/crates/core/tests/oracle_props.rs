mod common;

use common::from_ints;
use proptest::prelude::*;
use sparsectl::control::{check_nonneg, CertificateKind, SparsityLevel, SystemPair};
use sparsectl::matrix::Tolerances;
use sparsectl::oracle::{coverage_probe, reachable_membership, OracleConfig};

fn small_system() -> impl Strategy<Value = SystemPair> {
    (1usize..=2, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-2i32..=2, n * n),
            prop::collection::vec(-2i32..=2, n * m),
        )
            .prop_map(move |(a, b)| {
                SystemPair::new(from_ints(n, n, &a), from_ints(n, m, &b)).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn witnesses_reconstruct_and_coverage_is_monotone(
        sys in small_system(),
        s in 1usize..=3,
        x in prop::collection::vec(-3i32..=3, 2),
        k in 1usize..=3,
    ) {
        let tol = Tolerances::default();
        let s = SparsityLevel::new(s.min(sys.m()), sys.m()).unwrap();
        let x: Vec<f64> = x[..sys.n()].iter().map(|&v| f64::from(v)).collect();
        let Some(w) = reachable_membership(&sys, s, k, &x, &tol).unwrap() else {
            return Ok(());
        };
        prop_assert_eq!(w.supports.len(), k);
        let mut state = nalgebra::DVector::zeros(sys.n());
        for (support, u) in w.supports.iter().zip(&w.inputs) {
            prop_assert!(support.len() <= s.get());
            prop_assert!(u.iter().all(|&v| v >= 0.0));
            prop_assert!(u.iter().enumerate().all(|(j, &v)| v == 0.0 || support.contains(&j)));
            state = sys.a() * state + sys.b() * nalgebra::DVector::from_column_slice(u);
        }
        let err = state.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err <= tol.ineq_tol * (1.0 + nx));
        prop_assert!(reachable_membership(&sys, s, k + 1, &x, &tol).unwrap().is_some());
    }

    #[test]
    fn certificate_direction_stays_uncovered(sys in small_system()) {
        let tol = Tolerances::default();
        let report = check_nonneg(&sys, &tol).unwrap();
        let Some(cert) = report.certificate().filter(|c| c.kind == CertificateKind::ViolatesConditionIi) else {
            return Ok(());
        };
        let z = cert.z_real();
        let s = SparsityLevel::new(sys.m(), sys.m()).unwrap();
        for k in 1..=6 {
            prop_assert!(reachable_membership(&sys, s, k, &z, &tol).unwrap().is_none());
        }
        let cfg = OracleConfig { n_directions: 16, ..OracleConfig::default() };
        prop_assert!(!coverage_probe(&sys, s, &cfg, &tol).unwrap().is_covered());
    }
}
