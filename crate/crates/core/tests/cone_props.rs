mod common;

use common::{from_ints, Mat};
use proptest::prelude::*;
use sparsectl::cone::{
    feasible_nonneg_solution, homogeneous_nonzero, is_positive_spanning_subspace,
    sparsify_positive_combination,
};
use sparsectl::matrix::{rank, Tolerances};
use sparsectl::simplex::{minimize, LpOutcome};

fn int_mat(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Mat> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3i32..=3, r * c).prop_map(move |d| from_ints(r, c, &d))
    })
}

/// `max x^T z  s.t.  M^T z <= 0, -1 <= z <= 1`, solved directly in standard
/// form with `z = y - 1`. Positive optimum means `x` is separated from `cone(M)`.
fn separation_value(m: &Mat, x: &[f64]) -> f64 {
    let (n, c) = (m.nrows(), m.ncols());
    // variables: y (n), slack for M^T z <= 0 (c), slack for y <= 2 (n)
    let vars = 2 * n + c;
    let mut lhs = Mat::zeros(c + n, vars);
    let mut rhs = vec![0.0; c + n];
    for j in 0..c {
        for i in 0..n {
            lhs[(j, i)] = m[(i, j)];
        }
        lhs[(j, n + j)] = 1.0;
        rhs[j] = m.column(j).sum();
    }
    for i in 0..n {
        lhs[(c + i, i)] = 1.0;
        lhs[(c + i, n + c + i)] = 1.0;
        rhs[c + i] = 2.0;
    }
    let mut cost = vec![0.0; vars];
    for i in 0..n {
        cost[i] = -x[i];
    }
    match minimize(&lhs, &rhs, &cost, 1e-9).unwrap() {
        LpOutcome::Optimal { objective, .. } => -objective - x.iter().sum::<f64>(),
        other => panic!("separation LP is feasible and bounded, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn membership_witness_is_basic(
        m in int_mat(5, 6),
        coef in prop::collection::vec(0i32..=3, 6),
    ) {
        let tol = Tolerances::default();
        let x: Vec<f64> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * f64::from(coef[j])).sum())
            .collect();
        let res = feasible_nonneg_solution(&m, &x, &tol).unwrap();
        prop_assert!(res.member);
        let u = res.coefficients.unwrap();
        prop_assert!(u.iter().all(|&v| v >= 0.0));
        let positives = u.iter().filter(|&&v| v > tol.ineq_tol).count();
        prop_assert!(positives <= rank(&m, &tol).unwrap());
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(res.residual <= tol.ineq_tol * (1.0 + norm_x));
    }

    #[test]
    fn farkas_alternative(m in int_mat(5, 5), x in prop::collection::vec(-3i32..=3, 5)) {
        let tol = Tolerances::default();
        let x: Vec<f64> = x[..m.nrows()].iter().map(|&v| f64::from(v)).collect();
        let member = feasible_nonneg_solution(&m, &x, &tol).unwrap().member;
        let sep = separation_value(&m, &x);
        let separated = sep > 1e-6;
        if member || separated {
            prop_assert!(member != separated, "member {} separation {}", member, sep);
        }
    }

    #[test]
    fn single_direction_sign_test(row in prop::collection::vec(-3i32..=3, 1..7)) {
        let tol = Tolerances::default();
        let m = Mat::from_fn(row.len(), 1, |i, _| f64::from(row[i]));
        let expected = row.iter().all(|&v| v <= 0) || row.iter().all(|&v| v >= 0);
        let found = homogeneous_nonzero(&m, &tol).unwrap();
        prop_assert_eq!(found.is_some(), expected);
        if let Some(w) = found {
            let mr = &m * nalgebra::DVector::from_vec(w.rho.clone());
            prop_assert!(mr.iter().all(|&v| v <= tol.ineq_tol));
        }
    }

    #[test]
    fn sparsify_reconstructs(
        g in int_mat(4, 4),
        extra in prop::collection::vec(0i32..=2, 4),
        coef in prop::collection::vec(0i32..=3, 8),
    ) {
        let tol = Tolerances::default();
        // [G | -G w]: positively spanning iff the combination with w > 0 covers G's span
        let w: Vec<f64> = extra[..g.ncols()].iter().map(|&v| f64::from(v) + 1.0).collect();
        let neg = -(&g * nalgebra::DVector::from_vec(w));
        let z = Mat::from_fn(g.nrows(), g.ncols() + 1, |i, j| {
            if j < g.ncols() { g[(i, j)] } else { neg[i] }
        });
        prop_assert!(is_positive_spanning_subspace(&z, &tol).unwrap());
        let target: Vec<f64> = (0..z.nrows())
            .map(|i| (0..z.ncols()).map(|j| z[(i, j)] * f64::from(coef[j])).sum())
            .collect();
        let alpha = sparsify_positive_combination(&z, &target, &tol).unwrap();
        prop_assert!(alpha.iter().all(|&a| a >= 0.0));
        prop_assert!(alpha.iter().filter(|&&a| a > tol.ineq_tol).count() <= rank(&z, &tol).unwrap());
        let back = &z * nalgebra::DVector::from_vec(alpha);
        let err = back.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm_t = target.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-8 * (1.0 + norm_t));
    }
}
