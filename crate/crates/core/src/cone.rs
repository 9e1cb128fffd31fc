//! Polyhedral cone primitives: membership in `cone(M)`, nonzero points of
//! `{rho : M rho <= 0}`, and sparse (basic) positive combinations.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, rank, Mat, Tolerances};
use crate::simplex::{self, LpOutcome};
use crate::svd::JacobiSvd;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeMembershipResult {
    pub member: bool,
    /// Nonnegative coefficients `u` with `M u = x`, present iff `member`.
    pub coefficients: Option<Vec<f64>>,
    /// `‖M u - x‖_2` for the returned coefficients, or the phase-one
    /// infeasibility when no coefficients exist.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousWitness {
    /// Nonzero `rho` with `M rho <= 0`, scaled so that `‖rho‖_inf = 1`.
    pub rho: Vec<f64>,
    /// Largest entry of `M rho`.
    pub max_entry: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(m: &Mat, u: &[f64], x: &[f64]) -> f64 {
    let mu = m * DVector::from_column_slice(u);
    mu.iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Re-solves the basic system `M_B u_B = x` directly to shed tableau round-off.
fn polish(m: &Mat, x: &[f64], basic: &[usize], u: &[f64], tol: &Tolerances) -> Vec<f64> {
    if basic.is_empty() {
        return u.to_vec();
    }
    let sub = Mat::from_fn(m.nrows(), basic.len(), |i, j| m[(i, basic[j])]);
    let rhs = Mat::from_column_slice(x.len(), 1, x);
    let sol = JacobiSvd::new(&sub).solve(&rhs, 1e-13);
    if sol.iter().any(|&v| v < -tol.ineq_tol) {
        return u.to_vec();
    }
    let mut polished = vec![0.0; m.ncols()];
    for (k, &j) in basic.iter().enumerate() {
        polished[j] = sol[k].max(0.0);
    }
    if residual(m, &polished, x) <= residual(m, u, x) {
        polished
    } else {
        u.to_vec()
    }
}

/// Decides whether `x` is a nonnegative combination of the columns of `m`.
///
/// On success the coefficients form a basic feasible solution, so at most
/// `rank(m)` of them are positive.
pub fn feasible_nonneg_solution(
    m: &Mat,
    x: &[f64],
    tol: &Tolerances,
) -> Result<ConeMembershipResult> {
    if m.nrows() != x.len() {
        return Err(Error::input(format!(
            "generator matrix has {} rows but target has length {}",
            m.nrows(),
            x.len()
        )));
    }
    ensure_finite(m, "generator matrix")?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("target vector has a non-finite entry"));
    }
    let bound = tol.ineq_tol * (1.0 + norm2(x));
    if x.iter().all(|&v| v == 0.0) {
        return Ok(ConeMembershipResult {
            member: true,
            coefficients: Some(vec![0.0; m.ncols()]),
            residual: 0.0,
        });
    }
    if m.ncols() == 0 {
        let r = norm2(x);
        return Ok(ConeMembershipResult {
            member: r <= bound,
            coefficients: (r <= bound).then(Vec::new),
            residual: r,
        });
    }
    let p1 = simplex::phase_one(m, x)?;
    if p1.infeasibility > bound {
        return Ok(ConeMembershipResult {
            member: false,
            coefficients: None,
            residual: p1.infeasibility,
        });
    }
    let u = polish(m, x, &p1.basic_columns, &p1.u, tol);
    let r = residual(m, &u, x);
    if r > bound {
        return Ok(ConeMembershipResult {
            member: false,
            coefficients: None,
            residual: r,
        });
    }
    Ok(ConeMembershipResult {
        member: true,
        coefficients: Some(u),
        residual: r,
    })
}

/// Finds a nonzero `rho` with `M rho <= 0` if the cone `{rho : M rho <= 0}` is not `{0}`.
///
/// Solves `max ±rho_i  s.t.  M rho <= 0, -1 <= rho <= 1` for every coordinate;
/// the cone is nontrivial iff one of these optima is positive.
pub fn homogeneous_nonzero(m: &Mat, tol: &Tolerances) -> Result<Option<HomogeneousWitness>> {
    ensure_finite(m, "constraint matrix")?;
    let p = m.nrows();
    let g = m.ncols();
    if g == 0 {
        return Err(Error::input("constraint matrix has no columns"));
    }
    // rho = y - 1 with 0 <= y <= 2; variables [y | s | t], s and t slacks.
    let vars = g + p + g;
    let mut lp = Mat::zeros(p + g, vars);
    let mut rhs = vec![0.0; p + g];
    for i in 0..p {
        for j in 0..g {
            lp[(i, j)] = m[(i, j)];
        }
        lp[(i, g + i)] = 1.0;
        rhs[i] = m.row(i).sum();
    }
    for j in 0..g {
        lp[(p + j, j)] = 1.0;
        lp[(p + j, g + p + j)] = 1.0;
        rhs[p + j] = 2.0;
    }
    for i in 0..g {
        for sign in [1.0, -1.0] {
            let mut cost = vec![0.0; vars];
            cost[i] = -sign;
            let LpOutcome::Optimal { u, .. } = simplex::minimize(&lp, &rhs, &cost, 1e-9)? else {
                return Err(Error::numeric(
                    "box-bounded cone LP was not solved to optimality",
                ));
            };
            let rho: Vec<f64> = u[..g].iter().map(|y| y - 1.0).collect();
            if sign * rho[i] > tol.ineq_tol {
                let scale = rho.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let rho: Vec<f64> = rho.iter().map(|v| v / scale).collect();
                let max_entry = (m * DVector::from_column_slice(&rho))
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
                if max_entry <= tol.ineq_tol {
                    return Ok(Some(HomogeneousWitness { rho, max_entry }));
                }
            }
        }
    }
    Ok(None)
}

/// Rewrites `target` as a nonnegative combination of the columns of `z`
/// using at most `rank(z)` columns.
pub fn sparsify_positive_combination(
    z: &Mat,
    target: &[f64],
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    if z.nrows() != target.len() {
        return Err(Error::input(format!(
            "generator matrix has {} rows but target has length {}",
            z.nrows(),
            target.len()
        )));
    }
    ensure_finite(z, "generator matrix")?;
    let kept: Vec<usize> = (0..z.ncols())
        .filter(|&j| z.column(j).iter().any(|&v| v != 0.0))
        .collect();
    let reduced = Mat::from_fn(z.nrows(), kept.len(), |i, j| z[(i, kept[j])]);
    let result = feasible_nonneg_solution(&reduced, target, tol)?;
    let coeffs = result.coefficients.ok_or(Error::NotInCone)?;
    let mut alpha = vec![0.0; z.ncols()];
    for (k, &j) in kept.iter().enumerate() {
        alpha[j] = coeffs[k];
    }
    let positives = alpha.iter().filter(|&&a| a > tol.ineq_tol).count();
    let r = rank(z, tol)?;
    if positives > r {
        return Err(Error::numeric(format!(
            "basic solution has {positives} positive entries but rank is {r}"
        )));
    }
    Ok(alpha)
}

/// True iff the cone generated by the columns of `z` is a linear subspace.
pub fn is_positive_spanning_subspace(z: &Mat, tol: &Tolerances) -> Result<bool> {
    ensure_finite(z, "generator matrix")?;
    for j in 0..z.ncols() {
        let neg: Vec<f64> = z.column(j).iter().map(|v| -v).collect();
        if !feasible_nonneg_solution(z, &neg, tol)?.member {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn example_b() -> Mat {
        Mat::from_row_slice(3, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., -1.])
    }

    fn triangle() -> Mat {
        Mat::from_row_slice(2, 3, &[1., 0., -1., 0., 1., -1.])
    }

    #[test]
    fn membership_examples() {
        let m = Mat::from_row_slice(1, 2, &[1., -1.]);
        let r = feasible_nonneg_solution(&m, &[-3.0], &tol()).unwrap();
        assert!(r.member);
        assert_eq!(r.coefficients.unwrap(), vec![0.0, 3.0]);

        let r = feasible_nonneg_solution(&Mat::identity(2, 2), &[1.0, -1.0], &tol()).unwrap();
        assert!(!r.member);
        assert!(r.coefficients.is_none());

        let r = feasible_nonneg_solution(&example_b(), &[0.0, 0.0, 1.0], &tol()).unwrap();
        assert!(r.member);
        assert_eq!(r.coefficients.unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn membership_shape_error() {
        assert!(matches!(
            feasible_nonneg_solution(&Mat::identity(2, 2), &[1.0], &tol()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn homogeneous_examples() {
        let m = Mat::from_column_slice(4, 1, &[0., -1., -1., -1.]);
        let w = homogeneous_nonzero(&m, &tol()).unwrap().unwrap();
        assert_eq!(w.rho, vec![1.0]);

        let m = Mat::from_row_slice(4, 2, &[1., 0., -1., 0., 0., 1., 0., -1.]);
        assert!(homogeneous_nonzero(&m, &tol()).unwrap().is_none());

        let m = Mat::from_row_slice(1, 1, &[1.]);
        let w = homogeneous_nonzero(&m, &tol()).unwrap().unwrap();
        assert_eq!(w.rho, vec![-1.0]);
    }

    #[test]
    fn homogeneous_needs_columns() {
        assert!(homogeneous_nonzero(&Mat::zeros(2, 0), &tol()).is_err());
    }

    #[test]
    fn sparsify_examples() {
        let z = triangle();
        let a = sparsify_positive_combination(&z, &[-2.0, -2.0], &tol()).unwrap();
        assert_eq!(a, vec![0.0, 0.0, 2.0]);
        let a = sparsify_positive_combination(&z, &[1.0, -1.0], &tol()).unwrap();
        assert_eq!(a, vec![2.0, 0.0, 1.0]);
        let a = sparsify_positive_combination(&z, &[0.0, 0.0], &tol()).unwrap();
        assert_eq!(a, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn sparsify_outside_cone() {
        let z = Mat::identity(2, 2);
        assert_eq!(
            sparsify_positive_combination(&z, &[-1.0, 0.0], &tol()),
            Err(Error::NotInCone)
        );
    }

    #[test]
    fn sparsify_skips_zero_columns() {
        let z = Mat::from_row_slice(2, 4, &[0., 1., 0., -1., 0., 0., 1., -1.]);
        let a = sparsify_positive_combination(&z, &[-1.0, -1.0], &tol()).unwrap();
        assert_eq!(a, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn positive_spanning_examples() {
        assert!(is_positive_spanning_subspace(&triangle(), &tol()).unwrap());
        assert!(!is_positive_spanning_subspace(&Mat::identity(2, 2), &tol()).unwrap());
        let pair = Mat::from_row_slice(2, 2, &[1., -1., 0., 0.]);
        assert!(is_positive_spanning_subspace(&pair, &tol()).unwrap());
        assert!(is_positive_spanning_subspace(&Mat::zeros(2, 0), &tol()).unwrap());
    }

    /// For a single column the cone `{rho : M rho <= 0}` is nontrivial iff
    /// the column is entirely `<= 0` or entirely `>= 0`.
    fn sign_oracle(col: &[f64]) -> bool {
        col.iter().all(|&v| v <= 0.0) || col.iter().all(|&v| v >= 0.0)
    }

    proptest::proptest! {
        #[test]
        fn homogeneous_single_column_matches_sign_test(
            col in proptest::collection::vec(-3i32..=3, 1..6)
        ) {
            let col: Vec<f64> = col.into_iter().map(f64::from).collect();
            let m = Mat::from_column_slice(col.len(), 1, &col);
            let found = homogeneous_nonzero(&m, &tol()).unwrap();
            proptest::prop_assert_eq!(found.is_some(), sign_oracle(&col));
            if let Some(w) = found {
                proptest::prop_assert!(w.max_entry <= 1e-8);
                proptest::prop_assert!((w.rho[0].abs() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn membership_witness_is_basic(
            rows in 1usize..5,
            cols in 1usize..7,
            seed in proptest::collection::vec(-4i32..=4, 40),
            target in proptest::collection::vec(-4i32..=4, 5),
        ) {
            let m = Mat::from_fn(rows, cols, |i, j| f64::from(seed[i * cols + j]));
            let x: Vec<f64> = target[..rows].iter().map(|&v| f64::from(v)).collect();
            let r = feasible_nonneg_solution(&m, &x, &tol()).unwrap();
            if let Some(u) = r.coefficients {
                let positives = u.iter().filter(|&&v| v > 1e-8).count();
                proptest::prop_assert!(positives <= rank(&m, &tol()).unwrap());
                proptest::prop_assert!(u.iter().all(|&v| v >= -1e-8));
                proptest::prop_assert!(residual(&m, &u, &x) <= 1e-8 * (1.0 + norm2(&x)));
            }
        }
    }
}
