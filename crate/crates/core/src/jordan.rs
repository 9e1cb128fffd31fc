//! Jordan structure of the zero eigenvalue and the split
//! `P = [P0; 0] + Σ_i P_i` of a change of basis adapted to it.
//!
//! Only the nilpotent part is put in Jordan form. The nonsingular part is
//! represented by `A` restricted to `range(A^n)` in an orthonormal basis,
//! which is all the intertwining property `P0 A^k = J^k P0` needs.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    ensure_finite, ensure_square, kernel_chain, mat_pow, null_space_basis, power_rank_sequence,
    rank, singular_values, Mat, Tolerances,
};
use crate::svd::JacobiSvd;

/// Block counts of the zero eigenvalue, derived from `b_k = rank(A^k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroStructure {
    /// Size of the largest zero-eigenvalue Jordan block (0 if `A` is nonsingular).
    pub n: usize,
    /// Dimension of the part of the space on which `A` is invertible.
    pub q: usize,
    /// `block_counts[i - 1]` = number of zero blocks of size `i`.
    pub block_counts: Vec<usize>,
    /// `tail_counts[k - 1]` = number of zero blocks of size `>= k`.
    pub tail_counts: Vec<usize>,
    /// `b_0, ..., b_{n+1}` with `b_n = b_{n+1} = q`.
    pub rank_sequence: Vec<usize>,
}

impl ZeroStructure {
    /// Number of zero-eigenvalue blocks, `N - rank(A)`.
    pub fn block_total(&self) -> usize {
        self.block_counts.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.rank_sequence[0]
    }
}

pub fn zero_structure(a: &Mat, tol: &Tolerances) -> Result<ZeroStructure> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    let b = power_rank_sequence(a, tol)?;
    let n = b.len() - 2;
    let q = b[n];
    let mut block_counts = Vec::with_capacity(n);
    for i in 1..=n {
        let first = b[i - 1] as i64 - b[i] as i64;
        let second = b[i] as i64 - b[i + 1] as i64;
        if first < second {
            return Err(Error::numeric(format!(
                "rank differences are not monotone at power {i}: {first} < {second}"
            )));
        }
        block_counts.push((first - second) as usize);
    }
    let tail_counts = (0..n).map(|k| block_counts[k..].iter().sum()).collect();
    Ok(ZeroStructure {
        n,
        q,
        block_counts,
        tail_counts,
        rank_sequence: b,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Decomposition {
    /// Invertible `N x N`; rows ordered as `P0`, then the rows of `P_1`, ..., `P_n`.
    pub p: Mat,
    /// `q x q`, nonsingular.
    pub j: Mat,
    /// `q x N`.
    pub p0: Mat,
    /// `pi[i - 1]` is the `N x N` matrix `P_i`, nonzero only on its `r_i` rows.
    pub pi: Vec<Mat>,
    pub structure: ZeroStructure,
}

/// Orthonormal basis of the column space of `m`, keeping the leading `count`
/// directions; also returns the smallest singular value kept.
fn leading_left_vectors(m: &Mat, count: usize) -> Result<(Mat, f64)> {
    if count == 0 {
        return Ok((Mat::zeros(m.nrows(), 0), f64::INFINITY));
    }
    let svd = JacobiSvd::new(m);
    let order = svd.order_desc();
    if order.len() < count {
        return Err(Error::numeric(format!(
            "needed {count} independent directions, only {} available",
            order.len()
        )));
    }
    Ok((
        svd.leading_left_vectors(count),
        svd.singular_values()[order[count - 1]],
    ))
}

/// Orthonormal basis of `span(cols)` using `tol.rank_rtol` relative to the largest singular value.
fn orthonormal_span(cols: &Mat, tol: &Tolerances) -> Result<Mat> {
    if cols.ncols() == 0 {
        return Ok(cols.clone());
    }
    let r = rank(cols, tol)?;
    Ok(leading_left_vectors(cols, r)?.0)
}

struct Chain {
    len: usize,
    generator: DVector<f64>,
}

impl Chain {
    /// `A^(len - level) w`, the chain vector living in `ker(A^level)`.
    fn at_level(&self, a: &Mat, level: usize) -> DVector<f64> {
        let mut v = self.generator.clone();
        for _ in level..self.len {
            v = a * v;
        }
        v
    }
}

pub fn build_decomposition(a: &Mat, tol: &Tolerances) -> Result<Lemma1Decomposition> {
    let structure = zero_structure(a, tol)?;
    let dim = a.nrows();
    let n = structure.n;
    let q = structure.q;

    // range(A^n) = ker((A^T)^n)^perp
    let left_kernel = kernel_chain(&a.transpose(), tol)?
        .pop()
        .unwrap_or_else(|| Mat::zeros(dim, 0));
    let range_basis = if left_kernel.ncols() == 0 {
        Mat::identity(dim, dim)
    } else {
        null_space_basis(&left_kernel.transpose(), tol)?
    };
    if range_basis.ncols() != q {
        return Err(Error::numeric(format!(
            "range(A^n) has dimension {} but the rank sequence gives q = {q}",
            range_basis.ncols()
        )));
    }

    let kernels = if n == 0 {
        Vec::new()
    } else {
        kernel_chain(a, tol)?
    };
    if kernels.len() != n {
        return Err(Error::numeric(format!(
            "kernel chain has {} levels, expected {n}",
            kernels.len()
        )));
    }

    // Descending completion: at level k add generators in ker(A^k) that are
    // independent of ker(A^(k-1)) plus the level-k vectors of longer chains.
    let mut chains: Vec<Chain> = Vec::new();
    for level in (1..=n).rev() {
        let needed = structure.block_counts[level - 1];
        let kernel = &kernels[level - 1];
        let lower = if level >= 2 {
            kernels[level - 2].clone()
        } else {
            Mat::zeros(dim, 0)
        };
        let existing: Vec<DVector<f64>> = chains.iter().map(|c| c.at_level(a, level)).collect();
        let mut spanning = Mat::zeros(dim, lower.ncols() + existing.len());
        spanning
            .view_mut((0, 0), (dim, lower.ncols()))
            .copy_from(&lower);
        for (c, v) in existing.iter().enumerate() {
            spanning.set_column(lower.ncols() + c, v);
        }
        let q_basis = orthonormal_span(&spanning, tol)?;
        if q_basis.ncols() + needed != kernel.ncols() {
            return Err(Error::numeric(format!(
                "chain completion at level {level}: {} independent vectors plus {needed} new ones \
                 do not fill ker(A^{level}) of dimension {}",
                q_basis.ncols(),
                kernel.ncols()
            )));
        }
        let residual = kernel - &q_basis * (q_basis.transpose() * kernel);
        let (fresh, weakest) = leading_left_vectors(&residual, needed)?;
        if weakest <= tol.rank_rtol.sqrt() {
            return Err(Error::numeric(format!(
                "chain completion at level {level}: new direction is numerically dependent ({weakest:e})"
            )));
        }
        for c in 0..needed {
            chains.push(Chain {
                len: level,
                generator: fresh.column(c).into_owned(),
            });
        }
    }

    // Basis V = [range basis | chain_1 | chain_2 | ...]; each chain ordered
    // A^(L-1) w, ..., A w, w so that A acts as an upper shift on it.
    let mut v = Mat::zeros(dim, dim);
    v.view_mut((0, 0), (dim, q)).copy_from(&range_basis);
    let mut col = q;
    let mut chain_start = Vec::with_capacity(chains.len());
    for chain in &chains {
        chain_start.push(col);
        for pos in 1..=chain.len {
            v.set_column(col, &chain.at_level(a, pos));
            col += 1;
        }
    }
    if col != dim {
        return Err(Error::numeric(format!(
            "assembled basis has {col} columns, expected {dim}"
        )));
    }
    let p_raw = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numeric("assembled Jordan basis is singular"))?;

    let p0 = p_raw.rows(0, q).into_owned();
    let j = &p0 * a * &range_basis;

    let mut p = Mat::zeros(dim, dim);
    p.view_mut((0, 0), (q, dim)).copy_from(&p0);
    let mut pi = Vec::with_capacity(n);
    let mut row = q;
    for i in 1..=n {
        let mut block = Mat::zeros(dim, dim);
        for (c, chain) in chains.iter().enumerate() {
            if chain.len >= i {
                // (i-1)-th row above the last row of this block
                let src = chain_start[c] + chain.len - i;
                p.set_row(row, &p_raw.row(src));
                block.set_row(row, &p_raw.row(src));
                row += 1;
            }
        }
        pi.push(block);
    }

    Ok(Lemma1Decomposition {
        p,
        j,
        p0,
        pi,
        structure,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// Relative residual for identities, 0 for pure rank comparisons.
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub all_passed: bool,
    pub checks: Vec<PropertyCheck>,
}

impl DecompositionReport {
    pub fn get(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Checks the decomposition identity, invertibility of `P`, the
/// intertwining `P0 A^k = J^k P0` (k = 0..n+1), and for every `i` the rank
/// equality `rank(P_i) = rank(P_i A^(i-1)) <= N - rank(A)` together with
/// `P_i A^k = 0` for `i <= k <= n+1`. Residuals are relative and scaled by
/// `max(1, ‖A‖)^k`; they pass below `tol.ineq_tol`.
pub fn verify_decomposition(
    a: &Mat,
    dec: &Lemma1Decomposition,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    ensure_square(a, "A")?;
    let dim = a.nrows();
    let q = dec.structure.q;
    let n = dec.structure.n;
    if dec.p.shape() != (dim, dim)
        || dec.p0.shape() != (q, dim)
        || dec.j.shape() != (q, q)
        || dec.pi.len() != n
        || dec.pi.iter().any(|m| m.shape() != (dim, dim))
    {
        return Err(Error::input("decomposition shapes do not match A"));
    }
    let threshold = tol.ineq_tol;
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, residual: f64, detail: String| {
        checks.push(PropertyCheck {
            name,
            passed,
            residual,
            detail,
        })
    };

    let mut sum = Mat::zeros(dim, dim);
    sum.view_mut((0, 0), (q, dim)).copy_from(&dec.p0);
    for m in &dec.pi {
        sum += m;
    }
    let r = (&dec.p - &sum).norm() / dec.p.norm().max(f64::MIN_POSITIVE);
    push(
        "decomposition_identity".into(),
        r <= threshold,
        r,
        "P = [P0; 0] + sum_i P_i".into(),
    );

    let rank_p = rank(&dec.p, tol)?;
    push(
        "p_invertible".into(),
        rank_p == dim,
        0.0,
        format!("rank(P) = {rank_p}, N = {dim}"),
    );

    let rank_p0 = if q == 0 { 0 } else { rank(&dec.p0, tol)? };
    push(
        "c1_rank_p0".into(),
        rank_p0 == q,
        0.0,
        format!("rank(P0) = {rank_p0}, q = {q}"),
    );
    let rank_j = if q == 0 { 0 } else { rank(&dec.j, tol)? };
    push(
        "c1_j_nonsingular".into(),
        rank_j == q,
        0.0,
        format!("rank(J) = {rank_j}, q = {q}"),
    );

    let a_scale = spectral_norm(a).max(1.0);
    let p0_scale = spectral_norm(&dec.p0).max(f64::MIN_POSITIVE);
    for k in 0..=n + 1 {
        let r = if q == 0 {
            0.0
        } else {
            let lhs = &dec.p0 * mat_pow(a, k);
            let rhs = mat_pow(&dec.j, k) * &dec.p0;
            (lhs - rhs).norm() / (p0_scale * a_scale.powi(k as i32))
        };
        push(
            format!("c1_intertwining_k{k}"),
            r <= threshold,
            r,
            format!("P0 A^{k} = J^{k} P0"),
        );
    }

    let rank_a = rank(a, tol)?;
    for (idx, pi) in dec.pi.iter().enumerate() {
        let i = idx + 1;
        let rank_pi = rank(pi, tol)?;
        let rank_shifted = rank(&(pi * mat_pow(a, i - 1)), tol)?;
        push(
            format!("c2_rank_i{i}"),
            rank_pi == rank_shifted && rank_pi <= dim - rank_a,
            0.0,
            format!(
                "rank(P_{i}) = {rank_pi}, rank(P_{i} A^{}) = {rank_shifted}, N - rank(A) = {}",
                i - 1,
                dim - rank_a
            ),
        );
        let pi_scale = spectral_norm(pi).max(f64::MIN_POSITIVE);
        let worst = (i..=n + 1)
            .map(|k| (pi * mat_pow(a, k)).norm() / (pi_scale * a_scale.powi(k as i32)))
            .fold(0.0, f64::max);
        push(
            format!("c2_annihilation_i{i}"),
            worst <= threshold,
            worst,
            format!("P_{i} A^k = 0 for {i} <= k <= {}", n + 1),
        );
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(DecompositionReport { all_passed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn structure_of_shift_plus_zero() {
        let a = Mat::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 0., 0., 0., 0.]);
        let s = zero_structure(&a, &tol()).unwrap();
        assert_eq!(s.n, 2);
        assert_eq!(s.q, 0);
        assert_eq!(s.block_counts, vec![1, 1]);
        assert_eq!(s.tail_counts, vec![2, 1]);
        assert_eq!(s.rank_sequence, vec![3, 1, 0, 0]);
    }

    #[test]
    fn structure_of_diagonal() {
        let a = Mat::from_diagonal(&DVector::from_vec(vec![-1., -1., 0.]));
        let s = zero_structure(&a, &tol()).unwrap();
        assert_eq!((s.n, s.q), (1, 2));
        assert_eq!(s.block_counts, vec![1]);
        assert_eq!(s.tail_counts, vec![1]);
    }

    #[test]
    fn structure_of_nonsingular() {
        let a = Mat::from_row_slice(2, 2, &[2., 1., 1., 1.]);
        let s = zero_structure(&a, &tol()).unwrap();
        assert_eq!((s.n, s.q), (0, 2));
        assert!(s.block_counts.is_empty());
    }

    #[test]
    fn nilpotent_two_by_two() {
        let a = Mat::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let dec = build_decomposition(&a, &tol()).unwrap();
        assert_eq!((dec.structure.q, dec.structure.n), (0, 2));
        let p2 = &dec.pi[1];
        assert!((p2 * mat_pow(&a, 2)).norm() < 1e-14);
        assert!((p2 * &a).norm() > 0.5);
        assert_eq!(rank(&(p2 * &a), &tol()).unwrap(), 1);
        assert_eq!(rank(p2, &tol()).unwrap(), 1);
        assert!(verify_decomposition(&a, &dec, &tol()).unwrap().all_passed);
    }

    #[test]
    fn nonsingular_degenerates() {
        let a = Mat::from_row_slice(2, 2, &[2., 1., 1., 1.]);
        let dec = build_decomposition(&a, &tol()).unwrap();
        assert!(dec.pi.is_empty());
        assert_eq!(dec.j.shape(), (2, 2));
        // J is similar to A
        let tr_a = a.trace();
        assert!((dec.j.trace() - tr_a).abs() < 1e-12);
        assert!((dec.j.determinant() - a.determinant()).abs() < 1e-12);
        assert!(verify_decomposition(&a, &dec, &tol()).unwrap().all_passed);
    }

    #[test]
    fn diagonal_example() {
        let a = Mat::from_diagonal(&DVector::from_vec(vec![-1., -1., 0.]));
        let dec = build_decomposition(&a, &tol()).unwrap();
        assert_eq!(dec.structure.q, 2);
        let p1 = &dec.pi[0];
        // supported on the last row, acting on the third coordinate only
        assert!(p1.rows(0, 2).norm() == 0.0);
        assert!(p1[(2, 0)].abs() < 1e-14 && p1[(2, 1)].abs() < 1e-14);
        assert!(p1[(2, 2)].abs() > 0.5);
        let eig = dec.j.symmetric_eigenvalues();
        assert!(eig.iter().all(|l| (l + 1.0).abs() < 1e-12));
        let report = verify_decomposition(&a, &dec, &tol()).unwrap();
        assert!(report.all_passed);
        assert_eq!(rank(p1, &tol()).unwrap(), 1);
    }

    #[test]
    fn doubled_j_breaks_intertwining() {
        let a = Mat::from_row_slice(3, 3, &[2., 1., 0., 0., 1., 0., 0., 0., 0.]);
        let mut dec = build_decomposition(&a, &tol()).unwrap();
        dec.j *= 2.0;
        let report = verify_decomposition(&a, &dec, &tol()).unwrap();
        assert!(!report.all_passed);
        assert!(report.get("c1_intertwining_k0").unwrap().passed);
        for k in 1..=dec.structure.n + 1 {
            assert!(!report.get(&format!("c1_intertwining_k{k}")).unwrap().passed);
        }
    }

    #[test]
    fn mixed_blocks_conjugated() {
        // J_3(0) ⊕ J_1(0) ⊕ [3] conjugated by a unimodular matrix
        let mut core = Mat::zeros(5, 5);
        core[(0, 1)] = 1.0;
        core[(1, 2)] = 1.0;
        core[(4, 4)] = 3.0;
        let t = Mat::from_row_slice(
            5,
            5,
            &[
                1., 1., 0., 0., 2., 0., 1., 0., -1., 0., 0., 0., 1., 1., 0., 1., 0., 0., 1., 0.,
                0., 0., 1., 0., 1.,
            ],
        );
        let t_inv = t.clone().try_inverse().unwrap();
        let a = &t * core * t_inv;
        let s = zero_structure(&a, &tol()).unwrap();
        assert_eq!(s.block_counts, vec![1, 0, 1]);
        assert_eq!(s.q, 1);
        let dec = build_decomposition(&a, &tol()).unwrap();
        let report = verify_decomposition(&a, &dec, &tol()).unwrap();
        assert!(report.all_passed, "{report:#?}");
        assert!(report.max_residual() < 1e-8);
    }

    #[test]
    fn shape_mismatch_is_input_error() {
        let a = Mat::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let mut dec = build_decomposition(&a, &tol()).unwrap();
        dec.pi.pop();
        assert!(verify_decomposition(&a, &dec, &tol()).is_err());
    }
}
