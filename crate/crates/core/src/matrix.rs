//! Dense real/complex matrix primitives with an explicit tolerance policy.
//!
//! Every rank decision goes through singular values compared against a
//! threshold relative to the largest singular value, so results are stable
//! under transposition and mild rounding.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svd::JacobiSvd;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Numeric policy used by every floating-point decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Singular values below `rank_rtol * sigma_max` count as zero.
    pub rank_rtol: f64,
    /// Eigenvalues with `|Im| <= eig_imag_tol` are treated as real.
    pub eig_imag_tol: f64,
    /// Absolute slack for `<= 0` tests.
    pub ineq_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rtol: 1e-9,
            eig_imag_tol: 1e-8,
            ineq_tol: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(rank_rtol: f64, eig_imag_tol: f64, ineq_tol: f64) -> Result<Self> {
        let tol = Tolerances {
            rank_rtol,
            eig_imag_tol,
            ineq_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    /// All three thresholds set to the same value.
    pub fn uniform(value: f64) -> Result<Self> {
        Self::new(value, value, value)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rtol", self.rank_rtol),
            ("eig_imag_tol", self.eig_imag_tol),
            ("ineq_tol", self.ineq_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::input(format!(
                    "tolerance {name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

pub fn ensure_finite(m: &Mat, name: &str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::input(format!(
                    "{name} has a non-finite entry at row {}, column {}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

pub fn ensure_square(m: &Mat, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::input(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn count_significant(singular_values: &[f64], rtol: f64) -> usize {
    let max = singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rtol * max).count()
}

/// Singular values of a real matrix (unordered).
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    JacobiSvd::new(m).singular_values().to_vec()
}

pub fn rank(m: &Mat, tol: &Tolerances) -> Result<usize> {
    ensure_finite(m, "matrix")?;
    Ok(count_significant(&singular_values(m), tol.rank_rtol))
}

pub fn complex_rank(m: &CMat, tol: &Tolerances) -> usize {
    if m.is_empty() {
        return 0;
    }
    count_significant(JacobiSvd::new(m).singular_values(), tol.rank_rtol)
}

/// Orthonormal basis of the right null space of `m`, one column per null direction.
pub fn null_space_basis(m: &Mat, tol: &Tolerances) -> Result<Mat> {
    ensure_finite(m, "matrix")?;
    let scale = singular_values(m).into_iter().fold(0.0_f64, f64::max);
    null_space_with_scale(m, scale, tol)
}

/// Null space where singular values up to `tol.rank_rtol * scale` count as zero.
pub fn null_space_with_scale(m: &Mat, scale: f64, tol: &Tolerances) -> Result<Mat> {
    let cols = m.ncols();
    if m.nrows() == 0 || scale == 0.0 || m.iter().all(|&x| x == 0.0) {
        return Ok(Mat::identity(cols, cols));
    }
    let svd = JacobiSvd::new(m);
    if !svd.converged() {
        return Err(Error::numeric("Jacobi SVD did not converge"));
    }
    Ok(svd.null_vectors(tol.rank_rtol * scale))
}

/// Orthonormal bases of `ker(A), ker(A^2), ...`, stopping once the dimension
/// stops growing (the last entry is the stable kernel `ker(A^n)`).
///
/// `ker(A^k)` is computed as `{v : A v in ker(A^(k-1))}` with ranks measured
/// against `‖A‖`, which avoids forming powers whose entries shrink or grow
/// geometrically.
pub fn kernel_chain(a: &Mat, tol: &Tolerances) -> Result<Vec<Mat>> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    let n = a.nrows();
    let scale = singular_values(a).into_iter().fold(0.0_f64, f64::max);
    let mut chain: Vec<Mat> = Vec::new();
    let mut prev = Mat::zeros(n, 0);
    loop {
        let projected = a - &prev * (prev.transpose() * a);
        let next = null_space_with_scale(&projected, scale, tol)?;
        if next.ncols() < prev.ncols() {
            return Err(Error::numeric(format!(
                "rank sequence increased at power {}: dim ker(A^{}) = {} > dim ker(A^{}) = {}",
                chain.len() + 1,
                chain.len(),
                prev.ncols(),
                chain.len() + 1,
                next.ncols()
            )));
        }
        let grew = next.ncols() > prev.ncols();
        if !grew {
            if chain.is_empty() {
                chain.push(next);
            }
            break;
        }
        prev = next.clone();
        chain.push(next);
        if prev.ncols() == n {
            break;
        }
    }
    Ok(chain)
}

/// Complex counterpart of [`null_space_basis`]; columns are orthonormal in the Hermitian sense.
pub fn complex_null_space_basis(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    let cols = m.ncols();
    if m.nrows() == 0 || m.iter().all(|x| x.norm() == 0.0) {
        return Ok(CMat::identity(cols, cols));
    }
    let svd = JacobiSvd::new(m);
    if !svd.converged() {
        return Err(Error::numeric("Jacobi SVD did not converge"));
    }
    Ok(svd.null_vectors(tol.rank_rtol * svd.max_singular_value()))
}

/// Right singular vector of the smallest singular value.
fn least_singular_vector(m: &CMat) -> Result<CMat> {
    if m.ncols() == 0 {
        return Err(Error::numeric("empty matrix has no singular vectors"));
    }
    Ok(JacobiSvd::new(m).least_right_vector())
}

/// `m^k` by repeated squaring on the exact product (no spectral shortcut).
pub fn mat_pow(m: &Mat, k: usize) -> Mat {
    let n = m.nrows();
    let mut result = Mat::identity(n, n);
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// One cluster of numerically equal eigenvalues together with its left eigenspace.
#[derive(Debug, Clone)]
pub struct EigenGroup {
    pub lambda: Complex64,
    /// Number of computed eigenvalues merged into this group.
    pub algebraic_multiplicity: usize,
    /// Largest distance of a merged eigenvalue from `lambda`.
    pub spread: f64,
    /// Columns `z` with `z^T A = lambda z^T`; orthonormal.
    pub left_basis: CMat,
}

impl EigenGroup {
    pub fn geometric_multiplicity(&self) -> usize {
        self.left_basis.ncols()
    }

    pub fn is_real(&self) -> bool {
        self.lambda.im == 0.0
    }

    pub fn is_real_nonnegative(&self, tol: &Tolerances) -> bool {
        self.lambda.im.abs() <= tol.eig_imag_tol && self.lambda.re >= -tol.eig_imag_tol
    }

    /// Real left basis, available for groups classified as real.
    pub fn real_left_basis(&self) -> Option<Mat> {
        if !self.is_real() {
            return None;
        }
        Some(self.left_basis.map(|c| c.re))
    }
}

#[derive(Debug, Clone)]
pub struct LeftEigenSystem {
    /// Sorted by real part, then imaginary part.
    pub groups: Vec<EigenGroup>,
}

impl LeftEigenSystem {
    pub fn merged_clusters(&self) -> impl Iterator<Item = &EigenGroup> {
        self.groups.iter().filter(|g| g.spread > 0.0)
    }
}

/// Raw eigenvalues of a real square matrix via the real Schur form.
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::numeric("Schur iteration did not converge"))?;
    Ok(schur.complex_eigenvalues().iter().cloned().collect())
}

/// Ranks of `A^0, A^1, ...` up to and including the first repeated value.
pub fn power_rank_sequence(a: &Mat, tol: &Tolerances) -> Result<Vec<usize>> {
    let n = a.nrows();
    let mut seq = vec![n];
    for kernel in kernel_chain(a, tol)? {
        let r = n - kernel.ncols();
        if *seq.last().unwrap() != r {
            seq.push(r);
        }
    }
    let last = *seq.last().unwrap();
    seq.push(last);
    Ok(seq)
}

pub fn left_eigensystem(a: &Mat, tol: &Tolerances) -> Result<LeftEigenSystem> {
    let n = a.nrows();
    let mut raw = eigenvalues(a)?;

    // The eigenvalue zero is split numerically when it is defective; its
    // algebraic multiplicity is recovered exactly from the rank sequence.
    let zero_mult = n - *power_rank_sequence(a, tol)?.last().unwrap();
    if zero_mult > 0 {
        let mut by_modulus: Vec<usize> = (0..raw.len()).collect();
        by_modulus.sort_by(|&i, &j| raw[i].norm().total_cmp(&raw[j].norm()).then(i.cmp(&j)));
        for &i in by_modulus.iter().take(zero_mult) {
            raw[i] = Complex64::new(0.0, 0.0);
        }
    }

    raw.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let spectral_radius = raw.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let radius = tol.eig_imag_tol * (1.0 + spectral_radius);

    // single-linkage clustering
    let mut label: Vec<usize> = (0..raw.len()).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..raw.len() {
        for j in (i + 1)..raw.len() {
            if (raw[i] - raw[j]).norm() <= radius {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                if ri != rj {
                    label[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (i, &value) in raw.iter().enumerate() {
        let r = find(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(p) => clusters[p].push(value),
            None => {
                roots.push(r);
                clusters.push(vec![value]);
            }
        }
    }

    let at = a.transpose();
    let mut groups = Vec::with_capacity(clusters.len());
    for members in clusters {
        let count = members.len() as f64;
        let mut lambda = members.iter().sum::<Complex64>() / count;
        let spread = members
            .iter()
            .map(|m| (m - lambda).norm())
            .fold(0.0, f64::max);
        if lambda.im.abs() <= tol.eig_imag_tol {
            lambda.im = 0.0;
        }
        let left_basis = if lambda.im == 0.0 {
            let shifted = &at - Mat::identity(n, n) * lambda.re;
            let basis = null_space_basis(&shifted, tol)?;
            if basis.ncols() == 0 {
                least_singular_vector(&to_complex(&shifted))?.map(|c| Complex64::new(c.re, 0.0))
            } else {
                to_complex(&basis)
            }
        } else {
            let shifted = to_complex(&at) - CMat::identity(n, n) * lambda;
            let basis = complex_null_space_basis(&shifted, tol)?;
            if basis.ncols() == 0 {
                least_singular_vector(&shifted)?
            } else {
                basis
            }
        };
        groups.push(EigenGroup {
            lambda,
            algebraic_multiplicity: members.len(),
            spread,
            left_basis,
        });
    }
    groups.sort_by(|x, y| {
        x.lambda
            .re
            .total_cmp(&y.lambda.re)
            .then(x.lambda.im.total_cmp(&y.lambda.im))
    });
    Ok(LeftEigenSystem { groups })
}

/// Rank of the complex matrix `[lambda I - A | B]`.
pub fn pbh_rank(a: &Mat, b: &Mat, lambda: Complex64, tol: &Tolerances) -> Result<usize> {
    ensure_square(a, "A")?;
    if b.nrows() != a.nrows() {
        return Err(Error::input(format!(
            "B has {} rows but A is {}x{}",
            b.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(complex_rank(&pbh_matrix(a, b, lambda), tol))
}

pub(crate) fn pbh_matrix(a: &Mat, b: &Mat, lambda: Complex64) -> CMat {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = CMat::zeros(n, n + m);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j {
                lambda
            } else {
                Complex64::new(0.0, 0.0)
            };
            out[(i, j)] = diag - a[(i, j)];
        }
        for j in 0..m {
            out[(i, n + j)] = Complex64::new(b[(i, j)], 0.0);
        }
    }
    out
}

/// `‖z^T A - lambda z^T‖_2` in complex arithmetic (no conjugation of `z`).
pub fn left_eig_residual(a: &Mat, z: &[Complex64], lambda: Complex64) -> f64 {
    let n = a.nrows();
    (0..n)
        .map(|j| {
            let mut acc = -lambda * z[j];
            for (i, zi) in z.iter().enumerate() {
                acc += zi * a[(i, j)];
            }
            acc.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}
