//! One-sided Jacobi (Hestenes) singular value decomposition.
//!
//! Works for real and complex matrices of any shape. For the small dense
//! matrices handled here it is both simple and highly accurate, including on
//! rank-deficient inputs with entries at round-off level.

use nalgebra::{ComplexField, DMatrix};

const MAX_SWEEPS: usize = 80;

/// `M = U Σ V^H` stored column-wise: `scaled[:, j] = σ_j u_j` and `v[:, j] = v_j`.
#[derive(Debug, Clone)]
pub struct JacobiSvd<T: ComplexField<RealField = f64>> {
    scaled: DMatrix<T>,
    v: DMatrix<T>,
    sigma: Vec<f64>,
    converged: bool,
}

impl<T: ComplexField<RealField = f64> + Copy> JacobiSvd<T> {
    pub fn new(m: &DMatrix<T>) -> Self {
        let cols = m.ncols();
        let mut a = m.clone();
        let mut v = DMatrix::<T>::identity(cols, cols);
        let mut converged = false;
        let floor = (f64::EPSILON * m.norm()).powi(2);
        let orth_tol = f64::EPSILON * (m.nrows().max(1) as f64);
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = T::zero();
                    for i in 0..a.nrows() {
                        let ap = a[(i, p)];
                        let aq = a[(i, q)];
                        alpha += ap.modulus_squared();
                        beta += aq.modulus_squared();
                        gamma += ap.conjugate() * aq;
                    }
                    let g = gamma.modulus();
                    if g == 0.0
                        || alpha <= floor
                        || beta <= floor
                        || g <= orth_tol * (alpha * beta).sqrt()
                    {
                        continue;
                    }
                    rotated = true;
                    // rotate the phase of column q so that a_p^H a_q is real
                    let phase = gamma.unscale(g).conjugate();
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..a.nrows() {
                        let ap = a[(i, p)];
                        let aq = a[(i, q)] * phase;
                        a[(i, p)] = ap.scale(c) - aq.scale(s);
                        a[(i, q)] = ap.scale(s) + aq.scale(c);
                    }
                    for i in 0..cols {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)] * phase;
                        v[(i, p)] = vp.scale(c) - vq.scale(s);
                        v[(i, q)] = vp.scale(s) + vq.scale(c);
                    }
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        let sigma = (0..cols)
            .map(|j| {
                a.column(j)
                    .iter()
                    .map(|x| x.modulus_squared())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        JacobiSvd {
            scaled: a,
            v,
            sigma,
            converged,
        }
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Singular values, one per column of the input (unordered).
    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn max_singular_value(&self) -> f64 {
        self.sigma.iter().cloned().fold(0.0, f64::max)
    }

    /// Column indices ordered by decreasing singular value (ties by index).
    pub fn order_desc(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.sigma.len()).collect();
        order.sort_by(|&x, &y| self.sigma[y].total_cmp(&self.sigma[x]).then(x.cmp(&y)));
        order
    }

    /// Right singular vectors whose singular value is at most `threshold`,
    /// ordered by increasing singular value.
    pub fn null_vectors(&self, threshold: f64) -> DMatrix<T> {
        let mut idx: Vec<usize> = (0..self.sigma.len())
            .filter(|&j| self.sigma[j] <= threshold)
            .collect();
        idx.sort_by(|&x, &y| self.sigma[x].total_cmp(&self.sigma[y]).then(x.cmp(&y)));
        self.v.select_columns(idx.iter())
    }

    /// Right singular vector of the smallest singular value.
    pub fn least_right_vector(&self) -> DMatrix<T> {
        let order = self.order_desc();
        match order.last() {
            Some(&j) => self.v.select_columns([j].iter()),
            None => DMatrix::zeros(self.v.nrows(), 0),
        }
    }

    /// Orthonormal left singular vectors of the `count` largest singular values.
    pub fn leading_left_vectors(&self, count: usize) -> DMatrix<T> {
        let order = self.order_desc();
        let mut out = DMatrix::zeros(self.scaled.nrows(), count);
        for (c, &j) in order.iter().take(count).enumerate() {
            let s = self.sigma[j];
            if s > 0.0 {
                out.set_column(c, &self.scaled.column(j).unscale(s));
            }
        }
        out
    }

    /// Minimum-norm least-squares solution of `M x = b`, ignoring singular
    /// values below `rtol * sigma_max`.
    pub fn solve(&self, b: &DMatrix<T>, rtol: f64) -> DMatrix<T> {
        let cutoff = rtol * self.max_singular_value();
        let mut x = DMatrix::zeros(self.v.nrows(), b.ncols());
        for j in 0..self.sigma.len() {
            let s = self.sigma[j];
            if s <= cutoff || s == 0.0 {
                continue;
            }
            // u_j = scaled_j / s ; x += v_j (u_j^H b) / s
            let coeff = self.scaled.column(j).ad_mul(b).unscale(s * s);
            x += self.v.column(j) * coeff;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn recompose<T: ComplexField<RealField = f64> + Copy>(svd: &JacobiSvd<T>) -> DMatrix<T> {
        &svd.scaled * svd.v.adjoint()
    }

    #[test]
    fn rank_one_with_roundoff_rows() {
        // rows at round-off level on top of a single significant row
        let d = [
            0.0, 1.1e-16, -5.5e-17, 9.0e-17, -0.2324, 5.5e-17, -1.6e-16, 0.0, 1.1e-16, 0.3514,
            -1.8e-16, -9.7e-17, -2.2e-16, -4.1e-17, 0.6721, -2.4e-16, -5.5e-17, 0.0, 5.5e-17,
            0.6087,
        ];
        let m = DMatrix::from_column_slice(5, 4, &d);
        let svd = JacobiSvd::new(&m);
        assert!(svd.converged());
        assert!((recompose(&svd) - &m).norm() < 1e-14);
        let u: DMatrix<f64> = svd.leading_left_vectors(1);
        assert!((u[(4, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_null_vector() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        // rows (1, i) and (i, -1) are dependent; null vector ∝ (i, -1)/..
        let m = DMatrix::from_row_slice(2, 2, &[one, i, i, -one]);
        let svd = JacobiSvd::new(&m);
        let null = svd.null_vectors(1e-12);
        assert_eq!(null.ncols(), 1);
        assert!((&m * &null).norm() < 1e-14);
        assert!((recompose(&svd) - &m).norm() < 1e-14);
    }

    #[test]
    fn least_squares_solve() {
        let m = DMatrix::from_row_slice(3, 2, &[1., 0., 0., 1., 1., 1.]);
        let b = DMatrix::from_column_slice(3, 1, &[1., 2., 3.]);
        let x = JacobiSvd::new(&m).solve(&b, 1e-14);
        assert!((x[(0, 0)] - 1.0).abs() < 1e-14 && (x[(1, 0)] - 2.0).abs() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn recomposes_random_matrices(
            rows in 1usize..6,
            cols in 1usize..6,
            data in proptest::collection::vec(-5i32..=5, 36),
        ) {
            let m = DMatrix::from_fn(rows, cols, |i, j| f64::from(data[i * 6 + j]));
            let svd = JacobiSvd::new(&m);
            proptest::prop_assert!(svd.converged());
            proptest::prop_assert!((recompose(&svd) - &m).norm() <= 1e-12 * (1.0 + m.norm()));
            let vtv = svd.v.transpose() * &svd.v;
            proptest::prop_assert!((vtv - DMatrix::identity(cols, cols)).norm() < 1e-12);
        }
    }
}
