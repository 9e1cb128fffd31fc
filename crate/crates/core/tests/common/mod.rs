#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = DMatrix<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i32) -> Mat {
    Mat::from_fn(rows, cols, |_, _| f64::from(rng.gen_range(-bound..=bound)))
}

pub fn from_ints(rows: usize, cols: usize, data: &[i32]) -> Mat {
    Mat::from_fn(rows, cols, |i, j| f64::from(data[i * cols + j]))
}

/// `U` and its exact inverse, both integer, built from elementary shears.
pub fn unimodular(rng: &mut ChaCha8Rng, n: usize, shears: usize) -> (Mat, Mat) {
    let mut u = Mat::identity(n, n);
    let mut inv = Mat::identity(n, n);
    if n < 2 {
        return (u, inv);
    }
    for _ in 0..shears {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut e = Mat::identity(n, n);
        e[(i, j)] = c;
        let mut e_inv = Mat::identity(n, n);
        e_inv[(i, j)] = -c;
        u = &u * &e;
        inv = &e_inv * &inv;
    }
    (u, inv)
}

pub fn shift_block(size: usize) -> Mat {
    Mat::from_fn(size, size, |i, j| if j == i + 1 { 1.0 } else { 0.0 })
}

/// Nonsingular integer block of size 1 or 2 with determinant of modulus >= 1.
pub fn nonsingular_block(rng: &mut ChaCha8Rng, size: usize) -> Mat {
    loop {
        let b = int_matrix(rng, size, size, 3);
        if b.determinant().abs() >= 1.0 - 1e-9 {
            return b;
        }
    }
}

pub fn direct_sum(blocks: &[Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// Integer matrix with a planted zero-eigenvalue Jordan structure.
/// Returns the matrix and the planted zero block sizes.
pub fn planted_jordan(rng: &mut ChaCha8Rng, max_n: usize) -> (Mat, Vec<usize>) {
    let n = rng.gen_range(2..=max_n);
    let mut blocks = Vec::new();
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let size = rng.gen_range(1..=left.min(3));
        if rng.gen_bool(0.6) {
            blocks.push(shift_block(size));
            sizes.push(size);
        } else {
            let size = size.min(2);
            blocks.push(nonsingular_block(rng, size));
            left -= size;
            continue;
        }
        left -= size;
    }
    let d = direct_sum(&blocks);
    let (u, inv) = unimodular(rng, n, n + 1);
    (&u * d * &inv, sizes)
}
