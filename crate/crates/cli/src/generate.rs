use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sparsectl::matrix::rank;
use sparsectl::{Mat, Tolerances};

use crate::system::{rows_of, PlantedWitness, SystemFile};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    PlantedUncontrollableIi,
    PlantedRankDeficient,
    RandomNonsingularPaired,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [
        GeneratorKind::PlantedUncontrollableIi,
        GeneratorKind::PlantedRankDeficient,
        GeneratorKind::RandomNonsingularPaired,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::PlantedUncontrollableIi => "planted_uncontrollable_ii",
            GeneratorKind::PlantedRankDeficient => "planted_rank_deficient",
            GeneratorKind::RandomNonsingularPaired => "random_nonsingular_paired",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                CliError::Input(format!(
                    "unknown generator kind {s:?}; expected one of planted_uncontrollable_ii, planted_rank_deficient, random_nonsingular_paired"
                ))
            })
    }
}

fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i32) -> Mat {
    Mat::from_fn(rows, cols, |_, _| f64::from(rng.gen_range(-bound..=bound)))
}

/// `[C | -C]` with `C` of rank `min(n, m / 2)`, plus one random column when `m` is odd.
fn paired_inputs(rng: &mut ChaCha8Rng, n: usize, m: usize, tol: &Tolerances) -> Mat {
    let half = m / 2;
    let c = loop {
        let c = int_matrix(rng, n, half, 3);
        if half == 0 || rank(&c, tol).unwrap_or(0) == n.min(half) {
            break c;
        }
    };
    let mut b = Mat::zeros(n, m);
    b.view_mut((0, 0), (n, half)).copy_from(&c);
    b.view_mut((0, half), (n, half)).copy_from(&(-&c));
    if m % 2 == 1 {
        let extra = loop {
            let e = int_matrix(rng, n, 1, 3);
            if e.iter().any(|&v| v != 0.0) {
                break e;
            }
        };
        b.set_column(m - 1, &extra.column(0));
    }
    b
}

fn planted_uncontrollable(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Mat, Mat, PlantedWitness) {
    let lambda = f64::from(rng.gen_range(0..=4)) * 0.5;
    let z = loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            break nalgebra::DVector::from_vec(v) / norm;
        }
    };
    let proj = &z * z.transpose();
    let w = Mat::from_fn(n, n, |_, _| rng.gen_range(-2.0..=2.0));
    let at = &proj * lambda + w * (Mat::identity(n, n) - &proj);
    let a = at.transpose();
    let mut b = Mat::zeros(n, m);
    for j in 0..m {
        let r = nalgebra::DVector::from_fn(n, |_, _| rng.gen_range(-2.0..=2.0));
        let delta = rng.gen_range(0.1..=1.0);
        let col = &r - &z * (z.dot(&r) + delta);
        b.set_column(j, &col);
    }
    let witness = PlantedWitness {
        lambda,
        z: z.iter().cloned().collect(),
    };
    (a, b, witness)
}

/// Builds a test system of the requested kind. `deficiency` applies to
/// `planted_rank_deficient` only and defaults to a seeded choice in `1..N`.
pub fn generate_system(
    kind: GeneratorKind,
    n: usize,
    m: usize,
    seed: u64,
    deficiency: Option<usize>,
) -> Result<SystemFile, CliError> {
    if n == 0 || m == 0 {
        return Err(CliError::Input(format!(
            "dimensions must be positive, got N={n}, m={m}"
        )));
    }
    if n > 64 || m > 64 {
        return Err(CliError::Input("generators support N, m <= 64".into()));
    }
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, planted) = match kind {
        GeneratorKind::PlantedUncontrollableIi => {
            let (a, b, w) = planted_uncontrollable(&mut rng, n, m);
            (a, b, Some(w))
        }
        GeneratorKind::PlantedRankDeficient => {
            let d = match deficiency {
                Some(d) if d > n => {
                    return Err(CliError::Input(format!(
                        "rank deficiency {d} exceeds N={n}"
                    )))
                }
                Some(d) => d,
                None => rng.gen_range(1..n.max(2)).min(n),
            };
            let a = loop {
                let left = int_matrix(&mut rng, n, n - d, 2);
                let right = int_matrix(&mut rng, n - d, n, 2);
                let a = left * right;
                if rank(&a, &tol)? == n - d {
                    break a;
                }
            };
            (a, paired_inputs(&mut rng, n, m, &tol), None)
        }
        GeneratorKind::RandomNonsingularPaired => {
            let a = loop {
                let a = int_matrix(&mut rng, n, n, 3);
                if a.determinant().abs() >= 0.5 && rank(&a, &tol)? == n {
                    break a;
                }
            };
            (a, paired_inputs(&mut rng, n, m, &tol), None)
        }
    };
    Ok(SystemFile {
        a: rows_of(&a),
        b: rows_of(&b),
        s: None,
        name: Some(format!("{kind}_n{n}_m{m}_seed{seed}")),
        planted,
    })
}
