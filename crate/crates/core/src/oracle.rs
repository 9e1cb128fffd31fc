//! Brute-force reachability evidence: support-sequence enumeration with
//! cone-membership LPs over a set of probe directions, plus random
//! admissible rollouts.
//!
//! A `CoveredAt` verdict is positive evidence of controllability. `Uncovered`
//! is inconclusive on its own, since the horizon is bounded by `k_max`.

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::feasible_nonneg_solution;
use crate::control::{SparsityLevel, SystemPair};
use crate::error::{Error, Result};
use crate::matrix::{Mat, Tolerances};

pub const MAX_SUPPORTS: u64 = 10_000;
pub const MAX_SEQUENCES: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub k_max: usize,
    pub n_directions: usize,
    pub seed: u64,
    pub include_axes: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            k_max: 6,
            n_directions: 64,
            seed: 0,
            include_axes: true,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::input("k_max must be at least 1"));
        }
        if self.n_directions == 0 {
            return Err(Error::input("n_directions must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleOutcome {
    CoveredAt(usize),
    Uncovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub outcome: OracleOutcome,
    pub uncovered_directions: Vec<Vec<f64>>,
    /// Largest horizon examined.
    pub k_used: usize,
    pub lp_count: u64,
}

impl OracleVerdict {
    pub fn is_covered(&self) -> bool {
        matches!(self.outcome, OracleOutcome::CoveredAt(_))
    }
}

/// A support sequence `S_1, ..., S_K` and inputs `u_1, ..., u_K` (each of
/// length `m`, zero off its support) steering the origin to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipWitness {
    pub supports: Vec<Vec<usize>>,
    pub inputs: Vec<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

fn sequence_count(supports: u64, k: usize) -> Option<u64> {
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total.checked_mul(supports)?;
    }
    Some(total)
}

/// All size-`s` subsets of `0..m` (0-based) in lexicographic order.
pub fn enumerate_supports(m: usize, s: usize) -> Result<Vec<Vec<usize>>> {
    if s == 0 || s > m {
        return Err(Error::input(format!(
            "support size s={s} must satisfy 1 <= s <= m={m}"
        )));
    }
    let count = binomial(m, s);
    if count > MAX_SUPPORTS {
        return Err(Error::input(format!(
            "C({m},{s}) = {count} supports exceeds the limit of {MAX_SUPPORTS}"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..s).rev().find(|&i| idx[i] != i + m - s) else {
            break;
        };
        idx[pos] += 1;
        for j in pos + 1..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}

/// `A^j B` for `j = 0..k`.
fn powered_inputs(sys: &SystemPair, k: usize) -> Vec<Mat> {
    let mut out = Vec::with_capacity(k);
    let mut cur = sys.b().clone();
    for _ in 0..k {
        let next = sys.a() * &cur;
        out.push(cur);
        cur = next;
    }
    out
}

fn check_sequence_guard(supports: u64, k: usize) -> Result<()> {
    match sequence_count(supports, k) {
        Some(c) if c <= MAX_SEQUENCES => Ok(()),
        _ => Err(Error::input(format!(
            "{supports}^{k} support sequences exceeds the limit of {MAX_SEQUENCES}; lower K or s"
        ))),
    }
}

struct Searcher<'a> {
    powered: &'a [Mat],
    supports: &'a [Vec<usize>],
    m: usize,
    tol: &'a Tolerances,
}

impl Searcher<'_> {
    /// Searches horizon `k`; the second value is the number of LPs solved.
    fn search(&self, k: usize, x: &[f64]) -> Result<(Option<MembershipWitness>, u64)> {
        let n = x.len();
        // Every sequence cone lies inside the cone of all stacked columns.
        let mut full = Mat::zeros(n, k * self.m);
        for step in 0..k {
            full.view_mut((0, step * self.m), (n, self.m))
                .copy_from(&self.powered[k - 1 - step]);
        }
        let mut lps = 1;
        if !feasible_nonneg_solution(&full, x, self.tol)?.member {
            return Ok((None, lps));
        }
        let s = self.supports[0].len();
        let mut seq = vec![0usize; k];
        let mut stacked = Mat::zeros(n, k * s);
        loop {
            for (step, &si) in seq.iter().enumerate() {
                let p = &self.powered[k - 1 - step];
                for (c, &j) in self.supports[si].iter().enumerate() {
                    stacked.set_column(step * s + c, &p.column(j));
                }
            }
            lps += 1;
            let res = feasible_nonneg_solution(&stacked, x, self.tol)?;
            if let Some(coef) = res.coefficients.filter(|_| res.member) {
                let mut inputs = vec![vec![0.0; self.m]; k];
                for (step, &si) in seq.iter().enumerate() {
                    for (c, &j) in self.supports[si].iter().enumerate() {
                        inputs[step][j] = coef[step * s + c];
                    }
                }
                let supports = seq.iter().map(|&si| self.supports[si].clone()).collect();
                return Ok((Some(MembershipWitness { supports, inputs }), lps));
            }
            let Some(pos) = (0..k).rev().find(|&i| seq[i] + 1 < self.supports.len()) else {
                return Ok((None, lps));
            };
            seq[pos] += 1;
            for v in seq.iter_mut().skip(pos + 1) {
                *v = 0;
            }
        }
    }
}

/// Looks for a support sequence of length `k` whose positive span contains `x`.
pub fn reachable_membership(
    sys: &SystemPair,
    s: SparsityLevel,
    k: usize,
    x: &[f64],
    tol: &Tolerances,
) -> Result<Option<MembershipWitness>> {
    if k == 0 {
        return Err(Error::input("horizon K must be at least 1"));
    }
    if x.len() != sys.n() {
        return Err(Error::input(format!(
            "target has length {} but the state dimension is {}",
            x.len(),
            sys.n()
        )));
    }
    let supports = enumerate_supports(sys.m(), s.get())?;
    check_sequence_guard(supports.len() as u64, k)?;
    let powered = powered_inputs(sys, k);
    let searcher = Searcher {
        powered: &powered,
        supports: &supports,
        m: sys.m(),
        tol,
    };
    Ok(searcher.search(k, x)?.0)
}

fn probe_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Signed axes (when enabled) followed by `n_directions` seeded unit vectors.
pub fn probe_directions(n: usize, cfg: &OracleConfig) -> Vec<Vec<f64>> {
    let mut probes = Vec::new();
    if cfg.include_axes {
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; n];
                e[i] = sign;
                probes.push(e);
            }
        }
    }
    probes.extend(
        (0..cfg.n_directions as u64)
            .into_par_iter()
            .map(|idx| random_unit(&mut probe_rng(cfg.seed, idx), n))
            .collect::<Vec<_>>(),
    );
    probes
}

/// Tests whether every probe direction is reachable at some horizon up to `k_max`.
pub fn coverage_probe(
    sys: &SystemPair,
    s: SparsityLevel,
    cfg: &OracleConfig,
    tol: &Tolerances,
) -> Result<OracleVerdict> {
    cfg.validate()?;
    tol.validate()?;
    let supports = enumerate_supports(sys.m(), s.get())?;
    check_sequence_guard(supports.len() as u64, cfg.k_max)?;
    let powered = powered_inputs(sys, cfg.k_max);
    let searcher = Searcher {
        powered: &powered,
        supports: &supports,
        m: sys.m(),
        tol,
    };
    let mut pending = probe_directions(sys.n(), cfg);
    let mut lp_count = 0;
    let mut k_used = 0;
    for k in 1..=cfg.k_max {
        k_used = k;
        let results: Vec<(bool, u64)> = pending
            .par_iter()
            .map(|x| searcher.search(k, x).map(|(w, lps)| (w.is_some(), lps)))
            .collect::<Result<_>>()?;
        lp_count += results.iter().map(|r| r.1).sum::<u64>();
        pending = pending
            .into_iter()
            .zip(&results)
            .filter(|(_, r)| !r.0)
            .map(|(x, _)| x)
            .collect();
        if pending.is_empty() {
            return Ok(OracleVerdict {
                outcome: OracleOutcome::CoveredAt(k),
                uncovered_directions: Vec::new(),
                k_used,
                lp_count,
            });
        }
    }
    Ok(OracleVerdict {
        outcome: OracleOutcome::Uncovered,
        uncovered_directions: pending,
        k_used,
        lp_count,
    })
}

/// Final state from the origin after `k` random admissible inputs.
pub fn random_rollout(sys: &SystemPair, s: SparsityLevel, k: usize, seed: u64) -> Vec<f64> {
    random_rollout_scaled(sys, s, k, seed, 1.0)
}

/// As [`random_rollout`], with input entries drawn from `[0, scale]`.
pub fn random_rollout_scaled(
    sys: &SystemPair,
    s: SparsityLevel,
    k: usize,
    seed: u64,
    scale: f64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DVector::zeros(sys.n());
    for _ in 0..k {
        let mut u = DVector::zeros(sys.m());
        for j in sample(&mut rng, sys.m(), s.get()).iter() {
            u[j] = scale * rng.gen_range(0.0..=1.0);
        }
        x = sys.a() * x + sys.b() * u;
    }
    x.iter().cloned().collect()
}
