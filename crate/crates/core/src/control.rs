//! Controllability decisions for `x_k = A x_{k-1} + B u_k` with inputs that
//! are nonnegative, `s`-sparse, or both.
//!
//! The three conditions checked here are:
//!
//! * (i)   no left eigenvector `z` of `A` (any `λ ∈ C`) with `z^T B = 0`;
//! * (ii)  no left eigenvector `z` for a real `λ >= 0` with componentwise
//!   `z^T B <= 0`;
//! * (iii) `s >= N - rank(A)`.
//!
//! Nonnegative `s`-sparse controllability holds iff all three hold;
//! nonnegative controllability iff (i) and (ii); `s`-sparse controllability
//! iff (i) and (iii). Violations of (i) and (ii) come with a [`Certificate`]
//! that can be re-checked independently by [`verify_certificate`].

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone::homogeneous_nonzero;
use crate::error::{Error, Result};
use crate::matrix::{
    complex_null_space_basis, ensure_finite, ensure_square, left_eig_residual, left_eigensystem,
    pbh_matrix, rank, CMat, EigenGroup, LeftEigenSystem, Mat, Tolerances,
};

/// Relative bound on `‖z^T A - λ z^T‖` accepted for a certificate.
pub const EIG_RESIDUAL_RTOL: f64 = 1e-6;

/// The matrix pair `(A, B)` with `A` of size `N x N` and `B` of size `N x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPair {
    a: Mat,
    b: Mat,
}

impl SystemPair {
    pub fn new(a: Mat, b: Mat) -> Result<Self> {
        ensure_square(&a, "A")?;
        if a.nrows() == 0 {
            return Err(Error::input("A must have at least one row"));
        }
        if b.nrows() != a.nrows() {
            return Err(Error::input(format!(
                "B has {} rows but A is {}x{}",
                b.nrows(),
                a.nrows(),
                a.ncols()
            )));
        }
        if b.ncols() == 0 {
            return Err(Error::input("B must have at least one column"));
        }
        ensure_finite(&a, "A")?;
        ensure_finite(&b, "B")?;
        Ok(SystemPair { a, b })
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    /// State dimension `N`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension `m`.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// The same system driven by `-B`.
    pub fn negated_input(&self) -> SystemPair {
        SystemPair {
            a: self.a.clone(),
            b: -&self.b,
        }
    }
}

/// Maximum number of nonzero entries per input vector, `1 <= s <= m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SparsityLevel(usize);

impl SparsityLevel {
    pub fn new(s: usize, m: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::input("sparsity level s must be at least 1"));
        }
        if s > m {
            return Err(Error::input(format!(
                "sparsity level s = {s} exceeds the number of inputs m = {m}"
            )));
        }
        Ok(SparsityLevel(s))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    ViolatesConditionI,
    ViolatesConditionIi,
}

/// A left eigenpair `(λ, z)` witnessing that some halfspace (kind ii) or
/// hyperplane complement (kind i) cannot be reached from the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub lambda: Complex64,
    /// Normalized so that the largest entry has modulus one.
    pub z: Vec<Complex64>,
    #[serde(default)]
    pub residual_eig: f64,
    /// Kind i: `‖z^T B‖_inf`. Kind ii: `max_j (z^T B)_j`.
    #[serde(default)]
    pub max_zb: f64,
}

impl Certificate {
    /// Real part of `z`; for kind-ii certificates this is `z` itself.
    pub fn z_real(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.re).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenConditionOutcome {
    pub passed: bool,
    pub certificate: Option<Certificate>,
    /// Further violating eigenvalues besides the certified one.
    pub other_violations: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityOutcome {
    pub passed: bool,
    pub s: usize,
    pub n: usize,
    pub rank_a: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Controllable,
    Uncontrollable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRow {
    pub lambda: Complex64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub real_nonnegative: bool,
    /// Nonzero when several computed eigenvalues were merged into this one.
    pub cluster_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub condition_i: Option<EigenConditionOutcome>,
    pub condition_ii: Option<EigenConditionOutcome>,
    pub condition_iii: Option<SparsityOutcome>,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
    pub eigenvalues: Vec<EigenvalueRow>,
}

impl ControllabilityReport {
    pub fn is_controllable(&self) -> bool {
        self.verdict == Verdict::Controllable
    }

    /// First certificate carried by the report (condition i before ii).
    pub fn certificate(&self) -> Option<&Certificate> {
        self.condition_i
            .iter()
            .chain(self.condition_ii.iter())
            .find_map(|c| c.certificate.as_ref())
    }

    fn assemble(
        eig: &LeftEigenSystem,
        tol: &Tolerances,
        condition_i: Option<EigenConditionOutcome>,
        condition_ii: Option<EigenConditionOutcome>,
        condition_iii: Option<SparsityOutcome>,
    ) -> Self {
        let passed = condition_i.as_ref().is_none_or(|c| c.passed)
            && condition_ii.as_ref().is_none_or(|c| c.passed)
            && condition_iii.as_ref().is_none_or(|c| c.passed);
        ControllabilityReport {
            condition_i,
            condition_ii,
            condition_iii,
            verdict: if passed {
                Verdict::Controllable
            } else {
                Verdict::Uncontrollable
            },
            tolerances: *tol,
            eigenvalues: eigen_table(eig, tol),
        }
    }
}

fn eigen_table(eig: &LeftEigenSystem, tol: &Tolerances) -> Vec<EigenvalueRow> {
    eig.groups
        .iter()
        .map(|g| EigenvalueRow {
            lambda: g.lambda,
            algebraic_multiplicity: g.algebraic_multiplicity,
            geometric_multiplicity: g.geometric_multiplicity(),
            real_nonnegative: g.is_real_nonnegative(tol),
            cluster_spread: g.spread,
        })
        .collect()
}

fn zb_product(b: &Mat, z: &[Complex64]) -> Vec<Complex64> {
    (0..b.ncols())
        .map(|j| z.iter().enumerate().map(|(i, zi)| zi * b[(i, j)]).sum())
        .collect()
}

/// Scales `z` so its largest-modulus entry equals one.
fn normalize_complex(z: &[Complex64]) -> Vec<Complex64> {
    let pivot = z.iter().cloned().fold(Complex64::new(0.0, 0.0), |best, c| {
        if c.norm() > best.norm() {
            c
        } else {
            best
        }
    });
    if pivot.norm() == 0.0 {
        return z.to_vec();
    }
    z.iter().map(|c| c / pivot).collect()
}

/// Scales `z` by a positive factor so that `‖z‖_inf = 1`.
fn normalize_positive(z: &[f64]) -> Vec<f64> {
    let scale = z.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return z.to_vec();
    }
    z.iter().map(|v| v / scale).collect()
}

/// Picks the violation with the largest `|λ|`; the rest are listed.
fn summarize(mut violations: Vec<Certificate>) -> EigenConditionOutcome {
    if violations.is_empty() {
        return EigenConditionOutcome {
            passed: true,
            certificate: None,
            other_violations: Vec::new(),
        };
    }
    let mut best = 0;
    for (i, c) in violations.iter().enumerate() {
        if c.lambda.norm() > violations[best].lambda.norm() {
            best = i;
        }
    }
    let cert = violations.remove(best);
    EigenConditionOutcome {
        passed: false,
        certificate: Some(cert),
        other_violations: violations.into_iter().map(|c| c.lambda).collect(),
    }
}

fn condition_i_for_group(
    sys: &SystemPair,
    group: &EigenGroup,
    tol: &Tolerances,
) -> Result<Option<Certificate>> {
    let n = sys.n();
    let pbh = pbh_matrix(&sys.a, &sys.b, group.lambda);
    // z^T [λI - A | B] = 0  <=>  [λI - A | B]^T z = 0
    let stacked: CMat = pbh.transpose();
    let null = complex_null_space_basis(&stacked, tol)?;
    if null.ncols() == 0 {
        return Ok(None);
    }
    let mut z = normalize_complex(&null.column(0).iter().cloned().collect::<Vec<_>>());
    if group.is_real() {
        for c in z.iter_mut() {
            c.im = 0.0;
        }
    }
    debug_assert_eq!(z.len(), n);
    let zb = zb_product(&sys.b, &z);
    Ok(Some(Certificate {
        kind: CertificateKind::ViolatesConditionI,
        lambda: group.lambda,
        residual_eig: left_eig_residual(&sys.a, &z, group.lambda),
        max_zb: zb.iter().map(|c| c.norm()).fold(0.0, f64::max),
        z,
    }))
}

fn condition_i_with(
    sys: &SystemPair,
    eig: &LeftEigenSystem,
    tol: &Tolerances,
) -> Result<EigenConditionOutcome> {
    let mut violations = Vec::new();
    for group in &eig.groups {
        if let Some(cert) = condition_i_for_group(sys, group, tol)? {
            violations.push(cert);
        }
    }
    Ok(summarize(violations))
}

fn condition_ii_with(
    sys: &SystemPair,
    eig: &LeftEigenSystem,
    tol: &Tolerances,
) -> Result<EigenConditionOutcome> {
    let mut violations = Vec::new();
    for group in eig.groups.iter().filter(|g| g.is_real_nonnegative(tol)) {
        let basis = group
            .real_left_basis()
            .ok_or_else(|| Error::numeric("real eigenvalue group without a real basis"))?;
        let constraint = sys.b.transpose() * &basis;
        let Some(witness) = homogeneous_nonzero(&constraint, tol)? else {
            continue;
        };
        let z = &basis * DVector::from_column_slice(&witness.rho);
        let z = normalize_positive(z.as_slice());
        let zc: Vec<Complex64> = z.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let zb = zb_product(&sys.b, &zc);
        violations.push(Certificate {
            kind: CertificateKind::ViolatesConditionIi,
            lambda: group.lambda,
            residual_eig: left_eig_residual(&sys.a, &zc, group.lambda),
            max_zb: zb.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max),
            z: zc,
        });
    }
    Ok(summarize(violations))
}

/// Condition (i): `rank [λI - A | B] = N` for every eigenvalue `λ` of `A`.
pub fn check_condition_i(sys: &SystemPair, tol: &Tolerances) -> Result<EigenConditionOutcome> {
    tol.validate()?;
    let eig = left_eigensystem(&sys.a, tol)?;
    condition_i_with(sys, &eig, tol)
}

/// Condition (ii): for each real eigenvalue `λ >= 0` with left eigenbasis `Z`,
/// the cone `{ρ : B^T Z ρ <= 0}` is trivial. Passes vacuously when there is
/// no such eigenvalue.
pub fn check_condition_ii(sys: &SystemPair, tol: &Tolerances) -> Result<EigenConditionOutcome> {
    tol.validate()?;
    let eig = left_eigensystem(&sys.a, tol)?;
    condition_ii_with(sys, &eig, tol)
}

/// Condition (iii): `s >= N - rank(A)`.
pub fn check_condition_iii(
    sys: &SystemPair,
    s: SparsityLevel,
    tol: &Tolerances,
) -> Result<SparsityOutcome> {
    tol.validate()?;
    let s = SparsityLevel::new(s.get(), sys.m())?.get();
    let rank_a = rank(&sys.a, tol)?;
    Ok(SparsityOutcome {
        passed: s + rank_a >= sys.n(),
        s,
        n: sys.n(),
        rank_a,
    })
}

/// Nonnegative `s`-sparse controllability: conditions (i), (ii) and (iii).
pub fn check_nonneg_sparse(
    sys: &SystemPair,
    s: SparsityLevel,
    tol: &Tolerances,
) -> Result<ControllabilityReport> {
    let iii = check_condition_iii(sys, s, tol)?;
    let eig = left_eigensystem(&sys.a, tol)?;
    let i = condition_i_with(sys, &eig, tol)?;
    let ii = condition_ii_with(sys, &eig, tol)?;
    Ok(ControllabilityReport::assemble(
        &eig,
        tol,
        Some(i),
        Some(ii),
        Some(iii),
    ))
}

/// Nonnegative (unrestricted-support) controllability: conditions (i) and (ii).
pub fn check_nonneg(sys: &SystemPair, tol: &Tolerances) -> Result<ControllabilityReport> {
    tol.validate()?;
    let eig = left_eigensystem(&sys.a, tol)?;
    let i = condition_i_with(sys, &eig, tol)?;
    let ii = condition_ii_with(sys, &eig, tol)?;
    Ok(ControllabilityReport::assemble(
        &eig,
        tol,
        Some(i),
        Some(ii),
        None,
    ))
}

/// `s`-sparse (sign-unrestricted) controllability: conditions (i) and (iii).
pub fn check_sparse(
    sys: &SystemPair,
    s: SparsityLevel,
    tol: &Tolerances,
) -> Result<ControllabilityReport> {
    let iii = check_condition_iii(sys, s, tol)?;
    let eig = left_eigensystem(&sys.a, tol)?;
    let i = condition_i_with(sys, &eig, tol)?;
    Ok(ControllabilityReport::assemble(
        &eig,
        tol,
        Some(i),
        None,
        Some(iii),
    ))
}

/// Smallest `s` for which the system is nonnegative `s`-sparse controllable,
/// or `None` when it is not nonnegative controllable at all.
pub fn min_sparsity(sys: &SystemPair, tol: &Tolerances) -> Result<Option<usize>> {
    if !check_nonneg(sys, tol)?.is_controllable() {
        return Ok(None);
    }
    let deficiency = sys.n() - rank(&sys.a, tol)?;
    if deficiency > sys.m() {
        return Err(Error::NoFeasibleSparsity {
            deficiency,
            inputs: sys.m(),
        });
    }
    Ok(Some(deficiency.max(1)))
}

/// Checks that a nonnegative controllable system stays controllable with
/// `s = max(1, m - 1)`. Returns `true` vacuously otherwise.
pub fn corollary_bound_check(sys: &SystemPair, tol: &Tolerances) -> Result<bool> {
    if !check_nonneg(sys, tol)?.is_controllable() {
        return Ok(true);
    }
    let s = SparsityLevel::new(sys.m().saturating_sub(1).max(1), sys.m())?;
    Ok(check_nonneg_sparse(sys, s, tol)?.is_controllable())
}

/// Result of re-checking a certificate against a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub residual_eig: f64,
    pub residual_bound: f64,
    pub max_zb: f64,
    pub failures: Vec<String>,
}

/// Re-evaluates the certificate invariants from scratch. `z` is normalized
/// first (by a positive factor for kind ii), so certificates need not be scaled.
pub fn verify_certificate(
    sys: &SystemPair,
    cert: &Certificate,
    tol: &Tolerances,
) -> CertificateCheck {
    let mut failures = Vec::new();
    let n = sys.n();
    if cert.z.len() != n {
        return CertificateCheck {
            valid: false,
            residual_eig: f64::INFINITY,
            residual_bound: 0.0,
            max_zb: f64::INFINITY,
            failures: vec![format!("z has length {} but N = {n}", cert.z.len())],
        };
    }
    if cert.z.iter().all(|c| c.norm() == 0.0)
        || cert
            .z
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return CertificateCheck {
            valid: false,
            residual_eig: f64::INFINITY,
            residual_bound: 0.0,
            max_zb: f64::INFINITY,
            failures: vec!["z must be a finite nonzero vector".into()],
        };
    }
    let z: Vec<Complex64> = match cert.kind {
        CertificateKind::ViolatesConditionI => normalize_complex(&cert.z),
        CertificateKind::ViolatesConditionIi => {
            let scale = cert.z.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
            cert.z.iter().map(|c| c / scale).collect()
        }
    };
    let residual_eig = left_eig_residual(&sys.a, &z, cert.lambda);
    let z_norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let residual_bound = EIG_RESIDUAL_RTOL * sys.a.norm().max(1.0) * z_norm;
    if residual_eig > residual_bound {
        failures.push(format!(
            "z^T A - lambda z^T has norm {residual_eig:e}, above {residual_bound:e}"
        ));
    }
    let zb = zb_product(&sys.b, &z);
    let max_zb = match cert.kind {
        CertificateKind::ViolatesConditionI => {
            let m = zb.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if m > tol.ineq_tol {
                failures.push(format!("z^T B is not zero: max modulus {m:e}"));
            }
            m
        }
        CertificateKind::ViolatesConditionIi => {
            if cert.lambda.im.abs() > tol.eig_imag_tol || cert.lambda.re < -tol.eig_imag_tol {
                failures.push(format!(
                    "lambda = {} is not a real nonnegative number",
                    cert.lambda
                ));
            }
            if z.iter().any(|c| c.im.abs() > tol.eig_imag_tol) {
                failures.push("z must be real for a condition (ii) certificate".into());
            }
            let m = zb.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
            if m > tol.ineq_tol {
                failures.push(format!("z^T B has a positive entry: {m:e}"));
            }
            m
        }
    };
    CertificateCheck {
        valid: failures.is_empty(),
        residual_eig,
        residual_bound,
        max_zb,
        failures,
    }
}

/// The system `(A, B Φ)` obtained by expressing inputs in the basis `Φ`.
pub fn apply_input_basis(sys: &SystemPair, phi: &Mat) -> Result<SystemPair> {
    if phi.nrows() != sys.m() || phi.ncols() != sys.m() {
        return Err(Error::input(format!(
            "input basis must be {m}x{m}, got {}x{}",
            phi.nrows(),
            phi.ncols(),
            m = sys.m()
        )));
    }
    ensure_finite(phi, "Phi")?;
    SystemPair::new(sys.a.clone(), &sys.b * phi)
}
