use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparsectl::control::{
    apply_input_basis, check_nonneg, check_nonneg_sparse, corollary_bound_check, min_sparsity,
    verify_certificate, CertificateCheck, ControllabilityReport, SparsityLevel, SystemPair,
    Verdict,
};
use sparsectl::jordan::{
    build_decomposition, verify_decomposition, DecompositionReport, ZeroStructure,
};
use sparsectl::matrix::rank;
use sparsectl::oracle::{coverage_probe, OracleConfig, OracleVerdict};
use sparsectl::{Error, Tolerances};

use crate::generate::{generate_system, GeneratorKind};
use crate::system::{
    parse_certificate, parse_input_basis, parse_system_text, read_input, rows_of, SystemFile,
};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Check {
        s: Option<usize>,
    },
    MinSparsity,
    Oracle {
        s: Option<usize>,
        k_max: usize,
        samples: usize,
        seed: u64,
    },
    Decompose,
    VerifyCert {
        cert: PathBuf,
    },
    Gen {
        kind: GeneratorKind,
        n: usize,
        m: usize,
        seed: u64,
        deficiency: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::MinSparsity => "min-sparsity",
            Command::Oracle { .. } => "oracle",
            Command::Decompose => "decompose",
            Command::VerifyCert { .. } => "verify-cert",
            Command::Gen { .. } => "gen",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options {
    /// System file; required by every command except `gen`.
    pub input: Option<PathBuf>,
    /// Optional `{"Phi": ...}` file; the system is analysed with inputs `B Phi`.
    pub input_basis: Option<PathBuf>,
    pub tol: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    pub s: Option<usize>,
    pub input_basis_applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinSparsityReport {
    pub nonneg_controllable: bool,
    pub n: usize,
    pub m: usize,
    pub rank_a: usize,
    pub min_sparsity: Option<usize>,
    /// Controllable at `s = max(1, m - 1)` whenever nonnegative controllable.
    pub corollary_bound_holds: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub s: usize,
    pub config: OracleConfig,
    pub verdict: OracleVerdict,
    pub theorem_verdict: Verdict,
    /// False only if the oracle covered every probe of an uncontrollable system.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeReport {
    pub structure: ZeroStructure,
    pub p: Vec<Vec<f64>>,
    pub j: Vec<Vec<f64>>,
    pub p0: Vec<Vec<f64>>,
    pub verification: DecompositionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 of the input file (or of the generated system for `gen`).
    pub input_digest: String,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<ControllabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_sparsity: Option<MinSparsityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecomposeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_check: Option<CertificateCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated: Option<SystemFile>,
    pub wall_time_ms: f64,
}

impl RunReport {
    fn new(command: &Command, digest: String, tol: Tolerances) -> Self {
        RunReport {
            tool: "sparsectl".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.name().into(),
            input_digest: digest,
            tolerances: tol,
            system: None,
            check: None,
            min_sparsity: None,
            oracle: None,
            decomposition: None,
            certificate_check: None,
            generated: None,
            wall_time_ms: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn sparsity(s: Option<usize>, sys: &SystemPair) -> Result<Option<SparsityLevel>, CliError> {
    s.map(|s| SparsityLevel::new(s, sys.m()).map_err(CliError::from))
        .transpose()
}

fn load(opts: &Options) -> Result<(SystemFile, SystemPair, String, bool), CliError> {
    let path = opts
        .input
        .as_ref()
        .ok_or_else(|| CliError::Input("an input system file is required".into()))?;
    let text = read_input(path)?;
    let parsed = parse_system_text(&text)?;
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let mut sys = parsed.sys;
    let applied = match &opts.input_basis {
        Some(p) => {
            let basis_text = read_input(p)?;
            hasher.update(basis_text.as_bytes());
            sys = apply_input_basis(&sys, &parse_input_basis(&basis_text)?)?;
            true
        }
        None => false,
    };
    let hex = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok((parsed.file, sys, hex, applied))
}

/// Runs one command. Verdicts never produce an error; only invalid input
/// or numerical failure do.
pub fn run_command(cmd: &Command, opts: &Options) -> Result<RunReport, CliError> {
    let start = Instant::now();
    opts.tol.validate()?;
    let tol = &opts.tol;
    if let Command::Gen {
        kind,
        n,
        m,
        seed,
        deficiency,
    } = cmd
    {
        let file = generate_system(*kind, *n, *m, *seed, *deficiency)?;
        let text = serde_json::to_string(&file).expect("system serializes");
        let mut report = RunReport::new(cmd, digest(text.as_bytes()), *tol);
        report.generated = Some(file);
        report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok(report);
    }

    let (file, sys, hex, applied) = load(opts)?;
    let mut report = RunReport::new(cmd, hex, *tol);
    let explicit_s = match cmd {
        Command::Check { s } | Command::Oracle { s, .. } => *s,
        _ => None,
    };
    if explicit_s == Some(0) {
        return Err(CliError::Input(
            "sparsity level s must be at least 1".into(),
        ));
    }
    let s = explicit_s.or(file.s);
    report.system = Some(SystemSummary {
        name: file.name.clone(),
        n: sys.n(),
        m: sys.m(),
        s,
        input_basis_applied: applied,
    });
    match cmd {
        Command::Check { .. } => {
            report.check = Some(match sparsity(s, &sys)? {
                Some(level) => check_nonneg_sparse(&sys, level, tol)?,
                None => check_nonneg(&sys, tol)?,
            });
        }
        Command::MinSparsity => {
            let nonneg = check_nonneg(&sys, tol)?.is_controllable();
            let rank_a = rank(sys.a(), tol)?;
            let (value, note) = match min_sparsity(&sys, tol) {
                Ok(v) => (v, None),
                Err(e @ Error::NoFeasibleSparsity { .. }) => (None, Some(e.to_string())),
                Err(e) => return Err(e.into()),
            };
            report.min_sparsity = Some(MinSparsityReport {
                nonneg_controllable: nonneg,
                n: sys.n(),
                m: sys.m(),
                rank_a,
                min_sparsity: value,
                corollary_bound_holds: corollary_bound_check(&sys, tol)?,
                note,
            });
        }
        Command::Oracle {
            k_max,
            samples,
            seed,
            ..
        } => {
            let level = sparsity(s, &sys)?.unwrap_or(SparsityLevel::new(sys.m(), sys.m())?);
            let config = OracleConfig {
                k_max: *k_max,
                n_directions: *samples,
                seed: *seed,
                include_axes: true,
            };
            let verdict = coverage_probe(&sys, level, &config, tol)?;
            let theorem_verdict = check_nonneg_sparse(&sys, level, tol)?.verdict;
            let consistent = !(verdict.is_covered() && theorem_verdict == Verdict::Uncontrollable);
            report.oracle = Some(OracleReport {
                s: level.get(),
                config,
                verdict,
                theorem_verdict,
                consistent,
            });
        }
        Command::Decompose => {
            let dec = build_decomposition(sys.a(), tol)?;
            let verification = verify_decomposition(sys.a(), &dec, tol)?;
            report.decomposition = Some(DecomposeReport {
                structure: dec.structure.clone(),
                p: rows_of(&dec.p),
                j: rows_of(&dec.j),
                p0: rows_of(&dec.p0),
                verification,
            });
        }
        Command::VerifyCert { cert } => {
            let cert = parse_certificate(&read_input(cert)?)?;
            if cert.z.len() != sys.n() {
                return Err(CliError::Input(format!(
                    "certificate has length {} but the state dimension is {}",
                    cert.z.len(),
                    sys.n()
                )));
            }
            report.certificate_check = Some(verify_certificate(&sys, &cert, tol));
        }
        Command::Gen { .. } => unreachable!("handled above"),
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
