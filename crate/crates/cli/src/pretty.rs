use std::fmt::Write;

use num_complex::Complex64;
use sparsectl::control::{EigenConditionOutcome, Verdict};
use sparsectl::oracle::OracleOutcome;

use crate::run::RunReport;

fn fmt_c(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{:.6}", c.re)
    } else {
        format!("{:.6}{:+.6}i", c.re, c.im)
    }
}

fn fmt_vec(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|&c| fmt_c(c)).collect();
    format!("[{}]", parts.join(", "))
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Controllable => "controllable",
        Verdict::Uncontrollable => "UNCONTROLLABLE",
    }
}

fn condition(out: &mut String, label: &str, c: &Option<EigenConditionOutcome>) {
    match c {
        None => {}
        Some(c) if c.passed => writeln!(out, "  {label:<14} pass").unwrap(),
        Some(c) => {
            write!(out, "  {label:<14} FAIL").unwrap();
            if let Some(cert) = &c.certificate {
                write!(
                    out,
                    "  lambda={}  z={}",
                    fmt_c(cert.lambda),
                    fmt_vec(&cert.z)
                )
                .unwrap();
            }
            if !c.other_violations.is_empty() {
                let others: Vec<String> = c.other_violations.iter().map(|&l| fmt_c(l)).collect();
                write!(out, "  (also {})", others.join(", ")).unwrap();
            }
            out.push('\n');
        }
    }
}

/// Human-readable summary of a report.
pub fn render(report: &RunReport) -> String {
    let mut out = String::new();
    writeln!(out, "sparsectl {} {}", report.version, report.command).unwrap();
    if let Some(sys) = &report.system {
        writeln!(
            out,
            "  system         {}  N={} m={} s={}{}",
            sys.name.as_deref().unwrap_or("(unnamed)"),
            sys.n,
            sys.m,
            sys.s.map_or("-".to_string(), |s| s.to_string()),
            if sys.input_basis_applied {
                "  (inputs B*Phi)"
            } else {
                ""
            }
        )
        .unwrap();
    }
    if let Some(c) = &report.check {
        writeln!(out, "  verdict        {}", verdict(c.verdict)).unwrap();
        condition(&mut out, "condition i", &c.condition_i);
        condition(&mut out, "condition ii", &c.condition_ii);
        if let Some(iii) = &c.condition_iii {
            writeln!(
                out,
                "  {:<14} {}  s={} vs N-rank(A)={}",
                "condition iii",
                if iii.passed { "pass" } else { "FAIL" },
                iii.s,
                iii.n - iii.rank_a
            )
            .unwrap();
        }
        writeln!(
            out,
            "  {:<24} {:>4} {:>4} {:>8}",
            "eigenvalue", "alg", "geo", "real>=0"
        )
        .unwrap();
        for e in &c.eigenvalues {
            writeln!(
                out,
                "  {:<24} {:>4} {:>4} {:>8}",
                fmt_c(e.lambda),
                e.algebraic_multiplicity,
                e.geometric_multiplicity,
                if e.real_nonnegative { "yes" } else { "no" }
            )
            .unwrap();
        }
    }
    if let Some(ms) = &report.min_sparsity {
        writeln!(
            out,
            "  nonneg ctrl    {}\n  rank(A)        {} of {}\n  min sparsity   {}",
            ms.nonneg_controllable,
            ms.rank_a,
            ms.n,
            ms.min_sparsity
                .map_or("none".to_string(), |s| s.to_string())
        )
        .unwrap();
    }
    if let Some(o) = &report.oracle {
        let outcome = match o.verdict.outcome {
            OracleOutcome::CoveredAt(k) => format!("covered at K={k}"),
            OracleOutcome::Uncovered => format!(
                "{} direction(s) uncovered up to K={} (inconclusive alone)",
                o.verdict.uncovered_directions.len(),
                o.verdict.k_used
            ),
        };
        writeln!(
            out,
            "  oracle         {outcome}, {} LPs",
            o.verdict.lp_count
        )
        .unwrap();
        writeln!(out, "  theorem        {}", verdict(o.theorem_verdict)).unwrap();
        if !o.consistent {
            writeln!(
                out,
                "  WARNING        oracle covered an uncontrollable system"
            )
            .unwrap();
        }
    }
    if let Some(d) = &report.decomposition {
        let st = &d.structure;
        writeln!(
            out,
            "  structure      n={} q={} blocks={:?}",
            st.n, st.q, st.block_counts
        )
        .unwrap();
        for c in &d.verification.checks {
            writeln!(
                out,
                "  {:<26} {}  {:.2e}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.residual
            )
            .unwrap();
        }
    }
    if let Some(c) = &report.certificate_check {
        writeln!(
            out,
            "  certificate    {}  residual={:.2e} max(z^T B)={:.2e}",
            if c.valid { "valid" } else { "INVALID" },
            c.residual_eig,
            c.max_zb
        )
        .unwrap();
        for f in &c.failures {
            writeln!(out, "    {f}").unwrap();
        }
    }
    if let Some(g) = &report.generated {
        writeln!(
            out,
            "  generated      {}  N={} m={}",
            g.name.as_deref().unwrap_or("(unnamed)"),
            g.a.len(),
            g.b.first().map_or(0, |r| r.len())
        )
        .unwrap();
    }
    writeln!(out, "  wall time      {:.1} ms", report.wall_time_ms).unwrap();
    out
}
