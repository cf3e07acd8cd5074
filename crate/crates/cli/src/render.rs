//! Report documents. Each has a plain-text rendering for people and a JSON
//! twin (`--format machine`) that keeps every interval exact.

use std::fmt::Write as _;

use dioph::analysis::{ChainReport, Status, Verdict};
use dioph::extension::{CriterionEntry, ExtensionReport, MonteCarloReport, Provenance, Regime};
use dioph::realnum::DyadicInterval;
use dioph::{BAChain, BestApprox};
use serde::{Deserialize, Serialize};

use crate::expr::GRAMMAR_VERSION;

pub const REPORT_MAGIC: &str = "dioph-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDoc {
    pub grammar: u32,
    pub r: usize,
    pub alphas: Vec<String>,
    pub precision_cap: u32,
    pub search_bound: u64,
    pub precision_used: u32,
    pub records: Vec<BestApprox>,
}

impl ChainDoc {
    pub fn new(chain: &BAChain) -> Self {
        ChainDoc {
            grammar: GRAMMAR_VERSION,
            r: chain.r(),
            alphas: chain.form().alphas().iter().map(|a| a.to_string()).collect(),
            precision_cap: chain.form().precision().cap_bits,
            search_bound: chain.search_bound(),
            precision_used: chain.precision_used(),
            records: chain.records().to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub alphas: Vec<String>,
    pub search_bound: u64,
    pub checks: Vec<String>,
    pub report: ChainReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Document {
    Chain(ChainDoc),
    Verify(VerifyDoc),
    Extension(ExtensionReport),
    MonteCarlo(MonteCarloReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub format: String,
    pub version: u32,
    pub document: Document,
}

#[derive(Debug, thiserror::Error)]
pub enum ReadReportError {
    #[error("malformed report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a {REPORT_MAGIC} version {REPORT_VERSION} document")]
    Version,
}

pub fn machine(doc: &Document) -> String {
    let env = Envelope {
        format: REPORT_MAGIC.into(),
        version: REPORT_VERSION,
        document: doc.clone(),
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
    s.push('\n');
    s
}

pub fn read_machine(text: &str) -> Result<Document, ReadReportError> {
    let env: Envelope = serde_json::from_str(text)?;
    if env.format != REPORT_MAGIC || env.version != REPORT_VERSION {
        return Err(ReadReportError::Version);
    }
    Ok(env.document)
}

pub fn text(doc: &Document) -> String {
    let mut out = String::new();
    match doc {
        Document::Chain(c) => chain_text(&mut out, c),
        Document::Verify(v) => verify_text(&mut out, v),
        Document::Extension(e) => {
            let _ = writeln!(out, "{REPORT_MAGIC} {REPORT_VERSION} extension");
            extension_text(&mut out, e);
        }
        Document::MonteCarlo(m) => monte_carlo_text(&mut out, m),
    }
    out
}

fn approx(iv: &DyadicInterval) -> String {
    let (lo, hi) = iv.to_f64_pair();
    let (a, b) = (format!("{lo:.9e}"), format!("{hi:.9e}"));
    if a == b {
        a
    } else {
        format!("[{a}, {b}]")
    }
}

fn vector(v: &dioph::IntVector) -> String {
    let parts: Vec<String> = v.coords().iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(", "))
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "FAIL",
        Status::Skipped => "skipped",
        Status::Undecided => "undecided",
    }
}

fn verdict_line(out: &mut String, v: &Verdict) {
    let _ = write!(out, "  {:<15} {:<9}", v.check, status_word(v.status));
    if let Some(w) = v.witness {
        let _ = write!(out, "  witness nu={w}");
    }
    if let Some(t) = &v.tightest {
        let _ = write!(out, "  tightest nu={} value {} bound {}", t.nu, approx(&t.value), approx(&t.bound));
    }
    if !v.skipped.is_empty() {
        let s: Vec<String> = v.skipped.iter().map(|n| n.to_string()).collect();
        let _ = write!(out, "  skipped nu={}", s.join(","));
    }
    if let Some(n) = &v.note {
        let _ = write!(out, "  ({n})");
    }
    out.push('\n');
}

fn chain_text(out: &mut String, c: &ChainDoc) {
    let _ = writeln!(out, "chain r={} records={} search-bound={}", c.r, c.records.len(), c.search_bound);
    for (j, a) in c.alphas.iter().enumerate() {
        let _ = writeln!(out, "  alpha_{} = {a}", j + 1);
    }
    let _ = writeln!(out, "  precision cap {} bits, used {} bits", c.precision_cap, c.precision_used);
    let _ = writeln!(out, "{:>5} {:>10}  {:<24} zeta", "nu", "M", "m");
    for rec in &c.records {
        let _ = writeln!(out, "{:>5} {:>10}  {:<24} {}", rec.index, rec.norm, vector(&rec.m), approx(&rec.zeta));
    }
}

fn verify_text(out: &mut String, d: &VerifyDoc) {
    let rep = &d.report;
    let _ = writeln!(out, "{REPORT_MAGIC} {REPORT_VERSION} verify");
    let _ = writeln!(out, "r {}", rep.r);
    for a in &d.alphas {
        let _ = writeln!(out, "alpha {a}");
    }
    let _ = writeln!(out, "records {}", rep.records);
    let _ = writeln!(out, "search-bound {}", d.search_bound);
    let _ = writeln!(out, "checks {}", d.checks.join(","));
    let _ = writeln!(out, "log {}", rep.log_base);
    out.push_str("\nverdicts\n");
    for v in &rep.verdicts {
        verdict_line(out, v);
    }
    if !rep.determinants.is_empty() {
        out.push_str("\ndeterminants\n");
        for e in &rep.determinants {
            let _ = writeln!(out, "  nu={:<5} Delta={}", e.nu, e.value);
        }
    }
    if !rep.ranks.is_empty() {
        out.push_str("\ntail ranks\n");
        for e in &rep.ranks {
            let _ = writeln!(out, "  nu0={:<5} rank={}", e.nu0, e.rank);
        }
    }
    if let Some(k) = rep.series_k {
        let _ = writeln!(out, "\nseries k={k}");
        for s in &rep.series {
            let _ = writeln!(out, "  N={:<5} term {}  S_N {}", s.n, approx(&s.term), approx(&s.sum));
        }
    }
    if !rep.warnings.is_empty() {
        out.push_str("\nwarnings\n");
        for w in &rep.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    let failed = rep.theorem_failures();
    if failed.is_empty() {
        out.push_str("\nresult: no theorem check failed\n");
    } else {
        let names: Vec<&str> = failed.iter().map(|v| v.check.as_str()).collect();
        let _ = writeln!(out, "\nresult: FAILED {}", names.join(","));
    }
}

fn criterion_line(out: &mut String, c: &CriterionEntry) {
    match (&c.verdict, &c.error) {
        (Some(v), _) => {
            let _ = write!(out, "  nu={:<4} M_next={:<8} {:<6} scanned={}", c.nu, v.bound, if v.holds { "holds" } else { "fails" }, v.scanned);
            if let Some(w) = &v.witness {
                let _ = write!(out, "  witness {} residual {}", vector(&w.m), approx(&w.residual));
            }
            out.push('\n');
        }
        (None, Some(e)) => {
            let _ = writeln!(out, "  nu={:<4} error: {e}", c.nu);
        }
        (None, None) => {
            let _ = writeln!(out, "  nu={:<4} not evaluated", c.nu);
        }
    }
}

fn extension_text(out: &mut String, e: &ExtensionReport) {
    let _ = writeln!(out, "r {} k {} max-norm {}", e.r, e.k, e.max_norm);
    for (i, b) in e.betas.iter().enumerate() {
        let _ = writeln!(out, "beta_{} = {b}", i + 1);
    }
    match &e.provenance {
        Provenance::Explicit => out.push_str("provenance explicit\n"),
        Provenance::Seeded { seed, stream, recipe } => {
            let parts: Vec<String> = recipe
                .iter()
                .map(|r| format!("frac({} * root({}, 2))", r.u, r.p))
                .collect();
            let _ = writeln!(out, "provenance seed={seed} stream={stream} {}", parts.join(", "));
        }
    }
    out.push_str("padded base records\n");
    for p in &e.padded {
        let _ = writeln!(out, "  nu={:<4} {:<28} {}", p.nu, vector(&p.m), if p.present { "present" } else { "absent" });
    }
    let _ = writeln!(out, "extended chain: {} records, {} with a nonzero beta part", e.extended.len(), e.extras.len());
    for rec in &e.extended {
        let _ = writeln!(out, "  {:>4} M={:<8} {:<28} {}", rec.index, rec.norm, vector(&rec.m), approx(&rec.zeta));
    }
    match e.agreement_from {
        Some(nu) => {
            let _ = writeln!(out, "agreement from nu={nu}");
        }
        None => out.push_str("agreement none\n"),
    }
    out.push_str("criterion\n");
    for c in &e.criteria {
        criterion_line(out, c);
    }
    out.push_str("omega\n");
    for o in &e.omega {
        let _ = writeln!(
            out,
            "  nu={:<4} M_next={:<8} lattice {}  bound {}",
            o.nu,
            o.omega.m_next,
            approx(&o.omega.lattice.enclosure(64)),
            approx(&o.omega.bound)
        );
    }
    let _ = writeln!(out, "consistent {}", if e.consistent { "yes" } else { "NO" });
    let regime = match e.regime {
        Regime::Decaying => "decaying",
        Regime::NotDecaying => "not decaying",
        Regime::Undetermined => "undetermined",
    };
    let _ = writeln!(out, "series regime {regime}");
    for w in &e.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
}

fn monte_carlo_text(out: &mut String, m: &MonteCarloReport) {
    let _ = writeln!(out, "{REPORT_MAGIC} {REPORT_VERSION} monte-carlo");
    let _ = writeln!(out, "seed {} samples {} k {} max-norm {}", m.seed, m.samples, m.k, m.max_norm);
    out.push_str("per index\n");
    for row in &m.rows {
        let tail = row.omega_tail.as_ref().map_or("-".to_string(), approx);
        let _ = writeln!(
            out,
            "  nu={:<4} matched {}/{}  criterion {}/{}  omega tail {tail}",
            row.nu, row.matched, m.samples, row.criterion_passed, m.samples
        );
    }
    let _ = writeln!(out, "inconsistent samples {}", m.inconsistent);
    for (i, rep) in m.reports.iter().enumerate() {
        let _ = writeln!(out, "\n-- sample {i}");
        extension_text(out, rep);
    }
}
