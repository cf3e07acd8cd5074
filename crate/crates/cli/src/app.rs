//! Argument definitions and the four commands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dioph::analysis::THEOREM_CHECKS;
use dioph::extension::{compare_extended_with, monte_carlo, DEFAULT_SCAN_BUDGET};
use dioph::realnum::{Precision, DEFAULT_PRECISION_CAP};
use dioph::{
    analyze, enumerate_chain, BAChain, BetaSample, Error, ExtendOptions, LinearForm, PsiSpec, RealExpr,
    ReportOptions,
};

use crate::config::ExperimentConfig;
use crate::expr::{parse_expr, ExprError};
use crate::record::{read_chain, write_chain, CHAIN_MAGIC};
use crate::render::{self, ChainDoc, Document, VerifyDoc, REPORT_MAGIC};

/// Process exit statuses. Scripts may rely on these values.
pub mod exit {
    pub const OK: i32 = 0;
    /// A theorem check failed, or an extension report is inconsistent.
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DEPENDENCE: i32 = 3;
    pub const PRECISION: i32 = 4;
    /// Search volume over `--budget`.
    pub const BUDGET: i32 = 5;
    pub const PARSE_IO: i32 = 6;
}

#[derive(Parser, Debug)]
#[command(name = "dioph", version, about = "Best approximations of linear forms, checked in exact arithmetic")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Largest working precision in bits.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(8..))]
    pub precision_cap: Option<u32>,
    /// Largest number of candidate vectors one search may visit.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the chain of best approximations and write it as a chain file.
    Enumerate(EnumerateArgs),
    /// Run the chain checks on a chain file.
    Verify(VerifyArgs),
    /// Add k coefficients beta and compare the padded chain with the extended one.
    Extend(ExtendArgs),
    /// Pretty-print a chain file or a machine report.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    /// One coefficient of the form; repeat r times.
    #[arg(long = "alpha", required = true)]
    pub alphas: Vec<String>,
    /// Largest tail max-norm to scan.
    #[arg(long)]
    pub max_norm: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Monotonic,
    Minkowski,
    Growth,
    Determinants,
    Polytope,
    Unimodular,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Monotonic => "monotonic",
            Check::Minkowski => "minkowski",
            Check::Growth => "growth",
            Check::Determinants => "determinants",
            Check::Polytope => "polytope",
            Check::Unimodular => "unimodular",
        }
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Chain file or its JSON twin.
    pub chain: PathBuf,
    /// Checks to run (comma separated); all by default.
    #[arg(long = "check", value_enum, value_delimiter = ',')]
    pub checks: Vec<Check>,
    /// psi family for the singularity check, e.g. `corollary1:r=2,k=1,eps=1/10`.
    #[arg(long)]
    pub psi: Option<String>,
    /// Add the series partial sums for this k.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    /// Base chain file; may be omitted when the config lists alphas.
    pub chain: Option<PathBuf>,
    /// Number of extra coefficients; defaults to the number of betas.
    #[arg(long)]
    pub k: Option<usize>,
    /// Explicit extra coefficient; repeat k times.
    #[arg(long = "beta")]
    pub betas: Vec<String>,
    /// Number of seeded beta draws.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Printed to stderr when chosen at random.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to the search bound of the base chain.
    #[arg(long)]
    pub max_norm: Option<u64>,
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Chain file, machine report or text report.
    pub file: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Parse(_) | CliError::Io { .. } => exit::PARSE_IO,
            CliError::Core(e) => match e {
                Error::DependenceSuspected { .. } => exit::DEPENDENCE,
                Error::PrecisionExhausted { .. } | Error::AmbiguousRounding | Error::WidthTooLarge => {
                    exit::PRECISION
                }
                Error::SearchTooLarge { .. } => exit::BUDGET,
                Error::HypothesisUnmet(_) => exit::CHECK_FAILED,
                Error::DomainError(_) | Error::InvalidInput(_) | Error::ChainTooShort { .. } => exit::USAGE,
            },
        }
    }
}

/// What a successful command produced: the document, its exit status and
/// lines for standard error.
#[derive(Debug)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
    pub notes: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Enumerate(a) => enumerate(g, a),
        Command::Verify(a) => verify(g, a),
        Command::Extend(a) => extend(g, a),
        Command::Report(a) => report(g, a),
    }
}

fn emit(g: &Global, doc: &Document) -> String {
    match g.format {
        Format::Text => render::text(doc),
        Format::Machine => render::machine(doc),
    }
}

fn parse_all(flag: &str, srcs: &[String]) -> Result<Vec<RealExpr>, CliError> {
    srcs.iter()
        .map(|s| {
            parse_expr(s).map_err(|e| match e {
                ExprError::Value(e @ Error::PrecisionExhausted { .. }) => CliError::Core(e),
                e => CliError::Usage(format!("{flag} {s:?}: {e}")),
            })
        })
        .collect()
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn chain_from_doc(doc: &ChainDoc) -> Result<BAChain, CliError> {
    let bad = |e: String| CliError::Parse(format!("chain document: {e}"));
    let alphas = doc
        .alphas
        .iter()
        .map(|a| parse_expr(a).map_err(|e| bad(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if alphas.len() != doc.r {
        return Err(bad(format!("r = {} but {} alphas", doc.r, alphas.len())));
    }
    let form = LinearForm::new(alphas)
        .map_err(|e| bad(e.to_string()))?
        .with_precision(Precision::with_cap(doc.precision_cap));
    BAChain::new(form, doc.records.clone(), doc.search_bound, doc.precision_used).map_err(|e| bad(e.to_string()))
}

/// Reads a chain file or its JSON twin.
pub fn load_chain(path: &Path) -> Result<BAChain, CliError> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('{') {
        match render::read_machine(&text) {
            Ok(Document::Chain(doc)) => chain_from_doc(&doc),
            Ok(_) => Err(CliError::Parse(format!("{}: report is not a chain", path.display()))),
            Err(e) => Err(CliError::Parse(format!("{}: {e}", path.display()))),
        }
    } else {
        read_chain(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

fn with_cap(chain: BAChain, cap: Option<u32>) -> BAChain {
    match cap {
        Some(cap) => {
            let form = chain.form().clone().with_precision(Precision::with_cap(cap));
            BAChain::from_parts(form, chain.records().to_vec(), chain.search_bound(), chain.precision_used())
        }
        None => chain,
    }
}

/// Canonical tails scanned up to `max_norm`.
fn enumeration_volume(r: usize, max_norm: u64) -> u128 {
    let side = 2 * max_norm as u128 + 1;
    side.checked_pow(r as u32).unwrap_or(u128::MAX).saturating_sub(1) / 2
}

fn enumerate_form(alphas: Vec<RealExpr>, max_norm: u64, cap: Option<u32>, budget: Option<u64>) -> Result<BAChain, CliError> {
    let cap = cap.unwrap_or(DEFAULT_PRECISION_CAP);
    let form = LinearForm::new(alphas)?.with_precision(Precision::with_cap(cap));
    if let Some(budget) = budget {
        let volume = enumeration_volume(form.r(), max_norm);
        if volume > budget as u128 {
            return Err(Error::SearchTooLarge {
                volume,
                budget: budget as u128,
            }
            .into());
        }
    }
    Ok(enumerate_chain(&form, max_norm)?)
}

fn enumerate(g: &Global, a: &EnumerateArgs) -> Result<Outcome, CliError> {
    let alphas = parse_all("--alpha", &a.alphas)?;
    let chain = enumerate_form(alphas, a.max_norm, g.precision_cap, g.budget)?;
    let output = match g.format {
        Format::Text => write_chain(&chain),
        Format::Machine => render::machine(&Document::Chain(ChainDoc::new(&chain))),
    };
    Ok(Outcome {
        output,
        code: exit::OK,
        notes: Vec::new(),
    })
}

fn verify(g: &Global, a: &VerifyArgs) -> Result<Outcome, CliError> {
    let chain = with_cap(load_chain(&a.chain)?, g.precision_cap);
    if a.k == Some(0) {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let psi = a
        .psi
        .as_deref()
        .map(|s| s.parse::<PsiSpec>().map_err(|e| CliError::Usage(e.to_string())))
        .transpose()?;
    let selected: Vec<&str> = if a.checks.is_empty() {
        vec!["monotonic", "minkowski", "growth", "determinants", "polytope", "unimodular"]
    } else {
        a.checks.iter().map(|c| c.name()).collect()
    };
    let opts = ReportOptions {
        psi,
        k: a.k,
        series_bits: 64,
    };
    let mut report = analyze(&chain, &opts)?;
    let dropped = |name: &str| {
        (THEOREM_CHECKS.contains(&name) || name == "determinants") && !selected.contains(&name)
    };
    report.verdicts.retain(|v| !dropped(&v.check));
    report
        .warnings
        .retain(|w| !dropped(w.split(':').next().unwrap_or_default()));
    if dropped("determinants") {
        report.determinants.clear();
        report.ranks.clear();
    }
    let code = if report.theorem_failures().is_empty() {
        exit::OK
    } else {
        exit::CHECK_FAILED
    };
    let mut checks: Vec<String> = selected.iter().map(|s| s.to_string()).collect();
    if let Some(p) = &opts.psi {
        checks.push(format!("psi={}", p.clone().with_default_r(chain.r())));
    }
    if let Some(k) = a.k {
        checks.push(format!("series={k}"));
    }
    let doc = Document::Verify(VerifyDoc {
        alphas: chain.form().alphas().iter().map(|x| x.to_string()).collect(),
        search_bound: chain.search_bound(),
        checks,
        report,
    });
    Ok(Outcome {
        output: emit(g, &doc),
        code,
        notes: Vec::new(),
    })
}

fn extend(g: &Global, a: &ExtendArgs) -> Result<Outcome, CliError> {
    let cfg = match &a.config {
        Some(p) => ExperimentConfig::parse(&read_file(p)?)
            .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        None => ExperimentConfig::default(),
    };
    let betas = if a.betas.is_empty() { &cfg.betas } else { &a.betas };
    let k = a
        .k
        .or(cfg.k)
        .or((!betas.is_empty()).then_some(betas.len()))
        .ok_or_else(|| CliError::Usage("extend needs --k".into()))?;
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let samples = a.samples.or(cfg.samples);
    let seed = a.seed.or(cfg.seed);
    let cap = g.precision_cap.or(cfg.precision_cap);
    let budget = g.budget.or(cfg.budget);

    let chain = match &a.chain {
        Some(p) => with_cap(load_chain(p)?, cap),
        None if !cfg.alphas.is_empty() => {
            let max_norm = a
                .max_norm
                .or(cfg.max_norm)
                .ok_or_else(|| CliError::Usage("enumerating from the config needs max_norm".into()))?;
            enumerate_form(parse_all("alphas", &cfg.alphas)?, max_norm, cap, budget)?
        }
        None => return Err(CliError::Usage("extend needs a chain file or alphas in --config".into())),
    };
    let max_norm = a.max_norm.or(cfg.max_norm).unwrap_or(chain.search_bound());
    let opts = ExtendOptions {
        scan_budget: budget.map_or(DEFAULT_SCAN_BUDGET, u128::from),
        lattice_budget: budget.map_or(DEFAULT_SCAN_BUDGET, u128::from),
        ..ExtendOptions::default()
    };

    let mut notes = Vec::new();
    let (doc, code) = if !betas.is_empty() {
        if samples.is_some() || seed.is_some() {
            return Err(CliError::Usage("--beta cannot be combined with --samples or --seed".into()));
        }
        if betas.len() != k {
            return Err(CliError::Usage(format!("--k {k} needs {k} betas, got {}", betas.len())));
        }
        let prec = Precision::with_cap(cap.unwrap_or(DEFAULT_PRECISION_CAP));
        let sample = BetaSample::explicit_with(parse_all("--beta", betas)?, &prec)?;
        let rep = compare_extended_with(&chain, &sample, max_norm, &opts)?;
        let code = if rep.consistent { exit::OK } else { exit::CHECK_FAILED };
        (Document::Extension(rep), code)
    } else {
        let seed = seed.unwrap_or_else(|| {
            let s = rand::random::<u64>();
            notes.push(format!("seed {s}"));
            s
        });
        let rep = monte_carlo(&chain, k, samples.unwrap_or(1), seed, max_norm, &opts)?;
        let code = if rep.inconsistent == 0 { exit::OK } else { exit::CHECK_FAILED };
        (Document::MonteCarlo(rep), code)
    };
    Ok(Outcome {
        output: emit(g, &doc),
        code,
        notes,
    })
}

fn report(g: &Global, a: &ReportArgs) -> Result<Outcome, CliError> {
    let text = read_file(&a.file)?;
    let doc = if text.starts_with(CHAIN_MAGIC) {
        Document::Chain(ChainDoc::new(&load_chain(&a.file)?))
    } else if text.trim_start().starts_with('{') {
        render::read_machine(&text).map_err(|e| CliError::Parse(format!("{}: {e}", a.file.display())))?
    } else if text.starts_with(REPORT_MAGIC) {
        if g.format == Format::Machine {
            return Err(CliError::Usage(
                "a text report has no machine form; rerun the command with --format machine".into(),
            ));
        }
        return Ok(Outcome {
            output: text,
            code: exit::OK,
            notes: Vec::new(),
        });
    } else {
        return Err(CliError::Parse(format!("{}: not a chain file or report", a.file.display())));
    };
    Ok(Outcome {
        output: emit(g, &doc),
        code: exit::OK,
        notes: Vec::new(),
    })
}
