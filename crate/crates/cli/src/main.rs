//! `plens`: validate, score, select, merge and report class-wise pseudo-label
//! ensembles.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plens_core::ensemble::{run_ensemble, select_best, EnsembleOptions, SelectionMap, Variant};
use plens_core::eval::{score_table, ClassScoreTable, ScoringMode};
use plens_core::mask_io::{load_manifest, validate_corpus, MaskFormat};
use plens_core::report::{
    cost_estimate, render_checkmark_table, render_cost_report, render_score_table, CostParams,
    TableFormat,
};
use plens_core::synth::{generate_corpus, SynthConfig};
use plens_core::Error;

#[derive(Parser)]
#[command(name = "plens", version, about = "Class-wise ensembles of weakly supervised pseudo-labels")]
struct Cli {
    /// Worker threads for evaluate, merge and synth (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that every mask listed in a manifest exists, decodes and agrees
    /// in size and class range.
    Validate {
        manifest: PathBuf,
        /// Treat images without ground truth as findings.
        #[arg(long)]
        require_gt: bool,
    },
    /// Score every component against ground truth.
    Evaluate {
        manifest: PathBuf,
        #[arg(long, default_value = "accumulated", value_parser = parse_mode)]
        mode: ScoringMode,
        /// Write the score table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pick the best component for every foreground class.
    Select {
        scores: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build ensemble masks for every image in a manifest.
    Merge {
        manifest: PathBuf,
        selection: PathBuf,
        #[arg(long, default_value = "classwise")]
        variant: Variant,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "pgm", value_parser = parse_format)]
        format: MaskFormat,
        /// Let classes absent from an image's labels claim pixels anyway.
        #[arg(long)]
        no_label_gating: bool,
    },
    /// Generate a synthetic corpus from a config file.
    Synth {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render score, selection and cost tables.
    Report {
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Selection CSV; computed from the scores when omitted.
        #[arg(long)]
        selection: Option<PathBuf>,
        /// An ensemble summary.csv written by `merge`.
        #[arg(long)]
        ensemble: Option<PathBuf>,
        #[arg(long, default_value = "text", value_parser = parse_table_format)]
        format: TableFormat,
        /// Cost model parameters, e.g. `--cost I=10 N=4 C=21`.
        #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
        cost: Vec<String>,
    },
}

fn parse_mode(s: &str) -> Result<ScoringMode, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<MaskFormat, String> {
    s.parse()
}

fn parse_table_format(s: &str) -> Result<TableFormat, String> {
    match s {
        "text" => Ok(TableFormat::Text),
        "csv" => Ok(TableFormat::Csv),
        other => Err(format!("unknown table format `{other}` (expected text or csv)")),
    }
}

/// A failed command and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => 3,
            Error::Manifest { .. }
            | Error::Config { .. }
            | Error::Csv(_)
            | Error::InvalidConfig(_)
            | Error::IncompleteSelection(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(Failure::usage(format!("cannot start {n} threads: {e}"))),
        },
        None => run(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("plens: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Validate { manifest, require_gt } => validate(&manifest, require_gt),
        Command::Evaluate { manifest, mode, out } => evaluate(&manifest, mode, out.as_deref()),
        Command::Select { scores, out } => select(&scores, out.as_deref()),
        Command::Merge { manifest, selection, variant, out, format, no_label_gating } => {
            let options = EnsembleOptions { variant, format, gate_by_labels: !no_label_gating };
            merge(&manifest, &selection, &out, options)
        }
        Command::Synth { config, out } => synth(&config, &out),
        Command::Report { scores, selection, ensemble, format, cost } => report(
            scores.as_deref(),
            selection.as_deref(),
            ensemble.as_deref(),
            format,
            &cost,
        ),
    }
}

fn validate(path: &Path, require_gt: bool) -> CmdResult {
    let manifest = load_manifest(path)?;
    let report = validate_corpus(&manifest, require_gt);
    for finding in &report.findings {
        println!("{finding}");
    }
    if report.passed() {
        println!("ok: {} images, {} components", manifest.images.len(), manifest.components.len());
        Ok(())
    } else {
        Err(Failure::validation(format!("{} finding(s)", report.findings.len())))
    }
}

fn evaluate(path: &Path, mode: ScoringMode, out: Option<&Path>) -> CmdResult {
    let manifest = load_manifest(path)?;
    let table = score_table(&manifest, mode)?;
    match out {
        Some(out) => table.save_csv(out)?,
        None => print!("{}", table.to_csv()),
    }
    Ok(())
}

fn select(scores: &Path, out: Option<&Path>) -> CmdResult {
    let table = ClassScoreTable::load_csv(scores)?;
    if table.components.is_empty() {
        return Err(Failure::usage(format!("{}: no component rows", scores.display())));
    }
    let selection = select_best(&table)?;
    match out {
        Some(out) => selection.save_csv(out)?,
        None => print!("{}", selection.to_csv()),
    }
    Ok(())
}

fn merge(manifest: &Path, selection: &Path, out: &Path, options: EnsembleOptions) -> CmdResult {
    let manifest = load_manifest(manifest)?;
    let selection = SelectionMap::load_csv(selection)?;
    let summary = run_ensemble(&manifest, &selection, out, options)?;
    match summary.miou {
        Some(miou) => println!(
            "wrote {} masks to {}; ensemble mIoU {:.4} over {} images",
            summary.images_written,
            out.display(),
            miou,
            summary.images_evaluated
        ),
        None => println!("wrote {} masks to {}", summary.images_written, out.display()),
    }
    Ok(())
}

fn synth(config: &Path, out: &Path) -> CmdResult {
    let config = SynthConfig::load(config)?;
    let manifest = generate_corpus(&config, out)?;
    println!(
        "wrote {} images x {} components to {}",
        manifest.images.len(),
        manifest.components.len(),
        out.display()
    );
    Ok(())
}

fn report(
    scores: Option<&Path>,
    selection: Option<&Path>,
    ensemble: Option<&Path>,
    format: TableFormat,
    cost: &[String],
) -> CmdResult {
    if scores.is_none() && selection.is_none() && cost.is_empty() {
        return Err(Failure::usage("nothing to report: pass --scores, --selection or --cost"));
    }
    let table = scores.map(ClassScoreTable::load_csv).transpose()?;
    let selection = match (selection, &table) {
        (Some(p), _) => Some(SelectionMap::load_csv(p)?),
        (None, Some(t)) => Some(select_best(t)?),
        (None, None) => None,
    };
    let ensemble = ensemble
        .map(|p| -> Result<_, Failure> {
            let t = ClassScoreTable::load_csv(p)?;
            t.row_by_name("ensemble")
                .cloned()
                .ok_or_else(|| Failure::usage(format!("{}: no `ensemble` row", p.display())))
        })
        .transpose()?;

    let mut sections = Vec::new();
    if let (Some(t), Some(s)) = (&table, &selection) {
        sections.push(render_score_table(t, s, ensemble.as_ref(), format));
    }
    if let Some(s) = &selection {
        let components: Vec<&str> = match &table {
            Some(t) => t.components.iter().map(String::as_str).collect(),
            None => s.wins_per_component().into_keys().collect(),
        };
        sections.push(render_checkmark_table(s, &components));
    }
    if !cost.is_empty() {
        let params = CostParams::from_assignments(cost.iter().map(String::as_str)).map_err(Failure::usage)?;
        sections.push(render_cost_report(&params, &cost_estimate(&params)));
    }
    print!("{}", sections.join("\n"));
    Ok(())
}
