//! `meshprov` — annotate newly introduced MeSH descriptors with conceptual
//! provenance codes and summarize the results.
//!
//! Exit codes: 0 success, 1 fatal error, 2 finished but some annotations need
//! manual review (see the review CSV in the output directory).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mesh_provenance::config::{ConfigDraft, RunConfig, DEFAULT_LOG_LEVEL};
use mesh_provenance::pipeline::{self, ClassifyOutcome, HarvestSummary, ReportSummary};

#[derive(Parser)]
#[command(
    name = "meshprov",
    version,
    about = "Track where newly introduced MeSH descriptors come from",
    after_help = "Flags override values from --config. Exit code 2 means the run \
                  finished but left items in the review queue."
)]
struct Cli {
    /// Key=value configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory holding desc{year}.xml and supp{year}.xml files.
    #[arg(long, global = true, value_name = "DIR")]
    data_dir: Option<PathBuf>,

    /// First study year (annotations start here).
    #[arg(long, global = true, value_name = "YEAR")]
    first_year: Option<i32>,

    /// Last study year.
    #[arg(long, global = true, value_name = "YEAR")]
    last_year: Option<i32>,

    /// Reference year used for hierarchy placement (>= last year).
    #[arg(long, global = true, value_name = "YEAR")]
    reference_year: Option<i32>,

    /// CSV of accepted resolutions for flagged note lookups.
    #[arg(long, global = true, value_name = "FILE")]
    overrides: Option<PathBuf>,

    /// Output directory for CSV files and the parse cache.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for parsing and annotation.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// off, error, warn, info, debug, or trace.
    #[arg(long, global = true, value_name = "LEVEL")]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the annual releases and list newly introduced descriptors.
    Harvest,
    /// Annotate new descriptors and write per-year CSV files.
    Classify,
    /// Aggregate the per-year CSV files into summary statistics.
    Report,
    /// Harvest, classify, and report in one go.
    RunAll,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let ok = matches!(
                err.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            );
            let _ = err.print();
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };

    let file_draft = match cli
        .config
        .as_deref()
        .map(ConfigDraft::from_file)
        .transpose()
    {
        Ok(draft) => draft.unwrap_or_default(),
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    };
    let flag_draft = ConfigDraft {
        data_dir: cli.data_dir.clone(),
        descriptor_template: None,
        scr_template: None,
        first_year: cli.first_year,
        last_year: cli.last_year,
        reference_year: cli.reference_year,
        overrides_path: cli.overrides.clone(),
        output_dir: cli.out.clone(),
        log_level: cli.log_level.clone(),
        jobs: cli.jobs,
    };
    let merged = file_draft.overlay(flag_draft);

    // The logger comes up before full config validation so that validation
    // failures themselves get logged consistently.
    let level = merged
        .log_level
        .as_deref()
        .unwrap_or(DEFAULT_LOG_LEVEL)
        .parse::<log::LevelFilter>()
        .unwrap_or(log::LevelFilter::Info);
    init_logger(level);

    let config = match merged.finish() {
        Ok(config) => config,
        Err(err) => {
            log::error!("{err}");
            return ExitCode::from(1);
        }
    };

    match dispatch(&cli.command, &config) {
        Ok(code) => code,
        Err(err) => {
            log::error!("{err}");
            ExitCode::from(1)
        }
    }
}

fn init_logger(level: log::LevelFilter) {
    let mut builder = env_logger::Builder::new();
    builder
        .filter_level(level)
        .format(|buf, record| writeln!(buf, "{} {}", record.level(), record.args()))
        .target(env_logger::Target::Stderr);
    let _ = builder.try_init();
}

fn dispatch(command: &Command, config: &RunConfig) -> mesh_provenance::Result<ExitCode> {
    match command {
        Command::Harvest => {
            let summary = pipeline::harvest(config)?;
            print_harvest(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify => {
            let outcome = pipeline::classify(config)?;
            print_classify(&outcome);
            Ok(review_exit(&outcome))
        }
        Command::Report => {
            let summary = pipeline::report(config)?;
            print_report(&summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::RunAll => {
            let (harvest, classify, report) = pipeline::run_all(config)?;
            print_harvest(&harvest);
            print_classify(&classify);
            print_report(&report);
            Ok(review_exit(&classify))
        }
    }
}

fn review_exit(outcome: &ClassifyOutcome) -> ExitCode {
    if outcome.needs_review() {
        log::warn!(
            "{} review item(s) and {} pending record(s); resolve them in an overrides CSV and rerun",
            outcome.review_items.len(),
            outcome.pending_records
        );
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn print_harvest(summary: &HarvestSummary) {
    for (year, report) in &summary.reports {
        println!(
            "{year}: {} descriptors, {} supplementary records",
            report.descriptor_count, report.scr_count
        );
    }
    for (year, ids) in &summary.per_year_new {
        println!("{year}: {} new descriptor(s)", ids.len());
    }
    let total: usize = summary.per_year_new.values().map(|ids| ids.len()).sum();
    println!(
        "total new descriptors: {total} ({} version(s) served from cache)",
        summary.cache_hits
    );
}

fn print_classify(outcome: &ClassifyOutcome) {
    for (year, path) in &outcome.year_paths {
        let count = outcome.records.get(year).map_or(0, Vec::len);
        println!("{year}: wrote {count} annotation(s) to {}", path.display());
    }
    println!(
        "review queue: {} item(s), {} pending record(s) -> {}",
        outcome.review_items.len(),
        outcome.pending_records,
        outcome.review_path.display()
    );
    if outcome.pmn_pattern_cases > 0 {
        println!(
            "public-note lookups: {}/{} auto-resolved",
            outcome.pmn_auto_resolved, outcome.pmn_pattern_cases
        );
    }
}

fn print_report(summary: &ReportSummary) {
    println!("annotated descriptors: {}", summary.stats.total_records);
    println!("extension ratio: {}", summary.stats.extension_ratio);
    println!("multi-code fraction: {}", summary.stats.multi_code_fraction);
    for path in &summary.stats_paths {
        println!("wrote {}", path.display());
    }
}
