//! The three run stages: harvest, classify, report.
//!
//! Each stage is a plain function over a [`RunConfig`], so the command-line
//! tool and tests drive exactly the same code. Parsed versions are cached as
//! JSON under the output directory, which makes the staged invocation and
//! the all-in-one invocation equally cheap after the first parse and — more
//! importantly — byte-identical in their outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harvest::retained_new_descriptors;
use crate::model::{Descriptor, MeshVersion, NewDescriptorRecord, ReviewKind, ScrRecord};
use crate::notes::{read_overrides_csv, write_review_csv, OverrideSet, ReviewItem};
use crate::parse::{load_version, ParseReport};
use crate::provenance::{Annotator, PmnOutcome};
use crate::report::{
    aggregate, read_year_csv, write_stats, write_year_csv, year_csv_filename, StatsBundle,
};

/// One parsed year as stored on disk, including the parse report so cache
/// hits can repeat the original counts without touching the XML.
#[derive(Debug, Serialize, Deserialize)]
struct CachedVersion {
    year: i32,
    report: ParseReport,
    descriptors: Vec<Descriptor>,
    scrs: Vec<ScrRecord>,
}

fn cache_path(config: &RunConfig, year: i32) -> PathBuf {
    config.cache_dir().join(format!("mesh_{year}.json"))
}

fn read_cache(path: &Path, year: i32) -> Result<(MeshVersion, ParseReport)> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let cached: CachedVersion = serde_json::from_reader(BufReader::new(file))?;
    if cached.year != year {
        return Err(Error::file_format(
            path,
            format!("cache holds year {}, expected {year}", cached.year),
        ));
    }
    // Rebuilding re-runs the index checks; its warnings are already part of
    // the cached report, so they are not collected a second time.
    let (version, _) = MeshVersion::build(year, cached.descriptors, cached.scrs)?;
    Ok((version, cached.report))
}

fn write_cache(config: &RunConfig, version: &MeshVersion, report: &ParseReport) -> Result<()> {
    let dir = config.cache_dir();
    std::fs::create_dir_all(&dir).map_err(|e| Error::file(&dir, e))?;
    let path = cache_path(config, version.year());
    let cached = CachedVersion {
        year: version.year(),
        report: report.clone(),
        descriptors: version.descriptors().values().cloned().collect(),
        scrs: version.scrs().values().cloned().collect(),
    };
    let file = File::create(&path).map_err(|e| Error::file(&path, e))?;
    serde_json::to_writer(BufWriter::new(file), &cached)?;
    Ok(())
}

/// Loads one year, preferring the cache. A cache that fails to read or
/// rebuild is reported and replaced by a fresh parse.
fn load_one(config: &RunConfig, year: i32) -> Result<(MeshVersion, ParseReport, bool)> {
    let cache = cache_path(config, year);
    if cache.is_file() {
        match read_cache(&cache, year) {
            Ok((version, report)) => {
                log::info!("{year}: loaded from cache ({})", cache.display());
                return Ok((version, report, true));
            }
            Err(err) => {
                log::warn!("{year}: unusable cache ({err}); parsing the release files again");
            }
        }
    }
    let (version, report) =
        load_version(year, &config.descriptor_path(year), &config.scr_path(year))?;
    for (label, reason) in &report.skipped_records {
        log::warn!("{year}: skipped record `{label}`: {reason}");
    }
    for note in &report.notes {
        log::warn!("{year}: {note}");
    }
    if let Err(err) = write_cache(config, &version, &report) {
        log::warn!("{year}: could not write the parse cache: {err}");
    }
    Ok((version, report, false))
}

struct LoadedVersions {
    versions: BTreeMap<i32, MeshVersion>,
    reports: BTreeMap<i32, ParseReport>,
    cache_hits: usize,
}

/// Loads a set of years in parallel. Years that have neither a cache entry
/// nor their release files on disk are reported together up front.
fn load_versions(config: &RunConfig, years: &[i32]) -> Result<LoadedVersions> {
    let missing: Vec<i32> = years
        .iter()
        .copied()
        .filter(|&year| {
            !cache_path(config, year).is_file()
                && !(config.descriptor_path(year).is_file() && config.scr_path(year).is_file())
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingVersions(missing));
    }

    let loaded: Vec<(i32, (MeshVersion, ParseReport, bool))> = with_pool(config.jobs, || {
        years
            .par_iter()
            .map(|&year| Ok((year, load_one(config, year)?)))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut out = LoadedVersions {
        versions: BTreeMap::new(),
        reports: BTreeMap::new(),
        cache_hits: 0,
    };
    for (year, (version, report, from_cache)) in loaded {
        out.versions.insert(year, version);
        out.reports.insert(year, report);
        out.cache_hits += usize::from(from_cache);
    }
    Ok(out)
}

/// Runs `body` inside a dedicated thread pool when a thread count was
/// configured, or on the global pool otherwise.
fn with_pool<T: Send>(jobs: Option<usize>, body: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Config(format!("cannot build a {threads}-thread pool: {e}")))?;
            Ok(pool.install(body))
        }
        None => Ok(body()),
    }
}

/// What the harvest stage found, per study year.
#[derive(Debug, Clone)]
pub struct HarvestSummary {
    /// New descriptors per study year, filtered to those the reference
    /// version retains.
    pub per_year_new: BTreeMap<i32, BTreeSet<String>>,
    pub reports: BTreeMap<i32, ParseReport>,
    pub cache_hits: usize,
}

/// Parses every required year and diffs consecutive releases.
pub fn harvest(config: &RunConfig) -> Result<HarvestSummary> {
    config.validate_inputs()?;
    let window = config.window()?;
    let loaded = load_versions(config, &window.required_years())?;
    let diff = retained_new_descriptors(&window, &loaded.versions)?;
    for warning in &diff.warnings {
        log::warn!("{warning}");
    }
    Ok(HarvestSummary {
        per_year_new: diff.per_year,
        reports: loaded.reports,
        cache_hits: loaded.cache_hits,
    })
}

/// What the classify stage produced and wrote.
#[derive(Debug, Clone)]
pub struct ClassifyOutcome {
    pub records: BTreeMap<i32, Vec<NewDescriptorRecord>>,
    pub review_items: Vec<ReviewItem>,
    /// Records that keep a note-derived category but no hosts yet.
    pub pending_records: usize,
    pub review_path: PathBuf,
    pub year_paths: BTreeMap<i32, PathBuf>,
    /// Descriptors whose public note carried an "indexed under" statement
    /// that had to be resolved.
    pub pmn_pattern_cases: usize,
    /// How many of those resolved to a supplementary record without review.
    pub pmn_auto_resolved: usize,
}

impl ClassifyOutcome {
    /// True when an operator should look at the review file before trusting
    /// the annotations.
    pub fn needs_review(&self) -> bool {
        !self.review_items.is_empty() || self.pending_records > 0
    }
}

/// Classifies every harvested descriptor and writes the per-year annotation
/// tables plus the review file.
pub fn classify(config: &RunConfig) -> Result<ClassifyOutcome> {
    config.validate_inputs()?;
    let window = config.window()?;
    let overrides = match &config.overrides_path {
        Some(path) => OverrideSet::from_entries(read_overrides_csv(path)?)?,
        None => OverrideSet::default(),
    };
    let loaded = load_versions(config, &window.required_years())?;
    let diff = retained_new_descriptors(&window, &loaded.versions)?;
    for warning in &diff.warnings {
        log::warn!("{warning}");
    }

    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::file(&config.output_dir, e))?;
    let annotator = Annotator::new(&loaded.versions[&window.reference_year()], &overrides);

    let mut outcome = ClassifyOutcome {
        records: BTreeMap::new(),
        review_items: Vec::new(),
        pending_records: 0,
        review_path: config.review_path(),
        year_paths: BTreeMap::new(),
        pmn_pattern_cases: 0,
        pmn_auto_resolved: 0,
    };
    let mut consumed: BTreeSet<(String, ReviewKind)> = BTreeSet::new();
    for year in window.study_years() {
        let current = &loaded.versions[&year];
        let version0 = &loaded.versions[&(year - 1)];
        let ids: Vec<&String> = diff.per_year[&year].iter().collect();
        let annotations = with_pool(config.jobs, || {
            ids.par_iter()
                .map(|id| {
                    let descriptor = current
                        .descriptor(id)
                        .expect("harvested ids come from this version");
                    annotator.annotate(descriptor, year, version0)
                })
                .collect::<Result<Vec<_>>>()
        })??;

        let mut records = Vec::with_capacity(annotations.len());
        for annotation in annotations {
            for warning in &annotation.warnings {
                log::warn!("{warning}");
            }
            if annotation.pmn_outcome != PmnOutcome::NotConsulted {
                outcome.pmn_pattern_cases += 1;
            }
            if annotation.pmn_outcome == PmnOutcome::AutoResolved {
                outcome.pmn_auto_resolved += 1;
            }
            outcome.pending_records += usize::from(annotation.record.is_pending());
            outcome.review_items.extend(annotation.review_items);
            consumed.extend(annotation.consumed_overrides);
            records.push(annotation.record);
        }
        let path = config.output_dir.join(year_csv_filename(year));
        write_year_csv(&path, year, &records)?;
        outcome.year_paths.insert(year, path);
        outcome.records.insert(year, records);
    }

    for (id, kind) in overrides.keys() {
        if !consumed.contains(&(id.to_owned(), kind)) {
            log::warn!("override for `{id}` ({kind}) was never used");
        }
    }
    write_review_csv(&outcome.review_path, &outcome.review_items)?;
    Ok(outcome)
}

/// What the report stage wrote.
#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub stats_paths: Vec<PathBuf>,
    pub stats: StatsBundle,
}

/// Aggregates the per-year annotation tables into the statistics files.
/// Expects [`classify`] to have run; the baseline version is loaded (from
/// cache, normally) for the extension ratio.
pub fn report(config: &RunConfig) -> Result<ReportSummary> {
    config.validate_inputs()?;
    let window = config.window()?;
    let mut missing = Vec::new();
    let mut records_by_year = BTreeMap::new();
    for year in window.study_years() {
        let path = config.output_dir.join(year_csv_filename(year));
        if !path.is_file() {
            missing.push(year);
            continue;
        }
        let records = read_year_csv(&path)?;
        if let Some(stray) = records.iter().find(|r| r.intro_year != year) {
            return Err(Error::file_format(
                &path,
                format!(
                    "`{}` says it was introduced in {}, not {year}",
                    stray.descriptor_id, stray.intro_year
                ),
            ));
        }
        records_by_year.insert(year, records);
    }
    if !missing.is_empty() {
        return Err(Error::MissingAnnotations(missing));
    }

    let baseline_year = window.baseline_year();
    let loaded = load_versions(config, &[baseline_year])?;
    let baseline_count = loaded.versions[&baseline_year].descriptor_count();
    let stats = aggregate(&records_by_year, baseline_count);
    let stats_paths = write_stats(&config.output_dir, &stats)?;
    Ok(ReportSummary { stats_paths, stats })
}

/// The three stages back to back on one configuration.
pub fn run_all(config: &RunConfig) -> Result<(HarvestSummary, ClassifyOutcome, ReportSummary)> {
    let harvested = harvest(config)?;
    let classified = classify(config)?;
    let reported = report(config)?;
    Ok((harvested, classified, reported))
}
