//! Annotation CSVs and aggregate statistics.
//!
//! One CSV per study year carries the classified records; the statistics
//! tables roll all years up into per-category and per-type counts, a
//! category-by-type crosstab, tree-category letter counts, and a scalar
//! summary. Everything is written sorted so repeated runs produce identical
//! bytes, and every file reads back into the structure it came from.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{
    HostCoverage, NewDescriptorRecord, PreviousHost, ProvenanceCategory, ProvenanceCode,
    ProvenanceType, TreeNumber,
};
use crate::notes::check_header;

pub const YEAR_CSV_HEADER: [&str; 10] = [
    "descriptor_id",
    "name",
    "intro_year",
    "category",
    "host_ids",
    "host_names",
    "host_coverage",
    "codes",
    "tree_numbers",
    "mesh_categories",
];

pub fn year_csv_filename(year: i32) -> String {
    format!("new_descriptors_{year}.csv")
}

/// Writes one study year's records, sorted by descriptor id. List-valued
/// columns join their elements with semicolons. Every record must carry
/// `year` as its introduction year.
pub fn write_year_csv(path: &Path, year: i32, records: &[NewDescriptorRecord]) -> Result<()> {
    let mut sorted: Vec<&NewDescriptorRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.descriptor_id.cmp(&b.descriptor_id));
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(YEAR_CSV_HEADER)?;
    for record in sorted {
        if record.intro_year != year {
            return Err(Error::InvalidRecord {
                descriptor_id: record.descriptor_id.clone(),
                reason: format!(
                    "introduced in {}, cannot be written into the {year} table",
                    record.intro_year
                ),
            });
        }
        for host in &record.hosts {
            // Semicolons delimit the host lists, so a name carrying one
            // could not be read back unambiguously. Release names never do.
            if host.name.contains(';') {
                return Err(Error::InvalidRecord {
                    descriptor_id: record.descriptor_id.clone(),
                    reason: format!("host name `{}` contains a semicolon", host.name),
                });
            }
        }
        let join = |parts: Vec<String>| parts.join(";");
        writer.write_record([
            record.descriptor_id.as_str(),
            &record.name,
            &record.intro_year.to_string(),
            &record.category.digit().to_string(),
            &join(
                record
                    .hosts
                    .iter()
                    .map(|h| h.descriptor_id.clone())
                    .collect(),
            ),
            &join(record.hosts.iter().map(|h| h.name.clone()).collect()),
            &join(
                record
                    .hosts
                    .iter()
                    .map(|h| h.coverage.to_string())
                    .collect(),
            ),
            &join(record.codes.iter().map(|c| c.to_string()).collect()),
            &join(record.tree_numbers.iter().map(|t| t.to_string()).collect()),
            &join(
                record
                    .mesh_category_letters
                    .iter()
                    .map(|c| c.to_string())
                    .collect(),
            ),
        ])?;
    }
    writer.flush().map_err(|e| Error::file(path, e))?;
    Ok(())
}

/// Reads a year table back, in file order.
pub fn read_year_csv(path: &Path) -> Result<Vec<NewDescriptorRecord>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    check_header(path, &mut reader, &YEAR_CSV_HEADER)?;
    let bad = |message: String| Error::file_format(path, message);
    let split = |field: &str| -> Vec<String> {
        field
            .split(';')
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect()
    };
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != YEAR_CSV_HEADER.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                YEAR_CSV_HEADER.len(),
                row.len()
            )));
        }
        let descriptor_id = row[0].to_owned();
        let intro_year: i32 = row[2]
            .parse()
            .map_err(|_| bad(format!("bad year `{}` for `{descriptor_id}`", &row[2])))?;
        let category = row[3]
            .parse::<u8>()
            .ok()
            .and_then(ProvenanceCategory::from_digit)
            .ok_or_else(|| bad(format!("bad category `{}` for `{descriptor_id}`", &row[3])))?;
        let (host_ids, host_names, host_coverage) =
            (split(&row[4]), split(&row[5]), split(&row[6]));
        if host_ids.len() != host_names.len() || host_ids.len() != host_coverage.len() {
            return Err(bad(format!(
                "host columns disagree on length for `{descriptor_id}`"
            )));
        }
        let hosts = host_ids
            .into_iter()
            .zip(host_names)
            .zip(host_coverage)
            .map(|((id, name), coverage)| {
                Ok(PreviousHost {
                    descriptor_id: id,
                    name,
                    coverage: coverage.parse::<HostCoverage>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let codes = split(&row[7])
            .iter()
            .map(|c| c.parse::<ProvenanceCode>())
            .collect::<Result<BTreeSet<_>>>()?;
        let tree_numbers = split(&row[8])
            .iter()
            .map(|t| TreeNumber::parse(t))
            .collect::<Result<Vec<_>>>()?;
        let mesh_category_letters = split(&row[9])
            .iter()
            .map(|s| {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(bad(format!(
                        "bad tree category `{s}` for `{descriptor_id}`"
                    ))),
                }
            })
            .collect::<Result<BTreeSet<_>>>()?;
        records.push(NewDescriptorRecord {
            descriptor_id,
            name: row[1].to_owned(),
            intro_year,
            category,
            hosts,
            codes,
            tree_numbers,
            mesh_category_letters,
        });
    }
    Ok(records)
}

/// All aggregate statistics of one run. Count maps are dense: every
/// year-category, year-type, and category-type cell is present, zero or not,
/// over the years given to [`aggregate`] — so tables keep their shape even
/// when a year contributes nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsBundle {
    pub category_by_year: BTreeMap<(i32, ProvenanceCategory), u64>,
    /// A record counts once per distinct type among its codes.
    pub type_by_year: BTreeMap<(i32, ProvenanceType), u64>,
    /// A record counts once per distinct code it carries.
    pub code_crosstab: BTreeMap<(ProvenanceCategory, ProvenanceType), u64>,
    /// A record counts once per tree-category letter it sits under.
    pub letters_by_year: BTreeMap<(i32, char), u64>,
    pub category_totals: BTreeMap<ProvenanceCategory, u64>,
    pub type_totals: BTreeMap<ProvenanceType, u64>,
    pub total_records: u64,
    /// Among resolved records that can have several hosts (old-supplementary
    /// and note-derived categories), the share carrying more than one code.
    pub multi_code_fraction: f64,
    /// Records over the study window relative to the baseline version's
    /// descriptor count.
    pub extension_ratio: f64,
    /// Per-category (mean, population SD, sample SD) of annual counts;
    /// empty when no years were aggregated. With a single year the sample
    /// SD is reported as 0.
    pub category_annual_spread: BTreeMap<ProvenanceCategory, (f64, f64, f64)>,
    pub type_annual_spread: BTreeMap<ProvenanceType, (f64, f64, f64)>,
}

/// Rolls per-year records up into a [`StatsBundle`]. Keys of
/// `records_by_year` define the year span, so a year with no records must
/// still be present (with an empty vector) to count as an observed zero.
/// `baseline_count` is the descriptor count of the version preceding the
/// study window.
pub fn aggregate(
    records_by_year: &BTreeMap<i32, Vec<NewDescriptorRecord>>,
    baseline_count: usize,
) -> StatsBundle {
    let years: Vec<i32> = records_by_year.keys().copied().collect();
    let mut category_by_year = BTreeMap::new();
    let mut type_by_year = BTreeMap::new();
    let mut letters_by_year: BTreeMap<(i32, char), u64> = BTreeMap::new();
    let mut code_crosstab = BTreeMap::new();
    for &year in &years {
        for category in ProvenanceCategory::ALL {
            category_by_year.insert((year, category), 0);
        }
        for ptype in ProvenanceType::ALL {
            type_by_year.insert((year, ptype), 0);
        }
    }
    for category in ProvenanceCategory::ALL {
        for ptype in ProvenanceType::ALL {
            code_crosstab.insert((category, ptype), 0);
        }
    }

    let mut total_records = 0u64;
    let mut multi_denominator = 0u64;
    let mut multi_numerator = 0u64;
    let mut letters_seen: BTreeSet<char> = BTreeSet::new();
    for (&year, records) in records_by_year {
        for record in records {
            total_records += 1;
            *category_by_year
                .get_mut(&(year, record.category))
                .expect("dense") += 1;
            let types: BTreeSet<ProvenanceType> = record.codes.iter().map(|c| c.ptype()).collect();
            for &ptype in &types {
                *type_by_year.get_mut(&(year, ptype)).expect("dense") += 1;
            }
            for code in &record.codes {
                *code_crosstab
                    .get_mut(&(code.category(), code.ptype()))
                    .expect("dense") += 1;
            }
            for &letter in &record.mesh_category_letters {
                letters_seen.insert(letter);
                *letters_by_year.entry((year, letter)).or_insert(0) += 1;
            }
            let multi_capable = matches!(
                record.category,
                ProvenanceCategory::OldScr | ProvenanceCategory::NewPiConcept
            );
            if multi_capable && !record.codes.is_empty() {
                multi_denominator += 1;
                if record.codes.len() >= 2 {
                    multi_numerator += 1;
                }
            }
        }
    }
    // Densify the letter table over the letters any record used.
    for &year in &years {
        for &letter in &letters_seen {
            letters_by_year.entry((year, letter)).or_insert(0);
        }
    }

    let mut category_totals = BTreeMap::new();
    let mut category_annual_spread = BTreeMap::new();
    for category in ProvenanceCategory::ALL {
        let annual: Vec<u64> = years
            .iter()
            .map(|&y| category_by_year[&(y, category)])
            .collect();
        category_totals.insert(category, annual.iter().sum());
        if let Some(spread) = spread(&annual) {
            category_annual_spread.insert(category, spread);
        }
    }
    let mut type_totals = BTreeMap::new();
    let mut type_annual_spread = BTreeMap::new();
    for ptype in ProvenanceType::ALL {
        let annual: Vec<u64> = years.iter().map(|&y| type_by_year[&(y, ptype)]).collect();
        type_totals.insert(ptype, annual.iter().sum());
        if let Some(spread) = spread(&annual) {
            type_annual_spread.insert(ptype, spread);
        }
    }

    StatsBundle {
        category_by_year,
        type_by_year,
        code_crosstab,
        letters_by_year,
        category_totals,
        type_totals,
        total_records,
        multi_code_fraction: if multi_denominator == 0 {
            0.0
        } else {
            multi_numerator as f64 / multi_denominator as f64
        },
        extension_ratio: if baseline_count == 0 {
            0.0
        } else {
            total_records as f64 / baseline_count as f64
        },
        category_annual_spread,
        type_annual_spread,
    }
}

/// Mean, population SD, and sample SD of a count series; `None` for an empty
/// series, sample SD 0 for a single observation.
fn spread(values: &[u64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<u64>() as f64 / n;
    let sum_sq: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    let sd_population = (sum_sq / n).sqrt();
    let sd_sample = if values.len() > 1 {
        (sum_sq / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, sd_population, sd_sample))
}

pub const STATS_FILENAMES: [&str; 5] = [
    "category_by_year.csv",
    "type_by_year.csv",
    "code_crosstab.csv",
    "mesh_category_by_year.csv",
    "summary.csv",
];

/// Writes the five statistics tables into `dir` and returns their paths in
/// [`STATS_FILENAMES`] order.
pub fn write_stats(dir: &Path, stats: &StatsBundle) -> Result<Vec<PathBuf>> {
    let years: BTreeSet<i32> = stats.category_by_year.keys().map(|&(y, _)| y).collect();
    let letters: BTreeSet<char> = stats.letters_by_year.keys().map(|&(_, c)| c).collect();
    let mut paths = Vec::new();

    let path = dir.join(STATS_FILENAMES[0]);
    let mut writer = open_writer(&path)?;
    let mut header = vec!["year".to_owned()];
    header.extend(ProvenanceCategory::ALL.map(|c| format!("category_{}", c.digit())));
    writer.write_record(&header)?;
    for &year in &years {
        let mut row = vec![year.to_string()];
        row.extend(ProvenanceCategory::ALL.map(|c| stats.category_by_year[&(year, c)].to_string()));
        writer.write_record(&row)?;
    }
    finish_writer(writer, &path)?;
    paths.push(path);

    let path = dir.join(STATS_FILENAMES[1]);
    let mut writer = open_writer(&path)?;
    let mut header = vec!["year".to_owned()];
    header.extend(ProvenanceType::ALL.map(|t| format!("type_{}", t.digit())));
    writer.write_record(&header)?;
    for &year in &years {
        let mut row = vec![year.to_string()];
        row.extend(ProvenanceType::ALL.map(|t| stats.type_by_year[&(year, t)].to_string()));
        writer.write_record(&row)?;
    }
    finish_writer(writer, &path)?;
    paths.push(path);

    let path = dir.join(STATS_FILENAMES[2]);
    let mut writer = open_writer(&path)?;
    let mut header = vec!["category".to_owned()];
    header.extend(ProvenanceType::ALL.map(|t| format!("type_{}", t.digit())));
    writer.write_record(&header)?;
    for category in ProvenanceCategory::ALL {
        let mut row = vec![category.digit().to_string()];
        row.extend(ProvenanceType::ALL.map(|t| stats.code_crosstab[&(category, t)].to_string()));
        writer.write_record(&row)?;
    }
    finish_writer(writer, &path)?;
    paths.push(path);

    let path = dir.join(STATS_FILENAMES[3]);
    let mut writer = open_writer(&path)?;
    let mut header = vec!["year".to_owned()];
    header.extend(letters.iter().map(char::to_string));
    writer.write_record(&header)?;
    for &year in &years {
        let mut row = vec![year.to_string()];
        row.extend(
            letters
                .iter()
                .map(|&c| stats.letters_by_year[&(year, c)].to_string()),
        );
        writer.write_record(&row)?;
    }
    finish_writer(writer, &path)?;
    paths.push(path);

    let path = dir.join(STATS_FILENAMES[4]);
    let mut writer = open_writer(&path)?;
    writer.write_record(["statistic", "key", "value"])?;
    writer.write_record(["total_records", "", &stats.total_records.to_string()])?;
    writer.write_record([
        "multi_code_fraction",
        "",
        &stats.multi_code_fraction.to_string(),
    ])?;
    writer.write_record(["extension_ratio", "", &stats.extension_ratio.to_string()])?;
    for category in ProvenanceCategory::ALL {
        writer.write_record([
            "category_total",
            &category.digit().to_string(),
            &stats.category_totals[&category].to_string(),
        ])?;
    }
    for ptype in ProvenanceType::ALL {
        writer.write_record([
            "type_total",
            &ptype.digit().to_string(),
            &stats.type_totals[&ptype].to_string(),
        ])?;
    }
    for (category, (mean, sd_pop, sd_sample)) in &stats.category_annual_spread {
        let key = category.digit().to_string();
        writer.write_record(["category_annual_mean", &key, &mean.to_string()])?;
        writer.write_record(["category_annual_sd_population", &key, &sd_pop.to_string()])?;
        writer.write_record(["category_annual_sd_sample", &key, &sd_sample.to_string()])?;
    }
    for (ptype, (mean, sd_pop, sd_sample)) in &stats.type_annual_spread {
        let key = ptype.digit().to_string();
        writer.write_record(["type_annual_mean", &key, &mean.to_string()])?;
        writer.write_record(["type_annual_sd_population", &key, &sd_pop.to_string()])?;
        writer.write_record(["type_annual_sd_sample", &key, &sd_sample.to_string()])?;
    }
    finish_writer(writer, &path)?;
    paths.push(path);

    Ok(paths)
}

/// Reads the five tables of [`write_stats`] back into an equal bundle.
pub fn read_stats(dir: &Path) -> Result<StatsBundle> {
    let path = dir.join(STATS_FILENAMES[0]);
    let mut expected = vec!["year".to_owned()];
    expected.extend(ProvenanceCategory::ALL.map(|c| format!("category_{}", c.digit())));
    let mut category_by_year = BTreeMap::new();
    for row in read_rows(&path, &expected)? {
        let year = parse_i32(&path, &row[0])?;
        for (index, category) in ProvenanceCategory::ALL.into_iter().enumerate() {
            category_by_year.insert((year, category), parse_u64(&path, &row[index + 1])?);
        }
    }

    let path = dir.join(STATS_FILENAMES[1]);
    let mut expected = vec!["year".to_owned()];
    expected.extend(ProvenanceType::ALL.map(|t| format!("type_{}", t.digit())));
    let mut type_by_year = BTreeMap::new();
    for row in read_rows(&path, &expected)? {
        let year = parse_i32(&path, &row[0])?;
        for (index, ptype) in ProvenanceType::ALL.into_iter().enumerate() {
            type_by_year.insert((year, ptype), parse_u64(&path, &row[index + 1])?);
        }
    }

    let path = dir.join(STATS_FILENAMES[2]);
    let mut expected = vec!["category".to_owned()];
    expected.extend(ProvenanceType::ALL.map(|t| format!("type_{}", t.digit())));
    let mut code_crosstab = BTreeMap::new();
    for row in read_rows(&path, &expected)? {
        let category = row[0]
            .parse::<u8>()
            .ok()
            .and_then(ProvenanceCategory::from_digit)
            .ok_or_else(|| Error::file_format(&path, format!("bad category `{}`", row[0])))?;
        for (index, ptype) in ProvenanceType::ALL.into_iter().enumerate() {
            code_crosstab.insert((category, ptype), parse_u64(&path, &row[index + 1])?);
        }
    }

    let path = dir.join(STATS_FILENAMES[3]);
    let file = File::open(&path).map_err(|e| Error::file(&path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers()?.clone();
    let mut columns = header.iter();
    if columns.next() != Some("year") {
        return Err(Error::file_format(&path, "first column must be `year`"));
    }
    let letters = columns
        .map(|s| {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(Error::file_format(
                    &path,
                    format!("bad letter column `{s}`"),
                )),
            }
        })
        .collect::<Result<Vec<char>>>()?;
    let mut letters_by_year = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != letters.len() + 1 {
            return Err(Error::file_format(&path, "row width disagrees with header"));
        }
        let year = parse_i32(&path, &row[0])?;
        for (index, &letter) in letters.iter().enumerate() {
            letters_by_year.insert((year, letter), parse_u64(&path, &row[index + 1])?);
        }
    }

    let path = dir.join(STATS_FILENAMES[4]);
    let mut total_records = 0;
    let mut multi_code_fraction = 0.0;
    let mut extension_ratio = 0.0;
    let mut category_totals = BTreeMap::new();
    let mut type_totals = BTreeMap::new();
    let mut category_spread: BTreeMap<ProvenanceCategory, [f64; 3]> = BTreeMap::new();
    let mut type_spread: BTreeMap<ProvenanceType, [f64; 3]> = BTreeMap::new();
    let category_key = |path: &Path, key: &str| {
        key.parse::<u8>()
            .ok()
            .and_then(ProvenanceCategory::from_digit)
            .ok_or_else(|| Error::file_format(path, format!("bad category key `{key}`")))
    };
    let type_key = |path: &Path, key: &str| {
        key.parse::<u8>()
            .ok()
            .and_then(ProvenanceType::from_digit)
            .ok_or_else(|| Error::file_format(path, format!("bad type key `{key}`")))
    };
    for row in read_rows(&path, &["statistic".into(), "key".into(), "value".into()])? {
        let value = &row[2];
        match row[0].as_str() {
            "total_records" => total_records = parse_u64(&path, value)?,
            "multi_code_fraction" => multi_code_fraction = parse_f64(&path, value)?,
            "extension_ratio" => extension_ratio = parse_f64(&path, value)?,
            "category_total" => {
                category_totals.insert(category_key(&path, &row[1])?, parse_u64(&path, value)?);
            }
            "type_total" => {
                type_totals.insert(type_key(&path, &row[1])?, parse_u64(&path, value)?);
            }
            "category_annual_mean" => {
                category_spread
                    .entry(category_key(&path, &row[1])?)
                    .or_default()[0] = parse_f64(&path, value)?;
            }
            "category_annual_sd_population" => {
                category_spread
                    .entry(category_key(&path, &row[1])?)
                    .or_default()[1] = parse_f64(&path, value)?;
            }
            "category_annual_sd_sample" => {
                category_spread
                    .entry(category_key(&path, &row[1])?)
                    .or_default()[2] = parse_f64(&path, value)?;
            }
            "type_annual_mean" => {
                type_spread.entry(type_key(&path, &row[1])?).or_default()[0] =
                    parse_f64(&path, value)?;
            }
            "type_annual_sd_population" => {
                type_spread.entry(type_key(&path, &row[1])?).or_default()[1] =
                    parse_f64(&path, value)?;
            }
            "type_annual_sd_sample" => {
                type_spread.entry(type_key(&path, &row[1])?).or_default()[2] =
                    parse_f64(&path, value)?;
            }
            other => {
                return Err(Error::file_format(
                    &path,
                    format!("unknown statistic `{other}`"),
                ))
            }
        }
    }

    Ok(StatsBundle {
        category_by_year,
        type_by_year,
        code_crosstab,
        letters_by_year,
        category_totals,
        type_totals,
        total_records,
        multi_code_fraction,
        extension_ratio,
        category_annual_spread: category_spread
            .into_iter()
            .map(|(k, [a, b, c])| (k, (a, b, c)))
            .collect(),
        type_annual_spread: type_spread
            .into_iter()
            .map(|(k, [a, b, c])| (k, (a, b, c)))
            .collect(),
    })
}

fn open_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish_writer(mut writer: csv::Writer<File>, path: &Path) -> Result<()> {
    writer.flush().map_err(|e| Error::file(path, e))
}

fn read_rows(path: &Path, expected_header: &[String]) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let expected: Vec<&str> = expected_header.iter().map(String::as_str).collect();
    check_header(path, &mut reader, &expected)?;
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != expected.len() {
            return Err(Error::file_format(path, "row width disagrees with header"));
        }
        rows.push(row.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

fn parse_i32(path: &Path, text: &str) -> Result<i32> {
    text.parse()
        .map_err(|_| Error::file_format(path, format!("bad year `{text}`")))
}

fn parse_u64(path: &Path, text: &str) -> Result<u64> {
    text.parse()
        .map_err(|_| Error::file_format(path, format!("bad count `{text}`")))
}

fn parse_f64(path: &Path, text: &str) -> Result<f64> {
    text.parse()
        .map_err(|_| Error::file_format(path, format!("bad number `{text}`")))
}
