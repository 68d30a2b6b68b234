//! End-to-end runs over generated multi-year corpora, checked against
//! hand-derived expectations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mesh_provenance::config::RunConfig;
use mesh_provenance::model::{HostCoverage, NewDescriptorRecord, ProvenanceCategory};
use mesh_provenance::notes::read_overrides_csv;
use mesh_provenance::pipeline::{classify, harvest, report, run_all};
use mesh_provenance::report::read_year_csv;
use mesh_testkit as fx;

fn config(data: &Path, out: &Path, window: (i32, i32, i32)) -> RunConfig {
    RunConfig {
        data_dir: data.to_path_buf(),
        descriptor_template: "desc{year}.xml".into(),
        scr_template: "supp{year}.xml".into(),
        first_year: window.0,
        last_year: window.1,
        reference_year: window.2,
        overrides_path: None,
        output_dir: out.to_path_buf(),
        log_level: "info".into(),
        jobs: Some(2),
    }
}

fn flatten(records: &BTreeMap<i32, Vec<NewDescriptorRecord>>) -> Vec<&NewDescriptorRecord> {
    records.values().flatten().collect()
}

#[test]
fn main_corpus_annotations_match_hand_derived_expectations() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::main_corpus()).unwrap();
    let cfg = config(&data, &dir.path().join("out"), fx::MAIN_WINDOW);

    let (harvested, classified, _) = run_all(&cfg).unwrap();

    let new_counts: BTreeMap<i32, usize> = harvested
        .per_year_new
        .iter()
        .map(|(y, ids)| (*y, ids.len()))
        .collect();
    let expected_counts: BTreeMap<i32, usize> = [
        (2015, 2),
        (2016, 2),
        (2017, 1),
        (2018, 2),
        (2019, 1),
        (2020, 5),
    ]
    .into();
    assert_eq!(new_counts, expected_counts);

    assert!(
        classified.review_items.is_empty(),
        "{:?}",
        classified.review_items
    );
    assert_eq!(classified.pending_records, 0);
    assert_eq!(
        classified.pmn_pattern_cases, 1,
        "only one record consults its public note"
    );
    assert_eq!(classified.pmn_auto_resolved, 1);

    let records = flatten(&classified.records);
    let expected = fx::main_expected();
    assert_eq!(records.len(), expected.len());
    for want in &expected {
        let got = records
            .iter()
            .find(|r| r.descriptor_id == want.id)
            .unwrap_or_else(|| panic!("{} missing from output", want.id));
        assert_eq!(got.name, want.name, "{}", want.id);
        assert_eq!(got.intro_year, want.intro_year, "{}", want.id);
        assert_eq!(got.category.digit(), want.category, "{}", want.id);
        let codes: Vec<String> = got.codes.iter().map(|c| c.to_string()).collect();
        assert_eq!(codes, want.codes, "{}", want.id);
        let host_ids: Vec<&str> = got.hosts.iter().map(|h| h.descriptor_id.as_str()).collect();
        assert_eq!(host_ids, want.host_ids, "{}", want.id);
        let host_names: Vec<&str> = got.hosts.iter().map(|h| h.name.as_str()).collect();
        assert_eq!(host_names, want.host_names, "{}", want.id);
        got.validate().unwrap();
    }

    let coverage = |id: &str| {
        records
            .iter()
            .find(|r| r.descriptor_id == id)
            .unwrap()
            .hosts
            .iter()
            .map(|h| h.coverage)
            .collect::<Vec<_>>()
    };
    assert_eq!(coverage("D910002"), [HostCoverage::ExplicitConcept]);
    assert_eq!(
        coverage("D910005"),
        [HostCoverage::ExplicitScr, HostCoverage::ExplicitScr]
    );
    assert_eq!(coverage("D910007"), [HostCoverage::ExplicitScr]);
    assert_eq!(
        coverage("D910003"),
        [HostCoverage::ImplicitPi, HostCoverage::ImplicitPi]
    );
}

#[test]
fn main_corpus_statistics_match_hand_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::main_corpus()).unwrap();
    let cfg = config(&data, &dir.path().join("out"), fx::MAIN_WINDOW);

    let (_, _, reported) = run_all(&cfg).unwrap();
    let stats = &reported.stats;

    assert_eq!(stats.total_records, 13);
    assert_eq!(stats.extension_ratio, 13.0 / fx::MAIN_BASELINE_COUNT as f64);
    assert_eq!(stats.multi_code_fraction, 0.2);

    let category_totals: Vec<u64> = ProvenanceCategory::ALL
        .iter()
        .map(|c| stats.category_totals[c])
        .collect();
    assert_eq!(category_totals, [1, 2, 8, 2]);

    let type_totals: Vec<u64> = stats.type_totals.values().copied().collect();
    assert_eq!(type_totals, [2, 1, 5, 2, 1, 4]);

    let cross = |cat: u8, ty: u8| {
        stats.code_crosstab[&(
            cat.to_string().parse().unwrap(),
            ty.to_string().parse().unwrap(),
        )]
    };
    assert_eq!(cross(1, 1), 1);
    assert_eq!(cross(2, 2), 2);
    assert_eq!(cross(3, 2), 3);
    assert_eq!(cross(3, 3), 2);
    assert_eq!(cross(3, 4), 1);
    assert_eq!(cross(3, 5), 4);
    assert_eq!(cross(4, 0), 2);
    assert_eq!(cross(1, 0), 0);

    assert_eq!(stats.letters_by_year[&(2020, 'G')], 3);
    assert_eq!(stats.letters_by_year[&(2020, 'C')], 2);
    assert_eq!(stats.letters_by_year[&(2016, 'B')], 1);
    assert_eq!(stats.letters_by_year[&(2015, 'E')], 1);
    assert_eq!(stats.letters_by_year[&(2017, 'E')], 0, "tables are dense");

    // Every stats file lands on disk.
    for path in &reported.stats_paths {
        assert!(path.is_file(), "{}", path.display());
    }
}

#[test]
fn year_csvs_round_trip_the_classify_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::main_corpus()).unwrap();
    let cfg = config(&data, &dir.path().join("out"), fx::MAIN_WINDOW);

    let outcome = classify(&cfg).unwrap();
    for (year, path) in &outcome.year_paths {
        let reread = read_year_csv(path).unwrap();
        assert_eq!(&reread, &outcome.records[year], "year {year}");
    }
}

#[test]
fn review_corpus_flags_typos_then_overrides_resolve_them() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::review_corpus()).unwrap();
    let out = dir.path().join("out");
    let cfg = config(&data, &out, fx::REVIEW_WINDOW);

    let first = classify(&cfg).unwrap();
    assert!(first.needs_review());
    assert_eq!(first.pending_records, 1);
    assert_eq!(first.review_items.len(), 2);

    let pmn_item = &first.review_items[0];
    assert_eq!(pmn_item.descriptor_id, "D810001");
    assert_eq!(pmn_item.query_term, "MISPELLED SYNDROME");
    assert_eq!(pmn_item.candidates[0].id, "C800001");
    assert!(pmn_item.candidates[0].score > 0.9 && pmn_item.candidates[0].score < 1.0);

    let pi_item = &first.review_items[1];
    assert_eq!(pi_item.descriptor_id, "D810002");
    assert_eq!(pi_item.query_term, "Green Sindrome");
    assert_eq!(pi_item.candidates[0].id, "D800002");

    // Unresolved public-note lookup falls through to the no-evidence category;
    // unresolved previous-indexing hosts leave the record pending.
    let d810001 = &first.records[&2018][0];
    assert_eq!(d810001.category, ProvenanceCategory::Emerging);
    let d810002 = &first.records[&2019][0];
    assert_eq!(d810002.category, ProvenanceCategory::NewPiConcept);
    assert!(d810002.hosts.is_empty() && d810002.codes.is_empty());
    assert!(d810002.is_pending());

    // The queue on disk mirrors the in-memory items.
    let review_rows = fs::read_to_string(&first.review_path).unwrap();
    assert!(review_rows.contains("D810001") && review_rows.contains("D810002"));

    let overrides_path = dir.path().join("overrides.csv");
    fs::write(&overrides_path, fx::review_overrides_csv()).unwrap();
    read_overrides_csv(&overrides_path).unwrap(); // the canned file parses
    let cfg2 = RunConfig {
        overrides_path: Some(overrides_path),
        ..cfg
    };

    let second = classify(&cfg2).unwrap();
    assert!(!second.needs_review());
    assert_eq!(second.pending_records, 0);

    let d810001 = &second.records[&2018][0];
    assert_eq!(d810001.category, ProvenanceCategory::OldScr);
    assert_eq!(d810001.hosts[0].descriptor_id, "D800001");
    assert_eq!(d810001.hosts[0].name, "Bar Disease");
    assert_eq!(d810001.codes.iter().next().unwrap().to_string(), "2.2");

    let d810002 = &second.records[&2019][0];
    assert_eq!(d810002.category, ProvenanceCategory::NewPiConcept);
    assert_eq!(d810002.hosts[0].descriptor_id, "D800002");
    assert_eq!(d810002.codes.iter().next().unwrap().to_string(), "3.2");

    let review_rows = fs::read_to_string(&second.review_path).unwrap();
    assert_eq!(review_rows.lines().count(), 1, "header only: {review_rows}");
}

#[test]
fn unchanging_corpus_yields_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::static_corpus()).unwrap();
    let cfg = config(&data, &dir.path().join("out"), fx::STATIC_WINDOW);

    let (harvested, classified, reported) = run_all(&cfg).unwrap();
    assert!(harvested.per_year_new.values().all(|ids| ids.is_empty()));
    assert!(classified.records.values().all(|r| r.is_empty()));
    for path in classified.year_paths.values() {
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 1, "{}", path.display());
    }
    assert_eq!(reported.stats.total_records, 0);
    assert_eq!(reported.stats.extension_ratio, 0.0);
    assert!(reported
        .stats
        .category_annual_spread
        .values()
        .all(|(mean, _, _)| *mean == 0.0));
}

#[test]
fn second_harvest_is_served_from_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::main_corpus()).unwrap();
    let cfg = config(&data, &dir.path().join("out"), fx::MAIN_WINDOW);

    let cold = harvest(&cfg).unwrap();
    assert_eq!(cold.cache_hits, 0);
    let warm = harvest(&cfg).unwrap();
    assert_eq!(warm.cache_hits, cold.reports.len());
    assert_eq!(warm.per_year_new, cold.per_year_new);
    assert_eq!(warm.reports, cold.reports);
}

#[test]
fn corrupt_cache_entry_falls_back_to_reparsing() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::main_corpus()).unwrap();
    let cfg = config(&data, &dir.path().join("out"), fx::MAIN_WINDOW);

    let cold = harvest(&cfg).unwrap();
    let victim = cfg.cache_dir().join("mesh_2016.json");
    assert!(victim.is_file());
    fs::write(&victim, "{ not json").unwrap();

    let warm = harvest(&cfg).unwrap();
    assert_eq!(warm.cache_hits, cold.reports.len() - 1);
    assert_eq!(warm.per_year_new, cold.per_year_new);
}

#[test]
fn staged_stages_write_the_same_bytes_as_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fx::write_corpus(&data, &fx::main_corpus()).unwrap();

    let one_shot = dir.path().join("one");
    run_all(&config(&data, &one_shot, fx::MAIN_WINDOW)).unwrap();

    let staged = dir.path().join("staged");
    let cfg = config(&data, &staged, fx::MAIN_WINDOW);
    harvest(&cfg).unwrap();
    classify(&cfg).unwrap();
    report(&cfg).unwrap();

    assert_eq!(csv_bytes(&one_shot), csv_bytes(&staged));
}

fn csv_bytes(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            out.insert(
                PathBuf::from(path.file_name().unwrap()),
                fs::read(&path).unwrap(),
            );
        }
    }
    assert!(!out.is_empty(), "no CSV files under {}", dir.display());
    out
}
