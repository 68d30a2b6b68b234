//! Mining the free-text indexing notes of new descriptors.
//!
//! Two note fields matter. The public MeSH note sometimes states outright
//! that the content "was indexed under" an older supplementary record, and
//! the previous-indexing list names the descriptors that used to receive the
//! content's articles, usually with a year period attached. Both are
//! hand-written strings, so everything here degrades softly: what cannot be
//! extracted or resolved automatically becomes a review item an operator can
//! settle through an override file on a later run.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::model::{
    collapse_ws, normalize_name, strip_outer_quotes, MeshVersion, OverrideEntry, ReviewKind,
};

/// The name a public-MeSH-note sentence quotes as the pre-promotion record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmnExtraction {
    pub scr_term: String,
    /// The sentence the name came from, for warnings and logs.
    pub raw_sentence: String,
}

/// Matches the first `X was indexed under Y` sentence of a note, where
/// sentences are semicolon-separated. Returns `None` for notes that carry no
/// such statement (the overwhelmingly common case).
pub fn parse_pmn(pmn_text: &str) -> Option<PmnExtraction> {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    let pattern = PATTERN.get_or_init(|| {
        Regex::new(r"(?i)^\s*(?<x>.+?)\s+(?:was|were)\s+indexed\s+under\s+\S").unwrap()
    });
    for sentence in pmn_text.split(';') {
        if let Some(caps) = pattern.captures(sentence) {
            let term = clean_extracted_term(caps.name("x").unwrap().as_str());
            if term.is_empty() {
                // The whole subject was a year marker; not a usable name.
                continue;
            }
            return Some(PmnExtraction {
                scr_term: term,
                raw_sentence: sentence.trim().to_owned(),
            });
        }
    }
    None
}

/// Drops leading year markers (`91;`, `(2005)`, `2018:`) and surrounding
/// quotes from a name captured out of note text.
fn clean_extracted_term(raw: &str) -> String {
    static LEADING_YEARS: OnceLock<Regex> = OnceLock::new();
    let leading = LEADING_YEARS
        .get_or_init(|| Regex::new(r"^[\s;:,]*(?:\(?\d{2,4}\)?(?:[\s;:,]+|$))*").unwrap());
    let rest = &raw[leading.find(raw).map_or(0, |m| m.end())..];
    collapse_ws(strip_outer_quotes(rest))
}

/// One previous-indexing mention: a descriptor name and, when stated, the
/// years during which it received the content's articles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiEntry {
    pub descriptor_term: String,
    pub start_year: Option<i32>,
    pub end_year: Option<i32>,
    /// The chunk of note text the entry came from.
    pub raw: String,
}

/// Parses a record's previous-indexing notes into entries. Conjunctions
/// (`and`, `&`) are split before term extraction, so each side gets its own
/// entry and only an explicitly attached period carries years. Malformed
/// periods are reported and the entry keeps no years.
pub fn parse_pi(notes: &[String]) -> (Vec<PiEntry>, Vec<String>) {
    static CONJUNCTION: OnceLock<Regex> = OnceLock::new();
    let conjunction = CONJUNCTION.get_or_init(|| Regex::new(r"(?i)\s+and\s+|\s*&\s*").unwrap());

    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for note in notes {
        for chunk in conjunction.split(note) {
            if let Some(entry) = parse_pi_chunk(chunk, &mut warnings) {
                entries.push(entry);
            }
        }
    }
    (entries, warnings)
}

fn parse_pi_chunk(chunk: &str, warnings: &mut Vec<String>) -> Option<PiEntry> {
    static PERIOD: OnceLock<Regex> = OnceLock::new();
    static DIGIT_PARENS: OnceLock<Regex> = OnceLock::new();
    let period = PERIOD.get_or_init(|| {
        Regex::new(r"^(?<term>.*?)\s*\(\s*(?<y1>\d{4})(?:\s*-\s*(?<y2>\d{4}))?\s*\)\s*$").unwrap()
    });
    let digit_parens = DIGIT_PARENS
        .get_or_init(|| Regex::new(r"^(?<term>.*?)\s*\((?<body>[^()]*\d[^()]*)\)\s*$").unwrap());

    let raw = chunk.trim();
    if raw.is_empty() {
        return None;
    }
    let finish = |warnings: &mut Vec<String>,
                  term: &str,
                  start: Option<i32>,
                  end: Option<i32>|
     -> Option<PiEntry> {
        let term = clean_extracted_term(term)
            .trim_end_matches([',', ';'])
            .trim()
            .to_owned();
        if term.is_empty() {
            warnings.push(format!("previous-indexing chunk `{raw}` has no term text"));
            return None;
        }
        Some(PiEntry {
            descriptor_term: term,
            start_year: start,
            end_year: end,
            raw: raw.to_owned(),
        })
    };

    if let Some(caps) = period.captures(raw) {
        let start: i32 = caps["y1"].parse().expect("four digits");
        let end: Option<i32> = caps
            .name("y2")
            .map(|m| m.as_str().parse().expect("four digits"));
        let end_or_start = end.unwrap_or(start);
        if start > end_or_start {
            warnings.push(format!(
                "previous-indexing chunk `{raw}` has a reversed year period; years ignored"
            ));
            return finish(warnings, &caps["term"], None, None);
        }
        return finish(warnings, &caps["term"], Some(start), Some(end_or_start));
    }
    if let Some(caps) = digit_parens.captures(raw) {
        warnings.push(format!(
            "previous-indexing chunk `{raw}` has an unparseable year period `({})`; years ignored",
            &caps["body"]
        ));
        return finish(warnings, &caps["term"], None, None);
    }
    finish(warnings, raw, None, None)
}

/// Keeps the entries that were still hosting the content immediately before
/// promotion: an entry with no stated end runs through `version0_year`, and
/// only the entries with the latest effective end survive. Duplicate names
/// (under normalization) are kept once, first spelling wins.
pub fn select_current_pi_hosts(entries: &[PiEntry], version0_year: i32) -> Vec<String> {
    let effective = |e: &PiEntry| e.end_year.unwrap_or(version0_year);
    let Some(latest) = entries.iter().map(effective).max() else {
        return Vec::new();
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for entry in entries {
        if effective(entry) == latest && seen.insert(normalize_name(&entry.descriptor_term)) {
            out.push(entry.descriptor_term.clone());
        }
    }
    out
}

/// Similarity in `[0, 1]`: one minus the Levenshtein distance over the longer
/// length, after lowercasing, mapping punctuation to spaces, and collapsing
/// whitespace. Two empty strings count as identical.
pub fn string_similarity(a: &str, b: &str) -> f64 {
    let na: Vec<char> = similarity_key(a).chars().collect();
    let nb: Vec<char> = similarity_key(b).chars().collect();
    let longest = na.len().max(nb.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&na, &nb) as f64 / longest as f64
}

fn similarity_key(s: &str) -> String {
    let spaced: String = s
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    collapse_ws(&spaced).to_lowercase()
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = diagonal + usize::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = substitution.min(diagonal + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// One ranked suggestion offered to the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub term: String,
    pub score: f64,
}

/// A question the pipeline could not settle automatically. Serialized to the
/// review CSV; answered by an [`OverrideEntry`] on a later run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewItem {
    pub descriptor_id: String,
    pub kind: ReviewKind,
    pub query_term: String,
    pub candidates: Vec<Candidate>,
}

/// Outcome of resolving one extracted name against a version's records.
#[derive(Debug, Clone, PartialEq)]
pub enum TermResolution {
    /// Exactly one record matches under name normalization.
    Exact(String),
    /// An operator override supplied these ids.
    Confirmed(Vec<String>),
    /// No exact match; best near-matches for review, highest score first.
    Suggestions(Vec<Candidate>),
    /// Nothing comes close (or there are no records to search).
    NoCandidates,
}

/// Ranks pool terms by their best similarity against any query, keeping the
/// top `keep` distinct record ids. Candidates scoring zero are useless and
/// never returned. Length bounds prune most of the pool before any distance
/// is computed.
fn rank_candidates<'p>(
    queries: &[&str],
    pool: impl Iterator<Item = (&'p str, &'p str)>,
    keep: usize,
) -> Vec<Candidate> {
    let query_keys: Vec<Vec<char>> = queries
        .iter()
        .map(|q| similarity_key(q).chars().collect())
        .collect();
    let mut best: Vec<Candidate> = Vec::new();
    for (id, term) in pool {
        let term_key: Vec<char> = similarity_key(term).chars().collect();
        let floor = if best.len() == keep {
            best.last().expect("non-empty").score
        } else {
            0.0
        };
        let mut score = 0.0f64;
        for q in &query_keys {
            let longest = q.len().max(term_key.len());
            if longest == 0 {
                continue;
            }
            let upper_bound = 1.0 - q.len().abs_diff(term_key.len()) as f64 / longest as f64;
            if upper_bound < floor || upper_bound <= score {
                continue;
            }
            let sim = 1.0 - levenshtein(q, &term_key) as f64 / longest as f64;
            score = score.max(sim);
        }
        if score <= 0.0 || score < floor {
            continue;
        }
        if let Some(existing) = best.iter_mut().find(|c| c.id == id) {
            if score > existing.score {
                existing.score = score;
                existing.term = term.to_owned();
            }
        } else {
            best.push(Candidate {
                id: id.to_owned(),
                term: term.to_owned(),
                score,
            });
        }
        best.sort_by(|x, y| {
            y.score
                .total_cmp(&x.score)
                .then_with(|| x.id.cmp(&y.id))
                .then_with(|| x.term.cmp(&y.term))
        });
        best.truncate(keep);
    }
    best
}

const SUGGESTION_LIMIT: usize = 5;

/// Resolves a note-quoted name to a supplementary record of `version0`.
/// Auto-acceptance requires an unambiguous exact normalized match; anything
/// fuzzier is only ever suggested. The new descriptor's own name joins the
/// queries because notes frequently quote it verbatim.
pub fn resolve_term_to_scr(
    term: &str,
    version0: &MeshVersion,
    new_descriptor_name: &str,
) -> TermResolution {
    if version0.scr_count() == 0 {
        return TermResolution::NoCandidates;
    }
    if let Some(ids) = version0.scrs_named(term) {
        if ids.len() == 1 {
            return TermResolution::Exact(ids.iter().next().expect("len 1").clone());
        }
        // Multiple records share the name: ambiguity always goes to review,
        // and the exact matches surface at the top with score 1.
    }
    let pool = version0.scrs().iter().flat_map(|(id, s)| {
        s.concepts()
            .flat_map(|c| c.terms())
            .map(move |t| (id.as_str(), t.text()))
    });
    let candidates = rank_candidates(&[term, new_descriptor_name], pool, SUGGESTION_LIMIT);
    if candidates.is_empty() {
        TermResolution::NoCandidates
    } else {
        TermResolution::Suggestions(candidates)
    }
}

/// Resolves a previous-indexing term to a descriptor of `version0`, with the
/// same auto-acceptance rule as [`resolve_term_to_scr`].
pub fn resolve_term_to_descriptor(term: &str, version0: &MeshVersion) -> TermResolution {
    if version0.descriptor_count() == 0 {
        return TermResolution::NoCandidates;
    }
    if let Some(ids) = version0.descriptors_named(term) {
        if ids.len() == 1 {
            return TermResolution::Exact(ids.iter().next().expect("len 1").clone());
        }
    }
    let pool = version0.descriptors().iter().flat_map(|(id, d)| {
        d.concepts()
            .flat_map(|c| c.terms())
            .map(move |t| (id.as_str(), t.text()))
    });
    let candidates = rank_candidates(&[term], pool, SUGGESTION_LIMIT);
    if candidates.is_empty() {
        TermResolution::NoCandidates
    } else {
        TermResolution::Suggestions(candidates)
    }
}

/// Operator decisions loaded from the override CSV, keyed by descriptor and
/// review kind. A descriptor may have at most one row per kind.
#[derive(Debug, Clone, Default)]
pub struct OverrideSet {
    map: BTreeMap<String, BTreeMap<ReviewKind, Vec<String>>>,
}

impl OverrideSet {
    pub fn from_entries(entries: Vec<OverrideEntry>) -> Result<Self> {
        let mut map: BTreeMap<String, BTreeMap<ReviewKind, Vec<String>>> = BTreeMap::new();
        for entry in entries {
            if entry.resolved_ids.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "override for `{}` ({}) lists no ids",
                    entry.descriptor_id, entry.kind
                )));
            }
            let by_kind = map.entry(entry.descriptor_id.clone()).or_default();
            if by_kind.insert(entry.kind, entry.resolved_ids).is_some() {
                return Err(Error::OverrideDuplicate {
                    descriptor_id: entry.descriptor_id,
                    kind: entry.kind,
                });
            }
        }
        Ok(OverrideSet { map })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_entries(read_overrides_csv(path)?)
    }

    pub fn lookup(&self, descriptor_id: &str, kind: ReviewKind) -> Option<&[String]> {
        self.map
            .get(descriptor_id)
            .and_then(|by_kind| by_kind.get(&kind))
            .map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, ReviewKind)> {
        self.map
            .iter()
            .flat_map(|(id, by_kind)| by_kind.keys().map(move |k| (id.as_str(), *k)))
    }

    pub fn len(&self) -> usize {
        self.map.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Replaces pending resolutions (suggestions or no candidates) with the
/// operator's confirmed ids. Every confirmed id must exist according to
/// `id_exists`; a wrong id in an override file is a fatal mistake, not a
/// warning. Settled resolutions are never overridden.
pub fn apply_overrides(
    mut resolutions: BTreeMap<(String, ReviewKind), TermResolution>,
    overrides: &OverrideSet,
    id_exists: impl Fn(ReviewKind, &str) -> bool,
) -> Result<BTreeMap<(String, ReviewKind), TermResolution>> {
    for ((descriptor_id, kind), state) in resolutions.iter_mut() {
        let Some(ids) = overrides.lookup(descriptor_id, *kind) else {
            continue;
        };
        match state {
            TermResolution::Suggestions(_) | TermResolution::NoCandidates => {
                for id in ids {
                    if !id_exists(*kind, id) {
                        return Err(Error::OverrideUnknownId {
                            descriptor_id: descriptor_id.clone(),
                            kind: *kind,
                            id: id.clone(),
                        });
                    }
                }
                *state = TermResolution::Confirmed(ids.to_vec());
            }
            TermResolution::Exact(_) | TermResolution::Confirmed(_) => {
                log::warn!("override for `{descriptor_id}` ({kind}) ignored: already resolved");
            }
        }
    }
    Ok(resolutions)
}

pub const REVIEW_CSV_HEADER: [&str; 7] = [
    "descriptor_id",
    "kind",
    "query_term",
    "rank",
    "candidate_id",
    "candidate_term",
    "score",
];

pub const OVERRIDES_CSV_HEADER: [&str; 3] = ["descriptor_id", "kind", "resolved_ids"];

/// Writes review items, one row per candidate, ranks starting at 1. Items
/// are sorted by descriptor, kind, and query so reruns produce identical
/// bytes.
pub fn write_review_csv(path: &Path, items: &[ReviewItem]) -> Result<()> {
    let mut sorted: Vec<&ReviewItem> = items.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.descriptor_id, a.kind, &a.query_term).cmp(&(&b.descriptor_id, b.kind, &b.query_term))
    });
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(REVIEW_CSV_HEADER)?;
    for item in sorted {
        for (index, candidate) in item.candidates.iter().enumerate() {
            writer.write_record([
                item.descriptor_id.as_str(),
                &item.kind.to_string(),
                &item.query_term,
                &(index + 1).to_string(),
                &candidate.id,
                &candidate.term,
                &candidate.score.to_string(),
            ])?;
        }
    }
    writer.flush().map_err(|e| Error::file(path, e))?;
    Ok(())
}

/// Reads a review CSV back; consecutive rows sharing descriptor, kind, and
/// query fold into one item.
pub fn read_review_csv(path: &Path) -> Result<Vec<ReviewItem>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    check_header(path, &mut reader, &REVIEW_CSV_HEADER)?;
    let mut items: Vec<ReviewItem> = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != REVIEW_CSV_HEADER.len() {
            return Err(Error::file_format(
                path,
                format!(
                    "expected {} fields, found {}",
                    REVIEW_CSV_HEADER.len(),
                    row.len()
                ),
            ));
        }
        let kind: ReviewKind = row[1].parse()?;
        let candidate = Candidate {
            id: row[4].to_owned(),
            term: row[5].to_owned(),
            score: row[6]
                .parse()
                .map_err(|_| Error::file_format(path, format!("bad score `{}`", &row[6])))?,
        };
        match items.last_mut() {
            Some(last)
                if last.descriptor_id == row[0]
                    && last.kind == kind
                    && last.query_term == row[2] =>
            {
                last.candidates.push(candidate);
            }
            _ => items.push(ReviewItem {
                descriptor_id: row[0].to_owned(),
                kind,
                query_term: row[2].to_owned(),
                candidates: vec![candidate],
            }),
        }
    }
    Ok(items)
}

/// Reads the operator override CSV. `resolved_ids` holds one or more ids
/// joined with semicolons.
pub fn read_overrides_csv(path: &Path) -> Result<Vec<OverrideEntry>> {
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    check_header(path, &mut reader, &OVERRIDES_CSV_HEADER)?;
    let mut entries = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != OVERRIDES_CSV_HEADER.len() {
            return Err(Error::file_format(
                path,
                format!(
                    "expected {} fields, found {}",
                    OVERRIDES_CSV_HEADER.len(),
                    row.len()
                ),
            ));
        }
        let resolved_ids: Vec<String> = row[2]
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
        if resolved_ids.is_empty() {
            return Err(Error::file_format(
                path,
                format!("override row for `{}` lists no ids", &row[0]),
            ));
        }
        entries.push(OverrideEntry {
            descriptor_id: row[0].to_owned(),
            kind: row[1].parse()?,
            resolved_ids,
        });
    }
    Ok(entries)
}

pub(crate) fn check_header<R: std::io::Read>(
    path: &Path,
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<()> {
    let header = reader.headers()?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(Error::file_format(
            path,
            format!("unexpected header {found:?}, expected {expected:?}"),
        ));
    }
    Ok(())
}
