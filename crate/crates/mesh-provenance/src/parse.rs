//! Streaming parsers for the NLM MeSH XML release files.
//!
//! The annual descriptor file runs to hundreds of megabytes, so both parsers
//! work event-by-event over a [`BufRead`] and never hold more than the record
//! currently being assembled. Elements the model does not need (annotations,
//! history notes, qualifier lists, ...) are recognized by falling into a
//! catch-all tag and their text is skipped without unescaping.
//!
//! Malformed XML is fatal and reported with a byte offset. A record that is
//! structurally broken (missing id, missing name, no preferred concept) is
//! dropped with a warning instead; one bad record must not sink a 700 MB
//! parse.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::mem;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    collapse_ws, Concept, ConceptRelation, Descriptor, MeshVersion, ScrRecord, Term, TreeNumber,
};

/// Non-fatal findings from one parse pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarnings {
    /// Records dropped entirely: `(record label, reason)`.
    pub skipped: Vec<(String, String)>,
    /// Field-level repairs and drops inside records that were kept.
    pub notes: Vec<String>,
}

impl ParseWarnings {
    pub fn is_empty(&self) -> bool {
        self.skipped.is_empty() && self.notes.is_empty()
    }

    pub fn merge(&mut self, other: ParseWarnings) {
        self.skipped.extend(other.skipped);
        self.notes.extend(other.notes);
    }
}

/// Summary of loading one year: counts match the indexed version exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub year: i32,
    pub descriptor_count: usize,
    pub scr_count: usize,
    pub skipped_records: Vec<(String, String)>,
    pub notes: Vec<String>,
}

/// Parses one descriptor release file (`desc{year}.xml`).
pub fn parse_descriptor_file<R: BufRead>(input: R) -> Result<(Vec<Descriptor>, ParseWarnings)> {
    let mut state = StreamState::default();
    stream(input, &mut state)?;
    Ok((state.descriptors, state.warnings))
}

/// Parses one supplementary-record release file (`supp{year}.xml`).
pub fn parse_scr_file<R: BufRead>(input: R) -> Result<(Vec<ScrRecord>, ParseWarnings)> {
    let mut state = StreamState::default();
    stream(input, &mut state)?;
    Ok((state.scrs, state.warnings))
}

/// Loads and indexes one complete year from its two release files.
pub fn load_version(
    year: i32,
    descriptor_path: &Path,
    scr_path: &Path,
) -> Result<(MeshVersion, ParseReport)> {
    let open = |path: &Path| -> Result<BufReader<File>> {
        Ok(BufReader::new(
            File::open(path).map_err(|e| Error::file(path, e))?,
        ))
    };
    let in_file = |path: &Path, err: Error| match err {
        Error::Xml { .. } => Error::file_format(path, err.to_string()),
        other => other,
    };

    let (descriptors, mut warnings) =
        parse_descriptor_file(open(descriptor_path)?).map_err(|e| in_file(descriptor_path, e))?;
    let (scrs, scr_warnings) = parse_scr_file(open(scr_path)?).map_err(|e| in_file(scr_path, e))?;
    warnings.merge(scr_warnings);

    let (version, build_warnings) = MeshVersion::build(year, descriptors, scrs)?;
    warnings.notes.extend(build_warnings);
    let report = ParseReport {
        year,
        descriptor_count: version.descriptor_count(),
        scr_count: version.scr_count(),
        skipped_records: warnings.skipped,
        notes: warnings.notes,
    };
    Ok((version, report))
}

/// The element names the state machine distinguishes. Everything else maps
/// to [`Tag::Other`] and only contributes stack depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    DescriptorRecord,
    DescriptorUi,
    DescriptorName,
    StringEl,
    ConceptList,
    Concept,
    ConceptUi,
    ConceptRelationList,
    ConceptRelation,
    Concept1Ui,
    Concept2Ui,
    TermList,
    TermEl,
    TreeNumberList,
    TreeNumberEl,
    PublicMeshNote,
    PreviousIndexingList,
    PreviousIndexing,
    SupplementalRecord,
    SupplementalRecordUi,
    HeadingMappedToList,
    HeadingMappedTo,
    DescriptorReferredTo,
    Other,
}

fn tag_of(name: &[u8]) -> Tag {
    match name {
        b"DescriptorRecord" => Tag::DescriptorRecord,
        b"DescriptorUI" => Tag::DescriptorUi,
        b"DescriptorName" => Tag::DescriptorName,
        b"String" => Tag::StringEl,
        b"ConceptList" => Tag::ConceptList,
        b"Concept" => Tag::Concept,
        b"ConceptUI" => Tag::ConceptUi,
        b"ConceptRelationList" => Tag::ConceptRelationList,
        b"ConceptRelation" => Tag::ConceptRelation,
        b"Concept1UI" => Tag::Concept1Ui,
        b"Concept2UI" => Tag::Concept2Ui,
        b"TermList" => Tag::TermList,
        b"Term" => Tag::TermEl,
        b"TreeNumberList" => Tag::TreeNumberList,
        b"TreeNumber" => Tag::TreeNumberEl,
        b"PublicMeSHNote" => Tag::PublicMeshNote,
        b"PreviousIndexingList" => Tag::PreviousIndexingList,
        b"PreviousIndexing" => Tag::PreviousIndexing,
        b"SupplementalRecord" => Tag::SupplementalRecord,
        b"SupplementalRecordUI" => Tag::SupplementalRecordUi,
        b"HeadingMappedToList" => Tag::HeadingMappedToList,
        b"HeadingMappedTo" => Tag::HeadingMappedTo,
        b"DescriptorReferredTo" => Tag::DescriptorReferredTo,
        _ => Tag::Other,
    }
}

/// Destination for the text of the leaf element currently open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sink {
    RecordUi,
    RecordName,
    Tree,
    Pmn,
    Pi,
    MappedUi,
    ConceptUi,
    TermText,
    RelationC1,
    RelationC2,
}

fn ends_with(stack: &[Tag], pattern: &[Tag]) -> bool {
    stack.len() >= pattern.len() && stack[stack.len() - pattern.len()..] == *pattern
}

#[derive(Debug, Default)]
struct ConceptDraft {
    ui: Option<String>,
    preferred: bool,
    terms: Vec<(String, bool)>,
}

#[derive(Debug, Default)]
struct OpenTerm {
    text: Option<String>,
    preferred: bool,
}

#[derive(Debug, Default)]
struct RelationDraft {
    name: Option<String>,
    concept2: Option<String>,
}

/// Concept sub-records are built identically inside descriptor and
/// supplementary records, so one accumulator serves both.
#[derive(Debug, Default)]
struct ConceptAccum {
    done: Vec<ConceptDraft>,
    open: Option<ConceptDraft>,
    open_term: Option<OpenTerm>,
    open_relation: Option<RelationDraft>,
    /// Concept2UI -> declared relation, filled from any relation list in the
    /// record (NLM files them under the preferred concept).
    relations: Vec<(String, ConceptRelation)>,
}

impl ConceptAccum {
    fn start_concept(&mut self, preferred: bool) {
        if let Some(open) = self.open.take() {
            self.done.push(open);
        }
        self.open = Some(ConceptDraft {
            preferred,
            ..Default::default()
        });
    }

    fn finish_concept(&mut self) {
        if let Some(mut open) = self.open.take() {
            if let Some(term) = self.open_term.take() {
                if let Some(text) = term.text {
                    open.terms.push((text, term.preferred));
                }
            }
            self.done.push(open);
        }
    }

    fn finish_term(&mut self) {
        if let (Some(term), Some(open)) = (self.open_term.take(), self.open.as_mut()) {
            if let Some(text) = term.text {
                open.terms.push((text, term.preferred));
            }
        }
    }

    fn finish_relation(&mut self) {
        if let Some(rel) = self.open_relation.take() {
            if let (Some(name), Some(c2)) = (rel.name, rel.concept2) {
                let mapped = match name.as_str() {
                    "NRW" => ConceptRelation::Narrower,
                    "BRD" => ConceptRelation::Broader,
                    _ => ConceptRelation::Related,
                };
                self.relations.push((c2, mapped));
            }
        }
    }
}

#[derive(Debug, Default)]
struct DescriptorDraft {
    ui: Option<String>,
    name: Option<String>,
    trees: Vec<String>,
    pmn: Option<String>,
    pi: Vec<String>,
}

#[derive(Debug, Default)]
struct ScrDraft {
    ui: Option<String>,
    mapped: Vec<String>,
}

#[derive(Debug, Default)]
struct StreamState {
    stack: Vec<Tag>,
    sink: Option<(Sink, usize)>,
    scratch: String,
    desc: Option<DescriptorDraft>,
    scr: Option<ScrDraft>,
    concepts: ConceptAccum,
    descriptors: Vec<Descriptor>,
    scrs: Vec<ScrRecord>,
    warnings: ParseWarnings,
    ordinal: usize,
}

impl StreamState {
    fn in_record(&self) -> bool {
        self.desc.is_some() || self.scr.is_some()
    }

    fn wants_text(&self) -> bool {
        self.sink.is_some()
    }

    fn on_start(&mut self, e: &BytesStart<'_>, pos: u64) -> Result<()> {
        let tag = tag_of(e.local_name().as_ref());
        self.stack.push(tag);
        match tag {
            Tag::DescriptorRecord if self.desc.is_none() => {
                self.ordinal += 1;
                self.desc = Some(DescriptorDraft::default());
                self.concepts = ConceptAccum::default();
            }
            Tag::SupplementalRecord if self.scr.is_none() => {
                self.ordinal += 1;
                self.scr = Some(ScrDraft::default());
                self.concepts = ConceptAccum::default();
            }
            Tag::Concept
                if self.in_record()
                    && ends_with(&self.stack, &[Tag::ConceptList, Tag::Concept]) =>
            {
                let preferred = attr_value(e, b"PreferredConceptYN", pos)?.as_deref() == Some("Y");
                self.concepts.start_concept(preferred);
            }
            Tag::TermEl
                if self.in_record()
                    && ends_with(&self.stack, &[Tag::Concept, Tag::TermList, Tag::TermEl]) =>
            {
                let preferred =
                    attr_value(e, b"ConceptPreferredTermYN", pos)?.as_deref() == Some("Y");
                self.concepts.open_term = Some(OpenTerm {
                    text: None,
                    preferred,
                });
            }
            Tag::ConceptRelation
                if self.in_record()
                    && ends_with(
                        &self.stack,
                        &[Tag::ConceptRelationList, Tag::ConceptRelation],
                    ) =>
            {
                self.concepts.open_relation = Some(RelationDraft {
                    name: attr_value(e, b"RelationName", pos)?,
                    concept2: None,
                });
            }
            _ => {}
        }
        if let Some(sink) = self.sink_for_stack() {
            self.sink = Some((sink, self.stack.len()));
            self.scratch.clear();
        }
        Ok(())
    }

    fn sink_for_stack(&self) -> Option<Sink> {
        let s = &self.stack;
        if self.desc.is_some() {
            if ends_with(s, &[Tag::DescriptorRecord, Tag::DescriptorUi]) {
                return Some(Sink::RecordUi);
            }
            if ends_with(
                s,
                &[Tag::DescriptorRecord, Tag::DescriptorName, Tag::StringEl],
            ) {
                return Some(Sink::RecordName);
            }
            if ends_with(
                s,
                &[
                    Tag::DescriptorRecord,
                    Tag::TreeNumberList,
                    Tag::TreeNumberEl,
                ],
            ) {
                return Some(Sink::Tree);
            }
            if ends_with(s, &[Tag::DescriptorRecord, Tag::PublicMeshNote]) {
                return Some(Sink::Pmn);
            }
            if ends_with(
                s,
                &[
                    Tag::DescriptorRecord,
                    Tag::PreviousIndexingList,
                    Tag::PreviousIndexing,
                ],
            ) {
                return Some(Sink::Pi);
            }
        }
        if self.scr.is_some() {
            if ends_with(s, &[Tag::SupplementalRecord, Tag::SupplementalRecordUi]) {
                return Some(Sink::RecordUi);
            }
            if ends_with(
                s,
                &[
                    Tag::HeadingMappedToList,
                    Tag::HeadingMappedTo,
                    Tag::DescriptorReferredTo,
                    Tag::DescriptorUi,
                ],
            ) {
                return Some(Sink::MappedUi);
            }
        }
        if self.in_record() {
            if ends_with(s, &[Tag::ConceptList, Tag::Concept, Tag::ConceptUi]) {
                return Some(Sink::ConceptUi);
            }
            if ends_with(
                s,
                &[Tag::Concept, Tag::TermList, Tag::TermEl, Tag::StringEl],
            ) {
                return Some(Sink::TermText);
            }
            if ends_with(s, &[Tag::ConceptRelation, Tag::Concept1Ui]) {
                return Some(Sink::RelationC1);
            }
            if ends_with(s, &[Tag::ConceptRelation, Tag::Concept2Ui]) {
                return Some(Sink::RelationC2);
            }
        }
        None
    }

    fn on_text(&mut self, text: &str) {
        self.scratch.push_str(text);
    }

    fn on_end(&mut self) {
        if let Some((sink, depth)) = self.sink {
            if self.stack.len() == depth {
                let text = collapse_ws(&mem::take(&mut self.scratch));
                self.sink = None;
                if !text.is_empty() {
                    self.commit(sink, text);
                }
            }
        }
        let Some(tag) = self.stack.pop() else { return };
        match tag {
            Tag::Concept if ends_with(&self.stack, &[Tag::ConceptList]) => {
                self.concepts.finish_concept();
            }
            Tag::TermEl => self.concepts.finish_term(),
            Tag::ConceptRelation => self.concepts.finish_relation(),
            Tag::DescriptorRecord => {
                if let Some(draft) = self.desc.take() {
                    let concepts = mem::take(&mut self.concepts);
                    self.finish_descriptor(draft, concepts);
                }
            }
            Tag::SupplementalRecord => {
                if let Some(draft) = self.scr.take() {
                    let concepts = mem::take(&mut self.concepts);
                    self.finish_scr(draft, concepts);
                }
            }
            _ => {}
        }
    }

    fn commit(&mut self, sink: Sink, text: String) {
        match sink {
            Sink::RecordUi => {
                if let Some(d) = self.desc.as_mut() {
                    d.ui.get_or_insert(text);
                } else if let Some(s) = self.scr.as_mut() {
                    s.ui.get_or_insert(text);
                }
            }
            Sink::RecordName => {
                if let Some(d) = self.desc.as_mut() {
                    d.name.get_or_insert(text);
                }
            }
            Sink::Tree => {
                if let Some(d) = self.desc.as_mut() {
                    d.trees.push(text);
                }
            }
            Sink::Pmn => {
                if let Some(d) = self.desc.as_mut() {
                    d.pmn.get_or_insert(text);
                }
            }
            Sink::Pi => {
                if let Some(d) = self.desc.as_mut() {
                    d.pi.push(text);
                }
            }
            Sink::MappedUi => {
                if let Some(s) = self.scr.as_mut() {
                    // A leading `*` marks the principal mapping; the star is
                    // not part of the descriptor id.
                    let id = text.strip_prefix('*').unwrap_or(&text).to_owned();
                    if !id.is_empty() && !s.mapped.contains(&id) {
                        s.mapped.push(id);
                    }
                }
            }
            Sink::ConceptUi => {
                if let Some(open) = self.concepts.open.as_mut() {
                    open.ui.get_or_insert(text);
                }
            }
            Sink::TermText => {
                if let Some(term) = self.concepts.open_term.as_mut() {
                    term.text.get_or_insert(text);
                }
            }
            Sink::RelationC1 => {} // concept 1 is always the preferred concept
            Sink::RelationC2 => {
                if let Some(rel) = self.concepts.open_relation.as_mut() {
                    rel.concept2.get_or_insert(text);
                }
            }
        }
    }

    fn finish_descriptor(&mut self, draft: DescriptorDraft, concepts: ConceptAccum) {
        let label = draft
            .ui
            .clone()
            .or_else(|| draft.name.clone())
            .unwrap_or_else(|| format!("record #{}", self.ordinal));
        let skip = |warnings: &mut ParseWarnings, reason: String| {
            warnings.skipped.push((label.clone(), reason));
        };

        let Some(ui) = draft.ui else {
            skip(&mut self.warnings, "missing DescriptorUI".into());
            return;
        };
        let Some(name) = draft.name else {
            skip(&mut self.warnings, "missing DescriptorName".into());
            return;
        };
        let (preferred, subordinate) =
            match assemble_concepts(concepts, &label, &mut self.warnings.notes) {
                Ok(pair) => pair,
                Err(reason) => {
                    skip(&mut self.warnings, reason);
                    return;
                }
            };

        let mut trees = Vec::new();
        for raw in draft.trees {
            match TreeNumber::parse(&raw) {
                Ok(t) => trees.push(t),
                Err(e) => self
                    .warnings
                    .notes
                    .push(format!("{label}: dropped tree number: {e}")),
            }
        }

        match Descriptor::new(
            &ui,
            &name,
            preferred,
            subordinate,
            trees,
            draft.pmn,
            draft.pi,
        ) {
            Ok(d) => self.descriptors.push(d),
            Err(e) => skip(&mut self.warnings, e.to_string()),
        }
    }

    fn finish_scr(&mut self, draft: ScrDraft, concepts: ConceptAccum) {
        let label = draft
            .ui
            .clone()
            .unwrap_or_else(|| format!("record #{}", self.ordinal));
        let skip = |warnings: &mut ParseWarnings, reason: String| {
            warnings.skipped.push((label.clone(), reason));
        };

        let Some(ui) = draft.ui else {
            skip(&mut self.warnings, "missing SupplementalRecordUI".into());
            return;
        };
        if draft.mapped.is_empty() {
            skip(&mut self.warnings, "no descriptor mappings".into());
            return;
        }
        let (preferred, subordinate) =
            match assemble_concepts(concepts, &label, &mut self.warnings.notes) {
                Ok(pair) => pair,
                Err(reason) => {
                    skip(&mut self.warnings, reason);
                    return;
                }
            };
        match ScrRecord::new(&ui, preferred, subordinate, draft.mapped) {
            Ok(s) => self.scrs.push(s),
            Err(e) => skip(&mut self.warnings, e.to_string()),
        }
    }
}

/// Turns the raw concept drafts of one record into a validated preferred
/// concept plus subordinates. A record without a usable preferred concept is
/// unrecoverable, which the `Err(reason)` arm reports.
fn assemble_concepts(
    accum: ConceptAccum,
    label: &str,
    notes: &mut Vec<String>,
) -> std::result::Result<(Concept, Vec<Concept>), String> {
    let relations: Vec<(String, ConceptRelation)> = accum.relations;
    let mut preferred_draft = None;
    let mut subordinate_drafts = Vec::new();
    for draft in accum.done {
        if draft.preferred && preferred_draft.is_none() {
            preferred_draft = Some(draft);
        } else {
            if draft.preferred {
                notes.push(format!(
                    "{label}: extra concept flagged preferred, treating `{}` as subordinate",
                    draft.ui.as_deref().unwrap_or("?")
                ));
            }
            subordinate_drafts.push(draft);
        }
    }
    let Some(head) = preferred_draft else {
        return Err("no concept flagged PreferredConceptYN=\"Y\"".into());
    };
    let preferred = draft_to_concept(head, ConceptRelation::Preferred, label, notes)
        .map_err(|reason| format!("preferred concept unusable: {reason}"))?;

    let mut subordinates = Vec::new();
    for draft in subordinate_drafts {
        let relation = draft
            .ui
            .as_deref()
            .and_then(|ui| {
                relations
                    .iter()
                    .find(|(c2, _)| c2 == ui)
                    .map(|(_, rel)| *rel)
            })
            .unwrap_or(ConceptRelation::Related);
        match draft_to_concept(draft, relation, label, notes) {
            Ok(c) => subordinates.push(c),
            Err(reason) => notes.push(format!("{label}: dropped subordinate concept: {reason}")),
        }
    }
    Ok((preferred, subordinates))
}

fn draft_to_concept(
    draft: ConceptDraft,
    relation: ConceptRelation,
    label: &str,
    notes: &mut Vec<String>,
) -> std::result::Result<Concept, String> {
    let Some(ui) = draft.ui else {
        return Err("missing ConceptUI".into());
    };
    let mut kept: Vec<(String, bool)> = draft
        .terms
        .into_iter()
        .filter(|(text, _)| !collapse_ws(text).is_empty())
        .collect();
    if kept.is_empty() {
        return Err(format!("concept `{ui}` has no terms"));
    }
    let preferred_count = kept.iter().filter(|(_, p)| *p).count();
    if preferred_count == 0 {
        kept[0].1 = true;
        notes.push(format!(
            "{label}: concept `{ui}` had no preferred term, promoted the first"
        ));
    } else if preferred_count > 1 {
        let mut seen_preferred = false;
        for entry in &mut kept {
            if entry.1 {
                if seen_preferred {
                    entry.1 = false;
                } else {
                    seen_preferred = true;
                }
            }
        }
        notes.push(format!(
            "{label}: concept `{ui}` had {preferred_count} preferred terms, kept the first"
        ));
    }
    let terms: Vec<Term> = kept
        .into_iter()
        .map(|(text, preferred)| Term::new(&text, preferred).expect("text checked non-empty"))
        .collect();
    Concept::new(&ui, terms, relation).map_err(|e| e.to_string())
}

fn attr_value(e: &BytesStart<'_>, key: &[u8], pos: u64) -> Result<Option<String>> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| Error::Xml {
            offset: pos,
            message: err.to_string(),
        })?;
        if attr.key.local_name().as_ref() == key {
            let value = attr.unescape_value().map_err(|err| Error::Xml {
                offset: pos,
                message: err.to_string(),
            })?;
            return Ok(Some(value.into_owned()));
        }
    }
    Ok(None)
}

fn stream<R: BufRead>(input: R, state: &mut StreamState) -> Result<()> {
    let mut reader = Reader::from_reader(input);
    let config = reader.config_mut();
    config.trim_text(true);
    config.expand_empty_elements = true;

    let mut buf = Vec::new();
    loop {
        let pos = reader.buffer_position();
        match reader.read_event_into(&mut buf) {
            Ok(Event::Start(e)) => state.on_start(&e, pos)?,
            Ok(Event::End(_)) => state.on_end(),
            Ok(Event::Text(t)) => {
                // Unescape only text we are going to keep; skipped fields
                // (annotations and the like) can be megabytes long.
                if state.wants_text() {
                    let text = t.unescape().map_err(|err| Error::Xml {
                        offset: reader.error_position(),
                        message: err.to_string(),
                    })?;
                    state.on_text(&text);
                }
            }
            Ok(Event::CData(c)) => {
                if state.wants_text() {
                    state.on_text(&String::from_utf8_lossy(c.as_ref()));
                }
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(err) => {
                return Err(Error::Xml {
                    offset: reader.error_position(),
                    message: err.to_string(),
                })
            }
        }
        buf.clear();
    }
    Ok(())
}
