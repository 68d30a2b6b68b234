//! Domain model for annual MeSH releases.
//!
//! The central type is [`MeshVersion`]: one year's descriptors and
//! supplementary concept records (SCRs), indexed for the lookups the
//! classification stage needs. All types are plain immutable values once
//! constructed; constructors reject structurally invalid data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collapses internal whitespace runs to single spaces and trims the ends.
pub(crate) fn collapse_ws(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Strips one or more layers of matching surrounding quote pairs.
pub(crate) fn strip_outer_quotes(raw: &str) -> &str {
    let mut s = raw.trim();
    loop {
        let bytes = s.as_bytes();
        if bytes.len() >= 2
            && (bytes[0] == b'"' || bytes[0] == b'\'')
            && bytes[bytes.len() - 1] == bytes[0]
        {
            s = s[1..s.len() - 1].trim();
        } else {
            return s;
        }
    }
}

/// Canonical form used whenever two MeSH names are compared for identity:
/// lowercased, surrounding quotes removed, whitespace collapsed.
pub fn normalize_name(raw: &str) -> String {
    collapse_ws(strip_outer_quotes(raw)).to_lowercase()
}

/// Position of a descriptor in one of the sixteen MeSH category trees,
/// e.g. `C10.228.140.380`. The first dot-separated segment carries the
/// category letter; every following segment is numeric.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TreeNumber {
    segments: Vec<String>,
}

impl TreeNumber {
    pub fn parse(text: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidTreeNumber {
            text: text.to_owned(),
            reason: reason.to_owned(),
        };
        let parts: Vec<&str> = text.split('.').collect();
        let first = parts[0].as_bytes();
        if first.len() < 2
            || !first[0].is_ascii_uppercase()
            || !first[1..].iter().all(u8::is_ascii_digit)
        {
            return Err(invalid(
                "first segment must be an uppercase category letter followed by digits",
            ));
        }
        for part in &parts[1..] {
            if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(invalid("segments after the first must be non-empty digits"));
            }
        }
        Ok(TreeNumber {
            segments: parts.into_iter().map(str::to_owned).collect(),
        })
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    /// Number of dot-separated segments.
    pub fn depth(&self) -> usize {
        self.segments.len()
    }

    /// The MeSH category letter (`C` for `C10.228`).
    pub fn category_letter(&self) -> char {
        self.segments[0].as_bytes()[0] as char
    }

    /// The tree number one segment shorter, if any.
    pub fn parent(&self) -> Option<TreeNumber> {
        if self.segments.len() > 1 {
            Some(TreeNumber {
                segments: self.segments[..self.segments.len() - 1].to_vec(),
            })
        } else {
            None
        }
    }

    /// True when `self` denotes a proper hierarchical ancestor of `other`:
    /// strictly fewer segments, and equal to `other`'s leading segments.
    pub fn is_proper_prefix_of(&self, other: &TreeNumber) -> bool {
        self.segments.len() < other.segments.len()
            && self.segments[..] == other.segments[..self.segments.len()]
    }
}

/// Segment-wise proper-prefix test between two tree numbers.
pub fn is_tree_prefix(shorter: &TreeNumber, longer: &TreeNumber) -> bool {
    shorter.is_proper_prefix_of(longer)
}

impl fmt::Display for TreeNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("."))
    }
}

impl fmt::Debug for TreeNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeNumber({self})")
    }
}

impl FromStr for TreeNumber {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TreeNumber::parse(s)
    }
}

impl TryFrom<String> for TreeNumber {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        TreeNumber::parse(&value)
    }
}

impl From<TreeNumber> for String {
    fn from(value: TreeNumber) -> String {
        value.to_string()
    }
}

/// One entry term of a concept. Text is whitespace-normalized and non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    text: String,
    is_preferred: bool,
}

impl Term {
    pub fn new(text: &str, is_preferred: bool) -> Result<Self> {
        let text = collapse_ws(text);
        if text.is_empty() {
            return Err(Error::InvalidTerm("empty after whitespace cleanup".into()));
        }
        Ok(Term { text, is_preferred })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn is_preferred(&self) -> bool {
        self.is_preferred
    }
}

/// How a subordinate concept relates to its record's preferred concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConceptRelation {
    Preferred,
    Narrower,
    Broader,
    Related,
}

/// A unit of meaning shared by synonymous terms. Concepts keep their
/// identifier when they move between descriptors across releases, which is
/// what makes cross-year concept lookups possible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    concept_id: String,
    terms: Vec<Term>,
    relation_to_preferred: ConceptRelation,
}

impl Concept {
    pub fn new(
        concept_id: &str,
        terms: Vec<Term>,
        relation_to_preferred: ConceptRelation,
    ) -> Result<Self> {
        let concept_id = concept_id.trim().to_owned();
        let invalid = |reason: &str| Error::InvalidConcept {
            concept_id: concept_id.clone(),
            reason: reason.to_owned(),
        };
        if concept_id.is_empty() {
            return Err(Error::InvalidConcept {
                concept_id: String::new(),
                reason: "empty concept id".into(),
            });
        }
        match terms.iter().filter(|t| t.is_preferred()).count() {
            0 => return Err(invalid("no preferred term")),
            1 => {}
            n => return Err(invalid(&format!("{n} preferred terms, expected exactly 1"))),
        }
        Ok(Concept {
            concept_id,
            terms,
            relation_to_preferred,
        })
    }

    pub fn concept_id(&self) -> &str {
        &self.concept_id
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn relation_to_preferred(&self) -> ConceptRelation {
        self.relation_to_preferred
    }

    /// Text of the single preferred term.
    pub fn preferred_term(&self) -> &str {
        self.terms
            .iter()
            .find(|t| t.is_preferred())
            .map(Term::text)
            .expect("constructor guarantees one preferred term")
    }
}

/// A main-heading record of one release: a preferred concept, optional
/// subordinate concepts, tree positions, and the two free-text note fields
/// used to recover indexing history (public MeSH note and previous-indexing
/// list).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    descriptor_id: String,
    name: String,
    preferred_concept: Concept,
    subordinate_concepts: Vec<Concept>,
    tree_numbers: Vec<TreeNumber>,
    pmn_text: Option<String>,
    pi_notes: Vec<String>,
}

impl Descriptor {
    pub fn new(
        descriptor_id: &str,
        name: &str,
        preferred_concept: Concept,
        subordinate_concepts: Vec<Concept>,
        tree_numbers: Vec<TreeNumber>,
        pmn_text: Option<String>,
        pi_notes: Vec<String>,
    ) -> Result<Self> {
        let descriptor_id = descriptor_id.trim().to_owned();
        let invalid = |reason: String| Error::InvalidDescriptor {
            descriptor_id: descriptor_id.clone(),
            reason,
        };
        if descriptor_id.is_empty() {
            return Err(Error::InvalidDescriptor {
                descriptor_id: String::new(),
                reason: "empty descriptor id".into(),
            });
        }
        let name = collapse_ws(name);
        if name.is_empty() {
            return Err(invalid("empty name".into()));
        }
        check_concept_structure(&preferred_concept, &subordinate_concepts, |reason| {
            invalid(reason)
        })?;
        Ok(Descriptor {
            descriptor_id,
            name,
            preferred_concept,
            subordinate_concepts,
            tree_numbers,
            pmn_text,
            pi_notes,
        })
    }

    pub fn descriptor_id(&self) -> &str {
        &self.descriptor_id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn preferred_concept(&self) -> &Concept {
        &self.preferred_concept
    }

    pub fn subordinate_concepts(&self) -> &[Concept] {
        &self.subordinate_concepts
    }

    /// Preferred concept first, then subordinates in record order.
    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        std::iter::once(&self.preferred_concept).chain(self.subordinate_concepts.iter())
    }

    pub fn tree_numbers(&self) -> &[TreeNumber] {
        &self.tree_numbers
    }

    pub fn pmn_text(&self) -> Option<&str> {
        self.pmn_text.as_deref()
    }

    pub fn pi_notes(&self) -> &[String] {
        &self.pi_notes
    }

    /// Distinct category letters over all tree numbers, e.g. `{C, F}` for a
    /// descriptor filed under both diseases and psychiatry trees. Empty for
    /// descriptors outside the category trees (check tags and the like).
    pub fn mesh_category_letters(&self) -> BTreeSet<char> {
        self.tree_numbers
            .iter()
            .map(TreeNumber::category_letter)
            .collect()
    }
}

/// Shared structural checks for records holding one preferred concept plus
/// subordinates: relation flags must agree and concept ids must be unique.
fn check_concept_structure(
    preferred: &Concept,
    subordinates: &[Concept],
    invalid: impl Fn(String) -> Error,
) -> Result<()> {
    if preferred.relation_to_preferred() != ConceptRelation::Preferred {
        return Err(invalid(format!(
            "preferred concept `{}` is not flagged as preferred",
            preferred.concept_id()
        )));
    }
    let mut seen = BTreeSet::new();
    seen.insert(preferred.concept_id());
    for sub in subordinates {
        if sub.relation_to_preferred() == ConceptRelation::Preferred {
            return Err(invalid(format!(
                "subordinate concept `{}` is flagged as preferred",
                sub.concept_id()
            )));
        }
        if !seen.insert(sub.concept_id()) {
            return Err(invalid(format!(
                "concept `{}` listed twice",
                sub.concept_id()
            )));
        }
    }
    Ok(())
}

/// A supplementary concept record: a substance or rare-disease entry kept
/// outside the descriptor hierarchy and mapped onto one or more descriptors
/// for indexing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrRecord {
    scr_id: String,
    preferred_concept: Concept,
    subordinate_concepts: Vec<Concept>,
    mapped_descriptor_ids: Vec<String>,
}

impl ScrRecord {
    pub fn new(
        scr_id: &str,
        preferred_concept: Concept,
        subordinate_concepts: Vec<Concept>,
        mapped_descriptor_ids: Vec<String>,
    ) -> Result<Self> {
        let scr_id = scr_id.trim().to_owned();
        let invalid = |reason: String| Error::InvalidScr {
            scr_id: scr_id.clone(),
            reason,
        };
        if scr_id.is_empty() {
            return Err(Error::InvalidScr {
                scr_id: String::new(),
                reason: "empty record id".into(),
            });
        }
        if mapped_descriptor_ids.is_empty() {
            return Err(invalid("no descriptor mappings".into()));
        }
        check_concept_structure(&preferred_concept, &subordinate_concepts, invalid)?;
        Ok(ScrRecord {
            scr_id,
            preferred_concept,
            subordinate_concepts,
            mapped_descriptor_ids,
        })
    }

    pub fn scr_id(&self) -> &str {
        &self.scr_id
    }

    /// Preferred term of the preferred concept; the record's display name.
    pub fn name(&self) -> &str {
        self.preferred_concept.preferred_term()
    }

    pub fn preferred_concept(&self) -> &Concept {
        &self.preferred_concept
    }

    pub fn subordinate_concepts(&self) -> &[Concept] {
        &self.subordinate_concepts
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        std::iter::once(&self.preferred_concept).chain(self.subordinate_concepts.iter())
    }

    pub fn mapped_descriptor_ids(&self) -> &[String] {
        &self.mapped_descriptor_ids
    }
}

/// One annual release, fully indexed. Concept-to-record indexes enforce that
/// a concept id belongs to at most one descriptor; the same rule for SCRs is
/// soft (first record wins, with a warning) because supplementary data is
/// curated less strictly.
#[derive(Debug, Clone)]
pub struct MeshVersion {
    year: i32,
    descriptors: BTreeMap<String, Descriptor>,
    scrs: BTreeMap<String, ScrRecord>,
    concept_to_descriptor: BTreeMap<String, String>,
    concept_to_scr: BTreeMap<String, String>,
    name_to_descriptors: BTreeMap<String, BTreeSet<String>>,
    name_to_scrs: BTreeMap<String, BTreeSet<String>>,
}

impl MeshVersion {
    /// Indexes a parsed release. Returns the version plus non-fatal warnings
    /// (SCR concept collisions, mappings onto absent descriptors).
    pub fn build(
        year: i32,
        descriptors: Vec<Descriptor>,
        scrs: Vec<ScrRecord>,
    ) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();

        let mut descriptor_map = BTreeMap::new();
        for d in descriptors {
            let id = d.descriptor_id().to_owned();
            if descriptor_map.insert(id.clone(), d).is_some() {
                return Err(Error::DuplicateRecord { year, id });
            }
        }
        let mut scr_map = BTreeMap::new();
        for s in scrs {
            let id = s.scr_id().to_owned();
            if scr_map.insert(id.clone(), s).is_some() {
                return Err(Error::DuplicateRecord { year, id });
            }
        }

        let mut concept_to_descriptor: BTreeMap<String, String> = BTreeMap::new();
        let mut name_to_descriptors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, d) in &descriptor_map {
            for concept in d.concepts() {
                if let Some(first) =
                    concept_to_descriptor.insert(concept.concept_id().to_owned(), id.clone())
                {
                    if first != *id {
                        return Err(Error::DuplicateConcept {
                            year,
                            concept_id: concept.concept_id().to_owned(),
                            first,
                            second: id.clone(),
                        });
                    }
                }
                for term in concept.terms() {
                    let key = normalize_name(term.text());
                    if !key.is_empty() {
                        name_to_descriptors
                            .entry(key)
                            .or_default()
                            .insert(id.clone());
                    }
                }
            }
        }

        let mut concept_to_scr: BTreeMap<String, String> = BTreeMap::new();
        let mut name_to_scrs: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, s) in &scr_map {
            for mapped in s.mapped_descriptor_ids() {
                if !descriptor_map.contains_key(mapped) {
                    warnings.push(format!(
                        "{year}: SCR `{id}` maps to descriptor `{mapped}` absent from this version"
                    ));
                }
            }
            for concept in s.concepts() {
                let entry = concept_to_scr.entry(concept.concept_id().to_owned());
                match entry {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert(id.clone());
                    }
                    std::collections::btree_map::Entry::Occupied(o) => {
                        if o.get() != id {
                            warnings.push(format!(
                                "{year}: concept `{}` appears in SCRs `{}` and `{id}`; keeping `{}`",
                                concept.concept_id(),
                                o.get(),
                                o.get()
                            ));
                        }
                    }
                }
                for term in concept.terms() {
                    let key = normalize_name(term.text());
                    if !key.is_empty() {
                        name_to_scrs.entry(key).or_default().insert(id.clone());
                    }
                }
            }
        }

        Ok((
            MeshVersion {
                year,
                descriptors: descriptor_map,
                scrs: scr_map,
                concept_to_descriptor,
                concept_to_scr,
                name_to_descriptors,
                name_to_scrs,
            },
            warnings,
        ))
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn descriptors(&self) -> &BTreeMap<String, Descriptor> {
        &self.descriptors
    }

    pub fn scrs(&self) -> &BTreeMap<String, ScrRecord> {
        &self.scrs
    }

    pub fn descriptor_count(&self) -> usize {
        self.descriptors.len()
    }

    pub fn scr_count(&self) -> usize {
        self.scrs.len()
    }

    pub fn descriptor(&self, id: &str) -> Option<&Descriptor> {
        self.descriptors.get(id)
    }

    pub fn scr(&self, id: &str) -> Option<&ScrRecord> {
        self.scrs.get(id)
    }

    pub fn contains_descriptor(&self, id: &str) -> bool {
        self.descriptors.contains_key(id)
    }

    /// The descriptor whose concept list contains `concept_id`, if any.
    pub fn descriptor_holding_concept(&self, concept_id: &str) -> Option<&Descriptor> {
        self.concept_to_descriptor
            .get(concept_id)
            .and_then(|id| self.descriptors.get(id))
    }

    /// The SCR whose concept list contains `concept_id`, if any.
    pub fn scr_holding_concept(&self, concept_id: &str) -> Option<&ScrRecord> {
        self.concept_to_scr
            .get(concept_id)
            .and_then(|id| self.scrs.get(id))
    }

    /// Descriptor ids whose terms include `term` under name normalization.
    pub fn descriptors_named(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.name_to_descriptors.get(&normalize_name(term))
    }

    /// SCR ids whose terms include `term` under name normalization.
    pub fn scrs_named(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.name_to_scrs.get(&normalize_name(term))
    }

    /// Re-checks every index entry against the records it points at.
    /// Intended for cache-deserialization paths and tests.
    pub fn verify_integrity(&self) -> Result<()> {
        let fail = |reason: String| {
            Error::InvalidArgument(format!(
                "version {} failed integrity check: {reason}",
                self.year
            ))
        };
        for (concept_id, descriptor_id) in &self.concept_to_descriptor {
            let Some(d) = self.descriptors.get(descriptor_id) else {
                return Err(fail(format!(
                    "concept index points at missing descriptor `{descriptor_id}`"
                )));
            };
            if !d.concepts().any(|c| c.concept_id() == concept_id) {
                return Err(fail(format!(
                    "descriptor `{descriptor_id}` does not hold concept `{concept_id}`"
                )));
            }
        }
        for (concept_id, scr_id) in &self.concept_to_scr {
            let Some(s) = self.scrs.get(scr_id) else {
                return Err(fail(format!(
                    "concept index points at missing SCR `{scr_id}`"
                )));
            };
            if !s.concepts().any(|c| c.concept_id() == concept_id) {
                return Err(fail(format!(
                    "SCR `{scr_id}` does not hold concept `{concept_id}`"
                )));
            }
        }
        for (name, ids) in &self.name_to_descriptors {
            for id in ids {
                if !self.descriptors.contains_key(id) {
                    return Err(fail(format!(
                        "name index entry `{name}` points at missing descriptor `{id}`"
                    )));
                }
            }
        }
        for (name, ids) in &self.name_to_scrs {
            for id in ids {
                if !self.scrs.contains_key(id) {
                    return Err(fail(format!(
                        "name index entry `{name}` points at missing SCR `{id}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Hierarchical relation of a new descriptor to one previous host, judged in
/// the reference version's trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationType {
    /// The host sits above the new descriptor in some tree.
    Ancestor,
    /// The host sits below the new descriptor in some tree.
    Descendant,
    /// Both present, but no prefix pair in either direction.
    Unrelated,
    /// The host is absent from the reference version.
    Undefined,
}

/// Separation between two descriptors in the undirected parent-child graph,
/// shifted so that siblings are at distance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Finite(u32),
    /// No path: the two descriptors sit in disconnected tree regions.
    Infinite,
    /// Not computable: the host is absent from the reference version.
    Undefined,
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(n) => write!(f, "{n}"),
            Distance::Infinite => f.write_str("infinite"),
            Distance::Undefined => f.write_str("undefined"),
        }
    }
}

/// Where a new descriptor's content lived before promotion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProvenanceCategory {
    /// Category 1: its preferred concept already existed inside a descriptor.
    OldConcept,
    /// Category 2: its content existed as a supplementary record.
    OldScr,
    /// Category 3: new concept, previous hosts recovered from indexing notes.
    NewPiConcept,
    /// Category 4: no previous host at all.
    Emerging,
}

impl ProvenanceCategory {
    pub const ALL: [ProvenanceCategory; 4] = [
        ProvenanceCategory::OldConcept,
        ProvenanceCategory::OldScr,
        ProvenanceCategory::NewPiConcept,
        ProvenanceCategory::Emerging,
    ];

    pub fn digit(self) -> u8 {
        match self {
            ProvenanceCategory::OldConcept => 1,
            ProvenanceCategory::OldScr => 2,
            ProvenanceCategory::NewPiConcept => 3,
            ProvenanceCategory::Emerging => 4,
        }
    }

    pub fn from_digit(digit: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.digit() == digit)
    }
}

impl fmt::Display for ProvenanceCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digit())
    }
}

impl FromStr for ProvenanceCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<u8>()
            .ok()
            .and_then(Self::from_digit)
            .ok_or_else(|| Error::InvalidToken {
                what: "provenance category",
                token: s.to_owned(),
            })
    }
}

/// How a new descriptor relates to a previous host in the reference trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProvenanceType {
    /// Type 0: no host (reserved for emerging descriptors).
    Emersion,
    /// Type 1: the host no longer exists in the reference version.
    Succession,
    /// Type 2: direct child of the host.
    Subdivision,
    /// Type 3: deeper descendant of the host.
    Submersion,
    /// Type 4: the new descriptor ended up above its host.
    Overtopping,
    /// Type 5: no hierarchical relation to the host.
    Detachment,
}

impl ProvenanceType {
    pub const ALL: [ProvenanceType; 6] = [
        ProvenanceType::Emersion,
        ProvenanceType::Succession,
        ProvenanceType::Subdivision,
        ProvenanceType::Submersion,
        ProvenanceType::Overtopping,
        ProvenanceType::Detachment,
    ];

    pub fn digit(self) -> u8 {
        match self {
            ProvenanceType::Emersion => 0,
            ProvenanceType::Succession => 1,
            ProvenanceType::Subdivision => 2,
            ProvenanceType::Submersion => 3,
            ProvenanceType::Overtopping => 4,
            ProvenanceType::Detachment => 5,
        }
    }

    pub fn from_digit(digit: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.digit() == digit)
    }
}

impl fmt::Display for ProvenanceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digit())
    }
}

impl FromStr for ProvenanceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<u8>()
            .ok()
            .and_then(Self::from_digit)
            .ok_or_else(|| Error::InvalidToken {
                what: "provenance type",
                token: s.to_owned(),
            })
    }
}

/// A category/type pair rendered as `category.type`, e.g. `3.5`. Emersion
/// (type 0) pairs with the emerging category (4) and with nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProvenanceCode {
    category: ProvenanceCategory,
    ptype: ProvenanceType,
}

impl ProvenanceCode {
    pub fn new(category: ProvenanceCategory, ptype: ProvenanceType) -> Result<Self> {
        let emerging = category == ProvenanceCategory::Emerging;
        let emersion = ptype == ProvenanceType::Emersion;
        if emerging != emersion {
            return Err(Error::InvalidCode {
                category: category.digit(),
                ptype: ptype.digit(),
            });
        }
        Ok(ProvenanceCode { category, ptype })
    }

    pub fn category(self) -> ProvenanceCategory {
        self.category
    }

    pub fn ptype(self) -> ProvenanceType {
        self.ptype
    }
}

impl fmt::Display for ProvenanceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.category.digit(), self.ptype.digit())
    }
}

impl FromStr for ProvenanceCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidToken {
            what: "provenance code",
            token: s.to_owned(),
        };
        let (cat, typ) = s.split_once('.').ok_or_else(invalid)?;
        let category = cat.parse::<ProvenanceCategory>().map_err(|_| invalid())?;
        let ptype = typ.parse::<ProvenanceType>().map_err(|_| invalid())?;
        ProvenanceCode::new(category, ptype)
    }
}

/// How a previous host was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HostCoverage {
    /// The new descriptor's preferred concept was found inside the host.
    ExplicitConcept,
    /// The host was mapped from a supplementary record.
    ExplicitScr,
    /// The host was named in previous-indexing notes.
    ImplicitPi,
}

impl fmt::Display for HostCoverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HostCoverage::ExplicitConcept => "explicit_concept",
            HostCoverage::ExplicitScr => "explicit_scr",
            HostCoverage::ImplicitPi => "implicit_pi",
        })
    }
}

impl FromStr for HostCoverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit_concept" => Ok(HostCoverage::ExplicitConcept),
            "explicit_scr" => Ok(HostCoverage::ExplicitScr),
            "implicit_pi" => Ok(HostCoverage::ImplicitPi),
            _ => Err(Error::InvalidToken {
                what: "host coverage",
                token: s.to_owned(),
            }),
        }
    }
}

/// A descriptor that hosted the new descriptor's content in the version
/// preceding its introduction. The name is resolved in that older version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreviousHost {
    pub descriptor_id: String,
    pub name: String,
    pub coverage: HostCoverage,
}

/// The classification result for one new descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct NewDescriptorRecord {
    pub descriptor_id: String,
    /// Name in the reference version.
    pub name: String,
    pub intro_year: i32,
    pub category: ProvenanceCategory,
    pub hosts: Vec<PreviousHost>,
    pub codes: BTreeSet<ProvenanceCode>,
    /// Tree numbers in the reference version.
    pub tree_numbers: Vec<TreeNumber>,
    /// Category letters in the reference version.
    pub mesh_category_letters: BTreeSet<char>,
}

impl NewDescriptorRecord {
    /// True for note-derived records whose every candidate host failed to
    /// resolve; such records keep their category but carry no hosts or codes
    /// until an override settles them.
    pub fn is_pending(&self) -> bool {
        self.category != ProvenanceCategory::Emerging && self.hosts.is_empty()
    }

    /// Structural consistency: codes match the category, host lists match
    /// what the category promises. Pending records (see [`Self::is_pending`])
    /// fail this check by design.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidRecord {
            descriptor_id: self.descriptor_id.clone(),
            reason,
        };
        for code in &self.codes {
            if code.category() != self.category {
                return Err(fail(format!(
                    "code {code} does not match category {}",
                    self.category
                )));
            }
        }
        match self.category {
            ProvenanceCategory::OldConcept => {
                if self.hosts.len() != 1 {
                    return Err(fail(format!(
                        "old-concept records have exactly one host, found {}",
                        self.hosts.len()
                    )));
                }
                if self.hosts[0].coverage != HostCoverage::ExplicitConcept {
                    return Err(fail("old-concept host must be concept-covered".into()));
                }
            }
            ProvenanceCategory::Emerging => {
                if !self.hosts.is_empty() {
                    return Err(fail("emerging records carry no hosts".into()));
                }
                let expected =
                    ProvenanceCode::new(ProvenanceCategory::Emerging, ProvenanceType::Emersion)
                        .expect("4.0 is a valid code");
                if self.codes.len() != 1 || !self.codes.contains(&expected) {
                    return Err(fail("emerging records carry exactly the code 4.0".into()));
                }
            }
            _ => {
                if self.hosts.is_empty() {
                    return Err(fail("host-backed record without hosts".into()));
                }
                if self.codes.is_empty() {
                    return Err(fail("host-backed record without codes".into()));
                }
            }
        }
        Ok(())
    }
}

/// Which kind of manual resolution a review row asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReviewKind {
    /// Resolve a note-quoted name to a supplementary record.
    PmnScr,
    /// Resolve a previous-indexing term to a descriptor.
    PiHost,
}

impl fmt::Display for ReviewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReviewKind::PmnScr => "pmn_scr",
            ReviewKind::PiHost => "pi_host",
        })
    }
}

impl FromStr for ReviewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pmn_scr" => Ok(ReviewKind::PmnScr),
            "pi_host" => Ok(ReviewKind::PiHost),
            _ => Err(Error::InvalidToken {
                what: "review kind",
                token: s.to_owned(),
            }),
        }
    }
}

/// One operator decision feeding back into a rerun: for the named descriptor
/// and review kind, use these record ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverrideEntry {
    pub descriptor_id: String,
    pub kind: ReviewKind,
    pub resolved_ids: Vec<String>,
}
