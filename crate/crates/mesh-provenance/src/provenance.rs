//! Classification of new descriptors against the version that preceded them.
//!
//! [`Annotator::annotate`] is the heart of the crate. Given a descriptor in
//! its introduction year and the version published the year before (version 0
//! from the descriptor's point of view), it works out where the content lived
//! before promotion — an old concept, a supplementary record, descriptors
//! named in previous-indexing notes, or nowhere — and derives one code per
//! recovered host from the tree relation between the two in the reference
//! version.

use std::collections::VecDeque;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::{
    Descriptor, Distance, HostCoverage, MeshVersion, NewDescriptorRecord, PreviousHost,
    ProvenanceCategory, ProvenanceCode, ProvenanceType, RelationType, ReviewKind,
};
use crate::notes::{
    apply_overrides, parse_pi, parse_pmn, resolve_term_to_descriptor, resolve_term_to_scr,
    select_current_pi_hosts, Candidate, OverrideSet, ReviewItem, TermResolution,
};

/// Judges where `host` sits relative to `new_descriptor` using their tree
/// numbers. The second flag reports the anomaly of prefix evidence in both
/// directions at once (possible when descriptors hold several tree numbers);
/// callers should warn and side with `Ancestor`.
fn relation_eval(new_descriptor: &Descriptor, host: &Descriptor) -> (RelationType, bool) {
    let mut above = false;
    let mut below = false;
    for t0 in host.tree_numbers() {
        for t1 in new_descriptor.tree_numbers() {
            if t0.is_proper_prefix_of(t1) {
                above = true;
            }
            if t1.is_proper_prefix_of(t0) {
                below = true;
            }
        }
    }
    match (above, below) {
        (true, dual) => (RelationType::Ancestor, dual),
        (false, true) => (RelationType::Descendant, false),
        (false, false) => (RelationType::Unrelated, false),
    }
}

/// Tree relation of a new descriptor to one previous host, judged in
/// `reference`. The new descriptor must be present there; a host that is not
/// yields [`RelationType::Undefined`].
pub fn relation_type(new_id: &str, host_id: &str, reference: &MeshVersion) -> Result<RelationType> {
    let new_descriptor = reference
        .descriptor(new_id)
        .ok_or_else(|| Error::UnknownDescriptor {
            id: new_id.to_owned(),
            year: reference.year(),
        })?;
    let Some(host) = reference.descriptor(host_id) else {
        return Ok(RelationType::Undefined);
    };
    Ok(relation_eval(new_descriptor, host).0)
}

/// Number of levels strictly between an ancestor host and the new descriptor,
/// minimized over all prefix pairs of their tree numbers: 0 when the new
/// descriptor is a direct child somewhere, more when the host sits further
/// up. Errors when no tree of `host` lies above any tree of `new_descriptor`.
pub fn ancestor_gap(new_descriptor: &Descriptor, host: &Descriptor) -> Result<u32> {
    let mut best: Option<u32> = None;
    for t0 in host.tree_numbers() {
        for t1 in new_descriptor.tree_numbers() {
            if t0.is_proper_prefix_of(t1) {
                let gap = (t1.depth() - t0.depth() - 1) as u32;
                best = Some(best.map_or(gap, |b| b.min(gap)));
            }
        }
    }
    best.ok_or_else(|| Error::NotAncestor {
        d1: new_descriptor.descriptor_id().to_owned(),
        d0: host.descriptor_id().to_owned(),
    })
}

/// Maps a host relation to the type digit of the resulting code. `gap` is
/// the ancestor gap and must be present exactly when the relation is
/// `Ancestor`.
pub fn classify_type(relation: RelationType, gap: Option<u32>) -> ProvenanceType {
    assert!(
        (relation == RelationType::Ancestor) == gap.is_some(),
        "gap must accompany exactly the ancestor relation"
    );
    match relation {
        RelationType::Undefined => ProvenanceType::Succession,
        RelationType::Ancestor if gap == Some(0) => ProvenanceType::Subdivision,
        RelationType::Ancestor => ProvenanceType::Submersion,
        RelationType::Descendant => ProvenanceType::Overtopping,
        RelationType::Unrelated => ProvenanceType::Detachment,
    }
}

/// An undirected graph over one version's descriptors, with an edge wherever
/// a tree number's parent position belongs to a different descriptor. Used
/// for the sibling-is-one distance reported in debug logs.
#[derive(Debug, Clone)]
pub struct DescriptorGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl DescriptorGraph {
    pub fn new(version: &MeshVersion) -> Self {
        let mut owner: BTreeMap<String, &str> = BTreeMap::new();
        for (id, d) in version.descriptors() {
            for tree in d.tree_numbers() {
                owner.entry(tree.to_string()).or_insert(id);
            }
        }
        let mut adjacency: BTreeMap<String, BTreeSet<String>> = version
            .descriptors()
            .keys()
            .map(|id| (id.clone(), BTreeSet::new()))
            .collect();
        for (id, d) in version.descriptors() {
            for tree in d.tree_numbers() {
                let Some(parent) = tree.parent() else {
                    continue;
                };
                let Some(&parent_id) = owner.get(&parent.to_string()) else {
                    // The parent position has no descriptor in this version
                    // (common in truncated test data, absent in full releases).
                    continue;
                };
                if parent_id != id {
                    adjacency
                        .get_mut(id)
                        .expect("node exists")
                        .insert(parent_id.to_owned());
                    adjacency
                        .get_mut(parent_id)
                        .expect("node exists")
                        .insert(id.clone());
                }
            }
        }
        DescriptorGraph { adjacency }
    }

    /// Breadth-first edge count between two nodes; `None` when either node is
    /// missing or no path connects them.
    pub fn distance_edges(&self, from: &str, to: &str) -> Option<u32> {
        if !self.adjacency.contains_key(from) || !self.adjacency.contains_key(to) {
            return None;
        }
        if from == to {
            return Some(0);
        }
        let mut visited: BTreeSet<&str> = BTreeSet::new();
        visited.insert(from);
        let mut queue: VecDeque<(&str, u32)> = VecDeque::new();
        queue.push_back((from, 0));
        while let Some((node, steps)) = queue.pop_front() {
            for next in &self.adjacency[node] {
                if next == to {
                    return Some(steps + 1);
                }
                if visited.insert(next) {
                    queue.push_back((next.as_str(), steps + 1));
                }
            }
        }
        None
    }
}

/// Distance between a new descriptor and one host in `reference`, using a
/// prebuilt graph: edge count minus one, so direct children score 0 and
/// siblings score 1. Hosts absent from the reference are `Undefined`;
/// disconnected pairs are `Infinite`. Asking about the identical descriptor
/// is a caller error.
pub fn hierarchy_distance_with(
    graph: &DescriptorGraph,
    new_id: &str,
    host_id: &str,
    reference: &MeshVersion,
) -> Result<Distance> {
    if reference.descriptor(new_id).is_none() {
        return Err(Error::UnknownDescriptor {
            id: new_id.to_owned(),
            year: reference.year(),
        });
    }
    if new_id == host_id {
        return Err(Error::InvalidArgument(format!(
            "hierarchy distance of `{new_id}` to itself is not defined"
        )));
    }
    if reference.descriptor(host_id).is_none() {
        return Ok(Distance::Undefined);
    }
    match graph.distance_edges(new_id, host_id) {
        Some(edges) => Ok(Distance::Finite(edges - 1)),
        None => Ok(Distance::Infinite),
    }
}

/// One-off convenience around [`hierarchy_distance_with`]; builds the graph
/// each call, so loops should build a [`DescriptorGraph`] once instead.
pub fn hierarchy_distance(
    new_id: &str,
    host_id: &str,
    reference: &MeshVersion,
) -> Result<Distance> {
    hierarchy_distance_with(&DescriptorGraph::new(reference), new_id, host_id, reference)
}

/// What became of the public-note "indexed under" statement for one
/// descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmnOutcome {
    /// No note, no matching sentence, or an earlier check already decided the
    /// category.
    NotConsulted,
    /// The quoted name matched exactly one supplementary record.
    AutoResolved,
    /// An operator override settled the name.
    OverrideResolved,
    /// Near-matches were queued for review.
    Pending,
    /// The name matched nothing at all.
    NoCandidates,
}

/// Everything [`Annotator::annotate`] produces for one descriptor.
#[derive(Debug, Clone)]
pub struct Annotation {
    pub record: NewDescriptorRecord,
    pub review_items: Vec<ReviewItem>,
    pub warnings: Vec<String>,
    pub pmn_outcome: PmnOutcome,
    /// Override entries this annotation used up, for unused-override checks.
    pub consumed_overrides: Vec<(String, ReviewKind)>,
}

/// Classifies new descriptors. Holds the reference version for relation
/// checks and the operator overrides; the distance graph is built lazily and
/// only when debug logging wants it.
pub struct Annotator<'a> {
    reference: &'a MeshVersion,
    overrides: &'a OverrideSet,
    graph: OnceLock<DescriptorGraph>,
}

struct Working {
    hosts: Vec<PreviousHost>,
    review_items: Vec<ReviewItem>,
    warnings: Vec<String>,
    pmn_outcome: PmnOutcome,
    consumed_overrides: Vec<(String, ReviewKind)>,
}

impl<'a> Annotator<'a> {
    pub fn new(reference: &'a MeshVersion, overrides: &'a OverrideSet) -> Self {
        Annotator {
            reference,
            overrides,
            graph: OnceLock::new(),
        }
    }

    /// Classifies one descriptor introduced in `intro_year`. `intro` is the
    /// descriptor as published that year; `version0` is the full version of
    /// the year before. The descriptor must still exist in the reference
    /// version, which supplies its name and tree positions for the record.
    pub fn annotate(
        &self,
        intro: &Descriptor,
        intro_year: i32,
        version0: &MeshVersion,
    ) -> Result<Annotation> {
        let id = intro.descriptor_id();
        let in_reference =
            self.reference
                .descriptor(id)
                .ok_or_else(|| Error::UnknownDescriptor {
                    id: id.to_owned(),
                    year: self.reference.year(),
                })?;
        let mut work = Working {
            hosts: Vec::new(),
            review_items: Vec::new(),
            warnings: Vec::new(),
            pmn_outcome: PmnOutcome::NotConsulted,
            consumed_overrides: Vec::new(),
        };

        let mut category = self.check_old_concept(intro, version0, &mut work);
        if category.is_none() {
            category = self.check_scr_concept(intro, version0, &mut work);
        }
        if category.is_none() {
            category = self.check_pmn_statement(intro, version0, &mut work)?;
        }
        if category.is_none() {
            category = self.check_previous_indexing(intro, version0, &mut work)?;
        }
        let category = category.unwrap_or(ProvenanceCategory::Emerging);

        dedup_hosts(&mut work.hosts);
        if category != ProvenanceCategory::Emerging && work.hosts.is_empty() {
            work.warnings.push(format!(
                "{id}: no previous host could be resolved; record held as pending until an \
                 override settles it"
            ));
        }

        let mut codes = BTreeSet::new();
        if category == ProvenanceCategory::Emerging {
            codes.insert(ProvenanceCode::new(category, ProvenanceType::Emersion)?);
        } else {
            for host in &work.hosts {
                let ptype = self.host_type(in_reference, host, &mut work.warnings)?;
                codes.insert(ProvenanceCode::new(category, ptype)?);
                self.log_host_distance(in_reference, host);
            }
        }

        Ok(Annotation {
            record: NewDescriptorRecord {
                descriptor_id: id.to_owned(),
                name: in_reference.name().to_owned(),
                intro_year,
                category,
                hosts: work.hosts,
                codes,
                tree_numbers: in_reference.tree_numbers().to_vec(),
                mesh_category_letters: in_reference.mesh_category_letters(),
            },
            review_items: work.review_items,
            warnings: work.warnings,
            pmn_outcome: work.pmn_outcome,
            consumed_overrides: work.consumed_overrides,
        })
    }

    /// First check: the preferred concept already lived inside a descriptor
    /// of version 0.
    fn check_old_concept(
        &self,
        intro: &Descriptor,
        version0: &MeshVersion,
        work: &mut Working,
    ) -> Option<ProvenanceCategory> {
        let concept_id = intro.preferred_concept().concept_id();
        let host = version0.descriptor_holding_concept(concept_id)?;
        if host.preferred_concept().concept_id() == concept_id {
            work.warnings.push(format!(
                "{}: its preferred concept `{concept_id}` was the preferred concept of `{}` \
                 ({}) — likely a renamed descriptor rather than an extension",
                intro.descriptor_id(),
                host.descriptor_id(),
                host.name()
            ));
        }
        work.hosts.push(PreviousHost {
            descriptor_id: host.descriptor_id().to_owned(),
            name: host.name().to_owned(),
            coverage: HostCoverage::ExplicitConcept,
        });
        Some(ProvenanceCategory::OldConcept)
    }

    /// Second check: the preferred concept already lived inside a
    /// supplementary record of version 0; its mapped descriptors hosted the
    /// content.
    fn check_scr_concept(
        &self,
        intro: &Descriptor,
        version0: &MeshVersion,
        work: &mut Working,
    ) -> Option<ProvenanceCategory> {
        let concept_id = intro.preferred_concept().concept_id();
        let scr = version0.scr_holding_concept(concept_id)?;
        let scr_id = scr.scr_id().to_owned();
        self.push_scr_hosts(intro.descriptor_id(), &[scr_id], version0, work);
        Some(ProvenanceCategory::OldScr)
    }

    /// Third check: the public note names the supplementary record the
    /// content came from. Resolution failures fall through to the remaining
    /// checks, leaving a review item behind when there are suggestions.
    fn check_pmn_statement(
        &self,
        intro: &Descriptor,
        version0: &MeshVersion,
        work: &mut Working,
    ) -> Result<Option<ProvenanceCategory>> {
        let id = intro.descriptor_id();
        let Some(extraction) = intro.pmn_text().and_then(parse_pmn) else {
            return Ok(None);
        };
        let key = (id.to_owned(), ReviewKind::PmnScr);
        let mut resolutions = BTreeMap::new();
        resolutions.insert(
            key.clone(),
            resolve_term_to_scr(&extraction.scr_term, version0, intro.name()),
        );
        let had_override = self.overrides.lookup(id, ReviewKind::PmnScr).is_some();
        let mut resolutions = apply_overrides(resolutions, self.overrides, |_, scr_id| {
            version0.scr(scr_id).is_some()
        })?;
        match resolutions.remove(&key).expect("inserted above") {
            TermResolution::Exact(scr_id) => {
                work.pmn_outcome = PmnOutcome::AutoResolved;
                self.push_scr_hosts(id, &[scr_id], version0, work);
                Ok(Some(ProvenanceCategory::OldScr))
            }
            TermResolution::Confirmed(scr_ids) => {
                work.pmn_outcome = PmnOutcome::OverrideResolved;
                work.consumed_overrides.push(key);
                self.push_scr_hosts(id, &scr_ids, version0, work);
                Ok(Some(ProvenanceCategory::OldScr))
            }
            TermResolution::Suggestions(candidates) => {
                work.pmn_outcome = PmnOutcome::Pending;
                work.warnings.push(format!(
                    "{id}: note name `{}` has no exact match in the {} release; queued for \
                     review",
                    extraction.scr_term,
                    version0.year()
                ));
                work.review_items.push(ReviewItem {
                    descriptor_id: id.to_owned(),
                    kind: ReviewKind::PmnScr,
                    query_term: extraction.scr_term,
                    candidates,
                });
                Ok(None)
            }
            TermResolution::NoCandidates => {
                work.pmn_outcome = PmnOutcome::NoCandidates;
                // An override for this name may exist yet be unusable only
                // because the ids failed validation above; reaching here
                // means there simply was no override.
                debug_assert!(!had_override || work.consumed_overrides.is_empty());
                work.warnings.push(format!(
                    "{id}: note name `{}` matches nothing in the {} release",
                    extraction.scr_term,
                    version0.year()
                ));
                Ok(None)
            }
        }
    }

    /// Fourth check: previous-indexing notes name the descriptors that
    /// received the content's articles. Terms that fail to resolve can be
    /// settled wholesale by a per-descriptor override; otherwise they become
    /// review items and the record may end up with no hosts at all.
    fn check_previous_indexing(
        &self,
        intro: &Descriptor,
        version0: &MeshVersion,
        work: &mut Working,
    ) -> Result<Option<ProvenanceCategory>> {
        if intro.pi_notes().is_empty() {
            return Ok(None);
        }
        let id = intro.descriptor_id();
        let (entries, parse_warnings) = parse_pi(intro.pi_notes());
        work.warnings
            .extend(parse_warnings.into_iter().map(|w| format!("{id}: {w}")));

        let mut pending: Vec<(String, Vec<Candidate>)> = Vec::new();
        for term in select_current_pi_hosts(&entries, version0.year()) {
            match resolve_term_to_descriptor(&term, version0) {
                TermResolution::Exact(host_id) => {
                    let host = version0
                        .descriptor(&host_id)
                        .expect("resolved in version 0");
                    work.hosts.push(PreviousHost {
                        descriptor_id: host_id.clone(),
                        name: host.name().to_owned(),
                        coverage: HostCoverage::ImplicitPi,
                    });
                }
                TermResolution::Suggestions(candidates) => pending.push((term, candidates)),
                TermResolution::NoCandidates => {
                    work.warnings.push(format!(
                        "{id}: previous-indexing term `{term}` matches nothing in the {} \
                         release",
                        version0.year()
                    ));
                    pending.push((term, Vec::new()));
                }
                TermResolution::Confirmed(_) => {
                    unreachable!("plain resolution never returns operator confirmations")
                }
            }
        }

        if !pending.is_empty() {
            if let Some(host_ids) = self.overrides.lookup(id, ReviewKind::PiHost) {
                for host_id in host_ids {
                    let Some(host) = version0.descriptor(host_id) else {
                        return Err(Error::OverrideUnknownId {
                            descriptor_id: id.to_owned(),
                            kind: ReviewKind::PiHost,
                            id: host_id.clone(),
                        });
                    };
                    work.hosts.push(PreviousHost {
                        descriptor_id: host_id.clone(),
                        name: host.name().to_owned(),
                        coverage: HostCoverage::ImplicitPi,
                    });
                }
                work.consumed_overrides
                    .push((id.to_owned(), ReviewKind::PiHost));
            } else {
                for (term, candidates) in pending {
                    work.warnings.push(format!(
                        "{id}: previous-indexing term `{term}` left unresolved; its host is \
                         missing from this record until reviewed"
                    ));
                    if !candidates.is_empty() {
                        work.review_items.push(ReviewItem {
                            descriptor_id: id.to_owned(),
                            kind: ReviewKind::PiHost,
                            query_term: term,
                            candidates,
                        });
                    }
                }
            }
        }
        Ok(Some(ProvenanceCategory::NewPiConcept))
    }

    /// Turns supplementary record ids into hosts via their descriptor
    /// mappings, resolving names in version 0.
    fn push_scr_hosts(
        &self,
        id: &str,
        scr_ids: &[String],
        version0: &MeshVersion,
        work: &mut Working,
    ) {
        for scr_id in scr_ids {
            let Some(scr) = version0.scr(scr_id) else {
                // Callers validate the ids; a miss here would be a bug.
                unreachable!("SCR `{scr_id}` vanished between validation and host extraction");
            };
            for mapped in scr.mapped_descriptor_ids() {
                let name = match version0.descriptor(mapped) {
                    Some(host) => host.name().to_owned(),
                    None => {
                        work.warnings.push(format!(
                            "{id}: `{scr_id}` maps to `{mapped}` which is absent from the {} \
                             release; keeping the bare id",
                            version0.year()
                        ));
                        mapped.clone()
                    }
                };
                work.hosts.push(PreviousHost {
                    descriptor_id: mapped.clone(),
                    name,
                    coverage: HostCoverage::ExplicitScr,
                });
            }
        }
    }

    /// Derives the type digit for one host from the reference-version trees.
    fn host_type(
        &self,
        in_reference: &Descriptor,
        host: &PreviousHost,
        warnings: &mut Vec<String>,
    ) -> Result<ProvenanceType> {
        let Some(host_ref) = self.reference.descriptor(&host.descriptor_id) else {
            return Ok(classify_type(RelationType::Undefined, None));
        };
        let (relation, dual) = relation_eval(in_reference, host_ref);
        if dual {
            warnings.push(format!(
                "{}: host `{}` sits both above and below it in the reference trees; treating \
                 it as an ancestor",
                in_reference.descriptor_id(),
                host.descriptor_id
            ));
        }
        let gap = match relation {
            RelationType::Ancestor => Some(ancestor_gap(in_reference, host_ref)?),
            _ => None,
        };
        Ok(classify_type(relation, gap))
    }

    /// Debug-only: how far the host sits from the new descriptor when both
    /// are in the reference version.
    fn log_host_distance(&self, in_reference: &Descriptor, host: &PreviousHost) {
        if !log::log_enabled!(log::Level::Debug)
            || host.descriptor_id == in_reference.descriptor_id()
        {
            return;
        }
        let graph = self
            .graph
            .get_or_init(|| DescriptorGraph::new(self.reference));
        if let Ok(distance) = hierarchy_distance_with(
            graph,
            in_reference.descriptor_id(),
            &host.descriptor_id,
            self.reference,
        ) {
            log::debug!(
                "{}: hierarchy distance to host {} is {distance}",
                in_reference.descriptor_id(),
                host.descriptor_id
            );
        }
    }
}

/// Keeps the first mention of each host id, preserving order.
fn dedup_hosts(hosts: &mut Vec<PreviousHost>) {
    let mut seen = BTreeSet::new();
    hosts.retain(|h| seen.insert(h.descriptor_id.clone()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Concept, ConceptRelation, Term, TreeNumber};

    fn concept(id: &str, name: &str) -> Concept {
        Concept::new(
            id,
            vec![Term::new(name, true).unwrap()],
            ConceptRelation::Preferred,
        )
        .unwrap()
    }

    fn descriptor(id: &str, name: &str, trees: &[&str]) -> Descriptor {
        descriptor_full(id, name, trees, None, &[])
    }

    fn descriptor_full(
        id: &str,
        name: &str,
        trees: &[&str],
        pmn: Option<&str>,
        pi: &[&str],
    ) -> Descriptor {
        Descriptor::new(
            id,
            name,
            concept(&format!("M{}", &id[1..]), name),
            vec![],
            trees
                .iter()
                .map(|t| TreeNumber::parse(t).unwrap())
                .collect(),
            pmn.map(str::to_owned),
            pi.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    fn version(
        year: i32,
        descriptors: Vec<Descriptor>,
        scrs: Vec<crate::model::ScrRecord>,
    ) -> MeshVersion {
        MeshVersion::build(year, descriptors, scrs).unwrap().0
    }

    fn scr(id: &str, name: &str, mapped: &[&str]) -> crate::model::ScrRecord {
        crate::model::ScrRecord::new(
            id,
            concept(&format!("M{}", &id[1..]), name),
            vec![],
            mapped.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    fn reference_for_relations() -> MeshVersion {
        version(
            2020,
            vec![
                descriptor("D000001", "Root", &["C01"]),
                descriptor("D000002", "Child", &["C01.100"]),
                descriptor("D000003", "Grandchild", &["C01.100.200"]),
                descriptor("D000004", "Other Branch", &["C02.500"]),
                descriptor("D000005", "Sibling", &["C01.300"]),
            ],
            vec![],
        )
    }

    #[test]
    fn relations_follow_the_tree_prefixes() {
        let v = reference_for_relations();
        let rel = |a, b| relation_type(a, b, &v).unwrap();
        assert_eq!(rel("D000003", "D000001"), RelationType::Ancestor);
        assert_eq!(rel("D000001", "D000003"), RelationType::Descendant);
        assert_eq!(rel("D000003", "D000004"), RelationType::Unrelated);
        assert_eq!(rel("D000002", "D000005"), RelationType::Unrelated);
        assert_eq!(rel("D000003", "D999999"), RelationType::Undefined);
        assert!(matches!(
            relation_type("D999999", "D000001", &v),
            Err(Error::UnknownDescriptor { .. })
        ));
    }

    #[test]
    fn gap_is_minimized_over_all_prefix_pairs() {
        let v = reference_for_relations();
        let d = |id| v.descriptor(id).unwrap();
        assert_eq!(ancestor_gap(d("D000003"), d("D000001")).unwrap(), 1);
        assert_eq!(ancestor_gap(d("D000003"), d("D000002")).unwrap(), 0);
        assert!(ancestor_gap(d("D000001"), d("D000003")).is_err());

        // A host above two positions counts the closer one.
        let v2 = version(
            2020,
            vec![
                descriptor("D000010", "Host", &["C03", "C04.100"]),
                descriptor("D000011", "New", &["C03.100.200.300", "C04.100.500"]),
            ],
            vec![],
        );
        assert_eq!(
            ancestor_gap(
                v2.descriptor("D000011").unwrap(),
                v2.descriptor("D000010").unwrap()
            )
            .unwrap(),
            0
        );
    }

    #[test]
    fn type_digits_cover_every_relation() {
        use ProvenanceType::*;
        assert_eq!(classify_type(RelationType::Undefined, None), Succession);
        assert_eq!(classify_type(RelationType::Ancestor, Some(0)), Subdivision);
        assert_eq!(classify_type(RelationType::Ancestor, Some(3)), Submersion);
        assert_eq!(classify_type(RelationType::Descendant, None), Overtopping);
        assert_eq!(classify_type(RelationType::Unrelated, None), Detachment);
    }

    #[test]
    fn distances_count_steps_with_siblings_at_one() {
        let v = reference_for_relations();
        let g = DescriptorGraph::new(&v);
        let dist = |a, b| hierarchy_distance_with(&g, a, b, &v).unwrap();
        assert_eq!(dist("D000002", "D000001"), Distance::Finite(0));
        assert_eq!(dist("D000003", "D000001"), Distance::Finite(1));
        assert_eq!(dist("D000002", "D000005"), Distance::Finite(1));
        assert_eq!(dist("D000003", "D000005"), Distance::Finite(2));
        assert_eq!(dist("D000001", "D000004"), Distance::Infinite);
        assert_eq!(dist("D000001", "D999999"), Distance::Undefined);
        assert!(hierarchy_distance_with(&g, "D000001", "D000001", &v).is_err());
        assert!(hierarchy_distance_with(&g, "D999999", "D000001", &v).is_err());
        assert_eq!(
            hierarchy_distance("D000003", "D000001", &v).unwrap(),
            Distance::Finite(1)
        );
    }

    fn no_overrides() -> OverrideSet {
        OverrideSet::default()
    }

    #[test]
    fn an_adopted_concept_yields_an_old_concept_record() {
        // The 2016 "Fruit Tree" descriptor's preferred concept lived as a
        // subordinate concept of "Orchard Plants" in 2015.
        let sub = Concept::new(
            "M777",
            vec![Term::new("Fruit Tree", true).unwrap()],
            ConceptRelation::Narrower,
        )
        .unwrap();
        let host = Descriptor::new(
            "D000100",
            "Orchard Plants",
            concept("M000100", "Orchard Plants"),
            vec![sub],
            vec![TreeNumber::parse("B01.200").unwrap()],
            None,
            vec![],
        )
        .unwrap();
        let v0 = version(2015, vec![host], vec![]);

        let intro = Descriptor::new(
            "D000200",
            "Fruit Tree",
            concept("M777", "Fruit Tree"),
            vec![],
            vec![TreeNumber::parse("B01.200.300").unwrap()],
            None,
            vec![],
        )
        .unwrap();
        let reference = version(
            2020,
            vec![
                descriptor("D000100", "Orchard Plants", &["B01.200"]),
                descriptor("D000200", "Fruit Tree", &["B01.200.300"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let annotator = Annotator::new(&reference, &overrides);
        let a = annotator.annotate(&intro, 2016, &v0).unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::OldConcept);
        assert_eq!(a.record.hosts.len(), 1);
        assert_eq!(a.record.hosts[0].descriptor_id, "D000100");
        assert_eq!(a.record.hosts[0].name, "Orchard Plants");
        assert_eq!(a.record.hosts[0].coverage, HostCoverage::ExplicitConcept);
        assert_eq!(codes(&a.record), ["1.2"]);
        assert_eq!(a.pmn_outcome, PmnOutcome::NotConsulted);
        assert!(a.warnings.is_empty(), "{:?}", a.warnings);
        a.record.validate().unwrap();
    }

    #[test]
    fn a_transferred_preferred_concept_warns_about_renaming() {
        let host = descriptor("D000100", "Old Name", &["B01.200"]);
        let v0 = version(2015, vec![host], vec![]);
        // Same preferred concept id as the version-0 host's.
        let intro = Descriptor::new(
            "D000200",
            "New Name",
            concept("M000100", "New Name"),
            vec![],
            vec![],
            None,
            vec![],
        )
        .unwrap();
        let reference = version(
            2020,
            vec![descriptor("D000200", "New Name", &["B01.900"])],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2016, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::OldConcept);
        assert!(
            a.warnings.iter().any(|w| w.contains("renamed")),
            "{:?}",
            a.warnings
        );
        // Host absent from the reference: the relation is undefined.
        assert_eq!(codes(&a.record), ["1.1"]);
    }

    #[test]
    fn a_promoted_scr_concept_brings_its_mapped_descriptors() {
        let v0 = version(
            2018,
            vec![
                descriptor("D000300", "Adenocarcinoma", &["C04.100"]),
                descriptor("D000301", "Lung Neoplasms", &["C04.500"]),
            ],
            vec![scr(
                "C555001",
                "Adenocarcinoma of Lung",
                &["D000300", "D000301"],
            )],
        );
        let intro = Descriptor::new(
            "D000400",
            "Adenocarcinoma of Lung",
            concept("M555001", "Adenocarcinoma of Lung"),
            vec![],
            vec![TreeNumber::parse("C04.100.050").unwrap()],
            Some("2019; see ADENOCARCINOMA OF LUNG under ADENOCARCINOMA 1990-2018".into()),
            vec![],
        )
        .unwrap();
        let reference = version(
            2020,
            vec![
                descriptor("D000300", "Adenocarcinoma", &["C04.100"]),
                descriptor("D000301", "Lung Neoplasms", &["C04.500"]),
                descriptor(
                    "D000400",
                    "Adenocarcinoma of Lung",
                    &["C04.100.050", "C04.500.060"],
                ),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2019, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::OldScr);
        let ids: Vec<_> = a
            .record
            .hosts
            .iter()
            .map(|h| h.descriptor_id.as_str())
            .collect();
        assert_eq!(ids, ["D000300", "D000301"]);
        assert!(a
            .record
            .hosts
            .iter()
            .all(|h| h.coverage == HostCoverage::ExplicitScr));
        // Both hosts are direct parents in the reference trees.
        assert_eq!(codes(&a.record), ["2.2"]);
        // The note never had to be consulted.
        assert_eq!(a.pmn_outcome, PmnOutcome::NotConsulted);
        a.record.validate().unwrap();
    }

    #[test]
    fn an_exact_note_name_resolves_without_review() {
        let v0 = version(
            2017,
            vec![descriptor("D000500", "Arthritis", &["C05.100"])],
            vec![scr("C555002", "Blau Syndrome", &["D000500"])],
        );
        let intro = descriptor_full(
            "D000600",
            "Blau Syndrome",
            &["C05.100.700"],
            Some("2018; BLAU SYNDROME was indexed under ARTHRITIS 1995-2017"),
            &[],
        );
        let reference = version(
            2020,
            vec![
                descriptor("D000500", "Arthritis", &["C05.100"]),
                descriptor("D000600", "Blau Syndrome", &["C05.100.700"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2018, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::OldScr);
        assert_eq!(a.record.hosts[0].descriptor_id, "D000500");
        assert_eq!(a.pmn_outcome, PmnOutcome::AutoResolved);
        assert_eq!(codes(&a.record), ["2.2"]);
        assert!(a.review_items.is_empty());
    }

    #[test]
    fn a_fuzzy_note_name_queues_review_and_falls_through() {
        let v0 = version(
            2017,
            vec![descriptor("D000500", "Arthritis", &["C05.100"])],
            vec![scr("C555002", "Blau Syndrome", &["D000500"])],
        );
        let intro = descriptor_full(
            "D000600",
            "Blau Disease",
            &["C05.100.700"],
            Some("2018; BLAU SINDROME was indexed under ARTHRITIS 1995-2017"),
            &[],
        );
        let reference = version(
            2020,
            vec![
                descriptor("D000500", "Arthritis", &["C05.100"]),
                descriptor("D000600", "Blau Disease", &["C05.100.700"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2018, &v0)
            .unwrap();
        // Without previous-indexing notes the record degrades to emerging.
        assert_eq!(a.record.category, ProvenanceCategory::Emerging);
        assert_eq!(a.pmn_outcome, PmnOutcome::Pending);
        assert_eq!(a.review_items.len(), 1);
        assert_eq!(a.review_items[0].kind, ReviewKind::PmnScr);
        assert_eq!(a.review_items[0].query_term, "BLAU SINDROME");
        assert_eq!(a.review_items[0].candidates[0].id, "C555002");
        assert_eq!(codes(&a.record), ["4.0"]);

        // An override settles the same input on a later run.
        let overrides = OverrideSet::from_entries(vec![crate::model::OverrideEntry {
            descriptor_id: "D000600".into(),
            kind: ReviewKind::PmnScr,
            resolved_ids: vec!["C555002".into()],
        }])
        .unwrap();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2018, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::OldScr);
        assert_eq!(a.pmn_outcome, PmnOutcome::OverrideResolved);
        assert_eq!(
            a.consumed_overrides,
            [("D000600".to_owned(), ReviewKind::PmnScr)]
        );
        assert_eq!(a.record.hosts[0].descriptor_id, "D000500");
        assert!(a.review_items.is_empty());
    }

    #[test]
    fn an_override_with_an_unknown_scr_is_fatal() {
        let v0 = version(
            2017,
            vec![],
            vec![scr("C555002", "Blau Syndrome", &["D000500"])],
        );
        let intro = descriptor_full(
            "D000600",
            "Blau Disease",
            &[],
            Some("BLAU SINDROME was indexed under ARTHRITIS"),
            &[],
        );
        let reference = version(
            2020,
            vec![descriptor("D000600", "Blau Disease", &["C05.100"])],
            vec![],
        );
        let overrides = OverrideSet::from_entries(vec![crate::model::OverrideEntry {
            descriptor_id: "D000600".into(),
            kind: ReviewKind::PmnScr,
            resolved_ids: vec!["C999999".into()],
        }])
        .unwrap();
        let err = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2018, &v0)
            .unwrap_err();
        assert!(matches!(err, Error::OverrideUnknownId { .. }), "{err}");
    }

    #[test]
    fn indexing_notes_produce_hosts_and_per_host_codes() {
        let v0 = version(
            2014,
            vec![
                descriptor("D000700", "Arbovirus Infections", &["C02.100"]),
                descriptor("D000701", "Flavivirus Infections", &["C02.100.300"]),
            ],
            vec![],
        );
        let intro = descriptor_full(
            "D000800",
            "Zika Virus Infection",
            &["C02.100.300.900"],
            None,
            &[
                "Arbovirus Infections (1977-2014)",
                "Flavivirus Infections (2007-2014)",
            ],
        );
        let reference = version(
            2020,
            vec![
                descriptor("D000700", "Arbovirus Infections", &["C02.100"]),
                descriptor("D000701", "Flavivirus Infections", &["C02.100.300"]),
                descriptor("D000800", "Zika Virus Infection", &["C02.100.300.900"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2015, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::NewPiConcept);
        let ids: Vec<_> = a
            .record
            .hosts
            .iter()
            .map(|h| h.descriptor_id.as_str())
            .collect();
        assert_eq!(ids, ["D000700", "D000701"]);
        assert!(a
            .record
            .hosts
            .iter()
            .all(|h| h.coverage == HostCoverage::ImplicitPi));
        // One grandparent (gap 1) and one direct parent (gap 0).
        assert_eq!(codes(&a.record), ["3.2", "3.3"]);
        a.record.validate().unwrap();
    }

    #[test]
    fn unresolved_indexing_terms_wait_for_an_override() {
        let v0 = version(
            2018,
            vec![descriptor("D000900", "Green Syndrome", &["C08.300"])],
            vec![],
        );
        let intro = descriptor_full(
            "D000901",
            "Blue Tongue Variant",
            &["C08.300.500"],
            None,
            &["Green Sindrome (2000-2018)"],
        );
        let reference = version(
            2020,
            vec![
                descriptor("D000900", "Green Syndrome", &["C08.300"]),
                descriptor("D000901", "Blue Tongue Variant", &["C08.300.500"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2019, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::NewPiConcept);
        assert!(a.record.hosts.is_empty());
        assert!(a.record.codes.is_empty());
        assert!(a.record.is_pending());
        assert_eq!(a.review_items.len(), 1);
        assert_eq!(a.review_items[0].kind, ReviewKind::PiHost);
        assert!(
            a.warnings.iter().any(|w| w.contains("pending")),
            "{:?}",
            a.warnings
        );

        let overrides = OverrideSet::from_entries(vec![crate::model::OverrideEntry {
            descriptor_id: "D000901".into(),
            kind: ReviewKind::PiHost,
            resolved_ids: vec!["D000900".into()],
        }])
        .unwrap();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2019, &v0)
            .unwrap();
        assert!(!a.record.is_pending());
        assert_eq!(a.record.hosts[0].descriptor_id, "D000900");
        assert_eq!(a.record.hosts[0].name, "Green Syndrome");
        assert_eq!(codes(&a.record), ["3.2"]);
        assert_eq!(
            a.consumed_overrides,
            [("D000901".to_owned(), ReviewKind::PiHost)]
        );
        a.record.validate().unwrap();
    }

    #[test]
    fn a_descriptor_with_no_trace_is_emerging() {
        let v0 = version(
            2014,
            vec![descriptor("D000001", "Something", &["C01"])],
            vec![],
        );
        let intro = descriptor("D000002", "Brand New", &["E01.500"]);
        let reference = version(
            2020,
            vec![
                descriptor("D000001", "Something", &["C01"]),
                descriptor("D000002", "Brand New", &["E01.500"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2015, &v0)
            .unwrap();
        assert_eq!(a.record.category, ProvenanceCategory::Emerging);
        assert!(a.record.hosts.is_empty());
        assert_eq!(codes(&a.record), ["4.0"]);
        assert!(!a.record.is_pending());
        a.record.validate().unwrap();
    }

    #[test]
    fn succession_overtopping_and_detachment_each_get_their_digit() {
        let v0 = version(
            2018,
            vec![
                descriptor("D001001", "Gone By Reference", &["C05.100"]),
                descriptor("D001002", "Below The New One", &["C05.200.300.400"]),
                descriptor("D001003", "Far Away", &["F01.100"]),
            ],
            vec![],
        );
        let intro = descriptor_full(
            "D001000",
            "Umbrella",
            &["C05.200.300"],
            None,
            &[
                "Gone By Reference (1990-2018)",
                "Below The New One (1990-2018)",
                "Far Away (1990-2018)",
            ],
        );
        let reference = version(
            2020,
            vec![
                descriptor("D001000", "Umbrella", &["C05.200.300"]),
                descriptor("D001002", "Below The New One", &["C05.200.300.400"]),
                descriptor("D001003", "Far Away", &["F01.100"]),
            ],
            vec![],
        );
        let overrides = no_overrides();
        let a = Annotator::new(&reference, &overrides)
            .annotate(&intro, 2019, &v0)
            .unwrap();
        assert_eq!(codes(&a.record), ["3.1", "3.4", "3.5"]);
    }

    fn codes(record: &NewDescriptorRecord) -> Vec<String> {
        record.codes.iter().map(|c| c.to_string()).collect()
    }
}
