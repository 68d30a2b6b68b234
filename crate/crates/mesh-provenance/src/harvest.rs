//! Year-over-year diffing of descriptor sets.
//!
//! A descriptor is "new in year Y" when its id exists in Y but not in Y-1.
//! Only descriptors that survive into the reference version are retained for
//! classification: the reference supplies the trees every comparison runs in,
//! so a descriptor that has since been withdrawn has nothing to be judged
//! against.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::model::MeshVersion;

/// The years being studied plus the version whose hierarchy anchors all
/// comparisons. The year before `first_year` serves as the baseline: it is
/// diffed against but never harvested itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StudyWindow {
    first_year: i32,
    last_year: i32,
    reference_year: i32,
}

impl StudyWindow {
    pub fn new(first_year: i32, last_year: i32, reference_year: i32) -> Result<Self> {
        if first_year > last_year {
            return Err(Error::Config(format!(
                "first_year {first_year} is after last_year {last_year}"
            )));
        }
        if reference_year < last_year {
            return Err(Error::Config(format!(
                "reference_year {reference_year} is before last_year {last_year}; \
                 every studied descriptor must be resolvable in the reference version"
            )));
        }
        Ok(StudyWindow {
            first_year,
            last_year,
            reference_year,
        })
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.last_year
    }

    pub fn reference_year(&self) -> i32 {
        self.reference_year
    }

    pub fn baseline_year(&self) -> i32 {
        self.first_year - 1
    }

    /// The years whose new descriptors are harvested.
    pub fn study_years(&self) -> RangeInclusive<i32> {
        self.first_year..=self.last_year
    }

    /// Every year a run must be able to load: the baseline through the last
    /// study year, plus the reference year.
    pub fn required_years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = (self.baseline_year()..=self.last_year).collect();
        if self.reference_year > self.last_year {
            years.push(self.reference_year);
        }
        years
    }
}

/// Ids present in `current` but not in `previous`. Logs a warning when the
/// two versions are not consecutive years, since a gap silently widens what
/// "new" means.
pub fn identify_new_descriptors(previous: &MeshVersion, current: &MeshVersion) -> BTreeSet<String> {
    if current.year() != previous.year() + 1 {
        log::warn!(
            "diffing non-consecutive versions {} and {}; descriptors introduced in between \
             will be attributed to {}",
            previous.year(),
            current.year(),
            current.year()
        );
    }
    current
        .descriptors()
        .keys()
        .filter(|id| !previous.contains_descriptor(id))
        .cloned()
        .collect()
}

/// New descriptors per study year, already filtered to those the reference
/// version still carries.
#[derive(Debug, Clone, Default)]
pub struct HarvestDiff {
    pub per_year: BTreeMap<i32, BTreeSet<String>>,
    pub warnings: Vec<String>,
}

/// Harvests every study year of the window. An id that disappears and comes
/// back is attributed to its first introduction and warned about on the
/// second appearance.
pub fn retained_new_descriptors(
    window: &StudyWindow,
    versions: &BTreeMap<i32, MeshVersion>,
) -> Result<HarvestDiff> {
    let missing: Vec<i32> = window
        .required_years()
        .into_iter()
        .filter(|year| !versions.contains_key(year))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingVersions(missing));
    }

    let reference = &versions[&window.reference_year()];
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut diff = HarvestDiff::default();
    for year in window.study_years() {
        let previous = &versions[&(year - 1)];
        let current = &versions[&year];
        let mut retained = BTreeSet::new();
        for id in identify_new_descriptors(previous, current) {
            if !seen.insert(id.clone()) {
                diff.warnings.push(format!(
                    "descriptor `{id}` reappeared in {year}; keeping its first introduction"
                ));
                continue;
            }
            if reference.contains_descriptor(&id) {
                retained.insert(id);
            }
        }
        diff.per_year.insert(year, retained);
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Concept, ConceptRelation, Descriptor, Term};

    fn descriptor(id: &str) -> Descriptor {
        let concept = Concept::new(
            &format!("M{id}"),
            vec![Term::new(&format!("Name {id}"), true).unwrap()],
            ConceptRelation::Preferred,
        )
        .unwrap();
        Descriptor::new(
            id,
            &format!("Name {id}"),
            concept,
            vec![],
            vec![],
            None,
            vec![],
        )
        .unwrap()
    }

    fn version(year: i32, ids: &[&str]) -> MeshVersion {
        let descriptors = ids.iter().map(|id| descriptor(id)).collect();
        MeshVersion::build(year, descriptors, vec![]).unwrap().0
    }

    #[test]
    fn window_validates_year_order() {
        assert!(StudyWindow::new(2015, 2020, 2020).is_ok());
        assert!(StudyWindow::new(2020, 2015, 2020).is_err());
        assert!(StudyWindow::new(2015, 2020, 2019).is_err());
        let single = StudyWindow::new(2020, 2020, 2020).unwrap();
        assert_eq!(single.baseline_year(), 2019);
        assert_eq!(single.required_years(), [2019, 2020]);
        let detached = StudyWindow::new(2015, 2017, 2020).unwrap();
        assert_eq!(detached.required_years(), [2014, 2015, 2016, 2017, 2020]);
    }

    #[test]
    fn identical_versions_have_no_new_descriptors() {
        let v2019 = version(2019, &["D1", "D2"]);
        let v2020 = version(2020, &["D1", "D2"]);
        assert!(identify_new_descriptors(&v2019, &v2020).is_empty());
    }

    #[test]
    fn additions_are_detected_and_removals_ignored() {
        let v2019 = version(2019, &["D1", "D2"]);
        let v2020 = version(2020, &["D2", "D3"]);
        let new = identify_new_descriptors(&v2019, &v2020);
        assert_eq!(new, BTreeSet::from(["D3".to_owned()]));
    }

    #[test]
    fn harvest_drops_descriptors_absent_from_the_reference() {
        let mut versions = BTreeMap::new();
        versions.insert(2018, version(2018, &["D1"]));
        versions.insert(2019, version(2019, &["D1", "D2", "D3"]));
        versions.insert(2020, version(2020, &["D1", "D2"])); // D3 withdrawn
        let window = StudyWindow::new(2019, 2019, 2020).unwrap();
        let diff = retained_new_descriptors(&window, &versions).unwrap();
        assert_eq!(diff.per_year[&2019], BTreeSet::from(["D2".to_owned()]));
    }

    #[test]
    fn reappearing_descriptor_keeps_first_introduction() {
        let mut versions = BTreeMap::new();
        versions.insert(2016, version(2016, &["D1"]));
        versions.insert(2017, version(2017, &["D1", "D2"]));
        versions.insert(2018, version(2018, &["D1"])); // D2 withdrawn
        versions.insert(2019, version(2019, &["D1", "D2"])); // D2 back
        versions.insert(2020, version(2020, &["D1", "D2"]));
        let window = StudyWindow::new(2017, 2020, 2020).unwrap();
        let diff = retained_new_descriptors(&window, &versions).unwrap();
        assert_eq!(diff.per_year[&2017], BTreeSet::from(["D2".to_owned()]));
        assert!(diff.per_year[&2019].is_empty());
        assert_eq!(diff.warnings.len(), 1);
        assert!(diff.warnings[0].contains("D2"));
        assert!(diff.warnings[0].contains("2019"));
    }

    #[test]
    fn missing_years_are_reported_sorted() {
        let mut versions = BTreeMap::new();
        versions.insert(2019, version(2019, &["D1"]));
        let window = StudyWindow::new(2018, 2020, 2020).unwrap();
        let err = retained_new_descriptors(&window, &versions).unwrap_err();
        match err {
            Error::MissingVersions(years) => assert_eq!(years, [2017, 2018, 2020]),
            other => panic!("unexpected error {other}"),
        }
    }
}
