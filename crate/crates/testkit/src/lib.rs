//! Test fixtures shared by the workspace test suites.
//!
//! Builds small but structurally faithful MeSH descriptor/supplementary XML
//! files, plus a handful of canned multi-year corpora with hand-checked
//! expected outcomes. Nothing in here is used at runtime.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

/// Window (first study year, last study year, reference year) for [`main_corpus`].
pub const MAIN_WINDOW: (i32, i32, i32) = (2015, 2020, 2020);
/// Descriptor count of the 2014 baseline version in [`main_corpus`].
pub const MAIN_BASELINE_COUNT: usize = 16;
/// Window for [`review_corpus`].
pub const REVIEW_WINDOW: (i32, i32, i32) = (2018, 2019, 2019);
/// Window for [`static_corpus`].
pub const STATIC_WINDOW: (i32, i32, i32) = (2018, 2019, 2019);

/// A subordinate concept attached to a descriptor fixture.
#[derive(Debug, Clone)]
pub struct ConceptFx {
    pub ui: String,
    pub preferred_term: String,
    /// Relation to the preferred concept: `"NRW"`, `"BRD"`, or `"REL"`.
    pub relation: &'static str,
}

/// One descriptor record in a generated XML file.
#[derive(Debug, Clone)]
pub struct DescriptorFx {
    pub ui: String,
    pub name: String,
    pub trees: Vec<String>,
    pub pmn: Option<String>,
    pub pi: Vec<String>,
    pub concept_ui: String,
    pub extra_terms: Vec<String>,
    pub subordinates: Vec<ConceptFx>,
    /// Raw XML injected verbatim before the concept list (for skip-path tests).
    pub extra_xml: String,
}

impl DescriptorFx {
    /// A descriptor with one preferred concept whose id defaults to the
    /// descriptor id with `D` swapped for `M` (D900001 -> M900001).
    pub fn new(ui: &str, name: &str, trees: &[&str]) -> Self {
        DescriptorFx {
            ui: ui.to_string(),
            name: name.to_string(),
            trees: trees.iter().map(|t| t.to_string()).collect(),
            pmn: None,
            pi: Vec::new(),
            concept_ui: format!("M{}", &ui[1..]),
            extra_terms: Vec::new(),
            subordinates: Vec::new(),
            extra_xml: String::new(),
        }
    }

    pub fn pmn(mut self, text: &str) -> Self {
        self.pmn = Some(text.to_string());
        self
    }

    pub fn pi(mut self, notes: &[&str]) -> Self {
        self.pi = notes.iter().map(|n| n.to_string()).collect();
        self
    }

    /// Override the preferred concept id.
    pub fn concept(mut self, ui: &str) -> Self {
        self.concept_ui = ui.to_string();
        self
    }

    /// Add a non-preferred term to the preferred concept.
    pub fn term(mut self, text: &str) -> Self {
        self.extra_terms.push(text.to_string());
        self
    }

    pub fn subordinate(mut self, ui: &str, term: &str, relation: &'static str) -> Self {
        self.subordinates.push(ConceptFx {
            ui: ui.to_string(),
            preferred_term: term.to_string(),
            relation,
        });
        self
    }

    pub fn raw_xml(mut self, xml: &str) -> Self {
        self.extra_xml.push_str(xml);
        self
    }
}

/// One supplementary concept record in a generated XML file.
#[derive(Debug, Clone)]
pub struct ScrFx {
    pub ui: String,
    pub name: String,
    pub concept_ui: String,
    /// Mapped descriptor ids; the first is emitted with the `*` principal marker.
    pub mapped: Vec<String>,
}

impl ScrFx {
    pub fn new(ui: &str, name: &str, concept_ui: &str, mapped: &[&str]) -> Self {
        ScrFx {
            ui: ui.to_string(),
            name: name.to_string(),
            concept_ui: concept_ui.to_string(),
            mapped: mapped.iter().map(|m| m.to_string()).collect(),
        }
    }
}

/// Both files of one annual release.
#[derive(Debug, Clone)]
pub struct YearFx {
    pub year: i32,
    pub descriptors: Vec<DescriptorFx>,
    pub scrs: Vec<ScrFx>,
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

fn push_concept(
    out: &mut String,
    ui: &str,
    preferred: bool,
    terms: &[(String, bool)],
    relations: &str,
) {
    let flag = if preferred { "Y" } else { "N" };
    let _ = writeln!(out, "  <Concept PreferredConceptYN=\"{flag}\">");
    let _ = writeln!(out, "   <ConceptUI>{}</ConceptUI>", xml_escape(ui));
    if let Some((name, _)) = terms.first() {
        let _ = writeln!(
            out,
            "   <ConceptName><String>{}</String></ConceptName>",
            xml_escape(name)
        );
    }
    out.push_str(relations);
    out.push_str("   <TermList>\n");
    for (i, (term, is_preferred)) in terms.iter().enumerate() {
        let pref = if *is_preferred { "Y" } else { "N" };
        let _ = write!(
            out,
            "    <Term ConceptPreferredTermYN=\"{pref}\" IsPermutedTermYN=\"N\">\n     \
             <TermUI>T{}{:03}</TermUI>\n     <String>{}</String>\n    </Term>\n",
            &ui[1..],
            i,
            xml_escape(term)
        );
    }
    out.push_str("   </TermList>\n  </Concept>\n");
}

/// Render a complete descriptor file for one release year.
pub fn descriptor_set_xml(year: i32, descriptors: &[DescriptorFx]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(
        out,
        "<!DOCTYPE DescriptorRecordSet SYSTEM \"desc{year}.dtd\">"
    );
    let _ = writeln!(out, "<DescriptorRecordSet LanguageCode=\"eng\">");
    for d in descriptors {
        out.push_str(" <DescriptorRecord DescriptorClass=\"1\">\n");
        let _ = writeln!(out, "  <DescriptorUI>{}</DescriptorUI>", xml_escape(&d.ui));
        let _ = writeln!(
            out,
            "  <DescriptorName><String>{}</String></DescriptorName>",
            xml_escape(&d.name)
        );
        let _ = writeln!(
            out,
            "  <DateCreated><Year>{}</Year><Month>01</Month><Day>01</Day></DateCreated>",
            year
        );
        if let Some(pmn) = &d.pmn {
            let _ = writeln!(
                out,
                "  <PublicMeSHNote>{}</PublicMeSHNote>",
                xml_escape(pmn)
            );
        }
        if !d.pi.is_empty() {
            out.push_str("  <PreviousIndexingList>\n");
            for note in &d.pi {
                let _ = writeln!(
                    out,
                    "   <PreviousIndexing>{}</PreviousIndexing>",
                    xml_escape(note)
                );
            }
            out.push_str("  </PreviousIndexingList>\n");
        }
        if !d.trees.is_empty() {
            out.push_str("  <TreeNumberList>\n");
            for tree in &d.trees {
                let _ = writeln!(out, "   <TreeNumber>{}</TreeNumber>", xml_escape(tree));
            }
            out.push_str("  </TreeNumberList>\n");
        }
        out.push_str(&d.extra_xml);
        out.push_str("  <ConceptList>\n");

        let mut relations = String::new();
        if !d.subordinates.is_empty() {
            relations.push_str("   <ConceptRelationList>\n");
            for sub in &d.subordinates {
                let _ = write!(
                    relations,
                    "    <ConceptRelation RelationName=\"{}\">\n     \
                     <Concept1UI>{}</Concept1UI>\n     <Concept2UI>{}</Concept2UI>\n    \
                     </ConceptRelation>\n",
                    sub.relation,
                    xml_escape(&d.concept_ui),
                    xml_escape(&sub.ui)
                );
            }
            relations.push_str("   </ConceptRelationList>\n");
        }

        let mut terms: Vec<(String, bool)> = vec![(d.name.clone(), true)];
        terms.extend(d.extra_terms.iter().map(|t| (t.clone(), false)));
        push_concept(&mut out, &d.concept_ui, true, &terms, &relations);
        for sub in &d.subordinates {
            push_concept(
                &mut out,
                &sub.ui,
                false,
                &[(sub.preferred_term.clone(), true)],
                "",
            );
        }
        out.push_str("  </ConceptList>\n </DescriptorRecord>\n");
    }
    out.push_str("</DescriptorRecordSet>\n");
    out
}

/// Render a complete supplementary-record file for one release year.
pub fn scr_set_xml(year: i32, scrs: &[ScrFx]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(
        out,
        "<!DOCTYPE SupplementalRecordSet SYSTEM \"supp{year}.dtd\">"
    );
    out.push_str("<SupplementalRecordSet LanguageCode=\"eng\">\n");
    for s in scrs {
        out.push_str(" <SupplementalRecord SCRClass=\"1\">\n");
        let _ = writeln!(
            out,
            "  <SupplementalRecordUI>{}</SupplementalRecordUI>",
            xml_escape(&s.ui)
        );
        let _ = writeln!(
            out,
            "  <SupplementalRecordName><String>{}</String></SupplementalRecordName>",
            xml_escape(&s.name)
        );
        out.push_str("  <HeadingMappedToList>\n");
        for (i, mapped) in s.mapped.iter().enumerate() {
            let star = if i == 0 { "*" } else { "" };
            let _ = write!(
                out,
                "   <HeadingMappedTo>\n    <DescriptorReferredTo>\n     \
                 <DescriptorUI>{star}{}</DescriptorUI>\n     \
                 <DescriptorName><String>mapped heading</String></DescriptorName>\n    \
                 </DescriptorReferredTo>\n   </HeadingMappedTo>\n",
                xml_escape(mapped)
            );
        }
        out.push_str("  </HeadingMappedToList>\n  <ConceptList>\n");
        push_concept(&mut out, &s.concept_ui, true, &[(s.name.clone(), true)], "");
        out.push_str("  </ConceptList>\n </SupplementalRecord>\n");
    }
    out.push_str("</SupplementalRecordSet>\n");
    out
}

/// Write `desc{year}.xml` and `supp{year}.xml` for every year into `dir`.
pub fn write_corpus(dir: &Path, years: &[YearFx]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for y in years {
        fs::write(
            dir.join(format!("desc{}.xml", y.year)),
            descriptor_set_xml(y.year, &y.descriptors),
        )?;
        fs::write(
            dir.join(format!("supp{}.xml", y.year)),
            scr_set_xml(y.year, &y.scrs),
        )?;
    }
    Ok(())
}

fn main_descriptors(year: i32) -> Vec<DescriptorFx> {
    assert!((2014..=2020).contains(&year));
    let mut v = vec![
        DescriptorFx::new("D900001", "Cell Death", &["G04.146"]),
        if year <= 2019 {
            DescriptorFx::new("D900002", "Necrosis", &["G04.146.500", "C23.550.717"])
        } else {
            DescriptorFx::new("D900002", "Necrosis", &["C23.550.717"])
        },
        DescriptorFx::new("D900010", "Adenocarcinoma", &["C04.557.470.200.025"]),
        DescriptorFx::new("D900011", "Lung Neoplasms", &["C04.588.894.797.520"]),
        DescriptorFx::new("D900013", "Arbovirus Infections", &["C02.782.417"])
            .term("Infections, Arbovirus"),
        DescriptorFx::new(
            "D900025",
            "Flavivirus Infections",
            &["C02.782.350.250", "C02.782.417.300"],
        ),
        DescriptorFx::new("D900014", "Joint Diseases", &["C05.550"]),
        if year <= 2016 {
            DescriptorFx::new("D900015", "Chondrocalcinosis", &["C05.550.114"])
        } else {
            DescriptorFx::new("D900015", "Chondrocalcinosis", &["C05.550.290.154"])
        },
        if year <= 2016 {
            DescriptorFx::new("D900016", "Gout", &["C05.550.354"])
        } else {
            DescriptorFx::new("D900016", "Gout", &["C05.550.290.423"])
        },
        DescriptorFx::new("D900017", "Dystocia", &["C13.703.420"]),
        DescriptorFx::new("D900018", "Shoulder", &["A01.560"]),
        DescriptorFx::new("D900019", "tau Proteins", &["D12.644.360"]),
        DescriptorFx::new("D900020", "Disease Attributes", &["C23.550.288"]),
        DescriptorFx::new("D900021", "Rare Diseases", &["C23.550.288.828"]).term("Orphan Diseases"),
        DescriptorFx::new("D900023", "Arthritis", &["C05.550.091"]),
    ];
    if year <= 2015 {
        v.push(
            DescriptorFx::new("D910001", "Pygeum", &["B01.650.700"])
                .concept("M910001")
                .subordinate("M910002", "Prunus africana", "NRW"),
        );
    }
    if year >= 2015 {
        v.push(
            DescriptorFx::new("D910003", "Zika Virus Infection", &["C02.782.417.300.980"]).pi(&[
                "Arbovirus Infections (1977-2014)",
                "Flavivirus Infections (2007-2014)",
            ]),
        );
        v.push(DescriptorFx::new(
            "D910004",
            "Long Term Adverse Effects",
            &["E01.789.800"],
        ));
    }
    if year >= 2016 {
        v.push(
            DescriptorFx::new("D910002", "Prunus africana", &["B01.650.701"]).concept("M910002"),
        );
        v.push(
            DescriptorFx::new("D910014", "Tauopathies", &["C10.574.945"])
                .pi(&["tau Proteins (1997-2015)"]),
        );
    }
    if year >= 2017 {
        v.push(
            DescriptorFx::new("D910006", "Crystal Arthropathies", &["C05.550.290"])
                .pi(&["Chondrocalcinosis (1966-2016)", "Gout (1966-2016)"]),
        );
    }
    if year >= 2018 {
        v.push(
            DescriptorFx::new("D910007", "Blau Syndrome", &["C05.550.091.700"])
                .concept("M910778")
                .pmn("2018; BLAU SYNDROME was indexed under ARTHRITIS 1995-2017"),
        );
        v.push(DescriptorFx::new(
            "D910008",
            "Receptors, Quux",
            &["D12.776.543.750"],
        ));
    }
    if year >= 2019 {
        v.push(
            DescriptorFx::new(
                "D910005",
                "Adenocarcinoma of Lung",
                &["C04.557.470.200.025.022", "C04.588.894.797.520.055"],
            )
            .concept("M910005")
            .pmn("2019; ADENOCARCINOMA OF LUNG was indexed under ADENOCARCINOMA 1989-2018"),
        );
    }
    if year >= 2020 {
        v.push(
            DescriptorFx::new("D910009", "Regulated Cell Death", &["G04.146.750"])
                .pi(&["Cell Death (1976-2019)"]),
        );
        v.push(
            DescriptorFx::new("D910010", "Ferroptosis", &["G04.146.750.160"])
                .pi(&["Cell Death (2012-2019)"]),
        );
        v.push(
            DescriptorFx::new("D910011", "Necroptosis", &["G04.146.750.545"])
                .pi(&["Necrosis (2012-2019)"]),
        );
        v.push(
            DescriptorFx::new("D910012", "Undiagnosed Diseases", &["C23.550.288.920"])
                .pi(&["Rare Diseases (2000-2019)"]),
        );
        v.push(
            DescriptorFx::new("D910013", "Shoulder Dystocia", &["C13.703.420.491"])
                .pi(&["Dystocia (1968-2019) and Shoulder (1968-2019)"]),
        );
    }
    v
}

fn main_scrs(year: i32) -> Vec<ScrFx> {
    let mut v = Vec::new();
    if year <= 2017 {
        v.push(ScrFx::new(
            "C910001",
            "Blau Syndrome",
            "M910777",
            &["D900023"],
        ));
    }
    if year <= 2018 {
        v.push(ScrFx::new(
            "C910002",
            "Adenocarcinoma of Lung",
            "M910005",
            &["D900010", "D900011"],
        ));
    }
    v
}

/// Seven annual releases (2014-2020) exercising every provenance category and
/// type: concept promotion, supplementary-record promotion (both via shared
/// concepts and via public-note text), previous-indexing hosts at every
/// hierarchy relation, and brand-new subtrees.
pub fn main_corpus() -> Vec<YearFx> {
    (2014..=2020)
        .map(|year| YearFx {
            year,
            descriptors: main_descriptors(year),
            scrs: main_scrs(year),
        })
        .collect()
}

/// Expected annotation for one new descriptor in [`main_corpus`].
#[derive(Debug, Clone, Copy)]
pub struct ExpectedRecord {
    pub id: &'static str,
    pub name: &'static str,
    pub intro_year: i32,
    pub category: u8,
    pub codes: &'static [&'static str],
    pub host_ids: &'static [&'static str],
    pub host_names: &'static [&'static str],
}

/// Hand-checked outcomes for every new descriptor in [`main_corpus`],
/// sorted by (intro_year, id). Host lists are in record order
/// (first mention preserved, duplicates dropped).
pub fn main_expected() -> Vec<ExpectedRecord> {
    vec![
        ExpectedRecord {
            id: "D910003",
            name: "Zika Virus Infection",
            intro_year: 2015,
            category: 3,
            codes: &["3.2", "3.3"],
            host_ids: &["D900013", "D900025"],
            host_names: &["Arbovirus Infections", "Flavivirus Infections"],
        },
        ExpectedRecord {
            id: "D910004",
            name: "Long Term Adverse Effects",
            intro_year: 2015,
            category: 4,
            codes: &["4.0"],
            host_ids: &[],
            host_names: &[],
        },
        ExpectedRecord {
            id: "D910002",
            name: "Prunus africana",
            intro_year: 2016,
            category: 1,
            codes: &["1.1"],
            host_ids: &["D910001"],
            host_names: &["Pygeum"],
        },
        ExpectedRecord {
            id: "D910014",
            name: "Tauopathies",
            intro_year: 2016,
            category: 3,
            codes: &["3.5"],
            host_ids: &["D900019"],
            host_names: &["tau Proteins"],
        },
        ExpectedRecord {
            id: "D910006",
            name: "Crystal Arthropathies",
            intro_year: 2017,
            category: 3,
            codes: &["3.4"],
            host_ids: &["D900015", "D900016"],
            host_names: &["Chondrocalcinosis", "Gout"],
        },
        ExpectedRecord {
            id: "D910007",
            name: "Blau Syndrome",
            intro_year: 2018,
            category: 2,
            codes: &["2.2"],
            host_ids: &["D900023"],
            host_names: &["Arthritis"],
        },
        ExpectedRecord {
            id: "D910008",
            name: "Receptors, Quux",
            intro_year: 2018,
            category: 4,
            codes: &["4.0"],
            host_ids: &[],
            host_names: &[],
        },
        ExpectedRecord {
            id: "D910005",
            name: "Adenocarcinoma of Lung",
            intro_year: 2019,
            category: 2,
            codes: &["2.2"],
            host_ids: &["D900010", "D900011"],
            host_names: &["Adenocarcinoma", "Lung Neoplasms"],
        },
        ExpectedRecord {
            id: "D910009",
            name: "Regulated Cell Death",
            intro_year: 2020,
            category: 3,
            codes: &["3.2"],
            host_ids: &["D900001"],
            host_names: &["Cell Death"],
        },
        ExpectedRecord {
            id: "D910010",
            name: "Ferroptosis",
            intro_year: 2020,
            category: 3,
            codes: &["3.3"],
            host_ids: &["D900001"],
            host_names: &["Cell Death"],
        },
        ExpectedRecord {
            id: "D910011",
            name: "Necroptosis",
            intro_year: 2020,
            category: 3,
            codes: &["3.5"],
            host_ids: &["D900002"],
            host_names: &["Necrosis"],
        },
        ExpectedRecord {
            id: "D910012",
            name: "Undiagnosed Diseases",
            intro_year: 2020,
            category: 3,
            codes: &["3.5"],
            host_ids: &["D900021"],
            host_names: &["Rare Diseases"],
        },
        ExpectedRecord {
            id: "D910013",
            name: "Shoulder Dystocia",
            intro_year: 2020,
            category: 3,
            codes: &["3.2", "3.5"],
            host_ids: &["D900017", "D900018"],
            host_names: &["Dystocia", "Shoulder"],
        },
    ]
}

/// Three releases (2017-2019) where both note-derived lookups miss their
/// targets by one typo, forcing review items; [`review_overrides_csv`]
/// resolves both.
pub fn review_corpus() -> Vec<YearFx> {
    let statics = |_: i32| {
        vec![
            DescriptorFx::new("D800001", "Bar Disease", &["C08.200"]),
            DescriptorFx::new("D800002", "Green Syndrome", &["C08.300"]),
        ]
    };
    let mut years = Vec::new();
    years.push(YearFx {
        year: 2017,
        descriptors: statics(2017),
        scrs: vec![ScrFx::new(
            "C800001",
            "Misspelled Syndrome",
            "M800010",
            &["D800001"],
        )],
    });
    let mut d2018 = statics(2018);
    d2018.push(
        DescriptorFx::new("D810001", "Misspelt Disease", &["C08.200.700"])
            .pmn("2018; MISPELLED SYNDROME was indexed under BAR DISEASE 1990-2017"),
    );
    years.push(YearFx {
        year: 2018,
        descriptors: d2018.clone(),
        scrs: vec![],
    });
    let mut d2019 = d2018;
    d2019.push(
        DescriptorFx::new("D810002", "Blue Tongue Variant", &["C08.300.500"])
            .pi(&["Green Sindrome (2000-2018)"]),
    );
    years.push(YearFx {
        year: 2019,
        descriptors: d2019,
        scrs: vec![],
    });
    years
}

/// Override rows answering both review items raised by [`review_corpus`].
pub fn review_overrides_csv() -> String {
    "descriptor_id,kind,resolved_ids\nD810001,pmn_scr,C800001\nD810002,pi_host,D800002\n"
        .to_string()
}

/// Three byte-identical releases: no descriptor is ever introduced.
pub fn static_corpus() -> Vec<YearFx> {
    (2017..=2019)
        .map(|year| YearFx {
            year,
            descriptors: vec![
                DescriptorFx::new("D700001", "Alpha Fixture", &["A01.100"]),
                DescriptorFx::new("D700002", "Beta Fixture", &["B01.200"]),
            ],
            scrs: vec![],
        })
        .collect()
}

/// A 2017 release that parses plus a 2018 descriptor file that dies mid-record
/// (mismatched end tag), for fatal-error handling tests.
pub fn write_corrupt_corpus(dir: &Path) -> std::io::Result<()> {
    let good = YearFx {
        year: 2017,
        descriptors: vec![DescriptorFx::new("D700001", "Alpha Fixture", &["A01.100"])],
        scrs: vec![],
    };
    write_corpus(dir, &[good])?;
    fs::write(
        dir.join("desc2018.xml"),
        "<?xml version=\"1.0\"?>\n<DescriptorRecordSet>\n <DescriptorRecord>\n  \
         <DescriptorUI>D700001</DescriptorRecord>\n",
    )?;
    fs::write(dir.join("supp2018.xml"), scr_set_xml(2018, &[]))?;
    Ok(())
}

/// Write a descriptor file of `records` small records, each padded with an
/// `Annotation` blob of roughly `payload` bytes that the streaming parser must
/// pass over without buffering the whole file.
pub fn write_large_skip_file(path: &Path, records: usize, payload: usize) -> std::io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "<?xml version=\"1.0\"?>")?;
    writeln!(w, "<DescriptorRecordSet LanguageCode=\"eng\">")?;
    let chunk = "all work and no play makes the indexer a dull tool ";
    let reps = payload / chunk.len() + 1;
    for i in 0..records {
        writeln!(w, " <DescriptorRecord>")?;
        writeln!(w, "  <DescriptorUI>D{:06}</DescriptorUI>", 500_000 + i)?;
        writeln!(
            w,
            "  <DescriptorName><String>Padding Heading {i}</String></DescriptorName>"
        )?;
        write!(w, "  <Annotation>")?;
        for _ in 0..reps {
            w.write_all(chunk.as_bytes())?;
        }
        writeln!(w, "</Annotation>")?;
        writeln!(w, "  <TreeNumberList>")?;
        writeln!(w, "   <TreeNumber>A01.{:03}</TreeNumber>", i % 1000)?;
        writeln!(w, "  </TreeNumberList>")?;
        writeln!(w, "  <ConceptList>")?;
        writeln!(w, "   <Concept PreferredConceptYN=\"Y\">")?;
        writeln!(w, "    <ConceptUI>M{:06}</ConceptUI>", 500_000 + i)?;
        writeln!(w, "    <TermList>")?;
        writeln!(w, "     <Term ConceptPreferredTermYN=\"Y\">")?;
        writeln!(w, "      <String>Padding Heading {i}</String>")?;
        writeln!(w, "     </Term>")?;
        writeln!(w, "    </TermList>")?;
        writeln!(w, "   </Concept>")?;
        writeln!(w, "  </ConceptList>")?;
        writeln!(w, " </DescriptorRecord>")?;
    }
    writeln!(w, "</DescriptorRecordSet>")?;
    w.flush()
}
