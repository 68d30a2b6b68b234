//! Run configuration.
//!
//! Settings come from up to three layers — built-in defaults, an optional
//! `key = value` config file, and command-line flags — merged in that order,
//! later layers winning. [`ConfigDraft`] is the partial form the layers are
//! collected in; [`ConfigDraft::finish`] checks the result and produces the
//! validated [`RunConfig`] the pipeline runs on.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harvest::StudyWindow;

pub const DEFAULT_DESCRIPTOR_TEMPLATE: &str = "desc{year}.xml";
pub const DEFAULT_SCR_TEMPLATE: &str = "supp{year}.xml";
pub const DEFAULT_OUTPUT_DIR: &str = "out";
pub const DEFAULT_LOG_LEVEL: &str = "info";

const LOG_LEVELS: [&str; 6] = ["off", "error", "warn", "info", "debug", "trace"];

/// A partially specified configuration; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigDraft {
    pub data_dir: Option<PathBuf>,
    pub descriptor_template: Option<String>,
    pub scr_template: Option<String>,
    pub first_year: Option<i32>,
    pub last_year: Option<i32>,
    pub reference_year: Option<i32>,
    pub overrides_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub log_level: Option<String>,
    pub jobs: Option<usize>,
}

impl ConfigDraft {
    /// Reads a `key = value` file. Blank lines and `#` comments are ignored;
    /// unknown keys and unparseable values are errors with line numbers.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let mut draft = ConfigDraft::default();
        for (index, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::ConfigLine {
                path: path.to_owned(),
                line: index + 1,
                message,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(fail(format!("expected `key = value`, found `{line}`")));
            };
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(fail(format!("empty value for `{key}`")));
            }
            let year = |what: &str| -> Result<i32> {
                value
                    .parse()
                    .map_err(|_| fail(format!("invalid {what} `{value}`")))
            };
            match key {
                "data_dir" => draft.data_dir = Some(PathBuf::from(value)),
                "descriptor_template" => draft.descriptor_template = Some(value.to_owned()),
                "scr_template" => draft.scr_template = Some(value.to_owned()),
                "first_year" => draft.first_year = Some(year("first_year")?),
                "last_year" => draft.last_year = Some(year("last_year")?),
                "reference_year" => draft.reference_year = Some(year("reference_year")?),
                "overrides" => draft.overrides_path = Some(PathBuf::from(value)),
                "output_dir" => draft.output_dir = Some(PathBuf::from(value)),
                "log_level" => draft.log_level = Some(value.to_owned()),
                "jobs" => {
                    draft.jobs = Some(
                        value
                            .parse()
                            .map_err(|_| fail(format!("invalid jobs `{value}`")))?,
                    )
                }
                other => return Err(fail(format!("unknown key `{other}`"))),
            }
        }
        Ok(draft)
    }

    /// Returns `self` with every field set in `over` replaced by it.
    pub fn overlay(mut self, over: ConfigDraft) -> ConfigDraft {
        macro_rules! take {
            ($field:ident) => {
                if over.$field.is_some() {
                    self.$field = over.$field;
                }
            };
        }
        take!(data_dir);
        take!(descriptor_template);
        take!(scr_template);
        take!(first_year);
        take!(last_year);
        take!(reference_year);
        take!(overrides_path);
        take!(output_dir);
        take!(log_level);
        take!(jobs);
        self
    }

    /// Validates and fills defaults. `data_dir` and the three years are
    /// required; everything else has a sensible default.
    pub fn finish(self) -> Result<RunConfig> {
        let require = |name: &str| Error::Config(format!("`{name}` is required"));
        let data_dir = self.data_dir.ok_or_else(|| require("data_dir"))?;
        let first_year = self.first_year.ok_or_else(|| require("first_year"))?;
        let last_year = self.last_year.ok_or_else(|| require("last_year"))?;
        let reference_year = self
            .reference_year
            .ok_or_else(|| require("reference_year"))?;
        // Fails fast on an inverted window; the window itself is rebuilt on
        // demand by RunConfig::window.
        StudyWindow::new(first_year, last_year, reference_year)?;

        let descriptor_template = self
            .descriptor_template
            .unwrap_or_else(|| DEFAULT_DESCRIPTOR_TEMPLATE.to_owned());
        let scr_template = self
            .scr_template
            .unwrap_or_else(|| DEFAULT_SCR_TEMPLATE.to_owned());
        for (name, template) in [
            ("descriptor_template", &descriptor_template),
            ("scr_template", &scr_template),
        ] {
            if !template.contains("{year}") {
                return Err(Error::Config(format!(
                    "`{name}` must contain a {{year}} placeholder, got `{template}`"
                )));
            }
        }
        let log_level = self
            .log_level
            .unwrap_or_else(|| DEFAULT_LOG_LEVEL.to_owned());
        if !LOG_LEVELS.contains(&log_level.as_str()) {
            return Err(Error::Config(format!(
                "unknown log level `{log_level}`; expected one of {}",
                LOG_LEVELS.join(", ")
            )));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("`jobs` must be at least 1".into()));
        }
        Ok(RunConfig {
            data_dir,
            descriptor_template,
            scr_template,
            first_year,
            last_year,
            reference_year,
            overrides_path: self.overrides_path,
            output_dir: self
                .output_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            log_level,
            jobs: self.jobs,
        })
    }
}

/// A complete, validated run configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub descriptor_template: String,
    pub scr_template: String,
    pub first_year: i32,
    pub last_year: i32,
    pub reference_year: i32,
    pub overrides_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub log_level: String,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn window(&self) -> Result<StudyWindow> {
        StudyWindow::new(self.first_year, self.last_year, self.reference_year)
    }

    pub fn descriptor_path(&self, year: i32) -> PathBuf {
        self.data_dir.join(
            self.descriptor_template
                .replace("{year}", &year.to_string()),
        )
    }

    pub fn scr_path(&self, year: i32) -> PathBuf {
        self.data_dir
            .join(self.scr_template.replace("{year}", &year.to_string()))
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.output_dir.join("cache")
    }

    pub fn review_path(&self) -> PathBuf {
        self.output_dir.join("review_items.csv")
    }

    /// Checks the paths a run depends on before any work starts.
    pub fn validate_inputs(&self) -> Result<()> {
        if !self.data_dir.is_dir() {
            return Err(Error::Config(format!(
                "data_dir `{}` is not a directory",
                self.data_dir.display()
            )));
        }
        if let Some(path) = &self.overrides_path {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "overrides file `{}` does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ConfigDraft {
        ConfigDraft {
            data_dir: Some(PathBuf::from("/data")),
            first_year: Some(2015),
            last_year: Some(2020),
            reference_year: Some(2020),
            ..Default::default()
        }
    }

    #[test]
    fn finish_fills_defaults() {
        let config = minimal().finish().unwrap();
        assert_eq!(config.descriptor_template, "desc{year}.xml");
        assert_eq!(config.scr_template, "supp{year}.xml");
        assert_eq!(config.output_dir, PathBuf::from("out"));
        assert_eq!(config.log_level, "info");
        assert_eq!(config.jobs, None);
        assert_eq!(
            config.descriptor_path(2019),
            PathBuf::from("/data/desc2019.xml")
        );
        assert_eq!(config.scr_path(2019), PathBuf::from("/data/supp2019.xml"));
        assert_eq!(config.cache_dir(), PathBuf::from("out/cache"));
    }

    #[test]
    fn finish_requires_the_core_fields() {
        for strip in ["data_dir", "first_year", "last_year", "reference_year"] {
            let mut draft = minimal();
            match strip {
                "data_dir" => draft.data_dir = None,
                "first_year" => draft.first_year = None,
                "last_year" => draft.last_year = None,
                _ => draft.reference_year = None,
            }
            let err = draft.finish().unwrap_err();
            assert!(err.to_string().contains(strip), "{strip}: {err}");
        }
    }

    #[test]
    fn finish_rejects_bad_windows_templates_and_levels() {
        let mut draft = minimal();
        draft.first_year = Some(2021);
        assert!(draft.finish().is_err());

        let mut draft = minimal();
        draft.descriptor_template = Some("descriptors.xml".into());
        assert!(draft.finish().unwrap_err().to_string().contains("{year}"));

        let mut draft = minimal();
        draft.log_level = Some("verbose".into());
        assert!(draft.finish().is_err());

        let mut draft = minimal();
        draft.jobs = Some(0);
        assert!(draft.finish().is_err());
    }

    #[test]
    fn config_file_parses_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# window\ndata_dir = /srv/mesh\nfirst_year = 2015\nlast_year=2020\n\
             reference_year = 2020\noutput_dir = results\njobs = 4\nlog_level = debug\n",
        )
        .unwrap();
        let draft = ConfigDraft::from_file(&path).unwrap();
        assert_eq!(draft.data_dir, Some(PathBuf::from("/srv/mesh")));
        assert_eq!(draft.first_year, Some(2015));
        assert_eq!(draft.jobs, Some(4));
        let config = draft.finish().unwrap();
        assert_eq!(config.output_dir, PathBuf::from("results"));
        assert_eq!(config.log_level, "debug");

        std::fs::write(&path, "data_dir = /srv/mesh\nsurprise = 1\n").unwrap();
        let err = ConfigDraft::from_file(&path).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
        assert!(err.to_string().contains("surprise"));

        std::fs::write(&path, "first_year = soon\n").unwrap();
        assert!(ConfigDraft::from_file(&path).is_err());
    }

    #[test]
    fn overlay_prefers_the_later_layer() {
        let file = ConfigDraft {
            data_dir: Some(PathBuf::from("/from-file")),
            first_year: Some(2010),
            last_year: Some(2020),
            reference_year: Some(2020),
            jobs: Some(2),
            ..Default::default()
        };
        let flags = ConfigDraft {
            first_year: Some(2015),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.first_year, Some(2015));
        assert_eq!(merged.last_year, Some(2020));
        assert_eq!(merged.jobs, Some(2));
        assert_eq!(merged.data_dir, Some(PathBuf::from("/from-file")));
    }
}
