//! Component × class score grids and their CSV form.
//!
//! ```text
//! component,mode,bkg,aeroplane,...,tvmonitor,mIoU
//! PuzzleCAM,accumulated,0.8860,0.7920,...,0.4260,0.6977
//! ```
//!
//! Scores are fractions with four decimals; an undefined score is an empty
//! field. The `mIoU` column is derived and ignored when reading.

use std::path::Path;

use super::scores::{mean_iou, ClassScores, ScoringMode};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassScoreTable {
    pub mode: ScoringMode,
    /// May be empty, in which case classes are referred to by id.
    pub class_names: Vec<String>,
    pub components: Vec<String>,
    rows: Vec<ClassScores>,
}

impl ClassScoreTable {
    pub fn new(
        mode: ScoringMode,
        class_names: Vec<String>,
        components: Vec<String>,
        rows: Vec<ClassScores>,
    ) -> Self {
        assert_eq!(components.len(), rows.len(), "one row per component");
        Self {
            mode,
            class_names,
            components,
            rows,
        }
    }

    pub fn class_count(&self) -> usize {
        self.rows
            .first()
            .map_or(self.class_names.len(), ClassScores::len)
    }

    pub fn rows(&self) -> &[ClassScores] {
        &self.rows
    }

    pub fn row(&self, component: usize) -> &ClassScores {
        &self.rows[component]
    }

    pub fn row_by_name(&self, component: &str) -> Option<&ClassScores> {
        self.components
            .iter()
            .position(|c| c == component)
            .map(|i| &self.rows[i])
    }

    /// Display name of a class: its manifest name, or its id when unnamed.
    pub fn class_label(&self, class: usize) -> String {
        self.class_names
            .get(class)
            .cloned()
            .unwrap_or_else(|| class.to_string())
    }

    /// Every score multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self.rows.iter().map(|r| r.scaled(factor)).collect(),
            ..self.clone()
        }
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["component".to_owned(), "mode".to_owned(), "bkg".to_owned()];
        h.extend((1..self.class_count()).map(|c| self.class_label(c)));
        h.push("mIoU".to_owned());
        h
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for (name, row) in self.components.iter().zip(&self.rows) {
            w.write_record(score_record(name, self.mode, row))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv().as_bytes())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        let n = header.len();
        if n < 4
            || &header[0] != "component"
            || &header[1] != "mode"
            || &header[2] != "bkg"
            || &header[n - 1] != "mIoU"
        {
            return Err(Error::Csv(
                "expected header `component,mode,bkg,<classes...>,mIoU`".into(),
            ));
        }
        let class_count = n - 3;
        let mut class_names = vec!["background".to_owned()];
        class_names.extend(header.iter().skip(3).take(class_count - 1).map(str::to_owned));

        let mut mode: Option<ScoringMode> = None;
        let mut components = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let row_mode: ScoringMode = rec[1]
                .parse()
                .map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
            if mode.is_some_and(|m| m != row_mode) {
                return Err(Error::Csv(format!("line {line}: mixed scoring modes")));
            }
            mode = Some(row_mode);
            if components.iter().any(|c| c == &rec[0]) {
                return Err(Error::Csv(format!("line {line}: duplicate component `{}`", &rec[0])));
            }
            components.push(rec[0].to_owned());
            let values = (0..class_count)
                .map(|c| parse_score(&rec[2 + c]).map_err(|e| Error::Csv(format!("line {line}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(ClassScores::new(values));
        }
        let Some(mode) = mode else {
            return Err(Error::Csv("score table has no component rows".into()));
        };
        Ok(Self::new(mode, class_names, components, rows))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// One CSV record in score-table layout.
pub fn score_record(name: &str, mode: ScoringMode, row: &ClassScores) -> Vec<String> {
    let mut rec = vec![name.to_owned(), mode.to_string()];
    rec.extend(row.values().iter().map(|v| format_score(*v)));
    rec.push(format_score(mean_iou(row, true).ok()));
    rec
}

pub fn format_score(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn parse_score(field: &str) -> std::result::Result<Option<f64>, String> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    let v: f64 = field
        .parse()
        .map_err(|_| format!("invalid score `{field}`"))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(format!("score {v} outside [0, 1]"));
    }
    Ok(Some(v))
}
