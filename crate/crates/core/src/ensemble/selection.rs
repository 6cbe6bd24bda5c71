use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::ClassScoreTable;
use crate::fsutil::write_atomic;
use crate::mask_io::ClassId;

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionEntry {
    pub class_id: ClassId,
    pub class_name: String,
    pub component: String,
    /// The winning component's IoU on this class.
    pub score: f64,
}

/// The component chosen for each foreground class.
///
/// Holds exactly one entry per class `1..C`, ordered by class id.
/// Background never appears.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionMap {
    entries: Vec<SelectionEntry>,
}

impl SelectionMap {
    /// Entries must cover classes `1..=n` exactly once each, in any order.
    pub fn new(mut entries: Vec<SelectionEntry>) -> Result<Self> {
        entries.sort_by_key(|e| e.class_id);
        for (i, e) in entries.iter().enumerate() {
            if e.class_id as usize != i + 1 {
                return Err(if e.class_id == 0 {
                    Error::Csv("selection must not include background (class 0)".into())
                } else if (e.class_id as usize) < i + 1 {
                    Error::Csv(format!("class {} selected twice", e.class_id))
                } else {
                    Error::IncompleteSelection(i + 1)
                });
            }
            if !e.score.is_finite() {
                return Err(Error::Csv(format!("class {}: non-finite score", e.class_id)));
            }
        }
        Ok(Self { entries })
    }

    /// Including background.
    pub fn class_count(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn entries(&self) -> &[SelectionEntry] {
        &self.entries
    }

    pub fn get(&self, class: ClassId) -> Option<&SelectionEntry> {
        (class as usize)
            .checked_sub(1)
            .and_then(|i| self.entries.get(i))
    }

    pub fn component_for(&self, class: ClassId) -> Option<&str> {
        self.get(class).map(|e| e.component.as_str())
    }

    /// Number of classes won by each component named in the selection.
    pub fn wins_per_component(&self) -> BTreeMap<&str, usize> {
        let mut wins = BTreeMap::new();
        for e in &self.entries {
            *wins.entry(e.component.as_str()).or_insert(0) += 1;
        }
        wins
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["class_id", "class_name", "component", "score"])
            .expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.class_id.to_string(),
                e.class_name.clone(),
                e.component.clone(),
                format!("{:.4}", e.score),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_csv().as_bytes())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["class_id", "class_name", "component", "score"] {
            return Err(Error::Csv(
                "expected header `class_id,class_name,component,score`".into(),
            ));
        }
        let mut entries = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |what: &str| Error::Csv(format!("line {line}: invalid {what}"));
            entries.push(SelectionEntry {
                class_id: rec[0].trim().parse().map_err(|_| bad("class_id"))?,
                class_name: rec[1].to_owned(),
                component: rec[2].to_owned(),
                score: rec[3].trim().parse().map_err(|_| bad("score"))?,
            });
        }
        if entries.is_empty() {
            return Err(Error::Csv("selection has no rows".into()));
        }
        Self::new(entries)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// For every foreground class, the component with the highest score.
///
/// A later component must score strictly higher to displace an earlier one,
/// so ties go to the first component listed. Undefined scores never win.
pub fn select_best(table: &ClassScoreTable) -> Result<SelectionMap> {
    let entries = (1..table.class_count())
        .map(|class| {
            let mut best: Option<(usize, f64)> = None;
            for (k, row) in table.rows().iter().enumerate() {
                if let Some(score) = row.get(class) {
                    if best.is_none_or(|(_, top)| score > top) {
                        best = Some((k, score));
                    }
                }
            }
            let (k, score) = best.ok_or(Error::NoDefinedScore { class_id: class })?;
            Ok(SelectionEntry {
                class_id: class as ClassId,
                class_name: table.class_label(class),
                component: table.components[k].clone(),
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SelectionMap::new(entries)
}
