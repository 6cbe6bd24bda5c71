//! The line-oriented corpus manifest.
//!
//! ```text
//! # comment
//! classes 3
//! class 0 background
//! class 1 person
//! class 2 bottle
//! component CLIMS
//! component DRS
//! image 2007_000032 gt=gt/2007_000032.pgm labels=1,2 clims/2007_000032.pgm drs/2007_000032.pgm
//! ```
//!
//! `gt=-` marks an image without ground truth and `labels=` may be empty.
//! Paths are relative to the manifest's directory.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

pub type ClassId = u8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRecord {
    pub image_id: String,
    pub ground_truth: Option<PathBuf>,
    pub labels: BTreeSet<ClassId>,
    /// One path per manifest component, in component order.
    pub component_masks: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub class_names: Vec<String>,
    pub components: Vec<String>,
    pub images: Vec<ImageRecord>,
    /// Directory that relative paths resolve against.
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c == name)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }

    pub fn ground_truth_path(&self, image: &ImageRecord) -> Option<PathBuf> {
        image.ground_truth.as_deref().map(|p| self.resolve(p))
    }

    pub fn component_path(&self, image: &ImageRecord, component: usize) -> PathBuf {
        self.resolve(&image.component_masks[component])
    }

    /// Parses manifest text; `base_dir` anchors relative paths.
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut class_count: Option<usize> = None;
        let mut class_names: Vec<Option<String>> = Vec::new();
        let mut components: Vec<String> = Vec::new();
        let mut images: Vec<ImageRecord> = Vec::new();
        let mut seen_ids = HashSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |reason: String| Error::Manifest {
                line: line_no,
                reason,
            };
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let mut tokens = line.split_whitespace();
            let Some(directive) = tokens.next() else {
                continue;
            };
            let rest: Vec<&str> = tokens.collect();

            match directive {
                "classes" => {
                    if class_count.is_some() {
                        return Err(err("`classes` declared twice".into()));
                    }
                    let [n] = rest[..] else {
                        return Err(err("expected `classes <C>`".into()));
                    };
                    let n: usize = n
                        .parse()
                        .map_err(|_| err(format!("invalid class count `{n}`")))?;
                    if !(1..=255).contains(&n) {
                        return Err(err(format!("class count {n} outside 1..=255")));
                    }
                    class_count = Some(n);
                    class_names = vec![None; n];
                }
                "class" => {
                    let n = class_count.ok_or_else(|| err("`class` before `classes`".into()))?;
                    let [id, name] = rest[..] else {
                        return Err(err("expected `class <id> <name>`".into()));
                    };
                    let id: usize = id
                        .parse()
                        .ok()
                        .filter(|&i| i < n)
                        .ok_or_else(|| err(format!("invalid class id `{id}`")))?;
                    if class_names[id].is_some() {
                        return Err(err(format!("class {id} declared twice")));
                    }
                    if id == 0 && name != "background" {
                        return Err(err(format!(
                            "class 0 must be named `background`, found `{name}`"
                        )));
                    }
                    class_names[id] = Some(name.to_owned());
                }
                "component" => {
                    if !images.is_empty() {
                        return Err(err("`component` after the first `image`".into()));
                    }
                    let [name] = rest[..] else {
                        return Err(err("expected `component <name>`".into()));
                    };
                    if components.iter().any(|c| c == name) {
                        return Err(err(format!("component `{name}` declared twice")));
                    }
                    components.push(name.to_owned());
                }
                "image" => {
                    let n = class_count.ok_or_else(|| err("`image` before `classes`".into()))?;
                    let record = parse_image(&rest, n, components.len()).map_err(err)?;
                    if !seen_ids.insert(record.image_id.clone()) {
                        return Err(err(format!("duplicate image id `{}`", record.image_id)));
                    }
                    images.push(record);
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }

        let eof = text.lines().count() + 1;
        if class_count.is_none() {
            return Err(Error::Manifest {
                line: eof,
                reason: "missing `classes` directive".into(),
            });
        }
        let class_names = class_names
            .into_iter()
            .enumerate()
            .map(|(id, n)| {
                n.ok_or(Error::Manifest {
                    line: eof,
                    reason: format!("class {id} has no name"),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            class_names,
            components,
            images,
            base_dir: base_dir.into(),
        })
    }

    /// Serializes back to manifest text. Parsing the output yields an
    /// equal manifest.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "classes {}", self.class_names.len());
        for (id, name) in self.class_names.iter().enumerate() {
            let _ = writeln!(out, "class {id} {name}");
        }
        for c in &self.components {
            let _ = writeln!(out, "component {c}");
        }
        for img in &self.images {
            let gt = img
                .ground_truth
                .as_ref()
                .map_or_else(|| "-".to_owned(), |p| p.display().to_string());
            let labels: Vec<String> = img.labels.iter().map(|l| l.to_string()).collect();
            let _ = write!(out, "image {} gt={gt} labels={}", img.image_id, labels.join(","));
            for p in &img.component_masks {
                let _ = write!(out, " {}", p.display());
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_text().as_bytes())
    }
}

fn parse_image(
    rest: &[&str],
    class_count: usize,
    component_count: usize,
) -> std::result::Result<ImageRecord, String> {
    let Some((&image_id, rest)) = rest.split_first() else {
        return Err("expected `image <id> gt=<path|-> labels=<ids> <paths...>`".into());
    };
    let mut ground_truth = None;
    let mut labels = None;
    let mut paths = Vec::new();
    for tok in rest {
        if let Some(v) = tok.strip_prefix("gt=") {
            if v.is_empty() {
                return Err(format!("image {image_id}: empty gt= (use gt=-)"));
            }
            ground_truth = Some((v != "-").then(|| PathBuf::from(v)));
        } else if let Some(v) = tok.strip_prefix("labels=") {
            let mut set = BTreeSet::new();
            for id in v.split(',').filter(|s| !s.is_empty()) {
                let parsed: usize = id
                    .parse()
                    .map_err(|_| format!("image {image_id}: invalid label `{id}`"))?;
                if parsed == 0 {
                    return Err(format!("image {image_id}: background cannot be an image label"));
                }
                if parsed >= class_count {
                    return Err(format!("image {image_id}: label {parsed} out of range"));
                }
                set.insert(parsed as ClassId);
            }
            labels = Some(set);
        } else {
            paths.push(PathBuf::from(tok));
        }
    }
    let ground_truth = ground_truth.ok_or_else(|| format!("image {image_id}: missing gt="))?;
    let labels = labels.ok_or_else(|| format!("image {image_id}: missing labels="))?;
    if paths.len() != component_count {
        return Err(format!(
            "image {image_id}: {} component paths, expected {component_count}",
            paths.len()
        ));
    }
    Ok(ImageRecord {
        image_id: image_id.to_owned(),
        ground_truth,
        labels,
        component_masks: paths,
    })
}

/// Reads and parses a manifest file; relative paths resolve against its
/// directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_owned(),
        _ => PathBuf::from("."),
    };
    DatasetManifest::parse(&text, base)
}
