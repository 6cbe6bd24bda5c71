use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::manifest::{DatasetManifest, ImageRecord};
use super::mask::{decode_mask, LabelMask};
use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FindingKind {
    MissingFile { path: PathBuf },
    Unreadable { path: PathBuf, reason: String },
    OutOfRange { path: PathBuf, value: u8, x: usize, y: usize },
    DimensionMismatch {
        path: PathBuf,
        expected: (usize, usize),
        found: (usize, usize),
    },
    MissingGroundTruth,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub image_id: String,
    pub kind: FindingKind,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.image_id)?;
        match &self.kind {
            FindingKind::MissingFile { path } => write!(f, "missing file {}", path.display()),
            FindingKind::Unreadable { path, reason } => {
                write!(f, "unreadable file {}: {reason}", path.display())
            }
            FindingKind::OutOfRange { path, value, x, y } => write!(
                f,
                "class index {value} out of range at ({x},{y}) in {}",
                path.display()
            ),
            FindingKind::DimensionMismatch {
                path,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch in {}: {}x{} but expected {}x{}",
                path.display(),
                found.0,
                found.1,
                expected.0,
                expected.1
            ),
            FindingKind::MissingGroundTruth => write!(f, "missing ground truth"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks that every file the manifest names exists, decodes, stays within
/// the class range, and matches its image's dimensions. The reference
/// dimensions are the ground truth's, or the first readable component mask
/// when the image has none. With `require_ground_truth`, images lacking it
/// are reported too.
pub fn validate_corpus(manifest: &DatasetManifest, require_ground_truth: bool) -> ValidationReport {
    let findings = manifest
        .images
        .par_iter()
        .map(|img| validate_image(manifest, img, require_ground_truth))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    ValidationReport { findings }
}

fn validate_image(manifest: &DatasetManifest, img: &ImageRecord, require_gt: bool) -> Vec<Finding> {
    let mut kinds = Vec::new();
    let c = manifest.class_count();
    let mut reference: Option<(usize, usize)> = None;

    match manifest.ground_truth_path(img) {
        Some(p) => {
            if let Some(m) = check_file(&p, c, &mut kinds) {
                reference = Some(m.dims());
            }
        }
        None if require_gt => kinds.push(FindingKind::MissingGroundTruth),
        None => {}
    }
    for comp in 0..manifest.components.len() {
        let p = manifest.component_path(img, comp);
        if let Some(m) = check_file(&p, c, &mut kinds) {
            match reference {
                None => reference = Some(m.dims()),
                Some(expected) if expected != m.dims() => {
                    kinds.push(FindingKind::DimensionMismatch {
                        path: p,
                        expected,
                        found: m.dims(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    kinds
        .into_iter()
        .map(|kind| Finding {
            image_id: img.image_id.clone(),
            kind,
        })
        .collect()
}

fn check_file(path: &Path, class_count: usize, out: &mut Vec<FindingKind>) -> Option<LabelMask> {
    if !path.is_file() {
        out.push(FindingKind::MissingFile {
            path: path.to_owned(),
        });
        return None;
    }
    // Decode without the range check so a bad pixel does not hide a
    // dimension finding.
    let mask = match std::fs::read(path)
        .map_err(|e| Error::io(path, e))
        .and_then(|b| decode_mask(&b, path))
    {
        Ok(m) => m,
        Err(e) => {
            out.push(FindingKind::Unreadable {
                path: path.to_owned(),
                reason: e.to_string(),
            });
            return None;
        }
    };
    if let Err(Error::ClassOutOfRange { value, x, y }) = mask.check_classes(class_count) {
        out.push(FindingKind::OutOfRange {
            path: path.to_owned(),
            value,
            x,
            y,
        });
    }
    Some(mask)
}
