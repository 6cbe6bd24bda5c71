use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use super::merge::{merge_naive, ClasswiseMerger};
use super::ranking::{rank_classes_by_instances, ClassRanking};
use super::selection::SelectionMap;
use crate::error::{Error, Result};
use crate::eval::{iou_per_class, mean_iou, score_record, ClassScores, ConfusionMatrix, ScoringMode};
use crate::fsutil::StagedDir;
use crate::mask_io::{load_mask, DatasetManifest, ImageRecord, LabelMask, MaskFormat, BACKGROUND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Classwise,
    Naive,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Classwise => "classwise",
            Variant::Naive => "naive",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "classwise" => Ok(Variant::Classwise),
            "naive" => Ok(Variant::Naive),
            other => Err(format!("unknown variant `{other}` (expected classwise or naive)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleOptions {
    pub variant: Variant,
    pub format: MaskFormat,
    /// Restrict each image's class-wise merge to its image-level labels.
    pub gate_by_labels: bool,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            variant: Variant::Classwise,
            format: MaskFormat::Pgm,
            gate_by_labels: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub images_written: usize,
    /// Images that had ground truth and entered the evaluation.
    pub images_evaluated: usize,
    /// Accumulated per-class IoU of the ensemble, when any image had
    /// ground truth.
    pub scores: Option<ClassScores>,
    pub miou: Option<f64>,
}

impl EnsembleSummary {
    /// Score-table CSV with a single `ensemble` row.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["component".to_owned(), "mode".to_owned(), "bkg".to_owned()];
        header.extend(class_names.iter().skip(1).cloned());
        header.push("mIoU".to_owned());
        w.write_record(&header).expect("in-memory write");
        let empty = ClassScores::new(vec![None; class_names.len()]);
        let row = self.scores.as_ref().unwrap_or(&empty);
        w.write_record(score_record("ensemble", ScoringMode::Accumulated, row))
            .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

enum Strategy {
    Classwise(ClasswiseMerger),
    Naive(ClassRanking),
}

/// Builds the ensemble mask for every manifest image and writes it to
/// `out_dir/<image_id>.<ext>` along with `summary.csv`.
///
/// Output appears only if every image succeeded. Images are processed in
/// parallel on the current rayon pool; the written bytes do not depend on
/// the number of threads.
pub fn run_ensemble(
    manifest: &DatasetManifest,
    selection: &SelectionMap,
    out_dir: impl AsRef<Path>,
    options: EnsembleOptions,
) -> Result<EnsembleSummary> {
    if selection.class_count() != manifest.class_count() {
        return Err(Error::IncompleteSelection(
            selection.class_count().min(manifest.class_count()),
        ));
    }
    // Resolving the merger checks every selected component exists.
    let merger = ClasswiseMerger::new(selection, &manifest.components)?;
    let strategy = match options.variant {
        Variant::Classwise => Strategy::Classwise(merger),
        Variant::Naive => Strategy::Naive(rank_classes_by_instances(manifest)),
    };
    let stage = StagedDir::new(out_dir.as_ref())?;
    let c = manifest.class_count();
    let ext = options.format.extension();

    let matrices: Vec<Option<ConfusionMatrix>> = manifest
        .images
        .par_iter()
        .map(|img| {
            let mask = build_one(manifest, selection, &strategy, img, options)?;
            let bytes = match options.format {
                MaskFormat::Pgm => mask.to_pgm(),
                MaskFormat::Png => mask.to_png()?,
            };
            let path = stage.path(format!("{}.{ext}", img.image_id))?;
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            manifest
                .ground_truth_path(img)
                .map(|p| {
                    let gt = load_mask(p, c)?;
                    ConfusionMatrix::from_masks(&mask, &gt, c)
                })
                .transpose()
        })
        .collect::<Result<_>>()?;

    let evaluated: Vec<&ConfusionMatrix> = matrices.iter().flatten().collect();
    let scores = (!evaluated.is_empty()).then(|| {
        let total = evaluated
            .iter()
            .fold(ConfusionMatrix::new(c), |acc, m| acc.merged(m));
        iou_per_class(&total)
    });
    let summary = EnsembleSummary {
        images_written: manifest.images.len(),
        images_evaluated: evaluated.len(),
        miou: scores.as_ref().and_then(|s| mean_iou(s, true).ok()),
        scores,
    };
    let summary_path = stage.path("summary.csv")?;
    std::fs::write(&summary_path, summary.to_csv(&manifest.class_names))
        .map_err(|e| Error::io(&summary_path, e))?;
    stage.commit()?;
    Ok(summary)
}

fn build_one(
    manifest: &DatasetManifest,
    selection: &SelectionMap,
    strategy: &Strategy,
    img: &ImageRecord,
    options: EnsembleOptions,
) -> Result<LabelMask> {
    let c = manifest.class_count();
    let load = |k: usize| load_mask(manifest.component_path(img, k), c);
    match strategy {
        Strategy::Classwise(merger) => {
            let required: BTreeSet<usize> = merger.required_components();
            let loaded: Vec<Option<LabelMask>> = (0..manifest.components.len())
                .map(|k| required.contains(&k).then(|| load(k)).transpose())
                .collect::<Result<_>>()?;
            if loaded.iter().all(Option::is_none) {
                // No foreground classes: everything is background.
                let first = load(0)?;
                return LabelMask::filled(first.width(), first.height(), BACKGROUND);
            }
            let placeholder = loaded.iter().flatten().next().expect("checked non-empty").clone();
            let refs: Vec<&LabelMask> = loaded
                .iter()
                .map(|m| m.as_ref().unwrap_or(&placeholder))
                .collect();
            let labels = options.gate_by_labels.then_some(&img.labels);
            merger.merge(&refs, labels)
        }
        Strategy::Naive(ranking) => {
            let masks: Vec<LabelMask> = (0..manifest.components.len())
                .map(load)
                .collect::<Result<_>>()?;
            if img.labels.is_empty() {
                return LabelMask::filled(masks[0].width(), masks[0].height(), BACKGROUND);
            }
            let named: Vec<(&str, &LabelMask)> = manifest
                .components
                .iter()
                .map(String::as_str)
                .zip(&masks)
                .collect();
            merge_naive(&named, selection, ranking, &img.labels).map_err(|e| match e {
                Error::EmptyImageLabels { .. } => Error::EmptyImageLabels {
                    image_id: img.image_id.clone(),
                },
                other => other,
            })
        }
    }
}
