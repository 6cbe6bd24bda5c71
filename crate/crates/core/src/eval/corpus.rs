use rayon::prelude::*;

use super::confusion::ConfusionMatrix;
use super::scores::{iou_per_class, ClassScores, ScoringMode};
use super::table::ClassScoreTable;
use crate::error::{Error, Result};
use crate::mask_io::{load_mask, DatasetManifest};

/// Scores one component against the corpus ground truth.
pub fn evaluate_component(
    manifest: &DatasetManifest,
    component: &str,
    mode: ScoringMode,
) -> Result<ClassScores> {
    let idx = manifest
        .component_index(component)
        .ok_or_else(|| Error::UnknownComponent(component.to_owned()))?;
    let mut rows = evaluate_components(manifest, &[idx], mode)?;
    Ok(rows.remove(0))
}

/// One row per manifest component, in manifest order.
pub fn score_table(manifest: &DatasetManifest, mode: ScoringMode) -> Result<ClassScoreTable> {
    let all: Vec<usize> = (0..manifest.components.len()).collect();
    let rows = evaluate_components(manifest, &all, mode)?;
    Ok(ClassScoreTable::new(
        mode,
        manifest.class_names.clone(),
        manifest.components.clone(),
        rows,
    ))
}

/// Evaluates several components in one pass over the corpus so each
/// ground-truth mask is read once.
fn evaluate_components(
    manifest: &DatasetManifest,
    components: &[usize],
    mode: ScoringMode,
) -> Result<Vec<ClassScores>> {
    if let Some(img) = manifest.images.iter().find(|i| i.ground_truth.is_none()) {
        return Err(Error::MissingGroundTruth {
            image_id: img.image_id.clone(),
        });
    }
    let c = manifest.class_count();
    let per_image = |img: &crate::mask_io::ImageRecord| -> Result<Vec<ConfusionMatrix>> {
        let gt_path = manifest.ground_truth_path(img).expect("checked above");
        let gt = load_mask(gt_path, c)?;
        components
            .iter()
            .map(|&k| {
                let pred = load_mask(manifest.component_path(img, k), c)?;
                ConfusionMatrix::from_masks(&pred, &gt, c)
            })
            .collect()
    };

    match mode {
        ScoringMode::Accumulated => {
            let empty = || vec![ConfusionMatrix::new(c); components.len()];
            // Integer sums: the grouping rayon picks cannot change the result.
            let totals = manifest
                .images
                .par_iter()
                .map(per_image)
                .try_reduce(empty, |mut acc, row| {
                    for (a, b) in acc.iter_mut().zip(&row) {
                        a.merge(b);
                    }
                    Ok(acc)
                })?;
            Ok(totals.iter().map(iou_per_class).collect())
        }
        ScoringMode::PerImageMean => {
            let per_image_scores: Vec<Vec<ClassScores>> = manifest
                .images
                .par_iter()
                .map(|img| Ok(per_image(img)?.iter().map(iou_per_class).collect()))
                .collect::<Result<_>>()?;
            // Summed in manifest order for bit-stable floating point.
            Ok((0..components.len())
                .map(|k| mean_over_images(per_image_scores.iter().map(|row| &row[k]), c))
                .collect())
        }
    }
}

/// Per class, the mean of the defined per-image scores; images where the
/// class is undefined do not count.
pub fn mean_over_images<'a>(
    images: impl Iterator<Item = &'a ClassScores>,
    class_count: usize,
) -> ClassScores {
    let mut sums = vec![0.0f64; class_count];
    let mut counts = vec![0usize; class_count];
    for scores in images {
        for (cls, v) in scores.values().iter().enumerate() {
            if let Some(v) = v {
                sums[cls] += v;
                counts[cls] += 1;
            }
        }
    }
    ClassScores::new(
        sums.into_iter()
            .zip(counts)
            .map(|(s, n)| (n > 0).then(|| s / n as f64))
            .collect(),
    )
}
