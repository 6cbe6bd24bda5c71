use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::SynthConfig;
use super::degrade::degrade;
use super::rng::{degrade_stream, ground_truth_stream, CounterRng};
use crate::error::{Error, Result};
use crate::fsutil::StagedDir;
use crate::mask_io::{ClassId, DatasetManifest, ImageRecord, LabelMask};

/// Placement attempts per rectangle before the image is declared
/// infeasible.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthImage {
    pub ground_truth: LabelMask,
    pub labels: BTreeSet<ClassId>,
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

impl Rect {
    /// Overlap after growing `self` by `gap` on every side.
    fn too_close(&self, other: &Rect, gap: usize) -> bool {
        self.x < other.x + other.w + gap
            && other.x < self.x + self.w + gap
            && self.y < other.y + other.h + gap
            && other.y < self.y + self.h + gap
    }
}

pub fn image_id(index: usize) -> String {
    format!("img_{index:05}")
}

/// Ground truth for image `index`: non-overlapping axis-aligned rectangles
/// of random foreground classes on background.
pub fn generate_image(config: &SynthConfig, index: usize) -> Result<SynthImage> {
    let mut rng = CounterRng::new(config.seed, ground_truth_stream(index));
    let span = |rng: &mut CounterRng, (lo, hi): (usize, usize)| lo + rng.below((hi - lo + 1) as u64) as usize;
    let requested = span(&mut rng, config.shapes);
    let mut mask = LabelMask::filled(config.width, config.height, 0)?;
    let mut placed: Vec<Rect> = Vec::with_capacity(requested);
    let mut labels = BTreeSet::new();

    for _ in 0..requested {
        let class = 1 + rng.below(config.class_count() as u64 - 1) as ClassId;
        let mut found = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let w = span(&mut rng, config.rect);
            let h = span(&mut rng, config.rect);
            let r = Rect {
                x: rng.below((config.width - w + 1) as u64) as usize,
                y: rng.below((config.height - h + 1) as u64) as usize,
                w,
                h,
            };
            if placed.iter().all(|p| !r.too_close(p, config.gap)) {
                found = Some(r);
                break;
            }
        }
        let Some(r) = found else {
            return Err(Error::PlacementInfeasible {
                image_index: index,
                placed: placed.len(),
                requested,
            });
        };
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                mask.set(x, y, class);
            }
        }
        placed.push(r);
        labels.insert(class);
    }
    Ok(SynthImage {
        ground_truth: mask,
        labels,
    })
}

pub fn generate_ground_truth(config: &SynthConfig) -> Result<Vec<SynthImage>> {
    config.validate()?;
    (0..config.images)
        .into_par_iter()
        .map(|i| generate_image(config, i))
        .collect()
}

/// Component `component`'s pseudo-label for image `index`.
pub fn component_mask(config: &SynthConfig, component: usize, index: usize, gt: &LabelMask) -> LabelMask {
    let mut rng = CounterRng::new(config.seed, degrade_stream(index));
    degrade(gt, &config.components[component].ops, &mut rng)
}

/// Writes `gt/<id>.pgm`, `<component>/<id>.pgm` and `manifest.txt` under
/// `out_dir` and returns the manifest. Nothing is written unless the
/// whole corpus is generated.
pub fn generate_corpus(config: &SynthConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    let stage = StagedDir::new(out_dir)?;

    let images: Vec<ImageRecord> = (0..config.images)
        .into_par_iter()
        .map(|i| {
            let id = image_id(i);
            let img = generate_image(config, i)?;
            let gt_rel = PathBuf::from(format!("gt/{id}.pgm"));
            write(&stage, &gt_rel, &img.ground_truth)?;
            let component_masks = (0..config.components.len())
                .map(|k| {
                    let rel = PathBuf::from(format!("{}/{id}.pgm", config.components[k].name));
                    write(&stage, &rel, &component_mask(config, k, i, &img.ground_truth))?;
                    Ok(rel)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ImageRecord {
                image_id: id,
                ground_truth: Some(gt_rel),
                labels: img.labels,
                component_masks,
            })
        })
        .collect::<Result<_>>()?;

    let manifest = DatasetManifest {
        class_names: config.class_names.clone(),
        components: config.components.iter().map(|p| p.name.clone()).collect(),
        images,
        base_dir: out_dir.to_owned(),
    };
    let mpath = stage.path("manifest.txt")?;
    std::fs::write(&mpath, manifest.to_text()).map_err(|e| Error::io(&mpath, e))?;
    stage.commit()?;
    Ok(manifest)
}

fn write(stage: &StagedDir, rel: &Path, mask: &LabelMask) -> Result<()> {
    let p = stage.path(rel)?;
    std::fs::write(&p, mask.to_pgm()).map_err(|e| Error::io(&p, e))
}
