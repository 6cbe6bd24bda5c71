use crate::mask_io::{ClassId, DatasetManifest};

/// Foreground classes ordered by how many images carry their label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRanking {
    order: Vec<ClassId>,
    counts: Vec<usize>,
}

impl ClassRanking {
    /// `counts[c]` is the instance count of class `c`; index 0 (background)
    /// is ignored. Order is by descending count, ties by ascending id.
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let mut order: Vec<ClassId> = (1..counts.len()).map(|c| c as ClassId).collect();
        order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
        Self { order, counts }
    }

    pub fn order(&self) -> &[ClassId] {
        &self.order
    }

    pub fn count(&self, class: ClassId) -> usize {
        self.counts.get(class as usize).copied().unwrap_or(0)
    }
}

/// Counts, per class, the images whose image-level labels include it.
pub fn rank_classes_by_instances(manifest: &DatasetManifest) -> ClassRanking {
    let mut counts = vec![0usize; manifest.class_count()];
    for img in &manifest.images {
        for &c in &img.labels {
            counts[c as usize] += 1;
        }
    }
    ClassRanking::from_counts(counts)
}
