use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::mask_io::{LabelMask, IGNORE};

/// Pixel counts indexed by (ground truth, prediction).
///
/// Rows are the `C` ground-truth classes. Columns are the `C` predicted
/// classes plus one trailing void column for pixels predicted as
/// [`IGNORE`], which count against their ground-truth class and for no
/// class's prediction. Ground-truth [`IGNORE`] pixels are never counted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConfusionMatrix {
    class_count: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(class_count: usize) -> Self {
        Self {
            class_count,
            counts: vec![0; class_count * (class_count + 1)],
        }
    }

    pub fn from_masks(pred: &LabelMask, gt: &LabelMask, class_count: usize) -> Result<Self> {
        let mut m = Self::new(class_count);
        m.accumulate(pred, gt)?;
        Ok(m)
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    fn stride(&self) -> usize {
        self.class_count + 1
    }

    /// Pixels with ground truth `gt` predicted as `pred`.
    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.stride() + pred]
    }

    /// Pixels with ground truth `gt` predicted as [`IGNORE`].
    pub fn void(&self, gt: usize) -> u64 {
        self.counts[gt * self.stride() + self.class_count]
    }

    /// Number of non-ignored ground-truth pixels accumulated so far.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.class_count).all(|g| {
            (0..self.stride()).all(|p| p == g || self.counts[g * self.stride() + p] == 0)
        })
    }

    /// Adds every pixel of `pred` against `gt`.
    pub fn accumulate(&mut self, pred: &LabelMask, gt: &LabelMask) -> Result<()> {
        gt.ensure_same_dims(pred)?;
        let c = self.class_count;
        let stride = self.stride();
        let w = gt.width();
        for (i, (&g, &p)) in gt.data().iter().zip(pred.data()).enumerate() {
            if g == IGNORE {
                continue;
            }
            let col = if p == IGNORE { c } else { p as usize };
            if g as usize >= c || col > c {
                let value = if g as usize >= c { g } else { p };
                return Err(Error::ClassOutOfRange {
                    value,
                    x: i % w,
                    y: i / w,
                });
            }
            self.counts[g as usize * stride + col] += 1;
        }
        Ok(())
    }

    /// Element-wise sum.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(
            self.class_count, other.class_count,
            "merging confusion matrices of different class counts"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn merged(mut self, other: &ConfusionMatrix) -> Self {
        self.merge(other);
        self
    }

    /// (intersection, union) for class `c`: the diagonal entry, and the row
    /// plus column sums minus the diagonal.
    pub fn intersection_union(&self, c: usize) -> (u64, u64) {
        let stride = self.stride();
        let inter = self.counts[c * stride + c];
        let row: u64 = self.counts[c * stride..(c + 1) * stride].iter().sum();
        let col: u64 = (0..self.class_count)
            .map(|g| self.counts[g * stride + c])
            .sum();
        (inter, row + col - inter)
    }
}

impl AddAssign<&ConfusionMatrix> for ConfusionMatrix {
    fn add_assign(&mut self, rhs: &ConfusionMatrix) {
        self.merge(rhs);
    }
}
