use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::ranking::ClassRanking;
use super::selection::SelectionMap;
use crate::error::{Error, Result};
use crate::mask_io::{ClassId, LabelMask, BACKGROUND, IGNORE};

/// A selection resolved against a list of component names, ready to merge
/// many images.
///
/// A pixel goes to class `c` when the component selected for `c`
/// predicted `c` there. When several classes claim one pixel, the class
/// whose winning score is higher takes it, ties to the lower class id.
/// Unclaimed pixels become background, unless a contributing component
/// marked the pixel [`IGNORE`], in which case it stays void.
#[derive(Clone, Debug)]
pub struct ClasswiseMerger {
    /// Component index per class id; `None` for background.
    slot: Vec<Option<usize>>,
    /// Foreground classes in claim precedence order.
    precedence: Vec<ClassId>,
}

impl ClasswiseMerger {
    pub fn new(selection: &SelectionMap, components: &[impl AsRef<str>]) -> Result<Self> {
        let mut slot = vec![None; selection.class_count()];
        for e in selection.entries() {
            let k = components
                .iter()
                .position(|c| c.as_ref() == e.component)
                .ok_or_else(|| Error::UnknownComponent(e.component.clone()))?;
            slot[e.class_id as usize] = Some(k);
        }
        let mut precedence: Vec<&_> = selection.entries().iter().collect();
        precedence.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then(a.class_id.cmp(&b.class_id))
        });
        Ok(Self {
            slot,
            precedence: precedence.into_iter().map(|e| e.class_id).collect(),
        })
    }

    pub fn precedence(&self) -> &[ClassId] {
        &self.precedence
    }

    /// Component indices any class draws from, ascending.
    pub fn required_components(&self) -> BTreeSet<usize> {
        self.slot.iter().flatten().copied().collect()
    }

    /// `masks` is indexed like the component list given to [`Self::new`].
    /// With `image_labels`, classes outside the set contribute nothing.
    pub fn merge(
        &self,
        masks: &[&LabelMask],
        image_labels: Option<&BTreeSet<ClassId>>,
    ) -> Result<LabelMask> {
        let active: Vec<(u8, usize)> = self
            .precedence
            .iter()
            .filter(|c| image_labels.is_none_or(|l| l.contains(c)))
            .map(|&c| (c, self.slot[c as usize].expect("foreground classes are selected")))
            .collect();
        let required = self.required_components();
        for &k in &required {
            if k >= masks.len() {
                return Err(Error::UnknownComponent(format!("#{k}")));
            }
        }
        let reference = match required.first() {
            Some(&k) => masks[k],
            None => *masks
                .first()
                .ok_or_else(|| Error::InvalidMask("no component masks to merge".into()))?,
        };
        for &k in &required {
            reference.ensure_same_dims(masks[k])?;
        }
        let contributing: Vec<&[u8]> = active
            .iter()
            .map(|&(_, k)| k)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|k| masks[k].data())
            .collect();

        let out = (0..reference.data().len())
            .map(|p| {
                active
                    .iter()
                    .find(|&&(c, k)| masks[k].data()[p] == c)
                    .map(|&(c, _)| c)
                    .unwrap_or_else(|| {
                        if contributing.iter().any(|d| d[p] == IGNORE) {
                            IGNORE
                        } else {
                            BACKGROUND
                        }
                    })
            })
            .collect();
        LabelMask::new(reference.width(), reference.height(), out)
    }
}

/// Builds one image's ensemble mask from named component masks.
pub fn merge_classwise(
    masks: &[(&str, &LabelMask)],
    selection: &SelectionMap,
    image_labels: Option<&BTreeSet<ClassId>>,
) -> Result<LabelMask> {
    let names: Vec<&str> = masks.iter().map(|(n, _)| *n).collect();
    let refs: Vec<&LabelMask> = masks.iter().map(|(_, m)| *m).collect();
    ClasswiseMerger::new(selection, &names)?.merge(&refs, image_labels)
}

/// Copies the entire mask of the component selected for the image's
/// highest-ranked labeled class.
pub fn merge_naive(
    masks: &[(&str, &LabelMask)],
    selection: &SelectionMap,
    ranking: &ClassRanking,
    image_labels: &BTreeSet<ClassId>,
) -> Result<LabelMask> {
    if let Some((_, first)) = masks.first() {
        for (_, m) in &masks[1..] {
            first.ensure_same_dims(m)?;
        }
    }
    let top = ranking
        .order()
        .iter()
        .find(|c| image_labels.contains(c))
        .ok_or_else(|| Error::EmptyImageLabels {
            image_id: String::new(),
        })?;
    let winner = selection
        .component_for(*top)
        .ok_or(Error::IncompleteSelection(*top as usize))?;
    masks
        .iter()
        .find(|(n, _)| *n == winner)
        .map(|(_, m)| (*m).clone())
        .ok_or_else(|| Error::UnknownComponent(winner.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::selection::SelectionEntry;

    fn selection(entries: &[(ClassId, &str, f64)]) -> SelectionMap {
        SelectionMap::new(
            entries
                .iter()
                .map(|&(c, comp, s)| SelectionEntry {
                    class_id: c,
                    class_name: format!("c{c}"),
                    component: comp.into(),
                    score: s,
                })
                .collect(),
        )
        .unwrap()
    }

    fn mask(w: usize, d: &[u8]) -> LabelMask {
        LabelMask::new(w, d.len() / w, d.to_vec()).unwrap()
    }

    #[test]
    fn disjoint_halves() {
        let a = mask(4, &[1, 1, 0, 0, 1, 1, 0, 0]);
        let b = mask(4, &[0, 0, 2, 2, 0, 0, 2, 2]);
        let s = selection(&[(1, "A", 0.7), (2, "B", 0.9)]);
        let out = merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap();
        assert_eq!(out.data(), &[1, 1, 2, 2, 1, 1, 2, 2]);
    }

    #[test]
    fn all_background_stays_background() {
        let a = mask(2, &[0; 4]);
        let b = mask(2, &[0; 4]);
        let s = selection(&[(1, "A", 0.5), (2, "B", 0.5)]);
        let out = merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap();
        assert_eq!(out.data(), &[0; 4]);
    }

    #[test]
    fn conflicts_follow_winning_score_then_class_id() {
        let a = mask(2, &[1, 1]);
        let b = mask(2, &[2, 2]);
        let s = selection(&[(1, "A", 0.8), (2, "B", 0.6)]);
        assert_eq!(merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap().data(), &[1, 1]);
        let s = selection(&[(1, "A", 0.6), (2, "B", 0.8)]);
        assert_eq!(merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap().data(), &[2, 2]);
        let s = selection(&[(1, "A", 0.7), (2, "B", 0.7)]);
        assert_eq!(merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap().data(), &[1, 1]);
    }

    #[test]
    fn unselected_class_predictions_are_dropped() {
        // A predicts class 2 but B owns class 2 and says background.
        let a = mask(3, &[1, 2, 0]);
        let b = mask(3, &[0, 0, 0]);
        let s = selection(&[(1, "A", 0.5), (2, "B", 0.5)]);
        assert_eq!(merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap().data(), &[1, 0, 0]);
    }

    #[test]
    fn image_labels_gate_classes() {
        let a = mask(2, &[1, 2]);
        let s = selection(&[(1, "A", 0.5), (2, "A", 0.5)]);
        let only2 = BTreeSet::from([2]);
        let out = merge_classwise(&[("A", &a)], &s, Some(&only2)).unwrap();
        assert_eq!(out.data(), &[0, 2]);
        let none = BTreeSet::new();
        assert_eq!(merge_classwise(&[("A", &a)], &s, Some(&none)).unwrap().data(), &[0, 0]);
    }

    #[test]
    fn ignore_survives_only_where_unclaimed() {
        let a = mask(3, &[255, 255, 1]);
        let b = mask(3, &[2, 0, 0]);
        let s = selection(&[(1, "A", 0.5), (2, "B", 0.5)]);
        let out = merge_classwise(&[("A", &a), ("B", &b)], &s, None).unwrap();
        assert_eq!(out.data(), &[2, 255, 1]);
    }

    #[test]
    fn errors() {
        let a = mask(2, &[1, 1]);
        let short = mask(1, &[1]);
        let s = selection(&[(1, "A", 0.5), (2, "B", 0.5)]);
        assert!(matches!(
            merge_classwise(&[("A", &a)], &s, None),
            Err(Error::UnknownComponent(_))
        ));
        assert!(matches!(
            merge_classwise(&[("A", &a), ("B", &short)], &s, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn naive_takes_whole_mask_of_top_ranked_class_winner() {
        let a = mask(2, &[1, 0]);
        let b = mask(2, &[2, 2]);
        let s = selection(&[(1, "A", 0.5), (2, "B", 0.5)]);
        let ranking = ClassRanking::from_counts(vec![0, 3, 5]);
        let out = merge_naive(&[("A", &a), ("B", &b)], &s, &ranking, &BTreeSet::from([1, 2])).unwrap();
        assert_eq!(out, b);
        let out = merge_naive(&[("A", &a), ("B", &b)], &s, &ranking, &BTreeSet::from([1])).unwrap();
        assert_eq!(out, a);
        assert!(matches!(
            merge_naive(&[("A", &a), ("B", &b)], &s, &ranking, &BTreeSet::new()),
            Err(Error::EmptyImageLabels { .. })
        ));
    }
}
