use std::collections::BTreeSet;

use plens_core::ensemble::{merge_classwise, select_best, ClasswiseMerger, SelectionEntry, SelectionMap};
use plens_core::eval::{ClassScoreTable, ClassScores, ScoringMode};
use plens_core::mask_io::{LabelMask, BACKGROUND, IGNORE};
use proptest::prelude::*;

const NAMES: [&str; 3] = ["A", "B", "C"];

fn table(rows: Vec<Vec<Option<f64>>>) -> ClassScoreTable {
    let n = rows.len();
    let c = rows[0].len();
    ClassScoreTable::new(
        ScoringMode::Accumulated,
        (0..c).map(|i| if i == 0 { "background".into() } else { format!("k{i}") }).collect(),
        NAMES[..n].iter().map(|s| s.to_string()).collect(),
        rows.into_iter().map(ClassScores::new).collect(),
    )
}

/// 1..=3 components, 2..=5 classes, scores on a coarse grid so ties occur.
fn score_rows() -> impl Strategy<Value = Vec<Vec<Option<f64>>>> {
    (1usize..=3, 2usize..=5).prop_flat_map(|(n, c)| {
        proptest::collection::vec(
            proptest::collection::vec(
                prop_oneof![1 => Just(None), 6 => (0u32..=8).prop_map(|v| Some(v as f64 / 8.0))],
                c,
            ),
            n,
        )
    })
}

/// Reference argmax: first component holding the maximum defined score.
fn oracle_best(rows: &[Vec<Option<f64>>], class: usize) -> Option<usize> {
    let max = rows.iter().filter_map(|r| r[class]).reduce(f64::max)?;
    rows.iter().position(|r| r[class] == Some(max))
}

fn masks(n: usize, c: u8) -> impl Strategy<Value = Vec<LabelMask>> {
    (1usize..=6, 1usize..=6).prop_flat_map(move |(w, h)| {
        proptest::collection::vec(
            proptest::collection::vec(prop_oneof![8 => 0..c, 1 => Just(IGNORE)], w * h)
                .prop_map(move |d| LabelMask::new(w, h, d).unwrap()),
            n,
        )
    })
}

fn selection(c: usize, picks: &[usize], scores: &[f64]) -> SelectionMap {
    SelectionMap::new(
        (1..c)
            .map(|k| SelectionEntry {
                class_id: k as u8,
                class_name: format!("k{k}"),
                component: NAMES[picks[k - 1]].into(),
                score: scores[k - 1],
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn selection_is_first_argmax(rows in score_rows()) {
        let t = table(rows.clone());
        let c = rows[0].len();
        let expect: Option<Vec<usize>> = (1..c).map(|k| oracle_best(&rows, k)).collect();
        match (select_best(&t), expect) {
            (Ok(sel), Some(expect)) => {
                prop_assert_eq!(sel.class_count(), c);
                for (k, &e) in (1..c).zip(&expect) {
                    let entry = sel.get(k as u8).unwrap();
                    prop_assert_eq!(&entry.component, NAMES[e]);
                    prop_assert_eq!(Some(entry.score), rows[e][k]);
                }
            }
            (Err(_), None) => {}
            (got, want) => prop_assert!(false, "select {:?} vs oracle {:?}", got.map(|s| s.entries().to_vec()), want),
        }
    }

    #[test]
    fn selection_ignores_positive_scaling(rows in score_rows(), factor in 0.01f64..100.0) {
        let t = table(rows);
        if let Ok(a) = select_best(&t) {
            let b = select_best(&t.scaled(factor)).unwrap();
            let pick = |s: &SelectionMap| s.entries().iter().map(|e| e.component.clone()).collect::<Vec<_>>();
            prop_assert_eq!(pick(&a), pick(&b));
        }
    }

    #[test]
    fn one_component_for_everything_reproduces_it(ms in masks(1, 4)) {
        let sel = selection(4, &[0, 0, 0], &[0.5, 0.5, 0.5]);
        let out = merge_classwise(&[("A", &ms[0])], &sel, None).unwrap();
        prop_assert_eq!(&out, &ms[0]);
        // Merging the output again changes nothing.
        let again = merge_classwise(&[("A", &out)], &sel, None).unwrap();
        prop_assert_eq!(out, again);
    }

    #[test]
    fn every_output_pixel_is_justified(
        ms in masks(3, 5),
        picks in proptest::collection::vec(0usize..3, 4),
        scores in proptest::collection::vec((0u32..=4).prop_map(|v| v as f64 / 4.0), 4),
        labels in proptest::collection::btree_set(1u8..5, 0..=4),
        gated in any::<bool>(),
    ) {
        let sel = selection(5, &picks, &scores);
        let merger = ClasswiseMerger::new(&sel, &NAMES).unwrap();
        let refs: Vec<&LabelMask> = ms.iter().collect();
        let gate = gated.then_some(&labels);
        let out = merger.merge(&refs, gate).unwrap();
        let active: BTreeSet<u8> = (1..5).filter(|k| gate.is_none_or(|l| l.contains(k))).collect();
        let rank = |k: u8| merger.precedence().iter().position(|&c| c == k).unwrap();

        for p in 0..out.data().len() {
            let claims: Vec<u8> = active
                .iter()
                .copied()
                .filter(|&k| ms[picks[k as usize - 1]].data()[p] == k)
                .collect();
            let v = out.data()[p];
            if let Some(&winner) = claims.iter().min_by_key(|&&k| rank(k)) {
                prop_assert_eq!(v, winner);
            } else {
                let void = active.iter().any(|&k| ms[picks[k as usize - 1]].data()[p] == IGNORE);
                prop_assert_eq!(v, if void { IGNORE } else { BACKGROUND });
            }
        }
    }

    #[test]
    fn precedence_orders_by_score_then_id(
        scores in proptest::collection::vec((0u32..=3).prop_map(|v| v as f64 / 3.0), 4),
    ) {
        let sel = selection(5, &[0, 1, 2, 0], &scores);
        let merger = ClasswiseMerger::new(&sel, &NAMES).unwrap();
        let order = merger.precedence();
        prop_assert_eq!(order.len(), 4);
        for w in order.windows(2) {
            let (a, b) = (scores[w[0] as usize - 1], scores[w[1] as usize - 1]);
            prop_assert!(a > b || (a == b && w[0] < w[1]));
        }
    }
}

#[test]
fn unknown_component_is_rejected() {
    let sel = selection(3, &[0, 2], &[0.5, 0.5]);
    assert!(ClasswiseMerger::new(&sel, &["A", "B"]).is_err());
}
