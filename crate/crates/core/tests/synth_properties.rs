use plens_core::ensemble::{run_ensemble, select_best, EnsembleOptions};
use plens_core::eval::{score_table, ScoringMode};
use plens_core::mask_io::{load_mask, validate_corpus, IGNORE};
use plens_core::synth::{degrade, generate_corpus, generate_ground_truth, rng::CounterRng, DegradeOp, SynthConfig};
use proptest::prelude::*;

/// Three components, each exact on its own pair of classes and eroded or
/// partly dropped elsewhere.
fn complementary(seed: u64, images: usize) -> SynthConfig {
    let mut cfg = SynthConfig {
        shapes: (2, 4),
        rect: (4, 9),
        ..SynthConfig::new(seed, images, 32, 32, 7)
    };
    for name in ["A", "B", "C"] {
        cfg = cfg.with_component(name);
    }
    for (k, name) in ["A", "B", "C"].iter().enumerate() {
        for class in 1..7 {
            if (class - 1) / 2 != k {
                let op = if class % 2 == 0 { DegradeOp::Erode(1) } else { DegradeOp::Drop(0.4) };
                cfg = cfg.with_op(name, class, op);
            }
        }
    }
    cfg
}

#[test]
fn disjoint_classes_give_selected_scores_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate_corpus(&complementary(7, 40), dir.path().join("corpus")).unwrap();
    assert!(validate_corpus(&m, true).passed());
    let t = score_table(&m, ScoringMode::Accumulated).unwrap();
    let sel = select_best(&t).unwrap();
    for (class, expect) in [(1, "A"), (2, "A"), (3, "B"), (4, "B"), (5, "C"), (6, "C")] {
        assert_eq!(sel.component_for(class), Some(expect));
    }
    let summary = run_ensemble(&m, &sel, dir.path().join("ens"), EnsembleOptions::default()).unwrap();
    let scores = summary.scores.unwrap();
    for e in sel.entries() {
        assert_eq!(scores.get(e.class_id as usize), Some(e.score), "class {}", e.class_id);
    }
    for row in t.rows() {
        assert!(summary.miou.unwrap() >= row.mean(true).unwrap());
    }
}

#[test]
fn generated_files_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = complementary(3, 8);
    let a = generate_corpus(&cfg, dir.path().join("a")).unwrap();
    let b = generate_corpus(&cfg, dir.path().join("b")).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    for img in &a.images {
        let pa = a.component_path(img, 2);
        let pb = b.component_path(&b.images[a.images.iter().position(|i| i == img).unwrap()], 2);
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
        let mask = load_mask(a.ground_truth_path(img).unwrap(), 7).unwrap();
        let present: std::collections::BTreeSet<u8> = mask.data().iter().copied().filter(|&v| v != 0).collect();
        assert_eq!(present, img.labels);
    }
}

#[test]
fn single_component_ensemble_is_that_component() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig::new(21, 10, 16, 16, 4)
        .with_component("Solo")
        .with_op("Solo", 1, DegradeOp::Erode(1))
        .with_op("Solo", 3, DegradeOp::Drop(0.3));
    let m = generate_corpus(&cfg, dir.path().join("corpus")).unwrap();
    let t = score_table(&m, ScoringMode::Accumulated).unwrap();
    let sel = select_best(&t).unwrap();
    let out = dir.path().join("ens");
    let summary = run_ensemble(&m, &sel, &out, EnsembleOptions::default()).unwrap();
    assert_eq!(summary.scores.as_ref(), Some(t.row(0)));
    for img in &m.images {
        let merged = std::fs::read(out.join(format!("{}.pgm", img.image_id))).unwrap();
        assert_eq!(merged, std::fs::read(m.component_path(img, 0)).unwrap());
    }
}

#[test]
fn identical_profiles_score_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SynthConfig::new(4, 10, 16, 16, 3).with_component("P").with_component("Q");
    for name in ["P", "Q"] {
        cfg = cfg.with_op(name, 1, DegradeOp::Drop(0.3)).with_op(name, 2, DegradeOp::SwapToBackground(0.5));
    }
    let m = generate_corpus(&cfg, dir.path().join("corpus")).unwrap();
    let t = score_table(&m, ScoringMode::Accumulated).unwrap();
    assert_eq!(t.row(0), t.row(1));
    for img in &m.images {
        assert_eq!(
            std::fs::read(m.component_path(img, 0)).unwrap(),
            std::fs::read(m.component_path(img, 1)).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn any_seed_yields_a_valid_corpus(seed in any::<u64>(), classes in 2usize..6) {
        let cfg = SynthConfig::new(seed, 4, 16, 16, classes);
        for img in generate_ground_truth(&cfg).unwrap() {
            prop_assert!(img.ground_truth.check_classes(classes).is_ok());
            prop_assert!(!img.ground_truth.data().contains(&IGNORE));
        }
    }

    #[test]
    fn shrinking_ops_only_remove_pixels(seed in any::<u64>(), k in 1usize..3, p in 0.0f64..=1.0) {
        let cfg = SynthConfig::new(seed, 2, 16, 16, 4);
        for img in generate_ground_truth(&cfg).unwrap() {
            let gt = &img.ground_truth;
            let ops = [DegradeOp::None, DegradeOp::Erode(k), DegradeOp::Drop(p), DegradeOp::SwapToBackground(p)];
            let out = degrade(gt, &ops, &mut CounterRng::new(seed, 0));
            for (&o, &g) in out.data().iter().zip(gt.data()) {
                prop_assert!(o == g || o == 0, "pixel {g} became {o}");
            }
        }
    }

    #[test]
    fn dilation_never_overwrites_objects(seed in any::<u64>(), k in 1usize..3) {
        let cfg = SynthConfig::new(seed, 2, 16, 16, 3);
        for img in generate_ground_truth(&cfg).unwrap() {
            let gt = &img.ground_truth;
            let ops = [DegradeOp::None, DegradeOp::Dilate(k), DegradeOp::Dilate(k)];
            let out = degrade(gt, &ops, &mut CounterRng::new(seed, 0));
            for (&o, &g) in out.data().iter().zip(gt.data()) {
                if g != 0 {
                    prop_assert_eq!(o, g);
                }
            }
        }
    }
}
