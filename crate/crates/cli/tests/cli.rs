use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(rel)
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plens"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const SMALL: &str = "seed 5\nimages 6\nsize 16 16\nclasses 3\nshapes 1 2\nrect 3 6\n\
                     component A\ncomponent B\ndegrade A 2 erode 1\ndegrade B 1 drop 0.5\n";

fn small_corpus(dir: &Path) -> PathBuf {
    let cfg = dir.join("small.synth");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.join("corpus");
    let r = run(&[&"synth", &cfg, &"--out", &out]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    out.join("manifest.txt")
}

#[test]
fn version_and_usage() {
    let v = run(&[&"--version"]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).starts_with("plens "));
    assert_eq!(code(&run(&[&"frobnicate"])), 2);
    assert_eq!(code(&run(&[&"evaluate"])), 2);
    assert_eq!(code(&run(&[&"--threads", &"0", &"report", &"--cost", &"I=1"])), 2);
    assert_eq!(code(&run(&[&"report"])), 2);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    assert_eq!(code(&run(&[&"validate", &manifest])), 0);

    // Replace one component mask with a smaller one.
    let bad = manifest.parent().unwrap().join("A/img_00002.pgm");
    std::fs::write(&bad, b"P5\n4 4\n255\n\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0").unwrap();
    let r = run(&[&"validate", &manifest]);
    assert_eq!(code(&r), 1);
    assert!(stdout(&r).contains("dimension mismatch"), "{}", stdout(&r));

    assert_eq!(code(&run(&[&"validate", &dir.path().join("absent.txt")])), 3);
}

#[test]
fn evaluate_rows_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let out = dir.path().join("scores.csv");
    assert_eq!(code(&run(&[&"evaluate", &manifest, &"--out", &out])), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("component,mode,bkg,class_1,class_2,mIoU\nA,accumulated,"));

    let m = fixture("mode_divergence/manifest.txt");
    let acc = stdout(&run(&[&"evaluate", &m]));
    let per = stdout(&run(&[&"evaluate", &m, &"--mode", &"per-image-mean"]));
    assert!(acc.contains("P,accumulated,") && acc.contains(",0.3333,"));
    assert!(per.contains("P,per-image-mean,") && per.contains(",0.5000,"));
    assert_eq!(code(&run(&[&"evaluate", &m, &"--mode", &"median"])), 2);
}

#[test]
fn evaluate_without_ground_truth_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.pgm"), b"P5\n2 1\n255\n\x00\x01").unwrap();
    let manifest = dir.path().join("m.txt");
    std::fs::write(&manifest, "classes 2\nclass 0 background\nclass 1 cat\ncomponent A\nimage x gt=- labels=1 a.pgm\n").unwrap();
    let r = run(&[&"evaluate", &manifest]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("missing ground truth"));
}

#[test]
fn select_variants() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("single.csv");
    std::fs::write(&single, "component,mode,bkg,cat,dog,mIoU\nOnly,accumulated,0.9,0.1,,\n").unwrap();
    let r = run(&[&"select", &single]);
    assert_eq!(code(&r), 1, "dog has no defined score");
    std::fs::write(&single, "component,mode,bkg,cat,dog,mIoU\nOnly,accumulated,0.9,0.1,0.2,\n").unwrap();
    let r = run(&[&"select", &single]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout(&r), "class_id,class_name,component,score\n1,cat,Only,0.1000\n2,dog,Only,0.2000\n");

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&[&"select", &empty])), 2);
    std::fs::write(&empty, "component,mode,bkg,cat,mIoU\n").unwrap();
    assert_eq!(code(&run(&[&"select", &empty])), 2);
    assert_eq!(code(&run(&[&"select", &dir.path().join("nope.csv")])), 3);
}

#[test]
fn merge_writes_masks_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let scores = dir.path().join("scores.csv");
    run(&[&"evaluate", &manifest, &"--out", &scores]);
    let selection = dir.path().join("sel.csv");
    run(&[&"select", &scores, &"--out", &selection]);
    let out = dir.path().join("ens");
    let r = run(&[&"merge", &manifest, &selection, &"--out", &out, &"--format", &"png"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    assert_eq!(names[0], "img_00000.png");
    assert_eq!(names[6], "summary.csv");
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("ensemble,accumulated,"));
}

#[test]
fn merge_failures_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_corpus(dir.path());
    let selection = dir.path().join("sel.csv");
    std::fs::write(
        &selection,
        "class_id,class_name,component,score\n1,class_1,A,0.5\n2,class_2,Ghost,0.5\n",
    )
    .unwrap();
    let out = dir.path().join("ens");
    let r = run(&[&"merge", &manifest, &selection, &"--out", &out]);
    assert_eq!(code(&r), 1);
    assert!(stderr(&r).contains("Ghost"));
    assert!(!out.exists());

    // An unreadable component mask aborts the whole run.
    std::fs::write(&selection, "class_id,class_name,component,score\n1,class_1,A,0.5\n2,class_2,B,0.5\n").unwrap();
    std::fs::remove_file(manifest.parent().unwrap().join("B/img_00003.pgm")).unwrap();
    let r = run(&[&"merge", &manifest, &selection, &"--out", &out]);
    assert_eq!(code(&r), 3);
    assert!(!out.exists());
}

#[test]
fn naive_variant_loses_on_adversarial_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture("adversarial/manifest.txt");
    let scores = dir.path().join("s.csv");
    run(&[&"evaluate", &m, &"--out", &scores]);
    let sel = dir.path().join("sel.csv");
    run(&[&"select", &scores, &"--out", &sel]);
    let cw = stdout(&run(&[&"merge", &m, &sel, &"--out", &dir.path().join("cw")]));
    let nv = stdout(&run(&[&"merge", &m, &sel, &"--variant", &"naive", &"--out", &dir.path().join("nv")]));
    assert!(cw.contains("mIoU 1.0000"), "{cw}");
    assert!(nv.contains("mIoU 0.6591"), "{nv}");
}

#[test]
fn synth_is_reproducible_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.synth");
    std::fs::write(&cfg, SMALL).unwrap();
    for name in ["a", "b"] {
        assert_eq!(code(&run(&[&"synth", &cfg, &"--out", &dir.path().join(name)])), 0);
    }
    for rel in ["manifest.txt", "gt/img_00004.pgm", "B/img_00001.pgm"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(rel)).unwrap(),
            std::fs::read(dir.path().join("b").join(rel)).unwrap(),
            "{rel}"
        );
    }

    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"").unwrap();
    assert_eq!(code(&run(&[&"synth", &cfg, &"--out", &blocker.join("x")])), 3);

    std::fs::write(&cfg, "seed 1\n").unwrap();
    assert_eq!(code(&run(&[&"synth", &cfg, &"--out", &dir.path().join("c")])), 2);
}

#[test]
fn report_tables() {
    let scores = fixture("voc_train_scores.csv");
    let r = run(&[&"report", &"--scores", &scores]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let text = stdout(&r);
    assert!(text.contains("79.2*"), "aeroplane goes to PuzzleCAM");
    let drs = text.lines().find(|l| l.starts_with("DRS")).unwrap();
    assert!(drs.contains(" 80.8*"), "bottle goes to DRS: {drs}");
    let wins = text.lines().find(|l| l.starts_with("wins")).unwrap();
    assert_eq!(wins.split_whitespace().collect::<Vec<_>>(), ["wins", "8", "7", "2", "3"]);

    let cost = stdout(&run(&[&"report", &"--cost", &"I=10", &"N=4", &"C=21"]));
    assert!(cost.lines().any(|l| l.starts_with("step 3  total") && l.ends_with(" 1050")));
    assert_eq!(code(&run(&[&"report", &"--cost", &"Q=1"])), 2);
    assert_eq!(code(&run(&[&"report", &"--scores", &"/nonexistent.csv"])), 3);
}
