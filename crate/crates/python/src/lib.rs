//! Python bindings: masks, manifests, scoring, selection, merging, corpus
//! generation and the cost model.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use plens_core::ensemble::{self, EnsembleOptions, SelectionMap, Variant};
use plens_core::eval::{self, ClassScoreTable, ConfusionMatrix, ScoringMode};
use plens_core::mask_io::{self, DatasetManifest};
use plens_core::report::{self, CostParams};
use plens_core::synth::{self, SynthConfig};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(plens, PlensError, PyValueError);

fn to_py(e: plens_core::Error) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PlensError::new_err(e.to_string())
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

/// A single-channel label image: one class index per pixel, 255 = ignore.
#[pyclass(name = "LabelMask", module = "plens", eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyLabelMask(mask_io::LabelMask);

#[pymethods]
impl PyLabelMask {
    #[new]
    fn new(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        mask_io::LabelMask::new(width, height, data).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn filled(width: usize, height: usize, value: u8) -> PyResult<Self> {
        mask_io::LabelMask::filled(width, height, value).map(Self).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    /// Row-major pixel values.
    #[getter]
    fn data(&self) -> &[u8] {
        self.0.data()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<u8> {
        self.check(x, y)?;
        Ok(self.0.get(x, y))
    }

    fn set(&mut self, x: usize, y: usize, value: u8) -> PyResult<()> {
        self.check(x, y)?;
        self.0.set(x, y, value);
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!("LabelMask({}x{})", self.0.width(), self.0.height())
    }
}

impl PyLabelMask {
    fn check(&self, x: usize, y: usize) -> PyResult<()> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!(
                "({x},{y}) outside {}x{}",
                self.0.width(),
                self.0.height()
            )));
        }
        Ok(())
    }
}

#[pyfunction]
fn load_mask(path: PathBuf, class_count: usize) -> PyResult<PyLabelMask> {
    mask_io::load_mask(path, class_count).map(PyLabelMask).map_err(to_py)
}

/// Writes PGM or PNG depending on the file extension.
#[pyfunction]
fn save_mask(mask: &PyLabelMask, path: PathBuf) -> PyResult<()> {
    mask_io::save_mask(&mask.0, path).map_err(to_py)
}

#[pyclass(name = "Manifest", module = "plens", frozen)]
struct PyManifest(DatasetManifest);

#[pymethods]
impl PyManifest {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        mask_io::load_manifest(path).map(Self).map_err(to_py)
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.0.class_names.clone()
    }

    #[getter]
    fn components(&self) -> Vec<String> {
        self.0.components.clone()
    }

    #[getter]
    fn image_ids(&self) -> Vec<String> {
        self.0.images.iter().map(|i| i.image_id.clone()).collect()
    }

    /// Image-level labels per image id.
    #[getter]
    fn labels(&self) -> BTreeMap<String, Vec<u8>> {
        self.0
            .images
            .iter()
            .map(|i| (i.image_id.clone(), i.labels.iter().copied().collect()))
            .collect()
    }

    /// Validation findings as readable strings; empty when the corpus is
    /// consistent.
    #[pyo3(signature = (require_ground_truth = false))]
    fn validate(&self, py: Python<'_>, require_ground_truth: bool) -> Vec<String> {
        let report = py.detach(|| mask_io::validate_corpus(&self.0, require_ground_truth));
        report.findings.iter().map(ToString::to_string).collect()
    }

    fn __len__(&self) -> usize {
        self.0.images.len()
    }
}

#[pyfunction]
fn load_manifest(path: PathBuf) -> PyResult<PyManifest> {
    PyManifest::load(path)
}

/// Per-class IoU (None where undefined) for one prediction.
#[pyfunction]
fn iou_per_class(pred: &PyLabelMask, gt: &PyLabelMask, class_count: usize) -> PyResult<Vec<Option<f64>>> {
    let m = ConfusionMatrix::from_masks(&pred.0, &gt.0, class_count).map_err(to_py)?;
    Ok(eval::iou_per_class(&m).values().to_vec())
}

#[pyfunction]
#[pyo3(signature = (scores, include_background = true))]
fn mean_iou(scores: Vec<Option<f64>>, include_background: bool) -> PyResult<f64> {
    eval::mean_iou(&eval::ClassScores::new(scores), include_background).map_err(to_py)
}

#[pyclass(name = "ScoreTable", module = "plens", frozen)]
struct PyScoreTable(ClassScoreTable);

#[pymethods]
impl PyScoreTable {
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        ClassScoreTable::from_csv(text).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ClassScoreTable::load_csv(path).map(Self).map_err(to_py)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save_csv(path).map_err(to_py)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode.as_str()
    }

    #[getter]
    fn components(&self) -> Vec<String> {
        self.0.components.clone()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        (0..self.0.class_count()).map(|c| self.0.class_label(c)).collect()
    }

    /// Per-class scores of one component.
    fn row(&self, component: &str) -> PyResult<Vec<Option<f64>>> {
        self.0
            .row_by_name(component)
            .map(|r| r.values().to_vec())
            .ok_or_else(|| PlensError::new_err(format!("unknown component `{component}`")))
    }

    /// Mean IoU over defined classes of one component.
    #[pyo3(signature = (component, include_background = true))]
    fn miou(&self, component: &str, include_background: bool) -> PyResult<f64> {
        mean_iou(self.row(component)?, include_background)
    }
}

/// Scores every component of a manifest against its ground truth.
#[pyfunction]
#[pyo3(signature = (manifest, mode = "accumulated"))]
fn score_table(py: Python<'_>, manifest: &PyManifest, mode: &str) -> PyResult<PyScoreTable> {
    let mode: ScoringMode = parse(mode)?;
    py.detach(|| eval::score_table(&manifest.0, mode))
        .map(PyScoreTable)
        .map_err(to_py)
}

#[pyclass(name = "Selection", module = "plens", frozen)]
struct PySelection(SelectionMap);

#[pymethods]
impl PySelection {
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        SelectionMap::from_csv(text).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        SelectionMap::load_csv(path).map(Self).map_err(to_py)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save_csv(path).map_err(to_py)
    }

    /// `(class_id, class_name, component, score)` per foreground class.
    fn entries(&self) -> Vec<(u8, String, String, f64)> {
        self.0
            .entries()
            .iter()
            .map(|e| (e.class_id, e.class_name.clone(), e.component.clone(), e.score))
            .collect()
    }

    fn component_for(&self, class_id: u8) -> Option<String> {
        self.0.component_for(class_id).map(str::to_owned)
    }

    fn wins(&self) -> BTreeMap<String, usize> {
        self.0
            .wins_per_component()
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect()
    }

    fn checkmark_table(&self, components: Vec<String>) -> String {
        report::render_checkmark_table(&self.0, &components)
    }
}

#[pyfunction]
fn select_best(table: &PyScoreTable) -> PyResult<PySelection> {
    ensemble::select_best(&table.0).map(PySelection).map_err(to_py)
}

/// Merges one image's component masks, given as `(name, mask)` pairs.
#[pyfunction]
#[pyo3(signature = (masks, selection, labels = None))]
fn merge_classwise(
    masks: Vec<(String, PyLabelMask)>,
    selection: &PySelection,
    labels: Option<BTreeSet<u8>>,
) -> PyResult<PyLabelMask> {
    let named: Vec<(&str, &mask_io::LabelMask)> = masks.iter().map(|(n, m)| (n.as_str(), &m.0)).collect();
    ensemble::merge_classwise(&named, &selection.0, labels.as_ref())
        .map(PyLabelMask)
        .map_err(to_py)
}

/// Images written, per-class ensemble scores and ensemble mIoU.
type EnsembleResult = (usize, Option<Vec<Option<f64>>>, Option<f64>);

/// Writes ensemble masks and `summary.csv` to `out_dir`. Returns the
/// ensemble's per-class scores and mIoU when ground truth is available.
#[pyfunction]
#[pyo3(signature = (manifest, selection, out_dir, variant = "classwise", format = "pgm", gate_by_labels = true))]
fn run_ensemble(
    py: Python<'_>,
    manifest: &PyManifest,
    selection: &PySelection,
    out_dir: PathBuf,
    variant: &str,
    format: &str,
    gate_by_labels: bool,
) -> PyResult<EnsembleResult> {
    let options = EnsembleOptions {
        variant: parse::<Variant>(variant)?,
        format: parse(format)?,
        gate_by_labels,
    };
    let s = py
        .detach(|| ensemble::run_ensemble(&manifest.0, &selection.0, &out_dir, options))
        .map_err(to_py)?;
    Ok((s.images_written, s.scores.map(|v| v.values().to_vec()), s.miou))
}

/// Generates a synthetic corpus from config text and returns its manifest.
#[pyfunction]
fn generate_corpus(py: Python<'_>, config: &str, out_dir: PathBuf) -> PyResult<PyManifest> {
    let cfg = SynthConfig::parse(config).map_err(to_py)?;
    py.detach(|| synth::generate_corpus(&cfg, &out_dir))
        .map(PyManifest)
        .map_err(to_py)
}

/// Operation counts per pipeline step. Keyword names follow the CLI's
/// `--cost` keys with `-` replaced by `_`.
#[pyfunction]
#[pyo3(signature = (**params))]
fn cost_estimate(params: Option<BTreeMap<String, u64>>) -> PyResult<BTreeMap<&'static str, u128>> {
    let mut p = CostParams::default();
    for (k, v) in params.unwrap_or_default() {
        p.set(&k.replace('_', "-"), v).map_err(PyValueError::new_err)?;
    }
    let r = report::cost_estimate(&p);
    Ok(BTreeMap::from([
        ("step1", r.step1),
        ("step2", r.step2),
        ("step3_eval", r.step3_eval),
        ("step3_merge", r.step3_merge),
        ("step3", r.step3),
        ("step4", r.step4),
        ("deployment", r.deployment),
    ]))
}

#[pymodule]
fn plens(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PlensError", m.py().get_type::<PlensError>())?;
    m.add("IGNORE", mask_io::IGNORE)?;
    m.add_class::<PyLabelMask>()?;
    m.add_class::<PyManifest>()?;
    m.add_class::<PyScoreTable>()?;
    m.add_class::<PySelection>()?;
    m.add_function(wrap_pyfunction!(load_mask, m)?)?;
    m.add_function(wrap_pyfunction!(save_mask, m)?)?;
    m.add_function(wrap_pyfunction!(load_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(iou_per_class, m)?)?;
    m.add_function(wrap_pyfunction!(mean_iou, m)?)?;
    m.add_function(wrap_pyfunction!(score_table, m)?)?;
    m.add_function(wrap_pyfunction!(select_best, m)?)?;
    m.add_function(wrap_pyfunction!(merge_classwise, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(cost_estimate, m)?)?;
    Ok(())
}
