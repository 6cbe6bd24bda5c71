//! Abstract operation counts for the four pipeline stages.
//!
//! With `N` components, `M` refinements, `I` images and `C` classes, and
//! user-supplied unit costs:
//!
//! ```text
//! step 1 (component CAMs)   = N · train · infer · epochs · 2 · I
//! step 2 (refinement)       = M · train · infer · epochs · 2 · I · N
//! step 3 (evaluate + merge) = I · N · C + I · C
//! step 4 (segmentation net) = train · epochs · I
//! deployment                = infer · I
//! ```
//!
//! An empty ensemble (`N = 0`) has nothing to evaluate or merge, so its
//! step-3 count is zero.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostParams {
    pub components: u64,
    pub refinements: u64,
    pub images: u64,
    pub classes: u64,
    pub component_training: u64,
    pub component_inference: u64,
    pub component_epochs: u64,
    pub refinement_training: u64,
    pub refinement_inference: u64,
    pub refinement_epochs: u64,
    pub segmentation_training: u64,
    pub segmentation_inference: u64,
    pub segmentation_epochs: u64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            components: 0,
            refinements: 0,
            images: 0,
            classes: 0,
            component_training: 1,
            component_inference: 1,
            component_epochs: 1,
            refinement_training: 1,
            refinement_inference: 1,
            refinement_epochs: 1,
            segmentation_training: 1,
            segmentation_inference: 1,
            segmentation_epochs: 1,
        }
    }
}

impl CostParams {
    pub const KEYS: [&'static str; 13] = [
        "N",
        "M",
        "I",
        "C",
        "component-train",
        "component-infer",
        "component-epochs",
        "refine-train",
        "refine-infer",
        "refine-epochs",
        "seg-train",
        "seg-infer",
        "seg-epochs",
    ];

    pub fn set(&mut self, key: &str, value: u64) -> Result<(), String> {
        let field = match key {
            "N" => &mut self.components,
            "M" => &mut self.refinements,
            "I" => &mut self.images,
            "C" => &mut self.classes,
            "component-train" => &mut self.component_training,
            "component-infer" => &mut self.component_inference,
            "component-epochs" => &mut self.component_epochs,
            "refine-train" => &mut self.refinement_training,
            "refine-infer" => &mut self.refinement_inference,
            "refine-epochs" => &mut self.refinement_epochs,
            "seg-train" => &mut self.segmentation_training,
            "seg-infer" => &mut self.segmentation_inference,
            "seg-epochs" => &mut self.segmentation_epochs,
            other => {
                return Err(format!(
                    "unknown cost parameter `{other}` (expected one of {})",
                    Self::KEYS.join(", ")
                ))
            }
        };
        *field = value;
        Ok(())
    }

    /// Parses `KEY=VALUE` assignments over the defaults.
    pub fn from_assignments<'a>(pairs: impl IntoIterator<Item = &'a str>) -> Result<Self, String> {
        let mut p = Self::default();
        for pair in pairs {
            for item in pair.split(',').filter(|s| !s.is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| format!("expected KEY=VALUE, got `{item}`"))?;
                let v: u64 = v
                    .trim()
                    .parse()
                    .map_err(|_| format!("invalid value `{v}` for `{k}`"))?;
                p.set(k.trim(), v)?;
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub step1: u128,
    pub step2: u128,
    pub step3_eval: u128,
    pub step3_merge: u128,
    pub step3: u128,
    pub step4: u128,
    pub deployment: u128,
}

pub fn cost_estimate(p: &CostParams) -> CostReport {
    let w = |v: u64| v as u128;
    let (n, m, i, c) = (w(p.components), w(p.refinements), w(p.images), w(p.classes));
    let step1 = n * w(p.component_training) * w(p.component_inference) * w(p.component_epochs) * 2 * i;
    let step2 =
        m * w(p.refinement_training) * w(p.refinement_inference) * w(p.refinement_epochs) * 2 * i * n;
    let step3_eval = i * n * c;
    let step3_merge = if n == 0 { 0 } else { i * c };
    CostReport {
        step1,
        step2,
        step3_eval,
        step3_merge,
        step3: step3_eval + step3_merge,
        step4: w(p.segmentation_training) * w(p.segmentation_epochs) * i,
        deployment: w(p.segmentation_inference) * i,
    }
}

pub fn render_cost_report(p: &CostParams, r: &CostReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Abstract operation counts (unit-cost model), N={} M={} I={} C={}",
        p.components, p.refinements, p.images, p.classes
    );
    let rows = [
        ("step 1  component CAMs", r.step1),
        ("step 2  refinement", r.step2),
        ("step 3  evaluation", r.step3_eval),
        ("step 3  merge", r.step3_merge),
        ("step 3  total", r.step3),
        ("step 4  segmentation training", r.step4),
        ("deployment", r.deployment),
    ];
    for (label, v) in rows {
        let _ = writeln!(out, "{label:<31}{v:>20}");
    }
    out
}
