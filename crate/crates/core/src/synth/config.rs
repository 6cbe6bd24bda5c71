//! Synthetic corpus configuration, in the manifest's line-oriented style.
//!
//! ```text
//! seed 42
//! images 50
//! size 32 32            # width height
//! classes 6             # including background
//! class 1 square        # optional; unnamed classes become class_<id>
//! shapes 1 3            # rectangles per image, inclusive range
//! rect 4 10             # rectangle side length, inclusive range
//! gap 1                 # background margin kept between rectangles
//! component A
//! component B
//! degrade A 2 erode 1   # component, class, operation
//! degrade B 1 drop 0.5
//! ```
//!
//! Every (component, class) pair without a `degrade` line is `none`.

use super::degrade::DegradeOp;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentProfile {
    pub name: String,
    /// One operation per class id; index 0 (background) is always `None`.
    pub ops: Vec<DegradeOp>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub images: usize,
    pub width: usize,
    pub height: usize,
    pub class_names: Vec<String>,
    pub shapes: (usize, usize),
    pub rect: (usize, usize),
    pub gap: usize,
    pub components: Vec<ComponentProfile>,
}

impl SynthConfig {
    /// A config with default shape settings and no components.
    pub fn new(seed: u64, images: usize, width: usize, height: usize, class_count: usize) -> Self {
        Self {
            seed,
            images,
            width,
            height,
            class_names: default_class_names(class_count),
            shapes: (1, 3),
            rect: (3, (width.min(height) / 2).max(3)),
            gap: 1,
            components: Vec::new(),
        }
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Adds a component with no degradations.
    pub fn with_component(mut self, name: &str) -> Self {
        self.components.push(ComponentProfile {
            name: name.to_owned(),
            ops: vec![DegradeOp::None; self.class_count()],
        });
        self
    }

    /// Sets the operation `component` applies to `class`.
    pub fn with_op(mut self, component: &str, class: usize, op: DegradeOp) -> Self {
        let p = self
            .components
            .iter_mut()
            .find(|p| p.name == component)
            .expect("component added before its ops");
        p.ops[class] = op;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.width < 8 || self.height < 8 {
            return bad(format!("size {}x{} below 8x8", self.width, self.height));
        }
        if !(2..=255).contains(&self.class_count()) {
            return bad(format!("class count {} outside 2..=255", self.class_count()));
        }
        if self.class_names[0] != "background" {
            return bad("class 0 must be named `background`".into());
        }
        if self.shapes.0 > self.shapes.1 {
            return bad(format!("shapes range {}..{} is empty", self.shapes.0, self.shapes.1));
        }
        if self.rect.0 == 0 || self.rect.0 > self.rect.1 {
            return bad(format!("rect range {}..{} is invalid", self.rect.0, self.rect.1));
        }
        if self.rect.1 > self.width.min(self.height) {
            return bad(format!("rect side {} exceeds the image", self.rect.1));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.components {
            if !valid_component_name(&p.name) {
                return bad(format!("invalid component name `{}`", p.name));
            }
            if !seen.insert(&p.name) {
                return bad(format!("component `{}` declared twice", p.name));
            }
            if p.ops.len() != self.class_count() {
                return bad(format!("component `{}` has {} ops", p.name, p.ops.len()));
            }
            if p.ops[0] != DegradeOp::None {
                return bad("background cannot be degraded".into());
            }
            for op in &p.ops {
                op.validate().map_err(Error::InvalidConfig)?;
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut images = None;
        let mut size = None;
        let mut class_names: Option<Vec<Option<String>>> = None;
        let mut shapes = None;
        let mut rect = None;
        let mut gap = None;
        let mut components: Vec<String> = Vec::new();
        let mut degrades: Vec<(usize, String, usize, DegradeOp)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |reason: String| Error::Config {
                line: line_no,
                reason,
            };
            let line = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some((&directive, args)) = tokens.split_first() else {
                continue;
            };
            let num = |v: &str| -> Result<usize> {
                v.parse().map_err(|_| err(format!("invalid number `{v}`")))
            };
            let once = |set: bool| -> Result<()> {
                if set {
                    Err(err(format!("`{directive}` given twice")))
                } else {
                    Ok(())
                }
            };
            match (directive, args) {
                ("seed", [v]) => {
                    once(seed.is_some())?;
                    seed = Some(v.parse::<u64>().map_err(|_| err(format!("invalid seed `{v}`")))?);
                }
                ("images", [v]) => {
                    once(images.is_some())?;
                    images = Some(num(v)?);
                }
                ("size", [w, h]) => {
                    once(size.is_some())?;
                    size = Some((num(w)?, num(h)?));
                }
                ("classes", [n]) => {
                    once(class_names.is_some())?;
                    let n = num(n)?;
                    if !(2..=255).contains(&n) {
                        return Err(err(format!("class count {n} outside 2..=255")));
                    }
                    let mut names = vec![None; n];
                    names[0] = Some("background".to_owned());
                    class_names = Some(names);
                }
                ("class", [id, name]) => {
                    let names = class_names
                        .as_mut()
                        .ok_or_else(|| err("`class` before `classes`".into()))?;
                    let id = num(id)?;
                    if id == 0 || id >= names.len() {
                        return Err(err(format!("class id {id} must be in 1..{}", names.len())));
                    }
                    names[id] = Some((*name).to_owned());
                }
                ("shapes", [lo, hi]) => {
                    once(shapes.is_some())?;
                    shapes = Some((num(lo)?, num(hi)?));
                }
                ("rect", [lo, hi]) => {
                    once(rect.is_some())?;
                    rect = Some((num(lo)?, num(hi)?));
                }
                ("gap", [g]) => {
                    once(gap.is_some())?;
                    gap = Some(num(g)?);
                }
                ("component", [name]) => components.push((*name).to_owned()),
                ("degrade", [comp, class, op @ ..]) if !op.is_empty() => {
                    let op: DegradeOp = op.join(" ").parse().map_err(err)?;
                    degrades.push((line_no, (*comp).to_owned(), num(class)?, op));
                }
                _ => return Err(err(format!("unrecognised line `{}`", line.trim()))),
            }
        }

        let missing = |what: &str| Error::InvalidConfig(format!("missing `{what}`"));
        let (width, height) = size.ok_or_else(|| missing("size"))?;
        let names = class_names.ok_or_else(|| missing("classes"))?;
        let mut cfg = SynthConfig::new(
            seed.ok_or_else(|| missing("seed"))?,
            images.ok_or_else(|| missing("images"))?,
            width,
            height,
            names.len(),
        );
        for (id, name) in names.into_iter().enumerate() {
            if let Some(name) = name {
                cfg.class_names[id] = name;
            }
        }
        if let Some(s) = shapes {
            cfg.shapes = s;
        }
        if let Some(r) = rect {
            cfg.rect = r;
        }
        if let Some(g) = gap {
            cfg.gap = g;
        }
        for name in &components {
            cfg = cfg.with_component(name);
        }
        for (line, comp, class, op) in degrades {
            let err = |reason: String| Error::Config { line, reason };
            let p = cfg
                .components
                .iter_mut()
                .find(|p| p.name == comp)
                .ok_or_else(|| err(format!("unknown component `{comp}`")))?;
            if class == 0 || class >= p.ops.len() {
                return Err(err(format!("class {class} is not a foreground class")));
            }
            if p.ops[class] != DegradeOp::None {
                return Err(err(format!("`{comp}` class {class} degraded twice")));
            }
            p.ops[class] = op;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn default_class_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i == 0 {
                "background".to_owned()
            } else {
                format!("class_{i}")
            }
        })
        .collect()
}

fn valid_component_name(name: &str) -> bool {
    !name.is_empty()
        && name != "gt"
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}
