use std::fmt;
use std::str::FromStr;

use super::rng::CounterRng;
use crate::mask_io::{LabelMask, BACKGROUND, IGNORE};

/// What a component does to one class's pixels.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum DegradeOp {
    #[default]
    None,
    /// Keep only pixels whose whole (2k+1)² neighbourhood, clipped at the
    /// image border, is the class.
    Erode(usize),
    /// Grow into ground-truth background within Chebyshev distance k.
    Dilate(usize),
    /// Turn each class pixel into background with probability p.
    Drop(f64),
    /// Turn all of the class's pixels in an image into background with
    /// probability p (one draw per image).
    SwapToBackground(f64),
}

impl DegradeOp {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            DegradeOp::Erode(0) | DegradeOp::Dilate(0) => {
                Err("morphological radius must be at least 1".into())
            }
            DegradeOp::Drop(p) | DegradeOp::SwapToBackground(p) if !(0.0..=1.0).contains(&p) => {
                Err(format!("probability {p} outside [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DegradeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegradeOp::None => write!(f, "none"),
            DegradeOp::Erode(k) => write!(f, "erode {k}"),
            DegradeOp::Dilate(k) => write!(f, "dilate {k}"),
            DegradeOp::Drop(p) => write!(f, "drop {p}"),
            DegradeOp::SwapToBackground(p) => write!(f, "swap_to_background {p}"),
        }
    }
}

impl FromStr for DegradeOp {
    type Err = String;

    /// `none`, `erode <k>`, `dilate <k>`, `drop <p>`, `swap_to_background <p>`.
    fn from_str(s: &str) -> Result<Self, String> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let radius = |v: &str| v.parse::<usize>().map_err(|_| format!("invalid radius `{v}`"));
        let prob = |v: &str| v.parse::<f64>().map_err(|_| format!("invalid probability `{v}`"));
        let op = match tokens[..] {
            ["none"] => DegradeOp::None,
            ["erode", k] => DegradeOp::Erode(radius(k)?),
            ["dilate", k] => DegradeOp::Dilate(radius(k)?),
            ["drop", p] => DegradeOp::Drop(prob(p)?),
            ["swap_to_background", p] => DegradeOp::SwapToBackground(prob(p)?),
            _ => return Err(format!("unknown degradation `{s}`")),
        };
        op.validate()?;
        Ok(op)
    }
}

/// Applies `ops[c]` to each foreground class `c` of `gt`.
///
/// Shrinking operations (erode, drop, swap) run first, per class in
/// ascending id, on the ground-truth pixel sets. Dilations then grow each
/// class into pixels that are background in `gt`; where two dilations
/// reach the same pixel the lower class id keeps it. Classes without an op
/// and [`IGNORE`] pixels pass through. Random draws come from `rng` in
/// that same order, so the result is a function of the mask, the ops and
/// the stream.
pub fn degrade(gt: &LabelMask, ops: &[DegradeOp], rng: &mut CounterRng) -> LabelMask {
    let (w, h) = gt.dims();
    let src = gt.data();
    let mut out = src.to_vec();

    for (c, op) in ops.iter().enumerate().skip(1) {
        let c = c as u8;
        match *op {
            DegradeOp::None | DegradeOp::Dilate(_) => {}
            DegradeOp::Erode(k) => {
                let kept = erode(&class_bits(src, c), w, h, k);
                for (i, &v) in src.iter().enumerate() {
                    if v == c && !kept[i] {
                        out[i] = BACKGROUND;
                    }
                }
            }
            DegradeOp::Drop(p) => {
                for (i, &v) in src.iter().enumerate() {
                    if v == c && rng.unit() < p {
                        out[i] = BACKGROUND;
                    }
                }
            }
            DegradeOp::SwapToBackground(p) => {
                if rng.unit() < p {
                    for (i, &v) in src.iter().enumerate() {
                        if v == c {
                            out[i] = BACKGROUND;
                        }
                    }
                }
            }
        }
    }

    let mut grown = vec![false; src.len()];
    for (c, op) in ops.iter().enumerate().skip(1) {
        if let DegradeOp::Dilate(k) = *op {
            let c = c as u8;
            let reach = dilate(&class_bits(src, c), w, h, k);
            for i in 0..src.len() {
                if reach[i] && src[i] == BACKGROUND && !grown[i] {
                    out[i] = c;
                    grown[i] = true;
                }
            }
        }
    }
    debug_assert!(out.iter().zip(src).all(|(&o, &s)| (o == IGNORE) == (s == IGNORE)));
    LabelMask::new(w, h, out).expect("same dimensions as input")
}

fn class_bits(data: &[u8], class: u8) -> Vec<bool> {
    data.iter().map(|&v| v == class).collect()
}

/// Binary erosion by a (2k+1)² square, treating out-of-image pixels as
/// absent from the window.
pub fn erode(bits: &[bool], w: usize, h: usize, k: usize) -> Vec<bool> {
    let rows = sweep(bits, w, h, k, true, true);
    sweep(&rows, w, h, k, false, true)
}

/// Binary dilation by a (2k+1)² square, clipped at the border.
pub fn dilate(bits: &[bool], w: usize, h: usize, k: usize) -> Vec<bool> {
    let rows = sweep(bits, w, h, k, true, false);
    sweep(&rows, w, h, k, false, false)
}

/// One separable pass: `all` over the window for erosion, `any` for
/// dilation, along rows (`horizontal`) or columns.
fn sweep(bits: &[bool], w: usize, h: usize, k: usize, horizontal: bool, all: bool) -> Vec<bool> {
    let mut out = vec![false; bits.len()];
    for y in 0..h {
        for x in 0..w {
            let (pos, len) = if horizontal { (x, w) } else { (y, h) };
            let lo = pos.saturating_sub(k);
            let hi = (pos + k).min(len - 1);
            let at = |t: usize| {
                if horizontal {
                    bits[y * w + t]
                } else {
                    bits[t * w + x]
                }
            };
            out[y * w + x] = if all {
                (lo..=hi).all(at)
            } else {
                (lo..=hi).any(at)
            };
        }
    }
    out
}
