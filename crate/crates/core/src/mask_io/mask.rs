use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

/// Void pixel value, excluded from every metric.
pub const IGNORE: u8 = 255;

/// Background is class 0 in every corpus.
pub const BACKGROUND: u8 = 0;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

/// A row-major grid of 8-bit class indices, one per pixel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMask(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidMask(format!(
                "{} values for a {width}x{height} mask",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// A mask with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }

    /// Checks every value is a class below `class_count` or [`IGNORE`],
    /// reporting the first offender in raster order.
    pub fn check_classes(&self, class_count: usize) -> Result<()> {
        match self
            .data
            .iter()
            .position(|&v| v != IGNORE && v as usize >= class_count)
        {
            Some(i) => Err(Error::ClassOutOfRange {
                value: self.data[i],
                x: i % self.width,
                y: i / self.width,
            }),
            None => Ok(()),
        }
    }

    /// One-hot channel for `class`: true where the pixel carries that class.
    pub fn channel(&self, class: u8) -> Vec<bool> {
        self.data.iter().map(|&v| v == class).collect()
    }

    pub fn ensure_same_dims(&self, other: &LabelMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// Binary PGM (P5, maxval 255) encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    /// 8-bit grayscale PNG encoding.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let to_err = |e: png::EncodingError| Error::InvalidMask(format!("png encoding: {e}"));
        {
            let mut enc = png::Encoder::new(&mut out, self.width as u32, self.height as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().map_err(to_err)?;
            writer.write_image_data(&self.data).map_err(to_err)?;
            writer.finish().map_err(to_err)?;
        }
        Ok(out)
    }
}

/// On-disk encoding of a mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MaskFormat {
    #[default]
    Pgm,
    Png,
}

impl MaskFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MaskFormat::Pgm => "pgm",
            MaskFormat::Png => "png",
        }
    }

    /// PNG for a `.png` extension, PGM otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => MaskFormat::Png,
            _ => MaskFormat::Pgm,
        }
    }
}

impl std::str::FromStr for MaskFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pgm" => Ok(MaskFormat::Pgm),
            "png" => Ok(MaskFormat::Png),
            other => Err(format!("unknown mask format `{other}` (expected pgm or png)")),
        }
    }
}

/// Reads a PGM or PNG mask and checks it against `class_count`.
///
/// The format is detected from the file's leading bytes, not its name.
pub fn load_mask(path: impl AsRef<Path>, class_count: usize) -> Result<LabelMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mask = decode_mask(&bytes, path)?;
    mask.check_classes(class_count)?;
    Ok(mask)
}

/// Decodes a mask without any class-range check.
pub fn decode_mask(bytes: &[u8], path: &Path) -> Result<LabelMask> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes, path)
    } else if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes, path)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: "expected binary PGM (P5) or PNG".into(),
        })
    }
}

/// Writes `mask` to `path`, PNG if the extension is `.png`, PGM otherwise.
pub fn save_mask(mask: &LabelMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match MaskFormat::for_path(path) {
        MaskFormat::Pgm => mask.to_pgm(),
        MaskFormat::Png => mask.to_png()?,
    };
    write_atomic(path, &bytes)
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<LabelMask> {
    let malformed = |reason: &str| Error::MalformedMask {
        path: path.to_owned(),
        reason: reason.to_owned(),
    };

    // Header: magic, width, height, maxval, separated by whitespace with
    // `#` comments running to end of line; exactly one whitespace byte
    // precedes the raster.
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("truncated header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("header value too large"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(malformed("missing whitespace after maxval"));
    }
    pos += 1;

    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_owned(),
            reason: format!("PGM maxval {maxval}; only 8-bit samples are supported"),
        });
    }
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| malformed("dimensions overflow"))?;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(malformed(&format!(
            "raster has {} bytes, expected {expected}",
            raster.len()
        )));
    }
    LabelMask::new(width, height, raster[..expected].to_vec()).map_err(|e| malformed(&e.to_string()))
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<LabelMask> {
    let malformed = |reason: String| Error::MalformedMask {
        path: path.to_owned(),
        reason,
    };
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    // Indexed PNGs carry class indices directly; never expand the palette.
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| malformed(e.to_string()))?;
    let info = reader.info();
    let (width, height) = (info.width as usize, info.height as usize);
    match (info.color_type, info.bit_depth) {
        (png::ColorType::Grayscale | png::ColorType::Indexed, png::BitDepth::Eight) => {}
        (color, depth) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_owned(),
                reason: format!("PNG {color:?} at {depth:?}; need 8-bit grayscale or indexed"),
            })
        }
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| malformed("image too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| malformed(e.to_string()))?;
    let mut data = Vec::with_capacity(width * height);
    for row in buf.chunks(frame.line_size).take(height) {
        data.extend_from_slice(&row[..width]);
    }
    LabelMask::new(width, height, data).map_err(|e| malformed(e.to_string()))
}
