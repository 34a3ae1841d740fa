//! Binary PGM (P5) image I/O and CSV export of per-level series.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::{Series, LEVELS};

/// An 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::contract(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::contract(format!(
                "pixel buffer holds {} values, {width}x{height} needs {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    /// Same dimensions, every pixel passed through `f`.
    pub fn map_pixels(&self, mut f: impl FnMut(u8) -> u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }
}

/// Reads a binary PGM (P5) file with maxval 255.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = fs::read(path)?;
    decode_pgm(&bytes)
}

/// Writes `img` as binary PGM with maxval 255.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, field: &'static str) -> Result<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(field, "expected an ASCII decimal number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(field, "number out of range"))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some(b"P6") | Some(b"P3") => {
            return Err(Error::format(
                "magic",
                "color PPM input is not supported, convert to grayscale first",
            ))
        }
        Some(m) => {
            return Err(Error::format(
                "magic",
                format!("expected P5, found {:?}", String::from_utf8_lossy(m)),
            ))
        }
        None => return Err(Error::format("magic", "file too short")),
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || width > u32::MAX as u64 {
        return Err(Error::format("width", format!("invalid width {width}")));
    }
    if height == 0 || height > u32::MAX as u64 {
        return Err(Error::format("height", format!("invalid height {height}")));
    }
    if maxval != 255 {
        return Err(Error::format(
            "maxval",
            format!("only 8-bit images with maxval 255 are supported, found {maxval}"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::format("maxval", "missing whitespace after maxval")),
    }
    let n = (width * height) as usize;
    let payload = &bytes[cur.pos..];
    if payload.len() < n {
        return Err(Error::format(
            "payload",
            format!("expected {n} bytes of raster data, found {}", payload.len()),
        ));
    }
    GrayImage::new(width as u32, height as u32, payload[..n].to_vec())
}

/// A named per-level series for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExport {
    pub name: String,
    pub values: Vec<f64>,
}

impl SeriesExport {
    pub fn new(name: impl Into<String>, values: &Series) -> Self {
        Self {
            name: name.into(),
            values: values.to_vec(),
        }
    }
}

/// Renders with at least 9 significant digits.
fn format_value(v: f64) -> String {
    if v == 0.0 || v.abs() >= 0.1 {
        format!("{v:.9}")
    } else {
        format!("{v:.8e}")
    }
}

/// Writes `gray_level,<name1>,<name2>,...` followed by 256 rows.
pub fn export_series(series: &[SeriesExport], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_series_csv(series)?)?;
    Ok(())
}

pub fn render_series_csv(series: &[SeriesExport]) -> Result<String> {
    if let Some(bad) = series.iter().find(|s| s.values.len() != LEVELS) {
        return Err(Error::contract(format!(
            "series {:?} has {} values, expected {LEVELS}",
            bad.name,
            bad.values.len()
        )));
    }
    let mut out = Vec::new();
    write!(out, "gray_level")?;
    for s in series {
        write!(out, ",{}", s.name)?;
    }
    writeln!(out)?;
    for g in 0..LEVELS {
        write!(out, "{g}")?;
        for s in series {
            write!(out, ",{}", format_value(s.values[g]))?;
        }
        writeln!(out)?;
    }
    Ok(String::from_utf8(out).expect("csv output is ascii"))
}

/// Parses a file written by [`export_series`].
pub fn read_series(path: impl AsRef<Path>) -> Result<Vec<SeriesExport>> {
    parse_series_csv(&fs::read_to_string(path)?)
}

pub fn parse_series_csv(text: &str) -> Result<Vec<SeriesExport>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format("header", "empty csv"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("gray_level") {
        return Err(Error::format("header", "first column must be gray_level"));
    }
    let mut series: Vec<SeriesExport> = cols
        .map(|name| SeriesExport {
            name: name.to_string(),
            values: Vec::with_capacity(LEVELS),
        })
        .collect();
    for (row, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let level: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::format("gray_level", format!("bad level on row {row}")))?;
        if level != row {
            return Err(Error::format(
                "gray_level",
                format!("row {row} is labelled {level}"),
            ));
        }
        for s in series.iter_mut() {
            let v: f64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::format("value", format!("bad value on row {row}")))?;
            s.values.push(v);
        }
    }
    if series.iter().any(|s| s.values.len() != LEVELS) {
        return Err(Error::format("rows", format!("expected {LEVELS} data rows")));
    }
    Ok(series)
}
