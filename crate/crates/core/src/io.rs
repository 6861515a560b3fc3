//! Binary field/feature dumps (`TEXF`, `TEXC`) and 8-bit PGM images.
//!
//! `TEXF`: magic, rows and cols as little-endian `u32`, then `rows * cols`
//! little-endian `f64` row-major. `TEXC` adds a `u32` feature length after
//! cols and stores one vector per pixel.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, LabelMap};

pub const TEXF_MAGIC: &[u8; 4] = b"TEXF";
pub const TEXC_MAGIC: &[u8; 4] = b"TEXC";

pub fn write_texf<W: Write>(mut w: W, field: &Field) -> Result<()> {
    w.write_all(TEXF_MAGIC)?;
    w.write_all(&dim_u32(field.rows())?.to_le_bytes())?;
    w.write_all(&dim_u32(field.cols())?.to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_texf<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "TEXF magic")?;
    if &magic != TEXF_MAGIC {
        return Err(Error::format("missing TEXF magic"));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let values = read_f64s(&mut r, rows * cols)?;
    Field::new(rows, cols, values)
}

/// Feature dump: one `feature_len` vector per pixel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureDump {
    pub rows: usize,
    pub cols: usize,
    pub feature_len: usize,
    pub values: Vec<f64>,
}

pub fn write_texc<W: Write>(mut w: W, dump: &FeatureDump) -> Result<()> {
    if dump.values.len() != dump.rows * dump.cols * dump.feature_len {
        return Err(Error::invalid(
            "feature dump length does not match its header",
        ));
    }
    w.write_all(TEXC_MAGIC)?;
    w.write_all(&dim_u32(dump.rows)?.to_le_bytes())?;
    w.write_all(&dim_u32(dump.cols)?.to_le_bytes())?;
    w.write_all(&dim_u32(dump.feature_len)?.to_le_bytes())?;
    for v in &dump.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_texc<R: Read>(mut r: R) -> Result<FeatureDump> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic, "TEXC magic")?;
    if &magic != TEXC_MAGIC {
        return Err(Error::format("missing TEXC magic"));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let feature_len = read_u32(&mut r)? as usize;
    let values = read_f64s(&mut r, rows * cols * feature_len)?;
    Ok(FeatureDump {
        rows,
        cols,
        feature_len,
        values,
    })
}

/// Raw 8-bit PGM raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pgm {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl Pgm {
    /// Gray levels scaled to `[0, 1]` by `/255`.
    pub fn to_field(&self) -> Result<Field> {
        Field::new(
            self.rows,
            self.cols,
            self.pixels.iter().map(|&p| f64::from(p) / 255.0).collect(),
        )
    }

    /// Gray levels taken verbatim as labels.
    pub fn to_labels(&self) -> Result<LabelMap> {
        LabelMap::new(
            self.rows,
            self.cols,
            self.pixels.iter().map(|&p| u32::from(p)).collect(),
        )
    }
}

/// Parses P2 (ASCII) or P5 (binary) graymaps with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<Pgm> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let magic = cur.token()?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::format(format!("unsupported image format {other:?}"))),
    };
    let cols = cur.number()?;
    let rows = cur.number()?;
    let maxval = cur.number()?;
    if maxval != 255 {
        return Err(Error::format(format!(
            "PGM maxval must be 255, got {maxval}"
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::format("PGM has an empty raster"));
    }
    let count = rows * cols;
    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let end = start + count;
        if end > bytes.len() {
            return Err(Error::format(format!(
                "truncated P5 raster: need {count} bytes, have {}",
                bytes.len().saturating_sub(start)
            )));
        }
        bytes[start..end].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let v = cur
                .number()
                .map_err(|_| Error::format(format!("truncated P2 raster: need {count} samples")))?;
            if v > 255 {
                return Err(Error::format(format!("P2 sample {v} exceeds maxval")));
            }
            pixels.push(v as u8);
        }
        pixels
    };
    Ok(Pgm { rows, cols, pixels })
}

pub fn write_pgm<W: Write>(mut w: W, pgm: &Pgm) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", pgm.cols, pgm.rows)?;
    w.write_all(&pgm.pixels)?;
    w.flush()?;
    Ok(())
}

/// Linear rescale of `[min, max]` onto `0..=255` for viewing. A constant field maps to 0.
pub fn field_to_pgm(field: &Field) -> Pgm {
    let (lo, hi) = field.min_max();
    let span = hi - lo;
    let pixels = field
        .values()
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    Pgm {
        rows: field.rows(),
        cols: field.cols(),
        pixels,
    }
}

/// Labels stored as gray levels `0..k`.
pub fn labels_to_pgm(labels: &LabelMap) -> Result<Pgm> {
    let pixels = labels
        .labels()
        .iter()
        .map(|&l| {
            u8::try_from(l)
                .map_err(|_| Error::invalid(format!("label {l} does not fit a gray level")))
        })
        .collect::<Result<Vec<u8>>>()?;
    Ok(Pgm {
        rows: labels.rows(),
        cols: labels.cols(),
        pixels,
    })
}

/// Loads a grayscale image from PGM (P2/P5, maxval 255, scaled to `[0, 1]`) or TEXF.
pub fn load_grayscale_image(path: impl AsRef<Path>) -> Result<Field> {
    let bytes = std::fs::read(path)?;
    decode_grayscale(&bytes)
}

pub fn decode_grayscale(bytes: &[u8]) -> Result<Field> {
    if bytes.starts_with(TEXF_MAGIC) {
        read_texf(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        parse_pgm(bytes)?.to_field()
    } else {
        Err(Error::format(
            "unsupported image format (expected PGM P2/P5 or TEXF)",
        ))
    }
}

/// Loads a label mask: PGM gray levels, a TEXF of small non-negative integers,
/// or a `row,col,label` CSV covering every pixel once.
pub fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(LABEL_CSV_HEADER) {
        parse_label_csv(&bytes)
    } else if bytes.starts_with(TEXF_MAGIC) {
        let field = read_texf(bytes.as_slice())?;
        let labels = field
            .values()
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                    Ok(v as u32)
                } else {
                    Err(Error::format(format!(
                        "label value {v} is not a non-negative integer"
                    )))
                }
            })
            .collect::<Result<Vec<u32>>>()?;
        LabelMap::new(field.rows(), field.cols(), labels)
    } else {
        parse_pgm(&bytes)?.to_labels()
    }
}

const LABEL_CSV_HEADER: &[u8] = b"row,col,label";

/// Dimensions are one past the largest row and column; every cell must appear exactly once.
pub fn parse_label_csv(bytes: &[u8]) -> Result<LabelMap> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::format("label CSV is not UTF-8"))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.trim().parse().ok()).collect();
        match parsed.as_deref() {
            Some(&[r, c, l]) if l <= u32::MAX as usize => entries.push((r, c, l as u32)),
            _ => {
                return Err(Error::format(format!(
                    "label CSV line {}: expected row,col,label as non-negative integers",
                    i + 1
                )))
            }
        }
    }
    let rows = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let cols = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    if rows == 0 || entries.len() != rows * cols {
        return Err(Error::format(format!(
            "label CSV has {} entries for a {rows}x{cols} grid",
            entries.len()
        )));
    }
    let mut labels = vec![None; rows * cols];
    for (r, c, l) in entries {
        if labels[r * cols + c].replace(l).is_some() {
            return Err(Error::format(format!("label CSV repeats pixel ({r}, {c})")));
        }
    }
    LabelMap::new(rows, cols, labels.into_iter().map(Option::unwrap).collect())
}

pub fn save_texf(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    write_texf(BufWriter::new(File::create(path)?), field)
}

pub fn load_texf(path: impl AsRef<Path>) -> Result<Field> {
    read_texf(BufReader::new(File::open(path)?))
}

pub fn save_pgm(path: impl AsRef<Path>, pgm: &Pgm) -> Result<()> {
    write_pgm(BufWriter::new(File::create(path)?), pgm)
}

pub fn save_texc(path: impl AsRef<Path>, dump: &FeatureDump) -> Result<()> {
    write_texc(BufWriter::new(File::create(path)?), dump)
}

pub fn load_texc(path: impl AsRef<Path>) -> Result<FeatureDump> {
    read_texc(BufReader::new(File::open(path)?))
}

fn dim_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::invalid(format!("dimension {v} exceeds u32")))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::format(format!("truncated file while reading {what}"))
        }
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, "header")?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    read_exact(r, &mut buf, "payload")?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
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

    fn token(&mut self) -> Result<String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format("truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::format(format!("expected a number in PGM, found {tok:?}")))
    }
}
