//! 8-bit grayscale image files (PGM P5/P2, PNG) and iteration trace CSVs.
//!
//! Loaded samples are scaled to `[0, 1]`; saved values are clamped to
//! `[0, 1]` and quantized with round-half-to-even.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::grid::ScalarGrid;
use crate::model::{IterationTrace, TraceRecord};

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("{}: file not found", path.display())]
    NotFound { path: PathBuf },
    #[error("{}: malformed image: {reason}", path.display())]
    Malformed { path: PathBuf, reason: String },
    #[error("{}: unsupported image: {reason}", path.display())]
    Unsupported { path: PathBuf, reason: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    PgmBinary,
    PgmAscii,
    Png,
}

impl ImageFormat {
    /// Guesses the format from the file extension (`.pgm` is written binary).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" => Some(ImageFormat::PgmBinary),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

fn io_error(path: &Path, source: io::Error) -> ImageError {
    if source.kind() == io::ErrorKind::NotFound {
        ImageError::NotFound {
            path: path.to_path_buf(),
        }
    } else {
        ImageError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Loads an 8-bit grayscale PGM (P5 or P2) or PNG, detected by content.
pub fn load_image(path: impl AsRef<Path>) -> Result<ScalarGrid, ImageError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    decode_image(&bytes).map_err(|e| e.at(path))
}

/// Decodes image bytes already in memory.
pub fn decode_image(bytes: &[u8]) -> Result<ScalarGrid, DecodeError> {
    const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";
    if bytes.starts_with(PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        decode_pgm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(DecodeError::Unsupported(format!(
            "netpbm variant P{} (only grayscale P2/P5)",
            bytes[1] as char
        )))
    } else {
        Err(DecodeError::Malformed("unrecognized file signature".into()))
    }
}

/// Decoding failure without a path attached.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed image: {0}")]
    Malformed(String),
    #[error("unsupported image: {0}")]
    Unsupported(String),
}

impl DecodeError {
    fn at(self, path: &Path) -> ImageError {
        let path = path.to_path_buf();
        match self {
            DecodeError::Malformed(reason) => ImageError::Malformed { path, reason },
            DecodeError::Unsupported(reason) => ImageError::Unsupported { path, reason },
        }
    }
}

fn malformed(reason: impl Into<String>) -> DecodeError {
    DecodeError::Malformed(reason.into())
}

/// Netpbm header/ASCII token reader that skips whitespace and `#` comments.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && !matches!(self.bytes[self.pos], b'\n' | b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, DecodeError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are ASCII")
            .parse()
            .map_err(|_| malformed(format!("{what} out of range")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<ScalarGrid, DecodeError> {
    let binary = bytes[1] == b'5';
    let mut tokens = Tokens { bytes, pos: 2 };
    let cols = tokens.number("width")?;
    let rows = tokens.number("height")?;
    let maxval = tokens.number("maxval")?;
    if rows == 0 || cols == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval == 0 {
        return Err(malformed("maxval must be positive"));
    }
    if maxval > 255 {
        return Err(DecodeError::Unsupported(format!(
            "maxval {maxval} needs more than 8 bits"
        )));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        match bytes.get(tokens.pos) {
            Some(b) if b.is_ascii_whitespace() => tokens.pos += 1,
            _ => return Err(malformed("missing whitespace before raster")),
        }
        let raster = &bytes[tokens.pos..];
        if raster.len() < count {
            return Err(malformed(format!(
                "raster truncated: expected {count} bytes, found {}",
                raster.len()
            )));
        }
        for &b in &raster[..count] {
            if b as usize > maxval {
                return Err(malformed(format!("sample {b} exceeds maxval {maxval}")));
            }
            values.push(b as f64 / scale);
        }
    } else {
        for _ in 0..count {
            let v = tokens.number("sample").map_err(|_| {
                malformed(format!("raster truncated: expected {count} samples"))
            })?;
            if v > maxval {
                return Err(malformed(format!("sample {v} exceeds maxval {maxval}")));
            }
            values.push(v as f64 / scale);
        }
    }
    ScalarGrid::from_vec(rows, cols, values).map_err(|e| malformed(e.to_string()))
}

fn decode_png(bytes: &[u8]) -> Result<ScalarGrid, DecodeError> {
    let decoder = png::Decoder::new(bytes);
    let mut reader = decoder
        .read_info()
        .map_err(|e| malformed(format!("png header: {e}")))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale {
        return Err(DecodeError::Unsupported(format!(
            "png color type {:?} (only 8-bit grayscale)",
            info.color_type
        )));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(DecodeError::Unsupported(format!(
            "png bit depth {:?} (only 8-bit grayscale)",
            info.bit_depth
        )));
    }
    let (cols, rows) = (info.width as usize, info.height as usize);
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| malformed(format!("png data: {e}")))?;
    let values = buf[..frame.buffer_size()]
        .chunks(frame.line_size)
        .flat_map(|line| line[..cols].iter().map(|&b| b as f64 / 255.0))
        .collect();
    ScalarGrid::from_vec(rows, cols, values).map_err(|e| malformed(e.to_string()))
}

/// `round_half_even(clamp(v, 0, 1) * 255)`; NaN maps to 0.
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round_ties_even() as u8
}

/// Encodes `u` in memory.
pub fn encode_image(u: &ScalarGrid, format: ImageFormat) -> Vec<u8> {
    let (rows, cols) = u.dim();
    let pixels: Vec<u8> = u.iter().map(|&v| quantize(v)).collect();
    match format {
        ImageFormat::PgmBinary => {
            let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
            out.extend_from_slice(&pixels);
            out
        }
        ImageFormat::PgmAscii => {
            let mut out = format!("P2\n{cols} {rows}\n255\n");
            for row in pixels.chunks(cols) {
                let line: Vec<String> = row.iter().map(u8::to_string).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            let mut encoder = png::Encoder::new(&mut out, cols as u32, rows as u32);
            encoder.set_color(png::ColorType::Grayscale);
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder
                .write_header()
                .expect("writing to a Vec cannot fail");
            writer
                .write_image_data(&pixels)
                .expect("pixel count matches the header");
            writer.finish().expect("writing to a Vec cannot fail");
            out
        }
    }
}

pub fn save_image(
    u: &ScalarGrid,
    path: impl AsRef<Path>,
    format: ImageFormat,
) -> Result<(), ImageError> {
    let path = path.as_ref();
    fs::write(path, encode_image(u, format)).map_err(|e| io_error(path, e))
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {reason}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

pub const TRACE_HEADER: &str = "iter,energy,psnr,residual,norm_n";

fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_value(token: &str) -> Option<f64> {
    match token {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => token.parse().ok().filter(|v: &f64| v.is_finite()),
    }
}

/// Renders a trace as CSV. Elapsed time is not stored, so equal runs give
/// byte-identical files.
pub fn format_trace(trace: &IterationTrace) -> String {
    let mut out = String::with_capacity(80 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            format_value(r.energy),
            format_value(r.psnr),
            format_value(r.residual),
            format_value(r.norm_n)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn save_trace(trace: &IterationTrace, path: impl AsRef<Path>) -> Result<(), TraceError> {
    let path = path.as_ref();
    let io_err = |source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    w.write_all(format_trace(trace).as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Parses CSV produced by [`format_trace`]; `elapsed` is left at zero.
pub fn parse_trace(text: &str) -> Result<IterationTrace, (usize, String)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == TRACE_HEADER => {}
        _ => return Err((1, format!("expected header `{TRACE_HEADER}`"))),
    }
    let mut trace = IterationTrace::default();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err((line_no, format!("expected 5 fields, found {}", fields.len())));
        }
        let iter: usize = fields[0]
            .parse()
            .map_err(|_| (line_no, format!("bad iteration `{}`", fields[0])))?;
        if trace.last().is_some_and(|prev| prev.iter >= iter) {
            return Err((line_no, "iterations must increase".to_string()));
        }
        let mut values = [0.0; 4];
        for (slot, token) in values.iter_mut().zip(&fields[1..]) {
            *slot = parse_value(token).ok_or_else(|| (line_no, format!("bad number `{token}`")))?;
        }
        let [energy, psnr, residual, norm_n] = values;
        trace.records.push(TraceRecord {
            iter,
            energy,
            psnr,
            residual,
            norm_n,
        });
    }
    Ok(trace)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<IterationTrace, TraceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trace(&text).map_err(|(line, reason)| TraceError::Malformed {
        path: path.to_path_buf(),
        line,
        reason,
    })
}
