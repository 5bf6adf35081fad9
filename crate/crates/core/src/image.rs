//! Grayscale images: the in-memory type, PGM/PNG decoding, PGM encoding,
//! and bilinear resizing to the working face size.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};

/// Luma weights applied when collapsing RGB input to intensity.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// A grayscale image with intensities held as reals in `[0, 255]`.
///
/// Pixels are stored row-major; `width` and `height` are always at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image, validating the pixel buffer length and value range.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel buffer has {} values, expected {}",
                pixels.len(),
                width * height
            )));
        }
        for &v in &pixels {
            if !v.is_finite() || !(0.0..=255.0).contains(&v) {
                return Err(Error::InvalidImage(format!("pixel value {v} outside [0, 255]")));
            }
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Builds a constant-valued image.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Intensity at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }
}

/// Loads a grayscale image from disk, detecting the format from the file's
/// magic bytes. Binary PGM (P5, 8-bit) and PNG (8-bit grayscale or RGB) are
/// supported; RGB input is converted to luminance.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        decode_pgm(path, &bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(path, &bytes)
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "expected a binary PGM (P5) or PNG file".into(),
        })
    }
}

/// Writes `img` as a binary PGM (P5, maxval 255). Values are rounded to the
/// nearest integer; integer-valued pixels round-trip bit-exactly.
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    use std::io::Write;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<fs::File>, data: &[u8]| -> Result<()> {
        w.write_all(data).map_err(|e| Error::io(path, e))
    };
    write(&mut w, format!("P5\n{} {}\n255\n", img.width, img.height).as_bytes())?;
    let bytes: Vec<u8> = img
        .pixels
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    write(&mut w, &bytes)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn corrupt(path: &Path, detail: impl Into<String>) -> Error {
    Error::CorruptImage {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

/// Parses a binary PGM. Header tokens may be separated by whitespace and
/// `#` comments; a single whitespace byte separates the header from the
/// raster data.
fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2; // past "P5"
    let next_token = |pos: &mut usize| -> Result<usize> {
        // skip whitespace and comment lines
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                break;
            }
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(corrupt(path, "malformed PGM header"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt(path, "malformed PGM header"))
    };

    let width = next_token(&mut pos)?;
    let height = next_token(&mut pos)?;
    let maxval = next_token(&mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("PGM maxval {maxval}; only 8-bit (maxval <= 255) is supported"),
        });
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(corrupt(path, "missing separator before raster data"));
    }
    pos += 1;

    if width == 0 || height == 0 {
        return Err(corrupt(path, "zero image dimension"));
    }
    let n = width * height;
    if bytes.len() < pos + n {
        return Err(corrupt(
            path,
            format!("raster truncated: expected {n} bytes, found {}", bytes.len() - pos),
        ));
    }
    let pixels = bytes[pos..pos + n].iter().map(|&b| b as f64).collect();
    GrayImage::new(width, height, pixels)
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| corrupt(path, e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| corrupt(path, e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("PNG bit depth {:?}; only 8-bit is supported", info.bit_depth),
        });
    }
    let data = &buf[..info.buffer_size()];
    let (width, height) = (info.width as usize, info.height as usize);
    let pixels: Vec<f64> = match info.color_type {
        png::ColorType::Grayscale => data.iter().map(|&v| v as f64).collect(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|p| luma(p[0], p[1], p[2]))
            .collect(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("PNG color type {other:?}; only 8-bit grayscale and RGB are supported"),
            })
        }
    };
    GrayImage::new(width, height, pixels)
}

/// Broadcast luma conversion.
pub fn luma(r: u8, g: u8, b: u8) -> f64 {
    LUMA_R * r as f64 + LUMA_G * g as f64 + LUMA_B * b as f64
}

/// Samples `img` at real coordinates `(x, y)` by bilinear interpolation,
/// clamping to the image border. `(0, 0)` is the center of the top-left
/// pixel.
pub fn bilinear_sample(img: &GrayImage, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (img.width - 1) as f64);
    let y = y.clamp(0.0, (img.height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
    let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Resizes `img` to exactly `target_w` x `target_h` by bilinear
/// interpolation with pixel-center alignment: output pixel `(i, j)` samples
/// the source at `((i + 0.5) * w / target_w - 0.5, (j + 0.5) * h / target_h - 0.5)`.
/// Resizing to the source size reproduces the input bit-exactly.
pub fn normalize_face(img: &GrayImage, target_w: usize, target_h: usize) -> Result<GrayImage> {
    if target_w == 0 || target_h == 0 {
        return Err(Error::EmptyImage);
    }
    let sx = img.width as f64 / target_w as f64;
    let sy = img.height as f64 / target_h as f64;
    let mut pixels = Vec::with_capacity(target_w * target_h);
    for j in 0..target_h {
        let y = (j as f64 + 0.5) * sy - 0.5;
        for i in 0..target_w {
            let x = (i as f64 + 0.5) * sx - 0.5;
            pixels.push(bilinear_sample(img, x, y));
        }
    }
    GrayImage::new(target_w, target_h, pixels)
}
