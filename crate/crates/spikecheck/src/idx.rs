//! IDX image/label containers (the MNIST distribution format) and the
//! grayscale → spike-time input pipeline.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder};
use serde::{Deserialize, Serialize};
use spikecheck_core::{encode_intensities, SpikeTimes};

use crate::error::{Error, Result};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
/// Largest pixel value, used as `x_max` when encoding.
pub const PIXEL_MAX: f64 = 255.0;

/// An 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.pixels[r * self.cols + c]
    }

    pub fn to_grid(&self) -> Grid {
        Grid {
            rows: self.rows,
            cols: self.cols,
            values: self.pixels.iter().map(|&p| f64::from(p)).collect(),
        }
    }
}

/// Real-valued image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub image: Image,
    pub label: u8,
}

fn header(bytes: &[u8], magic: u32, dims: usize, what: &str) -> Result<Vec<usize>> {
    let need = 4 + 4 * dims;
    if bytes.len() < need {
        return Err(Error::Format(format!("{what} file shorter than its {need}-byte header")));
    }
    let found = BigEndian::read_u32(&bytes[..4]);
    if found != magic {
        return Err(Error::Format(format!(
            "{what} file has magic {found:#010x}, expected {magic:#010x}"
        )));
    }
    Ok((0..dims)
        .map(|i| BigEndian::read_u32(&bytes[4 + 4 * i..8 + 4 * i]) as usize)
        .collect())
}

fn payload<'a>(bytes: &'a [u8], offset: usize, len: usize, what: &str) -> Result<&'a [u8]> {
    let body = &bytes[offset..];
    if body.len() != len {
        let kind = if body.len() < len { "truncated" } else { "oversized" };
        return Err(Error::Format(format!(
            "{what} payload {kind}: header promises {len} bytes, found {}",
            body.len()
        )));
    }
    Ok(body)
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Image>> {
    let dims = header(bytes, IMAGE_MAGIC, 3, "image")?;
    let (count, rows, cols) = (dims[0], dims[1], dims[2]);
    let size = rows * cols;
    let body = payload(bytes, 16, count * size, "image")?;
    if size == 0 {
        return Ok(vec![Image { rows, cols, pixels: Vec::new() }; count]);
    }
    Ok(body
        .chunks_exact(size)
        .map(|px| Image {
            rows,
            cols,
            pixels: px.to_vec(),
        })
        .collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let count = header(bytes, LABEL_MAGIC, 1, "label")?[0];
    let body = payload(bytes, 8, count, "label")?;
    if let Some(i) = body.iter().position(|&l| l > 9) {
        return Err(Error::Format(format!("label {i} is {}, outside 0..=9", body[i])));
    }
    Ok(body.to_vec())
}

/// Read an image file and its label file and pair them up.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = parse_idx_images(&fs::read(ip).map_err(Error::io(ip))?)?;
    let labels = parse_idx_labels(&fs::read(lp).map_err(Error::io(lp))?)?;
    if images.len() != labels.len() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    Ok(images
        .into_iter()
        .zip(labels)
        .map(|(image, label)| Sample { image, label })
        .collect())
}

/// Block-average pooling by `factor`, which must divide both dimensions.
pub fn downscale(grid: &Grid, factor: usize) -> Result<Grid> {
    if factor == 0 || !grid.rows.is_multiple_of(factor) || !grid.cols.is_multiple_of(factor) {
        return Err(Error::Usage(format!(
            "downscale factor {factor} does not divide {}x{}",
            grid.rows, grid.cols
        )));
    }
    let (rows, cols) = (grid.rows / factor, grid.cols / factor);
    let area = (factor * factor) as f64;
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut sum = 0.0;
            for dr in 0..factor {
                for dc in 0..factor {
                    sum += grid.get(r * factor + dr, c * factor + dc);
                }
            }
            values.push(sum / area);
        }
    }
    Ok(Grid { rows, cols, values })
}

/// Pool an image by `factor` and encode the pooled intensities as input
/// spike times over `time_steps` steps.
pub fn image_to_input(image: &Image, factor: usize, time_steps: u32) -> Result<SpikeTimes> {
    let pooled = downscale(&image.to_grid(), factor)?;
    Ok(encode_intensities(&pooled.values, PIXEL_MAX, time_steps)?)
}

/// One encoded dataset item, as written by `import-mnist`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedSample {
    pub index: usize,
    pub label: u8,
    pub times: Vec<u32>,
}

pub fn write_encoded(samples: &[EncodedSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for s in samples {
        serde_json::to_writer(&mut out, s).expect("samples always serialize");
        out.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(Error::io(path))?;
    file.write_all(&out).map_err(Error::io(path))
}

pub fn read_encoded(path: impl AsRef<Path>) -> Result<Vec<EncodedSample>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Schema(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}
