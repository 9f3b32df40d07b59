//! File formats: 8-bit PNG/PGM images, Middlebury `.flo` flow fields, and
//! sequence directories with a plain-text manifest.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage};
use subpix_core::grid::to_luminance;
use subpix_core::{FlowField, ImageGrid, Sequence};

use crate::ToolError;

const FLO_TAG: f32 = 202021.25;

/// Reads an image as a luminance grid in `[0, 1]`. Color inputs are
/// converted with BT.601 weights; gray inputs pass through.
pub fn read_image(path: &Path) -> Result<ImageGrid, ToolError> {
    let img = image::open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(gray) => {
            let data = gray.pixels().map(|p| p.0[0] as f64 / 255.0).collect();
            Ok(ImageGrid::new(w, h, data)?)
        }
        other => {
            let rgb = other.to_rgb8();
            let channel = |c: usize| -> Result<ImageGrid, ToolError> {
                let data = rgb.pixels().map(|p| p.0[c] as f64 / 255.0).collect();
                Ok(ImageGrid::new(w, h, data)?)
            };
            Ok(to_luminance(&channel(0)?, &channel(1)?, &channel(2)?)?)
        }
    }
}

/// Writes a grid as an 8-bit gray image; values are clamped to `[0, 1]`
/// and rounded to the nearest level. The extension picks PNG or PGM.
pub fn write_image(path: &Path, img: &ImageGrid) -> Result<(), ToolError> {
    let (w, h) = img.dims();
    let pixels: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let gray = GrayImage::from_raw(w as u32, h as u32, pixels)
        .expect("buffer length matches dimensions");
    gray.save(path)?;
    Ok(())
}

/// Reads a Middlebury `.flo` file.
pub fn read_flo(path: &Path) -> Result<FlowField, ToolError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut buf4 = [0u8; 4];
    reader.read_exact(&mut buf4)?;
    if f32::from_le_bytes(buf4) != FLO_TAG {
        return Err(ToolError::Format(format!(
            "{}: bad .flo tag",
            path.display()
        )));
    }
    reader.read_exact(&mut buf4)?;
    let w = i32::from_le_bytes(buf4);
    reader.read_exact(&mut buf4)?;
    let h = i32::from_le_bytes(buf4);
    if w <= 0 || h <= 0 {
        return Err(ToolError::Format(format!(
            "{}: bad .flo dimensions {w}x{h}",
            path.display()
        )));
    }
    let (w, h) = (w as usize, h as usize);
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for _ in 0..w * h {
        reader.read_exact(&mut buf4)?;
        u.push(f32::from_le_bytes(buf4) as f64);
        reader.read_exact(&mut buf4)?;
        v.push(f32::from_le_bytes(buf4) as f64);
    }
    Ok(FlowField::new(w, h, u, v)?)
}

/// Writes a Middlebury `.flo` file (components stored as f32).
pub fn write_flo(path: &Path, flow: &FlowField) -> Result<(), ToolError> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_all(&FLO_TAG.to_le_bytes())?;
    writer.write_all(&(flow.width() as i32).to_le_bytes())?;
    writer.write_all(&(flow.height() as i32).to_le_bytes())?;
    for (u, v) in flow.u().iter().zip(flow.v()) {
        writer.write_all(&(*u as f32).to_le_bytes())?;
        writer.write_all(&(*v as f32).to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Sequence-directory metadata, stored as `manifest.txt` key=value lines.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceManifest {
    pub frames: usize,
    pub reference_index: usize,
    pub alpha: usize,
    pub seed: u64,
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:03}.png")
}

pub fn flow_file_name(index: usize) -> String {
    format!("flow_{index}_to_ref.flo")
}

/// Writes a sequence directory: zero-padded numbered frames plus the
/// manifest.
pub fn write_sequence(
    dir: &Path,
    seq: &Sequence,
    manifest: &SequenceManifest,
) -> Result<(), ToolError> {
    fs::create_dir_all(dir)?;
    for (i, frame) in seq.frames().iter().enumerate() {
        write_image(&dir.join(frame_file_name(i)), frame)?;
    }
    let mut file = BufWriter::new(File::create(dir.join("manifest.txt"))?);
    writeln!(file, "frames={}", manifest.frames)?;
    writeln!(file, "reference={}", manifest.reference_index)?;
    writeln!(file, "alpha={}", manifest.alpha)?;
    writeln!(file, "seed={}", manifest.seed)?;
    Ok(())
}

/// Reads a sequence directory written by [`write_sequence`].
pub fn read_sequence(dir: &Path) -> Result<(Sequence, SequenceManifest), ToolError> {
    let text = fs::read_to_string(dir.join("manifest.txt"))?;
    let mut frames = None;
    let mut reference = None;
    let mut alpha = None;
    let mut seed = 0u64;
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key.trim() {
            "frames" => frames = Some(parse_field(dir, "frames", value)?),
            "reference" => reference = Some(parse_field(dir, "reference", value)?),
            "alpha" => alpha = Some(parse_field(dir, "alpha", value)?),
            "seed" => seed = parse_field(dir, "seed", value)? as u64,
            _ => {}
        }
    }
    let manifest = SequenceManifest {
        frames: frames.ok_or_else(|| missing(dir, "frames"))?,
        reference_index: reference.ok_or_else(|| missing(dir, "reference"))?,
        alpha: alpha.ok_or_else(|| missing(dir, "alpha"))?,
        seed,
    };
    let mut images = Vec::with_capacity(manifest.frames);
    for i in 0..manifest.frames {
        images.push(read_image(&dir.join(frame_file_name(i)))?);
    }
    Ok((
        Sequence::new(images, manifest.reference_index)?,
        manifest,
    ))
}

/// Lists the image files of a plain directory of frames (no manifest),
/// sorted by file name.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>, ToolError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("png" | "pgm")
            )
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(ToolError::Format(format!(
            "{}: no .png or .pgm frames found",
            dir.display()
        )));
    }
    Ok(files)
}

fn parse_field(dir: &Path, key: &str, value: &str) -> Result<usize, ToolError> {
    value.trim().parse().map_err(|_| {
        ToolError::Format(format!(
            "{}: bad manifest value for {key}: {value}",
            dir.display()
        ))
    })
}

fn missing(dir: &Path, key: &str) -> ToolError {
    ToolError::Format(format!("{}: manifest missing {key}", dir.display()))
}
