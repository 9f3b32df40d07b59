//! Grid and flow-field value types shared by every module.
//!
//! Coordinate convention: pixel `p` sits at integer coordinates
//! `(x_p, y_p)`, origin at the top-left corner, `x` growing rightward and
//! `y` growing downward. Intensities are `f64` with a nominal range of
//! `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Single-channel 2-D scalar field, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Builds a grid from row-major data.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image dimensions must be >= 1"));
        }
        if data.len() != width * height {
            return Err(Error::InvalidArgument("data length != width * height"));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("image data must be finite"));
        }
        Ok(Self { width, height, data })
    }

    /// Grid filled with a single value.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Pixel value with zero-padding outside the image.
    #[inline]
    pub fn get_padded(&self, x: isize, y: isize) -> f64 {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            0.0
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }

    /// Inner product of two same-size grids viewed as flat vectors.
    pub fn dot(&self, other: &ImageGrid) -> Result<f64> {
        self.check_same_dims(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn check_same_dims(&self, other: &ImageGrid) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    /// Elementwise map, returning a new grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ImageGrid {
        ImageGrid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Central crop removing `border` pixels from every side.
    pub fn crop_border(&self, border: usize) -> Result<ImageGrid> {
        if 2 * border >= self.width.min(self.height) {
            return Err(Error::OutOfBounds("crop border too large"));
        }
        let w = self.width - 2 * border;
        let h = self.height - 2 * border;
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            let row = (y + border) * self.width + border;
            data.extend_from_slice(&self.data[row..row + w]);
        }
        Ok(ImageGrid {
            width: w,
            height: h,
            data,
        })
    }
}

/// BT.601 luminance of an RGB triple of grids, clamped to `[0, 1]`.
pub fn to_luminance(r: &ImageGrid, g: &ImageGrid, b: &ImageGrid) -> Result<ImageGrid> {
    r.check_same_dims(g)?;
    r.check_same_dims(b)?;
    let data = r
        .data
        .iter()
        .zip(&g.data)
        .zip(&b.data)
        .map(|((&r, &g), &b)| (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0))
        .collect();
    ImageGrid::new(r.width, r.height, data)
}

/// Per-pixel 2-D motion vectors in source-grid pixel units.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != width * height || v.len() != width * height {
            return Err(Error::InvalidArgument("flow component length != width * height"));
        }
        if !u.iter().chain(v.iter()).all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("flow components must be finite"));
        }
        Ok(Self { width, height, u, v })
    }

    /// All-zero flow.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
        }
    }

    /// Constant flow `(u, v)` over the whole field.
    pub fn constant(width: usize, height: usize, u: f64, v: f64) -> Self {
        Self {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
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

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    /// Flow with both components negated.
    pub fn negated(&self) -> FlowField {
        FlowField {
            width: self.width,
            height: self.height,
            u: self.u.iter().map(|c| -c).collect(),
            v: self.v.iter().map(|c| -c).collect(),
        }
    }

    pub fn check_matches_image(&self, img: &ImageGrid) -> Result<()> {
        if self.dims() != img.dims() {
            return Err(Error::DimensionMismatch {
                expected: img.dims(),
                actual: self.dims(),
            });
        }
        Ok(())
    }
}

/// Ordered list of co-registered frames with a designated reference.
#[derive(Debug, Clone)]
pub struct Sequence {
    frames: Vec<ImageGrid>,
    reference_index: usize,
}

impl Sequence {
    pub fn new(frames: Vec<ImageGrid>, reference_index: usize) -> Result<Self> {
        let first = frames
            .first()
            .ok_or(Error::InvalidArgument("sequence must contain a frame"))?;
        let dims = first.dims();
        for frame in &frames {
            if frame.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: frame.dims(),
                });
            }
        }
        if reference_index >= frames.len() {
            return Err(Error::InvalidArgument("reference index out of range"));
        }
        Ok(Self {
            frames,
            reference_index,
        })
    }

    pub fn frames(&self) -> &[ImageGrid] {
        &self.frames
    }

    pub fn reference_index(&self) -> usize {
        self.reference_index
    }

    pub fn reference(&self) -> &ImageGrid {
        &self.frames[self.reference_index]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }
}
