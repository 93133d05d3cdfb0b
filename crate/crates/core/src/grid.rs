//! Row-major 2-D grids used for intensity images and quantized images.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::Dimension {
                expected: height * width,
                got: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.width + c] = v;
    }

    /// Value at a possibly out-of-range position, replicating the nearest edge.
    #[inline]
    pub fn get_clamped(&self, r: isize, c: isize) -> T {
        let r = r.clamp(0, self.height as isize - 1) as usize;
        let c = c.clamp(0, self.width as isize - 1) as usize;
        self.get(r, c)
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(T) -> U) -> Grid<U> {
        Grid {
            height: self.height,
            width: self.width,
            data: self.data.iter().copied().map(f).collect(),
        }
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    /// Rotate by 90° counter-clockwise.
    pub fn rotate90(&self) -> Self {
        let (h, w) = (self.height, self.width);
        Grid::from_fn(w, h, |r, c| self.get(c, w - 1 - r))
    }

    /// Mirror left-right.
    pub fn flip_horizontal(&self) -> Self {
        let w = self.width;
        Grid::from_fn(self.height, w, |r, c| self.get(r, w - 1 - c))
    }
}

/// Intensity image with values in `[0, 1]`.
pub type Intensity = Grid<f64>;

/// Gray-level image with every cell in `[0, levels)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedImage {
    levels: u16,
    grid: Grid<u16>,
}

impl QuantizedImage {
    pub fn new(levels: u16, grid: Grid<u16>) -> Result<Self> {
        if levels < 2 {
            return Err(Error::Parameter(format!(
                "levels must be >= 2, got {levels}"
            )));
        }
        if let Some(&bad) = grid.data().iter().find(|&&v| v >= levels) {
            return Err(Error::Parameter(format!(
                "gray level {bad} out of range for {levels} levels"
            )));
        }
        Ok(Self { levels, grid })
    }

    pub fn levels(&self) -> u16 {
        self.levels
    }

    pub fn grid(&self) -> &Grid<u16> {
        &self.grid
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u16 {
        self.grid.get(r, c)
    }

    pub fn rotate90(&self) -> Self {
        Self {
            levels: self.levels,
            grid: self.grid.rotate90(),
        }
    }

    pub fn flip_horizontal(&self) -> Self {
        Self {
            levels: self.levels,
            grid: self.grid.flip_horizontal(),
        }
    }

    /// Intensities at bin centers, `(v + 0.5) / levels`.
    pub fn to_intensity(&self) -> Intensity {
        let l = f64::from(self.levels);
        self.grid.map(|v| (f64::from(v) + 0.5) / l)
    }
}
