//! RGB rasters, complex-plane viewports and binary PPM output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted width or height.
pub const MAX_SIDE: usize = 8192;

pub type Rgb = [u8; 3];

/// Axis-aligned rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Viewport {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite())
            && re_min < re_max
            && im_min < im_max;
        if !ok {
            return Err(Error::Validation(format!(
                "empty viewport [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// `[−r, r]²`.
    pub fn square(r: f64) -> Result<Self> {
        Self::new(-r, r, -r, r)
    }

    /// Pixel containing `z`; row 0 is the top edge (largest imaginary part).
    pub fn pixel(&self, z: Complex64, width: usize, height: usize) -> Option<(usize, usize)> {
        let x = ((z.re - self.re_min) / (self.re_max - self.re_min) * width as f64).floor();
        let y = ((self.im_max - z.im) / (self.im_max - self.im_min) * height as f64).floor();
        (x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64)
            .then_some((x as usize, y as usize))
    }

    /// Unclamped pixel coordinates, for clipping line segments.
    pub fn pixel_f64(&self, z: Complex64, width: usize, height: usize) -> (f64, f64) {
        (
            (z.re - self.re_min) / (self.re_max - self.re_min) * width as f64,
            (self.im_max - z.im) / (self.im_max - self.im_min) * height as f64,
        )
    }

    /// Centre of pixel `(x, y)`.
    pub fn point(&self, x: usize, y: usize, width: usize, height: usize) -> Complex64 {
        Complex64::new(
            self.re_min + (x as f64 + 0.5) / width as f64 * (self.re_max - self.re_min),
            self.im_max - (y as f64 + 0.5) / height as f64 * (self.im_max - self.im_min),
        )
    }
}

impl fmt::Display for Viewport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

/// Parses `re_min,re_max,im_min,im_max`.
impl FromStr for Viewport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Validation(format!("bad viewport `{s}`")))?;
        match parts[..] {
            [a, b, c, d] => Viewport::new(a, b, c, d),
            _ => Err(Error::Validation(format!(
                "viewport needs 4 numbers re_min,re_max,im_min,im_max, got `{s}`"
            ))),
        }
    }
}

/// Row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
            return Err(Error::Validation(format!(
                "raster size {width}x{height} outside 1..={MAX_SIDE}"
            )));
        }
        Ok(Self {
            width,
            height,
            data: vec![0; width * height * 3],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn fill(&mut self, c: Rgb) {
        for px in self.data.chunks_exact_mut(3) {
            px.copy_from_slice(&c);
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        if x < self.width && y < self.height {
            let i = 3 * (y * self.width + x);
            self.data[i..i + 3].copy_from_slice(&c);
        }
    }

    fn set_i64(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 {
            self.set(x as usize, y as usize, c);
        }
    }

    /// Bresenham segment; endpoints far outside are clipped to a margin
    /// around the raster first.
    pub fn line(&mut self, from: (f64, f64), to: (f64, f64), c: Rgb) {
        let Some(((x0, y0), (x1, y1))) = clip(from, to, self.width as f64, self.height as f64) else {
            return;
        };
        let (mut x, mut y) = (x0.floor() as i64, y0.floor() as i64);
        let (xe, ye) = (x1.floor() as i64, y1.floor() as i64);
        let dx = (xe - x).abs();
        let dy = -(ye - y).abs();
        let sx = if x < xe { 1 } else { -1 };
        let sy = if y < ye { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set_i64(x, y, c);
            if x == xe && y == ye {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    /// Number of pixels differing from `background`.
    pub fn count_marked(&self, background: Rgb) -> usize {
        self.data
            .chunks_exact(3)
            .filter(|px| *px != background.as_slice())
            .count()
    }

    /// Binary PPM (`P6`, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_ppm())?;
        Ok(())
    }
}

/// Liang–Barsky clip to `[-1, w+1] × [-1, h+1]`.
fn clip(a: (f64, f64), b: (f64, f64), w: f64, h: f64) -> Option<((f64, f64), (f64, f64))> {
    if ![a.0, a.1, b.0, b.1].iter().all(|v| v.is_finite()) {
        return None;
    }
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-dx, a.0 + 1.0),
        (dx, w + 1.0 - a.0),
        (-dy, a.1 + 1.0),
        (dy, h + 1.0 - a.1),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then(|| {
        (
            (a.0 + t0 * dx, a.1 + t0 * dy),
            (a.0 + t1 * dx, a.1 + t1 * dy),
        )
    })
}
