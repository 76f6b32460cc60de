use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in the complex wavenumber plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_min >= re_max || im_min >= im_max {
            return Err(Error::Config(format!(
                "empty or invalid rectangle ({re_min}, {re_max}) x ({im_min}, {im_max})"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// The default search window `(0, 4) x (-4, 0)`.
    pub fn default_window() -> Self {
        Self { re_min: 0.0, re_max: 4.0, im_min: -4.0, im_max: 0.0 }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    /// Radius of the circumscribed circle.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.width().hypot(self.height())
    }

    pub fn contains(&self, k: Complex64) -> bool {
        k.re >= self.re_min && k.re <= self.re_max && k.im >= self.im_min && k.im <= self.im_max
    }

    /// Strict interior test with a margin.
    pub fn contains_inset(&self, k: Complex64, margin: f64) -> bool {
        k.re > self.re_min + margin
            && k.re < self.re_max - margin
            && k.im > self.im_min + margin
            && k.im < self.im_max - margin
    }

    /// The four quadrants, ordered SW, SE, NW, NE.
    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect { re_min: self.re_min, re_max: c.re, im_min: self.im_min, im_max: c.im },
            Rect { re_min: c.re, re_max: self.re_max, im_min: self.im_min, im_max: c.im },
            Rect { re_min: self.re_min, re_max: c.re, im_min: c.im, im_max: self.im_max },
            Rect { re_min: c.re, re_max: self.re_max, im_min: c.im, im_max: self.im_max },
        ]
    }
}
