//! Paths in the complex base of a fibration.

use num_complex::Complex64;

use crate::{Error, Result};

/// A smooth path `sigma -> t(sigma)` in `C` over a parameter interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasePath {
    /// Stays at one value; the parameter runs over `[0, duration]`.
    Constant { at: Complex64, duration: f64 },
    /// Straight segment parameterized by arclength.
    Line { from: Complex64, to: Complex64 },
    /// `radius * e^{i theta}` parameterized by `theta`.
    Arc { radius: f64, from: f64, to: f64 },
}

impl BasePath {
    pub fn constant(at: Complex64, duration: f64) -> Self {
        BasePath::Constant { at, duration }
    }

    pub fn line(from: Complex64, to: Complex64) -> Self {
        BasePath::Line { from, to }
    }

    pub fn real_line(from: f64, to: f64) -> Self {
        BasePath::Line {
            from: Complex64::new(from, 0.0),
            to: Complex64::new(to, 0.0),
        }
    }

    pub fn arc(radius: f64, from: f64, to: f64) -> Self {
        BasePath::Arc { radius, from, to }
    }

    pub fn span(&self) -> (f64, f64) {
        match *self {
            BasePath::Constant { duration, .. } => (0.0, duration),
            BasePath::Line { from, to } => (0.0, (to - from).norm()),
            BasePath::Arc { from, to, .. } => (from, to),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.at(self.span().0)
    }

    pub fn end(&self) -> Complex64 {
        self.at(self.span().1)
    }

    pub fn at(&self, sigma: f64) -> Complex64 {
        match *self {
            BasePath::Constant { at, .. } => at,
            BasePath::Line { from, to } => {
                let len = (to - from).norm();
                if len == 0.0 {
                    from
                } else if sigma == len {
                    to
                } else {
                    from + (to - from) * (sigma / len)
                }
            }
            BasePath::Arc { radius, .. } => Complex64::from_polar(radius, sigma),
        }
    }

    pub fn velocity(&self, sigma: f64) -> Complex64 {
        match *self {
            BasePath::Constant { .. } => Complex64::new(0.0, 0.0),
            BasePath::Line { from, to } => {
                let len = (to - from).norm();
                if len == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    (to - from) / len
                }
            }
            BasePath::Arc { radius, .. } => Complex64::from_polar(radius, sigma) * Complex64::i(),
        }
    }

    /// Smallest `|t|` along the path.
    pub fn min_modulus(&self) -> f64 {
        match *self {
            BasePath::Constant { at, .. } => at.norm(),
            BasePath::Arc { radius, .. } => radius.abs(),
            BasePath::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return from.norm();
                }
                let s = (-(from.re * d.re + from.im * d.im) / len2).clamp(0.0, 1.0);
                (from + d * s).norm()
            }
        }
    }

    /// Fails when the path meets `0`.
    pub fn avoiding_origin(self) -> Result<Self> {
        let ok = self.min_modulus() > 0.0;
        let finite = match self {
            BasePath::Constant { at, duration } => at.is_finite() && duration.is_finite(),
            BasePath::Line { from, to } => from.is_finite() && to.is_finite(),
            BasePath::Arc { radius, from, to } => {
                radius.is_finite() && from.is_finite() && to.is_finite()
            }
        };
        if !finite {
            return Err(Error::InvalidParameter("non-finite path".into()));
        }
        if !ok {
            return Err(Error::OutsideDomain(
                "path passes through the critical value 0".into(),
            ));
        }
        Ok(self)
    }
}
