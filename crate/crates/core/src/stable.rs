//! Chambers-Mallows-Stuck generator for stable variates.
//!
//! Used to simulate heavy-tailed weekly returns for synthetic universes and
//! as an independent source of samples when checking the tail fit.

use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Maps an angle `v` uniform on `(-pi/2, pi/2)` and a standard exponential
/// `w` to a standard stable variate `S(alpha, beta, 1, 0)` in the
/// 1-parametrisation.
pub fn cms_transform(alpha: f64, beta: f64, v: f64, w: f64) -> f64 {
    if alpha == 1.0 {
        let h = FRAC_PI_2 + beta * v;
        return 2.0 / PI * (h * libm::tan(v) - beta * libm::log(FRAC_PI_2 * w * libm::cos(v) / h));
    }
    let t = beta * libm::tan(FRAC_PI_2 * alpha);
    let b = libm::atan(t) / alpha;
    let s = libm::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
    let av = alpha * (v + b);
    s * libm::sin(av) / libm::pow(libm::cos(v), 1.0 / alpha)
        * libm::pow(libm::cos(v - av) / w, (1.0 - alpha) / alpha)
}

/// Draws stable variates from a source of uniforms on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSampler {
    alpha: f64,
    beta: f64,
    scale: f64,
    location: f64,
}

impl StableSampler {
    pub fn new(alpha: f64, beta: f64, scale: f64, location: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                expected: "(0, 2]",
            });
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                expected: "[-1, 1]",
            });
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
                expected: "> 0",
            });
        }
        Ok(Self {
            alpha,
            beta,
            scale,
            location,
        })
    }

    /// `uniform` must return values strictly inside `(0, 1)`.
    pub fn sample<F: FnMut() -> f64>(&self, mut uniform: F) -> f64 {
        let v = PI * (uniform() - 0.5);
        let w = -libm::log(uniform());
        self.location + self.scale * cms_transform(self.alpha, self.beta, v, w)
    }
}
