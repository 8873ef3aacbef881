//! Gaussian radial-basis-function model of the seriated distance surface.
//!
//! The model is `y(x) = c0 + sum_m w_m exp(-a |x - x_m|^2)` with centres on a
//! square frame around the matrix. Weights minimise the squared training
//! error plus `reg_alpha * |w|^2`, i.e. they solve
//! `(Phi + reg_alpha / N * E) w = v` where `Phi` and `v` are sample averages
//! of basis-function products. The constant `c0` is carried as an extra
//! basis function identically equal to one and is left out of the penalty,
//! so a heavily regularised model flattens towards the sample mean.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::seriation::SeriatedMatrix;

/// Condition estimate above which a fit is reported as ill-conditioned.
pub const CONDITION_WARNING: f64 = 1e12;

/// Points in matrix-index coordinates (1-based) and the heights above them.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl SurfaceSample {
    pub fn new(points: Vec<[f64; 2]>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: values.len(),
            });
        }
        if points.is_empty() {
            return Err(Error::Empty("surface sample"));
        }
        Ok(Self { points, values })
    }

    /// Upper triangle including the diagonal; cell `(i, j)` sits at
    /// coordinates `(i + 1, j + 1)`.
    pub fn upper_triangle(s: &SeriatedMatrix) -> Self {
        let n = s.len();
        let mut points = Vec::with_capacity(n * (n + 1) / 2);
        let mut values = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                points.push([(i + 1) as f64, (j + 1) as f64]);
                values.push(s.get(i, j));
            }
        }
        Self { points, values }
    }

    /// Every cell of the matrix.
    pub fn full_matrix(s: &SeriatedMatrix) -> Self {
        let n = s.len();
        let mut points = Vec::with_capacity(n * n);
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                points.push([(i + 1) as f64, (j + 1) as f64]);
                values.push(s.get(i, j));
            }
        }
        Self { points, values }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Centres on a square frame at distance `spacing` outside `[1, n]^2`.
///
/// Each side of the frame square `[1 - R, n + R]` is split into
/// `ceil((n - 1 + 2R) / R)` equal segments, so neighbouring centres are at
/// most `R` apart; corners are included once.
pub fn frame_centers(n: usize, spacing: f64) -> Result<Vec<[f64; 2]>> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "matrix size",
            value: n as f64,
            expected: "at least 2",
        });
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter {
            name: "frame spacing",
            value: spacing,
            expected: "> 0",
        });
    }
    if spacing >= n as f64 {
        return Err(Error::DegenerateFrame { spacing, size: n });
    }
    let lo = 1.0 - spacing;
    let side = (n - 1) as f64 + 2.0 * spacing;
    // guard against ceil(3.0000000000000004)
    let segments = libm::ceil(side / spacing - 1e-9).max(1.0) as usize;
    let step = side / segments as f64;
    let coord = |k: usize| if k == segments { lo + side } else { lo + step * k as f64 };
    let mut centers = Vec::with_capacity(4 * segments);
    for k in 0..segments {
        centers.push([coord(k), lo]); // top edge, left to right
    }
    for k in 0..segments {
        centers.push([lo + side, coord(k)]); // right edge
    }
    for k in (1..=segments).rev() {
        centers.push([coord(k), lo + side]); // bottom edge, right to left
    }
    for k in (1..=segments).rev() {
        centers.push([lo, coord(k)]); // left edge
    }
    Ok(centers)
}

/// Gaussian shape `a` such that a basis function has decayed to `residual`
/// at distance `spacing`: `a = -ln(residual) / spacing^2`.
pub fn shape_from_residual(spacing: f64, residual: f64) -> Result<f64> {
    if !(residual > 0.0 && residual < 1.0) {
        return Err(Error::InvalidParameter {
            name: "residual",
            value: residual,
            expected: "(0, 1)",
        });
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidParameter {
            name: "spacing",
            value: spacing,
            expected: "> 0",
        });
    }
    Ok(-libm::log(residual) / (spacing * spacing))
}

#[inline]
fn gaussian(shape: f64, p: &[f64; 2], c: &[f64; 2]) -> f64 {
    let dx = p[0] - c[0];
    let dy = p[1] - c[1];
    libm::exp(-shape * (dx * dx + dy * dy))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitDiagnostics {
    pub samples: usize,
    /// Sum of squared training errors.
    pub residual_sum_squares: f64,
    pub condition_estimate: f64,
}

impl FitDiagnostics {
    pub fn ill_conditioned(&self) -> bool {
        self.condition_estimate > CONDITION_WARNING
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RbfModel {
    pub centers: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub shape: f64,
    /// Additive constant; `None` when fitted without a constant term.
    pub constant: Option<f64>,
    pub reg_alpha: f64,
    pub diagnostics: Option<FitDiagnostics>,
}

impl RbfModel {
    /// A model with given coefficients and no fit diagnostics.
    pub fn from_parts(
        centers: Vec<[f64; 2]>,
        weights: Vec<f64>,
        shape: f64,
        constant: Option<f64>,
        reg_alpha: f64,
    ) -> Result<Self> {
        if centers.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: centers.len(),
                right: weights.len(),
            });
        }
        if !(shape > 0.0) {
            return Err(Error::InvalidParameter {
                name: "shape",
                value: shape,
                expected: "> 0",
            });
        }
        Ok(Self {
            centers,
            weights,
            shape,
            constant,
            reg_alpha,
            diagnostics: None,
        })
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let p = [x, y];
        self.constant.unwrap_or(0.0)
            + self
                .centers
                .iter()
                .zip(&self.weights)
                .map(|(c, w)| w * gaussian(self.shape, &p, c))
                .sum::<f64>()
    }

    pub fn fitted_values(&self, sample: &SurfaceSample) -> Vec<f64> {
        sample.points.iter().map(|p| self.evaluate(p[0], p[1])).collect()
    }

    pub fn residual_sum_squares(&self, sample: &SurfaceSample) -> f64 {
        self.fitted_values(sample)
            .iter()
            .zip(&sample.values)
            .map(|(f, y)| (f - y) * (f - y))
            .sum()
    }

    /// `w'w` over the Gaussian weights (the penalised coefficients).
    pub fn weight_norm_squared(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

/// Least-squares fit of the Gaussian weights (and optional constant) with
/// Tikhonov penalty `reg_alpha`.
pub fn fit(
    sample: &SurfaceSample,
    centers: &[[f64; 2]],
    shape: f64,
    reg_alpha: f64,
    with_constant: bool,
) -> Result<RbfModel> {
    if centers.is_empty() {
        return Err(Error::Empty("centre list"));
    }
    if sample.is_empty() {
        return Err(Error::Empty("surface sample"));
    }
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::InvalidParameter {
            name: "shape",
            value: shape,
            expected: "> 0",
        });
    }
    if !(reg_alpha >= 0.0) || !reg_alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "reg_alpha",
            value: reg_alpha,
            expected: ">= 0",
        });
    }
    let offset = usize::from(with_constant);
    let m = centers.len() + offset;
    let n = sample.len() as f64;

    let mut gram = alloc::vec![0.0; m * m];
    let mut rhs = alloc::vec![0.0; m];
    let mut basis = alloc::vec![0.0; m];
    for (p, &y) in sample.points.iter().zip(&sample.values) {
        if with_constant {
            basis[0] = 1.0;
        }
        for (b, c) in basis[offset..].iter_mut().zip(centers) {
            *b = gaussian(shape, p, c);
        }
        for k in 0..m {
            rhs[k] += y * basis[k];
            for l in k..m {
                gram[k * m + l] += basis[k] * basis[l];
            }
        }
    }
    for k in 0..m {
        rhs[k] /= n;
        for l in k..m {
            gram[k * m + l] /= n;
            gram[l * m + k] = gram[k * m + l];
        }
    }
    let ridge = reg_alpha / n;
    for k in offset..m {
        gram[k * m + k] += ridge;
    }

    let chol = Cholesky::new(&gram, m).ok_or(Error::SingularSystem { reg_alpha })?;
    let solution = chol.solve(&rhs);
    let mut model = RbfModel {
        centers: centers.to_vec(),
        weights: solution[offset..].to_vec(),
        shape,
        constant: with_constant.then(|| solution[0]),
        reg_alpha,
        diagnostics: None,
    };
    model.diagnostics = Some(FitDiagnostics {
        samples: sample.len(),
        residual_sum_squares: model.residual_sum_squares(sample),
        condition_estimate: chol.condition_estimate(),
    });
    Ok(model)
}
