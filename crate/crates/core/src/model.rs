//! Solver parameters and state, the elastica energy, and image-quality
//! metrics.

use std::time::Duration;

use thiserror::Error;

use crate::grid::{div_backward, grad_forward, GridError, ScalarGrid, VectorField};

/// Default regularization added to gradient magnitudes before normalizing.
pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Model weights, penalty weights and step sizes shared by all solvers.
///
/// `a` and `b` weight the length and curvature terms, `lambda` the fidelity
/// term. `r1`, `r2`, `r3` penalize the constraints on `n`, `p` and `h`.
/// `gamma` is the proximal weight of the `n` update and `delta1`, `delta2`
/// are the linearization step sizes of the `u` and `n` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub gamma: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub epsilon: f64,
    pub tol: f64,
    /// Iteration cap; zero is allowed and leaves the input untouched.
    pub max_iter: usize,
}

impl Default for SolverParams {
    /// The synthetic-image RALM setting: a=1, b=0.1, lambda=11, r1=50,
    /// r2=3, r3=2, gamma=1e-5, delta1=delta2=1e-2.
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.1,
            lambda: 11.0,
            r1: 50.0,
            r2: 3.0,
            r3: 2.0,
            gamma: 1e-5,
            delta1: 1e-2,
            delta2: 1e-2,
            epsilon: DEFAULT_EPSILON,
            tol: 9e-5,
            max_iter: 10_000,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let nonneg = [("a", self.a), ("b", self.b), ("gamma", self.gamma)];
        for (name, value) in nonneg {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ParamError::OutOfRange {
                    name,
                    requirement: "finite and >= 0",
                    value,
                });
            }
        }
        let positive = [
            ("lambda", self.lambda),
            ("r1", self.r1),
            ("r2", self.r2),
            ("r3", self.r3),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("epsilon", self.epsilon),
            ("tol", self.tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ParamError::OutOfRange {
                    name,
                    requirement: "finite and > 0",
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Full iterate of the elastica solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: ScalarGrid,
    pub p: VectorField,
    pub n: VectorField,
    pub h: ScalarGrid,
    pub lambda1: VectorField,
    pub lambda2: VectorField,
    pub lambda3: ScalarGrid,
    pub iter: usize,
}

impl SolverState {
    /// `u = f`, everything else zero.
    pub fn initial(f: &ScalarGrid) -> Self {
        let (rows, cols) = f.dim();
        let zero = ScalarGrid::zeros(rows, cols).expect("f has valid dimensions");
        let zero_field = VectorField::zeros(rows, cols).expect("f has valid dimensions");
        Self {
            u: f.clone(),
            p: zero_field.clone(),
            n: zero_field.clone(),
            h: zero.clone(),
            lambda1: zero_field.clone(),
            lambda2: zero_field,
            lambda3: zero,
            iter: 0,
        }
    }

    pub fn dim(&self) -> (usize, usize) {
        self.u.dim()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite()
            && self.p.is_finite()
            && self.n.is_finite()
            && self.h.is_finite()
            && self.lambda1.is_finite()
            && self.lambda2.is_finite()
            && self.lambda3.is_finite()
    }
}

/// Diagnostics recorded after one completed iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub energy: f64,
    /// PSNR against the reference in dB; NaN when no reference was given,
    /// `f64::INFINITY` for an exact match.
    pub psnr: f64,
    pub residual: f64,
    pub norm_n: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    pub elapsed: Duration,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("reference image is constant; NRMSE is undefined")]
    ConstantReference,
    #[error("reference image is identically zero; NMAD is undefined")]
    ZeroReference,
    #[error("previous iterate has zero norm; relative residual is undefined")]
    ZeroNorm,
}

/// `|v|_eps = |v| + eps` per pixel.
pub fn regularized_magnitude(v: &VectorField, epsilon: f64) -> ScalarGrid {
    v.magnitude().map(|m| m + epsilon)
}

/// Discrete curvature `div(grad u / |grad u|_eps)`.
pub fn curvature(u: &ScalarGrid, epsilon: f64) -> ScalarGrid {
    let g = grad_forward(u);
    let mag = regularized_magnitude(&g, epsilon);
    let nx = g.x().zip_map(&mag, |a, m| a / m).expect("same shape");
    let ny = g.y().zip_map(&mag, |a, m| a / m).expect("same shape");
    div_backward(&VectorField::new(nx, ny).expect("same shape"))
}

/// Discrete elastica energy
/// `sum (a + b kappa^2) |grad u| + lambda/2 sum (u - f)^2` with unit spacing.
pub fn elastica_energy(
    u: &ScalarGrid,
    f: &ScalarGrid,
    params: &SolverParams,
) -> Result<f64, GridError> {
    u.ensure_same_dim(f)?;
    let grad_mag = grad_forward(u).magnitude();
    let kappa = curvature(u, params.epsilon);
    let regularizer: f64 = grad_mag
        .iter()
        .zip(kappa.iter())
        .map(|(g, k)| (params.a + params.b * k * k) * g)
        .sum();
    let fidelity: f64 = u
        .iter()
        .zip(f.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(regularizer + 0.5 * params.lambda * fidelity)
}

fn sum_squared_diff(a: &ScalarGrid, b: &ScalarGrid) -> Result<f64, GridError> {
    a.ensure_same_dim(b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Peak signal-to-noise ratio with peak value 1. Identical grids give
/// `f64::INFINITY`.
pub fn psnr(reference: &ScalarGrid, test: &ScalarGrid) -> Result<f64, MetricError> {
    let mse = sum_squared_diff(reference, test)? / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

/// `sqrt(sum (I - f)^2 / sum (I - mean I)^2)` with `I` the reference.
pub fn nrmse(reference: &ScalarGrid, test: &ScalarGrid) -> Result<f64, MetricError> {
    let num = sum_squared_diff(reference, test)?;
    let mean = reference.iter().sum::<f64>() / reference.len() as f64;
    let den: f64 = reference.iter().map(|v| (v - mean) * (v - mean)).sum();
    if den == 0.0 {
        return Err(MetricError::ConstantReference);
    }
    Ok((num / den).sqrt())
}

/// `sum |I - f| / sum |I|` with `I` the reference.
pub fn nmad(reference: &ScalarGrid, test: &ScalarGrid) -> Result<f64, MetricError> {
    reference.ensure_same_dim(test)?;
    let den: f64 = reference.iter().map(|v| v.abs()).sum();
    if den == 0.0 {
        return Err(MetricError::ZeroReference);
    }
    let num: f64 = reference
        .iter()
        .zip(test.iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(num / den)
}

/// `||u_curr - u_prev|| / ||u_prev||`.
pub fn relative_residual(u_curr: &ScalarGrid, u_prev: &ScalarGrid) -> Result<f64, MetricError> {
    let num = sum_squared_diff(u_curr, u_prev)?.sqrt();
    let den = u_prev.l2_norm();
    if den == 0.0 {
        return Err(MetricError::ZeroNorm);
    }
    Ok(num / den)
}

/// Mean per-pixel magnitude of `n`.
pub fn norm_n(n: &VectorField) -> f64 {
    let mag = n.magnitude();
    mag.iter().sum::<f64>() / mag.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(rows: usize, cols: usize, v: f64) -> ScalarGrid {
        ScalarGrid::filled(rows, cols, v).unwrap()
    }

    #[test]
    fn default_params_are_valid() {
        SolverParams::default().validate().unwrap();
        assert_eq!(SolverParams::default().epsilon, 1e-4);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let p = SolverParams {
            lambda: 0.0,
            ..SolverParams::default()
        };
        assert!(matches!(
            p.validate(),
            Err(ParamError::OutOfRange { name: "lambda", .. })
        ));
        let p = SolverParams {
            b: -1.0,
            ..SolverParams::default()
        };
        assert!(p.validate().is_err());
        let p = SolverParams {
            r2: f64::NAN,
            ..SolverParams::default()
        };
        assert!(p.validate().is_err());
        // b = 0 and a = 0 are allowed.
        let p = SolverParams {
            a: 0.0,
            b: 0.0,
            ..SolverParams::default()
        };
        p.validate().unwrap();
    }

    #[test]
    fn initial_state_is_f_and_zeros() {
        let f = ScalarGrid::from_fn(3, 4, |(i, j)| (i + j) as f64).unwrap();
        let s = SolverState::initial(&f);
        assert_eq!(s.u, f);
        assert_eq!(s.iter, 0);
        assert!(s.p.magnitude().iter().all(|&v| v == 0.0));
        assert!(s.lambda3.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_of_constant_is_zero() {
        let u = filled(5, 5, 0.3);
        let e = elastica_energy(&u, &u, &SolverParams::default()).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn energy_without_regularizer_weights_is_zero_when_u_equals_f() {
        let u = ScalarGrid::from_fn(4, 6, |(i, j)| ((i * j) % 3) as f64 / 3.0).unwrap();
        let params = SolverParams {
            a: 0.0,
            b: 0.0,
            ..SolverParams::default()
        };
        assert_eq!(elastica_energy(&u, &u, &params).unwrap(), 0.0);
        let e = elastica_energy(&u, &u, &SolverParams::default()).unwrap();
        assert!(e > 0.0);
    }

    #[test]
    fn energy_of_step_matches_total_variation() {
        // Left half 0, right half 1: the y-gradient is 1 on column 1 for all
        // four rows, so the TV is 4.
        let u = ScalarGrid::from_fn(4, 4, |(_, j)| if j >= 2 { 1.0 } else { 0.0 }).unwrap();
        let params = SolverParams {
            a: 1.0,
            b: 0.0,
            lambda: 2.0,
            ..SolverParams::default()
        };
        let mut tv = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let dx = if i < 3 { u.get(i + 1, j) - u.get(i, j) } else { 0.0 };
                let dy = if j < 3 { u.get(i, j + 1) - u.get(i, j) } else { 0.0 };
                tv += (dx * dx + dy * dy).sqrt();
            }
        }
        assert_eq!(tv, 4.0);
        assert_eq!(elastica_energy(&u, &u, &params).unwrap(), tv);
    }

    #[test]
    fn energy_rejects_mismatched_shapes() {
        let e = elastica_energy(&filled(2, 2, 0.0), &filled(2, 3, 0.0), &SolverParams::default());
        assert!(e.is_err());
    }

    #[test]
    fn psnr_values() {
        let r = filled(8, 8, 1.0);
        let t = filled(8, 8, 0.9);
        assert!((psnr(&r, &t).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(psnr(&r, &r).unwrap(), f64::INFINITY);
    }

    #[test]
    fn nrmse_values() {
        let r = ScalarGrid::from_vec(1, 2, vec![0.0, 1.0]).unwrap();
        let t = ScalarGrid::from_vec(1, 2, vec![0.1, 0.9]).unwrap();
        assert!((nrmse(&r, &t).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(nrmse(&r, &r).unwrap(), 0.0);
        assert_eq!(
            nrmse(&filled(2, 2, 0.5), &filled(2, 2, 0.4)),
            Err(MetricError::ConstantReference)
        );
    }

    #[test]
    fn nmad_values() {
        let r = filled(3, 3, 1.0);
        assert!((nmad(&r, &filled(3, 3, 0.9)).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(nmad(&r, &r).unwrap(), 0.0);
        assert_eq!(
            nmad(&filled(3, 3, 0.0), &r),
            Err(MetricError::ZeroReference)
        );
    }

    #[test]
    fn relative_residual_values() {
        let ones = filled(4, 4, 1.0);
        assert_eq!(relative_residual(&ones, &ones).unwrap(), 0.0);
        assert!((relative_residual(&filled(4, 4, 1.1), &ones).unwrap() - 0.1).abs() < 1e-12);
        assert!((relative_residual(&ones, &filled(4, 4, 2.0)).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(
            relative_residual(&ones, &filled(4, 4, 0.0)),
            Err(MetricError::ZeroNorm)
        );
    }

    #[test]
    fn norm_n_values() {
        let zero = VectorField::zeros(3, 3).unwrap();
        assert_eq!(norm_n(&zero), 0.0);
        let unit = VectorField::new(filled(3, 3, 1.0), filled(3, 3, 0.0)).unwrap();
        assert_eq!(norm_n(&unit), 1.0);
        let diag = VectorField::new(filled(3, 3, 1.0), filled(3, 3, 1.0)).unwrap();
        assert!((norm_n(&diag) - 2f64.sqrt()).abs() < 1e-15);
    }
}
