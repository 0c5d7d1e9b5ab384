//! Augmented Lagrangian solvers for the elastica model.
//!
//! All four solvers share the same linearized `u` update
//! `u <- (u + delta1 * g1) / (1 + delta1 * lambda)` with
//! `g1 = lambda f - div(r2 p + lambda2) + r2 lap(u)`, and update the
//! multiplier of `p = grad u` in the same way. They differ in how `p`, `n`
//! and `lambda1` are coupled:
//!
//! * [`SolverKind::Ralm`] drops every `n` term from the `p` subproblem and
//!   imposes `n = p / |p|_eps`. At `b = 0` its `(u, p, lambda2)` sequence is
//!   exactly the ROF iteration of [`rof_alm_step`].
//! * [`SolverKind::Lalmn`] keeps the `n` coupling inside the `p` shrinkage
//!   but uses the same `n = p / |p|_eps` constraint.
//! * [`SolverKind::Lalm`] is the classic relaxed constraint `p = |p| n`.
//! * [`SolverKind::RofAlm`] is the plain total-variation iteration with only
//!   `u`, `p` and `lambda2`.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use ndarray::{Array2, Zip};
use thiserror::Error;

use crate::grid::{div_backward, grad_forward, laplacian, GridError, ScalarGrid, VectorField};
use crate::model::{
    elastica_energy, norm_n, psnr, regularized_magnitude, relative_residual, IterationTrace,
    MetricError, ParamError, SolverParams, SolverState, TraceRecord,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("input image contains non-finite values")]
    NonFiniteInput,
    #[error("iteration {iter} produced non-finite values")]
    Diverged {
        iter: usize,
        /// Records of the iterations completed before the failure.
        trace: Box<IterationTrace>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ralm,
    Lalmn,
    Lalm,
    RofAlm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Ralm,
        SolverKind::Lalmn,
        SolverKind::Lalm,
        SolverKind::RofAlm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ralm => "ralm",
            SolverKind::Lalmn => "lalmn",
            SolverKind::Lalm => "lalm",
            SolverKind::RofAlm => "rof-alm",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown solver `{0}` (expected ralm, lalmn, lalm or rof-alm)")]
pub struct UnknownSolver(pub String);

impl FromStr for SolverKind {
    type Err = UnknownSolver;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ralm" => Ok(SolverKind::Ralm),
            "lalmn" => Ok(SolverKind::Lalmn),
            "lalm" => Ok(SolverKind::Lalm),
            "rof-alm" | "rof" | "rofalm" => Ok(SolverKind::RofAlm),
            _ => Err(UnknownSolver(s.to_string())),
        }
    }
}

/// Halts when the relative residual drops below `tol` or after `max_iter`
/// iterations, whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub tol: f64,
    pub max_iter: usize,
}

impl From<&SolverParams> for StopRule {
    fn from(params: &SolverParams) -> Self {
        Self {
            tol: params.tol,
            max_iter: params.max_iter,
        }
    }
}

/// Reduced iterate of the ROF augmented Lagrangian iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RofState {
    pub u: ScalarGrid,
    pub p: VectorField,
    pub lambda2: VectorField,
    pub iter: usize,
}

impl RofState {
    pub fn initial(f: &ScalarGrid) -> Self {
        let (rows, cols) = f.dim();
        let zero = VectorField::zeros(rows, cols).expect("f has valid dimensions");
        Self {
            u: f.clone(),
            p: zero.clone(),
            lambda2: zero,
            iter: 0,
        }
    }
}

/// Isotropic soft thresholding of a single 2-vector.
pub fn shrink_vector(x: [f64; 2], alpha: f64) -> [f64; 2] {
    let mag = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if mag == 0.0 {
        return [0.0, 0.0];
    }
    let scale = (mag - alpha).max(0.0) / mag;
    [x[0] * scale, x[1] * scale]
}

/// Per-pixel isotropic shrinkage `x / |x| * max(|x| - alpha, 0)`.
pub fn shrinkage(x: &VectorField, alpha: &ScalarGrid) -> Result<VectorField, GridError> {
    x.ensure_grid_dim(alpha)?;
    Ok(shrink_arrays(
        x.x().as_array(),
        x.y().as_array(),
        alpha.as_array(),
    ))
}

fn shrink_arrays(x: &Array2<f64>, y: &Array2<f64>, alpha: &Array2<f64>) -> VectorField {
    let mut ox = Array2::zeros(x.raw_dim());
    let mut oy = Array2::zeros(x.raw_dim());
    Zip::from(&mut ox)
        .and(&mut oy)
        .and(x)
        .and(y)
        .and(alpha)
        .for_each(|ox, oy, &x, &y, &a| {
            let [sx, sy] = shrink_vector([x, y], a);
            *ox = sx;
            *oy = sy;
        });
    field(ox, oy)
}

fn grid(a: Array2<f64>) -> ScalarGrid {
    ScalarGrid::from_raw(a)
}

fn field(x: Array2<f64>, y: Array2<f64>) -> VectorField {
    VectorField::new(grid(x), grid(y)).expect("components built with one shape")
}

fn check_shapes(state_dim: (usize, usize), f: &ScalarGrid) -> Result<(), GridError> {
    if state_dim != f.dim() {
        return Err(GridError::ShapeMismatch {
            expected: f.dim(),
            found: state_dim,
        });
    }
    Ok(())
}

/// Linearized `u` update shared by every solver.
fn update_u(
    u: &ScalarGrid,
    p: &VectorField,
    lambda2: &VectorField,
    f: &ScalarGrid,
    params: &SolverParams,
) -> ScalarGrid {
    let r2 = params.r2;
    let wx = Zip::from(p.x().as_array())
        .and(lambda2.x().as_array())
        .map_collect(|&p, &l| r2 * p + l);
    let wy = Zip::from(p.y().as_array())
        .and(lambda2.y().as_array())
        .map_collect(|&p, &l| r2 * p + l);
    let div = div_backward(&field(wx, wy));
    let lap = laplacian(u);
    let (lambda, delta1) = (params.lambda, params.delta1);
    let out = Zip::from(u.as_array())
        .and(f.as_array())
        .and(div.as_array())
        .and(lap.as_array())
        .map_collect(|&u, &f, &div, &lap| {
            // (u + delta1 g1) / (1 + delta1 lambda), written as an increment
            // so that a stationary u is reproduced exactly.
            let g1 = lambda * f - div + r2 * lap;
            u + delta1 * (g1 - lambda * u) / (1.0 + delta1 * lambda)
        });
    grid(out)
}

/// `p` update with the `n` terms cut off:
/// `shrinkage((r2 grad u - lambda2) / r2, c / r2)`.
fn update_p_cut(
    grad_u: &VectorField,
    lambda2: &VectorField,
    weight: &ScalarGrid,
    r2: f64,
) -> VectorField {
    let ax = Zip::from(grad_u.x().as_array())
        .and(lambda2.x().as_array())
        .map_collect(|&g, &l| (r2 * g - l) / r2);
    let ay = Zip::from(grad_u.y().as_array())
        .and(lambda2.y().as_array())
        .map_collect(|&g, &l| (r2 * g - l) / r2);
    let alpha = weight.as_array().mapv(|c| c / r2);
    shrink_arrays(&ax, &ay, &alpha)
}

/// `c = a + b h^2` per pixel.
fn length_weight(h: &ScalarGrid, params: &SolverParams) -> ScalarGrid {
    h.map(|&h| params.a + params.b * h * h)
}

/// Coupled `p` update of LALMn. Freezing `|p^k|_eps` in the `n = p/|p|`
/// penalty gives a quadratic with weight `w = r1 / |p^k|_eps^2 + r2`, so
/// `p = shrinkage([(r1 n + lambda1) / |p^k|_eps + r2 grad u - lambda2] / w, c / w)`.
fn update_p_lalmn(
    state: &SolverState,
    grad_u: &VectorField,
    weight: &ScalarGrid,
    params: &SolverParams,
) -> VectorField {
    let (r1, r2) = (params.r1, params.r2);
    let mag_eps = regularized_magnitude(&state.p, params.epsilon);
    let argument = |n: &ScalarGrid, l1: &ScalarGrid, g: &ScalarGrid, l2: &ScalarGrid| {
        let mut out = Array2::zeros(g.as_array().raw_dim());
        Zip::from(&mut out)
            .and(mag_eps.as_array())
            .and(n.as_array())
            .and(l1.as_array())
            .and(g.as_array())
            .and(l2.as_array())
            .for_each(|o, &m, &n, &l1, &g, &l2| {
                *o = ((r1 * n + l1) / m + r2 * g - l2) / (r1 / (m * m) + r2);
            });
        out
    };
    let ax = argument(state.n.x(), state.lambda1.x(), grad_u.x(), state.lambda2.x());
    let ay = argument(state.n.y(), state.lambda1.y(), grad_u.y(), state.lambda2.y());
    let alpha = Zip::from(weight.as_array())
        .and(mag_eps.as_array())
        .map_collect(|&c, &m| c / (r1 / (m * m) + r2));
    shrink_arrays(&ax, &ay, &alpha)
}

/// Coupled `p` update of the relaxed-constraint baseline. The coupling
/// `|p| n` is frozen at the previous iterate, which turns the subproblem
/// into `c|p| + (r1 + r2)/2 |p - q|^2` with
/// `q = (r1 |p^k| n^k + r2 grad u - lambda1 - lambda2) / (r1 + r2)`.
fn update_p_lalm(
    state: &SolverState,
    grad_u: &VectorField,
    weight: &ScalarGrid,
    params: &SolverParams,
) -> VectorField {
    let (r1, r2) = (params.r1, params.r2);
    let mag = state.p.magnitude();
    let q = |n: &ScalarGrid, l1: &ScalarGrid, l2: &ScalarGrid, g: &ScalarGrid| {
        let mut out = Array2::zeros(g.as_array().raw_dim());
        Zip::from(&mut out)
            .and(mag.as_array())
            .and(n.as_array())
            .and(l1.as_array())
            .and(l2.as_array())
            .and(g.as_array())
            .for_each(|o, &m, &n, &l1, &l2, &g| {
                *o = (r1 * m * n + r2 * g - l1 - l2) / (r1 + r2);
            });
        out
    };
    let ax = q(state.n.x(), state.lambda1.x(), state.lambda2.x(), grad_u.x());
    let ay = q(state.n.y(), state.lambda1.y(), state.lambda2.y(), grad_u.y());
    let alpha = weight.as_array().mapv(|c| c / (r1 + r2));
    shrink_arrays(&ax, &ay, &alpha)
}

/// Terms of the linearized `n` update shared by both constraints:
/// `gamma n^k - r3 grad h^k - grad lambda3^k + r3 grad(div n^k)`.
fn n_rhs_common(state: &SolverState, params: &SolverParams) -> (Array2<f64>, Array2<f64>) {
    let gh = grad_forward(&state.h);
    let gl3 = grad_forward(&state.lambda3);
    let gdiv = grad_forward(&div_backward(&state.n));
    let (gamma, r3) = (params.gamma, params.r3);
    let component = |n: &ScalarGrid, gh: &ScalarGrid, gl3: &ScalarGrid, gdiv: &ScalarGrid| {
        let mut out = Array2::zeros(n.as_array().raw_dim());
        Zip::from(&mut out)
            .and(n.as_array())
            .and(gh.as_array())
            .and(gl3.as_array())
            .and(gdiv.as_array())
            .for_each(|o, &n, &gh, &gl3, &gdiv| {
                *o = gamma * n - r3 * gh - gl3 + r3 * gdiv;
            });
        out
    };
    (
        component(state.n.x(), gh.x(), gl3.x(), gdiv.x()),
        component(state.n.y(), gh.y(), gl3.y(), gdiv.y()),
    )
}

/// `p / |p|_eps`.
fn normalized(p: &VectorField, epsilon: f64) -> VectorField {
    let mag = regularized_magnitude(p, epsilon);
    let nx = Zip::from(p.x().as_array())
        .and(mag.as_array())
        .map_collect(|&v, &m| v / m);
    let ny = Zip::from(p.y().as_array())
        .and(mag.as_array())
        .map_collect(|&v, &m| v / m);
    field(nx, ny)
}

/// `n` update for the `n = p / |p|_eps` constraint:
/// `n <- (n + delta2 g2) / (1 + delta2 (gamma + r1))`.
fn update_n_normalized(
    state: &SolverState,
    p_unit: &VectorField,
    params: &SolverParams,
) -> VectorField {
    let (rx, ry) = n_rhs_common(state, params);
    let (r1, delta2) = (params.r1, params.delta2);
    let denom = 1.0 + delta2 * (params.gamma + r1);
    let step = |n: &ScalarGrid, unit: &ScalarGrid, l1: &ScalarGrid, rhs: &Array2<f64>| {
        Zip::from(n.as_array())
            .and(unit.as_array())
            .and(l1.as_array())
            .and(rhs)
            .map_collect(|&n, &pu, &l1, &rhs| {
                let g2 = rhs + r1 * pu - l1;
                (n + delta2 * g2) / denom
            })
    };
    field(
        step(state.n.x(), p_unit.x(), state.lambda1.x(), &rx),
        step(state.n.y(), p_unit.y(), state.lambda1.y(), &ry),
    )
}

/// `n` update for the relaxed `p = |p| n` constraint. Linearizing the
/// `r3` penalty as in the other solvers and keeping the exact quadratic
/// `(r1/2) |p - |p| n|^2` with multiplier term `lambda1 . (p - |p| n)` gives
///
/// `(n - n^k)/delta2 + (gamma + r1 |p|^2) n
///     = gamma n^k + r1 |p| p + |p| lambda1 - r3 grad h - grad lambda3
///       + r3 grad(div n^k)`
///
/// with `p = p^{k+1}`, hence
/// `n <- (n^k + delta2 g2') / (1 + delta2 (gamma + r1 |p|^2))`.
fn update_n_relaxed(state: &SolverState, p: &VectorField, params: &SolverParams) -> VectorField {
    let (rx, ry) = n_rhs_common(state, params);
    let (r1, delta2, gamma) = (params.r1, params.delta2, params.gamma);
    let mag = p.magnitude();
    let step = |n: &ScalarGrid, p: &ScalarGrid, l1: &ScalarGrid, rhs: &Array2<f64>| {
        let mut out = Array2::zeros(rhs.raw_dim());
        Zip::from(&mut out)
            .and(n.as_array())
            .and(p.as_array())
            .and(l1.as_array())
            .and(mag.as_array())
            .and(rhs)
            .for_each(|o, &n, &p, &l1, &m, &rhs| {
                let g2 = rhs + r1 * m * p + m * l1;
                *o = (n + delta2 * g2) / (1.0 + delta2 * (gamma + r1 * m * m));
            });
        out
    };
    field(
        step(state.n.x(), p.x(), state.lambda1.x(), &rx),
        step(state.n.y(), p.y(), state.lambda1.y(), &ry),
    )
}

/// `h <- (r3 div n - lambda3) / (2 b |p| + r3)`.
fn update_h(
    div_n: &ScalarGrid,
    lambda3: &ScalarGrid,
    p: &VectorField,
    params: &SolverParams,
) -> ScalarGrid {
    let (b, r3) = (params.b, params.r3);
    let mag = p.magnitude();
    grid(
        Zip::from(div_n.as_array())
            .and(lambda3.as_array())
            .and(mag.as_array())
            .map_collect(|&d, &l3, &m| (r3 * d - l3) / (2.0 * b * m + r3)),
    )
}

/// `lambda += r * residual`, componentwise.
fn ascend_field(lambda: &VectorField, residual: &VectorField, r: f64) -> VectorField {
    let step = |l: &ScalarGrid, res: &ScalarGrid| {
        Zip::from(l.as_array())
            .and(res.as_array())
            .map_collect(|&l, &res| l + r * res)
    };
    field(step(lambda.x(), residual.x()), step(lambda.y(), residual.y()))
}

fn difference(a: &VectorField, b: &VectorField) -> VectorField {
    let sub = |a: &ScalarGrid, b: &ScalarGrid| {
        Zip::from(a.as_array())
            .and(b.as_array())
            .map_collect(|&a, &b| a - b)
    };
    field(sub(a.x(), b.x()), sub(a.y(), b.y()))
}

fn update_lambda3(
    lambda3: &ScalarGrid,
    h: &ScalarGrid,
    div_n: &ScalarGrid,
    r3: f64,
) -> ScalarGrid {
    grid(
        Zip::from(lambda3.as_array())
            .and(h.as_array())
            .and(div_n.as_array())
            .map_collect(|&l, &h, &d| l + r3 * (h - d)),
    )
}

#[derive(Clone, Copy)]
enum Coupling {
    Cut,
    Normalized,
    Relaxed,
}

fn elastica_step(
    state: &SolverState,
    f: &ScalarGrid,
    params: &SolverParams,
    coupling: Coupling,
) -> Result<SolverState, SolverError> {
    check_shapes(state.dim(), f)?;
    let u = update_u(&state.u, &state.p, &state.lambda2, f, params);
    let grad_u = grad_forward(&u);
    let weight = length_weight(&state.h, params);
    let p = match coupling {
        Coupling::Cut => update_p_cut(&grad_u, &state.lambda2, &weight, params.r2),
        Coupling::Normalized => update_p_lalmn(state, &grad_u, &weight, params),
        Coupling::Relaxed => update_p_lalm(state, &grad_u, &weight, params),
    };

    let (n, lambda1_residual) = match coupling {
        Coupling::Cut | Coupling::Normalized => {
            let p_unit = normalized(&p, params.epsilon);
            let n = update_n_normalized(state, &p_unit, params);
            let residual = difference(&n, &p_unit);
            (n, residual)
        }
        Coupling::Relaxed => {
            let n = update_n_relaxed(state, &p, params);
            let mag = p.magnitude();
            let scaled_n = field(
                Zip::from(mag.as_array())
                    .and(n.x().as_array())
                    .map_collect(|&m, &n| m * n),
                Zip::from(mag.as_array())
                    .and(n.y().as_array())
                    .map_collect(|&m, &n| m * n),
            );
            let residual = difference(&p, &scaled_n);
            (n, residual)
        }
    };

    let div_n = div_backward(&n);
    let h = update_h(&div_n, &state.lambda3, &p, params);
    let lambda1 = ascend_field(&state.lambda1, &lambda1_residual, params.r1);
    let lambda2 = ascend_field(&state.lambda2, &difference(&p, &grad_u), params.r2);
    let lambda3 = update_lambda3(&state.lambda3, &h, &div_n, params.r3);

    let next = SolverState {
        u,
        p,
        n,
        h,
        lambda1,
        lambda2,
        lambda3,
        iter: state.iter + 1,
    };
    if !next.is_finite() {
        return Err(SolverError::Diverged {
            iter: next.iter,
            trace: Box::default(),
        });
    }
    Ok(next)
}

/// One RALM iteration: the `p` subproblem ignores `n` entirely.
pub fn ralm_step(
    state: &SolverState,
    f: &ScalarGrid,
    params: &SolverParams,
) -> Result<SolverState, SolverError> {
    elastica_step(state, f, params, Coupling::Cut)
}

/// One LALMn iteration: `n = p / |p|_eps`, with `n` kept in the `p` update.
pub fn lalmn_step(
    state: &SolverState,
    f: &ScalarGrid,
    params: &SolverParams,
) -> Result<SolverState, SolverError> {
    elastica_step(state, f, params, Coupling::Normalized)
}

/// One iteration of the relaxed-constraint baseline (`p = |p| n`).
///
/// This is a reconstruction assembled from the relaxed augmented Lagrangian
/// with the same linearizations as RALM; see [`update_p_lalm`] and
/// [`update_n_relaxed`] for the closed forms.
pub fn lalm_step(
    state: &SolverState,
    f: &ScalarGrid,
    params: &SolverParams,
) -> Result<SolverState, SolverError> {
    elastica_step(state, f, params, Coupling::Relaxed)
}

/// Starting state of the relaxed-constraint baseline: as
/// [`SolverState::initial`] but with `n = grad f / |grad f|_eps`. The relaxed
/// penalty `|p - |p| n|^2` exerts no pull on `n` where `p = 0`, so the
/// starting normal field is part of the method rather than a detail.
pub fn lalm_initial(f: &ScalarGrid, epsilon: f64) -> SolverState {
    let mut state = SolverState::initial(f);
    state.n = normalized(&grad_forward(f), epsilon);
    state
}

/// One iteration of the ROF augmented Lagrangian method.
pub fn rof_alm_step(
    state: &RofState,
    f: &ScalarGrid,
    params: &SolverParams,
) -> Result<RofState, SolverError> {
    check_shapes(state.u.dim(), f)?;
    let u = update_u(&state.u, &state.p, &state.lambda2, f, params);
    let grad_u = grad_forward(&u);
    let (rows, cols) = u.dim();
    let weight = ScalarGrid::filled(rows, cols, params.a)?;
    let p = update_p_cut(&grad_u, &state.lambda2, &weight, params.r2);
    let lambda2 = ascend_field(&state.lambda2, &difference(&p, &grad_u), params.r2);
    let next = RofState {
        u,
        p,
        lambda2,
        iter: state.iter + 1,
    };
    if !(next.u.is_finite() && next.p.is_finite() && next.lambda2.is_finite()) {
        return Err(SolverError::Diverged {
            iter: next.iter,
            trace: Box::default(),
        });
    }
    Ok(next)
}

/// Any solver's iterate. Only a couple are alive at a time, so the size gap
/// between variants is not worth a box.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Iterate {
    Full(SolverKind, SolverState),
    Rof(RofState),
}

impl Iterate {
    /// The starting iterate `run` uses for `kind`.
    pub fn initial(kind: SolverKind, f: &ScalarGrid, params: &SolverParams) -> Self {
        match kind {
            SolverKind::RofAlm => Iterate::Rof(RofState::initial(f)),
            SolverKind::Lalm => Iterate::Full(kind, lalm_initial(f, params.epsilon)),
            kind => Iterate::Full(kind, SolverState::initial(f)),
        }
    }

    pub fn u(&self) -> &ScalarGrid {
        match self {
            Iterate::Full(_, s) => &s.u,
            Iterate::Rof(s) => &s.u,
        }
    }

    pub fn iter(&self) -> usize {
        match self {
            Iterate::Full(_, s) => s.iter,
            Iterate::Rof(s) => s.iter,
        }
    }

    /// Mean magnitude of `n`; zero for the ROF iteration, which has no `n`.
    pub fn norm_n(&self) -> f64 {
        match self {
            Iterate::Full(_, s) => norm_n(&s.n),
            Iterate::Rof(_) => 0.0,
        }
    }

    pub fn step(&self, f: &ScalarGrid, params: &SolverParams) -> Result<Self, SolverError> {
        Ok(match self {
            Iterate::Full(kind, s) => {
                let next = match kind {
                    SolverKind::Ralm => ralm_step(s, f, params)?,
                    SolverKind::Lalmn => lalmn_step(s, f, params)?,
                    SolverKind::Lalm => lalm_step(s, f, params)?,
                    SolverKind::RofAlm => unreachable!("ROF iterates use the reduced state"),
                };
                Iterate::Full(*kind, next)
            }
            Iterate::Rof(s) => Iterate::Rof(rof_alm_step(s, f, params)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub u: ScalarGrid,
    pub trace: IterationTrace,
    pub last: Iterate,
}

fn residual_or_limit(curr: &ScalarGrid, prev: &ScalarGrid) -> Result<f64, GridError> {
    match relative_residual(curr, prev) {
        Ok(r) => Ok(r),
        // An all-zero previous iterate: stationary if nothing moved.
        Err(MetricError::ZeroNorm) => Ok(if curr.l2_norm() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }),
        Err(MetricError::Grid(e)) => Err(e),
        Err(other) => unreachable!("relative_residual only fails on norms: {other}"),
    }
}

/// Wall-clock timer. `wasm32-unknown-unknown` has no clock, so runs there
/// report a zero duration.
#[cfg(not(target_arch = "wasm32"))]
fn stopwatch() -> impl Fn() -> Duration {
    let started = std::time::Instant::now();
    move || started.elapsed()
}

#[cfg(target_arch = "wasm32")]
fn stopwatch() -> impl Fn() -> Duration {
    || Duration::ZERO
}

/// Runs `kind` from [`Iterate::initial`] until `stop` fires, recording
/// energy, PSNR (against `reference`, NaN without one), relative residual
/// and the mean magnitude of `n` after every iteration.
pub fn run(
    f: &ScalarGrid,
    kind: SolverKind,
    params: &SolverParams,
    stop: StopRule,
    reference: Option<&ScalarGrid>,
) -> Result<RunOutput, SolverError> {
    params.validate()?;
    if !f.is_finite() {
        return Err(SolverError::NonFiniteInput);
    }
    if let Some(r) = reference {
        check_shapes(r.dim(), f)?;
    }
    let elapsed = stopwatch();
    let mut trace = IterationTrace::default();
    let mut current = Iterate::initial(kind, f, params);
    while current.iter() < stop.max_iter {
        let next = match current.step(f, params) {
            Ok(next) => next,
            Err(SolverError::Diverged { iter, .. }) => {
                trace.elapsed = elapsed();
                return Err(SolverError::Diverged {
                    iter,
                    trace: Box::new(trace),
                });
            }
            Err(e) => return Err(e),
        };
        let residual = residual_or_limit(next.u(), current.u())?;
        let energy = elastica_energy(next.u(), f, params)?;
        let psnr = match reference {
            Some(r) => psnr(r, next.u()).map_err(|e| match e {
                MetricError::Grid(g) => SolverError::Grid(g),
                other => unreachable!("psnr only fails on shapes: {other}"),
            })?,
            None => f64::NAN,
        };
        trace.records.push(TraceRecord {
            iter: next.iter(),
            energy,
            psnr,
            residual,
            norm_n: next.norm_n(),
        });
        current = next;
        if residual < stop.tol {
            break;
        }
    }
    trace.elapsed = elapsed();
    Ok(RunOutput {
        u: current.u().clone(),
        trace,
        last: current,
    })
}
