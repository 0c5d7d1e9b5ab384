//! Straight-line reference for one elastica step on a 2x2 grid.
//!
//! Written from the update formulas alone with plain arrays; it shares no
//! code with the library beyond the types used to hand results back.

#![allow(dead_code)]

use elastica_core::{ScalarGrid, SolverParams, SolverState, VectorField};

pub type G = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy)]
pub struct OracleState {
    pub u: G,
    pub p: (G, G),
    pub n: (G, G),
    pub h: G,
    pub l1: (G, G),
    pub l2: (G, G),
    pub l3: G,
}

fn gx(u: &G) -> G {
    [[u[1][0] - u[0][0], u[1][1] - u[0][1]], [0.0, 0.0]]
}

fn gy(u: &G) -> G {
    [[u[0][1] - u[0][0], 0.0], [u[1][1] - u[1][0], 0.0]]
}

fn div(vx: &G, vy: &G) -> G {
    // First index keeps the value, last index negates the previous one.
    [
        [vx[0][0] + vy[0][0], vx[0][1] - vy[0][0]],
        [-vx[0][0] + vy[1][0], -vx[0][1] - vy[1][0]],
    ]
}

fn each(f: impl Fn(usize, usize) -> f64) -> G {
    [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
}

fn shrink(x: f64, y: f64, alpha: f64) -> (f64, f64) {
    let m = (x * x + y * y).sqrt();
    if m <= alpha || m == 0.0 {
        (0.0, 0.0)
    } else {
        let s = (m - alpha) / m;
        (x * s, y * s)
    }
}

/// `true` for the coupled p-update of the normalized-constraint method.
pub fn step(s: &OracleState, f: &G, prm: &SolverParams, coupled: bool) -> OracleState {
    let SolverParams {
        a,
        b,
        lambda,
        r1,
        r2,
        r3,
        gamma,
        delta1,
        delta2,
        epsilon,
        ..
    } = *prm;

    // u
    let lap = div(&gx(&s.u), &gy(&s.u));
    let wx = each(|i, j| r2 * s.p.0[i][j] + s.l2.0[i][j]);
    let wy = each(|i, j| r2 * s.p.1[i][j] + s.l2.1[i][j]);
    let dw = div(&wx, &wy);
    let g1 = each(|i, j| lambda * f[i][j] - dw[i][j] + r2 * lap[i][j]);
    let u = each(|i, j| (s.u[i][j] + delta1 * g1[i][j]) / (1.0 + delta1 * lambda));

    // p
    let (ux, uy) = (gx(&u), gy(&u));
    let mut px = [[0.0; 2]; 2];
    let mut py = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let c = a + b * s.h[i][j] * s.h[i][j];
            let (qx, qy, t) = if coupled {
                let m = (s.p.0[i][j].powi(2) + s.p.1[i][j].powi(2)).sqrt() + epsilon;
                let w = r1 / (m * m) + r2;
                (
                    ((r1 * s.n.0[i][j] + s.l1.0[i][j]) / m + r2 * ux[i][j] - s.l2.0[i][j]) / w,
                    ((r1 * s.n.1[i][j] + s.l1.1[i][j]) / m + r2 * uy[i][j] - s.l2.1[i][j]) / w,
                    c / w,
                )
            } else {
                (
                    (r2 * ux[i][j] - s.l2.0[i][j]) / r2,
                    (r2 * uy[i][j] - s.l2.1[i][j]) / r2,
                    c / r2,
                )
            };
            (px[i][j], py[i][j]) = shrink(qx, qy, t);
        }
    }
    let pmag = each(|i, j| (px[i][j].powi(2) + py[i][j].powi(2)).sqrt());
    let pnx = each(|i, j| px[i][j] / (pmag[i][j] + epsilon));
    let pny = each(|i, j| py[i][j] / (pmag[i][j] + epsilon));

    // n
    let (hx, hy) = (gx(&s.h), gy(&s.h));
    let (l3x, l3y) = (gx(&s.l3), gy(&s.l3));
    let dn = div(&s.n.0, &s.n.1);
    let (dnx, dny) = (gx(&dn), gy(&dn));
    let g2x = each(|i, j| {
        gamma * s.n.0[i][j] + r1 * pnx[i][j] - s.l1.0[i][j] - r3 * hx[i][j] - l3x[i][j]
            + r3 * dnx[i][j]
    });
    let g2y = each(|i, j| {
        gamma * s.n.1[i][j] + r1 * pny[i][j] - s.l1.1[i][j] - r3 * hy[i][j] - l3y[i][j]
            + r3 * dny[i][j]
    });
    let den = 1.0 + delta2 * (gamma + r1);
    let nx = each(|i, j| (s.n.0[i][j] + delta2 * g2x[i][j]) / den);
    let ny = each(|i, j| (s.n.1[i][j] + delta2 * g2y[i][j]) / den);

    // h
    let dn1 = div(&nx, &ny);
    let h = each(|i, j| (r3 * dn1[i][j] - s.l3[i][j]) / (2.0 * b * pmag[i][j] + r3));

    // multipliers
    OracleState {
        u,
        p: (px, py),
        n: (nx, ny),
        h,
        l1: (
            each(|i, j| s.l1.0[i][j] + r1 * (nx[i][j] - pnx[i][j])),
            each(|i, j| s.l1.1[i][j] + r1 * (ny[i][j] - pny[i][j])),
        ),
        l2: (
            each(|i, j| s.l2.0[i][j] + r2 * (px[i][j] - ux[i][j])),
            each(|i, j| s.l2.1[i][j] + r2 * (py[i][j] - uy[i][j])),
        ),
        l3: each(|i, j| s.l3[i][j] + r3 * (h[i][j] - dn1[i][j])),
    }
}

/// A state with every component populated and a mix of shrunk and kept
/// pixels in the first p-update.
pub fn fixture() -> (OracleState, G) {
    let s = OracleState {
        u: [[0.31, 1.42], [0.87, -0.18]],
        p: ([[0.5, -0.2], [0.0, 0.0]], [[0.3, 0.0], [-0.6, 0.0]]),
        n: ([[0.7, -0.4], [0.1, 0.0]], [[0.2, 0.5], [-0.9, 0.0]]),
        h: [[0.8, -1.3], [2.1, 0.4]],
        l1: ([[0.05, -0.12], [0.3, 0.0]], [[-0.07, 0.2], [0.01, 0.0]]),
        l2: ([[0.11, -0.25], [0.4, 0.0]], [[0.09, 0.0], [-0.33, 0.0]]),
        l3: [[0.2, -0.1], [0.05, 0.3]],
    };
    let f = [[0.2, 0.9], [0.6, 0.1]];
    (s, f)
}

pub fn params() -> SolverParams {
    SolverParams {
        a: 1.0,
        b: 0.1,
        lambda: 11.0,
        r1: 50.0,
        r2: 3.0,
        r3: 2.0,
        gamma: 1e-5,
        delta1: 1e-2,
        delta2: 1e-2,
        ..SolverParams::default()
    }
}

fn grid(g: &G) -> ScalarGrid {
    ScalarGrid::from_vec(2, 2, vec![g[0][0], g[0][1], g[1][0], g[1][1]]).unwrap()
}

fn field(v: &(G, G)) -> VectorField {
    VectorField::new(grid(&v.0), grid(&v.1)).unwrap()
}

pub fn to_state(s: &OracleState) -> SolverState {
    SolverState {
        u: grid(&s.u),
        p: field(&s.p),
        n: field(&s.n),
        h: grid(&s.h),
        lambda1: field(&s.l1),
        lambda2: field(&s.l2),
        lambda3: grid(&s.l3),
        iter: 0,
    }
}

pub fn to_grid(g: &G) -> ScalarGrid {
    grid(g)
}

/// Largest per-entry relative error over every state component, with the
/// scale floored at 1 so entries that are zero compare absolutely.
pub fn max_relative_error(got: &SolverState, want: &OracleState) -> f64 {
    let want = to_state(want);
    let pairs: [(&ScalarGrid, &ScalarGrid); 11] = [
        (&got.u, &want.u),
        (got.p.x(), want.p.x()),
        (got.p.y(), want.p.y()),
        (got.n.x(), want.n.x()),
        (got.n.y(), want.n.y()),
        (&got.h, &want.h),
        (got.lambda1.x(), want.lambda1.x()),
        (got.lambda1.y(), want.lambda1.y()),
        (got.lambda2.x(), want.lambda2.x()),
        (got.lambda2.y(), want.lambda2.y()),
        (&got.lambda3, &want.lambda3),
    ];
    pairs
        .iter()
        .flat_map(|(g, w)| g.iter().zip(w.iter()).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)))
        .fold(0.0, f64::max)
}
