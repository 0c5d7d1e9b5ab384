//! Browser bindings: generate a noisy rings image, denoise it with any of
//! the solvers, and check the b = 0 reduction to the ROF iteration.

use elastica_core::imgio::{format_trace, quantize};
use elastica_core::synth::{add_gaussian_noise, make_rings, NoiseSpec, RingSpec};
use elastica_core::{psnr, run, RunOutput, ScalarGrid, SolverKind, SolverParams, StopRule};
use wasm_bindgen::prelude::*;

/// Largest image side the page accepts; keeps a run interactive.
pub const MAX_SIZE: usize = 512;

/// Grayscale `[0, 1]` values as canvas RGBA bytes.
pub fn to_rgba(u: &ScalarGrid) -> Vec<u8> {
    u.iter()
        .flat_map(|&v| {
            let g = quantize(v);
            [g, g, g, 255]
        })
        .collect()
}

/// A clean rings image and its noisy copy.
#[wasm_bindgen]
pub struct Scene {
    clean: ScalarGrid,
    noisy: ScalarGrid,
}

/// The outcome of one solver run.
#[wasm_bindgen]
pub struct Denoised {
    rgba: Vec<u8>,
    trace: String,
    iterations: usize,
    psnr: f64,
    norm_n: f64,
}

#[wasm_bindgen]
impl Denoised {
    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// Per-iteration CSV trace.
    #[wasm_bindgen(getter)]
    pub fn trace(&self) -> String {
        self.trace.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn psnr(&self) -> f64 {
        self.psnr
    }

    #[wasm_bindgen(getter, js_name = normN)]
    pub fn norm_n(&self) -> f64 {
        self.norm_n
    }
}

impl Scene {
    pub fn build(size: usize, variance: f64, seed: u64) -> Result<Scene, String> {
        if size == 0 || size > MAX_SIZE {
            return Err(format!("size must be between 1 and {MAX_SIZE}"));
        }
        let clean = make_rings(&RingSpec::default_sized(size, size)).map_err(|e| e.to_string())?;
        let noisy =
            add_gaussian_noise(&clean, &NoiseSpec { variance, seed }).map_err(|e| e.to_string())?;
        Ok(Scene { clean, noisy })
    }

    pub fn solve(
        &self,
        solver: &str,
        params: &SolverParams,
    ) -> Result<(RunOutput, f64), String> {
        let kind: SolverKind = solver.parse().map_err(|e| format!("{e}"))?;
        let out = run(&self.noisy, kind, params, StopRule::from(params), Some(&self.clean))
            .map_err(|e| e.to_string())?;
        let quality = psnr(&self.clean, &out.u).map_err(|e| e.to_string())?;
        Ok((out, quality))
    }

    /// Runs RALM at b = 0 for several r1 and the ROF iteration, and LALMn for
    /// the same r1, then reports whether each family's final images agree.
    pub fn b0_report(&self, max_iter: usize) -> Result<String, String> {
        let base = SolverParams { b: 0.0, max_iter, ..SolverParams::default() };
        let r1s = [50.0, 500.0, 5000.0];
        let rof = self.solve("rof-alm", &base)?.0.u;
        let mut lines = Vec::new();
        for kind in ["ralm", "lalmn"] {
            let finals = r1s
                .iter()
                .map(|&r1| self.solve(kind, &SolverParams { r1, ..base }).map(|r| r.0.u))
                .collect::<Result<Vec<_>, _>>()?;
            let spread = finals
                .iter()
                .map(|u| relative_gap(u, &finals[0]))
                .fold(0.0, f64::max);
            let same = finals.iter().all(|u| bits(u) == bits(&finals[0]));
            lines.push(format!(
                "{kind}: identical across r1 50/500/5000: {} (largest relative gap {spread:.3e})",
                if same { "yes" } else { "no" }
            ));
            if kind == "ralm" {
                lines.push(format!(
                    "ralm equals the ROF iteration: {}",
                    if bits(&finals[0]) == bits(&rof) { "yes" } else { "no" }
                ));
            }
        }
        Ok(lines.join("\n"))
    }
}

fn bits(u: &ScalarGrid) -> Vec<u64> {
    u.iter().map(|v| v.to_bits()).collect()
}

fn relative_gap(a: &ScalarGrid, b: &ScalarGrid) -> f64 {
    let diff: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    diff.sqrt() / b.l2_norm()
}

#[wasm_bindgen]
impl Scene {
    /// Default rings image of side `size` with seeded Gaussian noise.
    #[wasm_bindgen(constructor)]
    pub fn new(size: usize, variance: f64, seed: u32) -> Result<Scene, JsError> {
        Scene::build(size, variance, u64::from(seed)).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.clean.rows()
    }

    #[wasm_bindgen(js_name = cleanRgba)]
    pub fn clean_rgba(&self) -> Vec<u8> {
        to_rgba(&self.clean)
    }

    #[wasm_bindgen(js_name = noisyRgba)]
    pub fn noisy_rgba(&self) -> Vec<u8> {
        to_rgba(&self.noisy)
    }

    #[wasm_bindgen(js_name = noisyPsnr)]
    pub fn noisy_psnr(&self) -> f64 {
        psnr(&self.clean, &self.noisy).unwrap_or(f64::NAN)
    }

    /// Denoises the noisy image. Unlisted weights keep their defaults.
    #[allow(clippy::too_many_arguments)]
    pub fn denoise(
        &self,
        solver: &str,
        a: f64,
        b: f64,
        lambda: f64,
        r1: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<Denoised, JsError> {
        let params = SolverParams { a, b, lambda, r1, tol, max_iter, ..SolverParams::default() };
        let (out, quality) = self.solve(solver, &params).map_err(|e| JsError::new(&e))?;
        Ok(Denoised {
            rgba: to_rgba(&out.u),
            trace: format_trace(&out.trace),
            iterations: out.last.iter(),
            psnr: quality,
            norm_n: out.last.norm_n(),
        })
    }

    /// Text report of the b = 0 experiment.
    #[wasm_bindgen(js_name = b0Check)]
    pub fn b0_check(&self, max_iter: usize) -> Result<String, JsError> {
        self.b0_report(max_iter).map_err(|e| JsError::new(&e))
    }
}
