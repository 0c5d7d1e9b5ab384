use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use elastica_core::imgio::{load_image, save_image, save_trace, ImageFormat};
use elastica_core::solvers::{Iterate, SolverError};
use elastica_core::synth::{add_gaussian_noise, make_rings, NoiseSpec, RingSpec};
use elastica_core::{
    elastica_energy, nmad, nrmse, psnr, run, IterationTrace, RunOutput, ScalarGrid, SolverKind,
    SolverParams, StopRule,
};

use crate::args::{
    CompareArgs, DenoiseArgs, FormatArg, MetricsArgs, NoiseArgs, ParamArgs, Preset, RingArgs,
    SourceArgs, SynthArgs,
};
use crate::config::{apply_param, parse_list, parse_value, FileConfig};
use crate::{sig6, CliError};

const DEFAULT_RING_SIZE: usize = 512;
const DEFAULT_VARIANCE: f64 = 0.01;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Io(format!("stdout: {e}"))
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    path.map_or_else(|| Ok(FileConfig::default()), FileConfig::load)
}

pub fn resolve_params(flags: &ParamArgs, file: &FileConfig) -> Result<SolverParams, CliError> {
    let mut params = SolverParams::default();
    file.apply_params(&mut params)?;
    for (key, value) in flags.given() {
        apply_param(&mut params, key, &value)?;
    }
    params.validate().map_err(config_err)?;
    Ok(params)
}

pub fn resolve_rings(flags: &RingArgs, file: &FileConfig) -> Result<RingSpec, CliError> {
    let size = file.pick(flags.size, "size")?.unwrap_or(DEFAULT_RING_SIZE);
    let mut spec = RingSpec::default_sized(size, size);
    if let Some(radii) = file.pick(flags.radii.clone(), "radii")? {
        spec.radii = parse_list("radii", &radii)?;
    }
    if let Some(levels) = file.pick(flags.intensities.clone(), "intensities")? {
        spec.intensities = parse_list("intensities", &levels)?;
    }
    if let Some(center) = file.pick(flags.center.clone(), "center")? {
        match parse_list("center", &center)?[..] {
            [row, col] => spec.center = (row, col),
            _ => return Err(config_err("center must be `row,col`")),
        }
    }
    spec.validate().map_err(config_err)?;
    Ok(spec)
}

fn resolve_noise(
    flags: &NoiseArgs,
    file: &FileConfig,
    default_variance: Option<f64>,
) -> Result<Option<NoiseSpec>, CliError> {
    let variance = file.pick(flags.variance, "variance")?.or(default_variance);
    let seed = file.pick(flags.seed, "seed")?.unwrap_or(0);
    Ok(variance.map(|variance| NoiseSpec { variance, seed }))
}

fn resolve_format(
    flag: Option<FormatArg>,
    file: &FileConfig,
    path: &Path,
) -> Result<ImageFormat, CliError> {
    if let Some(f) = flag {
        return Ok(f.into());
    }
    if let Some(name) = file.raw("format") {
        return FormatArg::from_str(name, true)
            .map(Into::into)
            .map_err(|_| config_err(format!("unknown format `{name}` (pgm, pgm-ascii, png)")));
    }
    ImageFormat::from_path(path).ok_or_else(|| {
        config_err(format!(
            "cannot infer the image format of {}; pass --format",
            path.display()
        ))
    })
}

/// The solver input and, when known, the clean image it is scored against.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub input: ScalarGrid,
    pub reference: Option<ScalarGrid>,
}

pub fn prepare_source(
    src: &SourceArgs,
    file: &FileConfig,
    rings_by_default: bool,
) -> Result<Prepared, CliError> {
    let input_path: Option<PathBuf> = file.pick(src.input.clone(), "input")?;
    let rings_flag = src.rings || file.get::<bool>("rings")?.unwrap_or(false);
    let rings = rings_flag || (input_path.is_none() && rings_by_default);
    let (clean, default_variance) = match (&input_path, rings) {
        (Some(_), true) => return Err(config_err("--input and --rings are mutually exclusive")),
        (None, false) => return Err(config_err("an input is required: --input PATH or --rings")),
        (Some(path), false) => (load_image(path)?, None),
        (None, true) => {
            let spec = resolve_rings(&src.ring, file)?;
            (make_rings(&spec).map_err(config_err)?, Some(DEFAULT_VARIANCE))
        }
    };
    let input = match resolve_noise(&src.noise, file, default_variance)? {
        Some(noise) => add_gaussian_noise(&clean, &noise).map_err(config_err)?,
        None => clean.clone(),
    };
    let reference_path: Option<PathBuf> = file.pick(src.reference.clone(), "reference")?;
    let reference = match reference_path {
        Some(path) => Some(load_image(path)?),
        None if rings => Some(clean),
        None => None,
    };
    if let Some(r) = &reference {
        if r.dim() != input.dim() {
            return Err(config_err(format!(
                "reference is {:?} but the input is {:?}",
                r.dim(),
                input.dim()
            )));
        }
    }
    Ok(Prepared { input, reference })
}

/// Final-iterate numbers printed after a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub iter: usize,
    pub energy: f64,
    pub psnr: Option<f64>,
    pub nrmse: Option<f64>,
    pub nmad: Option<f64>,
}

impl Summary {
    pub fn of(
        out: &RunOutput,
        f: &ScalarGrid,
        reference: Option<&ScalarGrid>,
        params: &SolverParams,
    ) -> Result<Self, CliError> {
        let energy = match out.trace.last() {
            Some(r) => r.energy,
            None => elastica_energy(&out.u, f, params).map_err(config_err)?,
        };
        Ok(Self {
            iter: out.last.iter(),
            energy,
            psnr: reference.and_then(|r| psnr(r, &out.u).ok()),
            nrmse: reference.and_then(|r| nrmse(r, &out.u).ok()),
            nmad: reference.and_then(|r| nmad(r, &out.u).ok()),
        })
    }

    fn field(v: Option<f64>) -> String {
        v.map_or_else(|| "n/a".to_string(), sig6)
    }

    pub fn line(&self) -> String {
        format!(
            "iter {} energy {} psnr {} nrmse {} nmad {}",
            self.iter,
            sig6(self.energy),
            Self::field(self.psnr),
            Self::field(self.nrmse),
            Self::field(self.nmad)
        )
    }
}

/// Writes the partial trace of a diverged run, if a path was requested.
fn keep_partial_trace(err: SolverError, trace_path: Option<&Path>) -> CliError {
    if let (SolverError::Diverged { trace, .. }, Some(path)) = (&err, trace_path) {
        if let Err(e) = save_trace(trace, path) {
            return e.into();
        }
    }
    err.into()
}

pub fn cmd_denoise(args: &DenoiseArgs, out: &mut dyn Write) -> Result<Summary, CliError> {
    let file = load_config(args.config.as_deref())?;
    let params = resolve_params(&args.params, &file)?;
    let kind: SolverKind = file.pick(args.solver, "solver")?.unwrap_or(SolverKind::Ralm);
    let output: PathBuf = file
        .pick(args.output.clone(), "output")?
        .ok_or_else(|| config_err("--output is required"))?;
    let format = resolve_format(args.format, &file, &output)?;
    let trace_path: Option<PathBuf> = file.pick(args.trace.clone(), "trace")?;
    let prepared = prepare_source(&args.source, &file, false)?;
    if let Some(path) = &args.save_input {
        save_image(&prepared.input, path, format)?;
    }

    let result = run(
        &prepared.input,
        kind,
        &params,
        StopRule::from(&params),
        prepared.reference.as_ref(),
    );
    let result = result.map_err(|e| keep_partial_trace(e, trace_path.as_deref()))?;
    save_image(&result.u, &output, format)?;
    if let Some(path) = &trace_path {
        save_trace(&result.trace, path)?;
    }
    let summary = Summary::of(&result, &prepared.input, prepared.reference.as_ref(), &params)?;
    writeln!(out, "solver {kind} {}", summary.line()).map_err(out_err)?;
    Ok(summary)
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let file = load_config(args.config.as_deref())?;
    let spec = resolve_rings(&args.ring, &file)?;
    let noise = resolve_noise(&args.noise, &file, Some(DEFAULT_VARIANCE))?
        .expect("a default variance is supplied");
    let clean_format = resolve_format(args.format, &file, &args.clean)?;
    let noisy_format = resolve_format(args.format, &file, &args.noisy)?;
    let clean = make_rings(&spec).map_err(config_err)?;
    let noisy = add_gaussian_noise(&clean, &noise).map_err(config_err)?;
    save_image(&clean, &args.clean, clean_format)?;
    save_image(&noisy, &args.noisy, noisy_format)?;
    writeln!(
        out,
        "rings {}x{} variance {} seed {} noisy psnr {}",
        spec.rows,
        spec.cols,
        noise.variance,
        noise.seed,
        sig6(psnr(&clean, &noisy).map_err(config_err)?)
    )
    .map_err(out_err)
}

pub fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let reference = load_image(&args.reference)?;
    let test = load_image(&args.test)?;
    if reference.dim() != test.dim() {
        return Err(config_err(format!(
            "reference is {:?} but the test image is {:?}",
            reference.dim(),
            test.dim()
        )));
    }
    let value = |r: Result<f64, _>| r.map_or_else(|_| "undefined".to_string(), sig6);
    writeln!(out, "PSNR {}", value(psnr(&reference, &test))).map_err(out_err)?;
    writeln!(out, "NRMSE {}", value(nrmse(&reference, &test))).map_err(out_err)?;
    writeln!(out, "NMAD {}", value(nmad(&reference, &test))).map_err(out_err)
}

/// One run of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub label: String,
    pub kind: SolverKind,
    pub params: SolverParams,
}

pub const B0_R1_VALUES: [f64; 3] = [50.0, 500.0, 5000.0];

fn preset_cells(preset: Preset, base: &SolverParams) -> Vec<Cell> {
    match preset {
        Preset::B0Consistency => [SolverKind::Ralm, SolverKind::Lalmn]
            .into_iter()
            .flat_map(|kind| {
                B0_R1_VALUES.into_iter().map(move |r1| Cell {
                    label: format!("{kind} b=0 r1={r1}"),
                    kind,
                    params: SolverParams { b: 0.0, r1, ..*base },
                })
            })
            .collect(),
    }
}

/// Parses `solver=lalmn,r1=500` on top of `base`.
pub fn parse_cell(text: &str, base: &SolverParams, kind: SolverKind) -> Result<Cell, CliError> {
    let mut cell = Cell {
        label: text.to_string(),
        kind,
        params: *base,
    };
    for pair in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| config_err(format!("cell entry `{pair}` is not key=value")))?;
        if key.trim() == "solver" {
            cell.kind = parse_value("solver", value)?;
        } else {
            apply_param(&mut cell.params, key, value)?;
        }
    }
    cell.params.validate().map_err(config_err)?;
    Ok(cell)
}

fn same_trace(a: &IterationTrace, b: &IterationTrace) -> bool {
    a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(x, y)| {
            x.iter == y.iter
                && [
                    (x.energy, y.energy),
                    (x.psnr, y.psnr),
                    (x.residual, y.residual),
                ]
                .iter()
                .all(|(p, q)| p.to_bits() == q.to_bits())
        })
}

/// Bitwise equality of the `(u, p, lambda2)` outcome and the trace. The
/// `norm_n` column is ignored: n carries r1 even when u does not.
pub fn same_run(a: &RunOutput, b: &RunOutput) -> bool {
    let uv = match (&a.last, &b.last) {
        (Iterate::Full(_, x), Iterate::Full(_, y)) => {
            x.u == y.u && x.p == y.p && x.lambda2 == y.lambda2
        }
        (Iterate::Rof(x), Iterate::Rof(y)) => x == y,
        _ => a.u == b.u,
    };
    uv && same_trace(&a.trace, &b.trace)
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut file = load_config(args.config.as_deref())?;
    if args.preset == Some(Preset::B0Consistency) {
        file = file
            .with_default("size", "64")
            .with_default("tol", "1e-6")
            .with_default("max-iter", "500");
    }
    let base = resolve_params(&args.params, &file)?;
    let default_kind: SolverKind = file.pick(args.solver, "solver")?.unwrap_or(SolverKind::Ralm);
    let mut cells = args.preset.map_or_else(Vec::new, |p| preset_cells(p, &base));
    for text in &args.cells {
        cells.push(parse_cell(text, &base, default_kind)?);
    }
    if cells.is_empty() {
        cells.push(Cell {
            label: default_kind.to_string(),
            kind: default_kind,
            params: base,
        });
    }
    let format = match &args.out_dir {
        Some(dir) => Some(resolve_format(args.format, &file, &dir.join("x.pgm"))?),
        None => None,
    };
    let prepared = prepare_source(&args.source, &file, true)?;

    let results: Vec<Result<RunOutput, SolverError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|cell| {
                let prepared = &prepared;
                scope.spawn(move || {
                    run(
                        &prepared.input,
                        cell.kind,
                        &cell.params,
                        StopRule::from(&cell.params),
                        prepared.reference.as_ref(),
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver threads do not panic"))
            .collect()
    });

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    writeln!(out, "cell solver iter energy psnr residual norm_n label").map_err(out_err)?;
    let mut diverged = Vec::new();
    for (idx, (cell, result)) in cells.iter().zip(&results).enumerate() {
        let stem = format!("cell{idx:02}-{}", cell.kind);
        let trace = match result {
            Ok(r) => &r.trace,
            Err(SolverError::Diverged { trace, .. }) => trace.as_ref(),
            Err(e) => return Err(config_err(format!("cell {idx}: {e}"))),
        };
        if let Some(dir) = &args.out_dir {
            save_trace(trace, dir.join(format!("{stem}.csv")))?;
            if let (Ok(r), Some(format)) = (result, format) {
                let ext = if format == ImageFormat::Png { "png" } else { "pgm" };
                save_image(&r.u, dir.join(format!("{stem}.{ext}")), format)?;
            }
        }
        match result {
            Ok(r) => {
                let last = r.trace.last();
                let pick = |f: fn(&elastica_core::TraceRecord) -> f64| last.map_or(f64::NAN, f);
                writeln!(
                    out,
                    "{idx} {} {} {} {} {} {} {}",
                    cell.kind,
                    r.last.iter(),
                    sig6(pick(|t| t.energy)),
                    sig6(pick(|t| t.psnr)),
                    sig6(pick(|t| t.residual)),
                    sig6(pick(|t| t.norm_n)),
                    cell.label
                )
                .map_err(out_err)?;
            }
            Err(e) => {
                writeln!(out, "{idx} {} {e} {}", cell.kind, cell.label).map_err(out_err)?;
                diverged.push(idx);
            }
        }
    }

    if args.preset == Some(Preset::B0Consistency) {
        for kind in [SolverKind::Ralm, SolverKind::Lalmn] {
            let runs: Vec<&RunOutput> = cells
                .iter()
                .zip(&results)
                .filter(|(c, _)| c.kind == kind)
                .filter_map(|(_, r)| r.as_ref().ok())
                .collect();
            let identical = runs.len() == B0_R1_VALUES.len()
                && runs.windows(2).all(|w| same_run(w[0], w[1]));
            writeln!(
                out,
                "{kind} identical across r1: {}",
                if identical { "yes" } else { "no" }
            )
            .map_err(out_err)?;
        }
    }

    if diverged.is_empty() {
        Ok(())
    } else {
        Err(CliError::Diverged(format!("cells {diverged:?} produced non-finite values")))
    }
}
