use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use elastica_core::imgio::{load_image, load_trace, save_image, ImageFormat};
use elastica_core::ScalarGrid;
use tempfile::TempDir;

fn elastica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica"))
        .args(args)
        .output()
        .expect("spawn elastica")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write_constant(path: &Path, rows: usize, cols: usize, v: f64) {
    let g = ScalarGrid::filled(rows, cols, v).unwrap();
    save_image(&g, path, ImageFormat::PgmBinary).unwrap();
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    for run in ["a", "b"] {
        let out = elastica(&[
            "synth",
            "--size",
            "48",
            "--seed",
            "42",
            "--clean",
            &p(&dir, &format!("clean-{run}.pgm")),
            "--noisy",
            &p(&dir, &format!("noisy-{run}.pgm")),
        ]);
        assert!(out.status.success(), "{out:?}");
        assert!(stdout(&out).starts_with("rings 48x48 variance 0.01 seed 42"));
    }
    for stem in ["clean", "noisy"] {
        let a = fs::read(p(&dir, &format!("{stem}-a.pgm"))).unwrap();
        let b = fs::read(p(&dir, &format!("{stem}-b.pgm"))).unwrap();
        assert_eq!(a, b, "{stem}");
    }
    let noisy = load_image(p(&dir, "noisy-a.pgm")).unwrap();
    assert_eq!(noisy.dim(), (48, 48));
}

#[test]
fn synth_default_size_and_zero_variance() {
    let dir = TempDir::new().unwrap();
    let out = elastica(&[
        "synth",
        "--variance",
        "0",
        "--clean",
        &p(&dir, "c.png"),
        "--noisy",
        &p(&dir, "n.png"),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(fs::read(p(&dir, "c.png")).unwrap(), fs::read(p(&dir, "n.png")).unwrap());
    assert_eq!(load_image(p(&dir, "c.png")).unwrap().dim(), (512, 512));
}

#[test]
fn metrics_prints_labeled_lines() {
    let dir = TempDir::new().unwrap();
    write_constant(&dir.path().join("one.pgm"), 4, 5, 1.0);
    write_constant(&dir.path().join("nine.pgm"), 4, 5, 0.9);

    let same = elastica(&["metrics", &p(&dir, "one.pgm"), &p(&dir, "one.pgm")]);
    assert!(same.status.success());
    assert_eq!(stdout(&same), "PSNR inf\nNRMSE undefined\nNMAD 0.00000\n");

    // 0.9 is stored as 230/255, so the file pair is 25/255 apart, not 0.1.
    let diff = elastica(&["metrics", &p(&dir, "one.pgm"), &p(&dir, "nine.pgm")]);
    assert!(diff.status.success());
    let text = stdout(&diff);
    let want = 20.0 * (255.0f64 / 25.0).log10();
    assert_eq!(text.lines().next().unwrap(), format!("PSNR {want:.4}"));
    assert!(text.contains("NMAD 0.0980392"));
}

#[test]
fn metrics_rejects_mismatched_shapes() {
    let dir = TempDir::new().unwrap();
    write_constant(&dir.path().join("a.pgm"), 4, 5, 1.0);
    write_constant(&dir.path().join("b.pgm"), 5, 4, 1.0);
    let out = elastica(&["metrics", &p(&dir, "a.pgm"), &p(&dir, "b.pgm")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_iterations_copy_the_input() {
    let dir = TempDir::new().unwrap();
    let synth = elastica(&[
        "synth",
        "--size",
        "32",
        "--clean",
        &p(&dir, "c.pgm"),
        "--noisy",
        &p(&dir, "n.pgm"),
    ]);
    assert!(synth.status.success());
    let out = elastica(&[
        "denoise",
        "--input",
        &p(&dir, "n.pgm"),
        "--max-iter",
        "0",
        "--output",
        &p(&dir, "out.pgm"),
        "--trace",
        &p(&dir, "t.csv"),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("solver ralm iter 0 "));
    assert_eq!(fs::read(p(&dir, "n.pgm")).unwrap(), fs::read(p(&dir, "out.pgm")).unwrap());
    assert!(load_trace(p(&dir, "t.csv")).unwrap().is_empty());
}

#[test]
fn missing_input_is_an_io_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = elastica(&[
        "denoise",
        "--input",
        &p(&dir, "absent.pgm"),
        "--output",
        &p(&dir, "out.pgm"),
        "--trace",
        &p(&dir, "t.csv"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.pgm"));
    assert!(!dir.path().join("out.pgm").exists());
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn invalid_settings_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let out_path = p(&dir, "out.pgm");
    let cases: [&[&str]; 4] = [
        &["denoise", "--rings", "--size", "8", "--lambda", "-1", "--output", &out_path],
        &["denoise", "--rings", "--size", "8", "--output", "out.bmp"],
        &["denoise", "--size", "8", "--output", &out_path],
        &["denoise", "--rings", "--lambda", "abc", "--output", &out_path],
    ];
    for args in cases {
        let out = elastica(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(!dir.path().join("out.pgm").exists());
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# small run\nrings = true\nsize = 24\nmax_iter = 3\nseed = 5\noutput = {}\n",
            p(&dir, "from-file.pgm")
        ),
    )
    .unwrap();
    let out = elastica(&["denoise", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("solver ralm iter 3 "));
    assert!(dir.path().join("from-file.pgm").exists());

    let out = elastica(&[
        "denoise",
        "--config",
        cfg.to_str().unwrap(),
        "--max-iter",
        "2",
        "--output",
        &p(&dir, "from-flag.pgm"),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("solver ralm iter 2 "));
    assert!(dir.path().join("from-flag.pgm").exists());

    fs::write(&cfg, "speed = 3\n").unwrap();
    let out = elastica(&["denoise", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_has_its_own_exit_code_and_keeps_the_trace() {
    let dir = TempDir::new().unwrap();
    let out = elastica(&[
        "denoise",
        "--rings",
        "--size",
        "16",
        "--lambda",
        "1e-300",
        "--delta1",
        "1e300",
        "--output",
        &p(&dir, "out.pgm"),
        "--trace",
        &p(&dir, "t.csv"),
    ]);
    assert_eq!(out.status.code(), Some(4), "{out:?}");
    assert!(!dir.path().join("out.pgm").exists());
    assert!(load_trace(p(&dir, "t.csv")).is_ok());
}

#[test]
fn b0_preset_reports_r1_dependence() {
    let dir = TempDir::new().unwrap();
    let out = elastica(&[
        "compare",
        "--preset",
        "b0-consistency",
        "--size",
        "32",
        "--max-iter",
        "60",
        "--out-dir",
        &p(&dir, ""),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("ralm identical across r1: yes"), "{text}");
    assert!(text.contains("lalmn identical across r1: no"), "{text}");
    let csvs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 6);
}

#[test]
fn single_cell_compare_matches_denoise() {
    let dir = TempDir::new().unwrap();
    let shared = ["--rings", "--size", "24", "--seed", "3", "--max-iter", "12"];
    let mut denoise = vec!["denoise", "--solver", "lalmn"];
    denoise.extend(shared);
    let (out_img, out_csv) = (p(&dir, "d.pgm"), p(&dir, "d.csv"));
    denoise.extend(["--output", &out_img, "--trace", &out_csv]);
    assert!(elastica(&denoise).status.success());

    let cells = p(&dir, "cells");
    let mut compare = vec!["compare", "--cell", "solver=lalmn", "--format", "pgm"];
    compare.extend(shared);
    compare.extend(["--out-dir", &cells]);
    let out = elastica(&compare);
    assert!(out.status.success(), "{out:?}");
    let cell_dir = Path::new(&cells);
    assert_eq!(
        fs::read(cell_dir.join("cell00-lalmn.csv")).unwrap(),
        fs::read(&out_csv).unwrap()
    );
    assert_eq!(
        fs::read(cell_dir.join("cell00-lalmn.pgm")).unwrap(),
        fs::read(&out_img).unwrap()
    );
}

#[test]
fn constant_input_is_a_fixed_point_for_every_solver() {
    let dir = TempDir::new().unwrap();
    write_constant(&dir.path().join("flat.pgm"), 10, 12, 0.4);
    let out = elastica(&[
        "compare",
        "--input",
        &p(&dir, "flat.pgm"),
        "--cell",
        "solver=ralm",
        "--cell",
        "solver=lalmn",
        "--cell",
        "solver=lalm",
        "--cell",
        "solver=rof-alm",
        "--max-iter",
        "5",
        "--format",
        "pgm",
        "--out-dir",
        &p(&dir, "cells"),
    ]);
    assert!(out.status.success(), "{out:?}");
    let cells = dir.path().join("cells");
    let input = fs::read(dir.path().join("flat.pgm")).unwrap();
    for (idx, kind) in ["ralm", "lalmn", "lalm", "rof-alm"].iter().enumerate() {
        let img = fs::read(cells.join(format!("cell{idx:02}-{kind}.pgm"))).unwrap();
        assert_eq!(img, input, "{kind}");
    }
}

#[test]
fn usage_errors_exit_with_the_config_code() {
    assert_eq!(elastica(&["denoise", "--bogus"]).status.code(), Some(2));
    assert_eq!(elastica(&[]).status.code(), Some(2));
}
