use std::path::Path;
use std::process::Command;

use kirchpore_cli::{execute, Cli, CliError, RunConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kirchpore"));
    c.env_remove(kirchpore_cli::config::OUT_DIR_ENV);
    c
}

fn golden() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/table_row1.toml"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_config_fills_defaults() {
    let cfg = RunConfig::from_toml("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert!(cfg.violations().is_empty(), "{:?}", cfg.violations());
    let p = cfg.problem().unwrap();
    assert_eq!(p.time.steps, 10);
    assert_eq!(p.mesh.num_cells(), 64);
}

#[test]
fn invalid_van_genuchten_exponent_is_reported_with_its_key() {
    let cfg = RunConfig::from_toml("[van_genuchten]\nalpha = 1.0\nn = 0.9\n").unwrap();
    let errs = cfg.violations();
    assert!(errs.iter().any(|e| e.starts_with("van_genuchten.n") && e.contains("> 1")), "{errs:?}");
}

#[test]
fn unknown_keys_and_type_mismatches_are_rejected() {
    let e = RunConfig::from_toml("[material]\nmu = 1.0\nshear = 2.0\n").unwrap_err();
    assert!(e.to_string().contains("shear"), "{e}");
    let e = RunConfig::from_toml("[mesh]\nnx = \"eight\"\nny = 8\n").unwrap_err();
    assert!(e.to_string().contains("mesh.nx"), "{e}");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn violations_are_aggregated() {
    let text = "[material]\nmu = -1.0\nphi0 = 2.0\n[time]\nt_end = 10.0\nsteps = 10\n[solver]\nmonitors = true\n";
    let errs = RunConfig::from_toml(text).unwrap().violations();
    for key in ["material.mu", "material.phi0", "time.steps"] {
        assert!(errs.iter().any(|e| e.starts_with(key)), "{key} missing from {errs:?}");
    }
}

#[test]
fn golden_table_row_reports_the_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["check-conditions", "--config"])
        .arg(golden())
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("s_min = 0.26"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("conditions.csv")).unwrap();
    assert!(csv.starts_with("# kirchpore_version="));
    assert!(csv.contains("# config_sha256="));
}

#[test]
fn declared_range_below_minimum_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(golden()).unwrap().replace("s_floor = 0.3", "s_floor = 0.1");
    let cfg = write(dir.path(), "c.toml", &text);
    let status = bin()
        .arg("check-conditions")
        .arg("-c")
        .arg(&cfg)
        .arg("-o")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn zero_data_run_succeeds_with_zero_states() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.toml", "scenario = \"zero_data\"\n[mesh]\nnx = 3\nny = 3\n[time]\nsteps = 2\n");
    let status = bin().arg("run").arg("-c").arg(&cfg).arg("-o").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let cells = std::fs::read_to_string(dir.path().join("state_000002_cells.csv")).unwrap();
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(cells.as_bytes());
    for r in rows.records() {
        let r = r.unwrap();
        assert_eq!(r[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn outputs_are_deterministic_and_restart_is_exact() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let text = "[mesh]\nnx = 5\nny = 5\n[time]\nsteps = 6\n[output]\ncheckpoint_every = 3\n";
    let cfg = write(a.path(), "d.toml", text);
    for d in [a.path(), b.path()] {
        let status = bin().arg("run").arg("-c").arg(&cfg).arg("-o").arg(d).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for f in ["steps.csv", "energy_summary.csv", "state_000006_cells.csv", "state_000006_nodes.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    // restart from step 3 into the second directory
    let status = bin()
        .args(["run", "--restart", "3", "-c"])
        .arg(&cfg)
        .arg("-o")
        .arg(b.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["state_000006_cells.csv", "state_000006_nodes.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[van_genuchten]\nalpha = 1.0\nn = 0.9\n");
    let code = |args: &[&str], cfg: &Path| {
        bin().args(args).arg("-c").arg(cfg).arg("-o").arg(dir.path()).status().unwrap().code()
    };
    assert_eq!(code(&["run"], &bad), Some(2));
    let stuck = write(
        dir.path(),
        "stuck.toml",
        "[mesh]\nnx = 4\nny = 4\n[time]\nsteps = 8\n[solver]\nmax_iters = 1\nl_scheme_fallback = false\ntol_abs = 1e-14\ntol_rel = 0.0\n",
    );
    assert_eq!(code(&["run"], &stuck), Some(3));
    let strict = write(
        dir.path(),
        "strict.toml",
        "[terzaghi]\ncells = 8\nsteps = 20\nrefinements = 0\nmax_error = 1e-6\n",
    );
    assert_eq!(code(&["terzaghi"], &strict), Some(4));
    let loose = write(dir.path(), "loose.toml", "[terzaghi]\ncells = 8\nsteps = 20\nmax_error = 0.5\n");
    assert_eq!(code(&["terzaghi"], &loose), Some(0));
    assert_eq!(code(&["mesh-stats"], &loose), Some(0));
}

#[test]
fn custom_loads_and_boundaries_apply() {
    let text = r#"
scenario = "zero_data"
[mesh]
nx = 4
ny = 4
[time]
steps = 3
[boundary.mech]
top = "free"
[boundary.flow]
bottom = "neumann"
[loads]
ramp_time = 0.1
traction = { top = [0.0, -1.0] }
outflux = { bottom = 0.1 }
[initial]
pressure = -0.2
"#;
    let cfg = RunConfig::from_toml(text).unwrap();
    assert!(cfg.violations().is_empty(), "{:?}", cfg.violations());
    let p = cfg.problem().unwrap();
    assert!(p.sources.traction.is_some() && p.sources.boundary_outflux.is_some());
    let chi0 = (p.chi0)(0.3, 0.3);
    assert!(chi0 < 0.0 && chi0 > -0.2);
    let dir = tempfile::tempdir().unwrap();
    let cli = Cli {
        config: Some(write(dir.path(), "l.toml", text)),
        out: Some(dir.path().to_path_buf()),
        command: kirchpore_cli::Command::Run { restart: None },
    };
    let o = execute(&cli).unwrap();
    assert!(o.lines[0].starts_with("3 steps"));
}

#[test]
fn sweep_and_mms_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = \"drainage_incompressible\"\n[mesh]\nnx = 4\nny = 4\n[time]\nsteps = 8\n\
                [sweep]\nparam = \"zeta\"\nladder = [1e-2, 1e-3, 1e-4]\n[mms]\nlevels = [4, 8]\nbranches = [\"unsaturated\"]\nmin_order = 0.5\n";
    let cfg = write(dir.path(), "s.toml", text);
    let run = |cmd| Cli {
        config: Some(cfg.clone()),
        out: Some(dir.path().to_path_buf()),
        command: cmd,
    };
    let o = execute(&run(kirchpore_cli::Command::Sweep { param: None })).unwrap();
    assert!(o.lines.last().unwrap().starts_with("cauchy:"));
    let table = std::fs::read_to_string(dir.path().join("sweep_zeta.csv")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("h,tau,zeta,eta,chi_difference")));
    match execute(&run(kirchpore_cli::Command::Mms)) {
        Ok(_) | Err(CliError::Acceptance(_)) => {}
        Err(e) => panic!("{e}"),
    }
    assert!(dir.path().join("mms_unsaturated.csv").exists());
}
