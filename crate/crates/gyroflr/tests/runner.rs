use gyroflr::runner::{self, artifacts, load_config, Model, RunConfig};
use gyroflr::{par, Error};
use std::path::Path;

const SMALL: &str = r#"
model = "eps"
eps = 0.2
t_final = 0.2
dt = 0.05

[grid]
n_x1 = 8
n_x2 = 8
n_k = 16
k_max = 20.0
n_alpha = 8

[initial]
delta = 0.1
modes = [[1, 0]]

[diagnostics]
every = 2
snapshot_every = 2
"#;

fn config(text: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_toml_str(text, out).unwrap();
    cfg.output = out.to_path_buf();
    cfg
}

#[test]
fn minimal_config_takes_documented_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "model = \"limit-g\"\n").unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.model, Model::LimitG);
    assert_eq!((cfg.grid.n_x1, cfg.grid.n_x2, cfg.grid.n_k, cfg.grid.n_alpha), (32, 32, 16, 32));
    assert_eq!(cfg.grid.k_max, 20.0);
    assert_eq!((cfg.eps, cfg.t_final, cfg.dt), (0.1, 1.0, None));
    assert_eq!(cfg.initial.delta, 0.1);
    assert_eq!(cfg.initial.modes, vec![[1, 0]]);
    assert!(cfg.background.auto_normalize);
    assert_eq!(cfg.diagnostics.lp, 3.0);
    assert_eq!(cfg.sweep.eps, vec![0.2, 0.1, 0.05, 0.025]);
    assert_eq!(cfg.time_steps(), (0.05, 20));
    // the rescale makes the grid mass match int n_e = (2 pi)^2
    assert!((cfg.normalization - 1.0).abs() < 0.1);
}

#[test]
fn unknown_keys_and_bad_values_name_the_field() {
    let base = Path::new(".");
    let err = RunConfig::from_toml_str("bogus = 1\n", base).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
    let err = RunConfig::from_toml_str("eps = -0.1\n", base).unwrap_err();
    assert!(matches!(err, Error::Config { ref field, .. } if field == "eps"), "{err}");
    let err = RunConfig::from_toml_str("[grid]\nn_alpha = 8\nn_tau = 4\n", base).unwrap_err();
    assert!(matches!(err, Error::Config { ref field, .. } if field == "grid.n_tau"));
    let err = RunConfig::from_toml_str("[grid]\nk_max = 5.0\n", base).unwrap_err();
    assert!(matches!(err, Error::Cutoff { .. }));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn incompatible_background_without_normalization_fails() {
    let err = RunConfig::from_toml_str("[background]\nvalue = 1.0\nauto_normalize = false\n", Path::new(".")).unwrap_err();
    assert!(matches!(err, Error::Compatibility { .. }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn tabulated_background_is_read_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let row = vec!["1.0"; 8].join(",");
    let table = vec![row; 8].join("\n");
    std::fs::write(dir.path().join("ne.csv"), format!("# uniform\n{table}\n")).unwrap();
    let text = format!("{SMALL}\n[background]\nkind = \"file\"\npath = \"ne.csv\"\n");
    std::fs::write(dir.path().join("c.toml"), text).unwrap();
    let cfg = load_config(dir.path().join("c.toml")).unwrap();
    assert_eq!(cfg.n_e, vec![1.0; 64]);

    std::fs::write(dir.path().join("ne.csv"), "1,2,3\n").unwrap();
    let err = load_config(dir.path().join("c.toml")).unwrap_err();
    assert!(matches!(err, Error::Config { ref field, .. } if field == "background.path"));
}

#[test]
fn eps_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(SMALL, dir.path());
    let out = runner::run(&cfg).unwrap();
    assert_eq!(out.steps, 4);
    let header = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "time,mass,l2_norm,lp_norm,field_energy,min_f,kslice_mass_drift_max");
    assert_eq!(out.diagnostics.len(), 3);
    assert!(out.conservation.mass_drift < 1e-8);

    let meta: runner::Metadata = artifacts::read_json(&dir.path().join("metadata.json")).unwrap();
    assert!(!meta.partial && meta.error.is_none());
    assert_eq!(meta.steps_completed, 4);
    assert!(meta.version.starts_with('v'));

    let snap: artifacts::SnapshotMeta = artifacts::read_json(&dir.path().join("f_000004.json")).unwrap();
    assert_eq!(snap.axes, vec!["x1", "x2", "k", "alpha"]);
    assert_eq!(snap.shape, vec![8, 8, 16, 8]);
    assert_eq!(snap.model, "eps");
    let data = artifacts::read_snapshot(&dir.path().join("f_000004.bin")).unwrap();
    assert_eq!(data.len(), 8 * 8 * 16 * 8);
    assert!(dir.path().join("field_000002.bin").exists());

    let report = runner::diag(dir.path()).unwrap();
    assert_eq!(report.samples, 3);
}

#[test]
fn limit_runs_write_artifacts() {
    for model in [Model::LimitG, Model::TwoScale] {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(SMALL, dir.path());
        cfg.model = model;
        let out = runner::run(&cfg).unwrap();
        assert_eq!(out.steps, 4);
        assert!(out.conservation.mass_drift < 1e-8);
        if model == Model::LimitG {
            assert!(out.conservation.kslice_mass_drift_max < 1e-12);
            assert!(dir.path().join("g_000004.bin").exists());
        } else {
            assert!(dir.path().join("G_000004.bin").exists());
        }
    }
}

#[test]
fn static_preset_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("delta = 0.1", "delta = 0.0");
    for model in [Model::Eps, Model::LimitG, Model::TwoScale] {
        let mut cfg = config(&text, dir.path());
        cfg.model = model;
        let out = runner::run(&cfg).unwrap();
        let c = out.conservation;
        assert!(c.mass_drift < 1e-10 && c.l2_drift < 1e-10 && c.kslice_mass_drift_max < 1e-10, "{model:?} {c:?}");
        assert!(out.diagnostics.iter().all(|r| r.field_energy < 1e-20));
    }
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != artifacts::TIMING_FILE)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn single_thread_runs_are_bit_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut ca = config(SMALL, a.path());
    let mut cb = config(SMALL, a.path());
    ca.output = a.path().to_path_buf();
    cb.output = b.path().to_path_buf();
    par::with_threads(1, || runner::run(&ca)).unwrap();
    par::with_threads(1, || runner::run(&cb)).unwrap();
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    // metadata echoes the output directory, everything else must match byte for byte
    assert_eq!(fa.len(), fb.len());
    for ((na, da), (nb, db)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        if na != artifacts::METADATA_FILE {
            assert!(da == db, "{na} differs");
        }
    }
}

#[test]
fn thread_count_does_not_change_diagnostics() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ca = config(SMALL, a.path());
    let cb = config(SMALL, b.path());
    let ra = par::with_threads(1, || runner::run(&ca)).unwrap();
    let rb = par::with_threads(3, || runner::run(&cb)).unwrap();
    for (x, y) in ra.diagnostics.iter().zip(&rb.diagnostics) {
        for (p, q) in [(x.mass, y.mass), (x.l2_norm, y.l2_norm), (x.lp_norm, y.lp_norm), (x.field_energy, y.field_energy), (x.min_f, y.min_f)] {
            assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
        }
    }
}

#[test]
fn scales_need_the_physical_block() {
    let cfg = RunConfig::from_toml_str(SMALL, Path::new(".")).unwrap();
    assert!(matches!(runner::scales(&cfg), Err(Error::Config { ref field, .. }) if field == "physical"));
    let text = format!(
        "{SMALL}\n[physical]\ne = 1.0\nm_i = 1.0\nb_bar = 2.0\nv_bar = 1.0\nlambda_d = 0.5\nl_parallel = 50.0\nn_bar = 1.0\nepsilon_0 = 1.0\n"
    );
    let cfg = RunConfig::from_toml_str(&text, Path::new(".")).unwrap();
    let s = runner::scales(&cfg).unwrap();
    assert_eq!(s.omega_i, 2.0);
}

#[test]
fn sweep_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("t_final = 0.2", "t_final = 0.1");
    let cfg = config(&text, dir.path());
    let report = runner::sweep(&cfg, Some(&[0.2, 0.1]), "sweep").unwrap();
    assert_eq!(report.rows.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(artifacts::read_sweep(dir.path()).unwrap().eps_values, vec![0.2, 0.1]);
    assert!(runner::sweep(&cfg, Some(&[]), "sweep").is_err());
}
