use floquet_landscape::experiment::{run, write_outputs, Experiment, RunConfig, RunOutput};
use floquet_landscape::sweep::Workers;
use floquet_landscape::Error;

fn small(exp: Experiment) -> RunConfig {
    let overrides: &[&str] = match exp {
        Experiment::Hn => &["n=30", "r_count=7"],
        Experiment::CdtMono => &["a_count=41", "a_stop=6", "truncation=4", "steps_per_period=1000"],
        Experiment::CdtDuo => &[
            "a_count=3",
            "b_count=3",
            "truncation1=2",
            "truncation2=2",
            "n_periods=3",
            "steps_per_period=1000",
            "trajectory_stride=10",
        ],
        Experiment::Aah => &["n=21", "omega_count=5", "truncation=2"],
        Experiment::Ssh => &["n_cells=8"],
        Experiment::Bbh => &["n_x=3", "n_y=3"],
        Experiment::Bounds => &["dim=12"],
    };
    let mut cfg = RunConfig::defaults(exp);
    for o in overrides {
        cfg.apply_override(o).unwrap();
    }
    cfg
}

const ALL: [Experiment; 7] = [
    Experiment::Hn,
    Experiment::CdtMono,
    Experiment::CdtDuo,
    Experiment::Aah,
    Experiment::Ssh,
    Experiment::Bbh,
    Experiment::Bounds,
];

fn run_small(exp: Experiment, workers: Workers) -> RunOutput {
    run(&small(exp), workers).unwrap_or_else(|e| panic!("{exp}: {e}"))
}

#[test]
fn every_experiment_produces_a_valid_report() {
    for exp in ALL {
        let out = run_small(exp, Workers(None));
        out.report.validate().unwrap();
        assert!(out.report.grid_size() > 0, "{exp}");
        assert_eq!(out.report.summary["norm_bound_violations"], 0.0, "{exp}");
        assert!(out.report.summary["norm_bound_solves"] > 0.0, "{exp}");
    }
}

#[test]
fn worker_count_does_not_change_results() {
    for exp in [Experiment::Hn, Experiment::CdtMono, Experiment::Ssh] {
        let seq = run_small(exp, Workers::sequential());
        let par = run_small(exp, Workers(Some(3)));
        assert_eq!(seq.report.to_json().unwrap(), par.report.to_json().unwrap(), "{exp}");
        assert_eq!(seq.tables, par.tables, "{exp}");
    }
}

#[test]
fn manifest_reproduces_outputs_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(Experiment::CdtMono);
    let first = dir.path().join("first");
    let out = run(&cfg, Workers(None)).unwrap();
    let manifest = write_outputs(&first, &cfg, &out, Workers(None), 0.0).unwrap();

    let text = std::fs::read_to_string(first.join("manifest.json")).unwrap();
    let again = RunConfig::load(Experiment::CdtMono, Some(&first.join("manifest.json")), &[]).unwrap();
    assert_eq!(again.to_json(), cfg.to_json());
    assert!(text.contains("\"experiment\": \"cdt-mono\""));

    let second = dir.path().join("second");
    let out2 = run(&again, Workers::sequential()).unwrap();
    write_outputs(&second, &again, &out2, Workers::sequential(), 0.0).unwrap();
    for name in &manifest.outputs {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}

#[test]
fn hatano_nelson_landscape_tracks_the_skin_effect() {
    let out = run_small(Experiment::Hn, Workers(None));
    let soft = out.report.column("soft_com").unwrap();
    // Left-leaning for r < 1, right-leaning for r > 1.
    let middle = 15.5;
    assert!(soft[0] < middle && soft[soft.len() - 1] > middle);
    assert!(soft.windows(2).all(|w| w[1] > w[0]));
    assert!(out.report.summary["pearson"] > 0.95);
}

#[test]
fn ssh_variants_have_expected_midgap_counts() {
    let out = run_small(Experiment::Ssh, Workers(None));
    let labels = out.report.axes[0].labels.clone().unwrap();
    let n_mid = out.report.column("n_midgap").unwrap();
    let expected = |l: &str| match l {
        "topological" => 2.0,
        "trivial" => 0.0,
        "domain_wall" => 1.0,
        other => panic!("unexpected variant {other}"),
    };
    for (l, &n) in labels.iter().zip(n_mid) {
        assert_eq!(n, expected(l), "{l}");
    }
}

#[test]
fn invalid_values_are_config_errors() {
    let mut cfg = RunConfig::defaults(Experiment::Hn);
    assert!(matches!(cfg.apply_override("nonsense=1"), Err(Error::Config { .. })));
    assert!(matches!(cfg.apply_override("n=abc"), Err(Error::Config { .. })));
    cfg.apply_override("r_count=0").unwrap();
    assert!(matches!(cfg.validate(), Err(Error::Config { .. })));

    let mut bounds = RunConfig::defaults(Experiment::Bounds);
    bounds.apply_override("model=\"nope\"").unwrap();
    assert!(matches!(run(&bounds, Workers(None)), Err(Error::Config { .. })));
}

#[test]
fn bounds_models_keep_the_norm_chain() {
    for model in ["random_pd", "random", "hatano_nelson", "diagonal", "anderson", "ssh", "bbh", "two_level"] {
        let mut cfg = small(Experiment::Bounds);
        cfg.apply_override(&format!("model=\"{model}\"")).unwrap();
        let out = run(&cfg, Workers(None)).unwrap();
        let names = out.report.axes[0].labels.clone().unwrap();
        let pass = out.report.column("pass").unwrap();
        for (n, &p) in names.iter().zip(pass) {
            if n.starts_with("norm_bound") || n == "hermitian_reduction" || n == "diagonal_saturation" {
                assert_eq!(p, 1.0, "{model}: {n}");
            }
        }
    }
}
