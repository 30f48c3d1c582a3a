use super::{flag, BoundTally, Experiment, RunConfig, RunOutput};
use crate::diagnostics::{
    default_midgap_window, midgap_report_with, Axis, Cell, CsvTable, MidgapReport, SweepReport,
};
use crate::error::{Error, Result};
use crate::landscape::{solve_landscape, LandscapeResult};
use crate::linalg::{eigvals_hermitian, Operator};
use crate::models::{bbh, bbh_geometry, ssh, Geometry, SshConfig, SshVariant};
use crate::sweep::{try_map_ordered, Workers};

struct Case {
    name: String,
    h: Operator,
    geometry: Geometry,
    wall: Option<usize>,
}

struct Outcome {
    land: LandscapeResult,
    report: MidgapReport,
    /// Peaks matched against modes, tallest first.
    peaks: Vec<usize>,
    /// For each localized mode: (nearest matched peak, distance).
    nearest: Vec<(usize, i64)>,
}

fn analyse(case: &Case, rcond: f64) -> Result<Outcome> {
    let window = default_midgap_window(&eigvals_hermitian(&case.h)?)?;
    let report = midgap_report_with(&case.h, window, &case.geometry, rcond)?;
    let land = solve_landscape(&case.h, rcond)?;
    let peaks: Vec<usize> = report
        .landscape_peaks
        .iter()
        .copied()
        .take(report.modes.len())
        .collect();
    let nearest = report
        .localized
        .iter()
        .map(|m| {
            peaks
                .iter()
                .map(|&p| (p, case.geometry.distance(m.argmax, p)))
                .min_by_key(|&(_, d)| d)
                .unwrap_or((report.landscape_argmax, i64::MAX))
        })
        .collect();
    Ok(Outcome {
        land,
        report,
        peaks,
        nearest,
    })
}

fn cases(cfg: &RunConfig) -> Result<Vec<Case>> {
    match cfg.experiment {
        Experiment::Ssh => {
            let (weak, strong) = (cfg.float("t_weak"), cfg.float("t_strong"));
            cfg.string("variants")
                .split(',')
                .map(|v| {
                    let variant: SshVariant = v.trim().parse()?;
                    let (t_intra, t_inter) = match variant {
                        SshVariant::Trivial => (strong, weak),
                        _ => (weak, strong),
                    };
                    let sc = SshConfig {
                        variant,
                        n_cells: cfg.usize("n_cells"),
                        t_intra,
                        t_inter,
                    };
                    let h = ssh(&sc)?;
                    Ok(Case {
                        name: variant.to_string(),
                        geometry: Geometry::Chain { sites: h.dim() },
                        h,
                        wall: sc.wall_site(),
                    })
                })
                .collect()
        }
        Experiment::Bbh => {
            let (nx, ny) = (cfg.usize("n_x"), cfg.usize("n_y"));
            Ok(vec![Case {
                name: "bbh".into(),
                h: bbh(nx, ny, cfg.float("gamma"), cfg.float("lambda"))?,
                geometry: bbh_geometry(nx, ny),
                wall: None,
            }])
        }
        other => Err(Error::config(format!("`{other}` is not a topology experiment"))),
    }
}

/// Midgap modes versus landscape peaks for SSH chains or the BBH lattice.
pub fn run_topology(cfg: &RunConfig, workers: Workers) -> Result<RunOutput> {
    let rcond = cfg.float("rcond");
    let reach = cfg.int("colocalization_sites");
    let cases = cases(cfg)?;
    let outcomes = try_map_ordered(&cases, workers, |c| analyse(c, rcond))?;

    let mut tally = BoundTally::default();
    outcomes.iter().for_each(|o| tally.record(&o.land));
    let col = |f: &dyn Fn(&Outcome) -> f64| outcomes.iter().map(f).collect::<Vec<f64>>();
    let max_distance = |o: &Outcome| o.nearest.iter().map(|&(_, d)| d).max().unwrap_or(0);

    let names: Vec<String> = cases.iter().map(|c| c.name.clone()).collect();
    let mut report = SweepReport::new(cfg.experiment.to_string(), vec![Axis::categorical("case", names)]);
    report.push_column("n_sites", cases.iter().map(|c| c.h.dim() as f64).collect());
    report.push_column("sigma_min", col(&|o| o.land.sigma_min));
    report.push_column("midgap_window", col(&|o| o.report.window));
    report.push_column("n_midgap", col(&|o| o.report.modes.len() as f64));
    report.push_column("n_landscape_peaks", col(&|o| o.report.landscape_peaks.len() as f64));
    report.push_column("landscape_argmax", col(&|o| (o.report.landscape_argmax + 1) as f64));
    report.push_column("max_mode_peak_distance", col(&|o| max_distance(o) as f64));
    report.push_column(
        "colocalized",
        col(&|o| flag(o.peaks.len() == o.report.modes.len() && max_distance(o) <= reach)),
    );
    report.push_column("v_max", col(&|o| o.land.v_max));
    report.push_column("discarded_rank", col(&|o| o.land.discarded_rank as f64));
    report.push_column("degenerate", col(&|o| flag(o.land.degenerate)));

    let sigma = |name: &str| {
        cases
            .iter()
            .position(|c| c.name == name)
            .map(|i| outcomes[i].land.sigma_min)
    };
    if let (Some(triv), Some(topo)) = (sigma("trivial"), sigma("topological")) {
        report
            .summary
            .insert("sigma_ratio_trivial_topological".into(), triv / topo);
    }
    for (c, o) in cases.iter().zip(&outcomes) {
        if let Some(w) = c.wall {
            report.summary.insert(
                format!("{}_wall_site", c.name),
                (w + 1) as f64,
            );
            report.summary.insert(
                format!("{}_wall_distance", c.name),
                c.geometry.distance(o.report.landscape_argmax, w) as f64,
            );
        }
    }

    let mut modes = CsvTable::new(
        ["case", "mode", "energy", "argmax_site", "participation", "nearest_peak", "distance"]
            .map(String::from)
            .to_vec(),
    );
    let mut tables = Vec::new();
    for (c, o) in cases.iter().zip(&outcomes) {
        for (m, &(peak, d)) in o.report.localized.iter().zip(&o.nearest) {
            modes.push(vec![
                Cell::Text(c.name.clone()),
                Cell::Int(m.index as i64),
                Cell::Num(m.energy),
                Cell::Int(m.argmax as i64 + 1),
                Cell::Num(m.participation),
                Cell::Int(peak as i64 + 1),
                Cell::Int(d),
            ]);
        }
        let mut profile = CsvTable::new(
            ["site", "x", "y", "landscape", "peak_profile", "midgap_weight"]
                .map(String::from)
                .to_vec(),
        );
        let weight: Vec<f64> = (0..c.h.dim())
            .map(|j| o.report.modes.iter().map(|m| m.weights[j]).sum())
            .collect();
        let peak_profile = o.land.peak_profile();
        for j in 0..c.h.dim() {
            let (x, y) = c.geometry.coords(j);
            profile.push(vec![
                Cell::Int(j as i64 + 1),
                Cell::Int(x),
                Cell::Int(y),
                Cell::Num(o.land.amplitude[j]),
                Cell::Num(peak_profile[j]),
                Cell::Num(weight[j]),
            ]);
        }
        tables.push((format!("profile_{}.csv", c.name), profile));
    }
    tables.insert(0, ("modes.csv".into(), modes));
    report.set_meta("colocalization_sites", reach);
    tally.write(&mut report);
    Ok(RunOutput { report, tables })
}
