use super::{flag, BoundTally, RunConfig, RunOutput};
use crate::diagnostics::{
    average_right_density, eigenstate_center_of_mass, pearson, spearman, Axis, Cell, CsvTable,
    SweepReport,
};
use crate::error::Result;
use crate::landscape::{solve_landscape, LandscapeResult};
use crate::models::hatano_nelson;
use crate::sweep::{linspace, try_map_ordered, Workers};

struct Point {
    land: LandscapeResult,
    density: Vec<f64>,
    x_cm: f64,
}

fn argmax(x: &[f64]) -> usize {
    (0..x.len()).fold(0, |best, i| if x[i] > x[best] { i } else { best })
}

fn solve(n: usize, t_left: f64, r: f64, rcond: f64) -> Result<Point> {
    let h = hatano_nelson(n, t_left, r * t_left)?;
    let land = solve_landscape(&h, rcond)?;
    let density = average_right_density(&h)?;
    let x_cm = eigenstate_center_of_mass(&density)?;
    Ok(Point { land, density, x_cm })
}

fn profile_table(p: &Point) -> CsvTable {
    let mut t = CsvTable::new(vec!["site".into(), "landscape".into(), "density".into()]);
    for (j, (a, d)) in p.land.amplitude.iter().zip(&p.density).enumerate() {
        t.push(vec![Cell::Int(j as i64 + 1), Cell::Num(*a), Cell::Num(*d)]);
    }
    t
}

/// Hatano-Nelson sweep over `r = t_R / t_L`.
pub fn run_hn(cfg: &RunConfig, workers: Workers) -> Result<RunOutput> {
    let n = cfg.usize("n");
    let t_left = cfg.float("t_left");
    let rcond = cfg.float("rcond");
    let rs = linspace(cfg.float("r_start"), cfg.float("r_stop"), cfg.usize("r_count"));
    let points = try_map_ordered(&rs, workers, |&r| solve(n, t_left, r, rcond))?;

    let mut tally = BoundTally::default();
    points.iter().for_each(|p| tally.record(&p.land));
    let col = |f: &dyn Fn(&Point) -> f64| points.iter().map(f).collect::<Vec<f64>>();

    let mut report = SweepReport::new(format!("hatano_nelson(N={n}, t_L={t_left})"), vec![Axis::new("r", "t_R/t_L", rs.clone())]);
    report.push_column("v_max", col(&|p| p.land.v_max));
    report.push_column("log10_vmax", col(&|p| p.land.log10_v_max()));
    report.push_column("sigma_min", col(&|p| p.land.sigma_min));
    report.push_column("soft_com", col(&|p| p.land.soft_com));
    report.push_column("x_cm", col(&|p| p.x_cm));
    report.push_column("landscape_argmax", col(&|p| (p.land.argmax() + 1) as f64));
    report.push_column("density_argmax", col(&|p| (argmax(&p.density) + 1) as f64));
    report.push_column("norm2", col(&|p| p.land.norm2()));
    report.push_column("norm_bound", col(&|p| p.land.norm_bound().bound));
    report.push_column("discarded_rank", col(&|p| p.land.discarded_rank as f64));
    report.push_column("degenerate", col(&|p| flag(p.land.degenerate)));

    let soft: Vec<f64> = col(&|p| p.land.soft_com);
    let xcm: Vec<f64> = col(&|p| p.x_cm);
    report.summary.insert("pearson".into(), pearson(&soft, &xcm)?);
    report.summary.insert("spearman".into(), spearman(&soft, &xcm)?);

    let mut tables = Vec::new();
    let mut extra = vec![cfg.float("r_start"), cfg.float("r_stop")];
    let profile_r = cfg.float("profile_r");
    if !extra.contains(&profile_r) {
        extra.push(profile_r);
    }
    for &r in &extra {
        let p = solve(n, t_left, r, rcond)?;
        tally.record(&p.land);
        if r == profile_r {
            report
                .summary
                .insert("profile_landscape_argmax".into(), (p.land.argmax() + 1) as f64);
            report
                .summary
                .insert("profile_density_argmax".into(), (argmax(&p.density) + 1) as f64);
        }
        tables.push((format!("profile_r{r:.2}.csv"), profile_table(&p)));
    }
    report.set_meta("profile_r", profile_r);
    tally.write(&mut report);
    Ok(RunOutput { report, tables })
}
