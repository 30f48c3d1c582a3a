use super::{flag, BoundTally, RunConfig, RunOutput};
use crate::diagnostics::{floquet_dos, ipr_mean_max, Axis, Cell, CsvTable, DosHistogram, SweepReport};
use crate::error::{Error, Result};
use crate::landscape::{solve_sambe_landscape, LandscapeResult};
use crate::linalg::eig_hermitian;
use crate::models::{aah_drive, aah_static};
use crate::sambe::build_sambe_mono;
use crate::sweep::{linspace, try_map_ordered, Workers};

struct Point {
    land: LandscapeResult,
    ipr_mean: f64,
    ipr_max: f64,
    dos: DosHistogram,
}

fn variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Driven Aubry-Andre-Harper sweep over the drive frequency.
pub fn run_aah(cfg: &RunConfig, workers: Workers) -> Result<RunOutput> {
    let n = cfg.usize("n");
    let (hopping, lambda0) = (cfg.float("hopping"), cfg.float("lambda0"));
    let (alpha, theta) = (cfg.float("alpha"), cfg.float("theta"));
    let amplitude = cfg.float("amplitude");
    let m = cfg.usize("truncation") as u32;
    let rcond = cfg.float("rcond");
    let bin_width = cfg.float("bin_width");
    let omegas = linspace(
        cfg.float("omega_start"),
        cfg.float("omega_stop"),
        cfg.usize("omega_count"),
    );
    let h0 = aah_static(n, hopping, lambda0, alpha, theta)?;
    let drive = aah_drive(n, amplitude, alpha, theta)?;

    let points = try_map_ordered(&omegas, workers, |&w| {
        let s = build_sambe_mono(&h0, &drive, w, m)?;
        let land = solve_sambe_landscape(&s, rcond)?;
        let eig = eig_hermitian(&s.matrix)?;
        let (ipr_mean, ipr_max) = ipr_mean_max(eig.vectors.as_ref());
        let dos = floquet_dos(&eig.values, w, bin_width)?;
        Ok(Point {
            land,
            ipr_mean,
            ipr_max,
            dos,
        })
    })?;

    let mut tally = BoundTally::default();
    points.iter().for_each(|p| tally.record(&p.land));
    let col = |f: &dyn Fn(&Point) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let v_max = col(&|p| p.land.v_max);
    let integrals = col(&|p| p.dos.integral());

    let mut report = SweepReport::new(
        format!("aah(N={n}, J={hopping}, lambda0={lambda0}, alpha={alpha}, A={amplitude}, M={m})"),
        vec![Axis::new("omega", "J", omegas.clone())],
    );
    report.push_column("v_max", v_max.clone());
    report.push_column("log10_vmax", col(&|p| p.land.log10_v_max()));
    report.push_column("sigma_min", col(&|p| p.land.sigma_min));
    report.push_column("soft_com", col(&|p| p.land.soft_com));
    report.push_column("ipr_mean", col(&|p| p.ipr_mean));
    report.push_column("ipr_max", col(&|p| p.ipr_max));
    report.push_column("dos_integral", integrals.clone());
    report.push_column("discarded_rank", col(&|p| p.land.discarded_rank as f64));
    report.push_column("degenerate", col(&|p| flag(p.land.degenerate)));

    let low_max = cfg.float("low_omega_max");
    let high_min = cfg.float("high_omega_min");
    let pick = |keep: &dyn Fn(f64) -> bool| -> Vec<f64> {
        omegas
            .iter()
            .zip(&v_max)
            .filter(|(w, _)| keep(**w))
            .map(|(_, v)| *v)
            .collect()
    };
    let low = pick(&|w| w <= low_max);
    let high = pick(&|w| w >= high_min);
    if low.is_empty() || high.is_empty() {
        return Err(Error::config(format!(
            "frequency windows [.., {low_max}] and [{high_min}, ..] must each contain a grid point"
        )));
    }
    let (var_low, var_high) = (variance(&low), variance(&high));
    let s = &mut report.summary;
    s.insert("variance_low".into(), var_low);
    s.insert("variance_high".into(), var_high);
    s.insert("variance_ratio".into(), var_low / var_high);
    s.insert(
        "max_dos_integral_error".into(),
        integrals.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max),
    );

    let mut header = vec!["x".to_string()];
    header.extend(omegas.iter().map(|w| format!("omega={w}")));
    let mut dos = CsvTable::new(header);
    let centers = &points[0].dos.centers;
    for (b, x) in centers.iter().enumerate() {
        let mut row = vec![Cell::Num(*x)];
        row.extend(points.iter().map(|p| Cell::Num(p.dos.density[b])));
        dos.push(row);
    }
    tally.write(&mut report);
    Ok(RunOutput {
        report,
        tables: vec![("dos_grid.csv".into(), dos)],
    })
}
