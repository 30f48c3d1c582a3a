use super::{flag, BoundTally, RunConfig, RunOutput};
use crate::diagnostics::{
    detect_dips, detect_peaks, pearson, smallest_abs_eigenvalue, spearman, Axis, Cell, CsvTable,
    Peak, SweepReport,
};
use crate::dynamics::{
    left_state, monodromy_quasienergies, partial_left_state, population_summary, propagate,
    DriveSignal, Quasienergies,
};
use crate::error::{Error, Result};
use crate::landscape::{solve_sambe_landscape, LandscapeResult};
use crate::linalg::bessel_j0_zeros;
use crate::models::{two_level_drive_duo, two_level_drive_mono, two_level_static};
use crate::sambe::{build_sambe_duo, build_sambe_mono, harmonic_sector};
use crate::sweep::{linspace, try_map_ordered, Workers};

struct MonoPoint {
    land: LandscapeResult,
    sambe_min_abs: f64,
    quasi: Option<Quasienergies>,
}

fn mono_landscape(hopping: f64, amplitude: f64, omega: f64, m: u32, rcond: f64) -> Result<(LandscapeResult, f64)> {
    let s = build_sambe_mono(
        &two_level_static(hopping)?,
        &two_level_drive_mono(amplitude)?,
        omega,
        m,
    )?;
    let land = solve_sambe_landscape(&s, rcond)?;
    Ok((land, smallest_abs_eigenvalue(&s.matrix)?))
}

fn nearest(peaks: &[Peak], x: f64) -> Option<&Peak> {
    peaks
        .iter()
        .min_by(|a, b| (a.position - x).abs().total_cmp(&(b.position - x).abs()))
}

/// Monochromatic two-level sweep over `A / omega`.
pub fn run_cdt_mono(cfg: &RunConfig, workers: Workers) -> Result<RunOutput> {
    let hopping = cfg.float("hopping");
    let omega = cfg.float("omega");
    let m = cfg.usize("truncation") as u32;
    let rcond = cfg.float("rcond");
    let with_monodromy = cfg.bool("monodromy");
    let period = 2.0 * std::f64::consts::PI / omega;
    let dt = period / cfg.usize("steps_per_period") as f64;
    let grid = linspace(cfg.float("a_start"), cfg.float("a_stop"), cfg.usize("a_count"));

    let points = try_map_ordered(&grid, workers, |&a| {
        let amplitude = a * omega;
        let (land, sambe_min_abs) = mono_landscape(hopping, amplitude, omega, m, rcond)?;
        let quasi = if with_monodromy {
            Some(monodromy_quasienergies(&DriveSignal::mono(hopping, amplitude, omega)?, dt)?)
        } else {
            None
        };
        Ok(MonoPoint {
            land,
            sambe_min_abs,
            quasi,
        })
    })?;

    let mut tally = BoundTally::default();
    points.iter().for_each(|p| tally.record(&p.land));
    let col = |f: &dyn Fn(&MonoPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();

    let mut report = SweepReport::new(
        format!("two_level_mono(J={hopping}, omega={omega}, M={m})"),
        vec![Axis::new("a_over_omega", "A/omega", grid.clone())],
    );
    let log_v = col(&|p| p.land.log10_v_max());
    report.push_column("v_max", col(&|p| p.land.v_max));
    report.push_column("log10_vmax", log_v.clone());
    report.push_column("sigma_min", col(&|p| p.land.sigma_min));
    report.push_column("sambe_min_abs_eps", col(&|p| p.sambe_min_abs));
    report.push_column("discarded_rank", col(&|p| p.land.discarded_rank as f64));
    report.push_column("degenerate", col(&|p| flag(p.land.degenerate)));

    let peaks = detect_peaks(&log_v, &grid, cfg.float("prominence"))?;
    let zeros = bessel_j0_zeros(peaks.len().max(3));
    let mut dips = Vec::new();
    if with_monodromy {
        let q = |f: &dyn Fn(&Quasienergies) -> f64| col(&|p| f(p.quasi.as_ref().expect("computed")));
        let gap = q(&|x| x.gap(omega));
        let min_abs = q(&|x| x.min_abs());
        report.push_column("eps1", q(&|x| x.values[0]));
        report.push_column("eps2", q(&|x| x.values[1]));
        report.push_column("quasienergy_gap", gap.clone());
        report.push_column("monodromy_min_abs_eps", min_abs.clone());
        report.push_column("unitarity_defect", q(&|x| x.unitarity_defect));
        dips = detect_dips(&gap, &grid, cfg.float("prominence"))?;
        let diff = points
            .iter()
            .zip(&min_abs)
            .map(|(p, e)| (p.sambe_min_abs - e).abs())
            .fold(0.0, f64::max);
        report.summary.insert("max_sambe_monodromy_diff".into(), diff);
        report.summary.insert(
            "max_unitarity_defect".into(),
            q(&|x| x.unitarity_defect).into_iter().fold(0.0, f64::max),
        );
    }

    let mut table = CsvTable::new(
        [
            "peak", "position", "log10_height", "prominence", "j0_zero", "offset_j0", "gap_min",
            "offset_gap",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (k, p) in peaks.iter().enumerate() {
        let z = zeros.get(k).copied().unwrap_or(f64::NAN);
        let dip = nearest(&dips, p.position).map_or(f64::NAN, |d| d.position);
        let offset_j0 = (p.position - z) / z;
        let offset_gap = (p.position - dip) / dip;
        table.push(vec![
            Cell::Int(k as i64 + 1),
            Cell::Num(p.position),
            Cell::Num(p.height),
            Cell::Num(p.prominence),
            Cell::Num(z),
            Cell::Num(offset_j0),
            Cell::Num(dip),
            Cell::Num(offset_gap),
        ]);
        if k < 3 {
            let s = &mut report.summary;
            s.insert(format!("peak{}", k + 1), p.position);
            s.insert(format!("peak{}_offset_j0", k + 1), offset_j0);
            if dip.is_finite() {
                s.insert(format!("peak{}_gap_min", k + 1), dip);
                s.insert(format!("peak{}_offset_gap", k + 1), offset_gap);
            }
        }
    }
    report.summary.insert("n_peaks".into(), peaks.len() as f64);
    report.summary.insert(
        "grid_step".into(),
        (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64,
    );
    report.set_meta("dt", dt);
    tally.write(&mut report);
    Ok(RunOutput {
        report,
        tables: vec![("peaks.csv".into(), table)],
    })
}

struct DuoPoint {
    land: LandscapeResult,
    min_left: f64,
    min_partial: f64,
    drift: f64,
}

fn max_rel_diff(a: &[f64], b: &[f64], scale: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

/// Bichromatic sweep over `(A, B)` in units of `omega1`; the first axis is
/// `A` and varies slowest.
pub fn run_cdt_duo(cfg: &RunConfig, workers: Workers) -> Result<RunOutput> {
    let hopping = cfg.float("hopping");
    let w1 = cfg.float("omega1");
    let w2 = w1 * cfg.float("omega_ratio");
    let m1 = cfg.usize("truncation1") as u32;
    let m2 = cfg.usize("truncation2") as u32;
    let rcond = cfg.float("rcond");
    let n_periods = cfg.usize("n_periods");
    let steps = cfg.usize("steps_per_period");
    let a_grid = linspace(cfg.float("a_start"), cfg.float("a_stop"), cfg.usize("a_count"));
    let b_grid = linspace(cfg.float("b_start"), cfg.float("b_stop"), cfg.usize("b_count"));
    let pairs: Vec<(f64, f64)> = a_grid
        .iter()
        .flat_map(|&a| b_grid.iter().map(move |&b| (a, b)))
        .collect();
    let h0 = two_level_static(hopping)?;

    let points = try_map_ordered(&pairs, workers, |&(a, b)| {
        let (amp_a, amp_b) = (a * w1, b * w1);
        let s = build_sambe_duo(&h0, &two_level_drive_duo(amp_a, amp_b)?, w1, w2, m1, m2)?;
        let land = solve_sambe_landscape(&s, rcond)?;
        let drive = DriveSignal::duo(hopping, amp_a, amp_b, w1, w2)?;
        let dt = drive.shortest_period() / steps as f64;
        let left = population_summary(&drive, left_state(), n_periods, dt)?;
        let partial = population_summary(&drive, partial_left_state(), n_periods, dt)?;
        Ok(DuoPoint {
            land,
            min_left: left.min_left,
            min_partial: partial.min_left,
            drift: left.max_norm_drift.max(partial.max_norm_drift),
        })
    })?;

    let mut tally = BoundTally::default();
    points.iter().for_each(|p| tally.record(&p.land));
    let col = |f: &dyn Fn(&DuoPoint) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let v_max = col(&|p| p.land.v_max);
    let log_v = col(&|p| p.land.log10_v_max());
    let min_pl = col(&|p| p.min_left);
    let min_partial = col(&|p| p.min_partial);

    let mut report = SweepReport::new(
        format!("two_level_duo(J={hopping}, omega1={w1}, omega2={w2}, M1={m1}, M2={m2})"),
        vec![
            Axis::new("a_over_omega1", "A/omega1", a_grid.clone()),
            Axis::new("b_over_omega1", "B/omega1", b_grid.clone()),
        ],
    );
    report.push_column("v_max", v_max.clone());
    report.push_column("log10_vmax", log_v.clone());
    report.push_column("sigma_min", col(&|p| p.land.sigma_min));
    report.push_column("min_pl", min_pl.clone());
    report.push_column("min_pl_partial", min_partial.clone());
    report.push_column("max_norm_drift", col(&|p| p.drift));
    report.push_column("discarded_rank", col(&|p| p.land.discarded_rank as f64));
    report.push_column("degenerate", col(&|p| flag(p.land.degenerate)));

    let s = &mut report.summary;
    s.insert("pearson".into(), pearson(&v_max, &min_pl)?);
    s.insert("spearman".into(), spearman(&v_max, &min_pl)?);
    s.insert("pearson_log10".into(), pearson(&log_v, &min_pl)?);
    s.insert("pearson_partial".into(), pearson(&v_max, &min_partial)?);
    s.insert(
        "max_norm_drift".into(),
        col(&|p| p.drift).into_iter().fold(0.0, f64::max),
    );

    // Reduction checks against the monochromatic operator, when B = 0 is on the grid.
    if let Some(b0) = b_grid.iter().position(|&b| b == 0.0) {
        let (mut row, mut sector, mut m2_zero) = (0.0_f64, 0.0_f64, 0.0_f64);
        for (ia, &a) in a_grid.iter().enumerate() {
            let amp = a * w1;
            let mono = build_sambe_mono(&h0, &two_level_drive_mono(amp)?, w1, m1)?;
            let mono_land = solve_sambe_landscape(&mono, rcond)?;
            tally.record(&mono_land);
            let scale = mono_land.v_max;
            row = row.max((v_max[ia * b_grid.len() + b0] - scale).abs() / scale);

            let duo = build_sambe_duo(&h0, &two_level_drive_duo(amp, 0.0)?, w1, w2, m1, m2)?;
            let duo_land = solve_sambe_landscape(&duo, rcond)?;
            tally.record(&duo_land);
            let mut restricted = Vec::with_capacity(mono.dim());
            for k in -(m1 as i32)..=(m1 as i32) {
                restricted.extend(harmonic_sector(&duo_land.v_complex, &duo.index_map, &[k, 0])?);
            }
            let abs: Vec<f64> = restricted.iter().map(|z| z.norm()).collect();
            sector = sector.max(max_rel_diff(&abs, &mono_land.amplitude, scale));

            let flat = build_sambe_duo(&h0, &two_level_drive_duo(amp, 0.0)?, w1, w2, m1, 0)?;
            let flat_land = solve_sambe_landscape(&flat, rcond)?;
            tally.record(&flat_land);
            m2_zero = m2_zero.max(max_rel_diff(&flat_land.amplitude, &mono_land.amplitude, scale));
        }
        s.insert("b0_row_max_rel_diff".into(), row);
        s.insert("b0_m2_sector_max_rel_diff".into(), sector);
        s.insert("b0_m2_zero_max_rel_diff".into(), m2_zero);
    }

    let argmin = (0..v_max.len()).fold(0, |b, i| if v_max[i] < v_max[b] { i } else { b });
    let argmax = (0..v_max.len()).fold(0, |b, i| if v_max[i] > v_max[b] { i } else { b });
    let mut marked = CsvTable::new(
        ["label", "a_over_omega1", "b_over_omega1", "v_max", "min_pl", "min_pl_partial"]
            .map(String::from)
            .to_vec(),
    );
    let mut tables = Vec::new();
    let stride = cfg.usize("trajectory_stride");
    for (label, idx) in [("smooth", argmin), ("peak", argmax)] {
        let (a, b) = pairs[idx];
        marked.push(vec![
            Cell::Text(label.into()),
            Cell::Num(a),
            Cell::Num(b),
            Cell::Num(v_max[idx]),
            Cell::Num(min_pl[idx]),
            Cell::Num(min_partial[idx]),
        ]);
        report.summary.insert(format!("{label}_min_pl"), min_pl[idx]);
        report.summary.insert(format!("{label}_min_pl_partial"), min_partial[idx]);
        report.summary.insert(format!("{label}_v_max"), v_max[idx]);

        let drive = DriveSignal::duo(hopping, a * w1, b * w1, w1, w2)?;
        let dt = drive.shortest_period() / steps as f64;
        let t_end = n_periods as f64 * drive.period();
        let left = propagate(&drive, left_state(), t_end, dt)?;
        let partial = propagate(&drive, partial_left_state(), t_end, dt)?;
        if left.times.len() != partial.times.len() {
            return Err(Error::Accuracy("trajectory grids differ between initial states".into()));
        }
        let mut traj = CsvTable::new(["t", "p_left", "p_left_partial"].map(String::from).to_vec());
        for k in (0..left.times.len()).step_by(stride) {
            traj.push(vec![
                Cell::Num(left.times[k]),
                Cell::Num(left.p_left[k]),
                Cell::Num(partial.p_left[k]),
            ]);
        }
        tables.push((format!("trajectory_{label}.csv"), traj));
    }
    tables.insert(0, ("marked.csv".into(), marked));
    report.set_meta("omega2", w2);
    tally.write(&mut report);
    Ok(RunOutput { report, tables })
}
