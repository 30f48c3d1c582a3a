//! Reference observables: eigenstate densities, IPR, quasienergy folding,
//! Floquet DOS, correlation statistics and peak finding.

mod midgap;
mod report;

pub use midgap::{
    default_midgap_window, localize_subspace, midgap_report, midgap_report_with, profile_peaks, MidgapMode,
    MidgapReport, PEAK_LINK_DISTANCE, PEAK_THRESHOLD,
};
pub use report::{Axis, Cell, Column, CsvTable, SweepReport};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::soft_center_of_mass;
use crate::linalg::{eig_general, eigvals_hermitian, Operator};

/// Tolerance on `||psi|| = 1` accepted by [`sambe_ipr`].
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Default histogram bin width in units of the drive frequency.
pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

/// Default peak prominence as a fraction of the series maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.1;

/// `(1/N) sum_k |psi_j^(k)|^2 / ||psi^(k)||^2` over all right eigenvectors.
pub fn average_right_density(h: &Operator) -> Result<Vec<f64>> {
    let eig = eig_general(h)?;
    Ok(average_column_density(eig.vectors.as_ref()))
}

pub(crate) fn average_column_density(vectors: faer::MatRef<'_, c64>) -> Vec<f64> {
    let (n, k) = (vectors.nrows(), vectors.ncols());
    let mut out = vec![0.0; n];
    for col in 0..k {
        let norm2: f64 = (0..n).map(|j| vectors[(j, col)].norm_sqr()).sum();
        if norm2 == 0.0 {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o += vectors[(j, col)].norm_sqr() / norm2;
        }
    }
    for o in &mut out {
        *o /= k as f64;
    }
    out
}

/// `sum_j j d_j / sum_j d_j` with 1-based sites.
pub fn eigenstate_center_of_mass(density: &[f64]) -> Result<f64> {
    soft_center_of_mass(density)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Dimension(format!(
            "correlation needs two series of equal length >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Range("correlation inputs must be finite".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Dimension(format!(
            "correlation needs two series of equal length >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// `sum |psi_i|^4` of a unit vector.
pub fn sambe_ipr(vec: &[c64]) -> Result<f64> {
    let norm2: f64 = vec.iter().map(|z| z.norm_sqr()).sum();
    if (norm2.sqrt() - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization(norm2.sqrt()));
    }
    Ok(vec.iter().map(|z| z.norm_sqr().powi(2)).sum())
}

/// Mean and maximum IPR over the columns of an eigenvector matrix, each
/// column normalized first.
pub fn ipr_mean_max(vectors: faer::MatRef<'_, c64>) -> (f64, f64) {
    let (n, k) = (vectors.nrows(), vectors.ncols());
    let mut sum = 0.0;
    let mut max = 0.0_f64;
    for col in 0..k {
        let norm2: f64 = (0..n).map(|j| vectors[(j, col)].norm_sqr()).sum();
        let ipr: f64 = (0..n)
            .map(|j| (vectors[(j, col)].norm_sqr() / norm2).powi(2))
            .sum();
        sum += ipr;
        max = max.max(ipr);
    }
    (sum / k as f64, max)
}

/// Folds an energy into `[-omega/2, omega/2)`.
pub fn fold_quasienergy(e: f64, omega: f64) -> f64 {
    let k = (e / omega + 0.5).floor();
    let mut r = e - k * omega;
    let half = 0.5 * omega;
    if r >= half {
        r -= omega;
    } else if r < -half {
        r += omega;
    }
    r
}

/// Folded distance between two quasienergies, in `[0, omega/2]`.
pub fn quasienergy_gap(e1: f64, e2: f64, omega: f64) -> f64 {
    fold_quasienergy(e1 - e2, omega).abs()
}

/// Eigenvalue of a Hermitian operator closest to zero, by magnitude.
pub fn smallest_abs_eigenvalue(h: &Operator) -> Result<f64> {
    Ok(eigvals_hermitian(h)?
        .into_iter()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DosHistogram {
    pub centers: Vec<f64>,
    pub density: Vec<f64>,
    pub bin_width: f64,
}

impl DosHistogram {
    /// `sum density * width`.
    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }
}

/// Normalized histogram of `x_n = fold(E_n) / omega` on `[-1/2, 1/2)`.
///
/// The bin count is `round(1 / bin_width)`, so the realized width can differ
/// slightly from the request when `1 / bin_width` is not an integer.
pub fn floquet_dos(energies: &[f64], omega: f64, bin_width: f64) -> Result<DosHistogram> {
    if energies.is_empty() {
        return Err(Error::Degenerate("DOS of an empty spectrum".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::Range(format!("omega must be positive, got {omega}")));
    }
    if !(bin_width > 0.0 && bin_width < 1.0) {
        return Err(Error::Range(format!("bin width must lie in (0, 1), got {bin_width}")));
    }
    let n_bins = (1.0 / bin_width).round().max(1.0) as usize;
    let width = 1.0 / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &e in energies {
        let x = fold_quasienergy(e, omega) / omega;
        let idx = (((x + 0.5) * n_bins as f64).floor() as isize).clamp(0, n_bins as isize - 1);
        counts[idx as usize] += 1;
    }
    let total = energies.len() as f64;
    Ok(DosHistogram {
        centers: (0..n_bins).map(|b| -0.5 + (b as f64 + 0.5) * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        bin_width: width,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    /// Grid position refined by a three-point parabola.
    pub position: f64,
    pub height: f64,
    pub refined_height: f64,
    pub prominence: f64,
}

/// Strict local maxima whose prominence exceeds `ratio * max|series|`.
///
/// Prominence is the height above the higher of the two lowest points
/// reached on each side before the series climbs above the peak.
pub fn detect_peaks(series: &[f64], grid: &[f64], ratio: f64) -> Result<Vec<Peak>> {
    if series.len() != grid.len() || series.len() < 3 {
        return Err(Error::Dimension(format!(
            "peak search needs equal lengths >= 3, got {} and {}",
            series.len(),
            grid.len()
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Range(format!("prominence ratio must lie in (0, 1), got {ratio}")));
    }
    let scale = series.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let threshold = ratio * scale;
    let n = series.len();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let h = series[i];
        if !(h > series[i - 1] && h > series[i + 1]) {
            continue;
        }
        let mut left_min = h;
        for &v in series[..i].iter().rev() {
            if v > h {
                break;
            }
            left_min = left_min.min(v);
        }
        let mut right_min = h;
        for &v in &series[i + 1..] {
            if v > h {
                break;
            }
            right_min = right_min.min(v);
        }
        let prominence = h - left_min.max(right_min);
        if prominence <= threshold {
            continue;
        }
        let (position, refined_height) = parabola_vertex(
            [grid[i - 1], grid[i], grid[i + 1]],
            [series[i - 1], h, series[i + 1]],
        );
        peaks.push(Peak {
            index: i,
            position,
            height: h,
            refined_height,
            prominence,
        });
    }
    Ok(peaks)
}

/// Vertex of the parabola through three points with `x0 < x1 < x2`.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d0 = (y[1] - y[0]) / (x[1] - x[0]);
    let d1 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d1 - d0) / (x[2] - x[0]);
    if a >= 0.0 || !a.is_finite() {
        return (x[1], y[1]);
    }
    let b = d0 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[1] + (xv - x[1]) * (d0 + a * (xv - x[0]));
    (xv, yv)
}

/// Strict local minima of a series with V-shaped dips (such as a level
/// spacing through an avoided crossing), refined by intersecting the two
/// flank lines. Minima shallower than `ratio * (max - min)` are dropped.
pub fn detect_dips(series: &[f64], grid: &[f64], ratio: f64) -> Result<Vec<Peak>> {
    if series.len() != grid.len() || series.len() < 3 {
        return Err(Error::Dimension("dip search needs equal lengths >= 3".into()));
    }
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    if hi <= lo {
        return Ok(Vec::new());
    }
    // hi - series has maximum hi - lo, so the ratio carries over unchanged.
    let flipped: Vec<f64> = series.iter().map(|x| hi - x).collect();
    let mut out = detect_peaks(&flipped, grid, ratio)?;
    for p in &mut out {
        let i = p.index;
        let (g0, g1, g2) = (series[i - 1], series[i], series[i + 1]);
        let h_left = grid[i] - grid[i - 1];
        let h_right = grid[i + 1] - grid[i];
        let slope = ((g0 - g1) / h_left).max((g2 - g1) / h_right);
        let shift = if slope > 0.0 {
            ((g0 - g2) / (2.0 * slope)).clamp(-h_left, h_right)
        } else {
            0.0
        };
        p.position = grid[i] + shift;
        p.height = g1;
        p.refined_height = (g1 - slope * shift.abs()).max(0.0).min(g1);
    }
    Ok(out)
}

/// Eigenvector matrix columns as owned vectors.
pub fn columns(m: &Mat<c64>) -> Vec<Vec<c64>> {
    (0..m.ncols())
        .map(|k| (0..m.nrows()).map(|i| m[(i, k)]).collect())
        .collect()
}
