use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::{solve_landscape, DEFAULT_RCOND};
use crate::linalg::{eig_hermitian, Operator};
use crate::models::Geometry;

/// Sites at or above this fraction of the profile maximum join a peak cluster.
pub const PEAK_THRESHOLD: f64 = 0.2;

/// Sites within this Chebyshev distance belong to the same cluster.
pub const PEAK_LINK_DISTANCE: i64 = 2;

/// Gap ratio that separates midgap levels from the bulk.
const MIDGAP_JUMP: f64 = 10.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MidgapMode {
    /// Eigen-index in the ascending spectrum (for localized modes: the
    /// position within the midgap subspace).
    pub index: usize,
    pub energy: f64,
    pub weights: Vec<f64>,
    pub argmax: usize,
    /// `1 / sum_j w_j^2`.
    pub participation: f64,
}

impl MidgapMode {
    fn from_vector(index: usize, energy: f64, v: &[c64]) -> Self {
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let weights: Vec<f64> = v.iter().map(|z| z.norm_sqr() / norm2).collect();
        let argmax = argmax(&weights);
        let participation = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        Self {
            index,
            energy,
            weights,
            argmax,
            participation,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MidgapReport {
    pub window: f64,
    /// Eigenpairs with `|E| < window`.
    pub modes: Vec<MidgapMode>,
    /// The same subspace rotated into maximally separated, spatially
    /// localized states; `energy` holds `<psi|H|psi>`.
    pub localized: Vec<MidgapMode>,
    pub landscape_argmax: usize,
    /// Cluster maxima of the landscape peak profile, tallest first.
    pub landscape_peaks: Vec<usize>,
    pub sigma_min: f64,
}

fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

/// Ten percent of the bulk gap edge.
///
/// The edge is the level just above the largest ratio jump in the sorted
/// `|E|`. Without a jump of at least 10x there are no midgap levels and the
/// window is a tenth of the smallest `|E|`.
pub fn default_midgap_window(energies: &[f64]) -> Result<f64> {
    let mut mags: Vec<f64> = energies.iter().map(|e| e.abs()).collect();
    if mags.is_empty() {
        return Err(Error::Degenerate("midgap window of an empty spectrum".into()));
    }
    mags.sort_by(f64::total_cmp);
    let mut best_ratio = 0.0;
    let mut edge = mags[0];
    for w in mags.windows(2) {
        let ratio = w[1] / w[0].max(f64::MIN_POSITIVE);
        if ratio > best_ratio {
            best_ratio = ratio;
            edge = w[1];
        }
    }
    let window = if best_ratio >= MIDGAP_JUMP {
        0.1 * edge
    } else {
        0.1 * mags[0]
    };
    if window > 0.0 {
        Ok(window)
    } else {
        let first = mags.iter().copied().find(|&m| m > 0.0).unwrap_or(1.0);
        Ok(0.1 * first)
    }
}

/// Rotates an orthonormal subspace (columns of `basis`) into eigenstates of
/// the projected position operator `x + y / phi`, which separates states
/// sitting at distinct sites, edges or corners.
pub fn localize_subspace(basis: &Mat<c64>, geometry: &Geometry) -> Result<Vec<Vec<c64>>> {
    let (n, k) = (basis.nrows(), basis.ncols());
    if k == 0 {
        return Ok(Vec::new());
    }
    let tilt = 2.0 / (1.0 + 5f64.sqrt());
    let pos: Vec<f64> = (0..n)
        .map(|i| {
            let (x, y) = geometry.coords(i);
            x as f64 + tilt * y as f64
        })
        .collect();
    let projected = Operator::from_fn(k, "projected position", |a, b| {
        (0..n)
            .map(|i| basis[(i, a)].conj() * basis[(i, b)] * pos[i])
            .sum()
    })?;
    let eig = eig_hermitian(&projected)?;
    Ok((0..k)
        .map(|c| {
            (0..n)
                .map(|i| (0..k).map(|a| basis[(i, a)] * eig.vectors[(a, c)]).sum())
                .collect()
        })
        .collect())
}

/// Local maxima of a site profile found by clustering sites above
/// `threshold * max`, linked within `link` (Chebyshev). Tallest first.
pub fn profile_peaks(profile: &[f64], geometry: &Geometry, threshold: f64, link: i64) -> Vec<usize> {
    let max = profile.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let hot: Vec<usize> = (0..profile.len())
        .filter(|&i| profile[i] >= threshold * max)
        .collect();
    let mut cluster = vec![usize::MAX; hot.len()];
    let mut peaks = Vec::new();
    for start in 0..hot.len() {
        if cluster[start] != usize::MAX {
            continue;
        }
        let id = peaks.len();
        cluster[start] = id;
        let mut stack = vec![start];
        let mut best = hot[start];
        while let Some(a) = stack.pop() {
            if profile[hot[a]] > profile[best] {
                best = hot[a];
            }
            for b in 0..hot.len() {
                if cluster[b] == usize::MAX && geometry.distance(hot[a], hot[b]) <= link {
                    cluster[b] = id;
                    stack.push(b);
                }
            }
        }
        peaks.push(best);
    }
    peaks.sort_by(|&a, &b| profile[b].total_cmp(&profile[a]).then(a.cmp(&b)));
    peaks
}

/// Eigenpairs of a Hermitian `H` with `|E| < window`, their localized
/// rotation, and the landscape peaks of the same operator.
pub fn midgap_report(h: &Operator, window: f64, geometry: &Geometry) -> Result<MidgapReport> {
    midgap_report_with(h, window, geometry, DEFAULT_RCOND)
}

/// [`midgap_report`] with an explicit landscape cutoff.
pub fn midgap_report_with(
    h: &Operator,
    window: f64,
    geometry: &Geometry,
    rcond: f64,
) -> Result<MidgapReport> {
    if !(window > 0.0) {
        return Err(Error::Range(format!("midgap window must be positive, got {window}")));
    }
    if geometry.len() != h.dim() {
        return Err(Error::Dimension(format!(
            "geometry has {} sites, operator dimension {}",
            geometry.len(),
            h.dim()
        )));
    }
    let eig = eig_hermitian(h)?;
    let n = h.dim();
    let picked: Vec<usize> = (0..n).filter(|&k| eig.values[k].abs() < window).collect();
    let modes: Vec<MidgapMode> = picked
        .iter()
        .map(|&k| MidgapMode::from_vector(k, eig.values[k], &eig.vector(k)))
        .collect();

    let basis = Mat::from_fn(n, picked.len(), |i, c| eig.vectors[(i, picked[c])]);
    let localized = localize_subspace(&basis, geometry)?
        .into_iter()
        .enumerate()
        .map(|(c, v)| {
            let hv = h.apply(&v).expect("dimension checked");
            let e: c64 = v.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
            MidgapMode::from_vector(c, e.re, &v)
        })
        .collect();

    let land = solve_landscape(h, rcond)?;
    let profile = land.peak_profile();
    Ok(MidgapReport {
        window,
        modes,
        localized,
        landscape_argmax: argmax(profile),
        landscape_peaks: profile_peaks(profile, geometry, PEAK_THRESHOLD, PEAK_LINK_DISTANCE),
        sigma_min: land.sigma_min,
    })
}
