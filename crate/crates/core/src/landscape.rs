//! Generalized landscape `v = (H^dagger H)^+ 1` and its bounds.

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_mat_vec, eig_hermitian, mat_vec, normal_operator, pseudo_solve, singular_values, svd,
    vec_norm, Operator,
};
use crate::sambe::{sambe_amplitude_profile, SambeOperator};

/// Default cutoff on `sigma^2 / sigma_max^2`; keeps singular values down to
/// `1e-12 sigma_max`.
pub const DEFAULT_RCOND: f64 = 1e-24;

/// Relative slack allowed in the norm-bound chain.
pub const NORM_BOUND_TOL: f64 = 1e-8;

/// Slack on eigenmode ratios before a mode counts as a violation.
pub const EIGENMODE_BOUND_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LandscapeResult {
    /// `|v_j|` over the full (possibly extended) index range.
    pub amplitude: Vec<f64>,
    #[serde(skip)]
    pub v_complex: Vec<c64>,
    pub v_max: f64,
    /// Spatial profile used for `soft_com`; equals `amplitude` for lattice
    /// models and `sum_m |v(j, m)|` for Sambe operators.
    pub site_profile: Vec<f64>,
    /// 1-based soft center of mass; NaN when the landscape is degenerate.
    pub soft_com: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Smallest singular value retained in the solve.
    pub sigma_min_kept: f64,
    pub rcond_used: f64,
    pub kept_rank: usize,
    pub discarded_rank: usize,
    pub degenerate: bool,
    /// `|P_ker 1|` over the discarded right-singular subspace, present when
    /// something was discarded. This is the profile that dominates the
    /// regularized landscape `(H^dagger H + eta)^-1 1` as `eta -> 0`.
    pub kernel_profile: Option<Vec<f64>>,
}

impl LandscapeResult {
    pub fn dim(&self) -> usize {
        self.amplitude.len()
    }

    pub fn log10_v_max(&self) -> f64 {
        self.v_max.log10()
    }

    pub fn norm2(&self) -> f64 {
        vec_norm(&self.v_complex)
    }

    /// 0-based index of the largest amplitude.
    pub fn argmax(&self) -> usize {
        argmax(&self.amplitude)
    }

    pub fn norm_bound(&self) -> NormBound {
        norm_bound(self)
    }

    /// Site profile to use for locating peaks: the kernel profile when the
    /// solve discarded a nonzero component of `1`, the landscape otherwise.
    pub fn peak_profile(&self) -> &[f64] {
        match &self.kernel_profile {
            Some(k) if k.iter().any(|&x| x > 0.0) && self.discarded_rank > 0 => k,
            _ => &self.site_profile,
        }
    }

    fn finish(mut self) -> Self {
        self.amplitude = self.v_complex.iter().map(|z| z.norm()).collect();
        self.v_max = self.amplitude.iter().copied().fold(0.0, f64::max);
        if self.site_profile.is_empty() {
            self.site_profile = self.amplitude.clone();
        }
        self.soft_com = soft_center_of_mass(&self.site_profile).unwrap_or(f64::NAN);
        self
    }
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

fn check_rcond(rcond: f64) -> Result<()> {
    if rcond > 0.0 && rcond < 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!("rcond must lie in (0, 1), got {rcond}")))
    }
}

/// Landscape from the SVD `H = U S V^dagger`:
/// `v = sum_{s_i^2 > rcond s_max^2} v_i (v_i^dagger 1) / s_i^2`.
pub fn solve_landscape(h: &Operator, rcond: f64) -> Result<LandscapeResult> {
    check_rcond(rcond)?;
    let d = h.dim();
    let dec = svd(h)?;
    let ones = vec![c64::new(1.0, 0.0); d];
    let coeffs = adjoint_mat_vec(dec.right_vectors.as_ref(), &ones);
    let s_max = dec.sigma_max();
    let cutoff = rcond * s_max * s_max;

    let mut kept = vec![c64::new(0.0, 0.0); d];
    let mut dropped = vec![c64::new(0.0, 0.0); d];
    let mut kept_rank = 0;
    let mut sigma_min_kept = f64::NAN;
    for (i, &s) in dec.singular_values.iter().enumerate() {
        let lambda = s * s;
        if s_max > 0.0 && lambda > cutoff {
            kept[i] = coeffs[i] / lambda;
            kept_rank += 1;
            sigma_min_kept = s;
        } else {
            dropped[i] = coeffs[i];
        }
    }
    let v = mat_vec(dec.right_vectors.as_ref(), &kept);
    let discarded_rank = d - kept_rank;
    let kernel_profile = (discarded_rank > 0).then(|| {
        mat_vec(dec.right_vectors.as_ref(), &dropped)
            .iter()
            .map(|z| z.norm())
            .collect()
    });
    Ok(LandscapeResult {
        amplitude: Vec::new(),
        v_complex: v,
        v_max: 0.0,
        site_profile: Vec::new(),
        soft_com: f64::NAN,
        sigma_min: dec.sigma_min(),
        sigma_max: s_max,
        sigma_min_kept,
        rcond_used: rcond,
        kept_rank,
        discarded_rank,
        degenerate: kept_rank == 0,
        kernel_profile,
    }
    .finish())
}

/// Landscape through the eigendecomposition of `H^dagger H`.
pub fn solve_landscape_normal(h: &Operator, rcond: f64) -> Result<LandscapeResult> {
    check_rcond(rcond)?;
    let d = h.dim();
    let normal = normal_operator(h)?;
    let ones = vec![c64::new(1.0, 0.0); d];
    let sol = pseudo_solve(&normal, &ones, rcond)?;
    let sv = singular_values(h)?;
    let sigma_min_kept = sv
        .iter()
        .copied()
        .filter(|s| s * s > sol.cutoff)
        .fold(f64::NAN, f64::min);
    Ok(LandscapeResult {
        amplitude: Vec::new(),
        v_complex: sol.x,
        v_max: 0.0,
        site_profile: Vec::new(),
        soft_com: f64::NAN,
        sigma_min: sv.last().copied().unwrap_or(0.0),
        sigma_max: sv.first().copied().unwrap_or(0.0),
        sigma_min_kept,
        rcond_used: rcond,
        kept_rank: sol.kept_rank,
        discarded_rank: sol.discarded_rank,
        degenerate: sol.degenerate,
        kernel_profile: None,
    }
    .finish())
}

/// Landscape of a Sambe operator with `soft_com` taken on the site profile
/// `sum_m |v(j, m)|`.
pub fn solve_sambe_landscape(s: &SambeOperator, rcond: f64) -> Result<LandscapeResult> {
    let mut res = solve_landscape(&s.matrix, rcond)?;
    res.site_profile = sambe_amplitude_profile(&res.v_complex, &s.index_map)?;
    res.soft_com = soft_center_of_mass(&res.site_profile).unwrap_or(f64::NAN);
    if let Some(k) = &res.kernel_profile {
        let kc: Vec<c64> = k.iter().map(|&x| c64::new(x, 0.0)).collect();
        res.kernel_profile = Some(sambe_amplitude_profile(&kc, &s.index_map)?);
    }
    Ok(res)
}

/// `sum_j j a_j / sum_j a_j` with sites `j = 1..N`.
pub fn soft_center_of_mass(amplitude: &[f64]) -> Result<f64> {
    if let Some(x) = amplitude.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Range(format!(
            "center of mass needs finite nonnegative weights, got {x}"
        )));
    }
    let total: f64 = amplitude.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("center of mass of an all-zero profile".into()));
    }
    let moment: f64 = amplitude
        .iter()
        .enumerate()
        .map(|(i, a)| (i + 1) as f64 * a)
        .sum();
    Ok(moment / total)
}

/// `max_j |v_j|` of the landscape.
pub fn landscape_max_total(h: &Operator, rcond: f64) -> Result<f64> {
    let res = solve_landscape(h, rcond)?;
    if res.degenerate {
        return Err(Error::Degenerate(format!(
            "every singular value of {} is below the cutoff",
            h.label()
        )));
    }
    Ok(res.v_max)
}

/// The chain `v_max <= ||v||_2 <= sqrt(d) sigma_min^-2`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormBound {
    pub v_max: f64,
    pub norm2: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn norm_bound(res: &LandscapeResult) -> NormBound {
    let norm2 = res.norm2();
    let bound = if res.sigma_min > 0.0 {
        (res.dim() as f64).sqrt() / (res.sigma_min * res.sigma_min)
    } else {
        f64::INFINITY
    };
    let slack = 1.0 + NORM_BOUND_TOL;
    let holds = res.v_max <= norm2 * slack && norm2 <= bound * slack;
    NormBound {
        v_max: res.v_max,
        norm2,
        bound,
        holds,
    }
}

/// Worst pointwise ratio `|phi_j| / (lambda ||phi||_inf v_j)` for one mode.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModeBound {
    pub index: usize,
    pub eigenvalue: f64,
    pub max_ratio: f64,
    pub site: usize,
}

impl ModeBound {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0 + EIGENMODE_BOUND_TOL
    }
}

/// Checks the eigenmode bound for every eigenpair of `H^dagger H` with
/// eigenvalue above the cutoff. Violations are reported, not suppressed.
pub fn eigenmode_bound_report(h: &Operator, rcond: f64) -> Result<Vec<ModeBound>> {
    let land = solve_landscape(h, rcond)?;
    if land.degenerate || land.discarded_rank > 0 {
        return Err(Error::Degenerate(format!(
            "eigenmode bound needs sigma_min above the cutoff ({} of {} modes discarded)",
            land.discarded_rank,
            land.dim()
        )));
    }
    let eig = eig_hermitian(&normal_operator(h)?)?;
    let lambda_max = eig.values.last().copied().unwrap_or(0.0);
    let cutoff = rcond * lambda_max;
    let mut out = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        let phi = eig.vector(k);
        let inf = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut worst = 0.0;
        let mut site = 0;
        for (j, z) in phi.iter().enumerate() {
            let denom = lambda * inf * land.amplitude[j];
            let r = if denom > 0.0 {
                z.norm() / denom
            } else if z.norm() > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if r > worst {
                worst = r;
                site = j;
            }
        }
        out.push(ModeBound {
            index: k,
            eigenvalue: lambda,
            max_ratio: worst,
            site,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_RCOND as EIG_RCOND;
    use crate::models::{
        hatano_nelson, ssh, two_level_drive_mono, two_level_static, SshConfig, SshVariant,
    };
    use crate::sambe::{build_sambe_mono, sambe_weight_profile};
    use crate::test_support::{gauss_solve, random_hermitian_pd, random_operator};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones(n: usize) -> Vec<c64> {
        vec![c64::new(1.0, 0.0); n]
    }

    #[test]
    fn diagonal_and_identity() {
        let h = Operator::from_real_diagonal(&[1.0, 2.0], "d").unwrap();
        let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        assert_abs_diff_eq!(r.v_complex[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.v_complex[1].re, 0.25, epsilon = 1e-14);
        let u = [1.0, 0.5];
        assert_abs_diff_eq!(r.v_complex[1].re, u[1] / 2.0, epsilon = 1e-14);

        let r = solve_landscape(&Operator::identity(7).unwrap(), DEFAULT_RCOND).unwrap();
        assert!(r.amplitude.iter().all(|a| (a - 1.0).abs() < 1e-14));
        assert_abs_diff_eq!(r.v_max, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.soft_com, 4.0, epsilon = 1e-12);
        assert_eq!(r.discarded_rank, 0);
        assert!(r.kernel_profile.is_none());
    }

    #[test]
    fn v_max_is_exact_max_of_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_operator(12, &mut rng);
        let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        assert_eq!(r.v_max, r.amplitude.iter().copied().fold(0.0, f64::max));
        assert_eq!(r.amplitude[r.argmax()], r.v_max);
    }

    #[test]
    fn hermitian_reduction_matches_double_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in [3, 17, 40] {
            let h = random_hermitian_pd(n, 0.5, &mut rng);
            let u = gauss_solve(&h, &ones(n));
            let want = gauss_solve(&h, &u);
            let got = solve_landscape(&h, DEFAULT_RCOND).unwrap();
            let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (a, b) in got.v_complex.iter().zip(&want) {
                assert!((a - b).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn general_matrix_solves_normal_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_operator(15, &mut rng);
        let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        let n = normal_operator(&h).unwrap();
        let want = gauss_solve(&n, &ones(15));
        for (a, b) in r.v_complex.iter().zip(&want) {
            assert!((a - b).norm() <= 1e-8 * r.v_max);
        }
    }

    #[test]
    fn svd_and_eigen_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [5, 20, 33] {
            let h = random_operator(n, &mut rng);
            let a = solve_landscape(&h, EIG_RCOND).unwrap();
            let b = solve_landscape_normal(&h, EIG_RCOND).unwrap();
            for (x, y) in a.v_complex.iter().zip(&b.v_complex) {
                assert!((x - y).norm() <= 1e-8 * a.v_max);
            }
            assert_abs_diff_eq!(a.sigma_min, b.sigma_min, epsilon = 1e-12);
        }
    }

    #[test]
    fn scaling_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_operator(10, &mut rng);
        let base = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        for c in [0.01, 3.0, 250.0] {
            let scaled = solve_landscape(&h.scaled(c), DEFAULT_RCOND).unwrap();
            for (x, y) in scaled.v_complex.iter().zip(&base.v_complex) {
                assert!((x * (c * c) - y).norm() <= 1e-9 * base.v_max);
            }
            assert_eq!(scaled.argmax(), base.argmax());
            assert_abs_diff_eq!(scaled.soft_com, base.soft_com, epsilon = 1e-9);
        }
    }

    #[test]
    fn blow_up_near_singularity() {
        for eps in [1e-1, 1e-2, 1e-3, 1e-5] {
            let mut diag = vec![1.0; 6];
            diag[0] = eps;
            let h = Operator::from_real_diagonal(&diag, "eps").unwrap();
            let v_max = landscape_max_total(&h, DEFAULT_RCOND).unwrap();
            assert!((v_max * eps * eps - 1.0).abs() < 1e-9);
        }
        let h = Operator::from_real_diagonal(&[1e-3, 1.0], "eps").unwrap();
        assert!((landscape_max_total(&h, DEFAULT_RCOND).unwrap() - 1e6).abs() < 1e-3);
    }

    #[test]
    fn soft_center_examples() {
        let mut a = vec![0.0; 10];
        a[0] = 1.0;
        assert_eq!(soft_center_of_mass(&a).unwrap(), 1.0);
        assert_eq!(soft_center_of_mass(&[1.0; 11]).unwrap(), 6.0);
        assert_eq!(soft_center_of_mass(&[3.0, 1.0]).unwrap(), 1.25);
        assert!(matches!(soft_center_of_mass(&[0.0; 4]), Err(Error::Degenerate(_))));
        assert!(soft_center_of_mass(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn degenerate_and_bad_rcond() {
        let z = Operator::zeros(4).unwrap();
        let r = solve_landscape(&z, DEFAULT_RCOND).unwrap();
        assert!(r.degenerate);
        assert!(r.v_complex.iter().all(|x| x.norm() == 0.0));
        assert!(r.soft_com.is_nan());
        assert!(landscape_max_total(&z, DEFAULT_RCOND).is_err());
        let h = Operator::identity(3).unwrap();
        assert!(solve_landscape(&h, 0.0).is_err());
        assert!(solve_landscape(&h, 1.0).is_err());
    }

    #[test]
    fn hatano_nelson_profile_peaks_at_left_edge() {
        let h = hatano_nelson(120, 1.0, 0.9).unwrap();
        let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        assert!(r.argmax() < 5, "argmax {}", r.argmax());
        assert!(r.soft_com < 60.5);
        assert_eq!(r.discarded_rank, 0);
        assert!(r.norm_bound().holds);

        let h = hatano_nelson(120, 1.0, 1.0).unwrap();
        let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        assert_abs_diff_eq!(r.soft_com, 60.5, epsilon = 1e-6);
    }

    #[test]
    fn norm_bound_chain_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let n = rng.random_range(2..30);
            let h = random_operator(n, &mut rng);
            let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
            let b = r.norm_bound();
            assert!(b.holds, "{b:?}");
            assert!(b.v_max <= b.norm2 && b.norm2 <= b.bound * (1.0 + 1e-8));
        }
    }

    #[test]
    fn kernel_profile_marks_exact_zero_mode() {
        let cfg = SshConfig {
            variant: SshVariant::DomainWall,
            n_cells: 20,
            t_intra: 0.5,
            t_inter: 1.0,
        };
        let h = ssh(&cfg).unwrap();
        let r = solve_landscape(&h, DEFAULT_RCOND).unwrap();
        assert_eq!(r.discarded_rank, 1);
        let k = r.kernel_profile.as_ref().unwrap();
        assert_eq!(argmax(k), cfg.wall_site().unwrap());
        assert_eq!(argmax(r.peak_profile()), cfg.wall_site().unwrap());
    }

    #[test]
    fn eigenmode_bound_diagonal_and_m_matrix() {
        let h = Operator::from_real_diagonal(&[1.0, 2.0, 3.5], "d").unwrap();
        let rep = eigenmode_bound_report(&h, DEFAULT_RCOND).unwrap();
        assert_eq!(rep.len(), 3);
        for m in &rep {
            assert_abs_diff_eq!(m.max_ratio, 1.0, epsilon = 1e-12);
        }

        // Diagonally dominant chain with negative hopping: H^-1 and H^-2 are
        // entrywise positive, so every ratio is at most one.
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let diag: Vec<f64> = (0..40).map(|_| rng.random_range(2.5..4.5)).collect();
        let h = Operator::from_real_fn(40, "anderson", |i, j| {
            if i == j {
                diag[i]
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let rep = eigenmode_bound_report(&h, DEFAULT_RCOND).unwrap();
        assert_eq!(rep.len(), 40);
        assert!(rep.iter().all(ModeBound::holds), "{rep:?}");

        let hn = hatano_nelson(60, 1.0, 0.8).unwrap();
        let rep = eigenmode_bound_report(&hn, DEFAULT_RCOND).unwrap();
        assert_eq!(rep.len(), 60);
        assert!(rep.iter().all(|m| m.max_ratio.is_finite() && m.max_ratio > 0.0));

        assert!(eigenmode_bound_report(&Operator::zeros(3).unwrap(), DEFAULT_RCOND).is_err());
    }

    #[test]
    fn sambe_landscape_uses_site_marginal() {
        let s = build_sambe_mono(
            &two_level_static(1.0).unwrap(),
            &two_level_drive_mono(12.0).unwrap(),
            10.0,
            6,
        )
        .unwrap();
        let r = solve_sambe_landscape(&s, DEFAULT_RCOND).unwrap();
        assert_eq!(r.dim(), 26);
        assert_eq!(r.site_profile.len(), 2);
        let direct: Vec<f64> = (0..2)
            .map(|j| (0..13).map(|m| r.amplitude[j + 2 * m]).sum())
            .collect();
        for (a, b) in r.site_profile.iter().zip(&direct) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
        let want = (direct[0] + 2.0 * direct[1]) / (direct[0] + direct[1]);
        assert_abs_diff_eq!(r.soft_com, want, epsilon = 1e-12);
        let w = sambe_weight_profile(&r.v_complex, &s.index_map).unwrap();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), r.norm2().powi(2), epsilon = 1e-9 * r.norm2().powi(2));
    }
}
