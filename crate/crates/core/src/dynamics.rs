//! Time-domain propagation of the driven two-level system
//! `H(t) = -J sigma_x + s(t) sigma_z / 2`.

use std::f64::consts::PI;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::fold_quasienergy;
use crate::error::{Error, Result};

/// Default steps per shortest drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;

/// Coarsest step allowed, as a fraction of the shortest period.
pub const MIN_STEPS_PER_PERIOD: f64 = 200.0;

/// Tolerance on `U^dagger U = 1` for the one-period propagator.
pub const UNITARITY_TOL: f64 = 1e-8;

pub type State = [c64; 2];

/// `|L>`.
pub fn left_state() -> State {
    [c64::new(1.0, 0.0), c64::new(0.0, 0.0)]
}

/// `(sqrt(3) |L> + |R>) / 2`.
pub fn partial_left_state() -> State {
    [c64::new(0.75f64.sqrt(), 0.0), c64::new(0.5, 0.0)]
}

/// `s(t) = sum_i A_i cos(omega_i t)` together with the tunneling `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal {
    pub hopping: f64,
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
}

impl DriveSignal {
    pub fn new(hopping: f64, amplitudes: Vec<f64>, frequencies: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != frequencies.len() || frequencies.is_empty() {
            return Err(Error::Dimension(
                "drive needs one amplitude per frequency".into(),
            ));
        }
        if let Some(w) = frequencies.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Range(format!("drive frequency must be positive, got {w}")));
        }
        if !hopping.is_finite() || amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Range("drive parameters must be finite".into()));
        }
        Ok(Self {
            hopping,
            amplitudes,
            frequencies,
        })
    }

    pub fn mono(hopping: f64, amplitude: f64, omega: f64) -> Result<Self> {
        Self::new(hopping, vec![amplitude], vec![omega])
    }

    pub fn duo(hopping: f64, a: f64, b: f64, omega1: f64, omega2: f64) -> Result<Self> {
        Self::new(hopping, vec![a, b], vec![omega1, omega2])
    }

    pub fn signal(&self, t: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.frequencies)
            .map(|(a, w)| a * (w * t).cos())
            .sum()
    }

    /// `2 pi / omega_1`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.frequencies[0]
    }

    pub fn shortest_period(&self) -> f64 {
        2.0 * PI / self.frequencies.iter().copied().fold(0.0, f64::max)
    }

    pub fn default_dt(&self) -> f64 {
        self.shortest_period() / DEFAULT_STEPS_PER_PERIOD as f64
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        let limit = self.shortest_period() / MIN_STEPS_PER_PERIOD;
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Range(format!(
                "time step {dt} outside (0, {limit}] (shortest period / {MIN_STEPS_PER_PERIOD})"
            )));
        }
        Ok(())
    }

    /// `-i H(t) psi`.
    #[inline]
    fn rhs(&self, t: f64, psi: &State) -> State {
        let hz = 0.5 * self.signal(t);
        let j = self.hopping;
        // H = [[hz, -J], [-J, -hz]]
        let h0 = psi[0] * hz - psi[1] * j;
        let h1 = -psi[0] * j - psi[1] * hz;
        [c64::new(h0.im, -h0.re), c64::new(h1.im, -h1.re)]
    }

    fn rk4_step(&self, t: f64, h: f64, psi: &State) -> State {
        let add = |a: &State, k: &State, s: f64| [a[0] + k[0] * s, a[1] + k[1] * s];
        let k1 = self.rhs(t, psi);
        let k2 = self.rhs(t + 0.5 * h, &add(psi, &k1, 0.5 * h));
        let k3 = self.rhs(t + 0.5 * h, &add(psi, &k2, 0.5 * h));
        let k4 = self.rhs(t + h, &add(psi, &k3, h));
        let w = h / 6.0;
        [
            psi[0] + (k1[0] + (k2[0] + k3[0]) * 2.0 + k4[0]) * w,
            psi[1] + (k1[1] + (k2[1] + k3[1]) * 2.0 + k4[1]) * w,
        ]
    }
}

fn norm(psi: &State) -> f64 {
    (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt()
}

fn check_state(psi0: &State) -> Result<()> {
    let n = norm(psi0);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::Normalization(n));
    }
    Ok(())
}

/// Number of equal steps of length at most `dt` that land exactly on `t_end`.
fn step_count(t_end: f64, dt: f64) -> usize {
    ((t_end / dt) - 1e-9).ceil().max(1.0) as usize
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub p_left: Vec<f64>,
    /// `max_t | ||psi(t)|| - 1 |`; the integrator never renormalizes.
    pub max_norm_drift: f64,
    pub step: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory holds the initial state")
    }

    pub fn min_left_population(&self) -> f64 {
        self.p_left.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Fixed-step RK4 from `t = 0` to `t_end`. The step is shrunk slightly
/// below `dt` when needed so the last step lands on `t_end`.
pub fn propagate(drive: &DriveSignal, psi0: State, t_end: f64, dt: f64) -> Result<Trajectory> {
    drive.check_dt(dt)?;
    check_state(&psi0)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Range(format!("t_end must be positive, got {t_end}")));
    }
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut p_left = Vec::with_capacity(n + 1);
    let mut psi = psi0;
    let mut drift = 0.0_f64;
    times.push(0.0);
    states.push(psi);
    p_left.push(psi[0].norm_sqr());
    for k in 0..n {
        psi = drive.rk4_step(k as f64 * h, h, &psi);
        drift = drift.max((norm(&psi) - 1.0).abs());
        times.push((k + 1) as f64 * h);
        states.push(psi);
        p_left.push(psi[0].norm_sqr());
    }
    Ok(Trajectory {
        times,
        states,
        p_left,
        max_norm_drift: drift,
        step: h,
    })
}

/// Final state only, without storing the trajectory.
pub fn evolve(drive: &DriveSignal, psi0: State, t_end: f64, dt: f64) -> Result<State> {
    drive.check_dt(dt)?;
    check_state(&psi0)?;
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let mut psi = psi0;
    for k in 0..n {
        psi = drive.rk4_step(k as f64 * h, h, &psi);
    }
    Ok(psi)
}

/// Streaming result of a long propagation.
#[derive(Clone, Copy, Debug)]
pub struct PopulationSummary {
    pub min_left: f64,
    pub max_norm_drift: f64,
    pub final_state: State,
}

/// `min_t P_L(t)` over `n_periods` periods of the first frequency.
pub fn min_left_population(
    drive: &DriveSignal,
    psi0: State,
    n_periods: usize,
    dt: f64,
) -> Result<f64> {
    Ok(population_summary(drive, psi0, n_periods, dt)?.min_left)
}

pub fn population_summary(
    drive: &DriveSignal,
    psi0: State,
    n_periods: usize,
    dt: f64,
) -> Result<PopulationSummary> {
    if n_periods == 0 {
        return Err(Error::Range("need at least one period".into()));
    }
    drive.check_dt(dt)?;
    check_state(&psi0)?;
    let t_end = n_periods as f64 * drive.period();
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let mut psi = psi0;
    let mut min_left = psi[0].norm_sqr();
    let mut drift = 0.0_f64;
    for k in 0..n {
        psi = drive.rk4_step(k as f64 * h, h, &psi);
        min_left = min_left.min(psi[0].norm_sqr());
        drift = drift.max((norm(&psi) - 1.0).abs());
    }
    Ok(PopulationSummary {
        min_left,
        max_norm_drift: drift,
        final_state: psi,
    })
}

/// One-period propagator `U(T)`, columns are the evolved basis states.
pub fn monodromy(drive: &DriveSignal, dt: f64) -> Result<[[c64; 2]; 2]> {
    if drive.frequencies.len() != 1 {
        return Err(Error::Dimension(
            "monodromy needs a single-frequency drive".into(),
        ));
    }
    let t = drive.period();
    let c0 = evolve(drive, [c64::new(1.0, 0.0), c64::new(0.0, 0.0)], t, dt)?;
    let c1 = evolve(drive, [c64::new(0.0, 0.0), c64::new(1.0, 0.0)], t, dt)?;
    Ok([[c0[0], c1[0]], [c0[1], c1[1]]])
}

/// `max |(U^dagger U - I)_ij|`.
pub fn unitarity_defect(u: &[[c64; 2]; 2]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = c64::new(0.0, 0.0);
            for k in 0..2 {
                s += u[k][i].conj() * u[k][j];
            }
            if i == j {
                s -= c64::new(1.0, 0.0);
            }
            worst = worst.max(s.norm());
        }
    }
    worst
}

/// Eigenvalues of a 2x2 complex matrix.
pub fn eigenvalues_2x2(u: &[[c64; 2]; 2]) -> [c64; 2] {
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr - det * 4.0).sqrt();
    [(tr + disc) * 0.5, (tr - disc) * 0.5]
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Quasienergies {
    /// Ascending, each in `[-omega/2, omega/2)`.
    pub values: [f64; 2],
    pub moduli: [f64; 2],
    pub unitarity_defect: f64,
}

impl Quasienergies {
    /// Folded spacing `|e1 - e2|` on the quasienergy circle.
    pub fn gap(&self, omega: f64) -> f64 {
        crate::diagnostics::quasienergy_gap(self.values[0], self.values[1], omega)
    }

    pub fn min_abs(&self) -> f64 {
        self.values[0].abs().min(self.values[1].abs())
    }
}

/// `e = fold(-arg(mu) / T, omega)` for both eigenvalues `mu` of `U(T)`.
pub fn monodromy_quasienergies(drive: &DriveSignal, dt: f64) -> Result<Quasienergies> {
    let u = monodromy(drive, dt)?;
    let defect = unitarity_defect(&u);
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::Accuracy(format!(
            "one-period propagator deviates from unitarity by {defect:.3e} (> {UNITARITY_TOL:e}); reduce dt"
        )));
    }
    let t = drive.period();
    let omega = drive.frequencies[0];
    let mu = eigenvalues_2x2(&u);
    let mut values = [
        fold_quasienergy(-mu[0].arg() / t, omega),
        fold_quasienergy(-mu[1].arg() / t, omega),
    ];
    values.sort_by(f64::total_cmp);
    Ok(Quasienergies {
        values,
        moduli: [mu[0].norm(), mu[1].norm()],
        unitarity_defect: defect,
    })
}

/// Ratio `|psi_h - psi_{h/2}| / |psi_{h/2} - psi_{h/4}|` of final states,
/// close to 16 for a fourth-order scheme in its asymptotic regime.
pub fn step_halving_ratio(drive: &DriveSignal, psi0: State, t_end: f64, dt: f64) -> Result<f64> {
    let a = evolve(drive, psi0, t_end, dt)?;
    let b = evolve(drive, psi0, t_end, dt / 2.0)?;
    let c = evolve(drive, psi0, t_end, dt / 4.0)?;
    let d1 = norm(&[a[0] - b[0], a[1] - b[1]]);
    let d2 = norm(&[b[0] - c[0], b[1] - c[1]]);
    if d2 == 0.0 {
        return Err(Error::Degenerate("step halving produced identical states".into()));
    }
    Ok(d1 / d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::bessel_j0;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rabi_oscillation_without_drive() {
        let d = DriveSignal::mono(1.0, 0.0, 10.0).unwrap();
        let traj = propagate(&d, left_state(), 5.0, d.default_dt()).unwrap();
        for (t, p) in traj.times.iter().zip(&traj.p_left) {
            assert_abs_diff_eq!(*p, t.cos().powi(2), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(*traj.times.last().unwrap(), 5.0, epsilon = 1e-12);
        assert!(traj.max_norm_drift < 1e-12);
    }

    #[test]
    fn no_tunneling_freezes_population() {
        let d = DriveSignal::duo(0.0, 7.0, 3.0, 10.0, 10.0 * 2f64.sqrt()).unwrap();
        let traj = propagate(&d, left_state(), 3.0, d.default_dt()).unwrap();
        assert!(traj.p_left.iter().all(|p| (p - 1.0).abs() < 1e-12));
        let m = min_left_population(&d, left_state(), 5, d.default_dt()).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_transfer_without_drive() {
        let d = DriveSignal::mono(1.0, 0.0, 10.0).unwrap();
        // 3 periods of 2 pi / 10 cover more than a quarter Rabi cycle (pi/2).
        let m = min_left_population(&d, left_state(), 3, d.default_dt()).unwrap();
        assert!(m < 1e-6, "{m}");
    }

    #[test]
    fn partial_state_starts_at_three_quarters() {
        let psi = partial_left_state();
        assert_abs_diff_eq!(psi[0].norm_sqr(), 0.75, epsilon = 1e-15);
        let d = DriveSignal::mono(1.0, 12.0, 10.0).unwrap();
        let m = min_left_population(&d, psi, 10, d.default_dt()).unwrap();
        assert!(m <= 0.75);
    }

    #[test]
    fn cdt_freezes_tunneling() {
        // Omega >> J: the crossing sits at the J0 zero up to O((J/Omega)^2).
        let omega = 40.0;
        let a = 2.404825557695773 * omega;
        let d = DriveSignal::mono(1.0, a, omega).unwrap();
        let m = min_left_population(&d, left_state(), 100, d.default_dt()).unwrap();
        assert!(m >= 0.9, "min P_L = {m}");
        // Off resonance the effective hopping J J0(A/omega) transfers population.
        let d = DriveSignal::mono(1.0, 1.0 * omega, omega).unwrap();
        let m = min_left_population(&d, left_state(), 100, d.default_dt()).unwrap();
        assert!(m < 0.1, "min P_L = {m}");
    }

    #[test]
    fn static_quasienergies() {
        let d = DriveSignal::mono(1.0, 0.0, 10.0).unwrap();
        let q = monodromy_quasienergies(&d, d.default_dt()).unwrap();
        assert_abs_diff_eq!(q.values[0], -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(q.values[1], 1.0, epsilon = 1e-10);
        for m in q.moduli {
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-8);
        }
        let d = DriveSignal::mono(3.0, 0.0, 4.0).unwrap();
        let q = monodromy_quasienergies(&d, d.default_dt()).unwrap();
        let mut want = [fold_quasienergy(-3.0, 4.0), fold_quasienergy(3.0, 4.0)];
        want.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(q.values[0], want[0], epsilon = 1e-9);
        assert_abs_diff_eq!(q.values[1], want[1], epsilon = 1e-9);
    }

    #[test]
    fn gap_follows_effective_hopping() {
        // High-frequency limit: e = +-J J0(A/omega).
        let omega = 10.0;
        for x in [0.5, 1.5, 2.404825557695773, 4.0] {
            let d = DriveSignal::mono(1.0, x * omega, omega).unwrap();
            let q = monodromy_quasienergies(&d, d.default_dt()).unwrap();
            let want = 2.0 * bessel_j0(x).unwrap().abs();
            assert!((q.gap(omega) - want).abs() < 0.02, "x={x}: {} vs {want}", q.gap(omega));
        }
        let d = DriveSignal::mono(1.0, 2.404825557695773 * omega, omega).unwrap();
        let q = monodromy_quasienergies(&d, d.default_dt()).unwrap();
        assert!(q.gap(omega) <= 0.02);
    }

    #[test]
    fn norm_drift_and_convergence_order() {
        let omega = 10.0;
        let d = DriveSignal::mono(1.0, 10.0 * omega, omega).unwrap();
        let s = population_summary(&d, left_state(), 100, d.default_dt()).unwrap();
        assert!(s.max_norm_drift <= 1e-7, "{}", s.max_norm_drift);

        let d = DriveSignal::mono(1.0, 2.4 * omega, omega).unwrap();
        let r = step_halving_ratio(&d, left_state(), 10.0 * d.period(), d.shortest_period() / 200.0)
            .unwrap();
        assert!((12.0..=20.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn preconditions() {
        let d = DriveSignal::mono(1.0, 1.0, 10.0).unwrap();
        assert!(matches!(
            propagate(&d, left_state(), 1.0, d.period() / 100.0),
            Err(Error::Range(_))
        ));
        assert!(propagate(&d, [c64::new(1.0, 0.0); 2], 1.0, d.default_dt()).is_err());
        assert!(DriveSignal::mono(1.0, 1.0, 0.0).is_err());
        let duo = DriveSignal::duo(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!(monodromy(&duo, duo.default_dt()).is_err());
        assert!(min_left_population(&d, left_state(), 0, d.default_dt()).is_err());
    }

    #[test]
    fn coarse_step_is_rejected_by_unitarity_check() {
        // At the coarsest admissible step with a huge drive the RK4 map is
        // far from unitary.
        let d = DriveSignal::mono(1.0, 4000.0, 10.0).unwrap();
        let r = monodromy_quasienergies(&d, d.shortest_period() / 200.0);
        assert!(matches!(r, Err(Error::Accuracy(_))), "{r:?}");
    }
}
