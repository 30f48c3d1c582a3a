//! Extended-space (Sambe) operators for one or two drive frequencies.

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Operator;
use crate::models::FourierDrive;

/// Default harmonic truncation for each drive frequency.
pub const DEFAULT_TRUNCATION: u32 = 6;

/// Bookkeeping between flat indices and `(site, harmonics...)` tuples.
///
/// The site index runs fastest, then the first harmonic, then the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SambeIndexMap {
    base_dim: usize,
    truncations: Vec<u32>,
}

impl SambeIndexMap {
    pub fn new(base_dim: usize, truncations: Vec<u32>) -> Result<Self> {
        if base_dim == 0 || truncations.is_empty() {
            return Err(Error::Dimension(
                "Sambe space needs a site dimension and at least one frequency".into(),
            ));
        }
        Ok(Self {
            base_dim,
            truncations,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn truncations(&self) -> &[u32] {
        &self.truncations
    }

    /// Number of harmonic tuples, `prod (2 M_i + 1)`.
    pub fn replicas(&self) -> usize {
        self.truncations.iter().map(|&m| 2 * m as usize + 1).product()
    }

    pub fn flat_dim(&self) -> usize {
        self.base_dim * self.replicas()
    }

    /// Position of a harmonic tuple in `0..replicas()`, or `None` outside the window.
    pub fn harmonic_slot(&self, harmonics: &[i32]) -> Option<usize> {
        if harmonics.len() != self.truncations.len() {
            return None;
        }
        let mut slot = 0usize;
        let mut stride = 1usize;
        for (&m, &cap) in harmonics.iter().zip(&self.truncations) {
            if m.unsigned_abs() > cap {
                return None;
            }
            slot += (m + cap as i32) as usize * stride;
            stride *= 2 * cap as usize + 1;
        }
        Some(slot)
    }

    pub fn harmonics_of_slot(&self, mut slot: usize) -> Vec<i32> {
        self.truncations
            .iter()
            .map(|&cap| {
                let width = 2 * cap as usize + 1;
                let m = (slot % width) as i32 - cap as i32;
                slot /= width;
                m
            })
            .collect()
    }

    pub fn flatten(&self, site: usize, harmonics: &[i32]) -> Result<usize> {
        if site >= self.base_dim {
            return Err(Error::Dimension(format!(
                "site {site} outside 0..{}",
                self.base_dim
            )));
        }
        let slot = self.harmonic_slot(harmonics).ok_or_else(|| {
            Error::Dimension(format!(
                "harmonics {harmonics:?} outside truncation {:?}",
                self.truncations
            ))
        })?;
        Ok(site + self.base_dim * slot)
    }

    pub fn unflatten(&self, index: usize) -> Result<(usize, Vec<i32>)> {
        if index >= self.flat_dim() {
            return Err(Error::Dimension(format!(
                "flat index {index} outside 0..{}",
                self.flat_dim()
            )));
        }
        Ok((
            index % self.base_dim,
            self.harmonics_of_slot(index / self.base_dim),
        ))
    }

    /// All harmonic tuples in slot order.
    pub fn harmonic_tuples(&self) -> Vec<Vec<i32>> {
        (0..self.replicas()).map(|s| self.harmonics_of_slot(s)).collect()
    }
}

/// Truncated Sambe matrix with its index map and drive frequencies.
#[derive(Clone, Debug)]
pub struct SambeOperator {
    pub matrix: Operator,
    pub index_map: SambeIndexMap,
    pub frequencies: Vec<f64>,
    pub hbar: f64,
    /// True when some drive harmonics fell outside the window.
    pub truncated: bool,
}

impl SambeOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Diagonal shift `hbar sum_i m_i omega_i` of a harmonic tuple.
    pub fn shift(&self, harmonics: &[i32]) -> f64 {
        self.hbar
            * harmonics
                .iter()
                .zip(&self.frequencies)
                .map(|(&m, &w)| m as f64 * w)
                .sum::<f64>()
    }

    /// Copy of block `(m, m')` as an `N x N` matrix.
    pub fn block(&self, m: &[i32], m_prime: &[i32]) -> Result<Mat<c64>> {
        let n = self.index_map.base_dim();
        let r = self.index_map.flatten(0, m)?;
        let c = self.index_map.flatten(0, m_prime)?;
        Ok(Mat::from_fn(n, n, |i, j| self.matrix.get(r + i, c + j)))
    }
}

/// Sambe operator for an arbitrary number of frequencies.
///
/// Block `(m, m')` is `drive[m - m']` plus `hbar (m . omega) I + H0` on the
/// diagonal. Drive harmonics that cannot couple any pair inside the window
/// are dropped and noted in the label.
pub fn build_sambe(
    h0: &Operator,
    drive: &FourierDrive,
    frequencies: &[f64],
    truncations: &[u32],
) -> Result<SambeOperator> {
    let n = h0.dim();
    if drive.base_dim() != n {
        return Err(Error::Dimension(format!(
            "drive acts on dimension {}, static part on {n}",
            drive.base_dim()
        )));
    }
    if frequencies.len() != drive.n_modes() || truncations.len() != drive.n_modes() {
        return Err(Error::Dimension(format!(
            "drive has {} frequencies, got {} frequencies and {} truncations",
            drive.n_modes(),
            frequencies.len(),
            truncations.len()
        )));
    }
    if let Some(w) = frequencies.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::Range(format!("drive frequency must be positive, got {w}")));
    }
    let map = SambeIndexMap::new(n, truncations.to_vec())?;
    let hbar = 1.0;
    let d = map.flat_dim();
    let tuples = map.harmonic_tuples();
    let mut entries = Mat::<c64>::zeros(d, d);

    let truncated = drive.blocks().any(|(key, _)| {
        key.iter()
            .zip(truncations)
            .any(|(&k, &cap)| k.unsigned_abs() > 2 * cap)
    });

    for (slot, m) in tuples.iter().enumerate() {
        let row0 = slot * n;
        let shift: f64 = hbar
            * m.iter()
                .zip(frequencies)
                .map(|(&mi, &w)| mi as f64 * w)
                .sum::<f64>();
        for i in 0..n {
            for j in 0..n {
                entries[(row0 + i, row0 + j)] = h0.get(i, j);
            }
            entries[(row0 + i, row0 + i)] += c64::new(shift, 0.0);
        }
        for (key, block) in drive.blocks() {
            let partner: Vec<i32> = m.iter().zip(key).map(|(a, k)| a - k).collect();
            let Some(col_slot) = map.harmonic_slot(&partner) else {
                continue;
            };
            let col0 = col_slot * n;
            for i in 0..n {
                for j in 0..n {
                    entries[(row0 + i, col0 + j)] += block.get(i, j);
                }
            }
        }
    }

    let mut label = format!(
        "Sambe[{}; omega={frequencies:?}, M={truncations:?}]",
        h0.label()
    );
    if truncated {
        label.push_str(" (harmonics beyond the window truncated)");
    }
    Ok(SambeOperator {
        matrix: Operator::new(entries, label)?,
        index_map: map,
        frequencies: frequencies.to_vec(),
        hbar,
        truncated,
    })
}

/// Single-frequency Sambe operator of dimension `N (2M + 1)`.
pub fn build_sambe_mono(
    h0: &Operator,
    drive: &FourierDrive,
    omega: f64,
    truncation: u32,
) -> Result<SambeOperator> {
    build_sambe(h0, drive, &[omega], &[truncation])
}

/// Two-frequency Sambe operator of dimension `N (2M1 + 1)(2M2 + 1)`.
pub fn build_sambe_duo(
    h0: &Operator,
    drive: &FourierDrive,
    omega1: f64,
    omega2: f64,
    m1: u32,
    m2: u32,
) -> Result<SambeOperator> {
    build_sambe(h0, drive, &[omega1, omega2], &[m1, m2])
}

/// `w(j) = sum_m |psi(j, m)|^2`.
pub fn sambe_weight_profile(vec: &[c64], map: &SambeIndexMap) -> Result<Vec<f64>> {
    marginalize(vec, map, |z| z.norm_sqr())
}

/// `a(j) = sum_m |psi(j, m)|`, the spatial profile of a landscape amplitude.
pub fn sambe_amplitude_profile(vec: &[c64], map: &SambeIndexMap) -> Result<Vec<f64>> {
    marginalize(vec, map, |z| z.norm())
}

fn marginalize(vec: &[c64], map: &SambeIndexMap, f: impl Fn(c64) -> f64) -> Result<Vec<f64>> {
    if vec.len() != map.flat_dim() {
        return Err(Error::Dimension(format!(
            "vector length {} does not match Sambe dimension {}",
            vec.len(),
            map.flat_dim()
        )));
    }
    let n = map.base_dim();
    let mut out = vec![0.0; n];
    for (k, z) in vec.iter().enumerate() {
        out[k % n] += f(*z);
    }
    Ok(out)
}

/// Restriction of a Sambe vector to one harmonic tuple.
pub fn harmonic_sector(vec: &[c64], map: &SambeIndexMap, harmonics: &[i32]) -> Result<Vec<c64>> {
    let start = map.flatten(0, harmonics)?;
    if vec.len() != map.flat_dim() {
        return Err(Error::Dimension("vector length does not match Sambe dimension".into()));
    }
    Ok(vec[start..start + map.base_dim()].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvals_hermitian, vec_norm};
    use crate::models::{two_level_drive_duo, two_level_drive_mono, two_level_static};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn index_map_bijection() {
        for truncs in [vec![0], vec![3], vec![2, 1], vec![0, 4]] {
            let map = SambeIndexMap::new(3, truncs.clone()).unwrap();
            let expected: usize = 3 * truncs.iter().map(|&m| 2 * m as usize + 1).product::<usize>();
            assert_eq!(map.flat_dim(), expected);
            for k in 0..map.flat_dim() {
                let (j, m) = map.unflatten(k).unwrap();
                assert_eq!(map.flatten(j, &m).unwrap(), k);
            }
        }
        let map = SambeIndexMap::new(2, vec![6]).unwrap();
        assert_eq!(map.flat_dim(), 26);
        assert!(map.flatten(0, &[7]).is_err());
        assert!(map.flatten(2, &[0]).is_err());
        assert!(map.unflatten(26).is_err());
        // Site fastest, then m1, then m2.
        let map = SambeIndexMap::new(2, vec![1, 1]).unwrap();
        assert_eq!(map.flatten(1, &[-1, -1]).unwrap(), 1);
        assert_eq!(map.flatten(0, &[0, -1]).unwrap(), 2);
        assert_eq!(map.flatten(0, &[-1, 0]).unwrap(), 6);
    }

    #[test]
    fn replica_ladder_without_drive() {
        let h0 = Operator::from_real_rows(&[&[0.3]], "e0").unwrap();
        let drive = FourierDrive::undriven(1, 1).unwrap();
        let s = build_sambe_mono(&h0, &drive, 1.0, 1).unwrap();
        for (k, want) in [-0.7, 0.3, 1.3].into_iter().enumerate() {
            for l in 0..3 {
                let z = s.matrix.get(k, l);
                assert_eq!(z, if k == l { c64::new(want, 0.0) } else { c64::new(0.0, 0.0) });
            }
        }

        let h0 = two_level_static(1.0).unwrap();
        let s = build_sambe_mono(&h0, &two_level_drive_mono(0.0).unwrap(), 3.0, 2).unwrap();
        let vals = eigvals_hermitian(&s.matrix).unwrap();
        let mut want: Vec<f64> = (-2..=2)
            .flat_map(|m| [-1.0 + 3.0 * m as f64, 1.0 + 3.0 * m as f64])
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn two_level_matches_hand_assembled_matrix() {
        let (j, a, w) = (1.0, 4.0, 10.0);
        let s = build_sambe_mono(
            &two_level_static(j).unwrap(),
            &two_level_drive_mono(a).unwrap(),
            w,
            1,
        )
        .unwrap();
        let q = a / 4.0;
        let mut want = [[0.0f64; 6]; 6];
        for (slot, m) in [-1.0, 0.0, 1.0].iter().enumerate() {
            let r = 2 * slot;
            want[r][r] = m * w;
            want[r + 1][r + 1] = m * w;
            want[r][r + 1] = -j;
            want[r + 1][r] = -j;
        }
        for slot in 0..2 {
            let r = 2 * slot;
            for (x, y) in [(r, r + 2), (r + 2, r)] {
                want[x][y] = q;
                want[x + 1][y + 1] = -q;
            }
        }
        for r in 0..6 {
            for c in 0..6 {
                assert_eq!(s.matrix.get(r, c), c64::new(want[r][c], 0.0), "({r},{c})");
            }
        }
        assert!(!s.truncated);
    }

    #[test]
    fn blocks_follow_harmonic_difference() {
        let h0 = two_level_static(1.0).unwrap();
        let drive = two_level_drive_duo(3.0, 5.0).unwrap();
        let s = build_sambe_duo(&h0, &drive, 1.0, 2f64.sqrt(), 2, 2).unwrap();
        let map = &s.index_map;
        for m in map.harmonic_tuples() {
            for mp in map.harmonic_tuples() {
                let blk = s.block(&m, &mp).unwrap();
                let diff = vec![m[0] - mp[0], m[1] - mp[1]];
                for i in 0..2 {
                    for jj in 0..2 {
                        let mut want = c64::new(0.0, 0.0);
                        if m == mp {
                            want = h0.get(i, jj);
                            if i == jj {
                                want += c64::new(s.shift(&m), 0.0);
                            }
                        } else if let Some(b) = drive.block(&diff) {
                            want = b.get(i, jj);
                        }
                        assert!((blk[(i, jj)] - want).norm() < 1e-15);
                    }
                }
            }
        }
        assert!(s.matrix.is_hermitian(1e-12));
    }

    #[test]
    fn duo_reduces_to_mono_when_second_axis_is_trivial() {
        let h0 = two_level_static(1.0).unwrap();
        let mono = build_sambe_mono(&h0, &two_level_drive_mono(7.5).unwrap(), 10.0, 4).unwrap();
        let duo = build_sambe_duo(
            &h0,
            &two_level_drive_duo(7.5, 0.0).unwrap(),
            10.0,
            10.0 * 2f64.sqrt(),
            4,
            0,
        )
        .unwrap();
        assert_eq!(mono.dim(), duo.dim());
        for r in 0..mono.dim() {
            for c in 0..mono.dim() {
                assert_eq!(mono.matrix.get(r, c), duo.matrix.get(r, c));
            }
        }
    }

    #[test]
    fn incommensurate_shifts_are_distinct() {
        let w1 = 1.0;
        let w2 = 2f64.sqrt();
        let mut shifts = Vec::new();
        for m1 in -3..=3 {
            for m2 in -3..=3 {
                shifts.push(m1 as f64 * w1 + m2 as f64 * w2);
            }
        }
        shifts.sort_by(f64::total_cmp);
        let min_gap = shifts.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
        assert!(min_gap > 1e-3, "min gap {min_gap}");

        let h0 = Operator::from_real_rows(&[&[0.0]], "0").unwrap();
        let s = build_sambe_duo(&h0, &FourierDrive::undriven(1, 2).unwrap(), w1, w2, 3, 3).unwrap();
        let vals = eigvals_hermitian(&s.matrix).unwrap();
        for (a, b) in vals.iter().zip(&shifts) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn far_harmonics_are_truncated_with_note() {
        let h0 = two_level_static(1.0).unwrap();
        let mut drive = two_level_drive_mono(1.0).unwrap();
        let far = Operator::identity(2).unwrap();
        drive.insert(vec![5], far.clone()).unwrap();
        drive.insert(vec![-5], far).unwrap();
        let s = build_sambe_mono(&h0, &drive, 10.0, 2).unwrap();
        assert!(s.truncated);
        assert!(s.matrix.label().contains("truncated"));
        let s = build_sambe_mono(&h0, &drive, 10.0, 3).unwrap();
        assert!(!s.truncated);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h0 = two_level_static(1.0).unwrap();
        let d = two_level_drive_mono(1.0).unwrap();
        assert!(build_sambe_mono(&h0, &d, 0.0, 2).is_err());
        assert!(build_sambe_duo(&h0, &d, 1.0, 1.0, 2, 2).is_err());
        let h3 = Operator::identity(3).unwrap();
        assert!(build_sambe_mono(&h3, &d, 1.0, 2).is_err());
    }

    #[test]
    fn weight_profile_cases() {
        let map = SambeIndexMap::new(5, vec![2]).unwrap();
        let mut e = vec![c64::new(0.0, 0.0); map.flat_dim()];
        e[map.flatten(2, &[0]).unwrap()] = c64::new(1.0, 0.0);
        let w = sambe_weight_profile(&e, &map).unwrap();
        assert_eq!(w, vec![0.0, 0.0, 1.0, 0.0, 0.0]);

        let u = vec![c64::new(0.5, 0.0); map.flat_dim()];
        let norm2 = vec_norm(&u).powi(2);
        for x in sambe_weight_profile(&u, &map).unwrap() {
            assert!((x - 5.0 / 25.0 * norm2).abs() < 1e-14);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let map = SambeIndexMap::new(4, vec![3, 2]).unwrap();
        let v: Vec<c64> = (0..map.flat_dim())
            .map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let direct: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let total: f64 = sambe_weight_profile(&v, &map).unwrap().iter().sum();
        assert!((total - direct).abs() < 1e-12);
        assert!(sambe_weight_profile(&v[1..], &map).is_err());
    }
}
