//! Tight-binding Hamiltonians and periodic drives.
//!
//! Sites are stored 0-based; every center-of-mass formula elsewhere in the
//! crate converts to the 1-based site label `j = index + 1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Operator;

/// Fourier components `H_m` of a time-periodic Hamiltonian
/// `H(t) = sum_m H_m exp(i m . omega t)`.
///
/// Keys are harmonic index vectors with one entry per drive frequency.
#[derive(Clone, Debug)]
pub struct FourierDrive {
    base_dim: usize,
    n_modes: usize,
    blocks: BTreeMap<Vec<i32>, Operator>,
}

impl FourierDrive {
    pub fn new(base_dim: usize, n_modes: usize) -> Result<Self> {
        if base_dim == 0 || n_modes == 0 {
            return Err(Error::Dimension(
                "drive needs a positive base dimension and at least one frequency".into(),
            ));
        }
        Ok(Self {
            base_dim,
            n_modes,
            blocks: BTreeMap::new(),
        })
    }

    /// A drive with no harmonics.
    pub fn undriven(base_dim: usize, n_modes: usize) -> Result<Self> {
        Self::new(base_dim, n_modes)
    }

    pub fn insert(&mut self, key: Vec<i32>, block: Operator) -> Result<()> {
        if key.len() != self.n_modes {
            return Err(Error::Dimension(format!(
                "harmonic key {key:?} needs {} entries",
                self.n_modes
            )));
        }
        if key.iter().all(|&m| m == 0) {
            return Err(Error::Dimension(
                "the zero harmonic belongs to the static Hamiltonian".into(),
            ));
        }
        if block.dim() != self.base_dim {
            return Err(Error::Dimension(format!(
                "drive block has dimension {}, expected {}",
                block.dim(),
                self.base_dim
            )));
        }
        self.blocks.insert(key, block);
        Ok(())
    }

    pub fn block(&self, key: &[i32]) -> Option<&Operator> {
        self.blocks.get(key)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&Vec<i32>, &Operator)> {
        self.blocks.iter()
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Largest harmonic order along each frequency axis.
    pub fn max_orders(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.n_modes];
        for key in self.blocks.keys() {
            for (o, &m) in out.iter_mut().zip(key) {
                *o = (*o).max(m.unsigned_abs());
            }
        }
        out
    }

    /// True when `block(-m) == block(m)^dagger` entrywise for every key,
    /// the condition for a real (Hermitian) drive.
    pub fn is_conjugate_symmetric(&self) -> bool {
        self.blocks.iter().all(|(key, block)| {
            let neg: Vec<i32> = key.iter().map(|m| -m).collect();
            match self.blocks.get(&neg) {
                Some(other) => {
                    let n = self.base_dim;
                    (0..n).all(|i| (0..n).all(|j| other.get(i, j) == block.get(j, i).conj()))
                }
                None => false,
            }
        })
    }
}

/// Site positions used for peak grouping and distance checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Chain { sites: usize },
    /// Row-major square lattice, index = x + width * y.
    Square { width: usize, height: usize },
    /// Lattice sites replicated over harmonics; positions ignore the harmonic.
    Sambe { sites: usize, replicas: usize },
}

impl Geometry {
    pub fn len(&self) -> usize {
        match *self {
            Geometry::Chain { sites } => sites,
            Geometry::Square { width, height } => width * height,
            Geometry::Sambe { sites, replicas } => sites * replicas,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integer coordinates of a site.
    pub fn coords(&self, index: usize) -> (i64, i64) {
        match *self {
            Geometry::Chain { .. } => (index as i64, 0),
            Geometry::Square { width, .. } => ((index % width) as i64, (index / width) as i64),
            Geometry::Sambe { sites, .. } => ((index % sites) as i64, 0),
        }
    }

    /// Chebyshev distance between two sites.
    pub fn distance(&self, a: usize, b: usize) -> i64 {
        let (xa, ya) = self.coords(a);
        let (xb, yb) = self.coords(b);
        (xa - xb).abs().max((ya - yb).abs())
    }
}

/// Open-boundary Hatano-Nelson chain: `t_right` on the subdiagonal,
/// `t_left` on the superdiagonal.
pub fn hatano_nelson(n: usize, t_left: f64, t_right: f64) -> Result<Operator> {
    if n < 2 {
        return Err(Error::Dimension(format!("Hatano-Nelson chain needs N >= 2, got {n}")));
    }
    Operator::from_real_fn(n, format!("HN(N={n},tL={t_left},tR={t_right})"), |i, j| {
        if i == j + 1 {
            t_right
        } else if j == i + 1 {
            t_left
        } else {
            0.0
        }
    })
}

/// Aubry-Andre-Harper onsite profile `cos(2 pi alpha n + theta)` for n = 1..N.
pub fn aah_profile(n: usize, alpha: f64, theta: f64) -> Vec<f64> {
    (1..=n)
        .map(|site| (2.0 * PI * alpha * site as f64 + theta).cos())
        .collect()
}

/// Static Aubry-Andre-Harper chain with hopping `-J` and onsite
/// `lambda0 cos(2 pi alpha n + theta)`.
pub fn aah_static(n: usize, hopping: f64, lambda0: f64, alpha: f64, theta: f64) -> Result<Operator> {
    if n < 2 {
        return Err(Error::Dimension(format!("AAH chain needs N >= 2, got {n}")));
    }
    let onsite = aah_profile(n, alpha, theta);
    Operator::from_real_fn(
        n,
        format!("AAH(N={n},J={hopping},l0={lambda0},alpha={alpha},theta={theta})"),
        |i, j| {
            if i == j {
                lambda0 * onsite[i]
            } else if i.abs_diff(j) == 1 {
                -hopping
            } else {
                0.0
            }
        },
    )
}

/// Onsite modulation `A cos(omega t) sum_n cos(2 pi alpha n + theta) |n><n|`.
pub fn aah_drive(n: usize, amplitude: f64, alpha: f64, theta: f64) -> Result<FourierDrive> {
    let half: Vec<f64> = aah_profile(n, alpha, theta)
        .into_iter()
        .map(|c| 0.5 * amplitude * c)
        .collect();
    let mut drive = FourierDrive::new(n, 1)?;
    for m in [1, -1] {
        drive.insert(
            vec![m],
            Operator::from_real_diagonal(&half, format!("AAH drive H_{m}"))?,
        )?;
    }
    Ok(drive)
}

fn sigma_z(scale: f64, label: String) -> Result<Operator> {
    Operator::from_real_diagonal(&[scale, -scale], label)
}

/// `-J sigma_x` in the (|L>, |R>) basis.
pub fn two_level_static(hopping: f64) -> Result<Operator> {
    if !(hopping > 0.0) {
        return Err(Error::Range(format!("two-level tunneling J must be positive, got {hopping}")));
    }
    Operator::from_real_rows(&[&[0.0, -hopping], &[-hopping, 0.0]], format!("-{hopping} sx"))
}

/// Fourier blocks of `A cos(Omega t) sigma_z / 2`.
pub fn two_level_drive_mono(amplitude: f64) -> Result<FourierDrive> {
    if amplitude < 0.0 {
        return Err(Error::Range(format!("drive amplitude must be >= 0, got {amplitude}")));
    }
    let mut drive = FourierDrive::new(2, 1)?;
    for m in [1, -1] {
        drive.insert(vec![m], sigma_z(amplitude / 4.0, format!("(A/4) sz [{m}]"))?)?;
    }
    Ok(drive)
}

/// Fourier blocks of `[A cos(Omega_1 t) + B cos(Omega_2 t)] sigma_z / 2`,
/// keyed by harmonic pairs `(m1, m2)`.
pub fn two_level_drive_duo(a: f64, b: f64) -> Result<FourierDrive> {
    if a < 0.0 || b < 0.0 {
        return Err(Error::Range(format!("drive amplitudes must be >= 0, got ({a}, {b})")));
    }
    let mut drive = FourierDrive::new(2, 2)?;
    for m in [1, -1] {
        drive.insert(vec![m, 0], sigma_z(a / 4.0, format!("(A/4) sz [{m},0]"))?)?;
        drive.insert(vec![0, m], sigma_z(b / 4.0, format!("(B/4) sz [0,{m}]"))?)?;
    }
    Ok(drive)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SshVariant {
    Topological,
    Trivial,
    DomainWall,
}

impl fmt::Display for SshVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SshVariant::Topological => "topological",
            SshVariant::Trivial => "trivial",
            SshVariant::DomainWall => "domain_wall",
        })
    }
}

impl FromStr for SshVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topological" => Ok(SshVariant::Topological),
            "trivial" => Ok(SshVariant::Trivial),
            "domain_wall" | "domain-wall" => Ok(SshVariant::DomainWall),
            other => Err(Error::config(format!(
                "unknown SSH variant `{other}` (expected topological, trivial or domain_wall)"
            ))),
        }
    }
}

/// Su-Schrieffer-Heeger chain configuration.
///
/// `topological` needs |t_intra| < |t_inter| and `trivial` the reverse. The
/// domain wall uses the weaker hopping as the intra-cell bond on the
/// topological side and the stronger one on the trivial side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SshConfig {
    pub variant: SshVariant,
    pub n_cells: usize,
    pub t_intra: f64,
    pub t_inter: f64,
}

impl SshConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 2 {
            return Err(Error::config(format!("SSH needs n_cells >= 2, got {}", self.n_cells)));
        }
        if self.t_intra == 0.0 || self.t_inter == 0.0 {
            return Err(Error::config("SSH hoppings must be nonzero"));
        }
        let (a, b) = (self.t_intra.abs(), self.t_inter.abs());
        match self.variant {
            SshVariant::Topological if a >= b => Err(Error::config(
                "topological SSH requires |t_intra| < |t_inter|",
            )),
            SshVariant::Trivial if a <= b => Err(Error::config(
                "trivial SSH requires |t_intra| > |t_inter|",
            )),
            SshVariant::DomainWall if a == b => Err(Error::config(
                "domain wall requires distinct hopping magnitudes",
            )),
            _ => Ok(()),
        }
    }

    pub fn n_sites(&self) -> usize {
        match self.variant {
            SshVariant::DomainWall => 2 * self.n_cells - 1,
            _ => 2 * self.n_cells,
        }
    }

    /// Bond amplitudes along the chain, bond `k` joining sites `k` and `k+1`.
    pub fn bonds(&self) -> Vec<f64> {
        match self.variant {
            SshVariant::Topological | SshVariant::Trivial => (0..2 * self.n_cells - 1)
                .map(|k| if k % 2 == 0 { self.t_intra } else { self.t_inter })
                .collect(),
            SshVariant::DomainWall => {
                let (weak, strong) = if self.t_intra.abs() < self.t_inter.abs() {
                    (self.t_intra, self.t_inter)
                } else {
                    (self.t_inter, self.t_intra)
                };
                let left = self.n_cells / 2;
                let right = self.n_cells - 1 - left;
                let mut bonds = Vec::with_capacity(2 * (left + right));
                for _ in 0..left {
                    bonds.extend([strong, weak]);
                }
                for _ in 0..right {
                    bonds.extend([weak, strong]);
                }
                bonds
            }
        }
    }

    /// 0-based index of the shared interface site (domain wall only).
    pub fn wall_site(&self) -> Option<usize> {
        (self.variant == SshVariant::DomainWall).then_some(2 * (self.n_cells / 2))
    }
}

/// SSH Hamiltonian with real hoppings `-t` on each bond, open boundaries.
pub fn ssh(config: &SshConfig) -> Result<Operator> {
    config.validate()?;
    let n = config.n_sites();
    let bonds = config.bonds();
    Operator::from_real_fn(
        n,
        format!(
            "SSH({},cells={},intra={},inter={})",
            config.variant, config.n_cells, config.t_intra, config.t_inter
        ),
        |i, j| {
            if j == i + 1 {
                -bonds[i]
            } else if i == j + 1 {
                -bonds[j]
            } else {
                0.0
            }
        },
    )
}

/// Sublattice operator `diag(+1, -1, +1, ...)` for a bipartite chain.
pub fn chain_sublattice(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Benalcazar-Bernevig-Hughes quadrupole model on `n_x x n_y` cells of four
/// sites, open boundaries.
///
/// Sites form a `2 n_x x 2 n_y` square lattice, index `x + 2 n_x y`. Bonds
/// inside a cell carry `gamma`, bonds between cells carry `lambda`; every
/// x-bond on an odd row is sign-flipped so each plaquette encloses pi flux.
pub fn bbh(n_x: usize, n_y: usize, gamma: f64, lambda: f64) -> Result<Operator> {
    if n_x < 2 || n_y < 2 {
        return Err(Error::Dimension(format!("BBH needs n_x, n_y >= 2, got {n_x}x{n_y}")));
    }
    let width = 2 * n_x;
    let height = 2 * n_y;
    let n = width * height;
    let mut entries = faer::Mat::<c64>::zeros(n, n);
    let amp = |pos: usize| if pos % 2 == 0 { gamma } else { lambda };
    for y in 0..height {
        for x in 0..width {
            let here = x + width * y;
            if x + 1 < width {
                let sign = if y % 2 == 1 { -1.0 } else { 1.0 };
                let t = c64::new(-sign * amp(x), 0.0);
                entries[(here, here + 1)] = t;
                entries[(here + 1, here)] = t;
            }
            if y + 1 < height {
                let t = c64::new(-amp(y), 0.0);
                entries[(here, here + width)] = t;
                entries[(here + width, here)] = t;
            }
        }
    }
    Operator::new(entries, format!("BBH({n_x}x{n_y},gamma={gamma},lambda={lambda})"))
}

pub fn bbh_geometry(n_x: usize, n_y: usize) -> Geometry {
    Geometry::Square {
        width: 2 * n_x,
        height: 2 * n_y,
    }
}

/// Chiral operator for the BBH lattice: `(-1)^(x+y)`.
pub fn bbh_sublattice(n_x: usize, n_y: usize) -> Vec<f64> {
    let width = 2 * n_x;
    (0..4 * n_x * n_y)
        .map(|i| if ((i % width) + (i / width)) % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}
