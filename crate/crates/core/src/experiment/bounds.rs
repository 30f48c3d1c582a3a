use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundTally, RunConfig, RunOutput};
use crate::diagnostics::{Axis, SweepReport};
use crate::error::Result;
use crate::landscape::{eigenmode_bound_report, solve_landscape, solve_landscape_normal};
use crate::linalg::{eig_hermitian, Operator, DEFAULT_RCOND as EIG_RCOND, HERMITIAN_TOL};
use crate::models::{
    bbh, hatano_nelson, ssh, two_level_drive_mono, two_level_static, SshConfig, SshVariant,
};
use crate::sambe::{build_sambe_mono, DEFAULT_TRUNCATION};
use crate::sweep::Workers;

/// Drive frequency used by the `two_level` model.
const TWO_LEVEL_OMEGA: f64 = 10.0;

/// Width of the uniform onsite disorder `V_j in [0, W]` in the `anderson` model.
const ANDERSON_DISORDER: f64 = 2.0;

fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> Result<Operator> {
    Operator::from_fn(n, format!("random({n})"), |_, _| {
        c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// `(G^dagger G) / n + 0.1 I`.
fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> Result<Operator> {
    let g = random_complex(n, rng)?;
    let gg = g.adjoint().matmul(&g)?;
    Operator::from_fn(n, format!("random_pd({n})"), |i, j| {
        let z = 0.5 * (gg.get(i, j) + gg.get(j, i).conj()) / n as f64;
        if i == j {
            c64::new(z.re + 0.1, 0.0)
        } else {
            z
        }
    })
}

/// Discrete `-Laplacian + V` with `V_j >= 0`, an M-matrix, so its inverse
/// (and that of its square) is entrywise positive.
fn anderson(n: usize, rng: &mut ChaCha8Rng) -> Result<Operator> {
    let onsite: Vec<f64> = (0..n)
        .map(|_| 2.0 + rng.random_range(0.0..ANDERSON_DISORDER))
        .collect();
    Operator::from_real_fn(n, format!("anderson({n}, W={ANDERSON_DISORDER})"), |i, j| {
        if i == j {
            onsite[i]
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Builds the operator named by the `model` key.
pub(crate) fn build_model(cfg: &RunConfig) -> Result<Operator> {
    let n = cfg.usize("dim");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.int("seed") as u64);
    match cfg.string("model") {
        "random_pd" => random_pd(n, &mut rng),
        "random" => random_complex(n, &mut rng),
        "hatano_nelson" => hatano_nelson(n, 1.0, cfg.float("r")),
        "diagonal" => {
            let mut d = vec![1.0; n];
            d[0] = cfg.float("eps");
            Operator::from_real_diagonal(&d, format!("diag({}, 1, ...)", d[0]))
        }
        "anderson" => anderson(n, &mut rng),
        "ssh" => ssh(&SshConfig {
            variant: SshVariant::Topological,
            n_cells: n.div_ceil(2).max(2),
            t_intra: 0.5,
            t_inter: 1.0,
        }),
        "bbh" => bbh(6, 6, 0.5, 1.0),
        "two_level" => {
            let amp = cfg.float("amplitude") * TWO_LEVEL_OMEGA;
            Ok(build_sambe_mono(
                &two_level_static(1.0)?,
                &two_level_drive_mono(amp)?,
                TWO_LEVEL_OMEGA,
                DEFAULT_TRUNCATION,
            )?
            .matrix)
        }
        other => Err(crate::error::Error::config_key(
            format!("unknown model `{other}`"),
            "model",
            None,
        )),
    }
}

/// `H^-1 b` from the Hermitian eigendecomposition.
fn hermitian_inverse_apply(eig: &crate::linalg::HermitianEig, b: &[c64]) -> Vec<c64> {
    let n = b.len();
    let mut out = vec![c64::new(0.0, 0.0); n];
    for (k, &lambda) in eig.values.iter().enumerate() {
        let phi = eig.vector(k);
        let c: c64 = phi.iter().zip(b).map(|(p, x)| p.conj() * x).sum::<c64>() / lambda;
        for (o, p) in out.iter_mut().zip(&phi) {
            *o += p * c;
        }
    }
    out
}

fn inf_norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rel_inf_diff(a: &[c64], b: &[c64]) -> f64 {
    let d: Vec<c64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    inf_norm(&d) / inf_norm(b).max(f64::MIN_POSITIVE)
}

struct Property {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

/// Bound chain, Hermitian reduction, route agreement and eigenmode bound for
/// one model. Each row passes when `value <= tolerance`.
pub fn run_bounds(cfg: &RunConfig, _workers: Workers) -> Result<RunOutput> {
    let rcond = cfg.float("rcond");
    let h = build_model(cfg)?;
    let d = h.dim();
    let land = solve_landscape(&h, rcond)?;
    let mut tally = BoundTally::default();
    tally.record(&land);
    let nb = land.norm_bound();
    let slack = 1.0 + crate::landscape::NORM_BOUND_TOL;

    let mut props = vec![
        Property {
            name: "norm_bound_lower",
            value: nb.v_max / nb.norm2,
            tolerance: slack,
        },
        Property {
            name: "norm_bound_upper",
            value: nb.norm2 / nb.bound,
            tolerance: slack,
        },
    ];
    let mut skipped = Vec::new();

    let full_rank = land.discarded_rank == 0;
    if h.is_hermitian(HERMITIAN_TOL) && full_rank {
        let eig = eig_hermitian(&h)?;
        let ones = vec![c64::new(1.0, 0.0); d];
        let u = hermitian_inverse_apply(&eig, &ones);
        let hu = hermitian_inverse_apply(&eig, &u);
        props.push(Property {
            name: "hermitian_reduction",
            value: rel_inf_diff(&land.v_complex, &hu),
            tolerance: 1e-9,
        });
    } else {
        skipped.push("hermitian_reduction");
    }

    let svd_route = solve_landscape(&h, EIG_RCOND)?;
    let eig_route = solve_landscape_normal(&h, EIG_RCOND)?;
    tally.record(&svd_route);
    tally.record(&eig_route);
    props.push(Property {
        name: "route_agreement",
        value: rel_inf_diff(&eig_route.v_complex, &svd_route.v_complex),
        tolerance: 1e-8,
    });

    if full_rank {
        let modes = eigenmode_bound_report(&h, rcond)?;
        props.push(Property {
            name: "eigenmode_bound",
            value: modes.iter().map(|m| m.max_ratio).fold(0.0, f64::max),
            tolerance: 1.0 + crate::landscape::EIGENMODE_BOUND_TOL,
        });
    } else {
        skipped.push("eigenmode_bound");
    }

    if cfg.string("model") == "diagonal" {
        let target = 1.0 / (land.sigma_min * land.sigma_min);
        props.push(Property {
            name: "diagonal_saturation",
            value: (land.v_max - target).abs() / target,
            tolerance: 1e-6,
        });
    }

    let names: Vec<String> = props.iter().map(|p| p.name.to_string()).collect();
    let mut report = SweepReport::new(h.label().to_string(), vec![Axis::categorical("property", names)]);
    report.push_column("value", props.iter().map(|p| p.value).collect());
    report.push_column("tolerance", props.iter().map(|p| p.tolerance).collect());
    let pass: Vec<f64> = props
        .iter()
        .map(|p| if p.value <= p.tolerance { 1.0 } else { 0.0 })
        .collect();
    let failed = pass.iter().filter(|&&p| p == 0.0).count();
    report.push_column("pass", pass);
    let s = &mut report.summary;
    s.insert("dim".into(), d as f64);
    s.insert("sigma_min".into(), land.sigma_min);
    s.insert("v_max".into(), land.v_max);
    s.insert("n_failed".into(), failed as f64);
    report.set_meta("skipped", skipped);
    tally.write(&mut report);
    Ok(RunOutput {
        report,
        tables: Vec::new(),
    })
}
