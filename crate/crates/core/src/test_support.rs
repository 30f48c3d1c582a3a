use faer::c64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Operator;

pub fn random_operator(n: usize, rng: &mut ChaCha8Rng) -> Operator {
    Operator::from_fn(n, "random", |_, _| {
        c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
    .unwrap()
}

pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Operator {
    let a = random_operator(n, rng);
    a.add(&a.adjoint()).unwrap()
}

/// `G^dagger G + shift I`, Hermitian positive definite.
pub fn random_hermitian_pd(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> Operator {
    let g = random_operator(n, rng);
    let gg = g.adjoint().matmul(&g).unwrap();
    let h = Operator::from_fn(n, "pd", |i, j| {
        let z = 0.5 * (gg.get(i, j) + gg.get(j, i).conj());
        if i == j {
            z + c64::new(shift, 0.0)
        } else {
            z
        }
    });
    h.unwrap()
}

/// Gaussian elimination with partial pivoting, independent of any
/// decomposition used by the library.
pub fn gauss_solve(a: &Operator, b: &[c64]) -> Vec<c64> {
    let n = a.dim();
    let mut m: Vec<Vec<c64>> = (0..n)
        .map(|i| {
            let mut row: Vec<c64> = (0..n).map(|j| a.get(i, j)).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| m[p][col].norm().total_cmp(&m[q][col].norm()))
            .unwrap();
        m.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..=n {
                    let v = m[col][k];
                    m[r][k] -= f * v;
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}
