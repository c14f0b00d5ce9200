//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparsetag_core::crf::Lattice;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        let (top, rest) = a.split_at_mut(c + 1);
        let pivot = &top[c];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[c] / pivot[c];
            for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
            b[c + 1 + i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn lasso_value(columns: &[Vec<f64>], x: &[f64], alpha: &[f64], lambda: f64) -> f64 {
    let mut r = x.to_vec();
    for (c, &a) in columns.iter().zip(alpha) {
        for (ri, ci) in r.iter_mut().zip(c) {
            *ri -= a * ci;
        }
    }
    0.5 * r.iter().map(|v| v * v).sum::<f64>() + lambda * alpha.iter().map(|a| a.abs()).sum::<f64>()
}

/// Exact lasso minimum by enumerating every support of size ≤ k and every
/// sign pattern: on a fixed support and signs the problem is an
/// unconstrained quadratic, and a stationary point whose signs agree is a
/// candidate. The optimum always admits a linearly independent support.
pub fn brute_force_lasso(
    columns: &[Vec<f64>],
    x: &[f64],
    lambda: f64,
    nonneg: bool,
) -> (f64, Vec<f64>) {
    let m = columns.len();
    let k = x.len();
    let mut best = (lasso_value(columns, x, &vec![0.0; m], lambda), vec![0.0; m]);
    for mask in 1u32..(1 << m) {
        let support: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
        let s = support.len();
        if s > k {
            continue;
        }
        let gram: Vec<Vec<f64>> = support
            .iter()
            .map(|&i| {
                support
                    .iter()
                    .map(|&j| dot(&columns[i], &columns[j]))
                    .collect()
            })
            .collect();
        let corr: Vec<f64> = support.iter().map(|&i| dot(&columns[i], x)).collect();
        let patterns = if nonneg { 1 } else { 1u32 << s };
        for signs in 0..patterns {
            let sign = |p: usize| if signs >> p & 1 == 1 { -1.0 } else { 1.0 };
            let rhs: Vec<f64> = (0..s).map(|p| corr[p] - lambda * sign(p)).collect();
            let Some(sol) = solve_dense(gram.clone(), rhs) else {
                continue;
            };
            if (0..s).any(|p| sol[p] * sign(p) <= 0.0) {
                continue;
            }
            let mut alpha = vec![0.0; m];
            for (p, &j) in support.iter().enumerate() {
                alpha[j] = sol[p];
            }
            let v = lasso_value(columns, x, &alpha, lambda);
            if v < best.0 {
                best = (v, alpha);
            }
        }
    }
    best
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every label sequence of the lattice, in lexicographic order.
pub fn all_paths(len: usize, labels: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..labels).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

pub struct Enumerated {
    pub log_z: f64,
    pub marginals: Vec<f64>,
    /// Best path; among equal scores the one smallest when read from the
    /// last position backwards.
    pub best: Vec<usize>,
}

pub fn enumerate_lattice(lat: &Lattice<f64>) -> Enumerated {
    let (n, l) = (lat.len(), lat.labels());
    let paths = all_paths(n, l);
    let scores: Vec<f64> = paths.iter().map(|p| lat.path_score(p)).collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    let log_z = max + z.ln();
    let mut marginals = vec![0.0; n * l];
    for (p, s) in paths.iter().zip(&scores) {
        let w = (s - log_z).exp();
        for (t, &y) in p.iter().enumerate() {
            marginals[t * l + y] += w;
        }
    }
    let rev = |p: &Vec<usize>| p.iter().rev().cloned().collect::<Vec<_>>();
    let best = paths
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s == max)
        .map(|(p, _)| p)
        .min_by_key(|p| rev(p))
        .cloned()
        .unwrap_or_default();
    Enumerated {
        log_z,
        marginals,
        best,
    }
}

/// Random lattice; with `integral` all potentials are small integers, so
/// path scores are exact and ties are common.
pub fn random_lattice(rng: &mut ChaCha8Rng, integral: bool) -> Lattice<f64> {
    let n = rng.random_range(1..=6);
    let l = rng.random_range(1..=4);
    let mut draw = |count: usize| -> Vec<f64> {
        (0..count)
            .map(|_| {
                if integral {
                    rng.random_range(-2i32..=2) as f64
                } else {
                    rng.random_range(-3.0..3.0)
                }
            })
            .collect()
    };
    let em = draw(n * l);
    let tr = draw(l * l);
    Lattice::new(n, l, em, tr)
}
