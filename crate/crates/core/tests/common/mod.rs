//! Reference implementations used as oracles. They share no code with the library beyond
//! knot accessors.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splineproj::{KnotVector, PeriodicKnotVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss rule: `sub` equal pieces of `[a, b]`, `m` points each.
pub fn integrate(a: f64, b: f64, m: usize, sub: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = gauss_legendre(m);
    let h = (b - a) / sub as f64;
    let mut s = 0.0;
    for p in 0..sub {
        let lo = a + h * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * 0.5 * h * f(lo + 0.5 * h * (xi + 1.0));
        }
    }
    s
}

/// Cox-de Boor recursion for the B-spline with knots `t[0..=k]`, right-open intervals.
pub fn cox_de_boor(t: &[f64], k: usize, x: f64) -> f64 {
    if k == 1 {
        return if t[0] <= x && x < t[1] { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    if t[k - 1] > t[0] {
        v += (x - t[0]) / (t[k - 1] - t[0]) * cox_de_boor(&t[..k], k - 1, x);
    }
    if t[k] > t[1] {
        v += (t[k] - x) / (t[k] - t[1]) * cox_de_boor(&t[1..], k - 1, x);
    }
    v
}

/// Basis function at position `p` of a clamped space, or `None` past the domain end.
pub fn clamped_basis(kv: &KnotVector, p: usize, x: f64) -> f64 {
    let t = kv.knots();
    let k = kv.order();
    let (_, b) = kv.domain();
    if x == b {
        // right end point: use the left limit
        let xe = b - 1e-14 * (1.0 + b.abs());
        return cox_de_boor(&t[p..=p + k], k, xe);
    }
    cox_de_boor(&t[p..=p + k], k, x)
}

/// Periodic basis function `j` by summing integer translates.
pub fn periodic_basis(pk: &PeriodicKnotVector, j: usize, x: f64) -> f64 {
    let k = pk.order();
    let t: Vec<f64> = (0..=k).map(|q| pk.s((j + q) as isize)).collect();
    (-3..=3).map(|r| cox_de_boor(&t, k, x + r as f64)).sum()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        for v in m[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c && m[r][c] != 0.0 {
                let f = m[r][c];
                let (src, dst) = if r < c {
                    let (lo, hi) = m.split_at_mut(c);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = m.split_at_mut(r);
                    (&lo[c], &mut hi[0])
                };
                for (x, y) in dst.iter_mut().zip(src) {
                    *x -= f * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|r| r.iter().zip(x).map(|(u, v)| u * v).sum())
        .collect()
}

/// Gram matrix of `dim` functions by cellwise Gauss quadrature over `cells`.
pub fn gram(dim: usize, cells: &[(f64, f64)], basis: impl Fn(usize, f64) -> f64) -> Vec<Vec<f64>> {
    let (xg, wg) = gauss_legendre(8);
    let mut g = vec![vec![0.0; dim]; dim];
    let mut vals = vec![0.0; dim];
    for &(a, b) in cells {
        if b <= a {
            continue;
        }
        let h = b - a;
        for (xi, wi) in xg.iter().zip(&wg) {
            let x = a + 0.5 * h * (xi + 1.0);
            for (p, v) in vals.iter_mut().enumerate() {
                *v = basis(p, x);
            }
            for p in 0..dim {
                if vals[p] == 0.0 {
                    continue;
                }
                for q in 0..dim {
                    g[p][q] += wi * 0.5 * h * vals[p] * vals[q];
                }
            }
        }
    }
    g
}

/// Moments of `f` against `dim` functions, `sub` pieces per cell.
pub fn moments(
    dim: usize,
    cells: &[(f64, f64)],
    sub: usize,
    basis: impl Fn(usize, f64) -> f64,
    f: impl Fn(f64) -> f64,
) -> Vec<f64> {
    (0..dim)
        .map(|p| {
            cells
                .iter()
                .filter(|c| c.1 > c.0)
                .map(|&(a, b)| integrate(a, b, 10, sub, |x| basis(p, x) * f(x)))
                .sum()
        })
        .collect()
}

pub fn clamped_cells(kv: &KnotVector) -> Vec<(f64, f64)> {
    let t = kv.knots();
    t.windows(2).map(|w| (w[0], w[1])).collect()
}

pub fn periodic_cells(pk: &PeriodicKnotVector) -> Vec<(f64, f64)> {
    (0..pk.n() as isize).map(|j| (pk.s(j), pk.s(j + 1))).collect()
}

/// Random spacings summing to one with every gap at least `min_ratio / n`.
pub fn spacings(rng: &mut impl Rng, n: usize, min_ratio: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let d = min_ratio / n as f64;
    raw.iter().map(|r| d + (1.0 - n as f64 * d) * r / total).collect()
}

pub fn random_clamped(rng: &mut impl Rng, cells: usize, k: usize, min_ratio: f64) -> KnotVector {
    let gaps = spacings(rng, cells, min_ratio);
    let mut bps = vec![0.0];
    let mut acc = 0.0;
    for g in &gaps[..cells - 1] {
        acc += g;
        bps.push(acc);
    }
    bps.push(1.0);
    KnotVector::from_breakpoints(&bps, k).unwrap()
}

pub fn random_periodic(rng: &mut impl Rng, n: usize, k: usize, min_ratio: f64) -> PeriodicKnotVector {
    let gaps = spacings(rng, n, min_ratio);
    let shift: f64 = rng.random::<f64>() * gaps[n - 1];
    let mut acc = shift;
    let mut s = Vec::with_capacity(n);
    for g in &gaps {
        s.push(acc);
        acc += g;
    }
    PeriodicKnotVector::new(s, k).unwrap()
}
