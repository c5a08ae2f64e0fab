//! Seeded randomness and random knot laws.
//!
//! Every random quantity derives from one 64-bit seed. A tuple `(seed, k, n, trial)` is
//! hashed with splitmix64 into the seed of an independent ChaCha8 stream, so results do not
//! depend on the order in which tuples are processed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knots::{KnotVector, PeriodicKnotVector};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream for one `(seed, k, n, trial)` tuple.
pub fn stream_seed(seed: u64, k: usize, n: usize, trial: usize) -> u64 {
    [k as u64, n as u64, trial as u64]
        .iter()
        .fold(splitmix64(seed), |h, &v| splitmix64(h ^ splitmix64(v)))
}

pub fn stream(seed: u64, k: usize, n: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, k, n, trial))
}

/// How knot sequences of a sweep are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum KnotLaw {
    Uniform,
    /// Uniformly random cells conditioned on every cell having length at least
    /// `min_ratio / n`.
    Random { min_ratio: f64 },
}

impl KnotLaw {
    pub fn is_random(&self) -> bool {
        matches!(self, KnotLaw::Random { .. })
    }
}

/// `n` cell lengths summing to 1, each at least `min_ratio / n`.
///
/// The lengths are `delta + (1 - n delta) D` with `D` uniform on the simplex, which is the
/// exact law of uniform spacings conditioned on the minimum constraint.
pub fn random_spacings<R: Rng>(rng: &mut R, n: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one cell is required".into()));
    }
    if !(min_ratio > 0.0 && min_ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min ratio must lie in (0, 1], got {min_ratio}"
        )));
    }
    let delta = min_ratio / n as f64;
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    let free = 1.0 - n as f64 * delta;
    Ok(e.into_iter().map(|v| delta + free * v / total).collect())
}

/// Random periodic knots: random spacings placed at a uniformly random rotation.
pub fn random_periodic_knots<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    min_ratio: f64,
) -> Result<PeriodicKnotVector> {
    let gaps = random_spacings(rng, n, min_ratio)?;
    let rotation: f64 = rng.random();
    let mut acc = 0.0;
    let mut s: Vec<f64> = gaps
        .iter()
        .map(|g| {
            let v = (acc + rotation) % 1.0;
            acc += g;
            v
        })
        .collect();
    s.sort_by(f64::total_cmp);
    PeriodicKnotVector::new(s, k)
}

/// Random clamped knots on `[0, 1]` with `cells` knot intervals.
pub fn random_clamped_knots<R: Rng>(
    rng: &mut R,
    cells: usize,
    k: usize,
    min_ratio: f64,
) -> Result<KnotVector> {
    let gaps = random_spacings(rng, cells, min_ratio)?;
    let mut bps = Vec::with_capacity(cells + 1);
    let mut acc = 0.0;
    bps.push(0.0);
    for g in &gaps[..cells - 1] {
        acc += g;
        bps.push(acc);
    }
    bps.push(1.0);
    KnotVector::from_breakpoints(&bps, k)
}

/// Periodic knots for one tuple of a sweep.
pub fn periodic_knots(law: KnotLaw, seed: u64, k: usize, n: usize, trial: usize) -> Result<PeriodicKnotVector> {
    match law {
        KnotLaw::Uniform => PeriodicKnotVector::uniform(n, k),
        KnotLaw::Random { min_ratio } => {
            random_periodic_knots(&mut stream(seed, k, n, trial), n, k, min_ratio)
        }
    }
}

/// Clamped knots on `[0, 1]` with `cells` intervals for one tuple of a sweep.
pub fn clamped_knots(law: KnotLaw, seed: u64, k: usize, cells: usize, trial: usize) -> Result<KnotVector> {
    match law {
        KnotLaw::Uniform => KnotVector::uniform(cells, k, 0.0, 1.0),
        KnotLaw::Random { min_ratio } => {
            random_clamped_knots(&mut stream(seed, k, cells, trial), cells, k, min_ratio)
        }
    }
}
