//! Seeded 2D problems for the three separability regimes.
//!
//! Every generator returns exactly `n/2` samples per class, interleaved
//! `+1, −1, +1, ...`, and is a pure function of `(n, seed)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Label, Sample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Separable,
    Nonseparable,
    Hard,
}

impl Regime {
    pub fn generate(self, n: usize, seed: u64) -> Result<Dataset> {
        match self {
            Regime::Separable => synth_separable(n, seed),
            Regime::Nonseparable => synth_nonseparable(n, seed),
            Regime::Hard => synth_hard(n, seed, false),
        }
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separable" => Ok(Regime::Separable),
            "nonseparable" => Ok(Regime::Nonseparable),
            "hard" => Ok(Regime::Hard),
            _ => Err(Error::invalid(format!("unknown regime `{s}`"))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Separable => "separable",
            Regime::Nonseparable => "nonseparable",
            Regime::Hard => "hard",
        })
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!("sample count must be even and >= 2, got {n}")));
    }
    Ok(())
}

/// Uniform point in the annulus `inner ≤ r ≤ outer` around `center`.
fn in_annulus(rng: &mut ChaCha8Rng, center: [f64; 2], inner: f64, outer: f64) -> Vec<f64> {
    let u: f64 = rng.random();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    vec![center[0] + r * theta.cos(), center[1] + r * theta.sin()]
}

fn in_disc(rng: &mut ChaCha8Rng, center: [f64; 2], radius: f64) -> Vec<f64> {
    in_annulus(rng, center, 0.0, radius)
}

fn interleave(
    n: usize,
    seed: u64,
    mut positive: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
    mut negative: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
) -> Result<Dataset> {
    check_size(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        samples.push(Sample::new(positive(&mut rng), Label::Positive));
        samples.push(Sample::new(negative(&mut rng), Label::Negative));
    }
    Dataset::new(samples)
}

/// Two discs of radius 1.5 centred at (2, 2) (+1) and (−2, −2) (−1).
/// Along the diagonal the classes are at least `4√2 − 3` apart.
pub fn synth_separable(n: usize, seed: u64) -> Result<Dataset> {
    interleave(
        n,
        seed,
        |rng| in_disc(rng, [2.0, 2.0], 1.5),
        |rng| in_disc(rng, [-2.0, -2.0], 1.5),
    )
}

/// Signed distance-like score of the parabolic boundary used by
/// [`synth_nonseparable`]: `u − 0.35 v² + 0.7` in diagonal coordinates
/// `u = (x₁ + x₂)/√2`, `v = (x₁ − x₂)/√2`.
pub(crate) fn parabola_score(x: &[f64]) -> f64 {
    let u = (x[0] + x[1]) * FRAC_1_SQRT_2;
    let v = (x[0] - x[1]) * FRAC_1_SQRT_2;
    u - 0.35 * v * v + 0.7
}

const PARABOLA_GAP: f64 = 0.1;

/// Two overlapping discs of radius 2 centred at (1, 1) (+1) and (−1, −1) (−1).
///
/// The lens where the discs overlap is split by a parabola that bends
/// around the negative class, so each class pokes into the other's half
/// of the plane: no line separates them, but a quadratic surface does with
/// a gap of 0.1 in [`parabola_score`] units.
pub fn synth_nonseparable(n: usize, seed: u64) -> Result<Dataset> {
    let draw = |rng: &mut ChaCha8Rng, center: [f64; 2], accept: fn(f64) -> bool| loop {
        let p = in_disc(rng, center, 2.0);
        if accept(parabola_score(&p)) {
            break p;
        }
    };
    interleave(
        n,
        seed,
        |rng| draw(rng, [1.0, 1.0], |s| s >= PARABOLA_GAP),
        |rng| draw(rng, [-1.0, -1.0], |s| s <= -PARABOLA_GAP),
    )
}

/// Concentric classes: +1 uniform in the unit disc, −1 uniform in the
/// annulus 1.5 ≤ r ≤ 2.5. With `noisy`, 5% of labels are flipped (half
/// from each class, so the balance is kept).
pub fn synth_hard(n: usize, seed: u64, noisy: bool) -> Result<Dataset> {
    let data = interleave(
        n,
        seed,
        |rng| in_disc(rng, [0.0, 0.0], 1.0),
        |rng| in_annulus(rng, [0.0, 0.0], 1.5, 2.5),
    )?;
    if !noisy {
        return Ok(data);
    }
    let per_class = (n as f64 * 0.025).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f11b);
    let mut samples = data.into_samples();
    let mut chosen = Vec::with_capacity(2 * per_class);
    for label in [Label::Positive, Label::Negative] {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].y == label).collect();
        idx.shuffle(&mut rng);
        chosen.extend_from_slice(&idx[..per_class]);
    }
    for i in chosen {
        samples[i].y = samples[i].y.flipped();
    }
    Dataset::new(samples)
}
