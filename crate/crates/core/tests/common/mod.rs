//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::fs::File;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svmkit::data::{load, IngestSpec};
use svmkit::kernel::Gram;
use svmkit::{Dataset, KernelSpec, Label};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn wisconsin() -> Dataset {
    let file = File::open(data_path("breast-cancer-wisconsin.data"))
        .expect("data/breast-cancer-wisconsin.data missing; run tools/fetch_uci.py");
    load(file, &IngestSpec::wisconsin()).unwrap()
}

pub fn mushroom() -> Dataset {
    let file = File::open(data_path("agaricus-lepiota.data"))
        .expect("data/agaricus-lepiota.data missing; run tools/fetch_uci.py");
    load(file, &IngestSpec::mushroom()).unwrap()
}

/// `l` points uniform in `[-1, 1]^dim` with random labels; the first two
/// labels are fixed to `+1, -1` so both classes are present.
pub fn random_problem(rng: &mut ChaCha8Rng, l: usize, dim: usize) -> Dataset {
    let xs = (0..l)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let ys = (0..l)
        .map(|i| match i {
            0 => Label::Positive,
            1 => Label::Negative,
            _ if rng.random_bool(0.5) => Label::Positive,
            _ => Label::Negative,
        })
        .collect();
    Dataset::from_parts(xs, ys).unwrap()
}

/// Linear, Polynomial (p ≤ 5) or Rbf (σ in [0.3, 3]), uniformly.
pub fn random_kernel(rng: &mut ChaCha8Rng) -> KernelSpec {
    match rng.random_range(0..3) {
        0 => KernelSpec::Linear,
        1 => KernelSpec::polynomial(rng.random_range(1..=5)).unwrap(),
        _ => KernelSpec::rbf(rng.random_range(0.3..=3.0)).unwrap(),
    }
}

/// Log-uniform in `[lo, hi]`.
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

/// Points uniform in `[-2, 2]^dim`, kept when their projection on a random
/// unit direction is at least `gap/2` away from zero; the projection's sign
/// is the label. The hyperplane through the origin separates them with
/// margin at least `gap`.
pub fn random_separable(rng: &mut ChaCha8Rng, l: usize, dim: usize, gap: f64) -> Dataset {
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
    dir.iter_mut().for_each(|d| *d /= norm);
    let mut xs = Vec::with_capacity(l);
    let mut ys = Vec::with_capacity(l);
    while xs.len() < l {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let along: f64 = x.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if along.abs() < gap / 2.0 {
            continue;
        }
        // Alternate classes so both are always present.
        let want = if xs.len() % 2 == 0 { 1.0 } else { -1.0 };
        if along * want < 0.0 {
            continue;
        }
        ys.push(if want > 0.0 { Label::Positive } else { Label::Negative });
        xs.push(x);
    }
    Dataset::from_parts(xs, ys).unwrap()
}

/// Dual objective `Σα − ½ ΣΣ αᵢαⱼyᵢyⱼKᵢⱼ`, written out directly.
pub fn objective_direct(alphas: &[f64], gram: &Gram, labels: &[Label]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * labels[i].sign() * labels[j].sign() * gram.get(i, j);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Best dual objective over the feasible points of the grid
/// `αᵢ ∈ {0, C/steps, ..., C}`, found by exhaustive search.
///
/// The last multiplier is fixed by `Σαy = 0`; branches that can no longer
/// reach the equality are cut.
pub fn grid_oracle(gram: &Gram, labels: &[Label], c: f64, steps: i64) -> f64 {
    let n = labels.len();
    let y: Vec<i64> = labels.iter().map(|l| l.sign() as i64).collect();
    let h = c / steps as f64;
    // pos_after[i] / neg_after[i]: labels of each sign at indices ≥ i.
    let mut pos_after = vec![0i64; n + 1];
    let mut neg_after = vec![0i64; n + 1];
    for i in (0..n).rev() {
        pos_after[i] = pos_after[i + 1] + (y[i] > 0) as i64;
        neg_after[i] = neg_after[i + 1] + (y[i] < 0) as i64;
    }

    struct Search<'a> {
        gram: &'a Gram,
        y: &'a [i64],
        h: f64,
        steps: i64,
        pos_after: &'a [i64],
        neg_after: &'a [i64],
        best: f64,
    }

    impl Search<'_> {
        // `v[k] = Σ_{assigned i} αᵢ yᵢ K[i][k]`; `obj` is the objective restricted
        // to the assigned indices.
        fn go(&mut self, i: usize, signed: i64, obj: f64, v: &[f64]) {
            let n = self.y.len();
            if i == n - 1 {
                let k = -self.y[i] * signed;
                if (0..=self.steps).contains(&k) {
                    let a = k as f64 * self.h;
                    let yi = self.y[i] as f64;
                    let total = obj + a - a * yi * v[i] - 0.5 * a * a * self.gram.get(i, i);
                    self.best = self.best.max(total);
                }
                return;
            }
            for k in 0..=self.steps {
                let s = signed + self.y[i] * k;
                // The remaining indices must be able to cancel `s`.
                let lo = -self.steps * self.neg_after[i + 1];
                let hi = self.steps * self.pos_after[i + 1];
                if !(lo..=hi).contains(&-s) {
                    continue;
                }
                let a = k as f64 * self.h;
                let yi = self.y[i] as f64;
                let next_obj = obj + a - a * yi * v[i] - 0.5 * a * a * self.gram.get(i, i);
                let mut next_v = v.to_vec();
                if k != 0 {
                    for (m, vm) in next_v.iter_mut().enumerate() {
                        *vm += a * yi * self.gram.get(i, m);
                    }
                }
                self.go(i + 1, s, next_obj, &next_v);
            }
        }
    }

    let mut search = Search {
        gram,
        y: &y,
        h,
        steps,
        pos_after: &pos_after,
        neg_after: &neg_after,
        best: f64::NEG_INFINITY,
    };
    search.go(0, 0, 0.0, &vec![0.0; n]);
    search.best
}

/// Whether some point of class `inner` lies inside (or on) a triangle of
/// points of the other class. Any such point rules out a separating line.
pub fn enclosed_by_other_class(data: &Dataset, inner: Label) -> bool {
    let of = |label: Label| -> Vec<&[f64]> {
        data.samples().iter().filter(|s| s.y == label).map(|s| s.x.as_slice()).collect()
    };
    let inside = of(inner);
    let outside = of(inner.flipped());
    let cross = |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    for p in &inside {
        for i in 0..outside.len() {
            for j in i + 1..outside.len() {
                for k in j + 1..outside.len() {
                    let (a, b, c) = (outside[i], outside[j], outside[k]);
                    let d = [cross(a, b, p), cross(b, c, p), cross(c, a, p)];
                    let all_pos = d.iter().all(|&v| v >= 0.0);
                    let all_neg = d.iter().all(|&v| v <= 0.0);
                    if (all_pos || all_neg) && cross(a, b, c) != 0.0 {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Lattice points of `[-2, 2]²` at spacing 0.25: `+1` strictly inside the
/// circle `r² = 0.8`, `-1` outside `r² = 1.25`, nothing in between.
pub fn circle_set() -> Dataset {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in -8..=8 {
        for j in -8..=8 {
            let (a, b) = (i as f64 * 0.25, j as f64 * 0.25);
            let r2 = a * a + b * b;
            if r2 < 0.8 {
                ys.push(Label::Positive);
            } else if r2 > 1.25 {
                ys.push(Label::Negative);
            } else {
                continue;
            }
            xs.push(vec![a, b]);
        }
    }
    Dataset::from_parts(xs, ys).unwrap()
}

/// `sqrt((h (ln(2l/h) + 1) − ln(η/4)) / l)`, evaluated directly.
pub fn vc_confidence_direct(h: f64, l: usize, eta: f64) -> f64 {
    let l = l as f64;
    ((h * ((2.0 * l / h).ln() + 1.0) - (eta / 4.0).ln()) / l).sqrt()
}
