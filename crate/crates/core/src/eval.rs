//! Error rates, training-size sweeps and decision-value lattices.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::data::{split, SplitSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::solver::SolverConfig;
use crate::srm::empirical_risk;
use crate::svm::{decision_value, train, Model};

/// Multiplier on the repeat index in the per-run seed.
pub const SEED_STRIDE: u64 = 65_537;

/// Attempts per run before a persistently single-class split is an error.
const MAX_RESEEDS: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub train_size: usize,
    pub test_size: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub n_sv: usize,
    pub kernel: KernelSpec,
    pub c: f64,
    /// Seed of the split that produced the partitions (0 for ad-hoc evaluations).
    pub seed: u64,
    pub converged: bool,
}

/// Error rates of `model` on a training and a test partition.
pub fn evaluate(model: &Model, train: &Dataset, test: &Dataset) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    Ok(EvalReport {
        train_size: train.len(),
        test_size: test.len(),
        train_error: if train.is_empty() { 0.0 } else { empirical_risk(model, train)? },
        test_error: empirical_risk(model, test)?,
        n_sv: model.n_sv(),
        kernel: *model.kernel(),
        c: model.c(),
        seed: 0,
        converged: model.converged(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub base_seed: u64,
    pub kernel: KernelSpec,
    pub c: f64,
}

impl SweepSpec {
    pub const DEFAULT_SIZES: [usize; 5] = [100, 200, 300, 400, 500];
    pub const DEFAULT_REPEATS: usize = 10;

    pub fn new(kernel: KernelSpec, c: f64) -> Self {
        SweepSpec {
            sizes: Self::DEFAULT_SIZES.to_vec(),
            repeats: Self::DEFAULT_REPEATS,
            base_seed: 0,
            kernel,
            c,
        }
    }

    /// `base_seed + repeat · 65537 + size`, wrapping.
    pub fn run_seed(&self, size: usize, repeat: usize) -> u64 {
        self.base_seed
            .wrapping_add((repeat as u64).wrapping_mul(SEED_STRIDE))
            .wrapping_add(size as u64)
    }

    fn validate(&self, data_len: usize) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::invalid("sweep needs at least one size"));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sweep sizes must be strictly increasing"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats must be >= 1"));
        }
        let largest = *self.sizes.last().unwrap();
        if largest >= data_len {
            return Err(Error::invalid(format!(
                "largest training size {largest} must be below the dataset size {data_len}"
            )));
        }
        self.kernel.validate()
    }
}

/// Trains and evaluates one model per `(size, repeat)`, returned in that order.
///
/// A split whose training part holds one class is retried with a new seed
/// (up to ten attempts); the report records the seed actually used.
pub fn sweep(data: &Dataset, spec: &SweepSpec, config: &SolverConfig) -> Result<Vec<EvalReport>> {
    spec.validate(data.len())?;
    let config = SolverConfig { c: spec.c, ..*config };
    config.validate()?;
    let runs: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&size| (0..spec.repeats).map(move |r| (size, r)))
        .collect();
    runs.par_iter()
        .map(|&(size, repeat)| {
            let base = spec.run_seed(size, repeat);
            let mut attempt = 0u64;
            let (seed, (train_set, test_set)) = loop {
                let seed = base.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                match split(data, &SplitSpec { train_size: size, seed }) {
                    Ok(parts) => break (seed, parts),
                    Err(Error::SingleClass(_)) if attempt + 1 < MAX_RESEEDS => attempt += 1,
                    Err(e) => return Err(e),
                }
            };
            let model = train(&train_set, &spec.kernel, &config)?;
            let mut report = evaluate(&model, &train_set, &test_set)?;
            report.seed = seed;
            Ok(report)
        })
        .collect()
}

/// Test-error summary for one training size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeAggregate {
    pub size: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Min/mean/max test error per training size, in order of first appearance.
pub fn aggregate(reports: &[EvalReport]) -> Vec<SizeAggregate> {
    let mut sizes: Vec<usize> = Vec::new();
    for r in reports {
        if !sizes.contains(&r.train_size) {
            sizes.push(r.train_size);
        }
    }
    sizes
        .into_iter()
        .map(|size| {
            let errs: Vec<f64> = reports
                .iter()
                .filter(|r| r.train_size == size)
                .map(|r| r.test_error)
                .collect();
            SizeAggregate {
                size,
                min: errs.iter().copied().fold(f64::INFINITY, f64::min),
                mean: errs.iter().sum::<f64>() / errs.len() as f64,
                max: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

/// Tab-separated `size repeat seed train_err test_err n_sv converged` rows
/// followed by one `# agg size min mean max` line per size.
pub fn sweep_tsv(reports: &[EvalReport], repeats: usize) -> String {
    let mut out = String::from("# size\trepeat\tseed\ttrain_err\ttest_err\tn_sv\tconverged\n");
    for (i, r) in reports.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.train_size,
            i % repeats.max(1),
            r.seed,
            r.train_error,
            r.test_error,
            r.n_sv,
            r.converged
        );
    }
    for a in aggregate(reports) {
        let _ = writeln!(out, "# agg {} {} {} {}", a.size, a.min, a.mean, a.max);
    }
    out
}

/// `f(x, y)` on a `steps × steps` lattice spanning the given box, row by row
/// in `y` then `x`. Only 2D models qualify.
pub fn decision_grid(
    model: &Model,
    x_range: (f64, f64),
    y_range: (f64, f64),
    steps: usize,
) -> Result<Vec<[f64; 3]>> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: model.dim(),
        });
    }
    if steps < 2 {
        return Err(Error::invalid("grid needs at least 2 steps per axis"));
    }
    for (lo, hi) in [x_range, y_range] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("invalid grid range [{lo}, {hi}]")));
        }
    }
    let at = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (steps - 1) as f64;
    let mut cells = Vec::with_capacity(steps * steps);
    for j in 0..steps {
        let y = at(y_range, j);
        for i in 0..steps {
            let x = at(x_range, i);
            cells.push([x, y, decision_value(model, &[x, y])?]);
        }
    }
    Ok(cells)
}
