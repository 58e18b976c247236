//! Training and evaluating a soft-margin classifier.
//!
//! A trained [`Model`] keeps only the support vectors; everything needed to
//! evaluate `f(x) = Σ αᵢ yᵢ K(sᵢ, x) + b` lives in its fields.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::kernel::{dot, gram_matrix, Gram, KernelKind, KernelSpec};
use crate::solver::{margins, solve_dual_traced, PassTrace, SolverConfig, SolverSolution};

/// Relative distance from `C` below which a multiplier no longer counts as a
/// margin support vector for bias recovery.
const MARGIN_BAND: f64 = 1e-6;

/// Bookkeeping from the training run. Absent for models read from disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainMeta {
    pub train_size: usize,
    pub iterations: u64,
    pub converged: bool,
    pub objective: f64,
    pub max_kkt_violation: f64,
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kernel: KernelSpec,
    support_vectors: Vec<Vec<f64>>,
    alphas: Vec<f64>,
    labels: Vec<Label>,
    bias: f64,
    c: f64,
    dim: usize,
    train_meta: Option<TrainMeta>,
}

impl Model {
    /// Assembles a model from its parts, checking the structural invariants.
    pub fn new(
        kernel: KernelSpec,
        support_vectors: Vec<Vec<f64>>,
        alphas: Vec<f64>,
        labels: Vec<Label>,
        bias: f64,
        c: f64,
    ) -> Result<Self> {
        kernel.validate()?;
        if support_vectors.is_empty() {
            return Err(Error::NoSupportVectors);
        }
        let n = support_vectors.len();
        for len in [alphas.len(), labels.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("C must be positive, got {c}")));
        }
        if !bias.is_finite() {
            return Err(Error::NonFinite("bias"));
        }
        if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a <= c)) {
            return Err(Error::invalid(format!("support vector multiplier {a} outside (0, C]")));
        }
        let dim = support_vectors[0].len();
        if dim == 0 {
            return Err(Error::Empty("support vector"));
        }
        for sv in &support_vectors {
            if sv.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: sv.len(),
                });
            }
            if !sv.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("support vector"));
            }
        }
        Ok(Model {
            kernel,
            support_vectors,
            alphas,
            labels,
            bias,
            c,
            dim,
            train_meta: None,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N_s`.
    pub fn n_sv(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn train_meta(&self) -> Option<&TrainMeta> {
        self.train_meta.as_ref()
    }

    pub fn converged(&self) -> bool {
        self.train_meta.is_none_or(|m| m.converged)
    }

    /// The support vectors as a standalone dataset.
    pub fn support_set(&self) -> Dataset {
        Dataset::from_parts(self.support_vectors.clone(), self.labels.clone())
            .expect("model invariants guarantee a valid support set")
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("query point"));
        }
        Ok(())
    }

    #[inline]
    fn raw_decision(&self, x: &[f64]) -> f64 {
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.alphas)
            .zip(&self.labels)
            .map(|((s, a), y)| a * y.sign() * self.kernel.eval_unchecked(s, x))
            .sum();
        sum + self.bias
    }
}

/// Trains on `data`; see [`train_traced`].
pub fn train(data: &Dataset, kernel: &KernelSpec, config: &SolverConfig) -> Result<Model> {
    train_traced(data, kernel, config, &mut Vec::new())
}

/// Solves the dual problem on `data`, recovers the bias and keeps the
/// samples whose multiplier exceeds `config.alpha_cutoff`.
///
/// Solver non-convergence is not an error; it is recorded in the model's
/// [`TrainMeta`].
pub fn train_traced(
    data: &Dataset,
    kernel: &KernelSpec,
    config: &SolverConfig,
    trace: &mut Vec<PassTrace>,
) -> Result<Model> {
    if data.len() < 2 {
        return Err(Error::invalid("training needs at least two samples"));
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass("training data"));
    }
    let gram = gram_matrix(kernel, data.samples())?;
    let labels = data.labels();
    let solution = solve_dual_traced(&gram, &labels, config, trace)?;
    let bias = compute_bias(&solution, &gram, &labels, config)?;

    let keep: Vec<usize> = (0..data.len())
        .filter(|&i| solution.alphas[i] > config.alpha_cutoff)
        .collect();
    let samples = data.samples();
    let mut model = Model::new(
        *kernel,
        keep.iter().map(|&i| samples[i].x.clone()).collect(),
        keep.iter().map(|&i| solution.alphas[i]).collect(),
        keep.iter().map(|&i| samples[i].y).collect(),
        bias,
        config.c,
    )?;
    model.train_meta = Some(TrainMeta {
        train_size: data.len(),
        iterations: solution.iterations,
        converged: solution.converged,
        objective: solution.objective,
        max_kkt_violation: solution.max_kkt_violation,
    });
    Ok(model)
}

/// Bias from the margin support vectors (`cutoff < α < C(1 − 10⁻⁶)`):
/// the average of `yᵢ − Σⱼ αⱼ yⱼ G[j][i]` over all of them.
///
/// When every multiplier sits at 0 or C the margin set is empty, and the
/// bias falls back to the midpoint `−(max_{y=−1} g + min_{y=+1} g) / 2`
/// over the training points.
pub fn compute_bias(
    solution: &SolverSolution,
    gram: &Gram,
    labels: &[Label],
    config: &SolverConfig,
) -> Result<f64> {
    if labels.len() != gram.len() || solution.alphas.len() != gram.len() {
        return Err(Error::DimensionMismatch {
            expected: gram.len(),
            found: labels.len().min(solution.alphas.len()),
        });
    }
    if !solution.alphas.iter().any(|&a| a > config.alpha_cutoff) {
        return Err(Error::NoSupportVectors);
    }
    let g = margins(&solution.alphas, gram, labels);
    let upper = config.c * (1.0 - MARGIN_BAND);
    let (sum, count) = solution
        .alphas
        .iter()
        .zip(labels)
        .zip(&g)
        .filter(|((&a, _), _)| a > config.alpha_cutoff && a < upper)
        .fold((0.0, 0usize), |(s, n), ((_, y), gi)| (s + (y.sign() - gi), n + 1));
    if count > 0 {
        return Ok(sum / count as f64);
    }

    let mut max_neg = f64::NEG_INFINITY;
    let mut min_pos = f64::INFINITY;
    for (y, &gi) in labels.iter().zip(&g) {
        match y {
            Label::Negative => max_neg = max_neg.max(gi),
            Label::Positive => min_pos = min_pos.min(gi),
        }
    }
    if !(max_neg.is_finite() && min_pos.is_finite()) {
        return Err(Error::SingleClass("bias recovery"));
    }
    Ok(-(max_neg + min_pos) / 2.0)
}

/// `f(x) = Σ αᵢ yᵢ K(sᵢ, x) + b`.
pub fn decision_value(model: &Model, x: &[f64]) -> Result<f64> {
    model.check_query(x)?;
    Ok(model.raw_decision(x))
}

/// Sign of `f(x)`; `f(x) = 0` maps to `+1`.
pub fn classify(model: &Model, x: &[f64]) -> Result<Label> {
    decision_value(model, x).map(label_of)
}

/// Label of a decision value; `0` maps to `+1`.
pub fn label_of(f: f64) -> Label {
    if f >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// `w = Σ αᵢ yᵢ sᵢ`; only defined for the linear kernel.
pub fn weight_vector(model: &Model) -> Result<Vec<f64>> {
    if model.kernel.kind() != KernelKind::Linear {
        return Err(Error::UnsupportedKernel(
            model.kernel.to_string(),
            "the weight vector only exists explicitly for the linear kernel",
        ));
    }
    let mut w = vec![0.0; model.dim];
    for ((s, a), y) in model.support_vectors.iter().zip(&model.alphas).zip(&model.labels) {
        let coef = a * y.sign();
        for (wk, sk) in w.iter_mut().zip(s) {
            *wk += coef * sk;
        }
    }
    Ok(w)
}

/// Width `2 / |w|` of the band between the two supporting hyperplanes.
pub fn margin(model: &Model) -> Result<f64> {
    let w = weight_vector(model)?;
    let norm = dot(&w, &w).sqrt();
    if norm == 0.0 {
        return Err(Error::invalid("weight vector is zero; margin is unbounded"));
    }
    Ok(2.0 / norm)
}

/// `Σ max(0, 1 − yᵢ f(xᵢ))`, an upper bound on the number of misclassified samples.
pub fn total_slack(model: &Model, data: &Dataset) -> Result<f64> {
    data.samples().iter().try_fold(0.0, |acc, s| {
        let f = decision_value(model, &s.x)?;
        Ok(acc + (1.0 - s.y.sign() * f).max(0.0))
    })
}

/// Number of samples whose predicted label differs from the true one.
pub fn count_errors(model: &Model, data: &Dataset) -> Result<usize> {
    if data.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: data.dim(),
        });
    }
    data.samples().iter().try_fold(0, |n, s| {
        Ok(n + usize::from(classify(model, &s.x)? != s.y))
    })
}

const MODEL_HEADER: &str = "svmmodel v1";

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the line-oriented `svmmodel v1` format.
pub fn write_model<W: Write>(model: &Model, mut out: W) -> Result<()> {
    writeln!(out, "{MODEL_HEADER}")?;
    writeln!(out, "kernel {}", model.kernel)?;
    writeln!(out, "C {}", fmt_real(model.c))?;
    writeln!(out, "bias {}", fmt_real(model.bias))?;
    writeln!(out, "dim {}", model.dim)?;
    writeln!(out, "nsv {}", model.n_sv())?;
    for ((s, a), y) in model.support_vectors.iter().zip(&model.alphas).zip(&model.labels) {
        write!(out, "sv {} {}", fmt_real(*a), y)?;
        for v in s {
            write!(out, " {}", fmt_real(*v))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a model written by [`write_model`].
pub fn read_model<R: BufRead>(input: R) -> Result<Model> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        loop {
            match lines.next() {
                Some((n, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok((n, line));
                    }
                }
                None => return Err(Error::parse(0, format!("unexpected end of model file, expected {what}"))),
            }
        }
    };
    let (n, header) = next("header")?;
    if header.trim() != MODEL_HEADER {
        return Err(Error::parse(n, format!("expected `{MODEL_HEADER}`")));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, line) = next(key)?;
        match line.trim().split_once(' ') {
            Some((k, v)) if k == key => Ok((n, v.trim().to_string())),
            _ => Err(Error::parse(n, format!("expected `{key} <value>`"))),
        }
    };
    let real = |n: usize, v: &str| -> Result<f64> {
        v.parse::<f64>().map_err(|_| Error::parse(n, format!("invalid number `{v}`")))
    };
    let count = |n: usize, v: &str| -> Result<usize> {
        v.parse::<usize>().map_err(|_| Error::parse(n, format!("invalid count `{v}`")))
    };

    let (n, token) = field("kernel")?;
    let kernel: KernelSpec = token.parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
    let (n, v) = field("C")?;
    let c = real(n, &v)?;
    let (n, v) = field("bias")?;
    let bias = real(n, &v)?;
    let (n, v) = field("dim")?;
    let dim = count(n, &v)?;
    let (n, v) = field("nsv")?;
    let nsv = count(n, &v)?;

    let mut svs = Vec::with_capacity(nsv);
    let mut alphas = Vec::with_capacity(nsv);
    let mut labels = Vec::with_capacity(nsv);
    for _ in 0..nsv {
        let (n, line) = next("support vector")?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("sv") {
            return Err(Error::parse(n, "expected `sv <alpha> <label> <features...>`"));
        }
        let alpha = real(n, parts.next().unwrap_or(""))?;
        let label: Label = parts
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::parse(n, e.to_string()))?;
        let x = parts.map(|p| real(n, p)).collect::<Result<Vec<_>>>()?;
        if x.len() != dim {
            return Err(Error::parse(n, format!("expected {dim} features, found {}", x.len())));
        }
        svs.push(x);
        alphas.push(alpha);
        labels.push(label);
    }
    if let Ok((n, _)) = next("end of file") {
        return Err(Error::parse(n, "trailing content after support vectors"));
    }
    Model::new(kernel, svs, alphas, labels, bias, c)
}

impl Model {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_model(self, BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        read_model(BufReader::new(File::open(path)?))
    }
}
