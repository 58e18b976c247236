//! Structural risk minimization over nested polynomial-kernel families.
//!
//! For each degree p a machine is trained with `K(x, y) = (x·y + 1)^p`; its
//! empirical risk plus the VC confidence term gives an upper bound on the
//! actual risk, and the degree with the smallest bound wins.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::solver::SolverConfig;
use crate::svm::{count_errors, train, Model};

pub const DEFAULT_ETA: f64 = 0.05;

/// Inputs to the VC confidence term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInput {
    /// VC dimension (or an estimate of it).
    pub h: f64,
    /// Training-set size.
    pub l: usize,
    /// The bound holds with probability `1 − eta`.
    pub eta: f64,
}

impl BoundInput {
    pub fn new(h: f64, l: usize, eta: f64) -> Result<Self> {
        let input = BoundInput { h, l, eta };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h >= 1.0) {
            return Err(Error::invalid(format!("h must be >= 1, got {}", self.h)));
        }
        if self.l == 0 {
            return Err(Error::invalid("l must be >= 1"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        Ok(())
    }
}

/// Fraction of `data` misclassified by `model`.
pub fn empirical_risk(model: &Model, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    Ok(count_errors(model, data)? as f64 / data.len() as f64)
}

/// `sqrt((h (ln(2l/h) + 1) − ln(η/4)) / l)`, natural logarithms.
pub fn vc_confidence(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let l = input.l as f64;
    let radicand = (input.h * ((2.0 * l / input.h).ln() + 1.0) - (input.eta / 4.0).ln()) / l;
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand(radicand));
    }
    Ok(radicand.sqrt())
}

/// `r_emp + vc_confidence(input)`.
pub fn risk_bound(r_emp: f64, input: &BoundInput) -> Result<f64> {
    if !(0.0..=1.0).contains(&r_emp) {
        return Err(Error::invalid(format!("empirical risk must lie in [0, 1], got {r_emp}")));
    }
    Ok(r_emp + vc_confidence(input)?)
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Capacity of a hyperplane in the polynomial feature space: the number of
/// monomials of degree ≤ p in `dim` variables, `C(dim + p, p)`. The linear
/// kernel counts as p = 1 (`dim + 1`).
pub fn estimate_vc_dim(kernel: &KernelSpec, dim: usize) -> Result<f64> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    let p = match *kernel {
        KernelSpec::Linear => 1,
        KernelSpec::Polynomial { degree } => degree,
        _ => {
            return Err(Error::UnsupportedKernel(
                kernel.to_string(),
                "VC dimension estimates exist only for linear and polynomial kernels",
            ))
        }
    };
    Ok(binomial(dim as u64 + p as u64, p as u64).round())
}

/// One trained degree in an SRM sweep.
#[derive(Debug, Clone)]
pub struct SrmEntry {
    pub degree: u32,
    pub model: Model,
    pub empirical_risk: f64,
    pub vc_dim: f64,
    /// Infinite when the radicand is negative (h far beyond l).
    pub vc_confidence: f64,
    pub bound: f64,
    pub converged: bool,
}

impl SrmEntry {
    /// The bound says nothing useful (it exceeds 1).
    pub fn vacuous(&self) -> bool {
        self.bound > 1.0
    }
}

#[derive(Debug, Clone)]
pub struct SrmReport {
    pub entries: Vec<SrmEntry>,
    /// `None` only inside [`Error::SrmNoConvergence`].
    pub selected_degree: Option<u32>,
}

impl SrmReport {
    pub fn selected(&self) -> Option<&SrmEntry> {
        let p = self.selected_degree?;
        self.entries.iter().find(|e| e.degree == p)
    }

    /// Tab-separated rows `p r_emp h vc_conf bound converged n_sv`, then `selected <p>`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# p\tr_emp\th\tvc_conf\tbound\tconverged\tn_sv\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e.degree,
                e.empirical_risk,
                e.vc_dim,
                e.vc_confidence,
                e.bound,
                e.converged,
                e.model.n_sv()
            );
        }
        match self.selected_degree {
            Some(p) => {
                let _ = writeln!(out, "selected {p}");
            }
            None => out.push_str("selected none\n"),
        }
        out
    }
}

/// Trains one polynomial machine per degree and selects the one with the
/// smallest risk bound among converged runs; ties go to the smaller degree.
pub fn srm_select(data: &Dataset, degrees: &[u32], config: &SolverConfig, eta: f64) -> Result<SrmReport> {
    if degrees.is_empty() {
        return Err(Error::invalid("at least one degree is required"));
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) || degrees[0] == 0 {
        return Err(Error::invalid("degrees must be positive and strictly increasing"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !data.has_both_classes() {
        return Err(Error::SingleClass("SRM training data"));
    }
    let l = data.len();
    let entries = degrees
        .par_iter()
        .map(|&degree| -> Result<SrmEntry> {
            let kernel = KernelSpec::polynomial(degree)?;
            let model = train(data, &kernel, config)?;
            let empirical_risk = empirical_risk(&model, data)?;
            let vc_dim = estimate_vc_dim(&kernel, data.dim())?;
            let vc_confidence = match vc_confidence(&BoundInput::new(vc_dim, l, eta)?) {
                Ok(v) => v,
                Err(Error::NegativeRadicand(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok(SrmEntry {
                degree,
                converged: model.converged(),
                model,
                empirical_risk,
                vc_dim,
                vc_confidence,
                bound: empirical_risk + vc_confidence,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut selected: Option<&SrmEntry> = None;
    for e in entries.iter().filter(|e| e.converged) {
        if selected.is_none_or(|s| e.bound < s.bound) {
            selected = Some(e);
        }
    }
    let selected_degree = selected.map(|e| e.degree);
    let report = SrmReport {
        entries,
        selected_degree,
    };
    if selected_degree.is_none() {
        return Err(Error::SrmNoConvergence(Box::new(report)));
    }
    Ok(report)
}
