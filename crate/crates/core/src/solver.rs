//! Dual soft-margin training problem:
//!
//! ```text
//! maximize   Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ K(xᵢ, xⱼ)
//! subject to 0 ≤ αᵢ ≤ C,  Σ αᵢ yᵢ = 0
//! ```
//!
//! solved by pairwise decomposition: each step moves two multipliers along
//! the equality constraint, maximizes the objective analytically on that
//! line and clips to the box. Feasibility therefore holds at every iterate.
//!
//! Throughout, `g[k] = Σⱼ αⱼ yⱼ K(xⱼ, xₖ)` is the bias-free decision value
//! and `F[k] = yₖ − g[k]` is the bias that would put point `k` exactly on its
//! margin. The current point is optimal iff
//! `max{F[k] : k can move up} ≤ min{F[k] : k can move down}`; the difference
//! of those two numbers is the optimality gap that drives both pair
//! selection and the stopping rule.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::kernel::Gram;

/// Curvatures at or below this are treated as flat directions.
const MIN_CURVATURE: f64 = 1e-12;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Box bound on every multiplier.
    pub c: f64,
    /// Largest KKT violation accepted at convergence.
    pub kkt_tol: f64,
    /// Consecutive passes without objective progress before giving up.
    pub max_passes: u32,
    /// Multipliers at or below this count as zero (not support vectors).
    pub alpha_cutoff: f64,
    /// Seed for the fallback partner sweep.
    pub seed: u64,
    /// Hard cap on pair updates.
    pub max_iterations: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 1.0,
            kkt_tol: 1e-3,
            max_passes: 100,
            alpha_cutoff: 1e-7,
            seed: 0,
            max_iterations: 10_000_000,
        }
    }
}

impl SolverConfig {
    pub fn with_c(c: f64) -> Self {
        SolverConfig {
            c,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid(format!("C must be positive and finite, got {}", self.c)));
        }
        if !(self.kkt_tol.is_finite() && self.kkt_tol > 0.0) {
            return Err(Error::invalid(format!("kkt_tol must be positive, got {}", self.kkt_tol)));
        }
        if !(self.alpha_cutoff > 0.0 && self.alpha_cutoff < self.kkt_tol) {
            return Err(Error::invalid(format!(
                "alpha_cutoff must lie in (0, kkt_tol), got {}",
                self.alpha_cutoff
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::invalid("max_passes must be at least 1"));
        }
        Ok(())
    }
}

/// Result of [`solve_dual`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Dual objective at `alphas`.
    pub objective: f64,
    /// Pair updates performed.
    pub iterations: u64,
    pub converged: bool,
    /// Largest KKT violation at (`alphas`, `bias`), as reported by [`kkt_report`].
    pub max_kkt_violation: f64,
}

impl SolverSolution {
    /// Number of multipliers above `cutoff`.
    pub fn support_count(&self, cutoff: f64) -> usize {
        self.alphas.iter().filter(|&&a| a > cutoff).count()
    }
}

/// One line of the optional iteration trace, emitted once per pass of `l` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassTrace {
    pub pass: u64,
    pub objective: f64,
    /// Optimality gap at the end of the pass.
    pub kkt: f64,
    pub n_sv: usize,
}

impl fmt::Display for PassTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pass={} objective={} kkt={} n_sv={}",
            self.pass, self.objective, self.kkt, self.n_sv
        )
    }
}

/// Where a multiplier sits relative to its box, with `cutoff` slack at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaStatus {
    Zero,
    Free,
    AtBound,
}

impl AlphaStatus {
    pub fn classify(alpha: f64, c: f64, cutoff: f64) -> Self {
        if alpha <= cutoff {
            AlphaStatus::Zero
        } else if alpha >= c - cutoff {
            AlphaStatus::AtBound
        } else {
            AlphaStatus::Free
        }
    }
}

fn check_problem(gram: &Gram, labels: &[Label]) -> Result<()> {
    if labels.len() != gram.len() {
        return Err(Error::DimensionMismatch {
            expected: gram.len(),
            found: labels.len(),
        });
    }
    Ok(())
}

/// `Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ G[i][j]`.
pub fn dual_objective(alphas: &[f64], gram: &Gram, labels: &[Label]) -> Result<f64> {
    check_problem(gram, labels)?;
    if alphas.len() != gram.len() {
        return Err(Error::DimensionMismatch {
            expected: gram.len(),
            found: alphas.len(),
        });
    }
    let g = margins(alphas, gram, labels);
    Ok(objective_from(alphas, labels, &g))
}

/// `g[k] = Σⱼ αⱼ yⱼ G[j][k]` for every k.
pub(crate) fn margins(alphas: &[f64], gram: &Gram, labels: &[Label]) -> Vec<f64> {
    let mut g = vec![0.0; alphas.len()];
    for (j, (&a, y)) in alphas.iter().zip(labels).enumerate() {
        if a == 0.0 {
            continue;
        }
        let w = a * y.sign();
        for (gk, kjk) in g.iter_mut().zip(gram.row(j)) {
            *gk += w * kjk;
        }
    }
    g
}

fn objective_from(alphas: &[f64], labels: &[Label], g: &[f64]) -> f64 {
    let linear: f64 = alphas.iter().sum();
    let quad: f64 = alphas
        .iter()
        .zip(labels)
        .zip(g)
        .map(|((a, y), gk)| a * y.sign() * gk)
        .sum();
    linear - 0.5 * quad
}

/// Per-index KKT violation of `y f(x) = y (g + b)` given each multiplier's status.
fn violation(status: AlphaStatus, yf: f64) -> f64 {
    match status {
        AlphaStatus::Zero => (1.0 - yf).max(0.0),
        AlphaStatus::Free => (yf - 1.0).abs(),
        AlphaStatus::AtBound => (yf - 1.0).max(0.0),
    }
}

/// Largest KKT violation of `solution` (its multipliers and bias), recomputed from scratch.
pub fn kkt_report(
    solution: &SolverSolution,
    gram: &Gram,
    labels: &[Label],
    config: &SolverConfig,
) -> Result<f64> {
    check_problem(gram, labels)?;
    if solution.alphas.len() != gram.len() {
        return Err(Error::DimensionMismatch {
            expected: gram.len(),
            found: solution.alphas.len(),
        });
    }
    let g = margins(&solution.alphas, gram, labels);
    Ok(max_violation(&solution.alphas, labels, &g, solution.bias, config))
}

fn max_violation(alphas: &[f64], labels: &[Label], g: &[f64], bias: f64, config: &SolverConfig) -> f64 {
    alphas
        .iter()
        .zip(labels)
        .zip(g)
        .map(|((&a, y), gk)| {
            let status = AlphaStatus::classify(a, config.c, config.alpha_cutoff);
            violation(status, y.sign() * (gk + bias))
        })
        .fold(0.0, f64::max)
}

/// Maximizes the dual objective. Non-convergence is reported through
/// [`SolverSolution::converged`], not as an error.
pub fn solve_dual(gram: &Gram, labels: &[Label], config: &SolverConfig) -> Result<SolverSolution> {
    solve(gram, labels, config, None)
}

/// [`solve_dual`] that also records one [`PassTrace`] per pass.
pub fn solve_dual_traced(
    gram: &Gram,
    labels: &[Label],
    config: &SolverConfig,
    trace: &mut Vec<PassTrace>,
) -> Result<SolverSolution> {
    solve(gram, labels, config, Some(trace))
}

struct PairSolver<'a> {
    gram: &'a Gram,
    y: Vec<f64>,
    c: f64,
    alpha: Vec<f64>,
    g: Vec<f64>,
}

struct Selection {
    up: usize,
    up_value: f64,
    low: usize,
    low_value: f64,
}

impl Selection {
    fn gap(&self) -> f64 {
        self.up_value - self.low_value
    }
}

impl<'a> PairSolver<'a> {
    #[inline]
    fn target(&self, k: usize) -> f64 {
        self.y[k] - self.g[k]
    }

    // Index k may move in the direction that raises yₖαₖ.
    #[inline]
    fn can_rise(&self, k: usize) -> bool {
        if self.y[k] > 0.0 {
            self.alpha[k] < self.c
        } else {
            self.alpha[k] > 0.0
        }
    }

    #[inline]
    fn can_fall(&self, k: usize) -> bool {
        if self.y[k] > 0.0 {
            self.alpha[k] > 0.0
        } else {
            self.alpha[k] < self.c
        }
    }

    /// Maximal violating pair: largest target among indices that can rise,
    /// smallest among those that can fall. Ties go to the lower index.
    fn select(&self) -> Option<Selection> {
        let mut up: Option<(usize, f64)> = None;
        let mut low: Option<(usize, f64)> = None;
        for k in 0..self.alpha.len() {
            let t = self.target(k);
            if self.can_rise(k) && up.is_none_or(|(_, v)| t > v) {
                up = Some((k, t));
            }
            if self.can_fall(k) && low.is_none_or(|(_, v)| t < v) {
                low = Some((k, t));
            }
        }
        match (up, low) {
            (Some((up, up_value)), Some((low, low_value))) => Some(Selection {
                up,
                up_value,
                low,
                low_value,
            }),
            _ => None,
        }
    }

    /// Moves `αᵢ` by `yᵢt` and `αⱼ` by `−yⱼt` for the best `t ≥ 0`.
    /// Returns the objective gain, zero when the pair cannot move.
    fn step(&mut self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let slope = self.target(i) - self.target(j);
        if !(slope > 0.0) {
            return 0.0;
        }
        let room_i = if self.y[i] > 0.0 { self.c - self.alpha[i] } else { self.alpha[i] };
        let room_j = if self.y[j] > 0.0 { self.alpha[j] } else { self.c - self.alpha[j] };
        let t_max = room_i.min(room_j);
        if !(t_max > 0.0) {
            return 0.0;
        }
        let curvature = self.gram.get(i, i) + self.gram.get(j, j) - 2.0 * self.gram.get(i, j);
        // On a flat or concave line the best point is the far end of the box.
        let t = if curvature > MIN_CURVATURE {
            (slope / curvature).min(t_max)
        } else {
            t_max
        };
        let gain = slope * t - 0.5 * curvature * t * t;
        if !(gain > 0.0) {
            return 0.0;
        }

        let old_i = self.alpha[i];
        let old_j = self.alpha[j];
        let mut new_i = old_i + self.y[i] * t;
        let mut new_j = old_j - self.y[j] * t;
        // Land exactly on the bound that limited the step.
        if t == room_i {
            new_i = if self.y[i] > 0.0 { self.c } else { 0.0 };
        }
        if t == room_j {
            new_j = if self.y[j] > 0.0 { 0.0 } else { self.c };
        }
        new_i = new_i.clamp(0.0, self.c);
        new_j = new_j.clamp(0.0, self.c);
        let di = (new_i - old_i) * self.y[i];
        let dj = (new_j - old_j) * self.y[j];
        if di == 0.0 && dj == 0.0 {
            return 0.0;
        }
        self.alpha[i] = new_i;
        self.alpha[j] = new_j;
        let (row_i, row_j) = (self.gram.row(i), self.gram.row(j));
        for ((gk, ki), kj) in self.g.iter_mut().zip(row_i).zip(row_j) {
            *gk += di * ki + dj * kj;
        }
        gain
    }

    /// Tries every admissible partner of `anchor` in a seeded random order.
    fn sweep(&mut self, anchor: usize, anchor_rises: bool, rng: &mut ChaCha8Rng) -> f64 {
        let mut order: Vec<usize> = (0..self.alpha.len()).collect();
        order.shuffle(rng);
        for k in order {
            let gain = if anchor_rises {
                if !self.can_fall(k) {
                    continue;
                }
                self.step(anchor, k)
            } else {
                if !self.can_rise(k) {
                    continue;
                }
                self.step(k, anchor)
            };
            if gain > 0.0 {
                return gain;
            }
        }
        0.0
    }

    fn objective(&self, labels: &[Label]) -> f64 {
        objective_from(&self.alpha, labels, &self.g)
    }

    fn bias(&self, selection: Option<&Selection>) -> f64 {
        let (sum, count) = (0..self.alpha.len())
            .filter(|&k| self.alpha[k] > 0.0 && self.alpha[k] < self.c)
            .fold((0.0, 0usize), |(s, n), k| (s + self.target(k), n + 1));
        if count > 0 {
            sum / count as f64
        } else {
            selection.map_or(0.0, |s| 0.5 * (s.up_value + s.low_value))
        }
    }
}

fn solve(
    gram: &Gram,
    labels: &[Label],
    config: &SolverConfig,
    mut trace: Option<&mut Vec<PassTrace>>,
) -> Result<SolverSolution> {
    config.validate()?;
    check_problem(gram, labels)?;
    if gram.is_empty() {
        return Err(Error::Empty("training problem"));
    }
    if !(labels.contains(&Label::Positive) && labels.contains(&Label::Negative)) {
        return Err(Error::SingleClass("solver labels"));
    }
    if !gram.is_finite() {
        return Err(Error::NonFinite("gram matrix"));
    }

    let l = labels.len();
    let mut solver = PairSolver {
        gram,
        y: labels.iter().map(|y| y.sign()).collect(),
        c: config.c,
        alpha: vec![0.0; l],
        g: vec![0.0; l],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_pass = l as u64;

    let mut iterations = 0u64;
    let mut pass = 0u64;
    let mut last_objective = 0.0;
    let mut stalled_passes = 0u32;
    let mut converged = false;

    loop {
        let Some(sel) = solver.select() else {
            converged = true;
            break;
        };
        let gap = sel.gap();
        if gap <= config.kkt_tol {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }

        let mut gain = solver.step(sel.up, sel.low);
        if gain <= 0.0 {
            gain = solver.sweep(sel.up, true, &mut rng);
        }
        if gain <= 0.0 {
            gain = solver.sweep(sel.low, false, &mut rng);
        }
        if gain <= 0.0 {
            // No admissible pair moves: numerically stuck.
            break;
        }
        iterations += 1;

        if iterations.is_multiple_of(per_pass) {
            pass += 1;
            let objective = solver.objective(labels);
            if let Some(trace) = trace.as_deref_mut() {
                trace.push(PassTrace {
                    pass,
                    objective,
                    kkt: gap,
                    n_sv: solver.alpha.iter().filter(|&&a| a > config.alpha_cutoff).count(),
                });
            }
            if objective - last_objective > 1e-12 * objective.abs().max(1.0) {
                stalled_passes = 0;
            } else {
                stalled_passes += 1;
                if stalled_passes >= config.max_passes {
                    break;
                }
            }
            last_objective = objective;
        }
    }

    // Refresh margins from scratch to shed accumulated round-off.
    solver.g = margins(&solver.alpha, gram, labels);
    let selection = solver.select();
    let bias = solver.bias(selection.as_ref());
    let objective = solver.objective(labels);
    let max_kkt_violation = max_violation(&solver.alpha, labels, &solver.g, bias, config);
    if let Some(trace) = trace {
        // The last line always reflects the refreshed state.
        let last = PassTrace {
            pass: pass + 1,
            objective,
            kkt: selection.as_ref().map_or(0.0, Selection::gap).max(0.0),
            n_sv: solver.alpha.iter().filter(|&&a| a > config.alpha_cutoff).count(),
        };
        match trace.last_mut() {
            Some(prev) if iterations > 0 && iterations.is_multiple_of(per_pass) => {
                *prev = PassTrace { pass: prev.pass, ..last };
            }
            _ => trace.push(last),
        }
    }
    Ok(SolverSolution {
        alphas: solver.alpha,
        bias,
        objective,
        iterations,
        converged: converged && max_kkt_violation <= config.kkt_tol,
        max_kkt_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{gram_matrix, KernelSpec};

    fn pair_problem(xs: [f64; 2]) -> (Gram, Vec<Label>) {
        let pts = vec![vec![xs[0]], vec![xs[1]]];
        (
            gram_matrix(&KernelSpec::Linear, &pts).unwrap(),
            vec![Label::Negative, Label::Positive],
        )
    }

    #[test]
    fn objective_examples() {
        let (gram, labels) = pair_problem([-1.0, 1.0]);
        assert_eq!(dual_objective(&[0.0, 0.0], &gram, &labels).unwrap(), 0.0);
        assert!((dual_objective(&[0.5, 0.5], &gram, &labels).unwrap() - 0.5).abs() < 1e-15);
        assert!((dual_objective(&[0.25, 0.25], &gram, &labels).unwrap() - 0.375).abs() < 1e-15);
        assert!(dual_objective(&[0.5], &gram, &labels).is_err());
        assert!(dual_objective(&[0.5, 0.5], &gram, &labels[..1]).is_err());
    }

    #[test]
    fn solves_the_symmetric_pair() {
        let (gram, labels) = pair_problem([-1.0, 1.0]);
        let sol = solve_dual(&gram, &labels, &SolverConfig::with_c(10.0)).unwrap();
        assert!(sol.converged);
        assert!((sol.alphas[0] - 0.5).abs() < 1e-12);
        assert!((sol.alphas[1] - 0.5).abs() < 1e-12);
        assert!(sol.bias.abs() < 1e-12);
        assert!((sol.objective - 0.5).abs() < 1e-12);
        assert_eq!(sol.support_count(1e-7), 2);
    }

    #[test]
    fn kkt_report_examples() {
        let (gram, labels) = pair_problem([-1.0, 1.0]);
        let config = SolverConfig::with_c(10.0);
        let optimum = SolverSolution {
            alphas: vec![0.5, 0.5],
            bias: 0.0,
            objective: 0.5,
            iterations: 0,
            converged: true,
            max_kkt_violation: 0.0,
        };
        assert!(kkt_report(&optimum, &gram, &labels, &config).unwrap() <= 1e-9);

        let zero = SolverSolution {
            alphas: vec![0.0, 0.0],
            ..optimum.clone()
        };
        assert_eq!(kkt_report(&zero, &gram, &labels, &config).unwrap(), 1.0);

        let nudged = SolverSolution {
            alphas: vec![0.6, 0.5],
            ..optimum.clone()
        };
        assert!(kkt_report(&nudged, &gram, &labels, &config).unwrap() > 1e-3);

        let short = SolverSolution {
            alphas: vec![0.5],
            ..optimum
        };
        assert!(kkt_report(&short, &gram, &labels, &config).is_err());
    }

    #[test]
    fn contradictory_duplicates() {
        // (x,+1) and (x,-1): the optimum has both multipliers at C.
        let pts = vec![vec![0.3, -1.2], vec![0.3, -1.2], vec![2.0, 1.0], vec![2.0, 1.0]];
        let gram = gram_matrix(&KernelSpec::Linear, &pts).unwrap();
        let labels = vec![Label::Positive, Label::Negative, Label::Positive, Label::Negative];
        let sol = solve_dual(&gram, &labels, &SolverConfig::with_c(1.0)).unwrap();
        assert!(sol.converged);
        assert!(sol.objective >= 0.0);
        assert!(sol.alphas.iter().all(|&a| a == 1.0), "{:?}", sol.alphas);
    }

    #[test]
    fn rejects_bad_problems() {
        let (gram, _) = pair_problem([-1.0, 1.0]);
        let config = SolverConfig::default();
        assert!(matches!(
            solve_dual(&gram, &[Label::Positive, Label::Positive], &config),
            Err(Error::SingleClass(_))
        ));
        let nan = Gram::from_rows(&[vec![1.0, f64::NAN], vec![f64::NAN, 1.0]]).unwrap();
        assert!(matches!(
            solve_dual(&nan, &[Label::Positive, Label::Negative], &config),
            Err(Error::NonFinite(_))
        ));
        let bad = SolverConfig {
            alpha_cutoff: 1e-2,
            ..config
        };
        assert!(solve_dual(&gram, &[Label::Positive, Label::Negative], &bad).is_err());
        assert!(SolverConfig::with_c(0.0).validate().is_err());
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()]).collect();
        let labels: Vec<Label> = (0..30)
            .map(|i| if (i * 7) % 3 == 0 { Label::Positive } else { Label::Negative })
            .collect();
        let gram = gram_matrix(&KernelSpec::rbf(0.5).unwrap(), &pts).unwrap();
        let config = SolverConfig {
            c: 100.0,
            max_iterations: 3,
            ..Default::default()
        };
        let sol = solve_dual(&gram, &labels, &config).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 3);
        assert!(sol.objective > 0.0);
    }

    #[test]
    fn trace_lines() {
        let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i % 4) as f64]).collect();
        let labels: Vec<Label> = (0..12)
            .map(|i| if i % 4 < 2 { Label::Positive } else { Label::Negative })
            .collect();
        let gram = gram_matrix(&KernelSpec::polynomial(2).unwrap(), &pts).unwrap();
        let mut trace = Vec::new();
        let sol = solve_dual_traced(&gram, &labels, &SolverConfig::with_c(5.0), &mut trace).unwrap();
        assert!(!trace.is_empty());
        assert_eq!(trace.last().unwrap().objective, sol.objective);
        let line = trace[0].to_string();
        assert!(line.starts_with("pass=1 objective="), "{line}");
        assert!(line.contains(" kkt=") && line.contains(" n_sv="));
    }
}
