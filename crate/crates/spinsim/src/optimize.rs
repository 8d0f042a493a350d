//! Box-constrained local minimization with finite-difference gradients.
//!
//! The method is an active-set quasi-Newton descent: a limited-memory BFGS
//! model drives the search direction on the free coordinates, the step
//! length is capped at the first bound hit (so trial points stay inside the
//! box without bending the search direction), and an Armijo line search
//! with greedy step doubling enforces sufficient decrease, so the accepted
//! objective sequence is strictly non-increasing. Gradients are central
//! differences, falling back to one-sided at active bounds.
//! Every objective evaluation (including finite-difference probes) is
//! recorded in the trace.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;

use crate::error::{invalid, Error, Result};
use crate::objective::ObjectiveSpec;
use crate::params::ParamVector;

/// Default finite-difference base step; scaled per coordinate by
/// `max(1, |x_i|)`.
pub const FD_STEP: f64 = 1e-6;

/// Armijo sufficient-decrease constant.
const ARMIJO_C1: f64 = 1e-4;

/// Line-search backtracking budget per iteration.
const MAX_BACKTRACKS: usize = 25;

/// Line-search step-doubling budget per iteration.
const MAX_EXPANSIONS: usize = 5;

/// Number of curvature pairs retained by the limited-memory BFGS model.
const LBFGS_MEMORY: usize = 10;

/// Allowance for non-gradient evaluations per iteration in the
/// evaluation-cost bound `n_evals ≤ n_iters (2d + c)`.
pub const EVAL_OVERHEAD_PER_ITER: usize = 4;

/// Termination settings: stop when `|J_{r+1} - J_r| < tol`, when
/// `J_{r+1} < tol`, or after `max_iters` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub tol: f64,
    pub max_iters: usize,
}

impl StopRule {
    pub fn new(tol: f64, max_iters: usize) -> Result<Self> {
        if tol <= 0.0 || !tol.is_finite() {
            return Err(invalid("tolerance must be positive"));
        }
        Ok(StopRule { tol, max_iters })
    }
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { tol: 1e-4, max_iters: 200 }
    }
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `J < tol`.
    BelowTolerance,
    /// `|ΔJ| < tol` between accepted iterates.
    SmallImprovement,
    /// Projected gradient numerically zero.
    Stationary,
    /// No descent step found within the backtracking budget.
    LineSearchFailed,
    /// Iteration budget exhausted.
    MaxIters,
}

/// Full record of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptTrace {
    /// Objective value at every function evaluation, in call order.
    pub evals: Vec<f64>,
    /// Objective at each accepted iterate, starting from the initial point.
    pub accepted: Vec<f64>,
    pub final_params: Vec<f64>,
    pub final_objective: f64,
    /// Terminal fidelity at the final parameters; set by
    /// [`optimize_controls`], absent for generic [`minimize`] runs.
    pub final_fidelity: Option<f64>,
    pub n_iters: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl OptTrace {
    pub fn n_evals(&self) -> usize {
        self.evals.len()
    }
}

/// Finite-difference gradient with per-coordinate step
/// `h_i = h_base · max(1, |x_i|)`: central differences in the interior,
/// one-sided where a bound blocks a probe. `f_at_x` saves one evaluation
/// when a one-sided difference is needed and `f(x)` is already known.
pub fn fd_gradient<F>(
    f: &mut F,
    x: &[f64],
    h_base: f64,
    bounds: Option<(&[f64], &[f64])>,
    f_at_x: Option<f64>,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if h_base <= 0.0 || !h_base.is_finite() {
        return Err(invalid("finite-difference step must be positive"));
    }
    let mut f_center = f_at_x;
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = h_base * x[i].abs().max(1.0);
        let (room_up, room_down) = match bounds {
            Some((lo, hi)) => (x[i] + h <= hi[i], x[i] - h >= lo[i]),
            None => (true, true),
        };
        let gi = match (room_up, room_down) {
            (true, true) => {
                probe[i] = x[i] + h;
                let fp = f(&probe)?;
                probe[i] = x[i] - h;
                let fm = f(&probe)?;
                (fp - fm) / (2.0 * h)
            }
            (true, false) => {
                let f0 = cached_center(f, x, &mut f_center)?;
                probe[i] = x[i] + h;
                let fp = f(&probe)?;
                (fp - f0) / h
            }
            (false, true) => {
                let f0 = cached_center(f, x, &mut f_center)?;
                probe[i] = x[i] - h;
                let fm = f(&probe)?;
                (f0 - fm) / h
            }
            (false, false) => {
                return Err(invalid("bound interval narrower than the difference step"))
            }
        };
        if !gi.is_finite() {
            return Err(Error::Numeric(String::from("non-finite finite-difference gradient")));
        }
        probe[i] = x[i];
        grad.push(gi);
    }
    Ok(grad)
}

fn cached_center<F>(f: &mut F, x: &[f64], cache: &mut Option<f64>) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if let Some(v) = *cache {
        return Ok(v);
    }
    let v = f(x)?;
    *cache = Some(v);
    Ok(v)
}

/// Minimize `f` over the box `[lower, upper]` from `x0`.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    stop: &StopRule,
) -> Result<OptTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let d = x0.len();
    if d == 0 {
        return Err(invalid("empty parameter vector"));
    }
    if lower.len() != d || upper.len() != d {
        return Err(invalid("bounds length does not match parameters"));
    }
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Err(invalid("lower bound exceeds upper bound"));
    }
    if x0.iter().zip(lower.iter().zip(upper)).any(|(x, (l, u))| x < l || x > u) {
        return Err(invalid("initial point violates bounds"));
    }
    if stop.tol <= 0.0 {
        return Err(invalid("tolerance must be positive"));
    }

    let mut evals: Vec<f64> = Vec::new();
    let mut eval = |x: &[f64], evals: &mut Vec<f64>| -> Result<f64> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::Numeric(String::from("non-finite objective value")));
        }
        evals.push(v);
        Ok(v)
    };

    let mut x = x0.to_vec();
    let mut fx = eval(&x, &mut evals)?;
    let mut accepted = vec![fx];

    let mut model = LbfgsModel::new();
    let mut pending: Option<(Vec<f64>, Vec<f64>)> = None; // (step, grad at old x)
    let mut last_improvement = f64::INFINITY;
    let mut n_iters = 0usize;
    let mut reason = StopReason::MaxIters;

    for _ in 0..stop.max_iters {
        n_iters += 1;
        let grad = fd_gradient(
            &mut |p: &[f64]| eval(p, &mut evals),
            &x,
            FD_STEP,
            Some((lower, upper)),
            Some(fx),
        )?;

        if let Some((step, prev_grad)) = pending.take() {
            let y: Vec<f64> = grad.iter().zip(&prev_grad).map(|(a, b)| a - b).collect();
            model.push(step, y);
        }

        // coordinates pinned at a bound with the gradient pushing outward
        let active: Vec<bool> = (0..d)
            .map(|i| (x[i] <= lower[i] && grad[i] > 0.0) || (x[i] >= upper[i] && grad[i] < 0.0))
            .collect();
        let free_grad: Vec<f64> =
            grad.iter().enumerate().map(|(i, &g)| if active[i] { 0.0 } else { g }).collect();
        let pg_max = free_grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if pg_max < 1e-10 {
            reason = StopReason::Stationary;
            break;
        }
        // small-improvement stop only near first-order stationarity, so an
        // early flat stretch of the landscape does not end the run
        if last_improvement < stop.tol && pg_max < stop.tol {
            reason = StopReason::SmallImprovement;
            break;
        }

        // quasi-Newton direction restricted to the free subspace, then
        // projected onto the feasible cone at the current point
        let mut dir = model.direction(&free_grad);
        project_direction(&mut dir, &x, lower, upper, &active);
        let mut using_steepest = false;
        if dot(&dir, &free_grad) >= 0.0 {
            model.reset();
            dir = free_grad.iter().map(|g| -g).collect();
            project_direction(&mut dir, &x, lower, upper, &active);
            using_steepest = true;
        }

        let mut accepted_trial: Option<(Vec<f64>, f64)> = None;
        'search: for attempt in 0..2 {
            if attempt == 1 {
                if using_steepest {
                    break;
                }
                // retry once along projected steepest descent
                model.reset();
                dir = free_grad.iter().map(|g| -g).collect();
                project_direction(&mut dir, &x, lower, upper, &active);
            }
            // cap the step so the full trial stays inside the box; the
            // search direction is never bent, only shortened
            let alpha_max = max_feasible_step(&x, &dir, lower, upper);
            let mut alpha = alpha_max.min(1.0);
            if alpha <= 0.0 {
                continue;
            }
            let trial_at = |a: f64| -> Vec<f64> {
                x.iter()
                    .zip(&dir)
                    .enumerate()
                    .map(|(i, (xi, di))| (xi + a * di).clamp(lower[i], upper[i]))
                    .collect()
            };
            let armijo = |f_trial: f64, step: &[f64], grad: &[f64]| -> bool {
                f_trial < fx && f_trial <= fx + ARMIJO_C1 * dot(grad, step).min(0.0)
            };
            let mut first_trial = true;
            for _ in 0..MAX_BACKTRACKS {
                let trial = trial_at(alpha);
                let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                if norm(&step) == 0.0 {
                    alpha *= 0.5;
                    first_trial = false;
                    continue;
                }
                let f_trial = eval(&trial, &mut evals)?;
                if armijo(f_trial, &step, &grad) {
                    accepted_trial = Some((trial, f_trial));
                    // greedy step doubling: when the very first trial already
                    // satisfies the test, push further along the ray while
                    // the objective keeps dropping (crucial on the early
                    // plateau of the landscape, where unit steps crawl)
                    if first_trial {
                        for _ in 0..MAX_EXPANSIONS {
                            let doubled = 2.0 * alpha;
                            if doubled > alpha_max {
                                break;
                            }
                            let t2 = trial_at(doubled);
                            let s2: Vec<f64> = t2.iter().zip(&x).map(|(a, b)| a - b).collect();
                            let f2 = eval(&t2, &mut evals)?;
                            let best = accepted_trial.as_ref().map(|(_, v)| *v).unwrap();
                            if f2 < best && armijo(f2, &s2, &grad) {
                                accepted_trial = Some((t2, f2));
                                alpha = doubled;
                            } else {
                                break;
                            }
                        }
                    }
                    break 'search;
                }
                alpha *= 0.5;
                first_trial = false;
            }
        }
        let Some((trial, f_trial)) = accepted_trial else {
            reason = StopReason::LineSearchFailed;
            break;
        };
        let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        pending = Some((step, grad));
        last_improvement = fx - f_trial;
        x = trial;
        fx = f_trial;
        accepted.push(fx);
        if fx < stop.tol {
            reason = StopReason::BelowTolerance;
            break;
        }
    }

    let converged = matches!(
        reason,
        StopReason::BelowTolerance | StopReason::SmallImprovement | StopReason::Stationary
    );
    Ok(OptTrace {
        evals,
        accepted,
        final_objective: fx,
        final_params: x,
        final_fidelity: None,
        n_iters,
        converged,
        stop_reason: reason,
    })
}

/// Run [`minimize`] on a control objective, using the scheme's box bounds,
/// and attach the terminal fidelity of the returned parameters.
pub fn optimize_controls(
    spec: &ObjectiveSpec,
    x0: &ParamVector,
    stop: &StopRule,
) -> Result<OptTrace> {
    let (lower, upper) = spec.scheme.bounds();
    let mut trace = minimize(|p| spec.objective(p), &x0.values, &lower, &upper, stop)?;
    trace.final_fidelity = Some(spec.terminal_fidelity(&trace.final_params)?);
    Ok(trace)
}

/// Per-evaluation mean and standard deviation across traces, padded to the
/// longest trace by carrying each trace's last value forward.
pub fn mean_trace(traces: &[OptTrace]) -> Result<(Vec<f64>, Vec<f64>)> {
    if traces.is_empty() {
        return Err(invalid("need at least one trace"));
    }
    let len = traces.iter().map(|t| t.evals.len()).max().unwrap();
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    let n = traces.len() as f64;
    for q in 0..len {
        let values = traces.iter().map(|t| {
            let idx = q.min(t.evals.len() - 1);
            t.evals[idx]
        });
        let m: f64 = values.clone().sum::<f64>() / n;
        let var: f64 = values.map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        mean.push(m);
        std.push(sqrt(var));
    }
    Ok((mean, std))
}

/// Smallest evaluation index at which the mean objective across traces
/// drops below `eps`; `None` if it never does.
pub fn time_to_threshold(traces: &[OptTrace], eps: f64) -> Result<Option<usize>> {
    let (mean, _) = mean_trace(traces)?;
    Ok(mean.iter().position(|&m| m < eps))
}

/// Measured evaluation cost of a run against the finite-difference budget
/// `n_evals ≤ n_iters (2d + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalCostReport {
    pub n_evals: usize,
    pub n_iters: usize,
    pub dimension: usize,
    /// `n_iters (2d + c)`, or 1 for a zero-iteration run.
    pub budget: usize,
    pub evals_per_iter: f64,
    pub within_budget: bool,
}

/// Check a trace against the per-iteration cost model for `d` parameters.
pub fn eval_cost_check(trace: &OptTrace, d: usize) -> EvalCostReport {
    let budget = if trace.n_iters == 0 {
        1
    } else {
        trace.n_iters * (2 * d + EVAL_OVERHEAD_PER_ITER)
    };
    let evals_per_iter = if trace.n_iters == 0 {
        trace.n_evals() as f64
    } else {
        trace.n_evals() as f64 / trace.n_iters as f64
    };
    EvalCostReport {
        n_evals: trace.n_evals(),
        n_iters: trace.n_iters,
        dimension: d,
        budget,
        evals_per_iter,
        within_budget: trace.n_evals() <= budget,
    }
}

/// Zero out direction components that point out of the box at coordinates
/// already sitting on a bound, so every positive step length is feasible.
fn project_direction(dir: &mut [f64], x: &[f64], lower: &[f64], upper: &[f64], active: &[bool]) {
    for i in 0..dir.len() {
        if active[i]
            || (x[i] <= lower[i] && dir[i] < 0.0)
            || (x[i] >= upper[i] && dir[i] > 0.0)
        {
            dir[i] = 0.0;
        }
    }
}

/// Largest step length along `dir` that keeps every coordinate inside the
/// box. Assumes `dir` is already projected onto the feasible cone.
fn max_feasible_step(x: &[f64], dir: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..x.len() {
        if dir[i] > 0.0 {
            alpha = alpha.min((upper[i] - x[i]) / dir[i]);
        } else if dir[i] < 0.0 {
            alpha = alpha.min((lower[i] - x[i]) / dir[i]);
        }
    }
    alpha
}

/// Limited-memory inverse-BFGS model: stores the most recent curvature
/// pairs `(s, y)` and produces the quasi-Newton direction via the two-loop
/// recursion, with Shanno-Phua scaling `γ = sᵀy / yᵀy` of the implicit
/// initial matrix refreshed on every update.
struct LbfgsModel {
    pairs: Vec<(Vec<f64>, Vec<f64>, f64)>, // (s, y, 1/sᵀy)
    gamma: f64,
}

impl LbfgsModel {
    fn new() -> Self {
        LbfgsModel { pairs: Vec::new(), gamma: 1.0 }
    }

    fn reset(&mut self) {
        self.pairs.clear();
        self.gamma = 1.0;
    }

    /// Record a step/gradient-change pair; skipped unless the curvature
    /// condition `sᵀy > 0` holds robustly.
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            self.gamma = sy / dot(&y, &y);
            if self.pairs.len() == LBFGS_MEMORY {
                self.pairs.remove(0);
            }
            self.pairs.push((s, y, 1.0 / sy));
        }
    }

    /// `-H g` by the two-loop recursion.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q = grad.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        for qi in q.iter_mut() {
            *qi *= self.gamma;
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        for qi in q.iter_mut() {
            *qi = -*qi;
        }
        q
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fd_gradient_of_square() {
        let mut f = |x: &[f64]| Ok(x[0] * x[0]);
        let g = fd_gradient(&mut f, &[1.0], 1e-5, None, None).unwrap();
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-8);
    }

    #[test]
    fn fd_gradient_of_constant_is_zero() {
        let mut f = |_: &[f64]| Ok(3.5);
        let g = fd_gradient(&mut f, &[0.2, -0.7, 1.1], 1e-6, None, None).unwrap();
        assert_eq!(g, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn fd_gradient_one_sided_at_bound() {
        // x at upper bound: only the backward probe is feasible
        let lower = [0.0];
        let upper = [1.0];
        let mut f = |x: &[f64]| Ok(x[0] * x[0]);
        let g = fd_gradient(&mut f, &[1.0], 1e-6, Some((&lower, &upper)), None).unwrap();
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-5);
    }

    #[test]
    fn minimize_hits_active_bound() {
        let trace = minimize(
            |x| Ok((x[0] - 2.0) * (x[0] - 2.0)),
            &[0.25],
            &[0.0],
            &[1.0],
            &StopRule::new(1e-10, 100).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(trace.final_params[0], 1.0, epsilon = 1e-12);
        assert!(trace.converged);
    }

    #[test]
    fn minimize_interior_quadratic() {
        let trace = minimize(
            |x| Ok((x[0] - 0.3) * (x[0] - 0.3) + (x[1] + 0.1) * (x[1] + 0.1)),
            &[0.9, 0.9],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            &StopRule::new(1e-14, 200).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(trace.final_params[0], 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(trace.final_params[1], -0.1, epsilon = 1e-6);
    }

    #[test]
    fn accepted_sequence_non_increasing() {
        let trace = minimize(
            |x| Ok(x.iter().map(|v| v * v).sum::<f64>() + libm::sin(x[0] * x[1]) * 0.1),
            &[0.8, -0.6, 0.4],
            &[-1.0; 3],
            &[1.0; 3],
            &StopRule::new(1e-12, 100).unwrap(),
        )
        .unwrap();
        for w in trace.accepted.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn infeasible_start_rejected() {
        let res = minimize(|x| Ok(x[0] * x[0]), &[2.0], &[0.0], &[1.0], &StopRule::default());
        assert!(res.is_err());
    }

    #[test]
    fn zero_iterations_single_eval() {
        let trace = minimize(
            |x| Ok(x[0] * x[0]),
            &[0.5],
            &[0.0],
            &[1.0],
            &StopRule::new(1e-8, 0).unwrap(),
        )
        .unwrap();
        assert_eq!(trace.n_evals(), 1);
        assert_eq!(trace.n_iters, 0);
        assert!(!trace.converged);
        let report = eval_cost_check(&trace, 1);
        assert_eq!(report.budget, 1);
        assert!(report.within_budget);
    }

    #[test]
    fn time_to_threshold_examples() {
        let mk = |evals: Vec<f64>| OptTrace {
            evals,
            accepted: vec![],
            final_params: vec![],
            final_objective: 0.0,
            final_fidelity: None,
            n_iters: 0,
            converged: true,
            stop_reason: StopReason::BelowTolerance,
        };
        let t = mk(vec![0.5, 0.2, 0.009]);
        assert_eq!(time_to_threshold(&[t], 1e-2).unwrap(), Some(2));

        let t = mk(vec![0.001, 0.0005]);
        assert_eq!(time_to_threshold(core::slice::from_ref(&t), 1e-2).unwrap(), Some(0));

        let t = mk(vec![0.5, 0.4]);
        assert_eq!(time_to_threshold(&[t], 1e-2).unwrap(), None);

        assert!(time_to_threshold(&[], 1e-2).is_err());
    }

    #[test]
    fn mean_trace_pads_with_last_value() {
        let mk = |evals: Vec<f64>| OptTrace {
            evals,
            accepted: vec![],
            final_params: vec![],
            final_objective: 0.0,
            final_fidelity: None,
            n_iters: 0,
            converged: true,
            stop_reason: StopReason::BelowTolerance,
        };
        let (mean, std) = mean_trace(&[mk(vec![1.0, 0.0]), mk(vec![1.0])]).unwrap();
        assert_eq!(mean, vec![1.0, 0.5]);
        assert_abs_diff_eq!(std[1], 0.5, epsilon = 1e-15);
    }
}
