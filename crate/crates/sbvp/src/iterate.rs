//! The monotone iterative scheme: each step solves the shifted linear
//! problem
//! `-y'' - (a/x) y' - lambda y = f(x, y_n) - lambda y_n` with the three-point
//! boundary condition, through the Green's representation. Started from a
//! validated upper solution and a validated lower solution it produces two
//! monotone sequences whose limits bracket every solution in the order
//! interval.

use crate::classify::{classify_alpha, lambda1_candidates, FySign, RegimeTag};
use crate::error::{Error, Result};
use crate::green::{build_kernel, solve_linear, GreenKernel};
use crate::model::{make_grid, sup_norm_diff, Grid, GridFunction, ProblemSpec};
use crate::oracle;
use crate::quad::QuadConfig;

/// Slack for the hard monotonicity/enclosure checks; quadrature and
/// interpolation noise make exact pointwise ordering unattainable.
pub const ORDER_SLACK: f64 = 1e-9;

/// Bookkeeping slack for the `monotone_ok` flag.
pub const MONOTONE_FLAG_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartSide {
    Upper,
    Lower,
}

impl std::fmt::Display for StartSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StartSide::Upper => write!(f, "upper"),
            StartSide::Lower => write!(f, "lower"),
        }
    }
}

/// Grid resolution, stopping tolerance and iteration cap.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub quad: QuadConfig,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { grid_n: 512, tol: 1e-8, max_iter: 200, quad: QuadConfig::default() }
    }
}

/// Outcome of checking one initial iterate against its differential and
/// boundary inequalities.
#[derive(Debug, Clone, Copy)]
pub struct OrderValidation {
    pub valid: bool,
    /// Smallest margin seen; inequalities are satisfied when all margins
    /// clear their slacks.
    pub worst_margin: f64,
    /// Node where the worst margin occurred.
    pub location: f64,
}

fn validate_order_function(
    p: &ProblemSpec,
    grid: &Grid,
    upper: bool,
) -> OrderValidation {
    let bf = if upper { &p.upper0 } else { &p.lower0 };
    // Flip lower-solution inequalities so every requirement reads
    // "margin >= -slack".
    let orient = if upper { 1.0 } else { -1.0 };

    let d0 = bf.d1(0.0);
    if d0.abs() > 1e-10 {
        return OrderValidation { valid: false, worst_margin: -d0.abs(), location: 0.0 };
    }

    let mut valid = true;
    let mut worst = f64::INFINITY;
    let mut location = 0.0;
    let mut record = |margin: f64, slack: f64, x: f64| {
        if margin < -slack {
            valid = false;
        }
        if margin < worst {
            worst = margin;
            location = x;
        }
    };

    // Origin limit form of the differential inequality.
    let m0 = orient * (-(1.0 + p.alpha) * bf.d2(0.0) - p.f(0.0, bf.value(0.0)));
    record(m0, ORDER_SLACK, 0.0);
    for &x in grid.nodes() {
        if x == 0.0 || x == 1.0 {
            continue;
        }
        let xa = x.powf(p.alpha);
        let m = orient
            * (-xa * bf.d2(x) - p.alpha * x.powf(p.alpha - 1.0) * bf.d1(x)
                - xa * p.f(x, bf.value(x)));
        record(m, ORDER_SLACK, x);
    }
    // Boundary inequality u(1) >= delta u(eta) resp. v(1) <= delta v(eta).
    let bc = orient * (bf.value(1.0) - p.delta * bf.value(grid.eta()));
    record(bc, 1e-12, 1.0);

    OrderValidation { valid, worst_margin: worst, location }
}

/// Checks the upper-solution inequalities on the grid nodes.
pub fn validate_upper(p: &ProblemSpec, grid: &Grid) -> OrderValidation {
    validate_order_function(p, grid, true)
}

/// Checks the lower-solution inequalities (mirror image).
pub fn validate_lower(p: &ProblemSpec, grid: &Grid) -> OrderValidation {
    validate_order_function(p, grid, false)
}

/// One Picard step through the Green's representation:
/// `y_next = solve_linear(k, t -> f(t, y(t)) - lambda y(t), b = 0)`.
pub fn step(
    p: &ProblemSpec,
    k: &GreenKernel,
    y: &GridFunction,
    quad: &QuadConfig,
) -> Result<GridFunction> {
    if k.alpha != p.alpha || k.delta != p.delta || k.eta != p.eta {
        return Err(Error::InvalidInput(
            "kernel and problem disagree on (alpha, delta, eta)".into(),
        ));
    }
    let lambda = k.lambda;
    let h = |t: f64| {
        let yt = y.interp_unchecked(t);
        p.f(t, yt) - lambda * yt
    };
    solve_linear(k, h, 0.0, y.grid(), quad)
}

/// One generated monotone sequence and its diagnostics.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iterates: Vec<GridFunction>,
    /// Nonlinear BVP residual of each iterate (oracle measurement).
    pub residuals: Vec<f64>,
    /// Sup-norm of each step.
    pub step_norms: Vec<f64>,
    /// Pointwise monotonicity margin of each step (negative = violation).
    pub min_gaps: Vec<f64>,
    pub monotone_ok: bool,
    pub enclosure_ok: bool,
    pub converged: bool,
    pub lambda_used: f64,
    pub regime: RegimeTag,
    pub side: StartSide,
}

impl IterationTrace {
    pub fn limit(&self) -> &GridFunction {
        self.iterates.last().expect("trace holds the initial iterate")
    }

    pub fn iterations(&self) -> usize {
        self.step_norms.len()
    }
}

fn regime_for(p: &ProblemSpec, lambda: f64) -> Result<RegimeTag> {
    let fy = if lambda > 0.0 { FySign::Positive } else { FySign::Negative };
    Ok(classify_alpha(p.alpha, fy)?.1)
}

/// Expected sign of (next - current) for this regime and starting side:
/// reverse order grows from the upper start; well order shrinks from it.
fn direction(regime: RegimeTag, side: StartSide) -> f64 {
    match (regime, side) {
        (RegimeTag::ReverseOrdered, StartSide::Upper) => 1.0,
        (RegimeTag::ReverseOrdered, StartSide::Lower) => -1.0,
        (RegimeTag::WellOrdered, StartSide::Upper) => -1.0,
        (RegimeTag::WellOrdered, StartSide::Lower) => 1.0,
    }
}

/// The existence theorems' lambda inequality: M1 - lambda <= 0 (reverse),
/// M2 - lambda >= 0 (well, lambda > 0), M3 + lambda <= 0 (well, lambda < 0).
/// A lambda outside it is not rejected up front; a wrong choice surfaces as
/// a monotonicity breach at run time.
pub fn theorem_inequality_holds(regime: RegimeTag, lambda: f64, m: f64) -> bool {
    match regime {
        RegimeTag::ReverseOrdered => m - lambda <= 0.0,
        RegimeTag::WellOrdered => {
            if lambda > 0.0 {
                m - lambda >= 0.0
            } else {
                m + lambda <= 0.0
            }
        }
    }
}

/// Runs the monotone iteration from one side until consecutive iterates are
/// within `opts.tol` or `opts.max_iter` is exhausted (the latter is a flag,
/// not an error). Pointwise monotonicity worse than `ORDER_SLACK` aborts:
/// it signals a wrong lambda or a failed hypothesis.
pub fn iterate_monotone(
    p: &ProblemSpec,
    k: &GreenKernel,
    start: StartSide,
    opts: &SolverOptions,
) -> Result<IterationTrace> {
    if !k.hypothesis_ok {
        return Err(Error::HypothesisViolation {
            name: k.hypothesis.to_string(),
            lambda: k.lambda,
            detail: "iteration refuses kernels built with force".into(),
        });
    }
    let regime = regime_for(p, k.lambda)?;
    let grid = make_grid(opts.grid_n, p.eta)?;
    let dir = direction(regime, start);

    let bf = match start {
        StartSide::Upper => &p.upper0,
        StartSide::Lower => &p.lower0,
    };
    let mut current = GridFunction::from_fn(grid.clone(), |x| bf.value(x))?;
    let mut iterates = vec![current.clone()];
    let mut residuals = vec![oracle::residual(p, &current)];
    let mut step_norms = Vec::new();
    let mut min_gaps = Vec::new();
    let mut converged = false;

    for it in 0..opts.max_iter {
        let next = step(p, k, &current, &opts.quad)?;
        let mut gap = f64::INFINITY;
        let mut gap_x = 0.0;
        for ((&x, &a), &b) in grid.nodes().iter().zip(current.values()).zip(next.values()) {
            let g = dir * (b - a);
            if g < gap {
                gap = g;
                gap_x = x;
            }
        }
        if gap < -ORDER_SLACK {
            return Err(Error::MonotonicityBreach { iter: it + 1, x: gap_x, gap });
        }
        let sn = sup_norm_diff(&next, &current)?;
        step_norms.push(sn);
        min_gaps.push(gap);
        residuals.push(oracle::residual(p, &next));
        iterates.push(next.clone());
        current = next;
        if sn <= opts.tol {
            converged = true;
            break;
        }
    }

    let monotone_ok = min_gaps.iter().all(|&g| g >= -MONOTONE_FLAG_SLACK);
    Ok(IterationTrace {
        iterates,
        residuals,
        step_norms,
        min_gaps,
        monotone_ok,
        enclosure_ok: true,
        converged,
        lambda_used: k.lambda,
        regime,
        side: start,
    })
}

/// Limits from both sides, the bracket between them, and the uniqueness
/// verdict.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u_star: GridFunction,
    pub v_star: GridFunction,
    /// Sup-norm gap between the two limits.
    pub enclosure_width: f64,
    pub unique_claimed: bool,
    /// Upper-start and lower-start traces.
    pub traces: (IterationTrace, IterationTrace),
}

/// `M_lambda < lambda_1`, with `lambda_1` the smallest of the supplied
/// first-zero squares.
pub fn uniqueness_check(p: &ProblemSpec, lambda_1_candidates: &[f64]) -> bool {
    let lambda1 = lambda_1_candidates.iter().copied().fold(f64::INFINITY, f64::min);
    p.f_y_bound < lambda1
}

/// Runs both iterations, enforces the regime's enclosure ordering across
/// every pair of iterates, and reports the bracket and uniqueness claim.
pub fn solve_enclosure(p: &ProblemSpec, lambda: f64, opts: &SolverOptions) -> Result<SolveReport> {
    let grid = make_grid(opts.grid_n, p.eta)?;
    let vu = validate_upper(p, &grid);
    if !vu.valid {
        return Err(Error::InvalidInput(format!(
            "upper solution fails its inequalities: margin {:.3e} at x = {}",
            vu.worst_margin, vu.location
        )));
    }
    let vl = validate_lower(p, &grid);
    if !vl.valid {
        return Err(Error::InvalidInput(format!(
            "lower solution fails its inequalities: margin {:.3e} at x = {}",
            vl.worst_margin, vl.location
        )));
    }
    let kernel = build_kernel(p.alpha, lambda, p.delta, p.eta)?;
    let regime = regime_for(p, lambda)?;
    let mut upper = iterate_monotone(p, &kernel, StartSide::Upper, opts)?;
    let mut lower = iterate_monotone(p, &kernel, StartSide::Lower, opts)?;

    // Enclosure across all iterate pairings: the smaller family's pointwise
    // maximum must stay below the larger family's pointwise minimum.
    let n = grid.len();
    let (small, large) = match regime {
        RegimeTag::ReverseOrdered => (&upper, &lower),
        RegimeTag::WellOrdered => (&lower, &upper),
    };
    let mut worst_gap = f64::INFINITY;
    let mut worst_x = 0.0;
    for i in 0..n {
        let hi_of_small =
            small.iterates.iter().map(|g| g.values()[i]).fold(f64::NEG_INFINITY, f64::max);
        let lo_of_large =
            large.iterates.iter().map(|g| g.values()[i]).fold(f64::INFINITY, f64::min);
        let gap = lo_of_large - hi_of_small;
        if gap < worst_gap {
            worst_gap = gap;
            worst_x = grid.nodes()[i];
        }
    }
    if worst_gap < -ORDER_SLACK {
        return Err(Error::EnclosureViolation { x: worst_x, gap: worst_gap });
    }
    upper.enclosure_ok = true;
    lower.enclosure_ok = true;

    let u_star = upper.limit().clone();
    let v_star = lower.limit().clone();
    let enclosure_width = sup_norm_diff(&u_star, &v_star)?;
    let unique_claimed = uniqueness_check(p, &lambda1_candidates(p.alpha)?);
    Ok(SolveReport { u_star, v_star, enclosure_width, unique_claimed, traces: (upper, lower) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundaryFunction;

    /// Example problem: f = (alpha (e^y - 1) - x)/4, delta = 3, eta = 1/7,
    /// u0 = -1, v0 = 1 (reverse ordered for alpha = 1).
    fn example_one() -> ProblemSpec {
        let alpha = 1.0;
        ProblemSpec::new(
            alpha,
            3.0,
            1.0 / 7.0,
            0.0,
            move |x, y: f64| (alpha * (y.exp() - 1.0) - x) / 4.0,
            std::f64::consts::E * alpha / 4.0,
            BoundaryFunction::new(|_| -1.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap()
    }

    #[test]
    fn example_one_orders_validate() {
        let p = example_one();
        let grid = make_grid(64, p.eta).unwrap();
        let u = validate_upper(&p, &grid);
        assert!(u.valid, "upper margin {} at {}", u.worst_margin, u.location);
        let l = validate_lower(&p, &grid);
        assert!(l.valid, "lower margin {} at {}", l.worst_margin, l.location);
    }

    #[test]
    fn sloped_start_fails_derivative_condition() {
        let p = ProblemSpec::new(
            1.0,
            3.0,
            0.5,
            0.0,
            |_x, _y| 0.0,
            0.0,
            BoundaryFunction::new(|x| -x, |_| -1.0, |_| 0.0),
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        let grid = make_grid(16, p.eta).unwrap();
        let v = validate_upper(&p, &grid);
        assert!(!v.valid);
        assert_eq!(v.location, 0.0);
    }

    #[test]
    fn trivial_problem_converges_in_one_step() {
        // f = 0, b = 0, u0 = v0 = 0: the fixed point is reached at once.
        let p = ProblemSpec::new(
            2.0,
            0.5,
            1.0 / 3.0,
            0.0,
            |_x, _y| 0.0,
            0.0,
            BoundaryFunction::new(|_| 0.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| 0.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        let k = build_kernel(2.0, 1.0, 0.5, 1.0 / 3.0).unwrap();
        let opts = SolverOptions { grid_n: 32, ..SolverOptions::default() };
        let tr = iterate_monotone(&p, &k, StartSide::Upper, &opts).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.iterations(), 1);
        for &v in tr.limit().values() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_of_linear_problem_is_stationary() {
        // With f(x,y) = lambda y + 1 the exact solution is
        // solve_linear(k, h = 1, b = 0); one step from it must stay put.
        let lambda = 1.0;
        let p = ProblemSpec::new(
            2.0,
            0.5,
            1.0 / 3.0,
            0.0,
            move |_x, y: f64| lambda * y + 1.0,
            lambda,
            BoundaryFunction::new(|_| 10.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| -10.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        let k = build_kernel(2.0, lambda, 0.5, 1.0 / 3.0).unwrap();
        let grid = make_grid(64, p.eta).unwrap();
        let quad = QuadConfig::default();
        let y = solve_linear(&k, |_| 1.0, 0.0, &grid, &quad).unwrap();
        let y2 = step(&p, &k, &y, &quad).unwrap();
        assert!(sup_norm_diff(&y, &y2).unwrap() < 1e-6);
    }

    #[test]
    fn example_one_first_step_moves_up_from_upper() {
        let p = example_one();
        let k = build_kernel(1.0, 0.75, 3.0, 1.0 / 7.0).unwrap();
        let grid = make_grid(64, p.eta).unwrap();
        let u0 = GridFunction::constant(grid, -1.0).unwrap();
        let u1 = step(&p, &k, &u0, &QuadConfig::default()).unwrap();
        for (&a, &b) in u0.values().iter().zip(u1.values()) {
            assert!(b >= a - 1e-9, "first step not monotone: {a} -> {b}");
        }
    }

    #[test]
    fn theorem_inequality_spot_checks() {
        let m1 = std::f64::consts::E / 4.0;
        assert!(theorem_inequality_holds(RegimeTag::ReverseOrdered, 0.75, m1));
        assert!(!theorem_inequality_holds(RegimeTag::ReverseOrdered, 0.5, m1));
        assert!(theorem_inequality_holds(RegimeTag::WellOrdered, -6.0, 6.0));
        assert!(!theorem_inequality_holds(RegimeTag::WellOrdered, -5.9, 6.0));
        assert!(theorem_inequality_holds(RegimeTag::WellOrdered, 1.0, 1.0));
    }

    #[test]
    fn uniqueness_examples() {
        let p = ProblemSpec::new(
            2.0,
            0.5,
            0.5,
            0.0,
            |_x, _y| 0.0,
            1.0,
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| -1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        // alpha = 2: lambda_1 = pi^2/4 ~ 2.467 > 1.
        assert!(uniqueness_check(&p, &lambda1_candidates(2.0).unwrap()));
        // alpha = 1: lambda_1 = y01^2 ~ 0.798 < 2.
        let p2 = ProblemSpec::new(
            1.0,
            0.5,
            0.5,
            0.0,
            |_x, _y| 0.0,
            2.0,
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| -1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        assert!(!uniqueness_check(&p2, &lambda1_candidates(1.0).unwrap()));
        // M = 0 is always unique.
        let p3 = ProblemSpec::new(
            1.0,
            0.5,
            0.5,
            0.0,
            |_x, _y| 0.0,
            0.0,
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| -1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        assert!(uniqueness_check(&p3, &lambda1_candidates(1.0).unwrap()));
    }
}
