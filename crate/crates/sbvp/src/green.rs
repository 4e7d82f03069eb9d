//! Piecewise Green's functions of the shifted linear three-point operator
//! `-(x^a y')' - lambda x^a y`, and the solution representation built on them.
//!
//! All three cases share one four-branch structure over the basis pair
//! `Phi(s) = s^nu C_{-nu}(s b)` (regular at the origin: C = J for lambda > 0,
//! C = I for lambda < 0) and `X(s) = s^nu S_nu(s b)` (second solution:
//! S = J for Case I, Y for Case II, K for Case III), with
//! `D = Phi(1) - delta Phi(eta)` and a case prefactor that folds in the
//! csc/sec factors analytically:
//!
//! ```text
//!   t <= eta, x <= t:  P Phi(x) [ Phi(t) (delta X(eta) - X(1)) / D + X(t) ]
//!   t <= eta, x >= t:  P Phi(t) [ Phi(x) (delta X(eta) - X(1)) / D + X(x) ]
//!   t >= eta, x <= t:  P Phi(x) [ Phi(1) X(t) - X(1) Phi(t) ] / D
//!   t >= eta, x >= t:  P [ Phi(x) (delta Phi(eta) X(t) - X(1) Phi(t)) / D
//!                          + Phi(t) X(x) ]
//! ```
//!
//! P = pi csc(pi nu)/2 (Case I), pi sec(pi nu)/2 (Case II), -1 (Case III).
//! The branches are continuous at x = t, jump by -t^(-a) in the x-derivative
//! (left minus right), and satisfy G(1,t) = delta G(eta,t).

use crate::classify::{
    check_hypotheses, hypothesis_slot, is_odd_integer_alpha, CaseTag, Hypothesis,
};
use crate::error::{Error, Result};
use crate::model::{Grid, GridFunction};
use crate::quad::QuadConfig;
use crate::specfun::{bessel, bessel_limit_at_zero, cos_pi, sin_pi, BesselFamily, MAX_ORDER};

/// Resonance guard on |D|.
const RESONANCE_TOL: f64 = 1e-12;

/// Case I needs non-integer nu; closer than this to an integer the user is
/// directed to the odd-alpha (Case II) formulas.
const CASE1_INTEGER_NU_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignExpectation {
    /// Maximum-principle kernels (H0, H2, H'0): G <= 0.
    NonPositive,
    /// Anti-maximum kernels (H1, H3): G >= 0.
    NonNegative,
}

/// A constructed Green's function for one (case, lambda, delta, eta, alpha).
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub case: CaseTag,
    pub alpha: f64,
    pub lambda: f64,
    pub delta: f64,
    pub eta: f64,
    /// nu = (1 - alpha)/2.
    pub nu: f64,
    /// D = Phi(1) - delta Phi(eta).
    pub denom: f64,
    pub sign_expectation: SignExpectation,
    /// The hypothesis this kernel is judged against.
    pub hypothesis: Hypothesis,
    /// False only for kernels built with `force` while the hypothesis fails.
    pub hypothesis_ok: bool,
    /// |D| relative to the magnitudes entering it.
    pub denom_condition: f64,
    beta: f64,
    pref: f64,
    phi0: f64,
    phi1: f64,
    phi_eta: f64,
    chi1: f64,
    chi_eta: f64,
}

fn second_family(case: CaseTag) -> BesselFamily {
    match case {
        CaseTag::CaseI => BesselFamily::J,
        CaseTag::CaseII => BesselFamily::Y,
        CaseTag::CaseIII => BesselFamily::K,
    }
}

fn regular_family(case: CaseTag) -> BesselFamily {
    match case {
        CaseTag::CaseIII => BesselFamily::I,
        _ => BesselFamily::J,
    }
}

/// `s^nu C_{-nu}(s beta)` for s > 0, series form when the argument is small
/// enough that the product of a diverging and a vanishing factor would lose
/// digits.
fn regular_at(case: CaseTag, nu: f64, beta: f64, phi0: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(phi0);
    }
    let z = s * beta;
    if z <= 0.5 {
        // phi0 * sum_k (sign z^2/4)^k Gamma(1-nu) / (k! Gamma(k+1-nu))
        let sign = if case == CaseTag::CaseIII { 1.0 } else { -1.0 };
        let q = sign * 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 0..200 {
            let kf = k as f64;
            term *= q / ((kf + 1.0) * (kf + 1.0 - nu));
            sum += term;
            if term.abs() <= 1e-16 * sum.abs() {
                break;
            }
        }
        Ok(phi0 * sum)
    } else {
        Ok(s.powf(nu) * bessel(regular_family(case), -nu, z)?)
    }
}

/// `s^nu S_nu(s beta)` for s > 0.
fn second_at(case: CaseTag, nu: f64, beta: f64, s: f64) -> Result<f64> {
    Ok(s.powf(nu) * bessel(second_family(case), nu, s * beta)?)
}

/// Builds the kernel and validates the governing hypothesis.
pub fn build_kernel(alpha: f64, lambda: f64, delta: f64, eta: f64) -> Result<GreenKernel> {
    build_kernel_with(alpha, lambda, delta, eta, false)
}

/// As [`build_kernel`], but `force = true` constructs the kernel even when
/// the governing hypothesis fails (for exploration; iteration refuses such
/// kernels).
pub fn build_kernel_with(
    alpha: f64,
    lambda: f64,
    delta: f64,
    eta: f64,
    force: bool,
) -> Result<GreenKernel> {
    if !(alpha >= 1.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    if !(delta > 0.0) || !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "need delta > 0 and eta in (0,1), got delta={delta}, eta={eta}"
        )));
    }
    if lambda == 0.0 {
        return Err(Error::DegenerateLambda);
    }
    let nu = 0.5 * (1.0 - alpha);
    if nu.abs() > MAX_ORDER {
        return Err(Error::UnsupportedOrder(nu));
    }
    let case = if lambda < 0.0 {
        CaseTag::CaseIII
    } else if is_odd_integer_alpha(alpha) {
        CaseTag::CaseII
    } else {
        if (nu - nu.round()).abs() < CASE1_INTEGER_NU_TOL {
            return Err(Error::InvalidInput(format!(
                "alpha = {alpha} is within 2e-3 of an odd integer; the non-integer-order \
                 formulas are singular there, use the odd-alpha case instead"
            )));
        }
        CaseTag::CaseI
    };
    let pref = match case {
        CaseTag::CaseI => 0.5 * std::f64::consts::PI / sin_pi(nu),
        CaseTag::CaseII => 0.5 * std::f64::consts::PI / cos_pi(nu),
        CaseTag::CaseIII => -1.0,
    };
    let beta = lambda.abs().sqrt();
    let phi0 = bessel_limit_at_zero(regular_family(case), nu, lambda.abs())?;
    let phi1 = regular_at(case, nu, beta, phi0, 1.0)?;
    let phi_eta = regular_at(case, nu, beta, phi0, eta)?;
    let chi1 = second_at(case, nu, beta, 1.0)?;
    let chi_eta = second_at(case, nu, beta, eta)?;
    let denom = phi1 - delta * phi_eta;
    let denom_condition = denom.abs() / (phi1.abs() + (delta * phi_eta).abs()).max(f64::MIN_POSITIVE);
    if denom.abs() <= RESONANCE_TOL {
        return Err(Error::ResonantLambda { lambda, denom_abs: denom.abs() });
    }

    let report = check_hypotheses(alpha, lambda, delta, eta)?;
    let hypothesis = hypothesis_slot(case, delta);
    let hypothesis_ok = report.holds(hypothesis);
    if !hypothesis_ok && !force {
        let detail = report
            .get(hypothesis)
            .map(|e| {
                format!(
                    "zero_gap={:.6e}, cond1={:.6e}, cond2={:.6e}, delta_ok={}",
                    e.margins.zero_gap, e.margins.cond1, e.margins.cond2, e.margins.delta_ok
                )
            })
            .unwrap_or_else(|| "not evaluated".into());
        return Err(Error::HypothesisViolation { name: hypothesis.to_string(), lambda, detail });
    }
    let sign_expectation = match hypothesis {
        Hypothesis::H1 | Hypothesis::H3 => SignExpectation::NonNegative,
        _ => SignExpectation::NonPositive,
    };
    Ok(GreenKernel {
        case,
        alpha,
        lambda,
        delta,
        eta,
        nu,
        denom,
        sign_expectation,
        hypothesis,
        hypothesis_ok,
        denom_condition,
        beta,
        pref,
        phi0,
        phi1,
        phi_eta,
        chi1,
        chi_eta,
    })
}

/// Kernel values along one fixed x; precomputes the x-dependent basis values.
#[derive(Debug, Clone)]
pub struct KernelSection<'a> {
    k: &'a GreenKernel,
    x: f64,
    phi_x: f64,
    /// X(x); not defined at x = 0 (never needed there: x = 0 <= t always).
    chi_x: Option<f64>,
}

impl GreenKernel {
    pub fn phi(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!("basis point {s} outside [0,1]")));
        }
        regular_at(self.case, self.nu, self.beta, self.phi0, s)
    }

    pub fn chi(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("second-solution point {s} outside (0,1]")));
        }
        second_at(self.case, self.nu, self.beta, s)
    }

    /// Fixes x and precomputes its basis values for repeated t sweeps.
    pub fn at(&self, x: f64) -> Result<KernelSection<'_>> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("kernel point x = {x} outside [0,1]")));
        }
        let phi_x = self.phi(x)?;
        let chi_x = if x > 0.0 { Some(self.chi(x)?) } else { None };
        Ok(KernelSection { k: self, x, phi_x, chi_x })
    }
}

impl KernelSection<'_> {
    fn chi_x(&self) -> Result<f64> {
        self.chi_x.ok_or_else(|| {
            Error::Eval("second basis solution required at x = 0 where it diverges".into())
        })
    }

    /// G(x, t) for t in (0, 1].
    pub fn eval(&self, t: f64) -> Result<f64> {
        let k = self.k;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!(
                "kernel point t = {t} outside (0,1]; the t^nu prefactor diverges at 0"
            )));
        }
        let phi_t = k.phi(t)?;
        let chi_t = k.chi(t)?;
        let e_const = k.delta * k.chi_eta - k.chi1;
        let v = if t <= k.eta {
            if self.x <= t {
                k.pref * self.phi_x * (phi_t * e_const / k.denom + chi_t)
            } else {
                k.pref * phi_t * (self.phi_x * e_const / k.denom + self.chi_x()?)
            }
        } else if self.x <= t {
            k.pref * self.phi_x * (k.phi1 * chi_t - k.chi1 * phi_t) / k.denom
        } else {
            k.pref
                * (self.phi_x * (k.delta * k.phi_eta * chi_t - k.chi1 * phi_t) / k.denom
                    + phi_t * self.chi_x()?)
        };
        if !v.is_finite() {
            return Err(Error::Eval(format!(
                "kernel evaluation not finite at (x={}, t={t})",
                self.x
            )));
        }
        Ok(v)
    }
}

/// G(x, t); builds a throwaway section, prefer [`GreenKernel::at`] in loops.
pub fn eval_kernel(k: &GreenKernel, x: f64, t: f64) -> Result<f64> {
    k.at(x)?.eval(t)
}

/// Worst wrong-signed kernel value over an m-by-m sweep of
/// [0,1] x [1e-6, 1], and where it occurred.
#[derive(Debug, Clone, Copy)]
pub struct SignReport {
    /// Magnitude of the largest violation; 0 when the sign is clean.
    pub worst: f64,
    pub at_x: f64,
    pub at_t: f64,
}

pub fn kernel_sign_report(k: &GreenKernel, m: usize) -> Result<SignReport> {
    if m < 11 {
        return Err(Error::InvalidInput(format!("sign sweep needs m >= 11, got {m}")));
    }
    const T_FLOOR: f64 = 1e-6;
    let mut report = SignReport { worst: 0.0, at_x: 0.0, at_t: T_FLOOR };
    for i in 0..m {
        let x = i as f64 / (m - 1) as f64;
        let section = k.at(x)?;
        for j in 0..m {
            let t = T_FLOOR + (1.0 - T_FLOOR) * j as f64 / (m - 1) as f64;
            let g = section.eval(t)?;
            let violation = match k.sign_expectation {
                SignExpectation::NonPositive => g,
                SignExpectation::NonNegative => -g,
            };
            if violation > report.worst {
                report = SignReport { worst: violation, at_x: x, at_t: t };
            }
        }
    }
    Ok(report)
}

/// Solution of the inhomogeneous linear problem
/// `-(x^a y')' - lambda x^a y = x^a h`, `y'(0) = 0`, `y(1) = delta y(eta) + b`:
/// `y(x) = b Phi(x)/D - int_0^1 t^a G(x,t) h(t) dt`, sampled on `grid`.
///
/// G separates into products of one-variable factors on each of its four
/// regions, so all node values come from prefix sums of the per-panel
/// integrals of `t^a Phi(t) h(t)` and `t^a X(t) h(t)` over the grid's
/// inter-node intervals (eta is a grid node, so the formula switch is a
/// panel boundary). This evaluates the same representation as
/// [`crate::quad::integrate_kernel_product`] at every node — see the
/// consistency tests — at a fraction of the kernel evaluations.
pub fn solve_linear<F: Fn(f64) -> f64>(
    k: &GreenKernel,
    h: F,
    b: f64,
    grid: &Grid,
    cfg: &QuadConfig,
) -> Result<GridFunction> {
    if grid.eta() != k.eta {
        return Err(Error::IncompatibleGrids(format!(
            "grid carries eta = {}, kernel eta = {}",
            grid.eta(),
            k.eta
        )));
    }
    let nodes = grid.nodes();
    let n = nodes.len();
    let e = grid.eta_index();

    // Prefix sums of the basis integrals up to each node.
    let mut pphi = vec![0.0; n];
    let mut pchi = vec![0.0; n];
    for j in 1..n {
        let (a, bb) = (nodes[j - 1], nodes[j]);
        let alpha = k.alpha;
        let iphi = crate::quad::integrate(
            |t| match k.phi(t) {
                Ok(p) => t.powf(alpha) * p * h(t),
                Err(_) => f64::NAN,
            },
            a,
            bb,
            cfg,
        )?
        .0;
        let ichi = crate::quad::integrate(
            |t| match k.chi(t) {
                Ok(c) => t.powf(alpha) * c * h(t),
                Err(_) => f64::NAN,
            },
            a,
            bb,
            cfg,
        )?
        .0;
        pphi[j] = pphi[j - 1] + iphi;
        pchi[j] = pchi[j - 1] + ichi;
    }

    let e_const = k.delta * k.chi_eta - k.chi1;
    let mut values = Vec::with_capacity(n);
    for (i, &x) in nodes.iter().enumerate() {
        let phi_x = k.phi(x)?;
        let chi_x = if i > 0 { k.chi(x)? } else { 0.0 };
        let integral = if i <= e {
            // [0,x]: G = P Phi(t) [Phi(x) E/D + X(x)]
            let near = (phi_x * e_const / k.denom + chi_x) * pphi[i];
            // [x,eta]: G = P Phi(x) [Phi(t) E/D + X(t)]
            let mid = phi_x * (e_const / k.denom * (pphi[e] - pphi[i]) + (pchi[e] - pchi[i]));
            // [eta,1]: G = P Phi(x) [Phi(1) X(t) - X(1) Phi(t)] / D
            let far = phi_x / k.denom
                * (k.phi1 * (pchi[n - 1] - pchi[e]) - k.chi1 * (pphi[n - 1] - pphi[e]));
            k.pref * (near + mid + far)
        } else {
            let near = (phi_x * e_const / k.denom + chi_x) * pphi[e];
            // [eta,x]: G = P [Phi(x)(delta Phi(eta) X(t) - X(1) Phi(t))/D + Phi(t) X(x)]
            let mid = phi_x / k.denom
                * (k.delta * k.phi_eta * (pchi[i] - pchi[e]) - k.chi1 * (pphi[i] - pphi[e]))
                + chi_x * (pphi[i] - pphi[e]);
            let far = phi_x / k.denom
                * (k.phi1 * (pchi[n - 1] - pchi[i]) - k.chi1 * (pphi[n - 1] - pphi[i]));
            k.pref * (near + mid + far)
        };
        let boundary = if b == 0.0 { 0.0 } else { b * phi_x / k.denom };
        let v = boundary - integral;
        if !v.is_finite() {
            return Err(Error::Eval(format!("linear solve produced non-finite value at x = {x}")));
        }
        values.push(v);
    }
    GridFunction::new(grid.clone(), values)
}

/// Limit form of the boundary-term coefficient, exposed for tests.
pub fn boundary_coefficient_at_zero(k: &GreenKernel) -> f64 {
    k.phi0 / k.denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_grid;

    fn h0_kernel() -> GreenKernel {
        build_kernel(2.0, 1.0, 0.5, 1.0 / 3.0).unwrap()
    }

    fn h3_kernel() -> GreenKernel {
        build_kernel(1.0, 0.75, 3.0, 1.0 / 7.0).unwrap()
    }

    fn hp0_kernel() -> GreenKernel {
        build_kernel(2.0, -8.0, 1.0 / 3.0, 0.25).unwrap()
    }

    #[test]
    fn h0_denominator_closed_form() {
        // D = sqrt(2/pi) (sin 1 - (3/2) sin(1/3)) > 0 from the half-order
        // closed forms.
        let k = h0_kernel();
        let s2p = (2.0 / std::f64::consts::PI).sqrt();
        let closed = s2p * (1.0_f64.sin() - 1.5 * (1.0_f64 / 3.0).sin());
        assert!(k.denom > 0.0);
        assert!((k.denom - closed).abs() < 1e-12, "D = {}, want {}", k.denom, closed);
        assert_eq!(k.sign_expectation, SignExpectation::NonPositive);
    }

    #[test]
    fn h3_denominator_sign() {
        // D = J0(sqrt(0.75)) - 3 J0(sqrt(0.75)/7) < 0.
        let k = h3_kernel();
        assert!(k.denom < 0.0, "D = {}", k.denom);
        assert_eq!(k.sign_expectation, SignExpectation::NonNegative);
        assert_eq!(k.case, CaseTag::CaseII);
    }

    #[test]
    fn resonance_near_first_zero() {
        // alpha = 2: j_{-1/2,1}^2 = pi^2/4; close to it either the
        // hypothesis fails or the denominator is resonant.
        let lam = (std::f64::consts::FRAC_PI_2).powi(2) - 1e-13;
        let r = build_kernel(2.0, lam, 0.5, 1.0 / 3.0);
        assert!(r.is_err(), "{r:?}");
    }

    #[test]
    fn hypothesis_violation_unless_forced() {
        let r = build_kernel(2.0, 2.0, 3.0, 1.0 / 3.0);
        assert!(matches!(r, Err(Error::HypothesisViolation { .. })));
        let k = build_kernel_with(2.0, 2.0, 3.0, 1.0 / 3.0, true).unwrap();
        assert!(!k.hypothesis_ok);
    }

    #[test]
    fn continuity_across_the_diagonal() {
        for k in [h0_kernel(), h3_kernel(), hp0_kernel()] {
            for &t in &[0.21, k.eta, 0.5, 0.93] {
                let left = eval_kernel(&k, t - 1e-9, t).unwrap();
                let right = eval_kernel(&k, t + 1e-9, t).unwrap();
                assert!(
                    (left - right).abs() < 1e-6,
                    "case {:?}: jump at t={t}: {left} vs {right}",
                    k.case
                );
            }
        }
    }

    #[test]
    fn pointwise_signs_at_spec_points() {
        let g = eval_kernel(&h0_kernel(), 0.5, 0.5).unwrap();
        assert!(g <= 0.0, "H0 kernel positive at diagonal: {g}");
        let g3 = eval_kernel(&h3_kernel(), 0.5, 0.3).unwrap();
        assert!(g3 >= 0.0, "H3 kernel negative: {g3}");
    }

    #[test]
    fn rejects_t_zero() {
        assert!(eval_kernel(&h0_kernel(), 0.5, 0.0).is_err());
    }

    #[test]
    fn sign_sweep_clean_for_h0() {
        let rep = kernel_sign_report(&h0_kernel(), 41).unwrap();
        assert!(rep.worst <= 1e-12, "violation {} at ({}, {})", rep.worst, rep.at_x, rep.at_t);
    }

    #[test]
    fn solve_linear_manufactured_constant() {
        // y = 1 solves h = -lambda, b = 1 - delta.
        let k = h0_kernel();
        let grid = make_grid(64, k.eta).unwrap();
        let cfg = QuadConfig::default();
        let y = solve_linear(&k, |_| -k.lambda, 1.0 - k.delta, &grid, &cfg).unwrap();
        for (&x, &v) in grid.nodes().iter().zip(y.values()) {
            assert!((v - 1.0).abs() < 1e-6, "y({x}) = {v}");
        }
    }

    #[test]
    fn solve_linear_matches_pointwise_kernel_product() {
        // The prefix-sum assembly must agree with the direct per-node
        // integral of t^a G(x,t) h(t) for every case.
        let cfg = QuadConfig::default();
        let h = |t: f64| 0.3 + t * (1.0 - 0.4 * t) + (3.0 * t).sin() * 0.1;
        for k in [h0_kernel(), h3_kernel(), hp0_kernel()] {
            let grid = make_grid(24, k.eta).unwrap();
            let y = solve_linear(&k, h, 0.0, &grid, &cfg).unwrap();
            for (&x, &v) in grid.nodes().iter().zip(y.values()) {
                let direct = -crate::quad::integrate_kernel_product(&k, h, x, &cfg).unwrap();
                assert!(
                    (v - direct).abs() < 1e-9,
                    "case {:?} at x = {x}: assembled {v}, direct {direct}",
                    k.case
                );
            }
        }
    }

    #[test]
    fn solve_linear_zero_data() {
        let k = hp0_kernel();
        let grid = make_grid(32, k.eta).unwrap();
        let y = solve_linear(&k, |_| 0.0, 0.0, &grid, &QuadConfig::default()).unwrap();
        for &v in y.values() {
            assert_eq!(v, 0.0);
        }
    }
}
