//! Regime classification, hypothesis evaluation and admissible lambda search.
//!
//! For `sup(df/dy) > 0` the sign of the Green's function flips with alpha:
//! alpha in U(4n-3, 4n-1) or alpha in {3,7,11,...} gives the well-ordered
//! (maximum-principle) regime, alpha in U(4n-1, 4n+1) or alpha in {1,5,9,...}
//! the reverse-ordered (anti-maximum) one. For `sup(df/dy) < 0` every
//! alpha >= 1 is well-ordered under negative lambda.

use crate::error::{Error, Result};
use crate::specfun::{bessel, first_positive_zero, BesselFamily, MAX_ORDER};

/// Alpha within this distance of an odd integer is treated as odd: integer
/// nu makes J_nu, J_{-nu} linearly dependent and the non-integer formulas
/// numerically singular.
pub const ODD_INTEGER_TOL: f64 = 1e-12;

/// Scan floor for the negative-lambda window search; the hypothesis tends to
/// persist as lambda -> -inf, so reporting needs a finite cutoff.
pub const LAMBDA_SCAN_FLOOR: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// lambda > 0, alpha not an odd integer.
    CaseI,
    /// lambda > 0, alpha an odd integer.
    CaseII,
    /// lambda < 0, any alpha >= 1.
    CaseIII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    WellOrdered,
    ReverseOrdered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FySign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    H0,
    H1,
    H2,
    H3,
    HPrime0,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseTag::CaseI => write!(f, "CaseI"),
            CaseTag::CaseII => write!(f, "CaseII"),
            CaseTag::CaseIII => write!(f, "CaseIII"),
        }
    }
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeTag::WellOrdered => write!(f, "WellOrdered"),
            RegimeTag::ReverseOrdered => write!(f, "ReverseOrdered"),
        }
    }
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::H0 => write!(f, "H0"),
            Hypothesis::H1 => write!(f, "H1"),
            Hypothesis::H2 => write!(f, "H2"),
            Hypothesis::H3 => write!(f, "H3"),
            Hypothesis::HPrime0 => write!(f, "H'0"),
        }
    }
}

pub fn is_odd_integer_alpha(alpha: f64) -> bool {
    let r = alpha.round();
    (alpha - r).abs() <= ODD_INTEGER_TOL && (r as i64).rem_euclid(2) == 1
}

/// Places alpha (and the sign of df/dy) in the classification table.
pub fn classify_alpha(alpha: f64, fy_sign: FySign) -> Result<(CaseTag, RegimeTag, Hypothesis)> {
    if !(alpha >= 1.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    Ok(match fy_sign {
        FySign::Negative => (CaseTag::CaseIII, RegimeTag::WellOrdered, Hypothesis::HPrime0),
        FySign::Positive => {
            if is_odd_integer_alpha(alpha) {
                let m = alpha.round() as i64;
                if m.rem_euclid(4) == 3 {
                    (CaseTag::CaseII, RegimeTag::WellOrdered, Hypothesis::H2)
                } else {
                    (CaseTag::CaseII, RegimeTag::ReverseOrdered, Hypothesis::H3)
                }
            } else {
                // Strips between consecutive odd integers, alternating from
                // (1,3) = well-ordered.
                let k = ((alpha - 1.0) / 2.0).floor() as i64;
                if k.rem_euclid(2) == 0 {
                    (CaseTag::CaseI, RegimeTag::WellOrdered, Hypothesis::H0)
                } else {
                    (CaseTag::CaseI, RegimeTag::ReverseOrdered, Hypothesis::H1)
                }
            }
        }
    })
}

/// Evaluated left-hand quantities behind one hypothesis verdict.
#[derive(Debug, Clone, Copy)]
pub struct Margins {
    /// First-zero-squared minus lambda; infinite when no zero bound applies.
    pub zero_gap: f64,
    /// The delta-weighted Bessel combination (first sign condition).
    pub cond1: f64,
    /// The kernel-denominator combination (second sign condition).
    pub cond2: f64,
    /// Whether delta sits in the hypothesis' required range.
    pub delta_ok: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct HypothesisEval {
    pub name: Hypothesis,
    pub holds: bool,
    pub margins: Margins,
}

/// Truth and margins of the hypotheses applicable at the given parameters.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub case: CaseTag,
    pub nu: f64,
    pub evaluated: Vec<HypothesisEval>,
}

impl HypothesisReport {
    pub fn holds(&self, h: Hypothesis) -> bool {
        self.evaluated.iter().any(|e| e.name == h && e.holds)
    }

    pub fn get(&self, h: Hypothesis) -> Option<&HypothesisEval> {
        self.evaluated.iter().find(|e| e.name == h)
    }

    /// The hypothesis that holds, if any; at most one can by construction.
    pub fn governing(&self) -> Option<&HypothesisEval> {
        self.evaluated.iter().find(|e| e.holds)
    }
}

/// The hypothesis slot a kernel at these parameters is judged against,
/// whether or not it holds.
pub fn hypothesis_slot(case: CaseTag, delta: f64) -> Hypothesis {
    match case {
        CaseTag::CaseI => {
            if delta < 1.0 {
                Hypothesis::H0
            } else {
                Hypothesis::H1
            }
        }
        CaseTag::CaseII => {
            if delta < 1.0 {
                Hypothesis::H2
            } else {
                Hypothesis::H3
            }
        }
        CaseTag::CaseIII => Hypothesis::HPrime0,
    }
}

fn check_parameters(alpha: f64, delta: f64, eta: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta must be > 0, got {delta}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput(format!("eta must lie in (0,1), got {eta}")));
    }
    let nu = 0.5 * (1.0 - alpha);
    if nu.abs() > MAX_ORDER {
        return Err(Error::UnsupportedOrder(nu));
    }
    Ok(nu)
}

/// Evaluates the hypotheses applicable at (alpha, lambda, delta, eta):
/// H0/H1 for Case I, H2/H3 for Case II, H'0 for lambda < 0. Comparisons are
/// strict or non-strict exactly as the inequalities are stated.
pub fn check_hypotheses(alpha: f64, lambda: f64, delta: f64, eta: f64) -> Result<HypothesisReport> {
    let nu = check_parameters(alpha, delta, eta)?;
    if lambda == 0.0 {
        return Err(Error::DegenerateLambda);
    }
    let eta_nu = eta.powf(nu);

    if lambda < 0.0 {
        let m = (-lambda).sqrt();
        let cond1 = bessel(BesselFamily::K, nu, m)? - delta * eta_nu * bessel(BesselFamily::K, nu, eta * m)?;
        let cond2 = bessel(BesselFamily::I, -nu, m)? - delta * eta_nu * bessel(BesselFamily::I, -nu, eta * m)?;
        let holds = delta > 0.0 && cond1 <= 0.0 && cond2 > 0.0;
        return Ok(HypothesisReport {
            case: CaseTag::CaseIII,
            nu,
            evaluated: vec![HypothesisEval {
                name: Hypothesis::HPrime0,
                holds,
                margins: Margins { zero_gap: f64::INFINITY, cond1, cond2, delta_ok: delta > 0.0 },
            }],
        });
    }

    let root = lambda.sqrt();
    if is_odd_integer_alpha(alpha) {
        // Case II: the second solution is Y_nu; the lambda window is bounded
        // by the first zero of Y_nu.
        let z = first_positive_zero(BesselFamily::Y, nu)?;
        let zero_gap = z * z - lambda;
        let cond1 =
            delta * eta_nu * bessel(BesselFamily::Y, nu, eta * root)? - bessel(BesselFamily::Y, nu, root)?;
        let cond2 =
            bessel(BesselFamily::J, -nu, root)? - delta * eta_nu * bessel(BesselFamily::J, -nu, eta * root)?;
        let in_window = lambda > 0.0 && zero_gap > 0.0;
        let h2 = HypothesisEval {
            name: Hypothesis::H2,
            holds: in_window && delta > 0.0 && delta < 1.0 && cond1 >= 0.0 && cond2 > 0.0,
            margins: Margins { zero_gap, cond1, cond2, delta_ok: delta > 0.0 && delta < 1.0 },
        };
        let h3 = HypothesisEval {
            name: Hypothesis::H3,
            holds: in_window && delta >= 1.0 && cond1 <= 0.0 && cond2 < 0.0,
            margins: Margins { zero_gap, cond1, cond2, delta_ok: delta >= 1.0 },
        };
        Ok(HypothesisReport { case: CaseTag::CaseII, nu, evaluated: vec![h2, h3] })
    } else {
        let z = first_positive_zero(BesselFamily::J, nu)?;
        let zero_gap = z * z - lambda;
        let cond1 =
            delta * eta_nu * bessel(BesselFamily::J, nu, eta * root)? - bessel(BesselFamily::J, nu, root)?;
        let cond2 =
            bessel(BesselFamily::J, -nu, root)? - delta * eta_nu * bessel(BesselFamily::J, -nu, eta * root)?;
        let in_window = lambda > 0.0 && zero_gap > 0.0;
        let h0 = HypothesisEval {
            name: Hypothesis::H0,
            holds: in_window && delta > 0.0 && delta < 1.0 && cond1 >= 0.0 && cond2 > 0.0,
            margins: Margins { zero_gap, cond1, cond2, delta_ok: delta > 0.0 && delta < 1.0 },
        };
        let h1 = HypothesisEval {
            name: Hypothesis::H1,
            holds: in_window && delta >= 1.0 && cond1 <= 0.0 && cond2 < 0.0,
            margins: Margins { zero_gap, cond1, cond2, delta_ok: delta >= 1.0 },
        };
        Ok(HypothesisReport { case: CaseTag::CaseI, nu, evaluated: vec![h0, h1] })
    }
}

/// First-zero-squared candidates entering the uniqueness bound lambda_1 for
/// this alpha. Modified Bessel functions have no positive real zeros, so only
/// the J zero (Case I) or the Y zero (Case II) applies; negative-lambda
/// problems reuse the positive-lambda bound of the same alpha.
pub fn lambda1_candidates(alpha: f64) -> Result<Vec<f64>> {
    let nu = 0.5 * (1.0 - alpha);
    if !(alpha >= 1.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    if nu.abs() > MAX_ORDER {
        return Err(Error::UnsupportedOrder(nu));
    }
    let fam = if is_odd_integer_alpha(alpha) { BesselFamily::Y } else { BesselFamily::J };
    let z = first_positive_zero(fam, nu)?;
    Ok(vec![z * z])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSign {
    Positive,
    Negative,
}

/// A maximal interval of admissible lambda.
#[derive(Debug, Clone, Copy)]
pub struct LambdaWindow {
    pub lo: f64,
    pub hi: f64,
    pub sign: LambdaSign,
    pub nonempty: bool,
    pub hypothesis: Hypothesis,
}

impl LambdaWindow {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Spot-checks the governing hypothesis at 5 interior points.
    pub fn spot_check(&self, alpha: f64, delta: f64, eta: f64) -> Result<bool> {
        if !self.nonempty {
            return Ok(true);
        }
        for i in 1..=5 {
            let lam = self.lo + (self.hi - self.lo) * i as f64 / 6.0;
            if !check_hypotheses(alpha, lam, delta, eta)?.holds(self.hypothesis) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

const SCAN_POINTS: usize = 400;
const BISECT_TOL: f64 = 1e-8;

/// Intersects the existence theorem's lambda inequality with the region
/// where the governing hypothesis holds. Scans 400 equispaced candidates,
/// keeps the longest contiguous admissible run, and bisects its ends.
pub fn admissible_lambda_window(
    alpha: f64,
    delta: f64,
    eta: f64,
    m_bound: f64,
    regime: RegimeTag,
    sign: LambdaSign,
) -> Result<LambdaWindow> {
    admissible_lambda_window_with_floor(alpha, delta, eta, m_bound, regime, sign, LAMBDA_SCAN_FLOOR)
}

pub fn admissible_lambda_window_with_floor(
    alpha: f64,
    delta: f64,
    eta: f64,
    m_bound: f64,
    regime: RegimeTag,
    sign: LambdaSign,
    scan_floor: f64,
) -> Result<LambdaWindow> {
    check_parameters(alpha, delta, eta)?;
    if !(m_bound >= 0.0) {
        return Err(Error::InvalidInput(format!("M must be >= 0, got {m_bound}")));
    }
    let fy = match sign {
        LambdaSign::Positive => FySign::Positive,
        LambdaSign::Negative => FySign::Negative,
    };
    let (_case, expected_regime, hyp) = classify_alpha(alpha, fy)?;
    if expected_regime != regime {
        return Err(Error::InvalidInput(format!(
            "regime {regime} inconsistent with alpha = {alpha} and lambda sign"
        )));
    }

    // Theorem-side base interval.
    let (lo, hi) = match (sign, regime) {
        // Reverse order needs lambda >= M1 below the first-zero square.
        (LambdaSign::Positive, RegimeTag::ReverseOrdered) => {
            let z2 = lambda1_candidates(alpha)?[0];
            (m_bound.max(BISECT_TOL), z2)
        }
        // Well order with positive lambda needs lambda <= M2.
        (LambdaSign::Positive, RegimeTag::WellOrdered) => {
            let z2 = lambda1_candidates(alpha)?[0];
            (BISECT_TOL, m_bound.min(z2))
        }
        // Negative lambda needs lambda <= -M3, truncated at the scan floor.
        (LambdaSign::Negative, RegimeTag::WellOrdered) => (scan_floor, -m_bound.max(BISECT_TOL)),
        (LambdaSign::Negative, RegimeTag::ReverseOrdered) => {
            return Err(Error::InvalidInput(
                "no reverse-ordered theorem applies for lambda < 0".into(),
            ))
        }
    };
    let empty = LambdaWindow { lo: 0.0, hi: 0.0, sign, nonempty: false, hypothesis: hyp };
    if !(lo < hi) {
        return Ok(empty);
    }

    let step = (hi - lo) / SCAN_POINTS as f64;
    let candidate = |i: usize| lo + (i as f64 + 0.5) * step;
    let admissible = |lam: f64| -> Result<bool> {
        Ok(check_hypotheses(alpha, lam, delta, eta)?.holds(hyp))
    };

    // Longest contiguous run of admissible candidates.
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for i in 0..SCAN_POINTS {
        if admissible(candidate(i))? {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            if best.map_or(true, |(bs, be)| i - s > be - bs) {
                best = Some((s, i));
            }
        }
    }
    if let Some(s) = run_start {
        if best.map_or(true, |(bs, be)| SCAN_POINTS - s > be - bs) {
            best = Some((s, SCAN_POINTS));
        }
    }
    let Some((s, e)) = best else {
        return Ok(empty);
    };

    // Refine each boundary between the last inadmissible and first
    // admissible candidate (or clamp at the base endpoints).
    let w_lo;
    if s == 0 {
        w_lo = lo;
    } else {
        let (mut bad, mut good) = (candidate(s - 1), candidate(s));
        while good - bad > BISECT_TOL {
            let mid = 0.5 * (bad + good);
            if admissible(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        w_lo = good;
    }
    let w_hi;
    if e == SCAN_POINTS {
        w_hi = hi;
    } else {
        let (mut good, mut bad) = (candidate(e - 1), candidate(e));
        while bad - good > BISECT_TOL {
            let mid = 0.5 * (good + bad);
            if admissible(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        w_hi = good;
    }
    Ok(LambdaWindow { lo: w_lo, hi: w_hi, sign, nonempty: w_lo < w_hi, hypothesis: hyp })
}
