//! Composite adaptive Gauss-Legendre quadrature.
//!
//! Kernel-product integrals split [0,1] at the kernel breakpoints t = x
//! (derivative jump) and t = eta (formula switch) before any adaptivity, so
//! refinement is spent on genuine variation instead of rediscovering the
//! known kinks. Panels never evaluate the t = 0 endpoint: Gauss nodes are
//! interior, which is what makes the t^(alpha+nu) end weight harmless.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::green::GreenKernel;

/// Panel order, tolerances and refinement depth for adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadConfig {
    /// Gauss points per panel.
    pub base_order: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl QuadConfig {
    pub fn new(base_order: usize, rel_tol: f64, abs_tol: f64, max_depth: usize) -> Result<Self> {
        if base_order < 2 {
            return Err(Error::InvalidInput(format!("base_order must be >= 2, got {base_order}")));
        }
        if !(rel_tol > 0.0 && abs_tol > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }
        Ok(Self { base_order, rel_tol, abs_tol, max_depth })
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { base_order: 16, rel_tol: 1e-10, abs_tol: 1e-12, max_depth: 30 }
    }
}

type Rule = Arc<[(f64, f64)]>;

/// Gauss-Legendre nodes and weights on (-1,1), cached per order.
fn rule(order: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("rule cache poisoned");
    map.entry(order).or_insert_with(|| gauss_legendre(order).into()).clone()
}

/// Nodes by Newton iteration on P_n; standard Golub-Welsch-free construction.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out[i] = (-z, w);
        out[n - 1 - i] = (z, w);
    }
    out
}

/// P_n(z) and P_n'(z) via the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = 0.0;
    for j in 0..n {
        let p2 = p1;
        p1 = p0;
        let jf = j as f64;
        p0 = ((2.0 * jf + 1.0) * z * p1 - jf * p2) / (jf + 1.0);
    }
    let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
    (p0, dp)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, r: &Rule) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for &(z, w) in r.iter() {
        let v = f(mid + h * z);
        if !v.is_finite() {
            return Err(Error::Eval(format!("integrand not finite at t = {}", mid + h * z)));
        }
        s += w * v;
    }
    Ok(s * h)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    cfg: &QuadConfig,
    r: &Rule,
    abs_budget: f64,
    depth: usize,
) -> Result<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid, r)?;
    let right = panel(f, mid, b, r)?;
    let s2 = left + right;
    let err = (s2 - whole).abs();
    if err <= abs_budget.max(cfg.rel_tol * s2.abs()) {
        return Ok((s2, err));
    }
    if depth >= cfg.max_depth {
        return Err(Error::IntegrationFailure { best: s2, err_est: err });
    }
    let (lv, le) = adapt(f, a, mid, left, cfg, r, 0.5 * abs_budget, depth + 1)?;
    let (rv, re) = adapt(f, mid, b, right, cfg, r, 0.5 * abs_budget, depth + 1)?;
    Ok((lv + rv, le + re))
}

/// Adaptive integral of `f` over [a,b] with a panel-halving error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    if !(a <= b) {
        return Err(Error::Domain(format!("integration bounds out of order: [{a}, {b}]")));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    let r = rule(cfg.base_order.max(2));
    let whole = panel(&f, a, b, &r)?;
    adapt(&f, a, b, whole, cfg, &r, cfg.abs_tol, 0)
}

/// `int_0^1 t^alpha G(x,t) g(t) dt` with mandatory panel boundaries at the
/// kernel breakpoints t = x and t = eta.
pub fn integrate_kernel_product<F: Fn(f64) -> f64>(
    k: &GreenKernel,
    g: F,
    x: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("kernel-product point {x} outside [0,1]")));
    }
    let section = k.at(x)?;
    let alpha = k.alpha;
    let mut cuts = [0.0, x.min(k.eta), x.max(k.eta), 1.0];
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite cut"));
    let integrand = |t: f64| match section.eval(t) {
        Ok(gxt) => t.powf(alpha) * gxt * g(t),
        Err(_) => f64::NAN,
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] - w[0] > 0.0 {
            total += integrate(&integrand, w[0], w[1], cfg)?.0;
        }
    }
    Ok(total)
}
