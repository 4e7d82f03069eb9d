//! Brute-force oracles shared by the integration tests.
//!
//! Everything here is deliberately independent of the library's evaluation
//! path: ascending power series with explicit remainder control, closed
//! half-order forms, Stirling's gamma, plain bisection and fixed-schedule
//! composite Simpson quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_86;

/// Stirling-series gamma with argument shift, reflection for x < 0.5.
pub fn gamma_oracle(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_oracle(1.0 - x));
    }
    let mut shift = 1.0;
    let mut z = x;
    while z < 12.0 {
        shift *= z;
        z += 1.0;
    }
    let lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * z)
        - 1.0 / (360.0 * z.powi(3))
        + 1.0 / (1260.0 * z.powi(5))
        - 1.0 / (1680.0 * z.powi(7))
        + 1.0 / (1188.0 * z.powi(9));
    lg.exp() / shift
}

/// Ascending power series for J_nu, any real order. Stops when the term
/// falls below `rel_tol` times the running sum (alternating series, so the
/// first dropped term bounds the truncation error).
pub fn j_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut sum = 0.0;
    let mut term_mag = half.powf(nu); // (x/2)^{nu+2k}
    for k in 0..400 {
        let g = gamma_oracle(nu + k as f64 + 1.0);
        let factk = gamma_oracle(k as f64 + 1.0);
        let term = if g.is_infinite() { 0.0 } else { term_mag / (factk * g) };
        let signed = if k % 2 == 0 { term } else { -term };
        sum += signed;
        term_mag *= q;
        if term.abs() < 1e-17 * sum.abs().max(1e-280) && k > 4 {
            break;
        }
    }
    sum
}

/// Ascending power series for I_nu (all terms positive).
pub fn i_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut sum = 0.0;
    let mut term_mag = half.powf(nu);
    for k in 0..400 {
        let g = gamma_oracle(nu + k as f64 + 1.0);
        let factk = gamma_oracle(k as f64 + 1.0);
        let term = if g.is_infinite() { 0.0 } else { term_mag / (factk * g) };
        sum += term;
        term_mag *= q;
        if term < 1e-17 * sum && k > 4 {
            break;
        }
    }
    sum
}

/// Logarithmic series for Y_0.
pub fn y0_series(x: f64) -> f64 {
    let mut sigma = 0.0;
    let q = 0.25 * x * x;
    let mut pow = 1.0;
    let mut fact = 1.0;
    let mut h = 0.0;
    for k in 1..200 {
        pow *= q;
        fact *= k as f64;
        h += 1.0 / k as f64;
        let term = h * pow / (fact * fact);
        sigma += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 * sigma.abs().max(1.0) {
            break;
        }
    }
    2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j_series(0.0, x) + sigma)
}

/// Logarithmic series for K_0.
pub fn k0_series(x: f64) -> f64 {
    let mut sigma = 0.0;
    let q = 0.25 * x * x;
    let mut pow = 1.0;
    let mut fact = 1.0;
    let mut h = 0.0;
    for k in 1..200 {
        pow *= q;
        fact *= k as f64;
        h += 1.0 / k as f64;
        let term = h * pow / (fact * fact);
        sigma += term;
        if term < 1e-17 * sigma.max(1.0) {
            break;
        }
    }
    -(((0.5 * x).ln() + EULER_GAMMA) * i_series(0.0, x)) + sigma
}

// Closed half-order forms.
pub fn j_half(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * x.sin()
}
pub fn j_minus_half(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * x.cos()
}
pub fn y_half(x: f64) -> f64 {
    -(2.0 / (PI * x)).sqrt() * x.cos()
}
pub fn i_half(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * x.sinh()
}
pub fn i_minus_half(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * x.cosh()
}
pub fn k_half(x: f64) -> f64 {
    (PI / (2.0 * x)).sqrt() * (-x).exp()
}

/// Bisection to absolute tolerance `tol`; panics if the bracket is invalid.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    assert!(flo * fhi <= 0.0, "invalid bracket [{lo}, {hi}]");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo.signum() != fm.signum() {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Scan with a fixed step until the sign changes, then bisect.
pub fn first_zero_by_scan(f: impl Fn(f64) -> f64, start: f64, step: f64, limit: f64) -> f64 {
    let mut a = start;
    let mut fa = f(a);
    loop {
        let b = a + step;
        assert!(b <= limit, "no sign change before {limit}");
        let fb = f(b);
        if fa.signum() != fb.signum() {
            return bisect(f, a, b, 1e-13);
        }
        a = b;
        fa = fb;
    }
}

/// Fixed-schedule composite Simpson rule; no adaptivity, for cross-checking
/// the library quadrature on smooth panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) & !1usize; // even
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

// ---------------------------------------------------------------------------
// The four worked problems, as library objects
// ---------------------------------------------------------------------------

pub mod problems {
    use sbvp::model::{BoundaryFunction, ProblemSpec};

    pub struct Instance {
        pub problem: ProblemSpec,
        pub lambda: f64,
        pub grid_n: usize,
        pub name: &'static str,
    }

    /// Reverse ordered, alpha = 1 (H3): f = (alpha(e^y - 1) - x)/4,
    /// delta = 3, eta = 1/7, u0 = -1 <= v0 = 1, M = e alpha/4, lambda = 3/4.
    pub fn example1() -> Instance {
        let alpha = 1.0;
        let problem = ProblemSpec::new(
            alpha,
            3.0,
            1.0 / 7.0,
            0.0,
            move |x, y: f64| (alpha * (y.exp() - 1.0) - x) / 4.0,
            std::f64::consts::E * alpha / 4.0,
            BoundaryFunction::new(|_| -1.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        Instance { problem, lambda: 0.75, grid_n: 256, name: "example1" }
    }

    /// Well ordered with lambda > 0, alpha = 2 (H0): f = d e^y with
    /// d = 2(1+alpha)e^{-2/3}/3, delta = 1/2, eta = 1/3,
    /// v0 = 0 <= u0 = (2-x^2)/3, M = d, lambda = d.
    pub fn example2() -> Instance {
        let alpha = 2.0;
        let d = 2.0 * (1.0 + alpha) * (-2.0_f64 / 3.0).exp() / 3.0;
        let problem = ProblemSpec::new(
            alpha,
            0.5,
            1.0 / 3.0,
            0.0,
            move |_x, y: f64| d * y.exp(),
            d,
            BoundaryFunction::new(|x| (2.0 - x * x) / 3.0, |x| -2.0 * x / 3.0, |_| -2.0 / 3.0),
            BoundaryFunction::new(|_| 0.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        Instance { problem, lambda: d, grid_n: 256, name: "example2" }
    }

    /// Well ordered with lambda < 0, alpha = 2 (H'0): f = 1 - 2y^3,
    /// delta = 1/3, eta = 1/4, v0 = -1 <= u0 = 1, M3 = 6, lambda = -6.
    pub fn example3() -> Instance {
        let problem = ProblemSpec::new(
            2.0,
            1.0 / 3.0,
            0.25,
            0.0,
            |_x, y: f64| 1.0 - 2.0 * y * y * y,
            6.0,
            BoundaryFunction::new(|_| 1.0, |_| 0.0, |_| 0.0),
            BoundaryFunction::new(|_| -1.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        Instance { problem, lambda: -6.0, grid_n: 256, name: "example3" }
    }

    /// Well ordered with lambda < 0 and delta > 1, alpha = 3 (H'0):
    /// f = 1 - 7y^2, delta = 2.2, eta = 1/5, v0 = 0 <= u0 = 7/4 + (5/2)x^2,
    /// M3 = 119/2, lambda = -119/2.
    pub fn example4() -> Instance {
        let problem = ProblemSpec::new(
            3.0,
            2.2,
            0.2,
            0.0,
            |_x, y: f64| 1.0 - 7.0 * y * y,
            59.5,
            BoundaryFunction::new(
                |x| 1.75 + 2.5 * x * x,
                |x| 5.0 * x,
                |_| 5.0,
            ),
            BoundaryFunction::new(|_| 0.0, |_| 0.0, |_| 0.0),
        )
        .unwrap();
        Instance { problem, lambda: -59.5, grid_n: 512, name: "example4" }
    }

    pub fn all() -> Vec<Instance> {
        vec![example1(), example2(), example3(), example4()]
    }
}

/// A tiny deterministic RNG (xorshift64*) so tests need no external seed
/// management for reproducible sampling.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
