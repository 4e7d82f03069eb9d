//! Independent finite-difference Newton solver for the full nonlinear
//! three-point problem, and residual measurement. This is the ground-truth
//! check for the Green's-function iteration: it shares no code with the
//! kernel path (second-order differences, damped Newton, numerical df/dy).

use crate::error::{Error, Result};
use crate::model::{make_grid, GridFunction, ProblemSpec};

/// Mesh/Newton controls for the finite-difference solve.
#[derive(Debug, Clone)]
pub struct FdConfig {
    /// Subintervals before eta insertion.
    pub n: usize,
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Central-difference step for the numerical df/dy.
    pub fy_step: f64,
}

impl FdConfig {
    pub fn new(n: usize, newton_tol: f64, newton_max: usize, fy_step: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidInput(format!("FD mesh needs n >= 16, got {n}")));
        }
        if !(newton_tol > 0.0 && fy_step > 0.0) || newton_max == 0 {
            return Err(Error::InvalidInput("bad Newton controls".into()));
        }
        Ok(Self { n, newton_tol, newton_max, fy_step })
    }

    pub fn with_n(n: usize) -> Self {
        Self { n, ..Self::default() }
    }
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { n: 1024, newton_tol: 1e-10, newton_max: 50, fy_step: 1e-6 }
    }
}

/// Three-point difference weights at an interior node of a nonuniform mesh.
/// Returns (a, b, c) so that y'' ~ a y_{i-1} + b y_i + c y_{i+1} and
/// (d, e, g) for y'.
fn stencil(hm: f64, hp: f64) -> ([f64; 3], [f64; 3]) {
    let d2 = [
        2.0 / (hm * (hm + hp)),
        -2.0 / (hm * hp),
        2.0 / (hp * (hm + hp)),
    ];
    let d1 = [
        -hp / (hm * (hm + hp)),
        (hp - hm) / (hm * hp),
        hm / (hp * (hm + hp)),
    ];
    (d2, d1)
}

/// Residual vector of the discretized problem. Row 0 is the origin limit
/// equation -(1+a) y''(0) = f(0, y_0) with y''(0) ~ 2(y_1 - y_0)/h^2 (uses
/// y'(0) = 0), rows 1..N-1 the interior collocation, row N the nonlocal
/// boundary condition.
fn residual_vec(p: &ProblemSpec, nodes: &[f64], y: &[f64], eta_index: usize) -> Vec<f64> {
    let n = nodes.len() - 1;
    let mut f = vec![0.0; n + 1];
    let h0 = nodes[1] - nodes[0];
    f[0] = -(1.0 + p.alpha) * 2.0 * (y[1] - y[0]) / (h0 * h0) - p.f(0.0, y[0]);
    for i in 1..n {
        let hm = nodes[i] - nodes[i - 1];
        let hp = nodes[i + 1] - nodes[i];
        let (d2, d1) = stencil(hm, hp);
        let ypp = d2[0] * y[i - 1] + d2[1] * y[i] + d2[2] * y[i + 1];
        let yp = d1[0] * y[i - 1] + d1[1] * y[i] + d1[2] * y[i + 1];
        f[i] = -ypp - p.alpha / nodes[i] * yp - p.f(nodes[i], y[i]);
    }
    f[n] = y[n] - p.delta * y[eta_index] - p.b;
    f
}

/// Tridiagonal solve (Thomas); the matrix rows are (sub, diag, sup).
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return Err(Error::SingularJacobian);
    }
    if n > 1 {
        c[0] = sup[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i - 1] * c[i - 1];
        if piv.abs() < 1e-300 || !piv.is_finite() {
            return Err(Error::SingularJacobian);
        }
        if i < n - 1 {
            c[i] = sup[i] / piv;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Solves the nonlinear three-point problem by damped Newton iteration on
/// the second-order finite-difference discretization. The Jacobian is
/// tridiagonal plus the nonlocal boundary row, eliminated by a bordered
/// two-solve trick.
pub fn fd_solve(p: &ProblemSpec, cfg: &FdConfig, init: &GridFunction) -> Result<GridFunction> {
    if cfg.n < 16 {
        return Err(Error::InvalidInput(format!("FD mesh needs n >= 16, got {}", cfg.n)));
    }
    let grid = make_grid(cfg.n, p.eta)?;
    if !grid.same_nodes(init.grid()) {
        return Err(Error::IncompatibleGrids(
            "initial iterate must live on the FD mesh (make_grid(cfg.n, eta))".into(),
        ));
    }
    let nodes = grid.nodes().to_vec();
    let n = nodes.len() - 1;
    let k = grid.eta_index();
    let mut y = init.values().to_vec();
    let mut fvec = residual_vec(p, &nodes, &y, k);
    let mut fnorm = inf_norm(&fvec);
    let mut growth_streak = 0usize;
    let mut last_step_norm = f64::INFINITY;

    for _ in 0..cfg.newton_max {
        if fnorm <= cfg.newton_tol {
            return GridFunction::new(grid, y);
        }
        // Tridiagonal Jacobian for rows 0..N-1; df/dy by central differences.
        let mut sub = vec![0.0; n - 1]; // J[i][i-1], i = 1..n-1
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n - 1]; // J[i][i+1] for i = 0..n-2
        let h0 = nodes[1] - nodes[0];
        let fy0 = {
            let h = cfg.fy_step * y[0].abs().max(1.0);
            (p.f(0.0, y[0] + h) - p.f(0.0, y[0] - h)) / (2.0 * h)
        };
        diag[0] = 2.0 * (1.0 + p.alpha) / (h0 * h0) - fy0;
        sup[0] = -2.0 * (1.0 + p.alpha) / (h0 * h0);
        let mut last_sup = 0.0; // coefficient of y_N in row N-1
        for i in 1..n {
            let hm = nodes[i] - nodes[i - 1];
            let hp = nodes[i + 1] - nodes[i];
            let (d2, d1) = stencil(hm, hp);
            let ax = p.alpha / nodes[i];
            let fy = {
                let h = cfg.fy_step * y[i].abs().max(1.0);
                (p.f(nodes[i], y[i] + h) - p.f(nodes[i], y[i] - h)) / (2.0 * h)
            };
            sub[i - 1] = -(d2[0] + ax * d1[0]);
            diag[i] = -(d2[1] + ax * d1[1]) - fy;
            let up = -(d2[2] + ax * d1[2]);
            if i < n - 1 {
                sup[i] = up;
            } else {
                last_sup = up;
            }
        }
        // Bordered elimination: rows 0..N-1 couple y_N only through row N-1.
        // Solve T u = -F and T v = -e_{N-1} * last_sup, then fix y_N from
        // the boundary row  dy_N - delta dy_k = -F_N.
        let mut rhs_u: Vec<f64> = fvec[..n].iter().map(|v| -v).collect();
        let mut rhs_v = vec![0.0; n];
        rhs_v[n - 1] = -last_sup;
        let u = thomas(&sub, &diag, &sup, &rhs_u)?;
        let v = thomas(&sub, &diag, &sup, &rhs_v)?;
        rhs_u.clear();
        let denom = 1.0 - p.delta * v.get(k).copied().unwrap_or(0.0);
        if denom.abs() < 1e-300 || !denom.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let dn = (p.delta * u.get(k).copied().unwrap_or(0.0) - fvec[n]) / denom;
        let mut step: Vec<f64> = (0..n).map(|i| u[i] + dn * v[i]).collect();
        step.push(dn);

        let step_norm = inf_norm(&step);
        if !step_norm.is_finite() {
            return Err(Error::SingularJacobian);
        }
        if step_norm > last_step_norm {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Err(Error::NewtonDiverged(growth_streak));
            }
        } else {
            growth_streak = 0;
        }
        last_step_norm = step_norm;

        // Damping: halve until the residual norm stops exceeding the old one.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<f64> = y.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
            let ftrial = residual_vec(p, &nodes, &trial, k);
            let ftnorm = inf_norm(&ftrial);
            if ftnorm.is_finite() && (ftnorm < fnorm || step_norm * scale <= cfg.newton_tol) {
                y = trial;
                fvec = ftrial;
                fnorm = ftnorm;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDiverged(0));
        }
        if step_norm * scale <= cfg.newton_tol {
            return GridFunction::new(grid, y);
        }
    }
    if fnorm <= cfg.newton_tol {
        GridFunction::new(grid, y)
    } else {
        Err(Error::NewtonDiverged(cfg.newton_max))
    }
}

/// Sup-norm defect of `y` in the differential equation and both boundary
/// conditions, by centered differences (limit form at x = 0).
pub fn residual(p: &ProblemSpec, y: &GridFunction) -> f64 {
    let nodes = y.grid().nodes();
    let vals = y.values();
    let n = nodes.len() - 1;
    let mut worst: f64 = 0.0;
    let h0 = nodes[1] - nodes[0];
    worst = worst
        .max((-(1.0 + p.alpha) * 2.0 * (vals[1] - vals[0]) / (h0 * h0) - p.f(0.0, vals[0])).abs());
    for i in 1..n {
        let hm = nodes[i] - nodes[i - 1];
        let hp = nodes[i + 1] - nodes[i];
        let (d2, d1) = stencil(hm, hp);
        let ypp = d2[0] * vals[i - 1] + d2[1] * vals[i] + d2[2] * vals[i + 1];
        let yp = d1[0] * vals[i - 1] + d1[1] * vals[i] + d1[2] * vals[i + 1];
        worst = worst.max((-ypp - p.alpha / nodes[i] * yp - p.f(nodes[i], vals[i])).abs());
    }
    // Nonlocal condition and the y'(0) = 0 defect (quadratic fit through the
    // first three nodes).
    worst = worst.max((vals[n] - p.delta * y.value_at_eta() - p.b).abs());
    let h1 = nodes[2] - nodes[1];
    let d0 = -vals[0] * (2.0 * h0 + h1) / (h0 * (h0 + h1)) + vals[1] * (h0 + h1) / (h0 * h1)
        - vals[2] * h0 / (h1 * (h0 + h1));
    worst.max(d0.abs())
}
