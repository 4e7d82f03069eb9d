//! Shared domain types: problem descriptions, meshes and grid functions.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Nodes must differ by more than this to count as distinct when `eta` is
/// inserted into a uniform mesh.
const NODE_MERGE_TOL: f64 = 1e-12;

/// A 1-D mesh over [0,1] containing 0, `eta` and 1 as exact nodes.
#[derive(Debug, Clone)]
pub struct Grid {
    nodes: Arc<[f64]>,
    eta_index: usize,
}

impl Grid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.nodes[self.eta_index]
    }

    pub fn eta_index(&self) -> usize {
        self.eta_index
    }

    /// Two grids are compatible when they hold identical node sets.
    pub fn same_nodes(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes) || self.nodes == other.nodes
    }

    /// Index of the interval [nodes[i], nodes[i+1]] containing `x`.
    fn interval_of(&self, x: f64) -> usize {
        let n = self.nodes.len();
        match self.nodes.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }
}

/// Builds the sorted union of `{i/n : 0 <= i <= n}` and `{eta}`.
///
/// `eta` always lands on an exact node so the nonlocal condition
/// `y(1) = delta*y(eta) + b` never needs interpolation.
pub fn make_grid(n: usize, eta: f64) -> Result<Grid> {
    if n < 4 {
        return Err(Error::InvalidMesh(format!("need n >= 4 subintervals, got {n}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidMesh(format!("eta must lie in (0,1), got {eta}")));
    }
    let mut nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let p = nodes.partition_point(|&v| v < eta);
    // p >= 1 since eta > 0 = nodes[0].
    let eta_index = if (nodes[p] - eta).abs() <= NODE_MERGE_TOL {
        nodes[p] = eta;
        p
    } else if (eta - nodes[p - 1]).abs() <= NODE_MERGE_TOL {
        nodes[p - 1] = eta;
        p - 1
    } else {
        nodes.insert(p, eta);
        p
    };
    Ok(Grid { nodes: nodes.into(), eta_index })
}

/// Values of a candidate solution on a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite grid value {v}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at_eta(&self) -> f64 {
        self.values[self.grid.eta_index()]
    }

    /// Piecewise-linear interpolation without the domain check; `x` must lie
    /// in [0,1].
    pub(crate) fn interp_unchecked(&self, x: f64) -> f64 {
        let i = self.grid.interval_of(x);
        let (x0, x1) = (self.grid.nodes[i], self.grid.nodes[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        if x1 == x0 {
            return y0;
        }
        let w = (x - x0) / (x1 - x0);
        y0 + w * (y1 - y0)
    }
}

/// Piecewise-linear interpolation of `g` at `x`; exact at the nodes.
pub fn interp(g: &GridFunction, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("interpolation point {x} outside [0,1]")));
    }
    Ok(g.interp_unchecked(x))
}

/// Max-norm distance between two grid functions on the same node set.
pub fn sup_norm_diff(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    if !a.grid.same_nodes(&b.grid) {
        return Err(Error::IncompatibleGrids(
            "sup_norm_diff requires identical node sets".into(),
        ));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// An initial iterate with user-supplied derivatives.
///
/// Derivatives come from the caller (in the CLI, from the expression parser)
/// so that upper/lower validation is not polluted by differencing noise.
pub struct BoundaryFunction {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    d1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    d2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BoundaryFunction {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { value: Box::new(value), d1: Box::new(d1), d2: Box::new(d2) }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }
}

impl std::fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundaryFunction").finish_non_exhaustive()
    }
}

/// A full problem instance
/// `-(x^a y')' = x^a f(x,y)`, `y'(0) = 0`, `y(1) = delta*y(eta) + b`.
pub struct ProblemSpec {
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    /// Boundary inhomogeneity; 0 for the nonlinear three-point condition.
    pub b: f64,
    f: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// One-sided Lipschitz bound M for f in y (M1/M2/M3 of the existence
    /// theorems and M_lambda of the uniqueness test).
    pub f_y_bound: f64,
    pub upper0: BoundaryFunction,
    pub lower0: BoundaryFunction,
}

impl ProblemSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        delta: f64,
        eta: f64,
        b: f64,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        f_y_bound: f64,
        upper0: BoundaryFunction,
        lower0: BoundaryFunction,
    ) -> Result<Self> {
        if !(alpha >= 1.0) {
            return Err(Error::InvalidInput(format!("alpha must be >= 1, got {alpha}")));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("delta must be > 0, got {delta}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidInput(format!("eta must lie in (0,1), got {eta}")));
        }
        if !(f_y_bound >= 0.0) {
            return Err(Error::InvalidInput(format!("M must be >= 0, got {f_y_bound}")));
        }
        Ok(Self { alpha, delta, eta, b, f: Box::new(f), f_y_bound, upper0, lower0 })
    }

    pub fn f(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("alpha", &self.alpha)
            .field("delta", &self.delta)
            .field("eta", &self.eta)
            .field("b", &self.b)
            .field("f_y_bound", &self.f_y_bound)
            .finish_non_exhaustive()
    }
}
