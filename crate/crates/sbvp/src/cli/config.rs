//! INI-style run configuration: sections `[problem]`, `[order]`, `[solver]`,
//! `[output]` with `key = value` lines, `#` comments and quoted expression
//! strings.

use std::collections::BTreeMap;
use std::fmt;

use super::expr::{parse_expr, Expr};
use crate::error::{Error, Result as LibResult};
use crate::model::{BoundaryFunction, ProblemSpec};

#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error (line {}): {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct ProblemSection {
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub b: f64,
    pub f: Expr,
    /// One-sided Lipschitz bound M.
    pub m: f64,
}

#[derive(Debug, Clone)]
pub struct OrderSection {
    pub upper: Expr,
    pub upper_d1: Expr,
    pub upper_d2: Expr,
    pub lower: Expr,
    pub lower_d1: Expr,
    pub lower_d2: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaSpec {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct SolverSection {
    pub lambda: LambdaSpec,
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Default)]
pub struct OutputSection {
    pub solution: Option<String>,
    pub trace: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub order: OrderSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

type Raw = BTreeMap<String, BTreeMap<String, (String, usize)>>;

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_raw(text: &str) -> Result<Raw, ConfigError> {
    let mut raw: Raw = BTreeMap::new();
    let mut section = String::new();
    for (idx, full_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(full_line).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_lowercase();
            raw.entry(section.clone()).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError { line: lineno, message: format!("expected key = value, got `{line}`") });
        };
        if section.is_empty() {
            return Err(ConfigError { line: lineno, message: "key outside any [section]".into() });
        }
        let key = key.trim().to_lowercase();
        let mut value = value.trim().to_string();
        if value.starts_with('"') {
            if value.len() < 2 || !value.ends_with('"') {
                return Err(ConfigError { line: lineno, message: "unterminated quoted string".into() });
            }
            value = value[1..value.len() - 1].to_string();
        }
        raw.entry(section.clone()).or_default().insert(key, (value, lineno));
    }
    Ok(raw)
}

struct Section<'a> {
    name: &'static str,
    map: &'a BTreeMap<String, (String, usize)>,
}

impl Section<'_> {
    fn required(&self, key: &str) -> Result<(&str, usize), ConfigError> {
        self.map
            .get(key)
            .map(|(v, l)| (v.as_str(), *l))
            .ok_or_else(|| ConfigError {
                line: 0,
                message: format!("missing key `{key}` in [{}]", self.name),
            })
    }

    fn float(&self, key: &str) -> Result<f64, ConfigError> {
        let (v, line) = self.required(key)?;
        v.parse().map_err(|_| ConfigError { line, message: format!("bad number for `{key}`: `{v}`") })
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| ConfigError { line: *line, message: format!("bad number for `{key}`: `{v}`") }),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|_| ConfigError { line: *line, message: format!("bad integer for `{key}`: `{v}`") }),
        }
    }

    fn expr(&self, key: &str) -> Result<Expr, ConfigError> {
        let (v, line) = self.required(key)?;
        parse_expr(v).map_err(|e| ConfigError { line, message: format!("in `{key}`: {e}") })
    }

    fn string_opt(&self, key: &str) -> Option<String> {
        self.map.get(key).map(|(v, _)| v.clone())
    }
}

/// Parses a config file. All expressions must parse; numeric defaults are
/// b = 0, grid_n = 512, tol = 1e-8, max_iter = 200.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = parse_raw(text)?;
    let get = |name: &'static str| -> Result<Section<'_>, ConfigError> {
        raw.get(name)
            .map(|map| Section { name, map })
            .ok_or_else(|| ConfigError { line: 0, message: format!("missing [{name}] section") })
    };

    let p = get("problem")?;
    let problem = ProblemSection {
        alpha: p.float("alpha")?,
        delta: p.float("delta")?,
        eta: p.float("eta")?,
        b: p.float_or("b", 0.0)?,
        f: p.expr("f")?,
        m: p.float("m")?,
    };

    let o = get("order")?;
    let order = OrderSection {
        upper: o.expr("upper")?,
        upper_d1: o.expr("upper_d1")?,
        upper_d2: o.expr("upper_d2")?,
        lower: o.expr("lower")?,
        lower_d1: o.expr("lower_d1")?,
        lower_d2: o.expr("lower_d2")?,
    };

    let s = get("solver")?;
    let lambda = match s.map.get("lambda") {
        None => LambdaSpec::Auto,
        Some((v, line)) => {
            if v.eq_ignore_ascii_case("auto") {
                LambdaSpec::Auto
            } else {
                LambdaSpec::Fixed(v.parse().map_err(|_| ConfigError {
                    line: *line,
                    message: format!("lambda must be a number or `auto`, got `{v}`"),
                })?)
            }
        }
    };
    let solver = SolverSection {
        lambda,
        grid_n: s.usize_or("grid_n", 512)?,
        tol: s.float_or("tol", 1e-8)?,
        max_iter: s.usize_or("max_iter", 200)?,
    };

    let output = match raw.get("output") {
        None => OutputSection::default(),
        Some(map) => {
            let sec = Section { name: "output", map };
            OutputSection { solution: sec.string_opt("solution"), trace: sec.string_opt("trace") }
        }
    };

    Ok(RunConfig { problem, order, solver, output })
}

/// Re-emits a config; `parse_config(emit_config(c))` is semantically
/// identical to `c`.
pub fn emit_config(c: &RunConfig) -> String {
    let mut out = String::new();
    let p = &c.problem;
    out.push_str("[problem]\n");
    out.push_str(&format!("alpha = {}\n", p.alpha));
    out.push_str(&format!("delta = {}\n", p.delta));
    out.push_str(&format!("eta = {}\n", p.eta));
    out.push_str(&format!("b = {}\n", p.b));
    out.push_str(&format!("f = \"{}\"\n", p.f));
    out.push_str(&format!("m = {}\n", p.m));
    out.push_str("\n[order]\n");
    let o = &c.order;
    out.push_str(&format!("upper = \"{}\"\n", o.upper));
    out.push_str(&format!("upper_d1 = \"{}\"\n", o.upper_d1));
    out.push_str(&format!("upper_d2 = \"{}\"\n", o.upper_d2));
    out.push_str(&format!("lower = \"{}\"\n", o.lower));
    out.push_str(&format!("lower_d1 = \"{}\"\n", o.lower_d1));
    out.push_str(&format!("lower_d2 = \"{}\"\n", o.lower_d2));
    out.push_str("\n[solver]\n");
    match c.solver.lambda {
        LambdaSpec::Auto => out.push_str("lambda = auto\n"),
        LambdaSpec::Fixed(v) => out.push_str(&format!("lambda = {v}\n")),
    }
    out.push_str(&format!("grid_n = {}\n", c.solver.grid_n));
    out.push_str(&format!("tol = {}\n", c.solver.tol));
    out.push_str(&format!("max_iter = {}\n", c.solver.max_iter));
    out.push_str("\n[output]\n");
    if let Some(s) = &c.output.solution {
        out.push_str(&format!("solution = \"{s}\"\n"));
    }
    if let Some(t) = &c.output.trace {
        out.push_str(&format!("trace = \"{t}\"\n"));
    }
    out
}

/// Builds the in-memory problem from a parsed config. Expression evaluation
/// failures inside the solver surface as non-finite values, which the
/// quadrature and validators reject with tagged errors.
pub fn build_problem(cfg: &RunConfig) -> LibResult<ProblemSpec> {
    let alpha = cfg.problem.alpha;
    let f = cfg.problem.f.clone();
    let as_fn1 = |e: Expr| {
        move |x: f64| e.eval(x, 0.0, alpha).unwrap_or(f64::NAN)
    };
    let upper = BoundaryFunction::new(
        as_fn1(cfg.order.upper.clone()),
        as_fn1(cfg.order.upper_d1.clone()),
        as_fn1(cfg.order.upper_d2.clone()),
    );
    let lower = BoundaryFunction::new(
        as_fn1(cfg.order.lower.clone()),
        as_fn1(cfg.order.lower_d1.clone()),
        as_fn1(cfg.order.lower_d2.clone()),
    );
    ProblemSpec::new(
        alpha,
        cfg.problem.delta,
        cfg.problem.eta,
        cfg.problem.b,
        move |x, y| f.eval(x, y, alpha).unwrap_or(f64::NAN),
        cfg.problem.m,
        upper,
        lower,
    )
    .map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("config problem section: {m}")),
        other => other,
    })
}
