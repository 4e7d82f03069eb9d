//! A small expression language for problem data: real literals, the
//! variables `x`, `y`, `alpha`, the operators `+ - * / ^` (with `^`
//! right-associative and binding tighter than unary minus), and the
//! functions `exp`, `log`, `sin`, `cos`, `sqrt`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Syntax error with the byte offset where parsing stopped.
#[derive(Debug, Clone)]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ExprError {}

/// Tagged evaluation failure (domain violation or non-finite result).
#[derive(Debug, Clone)]
pub struct EvalError {
    pub message: String,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "evaluation error: {}", self.message)
    }
}

impl std::error::Error for EvalError {}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Result<Self, ExprError> {
        let mut lx = Self { src: src.as_bytes(), pos: 0, tok: Tok::End, tok_pos: 0 };
        lx.advance()?;
        Ok(lx)
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> ExprError {
        ExprError { offset, message: message.into() }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_pos = self.pos;
        if self.pos >= self.src.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = self.src[self.pos];
        self.tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                    let mut probe = self.pos + 1;
                    if probe < self.src.len() && matches!(self.src[probe], b'+' | b'-') {
                        probe += 1;
                    }
                    if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                        self.pos = probe;
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos])
                    .map_err(|_| self.err(start, "invalid utf-8 in number"))?;
                let v: f64 =
                    text.parse().map_err(|_| self.err(start, format!("bad number `{text}`")))?;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
                Tok::Ident(text.to_string())
            }
            other => {
                return Err(self.err(self.pos, format!("unexpected character `{}`", other as char)))
            }
        };
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parser: add -> mul -> unary -> power -> atom
// ---------------------------------------------------------------------------

fn parse_add(lx: &mut Lexer) -> Result<Expr, ExprError> {
    let mut lhs = parse_mul(lx)?;
    loop {
        let op = match lx.tok {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => return Ok(lhs),
        };
        lx.advance()?;
        let rhs = parse_mul(lx)?;
        lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
    }
}

fn parse_mul(lx: &mut Lexer) -> Result<Expr, ExprError> {
    let mut lhs = parse_unary(lx)?;
    loop {
        let op = match lx.tok {
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return Ok(lhs),
        };
        lx.advance()?;
        let rhs = parse_unary(lx)?;
        lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
    }
}

fn parse_unary(lx: &mut Lexer) -> Result<Expr, ExprError> {
    if lx.tok == Tok::Minus {
        lx.advance()?;
        let inner = parse_unary(lx)?;
        return Ok(Expr::Neg(Box::new(inner)));
    }
    parse_power(lx)
}

fn parse_power(lx: &mut Lexer) -> Result<Expr, ExprError> {
    let base = parse_atom(lx)?;
    if lx.tok == Tok::Caret {
        lx.advance()?;
        // Right-associative; the exponent may carry its own unary minus.
        let exponent = parse_unary(lx)?;
        return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
    }
    Ok(base)
}

fn parse_atom(lx: &mut Lexer) -> Result<Expr, ExprError> {
    match lx.tok.clone() {
        Tok::Num(v) => {
            lx.advance()?;
            Ok(Expr::Num(v))
        }
        Tok::LParen => {
            lx.advance()?;
            let inner = parse_add(lx)?;
            if lx.tok != Tok::RParen {
                return Err(lx.err(lx.tok_pos, "expected `)`"));
            }
            lx.advance()?;
            Ok(inner)
        }
        Tok::Ident(name) => {
            let pos = lx.tok_pos;
            lx.advance()?;
            match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "alpha" => Ok(Expr::Var(Var::Alpha)),
                "exp" | "log" | "sin" | "cos" | "sqrt" => {
                    if lx.tok != Tok::LParen {
                        return Err(lx.err(lx.tok_pos, format!("expected `(` after `{name}`")));
                    }
                    lx.advance()?;
                    let arg = parse_add(lx)?;
                    if lx.tok != Tok::RParen {
                        return Err(lx.err(lx.tok_pos, "expected `)`"));
                    }
                    lx.advance()?;
                    let f = match name.as_str() {
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Sqrt,
                    };
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                other => Err(lx.err(pos, format!("unknown identifier `{other}`"))),
            }
        }
        Tok::End => Err(lx.err(lx.tok_pos, "unexpected end of input")),
        other => Err(lx.err(lx.tok_pos, format!("unexpected token {other:?}"))),
    }
}

/// Parses `src` into an AST. `parse(print(parse(s)))` is the identity on
/// the AST.
pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    if src.trim().is_empty() {
        return Err(ExprError { offset: 0, message: "empty expression".into() });
    }
    let mut lx = Lexer::new(src)?;
    let e = parse_add(&mut lx)?;
    if lx.tok != Tok::End {
        return Err(lx.err(lx.tok_pos, "unexpected trailing input"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Evaluation and printing
// ---------------------------------------------------------------------------

impl Expr {
    /// Evaluates at (x, y, alpha). Domain violations are tagged errors, and
    /// any non-finite result is rejected.
    pub fn eval(&self, x: f64, y: f64, alpha: f64) -> Result<f64, EvalError> {
        let v = self.eval_inner(x, y, alpha)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError { message: format!("non-finite result {v}") })
        }
    }

    fn eval_inner(&self, x: f64, y: f64, alpha: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Var(Var::Alpha) => alpha,
            Expr::Neg(e) => -e.eval_inner(x, y, alpha)?,
            Expr::Call(f, a) => {
                let v = a.eval_inner(x, y, alpha)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(EvalError { message: format!("log of nonpositive {v}") });
                        }
                        v.ln()
                    }
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError { message: format!("sqrt of negative {v}") });
                        }
                        v.sqrt()
                    }
                }
            }
            Expr::Bin(op, l, r) => {
                let a = l.eval_inner(x, y, alpha)?;
                let b = r.eval_inner(x, y, alpha)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError { message: "division by zero".into() });
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(EvalError {
                                message: format!("0 raised to negative power {b}"),
                            });
                        }
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(EvalError {
                                message: format!("negative base {a} with non-integer exponent {b}"),
                            });
                        }
                        a.powf(b)
                    }
                }
            }
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, needs_parens: bool) -> fmt::Result {
    if needs_parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Var(Var::Alpha) => write!(f, "alpha"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                write_child(f, e, e.prec() < 3)
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Exp => "exp",
                    Func::Log => "log",
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({a})")
            }
            Expr::Bin(op, l, r) => {
                let p = self.prec();
                match op {
                    BinOp::Pow => {
                        // Left child at or below ^ must be wrapped (the
                        // grammar only produces bare atoms there); the right
                        // child parses at unary level.
                        write_child(f, l, l.prec() <= 4)?;
                        write!(f, "^")?;
                        write_child(f, r, r.prec() < 3)
                    }
                    _ => {
                        let sym = match op {
                            BinOp::Add => "+",
                            BinOp::Sub => "-",
                            BinOp::Mul => "*",
                            BinOp::Div => "/",
                            BinOp::Pow => unreachable!(),
                        };
                        write_child(f, l, l.prec() < p)?;
                        write!(f, "{sym}")?;
                        write_child(f, r, r.prec() <= p)
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn spec_expression_parses_and_evaluates() {
        let e = p("(alpha*(exp(y)-1)-x)/4");
        let v = e.eval(0.5, 0.0, 1.0).unwrap();
        assert!((v - (-0.125)).abs() < 1e-15, "{v}");
    }

    #[test]
    fn power_binds_tighter_than_mul() {
        let e = p("1-2*y^3");
        let v = e.eval(0.0, 2.0, 0.0).unwrap();
        assert_eq!(v, -15.0);
    }

    #[test]
    fn power_is_right_associative() {
        let e = p("2^3^2");
        assert_eq!(e.eval(0.0, 0.0, 0.0).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_below_power() {
        // -x^2 = -(x^2)
        let e = p("-x^2");
        assert_eq!(e.eval(3.0, 0.0, 0.0).unwrap(), -9.0);
        // 2^-2
        let e2 = p("2^-2");
        assert_eq!(e2.eval(0.0, 0.0, 0.0).unwrap(), 0.25);
    }

    #[test]
    fn unbalanced_call_reports_offset() {
        let err = parse_expr("exp(").unwrap_err();
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn unknown_identifier_reports_offset() {
        let err = parse_expr("1 + zz").unwrap_err();
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn tagged_domain_errors() {
        assert!(p("log(x)").eval(-1.0, 0.0, 0.0).is_err());
        assert!(p("sqrt(x)").eval(-1.0, 0.0, 0.0).is_err());
        assert!(p("x^-1").eval(0.0, 0.0, 0.0).is_err());
        assert!(p("1/x").eval(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        for s in [
            "(alpha*(exp(y)-1)-x)/4",
            "1-2*y^3",
            "-x^2+3/(y-4)",
            "2^-2^3",
            "x-(y-alpha)",
            "x/(y/alpha)",
            "sqrt(x)*cos(y)-sin(x)/log(2+y)",
            "-(x+y)",
            "7/4+5/2*x^2",
        ] {
            let a = p(s);
            let b = p(&a.to_string());
            assert_eq!(a, b, "round trip failed for `{s}` -> `{a}`");
        }
    }
}
