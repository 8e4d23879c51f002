//! Initial data on `[-tau_max, 0]`.
//!
//! Histories are either constant vectors (`const:5,1`), analytic expressions
//! in the variable `s` (`expr:sin(s)+1,cos(s)+1`), or tabulated samples
//! interpolated linearly.

use std::fmt;

use crate::error::{Error, Result};
use crate::segment::{self, Segment};

/// Expression over the history variable `s`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => s,
            Expr::Neg(a) => -a.eval(s),
            Expr::Add(a, b) => a.eval(s) + b.eval(s),
            Expr::Sub(a, b) => a.eval(s) - b.eval(s),
            Expr::Mul(a, b) => a.eval(s) * b.eval(s),
            Expr::Div(a, b) => a.eval(s) / b.eval(s),
            Expr::Sin(a) => a.eval(s).sin(),
            Expr::Cos(a) => a.eval(s).cos(),
        }
    }

    pub fn parse(text: &str) -> Result<Expr> {
        let mut p = ExprParser {
            chars: text.chars().collect(),
            pos: 0,
        };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => f.write_str("s"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
        }
    }
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            message: format!("history expression: {message}"),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_digit() || *c == '.')
                {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                text.parse::<f64>()
                    .map(Expr::Num)
                    .map_err(|_| self.error(&format!("invalid number `{text}`")))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match name.as_str() {
                    "s" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "sin" | "cos" => {
                        if self.peek() != Some('(') {
                            return Err(self.error(&format!("expected `(` after `{name}`")));
                        }
                        self.pos += 1;
                        let arg = self.sum()?;
                        if self.peek() != Some(')') {
                            return Err(self.error("expected `)`"));
                        }
                        self.pos += 1;
                        Ok(if name == "sin" {
                            Expr::Sin(Box::new(arg))
                        } else {
                            Expr::Cos(Box::new(arg))
                        })
                    }
                    other => Err(self.error(&format!("unknown identifier `{other}`"))),
                }
            }
            _ => Err(self.error("expected a number, `s`, `sin(...)`, `cos(...)` or `(`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HistoryFunction {
    Constant(Vec<f64>),
    Expression(Vec<Expr>),
    /// Linear interpolation of samples at increasing times ending at 0.
    Tabulated { times: Vec<f64>, values: Vec<Vec<f64>> },
}

impl HistoryFunction {
    pub fn constant(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty history".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!("history values must be positive, got {v}")));
        }
        Ok(Self::Constant(values))
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InvalidArgument("tabulated history needs at least two samples".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || *times.last().unwrap() != 0.0 {
            return Err(Error::InvalidArgument(
                "tabulated history times must increase and end at 0".into(),
            ));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidArgument("tabulated history rows differ in length".into()));
        }
        Ok(Self::Tabulated { times, values })
    }

    /// Parses `const:v1,v2,...` or `expr:e1,e2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("const:") {
            let values = rest
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("invalid history value `{}`", v.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            Self::constant(values)
        } else if let Some(rest) = spec.strip_prefix("expr:") {
            let exprs = split_top_level(rest)
                .into_iter()
                .map(Expr::parse)
                .collect::<Result<Vec<_>>>()?;
            Ok(Self::Expression(exprs))
        } else {
            Err(Error::InvalidArgument(format!(
                "history must start with `const:` or `expr:`, got `{spec}`"
            )))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(v) => v.len(),
            Self::Expression(e) => e.len(),
            Self::Tabulated { values, .. } => values[0].len(),
        }
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        match self {
            Self::Constant(v) => v.clone(),
            Self::Expression(e) => e.iter().map(|e| e.eval(s)).collect(),
            Self::Tabulated { times, values } => {
                if s <= times[0] {
                    return values[0].clone();
                }
                if s >= 0.0 {
                    return values[values.len() - 1].clone();
                }
                let k = times.partition_point(|&t| t <= s) - 1;
                let w = (s - times[k]) / (times[k + 1] - times[k]);
                values[k]
                    .iter()
                    .zip(&values[k + 1])
                    .map(|(a, b)| a + w * (b - a))
                    .collect()
            }
        }
    }

    /// Checks the history is non-negative on `[-tau_max, 0]` (sampled on a
    /// fine grid) and strictly positive at `s = 0`.
    ///
    /// Isolated zeros before `0` are accepted: `sin(s) + 1` touches zero at
    /// `s = -pi/2`.
    pub fn validate(&self, dim: usize, tau_max: f64) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        if let Self::Tabulated { times, .. } = self {
            if times[0] > -tau_max {
                return Err(Error::InvalidArgument(format!(
                    "tabulated history starts at {} but delays reach back to {}",
                    times[0], -tau_max
                )));
            }
        }
        let at_zero = self.eval(0.0);
        if let Some((j, v)) = at_zero.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "history component {j} must be positive at s = 0, got {v}"
            )));
        }
        const SAMPLES: usize = 4096;
        for k in 0..=SAMPLES {
            let s = -tau_max * k as f64 / SAMPLES as f64;
            if let Some((j, v)) = self
                .eval(s)
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v >= -1e-12))
            {
                return Err(Error::InvalidArgument(format!(
                    "history component {j} is negative at s = {s}: {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Segment for HistoryFunction {
    fn dim(&self) -> usize {
        HistoryFunction::dim(self)
    }

    fn value(&self, s: f64) -> Vec<f64> {
        self.eval(s)
    }

    fn integrate(&self, lo: f64, hi: f64, g: &dyn Fn(&[f64]) -> f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            Self::Constant(v) => g(v) * (hi - lo),
            Self::Expression(_) => segment::adaptive_simpson(&|s| g(&self.eval(s)), lo, hi),
            Self::Tabulated { times, .. } => {
                let mut cuts = vec![lo];
                cuts.extend(times.iter().copied().filter(|&t| t > lo && t < hi));
                cuts.push(hi);
                cuts.windows(2)
                    .map(|w| segment::adaptive_simpson(&|s| g(&self.eval(s)), w[0], w[1]))
                    .sum()
            }
        }
    }

    fn as_constant(&self) -> Option<Vec<f64>> {
        match self {
            Self::Constant(v) => Some(v.clone()),
            _ => None,
        }
    }
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}
