//! Exact-constant number syntax for inputs.
//!
//! Accepts decimals and small arithmetic expressions over `pi` and `sqrt`:
//! `0.25`, `1/sqrt2`, `-1/sqrt(2)`, `pi/4`, `3pi/4`, `7*pi/12`, `sqrt3/2`.
//! Juxtaposition multiplies, so `3pi` is `3*pi`.

use std::f64::consts::PI;

use serde_json::Value;
use thiserror::Error;

use crate::sdp::fmt_sig12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumParseError {
    #[error("cannot parse {input:?} at offset {offset}: {message}")]
    Syntax { input: String, offset: usize, message: String },
    #[error("{input:?} does not evaluate to a finite number")]
    NonFinite { input: String },
    #[error("bad epsilon grid {input:?}: {message}")]
    Grid { input: String, message: String },
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, chars: src.char_indices().filter(|(_, c)| !c.is_whitespace()).collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, NumParseError> {
        Err(NumParseError::Syntax { input: self.src.to_owned(), offset: self.offset(), message: message.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let n = w.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().map(|&(_, c)| c.to_ascii_lowercase()).eq(w.chars());
        if matches {
            self.pos += n;
        }
        matches
    }

    fn expr(&mut self) -> Result<f64, NumParseError> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, NumParseError> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else if self.starts_primary() {
                v *= self.primary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, NumParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.primary()
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == '(' || c == 'π' || c == '√')
    }

    fn primary(&mut self) -> Result<f64, NumParseError> {
        match self.peek() {
            None => self.fail("unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return self.fail("expected ')'");
                }
                Ok(v)
            }
            Some('π') => {
                self.pos += 1;
                Ok(PI)
            }
            Some('√') => {
                self.pos += 1;
                Ok(self.primary()?.sqrt())
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(_) => {
                if self.eat_word("pi") {
                    Ok(PI)
                } else if self.eat_word("sqrt") {
                    Ok(self.primary()?.sqrt())
                } else {
                    self.fail("expected a number, 'pi', 'sqrt' or '('")
                }
            }
        }
    }

    fn number(&mut self) -> Result<f64, NumParseError> {
        let start = self.pos;
        let mut text = String::new();
        while let Some(c) = self.peek() {
            let exponent_sign = matches!(c, '+' | '-') && text.ends_with(['e', 'E']);
            if c.is_ascii_digit() || c == '.' || exponent_sign {
                text.push(c);
                self.pos += 1;
            } else if matches!(c, 'e' | 'E') && self.chars.get(self.pos + 1).is_some_and(|&(_, d)| d.is_ascii_digit() || d == '-' || d == '+') {
                text.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.fail(format!("malformed number {text:?}"))
        })
    }
}

/// Evaluates a number expression.
pub fn parse_number(s: &str) -> Result<f64, NumParseError> {
    let mut p = Parser::new(s);
    let v = p.expr()?;
    if p.peek().is_some() {
        return p.fail("unexpected trailing input");
    }
    if !v.is_finite() {
        return Err(NumParseError::NonFinite { input: s.to_owned() });
    }
    Ok(v)
}

/// A JSON number or a string accepted by [`parse_number`].
pub fn number_from_json(v: &Value) -> Result<f64, NumParseError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| NumParseError::NonFinite { input: n.to_string() }),
        Value::String(s) => parse_number(s),
        other => Err(NumParseError::Syntax { input: other.to_string(), offset: 0, message: "expected a number or a string".into() }),
    }
}

fn round_sig12(x: f64) -> f64 {
    fmt_sig12(x).parse().expect("formatted float parses")
}

/// Parses `a:b:step` (inclusive of `b` up to rounding) or a comma-separated
/// list. Every grid value is rounded to 12 significant digits.
pub fn parse_eps_grid(s: &str) -> Result<Vec<f64>, NumParseError> {
    let bad = |m: &str| NumParseError::Grid { input: s.to_owned(), message: m.to_owned() };
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (parse_number(a)?, parse_number(b)?, parse_number(step)?);
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if b < a {
                return Err(bad("end lies below start"));
            }
            let n = ((b - a) / step * (1.0 + 1e-12) + 1e-9).floor();
            if n > 1e6 {
                return Err(bad("more than a million points"));
            }
            (0..=n as usize).map(|k| round_sig12(a + k as f64 * step)).collect::<Vec<_>>()
        }
        [list] => list.split(',').map(|t| parse_number(t).map(round_sig12)).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(bad("expected a:b:step or a comma-separated list")),
    };
    if grid.is_empty() {
        return Err(bad("grid is empty"));
    }
    if grid.iter().any(|&e| e < 0.0) {
        return Err(bad("epsilon must be nonnegative"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    #[test]
    fn constants() {
        assert_eq!(parse_number("1/sqrt2").unwrap(), 1.0 / 2f64.sqrt());
        assert!((parse_number("-1/sqrt(2)").unwrap() + FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(parse_number("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_number("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_number("7*pi/12").unwrap(), 7.0 * PI / 12.0);
        assert_eq!(parse_number(" 0.25 ").unwrap(), 0.25);
        assert_eq!(parse_number("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_number("2.5E+1").unwrap(), 25.0);
        assert_eq!(parse_number("sqrt3/2").unwrap(), 3f64.sqrt() / 2.0);
        assert_eq!(parse_number("π/2").unwrap(), PI / 2.0);
        assert_eq!(parse_number("pi/2 - pi/4").unwrap(), PI / 2.0 - PI / 4.0);
    }

    #[test]
    fn rejects() {
        for s in ["", "pie", "1/", "(1", "1..2", "sqrt", "abc", "1/0", "2 3 x"] {
            assert!(parse_number(s).is_err(), "{s}");
        }
    }

    #[test]
    fn grids() {
        let g = parse_eps_grid("0:0.05:0.005").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.015);
        assert_eq!(g[10], 0.05);
        assert_eq!(parse_eps_grid("0,0.01,1e-3").unwrap(), vec![0.0, 0.01, 0.001]);
        assert!(parse_eps_grid("0:1:0").is_err());
        assert!(parse_eps_grid("1:0:0.1").is_err());
        assert!(parse_eps_grid("-0.1").is_err());
        assert!(parse_eps_grid("0:1").is_err());
    }

    #[test]
    fn json_numbers() {
        assert_eq!(number_from_json(&serde_json::json!(0.5)).unwrap(), 0.5);
        assert_eq!(number_from_json(&serde_json::json!("pi")).unwrap(), PI);
        assert!(number_from_json(&serde_json::json!(true)).is_err());
    }
}
