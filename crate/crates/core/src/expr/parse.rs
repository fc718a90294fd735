//! Infix grammar for expression input.
//!
//! `z` is the variable, complex literals look like `a+bi`, powers take
//! integer exponents (`^-2`), and the function forms are `exp`, `log`,
//! `sin`, `cos`, `gamma`, `qgamma(q; x)`, `sn(x; k)`, `prodq(q; x)`,
//! `shift(f; c)`, `rescale(f; q)`. Parse errors carry line and column.

use num_complex::Complex64;

use super::{Expr, ExprRef};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub fn parse_expr(input: &str) -> Result<ExprRef, ParseError> {
    let tokens = tokenize(input)?;
    let mut p = Parser { tokens, pos: 0, input };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err_at(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool), // value, imaginary-unit suffix
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
}

struct Spanned {
    tok: Tok,
    offset: usize,
}

fn line_col(input: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in input.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn tokenize(input: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Spanned { tok: Tok::Plus, offset: i });
                i += 1;
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, offset: i });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, offset: i });
                i += 1;
            }
            '/' => {
                out.push(Spanned { tok: Tok::Slash, offset: i });
                i += 1;
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, offset: i });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, offset: i });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, offset: i });
                i += 1;
            }
            ';' => {
                out.push(Spanned { tok: Tok::Semi, offset: i });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let save = i;
                    i += 1;
                    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                        i += 1;
                    }
                    if i < bytes.len() && bytes[i].is_ascii_digit() {
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    } else {
                        i = save; // 'e' was an identifier after all; stop the number
                    }
                }
                let text = &input[start..i];
                let value: f64 = text.parse().map_err(|_| {
                    let (line, column) = line_col(input, start);
                    ParseError { line, column, message: format!("bad number literal `{text}`") }
                })?;
                let mut imag = false;
                if i < bytes.len() && bytes[i] == b'i' {
                    // an 'i' immediately after a number is the imaginary unit
                    // unless it starts a longer identifier
                    let next_alnum = i + 1 < bytes.len()
                        && ((bytes[i + 1] as char).is_ascii_alphanumeric() || bytes[i + 1] == b'_');
                    if !next_alnum {
                        imag = true;
                        i += 1;
                    }
                }
                out.push(Spanned { tok: Tok::Num(value, imag), offset: start });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(input[start..i].to_string()), offset: start });
            }
            _ => {
                let (line, column) = line_col(input, i);
                return Err(ParseError {
                    line,
                    column,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn err_at(&self, pos: usize, msg: &str) -> ParseError {
        let offset = if pos < self.tokens.len() {
            self.tokens[pos].offset
        } else {
            self.input.len()
        };
        let (line, column) = line_col(self.input, offset);
        ParseError { line, column, message: msg.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.tokens.get(self.pos).map(|s| &s.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_at(self.pos, &format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<ExprRef, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::add(lhs, rhs);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprRef, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ExprRef, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<ExprRef, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let neg = if self.peek() == Some(&Tok::Minus) {
                self.pos += 1;
                true
            } else {
                false
            };
            let at = self.pos;
            match self.bump() {
                Some(Tok::Num(v, false)) if v.fract() == 0.0 && v.abs() < 2_147_483_647.0 => {
                    let mut k = *v as i32;
                    if neg {
                        k = -k;
                    }
                    Ok(Expr::powi(base, k))
                }
                _ => Err(self.err_at(at, "power exponent must be an integer literal")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<ExprRef, ParseError> {
        let at = self.pos;
        match self.bump().cloned() {
            Some(Tok::Num(v, imag)) => Ok(Expr::constant(if imag {
                Complex64::new(0.0, v)
            } else {
                Complex64::new(v, 0.0)
            })),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(Expr::var()),
                "i" => Ok(Expr::constant(Complex64::new(0.0, 1.0))),
                "pi" => Ok(Expr::real(std::f64::consts::PI)),
                "e" => Ok(Expr::real(std::f64::consts::E)),
                _ => self.function(&name, at),
            },
            _ => Err(self.err_at(at, "expected an expression")),
        }
    }

    fn function(&mut self, name: &str, at: usize) -> Result<ExprRef, ParseError> {
        self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
        let out = match name {
            "exp" | "log" | "sin" | "cos" | "gamma" | "digamma" => {
                let arg = self.expr()?;
                match name {
                    "exp" => Expr::exp(arg),
                    "log" => Expr::log(arg),
                    "sin" => Expr::sin(arg),
                    "cos" => Expr::cos(arg),
                    "gamma" => Expr::gamma(arg),
                    _ => Expr::digamma(arg),
                }
            }
            "qgamma" => {
                let q = self.const_param("q")?;
                self.expect(Tok::Semi, "`;`")?;
                let arg = self.expr()?;
                let recip = Expr::qgamma_recip(q, arg)
                    .map_err(|e| self.err_at(at, &e.to_string()))?;
                Expr::div(Expr::real(1.0), recip)
            }
            "prodq" => {
                let q = self.const_param("q")?;
                self.expect(Tok::Semi, "`;`")?;
                let arg = self.expr()?;
                Expr::prod_geom(q, arg).map_err(|e| self.err_at(at, &e.to_string()))?
            }
            "sn" | "cn" | "dn" => {
                let arg = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let k = self.const_param("modulus")?;
                if k.im != 0.0 {
                    return Err(self.err_at(at, "elliptic modulus must be real"));
                }
                match name {
                    "sn" => Expr::sn(k.re, arg).map_err(|e| self.err_at(at, &e.to_string()))?,
                    "cn" => {
                        Expr::sn(k.re, arg.clone()).map_err(|e| self.err_at(at, &e.to_string()))?;
                        std::sync::Arc::new(Expr::JacobiCn { modulus: k.re, arg })
                    }
                    _ => {
                        Expr::sn(k.re, arg.clone()).map_err(|e| self.err_at(at, &e.to_string()))?;
                        std::sync::Arc::new(Expr::JacobiDn { modulus: k.re, arg })
                    }
                }
            }
            "shift" => {
                let f = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let c = self.const_param("shift amount")?;
                Expr::shift(f, c)
            }
            "rescale" => {
                let f = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                let q = self.const_param("scale")?;
                Expr::rescale(f, q).map_err(|e| self.err_at(at, &e.to_string()))?
            }
            _ => return Err(self.err_at(at, &format!("unknown function `{name}`"))),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    /// A parameter slot that must reduce to a complex constant.
    fn const_param(&mut self, what: &str) -> Result<Complex64, ParseError> {
        let at = self.pos;
        let e = self.expr()?;
        if e.contains_var() {
            return Err(self.err_at(at, &format!("{what} must be a constant expression")));
        }
        e.eval(Complex64::new(0.0, 0.0))
            .map_err(|err| self.err_at(at, &format!("{what} does not evaluate: {err}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, z: Complex64) -> Complex64 {
        parse_expr(s).unwrap().eval(z).unwrap()
    }

    #[test]
    fn arithmetic_and_literals() {
        let z = Complex64::new(2.0, 0.0);
        assert_eq!(ev("z^2 + 1", z), Complex64::new(5.0, 0.0));
        assert_eq!(ev("(1+2i) * z", z), Complex64::new(2.0, 4.0));
        assert_eq!(ev("3.5i", z), Complex64::new(0.0, 3.5));
        assert_eq!(ev("-z^-1", z), Complex64::new(-0.5, 0.0));
    }

    #[test]
    fn function_forms() {
        let z = Complex64::new(0.0, 0.0);
        assert!((ev("exp(z)", z) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((ev("gamma(z + 5)", z) - Complex64::new(24.0, 0.0)).norm() < 1e-10);
        assert!((ev("shift(z; 1+1i)", z) - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert!(
            (ev("rescale(z^2; 2)", Complex64::new(1.0, 0.0)) - Complex64::new(4.0, 0.0)).norm()
                < 1e-15
        );
        assert!((ev("sn(0; 0.5)", z)).norm() < 1e-14);
        assert!(parse_expr("qgamma(0.5; z)").is_ok());
        assert!(parse_expr("prodq(2; z)").is_ok());
    }

    #[test]
    fn error_positions() {
        let err = parse_expr("z +\n @").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.column, 2);
        let err = parse_expr("shift(z; z)").unwrap_err();
        assert!(err.message.contains("constant"));
        let err = parse_expr("z^z").unwrap_err();
        assert!(err.message.contains("integer"));
    }

    #[test]
    fn display_round_trip() {
        for s in ["z^2 + 1", "sin(z) / cos(z)", "shift(gamma(z); 1)", "prodq(2; z) - 1"] {
            let e = parse_expr(s).unwrap();
            let printed = e.to_string();
            let re = parse_expr(&printed).unwrap();
            let z = Complex64::new(0.3, 0.4);
            let a = e.eval(z);
            let b = re.eval(z);
            match (a, b) {
                (Ok(x), Ok(y)) => assert!((x - y).norm() < 1e-12),
                (Err(_), Err(_)) => {}
                other => panic!("mismatch {other:?}"),
            }
        }
    }
}
