//! Polynomial text syntax: `c*x1^2*x3 + d*x2 - 4`.
//!
//! Variables are `x<index>` with 1-based indices. A coefficient may be
//! omitted (`x1*x2`), and is otherwise written with shortest round-trip
//! digits so that print → parse is bit-exact.

use std::fmt::Write;

use super::{Monomial, PolyError, Polynomial};

pub fn format_coeff(c: f64) -> String {
    let a = c.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{:e}", c)
    } else {
        format!("{}", c)
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&to_text(self))
    }
}

pub fn to_text(p: &Polynomial) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let neg = c < 0.0;
        if i == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let a = c.abs();
        if m.is_constant() {
            s.push_str(&format_coeff(a));
        } else if a == 1.0 {
            let _ = write!(s, "{}", m);
        } else {
            let _ = write!(s, "{}*{}", format_coeff(a), m);
        }
    }
    s
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse(format!("{} at column {}", msg, self.pos + 1))
    }

    fn number(&mut self) -> Result<f64, PolyError> {
        self.skip_ws();
        let start = self.pos;
        let s = self.s;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                i = j;
                while i < s.len() && s[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        if i == start {
            return Err(self.err("expected number"));
        }
        self.pos = i;
        let txt = std::str::from_utf8(&s[start..i]).unwrap();
        txt.parse::<f64>().map_err(|_| self.err(&format!("bad number '{}'", txt)))
    }

    fn uint(&mut self) -> Result<u32, PolyError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("integer out of range"))
    }

    /// x<i>[^<e>]
    fn factor(&mut self, n: usize, exps: &mut [u32]) -> Result<(), PolyError> {
        if self.peek() != Some(b'x') {
            return Err(self.err("expected variable"));
        }
        self.pos += 1;
        let idx = self.uint()? as usize;
        if idx == 0 || idx > n {
            return Err(self.err(&format!("variable x{} outside 1..={}", idx, n)));
        }
        let mut e = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            e = self.uint()?;
        }
        exps[idx - 1] += e;
        Ok(())
    }
}

pub fn parse_polynomial(n: usize, text: &str) -> Result<Polynomial, PolyError> {
    let mut lx = Lexer { s: text.as_bytes(), pos: 0 };
    let mut p = Polynomial::zero(n);
    let mut first = true;
    loop {
        let mut sign = 1.0;
        match lx.peek() {
            None if first => return Err(lx.err("empty polynomial")),
            None => break,
            Some(b'+') => {
                lx.pos += 1;
            }
            Some(b'-') => {
                lx.pos += 1;
                sign = -1.0;
            }
            Some(_) if !first => return Err(lx.err("expected '+' or '-'")),
            Some(_) => {}
        }
        first = false;
        let mut exps = vec![0u32; n];
        let mut coeff = 1.0;
        match lx.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                coeff = lx.number()?;
                if lx.peek() == Some(b'*') {
                    lx.pos += 1;
                    lx.factor(n, &mut exps)?;
                }
            }
            Some(b'x') => lx.factor(n, &mut exps)?,
            _ => return Err(lx.err("expected term")),
        }
        while lx.peek() == Some(b'*') {
            lx.pos += 1;
            lx.factor(n, &mut exps)?;
        }
        p.add_term(Monomial::new(exps), sign * coeff);
    }
    Ok(p)
}
