//! A small arithmetic-expression parser shared by scalar and map literals.
//!
//! ```text
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := factor (['*'|'/'] factor)*        juxtaposition multiplies
//! factor   := '-' factor | power
//! power    := primary ['^' exponent]
//! exponent := ['+'|'-'] (integer | ident | '(' intexpr ')')
//! primary  := number | ident | 'O' '(' expr ')' | '(' expr ')'
//! intexpr  := integer arithmetic with + - * ^ and integer identifiers
//! ```

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{Backend, Rational, Scalar};

pub(crate) trait Algebra {
    type V: Clone;
    fn number(&self, lit: &str) -> Result<Self::V>;
    fn ident(&self, name: &str) -> Result<Self::V>;
    /// Identifiers usable inside exponents.
    fn int_ident(&self, name: &str) -> Option<i64>;
    fn big_o(&self, arg: Self::V) -> Result<Self::V>;
    fn add(&self, a: Self::V, b: Self::V) -> Result<Self::V>;
    fn sub(&self, a: Self::V, b: Self::V) -> Result<Self::V>;
    fn mul(&self, a: Self::V, b: Self::V) -> Result<Self::V>;
    fn div(&self, a: Self::V, b: Self::V) -> Result<Self::V>;
    fn neg(&self, a: Self::V) -> Result<Self::V>;
    fn pow(&self, a: Self::V, k: i64) -> Result<Self::V>;
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent marker only when followed by a digit (optionally signed)
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let j = i + 1;
                let k = if j < chars.len() && (chars[j] == '+' || chars[j] == '-') { j + 1 } else { j };
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in {src:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a, A: Algebra> {
    alg: &'a A,
    toks: Vec<Tok>,
    pos: usize,
    src: &'a str,
}

impl<'a, A: Algebra> Parser<'a, A> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} in {:?}", self.src)))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<A::V> {
        let mut acc = if self.eat('-') {
            let t = self.term()?;
            self.alg.neg(t)?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = self.alg.add(acc, t)?;
            } else if self.eat('-') {
                let t = self.term()?;
                acc = self.alg.sub(acc, t)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<A::V> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                let f = self.factor()?;
                acc = self.alg.mul(acc, f)?;
            } else if self.eat('/') {
                let f = self.factor()?;
                acc = self.alg.div(acc, f)?;
            } else if matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Op('('))) {
                let f = self.factor()?;
                acc = self.alg.mul(acc, f)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<A::V> {
        if self.eat('-') {
            let f = self.factor()?;
            return self.alg.neg(f);
        }
        let base = self.primary()?;
        if self.eat('^') {
            let k = self.exponent()?;
            return self.alg.pow(base, k);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<A::V> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                self.alg.number(&s)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "O" {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    return self.alg.big_o(e);
                }
                self.alg.ident(&name)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => self.err("expected a number, identifier or '('"),
        }
    }

    fn exponent(&mut self) -> Result<i64> {
        if self.eat('-') {
            return self.int_atom().map(|k| -k);
        }
        self.eat('+');
        self.int_atom()
    }

    fn int_atom(&mut self) -> Result<i64> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                s.parse::<i64>().or_else(|_| self.err("integer exponent expected"))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match self.alg.int_ident(&name) {
                    Some(k) => Ok(k),
                    None => self.err(&format!("identifier {name:?} is not an integer")),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let k = self.int_expr()?;
                self.expect(')')?;
                Ok(k)
            }
            _ => self.err("exponent expected"),
        }
    }

    fn int_expr(&mut self) -> Result<i64> {
        let overflow = || Error::Parse("integer overflow in exponent".into());
        let mut acc = self.int_term()?;
        loop {
            if self.eat('+') {
                acc = acc.checked_add(self.int_term()?).ok_or_else(overflow)?;
            } else if self.eat('-') {
                acc = acc.checked_sub(self.int_term()?).ok_or_else(overflow)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn int_term(&mut self) -> Result<i64> {
        let mut acc = self.int_power()?;
        while self.eat('*') {
            acc = acc.checked_mul(self.int_power()?).ok_or_else(|| Error::Parse("integer overflow in exponent".into()))?;
        }
        Ok(acc)
    }

    fn int_power(&mut self) -> Result<i64> {
        let neg = self.eat('-');
        let base = self.int_atom()?;
        let v = if self.eat('^') {
            let e = self.int_power()?;
            if e < 0 {
                return self.err("negative exponent inside an integer exponent");
            }
            u32::try_from(e)
                .ok()
                .and_then(|e| base.checked_pow(e))
                .ok_or_else(|| Error::Parse("integer overflow in exponent".into()))?
        } else {
            base
        };
        Ok(if neg { -v } else { v })
    }
}

pub(crate) fn parse<A: Algebra>(alg: &A, src: &str) -> Result<A::V> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { alg, toks, pos: 0, src };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

fn parse_integer(lit: &str) -> Result<BigInt> {
    lit.parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("{lit:?} is not an integer (non-archimedean literals are exact)")))
}

/// Scalar literals evaluated in a backend. `i` is the imaginary unit (complex),
/// `t` the uniformizer (Laurent), `p` the prime (both non-archimedean backends).
pub(crate) struct ScalarAlgebra {
    pub backend: Backend,
}

impl ScalarAlgebra {
    pub(crate) fn scalar_number(&self, lit: &str) -> Result<Scalar> {
        match self.backend {
            Backend::Complex => {
                let x: f64 = lit.parse().map_err(|_| Error::Parse(format!("bad number {lit:?}")))?;
                self.backend.from_complex(Complex64::new(x, 0.0))
            }
            _ => self.backend.from_rational(&Rational::from_integer(parse_integer(lit)?)),
        }
    }

    pub(crate) fn scalar_ident(&self, name: &str) -> Result<Scalar> {
        match (self.backend, name) {
            (Backend::Complex, "i") => Ok(Scalar::Complex(Complex64::new(0.0, 1.0))),
            (Backend::Laurent { .. }, "t") => self.backend.uniformizer(),
            (Backend::PAdic { p, .. } | Backend::Laurent { p, .. }, "p") => Ok(self.backend.from_i64(p as i64)),
            _ => Err(Error::Parse(format!("unknown identifier {name:?} for backend {}", self.backend))),
        }
    }

    pub(crate) fn scalar_big_o(&self, arg: Scalar) -> Result<Scalar> {
        use crate::scalar::Valuation;
        if !arg.is_exact() {
            return Err(Error::Parse("O(...) needs an exact power of the uniformizer".into()));
        }
        match arg.valuation()? {
            Valuation::Finite(v) => self.backend.indeterminate(v),
            _ => Err(Error::Parse("O(0) is meaningless".into())),
        }
    }
}

impl Algebra for ScalarAlgebra {
    type V = Scalar;
    fn number(&self, lit: &str) -> Result<Scalar> {
        self.scalar_number(lit)
    }
    fn ident(&self, name: &str) -> Result<Scalar> {
        self.scalar_ident(name)
    }
    fn int_ident(&self, name: &str) -> Option<i64> {
        match name {
            "p" => self.backend.prime().map(i64::from),
            _ => None,
        }
    }
    fn big_o(&self, arg: Scalar) -> Result<Scalar> {
        self.scalar_big_o(arg)
    }
    fn add(&self, a: Scalar, b: Scalar) -> Result<Scalar> {
        a.try_add(&b)
    }
    fn sub(&self, a: Scalar, b: Scalar) -> Result<Scalar> {
        a.try_sub(&b)
    }
    fn mul(&self, a: Scalar, b: Scalar) -> Result<Scalar> {
        a.try_mul(&b)
    }
    fn div(&self, a: Scalar, b: Scalar) -> Result<Scalar> {
        a.try_div(&b)
    }
    fn neg(&self, a: Scalar) -> Result<Scalar> {
        Ok(-&a)
    }
    fn pow(&self, a: Scalar, k: i64) -> Result<Scalar> {
        if k < 0 && a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        a.powi(k)
    }
}

pub(crate) fn parse_scalar(backend: Backend, src: &str) -> Result<Scalar> {
    let v = parse(&ScalarAlgebra { backend }, src)?;
    if let Scalar::Complex(z) = &v {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Parse(format!("non-finite complex value from {src:?}")));
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Valuation;

    #[test]
    fn complex_literals() {
        let c = |s| parse_scalar(Backend::Complex, s).unwrap().as_complex().unwrap();
        assert_eq!(c("3+4i"), Complex64::new(3.0, 4.0));
        assert_eq!(c("1.5-2i"), Complex64::new(1.5, -2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("2e-3"), Complex64::new(0.002, 0.0));
        assert_eq!(c("(1+i)^2"), Complex64::new(0.0, 2.0));
    }

    #[test]
    fn padic_literals() {
        let b = Backend::padic(5, 6).unwrap();
        let x = parse_scalar(b, "5^3 * 7").unwrap();
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(3));
        assert!(x.exactly_equals(&b.from_i64(875)));
        let y = parse_scalar(b, "3/25").unwrap();
        assert_eq!(y.valuation().unwrap(), Valuation::Finite(-2));
        let z = parse_scalar(b, "5^-2*3").unwrap();
        assert!(z.exactly_equals(&y));
        let w = parse_scalar(b, "1 + 5 + O(5^3)").unwrap();
        assert!(!w.is_exact());
        assert_eq!(w.valuation().unwrap(), Valuation::Finite(0));
        assert!(parse_scalar(b, "1.5").is_err());
    }

    #[test]
    fn laurent_literals() {
        let b = Backend::laurent(2, 8).unwrap();
        let x = parse_scalar(b, "t^-1*(1 + t + t^3)").unwrap();
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(-1));
        let y = parse_scalar(b, "t + t^2 + t").unwrap();
        assert_eq!(y.valuation().unwrap(), Valuation::Finite(2));
        let z = parse_scalar(b, "1 + t + O(t^4)").unwrap();
        assert!(!z.is_exact());
        assert!(parse_scalar(b, "x").is_err());
    }

    #[test]
    fn exponent_expressions() {
        let b = Backend::laurent(3, 8).unwrap();
        let x = parse_scalar(b, "t^(p^2)").unwrap();
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(9));
    }
}
