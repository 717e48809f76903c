//! Dense univariate polynomials over F_q.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};

/// A polynomial in F_q[T], ascending coefficients, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    coeffs: Vec<Elem>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

impl std::hash::Hash for Poly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl Poly {
    pub fn from_coeffs(field: &Field, mut coeffs: Vec<Elem>) -> Poly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { field: field.clone(), coeffs }
    }

    pub fn zero(field: &Field) -> Poly {
        Poly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn one(field: &Field) -> Poly {
        Self::constant(field, 1)
    }

    pub fn constant(field: &Field, c: Elem) -> Poly {
        Self::from_coeffs(field, vec![c])
    }

    /// `c * T^k`.
    pub fn monomial(field: &Field, c: Elem, k: usize) -> Poly {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Self::from_coeffs(field, v)
    }

    /// The indeterminate `T`.
    pub fn t(field: &Field) -> Poly {
        Self::monomial(field, 1, 1)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` is the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with `-1` standing in for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    /// Leading coefficient (zero for the zero polynomial).
    pub fn lc(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn is_monic(&self) -> bool {
        self.lc() == 1
    }

    pub fn scale(&self, c: Elem) -> Poly {
        let f = &self.field;
        Poly::from_coeffs(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// Multiply by `T^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![0; k];
        v.extend_from_slice(&self.coeffs);
        Poly { field: self.field.clone(), coeffs: v }
    }

    pub fn monic(&self) -> Poly {
        match self.field.inv(self.lc()) {
            Some(i) => self.scale(i),
            None => self.clone(),
        }
    }

    /// `(quot, rem)` with `self = quot * b + rem`, `deg rem < deg b`.
    pub fn divmod(&self, b: &Poly) -> Result<(Poly, Poly)> {
        let f = &self.field;
        let db = b.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = f.inv(b.lc()).ok_or(Error::DivisionByZero)?;
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return Ok((Poly::zero(f), self.clone()));
        }
        let mut quot = vec![0; r.len() - db];
        for top in (db..r.len()).rev() {
            let c = f.mul(r[top], lc_inv);
            if c == 0 {
                continue;
            }
            quot[top - db] = c;
            for (i, &bi) in b.coeffs.iter().enumerate() {
                let idx = top - db + i;
                r[idx] = f.sub(r[idx], f.mul(c, bi));
            }
        }
        Ok((Poly::from_coeffs(f, quot), Poly::from_coeffs(f, r)))
    }

    pub fn rem(&self, b: &Poly) -> Result<Poly> {
        Ok(self.divmod(b)?.1)
    }

    /// Exact quotient; errors if `b` does not divide `self`.
    pub fn exact_div(&self, b: &Poly) -> Result<Poly> {
        let (q, r) = self.divmod(b)?;
        if !r.is_zero() {
            return Err(Error::InvalidInput("inexact polynomial division".into()));
        }
        Ok(q)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, b: &Poly) -> Poly {
        let mut x = self.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let r = x.rem(&y).expect("nonzero divisor");
            x = y;
            y = r;
        }
        x.monic()
    }

    pub fn pow(&self, mut k: u64) -> Poly {
        let mut acc = Poly::one(&self.field);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitute `T -> T^k`. For `k = q^s` this is the q^s-power map.
    pub fn inflate(&self, k: usize) -> Poly {
        if self.is_zero() || k == 1 {
            return self.clone();
        }
        let mut v = vec![0; (self.coeffs.len() - 1) * k + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            v[i * k] = c;
        }
        Poly { field: self.field.clone(), coeffs: v }
    }

    /// `self^(q^s)`.
    pub fn frobenius(&self, s: u32) -> Poly {
        self.inflate((self.field.q() as usize).pow(s))
    }

    pub fn eval(&self, x: Elem) -> Elem {
        let f = &self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Parse `c_k*T^k + ... + c_0` with the default variable `T`.
    pub fn parse(field: &Field, s: &str) -> Result<Poly> {
        Self::parse_in(field, s, 'T')
    }

    /// Parse a polynomial literal in the given variable. Coefficients are
    /// integers (prime fields) or `g^j` powers of the field generator.
    pub fn parse_in(field: &Field, s: &str, var: char) -> Result<Poly> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, var: var as u8, field };
        let out = p.poly()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(out)
    }

    /// Text form in the literal grammar, descending degree.
    pub fn to_literal(&self, var: char) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let f = &self.field;
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let cs = f.format_elem(c);
            let term = match (k, c == 1) {
                (0, _) => cs,
                (1, true) => format!("{var}"),
                (1, false) => format!("{cs}*{var}"),
                (_, true) => format!("{var}^{k}"),
                (_, false) => format!("{cs}*{var}^{k}"),
            };
            terms.push(term);
        }
        terms.join(" + ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal('T'))
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    var: u8,
    field: &'a Field,
}

impl Parser<'_> {
    fn err(&self, m: &str) -> Error {
        Error::Parse { offset: self.pos, message: m.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn coefficient(&mut self) -> Result<Option<Elem>> {
        match self.peek() {
            Some(b'g') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let j = self.number()?;
                    Ok(Some(self.field.gen_pow(j)))
                } else {
                    Ok(Some(self.field.generator()))
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                if !self.field.is_prime_field() && n > 1 {
                    return Err(self.err("extension-field coefficients must be 0, 1 or g^j"));
                }
                Ok(Some(self.field.from_int((n % self.field.p() as u64) as i64)))
            }
            _ => Ok(None),
        }
    }

    fn term(&mut self) -> Result<(Elem, usize)> {
        let c = self.coefficient()?;
        let has_var = if c.is_some() {
            if self.peek() == Some(b'*') {
                self.pos += 1;
                if self.peek() != Some(self.var) {
                    return Err(self.err("expected variable after '*'"));
                }
                true
            } else {
                self.peek() == Some(self.var)
            }
        } else if self.peek() == Some(self.var) {
            true
        } else {
            return Err(self.err("expected a term"));
        };
        let mut k = 0;
        if has_var {
            self.pos += 1;
            k = 1;
            if self.peek() == Some(b'^') {
                self.pos += 1;
                k = self.number()? as usize;
                if k > 1 << 20 {
                    return Err(self.err("exponent too large"));
                }
            }
        }
        Ok((c.unwrap_or(1), k))
    }

    fn poly(&mut self) -> Result<Poly> {
        let f = self.field;
        let mut acc = Poly::zero(f);
        let mut negate = false;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            negate = true;
        }
        loop {
            let (c, k) = self.term()?;
            let c = if negate { f.neg(c) } else { c };
            acc = &acc + &Poly::monomial(f, c, k);
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    negate = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negate = true;
                }
                _ => break,
            }
        }
        Ok(acc)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let v = (0..n).map(|i| f.add(self.coeff(i), rhs.coeff(i))).collect();
        Poly::from_coeffs(f, v)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let v = (0..n).map(|i| f.sub(self.coeff(i), rhs.coeff(i))).collect();
        Poly::from_coeffs(f, v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let f = &self.field;
        Poly::from_coeffs(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let f = &self.field;
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(f);
        }
        let mut v = vec![0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        Poly::from_coeffs(f, v)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident, $ty:ty) => {
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty {
                (&self).$m(&rhs)
            }
        }
    };
}
pub(crate) use forward_owned;

forward_owned!(Add, add, Poly);
forward_owned!(Sub, sub, Poly);
forward_owned!(Mul, mul, Poly);

/// All monic polynomials of degree `d` in a fixed lexicographic order
/// (lower coefficients as base-q digits, least significant first).
pub fn monic_enumerate(field: &Field, d: usize) -> impl Iterator<Item = Poly> + '_ {
    let q = field.q() as u64;
    let count = q.pow(d as u32);
    (0..count).map(move |mut idx| {
        let mut v = Vec::with_capacity(d + 1);
        for _ in 0..d {
            v.push((idx % q) as Elem);
            idx /= q;
        }
        v.push(1);
        Poly::from_coeffs(field, v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(f: &Field, s: &str) -> Poly {
        Poly::parse(f, s).unwrap()
    }

    #[test]
    fn frobenius_square_in_char_two() {
        let f = Field::prime(2).unwrap();
        let a = p(&f, "T + 1");
        assert_eq!(&a * &a, p(&f, "T^2 + 1"));
    }

    #[test]
    fn gcd_common_factor() {
        let f = Field::prime(2).unwrap();
        assert_eq!(p(&f, "T^2 + T").gcd(&p(&f, "T")), p(&f, "T"));
    }

    #[test]
    fn long_division_over_f3() {
        let f = Field::prime(3).unwrap();
        let (q, r) = p(&f, "T^3").divmod(&p(&f, "T + 1")).unwrap();
        assert_eq!(q, p(&f, "T^2 + 2*T + 1"));
        assert_eq!(r, Poly::constant(&f, 2));
        assert!(p(&f, "T").divmod(&Poly::zero(&f)).is_err());
    }

    #[test]
    fn monic_enumeration_counts() {
        let f2 = Field::prime(2).unwrap();
        let d0: Vec<Poly> = monic_enumerate(&f2, 0).collect();
        assert_eq!(d0, vec![Poly::one(&f2)]);
        let d1: Vec<Poly> = monic_enumerate(&f2, 1).collect();
        assert_eq!(d1, vec![p(&f2, "T"), p(&f2, "T + 1")]);
        let f3 = Field::prime(3).unwrap();
        let d2: Vec<Poly> = monic_enumerate(&f3, 2).collect();
        assert_eq!(d2.len(), 9);
        assert!(d2.iter().all(|x| x.degree() == Some(2) && x.is_monic()));
    }

    #[test]
    fn literal_grammar() {
        let f = Field::prime(3).unwrap();
        assert_eq!(p(&f, "2*T^3 + T + 2"), Poly::from_coeffs(&f, vec![2, 1, 0, 2]));
        assert_eq!(p(&f, "T^2 - 1"), Poly::from_coeffs(&f, vec![2, 0, 1]));
        assert_eq!(p(&f, "0"), Poly::zero(&f));
        for s in ["2*T^3 + T + 2", "T^2", "1"] {
            assert_eq!(p(&f, s).to_string(), s);
        }
        assert!(Poly::parse(&f, "T^^2").is_err());
        assert!(Poly::parse(&f, "3*X").is_err());
        assert!(Poly::parse(&f, "").is_err());
        let f4 = Field::extension(2, &[1, 1, 1]).unwrap();
        let a = p(&f4, "g^2*T^2 + g*T + 1");
        assert_eq!(a.coeff(2), f4.gen_pow(2));
        assert_eq!(p(&f4, &a.to_string()), a);
        assert!(Poly::parse(&f4, "3*T").is_err());
    }

    #[test]
    fn divmod_reconstructs() {
        let f = Field::prime(5).unwrap();
        let a = p(&f, "3*T^7 + 2*T^4 + T + 4");
        let b = p(&f, "2*T^3 + T^2 + 1");
        let (q, r) = a.divmod(&b).unwrap();
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.deg() < b.deg());
    }
}
