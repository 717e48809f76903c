//! Laurent series in `u = 1/T` with explicit absolute precision.
//!
//! A series `sum_{k >= val} c_k u^k + O(u^prec)` asserts its coefficients
//! only for exponents below `prec`. A series with no nonzero coefficient
//! below `prec` is *zero to precision*: it is a distinct state, never
//! identified with an exact zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::poly::{forward_owned, Poly};
use crate::ratfn::RatFn;

#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    field: Field,
    /// Exponent of `coeffs[0]`; equals `prec` when zero to precision.
    val: i64,
    coeffs: Vec<Elem>,
    prec: i64,
}

/// Three-valued comparison of two series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// All coefficients below `prec` agree.
    Equal { prec: i64 },
    /// The first disagreement is at this exponent.
    DifferAt(i64),
    /// No disagreement below `available`, which is short of what was asked.
    Undecidable { available: i64 },
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal { .. })
    }
}

/// Distance to the nearest polynomial, `||x||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NearestNorm {
    /// `||x|| = q^(-k)` with `k >= 1`.
    Pow(i64),
    /// The fractional part vanishes below this exponent.
    ZeroToPrecision(i64),
}

impl NearestNorm {
    /// Whether `||x|| < q^(-k)` is certain (`Some`) or undecided (`None`).
    pub fn less_than_pow(&self, k: i64) -> Option<bool> {
        match *self {
            NearestNorm::Pow(e) => Some(e > k),
            NearestNorm::ZeroToPrecision(p) => (p > k).then_some(true),
        }
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fld = &self.field;
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let k = self.val + i as i64;
            let cs = fld.format_elem(c);
            match (k, c == 1) {
                (0, _) => write!(f, "{cs}")?,
                (_, true) => write!(f, "u^{k}")?,
                (_, false) => write!(f, "{cs}*u^{k}")?,
            }
        }
        if !first {
            f.write_str(" + ")?;
        }
        write!(f, "O(u^{})", self.prec)
    }
}

impl LaurentSeries {
    /// Build from coefficients starting at `val`; entries at or beyond
    /// `prec` are dropped and the result is normalized.
    pub fn new(field: &Field, val: i64, mut coeffs: Vec<Elem>, prec: i64) -> LaurentSeries {
        let keep = (prec - val).max(0) as usize;
        coeffs.truncate(keep);
        let lead = coeffs.iter().position(|&c| c != 0);
        match lead {
            None => Self::zero(field, prec),
            Some(i) => {
                coeffs.drain(..i);
                while coeffs.last() == Some(&0) {
                    coeffs.pop();
                }
                LaurentSeries { field: field.clone(), val: val + i as i64, coeffs, prec }
            }
        }
    }

    /// Zero to precision `prec`.
    pub fn zero(field: &Field, prec: i64) -> LaurentSeries {
        LaurentSeries { field: field.clone(), val: prec, coeffs: Vec::new(), prec }
    }

    pub fn one(field: &Field, prec: i64) -> LaurentSeries {
        Self::monomial(field, 1, 0, prec)
    }

    /// `c * u^k + O(u^prec)`.
    pub fn monomial(field: &Field, c: Elem, k: i64, prec: i64) -> LaurentSeries {
        Self::new(field, k, vec![c], prec)
    }

    /// Image of a polynomial (`T = u^-1`), known to precision `prec`.
    pub fn from_poly(p: &Poly, prec: i64) -> LaurentSeries {
        let f = p.field();
        if p.is_zero() {
            return Self::zero(f, prec);
        }
        let coeffs: Vec<Elem> = p.coeffs().iter().rev().copied().collect();
        Self::new(f, -p.deg(), coeffs, prec)
    }

    /// Expansion of a rational function to absolute precision `prec`.
    pub fn from_ratfn(r: &RatFn, prec: i64) -> LaurentSeries {
        let f = r.field();
        let Some(deg) = r.degree() else {
            return Self::zero(f, prec);
        };
        let val = -deg;
        let rel = (prec - val).max(1);
        let num = Self::from_poly(r.num(), -r.num().deg() + rel);
        let den = Self::from_poly(r.den(), -r.den().deg() + rel);
        let q = num.div(&den).expect("nonzero denominator");
        q.truncate(prec)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Lowest stored exponent (`prec` when zero to precision).
    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    /// Number of asserted coefficients from the leading one on.
    pub fn rel_prec(&self) -> i64 {
        self.prec - self.val
    }

    /// Coefficients from `val` upward (trailing zeros may be omitted).
    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// Coefficient of `u^k`; `None` at or beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<Elem> {
        if k >= self.prec {
            None
        } else if k < self.val {
            Some(0)
        } else {
            Some(self.coeffs.get((k - self.val) as usize).copied().unwrap_or(0))
        }
    }

    /// Dense coefficients for exponents `val..prec`.
    pub fn dense_coeffs(&self) -> Vec<Elem> {
        (self.val..self.prec).map(|k| self.coeff(k).unwrap()).collect()
    }

    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(ord, sgn)`: exponent and value of the leading coefficient.
    pub fn ord_sgn(&self) -> Result<(i64, Elem)> {
        match self.coeffs.first() {
            Some(&c) => Ok((self.val, c)),
            None => Err(Error::Indeterminate { prec: self.prec }),
        }
    }

    pub fn ord(&self) -> Result<i64> {
        Ok(self.ord_sgn()?.0)
    }

    pub fn sgn(&self) -> Result<Elem> {
        Ok(self.ord_sgn()?.1)
    }

    /// `||x||`: size of the part with exponents `>= 1`.
    pub fn nearest_poly_norm(&self) -> Result<NearestNorm> {
        if self.prec < 1 {
            return Err(Error::InsufficientPrecision(format!(
                "fractional part invisible at precision {}",
                self.prec
            )));
        }
        for k in self.val.max(1)..self.prec {
            if self.coeff(k) != Some(0) {
                return Ok(NearestNorm::Pow(k));
            }
        }
        Ok(NearestNorm::ZeroToPrecision(self.prec))
    }

    /// Polynomial part (exponents `<= 0`), exact as a polynomial. Requires
    /// `prec >= 1`.
    pub fn poly_part(&self) -> Result<Poly> {
        if self.prec < 1 {
            return Err(Error::InsufficientPrecision("polynomial part not determined".into()));
        }
        if self.val > 0 {
            return Ok(Poly::zero(&self.field));
        }
        let deg = (-self.val) as usize;
        let mut v = vec![0; deg + 1];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = self.coeff(-(k as i64)).unwrap();
        }
        Ok(Poly::from_coeffs(&self.field, v))
    }

    /// Lower the precision to `prec` (no-op if already lower).
    pub fn truncate(&self, prec: i64) -> LaurentSeries {
        if prec >= self.prec {
            return self.clone();
        }
        Self::new(&self.field, self.val, self.coeffs.clone(), prec)
    }

    /// Keep at most `r` coefficients from the leading one.
    pub fn truncate_rel(&self, r: i64) -> LaurentSeries {
        if self.is_zero_to_precision() {
            return self.clone();
        }
        self.truncate(self.val + r)
    }

    pub fn scale(&self, c: Elem) -> LaurentSeries {
        let f = &self.field;
        Self::new(f, self.val, self.coeffs.iter().map(|&a| f.mul(a, c)).collect(), self.prec)
    }

    /// Multiply by `u^k`.
    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries {
            field: self.field.clone(),
            val: self.val + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec + k,
        }
    }

    pub fn inv(&self) -> Result<LaurentSeries> {
        let (v, _) = self.ord_sgn()?;
        let r = self.rel_prec() as usize;
        let y = inv_unit(&self.field, &self.coeffs, r);
        Ok(Self::new(&self.field, -v, y, -v + r as i64))
    }

    pub fn div(&self, other: &LaurentSeries) -> Result<LaurentSeries> {
        Ok(self * &other.inv()?)
    }

    /// Nonnegative power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> LaurentSeries {
        let mut acc: Option<LaurentSeries> = None;
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        // x^0 = 1 with the relative precision of x
        acc.unwrap_or_else(|| Self::one(&self.field, self.rel_prec().max(0)))
    }

    /// `x^(q^s)`: coefficient of `u^k` moves to `u^(k q^s)`.
    pub fn frobenius(&self, s: u32) -> LaurentSeries {
        self.frobenius_rel(s, i64::MAX)
    }

    /// `x^(q^s)` keeping at most `r` coefficients from the leading one.
    pub fn frobenius_rel(&self, s: u32, r: i64) -> LaurentSeries {
        let scale = (self.field.q() as i64).pow(s);
        let f = &self.field;
        if self.is_zero_to_precision() {
            return Self::zero(f, self.prec.saturating_mul(scale));
        }
        let val = self.val * scale;
        let prec = self.prec.saturating_mul(scale).min(val.saturating_add(r));
        let len = (prec - val) as usize;
        let mut v = vec![0; len.min(self.coeffs.len().saturating_sub(1) * scale as usize + 1)];
        for (i, &c) in self.coeffs.iter().enumerate() {
            let idx = i * scale as usize;
            if idx >= v.len() {
                break;
            }
            v[idx] = c;
        }
        Self::new(f, val, v, prec)
    }

    /// Compare on all exponents below the smaller precision.
    pub fn compare(&self, other: &LaurentSeries) -> Comparison {
        let p = self.prec.min(other.prec);
        let lo = self.val.min(other.val);
        // beyond both stored tails every coefficient is zero
        let end = (self.val + self.coeffs.len() as i64).max(other.val + other.coeffs.len() as i64);
        for k in lo..p.min(end) {
            if self.coeff(k) != other.coeff(k) {
                return Comparison::DifferAt(k);
            }
        }
        Comparison::Equal { prec: p }
    }

    /// Like [`compare`](Self::compare) but demands agreement below `required`.
    pub fn compare_to(&self, other: &LaurentSeries, required: i64) -> Comparison {
        match self.compare(other) {
            Comparison::Equal { prec } if prec < required => Comparison::Undecidable { available: prec },
            Comparison::Equal { .. } => Comparison::Equal { prec: required },
            c => c,
        }
    }

    /// Agreement on the first `n` coefficients from the leading term of
    /// `self` (both must carry them).
    pub fn agrees_rel(&self, other: &LaurentSeries, n: i64) -> Comparison {
        if self.is_zero_to_precision() {
            return Comparison::Undecidable { available: self.prec };
        }
        self.compare_to(other, self.val + n)
    }
}

/// Inverse of the unit `c_0 + c_1 u + ...` to `r` coefficients.
pub(crate) fn inv_unit(f: &Field, c: &[Elem], r: usize) -> Vec<Elem> {
    let c0_inv = f.inv(c[0]).expect("unit");
    let neg_c0_inv = f.neg(c0_inv);
    let mut y = Vec::with_capacity(r);
    if r == 0 {
        return y;
    }
    y.push(c0_inv);
    for k in 1..r {
        let mut s = 0;
        let top = k.min(c.len() - 1);
        for i in 1..=top {
            s = f.add(s, f.mul(c[i], y[k - i]));
        }
        y.push(f.mul(neg_c0_inv, s));
    }
    y
}

/// Product of two coefficient windows truncated to `r` entries.
pub(crate) fn mul_trunc(f: &Field, a: &[Elem], b: &[Elem], r: usize) -> Vec<Elem> {
    let mut out = vec![0; r];
    for (i, &x) in a.iter().enumerate().take(r) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(r - i) {
            if y != 0 {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
    }
    out
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        let f = &self.field;
        let prec = self.prec.min(rhs.prec);
        let val = self.val.min(rhs.val).min(prec);
        let len = (prec - val).max(0) as usize;
        let mut v = vec![0; len];
        for (s, x) in [(self.val, &self.coeffs), (rhs.val, &rhs.coeffs)] {
            let off = (s - val) as usize;
            for (i, &c) in x.iter().enumerate() {
                if off + i >= len {
                    break;
                }
                v[off + i] = f.add(v[off + i], c);
            }
        }
        LaurentSeries::new(f, val, v, prec)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        let f = &self.field;
        LaurentSeries {
            field: f.clone(),
            val: self.val,
            coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(),
            prec: self.prec,
        }
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self + &(-rhs)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        let f = &self.field;
        let prec = (self.prec + rhs.val).min(rhs.prec + self.val);
        if self.is_zero_to_precision() || rhs.is_zero_to_precision() {
            return LaurentSeries::zero(f, prec);
        }
        let val = self.val + rhs.val;
        let r = (prec - val).max(0) as usize;
        let v = mul_trunc(f, &self.coeffs, &rhs.coeffs, r);
        LaurentSeries::new(f, val, v, prec)
    }
}

forward_owned!(Add, add, LaurentSeries);
forward_owned!(Sub, sub, LaurentSeries);
forward_owned!(Mul, mul, LaurentSeries);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    #[test]
    fn ord_and_sgn_examples() {
        let f = Field::prime(3).unwrap();
        let x = LaurentSeries::from_poly(&Poly::parse(&f, "T^3").unwrap(), 10);
        assert_eq!(x.ord_sgn().unwrap(), (-3, 1));
        let y = LaurentSeries::from_poly(&Poly::parse(&f, "2*T + 1").unwrap(), 10);
        assert_eq!(y.ord_sgn().unwrap(), (-1, 2));
        let m = LaurentSeries::from_poly(&Poly::parse(&f, "T^4 + 2*T + 2").unwrap(), 3);
        assert_eq!(m.sgn().unwrap(), 1);
        assert_eq!(LaurentSeries::zero(&f, 5).ord_sgn(), Err(Error::Indeterminate { prec: 5 }));
    }

    #[test]
    fn nearest_norm_examples() {
        let f = f2();
        let p = LaurentSeries::from_poly(&Poly::parse(&f, "T^3 + T").unwrap(), 8);
        assert_eq!(p.nearest_poly_norm().unwrap(), NearestNorm::ZeroToPrecision(8));
        let inv_t = LaurentSeries::monomial(&f, 1, 1, 8);
        assert_eq!(inv_t.nearest_poly_norm().unwrap(), NearestNorm::Pow(1));
        let x = &LaurentSeries::from_poly(&Poly::t(&f), 8) + &LaurentSeries::monomial(&f, 1, 2, 8);
        assert_eq!(x.nearest_poly_norm().unwrap(), NearestNorm::Pow(2));
        assert!(LaurentSeries::one(&f, 0).nearest_poly_norm().is_err());
    }

    #[test]
    fn inverse_examples() {
        let f = f2();
        let one_plus_u = LaurentSeries::new(&f, 0, vec![1, 1], 10);
        let inv = one_plus_u.inv().unwrap();
        assert_eq!(inv, LaurentSeries::new(&f, 0, vec![1; 10], 10));
        let u = LaurentSeries::monomial(&f, 1, 1, 10);
        assert_eq!(u.inv().unwrap(), LaurentSeries::monomial(&f, 1, -1, 8));
        // 1 + u^4 + u^8 + ... is 1/(1 + u^4); its inverse is 1 + u^4.
        let mut geo = vec![0; 16];
        for k in (0..16).step_by(4) {
            geo[k] = 1;
        }
        let s = LaurentSeries::new(&f, 0, geo, 16);
        let back = s.inv().unwrap();
        assert_eq!(back, LaurentSeries::new(&f, 0, vec![1, 0, 0, 0, 1], 16));
        // multiply-back oracle
        assert!((&s * &back).compare(&LaurentSeries::one(&f, 16)).is_equal());
        assert!(LaurentSeries::zero(&f, 3).inv().is_err());
    }

    #[test]
    fn precision_ledger() {
        let f = f2();
        let a = LaurentSeries::new(&f, -2, vec![1, 1], 5);
        let b = LaurentSeries::new(&f, 1, vec![1], 3);
        let p = &a * &b;
        assert_eq!(p.prec(), (5 + 1).min(3 - 2));
        assert_eq!((&a + &b).prec(), 3);
    }

    #[test]
    fn three_valued_compare() {
        let f = f2();
        let a = LaurentSeries::new(&f, 0, vec![1, 0, 1], 6);
        let b = LaurentSeries::new(&f, 0, vec![1, 0, 1, 1], 8);
        assert_eq!(a.compare(&b), Comparison::DifferAt(3));
        let c = LaurentSeries::new(&f, 0, vec![1, 0, 1], 4);
        assert_eq!(a.compare(&c), Comparison::Equal { prec: 4 });
        assert_eq!(a.compare_to(&c, 6), Comparison::Undecidable { available: 4 });
    }

    fn arb_series(p: u32) -> impl Strategy<Value = (i64, Vec<u32>)> {
        (-4i64..4, prop::collection::vec(0..p, 1..12)).prop_map(move |(v, mut c)| {
            if c[0] == 0 {
                c[0] = 1;
            }
            (v, c)
        })
    }

    proptest! {
        #[test]
        fn ord_and_sgn_are_multiplicative((v1, c1) in arb_series(3), (v2, c2) in arb_series(3)) {
            let f = Field::prime(3).unwrap();
            let x = LaurentSeries::new(&f, v1, c1.clone(), v1 + c1.len() as i64);
            let y = LaurentSeries::new(&f, v2, c2.clone(), v2 + c2.len() as i64);
            let (ox, sx) = x.ord_sgn().unwrap();
            let (oy, sy) = y.ord_sgn().unwrap();
            let (oxy, sxy) = (&x * &y).ord_sgn().unwrap();
            prop_assert_eq!(oxy, ox + oy);
            prop_assert_eq!(sxy, f.mul(sx, sy));
        }

        #[test]
        fn double_inverse((v, c) in arb_series(5)) {
            let f = Field::prime(5).unwrap();
            let x = LaurentSeries::new(&f, v, c.clone(), v + c.len() as i64);
            let back = x.inv().unwrap().inv().unwrap();
            prop_assert!(back.compare(&x).is_equal());
            prop_assert_eq!(back.prec(), x.prec());
        }

        #[test]
        fn norm_ignores_polynomials((v, c) in arb_series(2), poly in prop::collection::vec(0u32..2, 0..6)) {
            let f = f2();
            let x = LaurentSeries::new(&f, v, c.clone(), 12);
            let p = LaurentSeries::from_poly(&Poly::from_coeffs(&f, poly), 12);
            prop_assert_eq!(x.nearest_poly_norm().unwrap(), (&x + &p).nearest_poly_norm().unwrap());
        }

        #[test]
        fn higher_precision_is_consistent(num in prop::collection::vec(0u32..3, 1..6), den in prop::collection::vec(0u32..3, 1..6)) {
            let f = Field::prime(3).unwrap();
            let d = Poly::from_coeffs(&f, den);
            prop_assume!(!d.is_zero());
            let r = RatFn::new(Poly::from_coeffs(&f, num), d).unwrap();
            let lo = LaurentSeries::from_ratfn(&r, 6);
            let hi = LaurentSeries::from_ratfn(&r, 14);
            prop_assert!(lo.compare(&hi).is_equal());
            prop_assert_eq!(lo.prec(), 6);
        }
    }
}
