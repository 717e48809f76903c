//! Rational functions in F_q(T), kept in lowest terms with monic denominator.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::poly::{forward_owned, Poly};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFn({})", self)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl RatFn {
    /// `num / den` reduced to lowest terms.
    pub fn new(num: Poly, den: Poly) -> Result<RatFn> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let f = num.field().clone();
        if num.is_zero() {
            return Ok(RatFn { num, den: Poly::one(&f) });
        }
        let g = num.gcd(&den);
        let num = num.exact_div(&g)?;
        let den = den.exact_div(&g)?;
        let c = f.inv(den.lc()).expect("nonzero");
        Ok(RatFn { num: num.scale(c), den: den.scale(c) })
    }

    pub fn from_poly(p: Poly) -> RatFn {
        let f = p.field().clone();
        RatFn { num: p, den: Poly::one(&f) }
    }

    pub fn zero(field: &Field) -> RatFn {
        Self::from_poly(Poly::zero(field))
    }

    pub fn one(field: &Field) -> RatFn {
        Self::from_poly(Poly::one(field))
    }

    pub fn constant(field: &Field, c: Elem) -> RatFn {
        Self::from_poly(Poly::constant(field, c))
    }

    pub fn field(&self) -> &Field {
        self.num.field()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// The polynomial, if the denominator is 1.
    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_poly().then_some(&self.num)
    }

    /// Degree at infinity: `deg num - deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.num.deg() - self.den.deg())
    }

    pub fn inv(&self) -> Result<RatFn> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFn::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, c: Elem) -> RatFn {
        if c == 0 {
            return RatFn::zero(self.field());
        }
        RatFn { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, k: u64) -> RatFn {
        RatFn { num: self.num.pow(k), den: self.den.pow(k) }
    }

    /// `self^(q^s)`: substitute `T -> T^(q^s)`.
    pub fn frobenius(&self, s: u32) -> RatFn {
        RatFn { num: self.num.frobenius(s), den: self.den.frobenius(s) }
    }
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        if self.den == rhs.den {
            return RatFn::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero den");
        }
        RatFn::new(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
            .expect("nonzero den")
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self + &(-rhs)
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        if self.is_poly() && rhs.is_poly() {
            return RatFn::from_poly(&self.num * &rhs.num);
        }
        RatFn::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero den")
    }
}

forward_owned!(Add, add, RatFn);
forward_owned!(Sub, sub, RatFn);
forward_owned!(Mul, mul, RatFn);
