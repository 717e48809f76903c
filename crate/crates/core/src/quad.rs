//! The real quadratic field K = F_q(T)(f), f^2 = a f + b, and its two
//! embeddings into F_q((1/T)).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::laurent::LaurentSeries;
use crate::poly::{forward_owned, Poly};
use crate::ratfn::RatFn;

/// Which infinite place: `First` is where `|f| = q^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    First,
    Second,
}

struct Inner {
    field: Field,
    a: Poly,
    b: Elem,
    d: usize,
    /// Largest-precision image of f at the first place computed so far.
    embedding: RwLock<Option<LaurentSeries>>,
}

/// Defining data `(a, b)` of K. Cheap to clone.
#[derive(Clone)]
pub struct QuadDesc(Arc<Inner>);

impl fmt::Debug for QuadDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadDesc(q={}, a={}, b={})", self.0.field.q(), self.0.a, self.0.field.format_elem(self.0.b))
    }
}

impl PartialEq for QuadDesc {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.field == other.0.field && self.0.a == other.0.a && self.0.b == other.0.b)
    }
}

impl Eq for QuadDesc {}

impl QuadDesc {
    /// `f^2 = a f + b` with `deg a >= 1` and `b` a nonzero constant.
    pub fn new(a: Poly, b: Elem) -> Result<QuadDesc> {
        let field = a.field().clone();
        let d = a.degree().filter(|&d| d >= 1).ok_or_else(|| {
            Error::InvalidQuadratic("a must have degree >= 1".into())
        })?;
        if b == 0 || b >= field.q() {
            return Err(Error::InvalidQuadratic("b must be a nonzero constant".into()));
        }
        Ok(QuadDesc(Arc::new(Inner { field, a, b, d, embedding: RwLock::new(None) })))
    }

    pub fn field(&self) -> &Field {
        &self.0.field
    }

    pub fn a(&self) -> &Poly {
        &self.0.a
    }

    pub fn b(&self) -> Elem {
        self.0.b
    }

    pub fn d(&self) -> usize {
        self.0.d
    }

    pub fn q(&self) -> u32 {
        self.0.field.q()
    }

    pub fn elem(&self, x: RatFn, y: RatFn) -> QuadElem {
        QuadElem { desc: self.clone(), x, y }
    }

    pub fn from_polys(&self, x: Poly, y: Poly) -> QuadElem {
        self.elem(RatFn::from_poly(x), RatFn::from_poly(y))
    }

    pub fn from_poly(&self, x: Poly) -> QuadElem {
        self.from_polys(x, Poly::zero(self.field()))
    }

    pub fn from_ratfn(&self, x: RatFn) -> QuadElem {
        let f = self.field().clone();
        self.elem(x, RatFn::zero(&f))
    }

    pub fn zero(&self) -> QuadElem {
        self.from_poly(Poly::zero(self.field()))
    }

    pub fn one(&self) -> QuadElem {
        self.from_poly(Poly::one(self.field()))
    }

    /// The generator `f`.
    pub fn f(&self) -> QuadElem {
        self.from_polys(Poly::zero(self.field()), Poly::one(self.field()))
    }

    /// The conjugate `f* = a - f`.
    pub fn f_conj(&self) -> QuadElem {
        self.f().conj()
    }

    pub fn t(&self) -> QuadElem {
        self.from_poly(Poly::t(self.field()))
    }

    /// Image of `f` at the given place, to absolute precision `prec`.
    ///
    /// The first-place root is the fixed point of `f <- a + b/f` started at
    /// `a`; each step gains `2d` correct coefficients because
    /// `|b/f^2| = q^(-2d)`. The second-place root is `a` minus the first.
    pub fn embed(&self, place: Place, prec: i64) -> Result<LaurentSeries> {
        let d = self.d() as i64;
        if prec < 2 * d + 1 {
            return Err(Error::InsufficientPrecision(format!(
                "embedding precision {prec} below 2d + 1 = {}",
                2 * d + 1
            )));
        }
        let root = self.first_root(prec);
        Ok(match place {
            Place::First => root,
            Place::Second => &LaurentSeries::from_poly(self.a(), prec) - &root,
        })
    }

    fn first_root(&self, prec: i64) -> LaurentSeries {
        if let Some(cached) = self.0.embedding.read().unwrap().as_ref() {
            if cached.prec() >= prec {
                return cached.truncate(prec);
            }
        }
        let d = self.d() as i64;
        let field = self.field();
        let a_ser = LaurentSeries::from_poly(self.a(), prec);
        let b_ser = LaurentSeries::monomial(field, self.b(), 0, prec + 4 * d);
        // a agrees with the root below u^d
        let mut cur = a_ser.truncate(d);
        while cur.prec() < prec {
            let step = &b_ser * &cur.inv().expect("|f| = q^d");
            cur = &a_ser + &step;
        }
        let mut slot = self.0.embedding.write().unwrap();
        if slot.as_ref().map_or(true, |c| c.prec() < cur.prec()) {
            *slot = Some(cur.clone());
        }
        cur.truncate(prec)
    }

    /// `Q_0, ..., Q_{n_max}` with `Q_{n+1} = a Q_n + b Q_{n-1}`.
    pub fn qseq(&self, n_max: usize) -> QSeq {
        let f = self.field();
        let mut entries = vec![Poly::one(f)];
        if n_max >= 1 {
            entries.push(self.a().clone());
        }
        for n in 1..n_max {
            let next = &(self.a() * &entries[n]) + &entries[n - 1].scale(self.b());
            entries.push(next);
        }
        QSeq { entries }
    }
}

/// The sequence `Q_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeq {
    pub entries: Vec<Poly>,
}

impl QSeq {
    pub fn get(&self, n: usize) -> &Poly {
        &self.entries[n]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices where `deg Q_n != n d` (empty for a valid sequence).
    pub fn degree_violations(&self, d: usize) -> Vec<usize> {
        (0..self.entries.len()).filter(|&n| self.entries[n].degree() != Some(n * d)).collect()
    }
}

/// `x + y f` with rational-function coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadElem {
    desc: QuadDesc,
    x: RatFn,
    y: RatFn,
}

impl std::hash::Hash for QuadElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.x.hash(state);
        self.y.hash(state);
    }
}

impl fmt::Debug for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x.is_zero(), self.y.is_zero()) {
            (true, true) => f.write_str("0"),
            (false, true) => write!(f, "{}", self.x),
            (true, false) => write!(f, "({})*f", self.y),
            (false, false) => write!(f, "{} + ({})*f", self.x, self.y),
        }
    }
}

impl QuadElem {
    pub fn desc(&self) -> &QuadDesc {
        &self.desc
    }

    pub fn x(&self) -> &RatFn {
        &self.x
    }

    pub fn y(&self) -> &RatFn {
        &self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Both coordinates are polynomials.
    pub fn is_integral_poly(&self) -> bool {
        self.x.is_poly() && self.y.is_poly()
    }

    pub fn conj(&self) -> QuadElem {
        let a = RatFn::from_poly(self.desc.a().clone());
        self.desc.elem(&self.x + &(&a * &self.y), -&self.y)
    }

    /// `z conj(z) = x^2 + a x y - b y^2`.
    pub fn norm(&self) -> RatFn {
        let a = RatFn::from_poly(self.desc.a().clone());
        let b = self.desc.b();
        &(&(&self.x * &self.x) + &(&(&a * &self.x) * &self.y)) - &(&self.y * &self.y).scale(b)
    }

    /// `z + conj(z) = 2x + a y`.
    pub fn trace(&self) -> RatFn {
        let a = RatFn::from_poly(self.desc.a().clone());
        &(&self.x + &self.x) + &(&a * &self.y)
    }

    pub fn scale(&self, c: Elem) -> QuadElem {
        self.desc.elem(self.x.scale(c), self.y.scale(c))
    }

    pub fn mul_ratfn(&self, r: &RatFn) -> QuadElem {
        self.desc.elem(&self.x * r, &self.y * r)
    }

    pub fn inv(&self) -> Result<QuadElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm().inv()?;
        Ok(self.conj().mul_ratfn(&n))
    }

    pub fn div(&self, other: &QuadElem) -> Result<QuadElem> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<QuadElem> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = self.desc.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Image at a place, to absolute precision `prec`.
    pub fn embed(&self, place: Place, prec: i64) -> Result<LaurentSeries> {
        let d = self.desc.d() as i64;
        let deg_y = self.y.degree().unwrap_or(i64::MIN / 4);
        let x = LaurentSeries::from_ratfn(&self.x, prec);
        if self.y.is_zero() {
            return Ok(x);
        }
        let root_prec = (prec + deg_y.max(-d) + 1).max(2 * d + 1);
        let root = self.desc.embed(place, root_prec)?;
        let y = LaurentSeries::from_ratfn(&self.y, prec + d + 1);
        Ok((&x + &(&y * &root)).truncate(prec))
    }

    /// Degree at the first place, `-ord` of the first embedding.
    ///
    /// Precision is raised adaptively up to the bound forced by
    /// `deg_1(z) + deg_2(z) = deg norm(z)` and
    /// `deg_2(z) <= max(deg x, deg y - d)`, so the loop always ends.
    pub fn deg_at_inf1(&self) -> Result<i64> {
        Ok(self.deg_sgn_at_inf1()?.0)
    }

    /// Degree and sign at the first place.
    pub fn deg_sgn_at_inf1(&self) -> Result<(i64, Elem)> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let field = self.desc.field().clone();
        let den = lcm(self.x.den(), self.y.den());
        let big_x = &(self.x.num() * &den).exact_div(self.x.den())?;
        let big_y = &(self.y.num() * &den).exact_div(self.y.den())?;
        let shift = den.deg();
        let d = self.desc.d() as i64;
        if big_y.is_zero() {
            return Ok((big_x.deg() - shift, big_x.lc()));
        }
        let integral = self.desc.from_polys(big_x.clone(), big_y.clone());
        let norm = integral.norm();
        let norm_deg = norm.degree().expect("nonzero element has nonzero norm");
        let neg_inf = i64::MIN / 4;
        let dx = if big_x.is_zero() { neg_inf } else { big_x.deg() };
        let lower = norm_deg - dx.max(big_y.deg() - d);
        let upper = dx.max(big_y.deg() + d);
        let cap = -lower + 1;
        let mut prec = (-upper + 4).min(cap);
        loop {
            let s = integral.embed(Place::First, prec)?;
            if let Ok((ord, c)) = s.ord_sgn() {
                return Ok((-ord - shift, c));
            }
            if prec >= cap {
                return Err(Error::Verification(format!(
                    "degree bound violated for {self} over {field:?}"
                )));
            }
            prec = (prec + (prec - (-upper)).max(4)).min(cap);
        }
    }
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    let g = a.gcd(b);
    (&(a * b)).exact_div(&g).expect("gcd divides").monic()
}

impl Add for &QuadElem {
    type Output = QuadElem;
    fn add(self, rhs: &QuadElem) -> QuadElem {
        self.desc.elem(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Sub for &QuadElem {
    type Output = QuadElem;
    fn sub(self, rhs: &QuadElem) -> QuadElem {
        self.desc.elem(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Neg for &QuadElem {
    type Output = QuadElem;
    fn neg(self) -> QuadElem {
        self.desc.elem(-&self.x, -&self.y)
    }
}

impl Mul for &QuadElem {
    type Output = QuadElem;
    fn mul(self, rhs: &QuadElem) -> QuadElem {
        let a = RatFn::from_poly(self.desc.a().clone());
        let b = self.desc.b();
        let yy = &self.y * &rhs.y;
        let x = &(&self.x * &rhs.x) + &yy.scale(b);
        let y = &(&(&self.x * &rhs.y) + &(&rhs.x * &self.y)) + &(&a * &yy);
        self.desc.elem(x, y)
    }
}

forward_owned!(Add, add, QuadElem);
forward_owned!(Sub, sub, QuadElem);
forward_owned!(Mul, mul, QuadElem);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::NearestNorm;
    use proptest::prelude::*;

    fn desc(q: u32, a: &str, b: u32) -> QuadDesc {
        let f = Field::prime(q).unwrap();
        QuadDesc::new(Poly::parse(&f, a).unwrap(), b).unwrap()
    }

    #[test]
    fn defining_relation() {
        let k = desc(3, "T^2 + 1", 2);
        let f = k.f();
        let ff = &f * &f;
        let expect = &k.from_poly(Poly::constant(k.field(), 2)) + &(&k.from_poly(k.a().clone()) * &f);
        assert_eq!(ff, expect);
        assert_eq!(&f * &f.inv().unwrap(), k.one());
    }

    #[test]
    fn char_two_square() {
        let k = desc(2, "T^2", 1);
        let z = &k.f() + &k.one();
        // (f + 1)^2 = f^2 + 1 = T^2 f
        assert_eq!(&z * &z, k.from_polys(Poly::zero(k.field()), Poly::parse(k.field(), "T^2").unwrap()));
        assert_eq!(z.norm(), RatFn::from_poly(Poly::parse(k.field(), "T^2").unwrap()));
    }

    #[test]
    fn vieta() {
        let k = desc(3, "2*T^2 + T", 1);
        let f = k.f();
        let fs = k.f_conj();
        assert_eq!(&f + &fs, k.from_poly(k.a().clone()));
        assert_eq!(&f * &fs, k.from_poly(Poly::constant(k.field(), k.field().neg(1))));
    }

    #[test]
    fn first_embedding_q2() {
        let k = desc(2, "T^2", 1);
        let e = k.embed(Place::First, 16).unwrap();
        let f = k.field();
        let expect = LaurentSeries::new(
            f,
            -2,
            {
                let mut v = vec![0; 18];
                v[0] = 1; // u^-2
                v[4] = 1; // u^2
                v[8] = 1; // u^6
                v[16] = 1; // u^14
                v
            },
            16,
        );
        assert_eq!(e, expect);
        // oracle: f^2 + T^2 f + 1 vanishes
        let t2 = LaurentSeries::from_poly(k.a(), 40);
        let one = LaurentSeries::one(f, 40);
        let res = &(&(&e * &e) + &(&t2 * &e)) + &one;
        assert!(res.is_zero_to_precision());
        assert!(res.prec() >= 12);
        assert!(k.embed(Place::First, 4).is_err());
    }

    #[test]
    fn second_embedding() {
        for k in [desc(2, "T^2", 1), desc(3, "T^3 + 2*T", 2), desc(5, "3*T", 4)] {
            let e1 = k.embed(Place::First, 30).unwrap();
            let e2 = k.embed(Place::Second, 30).unwrap();
            assert_eq!(e1.ord().unwrap(), -(k.d() as i64));
            assert_eq!(e1.sgn().unwrap(), k.a().lc());
            assert_eq!(e2.ord().unwrap(), k.d() as i64);
            let prod = &e1 * &e2;
            let minus_b = LaurentSeries::monomial(k.field(), k.field().neg(k.b()), 0, 100);
            assert!(prod.compare(&minus_b).is_equal());
        }
    }

    #[test]
    fn qseq_examples() {
        let k = desc(2, "T^2", 1);
        let qs = k.qseq(4);
        assert_eq!(qs.get(0), &Poly::one(k.field()));
        assert_eq!(qs.get(1), k.a());
        assert_eq!(qs.get(2), &Poly::parse(k.field(), "T^4 + 1").unwrap());
        assert!(qs.degree_violations(2).is_empty());
    }

    #[test]
    fn degree_examples() {
        let k = desc(2, "T^2", 1);
        assert_eq!(k.f().deg_at_inf1().unwrap(), 2);
        assert_eq!((&k.f() - &k.from_poly(k.a().clone())).deg_at_inf1().unwrap(), -2);
        // Q_1 f - Q_2 = -(f*)^2
        let qs = k.qseq(3);
        let z = &(&k.from_poly(qs.get(1).clone()) * &k.f()) - &k.from_poly(qs.get(2).clone());
        assert_eq!(z.deg_at_inf1().unwrap(), -4);
        let e = k.embed(Place::First, 30).unwrap();
        let qf = &LaurentSeries::from_poly(qs.get(1), 30) * &e;
        assert_eq!(qf.nearest_poly_norm().unwrap(), NearestNorm::Pow(4));
        assert!(k.zero().deg_at_inf1().is_err());
    }

    #[test]
    fn deep_cancellation_degrees() {
        let k = desc(3, "T^2 + 1", 1);
        let qs = k.qseq(10);
        for n in 0..9 {
            let z = &(&k.from_poly(qs.get(n).clone()) * &k.f()) - &k.from_poly(qs.get(n + 1).clone());
            assert_eq!(z.deg_at_inf1().unwrap(), -((n as i64 + 1) * 2));
        }
    }

    #[test]
    fn binet_restatement() {
        for k in [desc(2, "T^2", 1), desc(3, "T^2 + T", 2), desc(2, "T^3 + T", 1)] {
            let f = k.f();
            let fs = k.f_conj();
            let diff = &f - &fs;
            let qs = k.qseq(12);
            for n in 0..=12 {
                let lhs = &f.pow(n as i64 + 1).unwrap() - &fs.pow(n as i64 + 1).unwrap();
                let rhs = &k.from_poly(qs.get(n).clone()) * &diff;
                assert_eq!(lhs, rhs, "n = {n}");
            }
        }
    }

    fn arb_elem(k: QuadDesc) -> impl Strategy<Value = QuadElem> {
        let q = k.q();
        (
            prop::collection::vec(0..q, 0..4),
            prop::collection::vec(0..q, 0..4),
            prop::collection::vec(0..q, 1..3),
        )
            .prop_map(move |(x, y, den)| {
                let f = k.field().clone();
                let mut den = Poly::from_coeffs(&f, den);
                if den.is_zero() {
                    den = Poly::one(&f);
                }
                let x = RatFn::new(Poly::from_coeffs(&f, x), den).unwrap();
                k.elem(x, RatFn::from_poly(Poly::from_coeffs(&f, y)))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn norm_is_multiplicative(z in arb_elem(desc(3, "T^2 + T", 2)), w in arb_elem(desc(3, "T^2 + T", 2))) {
            prop_assert_eq!((&z * &w).norm(), &z.norm() * &w.norm());
            prop_assert_eq!((&z + &w).trace(), &z.trace() + &w.trace());
            prop_assert_eq!((&z * &w).conj(), &z.conj() * &w.conj());
            prop_assert_eq!(z.conj().conj(), z.clone());
        }

        #[test]
        fn embedding_is_a_homomorphism(z in arb_elem(desc(2, "T^2 + T + 1", 1)), w in arb_elem(desc(2, "T^2 + T + 1", 1))) {
            let p = 20;
            let lhs = (&z * &w).embed(Place::First, p).unwrap();
            let rhs = &z.embed(Place::First, p + 10).unwrap() * &w.embed(Place::First, p + 10).unwrap();
            prop_assert!(lhs.compare(&rhs).is_equal());
        }

        #[test]
        fn degree_is_additive(z in arb_elem(desc(2, "T^2", 1)), w in arb_elem(desc(2, "T^2", 1))) {
            prop_assume!(!z.is_zero() && !w.is_zero());
            prop_assert_eq!((&z * &w).deg_at_inf1().unwrap(), z.deg_at_inf1().unwrap() + w.deg_at_inf1().unwrap());
        }
    }
}
