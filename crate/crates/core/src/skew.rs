//! Twisted polynomials `L{τ}` with `τ c = c^q τ`, over `F_q(T)` exactly or
//! over `F_q((1/T))` to precision.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::laurent::LaurentSeries;
use crate::poly::Poly;
use crate::ratfn::RatFn;

/// Precision used for exact constants in the series domain.
const EXACT: i64 = 1 << 40;

/// A coefficient domain closed under the Frobenius `c ↦ c^q`.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn field(&self) -> &Field;
    fn zero(field: &Field) -> Self;
    fn constant(field: &Field, c: Elem) -> Self;
    fn from_poly(p: &Poly) -> Self;
    /// Exactly zero, or zero to its precision.
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    /// `c^(q^k)`.
    fn frob(&self, k: u32) -> Self;
    /// The scalar `s` with `s c` normalized: `1/c` when exact, `1/sgn c`
    /// over series.
    fn normalizer(&self) -> Result<Self>;
    /// Known coefficients from the leading one; `i64::MAX` when exact.
    fn known(&self) -> i64;
}

impl Coeff for RatFn {
    fn field(&self) -> &Field {
        RatFn::field(self)
    }
    fn zero(field: &Field) -> Self {
        RatFn::zero(field)
    }
    fn constant(field: &Field, c: Elem) -> Self {
        RatFn::constant(field, c)
    }
    fn from_poly(p: &Poly) -> Self {
        RatFn::from_poly(p.clone())
    }
    fn is_zero(&self) -> bool {
        RatFn::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        RatFn::div(self, o)
    }
    fn frob(&self, k: u32) -> Self {
        self.frobenius(k)
    }
    fn normalizer(&self) -> Result<Self> {
        self.inv()
    }
    fn known(&self) -> i64 {
        i64::MAX
    }
}

impl Coeff for LaurentSeries {
    fn field(&self) -> &Field {
        LaurentSeries::field(self)
    }
    fn zero(field: &Field) -> Self {
        LaurentSeries::zero(field, EXACT)
    }
    fn constant(field: &Field, c: Elem) -> Self {
        LaurentSeries::monomial(field, c, 0, EXACT)
    }
    fn from_poly(p: &Poly) -> Self {
        LaurentSeries::from_poly(p, EXACT)
    }
    fn is_zero(&self) -> bool {
        self.is_zero_to_precision()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        LaurentSeries::div(self, o)
    }
    fn frob(&self, k: u32) -> Self {
        self.frobenius(k)
    }
    fn normalizer(&self) -> Result<Self> {
        let f = LaurentSeries::field(self);
        let s = self.sgn()?;
        Ok(LaurentSeries::monomial(f, f.inv(s).expect("sign is a unit"), 0, EXACT))
    }
    fn known(&self) -> i64 {
        self.rel_prec()
    }
}

/// `Σ a_k τ^k`, top coefficient nonzero; the zero polynomial has none.
#[derive(Clone, PartialEq)]
pub struct SkewPoly<C: Coeff> {
    field: Field,
    coeffs: Vec<C>,
}

pub type ExactSkew = SkewPoly<RatFn>;
pub type SeriesSkew = SkewPoly<LaurentSeries>;

impl<C: Coeff> fmt::Debug for SkewPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coeffs).finish()
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for SkewPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})τ")?,
                _ => write!(f, "({c})τ^{k}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coeff> SkewPoly<C> {
    pub fn new(field: &Field, mut coeffs: Vec<C>) -> SkewPoly<C> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        SkewPoly { field: field.clone(), coeffs }
    }

    pub fn zero(field: &Field) -> SkewPoly<C> {
        SkewPoly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> SkewPoly<C> {
        let f = c.field().clone();
        Self::new(&f, vec![c])
    }

    pub fn one(field: &Field) -> SkewPoly<C> {
        Self::constant(C::constant(field, 1))
    }

    /// `c τ^k`.
    pub fn monomial(c: C, k: usize) -> SkewPoly<C> {
        let f = c.field().clone();
        let mut v = vec![C::zero(&f); k];
        v.push(c);
        Self::new(&f, v)
    }

    pub fn tau(field: &Field) -> SkewPoly<C> {
        Self::monomial(C::constant(field, 1), 1)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C {
        self.coeffs.get(k).cloned().unwrap_or_else(|| C::zero(&self.field))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `deg_τ`; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn add(&self, o: &SkewPoly<C>) -> SkewPoly<C> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(&self.field, (0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect())
    }

    pub fn sub(&self, o: &SkewPoly<C>) -> SkewPoly<C> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(&self.field, (0..n).map(|k| self.coeff(k).sub(&o.coeff(k))).collect())
    }

    /// `c · self`, scalar on the left.
    pub fn scale_left(&self, c: &C) -> SkewPoly<C> {
        Self::new(&self.field, self.coeffs.iter().map(|a| c.mul(a)).collect())
    }

    /// `self · other`: `a τ^i · b τ^j = a b^(q^i) τ^(i+j)`.
    pub fn mul(&self, other: &SkewPoly<C>) -> SkewPoly<C> {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![C::zero(&self.field); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(&b.frob(i as u32)));
            }
        }
        Self::new(&self.field, out)
    }

    /// `(s, r)` with `self = s · v + r` and `deg r < deg v`.
    pub fn right_divmod(&self, v: &SkewPoly<C>) -> Result<(SkewPoly<C>, SkewPoly<C>)> {
        let dv = v.degree().ok_or(Error::DivisionByZero)?;
        let lv = v.lc().expect("nonzero");
        let mut r = self.coeffs.clone();
        let mut s = vec![C::zero(&self.field); r.len().saturating_sub(dv)];
        let mut step = 0;
        while r.len() > dv {
            let top = r.len() - 1;
            let k = top - dv;
            let lu = r.pop().expect("nonempty");
            if !lu.is_zero() {
                let lvk = lv.frob(k as u32);
                let x = lu
                    .div(&lvk)
                    .map_err(|_| Error::InsufficientPrecision(format!("precision exhausted at step {step}")))?;
                for (j, b) in v.coeffs[..dv].iter().enumerate() {
                    r[k + j] = r[k + j].sub(&x.mul(&b.frob(k as u32)));
                }
                s[k] = x;
            }
            step += 1;
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Ok((Self::new(&self.field, s), Self::new(&self.field, r)))
    }

    /// Left multiple with normalized leading coefficient.
    pub fn normalized(&self) -> Result<SkewPoly<C>> {
        match self.lc() {
            None => Ok(self.clone()),
            Some(c) => Ok(self.scale_left(&c.normalizer()?)),
        }
    }

    /// `Σ a_k x^(q^k)`.
    pub fn eval(&self, x: &C) -> C {
        let mut acc = C::zero(&self.field);
        let mut xp = x.clone();
        for (k, a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                xp = xp.frob(1);
            }
            acc = acc.add(&a.mul(&xp));
        }
        acc
    }

    /// Apply `f` to every coefficient.
    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> SkewPoly<D> {
        SkewPoly::new(&self.field, self.coeffs.iter().map(f).collect())
    }
}

/// The normalized right gcd, the generator of the left ideal `Σ L{τ} h`.
/// A divisor whose leading coefficient carries fewer than `min_known`
/// coefficients stops the computation.
pub fn left_ideal_generator<C: Coeff>(hs: &[SkewPoly<C>], min_known: i64) -> Result<SkewPoly<C>> {
    let mut it = hs.iter().filter(|h| !h.is_zero());
    let mut g = it.next().ok_or_else(|| Error::InvalidInput("all generators are zero".into()))?.clone();
    let mut step = 0;
    for h in it {
        let (mut a, mut b) = (h.clone(), g);
        while !b.is_zero() {
            if b.lc().expect("nonzero").known() < min_known {
                return Err(Error::InsufficientPrecision(format!("precision exhausted at step {step}")));
            }
            let (_, r) = a.right_divmod(&b)?;
            a = b;
            b = r;
            step += 1;
        }
        g = a;
    }
    g.normalized()
}

/// Carlitz module `ρ_m` with `ρ_T = T + τ`.
pub fn carlitz<C: Coeff>(m: &Poly) -> Result<SkewPoly<C>> {
    if m.is_zero() {
        return Err(Error::InvalidInput("ρ_0 is not defined".into()));
    }
    let field = m.field();
    let rho_t = SkewPoly::new(field, vec![C::from_poly(&Poly::t(field)), C::constant(field, 1)]);
    let mut pw = SkewPoly::one(field);
    let mut acc = SkewPoly::zero(field);
    for (i, &c) in m.coeffs().iter().enumerate() {
        if i > 0 {
            pw = pw.mul(&rho_t);
        }
        if c != 0 {
            acc = acc.add(&pw.scale_left(&C::constant(field, c)));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f2() -> Field {
        Field::prime(2).unwrap()
    }

    fn rf(f: &Field, s: &str) -> RatFn {
        RatFn::from_poly(Poly::parse(f, s).unwrap())
    }

    fn skew(f: &Field, cs: &[&str]) -> ExactSkew {
        SkewPoly::new(f, cs.iter().map(|s| rf(f, s)).collect())
    }

    #[test]
    fn defining_relation() {
        let f = f2();
        let t = SkewPoly::constant(rf(&f, "T"));
        let tau = ExactSkew::tau(&f);
        assert_eq!(tau.mul(&t), skew(&f, &["0", "T^2"]));
    }

    #[test]
    fn square_of_tau_plus_t() {
        let f = f2();
        let u = skew(&f, &["T", "1"]);
        assert_eq!(u.mul(&u), skew(&f, &["T^2", "T^2 + T", "1"]));
    }

    #[test]
    fn carlitz_values() {
        for q in [2, 3] {
            let f = Field::prime(q).unwrap();
            let p = |s: &str| Poly::parse(&f, s).unwrap();
            assert_eq!(carlitz::<RatFn>(&p("T")).unwrap(), skew(&f, &["T", "1"]));
            let t2 = if q == 2 { "T^2 + T" } else { "T^3 + T" };
            assert_eq!(carlitz::<RatFn>(&p("T^2")).unwrap(), skew(&f, &["T^2", t2, "1"]));
            let c = if q == 2 { "1" } else { "2" };
            assert_eq!(carlitz::<RatFn>(&p(c)).unwrap(), skew(&f, &[c]));
        }
    }

    #[test]
    fn carlitz_ideal_of_coprime_pair() {
        let f = f2();
        let p = |s: &str| Poly::parse(&f, s).unwrap();
        let g = left_ideal_generator(&[carlitz::<RatFn>(&p("T")).unwrap(), carlitz(&p("T + 1")).unwrap()], 1).unwrap();
        assert_eq!(g, ExactSkew::one(&f));
        let m = p("T^2 + T + 1");
        let g = left_ideal_generator(&[carlitz::<RatFn>(&m).unwrap(), carlitz(&(&m * &p("T^2"))).unwrap()], 1).unwrap();
        assert_eq!(g, carlitz(&m).unwrap());
    }

    #[test]
    fn series_domain_division() {
        let f = Field::prime(3).unwrap();
        let p = |s: &str| Poly::parse(&f, s).unwrap();
        let a = carlitz::<RatFn>(&p("T^2 + 1")).unwrap().map(|c| LaurentSeries::from_ratfn(c, 30));
        let b = carlitz::<RatFn>(&p("T + 2")).unwrap().map(|c| LaurentSeries::from_ratfn(c, 30));
        let (s, r) = a.mul(&b).right_divmod(&b).unwrap();
        assert!(r.is_zero());
        for k in 0..=2 {
            assert!(s.coeff(k).compare(&a.coeff(k)).is_equal());
        }
    }

    fn arb_skew(q: u32, max_deg: usize) -> impl Strategy<Value = ExactSkew> {
        let f = Field::prime(q).unwrap();
        prop::collection::vec(prop::collection::vec(0..q, 0..4), 0..=max_deg + 1).prop_map(move |cs| {
            SkewPoly::new(&f, cs.into_iter().map(|c| RatFn::from_poly(Poly::from_coeffs(&f, c))).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ring_axioms(a in arb_skew(3, 3), b in arb_skew(3, 3), c in arb_skew(3, 2)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            if !a.is_zero() && !b.is_zero() {
                prop_assert_eq!(a.mul(&b).degree(), Some(a.degree().unwrap() + b.degree().unwrap()));
            }
        }

        #[test]
        fn division_reconstructs(u in arb_skew(2, 5), v in arb_skew(2, 3)) {
            prop_assume!(!v.is_zero());
            let (s, r) = u.right_divmod(&v).unwrap();
            prop_assert_eq!(s.mul(&v).add(&r), u);
            prop_assert!(r.degree().map_or(true, |dr| dr < v.degree().unwrap()));
        }

        #[test]
        fn eval_is_additive(h in arb_skew(3, 3), x in prop::collection::vec(0u32..3, 0..4), y in prop::collection::vec(0u32..3, 0..4), c in 0u32..3) {
            let f = Field::prime(3).unwrap();
            let x = RatFn::from_poly(Poly::from_coeffs(&f, x));
            let y = RatFn::from_poly(Poly::from_coeffs(&f, y));
            prop_assert_eq!(h.eval(&(&x + &y)), &h.eval(&x) + &h.eval(&y));
            prop_assert_eq!(h.eval(&x.scale(c)), h.eval(&x).scale(c));
        }
    }
}
