//! The order A_f = F_q[f, fT, ..., fT^(d-1)].
//!
//! A_f has the F_q-basis `1` and `f^l T^m` (`l >= 1`, `0 <= m < d`), whose
//! degrees at the first place are `0` and `l d + m`: one basis element per
//! degree, none in degrees `1..d`. Coordinates are therefore indexed by
//! degree slot, and the degree of an element is the top nonzero slot.

use crate::error::Result;
use crate::field::Elem;
use crate::laurent::LaurentSeries;
use crate::poly::Poly;
use crate::quad::{Place, QuadDesc, QuadElem};
use crate::ratfn::RatFn;

/// One element `f^l T^m` of the standard basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisElem {
    pub l: usize,
    pub m: usize,
    pub degree: usize,
    pub elem: QuadElem,
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// Coordinates on the degree-slot basis (index = degree).
    Member(Vec<Elem>),
    Refused(Refusal),
}

impl Membership {
    pub fn coords(&self) -> Option<&[Elem]> {
        match self {
            Membership::Member(c) => Some(c),
            Membership::Refused(_) => None,
        }
    }

    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

/// Why an element is not in A_f.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refusal {
    /// A coordinate is not a polynomial, so the element is not even in F_q[T, f].
    NonPolynomial,
    /// After matching every `f`-coefficient, `T^k` remains in the
    /// constant part and no basis element has degree `k`.
    Unsolvable { degree: usize },
}

/// `A_f` attached to a quadratic field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderDesc {
    qd: QuadDesc,
}

/// `f^l = s_l + t_l f` for `l = 0..=l_max`.
fn power_coords(qd: &QuadDesc, l_max: usize) -> (Vec<Poly>, Vec<Poly>) {
    let f = qd.field();
    let mut s = vec![Poly::one(f)];
    let mut t = vec![Poly::zero(f)];
    for l in 0..l_max {
        s.push(t[l].scale(qd.b()));
        t.push(&s[l] + &(qd.a() * &t[l]));
    }
    (s, t)
}

impl OrderDesc {
    pub fn new(qd: QuadDesc) -> OrderDesc {
        OrderDesc { qd }
    }

    pub fn quad(&self) -> &QuadDesc {
        &self.qd
    }

    pub fn d(&self) -> usize {
        self.qd.d()
    }

    /// Whether a degree slot carries a basis element.
    pub fn slot_valid(&self, k: usize) -> bool {
        k == 0 || k >= self.d()
    }

    /// `(l, m)` of the basis element in slot `k` (`(0, 0)` for `1`).
    pub fn slot_lm(&self, k: usize) -> Option<(usize, usize)> {
        if k == 0 {
            Some((0, 0))
        } else if k >= self.d() {
            Some((k / self.d(), k % self.d()))
        } else {
            None
        }
    }

    /// Sign of the basis element in slot `k`: `lc(a)^l`.
    pub fn slot_sgn(&self, k: usize) -> Elem {
        let (l, _) = self.slot_lm(k).expect("valid slot");
        self.qd.field().pow(self.qd.a().lc(), l as u64)
    }

    /// Basis elements of degree `<= deg_bound`, ascending.
    pub fn af_basis(&self, deg_bound: usize) -> Vec<BasisElem> {
        let d = self.d();
        let (s, t) = power_coords(&self.qd, deg_bound / d + 1);
        let mut out = vec![BasisElem { l: 0, m: 0, degree: 0, elem: self.qd.one() }];
        for k in d..=deg_bound {
            let (l, m) = (k / d, k % d);
            let elem = self.qd.from_polys(s[l].shift(m), t[l].shift(m));
            out.push(BasisElem { l, m, degree: k, elem });
        }
        out
    }

    /// The element with the given slot coordinates.
    pub fn elem(&self, coords: &[Elem]) -> QuadElem {
        let f = self.qd.field();
        let d = self.d();
        let top = coords.len();
        let (s, t) = power_coords(&self.qd, top / d + 1);
        let mut x = vec![0; top + 1];
        let mut y = vec![0; top + 1];
        x[0] = coords.first().copied().unwrap_or(0);
        for (k, &c) in coords.iter().enumerate().skip(d) {
            if c == 0 {
                continue;
            }
            let (l, m) = (k / d, k % d);
            for (i, &sc) in s[l].coeffs().iter().enumerate() {
                x[i + m] = f.add(x[i + m], f.mul(c, sc));
            }
            for (i, &tc) in t[l].coeffs().iter().enumerate() {
                y[i + m] = f.add(y[i + m], f.mul(c, tc));
            }
        }
        self.qd.from_polys(Poly::from_coeffs(f, x), Poly::from_coeffs(f, y))
    }

    /// Exact membership test with coordinates.
    ///
    /// The `f`-parts `t_l T^m` of the basis have degrees `(l-1) d + m`,
    /// covering every degree once, so the `y` coordinate fixes all
    /// coefficients but the constant; what is left of `x` must be a constant.
    pub fn membership(&self, z: &QuadElem) -> Membership {
        let (Some(x), Some(y)) = (z.x().as_poly(), z.y().as_poly()) else {
            return Membership::Refused(Refusal::NonPolynomial);
        };
        let (mut coords, x) = self.reduce_y(x, y);
        if let Some(k) = x.degree().filter(|&k| k >= 1) {
            return Membership::Refused(Refusal::Unsolvable { degree: k });
        }
        coords[0] = x.coeff(0);
        while coords.last() == Some(&0) {
            coords.pop();
        }
        Membership::Member(coords)
    }

    /// Match every `f`-coefficient of `x + y f` with basis elements; returns
    /// their slot coordinates and what is left of `x`. Linear in `(x, y)`.
    fn reduce_y(&self, x: &Poly, y: &Poly) -> (Vec<Elem>, Poly) {
        let f = self.qd.field();
        let d = self.d();
        let deg_y = y.degree().unwrap_or(0);
        let (s, t) = power_coords(&self.qd, deg_y / d + 2);
        let mut x = x.clone();
        let mut y = y.clone();
        let mut coords = vec![0; (deg_y / d + 1) * d + d];
        while let Some(e) = y.degree() {
            let (l, m) = (e / d + 1, e % d);
            let c = f.div(y.lc(), t[l].lc()).expect("t_l has a unit leading coefficient");
            coords[l * d + m] = c;
            y = &y - &t[l].shift(m).scale(c);
            x = &x - &s[l].shift(m).scale(c);
        }
        (coords, x)
    }

    /// Non-constant part of the leftover of `x + y f`; zero iff the
    /// element lies in A_f.
    pub(crate) fn nonconstant_leftover(&self, x: &Poly, y: &Poly) -> Poly {
        let (_, rest) = self.reduce_y(x, y);
        let mut c = rest.coeffs().to_vec();
        if let Some(c0) = c.first_mut() {
            *c0 = 0;
        }
        Poly::from_coeffs(self.qd.field(), c)
    }

    /// Degree of an element from its slot coordinates.
    pub fn degree_of(coords: &[Elem]) -> Option<usize> {
        crate::linalg::top(coords)
    }

    /// Sign of an element from its slot coordinates.
    pub fn sgn_of(&self, coords: &[Elem]) -> Option<Elem> {
        let k = Self::degree_of(coords)?;
        Some(self.qd.field().mul(coords[k], self.slot_sgn(k)))
    }

    /// First-place images of the basis elements up to `deg_bound`, each to
    /// absolute precision `prec`.
    pub fn basis_images(&self, deg_bound: usize, prec: i64) -> Result<Vec<LaurentSeries>> {
        self.af_basis(deg_bound).iter().map(|b| b.elem.embed(Place::First, prec)).collect()
    }

    /// `f^l` for `l >= 0` as an element.
    pub fn f_pow(&self, l: usize) -> QuadElem {
        let (s, t) = power_coords(&self.qd, l);
        self.qd.elem(RatFn::from_poly(s[l].clone()), RatFn::from_poly(t[l].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn order(q: u32, a: &str, b: u32) -> OrderDesc {
        let f = Field::prime(q).unwrap();
        OrderDesc::new(QuadDesc::new(Poly::parse(&f, a).unwrap(), b).unwrap())
    }

    #[test]
    fn basis_listing() {
        let o = order(2, "T^2", 1);
        let b = o.af_basis(4);
        let degs: Vec<usize> = b.iter().map(|e| e.degree).collect();
        assert_eq!(degs, vec![0, 2, 3, 4]);
        let qd = o.quad();
        assert_eq!(b[1].elem, qd.f());
        assert_eq!(b[2].elem, &qd.f() * &qd.t());
        assert_eq!(b[3].elem, &qd.f() * &qd.f());
        // f^2 = b + a f
        assert_eq!(b[3].elem, qd.from_polys(Poly::one(qd.field()), qd.a().clone()));
        for e in &b {
            assert_eq!(e.elem.deg_at_inf1().unwrap(), e.degree as i64);
            assert!(!(e.l == 0 && e.m > 0));
        }
    }

    #[test]
    fn membership_examples() {
        let o = order(2, "T^2", 1);
        let qd = o.quad().clone();
        assert_eq!(o.membership(&qd.t()), Membership::Refused(Refusal::Unsolvable { degree: 1 }));
        let z = &qd.f() * &(&qd.f() * &qd.t());
        assert!(o.membership(&z).is_member());
        // f^2 T = T + T^3 f sits in slot 5
        let f2t = qd.from_polys(Poly::parse(qd.field(), "T").unwrap(), Poly::parse(qd.field(), "T^3").unwrap());
        assert_eq!(o.membership(&f2t), Membership::Member(vec![0, 0, 0, 0, 0, 1]));
        // T^2 f + T is not in A_f: its constant part keeps a T
        let other = qd.from_polys(Poly::parse(qd.field(), "T").unwrap(), Poly::parse(qd.field(), "T^2").unwrap());
        assert!(!o.membership(&other).is_member());
        let half = qd.from_ratfn(RatFn::new(Poly::one(qd.field()), Poly::t(qd.field())).unwrap());
        assert_eq!(o.membership(&half), Membership::Refused(Refusal::NonPolynomial));
    }

    #[test]
    fn coordinates_round_trip() {
        let o = order(3, "T^3 + 2*T + 1", 2);
        let basis = o.af_basis(12);
        for (i, be) in basis.iter().enumerate() {
            let c = o.membership(&be.elem);
            let mut expect = vec![0; be.degree + 1];
            expect[be.degree] = 1;
            assert_eq!(c, Membership::Member(expect), "basis element {i}");
            assert_eq!(o.elem(c.coords().unwrap()), be.elem);
        }
    }

    /// Oracle: enumerate all F_2-combinations of basis elements up to degree 8.
    #[test]
    fn membership_matches_brute_force_q2_d2() {
        use std::collections::HashSet;
        let o = order(2, "T^2", 1);
        let qd = o.quad().clone();
        let basis = o.af_basis(8);
        let mut span = HashSet::new();
        for mask in 0u32..(1 << basis.len()) {
            let mut z = qd.zero();
            for (i, b) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    z = &z + &b.elem;
                }
            }
            span.insert(z);
        }
        let f = qd.field();
        // every x + y f with deg x <= 5, deg y <= 6 (covers degree <= 8)
        for xm in 0u32..(1 << 6) {
            for ym in 0u32..(1 << 7) {
                let x = Poly::from_coeffs(f, (0..6).map(|i| xm >> i & 1).collect());
                let y = Poly::from_coeffs(f, (0..7).map(|i| ym >> i & 1).collect());
                let z = qd.from_polys(x, y);
                let in_span = span.contains(&z);
                let member = o.membership(&z);
                if z.is_zero() || z.deg_at_inf1().unwrap() <= 8 {
                    assert_eq!(member.is_member(), in_span, "{z}");
                }
                if let Membership::Member(c) = member {
                    assert_eq!(o.elem(&c), z);
                }
            }
        }
    }
}
