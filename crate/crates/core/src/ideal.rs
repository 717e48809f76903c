//! Ideals of A_f: filtered bases, products, containment and equality
//! certificates, duals, invertibility and two-generator extraction.
//!
//! Integral ideals are handled in degree-slot coordinates of A_f. Fractional
//! ideals are an integral ideal over a denominator in A_f.

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::lattice::{BasisRow, FilteredBasis};
use crate::linalg::{self, Echelon};
use crate::order::{Membership, OrderDesc};
use crate::poly::Poly;
use crate::quad::QuadElem;

/// Slack schedule for [`IdealGens::filtered_basis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlackPolicy {
    /// Consecutive unchanged slack steps required; `None` means `2d`.
    pub window: Option<usize>,
    pub cap: usize,
}

impl Default for SlackPolicy {
    fn default() -> Self {
        SlackPolicy { window: None, cap: 64 }
    }
}

/// Generators of an ideal `(gens) / denom`, with `gens` in A_f.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealGens {
    order: OrderDesc,
    gens: Vec<QuadElem>,
    denom: Option<QuadElem>,
}

/// Coordinates of elements on the rows of a filtered basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentCert {
    pub bound: i64,
    /// For each certified element, `(row index, coefficient)` pairs.
    pub coords: Vec<Vec<(usize, Elem)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    Certified(ContainmentCert),
    /// Element `index` has no coordinates; `residual_degree` is the top
    /// degree left after reduction.
    Refused { index: usize, residual_degree: i64 },
}

impl Containment {
    pub fn is_certified(&self) -> bool {
        matches!(self, Containment::Certified(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityCert {
    pub bound: i64,
    pub left_in_right: ContainmentCert,
    pub right_in_left: ContainmentCert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equality {
    Certified(EqualityCert),
    /// One direction failed at a bound where both bases stabilized.
    Refused { bound: i64, direction: Direction, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftInRight,
    RightInLeft,
}

impl Equality {
    pub fn is_certified(&self) -> bool {
        matches!(self, Equality::Certified(_))
    }
}

/// Dual of an ideal, as `span(gammas) / g0` with `gammas` in A_f.
#[derive(Debug, Clone)]
pub struct Dual {
    pub ideal: IdealGens,
    pub basis: FilteredBasis,
}

/// Elements `c * g_i * beta_k` of `I I*` summing to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertibilityCert {
    pub bound: i64,
    /// `(generator index, dual row index, coefficient)`.
    pub terms: Vec<(usize, usize, Elem)>,
    pub dual_rows: Vec<QuadElem>,
}

impl IdealGens {
    /// Integral ideal; every generator must lie in A_f.
    pub fn new(order: &OrderDesc, gens: Vec<QuadElem>) -> Result<IdealGens> {
        let gens: Vec<QuadElem> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        if gens.is_empty() {
            return Err(Error::InvalidInput("ideal needs a nonzero generator".into()));
        }
        for g in &gens {
            if !order.membership(g).is_member() {
                return Err(Error::InvalidInput(format!("generator {g} is not in A_f")));
            }
        }
        Ok(IdealGens { order: order.clone(), gens, denom: None })
    }

    /// `(gens) / denom` with `gens` and `denom` in A_f.
    pub fn fractional(order: &OrderDesc, gens: Vec<QuadElem>, denom: QuadElem) -> Result<IdealGens> {
        let mut i = Self::new(order, gens)?;
        if denom.is_zero() || !order.membership(&denom).is_member() {
            return Err(Error::InvalidInput("denominator must be a nonzero element of A_f".into()));
        }
        i.denom = Some(denom);
        Ok(i)
    }

    pub fn unit(order: &OrderDesc) -> IdealGens {
        IdealGens { order: order.clone(), gens: vec![order.quad().one()], denom: None }
    }

    pub fn principal(order: &OrderDesc, g: QuadElem) -> Result<IdealGens> {
        Self::new(order, vec![g])
    }

    /// `a_i = (f, fT, ..., fT^i)` for `0 <= i <= d - 1`.
    pub fn a_i(order: &OrderDesc, i: usize) -> Result<IdealGens> {
        if i >= order.d() {
            return Err(Error::InvalidInput(format!("a_{i} needs i <= d - 1 = {}", order.d() - 1)));
        }
        let qd = order.quad();
        let gens = (0..=i).map(|m| qd.from_polys(Poly::zero(qd.field()), Poly::monomial(qd.field(), 1, m))).collect();
        Self::new(order, gens)
    }

    pub fn order(&self) -> &OrderDesc {
        &self.order
    }

    pub fn gens(&self) -> &[QuadElem] {
        &self.gens
    }

    pub fn denom(&self) -> Option<&QuadElem> {
        self.denom.as_ref()
    }

    fn denom_degree(&self) -> i64 {
        self.denom.as_ref().map_or(0, |d| d.deg_at_inf1().expect("nonzero"))
    }

    /// Generators as elements of K, denominators applied.
    pub fn elements(&self) -> Vec<QuadElem> {
        match &self.denom {
            None => self.gens.clone(),
            Some(d) => self.gens.iter().map(|g| g.div(d).expect("nonzero")).collect(),
        }
    }

    /// Largest generator degree, denominator applied.
    pub fn max_gen_degree(&self) -> i64 {
        self.gens.iter().map(|g| g.deg_at_inf1().expect("nonzero")).max().unwrap() - self.denom_degree()
    }

    /// `(alpha) * self` for `alpha` in A_f.
    pub fn scale(&self, alpha: &QuadElem) -> Result<IdealGens> {
        let gens = self.gens.iter().map(|g| g * alpha).collect();
        let mut out = Self::new(&self.order, gens)?;
        out.denom = self.denom.clone();
        Ok(out)
    }

    /// Generators are all pairwise products.
    pub fn product(&self, other: &IdealGens) -> IdealGens {
        let mut gens = Vec::new();
        for g in &self.gens {
            for h in &other.gens {
                let p = g * h;
                if !gens.contains(&p) {
                    gens.push(p);
                }
            }
        }
        let denom = match (&self.denom, &other.denom) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a * b),
        };
        IdealGens { order: self.order.clone(), gens, denom }
    }

    pub fn pow(&self, k: usize) -> IdealGens {
        let mut acc = Self::unit(&self.order);
        for _ in 0..k {
            acc = acc.product(self);
        }
        acc
    }

    fn slot_coords(&self, z: &QuadElem) -> Vec<Elem> {
        match self.order.membership(z) {
            Membership::Member(c) => c,
            Membership::Refused(r) => panic!("product of A_f elements left A_f: {r:?}"),
        }
    }

    /// Echelon basis of the integral part up to `bound`, grown with slack
    /// until the restricted basis is unchanged for the policy window.
    fn integral_echelon(&self, bound: usize, policy: SlackPolicy) -> Result<(Echelon, usize)> {
        let d = self.order.d();
        let window = policy.window.unwrap_or(2 * d);
        let basis = self.order.af_basis(bound + policy.cap + 1);
        let gen_degs: Vec<usize> =
            self.gens.iter().map(|g| g.deg_at_inf1().expect("nonzero") as usize).collect();
        let mut ech = Echelon::new(self.order.quad().field());
        let mut next = 0;
        let push_upto = |ech: &mut Echelon, top: usize, next: &mut usize| {
            while *next < basis.len() && basis[*next].degree <= top {
                for g in &self.gens {
                    ech.insert(&self.slot_coords(&(&basis[*next].elem * g)));
                }
                *next += 1;
            }
        };
        let min_gen = *gen_degs.iter().min().unwrap();
        // products of degree <= bound need multipliers of degree <= bound - min_gen
        push_upto(&mut ech, bound.saturating_sub(min_gen), &mut next);
        let mut prev = ech.restrict(bound);
        let mut stable = 0;
        for slack in 1..=policy.cap {
            push_upto(&mut ech, (bound + slack).saturating_sub(min_gen), &mut next);
            let cur = ech.restrict(bound);
            if cur.same_span(&prev) {
                stable += 1;
                if stable >= window {
                    return Ok((cur, slack));
                }
            } else {
                stable = 0;
                prev = cur;
            }
        }
        Err(Error::NonStabilization { cap: policy.cap })
    }

    /// Canonical sign-1 basis of the elements of degree `<= bound`.
    pub fn filtered_basis(&self, bound: i64, policy: SlackPolicy) -> Result<FilteredBasis> {
        let shift = self.denom_degree();
        let int_bound = bound + shift;
        let qd = self.order.quad();
        let field = qd.field();
        if int_bound < 0 {
            return Ok(FilteredBasis::from_rows(qd, bound, Vec::new(), 0));
        }
        let (ech, slack) = self.integral_echelon(int_bound as usize, policy)?;
        let den_sgn_inv = match &self.denom {
            None => 1,
            Some(d) => field.inv(d.deg_sgn_at_inf1()?.1).expect("sgn nonzero"),
        };
        let rows = ech
            .rows()
            .map(|(p, row)| {
                let c = field.mul(field.inv(self.order.slot_sgn(p)).unwrap(), den_sgn_inv);
                let mut e = self.order.elem(row).scale(c);
                if let Some(d) = &self.denom {
                    e = e.div(d).expect("nonzero");
                }
                BasisRow { elem: e, degree: p as i64 - shift }
            })
            .collect();
        Ok(FilteredBasis::from_rows(qd, bound, rows, slack))
    }

    /// Whether each of `elems` lies in the ideal, using its basis up to `bound`.
    pub fn contains_all(&self, elems: &[QuadElem], bound: i64, policy: SlackPolicy) -> Result<Containment> {
        let fb = self.filtered_basis(bound, policy)?;
        contains_in_basis(&fb, elems)
    }

    pub fn contains(&self, z: &QuadElem, bound: i64, policy: SlackPolicy) -> Result<Containment> {
        self.contains_all(std::slice::from_ref(z), bound, policy)
    }

    /// Mutual generator containment, starting at `max gen degree + 2d` and
    /// doubling the margin while a basis fails to stabilize.
    pub fn equal(&self, other: &IdealGens, policy: SlackPolicy) -> Result<Equality> {
        let d = self.order.d() as i64;
        let top = self.max_gen_degree().max(other.max_gen_degree());
        let mut margin = 2 * d;
        loop {
            let bound = top + margin;
            match self.equal_at(other, bound, policy) {
                Err(Error::NonStabilization { .. }) if margin < 16 * d => margin *= 2,
                Err(Error::NonStabilization { cap }) => {
                    return Err(Error::Undecidable {
                        bound,
                        reason: format!("filtered basis did not stabilize within slack {cap}"),
                    })
                }
                r => return r,
            }
        }
    }

    pub fn equal_at(&self, other: &IdealGens, bound: i64, policy: SlackPolicy) -> Result<Equality> {
        let mine = self.filtered_basis(bound, policy)?;
        let theirs = other.filtered_basis(bound, policy)?;
        let lr = contains_in_basis(&theirs, &self.elements())?;
        let rl = contains_in_basis(&mine, &other.elements())?;
        Ok(match (lr, rl) {
            (Containment::Certified(a), Containment::Certified(b)) => {
                Equality::Certified(EqualityCert { bound, left_in_right: a, right_in_left: b })
            }
            (Containment::Refused { index, .. }, _) => {
                Equality::Refused { bound, direction: Direction::LeftInRight, index }
            }
            (_, Containment::Refused { index, .. }) => {
                Equality::Refused { bound, direction: Direction::RightInLeft, index }
            }
        })
    }

    /// `{beta in K : beta I ⊆ A_f}` up to degree `bound`.
    ///
    /// With `g0` the first generator, `beta = gamma / g0` for `gamma` in A_f,
    /// and each remaining condition `gamma g_i / g0 ∈ A_f` is linear in the
    /// slot coordinates of `gamma`, so the dual is a kernel.
    pub fn dual(&self, bound: i64) -> Result<Dual> {
        let qd = self.order.quad().clone();
        let field = qd.field().clone();
        let g0 = &self.gens[0];
        let g0_deg = g0.deg_at_inf1()?;
        let gamma_bound = bound + g0_deg - self.denom_degree();
        if gamma_bound < 0 {
            return Err(Error::Undecidable { bound, reason: "bound below the first generator degree".into() });
        }
        let basis = self.order.af_basis(gamma_bound as usize);
        let norm0 = g0.norm().as_poly().cloned().expect("A_f elements have polynomial norm");
        let conj0 = g0.conj();
        // residual vectors: one per basis element gamma_k
        let mut residuals: Vec<Vec<Elem>> = vec![Vec::new(); basis.len()];
        for g in self.gens.iter().skip(1) {
            // gamma g / g0 = gamma g conj(g0) / N(g0)
            let w = g * &conj0;
            let parts: Vec<(Poly, Poly)> = basis
                .iter()
                .map(|b| {
                    let z = &b.elem * &w;
                    (z.x().as_poly().cloned().unwrap(), z.y().as_poly().cloned().unwrap())
                })
                .collect();
            let width_q = parts.iter().map(|(x, y)| x.deg().max(y.deg()) + 1).max().unwrap_or(0).max(0) as usize;
            for (k, (x, y)) in parts.iter().enumerate() {
                let (qx, rx) = x.divmod(&norm0)?;
                let (qy, ry) = y.divmod(&norm0)?;
                let v = &mut residuals[k];
                let mut push = |p: &Poly, n: usize| {
                    for i in 0..n {
                        v.push(p.coeff(i));
                    }
                };
                let nd = norm0.deg() as usize;
                push(&rx, nd);
                push(&ry, nd);
                push(&self.order.nonconstant_leftover(&qx, &qy), width_q + 1);
            }
        }
        let kernel = if self.gens.len() == 1 {
            (0..basis.len()).map(|k| {
                let mut e = vec![0; basis.len()];
                e[k] = 1;
                e
            }).collect()
        } else {
            linalg::kernel(&field, &residuals)
        };
        // kernel vectors are combinations of basis elements, i.e. slot coordinates
        let mut ech = Echelon::new(&field);
        for kv in &kernel {
            let mut slots = vec![0; basis.last().map_or(0, |b| b.degree) + 1];
            for (k, &c) in kv.iter().enumerate() {
                slots[basis[k].degree] = c;
            }
            ech.insert(&slots);
        }
        let gammas: Vec<QuadElem> = ech.rows().map(|(_, r)| self.order.elem(r)).collect();
        // (gammas)/g0 as a fractional ideal; multiply the old denominator in
        let (gens, denom) = match &self.denom {
            None => (gammas.clone(), g0.clone()),
            Some(dn) => (gammas.iter().map(|g| g * dn).collect(), g0.clone()),
        };
        let ideal = IdealGens { order: self.order.clone(), gens, denom: Some(denom.clone()) };
        let (_, sgn0) = denom.deg_sgn_at_inf1()?;
        let sgn_old = match &self.denom {
            None => 1,
            Some(dn) => dn.deg_sgn_at_inf1()?.1,
        };
        let rows = ech
            .rows()
            .zip(&ideal.gens)
            .map(|((p, _), gamma_eff)| {
                let c = field.div(sgn0, field.mul(self.order.slot_sgn(p), sgn_old)).unwrap();
                let elem = gamma_eff.div(&denom).expect("nonzero").scale(c);
                BasisRow { elem, degree: p as i64 - g0_deg + self.denom_degree() }
            })
            .collect();
        Ok(Dual { basis: FilteredBasis::from_rows(&qd, bound, rows, 0), ideal })
    }

    /// Explicit `1 = sum c g_i beta_k` with `beta_k` in the dual, if one
    /// exists among duals of degree `<= bound`.
    pub fn invertibility_certificate(&self, bound: i64) -> Result<Option<InvertibilityCert>> {
        let dual = self.dual(bound)?;
        let elems = self.elements();
        let mut labels = Vec::new();
        let mut vectors = Vec::new();
        for (i, g) in elems.iter().enumerate() {
            for (k, row) in dual.basis.rows().iter().enumerate() {
                let z = g * &row.elem;
                let Membership::Member(c) = self.order.membership(&z) else {
                    return Err(Error::Verification(format!("dual row {k} times generator {i} left A_f")));
                };
                labels.push((i, k));
                vectors.push(c);
            }
        }
        let field = self.order.quad().field();
        let Some(sol) = linalg::solve(field, &vectors, &[1]) else {
            return Ok(None);
        };
        let terms: Vec<(usize, usize, Elem)> =
            labels.iter().zip(&sol).filter(|(_, &c)| c != 0).map(|(&(i, k), &c)| (i, k, c)).collect();
        let cert = InvertibilityCert {
            bound,
            terms,
            dual_rows: dual.basis.rows().iter().map(|r| r.elem.clone()).collect(),
        };
        if !cert.verify(&elems) {
            return Err(Error::Verification("invertibility certificate does not sum to 1".into()));
        }
        Ok(Some(cert))
    }

    /// Find `h` with `(seed, h)` equal to the ideal, searching basis rows,
    /// then sums of two rows, then `row + c * row'`.
    pub fn two_generator(&self, seed: &QuadElem, bound: i64, policy: SlackPolicy) -> Result<(QuadElem, QuadElem)> {
        if self.denom.is_some() {
            return Err(Error::InvalidInput("two-generator search takes an integral ideal".into()));
        }
        if !self.contains(seed, bound.max(seed.deg_at_inf1()?), policy)?.is_certified() {
            return Err(Error::InvalidInput("seed is not in the ideal".into()));
        }
        let check = |h: &QuadElem| -> Result<bool> {
            let cand = IdealGens::new(&self.order, vec![seed.clone(), h.clone()])?;
            Ok(cand.equal(self, policy)?.is_certified())
        };
        if check(seed)? {
            return Ok((seed.clone(), seed.clone()));
        }
        let fb = self.filtered_basis(bound, policy)?;
        let rows: Vec<&QuadElem> = fb.rows().iter().map(|r| &r.elem).collect();
        for h in &rows {
            if check(h)? {
                return Ok((seed.clone(), (*h).clone()));
            }
        }
        let field = self.order.quad().field();
        for i in 0..rows.len() {
            for j in 0..i {
                for c in field.elements().skip(1) {
                    let h = rows[i] + &rows[j].scale(c);
                    if check(&h)? {
                        return Ok((seed.clone(), h));
                    }
                }
            }
        }
        Err(Error::SearchExhausted(format!("no second generator among combinations up to degree {bound}")))
    }
}

impl InvertibilityCert {
    /// Recompute `sum c g_i beta_k` exactly.
    pub fn verify(&self, gens: &[QuadElem]) -> bool {
        let Some(first) = gens.first() else { return false };
        let qd = first.desc();
        let mut s = qd.zero();
        for &(i, k, c) in &self.terms {
            s = &s + &(&gens[i] * &self.dual_rows[k]).scale(c);
        }
        s == qd.one()
    }
}

/// Coordinates of every element on the rows of `fb`.
pub fn contains_in_basis(fb: &FilteredBasis, elems: &[QuadElem]) -> Result<Containment> {
    let qd = fb.desc();
    let field = qd.field();
    let mut coords = Vec::new();
    for (idx, z) in elems.iter().enumerate() {
        let mut r = z.clone();
        let mut c = Vec::new();
        // rows have distinct degrees and sign 1: peel off the top degree
        while !r.is_zero() {
            let (deg, sgn) = r.deg_sgn_at_inf1()?;
            if deg > fb.bound() {
                return Err(Error::Undecidable { bound: fb.bound(), reason: format!("element {idx} has degree {deg}") });
            }
            let Some(k) = fb.rows().iter().position(|row| row.degree == deg) else {
                return Ok(Containment::Refused { index: idx, residual_degree: deg });
            };
            r = &r - &fb.rows()[k].elem.scale(sgn);
            c.push((k, sgn));
        }
        c.sort();
        coords.push(c);
    }
    let _ = field;
    Ok(Containment::Certified(ContainmentCert { bound: fb.bound(), coords }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::quad::QuadDesc;

    fn order(q: u32, a: &str, b: u32) -> OrderDesc {
        let f = Field::prime(q).unwrap();
        OrderDesc::new(QuadDesc::new(Poly::parse(&f, a).unwrap(), b).unwrap())
    }

    #[test]
    fn unit_ideal_basis_is_af_basis() {
        let o = order(3, "T^2 + 1", 1);
        let fb = IdealGens::unit(&o).filtered_basis(7, SlackPolicy::default()).unwrap();
        assert_eq!(fb.degrees(), vec![0, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn a1_basis_degrees() {
        let o = order(2, "T^2", 1);
        let a1 = IdealGens::a_i(&o, 1).unwrap();
        let fb = a1.filtered_basis(5, SlackPolicy::default()).unwrap();
        assert_eq!(fb.degrees(), vec![2, 3, 4, 5]);
        for r in fb.rows() {
            assert!(o.membership(&r.elem).is_member());
        }
    }

    #[test]
    fn a1_not_in_a0() {
        let o = order(2, "T^2", 1);
        let a0 = IdealGens::a_i(&o, 0).unwrap();
        let a1 = IdealGens::a_i(&o, 1).unwrap();
        let p = SlackPolicy::default();
        assert!(a1.contains(&o.quad().f(), 6, p).unwrap().is_certified());
        let ft = &o.quad().f() * &o.quad().t();
        assert!(!a0.contains(&ft, 6, p).unwrap().is_certified());
        assert!(!a1.equal(&a0, p).unwrap().is_certified());
        assert!(a1.equal(&a1, p).unwrap().is_certified());
    }

    #[test]
    fn power_law_small() {
        let p = SlackPolicy::default();
        for (q, a) in [(2, "T^2"), (2, "T^3 + T + 1"), (3, "T^2 + 2")] {
            let o = order(q, a, 1);
            let d = o.d();
            let top = IdealGens::a_i(&o, d - 1).unwrap();
            for i in 1..d {
                let lhs = IdealGens::a_i(&o, i).unwrap().product(&top);
                let rhs = IdealGens::a_i(&o, i - 1).unwrap();
                assert!(lhs.equal(&rhs, p).unwrap().is_certified(), "q={q} a={a} i={i}");
            }
            let f = IdealGens::principal(&o, o.quad().f()).unwrap();
            assert!(top.pow(d).equal(&f, p).unwrap().is_certified());
        }
    }

    #[test]
    fn dual_and_invertibility() {
        let o = order(2, "T^2", 1);
        let f = o.quad().f();
        let pf = IdealGens::principal(&o, f.clone()).unwrap();
        let dual = pf.dual(6).unwrap();
        let finv = f.inv().unwrap();
        assert!(contains_in_basis(&dual.basis, &[finv]).unwrap().is_certified());
        let a1 = IdealGens::a_i(&o, 1).unwrap();
        let cert = a1.invertibility_certificate(8).unwrap().expect("a_1 is invertible");
        assert!(cert.verify(&a1.elements()));
        let unit_dual = IdealGens::unit(&o).dual(6).unwrap();
        for b in o.af_basis(6) {
            assert!(contains_in_basis(&unit_dual.basis, &[b.elem]).unwrap().is_certified());
        }
        for row in a1.dual(6).unwrap().basis.rows() {
            for g in a1.gens() {
                assert!(o.membership(&(&row.elem * g)).is_member());
            }
        }
    }

    #[test]
    fn two_generators() {
        let p = SlackPolicy::default();
        let o = order(2, "T^3", 1);
        let a2 = IdealGens::a_i(&o, 2).unwrap();
        let (g, h) = a2.two_generator(&o.quad().f(), 8, p).unwrap();
        let pair = IdealGens::new(&o, vec![g, h]).unwrap();
        assert!(pair.equal(&a2, p).unwrap().is_certified());
        let pf = IdealGens::principal(&o, o.quad().f()).unwrap();
        let (g, h) = pf.two_generator(&o.quad().f(), 6, p).unwrap();
        assert_eq!(g, h);
    }
}
