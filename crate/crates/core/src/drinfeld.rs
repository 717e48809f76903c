//! Exponentials of lattices and the Drinfeld modules they uniformize.
//!
//! For a lattice `Λ`, `z / e_Λ(z) = 1 - Σ_{m>=1} E(m) z^m` with the power
//! sums `E(m) = Σ_{0≠λ} λ^(-m)`. Inverting gives `e_Λ(z) = Σ c_k z^(q^k)`,
//! and `e_Λ(g z) = ρ_g(e_Λ(z))` determines `ρ_g = Σ g_j τ^j` through
//! `c_k ι(g)^(q^k) = Σ_j g_j c_(k-j)^(q^j)`. Lattices are not rescaled by a
//! period, so every check here is homogeneous and residuals are measured
//! relative to the largest term they cancel.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::ideal::{IdealGens, SlackPolicy};
use crate::lattice::FilteredBasis;
use crate::laurent::LaurentSeries;
use crate::poly::Poly;
use crate::quad::{Place, QuadElem};
use crate::ratfn::RatFn;
use crate::skew::{left_ideal_generator, Coeff, SeriesSkew, SkewPoly};
use crate::zeta::{lattice_sufficient, power_sum};

/// Extra coefficients carried beyond the requested precision.
const GUARD_WORK: i64 = 8;
const EXACT: i64 = 1 << 40;

/// `e_Λ(z) = Σ_k c_k z^(q^k)` for `q^k <= z_bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpSeries {
    pub coeffs: Vec<LaurentSeries>,
    pub lattice_id: String,
    pub z_bound: u64,
    /// Requested coefficients per value.
    pub rel_prec: i64,
    /// Smallest number of coefficients actually carried by a `c_k`.
    pub achieved: i64,
    pub working_prec: i64,
}

/// `ρ_g` for one ring element.
#[derive(Debug, Clone, PartialEq)]
pub struct DrinfeldImage {
    pub g: QuadElem,
    pub rho: SeriesSkew,
}

/// Outcome of comparing `e(g z)` with `ρ_g(e(z))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residual {
    /// Every relative residual is at most `q^(-exponent)`.
    pub exponent: i64,
    pub threshold: i64,
}

impl Residual {
    pub fn passes(&self) -> bool {
        self.exponent >= self.threshold
    }
}

fn is_q_power(q: u64, mut n: u64) -> Option<u32> {
    let mut k = 0;
    while n % q == 0 && n > 1 {
        n /= q;
        k += 1;
    }
    (n == 1).then_some(k)
}

fn exp_at(l: &FilteredBasis, w: i64, z_bound: u64, top: u32) -> Result<Vec<LaurentSeries>> {
    let field = l.desc().field();
    let q = field.q() as u64;
    let sums: Vec<LaurentSeries> = (1..z_bound).map(|m| power_sum(l, m, w)).collect::<Result<_>>()?;
    // a_n is the coefficient of z^(n+1) in e(z)
    let mut a: Vec<LaurentSeries> = vec![LaurentSeries::one(field, EXACT)];
    for n in 1..z_bound as usize {
        let mut s = LaurentSeries::zero(field, EXACT);
        for m in 1..=n {
            s = &s + &(&sums[m - 1] * &a[n - m]);
        }
        if is_q_power(q, n as u64 + 1).is_none() && !s.is_zero_to_precision() {
            return Err(Error::Verification(format!("coefficient of z^{} does not vanish: {s}", n + 1)));
        }
        a.push(s);
    }
    Ok((0..=top).map(|k| a[q.pow(k) as usize - 1].clone()).collect())
}

fn min_known(cs: &[LaurentSeries]) -> i64 {
    cs.iter().map(|c| if c.is_zero_to_precision() { 0 } else { c.rel_prec() }).min().unwrap_or(0)
}

/// `e_Λ` with every `c_k` to `rel_prec` coefficients, from the power sums
/// `E(1..z_bound)`. The recursion cancels heavily, so the working
/// precision is doubled until the target is met or `l` is exhausted.
pub fn exp_from_lattice(l: &FilteredBasis, rel_prec: i64, z_bound: u64) -> Result<ExpSeries> {
    let q = l.desc().field().q() as u64;
    let top = is_q_power(q, z_bound)
        .ok_or_else(|| Error::InvalidInput(format!("z bound {z_bound} is not a power of {q}")))?;
    let mut w = rel_prec + GUARD_WORK;
    loop {
        if !(1..z_bound).all(|m| lattice_sufficient(l, m, w)) {
            return Err(Error::InsufficientPrecision(format!(
                "lattice bound {} cannot carry {w} coefficients",
                l.bound()
            )));
        }
        let coeffs = exp_at(l, w, z_bound, top)?;
        let achieved = min_known(&coeffs);
        if achieved >= rel_prec + GUARD_WORK {
            return Ok(ExpSeries { coeffs, lattice_id: l.content_hash(), z_bound, rel_prec, achieved, working_prec: w });
        }
        w *= 2;
    }
}

/// [`exp_from_lattice`] on an ideal, enlarging its filtered basis as the
/// working precision grows.
pub fn exp_from_ideal(ideal: &IdealGens, rel_prec: i64, z_bound: u64, policy: SlackPolicy) -> Result<ExpSeries> {
    let d = ideal.order().quad().d() as i64;
    let mut bound = ideal.max_gen_degree() + 2 * d;
    let cap = 64 * (rel_prec + GUARD_WORK) + 64 * d;
    loop {
        let l = ideal.filtered_basis(bound, policy)?;
        match exp_from_lattice(&l, rel_prec, z_bound) {
            Err(Error::InsufficientPrecision(_)) if bound < cap => bound += bound.max(d + 2),
            r => return r,
        }
    }
}

/// `ρ_g` from `e_Λ`; `g` must be nonconstant with `q^deg(g) <= z_bound`.
pub fn drinfeld_from_exp(e: &ExpSeries, g: &QuadElem) -> Result<DrinfeldImage> {
    let field = g.desc().field();
    let dg = g.deg_at_inf1()?;
    if dg <= 0 {
        return Err(Error::InvalidInput("g must be nonconstant".into()));
    }
    let dg = dg as usize;
    if dg >= e.coeffs.len() {
        return Err(Error::InvalidInput(format!("deg g = {dg} needs z bound at least q^{dg}")));
    }
    let iota = g.embed(Place::First, -(dg as i64) + e.rel_prec + 2 * GUARD_WORK)?;
    let c = &e.coeffs;
    let mut gs: Vec<LaurentSeries> = vec![iota.clone()];
    for k in 1..=dg {
        let mut rhs = &c[k] * &iota.frobenius(k as u32);
        for (j, gj) in gs.iter().enumerate() {
            rhs = &rhs - &(gj * &c[k - j].frobenius(j as u32));
        }
        gs.push(rhs);
    }
    let rho = SkewPoly::new(field, gs);
    if rho.degree() != Some(dg) {
        return Err(Error::InsufficientPrecision(format!("leading coefficient of ρ_g vanishes to precision (index {dg})")));
    }
    Ok(DrinfeldImage { g: g.clone(), rho })
}

/// `c_k ι(g)^(q^k) - Σ_j g_j c_(k-j)^(q^j)` for every available `k`,
/// together with the largest term entering each difference.
pub fn functional_terms<C: Coeff>(c: &[C], iota: &C, rho: &SkewPoly<C>) -> Vec<(C, Vec<C>)> {
    (0..c.len())
        .map(|k| {
            let lhs = c[k].mul(&iota.frob(k as u32));
            let mut terms = vec![lhs.clone()];
            let mut diff = lhs;
            for (j, gj) in rho.coeffs().iter().enumerate().take(k + 1) {
                let t = gj.mul(&c[k - j].frob(j as u32));
                diff = diff.sub(&t);
                terms.push(t);
            }
            (diff, terms)
        })
        .collect()
}

/// Largest relative residual of `e(g z) = ρ_g(e(z))` over `z^(q^k) <= z_bound`.
pub fn functional_eq_residual(e: &ExpSeries, img: &DrinfeldImage, guard: i64) -> Result<Residual> {
    let dg = img.rho.degree().unwrap_or(0);
    let iota = img.g.embed(Place::First, -(dg as i64) + e.rel_prec + 2 * GUARD_WORK)?;
    let mut worst = i64::MAX;
    for (diff, terms) in functional_terms(&e.coeffs, &iota, &img.rho) {
        let scale = terms.iter().filter(|t| !t.is_zero_to_precision()).map(|t| t.val()).min();
        let Some(scale) = scale else { continue };
        let at = if diff.is_zero_to_precision() { diff.prec() } else { diff.val() };
        worst = worst.min(at - scale);
    }
    Ok(Residual { exponent: worst, threshold: e.rel_prec - guard })
}

/// `ρ_g` with `g_1` multiplied by `1 + u`, a control that must fail.
pub fn perturbed(img: &DrinfeldImage) -> DrinfeldImage {
    let mut cs = img.rho.coeffs().to_vec();
    if cs.len() > 1 {
        let f = cs[1].field().clone();
        let one_plus_u = LaurentSeries::new(&f, 0, vec![1, 1], EXACT);
        cs[1] = &cs[1] * &one_plus_u;
    }
    DrinfeldImage { g: img.g.clone(), rho: SkewPoly::new(img.rho.field(), cs) }
}

/// `ρ_𝔞` and the images `X` with `ρ_𝔞 ρ_a = X ρ_𝔞`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarAction<C: Coeff> {
    pub rho_ideal: SkewPoly<C>,
    pub starred: Vec<SkewPoly<C>>,
}

/// `𝔞 ∗ ρ` on the given ring images; `ideal_images` are `ρ_α` for the
/// generators `α` of `𝔞`.
pub fn star_action<C: Coeff>(ring_images: &[SkewPoly<C>], ideal_images: &[SkewPoly<C>], min_known: i64) -> Result<StarAction<C>> {
    let rho_ideal = left_ideal_generator(ideal_images, min_known)?;
    let starred = ring_images
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (x, rem) = rho_ideal.mul(r).right_divmod(&rho_ideal)?;
            if !rem.is_zero() {
                return Err(Error::Verification(format!("ρ_𝔞 does not right-divide ρ_𝔞 ρ_a for image {i}")));
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    Ok(StarAction { rho_ideal, starred })
}

/// Coefficients `c_0..c_k_max` of the Carlitz exponential, from
/// `c_k (T^(q^k) - T) = c_(k-1)^q`.
pub fn carlitz_exp(field: &Field, k_max: usize) -> Vec<RatFn> {
    let t = Poly::t(field);
    let mut c = vec![RatFn::one(field)];
    for k in 1..=k_max {
        let den = &t.frobenius(k as u32) - &t;
        let prev = c[k - 1].frobenius(1);
        c.push(prev.div(&RatFn::from_poly(den)).expect("nonzero"));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::OrderDesc;
    use crate::quad::QuadDesc;
    use crate::skew::carlitz;

    #[test]
    fn carlitz_exponential_is_exact() {
        for q in [2, 3] {
            let f = Field::prime(q).unwrap();
            let c = carlitz_exp(&f, 4);
            let t = Poly::t(&f);
            for m in ["T", "T^2 + 1", "T^3 + T"] {
                let mp = Poly::parse(&f, m).unwrap();
                let rho = carlitz::<RatFn>(&mp).unwrap();
                let iota = RatFn::from_poly(mp.clone());
                for (diff, _) in functional_terms(&c, &iota, &rho) {
                    assert!(diff.is_zero(), "{m}");
                }
            }
            assert_eq!(c[1], RatFn::new(Poly::one(&f), &t.frobenius(1) - &t).unwrap());
        }
    }

    #[test]
    fn pipeline_q2_d2() {
        let f = Field::prime(2).unwrap();
        let k = QuadDesc::new(Poly::parse(&f, "T^2").unwrap(), 1).unwrap();
        let o = OrderDesc::new(k.clone());
        for i in 0..2 {
            let ideal = IdealGens::a_i(&o, i).unwrap();
            let e = exp_from_ideal(&ideal, 12, 16, SlackPolicy::default()).unwrap();
            assert_eq!((e.coeffs[0].val(), e.coeffs[0].coeffs()), (0, &[1][..]));
            let img = drinfeld_from_exp(&e, &k.f()).unwrap();
            assert_eq!(img.rho.degree(), Some(2));
            assert!(img.rho.coeff(0).compare(&k.f().embed(Place::First, 20).unwrap()).is_equal());
            let r = functional_eq_residual(&e, &img, 4).unwrap();
            assert!(r.passes(), "{r:?}");
            let bad = functional_eq_residual(&e, &perturbed(&img), 4).unwrap();
            assert!(!bad.passes(), "{bad:?}");
        }
    }

    #[test]
    fn carlitz_principal_star_is_trivial() {
        for q in [2, 3] {
            let f = Field::prime(q).unwrap();
            let p = |s: &str| Poly::parse(&f, s).unwrap();
            let rho_t = carlitz::<RatFn>(&p("T")).unwrap();
            let rho_t1 = carlitz::<RatFn>(&p("T + 1")).unwrap();
            for m in ["T^2 + 1", "T^3 + T + 1"] {
                let rho_m = carlitz::<RatFn>(&p(m)).unwrap();
                let sa = star_action(&[rho_t.clone(), rho_t1.clone()], std::slice::from_ref(&rho_m), 1).unwrap();
                assert_eq!(sa.rho_ideal, rho_m);
                assert_eq!(sa.starred, vec![rho_t.clone(), rho_t1.clone()]);
            }
            let one = star_action(&[rho_t.clone()], &[SkewPoly::one(&f)], 1).unwrap();
            assert_eq!((one.rho_ideal, one.starred), (SkewPoly::one(&f), vec![rho_t]));
        }
    }

    #[test]
    fn star_action_of_a1() {
        let f = Field::prime(2).unwrap();
        let k = QuadDesc::new(Poly::parse(&f, "T^2").unwrap(), 1).unwrap();
        let o = OrderDesc::new(k.clone());
        let e = exp_from_ideal(&IdealGens::unit(&o), 16, 32, SlackPolicy::default()).unwrap();
        let rho_f = drinfeld_from_exp(&e, &k.f()).unwrap().rho;
        let a1 = IdealGens::a_i(&o, 1).unwrap();
        let imgs: Vec<_> = a1.gens().iter().map(|g| drinfeld_from_exp(&e, g).unwrap().rho).collect();
        let sa = star_action(std::slice::from_ref(&rho_f), &imgs, 6).unwrap();
        assert_eq!(sa.rho_ideal.degree(), Some(1));
        assert_eq!(sa.rho_ideal.lc().unwrap().sgn().unwrap(), 1);
        let x = &sa.starred[0];
        assert_eq!(x.degree(), Some(2));
        assert!(x.coeff(0).compare(&rho_f.coeff(0)).is_equal());
        // a principal ideal acts trivially
        let sp = star_action(std::slice::from_ref(&rho_f), std::slice::from_ref(&rho_f), 6).unwrap();
        for j in 0..=2 {
            assert!(sp.starred[0].coeff(j).compare(&rho_f.coeff(j)).is_equal());
        }
    }
}
