//! The invariants `J` and `j` of lattices, the forms `g_ε`, `Δ_ε`, `j_ε`,
//! `J_ε` of approximation lattices, and the quantum invariant as the set of
//! limits of `j_ε(f)`.
//!
//! With `ζ₁ = ζ(q-1)`, `ζ₂ = ζ(q²-1)` and `c = (T^(q²) - T)/(T^q - T)^(q+1)`:
//! `J = ζ₂ / ζ₁^(q+1)` and `j = 1 / (1/(T^q - T) - c J)`. The two terms of
//! the denominator share their leading coefficient, so the working precision
//! is raised until `j` itself carries the requested number of coefficients.

use rayon::prelude::*;

use crate::epsilon::epsilon_lattice;
use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::ideal::{IdealGens, SlackPolicy};
use crate::lattice::FilteredBasis;
use crate::laurent::{Comparison, LaurentSeries};
use crate::linalg;
use crate::poly::Poly;
use crate::quad::{Place, QuadDesc};
use crate::ratfn::RatFn;
use crate::zeta::{lattice_sufficient, zeta_lattice, ZetaValue};

/// `J` and `j` of one lattice, each to `rel_prec` coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JInvariants {
    pub zeta1: ZetaValue,
    pub zeta2: ZetaValue,
    /// `ζ₂ / ζ₁^(q+1)`, without the factor `c`.
    pub big_j: LaurentSeries,
    pub j: LaurentSeries,
    pub rel_prec: i64,
    pub working_prec: i64,
    pub lattice_bound: i64,
}

/// `g_ε`, `Δ_ε`, `j_ε` and `J_ε` of `Λ_ε(f)`, `ε = q^(-(N d + l))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonForms {
    pub n: usize,
    pub l: usize,
    pub g: LaurentSeries,
    pub delta: LaurentSeries,
    /// `g^(q+1) / Δ`.
    pub j: LaurentSeries,
    /// `c ζ₂ / ζ₁^(q+1)`, factor included.
    pub big_j: LaurentSeries,
    /// `1 / (1/(T^q - T) - J_ε)`, the second expression for `j_ε`.
    pub j_alt: LaurentSeries,
    /// Agreement of `j` and `j_alt`.
    pub identity: Comparison,
    pub rel_prec: i64,
    pub working_prec: i64,
}

fn tq_minus_t(field: &Field, s: u32) -> Poly {
    let qs = (field.q() as usize).pow(s);
    &Poly::monomial(field, 1, qs) - &Poly::t(field)
}

/// `(T^(q²) - T) / (T^q - T)^(q+1)`, of valuation `q`.
pub fn c_factor(field: &Field) -> RatFn {
    let q = field.q() as u64;
    RatFn::new(tq_minus_t(field, 2), tq_minus_t(field, 1).pow(q + 1)).expect("nonzero")
}

/// `1 / (T^q - T)`.
pub fn inv_tq(field: &Field) -> RatFn {
    RatFn::new(Poly::one(field), tq_minus_t(field, 1)).expect("nonzero")
}

fn weights(field: &Field) -> (u64, u64) {
    let q = field.q() as u64;
    (q - 1, q * q - 1)
}

/// `(J, j)` from `ζ₁`, `ζ₂` with honest precision; errors if the
/// denominator of `j` vanishes to precision.
fn j_from_zetas(field: &Field, z1: &LaurentSeries, z2: &LaurentSeries) -> Result<(LaurentSeries, LaurentSeries)> {
    let q = field.q() as u64;
    let big_j = z2.div(&z1.pow(q + 1))?;
    let prec = big_j.prec() + q as i64 + 4;
    let c = LaurentSeries::from_ratfn(&c_factor(field), prec);
    let it = LaurentSeries::from_ratfn(&inv_tq(field), prec);
    let den = &it - &(&c * &big_j);
    let j = den.inv().map_err(|_| Error::InsufficientPrecision(format!("denominator of j vanishes below {}", den.prec())))?;
    Ok((big_j, j))
}

fn working_cap(rel_prec: i64) -> i64 {
    8 * rel_prec + 128
}

/// `J` and `j` of the lattice produced by `lattice(bound)`, raising the
/// bound until both zeta sums are covered and the working precision until
/// `j` has `rel_prec` coefficients.
pub fn j_invariants(
    field: &Field,
    lattice: impl Fn(i64) -> Result<FilteredBasis>,
    start_bound: i64,
    bound_step: i64,
    rel_prec: i64,
) -> Result<JInvariants> {
    if rel_prec < 1 {
        return Err(Error::InvalidInput("precision must be positive".into()));
    }
    let (n1, n2) = weights(field);
    let mut w = rel_prec + 8;
    let mut bound = start_bound;
    loop {
        let mut lat = lattice(bound)?;
        while !(lattice_sufficient(&lat, n1, w) && lattice_sufficient(&lat, n2, w)) {
            bound += bound_step;
            lat = lattice(bound)?;
        }
        let zeta1 = zeta_lattice(&lat, n1, w)?;
        let zeta2 = zeta_lattice(&lat, n2, w)?;
        match j_from_zetas(field, &zeta1.value, &zeta2.value) {
            Ok((big_j, j)) if j.rel_prec() >= rel_prec => {
                return Ok(JInvariants {
                    big_j: big_j.truncate_rel(rel_prec),
                    j: j.truncate_rel(rel_prec),
                    zeta1,
                    zeta2,
                    rel_prec,
                    working_prec: w,
                    lattice_bound: lat.bound(),
                });
            }
            Ok(_) | Err(Error::InsufficientPrecision(_)) => {}
            Err(e) => return Err(e),
        }
        if w >= working_cap(rel_prec) {
            return Err(Error::InsufficientPrecision(format!(
                "j did not reach {rel_prec} coefficients at working precision {w}"
            )));
        }
        w += rel_prec.max(8);
    }
}

/// `J(𝔞)` and `j(𝔞)` of an ideal of A_f.
pub fn j_of_ideal(ideal: &IdealGens, rel_prec: i64, policy: SlackPolicy) -> Result<JInvariants> {
    let qd = ideal.order().quad();
    let d = qd.d() as i64;
    j_invariants(
        qd.field(),
        |bound| ideal.filtered_basis(bound, policy),
        ideal.max_gen_degree() + 2 * d,
        d + 2,
        rel_prec,
    )
}

/// The four forms of `Λ_ε(f)` with both expressions for `j_ε`.
pub fn g_delta_j_eps(desc: &QuadDesc, n: usize, l: usize, rel_prec: i64) -> Result<EpsilonForms> {
    let field = desc.field();
    let d = desc.d() as i64;
    let q = field.q() as u64;
    let inv = j_invariants(
        field,
        |bound| Ok(epsilon_lattice(desc, n, l, bound)?.basis),
        (n as i64 + 2) * d + l as i64,
        d + 2,
        rel_prec,
    )?;
    let w = inv.working_prec;
    let (z1, z2) = (&inv.zeta1.value, &inv.zeta2.value);
    let prec1 = z1.prec() + q as i64 + 4;
    let prec2 = z2.prec() + (q * q) as i64 + 4;
    let tq = LaurentSeries::from_poly(&tq_minus_t(field, 1), prec1);
    let tq2 = LaurentSeries::from_poly(&tq_minus_t(field, 2), prec2);
    let g = -&(&tq * z1);
    let delta = &(&tq.pow(q) * &z1.pow(q + 1)) - &(&tq2 * z2);
    let j = g.pow(q + 1).div(&delta)?;
    let (big_j_raw, j_alt) = j_from_zetas(field, z1, z2)?;
    let c = LaurentSeries::from_ratfn(&c_factor(field), big_j_raw.prec() + q as i64 + 4);
    let big_j = &c * &big_j_raw;
    let identity = j.compare(&j_alt);
    Ok(EpsilonForms {
        n,
        l,
        g: g.truncate_rel(w),
        delta,
        j: j.truncate_rel(rel_prec.max(j.rel_prec().min(w))),
        big_j,
        j_alt,
        identity,
        rel_prec,
        working_prec: w,
    })
}

/// One branch `l` of the quantum invariant: `j_ε` for `N = n0, n0+1, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub l: usize,
    pub sequence: Vec<(usize, LaurentSeries)>,
    /// Limit to `rel_prec` coefficients once two consecutive `N` agree.
    pub limit: Option<LaurentSeries>,
    pub stabilized_at: Option<usize>,
    /// A third `N` was computed and agreed.
    pub confirmed: bool,
}

impl Branch {
    pub fn converged(&self) -> bool {
        self.limit.is_some()
    }
}

/// A limit value with the branches that reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitClass {
    pub value: LaurentSeries,
    pub branches: Vec<usize>,
}

impl LimitClass {
    pub fn multiplicity(&self) -> usize {
        self.branches.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumJResult {
    pub branches: Vec<Branch>,
    pub limit_set: Vec<LimitClass>,
    pub rel_prec: i64,
}

/// Whether two series agree on their first `p` coefficients.
pub fn agree(a: &LaurentSeries, b: &LaurentSeries, p: i64) -> bool {
    a.agrees_rel(b, p).is_equal() && a.val() == b.val()
}

fn run_branch(desc: &QuadDesc, l: usize, rel_prec: i64, n0: usize, n_max: usize) -> Result<Branch> {
    let mut seq: Vec<(usize, LaurentSeries)> = Vec::new();
    let mut candidate: Option<usize> = None;
    for n in n0..=n_max {
        let forms = g_delta_j_eps(desc, n, l, rel_prec)?;
        let jn = forms.j.truncate_rel(rel_prec);
        let agrees_prev = seq.last().is_some_and(|(_, prev)| agree(prev, &jn, rel_prec));
        seq.push((n, jn));
        match candidate {
            Some(s) if agrees_prev => {
                let limit = seq.last().unwrap().1.clone();
                return Ok(Branch { l, sequence: seq, limit: Some(limit), stabilized_at: Some(s), confirmed: true });
            }
            Some(_) => candidate = None,
            None if agrees_prev => candidate = Some(n - 1),
            None => {}
        }
    }
    // two agreeing values at the end of the budget, no room for a third
    if let Some(s) = candidate {
        let limit = seq.last().unwrap().1.clone();
        return Ok(Branch { l, sequence: seq, limit: Some(limit), stabilized_at: Some(s), confirmed: false });
    }
    Ok(Branch { l, sequence: seq, limit: None, stabilized_at: None, confirmed: false })
}

/// `j^qt(f)` as the set of branch limits, `N` running from 1 to `n_max`.
pub fn quantum_j(desc: &QuadDesc, rel_prec: i64, n_max: usize) -> Result<QuantumJResult> {
    if n_max < 3 {
        return Err(Error::InvalidInput("n_max must be at least 3".into()));
    }
    let d = desc.d();
    let branches: Vec<Branch> =
        (0..d).into_par_iter().map(|l| run_branch(desc, l, rel_prec, 1, n_max)).collect::<Result<_>>()?;
    if branches.iter().all(|b| !b.converged()) {
        return Err(Error::NonConvergence { n_max });
    }
    let mut limit_set: Vec<LimitClass> = Vec::new();
    for b in &branches {
        let Some(v) = &b.limit else { continue };
        match limit_set.iter_mut().find(|c| agree(&c.value, v, rel_prec)) {
            Some(c) => c.branches.push(b.l),
            None => limit_set.push(LimitClass { value: v.clone(), branches: vec![b.l] }),
        }
    }
    Ok(QuantumJResult { branches, limit_set, rel_prec })
}

/// Both sides of the product identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductCheck {
    /// Product of the `d` branch limits.
    pub branch_product: LaurentSeries,
    /// `Π_{i<d} j(𝔞_i)`.
    pub ideal_product: LaurentSeries,
    pub agreement: Comparison,
}

pub fn product_of(values: &[LaurentSeries], rel_prec: i64) -> LaurentSeries {
    let mut it = values.iter();
    let first = it.next().expect("nonempty").clone();
    it.fold(first, |acc, v| (&acc * v).truncate_rel(rel_prec)).truncate_rel(rel_prec)
}

/// Compare the product of branch limits with the product of `j(𝔞_i)`.
pub fn quantum_product(qj: &QuantumJResult, ideal_js: &[LaurentSeries]) -> Result<ProductCheck> {
    let limits: Vec<LaurentSeries> = qj
        .branches
        .iter()
        .map(|b| b.limit.clone().ok_or(Error::NonConvergence { n_max: b.sequence.last().map_or(0, |s| s.0) }))
        .collect::<Result<_>>()?;
    let branch_product = product_of(&limits, qj.rel_prec);
    let ideal_product = product_of(ideal_js, qj.rel_prec);
    let agreement = branch_product.agrees_rel(&ideal_product, qj.rel_prec);
    Ok(ProductCheck { branch_product, ideal_product, agreement })
}

/// `j(𝔞_i)` for `i = 0..d`.
pub fn ideal_js(desc: &QuadDesc, rel_prec: i64, policy: SlackPolicy) -> Result<Vec<JInvariants>> {
    let order = crate::order::OrderDesc::new(desc.clone());
    (0..desc.d())
        .into_par_iter()
        .map(|i| j_of_ideal(&IdealGens::a_i(&order, i)?, rel_prec, policy))
        .collect()
}

/// Multiset equality to `rel_prec` coefficients.
pub fn multiset_agree(a: &[LaurentSeries], b: &[LaurentSeries], rel_prec: i64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let hit = (0..b.len()).find(|&i| !used[i] && agree(x, &b[i], rel_prec));
        hit.map(|i| used[i] = true).is_some()
    })
}

/// A candidate `s = x + y f` consistent to a stated precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicCandidate {
    pub x: RatFn,
    pub y: RatFn,
    pub consistent_to: i64,
}

/// Search for `p0, p1, q0` of degree `<= height` with
/// `s q0 - p0 - p1 ι₁(f) = 0` to the precision of `s`; the solution of
/// least degree is returned when `q0 ≠ 0`.
pub fn recognize_algebraic(s: &LaurentSeries, desc: &QuadDesc, height: usize) -> Result<Option<AlgebraicCandidate>> {
    let field = desc.field();
    let d = desc.d() as i64;
    let h = height as i64;
    if s.is_zero_to_precision() {
        return Err(Error::InsufficientPrecision("series is zero to precision".into()));
    }
    // coefficients of u^e for e from lo to s.prec() - h - 1 are fully determined
    let lo = (s.val() - h).min(-h - d);
    let hi = s.prec() - h;
    let unknowns = 3 * (height + 1);
    if (hi - lo) < unknowns as i64 + d || s.rel_prec() < 3 * h + d {
        return Err(Error::InsufficientPrecision(format!(
            "{} coefficients cannot determine {unknowns} unknowns",
            hi - lo
        )));
    }
    let fser = desc.embed(Place::First, (hi + h).max(2 * d + 1))?;
    let col = |x: &LaurentSeries| -> Vec<Elem> { (lo..hi).map(|e| x.coeff(e).unwrap_or(0)).collect() };
    // unknown index 3k + {0: q0, 1: p0, 2: p1} for the T^k coefficient
    let mut vectors = Vec::with_capacity(unknowns);
    for k in 0..=h {
        vectors.push(col(&s.shift(-k)));
        vectors.push(col(&LaurentSeries::monomial(field, field.neg(1), -k, hi)));
        vectors.push(col(&fser.shift(-k).scale(field.neg(1))));
    }
    let kernel = linalg::kernel(field, &vectors);
    let mut ech = linalg::Echelon::new(field);
    for v in &kernel {
        ech.insert(v);
    }
    for (_, row) in ech.rows() {
        let part = |which: usize| {
            let c: Vec<Elem> = (0..=height).map(|k| row.get(3 * k + which).copied().unwrap_or(0)).collect();
            Poly::from_coeffs(field, c)
        };
        let (q0, p0, p1) = (part(0), part(1), part(2));
        if q0.is_zero() {
            continue;
        }
        return Ok(Some(AlgebraicCandidate {
            x: RatFn::new(p0, q0.clone())?,
            y: RatFn::new(p1, q0)?,
            consistent_to: hi,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::OrderDesc;

    fn desc(q: u32, a: &str, b: u32) -> QuadDesc {
        let f = Field::prime(q).unwrap();
        QuadDesc::new(Poly::parse(&f, a).unwrap(), b).unwrap()
    }

    #[test]
    fn two_expressions_for_j_eps() {
        let k = desc(2, "T^2", 1);
        for l in 0..2 {
            let forms = g_delta_j_eps(&k, 2, l, 12).unwrap();
            match forms.identity {
                Comparison::Equal { prec } => assert!(prec - forms.j.val() >= 12),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn unit_ideal_differs_from_a1() {
        let k = desc(2, "T^2", 1);
        let o = OrderDesc::new(k.clone());
        let p = SlackPolicy::default();
        let j1 = j_of_ideal(&IdealGens::unit(&o), 12, p).unwrap();
        let ja = j_of_ideal(&IdealGens::a_i(&o, 1).unwrap(), 12, p).unwrap();
        assert!(!agree(&j1.j, &ja.j, 12));
    }

    #[test]
    fn recognize_exact_inputs() {
        let k = desc(2, "T^2", 1);
        let f1 = k.embed(Place::First, 30).unwrap();
        let c = recognize_algebraic(&f1, &k, 2).unwrap().unwrap();
        assert_eq!((c.x.clone(), c.y.clone()), (RatFn::zero(k.field()), RatFn::one(k.field())));
        let t = Poly::t(k.field());
        let z = k.elem(RatFn::one(k.field()), RatFn::new(Poly::one(k.field()), t).unwrap());
        let s = z.embed(Place::First, 30).unwrap();
        let c = recognize_algebraic(&s, &k, 2).unwrap().unwrap();
        assert_eq!(k.elem(c.x, c.y), z);
    }
}
