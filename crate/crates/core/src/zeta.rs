//! Zeta sums `ζ_L(n) = Σ x^(-n)` over the sign-1 elements of a lattice.
//!
//! Elements of sign 1 and degree `D_k` are `r_k + v` with `r_k` the basis row
//! of that degree and `v` in the span `V_k` of the lower rows, so the sum
//! splits into one block per row.
//!
//! Two evaluations are provided. [`zeta_lattice_enumerate`] visits every
//! element of every block up to the ultrametric cutoff. [`zeta_lattice`]
//! closes each block with the subspace polynomial
//! `e_V(z) = z Π_{0≠v∈V} (1 - z/v)`:
//!
//! `Σ_{v∈V} 1/(r + t - v) = 1/(e_V(r) + e_V(t))`,
//!
//! whose `t^(m-1)` coefficient is `(-1)^(m-1) Σ_v (r - v)^(-m)`. The values
//! `e_V(r_j)` and coefficients of `e_V` are updated one row at a time by
//! `e_{V+<w>}(z) = e_V(z) - e_V(z)^q / e_V(w)^(q-1)`. Block `k` has
//! valuation at least `m D_k + Σ_{j<k} (q-1) q^j (D_k - D_j)`, which grows
//! exponentially in `k` and gives a rigorous cutoff.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Elem, Field};
use crate::lattice::FilteredBasis;
use crate::laurent::{inv_unit, mul_trunc, LaurentSeries};

/// A zeta value with the data needed to audit it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaValue {
    pub n: u64,
    pub lattice_id: String,
    /// Known to `n * deg_min + rel_prec` (absolute).
    pub value: LaurentSeries,
    /// Largest degree of an element that was summed.
    pub degree_cutoff: i64,
    pub rel_prec: i64,
}

const BIG: i64 = 1 << 40;

fn check_weight(n: u64, rel_prec: i64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("zeta weight must be positive".into()));
    }
    if rel_prec < 1 {
        return Err(Error::InvalidInput("zeta precision must be positive".into()));
    }
    Ok(())
}

/// Lower bound on the valuation of block `k`, saturating.
fn block_ord_bound(q: i64, m: i64, degs: &[i64], k: usize, dk: i64) -> i64 {
    let mut s = m.saturating_mul(dk);
    let mut qj: i64 = 1;
    for &dj in &degs[..k] {
        s = s.saturating_add((q - 1).saturating_mul(qj).saturating_mul(dk - dj));
        qj = qj.saturating_mul(q);
    }
    s
}

/// Number of leading blocks whose sum can reach valuation below `target`;
/// `None` when rows beyond the lattice bound could still matter.
fn blocks_needed(q: i64, m: i64, degs: &[i64], bound: i64, target: i64) -> Option<usize> {
    for (k, &dk) in degs.iter().enumerate() {
        if block_ord_bound(q, m, degs, k, dk) >= target {
            return Some(k);
        }
    }
    (block_ord_bound(q, m, degs, degs.len(), bound + 1) >= target).then_some(degs.len())
}

/// Whether `l` reaches far enough for [`zeta_lattice`] at this weight and precision.
pub fn lattice_sufficient(l: &FilteredBasis, n: u64, rel_prec: i64) -> bool {
    let degs = l.degrees();
    let Some(&dmin) = degs.first() else { return false };
    let q = l.desc().field().q() as i64;
    blocks_needed(q, n as i64, &degs, l.bound(), n as i64 * dmin + rel_prec).is_some()
}

/// `Σ_{c ∈ F_q^×} c^(-m)`: `-1` when `(q-1) | m`, else `0`.
pub fn unit_power_sum(field: &Field, m: u64) -> Elem {
    let mut s = 0;
    for c in field.elements().skip(1) {
        s = field.add(s, field.pow(field.inv(c).unwrap(), m));
    }
    s
}

/// `ζ_L(n)` to `rel_prec` coefficients via subspace polynomials.
pub fn zeta_lattice(l: &FilteredBasis, n: u64, rel_prec: i64) -> Result<ZetaValue> {
    check_weight(n, rel_prec)?;
    let field = l.desc().field().clone();
    let q = field.q() as i64;
    let m = n as i64;
    let degs = l.degrees();
    let Some(&dmin) = degs.first() else {
        return Err(Error::InvalidInput("empty lattice".into()));
    };
    let target = m * dmin + rel_prec;
    let used = blocks_needed(q, m, &degs, l.bound(), target).ok_or_else(|| {
        Error::InsufficientPrecision(format!("lattice bound {} is too small for weight {n}", l.bound()))
    })?;
    let imax = {
        let mut i = 0;
        let mut qi = q;
        while qi <= m - 1 {
            i += 1;
            qi = qi.saturating_mul(q);
        }
        i
    };
    let mut w = rel_prec + 8;
    loop {
        let value = subspace_sum(&field, l, used, m, imax, w, target)?;
        if value.prec() >= target {
            return Ok(ZetaValue {
                n,
                lattice_id: l.content_hash(),
                value: value.truncate(target),
                degree_cutoff: degs[..used].last().copied().unwrap_or(dmin),
                rel_prec,
            });
        }
        if w > 16 * rel_prec + 256 {
            return Err(Error::InsufficientPrecision(format!(
                "zeta weight {n}: working precision {w} still yields only {}",
                value.prec()
            )));
        }
        w *= 2;
    }
}

fn subspace_sum(
    field: &Field,
    l: &FilteredBasis,
    used: usize,
    m: i64,
    imax: usize,
    w: i64,
    target: i64,
) -> Result<LaurentSeries> {
    let rows = &l.rows()[..used];
    let mut es: Vec<LaurentSeries> =
        rows.iter().map(|r| r.elem.embed(crate::quad::Place::First, w - r.degree)).collect::<Result<_>>()?;
    // coefficients of t^(q^i), i = 1..=imax, of e_V(t); e_{0}(t) = t
    let mut betas: Vec<LaurentSeries> = vec![LaurentSeries::zero(field, BIG); imax];
    let mut total = LaurentSeries::zero(field, target);
    let q = field.q() as i64;
    for k in 0..used {
        let e = es[k].clone();
        let e_inv = e.inv()?;
        // G = 1 / (1 + e_V(t)/E) as a series in t, up to t^(m-1)
        let xs: Vec<(usize, LaurentSeries)> = std::iter::once((1usize, e_inv.clone()))
            .chain(betas.iter().enumerate().map(|(i, b)| ((q as usize).pow(i as u32 + 1), b * &e_inv)))
            .filter(|(deg, x)| *deg <= (m - 1) as usize && !(x.is_zero_to_precision() && x.prec() > BIG / 2))
            .collect();
        let mut g: Vec<LaurentSeries> = vec![LaurentSeries::one(field, BIG)];
        for j in 1..m as usize {
            let mut s = LaurentSeries::zero(field, BIG);
            for (deg, x) in &xs {
                if *deg <= j {
                    s = &s - &(x * &g[j - deg]);
                }
            }
            g.push(s.truncate_rel(w));
        }
        let mut block = &g[(m - 1) as usize] * &e_inv;
        if (m - 1) % 2 == 1 {
            block = -&block;
        }
        total = &total + &block;
        if k + 1 == used {
            break;
        }
        // c = E^-(q-1); e' = e - e^q c
        let c = e_inv.pow(q as u64 - 1).truncate_rel(w);
        for ej in es.iter_mut().skip(k + 1) {
            *ej = (&*ej - &(&ej.frobenius_rel(1, w) * &c)).truncate_rel(w);
        }
        for i in (0..imax).rev() {
            let prev = if i == 0 { LaurentSeries::one(field, BIG) } else { betas[i - 1].frobenius_rel(1, w) };
            betas[i] = (&betas[i] - &(&prev * &c)).truncate_rel(w);
        }
    }
    Ok(total)
}

/// `ζ_L(n)` by visiting every sign-1 element up to
/// `D_max = deg_min + ceil(rel_prec / n) - 1`; every omitted term has
/// valuation `>= n (D_max + 1)`.
pub fn zeta_lattice_enumerate(l: &FilteredBasis, n: u64, rel_prec: i64) -> Result<ZetaValue> {
    check_weight(n, rel_prec)?;
    let field = l.desc().field().clone();
    let m = n as i64;
    let degs = l.degrees();
    let Some(&dmin) = degs.first() else {
        return Err(Error::InvalidInput("empty lattice".into()));
    };
    let d_max = dmin + (rel_prec + m - 1) / m - 1;
    if l.bound() < d_max {
        return Err(Error::InsufficientPrecision(format!("lattice bound {} below cutoff {d_max}", l.bound())));
    }
    let target = m * dmin + rel_prec;
    let sers: Vec<LaurentSeries> = l
        .rows()
        .iter()
        .map(|r| r.elem.embed(crate::quad::Place::First, rel_prec - dmin + 1))
        .collect::<Result<_>>()?;
    let blocks: Vec<LaurentSeries> = (0..degs.len())
        .filter(|&k| degs[k] <= d_max)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| enumerate_block(&field, &sers, &degs, k, n, target))
        .collect();
    let mut total = LaurentSeries::zero(&field, target);
    for b in &blocks {
        total = &total + b;
    }
    Ok(ZetaValue { n, lattice_id: l.content_hash(), value: total, degree_cutoff: d_max, rel_prec })
}

/// `x^(-n)` for a unit `x = 1 + ...` given by `r` dense coefficients.
fn neg_power(field: &Field, x: &[Elem], n: u64, r: usize) -> Vec<Elem> {
    let y = inv_unit(field, x, r);
    let q = field.q() as u64;
    // n = q^s - 1: x^(-n) = x * (x^-1)^(q^s), and the q^s power only spreads coefficients
    let mut qs = q;
    while qs - 1 < n {
        qs *= q;
    }
    if qs - 1 == n {
        let mut z = vec![0; r];
        for (i, &c) in y.iter().enumerate() {
            if (i as u64) * qs >= r as u64 {
                break;
            }
            z[i * qs as usize] = c;
        }
        return mul_trunc(field, x, &z, r);
    }
    let mut acc: Option<Vec<Elem>> = None;
    let mut base = y;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => mul_trunc(field, &a, &base, r),
            });
        }
        k >>= 1;
        if k > 0 {
            base = mul_trunc(field, &base, &base, r);
        }
    }
    acc.unwrap()
}

fn enumerate_block(field: &Field, sers: &[LaurentSeries], degs: &[i64], k: usize, n: u64, target: i64) -> LaurentSeries {
    let dk = degs[k];
    let val = n as i64 * dk;
    let r = (target - val) as usize;
    // dense coefficients of u^(-dk) .. u^(-dk + r - 1)
    let dense = |s: &LaurentSeries| -> Vec<Elem> {
        (0..r as i64).map(|i| s.coeff(-dk + i).expect("row embedded deep enough")).collect()
    };
    let top = dense(&sers[k]);
    let lower: Vec<Vec<Elem>> = sers[..k].iter().map(dense).collect();
    let q = field.q() as usize;
    // split the highest digits across tasks, Gray code over the rest
    let mut split = 0;
    while split < k && q.pow(split as u32) < 64 {
        split += 1;
    }
    let low = k - split;
    let chunks = q.pow(split as u32);
    let sum = (0..chunks)
        .into_par_iter()
        .map(|h| {
            let mut x = top.clone();
            let mut hh = h;
            for j in low..k {
                let c = (hh % q) as Elem;
                hh /= q;
                if c != 0 {
                    for (xi, &li) in x.iter_mut().zip(&lower[j]) {
                        *xi = field.add(*xi, field.mul(c, li));
                    }
                }
            }
            let mut acc = neg_power(field, &x, n, r);
            let steps = q.pow(low as u32);
            for step in 1..steps {
                let mut t = 0;
                let mut s = step;
                while s % q == 0 {
                    s /= q;
                    t += 1;
                }
                for (xi, &li) in x.iter_mut().zip(&lower[t]) {
                    *xi = field.add(*xi, li);
                }
                let term = neg_power(field, &x, n, r);
                for (a, b) in acc.iter_mut().zip(term) {
                    *a = field.add(*a, b);
                }
            }
            acc
        })
        .reduce(|| vec![0; r], |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x = field.add(*x, y);
            }
            a
        });
    LaurentSeries::new(field, val, sum, target)
}

/// `E(m) = Σ_{0≠λ∈L} λ^(-m)`, which is `Σ_c c^(-m)` times `ζ_L(m)`.
pub fn power_sum(l: &FilteredBasis, m: u64, rel_prec: i64) -> Result<LaurentSeries> {
    let field = l.desc().field();
    let s = unit_power_sum(field, m);
    let z = zeta_lattice(l, m, rel_prec)?;
    Ok(if s == 0 { LaurentSeries::zero(field, z.value.prec()) } else { z.value.scale(s) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epsilon::epsilon_lattice;
    use crate::ideal::{IdealGens, SlackPolicy};
    use crate::order::OrderDesc;
    use crate::poly::Poly;
    use crate::quad::QuadDesc;

    fn desc(q: u32, a: &str, b: u32) -> QuadDesc {
        let f = Field::prime(q).unwrap();
        QuadDesc::new(Poly::parse(&f, a).unwrap(), b).unwrap()
    }

    #[test]
    fn subspace_matches_enumeration() {
        for (q, a, b) in [(2, "T^2", 1), (3, "T^2", 2), (2, "T^3 + T", 1)] {
            let k = desc(q, a, b);
            let o = OrderDesc::new(k.clone());
            let ideals = [IdealGens::unit(&o), IdealGens::a_i(&o, 1).unwrap()];
            for n in [q as u64 - 1, (q * q) as u64 - 1, 1, 2, 5] {
                let p = 10;
                let lat = epsilon_lattice(&k, 2, 0, 40).unwrap().basis;
                let fast = zeta_lattice(&lat, n, p).unwrap();
                let slow = zeta_lattice_enumerate(&lat, n, p).unwrap();
                assert_eq!(fast.value, slow.value, "q={q} a={a} n={n}");
                for i in &ideals {
                    let fb = i.filtered_basis(24, SlackPolicy::default()).unwrap();
                    let fast = zeta_lattice(&fb, n, p).unwrap();
                    let slow = zeta_lattice_enumerate(&fb, n, p).unwrap();
                    assert_eq!(fast.value, slow.value, "ideal q={q} a={a} n={n}");
                }
            }
        }
    }

    #[test]
    fn leading_term_is_smallest_row() {
        let k = desc(2, "T^2", 1);
        let lat = epsilon_lattice(&k, 1, 0, 30).unwrap().basis;
        let z = zeta_lattice(&lat, 1, 12).unwrap();
        let (ord, sgn) = z.value.ord_sgn().unwrap();
        assert_eq!((ord, sgn), (2, 1));
        assert_eq!(z.value.prec(), 2 + 12);
    }

    #[test]
    fn unit_power_sums() {
        let f = Field::prime(5).unwrap();
        for m in 1..20 {
            let expect = if m % 4 == 0 { f.neg(1) } else { 0 };
            assert_eq!(unit_power_sum(&f, m), expect);
        }
    }
}
