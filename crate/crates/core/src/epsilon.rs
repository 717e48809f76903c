//! Diophantine approximation lattices `Λ_ε(f) = {c ∈ F_q[T] : ||c f|| < ε}`
//! for `ε = q^(-k)`, `k = N d + l`, `0 <= l < d`.

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::lattice::{BasisRow, FilteredBasis};
use crate::laurent::LaurentSeries;
use crate::linalg::{self, Echelon};
use crate::poly::Poly;
use crate::quad::{Place, QuadDesc};

/// `Λ_ε(f)` for `ε = q^(-(N d + l))`, truncated at a degree bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonLattice {
    pub n: usize,
    pub l: usize,
    pub basis: FilteredBasis,
}

impl EpsilonLattice {
    /// `-log_q ε`.
    pub fn eps_exp(&self) -> usize {
        self.n * self.basis.desc().d() + self.l
    }
}

fn canonical(desc: &QuadDesc, bound: i64, vectors: impl IntoIterator<Item = Vec<Elem>>) -> FilteredBasis {
    let field = desc.field();
    let mut ech = Echelon::new(field);
    for v in vectors {
        ech.insert(&v);
    }
    let rows = ech
        .rows()
        .filter(|(p, _)| *p as i64 <= bound)
        .map(|(p, r)| BasisRow { elem: desc.from_poly(Poly::from_coeffs(field, r.to_vec())), degree: p as i64 })
        .collect();
    FilteredBasis::from_rows(desc, bound, rows, 0)
}

/// Closed form: `T^m Q_N` for `m <= d - 1 - l`, then `T^m Q_k` for all
/// `k > N`, `m < d`; these have distinct degrees `k d + m`.
pub fn epsilon_lattice(desc: &QuadDesc, n: usize, l: usize, bound: i64) -> Result<EpsilonLattice> {
    let d = desc.d();
    if l >= d {
        return Err(Error::InvalidInput(format!("l = {l} must be below d = {d}")));
    }
    let k_max = if bound < 0 { 0 } else { bound as usize / d + 1 };
    let qs = desc.qseq(k_max.max(n));
    let mut gens = Vec::new();
    for k in n..=k_max.max(n) {
        let m_top = if k == n { d - 1 - l } else { d - 1 };
        for m in 0..=m_top {
            let g = qs.get(k).shift(m);
            if g.deg() <= bound {
                gens.push(g.coeffs().to_vec());
            }
        }
    }
    Ok(EpsilonLattice { n, l, basis: canonical(desc, bound, gens) })
}

/// `c ↦` the coefficients of `u^1 .. u^k` in `c ι₁(f)`, for `c = T^j`,
/// `j = 0..=bound`. Its kernel is `Λ_{q^-k}` up to `bound`.
fn fractional_map(desc: &QuadDesc, eps_exp: usize, bound: usize) -> Result<Vec<Vec<Elem>>> {
    let prec = (bound + eps_exp + 1) as i64;
    let f = desc.embed(Place::First, prec.max(2 * desc.d() as i64 + 1))?;
    Ok((0..=bound)
        .map(|j| {
            let s: LaurentSeries = f.shift(-(j as i64));
            (1..=eps_exp as i64).map(|e| s.coeff(e).expect("within precision")).collect()
        })
        .collect())
}

/// Every polynomial of degree `<= bound` with `||c ι₁(f)|| < q^(-eps_exp)`,
/// found by enumerating all `q^(bound+1)` candidates and row reducing them.
pub fn epsilon_lattice_bruteforce(desc: &QuadDesc, eps_exp: usize, bound: usize) -> Result<FilteredBasis> {
    let field = desc.field();
    let q = field.q() as u64;
    let count = q.checked_pow(bound as u32 + 1).filter(|&c| c <= 1 << 24).ok_or_else(|| {
        Error::InvalidInput(format!("{q}^{} candidates is beyond the enumeration cap", bound + 1))
    })?;
    let cols = fractional_map(desc, eps_exp, bound)?;
    let mut members = Vec::new();
    let mut digits = vec![0u64; bound + 1];
    for _ in 0..count {
        let c: Vec<Elem> = digits.iter().map(|&x| x as Elem).collect();
        let mut frac = vec![0; eps_exp];
        for (cj, col) in c.iter().zip(&cols) {
            if *cj != 0 {
                for (o, &x) in frac.iter_mut().zip(col) {
                    *o = field.add(*o, field.mul(*cj, x));
                }
            }
        }
        if frac.iter().all(|&x| x == 0) {
            members.push(c);
        }
        for dgt in digits.iter_mut() {
            *dgt += 1;
            if *dgt < q {
                break;
            }
            *dgt = 0;
        }
    }
    Ok(canonical(desc, bound as i64, members))
}

/// Same set as [`epsilon_lattice_bruteforce`], obtained as the kernel of the
/// fractional-part map instead of by enumeration.
pub fn epsilon_lattice_kernel(desc: &QuadDesc, eps_exp: usize, bound: usize) -> Result<FilteredBasis> {
    let cols = fractional_map(desc, eps_exp, bound)?;
    Ok(canonical(desc, bound as i64, linalg::kernel(desc.field(), &cols)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::laurent::NearestNorm;

    fn desc(q: u32, a: &str, b: u32) -> QuadDesc {
        let f = Field::prime(q).unwrap();
        QuadDesc::new(Poly::parse(&f, a).unwrap(), b).unwrap()
    }

    #[test]
    fn small_example() {
        let k = desc(2, "T^2", 1);
        let e = epsilon_lattice(&k, 1, 0, 4).unwrap();
        let lits: Vec<String> = e.basis.rows().iter().map(|r| r.elem.x().to_string()).collect();
        assert_eq!(e.basis.degrees(), vec![2, 3, 4]);
        let expect: Vec<String> = ["T^2", "T^3", "T^4 + 1"]
            .iter()
            .map(|s| Poly::parse(k.field(), s).unwrap().to_string())
            .collect();
        assert_eq!(lits, expect);
        assert_eq!(epsilon_lattice_bruteforce(&k, 2, 4).unwrap(), e.basis);
    }

    #[test]
    fn q_n_is_a_good_approximation() {
        let k = desc(3, "T^2 + 1", 2);
        let f1 = k.embed(Place::First, 40).unwrap();
        let qs = k.qseq(6);
        for n in 0..6 {
            let e = epsilon_lattice(&k, n, 0, 20).unwrap();
            let fb = &e.basis;
            assert!(fb.rows().iter().any(|r| r.elem.x() == &crate::ratfn::RatFn::from_poly(qs.get(n).monic())));
            let s = &LaurentSeries::from_poly(qs.get(n), 40) * &f1;
            assert_eq!(s.nearest_poly_norm().unwrap(), NearestNorm::Pow(((n + 1) * 2) as i64));
        }
        // ||f|| = q^-d is not < q^-d
        let one_out = epsilon_lattice_kernel(&k, 2, 3).unwrap();
        assert!(one_out.rows().iter().all(|r| r.degree > 0));
    }

    #[test]
    fn kernel_matches_enumeration() {
        for (q, a) in [(2, "T^3 + T"), (3, "T^2 + 2*T")] {
            let k = desc(q, a, 1);
            for eps in 1..6 {
                for bound in 0..7 {
                    assert_eq!(
                        epsilon_lattice_bruteforce(&k, eps, bound).unwrap(),
                        epsilon_lattice_kernel(&k, eps, bound).unwrap()
                    );
                }
            }
        }
    }
}
