//! Row echelon forms over F_q, pivoting on the highest nonzero index.
//!
//! Indices are degree slots, so the pivot of a row is the degree of the
//! element it represents and an echelon basis is automatically filtered by
//! degree.

use std::collections::BTreeMap;

use crate::field::{Elem, Field};

/// Fully reduced echelon basis: every row has a 1 at its pivot and zeros at
/// every other row's pivot, so the row set is canonical for the span.
#[derive(Debug, Clone)]
pub struct Echelon {
    field: Field,
    rows: BTreeMap<usize, Vec<Elem>>,
}

pub(crate) fn top(v: &[Elem]) -> Option<usize> {
    v.iter().rposition(|&c| c != 0)
}

fn axpy(f: &Field, y: &mut Vec<Elem>, c: Elem, x: &[Elem]) {
    if y.len() < x.len() {
        y.resize(x.len(), 0);
    }
    let nc = f.neg(c);
    for (yi, &xi) in y.iter_mut().zip(x) {
        if xi != 0 {
            *yi = f.add(*yi, f.mul(nc, xi));
        }
    }
}

impl Echelon {
    pub fn new(field: &Field) -> Echelon {
        Echelon { field: field.clone(), rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivots in ascending order.
    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// `(pivot, row)` in ascending pivot order.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &[Elem])> + '_ {
        self.rows.iter().map(|(&p, r)| (p, r.as_slice()))
    }

    pub fn row(&self, pivot: usize) -> Option<&[Elem]> {
        self.rows.get(&pivot).map(|r| r.as_slice())
    }

    /// Reduce `v` against the basis; returns the residual and the
    /// coefficients `(pivot, c)` with `v = residual + sum c * row`.
    pub fn reduce(&self, v: &[Elem]) -> (Vec<Elem>, Vec<(usize, Elem)>) {
        let f = &self.field;
        let mut r = v.to_vec();
        let mut coords = Vec::new();
        for (&p, row) in self.rows.iter().rev() {
            let c = r.get(p).copied().unwrap_or(0);
            if c != 0 {
                axpy(f, &mut r, c, row);
                coords.push((p, c));
            }
        }
        while r.last() == Some(&0) {
            r.pop();
        }
        coords.reverse();
        (r, coords)
    }

    /// Coordinates of `v` in the basis, if it lies in the span.
    pub fn coordinates(&self, v: &[Elem]) -> Option<Vec<(usize, Elem)>> {
        let (r, c) = self.reduce(v);
        r.is_empty().then_some(c)
    }

    pub fn contains(&self, v: &[Elem]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Insert a vector; returns its new pivot if it was independent.
    pub fn insert(&mut self, v: &[Elem]) -> Option<usize> {
        let f = self.field.clone();
        let (mut r, _) = self.reduce(v);
        let p = top(&r)?;
        let inv = f.inv(r[p]).unwrap();
        for c in r.iter_mut() {
            *c = f.mul(*c, inv);
        }
        for row in self.rows.values_mut() {
            let c = row.get(p).copied().unwrap_or(0);
            if c != 0 {
                axpy(&f, row, c, &r);
                while row.last() == Some(&0) {
                    row.pop();
                }
            }
        }
        self.rows.insert(p, r);
        Some(p)
    }

    /// Keep only rows with pivot `<= bound`.
    pub fn restrict(&self, bound: usize) -> Echelon {
        Echelon {
            field: self.field.clone(),
            rows: self.rows.range(..=bound).map(|(&p, r)| (p, r.clone())).collect(),
        }
    }

    pub fn same_span(&self, other: &Echelon) -> bool {
        self.rows == other.rows
    }
}

/// Basis of `{c : sum c_j v_j = 0}`, each kernel vector indexed like `vectors`.
pub fn kernel(field: &Field, vectors: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let n = vectors.len();
    let width = vectors.iter().map(|v| v.len()).max().unwrap_or(0);
    // augmented rows [v_j | e_j]; the e-part records the combination
    let mut ech = Echelon::new(field);
    let mut out = Vec::new();
    for (j, v) in vectors.iter().enumerate() {
        // place the tracked combination below the data so pivots fall in the data part
        let mut aug = vec![0; n + width];
        aug[j] = 1;
        for (i, &c) in v.iter().enumerate() {
            aug[n + i] = c;
        }
        let (r, _) = ech.reduce(&aug);
        if r.len() <= n {
            let mut k = r;
            k.resize(n, 0);
            out.push(k);
        } else {
            ech.insert(&aug);
        }
    }
    out
}

/// Some `c` with `sum c_j v_j = target`, if one exists.
pub fn solve(field: &Field, vectors: &[Vec<Elem>], target: &[Elem]) -> Option<Vec<Elem>> {
    let n = vectors.len();
    let width = vectors.iter().map(|v| v.len()).max().unwrap_or(0).max(target.len());
    let mut ech = Echelon::new(field);
    for (j, v) in vectors.iter().enumerate() {
        let mut aug = vec![0; n + width];
        aug[j] = 1;
        for (i, &c) in v.iter().enumerate() {
            aug[n + i] = c;
        }
        ech.insert(&aug);
    }
    let mut t = vec![0; n + width];
    for (i, &c) in target.iter().enumerate() {
        t[n + i] = c;
    }
    let (r, _) = ech.reduce(&t);
    if r.len() > n {
        return None;
    }
    // t - sum c_row row = r with data part zero; r's tracked part is -c
    let mut c: Vec<Elem> = r.iter().map(|&x| field.neg(x)).collect();
    c.resize(n, 0);
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn combine(f: &Field, vs: &[Vec<Elem>], c: &[Elem]) -> Vec<Elem> {
        let w = vs.iter().map(|v| v.len()).max().unwrap_or(0);
        let mut out = vec![0; w];
        for (v, &cj) in vs.iter().zip(c) {
            for (o, &x) in out.iter_mut().zip(v) {
                *o = f.add(*o, f.mul(cj, x));
            }
        }
        out
    }

    #[test]
    fn canonical_rows() {
        let f = Field::prime(3).unwrap();
        let mut a = Echelon::new(&f);
        a.insert(&[1, 2, 1]);
        a.insert(&[0, 1, 0]);
        let mut b = Echelon::new(&f);
        b.insert(&[2, 0, 2]);
        b.insert(&[1, 1, 1]);
        assert!(a.same_span(&b));
        assert_eq!(a.pivots().collect::<Vec<_>>(), vec![1, 2]);
        assert!(a.contains(&[2, 1, 2]));
        assert!(!a.contains(&[1, 0, 0]));
    }

    #[test]
    fn kernel_and_solve() {
        let f = Field::prime(5).unwrap();
        let vs = vec![vec![1, 2, 3], vec![0, 1, 4], vec![1, 3, 2], vec![0, 0, 0]];
        let ker = kernel(&f, &vs);
        assert_eq!(ker.len(), 2);
        for k in &ker {
            assert!(combine(&f, &vs, k).iter().all(|&x| x == 0));
            assert!(k.iter().any(|&x| x != 0));
        }
        let target = vec![4, 4, 1];
        let c = solve(&f, &vs, &target).unwrap();
        assert_eq!(combine(&f, &vs, &c), target);
        assert!(solve(&f, &[vec![1, 0]], &[0, 1]).is_none());
    }
}
