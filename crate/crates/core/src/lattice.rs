//! Degree-filtered bases of discrete F_q-lattices in K.

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::field::Elem;
use crate::laurent::LaurentSeries;
use crate::quad::{Place, QuadDesc, QuadElem};

/// One basis row: an element of sign 1 and its degree at the first place.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisRow {
    pub elem: QuadElem,
    pub degree: i64,
}

/// Row-reduced basis of the lattice elements of degree `<= bound`.
///
/// Rows have strictly increasing degrees and sign 1, and are canonical for
/// the lattice: two lattices agree up to `bound` iff their rows are equal.
#[derive(Debug, Clone)]
pub struct FilteredBasis {
    desc: QuadDesc,
    bound: i64,
    rows: Vec<BasisRow>,
    slack_used: usize,
}

impl PartialEq for FilteredBasis {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc && self.bound == other.bound && self.rows == other.rows
    }
}

impl Eq for FilteredBasis {}

impl FilteredBasis {
    /// Rows must already be canonical, sign 1 and strictly increasing in degree.
    pub(crate) fn from_rows(desc: &QuadDesc, bound: i64, rows: Vec<BasisRow>, slack_used: usize) -> FilteredBasis {
        debug_assert!(rows.windows(2).all(|w| w[0].degree < w[1].degree));
        debug_assert!(rows.iter().all(|r| r.degree <= bound));
        FilteredBasis { desc: desc.clone(), bound, rows, slack_used }
    }

    pub fn desc(&self) -> &QuadDesc {
        &self.desc
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn rows(&self) -> &[BasisRow] {
        &self.rows
    }

    pub fn slack_used(&self) -> usize {
        self.slack_used
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.rows.iter().map(|r| r.degree).collect()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.rows.first().map(|r| r.degree)
    }

    /// Rows of degree `<= bound`.
    pub fn restrict(&self, bound: i64) -> FilteredBasis {
        let rows = self.rows.iter().filter(|r| r.degree <= bound).cloned().collect();
        FilteredBasis { desc: self.desc.clone(), bound: bound.min(self.bound), rows, slack_used: self.slack_used }
    }

    /// Rows scaled by a sign-1 element `alpha` of degree `deg_alpha`.
    pub fn scaled(&self, alpha: &QuadElem, deg_alpha: i64) -> FilteredBasis {
        let rows = self
            .rows
            .iter()
            .map(|r| BasisRow { elem: &r.elem * alpha, degree: r.degree + deg_alpha })
            .collect();
        FilteredBasis { desc: self.desc.clone(), bound: self.bound + deg_alpha, rows, slack_used: self.slack_used }
    }

    /// Images of the rows at the first place, each to `rel` coefficients.
    pub fn embeddings(&self, rel: i64) -> Result<Vec<LaurentSeries>> {
        self.rows.iter().map(|r| r.elem.embed(Place::First, rel - r.degree)).collect()
    }

    /// Combination `sum c_i row_i`.
    pub fn combine(&self, coeffs: &[(usize, Elem)]) -> QuadElem {
        let mut z = self.desc.zero();
        for &(i, c) in coeffs {
            z = &z + &self.rows[i].elem.scale(c);
        }
        z
    }

    /// SHA-256 over the canonical text of the rows.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{:?};bound={};", self.desc, self.bound).as_bytes());
        for r in &self.rows {
            h.update(format!("{}:{}|{};", r.degree, r.elem.x(), r.elem.y()).as_bytes());
        }
        hex::encode(h.finalize())
    }
}
