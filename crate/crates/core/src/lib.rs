pub mod drinfeld;
pub mod epsilon;
pub mod error;
pub mod field;
pub mod ideal;
pub mod lattice;
pub mod laurent;
pub mod linalg;
pub mod modinv;
pub mod order;
pub mod poly;
pub mod quad;
pub mod ratfn;
pub mod skew;
pub mod zeta;

pub use error::{Error, Result};
pub use field::{Elem, Field};
pub use laurent::{Comparison, LaurentSeries, NearestNorm};
pub use poly::Poly;
pub use ratfn::RatFn;
pub use quad::{Place, QSeq, QuadDesc, QuadElem};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/arithmetic.md")]
    mod arithmetic {}
    #[doc = include_str!("../../../book/src/quadratic.md")]
    mod quadratic {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/drinfeld.md")]
    mod drinfeld {}
}
