//! Exact-arithmetic intersection theory on three fibration families:
//! projective bundles over curves and surfaces and hyperquadric fibrations
//! over curves. Chern-class identities for bundles on these models are
//! computed as exact polynomials in named parameters, chained into
//! derivation scenarios, and closed out with integer-solution searches.

pub mod chern;
pub mod chow;
pub mod dioph;
pub mod parse;
pub mod poly;
pub mod ulrich;
pub mod rat;
pub mod scenario;

pub use chern::FormalBundle;
pub use chow::{ChowClass, ChowModel, DivSym, DivisorCombo, PairingTable};
pub use poly::{binom_poly, Param, PolyExpr};
pub use rat::{rat, ratq, Rat};
