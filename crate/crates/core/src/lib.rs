//! Exact computations on ordered abelian groups presented inside Hahn
//! products: valuations, spines, pseudo-limits, best approximations,
//! defining schemes and stable-embeddedness verdicts.

pub mod arith;
pub mod catalogue;
pub mod chain;
pub mod classify;
pub mod cli;
pub mod formula;
pub mod group;
pub mod pair;
pub mod par;
pub mod pseudo;
pub mod rib;
pub mod verdict;
pub mod typedef;
pub mod valuation;
