//! QCTL model checking by reduction to quantified Boolean formulas.

pub mod benchgen;
pub mod corpus;
pub mod kripke;
pub mod oracle;
pub mod par;
pub mod qbf;
pub mod qctl;
pub mod reduce;
pub mod sml;
pub mod solverio;
