//! Integer linear arithmetic: atoms, Fourier-Motzkin, DNF conditions and a
//! small polynomial positivity prover.

pub mod cond;
pub mod fm;
pub mod linear;
pub mod poly;

pub use cond::{Condition, Conj};
pub use linear::{CmpRel, LinAtom, LinTerm, Rel};
pub use poly::{Poly, PolyAtom};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("constraint system too large ({vars} variables, {atoms} atoms)")]
    TooLarge { vars: usize, atoms: usize },
    #[error("condition has too many disjuncts ({0})")]
    TooManyConjuncts(usize),
}
