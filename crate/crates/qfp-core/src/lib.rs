//! Exact structure theory and circle-method diagnostics for integer
//! quadratic forms evaluated at prime-power points.
//!
//! The crate studies symmetric integer matrices `A` through the lens of
//! their *off-diagonal rank* — the largest rank of a submatrix `A[I, J]`
//! with `I` and `J` disjoint nonempty index sets — and provides, for the
//! small off-diagonal ranks where the theory is sharpest:
//!
//! * exact computation of the off-diagonal rank with witness index sets
//!   ([`offdiag`]),
//! * canonical block decompositions of matrices of off-diagonal rank one
//!   and two, their case classification, seeded generators for each shape,
//!   and quintuple-of-indices selections used by the counting arguments
//!   ([`decomp`]),
//! * local arithmetic: unit-restricted exponential sums over residue rings,
//!   their multiplicative assembly, truncated singular series, and local
//!   solution densities ([`singular`]),
//! * global counting: von Mangoldt–weighted solution counts in boxes,
//!   bilinear system counts, paired-count inequalities, and growth-exponent
//!   fits ([`counting`]),
//! * Farey-dissection arc families, representation-number histograms, and
//!   exact major/minor-arc splits of the counting integral ([`arcs`]),
//! * a self-verification harness exercising all of the above against
//!   independent oracles ([`verify`]).
//!
//! Everything numeric here is either exact (arbitrary-precision integers
//! and rationals — see [`Rational`], [`IntMatrix`], [`RationalMatrix`]) or
//! explicitly floating-point (`f64`/[`Complex64`]) with documented error
//! expectations. Randomized pieces take explicit seeds and are
//! deterministic; parallel pieces reduce in a fixed order so results are
//! reproducible bit-for-bit across thread counts.

pub mod arcs;
pub mod counting;
pub mod decomp;
pub mod error;
pub mod mangoldt;
pub mod matrix;
pub mod offdiag;
pub mod singular;
pub mod verify;

pub use error::{Error, Rank2Case, Result};
pub use matrix::{
    conjugate_by_permutation, parse_general_rational, parse_rational, IndexPermutation, Matrix,
    SymmetricIntMatrix,
};

/// Exact arbitrary-precision rational scalar used throughout.
pub type Rational = num_rational::BigRational;
/// Dense matrix over [`Rational`].
pub type RationalMatrix = Matrix<Rational>;
/// Dense matrix over arbitrary-precision integers.
pub type IntMatrix = Matrix<num_bigint::BigInt>;
/// Complex double-precision scalar for exponential sums and integrals.
pub type Complex64 = num_complex::Complex<f64>;

/// An instance of the central counting problem: the form `A` and target `t`
/// in `x^T A x = t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub a: SymmetricIntMatrix,
    pub t: i64,
}

impl ProblemInstance {
    pub fn new(a: SymmetricIntMatrix, t: i64) -> Self {
        ProblemInstance { a, t }
    }
}

/// Iteration budget guarding every enumeration the crate performs.
///
/// The budget counts *innermost loop iterations* (leaves of an enumeration
/// tree, or table slots, whichever dominates). Operations estimate their
/// cost up front and refuse to start when the estimate exceeds the budget,
/// so a typo like `X = 10^9` fails fast instead of hanging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    max_iterations: u64,
}

impl Budget {
    pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000_000;

    pub fn new(max_iterations: u64) -> Self {
        Budget { max_iterations }
    }

    pub fn max_iterations(&self) -> u64 {
        self.max_iterations
    }

    /// Errors unless `needed` iterations fit in the budget.
    pub fn admit(&self, needed: u128) -> Result<()> {
        if needed > self.max_iterations as u128 {
            Err(Error::BudgetExceeded {
                needed,
                budget: self.max_iterations,
            })
        } else {
            Ok(())
        }
    }

    /// Variant for modulus-indexed enumerations with a dedicated error.
    pub fn admit_modulus(&self, modulus: u64, needed: u128) -> Result<()> {
        if needed > self.max_iterations as u128 {
            Err(Error::ModulusTooLarge {
                modulus,
                needed,
                budget: self.max_iterations,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_MAX_ITERATIONS)
    }
}
