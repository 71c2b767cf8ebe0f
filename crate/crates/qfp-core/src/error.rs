//! Error taxonomy shared by every module in the crate.
//!
//! The enum is deliberately flat: callers (in particular the CLI) match on it
//! to produce structured diagnostics, and tests assert on specific variants.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// The three structural cases a matrix of off-diagonal rank two can fall
/// into, keyed by the ranks of the two column-split blocks of the witness
/// placement: (1,1), (2,1) (after orientation), or (2,2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Rank2Case {
    Case11,
    Case21,
    Case22,
}

impl std::fmt::Display for Rank2Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rank2Case::Case11 => write!(f, "case-1-1"),
            Rank2Case::Case21 => write!(f, "case-2-1"),
            Rank2Case::Case22 => write!(f, "case-2-2"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Input text or JSON could not be parsed into a matrix at all.
    #[error("matrix parse error: {message}")]
    ParseMatrix { message: String },

    /// A symmetric matrix was required but entry (i, j) differs from (j, i).
    /// Indices are 0-based and name the first offending pair in row-major
    /// scan order.
    #[error("matrix is not symmetric: entry ({i},{j}) = {aij} but ({j},{i}) = {aji}")]
    NotSymmetric {
        i: usize,
        j: usize,
        aij: String,
        aji: String,
    },

    /// Shapes do not line up for the requested operation.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// A square linear system had no unique solution.
    #[error("linear system has no unique solution")]
    NoUniqueSolution,

    /// An index permutation was requested that is not a bijection on 0..n.
    #[error("invalid permutation of 0..{n}: {message}")]
    InvalidPermutation { n: usize, message: String },

    /// Off-diagonal rank is undefined: no pair of disjoint nonempty index
    /// sets exists (n < 2).
    #[error("off-diagonal rank undefined for a {n}x{n} matrix; need n >= 2")]
    NoOffDiagonalSubmatrix { n: usize },

    /// A rank-1 structure decomposition was requested but the off-diagonal
    /// rank is different.
    #[error("matrix has off-diagonal rank {found}, expected 1")]
    NotOffDiagRank1 { found: usize },

    /// A rank-2 structure operation was requested but the off-diagonal rank
    /// is different.
    #[error("matrix has off-diagonal rank {found}, expected 2")]
    NotOffDiagRank2 { found: usize },

    /// A case-specific decomposer was handed a tag for a different case.
    #[error("case mismatch: decomposer for {expected} given tag {found}")]
    CaseMismatch {
        expected: Rank2Case,
        found: Rank2Case,
    },

    /// An internal structural invariant failed. Reaching this indicates a
    /// bug or a hand-forged inconsistent input (e.g. a tag that does not
    /// belong to the matrix it is used with).
    #[error("internal inconsistency: {context}")]
    InternalInconsistency { context: String },

    /// Assembling a form produced a non-integer entry at (i, j).
    #[error("assembled matrix entry ({i},{j}) = {value} is not an integer")]
    NonIntegralAssembly { i: usize, j: usize, value: String },

    /// No admissible quintuple of indices exists for the given form.
    #[error("no admissible quintuple: {reason}")]
    NoQuintuple { reason: String },

    /// Exponential-sum numerator a must be coprime to the modulus q.
    #[error("a = {a} is not coprime to q = {q}")]
    NotCoprime { a: u64, q: u64 },

    /// A modulus-like argument is structurally unusable: zero, composite
    /// where a prime is required, or too large for exact machine arithmetic.
    #[error("invalid modulus argument: {context}")]
    InvalidModulus { context: String },

    /// A local enumeration over (Z/q)^n would exceed the iteration budget.
    #[error("modulus {modulus} needs {needed} iterations, over budget {budget}")]
    ModulusTooLarge {
        modulus: u64,
        needed: u128,
        budget: u64,
    },

    /// A counting enumeration would exceed the iteration budget.
    #[error("enumeration needs {needed} iterations, over budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    /// A fit or scan was asked of data it cannot support.
    #[error("degenerate samples: {reason}")]
    DegenerateSamples { reason: String },

    /// The split evaluation mode needs at least two connected components in
    /// the off-diagonal support graph.
    #[error("split evaluation unavailable: off-diagonal support graph is connected")]
    SplitUnavailable,

    /// Arc construction needs P <= X/2 so that distinct arcs stay disjoint.
    #[error("arc parameter P = {p} exceeds X/2 = {half_x}; arcs could overlap")]
    PTooLarge { p: f64, half_x: f64 },

    /// Every grid point of a minor-arc scan fell inside the major arcs.
    #[error("minor-arc scan is empty: every grid point lies in a major arc")]
    EmptyScan,

    /// The verification runner was asked for a suite group it does not have.
    #[error("unknown verification scope: {name}")]
    UnknownScope { name: String },
}

impl Error {
    /// Stable machine-readable code for the CLI's JSON error envelope.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ParseMatrix { .. } => "parse-matrix",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NoUniqueSolution => "no-unique-solution",
            Error::InvalidPermutation { .. } => "invalid-permutation",
            Error::NoOffDiagonalSubmatrix { .. } => "no-off-diagonal-submatrix",
            Error::NotOffDiagRank1 { .. } => "not-offdiag-rank-1",
            Error::NotOffDiagRank2 { .. } => "not-offdiag-rank-2",
            Error::CaseMismatch { .. } => "case-mismatch",
            Error::InternalInconsistency { .. } => "internal-inconsistency",
            Error::NonIntegralAssembly { .. } => "non-integral-assembly",
            Error::NoQuintuple { .. } => "no-quintuple",
            Error::NotCoprime { .. } => "not-coprime",
            Error::InvalidModulus { .. } => "invalid-modulus",
            Error::ModulusTooLarge { .. } => "modulus-too-large",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::DegenerateSamples { .. } => "degenerate-samples",
            Error::SplitUnavailable => "split-unavailable",
            Error::PTooLarge { .. } => "p-too-large",
            Error::EmptyScan => "empty-scan",
            Error::UnknownScope { .. } => "unknown-scope",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_names_offending_entry() {
        let e = Error::NotSymmetric {
            i: 0,
            j: 2,
            aij: "3".into(),
            aji: "4".into(),
        };
        let s = e.to_string();
        assert!(s.contains("(0,2)"));
        assert!(s.contains('3'));
        assert!(s.contains('4'));
    }

    #[test]
    fn codes_are_distinct_for_common_variants() {
        let a = Error::NoUniqueSolution.code();
        let b = Error::SplitUnavailable.code();
        let c = Error::EmptyScan.code();
        assert_ne!(a, b);
        assert_ne!(b, c);
    }
}
