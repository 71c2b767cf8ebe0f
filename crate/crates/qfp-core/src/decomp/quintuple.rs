//! Selection of five coordinates with nonvanishing coefficients.
//!
//! The minor-arc estimates peel five variables off a decomposed form and
//! apply Cauchy–Schwarz to them, which requires five pairwise-distinct
//! tail coordinates whose coefficients do not vanish:
//!
//! * for a rank-1 form, one coordinate with ξ_{b₁} ≠ 0 and four with
//!   d_{b_i} ≠ 0;
//! * for a (2,2)-case form, two coordinates whose C-columns are linearly
//!   independent and three with d_{b_i} ≠ 0.
//!
//! The searches are greedy in ascending index order, mirroring the
//! existence arguments: when plenty of diagonal support is available the
//! first usable anchor wins; in the boundary case where the diagonal
//! support is exactly the minimum, the anchor is forced outside it. The
//! functions search regardless of the supplied matrix rank — the rank is
//! context for diagnostics when no selection exists — and every returned
//! selection is re-verified against its defining invariant by direct
//! evaluation, independent of the search path.

use num_traits::Zero;
use serde::Serialize;

use super::{Rank1Form, Rank2Form22};
use crate::error::{Error, Result};
use crate::matrix::{rank_int, IndexPermutation};

/// Which invariant the selection satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuintupleKind {
    /// ξ_{b₁}·d_{b₂}·d_{b₃}·d_{b₄}·d_{b₅} ≠ 0 on a rank-1 form.
    Rank1Quintuple,
    /// rank(ξ_{b₁}, ξ_{b₂}) = 2 and d_{b₃}d_{b₄}d_{b₅} ≠ 0 on a
    /// (2,2)-case form, where ξ_k is the k-th column of C.
    Rank2Quintuple,
}

/// Five pairwise-distinct tail coordinates, 0-based in the canonical
/// (permuted) layout of the form they were selected from: index `k` refers
/// to the k-th entry of the form's ξ/C-column and `d` arrays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuintupleSelection {
    pub kind: QuintupleKind,
    pub b: [usize; 5],
}

impl QuintupleSelection {
    /// Translates the tail coordinates back to row/column indices of the
    /// original (unpermuted) matrix via the decomposition's permutation.
    pub fn original_indices(&self, perm: &IndexPermutation) -> Vec<usize> {
        let offset = match self.kind {
            QuintupleKind::Rank1Quintuple => 1,
            QuintupleKind::Rank2Quintuple => 2,
        };
        self.b.iter().map(|&k| perm.apply(k + offset)).collect()
    }
}

fn no_quintuple(reason: impl Into<String>) -> Error {
    Error::NoQuintuple {
        reason: reason.into(),
    }
}

/// Finds b₁ with ξ_{b₁} ≠ 0 and four further coordinates with d ≠ 0.
///
/// Greedy: anchors are tried in ascending index order and the first one
/// that leaves at least four nonzero diagonal entries elsewhere wins; the
/// companions are the four smallest such indices. When the diagonal
/// support has exactly four elements this forces the anchor outside the
/// support, matching the boundary case of the existence argument.
pub fn find_quintuple_rank1(f: &Rank1Form, rank_a: usize) -> Result<QuintupleSelection> {
    let m = f.xi.len();
    if f.d.len() != m {
        return Err(Error::DimensionMismatch {
            context: format!("xi has {} entries but d has {}", m, f.d.len()),
        });
    }
    let d_support: Vec<usize> = (0..m).filter(|&k| !f.d[k].is_zero()).collect();
    let mut anchors = (0..m).filter(|&k| !f.xi[k].is_zero()).peekable();
    if anchors.peek().is_none() {
        return Err(no_quintuple(format!(
            "xi vanishes identically (matrix rank {rank_a}); the linear coefficient invariant cannot hold"
        )));
    }
    for b1 in anchors {
        let companions: Vec<usize> = d_support
            .iter()
            .copied()
            .filter(|&k| k != b1)
            .take(4)
            .collect();
        if companions.len() == 4 {
            let sel = QuintupleSelection {
                kind: QuintupleKind::Rank1Quintuple,
                b: [b1, companions[0], companions[1], companions[2], companions[3]],
            };
            verify_rank1(f, &sel)?;
            return Ok(sel);
        }
    }
    Err(no_quintuple(format!(
        "every nonzero xi coordinate leaves fewer than four nonzero diagonal entries \
         (diagonal support size {}, matrix rank {rank_a}, rank at least 6 is required)",
        d_support.len()
    )))
}

/// Finds an independent pair of C-columns plus three nonzero diagonals.
///
/// Pairs (b₁ < b₂) are scanned lexicographically; the first invertible
/// pair leaving at least three nonzero diagonal entries elsewhere wins,
/// with the three smallest such indices as companions. When the diagonal
/// support is exactly the minimum the scan skips pairs that eat into it,
/// which is the boundary case where the column pair must come from outside
/// the support.
pub fn find_quintuple_case22(f: &Rank2Form22, rank_a: usize) -> Result<QuintupleSelection> {
    let m = f.c.cols();
    if f.d.len() != m {
        return Err(Error::DimensionMismatch {
            context: format!("C has {} columns but d has {} entries", m, f.d.len()),
        });
    }
    let d_support: Vec<usize> = (0..m).filter(|&k| !f.d[k].is_zero()).collect();
    let mut saw_independent_pair = false;
    for b1 in 0..m {
        for b2 in (b1 + 1)..m {
            let det = &f.c[(0, b1)] * &f.c[(1, b2)] - &f.c[(1, b1)] * &f.c[(0, b2)];
            if det.is_zero() {
                continue;
            }
            saw_independent_pair = true;
            let companions: Vec<usize> = d_support
                .iter()
                .copied()
                .filter(|&k| k != b1 && k != b2)
                .take(3)
                .collect();
            if companions.len() == 3 {
                let sel = QuintupleSelection {
                    kind: QuintupleKind::Rank2Quintuple,
                    b: [b1, b2, companions[0], companions[1], companions[2]],
                };
                verify_case22(f, &sel)?;
                return Ok(sel);
            }
        }
    }
    if saw_independent_pair {
        Err(no_quintuple(format!(
            "every independent column pair leaves fewer than three nonzero diagonal entries \
             (diagonal support size {}, matrix rank {rank_a}, rank at least 8 is required)",
            d_support.len()
        )))
    } else {
        Err(no_quintuple(format!(
            "no pair of C-columns is linearly independent (matrix rank {rank_a}); \
             the rank invariant cannot hold"
        )))
    }
}

/// Post-hoc invariant check by direct evaluation, independent of the
/// search: ξ_{b₁} and all four selected d's must be nonzero.
fn verify_rank1(f: &Rank1Form, sel: &QuintupleSelection) -> Result<()> {
    let [b1, rest @ ..] = sel.b;
    let ok = !f.xi[b1].is_zero()
        && rest.iter().all(|&k| !f.d[k].is_zero())
        && pairwise_distinct(&sel.b);
    if ok {
        Ok(())
    } else {
        Err(Error::InternalInconsistency {
            context: format!("selected quintuple {:?} violates its invariant", sel.b),
        })
    }
}

/// Post-hoc invariant check: the two selected C-columns must span rank 2
/// and the three selected d's must be nonzero.
fn verify_case22(f: &Rank2Form22, sel: &QuintupleSelection) -> Result<()> {
    let [b1, b2, rest @ ..] = sel.b;
    let pair = f.c.submatrix(&[0, 1], &[b1, b2]);
    let ok = rank_int(&pair) == 2
        && rest.iter().all(|&k| !f.d[k].is_zero())
        && pairwise_distinct(&sel.b);
    if ok {
        Ok(())
    } else {
        Err(Error::InternalInconsistency {
            context: format!("selected quintuple {:?} violates its invariant", sel.b),
        })
    }
}

fn pairwise_distinct(b: &[usize; 5]) -> bool {
    let mut sorted = *b;
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}
