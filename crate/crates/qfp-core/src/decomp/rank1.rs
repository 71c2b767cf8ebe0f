//! Decomposition of matrices with off-diagonal rank exactly 1.
//!
//! The structure theorem: if `rank_off(A) = 1` there is an index pair
//! `(i, j)` with `a_ij ≠ 0` such that, after moving `i` to the front, the
//! first row tail `ξ` spans every off-diagonal interaction — the trailing
//! block equals `D + hξξᵀ` with `D` diagonal. The anchor index is *not*
//! arbitrary: in `[[0, c, 0], [c, 0, e], [0, e, 0]]` (off-diagonal rank 1)
//! anchoring at index 0 leaves the trailing entry `e` unexplained, while
//! anchoring at the hub index 1 works. The decomposer therefore tries
//! ordered anchor pairs `(i, j)` with `a_ij ≠ 0` in lexicographic order and
//! accepts the first whose residual is diagonal. This search has no false
//! negatives: for a fixed anchor, any two candidate values of `h` disagree
//! on some entry, so whichever is tested first fails only if every choice
//! fails.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{solve_tail_scale, Rank1Form};
use crate::error::{Error, Result};
use crate::matrix::{conjugate_by_permutation, IndexPermutation, SymmetricIntMatrix};
use crate::offdiag::offdiag_rank;
use crate::Rational;

/// Decomposes a matrix of off-diagonal rank 1 into its canonical form.
pub fn decompose_rank1(a: &SymmetricIntMatrix) -> Result<Rank1Form> {
    let rep = offdiag_rank(a)?;
    if rep.value != 1 {
        return Err(Error::NotOffDiagRank1 { found: rep.value });
    }
    let n = a.n();
    for i in 0..n {
        for j in 0..n {
            if i == j || a.entry(i, j).is_zero() {
                continue;
            }
            if let Some(form) = try_anchor(a, i, j)? {
                debug_assert_eq!(&form.assemble()?, a);
                return Ok(form);
            }
        }
    }
    // rank_off = 1 guarantees some nonzero off-diagonal entry, and the
    // structure theorem guarantees some anchor succeeds.
    Err(Error::InternalInconsistency {
        context: "no anchor pair yields a diagonal residual despite off-diagonal rank 1".into(),
    })
}

/// Attempts the canonical layout with original index `i` leading and `j`
/// second. Returns `Ok(None)` when this anchor's residual is not diagonal.
fn try_anchor(a: &SymmetricIntMatrix, i: usize, j: usize) -> Result<Option<Rank1Form>> {
    let n = a.n();
    let mut images = vec![i, j];
    images.extend((0..n).filter(|&k| k != i && k != j));
    let perm = IndexPermutation::new(images)?;
    let ap = conjugate_by_permutation(a, &perm);

    let xi: Vec<BigInt> = (1..n).map(|k| ap.entry(0, k).clone()).collect();
    let tail = |k: usize, l: usize| ap.entry(1 + k, 1 + l).clone();
    let Some(h) = solve_tail_scale(&xi, tail) else {
        return Ok(None);
    };
    let d: Vec<Rational> = (0..n - 1)
        .map(|k| {
            Rational::from(ap.entry(1 + k, 1 + k).clone())
                - &h * Rational::from(&xi[k] * &xi[k])
        })
        .collect();
    Ok(Some(Rank1Form {
        perm,
        a: ap.entry(0, 0).clone(),
        xi,
        d,
        h,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn constructed_instance_recovers_exact_parameters() {
        // a = 1, ξ = (1,1,1,1,1), D = diag(1,2,3,4,5), h = 0.
        let f = Rank1Form {
            perm: IndexPermutation::identity(6),
            a: BigInt::one(),
            xi: vec![BigInt::one(); 5],
            d: (1..=5).map(|k| rat(k, 1)).collect(),
            h: Rational::zero(),
        };
        let m = f.assemble().unwrap();
        let g = decompose_rank1(&m).unwrap();
        assert_eq!(g.a, BigInt::one());
        assert_eq!(g.xi, vec![BigInt::one(); 5]);
        assert_eq!(g.d, f.d);
        assert!(g.h.is_zero());
        assert_eq!(g.perm, IndexPermutation::identity(6));
    }

    #[test]
    fn half_integer_h_round_trips() {
        // a = 2, ξ = (2,2,0,2,2), d = (3,−1,4,0,2), h = 1/2: integral by parity.
        let f = Rank1Form {
            perm: IndexPermutation::identity(6),
            a: BigInt::from(2),
            xi: [2, 2, 0, 2, 2].iter().map(|&v| BigInt::from(v)).collect(),
            d: [3, -1, 4, 0, 2].iter().map(|&v| rat(v, 1)).collect(),
            h: rat(1, 2),
        };
        let m = f.assemble().unwrap();
        let g = decompose_rank1(&m).unwrap();
        assert_eq!(g.assemble().unwrap(), m);
        assert_eq!(g.h, rat(1, 2));
        assert_eq!(g.xi, f.xi);
        assert_eq!(g.d, f.d);
    }

    #[test]
    fn lone_nonzero_xi_uses_h_zero_convention() {
        // ξ = (1,0,0,0,0): no off-diagonal product ξ_k ξ_l ≠ 0, so any h
        // explains the (zero) tail off-diagonal; convention pins h = 0.
        let f = Rank1Form {
            perm: IndexPermutation::identity(6),
            a: BigInt::one(),
            xi: [1, 0, 0, 0, 0].iter().map(|&v| BigInt::from(v)).collect(),
            d: [7, 1, 2, 3, 4].iter().map(|&v| rat(v, 1)).collect(),
            h: Rational::zero(),
        };
        let m = f.assemble().unwrap();
        let g = decompose_rank1(&m).unwrap();
        assert!(g.h.is_zero());
        assert_eq!(g.d, f.d);
        assert_eq!(g.assemble().unwrap(), m);
    }

    #[test]
    fn hub_matrix_needs_anchor_search() {
        // Off-diagonal rank 1 but index 0 cannot lead: the hub is index 1.
        let m = SymmetricIntMatrix::from_i64_rows(vec![
            vec![0, 2, 0],
            vec![2, 0, 3],
            vec![0, 3, 0],
        ])
        .unwrap();
        assert_eq!(offdiag_rank(&m).unwrap().value, 1);
        let g = decompose_rank1(&m).unwrap();
        assert_eq!(g.assemble().unwrap(), m);
        // The leading original index must be the hub 1.
        assert_eq!(g.perm.apply(0), 1);
    }

    #[test]
    fn wrong_rank_is_reported() {
        let diag = SymmetricIntMatrix::from_i64_rows(vec![
            vec![1, 0],
            vec![0, 2],
        ])
        .unwrap();
        assert!(matches!(
            decompose_rank1(&diag),
            Err(Error::NotOffDiagRank1 { found: 0 })
        ));
        let mut rows = vec![vec![0i64; 5]; 5];
        rows[0][2] = 1;
        rows[2][0] = 1;
        rows[1][3] = 1;
        rows[3][1] = 1;
        let rank2 = SymmetricIntMatrix::from_i64_rows(rows).unwrap();
        assert!(matches!(
            decompose_rank1(&rank2),
            Err(Error::NotOffDiagRank1 { found: 2 })
        ));
    }

    #[test]
    fn permuted_instances_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let n = rng.gen_range(2usize..=7);
            let mut images: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                images.swap(i, j);
            }
            let xi: Vec<BigInt> = (0..n - 1)
                .map(|k| BigInt::from(if k == 0 { 1 + rng.gen_range(0i64..3) } else { rng.gen_range(-2i64..=2) }))
                .collect();
            let f = Rank1Form {
                perm: IndexPermutation::new(images).unwrap(),
                a: BigInt::from(rng.gen_range(-4i64..=4)),
                xi,
                d: (0..n - 1).map(|_| rat(rng.gen_range(-5i64..=5), 1)).collect(),
                h: Rational::zero(),
            };
            let m = f.assemble().unwrap();
            let g = decompose_rank1(&m).unwrap();
            assert_eq!(g.assemble().unwrap(), m);
        }
    }
}
