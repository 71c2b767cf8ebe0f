//! Classification and decomposition of matrices with off-diagonal rank 2.
//!
//! A witness placement is a 4-tuple `(i₁ < i₂, j₁ < j₂)` of distinct
//! indices whose 2×2 interaction `B = A[{i₁,i₂}, {j₁,j₂}]` has rank 2. For
//! each placement, dropping one of the two pivot columns and appending the
//! interactions with every remaining index yields two wide blocks `B₁`
//! and `B₂`; their ranks (each 1 or 2, since a pivot column is nonzero)
//! sort the matrix into one of three structural cases.
//!
//! Different placements of the same matrix can disagree, and a naive
//! "first placement found" rule would make the tag depend on how the
//! matrix happens to be labeled. The classifier is therefore *priority
//! based*: the tag is Case11 if **any** placement achieves ranks (1,1),
//! else Case21 if any achieves (2,1) or (1,2), else Case22. Within the
//! winning priority the lexicographically smallest placement is the
//! witness (orientation-normalized so that rank(B₁) = 2, rank(B₂) = 1 in
//! the middle case). Because the placement set of a relabeled matrix is
//! the relabeled placement set, the tag is invariant under symmetric
//! permutations — the property the decomposers and all downstream counting
//! arguments rely on.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{solve_tail_scale, Rank2Form11, Rank2Form21, Rank2Form22};
use crate::error::{Error, Rank2Case, Result};
use crate::matrix::{
    conjugate_by_permutation, rank_int, rref, IndexPermutation, Matrix, SymmetricIntMatrix,
};
use crate::offdiag::offdiag_rank;
use crate::{Rational, RationalMatrix};

/// The case tag: which structural case applies, the witness permutation
/// moving the placement to the front, and the block ranks that decided it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rank2CaseTag {
    pub case: Rank2Case,
    /// Maps the original matrix to canonical layout: positions 0,1 are the
    /// placement rows, positions 2,3 its (oriented) columns, the rest
    /// ascending.
    pub perm: IndexPermutation,
    /// Rank of the 2×2 interaction B (always 2).
    pub rank_b: usize,
    /// Rank of B with column j₂ dropped and the remaining interactions
    /// appended (2 in Case21 after orientation).
    pub rank_b1: usize,
    /// Rank of B with column j₁ dropped and the remaining interactions
    /// appended (1 in Case21 after orientation).
    pub rank_b2: usize,
}

/// Classifies a matrix of off-diagonal rank 2 into one of the three cases.
pub fn classify_rank2(a: &SymmetricIntMatrix) -> Result<Rank2CaseTag> {
    let rep = offdiag_rank(a)?;
    if rep.value != 2 {
        return Err(Error::NotOffDiagRank2 { found: rep.value });
    }
    let n = a.n();
    // (priority, placement, oriented ranks, swap_columns)
    let mut best: Option<(u8, [usize; 4], usize, usize, bool)> = None;
    for i1 in 0..n {
        for i2 in (i1 + 1)..n {
            for j1 in 0..n {
                if j1 == i1 || j1 == i2 {
                    continue;
                }
                for j2 in (j1 + 1)..n {
                    if j2 == i1 || j2 == i2 {
                        continue;
                    }
                    let rows = [i1, i2];
                    let b = a.submatrix(&rows, &[j1, j2]);
                    if rank_int(&b) != 2 {
                        continue;
                    }
                    let others: Vec<usize> = (0..n)
                        .filter(|&k| k != i1 && k != i2 && k != j1 && k != j2)
                        .collect();
                    let mut cols1 = vec![j1];
                    cols1.extend(&others);
                    let mut cols2 = vec![j2];
                    cols2.extend(&others);
                    let r1 = rank_int(&a.submatrix(&rows, &cols1));
                    let r2 = rank_int(&a.submatrix(&rows, &cols2));
                    let (priority, swap) = match (r1, r2) {
                        (1, 1) => (0u8, false),
                        (2, 1) => (1, false),
                        (1, 2) => (1, true),
                        (2, 2) => (2, false),
                        other => {
                            return Err(Error::InternalInconsistency {
                                context: format!("impossible block ranks {other:?}"),
                            })
                        }
                    };
                    let key = (priority, [i1, i2, j1, j2]);
                    let replace = match &best {
                        None => true,
                        Some((bp, bt, ..)) => key < (*bp, *bt),
                    };
                    if replace {
                        let (or1, or2) = if swap { (r2, r1) } else { (r1, r2) };
                        best = Some((priority, [i1, i2, j1, j2], or1, or2, swap));
                    }
                }
            }
        }
    }
    let Some((priority, [i1, i2, j1, j2], rank_b1, rank_b2, swap)) = best else {
        return Err(Error::InternalInconsistency {
            context: "off-diagonal rank 2 but no rank-2 placement found".into(),
        });
    };
    let case = match priority {
        0 => Rank2Case::Case11,
        1 => Rank2Case::Case21,
        _ => Rank2Case::Case22,
    };
    let (c1, c2) = if swap { (j2, j1) } else { (j1, j2) };
    let mut images = vec![i1, i2, c1, c2];
    images.extend((0..n).filter(|&k| k != i1 && k != i2 && k != j1 && k != j2));
    Ok(Rank2CaseTag {
        case,
        perm: IndexPermutation::new(images)?,
        rank_b: 2,
        rank_b1,
        rank_b2,
    })
}

fn expect_case(tag: &Rank2CaseTag, expected: Rank2Case) -> Result<()> {
    if tag.case != expected {
        return Err(Error::CaseMismatch {
            expected,
            found: tag.case,
        });
    }
    Ok(())
}

fn inconsistent(context: impl Into<String>) -> Error {
    Error::InternalInconsistency {
        context: context.into(),
    }
}

/// Verifies that reassembling `form` reproduces `a` exactly; shared final
/// step of all three decomposers.
fn verify_reconstruction<F>(form: F, a: &SymmetricIntMatrix, assemble: impl Fn(&F) -> Result<SymmetricIntMatrix>) -> Result<F> {
    let back = assemble(&form)?;
    if &back != a {
        return Err(inconsistent("reconstruction does not reproduce the input"));
    }
    Ok(form)
}

/// Case (1,1): both pivot columns carry all the interaction; blocks are
/// read off directly after the tag's permutation.
pub fn decompose_case11(a: &SymmetricIntMatrix, tag: &Rank2CaseTag) -> Result<Rank2Form11> {
    expect_case(tag, Rank2Case::Case11)?;
    if tag.perm.len() != a.n() {
        return Err(Error::DimensionMismatch {
            context: format!("tag permutation is over {} indices, matrix has {}", tag.perm.len(), a.n()),
        });
    }
    let ap = conjugate_by_permutation(a, &tag.perm);
    let n = ap.n();
    let r01: Vec<usize> = vec![0, 1];
    let r23: Vec<usize> = vec![2, 3];
    let tail: Vec<usize> = (4..n).collect();
    let b = ap.submatrix(&r01, &r23);
    if rank_int(&b) != 2 {
        return Err(inconsistent("pivot block B is singular for this tag"));
    }
    for i in 0..2 {
        for k in 4..n {
            if !ap.entry(i, k).is_zero() {
                return Err(inconsistent(format!(
                    "leading rows interact outside the pivot block at ({i},{k})"
                )));
            }
        }
    }
    for k in 4..n {
        for l in (k + 1)..n {
            if !ap.entry(k, l).is_zero() {
                return Err(inconsistent(format!(
                    "trailing block is not diagonal at ({k},{l})"
                )));
            }
        }
    }
    let form = Rank2Form11 {
        perm: tag.perm.clone(),
        a1: ap.submatrix(&r01, &r01),
        b,
        a2: ap.submatrix(&r23, &r23),
        c: ap.submatrix(&r23, &tail),
        d: (4..n).map(|k| ap.entry(k, k).clone()).collect(),
    };
    verify_reconstruction(form, a, Rank2Form11::assemble)
}

/// Primitive vector spanning the row space of a rank-1 integer matrix,
/// sign-normalized so its leading nonzero entry is positive.
fn primitive_row_vector(z: &Matrix<BigInt>) -> Option<Vec<BigInt>> {
    let row = (0..z.rows()).find(|&r| z.row(r).iter().any(|x| !x.is_zero()))?;
    let mut g = BigInt::zero();
    for x in z.row(row) {
        g = g.gcd(x);
    }
    let mut xi: Vec<BigInt> = z.row(row).iter().map(|x| x / &g).collect();
    if let Some(first) = xi.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in &mut xi {
                *x = -x.clone();
            }
        }
    }
    Some(xi)
}

/// Case (2,1): single pivot column γ₁ plus a rank-one tail coupling γ₂ξᵀ.
pub fn decompose_case21(a: &SymmetricIntMatrix, tag: &Rank2CaseTag) -> Result<Rank2Form21> {
    expect_case(tag, Rank2Case::Case21)?;
    if tag.perm.len() != a.n() {
        return Err(Error::DimensionMismatch {
            context: format!("tag permutation is over {} indices, matrix has {}", tag.perm.len(), a.n()),
        });
    }
    let ap = conjugate_by_permutation(a, &tag.perm);
    let n = ap.n();
    let m = n - 3;

    // Rank-one coupling of the leading rows with everything past the pivot.
    let z = ap.submatrix(&[0, 1], &(3..n).collect::<Vec<_>>());
    if rank_int(&z) != 1 {
        return Err(inconsistent("tail coupling of the leading rows is not rank 1"));
    }
    let xi = primitive_row_vector(&z).ok_or_else(|| inconsistent("tail coupling vanished"))?;
    let k0 = xi
        .iter()
        .position(|x| !x.is_zero())
        .ok_or_else(|| inconsistent("primitive vector is zero"))?;
    let gamma2: [Rational; 2] = [
        Rational::new(z[(0, k0)].clone(), xi[k0].clone()),
        Rational::new(z[(1, k0)].clone(), xi[k0].clone()),
    ];
    for i in 0..2 {
        for k in 0..m {
            if Rational::from(z[(i, k)].clone()) != &gamma2[i] * Rational::from(xi[k].clone()) {
                return Err(inconsistent("tail coupling does not factor as gamma2 xi^T"));
            }
        }
    }
    let gamma1 = [ap.entry(0, 2).clone(), ap.entry(1, 2).clone()];
    let det = Rational::from(gamma1[0].clone()) * &gamma2[1]
        - Rational::from(gamma1[1].clone()) * &gamma2[0];
    if det.is_zero() {
        return Err(inconsistent("(gamma1, gamma2) is singular"));
    }

    let tail = |k: usize, l: usize| ap.entry(3 + k, 3 + l).clone();
    let h = solve_tail_scale(&xi, tail)
        .ok_or_else(|| inconsistent("trailing block is not diagonal plus h xi xi^T"))?;
    let d: Vec<Rational> = (0..m)
        .map(|k| {
            Rational::from(ap.entry(3 + k, 3 + k).clone())
                - &h * Rational::from(&xi[k] * &xi[k])
        })
        .collect();
    let form = Rank2Form21 {
        perm: tag.perm.clone(),
        a1: ap.submatrix(&[0, 1], &[0, 1]),
        gamma1,
        gamma2,
        xi,
        a: ap.entry(2, 2).clone(),
        v: (3..n).map(|k| ap.entry(2, k).clone()).collect(),
        h,
        d,
    };
    verify_reconstruction(form, a, Rank2Form21::assemble)
}

/// Case (2,2): full rank-2 coupling `ΓC`, tail `D + CᵀHC`.
///
/// The Γ/C gauge freedom (Γ → ΓU, C → U⁻¹C) is fixed by pinning Γ's
/// pre-scaling columns to B's columns: `C₀ = B⁻¹ · (top coupling block)` is
/// computed exactly, `λ` is the lcm of its denominators, and the output is
/// the integer matrix `C = λC₀` with `Γ = B/λ`. `H` is solved from the
/// trailing off-diagonal constraints as an exact linear system; when those
/// constraints do not pin all three components (e.g. a 2×2 trailing block
/// has a single off-diagonal entry), the free components are set to zero
/// and the form is flagged `h_underdetermined`.
pub fn decompose_case22(a: &SymmetricIntMatrix, tag: &Rank2CaseTag) -> Result<Rank2Form22> {
    expect_case(tag, Rank2Case::Case22)?;
    if tag.perm.len() != a.n() {
        return Err(Error::DimensionMismatch {
            context: format!("tag permutation is over {} indices, matrix has {}", tag.perm.len(), a.n()),
        });
    }
    let ap = conjugate_by_permutation(a, &tag.perm);
    let n = ap.n();
    let m = n - 2;

    let r = ap.submatrix(&[0, 1], &(2..n).collect::<Vec<_>>());
    let g0 = r.submatrix(&[0, 1], &[0, 1]);
    let det = &g0[(0, 0)] * &g0[(1, 1)] - &g0[(0, 1)] * &g0[(1, 0)];
    if det.is_zero() {
        return Err(inconsistent("pivot block B is singular for this tag"));
    }
    // C₀ = B⁻¹ R, exactly.
    let inv = |i: usize, j: usize| -> Rational {
        // Adjugate of the 2×2 g0 over its determinant.
        let adj = match (i, j) {
            (0, 0) => g0[(1, 1)].clone(),
            (0, 1) => -g0[(0, 1)].clone(),
            (1, 0) => -g0[(1, 0)].clone(),
            _ => g0[(0, 0)].clone(),
        };
        Rational::new(adj, det.clone())
    };
    let c0 = Matrix::from_fn(2, m, |i, k| {
        &inv(i, 0) * Rational::from(r[(0, k)].clone())
            + &inv(i, 1) * Rational::from(r[(1, k)].clone())
    });
    let lambda = c0
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let c = c0.map(|x| {
        let v = x * Rational::from(lambda.clone());
        debug_assert!(v.is_integer());
        v.to_integer()
    });
    if rank_int(&c) != 2 {
        return Err(inconsistent("coefficient matrix C is not rank 2"));
    }
    let gamma: RationalMatrix =
        g0.map(|x| Rational::new(x.clone(), lambda.clone()));

    // Solve the symmetric H from every trailing off-diagonal constraint:
    // c_{0k}c_{0l}·H₀₀ + (c_{0k}c_{1l} + c_{1k}c_{0l})·H₀₁ + c_{1k}c_{1l}·H₁₁
    //   = T[k][l]  for k < l.
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for k in 0..m {
        for l in (k + 1)..m {
            rows.push(vec![
                Rational::from(&c[(0, k)] * &c[(0, l)]),
                Rational::from(&c[(0, k)] * &c[(1, l)] + &c[(1, k)] * &c[(0, l)]),
                Rational::from(&c[(1, k)] * &c[(1, l)]),
                Rational::from(ap.entry(2 + k, 2 + l).clone()),
            ]);
        }
    }
    let mut system = Matrix::from_rows(rows)?;
    let pivots = rref(&mut system);
    if pivots.contains(&3) {
        return Err(inconsistent(
            "trailing off-diagonal constraints admit no symmetric H",
        ));
    }
    let mut sol = [Rational::zero(), Rational::zero(), Rational::zero()];
    for (row, &pc) in pivots.iter().enumerate() {
        sol[pc] = system[(row, 3)].clone();
    }
    let h_underdetermined = pivots.len() < 3;
    let h = Matrix::from_rows(vec![
        vec![sol[0].clone(), sol[1].clone()],
        vec![sol[1].clone(), sol[2].clone()],
    ])?;

    // With free components zeroed the particular solution still matches
    // every constraint (rref consistency), so D is the exact residual.
    let c_rat = c.map(|x| Rational::from(x.clone()));
    let w = c_rat.transpose().matmul(&h.matmul(&c_rat)?)?;
    let d: Vec<Rational> = (0..m)
        .map(|k| Rational::from(ap.entry(2 + k, 2 + k).clone()) - &w[(k, k)])
        .collect();
    let form = Rank2Form22 {
        perm: tag.perm.clone(),
        a1: ap.submatrix(&[0, 1], &[0, 1]),
        gamma,
        c,
        h,
        h_underdetermined,
        d,
    };
    verify_reconstruction(form, a, Rank2Form22::assemble)
}
