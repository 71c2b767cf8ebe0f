//! Canonical block decompositions of matrices with small off-diagonal rank.
//!
//! A symmetric integer matrix of off-diagonal rank 1 is, after a symmetric
//! permutation, of the shape
//!
//! ```text
//! [ a   ξᵀ        ]
//! [ ξ   D + hξξᵀ ]
//! ```
//!
//! with `ξ` an integer vector, `D` diagonal, and `h` a single rational
//! scalar ([`Rank1Form`]). Off-diagonal rank 2 splits into three cases by
//! the ranks of two column-split blocks of a witness 2×2 interaction `B`:
//! two disjoint 2×2 centers ([`Rank2Form11`]), a 2×1 center with a rank-one
//! tail ([`Rank2Form21`]), or a full rank-2 coupling `ΓC` with a symmetric
//! correction `CᵀHC` in the tail ([`Rank2Form22`]).
//!
//! Every form stores the permutation that maps the original matrix to its
//! canonical layout and can [`assemble`](Rank1Form::assemble) itself back;
//! decompose-then-assemble is exact, entrywise, in exact arithmetic — that
//! round-trip is the correctness contract for the whole module. Quintuple
//! selection ([`quintuple`]) picks the five indices the counting arguments
//! downstream need, and [`generate`] draws seeded random instances of each
//! shape for oracle testing.

mod generate;
mod quintuple;
mod rank1;
mod rank2;

pub use generate::{generate_from_form, FormKind, GeneratedForm, GeneratedInstance};
pub use quintuple::{find_quintuple_case22, find_quintuple_rank1, QuintupleKind, QuintupleSelection};
pub use rank1::decompose_rank1;
pub use rank2::{classify_rank2, decompose_case11, decompose_case21, decompose_case22, Rank2CaseTag};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{conjugate_by_permutation, IndexPermutation, Matrix, SymmetricIntMatrix};
use crate::{Rational, RationalMatrix};

/// Off-diagonal rank-1 canonical form. `perm` maps the original matrix to
/// the canonical layout: `conjugate(A, perm) = [[a, ξᵀ], [ξ, D + hξξᵀ]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Form {
    pub perm: IndexPermutation,
    pub a: BigInt,
    /// Interaction vector ξ of length n−1; nonzero.
    pub xi: Vec<BigInt>,
    /// Diagonal of D, length n−1.
    pub d: Vec<Rational>,
    /// Rank-one correction scale; 0 when unidentifiable (ξ has at most one
    /// nonzero coordinate).
    pub h: Rational,
}

impl Rank1Form {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Rebuilds the original matrix exactly.
    pub fn assemble(&self) -> Result<SymmetricIntMatrix> {
        let n = self.n();
        check_len("xi", self.xi.len(), n - 1)?;
        check_len("d", self.d.len(), n - 1)?;
        let mut canon = zero_rational(n);
        canon[(0, 0)] = Rational::from(self.a.clone());
        for k in 0..n - 1 {
            let x = Rational::from(self.xi[k].clone());
            canon[(0, k + 1)] = x.clone();
            canon[(k + 1, 0)] = x;
        }
        for k in 0..n - 1 {
            for l in 0..n - 1 {
                let mut v = &self.h * Rational::from(&self.xi[k] * &self.xi[l]);
                if k == l {
                    v += &self.d[k];
                }
                canon[(k + 1, l + 1)] = v;
            }
        }
        finalize_assembly(canon, &self.perm)
    }
}

/// Case (1,1): two disjoint 2×2 centers joined by an invertible `B`; the
/// first center touches nothing else, the second touches the tail via `C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rank2Form11 {
    pub perm: IndexPermutation,
    pub a1: Matrix<BigInt>,
    /// 2×2, invertible over ℚ.
    pub b: Matrix<BigInt>,
    pub a2: Matrix<BigInt>,
    /// 2×(n−4) coupling of the second center to the tail.
    pub c: Matrix<BigInt>,
    /// Diagonal of D, length n−4 (integer-valued; typed per the tail
    /// convention shared by all forms).
    pub d: Vec<BigInt>,
}

impl Rank2Form11 {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn assemble(&self) -> Result<SymmetricIntMatrix> {
        let n = self.n();
        let m = n - 4;
        check_shape("a1", &self.a1, 2, 2)?;
        check_shape("b", &self.b, 2, 2)?;
        check_shape("a2", &self.a2, 2, 2)?;
        check_shape("c", &self.c, 2, m)?;
        check_len("d", self.d.len(), m)?;
        let mut canon = zero_rational(n);
        for i in 0..2 {
            for j in 0..2 {
                canon[(i, j)] = Rational::from(self.a1[(i, j)].clone());
                canon[(2 + i, 2 + j)] = Rational::from(self.a2[(i, j)].clone());
                canon[(i, 2 + j)] = Rational::from(self.b[(i, j)].clone());
                canon[(2 + j, i)] = Rational::from(self.b[(i, j)].clone());
            }
            for k in 0..m {
                canon[(2 + i, 4 + k)] = Rational::from(self.c[(i, k)].clone());
                canon[(4 + k, 2 + i)] = Rational::from(self.c[(i, k)].clone());
            }
        }
        for k in 0..m {
            canon[(4 + k, 4 + k)] = Rational::from(self.d[k].clone());
        }
        finalize_assembly(canon, &self.perm)
    }
}

/// Case (2,1): one 2×2 center coupled to a single pivot column γ₁ and to
/// the tail through the rank-one matrix γ₂ξᵀ; the tail itself carries
/// `D + hξξᵀ` and a residual column `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank2Form21 {
    pub perm: IndexPermutation,
    pub a1: Matrix<BigInt>,
    pub gamma1: [BigInt; 2],
    /// Rational column factor of the rank-one coupling (integer-valued once
    /// ξ is normalized primitive).
    pub gamma2: [Rational; 2],
    /// Primitive integer vector with positive leading nonzero entry,
    /// length n−3.
    pub xi: Vec<BigInt>,
    /// Pivot diagonal entry.
    pub a: BigInt,
    /// Pivot-to-tail column, length n−3.
    pub v: Vec<BigInt>,
    pub h: Rational,
    pub d: Vec<Rational>,
}

impl Rank2Form21 {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn assemble(&self) -> Result<SymmetricIntMatrix> {
        let n = self.n();
        let m = n - 3;
        check_shape("a1", &self.a1, 2, 2)?;
        check_len("xi", self.xi.len(), m)?;
        check_len("v", self.v.len(), m)?;
        check_len("d", self.d.len(), m)?;
        let mut canon = zero_rational(n);
        for i in 0..2 {
            for j in 0..2 {
                canon[(i, j)] = Rational::from(self.a1[(i, j)].clone());
            }
            canon[(i, 2)] = Rational::from(self.gamma1[i].clone());
            canon[(2, i)] = Rational::from(self.gamma1[i].clone());
            for k in 0..m {
                let val = &self.gamma2[i] * Rational::from(self.xi[k].clone());
                canon[(i, 3 + k)] = val.clone();
                canon[(3 + k, i)] = val;
            }
        }
        canon[(2, 2)] = Rational::from(self.a.clone());
        for k in 0..m {
            canon[(2, 3 + k)] = Rational::from(self.v[k].clone());
            canon[(3 + k, 2)] = Rational::from(self.v[k].clone());
        }
        for k in 0..m {
            for l in 0..m {
                let mut val = &self.h * Rational::from(&self.xi[k] * &self.xi[l]);
                if k == l {
                    val += &self.d[k];
                }
                canon[(3 + k, 3 + l)] = val;
            }
        }
        finalize_assembly(canon, &self.perm)
    }
}

/// Case (2,2): the two special rows couple to the whole tail through `ΓC`
/// of rank 2, and the tail carries the symmetric correction `CᵀHC`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank2Form22 {
    pub perm: IndexPermutation,
    pub a1: Matrix<BigInt>,
    /// 2×2 invertible rational gauge (= (γ₁, γ₂)).
    pub gamma: RationalMatrix,
    /// 2×(n−2) integer coefficient matrix of rank 2.
    pub c: Matrix<BigInt>,
    /// Symmetric 2×2 rational correction.
    pub h: RationalMatrix,
    /// True when the off-diagonal constraint system did not pin all three
    /// components of `h` (free components are set to 0); reconstruction is
    /// exact either way.
    pub h_underdetermined: bool,
    pub d: Vec<Rational>,
}

impl Rank2Form22 {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn assemble(&self) -> Result<SymmetricIntMatrix> {
        let n = self.n();
        let m = n - 2;
        check_shape("a1", &self.a1, 2, 2)?;
        check_shape("gamma", &self.gamma, 2, 2)?;
        check_shape("c", &self.c, 2, m)?;
        check_shape("h", &self.h, 2, 2)?;
        check_len("d", self.d.len(), m)?;
        if self.h[(0, 1)] != self.h[(1, 0)] {
            return Err(Error::InternalInconsistency {
                context: "H block must be symmetric".into(),
            });
        }
        let c_rat = self.c.map(|x| Rational::from(x.clone()));
        let r = self.gamma.matmul(&c_rat)?;
        let w = c_rat.transpose().matmul(&self.h.matmul(&c_rat)?)?;
        let mut canon = zero_rational(n);
        for i in 0..2 {
            for j in 0..2 {
                canon[(i, j)] = Rational::from(self.a1[(i, j)].clone());
            }
            for k in 0..m {
                canon[(i, 2 + k)] = r[(i, k)].clone();
                canon[(2 + k, i)] = r[(i, k)].clone();
            }
        }
        for k in 0..m {
            for l in 0..m {
                let mut val = w[(k, l)].clone();
                if k == l {
                    val += &self.d[k];
                }
                canon[(2 + k, 2 + l)] = val;
            }
        }
        finalize_assembly(canon, &self.perm)
    }
}

fn zero_rational(n: usize) -> RationalMatrix {
    Matrix::from_fn(n, n, |_, _| Rational::zero())
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch {
            context: format!("{name} has length {got}, expected {want}"),
        });
    }
    Ok(())
}

fn check_shape<T>(name: &str, m: &Matrix<T>, rows: usize, cols: usize) -> Result<()> {
    if m.rows() != rows || m.cols() != cols {
        return Err(Error::DimensionMismatch {
            context: format!(
                "{name} is {}x{}, expected {rows}x{cols}",
                m.rows(),
                m.cols()
            ),
        });
    }
    Ok(())
}

/// Checks integrality of the canonical matrix, undoes the permutation, and
/// returns the original-coordinates symmetric matrix. The integrality
/// diagnostic reports positions in original coordinates.
fn finalize_assembly(canon: RationalMatrix, perm: &IndexPermutation) -> Result<SymmetricIntMatrix> {
    let n = perm.len();
    for i in 0..n {
        for j in 0..n {
            if !canon[(i, j)].is_integer() {
                return Err(Error::NonIntegralAssembly {
                    i: perm.apply(i),
                    j: perm.apply(j),
                    value: canon[(i, j)].to_string(),
                });
            }
        }
    }
    let ints = canon.map(|x| x.to_integer());
    let canon_sym = SymmetricIntMatrix::new(ints)?;
    Ok(conjugate_by_permutation(&canon_sym, &perm.inverse()))
}

/// Solves the shared trailing-block puzzle: given the integer interaction
/// vector ξ and the trailing symmetric block `T` (in `get(k, l)` form),
/// finds the unique `h` with `T[k][l] = h ξ_k ξ_l` off the diagonal, or 0
/// when no off-diagonal product ξ_k ξ_l is nonzero. Returns `None` when no
/// single `h` matches every off-diagonal entry.
fn solve_tail_scale(
    xi: &[BigInt],
    get: impl Fn(usize, usize) -> BigInt,
) -> Option<Rational> {
    let m = xi.len();
    let mut h: Option<Rational> = None;
    for k in 0..m {
        for l in (k + 1)..m {
            let prod = &xi[k] * &xi[l];
            if prod.is_zero() {
                if !get(k, l).is_zero() {
                    return None;
                }
                continue;
            }
            let cand = Rational::new(get(k, l), prod);
            match &h {
                None => h = Some(cand),
                Some(existing) if *existing != cand => return None,
                _ => {}
            }
        }
    }
    Some(h.unwrap_or_else(Rational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rank1_assemble_identity_perm() {
        let f = Rank1Form {
            perm: IndexPermutation::identity(3),
            a: BigInt::from(2),
            xi: vec![BigInt::from(1), BigInt::from(3)],
            d: vec![rat(5, 1), rat(-1, 1)],
            h: Rational::zero(),
        };
        let m = f.assemble().unwrap();
        assert_eq!(m.entry(0, 1), &BigInt::from(1));
        assert_eq!(m.entry(0, 2), &BigInt::from(3));
        assert_eq!(m.entry(1, 1), &BigInt::from(5));
        assert_eq!(m.entry(1, 2), &BigInt::from(0));
    }

    #[test]
    fn rank1_assemble_rejects_non_integral() {
        // h = 1/2 with odd ξ products makes off-diagonal tail entries
        // half-integers.
        let f = Rank1Form {
            perm: IndexPermutation::identity(3),
            a: BigInt::one(),
            xi: vec![BigInt::from(1), BigInt::from(1)],
            d: vec![rat(0, 1), rat(0, 1)],
            h: rat(1, 2),
        };
        match f.assemble() {
            Err(Error::NonIntegralAssembly { .. }) => {}
            other => panic!("expected NonIntegralAssembly, got {other:?}"),
        }
    }

    #[test]
    fn rank1_assemble_even_xi_half_h_is_integral() {
        let f = Rank1Form {
            perm: IndexPermutation::identity(4),
            a: BigInt::one(),
            xi: vec![BigInt::from(2), BigInt::from(2), BigInt::from(0)],
            d: vec![rat(3, 1), rat(-1, 1), rat(4, 1)],
            h: rat(1, 2),
        };
        let m = f.assemble().unwrap();
        // tail (0,1) entry: h * 2 * 2 = 2.
        assert_eq!(m.entry(1, 2), &BigInt::from(2));
        // tail diagonal: d + h ξ² = 3 + 2 = 5.
        assert_eq!(m.entry(1, 1), &BigInt::from(5));
    }

    #[test]
    fn assemble_undoes_permutation() {
        // perm = [2, 0, 1]: canonical position 0 holds original index 2.
        let perm = IndexPermutation::new(vec![2, 0, 1]).unwrap();
        let f = Rank1Form {
            perm,
            a: BigInt::from(7),
            xi: vec![BigInt::from(1), BigInt::from(0)],
            d: vec![rat(4, 1), rat(6, 1)],
            h: Rational::zero(),
        };
        let m = f.assemble().unwrap();
        // Canonical (0,0) = 7 lands at original (2,2).
        assert_eq!(m.entry(2, 2), &BigInt::from(7));
        // Canonical (0,1) = ξ₀ = 1 lands at original (2,0).
        assert_eq!(m.entry(2, 0), &BigInt::from(1));
        assert_eq!(m.entry(0, 0), &BigInt::from(4));
        assert_eq!(m.entry(1, 1), &BigInt::from(6));
    }

    #[test]
    fn tail_scale_identifies_h_or_bails() {
        let xi = vec![BigInt::from(2), BigInt::from(3), BigInt::from(0)];
        // T[k][l] = 1 * ξ_k ξ_l off-diagonal.
        let h = solve_tail_scale(&xi, |k, l| &xi[k] * &xi[l]).unwrap();
        assert_eq!(h, Rational::one());
        // Single nonzero coordinate: no identifiable h, convention 0.
        let lone = vec![BigInt::from(5), BigInt::zero()];
        let h0 = solve_tail_scale(&lone, |_, _| BigInt::zero()).unwrap();
        assert!(h0.is_zero());
        // Inconsistent tail: entry where ξ product vanishes but T doesn't.
        let bad = solve_tail_scale(&xi, |k, l| if (k, l) == (1, 2) { BigInt::one() } else { BigInt::zero() });
        assert!(bad.is_none());
    }

    #[test]
    fn case22_assemble_matches_blocks() {
        let gamma = Matrix::from_fn(2, 2, |i, j| {
            if i == j { Rational::one() } else { Rational::zero() }
        });
        let c = Matrix::from_rows(vec![
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(2)],
            vec![BigInt::from(0), BigInt::from(1), BigInt::from(1)],
        ])
        .unwrap();
        let h = Matrix::from_fn(2, 2, |_, _| Rational::zero());
        let f = Rank2Form22 {
            perm: IndexPermutation::identity(5),
            a1: Matrix::from_fn(2, 2, |_, _| BigInt::zero()),
            gamma,
            c,
            h,
            h_underdetermined: false,
            d: vec![rat(1, 1), rat(2, 1), rat(3, 1)],
        };
        let m = f.assemble().unwrap();
        // ΓC = C: entry (0, 2+2) = c[0][2] = 2.
        assert_eq!(m.entry(0, 4), &BigInt::from(2));
        // Tail is diagonal since H = 0.
        assert_eq!(m.entry(2, 3), &BigInt::from(0));
        assert_eq!(m.entry(4, 4), &BigInt::from(3));
    }
}
