//! Local arithmetic of a quadratic form: unit-restricted exponential sums
//! over residue rings, the truncated singular series, and prime-power local
//! solution densities.
//!
//! Everything in this module is driven by one enumeration, the *unit
//! solution-count vector* of [`local_solution_counts`]:
//!
//! ```text
//! N_q[v] = #{ h in ((Z/q)^x)^n : h^T A h = v (mod q) },   v = 0, …, q−1.
//! ```
//!
//! From `N_q` the module derives, without further enumeration:
//!
//! * the Gauss-type sum `C(q, a) = Σ_h e(h^T A h · a/q)` over unit tuples
//!   ([`gauss_sum_direct`]), and its multiplicative assembly from prime-power
//!   factors ([`gauss_sum`]) via
//!   `C(q₁q₂, a) = C(q₁, a·q₂ mod q₁) · C(q₂, a·q₁ mod q₂)`
//!   for coprime `q₁, q₂` — the two evaluation routes cross-check each other;
//! * the series term `T(q) = φ(q)^{−n} Σ_{a unit} C(q, a) e(−a t/q)`, which
//!   collapses exactly to the rational number
//!   `φ(q)^{−n} Σ_v N_q[v] · c_q(v − t)` with `c_q` the Ramanujan sum
//!   ([`term_t`]); a floating-point evaluation of the defining double sum is
//!   kept as an independent oracle ([`term_t_direct`]);
//! * the local density `δ_q = q · φ(q)^{−n} · N_q[t mod q]`
//!   ([`local_density`]).
//!
//! The three are tied together by the exact divisor-sum identity
//!
//! ```text
//! Σ_{q | p^k} T(q) = δ_{p^k},
//! ```
//!
//! which holds *only* under the `φ(q)^{−n}` normalization and is therefore
//! the module's self-oracle for that normalization choice. The alternative
//! single-power normalization `φ(q)^{−1}` (seen in parts of the literature)
//! is exposed behind [`TermNormalization::PhiPowerOne`] for comparison; it
//! fails the identity for `n ≥ 2`, and tests document that failure.
//!
//! `T(q)` for fixed `t` is multiplicative in `q` (Chinese remaindering of
//! both the solution counts and the Ramanujan sums), so
//! [`singular_series_truncated`] enumerates only at prime powers and
//! assembles composite terms as products.
//!
//! Enumeration cost is `φ(q)^n` leaves plus a table of `q` slots; every
//! entry point checks that cost against a caller-supplied [`Budget`] before
//! starting. Enumerations are parallelized over the leading coordinate with
//! an order-independent integer reduction, so results are identical across
//! thread counts.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SymmetricIntMatrix;
use crate::{Budget, Complex64, ProblemInstance, Rational};

/// Largest exponent `k` used when a local density `δ_{p^k}` stands in for
/// the Euler factor at `p` in [`singular_series_truncated`]. Densities
/// stabilize in `k` once a nonsingular solution exists modulo `p` (Hensel
/// lifting), so small exponents already determine vanishing; larger ones
/// only burn budget.
pub const MAX_DENSITY_EXPONENT: u32 = 3;

/// Moduli are kept below 2^32 so all modular products fit in `u64`.
const MAX_MODULUS: u64 = u32::MAX as u64;

/// A complex number in a JSON-friendly shape (`{re, im}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

/// An evaluated Gauss-type sum `C(q, a)` together with its arguments.
///
/// `a` is stored reduced mod `q`. The magnitude is trivially bounded by
/// `φ(q)^n`, and `C(q, q − a)` is the complex conjugate of `C(q, a)`; the
/// implementation realizes that conjugation *exactly* (float equality, not
/// merely to tolerance) by building its phase table symmetrically. The one
/// bit it does not pin down is the sign of a ±0 imaginary part on
/// real-valued sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussSumValue {
    pub q: u64,
    pub a: u64,
    pub value: Complex64,
}

/// Which power of `φ(q)` divides the series term `T(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermNormalization {
    /// `φ(q)^{−n}`: the normalization under which `Σ_{q | p^k} T(q)` equals
    /// the local density `δ_{p^k}` exactly. Default everywhere.
    PhiPowerN,
    /// `φ(q)^{−1}`: single-power variant found in parts of the literature,
    /// exposed for side-by-side comparison only. Fails the divisor-sum
    /// identity for `n ≥ 2` and grows with `q`.
    PhiPowerOne,
}

/// One term `T(q)` of the truncated series, as reported by
/// [`singular_series_truncated`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub q: u64,
    pub value: ComplexValue,
}

/// One local density `δ_{p^k}` entry of the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalDensityEntry {
    pub p: u64,
    pub k: u32,
    pub modulus: u64,
    pub value: f64,
}

/// Truncated singular series: the terms `T(q)` for `q ≤ q_limit`, their
/// running sum, local densities at requested primes, and the Euler-product
/// estimate `∏_p δ_{p^{k_max(p)}}`.
///
/// All values are reported in `f64`, but every term and density is computed
/// in exact rational arithmetic first, so `product_estimate == 0.0` means
/// *exactly* zero (a genuine congruence obstruction), not underflow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSeriesReport {
    pub q_limit: u64,
    pub normalization: TermNormalization,
    pub terms: Vec<SeriesTerm>,
    pub partial_sum: f64,
    pub local_densities: Vec<LocalDensityEntry>,
    pub product_estimate: f64,
}

fn validate_modulus(q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidModulus {
            context: "modulus must be positive".into(),
        });
    }
    if q > MAX_MODULUS {
        return Err(Error::InvalidModulus {
            context: format!("modulus {q} exceeds 2^32; exact u64 reduction would overflow"),
        });
    }
    Ok(())
}

/// Prime factorization by trial division, smallest prime first.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Euler's totient `φ(q)`.
pub fn euler_phi(q: u64) -> u64 {
    factorize(q)
        .into_iter()
        .map(|(p, e)| (p - 1) * p.pow(e - 1))
        .product::<u64>()
        .max(1)
}

fn is_prime(p: u64) -> bool {
    p >= 2 && factorize(p).len() == 1 && factorize(p)[0].1 == 1
}

/// Möbius function from the factorization.
fn moebius(q: u64) -> i64 {
    let f = factorize(q);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Ramanujan sum `c_q(m) = Σ_{a unit mod q} e(a m / q)`, evaluated exactly
/// as `Σ_{d | gcd(m, q)} d · μ(q/d)`.
pub fn ramanujan_sum(q: u64, m: i64) -> i64 {
    let r = m.rem_euclid(q as i64) as u64;
    let g = r.gcd(&q); // gcd(0, q) = q covers m ≡ 0
    let mut sum = 0i64;
    let mut d = 1u64;
    while d * d <= g {
        if g % d == 0 {
            sum += d as i64 * moebius(q / d);
            let d2 = g / d;
            if d2 != d {
                sum += d2 as i64 * moebius(q / d2);
            }
        }
        d += 1;
    }
    sum
}

/// `c_q(r)` for every residue `r in 0..q`, sharing the per-divisor values
/// (the sum depends on `r` only through `gcd(r, q)`).
fn ramanujan_row(q: u64) -> Vec<i64> {
    let mut by_gcd: BTreeMap<u64, i64> = BTreeMap::new();
    (0..q)
        .map(|r| {
            let g = r.gcd(&q);
            *by_gcd
                .entry(g)
                .or_insert_with(|| ramanujan_sum(q, r as i64))
        })
        .collect()
}

/// Enumeration cost of a unit-tuple scan: `φ(q)^n` leaves plus `q` table
/// slots, saturating so oversize requests fail the budget check instead of
/// wrapping.
fn enumeration_cost(q: u64, n: usize) -> u128 {
    let phi = euler_phi(q) as u128;
    let mut leaves: u128 = 1;
    for _ in 0..n {
        leaves = leaves.saturating_mul(phi);
    }
    leaves.saturating_add(q as u128)
}

/// Depth-first scan over the remaining coordinates of a unit tuple.
///
/// `partial` is the form value contributed by coordinates `< level`;
/// `linear[j]` is `2 Σ_{i < level} A[i][j] h_i mod q`, the coefficient the
/// still-free coordinate `j` will see. Keeping that linear form updated
/// makes the work per leaf O(1) amortized instead of O(n²).
fn accumulate_counts(
    amod: &[Vec<u64>],
    units: &[u64],
    q: u64,
    level: usize,
    partial: u64,
    linear: &[u64],
    counts: &mut [u64],
) {
    let n = amod.len();
    if level == n - 1 {
        for &u in units {
            let diag = amod[level][level] * u % q * u % q;
            let lin = linear[level] * u % q;
            let v = ((partial + diag) % q + lin) % q;
            counts[v as usize] += 1;
        }
        return;
    }
    for &u in units {
        let diag = amod[level][level] * u % q * u % q;
        let lin = linear[level] * u % q;
        let new_partial = ((partial + diag) % q + lin) % q;
        let mut new_linear = linear.to_vec();
        for (j, slot) in new_linear.iter_mut().enumerate().skip(level + 1) {
            let add = 2 * amod[level][j] % q * u % q;
            *slot = (*slot + add) % q;
        }
        accumulate_counts(amod, units, q, level + 1, new_partial, &new_linear, counts);
    }
}

/// Counts `N_q[v] = #{h in ((Z/q)^x)^n : h^T A h ≡ v (mod q)}` for every
/// residue `v`, by exhaustive scan over unit tuples.
///
/// The scan costs `φ(q)^n` leaves and is parallelized over the first
/// coordinate; the per-branch count vectors are combined by plain integer
/// addition, so the result does not depend on thread scheduling. For `q = 1`
/// the single (all-zero) tuple counts once at `v = 0`.
pub fn local_solution_counts(
    a: &SymmetricIntMatrix,
    q: u64,
    budget: &Budget,
) -> Result<Vec<u64>> {
    validate_modulus(q)?;
    let n = a.n();
    budget.admit_modulus(q, enumeration_cost(q, n))?;

    let qi = BigInt::from(q);
    let amod: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.entry(i, j).mod_floor(&qi).to_u64().expect("reduced"))
                .collect()
        })
        .collect();
    let units: Vec<u64> = (0..q).filter(|x| x.gcd(&q) == 1).collect();

    if n == 1 {
        let mut counts = vec![0u64; q as usize];
        accumulate_counts(&amod, &units, q, 0, 0, &[0], &mut counts);
        return Ok(counts);
    }

    let counts = units
        .par_iter()
        .map(|&u0| {
            let mut local = vec![0u64; q as usize];
            let partial = amod[0][0] * u0 % q * u0 % q;
            let mut linear = vec![0u64; n];
            for (j, slot) in linear.iter_mut().enumerate().skip(1) {
                *slot = 2 * amod[0][j] % q * u0 % q;
            }
            accumulate_counts(&amod, &units, q, 1, partial, &linear, &mut local);
            local
        })
        .reduce(
            || vec![0u64; q as usize],
            |mut acc, branch| {
                for (slot, add) in acc.iter_mut().zip(branch) {
                    *slot += add;
                }
                acc
            },
        );
    Ok(counts)
}

/// Phase table `e(r/q)` for `r in 0..q`, built conjugate-symmetrically:
/// entries `r` and `q − r` are exact conjugates of one another, which makes
/// the conjugation symmetry `C(q, q−a) = conj C(q, a)` hold with exact
/// float equality rather than to a tolerance.
fn phase_table(q: u64) -> Vec<Complex64> {
    let mut table = vec![Complex64::new(1.0, 0.0); q as usize];
    for r in 1..=(q / 2) {
        if q == 2 * r {
            // e(1/2) = −1 exactly; from_polar would leave a stray ~1e−16
            // imaginary part that breaks exact conjugation.
            table[r as usize] = Complex64::new(-1.0, 0.0);
        } else {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * r as f64 / q as f64);
            table[r as usize] = z;
            table[(q - r) as usize] = z.conj();
        }
    }
    table
}

fn reduce_and_check_coprime(a: u64, q: u64) -> Result<u64> {
    let a = a % q;
    if a.gcd(&q) != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    Ok(a)
}

/// Assembles `C(q, a)` from the solution-count vector at modulus `q`.
fn gauss_sum_from_counts(counts: &[u64], q: u64, a: u64) -> Complex64 {
    let phases = phase_table(q);
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c != 0)
        .map(|(v, &c)| phases[(a * v as u64 % q) as usize] * c as f64)
        .sum()
}

/// Gauss-type sum `C(q, a) = Σ_{h unit tuple} e(h^T A h · a/q)`, evaluated
/// by a single enumeration at modulus `q`.
///
/// This is the semantically-direct route, kept as the cross-check oracle
/// for the multiplicative assembly in [`gauss_sum`].
pub fn gauss_sum_direct(
    a: &SymmetricIntMatrix,
    q: u64,
    multiplier: u64,
    budget: &Budget,
) -> Result<GaussSumValue> {
    validate_modulus(q)?;
    let m = reduce_and_check_coprime(multiplier, q)?;
    let counts = local_solution_counts(a, q, budget)?;
    Ok(GaussSumValue {
        q,
        a: m,
        value: gauss_sum_from_counts(&counts, q, m),
    })
}

/// Gauss-type sum `C(q, a)`, assembled multiplicatively over the prime-power
/// factorization of `q`:
///
/// ```text
/// C(q, a) = ∏_{p^e ‖ q} C(p^e, a · (q / p^e) mod p^e).
/// ```
///
/// Each factor costs `φ(p^e)^n` instead of the `φ(q)^n` a direct scan at `q`
/// would; [`gauss_sum_direct`] recomputes the same value the slow way and
/// serves as the oracle for this identity.
pub fn gauss_sum(
    a: &SymmetricIntMatrix,
    q: u64,
    multiplier: u64,
    budget: &Budget,
) -> Result<GaussSumValue> {
    validate_modulus(q)?;
    let m = reduce_and_check_coprime(multiplier, q)?;
    let mut value = Complex64::new(1.0, 0.0);
    for (p, e) in factorize(q) {
        let pe = p.pow(e);
        let twist = (m % pe) * (q / pe % pe) % pe;
        let counts = local_solution_counts(a, pe, budget)?;
        value *= gauss_sum_from_counts(&counts, pe, twist);
    }
    Ok(GaussSumValue { q, a: m, value })
}

fn phi_pow_n(q: u64, n: usize) -> BigInt {
    BigInt::from(euler_phi(q)).pow(n as u32)
}

/// Series term `T(q) = φ(q)^{−n} Σ_{a unit mod q} C(q, a) e(−a t/q)`,
/// evaluated *exactly*.
///
/// Interchanging the two sums collapses the inner one to a Ramanujan sum:
/// `T(q) = φ(q)^{−n} Σ_v N_q[v] · c_q(v − t)`, a rational number. This is
/// the primary evaluation route; [`term_t_direct`] computes the defining
/// double sum in floating point as an independent oracle.
pub fn term_t(inst: &ProblemInstance, q: u64, budget: &Budget) -> Result<Rational> {
    validate_modulus(q)?;
    let counts = local_solution_counts(&inst.a, q, budget)?;
    let row = ramanujan_row(q);
    let t_red = inst.t.rem_euclid(q as i64) as u64;
    let mut numerator = BigInt::zero();
    for (v, &c) in counts.iter().enumerate() {
        if c != 0 {
            let shift = (v as u64 + q - t_red) % q;
            numerator += BigInt::from(c) * BigInt::from(row[shift as usize]);
        }
    }
    Ok(Rational::new(numerator, phi_pow_n(q, inst.a.n())))
}

/// [`term_t`] under a caller-chosen normalization: `PhiPowerN` is `T(q)`
/// itself; `PhiPowerOne` rescales to `φ(q)^{n−1} · T(q)`, i.e. divides the
/// double sum by a single power of `φ(q)` only.
pub fn term_t_with_normalization(
    inst: &ProblemInstance,
    q: u64,
    normalization: TermNormalization,
    budget: &Budget,
) -> Result<Rational> {
    let base = term_t(inst, q, budget)?;
    Ok(match normalization {
        TermNormalization::PhiPowerN => base,
        TermNormalization::PhiPowerOne => {
            let scale = BigInt::from(euler_phi(q)).pow(inst.a.n() as u32 - 1);
            base * Rational::from_integer(scale)
        }
    })
}

/// Floating-point evaluation of the defining double sum of `T(q)`:
/// `φ(q)^{−n} Σ_{a unit} C(q, a) e(−a t/q)` with each `C(q, a)` assembled
/// from the count vector. Independent of the Ramanujan-sum algebra in
/// [`term_t`]; the imaginary part must come out negligible since the full
/// sum is real.
pub fn term_t_direct(inst: &ProblemInstance, q: u64, budget: &Budget) -> Result<Complex64> {
    validate_modulus(q)?;
    let counts = local_solution_counts(&inst.a, q, budget)?;
    let phi = euler_phi(q);
    budget.admit((phi as u128).saturating_mul(q as u128))?;
    let phases = phase_table(q);
    let t_red = inst.t.rem_euclid(q as i64) as u64;
    let mut sum = Complex64::new(0.0, 0.0);
    for a in (0..q).filter(|x| x.gcd(&q) == 1) {
        let c = gauss_sum_from_counts(&counts, q, a);
        let minus_at = (q - a * t_red % q) % q;
        sum += c * phases[minus_at as usize];
    }
    let norm = phi_pow_n(q, inst.a.n()).to_f64().unwrap_or(f64::INFINITY);
    Ok(sum / norm)
}

/// Local density `δ_{p^k} = p^k · φ(p^k)^{−n} · N_{p^k}[t mod p^k]` as an
/// exact rational. Requires `p` prime and `k ≥ 1`.
pub fn local_density_exact(
    inst: &ProblemInstance,
    p: u64,
    k: u32,
    budget: &Budget,
) -> Result<Rational> {
    if !is_prime(p) {
        return Err(Error::InvalidModulus {
            context: format!("local density needs a prime, got {p}"),
        });
    }
    if k == 0 {
        return Err(Error::InvalidModulus {
            context: "local density needs exponent k >= 1".into(),
        });
    }
    let q = p.checked_pow(k).ok_or_else(|| Error::InvalidModulus {
        context: format!("{p}^{k} overflows u64"),
    })?;
    let counts = local_solution_counts(&inst.a, q, budget)?;
    let t_red = inst.t.rem_euclid(q as i64) as u64;
    let hits = BigInt::from(counts[t_red as usize]);
    Ok(Rational::new(
        BigInt::from(q) * hits,
        phi_pow_n(q, inst.a.n()),
    ))
}

/// [`local_density_exact`] as `f64`; exact zeros stay exactly `0.0`.
pub fn local_density(inst: &ProblemInstance, p: u64, k: u32, budget: &Budget) -> Result<f64> {
    Ok(rational_to_f64(&local_density_exact(inst, p, k, budget)?))
}

fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        0.0
    } else {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

/// Largest exponent `k ≤ MAX_DENSITY_EXPONENT` whose density enumeration at
/// `p^k` fits the budget, if any.
fn feasible_exponent(p: u64, n: usize, budget: &Budget) -> Option<u32> {
    (1..=MAX_DENSITY_EXPONENT).rev().find(|&k| {
        p.checked_pow(k).is_some_and(|q| {
            q <= MAX_MODULUS && enumeration_cost(q, n) <= budget.max_iterations() as u128
        })
    })
}

/// Truncated singular series report: exact terms `T(q)` for all `q ≤
/// q_limit`, their partial sum, local densities `δ_{p^k}` for each requested
/// prime at every exponent up to the budget-feasible maximum (capped at
/// [`MAX_DENSITY_EXPONENT`]), and the product of the deepest densities as
/// the Euler-product estimate.
///
/// Terms at composite `q` are assembled multiplicatively from memoized
/// prime-power terms; only prime powers are ever enumerated.
pub fn singular_series_truncated(
    inst: &ProblemInstance,
    q_limit: u64,
    primes: &[u64],
    normalization: TermNormalization,
    budget: &Budget,
) -> Result<SingularSeriesReport> {
    if q_limit == 0 {
        return Err(Error::InvalidModulus {
            context: "truncation bound must be >= 1".into(),
        });
    }
    for &p in primes {
        if !is_prime(p) {
            return Err(Error::InvalidModulus {
                context: format!("requested prime {p} is not prime"),
            });
        }
    }
    let mut requested: Vec<u64> = primes.to_vec();
    requested.sort_unstable();
    requested.dedup();

    let n = inst.a.n();
    let mut prime_power_terms: BTreeMap<u64, Rational> = BTreeMap::new();
    let mut terms = Vec::with_capacity(q_limit as usize);
    let mut partial = Rational::zero();
    for q in 1..=q_limit {
        let mut t_q = Rational::one();
        for (p, e) in factorize(q) {
            let pe = p.pow(e);
            let factor = match prime_power_terms.get(&pe) {
                Some(v) => v.clone(),
                None => {
                    let v = term_t(inst, pe, budget)?;
                    prime_power_terms.insert(pe, v.clone());
                    v
                }
            };
            t_q *= factor;
        }
        if normalization == TermNormalization::PhiPowerOne {
            t_q *= Rational::from_integer(BigInt::from(euler_phi(q)).pow(n as u32 - 1));
        }
        partial += &t_q;
        terms.push(SeriesTerm {
            q,
            value: ComplexValue {
                re: rational_to_f64(&t_q),
                im: 0.0,
            },
        });
    }

    let mut local_densities = Vec::new();
    let mut product = Rational::one();
    for &p in &requested {
        let k_max = match feasible_exponent(p, n, budget) {
            Some(k) => k,
            // Even k = 1 is over budget: surface the precise admission error.
            None => return Err(local_density_exact(inst, p, 1, budget).unwrap_err()),
        };
        for k in 1..=k_max {
            let delta = local_density_exact(inst, p, k, budget)?;
            local_densities.push(LocalDensityEntry {
                p,
                k,
                modulus: p.pow(k),
                value: rational_to_f64(&delta),
            });
            if k == k_max {
                product *= &delta;
            }
        }
    }

    Ok(SingularSeriesReport {
        q_limit,
        normalization,
        terms,
        partial_sum: rational_to_f64(&partial),
        local_densities,
        product_estimate: if requested.is_empty() {
            1.0
        } else {
            rational_to_f64(&product)
        },
    })
}
