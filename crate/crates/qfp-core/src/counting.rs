//! Exact enumeration engines for the global counting problems: weighted
//! solution counts of `x^T A x = t` over prime-power boxes, bilinear and
//! paired counting systems, an exact pair-to-lattice injection check, and
//! growth-exponent fits.
//!
//! The central counter, [`count_solutions`], never enumerates the full box:
//! with all but one coordinate fixed, the constraint is a quadratic (or
//! linear, or vacuous) equation in the remaining coordinate, solved exactly
//! in integers — discriminants through an exact integer square root,
//! divisibility checked before dividing. That turns `O(P^n)` work into
//! `O(P^{n-1})`, where `P` is the number of prime powers up to `X`. A naive
//! full-enumeration oracle ([`count_solutions_naive`]) is kept public so
//! tests and the verification harness can compare the two routes exactly.
//!
//! Counting conventions, fixed across the module:
//!
//! * solution coordinates are *prime powers* `p^e ≤ X` (so `2, 3, 4, 5, 7,
//!   8, 9, …`), and three weightings accumulate in one pass: the von
//!   Mangoldt product `Σ Λ(x₁)⋯Λ(xₙ)`, the raw tuple count, and the count
//!   of tuples whose coordinates are all prime;
//! * bilinear and paired systems ([`count_bilinear`],
//!   [`count_paired_system`]) run over plain integer boxes — `[1, X]` or the
//!   symmetric `[−X, X]` — selected by an explicit [`BoxKind`], because the
//!   pair-to-lattice injection is exact only with the enlarged symmetric
//!   box;
//! * every enumeration estimates its leaf count up front and checks it
//!   against the caller's [`Budget`].
//!
//! Floating-point weights are accumulated in a fixed order (coordinate-
//! lexicographic within each leading-coordinate branch, branches combined
//! in value order), so results are identical across thread counts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mangoldt::VonMangoldtTable;
use crate::matrix::Matrix;
use crate::{Budget, ProblemInstance, Rational, RationalMatrix};

/// Weighted and unweighted solution counts of `x^T A x = t` over the
/// prime-power box `[2, X]^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    /// Box bound.
    pub x: u64,
    /// `Σ Λ(x₁)⋯Λ(xₙ)` over solutions.
    pub lambda_weighted: f64,
    /// Number of solutions (ordered tuples of prime powers).
    pub unit_count: u64,
    /// Number of solutions with every coordinate prime.
    pub prime_only_count: u64,
}

/// Coordinate range for the integer-box counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoxKind {
    /// `1 ≤ x_i ≤ X`.
    Positive,
    /// `−X ≤ x_i ≤ X`, zero included.
    Symmetric,
}

impl BoxKind {
    fn values(self, x: u64) -> Vec<i64> {
        match self {
            BoxKind::Positive => (1..=x as i64).collect(),
            BoxKind::Symmetric => (-(x as i64)..=x as i64).collect(),
        }
    }

    fn cardinality(self, x: u64) -> u128 {
        match self {
            BoxKind::Positive => x as u128,
            BoxKind::Symmetric => 2 * x as u128 + 1,
        }
    }

    fn contains(self, v: i128, x: u64) -> bool {
        match self {
            BoxKind::Positive => v >= 1 && v <= x as i128,
            BoxKind::Symmetric => v.unsigned_abs() <= x as u128,
        }
    }
}

/// A bilinear counting system: pairs `(x, y)` with `x^T C y = 0` and,
/// optionally, `x^T H = 0` column-wise, both coordinates ranging over the
/// same box.
#[derive(Debug, Clone)]
pub struct BilinearSystem {
    pub c: RationalMatrix,
    pub h: Option<RationalMatrix>,
    pub box_kind: BoxKind,
}

impl BilinearSystem {
    pub fn new(c: RationalMatrix, h: Option<RationalMatrix>, box_kind: BoxKind) -> Result<Self> {
        if c.rows() == 0 || c.cols() == 0 {
            return Err(Error::DimensionMismatch {
                context: "bilinear system needs a nonempty coefficient matrix".into(),
            });
        }
        if let Some(ref h) = h {
            if h.rows() != c.rows() {
                return Err(Error::DimensionMismatch {
                    context: format!(
                        "linear-constraint matrix has {} rows, coefficient matrix has {}",
                        h.rows(),
                        c.rows()
                    ),
                });
            }
        }
        Ok(BilinearSystem { c, h, box_kind })
    }
}

/// Result of the exact pair-to-lattice injection check: `lhs` counts pairs
/// `(x, y) ∈ [1, X]^{2n}` with `x^T C x = y^T C y` and `x^T H = y^T H`;
/// `rhs` counts `(v, u) ∈ [−2X, 2X]^{2n}` with `v^T C u = 0` and
/// `v^T H = 0`. The substitution `(u, v) = (x + y, x − y)` is injective and
/// maps the first set into the second, so `holds` must always be true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InjectionReport {
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

/// One sample of a growth fit, with its logs (as used in the regression and
/// in CSV output).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePoint {
    pub x: f64,
    pub count: f64,
    pub log_x: f64,
    pub log_count: f64,
}

/// Least-squares fit of `log count` against `log X`, compared with a
/// predicted exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub samples: Vec<SamplePoint>,
    pub slope: f64,
    pub predicted_exponent: f64,
    /// `|slope − predicted_exponent|`.
    pub deviation: f64,
}

fn widen(m: &Matrix<i64>) -> Vec<Vec<i128>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)] as i128).collect())
        .collect()
}

/// Clears denominators of a rational matrix by the global lcm; the zero
/// sets of `x^T C y` and of every column constraint are unchanged.
fn scale_to_int(m: &RationalMatrix) -> Result<Matrix<i128>> {
    let mut l = BigInt::one();
    for v in m.iter() {
        l = l.lcm(v.denom());
    }
    let lr = Rational::from_integer(l);
    let mut rows = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut row = Vec::with_capacity(m.cols());
        for j in 0..m.cols() {
            let scaled = (&m[(i, j)] * &lr).to_integer();
            row.push(scaled.to_i128().ok_or_else(|| Error::InternalInconsistency {
                context: "scaled rational entry exceeds i128".into(),
            })?);
        }
        rows.push(row);
    }
    Matrix::from_rows(rows)
}

fn isqrt_u128(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut r = (v as f64).sqrt() as u128;
    while r.checked_mul(r).map_or(true, |rr| rr > v) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|rr| rr <= v) {
        r += 1;
    }
    r
}

/// Three-weighting accumulator; `lambda` is summed in enumeration order.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    unit: u64,
    lambda: f64,
    prime_only: u64,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.unit += other.unit;
        self.lambda += other.lambda;
        self.prime_only += other.prime_only;
    }
}

struct SolveContext<'t> {
    a: Vec<Vec<i128>>,
    t: i128,
    x: u64,
    solve_idx: usize,
    enum_idx: Vec<usize>,
    table: &'t VonMangoldtTable,
}

impl SolveContext<'_> {
    /// Accepts `root` as the solved coordinate if it is a prime power in
    /// the box, folding in the prefix weights.
    fn accept(&self, root: i128, prefix_lambda: f64, prefix_all_prime: bool, tally: &mut Tally) {
        if root < 2 || root > self.x as i128 {
            return;
        }
        let r = root as u64;
        if !self.table.is_prime_power(r) {
            return;
        }
        tally.unit += 1;
        tally.lambda += prefix_lambda * self.table.lambda(r);
        if prefix_all_prime && self.table.is_prime(r) {
            tally.prime_only += 1;
        }
    }

    /// Solves for the remaining coordinate given the enumerated prefix in
    /// `vals` and accumulates every admissible completion.
    fn solve_leaf(&self, vals: &[i128], tally: &mut Tally) {
        let s = self.solve_idx;
        let mut prefix_lambda = 1.0;
        let mut prefix_all_prime = true;
        for &i in &self.enum_idx {
            let v = vals[i] as u64;
            prefix_lambda *= self.table.lambda(v);
            prefix_all_prime &= self.table.is_prime(v);
        }
        // x^T A x = t with x_s unknown: quad·x_s² + lin·x_s + rest = t.
        let quad = self.a[s][s];
        let mut lin: i128 = 0;
        let mut rest: i128 = 0;
        for &i in &self.enum_idx {
            lin += 2 * self.a[i][s] * vals[i];
            for &j in &self.enum_idx {
                rest += self.a[i][j] * vals[i] * vals[j];
            }
        }
        let target = self.t - rest;
        if quad != 0 {
            // quad·r² + lin·r − target = 0
            let disc = lin * lin + 4 * quad * target;
            if disc < 0 {
                return;
            }
            let sq = isqrt_u128(disc as u128);
            if sq * sq != disc as u128 {
                return;
            }
            let sq = sq as i128;
            for num in [-lin + sq, -lin - sq] {
                if num % (2 * quad) == 0 {
                    self.accept(num / (2 * quad), prefix_lambda, prefix_all_prime, tally);
                }
                if sq == 0 {
                    break; // double root: count once
                }
            }
        } else if lin != 0 {
            if target % lin == 0 {
                self.accept(target / lin, prefix_lambda, prefix_all_prime, tally);
            }
        } else if target == 0 {
            // Coordinate is unconstrained: every prime power completes the
            // prefix, so fold the whole column in bulk.
            tally.unit += self.table.prime_powers().len() as u64;
            tally.lambda += prefix_lambda * self.table.psi();
            if prefix_all_prime {
                tally.prime_only += self.table.primes().len() as u64;
            }
        }
    }

    /// Depth-first enumeration of the prefix positions `enum_idx[from..]`.
    fn enumerate(&self, from: usize, vals: &mut Vec<i128>, tally: &mut Tally) {
        if from == self.enum_idx.len() {
            self.solve_leaf(vals, tally);
            return;
        }
        let idx = self.enum_idx[from];
        for &pp in self.table.prime_powers() {
            vals[idx] = pp as i128;
            self.enumerate(from + 1, vals, tally);
        }
    }
}

/// Counts solutions of `x^T A x = t` with every coordinate a prime power in
/// `[2, X]`, accumulating all three weightings in one pass.
///
/// One coordinate — the highest-indexed one with a nonzero diagonal
/// coefficient, or the last coordinate if the diagonal vanishes — is solved
/// exactly rather than enumerated. Enumeration is parallelized over the
/// first enumerated coordinate; branch results are combined in value order,
/// so the floating-point weight is reproducible bit-for-bit.
pub fn count_solutions(inst: &ProblemInstance, x: u64, budget: &Budget) -> Result<CountResult> {
    let n = inst.a.n();
    let a = widen(&inst.a.to_i64()?);
    let table = VonMangoldtTable::new(x);
    let p = table.prime_powers().len() as u128;
    budget.admit((x as u128).saturating_add(p.saturating_pow(n as u32 - 1)))?;

    let solve_idx = (0..n).rev().find(|&i| a[i][i] != 0).unwrap_or(n - 1);
    let enum_idx: Vec<usize> = (0..n).filter(|&i| i != solve_idx).collect();
    let ctx = SolveContext {
        a,
        t: inst.t as i128,
        x,
        solve_idx,
        enum_idx,
        table: &table,
    };

    let mut total = Tally::default();
    if ctx.enum_idx.is_empty() {
        ctx.solve_leaf(&vec![0i128; n], &mut total);
    } else {
        let first = ctx.enum_idx[0];
        let branches: Vec<Tally> = table
            .prime_powers()
            .par_iter()
            .map(|&pp| {
                let mut vals = vec![0i128; n];
                vals[first] = pp as i128;
                let mut tally = Tally::default();
                ctx.enumerate(1, &mut vals, &mut tally);
                tally
            })
            .collect();
        for b in branches {
            total.absorb(b);
        }
    }
    Ok(CountResult {
        x,
        lambda_weighted: total.lambda,
        unit_count: total.unit,
        prime_only_count: total.prime_only,
    })
}

/// Full-enumeration oracle for [`count_solutions`]: every coordinate is
/// enumerated and the form evaluated from scratch. Exponentially slower;
/// exists so the solving route has an independent ground truth.
pub fn count_solutions_naive(
    inst: &ProblemInstance,
    x: u64,
    budget: &Budget,
) -> Result<CountResult> {
    let n = inst.a.n();
    let a = widen(&inst.a.to_i64()?);
    let table = VonMangoldtTable::new(x);
    let pps = table.prime_powers();
    let p = pps.len() as u128;
    budget.admit((x as u128).saturating_add(p.saturating_pow(n as u32)))?;

    let mut total = Tally::default();
    let mut idx = vec![0usize; n];
    if pps.is_empty() {
        return Ok(CountResult {
            x,
            lambda_weighted: 0.0,
            unit_count: 0,
            prime_only_count: 0,
        });
    }
    loop {
        let vals: Vec<i128> = idx.iter().map(|&i| pps[i] as i128).collect();
        let mut form: i128 = 0;
        for i in 0..n {
            for j in 0..n {
                form += a[i][j] * vals[i] * vals[j];
            }
        }
        if form == inst.t as i128 {
            total.unit += 1;
            let mut lam = 1.0;
            let mut all_prime = true;
            for &v in &vals {
                lam *= table.lambda(v as u64);
                all_prime &= table.is_prime(v as u64);
            }
            total.lambda += lam;
            if all_prime {
                total.prime_only += 1;
            }
        }
        // lexicographic odometer
        let mut level = n;
        let mut done = true;
        while level > 0 {
            level -= 1;
            idx[level] += 1;
            if idx[level] < pps.len() {
                done = false;
                break;
            }
            idx[level] = 0;
        }
        if done {
            break;
        }
    }
    Ok(CountResult {
        x,
        lambda_weighted: total.lambda,
        unit_count: total.unit,
        prime_only_count: total.prime_only,
    })
}

/// Counts `(x, y)` with `x ∈ box^n`, `y ∈ box^k`, `x^T C y = 0`, and
/// `x^T H = 0` for every column of `H`.
///
/// `x` is enumerated (filtered by the `H` constraints); for each admissible
/// `x` the vector `w = C^T x` is formed and `y` is counted by solving its
/// last `w`-supported coordinate, or in bulk (`|box|^k`) when `w = 0`.
pub fn count_bilinear(sys: &BilinearSystem, x: u64, budget: &Budget) -> Result<u64> {
    let ci = scale_to_int(&sys.c)?;
    let hi = sys.h.as_ref().map(scale_to_int).transpose()?;
    let n = ci.rows();
    let k = ci.cols();
    let bc = sys.box_kind.cardinality(x);
    budget.admit(
        bc.saturating_pow(n as u32)
            .saturating_mul(bc.saturating_pow(k as u32 - 1)),
    )?;
    let values = sys.box_kind.values(x);
    let bulk_y = bc.saturating_pow(k as u32);

    let count: u128 = values
        .par_iter()
        .map(|&x0| {
            let mut local: u128 = 0;
            let mut xs = vec![0i128; n];
            xs[0] = x0 as i128;
            enumerate_x(
                &ci,
                hi.as_ref(),
                &values,
                sys.box_kind,
                x,
                bulk_y,
                &mut xs,
                1,
                &mut local,
            );
            local
        })
        .sum();
    count
        .try_into()
        .map_err(|_| Error::InternalInconsistency {
            context: "bilinear count exceeds u64".into(),
        })
}

#[allow(clippy::too_many_arguments)]
fn enumerate_x(
    ci: &Matrix<i128>,
    hi: Option<&Matrix<i128>>,
    values: &[i64],
    box_kind: BoxKind,
    x: u64,
    bulk_y: u128,
    xs: &mut Vec<i128>,
    from: usize,
    count: &mut u128,
) {
    let n = ci.rows();
    if from == n {
        if let Some(h) = hi {
            for c in 0..h.cols() {
                let dot: i128 = (0..n).map(|i| h[(i, c)] * xs[i]).sum();
                if dot != 0 {
                    return;
                }
            }
        }
        *count += count_y_for_x(ci, xs, values, box_kind, x, bulk_y);
        return;
    }
    for &v in values {
        xs[from] = v as i128;
        enumerate_x(ci, hi, values, box_kind, x, bulk_y, xs, from + 1, count);
    }
}

/// Counts `y ∈ box^k` with `w^T y = 0` for `w = C^T x`, solving the last
/// coordinate carried by `w` and enumerating the rest.
fn count_y_for_x(
    ci: &Matrix<i128>,
    xs: &[i128],
    values: &[i64],
    box_kind: BoxKind,
    x: u64,
    bulk_y: u128,
) -> u128 {
    let n = ci.rows();
    let k = ci.cols();
    let w: Vec<i128> = (0..k)
        .map(|j| (0..n).map(|i| ci[(i, j)] * xs[i]).sum())
        .collect();
    let Some(pivot) = (0..k).rev().find(|&j| w[j] != 0) else {
        return bulk_y;
    };
    let free: Vec<usize> = (0..k).filter(|&j| j != pivot).collect();
    let mut count: u128 = 0;
    let mut ys = vec![0i128; k];
    let mut idx = vec![0usize; free.len()];
    loop {
        for (pos, &j) in free.iter().enumerate() {
            ys[j] = values[idx[pos]] as i128;
        }
        let s: i128 = free.iter().map(|&j| w[j] * ys[j]).sum();
        if s % w[pivot] == 0 && box_kind.contains(-s / w[pivot], x) {
            count += 1;
        }
        let mut level = free.len();
        let mut done = true;
        while level > 0 {
            level -= 1;
            idx[level] += 1;
            if idx[level] < values.len() {
                done = false;
                break;
            }
            idx[level] = 0;
        }
        if done {
            break;
        }
    }
    count
}

fn require_symmetric(c: &RationalMatrix) -> Result<()> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch {
            context: format!("paired system needs a square matrix, got {}x{}", c.rows(), c.cols()),
        });
    }
    for i in 0..c.rows() {
        for j in (i + 1)..c.cols() {
            if c[(i, j)] != c[(j, i)] {
                return Err(Error::NotSymmetric {
                    i,
                    j,
                    aij: c[(i, j)].to_string(),
                    aji: c[(j, i)].to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Signature map shared by the paired counters: groups every `x` in the
/// range by the exact value vector `(x^T C x, x^T H)` and accumulates unit
/// and weighted mass per class. Pairs with equal signatures are then
/// `Σ (class mass)²`.
fn paired_classes(
    ci: &Matrix<i128>,
    hi: Option<&Matrix<i128>>,
    coords: &[(i128, f64)],
    n: usize,
) -> BTreeMap<Vec<i128>, (u64, f64)> {
    let m = hi.map_or(0, |h| h.cols());
    let mut classes: BTreeMap<Vec<i128>, (u64, f64)> = BTreeMap::new();
    let mut idx = vec![0usize; n];
    loop {
        let mut key = Vec::with_capacity(1 + m);
        let mut form: i128 = 0;
        for i in 0..n {
            let (vi, _) = coords[idx[i]];
            for j in 0..n {
                form += ci[(i, j)] * vi * coords[idx[j]].0;
            }
        }
        key.push(form);
        if let Some(h) = hi {
            for c in 0..m {
                key.push((0..n).map(|i| h[(i, c)] * coords[idx[i]].0).sum());
            }
        }
        let weight: f64 = idx.iter().map(|&v| coords[v].1).product();
        let entry = classes.entry(key).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += weight;
        let mut level = n;
        let mut done = true;
        while level > 0 {
            level -= 1;
            idx[level] += 1;
            if idx[level] < coords.len() {
                done = false;
                break;
            }
            idx[level] = 0;
        }
        if done {
            break;
        }
    }
    classes
}

/// Exact unit-mode paired count: pairs `(x, y) ∈ [1, X]^{2n}` of plain
/// integer tuples with `x^T C x = y^T C y` and `x^T H = y^T H`.
pub fn count_paired_unit_exact(
    c: &RationalMatrix,
    h: Option<&RationalMatrix>,
    x: u64,
    budget: &Budget,
) -> Result<u64> {
    require_symmetric(c)?;
    let ci = scale_to_int(c)?;
    let hi = h.map(scale_to_int).transpose()?;
    let n = ci.rows();
    budget.admit((x as u128).saturating_pow(n as u32))?;
    let coords: Vec<(i128, f64)> = (1..=x as i128).map(|v| (v, 1.0)).collect();
    if coords.is_empty() {
        return Ok(0);
    }
    let classes = paired_classes(&ci, hi.as_ref(), &coords, n);
    let total: u128 = classes.values().map(|&(c, _)| c as u128 * c as u128).sum();
    total.try_into().map_err(|_| Error::InternalInconsistency {
        context: "paired count exceeds u64".into(),
    })
}

/// Paired count over `[1, X]^{2n}`: pairs `(x, y)` with `x^T C x = y^T C y`
/// and `x^T H = y^T H`.
///
/// Unit mode counts plain integer tuples. Weighted mode restricts every
/// coordinate to prime powers and weights each tuple by `Λ(x₁)⋯Λ(xₙ)`, so
/// the result is `Σ_class (Σ_x Λ-product)²`.
pub fn count_paired_system(
    c: &RationalMatrix,
    h: Option<&RationalMatrix>,
    x: u64,
    weighted: bool,
    budget: &Budget,
) -> Result<f64> {
    if !weighted {
        return Ok(count_paired_unit_exact(c, h, x, budget)? as f64);
    }
    require_symmetric(c)?;
    let ci = scale_to_int(c)?;
    let hi = h.map(scale_to_int).transpose()?;
    let n = ci.rows();
    let table = VonMangoldtTable::new(x);
    let pps = table.prime_powers();
    budget.admit((x as u128).saturating_add((pps.len() as u128).saturating_pow(n as u32)))?;
    let coords: Vec<(i128, f64)> = pps
        .iter()
        .map(|&v| (v as i128, table.lambda(v)))
        .collect();
    if coords.is_empty() {
        return Ok(0.0);
    }
    let classes = paired_classes(&ci, hi.as_ref(), &coords, n);
    Ok(classes.values().map(|&(_, w)| w * w).sum())
}

/// Checks the exact pair-to-lattice injection: the number of equal-signature
/// pairs in `[1, X]^{2n}` is at most the number of `(v, u)` in the symmetric
/// box `[−2X, 2X]^{2n}` with `v^T C u = 0` and `v^T H = 0`, via
/// `(x, y) ↦ (x + y, x − y)`.
pub fn verify_lemma33_injection(
    c: &RationalMatrix,
    h: Option<&RationalMatrix>,
    x: u64,
    budget: &Budget,
) -> Result<InjectionReport> {
    require_symmetric(c)?;
    let lhs = count_paired_unit_exact(c, h, x, budget)?;
    let sys = BilinearSystem::new(c.clone(), h.cloned(), BoxKind::Symmetric)?;
    let rhs = count_bilinear(&sys, 2 * x, budget)?;
    Ok(InjectionReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Least-squares slope of `log count` against `log X`.
///
/// Needs at least three samples with strictly increasing positive `X` and
/// positive counts; anything else is [`Error::DegenerateSamples`].
pub fn growth_exponent_fit(samples: &[(f64, f64)], predicted: f64) -> Result<GrowthFit> {
    if samples.len() < 3 {
        return Err(Error::DegenerateSamples {
            reason: format!("need at least 3 samples, got {}", samples.len()),
        });
    }
    for w in samples.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::DegenerateSamples {
                reason: "sample bounds must be strictly increasing".into(),
            });
        }
    }
    if samples.iter().any(|&(x, c)| x <= 0.0 || c <= 0.0) {
        return Err(Error::DegenerateSamples {
            reason: "sample bounds and counts must be positive".into(),
        });
    }
    let points: Vec<SamplePoint> = samples
        .iter()
        .map(|&(x, count)| SamplePoint {
            x,
            count,
            log_x: x.ln(),
            log_count: count.ln(),
        })
        .collect();
    let m = points.len() as f64;
    let mean_x: f64 = points.iter().map(|p| p.log_x).sum::<f64>() / m;
    let mean_c: f64 = points.iter().map(|p| p.log_count).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.log_x - mean_x).powi(2)).sum();
    let sxc: f64 = points
        .iter()
        .map(|p| (p.log_x - mean_x) * (p.log_count - mean_c))
        .sum();
    let slope = sxc / sxx;
    Ok(GrowthFit {
        samples: points,
        slope,
        predicted_exponent: predicted,
        deviation: (slope - predicted).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymmetricIntMatrix;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: Vec<Vec<i64>>) -> SymmetricIntMatrix {
        SymmetricIntMatrix::from_i64_rows(rows).unwrap()
    }

    fn rat(v: i64) -> Rational {
        Rational::from_integer(BigInt::from(v))
    }

    fn rational_matrix(rows: Vec<Vec<(i64, i64)>>) -> RationalMatrix {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
                        .collect()
                })
                .collect(),
        )
        .unwrap()
    }

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn counts_two_squares_example() {
        let inst = ProblemInstance::new(sym(vec![vec![1, 0], vec![0, 1]]), 8);
        let r = count_solutions(&inst, 10, &budget()).unwrap();
        assert_eq!(r.unit_count, 1); // (2, 2)
        assert_eq!(r.prime_only_count, 1);
        let log2 = 2f64.ln();
        assert!((r.lambda_weighted - log2 * log2).abs() < 1e-12);
    }

    #[test]
    fn counts_hyperbolic_example() {
        let inst = ProblemInstance::new(sym(vec![vec![0, 1], vec![1, 0]]), 12);
        let r = count_solutions(&inst, 10, &budget()).unwrap();
        assert_eq!(r.unit_count, 2); // (2,3) and (3,2)
        assert_eq!(r.prime_only_count, 2);
        let expected = 2.0 * 2f64.ln() * 3f64.ln();
        assert!((r.lambda_weighted - expected).abs() < 1e-12);
    }

    #[test]
    fn unconstrained_coordinate_counts_in_bulk() {
        // Zero form, t = 0: every prime-power pair solves it.
        let inst = ProblemInstance::new(sym(vec![vec![0, 0], vec![0, 0]]), 0);
        let r = count_solutions(&inst, 10, &budget()).unwrap();
        let table = VonMangoldtTable::new(10);
        let p = table.prime_powers().len() as u64;
        assert_eq!(r.unit_count, p * p); // {2,3,4,5,7,8,9}²
        assert_eq!(r.prime_only_count, (table.primes().len() as u64).pow(2));
        let psi = table.psi();
        assert!((r.lambda_weighted - psi * psi).abs() < 1e-9 * psi * psi);
        // ... and an unsatisfiable target counts nothing.
        let none = count_solutions(&ProblemInstance::new(sym(vec![vec![0, 0], vec![0, 0]]), 3), 10, &budget()).unwrap();
        assert_eq!(none.unit_count, 0);
        assert_eq!(none.lambda_weighted, 0.0);
    }

    #[test]
    fn solver_matches_naive_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(90210);
        for case in 0..40 {
            let n = 2 + (case % 2);
            let mut rows = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-3..=3);
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
            }
            let a = sym(rows);
            let t = rng.gen_range(-40..=60);
            let x = [10u64, 20, 30][case % 3];
            let inst = ProblemInstance::new(a, t);
            let fast = count_solutions(&inst, x, &budget()).unwrap();
            let slow = count_solutions_naive(&inst, x, &budget()).unwrap();
            assert_eq!(fast.unit_count, slow.unit_count, "case {case}");
            assert_eq!(fast.prime_only_count, slow.prime_only_count, "case {case}");
            assert!(
                (fast.lambda_weighted - slow.lambda_weighted).abs()
                    <= 1e-9 * (1.0 + slow.lambda_weighted.abs()),
                "case {case}: {} vs {}",
                fast.lambda_weighted,
                slow.lambda_weighted
            );
            // Weight-bound invariant: λ-mass per solution is at most (log X)^n.
            let cap = (x as f64).ln().powi(n as i32) * fast.unit_count as f64;
            assert!(fast.lambda_weighted <= cap + 1e-9);
        }
    }

    #[test]
    fn five_squares_example_matches_oracle() {
        let inst = ProblemInstance::new(SymmetricIntMatrix::identity(5), 53);
        let fast = count_solutions(&inst, 10, &budget()).unwrap();
        let slow = count_solutions_naive(&inst, 10, &budget()).unwrap();
        assert_eq!(fast.unit_count, slow.unit_count);
        assert!(fast.unit_count > 0); // e.g. (2,2,2,4,5) and permutations
    }

    #[test]
    fn count_solutions_respects_budget() {
        let inst = ProblemInstance::new(SymmetricIntMatrix::identity(5), 53);
        assert!(matches!(
            count_solutions(&inst, 10, &Budget::new(100)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn bilinear_free_system_counts_whole_box() {
        let c = rational_matrix(vec![vec![(0, 1), (0, 1)], vec![(0, 1), (0, 1)]]);
        let sys = BilinearSystem::new(c, None, BoxKind::Positive).unwrap();
        assert_eq!(count_bilinear(&sys, 3, &budget()).unwrap(), 81);
    }

    #[test]
    fn bilinear_hyperbolic_pinned_value() {
        let c = rational_matrix(vec![vec![(1, 1), (0, 1)], vec![(0, 1), (-1, 1)]]);
        let sys = BilinearSystem::new(c, None, BoxKind::Positive).unwrap();
        // pairs with x1·y1 = x2·y2 in [1,4]^4
        assert_eq!(count_bilinear(&sys, 4, &budget()).unwrap(), 32);
    }

    #[test]
    fn bilinear_positive_box_excludes_zero() {
        let c = rational_matrix(vec![vec![(1, 1)]]);
        let sys = BilinearSystem::new(c, None, BoxKind::Positive).unwrap();
        assert_eq!(count_bilinear(&sys, 10, &budget()).unwrap(), 0);
        let sym_sys = BilinearSystem::new(
            rational_matrix(vec![vec![(1, 1)]]),
            None,
            BoxKind::Symmetric,
        )
        .unwrap();
        // x·y = 0 in [−2,2]²: x = 0 row (5) plus y = 0 column (5) minus the origin.
        assert_eq!(count_bilinear(&sym_sys, 2, &budget()).unwrap(), 9);
    }

    #[test]
    fn bilinear_matches_naive_double_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        for case in 0..12 {
            let n = 1 + (case % 2);
            let k = 1 + ((case / 2) % 2);
            let c = Matrix::from_fn(n, k, |_, _| {
                Rational::new(BigInt::from(rng.gen_range(-2i64..=2)), BigInt::from(rng.gen_range(1i64..=2)))
            });
            let box_kind = if case % 3 == 0 { BoxKind::Symmetric } else { BoxKind::Positive };
            let x = 4u64;
            let sys = BilinearSystem::new(c.clone(), None, box_kind).unwrap();
            let fast = count_bilinear(&sys, x, &budget()).unwrap();
            // naive reference
            let values = box_kind.values(x);
            let mut slow = 0u64;
            let mut xs = vec![0i64; n];
            let mut ys = vec![0i64; k];
            let mut xi = vec![0usize; n];
            'outer: loop {
                for i in 0..n {
                    xs[i] = values[xi[i]];
                }
                let mut yi = vec![0usize; k];
                loop {
                    for j in 0..k {
                        ys[j] = values[yi[j]];
                    }
                    let mut dot = Rational::zero();
                    for i in 0..n {
                        for j in 0..k {
                            dot += &c[(i, j)] * Rational::from_integer(BigInt::from(xs[i] * ys[j]));
                        }
                    }
                    if dot.is_zero() {
                        slow += 1;
                    }
                    let mut lv = k;
                    let mut done = true;
                    while lv > 0 {
                        lv -= 1;
                        yi[lv] += 1;
                        if yi[lv] < values.len() {
                            done = false;
                            break;
                        }
                        yi[lv] = 0;
                    }
                    if done {
                        break;
                    }
                }
                let mut lv = n;
                let mut done = true;
                while lv > 0 {
                    lv -= 1;
                    xi[lv] += 1;
                    if xi[lv] < values.len() {
                        done = false;
                        break;
                    }
                    xi[lv] = 0;
                }
                if done {
                    break 'outer;
                }
            }
            assert_eq!(fast, slow, "case {case}");
        }
    }

    #[test]
    fn bilinear_transpose_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(31337);
        for _ in 0..8 {
            let c = Matrix::from_fn(2, 3, |_, _| rat(rng.gen_range(-2..=2)));
            let straight =
                BilinearSystem::new(c.clone(), None, BoxKind::Positive).unwrap();
            let flipped =
                BilinearSystem::new(c.transpose(), None, BoxKind::Positive).unwrap();
            assert_eq!(
                count_bilinear(&straight, 4, &budget()).unwrap(),
                count_bilinear(&flipped, 4, &budget()).unwrap()
            );
        }
    }

    #[test]
    fn bilinear_h_constraint_filters_x() {
        // H = (1, −1)ᵀ forces x1 = x2; C = I2 then demands x1(y1 + y2) = 0,
        // impossible in the positive box, so only the count with H empty
        // differs.
        let c = rational_matrix(vec![vec![(1, 1), (0, 1)], vec![(0, 1), (1, 1)]]);
        let h = rational_matrix(vec![vec![(1, 1)], vec![(-1, 1)]]);
        let sys = BilinearSystem::new(c, Some(h), BoxKind::Positive).unwrap();
        assert_eq!(count_bilinear(&sys, 3, &budget()).unwrap(), 0);
        // Same system on the symmetric box: x1 = x2 = ±v, y2 = −y1 (v ≠ 0)
        // or x = 0 with y free.
        let c = rational_matrix(vec![vec![(1, 1), (0, 1)], vec![(0, 1), (1, 1)]]);
        let h = rational_matrix(vec![vec![(1, 1)], vec![(-1, 1)]]);
        let sys = BilinearSystem::new(c, Some(h), BoxKind::Symmetric).unwrap();
        // x = (v,v), v ∈ [−2,2]: v ≠ 0 → y1 ∈ [−2,2], y2 = −y1 → 5 each (4·5 = 20);
        // v = 0 → y free → 25. Total 45.
        assert_eq!(count_bilinear(&sys, 2, &budget()).unwrap(), 45);
    }

    #[test]
    fn paired_unit_identity_form_counts_diagonal() {
        let c = rational_matrix(vec![vec![(1, 1)]]);
        assert_eq!(count_paired_unit_exact(&c, None, 5, &budget()).unwrap(), 5);
        let as_real = count_paired_system(&c, None, 5, false, &budget()).unwrap();
        assert_eq!(as_real, 5.0);
    }

    #[test]
    fn paired_weighted_identity_form_sums_lambda_squares() {
        let c = rational_matrix(vec![vec![(1, 1)]]);
        let got = count_paired_system(&c, None, 5, true, &budget()).unwrap();
        let l2 = 2f64.ln();
        let expected = 2.0 * l2 * l2 + 3f64.ln().powi(2) + 5f64.ln().powi(2);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn paired_unit_matches_naive_double_loop() {
        let c = rational_matrix(vec![vec![(1, 1), (0, 1)], vec![(0, 1), (-1, 1)]]);
        let fast = count_paired_unit_exact(&c, None, 3, &budget()).unwrap();
        // naive: all (x, y) in [1,3]^4 with x1²−x2² = y1²−y2²
        let mut slow = 0u64;
        for x1 in 1i64..=3 {
            for x2 in 1i64..=3 {
                for y1 in 1i64..=3 {
                    for y2 in 1i64..=3 {
                        if x1 * x1 - x2 * x2 == y1 * y1 - y2 * y2 {
                            slow += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn paired_rejects_asymmetric_matrix() {
        let c = rational_matrix(vec![vec![(1, 1), (2, 1)], vec![(0, 1), (1, 1)]]);
        assert!(matches!(
            count_paired_unit_exact(&c, None, 3, &budget()),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn injection_identity_form_pinned() {
        let c = rational_matrix(vec![vec![(1, 1)]]);
        let report = verify_lemma33_injection(&c, None, 3, &budget()).unwrap();
        assert_eq!(report.lhs, 3);
        // uv = 0 in [−6,6]²: u = 0 (13) plus v = 0 (13) minus the origin.
        assert_eq!(report.rhs, 25);
        assert!(report.holds);
    }

    #[test]
    fn injection_holds_on_random_symmetric_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for case in 0..8 {
            let n = 1 + (case % 3);
            let mut c = Matrix::from_fn(n, n, |_, _| rat(0));
            for i in 0..n {
                for j in i..n {
                    let v = Rational::new(
                        BigInt::from(rng.gen_range(-2i64..=2)),
                        BigInt::from(rng.gen_range(1i64..=2)),
                    );
                    c[(i, j)] = v.clone();
                    c[(j, i)] = v;
                }
            }
            let x = 2 + (case as u64 % 3);
            let report = verify_lemma33_injection(&c, None, x, &budget()).unwrap();
            assert!(report.holds, "case {case}: {report:?}");
        }
    }

    #[test]
    fn injection_with_h_constraint_holds() {
        let c = rational_matrix(vec![vec![(1, 1), (0, 1)], vec![(0, 1), (-1, 1)]]);
        let h = rational_matrix(vec![vec![(1, 1)], vec![(1, 1)]]);
        let report = verify_lemma33_injection(&c, Some(&h), 4, &budget()).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn growth_fit_recovers_exact_power_law() {
        let samples: Vec<(f64, f64)> = [10.0f64, 20.0, 40.0, 80.0]
            .iter()
            .map(|&x| (x, x.powi(3)))
            .collect();
        let fit = growth_exponent_fit(&samples, 3.0).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert!(fit.deviation < 1e-9);
        let flat: Vec<(f64, f64)> = [10.0f64, 20.0, 40.0].iter().map(|&x| (x, 7.0)).collect();
        assert!(growth_exponent_fit(&flat, 0.0).unwrap().slope.abs() < 1e-12);
    }

    #[test]
    fn growth_fit_rejects_degenerate_input() {
        assert!(matches!(
            growth_exponent_fit(&[(10.0, 5.0), (20.0, 9.0)], 1.0),
            Err(Error::DegenerateSamples { .. })
        ));
        assert!(matches!(
            growth_exponent_fit(&[(10.0, 5.0), (10.0, 9.0), (20.0, 11.0)], 1.0),
            Err(Error::DegenerateSamples { .. })
        ));
        assert!(matches!(
            growth_exponent_fit(&[(10.0, 5.0), (20.0, 0.0), (30.0, 11.0)], 1.0),
            Err(Error::DegenerateSamples { .. })
        ));
    }

    #[test]
    fn growth_of_free_bilinear_system_is_exactly_n_plus_k() {
        let c = rational_matrix(vec![vec![(0, 1), (0, 1)], vec![(0, 1), (0, 1)]]);
        let sys = BilinearSystem::new(c, None, BoxKind::Positive).unwrap();
        let samples: Vec<(f64, f64)> = [50u64, 100, 200, 400]
            .iter()
            .map(|&x| {
                (
                    x as f64,
                    count_bilinear(&sys, x, &budget()).unwrap() as f64,
                )
            })
            .collect();
        let fit = growth_exponent_fit(&samples, 4.0).unwrap();
        assert!(fit.deviation < 1e-6, "slope {}", fit.slope);
    }

    #[test]
    fn growth_of_hyperbolic_system_stays_near_two() {
        let c = rational_matrix(vec![vec![(1, 1), (0, 1)], vec![(0, 1), (-1, 1)]]);
        let sys = BilinearSystem::new(c, None, BoxKind::Positive).unwrap();
        let samples: Vec<(f64, f64)> = [50u64, 100, 200]
            .iter()
            .map(|&x| {
                (
                    x as f64,
                    count_bilinear(&sys, x, &budget()).unwrap() as f64,
                )
            })
            .collect();
        let fit = growth_exponent_fit(&samples, 2.0).unwrap();
        assert!(
            fit.slope > 1.6 && fit.slope < 2.5,
            "slope {} out of band",
            fit.slope
        );
    }
}
