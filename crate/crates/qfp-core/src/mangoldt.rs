//! Von Mangoldt weights on an initial segment of the integers.
//!
//! [`VonMangoldtTable`] sieves smallest prime factors up to `x` once and
//! then answers, in O(log k) or better: is `k` a prime power `p^e`, what is
//! `Λ(k)` (`log p` on prime powers, 0 elsewhere), and which `k ≤ x` carry
//! positive weight. The counting and arc modules enumerate boxes restricted
//! to prime powers, so the table also precomputes that index list and the
//! Chebyshev sum `ψ(x) = Σ_{k ≤ x} Λ(k)`.

/// Classification of one integer in the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MangoldtEntry {
    /// Not a prime power (includes 0 and 1): weight zero.
    Zero,
    /// `p^e` with `p` prime and `e >= 1`: weight `ln p`.
    PrimePower { p: u64, e: u32 },
}

/// Smallest-prime-factor sieve over `0..=x` with von Mangoldt accessors.
#[derive(Debug, Clone)]
pub struct VonMangoldtTable {
    x: u64,
    /// Smallest prime factor of each index (0 for indices 0 and 1).
    spf: Vec<u32>,
    /// Ascending list of prime powers in `[2, x]`.
    prime_powers: Vec<u64>,
    /// Ascending list of primes in `[2, x]`.
    primes: Vec<u64>,
    /// Chebyshev sum `ψ(x)`.
    psi: f64,
}

impl VonMangoldtTable {
    /// Sieves up to `x`. Memory is ~4 bytes per integer; intended for the
    /// desk scale `x <= 10^8`.
    pub fn new(x: u64) -> Self {
        assert!(x <= 100_000_000, "table limited to x <= 1e8 (got {x})");
        let n = x as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut table = VonMangoldtTable {
            x,
            spf,
            prime_powers: Vec::new(),
            primes: Vec::new(),
            psi: 0.0,
        };
        let mut pps = Vec::new();
        let mut primes = Vec::new();
        let mut psi = 0.0;
        for k in 2..=x {
            if let MangoldtEntry::PrimePower { p, e } = table.classify(k) {
                pps.push(k);
                psi += (p as f64).ln();
                if e == 1 {
                    primes.push(k);
                }
            }
        }
        table.prime_powers = pps;
        table.primes = primes;
        table.psi = psi;
        table
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// Classifies `k <= x` by dividing out its smallest prime factor.
    pub fn classify(&self, k: u64) -> MangoldtEntry {
        if k < 2 || k > self.x {
            return MangoldtEntry::Zero;
        }
        let p = self.spf[k as usize] as u64;
        let mut m = k;
        let mut e = 0u32;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if m == 1 {
            MangoldtEntry::PrimePower { p, e }
        } else {
            MangoldtEntry::Zero
        }
    }

    /// `Λ(k)`: `ln p` when `k = p^e`, else 0.
    pub fn lambda(&self, k: u64) -> f64 {
        match self.classify(k) {
            MangoldtEntry::Zero => 0.0,
            MangoldtEntry::PrimePower { p, .. } => (p as f64).ln(),
        }
    }

    pub fn is_prime(&self, k: u64) -> bool {
        matches!(self.classify(k), MangoldtEntry::PrimePower { e: 1, .. })
    }

    pub fn is_prime_power(&self, k: u64) -> bool {
        matches!(self.classify(k), MangoldtEntry::PrimePower { .. })
    }

    /// Ascending prime powers in `[2, x]`.
    pub fn prime_powers(&self) -> &[u64] {
        &self.prime_powers
    }

    /// Ascending primes in `[2, x]`.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `ψ(x) = Σ_{k <= x} Λ(k)`.
    pub fn psi(&self) -> f64 {
        self.psi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_small_values() {
        let t = VonMangoldtTable::new(100);
        assert_eq!(t.lambda(1), 0.0);
        assert!((t.lambda(2) - 2f64.ln()).abs() < 1e-15);
        assert!((t.lambda(8) - 2f64.ln()).abs() < 1e-15);
        assert!((t.lambda(9) - 3f64.ln()).abs() < 1e-15);
        assert_eq!(t.lambda(6), 0.0);
        assert_eq!(t.lambda(12), 0.0);
        assert_eq!(t.lambda(0), 0.0);
    }

    #[test]
    fn psi_at_100_matches_reference() {
        // Σ_{k <= 100} Λ(k) = 94.0453112793... (independent hand sum).
        let t = VonMangoldtTable::new(100);
        assert!((t.psi() - 94.04531127935736).abs() < 1e-3);
    }

    #[test]
    fn classification_distinguishes_powers() {
        let t = VonMangoldtTable::new(1000);
        assert_eq!(t.classify(243), MangoldtEntry::PrimePower { p: 3, e: 5 });
        assert_eq!(t.classify(1000), MangoldtEntry::Zero);
        assert!(t.is_prime(97));
        assert!(!t.is_prime(49));
        assert!(t.is_prime_power(49));
    }

    #[test]
    fn prime_power_list_is_ascending_and_complete() {
        let t = VonMangoldtTable::new(30);
        assert_eq!(
            t.prime_powers(),
            &[2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29]
        );
        assert_eq!(t.primes(), &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        // ψ equals the sum of λ over the listed prime powers.
        let direct: f64 = t.prime_powers().iter().map(|&k| t.lambda(k)).sum();
        assert!((t.psi() - direct).abs() < 1e-12);
    }

    #[test]
    fn tiny_tables_are_safe() {
        let t = VonMangoldtTable::new(1);
        assert!(t.prime_powers().is_empty());
        assert_eq!(t.psi(), 0.0);
    }
}
