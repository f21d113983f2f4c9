//! Program equality: randomized modular fingerprints plus an exact fallback.
//!
//! Two programs are compared modulo primes drawn uniformly from a fixed
//! window. A differing residue is a checkable certificate of inequality.
//! Agreement on every round yields `Equal` together with an explicit bound on
//! the probability that the programs nonetheless differ.
//!
//! Bound: a nonzero difference d satisfies |d| ≤ 2^(2^(ℓ−1)) + 2^(2^(ℓ'−1))
//! < 2^(2^(ℓ−1) + 2^(ℓ'−1) + 1). Every prime in the window exceeds 2^b
//! (b = 61 by default), so at most D = ⌊(2^(ℓ−1) + 2^(ℓ'−1) + 1) / b⌋ + 1
//! window primes divide d. With at least W primes in the window a single round
//! misses with probability ≤ D/W, and independent rounds multiply.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::chain::{evaluate_mod, Op, Program};

pub const DEFAULT_ROUNDS: u32 = 20;
pub const DEFAULT_EXACT_LENGTH_CAP: usize = 64;
/// Exact evaluation also stops once any register passes this many bits.
pub const DEFAULT_EXACT_BIT_CAP: u64 = 1 << 28;

/// Prime count lower bound for [2^61, 2^62).
///
/// Dusart (2010): π(x) ≥ x/ln x · (1 + 1/ln x) for x ≥ 599 and
/// π(x) ≤ x/ln x · (1 + 1/ln x + 2.51/ln² x) for x ≥ 355991. The lower bound
/// at 2^62 minus the upper bound at 2^61 is 5.3906382661681245…·10^16,
/// rounded down here.
pub const WINDOW_61_PRIME_COUNT: u64 = 53_906_382_661_681_245;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("rounds must be at least 1")]
    ZeroRounds,
    #[error("no prime found in [{low}, {high}) after {draws} draws")]
    NoPrime { low: u64, high: u64, draws: u32 },
    #[error("program of length {length} exceeds the exact-evaluation cap {cap}")]
    LengthCap { length: usize, cap: usize },
    #[error("exact evaluation passed {cap} bits")]
    BitCap { cap: u64 },
}

/// Half-open sampling window `[low, high)` for fingerprint primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeWindow {
    pub low: u64,
    pub high: u64,
    /// A proven lower bound on the number of primes in the window.
    pub prime_count: u64,
}

impl PrimeWindow {
    pub const DEFAULT: PrimeWindow = PrimeWindow {
        low: 1 << 61,
        high: 1 << 62,
        prime_count: WINDOW_61_PRIME_COUNT,
    };

    /// ⌊log₂ low⌋: every window prime exceeds 2^this.
    pub fn bits_per_prime(&self) -> u64 {
        63 - self.low.leading_zeros() as u64
    }
}

impl Default for PrimeWindow {
    fn default() -> Self {
        PrimeWindow::DEFAULT
    }
}

#[derive(Debug, Clone)]
pub struct EquivConfig {
    pub window: PrimeWindow,
    /// Odd candidates drawn per round before giving up.
    pub max_draws: u32,
    pub exact_length_cap: usize,
    pub exact_bit_cap: u64,
    pub workers: usize,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            window: PrimeWindow::DEFAULT,
            max_draws: 100_000,
            exact_length_cap: DEFAULT_EXACT_LENGTH_CAP,
            exact_bit_cap: DEFAULT_EXACT_BIT_CAP,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equal,
    NotEqual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EqualityVerdict {
    pub verdict: Verdict,
    pub rounds_used: u32,
    /// Exact rational, serialized as `"num/den"`.
    #[serde(serialize_with = "ratio_string")]
    pub error_bound: BigRational,
    pub witness_modulus: Option<u64>,
    /// Residues of (left, right) modulo the witness prime.
    pub residues: Option<(u64, u64)>,
}

fn ratio_string<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
}

impl EqualityVerdict {
    pub fn is_equal(&self) -> bool {
        self.verdict == Verdict::Equal
    }

    /// `error_bound` as an `f64`, for display only.
    pub fn error_bound_approx(&self) -> f64 {
        ratio_to_f64(&self.error_bound)
    }
}

/// log₁₀ of a positive rational; stays finite far below the `f64` range.
pub fn ratio_log10(r: &BigRational) -> f64 {
    fn log2(x: &BigInt) -> f64 {
        let x = x.magnitude();
        let shift = x.bits().saturating_sub(64);
        let top = (x >> shift).to_u64().unwrap_or(0) as f64;
        top.log2() + shift as f64
    }
    (log2(r.numer()) - log2(r.denom())) * std::f64::consts::LOG10_2
}

/// Approximates a nonnegative rational, keeping precision for tiny values.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer().to_biguint().unwrap_or_default();
    let den = r.denom().to_biguint().unwrap_or_default();
    let shift = num.bits() as i64 - den.bits() as i64;
    // scale the quotient into [2^52, 2^54) before converting
    let (n, d) = if shift >= 0 {
        (num << 53u32, den << shift as u64)
    } else {
        (num << (53 + (-shift)) as u64, den)
    };
    let q = (n / d).to_f64().unwrap_or(f64::NAN);
    // two factors so that subnormal results do not flush to zero early
    let e = (shift - 53).clamp(-2200, 2200) as i32;
    q * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut base: u64, mut exp: u64| {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul(acc, base);
            }
            base = mul(base, base);
            exp >>= 1;
        }
        acc
    };
    'bases: for a in BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Draws the prime for one round. Each round has its own ChaCha stream, so
/// rounds are independent of evaluation order.
pub fn sample_prime(seed: u64, round: u32, config: &EquivConfig) -> Result<u64, EquivError> {
    let window = config.window;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round as u64);
    for _ in 0..config.max_draws {
        let candidate = rng.random_range(window.low..window.high) | 1;
        if candidate < window.high && is_prime_u64(candidate) {
            return Ok(candidate);
        }
    }
    Err(EquivError::NoPrime {
        low: window.low,
        high: window.high,
        draws: config.max_draws,
    })
}

fn pow2_or_zero(len: usize) -> BigUint {
    if len == 0 {
        BigUint::zero()
    } else {
        BigUint::one() << (len - 1)
    }
}

/// Number of window primes that can divide a nonzero c(p) − c(q).
pub fn max_window_divisors(p: &Program, q: &Program, window: &PrimeWindow) -> BigUint {
    let bits = pow2_or_zero(p.len()) + pow2_or_zero(q.len()) + 1u32;
    bits / window.bits_per_prime() + 1u32
}

pub fn error_bound(p: &Program, q: &Program, rounds: u32) -> BigRational {
    error_bound_in(p, q, rounds, &PrimeWindow::DEFAULT)
}

/// (D/W)^rounds, clamped to 1 when the window is too small to say anything.
pub fn error_bound_in(p: &Program, q: &Program, rounds: u32, window: &PrimeWindow) -> BigRational {
    let d = BigInt::from(max_window_divisors(p, q, window));
    let w = BigInt::from(window.prime_count);
    if d >= w {
        return BigRational::one();
    }
    let single = BigRational::new(d, w);
    num_traits::pow::pow(single, rounds as usize)
}

pub fn equal_probabilistic(
    p: &Program,
    q: &Program,
    rounds: u32,
    seed: u64,
) -> Result<EqualityVerdict, EquivError> {
    equal_probabilistic_with(p, q, rounds, seed, &EquivConfig::default())
}

pub fn equal_probabilistic_with(
    p: &Program,
    q: &Program,
    rounds: u32,
    seed: u64,
    config: &EquivConfig,
) -> Result<EqualityVerdict, EquivError> {
    if rounds == 0 {
        return Err(EquivError::ZeroRounds);
    }
    if p == q {
        return Ok(EqualityVerdict {
            verdict: Verdict::Equal,
            rounds_used: 0,
            error_bound: BigRational::zero(),
            witness_modulus: None,
            residues: None,
        });
    }

    let round = |r: u32| -> Result<Option<(u64, u64, u64)>, EquivError> {
        let prime = sample_prime(seed, r, config)?;
        let left = evaluate_mod(p, prime).expect("prime >= 2");
        let right = evaluate_mod(q, prime).expect("prime >= 2");
        Ok((left != right).then_some((prime, left, right)))
    };

    let mut certificate = None;
    if config.workers <= 1 {
        for r in 0..rounds {
            if let Some(c) = round(r)? {
                certificate = Some((r, c));
                break;
            }
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .expect("thread pool");
        let results: Vec<_> = pool.install(|| (0..rounds).into_par_iter().map(round).collect());
        for (r, result) in results.into_iter().enumerate() {
            if let Some(c) = result? {
                certificate = Some((r as u32, c));
                break;
            }
        }
    }

    Ok(match certificate {
        Some((r, (prime, left, right))) => EqualityVerdict {
            verdict: Verdict::NotEqual,
            rounds_used: r + 1,
            error_bound: BigRational::zero(),
            witness_modulus: Some(prime),
            residues: Some((left, right)),
        },
        None => EqualityVerdict {
            verdict: Verdict::Equal,
            rounds_used: rounds,
            error_bound: error_bound_in(p, q, rounds, &config.window),
            witness_modulus: None,
            residues: None,
        },
    })
}

/// Re-checks a `NotEqual` certificate from scratch.
pub fn certificate_holds(p: &Program, q: &Program, verdict: &EqualityVerdict) -> bool {
    match (verdict.verdict, verdict.witness_modulus, verdict.residues) {
        (Verdict::NotEqual, Some(m), Some((l, r))) => {
            is_prime_u64(m) && l != r && evaluate_mod(p, m) == Ok(l) && evaluate_mod(q, m) == Ok(r)
        }
        _ => false,
    }
}

pub fn equal_exact(p: &Program, q: &Program) -> Result<bool, EquivError> {
    equal_exact_with(p, q, &EquivConfig::default())
}

pub fn equal_exact_with(
    p: &Program,
    q: &Program,
    config: &EquivConfig,
) -> Result<bool, EquivError> {
    for prog in [p, q] {
        if prog.len() > config.exact_length_cap {
            return Err(EquivError::LengthCap {
                length: prog.len(),
                cap: config.exact_length_cap,
            });
        }
    }
    Ok(guarded_value(p, config.exact_bit_cap)? == guarded_value(q, config.exact_bit_cap)?)
}

fn guarded_value(p: &Program, bit_cap: u64) -> Result<BigInt, EquivError> {
    let mut values = vec![BigInt::one()];
    for step in p.steps() {
        let (a, b) = (&values[step.lhs], &values[step.rhs]);
        let v = match step.op {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => {
                if a.bits() + b.bits() > bit_cap + 1 {
                    return Err(EquivError::BitCap { cap: bit_cap });
                }
                a * b
            }
        };
        if v.bits() > bit_cap {
            return Err(EquivError::BitCap { cap: bit_cap });
        }
        values.push(v);
    }
    Ok(values.pop().expect("register 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::parse_chain;
    use crate::construct::{brauer_slp, fermat_amc, tower_slp};

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), trial_division(n), "n = {n}");
        }
        // strong pseudoprimes to several small bases
        for n in [
            3_215_031_751u64,
            2_152_302_898_747,
            3_474_749_660_383,
            341_550_071_728_321,
        ] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest 64-bit prime
    }

    #[test]
    fn sampled_primes_are_in_window_and_seeded() {
        let cfg = EquivConfig::default();
        let a = sample_prime(42, 0, &cfg).unwrap();
        assert_eq!(a, sample_prime(42, 0, &cfg).unwrap());
        assert_ne!(a, sample_prime(42, 1, &cfg).unwrap());
        for r in 0..50 {
            let p = sample_prime(7, r, &cfg).unwrap();
            assert!((1u64 << 61..1u64 << 62).contains(&p));
            assert!(is_prime_u64(p));
        }
    }

    #[test]
    fn primeless_window_errors() {
        let cfg = EquivConfig {
            window: PrimeWindow {
                low: 24,
                high: 28,
                prime_count: 1,
            },
            max_draws: 50,
            ..EquivConfig::default()
        };
        assert!(matches!(
            sample_prime(1, 0, &cfg),
            Err(EquivError::NoPrime { .. })
        ));
    }

    #[test]
    fn tower_equals_brauer() {
        let p = tower_slp(3).unwrap();
        let (q, _) = brauer_slp(&BigUint::from(255u32), None).unwrap();
        let v = equal_probabilistic(&p, &q, DEFAULT_ROUNDS, 1).unwrap();
        assert!(v.is_equal());
        assert_eq!(v.rounds_used, DEFAULT_ROUNDS);
        assert!(v.error_bound > BigRational::zero());
        assert!(v.error_bound < BigRational::one());
    }

    #[test]
    fn six_is_not_seven() {
        let p = parse_chain("+ 0 0\n+ 1 0\n* 2 1").unwrap();
        let q = parse_chain("+ 0 0\n+ 1 0\n* 2 1\n+ 3 0").unwrap();
        let v = equal_probabilistic(&p, &q, 5, 99).unwrap();
        assert_eq!(v.verdict, Verdict::NotEqual);
        assert_eq!(v.rounds_used, 1);
        assert!(certificate_holds(&p, &q, &v));
    }

    #[test]
    fn identical_programs_short_circuit() {
        let p = tower_slp(4).unwrap();
        let v = equal_probabilistic(&p, &p.clone(), 20, 3).unwrap();
        assert!(v.is_equal());
        assert_eq!(v.rounds_used, 0);
        assert!(v.error_bound.is_zero());
    }

    #[test]
    fn exact_equality() {
        let tower2 = tower_slp(2).unwrap();
        let other = parse_chain("+ 0 0\n+ 1 0\n* 2 1\n* 3 3\n+ 4 0").unwrap();
        assert_eq!(equal_exact(&tower2, &other), Ok(false));
        assert_eq!(
            equal_exact(&tower_slp(3).unwrap(), &fermat_amc(3).unwrap()),
            Ok(true)
        );
        assert_eq!(equal_exact(&Program::empty(), &Program::empty()), Ok(true));
    }

    #[test]
    fn exact_caps() {
        let long = tower_slp(70).unwrap();
        assert!(matches!(
            equal_exact(&long, &Program::empty()),
            Err(EquivError::LengthCap {
                length: 72,
                cap: 64
            })
        ));
        let huge = tower_slp(40).unwrap();
        assert_eq!(
            equal_exact(&huge, &Program::empty()),
            Err(EquivError::BitCap {
                cap: DEFAULT_EXACT_BIT_CAP
            })
        );
    }

    #[test]
    fn error_bound_arithmetic() {
        let empty = Program::empty();
        assert_eq!(
            max_window_divisors(&empty, &empty, &PrimeWindow::DEFAULT),
            BigUint::one()
        );
        let ten = tower_slp(8).unwrap();
        assert_eq!(ten.len(), 10);
        assert_eq!(
            max_window_divisors(&ten, &ten, &PrimeWindow::DEFAULT),
            BigUint::from(17u32)
        );
        let w = BigInt::from(WINDOW_61_PRIME_COUNT);
        let one_round = BigRational::new(BigInt::from(17), w.clone());
        assert_eq!(error_bound(&ten, &ten, 1), one_round);
        assert_eq!(
            error_bound(&ten, &ten, 20),
            BigRational::new(BigInt::from(17).pow(20u32), w.pow(20u32))
        );
    }

    #[test]
    fn error_bound_monotone_in_rounds() {
        let p = tower_slp(5).unwrap();
        let q = fermat_amc(5).unwrap();
        let mut prev = BigRational::one();
        for r in 1..30 {
            let b = error_bound(&p, &q, r);
            assert!(b <= prev);
            assert!(b < BigRational::one());
            prev = b;
        }
    }

    #[test]
    fn bound_log10() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(1000));
        assert!((ratio_log10(&r) + 3.0).abs() < 1e-12);
        let w = BigInt::from(WINDOW_61_PRIME_COUNT);
        let tiny = BigRational::new(BigInt::from(1), w.pow(20u32));
        let expect = -20.0 * (WINDOW_61_PRIME_COUNT as f64).log10();
        assert!((ratio_log10(&tiny) - expect).abs() < 1e-9);
    }

    #[test]
    fn bound_approximation() {
        let r = BigRational::new(BigInt::from(17), BigInt::from(WINDOW_61_PRIME_COUNT));
        let approx = ratio_to_f64(&r);
        assert!((approx / (17.0 / 5.390_638_266_168_125e16) - 1.0).abs() < 1e-12);
        let tiny = num_traits::pow::pow(r, 20);
        assert!(ratio_to_f64(&tiny) > 0.0);
        assert_eq!(
            ratio_to_f64(&BigRational::new(BigInt::from(3), BigInt::from(4))),
            0.75
        );
    }

    #[test]
    fn parallel_rounds_agree() {
        let p = parse_chain("+ 0 0\n* 1 1").unwrap();
        let q = parse_chain("+ 0 0\n+ 1 1\n+ 2 0").unwrap();
        let seq = equal_probabilistic(&p, &q, 8, 5).unwrap();
        let cfg = EquivConfig {
            workers: 4,
            ..EquivConfig::default()
        };
        let par = equal_probabilistic_with(&p, &q, 8, 5, &cfg).unwrap();
        assert_eq!(seq, par);
    }
}
