//! Explicit chain constructions.
//!
//! * [`brauer_slp`]: the 2^k-ary method. Build every constant 1..2^k, then
//!   Horner-evaluate the base-2^k digits of `z`. Subtraction-free.
//! * [`tower_slp`]: `1+1` followed by `n` squarings and a final `-1`, which
//!   computes 2^{2^n} − 1 in `n + 2` steps.
//! * [`fermat_amc`]: 2^{2^n} − 1 without subtraction via F_i − 2 = F_{i−1}(F_{i−1} − 2).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::chain::{Program, Step};

/// Largest Fermat number bit length [`fermat_number`] will build.
pub const DEFAULT_FERMAT_MAX_BITS: u64 = 1 << 20;

/// Limb widths above this would need more than 2^24 constant-building steps.
pub const MAX_LIMB_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("parameter n must be at least 1")]
    NonPositiveN,
    #[error("target must be at least 1")]
    NonPositiveTarget,
    #[error("limb width k must be in 1..={MAX_LIMB_BITS}, got {0}")]
    LimbWidth(u32),
    #[error("F_{index} has 2^{index}+1 bits, above the budget of {max_bits} bits")]
    BitBudget { index: u32, max_bits: u64 },
}

/// Base-2^k decomposition used by [`brauer_slp`]:
/// `z = u₀ + 2^r · Σ_{j=1..m} u_j · (2^k)^{j−1}` with `n + 1 = m·k + r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrauerPlan {
    /// Bit length of z minus one.
    pub n: u64,
    pub k: u32,
    pub m: u64,
    pub r: u32,
    /// `limbs[0]` is u₀ (< 2^r); `limbs[j]` is u_j (< 2^k).
    pub limbs: Vec<u64>,
}

impl BrauerPlan {
    /// The constructor's length guarantee, (2^k − 1) + 2m.
    pub fn length_bound(&self) -> u64 {
        ((1u64 << self.k) - 1) + 2 * self.m
    }

    /// Reassembles z from the limbs.
    pub fn value(&self) -> BigUint {
        let mut acc = BigUint::zero();
        for &limb in self.limbs[1..].iter().rev() {
            acc = (acc << self.k) + BigUint::from(limb);
        }
        (acc << self.r) + BigUint::from(self.limbs[0])
    }
}

/// k = ⌈log₂ n − log₂ log₂ n⌉, clamped below at 1.
///
/// Evaluated exactly: the ceiling is the least k with n ≤ 2^k·log₂ n, i.e.
/// 2^n ≤ n^(2^k), which is a bit-length test on repeated squares of n.
pub fn choose_k(n: u64) -> Result<u32, ConstructError> {
    if n < 1 {
        return Err(ConstructError::NonPositiveN);
    }
    if n < 2 {
        return Ok(1);
    }
    let mut power = BigUint::from(n);
    let mut k = 0u32;
    loop {
        power = &power * &power;
        k += 1;
        // power = n^(2^k) >= 2^n
        if power.bits() > n {
            return Ok(k);
        }
    }
}

fn plan_for(z: &BigUint, k: u32) -> BrauerPlan {
    let n = z.bits() - 1;
    let width = n + 1;
    let m = width / k as u64;
    let r = (width % k as u64) as u32;
    let mask_r = (BigUint::one() << r) - 1u32;
    let mask_k = (BigUint::one() << k) - 1u32;
    let mut limbs = Vec::with_capacity(m as usize + 1);
    limbs.push((z & &mask_r).to_u64().expect("limb below 2^k"));
    let mut rest = z >> r;
    for _ in 0..m {
        limbs.push((&rest & &mask_k).to_u64().expect("limb below 2^k"));
        rest >>= k;
    }
    BrauerPlan { n, k, m, r, limbs }
}

/// Builds an AMC for `z` by the 2^k-ary method.
///
/// Registers 0..2^k − 1 hold the constants 1..2^k (a linear chain of `+1`
/// steps). A zero limb skips its addition and `r = 0` skips the final
/// multiplication by 2^r. When `z` is itself one of the constants the chain
/// stops at `z` so that c(P) is the last register.
pub fn brauer_slp(
    z: &BigUint,
    k_override: Option<u32>,
) -> Result<(Program, BrauerPlan), ConstructError> {
    if z.is_zero() {
        return Err(ConstructError::NonPositiveTarget);
    }
    let n = z.bits() - 1;
    let k = match k_override {
        Some(k) if k == 0 || k > MAX_LIMB_BITS => return Err(ConstructError::LimbWidth(k)),
        Some(k) => k,
        None if n == 0 => 1,
        None => choose_k(n)?,
    };
    let plan = plan_for(z, k);
    let top = 1u64 << k;

    let mut program = Program::empty();
    if let Some(small) = z.to_u64().filter(|&v| v <= top) {
        if plan.m <= 1 && plan.r == 0 || plan.m == 0 {
            for _ in 1..small {
                let last = program.result_register();
                program.push(Step::add(last, 0)).expect("valid");
            }
            return Ok((program, plan));
        }
    }

    // constant v lives in register v - 1
    for _ in 1..top {
        let last = program.result_register();
        program.push(Step::add(last, 0)).expect("valid");
    }
    let reg_of = |v: u64| (v - 1) as usize;
    let shift_k = reg_of(top);

    let mut acc = reg_of(plan.limbs[plan.m as usize]);
    for j in (1..plan.m as usize).rev() {
        acc = program.push(Step::mul(acc, shift_k)).expect("valid");
        let limb = plan.limbs[j];
        if limb != 0 {
            acc = program.push(Step::add(acc, reg_of(limb))).expect("valid");
        }
    }
    if plan.r > 0 {
        acc = program
            .push(Step::mul(acc, reg_of(1u64 << plan.r)))
            .expect("valid");
    }
    if plan.limbs[0] != 0 {
        acc = program
            .push(Step::add(acc, reg_of(plan.limbs[0])))
            .expect("valid");
    }
    debug_assert_eq!(acc, program.result_register());
    Ok((program, plan))
}

/// `+ 0 0`, then `n` squarings, then `- (n+1) 0`: 2^{2^n} − 1 in n + 2 steps.
pub fn tower_slp(n: u32) -> Result<Program, ConstructError> {
    if n < 1 {
        return Err(ConstructError::NonPositiveN);
    }
    let mut p = Program::empty();
    p.push(Step::add(0, 0)).expect("valid");
    for i in 1..=n as usize {
        p.push(Step::mul(i, i)).expect("valid");
    }
    p.push(Step::sub(n as usize + 1, 0)).expect("valid");
    Ok(p)
}

/// Subtraction-free chain for 2^{2^n} − 1 = F_n − 2 of length exactly 2n.
///
/// Trace: 1, 2, 3, then per level i ≥ 1 an addition F_i = (F_i − 2) + 2
/// followed by the product F_{i+1} − 2 = F_i · (F_i − 2). For n = 3 this is
/// 1, 2, 3, 5, 15, 17, 255. Level 0 needs no product since F₀ − 2 = 1 makes
/// F₁ − 2 = F₀.
pub fn fermat_amc(n: u32) -> Result<Program, ConstructError> {
    if n < 1 {
        return Err(ConstructError::NonPositiveN);
    }
    let mut p = Program::empty();
    let two = p.push(Step::add(0, 0)).expect("valid");
    // F_1 - 2 = F_0 = 3
    let mut minus_two = p.push(Step::add(two, 0)).expect("valid");
    for _ in 1..n {
        let fermat = p.push(Step::add(minus_two, two)).expect("valid");
        minus_two = p.push(Step::mul(fermat, minus_two)).expect("valid");
    }
    assert!(p.len() <= 2 * n as usize, "fermat_amc exceeded 2n steps");
    Ok(p)
}

/// F_i = 2^{2^i} + 1 under [`DEFAULT_FERMAT_MAX_BITS`].
pub fn fermat_number(i: u32) -> Result<BigUint, ConstructError> {
    fermat_number_with_budget(i, DEFAULT_FERMAT_MAX_BITS)
}

pub fn fermat_number_with_budget(i: u32, max_bits: u64) -> Result<BigUint, ConstructError> {
    if i >= 63 || (1u64 << i) + 1 > max_bits {
        return Err(ConstructError::BitBudget { index: i, max_bits });
    }
    Ok((BigUint::one() << (1u64 << i)) + 1u32)
}
