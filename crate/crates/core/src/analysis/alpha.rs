//! α-decomposition of addition-multiplication chains.
//!
//! Every register of an AMC is a product ∏ α_i^{e_i} over one factor per
//! addition step. A multiplication adds exponent vectors. An addition
//! b + c first pulls out the shared part s = min(e_b, e_c) and introduces
//! α = ∏ α^{e_b − s} + ∏ α^{e_c − s}, so the new register is ∏ α^s · α.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::chain::{evaluate, Op, Program};
use crate::json;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphaError {
    #[error("step {step} is a subtraction; α-decomposition needs an AMC")]
    Subtraction { step: usize },
    #[error("exponent overflow at register {register}")]
    ExponentOverflow { register: usize },
    #[error("register {register}: factors give {factored}, evaluation gives {evaluated}")]
    Mismatch {
        register: usize,
        factored: String,
        evaluated: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaDecomposition {
    #[serde(with = "json::decimal_vec")]
    pub alphas: Vec<BigUint>,
    /// 0-based step index of each addition.
    pub addition_positions: Vec<usize>,
    /// Per register: (e₁, …, e_k) for the k additions at or before it.
    pub exponents: Vec<Vec<u64>>,
    /// c with α₂ = 2^c + 1.
    pub c_exponent: Option<u64>,
    #[serde(with = "json::decimal")]
    pub value: BigUint,
}

impl AlphaDecomposition {
    pub fn final_exponents(&self) -> &[u64] {
        self.exponents.last().expect("register 0")
    }
}

fn padded(e: &[u64], k: usize) -> impl Iterator<Item = u64> + '_ {
    e.iter().copied().chain(std::iter::repeat(0)).take(k)
}

/// ∏ α_i^{e_i}, in 128 bits when it fits.
fn factored_value(alphas: &[BigUint], small: &[Option<u128>], exps: &[u64]) -> Option<BigUint> {
    let mut acc: Option<u128> = Some(1);
    for (i, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        acc = acc.and_then(|a| {
            let base = small[i]?;
            a.checked_mul(base.checked_pow(u32::try_from(e).ok()?)?)
        });
    }
    if let Some(v) = acc {
        return Some(BigUint::from(v));
    }
    let mut big = BigUint::one();
    for (alpha, &e) in alphas.iter().zip(exps) {
        big *= alpha.pow(u32::try_from(e).ok()?);
    }
    Some(big)
}

pub fn alpha_decompose(p: &Program) -> Result<AlphaDecomposition, AlphaError> {
    if let Some(step) = p.steps().iter().position(|s| s.op == Op::Sub) {
        return Err(AlphaError::Subtraction { step });
    }
    let (_, trace) = evaluate(p);

    let mut alphas: Vec<BigUint> = Vec::new();
    let mut small: Vec<Option<u128>> = Vec::new();
    let mut positions = Vec::new();
    let mut exponents: Vec<Vec<u64>> = vec![Vec::new()];
    let mut c_exponent = None;

    for (idx, step) in p.steps().iter().enumerate() {
        let register = idx + 1;
        let k = alphas.len();
        let (eb, ec) = (&exponents[step.lhs], &exponents[step.rhs]);
        let exps: Vec<u64> = match step.op {
            Op::Mul => padded(eb, k)
                .zip(padded(ec, k))
                .map(|(x, y)| x.checked_add(y))
                .collect::<Option<_>>()
                .ok_or(AlphaError::ExponentOverflow { register })?,
            Op::Add => {
                let shared: Vec<u64> = padded(eb, k)
                    .zip(padded(ec, k))
                    .map(|(x, y)| x.min(y))
                    .collect();
                let f: Vec<u64> = padded(eb, k).zip(&shared).map(|(x, s)| x - s).collect();
                let f2: Vec<u64> = padded(ec, k).zip(&shared).map(|(x, s)| x - s).collect();
                let overflow = AlphaError::ExponentOverflow { register };
                let alpha = factored_value(&alphas, &small, &f).ok_or(overflow.clone())?
                    + factored_value(&alphas, &small, &f2).ok_or(overflow)?;
                if k == 1 {
                    c_exponent = Some(f[0].max(f2[0]));
                }
                small.push(alpha.to_u128());
                alphas.push(alpha);
                positions.push(idx);
                let mut e = shared;
                e.push(1);
                e
            }
            Op::Sub => unreachable!("rejected above"),
        };
        exponents.push(exps);
    }

    for (register, (exps, value)) in exponents.iter().zip(&trace.values).enumerate() {
        let factored = factored_value(&alphas, &small, exps)
            .ok_or(AlphaError::ExponentOverflow { register })?;
        let matches = value.to_biguint().is_some_and(|v| v == factored);
        if !matches {
            return Err(AlphaError::Mismatch {
                register,
                factored: factored.to_string(),
                evaluated: value.to_string(),
            });
        }
    }

    Ok(AlphaDecomposition {
        alphas,
        addition_positions: positions,
        exponents,
        c_exponent,
        value: trace
            .result()
            .to_biguint()
            .expect("AMC values are positive"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::parse_chain;

    fn decompose(text: &str) -> AlphaDecomposition {
        alpha_decompose(&parse_chain(text).unwrap()).unwrap()
    }

    fn nums(v: &[BigUint]) -> Vec<u64> {
        v.iter().map(|x| x.to_u64().unwrap()).collect()
    }

    #[test]
    fn first_addition_is_two() {
        let d = decompose("+ 0 0");
        assert_eq!(nums(&d.alphas), vec![2]);
        assert_eq!(d.final_exponents(), &[1]);
        assert_eq!(d.c_exponent, None);
    }

    #[test]
    fn three_is_two_plus_one() {
        let d = decompose("+ 0 0\n+ 1 0");
        assert_eq!(nums(&d.alphas), vec![2, 3]);
        assert_eq!(d.c_exponent, Some(1));
        assert_eq!(d.final_exponents(), &[0, 1]);
        assert_eq!(d.value, BigUint::from(3u32));
    }

    #[test]
    fn fifty_is_two_times_five_squared() {
        let d = decompose("+ 0 0\n* 1 1\n+ 2 0\n* 3 3\n* 4 1");
        assert_eq!(nums(&d.alphas), vec![2, 5]);
        assert_eq!(d.c_exponent, Some(2));
        assert_eq!(d.final_exponents(), &[1, 2]);
        assert_eq!(d.addition_positions, vec![0, 2]);
        assert_eq!(d.exponents[4], vec![0, 2]);
    }

    #[test]
    fn doubling_gives_c_zero() {
        // 1, 2, 4 = 2 + 2: α₂ = 2^0 + 1
        let d = decompose("+ 0 0\n+ 1 1");
        assert_eq!(nums(&d.alphas), vec![2, 2]);
        assert_eq!(d.c_exponent, Some(0));
        assert_eq!(d.final_exponents(), &[1, 1]);
    }

    #[test]
    fn fermat_chain() {
        let p = crate::construct::fermat_amc(3).unwrap();
        let d = alpha_decompose(&p).unwrap();
        assert_eq!(d.value, BigUint::from(255u32));
        // 1, 2, 3, 5, 15, 17, 255
        assert_eq!(nums(&d.alphas), vec![2, 3, 5, 17]);
        assert_eq!(d.final_exponents(), &[0, 1, 1, 1]);
    }

    #[test]
    fn overflowing_fast_path_falls_back() {
        // 2^128 needs the big-integer path
        let mut text = String::from("+ 0 0\n");
        for i in 1..8 {
            text.push_str(&format!("* {i} {i}\n"));
        }
        let d = decompose(&text);
        assert_eq!(d.value, BigUint::one() << 128u32);
        assert_eq!(d.final_exponents(), &[128]);
    }

    #[test]
    fn subtraction_rejected() {
        let p = parse_chain("+ 0 0\n- 1 0").unwrap();
        assert_eq!(
            alpha_decompose(&p),
            Err(AlphaError::Subtraction { step: 1 })
        );
    }
}
