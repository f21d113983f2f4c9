//! Largest and second-largest values of irredundant AMCs with a fixed number
//! of additions and multiplications.
//!
//! The maximum is 2^(a·2^m), reached by a doublings followed by m squarings.
//! The second largest comes from one of three single manipulations of that
//! program, each with an exact value:
//! * an addition reads two registers back: (2^(a−2)·3)^(2^m), needs a ≥ 2;
//! * a multiplication reads two registers back: 2^(3a·2^(m−2)), needs m ≥ 2;
//! * the last addition and first multiplication trade places:
//!   2^((2a−1)·2^(m−1)), needs a ≥ 2 and m ≥ 1.
//!
//! The first one is also reported in its printed form 2^(log₂3·(a−2)·2^m),
//! i.e. 3^((a−2)·2^m), which disagrees with the manipulation it describes.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::chain::Program;
use crate::json;

use super::irredundant::{for_each_irredundant, to_program, Shape};

pub const DEFAULT_EXTREMAL_CAP: usize = 6;
/// Values of a + m ≤ 7 fit in 64 bits, so candidates compare exactly.
pub const MAX_EXTREMAL_CAP: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtremalError {
    #[error("a must be at least 1")]
    NoAdditions,
    #[error("a + m = {total} exceeds the survey cap {cap}")]
    CapExceeded { total: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub manipulation: &'static str,
    pub formula: &'static str,
    /// `None` when the manipulation does not apply for this (a, m).
    #[serde(with = "json::decimal_opt")]
    pub value: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateExponents {
    pub printed: Vec<Candidate>,
    pub rederived: Vec<Candidate>,
    #[serde(with = "json::decimal_opt")]
    pub printed_second: Option<BigUint>,
    #[serde(with = "json::decimal_opt")]
    pub rederived_second: Option<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    pub a: usize,
    pub m: usize,
    /// Number of irredundant AMCs with exactly these counts.
    pub programs: u64,
    pub distinct_values: usize,
    #[serde(with = "json::decimal")]
    pub max_value: BigUint,
    pub max_witness: Program,
    #[serde(with = "json::decimal")]
    pub max_formula: BigUint,
    pub max_matches: bool,
    #[serde(with = "json::decimal_opt")]
    pub second_value: Option<BigUint>,
    pub second_witness: Option<Program>,
    /// log₂ of the second value, for reading against the exponent formulas.
    pub second_log2: Option<f64>,
    pub candidate_exponents: CandidateExponents,
    pub second_matches_rederived: bool,
    pub second_matches_printed: bool,
}

fn pow2(e: usize) -> BigUint {
    BigUint::one() << e
}

fn candidates(a: usize, m: usize) -> CandidateExponents {
    let shared = |value_b: Option<BigUint>, value_c: Option<BigUint>| {
        [
            Candidate {
                manipulation: "multiplication-index-decrement",
                formula: "3a*2^(m-2)",
                value: value_b,
            },
            Candidate {
                manipulation: "swap-last-addition-first-multiplication",
                formula: "(2a-1)*2^(m-1)",
                value: value_c,
            },
        ]
    };
    let b = (m >= 2).then(|| pow2((3 * a) << (m - 2)));
    let c = (a >= 2 && m >= 1).then(|| pow2((2 * a - 1) << (m - 1)));
    let rederived_a = (a >= 2).then(|| pow2((a - 2) << m) * BigUint::from(3u32).pow(1 << m));
    let printed_a = (a >= 2).then(|| BigUint::from(3u32).pow(((a - 2) << m) as u32));

    let mut printed = vec![Candidate {
        manipulation: "addition-index-decrement",
        formula: "log3*(a-2)*2^m",
        value: printed_a,
    }];
    printed.extend(shared(b.clone(), c.clone()));
    let mut rederived = vec![Candidate {
        manipulation: "addition-index-decrement",
        formula: "(a-2+log3)*2^m",
        value: rederived_a,
    }];
    rederived.extend(shared(b, c));

    let best = |cs: &[Candidate]| cs.iter().filter_map(|c| c.value.clone()).max();
    CandidateExponents {
        printed_second: best(&printed),
        rederived_second: best(&rederived),
        printed,
        rederived,
    }
}

pub fn extremal_survey(a: usize, m: usize) -> Result<ExtremalReport, ExtremalError> {
    extremal_survey_capped(a, m, DEFAULT_EXTREMAL_CAP)
}

pub fn extremal_survey_capped(
    a: usize,
    m: usize,
    cap: usize,
) -> Result<ExtremalReport, ExtremalError> {
    if a == 0 {
        return Err(ExtremalError::NoAdditions);
    }
    let cap = cap.min(MAX_EXTREMAL_CAP);
    if a + m > cap {
        return Err(ExtremalError::CapExceeded { total: a + m, cap });
    }

    let mut programs = 0u64;
    let mut values = Vec::new();
    // first program reaching a value is its lexicographically smallest witness
    let mut top: Option<(u128, Program)> = None;
    let mut second: Option<(u128, Program)> = None;
    for_each_irredundant(Shape::exact(a, m), |steps, regs| {
        programs += 1;
        let v = *regs.last().expect("register 0");
        values.push(v);
        match &top {
            Some((best, _)) if v <= *best => {
                if v < *best && second.as_ref().is_none_or(|(s, _)| v > *s) {
                    second = Some((v, to_program(steps)));
                }
            }
            _ => {
                second = top.take();
                top = Some((v, to_program(steps)));
            }
        }
    });
    values.sort_unstable();
    values.dedup();

    let (max_value, max_witness) = top.expect("a >= 1 admits the doubling chain");
    let max_value = BigUint::from(max_value);
    let max_formula = pow2(a << m);
    let candidate_exponents = candidates(a, m);
    let second_value = second.as_ref().map(|(v, _)| BigUint::from(*v));

    Ok(ExtremalReport {
        a,
        m,
        programs,
        distinct_values: values.len(),
        max_matches: max_value == max_formula,
        max_value,
        max_witness,
        max_formula,
        second_log2: second.as_ref().map(|(v, _)| (*v as f64).log2()),
        second_matches_rederived: second_value == candidate_exponents.rederived_second,
        second_matches_printed: second_value == candidate_exponents.printed_second,
        second_value,
        second_witness: second.map(|(_, p)| p),
        candidate_exponents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::format_chain;

    fn survey(a: usize, m: usize) -> ExtremalReport {
        extremal_survey(a, m).unwrap()
    }

    #[test]
    fn one_addition_two_squarings() {
        let r = survey(1, 2);
        assert_eq!(r.max_value, BigUint::from(16u32));
        assert_eq!(format_chain(&r.max_witness), "+ 0 0\n* 1 1\n* 2 2\n");
        assert!(r.max_matches);
    }

    #[test]
    fn two_additions_one_multiplication() {
        let r = survey(2, 1);
        assert_eq!(r.max_value, BigUint::from(16u32));
        assert_eq!(r.second_value, Some(BigUint::from(9u32)));
        assert_eq!(
            format_chain(r.second_witness.as_ref().unwrap()),
            "+ 0 0\n+ 1 0\n* 2 2\n"
        );
    }

    #[test]
    fn printed_first_term_disagrees_at_two_two() {
        let r = survey(2, 2);
        assert_eq!(r.max_value, BigUint::from(256u32));
        assert_eq!(r.second_value, Some(BigUint::from(81u32)));
        assert!(r.second_matches_rederived);
        assert_eq!(r.candidate_exponents.printed[0].value, Some(BigUint::one()));
        assert_eq!(
            r.candidate_exponents.rederived[0].value,
            Some(BigUint::from(81u32))
        );
    }

    #[test]
    fn single_program_shapes_have_no_second() {
        for (a, m) in [(1, 0), (1, 1)] {
            let r = survey(a, m);
            assert_eq!(r.programs, 1);
            assert_eq!(r.second_value, None);
            assert_eq!(r.candidate_exponents.rederived_second, None);
            assert!(r.second_matches_rederived);
        }
    }

    #[test]
    fn caps() {
        assert_eq!(extremal_survey(0, 2), Err(ExtremalError::NoAdditions));
        assert_eq!(
            extremal_survey(4, 3),
            Err(ExtremalError::CapExceeded { total: 7, cap: 6 })
        );
        assert!(extremal_survey_capped(3, 4, 7).unwrap().max_matches);
        assert!(extremal_survey_capped(3, 5, 99).is_err());
    }
}
