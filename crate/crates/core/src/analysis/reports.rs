//! Report builders on top of the search engine and enumerators.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::chain::{evaluate, Model, Program, Step};
use crate::construct::{fermat_amc, tower_slp};
use crate::json;
use crate::search::{
    enumerate_values, fewest_additions_at_length, lower_bound, shortest_program, EnumerateError,
    SearchError, SearchOptions, SearchStatus, MAX_SEARCH_LENGTH,
};

use super::alpha::{alpha_decompose, AlphaError};
use super::irredundant::{for_each_below, split_irredundant, to_program, Shape};

pub const DEFAULT_GAP_MAX_N: u32 = 3;
pub const DEEP_GAP_MAX_N: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error("n must be at least 1")]
    ZeroN,
    #[error("n = {n} needs --deep (default limit {limit})")]
    NeedsDeep { n: u32, limit: u32 },
    #[error("n = {n} is beyond exhaustive reach (limit {limit})")]
    TooDeep { n: u32, limit: u32 },
    #[error("bit width {0} is outside 1..=126")]
    Bits(u32),
    #[error("internal check failed: {0}")]
    Verification(String),
}

// ---------- addition counts ----------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdditionRow {
    pub length: usize,
    pub min_additions: usize,
    pub multiplications: usize,
    pub witness: Program,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdditionCountReport {
    #[serde(with = "json::decimal")]
    pub target: BigUint,
    pub max_length: usize,
    /// Lengths at which some strictly increasing AMC computes the target.
    pub rows: Vec<AdditionRow>,
    /// The budget ran out; lengths from `rows.last() + 1` on were not settled.
    pub partial: bool,
}

/// Minimum additions per achievable AMC length, over strictly increasing
/// chains (the search engine's canonical form).
pub fn addition_count_report(
    z: &BigUint,
    max_len: usize,
    opts: &SearchOptions,
) -> Result<AdditionCountReport, ReportError> {
    if max_len > MAX_SEARCH_LENGTH {
        return Err(SearchError::LengthCap(max_len).into());
    }
    let opts = SearchOptions {
        model: Model::Amc,
        ..opts.clone()
    };
    let start = if z.is_one() { 0 } else { lower_bound(z)? };
    let mut rows = Vec::new();
    let mut partial = false;
    for length in start..=max_len {
        match fewest_additions_at_length(z, length, &opts) {
            Ok(Some((witness, adds))) => rows.push(AdditionRow {
                length,
                min_additions: adds,
                multiplications: length - adds,
                witness,
            }),
            Ok(None) => {}
            Err(SearchError::BudgetExhausted) => {
                partial = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(AdditionCountReport {
        target: z.clone(),
        max_length: max_len,
        rows,
        partial,
    })
}

// ---------- census ----------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthCount {
    pub length: usize,
    /// Values whose shortest program has exactly this length.
    pub new_values: usize,
    /// Values computable within this length.
    pub cumulative: usize,
    /// ℓ^(3ℓ) = 2^(3ℓ log₂ ℓ); absent for ℓ < 2.
    #[serde(with = "json::decimal_opt")]
    pub count_bound: Option<BigUint>,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub n_bits: u32,
    pub max_len: usize,
    /// Values in [2^n, 2^(n+1)) with an SLP of length ≤ max_len.
    #[serde(with = "json::decimal")]
    pub computable_count: BigUint,
    #[serde(with = "json::decimal")]
    pub total: BigUint,
    pub fraction: f64,
    pub per_length: Vec<LengthCount>,
    /// Enumeration was truncated, so every count is only a lower bound.
    pub lower_bound_only: bool,
}

pub fn count_bound(length: usize) -> Option<BigUint> {
    (length >= 2).then(|| BigUint::from(length).pow(3 * length as u32))
}

pub fn census(n_bits: u32, max_len: usize) -> Result<CensusReport, ReportError> {
    if !(1..=126).contains(&n_bits) {
        return Err(ReportError::Bits(n_bits));
    }
    let table = enumerate_values(max_len, Model::Slp)?;
    let (lo, hi) = (1u128 << n_bits, 1u128 << (n_bits + 1));
    let computable = table.shortest.range(lo..hi).count();
    let per_length = table
        .new_per_length()
        .into_iter()
        .zip(table.cumulative_per_length())
        .enumerate()
        .map(|(length, (new_values, cumulative))| {
            let count_bound = count_bound(length);
            LengthCount {
                length,
                new_values,
                cumulative,
                within_bound: count_bound
                    .as_ref()
                    .is_none_or(|b| BigUint::from(cumulative) <= *b),
                count_bound,
            }
        })
        .collect();
    let total = 1u128 << n_bits;
    Ok(CensusReport {
        n_bits,
        max_len,
        computable_count: BigUint::from(computable),
        total: BigUint::from(total),
        fraction: computable as f64 / total as f64,
        per_length,
        lower_bound_only: table.truncated,
    })
}

// ---------- gap ----------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub n: u32,
    #[serde(with = "json::decimal")]
    pub target: BigUint,
    pub tau: usize,
    pub tau_witness: Program,
    pub tau_proven: bool,
    pub tau_plus: usize,
    pub tau_plus_witness: Program,
    pub tau_plus_proven: bool,
    pub gap: usize,
    pub min_additions_among_optimal_amcs: Option<usize>,
    pub min_additions_witness: Option<Program>,
    /// τ ≤ n + 2, from the tower construction.
    pub tau_upper_bound: usize,
    /// τ₊ ≤ 2n, from the Fermat-product chain.
    pub tau_plus_upper_bound: usize,
    /// The asymptotic prediction n + 3, reported and not enforced.
    pub predicted_tau_plus: usize,
    pub meets_prediction: bool,
    /// More than two additions in every optimal AMC (fails at n = 1).
    pub more_than_two_additions: Option<bool>,
}

pub fn gap_report(n: u32, deep: bool, opts: &SearchOptions) -> Result<GapReport, ReportError> {
    if n == 0 {
        return Err(ReportError::ZeroN);
    }
    if n > DEEP_GAP_MAX_N {
        return Err(ReportError::TooDeep {
            n,
            limit: DEEP_GAP_MAX_N,
        });
    }
    if n > DEFAULT_GAP_MAX_N && !deep {
        return Err(ReportError::NeedsDeep {
            n,
            limit: DEFAULT_GAP_MAX_N,
        });
    }
    let target = (BigUint::one() << (1usize << n)) - 1u32;

    let tower = tower_slp(n).expect("n >= 1");
    let fermat = fermat_amc(n).expect("n >= 1");
    for (name, p) in [("tower", &tower), ("fermat", &fermat)] {
        if evaluate(p).0.to_biguint().as_ref() != Some(&target) {
            return Err(ReportError::Verification(format!(
                "{name} chain misses 2^2^{n} - 1"
            )));
        }
    }

    let slp = shortest_program(
        &target,
        &SearchOptions {
            model: Model::Slp,
            ..opts.clone()
        },
    )?;
    let amc = shortest_program(
        &target,
        &SearchOptions {
            model: Model::Amc,
            ..opts.clone()
        },
    )?;
    for r in [&slp, &amc] {
        if r.status == SearchStatus::BudgetExhausted {
            return Err(SearchError::BudgetExhausted.into());
        }
    }
    if slp.length > tower.len() || amc.length > fermat.len() {
        return Err(ReportError::Verification(
            "search result exceeds a constructive upper bound".into(),
        ));
    }

    let (min_additions, min_witness) = if amc.proven_optimal {
        let amc_opts = SearchOptions {
            model: Model::Amc,
            ..opts.clone()
        };
        match fewest_additions_at_length(&target, amc.length, &amc_opts)? {
            Some((w, adds)) => (Some(adds), Some(w)),
            None => {
                return Err(ReportError::Verification(
                    "optimal length has no witness".into(),
                ))
            }
        }
    } else {
        (None, None)
    };

    Ok(GapReport {
        n,
        target,
        tau: slp.length,
        tau_witness: slp.witness,
        tau_proven: slp.proven_optimal,
        tau_plus: amc.length,
        tau_plus_witness: amc.witness,
        tau_plus_proven: amc.proven_optimal,
        gap: amc.length.saturating_sub(slp.length),
        more_than_two_additions: min_additions.map(|a| a > 2),
        min_additions_among_optimal_amcs: min_additions,
        min_additions_witness: min_witness,
        tau_upper_bound: tower.len(),
        tau_plus_upper_bound: fermat.len(),
        predicted_tau_plus: n as usize + 3,
        meets_prediction: amc.length >= n as usize + 3,
    })
}

// ---------- α sweep ----------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaSweepReport {
    pub max_length: usize,
    /// Irredundant AMCs checked, by length.
    pub programs: Vec<u64>,
    pub failures: u64,
    /// Up to ten failing programs with the reason.
    pub examples: Vec<(Program, String)>,
}

fn check_alpha(steps: &[Step]) -> Result<(), String> {
    let p = to_program(steps);
    let d = alpha_decompose(&p).map_err(|e: AlphaError| e.to_string())?;
    let two = BigUint::from(2u32);
    if let Some(first) = d.alphas.first() {
        if *first != two {
            return Err(format!("α₁ = {first}"));
        }
    }
    if let Some(second) = d.alphas.get(1) {
        let c = d.c_exponent.ok_or("missing c")?;
        if *second != (BigUint::one() << c) + 1u32 {
            return Err(format!("α₂ = {second} is not 2^{c} + 1"));
        }
    }
    if d.alphas.len() >= 2 && d.value.bit(0) && d.final_exponents()[0] != 0 {
        return Err("odd value with e₁ > 0".into());
    }
    Ok(())
}

/// Decomposes every irredundant AMC up to `max_length` steps and checks
/// register values, α₁ = 2, α₂ = 2^c + 1 and e₁ = 0 for odd results.
pub fn alpha_sweep(max_length: usize, workers: usize) -> AlphaSweepReport {
    const SPLIT: usize = 4;
    let shape = Shape::up_to(max_length);
    let mut report = AlphaSweepReport {
        max_length,
        programs: vec![0; max_length + 1],
        failures: 0,
        examples: Vec::new(),
    };
    let record = |report: &mut AlphaSweepReport, steps: &[Step]| {
        report.programs[steps.len()] += 1;
        if let Err(reason) = check_alpha(steps) {
            report.failures += 1;
            if report.examples.len() < 10 {
                report.examples.push((to_program(steps), reason));
            }
        }
    };

    let mut shallow = Vec::new();
    let prefixes = split_irredundant(shape, SPLIT, |s, _| shallow.push(s.to_vec()));
    for s in &shallow {
        record(&mut report, s);
    }
    let run = |prefix| {
        let mut part = AlphaSweepReport {
            max_length,
            programs: vec![0; max_length + 1],
            failures: 0,
            examples: Vec::new(),
        };
        for_each_below(shape, prefix, |s, _| record(&mut part, s));
        part
    };
    let parts: Vec<AlphaSweepReport> = if workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| prefixes.into_par_iter().map(run).collect())
    } else {
        prefixes.into_iter().map(run).collect()
    };
    for part in parts {
        for (total, n) in report.programs.iter_mut().zip(part.programs) {
            *total += n;
        }
        report.failures += part.failures;
        for ex in part.examples {
            if report.examples.len() < 10 {
                report.examples.push(ex);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::format_chain;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn additions_for_fifteen() {
        let r = addition_count_report(&big(15), 5, &SearchOptions::new(Model::Amc)).unwrap();
        let four = r.rows.iter().find(|row| row.length == 4).unwrap();
        assert_eq!(four.min_additions, 3);
        assert_eq!(format_chain(&four.witness), "+ 0 0\n+ 1 0\n+ 2 1\n* 3 2\n");
        assert!(!r.partial);
    }

    #[test]
    fn additions_for_three() {
        let r = addition_count_report(&big(3), 3, &SearchOptions::new(Model::Amc)).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!((r.rows[0].length, r.rows[0].min_additions), (2, 2));
    }

    #[test]
    fn census_small() {
        let r = census(1, 2).unwrap();
        assert_eq!(r.computable_count, big(2));
        assert_eq!(r.fraction, 1.0);
        assert_eq!(r.per_length[2].new_values, 2);
        assert_eq!(r.per_length[2].count_bound, Some(big(64)));
        assert!(r.per_length.iter().all(|l| l.within_bound));

        let r = census(2, 3).unwrap();
        assert_eq!(r.total, big(4));
        assert!(r.fraction > 0.0 && r.fraction <= 1.0);
        assert!(census(0, 2).is_err());
    }

    #[test]
    fn gap_small() {
        let opts = SearchOptions::new(Model::Slp);
        let r = gap_report(1, false, &opts).unwrap();
        assert_eq!((r.tau, r.tau_plus, r.gap), (2, 2, 0));
        assert_eq!(r.more_than_two_additions, Some(false));
        let r = gap_report(2, false, &opts).unwrap();
        assert_eq!((r.tau, r.tau_plus, r.gap), (4, 4, 0));
        assert_eq!(r.min_additions_among_optimal_amcs, Some(3));
        assert!(matches!(
            gap_report(4, false, &opts),
            Err(ReportError::NeedsDeep { .. })
        ));
        assert!(matches!(
            gap_report(5, true, &opts),
            Err(ReportError::TooDeep { .. })
        ));
    }

    #[test]
    fn sweep_small_lengths() {
        let r = alpha_sweep(6, 1);
        assert_eq!(r.programs, vec![1, 1, 3, 15, 109, 1071, 13491]);
        assert_eq!(r.failures, 0);
        assert_eq!(alpha_sweep(6, 3), r);
    }
}
