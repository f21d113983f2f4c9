//! Exact τ(z) and τ₊(z) by iterative deepening over canonical programs.
//!
//! Each depth `L` from [`lower_bound`] upward is searched exhaustively, so
//! the first depth with a witness is optimal. The witness returned at that
//! depth is the lexicographically smallest canonical program (steps compared
//! as `(op, lhs, rhs)` with `+ < - < *`).
//!
//! Canonical form, enforced by the engine:
//! * register values are strictly positive and pairwise distinct;
//! * `+` and `*` have `lhs >= rhs`, `-` is always larger minus smaller;
//! * in AMC mode values strictly increase.
//!
//! A depth iteration is split into independent subtree tasks at a fixed
//! prefix length. Tasks keep private dedup tables, so node counts and results
//! do not depend on the worker count.

mod engine;
pub mod enumerate;
pub mod memo;

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::chain::{Model, Op, Program, Step};
use crate::construct::brauer_slp;
use crate::json;

pub use enumerate::{
    enumerate_values, enumerate_values_with, EnumerateError, EnumerateOptions, ValueTable,
};
pub use memo::{MemoDb, MemoError, MemoRecord};

use engine::{Budget, EngineConfig, Objective};

/// Largest supported search depth. Every non-final register of a program of
/// at most this many steps fits in 64 bits, so the engine's 128-bit
/// arithmetic is exact.
pub const MAX_SEARCH_LENGTH: usize = 8;

pub const DEFAULT_DEDUP_CAPACITY: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("target must be at least {min}, got {got}")]
    TargetTooSmall { min: u32, got: String },
    #[error("target {0} exceeds the 128-bit search range")]
    TargetTooLarge(String),
    #[error("max length {0} exceeds the supported search depth {MAX_SEARCH_LENGTH}")]
    LengthCap(usize),
    #[error("search budget exhausted")]
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub model: Model,
    pub max_length: usize,
    /// Failure-memo entries kept per task before the table is cleared.
    pub dedup_capacity: usize,
    pub node_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    pub workers: usize,
}

impl SearchOptions {
    pub fn new(model: Model) -> Self {
        SearchOptions {
            model,
            max_length: MAX_SEARCH_LENGTH,
            dedup_capacity: DEFAULT_DEDUP_CAPACITY,
            node_budget: None,
            time_budget: None,
            workers: 1,
        }
    }

    pub fn with_max_length(mut self, max_length: usize) -> Self {
        self.max_length = max_length;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_node_budget(mut self, nodes: u64) -> Self {
        self.node_budget = Some(nodes);
        self
    }

    fn budget(&self) -> Budget {
        Budget::new(
            self.node_budget,
            self.time_budget.map(|d| Instant::now() + d),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Optimal,
    InfeasibleAtCap,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    #[serde(with = "json::decimal")]
    pub target: BigUint,
    pub model: Model,
    /// τ or τ₊ when proven; otherwise the length of the fallback witness.
    pub length: usize,
    pub witness: Program,
    pub proven_optimal: bool,
    pub status: SearchStatus,
    /// Every length below this was exhaustively refuted.
    pub refuted_below: usize,
    pub nodes_expanded: u64,
    pub dedup_hits: u64,
}

/// ⌈log₂ log₂ z⌉ + 1: a length-ℓ program never exceeds 2^(2^(ℓ−1)) in
/// absolute value.
pub fn lower_bound(z: &BigUint) -> Result<usize, SearchError> {
    if *z < BigUint::from(2u32) {
        return Err(SearchError::TargetTooSmall {
            min: 2,
            got: z.to_string(),
        });
    }
    // ⌈log₂ z⌉, then the least t with ⌈log₂ z⌉ <= 2^t
    let log_ceil = (z - 1u32).bits();
    let mut t = 0usize;
    while (1u64 << t) < log_ceil {
        t += 1;
    }
    Ok(t + 1)
}

pub fn tau(z: &BigUint, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    let opts = SearchOptions {
        model: Model::Slp,
        ..opts.clone()
    };
    shortest_program(z, &opts)
}

pub fn tau_plus(z: &BigUint, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    let opts = SearchOptions {
        model: Model::Amc,
        ..opts.clone()
    };
    shortest_program(z, &opts)
}

fn checked_target(z: &BigUint, opts: &SearchOptions) -> Result<u128, SearchError> {
    if opts.max_length > MAX_SEARCH_LENGTH {
        return Err(SearchError::LengthCap(opts.max_length));
    }
    if *z < BigUint::one() {
        return Err(SearchError::TargetTooSmall {
            min: 1,
            got: z.to_string(),
        });
    }
    z.to_u128()
        .ok_or_else(|| SearchError::TargetTooLarge(z.to_string()))
}

fn program_from(steps: Vec<Step>) -> Program {
    Program::new(steps).expect("engine emits valid steps")
}

/// Shortest program for `z` in `opts.model`.
pub fn shortest_program(z: &BigUint, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    let target = checked_target(z, opts)?;
    if target == 1 {
        return Ok(SearchResult {
            target: z.clone(),
            model: opts.model,
            length: 0,
            witness: Program::empty(),
            proven_optimal: true,
            status: SearchStatus::Optimal,
            refuted_below: 0,
            nodes_expanded: 0,
            dedup_hits: 0,
        });
    }
    let config = EngineConfig {
        model: opts.model,
        target,
        objective: Objective::LexMin,
        dedup_capacity: opts.dedup_capacity,
        workers: opts.workers.max(1),
    };
    let budget = opts.budget();
    let start = lower_bound(z)?;
    let mut nodes = 0;
    let mut dedup_hits = 0;
    let mut refuted_below = start;

    let fallback = |status, nodes, dedup_hits, refuted_below| {
        let (witness, _) = brauer_slp(z, None).expect("z >= 1");
        SearchResult {
            target: z.clone(),
            model: opts.model,
            length: witness.len(),
            witness,
            proven_optimal: false,
            status,
            refuted_below,
            nodes_expanded: nodes,
            dedup_hits,
        }
    };

    for length in start..=opts.max_length {
        let outcome = match engine::search_depth(&config, length, &budget) {
            Ok(o) => o,
            Err(_) => {
                return Ok(fallback(
                    SearchStatus::BudgetExhausted,
                    nodes,
                    dedup_hits,
                    refuted_below,
                ))
            }
        };
        nodes += outcome.nodes;
        dedup_hits += outcome.dedup_hits;
        if let Some(w) = outcome.witness {
            return Ok(SearchResult {
                target: z.clone(),
                model: opts.model,
                length,
                witness: program_from(w.steps),
                proven_optimal: true,
                status: SearchStatus::Optimal,
                refuted_below: length,
                nodes_expanded: nodes,
                dedup_hits,
            });
        }
        refuted_below = length + 1;
    }
    Ok(fallback(
        SearchStatus::InfeasibleAtCap,
        nodes,
        dedup_hits,
        refuted_below,
    ))
}

/// A witness of exactly `length` steps using as few additions as possible
/// (ties broken lexicographically), or `None` if no canonical program of that
/// length computes `z`.
pub fn fewest_additions_at_length(
    z: &BigUint,
    length: usize,
    opts: &SearchOptions,
) -> Result<Option<(Program, usize)>, SearchError> {
    let target = checked_target(z, opts)?;
    if length > MAX_SEARCH_LENGTH {
        return Err(SearchError::LengthCap(length));
    }
    if target == 1 {
        return Ok((length == 0).then(|| (Program::empty(), 0)));
    }
    if length == 0 {
        return Ok(None);
    }
    let config = EngineConfig {
        model: opts.model,
        target,
        objective: Objective::MinAdditions,
        dedup_capacity: opts.dedup_capacity,
        workers: opts.workers.max(1),
    };
    let budget = opts.budget();
    let outcome =
        engine::search_depth(&config, length, &budget).map_err(|_| SearchError::BudgetExhausted)?;
    Ok(outcome.witness.map(|w| {
        let adds = w.steps.iter().filter(|s| s.op == Op::Add).count();
        (program_from(w.steps), adds)
    }))
}
