//! Every positive value computable within a length cap, with its shortest length.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::chain::Model;

use super::MAX_SEARCH_LENGTH;

pub const DEFAULT_SLP_CAP: usize = 5;
pub const DEFAULT_AMC_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("length {length} exceeds the {model} enumeration cap {cap}")]
    CapExceeded {
        length: usize,
        model: Model,
        cap: usize,
    },
}

#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub cap: usize,
    pub dedup_capacity: usize,
    pub node_budget: Option<u64>,
}

impl EnumerateOptions {
    pub fn for_model(model: Model) -> Self {
        EnumerateOptions {
            cap: match model {
                Model::Slp => DEFAULT_SLP_CAP,
                Model::Amc => DEFAULT_AMC_CAP,
            },
            dedup_capacity: 1 << 22,
            node_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    pub model: Model,
    pub max_length: usize,
    /// Shortest canonical length of every value reached, 1 ↦ 0 included.
    pub shortest: BTreeMap<u128, usize>,
    /// The node budget ran out or a value overflowed; counts are lower bounds.
    pub truncated: bool,
    pub nodes: u64,
}

impl ValueTable {
    /// Entry ℓ is the number of values whose shortest length is exactly ℓ.
    pub fn new_per_length(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_length + 1];
        for &len in self.shortest.values() {
            counts[len] += 1;
        }
        counts
    }

    /// Entry ℓ is the number of values computable in at most ℓ steps.
    pub fn cumulative_per_length(&self) -> Vec<usize> {
        self.new_per_length()
            .iter()
            .scan(0, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }

    pub fn get(&self, value: u128) -> Option<usize> {
        self.shortest.get(&value).copied()
    }
}

pub fn enumerate_values(length: usize, model: Model) -> Result<ValueTable, EnumerateError> {
    enumerate_values_with(length, model, &EnumerateOptions::for_model(model))
}

pub fn enumerate_values_with(
    length: usize,
    model: Model,
    opts: &EnumerateOptions,
) -> Result<ValueTable, EnumerateError> {
    let cap = opts.cap.min(MAX_SEARCH_LENGTH);
    if length > cap {
        return Err(EnumerateError::CapExceeded { length, model, cap });
    }
    let mut walker = Walker {
        model,
        length,
        regs: vec![1],
        shortest: BTreeMap::from([(1u128, 0usize)]),
        visited: HashSet::new(),
        dedup_capacity: opts.dedup_capacity,
        node_budget: opts.node_budget,
        nodes: 0,
        truncated: false,
    };
    walker.walk();
    Ok(ValueTable {
        model,
        max_length: length,
        shortest: walker.shortest,
        truncated: walker.truncated,
        nodes: walker.nodes,
    })
}

struct Walker {
    model: Model,
    length: usize,
    regs: Vec<u128>,
    shortest: BTreeMap<u128, usize>,
    visited: HashSet<Box<[u128]>>,
    dedup_capacity: usize,
    node_budget: Option<u64>,
    nodes: u64,
    truncated: bool,
}

impl Walker {
    fn walk(&mut self) {
        let depth = self.regs.len() - 1;
        if depth == self.length {
            return;
        }
        if self.node_budget.is_some_and(|b| self.nodes >= b) {
            self.truncated = true;
            return;
        }
        self.nodes += 1;
        if self.length - depth >= 2 {
            let mut key: Vec<u128> = Vec::with_capacity(self.regs.len() + 1);
            key.push((self.length - depth) as u128);
            key.extend_from_slice(&self.regs);
            key[1..].sort_unstable();
            let key = key.into_boxed_slice();
            if self.visited.contains(&key) {
                return;
            }
            if self.visited.len() >= self.dedup_capacity {
                self.visited.clear();
            }
            self.visited.insert(key);
        }

        let n = self.regs.len();
        let max = *self.regs.iter().max().expect("register 0");
        let mut next = Vec::with_capacity(n * (n + 1) * 3 / 2);
        for lhs in 0..n {
            for rhs in 0..=lhs {
                let (a, b) = (self.regs[lhs], self.regs[rhs]);
                match a.checked_add(b) {
                    Some(v) => next.push(v),
                    None => self.truncated = true,
                }
                if self.model == Model::Slp && a != b {
                    next.push(a.abs_diff(b));
                }
                match a.checked_mul(b) {
                    Some(v) => next.push(v),
                    None => self.truncated = true,
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        for v in next {
            if self.regs.contains(&v) || (self.model == Model::Amc && v <= max) {
                continue;
            }
            let len = depth + 1;
            let entry = self.shortest.entry(v).or_insert(len);
            *entry = (*entry).min(len);
            self.regs.push(v);
            self.walk();
            self.regs.pop();
        }
    }
}
