//! Depth-bounded canonical enumeration toward a fixed target.
//!
//! States hold strictly positive, pairwise distinct register values. Add and
//! Mul steps keep `lhs >= rhs`; Sub steps are always `larger - smaller`. In
//! AMC mode values must strictly increase and stay below the target. The last
//! step is never enumerated: it is solved by lookup against the target.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::time::Instant;

use rayon::prelude::*;

use crate::chain::{Model, Op, Step};

const FLUSH_EVERY: u64 = 1 << 12;

/// Prefix length at which a depth iteration is split into independent tasks.
const SPLIT_DEPTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Objective {
    /// Lexicographically smallest program.
    LexMin,
    /// Fewest additions, then lexicographically smallest.
    MinAdditions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Witness {
    pub steps: Vec<Step>,
    pub additions: usize,
}

impl Witness {
    fn key_cmp(&self, other: &Witness, objective: Objective) -> Ordering {
        match objective {
            Objective::LexMin => self.steps.cmp(&other.steps),
            Objective::MinAdditions => {
                (self.additions, &self.steps).cmp(&(other.additions, &other.steps))
            }
        }
    }
}

/// Shared node/time accounting across the tasks of one run.
pub(crate) struct Budget {
    node_limit: Option<u64>,
    deadline: Option<Instant>,
    spent: AtomicU64,
    aborted: AtomicBool,
}

impl Budget {
    pub fn new(node_limit: Option<u64>, deadline: Option<Instant>) -> Self {
        Budget {
            node_limit,
            deadline,
            spent: AtomicU64::new(0),
            aborted: AtomicBool::new(false),
        }
    }

    fn charge(&self, nodes: u64) -> bool {
        let total = self.spent.fetch_add(nodes, AtomicOrdering::Relaxed) + nodes;
        let over = self.node_limit.is_some_and(|limit| total > limit)
            || self.deadline.is_some_and(|d| Instant::now() >= d);
        if over {
            self.aborted.store(true, AtomicOrdering::Relaxed);
        }
        !self.aborted.load(AtomicOrdering::Relaxed)
    }
}

#[derive(Debug)]
pub(crate) struct Aborted;

#[derive(Debug, Clone, Copy)]
struct Explored {
    found: bool,
    /// No branch-and-bound cut happened below this node.
    complete: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct DepthOutcome {
    pub witness: Option<Witness>,
    pub nodes: u64,
    pub dedup_hits: u64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineConfig {
    pub model: Model,
    pub target: u128,
    pub objective: Objective,
    pub dedup_capacity: usize,
    pub workers: usize,
}

/// Searches every canonical program of exactly `length` steps for the target.
pub(crate) fn search_depth(
    config: &EngineConfig,
    length: usize,
    budget: &Budget,
) -> Result<DepthOutcome, Aborted> {
    debug_assert!(length >= 1);
    let split = SPLIT_DEPTH.min(length - 1);
    let mut root = Engine::new(config, budget);
    let mut prefixes = Vec::new();
    root.collect_prefixes(split, length, &mut prefixes);
    let mut outcome = DepthOutcome {
        nodes: root.nodes,
        ..DepthOutcome::default()
    };
    if !budget.charge(root.nodes) {
        return Err(Aborted);
    }

    let run_task = |prefix: &Prefix| -> Result<DepthOutcome, Aborted> {
        let mut engine = Engine::new(config, budget);
        engine.load(prefix);
        let result = engine.dfs(length - split);
        let flushed = budget.charge(engine.unflushed);
        result?;
        if !flushed {
            return Err(Aborted);
        }
        Ok(DepthOutcome {
            witness: engine.best,
            nodes: engine.nodes,
            dedup_hits: engine.dedup_hits,
        })
    };

    let results: Vec<Result<DepthOutcome, Aborted>> = if config.workers <= 1 {
        prefixes.iter().map(run_task).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .expect("thread pool");
        pool.install(|| prefixes.par_iter().map(run_task).collect())
    };

    for result in results {
        let task = result?;
        outcome.nodes += task.nodes;
        outcome.dedup_hits += task.dedup_hits;
        if let Some(w) = task.witness {
            let better = match &outcome.witness {
                None => true,
                Some(best) => w.key_cmp(best, config.objective) == Ordering::Less,
            };
            if better {
                outcome.witness = Some(w);
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone)]
struct Prefix {
    regs: Vec<u128>,
    steps: Vec<Step>,
    additions: usize,
    multiplications: usize,
}

struct Engine<'a> {
    config: EngineConfig,
    /// ⌈log₂ target⌉
    target_log: u32,
    regs: Vec<u128>,
    steps: Vec<Step>,
    additions: usize,
    multiplications: usize,
    best: Option<Witness>,
    dedup: HashSet<Box<[u128]>>,
    nodes: u64,
    unflushed: u64,
    dedup_hits: u64,
    budget: &'a Budget,
}

impl<'a> Engine<'a> {
    fn new(config: &EngineConfig, budget: &'a Budget) -> Self {
        let target_log = 128 - (config.target - 1).leading_zeros();
        Engine {
            config: *config,
            target_log,
            regs: vec![1],
            steps: Vec::new(),
            additions: 0,
            multiplications: 0,
            best: None,
            dedup: HashSet::new(),
            nodes: 0,
            unflushed: 0,
            dedup_hits: 0,
            budget,
        }
    }

    fn load(&mut self, prefix: &Prefix) {
        self.regs = prefix.regs.clone();
        self.steps = prefix.steps.clone();
        self.additions = prefix.additions;
        self.multiplications = prefix.multiplications;
    }

    fn tick(&mut self) -> Result<(), Aborted> {
        self.nodes += 1;
        self.unflushed += 1;
        if self.unflushed >= FLUSH_EVERY {
            let n = std::mem::take(&mut self.unflushed);
            if !self.budget.charge(n) {
                return Err(Aborted);
            }
        }
        Ok(())
    }

    fn max_value(&self) -> u128 {
        match self.config.model {
            Model::Amc => *self.regs.last().expect("register 0"),
            Model::Slp => *self.regs.iter().max().expect("register 0"),
        }
    }

    /// Candidate non-final steps in expansion order: Add, Sub, Mul, operand
    /// pairs in decreasing (lhs, rhs).
    fn candidates(&self) -> Vec<(Step, u128)> {
        let n = self.regs.len();
        let mut out = Vec::with_capacity(n * (n + 1));
        let ops: &[Op] = match self.config.model {
            Model::Slp => &[Op::Add, Op::Sub, Op::Mul],
            Model::Amc => &[Op::Add, Op::Mul],
        };
        for &op in ops {
            for lhs in (0..n).rev() {
                for rhs in (0..=lhs).rev() {
                    let (a, b) = (self.regs[lhs], self.regs[rhs]);
                    let candidate = match op {
                        Op::Add => a.checked_add(b).map(|v| (Step::add(lhs, rhs), v)),
                        Op::Mul => a.checked_mul(b).map(|v| (Step::mul(lhs, rhs), v)),
                        Op::Sub => match a.cmp(&b) {
                            Ordering::Greater => Some((Step::sub(lhs, rhs), a - b)),
                            Ordering::Less => Some((Step::sub(rhs, lhs), b - a)),
                            Ordering::Equal => None,
                        },
                    };
                    if let Some(c) = candidate {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Pruning for a value placed at a non-final position with `after` steps
    /// still to come.
    fn admissible(&self, step: Step, value: u128, after: usize) -> bool {
        let target = self.config.target;
        if value == 0 || value == target || self.regs.contains(&value) {
            return false;
        }
        let mut max = self.max_value();
        if self.config.model == Model::Amc {
            if value <= max || value > target {
                return false;
            }
            let (adds, muls) = match step.op {
                Op::Add => (self.additions + 1, self.multiplications),
                _ => (self.additions, self.multiplications + 1),
            };
            if !self.addition_budget_reaches(adds, muls, after) {
                return false;
            }
        }
        max = max.max(value);
        squares_reach(max, after, target)
    }

    /// Whether some split of the remaining steps into additions and
    /// multiplications lets the whole chain reach the target: a chain with a
    /// additions and m multiplications never exceeds 2^(a·2^m).
    fn addition_budget_reaches(&self, adds: usize, muls: usize, after: usize) -> bool {
        let need = self.target_log as u128;
        (0..=after).any(|extra_adds| {
            let a = (adds + extra_adds) as u128;
            let m = (muls + after - extra_adds) as u32;
            m >= 100 || a << m >= need
        })
    }

    fn push(&mut self, step: Step, value: u128) {
        match step.op {
            Op::Add => self.additions += 1,
            Op::Mul => self.multiplications += 1,
            Op::Sub => {}
        }
        self.regs.push(value);
        self.steps.push(step);
    }

    fn pop(&mut self) {
        let step = self.steps.pop().expect("nonempty");
        self.regs.pop();
        match step.op {
            Op::Add => self.additions -= 1,
            Op::Mul => self.multiplications -= 1,
            Op::Sub => {}
        }
    }

    /// Branch-and-bound: can any completion of the current prefix beat `best`?
    fn prefix_can_improve(&self) -> bool {
        let Some(best) = &self.best else {
            return true;
        };
        match self.config.objective {
            Objective::LexMin => {
                let d = self.steps.len();
                self.steps[..] <= best.steps[..d]
            }
            Objective::MinAdditions => self.additions <= best.additions,
        }
    }

    fn dedup_key(&self, remaining: usize) -> Box<[u128]> {
        let mut key: Vec<u128> = Vec::with_capacity(self.regs.len() + 1);
        key.push(remaining as u128);
        key.extend_from_slice(&self.regs);
        key[1..].sort_unstable();
        key.into_boxed_slice()
    }

    fn dfs(&mut self, remaining: usize) -> Result<Explored, Aborted> {
        self.tick()?;
        if remaining == 1 {
            return Ok(Explored {
                found: self.final_step(),
                complete: true,
            });
        }
        let key = if self.config.dedup_capacity > 0 {
            let key = self.dedup_key(remaining);
            if self.dedup.contains(&key) {
                self.dedup_hits += 1;
                return Ok(Explored {
                    found: false,
                    complete: true,
                });
            }
            Some(key)
        } else {
            None
        };

        let mut found = false;
        let mut complete = true;
        for (step, value) in self.candidates() {
            if !self.admissible(step, value, remaining - 1) {
                continue;
            }
            self.push(step, value);
            if self.prefix_can_improve() {
                let sub = self.dfs(remaining - 1);
                self.pop();
                let sub = sub?;
                found |= sub.found;
                complete &= sub.complete;
            } else {
                self.pop();
                complete = false;
            }
        }

        if let Some(key) = key {
            if !found && complete {
                if self.dedup.len() >= self.config.dedup_capacity {
                    self.dedup.clear();
                }
                self.dedup.insert(key);
            }
        }
        Ok(Explored { found, complete })
    }

    fn index_of(&self, value: u128) -> Option<usize> {
        self.regs.iter().position(|&v| v == value)
    }

    /// Lexicographically smallest final step of each op reaching the target.
    fn final_steps(&self) -> Vec<Step> {
        let target = self.config.target;
        let n = self.regs.len();
        let mut out = Vec::with_capacity(3);
        // Add
        for lhs in 0..n {
            let a = self.regs[lhs];
            if a >= target {
                continue;
            }
            if let Some(rhs) = self.index_of(target - a).filter(|&r| r <= lhs) {
                out.push(Step::add(lhs, rhs));
                break;
            }
        }
        if self.config.model == Model::Slp {
            for lhs in 0..n {
                let a = self.regs[lhs];
                if a <= target {
                    continue;
                }
                if let Some(rhs) = self.index_of(a - target) {
                    out.push(Step::sub(lhs, rhs));
                    break;
                }
            }
        }
        for lhs in 0..n {
            let a = self.regs[lhs];
            if !target.is_multiple_of(a) {
                continue;
            }
            if let Some(rhs) = self.index_of(target / a).filter(|&r| r <= lhs) {
                out.push(Step::mul(lhs, rhs));
                break;
            }
        }
        out
    }

    fn final_step(&mut self) -> bool {
        if self.regs.contains(&self.config.target) {
            return false;
        }
        let finals = self.final_steps();
        for step in &finals {
            let mut steps = self.steps.clone();
            steps.push(*step);
            let additions = self.additions + usize::from(step.op == Op::Add);
            let candidate = Witness { steps, additions };
            let better = match &self.best {
                None => true,
                Some(best) => candidate.key_cmp(best, self.config.objective) == Ordering::Less,
            };
            if better {
                self.best = Some(candidate);
            }
        }
        !finals.is_empty()
    }

    /// Enumerates admissible prefixes of exactly `depth` steps for a run of
    /// `length` total steps.
    fn collect_prefixes(&mut self, depth: usize, length: usize, out: &mut Vec<Prefix>) {
        self.nodes += 1;
        if self.steps.len() == depth {
            out.push(Prefix {
                regs: self.regs.clone(),
                steps: self.steps.clone(),
                additions: self.additions,
                multiplications: self.multiplications,
            });
            return;
        }
        let after = length - self.steps.len() - 1;
        for (step, value) in self.candidates() {
            if self.admissible(step, value, after) {
                self.push(step, value);
                self.collect_prefixes(depth, length, out);
                self.pop();
            }
        }
    }
}

/// Whether `max^(2^steps) >= target`, i.e. repeated squaring can still reach it.
pub(crate) fn squares_reach(max: u128, steps: usize, target: u128) -> bool {
    if max >= target {
        return true;
    }
    if max < 2 {
        return steps > 0 && squares_reach(2, steps - 1, target);
    }
    let mut v = max;
    for _ in 0..steps {
        match v.checked_mul(v) {
            Some(sq) if sq < target => v = sq,
            _ => return true,
        }
    }
    false
}
