//! Enumeration of irredundant AMCs: register values strictly increase and
//! every register except the last is an operand of some later step.
//!
//! Programs are visited in lexicographic step order, prefixes first, with
//! `+` and `*` operands written `lhs >= rhs`.

use crate::chain::{Op, Program, Step};

/// Non-final registers of an 8-step AMC stay below 2^64, so 128-bit values
/// are exact except possibly in the final register of an 8-step program.
pub const MAX_IRREDUNDANT_LENGTH: usize = 8;

/// Register values of a visited program. The final entry saturates at
/// `u128::MAX` when it does not fit.
pub type Values<'a> = &'a [u128];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub max_length: usize,
    /// Restrict to exactly this many (additions, multiplications).
    pub exact_counts: Option<(usize, usize)>,
}

impl Shape {
    pub fn up_to(max_length: usize) -> Self {
        assert!(max_length <= MAX_IRREDUNDANT_LENGTH, "length cap");
        Shape {
            max_length,
            exact_counts: None,
        }
    }

    pub fn exact(additions: usize, multiplications: usize) -> Self {
        let max_length = additions + multiplications;
        assert!(max_length <= MAX_IRREDUNDANT_LENGTH, "length cap");
        Shape {
            max_length,
            exact_counts: Some((additions, multiplications)),
        }
    }
}

/// A partially built program that can still be extended.
#[derive(Debug, Clone)]
pub struct Prefix {
    steps: Vec<Step>,
    values: Vec<u128>,
    uses: Vec<u32>,
    additions: usize,
}

impl Prefix {
    fn root() -> Self {
        Prefix {
            steps: Vec::new(),
            values: vec![1],
            uses: vec![0],
            additions: 0,
        }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    fn unused(&self) -> usize {
        self.uses.iter().filter(|&&u| u == 0).count()
    }

    fn complete(&self) -> bool {
        self.uses[..self.uses.len() - 1].iter().all(|&u| u > 0)
    }
}

struct Walker<'f, F> {
    shape: Shape,
    state: Prefix,
    /// Programs shorter than this are not reported.
    report_from: usize,
    /// Stop descending here and hand the state to `on_prefix` instead.
    split_at: Option<usize>,
    on_program: &'f mut F,
    prefixes: Vec<Prefix>,
}

impl<F: FnMut(&[Step], Values)> Walker<'_, F> {
    fn walk(&mut self) {
        let depth = self.state.steps.len();
        let mults = depth - self.state.additions;
        let counts_ok = match self.shape.exact_counts {
            None => true,
            Some((a, m)) => self.state.additions == a && mults == m,
        };
        if depth >= self.report_from && counts_ok && self.state.complete() {
            (self.on_program)(&self.state.steps, &self.state.values);
        }
        if depth == self.shape.max_length {
            return;
        }
        if self.split_at == Some(depth) {
            self.prefixes.push(self.state.clone());
            return;
        }
        // each remaining step retires at most two unused registers and adds
        // one, and the final register may stay unused
        let remaining = self.shape.max_length - depth;
        if self.state.unused() > remaining + 1 {
            return;
        }
        let (adds_left, mults_left) = match self.shape.exact_counts {
            Some((a, m)) => (a - self.state.additions, m - mults),
            None => (remaining, remaining),
        };

        let n = self.state.values.len();
        let last = self.state.values[n - 1];
        for op in [Op::Add, Op::Mul] {
            let left = if op == Op::Add { adds_left } else { mults_left };
            if left == 0 {
                continue;
            }
            for lhs in 0..n {
                for rhs in 0..=lhs {
                    let (a, b) = (self.state.values[lhs], self.state.values[rhs]);
                    let v = match op {
                        Op::Add => a.checked_add(b),
                        _ => a.checked_mul(b),
                    };
                    let v = match v {
                        Some(v) => v,
                        None if remaining == 1 => u128::MAX,
                        None => panic!("non-final register overflowed 128 bits"),
                    };
                    if v <= last {
                        continue;
                    }
                    self.push(Step::new(op, lhs, rhs), v);
                    self.walk();
                    self.pop();
                }
            }
        }
    }

    fn push(&mut self, step: Step, value: u128) {
        let s = &mut self.state;
        s.uses[step.lhs] += 1;
        s.uses[step.rhs] += 1;
        s.uses.push(0);
        s.values.push(value);
        s.steps.push(step);
        if step.op == Op::Add {
            s.additions += 1;
        }
    }

    fn pop(&mut self) {
        let s = &mut self.state;
        let step = s.steps.pop().expect("nonempty");
        s.values.pop();
        s.uses.pop();
        s.uses[step.lhs] -= 1;
        s.uses[step.rhs] -= 1;
        if step.op == Op::Add {
            s.additions -= 1;
        }
    }
}

/// Visits every irredundant AMC of the given shape, the empty program
/// included when it qualifies.
pub fn for_each_irredundant<F: FnMut(&[Step], Values)>(shape: Shape, mut f: F) {
    let mut w = Walker {
        shape,
        state: Prefix::root(),
        report_from: 0,
        split_at: None,
        on_program: &mut f,
        prefixes: Vec::new(),
    };
    w.walk();
}

/// Reports programs of at most `depth` steps and returns the live prefixes of
/// exactly `depth` steps, in visiting order.
pub fn split_irredundant<F: FnMut(&[Step], Values)>(
    shape: Shape,
    depth: usize,
    mut f: F,
) -> Vec<Prefix> {
    let mut w = Walker {
        shape,
        state: Prefix::root(),
        report_from: 0,
        split_at: Some(depth),
        on_program: &mut f,
        prefixes: Vec::new(),
    };
    w.walk();
    w.prefixes
}

/// Continues the walk strictly below a prefix from [`split_irredundant`].
pub fn for_each_below<F: FnMut(&[Step], Values)>(shape: Shape, prefix: Prefix, mut f: F) {
    let depth = prefix.steps.len();
    let mut w = Walker {
        shape,
        state: prefix,
        report_from: depth + 1,
        split_at: None,
        on_program: &mut f,
        prefixes: Vec::new(),
    };
    w.walk();
}

pub fn to_program(steps: &[Step]) -> Program {
    Program::new(steps.to_vec()).expect("walker emits valid steps")
}

/// Number of irredundant AMCs of each length up to `max_length`.
pub fn count_by_length(max_length: usize) -> Vec<u64> {
    let mut counts = vec![0; max_length + 1];
    for_each_irredundant(Shape::up_to(max_length), |steps, _| {
        counts[steps.len()] += 1
    });
    counts
}
