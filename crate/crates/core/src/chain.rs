//! Straight-line programs over the integers.
//!
//! A [`Program`] is a list of assignment steps. Register 0 always holds the
//! constant 1 and step `i` (1-based) writes register `i` from two strictly
//! earlier registers. A program without subtraction is an addition
//! multiplication chain (AMC).
//!
//! The text form is one step per line, `<op> <j> <k>`, with `#` comments:
//!
//! ```text
//! + 0 0   # 2
//! * 1 1   # 4
//! * 2 2   # 16
//! - 3 0   # 15
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("line {line}: unknown op token `{token}`")]
    BadOp { line: usize, token: String },
    #[error("line {line}: expected `<op> <j> <k>`, found {found} field(s)")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: `{token}` is not a register index")]
    BadIndex { line: usize, token: String },
    #[error("index {index} out of range at step {step} (line {line})")]
    IndexOutOfRange {
        line: usize,
        step: usize,
        index: usize,
    },
    #[error("index {index} out of range at step {step}")]
    StepOutOfRange { step: usize, index: usize },
    #[error("modulus must be at least 2, got {0}")]
    Modulus(u64),
}

/// Program model: monotone chain or general straight-line program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Slp,
    Amc,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Slp => "slp",
            Model::Amc => "amc",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slp" => Ok(Model::Slp),
            "amc" => Ok(Model::Amc),
            other => Err(format!("unknown model `{other}` (expected slp or amc)")),
        }
    }
}

/// Ordering is Add < Sub < Mul; search tie-breaks rely on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
        }
    }

    pub fn from_token(token: &str) -> Option<Op> {
        match token {
            "+" => Some(Op::Add),
            "-" => Some(Op::Sub),
            "*" => Some(Op::Mul),
            _ => None,
        }
    }

    pub fn is_commutative(self) -> bool {
        !matches!(self, Op::Sub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub op: Op,
    pub lhs: usize,
    pub rhs: usize,
}

impl Step {
    pub const fn new(op: Op, lhs: usize, rhs: usize) -> Self {
        Step { op, lhs, rhs }
    }

    pub const fn add(lhs: usize, rhs: usize) -> Self {
        Step::new(Op::Add, lhs, rhs)
    }

    pub const fn sub(lhs: usize, rhs: usize) -> Self {
        Step::new(Op::Sub, lhs, rhs)
    }

    pub const fn mul(lhs: usize, rhs: usize) -> Self {
        Step::new(Op::Mul, lhs, rhs)
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.op.symbol(), self.lhs, self.rhs)
    }
}

/// A validated straight-line program. Register 0 is the constant 1 and is not
/// a step, so `len()` is the number of assignments.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program {
    steps: Vec<Step>,
}

impl Program {
    pub fn new(steps: Vec<Step>) -> Result<Self, ChainError> {
        for (pos, step) in steps.iter().enumerate() {
            let register = pos + 1;
            for index in [step.lhs, step.rhs] {
                if index >= register {
                    return Err(ChainError::StepOutOfRange {
                        step: register,
                        index,
                    });
                }
            }
        }
        Ok(Program { steps })
    }

    pub fn empty() -> Self {
        Program::default()
    }

    /// Appends a step and returns the register it writes.
    pub fn push(&mut self, step: Step) -> Result<usize, ChainError> {
        let register = self.steps.len() + 1;
        for index in [step.lhs, step.rhs] {
            if index >= register {
                return Err(ChainError::StepOutOfRange {
                    step: register,
                    index,
                });
            }
        }
        self.steps.push(step);
        Ok(register)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Index of the register holding c(P).
    pub fn result_register(&self) -> usize {
        self.steps.len()
    }

    pub fn has_subtraction(&self) -> bool {
        self.steps.iter().any(|s| s.op == Op::Sub)
    }

    pub fn model(&self) -> Model {
        if self.has_subtraction() {
            Model::Slp
        } else {
            Model::Amc
        }
    }

    /// Drops steps whose register never reaches the result, renumbering the
    /// survivors. The computed value is unchanged.
    pub fn prune_dead(&self) -> Program {
        let n = self.steps.len();
        let mut live = vec![false; n + 1];
        live[n] = true;
        for register in (1..=n).rev() {
            if live[register] {
                let step = self.steps[register - 1];
                live[step.lhs] = true;
                live[step.rhs] = true;
            }
        }
        let mut renumber = vec![0usize; n + 1];
        let mut steps = Vec::new();
        for register in 1..=n {
            if live[register] {
                let step = self.steps[register - 1];
                steps.push(Step::new(step.op, renumber[step.lhs], renumber[step.rhs]));
                renumber[register] = steps.len();
            }
        }
        Program { steps }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_chain(self))
    }
}

impl Serialize for Program {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_chain(self))
    }
}

impl FromStr for Program {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_chain(s)
    }
}

/// Parses chain text. Blank lines and `#` comments are skipped; fields may be
/// separated by any run of whitespace.
pub fn parse_chain(text: &str) -> Result<Program, ChainError> {
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(ChainError::FieldCount {
                line,
                found: fields.len(),
            });
        }
        let op = Op::from_token(fields[0]).ok_or_else(|| ChainError::BadOp {
            line,
            token: fields[0].to_string(),
        })?;
        let step_no = steps.len() + 1;
        let mut operands = [0usize; 2];
        for (slot, token) in operands.iter_mut().zip(&fields[1..]) {
            let index: usize = token.parse().map_err(|_| ChainError::BadIndex {
                line,
                token: token.to_string(),
            })?;
            if index >= step_no {
                return Err(ChainError::IndexOutOfRange {
                    line,
                    step: step_no,
                    index,
                });
            }
            *slot = index;
        }
        steps.push(Step::new(op, operands[0], operands[1]));
    }
    Ok(Program { steps })
}

/// Canonical text: one `\n`-terminated line per step, nothing else.
pub fn format_chain(p: &Program) -> String {
    let mut out = String::with_capacity(p.len() * 8);
    for step in p.steps() {
        out.push_str(&step.to_string());
        out.push('\n');
    }
    out
}

/// Register values a₀…a_ℓ of an evaluated program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalTrace {
    pub values: Vec<BigInt>,
}

impl EvalTrace {
    pub fn result(&self) -> &BigInt {
        self.values.last().expect("trace always holds register 0")
    }
}

pub fn evaluate(p: &Program) -> (BigInt, EvalTrace) {
    let mut values: Vec<BigInt> = Vec::with_capacity(p.len() + 1);
    values.push(BigInt::one());
    for step in p.steps() {
        let a = &values[step.lhs];
        let b = &values[step.rhs];
        let v = match step.op {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
        };
        values.push(v);
    }
    let trace = EvalTrace { values };
    (trace.result().clone(), trace)
}

/// c(P) mod m with every intermediate reduced; c(P) itself is never built.
pub fn evaluate_mod(p: &Program, m: u64) -> Result<u64, ChainError> {
    if m < 2 {
        return Err(ChainError::Modulus(m));
    }
    let mut values: Vec<u64> = Vec::with_capacity(p.len() + 1);
    values.push(1 % m);
    for step in p.steps() {
        let a = values[step.lhs];
        let b = values[step.rhs];
        let v = match step.op {
            Op::Add => ((a as u128 + b as u128) % m as u128) as u64,
            Op::Sub => ((a as u128 + m as u128 - b as u128) % m as u128) as u64,
            Op::Mul => ((a as u128 * b as u128) % m as u128) as u64,
        };
        values.push(v);
    }
    Ok(*values.last().expect("register 0 present"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub model: Model,
    pub additions: usize,
    pub subtractions: usize,
    pub multiplications: usize,
    /// `None` for programs with subtraction: irredundancy is only defined for AMCs.
    pub irredundant: Option<bool>,
}

pub fn classify(p: &Program) -> Classification {
    let count = |op| p.steps().iter().filter(|s| s.op == op).count();
    let additions = count(Op::Add);
    let subtractions = count(Op::Sub);
    let multiplications = count(Op::Mul);
    let model = if subtractions == 0 {
        Model::Amc
    } else {
        Model::Slp
    };
    let irredundant = match model {
        Model::Slp => None,
        Model::Amc => Some(is_irredundant_amc(p)),
    };
    Classification {
        model,
        additions,
        subtractions,
        multiplications,
        irredundant,
    }
}

fn is_irredundant_amc(p: &Program) -> bool {
    let (_, trace) = evaluate(p);
    if trace.values.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    let mut used = vec![false; p.len() + 1];
    for step in p.steps() {
        used[step.lhs] = true;
        used[step.rhs] = true;
    }
    used[..p.len()].iter().all(|&u| u)
}
