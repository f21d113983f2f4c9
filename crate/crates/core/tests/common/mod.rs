//! Shared test support: an unpruned breadth-first oracle and a CLI runner.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::Path;
use std::process::Command;

/// Breadth-first search over register multisets with no canonical form: every
/// ordered operand pair, duplicates kept, zero and negative values kept
/// (SLP). Returns the first level at which each value is produced.
pub fn oracle_levels(depth: usize, with_sub: bool) -> BTreeMap<i128, usize> {
    let mut first = BTreeMap::from([(1i128, 0usize)]);
    let mut level: HashSet<Vec<i128>> = HashSet::from([vec![1i128]]);
    for l in 1..=depth {
        let mut next = HashSet::new();
        for state in &level {
            for &a in state {
                for &b in state {
                    let mut vals = vec![a.checked_add(b), a.checked_mul(b)];
                    if with_sub {
                        vals.push(a.checked_sub(b));
                    }
                    for v in vals {
                        let v = v.expect("oracle values fit in 128 bits");
                        first.entry(v).or_insert(l);
                        if l < depth {
                            let mut s = state.clone();
                            let at = s.partition_point(|&x| x < v);
                            s.insert(at, v);
                            next.insert(s);
                        }
                    }
                }
            }
        }
        level = next;
    }
    first
}

/// Positive values with their first level, restricted to levels ≤ `max`.
pub fn positive_within(levels: &BTreeMap<i128, usize>, max: usize) -> BTreeMap<u128, usize> {
    levels
        .iter()
        .filter(|&(&v, &l)| v > 0 && l <= max)
        .map(|(&v, &l)| (v as u128, l))
        .collect()
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(dir: &Path, args: &[&str]) -> CliRun {
    let out = Command::new(env!("CARGO_BIN_EXE_chainsmith"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

pub fn json(run: &CliRun) -> serde_json::Value {
    serde_json::from_str(&run.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}\nstderr: {}", run.stdout, run.stderr))
}
