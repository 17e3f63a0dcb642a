//! Even-vs-odd task grid and mixing-fraction data assignment.

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamKey, DATA_MACHINE};

pub const TASKS: usize = 25;

/// Task m pairs even digit 2(m / 5) with odd digit 2(m mod 5) + 1.
pub fn task_digits(task: usize) -> (u8, u8) {
    ((2 * (task / 5)) as u8, (2 * (task % 5) + 1) as u8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskAssignment {
    pub p: f64,
    /// examples kept per digit after equal-size truncation
    pub per_digit: usize,
    pub tasks: Vec<(u8, u8)>,
    /// corpus row indices held by each machine
    pub machines: Vec<Vec<usize>>,
}

/// Uniform random prefix of length `k` of a permutation of `items`.
fn shuffled_prefix(items: &[usize], k: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut v = items.to_vec();
    for i in 0..k.min(v.len()) {
        let j = i + rng.next_below((v.len() - i) as u64) as usize;
        v.swap(i, j);
    }
    v.truncate(k);
    v
}

/// Each machine gets round(p 2n) examples from its own task and the rest from
/// the pooled ten digits. Draws come from fixed per-machine permutations, so
/// assignments for different `p` and the same seed are nested.
pub fn build_tasks_and_assign(corpus: &Corpus, p: f64, seed: u64, per_digit: Option<usize>) -> Result<TaskAssignment> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("mixing fraction p must lie in [0, 1]"));
    }
    let mut by_digit: Vec<Vec<usize>> = vec![Vec::new(); 10];
    for (i, &l) in corpus.labels.iter().enumerate() {
        if l > 9 {
            return Err(Error::contract(format!("label {l} is not a digit")));
        }
        by_digit[l as usize].push(i);
    }
    let smallest = by_digit.iter().map(Vec::len).min().unwrap_or(0);
    let n = per_digit.unwrap_or(smallest);
    if n == 0 || smallest < n {
        return Err(Error::param(format!(
            "need {} examples of every digit, smallest class has {smallest}",
            n.max(1)
        )));
    }
    for d in &mut by_digit {
        d.truncate(n);
    }
    let pool: Vec<usize> = by_digit.iter().flatten().copied().collect();
    let own = (p * 2.0 * n as f64).round() as usize;
    let mut tasks = Vec::with_capacity(TASKS);
    let mut machines = Vec::with_capacity(TASKS);
    for m in 0..TASKS {
        let (e, o) = task_digits(m);
        tasks.push((e, o));
        let task_pool: Vec<usize> = by_digit[e as usize].iter().chain(&by_digit[o as usize]).copied().collect();
        let mut r_task = RngStream::new(seed, StreamKey::new(0, DATA_MACHINE, m as u64, 0));
        let mut r_mix = RngStream::new(seed, StreamKey::new(0, DATA_MACHINE, m as u64, 1));
        let mut idx = shuffled_prefix(&task_pool, own, &mut r_task);
        idx.extend(shuffled_prefix(&pool, 2 * n - own, &mut r_mix));
        machines.push(idx);
    }
    Ok(TaskAssignment {
        p,
        per_digit: n,
        tasks,
        machines,
    })
}

impl TaskAssignment {
    /// Label of a corpus row: even digit +1, odd digit -1.
    pub fn sign(digit: u8) -> f64 {
        if digit % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
