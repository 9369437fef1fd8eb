//! Checking label queries against the brute-force oracle.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_steiner_cut, Graph, TerminalSet, Vertex};
use crate::labelfile::{LabelSet, SchemeKind};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest number of fault sets checked exhaustively.
    pub budget: u128,
    /// Fall back to sampling above the budget instead of failing.
    pub allow_sampling: bool,
    pub samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { budget: 200_000, allow_sampling: true, samples: 10_000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub faults: Vec<Vertex>,
    /// `None` when the query failed.
    pub scheme_verdict: Option<bool>,
    pub oracle: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub m: usize,
    pub terminals: usize,
    pub f: usize,
    pub scheme: SchemeKind,
    pub mode: VerifyMode,
    pub seed: Option<u64>,
    pub queries: usize,
    pub mismatches: Vec<Mismatch>,
    pub pass: bool,
}

/// `Σ_{s=1..f} C(n, s)`, saturating.
pub fn count_fault_sets(n: usize, f: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for s in 1..=f.min(n) {
        binom = binom.saturating_mul((n - s + 1) as u128) / s as u128;
        total = total.saturating_add(binom);
    }
    total
}

/// Every nonempty subset of `0..n` with at most `f` members, in
/// lexicographic order.
pub fn all_fault_sets(n: usize, f: usize) -> Vec<Vec<Vertex>> {
    fn rec(n: Vertex, f: usize, start: Vertex, cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        for v in start..n {
            cur.push(v);
            out.push(cur.clone());
            if cur.len() < f {
                rec(n, f, v + 1, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n as Vertex, f, 0, &mut Vec::new(), &mut out);
    out
}

/// `count` uniform fault sets: a size drawn with weight `C(n, s)`, then a
/// uniform subset of that size.
pub fn sample_fault_sets(n: usize, f: usize, count: usize, seed: u64) -> Vec<Vec<Vertex>> {
    let f = f.min(n);
    if f == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = (1..=f).map(|s| ln_binomial(n, s)).collect();
    let top = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = weights.iter().map(|w| (w - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut pick = rng.gen::<f64>() * total;
            let mut size = f;
            for (i, w) in weights.iter().enumerate() {
                if pick < *w {
                    size = i + 1;
                    break;
                }
                pick -= w;
            }
            let mut set: Vec<Vertex> = sample(&mut rng, n, size).into_iter().map(|v| v as Vertex).collect();
            set.sort_unstable();
            set
        })
        .collect()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Builds labels of the chosen scheme and checks them on every fault set, or
/// on a seeded sample when there are too many.
pub fn exhaustive_verify(
    g: &Graph,
    u: &TerminalSet,
    f: usize,
    scheme: SchemeKind,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    plan(g.n(), f, opts)?;
    let labels = LabelSet::build(g, u, f, scheme)?;
    verify_labels(g, u, f, &labels, opts)
}

fn plan(n: usize, f: usize, opts: &VerifyOptions) -> Result<VerifyMode> {
    let queries = count_fault_sets(n, f);
    if queries <= opts.budget {
        Ok(VerifyMode::Exhaustive)
    } else if opts.allow_sampling {
        Ok(VerifyMode::Sampled)
    } else {
        Err(Error::BudgetExceeded { queries, budget: opts.budget })
    }
}

/// Checks an existing label set; used directly by fault-injection tests.
pub fn verify_labels(
    g: &Graph,
    u: &TerminalSet,
    f: usize,
    labels: &LabelSet,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let mode = plan(g.n(), f, opts)?;
    let sets = match mode {
        VerifyMode::Exhaustive => all_fault_sets(g.n(), f),
        VerifyMode::Sampled => sample_fault_sets(g.n(), f, opts.samples, opts.seed),
    };
    let mismatches: Vec<Mismatch> = sets
        .par_iter()
        .filter_map(|faults| {
            let oracle = is_steiner_cut(g, u, faults);
            match labels.query(faults) {
                Ok(v) if v == oracle => None,
                Ok(v) => Some(Mismatch { faults: faults.clone(), scheme_verdict: Some(v), oracle, error: None }),
                Err(e) => {
                    Some(Mismatch { faults: faults.clone(), scheme_verdict: None, oracle, error: Some(e.to_string()) })
                }
            }
        })
        .collect();
    Ok(VerifyReport {
        n: g.n(),
        m: g.m(),
        terminals: u.len(),
        f,
        scheme: labels.kind(),
        mode,
        seed: (mode == VerifyMode::Sampled).then_some(opts.seed),
        queries: sets.len(),
        pass: mismatches.is_empty(),
        mismatches,
    })
}
