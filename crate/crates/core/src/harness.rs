//! Instance generation and the label-size scaling bench.
//!
//! Bench CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `u_size` | number of terminals |
//! | `rep` | repetition index |
//! | `seed` | seed of this instance, derived from the bench seed |
//! | `scheme` | `main` or `warmup` |
//! | `f` | fault bound |
//! | `n`, `m` | graph size |
//! | `max_star_entries`, `mean_star_entries` | star entries per label |
//! | `max_hat_entries` | subset labels per label (main scheme) |
//! | `max_serialized_bits` | largest label in bits; depends on the connectivity backend |
//! | `r`, `bad_count` | threshold and `|B|` (main scheme) |
//! | `fitted_exponent` | least-squares slope over the whole bench |
//! | `error` | build error, empty on success |

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::read_instance;
use crate::graph::{Graph, TerminalSet, Vertex};
use crate::labelfile::SchemeKind;
use crate::scheme::{build_labels, label_stats};
use crate::warmup::{build_warmup_labels, warmup_stats};

const GNP_RETRIES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphFamily {
    /// Erdős–Rényi; `p` defaults to `2 ln n / n`.
    Gnp {
        n: usize,
        p: Option<f64>,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    /// Vertex 0 joined to `1..n`.
    Star {
        n: usize,
    },
    /// Uniform random labelled tree.
    Tree {
        n: usize,
    },
    File {
        path: PathBuf,
    },
}

impl GraphFamily {
    fn is_random(&self) -> bool {
        matches!(self, GraphFamily::Gnp { .. } | GraphFamily::Tree { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalRule {
    All,
    RandomK(usize),
    /// Degree-one vertices.
    Leaves,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: GraphFamily,
    pub terminals: TerminalRule,
    pub f: usize,
    pub seed: Option<u64>,
    pub reps: usize,
}

pub fn default_gnp_p(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        (2.0 * (n as f64).ln() / n as f64).min(1.0)
    }
}

pub fn gnp(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n as Vertex {
        for b in a + 1..n as Vertex {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).expect("generated edges are simple")
}

pub fn grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| (r * cols + c) as Vertex;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::new(rows * cols, edges).expect("grid edges are simple")
}

pub fn star(n: usize) -> Graph {
    Graph::new(n, (1..n as Vertex).map(|v| (0, v))).expect("star edges are simple")
}

/// Uniform labelled tree decoded from a random Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Graph {
    if n < 2 {
        return Graph::empty(n);
    }
    let code: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(0..n as Vertex)).collect();
    let mut degree = vec![1usize; n];
    for &v in &code {
        degree[v as usize] += 1;
    }
    let mut leaves: BTreeSet<Vertex> = (0..n as Vertex).filter(|&v| degree[v as usize] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &code {
        let leaf = leaves.pop_first().expect("a Prüfer decode always has a leaf");
        edges.push((leaf, v));
        degree[v as usize] -= 1;
        if degree[v as usize] == 1 {
            leaves.insert(v);
        }
    }
    let rest: Vec<Vertex> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).expect("tree edges are simple")
}

fn pick_terminals(g: &Graph, rule: &TerminalRule, rng: Option<&mut ChaCha8Rng>) -> Result<TerminalSet> {
    match rule {
        TerminalRule::All => Ok(TerminalSet::all(g.n())),
        TerminalRule::Leaves => TerminalSet::new(g.n(), (0..g.n() as Vertex).filter(|&v| g.degree(v) == 1)),
        TerminalRule::RandomK(k) => {
            if *k > g.n() {
                return Err(Error::InvalidArgument(format!("k={k} exceeds n={}", g.n())));
            }
            let rng = rng.ok_or_else(|| Error::InvalidArgument("random terminals need a seed".into()))?;
            TerminalSet::new(g.n(), sample(rng, g.n(), *k).into_iter().map(|v| v as Vertex))
        }
    }
}

/// Generates one instance; identical configs give identical instances.
pub fn gen_instance(cfg: &ExperimentConfig) -> Result<(Graph, TerminalSet)> {
    let needs_seed = cfg.family.is_random() || matches!(cfg.terminals, TerminalRule::RandomK(_));
    let mut rng = match cfg.seed {
        Some(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        None if needs_seed => return Err(Error::InvalidArgument("random families need a seed".into())),
        None => None,
    };
    match &cfg.family {
        GraphFamily::Gnp { n, p } => {
            let p = p.unwrap_or_else(|| default_gnp_p(*n));
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
            }
            let rng = rng.as_mut().unwrap();
            for _ in 0..GNP_RETRIES {
                let g = gnp(*n, p, rng);
                let u = pick_terminals(&g, &cfg.terminals, Some(rng))?;
                if u.len() >= 2 {
                    return Ok((g, u));
                }
            }
            Err(Error::GenerationFailed(format!("no draw with two terminals in {GNP_RETRIES} tries")))
        }
        GraphFamily::Grid { rows, cols } => {
            let g = grid(*rows, *cols);
            let u = pick_terminals(&g, &cfg.terminals, rng.as_mut())?;
            Ok((g, u))
        }
        GraphFamily::Star { n } => {
            let g = star(*n);
            let u = pick_terminals(&g, &cfg.terminals, rng.as_mut())?;
            Ok((g, u))
        }
        GraphFamily::Tree { n } => {
            let g = random_tree(*n, rng.as_mut().unwrap());
            let u = pick_terminals(&g, &cfg.terminals, rng.as_mut())?;
            Ok((g, u))
        }
        GraphFamily::File { path } => {
            let (g, file_u) = read_instance(path)?;
            let u = match cfg.terminals {
                TerminalRule::All if !file_u.is_empty() => file_u,
                ref rule => pick_terminals(&g, rule, rng.as_mut())?,
            };
            Ok((g, u))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub scheme: SchemeKind,
    pub f: usize,
    pub u_sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Instances use `n = n_factor · |U|` vertices.
    pub n_factor: usize,
    /// Edge probability; defaults to `2 ln n / n`.
    pub p: Option<f64>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scheme: SchemeKind::Main,
            f: 2,
            u_sizes: vec![16, 64, 256],
            reps: 10,
            seed: 0,
            n_factor: 2,
            p: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub u_size: usize,
    pub rep: usize,
    pub seed: u64,
    pub scheme: SchemeKind,
    pub f: usize,
    pub n: usize,
    pub m: usize,
    pub max_star_entries: usize,
    pub mean_star_entries: f64,
    pub max_hat_entries: usize,
    pub max_serialized_bits: usize,
    pub r: usize,
    pub bad_count: usize,
    pub fitted_exponent: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub u_size: usize,
    /// Largest label over all repetitions.
    pub max_star_entries: usize,
    /// Median over repetitions of the largest label.
    pub median_max_star_entries: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    pub sizes: Vec<SizeSummary>,
    /// Slope of `ln(max entries)` against `ln |U|`; entries are floored at 1.
    pub fitted_exponent: Option<f64>,
}

/// Seed of repetition `rep` at size `u_size`, on its own ChaCha stream.
pub fn instance_seed(base: u64, u_size: usize, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(((u_size as u64) << 20) | rep as u64);
    rng.next_u64()
}

fn measure(cfg: &BenchConfig, u_size: usize, rep: usize) -> BenchRow {
    let seed = instance_seed(cfg.seed, u_size, rep);
    let n = cfg.n_factor.max(1) * u_size;
    let mut row = BenchRow {
        u_size,
        rep,
        seed,
        scheme: cfg.scheme,
        f: cfg.f,
        n,
        m: 0,
        max_star_entries: 0,
        mean_star_entries: 0.0,
        max_hat_entries: 0,
        max_serialized_bits: 0,
        r: 0,
        bad_count: 0,
        fitted_exponent: None,
        error: None,
    };
    let exp = ExperimentConfig {
        family: GraphFamily::Gnp { n, p: cfg.p },
        terminals: TerminalRule::RandomK(u_size),
        f: cfg.f,
        seed: Some(seed),
        reps: 1,
    };
    let outcome = gen_instance(&exp).and_then(|(g, u)| {
        row.m = g.m();
        match cfg.scheme {
            SchemeKind::Main => {
                let s = label_stats(&build_labels(&g, &u, cfg.f)?);
                row.max_star_entries = s.max_star_entries;
                row.mean_star_entries = s.mean_star_entries;
                row.max_hat_entries = s.max_hat_entries;
                row.max_serialized_bits = s.max_serialized_bits;
                row.r = s.r;
                row.bad_count = s.bad_count;
            }
            SchemeKind::Warmup => {
                let s = warmup_stats(&build_warmup_labels(&g, &u, cfg.f)?);
                row.max_star_entries = s.max_star_entries;
                row.mean_star_entries = s.mean_star_entries;
                row.max_serialized_bits = s.max_serialized_bits;
            }
        }
        Ok(())
    });
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

/// Builds labels for every `(|U|, rep)` pair in parallel; rows come back
/// ordered by `(|U|, rep)`.
pub fn measure_sizes(cfg: &BenchConfig) -> Vec<BenchRow> {
    let jobs: Vec<(usize, usize)> = cfg.u_sizes.iter().flat_map(|&s| (0..cfg.reps).map(move |rep| (s, rep))).collect();
    jobs.par_iter().map(|&(s, rep)| measure(cfg, s, rep)).collect()
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn median(values: &mut [usize]) -> f64 {
    values.sort_unstable();
    let k = values.len();
    if k == 0 {
        0.0
    } else if k % 2 == 1 {
        values[k / 2] as f64
    } else {
        (values[k / 2 - 1] + values[k / 2]) as f64 / 2.0
    }
}

/// Per-size summaries over the successful rows.
pub fn summarize(rows: &[BenchRow], u_sizes: &[usize]) -> Vec<SizeSummary> {
    u_sizes
        .iter()
        .filter_map(|&s| {
            let mut maxima: Vec<usize> =
                rows.iter().filter(|r| r.u_size == s && r.error.is_none()).map(|r| r.max_star_entries).collect();
            let max = *maxima.iter().max()?;
            Some(SizeSummary { u_size: s, max_star_entries: max, median_max_star_entries: median(&mut maxima) })
        })
        .collect()
}

pub fn run_scaling_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.u_sizes.len() < 3 || cfg.u_sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("need at least three ascending terminal counts".into()));
    }
    if cfg.reps == 0 || cfg.f == 0 || cfg.u_sizes[0] < 2 {
        return Err(Error::InvalidArgument("need reps ≥ 1, f ≥ 1 and |U| ≥ 2".into()));
    }
    let mut rows = measure_sizes(cfg);
    let sizes = summarize(&rows, &cfg.u_sizes);
    let fitted_exponent = if sizes.len() == cfg.u_sizes.len() {
        let points: Vec<(f64, f64)> =
            sizes.iter().map(|s| ((s.u_size as f64).ln(), (s.max_star_entries.max(1) as f64).ln())).collect();
        least_squares_slope(&points)
    } else {
        None
    };
    for row in &mut rows {
        row.fitted_exponent = fitted_exponent;
    }
    Ok(BenchReport { config: cfg.clone(), rows, sizes, fitted_exponent })
}

pub fn write_bench_csv(report: &BenchReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        w.serialize(row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;

    fn cfg(family: GraphFamily, terminals: TerminalRule, seed: Option<u64>) -> ExperimentConfig {
        ExperimentConfig { family, terminals, f: 2, seed, reps: 1 }
    }

    #[test]
    fn deterministic_families() {
        let (g, u) = gen_instance(&cfg(GraphFamily::Grid { rows: 3, cols: 3 }, TerminalRule::All, None)).unwrap();
        assert_eq!((g.n(), g.m(), u.len()), (9, 12, 9));
        let (g, u) = gen_instance(&cfg(GraphFamily::Star { n: 6 }, TerminalRule::Leaves, None)).unwrap();
        assert_eq!((g.m(), u.as_slice()), (5, &[1, 2, 3, 4, 5][..]));
    }

    #[test]
    fn random_families_need_and_respect_seeds() {
        let c = cfg(GraphFamily::Gnp { n: 12, p: Some(0.4) }, TerminalRule::RandomK(5), Some(7));
        assert_eq!(gen_instance(&c).unwrap(), gen_instance(&c).unwrap());
        let unseeded = ExperimentConfig { seed: None, ..c };
        assert!(gen_instance(&unseeded).is_err());

        let t = cfg(GraphFamily::Tree { n: 40 }, TerminalRule::Leaves, Some(3));
        let (g, u) = gen_instance(&t).unwrap();
        assert_eq!(g.m(), 39);
        assert_eq!(components(&g, &[]).count(), 1);
        assert!(u.len() >= 2);
    }

    #[test]
    fn gnp_gives_up_eventually() {
        let c = cfg(GraphFamily::Gnp { n: 5, p: Some(0.0) }, TerminalRule::Leaves, Some(1));
        assert!(matches!(gen_instance(&c), Err(Error::GenerationFailed(_))));
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [16.0f64, 64.0, 256.0].iter().map(|&x| (x.ln(), 0.5 * x.ln() + 1.0)).collect();
        assert!((least_squares_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(least_squares_slope(&pts[..1]), None);
    }

    #[test]
    fn single_fault_bench_is_flat() {
        let cfg = BenchConfig { f: 1, u_sizes: vec![4, 8, 16], reps: 2, seed: 5, ..Default::default() };
        let report = run_scaling_bench(&cfg).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.fitted_exponent, Some(0.0));
        let mut csv = Vec::new();
        write_bench_csv(&report, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("u_size,rep,seed,scheme,f,n,m,max_star_entries"));
        assert_eq!(text.lines().count(), 7);
        assert_eq!(run_scaling_bench(&cfg).unwrap(), report);
    }
}
