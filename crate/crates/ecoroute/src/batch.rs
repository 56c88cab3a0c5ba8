//! Multi-query sweeps: algorithm comparison and timing.
//!
//! Queries fan out over a rayon pool whose size can be capped with the
//! `ECOROUTE_THREADS` environment variable; results are collected in input
//! order so reports do not depend on scheduling.

use std::fmt::Write as _;
use std::time::Instant;

use ecoroute_core::{solve, Algorithm, EnergyParams, Error, Network, NodeId, Query, RouteSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::report::sig9;

pub const THREADS_ENV: &str = "ECOROUTE_THREADS";

/// Runs `f` on a pool honouring [`THREADS_ENV`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Draws distinct origin-destination pairs uniformly, keeping only pairs
/// with a route. Gives up after a bounded number of draws, so the result
/// can be shorter than `count` on poorly connected networks.
pub fn sample_pairs(net: &Network, count: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    let n = net.node_count() as u32;
    let mut pairs = Vec::with_capacity(count);
    if n < 2 {
        return pairs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strongly_connected = net.is_strongly_connected();
    let mut draws = 0usize;
    while pairs.len() < count && draws < count.saturating_mul(1000) {
        draws += 1;
        let o = NodeId(rng.random_range(0..n));
        let d = NodeId(rng.random_range(0..n));
        if o == d {
            continue;
        }
        if strongly_connected || net.reachable(o, true)[d.index()] {
            pairs.push((o, d));
        }
    }
    pairs
}

pub fn timed_solve(net: &Network, p: &EnergyParams, q: &Query, algorithm: Algorithm) -> Result<RouteSolution, Error> {
    let start = Instant::now();
    let mut sol = solve(net, p, q, algorithm)?;
    sol.wall_time = start.elapsed().as_secs_f64();
    Ok(sol)
}

#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub pairs: usize,
    pub seed: u64,
    pub budgets: Vec<f64>,
    /// The fastest route is always added as the savings baseline.
    pub algorithms: Vec<Algorithm>,
    pub alpha: f64,
    pub timed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub pair: usize,
    pub origin: i64,
    pub destination: i64,
    pub budget_kwh: f64,
    pub algorithm: String,
    /// `ok`, `no_route` or `error`.
    pub status: String,
    pub error: Option<String>,
    pub energy_cost: Option<f64>,
    pub travel_time_h: Option<f64>,
    pub kwh_used: Option<f64>,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SavingsRow {
    pub budget_kwh: f64,
    pub algorithm: String,
    /// Algorithm the savings are measured against.
    pub baseline: String,
    /// Pairs where both solvers succeeded.
    pub samples: usize,
    /// Mean of `100 * (base - alt) / base` over energy cost.
    pub mean_energy_savings_pct: Option<f64>,
    /// Same over travel time.
    pub mean_time_savings_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub seed: u64,
    pub pairs: usize,
    pub budgets: Vec<f64>,
    pub algorithms: Vec<String>,
    pub rows: Vec<CompareRow>,
    pub savings: Vec<SavingsRow>,
}

pub fn compare(net: &Network, p: &EnergyParams, slot: usize, cfg: &CompareConfig) -> CompareReport {
    let mut algorithms = cfg.algorithms.clone();
    if !algorithms.contains(&Algorithm::Fastest) {
        algorithms.insert(0, Algorithm::Fastest);
    }
    let pairs = sample_pairs(net, cfg.pairs, cfg.seed);
    let tasks: Vec<(usize, f64, Algorithm)> = (0..pairs.len())
        .flat_map(|i| {
            let algorithms = &algorithms;
            cfg.budgets
                .iter()
                .flat_map(move |&b| algorithms.iter().map(move |&a| (i, b, a)))
        })
        .collect();
    let rows: Vec<CompareRow> = with_pool(|| {
        tasks
            .par_iter()
            .map(|&(i, budget, algorithm)| {
                let (o, d) = pairs[i];
                let q = Query::new(o, d, budget).with_alpha(cfg.alpha).with_slot(slot);
                let result = timed_solve(net, p, &q, algorithm);
                row(net, i, &q, algorithm, result, cfg.timed)
            })
            .collect()
    });
    let savings = savings_table(&rows, &cfg.budgets, &algorithms);
    CompareReport {
        seed: cfg.seed,
        pairs: pairs.len(),
        budgets: cfg.budgets.clone(),
        algorithms: algorithms.iter().map(|a| a.as_str().to_owned()).collect(),
        rows,
        savings,
    }
}

fn row(
    net: &Network,
    pair: usize,
    q: &Query,
    algorithm: Algorithm,
    result: Result<RouteSolution, Error>,
    timed: bool,
) -> CompareRow {
    let mut row = CompareRow {
        pair,
        origin: net.node(q.origin).external_id,
        destination: net.node(q.destination).external_id,
        budget_kwh: q.budget_kwh,
        algorithm: algorithm.as_str().to_owned(),
        status: "ok".to_owned(),
        error: None,
        energy_cost: None,
        travel_time_h: None,
        kwh_used: None,
        wall_time_s: None,
    };
    match result {
        Ok(sol) => {
            row.energy_cost = Some(sig9(sol.energy_cost()));
            row.travel_time_h = Some(sig9(sol.travel_time));
            row.kwh_used = Some(sig9(sol.breakdown.kwh_used));
            row.wall_time_s = timed.then(|| sig9(sol.wall_time));
        }
        Err(Error::NoRoute { .. }) => row.status = "no_route".to_owned(),
        Err(e) => {
            row.status = "error".to_owned();
            row.error = Some(e.to_string());
        }
    }
    row
}

fn savings_table(rows: &[CompareRow], budgets: &[f64], algorithms: &[Algorithm]) -> Vec<SavingsRow> {
    let lookup = |pair: usize, budget: f64, alg: Algorithm| {
        rows.iter()
            .find(|r| r.pair == pair && r.budget_kwh == budget && r.algorithm == alg.as_str() && r.status == "ok")
    };
    let pairs = rows.iter().map(|r| r.pair + 1).max().unwrap_or(0);
    let pct = |base: f64, alt: f64| 100.0 * (base - alt) / base;
    let mut out = Vec::new();
    for &budget in budgets {
        for &base in algorithms {
            for &alt in algorithms {
                if alt == base {
                    continue;
                }
                let mut energy = Vec::new();
                let mut time = Vec::new();
                for pair in 0..pairs {
                    let (Some(b), Some(a)) = (lookup(pair, budget, base), lookup(pair, budget, alt)) else {
                        continue;
                    };
                    let (bc, ac) = (b.energy_cost.unwrap_or(0.0), a.energy_cost.unwrap_or(0.0));
                    let (bt, at) = (b.travel_time_h.unwrap_or(0.0), a.travel_time_h.unwrap_or(0.0));
                    if bc > 0.0 && bt > 0.0 {
                        energy.push(pct(bc, ac));
                        time.push(pct(bt, at));
                    }
                }
                let mean = |v: &[f64]| (!v.is_empty()).then(|| sig9(v.iter().sum::<f64>() / v.len() as f64));
                out.push(SavingsRow {
                    budget_kwh: budget,
                    algorithm: alt.as_str().to_owned(),
                    baseline: base.as_str().to_owned(),
                    samples: energy.len(),
                    mean_energy_savings_pct: mean(&energy),
                    mean_time_savings_pct: mean(&time),
                });
            }
        }
    }
    out
}

impl CompareReport {
    /// Per-query rows, a blank line, then the savings table.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "pair",
            "origin",
            "destination",
            "budget_kwh",
            "algorithm",
            "status",
            "energy_cost",
            "travel_time_h",
            "kwh_used",
            "wall_time_s",
        ])
        .expect("in-memory csv");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.pair.to_string(),
                r.origin.to_string(),
                r.destination.to_string(),
                r.budget_kwh.to_string(),
                r.algorithm.clone(),
                r.status.clone(),
                opt(r.energy_cost),
                opt(r.travel_time_h),
                opt(r.kwh_used),
                opt(r.wall_time_s),
            ])
            .expect("in-memory csv");
        }
        let mut out = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
        out.push('\n');
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "budget_kwh",
            "algorithm",
            "baseline",
            "samples",
            "mean_energy_savings_pct",
            "mean_time_savings_pct",
        ])
        .expect("in-memory csv");
        for s in &self.savings {
            w.write_record([
                s.budget_kwh.to_string(),
                s.algorithm.clone(),
                s.baseline.clone(),
                s.samples.to_string(),
                opt(s.mean_energy_savings_pct),
                opt(s.mean_time_savings_pct),
            ])
            .expect("in-memory csv");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
        out
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub pairs: usize,
    pub seed: u64,
    pub budget_kwh: f64,
    pub algorithms: Vec<Algorithm>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchStats {
    pub algorithm: String,
    pub queries: usize,
    pub failures: usize,
    pub mean_s: Option<f64>,
    pub median_s: Option<f64>,
    pub p95_s: Option<f64>,
    pub max_s: Option<f64>,
    /// Mean above [`SLOW_QUERY_S`]; informational only.
    pub slow: bool,
}

/// Per-query mean beyond which an algorithm is flagged in bench output.
pub const SLOW_QUERY_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub nodes: usize,
    pub links: usize,
    pub pairs: usize,
    pub budget_kwh: f64,
    pub stats: Vec<BenchStats>,
}

pub fn bench(net: &Network, p: &EnergyParams, slot: usize, cfg: &BenchConfig) -> BenchReport {
    let pairs = sample_pairs(net, cfg.pairs, cfg.seed);
    let stats = cfg
        .algorithms
        .iter()
        .map(|&algorithm| {
            let times: Vec<Option<f64>> = with_pool(|| {
                pairs
                    .par_iter()
                    .map(|&(o, d)| {
                        let q = Query::new(o, d, cfg.budget_kwh).with_slot(slot);
                        timed_solve(net, p, &q, algorithm).ok().map(|s| s.wall_time)
                    })
                    .collect()
            });
            let mut ok: Vec<f64> = times.iter().flatten().copied().collect();
            ok.sort_by(f64::total_cmp);
            let mean_s = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
            BenchStats {
                algorithm: algorithm.as_str().to_owned(),
                queries: times.len(),
                failures: times.len() - ok.len(),
                mean_s,
                median_s: median(&ok),
                p95_s: percentile(&ok, 0.95),
                max_s: ok.last().copied(),
                slow: mean_s.is_some_and(|m| m > SLOW_QUERY_S),
            }
        })
        .collect();
    BenchReport {
        nodes: net.node_count(),
        links: net.link_count(),
        pairs: pairs.len(),
        budget_kwh: cfg.budget_kwh,
        stats,
    }
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} nodes, {} links, {} queries per algorithm, budget {} kWh",
            self.nodes, self.links, self.pairs, self.budget_kwh
        );
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>10} {:>10} {:>10} {:>10}",
            "algorithm", "failed", "mean s", "median s", "p95 s", "max s"
        );
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |x| format!("{x:.4}"));
        for s in &self.stats {
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>10} {:>10} {:>10} {:>10}{}",
                s.algorithm,
                s.failures,
                cell(s.mean_s),
                cell(s.median_s),
                cell(s.p95_s),
                cell(s.max_s),
                if s.slow { "  slow" } else { "" }
            );
        }
        out
    }
}
