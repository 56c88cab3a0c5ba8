//! Randomized self-check of every solver against the brute-force oracles.

use std::fmt::Write as _;

use ecoroute_core::crptc::knapsack_split;
use ecoroute_core::energy::{cs_cost, kwh_needed};
use ecoroute_core::netmodel::{generate_synthetic, GraphKind, SyntheticConfig};
use ecoroute_core::oracle::EnumerationLimits;
use ecoroute_core::{solve, Algorithm, EnergyParams, Network, NodeId, Query};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::batch::with_pool;

pub const DEFAULT_BUDGETS: [f64; 4] = [0.0, 0.1, 0.3, 1.0];
const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-12;
const MAX_REPRODUCERS: usize = 20;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seeds: u64,
    pub max_nodes: usize,
    pub budgets: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seeds: 200,
            max_nodes: 12,
            budgets: DEFAULT_BUDGETS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CheckId {
    CdfExact,
    Crptc,
    Hybrid,
    Sandwich,
    Degenerate,
    Monotone,
    Knapsack,
    Valid,
}

const CHECKS: [(CheckId, &str); 8] = [
    (CheckId::CdfExact, "cdf_exact == oracle_cdf"),
    (CheckId::Crptc, "crptc == oracle_crptc"),
    (CheckId::Hybrid, "hybrid_lp == cdf_exact"),
    (CheckId::Sandwich, "crptc <= bilevel <= cdf <= fastest"),
    (CheckId::Degenerate, "degenerate budgets collapse"),
    (CheckId::Monotone, "cost non-increasing in budget"),
    (CheckId::Knapsack, "knapsack split beats random splits"),
    (CheckId::Valid, "solutions valid"),
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    /// `(label, passed, total)` in a fixed order.
    pub checks: Vec<(&'static str, usize, usize)>,
    /// Queries where `cdf` costs more than `cdf-exact`.
    pub divergent: usize,
    pub divergence_queries: usize,
    pub reproducers: Vec<String>,
    pub failures: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (label, passed, total) in &self.checks {
            let _ = writeln!(out, "{label}: {passed}/{total}");
        }
        let _ = writeln!(
            out,
            "divergence cdf vs cdf-exact: {}/{} queries",
            self.divergent, self.divergence_queries
        );
        for r in &self.reproducers {
            let _ = writeln!(out, "FAIL {r}");
        }
        if self.failures > self.reproducers.len() {
            let _ = writeln!(out, "... {} more failures", self.failures - self.reproducers.len());
        }
        let _ = writeln!(out, "{}", if self.passed() { "verify: PASS" } else { "verify: FAIL" });
        out
    }
}

#[derive(Default)]
struct SeedOutcome {
    tallies: Vec<(usize, usize)>,
    divergent: usize,
    queries: usize,
    reproducers: Vec<String>,
}

impl SeedOutcome {
    fn record(&mut self, id: CheckId, ok: bool, context: impl FnOnce() -> String) {
        let t = &mut self.tallies[id as usize];
        t.1 += 1;
        if ok {
            t.0 += 1;
        } else {
            self.reproducers.push(context());
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()) + ABS_TOL
}

/// The graph instance drawn for `seed`.
pub fn instance(seed: u64, max_nodes: usize) -> (Network, NodeId, NodeId) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = rng.random_range(3..=max_nodes.max(3));
    let grid = rng.random_bool(0.5);
    let (kind, degree) = if grid {
        (GraphKind::Grid, 2.6)
    } else {
        (GraphKind::Random, 3.2)
    };
    let a: f64 = rng.random_range(0.1..1.0);
    let b: f64 = rng.random_range(0.1..1.0);
    let c: f64 = rng.random_range(0.1..1.0);
    let mix = [a / (a + b + c), b / (a + b + c), c / (a + b + c)];
    let net = generate_synthetic(&SyntheticConfig::new(kind, nodes, degree, mix, seed))
        .expect("verify instances are always feasible");
    let o = NodeId(rng.random_range(0..nodes as u32));
    let d = NodeId(rng.random_range(0..nodes as u32));
    (net, o, d)
}

fn run_seed(seed: u64, cfg: &VerifyConfig, p: &EnergyParams) -> SeedOutcome {
    let mut out = SeedOutcome {
        tallies: vec![(0, 0); CHECKS.len()],
        ..SeedOutcome::default()
    };
    let (net, o, d) = instance(seed, cfg.max_nodes);
    let where_ = |budget: f64, what: &str| {
        format!(
            "seed={seed} nodes={} origin={} destination={} budget={budget}: {what}",
            net.node_count(),
            o.0,
            d.0
        )
    };
    let run = |budget: f64, alg: Algorithm| solve(&net, p, &Query::new(o, d, budget), alg);

    for &budget in &cfg.budgets {
        let q = Query::new(o, d, budget);
        let mut results = Vec::new();
        for alg in [
            Algorithm::Fastest,
            Algorithm::CdfDijkstra,
            Algorithm::CdfExact,
            Algorithm::HybridLp,
            Algorithm::Bilevel,
            Algorithm::Crptc,
            Algorithm::OracleCdf,
            Algorithm::OracleCrptc,
        ] {
            match solve(&net, p, &q, alg) {
                Ok(sol) => results.push(sol),
                Err(e) => {
                    out.record(CheckId::Valid, false, || {
                        where_(budget, &format!("{} failed: {e}", alg.as_str()))
                    });
                    return out;
                }
            }
        }
        for sol in &results {
            let check = sol.check(&net, &q);
            out.record(CheckId::Valid, check.is_ok(), || {
                where_(
                    budget,
                    &format!("{} invalid: {}", sol.algorithm.as_str(), check.unwrap_err()),
                )
            });
        }
        let cost: Vec<f64> = results.iter().map(|s| s.energy_cost()).collect();
        let [fastest, cdf, exact, hybrid, bilevel, crptc, oracle_cdf, oracle_crptc] = cost[..] else {
            unreachable!()
        };
        out.record(CheckId::CdfExact, close(exact, oracle_cdf), || {
            where_(budget, &format!("cdf-exact {exact} vs oracle {oracle_cdf}"))
        });
        out.record(CheckId::Crptc, close(crptc, oracle_crptc), || {
            where_(budget, &format!("crptc {crptc} vs oracle {oracle_crptc}"))
        });
        out.record(CheckId::Hybrid, close(hybrid, exact), || {
            where_(budget, &format!("hybrid-lp {hybrid} vs cdf-exact {exact}"))
        });
        let sandwich = crptc <= bilevel + ABS_TOL && bilevel <= cdf + ABS_TOL && cdf <= fastest + ABS_TOL;
        out.record(CheckId::Sandwich, sandwich, || {
            where_(
                budget,
                &format!("crptc {crptc} bilevel {bilevel} cdf {cdf} fastest {fastest}"),
            )
        });
        out.queries += 1;
        if cdf > exact + ABS_TOL + REL_TOL * exact {
            out.divergent += 1;
        }

        // Random splits on the joint route never beat the greedy one.
        let path = &results[5].link_path;
        let split = knapsack_split(&net, path, budget, p).expect("route links are valid");
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ budget.to_bits());
        let mut beaten = None;
        for _ in 0..50 {
            let ys: Vec<f64> = path.iter().map(|_| rng.random_range(0.0..=1.0)).collect();
            let need: Vec<f64> = path
                .iter()
                .map(|&l| kwh_needed(net.length(l), net.category(l), p))
                .collect();
            let used: f64 = ys.iter().zip(&need).map(|(y, n)| y * n).sum();
            // Scale down onto the budget when the draw overshoots it.
            let scale = if used > budget { budget / used } else { 1.0 };
            let savings: f64 = path
                .iter()
                .zip(ys.iter().zip(&need))
                .map(|(&l, (y, n))| scale * y * (cs_cost(net.length(l), net.category(l), p) - n * p.c_ele))
                .sum();
            if savings > split.total_savings + ABS_TOL {
                beaten = Some(savings);
            }
        }
        out.record(CheckId::Knapsack, beaten.is_none(), || {
            where_(
                budget,
                &format!("random split saves {beaten:?} > {}", split.total_savings),
            )
        });
    }

    let full: f64 = net
        .link_ids()
        .map(|l| kwh_needed(net.length(l), net.category(l), p))
        .sum::<f64>()
        + 1.0;
    for budget in [0.0, full] {
        let costs: Result<Vec<f64>, _> = [Algorithm::Crptc, Algorithm::Bilevel, Algorithm::CdfExact]
            .into_iter()
            .map(|a| run(budget, a).map(|s| s.energy_cost()))
            .collect();
        let ok = costs.as_ref().is_ok_and(|c| close(c[0], c[2]) && close(c[1], c[2]));
        out.record(CheckId::Degenerate, ok, || {
            where_(budget, &format!("crptc/bilevel/cdf-exact {costs:?}"))
        });
    }

    let mut prev: Option<(f64, f64)> = None;
    let mut monotone = true;
    for step in 0..=10 {
        let budget = full * step as f64 / 10.0;
        let (Ok(c), Ok(j)) = (run(budget, Algorithm::CdfExact), run(budget, Algorithm::Crptc)) else {
            monotone = false;
            break;
        };
        let (c, j) = (c.energy_cost(), j.energy_cost());
        if let Some((c0, j0)) = prev {
            monotone &= c <= c0 + ABS_TOL && j <= j0 + ABS_TOL;
        }
        prev = Some((c, j));
    }
    out.record(CheckId::Monotone, monotone, || {
        where_(full, "cost rose along the budget grid")
    });
    out
}

/// Runs `cfg.seeds` instances in parallel and tallies the results in seed order.
pub fn verify(cfg: &VerifyConfig, p: &EnergyParams) -> Result<VerifyReport, String> {
    let cap = EnumerationLimits::default().node_cap;
    if !(3..=cap).contains(&cfg.max_nodes) {
        return Err(format!(
            "--max-nodes must be between 3 and {cap}, got {}",
            cfg.max_nodes
        ));
    }
    let outcomes: Vec<SeedOutcome> =
        with_pool(|| (0..cfg.seeds).into_par_iter().map(|s| run_seed(s, cfg, p)).collect());
    let mut report = VerifyReport {
        checks: CHECKS.iter().map(|&(_, label)| (label, 0, 0)).collect(),
        ..VerifyReport::default()
    };
    for o in outcomes {
        for (slot, (passed, total)) in report.checks.iter_mut().zip(&o.tallies) {
            slot.1 += passed;
            slot.2 += total;
        }
        report.divergent += o.divergent;
        report.divergence_queries += o.queries;
        report.failures += o.reproducers.len();
        let room = MAX_REPRODUCERS.saturating_sub(report.reproducers.len());
        report.reproducers.extend(o.reproducers.into_iter().take(room));
    }
    Ok(report)
}
