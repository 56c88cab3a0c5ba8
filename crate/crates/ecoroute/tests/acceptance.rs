//! Acceptance run: one PASS/FAIL/SKIP line per criterion. Exits nonzero on
//! any FAIL so `cargo test` reports it.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ecoroute::verify::instance;
use ecoroute_core::crptc::{export_milp, knapsack_split, MilpConfig};
use ecoroute_core::energy::{cdf_link_cost, cs_cost, kwh_needed, mixed_cost};
use ecoroute_core::netmodel::{generate_synthetic, GraphKind, SyntheticConfig};
use ecoroute_core::{solve, Algorithm, EnergyParams, Network, PerCategory, Query, TrafficCategory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_GRAPHS: u64 = 600;
const SUITE_MAX_NODES: usize = 12;
const SUITE_BUDGETS: [f64; 4] = [0.0, 0.1, 0.3, 1.0];
const SUITE_SECONDS: f64 = 60.0;
const REL: f64 = 1e-9;
/// Slack on orderings between independently summed costs.
const ORDER_TOL: f64 = 1e-12;

struct Outcome {
    status: &'static str,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { "PASS" } else { "FAIL" },
        detail,
    }
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

fn saturating_budget(net: &Network, p: &EnergyParams) -> f64 {
    net.link_ids()
        .map(|l| kwh_needed(net.length(l), net.category(l), p))
        .sum::<f64>()
        + 1.0
}

fn cost(net: &Network, p: &EnergyParams, q: &Query, alg: Algorithm) -> f64 {
    solve(net, p, q, alg)
        .unwrap_or_else(|e| panic!("{alg} failed: {e}"))
        .energy_cost()
}

/// Tallies for criteria 1 to 4, gathered in one pass over the suite.
#[derive(Default)]
struct Suite {
    graphs: usize,
    queries: usize,
    cdf_mismatch: Vec<String>,
    crptc_mismatch: Vec<String>,
    hybrid_mismatch: Vec<String>,
    sandwich_violations: Vec<String>,
    degenerate_checked: usize,
    degenerate_bit_exact: usize,
    degenerate_mismatch: Vec<String>,
    seconds: f64,
    mixed_graphs: usize,
}

fn run_suite(p: &EnergyParams) -> Suite {
    let mut s = Suite::default();
    let start = Instant::now();
    for seed in 0..SUITE_GRAPHS {
        let (net, o, d) = instance(seed, SUITE_MAX_NODES);
        assert!(net.is_strongly_connected() && net.node_count() <= SUITE_MAX_NODES);
        s.graphs += 1;
        let mut seen = [false; 3];
        net.link_ids().for_each(|l| seen[net.category(l).index()] = true);
        s.mixed_graphs += usize::from(seen.iter().filter(|&&x| x).count() >= 2);
        let tag = |b: f64| format!("seed {seed} {}->{} budget {b}", o.0, d.0);

        for budget in SUITE_BUDGETS {
            let q = Query::new(o, d, budget);
            let exact = cost(&net, p, &q, Algorithm::CdfExact);
            let oracle = cost(&net, p, &q, Algorithm::OracleCdf);
            let crptc = cost(&net, p, &q, Algorithm::Crptc);
            let joint = cost(&net, p, &q, Algorithm::OracleCrptc);
            let hybrid = cost(&net, p, &q, Algorithm::HybridLp);
            let bilevel = cost(&net, p, &q, Algorithm::Bilevel);
            let cdf = cost(&net, p, &q, Algorithm::CdfDijkstra);
            let fastest = cost(&net, p, &q, Algorithm::Fastest);
            s.queries += 1;
            if !rel_eq(exact, oracle, REL) {
                s.cdf_mismatch.push(format!("{}: {exact} vs {oracle}", tag(budget)));
            }
            if !rel_eq(crptc, joint, REL) {
                s.crptc_mismatch.push(format!("{}: {crptc} vs {joint}", tag(budget)));
            }
            if !rel_eq(hybrid, exact, REL) {
                s.hybrid_mismatch.push(format!("{}: {hybrid} vs {exact}", tag(budget)));
            }
            if !(crptc <= bilevel + ORDER_TOL && bilevel <= cdf + ORDER_TOL && crptc <= fastest + ORDER_TOL) {
                s.sandwich_violations.push(format!(
                    "{}: crptc {crptc} bilevel {bilevel} cdf {cdf} fastest {fastest}",
                    tag(budget)
                ));
            }
        }

        for budget in [0.0, saturating_budget(&net, p)] {
            let q = Query::new(o, d, budget);
            let crptc = cost(&net, p, &q, Algorithm::Crptc);
            let bilevel = cost(&net, p, &q, Algorithm::Bilevel);
            let cdf = cost(&net, p, &q, Algorithm::CdfDijkstra);
            s.degenerate_checked += 1;
            s.degenerate_bit_exact += usize::from(crptc == cdf && bilevel == cdf);
            if !(rel_eq(crptc, cdf, REL) && rel_eq(bilevel, cdf, REL)) {
                s.degenerate_mismatch
                    .push(format!("{}: {crptc} {bilevel} {cdf}", tag(budget)));
            }
        }
    }
    s.seconds = start.elapsed().as_secs_f64();
    s
}

fn first(v: &[String]) -> String {
    v.first().map(|f| format!("; first: {f}")).unwrap_or_default()
}

fn criterion_knapsack(p: &EnergyParams) -> Outcome {
    const PATHS: u64 = 20;
    const DRAWS: usize = 10_000;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for seed in 0..PATHS {
        let (net, o, d) = instance(1000 + seed, SUITE_MAX_NODES);
        let budget = rng.random_range(0.0..1.0);
        let path = solve(&net, p, &Query::new(o, d, 0.3), Algorithm::Crptc)
            .unwrap()
            .link_path;
        let split = knapsack_split(&net, &path, budget, p).unwrap();
        let need: Vec<f64> = path
            .iter()
            .map(|&l| kwh_needed(net.length(l), net.category(l), p))
            .collect();
        let gain: Vec<f64> = path
            .iter()
            .zip(&need)
            .map(|(&l, n)| cs_cost(net.length(l), net.category(l), p) - p.c_ele * n)
            .collect();
        for draw in 0..DRAWS {
            // Alternate dense and sparse draws, then shrink onto the budget.
            let y: Vec<f64> = path
                .iter()
                .map(|_| {
                    if draw % 2 == 0 || rng.random_bool(0.3) {
                        rng.random_range(0.0..=1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let used: f64 = y.iter().zip(&need).map(|(y, n)| y * n).sum();
            let scale = if used > budget { budget / used } else { 1.0 };
            let savings: f64 = y.iter().zip(&gain).map(|(y, g)| scale * y * g).sum();
            let excess = savings - split.total_savings;
            worst_excess = worst_excess.max(excess);
            violations += usize::from(excess > 1e-9);
        }
    }
    verdict(
        violations == 0,
        format!(
            "{} paths x {DRAWS} feasible splits, {violations} beat the greedy split, max excess {worst_excess:.3e}",
            PATHS
        ),
    )
}

fn criterion_continuity() -> Outcome {
    const TUPLES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let mut worst = 0.0f64;
    for _ in 0..TUPLES {
        let p = EnergyParams {
            c_gas: rng.random_range(1.0..6.0),
            c_ele: rng.random_range(0.03..0.6),
            mu_cd: PerCategory::from_fn(|_| rng.random_range(1.5..6.0)),
            mu_cs: PerCategory::from_fn(|_| rng.random_range(15.0..70.0)),
        };
        let cat = [TrafficCategory::High, TrafficCategory::Medium, TrafficCategory::Low][rng.random_range(0..3)];
        let length: f64 = rng.random_range(0.01..5.0);
        // Pure-mode costs written out independently of the library.
        let gas = p.c_gas * length / p.mu_cs[cat];
        let need = length / p.mu_cd[cat];
        let ele = p.c_ele * need;
        let below = |x: f64| f64::from_bits(x.to_bits() - 1);
        let tiny = f64::MIN_POSITIVE;
        let gaps = [
            mixed_cost(length, cat, 0.0, &p) - gas,
            mixed_cost(length, cat, need, &p) - ele,
            cdf_link_cost(length, cat, tiny, &p).unwrap().0 - cdf_link_cost(length, cat, 0.0, &p).unwrap().0,
            cdf_link_cost(length, cat, below(need), &p).unwrap().0 - cdf_link_cost(length, cat, need, &p).unwrap().0,
            cdf_link_cost(length, cat, 0.0, &p).unwrap().0 - gas,
            cdf_link_cost(length, cat, need, &p).unwrap().0 - ele,
        ];
        worst = gaps.iter().fold(worst, |w, g| w.max(g.abs()));
    }
    verdict(
        worst <= 1e-12,
        format!("{TUPLES} tuples, max jump at a breakpoint {worst:.3e}"),
    )
}

fn criterion_alpha_sweep(p: &EnergyParams) -> Outcome {
    let net = generate_synthetic(&SyntheticConfig::new(GraphKind::Grid, 144, 3.4, [0.3, 0.3, 0.4], 11)).unwrap();
    let pairs = ecoroute::batch::sample_pairs(&net, 50, 11);
    let mut violations = Vec::new();
    let mut sweeps = 0;
    for (i, &(o, d)) in pairs.iter().enumerate() {
        let budget = [0.0, 0.3, 1.0][i % 3];
        for alg in [Algorithm::WeightedCdf, Algorithm::WeightedCrptc] {
            sweeps += 1;
            let mut prev: Option<(f64, f64)> = None;
            for step in 0..=10 {
                let alpha = step as f64 / 10.0;
                let sol = solve(&net, p, &Query::new(o, d, budget).with_alpha(alpha), alg).unwrap();
                let (t, c) = (sol.travel_time, sol.energy_cost());
                if let Some((t0, c0)) = prev {
                    if t > t0 * (1.0 + REL) || c < c0 * (1.0 - REL) {
                        violations.push(format!(
                            "{alg} {}->{} alpha {alpha}: t {t0}->{t}, c {c0}->{c}",
                            o.0, d.0
                        ));
                    }
                }
                prev = Some((t, c));
            }
        }
    }
    verdict(
        pairs.len() == 50 && violations.is_empty(),
        format!(
            "{} pairs, {sweeps} sweeps of 11 steps, {} violations{}",
            pairs.len(),
            violations.len(),
            first(&violations)
        ),
    )
}

fn criterion_budget_grid(p: &EnergyParams) -> Outcome {
    let mut violations = Vec::new();
    let graphs = 200;
    for seed in 0..graphs {
        let (net, o, d) = instance(seed, SUITE_MAX_NODES);
        let top = saturating_budget(&net, p);
        let mut prev: Option<(f64, f64)> = None;
        for step in 0..=20 {
            let q = Query::new(o, d, top * step as f64 / 20.0);
            let now = (
                cost(&net, p, &q, Algorithm::CdfExact),
                cost(&net, p, &q, Algorithm::Crptc),
            );
            if let Some(before) = prev {
                if now.0 > before.0 + ORDER_TOL || now.1 > before.1 + ORDER_TOL {
                    violations.push(format!("seed {seed} step {step}: {before:?} -> {now:?}"));
                }
            }
            prev = Some(now);
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "{graphs} graphs x 21 budgets, {} violations{}",
            violations.len(),
            first(&violations)
        ),
    )
}

fn criterion_runtime(p: &EnergyParams) -> Outcome {
    let cfg = SyntheticConfig::new(GraphKind::Random, 50_000, 4.4, [0.2, 0.3, 0.5], 2024);
    let net = generate_synthetic(&cfg).unwrap();
    let pairs = ecoroute::batch::sample_pairs(&net, 10, 7);
    let mut means = Vec::new();
    for alg in [Algorithm::Fastest, Algorithm::CdfDijkstra, Algorithm::Bilevel] {
        let start = Instant::now();
        for &(o, d) in &pairs {
            solve(&net, p, &Query::new(o, d, 0.5), alg).unwrap();
        }
        means.push((alg, start.elapsed().as_secs_f64() / pairs.len() as f64));
    }
    let ok = means
        .iter()
        .all(|&(alg, m)| m < if alg == Algorithm::Fastest { 0.5 } else { 1.0 });
    let detail = means
        .iter()
        .map(|(a, m)| format!("{a} {m:.4}s"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict(
        ok,
        format!(
            "{} nodes, {} links, {} queries each, mean {detail}",
            net.node_count(),
            net.link_count(),
            pairs.len()
        ),
    )
}

const HIGHS_SCRIPT: &str = r#"
import sys, highspy
h = highspy.Highs()
h.setOptionValue("output_flag", False)
h.setOptionValue("mip_rel_gap", 0.0)
h.setOptionValue("mip_abs_gap", 0.0)
h.setOptionValue("mip_feasibility_tolerance", 1e-10)
h.setOptionValue("primal_feasibility_tolerance", 1e-10)
for path in sys.argv[1:]:
    h.clearModel()
    h.readModel(path)
    h.run()
    print(repr(h.getInfo().objective_function_value))
"#;

fn criterion_milp(p: &EnergyParams) -> Outcome {
    let available = Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success());
    if !available {
        return Outcome {
            status: "SKIP",
            detail: "python3 with highspy not found".into(),
        };
    }
    let dir = tempfile::tempdir().unwrap();
    let mut expected = Vec::new();
    let mut files = Vec::new();
    let mut seed = 2000;
    while files.len() < 20 {
        let (net, o, d) = instance(seed, 10);
        seed += 1;
        if o == d {
            continue;
        }
        let q = Query::new(o, d, [0.1, 0.3, 1.0][files.len() % 3]);
        let path = dir.path().join(format!("m{}.lp", files.len()));
        std::fs::write(&path, export_milp(&net, p, &q, &MilpConfig::default()).unwrap()).unwrap();
        expected.push(cost(&net, p, &q, Algorithm::Crptc));
        files.push(path);
    }
    let out = Command::new("python3")
        .arg("-c")
        .arg(HIGHS_SCRIPT)
        .args(
            files
                .iter()
                .map(|f: &std::path::PathBuf| f.as_path())
                .map(Path::as_os_str),
        )
        .output()
        .unwrap();
    if !out.status.success() {
        return verdict(
            false,
            format!("solver failed: {}", String::from_utf8_lossy(&out.stderr)),
        );
    }
    let got: Vec<f64> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter_map(|l| l.trim().parse().ok())
        .collect();
    let mut worst = 0.0f64;
    for (g, e) in got.iter().zip(&expected) {
        worst = worst.max((g - e).abs() / e.abs().max(1e-12));
    }
    verdict(
        got.len() == expected.len() && worst <= 1e-6,
        format!(
            "{} of {} LP files solved by HiGHS, max relative gap {worst:.3e}",
            got.len(),
            expected.len()
        ),
    )
}

fn main() {
    let p = EnergyParams::default();
    let mut lines: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!("{} {n:>2} {name}: {}", o.status, o.detail);
        lines.push((n, name, o));
    };

    let s = run_suite(&p);
    let suite_ok = s.cdf_mismatch.is_empty() && s.crptc_mismatch.is_empty() && s.seconds < SUITE_SECONDS;
    report(
        1,
        "oracle equivalence",
        verdict(
            suite_ok && s.graphs >= 500,
            format!(
                "{} graphs ({} with mixed categories), {} queries, cdf-exact mismatches {}, crptc mismatches {}, suite {:.1}s{}{}",
                s.graphs,
                s.mixed_graphs,
                s.queries,
                s.cdf_mismatch.len(),
                s.crptc_mismatch.len(),
                s.seconds,
                first(&s.cdf_mismatch),
                first(&s.crptc_mismatch)
            ),
        ),
    );
    report(
        2,
        "hybrid-LP equivalence",
        verdict(
            s.hybrid_mismatch.is_empty(),
            format!(
                "{} queries, {} mismatches{}",
                s.queries,
                s.hybrid_mismatch.len(),
                first(&s.hybrid_mismatch)
            ),
        ),
    );
    report(
        3,
        "degenerate-budget collapse",
        verdict(
            s.degenerate_mismatch.is_empty(),
            format!(
                "{} instances at zero and saturating budget, {} equal within 1e-9 relative, {} bit-identical{}",
                s.degenerate_checked,
                s.degenerate_checked - s.degenerate_mismatch.len(),
                s.degenerate_bit_exact,
                first(&s.degenerate_mismatch)
            ),
        ),
    );
    report(
        4,
        "sandwich ordering",
        verdict(
            s.sandwich_violations.is_empty(),
            format!(
                "{} queries, {} violations{}",
                s.queries,
                s.sandwich_violations.len(),
                first(&s.sandwich_violations)
            ),
        ),
    );
    report(5, "knapsack LP optimality", criterion_knapsack(&p));
    report(6, "piecewise cost continuity", criterion_continuity());
    report(7, "alpha-sweep monotonicity", criterion_alpha_sweep(&p));
    report(8, "budget monotonicity", criterion_budget_grid(&p));
    report(9, "runtime at 50k nodes", criterion_runtime(&p));
    report(10, "MILP export cross-check", criterion_milp(&p));

    let failed = lines.iter().filter(|(_, _, o)| o.status == "FAIL").count();
    let skipped = lines.iter().filter(|(_, _, o)| o.status == "SKIP").count();
    println!(
        "acceptance: {} passed, {failed} failed, {skipped} skipped",
        lines.len() - failed - skipped
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
