//! Exact joint route and power-train control.
//!
//! For a fixed route the best control is the greedy split, whose savings
//! depend only on how much CD-usable energy each rate class offers. A
//! label therefore carries its gas-only cost and a capacity per category,
//! capped at the budget, and one label dominates another when it is no
//! dearer and offers at least as much capacity in every class.
//!
//! Labels are popped in order of an admissible estimate built from two
//! reverse shortest-path trees, so the first label to reach the destination
//! is optimal.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use super::knapsack::{category_savings, knapsack_split};
use crate::energy::{cs_cost, kwh_needed, savings_rate, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network, NodeId, TrafficCategory};
use crate::routing::{
    distances_to, unwind, Algorithm, HeapEntry, ObjectiveWeights, Query, RouteSolution, DOMINANCE_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrptcConfig {
    /// Labels created before the search gives up.
    pub max_labels: usize,
}

impl Default for CrptcConfig {
    fn default() -> Self {
        Self { max_labels: 4_000_000 }
    }
}

/// Minimum-cost route with optimal CD fractions.
pub fn crptc_exact(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    crptc_exact_with(net, p, q, &CrptcConfig::default())
}

pub fn crptc_exact_with(net: &Network, p: &EnergyParams, q: &Query, cfg: &CrptcConfig) -> Result<RouteSolution> {
    q.validate(net)?;
    let path = crptc_label_search(net, p, q, ObjectiveWeights::ENERGY, cfg)?;
    let split = knapsack_split(net, &path, q.budget_kwh, p)?;
    Ok(RouteSolution::assemble(
        net,
        p,
        Algorithm::Crptc,
        q.origin,
        path,
        split.y,
    ))
}

#[derive(Debug, Clone, Copy)]
struct Label {
    node: u32,
    /// Weighted gas-only cost plus weighted time.
    base: f64,
    /// kWh a CD stretch could absorb, per category, capped at the budget.
    capacity: [f64; 3],
    parent: u32,
    link: LinkId,
    alive: bool,
}

const ROOT: u32 = u32::MAX;

pub(crate) fn crptc_label_search(
    net: &Network,
    p: &EnergyParams,
    q: &Query,
    w: ObjectiveWeights,
    cfg: &CrptcConfig,
) -> Result<Vec<LinkId>> {
    if q.origin == q.destination {
        return Ok(Vec::new());
    }
    let budget = q.budget_kwh;
    let rate_of = |cat: TrafficCategory| savings_rate(cat, p).max(0.0);
    let mut rates: Vec<(usize, f64)> = TrafficCategory::ALL
        .iter()
        .map(|&c| (c.index(), rate_of(c)))
        .filter(|&(_, r)| r > 0.0)
        .collect();
    rates.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top_rate = rates.first().map_or(0.0, |r| r.1);

    let base_weight = |l: LinkId| w.energy * cs_cost(net.length(l), net.category(l), p) + w.time * net.travel_time(l);
    let (h_base, _) = distances_to(net, q.destination, base_weight);
    if !h_base[q.origin.index()].is_finite() {
        return Err(q.no_route());
    }
    // every kWh a link can absorb saves at most its own rate
    let (h_min, _) = distances_to(net, q.destination, |l| {
        let (d, cat) = (net.length(l), net.category(l));
        base_weight(l) - w.energy * rate_of(cat) * kwh_needed(d, cat, p)
    });
    let value = |l: &Label| l.base - w.energy * category_savings(&l.capacity, &rates, budget);
    let key = |l: &Label| {
        let n = l.node as usize;
        (value(l) + h_min[n]).max(l.base + h_base[n] - w.energy * top_rate * budget)
    };
    let dominates = |a: &Label, b: &Label| {
        a.base <= b.base + DOMINANCE_TOL && (0..3).all(|c| a.capacity[c] >= b.capacity[c] - DOMINANCE_TOL)
    };

    let root = Label {
        node: q.origin.0,
        base: 0.0,
        capacity: [0.0; 3],
        parent: ROOT,
        link: LinkId(u32::MAX),
        alive: true,
    };
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        key: key(&root),
        node: root.node,
        label: 0,
    });
    let mut labels = vec![root];
    let mut at_node: Vec<Vec<u32>> = vec![Vec::new(); net.node_count()];
    at_node[q.origin.index()].push(0);

    while let Some(entry) = heap.pop() {
        let current = labels[entry.label as usize];
        if !current.alive {
            continue;
        }
        if current.node == q.destination.0 {
            return Ok(unwind(entry.label, |i| {
                let l = &labels[i as usize];
                (l.parent != ROOT).then_some((l.parent, l.link))
            }));
        }
        for &l in net.outgoing(NodeId(current.node)) {
            let v = net.link(l).to;
            if !h_base[v.index()].is_finite() || on_path(&labels, entry.label, v.0) {
                continue;
            }
            let (d, cat) = (net.length(l), net.category(l));
            let mut capacity = current.capacity;
            if rate_of(cat) > 0.0 {
                let c = &mut capacity[cat.index()];
                *c = (*c + kwh_needed(d, cat, p)).min(budget);
            }
            let candidate = Label {
                node: v.0,
                base: current.base + base_weight(l),
                capacity,
                parent: entry.label,
                link: l,
                alive: true,
            };
            let bucket = &mut at_node[v.index()];
            if bucket.iter().any(|&i| dominates(&labels[i as usize], &candidate)) {
                continue;
            }
            bucket.retain(|&i| {
                let keep = !dominates(&candidate, &labels[i as usize]);
                if !keep {
                    labels[i as usize].alive = false;
                }
                keep
            });
            if labels.len() >= cfg.max_labels {
                return Err(Error::Capacity {
                    what: "labels",
                    actual: labels.len(),
                    limit: cfg.max_labels,
                    hint: "raise the label limit or use the bilevel solver",
                });
            }
            let id = labels.len() as u32;
            bucket.push(id);
            labels.push(candidate);
            heap.push(HeapEntry {
                key: key(&candidate),
                node: v.0,
                label: id,
            });
        }
    }
    Err(q.no_route())
}

fn on_path(labels: &[Label], mut label: u32, node: u32) -> bool {
    while label != ROOT {
        let l = &labels[label as usize];
        if l.node == node {
            return true;
        }
        label = l.parent;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::fixtures;
    use crate::routing::cdf_exact;

    fn q(o: u32, d: u32, budget: f64) -> Query {
        Query::new(NodeId(o), NodeId(d), budget)
    }

    #[test]
    fn diamond_takes_top_at_small_budget() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        let sol = crptc_exact(&net, &p, &q(0, 3, 0.3)).unwrap();
        assert_eq!(sol.link_path, vec![LinkId(0), LinkId(1)]);
        let by_hand = 2.0 * 2.75 / 47.11 - 0.3 * (4.14 * 2.75 / 47.11 - 0.114);
        assert!((sol.energy_cost() - by_hand).abs() < 1e-12);
        assert!((sol.energy_cost() - 0.078447).abs() < 1e-6);
        sol.check(&net, &q(0, 3, 0.3)).unwrap();
    }

    #[test]
    fn zero_budget_matches_cdf() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        let a = crptc_exact(&net, &p, &q(0, 3, 0.0)).unwrap();
        let b = cdf_exact(&net, &p, &q(0, 3, 0.0)).unwrap();
        assert_eq!(a.link_path, b.link_path);
        assert_eq!(a.energy_cost(), b.energy_cost());
    }

    #[test]
    fn label_limit() {
        let net = fixtures::diamond();
        let err = crptc_exact_with(
            &net,
            &EnergyParams::default(),
            &q(0, 3, 0.3),
            &CrptcConfig { max_labels: 2 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Capacity { what: "labels", .. }));
    }

    #[test]
    fn unreachable_and_trivial() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        assert!(matches!(
            crptc_exact(&net, &p, &q(3, 1, 0.3)),
            Err(Error::NoRoute { .. })
        ));
        let sol = crptc_exact(&net, &p, &q(0, 0, 0.3)).unwrap();
        assert!(sol.link_path.is_empty() && sol.energy_cost() == 0.0);
    }
}
