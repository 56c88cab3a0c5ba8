//! Charge-depleting-first routing.
//!
//! The battery is drained from the start of the trip, so a link's cost
//! depends on the energy left when the vehicle enters it. [`cdf_dijkstra`]
//! keeps a single `(cost, energy)` label per node. [`cdf_exact`] keeps every
//! label not dominated in cost and residual energy. With positive prices
//! the two agree: a prefix that still holds charge has bought no gas, so the
//! cheaper of two prefixes never holds less energy.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use super::{unwind, Algorithm, HeapEntry, Query, RouteSolution, DOMINANCE_TOL};
use crate::energy::{cdf_step, EnergyParams};
use crate::error::Result;
use crate::netmodel::{LinkId, Network, NodeId};

/// Single-label modified Dijkstra: each node keeps the cheapest cost found
/// so far together with the residual energy of that particular path.
pub fn cdf_dijkstra(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    q.validate(net)?;
    let n = net.node_count();
    let mut cost = vec![f64::INFINITY; n];
    let mut energy = vec![0.0; n];
    let mut prev: Vec<Option<LinkId>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    cost[q.origin.index()] = 0.0;
    energy[q.origin.index()] = q.budget_kwh;
    heap.push(HeapEntry {
        key: 0.0,
        node: q.origin.0,
        label: 0,
    });

    while let Some(HeapEntry { key, node: u, .. }) = heap.pop() {
        if key > cost[u as usize] {
            continue;
        }
        if u == q.destination.0 {
            let path = unwind(u, |v| prev[v as usize].map(|l| (net.link(l).from.0, l)));
            return Ok(RouteSolution::with_cdf_policy(net, p, Algorithm::CdfDijkstra, q, path));
        }
        let e_u = energy[u as usize];
        for &l in net.outgoing(NodeId(u)) {
            let v = net.link(l).to.index();
            let (link_cost, e_v) = cdf_step(net.length(l), net.category(l), e_u, p);
            let alt = key + link_cost;
            if alt < cost[v] {
                cost[v] = alt;
                energy[v] = e_v;
                prev[v] = Some(l);
                heap.push(HeapEntry {
                    key: alt,
                    node: v as u32,
                    label: 0,
                });
            }
        }
    }
    Err(q.no_route())
}

/// Exact minimum charge-depleting-first cost route.
pub fn cdf_exact(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    q.validate(net)?;
    let path = cdf_label_search(net, p, q, ObjectiveWeights::ENERGY)?;
    Ok(RouteSolution::with_cdf_policy(net, p, Algorithm::CdfExact, q, path))
}

/// Per-link objective `energy * cdf_cost + time * travel_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ObjectiveWeights {
    pub energy: f64,
    pub time: f64,
}

impl ObjectiveWeights {
    pub const ENERGY: Self = Self { energy: 1.0, time: 0.0 };
}

#[derive(Debug, Clone, Copy)]
struct CdfLabel {
    node: u32,
    objective: f64,
    residual: f64,
    parent: u32,
    link: LinkId,
    alive: bool,
}

const ROOT: u32 = u32::MAX;

/// Pareto label setting over `(objective, residual energy)`.
///
/// Label `a` dominates `b` at the same node when `a` is no worse in
/// objective and carries at least as much energy. When some category has a
/// negative savings rate, extra charge can raise later costs by at most
/// `loss * extra_kwh`, and that bound is added to `a`'s objective before
/// comparing. Labels never extend onto a node already on their own path.
pub(crate) fn cdf_label_search(net: &Network, p: &EnergyParams, q: &Query, w: ObjectiveWeights) -> Result<Vec<LinkId>> {
    if q.origin == q.destination {
        return Ok(Vec::new());
    }
    let loss = w.energy * p.max_savings_loss();
    let dominates = |a: &CdfLabel, b: &CdfLabel| {
        let penalty = loss * (a.residual - b.residual).max(0.0);
        a.objective + penalty <= b.objective + DOMINANCE_TOL && a.residual >= b.residual - DOMINANCE_TOL
    };

    let mut labels = vec![CdfLabel {
        node: q.origin.0,
        objective: 0.0,
        residual: q.budget_kwh,
        parent: ROOT,
        link: LinkId(u32::MAX),
        alive: true,
    }];
    let mut at_node: Vec<Vec<u32>> = vec![Vec::new(); net.node_count()];
    at_node[q.origin.index()].push(0);
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry {
        key: 0.0,
        node: q.origin.0,
        label: 0,
    });

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
            if on_path(&labels, entry.label, v.0) {
                continue;
            }
            let (cost, residual) = cdf_step(net.length(l), net.category(l), current.residual, p);
            let candidate = CdfLabel {
                node: v.0,
                objective: current.objective + w.energy * cost + w.time * net.travel_time(l),
                residual,
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
            let id = labels.len() as u32;
            bucket.push(id);
            labels.push(candidate);
            heap.push(HeapEntry {
                key: candidate.objective,
                node: v.0,
                label: id,
            });
        }
    }
    Err(q.no_route())
}

fn on_path(labels: &[CdfLabel], mut label: u32, node: u32) -> bool {
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
    use crate::energy::{cd_cost, cdf_path_cost, cs_cost};
    use crate::error::Error;
    use crate::netmodel::{fixtures, generate_synthetic, GraphKind, SyntheticConfig};
    use crate::routing::shortest_path;
    use proptest::prelude::*;

    fn q(o: u32, d: u32, budget: f64) -> Query {
        Query::new(NodeId(o), NodeId(d), budget)
    }

    #[test]
    fn zero_budget_is_gas_dijkstra() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        let (gas, path) = shortest_path(&net, NodeId(0), NodeId(3), |l| {
            cs_cost(net.length(l), net.category(l), &p)
        })
        .unwrap();
        for solver in [cdf_dijkstra, cdf_exact] {
            let sol = solver(&net, &p, &q(0, 3, 0.0)).unwrap();
            assert_eq!(sol.link_path, path);
            assert!((sol.energy_cost() - gas).abs() < 1e-12);
            assert_eq!(sol.breakdown.kwh_used, 0.0);
        }
    }

    #[test]
    fn large_budget_is_electric_dijkstra() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        let (ele, path) = shortest_path(&net, NodeId(0), NodeId(3), |l| {
            cd_cost(net.length(l), net.category(l), &p).0
        })
        .unwrap();
        for solver in [cdf_dijkstra, cdf_exact] {
            let sol = solver(&net, &p, &q(0, 3, 100.0)).unwrap();
            assert_eq!(sol.link_path, path);
            assert!((sol.energy_cost() - ele).abs() < 1e-12);
            assert!(sol.y.iter().all(|&y| y == 1.0));
        }
    }

    fn random_params(c_gas: f64, c_ele: f64) -> EnergyParams {
        EnergyParams {
            c_gas,
            c_ele,
            ..EnergyParams::default()
        }
    }

    proptest! {
        // A label that still holds charge has bought no gas, so its cost is
        // exactly c_ele * (budget - residual): the cheapest label at a node
        // also carries the most energy, and one extra kWh can raise the rest
        // of the trip by at most c_ele. Single-label pruning is therefore
        // safe for any positive prices, negative savings rates included.
        #[test]
        fn single_label_matches_pareto(seed in 0u64..10_000, n in 3usize..9, budget in 0.0f64..1.5,
                                       c_gas in 1.0f64..5.0, c_ele in 0.05f64..0.6) {
            let cfg = SyntheticConfig::new(GraphKind::Random, n, 3.0, [0.4, 0.3, 0.3], seed);
            let net = generate_synthetic(&cfg).unwrap();
            let p = random_params(c_gas, c_ele);
            let query = q(0, (n - 1) as u32, budget);
            let single = cdf_dijkstra(&net, &p, &query).unwrap();
            let pareto = cdf_exact(&net, &p, &query).unwrap();
            let tol = 1e-9 * pareto.energy_cost().max(1.0);
            prop_assert!(pareto.energy_cost() <= single.energy_cost() + tol);
            prop_assert!(single.energy_cost() <= pareto.energy_cost() + tol);
            prop_assert!((cdf_path_cost(&net, &pareto.link_path, budget, &p) - pareto.energy_cost()).abs() <= tol);
        }
    }

    #[test]
    fn no_route() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        assert!(matches!(
            cdf_dijkstra(&net, &p, &q(3, 0, 0.0)),
            Err(Error::NoRoute { .. })
        ));
        assert!(matches!(cdf_exact(&net, &p, &q(3, 0, 0.0)), Err(Error::NoRoute { .. })));
    }

    #[test]
    fn trivial_query() {
        let net = fixtures::diamond();
        let sol = cdf_exact(&net, &EnergyParams::default(), &q(1, 1, 0.5)).unwrap();
        assert!(sol.link_path.is_empty());
        assert_eq!(sol.energy_cost(), 0.0);
    }

    #[test]
    fn rejects_bad_queries() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        assert!(matches!(cdf_exact(&net, &p, &q(0, 9, 0.0)), Err(Error::UnknownNode(_))));
        assert!(matches!(cdf_exact(&net, &p, &q(0, 3, -1.0)), Err(Error::Domain(_))));
        assert!(matches!(
            cdf_exact(&net, &p, &q(0, 3, 0.0).with_slot(1)),
            Err(Error::SlotMismatch { .. })
        ));
    }
}
