//! Exact CDF routing by splitting each route at the node where the battery
//! runs out.
//!
//! Before depletion every link is driven electrically; after it every link
//! is on gas, so the remainder is a plain shortest path on CS cost. The
//! solver enumerates the simple prefixes that end at a depletion node and
//! whose cost stays below the cost `rho` of a reference route, attaches the
//! cheapest CS suffix to each, and also keeps prefixes that reach the
//! destination with charge to spare.

use alloc::vec;
use alloc::vec::Vec;

use super::{distances_to, remove_cycles, shortest_path, Algorithm, Query, RouteSolution};
use crate::energy::{cdf_path_cost, cdf_step, cs_cost, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HybridLpConfig {
    /// Largest network the prefix enumeration is attempted on.
    pub node_cap: usize,
    /// Largest number of prefix extensions explored.
    pub max_prefixes: usize,
}

impl Default for HybridLpConfig {
    fn default() -> Self {
        Self {
            node_cap: 500,
            max_prefixes: 2_000_000,
        }
    }
}

pub fn hybrid_lp_route(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    hybrid_lp_route_with(net, p, q, &HybridLpConfig::default())
}

pub fn hybrid_lp_route_with(net: &Network, p: &EnergyParams, q: &Query, cfg: &HybridLpConfig) -> Result<RouteSolution> {
    q.validate(net)?;
    if net.node_count() > cfg.node_cap {
        return Err(Error::Capacity {
            what: "nodes",
            actual: net.node_count(),
            limit: cfg.node_cap,
            hint: "use cdf-exact on networks of this size",
        });
    }
    let (_, reference) = shortest_path(net, q.origin, q.destination, |l| net.length(l)).ok_or_else(|| q.no_route())?;
    let rho = cdf_path_cost(net, &reference, q.budget_kwh, p);
    let (suffix_cost, suffix_next) = distances_to(net, q.destination, |l| cs_cost(net.length(l), net.category(l), p));

    let mut search = PrefixSearch {
        net,
        p,
        destination: q.destination,
        limit: rho * (1.0 + 1e-12) + 1e-15,
        depleted_at: vec![None; net.node_count()],
        undepleted: Vec::new(),
        on_path: vec![false; net.node_count()],
        path: Vec::new(),
        expansions: 0,
        max_expansions: cfg.max_prefixes,
    };
    if q.origin == q.destination {
        return Ok(RouteSolution::with_cdf_policy(
            net,
            p,
            Algorithm::HybridLp,
            q,
            Vec::new(),
        ));
    }
    if q.budget_kwh <= 0.0 {
        search.depleted_at[q.origin.index()] = Some((0.0, Vec::new()));
    } else {
        search.on_path[q.origin.index()] = true;
        search.extend(q.origin, q.budget_kwh, 0.0)?;
    }

    let mut best: Option<(f64, Vec<LinkId>)> = None;
    let mut offer = |cost: f64, walk: Vec<LinkId>| {
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, walk));
        }
    };
    for (node, prefix) in search.depleted_at.iter().enumerate() {
        let Some((cost, links)) = prefix else { continue };
        if !suffix_cost[node].is_finite() {
            continue;
        }
        let mut walk = links.clone();
        let mut at = node;
        while let Some(l) = suffix_next[at] {
            walk.push(l);
            at = net.link(l).to.index();
        }
        offer(cost + suffix_cost[node], walk);
    }
    for (cost, links) in search.undepleted {
        offer(cost, links);
    }

    // rho bounds the optimum, so the reference route itself is a candidate
    // of last resort when pruning tolerance leaves nothing else
    let walk = best.map_or(reference, |(_, w)| w);
    let path = remove_cycles(net, q.origin, &walk);
    Ok(RouteSolution::with_cdf_policy(net, p, Algorithm::HybridLp, q, path))
}

struct PrefixSearch<'a> {
    net: &'a Network,
    p: &'a EnergyParams,
    destination: NodeId,
    limit: f64,
    /// Cheapest prefix whose battery ran out on arrival at each node.
    depleted_at: Vec<Option<(f64, Vec<LinkId>)>>,
    /// Prefixes that reach the destination with charge left.
    undepleted: Vec<(f64, Vec<LinkId>)>,
    on_path: Vec<bool>,
    path: Vec<LinkId>,
    expansions: usize,
    max_expansions: usize,
}

impl PrefixSearch<'_> {
    fn extend(&mut self, u: NodeId, residual: f64, cost: f64) -> Result<()> {
        for &l in self.net.outgoing(u) {
            let v = self.net.link(l).to;
            if self.on_path[v.index()] {
                continue;
            }
            let (c, r) = cdf_step(self.net.length(l), self.net.category(l), residual, self.p);
            let total = cost + c;
            if total > self.limit {
                continue;
            }
            self.expansions += 1;
            if self.expansions > self.max_expansions {
                return Err(Error::Capacity {
                    what: "prefix extensions",
                    actual: self.expansions,
                    limit: self.max_expansions,
                    hint: "use cdf-exact for this query",
                });
            }
            self.path.push(l);
            if r <= 0.0 {
                let slot = &mut self.depleted_at[v.index()];
                if slot.as_ref().is_none_or(|(best, _)| total < *best) {
                    *slot = Some((total, self.path.clone()));
                }
            } else if v == self.destination {
                self.undepleted.push((total, self.path.clone()));
            } else {
                self.on_path[v.index()] = true;
                self.extend(v, r, total)?;
                self.on_path[v.index()] = false;
            }
            self.path.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::cd_cost;
    use crate::netmodel::{fixtures, generate_synthetic, GraphKind, SyntheticConfig};
    use crate::routing::cdf_exact;
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
        let sol = hybrid_lp_route(&net, &p, &q(0, 3, 0.0)).unwrap();
        assert_eq!(sol.link_path, path);
        assert!((sol.energy_cost() - gas).abs() < 1e-12);
    }

    #[test]
    fn never_depleted_branch() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        let (ele, path) = shortest_path(&net, NodeId(0), NodeId(3), |l| {
            cd_cost(net.length(l), net.category(l), &p).0
        })
        .unwrap();
        let sol = hybrid_lp_route(&net, &p, &q(0, 3, 10.0)).unwrap();
        assert_eq!(sol.link_path, path);
        assert!((sol.energy_cost() - ele).abs() < 1e-12);
    }

    #[test]
    fn capacity_limits() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        let tight = HybridLpConfig {
            node_cap: 3,
            ..HybridLpConfig::default()
        };
        assert!(matches!(
            hybrid_lp_route_with(&net, &p, &q(0, 3, 0.2), &tight),
            Err(Error::Capacity { what: "nodes", .. })
        ));
        let tiny = HybridLpConfig {
            max_prefixes: 1,
            ..HybridLpConfig::default()
        };
        assert!(matches!(
            hybrid_lp_route_with(&net, &p, &q(0, 3, 0.2), &tiny),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn no_route_and_trivial() {
        let net = fixtures::diamond();
        let p = EnergyParams::default();
        assert!(matches!(
            hybrid_lp_route(&net, &p, &q(3, 0, 0.2)),
            Err(Error::NoRoute { .. })
        ));
        assert!(hybrid_lp_route(&net, &p, &q(2, 2, 0.2)).unwrap().link_path.is_empty());
    }

    proptest! {
        #[test]
        fn matches_pareto_search(seed in 0u64..10_000, n in 3usize..10, budget in 0.0f64..1.5,
                                 c_ele in 0.05f64..0.5) {
            let cfg = SyntheticConfig::new(GraphKind::Random, n, 3.2, [0.4, 0.3, 0.3], seed);
            let net = generate_synthetic(&cfg).unwrap();
            let p = EnergyParams { c_ele, ..EnergyParams::default() };
            let query = q(1, (n - 1) as u32, budget);
            let hybrid = hybrid_lp_route(&net, &p, &query).unwrap();
            let exact = cdf_exact(&net, &p, &query).unwrap();
            prop_assert!(hybrid.is_simple());
            let tol = 1e-9 * exact.energy_cost().max(1.0);
            prop_assert!((hybrid.energy_cost() - exact.energy_cost()).abs() <= tol,
                "{} vs {}", hybrid.energy_cost(), exact.energy_cost());
        }
    }
}
