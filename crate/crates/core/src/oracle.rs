//! Brute-force references: enumerate every simple path and price each one.
//!
//! Only the per-link cost functions and the fixed-route split are shared
//! with the solvers; no search code is.

use alloc::vec;
use alloc::vec::Vec;

use crate::crptc::knapsack_split;
use crate::energy::{cdf_link_cost, cs_cost, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network, NodeId};
use crate::routing::{Algorithm, Query, RouteSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    /// Largest network enumerated.
    pub node_cap: usize,
    /// Enumeration stops once this many paths are collected.
    pub max_paths: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            node_cap: 14,
            max_paths: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEnumeration {
    /// Simple paths in depth-first discovery order.
    pub paths: Vec<Vec<LinkId>>,
    /// False when `max_paths` cut the enumeration short.
    pub exhausted: bool,
}

pub fn enumerate_paths(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    limits: &EnumerationLimits,
) -> Result<PathEnumeration> {
    if net.node_count() > limits.node_cap {
        return Err(Error::Capacity {
            what: "nodes",
            actual: net.node_count(),
            limit: limits.node_cap,
            hint: "path enumeration is exponential; use a smaller network",
        });
    }
    for node in [origin, destination] {
        if !net.contains(node) {
            return Err(Error::UnknownNode(node));
        }
    }
    let mut out = PathEnumeration {
        paths: Vec::new(),
        exhausted: true,
    };
    if origin == destination {
        out.paths.push(Vec::new());
        return Ok(out);
    }

    // explicit stack of (node, index of next outgoing link to try)
    let mut visited = vec![false; net.node_count()];
    let mut stack = vec![(origin, 0usize)];
    let mut path: Vec<LinkId> = Vec::new();
    visited[origin.index()] = true;
    while let Some(top) = stack.last_mut() {
        let (u, next) = *top;
        let Some(&l) = net.outgoing(u).get(next) else {
            visited[u.index()] = false;
            stack.pop();
            path.pop();
            continue;
        };
        top.1 += 1;
        let v = net.link(l).to;
        if visited[v.index()] {
            continue;
        }
        if v == destination {
            let mut found = path.clone();
            found.push(l);
            out.paths.push(found);
            if out.paths.len() >= limits.max_paths {
                out.exhausted = false;
                return Ok(out);
            }
            continue;
        }
        visited[v.index()] = true;
        path.push(l);
        stack.push((v, 0));
    }
    Ok(out)
}

/// Cheapest path under the charge-depleting-first policy.
pub fn oracle_cdf(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    oracle_cdf_with(net, p, q, &EnumerationLimits::default())
}

pub fn oracle_cdf_with(
    net: &Network,
    p: &EnergyParams,
    q: &Query,
    limits: &EnumerationLimits,
) -> Result<RouteSolution> {
    let paths = enumerate_all(net, q, limits)?;
    let mut best: Option<(f64, &Vec<LinkId>)> = None;
    for path in &paths {
        let mut residual = q.budget_kwh;
        let mut cost = 0.0;
        for &l in path {
            let (c, r) = cdf_link_cost(net.length(l), net.category(l), residual, p)?;
            cost += c;
            residual = r;
        }
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, path));
        }
    }
    let (_, path) = best.ok_or_else(|| no_route(q))?;
    Ok(RouteSolution::with_cdf_policy(
        net,
        p,
        Algorithm::OracleCdf,
        q,
        path.clone(),
    ))
}

/// Cheapest path when the CD fractions are chosen optimally for each path.
pub fn oracle_crptc(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    oracle_crptc_with(net, p, q, &EnumerationLimits::default())
}

pub fn oracle_crptc_with(
    net: &Network,
    p: &EnergyParams,
    q: &Query,
    limits: &EnumerationLimits,
) -> Result<RouteSolution> {
    let paths = enumerate_all(net, q, limits)?;
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (i, path) in paths.iter().enumerate() {
        let gas: f64 = path.iter().map(|&l| cs_cost(net.length(l), net.category(l), p)).sum();
        let split = knapsack_split(net, path, q.budget_kwh, p)?;
        let cost = gas - split.total_savings;
        if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
            best = Some((cost, i, split.y));
        }
    }
    let (_, i, y) = best.ok_or_else(|| no_route(q))?;
    Ok(RouteSolution::assemble(
        net,
        p,
        Algorithm::OracleCrptc,
        q.origin,
        paths[i].clone(),
        y,
    ))
}

fn enumerate_all(net: &Network, q: &Query, limits: &EnumerationLimits) -> Result<Vec<Vec<LinkId>>> {
    q.validate(net)?;
    let found = enumerate_paths(net, q.origin, q.destination, limits)?;
    if !found.exhausted {
        return Err(Error::Capacity {
            what: "paths",
            actual: found.paths.len(),
            limit: limits.max_paths,
            hint: "raise max_paths or use a smaller network",
        });
    }
    Ok(found.paths)
}

fn no_route(q: &Query) -> Error {
    Error::NoRoute {
        origin: q.origin,
        destination: q.destination,
    }
}
