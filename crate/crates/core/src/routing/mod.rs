//! Route solvers for the charge-depleting-first policy and the time-weighted
//! variants, plus the fastest-route baseline.

mod cdf;
mod dijkstra;
mod hybrid_lp;
mod weighted;

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::energy::{self, CostBreakdown, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network, NodeId};

pub(crate) use cdf::ObjectiveWeights;
pub use cdf::{cdf_dijkstra, cdf_exact};
pub use dijkstra::fastest_route;
pub(crate) use dijkstra::{distances_to, shortest_path, HeapEntry};
pub use hybrid_lp::{hybrid_lp_route, hybrid_lp_route_with, HybridLpConfig};
pub use weighted::{weighted_route, Normalizers, WeightedAlgo};

/// Absolute tolerance used when comparing labels.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Fastest,
    CdfDijkstra,
    CdfExact,
    HybridLp,
    Bilevel,
    Crptc,
    WeightedCdf,
    WeightedCrptc,
    OracleCdf,
    OracleCrptc,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fastest => "fastest",
            Self::CdfDijkstra => "cdf",
            Self::CdfExact => "cdf-exact",
            Self::HybridLp => "hybrid-lp",
            Self::Bilevel => "bilevel",
            Self::Crptc => "crptc",
            Self::WeightedCdf => "weighted-cdf",
            Self::WeightedCrptc => "weighted-crptc",
            Self::OracleCdf => "oracle-cdf",
            Self::OracleCrptc => "oracle-crptc",
        }
    }

    pub const ALL: [Self; 10] = [
        Self::Fastest,
        Self::CdfDijkstra,
        Self::CdfExact,
        Self::HybridLp,
        Self::Bilevel,
        Self::Crptc,
        Self::WeightedCdf,
        Self::WeightedCrptc,
        Self::OracleCdf,
        Self::OracleCrptc,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One origin-destination request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub origin: NodeId,
    pub destination: NodeId,
    /// Usable battery energy for the trip, kWh.
    pub budget_kwh: f64,
    /// Weight of travel time against energy cost, in `[0, 1]`.
    pub alpha: f64,
    /// Time normalizer in hours; defaults to the longest link time.
    pub beta_time: Option<f64>,
    /// Energy normalizer in dollars; defaults to the dearest link.
    pub beta_energy: Option<f64>,
    pub slot: usize,
}

impl Query {
    pub fn new(origin: NodeId, destination: NodeId, budget_kwh: f64) -> Self {
        Self {
            origin,
            destination,
            budget_kwh,
            alpha: 0.0,
            beta_time: None,
            beta_energy: None,
            slot: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_normalizers(mut self, beta_time: f64, beta_energy: f64) -> Self {
        self.beta_time = Some(beta_time);
        self.beta_energy = Some(beta_energy);
        self
    }

    pub fn with_slot(mut self, slot: usize) -> Self {
        self.slot = slot;
        self
    }

    pub fn with_budget(mut self, budget_kwh: f64) -> Self {
        self.budget_kwh = budget_kwh;
        self
    }

    pub fn validate(&self, net: &Network) -> Result<()> {
        for node in [self.origin, self.destination] {
            if !net.contains(node) {
                return Err(Error::UnknownNode(node));
            }
        }
        if !(self.budget_kwh >= 0.0 && self.budget_kwh.is_finite()) {
            return Err(Error::Domain(format!(
                "budget must be a non-negative number of kWh, got {}",
                self.budget_kwh
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        for beta in [self.beta_time, self.beta_energy].into_iter().flatten() {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::Domain(format!("normalizers must be positive, got {beta}")));
            }
        }
        if self.slot != net.slot() {
            return Err(Error::SlotMismatch {
                query: self.slot,
                network: net.slot(),
            });
        }
        Ok(())
    }

    pub(crate) fn no_route(&self) -> Error {
        Error::NoRoute {
            origin: self.origin,
            destination: self.destination,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteSolution {
    pub algorithm: Algorithm,
    pub node_path: Vec<NodeId>,
    pub link_path: Vec<LinkId>,
    /// CD fraction per link of `link_path`.
    pub y: Vec<f64>,
    pub breakdown: CostBreakdown,
    /// Hours.
    pub travel_time: f64,
    /// Value of the quantity the solver minimized: dollars for the energy
    /// solvers, hours for the fastest route, the normalized weighted sum
    /// for the weighted solvers.
    pub objective: f64,
    /// Seconds; filled in by callers that time the solver.
    pub wall_time: f64,
}

impl RouteSolution {
    pub(crate) fn assemble(
        net: &Network,
        p: &EnergyParams,
        algorithm: Algorithm,
        origin: NodeId,
        link_path: Vec<LinkId>,
        y: Vec<f64>,
    ) -> Self {
        let mut node_path = Vec::with_capacity(link_path.len() + 1);
        node_path.push(origin);
        node_path.extend(link_path.iter().map(|&l| net.link(l).to));
        let breakdown = energy::breakdown(net, &link_path, &y, p);
        let travel_time = link_path.iter().map(|&l| net.travel_time(l)).sum();
        Self {
            algorithm,
            node_path,
            link_path,
            y,
            objective: breakdown.total_dollars,
            breakdown,
            travel_time,
            wall_time: 0.0,
        }
    }

    /// Path driven under the charge-depleting-first policy.
    pub(crate) fn with_cdf_policy(
        net: &Network,
        p: &EnergyParams,
        algorithm: Algorithm,
        q: &Query,
        link_path: Vec<LinkId>,
    ) -> Self {
        let y = energy::cdf_fractions(net, &link_path, q.budget_kwh, p);
        Self::assemble(net, p, algorithm, q.origin, link_path, y)
    }

    pub fn energy_cost(&self) -> f64 {
        self.breakdown.total_dollars
    }

    /// No node appears twice.
    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.node_path.iter().all(|n| seen.insert(*n))
    }

    /// Structural checks every solver result must pass: a contiguous simple
    /// path from the query origin to its destination, fractions in range and
    /// battery use within budget.
    pub fn check(&self, net: &Network, q: &Query) -> Result<()> {
        energy::check_contiguous(net, &self.link_path)?;
        let first_ok = self.node_path.first() == Some(&q.origin);
        let last_ok = self.node_path.last() == Some(&q.destination);
        if !first_ok || !last_ok || self.node_path.len() != self.link_path.len() + 1 {
            return Err(Error::Domain("route does not join origin to destination".into()));
        }
        if !self.is_simple() {
            return Err(Error::Domain("route revisits a node".into()));
        }
        if self.y.len() != self.link_path.len() || self.y.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Domain("CD fractions invalid".into()));
        }
        if self.breakdown.kwh_used > q.budget_kwh + 1e-9 {
            return Err(Error::Domain(format!(
                "route uses {} kWh over a budget of {}",
                self.breakdown.kwh_used, q.budget_kwh
            )));
        }
        Ok(())
    }
}

/// Follows parent pointers back to the root; returns links in travel order.
pub(crate) fn unwind(mut label: u32, parent: impl Fn(u32) -> Option<(u32, LinkId)>) -> Vec<LinkId> {
    let mut links = Vec::new();
    while let Some((prev, link)) = parent(label) {
        links.push(link);
        label = prev;
    }
    links.reverse();
    links
}

/// Drops every closed sub-walk so each node appears at most once. Under
/// both cost models a cycle costs more than the energy it frees can save
/// later, so the result is never dearer than the input walk.
pub(crate) fn remove_cycles(net: &Network, origin: NodeId, walk: &[LinkId]) -> Vec<LinkId> {
    let mut position = alloc::collections::BTreeMap::new();
    position.insert(origin, 0usize);
    let mut out: Vec<LinkId> = Vec::with_capacity(walk.len());
    for &l in walk {
        let to = net.link(l).to;
        if let Some(&keep) = position.get(&to) {
            for dropped in out.drain(keep..) {
                position.remove(&net.link(dropped).to);
            }
        } else {
            out.push(l);
            position.insert(to, out.len());
        }
    }
    out
}
