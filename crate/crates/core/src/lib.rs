//! Energy-cost routing for plug-in hybrid electric vehicles.
//!
//! The crate models a road network as a directed graph whose links are
//! classified by congestion, prices each link under charge-depleting (CD)
//! and charge-sustaining (CS) operation, and solves for routes that minimize
//! total energy cost:
//!
//! * [`routing`] holds the fixed-policy solvers: the fastest-route baseline,
//!   the single-label CDF search, an exact Pareto label search for the same
//!   objective, the LP-relaxation hybrid, and time-weighted variants.
//! * [`crptc`] jointly chooses the route and the per-link CD fraction, either
//!   exactly or with the two-level heuristic, and exports the mixed-integer
//!   model in LP text format.
//! * [`oracle`] enumerates simple paths and serves as ground truth in tests.
//!
//! Everything here is `no_std` with `alloc`; file formats, timing and the CLI
//! live in the `ecoroute` crate.

#![no_std]
// 3.14 mi/kWh is a measured fuel economy, not pi.
#![allow(clippy::approx_constant)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod crptc;
pub mod energy;
mod error;
pub mod netmodel;
pub mod oracle;
pub mod routing;

pub use energy::{CostBreakdown, EnergyParams, PerCategory};
pub use error::{Error, Result};
pub use netmodel::{Link, LinkId, Network, NetworkBuilder, Node, NodeId, TrafficCategory};
pub use routing::{Algorithm, Query, RouteSolution};

/// Runs the solver named by `algorithm`.
pub fn solve(net: &Network, p: &EnergyParams, q: &Query, algorithm: Algorithm) -> Result<RouteSolution> {
    use routing::WeightedAlgo;
    match algorithm {
        Algorithm::Fastest => routing::fastest_route(net, p, q),
        Algorithm::CdfDijkstra => routing::cdf_dijkstra(net, p, q),
        Algorithm::CdfExact => routing::cdf_exact(net, p, q),
        Algorithm::HybridLp => routing::hybrid_lp_route(net, p, q),
        Algorithm::Bilevel => crptc::bilevel_route(net, p, q),
        Algorithm::Crptc => crptc::crptc_exact(net, p, q),
        Algorithm::WeightedCdf => routing::weighted_route(net, p, q, WeightedAlgo::Cdf),
        Algorithm::WeightedCrptc => routing::weighted_route(net, p, q, WeightedAlgo::Crptc),
        Algorithm::OracleCdf => oracle::oracle_cdf(net, p, q),
        Algorithm::OracleCrptc => oracle::oracle_crptc(net, p, q),
    }
}
