//! Combined routing and power-train control: choose the route and the CD
//! fraction of every link together.

mod knapsack;
mod milp;
mod search;

pub use knapsack::{knapsack_split, KnapsackSplit};
pub use milp::{export_milp, MilpConfig};
pub use search::{crptc_exact, crptc_exact_with, CrptcConfig};

pub(crate) use search::crptc_label_search;

use crate::energy::EnergyParams;
use crate::error::Result;
use crate::netmodel::Network;
use crate::routing::{cdf_dijkstra, Algorithm, Query, RouteSolution};

/// Two-level heuristic: take the single-label CDF route, then spend the
/// battery on it optimally.
pub fn bilevel_route(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    let route = cdf_dijkstra(net, p, q)?;
    let split = knapsack_split(net, &route.link_path, q.budget_kwh, p)?;
    Ok(RouteSolution::assemble(
        net,
        p,
        Algorithm::Bilevel,
        q.origin,
        route.link_path,
        split.y,
    ))
}
