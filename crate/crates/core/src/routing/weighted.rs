//! Time-weighted eco-routing: minimize `alpha * t / beta_time +
//! (1 - alpha) * c / beta_energy` where `c` is the energy cost under the
//! chosen control policy.

use alloc::format;

use super::cdf::{cdf_label_search, ObjectiveWeights};
use super::{Algorithm, Query, RouteSolution};
use crate::crptc::{crptc_label_search, knapsack_split, CrptcConfig};
use crate::energy::{cd_cost, cs_cost, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::Network;

/// Which control policy prices the energy term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightedAlgo {
    /// Charge-depleting-first along the route.
    Cdf,
    /// Optimal CD fractions along the route.
    Crptc,
}

/// Scales that bring both objective terms to comparable magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizers {
    /// Hours.
    pub time: f64,
    /// Dollars.
    pub energy: f64,
}

impl Normalizers {
    /// Largest single-link travel time and largest single-link energy cost
    /// in either mode.
    pub fn for_network(net: &Network, p: &EnergyParams) -> Self {
        let mut time: f64 = 0.0;
        let mut energy: f64 = 0.0;
        for l in net.link_ids() {
            let (d, cat) = (net.length(l), net.category(l));
            time = time.max(net.travel_time(l));
            energy = energy.max(cs_cost(d, cat, p)).max(cd_cost(d, cat, p).0);
        }
        Self { time, energy }
    }

    /// Query overrides take precedence over the network defaults.
    pub fn resolve(net: &Network, p: &EnergyParams, q: &Query) -> Self {
        match (q.beta_time, q.beta_energy) {
            (Some(time), Some(energy)) => Self { time, energy },
            (t, e) => {
                let base = Self::for_network(net, p);
                Self {
                    time: t.unwrap_or(base.time),
                    energy: e.unwrap_or(base.energy),
                }
            }
        }
    }

    pub(crate) fn weights(&self, alpha: f64) -> ObjectiveWeights {
        ObjectiveWeights {
            energy: (1.0 - alpha) / self.energy,
            time: alpha / self.time,
        }
    }
}

pub fn weighted_route(net: &Network, p: &EnergyParams, q: &Query, algo: WeightedAlgo) -> Result<RouteSolution> {
    q.validate(net)?;
    let norm = Normalizers::resolve(net, p, q);
    if !(norm.time > 0.0 && norm.energy > 0.0) {
        return Err(Error::Domain(format!("normalizers must be positive, got {norm:?}")));
    }
    let w = norm.weights(q.alpha);
    let mut sol = match algo {
        WeightedAlgo::Cdf => {
            let path = cdf_label_search(net, p, q, w)?;
            RouteSolution::with_cdf_policy(net, p, Algorithm::WeightedCdf, q, path)
        }
        WeightedAlgo::Crptc => {
            let path = crptc_label_search(net, p, q, w, &CrptcConfig::default())?;
            let split = knapsack_split(net, &path, q.budget_kwh, p)?;
            RouteSolution::assemble(net, p, Algorithm::WeightedCrptc, q.origin, path, split.y)
        }
    };
    sol.objective = w.time * sol.travel_time + w.energy * sol.energy_cost();
    Ok(sol)
}
