use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::energy::{kwh_needed, savings_rate, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network};

/// Optimal CD fractions for a fixed route.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSplit {
    pub y: Vec<f64>,
    /// kWh spent on each link.
    pub kwh_allocated: Vec<f64>,
    /// Dollars saved against driving the whole route on gas.
    pub total_savings: f64,
}

/// Spends the budget on the links with the highest savings per kWh first.
///
/// For a fixed route the cost is linear in each fraction with slope
/// `-rate * kwh_needed`, and the only coupling is the shared budget, so the
/// greedy order solves the LP exactly. Links whose rate is not positive get
/// nothing; equal rates are filled in route order.
pub fn knapsack_split(net: &Network, path: &[LinkId], budget: f64, p: &EnergyParams) -> Result<KnapsackSplit> {
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!(
            "budget must be a non-negative number of kWh, got {budget}"
        )));
    }
    let mut order: Vec<(usize, f64, f64)> = path
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let (d, cat) = (net.length(l), net.category(l));
            (i, savings_rate(cat, p), kwh_needed(d, cat, p))
        })
        .filter(|&(_, rate, _)| rate > 0.0)
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut y = vec![0.0; path.len()];
    let mut kwh = vec![0.0; path.len()];
    let mut remaining = budget;
    let mut savings = 0.0;
    for (i, rate, need) in order {
        if remaining <= 0.0 {
            break;
        }
        let frac = if remaining >= need { 1.0 } else { remaining / need };
        y[i] = frac;
        kwh[i] = frac * need;
        remaining -= kwh[i];
        savings += rate * frac * need;
    }
    Ok(KnapsackSplit {
        y,
        kwh_allocated: kwh,
        total_savings: savings,
    })
}

/// Savings from spending `budget` across per-category capacities, rates
/// sorted descending. Only positive-rate categories should be passed in.
pub(crate) fn category_savings(capacity: &[f64; 3], rates: &[(usize, f64)], budget: f64) -> f64 {
    let mut remaining = budget;
    let mut savings = 0.0;
    for &(c, rate) in rates {
        let take = capacity[c].min(remaining);
        savings += rate * take;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    savings
}
