//! Indirect energy model: per-mile conversion factors by congestion category.
//!
//! Each category carries an electric efficiency `mu_cd` (mi/kWh) and a fuel
//! efficiency `mu_cs` (mi/gal). A link of length `d` costs
//! `c_gas * d / mu_cs` dollars in charge-sustaining mode and
//! `c_ele * d / mu_cd` in charge-depleting mode, using `d / mu_cd` kWh.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network, TrafficCategory};

/// One value per traffic category.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerCategory<T> {
    pub high: T,
    pub medium: T,
    pub low: T,
}

impl<T: Copy> PerCategory<T> {
    pub fn get(&self, cat: TrafficCategory) -> T {
        self[cat]
    }

    pub fn from_fn(mut f: impl FnMut(TrafficCategory) -> T) -> Self {
        Self {
            high: f(TrafficCategory::High),
            medium: f(TrafficCategory::Medium),
            low: f(TrafficCategory::Low),
        }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.high, self.medium, self.low]
    }
}

impl<T> Index<TrafficCategory> for PerCategory<T> {
    type Output = T;
    fn index(&self, cat: TrafficCategory) -> &T {
        match cat {
            TrafficCategory::High => &self.high,
            TrafficCategory::Medium => &self.medium,
            TrafficCategory::Low => &self.low,
        }
    }
}

impl<T> IndexMut<TrafficCategory> for PerCategory<T> {
    fn index_mut(&mut self, cat: TrafficCategory) -> &mut T {
        match cat {
            TrafficCategory::High => &mut self.high,
            TrafficCategory::Medium => &mut self.medium,
            TrafficCategory::Low => &mut self.low,
        }
    }
}

/// Prices and per-category conversion factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// $/gallon.
    pub c_gas: f64,
    /// $/kWh.
    pub c_ele: f64,
    /// mi/kWh in charge-depleting mode.
    pub mu_cd: PerCategory<f64>,
    /// mi/gallon in charge-sustaining mode.
    pub mu_cs: PerCategory<f64>,
}

impl Default for EnergyParams {
    /// Audi A3 e-tron factors with 2.75 $/gal and 0.114 $/kWh.
    fn default() -> Self {
        Self {
            c_gas: 2.75,
            c_ele: 0.114,
            mu_cd: PerCategory {
                high: 3.14,
                medium: 4.39,
                low: 4.14,
            },
            mu_cs: PerCategory {
                high: 28.88,
                medium: 49.03,
                low: 47.11,
            },
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.c_gas) || !ok(self.c_ele) {
            return Err(Error::Domain(format!(
                "prices must be positive: c_gas={}, c_ele={}",
                self.c_gas, self.c_ele
            )));
        }
        for cat in TrafficCategory::ALL {
            if !ok(self.mu_cd[cat]) || !ok(self.mu_cs[cat]) {
                return Err(Error::Domain(format!(
                    "conversion factors for {cat} must be positive: mu_cd={}, mu_cs={}",
                    self.mu_cd[cat], self.mu_cs[cat]
                )));
            }
        }
        Ok(())
    }

    /// Savings rate of every category.
    pub fn savings_rates(&self) -> PerCategory<f64> {
        PerCategory::from_fn(|c| savings_rate(c, self))
    }

    /// Largest positive savings rate, or 0 when CD mode never pays off.
    pub fn max_savings_rate(&self) -> f64 {
        TrafficCategory::ALL
            .iter()
            .map(|&c| savings_rate(c, self))
            .fold(0.0, f64::max)
    }

    /// Magnitude of the most negative savings rate, or 0.
    pub fn max_savings_loss(&self) -> f64 {
        TrafficCategory::ALL
            .iter()
            .map(|&c| -savings_rate(c, self))
            .fold(0.0, f64::max)
    }
}

/// Gas-only cost of a link, dollars.
#[inline]
pub fn cs_cost(length: f64, cat: TrafficCategory, p: &EnergyParams) -> f64 {
    p.c_gas * length / p.mu_cs[cat]
}

/// Battery energy needed to drive a link entirely in CD mode, kWh.
#[inline]
pub fn kwh_needed(length: f64, cat: TrafficCategory, p: &EnergyParams) -> f64 {
    length / p.mu_cd[cat]
}

/// Electric-only cost of a link: `(dollars, kWh)`.
#[inline]
pub fn cd_cost(length: f64, cat: TrafficCategory, p: &EnergyParams) -> (f64, f64) {
    let kwh = kwh_needed(length, cat, p);
    (p.c_ele * kwh, kwh)
}

/// Cost when `energy` kWh is spent first and the rest of the link is driven
/// on gas. Equals [`cs_cost`] at zero energy and the CD cost at
/// `energy == kwh_needed`.
#[inline]
pub fn mixed_cost(length: f64, cat: TrafficCategory, energy: f64, p: &EnergyParams) -> f64 {
    p.c_ele * energy + p.c_gas * (length - p.mu_cd[cat] * energy) / p.mu_cs[cat]
}

/// Charge-depleting-first cost of one link given the residual battery
/// energy on entry: `(dollars, residual on exit)`. The residual is clipped
/// at zero once the battery runs out part-way.
pub fn cdf_link_cost(length: f64, cat: TrafficCategory, residual: f64, p: &EnergyParams) -> Result<(f64, f64)> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(residual >= 0.0) {
        return Err(Error::Domain(format!(
            "residual energy must be non-negative, got {residual}"
        )));
    }
    Ok(cdf_step(length, cat, residual, p))
}

#[inline]
pub(crate) fn cdf_step(length: f64, cat: TrafficCategory, residual: f64, p: &EnergyParams) -> (f64, f64) {
    let need = kwh_needed(length, cat, p);
    if residual >= need {
        (p.c_ele * need, residual - need)
    } else if residual <= 0.0 {
        (cs_cost(length, cat, p), 0.0)
    } else {
        (mixed_cost(length, cat, residual, p), 0.0)
    }
}

/// Dollars saved per kWh spent in CD mode instead of driving on gas.
/// Negative when electricity is the dearer fuel for that category.
#[inline]
pub fn savings_rate(cat: TrafficCategory, p: &EnergyParams) -> f64 {
    p.mu_cd[cat] * p.c_gas / p.mu_cs[cat] - p.c_ele
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub gas_dollars: f64,
    pub electricity_dollars: f64,
    pub kwh_used: f64,
    pub gallons_used: f64,
    pub total_dollars: f64,
}

/// Checks that consecutive links share endpoints.
pub fn check_contiguous(net: &Network, path: &[LinkId]) -> Result<()> {
    for (i, w) in path.windows(2).enumerate() {
        if net.link(w[0]).to != net.link(w[1]).from {
            return Err(Error::DiscontiguousPath(i));
        }
    }
    Ok(())
}

/// Cost of driving `path` with CD fraction `y[i]` on link `i`.
pub fn evaluate_route(net: &Network, path: &[LinkId], y: &[f64], p: &EnergyParams) -> Result<CostBreakdown> {
    if path.len() != y.len() {
        return Err(Error::LengthMismatch {
            links: path.len(),
            fractions: y.len(),
        });
    }
    if path.iter().any(|l| l.index() >= net.link_count()) {
        return Err(Error::Domain("path references a link outside the network".into()));
    }
    check_contiguous(net, path)?;
    if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(Error::Domain(format!("CD fraction {v} at position {i} outside [0, 1]")));
    }
    Ok(breakdown(net, path, y, p))
}

pub(crate) fn breakdown(net: &Network, path: &[LinkId], y: &[f64], p: &EnergyParams) -> CostBreakdown {
    let mut kwh = 0.0;
    let mut gallons = 0.0;
    for (&l, &frac) in path.iter().zip(y) {
        let (d, cat) = (net.length(l), net.category(l));
        kwh += frac * d / p.mu_cd[cat];
        gallons += (1.0 - frac) * d / p.mu_cs[cat];
    }
    let gas = p.c_gas * gallons;
    let ele = p.c_ele * kwh;
    CostBreakdown {
        gas_dollars: gas,
        electricity_dollars: ele,
        kwh_used: kwh,
        gallons_used: gallons,
        total_dollars: gas + ele,
    }
}

/// CD fractions produced by the charge-depleting-first policy along `path`.
pub fn cdf_fractions(net: &Network, path: &[LinkId], budget: f64, p: &EnergyParams) -> Vec<f64> {
    let mut residual = budget.max(0.0);
    path.iter()
        .map(|&l| {
            let need = kwh_needed(net.length(l), net.category(l), p);
            if residual >= need {
                residual -= need;
                1.0
            } else {
                let y = residual / need;
                residual = 0.0;
                y
            }
        })
        .collect()
}

/// Total charge-depleting-first cost of `path`, threading residual energy
/// link by link.
pub fn cdf_path_cost(net: &Network, path: &[LinkId], budget: f64, p: &EnergyParams) -> f64 {
    let mut residual = budget.max(0.0);
    let mut total = 0.0;
    for &l in path {
        let (c, r) = cdf_step(net.length(l), net.category(l), residual, p);
        total += c;
        residual = r;
    }
    total
}
