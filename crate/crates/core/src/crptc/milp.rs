//! Writes the joint routing and control problem as a mixed-integer program
//! in CPLEX LP text format.
//!
//! Per link `i` there is a binary `x_i` (link used), a continuous
//! `y_i` in `[0, 1]` (CD fraction) and `z_i = x_i * y_i`, linearized by
//! `z <= y`, `z >= y - (1 - x)`, `z <= x`, `z >= 0`. The objective is
//! `sum cs_i x_i + (cd_i - cs_i) z_i` and the only resource constraint is
//! `sum kwh_i z_i <= budget`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::energy::{cd_cost, cs_cost, EnergyParams};
use crate::error::{Error, Result};
use crate::netmodel::{LinkId, Network, NodeId};
use crate::routing::Query;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MilpConfig {
    /// Largest number of links exported; each one becomes three variables.
    pub max_links: usize,
}

impl Default for MilpConfig {
    fn default() -> Self {
        Self { max_links: 200_000 }
    }
}

/// Terms per line; keeps every line well under the 255-character limit
/// some readers enforce.
const TERMS_PER_LINE: usize = 6;

pub fn export_milp(net: &Network, p: &EnergyParams, q: &Query, cfg: &MilpConfig) -> Result<String> {
    q.validate(net)?;
    if net.link_count() > cfg.max_links {
        return Err(Error::Capacity {
            what: "links",
            actual: net.link_count(),
            limit: cfg.max_links,
            hint: "export a smaller network",
        });
    }
    if !net.reachable(q.origin, true)[q.destination.index()] {
        return Err(q.no_route());
    }
    let mut out = String::new();
    write_model(&mut out, net, p, q).expect("writing to a String cannot fail");
    Ok(out)
}

fn write_model(out: &mut String, net: &Network, p: &EnergyParams, q: &Query) -> core::fmt::Result {
    writeln!(
        out,
        "\\ origin {} destination {} budget {} kWh",
        q.origin, q.destination, q.budget_kwh
    )?;
    writeln!(out, "Minimize")?;
    let mut objective = Vec::with_capacity(2 * net.link_count());
    for l in net.link_ids() {
        let (d, cat) = (net.length(l), net.category(l));
        let cs = cs_cost(d, cat, p);
        let (cd, _) = cd_cost(d, cat, p);
        objective.push((cs, var('x', l)));
        objective.push((cd - cs, var('z', l)));
    }
    write_expr(out, " obj:", &objective)?;

    writeln!(out, "Subject To")?;
    for n in net.node_ids() {
        let terms: Vec<(f64, String)> = net
            .incoming(n)
            .iter()
            .map(|&l| (1.0, var('x', l)))
            .chain(net.outgoing(n).iter().map(|&l| (-1.0, var('x', l))))
            .collect();
        if terms.is_empty() {
            continue;
        }
        let rhs = indicator(n, q.destination) - indicator(n, q.origin);
        write_expr(out, &alloc::format!(" flow_{n}:"), &terms)?;
        writeln!(out, "   = {rhs}")?;
    }
    let energy: Vec<(f64, String)> = net
        .link_ids()
        .map(|l| (net.length(l) / p.mu_cd[net.category(l)], var('z', l)))
        .collect();
    write_expr(out, " energy:", &energy)?;
    writeln!(out, "   <= {}", q.budget_kwh)?;
    for l in net.link_ids() {
        let i = l.0;
        writeln!(out, " zy_{i}: z_{i} - y_{i} <= 0")?;
        writeln!(out, " zyx_{i}: z_{i} - y_{i} - x_{i} >= -1")?;
        writeln!(out, " zx_{i}: z_{i} - x_{i} <= 0")?;
        writeln!(out, " z0_{i}: z_{i} >= 0")?;
    }

    writeln!(out, "Bounds")?;
    for l in net.link_ids() {
        writeln!(out, " 0 <= y_{} <= 1", l.0)?;
    }
    writeln!(out, "Binary")?;
    for chunk in net.link_ids().collect::<Vec<_>>().chunks(TERMS_PER_LINE * 2) {
        for l in chunk {
            write!(out, " x_{}", l.0)?;
        }
        writeln!(out)?;
    }
    writeln!(out, "End")
}

fn var(prefix: char, l: LinkId) -> String {
    alloc::format!("{prefix}_{}", l.0)
}

fn indicator(n: NodeId, target: NodeId) -> i32 {
    i32::from(n == target)
}

fn write_expr(out: &mut String, name: &str, terms: &[(f64, String)]) -> core::fmt::Result {
    write!(out, "{name}")?;
    for (k, (coef, v)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            write!(out, "\n   ")?;
        }
        let sign = if *coef < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            write!(out, " {} {v}", coef.abs())?;
        } else {
            write!(out, " {sign} {} {v}", coef.abs())?;
        }
    }
    writeln!(out)
}
