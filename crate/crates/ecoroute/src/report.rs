use ecoroute_core::{Network, Query, RouteSolution};
use serde::Serialize;
use serde_json::{json, Value};

/// Rounds to 9 significant digits so printed output does not depend on
/// the last bits of floating-point summation order.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownReport {
    pub gas_dollars: f64,
    pub electricity_dollars: f64,
    pub kwh_used: f64,
    pub gallons_used: f64,
    pub total_dollars: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    pub algorithm: String,
    pub origin: i64,
    pub destination: i64,
    pub budget_kwh: f64,
    pub slot: usize,
    /// External node ids along the route.
    pub nodes: Vec<i64>,
    /// Link indices in file order.
    pub links: Vec<u32>,
    pub y: Vec<f64>,
    pub breakdown: BreakdownReport,
    pub travel_time_h: f64,
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SolutionReport {
    pub fn new(net: &Network, q: &Query, sol: &RouteSolution, timed: bool) -> Self {
        let b = &sol.breakdown;
        Self {
            algorithm: sol.algorithm.as_str().to_owned(),
            origin: net.node(q.origin).external_id,
            destination: net.node(q.destination).external_id,
            budget_kwh: q.budget_kwh,
            slot: q.slot,
            nodes: sol.node_path.iter().map(|&n| net.node(n).external_id).collect(),
            links: sol.link_path.iter().map(|l| l.0).collect(),
            y: sol.y.iter().map(|&v| sig9(v)).collect(),
            breakdown: BreakdownReport {
                gas_dollars: sig9(b.gas_dollars),
                electricity_dollars: sig9(b.electricity_dollars),
                kwh_used: sig9(b.kwh_used),
                gallons_used: sig9(b.gallons_used),
                total_dollars: sig9(b.total_dollars),
            },
            travel_time_h: sig9(sol.travel_time),
            objective: sig9(sol.objective),
            wall_time_s: timed.then(|| sig9(sol.wall_time)),
        }
    }
}

/// A LineString of the route, or a Point for an empty one. `None` when any
/// node on the route lacks coordinates.
pub fn route_geojson(net: &Network, sol: &RouteSolution) -> Option<Value> {
    let coords: Option<Vec<[f64; 2]>> = sol
        .node_path
        .iter()
        .map(|&n| {
            let node = net.node(n);
            Some([node.lon?, node.lat?])
        })
        .collect();
    let coords = coords?;
    let geometry = if coords.len() >= 2 {
        json!({ "type": "LineString", "coordinates": coords })
    } else {
        json!({ "type": "Point", "coordinates": coords.first()? })
    };
    Some(json!({
        "type": "FeatureCollection",
        "features": [{
            "type": "Feature",
            "geometry": geometry,
            "properties": {
                "algorithm": sol.algorithm.as_str(),
                "total_dollars": sig9(sol.breakdown.total_dollars),
                "kwh_used": sig9(sol.breakdown.kwh_used),
                "travel_time_h": sig9(sol.travel_time),
            }
        }]
    }))
}
