use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{unwind, Algorithm, Query, RouteSolution};
use crate::energy::EnergyParams;
use crate::error::Result;
use crate::netmodel::{LinkId, Network, NodeId};

/// Min-heap entry: smallest key first, then lowest node id, then the
/// earliest-created label.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HeapEntry {
    pub key: f64,
    pub node: u32,
    pub label: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.node.cmp(&self.node))
            .then_with(|| other.label.cmp(&self.label))
    }
}

/// Plain Dijkstra from `origin` to `destination` under a static link weight.
/// Predecessors change only on strict improvement.
pub(crate) fn shortest_path(
    net: &Network,
    origin: NodeId,
    destination: NodeId,
    weight: impl Fn(LinkId) -> f64,
) -> Option<(f64, Vec<LinkId>)> {
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<LinkId>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[origin.index()] = 0.0;
    heap.push(HeapEntry {
        key: 0.0,
        node: origin.0,
        label: 0,
    });
    while let Some(HeapEntry { key, node, .. }) = heap.pop() {
        if key > dist[node as usize] {
            continue;
        }
        if node == destination.0 {
            let path = unwind(node, |u| pred[u as usize].map(|l| (net.link(l).from.0, l)));
            return Some((key, path));
        }
        for &l in net.outgoing(NodeId(node)) {
            let v = net.link(l).to.index();
            let alt = key + weight(l);
            if alt < dist[v] {
                dist[v] = alt;
                pred[v] = Some(l);
                heap.push(HeapEntry {
                    key: alt,
                    node: v as u32,
                    label: 0,
                });
            }
        }
    }
    None
}

/// Distance from every node to `destination` under a static link weight,
/// with the first link of a shortest path.
pub(crate) fn distances_to(
    net: &Network,
    destination: NodeId,
    weight: impl Fn(LinkId) -> f64,
) -> (Vec<f64>, Vec<Option<LinkId>>) {
    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut next: Vec<Option<LinkId>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[destination.index()] = 0.0;
    heap.push(HeapEntry {
        key: 0.0,
        node: destination.0,
        label: 0,
    });
    while let Some(HeapEntry { key, node, .. }) = heap.pop() {
        if key > dist[node as usize] {
            continue;
        }
        for &l in net.incoming(NodeId(node)) {
            let u = net.link(l).from.index();
            let alt = key + weight(l);
            if alt < dist[u] {
                dist[u] = alt;
                next[u] = Some(l);
                heap.push(HeapEntry {
                    key: alt,
                    node: u as u32,
                    label: 0,
                });
            }
        }
    }
    (dist, next)
}

/// Minimum travel time route; CD fractions follow the charge-depleting-first
/// policy along it.
pub fn fastest_route(net: &Network, p: &EnergyParams, q: &Query) -> Result<RouteSolution> {
    q.validate(net)?;
    let (time, path) =
        shortest_path(net, q.origin, q.destination, |l| net.travel_time(l)).ok_or_else(|| q.no_route())?;
    let mut sol = RouteSolution::with_cdf_policy(net, p, Algorithm::Fastest, q, path);
    sol.objective = time;
    Ok(sol)
}
