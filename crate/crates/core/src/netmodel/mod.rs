//! Directed road graph, congestion categories and synthetic networks.

mod synthetic;

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

pub use synthetic::{generate_synthetic, GraphKind, SyntheticConfig};

/// Dense node index, `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense link index, `0..link_count`, in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

impl LinkId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Congestion level of a link, each mapped to a standard drive cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficCategory {
    /// Heavy congestion, NYC cycle.
    High,
    /// UDDS cycle.
    Medium,
    /// Free-flowing, HWFET cycle.
    Low,
}

impl TrafficCategory {
    pub const ALL: [TrafficCategory; 3] = [Self::High, Self::Medium, Self::Low];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Self::High => 0,
            Self::Medium => 1,
            Self::Low => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::High => "high",
            Self::Medium => "medium",
            Self::Low => "low",
        }
    }

    pub fn drive_cycle(self) -> &'static str {
        match self {
            Self::High => "NYC",
            Self::Medium => "UDDS",
            Self::Low => "HWFET",
        }
    }
}

impl fmt::Display for TrafficCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Speed factor at or below which a link counts as heavily congested.
pub const HIGH_TRAFFIC_MAX_SPEED_FACTOR: f64 = 0.5;
/// Speed factor at or above which a link counts as free-flowing.
pub const LOW_TRAFFIC_MIN_SPEED_FACTOR: f64 = 0.75;

/// Classifies a link by its speed factor `avg_speed / free_flow`.
///
/// Both thresholds are inclusive on the side listed first: a factor of
/// exactly 0.5 is `High`, exactly 0.75 is `Low`.
pub fn categorize_link(avg_speed: f64, free_flow: f64) -> Result<TrafficCategory> {
    if !(free_flow > 0.0 && free_flow.is_finite()) {
        return Err(Error::Domain(format!(
            "free-flow speed must be positive, got {free_flow}"
        )));
    }
    if !(avg_speed > 0.0 && avg_speed.is_finite()) {
        return Err(Error::Domain(format!(
            "average speed must be positive, got {avg_speed}"
        )));
    }
    let factor = avg_speed / free_flow;
    Ok(if factor <= HIGH_TRAFFIC_MAX_SPEED_FACTOR {
        TrafficCategory::High
    } else if factor < LOW_TRAFFIC_MIN_SPEED_FACTOR {
        TrafficCategory::Medium
    } else {
        TrafficCategory::Low
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Identifier used by the source file; equals the dense index for
    /// generated networks.
    pub external_id: i64,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    /// Miles.
    pub length: f64,
    /// Miles per hour.
    pub free_flow_speed: f64,
    /// Average speed per time slot in mph, already clamped to the free-flow
    /// speed.
    pub avg_speeds: Vec<f64>,
    pub external_id: Option<u64>,
}

/// Emitted when an input average speed exceeds the link's free-flow speed.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampWarning {
    pub link: LinkId,
    pub slot: usize,
    pub original: f64,
    pub clamped: f64,
}

impl fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "link {} slot {}: average speed {} mph exceeds free-flow speed, clamped to {}",
            self.link, self.slot, self.original, self.clamped
        )
    }
}

/// Immutable directed road network with every link categorized for one
/// active time slot.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    links: Vec<Link>,
    slot_count: usize,
    slot: usize,
    categories: Vec<TrafficCategory>,
    out_offsets: Vec<u32>,
    out_links: Vec<LinkId>,
    in_offsets: Vec<u32>,
    in_links: Vec<LinkId>,
    warnings: Vec<ClampWarning>,
}

impl Network {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    /// The time slot every link is categorized for.
    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    #[inline]
    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.index()]
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> + '_ {
        (0..self.links.len() as u32).map(LinkId)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.nodes.len()
    }

    #[inline]
    pub fn category(&self, id: LinkId) -> TrafficCategory {
        self.categories[id.index()]
    }

    #[inline]
    pub fn length(&self, id: LinkId) -> f64 {
        self.links[id.index()].length
    }

    /// Average speed on the active slot, mph.
    #[inline]
    pub fn speed(&self, id: LinkId) -> f64 {
        self.links[id.index()].avg_speeds[self.slot]
    }

    /// Travel time on the active slot, hours.
    #[inline]
    pub fn travel_time(&self, id: LinkId) -> f64 {
        let link = &self.links[id.index()];
        link.length / link.avg_speeds[self.slot]
    }

    /// Links leaving `node`, in insertion order.
    #[inline]
    pub fn outgoing(&self, node: NodeId) -> &[LinkId] {
        let i = node.index();
        &self.out_links[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    /// Links entering `node`, in insertion order.
    #[inline]
    pub fn incoming(&self, node: NodeId) -> &[LinkId] {
        let i = node.index();
        &self.in_links[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    /// Clamping notices collected while building.
    pub fn warnings(&self) -> &[ClampWarning] {
        &self.warnings
    }

    /// Returns a copy of this network categorized for another time slot.
    pub fn for_slot(&self, slot: usize) -> Result<Network> {
        if slot >= self.slot_count {
            return Err(Error::SlotOutOfRange {
                slot,
                count: self.slot_count,
            });
        }
        let mut net = self.clone();
        net.slot = slot;
        net.categories = categorize_all(&net.links, slot)?;
        Ok(net)
    }

    /// Nodes reachable from `start`, following links forward or backward.
    pub fn reachable(&self, start: NodeId, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        seen[start.index()] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let (links, next): (&[LinkId], fn(&Link) -> NodeId) = if forward {
                (self.outgoing(u), |l| l.to)
            } else {
                (self.incoming(u), |l| l.from)
            };
            for &l in links {
                let v = next(self.link(l));
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// True when every node reaches every other node.
    pub fn is_strongly_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let start = NodeId(0);
        self.reachable(start, true).iter().all(|&s| s) && self.reachable(start, false).iter().all(|&s| s)
    }
}

fn categorize_all(links: &[Link], slot: usize) -> Result<Vec<TrafficCategory>> {
    links
        .iter()
        .map(|l| categorize_link(l.avg_speeds[slot], l.free_flow_speed))
        .collect()
}

/// Input description of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub from: NodeId,
    pub to: NodeId,
    pub length: f64,
    pub free_flow_speed: f64,
    pub avg_speeds: Vec<f64>,
    pub external_id: Option<u64>,
}

/// Accumulates nodes and links, validating them once in [`build`].
///
/// [`build`]: NetworkBuilder::build
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    slot_count: usize,
    nodes: Vec<Node>,
    links: Vec<LinkSpec>,
}

impl NetworkBuilder {
    pub fn new(slot_count: usize) -> Self {
        Self {
            slot_count,
            nodes: Vec::new(),
            links: Vec::new(),
        }
    }

    pub fn with_capacity(slot_count: usize, nodes: usize, links: usize) -> Self {
        Self {
            slot_count,
            nodes: Vec::with_capacity(nodes),
            links: Vec::with_capacity(links),
        }
    }

    pub fn add_node(&mut self, external_id: i64, lat: Option<f64>, lon: Option<f64>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { external_id, lat, lon });
        id
    }

    /// Adds `count` nodes whose external ids equal their dense index.
    pub fn add_nodes(&mut self, count: usize) {
        for _ in 0..count {
            let id = self.nodes.len() as i64;
            self.add_node(id, None, None);
        }
    }

    pub fn add_link(&mut self, spec: LinkSpec) -> LinkId {
        let id = LinkId(self.links.len() as u32);
        self.links.push(spec);
        id
    }

    /// Convenience for single-slot networks.
    pub fn add_simple_link(&mut self, from: u32, to: u32, length: f64, free_flow_speed: f64, avg_speed: f64) -> LinkId {
        self.add_link(LinkSpec {
            from: NodeId(from),
            to: NodeId(to),
            length,
            free_flow_speed,
            avg_speeds: vec![avg_speed; self.slot_count.max(1)],
            external_id: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Validates the input and categorizes every link for `slot`.
    pub fn build(self, slot: usize) -> Result<Network> {
        if self.nodes.is_empty() || self.links.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        if slot >= self.slot_count {
            return Err(Error::SlotOutOfRange {
                slot,
                count: self.slot_count,
            });
        }
        let n = self.nodes.len();
        let mut warnings = Vec::new();
        let mut seen_ids = BTreeSet::new();
        let mut links = Vec::with_capacity(self.links.len());
        for (index, spec) in self.links.into_iter().enumerate() {
            let invalid = |reason: alloc::string::String| Error::InvalidLink { index, reason };
            if spec.from.index() >= n {
                return Err(Error::UnknownNode(spec.from));
            }
            if spec.to.index() >= n {
                return Err(Error::UnknownNode(spec.to));
            }
            if spec.from == spec.to {
                return Err(invalid(format!("self-loop at node {}", spec.from)));
            }
            if !(spec.length > 0.0 && spec.length.is_finite()) {
                return Err(invalid(format!("length must be positive, got {}", spec.length)));
            }
            if !(spec.free_flow_speed > 0.0 && spec.free_flow_speed.is_finite()) {
                return Err(invalid(format!(
                    "free-flow speed must be positive, got {}",
                    spec.free_flow_speed
                )));
            }
            if spec.avg_speeds.len() != self.slot_count {
                return Err(invalid(format!(
                    "expected {} average speeds, got {}",
                    self.slot_count,
                    spec.avg_speeds.len()
                )));
            }
            if let Some(id) = spec.external_id {
                if !seen_ids.insert((spec.from, spec.to, id)) {
                    return Err(Error::DuplicateLink {
                        from: spec.from,
                        to: spec.to,
                        id,
                    });
                }
            }
            let mut avg_speeds = spec.avg_speeds;
            for (s, v) in avg_speeds.iter_mut().enumerate() {
                if !(*v > 0.0 && v.is_finite()) {
                    return Err(invalid(format!("average speed in slot {s} must be positive, got {v}")));
                }
                if *v > spec.free_flow_speed {
                    warnings.push(ClampWarning {
                        link: LinkId(index as u32),
                        slot: s,
                        original: *v,
                        clamped: spec.free_flow_speed,
                    });
                    *v = spec.free_flow_speed;
                }
            }
            links.push(Link {
                from: spec.from,
                to: spec.to,
                length: spec.length,
                free_flow_speed: spec.free_flow_speed,
                avg_speeds,
                external_id: spec.external_id,
            });
        }

        let categories = categorize_all(&links, slot)?;
        let (out_offsets, out_links) = csr(n, &links, |l| l.from);
        let (in_offsets, in_links) = csr(n, &links, |l| l.to);
        Ok(Network {
            nodes: self.nodes,
            links,
            slot_count: self.slot_count,
            slot,
            categories,
            out_offsets,
            out_links,
            in_offsets,
            in_links,
            warnings,
        })
    }
}

fn csr(n: usize, links: &[Link], key: impl Fn(&Link) -> NodeId) -> (Vec<u32>, Vec<LinkId>) {
    let mut offsets = vec![0u32; n + 1];
    for l in links {
        offsets[key(l).index() + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut out = vec![LinkId(0); links.len()];
    for (i, l) in links.iter().enumerate() {
        let slot = &mut fill[key(l).index()];
        out[*slot as usize] = LinkId(i as u32);
        *slot += 1;
    }
    (offsets, out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use TrafficCategory::*;

    #[test]
    fn categorize_boundaries() {
        assert_eq!(categorize_link(20.0, 40.0).unwrap(), High);
        assert_eq!(categorize_link(30.0, 40.0).unwrap(), Low);
        assert_eq!(categorize_link(26.0, 40.0).unwrap(), Medium);
        assert_eq!(categorize_link(40.0, 40.0).unwrap(), Low);
        assert_eq!(categorize_link(1.0, 40.0).unwrap(), High);
    }

    #[test]
    fn categorize_rejects_non_positive() {
        assert!(matches!(categorize_link(0.0, 40.0), Err(Error::Domain(_))));
        assert!(matches!(categorize_link(10.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(categorize_link(-3.0, 40.0), Err(Error::Domain(_))));
        assert!(matches!(categorize_link(f64::NAN, 40.0), Err(Error::Domain(_))));
    }

    #[test]
    fn smallest_network() {
        let mut b = NetworkBuilder::new(1);
        b.add_nodes(2);
        b.add_simple_link(0, 1, 1.0, 40.0, 35.0);
        let net = b.build(0).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.link_count(), 1);
        assert_eq!(net.outgoing(NodeId(0)), &[LinkId(0)]);
        assert_eq!(net.incoming(NodeId(1)), &[LinkId(0)]);
        assert!(net.outgoing(NodeId(1)).is_empty());
    }

    #[test]
    fn clamps_speed_above_free_flow() {
        let mut b = NetworkBuilder::new(1);
        b.add_nodes(2);
        b.add_simple_link(0, 1, 1.0, 40.0, 50.0);
        let net = b.build(0).unwrap();
        assert_eq!(net.speed(LinkId(0)), 40.0);
        assert_eq!(net.warnings().len(), 1);
        assert_eq!(net.warnings()[0].original, 50.0);
        assert_eq!(net.category(LinkId(0)), Low);
    }

    #[test]
    fn diamond_categories() {
        let net = fixtures::diamond();
        assert_eq!(net.link_count(), 4);
        let cats: Vec<_> = net.link_ids().map(|l| net.category(l)).collect();
        assert_eq!(cats, vec![Low, Low, High, High]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(NetworkBuilder::new(1).build(0).unwrap_err(), Error::EmptyNetwork);

        let mut b = NetworkBuilder::new(2);
        b.add_nodes(2);
        b.add_simple_link(0, 1, 1.0, 40.0, 30.0);
        assert_eq!(b.build(2).unwrap_err(), Error::SlotOutOfRange { slot: 2, count: 2 });

        let mut b = NetworkBuilder::new(1);
        b.add_nodes(2);
        b.add_simple_link(0, 0, 1.0, 40.0, 30.0);
        assert!(matches!(b.build(0), Err(Error::InvalidLink { index: 0, .. })));

        let mut b = NetworkBuilder::new(1);
        b.add_nodes(2);
        b.add_simple_link(0, 1, 0.0, 40.0, 30.0);
        assert!(matches!(b.build(0), Err(Error::InvalidLink { .. })));

        let mut b = NetworkBuilder::new(1);
        b.add_nodes(2);
        b.add_simple_link(0, 5, 1.0, 40.0, 30.0);
        assert_eq!(b.build(0).unwrap_err(), Error::UnknownNode(NodeId(5)));
    }

    #[test]
    fn rejects_duplicate_link_triples() {
        let mut b = NetworkBuilder::new(1);
        b.add_nodes(2);
        for _ in 0..2 {
            b.add_link(LinkSpec {
                from: NodeId(0),
                to: NodeId(1),
                length: 1.0,
                free_flow_speed: 40.0,
                avg_speeds: vec![30.0],
                external_id: Some(7),
            });
        }
        assert!(matches!(b.build(0), Err(Error::DuplicateLink { id: 7, .. })));
    }

    #[test]
    fn recategorize_per_slot() {
        let mut b = NetworkBuilder::new(2);
        b.add_nodes(2);
        b.add_link(LinkSpec {
            from: NodeId(0),
            to: NodeId(1),
            length: 1.0,
            free_flow_speed: 40.0,
            avg_speeds: vec![10.0, 38.0],
            external_id: None,
        });
        let net = b.build(0).unwrap();
        assert_eq!(net.category(LinkId(0)), High);
        let later = net.for_slot(1).unwrap();
        assert_eq!(later.category(LinkId(0)), Low);
        assert_eq!(later.for_slot(0).unwrap().category(LinkId(0)), High);
        assert!(net.for_slot(2).is_err());
    }

    #[test]
    fn strong_connectivity() {
        let net = fixtures::diamond();
        assert!(!net.is_strongly_connected());
        let mut b = NetworkBuilder::new(1);
        b.add_nodes(3);
        b.add_simple_link(0, 1, 1.0, 40.0, 30.0);
        b.add_simple_link(1, 2, 1.0, 40.0, 30.0);
        b.add_simple_link(2, 0, 1.0, 40.0, 30.0);
        assert!(b.build(0).unwrap().is_strongly_connected());
    }
}
