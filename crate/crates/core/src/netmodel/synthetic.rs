use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinkSpec, Network, NetworkBuilder, NodeId, TrafficCategory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Nodes on a row-major lattice; links only between lattice neighbours.
    Grid,
    /// Uniformly random ordered pairs on top of a Hamiltonian cycle.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub kind: GraphKind,
    pub nodes: usize,
    /// Mean total degree (in + out); the target link count is
    /// `nodes * avg_degree / 2`.
    pub avg_degree: f64,
    /// Probability of each category, ordered high, medium, low.
    pub category_mix: [f64; 3],
    pub seed: u64,
    pub slots: usize,
}

impl SyntheticConfig {
    pub fn new(kind: GraphKind, nodes: usize, avg_degree: f64, category_mix: [f64; 3], seed: u64) -> Self {
        Self {
            kind,
            nodes,
            avg_degree,
            category_mix,
            seed,
            slots: 1,
        }
    }

    pub fn target_links(&self) -> usize {
        let exact = self.nodes as f64 * self.avg_degree / 2.0;
        (exact + 0.5) as usize
    }
}

const LENGTH_RANGE: (f64, f64) = (0.1, 2.0);
const FREE_FLOW_CHOICES: [f64; 6] = [25.0, 30.0, 35.0, 45.0, 55.0, 65.0];

/// Speed-factor band drawn for each category, kept clear of the
/// classification thresholds.
fn speed_factor_band(cat: TrafficCategory) -> (f64, f64) {
    match cat {
        TrafficCategory::High => (0.25, 0.45),
        TrafficCategory::Medium => (0.55, 0.70),
        TrafficCategory::Low => (0.80, 1.0),
    }
}

fn truncate(x: f64, step: f64) -> f64 {
    ((x / step) as i64) as f64 * step
}

/// Builds a strongly connected synthetic network, deterministic in `seed`.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Network> {
    if cfg.nodes < 2 {
        return Err(Error::Parameter(format!("need at least 2 nodes, got {}", cfg.nodes)));
    }
    if cfg.nodes > u32::MAX as usize / 2 {
        return Err(Error::Parameter(format!("too many nodes: {}", cfg.nodes)));
    }
    if cfg.slots == 0 {
        return Err(Error::Parameter("need at least one time slot".into()));
    }
    if cfg.category_mix.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Parameter("category probabilities must be non-negative".into()));
    }
    let total: f64 = cfg.category_mix.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "category probabilities must sum to 1, got {total}"
        )));
    }
    if !(cfg.avg_degree > 0.0 && cfg.avg_degree.is_finite()) {
        return Err(Error::Parameter(format!(
            "average degree must be positive, got {}",
            cfg.avg_degree
        )));
    }

    let n = cfg.nodes;
    let target = cfg.target_links();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (pairs, coords) = match cfg.kind {
        GraphKind::Random => random_topology(n, target, &mut rng)?,
        GraphKind::Grid => grid_topology(n, target, &mut rng)?,
    };

    let mut builder = NetworkBuilder::with_capacity(cfg.slots, n, pairs.len());
    for (i, (lat, lon)) in coords.into_iter().enumerate() {
        builder.add_node(i as i64, Some(lat), Some(lon));
    }
    for (from, to) in pairs {
        let length = truncate(rng.random_range(LENGTH_RANGE.0..=LENGTH_RANGE.1), 1e-3).max(LENGTH_RANGE.0);
        let free_flow = FREE_FLOW_CHOICES[rng.random_range(0..FREE_FLOW_CHOICES.len())];
        let avg_speeds = (0..cfg.slots)
            .map(|_| {
                let cat = draw_category(&cfg.category_mix, &mut rng);
                let (lo, hi) = speed_factor_band(cat);
                truncate(rng.random_range(lo..=hi) * free_flow, 1e-2)
            })
            .collect();
        builder.add_link(LinkSpec {
            from: NodeId(from),
            to: NodeId(to),
            length,
            free_flow_speed: free_flow,
            avg_speeds,
            external_id: None,
        });
    }
    builder.build(0)
}

fn draw_category(mix: &[f64; 3], rng: &mut ChaCha8Rng) -> TrafficCategory {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (cat, p) in TrafficCategory::ALL.into_iter().zip(mix) {
        acc += p;
        if *p > 0.0 && u < acc {
            return cat;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    TrafficCategory::ALL
        .into_iter()
        .zip(mix)
        .rev()
        .find(|(_, p)| **p > 0.0)
        .map(|(c, _)| c)
        .unwrap_or(TrafficCategory::Low)
}

type Topology = (Vec<(u32, u32)>, Vec<(f64, f64)>);

fn random_topology(n: usize, target: usize, rng: &mut ChaCha8Rng) -> Result<Topology> {
    let max_links = n * (n - 1);
    if target < n || target > max_links {
        return Err(Error::Parameter(format!(
            "random graph on {n} nodes needs between {n} and {max_links} links, average degree asks for {target}"
        )));
    }
    let coords = (0..n)
        .map(|_| (rng.random_range(42.20..42.50), rng.random_range(-71.30..-70.90)))
        .collect();

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut pairs = Vec::with_capacity(target);
    let mut present = BTreeSet::new();
    for i in 0..n {
        let pair = (order[i], order[(i + 1) % n]);
        present.insert(pair);
        pairs.push(pair);
    }

    if target - n > max_links / 2 {
        let mut rest: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|u| (0..n as u32).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v && !present.contains(&(u, v)))
            .collect();
        rest.shuffle(rng);
        pairs.extend(rest.into_iter().take(target - n));
    } else {
        while pairs.len() < target {
            let u = rng.random_range(0..n as u32);
            let v = rng.random_range(0..n as u32);
            if u != v && present.insert((u, v)) {
                pairs.push((u, v));
            }
        }
    }
    Ok((pairs, coords))
}

fn grid_topology(n: usize, target: usize, rng: &mut ChaCha8Rng) -> Result<Topology> {
    let mut cols = 1;
    while cols * cols < n {
        cols += 1;
    }
    let mut lattice = Vec::new();
    for i in 0..n {
        if (i + 1) % cols != 0 && i + 1 < n {
            lattice.push((i as u32, (i + 1) as u32));
        }
        if i + cols < n {
            lattice.push((i as u32, (i + cols) as u32));
        }
    }
    let max_links = 2 * lattice.len();
    if target < n || target > max_links {
        return Err(Error::Parameter(format!(
            "grid on {n} nodes needs between {n} and {max_links} links, average degree asks for {target}"
        )));
    }
    let coords = (0..n)
        .map(|i| (42.30 + (i / cols) as f64 * 0.01, -71.10 + (i % cols) as f64 * 0.01))
        .collect();

    // random spanning tree of the lattice, each edge in a random direction
    let mut shuffled = lattice.clone();
    shuffled.shuffle(rng);
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut pairs = Vec::with_capacity(target);
    let mut present = BTreeSet::new();
    let mut spare = Vec::new();
    for &(u, v) in &shuffled {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru as usize] = rv;
            let pair = if rng.random_bool(0.5) { (u, v) } else { (v, u) };
            present.insert(pair);
            pairs.push(pair);
            spare.push((pair.1, pair.0));
        } else {
            spare.push((u, v));
            spare.push((v, u));
        }
    }
    spare.shuffle(rng);
    for pair in spare {
        if pairs.len() >= target {
            break;
        }
        if present.insert(pair) {
            pairs.push(pair);
        }
    }
    add_back_edges(n, &mut pairs, &mut present);
    Ok((pairs, coords))
}

/// Adds the reverse of every link that joins two different strongly
/// connected components. On a weakly connected graph one pass suffices.
fn add_back_edges(n: usize, pairs: &mut Vec<(u32, u32)>, present: &mut BTreeSet<(u32, u32)>) {
    loop {
        let comp = strongly_connected_components(n, pairs);
        let mut added = false;
        for i in 0..pairs.len() {
            let (u, v) = pairs[i];
            if comp[u as usize] != comp[v as usize] && present.insert((v, u)) {
                pairs.push((v, u));
                added = true;
            }
        }
        if !added {
            break;
        }
    }
}

/// Kosaraju with explicit stacks; returns a component label per node.
fn strongly_connected_components(n: usize, pairs: &[(u32, u32)]) -> Vec<u32> {
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for &(u, v) in pairs {
        fwd[u as usize].push(v);
        rev[v as usize].push(u);
    }
    let mut visited = vec![false; n];
    let mut finish = Vec::with_capacity(n);
    for s in 0..n {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut stack = vec![(s as u32, 0usize)];
        while let Some((u, i)) = stack.last_mut() {
            let adj = &fwd[*u as usize];
            if *i < adj.len() {
                let v = adj[*i];
                *i += 1;
                if !visited[v as usize] {
                    visited[v as usize] = true;
                    stack.push((v, 0));
                }
            } else {
                finish.push(*u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![u32::MAX; n];
    let mut label = 0;
    for &s in finish.iter().rev() {
        if comp[s as usize] != u32::MAX {
            continue;
        }
        comp[s as usize] = label;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &rev[u as usize] {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = label;
                    stack.push(v);
                }
            }
        }
        label += 1;
    }
    comp
}
