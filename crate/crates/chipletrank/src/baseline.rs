//! The comparison ordering: chiplets sorted by importance times area.

use crate::system::{ChipletSystem, PlacementOrder};

/// How chiplet importance is measured for the baseline ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Importance {
    /// Damped PageRank on the wire-weighted chiplet graph.
    #[default]
    PageRank,
    /// Weighted degree share, for sensitivity checks.
    Degree,
}

impl std::str::FromStr for Importance {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "pagerank" => Ok(Importance::PageRank),
            "degree" => Ok(Importance::Degree),
            other => Err(crate::error::Error::Usage(format!(
                "unknown importance mode {other:?}"
            ))),
        }
    }
}

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOLERANCE: f64 = 1e-9;
const PAGERANK_MAX_ITERS: usize = 100_000;

/// PageRank over the undirected wire-weighted chiplet graph.
///
/// Transition mass leaves each node proportionally to edge wire counts;
/// nodes without edges spread their mass uniformly, so isolated chiplets
/// still receive the teleport share.
pub fn pagerank(system: &ChipletSystem) -> Vec<f64> {
    let n = system.chiplet_count();
    let mut out_weight = vec![0.0f64; n];
    for net in &system.nets {
        out_weight[net.a] += net.wires as f64;
        out_weight[net.b] += net.wires as f64;
    }
    let d = PAGERANK_DAMPING;
    let teleport = (1.0 - d) / n as f64;
    let mut pr = vec![1.0 / n as f64; n];
    let mut next = vec![0.0f64; n];
    for _ in 0..PAGERANK_MAX_ITERS {
        let dangling: f64 = (0..n)
            .filter(|&v| out_weight[v] == 0.0)
            .map(|v| pr[v])
            .sum();
        next.fill(teleport + d * dangling / n as f64);
        for net in &system.nets {
            let w = net.wires as f64;
            next[net.b] += d * pr[net.a] * w / out_weight[net.a];
            next[net.a] += d * pr[net.b] * w / out_weight[net.b];
        }
        let diff: f64 = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pr, &mut next);
        if diff < PAGERANK_TOLERANCE {
            break;
        }
    }
    pr
}

/// Weighted-degree importance: each chiplet's share of total incident wires.
pub fn degree_importance(system: &ChipletSystem) -> Vec<f64> {
    let n = system.chiplet_count();
    let mut w = vec![0.0f64; n];
    for net in &system.nets {
        w[net.a] += net.wires as f64;
        w[net.b] += net.wires as f64;
    }
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return vec![1.0 / n as f64; n];
    }
    w.iter().map(|x| x / total).collect()
}

/// The baseline placement order: descending importance times chiplet area,
/// ties broken by ascending chiplet index.
pub fn baseline_order(system: &ChipletSystem, importance: Importance) -> PlacementOrder {
    let scores = match importance {
        Importance::PageRank => pagerank(system),
        Importance::Degree => degree_importance(system),
    };
    let mut keyed: Vec<(f64, usize)> = scores
        .iter()
        .enumerate()
        .map(|(i, &pr)| (pr * system.chiplets[i].area_mm2(), i))
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    PlacementOrder(keyed.into_iter().map(|(_, i)| i).collect())
}
