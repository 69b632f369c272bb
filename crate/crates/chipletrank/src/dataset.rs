//! Feature graphs and pairwise training data.
//!
//! Each `(system, order)` pair becomes an undirected graph whose nodes carry
//! three static chiplet features and four order-dependent ones. Features are
//! min-max normalized against the training corpus; comparisons are sampled
//! within each system with a per-point budget.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pareto::LabeledScatter;
use crate::system::{validate_order, ChipletSystem, PlacementOrder};

pub const NODE_FEATURE_DIM: usize = 7;

/// Per-node dynamic features for one order: placement step (1-based),
/// remaining-area fraction after the step, cumulative placed power after the
/// step, and the wire weight of nets newly closed at the step.
///
/// Rows are indexed by chiplet, not by step. Everything is computable from
/// the system description alone, so ranking candidates never runs the placer.
pub fn order_features(system: &ChipletSystem, order: &PlacementOrder) -> Result<Vec<[f64; 4]>> {
    validate_order(system, order)?;
    let n = system.chiplet_count();
    let total_area = system.interposer.area_mm2();
    let mut rows = vec![[0.0f64; 4]; n];
    let mut area_used = 0.0;
    let mut power_cum = 0.0;
    let mut placed = vec![false; n];
    for (step, &c) in order.0.iter().enumerate() {
        let chiplet = &system.chiplets[c];
        area_used += chiplet.area_mm2();
        power_cum += chiplet.power_w;
        let closing: u64 = system
            .neighbors(c)
            .filter(|&(u, _)| placed[u])
            .map(|(_, wires)| wires)
            .sum();
        rows[c] = [
            (step + 1) as f64,
            1.0 - area_used / total_area,
            power_cum,
            closing as f64,
        ];
        placed[c] = true;
    }
    Ok(rows)
}

/// An order-specific feature graph with its correlation label.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderGraph {
    pub system_id: String,
    pub order: PlacementOrder,
    pub label: u8,
    /// Row per chiplet: width, length, power, step, area remaining,
    /// cumulative power, closing wire weight.
    pub node_features: Vec<[f64; NODE_FEATURE_DIM]>,
    /// Canonical undirected edges `(a, b, wire weight)` with `a < b`.
    pub edges: Vec<(usize, usize, f64)>,
}

impl OrderGraph {
    pub fn node_count(&self) -> usize {
        self.node_features.len()
    }
}

/// Assemble the feature graph for one `(system, order, label)` triple.
pub fn build_graph(
    system: &ChipletSystem,
    system_id: &str,
    order: &PlacementOrder,
    label: u8,
) -> Result<OrderGraph> {
    let dynamic = order_features(system, order)?;
    let node_features = system
        .chiplets
        .iter()
        .zip(&dynamic)
        .map(|(c, d)| [c.width_mm, c.length_mm, c.power_w, d[0], d[1], d[2], d[3]])
        .collect();
    let edges = system
        .nets
        .iter()
        .map(|net| (net.a, net.b, net.wires as f64))
        .collect();
    Ok(OrderGraph {
        system_id: system_id.to_string(),
        order: order.clone(),
        label: label.min(10),
        node_features,
        edges,
    })
}

/// Per-feature min/max ranges fitted on the training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub node_min: [f64; NODE_FEATURE_DIM],
    pub node_max: [f64; NODE_FEATURE_DIM],
    pub edge_min: f64,
    pub edge_max: f64,
}

fn minmax_norm(x: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((x - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

/// Fit min-max ranges over every node feature and the edge weight.
pub fn fit_scaler(graphs: &[OrderGraph]) -> Result<FeatureScaler> {
    if graphs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut node_min = [f64::INFINITY; NODE_FEATURE_DIM];
    let mut node_max = [f64::NEG_INFINITY; NODE_FEATURE_DIM];
    let mut edge_min = f64::INFINITY;
    let mut edge_max = f64::NEG_INFINITY;
    for g in graphs {
        for row in &g.node_features {
            for (k, &x) in row.iter().enumerate() {
                node_min[k] = node_min[k].min(x);
                node_max[k] = node_max[k].max(x);
            }
        }
        for &(_, _, w) in &g.edges {
            edge_min = edge_min.min(w);
            edge_max = edge_max.max(w);
        }
    }
    if edge_min > edge_max {
        // Edge-free corpus: any weight normalizes to the constant midpoint.
        edge_min = 0.0;
        edge_max = 0.0;
    }
    Ok(FeatureScaler {
        node_min,
        node_max,
        edge_min,
        edge_max,
    })
}

/// Normalize a graph into `[0, 1]` features; out-of-range values clip.
pub fn apply_scaler(graph: &OrderGraph, scaler: &FeatureScaler) -> OrderGraph {
    let node_features = graph
        .node_features
        .iter()
        .map(|row| {
            let mut out = [0.0f64; NODE_FEATURE_DIM];
            for (k, &x) in row.iter().enumerate() {
                out[k] = minmax_norm(x, scaler.node_min[k], scaler.node_max[k]);
            }
            out
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|&(a, b, w)| (a, b, minmax_norm(w, scaler.edge_min, scaler.edge_max)))
        .collect();
    OrderGraph {
        system_id: graph.system_id.clone(),
        order: graph.order.clone(),
        label: graph.label,
        node_features,
        edges,
    }
}

/// Budget for pairwise comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// Max comparisons drawn per point.
    pub k: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { k: 10, seed: 42 }
    }
}

/// One oriented comparison: the strong side has the strictly higher level.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub system_id: String,
    pub strong_order: PlacementOrder,
    pub weak_order: PlacementOrder,
    pub strong_level: u8,
    pub weak_level: u8,
}

/// Sample bounded cross-level comparisons within each system.
///
/// Every point draws up to `k` partners with a different level, uniformly
/// without replacement from its own system; pairs are oriented strong/weak
/// and deduplicated across the whole pass. A fixed seed fixes the output.
pub fn sample_pairs(
    labeled: &[(String, &LabeledScatter)],
    config: &SamplingConfig,
) -> Result<Vec<PairRecord>> {
    if config.k == 0 {
        return Err(Error::Usage("sampling k must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for (sys_idx, (system_id, scatter)) in labeled.iter().enumerate() {
        let levels = &scatter.level;
        for i in 0..levels.len() {
            let mut partners: Vec<usize> =
                (0..levels.len()).filter(|&j| levels[j] != levels[i]).collect();
            let take = config.k.min(partners.len());
            let (chosen, _) = partners.partial_shuffle(&mut rng, take);
            for &j in chosen.iter() {
                let key = (sys_idx, i.min(j), i.max(j));
                if !seen.insert(key) {
                    continue;
                }
                let (strong, weak) = if levels[i] > levels[j] { (i, j) } else { (j, i) };
                pairs.push(PairRecord {
                    system_id: system_id.clone(),
                    strong_order: scatter.points.points[strong].order.clone(),
                    weak_order: scatter.points.points[weak].order.clone(),
                    strong_level: levels[strong],
                    weak_level: levels[weak],
                });
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoComparablePairs);
    }
    Ok(pairs)
}

/// An index pair into a graph arena; `strong` carries the higher level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingPair {
    pub strong: usize,
    pub weak: usize,
}

/// Resolve pair records against their systems: build each distinct
/// `(system, order)` graph once and point index pairs at the arena.
pub fn assemble_training_set(
    records: &[PairRecord],
    systems: &std::collections::HashMap<String, ChipletSystem>,
) -> Result<(Vec<OrderGraph>, Vec<TrainingPair>)> {
    let mut graphs: Vec<OrderGraph> = Vec::new();
    let mut index: std::collections::HashMap<(String, PlacementOrder), usize> =
        std::collections::HashMap::new();
    let mut pairs = Vec::with_capacity(records.len());
    for rec in records {
        let system = systems.get(&rec.system_id).ok_or_else(|| {
            Error::Usage(format!("pairs reference unknown system {:?}", rec.system_id))
        })?;
        let mut intern = |order: &PlacementOrder, label: u8| -> Result<usize> {
            let key = (rec.system_id.clone(), order.clone());
            if let Some(&i) = index.get(&key) {
                return Ok(i);
            }
            let graph = build_graph(system, &rec.system_id, order, label)?;
            graphs.push(graph);
            index.insert(key, graphs.len() - 1);
            Ok(graphs.len() - 1)
        };
        let strong = intern(&rec.strong_order, rec.strong_level)?;
        let weak = intern(&rec.weak_order, rec.weak_level)?;
        pairs.push(TrainingPair { strong, weak });
    }
    Ok((graphs, pairs))
}

pub const PAIRS_CSV_HEADER: &str = "system_id,strong_order,weak_order,strong_level,weak_level";

pub fn pairs_to_csv(pairs: &[PairRecord]) -> String {
    let mut out = String::from(PAIRS_CSV_HEADER);
    out.push('\n');
    for p in pairs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.system_id, p.strong_order, p.weak_order, p.strong_level, p.weak_level
        ));
    }
    out
}

pub fn pairs_from_csv(text: &str, origin: &str) -> Result<Vec<PairRecord>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim();
    if header != PAIRS_CSV_HEADER {
        return Err(Error::MalformedFile {
            path: origin.into(),
            reason: format!("expected header {PAIRS_CSV_HEADER:?}, found {header:?}"),
        });
    }
    let mut pairs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |what: &str| Error::MalformedFile {
            path: origin.into(),
            reason: format!("line {}: bad {what}", lineno + 2),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(parse_err("field count"));
        }
        let strong_level: u8 = fields[3].parse().map_err(|_| parse_err("strong_level"))?;
        let weak_level: u8 = fields[4].parse().map_err(|_| parse_err("weak_level"))?;
        if strong_level <= weak_level || strong_level > 10 {
            return Err(parse_err("level ordering"));
        }
        pairs.push(PairRecord {
            system_id: fields[0].to_string(),
            strong_order: PlacementOrder::parse(fields[1]).map_err(|_| parse_err("strong_order"))?,
            weak_order: PlacementOrder::parse(fields[2]).map_err(|_| parse_err("weak_order"))?,
            strong_level,
            weak_level,
        });
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placer::{ScatterPoint, ScatterSet};
    use crate::system::{Chiplet, Interposer, Net};
    use proptest::prelude::*;

    fn three_chip_system() -> ChipletSystem {
        ChipletSystem::new(
            "tri".into(),
            Interposer {
                width_mm: 20.0,
                height_mm: 20.0,
                ambient_c: 45.0,
            },
            vec![
                Chiplet {
                    name: "c0".into(),
                    width_mm: 2.0,
                    length_mm: 2.0,
                    power_w: 1.0,
                },
                Chiplet {
                    name: "c1".into(),
                    width_mm: 3.0,
                    length_mm: 2.0,
                    power_w: 2.0,
                },
                Chiplet {
                    name: "c2".into(),
                    width_mm: 2.0,
                    length_mm: 4.0,
                    power_w: 0.5,
                },
            ],
            vec![Net { a: 0, b: 1, wires: 2 }, Net { a: 0, b: 2, wires: 5 }],
        )
        .unwrap()
    }

    fn labeled(levels: &[u8]) -> LabeledScatter {
        LabeledScatter {
            points: ScatterSet {
                points: levels
                    .iter()
                    .enumerate()
                    .map(|(i, _)| ScatterPoint {
                        order: PlacementOrder(vec![i]),
                        temperature_c: 50.0 + i as f64,
                        wirelength_mm: 100.0 + i as f64,
                    })
                    .collect(),
            },
            slack: vec![0.0; levels.len()],
            level: levels.to_vec(),
            degenerate_spread: false,
        }
    }

    #[test]
    fn first_step_closes_nothing() {
        let sys = three_chip_system();
        let rows = order_features(&sys, &PlacementOrder(vec![2, 1, 0])).unwrap();
        // Chiplet 2 is placed first.
        assert_eq!(rows[2][0], 1.0);
        assert_eq!(rows[2][3], 0.0);
    }

    #[test]
    fn single_chiplet_features() {
        let sys = ChipletSystem::new(
            "solo".into(),
            Interposer {
                width_mm: 10.0,
                height_mm: 10.0,
                ambient_c: 45.0,
            },
            vec![Chiplet {
                name: "c0".into(),
                width_mm: 2.0,
                length_mm: 3.0,
                power_w: 1.5,
            }],
            vec![],
        )
        .unwrap();
        let rows = order_features(&sys, &PlacementOrder(vec![0])).unwrap();
        assert_eq!(rows[0][0], 1.0);
        assert!((rows[0][1] - (1.0 - 6.0 / 100.0)).abs() < 1e-12);
        assert_eq!(rows[0][2], 1.5);
        assert_eq!(rows[0][3], 0.0);
    }

    #[test]
    fn closing_weight_hand_example() {
        let sys = three_chip_system();
        let order = PlacementOrder(vec![1, 2, 0]);
        let rows = order_features(&sys, &order).unwrap();
        // Chiplet 0 lands last and closes both nets: 2 + 5 = 7.
        assert_eq!(rows[0][3], 7.0);
        assert_eq!(rows[1][3], 0.0);
        assert_eq!(rows[2][3], 0.0);
        // Viewed step by step that is [0, 0, 7].
        let by_step: Vec<f64> = order.0.iter().map(|&c| rows[c][3]).collect();
        assert_eq!(by_step, vec![0.0, 0.0, 7.0]);
    }

    #[test]
    fn graph_shapes_and_order_invariant_topology() {
        let sys = three_chip_system();
        let a = build_graph(&sys, "tri", &PlacementOrder(vec![0, 1, 2]), 5).unwrap();
        let b = build_graph(&sys, "tri", &PlacementOrder(vec![2, 1, 0]), 5).unwrap();
        assert_eq!(a.node_count(), 3);
        assert_eq!(a.edges, b.edges);
        assert_ne!(a.node_features, b.node_features);
        // Static columns agree, per chiplet.
        for c in 0..3 {
            assert_eq!(a.node_features[c][..3], b.node_features[c][..3]);
        }
    }

    #[test]
    fn triangle_graph_counts() {
        let mut sys = three_chip_system();
        sys.nets.push(Net { a: 1, b: 2, wires: 3 });
        let g = build_graph(&sys, "tri", &PlacementOrder(vec![0, 1, 2]), 0).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn scaler_constant_feature_maps_to_half() {
        let sys = three_chip_system();
        let g = build_graph(&sys, "tri", &PlacementOrder(vec![0, 1, 2]), 0).unwrap();
        let mut constant = g.clone();
        for row in &mut constant.node_features {
            row[2] = 4.0;
        }
        let scaler = fit_scaler(std::slice::from_ref(&constant)).unwrap();
        let normed = apply_scaler(&constant, &scaler);
        for row in &normed.node_features {
            assert_eq!(row[2], 0.5);
        }
    }

    #[test]
    fn scaler_endpoints_and_clipping() {
        assert_eq!(minmax_norm(1.0, 1.0, 5.0), 0.0);
        assert_eq!(minmax_norm(5.0, 1.0, 5.0), 1.0);
        assert_eq!(minmax_norm(6.0, 1.0, 5.0), 1.0);
        assert_eq!(minmax_norm(-2.0, 1.0, 5.0), 0.0);
    }

    #[test]
    fn scaler_fits_corpus_into_unit_interval() {
        let sys = three_chip_system();
        let graphs: Vec<OrderGraph> = [[0usize, 1, 2], [2, 0, 1], [1, 2, 0]]
            .iter()
            .map(|o| build_graph(&sys, "tri", &PlacementOrder(o.to_vec()), 0).unwrap())
            .collect();
        let scaler = fit_scaler(&graphs).unwrap();
        for g in &graphs {
            let n = apply_scaler(g, &scaler);
            for row in &n.node_features {
                for &x in row {
                    assert!((0.0..=1.0).contains(&x));
                }
            }
            for &(_, _, w) in &n.edges {
                assert!((0.0..=1.0).contains(&w));
            }
        }
    }

    #[test]
    fn scaler_requires_graphs() {
        assert!(matches!(fit_scaler(&[]).unwrap_err(), Error::EmptyCorpus));
    }

    #[test]
    fn two_point_sampling_yields_one_oriented_pair() {
        let scatter = labeled(&[10, 3]);
        let pairs = sample_pairs(
            &[("s".to_string(), &scatter)],
            &SamplingConfig { k: 10, seed: 1 },
        )
        .unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].strong_level, 10);
        assert_eq!(pairs[0].weak_level, 3);
        assert_eq!(pairs[0].strong_order, PlacementOrder(vec![0]));
    }

    #[test]
    fn uniform_levels_are_incomparable() {
        let scatter = labeled(&[4, 4, 4]);
        assert!(matches!(
            sample_pairs(
                &[("s".to_string(), &scatter)],
                &SamplingConfig { k: 10, seed: 1 }
            )
            .unwrap_err(),
            Error::NoComparablePairs
        ));
    }

    #[test]
    fn pair_count_bounds_on_large_scatter() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let levels: Vec<u8> = (0..720).map(|_| rng.gen_range(0..=10)).collect();
        let scatter = labeled(&levels);
        let pairs = sample_pairs(
            &[("s".to_string(), &scatter)],
            &SamplingConfig { k: 10, seed: 2 },
        )
        .unwrap();
        assert!(pairs.len() <= 720 * 10);
        assert!(pairs.len() >= 720 * 10 / 2);
    }

    #[test]
    fn full_budget_emits_every_cross_level_pair_once() {
        let levels = [10u8, 10, 7, 3, 3, 0];
        let scatter = labeled(&levels);
        let expect: usize = (0..levels.len())
            .flat_map(|i| (i + 1..levels.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| levels[i] != levels[j])
            .count();
        let pairs = sample_pairs(
            &[("s".to_string(), &scatter)],
            &SamplingConfig {
                k: levels.len() - 1,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(pairs.len(), expect);
    }

    #[test]
    fn sampling_reproducible_for_fixed_seed() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let levels: Vec<u8> = (0..100).map(|_| rng.gen_range(0..=10)).collect();
        let scatter = labeled(&levels);
        let cfg = SamplingConfig { k: 5, seed: 4 };
        let a = sample_pairs(&[("s".to_string(), &scatter)], &cfg).unwrap();
        let b = sample_pairs(&[("s".to_string(), &scatter)], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pairs_csv_round_trip() {
        let scatter = labeled(&[10, 3, 7]);
        let pairs = sample_pairs(
            &[("sys_a".to_string(), &scatter)],
            &SamplingConfig { k: 2, seed: 5 },
        )
        .unwrap();
        let csv = pairs_to_csv(&pairs);
        let back = pairs_from_csv(&csv, "test").unwrap();
        assert_eq!(back, pairs);
    }

    proptest! {
        #[test]
        fn dynamic_columns_monotone_and_closings_sum(
            dims in proptest::collection::vec((1.0f64..4.0, 1.0f64..4.0, 0.0f64..5.0), 2..7),
            net_seed in any::<u64>(),
            order_seed in any::<u64>(),
        ) {
            use rand::Rng;
            let n = dims.len();
            let mut rng = ChaCha8Rng::seed_from_u64(net_seed);
            let mut nets = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.5) {
                        nets.push(Net { a, b, wires: rng.gen_range(1..50) });
                    }
                }
            }
            let sys = ChipletSystem::new(
                "prop".into(),
                Interposer { width_mm: 20.0, height_mm: 20.0, ambient_c: 45.0 },
                dims.iter()
                    .enumerate()
                    .map(|(i, &(w, l, p))| Chiplet {
                        name: format!("c{i}"),
                        width_mm: w,
                        length_mm: l,
                        power_w: p,
                    })
                    .collect(),
                nets.clone(),
            ).unwrap();
            let mut seq: Vec<usize> = (0..n).collect();
            let mut order_rng = ChaCha8Rng::seed_from_u64(order_seed);
            seq.shuffle(&mut order_rng);
            let order = PlacementOrder(seq);

            let rows = order_features(&sys, &order).unwrap();
            let by_step: Vec<[f64; 4]> = order.0.iter().map(|&c| rows[c]).collect();
            for w in by_step.windows(2) {
                prop_assert!(w[1][1] <= w[0][1] + 1e-12, "area remaining must not grow");
                prop_assert!(w[1][2] >= w[0][2] - 1e-12, "cumulative power must not shrink");
            }
            let closed: f64 = by_step.iter().map(|r| r[3]).sum();
            let total: u64 = sys.nets.iter().map(|net| net.wires).sum();
            prop_assert!((closed - total as f64).abs() < 1e-9);
            // Step column is a permutation of 1..=n.
            let mut steps: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            steps.sort_by(f64::total_cmp);
            for (i, s) in steps.iter().enumerate() {
                prop_assert_eq!(*s, (i + 1) as f64);
            }
        }
    }
}
