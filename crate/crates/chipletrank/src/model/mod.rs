//! Learning-to-rank model: parameters, training loop, and checkpoint format.

pub mod adam;
pub mod net;

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{apply_scaler, fit_scaler, FeatureScaler, OrderGraph, TrainingPair};
use crate::error::{Error, Result};
use adam::Adam;
pub use net::{pair_loss, pair_probability, GraphTensor, Network, Pooling};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch: usize,
    pub iterations: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-4,
            batch: 64,
            iterations: 3000,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::Usage("learning rate must be > 0".into()));
        }
        if self.batch == 0 || self.iterations == 0 {
            return Err(Error::Usage("batch and iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seed: u64,
    pub iterations: usize,
    pub loss_history: Vec<f64>,
}

/// Trained scorer plus everything needed to rank a new system.
#[derive(Debug, Clone, PartialEq)]
pub struct RankModel {
    pub net: Network,
    pub pooling: Pooling,
    pub scaler: FeatureScaler,
    pub meta: ModelMeta,
}

impl RankModel {
    /// Score a raw (unnormalized) graph with the model's own scaler.
    pub fn score(&self, graph: &OrderGraph) -> Result<f64> {
        let normalized = apply_scaler(graph, &self.scaler);
        let tensor = GraphTensor::from_normalized(&normalized);
        Ok(self.net.forward(&tensor, self.pooling)?.0)
    }
}

/// Train on pre-built graphs and index pairs into them.
///
/// The scaler is fitted on exactly the graphs given here and travels with
/// the model. Each iteration draws a batch of pairs (without replacement
/// when enough exist), averages the pair-loss gradients, and applies one
/// Adam step. Fixed seed, fixed output.
pub fn train(
    graphs: &[OrderGraph],
    pairs: &[TrainingPair],
    pooling: Pooling,
    config: &TrainConfig,
) -> Result<RankModel> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scaler = fit_scaler(graphs)?;
    for pair in pairs {
        if pair.strong >= graphs.len() || pair.weak >= graphs.len() {
            return Err(Error::ShapeMismatch("pair index out of range".into()));
        }
    }
    let tensors: Vec<GraphTensor> = graphs
        .iter()
        .map(|g| GraphTensor::from_normalized(&apply_scaler(g, &scaler)))
        .collect();

    let mut network = Network::xavier(config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut optimizer = Adam::new(
        network.param_count(),
        config.lr,
        config.beta1,
        config.beta2,
        config.eps,
    );
    let mut params = network.to_flat();
    let mut grads = Network::zeros();
    let mut loss_history = Vec::with_capacity(config.iterations);

    for _ in 0..config.iterations {
        let batch: Vec<usize> = if pairs.len() >= config.batch {
            rand::seq::index::sample(&mut rng, pairs.len(), config.batch).into_vec()
        } else {
            (0..config.batch).map(|_| rng.gen_range(0..pairs.len())).collect()
        };
        grads.zero_out();
        let mut total = 0.0;
        for &pi in &batch {
            let pair = &pairs[pi];
            total += net::pair_gradients(
                &network,
                pooling,
                &tensors[pair.strong],
                &tensors[pair.weak],
                &mut grads,
            )?;
        }
        let scale = 1.0 / batch.len() as f64;
        let mut flat_grads = grads.to_flat();
        for g in &mut flat_grads {
            *g *= scale;
        }
        optimizer.step(&mut params, &flat_grads);
        network.set_flat(&params);
        loss_history.push(total * scale);
    }

    Ok(RankModel {
        net: network,
        pooling,
        scaler,
        meta: ModelMeta {
            seed: config.seed,
            iterations: config.iterations,
            loss_history,
        },
    })
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    pooling: Pooling,
    scaler: FeatureScaler,
    sage_dims: Vec<(usize, usize)>,
    head_dims: Vec<(usize, usize)>,
    net: Network,
    meta: ModelMeta,
}

/// Serialize a model to the versioned JSON checkpoint format. JSON floats
/// use the shortest representation that round-trips the exact `f64`.
pub fn model_to_json(model: &RankModel) -> String {
    let doc = Checkpoint {
        version: CHECKPOINT_VERSION,
        pooling: model.pooling,
        scaler: model.scaler.clone(),
        sage_dims: net::SAGE_DIMS.to_vec(),
        head_dims: net::HEAD_DIMS.to_vec(),
        net: model.net.clone(),
        meta: model.meta.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("checkpoint serialization cannot fail")
}

pub fn model_from_json(text: &str) -> Result<RankModel> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::MalformedCheckpoint("missing version field".into()))?;
    if version != CHECKPOINT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            found: version as u32,
            expected: CHECKPOINT_VERSION,
        });
    }
    let doc: Checkpoint = serde_json::from_value(value)
        .map_err(|e| Error::MalformedCheckpoint(e.to_string()))?;
    if doc.sage_dims != net::SAGE_DIMS.to_vec() || doc.head_dims != net::HEAD_DIMS.to_vec() {
        return Err(Error::MalformedCheckpoint("architecture dims".into()));
    }
    doc.net.validate_shape()?;
    for k in 0..doc.scaler.node_min.len() {
        if doc.scaler.node_min[k] > doc.scaler.node_max[k] {
            return Err(Error::MalformedCheckpoint("scaler range inverted".into()));
        }
    }
    Ok(RankModel {
        net: doc.net,
        pooling: doc.pooling,
        scaler: doc.scaler,
        meta: doc.meta,
    })
}

pub fn save_model(model: &RankModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RankModel> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::PlacementOrder;

    fn single_node_graph(id: &str, feature: f64, label: u8) -> OrderGraph {
        let mut row = [0.5f64; 7];
        row[2] = feature;
        OrderGraph {
            system_id: id.into(),
            order: PlacementOrder::identity(1),
            label,
            node_features: vec![row],
            edges: vec![],
        }
    }

    fn separable_setup() -> (Vec<OrderGraph>, Vec<TrainingPair>) {
        let graphs = vec![
            single_node_graph("s", 1.0, 10),
            single_node_graph("s", 0.0, 2),
        ];
        let pairs = vec![TrainingPair { strong: 0, weak: 1 }];
        (graphs, pairs)
    }

    #[test]
    fn separable_pair_is_fit() {
        let (graphs, pairs) = separable_setup();
        let model = train(&graphs, &pairs, Pooling::Mean, &TrainConfig::default()).unwrap();
        let final_loss = *model.meta.loss_history.last().unwrap();
        assert!(final_loss < 0.1, "final loss {final_loss}");
        let s_strong = model.score(&graphs[0]).unwrap();
        let s_weak = model.score(&graphs[1]).unwrap();
        assert!(s_strong > s_weak);
    }

    #[test]
    fn training_is_deterministic() {
        let (graphs, pairs) = separable_setup();
        let cfg = TrainConfig {
            iterations: 50,
            ..TrainConfig::default()
        };
        let a = train(&graphs, &pairs, Pooling::Mean, &cfg).unwrap();
        let b = train(&graphs, &pairs, Pooling::Mean, &cfg).unwrap();
        let fa = a.net.to_flat();
        let fb = b.net.to_flat();
        assert!(fa.iter().zip(&fb).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_eq!(a.meta.loss_history, b.meta.loss_history);
    }

    #[test]
    fn loss_history_stays_finite() {
        let (graphs, pairs) = separable_setup();
        let cfg = TrainConfig {
            iterations: 200,
            ..TrainConfig::default()
        };
        let model = train(&graphs, &pairs, Pooling::Mean, &cfg).unwrap();
        assert_eq!(model.meta.loss_history.len(), 200);
        assert!(model.meta.loss_history.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn empty_pairs_rejected() {
        let (graphs, _) = separable_setup();
        assert!(matches!(
            train(&graphs, &[], Pooling::Mean, &TrainConfig::default()).unwrap_err(),
            Error::EmptyDataset
        ));
    }

    fn random_raw_graph(seed: u64) -> OrderGraph {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..7);
        let node_features = (0..n)
            .map(|_| {
                let mut row = [0.0f64; 7];
                for x in &mut row {
                    *x = rng.gen_range(-2.0..6.0);
                }
                row
            })
            .collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push((a, b, rng.gen_range(1.0..30.0)));
                }
            }
        }
        OrderGraph {
            system_id: "r".into(),
            order: PlacementOrder::identity(n),
            label: 0,
            node_features,
            edges,
        }
    }

    #[test]
    fn checkpoint_round_trip_scores_bit_identical() {
        let (graphs, pairs) = separable_setup();
        let cfg = TrainConfig {
            iterations: 30,
            ..TrainConfig::default()
        };
        let model = train(&graphs, &pairs, Pooling::Mean, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        for seed in 0..10u64 {
            let g = random_raw_graph(seed);
            let a = model.score(&g).unwrap();
            let b = loaded.score(&g).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "seed {seed}");
        }
    }

    #[test]
    fn truncated_checkpoint_is_malformed() {
        let (graphs, pairs) = separable_setup();
        let cfg = TrainConfig {
            iterations: 5,
            ..TrainConfig::default()
        };
        let model = train(&graphs, &pairs, Pooling::Mean, &cfg).unwrap();
        let json = model_to_json(&model);
        let truncated = &json[..json.len() / 2];
        assert!(matches!(
            model_from_json(truncated).unwrap_err(),
            Error::MalformedCheckpoint(_)
        ));
    }

    #[test]
    fn foreign_version_is_rejected() {
        let (graphs, pairs) = separable_setup();
        let cfg = TrainConfig {
            iterations: 5,
            ..TrainConfig::default()
        };
        let model = train(&graphs, &pairs, Pooling::Mean, &cfg).unwrap();
        let json = model_to_json(&model).replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(
            model_from_json(&json).unwrap_err(),
            Error::VersionMismatch { found: 99, expected: 1 }
        ));
    }

    #[test]
    fn pooling_mode_survives_round_trip() {
        let (graphs, pairs) = separable_setup();
        let cfg = TrainConfig {
            iterations: 5,
            ..TrainConfig::default()
        };
        let model = train(&graphs, &pairs, Pooling::Max, &cfg).unwrap();
        let loaded = model_from_json(&model_to_json(&model)).unwrap();
        assert_eq!(loaded.pooling, Pooling::Max);
    }

    #[test]
    fn constant_score_shift_preserves_pair_probabilities() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a: f64 = rng.gen_range(-5.0..5.0);
            let b: f64 = rng.gen_range(-5.0..5.0);
            for c in [1.0, -3.5, 100.0] {
                let p0 = pair_probability(a, b);
                let p1 = pair_probability(a + c, b + c);
                assert!((p0 - p1).abs() < 1e-12);
            }
        }
    }
}

