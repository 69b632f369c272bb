//! Fixed-architecture network: three wire-weighted GraphSage layers, a
//! pooling stage, and a four-layer scoring head, with hand-written
//! reverse-mode gradients. Everything is `f64` and allocation-light; the
//! whole model is under 12k parameters.

use serde::{Deserialize, Serialize};

use crate::dataset::{OrderGraph, NODE_FEATURE_DIM};
use crate::error::{Error, Result};

/// GraphSage stack: (in, out) per layer. Inputs are the 7 node features.
pub const SAGE_DIMS: [(usize, usize); 3] = [(7, 7), (7, 32), (32, 64)];
/// Scoring head: three FC layers plus the final scalar map.
pub const HEAD_DIMS: [(usize, usize); 4] = [(64, 64), (64, 32), (32, 16), (16, 1)];
/// ReLU is applied after the first two head layers only; the 16-unit layer
/// and the scalar map stay linear.
const HEAD_RELU: [bool; 4] = [true, true, false, false];

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub w: Mat,
    pub b: Vec<f64>,
}

impl Linear {
    pub fn zeros(out: usize, input: usize) -> Self {
        Linear {
            w: Mat::zeros(out, input),
            b: vec![0.0; out],
        }
    }
}

/// All trainable parameters. Also reused as the gradient accumulator, since
/// gradients have exactly the parameter shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub sage: Vec<Linear>,
    pub head: Vec<Linear>,
}

impl Network {
    /// All-zero parameters in the fixed architecture.
    pub fn zeros() -> Self {
        Network {
            sage: SAGE_DIMS
                .iter()
                .map(|&(i, o)| Linear::zeros(o, 2 * i))
                .collect(),
            head: HEAD_DIMS.iter().map(|&(i, o)| Linear::zeros(o, i)).collect(),
        }
    }

    /// Xavier-uniform init, biases zero.
    pub fn xavier(seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut net = Network::zeros();
        for lin in net.sage.iter_mut().chain(net.head.iter_mut()) {
            let limit = (6.0 / (lin.w.cols + lin.w.rows) as f64).sqrt();
            for w in &mut lin.w.data {
                *w = rng.gen_range(-limit..=limit);
            }
        }
        net
    }

    pub fn layers(&self) -> impl Iterator<Item = &Linear> {
        self.sage.iter().chain(self.head.iter())
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(|l| l.w.data.len() + l.b.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for lin in self.layers() {
            out.extend_from_slice(&lin.w.data);
            out.extend_from_slice(&lin.b);
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count(), "flat parameter length");
        let mut at = 0;
        for lin in self.sage.iter_mut().chain(self.head.iter_mut()) {
            let wl = lin.w.data.len();
            lin.w.data.copy_from_slice(&flat[at..at + wl]);
            at += wl;
            let bl = lin.b.len();
            lin.b.copy_from_slice(&flat[at..at + bl]);
            at += bl;
        }
    }

    pub fn zero_out(&mut self) {
        for lin in self.sage.iter_mut().chain(self.head.iter_mut()) {
            lin.w.data.fill(0.0);
            lin.b.fill(0.0);
        }
    }

    /// Check the stored shapes against the fixed architecture.
    pub fn validate_shape(&self) -> Result<()> {
        if self.sage.len() != SAGE_DIMS.len() || self.head.len() != HEAD_DIMS.len() {
            return Err(Error::MalformedCheckpoint("layer count".into()));
        }
        for (lin, &(i, o)) in self.sage.iter().zip(SAGE_DIMS.iter()) {
            if lin.w.rows != o || lin.w.cols != 2 * i || lin.b.len() != o {
                return Err(Error::MalformedCheckpoint("sage layer shape".into()));
            }
            if lin.w.data.len() != lin.w.rows * lin.w.cols {
                return Err(Error::MalformedCheckpoint("sage weight length".into()));
            }
        }
        for (lin, &(i, o)) in self.head.iter().zip(HEAD_DIMS.iter()) {
            if lin.w.rows != o || lin.w.cols != i || lin.b.len() != o {
                return Err(Error::MalformedCheckpoint("head layer shape".into()));
            }
            if lin.w.data.len() != lin.w.rows * lin.w.cols {
                return Err(Error::MalformedCheckpoint("head weight length".into()));
            }
        }
        if self.layers().any(|l| {
            l.w.data.iter().any(|x| !x.is_finite()) || l.b.iter().any(|x| !x.is_finite())
        }) {
            return Err(Error::MalformedCheckpoint("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// How node states collapse into one graph vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    Mean,
    Sum,
    Max,
}

impl std::str::FromStr for Pooling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Pooling::Mean),
            "sum" => Ok(Pooling::Sum),
            "max" => Ok(Pooling::Max),
            other => Err(Error::Usage(format!("unknown pooling mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Pooling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pooling::Mean => "mean",
            Pooling::Sum => "sum",
            Pooling::Max => "max",
        })
    }
}

/// A graph lowered for the network: flat features and per-receiver
/// aggregation coefficients.
#[derive(Debug, Clone)]
pub struct GraphTensor {
    pub n: usize,
    /// `n x NODE_FEATURE_DIM`, row-major.
    pub features: Vec<f64>,
    /// For each node v, `(u, c_uv)` with the coefficients summing to 1.
    pub agg: Vec<Vec<(usize, f64)>>,
}

impl GraphTensor {
    /// Lower an already-normalized graph.
    ///
    /// Aggregation coefficients are the edge weights normalized per
    /// receiver. A node whose incident weights all normalized to zero falls
    /// back to a plain mean over its neighbors.
    pub fn from_normalized(graph: &OrderGraph) -> Self {
        let n = graph.node_count();
        let mut features = Vec::with_capacity(n * NODE_FEATURE_DIM);
        for row in &graph.node_features {
            features.extend_from_slice(row);
        }
        let mut nbrs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, w) in &graph.edges {
            nbrs[a].push((b, w));
            nbrs[b].push((a, w));
        }
        let agg = nbrs
            .into_iter()
            .map(|list| {
                if list.is_empty() {
                    return Vec::new();
                }
                let total: f64 = list.iter().map(|&(_, w)| w).sum();
                if total > 0.0 {
                    list.iter().map(|&(u, w)| (u, w / total)).collect()
                } else {
                    let c = 1.0 / list.len() as f64;
                    list.iter().map(|&(u, _)| (u, c)).collect()
                }
            })
            .collect();
        GraphTensor { n, features, agg }
    }
}

/// Wire-weighted mean of neighbor states; zero vector for isolated nodes.
fn aggregate(gt: &GraphTensor, h: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; gt.n * dim];
    for v in 0..gt.n {
        for &(u, c) in &gt.agg[v] {
            let src = &h[u * dim..(u + 1) * dim];
            let dst = &mut out[v * dim..(v + 1) * dim];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }
    out
}

/// One GraphSage layer over explicit states: `relu(W . [h_v ; agg_v] + b)`.
///
/// `states` is `n x in_dim` row-major; the layer expects `w` of shape
/// `out x 2*in_dim`.
pub fn sage_forward(
    layer: &Linear,
    states: &[f64],
    in_dim: usize,
    gt: &GraphTensor,
) -> Result<Vec<f64>> {
    if layer.w.cols != 2 * in_dim || states.len() != gt.n * in_dim {
        return Err(Error::ShapeMismatch(format!(
            "sage layer expects {} inputs, got {in_dim}",
            layer.w.cols / 2
        )));
    }
    let agg = aggregate(gt, states, in_dim);
    let out_dim = layer.w.rows;
    let mut out = vec![0.0; gt.n * out_dim];
    sage_affine(layer, states, &agg, in_dim, gt.n, &mut out);
    for z in &mut out {
        *z = z.max(0.0);
    }
    Ok(out)
}

fn sage_affine(layer: &Linear, h: &[f64], agg: &[f64], in_dim: usize, n: usize, z: &mut [f64]) {
    let out_dim = layer.w.rows;
    for v in 0..n {
        let hv = &h[v * in_dim..(v + 1) * in_dim];
        let av = &agg[v * in_dim..(v + 1) * in_dim];
        for o in 0..out_dim {
            let row = layer.w.row(o);
            let mut acc = layer.b[o];
            for k in 0..in_dim {
                acc += row[k] * hv[k] + row[in_dim + k] * av[k];
            }
            z[v * out_dim + o] = acc;
        }
    }
}

/// Collapse node states (`n x dim`) into a graph vector.
pub fn pool(states: &[f64], n: usize, dim: usize, mode: Pooling) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut out = vec![0.0; dim];
    match mode {
        Pooling::Mean | Pooling::Sum => {
            for v in 0..n {
                for k in 0..dim {
                    out[k] += states[v * dim + k];
                }
            }
            if mode == Pooling::Mean {
                for x in &mut out {
                    *x /= n as f64;
                }
            }
        }
        Pooling::Max => {
            out.copy_from_slice(&states[..dim]);
            for v in 1..n {
                for k in 0..dim {
                    out[k] = out[k].max(states[v * dim + k]);
                }
            }
        }
    }
    Ok(out)
}

/// Forward-pass intermediates kept for the backward pass.
pub struct Cache {
    /// Input states per sage layer, `n x in`.
    sage_in: Vec<Vec<f64>>,
    /// Aggregated neighbor states per sage layer, `n x in`.
    sage_agg: Vec<Vec<f64>>,
    /// Pre-activations per sage layer, `n x out`.
    sage_z: Vec<Vec<f64>>,
    /// Pooled graph vector.
    pooled: Vec<f64>,
    /// Winning node per dimension under max pooling.
    max_idx: Vec<usize>,
    /// Inputs per head layer.
    head_in: Vec<Vec<f64>>,
    /// Pre-activations per head layer.
    head_z: Vec<Vec<f64>>,
}

impl Network {
    /// Score a lowered graph, keeping intermediates for [`Network::backward`].
    pub fn forward(&self, gt: &GraphTensor, pooling: Pooling) -> Result<(f64, Cache)> {
        if gt.n == 0 {
            return Err(Error::EmptyGraph);
        }
        let n = gt.n;
        let mut h = gt.features.clone();
        let mut dim = NODE_FEATURE_DIM;
        let mut sage_in = Vec::with_capacity(self.sage.len());
        let mut sage_agg = Vec::with_capacity(self.sage.len());
        let mut sage_z = Vec::with_capacity(self.sage.len());
        for (lin, &(in_dim, out_dim)) in self.sage.iter().zip(SAGE_DIMS.iter()) {
            if dim != in_dim {
                return Err(Error::ShapeMismatch(format!(
                    "sage input width {dim}, layer expects {in_dim}"
                )));
            }
            let agg = aggregate(gt, &h, dim);
            let mut z = vec![0.0; n * out_dim];
            sage_affine(lin, &h, &agg, dim, n, &mut z);
            let next: Vec<f64> = z.iter().map(|&x| x.max(0.0)).collect();
            sage_in.push(h);
            sage_agg.push(agg);
            sage_z.push(z);
            h = next;
            dim = out_dim;
        }

        let pooled = pool(&h, n, dim, pooling)?;
        let mut max_idx = vec![0usize; dim];
        if pooling == Pooling::Max {
            for k in 0..dim {
                let mut best = 0usize;
                for v in 1..n {
                    if h[v * dim + k] > h[best * dim + k] {
                        best = v;
                    }
                }
                max_idx[k] = best;
            }
        }
        // The final sage states are recoverable from sage_z; stash them as
        // the first head input instead.
        let mut head_in = Vec::with_capacity(self.head.len());
        let mut head_z = Vec::with_capacity(self.head.len());
        let mut a = pooled.clone();
        for (li, lin) in self.head.iter().enumerate() {
            let mut z = vec![0.0; lin.w.rows];
            for o in 0..lin.w.rows {
                let row = lin.w.row(o);
                let mut acc = lin.b[o];
                for (k, &x) in a.iter().enumerate() {
                    acc += row[k] * x;
                }
                z[o] = acc;
            }
            head_in.push(a);
            let next: Vec<f64> = if HEAD_RELU[li] {
                z.iter().map(|&x| x.max(0.0)).collect()
            } else {
                z.clone()
            };
            head_z.push(z);
            a = next;
        }
        let score = a[0];
        Ok((
            score,
            Cache {
                sage_in,
                sage_agg,
                sage_z,
                pooled,
                max_idx,
                head_in,
                head_z,
            },
        ))
    }

    /// Accumulate `d(loss)/d(params)` into `grads` given `ds = d(loss)/d(score)`.
    pub fn backward(&self, gt: &GraphTensor, cache: &Cache, ds: f64, grads: &mut Network, pooling: Pooling) {
        let n = gt.n;
        // Head, last to first.
        let mut da = vec![ds];
        for li in (0..self.head.len()).rev() {
            let lin = &self.head[li];
            let glin = &mut grads.head[li];
            let z = &cache.head_z[li];
            let input = &cache.head_in[li];
            let dz: Vec<f64> = if HEAD_RELU[li] {
                da.iter()
                    .zip(z)
                    .map(|(&g, &zz)| if zz > 0.0 { g } else { 0.0 })
                    .collect()
            } else {
                da.clone()
            };
            for o in 0..lin.w.rows {
                let g = dz[o];
                if g != 0.0 {
                    glin.b[o] += g;
                    let wg = &mut glin.w.data[o * lin.w.cols..(o + 1) * lin.w.cols];
                    for (k, &x) in input.iter().enumerate() {
                        wg[k] += g * x;
                    }
                }
            }
            let mut din = vec![0.0; lin.w.cols];
            for o in 0..lin.w.rows {
                let g = dz[o];
                if g != 0.0 {
                    let row = lin.w.row(o);
                    for k in 0..lin.w.cols {
                        din[k] += g * row[k];
                    }
                }
            }
            da = din;
        }

        // Un-pool into per-node gradients.
        let dim = SAGE_DIMS[SAGE_DIMS.len() - 1].1;
        let mut dh = vec![0.0; n * dim];
        match pooling {
            Pooling::Mean => {
                let inv = 1.0 / n as f64;
                for v in 0..n {
                    for k in 0..dim {
                        dh[v * dim + k] = da[k] * inv;
                    }
                }
            }
            Pooling::Sum => {
                for v in 0..n {
                    dh[v * dim..(v + 1) * dim].copy_from_slice(&da);
                }
            }
            Pooling::Max => {
                for k in 0..dim {
                    dh[cache.max_idx[k] * dim + k] += da[k];
                }
            }
        }
        let _ = &cache.pooled;

        // Sage layers, last to first.
        let mut dh = dh;
        for li in (0..self.sage.len()).rev() {
            let (in_dim, out_dim) = SAGE_DIMS[li];
            let lin = &self.sage[li];
            let glin = &mut grads.sage[li];
            let z = &cache.sage_z[li];
            let h_in = &cache.sage_in[li];
            let agg = &cache.sage_agg[li];
            let mut dz = vec![0.0; n * out_dim];
            for i in 0..n * out_dim {
                if z[i] > 0.0 {
                    dz[i] = dh[i];
                }
            }
            let mut dh_self = vec![0.0; n * in_dim];
            let mut dagg = vec![0.0; n * in_dim];
            for v in 0..n {
                let hv = &h_in[v * in_dim..(v + 1) * in_dim];
                let av = &agg[v * in_dim..(v + 1) * in_dim];
                for o in 0..out_dim {
                    let g = dz[v * out_dim + o];
                    if g == 0.0 {
                        continue;
                    }
                    glin.b[o] += g;
                    let wg = &mut glin.w.data[o * 2 * in_dim..(o + 1) * 2 * in_dim];
                    let row = lin.w.row(o);
                    for k in 0..in_dim {
                        wg[k] += g * hv[k];
                        wg[in_dim + k] += g * av[k];
                        dh_self[v * in_dim + k] += g * row[k];
                        dagg[v * in_dim + k] += g * row[in_dim + k];
                    }
                }
            }
            // Push the aggregate gradient back onto the source nodes.
            for v in 0..n {
                for &(u, c) in &gt.agg[v] {
                    for k in 0..in_dim {
                        dh_self[u * in_dim + k] += c * dagg[v * in_dim + k];
                    }
                }
            }
            dh = dh_self;
        }
    }
}

/// RankNet pairwise loss: `-log sigmoid(s_strong - s_weak)`, computed as a
/// numerically stable softplus.
pub fn pair_loss(s_strong: f64, s_weak: f64) -> f64 {
    softplus(-(s_strong - s_weak))
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Loss and its derivative with respect to the score gap `s_strong - s_weak`.
pub fn pair_loss_and_grad(s_strong: f64, s_weak: f64) -> (f64, f64) {
    let delta = s_strong - s_weak;
    (softplus(-delta), -sigmoid(-delta))
}

/// RankNet preference probability `P(strong beats weak) = sigmoid(gap)`.
pub fn pair_probability(s_strong: f64, s_weak: f64) -> f64 {
    sigmoid(s_strong - s_weak)
}

/// Loss and parameter gradients for one (strong, weak) pair of lowered
/// graphs. Gradients of the shared weights accumulate across both twins.
pub fn pair_gradients(
    net: &Network,
    pooling: Pooling,
    strong: &GraphTensor,
    weak: &GraphTensor,
    grads: &mut Network,
) -> Result<f64> {
    let (s_strong, cache_s) = net.forward(strong, pooling)?;
    let (s_weak, cache_w) = net.forward(weak, pooling)?;
    let (loss, ddelta) = pair_loss_and_grad(s_strong, s_weak);
    net.backward(strong, &cache_s, ddelta, grads, pooling);
    net.backward(weak, &cache_w, -ddelta, grads, pooling);
    Ok(loss)
}
