//! Draw random multigraphs from a fitted model: the generative engine behind
//! Monte Carlo null distributions and the synthetic experiments.
//!
//! Sampling follows the sequential biased-urn process: each of the m edges
//! picks a dyad with probability proportional to omega * remaining capacity.
//! A cumulative-weight tree keeps each draw O(log cells).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::ModelSpec;
use crate::multigraph::{GraphError, MultiGraph};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("cannot draw {m} edges from total capacity {total}")]
    Capacity { m: f64, total: f64 },
    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<SamplerError>,
    },
    #[error("degree sequence degenerate after {0} attempts")]
    DegenerateDegrees(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

/// Configuration for a batch of replicate draws. Replicate i's RNG stream is
/// a pure function of (master_seed, i); `worker_hint` only advises
/// parallelism and never changes results.
#[derive(Debug, Clone)]
pub struct SampleBatchConfig {
    pub count: usize,
    pub master_seed: u64,
    pub worker_hint: usize,
}

impl SampleBatchConfig {
    pub fn new(count: usize, master_seed: u64) -> Self {
        SampleBatchConfig {
            count,
            master_seed,
            worker_hint: 0,
        }
    }
}

/// Counter-based seed split: replicate seeds depend only on the master seed
/// and the replicate index, so scheduling cannot change results.
pub fn replicate_seed(master_seed: u64, index: u64) -> u64 {
    // two rounds of splitmix64 over the combined state
    let mut z = master_seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for _ in 0..2 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z = x ^ (x >> 31);
    }
    z
}

// Fenwick tree over nonnegative f64 weights with prefix-sum search.
struct WeightTree {
    tree: Vec<f64>,
    len: usize,
}

impl WeightTree {
    fn new(weights: &[f64]) -> Self {
        let len = weights.len();
        let mut tree = vec![0.0; len + 1];
        tree[1..].copy_from_slice(weights);
        for i in 1..=len {
            let j = i + (i & i.wrapping_neg());
            if j <= len {
                tree[j] += tree[i];
            }
        }
        WeightTree { tree, len }
    }

    fn add(&mut self, mut i: usize, delta: f64) {
        i += 1;
        while i <= self.len {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut sum = 0.0;
        let mut i = self.len;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    // smallest index whose cumulative weight exceeds target
    fn find(&self, mut target: f64) -> usize {
        let mut pos = 0usize;
        let mut mask = self.len.next_power_of_two();
        if mask > self.len {
            mask >>= 1;
        }
        while mask > 0 {
            let next = pos + mask;
            if next <= self.len && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(self.len - 1)
    }
}

/// Draw one graph with exactly `m` edges from the model, deterministically
/// for a given seed.
pub fn sample_graph(model: &ModelSpec, m: u64, seed: u64) -> Result<MultiGraph, SamplerError> {
    let layout = model.layout();
    let cells: Vec<(usize, usize)> = layout
        .dyads()
        .filter(|&(i, j)| model.xi(i, j) > 0.0)
        .collect();
    let mut remaining: Vec<f64> = cells.iter().map(|&(i, j)| model.xi(i, j)).collect();
    let omegas: Vec<f64> = cells.iter().map(|&(i, j)| model.omega(i, j)).collect();
    let total: f64 = remaining.iter().sum();
    if (m as f64) > total {
        return Err(SamplerError::Capacity {
            m: m as f64,
            total,
        });
    }

    let mut weights: Vec<f64> = remaining
        .iter()
        .zip(&omegas)
        .map(|(r, w)| r * w)
        .collect();
    let mut tree = WeightTree::new(&weights);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; layout.n * layout.n];

    for _ in 0..m {
        let total_w = tree.total();
        if !(total_w > 0.0) {
            return Err(SamplerError::Capacity {
                m: m as f64,
                total,
            });
        }
        let r = rng.gen::<f64>() * total_w;
        let mut cell = tree.find(r);
        // float boundary guard: never land on an exhausted cell
        if weights[cell] <= 0.0 {
            cell = weights
                .iter()
                .position(|&w| w > 0.0)
                .expect("positive total weight implies a positive cell");
        }
        let (i, j) = cells[cell];
        counts[layout.dense_index(i, j)] += 1;
        remaining[cell] -= 1.0;
        let new_w = omegas[cell] * remaining[cell].max(0.0);
        tree.add(cell, new_w - weights[cell]);
        weights[cell] = new_w;
    }

    Ok(MultiGraph::from_dense_counts(
        counts,
        layout.directed,
        layout.selfloops,
        None,
    )?)
}

/// Draw `cfg.count` replicate graphs. Output order is by replicate index
/// regardless of execution order; identical for any worker hint.
pub fn sample_batch(
    model: &ModelSpec,
    m: u64,
    cfg: &SampleBatchConfig,
) -> Result<Vec<MultiGraph>, SamplerError> {
    let draw = |i: usize| {
        sample_graph(model, m, replicate_seed(cfg.master_seed, i as u64)).map_err(|e| {
            SamplerError::Replicate {
                index: i,
                source: Box::new(e),
            }
        })
    };
    if cfg.worker_hint == 1 {
        (0..cfg.count).map(draw).collect()
    } else {
        (0..cfg.count).into_par_iter().map(draw).collect()
    }
}

/// Generate one undirected graph from a configuration model whose degree
/// sequence is drawn from a geometric distribution with mean 2*target_m/n,
/// so the expected edge total is target_m.
pub fn generate_geometric_cm_graph(
    n: usize,
    target_m: u64,
    seed: u64,
) -> Result<MultiGraph, SamplerError> {
    let (g, _) = generate_geometric_cm(n, target_m, seed)?;
    Ok(g)
}

/// Like [`generate_geometric_cm_graph`] but also returns the generating
/// model, for experiments that resample edges under a fixed model.
pub fn generate_geometric_cm(
    n: usize,
    target_m: u64,
    seed: u64,
) -> Result<(MultiGraph, ModelSpec), SamplerError> {
    if n < 2 || target_m < 1 {
        return Err(SamplerError::InvalidInput(format!(
            "need n >= 2 and target_m >= 1, got n={n}, target_m={target_m}"
        )));
    }
    let mean = 2.0 * target_m as f64 / n as f64;
    let p = 1.0 / (1.0 + mean);
    let ln_q = (-p).ln_1p();
    let mut rng = ChaCha12Rng::seed_from_u64(replicate_seed(seed, 0x6765_6f6d));

    const MAX_ATTEMPTS: usize = 100;
    for _ in 0..MAX_ATTEMPTS {
        let degrees: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                ((1.0 - u).ln() / ln_q).floor().max(0.0)
            })
            .collect();
        let sum: f64 = degrees.iter().sum();
        let m = (sum / 2.0).round() as u64;
        if m < 1 {
            continue;
        }
        let model = configuration_from_degrees(&degrees)?;
        if model.total_xi() < m as f64 {
            continue;
        }
        let g = sample_graph(&model, m, replicate_seed(seed, 0x6772_6170))?;
        return Ok((g, model));
    }
    Err(SamplerError::DegenerateDegrees(MAX_ATTEMPTS))
}

/// Configuration model over an undirected, self-loop-free layout built from
/// an explicit degree sequence instead of an observed graph.
pub fn configuration_from_degrees(degrees: &[f64]) -> Result<ModelSpec, SamplerError> {
    use crate::model::XiMatrix;
    use crate::multigraph::DyadLayout;
    let n = degrees.len();
    let layout = DyadLayout {
        n,
        directed: false,
        selfloops: false,
    };
    let mut xi = vec![0.0; n * n];
    for (i, j) in layout.dyads() {
        xi[layout.dense_index(i, j)] = degrees[i] * degrees[j];
    }
    Ok(ModelSpec::custom(layout, XiMatrix::Dense(xi), None, n)?)
}
