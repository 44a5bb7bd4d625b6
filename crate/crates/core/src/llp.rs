//! Layered Label Propagation.
//!
//! One APM labelling is precomputed per entry of a gamma grid. Starting from
//! an initial ordering, each iteration draws a grid entry uniformly at random
//! and composes its labelling with the current ordering: clusters are sorted
//! by the previous rank of their leader (the node whose id is the label), and
//! nodes inside a cluster keep their previous relative order.

use rayon::prelude::*;

use crate::apm::{self, ApmConfig, Labelling};
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, NodeId, Permutation};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct LlpConfig {
    /// Resolution of each precomputed labelling. Entries may repeat; each
    /// one gets its own APM seed.
    pub gammas: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    /// Template for the APM runs; `gamma` and `seed` are overwritten.
    pub apm: ApmConfig,
}

pub const DEFAULT_K: u32 = 7;
pub const DEFAULT_ITERATIONS: usize = 12;

/// `{0} ∪ {2^-i : i = 0..=k}`, largest first.
pub fn gamma_grid(k: u32) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=k).map(|i| 0.5f64.powi(i as i32)).collect();
    grid.push(0.0);
    grid
}

impl Default for LlpConfig {
    fn default() -> Self {
        LlpConfig {
            gammas: gamma_grid(DEFAULT_K),
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            apm: ApmConfig::default(),
        }
    }
}

impl LlpConfig {
    pub fn with_k(k: u32) -> Self {
        LlpConfig {
            gammas: gamma_grid(k),
            ..LlpConfig::default()
        }
    }

    /// `count` labellings at the same resolution, differing only by seed.
    pub fn fixed_gamma(gamma: f64, count: usize) -> Self {
        LlpConfig {
            gammas: vec![gamma; count],
            ..LlpConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::Contract("the gamma grid is empty".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Contract("at least one iteration is required".into()));
        }
        for &gamma in &self.gammas {
            ApmConfig {
                gamma,
                ..self.apm.clone()
            }
            .validate()?;
        }
        Ok(())
    }

    fn apm_for(&self, index: usize) -> ApmConfig {
        ApmConfig {
            gamma: self.gammas[index],
            seed: derive_seed(self.seed, index as u64),
            ..self.apm.clone()
        }
    }
}

fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Reorders `prev` by the clusters of `lab`: `x` precedes `y` when
/// `prev[lab(x)] < prev[lab(y)]`, or when they share a label and
/// `prev[x] < prev[y]`.
pub fn compose(prev: &Permutation, lab: &Labelling) -> Result<Permutation> {
    let n = prev.len();
    check_len(n, lab.len())?;
    let inverse = prev.inverse();
    // Cluster start positions, clusters taken in the previous order of their leaders.
    let mut next = vec![0 as NodeId; n];
    let mut start = 0 as NodeId;
    for &leader in inverse.as_slice() {
        let size = lab.volume(leader);
        if size > 0 {
            next[leader as usize] = start;
            start += size;
        }
    }
    let mut map = vec![0 as NodeId; n];
    for &x in inverse.as_slice() {
        let l = lab.label(x as usize) as usize;
        map[x as usize] = next[l];
        next[l] += 1;
    }
    Permutation::from_vec(map)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LlpIteration {
    pub iteration: usize,
    pub grid_index: usize,
    pub gamma: f64,
    pub clusters: usize,
}

impl LlpIteration {
    pub fn to_kv_line(&self) -> String {
        format!(
            "iteration={} gamma={} grid_index={} clusters={}",
            self.iteration, self.gamma, self.grid_index, self.clusters
        )
    }
}

#[derive(Clone, Debug)]
pub struct LlpOutcome {
    pub permutation: Permutation,
    pub iterations: Vec<LlpIteration>,
    /// One labelling per grid entry, in grid order.
    pub labellings: Vec<Labelling>,
}

pub fn run_llp(g: &Graph, initial: &Permutation, cfg: &LlpConfig) -> Result<Permutation> {
    run_llp_detailed(g, initial, cfg).map(|o| o.permutation)
}

/// One APM labelling per grid entry. Runs in parallel across entries when
/// the APM template asks for more than one thread.
pub fn precompute_labellings(g: &Graph, cfg: &LlpConfig) -> Result<Vec<Labelling>> {
    cfg.validate()?;
    let run = |i: usize| apm::run_apm(g, &cfg.apm_for(i));
    if cfg.apm.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.apm.threads)
            .build()
            .map_err(|e| Error::Contract(format!("cannot start worker threads: {e}")))?;
        pool.install(|| (0..cfg.gammas.len()).into_par_iter().map(run).collect())
    } else {
        (0..cfg.gammas.len()).map(run).collect()
    }
}

pub fn run_llp_detailed(g: &Graph, initial: &Permutation, cfg: &LlpConfig) -> Result<LlpOutcome> {
    check_len(g.num_nodes(), initial.len())?;
    let labellings = precompute_labellings(g, cfg)?;
    compose_layers(initial, &labellings, cfg)
}

/// Composition stage alone, over labellings computed beforehand.
pub fn compose_layers(initial: &Permutation, labellings: &[Labelling], cfg: &LlpConfig) -> Result<LlpOutcome> {
    check_len(cfg.gammas.len(), labellings.len())?;
    if cfg.iterations == 0 {
        return Err(Error::Contract("at least one iteration is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = initial.clone();
    let mut iterations = Vec::with_capacity(cfg.iterations);
    for iteration in 0..cfg.iterations {
        let grid_index = rng.random_range(0..labellings.len());
        let lab = &labellings[grid_index];
        current = compose(&current, lab)?;
        let it = LlpIteration {
            iteration,
            grid_index,
            gamma: cfg.gammas[grid_index],
            clusters: lab.num_clusters(),
        };
        log::info!("llp {}", it.to_kv_line());
        iterations.push(it);
    }
    Ok(LlpOutcome {
        permutation: current,
        iterations,
        labellings: labellings.to_vec(),
    })
}
