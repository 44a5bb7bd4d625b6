//! Seeded random graph generators used by tests, examples and the benchmark
//! pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};

/// Calls `emit` for every index in `start..end` kept with probability `p`,
/// jumping over rejected indices with geometric skips.
fn sample_range<R: Rng>(rng: &mut R, start: usize, end: usize, p: f64, mut emit: impl FnMut(usize)) {
    if p <= 0.0 || start >= end {
        return;
    }
    if p >= 1.0 {
        (start..end).for_each(emit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut pos = start;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (end - pos) as f64 {
            return;
        }
        pos += skip as usize;
        emit(pos);
        pos += 1;
        if pos >= end {
            return;
        }
    }
}

/// Directed G(n, p), self-loops included.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for x in 0..n {
        sample_range(&mut rng, 0, n, p, |y| arcs.push((x as NodeId, y as NodeId)));
    }
    Graph::from_arcs(n, arcs).expect("generated arcs are in range")
}

/// Undirected stochastic block model stored as a symmetric graph. Blocks
/// occupy contiguous id ranges in the order given by `sizes`; each pair
/// inside a block is an edge with probability `p_in`, each pair across
/// blocks with probability `p_out`.
pub fn stochastic_block_model(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Graph {
    let n: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    let mut block_start = 0;
    for &size in sizes {
        let block_end = block_start + size;
        for x in block_start..block_end {
            let mut push = |y: usize| {
                arcs.push((x as NodeId, y as NodeId));
                arcs.push((y as NodeId, x as NodeId));
            };
            sample_range(&mut rng, x + 1, block_end, p_in, &mut push);
            sample_range(&mut rng, block_end, n, p_out, &mut push);
        }
        block_start = block_end;
    }
    Graph::from_arcs(n, arcs).expect("generated arcs are in range")
}

/// Edge probabilities for `blocks` equal blocks of `block_size` nodes with
/// the given expected intra- and inter-block degrees.
pub fn sbm_probabilities(blocks: usize, block_size: usize, intra_degree: f64, inter_degree: f64) -> (f64, f64) {
    let p_in = if block_size > 1 {
        intra_degree / (block_size - 1) as f64
    } else {
        0.0
    };
    let outside = (blocks - 1) * block_size;
    let p_out = if outside > 0 {
        inter_degree / outside as f64
    } else {
        0.0
    };
    (p_in, p_out)
}

/// Block index of every node of a model built from `sizes`.
pub fn block_membership(sizes: &[usize]) -> Vec<u32> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b as u32, s))
        .collect()
}
