//! Layered label propagation on a shuffled graph: shows the iteration log
//! and how far the result brings the planted blocks back together.

use llp_core::codec::{measure, CodecConfig};
use llp_core::llp::{run_llp_detailed, LlpConfig};
use llp_core::metrics::{host_transition_rate, Partition};
use llp_core::synthetic::{block_membership, sbm_probabilities, stochastic_block_model};
use llp_core::Permutation;

fn main() -> llp_core::Result<()> {
    let sizes = [200; 50];
    let (p_in, p_out) = sbm_probabilities(50, 200, 12.0, 3.0);
    let planted = stochastic_block_model(&sizes, p_in, p_out, 2);
    let shuffle = Permutation::random(planted.num_nodes(), 2);
    let g = planted.apply_permutation(&shuffle)?;

    // Block of every node under the shuffled numbering.
    let blocks = block_membership(&sizes);
    let mut shuffled_blocks = vec![0; blocks.len()];
    for (old, &b) in blocks.iter().enumerate() {
        shuffled_blocks[shuffle.get(old) as usize] = b;
    }
    let blocks = Partition::from_classes(shuffled_blocks);

    let cfg = LlpConfig {
        seed: 2,
        ..LlpConfig::default()
    };
    let out = run_llp_detailed(&g, &Permutation::identity(g.num_nodes()), &cfg)?;
    for it in &out.iterations {
        println!("{}", it.to_kv_line());
    }

    let codec = CodecConfig::default();
    let id = Permutation::identity(g.num_nodes());
    for (name, p) in [("shuffled", &id), ("llp", &out.permutation)] {
        let stats = measure(&g.apply_permutation(p)?, &codec)?;
        println!(
            "{name:>8}: {:.3} bits/link, block transition rate {:.4}",
            stats.bits_per_link,
            host_transition_rate(&blocks, p)?
        );
    }
    Ok(())
}
