//! Correlates bits/link with the average gap cost and with the average
//! distance cost across several orderings.

use llp_core::codec::{measure, pearson, CodecConfig};
use llp_core::llp::{run_llp, LlpConfig};
use llp_core::orderings::OrderingSpec;
use llp_core::synthetic::{sbm_probabilities, stochastic_block_model};
use llp_core::Permutation;

fn main() -> llp_core::Result<()> {
    let (p_in, p_out) = sbm_probabilities(100, 200, 12.0, 3.0);
    let g = stochastic_block_model(&[200; 100], p_in, p_out, 3);
    let n = g.num_nodes();

    let orderings = [
        ("random", OrderingSpec::Random(3).order(&g)),
        ("natural", Permutation::identity(n)),
        ("gray", OrderingSpec::Gray.order(&g)),
        ("shingle", OrderingSpec::Shingle(3).order(&g)),
        ("bfs", OrderingSpec::Bfs.order(&g)),
        ("llp", run_llp(&g, &Permutation::identity(n), &LlpConfig::default())?),
    ];
    let (mut bits, mut gap, mut dist) = (Vec::new(), Vec::new(), Vec::new());
    println!("{:>8} {:>10} {:>9} {:>9}", "ordering", "bits/link", "gap", "distance");
    for (name, p) in &orderings {
        let s = measure(&g.apply_permutation(p)?, &CodecConfig::default())?;
        println!(
            "{name:>8} {:>10.3} {:>9.3} {:>9.3}",
            s.bits_per_link, s.avg_gap_cost, s.avg_distance_cost
        );
        bits.push(s.bits_per_link);
        gap.push(s.avg_gap_cost);
        dist.push(s.avg_distance_cost);
    }
    println!("pearson(bits, gap)      = {:.4}", pearson(&bits, &gap)?);
    println!("pearson(bits, distance) = {:.4}", pearson(&bits, &dist)?);
    Ok(())
}
