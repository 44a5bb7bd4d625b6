//! Host-recovery measures: how many host changes an ordering makes and how
//! badly it fragments the hosts.

use llp_core::llp::{run_llp, LlpConfig};
use llp_core::metrics::{host_stats, Partition};
use llp_core::orderings::OrderingSpec;
use llp_core::synthetic::{block_membership, sbm_probabilities, stochastic_block_model};
use llp_core::Permutation;

fn main() -> llp_core::Result<()> {
    // Hosts of uneven size, each one densely linked inside.
    let sizes: Vec<usize> = (0..60).map(|i| 20 + (i * 37) % 180).collect();
    let n: usize = sizes.iter().sum();
    let (p_in, _) = sbm_probabilities(sizes.len(), 100, 10.0, 0.0);
    let planted = stochastic_block_model(&sizes, p_in, 2.0 / n as f64, 5);
    let hosts = Partition::from_classes(block_membership(&sizes));

    let orderings = [
        ("natural", Permutation::identity(n)),
        ("random", OrderingSpec::Random(5).order(&planted)),
        ("bfs", OrderingSpec::Bfs.order(&planted)),
        (
            "llp",
            run_llp(&planted, &Permutation::identity(n), &LlpConfig::default())?,
        ),
    ];
    println!(
        "{:>8} {:>8} {:>8} {:>10} {:>8}",
        "ordering", "HT", "H(H)", "H(H|pi)", "VI"
    );
    for (name, p) in &orderings {
        let s = host_stats(&hosts, p)?;
        println!(
            "{name:>8} {:>8.4} {:>8.3} {:>10.3} {:>8.3}",
            s.host_transition_rate, s.host_entropy, s.refinement_entropy, s.variation_of_information
        );
    }
    Ok(())
}
