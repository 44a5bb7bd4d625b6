//! Compares orderings on a shuffled block-model graph by the bits/link the
//! codec reaches after renumbering.

use llp_core::codec::CodecConfig;
use llp_core::llp::LlpConfig;
use llp_core::orderings::OrderingSpec;
use llp_core::pipeline::{format_table, run_pipeline, OrderMethod};
use llp_core::synthetic::{sbm_probabilities, stochastic_block_model};
use llp_core::Permutation;

fn main() -> llp_core::Result<()> {
    let (p_in, p_out) = sbm_probabilities(100, 200, 12.0, 3.0);
    let planted = stochastic_block_model(&[200; 100], p_in, p_out, 1);
    let g = planted.apply_permutation(&Permutation::random(planted.num_nodes(), 9))?;
    println!("{} nodes, {} arcs, numbering shuffled\n", g.num_nodes(), g.num_arcs());

    let methods = [
        OrderMethod::Baseline(OrderingSpec::Natural),
        OrderMethod::Baseline(OrderingSpec::Lex),
        OrderMethod::Baseline(OrderingSpec::Gray),
        OrderMethod::Baseline(OrderingSpec::Shingle(1)),
        OrderMethod::Baseline(OrderingSpec::Bfs),
        OrderMethod::Llp(LlpConfig::default()),
    ];
    let rows: Vec<_> = run_pipeline(&g, &methods, &CodecConfig::default())?
        .into_iter()
        .map(|(row, _)| row)
        .collect();
    print!("{}", format_table(&rows, Some("natural")));
    Ok(())
}
