//! Compresses a graph, stores it, loads it back and answers random-access
//! successor queries from the compressed form.

use llp_core::codec::{self, CodecConfig, CompressedGraph};
use llp_core::synthetic::{sbm_probabilities, stochastic_block_model};

fn main() -> llp_core::Result<()> {
    let (p_in, p_out) = sbm_probabilities(50, 100, 10.0, 2.0);
    let g = stochastic_block_model(&[100; 50], p_in, p_out, 1);
    let cfg = CodecConfig::default();

    let cg = codec::compress(&g, &cfg)?;
    let stats = codec::stats_of(&cg, &g)?;
    println!(
        "n={} m={} -> {} bits, {:.3} bits/link, {:.1}% arcs copied",
        g.num_nodes(),
        g.num_arcs(),
        stats.total_bits,
        stats.bits_per_link,
        stats.copied_arc_fraction * 100.0
    );

    let path = std::env::temp_dir().join("llp_codec_roundtrip.bvg");
    cg.write(std::fs::File::create(&path)?)?;
    let loaded = CompressedGraph::read(std::fs::File::open(&path)?)?;
    println!("stored {} bytes at {}", std::fs::metadata(&path)?.len(), path.display());

    for x in [0, 17, 2500, 4999] {
        let (succ, refs) = loaded.successors_traced(x)?;
        assert_eq!(succ, g.successors(x));
        println!("node {x}: {} successors, decoded through {refs} references", succ.len());
    }
    assert_eq!(loaded.decode_graph(), g);
    std::fs::remove_file(&path)?;
    println!("full decode matches");
    Ok(())
}
