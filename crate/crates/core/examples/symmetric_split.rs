//! Splits a directed graph into its symmetric part and the residual arcs,
//! and answers predecessor queries from the split.

use llp_core::synthetic::erdos_renyi;
use llp_core::Graph;

fn main() -> llp_core::Result<()> {
    let small = Graph::from_arcs(4, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 3)])?;
    let split = small.sym_split();
    println!("sym arcs: {:?}", split.sym.arcs().collect::<Vec<_>>());
    println!("residual arcs: {:?}", split.res.arcs().collect::<Vec<_>>());
    println!("predecessors of 2: {:?}", split.predecessors(2));

    let g = erdos_renyi(2000, 0.004, 8);
    let split = g.sym_split();
    let t = g.transpose();
    for x in 0..g.num_nodes() {
        assert_eq!(split.successors(x), g.successors(x));
        assert_eq!(split.predecessors(x), t.successors(x));
    }
    println!(
        "random digraph: {} arcs = {} symmetric + {} residual, {} mutual pairs",
        g.num_arcs(),
        split.sym.num_arcs(),
        split.res.num_arcs(),
        split.num_sym_pairs()
    );
    Ok(())
}
