//! Intrinsic baseline orderings.
//!
//! Every function returns a [`Permutation`] mapping old ids to new ranks.
//! Lex and Gray treat successor lists as rows of the adjacency matrix with
//! column 0 first.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Permutation};

/// Name of the hash family used by [`order_shingle`], echoed in reports.
pub const SHINGLE_HASH: &str = "splitmix64";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderingSpec {
    Natural,
    Random(u64),
    Bfs,
    Lex,
    Gray,
    Shingle(u64),
}

impl OrderingSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OrderingSpec::Natural => "natural",
            OrderingSpec::Random(_) => "random",
            OrderingSpec::Bfs => "bfs",
            OrderingSpec::Lex => "lex",
            OrderingSpec::Gray => "gray",
            OrderingSpec::Shingle(_) => "shingle",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            OrderingSpec::Random(s) | OrderingSpec::Shingle(s) => Some(s),
            _ => None,
        }
    }

    /// Parses a kind name, attaching `seed` to the kinds that need one.
    pub fn parse(kind: &str, seed: u64) -> Result<Self> {
        Ok(match kind {
            "natural" => OrderingSpec::Natural,
            "random" => OrderingSpec::Random(seed),
            "bfs" => OrderingSpec::Bfs,
            "lex" => OrderingSpec::Lex,
            "gray" => OrderingSpec::Gray,
            "shingle" => OrderingSpec::Shingle(seed),
            other => return Err(Error::Contract(format!("unknown ordering {other:?}"))),
        })
    }

    pub fn order(&self, g: &Graph) -> Permutation {
        match *self {
            OrderingSpec::Natural => Permutation::identity(g.num_nodes()),
            OrderingSpec::Random(seed) => Permutation::random(g.num_nodes(), seed),
            OrderingSpec::Bfs => order_bfs(g),
            OrderingSpec::Lex => order_lex(g),
            OrderingSpec::Gray => order_gray(g),
            OrderingSpec::Shingle(seed) => order_shingle(g, seed),
        }
    }
}

impl fmt::Display for OrderingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.seed() {
            Some(seed) => write!(f, "{}:{seed}", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for OrderingSpec {
    type Err = Error;

    /// Accepts `kind` or `kind:seed`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, seed) = match s.split_once(':') {
            Some((k, seed)) => (
                k,
                seed.parse::<u64>()
                    .map_err(|e| Error::Contract(format!("bad seed in {s:?}: {e}")))?,
            ),
            None => (s, 0),
        };
        OrderingSpec::parse(kind, seed)
    }
}

fn from_order(order: Vec<NodeId>) -> Permutation {
    Permutation::from_order(&order).expect("orderings visit every node exactly once")
}

/// Breadth-first visit order over out-arcs. Roots are taken in increasing id
/// order among unvisited nodes; successors are enqueued in list order.
pub fn order_bfs(g: &Graph) -> Permutation {
    let n = g.num_nodes();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root as NodeId);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &y in g.successors(x as usize) {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    from_order(order)
}

/// Compares rows lexicographically by columns, a one before a zero: the row
/// holding the smallest differing column sorts first.
pub fn lex_cmp(a: &[NodeId], b: &[NodeId]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x.cmp(y);
        }
    }
    // A strict prefix has a zero where the longer row has a one.
    b.len().cmp(&a.len())
}

/// Reflected Gray comparator on sparse rows.
pub fn gray_cmp(a: &[NodeId], b: &[NodeId]) -> Ordering {
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let next_a = a.get(common);
    let next_b = b.get(common);
    // Which row holds the one at the first differing column.
    let a_has_one = match (next_a, next_b) {
        (None, None) => return Ordering::Equal,
        (Some(_), None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x < y,
    };
    let odd = common % 2 == 1;
    // Even parity: the zero comes first. Odd parity: the one comes first.
    if a_has_one == odd {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn stable_sort_by_rows(g: &Graph, cmp: fn(&[NodeId], &[NodeId]) -> Ordering) -> Permutation {
    let mut order: Vec<NodeId> = (0..g.num_nodes() as NodeId).collect();
    order.sort_by(|&x, &y| cmp(g.successors(x as usize), g.successors(y as usize)));
    from_order(order)
}

pub fn order_lex(g: &Graph) -> Permutation {
    stable_sort_by_rows(g, lex_cmp)
}

pub fn order_gray(g: &Graph) -> Permutation {
    stable_sort_by_rows(g, gray_cmp)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded 64-bit node hash; `index` selects one of the independent functions.
pub fn shingle_hash(seed: u64, index: u64, node: NodeId) -> u64 {
    let key = splitmix64(seed ^ splitmix64(index.wrapping_add(0x5bd1_e995)));
    splitmix64(key ^ u64::from(node))
}

/// Min-hash pair of a successor list; `None` for an empty list.
pub fn shingles(seed: u64, successors: &[NodeId]) -> Option<(u64, u64)> {
    let first = successors.iter().map(|&y| shingle_hash(seed, 0, y)).min()?;
    let second = successors.iter().map(|&y| shingle_hash(seed, 1, y)).min()?;
    Some((first, second))
}

/// Stable sort by the two min-hash shingles; empty lists sort last.
pub fn order_shingle(g: &Graph, seed: u64) -> Permutation {
    let n = g.num_nodes();
    let keys: Vec<(bool, u64, u64)> = (0..n)
        .map(|x| match shingles(seed, g.successors(x)) {
            Some((a, b)) => (false, a, b),
            None => (true, 0, 0),
        })
        .collect();
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.sort_by_key(|&x| keys[x as usize]);
    from_order(order)
}
