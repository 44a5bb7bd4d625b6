//! BV-style compressed adjacency lists with random access.
//!
//! Each node is written as follows (no intervalisation):
//!
//! ```text
//! outdegree d                 gamma(d + 1)
//! if d > 0:
//!   reference distance r      gamma(r + 1), 0 <= r <= window, 0 = no reference
//!   if r > 0:
//!     block count b           gamma(b + 1)
//!     first block length      gamma(len + 1)
//!     other block lengths     gamma(len)        (always >= 1)
//!   residuals, in order:
//!     first                   code(2(s - x) + 2) if s >= x, code(2(x - s) + 1) otherwise
//!     following               code(s_i - s_{i-1})
//! ```
//!
//! Blocks alternate copied/skipped over the referenced list, starting with a
//! copied block; whatever follows the explicit blocks is copied when `b` is
//! even and skipped when it is odd. The residual count is `d` minus the
//! number of copied arcs.

use std::io::{Read, Write};

use crate::codes::{gamma_len, BitReader, BitWriter, Code};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

const FILE_MAGIC: &[u8; 8] = b"LLPBVCG1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodecConfig {
    pub window: usize,
    pub max_ref_chain: usize,
    pub residual_code: Code,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            window: 7,
            max_ref_chain: 3,
            residual_code: Code::Zeta(3),
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        self.residual_code.validate().map(|_| ())
    }

    fn code_tag(&self) -> u64 {
        match self.residual_code {
            Code::Gamma => 0,
            Code::Delta => 1,
            Code::Zeta(k) => 2 | (u64::from(k) << 8),
        }
    }

    fn from_tags(window: u64, max_ref_chain: u64, tag: u64) -> Result<Self> {
        let residual_code = match tag & 0xff {
            0 => Code::Gamma,
            1 => Code::Delta,
            2 => Code::Zeta((tag >> 8) as u32),
            other => return Err(Error::Format(format!("unknown residual code tag {other}"))),
        }
        .validate()?;
        Ok(CodecConfig {
            window: window as usize,
            max_ref_chain: max_ref_chain as usize,
            residual_code,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionStats {
    pub bits_per_link: f64,
    pub copied_arc_fraction: f64,
    pub avg_gap_cost: f64,
    pub avg_distance_cost: f64,
    pub total_bits: u64,
    pub arcs: u64,
    pub copied_arcs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedGraph {
    n: usize,
    m: u64,
    words: Vec<u64>,
    len_bits: u64,
    /// `n + 1` bit positions; the last one is the stream length.
    offsets: Vec<u64>,
    config: CodecConfig,
    copied_arcs: u64,
}

/// How one successor list is written.
#[derive(Debug, Default)]
struct Plan {
    reference: usize,
    blocks: Vec<u64>,
    residuals: Vec<NodeId>,
    copied: u64,
    bits: u64,
}

#[inline]
fn first_residual_value(x: usize, s: NodeId) -> u64 {
    let d = s as i64 - x as i64;
    if d >= 0 {
        2 * d as u64 + 2
    } else {
        2 * d.unsigned_abs() + 1
    }
}

#[inline]
fn first_residual_target(x: usize, v: u64) -> i64 {
    if v.is_multiple_of(2) {
        x as i64 + (v as i64 - 2) / 2
    } else {
        x as i64 - (v as i64 - 1) / 2
    }
}

fn residual_bits(x: usize, residuals: &[NodeId], code: Code) -> u64 {
    let mut bits = 0;
    let mut prev = 0;
    for (i, &s) in residuals.iter().enumerate() {
        bits += if i == 0 {
            code.len(first_residual_value(x, s))
        } else {
            code.len((s - prev) as u64)
        };
        prev = s;
    }
    bits
}

/// Splits `list` against `reference` into copy blocks and residuals.
fn plan_with_reference(x: usize, r: usize, list: &[NodeId], reference: &[NodeId], code: Code, plan: &mut Plan) {
    plan.reference = r;
    plan.blocks.clear();
    plan.residuals.clear();
    plan.copied = 0;

    let mut copying = true;
    let mut run = 0u64;
    let mut j = 0;
    for &y in reference {
        while j < list.len() && list[j] < y {
            plan.residuals.push(list[j]);
            j += 1;
        }
        let hit = j < list.len() && list[j] == y;
        if hit {
            j += 1;
            plan.copied += 1;
        }
        if hit == copying {
            run += 1;
        } else {
            plan.blocks.push(run);
            copying = hit;
            run = 1;
        }
    }
    plan.residuals.extend_from_slice(&list[j..]);
    // The last run is implicit.

    let mut bits = gamma_len(list.len() as u64 + 1) + gamma_len(r as u64 + 1);
    bits += gamma_len(plan.blocks.len() as u64 + 1);
    for (i, &len) in plan.blocks.iter().enumerate() {
        bits += gamma_len(if i == 0 { len + 1 } else { len });
    }
    bits += residual_bits(x, &plan.residuals, code);
    plan.bits = bits;
}

fn plan_plain(x: usize, list: &[NodeId], code: Code, plan: &mut Plan) {
    plan.reference = 0;
    plan.blocks.clear();
    plan.residuals.clear();
    plan.residuals.extend_from_slice(list);
    plan.copied = 0;
    plan.bits = gamma_len(list.len() as u64 + 1);
    if !list.is_empty() {
        plan.bits += gamma_len(1) + residual_bits(x, list, code);
    }
}

fn write_plan(w: &mut BitWriter, x: usize, degree: usize, plan: &Plan, code: Code) {
    w.write_gamma(degree as u64 + 1);
    if degree == 0 {
        return;
    }
    w.write_gamma(plan.reference as u64 + 1);
    if plan.reference > 0 {
        w.write_gamma(plan.blocks.len() as u64 + 1);
        for (i, &len) in plan.blocks.iter().enumerate() {
            w.write_gamma(if i == 0 { len + 1 } else { len });
        }
    }
    let mut prev = 0;
    for (i, &s) in plan.residuals.iter().enumerate() {
        let v = if i == 0 {
            first_residual_value(x, s)
        } else {
            (s - prev) as u64
        };
        code.write(w, v);
        prev = s;
    }
}

/// Greedy exact-cost compression: each node picks, among the previous
/// `window` nodes whose reference chain is shorter than `max_ref_chain`, the
/// reference that minimises its own encoded length. Ties go to the smaller
/// distance, and "no reference" counts as distance 0.
pub fn compress(g: &Graph, cfg: &CodecConfig) -> Result<CompressedGraph> {
    cfg.validate()?;
    let n = g.num_nodes();
    let code = cfg.residual_code;
    let mut w = BitWriter::new();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut depth = vec![0usize; n];
    let mut copied_arcs = 0;
    let mut best = Plan::default();
    let mut candidate = Plan::default();

    for x in 0..n {
        offsets.push(w.len());
        let list = g.successors(x);
        plan_plain(x, list, code, &mut best);
        if !list.is_empty() && cfg.max_ref_chain > 0 {
            for r in 1..=cfg.window.min(x) {
                let y = x - r;
                if depth[y] >= cfg.max_ref_chain {
                    continue;
                }
                plan_with_reference(x, r, list, g.successors(y), code, &mut candidate);
                if candidate.bits < best.bits {
                    std::mem::swap(&mut best, &mut candidate);
                }
            }
        }
        if best.reference > 0 {
            depth[x] = depth[x - best.reference] + 1;
        }
        copied_arcs += best.copied;
        let before = w.len();
        write_plan(&mut w, x, list.len(), &best, code);
        debug_assert_eq!(w.len() - before, best.bits);
    }
    offsets.push(w.len());

    let len_bits = w.len();
    Ok(CompressedGraph {
        n,
        m: g.num_arcs() as u64,
        words: w.into_words(),
        len_bits,
        offsets,
        config: *cfg,
        copied_arcs,
    })
}

impl CompressedGraph {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_arcs(&self) -> u64 {
        self.m
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn bit_len(&self) -> u64 {
        self.len_bits
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn copied_arcs(&self) -> u64 {
        self.copied_arcs
    }

    pub fn bits_per_link(&self) -> Result<f64> {
        if self.m == 0 {
            return Err(Error::UndefinedMeasure("bits per link of a graph without arcs"));
        }
        Ok(self.len_bits as f64 / self.m as f64)
    }

    /// Successor list of `x`, decoded from the bit stream.
    pub fn successors(&self, x: usize) -> Result<Vec<NodeId>> {
        self.successors_traced(x).map(|(list, _)| list)
    }

    /// Like [`successors`](Self::successors), also returning how many
    /// references were followed transitively.
    pub fn successors_traced(&self, x: usize) -> Result<(Vec<NodeId>, usize)> {
        if x >= self.n {
            return Err(Error::Contract(format!("node {x} out of range 0..{}", self.n)));
        }
        let mut refs = 0;
        let list = self.decode(x, &mut refs);
        Ok((list, refs))
    }

    fn decode(&self, x: usize, refs: &mut usize) -> Vec<NodeId> {
        let code = self.config.residual_code;
        let mut r = BitReader::new(&self.words, self.len_bits);
        r.set_position(self.offsets[x]);
        let degree = (r.read_gamma() - 1) as usize;
        if degree == 0 {
            return Vec::new();
        }
        let reference = (r.read_gamma() - 1) as usize;
        let mut copied = Vec::new();
        if reference > 0 {
            let block_count = (r.read_gamma() - 1) as usize;
            let mut blocks = Vec::with_capacity(block_count);
            for i in 0..block_count {
                let v = r.read_gamma();
                blocks.push(if i == 0 { v - 1 } else { v });
            }
            *refs += 1;
            let ref_list = self.decode(x - reference, refs);
            let mut pos = 0usize;
            for (i, &len) in blocks.iter().enumerate() {
                let end = pos + len as usize;
                if i % 2 == 0 {
                    copied.extend_from_slice(&ref_list[pos..end]);
                }
                pos = end;
            }
            if block_count.is_multiple_of(2) {
                copied.extend_from_slice(&ref_list[pos..]);
            }
        }
        let residual_count = degree - copied.len();
        let mut residuals = Vec::with_capacity(residual_count);
        let mut prev = 0i64;
        for i in 0..residual_count {
            let v = code.read(&mut r);
            prev = if i == 0 {
                first_residual_target(x, v)
            } else {
                prev + v as i64
            };
            residuals.push(prev as NodeId);
        }
        if copied.is_empty() {
            return residuals;
        }
        let mut out = Vec::with_capacity(degree);
        let (mut i, mut j) = (0, 0);
        while i < copied.len() && j < residuals.len() {
            if copied[i] < residuals[j] {
                out.push(copied[i]);
                i += 1;
            } else {
                out.push(residuals[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&copied[i..]);
        out.extend_from_slice(&residuals[j..]);
        out
    }

    pub fn decode_graph(&self) -> Graph {
        let mut offsets = Vec::with_capacity(self.n + 1);
        let mut targets = Vec::with_capacity(self.m as usize);
        offsets.push(0);
        let mut refs = 0;
        for x in 0..self.n {
            targets.extend(self.decode(x, &mut refs));
            offsets.push(targets.len());
        }
        Graph::from_csr(offsets, targets)
    }

    fn count_copied_arcs(&self) -> u64 {
        (0..self.n).map(|x| self.copied_at(x)).sum()
    }

    /// Number of arcs of `x` obtained from its reference.
    fn copied_at(&self, x: usize) -> u64 {
        let mut r = BitReader::new(&self.words, self.len_bits);
        r.set_position(self.offsets[x]);
        if r.read_gamma() == 1 {
            return 0;
        }
        let reference = (r.read_gamma() - 1) as usize;
        if reference == 0 {
            return 0;
        }
        let block_count = (r.read_gamma() - 1) as usize;
        let mut explicit = 0;
        let mut copied = 0;
        for i in 0..block_count {
            let v = r.read_gamma();
            let len = if i == 0 { v - 1 } else { v };
            explicit += len;
            if i % 2 == 0 {
                copied += len;
            }
        }
        if block_count.is_multiple_of(2) {
            let mut refs = 0;
            copied += self.decode(x - reference, &mut refs).len() as u64 - explicit;
        }
        copied
    }

    /// Header, `n + 1` little-endian offsets, then the bit stream packed
    /// most-significant-bit first.
    pub fn write<W: Write>(&self, sink: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(sink);
        out.write_all(FILE_MAGIC)?;
        for v in [
            self.n as u64,
            self.m,
            self.config.window as u64,
            self.config.max_ref_chain as u64,
            self.config.code_tag(),
            self.len_bits,
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for &o in &self.offsets {
            out.write_all(&o.to_le_bytes())?;
        }
        let bytes = self.len_bits.div_ceil(8) as usize;
        let mut written = 0;
        for w in &self.words {
            let chunk = w.to_be_bytes();
            let take = (bytes - written).min(8);
            out.write_all(&chunk[..take])?;
            written += take;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut src = std::io::BufReader::new(source);
        let mut magic = [0u8; 8];
        src.read_exact(&mut magic)?;
        if &magic != FILE_MAGIC {
            return Err(Error::Format("not a compressed graph file".into()));
        }
        let mut header = [0u64; 6];
        for v in header.iter_mut() {
            let mut b = [0u8; 8];
            src.read_exact(&mut b)?;
            *v = u64::from_le_bytes(b);
        }
        let [n, m, window, max_ref_chain, tag, len_bits] = header;
        let config = CodecConfig::from_tags(window, max_ref_chain, tag)?;
        let n = usize::try_from(n).map_err(|_| Error::Format("node count too large".into()))?;
        let mut offsets = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let mut b = [0u8; 8];
            src.read_exact(&mut b)?;
            offsets.push(u64::from_le_bytes(b));
        }
        if offsets.windows(2).any(|p| p[0] > p[1]) || offsets.last() != Some(&len_bits) {
            return Err(Error::Format("inconsistent offsets".into()));
        }
        let mut bytes = vec![0u8; len_bits.div_ceil(8) as usize];
        src.read_exact(&mut bytes)?;
        let words = bytes
            .chunks(8)
            .map(|c| {
                let mut b = [0u8; 8];
                b[..c.len()].copy_from_slice(c);
                u64::from_be_bytes(b)
            })
            .collect();
        let mut cg = CompressedGraph {
            n,
            m,
            words,
            len_bits,
            offsets,
            config,
            copied_arcs: 0,
        };
        cg.copied_arcs = cg.count_copied_arcs();
        Ok(cg)
    }
}

/// Mean over arcs of `log2` of the gap that encodes each arc: the first
/// successor `s` of `x` costs `log2(|s - x| + 1)`, the others cost
/// `log2(s_i - s_{i-1})`.
pub fn avg_gap_cost(g: &Graph) -> Result<f64> {
    if g.num_arcs() == 0 {
        return Err(Error::UndefinedMeasure("average gap cost of a graph without arcs"));
    }
    let mut total = 0.0;
    for x in 0..g.num_nodes() {
        let succ = g.successors(x);
        if let Some(&first) = succ.first() {
            total += ((first as f64 - x as f64).abs() + 1.0).log2();
        }
        for pair in succ.windows(2) {
            total += ((pair[1] - pair[0]) as f64).log2();
        }
    }
    Ok(total / g.num_arcs() as f64)
}

/// Mean over arcs `(x, y)` of `log2|x - y|`; self-loops contribute 0.
pub fn avg_distance_cost(g: &Graph) -> Result<f64> {
    if g.num_arcs() == 0 {
        return Err(Error::UndefinedMeasure("average distance cost of a graph without arcs"));
    }
    let total: f64 = g
        .arcs()
        .filter(|&(x, y)| x != y)
        .map(|(x, y)| (x.abs_diff(y) as f64).log2())
        .sum();
    Ok(total / g.num_arcs() as f64)
}

pub fn measure(g: &Graph, cfg: &CodecConfig) -> Result<CompressionStats> {
    if g.num_arcs() == 0 {
        return Err(Error::UndefinedMeasure(
            "compression statistics of a graph without arcs",
        ));
    }
    let cg = compress(g, cfg)?;
    stats_of(&cg, g)
}

pub fn stats_of(cg: &CompressedGraph, g: &Graph) -> Result<CompressionStats> {
    let m = cg.num_arcs();
    Ok(CompressionStats {
        bits_per_link: cg.bits_per_link()?,
        copied_arc_fraction: cg.copied_arcs() as f64 / m as f64,
        avg_gap_cost: avg_gap_cost(g)?,
        avg_distance_cost: avg_distance_cost(g)?,
        total_bits: cg.bit_len(),
        arcs: m,
        copied_arcs: cg.copied_arcs(),
    })
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedMeasure("correlation needs at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedMeasure("correlation with zero variance"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Permutation;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut arcs = Vec::new();
        for x in 0..n as NodeId {
            for y in 0..n as NodeId {
                if rng.random::<f64>() < p {
                    arcs.push((x, y));
                }
            }
        }
        Graph::from_arcs(n, arcs).unwrap()
    }

    #[test]
    fn empty_graph_has_empty_stream() {
        let cg = compress(&Graph::empty(0), &CodecConfig::default()).unwrap();
        assert_eq!(cg.bit_len(), 0);
        assert_eq!(cg.offsets(), &[0]);
        assert!(cg.bits_per_link().is_err());
    }

    #[test]
    fn identical_lists_copy_everything() {
        let g =
            Graph::from_successor_lists(vec![vec![2, 3, 5], vec![2, 3, 5], vec![], vec![], vec![], vec![]]).unwrap();
        let cg = compress(&g, &CodecConfig::default()).unwrap();
        let mut r = BitReader::new(&cg.words, cg.len_bits);
        r.set_position(cg.offsets()[1]);
        assert_eq!(r.read_gamma() - 1, 3, "outdegree");
        assert_eq!(r.read_gamma() - 1, 1, "reference distance");
        assert_eq!(
            r.read_gamma() - 1,
            0,
            "block count: the implicit block copies the whole list"
        );
        assert_eq!(r.position(), cg.offsets()[2], "no residuals follow");
        assert_eq!(cg.copied_arcs(), 3);
        assert_eq!(cg.successors(1).unwrap(), vec![2, 3, 5]);
    }

    #[test]
    fn hand_traced_layout() {
        // Node 1 = {0, 2, 4, 9}, reference node 0 = {0, 1, 2, 3}: mask 1 0 1 0,
        // runs copied 1, skipped 1, copied 1, skipped 1 (implicit), so b = 3.
        let g = Graph::from_successor_lists(vec![
            vec![0, 1, 2, 3],
            vec![0, 2, 4, 9],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
        ])
        .unwrap();
        let cfg = CodecConfig {
            residual_code: Code::Gamma,
            ..CodecConfig::default()
        };
        let mut list = Plan::default();
        plan_with_reference(1, 1, g.successors(1), g.successors(0), Code::Gamma, &mut list);
        assert_eq!(list.blocks, vec![1, 1, 1]);
        assert_eq!(list.residuals, vec![4, 9]);
        assert_eq!(list.copied, 2);
        // gamma(5) + gamma(2) + gamma(4) + gamma(2) + gamma(1) + gamma(1)
        // + gamma(2 * 3 + 2) + gamma(5)
        assert_eq!(list.bits, 5 + 3 + 5 + 3 + 1 + 1 + 7 + 5);
        let cg = compress(&g, &cfg).unwrap();
        assert_eq!(cg.decode_graph(), g);
    }

    #[test]
    fn first_residual_mapping() {
        for x in [0usize, 1, 7, 100] {
            for s in 0..120u32 {
                let v = first_residual_value(x, s);
                assert!(v >= 2);
                assert_eq!(first_residual_target(x, v), s as i64);
            }
        }
        assert_eq!(first_residual_value(5, 5), 2);
        assert_eq!(first_residual_value(5, 4), 3);
        assert_eq!(first_residual_value(5, 6), 4);
    }

    #[test]
    fn random_access_matches_full_decode() {
        let g = random_graph(120, 0.05, 1);
        let cg = compress(&g, &CodecConfig::default()).unwrap();
        assert_eq!(cg.decode_graph(), g);
        let mut order: Vec<usize> = (0..120).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
        for x in order {
            assert_eq!(cg.successors(x).unwrap(), g.successors(x));
        }
        assert!(cg.successors(120).is_err());
    }

    #[test]
    fn empty_successor_list() {
        let g = Graph::from_arcs(3, [(0, 1)]).unwrap();
        let cg = compress(&g, &CodecConfig::default()).unwrap();
        assert!(cg.successors(2).unwrap().is_empty());
    }

    #[test]
    fn zero_chain_means_pure_gap_coding() {
        let g = Graph::from_successor_lists((0..30).map(|_| vec![1, 4, 8, 9]).collect()).unwrap();
        let cfg = CodecConfig {
            max_ref_chain: 0,
            ..CodecConfig::default()
        };
        let cg = compress(&g, &cfg).unwrap();
        assert_eq!(cg.copied_arcs(), 0);
        assert_eq!(cg.decode_graph(), g);
        let stats = measure(&g, &cfg).unwrap();
        assert_eq!(stats.copied_arc_fraction, 0.0);
    }

    #[test]
    fn chain_limit_is_respected() {
        let g = Graph::from_successor_lists((0..40).map(|_| vec![1, 4, 8, 9]).collect()).unwrap();
        for limit in 0..5 {
            let cfg = CodecConfig {
                max_ref_chain: limit,
                window: 1,
                ..CodecConfig::default()
            };
            let cg = compress(&g, &cfg).unwrap();
            let deepest = (0..40).map(|x| cg.successors_traced(x).unwrap().1).max().unwrap();
            assert_eq!(deepest, limit);
        }
    }

    #[test]
    fn duplicated_lists_copy_almost_everything() {
        let g = Graph::from_successor_lists((0..25).map(|_| vec![0, 3, 4, 10, 24]).collect()).unwrap();
        let m = g.num_arcs() as f64;
        for window in [1, 7] {
            let cfg = CodecConfig {
                window,
                max_ref_chain: usize::MAX,
                ..CodecConfig::default()
            };
            let stats = measure(&g, &cfg).unwrap();
            assert!(stats.copied_arc_fraction >= (m - 5.0) / m);
        }
    }

    #[test]
    fn gap_cost_hand_value() {
        let g = Graph::from_arcs(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!((avg_gap_cost(&g).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(avg_gap_cost(&Graph::empty(3)).is_err());
        assert!(measure(&Graph::empty(3), &CodecConfig::default()).is_err());
    }

    #[test]
    fn distance_cost_is_reversal_invariant() {
        let n = 50;
        let path = Graph::from_arcs(n, (0..n as NodeId - 1).map(|x| (x, x + 1))).unwrap();
        let rev = Permutation::from_vec((0..n as NodeId).rev().collect()).unwrap();
        let a = avg_distance_cost(&path).unwrap();
        let b = avg_distance_cost(&path.apply_permutation(&rev).unwrap()).unwrap();
        assert_eq!(a, b);
        let loops = Graph::from_arcs(2, [(0, 0), (1, 1)]).unwrap();
        assert_eq!(avg_distance_cost(&loops).unwrap(), 0.0);
    }

    #[test]
    fn bits_per_link_from_offsets() {
        let g = random_graph(80, 0.1, 5);
        let cg = compress(&g, &CodecConfig::default()).unwrap();
        let from_offsets = *cg.offsets().last().unwrap() as f64 / g.num_arcs() as f64;
        assert_eq!(cg.bits_per_link().unwrap(), from_offsets);
        assert!(cg.offsets().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let g = random_graph(90, 0.08, 9);
        for code in [Code::Gamma, Code::Delta, Code::Zeta(3)] {
            let cfg = CodecConfig {
                residual_code: code,
                ..CodecConfig::default()
            };
            let cg = compress(&g, &cfg).unwrap();
            let mut a = Vec::new();
            cg.write(&mut a).unwrap();
            let mut b = Vec::new();
            compress(&g, &cfg).unwrap().write(&mut b).unwrap();
            assert_eq!(a, b);
            let back = CompressedGraph::read(a.as_slice()).unwrap();
            assert_eq!(back, cg);
        }
        assert!(CompressedGraph::read(&b"garbage!garbage!"[..]).is_err());
    }

    #[test]
    fn pearson_cases() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 1.5 - 2.0).collect();
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|v| -v).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(pearson(&[1.0], &[2.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn pearson_longhand() {
        let xs = [2.0, 4.0, 4.5, 7.0, 1.0, 3.3, 8.2, 6.1, 5.5, 0.4];
        let ys = [1.1, 3.9, 4.0, 6.2, 2.5, 2.9, 9.1, 5.0, 6.6, 1.0];
        // Longhand: sums of products over raw values.
        let n = 10.0;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|v| v * v).sum();
        let syy: f64 = ys.iter().map(|v| v * v).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let expected = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        assert!((pearson(&xs, &ys).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn larger_window_never_costs_more_without_chain_limit() {
        for seed in 0..30 {
            let g = random_graph(100, 0.03 + seed as f64 * 0.004, seed);
            let mut prev = u64::MAX;
            for window in 0..10 {
                let cfg = CodecConfig {
                    window,
                    max_ref_chain: usize::MAX,
                    ..CodecConfig::default()
                };
                let bits = compress(&g, &cfg).unwrap().bit_len();
                assert!(bits <= prev, "seed {seed} window {window}");
                prev = bits;
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(
            n in 1usize..80,
            arcs in prop::collection::vec((0u32..80, 0u32..80), 0..400),
            window in 0usize..9,
            chain in 0usize..5,
            tag in 0u8..4,
        ) {
            let arcs: Vec<_> = arcs.into_iter().map(|(x, y)| (x % n as u32, y % n as u32)).collect();
            let g = Graph::from_arcs(n, arcs).unwrap();
            let code = [Code::Gamma, Code::Delta, Code::Zeta(3), Code::Zeta(1)][tag as usize];
            let cfg = CodecConfig { window, max_ref_chain: chain, residual_code: code };
            let cg = compress(&g, &cfg).unwrap();
            prop_assert_eq!(cg.decode_graph(), g.clone());
            for x in 0..n {
                let (list, refs) = cg.successors_traced(x).unwrap();
                prop_assert!(refs <= chain);
                prop_assert_eq!(list.as_slice(), g.successors(x));
            }
        }
    }
}
