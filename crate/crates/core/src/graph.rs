//! Immutable directed graphs, permutations and the file formats used to move
//! them between pipeline stages.
//!
//! A [`Graph`] stores successor lists in compressed-row form: one offsets
//! array of length `n + 1` and one targets array of length `m`. Every list is
//! strictly increasing.

use std::io::{BufRead, BufReader, Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

/// Dense node identifier in `0..n`.
pub type NodeId = u32;

const BINARY_MAGIC: &[u8; 8] = b"LLPGRPH1";
const MAX_NODES: u64 = NodeId::MAX as u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeListFormat {
    Text,
    Binary,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.num_nodes())
            .field("m", &self.num_arcs())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    /// Builds a graph from an arbitrary arc list. Arcs are sorted and
    /// duplicates collapsed.
    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if n as u64 > MAX_NODES {
            return Err(Error::Contract(format!("{n} nodes exceed the id space")));
        }
        let mut arcs: Vec<(NodeId, NodeId)> = arcs.into_iter().collect();
        if let Some(&(x, y)) = arcs.iter().find(|&&(x, y)| x as usize >= n || y as usize >= n) {
            return Err(Error::Contract(format!("arc ({x}, {y}) outside 0..{n}")));
        }
        arcs.sort_unstable();
        arcs.dedup();
        Ok(Self::from_sorted_arcs(n, &arcs))
    }

    /// `arcs` must be sorted, deduplicated and in range.
    fn from_sorted_arcs(n: usize, arcs: &[(NodeId, NodeId)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(x, _) in arcs {
            offsets[x as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Graph {
            offsets,
            targets: arcs.iter().map(|&(_, y)| y).collect(),
        }
    }

    /// Builds a graph from per-node successor lists, sorting and
    /// deduplicating each one.
    pub fn from_successor_lists(lists: Vec<Vec<NodeId>>) -> Result<Self> {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (x, mut list) in lists.into_iter().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&y) = list.last() {
                if y as usize >= n {
                    return Err(Error::Contract(format!("arc ({x}, {y}) outside 0..{n}")));
                }
            }
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Ok(Graph { offsets, targets })
    }

    /// Assembles a graph from CSR parts whose lists are already strictly
    /// increasing and in range.
    pub(crate) fn from_csr(offsets: Vec<usize>, targets: Vec<NodeId>) -> Self {
        debug_assert_eq!(offsets.last().copied(), Some(targets.len()));
        Graph { offsets, targets }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, x: usize) -> &[NodeId] {
        &self.targets[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn outdegree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn has_arc(&self, x: usize, y: NodeId) -> bool {
        self.successors(x).binary_search(&y).is_ok()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes()).flat_map(move |x| self.successors(x).iter().map(move |&y| (x as NodeId, y)))
    }

    pub fn apply_permutation(&self, p: &Permutation) -> Result<Graph> {
        let n = self.num_nodes();
        check_len(n, p.len())?;
        let mut offsets = vec![0usize; n + 1];
        for x in 0..n {
            offsets[p.get(x) as usize + 1] = self.outdegree(x);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut targets = vec![0 as NodeId; self.num_arcs()];
        for x in 0..n {
            let start = offsets[p.get(x) as usize];
            let dst = &mut targets[start..start + self.outdegree(x)];
            for (slot, &y) in dst.iter_mut().zip(self.successors(x)) {
                *slot = p.get(y as usize);
            }
            dst.sort_unstable();
        }
        Ok(Graph { offsets, targets })
    }

    pub fn transpose(&self) -> Graph {
        let n = self.num_nodes();
        let mut offsets = vec![0usize; n + 1];
        for &y in &self.targets {
            offsets[y as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0 as NodeId; self.num_arcs()];
        // Scanning sources in increasing order keeps every transposed list sorted.
        for x in 0..n {
            for &y in self.successors(x) {
                targets[cursor[y as usize]] = x as NodeId;
                cursor[y as usize] += 1;
            }
        }
        Graph { offsets, targets }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.num_nodes()).all(|x| {
            self.successors(x)
                .iter()
                .all(|&y| self.has_arc(y as usize, x as NodeId))
        })
    }

    /// Union of the graph with its transpose.
    pub fn symmetrize(&self) -> Graph {
        let t = self.transpose();
        let n = self.num_nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(self.num_arcs() * 2);
        offsets.push(0);
        for x in 0..n {
            merge_union(self.successors(x), t.successors(x), &mut targets);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn sym_split(&self) -> SymSplit {
        let n = self.num_nodes();
        let mut sym_arcs = Vec::new();
        let mut res_arcs = Vec::new();
        for x in 0..n {
            for &y in self.successors(x) {
                if self.has_arc(y as usize, x as NodeId) {
                    sym_arcs.push((x as NodeId, y));
                } else {
                    res_arcs.push((x as NodeId, y));
                }
            }
        }
        let res = Graph::from_sorted_arcs(n, &res_arcs);
        let res_t = res.transpose();
        SymSplit {
            sym: Graph::from_sorted_arcs(n, &sym_arcs),
            res,
            res_t,
        }
    }

    pub fn num_self_loops(&self) -> usize {
        (0..self.num_nodes()).filter(|&x| self.has_arc(x, x as NodeId)).count()
    }

    pub fn load_edge_list<R: Read>(source: R, format: EdgeListFormat) -> Result<Graph> {
        match format {
            EdgeListFormat::Text => read_text(source),
            EdgeListFormat::Binary => read_binary(source),
        }
    }

    pub fn store_edge_list<W: Write>(&self, sink: W, format: EdgeListFormat) -> Result<()> {
        match format {
            EdgeListFormat::Text => self.write_text(sink),
            EdgeListFormat::Binary => self.write_binary(sink),
        }
    }

    fn write_text<W: Write>(&self, sink: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(sink);
        writeln!(out, "# nodes: {}", self.num_nodes())?;
        for (x, y) in self.arcs() {
            writeln!(out, "{x} {y}")?;
        }
        out.flush()?;
        Ok(())
    }

    fn write_binary<W: Write>(&self, sink: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(sink);
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(self.num_nodes() as u64).to_le_bytes())?;
        out.write_all(&(self.num_arcs() as u64).to_le_bytes())?;
        let mut buf = Vec::new();
        for x in 0..self.num_nodes() {
            let succ = self.successors(x);
            buf.clear();
            write_varint(&mut buf, succ.len() as u64);
            let mut prev = 0u64;
            for (i, &y) in succ.iter().enumerate() {
                let y = y as u64;
                write_varint(&mut buf, if i == 0 { y } else { y - prev });
                prev = y;
            }
            out.write_all(&buf)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn merge_union(a: &[NodeId], b: &[NodeId], out: &mut Vec<NodeId>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

fn parse_header(line: &str) -> Option<&str> {
    line.trim_start_matches('#')
        .trim()
        .strip_prefix("nodes:")
        .map(str::trim)
}

fn read_text<R: Read>(source: R) -> Result<Graph> {
    let reader = BufReader::new(source);
    let mut declared: Option<u64> = None;
    let mut arcs = Vec::new();
    let mut max_id: Option<u64> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(value) = parse_header(line) {
                let n = value.parse::<u64>().map_err(|e| Error::Parse {
                    line: lineno,
                    message: format!("bad node count {value:?}: {e}"),
                })?;
                if n > MAX_NODES {
                    return Err(Error::Range {
                        line: lineno,
                        id: n,
                        limit: MAX_NODES,
                    });
                }
                declared = Some(n);
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two node ids, got {line:?}"),
            });
        };
        let limit = declared.unwrap_or(MAX_NODES);
        let mut parse_id = |tok: &str| -> Result<NodeId> {
            let id = tok.parse::<u64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad node id {tok:?}: {e}"),
            })?;
            if id >= limit {
                return Err(Error::Range {
                    line: lineno,
                    id,
                    limit,
                });
            }
            max_id = Some(max_id.map_or(id, |m| m.max(id)));
            Ok(id as NodeId)
        };
        let x = parse_id(a)?;
        let y = parse_id(b)?;
        arcs.push((x, y));
    }
    let n = match declared {
        Some(n) => n as usize,
        None => max_id.map_or(0, |m| m as usize + 1),
    };
    Graph::from_arcs(n, arcs)
}

fn write_varint(buf: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            buf.push(byte);
            return;
        }
        buf.push(byte | 0x80);
    }
}

fn read_varint<R: Read>(src: &mut R) -> Result<u64> {
    let mut value = 0u64;
    let mut shift = 0;
    loop {
        let mut byte = [0u8];
        src.read_exact(&mut byte)?;
        if shift >= 64 {
            return Err(Error::Format("varint overflow".into()));
        }
        value |= u64::from(byte[0] & 0x7f) << shift;
        if byte[0] & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

fn read_u64<R: Read>(src: &mut R) -> Result<u64> {
    let mut bytes = [0u8; 8];
    src.read_exact(&mut bytes)?;
    Ok(u64::from_le_bytes(bytes))
}

fn read_binary<R: Read>(source: R) -> Result<Graph> {
    let mut src = BufReader::new(source);
    let mut magic = [0u8; 8];
    src.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Format("not a binary graph file".into()));
    }
    let n = read_u64(&mut src)?;
    let m = read_u64(&mut src)?;
    if n > MAX_NODES {
        return Err(Error::Format(format!("node count {n} exceeds the id space")));
    }
    let n = n as usize;
    let mut offsets = Vec::with_capacity(n + 1);
    let mut targets = Vec::with_capacity(m as usize);
    offsets.push(0);
    for x in 0..n {
        let d = read_varint(&mut src)?;
        let mut prev = 0u64;
        for i in 0..d {
            let delta = read_varint(&mut src)?;
            let y = if i == 0 { delta } else { prev + delta };
            if (i > 0 && delta == 0) || y >= n as u64 {
                return Err(Error::Format(format!("bad successor {y} of node {x}")));
            }
            targets.push(y as NodeId);
            prev = y;
        }
        offsets.push(targets.len());
    }
    if targets.len() as u64 != m {
        return Err(Error::Format(format!(
            "header declares {m} arcs, found {}",
            targets.len()
        )));
    }
    Ok(Graph { offsets, targets })
}

/// A bijection from old node ids to new node ids: `map[old] = new`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<NodeId>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n as NodeId).collect(),
        }
    }

    pub fn from_vec(map: Vec<NodeId>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            let v = v as usize;
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Contract(format!("not a permutation of 0..{n}: value {v}")));
            }
        }
        Ok(Permutation { map })
    }

    /// Builds the permutation that sends `order[i]` to rank `i`.
    pub fn from_order(order: &[NodeId]) -> Result<Self> {
        let n = order.len();
        let mut map = vec![NodeId::MAX; n];
        for (rank, &x) in order.iter().enumerate() {
            let x = x as usize;
            if x >= n || map[x] != NodeId::MAX {
                return Err(Error::Contract(format!("not an ordering of 0..{n}: node {x}")));
            }
            map[x] = rank as NodeId;
        }
        Ok(Permutation { map })
    }

    /// Seeded uniform permutation (Fisher-Yates over ChaCha8).
    pub fn random(n: usize, seed: u64) -> Self {
        let mut map: Vec<NodeId> = (0..n as NodeId).collect();
        map.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, old: usize) -> NodeId {
        self.map[old]
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.map
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0 as NodeId; self.map.len()];
        for (old, &new) in self.map.iter().enumerate() {
            inv[new as usize] = old as NodeId;
        }
        Permutation { map: inv }
    }

    /// Applies `self` first, then `next`.
    pub fn then(&self, next: &Permutation) -> Result<Permutation> {
        check_len(self.len(), next.len())?;
        Ok(Permutation {
            map: self.map.iter().map(|&v| next.get(v as usize)).collect(),
        })
    }

    /// Reads the one-integer-per-line format. Blank lines and `#` comments
    /// are skipped.
    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut map = Vec::new();
        for (idx, line) in BufReader::new(source).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v = line.parse::<u64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad permutation entry {line:?}: {e}"),
            })?;
            if v > MAX_NODES {
                return Err(Error::Range {
                    line: idx + 1,
                    id: v,
                    limit: MAX_NODES,
                });
            }
            map.push(v as NodeId);
        }
        Permutation::from_vec(map)
    }

    pub fn write<W: Write>(&self, sink: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(sink);
        for v in &self.map {
            writeln!(out, "{v}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Mutual arcs, residual arcs and the transpose of the residual part.
/// Together they answer both successor and predecessor queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymSplit {
    pub sym: Graph,
    pub res: Graph,
    pub res_t: Graph,
}

impl SymSplit {
    /// Unordered mutual pairs; a self-loop counts as one pair.
    pub fn num_sym_pairs(&self) -> usize {
        (self.sym.num_arcs() + self.sym.num_self_loops()) / 2
    }

    pub fn successors(&self, x: usize) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.sym.outdegree(x) + self.res.outdegree(x));
        merge_union(self.sym.successors(x), self.res.successors(x), &mut out);
        out
    }

    pub fn predecessors(&self, x: usize) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.sym.outdegree(x) + self.res_t.outdegree(x));
        merge_union(self.sym.successors(x), self.res_t.successors(x), &mut out);
        out
    }
}
