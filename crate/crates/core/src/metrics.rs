//! Partition measures for judging how well an ordering recovers a known
//! grouping of the nodes (hosts, planted blocks). Logarithms are base 2.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};

use crate::error::{check_len, Error, Result};
use crate::graph::Permutation;

/// Node -> class map with dense class ids and their sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<u32>,
    class_sizes: Vec<usize>,
}

impl Partition {
    /// Builds a partition from arbitrary class ids, renumbered densely in
    /// order of first appearance.
    pub fn from_classes<T: std::hash::Hash + Eq>(classes: impl IntoIterator<Item = T>) -> Self {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let mut class_of = Vec::new();
        let mut class_sizes = Vec::new();
        for c in classes {
            let next = ids.len() as u32;
            let id = *ids.entry(c).or_insert(next);
            if id as usize == class_sizes.len() {
                class_sizes.push(0);
            }
            class_sizes[id as usize] += 1;
            class_of.push(id);
        }
        Partition { class_of, class_sizes }
    }

    /// Reads one class name per line; names are arbitrary strings.
    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut names = Vec::new();
        for line in BufReader::new(source).lines() {
            let line = line?;
            let name = line.trim();
            if !name.is_empty() {
                names.push(name.to_owned());
            }
        }
        Ok(Partition::from_classes(names))
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn class_of(&self, x: usize) -> u32 {
        self.class_of[x]
    }

    pub fn classes(&self) -> &[u32] {
        &self.class_of
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn num_classes(&self) -> usize {
        self.class_sizes.len()
    }

    /// Every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut parent = vec![u32::MAX; self.num_classes()];
        self.class_of.iter().zip(&coarser.class_of).all(|(&fine, &coarse)| {
            let slot = &mut parent[fine as usize];
            if *slot == u32::MAX {
                *slot = coarse;
            }
            *slot == coarse
        })
    }

    /// Same grouping of nodes, regardless of class numbering.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.num_classes() == other.num_classes() && self.refines(other)
    }
}

/// Fraction of rank-adjacent pairs whose nodes lie in different classes.
pub fn host_transition_rate(h: &Partition, p: &Permutation) -> Result<f64> {
    check_len(h.len(), p.len())?;
    let n = h.len();
    if n < 2 {
        return Err(Error::UndefinedMeasure("host transitions need at least two nodes"));
    }
    let order = p.inverse();
    let order = order.as_slice();
    let transitions = order
        .windows(2)
        .filter(|w| h.class_of(w[0] as usize) != h.class_of(w[1] as usize))
        .count();
    Ok(transitions as f64 / (n - 1) as f64)
}

fn plogp(count: usize, n: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        let p = count as f64 / n;
        p * p.log2()
    }
}

pub fn entropy(s: &Partition) -> f64 {
    let n = s.len() as f64;
    -s.class_sizes.iter().map(|&c| plogp(c, n)).sum::<f64>()
}

pub fn mutual_information(s: &Partition, t: &Partition) -> Result<f64> {
    check_len(s.len(), t.len())?;
    let n = s.len() as f64;
    // Sorted so the summation order, and hence the result, is reproducible.
    let mut joint: Vec<(u32, u32)> = s.class_of.iter().copied().zip(t.class_of.iter().copied()).collect();
    joint.sort_unstable();
    let mut total = 0.0;
    for run in joint.chunk_by(|x, y| x == y) {
        let (a, b) = run[0];
        let p_st = run.len() as f64 / n;
        let p_s = s.class_sizes[a as usize] as f64 / n;
        let p_t = t.class_sizes[b as usize] as f64 / n;
        total += p_st * (p_st / (p_s * p_t)).log2();
    }
    Ok(total)
}

/// `H(s) + H(t) - 2 I(s, t)`, clamped at zero against rounding.
pub fn variation_of_information(s: &Partition, t: &Partition) -> Result<f64> {
    let i = mutual_information(s, t)?;
    Ok((entropy(s) + entropy(t) - 2.0 * i).max(0.0))
}

/// Splits every class of `h` into maximal runs of consecutive ranks under `p`.
pub fn induced_refinement(h: &Partition, p: &Permutation) -> Result<Partition> {
    check_len(h.len(), p.len())?;
    let order = p.inverse();
    let mut run_of = vec![0u32; h.len()];
    let mut run = 0u32;
    let mut prev_class = None;
    for &x in order.as_slice() {
        let class = h.class_of(x as usize);
        if prev_class.is_some_and(|c| c != class) {
            run += 1;
        }
        prev_class = Some(class);
        run_of[x as usize] = run;
    }
    Ok(Partition::from_classes(run_of))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HostStats {
    pub host_transition_rate: f64,
    pub host_entropy: f64,
    pub refinement_entropy: f64,
    pub variation_of_information: f64,
}

pub fn host_stats(h: &Partition, p: &Permutation) -> Result<HostStats> {
    let refined = induced_refinement(h, p)?;
    Ok(HostStats {
        host_transition_rate: host_transition_rate(h, p)?,
        host_entropy: entropy(h),
        refinement_entropy: entropy(&refined),
        variation_of_information: variation_of_information(h, &refined)?,
    })
}
