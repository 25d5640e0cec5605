//! Partition families that index the bounds.
//!
//! Blocks are sorted lists of 0-based axes and partitions are lists of
//! blocks sorted lexicographically, which gives every object a canonical form
//! and a stable iteration order. Rendering is 1-based: `{1,2},{3}`, with `∅`
//! for the empty family, and a pair `(P, P')` is written `P'|P` (Gaussian
//! blocks left of the bar, deterministic blocks right of it).

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

pub type Block = Vec<usize>;

/// A partition of a ground set into nonempty disjoint blocks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Partition {
    blocks: Vec<Block>,
}

impl Partition {
    /// Canonicalizes `blocks`; checks they are nonempty and disjoint.
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let blocks = canonical_blocks(blocks)?;
        Ok(Partition { blocks })
    }

    pub fn empty() -> Self {
        Partition { blocks: vec![] }
    }

    pub fn singletons(elems: &[usize]) -> Self {
        Partition {
            blocks: elems.iter().map(|&e| vec![e]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Union of the blocks, ascending.
    pub fn ground(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        g.sort_unstable();
        g
    }

    pub fn is_partition_of(&self, ground: &[usize]) -> bool {
        let mut g = ground.to_vec();
        g.sort_unstable();
        self.ground() == g
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_blocks(&self.blocks))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for Partition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Partition::new(parse_blocks(s)?)
    }
}

/// A pair `(P, P')` of disjoint block families whose union partitions `[d]`.
/// `P` holds the deterministic (unit vector) blocks and `P'` the Gaussian ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionPair {
    pub p: Vec<Block>,
    pub p_prime: Vec<Block>,
}

impl PartitionPair {
    pub fn new(p: Vec<Block>, p_prime: Vec<Block>) -> Result<Self> {
        let p = canonical_blocks(p)?;
        let p_prime = canonical_blocks(p_prime)?;
        if p.iter().flatten().any(|a| p_prime.iter().flatten().any(|b| a == b)) {
            return Err(invalid("P and P' share an element"));
        }
        Ok(PartitionPair { p, p_prime })
    }

    /// `(P, singletons of [d] minus the ground of P)`: the pair behind `|||A|||_P`.
    pub fn for_triple_norm(order: usize, p: &Partition) -> Self {
        let ground = p.ground();
        let rest: Vec<usize> = (0..order).filter(|a| !ground.contains(a)).collect();
        PartitionPair {
            p: p.blocks.clone(),
            p_prime: rest.into_iter().map(|a| vec![a]).collect(),
        }
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        let mut all: Vec<usize> = self.p.iter().chain(&self.p_prime).flatten().copied().collect();
        if all.iter().any(|&a| a >= order) {
            return Err(invalid(format!("partition pair {self} refers to axes beyond d = {order}")));
        }
        all.sort_unstable();
        let before = all.len();
        all.dedup();
        if all.len() != before || all.len() != order {
            return Err(invalid(format!("{self} is not a partition pair of [{order}]")));
        }
        Ok(())
    }

    /// Union of the deterministic blocks, ascending.
    pub fn deterministic_axes(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.p.iter().flatten().copied().collect();
        g.sort_unstable();
        g
    }

    pub fn gaussian_axes(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.p_prime.iter().flatten().copied().collect();
        g.sort_unstable();
        g
    }

    /// Merges `P` and `P'` back into one partition of `[d]`.
    pub fn merged(&self) -> Partition {
        let mut blocks: Vec<Block> = self.p.iter().chain(&self.p_prime).cloned().collect();
        blocks.sort();
        Partition { blocks }
    }

    /// `|P'|` singletons only: then `||A||_{P'|P} = |||A|||_P`.
    pub fn gaussians_are_singletons(&self) -> bool {
        self.p_prime.iter().all(|b| b.len() == 1)
    }
}

impl fmt::Display for PartitionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", fmt_blocks(&self.p_prime), fmt_blocks(&self.p))
    }
}

impl Serialize for PartitionPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for PartitionPair {
    type Err = Error;
    /// Parses `P'|P`, e.g. `{1}|{2},{3}` or `∅|{1,2}`.
    fn from_str(s: &str) -> Result<Self> {
        let (left, right) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("partition pair `{s}` needs a `|`")))?;
        PartitionPair::new(parse_blocks(right)?, parse_blocks(left)?)
    }
}

/// A covering sequence `(J, I_1, .., I_k)` of subsets of `[d]`.
///
/// Every element lies in at least one and at most two of the sets; the `I`
/// blocks are nonempty and kept sorted, so sequences that differ only by the
/// order of the `I` blocks compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MSequence {
    pub j: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl MSequence {
    pub fn new(mut j: Vec<usize>, blocks: Vec<Block>) -> Self {
        j.sort_unstable();
        let mut blocks: Vec<Block> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort();
        MSequence { j, blocks }
    }

    /// `|M| = k + 1`.
    pub fn size(&self) -> usize {
        self.blocks.len() + 1
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        let mut count = vec![0usize; order];
        for &a in self.j.iter().chain(self.blocks.iter().flatten()) {
            if a >= order {
                return Err(invalid(format!("sequence {self} refers to axes beyond d = {order}")));
            }
            count[a] += 1;
        }
        if self.blocks.iter().any(Vec::is_empty) {
            return Err(invalid(format!("sequence {self} has an empty block")));
        }
        if self.j.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(format!("sequence {self} repeats an element of J")));
        }
        if count.iter().any(|&c| c == 0 || c > 2) {
            return Err(invalid(format!(
                "sequence {self} must cover each element of [{order}] once or twice"
            )));
        }
        Ok(())
    }

    /// Membership in the reduced class: `J` disjoint from the blocks, and
    /// overlapping blocks only as equal singletons.
    pub fn in_class_c(&self) -> bool {
        if self.j.iter().any(|a| self.blocks.iter().any(|b| b.contains(a))) {
            return false;
        }
        for (l, bl) in self.blocks.iter().enumerate() {
            for bm in &self.blocks[l + 1..] {
                let meet = bl.iter().any(|a| bm.contains(a));
                if meet && !(bl.len() == 1 && bm.len() == 1 && bl == bm) {
                    return false;
                }
            }
        }
        true
    }

    /// Splits a class-C sequence into `(I, J, P)`: the doubled singletons,
    /// the `l_2` set, and the remaining blocks.
    pub fn to_exp_triple(&self) -> Option<ExpTriple> {
        if !self.in_class_c() {
            return None;
        }
        let mut doubled = Vec::new();
        let mut rest = Vec::new();
        let mut k = 0;
        while k < self.blocks.len() {
            let b = &self.blocks[k];
            if k + 1 < self.blocks.len() && self.blocks[k + 1] == *b {
                doubled.push(b[0]);
                k += 2;
            } else {
                rest.push(b.clone());
                k += 1;
            }
        }
        Some(ExpTriple {
            i: doubled,
            j: self.j.clone(),
            p: Partition { blocks: rest },
        })
    }
}

impl fmt::Display for MSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", fmt_block(&self.j))?;
        for b in &self.blocks {
            write!(f, ",{}", fmt_block(b))?;
        }
        f.write_str(")")
    }
}

/// Index triple `(I, J, P)` of a term in the exponential-chaos bound:
/// `I` fixed by a max, `J` summed in `l_2`, `P` a partition of the rest.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExpTriple {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub p: Partition,
}

impl ExpTriple {
    /// Shape up to relabelling of axes: `(|I|, |J|, sorted block sizes)`.
    pub fn shape(&self) -> (usize, usize, Vec<usize>) {
        let mut sizes: Vec<usize> = self.p.blocks.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        (self.i.len(), self.j.len(), sizes)
    }
}

impl fmt::Display for ExpTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I={} J={} P={}", fmt_block(&self.i), fmt_block(&self.j), self.p)
    }
}

pub fn fmt_block(b: &[usize]) -> String {
    let inner: Vec<String> = b.iter().map(|a| (a + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

pub fn fmt_blocks(blocks: &[Block]) -> String {
    if blocks.is_empty() {
        return "∅".to_string();
    }
    blocks.iter().map(|b| fmt_block(b)).collect::<Vec<_>>().join(",")
}

/// Parses `{1,2},{3}`; `∅`, `{}` and the empty string mean no blocks.
pub fn parse_blocks(s: &str) -> Result<Vec<Block>> {
    let s = s.trim();
    if s.is_empty() || s == "∅" || s == "{}" {
        return Ok(vec![]);
    }
    let mut blocks = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('{')
            .ok_or_else(|| Error::Parse(format!("expected `{{` in `{s}`")))?;
        let close = open
            .find('}')
            .ok_or_else(|| Error::Parse(format!("unclosed block in `{s}`")))?;
        let mut block = Vec::new();
        for tok in open[..close].split(',') {
            let v: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad element `{tok}` in `{s}`")))?;
            if v == 0 {
                return Err(Error::Parse(format!("elements are 1-based in `{s}`")));
            }
            block.push(v - 1);
        }
        blocks.push(block);
        rest = open[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        }
    }
    Ok(blocks)
}

fn canonical_blocks(blocks: Vec<Block>) -> Result<Vec<Block>> {
    let mut seen = Vec::new();
    let mut out = Vec::with_capacity(blocks.len());
    for mut b in blocks {
        if b.is_empty() {
            return Err(invalid("empty block"));
        }
        b.sort_unstable();
        for &a in &b {
            if seen.contains(&a) {
                return Err(invalid(format!("element {} appears twice", a + 1)));
            }
            seen.push(a);
        }
        out.push(b);
    }
    out.sort();
    Ok(out)
}

/// All partitions of `ground`, each exactly once, in a fixed order.
pub fn enumerate_partitions(ground: &[usize]) -> Vec<Partition> {
    let mut elems = ground.to_vec();
    elems.sort_unstable();
    elems.dedup();
    let mut out = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    grow(&elems, 0, &mut blocks, &mut out);
    out
}

// restricted growth: element k joins an existing block or opens a new one
fn grow(elems: &[usize], k: usize, blocks: &mut Vec<Block>, out: &mut Vec<Partition>) {
    if k == elems.len() {
        let mut b = blocks.clone();
        b.sort();
        out.push(Partition { blocks: b });
        return;
    }
    for j in 0..blocks.len() {
        blocks[j].push(elems[k]);
        grow(elems, k + 1, blocks, out);
        blocks[j].pop();
    }
    blocks.push(vec![elems[k]]);
    grow(elems, k + 1, blocks, out);
    blocks.pop();
}

/// All `(P, P')` with `P ∪ P'` a partition of `[d]`.
pub fn enumerate_partition_pairs(order: usize) -> Vec<PartitionPair> {
    let ground: Vec<usize> = (0..order).collect();
    let mut out = Vec::new();
    for pi in enumerate_partitions(&ground) {
        let k = pi.len();
        for mask in 0u32..(1 << k) {
            let mut p = Vec::new();
            let mut pp = Vec::new();
            for (b, block) in pi.blocks.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    p.push(block.clone());
                } else {
                    pp.push(block.clone());
                }
            }
            out.push(PartitionPair { p, p_prime: pp });
        }
    }
    out
}

/// All subsets `J ⊆ [d]` (ascending by bitmask) paired with each partition of `J`.
pub fn enumerate_subset_partitions(order: usize) -> Vec<(Vec<usize>, Partition)> {
    let mut out = Vec::new();
    for j in subsets(order) {
        for p in enumerate_partitions(&j) {
            out.push((j.clone(), p));
        }
    }
    out
}

/// Subsets of `[d]` in bitmask order.
pub fn subsets(order: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << order))
        .map(|mask| (0..order).filter(|a| mask & (1 << a) != 0).collect())
        .collect()
}

/// The covering family `M([d])`, one canonical representative per sequence.
pub fn enumerate_m(order: usize) -> Vec<MSequence> {
    let full: u32 = (1 << order) - 1;
    let mut out = Vec::new();
    for jmask in 0..=full {
        let mut count = vec![0u8; order];
        for (a, c) in count.iter_mut().enumerate() {
            *c = ((jmask >> a) & 1) as u8;
        }
        let mut chosen = Vec::new();
        m_blocks(order, jmask, 1, &mut count, &mut chosen, &mut out);
    }
    out.sort();
    out
}

// multisets of nonempty block masks in nondecreasing order, each element used at most twice
fn m_blocks(
    order: usize,
    jmask: u32,
    min_mask: u32,
    count: &mut [u8],
    chosen: &mut Vec<u32>,
    out: &mut Vec<MSequence>,
) {
    if count.iter().all(|&c| c >= 1) {
        let to_vec = |mask: u32| -> Vec<usize> { (0..order).filter(|a| mask & (1 << a) != 0).collect() };
        out.push(MSequence::new(
            to_vec(jmask),
            chosen.iter().map(|&m| to_vec(m)).collect(),
        ));
    }
    let full: u32 = (1 << order) - 1;
    for mask in min_mask..=full {
        if (0..order).any(|a| mask & (1 << a) != 0 && count[a] >= 2) {
            continue;
        }
        for (a, c) in count.iter_mut().enumerate() {
            if mask & (1 << a) != 0 {
                *c += 1;
            }
        }
        chosen.push(mask);
        m_blocks(order, jmask, mask, count, chosen, out);
        chosen.pop();
        for (a, c) in count.iter_mut().enumerate() {
            if mask & (1 << a) != 0 {
                *c -= 1;
            }
        }
    }
}

/// Keeps the sequences of the reduced class.
pub fn filter_class_c(seqs: &[MSequence]) -> Vec<MSequence> {
    seqs.iter().filter(|m| m.in_class_c()).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_triangle(k: usize) -> u64 {
        // Bell triangle recurrence, independent of the enumeration above
        let mut row = vec![1u64];
        for _ in 0..k {
            let mut next = vec![*row.last().unwrap()];
            for v in &row {
                let last = *next.last().unwrap();
                next.push(last + v);
            }
            row = next;
        }
        row[0]
    }

    #[test]
    fn bell_numbers() {
        let expected = [1u64, 1, 2, 5, 15, 52, 203];
        for (k, &b) in expected.iter().enumerate() {
            let ground: Vec<usize> = (0..k).collect();
            assert_eq!(enumerate_partitions(&ground).len() as u64, b);
            assert_eq!(bell_triangle(k), b);
        }
        assert_eq!(enumerate_partitions(&[]), vec![Partition::empty()]);
        assert_eq!(enumerate_partitions(&[0]), vec![Partition::singletons(&[0])]);
    }

    #[test]
    fn partitions_are_distinct_and_valid() {
        let ground: Vec<usize> = (0..5).collect();
        let mut all = enumerate_partitions(&ground);
        assert!(all.iter().all(|p| p.is_partition_of(&ground)));
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 52);
    }

    #[test]
    fn pair_counts() {
        let d1 = enumerate_partition_pairs(1);
        assert_eq!(d1.len(), 2);
        assert!(d1.contains(&PartitionPair::new(vec![vec![0]], vec![]).unwrap()));
        assert!(d1.contains(&PartitionPair::new(vec![], vec![vec![0]]).unwrap()));
        assert_eq!(enumerate_partition_pairs(2).len(), 6);
        assert_eq!(enumerate_partition_pairs(3).len(), 22);
        for pair in enumerate_partition_pairs(4) {
            pair.validate(4).unwrap();
            // merge and re-split by membership
            let merged = pair.merged();
            let p: Vec<Block> = merged.blocks().iter().filter(|b| pair.p.contains(b)).cloned().collect();
            let pp: Vec<Block> = merged.blocks().iter().filter(|b| !pair.p.contains(b)).cloned().collect();
            assert_eq!(PartitionPair::new(p, pp).unwrap(), pair);
        }
    }

    #[test]
    fn subset_partition_counts() {
        let d1 = enumerate_subset_partitions(1);
        assert_eq!(d1.len(), 2);
        assert_eq!(d1[0], (vec![], Partition::empty()));
        assert_eq!(enumerate_subset_partitions(2).len(), 5);
        assert_eq!(enumerate_subset_partitions(3).len(), 15);
    }

    #[test]
    fn m_family_d1() {
        let m = enumerate_m(1);
        let want = [
            MSequence::new(vec![0], vec![]),
            MSequence::new(vec![], vec![vec![0]]),
            MSequence::new(vec![0], vec![vec![0]]),
            MSequence::new(vec![], vec![vec![0], vec![0]]),
        ];
        assert_eq!(m.len(), want.len());
        for w in &want {
            assert!(m.contains(w), "missing {w}");
        }
    }

    #[test]
    fn m_family_invariants() {
        for d in 1..=3 {
            let all = enumerate_m(d);
            let mut dedup = all.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
            for s in &all {
                s.validate(d).unwrap();
            }
        }
    }

    #[test]
    fn class_c_examples() {
        let rejected = MSequence::new(vec![0], vec![vec![0]]);
        assert!(!rejected.in_class_c());
        let kept = MSequence::new(vec![], vec![vec![0], vec![0]]);
        assert!(kept.in_class_c());
        let overlap = MSequence::new(vec![], vec![vec![0, 1], vec![0]]);
        assert!(!overlap.in_class_c());
        assert_eq!(filter_class_c(&enumerate_m(1)).len(), 3);
    }

    #[test]
    fn class_c_matches_exp_triples() {
        // class C is in bijection with disjoint I, J and a partition of the rest
        for d in 1..=4 {
            let mut from_c: Vec<ExpTriple> = filter_class_c(&enumerate_m(d))
                .iter()
                .map(|m| m.to_exp_triple().unwrap())
                .collect();
            from_c.sort();
            let mut direct = Vec::new();
            for i in subsets(d) {
                for j in subsets(d) {
                    if j.iter().any(|a| i.contains(a)) {
                        continue;
                    }
                    let rest: Vec<usize> = (0..d).filter(|a| !i.contains(a) && !j.contains(a)).collect();
                    for p in enumerate_partitions(&rest) {
                        direct.push(ExpTriple { i: i.clone(), j: j.clone(), p });
                    }
                }
            }
            direct.sort();
            assert_eq!(from_c, direct, "d = {d}");
        }
    }

    #[test]
    fn rendering_and_parsing() {
        let pair: PartitionPair = "{1}|{2},{3}".parse().unwrap();
        assert_eq!(pair.p, vec![vec![1], vec![2]]);
        assert_eq!(pair.p_prime, vec![vec![0]]);
        assert_eq!(pair.to_string(), "{1}|{2},{3}");
        let det: PartitionPair = "∅|{1,2,3}".parse().unwrap();
        assert_eq!(det.to_string(), "∅|{1,2,3}");
        assert_eq!("|{1}".parse::<PartitionPair>().unwrap(), "∅|{1}".parse().unwrap());
        assert!("{1}{2}".parse::<PartitionPair>().is_err());
        assert!("{0}|{1}".parse::<PartitionPair>().is_err());
        assert!("{1}|{1}".parse::<PartitionPair>().is_err());
        let p: Partition = "{3},{1,2}".parse().unwrap();
        assert_eq!(p.to_string(), "{1,2},{3}");
    }
}
