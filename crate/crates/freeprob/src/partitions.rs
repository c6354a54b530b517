//! Set partitions and the lattice of noncrossing partitions NC(n).
//!
//! A partition of {1,…,n} is stored in canonical form: each block sorted
//! ascending, blocks ordered by their minima. The refinement order (π ≤ σ iff
//! every block of π sits inside a block of σ) makes NC(n) a lattice whose meet
//! agrees with the full partition lattice and whose join does not — `join_nc`
//! returns the NC join, which may be strictly coarser than the set-theoretic
//! one.
//!
//! Enumeration is exhaustive and deterministic (canonical lexicographic
//! order), with hard bounds chosen so results fit comfortably in memory:
//! n ≤ 12 for all set partitions, n ≤ 14 for noncrossing partitions, m ≤ 16
//! for pairings.

use num::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard bound for `enumerate_set_partitions` (Bell(12) ≈ 4.2 million).
pub const MAX_SET_PARTITION_N: usize = 12;
/// Hard bound for `enumerate_nc` (Catalan(14) ≈ 2.7 million).
pub const MAX_NC_N: usize = 14;
/// Hard bound for `enumerate_pairings` (15!! ≈ 2.0 million).
pub const MAX_PAIRING_M: usize = 16;
/// Hard bound for `mobius` (keeps every factor and product well inside i64).
pub const MAX_MOBIUS_N: usize = 10;

/// A partition of {1,…,n} in canonical form.
///
/// Serializes as the bare block list, e.g. `[[1,5,7],[2,4],[3],[6]]`; the
/// ground-set size is recovered from the element count on deserialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<Vec<Vec<usize>>> for Partition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = blocks.iter().map(|b| b.len()).sum();
        Partition::new(n, blocks)
    }
}

impl From<Partition> for Vec<Vec<usize>> {
    fn from(p: Partition) -> Self {
        p.blocks
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            for (j, x) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl Partition {
    /// Build a partition of {1,…,n} from blocks in any order; the result is
    /// canonicalized. Errors if the blocks are not a partition of {1,…,n}.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("partition ground set must be nonempty"));
        }
        let mut seen = vec![false; n + 1];
        let mut count = 0usize;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::invalid("partition blocks must be nonempty"));
            }
            for &x in b {
                if x < 1 || x > n {
                    return Err(Error::invalid(format!(
                        "element {x} outside ground set 1..={n}"
                    )));
                }
                if seen[x] {
                    return Err(Error::invalid(format!("element {x} appears twice")));
                }
                seen[x] = true;
                count += 1;
            }
        }
        if count != n {
            return Err(Error::invalid(format!(
                "blocks cover {count} of {n} elements"
            )));
        }
        let mut blocks: Vec<Vec<usize>> = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Partition { n, blocks })
    }

    /// The discrete partition 0̂ = {1}|{2}|…|{n}.
    pub fn singletons(n: usize) -> Result<Self> {
        Partition::new(n, (1..=n).map(|x| vec![x]).collect())
    }

    /// The full partition 1̂ = {1,…,n}.
    pub fn full(n: usize) -> Result<Self> {
        Partition::new(n, vec![(1..=n).collect()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block sizes in canonical block order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Index (into `blocks()`) of the block containing each element:
    /// entry x−1 is the block of x.
    pub fn block_index_map(&self) -> Vec<usize> {
        let mut map = vec![0usize; self.n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                map[x - 1] = i;
            }
        }
        map
    }

    /// Refinement order: `self` ≤ `coarser` iff every block of `self` is
    /// contained in a block of `coarser`. Errors if the ground sets differ.
    pub fn leq(&self, coarser: &Partition) -> Result<bool> {
        if self.n != coarser.n {
            return Err(Error::invalid(format!(
                "refinement compares partitions of the same set: {} vs {}",
                self.n, coarser.n
            )));
        }
        let co = coarser.block_index_map();
        Ok(self
            .blocks
            .iter()
            .all(|b| b.iter().all(|&x| co[x - 1] == co[b[0] - 1])))
    }

    /// Lattice meet (greatest lower bound): blockwise intersections. The meet
    /// of two noncrossing partitions is again noncrossing, so this is also the
    /// meet in NC(n).
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "meet needs partitions of the same set: {} vs {}",
                self.n, other.n
            )));
        }
        let a = self.block_index_map();
        let b = other.block_index_map();
        let mut by_pair: std::collections::HashMap<(usize, usize), Vec<usize>> =
            std::collections::HashMap::new();
        for x in 1..=self.n {
            by_pair.entry((a[x - 1], b[x - 1])).or_default().push(x);
        }
        Partition::new(self.n, by_pair.into_values().collect())
    }

    /// Join in the lattice NC(n): the set-partition join, then crossing blocks
    /// are merged until none remain. Both inputs must be noncrossing; the
    /// result is the least noncrossing upper bound.
    pub fn join_nc(&self, other: &Partition) -> Result<Partition> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "join_nc needs partitions of the same set: {} vs {}",
                self.n, other.n
            )));
        }
        if !self.is_noncrossing() || !other.is_noncrossing() {
            return Err(Error::invalid("join_nc requires noncrossing inputs"));
        }
        // Set-partition join via union-find.
        let mut dsu = Dsu::new(self.n);
        for b in self.blocks.iter().chain(other.blocks.iter()) {
            for w in b.windows(2) {
                dsu.union(w[0] - 1, w[1] - 1);
            }
        }
        let mut blocks = dsu.blocks();
        // Merge crossing blocks to a fixpoint. Each merge strictly reduces the
        // block count, so this terminates; the result is the least NC upper
        // bound because any crossing pair must share a block in every
        // noncrossing partition above both inputs.
        'outer: loop {
            for i in 0..blocks.len() {
                for j in (i + 1)..blocks.len() {
                    if blocks_cross(&blocks[i], &blocks[j]) {
                        let merged = blocks.swap_remove(j);
                        blocks[i].extend(merged);
                        blocks[i].sort_unstable();
                        continue 'outer;
                    }
                }
            }
            break;
        }
        Partition::new(self.n, blocks)
    }

    /// Whether the partition is noncrossing: no a < b < c < d with a,c in one
    /// block and b,d in another. Linear-time stack test: scanning 1..n, a
    /// block must be completed LIFO — whenever x is not its block's minimum,
    /// its block must be the most recently opened unfinished one.
    pub fn is_noncrossing(&self) -> bool {
        let map = self.block_index_map();
        let mut min = vec![usize::MAX; self.blocks.len()];
        let mut max = vec![0usize; self.blocks.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            min[i] = b[0];
            max[i] = *b.last().unwrap();
        }
        let mut stack: Vec<usize> = Vec::new();
        for x in 1..=self.n {
            let b = map[x - 1];
            if min[b] == x {
                stack.push(b);
            }
            if stack.last() != Some(&b) {
                return false;
            }
            if max[b] == x {
                stack.pop();
            }
        }
        true
    }

    /// Kreweras complement K(π) on NC(n): with blocks acting as increasing
    /// cycles and γ = (1 2 … n), K(π) is the orbit partition of the
    /// permutation π⁻¹γ. It is an order-reversing bijection of NC(n) with
    /// #π + #K(π) = n + 1.
    pub fn kreweras(&self) -> Result<Partition> {
        if !self.is_noncrossing() {
            return Err(Error::invalid("kreweras complement requires a noncrossing partition"));
        }
        let n = self.n;
        let mut pinv = vec![0usize; n + 1];
        for b in &self.blocks {
            // Increasing cycle b[0] → b[1] → … → b[last] → b[0]; its inverse
            // maps each element to its cyclic predecessor.
            for k in 0..b.len() {
                let prev = if k == 0 { b[b.len() - 1] } else { b[k - 1] };
                pinv[b[k]] = prev;
            }
        }
        let orbit_map = orbits(n, |x| pinv[x % n + 1]);
        partition_from_labels(n, &orbit_map)
    }
}

/// Kernel of a word: positions i, j share a block iff word[i−1] == word[j−1].
/// The letters are arbitrary; only their equality pattern matters.
pub fn kernel(word: &[usize]) -> Result<Partition> {
    if word.is_empty() {
        return Err(Error::invalid("kernel needs a nonempty word"));
    }
    let mut first_seen: Vec<usize> = Vec::new();
    let mut labels = vec![0usize; word.len()];
    for (i, &w) in word.iter().enumerate() {
        let pos = first_seen.iter().position(|&f| word[f] == w);
        match pos {
            Some(p) => labels[i] = p,
            None => {
                labels[i] = first_seen.len();
                first_seen.push(i);
            }
        }
    }
    partition_from_labels(word.len(), &labels)
}

/// Möbius function μ(π, σ) of the lattice NC(n), n ≤ 10, for π ≤ σ.
///
/// Computed through the canonical factorization of NC intervals: [π, σ]
/// splits across the blocks V of σ, each factor [π|_V, 1_V] is isomorphic
/// to the product of NC(|W|) over the blocks W of the Kreweras complement
/// of π|_V, and μ(0_k, 1_k) = (−1)^(k−1)·C_(k−1). The whole value is a
/// product of signed Catalan numbers — O(n log n) per block of σ instead
/// of a dynamic program over the interval. Values satisfy |μ| ≤ 4ⁿ
/// (checked), so i64 is ample.
pub fn mobius(p: &Partition, s: &Partition) -> Result<i64> {
    if p.n != s.n {
        return Err(Error::invalid(format!(
            "mobius needs partitions of the same set: {} vs {}",
            p.n, s.n
        )));
    }
    let n = p.n;
    if n > MAX_MOBIUS_N {
        return Err(Error::invalid(format!("mobius supports n ≤ {MAX_MOBIUS_N}, got {n}")));
    }
    if !p.is_noncrossing() || !s.is_noncrossing() {
        return Err(Error::invalid("mobius is defined on NC(n): inputs must be noncrossing"));
    }
    if !p.leq(s)? {
        return Err(Error::invalid("mobius needs π ≤ σ in the refinement order"));
    }

    // Bucket π's blocks by the σ-block containing them.
    let s_map = s.block_index_map();
    let mut buckets: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); s.num_blocks()];
    for b in &p.blocks {
        buckets[s_map[b[0] - 1]].push(b);
    }

    let mut result: i64 = 1;
    for (v, bucket) in s.blocks.iter().zip(&buckets) {
        // Relabel π|_V as a partition of {1,…,|V|}. The relabeling preserves
        // order, hence noncrossingness.
        let relabeled = bucket
            .iter()
            .map(|b| {
                b.iter()
                    .map(|x| v.binary_search(x).expect("block element of a finer block") + 1)
                    .collect()
            })
            .collect();
        let restricted = Partition::new(v.len(), relabeled)?;
        for w in restricted.kreweras()?.blocks() {
            let k = w.len();
            let magnitude = i64::try_from(catalan(k - 1))
                .map_err(|_| Error::numeric("mobius factor exceeds i64"))?;
            let factor = if k % 2 == 1 { magnitude } else { -magnitude };
            result = result
                .checked_mul(factor)
                .ok_or_else(|| Error::numeric("mobius accumulator overflow"))?;
        }
    }
    let bound = 4i64.checked_pow(n as u32).unwrap_or(i64::MAX);
    if result.abs() > bound {
        return Err(Error::numeric(format!("mobius value {result} exceeds 4^{n} bound")));
    }
    Ok(result)
}

/// Embed a partition of {1,…,m} into a partition of {1,…,Σ sizes} by blowing
/// position g up into `sizes[g−1]` consecutive elements: the images of j and k
/// share a block iff their group positions do in `p`.
pub fn hat_embed(p: &Partition, group_sizes: &[usize]) -> Result<Partition> {
    if group_sizes.len() != p.n {
        return Err(Error::invalid(format!(
            "hat_embed needs one group size per element: {} sizes for n = {}",
            group_sizes.len(),
            p.n
        )));
    }
    if group_sizes.iter().any(|&s| s == 0) {
        return Err(Error::invalid("hat_embed group sizes must be ≥ 1"));
    }
    let mut start = vec![0usize; p.n + 1];
    for g in 1..=p.n {
        start[g] = start[g - 1] + group_sizes[g - 1];
    }
    let n_total = start[p.n];
    let blocks = p
        .blocks
        .iter()
        .map(|b| {
            b.iter()
                .flat_map(|&g| (start[g - 1] + 1)..=start[g])
                .collect::<Vec<usize>>()
        })
        .collect();
    Partition::new(n_total, blocks)
}

/// Number of orbits of the permutation γ∘π, where π's blocks act as increasing
/// cycles and γ = (1 2 … n). For a pairing of m points this is the face count
/// of the associated gluing: the genus-expansion exponent is
/// #(γπ) − 1 − m/2, which is 0 exactly on noncrossing pairings.
pub fn gamma_pi_orbits(p: &Partition) -> usize {
    let n = p.n;
    let mut pi = vec![0usize; n + 1];
    for b in &p.blocks {
        for k in 0..b.len() {
            let next = if k + 1 == b.len() { b[0] } else { b[k + 1] };
            pi[b[k]] = next;
        }
    }
    let labels = orbits(n, |x| pi[x] % n + 1);
    labels.iter().copied().max().unwrap_or(0) + 1
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// All partitions of {1,…,n}, canonical lexicographic order. n ≤ 12.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<Partition>> {
    check_enum_bound(n, MAX_SET_PARTITION_N, "set partitions")?;
    let mut out = Vec::new();
    visit_set_partition_blocks(n, &mut |blocks| {
        out.push(Partition {
            n,
            blocks: blocks.to_vec(),
        });
    });
    out.sort_unstable_by(|a, b| a.blocks.cmp(&b.blocks));
    Ok(out)
}

/// All noncrossing partitions of {1,…,n}, canonical lexicographic order.
/// n ≤ 14.
pub fn enumerate_nc(n: usize) -> Result<Vec<Partition>> {
    check_enum_bound(n, MAX_NC_N, "noncrossing partitions")?;
    let mut out = Vec::new();
    visit_nc_blocks(n, &mut |blocks| {
        out.push(Partition {
            n,
            blocks: blocks.to_vec(),
        });
    });
    out.sort_unstable_by(|a, b| a.blocks.cmp(&b.blocks));
    Ok(out)
}

/// All pairings (perfect matchings) of {1,…,m} — optionally only the
/// noncrossing ones — in canonical lexicographic order. m even, ≤ 16;
/// there are (m−1)!! pairings and C_{m/2} noncrossing ones.
pub fn enumerate_pairings(m: usize, noncrossing_only: bool) -> Result<Vec<Partition>> {
    check_enum_bound(m, MAX_PAIRING_M, "pairings")?;
    if m % 2 != 0 {
        return Err(Error::invalid(format!(
            "pairings need an even number of points, got {m}"
        )));
    }
    let mut out = Vec::new();
    visit_pairings(m, &mut |pairs| {
        let q = Partition {
            n: m,
            blocks: pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
        };
        if !noncrossing_only || q.is_noncrossing() {
            out.push(q);
        }
    });
    out.sort_unstable_by(|a, b| a.blocks.cmp(&b.blocks));
    Ok(out)
}

fn check_enum_bound(n: usize, max: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid(format!("enumeration of {what} needs n ≥ 1")));
    }
    if n > max {
        return Err(Error::invalid(format!(
            "enumeration of {what} supports n ≤ {max}, got {n}"
        )));
    }
    Ok(())
}

/// Visit every noncrossing partition of {lo,…,n} exactly once, as a canonical
/// block list (blocks sorted by minimum, each ascending). The slice passed to
/// the callback is reused between calls.
///
/// Recursion: the block of the current minimum is chosen left to right; the
/// gap between consecutive chosen elements is partitioned independently
/// (interval decomposition of NC).
pub(crate) fn visit_nc_blocks(n: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    gen_nc(1, n, &mut blocks, f);
}

fn gen_nc(lo: usize, hi: usize, blocks: &mut Vec<Vec<usize>>, emit: &mut dyn FnMut(&[Vec<usize>])) {
    if lo > hi {
        emit(blocks);
        return;
    }
    blocks.push(vec![lo]);
    let bi = blocks.len() - 1;
    extend_nc(bi, lo, hi, blocks, emit);
    blocks.pop();
}

fn extend_nc(
    bi: usize,
    cur: usize,
    hi: usize,
    blocks: &mut Vec<Vec<usize>>,
    emit: &mut dyn FnMut(&[Vec<usize>]),
) {
    // Close block `bi` at `cur`: the rest of the range is independent.
    gen_nc(cur + 1, hi, blocks, emit);
    // Or extend block `bi` to some t > cur; the gap (cur, t) must then be
    // partitioned within itself to stay noncrossing.
    for t in (cur + 1)..=hi {
        blocks[bi].push(t);
        let mut cont =
            |blocks: &mut Vec<Vec<usize>>, emit: &mut dyn FnMut(&[Vec<usize>])| {
                extend_nc(bi, t, hi, blocks, emit)
            };
        gen_gap(cur + 1, t - 1, blocks, emit, &mut cont);
        blocks[bi].pop();
    }
}

/// Partition {lo,…,hi} in all noncrossing ways, then run `cont`.
fn gen_gap(
    lo: usize,
    hi: usize,
    blocks: &mut Vec<Vec<usize>>,
    emit: &mut dyn FnMut(&[Vec<usize>]),
    cont: &mut dyn FnMut(&mut Vec<Vec<usize>>, &mut dyn FnMut(&[Vec<usize>])),
) {
    if lo > hi {
        cont(blocks, emit);
        return;
    }
    blocks.push(vec![lo]);
    let bi = blocks.len() - 1;
    extend_gap(bi, lo, hi, blocks, emit, cont);
    blocks.pop();
}

fn extend_gap(
    bi: usize,
    cur: usize,
    hi: usize,
    blocks: &mut Vec<Vec<usize>>,
    emit: &mut dyn FnMut(&[Vec<usize>]),
    cont: &mut dyn FnMut(&mut Vec<Vec<usize>>, &mut dyn FnMut(&[Vec<usize>])),
) {
    gen_gap(cur + 1, hi, blocks, emit, cont);
    for t in (cur + 1)..=hi {
        blocks[bi].push(t);
        let mut inner =
            |blocks: &mut Vec<Vec<usize>>, emit: &mut dyn FnMut(&[Vec<usize>])| {
                extend_gap(bi, t, hi, blocks, emit, cont)
            };
        gen_gap(cur + 1, t - 1, blocks, emit, &mut inner);
        blocks[bi].pop();
    }
}

/// Visit every set partition of {1,…,n} (restricted-growth order); the block
/// list is canonical and reused between calls.
pub(crate) fn visit_set_partition_blocks(n: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    gen_set(1, n, &mut blocks, f);
}

fn gen_set(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, emit: &mut dyn FnMut(&[Vec<usize>])) {
    if i > n {
        emit(blocks);
        return;
    }
    for bi in 0..blocks.len() {
        blocks[bi].push(i);
        gen_set(i + 1, n, blocks, emit);
        blocks[bi].pop();
    }
    blocks.push(vec![i]);
    gen_set(i + 1, n, blocks, emit);
    blocks.pop();
}

/// Visit every pairing of {1,…,m} (m even) as (low, high) pairs with
/// increasing lows; the slice is reused between calls.
pub(crate) fn visit_pairings(m: usize, f: &mut dyn FnMut(&[(usize, usize)])) {
    if m % 2 != 0 {
        return;
    }
    let mut remaining: Vec<usize> = (1..=m).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    gen_pairs(&mut remaining, &mut pairs, f);
}

fn gen_pairs(
    remaining: &mut Vec<usize>,
    pairs: &mut Vec<(usize, usize)>,
    emit: &mut dyn FnMut(&[(usize, usize)]),
) {
    if remaining.is_empty() {
        emit(pairs);
        return;
    }
    let a = remaining.remove(0);
    for idx in 0..remaining.len() {
        let b = remaining.remove(idx);
        pairs.push((a, b));
        gen_pairs(remaining, pairs, emit);
        pairs.pop();
        remaining.insert(idx, b);
    }
    remaining.insert(0, a);
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

/// Catalan number Cₙ = |NC(n)|, by the convolution recursion
/// C_{m+1} = Σ_{i} C_i C_{m−i}.
pub fn catalan(n: usize) -> BigUint {
    let mut c: Vec<BigUint> = vec![BigUint::one()];
    for m in 1..=n {
        let next = (0..m).map(|i| &c[i] * &c[m - 1 - i]).sum();
        c.push(next);
    }
    c[n].clone()
}

/// Bell number Bₙ = |P(n)|, by the binomial recursion
/// B_{m+1} = Σ_k (m choose k) B_k.
pub fn bell(n: usize) -> BigUint {
    let mut b: Vec<BigUint> = vec![BigUint::one()];
    let mut pascal: Vec<BigUint> = vec![BigUint::one()];
    for m in 0..n {
        let next = (0..=m).map(|k| &pascal[k] * &b[k]).sum();
        b.push(next);
        let mut row: Vec<BigUint> = vec![BigUint::one()];
        for k in 1..=m {
            row.push(&pascal[k - 1] + &pascal[k]);
        }
        row.push(BigUint::one());
        pascal = row;
    }
    b[n].clone()
}

/// (2k−1)!! = 1·3·5···(2k−1), the number of pairings of 2k points; the empty
/// product (k = 0) is 1.
pub fn double_factorial_odd(k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for j in 1..=k {
        acc *= BigUint::from(2 * j - 1);
    }
    acc
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Orbit labels (0-based, in order of first appearance) of the permutation
/// x ↦ step(x) on {1,…,n}.
fn orbits(n: usize, step: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut label = vec![usize::MAX; n + 1];
    let mut next = 0usize;
    for start in 1..=n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut x = start;
        while label[x] == usize::MAX {
            label[x] = next;
            x = step(x);
        }
        next += 1;
    }
    label[1..].to_vec()
}

fn partition_from_labels(n: usize, labels: &[usize]) -> Result<Partition> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        blocks[l].push(i + 1);
    }
    Partition::new(n, blocks)
}

/// Whether two disjoint sorted blocks cross: scanning their merged elements,
/// the source pattern alternates at least A B A B.
fn blocks_cross(a: &[usize], b: &[usize]) -> bool {
    let mut i = 0;
    let mut j = 0;
    let mut alternations = 0usize;
    let mut last: Option<bool> = None; // true = from a
    while i < a.len() || j < b.len() {
        let from_a = match (i < a.len(), j < b.len()) {
            (true, true) => a[i] < b[j],
            (true, false) => true,
            (false, true) => false,
            (false, false) => unreachable!(),
        };
        if from_a {
            i += 1;
        } else {
            j += 1;
        }
        if last != Some(from_a) {
            alternations += 1;
            last = Some(from_a);
        }
    }
    alternations >= 4
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    /// Blocks as sorted 1-based element lists.
    fn blocks(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: std::collections::HashMap<usize, Vec<usize>> =
            std::collections::HashMap::new();
        for x in 0..n {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x + 1);
        }
        by_root.into_values().collect()
    }
}
