//! Set partitions of the lag-product index set and the moment/cumulant
//! conversion combinatorics built on them.
//!
//! Indices are 0-based: a partition of order `n` covers `{0..n-1}`. Under the
//! first-`q` conjugation convention, index `i` is conjugated iff `i < q`.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Largest order accepted by `enumerate_partitions`; Bell(10) = 115975.
pub const MAX_PARTITION_ORDER: usize = 10;

/// One set partition: disjoint non-empty blocks covering `{0..n-1}`.
///
/// Blocks are ordered by their smallest element and each block's indices are
/// ascending, which is the form produced by restricted-growth enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Number of blocks, `d`.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Block sizes `n_i`.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Conjugation count `q_i` per block under the first-`q` convention.
    pub fn conj_counts(&self, q: usize) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| b.iter().filter(|&&i| i < q).count())
            .collect()
    }

    /// `(n_i, q_i)` per block.
    pub fn signatures(&self, q: usize) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .map(|b| (b.len(), b.iter().filter(|&&i| i < q).count()))
            .collect()
    }

    /// True when every block has even size.
    pub fn all_blocks_even(&self) -> bool {
        self.blocks.iter().all(|b| b.len() % 2 == 0)
    }

    /// The sign-and-count weight `(-1)^(d-1) (d-1)!` of the conversion sum.
    pub fn conversion_weight(&self) -> f64 {
        let d = self.block_count();
        let sign = if (d - 1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * factorial(d - 1)
    }
}

/// All set partitions of `{0..n-1}` in restricted-growth-string
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct PartitionSet {
    pub n: usize,
    pub partitions: Vec<Partition>,
}

impl PartitionSet {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Bell number B(n) for small n, via the Bell triangle.
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Enumerates all set partitions of `{0..n-1}`.
///
/// Restricted growth strings `a` with `a[0] = 0`,
/// `a[i] <= 1 + max(a[..i])` are generated in lexicographic order; string
/// value `a[i] = j` assigns index `i` to block `j`.
pub fn enumerate_partitions(n: usize) -> Result<PartitionSet> {
    if n == 0 || n > MAX_PARTITION_ORDER {
        return Err(Error::config(format!(
            "partition order must be in 1..={MAX_PARTITION_ORDER}, got {n}"
        )));
    }
    let mut partitions = Vec::with_capacity(bell_number(n) as usize);
    let mut rgs = vec![0usize; n];
    loop {
        let block_count = rgs.iter().copied().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); block_count];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        partitions.push(Partition { blocks });

        // Advance to the next restricted growth string.
        let mut i = n;
        loop {
            if i == 1 {
                return Ok(PartitionSet { n, partitions });
            }
            i -= 1;
            let prefix_max = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for v in rgs.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Canonical identity of one block's lag-product moment: the multiset of
/// (delay, conjugated) factor pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockSignature {
    pub factors: Vec<(i64, bool)>,
}

impl BlockSignature {
    /// Signature of `block` within a lag product that has per-index
    /// `delays` (in samples) and the first `q` indices conjugated.
    pub fn of_block(block: &[usize], q: usize, delays: &[i64]) -> Self {
        let mut factors: Vec<(i64, bool)> =
            block.iter().map(|&i| (delays[i], i < q)).collect();
        factors.sort_unstable();
        BlockSignature { factors }
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn conjugations(&self) -> usize {
        self.factors.iter().filter(|&&(_, c)| c).count()
    }
}

impl std::fmt::Display for BlockSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, (d, c)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", d, if *c { "*" } else { "" })?;
        }
        write!(f, "}}")
    }
}

/// Moment-to-cumulant conversion: sums `(-1)^(d-1) (d-1)! prod_i R(v_i)`
/// over all partitions of the order-`n` index set, looking block moments up
/// by signature.
pub fn moment_to_cumulant<T: Scalar>(
    moments: &BTreeMap<BlockSignature, Complex<T>>,
    n: usize,
    q: usize,
    delays: &[i64],
) -> Result<Complex<T>> {
    if delays.len() != n {
        return Err(Error::shape(format!(
            "expected {n} delays, got {}",
            delays.len()
        )));
    }
    if q > n {
        return Err(Error::config(format!("q={q} exceeds n={n}")));
    }
    let set = enumerate_partitions(n)?;
    let mut total = Complex::new(T::zero(), T::zero());
    for partition in &set.partitions {
        let mut product = Complex::new(T::one(), T::zero());
        for block in &partition.blocks {
            let sig = BlockSignature::of_block(block, q, delays);
            let value = moments
                .get(&sig)
                .ok_or_else(|| Error::MissingBlockMoment(sig.to_string()))?;
            product *= *value;
        }
        total += product * T::cast(partition.conversion_weight());
    }
    Ok(total)
}

/// All tuples `(a_1..a_d)`, one entry from each candidate list, whose sum is
/// within `tol` of `beta`. Exhaustive over the cross product.
pub fn frequency_sum_tuples<T: Scalar>(
    candidates_per_block: &[Vec<T>],
    beta: T,
    tol: T,
) -> Vec<Vec<T>> {
    frequency_sum_tuple_indices(candidates_per_block, beta, tol)
        .into_iter()
        .map(|idx| {
            idx.iter()
                .enumerate()
                .map(|(block, &i)| candidates_per_block[block][i])
                .collect()
        })
        .collect()
}

/// Index form of `frequency_sum_tuples`, used when the caller must map
/// matched frequencies back to associated values.
pub fn frequency_sum_tuple_indices<T: Scalar>(
    candidates_per_block: &[Vec<T>],
    beta: T,
    tol: T,
) -> Vec<Vec<usize>> {
    let d = candidates_per_block.len();
    let mut matches = Vec::new();
    if d == 0 || candidates_per_block.iter().any(Vec::is_empty) {
        return matches;
    }
    let mut odometer = vec![0usize; d];
    'outer: loop {
        let sum: T = odometer
            .iter()
            .enumerate()
            .map(|(block, &i)| candidates_per_block[block][i])
            .fold(T::zero(), |acc, v| acc + v);
        if (sum - beta).abs() <= tol {
            matches.push(odometer.clone());
        }
        for pos in (0..d).rev() {
            odometer[pos] += 1;
            if odometer[pos] < candidates_per_block[pos].len() {
                continue 'outer;
            }
            odometer[pos] = 0;
        }
        return matches;
    }
}
