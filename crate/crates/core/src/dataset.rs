//! Histogram datasets, the L1 metric, adjacency and counting queries.

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};

/// Default cap on the number of histograms an exhaustive enumeration may visit.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_000_000;

/// A histogram of record counts, one entry per record type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dataset {
    histogram: Vec<u64>,
}

impl Dataset {
    pub fn new(histogram: Vec<u64>) -> Self {
        Self { histogram }
    }

    pub fn len(&self) -> usize {
        self.histogram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histogram.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.histogram
    }

    /// Entry `k`, or 0 past the end.
    pub fn count(&self, k: usize) -> u64 {
        nth_total(0, &self.histogram, k)
    }
}

impl From<Vec<u64>> for Dataset {
    fn from(histogram: Vec<u64>) -> Self {
        Self::new(histogram)
    }
}

/// Total list indexing: `default` when `index` is out of range.
pub fn nth_total<T: Copy>(default: T, xs: &[T], index: usize) -> T {
    xs.get(index).copied().unwrap_or(default)
}

fn check_same_len(xs: &Dataset, ys: &Dataset) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(DpError::Dimension {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    Ok(())
}

/// `Σ_i |xs[i] − ys[i]|`.
pub fn dist_l1(xs: &Dataset, ys: &Dataset) -> Result<u64> {
    check_same_len(xs, ys)?;
    Ok(xs
        .histogram
        .iter()
        .zip(&ys.histogram)
        .map(|(&a, &b)| a.abs_diff(b))
        .sum())
}

pub fn is_adjacent(xs: &Dataset, ys: &Dataset, k: u64) -> Result<bool> {
    Ok(dist_l1(xs, ys)? <= k)
}

/// The relation `{(D, D') : |D − D'|₁ ≤ radius}` on histograms of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjacencyRelation {
    pub n: usize,
    pub radius: u64,
}

impl AdjacencyRelation {
    pub fn new(n: usize, radius: u64) -> Self {
        Self { n, radius }
    }

    pub fn contains(&self, xs: &Dataset, ys: &Dataset) -> Result<bool> {
        if xs.len() != self.n {
            return Err(DpError::Dimension {
                expected: self.n,
                actual: xs.len(),
            });
        }
        check_same_len(xs, ys)?;
        is_adjacent(xs, ys, self.radius)
    }
}

/// Walks from `xs` to `ys` one unit at a time, fixing coordinates left to right.
///
/// The returned chain starts at `xs`, ends at `ys`, has at most `k + 1`
/// elements, and consecutive elements are at L1 distance exactly 1.
pub fn adjacency_chain(xs: &Dataset, ys: &Dataset, k: u64) -> Result<Vec<Dataset>> {
    let d = dist_l1(xs, ys)?;
    if d > k {
        return Err(DpError::Infeasible(format!(
            "distance {d} exceeds chain budget {k}"
        )));
    }
    let mut chain = Vec::with_capacity(d as usize + 1);
    let mut cur = xs.histogram.clone();
    chain.push(Dataset::new(cur.clone()));
    for i in 0..cur.len() {
        let target = ys.histogram[i];
        while cur[i] != target {
            if cur[i] < target {
                cur[i] += 1;
            } else {
                cur[i] -= 1;
            }
            chain.push(Dataset::new(cur.clone()));
        }
    }
    Ok(chain)
}

/// Checks that `chain` witnesses `(xs, ys) ∈ R^k` for 1-adjacency.
pub fn verify_chain(chain: &[Dataset], xs: &Dataset, ys: &Dataset, k: u64) -> bool {
    let (Some(first), Some(last)) = (chain.first(), chain.last()) else {
        return false;
    };
    first == xs
        && last == ys
        && chain.len() as u64 <= k + 1
        && chain
            .windows(2)
            .all(|w| matches!(dist_l1(&w[0], &w[1]), Ok(d) if d <= 1))
}

/// A tuple of `m` counting queries over histograms of length `n`.
///
/// Query `i` sums the histogram entries whose type lies in its predicate set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "QuerySetJson", into = "QuerySetJson")]
pub struct CountingQuerySet {
    n: usize,
    members: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct QuerySetJson {
    n: usize,
    queries: Vec<Vec<usize>>,
}

impl TryFrom<QuerySetJson> for CountingQuerySet {
    type Error = DpError;

    fn try_from(raw: QuerySetJson) -> Result<Self> {
        CountingQuerySet::new(raw.n, raw.queries)
    }
}

impl From<CountingQuerySet> for QuerySetJson {
    fn from(q: CountingQuerySet) -> Self {
        let queries = (0..q.m()).map(|i| q.predicate(i)).collect();
        QuerySetJson { n: q.n, queries }
    }
}

impl CountingQuerySet {
    pub fn new(n: usize, predicates: Vec<Vec<usize>>) -> Result<Self> {
        let mut members = Vec::with_capacity(predicates.len());
        for pred in predicates {
            let mut row = vec![false; n];
            for k in pred {
                if k >= n {
                    return Err(DpError::Index { index: k, len: n });
                }
                row[k] = true;
            }
            members.push(row);
        }
        Ok(Self { n, members })
    }

    /// `m` copies of the same predicate.
    pub fn repeated(n: usize, predicate: Vec<usize>, m: usize) -> Result<Self> {
        Self::new(n, vec![predicate; m])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.members.len()
    }

    /// Sorted type indices counted by query `i`.
    pub fn predicate(&self, i: usize) -> Vec<usize> {
        self.members[i]
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
            .collect()
    }

    pub fn counts_type(&self, i: usize, k: usize) -> bool {
        self.members[i].get(k).copied().unwrap_or(false)
    }
}

/// `q_i(D) = Σ_{k ∈ X_{q_i}} D[k]`, with out-of-range entries read as 0.
pub fn counting(q: &CountingQuerySet, i: usize, xs: &Dataset) -> Result<u64> {
    let row = q.members.get(i).ok_or(DpError::Index {
        index: i,
        len: q.m(),
    })?;
    Ok(row
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(k, _)| xs.count(k))
        .sum())
}

/// `(q_0(D), …, q_{m−1}(D))`.
pub fn counting_query(q: &CountingQuerySet, xs: &Dataset) -> Vec<u64> {
    (0..q.m())
        .map(|i| counting(q, i, xs).expect("index in range"))
        .collect()
}

/// Every histogram of length `n` with entries in `0..=max_entry`, in
/// lexicographic order.
pub fn enumerate_histograms(n: usize, max_entry: u64, limit: u128) -> Result<Vec<Dataset>> {
    let base = max_entry as u128 + 1;
    let total = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(base));
    let total = total.unwrap_or(u128::MAX);
    if total > limit {
        return Err(DpError::Capacity {
            required: total,
            limit,
        });
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut cur = vec![0u64; n];
    loop {
        out.push(Dataset::new(cur.clone()));
        // odometer increment, last coordinate fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if cur[pos] < max_entry {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
    }
}

/// Ordered pairs `(D, D')` of distinct enumerated histograms with
/// `|D − D'|₁ ≤ k`.
pub fn neighbor_pairs(
    n: usize,
    max_entry: u64,
    k: u64,
    limit: u128,
) -> Result<Vec<(Dataset, Dataset)>> {
    let all = enumerate_histograms(n, max_entry, limit)?;
    let quad = (all.len() as u128).saturating_mul(all.len() as u128);
    if quad > limit {
        return Err(DpError::Capacity {
            required: quad,
            limit,
        });
    }
    let mut pairs = Vec::new();
    for a in &all {
        for b in &all {
            let d = dist_l1(a, b)?;
            if d >= 1 && d <= k {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(pairs)
}

/// Largest L1 change of the query tuple over all 1-adjacent histograms with
/// entries in `0..=max_entry`.
pub fn counting_sensitivity_exhaustive(
    q: &CountingQuerySet,
    max_entry: u64,
    limit: u128,
) -> Result<u64> {
    let all = enumerate_histograms(q.n(), max_entry, limit)?;
    let mut best = 0u64;
    for d in &all {
        let base = counting_query(q, d);
        for k in 0..q.n() {
            // the +1 neighbour in coordinate k; the −1 neighbour is the same
            // unordered pair seen from the other side
            if d.counts()[k] >= max_entry {
                continue;
            }
            let mut up = d.counts().to_vec();
            up[k] += 1;
            let other = counting_query(q, &Dataset::new(up));
            let diff: u64 = base.iter().zip(&other).map(|(a, b)| a.abs_diff(*b)).sum();
            best = best.max(diff);
        }
    }
    Ok(best)
}

/// Whether `(xs, ys)` satisfy `xs_j ≥ ys_j ∧ xs_j ≤ ys_j + 1` for every `j`.
pub fn dominates_by_at_most_one(xs: &[u64], ys: &[u64]) -> bool {
    xs.len() == ys.len() && xs.iter().zip(ys).all(|(&x, &y)| x >= y && x <= y + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(v: &[u64]) -> Dataset {
        Dataset::new(v.to_vec())
    }

    #[test]
    fn dist_examples() {
        assert_eq!(dist_l1(&ds(&[1, 2]), &ds(&[2, 2])).unwrap(), 1);
        assert_eq!(dist_l1(&ds(&[3, 3]), &ds(&[3, 3])).unwrap(), 0);
        assert_eq!(dist_l1(&ds(&[0, 2, 1]), &ds(&[1, 0, 1])).unwrap(), 3);
        assert!(matches!(
            dist_l1(&ds(&[1]), &ds(&[1, 2])),
            Err(DpError::Dimension { .. })
        ));
    }

    #[test]
    fn adjacency_examples() {
        assert!(is_adjacent(&ds(&[1, 0]), &ds(&[0, 0]), 1).unwrap());
        assert!(!is_adjacent(&ds(&[2, 0]), &ds(&[0, 0]), 1).unwrap());
        assert!(is_adjacent(&ds(&[0, 2]), &ds(&[1, 0]), 3).unwrap());
        let rel = AdjacencyRelation::new(2, 1);
        assert!(rel.contains(&ds(&[1, 0]), &ds(&[0, 0])).unwrap());
        assert!(rel.contains(&ds(&[0, 0]), &ds(&[1, 0])).unwrap());
        assert!(rel.contains(&ds(&[0]), &ds(&[0])).is_err());
    }

    #[test]
    fn chain_examples() {
        let c = adjacency_chain(&ds(&[0, 2]), &ds(&[1, 0]), 3).unwrap();
        assert_eq!(c, vec![ds(&[0, 2]), ds(&[1, 2]), ds(&[1, 1]), ds(&[1, 0])]);
        assert_eq!(adjacency_chain(&ds(&[5]), &ds(&[5]), 0).unwrap(), vec![ds(&[5])]);
        assert_eq!(
            adjacency_chain(&ds(&[0]), &ds(&[1]), 1).unwrap(),
            vec![ds(&[0]), ds(&[1])]
        );
        assert!(matches!(
            adjacency_chain(&ds(&[0]), &ds(&[3]), 2),
            Err(DpError::Infeasible(_))
        ));
    }

    #[test]
    fn counting_examples() {
        let q = CountingQuerySet::new(3, vec![vec![0, 2]]).unwrap();
        assert_eq!(counting(&q, 0, &ds(&[2, 0, 1])).unwrap(), 3);
        let q = CountingQuerySet::new(2, vec![vec![]]).unwrap();
        assert_eq!(counting(&q, 0, &ds(&[9, 9])).unwrap(), 0);
        let q = CountingQuerySet::new(3, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(counting(&q, 1, &ds(&[4, 7, 1])).unwrap(), 7);
        assert!(matches!(
            counting(&q, 2, &ds(&[4, 7, 1])),
            Err(DpError::Index { index: 2, len: 2 })
        ));
    }

    #[test]
    fn counting_reads_missing_entries_as_zero() {
        let q = CountingQuerySet::new(3, vec![vec![0, 2]]).unwrap();
        assert_eq!(counting(&q, 0, &ds(&[4])).unwrap(), 4);
    }

    #[test]
    fn counting_query_examples() {
        let q = CountingQuerySet::new(2, vec![vec![0], vec![0, 1]]).unwrap();
        assert_eq!(counting_query(&q, &ds(&[3, 1])), vec![3, 4]);
        let q = CountingQuerySet::new(1, vec![]).unwrap();
        assert!(counting_query(&q, &ds(&[1])).is_empty());
        let q = CountingQuerySet::repeated(2, vec![0], 3).unwrap();
        assert_eq!(counting_query(&q, &ds(&[2, 5])), vec![2, 2, 2]);
    }

    #[test]
    fn predicate_out_of_range_rejected() {
        assert!(CountingQuerySet::new(2, vec![vec![2]]).is_err());
    }

    #[test]
    fn sensitivity_examples() {
        let lim = DEFAULT_ENUMERATION_LIMIT;
        let q = CountingQuerySet::new(2, vec![vec![0]]).unwrap();
        assert_eq!(counting_sensitivity_exhaustive(&q, 2, lim).unwrap(), 1);
        let q = CountingQuerySet::repeated(2, vec![0, 1], 2).unwrap();
        assert_eq!(counting_sensitivity_exhaustive(&q, 2, lim).unwrap(), 2);
        let q = CountingQuerySet::new(1, vec![vec![]]).unwrap();
        assert_eq!(counting_sensitivity_exhaustive(&q, 1, lim).unwrap(), 0);
        let q = CountingQuerySet::new(30, vec![vec![0]]).unwrap();
        assert!(matches!(
            counting_sensitivity_exhaustive(&q, 3, lim),
            Err(DpError::Capacity { .. })
        ));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_histograms(3, 2, 1000).unwrap().len(), 27);
        assert_eq!(enumerate_histograms(0, 5, 10).unwrap(), vec![ds(&[])]);
        // each histogram in a 2×2 grid has exactly two unit neighbours
        assert_eq!(neighbor_pairs(2, 1, 1, 1000).unwrap().len(), 8);
    }

    #[test]
    fn json_shapes() {
        let d: Dataset = serde_json::from_str(r#"{"histogram":[1,2,3]}"#).unwrap();
        assert_eq!(d, ds(&[1, 2, 3]));
        let q: CountingQuerySet =
            serde_json::from_str(r#"{"n":3,"queries":[[0,2],[1]]}"#).unwrap();
        assert_eq!(q.predicate(0), vec![0, 2]);
        assert_eq!(
            serde_json::to_string(&q).unwrap(),
            r#"{"n":3,"queries":[[0,2],[1]]}"#
        );
        assert!(serde_json::from_str::<CountingQuerySet>(r#"{"n":1,"queries":[[4]]}"#).is_err());
    }
}
