//! Paired observations and their rank (pseudo-observation) representation.

use crate::error::{Error, Result};

/// Raw paired observations of the conditioning series `X` and target `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PairedSample {
    /// Validates equal length, `n >= 2` and finiteness.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::TooSmall {
                n: xs.len(),
                min: 2,
            });
        }
        check_finite("xs", &xs)?;
        check_finite("ys", &ys)?;
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// The sample with the roles of `X` and `Y` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.xs, self.ys)
    }
}

fn check_finite(series: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { series, index }),
        None => Ok(()),
    }
}

/// Integer ranks `1..=n` of both coordinates.
///
/// Immutable after construction; every copula estimator consumes only this.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoSample {
    rank_x: Vec<u32>,
    rank_y: Vec<u32>,
}

impl PseudoSample {
    /// Builds a pseudo-sample from rank lists, checking both are permutations
    /// of `1..=n`.
    pub fn from_ranks(rank_x: Vec<u32>, rank_y: Vec<u32>) -> Result<Self> {
        if rank_x.len() != rank_y.len() {
            return Err(Error::LengthMismatch {
                xs: rank_x.len(),
                ys: rank_y.len(),
            });
        }
        if rank_x.is_empty() {
            return Err(Error::TooSmall { n: 0, min: 1 });
        }
        check_permutation("rank_x", &rank_x)?;
        check_permutation("rank_y", &rank_y)?;
        Ok(Self { rank_x, rank_y })
    }

    pub fn n(&self) -> usize {
        self.rank_x.len()
    }

    pub fn rank_x(&self) -> &[u32] {
        &self.rank_x
    }

    pub fn rank_y(&self) -> &[u32] {
        &self.rank_y
    }
}

fn check_permutation(name: &str, ranks: &[u32]) -> Result<()> {
    let n = ranks.len();
    let mut seen = vec![false; n];
    for (i, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        if r == 0 || r > n {
            return Err(Error::InvalidRanks(format!(
                "{name}[{i}] = {r} outside 1..={n}"
            )));
        }
        if std::mem::replace(&mut seen[r - 1], true) {
            return Err(Error::InvalidRanks(format!("{name} repeats rank {r}")));
        }
    }
    Ok(())
}

/// Ranks of `values` in ascending order, ties broken by original index.
pub(crate) fn ranks_of(values: &[f64]) -> (Vec<u32>, usize) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable: equal values keep index order
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u32; values.len()];
    let mut ties = 0;
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos as u32 + 1;
        if pos > 0 && values[order[pos - 1]] == values[i] {
            ties += 1;
        }
    }
    (ranks, ties)
}

/// Converts a paired sample to ranks.
///
/// Ranks are invariant under strictly increasing transforms of either
/// coordinate. Ties are broken by original observation index; a warning is
/// logged when more than 1% of a coordinate's observations are tied.
pub fn rank_transform(sample: &PairedSample) -> PseudoSample {
    let n = sample.len();
    let (rank_x, ties_x) = ranks_of(sample.xs());
    let (rank_y, ties_y) = ranks_of(sample.ys());
    for (name, ties) in [("xs", ties_x), ("ys", ties_y)] {
        if ties * 100 > n {
            log::warn!("{name}: {ties} of {n} observations tied; ranks broken by index");
        }
    }
    PseudoSample { rank_x, rank_y }
}

/// Ranks of a growing series, updated in `O(n)` per appended value.
///
/// After `k` pushes the ranks equal those [`rank_transform`] assigns to the
/// first `k` values, including the index tie-break.
#[derive(Debug, Clone, Default)]
pub struct ExpandingRanks {
    sorted: Vec<f64>,
    ranks: Vec<u32>,
}

impl ExpandingRanks {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            sorted: Vec::with_capacity(capacity),
            ranks: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, value: f64) {
        // newest index is largest, so it goes after every equal value
        let pos = self.sorted.partition_point(|&s| s <= value);
        self.sorted.insert(pos, value);
        let threshold = pos as u32;
        for r in self.ranks.iter_mut() {
            if *r > threshold {
                *r += 1;
            }
        }
        self.ranks.push(threshold + 1);
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Values pushed so far, ascending.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}
