use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::record::ResponseRecord;
use crate::error::{Error, Result};

/// Train / public-test / private-test fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub public_test: f64,
    pub private_test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions { train: 0.8, public_test: 0.1, private_test: 0.1 }
    }
}

impl SplitFractions {
    pub fn new(train: f64, public_test: f64, private_test: f64) -> Result<Self> {
        let f = SplitFractions { train, public_test, private_test };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.public_test, self.private_test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument(format!("split fractions must be non-negative: {parts:?}")));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("split fractions sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Largest-remainder apportionment of `n` items.
    ///
    /// Each part gets `floor(n * f)`; the leftover units go one each to the
    /// parts with the largest fractional remainders, earlier parts first on ties.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let quotas = [self.train, self.public_test, self.private_test].map(|f| n as f64 * f);
        // Nudge so that products like 10 * 0.1 = 0.9999999999999999 floor correctly.
        let floors = quotas.map(|q| (q + 1e-9).floor() as usize);
        let mut sizes = floors;
        let assigned: usize = floors.iter().sum();
        let mut order = [0usize, 1, 2];
        // Remainders are compared on a fixed grid so float noise cannot break ties.
        let rem = |i: usize| ((quotas[i] - floors[i] as f64).max(0.0) * 1e6).round() as u64;
        order.sort_by(|&a, &b| rem(b).cmp(&rem(a)).then(a.cmp(&b)));
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            sizes[i] += 1;
        }
        sizes
    }
}

/// Three disjoint parts of a record set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Split {
    pub train: Vec<ResponseRecord>,
    pub public_test: Vec<ResponseRecord>,
    pub private_test: Vec<ResponseRecord>,
}

fn labels(n: usize, fractions: &SplitFractions, seed: u64) -> Result<Vec<u8>> {
    fractions.validate()?;
    let sizes = fractions.sizes(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![0u8; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank < sizes[0] {
            0
        } else if rank < sizes[0] + sizes[1] {
            1
        } else {
            2
        };
    }
    Ok(out)
}

fn distribute(records: &[ResponseRecord], label_of: impl Fn(usize, &ResponseRecord) -> u8) -> Split {
    let mut split = Split::default();
    for (i, r) in records.iter().enumerate() {
        match label_of(i, r) {
            0 => split.train.push(*r),
            1 => split.public_test.push(*r),
            _ => split.private_test.push(*r),
        }
    }
    split
}

/// Random split of individual records. Each part keeps the input order.
pub fn split_records(records: &[ResponseRecord], fractions: &SplitFractions, seed: u64) -> Result<Split> {
    let labels = labels(records.len(), fractions, seed)?;
    Ok(distribute(records, |i, _| labels[i]))
}

/// Random split of students; all of a student's records land in the same part.
pub fn split_students(records: &[ResponseRecord], fractions: &SplitFractions, seed: u64) -> Result<Split> {
    let mut users: Vec<u64> = records.iter().map(|r| r.user_id).collect();
    users.sort_unstable();
    users.dedup();
    let labels = labels(users.len(), fractions, seed)?;
    let by_user: HashMap<u64, u8> = users.into_iter().zip(labels).collect();
    Ok(distribute(records, |_, r| by_user[&r.user_id]))
}
