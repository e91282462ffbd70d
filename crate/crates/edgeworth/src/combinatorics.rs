//! Weighted integer partitions and the Faa di Bruno composition formula.
//!
//! Every partition-indexed sum downstream (cumulant/moment conversions, the
//! expansion polynomials, the density correction terms) reduces to an
//! enumeration of non-negative integer tuples `(p_1, ..., p_k)` with
//! `sum_r r * p_r = k`, weighted by exact multinomial factors.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum `k` accepted by [`enumerate_weighted_partitions`].
pub const MAX_PARTITION_ORDER: usize = 32;

/// Maximum derivative order accepted by [`faa_di_bruno`].
pub const MAX_FAA_ORDER: usize = 20;

/// A non-negative integer solution `(p_1, ..., p_k)` of `sum_r r * p_r = k`.
///
/// `counts[r-1]` is the multiplicity `p_r` of the part `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedPartition {
    counts: Vec<u32>,
}

impl WeightedPartition {
    /// Multiplicities `(p_1, ..., p_k)`.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Multiplicity of the part `r` (1-based); zero beyond the stored length.
    pub fn count(&self, r: usize) -> u32 {
        if r == 0 || r > self.counts.len() {
            0
        } else {
            self.counts[r - 1]
        }
    }

    /// `j = p_1 + ... + p_k`, the total number of parts.
    pub fn total_parts(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `sum_r r * p_r`, the weight the tuple was enumerated for.
    pub fn weighted_sum(&self) -> usize {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &p)| (i + 1) * p as usize)
            .sum()
    }

    /// Largest `r` with `p_r > 0`, or 0 for the empty tuple.
    pub fn max_part(&self) -> usize {
        self.counts
            .iter()
            .rposition(|&p| p > 0)
            .map(|i| i + 1)
            .unwrap_or(0)
    }
}

/// Enumerates every solution of `p_1 + 2 p_2 + ... + k p_k = k` exactly once,
/// in ascending lexicographic order on `(p_1, ..., p_k)`.
///
/// The number of tuples equals the partition function `p(k)`.
pub fn enumerate_weighted_partitions(k: usize) -> Result<Vec<WeightedPartition>> {
    if k == 0 || k > MAX_PARTITION_ORDER {
        return Err(Error::Bounds(format!(
            "partition order k={k} outside 1..={MAX_PARTITION_ORDER}"
        )));
    }
    let mut out = Vec::new();
    let mut counts = vec![0u32; k];
    recurse(k, 1, k, &mut counts, &mut out);
    Ok(out)
}

fn recurse(k: usize, r: usize, remaining: usize, counts: &mut [u32], out: &mut Vec<WeightedPartition>) {
    if r > k {
        debug_assert_eq!(remaining, 0);
        out.push(WeightedPartition { counts: counts.to_vec() });
        return;
    }
    if r == k {
        // last slot is forced
        if remaining % r == 0 {
            counts[r - 1] = (remaining / r) as u32;
            out.push(WeightedPartition { counts: counts.to_vec() });
            counts[r - 1] = 0;
        }
        return;
    }
    for p in 0..=(remaining / r) as u32 {
        counts[r - 1] = p;
        let used = r * p as usize;
        let rest = remaining - used;
        // remaining weight must still be representable by parts > r
        recurse_tail(k, r + 1, rest, counts, out);
        counts[r - 1] = 0;
    }
}

fn recurse_tail(k: usize, r: usize, remaining: usize, counts: &mut [u32], out: &mut Vec<WeightedPartition>) {
    if remaining == 0 {
        out.push(WeightedPartition { counts: counts.to_vec() });
        return;
    }
    if r > k || remaining < r {
        return;
    }
    recurse(k, r, remaining, counts, out)
}

/// Exact factorial as `u128`; valid through 33!.
pub(crate) fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Exact multinomial weight `p! / prod_r (k_r! * (r!)^{k_r})` for a partition
/// of `p`. This is always an integer (it counts set partitions by block sizes).
pub(crate) fn partition_weight(p: usize, part: &WeightedPartition) -> u128 {
    let mut denom: u128 = 1;
    for (i, &kr) in part.counts().iter().enumerate() {
        let r = i + 1;
        denom *= factorial_u128(kr as usize);
        denom *= factorial_u128(r).pow(kr);
    }
    factorial_u128(p) / denom
}

/// `d^p/dt^p z(y(t))` by the Faa di Bruno formula.
///
/// `outer[j]` must hold `z^{(j)}` evaluated at `y(t)` and `inner[r]` must hold
/// `y^{(r)}(t)`, both for indices `0..=p`.
pub fn faa_di_bruno(outer: &[Complex64], inner: &[Complex64], p: usize) -> Result<Complex64> {
    if p == 0 || p > MAX_FAA_ORDER {
        return Err(Error::Bounds(format!("order p={p} outside 1..={MAX_FAA_ORDER}")));
    }
    if outer.len() <= p {
        return Err(Error::Arity(format!(
            "need outer derivatives 0..={p}, got {}",
            outer.len()
        )));
    }
    if inner.len() <= p {
        return Err(Error::Arity(format!(
            "need inner derivatives 0..={p}, got {}",
            inner.len()
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for part in enumerate_weighted_partitions(p)? {
        let j = part.total_parts() as usize;
        let weight = partition_weight(p, &part) as f64;
        let mut term = outer[j] * weight;
        for (i, &kr) in part.counts().iter().enumerate() {
            let r = i + 1;
            if kr > 0 {
                term *= inner[r].powu(kr);
            }
        }
        sum += term;
    }
    Ok(sum)
}
