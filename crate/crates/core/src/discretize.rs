//! Turning continuous columns into categorical series, and merging rare
//! categories.
//!
//! Mutual-information estimates need categorical inputs. Continuous
//! attributes and labels are binned — by default with the Freedman-Diaconis
//! rule, which adapts bin width to the data's spread and sample size — and
//! sparse categories are merged so that chance-adjustment isn't dominated
//! by near-empty cells.

use crate::dataset::CategoricalSeries;
use crate::error::{AuditError, Result};
use serde::{Deserialize, Serialize};

/// How bin edges were chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BinStrategy {
    /// Freedman-Diaconis: `h = 2 * IQR * n^(-1/3)`.
    FreedmanDiaconis,
    /// Fixed width anchored at integer multiples of the width.
    FixedWidth(f64),
    /// Caller-supplied edges.
    Explicit,
}

/// A binning specification: strategy plus the concrete edges it produced.
///
/// Edges are strictly ascending and there are at least two of them (one
/// bin). Bin `i` covers `[edges[i], edges[i+1])`; the final bin is closed
/// on the right so the maximum value lands inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub strategy: BinStrategy,
    pub edges: Vec<f64>,
}

impl BinningSpec {
    pub fn new(strategy: BinStrategy, edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(AuditError::InvalidArgument(
                "binning spec needs at least two edges".into(),
            ));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(AuditError::InvalidArgument(
                "bin edges must be finite and strictly ascending".into(),
            ));
        }
        Ok(Self { strategy, edges })
    }

    pub fn bin_count(&self) -> usize {
        self.edges.len() - 1
    }
}

/// Linear-interpolation quantile of already-sorted values (the same
/// convention as numpy's default): index `(n-1)*q` interpolated between
/// neighboring order statistics.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = (n - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

const MAX_BINS: usize = 512;

/// Freedman-Diaconis binning: `h = 2 * IQR * n^(-1/3)`, bin count
/// `ceil(range / h)` clamped to `[1, 512]`, equal-width edges over the
/// observed range.
///
/// Degenerate spreads (IQR = 0, or all values equal) produce a single bin
/// spanning the data. Needs at least two finite values.
pub fn fd_bins(values: &[f64]) -> Result<BinningSpec> {
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return Err(AuditError::InsufficientData(format!(
            "Freedman-Diaconis binning needs at least 2 finite values, got {}",
            finite.len()
        )));
    }
    finite.sort_by(|x, y| x.partial_cmp(y).expect("finite values compare"));
    let n = finite.len();
    let min = finite[0];
    let max = finite[n - 1];
    let iqr = quantile_sorted(&finite, 0.75) - quantile_sorted(&finite, 0.25);
    let range = max - min;
    let h = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
    let bins = if range <= 0.0 || h <= 0.0 {
        1
    } else {
        ((range / h).ceil() as usize).clamp(1, MAX_BINS)
    };
    let edges = equal_width_edges(min, max, bins);
    BinningSpec::new(BinStrategy::FreedmanDiaconis, edges)
}

fn equal_width_edges(min: f64, max: f64, bins: usize) -> Vec<f64> {
    if max <= min {
        // single bin spanning the (constant) data
        return vec![min, min + 1.0];
    }
    let width = (max - min) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| min + width * i as f64).collect();
    *edges.last_mut().expect("bins >= 1") = max;
    // guard against rounding collapsing the last interval
    let last = edges.len() - 1;
    if edges[last] <= edges[last - 1] {
        edges[last] = edges[last - 1] + width.max(f64::EPSILON);
    }
    edges
}

/// Fixed-width binning anchored at multiples of `width`: a value `v` falls
/// in raw bin `floor(v / width)`. Edges cover the observed range; empty
/// bins are dropped later by [`discretize`]'s densification.
pub fn fixed_width_bins(values: &[f64], width: f64) -> Result<BinningSpec> {
    if !(width.is_finite() && width > 0.0) {
        return Err(AuditError::InvalidArgument(format!(
            "bin width must be positive and finite, got {width}"
        )));
    }
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(AuditError::InsufficientData(
            "fixed-width binning needs at least one finite value".into(),
        ));
    }
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = (min / width).floor() as i64;
    let last = (max / width).floor() as i64;
    let edges: Vec<f64> = (first..=last + 1).map(|k| k as f64 * width).collect();
    BinningSpec::new(BinStrategy::FixedWidth(width), edges)
}

/// Apply a binning spec to values, producing a dense categorical series.
///
/// Values below the first edge or at/above the last clamp into the end
/// bins. Bins that receive no values are dropped and the surviving codes
/// are renumbered densely, so every code `< C` occurs at least once.
/// Category names describe the interval, e.g. `"[18.00, 23.50)"`.
pub fn discretize(values: &[f64], spec: &BinningSpec) -> Result<CategoricalSeries> {
    if values.is_empty() {
        return Err(AuditError::InsufficientData(
            "cannot discretize an empty vector".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AuditError::Data(
            "cannot discretize non-finite values; exclude missing rows first".into(),
        ));
    }
    let bins = spec.bin_count();
    let raw: Vec<usize> = values
        .iter()
        .map(|&v| {
            // rightmost edge <= v, clamped into [0, bins-1]
            match spec.edges.partition_point(|&e| e <= v) {
                0 => 0,
                idx => (idx - 1).min(bins - 1),
            }
        })
        .collect();
    let mut occupied = vec![false; bins];
    for &b in &raw {
        occupied[b] = true;
    }
    let mut remap = vec![u32::MAX; bins];
    let mut names = Vec::new();
    let mut next = 0u32;
    for (b, &occ) in occupied.iter().enumerate() {
        if occ {
            remap[b] = next;
            let closer = if b == bins - 1 { ']' } else { ')' };
            names.push(format!(
                "[{:.2}, {:.2}{closer}",
                spec.edges[b],
                spec.edges[b + 1]
            ));
            next += 1;
        }
    }
    let codes: Vec<u32> = raw.into_iter().map(|b| remap[b]).collect();
    CategoricalSeries::from_codes(codes, names)
}

/// Merge categories with fewer than `min_count` members into an `"other"`
/// category.
///
/// If the merged pool itself still has fewer than `min_count` members and
/// at least two categories remain, the pool is merged into the smallest
/// surviving category. The result therefore either has every category at
/// or above `min_count`, or is a single category (callers should warn on
/// the latter). Surviving categories keep their names and relative order;
/// the pool, when it survives, is the last category.
pub fn merge_rare(series: &CategoricalSeries, min_count: usize) -> Result<CategoricalSeries> {
    let c = series.cardinality();
    let counts = series.category_counts();
    let rare: Vec<bool> = counts.iter().map(|&cnt| (cnt as usize) < min_count).collect();
    let n_rare = rare.iter().filter(|&&r| r).count();
    if n_rare == 0 {
        return Ok(series.clone());
    }
    let pool_count: u64 = (0..c).filter(|&i| rare[i]).map(|i| counts[i]).sum();

    // survivors keep order; pool becomes trailing category (if kept)
    let mut remap = vec![u32::MAX; c];
    let mut names = Vec::new();
    let mut next = 0u32;
    for i in 0..c {
        if !rare[i] {
            remap[i] = next;
            names.push(series.category_names()[i].clone());
            next += 1;
        }
    }
    let survivors = next as usize;

    let pool_too_small = (pool_count as usize) < min_count;
    if pool_too_small && survivors >= 1 {
        // fold the pool into the smallest surviving category
        let smallest = (0..c)
            .filter(|&i| !rare[i])
            .min_by_key(|&i| (counts[i], i))
            .expect("at least one survivor");
        for i in 0..c {
            if rare[i] {
                remap[i] = remap[smallest];
            }
        }
    } else {
        // keep the pool as its own category
        let pool_code = next;
        let mut pool_name = "other".to_string();
        while names.iter().any(|n| n == &pool_name) {
            pool_name.push('_');
        }
        names.push(pool_name);
        for i in 0..c {
            if rare[i] {
                remap[i] = pool_code;
            }
        }
    }
    let codes: Vec<u32> = series.codes().iter().map(|&v| remap[v as usize]).collect();
    CategoricalSeries::from_codes(codes, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fd_golden_one_to_eight() {
        // IQR = 3.5 (linear-interpolation quantiles), h = 2*3.5*8^(-1/3) = 3.5,
        // bins = ceil(7/3.5) = 2
        let values: Vec<f64> = (1..=8).map(|v| v as f64).collect();
        let spec = fd_bins(&values).unwrap();
        assert_eq!(spec.bin_count(), 2);
        assert_eq!(spec.edges.first().copied().unwrap(), 1.0);
        assert_eq!(spec.edges.last().copied().unwrap(), 8.0);
    }

    #[test]
    fn fd_constant_input_single_bin() {
        let spec = fd_bins(&[3.0, 3.0, 3.0, 3.0]).unwrap();
        assert_eq!(spec.bin_count(), 1);
        let series = discretize(&[3.0, 3.0], &spec).unwrap();
        assert_eq!(series.cardinality(), 1);
    }

    #[test]
    fn fd_zero_iqr_with_spread_single_bin() {
        // IQR = 0 but range > 0: h = 0 -> single bin spanning the data
        let mut values = vec![5.0; 50];
        values.push(0.0);
        values.push(100.0);
        let spec = fd_bins(&values).unwrap();
        assert_eq!(spec.bin_count(), 1);
    }

    #[test]
    fn fd_standard_normal_bin_count_in_expected_band() {
        // 10k standard-normal samples: IQR ~ 1.35 so h ~ 2*1.35/10000^(1/3)
        // ~ 0.125, and the sample range is ~ 7.5-8 -> roughly 55-70 bins.
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let values: Vec<f64> = (0..10_000)
            .map(|_| {
                // Box-Muller from two uniforms
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let spec = fd_bins(&values).unwrap();
        let bins = spec.bin_count();
        assert!((40..=90).contains(&bins), "got {bins}");
    }

    #[test]
    fn fd_rejects_degenerate_input() {
        assert!(fd_bins(&[]).is_err());
        assert!(fd_bins(&[1.0]).is_err());
        assert!(fd_bins(&[f64::NAN, f64::NAN]).is_err());
    }

    #[test]
    fn fixed_width_ages_golden() {
        // ages 0..89 at width 5 -> floor(age/5) -> 18 dense classes
        let ages: Vec<f64> = (0..90).map(|a| a as f64).collect();
        let spec = fixed_width_bins(&ages, 5.0).unwrap();
        let series = discretize(&ages, &spec).unwrap();
        assert_eq!(series.cardinality(), 18);
        assert_eq!(series.codes()[0], 0);
        assert_eq!(series.codes()[89], 17);
        assert_eq!(series.codes()[44], 8); // 44 / 5 = 8
    }

    #[test]
    fn fixed_width_sparse_values_densify() {
        // [3, 7, 41, 89] at width 5 -> raw bins {0, 1, 8, 17} -> codes 0..4
        let spec = fixed_width_bins(&[3.0, 7.0, 41.0, 89.0], 5.0).unwrap();
        let series = discretize(&[3.0, 7.0, 41.0, 89.0], &spec).unwrap();
        assert_eq!(series.cardinality(), 4);
        assert_eq!(series.codes(), &[0, 1, 2, 3]);
    }

    #[test]
    fn fixed_width_rejects_bad_width() {
        assert!(fixed_width_bins(&[1.0], 0.0).is_err());
        assert!(fixed_width_bins(&[1.0], -2.0).is_err());
        assert!(fixed_width_bins(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn discretize_clamps_out_of_range() {
        let spec = BinningSpec::new(BinStrategy::Explicit, vec![0.0, 1.0, 2.0]).unwrap();
        let series = discretize(&[-5.0, 0.5, 1.5, 99.0], &spec).unwrap();
        assert_eq!(series.codes(), &[0, 0, 1, 1]);
    }

    #[test]
    fn discretize_max_value_lands_in_last_bin() {
        let spec = BinningSpec::new(BinStrategy::Explicit, vec![0.0, 1.0, 2.0]).unwrap();
        let series = discretize(&[0.0, 2.0, 1.0], &spec).unwrap();
        assert_eq!(series.codes(), &[0, 1, 1]);
    }

    #[test]
    fn discretize_codes_dense_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.random_range(2..200);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
            let spec = fd_bins(&values).unwrap();
            let series = discretize(&values, &spec).unwrap();
            let c = series.cardinality();
            let mut seen = vec![false; c];
            for &code in series.codes() {
                assert!((code as usize) < c);
                seen[code as usize] = true;
            }
            assert!(seen.iter().all(|&s| s), "every code occurs");
        }
    }

    #[test]
    fn discretize_rejects_nan() {
        let spec = BinningSpec::new(BinStrategy::Explicit, vec![0.0, 1.0]).unwrap();
        assert!(discretize(&[0.5, f64::NAN], &spec).is_err());
    }

    fn series_from(counts: &[(&str, usize)]) -> CategoricalSeries {
        let names: Vec<String> = counts.iter().map(|(n, _)| n.to_string()).collect();
        let mut codes = Vec::new();
        for (code, (_, c)) in counts.iter().enumerate() {
            codes.extend(std::iter::repeat(code as u32).take(*c));
        }
        CategoricalSeries::from_codes(codes, names).unwrap()
    }

    #[test]
    fn merge_rare_keeps_pool_when_large_enough() {
        // {a:500, b:80, c:30}: pool 110 >= 100 survives as "other"
        let s = series_from(&[("a", 500), ("b", 80), ("c", 30)]);
        let merged = merge_rare(&s, 100).unwrap();
        assert_eq!(merged.cardinality(), 2);
        assert_eq!(merged.category_names(), &["a".to_string(), "other".to_string()]);
        let counts = merged.category_counts();
        assert_eq!(counts, vec![500, 110]);
    }

    #[test]
    fn merge_rare_folds_small_pool_into_smallest_survivor() {
        // spec trace: {a:500, b:80, c:15} -> pool 95 < 100 -> folded into a
        // (single category remains)
        let s = series_from(&[("a", 500), ("b", 80), ("c", 15)]);
        let merged = merge_rare(&s, 100).unwrap();
        assert_eq!(merged.cardinality(), 1);
        assert_eq!(merged.category_counts(), vec![595]);
    }

    #[test]
    fn merge_rare_small_pool_prefers_smallest_of_several_survivors() {
        let s = series_from(&[("big", 900), ("mid", 150), ("tiny", 40)]);
        let merged = merge_rare(&s, 100).unwrap();
        assert_eq!(merged.cardinality(), 2);
        // pool (40) < 100 folded into "mid", the smallest survivor
        assert_eq!(merged.category_counts(), vec![900, 190]);
    }

    #[test]
    fn merge_rare_all_rare_collapses_to_single_category() {
        let s = series_from(&[("a", 10), ("b", 5), ("c", 2)]);
        let merged = merge_rare(&s, 100).unwrap();
        assert_eq!(merged.cardinality(), 1);
        assert_eq!(merged.category_counts(), vec![17]);
    }

    #[test]
    fn merge_rare_noop_when_all_frequent() {
        let s = series_from(&[("a", 200), ("b", 150)]);
        let merged = merge_rare(&s, 100).unwrap();
        assert_eq!(&merged, &s);
    }

    #[test]
    fn merge_rare_avoids_name_collision() {
        let s = series_from(&[("other", 400), ("x", 20), ("y", 90)]);
        let merged = merge_rare(&s, 100).unwrap();
        assert_eq!(merged.cardinality(), 2);
        assert_eq!(merged.category_names()[0], "other");
        assert_ne!(merged.category_names()[1], "other");
    }

    #[test]
    fn merge_rare_invariant_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let c = rng.random_range(1..8usize);
            let n = rng.random_range(1..400usize);
            let codes: Vec<u32> = (0..n).map(|_| rng.random_range(0..c as u32)).collect();
            let mut present: Vec<u32> = codes.clone();
            present.sort_unstable();
            present.dedup();
            let remap: std::collections::HashMap<u32, u32> = present
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, i as u32))
                .collect();
            let codes: Vec<u32> = codes.iter().map(|v| remap[v]).collect();
            let names: Vec<String> = (0..present.len()).map(|i| format!("c{i}")).collect();
            let s = CategoricalSeries::from_codes(codes, names).unwrap();
            let min_count = rng.random_range(1..60usize);
            let merged = merge_rare(&s, min_count).unwrap();
            let counts = merged.category_counts();
            assert!(
                merged.cardinality() == 1
                    || counts.iter().all(|&cnt| cnt as usize >= min_count),
                "counts {counts:?} min {min_count}"
            );
            assert_eq!(counts.iter().sum::<u64>() as usize, n);
            assert!(merged.cardinality() <= s.cardinality());
        }
    }
}
