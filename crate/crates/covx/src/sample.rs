//! Storm-peak sample container, covariate-bin partition and allocation.
//!
//! A [`StormPeakSample`] holds N declustered storm events, each with D
//! variate values (the first variate is the dominant one by convention)
//! and C covariate values. A [`BinPartition`] cuts each covariate domain
//! into intervals; bins are the Cartesian products of those intervals,
//! indexed row-major over covariates in declaration order. [`allocate_bins`]
//! maps every event to exactly one bin and computes the empirical bin
//! probabilities and the storm arrival rate.
//!
//! All intervals are half-open `[lower, upper)`, including the wrap
//! interval of periodic covariates, so edge values are never counted twice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N storm-peak events of D variates with C covariates and the observation
/// period in years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StormPeakSample {
    /// N rows of D physical-unit values; row i column d is variate d of event i.
    pub values: Vec<Vec<f64>>,
    /// N rows of C covariate values; angular covariates in degrees on [0, 360).
    pub covariates: Vec<Vec<f64>>,
    pub variate_names: Vec<String>,
    pub covariate_names: Vec<String>,
    pub covariate_is_periodic: Vec<bool>,
    /// Period of record P in years.
    pub period_years: f64,
}

impl StormPeakSample {
    pub fn new(
        values: Vec<Vec<f64>>,
        covariates: Vec<Vec<f64>>,
        variate_names: Vec<String>,
        covariate_names: Vec<String>,
        covariate_is_periodic: Vec<bool>,
        period_years: f64,
    ) -> Result<Self> {
        let n = values.len();
        let d = variate_names.len();
        let c = covariate_names.len();
        if n == 0 || d == 0 || c == 0 {
            return Err(Error::data(format!(
                "sample needs N ≥ 1 events, D ≥ 1 variates, C ≥ 1 covariates (got N={n}, D={d}, C={c})"
            )));
        }
        if covariates.len() != n {
            return Err(Error::data("values and covariates row counts differ".to_string()));
        }
        if covariate_is_periodic.len() != c {
            return Err(Error::data("periodic flags length mismatch".to_string()));
        }
        if !(period_years.is_finite() && period_years > 0.0) {
            return Err(Error::data(format!("period_years must be positive (got {period_years})")));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != d {
                return Err(Error::data(format!("event {i}: expected {d} variate values")));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("event {i}: non-finite variate value")));
            }
        }
        for (i, row) in covariates.iter().enumerate() {
            if row.len() != c {
                return Err(Error::data(format!("event {i}: expected {c} covariate values")));
            }
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::data(format!("event {i}: non-finite covariate value")));
                }
                if covariate_is_periodic[j] && !(0.0..360.0).contains(&x) {
                    return Err(Error::data(format!(
                        "event {i}: periodic covariate '{}' = {x} outside [0,360)",
                        covariate_names[j]
                    )));
                }
            }
        }
        Ok(StormPeakSample {
            values,
            covariates,
            variate_names,
            covariate_names,
            covariate_is_periodic,
            period_years,
        })
    }

    pub fn n_events(&self) -> usize {
        self.values.len()
    }

    pub fn n_variates(&self) -> usize {
        self.variate_names.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariate_names.len()
    }

    /// Column d of the value matrix.
    pub fn variate_column(&self, d: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[d]).collect()
    }

    /// New sample consisting of the given event rows (with repetition
    /// allowed), e.g. a bootstrap resample.
    pub fn select_events(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= self.n_events()) {
            return Err(Error::data("event index out of range".to_string()));
        }
        StormPeakSample::new(
            indices.iter().map(|&i| self.values[i].clone()).collect(),
            indices.iter().map(|&i| self.covariates[i].clone()).collect(),
            self.variate_names.clone(),
            self.covariate_names.clone(),
            self.covariate_is_periodic.clone(),
            self.period_years,
        )
    }
}

/// Edge list for one covariate of a [`BinPartition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateEdges {
    pub name: String,
    pub periodic: bool,
    /// Strictly increasing cut points. A periodic covariate with k edges has
    /// k intervals (the last wraps through 0/360); a non-periodic covariate
    /// with k edges has k−1 intervals covering [first, last).
    pub edges: Vec<f64>,
}

/// Cartesian covariate-bin partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinPartition {
    covariates: Vec<CovariateEdges>,
    bin_count: usize,
}

impl BinPartition {
    /// Build a partition from per-covariate edge lists.
    ///
    /// Periodic edge lists may be given in any cyclic rotation of their
    /// circular order; they are normalised to start at the smallest edge, so
    /// rotations produce identical partitions.
    pub fn new(covariates: Vec<CovariateEdges>) -> Result<Self> {
        if covariates.is_empty() {
            return Err(Error::config("partition needs at least one covariate".to_string()));
        }
        let mut normalised = Vec::with_capacity(covariates.len());
        for mut cov in covariates {
            if cov.edges.is_empty() {
                return Err(Error::config(format!("covariate '{}': empty edge list", cov.name)));
            }
            if cov.edges.iter().any(|e| !e.is_finite()) {
                return Err(Error::config(format!("covariate '{}': non-finite edge", cov.name)));
            }
            if cov.periodic {
                if cov.edges.iter().any(|&e| !(0.0..360.0).contains(&e)) {
                    return Err(Error::config(format!(
                        "covariate '{}': periodic edges must lie in [0,360)",
                        cov.name
                    )));
                }
                // Rotate so the smallest edge comes first.
                let min_pos = cov
                    .edges
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(i, _)| i)
                    .unwrap();
                cov.edges.rotate_left(min_pos);
            } else if cov.edges.len() < 2 {
                return Err(Error::config(format!(
                    "covariate '{}': non-periodic covariate needs at least 2 edges",
                    cov.name
                )));
            }
            if cov.edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::config(format!(
                    "covariate '{}': edges must be strictly increasing (duplicates not allowed)",
                    cov.name
                )));
            }
            normalised.push(cov);
        }
        let bin_count = normalised.iter().map(|c| interval_count(c)).product();
        Ok(BinPartition { covariates: normalised, bin_count })
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn covariates(&self) -> &[CovariateEdges] {
        &self.covariates
    }

    pub fn interval_counts(&self) -> Vec<usize> {
        self.covariates.iter().map(interval_count).collect()
    }

    /// Flat bin index of a multi-index, row-major over covariates in
    /// declaration order (the first covariate varies slowest).
    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        for (cov, &m) in self.covariates.iter().zip(multi) {
            flat = flat * interval_count(cov) + m;
        }
        flat
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let counts = self.interval_counts();
        let mut rem = flat;
        let mut multi = vec![0; counts.len()];
        for i in (0..counts.len()).rev() {
            multi[i] = rem % counts[i];
            rem /= counts[i];
        }
        multi
    }

    /// Interval `idx` of covariate `cov` as `(lower, upper)`. For the wrap
    /// interval of a periodic covariate `upper` is numerically smaller than
    /// `lower`, meaning `[lower, 360) ∪ [0, upper)`.
    pub fn interval(&self, cov: usize, idx: usize) -> (f64, f64) {
        let edges = &self.covariates[cov].edges;
        if self.covariates[cov].periodic {
            if idx + 1 < edges.len() {
                (edges[idx], edges[idx + 1])
            } else {
                (edges[edges.len() - 1], edges[0])
            }
        } else {
            (edges[idx], edges[idx + 1])
        }
    }

    /// Interval index for a single covariate value.
    fn locate_interval(&self, cov: usize, value: f64) -> Result<usize> {
        let spec = &self.covariates[cov];
        let edges = &spec.edges;
        if spec.periodic {
            let x = value.rem_euclid(360.0);
            if x < edges[0] {
                // Below the first edge: inside the wrap interval.
                return Ok(edges.len() - 1);
            }
            // Largest j with edges[j] <= x.
            Ok(edges.partition_point(|&e| e <= x) - 1)
        } else {
            if value < edges[0] || value >= edges[edges.len() - 1] {
                return Err(Error::data(format!(
                    "covariate '{}' value {value} outside edge coverage [{}, {})",
                    spec.name,
                    edges[0],
                    edges[edges.len() - 1]
                )));
            }
            Ok(edges.partition_point(|&e| e <= value) - 1)
        }
    }

    /// Flat bin index of a covariate vector.
    pub fn locate(&self, covariate_values: &[f64]) -> Result<usize> {
        if covariate_values.len() != self.covariates.len() {
            return Err(Error::data(format!(
                "expected {} covariate values, got {}",
                self.covariates.len(),
                covariate_values.len()
            )));
        }
        let mut multi = Vec::with_capacity(self.covariates.len());
        for (cov, &x) in covariate_values.iter().enumerate() {
            multi.push(self.locate_interval(cov, x)?);
        }
        Ok(self.flat_index(&multi))
    }

    /// Human-readable bin label, e.g. `direction:[315,0)×season:[90,270)`.
    pub fn bin_label(&self, flat: usize) -> String {
        let multi = self.multi_index(flat);
        self.covariates
            .iter()
            .enumerate()
            .map(|(c, spec)| {
                let (lo, hi) = self.interval(c, multi[c]);
                format!("{}:[{},{})", spec.name, trim_float(lo), trim_float(hi))
            })
            .collect::<Vec<_>>()
            .join("×")
    }

    pub fn bin_labels(&self) -> Vec<String> {
        (0..self.bin_count).map(|b| self.bin_label(b)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "covariates": self.covariates,
            "bin_count": self.bin_count,
            "bin_labels": self.bin_labels(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let covariates: Vec<CovariateEdges> =
            serde_json::from_value(value["covariates"].clone())?;
        BinPartition::new(covariates)
    }
}

fn interval_count(cov: &CovariateEdges) -> usize {
    if cov.periodic {
        cov.edges.len()
    } else {
        cov.edges.len() - 1
    }
}

fn trim_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Event→bin map with occupancy, empirical bin probabilities and the storm
/// arrival rate (storms per annum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Flat bin index per event.
    pub bin_of: Vec<usize>,
    /// Events per bin; sums to N.
    pub occupancy: Vec<usize>,
    /// occupancy / N; sums to 1.
    pub p: Vec<f64>,
    /// N / P, storms per annum.
    pub rho: f64,
}

impl Allocation {
    pub fn bin_count(&self) -> usize {
        self.occupancy.len()
    }

    /// Event indices allocated to bin `b`.
    pub fn events_in(&self, b: usize) -> Vec<usize> {
        self.bin_of
            .iter()
            .enumerate()
            .filter(|(_, &bin)| bin == b)
            .map(|(i, _)| i)
            .collect()
    }

    /// Bins with zero occupancy (permitted, but flagged for downstream
    /// fitting rules).
    pub fn empty_bins(&self) -> Vec<usize> {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == 0)
            .map(|(b, _)| b)
            .collect()
    }
}

/// Allocate every event of `sample` to exactly one bin of `partition`.
pub fn allocate_bins(sample: &StormPeakSample, partition: &BinPartition) -> Result<Allocation> {
    if sample.n_covariates() != partition.covariates().len() {
        return Err(Error::data(format!(
            "sample has {} covariates, partition has {}",
            sample.n_covariates(),
            partition.covariates().len()
        )));
    }
    let b = partition.bin_count();
    let mut bin_of = Vec::with_capacity(sample.n_events());
    let mut occupancy = vec![0usize; b];
    for row in &sample.covariates {
        let bin = partition.locate(row)?;
        occupancy[bin] += 1;
        bin_of.push(bin);
    }
    let n = sample.n_events() as f64;
    let p: Vec<f64> = occupancy.iter().map(|&o| o as f64 / n).collect();
    Ok(Allocation { bin_of, occupancy, p, rho: n / sample.period_years })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn direction_edges() -> CovariateEdges {
        CovariateEdges {
            name: "direction".to_string(),
            periodic: true,
            edges: vec![0.0, 20.0, 60.0, 225.0, 270.0, 315.0],
        }
    }

    fn one_cov_sample(values: Vec<f64>, covs: Vec<f64>, period: f64) -> StormPeakSample {
        let n = values.len();
        StormPeakSample::new(
            values.into_iter().map(|v| vec![v]).collect(),
            covs.into_iter().map(|c| vec![c]).collect(),
            vec!["hs".to_string()],
            vec!["direction".to_string()],
            vec![true],
            period,
        )
        .unwrap_or_else(|e| panic!("building sample of {n}: {e}"))
    }

    #[test]
    fn six_directional_bins() {
        let p = BinPartition::new(vec![direction_edges()]).unwrap();
        assert_eq!(p.bin_count(), 6);
    }

    #[test]
    fn single_edge_periodic_is_one_bin() {
        let p = BinPartition::new(vec![CovariateEdges {
            name: "direction".to_string(),
            periodic: true,
            edges: vec![0.0],
        }])
        .unwrap();
        assert_eq!(p.bin_count(), 1);
        let sample = one_cov_sample(vec![1.0, 2.0, 3.0], vec![10.0, 180.0, 359.9], 1.0);
        let alloc = allocate_bins(&sample, &p).unwrap();
        assert!(alloc.bin_of.iter().all(|&b| b == 0));
    }

    #[test]
    fn directional_by_seasonal_product() {
        let p = BinPartition::new(vec![
            CovariateEdges {
                name: "direction".to_string(),
                periodic: true,
                edges: vec![0.0, 120.0, 240.0],
            },
            CovariateEdges {
                name: "season".to_string(),
                periodic: true,
                edges: vec![90.0, 270.0],
            },
        ])
        .unwrap();
        assert_eq!(p.bin_count(), 6);
        // Row-major: first covariate varies slowest.
        assert_eq!(p.flat_index(&[0, 0]), 0);
        assert_eq!(p.flat_index(&[0, 1]), 1);
        assert_eq!(p.flat_index(&[1, 0]), 2);
        assert_eq!(p.multi_index(5), vec![2, 1]);
    }

    #[test]
    fn duplicate_edges_rejected() {
        let err = BinPartition::new(vec![CovariateEdges {
            name: "direction".to_string(),
            periodic: true,
            edges: vec![0.0, 20.0, 20.0],
        }]);
        assert!(err.is_err());
    }

    #[test]
    fn periodic_edge_outside_range_rejected() {
        let err = BinPartition::new(vec![CovariateEdges {
            name: "direction".to_string(),
            periodic: true,
            edges: vec![0.0, 360.0],
        }]);
        assert!(err.is_err());
    }

    #[test]
    fn membership_is_half_open() {
        let p = BinPartition::new(vec![direction_edges()]).unwrap();
        // 45° lies in [20,60), the second interval.
        assert_eq!(p.locate(&[45.0]).unwrap(), 1);
        // Lower edges belong to their own interval.
        assert_eq!(p.locate(&[20.0]).unwrap(), 1);
        assert_eq!(p.locate(&[60.0]).unwrap(), 2);
    }

    #[test]
    fn wrap_bin_covers_315_to_0() {
        let p = BinPartition::new(vec![direction_edges()]).unwrap();
        // 340° is in the wrap interval [315, 0).
        assert_eq!(p.locate(&[340.0]).unwrap(), 5);
        assert_eq!(p.locate(&[359.99]).unwrap(), 5);
        assert_eq!(p.locate(&[315.0]).unwrap(), 5);
        // 0 starts the first interval again.
        assert_eq!(p.locate(&[0.0]).unwrap(), 0);
        let (lo, hi) = p.interval(0, 5);
        assert_eq!((lo, hi), (315.0, 0.0));
        assert!(p.bin_label(5).contains("[315,0)"));
    }

    #[test]
    fn rho_is_events_per_annum() {
        let p = BinPartition::new(vec![direction_edges()]).unwrap();
        let sample = one_cov_sample(vec![1.0; 100], vec![100.0; 100], 25.0);
        let alloc = allocate_bins(&sample, &p).unwrap();
        assert!((alloc.rho - 4.0).abs() < 1e-12);
        assert_eq!(alloc.occupancy.iter().sum::<usize>(), 100);
    }

    #[test]
    fn non_periodic_out_of_coverage_errors() {
        let p = BinPartition::new(vec![CovariateEdges {
            name: "depth".to_string(),
            periodic: false,
            edges: vec![0.0, 10.0, 20.0],
        }])
        .unwrap();
        assert_eq!(p.locate(&[5.0]).unwrap(), 0);
        assert_eq!(p.locate(&[10.0]).unwrap(), 1);
        assert!(p.locate(&[-1.0]).is_err());
        // Upper edge itself is outside the half-open coverage.
        assert!(p.locate(&[20.0]).is_err());
    }

    #[test]
    fn rotated_periodic_edges_allocate_identically() {
        let rotated = BinPartition::new(vec![CovariateEdges {
            name: "direction".to_string(),
            periodic: true,
            edges: vec![225.0, 270.0, 315.0, 0.0, 20.0, 60.0],
        }])
        .unwrap();
        let canonical = BinPartition::new(vec![direction_edges()]).unwrap();
        for x in [0.0, 5.0, 20.0, 45.0, 100.0, 250.0, 300.0, 340.0] {
            assert_eq!(rotated.locate(&[x]).unwrap(), canonical.locate(&[x]).unwrap(), "at {x}");
        }
    }

    #[test]
    fn partition_json_round_trip() {
        let p = BinPartition::new(vec![direction_edges()]).unwrap();
        let json = p.to_json();
        let back = BinPartition::from_json(&json).unwrap();
        assert_eq!(p, back);
        assert_eq!(json["bin_labels"][0], "direction:[0,20)");
    }

    #[test]
    fn sample_validation() {
        // Periodic covariate outside [0,360).
        let err = StormPeakSample::new(
            vec![vec![1.0]],
            vec![vec![360.0]],
            vec!["hs".into()],
            vec!["direction".into()],
            vec![true],
            1.0,
        );
        assert!(err.is_err());
        // Non-finite value.
        let err = StormPeakSample::new(
            vec![vec![f64::NAN]],
            vec![vec![0.0]],
            vec!["hs".into()],
            vec!["direction".into()],
            vec![true],
            1.0,
        );
        assert!(err.is_err());
    }

    proptest! {
        // Every event maps to exactly one bin; p sums to one.
        #[test]
        fn allocation_total_function(xs in proptest::collection::vec(0.0f64..360.0, 1..200)) {
            let p = BinPartition::new(vec![direction_edges()]).unwrap();
            let sample = one_cov_sample(vec![1.0; xs.len()], xs, 10.0);
            let alloc = allocate_bins(&sample, &p).unwrap();
            prop_assert_eq!(alloc.bin_of.len(), sample.n_events());
            prop_assert!(alloc.bin_of.iter().all(|&b| b < 6));
            let total: f64 = alloc.p.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        // Cyclic rotation of the edge list never changes the allocation.
        #[test]
        fn rotation_invariance(xs in proptest::collection::vec(0.0f64..360.0, 1..50), rot in 0usize..6) {
            let mut edges = vec![0.0, 20.0, 60.0, 225.0, 270.0, 315.0];
            edges.rotate_left(rot);
            let rotated = BinPartition::new(vec![CovariateEdges {
                name: "direction".to_string(),
                periodic: true,
                edges,
            }]).unwrap();
            let canonical = BinPartition::new(vec![direction_edges()]).unwrap();
            for &x in &xs {
                prop_assert_eq!(rotated.locate(&[x]).unwrap(), canonical.locate(&[x]).unwrap());
            }
        }
    }
}
