//! Per-class manifold statistics: streaming mean and diagonal variance.
//!
//! Accumulation is Welford's recurrence in `f64`; partial states combine
//! with the pairwise update of Chan et al., so a class may be accumulated in
//! any partition of its stream.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::Metaclass;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassKey {
    #[serde(rename = "seq")]
    pub sequence: String,
    pub metaclass: Metaclass,
}

impl ClassKey {
    pub fn new(sequence: impl Into<String>, metaclass: Metaclass) -> Self {
        Self { sequence: sequence.into(), metaclass }
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sequence, self.metaclass)
    }
}

/// Variance denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    /// `m2 / (n - 1)`.
    #[default]
    Sample,
    /// `m2 / n`.
    Population,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifoldError {
    #[error("manifold dimension must be at least 1")]
    ZeroDimension,
    #[error("{key}: vector has {found} components, manifold dimension is {expected}")]
    DimensionMismatch { key: ClassKey, expected: usize, found: usize },
    #[error("{key}: component {component} is not finite")]
    NonFinite { key: ClassKey, component: usize },
    #[error("cannot merge {left} with {right}")]
    KeyMismatch { left: ClassKey, right: ClassKey },
    #[error("degenerate manifold {key}: {n} sample(s), at least 2 needed for a variance")]
    Degenerate { key: ClassKey, n: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldStats {
    pub key: ClassKey,
    pub n: u64,
    pub mean: Vec<f64>,
    /// Summed squared deviations from the running mean.
    pub m2: Vec<f64>,
}

/// Centroid and variance of a class with at least two samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalizedManifold {
    #[serde(rename = "class")]
    pub key: ClassKey,
    pub n: u64,
    #[serde(rename = "mean")]
    pub centroid: Vec<f64>,
    pub variance: Vec<f64>,
}

impl FinalizedManifold {
    pub fn dimension(&self) -> usize {
        self.centroid.len()
    }
}

impl ManifoldStats {
    pub fn new(key: ClassKey, dimension: usize) -> Result<Self, ManifoldError> {
        if dimension == 0 {
            return Err(ManifoldError::ZeroDimension);
        }
        Ok(Self { key, n: 0, mean: vec![0.0; dimension], m2: vec![0.0; dimension] })
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    fn check<T: Copy + Into<f64>>(&self, vector: &[T]) -> Result<(), ManifoldError> {
        if vector.len() != self.dimension() {
            return Err(ManifoldError::DimensionMismatch {
                key: self.key.clone(),
                expected: self.dimension(),
                found: vector.len(),
            });
        }
        if let Some(component) = vector.iter().position(|&v| !v.into().is_finite()) {
            return Err(ManifoldError::NonFinite { key: self.key.clone(), component });
        }
        Ok(())
    }

    fn push<T: Copy + Into<f64>>(&mut self, vector: &[T]) {
        self.n += 1;
        let n = self.n as f64;
        for ((mean, m2), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(vector) {
            let v = v.into();
            let delta = v - *mean;
            *mean += delta / n;
            *m2 += delta * (v - *mean);
        }
    }

    pub fn update(&mut self, vector: &[f32]) -> Result<(), ManifoldError> {
        self.check(vector)?;
        self.push(vector);
        Ok(())
    }

    pub fn update_f64(&mut self, vector: &[f64]) -> Result<(), ManifoldError> {
        self.check(vector)?;
        self.push(vector);
        Ok(())
    }

    /// Combined statistics of both streams. Exactly commutative.
    pub fn merge(&self, other: &ManifoldStats) -> Result<ManifoldStats, ManifoldError> {
        if self.key != other.key || self.dimension() != other.dimension() {
            return Err(ManifoldError::KeyMismatch { left: self.key.clone(), right: other.key.clone() });
        }
        if other.n == 0 {
            return Ok(self.clone());
        }
        if self.n == 0 {
            return Ok(other.clone());
        }
        let n = self.n + other.n;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        let cross = na * nb / nf;
        let (mean, m2) = self
            .mean
            .iter()
            .zip(&other.mean)
            .zip(self.m2.iter().zip(&other.m2))
            .map(|((&ma, &mb), (&m2a, &m2b))| {
                let delta = mb - ma;
                ((ma * na + mb * nb) / nf, (m2a + m2b) + delta * delta * cross)
            })
            .unzip();
        Ok(ManifoldStats { key: self.key.clone(), n, mean, m2 })
    }

    pub fn variance(&self, mode: VarianceMode) -> Result<Vec<f64>, ManifoldError> {
        if self.n < 2 {
            return Err(ManifoldError::Degenerate { key: self.key.clone(), n: self.n });
        }
        let denom = match mode {
            VarianceMode::Sample => (self.n - 1) as f64,
            VarianceMode::Population => self.n as f64,
        };
        Ok(self.m2.iter().map(|m| m / denom).collect())
    }

    pub fn finalize(&self, mode: VarianceMode) -> Result<FinalizedManifold, ManifoldError> {
        Ok(FinalizedManifold {
            key: self.key.clone(),
            n: self.n,
            centroid: self.mean.clone(),
            variance: self.variance(mode)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn key() -> ClassKey {
        ClassKey::new("seq1", Metaclass::Target)
    }

    /// Mean first, then squared deviations.
    fn two_pass(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let d = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var.iter_mut().for_each(|s| *s /= n - 1.0);
        (mean, var)
    }

    fn accumulate(rows: &[Vec<f64>]) -> ManifoldStats {
        let mut s = ManifoldStats::new(key(), rows[0].len()).unwrap();
        rows.iter().for_each(|r| s.update_f64(r).unwrap());
        s
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn empty_and_single() {
        let mut s = ManifoldStats::new(key(), 4).unwrap();
        assert_eq!((s.n, s.mean.clone()), (0, vec![0.0; 4]));
        s.update(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.m2, vec![0.0; 4]);
        assert_eq!(s.finalize(VarianceMode::Sample).unwrap_err(), ManifoldError::Degenerate { key: key(), n: 1 });
        assert_eq!(ManifoldStats::new(key(), 0).unwrap_err(), ManifoldError::ZeroDimension);
    }

    #[test]
    fn small_streams() {
        let s = accumulate(&[vec![1.0], vec![2.0], vec![3.0]]);
        let f = s.finalize(VarianceMode::Sample).unwrap();
        assert_eq!((f.centroid[0], f.variance[0]), (2.0, 1.0));

        let f = accumulate(&[vec![0.0], vec![2.0]]).finalize(VarianceMode::Sample).unwrap();
        assert_eq!((f.centroid[0], f.variance[0]), (1.0, 2.0));
        let f = accumulate(&[vec![0.0], vec![2.0]]).finalize(VarianceMode::Population).unwrap();
        assert_eq!(f.variance[0], 1.0);

        let f = accumulate(&vec![vec![7.25, -3.0]; 5]).finalize(VarianceMode::Sample).unwrap();
        assert_eq!(f.variance, vec![0.0, 0.0]);
    }

    #[test]
    fn input_errors() {
        let mut s = ManifoldStats::new(key(), 2).unwrap();
        assert!(matches!(s.update(&[1.0]), Err(ManifoldError::DimensionMismatch { .. })));
        assert!(matches!(s.update(&[1.0, f32::INFINITY]), Err(ManifoldError::NonFinite { component: 1, .. })));
        assert_eq!(s.n, 0);
        let other = ManifoldStats::new(ClassKey::new("seq1", Metaclass::Background), 2).unwrap();
        assert!(matches!(s.merge(&other), Err(ManifoldError::KeyMismatch { .. })));
    }

    #[test]
    fn merge_identity() {
        let s = accumulate(&[vec![1.0, 5.0], vec![2.0, -1.0], vec![4.0, 0.5]]);
        let empty = ManifoldStats::new(key(), 2).unwrap();
        assert_eq!(empty.merge(&s).unwrap(), s);
        assert_eq!(s.merge(&empty).unwrap(), s);
    }

    #[test]
    fn halves_match_sequential() {
        let mut rng = SplitMix64::new(3);
        let rows: Vec<Vec<f64>> = (0..1000).map(|_| (0..8).map(|_| rng.next_f64() * 10.0 - 2.0).collect()).collect();
        let whole = accumulate(&rows);
        let merged = accumulate(&rows[..500]).merge(&accumulate(&rows[500..])).unwrap();
        assert_eq!(merged.n, 1000);
        let (a, b) = (whole.finalize(VarianceMode::Sample).unwrap(), merged.finalize(VarianceMode::Sample).unwrap());
        for d in 0..8 {
            assert!(rel(a.centroid[d], b.centroid[d]) < 1e-9);
            assert!(rel(a.variance[d], b.variance[d]) < 1e-9);
        }
        let x = accumulate(&rows[..300]);
        let y = accumulate(&rows[300..]);
        assert_eq!(x.merge(&y).unwrap(), y.merge(&x).unwrap());
    }

    #[test]
    fn near_constant_stream_keeps_m2_non_negative() {
        let base = 1.0e8f64;
        let rows: Vec<Vec<f64>> = (0..10_000).map(|i| vec![base + if i % 3 == 0 { 1e-8 } else { 0.0 }, base]).collect();
        let s = accumulate(&rows);
        assert!(s.m2.iter().all(|&m| m >= 0.0));
        let halves = accumulate(&rows[..5000]).merge(&accumulate(&rows[5000..])).unwrap();
        assert!(halves.m2.iter().all(|&m| m >= 0.0));
    }

    proptest! {
        #[test]
        fn welford_matches_two_pass(
            rows in (1usize..6, 2usize..200).prop_flat_map(|(d, n)| {
                prop::collection::vec(prop::collection::vec(-1e3f64..1e3, d), n)
            })
        ) {
            let (mean, var) = two_pass(&rows);
            let f = accumulate(&rows).finalize(VarianceMode::Sample).unwrap();
            for d in 0..mean.len() {
                prop_assert!((f.centroid[d] - mean[d]).abs() <= 1e-10 * mean[d].abs().max(1.0));
                prop_assert!(rel(f.variance[d], var[d]) <= 1e-10 || (f.variance[d] - var[d]).abs() < 1e-12);
            }
        }

        #[test]
        fn merge_associative_and_order_free(
            rows in prop::collection::vec(prop::collection::vec(-50f64..50.0, 3), 3..120),
            cut_a in 0.0f64..1.0, cut_b in 0.0f64..1.0,
        ) {
            let n = rows.len();
            let (mut i, mut j) = ((cut_a * n as f64) as usize, (cut_b * n as f64) as usize);
            if i > j { core::mem::swap(&mut i, &mut j); }
            let part = |r: &[Vec<f64>]| {
                let mut s = ManifoldStats::new(key(), 3).unwrap();
                r.iter().for_each(|v| s.update_f64(v).unwrap());
                s
            };
            let (a, b, c) = (part(&rows[..i]), part(&rows[i..j]), part(&rows[j..]));
            let left = a.merge(&b).unwrap().merge(&c).unwrap();
            let right = a.merge(&b.merge(&c).unwrap()).unwrap();
            let mut reversed: Vec<Vec<f64>> = rows.clone();
            reversed.reverse();
            let rev = part(&reversed);
            for d in 0..3 {
                prop_assert!(rel(left.mean[d], right.mean[d]) < 1e-9 || (left.mean[d] - right.mean[d]).abs() < 1e-12);
                prop_assert!(rel(left.m2[d], right.m2[d]) < 1e-9);
                prop_assert!(rel(left.m2[d], rev.m2[d]) < 1e-9);
            }
        }
    }
}
