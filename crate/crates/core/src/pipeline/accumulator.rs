use crate::error::{OpticsError, Result};
use crate::field::Grid;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Sum {
    hi: f64,
    lo: f64,
}

impl Sum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.hi + x;
        if self.hi.abs() >= x.abs() {
            self.lo += (self.hi - t) + x;
        } else {
            self.lo += (x - t) + self.hi;
        }
        self.hi = t;
    }

    #[inline]
    fn merge(&mut self, other: Sum) {
        self.add(other.hi);
        self.add(other.lo);
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Streaming sums for the covariance of the bucket with every reference
/// pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostAccumulator {
    grid: Grid,
    n: u64,
    sum_b: Sum,
    sum_b2: Sum,
    sum_i: Vec<Sum>,
    sum_bi: Vec<Sum>,
}

impl GhostAccumulator {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            n: 0,
            sum_b: Sum::default(),
            sum_b2: Sum::default(),
            sum_i: vec![Sum::default(); grid.len()],
            sum_bi: vec![Sum::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn sum_b(&self) -> f64 {
        self.sum_b.value()
    }

    pub fn sum_b2(&self) -> f64 {
        self.sum_b2.value()
    }

    pub fn sum_i(&self) -> Vec<f64> {
        self.sum_i.iter().map(|s| s.value()).collect()
    }

    pub fn sum_bi(&self) -> Vec<f64> {
        self.sum_bi.iter().map(|s| s.value()).collect()
    }

    /// Adds one realization; `intensity` is the row-major reference map.
    pub fn accumulate(&mut self, bucket: f64, intensity: &[f64]) -> Result<()> {
        if intensity.len() != self.grid.len() {
            return Err(OpticsError::InvalidField(format!(
                "reference map has {} samples, accumulator expects {}",
                intensity.len(),
                self.grid.len()
            )));
        }
        self.push(bucket, intensity.iter().copied());
        Ok(())
    }

    pub(crate) fn push(&mut self, bucket: f64, intensity: impl Iterator<Item = f64>) {
        self.n += 1;
        self.sum_b.add(bucket);
        self.sum_b2.add(bucket * bucket);
        for ((si, sbi), i) in self.sum_i.iter_mut().zip(self.sum_bi.iter_mut()).zip(intensity) {
            si.add(i);
            sbi.add(bucket * i);
        }
    }

    /// Field-wise sum of two accumulators over the same grid.
    pub fn merge(&mut self, other: &GhostAccumulator) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        self.n += other.n;
        self.sum_b.merge(other.sum_b);
        self.sum_b2.merge(other.sum_b2);
        for (a, b) in self.sum_i.iter_mut().zip(&other.sum_i) {
            a.merge(*b);
        }
        for (a, b) in self.sum_bi.iter_mut().zip(&other.sum_bi) {
            a.merge(*b);
        }
        Ok(())
    }

    /// Sample variance of the bucket (population normalization).
    pub fn bucket_variance(&self) -> Option<f64> {
        (self.n >= 1).then(|| {
            let n = self.n as f64;
            let mean = self.sum_b() / n;
            self.sum_b2() / n - mean * mean
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::new(4, 1e-5).unwrap()
    }

    fn sample(k: u64) -> (f64, Vec<f64>) {
        let b = 1.0 + (k as f64 * 0.7).sin();
        (b, (0..16).map(|p| ((p as u64 * 31 + k * 17) % 13) as f64 * 0.25).collect())
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300))
    }

    #[test]
    fn single_sample() {
        let mut acc = GhostAccumulator::new(grid());
        let (b, i) = sample(1);
        acc.accumulate(b, &i).unwrap();
        assert_eq!(acc.count(), 1);
        assert_eq!(acc.sum_b(), b);
        assert_eq!(acc.sum_b2(), b * b);
        assert_eq!(acc.sum_i(), i);
        assert!(close(&acc.sum_bi(), &i.iter().map(|x| x * b).collect::<Vec<_>>(), 0.0));
    }

    #[test]
    fn shape_mismatch() {
        let mut acc = GhostAccumulator::new(grid());
        assert!(acc.accumulate(1.0, &[1.0; 9]).is_err());
        let other = GhostAccumulator::new(Grid::new(8, 1e-5).unwrap());
        assert!(acc.merge(&other).is_err());
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = GhostAccumulator::new(Grid::new(2, 1.0).unwrap());
        acc.accumulate(1e16, &[1.0; 4]).unwrap();
        for _ in 0..1000 {
            acc.accumulate(1.0, &[1.0; 4]).unwrap();
        }
        acc.accumulate(-1e16, &[1.0; 4]).unwrap();
        assert_eq!(acc.sum_b(), 1000.0);
    }

    proptest! {
        #[test]
        fn merge_commutes_with_accumulate(split in 0u64..20, extra in 0u64..50) {
            let mut a = GhostAccumulator::new(grid());
            let mut b = GhostAccumulator::new(grid());
            for k in 0..split { let (x, i) = sample(k); a.accumulate(x, &i).unwrap(); }
            for k in split..20 { let (x, i) = sample(k); b.accumulate(x, &i).unwrap(); }
            let (x, i) = sample(100 + extra);

            let mut left = a.clone();
            left.accumulate(x, &i).unwrap();
            left.merge(&b).unwrap();
            let mut right = a.clone();
            right.merge(&b).unwrap();
            right.accumulate(x, &i).unwrap();

            prop_assert_eq!(left.count(), right.count());
            prop_assert!(close(&[left.sum_b(), left.sum_b2()], &[right.sum_b(), right.sum_b2()], 1e-12));
            prop_assert!(close(&left.sum_i(), &right.sum_i(), 1e-12));
            prop_assert!(close(&left.sum_bi(), &right.sum_bi(), 1e-12));
        }

        #[test]
        fn variance_is_nonnegative(xs in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let mut acc = GhostAccumulator::new(Grid::new(2, 1.0).unwrap());
            for x in &xs { acc.accumulate(*x, &[0.0; 4]).unwrap(); }
            let n = acc.count() as f64;
            let v = acc.bucket_variance().unwrap();
            prop_assert!(v >= -1e-9 * (acc.sum_b2() / n));
        }
    }
}
