use rayon::prelude::*;

use super::accumulator::GhostAccumulator;
use super::config::ExperimentConfig;
use super::image::{finalize, GhostImage};
use super::simulate::Simulator;
use crate::error::{OpticsError, Result};

/// Split of the realization range into contiguous chunks. Each chunk is
/// accumulated sequentially; chunk results are merged pairwise in a fixed
/// tree, so the output depends on the plan but not on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionPlan {
    pub chunks: usize,
}

impl PartitionPlan {
    pub fn new(chunks: usize) -> Result<Self> {
        if chunks == 0 {
            return Err(OpticsError::InvalidParams("partition plan needs at least one chunk".into()));
        }
        Ok(Self { chunks })
    }

    /// Half-open index ranges, as even as possible.
    pub fn ranges(&self, realizations: u64) -> Vec<(u64, u64)> {
        let k = (self.chunks as u64).min(realizations).max(1);
        (0..k)
            .map(|c| (realizations * c / k, realizations * (c + 1) / k))
            .collect()
    }
}

/// Chunk count of [`run`]; fixed so results do not depend on the worker count.
pub const DEFAULT_CHUNKS: usize = 8;

/// Runs `config` on `workers` threads with the default plan.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<GhostImage> {
    run_with_plan(config, PartitionPlan::new(DEFAULT_CHUNKS)?, workers)
}

pub fn run_with_plan(config: &ExperimentConfig, plan: PartitionPlan, workers: usize) -> Result<GhostImage> {
    let sim = Simulator::new(config)?;
    let ranges = plan.ranges(config.realizations);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| OpticsError::InvalidParams(format!("thread pool: {e}")))?;
    let parts: Vec<GhostAccumulator> = pool.install(|| {
        ranges
            .par_iter()
            .map(|&(start, end)| accumulate_range(&sim, start, end))
            .collect::<Result<_>>()
    })?;
    finalize(&tree_merge(parts)?)
}

fn accumulate_range(sim: &Simulator, start: u64, end: u64) -> Result<GhostAccumulator> {
    let mut acc = GhostAccumulator::new(sim.grid());
    let mut buf = Vec::new();
    for index in start..end {
        let bucket = sim.run_into(index, &mut buf)?;
        acc.push(bucket, buf.iter().map(|c| c.norm_sqr()));
    }
    Ok(acc)
}

fn tree_merge(mut parts: Vec<GhostAccumulator>) -> Result<GhostAccumulator> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b)?;
            }
            next.push(a);
        }
        parts = next;
    }
    parts
        .pop()
        .ok_or_else(|| OpticsError::InvalidParams("nothing to merge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Aperture, Grid};
    use crate::psf::GeometryParams;
    use crate::speckle::SpeckleParams;
    use crate::turbulence::TurbulenceSpec;

    fn config(realizations: u64) -> ExperimentConfig {
        let grid = Grid::new(64, 1e-5).unwrap();
        let g = GeometryParams::matched(532e-9, 635e-9, 0.02, 1e-4, 3e-5).unwrap();
        let s = SpeckleParams::new(1e-4, 3e-5, grid).unwrap();
        let t = TurbulenceSpec::new(1e-5, 0.02, 532e-9).unwrap();
        ExperimentConfig::new(g, s, Some(t), Aperture::disk(grid, 6e-5).unwrap(), realizations, 3).unwrap()
    }

    fn rel_diff(a: &GhostImage, b: &GhostImage) -> f64 {
        let scale = a.values().values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        a.values()
            .values()
            .iter()
            .zip(b.values().values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    #[test]
    fn plan_ranges_cover_everything() {
        let p = PartitionPlan::new(3).unwrap();
        assert_eq!(p.ranges(10), vec![(0, 3), (3, 6), (6, 10)]);
        assert_eq!(PartitionPlan::new(8).unwrap().ranges(2), vec![(0, 1), (1, 2)]);
        assert!(PartitionPlan::new(0).is_err());
    }

    #[test]
    fn halves_merge_to_sequential_result() {
        let cfg = config(40);
        let seq = run_with_plan(&cfg, PartitionPlan::new(1).unwrap(), 1).unwrap();
        let two = run_with_plan(&cfg, PartitionPlan::new(2).unwrap(), 1).unwrap();
        assert!(rel_diff(&seq, &two) < 1e-10);
    }

    #[test]
    fn independent_of_worker_count() {
        let cfg = config(30);
        let plan = PartitionPlan::new(5).unwrap();
        let a = run_with_plan(&cfg, plan, 1).unwrap();
        let b = run_with_plan(&cfg, plan, 3).unwrap();
        assert_eq!(a, b);
        let c = run(&cfg, 4).unwrap();
        assert!(rel_diff(&a, &c) < 1e-10);
        assert_eq!(run(&cfg, 1).unwrap(), c);
    }

    #[test]
    fn two_realizations_give_a_valid_image() {
        let img = run(&config(2), 1).unwrap();
        assert_eq!(img.realizations(), 2);
        assert!(img.values().values().iter().all(|v| v.is_finite()));
    }
}
