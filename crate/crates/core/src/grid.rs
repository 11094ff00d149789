//! Piecewise-uniform grids with breakpoints, cubic interpolation that never
//! straddles a breakpoint, and cumulative integration of the interpolant.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul};

/// Node placement strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Clustering {
    Uniform,
    /// Density multiplied by `ratio` within 0.1 of `center`.
    Critical { center: f64, ratio: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_nodes: usize,
    pub lo: f64,
    pub hi: f64,
    pub clustering: Clustering,
}

impl GridSpec {
    pub fn uniform(n_nodes: usize, lo: f64, hi: f64) -> Self {
        Self {
            n_nodes,
            lo,
            hi,
            clustering: Clustering::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 65 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 65 nodes, got {}",
                self.n_nodes
            )));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid bounds [{}, {}] are not an interval",
                self.lo, self.hi
            )));
        }
        if let Clustering::Critical { ratio, .. } = self.clustering {
            if !(ratio >= 1.0) {
                return Err(Error::InvalidInput("clustering ratio must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Values that can be interpolated and integrated on a grid.
pub trait GridValue: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>> GridValue for T {}

#[derive(Clone, Debug)]
struct Segment {
    start: usize,
    end: usize,
    x0: f64,
    h: f64,
}

#[derive(Clone, Debug)]
pub struct Grid {
    spec: GridSpec,
    nodes: Vec<f64>,
    segments: Vec<Segment>,
    /// For each interval `[x_i, x_{i+1}]`: stencil start and the weights that
    /// integrate the local cubic exactly.
    interval_weights: Vec<(usize, [f64; 4])>,
}

const MIN_INTERVALS: usize = 4;

impl Grid {
    /// Builds a grid whose nodes include every breakpoint lying in
    /// `(lo, hi)`. Breakpoints are listed in priority order: when two are
    /// closer than the merge distance the earlier one survives.
    pub fn new(spec: GridSpec, breakpoints: &[f64]) -> Result<Self> {
        spec.validate()?;
        let (lo, hi) = (spec.lo, spec.hi);
        let merge = 1e-9 * (hi - lo);
        let mut pts: Vec<f64> = vec![lo, hi];
        let push = |p: f64, pts: &mut Vec<f64>| {
            if p > lo && p < hi && pts.iter().all(|&q| (q - p).abs() > merge) {
                pts.push(p);
            }
        };
        for &b in breakpoints {
            push(b, &mut pts);
        }
        if let Clustering::Critical { center, .. } = spec.clustering {
            push(center, &mut pts);
            push(center - 0.1, &mut pts);
            push(center + 0.1, &mut pts);
        }
        pts.sort_by(f64::total_cmp);

        let nseg = pts.len() - 1;
        let total = spec.n_nodes - 1;
        if nseg * MIN_INTERVALS > total {
            return Err(Error::InvalidInput(format!(
                "{} nodes cannot resolve {} grid segments",
                spec.n_nodes, nseg
            )));
        }
        let weights: Vec<f64> = pts
            .windows(2)
            .map(|w| {
                let len = w[1] - w[0];
                match spec.clustering {
                    Clustering::Critical { center, ratio }
                        if (0.5 * (w[0] + w[1]) - center).abs() < 0.1 =>
                    {
                        len * ratio
                    }
                    _ => len,
                }
            })
            .collect();
        let wsum: f64 = weights.iter().sum();
        let mut counts: Vec<usize> = weights
            .iter()
            .map(|w| ((w / wsum * total as f64).round() as usize).max(MIN_INTERVALS))
            .collect();
        loop {
            let sum: usize = counts.iter().sum();
            if sum == total {
                break;
            }
            // adjust the segment with the largest (or smallest) weighted spacing
            let spacing = |k: usize, c: usize| weights[k] / c as f64;
            if sum < total {
                let k = (0..nseg)
                    .max_by(|&a, &b| spacing(a, counts[a]).total_cmp(&spacing(b, counts[b])))
                    .unwrap();
                counts[k] += 1;
            } else {
                let k = (0..nseg)
                    .filter(|&k| counts[k] > MIN_INTERVALS)
                    .min_by(|&a, &b| spacing(a, counts[a]).total_cmp(&spacing(b, counts[b])))
                    .ok_or_else(|| Error::InvalidInput("grid allocation failed".into()))?;
                counts[k] -= 1;
            }
        }

        let mut nodes = Vec::with_capacity(spec.n_nodes);
        let mut segments = Vec::with_capacity(nseg);
        nodes.push(lo);
        for k in 0..nseg {
            let (a, b) = (pts[k], pts[k + 1]);
            let m = counts[k];
            let h = (b - a) / m as f64;
            let start = nodes.len() - 1;
            for j in 1..m {
                nodes.push(a + h * j as f64);
            }
            nodes.push(b);
            segments.push(Segment {
                start,
                end: nodes.len() - 1,
                x0: a,
                h,
            });
        }

        let mut grid = Self {
            spec,
            nodes,
            segments,
            interval_weights: Vec::new(),
        };
        grid.interval_weights = grid.build_interval_weights();
        Ok(grid)
    }

    pub fn uniform(n_nodes: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(GridSpec::uniform(n_nodes, lo, hi), &[])
    }

    fn build_interval_weights(&self) -> Vec<(usize, [f64; 4])> {
        let g = 0.5 / 3f64.sqrt();
        let mut out = Vec::with_capacity(self.nodes.len() - 1);
        for seg in &self.segments {
            for i in seg.start..seg.end {
                let h = self.nodes[i + 1] - self.nodes[i];
                let j0 = stencil_start(seg, i);
                let mut w = [0.0; 4];
                for t in [0.5 - g, 0.5 + g] {
                    let x = self.nodes[i] + h * t;
                    let l = lagrange(&self.nodes[j0..j0 + 4], x);
                    for k in 0..4 {
                        w[k] += 0.5 * h * l[k];
                    }
                }
                out.push((j0, w));
            }
        }
        out
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.spec.lo
    }

    pub fn hi(&self) -> f64 {
        self.spec.hi
    }

    /// Segment boundaries (the breakpoints actually used).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| self.nodes[s.start]).collect();
        v.push(self.spec.hi);
        v
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let (seg, i) = self.locate(x);
        let s = &self.segments[seg];
        if i < s.end && (x - self.nodes[i]).abs() > (self.nodes[i + 1] - x).abs() {
            i + 1
        } else {
            i
        }
    }

    /// Segment and left node of the interval containing `x` (clamped).
    fn locate(&self, x: f64) -> (usize, usize) {
        let seg = match self
            .segments
            .binary_search_by(|s| s.x0.total_cmp(&x))
        {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) => k - 1,
        };
        let s = &self.segments[seg];
        let raw = ((x - s.x0) / s.h).floor();
        let off = if raw < 0.0 { 0 } else { raw as usize };
        let i = (s.start + off).min(s.end - 1);
        (seg, i)
    }

    /// Stencil start and Lagrange weights of the cubic through the four
    /// nodes surrounding `x`, all inside one segment.
    pub fn stencil(&self, x: f64) -> (usize, [f64; 4]) {
        let (seg, i) = self.locate(x);
        let j0 = stencil_start(&self.segments[seg], i);
        (j0, lagrange(&self.nodes[j0..j0 + 4], x))
    }

    pub fn interp<T: GridValue>(&self, values: &[T], x: f64) -> T {
        debug_assert_eq!(values.len(), self.nodes.len());
        let (j0, w) = self.stencil(x);
        let mut acc = T::default();
        for k in 0..4 {
            acc = acc + values[j0 + k] * w[k];
        }
        acc
    }

    /// Cumulative integral of the piecewise-cubic interpolant of `values`,
    /// anchored to zero at node `anchor`.
    pub fn cumulative_from<T: GridValue>(&self, values: &[T], anchor: usize) -> Vec<T> {
        let n = self.nodes.len();
        let mut out = vec![T::default(); n];
        for i in anchor..n - 1 {
            out[i + 1] = out[i] + self.interval_integral(values, i);
        }
        for i in (0..anchor).rev() {
            out[i] = out[i + 1] + self.interval_integral(values, i) * -1.0;
        }
        out
    }

    pub fn integral<T: GridValue>(&self, values: &[T]) -> T {
        (0..self.nodes.len() - 1).fold(T::default(), |acc, i| acc + self.interval_integral(values, i))
    }

    fn interval_integral<T: GridValue>(&self, values: &[T], i: usize) -> T {
        let (j0, w) = self.interval_weights[i];
        let mut acc = T::default();
        for k in 0..4 {
            acc = acc + values[j0 + k] * w[k];
        }
        acc
    }
}

fn stencil_start(seg: &Segment, i: usize) -> usize {
    // nodes i-1..i+2 clamped into [start, end]
    let lo = seg.start;
    let hi = seg.end - 3;
    (i.saturating_sub(1)).clamp(lo, hi)
}

fn lagrange(xs: &[f64], x: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for j in 0..4 {
        for m in 0..4 {
            if m != j {
                w[j] *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn breakpoints_become_nodes() {
        let g = Grid::new(GridSpec::uniform(101, -2.0, 3.0), &[0.37, 1.0, -1.0]).unwrap();
        assert_eq!(g.len(), 101);
        for b in [0.37, 1.0, -1.0, -2.0, 3.0] {
            let k = g.nearest(b);
            assert_eq!(g.nodes()[k], b);
        }
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn uniform_grid_is_uniform() {
        let g = Grid::uniform(65, 0.0, 1.0).unwrap();
        for (j, &x) in g.nodes().iter().enumerate() {
            assert_abs_diff_eq!(x, j as f64 / 64.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn clustering_doubles_density() {
        let spec = GridSpec {
            n_nodes: 401,
            lo: 0.0,
            hi: 1.0,
            clustering: Clustering::Critical {
                center: 0.5,
                ratio: 2.0,
            },
        };
        let g = Grid::new(spec, &[]).unwrap();
        let near = g.nodes().iter().filter(|&&x| (x - 0.5).abs() < 0.1).count() as f64;
        let far = g.nodes().iter().filter(|&&x| x < 0.3).count() as f64;
        // 0.2 of length near center vs 0.3 far away
        assert!(near / 0.2 >= 1.9 * far / 0.3, "{near} {far}");
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(Grid::uniform(64, 0.0, 1.0).is_err());
        assert!(Grid::uniform(65, 1.0, 0.0).is_err());
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = Grid::new(GridSpec::uniform(81, -1.0, 2.0), &[0.3]).unwrap();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + x * x * x;
        let v: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        for x in [-1.0, -0.77, 0.29999, 0.31, 1.99, 2.0] {
            assert_abs_diff_eq!(g.interp(&v, x), f(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn cumulative_integral_exact_for_cubics() {
        let g = Grid::new(GridSpec::uniform(97, 0.0, 1.5), &[0.4, 1.0]).unwrap();
        let f = |x: f64| x * x * x - x;
        let anti = |x: f64| x.powi(4) / 4.0 - x * x / 2.0;
        let v: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let a = g.nearest(0.4);
        let c = g.cumulative_from(&v, a);
        for (j, &x) in g.nodes().iter().enumerate() {
            assert_abs_diff_eq!(c[j], anti(x) - anti(0.4), epsilon = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn cumulative_converges_for_smooth(n in 65usize..400, bp in 0.05f64..0.95) {
            let g = Grid::new(GridSpec::uniform(n, 0.0, 1.0), &[bp]).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|&x| x.sin()).collect();
            let c = g.cumulative_from(&v, 0);
            let last = *c.last().unwrap();
            prop_assert!((last - (1.0 - 1f64.cos())).abs() < 1e-8);
        }

        #[test]
        fn nodes_strictly_increasing(n in 65usize..300, a in -3.0f64..0.0, len in 0.5f64..4.0, bp in 0.0f64..1.0) {
            let g = Grid::new(GridSpec::uniform(n, a, a + len), &[a + bp * len]).unwrap();
            prop_assert_eq!(g.len(), n);
            prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        }
    }
}
