//! Uniform 1-D and tensor 2-D grids with sampled values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParameter {
                name: "count",
                reason: format!("axis needs at least 2 points, got {count}"),
            });
        }
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("expected finite start < end, got [{start}, {end}]"),
            });
        }
        Ok(Self { start, end, count })
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Cell index `i` and fraction `θ ∈ [0,1]` with `x = x_i + θh`.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(self.start..=self.end).contains(&x) {
            return None;
        }
        let pos = (x - self.start) / self.step();
        let nearest = pos.round();
        if (pos - nearest).abs() < 1e-9 {
            let node = nearest as usize;
            // nodes snap exactly; the last node is reported as the end of the final cell
            return Some(if node + 1 >= self.count {
                (self.count - 2, 1.0)
            } else {
                (node, 0.0)
            });
        }
        let i = (pos.floor() as usize).min(self.count - 2);
        Some((i, pos - i as f64))
    }
}

/// Values of a scalar function on a uniform 1-D grid or a 2-D tensor grid.
/// For two axes the storage is row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    axes: Vec<Axis>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new_1d(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.count {
            return Err(Error::GridMismatch(format!(
                "{} values for an axis of {} points",
                values.len(),
                axis.count
            )));
        }
        Ok(Self {
            axes: vec![axis],
            values,
        })
    }

    pub fn new_2d(first: Axis, second: Axis, values: Vec<f64>) -> Result<Self> {
        if values.len() != first.count * second.count {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}×{} grid",
                values.len(),
                first.count,
                second.count
            )));
        }
        Ok(Self {
            axes: vec![first, second],
            values,
        })
    }

    pub fn from_fn_1d(axis: Axis, f: impl Fn(f64) -> f64) -> Self {
        let values = axis.points().into_iter().map(f).collect();
        Self {
            axes: vec![axis],
            values,
        }
    }

    pub fn from_fn_2d(first: Axis, second: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        let inner = second.points();
        let mut values = Vec::with_capacity(first.count * second.count);
        for x in first.points() {
            values.extend(inner.iter().map(|&y| f(x, y)));
        }
        Self {
            axes: vec![first, second],
            values,
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self) -> &Axis {
        &self.axes[0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn at(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn at2(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].count + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            axes: self.axes.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self − other|` over a shared grid.
    pub fn sup_diff(&self, other: &Self) -> Result<f64> {
        if self.axes != other.axes {
            return Err(Error::GridMismatch(
                "sup-norm difference requires identical grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.axes != other.axes {
            return Err(Error::GridMismatch("pointwise combination of different grids".into()));
        }
        Ok(Self {
            axes: self.axes.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn require_1d(&self) -> Result<&Axis> {
        if self.axes.len() != 1 {
            return Err(Error::GridMismatch("operation needs a 1-D grid function".into()));
        }
        Ok(&self.axes[0])
    }

    /// Piecewise-linear interpolation of a 1-D grid function.
    pub fn interpolate_linear(&self, x: f64) -> Result<f64> {
        let axis = self.require_1d()?;
        let (i, theta) = axis.locate(x).ok_or(Error::OutsideDomain {
            name: "x",
            value: x,
            upper: axis.end,
        })?;
        if theta == 0.0 {
            return Ok(self.values[i]);
        }
        if theta == 1.0 {
            return Ok(self.values[i + 1]);
        }
        Ok((1.0 - theta) * self.values[i] + theta * self.values[i + 1])
    }

    /// Local cubic Lagrange interpolation of a 1-D grid function (exact at
    /// nodes; falls back to linear on grids of fewer than four points).
    pub fn interpolate_cubic(&self, x: f64) -> Result<f64> {
        let axis = self.require_1d()?;
        if axis.count < 4 {
            return self.interpolate_linear(x);
        }
        let (i, theta) = axis.locate(x).ok_or(Error::OutsideDomain {
            name: "x",
            value: x,
            upper: axis.end,
        })?;
        if theta == 0.0 {
            return Ok(self.values[i]);
        }
        if theta == 1.0 {
            return Ok(self.values[i + 1]);
        }
        let base = i.saturating_sub(1).min(axis.count - 4);
        let s = (i - base) as f64 + theta;
        let v = &self.values[base..base + 4];
        let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        Ok(l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3])
    }

    /// Fourth-order finite-difference derivative of a 1-D grid function:
    /// central stencil inside, one-sided fourth-order stencils near the ends.
    pub fn derivative(&self) -> Result<Self> {
        let axis = *self.require_1d()?;
        let n = axis.count;
        if n < 5 {
            return Err(Error::InvalidParameter {
                name: "count",
                reason: "fourth-order differences need at least 5 points".into(),
            });
        }
        let h = axis.step();
        let v = &self.values;
        let mut d = vec![0.0; n];
        for i in 2..n - 2 {
            d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
        }
        let fwd = |i: usize| {
            (-25.0 * v[i] + 48.0 * v[i + 1] - 36.0 * v[i + 2] + 16.0 * v[i + 3] - 3.0 * v[i + 4])
                / (12.0 * h)
        };
        let bwd = |i: usize| {
            (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4])
                / (12.0 * h)
        };
        // skewed stencils for the second and penultimate nodes
        let skew_fwd = |i: usize| {
            (-3.0 * v[i - 1] - 10.0 * v[i] + 18.0 * v[i + 1] - 6.0 * v[i + 2] + v[i + 3])
                / (12.0 * h)
        };
        let skew_bwd = |i: usize| {
            (3.0 * v[i + 1] + 10.0 * v[i] - 18.0 * v[i - 1] + 6.0 * v[i - 2] - v[i - 3])
                / (12.0 * h)
        };
        d[0] = fwd(0);
        d[1] = skew_fwd(1);
        d[n - 2] = skew_bwd(n - 2);
        d[n - 1] = bwd(n - 1);
        Ok(Self {
            axes: self.axes.clone(),
            values: d,
        })
    }
}
