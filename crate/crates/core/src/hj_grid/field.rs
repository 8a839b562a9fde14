use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// Uniform grid on the unit torus `T^dim` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Input(format!("periodic grids are 1-D or 2-D, got {dim}")));
        }
        if n < 8 {
            return Err(Error::Input(format!("periodic grid needs n >= 8, got {n}")));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis integer indices of a node (axis 0 slowest).
    #[inline]
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    #[inline]
    pub fn index(&self, axes: [usize; 2]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[0] * self.n + axes[1]
        }
    }

    /// Coordinates `i/n` of a node.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let a = self.axes(idx);
        (0..self.dim).map(|k| a[k] as f64 / self.n as f64).collect()
    }

    /// Node reached from `idx` by the integer displacement `off` (wrapping).
    #[inline]
    pub fn shift(&self, idx: usize, off: [i64; 2]) -> usize {
        let a = self.axes(idx);
        let n = self.n as i64;
        let mut b = [0usize; 2];
        for k in 0..self.dim {
            b[k] = (a[k] as i64 + off[k]).rem_euclid(n) as usize;
        }
        self.index(b)
    }
}

/// A function sampled on a [`PeriodicGrid`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    grid: PeriodicGrid,
    values: Vec<f64>,
    time: f64,
    lipschitz: f64,
}

impl ValueField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!("field value at node {i} is not finite")));
        }
        let lipschitz = lipschitz_estimate(&grid, &values);
        Ok(Self {
            grid,
            values,
            time,
            lipschitz,
        })
    }

    pub fn from_fn(grid: PeriodicGrid, time: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid, values, time)
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()], 0.0)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Maximum adjacent difference divided by the spacing.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Applies `f` to every value; the Lipschitz estimate is recomputed.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.time)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `sup |self − other|`.
    pub fn sup_distance(&self, other: &ValueField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Central-difference gradient at every node.
    pub fn central_gradient(&self) -> Vec<[f64; 2]> {
        let g = &self.grid;
        let inv = 0.5 * g.n() as f64;
        (0..g.len())
            .map(|i| {
                let mut out = [0.0; 2];
                for (k, slot) in out.iter_mut().enumerate().take(g.dim()) {
                    let mut e = [0i64; 2];
                    e[k] = 1;
                    let plus = self.values[g.shift(i, e)];
                    e[k] = -1;
                    let minus = self.values[g.shift(i, e)];
                    *slot = (plus - minus) * inv;
                }
                out
            })
            .collect()
    }

    /// Periodic multilinear interpolation of node data `data` at `x`.
    pub fn interpolate_nodes<T: Copy>(grid: &PeriodicGrid, data: &[T], x: &[f64], mut acc: impl FnMut(T, f64)) {
        let n = grid.n();
        let mut base = [0usize; 2];
        let mut frac = [0.0; 2];
        for k in 0..grid.dim() {
            let s = x[k].rem_euclid(1.0) * n as f64;
            let i = (s.floor() as usize).min(n - 1);
            base[k] = i;
            frac[k] = s - i as f64;
        }
        for corner in 0..(1usize << grid.dim()) {
            let mut w = 1.0;
            let mut a = [0usize; 2];
            for k in 0..grid.dim() {
                let up = corner >> k & 1 == 1;
                a[k] = if up { (base[k] + 1) % n } else { base[k] };
                w *= if up { frac[k] } else { 1.0 - frac[k] };
            }
            acc(data[grid.index(a)], w);
        }
    }

    /// Periodic multilinear interpolation of the field at `x`.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        Self::interpolate_nodes(&self.grid, &self.values, x, |v, w| total += v * w);
        total
    }

    /// CSV: a `dim,n,time` header and its values, then one row per node with
    /// the node index, coordinates and value (17 significant digits).
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let g = &self.grid;
        writeln!(out, "dim,n,time")?;
        writeln!(out, "{},{},{:.16e}", g.dim(), g.n(), self.time)?;
        let coord_cols: String = (0..g.dim()).map(|k| format!(",x{k}")).collect();
        writeln!(out, "node{coord_cols},value")?;
        let mut line = String::new();
        for (i, v) in self.values.iter().enumerate() {
            line.clear();
            write!(line, "{i}").unwrap();
            for c in g.coords(i) {
                write!(line, ",{c:.16e}").unwrap();
            }
            write!(line, ",{v:.16e}").unwrap();
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    msg: format!("missing {what}"),
                }),
            }
        };
        let (l1, header) = next("header")?;
        if header.trim() != "dim,n,time" {
            return Err(Error::Parse {
                line: l1,
                msg: format!("unexpected header `{header}`"),
            });
        }
        let (l2, meta) = next("metadata")?;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        let bad = |msg: &str| Error::Parse {
            line: l2,
            msg: msg.to_string(),
        };
        if parts.len() != 3 {
            return Err(bad("expected dim,n,time"));
        }
        let dim: usize = parts[0].parse().map_err(|_| bad("bad dim"))?;
        let n: usize = parts[1].parse().map_err(|_| bad("bad n"))?;
        let time: f64 = parts[2].parse().map_err(|_| bad("bad time"))?;
        let grid = PeriodicGrid::new(dim, n)?;
        next("column header")?;
        let mut values = vec![f64::NAN; grid.len()];
        let mut seen = 0;
        for (i, line) in lines {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.trim().split(',').collect();
            let perr = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            if cols.len() != dim + 2 {
                return Err(perr("wrong column count"));
            }
            let node: usize = cols[0].parse().map_err(|_| perr("bad node index"))?;
            if node >= grid.len() {
                return Err(perr("node index out of range"));
            }
            values[node] = cols[dim + 1].parse().map_err(|_| perr("bad value"))?;
            seen += 1;
        }
        if seen != grid.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {} rows, found {seen}", grid.len()),
            });
        }
        Self::new(grid, values, time)
    }
}

fn lipschitz_estimate(grid: &PeriodicGrid, values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        for k in 0..grid.dim() {
            let mut e = [0i64; 2];
            e[k] = 1;
            let j = grid.shift(i, e);
            worst = worst.max((values[j] - values[i]).abs());
        }
    }
    worst * grid.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_rejects_coarse_or_3d() {
        assert!(PeriodicGrid::new(1, 4).is_err());
        assert!(PeriodicGrid::new(3, 16).is_err());
        let g = PeriodicGrid::new(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.spacing() * g.n() as f64, 1.0);
        assert_eq!(g.shift(g.index([0, 7]), [-1, 1]), g.index([7, 0]));
    }

    #[test]
    fn lipschitz_of_cone() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        let f = ValueField::from_fn(g, 0.0, |x| (x[0] - 0.5).abs()).unwrap();
        assert!((f.lipschitz() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = PeriodicGrid::new(1, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(ValueField::new(g, v, 0.0).is_err());
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let f = ValueField::from_fn(g, 0.0, |x| (6.0 * x[0]).sin() + x[1]).unwrap();
        for i in [0, 17, 255] {
            assert!((f.interpolate(&g.coords(i)) - f.values()[i]).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            dim in 1usize..=2,
            n in 8usize..20,
            seed in any::<u64>(),
            time in -1e3f64..1e3,
        ) {
            let g = PeriodicGrid::new(dim, n).unwrap();
            let mut s = seed;
            let values: Vec<f64> = (0..g.len())
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    f64::from_bits((s >> 12) | 0x3ff0_0000_0000_0000) * if s & 1 == 0 { 1e-7 } else { -3e5 }
                })
                .collect();
            let f = ValueField::new(g, values, time).unwrap();
            let mut buf = Vec::new();
            f.write_csv(&mut buf).unwrap();
            let back = ValueField::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.time().to_bits(), f.time().to_bits());
            for (a, b) in back.values().iter().zip(f.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
