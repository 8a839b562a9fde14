//! Axis-aligned uniform lattices on boxes of R^k.
//!
//! Used for cohomology (P) grids, slope grids of tabulated effective
//! Lagrangians, and the non-periodic windows of H_1 on which homogenized
//! solutions are evaluated.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBox {
    lo: Vec<f64>,
    step: f64,
    counts: Vec<usize>,
}

impl LatticeBox {
    pub fn new(lo: Vec<f64>, step: f64, counts: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != counts.len() {
            return Err(Error::Input("lattice needs matching, non-empty lo/counts".into()));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Input(format!("lattice step must be positive, got {step}")));
        }
        if counts.contains(&0) || lo.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("lattice counts must be positive and lo finite".into()));
        }
        Ok(Self { lo, step, counts })
    }

    /// `count` points per axis spanning `[-half_width, half_width]`.
    pub fn symmetric(dim: usize, half_width: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Input(
                "symmetric lattice needs at least 2 points per axis".into(),
            ));
        }
        let step = 2.0 * half_width / (count - 1) as f64;
        Self::new(vec![-half_width; dim], step, vec![count; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.coord(axis, self.counts[axis] - 1)
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.step
    }

    /// Axis 0 varies slowest.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            out[axis] = idx % self.counts[axis];
            idx /= self.counts[axis];
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.counts).fold(0, |acc, (&i, &c)| acc * c + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coord(axis, i))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.multi_index(idx)
            .iter()
            .zip(&self.counts)
            .any(|(&i, &c)| i == 0 || i + 1 == c)
    }

    /// Fractional lattice coordinate of `x` along `axis`.
    fn fractional(&self, axis: usize, x: f64) -> f64 {
        (x - self.lo[axis]) / self.step
    }

    /// Lattice node within `1e-9` steps of `x` on every axis, if any.
    pub fn snap(&self, x: &[f64]) -> Option<usize> {
        let mut multi = Vec::with_capacity(self.dim());
        for (axis, &xa) in x.iter().enumerate() {
            let s = self.fractional(axis, xa);
            let r = s.round();
            if (s - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.counts[axis] {
                return None;
            }
            multi.push(r as usize);
        }
        Some(self.flat_index(&multi))
    }

    /// Multilinear interpolation weights `(flat index, weight)` for `x`, or
    /// `None` when `x` lies outside the box.
    pub fn interpolation_stencil(&self, x: &[f64]) -> Option<Vec<(usize, f64)>> {
        let dim = self.dim();
        let mut base = Vec::with_capacity(dim);
        let mut frac = Vec::with_capacity(dim);
        for (axis, &xa) in x.iter().enumerate() {
            let s = self.fractional(axis, xa);
            let last = (self.counts[axis] - 1) as f64;
            if s < -1e-9 || s > last + 1e-9 {
                return None;
            }
            let s = s.clamp(0.0, last);
            let i0 = (s.floor() as usize).min(self.counts[axis].saturating_sub(2));
            let mut t = s - i0 as f64;
            if t < 1e-9 {
                t = 0.0;
            } else if t > 1.0 - 1e-9 {
                t = 1.0;
            }
            base.push(i0);
            frac.push(t);
        }
        let mut out = Vec::with_capacity(1 << dim);
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut multi = Vec::with_capacity(dim);
            for axis in 0..dim {
                let up = corner >> axis & 1 == 1;
                if self.counts[axis] == 1 {
                    if up {
                        w = 0.0;
                    }
                    multi.push(0);
                    continue;
                }
                multi.push(base[axis] + usize::from(up));
                w *= if up { frac[axis] } else { 1.0 - frac[axis] };
            }
            if w > 0.0 {
                out.push((self.flat_index(&multi), w));
            }
        }
        Some(out)
    }
}
