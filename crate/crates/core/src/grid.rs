//! Uniform square grids on `[-L, L]²`, grid-sampled extended states and the
//! finite-difference / quadrature / interpolation helpers built on them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EpsError, Result};

/// `points` uniform intervals on `[-extent, extent]`, so `points + 1` nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub extent: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(extent: f64, points: usize) -> Result<Self> {
        let g = GridSpec { extent, points };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if !self.extent.is_finite() || self.extent <= 0.0 {
            return Err(EpsError::Grid(format!("extent must be finite and > 0, got {}", self.extent)));
        }
        if self.points < 16 {
            return Err(EpsError::Grid(format!("at least 16 intervals per axis required, got {}", self.points)));
        }
        if !self.points.is_multiple_of(2) {
            return Err(EpsError::Grid(format!(
                "Simpson quadrature needs an even number of intervals, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// Number of nodes per axis.
    pub fn len(&self) -> usize {
        self.points + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Composite Simpson weights `h/3·[1, 4, 2, …, 4, 1]`.
    pub fn simpson_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len())
            .map(|i| {
                let w = if i == 0 || i == self.points {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect()
    }
}

/// Composite Simpson integral of samples on the grid.
pub fn simpson(grid: &GridSpec, values: &[Complex64]) -> Complex64 {
    grid.simpson_weights()
        .iter()
        .zip(values)
        .map(|(w, v)| v * *w)
        .sum()
}

pub fn simpson_real(grid: &GridSpec, values: &[f64]) -> f64 {
    grid.simpson_weights()
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Central finite-difference stencils.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    Fourth,
    #[default]
    Eighth,
}

impl Stencil {
    pub fn half_width(&self) -> usize {
        match self {
            Stencil::Fourth => 2,
            Stencil::Eighth => 4,
        }
    }

    /// Coefficients for offsets `-w..=w` of the first derivative (times 1/h).
    pub fn first(&self) -> &'static [f64] {
        match self {
            Stencil::Fourth => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            Stencil::Eighth => &[
                1.0 / 280.0,
                -4.0 / 105.0,
                1.0 / 5.0,
                -4.0 / 5.0,
                0.0,
                4.0 / 5.0,
                -1.0 / 5.0,
                4.0 / 105.0,
                -1.0 / 280.0,
            ],
        }
    }

    /// Coefficients for offsets `-w..=w` of the second derivative (times 1/h²).
    pub fn second(&self) -> &'static [f64] {
        match self {
            Stencil::Fourth => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            Stencil::Eighth => &[
                -1.0 / 560.0,
                8.0 / 315.0,
                -1.0 / 5.0,
                8.0 / 5.0,
                -205.0 / 72.0,
                8.0 / 5.0,
                -1.0 / 5.0,
                8.0 / 315.0,
                -1.0 / 560.0,
            ],
        }
    }
}

/// First (`order = 1`) or second (`order = 2`) derivative of 1-D samples.
/// The boundary band of `stencil.half_width()` nodes is left at zero.
pub fn derivative_1d(values: &[Complex64], h: f64, stencil: Stencil, order: u8) -> Vec<Complex64> {
    let (coefs, scale) = match order {
        1 => (stencil.first(), 1.0 / h),
        2 => (stencil.second(), 1.0 / (h * h)),
        _ => panic!("only first and second derivatives are supported"),
    };
    let w = stencil.half_width();
    let n = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n <= 2 * w {
        return out;
    }
    for i in w..n - w {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in coefs.iter().enumerate() {
            if *c != 0.0 {
                acc += values[i + k - w] * *c;
            }
        }
        out[i] = acc * scale;
    }
    out
}

/// Axis of a 2-D grid state: `Q` indexes rows, `P` indexes columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Q,
    P,
}

/// A complex extended state χ(q, p) sampled on a square grid.
///
/// When `cross_phase` holds `Some(hbar)`, the represented function is
/// `e^{-iqp/hbar} · data(q, p)`; the phase is kept symbolic so that the
/// stored samples stay smooth.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub grid: GridSpec,
    pub time: f64,
    pub cross_phase: Option<f64>,
    /// Row-major samples, `data[i * len + j]` at `(q_i, p_j)`.
    pub data: Vec<Complex64>,
}

impl GridState {
    pub fn zeros(grid: GridSpec, time: f64, cross_phase: Option<f64>) -> Self {
        let n = grid.len();
        GridState {
            grid,
            time,
            cross_phase,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn<F>(grid: GridSpec, time: f64, cross_phase: Option<f64>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let n = grid.len();
        let xs = grid.nodes();
        let data: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|k| f(xs[k / n], xs[k % n]))
            .collect();
        GridState {
            grid,
            time,
            cross_phase,
            data,
        }
    }

    /// Product state `u(q)·v(p)`.
    pub fn from_product(
        grid: GridSpec,
        time: f64,
        cross_phase: Option<f64>,
        u: &[Complex64],
        v: &[Complex64],
    ) -> Self {
        let n = grid.len();
        assert_eq!(u.len(), n);
        assert_eq!(v.len(), n);
        let mut data = Vec::with_capacity(n * n);
        for ui in u {
            data.extend(v.iter().map(|vj| ui * vj));
        }
        GridState {
            grid,
            time,
            cross_phase,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n() + j]
    }

    fn phase(&self, q: f64, p: f64) -> Complex64 {
        match self.cross_phase {
            Some(hbar) => Complex64::from_polar(1.0, -q * p / hbar),
            None => Complex64::new(1.0, 0.0),
        }
    }

    /// Full value of the represented function, cross phase included.
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.at(i, j) * self.phase(self.grid.x(i), self.grid.x(j))
    }

    /// Same function with the cross phase multiplied into the samples.
    pub fn materialize(&self) -> GridState {
        if self.cross_phase.is_none() {
            return self.clone();
        }
        let n = self.n();
        let data = (0..n * n).map(|k| self.value(k / n, k % n)).collect();
        GridState {
            grid: self.grid,
            time: self.time,
            cross_phase: None,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridState {
        GridState {
            data: self.data.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    /// `a·self + b·other`; both states must share grid and cross-phase flag.
    pub fn lincomb(&self, a: Complex64, other: &GridState, b: Complex64) -> Result<GridState> {
        self.check_compatible(other)?;
        Ok(GridState {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            ..self.clone()
        })
    }

    pub fn check_compatible(&self, other: &GridState) -> Result<()> {
        if self.grid != other.grid {
            return Err(EpsError::Grid("states live on different grids".into()));
        }
        if self.cross_phase != other.cross_phase {
            return Err(EpsError::Grid("states differ in their cross-phase flag".into()));
        }
        Ok(())
    }

    /// Simpson `∫∫|χ|² dq dp`. The cross phase has unit modulus and drops out.
    pub fn norm_sq(&self) -> f64 {
        let w = self.grid.simpson_weights();
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| w[i] * w[j] * self.at(i, j).norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Plain sum of `|data|²·h²` over nodes at least `band` away from every edge.
    pub fn interior_norm_sq(&self, band: usize) -> f64 {
        let n = self.n();
        let h = self.grid.spacing();
        let mut acc = 0.0;
        for i in band..n - band {
            for j in band..n - band {
                acc += self.at(i, j).norm_sqr();
            }
        }
        acc * h * h
    }

    /// Simpson L² distance between the represented functions.
    pub fn l2_distance(&self, other: &GridState) -> Result<f64> {
        if self.grid != other.grid {
            return Err(EpsError::Grid("states live on different grids".into()));
        }
        let (a, b) = if self.cross_phase == other.cross_phase {
            (self.clone(), other.clone())
        } else {
            (self.materialize(), other.materialize())
        };
        Ok(a.lincomb(Complex64::new(1.0, 0.0), &b, Complex64::new(-1.0, 0.0))?
            .norm())
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.n();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n()).map(|i| self.at(i, j)).collect()
    }

    /// Derivative of the stored samples along one axis; the band is zero along that axis.
    pub fn derivative(&self, axis: Axis, stencil: Stencil, order: u8) -> GridState {
        let n = self.n();
        let h = self.grid.spacing();
        let mut out = GridState::zeros(self.grid, self.time, self.cross_phase);
        match axis {
            Axis::P => {
                out.data
                    .par_chunks_mut(n)
                    .enumerate()
                    .for_each(|(i, row)| row.copy_from_slice(&derivative_1d(self.row(i), h, stencil, order)));
            }
            Axis::Q => {
                let cols: Vec<Vec<Complex64>> = (0..n)
                    .into_par_iter()
                    .map(|j| derivative_1d(&self.column(j), h, stencil, order))
                    .collect();
                for (j, col) in cols.iter().enumerate() {
                    for (i, v) in col.iter().enumerate() {
                        out.data[i * n + j] = *v;
                    }
                }
            }
        }
        out
    }

    /// Zeroes every node within `band` of an edge.
    pub fn zero_band(&mut self, band: usize) {
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                if i < band || j < band || i >= n - band || j >= n - band {
                    self.data[i * n + j] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Rank-one factorization `data ≈ u(q)·v(p)` through the largest sample.
    /// Returns `(u, v, relative_residual)`.
    pub fn factorize(&self) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
        let n = self.n();
        let (kmax, vmax) = self
            .data
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, v)| (k, *v))
            .ok_or_else(|| EpsError::Shape("empty state".into()))?;
        if vmax.norm() == 0.0 {
            return Err(EpsError::Shape("state is identically zero".into()));
        }
        let (imax, jmax) = (kmax / n, kmax % n);
        let u = self.column(jmax);
        let v: Vec<Complex64> = self.row(imax).iter().map(|x| x / vmax).collect();
        let mut res = 0.0;
        let mut tot = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = self.at(i, j);
                res += (d - u[i] * v[j]).norm_sqr();
                tot += d.norm_sqr();
            }
        }
        Ok((u, v, (res / tot).sqrt()))
    }
}

/// 8-point Lagrange interpolation of grid samples; `None` outside `[-L, L]`.
pub fn interpolate(grid: &GridSpec, values: &[Complex64], x: f64) -> Option<Complex64> {
    const STENCIL: usize = 8;
    let h = grid.spacing();
    let s = (x + grid.extent) / h;
    let n = grid.points as f64;
    if !(-1e-9..=n + 1e-9).contains(&s) {
        return None;
    }
    let s = s.clamp(0.0, n);
    let base = (s.floor() as isize - 3).clamp(0, (grid.len() - STENCIL) as isize) as usize;
    let local = s - base as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..STENCIL {
        if (local - k as f64).abs() < 1e-14 {
            return Some(values[base + k]);
        }
        let mut w = 1.0;
        for m in 0..STENCIL {
            if m != k {
                w *= (local - m as f64) / (k as f64 - m as f64);
            }
        }
        acc += values[base + k] * w;
    }
    Some(acc)
}

/// Checks that samples are negligible (≤ `rel`·max) within `band` nodes of either end.
pub fn tail_is_negligible(values: &[Complex64], band: usize, rel: f64) -> bool {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let n = values.len();
    let edge = values[..band.min(n)]
        .iter()
        .chain(&values[n.saturating_sub(band)..])
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    edge <= rel * max
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_small_or_odd_grids() {
        assert!(GridSpec::new(8.0, 8).is_err());
        assert!(GridSpec::new(8.0, 17).is_err());
        assert!(GridSpec::new(-1.0, 32).is_err());
        assert!(GridSpec::new(8.0, 16).is_ok());
    }

    #[test]
    fn simpson_integrates_gaussian() {
        let g = GridSpec::new(10.0, 256).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| (-x * x).exp()).collect();
        assert_abs_diff_eq!(simpson_real(&g, &v), std::f64::consts::PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn stencils_differentiate_polynomials_exactly() {
        let g = GridSpec::new(1.0, 32).unwrap();
        for stencil in [Stencil::Fourth, Stencil::Eighth] {
            let deg = 2 * stencil.half_width();
            let v: Vec<Complex64> = g.nodes().iter().map(|x| Complex64::new(x.powi(deg as i32), 0.0)).collect();
            let d1 = derivative_1d(&v, g.spacing(), stencil, 1);
            let d2 = derivative_1d(&v, g.spacing(), stencil, 2);
            for i in stencil.half_width()..g.len() - stencil.half_width() {
                let x = g.x(i);
                let e1 = deg as f64 * x.powi(deg as i32 - 1);
                let e2 = (deg * (deg - 1)) as f64 * x.powi(deg as i32 - 2);
                assert!((d1[i].re - e1).abs() < 1e-8, "{stencil:?} d1 at {x}");
                assert!((d2[i].re - e2).abs() < 1e-6, "{stencil:?} d2 at {x}");
            }
        }
    }

    #[test]
    fn interpolation_reproduces_degree_seven() {
        let g = GridSpec::new(2.0, 20).unwrap();
        let f = |x: f64| 1.0 - x + 0.5 * x.powi(3) - 0.1 * x.powi(7);
        let v: Vec<Complex64> = g.nodes().iter().map(|x| Complex64::new(f(*x), 0.0)).collect();
        for x in [-2.0, -1.97, -0.33, 0.0, 0.71, 1.999, 2.0] {
            let y = interpolate(&g, &v, x).unwrap();
            assert!((y.re - f(x)).abs() < 1e-10, "x = {x}");
        }
        assert!(interpolate(&g, &v, 2.1).is_none());
    }

    #[test]
    fn factorization_of_product_state() {
        let g = GridSpec::new(5.0, 32).unwrap();
        let u: Vec<Complex64> = g.nodes().iter().map(|x| Complex64::new((-x * x).exp(), 0.1 * x)).collect();
        let v: Vec<Complex64> = g.nodes().iter().map(|x| Complex64::new(0.0, (-0.5 * x * x).exp())).collect();
        let s = GridState::from_product(g, 0.0, None, &u, &v);
        let (_, _, r) = s.factorize().unwrap();
        assert!(r < 1e-14);
        let t = GridState::from_fn(g, 0.0, None, |q, p| Complex64::new((-(q - p).powi(2)).exp(), 0.0));
        assert!(t.factorize().unwrap().2 > 1e-3);
    }

    #[test]
    fn cross_phase_materializes() {
        let g = GridSpec::new(3.0, 16).unwrap();
        let s = GridState::from_fn(g, 0.0, Some(1.0), |_, _| Complex64::new(1.0, 0.0));
        let m = s.materialize();
        let (q, p) = (g.x(3), g.x(11));
        assert!((m.at(3, 11) - Complex64::from_polar(1.0, -q * p)).norm() < 1e-15);
        assert!(s.l2_distance(&m).unwrap() < 1e-14);
    }
}
