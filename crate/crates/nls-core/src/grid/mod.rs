//! Periodic uniform grids, sampled fields and spectral calculus.
//!
//! Grids are centered: on each axis the sample points are
//! `x_j = -L/2 + j*dx` for `j = 0..n`, so that `x -> -x` maps index `j` to
//! `(n - j) mod n`. Wavenumbers are stored in the usual FFT ordering.
//!
//! 2D fields are stored row-major with axis 0 (`x1`) indexing rows.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlannerScalar};

use crate::error::{NlsError, Result};

mod snapshot;

pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    dx: f64,
    k: Vec<f64>,
}

impl Grid {
    /// Build a periodic grid with `n` points per axis on `[-length/2, length/2)`.
    pub fn new(n: usize, length: f64, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(NlsError::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(NlsError::InvalidGrid(format!(
                "n must be a power of two >= 16, got {n}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(NlsError::InvalidGrid(format!("length must be positive, got {length}")));
        }
        let dk = 2.0 * PI / length;
        let half = n / 2;
        let k = (0..n)
            .map(|j| {
                let idx = if j < half { j as f64 } else { j as f64 - n as f64 };
                idx * dk
            })
            .collect();
        Ok(Grid { dim, n, length, dx: length / n as f64, k })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Total number of samples, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one cell, `dx^dim`.
    pub fn cell(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    /// Coordinate of index `j` along any axis.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx
    }

    /// Axis coordinates `x_0..x_{n-1}`.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Wavenumbers `2*pi*k/L` in FFT order (`0, 1, .., n/2-1, -n/2, .., -1`).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Wavenumbers sorted ascending, `k = -n/2 .. n/2-1`.
    pub fn wavenumbers_sorted(&self) -> Vec<f64> {
        let half = self.n / 2;
        self.k[half..].iter().chain(self.k[..half].iter()).copied().collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.dim == other.dim && self.n == other.n && self.length == other.length {
            Ok(())
        } else {
            Err(NlsError::GridMismatch(format!(
                "(dim {}, n {}, L {}) vs (dim {}, n {}, L {})",
                self.dim, self.n, self.length, other.dim, other.n, other.length
            )))
        }
    }

    /// Flat index of `(i, j)` on a 2D grid.
    pub fn index2(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Index of the mirror point `-x`.
    pub fn mirror(&self, flat: usize) -> usize {
        let n = self.n;
        let r = |j: usize| (n - j) % n;
        match self.dim {
            1 => r(flat),
            _ => r(flat / n) * n + r(flat % n),
        }
    }
}

/// Convenience wrapper matching the usual constructor name.
pub fn make_grid(n: usize, length: f64, dim: usize) -> Result<Grid> {
    Grid::new(n, length, dim)
}

#[derive(Clone, Debug)]
pub struct ComplexField {
    pub grid: Grid,
    pub values: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct RealField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NlsError::InvalidParameter("non-finite sample in field".into()));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        ComplexField { values: vec![C64::new(0.0, 0.0); grid.len()], grid: grid.clone() }
    }

    /// Sample `f(x)` on a 1D grid.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        ComplexField { grid: grid.clone(), values }
    }

    /// Sample `f(x1, x2)` on a 2D grid.
    pub fn from_fn_2d(grid: &Grid, f: impl Fn(f64, f64) -> C64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x1 = grid.x(i);
            for j in 0..n {
                values.push(f(x1, grid.x(j)));
            }
        }
        ComplexField { grid: grid.clone(), values }
    }

    pub fn re(&self) -> RealField {
        RealField { grid: self.grid.clone(), values: self.values.iter().map(|z| z.re).collect() }
    }

    pub fn im(&self) -> RealField {
        RealField { grid: self.grid.clone(), values: self.values.iter().map(|z| z.im).collect() }
    }

    pub fn modulus(&self) -> RealField {
        RealField { grid: self.grid.clone(), values: self.values.iter().map(|z| z.norm()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self - other`, pointwise.
    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(ComplexField { grid: self.grid.clone(), values })
    }

    /// `self + alpha * other`, in place.
    pub fn axpy(&mut self, alpha: C64, other: &ComplexField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: C64) {
        self.values.iter_mut().for_each(|z| *z *= alpha);
    }

    /// Sup norm of `self - other`.
    pub fn sup_distance(&self, other: &ComplexField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |acc, (a, b)| acc.max((a - b).norm())))
    }

    pub fn integrate(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.cell()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell()).sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        let mut total = self.l2_norm().powi(2);
        for axis in 0..self.grid.dim() {
            total += spectral_derivative(self, axis).l2_norm().powi(2);
        }
        total.sqrt()
    }
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NlsError::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(RealField { grid, values })
    }

    pub fn zeros(grid: &Grid) -> Self {
        RealField { values: vec![0.0; grid.len()], grid: grid.clone() }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        RealField { grid: grid.clone(), values }
    }

    pub fn from_fn_2d(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            let x1 = grid.x(i);
            for j in 0..n {
                values.push(f(x1, grid.x(j)));
            }
        }
        RealField { grid: grid.clone(), values }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<RealField> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(RealField { grid: self.grid.clone(), values })
    }

    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell()
    }

    /// `∫ self * other`.
    pub fn dot(&self, other: &RealField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn h1_norm(&self) -> f64 {
        self.to_complex().h1_norm()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &RealField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }

    /// Even part `(f(x) + f(-x))/2`.
    pub fn even_part(&self) -> RealField {
        self.parity_part(1.0)
    }

    /// Odd part `(f(x) - f(-x))/2`.
    pub fn odd_part(&self) -> RealField {
        self.parity_part(-1.0)
    }

    fn parity_part(&self, sign: f64) -> RealField {
        let values = (0..self.values.len())
            .map(|i| 0.5 * (self.values[i] + sign * self.values[self.grid.mirror(i)]))
            .collect();
        RealField { grid: self.grid.clone(), values }
    }
}

thread_local! {
    // scalar kernels: identical results on every CPU and a smaller mass bias than the SIMD paths
    static PLANNER: RefCell<FftPlannerScalar<f64>> = RefCell::new(FftPlannerScalar::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Forward/inverse FFT pair for a grid. The inverse is normalized.
#[derive(Clone)]
pub struct FftPlan {
    n: usize,
    dim: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    pub fn new(grid: &Grid) -> Self {
        FftPlan { n: grid.n(), dim: grid.dim(), fwd: plan(grid.n(), false), inv: plan(grid.n(), true) }
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.run(data, &self.fwd);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.run(data, &self.inv);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn run(&self, data: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        match self.dim {
            1 => fft.process(data),
            _ => {
                let n = self.n;
                data.par_chunks_mut(n).for_each(|row| fft.process(row));
                transpose_square(data, n);
                data.par_chunks_mut(n).for_each(|row| fft.process(row));
                transpose_square(data, n);
            }
        }
    }
}

fn transpose_square(data: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Multiply the spectrum of `f` by `symbol(k1, k2)` (`k2 = 0` in 1D).
pub fn apply_symbol(f: &ComplexField, symbol: impl Fn(usize, usize) -> C64) -> ComplexField {
    let grid = &f.grid;
    let plan = FftPlan::new(grid);
    let mut data = f.values.clone();
    plan.forward(&mut data);
    let n = grid.n();
    match grid.dim() {
        1 => data.iter_mut().enumerate().for_each(|(i, z)| *z *= symbol(i, usize::MAX)),
        _ => data.iter_mut().enumerate().for_each(|(idx, z)| *z *= symbol(idx / n, idx % n)),
    }
    plan.inverse(&mut data);
    ComplexField { grid: grid.clone(), values: data }
}

/// `Δf` of the trigonometric interpolant.
pub fn spectral_laplacian(f: &ComplexField) -> ComplexField {
    let k = f.grid.wavenumbers().to_vec();
    apply_symbol(f, |i, j| {
        let k2 = if j == usize::MAX { k[i] * k[i] } else { k[i] * k[i] + k[j] * k[j] };
        C64::new(-k2, 0.0)
    })
}

/// `∂f/∂x_axis` with the Nyquist mode zeroed.
pub fn spectral_derivative(f: &ComplexField, axis: usize) -> ComplexField {
    let k = f.grid.wavenumbers().to_vec();
    let nyq = f.grid.nyquist_index();
    apply_symbol(f, |i, j| {
        let idx = if axis == 0 { i } else { j };
        if idx == nyq {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, k[idx])
        }
    })
}

pub fn laplacian_real(f: &RealField) -> RealField {
    spectral_laplacian(&f.to_complex()).re()
}

pub fn derivative_real(f: &RealField, axis: usize) -> RealField {
    spectral_derivative(&f.to_complex(), axis).re()
}

/// Spatial translation by `shift` along `axis`, exact for the trigonometric interpolant.
pub fn spectral_shift(f: &ComplexField, axis: usize, shift: f64) -> ComplexField {
    let k = f.grid.wavenumbers().to_vec();
    let nyq = f.grid.nyquist_index();
    apply_symbol(f, |i, j| {
        let idx = if axis == 0 { i } else { j };
        if idx == nyq {
            C64::new((k[idx] * shift).cos(), 0.0)
        } else {
            C64::from_polar(1.0, -k[idx] * shift)
        }
    })
}

/// L2 norm computed from Fourier coefficients (Parseval).
pub fn l2_norm_spectral(f: &ComplexField) -> f64 {
    let plan = FftPlan::new(&f.grid);
    let mut data = f.values.clone();
    plan.forward(&mut data);
    let total: f64 = data.iter().map(|z| z.norm_sqr()).sum();
    (total * f.grid.cell() / f.grid.len() as f64).sqrt()
}

pub fn integrate(f: &RealField) -> f64 {
    f.integrate()
}

pub fn l2_norm(f: &ComplexField) -> f64 {
    f.l2_norm()
}

pub fn h1_norm(f: &ComplexField) -> f64 {
    f.h1_norm()
}
