//! Periodic grid calculus on the 1-torus and 2-torus.
//!
//! Differentiation is pseudo-spectral: a line of samples is transformed with
//! an FFT, multiplied by the symbol `(ik)^order` and transformed back. The
//! Nyquist mode of an even-sized grid has no real skew-adjoint derivative, so
//! every operator here annihilates it. Consequently:
//!
//! * `derivative` is exactly skew-adjoint for [`inner_product`];
//! * `antiderivative` is the pseudo-inverse of `derivative` (zero-mean,
//!   Nyquist-free range);
//! * the discrete delta is the nearest-node indicator with its Nyquist
//!   component removed, so that `derivative(green_kernel(s)) = delta_kernel(s) - 1/(2pi)`
//!   holds as an exact matrix identity.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * PI;

/// Smallest admissible number of points along an axis.
pub const MIN_POINTS: usize = 8;

/// Uniform grid on the 1- or 2-torus `[0, 2pi)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid {
    dim: usize,
    sizes: [usize; 2],
}

impl Grid {
    pub fn new_1d(n: usize) -> Result<Self> {
        check_axis_size(n)?;
        Ok(Self { dim: 1, sizes: [n, 1] })
    }

    pub fn new_2d(n1: usize, n2: usize) -> Result<Self> {
        check_axis_size(n1)?;
        check_axis_size(n2)?;
        Ok(Self { dim: 2, sizes: [n1, n2] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points along `axis`.
    pub fn size(&self, axis: usize) -> usize {
        self.sizes[axis]
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.sizes[0] * self.sizes[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        TWO_PI / self.sizes[axis] as f64
    }

    /// Quadrature weight of a single node.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Total measure of the torus, `(2pi)^dim`.
    pub fn volume(&self) -> f64 {
        TWO_PI.powi(self.dim as i32)
    }

    pub fn node(&self, axis: usize, j: usize) -> f64 {
        j as f64 * self.spacing(axis)
    }

    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.sizes[axis]).map(|j| self.node(axis, j)).collect()
    }

    /// Flat index of node `(i, j)`; axis 0 is the slow index.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.sizes[1] + j
    }

    /// Index of the node nearest to `s` along `axis` (periodic).
    pub fn nearest_node(&self, axis: usize, s: f64) -> Result<usize> {
        if !(0.0..TWO_PI).contains(&s) {
            return Err(Error::SampleOutOfRange(s));
        }
        let n = self.sizes[axis];
        Ok(((s / self.spacing(axis)).round() as usize) % n)
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            return Err(Error::InvalidAxis { axis, dim: self.dim });
        }
        Ok(())
    }

    /// The 1D grid along one axis.
    pub fn axis_grid(&self, axis: usize) -> Grid {
        Grid { dim: 1, sizes: [self.sizes[axis], 1] }
    }
}

fn check_axis_size(n: usize) -> Result<()> {
    if n < MIN_POINTS || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("axis size must be even and >= {MIN_POINTS}, got {n}")));
    }
    Ok(())
}

/// Real samples of a periodic function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    /// Checked constructor: length must match and every value must be finite.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f(x)` on a 1D grid (on a 2D grid `f` sees the x1 coordinate).
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn2(grid, |x1, _| f(x1))
    }

    /// Samples `f(x1, x2)`; on a 1D grid `x2 = 0`.
    pub fn from_fn2(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.size(0) {
            let x1 = grid.node(0, i);
            for j in 0..grid.size(1) {
                let x2 = if grid.dim() == 2 { grid.node(1, j) } else { 0.0 };
                values.push(f(x1, x2));
            }
        }
        Self { grid, values }
    }

    /// Tensor product `a(x1) b(x2)` of two 1D functions on a 2D grid.
    pub fn outer(a: &GridFunction, b: &GridFunction) -> Result<Self> {
        if a.grid.dim() != 1 || b.grid.dim() != 1 {
            return Err(Error::WrongDimension("outer product needs two 1D factors".into()));
        }
        let grid = Grid::new_2d(a.grid.size(0), b.grid.size(0))?;
        let mut values = Vec::with_capacity(grid.len());
        for &ai in &a.values {
            values.extend(b.values.iter().map(|bj| ai * bj));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch in pointwise operation");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, values }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Integral over the torus by the uniform rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.grid.len() as f64
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.zip_map(other, |a, b| a - b).max_abs()
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: &GridFunction) -> GridFunction {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &GridFunction {
    type Output = GridFunction;
    fn neg(self) -> GridFunction {
        self.map(|v| -v)
    }
}

// ---------------------------------------------------------------------------
// spectral machinery
// ---------------------------------------------------------------------------

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plans>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache.entry(n).or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))).clone()
    })
}

/// Signed wavenumber of FFT bin `i`; `None` for the Nyquist bin.
fn wavenumber(i: usize, n: usize) -> Option<f64> {
    if i == n / 2 {
        None
    } else if i < n / 2 {
        Some(i as f64)
    } else {
        Some(i as f64 - n as f64)
    }
}

/// Multiplies every line along `axis` by a Fourier symbol. The symbol gets the
/// signed wavenumber, or `None` at the Nyquist bin.
fn apply_symbol(f: &GridFunction, axis: usize, symbol: impl Fn(Option<f64>) -> Complex64) -> GridFunction {
    let grid = f.grid;
    let n = grid.size(axis);
    let (fwd, inv) = plans(n);
    let weights: Vec<Complex64> = (0..n).map(|i| symbol(wavenumber(i, n)) / n as f64).collect();
    let (lines, stride, step) =
        if axis == 0 { (grid.size(1), 1, grid.size(1)) } else { (grid.size(0), grid.size(1), 1) };
    let mut out = vec![0.0; grid.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for line in 0..lines {
        let start = line * stride;
        for (k, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(f.values[start + k * step], 0.0);
        }
        fwd.process(&mut buf);
        for (b, w) in buf.iter_mut().zip(&weights) {
            *b *= w;
        }
        inv.process(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            out[start + k * step] = b.re;
        }
    }
    GridFunction::from_raw(grid, out)
}

/// Spectral derivative of order 1 or 2 along `axis`.
pub fn derivative(f: &GridFunction, axis: usize, order: usize) -> Result<GridFunction> {
    f.grid.check_axis(axis)?;
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    f.ensure_finite()?;
    Ok(spectral_derivative(f, axis, order))
}

pub(crate) fn spectral_derivative(f: &GridFunction, axis: usize, order: usize) -> GridFunction {
    apply_symbol(f, axis, |k| match k {
        Some(k) => Complex64::new(0.0, k).powu(order as u32),
        None => Complex64::new(0.0, 0.0),
    })
}

/// First derivative along axis 0 (the x axis of a 1D grid).
pub(crate) fn dx(f: &GridFunction) -> GridFunction {
    spectral_derivative(f, 0, 1)
}

/// Zero-mean antiderivative of a mean-free 1D function.
pub fn antiderivative(f: &GridFunction) -> Result<GridFunction> {
    if f.grid.dim() != 1 {
        return Err(Error::WrongDimension("antiderivative is defined on the 1-torus".into()));
    }
    f.ensure_finite()?;
    check_mean_free(f)?;
    Ok(pseudo_antiderivative(f, 0))
}

/// Fails with [`Error::NonZeroMean`] unless `|mean(f)| <= 1e-10 max|f|`.
pub fn check_mean_free(f: &GridFunction) -> Result<()> {
    let mean = f.mean();
    if mean.abs() > 1e-10 * f.max_abs() {
        return Err(Error::NonZeroMean { mean });
    }
    Ok(())
}

/// Pseudo-inverse of the derivative along `axis`: drops the mean and the
/// Nyquist mode, then divides by `ik`. No precondition is checked.
pub fn pseudo_antiderivative(f: &GridFunction, axis: usize) -> GridFunction {
    apply_symbol(f, axis, |k| match k {
        Some(k) if k != 0.0 => Complex64::new(0.0, -1.0 / k),
        _ => Complex64::new(0.0, 0.0),
    })
}

/// Zeroes all modes with `|k| > fraction * n / 2` along every axis
/// (`fraction = 2/3` is the usual dealiasing rule).
pub fn low_pass(f: &GridFunction, fraction: f64) -> GridFunction {
    let mut out = f.clone();
    for axis in 0..f.grid.dim() {
        let cutoff = fraction * f.grid.size(axis) as f64 / 2.0;
        out = apply_symbol(&out, axis, |k| match k {
            Some(k) if k.abs() <= cutoff => Complex64::new(1.0, 0.0),
            _ => Complex64::new(0.0, 0.0),
        });
    }
    out
}

/// Removes the Nyquist component along every axis.
pub fn remove_nyquist(f: &GridFunction) -> GridFunction {
    let mut out = f.clone();
    for axis in 0..f.grid.dim() {
        out = apply_symbol(&out, axis, |k| match k {
            Some(_) => Complex64::new(1.0, 0.0),
            None => Complex64::new(0.0, 0.0),
        });
    }
    out
}

/// `sum f_j g_j * cell volume`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.ensure_same_grid(g)?;
    Ok(dot(f, g))
}

pub(crate) fn dot(f: &GridFunction, g: &GridFunction) -> f64 {
    f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum::<f64>() * f.grid.cell_volume()
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    Delta,
    Green,
}

/// A discrete distribution centred at a sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelVector {
    pub kind: KernelKind,
    pub centre: f64,
    pub function: GridFunction,
}

impl KernelVector {
    pub fn values(&self) -> &[f64] {
        self.function.values()
    }
}

fn require_1d(grid: &Grid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::WrongDimension("kernels are built on the 1-torus".into()));
    }
    Ok(())
}

/// Discrete delta at the node nearest to `s`: `1/h` on that node, minus its
/// Nyquist component `(-1)^(j-m) / (2pi)`. Unit mass, and exact sifting
/// `<f, delta_s> = f(x_m)` for every Nyquist-free `f`.
pub fn delta_kernel(grid: &Grid, s: f64) -> Result<KernelVector> {
    require_1d(grid)?;
    let m = grid.nearest_node(0, s)?;
    let h = grid.spacing(0);
    let values = (0..grid.size(0))
        .map(|j| {
            let alt = if (j + grid.size(0) - m).is_multiple_of(2) { 1.0 } else { -1.0 };
            let spike = if j == m { 1.0 / h } else { 0.0 };
            spike - alt / TWO_PI
        })
        .collect();
    Ok(KernelVector {
        kind: KernelKind::Delta,
        centre: grid.node(0, m),
        function: GridFunction::from_raw(*grid, values),
    })
}

/// Periodic Green's function of the derivative centred at `s`: the zero-mean
/// sawtooth `G(x - s)` with `G' = delta - 1/(2pi)`.
pub fn green_kernel(grid: &Grid, s: f64) -> Result<KernelVector> {
    let delta = delta_kernel(grid, s)?;
    Ok(KernelVector {
        kind: KernelKind::Green,
        centre: delta.centre,
        function: pseudo_antiderivative(&delta.function, 0),
    })
}

// ---------------------------------------------------------------------------
// dense operators
// ---------------------------------------------------------------------------

fn operator_matrix(grid: &Grid, op: impl Fn(&GridFunction) -> GridFunction) -> DMatrix<f64> {
    let n = grid.len();
    let mut m = DMatrix::zeros(n, n);
    let mut unit = GridFunction::zeros(*grid);
    for col in 0..n {
        unit.values[col] = 1.0;
        let image = op(&unit);
        m.column_mut(col).copy_from_slice(image.values());
        unit.values[col] = 0.0;
    }
    m
}

/// Dense matrix of the spectral first derivative on a 1D grid.
pub fn derivative_matrix(grid: &Grid) -> Result<DMatrix<f64>> {
    require_1d(grid)?;
    Ok(operator_matrix(grid, dx))
}

/// Dense matrix of the zero-mean antiderivative (pseudo-inverse of the
/// derivative) on a 1D grid.
pub fn antiderivative_matrix(grid: &Grid) -> Result<DMatrix<f64>> {
    require_1d(grid)?;
    Ok(operator_matrix(grid, |f| pseudo_antiderivative(f, 0)))
}

/// Applies a dense matrix to grid samples.
pub fn apply_matrix(m: &DMatrix<f64>, f: &GridFunction) -> GridFunction {
    let v = nalgebra::DVector::from_column_slice(f.values());
    GridFunction::from_raw(f.grid(), (m * v).as_slice().to_vec())
}
