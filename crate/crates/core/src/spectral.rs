//! Periodic grids, the discrete Fourier pair and spectral calculus.
//!
//! The transform convention is the one used throughout the solver:
//!
//! ```text
//! Ũ_k = (1/N) Σ_j U_j exp(−i k X_j),      U_j = Σ_k Ũ_k exp(i k X_j),
//! ```
//!
//! with `X_j = 2πj/N` the normalized node and `k ∈ {−N/2, …, N/2−1}`.
//! Coefficients are stored in transform-native (wrapped) order: index `i`
//! holds `k = i` for `i < N/2` and `k = i − N` otherwise. Use
//! [`Grid::wavenumber`] or [`Grid::physical_order`] instead of doing that
//! arithmetic by hand.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Imaginary residue, relative to the ℓ¹ norm of the spectrum, above which an
/// inverse transform is rejected instead of truncated to its real part.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Uniform periodic grid on `[a, b)` together with cached FFT plans.
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    nodes: Vec<f64>,
    wavenumbers: Vec<i64>,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && self.n == other.n
    }
}

impl Grid {
    /// Builds the grid `x_j = a + j(b−a)/N`, `j = 0..N`.
    ///
    /// `N` must be even and at least 4, and `b > a`.
    pub fn new(a: f64, b: f64, n: usize) -> Result<Arc<Self>> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Config(format!(
                "domain [{a}, {b}] is empty or non-finite; need b > a"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::Config(format!(
                "node count N = {n} must be even and at least 4"
            )));
        }
        let length = b - a;
        let dx = length / n as f64;
        let nodes = (0..n).map(|j| a + j as f64 * dx).collect();
        let half = (n / 2) as i64;
        let wavenumbers = (0..n as i64)
            .map(|i| if i < half { i } else { i - n as i64 })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            a,
            b,
            n,
            nodes,
            wavenumbers,
            scale: 2.0 * PI / length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// `2π/(b−a)`: converts integer wavenumbers to physical ones.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Integer wavenumbers in storage (wrapped) order.
    pub fn wavenumbers(&self) -> &[i64] {
        &self.wavenumbers
    }

    /// Integer wavenumber stored at `index`.
    pub fn wavenumber(&self, index: usize) -> i64 {
        self.wavenumbers[index]
    }

    /// Physical wavenumber `scale · k` stored at `index`.
    pub fn angular(&self, index: usize) -> f64 {
        self.scale * self.wavenumbers[index] as f64
    }

    /// Storage index of integer wavenumber `k`, `−N/2 ≤ k < N/2`.
    pub fn index_of(&self, k: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(-n / 2 <= k && k < n / 2, "wavenumber {k} out of range");
        k.rem_euclid(n) as usize
    }

    /// Storage index of the Nyquist mode `k = −N/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// `(k, index)` pairs in physical order `k = −N/2, …, N/2−1`.
    pub fn physical_order(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        let half = (self.n / 2) as i64;
        (-half..half).map(move |k| (k, self.index_of(k)))
    }

    /// Normalized coordinate `X = 2π(x−a)/(b−a)`.
    pub fn normalized(&self, x: f64) -> f64 {
        self.scale * (x - self.a)
    }

    fn forward_raw(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let inv_n = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= inv_n;
        }
        // Real input: make conjugate symmetry exact rather than approximate so
        // that symmetric symbols keep it exact downstream.
        let n = self.n;
        buf[0].im = 0.0;
        buf[n / 2].im = 0.0;
        for i in 1..n / 2 {
            let avg = (buf[i] + buf[n - i].conj()) * 0.5;
            buf[i] = avg;
            buf[n - i] = avg.conj();
        }
        buf
    }

    fn inverse_raw(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
        let residue = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        let limit = IMAG_RESIDUE_TOL * scale;
        if residue > limit {
            return Err(Error::Symmetry { residue, limit });
        }
        Ok(buf.into_iter().map(|c| c.re).collect())
    }
}

/// Real nodal values on a grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Pointwise map, keeping the grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// Max-norm distance to `other`, which must live on the same grid.
    pub fn max_diff(&self, other: &Field) -> f64 {
        debug_assert_eq!(*self.grid, *other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Discrete L² distance `(Δx Σ (u−v)²)^½`.
    pub fn l2_diff(&self, other: &Field) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (self.grid.dx() * sum).sqrt()
    }

    /// Circular shift by whole grid cells: the result at node `j` is the
    /// input at node `j − cells`.
    pub fn roll(&self, cells: isize) -> Self {
        let n = self.values.len() as isize;
        let values = (0..n)
            .map(|j| self.values[(j - cells).rem_euclid(n) as usize])
            .collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Reflection about the middle of the domain: node `j` takes the value
    /// at node `N − j` (mod N).
    pub fn mirrored(&self) -> Self {
        let n = self.values.len();
        let values = (0..n).map(|j| self.values[(n - j) % n]).collect();
        Field {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Evaluates the trigonometric interpolant at an arbitrary `x`.
    ///
    /// The Nyquist mode contributes as `Ũ_{−N/2} cos(N X / 2)`, the real
    /// interpolant that reproduces the nodal values.
    pub fn interpolate(&self, x: f64) -> f64 {
        let spec = forward_dft(self);
        spec.evaluate(x)
    }

    /// Resamples onto `target` by evaluating the trigonometric interpolant at
    /// its nodes. Both grids must span the same interval.
    pub fn resample(&self, target: &Arc<Grid>) -> Result<Self> {
        if (target.a() - self.grid.a()).abs() > 1e-12 * self.grid.length()
            || (target.b() - self.grid.b()).abs() > 1e-12 * self.grid.length()
        {
            return Err(Error::Config(
                "resampling requires grids over the same interval".into(),
            ));
        }
        let n_src = self.grid.len();
        let n_dst = target.len();
        if n_src % n_dst == 0 {
            // Target nodes are a subset of the source nodes.
            let stride = n_src / n_dst;
            let values = (0..n_dst).map(|j| self.values[j * stride]).collect();
            return Field::new(target.clone(), values);
        }
        let spec = forward_dft(self);
        let values = target.nodes().iter().map(|&x| spec.evaluate(x)).collect();
        Field::new(target.clone(), values)
    }

    /// Translates the profile by `shift` (any real distance): the result is
    /// the interpolant of `u(x − shift)` sampled at the nodes.
    pub fn translate(&self, shift: f64) -> Result<Self> {
        inverse_dft(&forward_dft(self).translated(shift))
    }
}

/// Fourier coefficients on a grid, in storage order.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of integer wavenumber `k`.
    /// Spectrum of `u(x − shift)`. The Nyquist mode keeps only its cosine
    /// part so the result stays real.
    pub fn translated(&self, shift: f64) -> Self {
        let grid = self.grid.clone();
        let nyq = grid.nyquist_index();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let phase = grid.angular(i) * shift;
                if i == nyq {
                    c * phase.cos()
                } else {
                    c * Complex64::from_polar(1.0, -phase)
                }
            })
            .collect();
        SpectralField { grid, coeffs }
    }

    pub fn mode(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// Largest `|Ũ_k − conj(Ũ_{−k})|` over the paired modes, relative to the
    /// largest coefficient magnitude. The Nyquist mode must be real.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.coeffs.len();
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = self.coeffs[0].im.abs().max(self.coeffs[n / 2].im.abs());
        for i in 1..n / 2 {
            worst = worst.max((self.coeffs[i] - self.coeffs[n - i].conj()).norm());
        }
        worst / scale
    }

    fn evaluate(&self, x: f64) -> f64 {
        let grid = &self.grid;
        let big_x = grid.normalized(x);
        let nyq = grid.nyquist_index();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = grid.wavenumber(i) as f64;
                if i == nyq {
                    c.re * (k * big_x).cos()
                } else {
                    (c * Complex64::from_polar(1.0, k * big_x)).re
                }
            })
            .sum()
    }
}

/// `Ũ_k = (1/N) Σ_j U_j exp(−i k X_j)`.
pub fn forward_dft(f: &Field) -> SpectralField {
    let coeffs = f.grid.forward_raw(&f.values);
    SpectralField {
        grid: f.grid.clone(),
        coeffs,
    }
}

/// `U_j = Σ_k Ũ_k exp(i k X_j)`; rejects spectra whose inverse carries an
/// imaginary part above [`IMAG_RESIDUE_TOL`].
pub fn inverse_dft(s: &SpectralField) -> Result<Field> {
    let values = s.grid.inverse_raw(&s.coeffs)?;
    Field::new(s.grid.clone(), values)
}

/// Multiplies the spectrum of `f` by `(i·scale·k)^order` and transforms back.
///
/// For odd orders the Nyquist mode is dropped: its symbol is imaginary and
/// would otherwise produce a complex result.
pub fn spectral_derivative(f: &Field, order: u32) -> Result<Field> {
    if !(1..=4).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut spec = forward_dft(f);
    apply_derivative_symbol(&mut spec, order);
    inverse_dft(&spec)
}

pub(crate) fn apply_derivative_symbol(spec: &mut SpectralField, order: u32) {
    let grid = spec.grid.clone();
    let nyq = grid.nyquist_index();
    for (i, c) in spec.coeffs.iter_mut().enumerate() {
        if i == nyq && order % 2 == 1 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, grid.angular(i));
        *c *= ik.powu(order);
    }
}

/// Periodic rectangle rule `Δx Σ_j f_j`.
pub fn quadrature(f: &Field) -> f64 {
    f.grid.dx() * f.values.iter().sum::<f64>()
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
