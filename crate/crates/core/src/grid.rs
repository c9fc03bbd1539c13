//! Even-symmetric half-line grids, parity-tagged fields and the basic
//! discrete calculus (4th-order stencils, trapezoid pairings).
//!
//! A function on the line is stored by its values on `[0, L]` together with
//! a declared parity. Reflection to negative `x` uses `f(-x) = ±f(x)`, which
//! supplies the ghost values the stencils need at the origin.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{NlkgError, Result};

/// Smallest grid accepted by [`Grid::new`].
pub const MIN_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_length: f64,
    n_points: usize,
    dx: f64,
    sponge_width: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize, sponge_width: f64) -> Result<Arc<Grid>> {
        if n_points < MIN_POINTS {
            return Err(NlkgError::Config(format!(
                "grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(NlkgError::Config(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if !(sponge_width >= 0.0) || sponge_width >= 0.5 * half_length {
            return Err(NlkgError::Config(format!(
                "sponge width {sponge_width} must lie in [0, L/2) with L = {half_length}"
            )));
        }
        let dx = half_length / (n_points - 1) as f64;
        let nodes = (0..n_points).map(|i| i as f64 * dx).collect();
        Ok(Arc::new(Grid { half_length, n_points, dx, sponge_width, nodes }))
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn sponge_width(&self) -> f64 {
        self.sponge_width
    }

    /// Left edge of the sponge layer.
    pub fn sponge_start(&self) -> f64 {
        self.half_length - self.sponge_width
    }

    pub fn x(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weight of node `i` for an integral over the whole line of an
    /// even integrand (the half-line rule doubled).
    #[inline]
    pub fn line_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n_points {
            self.dx
        } else {
            2.0 * self.dx
        }
    }

    /// Index of the first node with `x >= x0`.
    pub fn index_at(&self, x0: f64) -> usize {
        ((x0 / self.dx).ceil().max(0.0) as usize).min(self.n_points - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Parity of a pointwise product.
    pub fn times(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flipped_n(self, n: usize) -> Parity {
        if n % 2 == 0 {
            self
        } else {
            self.flip()
        }
    }
}

/// A real scalar field on the line stored on `[0, L]` with declared parity.
/// Odd fields always hold `0` at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    parity: Parity,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>, parity: Parity) -> Field {
        Field { grid: grid.clone(), parity, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &Arc<Grid>, parity: Parity, f: impl Fn(f64) -> f64) -> Field {
        let values = grid.x().iter().map(|&x| f(x)).collect();
        Field::from_values(grid, parity, values)
    }

    pub fn from_values(grid: &Arc<Grid>, parity: Parity, mut values: Vec<f64>) -> Field {
        assert_eq!(values.len(), grid.len(), "field length does not match grid");
        if parity == Parity::Odd {
            values[0] = 0.0;
        }
        Field { grid: grid.clone(), parity, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mutate the stored values; the odd-at-origin invariant is restored
    /// afterwards.
    pub fn update(&mut self, f: impl FnOnce(&mut [f64])) {
        f(&mut self.values);
        if self.parity == Parity::Odd {
            self.values[0] = 0.0;
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            parity: self.parity,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert!(self.same_grid(other), "axpy on mismatched grids");
        assert_eq!(self.parity, other.parity, "axpy on mismatched parities");
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    /// Pointwise product with a sampled weight of the given parity.
    pub fn mul_weight(&self, weight: &[f64], weight_parity: Parity) -> Field {
        assert_eq!(weight.len(), self.len());
        let values = self.values.iter().zip(weight).map(|(a, b)| a * b).collect();
        Field::from_values(&self.grid, self.parity.times(weight_parity), values)
    }

    /// Pointwise product of two fields.
    pub fn mul_field(&self, other: &Field) -> Field {
        assert!(self.same_grid(other), "product on mismatched grids");
        self.mul_weight(&other.values, other.parity)
    }

    pub fn map(&self, parity: Parity, f: impl Fn(f64, f64) -> f64) -> Field {
        let values =
            self.grid.x().iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        Field::from_values(&self.grid, parity, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `L²(ℝ)` norm of the reflected field.
    pub fn norm(&self) -> f64 {
        dot(self, self).sqrt()
    }

    /// Values of the reflected field on the full symmetric grid `[-L, L]`.
    pub fn reflected(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let s = self.parity.sign();
        let mut xs = Vec::with_capacity(2 * n - 1);
        let mut vs = Vec::with_capacity(2 * n - 1);
        for i in (1..n).rev() {
            xs.push(-self.grid.x()[i]);
            vs.push(s * self.values[i]);
        }
        xs.extend_from_slice(self.grid.x());
        vs.extend_from_slice(&self.values);
        (xs, vs)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scaled(self)
    }
}

/// Unchecked full-line trapezoid pairing `∫ f g`; parity-odd integrands give 0.
pub(crate) fn dot(f: &Field, g: &Field) -> f64 {
    if f.parity != g.parity {
        return 0.0;
    }
    dot_slices(&f.grid, &f.values, &g.values)
}

pub(crate) fn dot_slices(grid: &Grid, f: &[f64], g: &[f64]) -> f64 {
    let n = f.len();
    let mut acc = 0.0;
    for i in 1..n - 1 {
        acc += f[i] * g[i];
    }
    2.0 * grid.dx() * acc + grid.dx() * (f[0] * g[0] + f[n - 1] * g[n - 1])
}

/// State vector `(u₁, u₂)` with both components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub first: Field,
    pub second: Field,
}

impl StatePair {
    pub fn new(first: Field, second: Field) -> StatePair {
        assert!(first.same_grid(&second), "state components on different grids");
        StatePair { first, second }
    }

    pub fn zeros(grid: &Arc<Grid>, parity: Parity) -> StatePair {
        StatePair { first: Field::zeros(grid, parity), second: Field::zeros(grid, parity) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.first.grid()
    }

    pub fn scaled(&self, a: f64) -> StatePair {
        StatePair { first: self.first.scaled(a), second: self.second.scaled(a) }
    }

    pub fn axpy(&mut self, a: f64, other: &StatePair) {
        self.first.axpy(a, &other.first);
        self.second.axpy(a, &other.second);
    }

    /// `J u = (u₂, −u₁)`.
    pub fn apply_j(&self) -> StatePair {
        StatePair { first: self.second.clone(), second: self.first.scaled(-1.0) }
    }

    /// `J⁻¹ u = (−u₂, u₁)`.
    pub fn apply_j_inv(&self) -> StatePair {
        StatePair { first: self.second.scaled(-1.0), second: self.first.clone() }
    }

    pub fn norm(&self) -> f64 {
        (dot(&self.first, &self.first) + dot(&self.second, &self.second)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.first.max_abs().max(self.second.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.first.values().iter().chain(self.second.values()).all(|v| v.is_finite())
    }
}

impl Add for &StatePair {
    type Output = StatePair;
    fn add(self, rhs: &StatePair) -> StatePair {
        StatePair { first: &self.first + &rhs.first, second: &self.second + &rhs.second }
    }
}

impl Sub for &StatePair {
    type Output = StatePair;
    fn sub(self, rhs: &StatePair) -> StatePair {
        StatePair { first: &self.first - &rhs.first, second: &self.second - &rhs.second }
    }
}

/// Complex state vector stored as real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPair {
    pub re: StatePair,
    pub im: StatePair,
}

impl ComplexPair {
    pub fn conj(&self) -> ComplexPair {
        ComplexPair { re: self.re.clone(), im: self.im.scaled(-1.0) }
    }

    pub fn scaled(&self, c: Complex64) -> ComplexPair {
        let mut re = self.re.scaled(c.re);
        re.axpy(-c.im, &self.im);
        let mut im = self.im.scaled(c.re);
        im.axpy(c.im, &self.re);
        ComplexPair { re, im }
    }

    pub fn apply_j(&self) -> ComplexPair {
        ComplexPair { re: self.re.apply_j(), im: self.im.apply_j() }
    }

    /// `2 Re(c · self)`, the real field `c·u + c̄·ū`.
    pub fn twice_real_part(&self, c: Complex64) -> StatePair {
        let mut out = self.re.scaled(2.0 * c.re);
        out.axpy(-2.0 * c.im, &self.im);
        out
    }
}

/// Pairings `⟨u, v⟩ = ∫ uᵀ v̄` over the whole line.
pub trait Pairing {
    type Output;
    fn pair(&self, other: &Self) -> Result<Self::Output>;
}

impl Pairing for Field {
    type Output = f64;
    fn pair(&self, other: &Field) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(NlkgError::GridMismatch);
        }
        Ok(dot(self, other))
    }
}

impl Pairing for StatePair {
    type Output = f64;
    fn pair(&self, other: &StatePair) -> Result<f64> {
        Ok(self.first.pair(&other.first)? + self.second.pair(&other.second)?)
    }
}

impl Pairing for ComplexPair {
    type Output = Complex64;
    fn pair(&self, other: &ComplexPair) -> Result<Complex64> {
        let re = self.re.pair(&other.re)? + self.im.pair(&other.im)?;
        let im = self.im.pair(&other.re)? - self.re.pair(&other.im)?;
        Ok(Complex64::new(re, im))
    }
}

/// `⟨f, g⟩`, conjugate-linear in the second slot.
pub fn inner<T: Pairing>(f: &T, g: &T) -> Result<T::Output> {
    f.pair(g)
}

/// Symplectic form `Ω(u, v) = ⟨J⁻¹u, v⟩`.
pub fn omega(u: &StatePair, v: &StatePair) -> Result<f64> {
    u.apply_j_inv().pair(v)
}

/// Value at ghost index `i` (may be negative) using parity reflection at 0.
#[inline]
fn at(values: &[f64], sign: f64, i: isize) -> f64 {
    if i < 0 {
        sign * values[(-i) as usize]
    } else {
        values[i as usize]
    }
}

/// First derivative: centered 4th order inside, parity ghosts at 0,
/// one-sided 4th order at `x = L`. Parity is flipped.
pub fn deriv1(f: &Field) -> Field {
    let v = f.values();
    let n = v.len();
    let s = f.parity().sign();
    let h = 12.0 * f.grid().dx();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate().take(n - 2) {
        let i = i as isize;
        *o = (at(v, s, i - 2) - 8.0 * at(v, s, i - 1) + 8.0 * v[(i + 1) as usize]
            - v[(i + 2) as usize])
            / h;
    }
    let m = n - 1;
    out[m - 1] =
        (3.0 * v[m] + 10.0 * v[m - 1] - 18.0 * v[m - 2] + 6.0 * v[m - 3] - v[m - 4]) / h;
    out[m] = (25.0 * v[m] - 48.0 * v[m - 1] + 36.0 * v[m - 2] - 16.0 * v[m - 3]
        + 3.0 * v[m - 4])
        / h;
    Field::from_values(f.grid(), f.parity().flip(), out)
}

/// Second derivative: centered 4th order inside, parity ghosts at 0,
/// one-sided 4th order at `x = L`. Parity is preserved.
pub fn deriv2(f: &Field) -> Field {
    let v = f.values();
    let n = v.len();
    let s = f.parity().sign();
    let dx = f.grid().dx();
    let h = 12.0 * dx * dx;
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate().take(n - 2) {
        let i = i as isize;
        *o = (-at(v, s, i - 2) + 16.0 * at(v, s, i - 1) - 30.0 * v[i as usize]
            + 16.0 * v[(i + 1) as usize]
            - v[(i + 2) as usize])
            / h;
    }
    let m = n - 1;
    out[m - 1] = (10.0 * v[m] - 15.0 * v[m - 1] - 4.0 * v[m - 2] + 14.0 * v[m - 3]
        - 6.0 * v[m - 4]
        + v[m - 5])
        / h;
    out[m] = (45.0 * v[m] - 154.0 * v[m - 1] + 214.0 * v[m - 2] - 156.0 * v[m - 3]
        + 61.0 * v[m - 4]
        - 10.0 * v[m - 5])
        / h;
    Field::from_values(f.grid(), f.parity(), out)
}

/// Second derivative with a homogeneous Dirichlet wall at `x = L` (odd
/// reflection about the wall). The matrix is symmetric with respect to the
/// trapezoid weights, which the time integrator and the eigenvalue oracle
/// rely on. `out[n-1]` is always 0.
pub fn laplacian_dirichlet(values: &[f64], parity: Parity, dx: f64, out: &mut [f64]) {
    let n = values.len();
    let s = parity.sign();
    let h = 1.0 / (12.0 * dx * dx);
    let m = n - 1;
    let get = |i: isize| -> f64 {
        if i < 0 {
            s * values[(-i) as usize]
        } else if i as usize >= m {
            // odd about x = L
            let j = 2 * m as isize - i;
            if j as usize == m {
                0.0
            } else {
                -values[j as usize]
            }
        } else {
            values[i as usize]
        }
    };
    // interior fast path
    for i in 2..m.saturating_sub(2) {
        out[i] = (-values[i - 2] + 16.0 * values[i - 1] - 30.0 * values[i] + 16.0 * values[i + 1]
            - values[i + 2])
            * h;
    }
    let edge = [0usize, 1, m.saturating_sub(2), m.saturating_sub(1)];
    for &i in &edge {
        let ii = i as isize;
        let c = if parity == Parity::Odd && i == 0 { 0.0 } else { get(ii) };
        out[i] = (-get(ii - 2) + 16.0 * get(ii - 1) - 30.0 * c + 16.0 * get(ii + 1) - get(ii + 2))
            * h;
    }
    if parity == Parity::Odd {
        out[0] = 0.0;
    }
    out[m] = 0.0;
}
