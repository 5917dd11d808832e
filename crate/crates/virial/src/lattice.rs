//! Truncated cell-centered lattices and complex lattice functions.
//!
//! Every operator in this crate is discretized on a box (−L, L)^d, or on a
//! half-box (−L, L)^{d−1} × (0, 2L) when a Robin face is present. Nodes sit
//! at cell centers, offset half a spacing from the box walls, so that no node
//! coincides with the coordinate origin and weights like 1/|x| stay finite.

use crate::error::{Result, VirialError};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Box geometry: full box (−L,L)^d, or half box with the last axis on (0, 2L).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Geometry {
    #[serde(rename = "full-box")]
    FullBox,
    #[serde(rename = "half-box")]
    HalfBox,
}

/// Cell-centered grid on a truncated box.
///
/// Node coordinates per axis are −L + (k + 1/2)h for the full box and
/// (k + 1/2)h on the half-box axis, with h = 2L/n. Lexicographic ordering
/// with axis 0 fastest: linear index = i₀ + n·i₁ + n²·i₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub d: usize,
    pub l: f64,
    pub n: usize,
    pub geometry: Geometry,
}

impl GridSpec {
    pub fn new(d: usize, l: f64, n: usize, geometry: Geometry) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(VirialError::InvalidSpec(format!("d = {d}, must be 1, 2 or 3")));
        }
        if n < 4 {
            return Err(VirialError::InvalidSpec(format!("n = {n}, need n >= 4")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(VirialError::InvalidSpec(format!("L = {l}, need L > 0")));
        }
        Ok(GridSpec { d, l, n, geometry })
    }

    pub fn full(d: usize, l: f64, n: usize) -> Result<Self> {
        Self::new(d, l, n, Geometry::FullBox)
    }

    pub fn half(d: usize, l: f64, n: usize) -> Result<Self> {
        Self::new(d, l, n, Geometry::HalfBox)
    }

    /// Grid spacing h = 2L/n.
    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Quadrature weight of one cell, h^d.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// True when `axis` runs over (0, 2L) instead of (−L, L).
    #[inline]
    pub fn axis_is_half(&self, axis: usize) -> bool {
        self.geometry == Geometry::HalfBox && axis == self.d - 1
    }

    /// Coordinate of the k-th cell center along one axis.
    #[inline]
    pub fn axis_coord(&self, axis: usize, k: usize) -> f64 {
        let h = self.h();
        if self.axis_is_half(axis) {
            (k as f64 + 0.5) * h
        } else {
            -self.l + (k as f64 + 0.5) * h
        }
    }

    /// Decompose a linear node index into per-axis indices.
    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = idx;
        for a in 0..self.d {
            out[a] = rest % self.n;
            rest /= self.n;
        }
        out
    }

    #[inline]
    pub fn ravel(&self, ijk: [usize; 3]) -> usize {
        let mut idx = 0usize;
        for a in (0..self.d).rev() {
            idx = idx * self.n + ijk[a];
        }
        idx
    }

    /// Coordinates of node `idx`; entries beyond `d` are zero.
    #[inline]
    pub fn node_coords(&self, idx: usize) -> [f64; 3] {
        let ijk = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = self.axis_coord(a, ijk[a]);
        }
        x
    }

    /// Full coordinate table in node order.
    pub fn coordinates(&self) -> Vec<[f64; 3]> {
        (0..self.node_count()).map(|i| self.node_coords(i)).collect()
    }

    /// Euclidean norm |x| of node `idx`; ≥ h/2 by cell-centering.
    #[inline]
    pub fn node_radius(&self, idx: usize) -> f64 {
        let x = self.node_coords(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }
}

/// Complex lattice function, optionally spinor-valued.
///
/// Storage is node-major: `values[node * spinor_dim + s]`.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: GridSpec,
    pub spinor_dim: usize,
    values: Vec<C64>,
}

impl Field {
    pub fn new(grid: GridSpec, spinor_dim: usize, values: Vec<C64>) -> Result<Self> {
        if !matches!(spinor_dim, 1 | 2 | 4) {
            return Err(VirialError::InvalidSpec(format!(
                "spinor_dim = {spinor_dim}, must be 1, 2 or 4"
            )));
        }
        if values.len() != grid.node_count() * spinor_dim {
            return Err(VirialError::Shape(format!(
                "value count {} != {} nodes x {} spinor components",
                values.len(),
                grid.node_count(),
                spinor_dim
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(VirialError::InvalidSpec("non-finite entry in field".into()));
        }
        Ok(Field { grid, spinor_dim, values })
    }

    pub fn zeros(grid: GridSpec, spinor_dim: usize) -> Self {
        Field { grid, spinor_dim, values: vec![C64::ZERO; grid.node_count() * spinor_dim] }
    }

    /// Scalar field from a pointwise closure over node coordinates.
    pub fn from_fn<F: Fn(&[f64; 3]) -> C64>(grid: GridSpec, f: F) -> Result<Self> {
        let values: Vec<C64> = (0..grid.node_count()).map(|i| f(&grid.node_coords(i))).collect();
        Field::new(grid, 1, values)
    }

    /// Real scalar field from a pointwise closure.
    pub fn from_real_fn<F: Fn(&[f64; 3]) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        Field::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    #[inline]
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.grid == other.grid && self.spinor_dim == other.spinor_dim
    }

    /// Discrete L² norm, √(Σ|f|² h^d).
    pub fn norm(&self) -> f64 {
        let w = self.grid.cell_volume();
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * w).sqrt()
    }

    /// Returns a copy normalized to ‖f‖ = 1.
    pub fn normalized(&self) -> Result<Field> {
        let n = self.norm();
        if n == 0.0 {
            return Err(VirialError::InvalidSpec("cannot normalize the zero field".into()));
        }
        let mut out = self.clone();
        for z in out.values.iter_mut() {
            *z /= n;
        }
        Ok(out)
    }

    pub fn scale(&mut self, c: C64) {
        for z in self.values.iter_mut() {
            *z *= c;
        }
    }

    /// Pointwise product with a real weight given per node (broadcast over spinor components).
    pub fn weighted(&self, w: &[f64]) -> Result<Field> {
        if w.len() != self.grid.node_count() {
            return Err(VirialError::Shape("weight length != node count".into()));
        }
        let sd = self.spinor_dim;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z * w[i / sd])
            .collect();
        Field::new(self.grid, sd, values)
    }
}

/// Sesquilinear inner product Σ conj(f)·g · h^d, conjugate-linear in `f`.
pub fn inner(f: &Field, g: &Field) -> Result<C64> {
    if !f.same_shape(g) {
        return Err(VirialError::Shape("inner: mismatched grids or spinor dimensions".into()));
    }
    let w = f.grid.cell_volume();
    let s: C64 = f
        .values
        .iter()
        .zip(g.values.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(s * w)
}

/// Built-in coordinate weights used by the multiplier identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// |x|
    Abs,
    /// 1/|x| (finite: no node sits at the origin)
    InvAbs,
    /// |x|²
    AbsSquared,
    /// 1/|x|²
    InvAbsSquared,
    /// x_j
    Coordinate(usize),
}

/// Per-node values of a coordinate weight.
pub fn weight_values(grid: &GridSpec, kind: WeightKind) -> Vec<f64> {
    (0..grid.node_count())
        .map(|i| match kind {
            WeightKind::Abs => grid.node_radius(i),
            WeightKind::InvAbs => 1.0 / grid.node_radius(i),
            WeightKind::AbsSquared => {
                let r = grid.node_radius(i);
                r * r
            }
            WeightKind::InvAbsSquared => {
                let r = grid.node_radius(i);
                1.0 / (r * r)
            }
            WeightKind::Coordinate(j) => grid.node_coords(i)[j],
        })
        .collect()
}

/// Coordinate weight as a real scalar field.
pub fn weight_field(grid: &GridSpec, kind: WeightKind) -> Field {
    let values = weight_values(grid, kind).into_iter().map(|v| C64::new(v, 0.0)).collect();
    Field { grid: *grid, spinor_dim: 1, values }
}

/// C¹ radial bump: 1 on [0,1], cubic smoothstep down to 0 on [1,2].
#[inline]
pub fn cutoff_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let t = r - 1.0;
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// ξ_scale(x) = ξ(|x|/scale): equal to 1 on |x| ≤ scale, 0 on |x| ≥ 2·scale.
pub fn cutoff(grid: &GridSpec, scale: f64) -> Result<Field> {
    if !(scale > 0.0) {
        return Err(VirialError::InvalidSpec(format!("cutoff scale = {scale}, need > 0")));
    }
    Field::from_real_fn(*grid, |x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        cutoff_profile(r / scale)
    })
}

/// The cutoff family ξ_n at an increasing list of scales.
#[derive(Debug, Clone)]
pub struct CutoffFamily {
    pub scales: Vec<f64>,
}

impl CutoffFamily {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) || scales[0] <= 0.0 {
            return Err(VirialError::InvalidSpec(
                "cutoff scales must be positive and strictly increasing".into(),
            ));
        }
        Ok(CutoffFamily { scales })
    }

    pub fn evaluate(&self, grid: &GridSpec) -> Result<Vec<Field>> {
        self.scales.iter().map(|&s| cutoff(grid, s)).collect()
    }
}

/// Normalized discrete Gaussian exp(−|x−c|²/(2σ²)), handy as a test state.
pub fn gaussian_field(grid: &GridSpec, center: &[f64; 3], sigma: f64) -> Result<Field> {
    let f = Field::from_real_fn(*grid, |x| {
        let mut r2 = 0.0;
        for a in 0..3 {
            let dx = x[a] - center[a];
            r2 += dx * dx;
        }
        (-r2 / (2.0 * sigma * sigma)).exp()
    })?;
    f.normalized()
}
