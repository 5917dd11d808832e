//! Sparse matrix kernel and iterative spectral algorithms.
//!
//! Everything here is grid-agnostic: operators act on plain `Vec<C64>`
//! state vectors. The lattice module layers grid metadata on top.

mod arnoldi;
mod csr;
pub mod dense;
mod lanczos;
mod opnorm;
mod solvers;

pub use arnoldi::arnoldi_shift_invert;
pub use csr::SparseOperator;
pub use dense::dense_oracle;
pub use lanczos::{lanczos_extremal_map, lanczos_lowest, SpectralEnd};
pub use opnorm::{opnorm, OpNormEstimate};
pub use solvers::{bicgstab, cg_hermitian, solve};

use crate::lattice::C64;

/// Iterative solver configuration shared by linear solves and eigensolvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverCfg {
    /// Relative tolerance (residual / ‖rhs‖ or eigen-residual).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Shift for shift-invert eigensolvers.
    pub shift: C64,
    /// Krylov subspace cap.
    pub subspace: usize,
    /// Seed for deterministic start vectors.
    pub seed: u64,
    /// Caller-asserted positive definiteness; enables CG on Hermitian systems.
    pub assume_positive_definite: bool,
}

impl Default for SolverCfg {
    fn default() -> Self {
        SolverCfg {
            tolerance: 1e-8,
            max_iterations: 20_000,
            shift: C64::ZERO,
            subspace: 80,
            seed: 7,
            assume_positive_definite: false,
        }
    }
}

impl SolverCfg {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_subspace(mut self, m: usize) -> Self {
        self.subspace = m;
        self
    }
}

/// One approximate eigenpair with an independently recomputed residual.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
    /// ‖Av − λv‖ / ‖v‖, recomputed by one extra matvec after extraction.
    pub residual: f64,
}

/// Eigensolver output, sorted by real part of the value.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub pairs: Vec<EigenPair>,
    pub iterations: usize,
    pub converged: bool,
}

impl EigenResult {
    pub fn values(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub(crate) fn sort_by_real(&mut self) {
        self.pairs.sort_by(|a, b| {
            (a.value.re, a.value.im)
                .partial_cmp(&(b.value.re, b.value.im))
                .unwrap()
        });
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn nrm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Deterministic random start vector.
pub(crate) fn seeded_vector(dim: usize, seed: u64) -> Vec<C64> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}
