//! Operator-norm estimation by power iteration on M*M.

use super::{nrm2, seeded_vector, SolverCfg};
use crate::error::{Result, VirialError};
use crate::lattice::C64;

/// Largest-singular-value estimate. When the iteration stagnates before the
/// requested tolerance, `converged` is false and the value is a lower bound.
#[derive(Debug, Clone, Copy)]
pub struct OpNormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Power iteration on M*M with a deterministic seeded start.
///
/// Converged once the estimate changes by less than the relative tolerance
/// over 3 consecutive iterations.
pub fn opnorm(
    apply_m: &mut dyn FnMut(&[C64]) -> Vec<C64>,
    apply_m_adj: &mut dyn FnMut(&[C64]) -> Vec<C64>,
    dim: usize,
    cfg: &SolverCfg,
) -> Result<OpNormEstimate> {
    if dim == 0 {
        return Err(VirialError::Shape("opnorm on empty space".into()));
    }
    let mut v = seeded_vector(dim, cfg.seed);
    let n0 = nrm2(&v);
    for x in v.iter_mut() {
        *x /= n0;
    }
    let mut estimate = 0.0f64;
    let mut stagnant = 0usize;
    let max_it = cfg.max_iterations.min(500);
    for it in 1..=max_it {
        let z = apply_m(&v);
        let sigma = nrm2(&z);
        if sigma == 0.0 {
            return Ok(OpNormEstimate { value: 0.0, converged: true, iterations: it });
        }
        let mut w = apply_m_adj(&z);
        let wn = nrm2(&w);
        if wn == 0.0 {
            return Ok(OpNormEstimate { value: sigma, converged: true, iterations: it });
        }
        for x in w.iter_mut() {
            *x /= wn;
        }
        v = w;
        let rel = (sigma - estimate).abs() / sigma.max(1e-300);
        estimate = estimate.max(sigma);
        if rel < cfg.tolerance {
            stagnant += 1;
            if stagnant >= 3 {
                return Ok(OpNormEstimate { value: estimate, converged: true, iterations: it });
            }
        } else {
            stagnant = 0;
        }
    }
    Ok(OpNormEstimate { value: estimate, converged: false, iterations: max_it })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsekit::{dense, SparseOperator};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn opnorm_of(a: &SparseOperator, cfg: &SolverCfg) -> OpNormEstimate {
        let adj = a.adjoint();
        let mut am = |v: &[C64]| a.matvec(v).unwrap();
        let mut aa = |v: &[C64]| adj.matvec(v).unwrap();
        opnorm(&mut am, &mut aa, a.dim(), cfg).unwrap()
    }

    #[test]
    fn scaled_identity() {
        let a = SparseOperator::from_triplets(
            5,
            (0..5).map(|i| (i, i, c(3.0, 0.0))).collect(),
            true,
        );
        let e = opnorm_of(&a, &SolverCfg::default().with_tolerance(1e-10));
        assert!((e.value - 3.0).abs() < 1e-9);
        assert!(e.converged);
    }

    #[test]
    fn sign_flip_diagonal() {
        let a = SparseOperator::diagonal(&[c(1.0, 0.0), c(-4.0, 0.0)]);
        let e = opnorm_of(&a, &SolverCfg::default().with_tolerance(1e-10));
        assert!((e.value - 4.0).abs() < 1e-8);
    }

    #[test]
    fn random_matrix_matches_dense_singular_value_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 50;
        let entries: Vec<_> = (0..n * n / 2)
            .map(|_| {
                (
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                )
            })
            .collect();
        let a = SparseOperator::from_triplets(n, entries, false);
        let dense_a = a.to_dense().unwrap();
        let oracle = dense::largest_singular_value_dense(&dense_a).unwrap();
        let cfg = SolverCfg { tolerance: 1e-9, max_iterations: 500, ..Default::default() };
        let e = opnorm_of(&a, &cfg);
        assert!(
            (e.value - oracle).abs() <= 1e-6 * oracle,
            "power {} vs oracle {oracle}",
            e.value
        );
    }

    #[test]
    fn norm_of_adjoint_matches() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let n = 30;
        let entries: Vec<_> = (0..200)
            .map(|_| {
                (
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                )
            })
            .collect();
        let a = SparseOperator::from_triplets(n, entries, false);
        let adj = a.adjoint();
        let cfg = SolverCfg { tolerance: 1e-9, max_iterations: 500, ..Default::default() };
        let ea = opnorm_of(&a, &cfg);
        let eadj = opnorm_of(&adj, &cfg);
        assert!((ea.value - eadj.value).abs() <= 1e-6 * ea.value.max(1.0));
    }
}
