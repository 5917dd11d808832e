//! Hermitian Lanczos with full reorthogonalization.
//!
//! Desk-scale dimensions make robustness cheaper than restart logic, so the
//! full basis is kept and every new vector is reorthogonalized against it.

use super::{dense, dot, nrm2, seeded_vector, EigenPair, EigenResult, SolverCfg, SparseOperator};
use crate::error::{Result, VirialError};
use crate::lattice::C64;

/// Which end of the spectrum the caller wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralEnd {
    Lowest,
    Highest,
}

/// k lowest Ritz pairs of a Hermitian sparse operator.
pub fn lanczos_lowest(a: &SparseOperator, k: usize, cfg: &SolverCfg) -> Result<EigenResult> {
    if !a.hermitian {
        return Err(VirialError::InvalidSpec(
            "lanczos_lowest requires the Hermitian flag".into(),
        ));
    }
    let mut apply = |v: &[C64]| a.matvec(v).expect("dimension checked");
    lanczos_extremal_map(&mut apply, a.dim(), k, cfg, SpectralEnd::Lowest)
}

/// k extremal Ritz pairs of a Hermitian linear map given by its action.
///
/// The caller guarantees the map is Hermitian; residuals of the returned
/// pairs are recomputed through the map itself.
pub fn lanczos_extremal_map(
    apply: &mut dyn FnMut(&[C64]) -> Vec<C64>,
    dim: usize,
    k: usize,
    cfg: &SolverCfg,
    end: SpectralEnd,
) -> Result<EigenResult> {
    if k == 0 || k > dim {
        return Err(VirialError::InvalidSpec(format!("k = {k} out of range for dim {dim}")));
    }
    let max_m = cfg.subspace.max(2 * k + 8).min(dim);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_m);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut v = seeded_vector(dim, cfg.seed);
    normalize(&mut v);
    basis.push(v);

    let mut iterations = 0;
    let mut last_check: Option<(Vec<f64>, ndarray::Array2<f64>)> = None;
    let mut exhausted = false;

    for m in 0..max_m {
        iterations = m + 1;
        let mut w = apply(&basis[m]);
        let a_m = dot(&basis[m], &w).re;
        alpha.push(a_m);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for i in 0..dim {
                    w[i] -= c * q[i];
                }
            }
        }
        let b_m = nrm2(&w);
        // convergence check on the projected problem
        if alpha.len() >= k {
            let (theta, s) = dense::eig_sym_tridiagonal(&alpha, &beta)?;
            let picked = pick_indices(&theta, k, end);
            let mm = alpha.len();
            let max_bound = picked
                .iter()
                .map(|&j| (b_m * s[(mm - 1, j)]).abs())
                .fold(0.0f64, f64::max);
            let scale = theta.iter().map(|t| t.abs()).fold(1e-300, f64::max);
            last_check = Some((theta, s));
            if max_bound <= cfg.tolerance * scale || b_m < 1e-13 * scale.max(1.0) {
                break;
            }
        }
        if b_m < 1e-300 {
            exhausted = true;
            break;
        }
        if alpha.len() == max_m {
            break;
        }
        beta.push(b_m);
        let mut next = w;
        for x in next.iter_mut() {
            *x /= b_m;
        }
        basis.push(next);
    }

    let (theta, s) = match last_check {
        Some(t) => t,
        None => dense::eig_sym_tridiagonal(&alpha, &beta)?,
    };
    let picked = pick_indices(&theta, k.min(theta.len()), end);
    let mm = alpha.len();
    let mut pairs = Vec::with_capacity(picked.len());
    for &j in &picked {
        let mut vec = vec![C64::ZERO; dim];
        for (i, q) in basis.iter().take(mm).enumerate() {
            let c = s[(i, j)];
            for (vi, qi) in vec.iter_mut().zip(q) {
                *vi += qi * c;
            }
        }
        let value = C64::new(theta[j], 0.0);
        let av = apply(&vec);
        let vnorm = nrm2(&vec);
        let residual =
            nrm2(&av.iter().zip(&vec).map(|(u, w)| u - value * w).collect::<Vec<_>>()) / vnorm;
        pairs.push(EigenPair { value, vector: vec, residual });
    }
    let scale = theta.iter().map(|t| t.abs()).fold(1e-300, f64::max);
    let converged = !exhausted
        && pairs.iter().all(|p| p.residual <= cfg.tolerance * scale.max(1.0) * 10.0)
        || exhausted; // exact invariant subspace found
    let mut out = EigenResult { pairs, iterations, converged };
    out.sort_by_real();
    Ok(out)
}

fn pick_indices(theta: &[f64], k: usize, end: SpectralEnd) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    match end {
        SpectralEnd::Lowest => idx.sort_by(|&a, &b| theta[a].partial_cmp(&theta[b]).unwrap()),
        SpectralEnd::Highest => idx.sort_by(|&a, &b| theta[b].partial_cmp(&theta[a]).unwrap()),
    }
    idx.truncate(k);
    idx
}

fn normalize(v: &mut [C64]) {
    let n = nrm2(v);
    for x in v.iter_mut() {
        *x /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsekit::dense_oracle;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_matrix_lowest_three() {
        let diag: Vec<C64> = (1..=10).map(|i| c(i as f64, 0.0)).collect();
        let a = SparseOperator::diagonal(&diag);
        let r = lanczos_lowest(&a, 3, &SolverCfg::default()).unwrap();
        let vals = r.values();
        for (i, want) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((vals[i].re - want).abs() < 1e-8, "got {:?}", vals);
            assert!(vals[i].im.abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonhermitian_flag() {
        let a = SparseOperator::from_triplets(4, vec![(0, 1, c(1.0, 0.0))], false);
        assert!(lanczos_lowest(&a, 1, &SolverCfg::default()).is_err());
    }

    #[test]
    fn agrees_with_dense_oracle_on_random_hermitian() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 100;
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, c(rng.random_range(-2.0..2.0), 0.0)));
        }
        for _ in 0..300 {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            entries.push((i, j, v));
            entries.push((j, i, v.conj()));
        }
        let a = SparseOperator::from_triplets(n, entries, true);
        let cfg = SolverCfg { tolerance: 1e-11, subspace: 100, ..Default::default() };
        let r = lanczos_lowest(&a, 4, &cfg).unwrap();
        let oracle = dense_oracle(&a).unwrap();
        for i in 0..4 {
            assert!(
                (r.values()[i].re - oracle.values()[i].re).abs() < 1e-9,
                "lanczos {:?} vs oracle {:?}",
                r.values(),
                &oracle.values()[..4]
            );
        }
    }

    #[test]
    fn ritz_values_are_real_for_hermitian_input() {
        let diag: Vec<C64> = (0..40).map(|i| c((i as f64).sin() * 3.0, 0.0)).collect();
        let a = SparseOperator::diagonal(&diag);
        let r = lanczos_lowest(&a, 5, &SolverCfg::default()).unwrap();
        for p in &r.pairs {
            assert!(p.value.im.abs() < 1e-10 * (1.0 + p.value.re.abs()));
        }
    }

    #[test]
    fn highest_end_map_variant() {
        let diag: Vec<C64> = (1..=30).map(|i| c(i as f64, 0.0)).collect();
        let a = SparseOperator::diagonal(&diag);
        let mut apply = |v: &[C64]| a.matvec(v).unwrap();
        let r =
            lanczos_extremal_map(&mut apply, 30, 2, &SolverCfg::default(), SpectralEnd::Highest)
                .unwrap();
        let mut vals: Vec<f64> = r.values().iter().map(|z| z.re).collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((vals[0] - 30.0).abs() < 1e-8);
        assert!((vals[1] - 29.0).abs() < 1e-8);
    }
}
