//! Seeded random instances for property batteries and simulations.
//!
//! All generators take an explicit RNG so batteries are reproducible;
//! the counter-based ChaCha streams used by the Monte-Carlo simulator
//! live in [`crate::simulate`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{CQChannel, DensityOperator};
use crate::operator::{spectral_decompose, HermitianOperator};

/// Deterministic RNG for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut impl Rng) -> f64 {
    // Box-Muller; inputs kept away from zero.
    let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ginibre(rows: usize, cols: usize, r: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(gaussian(r), gaussian(r)))
}

/// Random Hermitian operator `(G + G')/2` with Gaussian entries.
pub fn random_hermitian(dim: usize, r: &mut impl Rng) -> HermitianOperator {
    let g = ginibre(dim, dim, r);
    HermitianOperator::symmetrized(g)
}

/// Random PSD operator `G G'` of the given rank (Wishart).
pub fn random_psd(dim: usize, rank: usize, r: &mut impl Rng) -> HermitianOperator {
    let g = ginibre(dim, rank.max(1).min(dim), r);
    let w = &g * g.adjoint();
    // Normalized to O(1) trace so tolerance bands are scale-comparable.
    HermitianOperator::symmetrized(w.scale(1.0 / dim as f64))
}

/// Random full-rank density operator.
pub fn random_density(dim: usize, r: &mut impl Rng) -> DensityOperator {
    let w = random_psd(dim, dim, r);
    let rho = w.scale(1.0 / w.trace());
    DensityOperator::new(rho).expect("normalized Wishart is a density")
}

/// Random density operator of the given rank.
pub fn random_density_of_rank(dim: usize, rank: usize, r: &mut impl Rng) -> DensityOperator {
    let w = random_psd(dim, rank, r);
    let rho = w.scale(1.0 / w.trace());
    DensityOperator::new(rho).expect("normalized Wishart is a density")
}

/// Random two-outcome test: spectrum uniform in [0,1] in a random
/// eigenbasis.
pub fn random_test(dim: usize, r: &mut impl Rng) -> HermitianOperator {
    let basis = spectral_decompose(&random_hermitian(dim, r)).expect("solver converges");
    basis.rebuild_with(|_| 0.0); // keep the decomposition's basis only
    let u = basis.eigenvectors().clone();
    let diag: Vec<f64> = (0..dim).map(|_| r.gen_range(0.0..=1.0)).collect();
    let mut lam = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, &d) in diag.iter().enumerate() {
        lam[(i, i)] = Complex64::new(d, 0.0);
    }
    HermitianOperator::symmetrized(&u * lam * u.adjoint())
}

/// Random probability vector (normalized uniforms, bounded away from 0).
pub fn random_prior(len: usize, r: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| r.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Random classical-quantum channel with full-rank outputs.
pub fn random_cq_channel(alphabet: usize, dim_b: usize, r: &mut impl Rng) -> CQChannel {
    let prior = random_prior(alphabet, r);
    let symbols: Vec<String> = (0..alphabet).map(|x| x.to_string()).collect();
    let outputs: Vec<DensityOperator> = (0..alphabet).map(|_| random_density(dim_b, r)).collect();
    CQChannel::new(symbols, prior, outputs).expect("random channel is valid")
}
