//! Ground-truth verification of every coding bound.
//!
//! Each protocol gets an exact simulation that constructs the actual
//! pretty-good-measurement decoder for every codebook realization and
//! computes the expected error by full enumeration (or Monte-Carlo
//! sampling for the point-to-point channel), then certifies the result
//! against the corresponding closed-form bound.
//!
//! Monte-Carlo trials use counter-based ChaCha streams keyed on
//! `(seed, trial)`, so results are bit-identical regardless of how the
//! trials are scheduled across threads; aggregation always runs in
//! trial order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    broadcast_bounds, cq_bound, cqsw_bound, mac_bound, packing_bound, split_product_prior,
    state_info_bound, state_info_joint, Precoder,
};
use crate::discrimination::pgm_error;
use crate::error::{Error, Result};
use crate::model::{position_state, CQChannel, CQState, DensityOperator};
#[cfg(test)]
use crate::model::build_cq_joint;
use crate::operator::{partial_trace, HermitianOperator, SubsystemShape};

/// Simulation mode tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Exact,
    MonteCarlo,
}

/// Result of a simulation run, certified against the bound it checks.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub mean_error: f64,
    pub mode: SimMode,
    /// 0 for exact runs.
    pub trials: u64,
    /// 0 for exact runs.
    pub std_error: f64,
    pub seed: Option<u64>,
    pub bound_checked: f64,
    /// `mean_error <= bound_checked + 3·std_error + 1e-9`.
    pub certified: bool,
}

impl SimulationResult {
    fn exact(mean_error: f64, bound_checked: f64) -> Self {
        SimulationResult {
            mean_error,
            mode: SimMode::Exact,
            trials: 0,
            std_error: 0.0,
            seed: None,
            bound_checked,
            certified: mean_error <= bound_checked + 1e-9,
        }
    }
}

/// Enumeration and dimension caps; defaults sized for sub-second runs.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub enumeration_cap: u64,
    pub dimension_cap: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            enumeration_cap: 4096,
            dimension_cap: 64,
        }
    }
}

fn checked_pow(base: usize, exp: usize, cap: u64) -> Result<u64> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc *= base as u128;
        if acc > cap as u128 {
            return Err(Error::EnumerationTooLarge { count: acc, cap });
        }
    }
    Ok(acc as u64)
}

/// Decodes the `i`-th codebook (base-`alphabet` digits, length `m`).
fn codebook_digits(mut index: u64, alphabet: usize, m: usize) -> Vec<usize> {
    let mut digits = vec![0usize; m];
    for slot in (0..m).rev() {
        digits[slot] = (index % alphabet as u64) as usize;
        index /= alphabet as u64;
    }
    digits
}

/// Average PGM error of one realized codebook for a c-q channel.
fn codebook_error(ch: &CQChannel, codebook: &[usize]) -> Result<f64> {
    let m = codebook.len();
    let states: Vec<HermitianOperator> = codebook
        .iter()
        .map(|&x| ch.outputs()[x].op().scale(1.0 / m as f64))
        .collect();
    pgm_error(&states)
}

/// Exact expectation of the random-coding PGM error over all
/// `|X|^M` i.i.d. codebooks, certified against [`cq_bound`].
pub fn cq_random_coding_exact(ch: &CQChannel, m: u64, cfg: &SimConfig) -> Result<SimulationResult> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let ch = ch.drop_zero_mass();
    let count = checked_pow(ch.alphabet_len(), m as usize, cfg.enumeration_cap)?;
    let bound = cq_bound(&ch, m)?.bound;
    let mut mean = 0.0;
    for index in 0..count {
        let codebook = codebook_digits(index, ch.alphabet_len(), m as usize);
        let weight: f64 = codebook.iter().map(|&x| ch.prior()[x]).product();
        if weight == 0.0 {
            continue;
        }
        mean += weight * codebook_error(&ch, &codebook)?;
    }
    Ok(SimulationResult::exact(mean, bound))
}

/// Monte-Carlo estimate of the random-coding PGM error with i.i.d.
/// codebook sampling. Deterministic for fixed `(seed, trials)`
/// regardless of thread count.
pub fn cq_random_coding_mc(
    ch: &CQChannel,
    m: u64,
    trials: u64,
    seed: u64,
    _cfg: &SimConfig,
) -> Result<SimulationResult> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    if trials < 1 {
        return Err(Error::BadProbability("trials must be at least 1".into()));
    }
    let ch = ch.drop_zero_mass();
    let bound = cq_bound(&ch, m)?.bound;
    // cumulative prior for inversion sampling
    let mut cumulative = Vec::with_capacity(ch.alphabet_len());
    let mut acc = 0.0;
    for &p in ch.prior() {
        acc += p;
        cumulative.push(acc);
    }
    let sample = |r: &mut ChaCha8Rng| -> usize {
        let u: f64 = r.gen();
        cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(ch.alphabet_len() - 1)
    };
    let errors: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(trial + 1);
            let codebook: Vec<usize> = (0..m).map(|_| sample(&mut r)).collect();
            codebook_error(&ch, &codebook)
        })
        .collect::<Result<_>>()?;
    // order-fixed aggregation
    let n = trials as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = if trials > 1 {
        errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let std_error = (var / n).sqrt();
    Ok(SimulationResult {
        mean_error: mean,
        mode: SimMode::MonteCarlo,
        trials,
        std_error,
        seed: Some(seed),
        bound_checked: bound,
        certified: mean <= bound + 3.0 * std_error + 1e-9,
    })
}

/// Exact per-message error of the position-based packing protocol:
/// builds the `M` placement states on `R^M ⊗ B`, the PGM over them, and
/// the uniform-average error, certified against [`packing_bound`].
///
/// All per-message errors coincide by symmetry; this is asserted within
/// 1e-9.
pub fn packing_exact(
    rho_rb: &DensityOperator,
    shape: &SubsystemShape,
    tau_r: &DensityOperator,
    m: u64,
    cfg: &SimConfig,
) -> Result<SimulationResult> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let (d_r, d_b) = (shape.dims()[0], shape.dims()[1]);
    let total_dim = d_r
        .checked_pow(m as u32)
        .and_then(|x| x.checked_mul(d_b))
        .ok_or(Error::DimensionTooLarge {
            dim: usize::MAX,
            cap: cfg.dimension_cap,
        })?;
    if total_dim > cfg.dimension_cap {
        return Err(Error::DimensionTooLarge {
            dim: total_dim,
            cap: cfg.dimension_cap,
        });
    }
    let bound = packing_bound(rho_rb, shape, tau_r, m)?.bound;
    let states: Vec<HermitianOperator> = (0..m as usize)
        .map(|slot| {
            position_state(rho_rb.op(), shape, tau_r.op(), m as usize, slot)
                .map(|s| s.scale(1.0 / m as f64))
        })
        .collect::<Result<_>>()?;
    let povm = crate::discrimination::pgm(&states)?;
    let mut per_message = Vec::with_capacity(m as usize);
    for (state, element) in states.iter().zip(povm.elements()) {
        // conditional error for this message (state carries weight 1/M)
        let err = (state.trace() - state.trace_product(element)?) * m as f64;
        per_message.push(err);
    }
    let mean = per_message.iter().sum::<f64>() / m as f64;
    let spread = per_message
        .iter()
        .fold(0.0f64, |acc, &e| acc.max((e - mean).abs()));
    if spread > 1e-9 {
        return Err(Error::ValidationError {
            path: "packing_exact".into(),
            check: "per-message errors equal by symmetry".into(),
            deviation: spread,
        });
    }
    Ok(SimulationResult::exact(mean, bound))
}

/// Exact expectation of the source-coding PGM error over all `M^{|X|}`
/// uniform bin assignments, certified against [`cqsw_bound`].
pub fn cqsw_exact(state: &CQState, m: u64, cfg: &SimConfig) -> Result<SimulationResult> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let n = state.num_blocks();
    let count = checked_pow(m as usize, n, cfg.enumeration_cap)?;
    let bound = cqsw_bound(state, m)?.bound;
    let weight = 1.0 / count as f64;
    let mut mean = 0.0;
    for index in 0..count {
        let assignment = codebook_digits(index, m as usize, n);
        // per-bin Gram sums
        let mut bin_sums: Vec<HermitianOperator> =
            vec![HermitianOperator::zeros(state.dim_b()); m as usize];
        for x in 0..n {
            bin_sums[assignment[x]] = bin_sums[assignment[x]].add(&state.weighted_block(x))?;
        }
        let mut err = 0.0;
        for x in 0..n {
            let bin = assignment[x];
            let element =
                crate::operator::nc_quotient(&state.weighted_block(x), &bin_sums[bin], None)?;
            let block = &state.blocks()[x];
            err += state.prior()[x] * (block.trace() - block.trace_product(&element)?);
        }
        mean += weight * err;
    }
    Ok(SimulationResult::exact(mean.max(0.0), bound))
}

/// Exact expectation of the joint PGM error over independent codebooks
/// for both senders of a multiple-access channel, certified against
/// [`mac_bound`].
pub fn mac_exact(
    state: &CQState,
    nx: usize,
    ny: usize,
    m_a: u64,
    m_b: u64,
    cfg: &SimConfig,
) -> Result<SimulationResult> {
    if m_a < 1 {
        return Err(Error::BadM(m_a));
    }
    if m_b < 1 {
        return Err(Error::BadM(m_b));
    }
    let (px, py) = split_product_prior(state.prior(), nx, ny)?;
    let count_a = checked_pow(nx, m_a as usize, cfg.enumeration_cap)?;
    let count_b = checked_pow(ny, m_b as usize, cfg.enumeration_cap)?;
    checked_pow(nx, m_a as usize, cfg.enumeration_cap)?
        .checked_mul(count_b)
        .filter(|&total| total <= cfg.enumeration_cap)
        .ok_or(Error::EnumerationTooLarge {
            count: count_a as u128 * count_b as u128,
            cap: cfg.enumeration_cap,
        })?;
    let bound = mac_bound(state, nx, ny, m_a, m_b)?.bound;
    let pairs = (m_a * m_b) as f64;
    let mut mean = 0.0;
    for ia in 0..count_a {
        let book_a = codebook_digits(ia, nx, m_a as usize);
        let weight_a: f64 = book_a.iter().map(|&x| px[x]).product();
        if weight_a == 0.0 {
            continue;
        }
        for ib in 0..count_b {
            let book_b = codebook_digits(ib, ny, m_b as usize);
            let weight_b: f64 = book_b.iter().map(|&y| py[y]).product();
            if weight_b == 0.0 {
                continue;
            }
            let states: Vec<HermitianOperator> = book_a
                .iter()
                .flat_map(|&x| {
                    book_b
                        .iter()
                        .map(move |&y| (x, y))
                        .collect::<Vec<_>>()
                })
                .map(|(x, y)| state.blocks()[x * ny + y].scale(1.0 / pairs))
                .collect();
            mean += weight_a * weight_b * pgm_error(&states)?;
        }
    }
    Ok(SimulationResult::exact(mean, bound))
}

/// Exact expectation over both pre-codebooks of a broadcast protocol;
/// each receiver applies the PGM over its averaged marginal states.
/// Both errors are certified against [`broadcast_bounds`].
pub fn broadcast_exact(
    ch: &CQChannel,
    output_shape: &SubsystemShape,
    precoder: &Precoder,
    p_u: &[f64],
    p_v: &[f64],
    m_b: u64,
    m_c: u64,
    cfg: &SimConfig,
) -> Result<(SimulationResult, SimulationResult)> {
    if m_b < 1 {
        return Err(Error::BadM(m_b));
    }
    if m_c < 1 {
        return Err(Error::BadM(m_c));
    }
    let nu = p_u.len();
    let nv = p_v.len();
    let count_u = checked_pow(nu, m_b as usize, cfg.enumeration_cap)?;
    let count_v = checked_pow(nv, m_c as usize, cfg.enumeration_cap)?;
    count_u
        .checked_mul(count_v)
        .filter(|&total| total <= cfg.enumeration_cap)
        .ok_or(Error::EnumerationTooLarge {
            count: count_u as u128 * count_v as u128,
            cap: cfg.enumeration_cap,
        })?;
    let (bound_b, bound_c) = broadcast_bounds(ch, output_shape, precoder, p_u, p_v, m_b, m_c)?;

    let mut mean_b = 0.0;
    let mut mean_c = 0.0;
    for iu in 0..count_u {
        let book_u = codebook_digits(iu, nu, m_b as usize);
        let weight_u: f64 = book_u.iter().map(|&u| p_u[u]).product();
        if weight_u == 0.0 {
            continue;
        }
        for iv in 0..count_v {
            let book_v = codebook_digits(iv, nv, m_c as usize);
            let weight_v: f64 = book_v.iter().map(|&v| p_v[v]).product();
            if weight_v == 0.0 {
                continue;
            }
            let weight = weight_u * weight_v;
            // Bob: averaged marginal states over Charlie's codebook
            let bob_states: Vec<HermitianOperator> = book_u
                .iter()
                .map(|&u| {
                    let mut acc = HermitianOperator::zeros(output_shape.dims()[0]);
                    for &v in &book_v {
                        let x = precoder.map(u, v);
                        let marginal =
                            partial_trace(ch.outputs()[x].op(), output_shape, &[0])?;
                        acc = acc.add(&marginal)?;
                    }
                    Ok(acc.scale(1.0 / (m_b * m_c) as f64))
                })
                .collect::<Result<_>>()?;
            mean_b += weight * pgm_error(&bob_states)?;

            let charlie_states: Vec<HermitianOperator> = book_v
                .iter()
                .map(|&v| {
                    let mut acc = HermitianOperator::zeros(output_shape.dims()[1]);
                    for &u in &book_u {
                        let x = precoder.map(u, v);
                        let marginal =
                            partial_trace(ch.outputs()[x].op(), output_shape, &[1])?;
                        acc = acc.add(&marginal)?;
                    }
                    Ok(acc.scale(1.0 / (m_b * m_c) as f64))
                })
                .collect::<Result<_>>()?;
            mean_c += weight * pgm_error(&charlie_states)?;
        }
    }
    Ok((
        SimulationResult::exact(mean_b, bound_b.bound),
        SimulationResult::exact(mean_c, bound_c.bound),
    ))
}

/// Exact expectation over pre-codebooks for coding with causal state
/// information; the decoder PGM runs over the state-averaged outputs.
/// Certified against [`state_info_bound`].
pub fn state_info_exact(
    ch: &CQChannel,
    ns: usize,
    p_s: &[f64],
    precoder: &Precoder,
    p_u: &[f64],
    m: u64,
    cfg: &SimConfig,
) -> Result<SimulationResult> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let nu = p_u.len();
    let count = checked_pow(nu, m as usize, cfg.enumeration_cap)?;
    let bound = state_info_bound(ch, ns, p_s, precoder, p_u, m)?.bound;
    // precoded per-u averaged outputs
    let joint = state_info_joint(ch, ns, p_s, precoder, p_u)?;
    let mut mean = 0.0;
    for index in 0..count {
        let book = codebook_digits(index, nu, m as usize);
        let weight: f64 = book.iter().map(|&u| p_u[u]).product();
        if weight == 0.0 {
            continue;
        }
        let states: Vec<HermitianOperator> = book
            .iter()
            .map(|&u| joint.blocks()[u].scale(1.0 / m as f64))
            .collect();
        mean += weight * pgm_error(&states)?;
    }
    Ok(SimulationResult::exact(mean, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::GridSpec;
    use crate::operator::tensor_product;
    use crate::random::{random_cq_channel, random_density, rng};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn noiseless_binary() -> CQChannel {
        let p0 = DensityOperator::new(HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap();
        let p1 = DensityOperator::new(HermitianOperator::from_diagonal(&[0.0, 1.0])).unwrap();
        CQChannel::new(vec!["0".into(), "1".into()], vec![0.5, 0.5], vec![p0, p1]).unwrap()
    }

    #[test]
    fn cq_exact_noiseless_binary() {
        let res = cq_random_coding_exact(&noiseless_binary(), 2, &SimConfig::default()).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(res.bound_checked, 0.5, epsilon = 1e-10);
        assert!(res.certified);
    }

    #[test]
    fn cq_exact_single_message() {
        let mut r = rng(90);
        let ch = random_cq_channel(3, 2, &mut r);
        let res = cq_random_coding_exact(&ch, 1, &SimConfig::default()).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn cq_exact_identical_outputs() {
        let mut r = rng(91);
        let rho = random_density(2, &mut r);
        let ch = CQChannel::new(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            vec![rho.clone(), rho],
        )
        .unwrap();
        let res = cq_random_coding_exact(&ch, 2, &SimConfig::default()).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.5, epsilon = 1e-9);
        assert!(res.certified);
    }

    #[test]
    fn cq_exact_respects_enumeration_cap() {
        let mut r = rng(92);
        let ch = random_cq_channel(4, 2, &mut r);
        let cfg = SimConfig {
            enumeration_cap: 10,
            ..Default::default()
        };
        assert!(matches!(
            cq_random_coding_exact(&ch, 3, &cfg),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn cq_mc_matches_exact_within_three_sigma() {
        let mut r = rng(93);
        let ch = random_cq_channel(2, 2, &mut r);
        let cfg = SimConfig::default();
        let exact = cq_random_coding_exact(&ch, 2, &cfg).unwrap();
        let mc = cq_random_coding_mc(&ch, 2, 2000, 12345, &cfg).unwrap();
        assert!(
            (mc.mean_error - exact.mean_error).abs() <= 3.0 * mc.std_error + 1e-6,
            "{} vs {}",
            mc.mean_error,
            exact.mean_error
        );
        assert!(mc.certified);
    }

    #[test]
    fn cq_mc_reproducible_single_trial() {
        let ch = noiseless_binary();
        let cfg = SimConfig::default();
        let a = cq_random_coding_mc(&ch, 2, 1, 7, &cfg).unwrap();
        let b = cq_random_coding_mc(&ch, 2, 1, 7, &cfg).unwrap();
        assert_eq!(a.mean_error.to_bits(), b.mean_error.to_bits());
    }

    #[test]
    fn cq_mc_flip_channel_certified() {
        let p0 = DensityOperator::new(HermitianOperator::from_diagonal(&[0.9, 0.1])).unwrap();
        let p1 = DensityOperator::new(HermitianOperator::from_diagonal(&[0.1, 0.9])).unwrap();
        let ch =
            CQChannel::new(vec!["0".into(), "1".into()], vec![0.5, 0.5], vec![p0, p1]).unwrap();
        let res = cq_random_coding_mc(&ch, 2, 5000, 99, &SimConfig::default()).unwrap();
        assert_abs_diff_eq!(res.bound_checked, 0.6, epsilon = 1e-10);
        assert!(res.certified);
        assert!(res.mean_error <= 0.6);
    }

    #[test]
    fn packing_exact_cases() {
        let shape = SubsystemShape::new(&[2, 2]).unwrap();
        let cfg = SimConfig::default();
        // classical maximally correlated state
        let corr = DensityOperator::new(HermitianOperator::from_diagonal(&[
            0.5, 0.0, 0.0, 0.5,
        ]))
        .unwrap();
        let tau = DensityOperator::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        let res = packing_exact(&corr, &shape, &tau, 2, &cfg).unwrap();
        assert!(res.certified);
        assert!(res.mean_error <= 0.5 + 1e-9);
        assert_abs_diff_eq!(res.bound_checked, 0.5, epsilon = 1e-10);

        let res1 = packing_exact(&corr, &shape, &tau, 1, &cfg).unwrap();
        assert_abs_diff_eq!(res1.mean_error, 0.0, epsilon = 1e-10);

        // product state: symmetric indistinguishable, error 1/2, bound 1
        let mut r = rng(94);
        let rho_b = random_density(2, &mut r);
        let product = DensityOperator::new(tensor_product(tau.op(), rho_b.op())).unwrap();
        let res = packing_exact(&product, &shape, &tau, 2, &cfg).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(res.bound_checked, 1.0, epsilon = 1e-9);
        assert!(res.certified);
    }

    #[test]
    fn packing_exact_dimension_cap() {
        let shape = SubsystemShape::new(&[2, 2]).unwrap();
        let corr =
            DensityOperator::new(HermitianOperator::from_diagonal(&[0.5, 0.0, 0.0, 0.5]))
                .unwrap();
        let tau = DensityOperator::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        let cfg = SimConfig {
            dimension_cap: 8,
            ..Default::default()
        };
        assert!(matches!(
            packing_exact(&corr, &shape, &tau, 3, &cfg),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn ea_exact_through_packing() {
        // Theorem-2 instance: identity channel on a Bell pair reduces to
        // packing with rho_RB = Phi, tau = I/2.
        let s = 1.0 / 2.0f64.sqrt();
        let c = |re: f64| Complex64::new(re, 0.0);
        let bell = DensityOperator::new(
            HermitianOperator::pure_state(&[c(s), c(0.), c(0.), c(s)]).unwrap(),
        )
        .unwrap();
        let tau = DensityOperator::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        let shape = SubsystemShape::new(&[2, 2]).unwrap();
        let res = packing_exact(&bell, &shape, &tau, 2, &SimConfig::default()).unwrap();
        assert_abs_diff_eq!(res.bound_checked, 0.25, epsilon = 1e-10);
        assert!(res.certified);
    }

    #[test]
    fn cqsw_exact_cases() {
        let cfg = SimConfig::default();
        // perfect side information: every assignment decodes exactly
        let state = build_cq_joint(&noiseless_binary());
        let res = cqsw_exact(&state, 2, &cfg).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.0, epsilon = 1e-10);
        assert!(res.certified);

        // single symbol, one bin
        let mut r = rng(95);
        let rho = random_density(2, &mut r);
        let single = CQState::new(vec![1.0], vec![rho.op().clone()]).unwrap();
        let res = cqsw_exact(&single, 1, &cfg).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.0, epsilon = 1e-10);

        // uniform binary source, trivial side info, M = 2: mean 1/4
        let sigma = random_density(2, &mut r);
        let trivial = CQState::new(
            vec![0.5, 0.5],
            vec![sigma.op().clone(), sigma.op().clone()],
        )
        .unwrap();
        let res = cqsw_exact(&trivial, 2, &cfg).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(res.bound_checked, 1.0, epsilon = 1e-9);
        assert!(res.certified);
    }

    #[test]
    fn mac_exact_cases() {
        let cfg = SimConfig::default();
        // perfect identification channel
        let mut outputs = Vec::new();
        let mut symbols = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                let mut diag = [0.0; 4];
                diag[x * 2 + y] = 1.0;
                outputs
                    .push(DensityOperator::new(HermitianOperator::from_diagonal(&diag)).unwrap());
                symbols.push(format!("{x}|{y}"));
            }
        }
        let ch = CQChannel::new(symbols, vec![0.25; 4], outputs).unwrap();
        let state = build_cq_joint(&ch);
        let res = mac_exact(&state, 2, 2, 1, 1, &cfg).unwrap();
        assert_abs_diff_eq!(res.mean_error, 0.0, epsilon = 1e-10);

        let res = mac_exact(&state, 2, 2, 2, 2, &cfg).unwrap();
        assert!(res.certified);
        assert!(res.mean_error <= 1.0);
        // collisions on either side confuse the decoder; the error is
        // strictly positive but well under the (vacuous) bound
        assert!(res.mean_error > 0.0);
    }

    #[test]
    fn mac_exact_mb1_reduces_to_cq() {
        let mut r = rng(96);
        let mut outputs = Vec::new();
        let mut symbols = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                outputs.push(random_density(2, &mut r));
                symbols.push(format!("{x}|{y}"));
            }
        }
        let px = [0.4, 0.6];
        let py = [0.5, 0.5];
        let prior: Vec<f64> = (0..2)
            .flat_map(|x| (0..2).map(move |y| px[x] * py[y]))
            .collect();
        let ch = CQChannel::new(symbols, prior, outputs.clone()).unwrap();
        let state = build_cq_joint(&ch);
        let mac = mac_exact(&state, 2, 2, 2, 1, &SimConfig::default()).unwrap();

        // induced channel x -> (Y, C) with the y codeword as decoder
        // side information
        let mut induced_outputs = Vec::new();
        for x in 0..2 {
            let blocks: Vec<HermitianOperator> = (0..2)
                .map(|y| outputs[x * 2 + y].op().scale(py[y]))
                .collect();
            let refs: Vec<&HermitianOperator> = blocks.iter().collect();
            induced_outputs
                .push(DensityOperator::new(crate::operator::direct_sum_all(&refs)).unwrap());
        }
        let induced =
            CQChannel::new(vec!["0".into(), "1".into()], px.to_vec(), induced_outputs).unwrap();
        let cq = cq_random_coding_exact(&induced, 2, &SimConfig::default()).unwrap();
        assert_abs_diff_eq!(mac.mean_error, cq.mean_error, epsilon = 1e-9);
        assert!(mac.certified);
    }

    #[test]
    fn broadcast_exact_cases() {
        let cfg = SimConfig::default();
        let mut r = rng(97);
        let shape = SubsystemShape::new(&[2, 2]).unwrap();
        let outputs: Vec<DensityOperator> = (0..2).map(|_| random_density(4, &mut r)).collect();
        let ch = CQChannel::new(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            outputs,
        )
        .unwrap();
        let precoder = Precoder::new(vec![vec![0, 0], vec![1, 1]], 2).unwrap();
        let p_u = [0.5, 0.5];
        let p_v = [0.5, 0.5];
        let (rb, rc) =
            broadcast_exact(&ch, &shape, &precoder, &p_u, &p_v, 1, 1, &cfg).unwrap();
        assert_abs_diff_eq!(rb.mean_error, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rc.mean_error, 0.0, epsilon = 1e-10);

        let (rb, rc) = broadcast_exact(&ch, &shape, &precoder, &p_u, &p_v, 2, 2, &cfg).unwrap();
        assert!(rb.certified, "bob {} vs {}", rb.mean_error, rb.bound_checked);
        assert!(rc.certified);
    }

    #[test]
    fn broadcast_exact_identical_outputs() {
        let cfg = SimConfig::default();
        let mut r = rng(98);
        let rho = random_density(4, &mut r);
        let shape = SubsystemShape::new(&[2, 2]).unwrap();
        let ch = CQChannel::new(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            vec![rho.clone(), rho],
        )
        .unwrap();
        let precoder = Precoder::new(vec![vec![0, 0], vec![1, 1]], 2).unwrap();
        let (rb, rc) =
            broadcast_exact(&ch, &shape, &precoder, &[0.5, 0.5], &[0.5, 0.5], 2, 2, &cfg)
                .unwrap();
        // zero information: both decoders reduce to uniform guessing
        assert_abs_diff_eq!(rb.mean_error, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(rc.mean_error, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(rb.bound_checked, 1.0, epsilon = 1e-9);
        assert!(rb.certified && rc.certified);
    }

    #[test]
    fn broadcast_exact_trivial_c_reduces_to_cq() {
        let cfg = SimConfig::default();
        let mut r = rng(99);
        let outputs: Vec<DensityOperator> = (0..2).map(|_| random_density(2, &mut r)).collect();
        let ch = CQChannel::new(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            outputs.clone(),
        )
        .unwrap();
        let shape = SubsystemShape::new(&[2, 1]).unwrap();
        let precoder = Precoder::new(vec![vec![0], vec![1]], 2).unwrap();
        let (rb, _) =
            broadcast_exact(&ch, &shape, &precoder, &[0.5, 0.5], &[1.0], 2, 1, &cfg).unwrap();
        let plain = cq_random_coding_exact(&ch, 2, &cfg).unwrap();
        assert_abs_diff_eq!(rb.mean_error, plain.mean_error, epsilon = 1e-9);
    }

    #[test]
    fn state_info_exact_cases() {
        let cfg = SimConfig::default();
        let mut r = rng(100);
        // single channel state: reduces to plain random coding
        let outputs: Vec<DensityOperator> = (0..2).map(|_| random_density(2, &mut r)).collect();
        let symbols: Vec<String> = vec!["0|0".into(), "1|0".into()];
        let ch = CQChannel::new(symbols, vec![0.5, 0.5], outputs.clone()).unwrap();
        let precoder = Precoder::new(vec![vec![0], vec![1]], 2).unwrap();
        let res = state_info_exact(&ch, 1, &[1.0], &precoder, &[0.5, 0.5], 2, &cfg).unwrap();
        let plain = CQChannel::new(
            vec!["0".into(), "1".into()],
            vec![0.5, 0.5],
            outputs,
        )
        .unwrap();
        let direct = cq_random_coding_exact(&plain, 2, &cfg).unwrap();
        assert_abs_diff_eq!(res.mean_error, direct.mean_error, epsilon = 1e-9);
        assert!(res.certified);

        assert_abs_diff_eq!(
            state_info_exact(&ch, 1, &[1.0], &precoder, &[0.5, 0.5], 1, &cfg)
                .unwrap()
                .mean_error,
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn state_info_exact_binary_toy() {
        let cfg = SimConfig::default();
        let d = |a: f64, b: f64| {
            DensityOperator::new(HermitianOperator::from_diagonal(&[a, b])).unwrap()
        };
        let outputs = vec![d(0.9, 0.1), d(0.2, 0.8), d(0.5, 0.5), d(0.3, 0.7)];
        let symbols: Vec<String> = vec!["0|0".into(), "0|1".into(), "1|0".into(), "1|1".into()];
        let ch = CQChannel::new(symbols, vec![0.25; 4], outputs).unwrap();
        let precoder = Precoder::new(vec![vec![0, 1], vec![1, 0]], 2).unwrap();
        let res = state_info_exact(&ch, 2, &[0.6, 0.4], &precoder, &[0.5, 0.5], 2, &cfg).unwrap();
        assert!(res.certified, "{} vs {}", res.mean_error, res.bound_checked);
    }

    #[test]
    fn random_instance_certification_battery() {
        let cfg = SimConfig::default();
        let mut r = rng(101);
        for i in 0..10 {
            let alphabet = 2 + i % 3;
            let ch = random_cq_channel(alphabet, 2, &mut r);
            for m in [2, 3] {
                let res = cq_random_coding_exact(&ch, m, &cfg).unwrap();
                assert!(
                    res.certified,
                    "channel {i} M={m}: {} vs {}",
                    res.mean_error, res.bound_checked
                );
            }
        }
    }

    #[test]
    fn exponent_relaxation_dominates_bound() {
        // the Renyi relaxation chain: cq_bound <= min over grid of
        // (M-1)^s exp(-s I_{2-1/alpha}), s = (1-alpha)/alpha
        let mut r = rng(102);
        for _ in 0..5 {
            let ch = random_cq_channel(3, 2, &mut r);
            let state = build_cq_joint(&ch);
            for m in [2u64, 3] {
                let bound = cq_bound(&ch, m).unwrap().bound;
                let grid = GridSpec::default();
                let mut best = f64::INFINITY;
                for alpha in grid.alphas() {
                    let s = (1.0 - alpha) / alpha;
                    let info = crate::divergences::cq_mutual_renyi(&state, 2.0 - 1.0 / alpha)
                        .unwrap()
                        .value()
                        .unwrap();
                    let value = ((m - 1) as f64).powf(s) * (-s * info).exp();
                    best = best.min(value);
                }
                assert!(bound <= best + 1e-9, "M={m}: {bound} > {best}");
            }
        }
    }
}
