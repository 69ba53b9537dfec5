//! Closed-form entropic quantities.
//!
//! Petz–Rényi divergence, relative entropy and its variance, the
//! collision (sandwiched order-2) divergence, max-relative entropy,
//! the fixed-marginal Rényi mutual information of a classical-quantum
//! state, and the inverse normal CDF.
//!
//! All values are in nats. Orthogonal-support cases are legitimate
//! inputs and come back as [`DivergenceValue::Infinite`], never as a
//! float sentinel.

use crate::error::{Error, Result};
use crate::model::{CQState, DensityOperator};
use crate::operator::{
    apply_spectral_function, nc_quotient, spectral_decompose, HermitianOperator, SpectralFn,
};

/// Mass of `rho` outside the support of `sigma` may not exceed this for
/// the pair to count as support-included.
pub const SUPPORT_INCLUSION_TOL: f64 = 1e-9;

/// Which divergence a [`DivergenceValue`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    Petz,
    Sandwiched2,
    Max,
    Kl,
    Variance,
}

/// A divergence evaluation; infinite values are a distinguished tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite {
        value: f64,
        order: f64,
        kind: DivergenceKind,
    },
    Infinite {
        order: f64,
        kind: DivergenceKind,
    },
}

impl DivergenceValue {
    fn finite(value: f64, order: f64, kind: DivergenceKind) -> Self {
        DivergenceValue::Finite { value, order, kind }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, DivergenceValue::Infinite { .. })
    }

    /// Finite value, or `None` when infinite.
    pub fn value(&self) -> Option<f64> {
        match self {
            DivergenceValue::Finite { value, .. } => Some(*value),
            DivergenceValue::Infinite { .. } => None,
        }
    }

    /// Finite value, or `f64::INFINITY` (for arithmetic that tolerates it).
    pub fn value_or_inf(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn kind(&self) -> DivergenceKind {
        match self {
            DivergenceValue::Finite { kind, .. } | DivergenceValue::Infinite { kind, .. } => *kind,
        }
    }

    pub fn order(&self) -> f64 {
        match self {
            DivergenceValue::Finite { order, .. } | DivergenceValue::Infinite { order, .. } => {
                *order
            }
        }
    }
}

/// Mass of `a` outside `supp(b)`.
fn mass_outside_support(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    let proj = b.support_projector(None)?;
    let inside = a.trace_product(&proj)?;
    Ok((a.trace() - inside).max(0.0))
}

fn support_included(a: &HermitianOperator, b: &HermitianOperator) -> Result<bool> {
    Ok(mass_outside_support(a, b)? <= SUPPORT_INCLUSION_TOL)
}

/// Petz–Rényi divergence
/// `D_alpha(rho||sigma) = log(Tr[rho^alpha sigma^(1-alpha)]) / (alpha-1)`
/// for `alpha` in `(0,1) ∪ (1,2]`, with pseudo-powers on supports.
///
/// For `alpha > 1` the divergence is infinite unless
/// `supp(rho) ⊆ supp(sigma)`; for `alpha < 1` it is infinite exactly
/// when the supports are orthogonal.
pub fn petz_renyi(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<DivergenceValue> {
    if !(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let kind = DivergenceKind::Petz;
    if alpha > 1.0 && !support_included(rho.op(), sigma.op())? {
        return Ok(DivergenceValue::Infinite { order: alpha, kind });
    }
    let rho_a = apply_spectral_function(rho.op(), SpectralFn::Power(alpha), None)?;
    let sigma_1a = apply_spectral_function(sigma.op(), SpectralFn::Power(1.0 - alpha), None)?;
    let trace = rho_a.trace_product(&sigma_1a)?;
    if trace <= 0.0 {
        // Tr[rho^a sigma^(1-a)] = 0 iff the supports are orthogonal.
        return Ok(DivergenceValue::Infinite { order: alpha, kind });
    }
    Ok(DivergenceValue::finite(trace.ln() / (alpha - 1.0), alpha, kind))
}

/// Quantum relative entropy `D(rho||sigma) = Tr[rho(log rho - log sigma)]`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DivergenceValue> {
    let kind = DivergenceKind::Kl;
    if !support_included(rho.op(), sigma.op())? {
        return Ok(DivergenceValue::Infinite { order: 1.0, kind });
    }
    let log_rho = apply_spectral_function(rho.op(), SpectralFn::Log, None)?;
    let log_sigma = apply_spectral_function(sigma.op(), SpectralFn::Log, None)?;
    let diff = log_rho.sub(&log_sigma)?;
    Ok(DivergenceValue::finite(
        rho.op().trace_product(&diff)?,
        1.0,
        kind,
    ))
}

/// Relative entropy variance
/// `V(rho||sigma) = Tr[rho (log rho - log sigma)^2] - D(rho||sigma)^2`.
///
/// Errors with [`Error::SupportViolation`] when `D` is infinite.
pub fn relative_entropy_variance(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<DivergenceValue> {
    let d = match relative_entropy(rho, sigma)? {
        DivergenceValue::Finite { value, .. } => value,
        DivergenceValue::Infinite { .. } => return Err(Error::SupportViolation),
    };
    let log_rho = apply_spectral_function(rho.op(), SpectralFn::Log, None)?;
    let log_sigma = apply_spectral_function(sigma.op(), SpectralFn::Log, None)?;
    let diff = log_rho.sub(&log_sigma)?;
    let diff_sq = HermitianOperator::symmetrized(diff.matrix() * diff.matrix());
    let second_moment = rho.op().trace_product(&diff_sq)?;
    Ok(DivergenceValue::finite(
        second_moment - d * d,
        1.0,
        DivergenceKind::Variance,
    ))
}

/// Collision divergence
/// `D2*(A||B) = log Tr[(B^{-1/4} A B^{-1/4})^2]` with pseudo-powers on
/// the support of `B`. Accepts general PSD operators.
pub fn collision_divergence(a: &HermitianOperator, b: &HermitianOperator) -> Result<DivergenceValue> {
    let kind = DivergenceKind::Sandwiched2;
    if !support_included(a, b)? {
        return Ok(DivergenceValue::Infinite { order: 2.0, kind });
    }
    let b = b.psd_clipped()?;
    let b_inv_quarter = apply_spectral_function(&b, SpectralFn::Power(-0.25), None)?;
    let sandwiched = b_inv_quarter.sandwich(a)?;
    let trace = sandwiched.trace_product(&sandwiched)?;
    if trace <= 0.0 {
        return Ok(DivergenceValue::Infinite { order: 2.0, kind });
    }
    Ok(DivergenceValue::finite(trace.ln(), 2.0, kind))
}

/// Max-relative entropy `D_inf*(A||B) = inf{gamma : A <= e^gamma B}`,
/// the log of the largest eigenvalue of `B^{-1/2} A B^{-1/2}`. Infinite
/// when `supp(A)` escapes `supp(B)`. Diagnoses when the main coding
/// bound trivializes.
pub fn max_relative_entropy_psd(
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<DivergenceValue> {
    let kind = DivergenceKind::Max;
    if !support_included(a, b)? {
        return Ok(DivergenceValue::Infinite {
            order: f64::INFINITY,
            kind,
        });
    }
    let quotient = nc_quotient(a, b, None)?;
    let spec = spectral_decompose(&quotient)?;
    let max = spec.eigenvalues()[quotient.dim() - 1];
    if max <= 0.0 {
        // A vanishes on supp(B); conventionally -infinity.
        return Ok(DivergenceValue::finite(f64::NEG_INFINITY, f64::INFINITY, kind));
    }
    Ok(DivergenceValue::finite(max.ln(), f64::INFINITY, kind))
}

/// [`max_relative_entropy_psd`] on density operators.
pub fn max_relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
) -> Result<DivergenceValue> {
    max_relative_entropy_psd(rho.op(), sigma.op())
}

/// Fixed-marginal Rényi mutual information of a classical-quantum state,
/// `I_alpha(X:B) = D_alpha(rho_XB || rho_X ⊗ rho_B)`, computed blockwise:
/// `Tr[rho_XB^alpha (rho_X ⊗ rho_B)^{1-alpha}]
///   = sum_x p(x) Tr[(rho_B^x)^alpha rho_B^{1-alpha}]`.
pub fn cq_mutual_renyi(state: &CQState, alpha: f64) -> Result<DivergenceValue> {
    if !(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let kind = DivergenceKind::Petz;
    let rho_b = state.marginal_b();
    if alpha > 1.0 {
        for x in 0..state.num_blocks() {
            if !support_included(&state.blocks()[x], &rho_b)? {
                return Ok(DivergenceValue::Infinite { order: alpha, kind });
            }
        }
    }
    let sigma_1a = apply_spectral_function(&rho_b, SpectralFn::Power(1.0 - alpha), None)?;
    let mut total = 0.0;
    for x in 0..state.num_blocks() {
        let block_a =
            apply_spectral_function(&state.blocks()[x], SpectralFn::Power(alpha), None)?;
        total += state.prior()[x] * block_a.trace_product(&sigma_1a)?;
    }
    if total <= 0.0 {
        return Ok(DivergenceValue::Infinite { order: alpha, kind });
    }
    Ok(DivergenceValue::finite(total.ln() / (alpha - 1.0), alpha, kind))
}

/// Conditional Rényi entropy of the classical part given the quantum
/// side information, `H_alpha(X|B) = -D_alpha(rho_XB || 1_X ⊗ rho_B)`,
/// computed blockwise like [`cq_mutual_renyi`] but keeping the prior
/// weights inside the first argument only.
pub fn cq_conditional_renyi_entropy(state: &CQState, alpha: f64) -> Result<DivergenceValue> {
    if !(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let kind = DivergenceKind::Petz;
    let rho_b = state.marginal_b();
    let sigma_1a = apply_spectral_function(&rho_b, SpectralFn::Power(1.0 - alpha), None)?;
    let mut total = 0.0;
    for x in 0..state.num_blocks() {
        let weighted = state.weighted_block(x);
        let block_a = apply_spectral_function(&weighted, SpectralFn::Power(alpha), None)?;
        total += block_a.trace_product(&sigma_1a)?;
    }
    if total <= 0.0 {
        return Ok(DivergenceValue::Infinite { order: alpha, kind });
    }
    Ok(DivergenceValue::finite(
        -total.ln() / (alpha - 1.0),
        alpha,
        kind,
    ))
}

/// Mutual information `I(X:B) = D(rho_XB || rho_X ⊗ rho_B)` evaluated
/// on the dense block-diagonal representation.
pub fn cq_mutual_information(state: &CQState) -> Result<DivergenceValue> {
    let joint = DensityOperator::new(state.dense_joint())?;
    let product = DensityOperator::new(state.dense_product_marginal())?;
    relative_entropy(&joint, &product)
}

/// Mutual information variance `V(X:B)` of a classical-quantum state.
pub fn cq_mutual_information_variance(state: &CQState) -> Result<DivergenceValue> {
    let joint = DensityOperator::new(state.dense_joint())?;
    let product = DensityOperator::new(state.dense_product_marginal())?;
    relative_entropy_variance(&joint, &product)
}

/// Standard normal CDF via the error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation refined by one Newton step against
/// the erf-based forward CDF; absolute error below 1e-9 on (0,1).
pub fn inverse_normal_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::POutOfRange(p));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // One Newton step against the erf-based CDF.
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let refined = if pdf > 0.0 {
        x - (normal_cdf(x) - p) / pdf
    } else {
        x
    };
    Ok(refined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_cq_joint;
    use crate::model::CQChannel;
    use crate::operator::{direct_sum, tensor_product};
    use crate::random::{random_density, random_density_of_rank, rng};
    use approx::assert_abs_diff_eq;

    fn half_half() -> DensityOperator {
        DensityOperator::new(HermitianOperator::from_diagonal(&[0.5, 0.5])).unwrap()
    }

    fn nine_one() -> DensityOperator {
        DensityOperator::new(HermitianOperator::from_diagonal(&[0.9, 0.1])).unwrap()
    }

    #[test]
    fn petz_of_equal_states_vanishes() {
        let mut r = rng(30);
        let rho = random_density(3, &mut r);
        for alpha in [0.3, 0.7, 1.5, 2.0] {
            let d = petz_renyi(&rho, &rho, alpha).unwrap();
            assert_abs_diff_eq!(d.value().unwrap(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn petz_alpha_two_diagonal_value() {
        // ln(0.25/0.9 + 0.25/0.1) = ln(2.77778)
        let d = petz_renyi(&half_half(), &nine_one(), 2.0).unwrap();
        let expect = (0.25f64 / 0.9 + 0.25 / 0.1).ln();
        assert_abs_diff_eq!(d.value().unwrap(), expect, epsilon = 1e-10);
        assert_abs_diff_eq!(d.value().unwrap(), 1.02165, epsilon = 1e-4);
    }

    #[test]
    fn petz_support_rule_above_one() {
        let rho = half_half();
        let sigma = DensityOperator::new(HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap();
        let d = petz_renyi(&rho, &sigma, 1.5).unwrap();
        assert!(d.is_infinite());
    }

    #[test]
    fn petz_alpha_out_of_range() {
        let rho = half_half();
        assert!(matches!(
            petz_renyi(&rho, &rho, 1.0),
            Err(Error::AlphaOutOfRange(_))
        ));
        assert!(matches!(
            petz_renyi(&rho, &rho, 2.5),
            Err(Error::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn relative_entropy_diagonal_values() {
        let d = relative_entropy(&half_half(), &nine_one()).unwrap();
        let expect = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert_abs_diff_eq!(d.value().unwrap(), expect, epsilon = 1e-10);
        assert_abs_diff_eq!(d.value().unwrap(), 0.51083, epsilon = 1e-4);

        let v = relative_entropy_variance(&half_half(), &nine_one()).unwrap();
        let lr0 = (0.5f64 / 0.9).ln();
        let lr1 = (0.5f64 / 0.1).ln();
        let expect_v = 0.5 * lr0 * lr0 + 0.5 * lr1 * lr1 - expect * expect;
        assert_abs_diff_eq!(v.value().unwrap(), expect_v, epsilon = 1e-10);
        assert_abs_diff_eq!(v.value().unwrap(), 1.2069, epsilon = 1e-4);
    }

    #[test]
    fn relative_entropy_of_identical_states() {
        let mut r = rng(31);
        let rho = random_density(3, &mut r);
        assert_abs_diff_eq!(
            relative_entropy(&rho, &rho).unwrap().value().unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            relative_entropy_variance(&rho, &rho)
                .unwrap()
                .value()
                .unwrap(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn variance_errors_on_support_violation() {
        let rho = half_half();
        let sigma = DensityOperator::new(HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            relative_entropy_variance(&rho, &sigma),
            Err(Error::SupportViolation)
        ));
    }

    #[test]
    fn collision_matches_petz_two_for_commuting() {
        let d = collision_divergence(half_half().op(), nine_one().op()).unwrap();
        assert_abs_diff_eq!(d.value().unwrap(), 1.02165, epsilon = 1e-4);

        let mut r = rng(32);
        let rho = random_density(3, &mut r);
        assert_abs_diff_eq!(
            collision_divergence(rho.op(), rho.op())
                .unwrap()
                .value()
                .unwrap(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn collision_orthogonal_is_infinite() {
        let a = HermitianOperator::from_diagonal(&[1.0, 0.0]);
        let b = HermitianOperator::from_diagonal(&[0.0, 1.0]);
        assert!(collision_divergence(&a, &b).unwrap().is_infinite());
    }

    #[test]
    fn max_relative_entropy_values() {
        let d = max_relative_entropy(&half_half(), &nine_one()).unwrap();
        assert_abs_diff_eq!(d.value().unwrap(), 5.0f64.ln(), epsilon = 1e-9);

        let mut r = rng(33);
        let rho = random_density(3, &mut r);
        assert_abs_diff_eq!(
            max_relative_entropy(&rho, &rho).unwrap().value().unwrap(),
            0.0,
            epsilon = 1e-8
        );

        let a = DensityOperator::new(HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap();
        let b = DensityOperator::new(HermitianOperator::from_diagonal(&[0.0, 1.0])).unwrap();
        assert!(max_relative_entropy(&a, &b).unwrap().is_infinite());
    }

    #[test]
    fn petz_monotone_in_alpha_and_kl_limit() {
        let mut r = rng(34);
        for _ in 0..10 {
            let rho = random_density(3, &mut r);
            let sigma = random_density(3, &mut r);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..9 {
                let alpha = 0.55 + 0.05 * k as f64;
                let d = petz_renyi(&rho, &sigma, alpha).unwrap().value().unwrap();
                assert!(d >= prev - 1e-9, "alpha {alpha}: {d} < {prev}");
                prev = d;
            }
            let d = relative_entropy(&rho, &sigma).unwrap().value().unwrap();
            let lo = petz_renyi(&rho, &sigma, 0.999).unwrap().value().unwrap();
            let hi = petz_renyi(&rho, &sigma, 1.001).unwrap().value().unwrap();
            assert!((lo - d).abs() <= 0.01 * (1.0 + d.abs()));
            assert!((hi - d).abs() <= 0.01 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn petz_additive_under_tensor_products() {
        let mut r = rng(35);
        for _ in 0..5 {
            let rho1 = random_density(2, &mut r);
            let rho2 = random_density(3, &mut r);
            let sig1 = random_density(2, &mut r);
            let sig2 = random_density(3, &mut r);
            let joint_rho = DensityOperator::new(tensor_product(rho1.op(), rho2.op())).unwrap();
            let joint_sig = DensityOperator::new(tensor_product(sig1.op(), sig2.op())).unwrap();
            for alpha in [0.6, 0.9, 1.7] {
                let total = petz_renyi(&joint_rho, &joint_sig, alpha)
                    .unwrap()
                    .value()
                    .unwrap();
                let parts = petz_renyi(&rho1, &sig1, alpha).unwrap().value().unwrap()
                    + petz_renyi(&rho2, &sig2, alpha).unwrap().value().unwrap();
                assert!((total - parts).abs() <= 1e-8, "alpha {alpha}");
            }
        }
    }

    #[test]
    fn cq_mutual_renyi_blockwise_matches_dense() {
        let mut r = rng(36);
        let ch = crate::random::random_cq_channel(3, 2, &mut r);
        let state = build_cq_joint(&ch);
        let joint = DensityOperator::new(state.dense_joint()).unwrap();
        let product = DensityOperator::new(state.dense_product_marginal()).unwrap();
        for alpha in [0.7, 1.3] {
            let blockwise = cq_mutual_renyi(&state, alpha).unwrap().value().unwrap();
            let dense = petz_renyi(&joint, &product, alpha).unwrap().value().unwrap();
            assert!((blockwise - dense).abs() <= 1e-9, "alpha {alpha}");
        }
    }

    #[test]
    fn cq_mutual_renyi_special_channels() {
        let mut r = rng(37);
        // identical outputs: product state, I_alpha = 0
        let rho = random_density(2, &mut r);
        let ch = CQChannel::new(
            vec!["0".into(), "1".into()],
            vec![0.4, 0.6],
            vec![rho.clone(), rho],
        )
        .unwrap();
        let state = build_cq_joint(&ch);
        for alpha in [0.6, 1.4, 2.0] {
            assert_abs_diff_eq!(
                cq_mutual_renyi(&state, alpha).unwrap().value().unwrap(),
                0.0,
                epsilon = 1e-9
            );
        }
        // noiseless binary channel: I_alpha = ln 2 for every alpha
        let p0 = DensityOperator::new(HermitianOperator::from_diagonal(&[1.0, 0.0])).unwrap();
        let p1 = DensityOperator::new(HermitianOperator::from_diagonal(&[0.0, 1.0])).unwrap();
        let ch = CQChannel::new(vec!["0".into(), "1".into()], vec![0.5, 0.5], vec![p0, p1]).unwrap();
        let state = build_cq_joint(&ch);
        for alpha in [0.55, 0.8, 1.5, 2.0] {
            assert_abs_diff_eq!(
                cq_mutual_renyi(&state, alpha).unwrap().value().unwrap(),
                2.0f64.ln(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn conditional_entropy_blockwise_matches_dense() {
        let mut r = rng(38);
        let ch = crate::random::random_cq_channel(2, 2, &mut r);
        let state = build_cq_joint(&ch);
        for alpha in [0.7, 1.6] {
            let blockwise = cq_conditional_renyi_entropy(&state, alpha)
                .unwrap()
                .value()
                .unwrap();
            // dense route: -D_alpha(rho_XB || 1_X ⊗ rho_B)
            let joint = state.dense_joint();
            let rho_b = state.marginal_b();
            let unweighted_blocks: Vec<HermitianOperator> =
                (0..state.num_blocks()).map(|_| rho_b.clone()).collect();
            let refs: Vec<&HermitianOperator> = unweighted_blocks.iter().collect();
            let unweighted = crate::operator::direct_sum_all(&refs);
            let ja = apply_spectral_function(&joint, SpectralFn::Power(alpha), None).unwrap();
            let ua =
                apply_spectral_function(&unweighted, SpectralFn::Power(1.0 - alpha), None).unwrap();
            let dense = -(ja.trace_product(&ua).unwrap()).ln() / (alpha - 1.0);
            assert!((blockwise - dense).abs() <= 1e-9, "alpha {alpha}");
        }
    }

    #[test]
    fn collision_data_processing_via_direct_sums() {
        // exp D2* of A ⊕ B against (A+B) ⊕ (A+B) dominates exp D2* after
        // the measure-and-prepare map that records the Helstrom outcome.
        let mut r = rng(39);
        for _ in 0..10 {
            let a = crate::random::random_psd(3, 3, &mut r);
            let b = crate::random::random_psd(3, 2, &mut r);
            let sum = a.add(&b).unwrap();
            let lhs = collision_divergence(&direct_sum(&a, &b), &direct_sum(&sum, &sum))
                .unwrap()
                .value()
                .unwrap()
                .exp();
            let v_max = crate::operator::nc_max(&a, &b).unwrap().trace();
            let v_min = crate::operator::nc_min(&a, &b).unwrap().trace();
            let t = sum.trace();
            let mapped_a = HermitianOperator::from_diagonal(&[v_max, v_min]);
            let mapped_b = HermitianOperator::from_diagonal(&[t, t]);
            let rhs = collision_divergence(&mapped_a, &mapped_b)
                .unwrap()
                .value()
                .unwrap()
                .exp();
            assert!(lhs >= rhs - 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn inverse_normal_cdf_reference_points() {
        assert_abs_diff_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inverse_normal_cdf(0.975).unwrap(), 1.959964, epsilon = 1e-6);
        assert_abs_diff_eq!(inverse_normal_cdf(0.025).unwrap(), -1.959964, epsilon = 1e-6);
        assert!(matches!(inverse_normal_cdf(0.0), Err(Error::POutOfRange(_))));
        assert!(matches!(inverse_normal_cdf(1.0), Err(Error::POutOfRange(_))));
    }

    #[test]
    fn inverse_normal_cdf_round_trip() {
        for k in -3..=3 {
            let x = k as f64;
            let back = inverse_normal_cdf(normal_cdf(x)).unwrap();
            assert!((back - x).abs() <= 1e-8, "x {x}: {back}");
        }
    }

    #[test]
    fn divergences_nonnegative_on_densities() {
        let mut r = rng(40);
        for _ in 0..10 {
            let rho = random_density_of_rank(3, 2, &mut r);
            let sigma = random_density(3, &mut r);
            for alpha in [0.5, 1.5, 2.0] {
                if let Some(v) = petz_renyi(&rho, &sigma, alpha).unwrap().value() {
                    assert!(v >= -1e-9);
                }
            }
            assert!(relative_entropy(&rho, &sigma).unwrap().value().unwrap() >= -1e-9);
            assert!(
                collision_divergence(rho.op(), sigma.op())
                    .unwrap()
                    .value()
                    .unwrap()
                    >= -1e-9
            );
            assert!(max_relative_entropy(&rho, &sigma).unwrap().value().unwrap() >= -1e-9);
            assert!(
                relative_entropy_variance(&rho, &sigma)
                    .unwrap()
                    .value()
                    .unwrap()
                    >= -1e-9
            );
        }
    }
}
