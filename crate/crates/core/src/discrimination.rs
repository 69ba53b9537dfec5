//! Binary and multiple-state discrimination.
//!
//! Helstrom optimal error, the pretty-good measurement and its error,
//! quantum Neyman–Pearson tests with the hypothesis-testing and
//! information-spectrum divergences defined through them, the
//! Hayashi–Nagaoka operator-inequality checker, and the trace-chain
//! checker for the noncommutative parallel sum.

use crate::divergences::{petz_renyi, DivergenceValue};
use crate::error::{Error, Result};
use crate::model::DensityOperator;
use crate::operator::{nc_min, nc_quotient, spectral_decompose, HermitianOperator, Spectrum};

/// POVM elements must sum to the identity within this Frobenius bound.
pub const POVM_COMPLETENESS_TOL: f64 = 1e-8;

/// Default bisection tolerance on the Neyman–Pearson constraint value.
pub const DEFAULT_BISECT_TOL: f64 = 1e-10;

/// Bisection iteration cap.
const BISECT_MAX_ITER: usize = 200;

/// Cap on the Neyman–Pearson threshold sweep.
const MU_CAP: f64 = 1e18;

/// A two-outcome test `0 <= T <= 1` (spectrum clipped to [0,1] after a
/// tolerance gate).
#[derive(Debug, Clone)]
pub struct TwoOutcomeTest {
    t: HermitianOperator,
}

impl TwoOutcomeTest {
    pub fn new(t: HermitianOperator) -> Result<Self> {
        let spec = spectral_decompose(&t)?;
        let min = spec.eigenvalues()[0];
        let max = spec.eigenvalues()[t.dim() - 1];
        if min < -1e-9 || max > 1.0 + 1e-9 {
            return Err(Error::SpectrumOutOfRange { min, max });
        }
        let clipped = spec.rebuild_with(|x| x.clamp(0.0, 1.0));
        Ok(Self { t: clipped })
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.t
    }

    /// `Tr[rho (1 - T)]`.
    pub fn miss_probability(&self, rho: &HermitianOperator) -> Result<f64> {
        Ok(rho.trace() - rho.trace_product(&self.t)?)
    }

    /// `Tr[sigma T]`.
    pub fn pass_probability(&self, sigma: &HermitianOperator) -> Result<f64> {
        sigma.trace_product(&self.t)
    }
}

/// How the complement of the Gram support was assigned when completing
/// a pretty-good measurement to a full POVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionPolicy {
    /// `1 - supp(sum of states)` added to element 0. Any completion
    /// yields the same error against states inside the support, which
    /// is all the bounds use.
    ComplementToFirst,
}

/// A positive operator-valued measure.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianOperator>,
    completion_policy: CompletionPolicy,
}

impl Povm {
    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn completion_policy(&self) -> CompletionPolicy {
        self.completion_policy
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn check_completeness(&self) -> Result<()> {
        let dim = self.elements[0].dim();
        let mut sum = HermitianOperator::zeros(dim);
        for e in &self.elements {
            sum = sum.add(e)?;
        }
        let dev = sum.frobenius_distance(&HermitianOperator::identity(dim));
        if dev > POVM_COMPLETENESS_TOL {
            return Err(Error::ValidationError {
                path: "povm".into(),
                check: "elements sum to identity".into(),
                deviation: dev,
            });
        }
        Ok(())
    }
}

/// A Neyman–Pearson test evaluation.
#[derive(Debug, Clone)]
pub struct NpResult {
    pub threshold: f64,
    pub test: TwoOutcomeTest,
    /// `Tr[rho (1 - T)]`.
    pub type1: f64,
    /// `Tr[sigma T]`.
    pub type2: f64,
}

/// Holevo–Helstrom optimal discrimination of two PSD operators.
///
/// Returns the minimum error `Tr[A ∧ B]` together with the optimal
/// Neyman–Pearson test, the projector onto the strictly positive part
/// of `A - B`.
pub fn helstrom(a: &HermitianOperator, b: &HermitianOperator) -> Result<(f64, TwoOutcomeTest)> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let a = a.psd_clipped()?;
    let b = b.psd_clipped()?;
    let error = nc_min(&a, &b)?.trace();
    let diff = a.sub(&b)?;
    let spec = spectral_decompose(&diff)?;
    let cut = spec.resolve_cutoff(None);
    let test = TwoOutcomeTest::new(spec.rebuild_with(|x| if x > cut { 1.0 } else { 0.0 }))?;
    Ok((error, test))
}

/// Pretty-good measurement over a family of PSD operators:
/// element `m` is `S^{-1/2} state_m S^{-1/2}` with `S` the sum of the
/// family, completed to a POVM per [`CompletionPolicy`].
pub fn pgm(weighted_states: &[HermitianOperator]) -> Result<Povm> {
    if weighted_states.is_empty() {
        return Err(Error::AllZero);
    }
    let dim = weighted_states[0].dim();
    let mut sum = HermitianOperator::zeros(dim);
    for s in weighted_states {
        if s.dim() != dim {
            return Err(Error::DimMismatch {
                left: s.dim(),
                right: dim,
            });
        }
        sum = sum.add(s)?;
    }
    if sum.trace() <= 0.0 {
        return Err(Error::AllZero);
    }
    let mut elements: Vec<HermitianOperator> = weighted_states
        .iter()
        .map(|s| nc_quotient(s, &sum, None))
        .collect::<Result<_>>()?;
    let support = sum.support_projector(None)?;
    let complement = HermitianOperator::identity(dim).sub(&support)?;
    elements[0] = elements[0].add(&complement)?;
    let povm = Povm {
        elements,
        completion_policy: CompletionPolicy::ComplementToFirst,
    };
    povm.check_completeness()?;
    Ok(povm)
}

/// Average error of the pretty-good measurement over pre-weighted
/// states (`state_m = prior_m · rho_m`, traces summing to one):
/// `sum_m Tr[state_m (1 - Pi_m)]`.
pub fn pgm_error(weighted_states: &[HermitianOperator]) -> Result<f64> {
    let total: f64 = weighted_states.iter().map(|s| s.trace()).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { total });
    }
    let povm = pgm(weighted_states)?;
    // The completion never moves the error: every evaluated state lies
    // inside the Gram support.
    let dim = weighted_states[0].dim();
    let mut sum = HermitianOperator::zeros(dim);
    for s in weighted_states {
        sum = sum.add(s)?;
    }
    let support = sum.support_projector(None)?;
    let mut error = 0.0;
    for (state, element) in weighted_states.iter().zip(povm.elements()) {
        let outside = state.trace() - state.trace_product(&support)?;
        debug_assert!(
            outside <= 1e-9,
            "state mass outside the Gram support: {outside}"
        );
        error += state.trace() - state.trace_product(element)?;
    }
    Ok(error.clamp(0.0, 1.0))
}

/// Splits the spectrum of an operator at zero, returning the projectors
/// onto the strictly positive part and the kernel (|eigenvalue| <= cutoff).
fn positive_and_kernel_projectors(
    spec: &Spectrum,
    cutoff: f64,
) -> (HermitianOperator, HermitianOperator) {
    let pos = spec.rebuild_with(|x| if x > cutoff { 1.0 } else { 0.0 });
    let ker = spec.rebuild_with(|x| if x.abs() <= cutoff { 1.0 } else { 0.0 });
    (pos, ker)
}

struct NpProbe {
    /// Tr[rho P+]
    pass_strict: f64,
    /// Tr[rho (P+ + P0)]
    pass_closed: f64,
    pos: HermitianOperator,
    ker: HermitianOperator,
}

fn np_probe(rho: &HermitianOperator, sigma: &HermitianOperator, mu: f64) -> Result<NpProbe> {
    let shifted = rho.sub(&sigma.scale(mu))?;
    let spec = spectral_decompose(&shifted)?;
    let cut = spec.resolve_cutoff(None);
    let (pos, ker) = positive_and_kernel_projectors(&spec, cut);
    let pass_strict = rho.trace_product(&pos)?;
    let pass_closed = pass_strict + rho.trace_product(&ker)?;
    Ok(NpProbe {
        pass_strict,
        pass_closed,
        pos,
        ker,
    })
}

/// Quantum Neyman–Pearson test: minimizes `Tr[sigma T]` over tests with
/// `Tr[rho T] >= 1 - eps`, bisecting the threshold family
/// `T = {rho - mu sigma > 0} + t P0(rho - mu sigma)`.
pub fn neyman_pearson(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    bisect_tol: f64,
) -> Result<NpResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let target = 1.0 - eps;
    let rho_op = rho.op();
    let sigma_op = sigma.op();

    // Mass of rho outside supp(sigma) is reachable at zero type-II cost.
    let sigma_support = sigma.support_projector()?;
    let outside = (1.0 - rho_op.trace_product(&sigma_support)?).max(0.0);
    if target <= outside + 1e-12 {
        let eye = HermitianOperator::identity(rho.dim());
        let q = eye.sub(&sigma_support)?;
        let scale = if outside > 0.0 {
            (target / outside).min(1.0)
        } else {
            0.0
        };
        let test = TwoOutcomeTest::new(q.scale(scale))?;
        let type1 = test.miss_probability(rho_op)?;
        let type2 = test.pass_probability(sigma_op)?.max(0.0);
        return Ok(NpResult {
            threshold: MU_CAP,
            test,
            type1,
            type2,
        });
    }

    let mu_hi_seed = {
        let quotient = nc_quotient(rho_op, sigma_op, None)?;
        let spec = spectral_decompose(&quotient)?;
        spec.eigenvalues()[quotient.dim() - 1].max(1.0).min(MU_CAP)
    };

    let mut lo = 0.0f64;
    let mut hi = mu_hi_seed;
    // Ensure the bracket: pass(hi) must fall at or below the target.
    let mut probe_hi = np_probe(rho_op, sigma_op, hi)?;
    let mut guard = 0;
    while probe_hi.pass_strict > target && hi < MU_CAP {
        hi = (hi * 4.0).min(MU_CAP);
        probe_hi = np_probe(rho_op, sigma_op, hi)?;
        guard += 1;
        if guard > 64 {
            return Err(Error::SupportFailure);
        }
    }
    if probe_hi.pass_strict > target {
        return Err(Error::SupportFailure);
    }

    let finish = |mu: f64, probe: &NpProbe| -> Result<NpResult> {
        let jump = probe.pass_closed - probe.pass_strict;
        let t = if jump > 0.0 {
            ((target - probe.pass_strict) / jump).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let op = probe.pos.add(&probe.ker.scale(t))?;
        let test = TwoOutcomeTest::new(op)?;
        let type1 = test.miss_probability(rho_op)?;
        let type2 = test.pass_probability(sigma_op)?.max(0.0);
        Ok(NpResult {
            threshold: mu,
            test,
            type1,
            type2,
        })
    };

    // The jump may already be astride the target at an endpoint.
    let probe_lo = np_probe(rho_op, sigma_op, lo)?;
    if probe_lo.pass_strict <= target {
        return finish(lo, &probe_lo);
    }
    if probe_hi.pass_closed >= target {
        return finish(hi, &probe_hi);
    }

    let mut best_lo_probe = probe_lo;
    let mut best_hi_probe = probe_hi;
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket exhausted at f64 resolution
        }
        let probe = np_probe(rho_op, sigma_op, mid)?;
        if probe.pass_strict <= target && probe.pass_closed >= target {
            return finish(mid, &probe);
        }
        if probe.pass_strict > target {
            lo = mid;
            best_lo_probe = probe;
        } else {
            hi = mid;
            best_hi_probe = probe;
        }
        if (best_lo_probe.pass_strict - target).abs() <= bisect_tol {
            return finish(lo, &best_lo_probe);
        }
    }

    // Bracket endpoints straddle a jump whose kernel never materialized
    // numerically: mix the endpoint tests convexly. Both are valid NP
    // tests at adjacent thresholds, so the mix stays feasible and the
    // value stays within the bracket slack.
    let a_lo = best_lo_probe.pass_closed.max(best_lo_probe.pass_strict);
    let a_hi = best_hi_probe.pass_strict;
    let t_lo = best_lo_probe.pos.add(&best_lo_probe.ker)?;
    let t_hi = best_hi_probe.pos.clone();
    let lambda = if a_lo > a_hi {
        ((target - a_hi) / (a_lo - a_hi)).clamp(0.0, 1.0)
    } else {
        0.5
    };
    let op = t_lo.scale(lambda).add(&t_hi.scale(1.0 - lambda))?;
    let test = TwoOutcomeTest::new(op)?;
    let type1 = test.miss_probability(rho_op)?;
    let type2 = test.pass_probability(sigma_op)?.max(0.0);
    Ok(NpResult {
        threshold: 0.5 * (lo + hi),
        test,
        type1,
        type2,
    })
}

/// Hypothesis-testing divergence
/// `D_h^eps(rho||sigma) = -log min{Tr[sigma T] : Tr[rho T] >= 1-eps}`.
///
/// Returns the distinguished infinite value when the optimal type-II
/// error underflows the support (orthogonal case).
pub fn ht_divergence(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
) -> Result<DivergenceValue> {
    ht_divergence_with_tol(rho, sigma, eps, DEFAULT_BISECT_TOL)
}

pub fn ht_divergence_with_tol(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    bisect_tol: f64,
) -> Result<DivergenceValue> {
    let np = neyman_pearson(rho, sigma, eps, bisect_tol)?;
    if np.type2 <= 0.0 || np.threshold >= MU_CAP {
        return Ok(DivergenceValue::Infinite {
            order: eps,
            kind: crate::divergences::DivergenceKind::Kl,
        });
    }
    Ok(DivergenceValue::Finite {
        value: -np.type2.ln(),
        order: eps,
        kind: crate::divergences::DivergenceKind::Kl,
    })
}

/// Information-spectrum divergence
/// `D_s^eps(rho||sigma) = sup{gamma : Tr[rho {rho <= e^gamma sigma}] <= eps}`,
/// by bisection on the monotone step function
/// `gamma -> Tr[rho Proj{rho - e^gamma sigma <= 0}]`.
pub fn is_divergence(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    eps: f64,
    bisect_tol: f64,
) -> Result<DivergenceValue> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let rho_op = rho.op();
    let sigma_op = sigma.op();
    let kind = crate::divergences::DivergenceKind::Kl;

    // Step-function value: mass of rho on the non-positive eigenspace.
    let g = |gamma: f64| -> Result<f64> {
        let probe = np_probe(rho_op, sigma_op, gamma.exp())?;
        Ok((1.0 - probe.pass_strict).max(0.0))
    };

    // Saturation: with rho mass outside supp(sigma), g never exceeds
    // 1 - outside; if that stays <= eps the supremum is infinite.
    let sigma_support = sigma.support_projector()?;
    let outside = (1.0 - rho_op.trace_product(&sigma_support)?).max(0.0);
    if 1.0 - outside <= eps + 1e-12 {
        return Ok(DivergenceValue::Infinite { order: eps, kind });
    }

    let quotient = nc_quotient(rho_op, sigma_op, None)?;
    let spec = spectral_decompose(&quotient)?;
    let max_eig = spec.eigenvalues()[quotient.dim() - 1].max(1e-300);
    let hi_init = max_eig.ln() + 1.0;
    let mut hi = hi_init;
    let mut lo = hi - 2.0;
    let mut guard = 0;
    while g(lo)? > eps {
        lo -= (hi - lo) * 2.0;
        guard += 1;
        if guard > 64 {
            return Err(Error::SupportFailure);
        }
    }
    debug_assert!(g(hi)? > eps, "upper bracket must exceed eps");
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= bisect_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DivergenceValue::Finite {
        value: 0.5 * (lo + hi),
        order: eps,
        kind,
    })
}

/// Margin of the Hayashi–Nagaoka operator inequality
/// `1 - A/(A+B) <= (1+c)(1-A) + (2+c+1/c)B` for `0 <= A <= 1`, `B >= 0`,
/// `c > 0`: the minimum eigenvalue of RHS minus LHS. The inequality
/// asserts a margin above `-1e-8`.
pub fn check_hn_inequality(a: &HermitianOperator, b: &HermitianOperator, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::OrderOutOfRange(c));
    }
    let spec_a = spectral_decompose(a)?;
    let (min_a, max_a) = (spec_a.eigenvalues()[0], spec_a.eigenvalues()[a.dim() - 1]);
    if min_a < -1e-9 || max_a > 1.0 + 1e-9 {
        return Err(Error::SpectrumOutOfRange {
            min: min_a,
            max: max_a,
        });
    }
    let b = b.psd_clipped()?;
    let eye = HermitianOperator::identity(a.dim());
    let quotient = nc_quotient(a, &a.add(&b)?, None)?;
    let lhs = eye.sub(&quotient)?;
    let rhs = eye.sub(a)?.scale(1.0 + c).add(&b.scale(2.0 + c + 1.0 / c))?;
    let gap = rhs.sub(&lhs)?;
    let spec = spectral_decompose(&gap)?;
    Ok(spec.eigenvalues()[0])
}

/// The trace chain for the noncommutative parallel sum:
/// `Tr[A·B/(A+B)] <= Tr[A∨B]·Tr[A∧B]/Tr[A+B] <= Tr[A∧B]`.
pub fn check_trace_chain(a: &HermitianOperator, b: &HermitianOperator) -> Result<(f64, f64, f64)> {
    let a = a.psd_clipped()?;
    let b = b.psd_clipped()?;
    let sum = a.add(&b)?;
    let total = sum.trace();
    if total <= 0.0 {
        return Err(Error::ZeroTrace);
    }
    let lhs = a.trace_product(&nc_quotient(&b, &sum, None)?)?;
    let tr_min = nc_min(&a, &b)?.trace();
    let tr_max = crate::operator::nc_max(&a, &b)?.trace();
    let mid = tr_max * tr_min / total;
    Ok((lhs, mid, tr_min))
}

/// Result of the two-outcome pretty-good measurement
/// `{rho/(rho+mu sigma), mu sigma/(rho+mu sigma)}` at the Hoeffding
/// threshold `mu = exp((order-1)/order · D_order(rho||sigma) + r/order)`.
#[derive(Debug, Clone, Copy)]
pub struct HoeffdingReport {
    pub mu: f64,
    pub type1_bound: f64,
    pub type2_bound: f64,
    pub type1_actual: f64,
    pub type2_actual: f64,
}

/// One-shot Hoeffding-bound evaluation via the pretty-good measurement.
///
/// Bounds above one are vacuous and reported verbatim; clamping would
/// hide regressions.
pub fn hoeffding_pgm(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    order: f64,
    r: f64,
) -> Result<HoeffdingReport> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::OrderOutOfRange(order));
    }
    if r <= 0.0 {
        return Err(Error::OrderOutOfRange(r));
    }
    let d = petz_renyi(rho, sigma, order)?;
    match d {
        DivergenceValue::Infinite { .. } => {
            // Orthogonal supports: the PGM separates perfectly at any
            // threshold; type-I bound is zero by convention.
            let sum = rho.op().add(sigma.op())?;
            let elem_rho = nc_quotient(rho.op(), &sum, None)?;
            let elem_sigma = nc_quotient(sigma.op(), &sum, None)?;
            Ok(HoeffdingReport {
                mu: f64::INFINITY,
                type1_bound: 0.0,
                type2_bound: (-r).exp(),
                type1_actual: rho.op().trace_product(&elem_sigma)?.max(0.0),
                type2_actual: sigma.op().trace_product(&elem_rho)?.max(0.0),
            })
        }
        DivergenceValue::Finite { value: d_ord, .. } => {
            let mu = ((order - 1.0) / order * d_ord + r / order).exp();
            let sum = rho.op().add(&sigma.op().scale(mu))?;
            let elem_rho = nc_quotient(rho.op(), &sum, None)?;
            let elem_sigma = nc_quotient(&sigma.op().scale(mu), &sum, None)?;
            let type1_actual = rho.op().trace_product(&elem_sigma)?.max(0.0);
            let type2_actual = sigma.op().trace_product(&elem_rho)?.max(0.0);
            Ok(HoeffdingReport {
                mu,
                type1_bound: (-(1.0 - order) / order * (d_ord - r)).exp(),
                type2_bound: (-r).exp(),
                type1_actual,
                type2_actual,
            })
        }
    }
}
