//! Closed-form one-shot achievability bounds.
//!
//! Every error bound here is a trace of a noncommutative minimal
//! between a joint state and a scaled product combination of its
//! marginals, evaluated blockwise over the classical registers where
//! the states are block diagonal. Rate bounds come from the
//! hypothesis-testing and information-spectrum divergences; exponent
//! bounds from a grid supremum over Rényi orders.
//!
//! Rates and exponents are in nats; message counts enter as exact
//! integers.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::discrimination::{ht_divergence, is_divergence, DEFAULT_BISECT_TOL};
use crate::divergences::{
    cq_conditional_renyi_entropy, cq_mutual_information, cq_mutual_renyi, max_relative_entropy_psd,
    DivergenceValue,
};
use crate::error::{Error, Result};
use crate::model::{
    apply_kraus_raw, build_cq_joint, CQChannel, CQState, DensityOperator, KrausChannel,
};
use crate::operator::{
    nc_min, partial_trace, permute_factors, tensor_product, HermitianOperator, SubsystemShape,
};

/// Protocol tags for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Cq,
    Cqsw,
    Packing,
    Ea,
    Mac,
    Broadcast,
    StateInfo,
    EaMac,
    EaBroadcast,
    EaStateInfo,
}

impl Protocol {
    pub fn tag(&self) -> &'static str {
        match self {
            Protocol::Cq => "cq",
            Protocol::Cqsw => "cqsw",
            Protocol::Packing => "packing",
            Protocol::Ea => "ea",
            Protocol::Mac => "mac",
            Protocol::Broadcast => "broadcast",
            Protocol::StateInfo => "state-info",
            Protocol::EaMac => "ea-mac",
            Protocol::EaBroadcast => "ea-broadcast",
            Protocol::EaStateInfo => "ea-state-info",
        }
    }
}

/// A computed error bound with its diagnostics.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub protocol: Protocol,
    /// Raw bound value; never clamped.
    pub bound: f64,
    /// `min(bound, 1)` convenience value.
    pub effective: f64,
    /// Strengthened variant when the protocol exposes one.
    pub strengthened_bound: Option<f64>,
    /// True when the bound provably trivializes (message count at or
    /// above the max-relative-entropy threshold).
    pub trivial: bool,
    /// Named intermediate traces.
    pub components: BTreeMap<String, f64>,
    /// Digest of the report inputs.
    pub inputs_digest: String,
}

impl BoundReport {
    fn new(protocol: Protocol, bound: f64, digest_parts: &[String]) -> Self {
        BoundReport {
            protocol,
            bound,
            effective: bound.min(1.0),
            strengthened_bound: None,
            trivial: false,
            components: BTreeMap::new(),
            inputs_digest: digest(digest_parts),
        }
    }
}

/// Exponent-vs-rate report: the grid of `(alpha, (1-alpha)/alpha ·
/// (I_{2-1/alpha} - R))` values and its maximum.
#[derive(Debug, Clone)]
pub struct ExponentReport {
    pub rate: f64,
    pub grid: Vec<(f64, f64)>,
    pub best_alpha: f64,
    pub exponent: f64,
    /// `I(X:B)` (or the conditional-entropy analogue) for the
    /// positivity diagnostic.
    pub mutual_information: f64,
}

/// Grid specification for exponent sweeps over `alpha ∈ (1/2, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub steps: usize,
    /// Inset from both open endpoints.
    pub inset: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            steps: 99,
            inset: 1e-3,
        }
    }
}

impl GridSpec {
    pub fn alphas(&self) -> Vec<f64> {
        if self.steps == 0 {
            return Vec::new();
        }
        let lo = 0.5 + self.inset;
        let hi = 1.0 - self.inset;
        if self.steps == 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..self.steps)
            .map(|k| lo + (hi - lo) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Rate-bound comparison triple (all in nats).
#[derive(Debug, Clone, Copy)]
pub struct RateComparison {
    /// `D_h^{eps-delta} - log(1/delta)`.
    pub ours: f64,
    /// `D_h^{eps-delta} - log(4/delta^2)`.
    pub hayashi_nagaoka: f64,
    /// `D_s^{eps-delta} - log((1-eps)/delta)`.
    pub beigi_gohari: f64,
    /// `max(0, ours)` convenience value.
    pub effective: f64,
}

fn digest(parts: &[String]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    let out = hasher.finalize();
    let hex: String = out.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn digest_state(state: &CQState) -> String {
    let mut parts = String::new();
    for (p, b) in state.prior().iter().zip(state.blocks()) {
        parts.push_str(&format!("{p:.17e};"));
        for z in b.matrix().iter() {
            parts.push_str(&format!("{:.17e},{:.17e};", z.re, z.im));
        }
    }
    parts
}

fn digest_operator(h: &HermitianOperator) -> String {
    let mut parts = String::new();
    for z in h.matrix().iter() {
        parts.push_str(&format!("{:.17e},{:.17e};", z.re, z.im));
    }
    parts
}

/// Blockwise `Tr[rho_XB ∧ (M-1) rho_X ⊗ rho_B]` and the triviality
/// diagnostic for one classical-quantum state.
fn cq_min_trace(state: &CQState, m: u64) -> Result<(f64, BTreeMap<String, f64>, bool)> {
    let factor = (m - 1) as f64;
    let rho_b = state.marginal_b();
    let mut total = 0.0;
    let mut components = BTreeMap::new();
    let mut dmax_exceeded = m > 1;
    for x in 0..state.num_blocks() {
        let block = &state.blocks()[x];
        let per_block = nc_min(block, &rho_b.scale(factor))?.trace();
        total += state.prior()[x] * per_block;
        components.insert(format!("block_{x}"), per_block);
        if m > 1 {
            // trivial iff log(M-1) >= D_inf*(rho_XB || rho_X ⊗ rho_B),
            // which blockwise is max_x D_inf*(block_x || rho_b).
            match max_relative_entropy_psd(block, &rho_b)? {
                DivergenceValue::Finite { value, .. } => {
                    if factor.ln() < value - 1e-12 {
                        dmax_exceeded = false;
                    }
                }
                DivergenceValue::Infinite { .. } => dmax_exceeded = false,
            }
        }
    }
    Ok((total, components, dmax_exceeded))
}

/// One-shot random-coding error bound for classical-quantum channel
/// coding: `Tr[rho_XB ∧ (M-1) rho_X ⊗ rho_B]`, evaluated blockwise,
/// with the strengthened variant `(1 - bound/M) · bound`.
pub fn cq_bound(ch: &CQChannel, m: u64) -> Result<BoundReport> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let state = build_cq_joint(ch);
    let (bound, components, trivial) = cq_min_trace(&state, m)?;
    let mut report = BoundReport::new(
        Protocol::Cq,
        bound,
        &[digest_state(&state), format!("M={m}")],
    );
    report.strengthened_bound = Some((1.0 - bound / m as f64) * bound);
    report.trivial = trivial;
    report.components = components;
    report.components.insert("messages".into(), m as f64);
    Ok(report)
}

/// Error-exponent sweep for classical-quantum channel coding:
/// `max_alpha (1-alpha)/alpha (I_{2-1/alpha}(X:B) - R)` over the grid.
pub fn cq_exponent(ch: &CQChannel, rate: f64, grid: &GridSpec) -> Result<ExponentReport> {
    let state = build_cq_joint(ch);
    exponent_sweep(rate, grid, |alpha| {
        Ok(cq_mutual_renyi(&state, 2.0 - 1.0 / alpha)?.value_or_inf())
    }, cq_mutual_information(&state)?.value_or_inf())
}

fn exponent_sweep(
    rate: f64,
    grid: &GridSpec,
    info_at: impl Fn(f64) -> Result<f64>,
    mutual_information: f64,
) -> Result<ExponentReport> {
    let alphas = grid.alphas();
    if alphas.is_empty() {
        return Err(Error::GridEmpty);
    }
    let mut points = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let info = info_at(alpha)?;
        let integrand = (1.0 - alpha) / alpha * (info - rate);
        points.push((alpha, integrand));
    }
    let (best_alpha, exponent) = points
        .iter()
        .cloned()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite integrands"))
        .expect("grid is nonempty");
    Ok(ExponentReport {
        rate,
        grid: points,
        best_alpha,
        exponent,
        mutual_information,
    })
}

/// One-shot rate bounds at fixed error: ours versus the
/// Hayashi–Nagaoka and Beigi–Gohari forms.
pub fn cq_rate(ch: &CQChannel, eps: f64, delta: f64) -> Result<RateComparison> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    if !(delta > 0.0 && delta < eps) {
        return Err(Error::DeltaOutOfRange { delta, eps });
    }
    let state = build_cq_joint(ch);
    let joint = DensityOperator::new(state.dense_joint())?;
    let product = DensityOperator::new(state.dense_product_marginal())?;
    let dh = ht_divergence(&joint, &product, eps - delta)?.value_or_inf();
    let ds = is_divergence(&joint, &product, eps - delta, DEFAULT_BISECT_TOL)?.value_or_inf();
    let ours = dh - (1.0 / delta).ln();
    let hayashi_nagaoka = dh - (4.0 / (delta * delta)).ln();
    let beigi_gohari = ds - ((1.0 - eps) / delta).ln();
    Ok(RateComparison {
        ours,
        hayashi_nagaoka,
        beigi_gohari,
        effective: ours.max(0.0),
    })
}

/// Normal-approximation rate expansion
/// `n·I + sqrt(n·V)·Phi^{-1}(eps) - (1/2)·log n`.
///
/// The unknown O(1) constant of the expansion is omitted; this is an
/// approximation for orientation, not an achievability guarantee.
pub fn second_order_rate(i: f64, v: f64, eps: f64, n: u64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    if v < 0.0 || n < 1 {
        return Err(Error::BadProbability(format!(
            "second-order rate needs V >= 0 and n >= 1, got V={v}, n={n}"
        )));
    }
    let nf = n as f64;
    let quantile = crate::divergences::inverse_normal_cdf(eps)?;
    Ok(nf * i + (nf * v).sqrt() * quantile - 0.5 * nf.ln())
}

/// One-shot quantum packing bound:
/// `Tr[rho_RB ∧ (M-1) tau_R ⊗ rho_B]` on the bipartite shape `(d_R, d_B)`.
pub fn packing_bound(
    rho_rb: &DensityOperator,
    shape: &SubsystemShape,
    tau_r: &DensityOperator,
    m: u64,
) -> Result<BoundReport> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    if shape.num_factors() != 2 || shape.total_dim() != rho_rb.dim() {
        return Err(Error::ShapeMismatch {
            shape: shape.dims().to_vec(),
            product: shape.total_dim(),
            dim: rho_rb.dim(),
        });
    }
    if tau_r.dim() != shape.dims()[0] {
        return Err(Error::DimMismatch {
            left: tau_r.dim(),
            right: shape.dims()[0],
        });
    }
    let rho_b = partial_trace(rho_rb.op(), shape, &[1])?;
    let decoupled = tensor_product(tau_r.op(), &rho_b);
    let factor = (m - 1) as f64;
    let bound = nc_min(rho_rb.op(), &decoupled.scale(factor))?.trace();
    let mut report = BoundReport::new(
        Protocol::Packing,
        bound,
        &[
            digest_operator(rho_rb.op()),
            digest_operator(tau_r.op()),
            format!("M={m}"),
        ],
    );
    report.trivial = match max_relative_entropy_psd(rho_rb.op(), &decoupled)? {
        DivergenceValue::Finite { value, .. } => m > 1 && factor.ln() >= value - 1e-12,
        DivergenceValue::Infinite { .. } => false,
    };
    report
        .components
        .insert("marginal_b_trace".into(), rho_b.trace());
    report.components.insert("messages".into(), m as f64);
    Ok(report)
}

/// Entanglement-assisted point-to-point bound: sends one register of
/// `theta_RA` through the channel and packs against
/// `theta_R ⊗ N(theta_A)`.
pub fn ea_bound(
    ch: &KrausChannel,
    theta_ra: &DensityOperator,
    shape: &SubsystemShape,
    m: u64,
) -> Result<BoundReport> {
    if shape.num_factors() != 2 || shape.total_dim() != theta_ra.dim() {
        return Err(Error::ShapeMismatch {
            shape: shape.dims().to_vec(),
            product: shape.total_dim(),
            dim: theta_ra.dim(),
        });
    }
    if shape.dims()[1] != ch.in_dim() {
        return Err(Error::ShapeMismatch {
            shape: shape.dims().to_vec(),
            product: shape.dims()[1],
            dim: ch.in_dim(),
        });
    }
    let (rho_rb_op, out_shape) = apply_kraus_raw(ch, theta_ra.op(), shape, 1)?;
    let rho_rb = DensityOperator::new(rho_rb_op)?;
    let theta_r = DensityOperator::new(partial_trace(theta_ra.op(), shape, &[0])?)?;
    let mut report = packing_bound(&rho_rb, &out_shape, &theta_r, m)?;
    report.protocol = Protocol::Ea;
    Ok(report)
}

/// Source-coding bound with quantum side information:
/// `Tr[rho_XB ∧ (1/M) 1_X ⊗ rho_B]`, blockwise
/// `sum_x Tr[p(x) rho_B^x ∧ (1/M) rho_B]`. The state's prior must have
/// full support (enforced by [`CQState`]).
pub fn cqsw_bound(state: &CQState, m: u64) -> Result<BoundReport> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let rho_b = state.marginal_b();
    let scaled = rho_b.scale(1.0 / m as f64);
    let mut total = 0.0;
    let mut components = BTreeMap::new();
    for x in 0..state.num_blocks() {
        let per_block = nc_min(&state.weighted_block(x), &scaled)?.trace();
        components.insert(format!("block_{x}"), per_block);
        total += per_block;
    }
    let mut report = BoundReport::new(
        Protocol::Cqsw,
        total,
        &[digest_state(state), format!("M={m}")],
    );
    report.components = components;
    report.components.insert("bins".into(), m as f64);
    Ok(report)
}

/// Error-exponent sweep for source coding with quantum side
/// information: `max_alpha (1-alpha)/alpha (R - H_{2-1/alpha}(X|B))`.
pub fn cqsw_exponent(state: &CQState, rate: f64, grid: &GridSpec) -> Result<ExponentReport> {
    // conditional entropy at order 1 for the diagnostic
    let h1 = {
        let lo = cq_conditional_renyi_entropy(state, 0.999)?.value_or_inf();
        let hi = cq_conditional_renyi_entropy(state, 1.001)?.value_or_inf();
        0.5 * (lo + hi)
    };
    let alphas = grid.alphas();
    if alphas.is_empty() {
        return Err(Error::GridEmpty);
    }
    let mut points = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let h = cq_conditional_renyi_entropy(state, 2.0 - 1.0 / alpha)?.value_or_inf();
        let integrand = (1.0 - alpha) / alpha * (rate - h);
        points.push((alpha, integrand));
    }
    let (best_alpha, exponent) = points
        .iter()
        .cloned()
        .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite integrands"))
        .expect("grid is nonempty");
    Ok(ExponentReport {
        rate,
        grid: points,
        best_alpha,
        exponent,
        mutual_information: h1,
    })
}

/// Validates that a composite-alphabet prior factorizes as
/// `p_X ⊗ p_Y` and returns the factors.
pub fn split_product_prior(prior: &[f64], nx: usize, ny: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if prior.len() != nx * ny {
        return Err(Error::NonProductPrior {
            deviation: f64::NAN,
        });
    }
    let px: Vec<f64> = (0..nx)
        .map(|x| (0..ny).map(|y| prior[x * ny + y]).sum())
        .collect();
    let py: Vec<f64> = (0..ny)
        .map(|y| (0..nx).map(|x| prior[x * ny + y]).sum())
        .collect();
    let mut deviation = 0.0f64;
    for x in 0..nx {
        for y in 0..ny {
            deviation = deviation.max((prior[x * ny + y] - px[x] * py[y]).abs());
        }
    }
    if deviation > 1e-12 {
        return Err(Error::NonProductPrior { deviation });
    }
    Ok((px, py))
}

/// One-shot bound for classical-quantum multiple-access coding with a
/// product prior over the composite alphabet (row-major `x * ny + y`):
/// `Tr[rho_XYC ∧ ((M_A-1) rho_X ⊗ rho_YC + (M_B-1) rho_Y ⊗ rho_XC
///   + (M_A-1)(M_B-1) rho_X ⊗ rho_Y ⊗ rho_C)]`, blockwise over `(x,y)`.
pub fn mac_bound(state: &CQState, nx: usize, ny: usize, m_a: u64, m_b: u64) -> Result<BoundReport> {
    if m_a < 1 {
        return Err(Error::BadM(m_a));
    }
    if m_b < 1 {
        return Err(Error::BadM(m_b));
    }
    let (px, py) = split_product_prior(state.prior(), nx, ny)?;
    let dim_c = state.dim_b();
    // conditional C-marginals given one input
    let mut given_y: Vec<HermitianOperator> = vec![HermitianOperator::zeros(dim_c); ny];
    let mut given_x: Vec<HermitianOperator> = vec![HermitianOperator::zeros(dim_c); nx];
    let mut rho_c = HermitianOperator::zeros(dim_c);
    for x in 0..nx {
        for y in 0..ny {
            let block = &state.blocks()[x * ny + y];
            given_y[y] = given_y[y].add(&block.scale(px[x]))?;
            given_x[x] = given_x[x].add(&block.scale(py[y]))?;
            rho_c = rho_c.add(&block.scale(px[x] * py[y]))?;
        }
    }
    let fa = (m_a - 1) as f64;
    let fb = (m_b - 1) as f64;
    let mut total = 0.0;
    let mut components = BTreeMap::new();
    for x in 0..nx {
        for y in 0..ny {
            let block = &state.blocks()[x * ny + y];
            let competitor = given_y[y]
                .scale(fa)
                .add(&given_x[x].scale(fb))?
                .add(&rho_c.scale(fa * fb))?;
            let per_cell = nc_min(block, &competitor)?.trace();
            components.insert(format!("cell_{x}_{y}"), per_cell);
            total += px[x] * py[y] * per_cell;
        }
    }
    let mut report = BoundReport::new(
        Protocol::Mac,
        total,
        &[digest_state(state), format!("Ma={m_a},Mb={m_b}")],
    );
    report.components = components;
    Ok(report)
}

/// Deterministic precoder `(u, v) -> x` (u-major table of x indices).
#[derive(Debug, Clone)]
pub struct Precoder {
    table: Vec<Vec<usize>>,
}

impl Precoder {
    pub fn new(table: Vec<Vec<usize>>, alphabet_len: usize) -> Result<Self> {
        if table.is_empty() || table[0].is_empty() {
            return Err(Error::PartialPrecoder("empty table".into()));
        }
        let cols = table[0].len();
        for (u, row) in table.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::PartialPrecoder(format!(
                    "row {u} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (v, &x) in row.iter().enumerate() {
                if x >= alphabet_len {
                    return Err(Error::PartialPrecoder(format!(
                        "entry ({u},{v}) maps to symbol {x} outside the alphabet"
                    )));
                }
            }
        }
        Ok(Self { table })
    }

    pub fn rows(&self) -> usize {
        self.table.len()
    }

    pub fn cols(&self) -> usize {
        self.table[0].len()
    }

    pub fn map(&self, u: usize, v: usize) -> usize {
        self.table[u][v]
    }
}

/// One-shot bounds for classical-quantum broadcast coding through a
/// deterministic precoder: the receiver-side joint states are
/// `rho_UB` with blocks `p(u) sum_v p(v) Tr_C rho_BC^{x(u,v)}` and the
/// symmetric `rho_VC`, each packed against its decoupled product.
pub fn broadcast_bounds(
    ch: &CQChannel,
    output_shape: &SubsystemShape,
    precoder: &Precoder,
    p_u: &[f64],
    p_v: &[f64],
    m_b: u64,
    m_c: u64,
) -> Result<(BoundReport, BoundReport)> {
    if m_b < 1 {
        return Err(Error::BadM(m_b));
    }
    if m_c < 1 {
        return Err(Error::BadM(m_c));
    }
    if output_shape.num_factors() != 2 || output_shape.total_dim() != ch.dim_b() {
        return Err(Error::ShapeMismatch {
            shape: output_shape.dims().to_vec(),
            product: output_shape.total_dim(),
            dim: ch.dim_b(),
        });
    }
    validate_precoder_priors(precoder, p_u, p_v)?;

    let nu = p_u.len();
    let nv = p_v.len();
    // Bob's blocks: sigma_B^u = sum_v p(v) Tr_C rho^{x(u,v)}
    let mut bob_blocks = Vec::with_capacity(nu);
    for u in 0..nu {
        let mut acc = HermitianOperator::zeros(output_shape.dims()[0]);
        for v in 0..nv {
            let x = precoder.map(u, v);
            let marginal = partial_trace(ch.outputs()[x].op(), output_shape, &[0])?;
            acc = acc.add(&marginal.scale(p_v[v]))?;
        }
        bob_blocks.push(acc);
    }
    // Charlie's blocks: sigma_C^v = sum_u p(u) Tr_B rho^{x(u,v)}
    let mut charlie_blocks = Vec::with_capacity(nv);
    for v in 0..nv {
        let mut acc = HermitianOperator::zeros(output_shape.dims()[1]);
        for u in 0..nu {
            let x = precoder.map(u, v);
            let marginal = partial_trace(ch.outputs()[x].op(), output_shape, &[1])?;
            acc = acc.add(&marginal.scale(p_u[u]))?;
        }
        charlie_blocks.push(acc);
    }
    let bob_state = CQState::new(p_u.to_vec(), bob_blocks)?;
    let charlie_state = CQState::new(p_v.to_vec(), charlie_blocks)?;

    let (bob_bound, bob_components, bob_trivial) = cq_min_trace(&bob_state, m_b)?;
    let (charlie_bound, charlie_components, charlie_trivial) = cq_min_trace(&charlie_state, m_c)?;

    let mut bob_report = BoundReport::new(
        Protocol::Broadcast,
        bob_bound,
        &[digest_state(&bob_state), format!("Mb={m_b}")],
    );
    bob_report.components = bob_components;
    bob_report.trivial = bob_trivial;
    let mut charlie_report = BoundReport::new(
        Protocol::Broadcast,
        charlie_bound,
        &[digest_state(&charlie_state), format!("Mc={m_c}")],
    );
    charlie_report.components = charlie_components;
    charlie_report.trivial = charlie_trivial;
    Ok((bob_report, charlie_report))
}

fn validate_precoder_priors(precoder: &Precoder, p_u: &[f64], p_v: &[f64]) -> Result<()> {
    if precoder.rows() != p_u.len() || precoder.cols() != p_v.len() {
        return Err(Error::PartialPrecoder(format!(
            "table is {}x{} but priors are {}x{}",
            precoder.rows(),
            precoder.cols(),
            p_u.len(),
            p_v.len()
        )));
    }
    check_prior(p_u)?;
    check_prior(p_v)
}

fn check_prior(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::BadProbability("entries must be nonnegative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadProbability(format!("sums to {total}")));
    }
    Ok(())
}

/// Builds the precoded joint state for coding with causal state
/// information: blocks `sigma_B^u = sum_s p(s) rho_B^{x(u,s), s}` under
/// the precoding prior `p_U`. The channel's composite alphabet is
/// indexed row-major as `x * ns + s`.
pub fn state_info_joint(
    ch: &CQChannel,
    ns: usize,
    p_s: &[f64],
    precoder: &Precoder,
    p_u: &[f64],
) -> Result<CQState> {
    if ns == 0 || ch.alphabet_len() % ns != 0 {
        return Err(Error::ParseError(format!(
            "alphabet of {} symbols does not factor into |X| x {ns}",
            ch.alphabet_len()
        )));
    }
    let nx = ch.alphabet_len() / ns;
    if p_s.len() != ns {
        return Err(Error::BadProbability(format!(
            "state prior has {} entries, expected {ns}",
            p_s.len()
        )));
    }
    check_prior(p_s)?;
    check_prior(p_u)?;
    if precoder.rows() != p_u.len() || precoder.cols() != ns {
        return Err(Error::PartialPrecoder(format!(
            "table is {}x{} but needs {}x{ns}",
            precoder.rows(),
            precoder.cols(),
            p_u.len()
        )));
    }
    let mut blocks = Vec::with_capacity(p_u.len());
    for u in 0..p_u.len() {
        let mut acc = HermitianOperator::zeros(ch.dim_b());
        for s in 0..ns {
            let x = precoder.map(u, s);
            if x >= nx {
                return Err(Error::PartialPrecoder(format!(
                    "precoder maps ({u},{s}) to x={x} outside |X|={nx}"
                )));
            }
            acc = acc.add(&ch.outputs()[x * ns + s].op().scale(p_s[s]))?;
        }
        blocks.push(acc);
    }
    CQState::new(p_u.to_vec(), blocks)
}

/// One-shot bound for classical-quantum coding with causal state
/// information at the encoder: the plain channel-coding bound of the
/// induced precoded channel `u -> sum_s p(s) rho_B^{x(u,s), s}`.
pub fn state_info_bound(
    ch: &CQChannel,
    ns: usize,
    p_s: &[f64],
    precoder: &Precoder,
    p_u: &[f64],
    m: u64,
) -> Result<BoundReport> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    let state = state_info_joint(ch, ns, p_s, precoder, p_u)?;
    let (bound, components, trivial) = cq_min_trace(&state, m)?;
    let mut report = BoundReport::new(
        Protocol::StateInfo,
        bound,
        &[digest_state(&state), format!("M={m}")],
    );
    report.components = components;
    report.trivial = trivial;
    Ok(report)
}

const EA_MARGINAL_TOL: f64 = 1e-8;

/// One-shot bound for entanglement-assisted coding over a quantum
/// multiple-access channel `N_{AB->C}` with product resources
/// `theta_{R_A A} ⊗ theta_{R_B B}`:
/// `Tr[rho ∧ ((M_A-1) rho_{R_A} ⊗ rho_{R_B C} + (M_B-1) rho_{R_B} ⊗
/// rho_{R_A C} + (M_A-1)(M_B-1) rho_{R_A} ⊗ rho_{R_B} ⊗ rho_C)]`.
pub fn ea_mac_bound(
    ch: &KrausChannel,
    theta_a: &DensityOperator,
    shape_a: &SubsystemShape,
    theta_b: &DensityOperator,
    shape_b: &SubsystemShape,
    m_a: u64,
    m_b: u64,
) -> Result<BoundReport> {
    if m_a < 1 {
        return Err(Error::BadM(m_a));
    }
    if m_b < 1 {
        return Err(Error::BadM(m_b));
    }
    let (r_a, d_a) = two_factor(shape_a, theta_a.dim())?;
    let (r_b, d_b) = two_factor(shape_b, theta_b.dim())?;
    if d_a * d_b != ch.in_dim() {
        return Err(Error::DimMismatch {
            left: d_a * d_b,
            right: ch.in_dim(),
        });
    }
    // order (R_A, A, R_B, B) -> (R_A, R_B, A, B), then fuse A,B
    let joint = tensor_product(theta_a.op(), theta_b.op());
    let shape4 = SubsystemShape::new(&[r_a, d_a, r_b, d_b])?;
    let (reordered, _) = permute_factors(&joint, &shape4, &[0, 2, 1, 3])?;
    let fused = SubsystemShape::new(&[r_a, r_b, d_a * d_b])?;
    let (rho, out_shape) = apply_kraus_raw(ch, &reordered, &fused, 2)?;
    let d_c = ch.out_dim();

    let rho_ra = partial_trace(&rho, &out_shape, &[0])?;
    let rho_rb = partial_trace(&rho, &out_shape, &[1])?;
    let rho_c = partial_trace(&rho, &out_shape, &[2])?;
    let rho_rbc = partial_trace(&rho, &out_shape, &[1, 2])?;
    let rho_rac = partial_trace(&rho, &out_shape, &[0, 2])?;

    let fa = (m_a - 1) as f64;
    let fb = (m_b - 1) as f64;
    let term_a = tensor_product(&rho_ra, &rho_rbc).scale(fa);
    // rho_{R_B} ⊗ rho_{R_A C} naturally orders as (R_B, R_A, C); swap to
    // (R_A, R_B, C).
    let rb_rac = tensor_product(&rho_rb, &rho_rac);
    let shape_swap = SubsystemShape::new(&[r_b, r_a, d_c])?;
    let (term_b_unscaled, _) = permute_factors(&rb_rac, &shape_swap, &[1, 0, 2])?;
    let term_b = term_b_unscaled.scale(fb);
    let term_ab = tensor_product(&tensor_product(&rho_ra, &rho_rb), &rho_c).scale(fa * fb);
    let competitor = term_a.add(&term_b)?.add(&term_ab)?;
    let bound = nc_min(&rho, &competitor)?.trace();
    let mut report = BoundReport::new(
        Protocol::EaMac,
        bound,
        &[
            digest_operator(theta_a.op()),
            digest_operator(theta_b.op()),
            format!("Ma={m_a},Mb={m_b}"),
        ],
    );
    report.components.insert("output_trace".into(), rho.trace());
    Ok(report)
}

fn two_factor(shape: &SubsystemShape, dim: usize) -> Result<(usize, usize)> {
    if shape.num_factors() != 2 || shape.total_dim() != dim {
        return Err(Error::ShapeMismatch {
            shape: shape.dims().to_vec(),
            product: shape.total_dim(),
            dim,
        });
    }
    Ok((shape.dims()[0], shape.dims()[1]))
}

/// One-shot bounds for entanglement-assisted coding over a quantum
/// broadcast channel `N_{A->BC}` with a resource `theta_{R_B R_C A}`
/// whose reference marginal factorizes as
/// `theta_{R_B} ⊗ theta_{R_C}` (validated within 1e-8 Frobenius).
pub fn ea_broadcast_bounds(
    ch: &KrausChannel,
    output_shape: &SubsystemShape,
    theta: &DensityOperator,
    theta_shape: &SubsystemShape,
    m_b: u64,
    m_c: u64,
) -> Result<(BoundReport, BoundReport)> {
    if m_b < 1 {
        return Err(Error::BadM(m_b));
    }
    if m_c < 1 {
        return Err(Error::BadM(m_c));
    }
    if theta_shape.num_factors() != 3 || theta_shape.total_dim() != theta.dim() {
        return Err(Error::ShapeMismatch {
            shape: theta_shape.dims().to_vec(),
            product: theta_shape.total_dim(),
            dim: theta.dim(),
        });
    }
    let (d_out_b, d_out_c) = two_factor(output_shape, ch.out_dim())?;
    let dims = theta_shape.dims();
    if dims[2] != ch.in_dim() {
        return Err(Error::DimMismatch {
            left: dims[2],
            right: ch.in_dim(),
        });
    }
    // marginal constraint theta_{R_B R_C} = theta_{R_B} ⊗ theta_{R_C}
    let theta_rbrc = partial_trace(theta.op(), theta_shape, &[0, 1])?;
    let theta_rb = partial_trace(theta.op(), theta_shape, &[0])?;
    let theta_rc = partial_trace(theta.op(), theta_shape, &[1])?;
    let deviation = theta_rbrc.frobenius_distance(&tensor_product(&theta_rb, &theta_rc));
    if deviation > EA_MARGINAL_TOL {
        return Err(Error::MarginalConstraintViolated { deviation });
    }

    let (rho, _) = apply_kraus_raw(ch, theta.op(), theta_shape, 2)?;
    // factors now (R_B, R_C, BC); expose B and C separately
    let full_shape = SubsystemShape::new(&[dims[0], dims[1], d_out_b, d_out_c])?;

    let rho_rb_b = partial_trace(&rho, &full_shape, &[0, 2])?;
    let rho_b = partial_trace(&rho, &full_shape, &[2])?;
    let bob_competitor = tensor_product(&theta_rb, &rho_b).scale((m_b - 1) as f64);
    let bob_bound = nc_min(&rho_rb_b, &bob_competitor)?.trace();

    let rho_rc_c = partial_trace(&rho, &full_shape, &[1, 3])?;
    let rho_c = partial_trace(&rho, &full_shape, &[3])?;
    let charlie_competitor = tensor_product(&theta_rc, &rho_c).scale((m_c - 1) as f64);
    let charlie_bound = nc_min(&rho_rc_c, &charlie_competitor)?.trace();

    let mut bob_report = BoundReport::new(
        Protocol::EaBroadcast,
        bob_bound,
        &[digest_operator(theta.op()), format!("Mb={m_b}")],
    );
    bob_report
        .components
        .insert("marginal_deviation".into(), deviation);
    let mut charlie_report = BoundReport::new(
        Protocol::EaBroadcast,
        charlie_bound,
        &[digest_operator(theta.op()), format!("Mc={m_c}")],
    );
    charlie_report
        .components
        .insert("marginal_deviation".into(), deviation);
    Ok((bob_report, charlie_report))
}

/// One-shot bound for entanglement-assisted coding with causal state
/// information: resource `theta_{R A S}` with `theta_{R S} = theta_R ⊗
/// vartheta_S` (validated within 1e-8), channel `N_{AS->B}`:
/// `Tr[rho_RB ∧ (M-1) rho_R ⊗ rho_B]`.
pub fn ea_state_info_bound(
    ch: &KrausChannel,
    theta: &DensityOperator,
    theta_shape: &SubsystemShape,
    vartheta_s: &DensityOperator,
    m: u64,
) -> Result<BoundReport> {
    if m < 1 {
        return Err(Error::BadM(m));
    }
    if theta_shape.num_factors() != 3 || theta_shape.total_dim() != theta.dim() {
        return Err(Error::ShapeMismatch {
            shape: theta_shape.dims().to_vec(),
            product: theta_shape.total_dim(),
            dim: theta.dim(),
        });
    }
    let dims = theta_shape.dims();
    if dims[1] * dims[2] != ch.in_dim() {
        return Err(Error::DimMismatch {
            left: dims[1] * dims[2],
            right: ch.in_dim(),
        });
    }
    if vartheta_s.dim() != dims[2] {
        return Err(Error::DimMismatch {
            left: vartheta_s.dim(),
            right: dims[2],
        });
    }
    let theta_rs = partial_trace(theta.op(), theta_shape, &[0, 2])?;
    let theta_r = partial_trace(theta.op(), theta_shape, &[0])?;
    let deviation =
        theta_rs.frobenius_distance(&tensor_product(&theta_r, vartheta_s.op()));
    if deviation > EA_MARGINAL_TOL {
        return Err(Error::MarginalConstraintViolated { deviation });
    }
    // fuse (A,S) and apply the channel
    let fused = SubsystemShape::new(&[dims[0], dims[1] * dims[2]])?;
    let (rho_rb, out_shape) = apply_kraus_raw(ch, theta.op(), &fused, 1)?;
    let rho_rb = DensityOperator::new(rho_rb)?;
    let theta_r = DensityOperator::new(theta_r)?;
    let mut report = packing_bound(&rho_rb, &out_shape, &theta_r, m)?;
    report.protocol = Protocol::EaStateInfo;
    report
        .components
        .insert("marginal_deviation".into(), deviation);
    Ok(report)
}
