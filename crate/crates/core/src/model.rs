//! Validated model types and their canonical JSON file format.
//!
//! Three kinds of model files are accepted:
//!
//! ```json
//! { "kind": "cq-channel", "dimB": 2, "inputs": [
//!     { "symbol": "0", "prior": 0.5, "state": [[[1.0,0.0],[0.0,0.0]],
//!                                              [[0.0,0.0],[0.0,0.0]]] } ] }
//! { "kind": "density", "matrix": [[[re,im], ...], ...] }
//! { "kind": "kraus-channel", "in_dim": 2, "out_dim": 2, "kraus": [matrix, ...] }
//! ```
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major
//! nested arrays. Parsing is bit-exact on the text; validation is
//! tolerance-based on the numbers and reports the offending entry path
//! together with the measured deviation.
//!
//! Composite alphabets (multiple-access inputs, state-information
//! pairs) are flattened to product labels `"x|y"`; one block-diagonal
//! [`CQState`] then serves every protocol. The basis chosen for the
//! classical register never matters: only blockwise traces enter any
//! computed quantity.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    partial_trace, tensor_all, HermitianOperator, SubsystemShape, PSD_CLIP_TOL,
};

/// Trace tolerance for density operators.
pub const DENSITY_TRACE_TOL: f64 = 1e-9;
/// Prior normalization tolerance.
pub const PRIOR_SUM_TOL: f64 = 1e-12;
/// Kraus completeness tolerance (Frobenius).
pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-9;

/// A Hermitian operator with unit trace and nonnegative spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
            return Err(Error::ValidationError {
                path: "matrix".into(),
                check: "unit trace".into(),
                deviation: (trace - 1.0).abs(),
            });
        }
        let min = op.min_eigenvalue()?;
        if min < -PSD_CLIP_TOL {
            return Err(Error::NotPSD {
                min_eigenvalue: min,
            });
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Projector onto the support.
    pub fn support_projector(&self) -> Result<HermitianOperator> {
        self.op.support_projector(None)
    }
}

/// Classical-quantum channel: a finite input alphabet, an input prior,
/// and one density operator per symbol (all on a common output space).
#[derive(Debug, Clone)]
pub struct CQChannel {
    symbols: Vec<String>,
    prior: Vec<f64>,
    outputs: Vec<DensityOperator>,
}

impl CQChannel {
    pub fn new(symbols: Vec<String>, prior: Vec<f64>, outputs: Vec<DensityOperator>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != prior.len() || symbols.len() != outputs.len() {
            return Err(Error::ParseError(format!(
                "channel needs matching nonempty symbol/prior/output lists ({}/{}/{})",
                symbols.len(),
                prior.len(),
                outputs.len()
            )));
        }
        validate_prior(&prior, PRIOR_SUM_TOL, "inputs")?;
        let dim_b = outputs[0].dim();
        for (i, out) in outputs.iter().enumerate() {
            if out.dim() != dim_b {
                return Err(Error::ValidationError {
                    path: format!("inputs[{i}].state"),
                    check: format!("output dimension {} != dimB {}", out.dim(), dim_b),
                    deviation: (out.dim() as f64 - dim_b as f64).abs(),
                });
            }
        }
        Ok(Self {
            symbols,
            prior,
            outputs,
        })
    }

    pub fn alphabet_len(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    pub fn dim_b(&self) -> usize {
        self.outputs[0].dim()
    }

    /// Average output state `rho_B = sum_x p(x) rho_B^x`.
    pub fn average_output(&self) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.dim_b());
        for (p, out) in self.prior.iter().zip(&self.outputs) {
            acc = acc.add(&out.op().scale(*p)).expect("same dim");
        }
        acc
    }

    /// Channel-coding semantics: zero-mass symbols never appear in a
    /// codebook, so they are silently dropped.
    pub fn drop_zero_mass(&self) -> CQChannel {
        let keep: Vec<usize> = (0..self.symbols.len())
            .filter(|&i| self.prior[i] > 0.0)
            .collect();
        if keep.len() == self.symbols.len() {
            return self.clone();
        }
        CQChannel {
            symbols: keep.iter().map(|&i| self.symbols[i].clone()).collect(),
            prior: keep.iter().map(|&i| self.prior[i]).collect(),
            outputs: keep.iter().map(|&i| self.outputs[i].clone()).collect(),
        }
    }

    /// Splits a composite alphabet with labels `"x|y"` into its factor
    /// label lists, validating complete row-major product ordering
    /// (index = x * |Y| + y).
    pub fn composite_split(&self) -> Result<(Vec<String>, Vec<String>)> {
        let pairs: Vec<(String, String)> = self
            .symbols
            .iter()
            .map(|s| {
                s.split_once('|')
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .ok_or_else(|| {
                        Error::ParseError(format!(
                            "composite symbol {s:?} is not of the form \"x|y\""
                        ))
                    })
            })
            .collect::<Result<_>>()?;
        let mut xs: Vec<String> = Vec::new();
        let mut ys: Vec<String> = Vec::new();
        for (x, y) in &pairs {
            if !xs.contains(x) {
                xs.push(x.clone());
            }
            if !ys.contains(y) {
                ys.push(y.clone());
            }
        }
        if xs.len() * ys.len() != pairs.len() {
            return Err(Error::ParseError(format!(
                "composite alphabet is not a complete product: {} x {} != {}",
                xs.len(),
                ys.len(),
                pairs.len()
            )));
        }
        for (i, (x, y)) in pairs.iter().enumerate() {
            let expect = (&xs[i / ys.len()], &ys[i % ys.len()]);
            if (x, y) != expect {
                return Err(Error::ParseError(format!(
                    "composite symbol order must be row-major; index {i} is \"{x}|{y}\", expected \"{}|{}\"",
                    expect.0, expect.1
                )));
            }
        }
        Ok((xs, ys))
    }
}

/// Block-diagonal classical-quantum state
/// `rho_XB = sum_x p(x) |x><x| ⊗ block_x`.
///
/// Blocks are the conditional operators `rho_B^x`; weights stay in the
/// prior. The prior must have full support (source-coding protocols
/// require it; channel-coding paths drop zero-mass symbols before
/// building the joint state).
#[derive(Debug, Clone)]
pub struct CQState {
    prior: Vec<f64>,
    blocks: Vec<HermitianOperator>,
}

impl CQState {
    pub fn new(prior: Vec<f64>, blocks: Vec<HermitianOperator>) -> Result<Self> {
        if prior.is_empty() || prior.len() != blocks.len() {
            return Err(Error::ParseError(format!(
                "cq state needs matching nonempty prior/block lists ({}/{})",
                prior.len(),
                blocks.len()
            )));
        }
        validate_prior(&prior, PRIOR_SUM_TOL, "prior")?;
        if let Some(i) = prior.iter().position(|&p| p <= 0.0) {
            return Err(Error::ValidationError {
                path: format!("prior[{i}]"),
                check: "full support required".into(),
                deviation: prior[i].abs(),
            });
        }
        let dim = blocks[0].dim();
        for (i, b) in blocks.iter().enumerate() {
            if b.dim() != dim {
                return Err(Error::ValidationError {
                    path: format!("blocks[{i}]"),
                    check: format!("block dimension {} != {}", b.dim(), dim),
                    deviation: (b.dim() as f64 - dim as f64).abs(),
                });
            }
        }
        Ok(Self { prior, blocks })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn blocks(&self) -> &[HermitianOperator] {
        &self.blocks
    }

    pub fn dim_b(&self) -> usize {
        self.blocks[0].dim()
    }

    /// `p(x) · block_x`.
    pub fn weighted_block(&self, x: usize) -> HermitianOperator {
        self.blocks[x].scale(self.prior[x])
    }

    /// Marginal on the quantum side, `rho_B = sum_x p(x) block_x`.
    pub fn marginal_b(&self) -> HermitianOperator {
        let mut acc = HermitianOperator::zeros(self.dim_b());
        for x in 0..self.num_blocks() {
            acc = acc.add(&self.weighted_block(x)).expect("same dim");
        }
        acc
    }

    /// Materializes the full block-diagonal matrix of `rho_XB`.
    pub fn dense_joint(&self) -> HermitianOperator {
        let weighted: Vec<HermitianOperator> =
            (0..self.num_blocks()).map(|x| self.weighted_block(x)).collect();
        let refs: Vec<&HermitianOperator> = weighted.iter().collect();
        crate::operator::direct_sum_all(&refs)
    }

    /// Materializes `rho_X ⊗ rho_B` in the same basis as
    /// [`Self::dense_joint`].
    pub fn dense_product_marginal(&self) -> HermitianOperator {
        let rho_b = self.marginal_b();
        let scaled: Vec<HermitianOperator> =
            self.prior.iter().map(|&p| rho_b.scale(p)).collect();
        let refs: Vec<&HermitianOperator> = scaled.iter().collect();
        crate::operator::direct_sum_all(&refs)
    }
}

/// Builds the joint state of a channel under its prior. Zero-mass
/// symbols are dropped (channel-coding semantics).
pub fn build_cq_joint(ch: &CQChannel) -> CQState {
    let ch = ch.drop_zero_mass();
    CQState::new(
        ch.prior.clone(),
        ch.outputs.iter().map(|d| d.op().clone()).collect(),
    )
    .expect("validated channel yields a valid cq state")
}

/// A quantum channel in Kraus representation, `N(rho) = sum_k K rho K'`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<DMatrix<Complex64>>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 || kraus.is_empty() {
            return Err(Error::ParseError(
                "kraus channel needs positive dimensions and at least one operator".into(),
            ));
        }
        for (k, op) in kraus.iter().enumerate() {
            if op.nrows() != out_dim || op.ncols() != in_dim {
                return Err(Error::ValidationError {
                    path: format!("kraus[{k}]"),
                    check: format!(
                        "operator is {}x{}, expected {out_dim}x{in_dim}",
                        op.nrows(),
                        op.ncols()
                    ),
                    deviation: 0.0,
                });
            }
        }
        let mut completeness = DMatrix::<Complex64>::zeros(in_dim, in_dim);
        for op in &kraus {
            completeness += op.adjoint() * op;
        }
        let deviation = (completeness - DMatrix::<Complex64>::identity(in_dim, in_dim)).norm();
        if deviation > KRAUS_COMPLETENESS_TOL {
            return Err(Error::CompletenessViolation { deviation });
        }
        Ok(Self {
            in_dim,
            out_dim,
            kraus,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }

    /// Identity channel.
    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            kraus: vec![DMatrix::identity(dim, dim)],
        }
    }

    /// Applies the channel to the whole operator (single-factor case).
    pub fn apply(&self, h: &HermitianOperator) -> Result<HermitianOperator> {
        if h.dim() != self.in_dim {
            return Err(Error::DimMismatch {
                left: h.dim(),
                right: self.in_dim,
            });
        }
        let mut out = DMatrix::<Complex64>::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * h.matrix() * k.adjoint();
        }
        Ok(HermitianOperator::symmetrized(out))
    }
}

/// Applies `(id ⊗ N ⊗ id)` on the declared factor of a multipartite
/// density operator. Returns the output state and the updated shape
/// (the acted factor's dimension becomes `out_dim`).
pub fn apply_kraus(
    ch: &KrausChannel,
    rho: &DensityOperator,
    shape: &SubsystemShape,
    acting_factor: usize,
) -> Result<(DensityOperator, SubsystemShape)> {
    let (out, new_shape) = apply_kraus_raw(ch, rho.op(), shape, acting_factor)?;
    Ok((DensityOperator::new(out)?, new_shape))
}

/// Same as [`apply_kraus`] but on a bare Hermitian operator (used for
/// non-normalized intermediates).
pub fn apply_kraus_raw(
    ch: &KrausChannel,
    rho: &HermitianOperator,
    shape: &SubsystemShape,
    acting_factor: usize,
) -> Result<(HermitianOperator, SubsystemShape)> {
    let dims = shape.dims();
    if shape.total_dim() != rho.dim() {
        return Err(Error::ShapeMismatch {
            shape: dims.to_vec(),
            product: shape.total_dim(),
            dim: rho.dim(),
        });
    }
    if acting_factor >= dims.len() {
        return Err(Error::FactorOutOfRange {
            index: acting_factor,
            factors: dims.len(),
        });
    }
    if dims[acting_factor] != ch.in_dim() {
        return Err(Error::ShapeMismatch {
            shape: dims.to_vec(),
            product: dims[acting_factor],
            dim: ch.in_dim(),
        });
    }
    let before: usize = dims[..acting_factor].iter().product();
    let after: usize = dims[acting_factor + 1..].iter().product();
    let eye_before = DMatrix::<Complex64>::identity(before, before);
    let eye_after = DMatrix::<Complex64>::identity(after, after);

    let out_total = before * ch.out_dim() * after;
    let mut out = DMatrix::<Complex64>::zeros(out_total, out_total);
    for k in ch.kraus() {
        let lifted = eye_before.kronecker(&k.kronecker(&eye_after));
        out += &lifted * rho.matrix() * lifted.adjoint();
    }
    let mut new_dims = dims.to_vec();
    new_dims[acting_factor] = ch.out_dim();
    Ok((
        HermitianOperator::symmetrized(out),
        SubsystemShape::new(&new_dims)?,
    ))
}

fn validate_prior(prior: &[f64], tol: f64, path: &str) -> Result<()> {
    for (i, &p) in prior.iter().enumerate() {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::ValidationError {
                path: format!("{path}[{i}].prior"),
                check: "prior entry must be a finite nonnegative number".into(),
                deviation: p,
            });
        }
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::ValidationError {
            path: format!("{path}[*].prior"),
            check: "prior sums to 1".into(),
            deviation: (total - 1.0).abs(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Canonical file format
// ---------------------------------------------------------------------

type RawComplex = [f64; 2];
type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum RawModel {
    #[serde(rename = "cq-channel")]
    CQChannel {
        #[serde(rename = "dimB")]
        dim_b: usize,
        inputs: Vec<RawInput>,
    },
    #[serde(rename = "density")]
    Density { matrix: RawMatrix },
    #[serde(rename = "kraus-channel")]
    KrausChannel {
        in_dim: usize,
        out_dim: usize,
        kraus: Vec<RawMatrix>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct RawInput {
    symbol: String,
    prior: f64,
    state: RawMatrix,
}

/// A parsed and validated model file.
#[derive(Debug, Clone)]
pub enum Model {
    CQChannel(CQChannel),
    Density(DensityOperator),
    Kraus(KrausChannel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::CQChannel(_) => "cq-channel",
            Model::Density(_) => "density",
            Model::Kraus(_) => "kraus-channel",
        }
    }
}

fn matrix_from_raw(raw: &RawMatrix, rows: usize, cols: usize, path: &str) -> Result<DMatrix<Complex64>> {
    if raw.len() != rows {
        return Err(Error::ValidationError {
            path: path.into(),
            check: format!("expected {rows} rows, found {}", raw.len()),
            deviation: raw.len() as f64 - rows as f64,
        });
    }
    let mut mat = DMatrix::zeros(rows, cols);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::ValidationError {
                path: format!("{path}[{i}]"),
                check: format!("expected {cols} columns, found {}", row.len()),
                deviation: row.len() as f64 - cols as f64,
            });
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::ValidationError {
                    path: format!("{path}[{i}][{j}]"),
                    check: "entries must be finite".into(),
                    deviation: f64::NAN,
                });
            }
            mat[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(mat)
}

fn hermitian_from_raw(raw: &RawMatrix, dim: usize, path: &str) -> Result<HermitianOperator> {
    let mat = matrix_from_raw(raw, dim, dim, path)?;
    HermitianOperator::new(mat).map_err(|e| match e {
        Error::NonHermitian {
            deviation,
            row,
            col,
            ..
        } => Error::ValidationError {
            path: format!("{path}[{row}][{col}]"),
            check: "hermiticity".into(),
            deviation,
        },
        other => other,
    })
}

/// Parses a canonical model file.
pub fn parse_model(contents: &str) -> Result<Model> {
    let raw: RawModel =
        serde_json::from_str(contents).map_err(|e| Error::ParseError(e.to_string()))?;
    match raw {
        RawModel::CQChannel { dim_b, inputs } => {
            if inputs.is_empty() {
                return Err(Error::ParseError("cq-channel needs at least one input".into()));
            }
            let mut symbols = Vec::with_capacity(inputs.len());
            let mut prior = Vec::with_capacity(inputs.len());
            let mut outputs = Vec::with_capacity(inputs.len());
            for (i, input) in inputs.iter().enumerate() {
                let path = format!("inputs[{i}].state");
                let op = hermitian_from_raw(&input.state, dim_b, &path)?;
                let density = DensityOperator::new(op).map_err(|e| match e {
                    Error::ValidationError {
                        check, deviation, ..
                    } => Error::ValidationError {
                        path: path.clone(),
                        check,
                        deviation,
                    },
                    Error::NotPSD { min_eigenvalue } => Error::ValidationError {
                        path: path.clone(),
                        check: "positive semi-definite".into(),
                        deviation: min_eigenvalue.abs(),
                    },
                    other => other,
                })?;
                symbols.push(input.symbol.clone());
                prior.push(input.prior);
                outputs.push(density);
            }
            Ok(Model::CQChannel(CQChannel::new(symbols, prior, outputs)?))
        }
        RawModel::Density { matrix } => {
            let dim = matrix.len();
            let op = hermitian_from_raw(&matrix, dim, "matrix")?;
            Ok(Model::Density(DensityOperator::new(op)?))
        }
        RawModel::KrausChannel {
            in_dim,
            out_dim,
            kraus,
        } => {
            let ops: Vec<DMatrix<Complex64>> = kraus
                .iter()
                .enumerate()
                .map(|(k, m)| matrix_from_raw(m, out_dim, in_dim, &format!("kraus[{k}]")))
                .collect::<Result<_>>()?;
            Ok(Model::Kraus(KrausChannel::new(in_dim, out_dim, ops)?))
        }
    }
}

fn matrix_to_raw(mat: &DMatrix<Complex64>) -> RawMatrix {
    (0..mat.nrows())
        .map(|i| (0..mat.ncols()).map(|j| [mat[(i, j)].re, mat[(i, j)].im]).collect())
        .collect()
}

/// Serializes a model back to its canonical file format.
pub fn serialize_model(model: &Model) -> String {
    let raw = match model {
        Model::CQChannel(ch) => RawModel::CQChannel {
            dim_b: ch.dim_b(),
            inputs: (0..ch.alphabet_len())
                .map(|i| RawInput {
                    symbol: ch.symbols()[i].clone(),
                    prior: ch.prior()[i],
                    state: matrix_to_raw(ch.outputs()[i].matrix()),
                })
                .collect(),
        },
        Model::Density(d) => RawModel::Density {
            matrix: matrix_to_raw(d.matrix()),
        },
        Model::Kraus(k) => RawModel::KrausChannel {
            in_dim: k.in_dim(),
            out_dim: k.out_dim(),
            kraus: k.kraus().iter().map(matrix_to_raw).collect(),
        },
    };
    serde_json::to_string_pretty(&raw).expect("model serialization cannot fail")
}

/// Channel output states tensored into a multipartite register, used by
/// the position-based coding simulations: places `correlated` at slot
/// `slot` of `count` copies of `filler`, with the extra factor of
/// `correlated` moved to the end.
pub fn position_state(
    correlated: &HermitianOperator,
    correlated_shape: &SubsystemShape,
    filler: &HermitianOperator,
    count: usize,
    slot: usize,
) -> Result<HermitianOperator> {
    debug_assert_eq!(correlated_shape.num_factors(), 2);
    let mut factors: Vec<&HermitianOperator> = Vec::with_capacity(count);
    for m in 0..count {
        if m == slot {
            factors.push(correlated);
        } else {
            factors.push(filler);
        }
    }
    let joint = tensor_all(&factors);
    // Factor list: slot i has dims (r) except `slot` which is (r, b).
    let mut dims: Vec<usize> = Vec::with_capacity(count + 1);
    let (d_r, d_b) = (correlated_shape.dims()[0], correlated_shape.dims()[1]);
    for m in 0..count {
        dims.push(d_r);
        if m == slot {
            dims.push(d_b);
        }
    }
    let shape = SubsystemShape::new(&dims)?;
    // Move the B factor (currently at position slot+1) to the end.
    let mut perm: Vec<usize> = (0..count + 1).filter(|&i| i != slot + 1).collect();
    perm.push(slot + 1);
    let (out, _) = crate::operator::permute_factors(&joint, &shape, &perm)?;
    let _ = d_b;
    Ok(out)
}

/// Marginal of a multipartite operator onto one factor.
pub fn factor_marginal(
    h: &HermitianOperator,
    shape: &SubsystemShape,
    factor: usize,
) -> Result<HermitianOperator> {
    partial_trace(h, shape, &[factor])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, rng};
    use approx::assert_abs_diff_eq;

    fn qubit_channel_json() -> &'static str {
        r#"{
            "kind": "cq-channel",
            "dimB": 2,
            "inputs": [
                { "symbol": "0", "prior": 0.5,
                  "state": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]] },
                { "symbol": "1", "prior": 0.5,
                  "state": [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]] }
            ]
        }"#
    }

    #[test]
    fn parses_two_symbol_channel() {
        let model = parse_model(qubit_channel_json()).unwrap();
        match model {
            Model::CQChannel(ch) => {
                assert_eq!(ch.alphabet_len(), 2);
                assert_eq!(ch.dim_b(), 2);
            }
            other => panic!("expected cq-channel, got {}", other.kind()),
        }
    }

    #[test]
    fn rejects_prior_sum_deviation() {
        let text = qubit_channel_json().replace("\"prior\": 0.5,", "\"prior\": 0.48,");
        // only replaces both occurrences identically: sum = 0.96
        match parse_model(&text) {
            Err(Error::ValidationError {
                check, deviation, ..
            }) => {
                assert!(check.contains("sums to 1"));
                assert_abs_diff_eq!(deviation, 0.04, epsilon = 1e-12);
            }
            other => panic!("expected prior validation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_hermitian_entry_with_path() {
        let text = r#"{
            "kind": "density",
            "matrix": [[[0.5,0.0],[0.001,0.0]],[[0.0,0.0],[0.5,0.0]]]
        }"#;
        match parse_model(text) {
            Err(Error::ValidationError {
                path,
                check,
                deviation,
            }) => {
                assert_eq!(path, "matrix[0][1]");
                assert_eq!(check, "hermiticity");
                assert_abs_diff_eq!(deviation, 1e-3, epsilon = 1e-12);
            }
            other => panic!("expected hermiticity error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_reparses_to_same_matrices() {
        let mut r = rng(21);
        for _ in 0..5 {
            let d = random_density(3, &mut r);
            let model = Model::Density(d.clone());
            let text = serialize_model(&model);
            match parse_model(&text).unwrap() {
                Model::Density(back) => {
                    let dev = back
                        .matrix()
                        .iter()
                        .zip(d.matrix().iter())
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0f64, f64::max);
                    assert!(dev <= 1e-12, "round trip deviation {dev}");
                }
                _ => panic!("wrong kind"),
            }
        }
    }

    #[test]
    fn joint_state_marginals() {
        let model = parse_model(qubit_channel_json()).unwrap();
        let ch = match model {
            Model::CQChannel(ch) => ch,
            _ => unreachable!(),
        };
        let joint = build_cq_joint(&ch);
        // Noiseless binary channel: weighted blocks diag(0.5,0)|0, diag(0,0.5)|1.
        assert_abs_diff_eq!(joint.weighted_block(0).matrix()[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(joint.weighted_block(1).matrix()[(1, 1)].re, 0.5, epsilon = 1e-12);
        // Blockwise traces reproduce the prior exactly.
        for x in 0..2 {
            assert_abs_diff_eq!(joint.weighted_block(x).trace(), 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(joint.marginal_b().trace(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn single_symbol_joint_is_the_output() {
        let mut r = rng(22);
        let rho = random_density(2, &mut r);
        let ch = CQChannel::new(vec!["a".into()], vec![1.0], vec![rho.clone()]).unwrap();
        let joint = build_cq_joint(&ch);
        assert_eq!(joint.num_blocks(), 1);
        assert!(joint.marginal_b().frobenius_distance(rho.op()) <= 1e-12);
    }

    #[test]
    fn identity_kraus_channel_preserves_state() {
        let mut r = rng(23);
        let rho = random_density(2, &mut r);
        let ch = KrausChannel::identity(2);
        let out = ch.apply(rho.op()).unwrap();
        assert!(out.frobenius_distance(rho.op()) <= 1e-12);
    }

    #[test]
    fn depolarizing_channel_fixed_point() {
        // Kraus family {I, X, Y, Z}/2 sends every qubit state to I/2.
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let half = 0.5;
        let kraus = vec![
            DMatrix::from_row_slice(2, 2, &[c(half, 0.), c(0., 0.), c(0., 0.), c(half, 0.)]),
            DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(half, 0.), c(half, 0.), c(0., 0.)]),
            DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -half), c(0., half), c(0., 0.)]),
            DMatrix::from_row_slice(2, 2, &[c(half, 0.), c(0., 0.), c(0., 0.), c(-half, 0.)]),
        ];
        let ch = KrausChannel::new(2, 2, kraus).unwrap();
        let mut r = rng(24);
        let rho = random_density(2, &mut r);
        let out = ch.apply(rho.op()).unwrap();
        let max_mixed = HermitianOperator::identity(2).scale(0.5);
        assert!(out.frobenius_distance(&max_mixed) <= 1e-10);
    }

    #[test]
    fn kraus_completeness_gate() {
        let c = |re: f64| Complex64::new(re, 0.0);
        let bad = vec![DMatrix::from_row_slice(2, 2, &[c(1.), c(0.), c(0.), c(0.5)])];
        match KrausChannel::new(2, 2, bad) {
            Err(Error::CompletenessViolation { deviation }) => assert!(deviation > 0.1),
            other => panic!("expected completeness violation, got {other:?}"),
        }
    }

    #[test]
    fn apply_kraus_on_a_factor_preserves_trace() {
        let mut r = rng(25);
        let rho = random_density(4, &mut r);
        let shape = SubsystemShape::new(&[2, 2]).unwrap();
        let ch = KrausChannel::identity(2);
        let (out, new_shape) = apply_kraus(&ch, &rho, &shape, 1).unwrap();
        assert_eq!(new_shape.dims(), &[2, 2]);
        assert_abs_diff_eq!(out.op().trace(), 1.0, epsilon = 1e-9);
        assert!(out.op().frobenius_distance(rho.op()) <= 1e-10);
    }

    #[test]
    fn composite_split_row_major() {
        let mut r = rng(26);
        let outputs: Vec<DensityOperator> = (0..4).map(|_| random_density(2, &mut r)).collect();
        let symbols: Vec<String> = ["0|0", "0|1", "1|0", "1|1"].iter().map(|s| s.to_string()).collect();
        let ch = CQChannel::new(symbols, vec![0.25; 4], outputs).unwrap();
        let (xs, ys) = ch.composite_split().unwrap();
        assert_eq!(xs, vec!["0", "1"]);
        assert_eq!(ys, vec!["0", "1"]);
    }

    #[test]
    fn zero_mass_symbols_drop_for_coding_and_reject_for_sources() {
        let mut r = rng(27);
        let outputs: Vec<DensityOperator> = (0..2).map(|_| random_density(2, &mut r)).collect();
        let ch = CQChannel::new(
            vec!["a".into(), "b".into()],
            vec![1.0, 0.0],
            outputs.clone(),
        )
        .unwrap();
        let joint = build_cq_joint(&ch);
        assert_eq!(joint.num_blocks(), 1);

        let full_support = CQState::new(
            vec![1.0, 0.0],
            outputs.iter().map(|d| d.op().clone()).collect(),
        );
        assert!(matches!(full_support, Err(Error::ValidationError { .. })));
    }
}
