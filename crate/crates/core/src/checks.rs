//! Randomized property batteries.
//!
//! These back the `check` CLI subcommands and the acceptance suite:
//! the noncommutative-minimal property battery, the Hayashi–Nagaoka
//! operator-inequality battery, and the trace-chain battery. Each
//! returns the worst margin observed so failures are diagnosable.

use rand::Rng;

use crate::discrimination::{check_hn_inequality, check_trace_chain, helstrom};
use crate::error::Result;
use crate::operator::{
    apply_spectral_function, nc_max, nc_min, nc_quotient, partial_trace, spectral_decompose,
    tensor_product, HermitianOperator, SpectralFn, SubsystemShape,
};
use crate::random::{random_psd, random_test, rng};

/// Margin convention: every listed property holds iff its margin is at
/// least `-tolerance`; the battery records the minimum margin seen.
#[derive(Debug, Clone)]
pub struct PropertyMargin {
    pub name: &'static str,
    pub worst_margin: f64,
    pub tolerance: f64,
}

impl PropertyMargin {
    pub fn passed(&self) -> bool {
        self.worst_margin >= -self.tolerance
    }
}

/// Battery report: per-property worst margins over all trials.
#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub name: &'static str,
    pub trials: u64,
    pub dims: Vec<usize>,
    pub margins: Vec<PropertyMargin>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.margins.iter().all(|m| m.passed())
    }
}

fn record(margins: &mut Vec<PropertyMargin>, name: &'static str, tolerance: f64) -> usize {
    margins.push(PropertyMargin {
        name,
        worst_margin: f64::INFINITY,
        tolerance,
    });
    margins.len() - 1
}

fn update(margins: &mut [PropertyMargin], index: usize, margin: f64) {
    if margin < margins[index].worst_margin {
        margins[index].worst_margin = margin;
    }
}

/// Dephasing in the computational basis: a positive trace-preserving map.
fn dephase(h: &HermitianOperator) -> HermitianOperator {
    let diag: Vec<f64> = (0..h.dim()).map(|i| h.matrix()[(i, i)].re).collect();
    HermitianOperator::from_diagonal(&diag)
}

/// Properties of the noncommutative minimal on random PSD pairs:
/// Loewner monotonicity, monotonicity under positive trace-preserving
/// maps (partial trace and dephasing), joint concavity, the direct-sum
/// identity, the Chernoff-type upper bound, the quotient lower bound,
/// the `min + max = sum` identity, and Holevo–Helstrom optimality
/// against random tests.
pub fn run_fact_battery(dims: &[usize], trials: u64, seed: u64) -> Result<BatteryReport> {
    let mut r = rng(seed);
    let mut margins = Vec::new();
    let loewner = record(&mut margins, "loewner_monotonicity", 1e-9);
    let ptp_trace = record(&mut margins, "monotone_under_partial_trace", 1e-9);
    let ptp_dephase = record(&mut margins, "monotone_under_dephasing", 1e-9);
    let concavity = record(&mut margins, "joint_concavity", 1e-9);
    let direct = record(&mut margins, "direct_sum_identity", 1e-9);
    let chernoff = record(&mut margins, "chernoff_upper_bound", 1e-9);
    let quotient_lower = record(&mut margins, "quotient_lower_bound", 1e-9);
    let min_max = record(&mut margins, "min_plus_max_identity", 1e-9);
    let helstrom_opt = record(&mut margins, "helstrom_sdp_optimality", 1e-9);

    for &dim in dims {
        for _ in 0..trials {
            let a = random_psd(dim, dim, &mut r);
            let b = random_psd(dim, 1 + (r.gen::<usize>() % dim), &mut r);
            let tr_min = nc_min(&a, &b)?.trace();

            // (ii) A <= A', B <= B' constructed by PSD increments
            let a_up = a.add(&random_psd(dim, dim, &mut r))?;
            let b_up = b.add(&random_psd(dim, dim, &mut r))?;
            update(
                &mut margins,
                loewner,
                nc_min(&a_up, &b_up)?.trace() - tr_min,
            );

            // (iii) positive trace-preserving maps
            let big_a = tensor_product(&a, &random_psd(2, 2, &mut r));
            let scale = 1.0 / big_a.trace() * a.trace();
            let big_a = big_a.scale(scale);
            let big_b = tensor_product(&b, &random_psd(2, 2, &mut r));
            let scale_b = 1.0 / big_b.trace() * b.trace();
            let big_b = big_b.scale(scale_b);
            let shape = SubsystemShape::new(&[dim, 2])?;
            let t_big = nc_min(&big_a, &big_b)?.trace();
            let pa = partial_trace(&big_a, &shape, &[0])?;
            let pb = partial_trace(&big_b, &shape, &[0])?;
            update(
                &mut margins,
                ptp_trace,
                nc_min(&pa, &pb)?.trace() - t_big,
            );
            update(
                &mut margins,
                ptp_dephase,
                nc_min(&dephase(&a), &dephase(&b))?.trace() - tr_min,
            );

            // (iv) joint concavity at lambda in {0.25, 0.5, 0.75}
            let a2 = random_psd(dim, dim, &mut r);
            let b2 = random_psd(dim, dim, &mut r);
            let t2 = nc_min(&a2, &b2)?.trace();
            for lambda in [0.25, 0.5, 0.75] {
                let am = a.scale(lambda).add(&a2.scale(1.0 - lambda))?;
                let bm = b.scale(lambda).add(&b2.scale(1.0 - lambda))?;
                let mixed = nc_min(&am, &bm)?.trace();
                update(
                    &mut margins,
                    concavity,
                    mixed - (lambda * tr_min + (1.0 - lambda) * t2),
                );
            }

            // (v) direct sum
            let lhs = nc_min(
                &crate::operator::direct_sum(&a, &a2),
                &crate::operator::direct_sum(&b, &b2),
            )?;
            let rhs = crate::operator::direct_sum(&nc_min(&a, &b)?, &nc_min(&a2, &b2)?);
            update(&mut margins, direct, 1e-9 - lhs.frobenius_distance(&rhs));

            // (vi) Chernoff-type upper bound on common (full) support
            for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let a_pow = apply_spectral_function(&a, SpectralFn::Power(1.0 - s), None)?;
                let b_pow = apply_spectral_function(&b_up, SpectralFn::Power(s), None)?;
                let upper = a_pow.trace_product(&b_pow)?;
                update(
                    &mut margins,
                    chernoff,
                    upper - nc_min(&a, &b_up)?.trace(),
                );
            }

            // (vii) quotient lower bound
            let lower = a.trace_product(&nc_quotient(&b, &a.add(&b)?, None)?)?;
            update(&mut margins, quotient_lower, tr_min - lower);

            // min + max identity
            let identity_dev = nc_min(&a, &b)?
                .add(&nc_max(&a, &b)?)?
                .frobenius_distance(&a.add(&b)?);
            update(&mut margins, min_max, 1e-9 - identity_dev);

            // Holevo-Helstrom SDP spot check against random tests and
            // attainment by the Neyman-Pearson test
            let (err, np_test) = helstrom(&a, &b)?;
            let attained = np_test.miss_probability(&a)? + np_test.pass_probability(&b)?;
            update(&mut margins, helstrom_opt, 1e-9 - (attained - err).abs());
            for _ in 0..20 {
                let t = random_test(dim, &mut r);
                let value = a.trace() - a.trace_product(&t)? + b.trace_product(&t)?;
                update(&mut margins, helstrom_opt, value - err);
            }
        }
    }
    Ok(BatteryReport {
        name: "facts",
        trials,
        dims: dims.to_vec(),
        margins,
    })
}

/// Hayashi–Nagaoka operator inequality on random `(A, B, c)` triples.
pub fn run_hn_battery(dims: &[usize], trials: u64, seed: u64) -> Result<BatteryReport> {
    let mut r = rng(seed);
    let mut margins = Vec::new();
    let hn = record(&mut margins, "hayashi_nagaoka_inequality", 1e-8);
    for &dim in dims {
        for _ in 0..trials {
            let a = random_test(dim, &mut r);
            let b = random_psd(dim, 1 + (r.gen::<usize>() % dim), &mut r);
            for c in [0.1, 1.0, 10.0] {
                update(&mut margins, hn, check_hn_inequality(&a, &b, c)?);
            }
        }
    }
    Ok(BatteryReport {
        name: "hn",
        trials,
        dims: dims.to_vec(),
        margins,
    })
}

/// Trace chain `lhs <= mid <= rhs` on random PSD pairs, including
/// rank-deficient ones.
pub fn run_trace_chain_battery(dims: &[usize], trials: u64, seed: u64) -> Result<BatteryReport> {
    let mut r = rng(seed);
    let mut margins = Vec::new();
    let first = record(&mut margins, "parallel_sum_vs_product", 1e-9);
    let second = record(&mut margins, "product_vs_minimal", 1e-9);
    for &dim in dims {
        for _ in 0..trials {
            let rank_a = 1 + (r.gen::<usize>() % dim);
            let rank_b = 1 + (r.gen::<usize>() % dim);
            let a = random_psd(dim, rank_a, &mut r);
            let b = random_psd(dim, rank_b, &mut r);
            let (lhs, mid, rhs) = check_trace_chain(&a, &b)?;
            update(&mut margins, first, mid - lhs);
            update(&mut margins, second, rhs - mid);
        }
    }
    Ok(BatteryReport {
        name: "trace-chain",
        trials,
        dims: dims.to_vec(),
        margins,
    })
}

/// Quotient spectrum sanity used by the fact battery's callers: the
/// quotient of a dominated operator stays within [0, 1].
pub fn quotient_dominated_spectrum(dim: usize, trials: u64, seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..trials {
        let rho = random_psd(dim, dim, &mut r);
        let sigma = random_psd(dim, dim, &mut r);
        let q = nc_quotient(&rho, &rho.add(&sigma)?, None)?;
        let spec = spectral_decompose(&q)?;
        worst = worst
            .min(spec.eigenvalues()[0])
            .min(1.0 - spec.eigenvalues()[dim - 1]);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fact_battery_passes_quickly() {
        let report = run_fact_battery(&[2, 3], 20, 7).unwrap();
        assert!(report.passed(), "{:#?}", report.margins);
        assert_eq!(report.margins.len(), 9);
    }

    #[test]
    fn hn_battery_passes() {
        let report = run_hn_battery(&[2, 3], 50, 8).unwrap();
        assert!(report.passed(), "{:#?}", report.margins);
    }

    #[test]
    fn trace_chain_battery_passes() {
        let report = run_trace_chain_battery(&[2, 4], 50, 9).unwrap();
        assert!(report.passed(), "{:#?}", report.margins);
    }

    #[test]
    fn dominated_quotient_spectrum_in_unit_interval() {
        let worst = quotient_dominated_spectrum(3, 20, 10).unwrap();
        assert!(worst >= -1e-9, "worst margin {worst}");
    }
}
