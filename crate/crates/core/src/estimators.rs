//! Coefficient-space estimators: plain empirical, invariant-projected,
//! truncated, heat-smoothed, and the exact infinite-augmentation baseline.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{invariant_projector, GroupAction, Projector};
use crate::spectrum::{omega, SliceEvaluator, SpectrumSlice};

/// Which pipeline produced a coefficient field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Empirical,
    Invariant,
    TruncatedInvariant,
    HeatSmoothed,
    Augmented,
    Oracle,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Empirical => "empirical",
            EstimatorKind::Invariant => "invariant",
            EstimatorKind::TruncatedInvariant => "truncated_invariant",
            EstimatorKind::HeatSmoothed => "heat_smoothed",
            EstimatorKind::Augmented => "augmented",
            EstimatorKind::Oracle => "oracle",
        }
    }
}

/// Bookkeeping attached to a coefficient field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldMeta {
    pub kind: Option<EstimatorKind>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub lambda_t: Option<f64>,
    pub group: Option<String>,
}

/// Sparse-over-a-slice real coefficient vector: the common representation of
/// densities, estimators, and their differences.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub slice: Arc<SpectrumSlice>,
    pub values: Vec<f64>,
    pub meta: FieldMeta,
}

impl CoefficientField {
    pub fn new(slice: Arc<SpectrumSlice>, values: Vec<f64>, meta: FieldMeta) -> Self {
        assert_eq!(slice.len(), values.len());
        CoefficientField { slice, values, meta }
    }

    /// Exact coefficients of an oracle distribution over a slice.
    pub fn from_oracle(slice: Arc<SpectrumSlice>, oracle: &dyn crate::dist::CoefficientOracle) -> Self {
        let values = slice
            .elements
            .iter()
            .map(|e| oracle.real_coefficient(e))
            .collect();
        CoefficientField::new(
            slice,
            values,
            FieldMeta {
                kind: Some(EstimatorKind::Oracle),
                ..Default::default()
            },
        )
    }

    pub fn constant_value(&self) -> f64 {
        self.values[0]
    }
}

// Samples are accumulated in fixed-size blocks and the block partials reduced
// in index order, so the result does not depend on the worker count.
const REDUCTION_BLOCK: usize = 1024;

/// Empirical coefficients `(1/n) Σ_i φ_ℓ(X_i)` over a slice.
pub fn empirical_coefficients(samples: &[Vec<f64>], slice: &Arc<SpectrumSlice>) -> Result<CoefficientField> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let width = slice.len();
    let partials: Vec<Result<Vec<f64>>> = samples
        .par_chunks(REDUCTION_BLOCK)
        .map(|chunk| {
            let mut evaluator = SliceEvaluator::new(slice);
            let mut acc = vec![0.0f64; width];
            let mut row = vec![0.0f64; width];
            for x in chunk {
                evaluator.evaluate_into(x, &mut row)?;
                for (a, &r) in acc.iter_mut().zip(&row) {
                    *a += r;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0.0f64; width];
    for p in partials {
        let p = p?;
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let inv_n = 1.0 / samples.len() as f64;
    for t in total.iter_mut() {
        *t *= inv_n;
    }
    // The constant element evaluates to 1 at every sample.
    total[0] = 1.0;
    Ok(CoefficientField::new(
        slice.clone(),
        total,
        FieldMeta {
            kind: Some(EstimatorKind::Empirical),
            n: Some(samples.len()),
            ..Default::default()
        },
    ))
}

/// Projects a field onto the invariant subspace.
pub fn project_invariant(field: &CoefficientField, projector: &Projector) -> Result<CoefficientField> {
    match projector {
        Projector::Mask(mask) if mask.len() != field.values.len() => {
            return Err(Error::SliceMismatch)
        }
        Projector::Blocks(blocks)
            if blocks
                .iter()
                .flat_map(|b| b.indices.iter())
                .any(|&i| i >= field.values.len()) =>
        {
            return Err(Error::SliceMismatch)
        }
        _ => {}
    }
    let mut values = field.values.clone();
    projector.apply(&mut values);
    let mut meta = field.meta.clone();
    meta.kind = Some(EstimatorKind::Invariant);
    Ok(CoefficientField::new(field.slice.clone(), values, meta))
}

/// Zeroes every element with `λ ≥ lambda_t` (strict cutoff); the constant is
/// always retained.
pub fn truncate(field: &CoefficientField, lambda_t: f64) -> Result<CoefficientField> {
    if lambda_t > field.slice.lambda_max * (1.0 + 1e-12) {
        return Err(Error::CutoffExceedsSlice {
            cutoff: lambda_t,
            slice_cutoff: field.slice.lambda_max,
        });
    }
    let mut values = field.values.clone();
    for (v, &lam) in values.iter_mut().zip(&field.slice.lambdas).skip(1) {
        if lam >= lambda_t {
            *v = 0.0;
        }
    }
    let mut meta = field.meta.clone();
    meta.kind = Some(EstimatorKind::TruncatedInvariant);
    meta.lambda_t = Some(lambda_t);
    Ok(CoefficientField::new(field.slice.clone(), values, meta))
}

/// Damps every coefficient by `exp(-σλ)`.
pub fn heat_smooth(field: &CoefficientField, sigma: f64) -> Result<CoefficientField> {
    if sigma < 0.0 {
        return Err(Error::InvalidArgument("sigma must be ≥ 0".into()));
    }
    let values = field
        .values
        .iter()
        .zip(&field.slice.lambdas)
        .map(|(&v, &lam)| v * (-sigma * lam).exp())
        .collect();
    let mut meta = field.meta.clone();
    meta.kind = Some(EstimatorKind::HeatSmoothed);
    meta.sigma = Some(sigma);
    Ok(CoefficientField::new(field.slice.clone(), values, meta))
}

/// Bias-variance balancing cutoff
/// `λ_T = {(s+α)‖dμ/dx‖²_{H^s} / ((d/2n)(ω_d/(2π)^d)·vol(M/G))}^{1/(s+d/2)}`,
/// with the log-rate variant (`d/2 ↦ α` in the denominator) at `α = d/2`.
pub fn optimal_cutoff(
    s: f64,
    alpha: f64,
    d_eff: usize,
    vol_q: f64,
    n: usize,
    sobolev_norm_sq: f64,
) -> Result<f64> {
    let d = d_eff as f64;
    if alpha > d / 2.0 {
        return Err(Error::Regime(format!(
            "alpha = {alpha} ≥ d/2 = {} is the kernel regime; no truncation cutoff applies",
            d / 2.0
        )));
    }
    if s < 0.0 || vol_q <= 0.0 || n == 0 || sobolev_norm_sq <= 0.0 {
        return Err(Error::InvalidArgument("cutoff inputs must be positive".into()));
    }
    let weyl_prefactor = omega(d_eff) / (2.0 * std::f64::consts::PI).powi(d_eff as i32);
    let denom_rate = if alpha == d / 2.0 { alpha } else { d / 2.0 };
    let numerator = (s + alpha) * sobolev_norm_sq;
    let denominator = denom_rate / n as f64 * weyl_prefactor * vol_q;
    Ok((numerator / denominator).powf(1.0 / (s + d / 2.0)))
}

/// Heat-smoothing bandwidth `σ_opt = ((1-d/2)²·vol(M/G)/n)^{2/d}`; requires
/// quotient dimension ≥ 3.
pub fn optimal_sigma(d_eff: usize, vol_q: f64, n: usize) -> Result<f64> {
    if d_eff < 3 {
        return Err(Error::Regime(format!(
            "heat-smoothing bandwidth rule needs quotient dimension ≥ 3, got {d_eff}"
        )));
    }
    let d = d_eff as f64;
    let c = (1.0 - d / 2.0).powi(2);
    Ok((c * vol_q / n as f64).powf(2.0 / d))
}

/// Exact infinite-augmentation baseline: the empirical field with its
/// non-invariant coordinates removed, no truncation below the slice cutoff.
pub fn augmentation_baseline(
    samples: &[Vec<f64>],
    slice: &Arc<SpectrumSlice>,
    action: &GroupAction,
) -> Result<CoefficientField> {
    let field = empirical_coefficients(samples, slice)?;
    let projector = invariant_projector(action, slice)?;
    let mut out = project_invariant(&field, &projector)?;
    out.meta.kind = Some(EstimatorKind::Augmented);
    out.meta.group = Some(format!("{action:?}"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::dist::BoxSumSpec;
    use crate::spectrum::{enumerate_spectrum, BasisKind, DEFAULT_ELEMENT_BUDGET, LAMBDA_UNIT};

    fn slice_1d(sq_max: f64) -> Arc<SpectrumSlice> {
        Arc::new(enumerate_spectrum(1, sq_max * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap())
    }

    #[test]
    fn empirical_single_sample() {
        let slice = slice_1d(1.0);
        let field = empirical_coefficients(&[vec![0.0]], &slice).unwrap();
        let cos1 = slice
            .elements
            .iter()
            .position(|e| e.kind == BasisKind::Cosine)
            .unwrap();
        assert_abs_diff_eq!(field.values[cos1], 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(field.constant_value(), 1.0);
    }

    #[test]
    fn empirical_two_sample_cancellation() {
        let slice = slice_1d(1.0);
        let field = empirical_coefficients(&[vec![0.0], vec![0.5]], &slice).unwrap();
        let cos1 = slice
            .elements
            .iter()
            .position(|e| e.kind == BasisKind::Cosine)
            .unwrap();
        assert_abs_diff_eq!(field.values[cos1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn empirical_rejects_empty() {
        let slice = slice_1d(1.0);
        assert!(matches!(
            empirical_coefficients(&[], &slice),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn empirical_block_reduction_is_chunk_invariant() {
        // Same samples, one full pass vs the blocked path exercised with more
        // than one block.
        let spec = BoxSumSpec::isotropic(1, 3, 1.0 / 3.0);
        let samples = spec.sample(REDUCTION_BLOCK * 3 + 17, 5);
        let slice = slice_1d(9.0);
        let a = empirical_coefficients(&samples, &slice).unwrap();
        let b = empirical_coefficients(&samples, &slice).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn truncate_behaviour() {
        let slice = slice_1d(4.0);
        let values: Vec<f64> = (0..slice.len()).map(|i| 1.0 + i as f64).collect();
        let field = CoefficientField::new(slice.clone(), values, FieldMeta::default());
        // Cutoff above the slice is an error.
        assert!(truncate(&field, slice.lambda_max * 2.0).is_err());
        // Tiny cutoff keeps only the constant.
        let t = truncate(&field, 1e-9).unwrap();
        assert_eq!(t.values[0], 1.0);
        assert!(t.values[1..].iter().all(|&v| v == 0.0));
        // λ_T = 4π²·2 keeps |v| ≤ 1.
        let t = truncate(&field, 2.0 * LAMBDA_UNIT).unwrap();
        for (e, &v) in t.slice.elements.iter().zip(&t.values) {
            if e.freq.sq_norm() <= 1 {
                assert!(v != 0.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn heat_smooth_damping() {
        let slice = slice_1d(1.0);
        let field = CoefficientField::new(slice, vec![1.0, 0.5, -0.25], FieldMeta::default());
        let same = heat_smooth(&field, 0.0).unwrap();
        assert_eq!(same.values, field.values);
        let damped = heat_smooth(&field, 0.01).unwrap();
        let factor = (-0.01 * LAMBDA_UNIT).exp();
        assert_abs_diff_eq!(factor, 0.6738254512, epsilon = 1e-6);
        assert_abs_diff_eq!(damped.values[1], 0.5 * factor, epsilon = 1e-15);
        assert_abs_diff_eq!(damped.values[2], -0.25 * factor, epsilon = 1e-15);
        // |heat_smooth value| ≤ |value|, strictly for λ > 0, σ > 0.
        for i in 1..field.values.len() {
            assert!(damped.values[i].abs() < field.values[i].abs());
        }
        let big = heat_smooth(&field, 1e6).unwrap();
        assert_eq!(big.values[0], 1.0);
        assert!(big.values[1..].iter().all(|&v| v.abs() < 1e-300));
    }

    #[test]
    fn optimal_cutoff_plug_in() {
        // d=3, s=1, α=1, vol=1, n=1000, norm²=1 → ≈ 90.99.
        let lam = optimal_cutoff(1.0, 1.0, 3, 1.0, 1000, 1.0).unwrap();
        assert_abs_diff_eq!(lam, 90.99, epsilon = 0.01);
        // Doubling n scales by 2^{1/(s+d/2)}.
        let lam2 = optimal_cutoff(1.0, 1.0, 3, 1.0, 2000, 1.0).unwrap();
        assert_abs_diff_eq!(lam2 / lam, 2f64.powf(1.0 / 2.5), epsilon = 1e-12);
        // Halving vol(M/G) scales the same way.
        let lam3 = optimal_cutoff(1.0, 1.0, 3, 0.5, 1000, 1.0).unwrap();
        assert_abs_diff_eq!(lam3 / lam, 2f64.powf(1.0 / 2.5), epsilon = 1e-12);
        // Kernel regime is rejected.
        assert!(optimal_cutoff(1.0, 2.0, 3, 1.0, 1000, 1.0).is_err());
        // α = d/2 falls into the log-rate branch.
        assert!(optimal_cutoff(1.0, 1.5, 3, 1.0, 1000, 1.0).is_ok());
    }

    #[test]
    fn optimal_sigma_plug_in() {
        assert_abs_diff_eq!(optimal_sigma(4, 1.0, 1024).unwrap(), 0.03125, epsilon = 1e-12);
        assert_abs_diff_eq!(optimal_sigma(3, 1.0, 1000).unwrap(), 3.969e-3, epsilon = 1e-5);
        assert!(optimal_sigma(2, 1.0, 1000).is_err());
        let s1 = optimal_sigma(4, 1.0, 1000).unwrap();
        let s4 = optimal_sigma(4, 1.0, 4000).unwrap();
        assert_abs_diff_eq!(s1 / s4, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn augmentation_matches_explicit_replication() {
        // Finite cyclic shift: averaging coefficients equals replicating every
        // sample over the group orbit.
        let order = 4u32;
        let action = GroupAction::CyclicShift {
            ambient_dim: 1,
            coords: vec![0],
            order,
        };
        let slice = slice_1d(64.0);
        let samples = vec![vec![0.13], vec![0.71]];
        let baseline = augmentation_baseline(&samples, &slice, &action).unwrap();
        let mut replicated = Vec::new();
        for x in &samples {
            for j in 0..order {
                replicated.push(vec![(x[0] + j as f64 / order as f64).fract()]);
            }
        }
        let brute = empirical_coefficients(&replicated, &slice).unwrap();
        for (a, b) in baseline.values.iter().zip(&brute.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn continuous_shift_augmentation_zeroes_noninvariant_modes() {
        let action = GroupAction::ContinuousShift {
            ambient_dim: 2,
            coords: vec![1],
        };
        let slice = Arc::new(enumerate_spectrum(2, 4.0 * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap());
        let samples = vec![vec![0.1, 0.2], vec![0.4, 0.9], vec![0.77, 0.01]];
        let field = augmentation_baseline(&samples, &slice, &action).unwrap();
        for (e, &v) in slice.elements.iter().zip(&field.values) {
            if e.freq.0[1] != 0 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn empirical_unbiased_below_cutoff() {
        // Trial-mean of each coefficient vs the oracle, 200 trials at n = 256.
        let spec = BoxSumSpec::isotropic(1, 3, 1.0 / 3.0);
        let slice = slice_1d(16.0);
        let oracle = CoefficientField::from_oracle(slice.clone(), &spec);
        let trials = 200;
        let n = 256;
        let mut sums = vec![0.0; slice.len()];
        let mut sq_sums = vec![0.0; slice.len()];
        for t in 0..trials {
            let samples = spec.sample(n, crate::seeds::mix_seed(99, &[t]));
            let field = empirical_coefficients(&samples, &slice).unwrap();
            for ((s, q), &v) in sums.iter_mut().zip(sq_sums.iter_mut()).zip(&field.values) {
                *s += v;
                *q += v * v;
            }
        }
        let r = trials as f64;
        for i in 1..slice.len() {
            let mean = sums[i] / r;
            let var = (sq_sums[i] / r - mean * mean).max(0.0);
            let tol = 4.0 * (var / r).sqrt();
            assert!(
                (mean - oracle.values[i]).abs() <= tol.max(1e-12),
                "element {i}: mean {mean} oracle {} tol {tol}",
                oracle.values[i]
            );
        }
    }

    #[test]
    fn empirical_variance_under_uniform() {
        // Var of each nonconstant coefficient ≈ 1/n within 20% over 500 trials.
        let spec = BoxSumSpec::isotropic(1, 1, 1.0);
        let slice = slice_1d(4.0);
        let trials = 500;
        let n = 64;
        let mut sums = vec![0.0; slice.len()];
        let mut sq_sums = vec![0.0; slice.len()];
        for t in 0..trials {
            let samples = spec.sample(n, crate::seeds::mix_seed(123, &[t]));
            let field = empirical_coefficients(&samples, &slice).unwrap();
            for ((s, q), &v) in sums.iter_mut().zip(sq_sums.iter_mut()).zip(&field.values) {
                *s += v;
                *q += v * v;
            }
        }
        let r = trials as f64;
        for i in 1..slice.len() {
            let mean = sums[i] / r;
            let var = sq_sums[i] / r - mean * mean;
            let expected = 1.0 / n as f64;
            assert!(
                (var - expected).abs() < 0.2 * expected,
                "element {i}: var {var} vs {expected}"
            );
        }
    }
}
