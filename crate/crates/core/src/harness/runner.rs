//! Convergence-experiment runner: independent Monte-Carlo trials per
//! (estimator, n), deterministic for any worker count, with log-log slope
//! fits against predicted exponents.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dist::{sobolev_norm_sq_truncated, weighted_mode_sum, BoxSumSpec, CoefficientOracle};
use crate::divergence::DivergenceResult;
use crate::error::{Error, Result};
use crate::estimators::{
    augmentation_baseline, empirical_coefficients, heat_smooth, optimal_cutoff, optimal_sigma,
    project_invariant, truncate, CoefficientField,
};
use crate::groups::{invariant_projector, Projector};
use crate::harness::config::{
    CutoffMode, EstimatorName, ExperimentConfig, MetricSpec, SliceSpec,
};
use crate::seeds::mix_seed;
use crate::spectral_sums::ols;
use crate::spectrum::{
    enumerate_spectrum, enumerate_spectrum_stepped, SpectrumSlice, LAMBDA_UNIT,
};

/// Aggregated results for one estimator across the n-grid.
#[derive(Debug, Clone)]
pub struct ConvergenceCurve {
    pub estimator: EstimatorName,
    pub ns: Vec<usize>,
    /// Mean divergence over the repetitions at each n.
    pub means: Vec<f64>,
    /// Standard error of the mean at each n.
    pub stderrs: Vec<f64>,
    /// Per-trial divergences, `trials[i][r]` for `ns[i]`.
    pub trials: Vec<Vec<f64>>,
    /// Truncation cutoff used at each n (`None` for unregularized pipelines).
    pub lambda_ts: Vec<Option<f64>>,
    /// OLS slope of `log mean` vs `log n` after burn-in.
    pub slope: f64,
    pub slope_stderr: f64,
    /// Rate predicted by the rule-of-thumb theory, when applicable.
    pub predicted_slope: Option<f64>,
}

/// OLS slope and stderr of `log means` vs `log ns`, skipping `burn_in`
/// leading points.
pub fn fit_slope(ns: &[usize], means: &[f64], burn_in: usize) -> Result<(f64, f64)> {
    if ns.len() != means.len() {
        return Err(Error::InvalidArgument("ns/means length mismatch".into()));
    }
    if ns.len() < burn_in + 3 {
        return Err(Error::InvalidArgument(format!(
            "slope fit needs ≥ 3 points after burn-in, got {}",
            ns.len().saturating_sub(burn_in)
        )));
    }
    let xs: Vec<f64> = ns[burn_in..].iter().map(|&n| (n as f64).ln()).collect();
    let mut ys = Vec::with_capacity(xs.len());
    for &m in &means[burn_in..] {
        if !(m > 0.0) {
            return Err(Error::InvalidArgument(
                "slope fit needs strictly positive means".into(),
            ));
        }
        ys.push(m.ln());
    }
    let (slope, _, stderr) = ols(&xs, &ys)?;
    Ok((slope, stderr))
}

/// Slice shared by every estimator of a run.
fn build_slice(config: &ExperimentConfig, spec: &SliceSpec) -> Result<Arc<SpectrumSlice>> {
    let d = config.group.ambient_dim();
    let lambda_max = LAMBDA_UNIT * spec.sq_max as f64;
    let slice = if spec.invariant_only {
        let steps = config.group.invariant_steps()?;
        enumerate_spectrum_stepped(d, lambda_max, &steps, config.element_budget)?
    } else {
        enumerate_spectrum(d, lambda_max, config.element_budget)?
    };
    Ok(Arc::new(slice))
}

/// Effective smoothness: minus the log-log slope of the oracle tail
/// `T(Λ) = Σ_{λ>Λ} |c_v|²` over a geometric cutoff ladder inside the slice.
pub fn measure_s_eff(
    oracle: &dyn CoefficientOracle,
    sq_max: i64,
    rel_tol: f64,
    budget: u64,
) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sq = 1i64;
    while sq <= sq_max.max(4) {
        let tail = weighted_mode_sum(oracle, 0.0, sq, rel_tol, budget)?;
        let t = tail.value + 0.5 * tail.tail_bound;
        if t > 0.0 {
            xs.push((LAMBDA_UNIT * sq as f64).ln());
            ys.push(t.ln());
        }
        sq *= 2;
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(
            "tail fit needs ≥ 3 usable cutoffs; enlarge the slice".into(),
        ));
    }
    let (slope, _, _) = ols(&xs, &ys)?;
    Ok(-slope)
}

/// Precomputed per-run context for evaluating one trial's divergence in
/// O(slice) without re-deriving oracle data.
struct MetricContext {
    /// Oracle coefficients on the slice.
    oracle_values: Vec<f64>,
    /// Per-element weight ξ (λ^{-α} for Sobolev metrics); index 0 unused.
    weights: Vec<f64>,
    /// Analytic oracle tail beyond the slice (midpoint of its interval).
    tail: f64,
}

impl MetricContext {
    fn new(
        config: &ExperimentConfig,
        slice: &Arc<SpectrumSlice>,
        dist: &BoxSumSpec,
    ) -> Result<Self> {
        let oracle_field = CoefficientField::from_oracle(slice.clone(), dist);
        let alpha = match config.metric {
            MetricSpec::Sobolev { alpha } => Some(alpha),
            MetricSpec::W1Upper => Some(1.0),
            MetricSpec::L2 => Some(0.0),
            _ => None,
        };
        let weights: Vec<f64> = match config.metric {
            MetricSpec::Mmd { beta } => slice
                .elements
                .iter()
                .map(|e| (-beta * e.freq.sq_norm() as f64).exp())
                .collect(),
            MetricSpec::Linf { .. } => vec![1.0; slice.len()],
            _ => {
                let a = alpha.unwrap();
                slice
                    .lambdas
                    .iter()
                    .map(|&lam| if lam > 0.0 { lam.powf(-a) } else { 0.0 })
                    .collect()
            }
        };
        let tail = match alpha {
            Some(a) => {
                let t = weighted_mode_sum(
                    dist,
                    -a,
                    crate::spectrum::sq_norm_bound(slice.lambda_max),
                    config.oracle_rel_tol,
                    config.oracle_budget,
                )?;
                t.value + 0.5 * t.tail_bound
            }
            // MMD and L∞ are reported over the slice head only.
            None => 0.0,
        };
        Ok(MetricContext {
            oracle_values: oracle_field.values,
            weights,
            tail,
        })
    }

    fn evaluate(
        &self,
        config: &ExperimentConfig,
        dist: &BoxSumSpec,
        field: &CoefficientField,
    ) -> Result<f64> {
        if let MetricSpec::Linf { grid_per_axis } = config.metric {
            return Ok(crate::divergence::linf_error(field, dist, grid_per_axis)?.grid_max);
        }
        let mut sq = self.tail;
        for i in 1..field.values.len() {
            let d = field.values[i] - self.oracle_values[i];
            sq += self.weights[i] * d * d;
        }
        Ok(sq.max(0.0).sqrt())
    }
}

/// Per-estimator regularization schedule, resolved once per run.
struct Schedule {
    /// λ_T per n (only for `truncated_invariant`).
    lambda_ts: Vec<Option<f64>>,
    /// σ per n (only for `heat_smoothed`).
    sigmas: Vec<Option<f64>>,
    predicted_slope: Option<f64>,
}

fn build_schedule(
    config: &ExperimentConfig,
    estimator: EstimatorName,
    slice: &SpectrumSlice,
    dist: &BoxSumSpec,
) -> Result<Schedule> {
    let none = vec![None; config.n_grid.len()];
    let d_eff = config.group.quotient_dim();
    let vol_q = config.group.quotient_vol();
    let alpha = match config.metric {
        MetricSpec::Sobolev { alpha } => alpha,
        MetricSpec::W1Upper => 1.0,
        _ => 0.0,
    };
    match estimator {
        EstimatorName::TruncatedInvariant => {
            let (lambda_ts, predicted) = match config.cutoff.mode {
                CutoffMode::Fixed => {
                    let lt = config.cutoff.lambda_t.ok_or_else(|| {
                        Error::Config("fixed cutoff requires lambda_t".into())
                    })?;
                    (vec![Some(lt); config.n_grid.len()], None)
                }
                CutoffMode::RuleOfThumb => {
                    let s = match config.cutoff.s {
                        Some(s) => s,
                        None => measure_s_eff(
                            dist,
                            crate::spectrum::sq_norm_bound(slice.lambda_max) / 2,
                            config.oracle_rel_tol,
                            config.oracle_budget,
                        )?,
                    };
                    let norm_sq =
                        sobolev_norm_sq_truncated(dist, s, slice.lambda_max, config.oracle_budget)?;
                    let mut lts = Vec::with_capacity(config.n_grid.len());
                    for &n in &config.n_grid {
                        let lt = optimal_cutoff(s, alpha, d_eff, vol_q, n, norm_sq)?;
                        if lt > slice.lambda_max * (1.0 + 1e-12) {
                            return Err(Error::CutoffExceedsSlice {
                                cutoff: lt,
                                slice_cutoff: slice.lambda_max,
                            });
                        }
                        lts.push(Some(lt));
                    }
                    let predicted = -(s + alpha) / (2.0 * s + d_eff as f64);
                    (lts, Some(predicted))
                }
            };
            Ok(Schedule {
                lambda_ts,
                sigmas: none,
                predicted_slope: predicted,
            })
        }
        EstimatorName::HeatSmoothed => {
            let sigmas = config
                .n_grid
                .iter()
                .map(|&n| match config.cutoff.sigma {
                    Some(s) => Ok(Some(s)),
                    None => optimal_sigma(d_eff, vol_q, n).map(Some),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Schedule {
                lambda_ts: none,
                sigmas,
                predicted_slope: None,
            })
        }
        _ => Ok(Schedule {
            lambda_ts: none.clone(),
            sigmas: none,
            predicted_slope: match estimator {
                // Plain Monte-Carlo noise decays as n^{-1/2}.
                EstimatorName::Empirical | EstimatorName::Invariant | EstimatorName::Augmented => {
                    Some(-0.5)
                }
                _ => None,
            },
        }),
    }
}

fn build_field(
    config: &ExperimentConfig,
    dist: &BoxSumSpec,
    slice: &Arc<SpectrumSlice>,
    projector: Option<&Projector>,
    estimator: EstimatorName,
    n: usize,
    lambda_t: Option<f64>,
    sigma: Option<f64>,
    seed: u64,
) -> Result<CoefficientField> {
    let samples = dist.sample(n, seed);
    Ok(match estimator {
        EstimatorName::Empirical => empirical_coefficients(&samples, slice)?,
        EstimatorName::Augmented => augmentation_baseline(&samples, slice, &config.group)?,
        EstimatorName::Invariant | EstimatorName::TruncatedInvariant | EstimatorName::HeatSmoothed => {
            let raw = empirical_coefficients(&samples, slice)?;
            let projected = project_invariant(&raw, projector.expect("projector built"))?;
            match estimator {
                EstimatorName::Invariant => projected,
                EstimatorName::TruncatedInvariant => {
                    truncate(&projected, lambda_t.expect("schedule built"))?
                }
                _ => heat_smooth(&projected, sigma.expect("schedule built"))?,
            }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    config: &ExperimentConfig,
    dist: &BoxSumSpec,
    slice: &Arc<SpectrumSlice>,
    projector: Option<&Projector>,
    context: &MetricContext,
    estimator: EstimatorName,
    n: usize,
    lambda_t: Option<f64>,
    sigma: Option<f64>,
    seed: u64,
) -> Result<f64> {
    let field = build_field(
        config, dist, slice, projector, estimator, n, lambda_t, sigma, seed,
    )?;
    context.evaluate(config, dist, &field)
}

/// One-shot estimator run at a single sample size: builds each configured
/// estimator's field (trial seed as in [`run_convergence`], repetition index
/// `rep`) and returns its divergence against the oracle, with certified tail
/// where the metric admits one. Returns the fields alongside for export.
pub fn estimate_once(
    config: &ExperimentConfig,
    n: usize,
    rep: usize,
) -> Result<Vec<(EstimatorName, DivergenceResult, CoefficientField)>> {
    config.validate()?;
    let dist = config.distribution.resolve()?;
    let slice = build_slice(config, &config.slice)?;
    let needs_projector = config
        .estimators
        .iter()
        .any(|e| !matches!(e, EstimatorName::Empirical | EstimatorName::Augmented));
    let projector = if needs_projector {
        Some(invariant_projector(&config.group, &slice)?)
    } else {
        None
    };
    // Resolve schedules against a single-point grid so fixed or rule-of-thumb
    // cutoffs apply to the requested n.
    let mut sched_config = config.clone();
    sched_config.n_grid = vec![n];

    let mut out = Vec::with_capacity(config.estimators.len());
    for &estimator in &config.estimators {
        let schedule = build_schedule(&sched_config, estimator, &slice, &dist)?;
        let seed = mix_seed(
            config.master_seed,
            &[estimator.seed_id(), n as u64, rep as u64],
        );
        let field = build_field(
            config,
            &dist,
            &slice,
            projector.as_ref(),
            estimator,
            n,
            schedule.lambda_ts[0],
            schedule.sigmas[0],
            seed,
        )?;
        let result = match config.metric {
            MetricSpec::Sobolev { alpha } => crate::divergence::sobolev_ipm_vs_oracle(
                &field,
                &dist,
                alpha,
                config.oracle_rel_tol,
                config.oracle_budget,
            )?,
            MetricSpec::W1Upper => {
                let mut r = crate::divergence::sobolev_ipm_vs_oracle(
                    &field,
                    &dist,
                    1.0,
                    config.oracle_rel_tol,
                    config.oracle_budget,
                )?;
                r.metric = "w1_upper".into();
                r
            }
            MetricSpec::L2 => crate::divergence::l2_error_vs_oracle(
                &field,
                &dist,
                config.oracle_rel_tol,
                config.oracle_budget,
            )?,
            MetricSpec::Mmd { beta } => {
                let oracle_field = CoefficientField::from_oracle(slice.clone(), &dist);
                crate::divergence::mmd(
                    &field,
                    &oracle_field,
                    &crate::divergence::SpectralKernel::Heat { beta },
                )?
            }
            MetricSpec::Linf { grid_per_axis } => {
                let r = crate::divergence::linf_error(&field, &dist, grid_per_axis)?;
                DivergenceResult {
                    metric: format!("linf(grid={grid_per_axis})"),
                    value: r.grid_max,
                    tail_lo: 0.0,
                    tail_hi: 0.0,
                    breakdown: vec![],
                }
            }
        };
        out.push((estimator, result, field));
    }
    Ok(out)
}

/// Runs the full experiment: every estimator × n × repetition, trial seeds
/// `mix(master_seed, estimator_id, n, r)`, results gathered in deterministic
/// order regardless of worker count.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceCurve>> {
    config.validate()?;
    let dist = config.distribution.resolve()?;
    let slice = build_slice(config, &config.slice)?;
    let needs_projector = config
        .estimators
        .iter()
        .any(|e| !matches!(e, EstimatorName::Empirical | EstimatorName::Augmented));
    let projector = if needs_projector {
        Some(invariant_projector(&config.group, &slice)?)
    } else {
        None
    };
    let context = MetricContext::new(config, &slice, &dist)?;

    let mut curves = Vec::with_capacity(config.estimators.len());
    for &estimator in &config.estimators {
        let schedule = build_schedule(config, estimator, &slice, &dist)?;
        let jobs: Vec<(usize, usize)> = (0..config.n_grid.len())
            .flat_map(|i| (0..config.repetitions).map(move |r| (i, r)))
            .collect();
        let values: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(i, r)| {
                let n = config.n_grid[i];
                let seed = mix_seed(
                    config.master_seed,
                    &[estimator.seed_id(), n as u64, r as u64],
                );
                run_trial(
                    config,
                    &dist,
                    &slice,
                    projector.as_ref(),
                    &context,
                    estimator,
                    n,
                    schedule.lambda_ts[i],
                    schedule.sigmas[i],
                    seed,
                )
                .map_err(|e| {
                    Error::InvalidArgument(format!(
                        "trial failed ({} n={n} r={r}): {e}",
                        estimator.label()
                    ))
                })
            })
            .collect();

        let mut trials: Vec<Vec<f64>> = vec![Vec::with_capacity(config.repetitions); config.n_grid.len()];
        for (&(i, _), value) in jobs.iter().zip(values) {
            trials[i].push(value?);
        }
        let mut means = Vec::with_capacity(trials.len());
        let mut stderrs = Vec::with_capacity(trials.len());
        for t in &trials {
            let r = t.len() as f64;
            let mean = t.iter().sum::<f64>() / r;
            let var = t.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
            means.push(mean);
            stderrs.push((var / r).sqrt());
        }
        let (slope, slope_stderr) = match fit_slope(&config.n_grid, &means, config.burn_in) {
            Ok(fit) => fit,
            // Degenerate curves (too few points, zero means) carry no slope.
            Err(_) => (f64::NAN, f64::NAN),
        };
        curves.push(ConvergenceCurve {
            estimator,
            ns: config.n_grid.clone(),
            means,
            stderrs,
            trials,
            lambda_ts: schedule.lambda_ts,
            slope,
            slope_stderr,
            predicted_slope: schedule.predicted_slope,
        });
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"
name = "unit"
master_seed = 11
repetitions = 4
n_grid = [16, 64, 256]
estimators = ["empirical"]

[distribution]
kind = "box_sum"

[[distribution.axes]]
law = "uniform"

[[distribution.axes]]
law = "uniform"

[group]
kind = "trivial"
ambient_dim = 2

[metric]
kind = "l2"

[slice]
sq_max = 4
{extra}
"#
        );
        ExperimentConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn fit_slope_examples() {
        let ns = [16, 64, 256, 1024];
        let exact: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-0.5)).collect();
        let (slope, stderr) = fit_slope(&ns, &exact, 0).unwrap();
        assert_abs_diff_eq!(slope, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stderr, 0.0, epsilon = 1e-12);

        let noisy: Vec<f64> = ns
            .iter()
            .enumerate()
            .map(|(i, &n)| 2.0 * (n as f64).powf(-0.7) * (1.0 + 0.01 * [1.0, -1.0, 1.0, -1.0][i]))
            .collect();
        let (slope, _) = fit_slope(&ns, &noisy, 0).unwrap();
        assert!((slope - -0.7).abs() < 0.02);

        let constant = [2.0, 2.0, 2.0, 2.0];
        let (slope, _) = fit_slope(&ns, &constant, 0).unwrap();
        assert_abs_diff_eq!(slope, 0.0, epsilon = 1e-12);

        assert!(fit_slope(&ns[..2], &exact[..2], 0).is_err());
        assert!(fit_slope(&ns, &exact, 2).is_err());
    }

    #[test]
    fn uniform_l2_risk_follows_mode_count() {
        // Uniform on T², empirical estimator: E[D₀²] = N_nonconst/n.
        let mut config = base_config("");
        config.repetitions = 64;
        let curves = run_convergence(&config).unwrap();
        let curve = &curves[0];
        // sq_max 4: complex modes ‖v‖² ≤ 4 minus constant.
        let n_modes = (crate::spectrum::weyl_count(2, LAMBDA_UNIT * 4.0, 1_000_000).unwrap() - 1)
            as f64;
        for (i, &n) in curve.ns.iter().enumerate() {
            let mean_sq: f64 =
                curve.trials[i].iter().map(|v| v * v).sum::<f64>() / curve.trials[i].len() as f64;
            let expected = n_modes / n as f64;
            assert!(
                (mean_sq - expected).abs() < 0.5 * expected,
                "n={n}: {mean_sq} vs {expected}"
            );
        }
        assert!((curve.slope - -0.5).abs() < 0.1, "slope {}", curve.slope);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let config = base_config("");
        let baseline = run_convergence(&config).unwrap();
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let curves = pool.install(|| run_convergence(&config).unwrap());
            for (a, b) in baseline.iter().zip(&curves) {
                assert_eq!(a.trials, b.trials, "threads={threads}");
                assert_eq!(a.means, b.means);
            }
        }
    }

    #[test]
    fn master_seed_changes_trials_not_structure() {
        let a = run_convergence(&base_config("")).unwrap();
        let mut config = base_config("");
        config.master_seed = 12;
        let b = run_convergence(&config).unwrap();
        assert_ne!(a[0].trials, b[0].trials);
        // Same decay structure: slopes agree within joint 2σ.
        let tol = 2.0 * (a[0].slope_stderr.powi(2) + b[0].slope_stderr.powi(2)).sqrt() + 0.3;
        assert!((a[0].slope - b[0].slope).abs() < tol);
    }

    #[test]
    fn invariant_dominates_empirical_on_invariant_distribution() {
        let text = r#"
name = "dominance"
master_seed = 5
repetitions = 48
n_grid = [32, 128, 512]
estimators = ["empirical", "invariant"]

[distribution]
kind = "box_sum"

[[distribution.axes]]
law = "box_sum"
summands = 2
width = 0.5

[[distribution.axes]]
law = "uniform"

[group]
kind = "continuous_shift"
ambient_dim = 2
coords = [1]

[metric]
kind = "l2"

[slice]
sq_max = 9
"#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        let curves = run_convergence(&config).unwrap();
        let emp = &curves[0];
        let inv = &curves[1];
        for i in 0..emp.ns.len() {
            let slack = 2.0 * (emp.stderrs[i].powi(2) + inv.stderrs[i].powi(2)).sqrt();
            assert!(
                inv.means[i] <= emp.means[i] + slack,
                "n={}: inv {} vs emp {}",
                emp.ns[i],
                inv.means[i],
                emp.means[i]
            );
        }
    }

    #[test]
    fn monotone_risk_in_n() {
        let mut config = base_config("");
        config.repetitions = 32;
        let curves = run_convergence(&config).unwrap();
        let c = &curves[0];
        for i in 0..c.ns.len() - 1 {
            let slack = 2.0 * (c.stderrs[i].powi(2) + c.stderrs[i + 1].powi(2)).sqrt();
            assert!(c.means[i] >= c.means[i + 1] - slack);
        }
    }

    #[test]
    fn measured_s_eff_matches_axis_decay() {
        // BoxSum m=2, a=1/2 on T³: tail(Λ) ~ Λ^{-3/2} (odd single-axis modes
        // with g ~ k⁻⁴ dominate), so s_eff ≈ 1.5.
        let dist = BoxSumSpec::isotropic(3, 2, 0.5);
        let s = measure_s_eff(&dist, 64, 1e-6, 20_000_000).unwrap();
        assert!((s - 1.5).abs() < 0.35, "s_eff {s}");
    }

    #[test]
    fn truncated_schedule_respects_slice() {
        let text = r#"
name = "cutoff"
master_seed = 5
repetitions = 3
n_grid = [1000]
estimators = ["truncated_invariant"]

[distribution]
kind = "box_sum"

[[distribution.axes]]
law = "box_sum"
summands = 2
width = 0.5

[[distribution.axes]]
law = "box_sum"
summands = 2
width = 0.5

[[distribution.axes]]
law = "box_sum"
summands = 2
width = 0.5

[group]
kind = "trivial"
ambient_dim = 3

[metric]
kind = "sobolev"
alpha = 1.0

[slice]
sq_max = 16

[cutoff]
mode = "rule_of_thumb"
s = 1.0
"#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        let dist = config.distribution.resolve().unwrap();
        let slice = build_slice(&config, &config.slice).unwrap();
        let schedule = build_schedule(&config, EstimatorName::TruncatedInvariant, &slice, &dist)
            .unwrap();
        let lt = schedule.lambda_ts[0].unwrap();
        assert!(lt > 0.0 && lt <= slice.lambda_max);
        assert_abs_diff_eq!(
            schedule.predicted_slope.unwrap(),
            -(1.0 + 1.0) / (2.0 + 3.0),
            epsilon = 1e-12
        );
        // A tiny slice makes the cutoff overshoot: explicit error.
        let mut small = config.clone();
        small.slice.sq_max = 1;
        let tiny = build_slice(&small, &small.slice).unwrap();
        assert!(matches!(
            build_schedule(&small, EstimatorName::TruncatedInvariant, &tiny, &dist),
            Err(Error::CutoffExceedsSlice { .. })
        ));
    }
}
