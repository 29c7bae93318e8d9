//! End-to-end acceptance suite: one test per criterion, each printing a
//! single `criterion N ...: PASS` line on success (run with `--nocapture`
//! to see them).

use std::sync::Arc;

use rand::Rng;

use torus_spectral::divergence::{mmd, sobolev_ipm, SpectralKernel};
use torus_spectral::estimators::{CoefficientField, FieldMeta};
use torus_spectral::groups::GroupAction;
use torus_spectral::harness::config::{EstimatorName, ExperimentConfig};
use torus_spectral::harness::csvio::curves_to_csv;
use torus_spectral::harness::fig1::{default_fixed_lambda, reproduce_fig1, Fig1Options};
use torus_spectral::harness::runner::run_convergence;
use torus_spectral::seeds::rng_from_parts;
use torus_spectral::spectral_sums::{theta, trace_heat, trace_heat_truncated, weyl_fit, zeta};
use torus_spectral::spectrum::{enumerate_spectrum, evaluate_basis, omega, LAMBDA_UNIT};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Exact quadrature of band-limited products: uniform periodic grids
/// integrate trigonometric polynomials exactly once the per-axis point count
/// exceeds the product bandwidth.
fn grid_points(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let mut points = Vec::with_capacity(m.pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        points.push(idx.iter().map(|&i| i as f64 / m as f64).collect());
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == dim {
                return points;
            }
        }
    }
}

fn field_eval(field: &CoefficientField, x: &[f64]) -> f64 {
    field
        .slice
        .elements
        .iter()
        .zip(&field.values)
        .map(|(e, &c)| c * evaluate_basis(e, x).unwrap())
        .sum()
}

#[test]
fn criterion_1_quadrature_equivalence() {
    // 20 random band-limited pairs: 10 on T¹ (‖v‖² ≤ 9), 10 on T² (‖v‖² ≤ 4).
    for pair in 0..20u64 {
        let (dim, sq_max) = if pair < 10 { (1, 9.0) } else { (2, 4.0) };
        let slice = Arc::new(
            enumerate_spectrum(dim, LAMBDA_UNIT * sq_max, 1_000_000).unwrap(),
        );
        let mut rng = rng_from_parts(41, &[pair]);
        let mut mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut values: Vec<f64> =
                (0..slice.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
            values[0] = 1.0;
            CoefficientField::new(slice.clone(), values, FieldMeta::default())
        };
        let f = mk(&mut rng);
        let g = mk(&mut rng);

        // Quadrature grid: bandwidth per axis ≤ 3, products ≤ 6 → 16 points
        // per axis integrate all products exactly.
        let m = 16;
        let points = grid_points(dim, m);
        let cell = 1.0 / points.len() as f64;

        // α = 0: squared L² distance by direct quadrature.
        let l2_quad: f64 = points
            .iter()
            .map(|x| {
                let d = field_eval(&f, x) - field_eval(&g, x);
                d * d * cell
            })
            .sum();
        let d0 = sobolev_ipm(&f, &g, 0.0).unwrap();
        assert!(
            (d0.value - l2_quad.sqrt()).abs() < 1e-10,
            "pair {pair}: D0 {} vs quadrature {}",
            d0.value,
            l2_quad.sqrt()
        );

        // α = 1: dual form ∫ U·(f−g) with U the (−Δ)⁻¹ potential of the
        // difference, built pointwise from the basis.
        let potential = CoefficientField::new(
            slice.clone(),
            slice
                .elements
                .iter()
                .zip(slice.lambdas.iter())
                .enumerate()
                .map(|(i, (_, &lam))| {
                    if lam > 0.0 {
                        (f.values[i] - g.values[i]) / lam
                    } else {
                        0.0
                    }
                })
                .collect(),
            FieldMeta::default(),
        );
        let d1_quad: f64 = points
            .iter()
            .map(|x| {
                let d = field_eval(&f, x) - field_eval(&g, x);
                field_eval(&potential, x) * d * cell
            })
            .sum();
        let d1 = sobolev_ipm(&f, &g, 1.0).unwrap();
        assert!(
            (d1.value - d1_quad.max(0.0).sqrt()).abs() < 1e-8,
            "pair {pair}: D1 {} vs quadrature {}",
            d1.value,
            d1_quad.sqrt()
        );
    }
    println!("criterion 1 (quadrature equivalence, 20 pairs, α ∈ {{0,1}}): PASS");
}

#[test]
fn criterion_2_spectral_closed_forms() {
    let z1 = zeta(&GroupAction::Trivial { ambient_dim: 1 }, 1.0, 1e-9).unwrap();
    assert!((z1.value - 1.0 / 12.0).abs() < 1e-9, "zeta trivial: {}", z1.value);

    let g4 = GroupAction::CyclicShift {
        ambient_dim: 1,
        coords: vec![0],
        order: 4,
    };
    let z4 = zeta(&g4, 1.0, 1e-9).unwrap();
    assert!((z4.value - 1.0 / 192.0).abs() < 1e-9, "zeta |G|=4: {}", z4.value);

    let th = theta(1.0).unwrap();
    assert!((th - 1.7726372048).abs() < 1e-9, "theta(1): {th}");

    let shift = GroupAction::ContinuousShift {
        ambient_dim: 2,
        coords: vec![0],
    };
    let tr = trace_heat(&shift, 1.0).unwrap();
    assert!((tr.value - (th - 1.0)).abs() < 1e-10, "trace: {}", tr.value);
    let direct = trace_heat_truncated(&shift, 1.0, 100).unwrap();
    assert!(
        (tr.value - direct.value).abs() < 1e-10,
        "closed form {} vs lattice sum {}",
        tr.value,
        direct.value
    );
    println!("criterion 2 (zeta 1/12 & 1/192, theta(1), shift trace): PASS");
}

#[test]
fn criterion_3_weyl_law() {
    let budget = 20_000_000;
    for d in 1..=3usize {
        let action = GroupAction::Trivial { ambient_dim: d };
        let lambdas: Vec<f64> = (8..=24)
            .step_by(2)
            .map(|k| LAMBDA_UNIT * (k * k) as f64)
            .collect();
        let (slope, _, _) = weyl_fit(&action, &lambdas, budget).unwrap();
        assert!(
            (slope - d as f64 / 2.0).abs() < 0.05,
            "T^{d} slope {slope}"
        );
    }

    // Continuous shift of 2 of 6 axes: counts grow like the 4-dimensional
    // quotient's Weyl law, slope 2 with prefactor ω₄/(2π)⁴·vol(M/G).
    let shift6 = GroupAction::ContinuousShift {
        ambient_dim: 6,
        coords: vec![4, 5],
    };
    let lambdas: Vec<f64> = (10..=26)
        .step_by(2)
        .map(|k| LAMBDA_UNIT * (k * k) as f64)
        .collect();
    let (slope, log_pref, _) = weyl_fit(&shift6, &lambdas, budget).unwrap();
    assert!((slope - 2.0).abs() < 0.05, "T⁶ shift-2 slope {slope}");
    let expected_pref = omega(4) / TWO_PI.powi(4);
    let pref = log_pref.exp();
    assert!(
        (pref / expected_pref - 1.0).abs() < 0.20,
        "prefactor {pref} vs {expected_pref}"
    );

    // Finite shifts: prefactor proportional to the quotient volume 1/m.
    let lambdas: Vec<f64> = (20..=60)
        .step_by(5)
        .map(|k| LAMBDA_UNIT * (k * k) as f64)
        .collect();
    let fit_order = |m: u32| {
        let action = GroupAction::CyclicShift {
            ambient_dim: 2,
            coords: vec![0],
            order: m,
        };
        weyl_fit(&action, &lambdas, budget).unwrap()
    };
    let (_, p2, _) = fit_order(2);
    let (_, p4, _) = fit_order(4);
    let ratio = (p2 - p4).exp();
    assert!(
        (ratio / 2.0 - 1.0).abs() < 0.20,
        "order-2 vs order-4 prefactor ratio {ratio}"
    );
    println!("criterion 3 (Weyl slopes d/2, shift slope 2.0, vol prefactor): PASS");
}

#[test]
fn criterion_4_mmd_exact_expectation() {
    let config = ExperimentConfig::from_toml_str(
        r#"
name = "mmd-uniform"
master_seed = 404
repetitions = 500
n_grid = [64, 256, 1024]
burn_in = 0
estimators = ["invariant"]

[distribution]
kind = "box_sum"

[[distribution.axes]]
law = "uniform"

[[distribution.axes]]
law = "uniform"

[group]
kind = "continuous_shift"
ambient_dim = 2
coords = [0]

[metric]
kind = "mmd"
beta = 1.0

[slice]
sq_max = 20

[output]
dir = "out"
"#,
    )
    .unwrap();
    let curves = run_convergence(&config).unwrap();
    let curve = &curves[0];

    let trace = trace_heat(&config.group, 1.0).unwrap().value;
    for (i, &n) in curve.ns.iter().enumerate() {
        let sq: Vec<f64> = curve.trials[i].iter().map(|v| v * v).collect();
        let r = sq.len() as f64;
        let mean = sq.iter().sum::<f64>() / r;
        let var = sq.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
        let se = (var / r).sqrt();
        let expected = trace / n as f64;
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "n={n}: mean mmd² {mean} vs tr/n {expected} (SE {se})"
        );
    }
    assert!(
        (curve.slope + 0.5).abs() < 0.05,
        "mmd slope {}",
        curve.slope
    );
    println!("criterion 4 (mean mmd² = tr(K;G)/n within 3SE, slope −0.5): PASS");
}

#[test]
fn criterion_5_sobolev_slope_rule_of_thumb() {
    let config = ExperimentConfig::from_toml_str(
        r#"
name = "t3-slope"
master_seed = 505
repetitions = 30
n_grid = [256, 1024, 4096, 16384, 65536]
burn_in = 1
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
sq_max = 64

[cutoff]
mode = "rule_of_thumb"

[output]
dir = "out"
"#,
    )
    .unwrap();
    let curves = run_convergence(&config).unwrap();
    let curve = &curves[0];
    let predicted = curve
        .predicted_slope
        .expect("rule-of-thumb schedule predicts a slope");
    assert!(
        (curve.slope - predicted).abs() < 0.12,
        "fitted {} vs predicted {} (from measured s_eff)",
        curve.slope,
        predicted
    );
    println!(
        "criterion 5 (T³ slope {:.4} within ±0.12 of predicted {:.4}): PASS",
        curve.slope, predicted
    );
}

#[test]
fn criterion_6_finite_group_invariance_gain() {
    let dist_and_group = r#"
[distribution]
kind = "box_sum"

[[distribution.axes]]
law = "box_sum"
summands = 2
width = 0.9
period = 8

[group]
kind = "cyclic_shift"
ambient_dim = 1
coords = [0]
order = 8
"#;
    // L² dominance at every n.
    let l2_config = ExperimentConfig::from_toml_str(&format!(
        r#"
name = "cyclic8-l2"
master_seed = 606
repetitions = 150
n_grid = [32, 128, 512]
burn_in = 0
estimators = ["empirical", "invariant"]
{dist_and_group}
[metric]
kind = "l2"

[slice]
sq_max = 900

[output]
dir = "out"
"#
    ))
    .unwrap();
    let curves = run_convergence(&l2_config).unwrap();
    let (emp, inv) = (&curves[0], &curves[1]);
    for i in 0..emp.ns.len() {
        let se = (emp.stderrs[i].powi(2) + inv.stderrs[i].powi(2)).sqrt();
        assert!(
            inv.means[i] <= emp.means[i] - 2.0 * se,
            "n={}: invariant {} vs empirical {} (SE {})",
            emp.ns[i],
            inv.means[i],
            emp.means[i],
            se
        );
    }

    // Trace-ratio reproduction through measured MMD risks.
    let mmd_config = ExperimentConfig::from_toml_str(&format!(
        r#"
name = "cyclic8-mmd"
master_seed = 607
repetitions = 600
n_grid = [128]
burn_in = 0
estimators = ["empirical", "invariant"]
{dist_and_group}
[metric]
kind = "mmd"
beta = 0.02

[slice]
sq_max = 900

[output]
dir = "out"
"#
    ))
    .unwrap();
    let beta = 0.02;
    let curves = run_convergence(&mmd_config).unwrap();
    let mean_sq = |c: &torus_spectral::harness::runner::ConvergenceCurve| {
        c.trials[0].iter().map(|v| v * v).sum::<f64>() / c.trials[0].len() as f64
    };
    let measured_ratio = mean_sq(&curves[0]) / mean_sq(&curves[1]);
    let tr_id = trace_heat(&GroupAction::Trivial { ambient_dim: 1 }, beta)
        .unwrap()
        .value;
    let tr_g = trace_heat(&mmd_config.group, beta).unwrap().value;
    let expected_ratio = tr_id / tr_g;
    assert!(
        (measured_ratio / expected_ratio - 1.0).abs() < 0.10,
        "measured ratio {measured_ratio} vs tr(K;id)/tr(K;G) = {expected_ratio}"
    );
    println!(
        "criterion 6 (L² dominance at every n; trace ratio {:.2} vs {:.2} within 10%): PASS",
        measured_ratio, expected_ratio
    );
}

#[test]
fn criterion_7_figure_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let opts = Fig1Options {
        out_dir: dir.path().to_path_buf(),
        ..Fig1Options::default()
    };
    let report = reproduce_fig1(&opts).unwrap();

    let csv = String::from_utf8(report.csv.clone()).unwrap();
    assert!(csv.starts_with("estimator,n,mean,stderr,slope,slope_stderr"));
    assert!(report.csv_path.exists() && report.svg_path.exists());
    let svg = std::fs::read_to_string(&report.svg_path).unwrap();
    assert!(svg.contains("<svg") && svg.contains("version=\"1.1\""));
    assert_eq!(svg.matches("<polyline").count(), 3, "three curve families");
    assert!(svg.contains("<text"), "legend present");

    for o in &report.orderings {
        assert!(
            o.inv_below_aug && o.aug_below_non,
            "ordering violated at n={}",
            o.n
        );
        if o.n >= 1024 {
            assert!(o.separated_2se, "2SE separation missing at n={}", o.n);
        }
    }

    // Fixed-cutoff mode: the three curves are parallel on log-log axes.
    let fixed_opts = Fig1Options {
        out_dir: dir.path().to_path_buf(),
        repetitions: 8,
        fixed_lambda: Some(default_fixed_lambda()),
        ..Fig1Options::default()
    };
    let fixed = reproduce_fig1(&fixed_opts).unwrap();
    let slopes: Vec<f64> = fixed.curves.iter().map(|c| c.slope).collect();
    for i in 0..slopes.len() {
        for j in i + 1..slopes.len() {
            assert!(
                (slopes[i] - slopes[j]).abs() < 0.08,
                "fixed-Λ_T slopes not parallel: {slopes:?}"
            );
        }
    }
    println!(
        "criterion 7 (orderings with 2SE at n ≥ 1024; fixed-Λ_T slopes {:?} parallel): PASS",
        slopes
    );
}

#[test]
fn criterion_8_determinism() {
    let toml = r#"
name = "determinism"
master_seed = 808
repetitions = 6
n_grid = [16, 64, 256]
burn_in = 0
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
kind = "sobolev"
alpha = 1.0

[slice]
sq_max = 16

[output]
dir = "out"
"#;
    let config = ExperimentConfig::from_toml_str(toml).unwrap();
    let run_with_threads = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| curves_to_csv(&run_convergence(&config).unwrap()).unwrap())
    };
    let a = run_with_threads(1);
    let b = run_with_threads(1);
    assert_eq!(a, b, "rerun changed CSV bytes");
    let c = run_with_threads(3);
    assert_eq!(a, c, "worker count changed CSV bytes");
    println!("criterion 8 (byte-identical CSV across reruns and worker counts): PASS");
}

/// The squared Sobolev risk splits exactly into the below-cutoff estimation
/// head and the above-cutoff oracle tail.
#[test]
fn risk_split_identity() {
    use torus_spectral::dist::{AxisLaw, BoxSumSpec};
    use torus_spectral::divergence::sobolev_ipm_vs_oracle;
    use torus_spectral::estimators::{empirical_coefficients, truncate};

    let dist = BoxSumSpec::isotropic(2, 2, 0.5);
    let slice = Arc::new(enumerate_spectrum(2, LAMBDA_UNIT * 25.0, 1_000_000).unwrap());
    let samples = dist.sample(200, 99);
    let field = empirical_coefficients(&samples, &slice).unwrap();
    let lambda_t = LAMBDA_UNIT * 9.0;
    let truncated = truncate(&field, lambda_t).unwrap();

    let full = sobolev_ipm_vs_oracle(&truncated, &dist, 1.0, 1e-9, 50_000_000).unwrap();

    // Head: estimation error below the cutoff.
    let oracle_values = CoefficientField::from_oracle(slice.clone(), &dist).values;
    let mut head = 0.0;
    for i in 1..slice.len() {
        let oracle = oracle_values[i];
        let est = if slice.lambdas[i] < lambda_t {
            field.values[i]
        } else {
            0.0
        };
        head += (est - oracle) * (est - oracle) / slice.lambdas[i];
    }
    // Tail beyond the slice from the certified interval midpoint.
    let tail_mid = 0.5 * (full.tail_lo + full.tail_hi);
    assert!(
        (full.value * full.value - (head + tail_mid)).abs() < 1e-12,
        "risk split mismatch: {} vs {}",
        full.value * full.value,
        head + tail_mid
    );

    // Sanity: the axiom-checked field-vs-field route agrees on the head.
    let oracle_field = CoefficientField::from_oracle(slice.clone(), &dist);
    let pairwise = mmd(
        &truncated,
        &oracle_field,
        &SpectralKernel::Custom {
            weights: slice
                .lambdas
                .iter()
                .map(|&l| if l > 0.0 { 1.0 / l } else { 0.0 })
                .collect(),
        },
    )
    .unwrap();
    assert!((pairwise.value * pairwise.value - head).abs() < 1e-12);
}
