//! Samplable reference distributions on `T^d` with exact closed-form Fourier
//! coefficients: wrapped sums of uniforms (products across axes, optionally
//! compressed to period `1/q` or replaced by the uniform law per axis) and
//! Dirac mixtures.
//!
//! Complex convention: `c_v = E[exp(-2πi⟨v,X⟩)]`. Real-basis values follow
//! `cosine ↦ √2·Re c_v`, `sine ↦ -√2·Im c_v`; the constant coefficient is the
//! total mass 1. A worked 1-summand example lives in the tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::rng_from_parts;
use crate::spectrum::{BasisElement, BasisKind, LAMBDA_UNIT};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

/// Marginal law of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum AxisLaw {
    /// Uniform on `[0,1)`; all nonzero frequencies carry coefficient 0.
    Uniform,
    /// `X = (B + J)/period` with `B` the wrapped sum of `summands` i.i.d.
    /// uniforms on `[0,width]` and `J` uniform on `{0,…,period-1}`.
    /// `period = 1` is the plain wrapped sum.
    BoxSum {
        summands: u32,
        width: f64,
        #[serde(default = "default_period")]
        period: u32,
    },
}

fn default_period() -> u32 {
    1
}

impl AxisLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            AxisLaw::Uniform => Ok(()),
            AxisLaw::BoxSum {
                summands,
                width,
                period,
            } => {
                if *summands < 1 {
                    return Err(Error::InvalidArgument("summands must be ≥ 1".into()));
                }
                if !(*width > 0.0 && *width <= 1.0) {
                    return Err(Error::InvalidArgument("width must be in (0,1]".into()));
                }
                if *period < 1 {
                    return Err(Error::InvalidArgument("period must be ≥ 1".into()));
                }
                Ok(())
            }
        }
    }

    /// Complex coefficient of the marginal at integer frequency `k`.
    fn complex_coefficient(&self, k: i64) -> (f64, f64) {
        if k == 0 {
            return (1.0, 0.0);
        }
        match self {
            AxisLaw::Uniform => (0.0, 0.0),
            AxisLaw::BoxSum {
                summands,
                width,
                period,
            } => {
                let q = *period as i64;
                if k % q != 0 {
                    return (0.0, 0.0);
                }
                let kb = (k / q) as f64;
                // (e^{-πi a k} sinc(a k))^m with sinc(t) = sin(πt)/(πt).
                let t = *width * kb;
                let modulus = sinc(t);
                let phase = -PI * t;
                let m = *summands as i32;
                // (modulus · e^{iφ})^m
                let r = modulus.abs().powi(m);
                let base_phase = if modulus < 0.0 { phase + PI } else { phase };
                let total_phase = base_phase * m as f64;
                (r * total_phase.cos(), r * total_phase.sin())
            }
        }
    }

    /// Squared-modulus weight `g(k) = |c_k|²`.
    fn sq_weight(&self, k: i64) -> f64 {
        let (re, im) = self.complex_coefficient(k);
        re * re + im * im
    }

    /// `(total, env_c, env_p)`: `Σ_k g(k) ≤ total` and `g(k) ≤ env_c·k^{env_p}`
    /// for every `k ≥ 1`. `None` when the axis is pinned to zero frequency.
    fn weight_envelope(&self) -> Option<(f64, f64, f64)> {
        match self {
            AxisLaw::Uniform => None,
            AxisLaw::BoxSum {
                summands,
                width,
                period,
            } => {
                // Integer width makes sinc(width·k) vanish at every nonzero
                // frequency: the axis is uniform in law and carries no modes.
                if width.fract() == 0.0 {
                    return None;
                }
                let m = *summands as f64;
                let q = *period as f64;
                // |c_k| ≤ (q/(π·width·k))^m for q | k, else 0.
                let env_c = (q / (PI * width)).powf(2.0 * m);
                let env_p = -2.0 * m;
                // Total: 1 + 2 Σ_{j≥1} g(qj), summed exactly while terms matter
                // plus an integral-comparison remainder.
                let mut total = 1.0;
                let mut j = 1i64;
                loop {
                    let term = self.sq_weight(j * *period as i64);
                    total += 2.0 * term;
                    if j > 8 && term < 1e-18 {
                        break;
                    }
                    if j > 100_000 {
                        // Remainder of Σ (1/(π·width·j))^{2m} from j on.
                        let c = (1.0 / (PI * width)).powf(2.0 * m);
                        total += 2.0 * c * (j as f64).powf(1.0 - 2.0 * m) / (2.0 * m - 1.0);
                        break;
                    }
                    j += 1;
                }
                Some((total, env_c, env_p))
            }
        }
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            AxisLaw::Uniform => rng.gen::<f64>(),
            AxisLaw::BoxSum {
                summands,
                width,
                period,
            } => {
                let mut s = 0.0;
                for _ in 0..*summands {
                    s += rng.gen::<f64>() * width;
                }
                let b = s.fract();
                let j = rng.gen_range(0..*period);
                (b + j as f64) / *period as f64
            }
        }
    }

    /// Closed-form marginal density (wrapped Irwin-Hall, compressed by the
    /// period). Requires `summands ≤ 12`.
    fn density_at(&self, x: f64) -> Result<f64> {
        match self {
            AxisLaw::Uniform => Ok(1.0),
            AxisLaw::BoxSum {
                summands,
                width,
                period,
            } => {
                if *summands > 12 {
                    return Err(Error::InvalidArgument(
                        "closed-form density supported for ≤ 12 summands".into(),
                    ));
                }
                let t = (x * *period as f64).fract();
                Ok(wrapped_boxsum_density(*summands, *width, t))
            }
        }
    }

    /// Marginal CDF on `[0,1)`.
    fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            AxisLaw::Uniform => Ok(x.clamp(0.0, 1.0)),
            AxisLaw::BoxSum {
                summands,
                width,
                period,
            } => {
                if *summands > 12 {
                    return Err(Error::InvalidArgument(
                        "closed-form CDF supported for ≤ 12 summands".into(),
                    ));
                }
                let q = *period as f64;
                let xq = (x * q).clamp(0.0, q);
                let whole = xq.floor().min(q - 1.0);
                let frac = xq - whole;
                Ok((whole + wrapped_boxsum_cdf(*summands, *width, frac)) / q)
            }
        }
    }
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Irwin-Hall density of the sum of `m` uniforms on `[0,1]`, at `s ∈ [0,m]`.
fn irwin_hall_density(m: u32, s: f64) -> f64 {
    if s < 0.0 || s > m as f64 {
        return 0.0;
    }
    let mut fact = 1.0f64;
    for i in 1..m {
        fact *= i as f64;
    }
    let mut acc = 0.0;
    for k in 0..=(s.floor() as u32).min(m) {
        let term = binomial(m, k) * (s - k as f64).max(0.0).powi(m as i32 - 1);
        acc += if k % 2 == 0 { term } else { -term };
    }
    acc / fact
}

/// Irwin-Hall CDF at `s`.
fn irwin_hall_cdf(m: u32, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= m as f64 {
        return 1.0;
    }
    let mut fact = 1.0f64;
    for i in 1..=m {
        fact *= i as f64;
    }
    let mut acc = 0.0;
    for k in 0..=(s.floor() as u32).min(m) {
        let term = binomial(m, k) * (s - k as f64).max(0.0).powi(m as i32);
        acc += if k % 2 == 0 { term } else { -term };
    }
    acc / fact
}

/// Density at `t ∈ [0,1)` of `(Σ_{k=1}^m U_k) mod 1` with `U_k ~ U[0,a]`.
fn wrapped_boxsum_density(m: u32, a: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    let mut shift = 0.0;
    while shift < m as f64 * a {
        acc += irwin_hall_density(m, (t + shift) / a) / a;
        shift += 1.0;
    }
    acc
}

fn wrapped_boxsum_cdf(m: u32, a: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    let mut shift = 0.0;
    while shift < m as f64 * a {
        acc += irwin_hall_cdf(m, (t + shift) / a) - irwin_hall_cdf(m, shift / a);
        shift += 1.0;
    }
    acc
}

/// Product distribution over axes, each a wrapped uniform sum (or uniform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSumSpec {
    pub axes: Vec<AxisLaw>,
}

impl BoxSumSpec {
    /// Isotropic spec: every axis the wrapped sum of `m` uniforms on `[0,a]`.
    pub fn isotropic(dim: usize, summands: u32, width: f64) -> Self {
        BoxSumSpec {
            axes: vec![
                AxisLaw::BoxSum {
                    summands,
                    width,
                    period: 1,
                };
                dim
            ],
        }
    }

    /// Marks the given axes as uniform (the invariant tail of a shift action).
    pub fn with_uniform_tail(mut self, axes: &[usize]) -> Self {
        for &j in axes {
            self.axes[j] = AxisLaw::Uniform;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::InvalidArgument("dimension must be ≥ 1".into()));
        }
        for a in &self.axes {
            a.validate()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rng_from_parts(seed, &[]);
        (0..n)
            .map(|_| self.axes.iter().map(|a| a.sample_into(&mut rng)).collect())
            .collect()
    }

    /// Closed-form density (product of wrapped Irwin-Hall marginals).
    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut acc = 1.0;
        for (law, &xi) in self.axes.iter().zip(x) {
            acc *= law.density_at(xi)?;
        }
        Ok(acc)
    }

    /// Marginal CDF of one axis, for goodness-of-fit checks.
    pub fn axis_cdf(&self, axis: usize, x: f64) -> Result<f64> {
        self.axes[axis].cdf(x)
    }
}

/// Weighted atoms on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracMixture {
    pub atoms: Vec<(Vec<f64>, f64)>,
}

impl DiracMixture {
    pub fn single(point: Vec<f64>) -> Self {
        DiracMixture {
            atoms: vec![(point, 1.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one atom".into()));
        }
        let d = self.atoms[0].0.len();
        let mut mass = 0.0;
        for (p, w) in &self.atoms {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            if *w < 0.0 {
                return Err(Error::InvalidArgument("weights must be ≥ 0".into()));
            }
            mass += w;
        }
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1, got {mass}"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].0.len()
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rng_from_parts(seed, &[]);
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (p, w) in &self.atoms {
                    acc += w;
                    if u < acc {
                        return p.clone();
                    }
                }
                self.atoms.last().unwrap().0.clone()
            })
            .collect()
    }
}

/// Exact Fourier data of a ground-truth distribution.
pub trait CoefficientOracle: Sync {
    fn dim(&self) -> usize;

    /// `c_v = E[exp(-2πi⟨v,X⟩)]` as `(re, im)`.
    fn complex_coefficient(&self, v: &[i64]) -> (f64, f64);

    /// Exact real-basis coefficient of a basis element.
    fn real_coefficient(&self, e: &BasisElement) -> f64 {
        match e.kind {
            BasisKind::Constant => 1.0,
            BasisKind::Cosine => SQRT_2 * self.complex_coefficient(&e.freq.0).0,
            BasisKind::Sine => -SQRT_2 * self.complex_coefficient(&e.freq.0).1,
        }
    }

    fn sq_modulus(&self, v: &[i64]) -> f64 {
        let (re, im) = self.complex_coefficient(v);
        re * re + im * im
    }

    /// Per-axis factorization of `|c_v|²`, when available. Enables fast
    /// certified tail sums.
    fn axis_weights(&self) -> Option<Vec<AxisWeights>> {
        None
    }

    /// Global bound on `|c_v|²`, used by the fallback shell remainder.
    fn sq_modulus_sup(&self) -> f64 {
        1.0
    }

    /// Closed-form density, when the distribution has one inside `L²`.
    fn density_at(&self, x: &[f64]) -> Option<Result<f64>> {
        let _ = x;
        None
    }
}

/// Factorized weight data for one axis: `g(k) = |c^{(axis)}_k|²`.
pub struct AxisWeights {
    /// `g(k)` evaluable at any `k`.
    pub weight: Box<dyn Fn(i64) -> f64 + Sync + Send>,
    /// `Σ_{k∈Z} g(k)` (upper bound). `None` marks an axis pinned to `k = 0`.
    pub envelope: Option<(f64, f64, f64)>,
}

impl CoefficientOracle for BoxSumSpec {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn complex_coefficient(&self, v: &[i64]) -> (f64, f64) {
        debug_assert_eq!(v.len(), self.dim());
        let mut re = 1.0f64;
        let mut im = 0.0f64;
        for (law, &k) in self.axes.iter().zip(v) {
            let (cr, ci) = law.complex_coefficient(k);
            if cr == 0.0 && ci == 0.0 {
                return (0.0, 0.0);
            }
            let (nre, nim) = (re * cr - im * ci, re * ci + im * cr);
            re = nre;
            im = nim;
        }
        (re, im)
    }

    fn axis_weights(&self) -> Option<Vec<AxisWeights>> {
        Some(
            self.axes
                .iter()
                .map(|law| {
                    let law = law.clone();
                    let envelope = law.weight_envelope();
                    AxisWeights {
                        weight: Box::new(move |k| law.sq_weight(k)),
                        envelope,
                    }
                })
                .collect(),
        )
    }

    fn density_at(&self, x: &[f64]) -> Option<Result<f64>> {
        Some(BoxSumSpec::density_at(self, x))
    }
}

impl CoefficientOracle for DiracMixture {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn complex_coefficient(&self, v: &[i64]) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (p, w) in &self.atoms {
            let phase: f64 = v.iter().zip(p).map(|(&k, &x)| k as f64 * x).sum();
            let arg = -2.0 * PI * phase;
            re += w * arg.cos();
            im += w * arg.sin();
        }
        (re, im)
    }
}

/// Result of a weighted coefficient sum with a certified tail.
#[derive(Debug, Clone, Copy)]
pub struct TailSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// Computes `Σ_v |c_v|²·λ(v)^w` over complex modes with `‖v‖² ∈ (sq_lo, ∞)`,
/// to relative tolerance `rel_tol`: an exact head plus a certified analytic
/// remainder. `sq_lo = 0` includes every nonzero mode.
pub fn weighted_mode_sum(
    oracle: &dyn CoefficientOracle,
    w: f64,
    sq_lo: i64,
    rel_tol: f64,
    budget: u64,
) -> Result<TailSum> {
    match oracle.axis_weights() {
        Some(axes) => factorized_mode_sum(&axes, w, sq_lo, rel_tol, budget),
        None => direct_mode_sum(oracle, w, sq_lo, rel_tol, budget),
    }
}

fn lambda_pow(sq: f64, w: f64) -> f64 {
    (LAMBDA_UNIT * sq).powf(w)
}

/// Factorized route: dynamic programming over the exact distribution of `‖v‖²`.
fn factorized_mode_sum(
    axes: &[AxisWeights],
    w: f64,
    sq_lo: i64,
    rel_tol: f64,
    budget: u64,
) -> Result<TailSum> {
    let active: Vec<&AxisWeights> = axes.iter().filter(|a| a.envelope.is_some()).collect();
    if active.is_empty() {
        return Ok(TailSum {
            value: 0.0,
            tail_bound: 0.0,
        });
    }
    // Remainder after the DP horizon s_max: modes with ‖v‖∞ = F > F0 where
    // F0 = floor(√(s_max/d)); the per-shell sum is bounded by
    // 2 Σ_j g_j(F)·Π_{i≠j} G_i, with λ^w bounded over the shell.
    let d_act = active.len();
    if d_act == 1 {
        return single_axis_mode_sum(active[0], w, sq_lo, rel_tol, budget);
    }
    let totals: Vec<f64> = active.iter().map(|a| a.envelope.unwrap().0).collect();
    let prod_total: f64 = totals.iter().product();
    let remainder_bound = |f0: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (j, a) in active.iter().enumerate() {
            let (_, env_c, env_p) = a.envelope.unwrap();
            // λ ∈ [4π²F², 4π²dF²] on the shell; pick the side maximizing λ^w.
            let (lam_c, lam_p) = if w >= 0.0 {
                ((LAMBDA_UNIT * d_act as f64).powf(w), 2.0 * w)
            } else {
                (LAMBDA_UNIT.powf(w), 2.0 * w)
            };
            let p = env_p + lam_p;
            if p >= -1.0 {
                return Err(Error::Divergent(format!(
                    "shell envelope exponent {p} ≥ -1 on axis {j}"
                )));
            }
            let c = 2.0 * env_c * lam_c * prod_total / totals[j];
            acc += c * f0.powf(p + 1.0) / (-p - 1.0);
        }
        Ok(acc)
    };

    let mut s_max = ((sq_lo as f64).max(16.0) * 4.0) as i64;
    loop {
        if s_max as u64 > budget {
            return Err(Error::Divergent(
                "tail sum did not converge within the element budget".into(),
            ));
        }
        // dp[s] = Σ over the first j axes of Π g over vectors with ‖v‖² = s.
        let len = (s_max + 1) as usize;
        let mut dp = vec![0.0f64; len];
        dp[0] = 1.0;
        for a in &active {
            let mut next = vec![0.0f64; len];
            let kmax = (s_max as f64).sqrt() as i64 + 1;
            for k in -kmax..=kmax {
                let g = (a.weight)(k);
                if g == 0.0 {
                    continue;
                }
                let ksq = (k * k) as usize;
                if ksq >= len {
                    continue;
                }
                for s in 0..len - ksq {
                    if dp[s] != 0.0 {
                        next[s + ksq] += g * dp[s];
                    }
                }
            }
            dp = next;
        }
        let mut head = 0.0;
        for s in (sq_lo.max(0) + 1) as usize..len {
            if dp[s] != 0.0 {
                head += dp[s] * lambda_pow(s as f64, w);
            }
        }
        let f0 = (s_max as f64 / d_act as f64).sqrt().floor().max(1.0);
        let tail = remainder_bound(f0)?;
        if tail <= rel_tol * head.max(f64::MIN_POSITIVE) || tail < 1e-300 {
            return Ok(TailSum {
                value: head,
                tail_bound: tail,
            });
        }
        s_max *= 2;
    }
}

/// One active axis: the mode sum is a plain 1-D frequency scan, so sum it
/// directly to a horizon with the envelope integral as remainder. Much
/// cheaper than the DP when sparse support (period compression) forces a
/// long horizon.
fn single_axis_mode_sum(
    axis: &AxisWeights,
    w: f64,
    sq_lo: i64,
    rel_tol: f64,
    budget: u64,
) -> Result<TailSum> {
    let (_, env_c, env_p) = axis.envelope.unwrap();
    // On T¹, λ(k) = 4π²k² exactly, so λ^w contributes k^{2w}.
    let p = env_p + 2.0 * w;
    if p >= -1.0 {
        return Err(Error::Divergent(format!(
            "single-axis envelope exponent {p} ≥ -1"
        )));
    }
    let k_lo = (sq_lo.max(0) as f64).sqrt().floor() as i64;
    let mut head = 0.0;
    let mut k = k_lo;
    let mut horizon = (k_lo + 16) * 4;
    loop {
        if horizon as u64 > budget {
            return Err(Error::Divergent(
                "tail sum did not converge within the element budget".into(),
            ));
        }
        while k < horizon {
            k += 1;
            if k * k <= sq_lo {
                continue;
            }
            let g = (axis.weight)(k);
            if g != 0.0 {
                head += 2.0 * g * lambda_pow((k * k) as f64, w);
            }
        }
        let f = horizon as f64;
        let tail = 2.0 * env_c * LAMBDA_UNIT.powf(w) * f.powf(p + 1.0) / (-p - 1.0);
        if tail <= rel_tol * head.max(f64::MIN_POSITIVE) || tail < 1e-300 {
            return Ok(TailSum {
                value: head,
                tail_bound: tail,
            });
        }
        horizon *= 2;
    }
}

/// Fallback route: direct ℓ∞-shell enumeration with a count-based remainder.
fn direct_mode_sum(
    oracle: &dyn CoefficientOracle,
    w: f64,
    sq_lo: i64,
    rel_tol: f64,
    budget: u64,
) -> Result<TailSum> {
    let d = oracle.dim();
    let sup = oracle.sq_modulus_sup();
    let p = (d - 1) as f64 + 2.0 * w;
    if p >= -1.0 {
        return Err(Error::Divergent(format!(
            "count-based shell exponent {p} ≥ -1; tail does not converge"
        )));
    }
    let remainder = |f0: f64| -> f64 {
        let c = 2.0 * d as f64 * 3.0f64.powi(d as i32 - 1) * sup * LAMBDA_UNIT.powf(w);
        c * f0.powf(p + 1.0) / (-p - 1.0)
    };
    let mut head = 0.0;
    let mut enumerated = 0u64;
    let mut f = 1i64;
    loop {
        // All v with ‖v‖∞ = f and ‖v‖² > sq_lo.
        let mut shell_sum = 0.0;
        let mut v = vec![-f; d];
        'grid: loop {
            if v.iter().any(|&x| x.abs() == f) {
                let sq: i64 = v.iter().map(|x| x * x).sum();
                if sq > sq_lo {
                    let g = oracle.sq_modulus(&v);
                    if g != 0.0 {
                        shell_sum += g * lambda_pow(sq as f64, w);
                    }
                }
                enumerated += 1;
                if enumerated > budget {
                    return Err(Error::Divergent(
                        "tail sum did not converge within the element budget".into(),
                    ));
                }
            }
            for j in 0..d {
                v[j] += 1;
                if v[j] <= f {
                    continue 'grid;
                }
                v[j] = -f;
            }
            break;
        }
        head += shell_sum;
        let covered = f * f > sq_lo; // every remaining mode lies beyond sq_lo
        if covered {
            let tail = remainder(f as f64);
            if tail <= rel_tol * head.max(f64::MIN_POSITIVE) || tail < 1e-300 {
                return Ok(TailSum {
                    value: head,
                    tail_bound: tail,
                });
            }
        }
        f += 1;
    }
}

/// Squared Sobolev norm `‖dμ/dx‖²_{H^s} = 1 + Σ_{v≠0} λ(v)^s |c_v|²` with a
/// certified tail, or a divergence signal.
pub fn sobolev_norm_sq(
    oracle: &dyn CoefficientOracle,
    s: f64,
    rel_tol: f64,
    budget: u64,
) -> Result<TailSum> {
    let sum = weighted_mode_sum(oracle, s, 0, rel_tol, budget)?;
    Ok(TailSum {
        value: 1.0 + sum.value,
        tail_bound: sum.tail_bound,
    })
}

/// Truncated squared Sobolev norm over modes with `λ ≤ lambda_max` (exact
/// finite sum; the plug-in consumed by the rule-of-thumb cutoff).
pub fn sobolev_norm_sq_truncated(
    oracle: &dyn CoefficientOracle,
    s: f64,
    lambda_max: f64,
    budget: u64,
) -> Result<f64> {
    let sq_cut = crate::spectrum::sq_norm_bound(lambda_max);
    match oracle.axis_weights() {
        Some(axes) => {
            let active: Vec<&AxisWeights> = axes.iter().filter(|a| a.envelope.is_some()).collect();
            if active.is_empty() {
                return Ok(1.0);
            }
            let len = (sq_cut + 1).max(1) as usize;
            if len as u64 > budget {
                return Err(Error::BudgetExceeded {
                    estimate: len as u64,
                    budget,
                });
            }
            let mut dp = vec![0.0f64; len];
            dp[0] = 1.0;
            for a in &active {
                let mut next = vec![0.0f64; len];
                let kmax = (sq_cut as f64).sqrt() as i64 + 1;
                for k in -kmax..=kmax {
                    let g = (a.weight)(k);
                    if g == 0.0 {
                        continue;
                    }
                    let ksq = (k * k) as usize;
                    if ksq >= len {
                        continue;
                    }
                    for sq in 0..len - ksq {
                        if dp[sq] != 0.0 {
                            next[sq + ksq] += g * dp[sq];
                        }
                    }
                }
                dp = next;
            }
            let mut acc = 1.0;
            for (sq, &g) in dp.iter().enumerate().skip(1) {
                if g != 0.0 {
                    acc += g * lambda_pow(sq as f64, s);
                }
            }
            Ok(acc)
        }
        None => Err(Error::InvalidArgument(
            "truncated Sobolev norm needs factorized coefficients".into(),
        )),
    }
}
