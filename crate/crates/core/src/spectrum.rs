//! Real orthonormal Laplace-Beltrami eigenbasis of the unit-volume flat torus
//! `T^d = [0,1)^d`.
//!
//! Eigenfunctions are indexed by lattice frequencies `v ∈ Z^d`. The real form
//! keeps one canonical representative per `{v, -v}` pair (first nonzero entry
//! positive) and carries a cosine/sine element for each, plus the constant.
//! Eigenvalues follow the unit-circumference convention `λ(v) = 4π²‖v‖²`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// `4π²`, the eigenvalue of a unit frequency.
pub const LAMBDA_UNIT: f64 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;

/// Default cap on the number of enumerated basis elements.
pub const DEFAULT_ELEMENT_BUDGET: u64 = 10_000_000;

/// A lattice frequency `v ∈ Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyVector(pub Vec<i64>);

impl FrequencyVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// Squared Euclidean norm `‖v‖²` (exact integer).
    pub fn sq_norm(&self) -> i64 {
        self.0.iter().map(|&v| v * v).sum()
    }

    /// True when the first nonzero entry is positive (or `v = 0`).
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&v| v != 0) {
            Some(&v) => v > 0,
            None => true,
        }
    }

    /// The canonical representative of `{v, -v}` together with the sign flip
    /// applied (`+1` if unchanged, `-1` if negated).
    pub fn canonicalize(&self) -> (FrequencyVector, i64) {
        if self.is_canonical() {
            (self.clone(), 1)
        } else {
            (FrequencyVector(self.0.iter().map(|&v| -v).collect()), -1)
        }
    }
}

/// Trigonometric kind of a real basis element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisKind {
    Constant,
    Cosine,
    Sine,
}

impl BasisKind {
    pub fn label(self) -> &'static str {
        match self {
            BasisKind::Constant => "const",
            BasisKind::Cosine => "cos",
            BasisKind::Sine => "sin",
        }
    }
}

/// One real eigenfunction: `1`, `√2 cos(2π⟨v,x⟩)` or `√2 sin(2π⟨v,x⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    pub freq: FrequencyVector,
    pub kind: BasisKind,
}

impl BasisElement {
    pub fn constant(dim: usize) -> Self {
        BasisElement {
            freq: FrequencyVector(vec![0; dim]),
            kind: BasisKind::Constant,
        }
    }

    pub fn eigenvalue(&self) -> f64 {
        eigenvalue(&self.freq)
    }
}

/// `λ(v) = 4π²·Σ v_j²`.
pub fn eigenvalue(freq: &FrequencyVector) -> f64 {
    LAMBDA_UNIT * freq.sq_norm() as f64
}

/// Converts an eigenvalue cutoff to the integer bound on `‖v‖²`.
///
/// A small relative slack keeps cutoffs of the form `4π²·k` stable against
/// floating-point representation of the multiple.
pub(crate) fn sq_norm_bound(lambda: f64) -> i64 {
    if lambda < 0.0 {
        return -1;
    }
    let x = lambda / LAMBDA_UNIT;
    (x * (1.0 + 1e-12) + 1e-9).floor() as i64
}

fn ball_volume(dim: usize) -> f64 {
    // ω_d = π^{d/2} / Γ(d/2 + 1), via the two-step recurrence ω_d = 2π/d ω_{d-2}.
    let mut v = if dim % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if dim % 2 == 0 { 2 } else { 3 };
    while k <= dim {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Unit-ball volume `ω_d`.
pub fn omega(dim: usize) -> f64 {
    ball_volume(dim)
}

/// Counts `v ∈ Z^k` with `Σ w_j v_j² ≤ bound`, for positive integer weights.
pub(crate) struct WeightedLatticeCounter {
    weights: Vec<i64>,
    memo: HashMap<(usize, i64), u64>,
}

impl WeightedLatticeCounter {
    pub fn new(weights: &[i64]) -> Self {
        WeightedLatticeCounter {
            weights: weights.to_vec(),
            memo: HashMap::new(),
        }
    }

    pub fn count(&mut self, bound: i64) -> u64 {
        self.count_from(0, bound)
    }

    fn count_from(&mut self, axis: usize, bound: i64) -> u64 {
        if bound < 0 {
            return 0;
        }
        if axis == self.weights.len() {
            return 1;
        }
        if let Some(&c) = self.memo.get(&(axis, bound)) {
            return c;
        }
        let w = self.weights[axis];
        let vmax = ((bound / w) as f64).sqrt() as i64 + 1;
        let mut total = 0u64;
        for v in -vmax..=vmax {
            let rem = bound - w * v * v;
            if rem >= 0 {
                total += self.count_from(axis + 1, rem);
            }
        }
        self.memo.insert((axis, bound), total);
        total
    }
}

/// Ball-volume estimate of the weighted lattice count, used for the budget guard.
pub(crate) fn count_estimate(weights: &[i64], bound: i64) -> f64 {
    if bound < 0 {
        return 0.0;
    }
    let d = weights.len();
    let mut vol = ball_volume(d);
    for &w in weights {
        vol *= (bound as f64 / w as f64).sqrt();
    }
    vol.max(1.0)
}

pub(crate) fn budget_guard(weights: &[i64], bound: i64, budget: u64) -> Result<()> {
    let est = count_estimate(weights, bound);
    if est > budget as f64 {
        return Err(Error::BudgetExceeded {
            estimate: est as u64,
            budget,
        });
    }
    Ok(())
}

/// Number of lattice points `v ∈ Z^d` with `λ(v) ≤ lambda` (complex-mode
/// count, includes `v = 0`).
pub fn weyl_count(d: usize, lambda: f64, budget: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be ≥ 1".into()));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidArgument("lambda must be ≥ 0".into()));
    }
    let bound = sq_norm_bound(lambda);
    let weights = vec![1i64; d];
    budget_guard(&weights, bound, budget)?;
    Ok(WeightedLatticeCounter::new(&weights).count(bound))
}

/// An eigenvalue-sorted set of real basis elements with `λ ≤ lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub dim: usize,
    pub lambda_max: f64,
    pub elements: Vec<BasisElement>,
    /// Eigenvalue per element, same order as `elements`.
    pub lambdas: Vec<f64>,
    /// Per-axis maximum of `|v_j|` over the slice.
    pub freq_max: Vec<i64>,
}

impl SpectrumSlice {
    /// Builds a slice from canonical frequencies: constant first, then a
    /// cosine/sine pair per frequency, sorted by eigenvalue then
    /// lexicographically.
    pub fn from_canonical_freqs(dim: usize, lambda_max: f64, mut freqs: Vec<FrequencyVector>) -> Self {
        freqs.sort_by(|a, b| a.sq_norm().cmp(&b.sq_norm()).then_with(|| a.cmp(b)));
        let mut elements = Vec::with_capacity(2 * freqs.len() + 1);
        elements.push(BasisElement::constant(dim));
        for v in freqs {
            debug_assert!(v.is_canonical() && !v.is_zero());
            elements.push(BasisElement {
                freq: v.clone(),
                kind: BasisKind::Cosine,
            });
            elements.push(BasisElement {
                freq: v,
                kind: BasisKind::Sine,
            });
        }
        let lambdas: Vec<f64> = elements.iter().map(|e| e.eigenvalue()).collect();
        let mut freq_max = vec![0i64; dim];
        for e in &elements {
            for (j, &v) in e.freq.0.iter().enumerate() {
                freq_max[j] = freq_max[j].max(v.abs());
            }
        }
        SpectrumSlice {
            dim,
            lambda_max,
            elements,
            lambdas,
            freq_max,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Cheap structural compatibility check between coefficient fields.
    pub fn same_as(&self, other: &SpectrumSlice) -> bool {
        self.dim == other.dim
            && self.lambda_max.to_bits() == other.lambda_max.to_bits()
            && self.elements.len() == other.elements.len()
    }
}

/// Enumerates all canonical nonzero frequencies with `Σ w_j (v_j·s_j)² ≤ bound`
/// where axis `j` ranges over multiples of `step[j]` (`step = 0` pins the axis
/// to zero). Used for both the full and the invariant-restricted spectra.
fn enumerate_canonical(dim: usize, bound: i64, step: &[i64]) -> Vec<FrequencyVector> {
    let mut out = Vec::new();
    let mut current = vec![0i64; dim];
    // first_nonzero: None while all entries so far are zero.
    fn recurse(
        axis: usize,
        dim: usize,
        remaining: i64,
        leading_zero: bool,
        step: &[i64],
        current: &mut Vec<i64>,
        out: &mut Vec<FrequencyVector>,
    ) {
        if axis == dim {
            if !leading_zero {
                out.push(FrequencyVector(current.clone()));
            }
            return;
        }
        let s = step[axis];
        if s == 0 {
            current[axis] = 0;
            recurse(axis + 1, dim, remaining, leading_zero, step, current, out);
            return;
        }
        let vmax = (remaining as f64).sqrt() as i64 / s + 1;
        // Canonical rule: first nonzero entry positive.
        let lo = if leading_zero { 0 } else { -vmax };
        for k in lo..=vmax {
            let v = k * s;
            let rem = remaining - v * v;
            if rem < 0 {
                continue;
            }
            current[axis] = v;
            recurse(axis + 1, dim, rem, leading_zero && v == 0, step, current, out);
        }
        current[axis] = 0;
    }
    recurse(0, dim, bound, true, step, &mut current, &mut out);
    out
}

/// Enumerates the full spectrum slice of `T^d` below `lambda_max`.
pub fn enumerate_spectrum(d: usize, lambda_max: f64, budget: u64) -> Result<SpectrumSlice> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be ≥ 1".into()));
    }
    if lambda_max < 0.0 {
        return Err(Error::InvalidArgument("lambda_max must be ≥ 0".into()));
    }
    let bound = sq_norm_bound(lambda_max);
    let weights = vec![1i64; d];
    budget_guard(&weights, bound, budget)?;
    let steps = vec![1i64; d];
    let freqs = enumerate_canonical(d, bound, &steps);
    Ok(SpectrumSlice::from_canonical_freqs(d, lambda_max, freqs))
}

/// Enumerates a spectrum slice restricted to frequencies with `v_j` a multiple
/// of `step[j]` on each axis (`step[j] = 0` forces `v_j = 0`). This is the
/// invariant sub-basis of the diagonal group actions.
pub fn enumerate_spectrum_stepped(
    d: usize,
    lambda_max: f64,
    step: &[i64],
    budget: u64,
) -> Result<SpectrumSlice> {
    if step.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: step.len(),
        });
    }
    let bound = sq_norm_bound(lambda_max);
    let weights: Vec<i64> = step.iter().filter(|&&s| s != 0).map(|&s| s * s).collect();
    if !weights.is_empty() {
        budget_guard(&weights, bound, budget)?;
    }
    let freqs = enumerate_canonical(d, bound, step);
    Ok(SpectrumSlice::from_canonical_freqs(d, lambda_max, freqs))
}

/// Evaluates one basis element at a point.
pub fn evaluate_basis(e: &BasisElement, x: &[f64]) -> Result<f64> {
    if x.len() != e.freq.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.freq.dim(),
            got: x.len(),
        });
    }
    let phase: f64 = e
        .freq
        .0
        .iter()
        .zip(x)
        .map(|(&v, &xi)| v as f64 * xi)
        .sum();
    let arg = 2.0 * std::f64::consts::PI * phase;
    Ok(match e.kind {
        BasisKind::Constant => 1.0,
        BasisKind::Cosine => std::f64::consts::SQRT_2 * arg.cos(),
        BasisKind::Sine => std::f64::consts::SQRT_2 * arg.sin(),
    })
}

/// Per-point evaluation of a whole slice through per-axis phase tables.
///
/// Builds `cos/sin(2π t x_j)` tables for `t = 0..F_j` per axis (one trig pair
/// per axis, extended by the angle-addition recurrence) and combines them per
/// element with complex multiplications, so the trig cost is
/// `O(points·(elements + d·F_max))`.
pub struct SliceEvaluator<'a> {
    slice: &'a SpectrumSlice,
    // Nonzero (axis, |v|, sign) triples per element, flattened.
    terms: Vec<(u32, u32, i8)>,
    term_offsets: Vec<u32>,
    tables: Vec<Vec<(f64, f64)>>,
}

impl<'a> SliceEvaluator<'a> {
    pub fn new(slice: &'a SpectrumSlice) -> Self {
        let mut terms = Vec::new();
        let mut term_offsets = Vec::with_capacity(slice.len() + 1);
        term_offsets.push(0);
        for e in &slice.elements {
            for (j, &v) in e.freq.0.iter().enumerate() {
                if v != 0 {
                    terms.push((j as u32, v.unsigned_abs() as u32, v.signum() as i8));
                }
            }
            term_offsets.push(terms.len() as u32);
        }
        let tables = slice
            .freq_max
            .iter()
            .map(|&f| Vec::with_capacity(f as usize + 1))
            .collect();
        SliceEvaluator {
            slice,
            terms,
            term_offsets,
            tables,
        }
    }

    /// Writes `φ_ℓ(x)` for every element `ℓ` into `out`.
    pub fn evaluate_into(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let slice = self.slice;
        if x.len() != slice.dim {
            return Err(Error::DimensionMismatch {
                expected: slice.dim,
                got: x.len(),
            });
        }
        assert_eq!(out.len(), slice.len());
        for (j, table) in self.tables.iter_mut().enumerate() {
            table.clear();
            let arg = 2.0 * std::f64::consts::PI * x[j];
            let (s1, c1) = arg.sin_cos();
            let mut c = 1.0f64;
            let mut s = 0.0f64;
            table.push((c, s));
            for _ in 0..slice.freq_max[j] {
                let (cn, sn) = (c * c1 - s * s1, s * c1 + c * s1);
                c = cn;
                s = sn;
                table.push((c, s));
            }
        }
        for (idx, e) in slice.elements.iter().enumerate() {
            let lo = self.term_offsets[idx] as usize;
            let hi = self.term_offsets[idx + 1] as usize;
            // Product of e^{2πi v_j x_j} over nonzero axes.
            let mut re = 1.0f64;
            let mut im = 0.0f64;
            for &(j, t, sign) in &self.terms[lo..hi] {
                let (c, s) = self.tables[j as usize][t as usize];
                let s = if sign < 0 { -s } else { s };
                let (nre, nim) = (re * c - im * s, re * s + im * c);
                re = nre;
                im = nim;
            }
            out[idx] = match e.kind {
                BasisKind::Constant => 1.0,
                BasisKind::Cosine => std::f64::consts::SQRT_2 * re,
                BasisKind::Sine => std::f64::consts::SQRT_2 * im,
            };
        }
        Ok(())
    }
}

/// Dense evaluation matrix (points × elements).
pub fn evaluate_all(slice: &SpectrumSlice, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut evaluator = SliceEvaluator::new(slice);
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let mut row = vec![0.0; slice.len()];
        evaluator.evaluate_into(p, &mut row)?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalue(&FrequencyVector(vec![0, 0])), 0.0);
        assert_abs_diff_eq!(
            eigenvalue(&FrequencyVector(vec![1, 0])),
            39.47841760435743,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            eigenvalue(&FrequencyVector(vec![1, 2, 2])),
            9.0 * LAMBDA_UNIT,
            epsilon = 1e-9
        );
    }

    #[test]
    fn enumerate_d1_lambda0_gives_constant_only() {
        let slice = enumerate_spectrum(1, 0.0, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(slice.len(), 1);
        assert_eq!(slice.elements[0].kind, BasisKind::Constant);
    }

    #[test]
    fn enumerate_d2_unit_ball() {
        // Lattice points with ‖v‖² ≤ 1 on Z²: (0,0), (±1,0), (0,±1) → 5 complex
        // modes, 9 real elements.
        let slice = enumerate_spectrum(2, LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(slice.len(), 5);
        let canonical: Vec<_> = slice
            .elements
            .iter()
            .filter(|e| e.kind == BasisKind::Cosine)
            .map(|e| e.freq.0.clone())
            .collect();
        assert_eq!(canonical, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn enumeration_matches_brute_force_scan_d6() {
        // Exhaustive scan over {-1,0,1}^6 for λ ≤ 4π²·2.
        let slice = enumerate_spectrum(6, 2.0 * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap();
        let mut count = 0u64;
        let mut idx = vec![-1i64; 6];
        'outer: loop {
            let sq: i64 = idx.iter().map(|v| v * v).sum();
            if sq <= 2 {
                count += 1;
            }
            for j in 0..6 {
                idx[j] += 1;
                if idx[j] <= 1 {
                    continue 'outer;
                }
                idx[j] = -1;
            }
            break;
        }
        assert_eq!(slice.len() as u64, count);
        assert_eq!(count, weyl_count(6, 2.0 * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap());
    }

    #[test]
    fn weyl_count_examples() {
        assert_eq!(weyl_count(2, LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap(), 5);
        for d in 1..=4 {
            assert_eq!(weyl_count(d, 0.0, DEFAULT_ELEMENT_BUDGET).unwrap(), 1);
        }
        for k in 1..=20i64 {
            let lam = LAMBDA_UNIT * (k * k) as f64;
            assert_eq!(
                weyl_count(1, lam, DEFAULT_ELEMENT_BUDGET).unwrap(),
                (2 * k + 1) as u64
            );
        }
    }

    #[test]
    fn weyl_count_monotone() {
        let mut prev = 0;
        for i in 0..50 {
            let lam = i as f64 * 7.3;
            let c = weyl_count(3, lam, DEFAULT_ELEMENT_BUDGET).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn budget_guard_rejects_huge_enumeration() {
        let err = enumerate_spectrum(6, 1e6, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn evaluate_basis_examples() {
        let cos1 = BasisElement {
            freq: FrequencyVector(vec![1]),
            kind: BasisKind::Cosine,
        };
        let sin1 = BasisElement {
            freq: FrequencyVector(vec![1]),
            kind: BasisKind::Sine,
        };
        assert_abs_diff_eq!(evaluate_basis(&cos1, &[0.0]).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(evaluate_basis(&sin1, &[0.0]).unwrap(), 0.0, epsilon = 1e-14);
        let cos11 = BasisElement {
            freq: FrequencyVector(vec![1, 1]),
            kind: BasisKind::Cosine,
        };
        assert_abs_diff_eq!(
            evaluate_basis(&cos11, &[0.25, 0.25]).unwrap(),
            -(2f64.sqrt()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn evaluate_basis_dimension_mismatch() {
        let e = BasisElement {
            freq: FrequencyVector(vec![1, 0]),
            kind: BasisKind::Cosine,
        };
        assert!(evaluate_basis(&e, &[0.5]).is_err());
    }

    #[test]
    fn evaluate_all_matches_naive() {
        let slice = enumerate_spectrum(3, 6.0 * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap();
        let points = vec![
            vec![0.1, 0.77, 0.31],
            vec![0.0, 0.5, 0.99],
            vec![0.123456, 0.654321, 0.5],
        ];
        let rows = evaluate_all(&slice, &points).unwrap();
        for (p, row) in points.iter().zip(&rows) {
            for (e, &val) in slice.elements.iter().zip(row) {
                let naive = evaluate_basis(e, p).unwrap();
                assert_abs_diff_eq!(val, naive, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn evaluate_all_deterministic_rows() {
        let slice = enumerate_spectrum(2, 9.0 * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap();
        let p = vec![0.3321, 0.789];
        let rows = evaluate_all(&slice, &[p.clone(), p]).unwrap();
        assert_eq!(rows[0], rows[1]);
    }

    #[test]
    fn orthonormality_on_grid() {
        // Trapezoid quadrature is exact for trig polynomials of bounded degree.
        let slice = enumerate_spectrum(1, (5 * 5) as f64 * LAMBDA_UNIT, DEFAULT_ELEMENT_BUDGET).unwrap();
        let f_max = 5usize;
        let n_grid = 4 * f_max + 1;
        let points: Vec<Vec<f64>> = (0..n_grid).map(|i| vec![i as f64 / n_grid as f64]).collect();
        let rows = evaluate_all(&slice, &points).unwrap();
        for a in 0..slice.len() {
            for b in a..slice.len() {
                let ip: f64 = rows.iter().map(|r| r[a] * r[b]).sum::<f64>() / n_grid as f64;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip, expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn weyl_slope_matches_dimension() {
        // log N vs log λ over [1e3, 1e5] has slope d/2 within 0.05.
        for d in 1..=3usize {
            let grid: Vec<f64> = (0..25)
                .map(|i| 1e3 * (1e5f64 / 1e3).powf(i as f64 / 24.0))
                .collect();
            let pts: Vec<(f64, f64)> = grid
                .iter()
                .map(|&lam| {
                    let n = weyl_count(d, lam, 100_000_000).unwrap();
                    (lam.ln(), (n as f64).ln())
                })
                .collect();
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            assert!(
                (slope - d as f64 / 2.0).abs() < 0.05,
                "d={d}: slope {slope}"
            );
        }
    }
}
