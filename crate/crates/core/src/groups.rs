//! Isometric group actions on `T^d`: invariance tests for basis elements,
//! invariant-subspace projectors, quotient dimension/volume and invariant
//! Weyl counts.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{
    budget_guard, sq_norm_bound, weyl_count, BasisKind, FrequencyVector, SpectrumSlice,
    WeightedLatticeCounter,
};

/// Supported torus isometry families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupAction {
    /// The identity group.
    Trivial { ambient_dim: usize },
    /// The full circle group acting by translation on each listed axis.
    ContinuousShift { ambient_dim: usize, coords: Vec<usize> },
    /// `Z/m` acting by translation by `1/m` on each listed axis.
    CyclicShift {
        ambient_dim: usize,
        coords: Vec<usize>,
        order: u32,
    },
    /// Cyclic permutation of the listed axes.
    CyclicCoordinatePermutation { ambient_dim: usize, cycle: Vec<usize> },
}

impl GroupAction {
    pub fn ambient_dim(&self) -> usize {
        match self {
            GroupAction::Trivial { ambient_dim }
            | GroupAction::ContinuousShift { ambient_dim, .. }
            | GroupAction::CyclicShift { ambient_dim, .. }
            | GroupAction::CyclicCoordinatePermutation { ambient_dim, .. } => *ambient_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.ambient_dim();
        let check_coords = |coords: &[usize]| -> Result<()> {
            if coords.is_empty() {
                return Err(Error::InvalidArgument("coordinate set must be nonempty".into()));
            }
            for &c in coords {
                if c >= d {
                    return Err(Error::InvalidArgument(format!(
                        "coordinate index {c} out of range for T^{d}"
                    )));
                }
            }
            let mut sorted = coords.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != coords.len() {
                return Err(Error::InvalidArgument("duplicate coordinate index".into()));
            }
            Ok(())
        };
        match self {
            GroupAction::Trivial { .. } => Ok(()),
            GroupAction::ContinuousShift { coords, .. } => check_coords(coords),
            GroupAction::CyclicShift { coords, order, .. } => {
                check_coords(coords)?;
                if *order < 2 {
                    return Err(Error::InvalidArgument("cyclic shift order must be ≥ 2".into()));
                }
                Ok(())
            }
            GroupAction::CyclicCoordinatePermutation { cycle, .. } => {
                check_coords(cycle)?;
                if cycle.len() < 2 {
                    return Err(Error::InvalidArgument("permutation cycle length must be ≥ 2".into()));
                }
                Ok(())
            }
        }
    }

    /// `dim(M/G)`.
    pub fn quotient_dim(&self) -> usize {
        match self {
            GroupAction::Trivial { ambient_dim } => *ambient_dim,
            GroupAction::ContinuousShift { ambient_dim, coords } => ambient_dim - coords.len(),
            GroupAction::CyclicShift { ambient_dim, .. } => *ambient_dim,
            GroupAction::CyclicCoordinatePermutation { ambient_dim, .. } => *ambient_dim,
        }
    }

    /// `vol(M/G)` under the unit-volume convention.
    pub fn quotient_vol(&self) -> f64 {
        match self {
            GroupAction::Trivial { .. } => 1.0,
            GroupAction::ContinuousShift { .. } => 1.0,
            GroupAction::CyclicShift { coords, order, .. } => {
                (1.0 / *order as f64).powi(coords.len() as i32)
            }
            GroupAction::CyclicCoordinatePermutation { cycle, .. } => 1.0 / cycle.len() as f64,
        }
    }

    /// Per-axis frequency steps of the invariant lattice for diagonal actions:
    /// `0` pins the axis to zero, `k` restricts to multiples of `k`.
    pub fn invariant_steps(&self) -> Result<Vec<i64>> {
        let d = self.ambient_dim();
        match self {
            GroupAction::Trivial { .. } => Ok(vec![1; d]),
            GroupAction::ContinuousShift { coords, .. } => {
                let mut steps = vec![1i64; d];
                for &c in coords {
                    steps[c] = 0;
                }
                Ok(steps)
            }
            GroupAction::CyclicShift { coords, order, .. } => {
                let mut steps = vec![1i64; d];
                for &c in coords {
                    steps[c] = *order as i64;
                }
                Ok(steps)
            }
            GroupAction::CyclicCoordinatePermutation { .. } => Err(Error::UnsupportedAction(
                "permutation actions have no diagonal invariant lattice; use invariant_projector".into(),
            )),
        }
    }

    /// Whether the complex mode `v` is fixed by the action (diagonal actions only).
    pub fn is_invariant_frequency(&self, v: &FrequencyVector) -> Result<bool> {
        if v.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: v.dim(),
            });
        }
        let steps = self.invariant_steps()?;
        Ok(v.0.iter().zip(&steps).all(|(&vj, &s)| match s {
            0 => vj == 0,
            s => vj % s == 0,
        }))
    }

    /// Image of a frequency under the generating permutation (identity for
    /// diagonal actions).
    pub(crate) fn permute_frequency(&self, v: &FrequencyVector) -> FrequencyVector {
        match self {
            GroupAction::CyclicCoordinatePermutation { cycle, .. } => {
                // x_{cycle[i]} ← x_{cycle[i-1]} pulls back frequencies the same way:
                // the new frequency at cycle[i] is the old one at cycle[i+1].
                let mut out = v.0.clone();
                let l = cycle.len();
                for i in 0..l {
                    out[cycle[i]] = v.0[cycle[(i + 1) % l]];
                }
                FrequencyVector(out)
            }
            _ => v.clone(),
        }
    }
}

/// Orthogonal projector onto the invariant subspace of a slice.
#[derive(Debug, Clone)]
pub enum Projector {
    /// Diagonal actions: keep-mask over elements.
    Mask(Vec<bool>),
    /// Permutation actions: per-orbit averaging blocks. Each block lists the
    /// element indices it couples and a dense row-major matrix.
    Blocks(Vec<ProjectorBlock>),
}

#[derive(Debug, Clone)]
pub struct ProjectorBlock {
    pub indices: Vec<usize>,
    /// Row-major `indices.len() × indices.len()` matrix.
    pub matrix: Vec<f64>,
}

impl Projector {
    /// Applies the projector in place.
    pub fn apply(&self, values: &mut [f64]) {
        match self {
            Projector::Mask(mask) => {
                for (v, &keep) in values.iter_mut().zip(mask) {
                    if !keep {
                        *v = 0.0;
                    }
                }
            }
            Projector::Blocks(blocks) => {
                for block in blocks {
                    let k = block.indices.len();
                    let mut input = Vec::with_capacity(k);
                    for &i in &block.indices {
                        input.push(values[i]);
                    }
                    for (r, &i) in block.indices.iter().enumerate() {
                        let mut acc = 0.0;
                        for (c, &x) in input.iter().enumerate() {
                            acc += block.matrix[r * k + c] * x;
                        }
                        values[i] = acc;
                    }
                }
            }
        }
    }

    /// Number of elements the projector keeps (mask) or the total rank of the
    /// averaging blocks.
    pub fn rank(&self) -> f64 {
        match self {
            Projector::Mask(mask) => mask.iter().filter(|&&b| b).count() as f64,
            Projector::Blocks(blocks) => {
                // Group averages are idempotent, so rank = trace.
                blocks
                    .iter()
                    .map(|b| {
                        let k = b.indices.len();
                        (0..k).map(|i| b.matrix[i * k + i]).sum::<f64>()
                    })
                    .sum()
            }
        }
    }
}

/// Builds the orthogonal projector onto the `G`-invariant span of a slice.
pub fn invariant_projector(action: &GroupAction, slice: &SpectrumSlice) -> Result<Projector> {
    if slice.dim != action.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: action.ambient_dim(),
            got: slice.dim,
        });
    }
    match action {
        GroupAction::CyclicCoordinatePermutation { cycle, .. } => {
            permutation_projector(action, cycle.len(), slice)
        }
        _ => {
            let mask = slice
                .elements
                .iter()
                .map(|e| action.is_invariant_frequency(&e.freq))
                .collect::<Result<Vec<bool>>>()?;
            Ok(Projector::Mask(mask))
        }
    }
}

fn permutation_projector(
    action: &GroupAction,
    order: usize,
    slice: &SpectrumSlice,
) -> Result<Projector> {
    // Element index lookup by (canonical freq, kind).
    let mut index: HashMap<(Vec<i64>, BasisKind), usize> = HashMap::new();
    for (i, e) in slice.elements.iter().enumerate() {
        index.insert((e.freq.0.clone(), e.kind), i);
    }

    // Group frequencies into σ-orbits of canonical representatives.
    let mut seen = vec![false; slice.len()];
    let mut blocks = Vec::new();
    for (i, e) in slice.elements.iter().enumerate() {
        if seen[i] || e.kind != BasisKind::Cosine {
            continue;
        }
        // Collect the orbit of canonical freqs starting at e.freq.
        let mut orbit = Vec::new();
        let mut orbit_pos: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut stack = vec![e.freq.clone()];
        while let Some(f) = stack.pop() {
            if orbit_pos.contains_key(&f.0) {
                continue;
            }
            orbit_pos.insert(f.0.clone(), orbit.len());
            orbit.push(f.clone());
            let (g, _) = action.permute_frequency(&f).canonicalize();
            stack.push(g);
        }
        // Block coordinates: for each orbit freq, its (cos, sin) element pair.
        let mut indices = Vec::with_capacity(2 * orbit.len());
        for f in &orbit {
            let ci = *index
                .get(&(f.0.clone(), BasisKind::Cosine))
                .ok_or(Error::SliceMismatch)?;
            let si = *index
                .get(&(f.0.clone(), BasisKind::Sine))
                .ok_or(Error::SliceMismatch)?;
            seen[ci] = true;
            seen[si] = true;
            indices.push(ci);
            indices.push(si);
        }
        let k = indices.len();
        let mut matrix = vec![0.0; k * k];
        // Average the representation matrices of σ^0..σ^{order-1}. σ maps the
        // pair at freq u to the pair at canon(σ(u)), with the sine coordinate
        // picking up the canonicalization sign.
        for power in 0..order {
            for (pos, u) in orbit.iter().enumerate() {
                let mut g = u.clone();
                let mut sign = 1i64;
                for _ in 0..power {
                    let (c, s) = action.permute_frequency(&g).canonicalize();
                    g = c;
                    sign *= s;
                }
                let target = orbit_pos[&g.0];
                // cos_u → cos_target; sin_u → sign·sin_target.
                matrix[(2 * target) * k + 2 * pos] += 1.0 / order as f64;
                matrix[(2 * target + 1) * k + (2 * pos + 1)] += sign as f64 / order as f64;
            }
        }
        blocks.push(ProjectorBlock { indices, matrix });
    }
    Ok(Projector::Blocks(blocks))
}

/// Number of invariant complex modes with eigenvalue ≤ `lambda` (includes the
/// constant mode). For permutation actions this counts σ-orbits via Burnside.
pub fn weyl_count_invariant(action: &GroupAction, lambda: f64, budget: u64) -> Result<u64> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument("lambda must be ≥ 0".into()));
    }
    let bound = sq_norm_bound(lambda);
    match action {
        GroupAction::Trivial { ambient_dim } => weyl_count(*ambient_dim, lambda, budget),
        GroupAction::ContinuousShift { .. } | GroupAction::CyclicShift { .. } => {
            let steps = action.invariant_steps()?;
            let weights: Vec<i64> = steps.iter().filter(|&&s| s != 0).map(|&s| s * s).collect();
            if weights.is_empty() {
                return Ok(1);
            }
            budget_guard(&weights, bound, budget)?;
            Ok(WeightedLatticeCounter::new(&weights).count(bound))
        }
        GroupAction::CyclicCoordinatePermutation { ambient_dim, cycle } => {
            // Burnside: #orbits = (1/L) Σ_k #fixed(σ^k). Points fixed by σ^k
            // are constant on each cycle of σ^k, i.e. a weighted lattice with
            // weight (cycle length) per merged axis.
            let l = cycle.len();
            let free_axes = ambient_dim - l;
            let mut total = 0f64;
            for k in 0..l {
                let g = gcd(k, l);
                let cycles = if k == 0 { l } else { g };
                let cycle_len = l / cycles;
                let mut weights = vec![1i64; free_axes];
                weights.extend(std::iter::repeat(cycle_len as i64).take(cycles));
                budget_guard(&weights, bound, budget)?;
                let fixed = WeightedLatticeCounter::new(&weights).count(bound);
                total += fixed as f64;
            }
            Ok((total / l as f64).round() as u64)
        }
    }
}

/// Reusable cumulative counter over the invariant spectrum: `count_le(s)` is
/// the number of invariant complex modes (σ-orbits for permutations) with
/// `‖v‖² ≤ s`, including `v = 0`. Memo tables persist across calls, so
/// sweeping `s = 1, 2, …` is cheap.
pub(crate) struct InvariantShellCounter {
    terms: Vec<(WeightedLatticeCounter, f64)>,
}

impl InvariantShellCounter {
    pub fn new(action: &GroupAction) -> Result<Self> {
        action.validate()?;
        let mut terms = Vec::new();
        match action {
            GroupAction::Trivial { ambient_dim } => {
                terms.push((WeightedLatticeCounter::new(&vec![1i64; *ambient_dim]), 1.0));
            }
            GroupAction::ContinuousShift { .. } | GroupAction::CyclicShift { .. } => {
                let weights: Vec<i64> = action
                    .invariant_steps()?
                    .iter()
                    .filter(|&&s| s != 0)
                    .map(|&s| s * s)
                    .collect();
                terms.push((WeightedLatticeCounter::new(&weights), 1.0));
            }
            GroupAction::CyclicCoordinatePermutation { ambient_dim, cycle } => {
                let l = cycle.len();
                let free_axes = ambient_dim - l;
                for k in 0..l {
                    let cycles = if k == 0 { l } else { gcd(k, l) };
                    let cycle_len = l / cycles;
                    let mut weights = vec![1i64; free_axes];
                    weights.extend(std::iter::repeat(cycle_len as i64).take(cycles));
                    terms.push((WeightedLatticeCounter::new(&weights), 1.0 / l as f64));
                }
            }
        }
        Ok(InvariantShellCounter { terms })
    }

    pub fn count_le(&mut self, s: i64) -> f64 {
        self.terms
            .iter_mut()
            .map(|(counter, coeff)| counter.count(s) as f64 * *coeff)
            .sum()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}

/// Multiplicity of the invariant eigenspace at eigenvalue `lambda`
/// (complex-mode convention; excludes the constant for `lambda = 0`).
pub fn invariant_multiplicity(action: &GroupAction, lambda: f64, budget: u64) -> Result<u64> {
    let bound = sq_norm_bound(lambda);
    if bound <= 0 {
        return Ok(0);
    }
    let below = crate::spectrum::LAMBDA_UNIT * (bound - 1) as f64;
    let at = crate::spectrum::LAMBDA_UNIT * bound as f64;
    Ok(weyl_count_invariant(action, at, budget)? - weyl_count_invariant(action, below, budget)?)
}
