//! Curves, distances between them, crossover and effective lengths, and
//! revival visibility.

use rayon::prelude::*;

use crate::chain::{build_mode_basis, ChainParams, ModeBasis};
use crate::entanglement::{
    dense_log_negativity, fermionic_log_negativity, EnsembleSpectra, EntanglementCurve,
    EntropyOrder, GaussianEngine, Measure, NegativityFlavor, Partition,
};
use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::semiclassical::{
    mode_correlations, GreenFunction, ModeOccupation, SemiclassicalEnsemble,
};

/// Uniform grid of dimensionless times `Γt ∈ [0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one step".into()));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn points(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| self.horizon * i as f64 / self.steps as f64)
            .collect()
    }
}

/// Tolerance, horizon and reference size of the universality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalityCriterion {
    pub epsilon: f64,
    /// Horizon in units of `1/Γ`.
    pub horizon: f64,
    pub reference_length: usize,
}

impl Default for UniversalityCriterion {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            horizon: 20.0,
            reference_length: 301,
        }
    }
}

impl UniversalityCriterion {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::OutOfRange {
                what: "epsilon",
                value: self.epsilon.to_string(),
                range: "(0, 1)".into(),
            });
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::OutOfRange {
                what: "horizon",
                value: self.horizon.to_string(),
                range: "> 0".into(),
            });
        }
        if self.reference_length < 3 || self.reference_length % 2 == 0 {
            return Err(Error::InvalidLength(self.reference_length));
        }
        Ok(())
    }
}

/// Which bulk modes start occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Edge mode plus the negative-energy band.
    Ground,
    /// Every normal mode.
    AllOccupied,
}

impl InitialState {
    pub fn occupation(self, cells: usize) -> ModeOccupation {
        match self {
            InitialState::Ground => ModeOccupation::ground_state(cells),
            InitialState::AllOccupied => ModeOccupation::all_occupied(cells),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitialState::Ground => "ground",
            InitialState::AllOccupied => "all",
        }
    }
}

/// Chain-independent part of a curve request.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    /// `Γ/g2`.
    pub gamma: f64,
    pub subsystem: Vec<usize>,
    pub initial: InitialState,
    pub grid: TimeGrid,
}

impl CurveSpec {
    pub fn new(gamma: f64, subsystem: Vec<usize>, grid: TimeGrid) -> Self {
        Self {
            gamma,
            subsystem,
            initial: InitialState::Ground,
            grid,
        }
    }

    fn setup(&self, length: usize, ratio: f64) -> Result<(ModeBasis, ModeOccupation, Partition)> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidDecayRate(self.gamma));
        }
        let params = ChainParams::with_ratio(length, ratio, self.gamma)?;
        let basis = build_mode_basis(&params);
        let occ = self.initial.occupation(basis.cells());
        let part = Partition::new(length, self.subsystem.iter().copied())?;
        Ok((basis, occ, part))
    }

    fn times(&self) -> Vec<f64> {
        self.grid.points()
    }
}

fn curve(
    values: Vec<f64>,
    spec: &CurveSpec,
    measure: Measure,
    statistics: Statistics,
    basis: &ModeBasis,
    part: Partition,
) -> EntanglementCurve {
    EntanglementCurve {
        times: spec.times(),
        values,
        measure,
        statistics,
        partition: part,
        params: *basis.params(),
    }
}

/// Fermionic Gaussian curve: negativity or mutual information.
pub fn gaussian_curve(
    length: usize,
    ratio: f64,
    spec: &CurveSpec,
    measure: Measure,
) -> Result<EntanglementCurve> {
    let (basis, occ, part) = spec.setup(length, ratio)?;
    let engine = GaussianEngine::new(&basis, &occ, &part)?;
    let gamma = spec.gamma;
    let values = spec
        .times()
        .par_iter()
        .map(|&gt| {
            let snap = engine.snapshot(gt / gamma)?;
            match measure {
                Measure::FermionicNegativity => Ok(snap.negativity),
                Measure::MutualInformation(order) => Ok(snap.mutual_information(order)),
                Measure::ConventionalNegativity => Err(Error::Unsupported(
                    "conventional negativity of a Gaussian state".into(),
                )),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(curve(values, spec, measure, Statistics::Fermi, &basis, part))
}

/// `G` restricted to the first `j` sites, built in `O(L j²)`.
pub fn truncated_green(basis: &ModeBasis, t: f64, occ: &ModeOccupation, j: usize) -> GreenFunction {
    let chi = mode_correlations(basis, t, occ);
    let u = basis.transform();
    let j = j.min(basis.length());
    let mut g = nalgebra::DMatrix::zeros(j, j);
    for (row, c) in chi.iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        for a in 0..j {
            let ua = c * u[(row, a)];
            for b in 0..=a {
                g[(a, b)] += ua * u[(row, b)];
            }
        }
    }
    for a in 0..j {
        for b in 0..a {
            g[(b, a)] = g[(a, b)];
        }
    }
    GreenFunction::new(g, t, 1e-9).expect("principal submatrix of a physical G")
}

/// Negativity curve of the first `j` sites of a longer chain.
pub fn truncated_negativity_curve(
    length: usize,
    j: usize,
    ratio: f64,
    spec: &CurveSpec,
) -> Result<EntanglementCurve> {
    let (basis, occ, _) = spec.setup(length, ratio)?;
    let part = Partition::new(j, spec.subsystem.iter().copied())?;
    let gamma = spec.gamma;
    let values = spec
        .times()
        .par_iter()
        .map(|&gt| fermionic_log_negativity(&truncated_green(&basis, gt / gamma, &occ, j), &part))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = curve(values, spec, Measure::FermionicNegativity, Statistics::Fermi, &basis, part);
    out.params = ChainParams::with_ratio(j, ratio, gamma)?;
    Ok(out)
}

/// Negativity from dense semiclassical states (either statistics).
pub fn dense_negativity_curve(
    length: usize,
    ratio: f64,
    spec: &CurveSpec,
    statistics: Statistics,
    flavor: NegativityFlavor,
    fock_cap: usize,
) -> Result<EntanglementCurve> {
    let (basis, occ, part) = spec.setup(length, ratio)?;
    let dim = crate::fock::fock_dimension(statistics, length, occ.particles());
    if dim > fock_cap {
        return Err(Error::DimensionCap { dim, cap: fock_cap });
    }
    let ensemble = SemiclassicalEnsemble::new(&basis, statistics, &occ, usize::MAX)?;
    let gamma = spec.gamma;
    let values = spec
        .times()
        .par_iter()
        .map(|&gt| dense_log_negativity(&ensemble.density_operator(gt / gamma), &part, flavor))
        .collect::<Result<Vec<f64>>>()?;
    let measure = match flavor {
        NegativityFlavor::Conventional => Measure::ConventionalNegativity,
        NegativityFlavor::Fermionic => Measure::FermionicNegativity,
    };
    Ok(curve(values, spec, measure, statistics, &basis, part))
}

/// Mutual information from the semiclassical ensemble (either statistics).
pub fn ensemble_mutual_information_curve(
    length: usize,
    ratio: f64,
    spec: &CurveSpec,
    statistics: Statistics,
    order: EntropyOrder,
    amplitude_cap: usize,
) -> Result<EntanglementCurve> {
    let (basis, occ, part) = spec.setup(length, ratio)?;
    let ensemble = SemiclassicalEnsemble::new(&basis, statistics, &occ, amplitude_cap)?;
    let spectra = EnsembleSpectra::new(&ensemble, &part, amplitude_cap)?;
    let gamma = spec.gamma;
    let values = spec
        .times()
        .iter()
        .map(|&gt| spectra.mutual_information(gt / gamma, order))
        .collect();
    Ok(curve(
        values,
        spec,
        Measure::MutualInformation(order),
        statistics,
        &basis,
        part,
    ))
}

/// Value of a measure on the pure edge state `C_0†|vac⟩`.
///
/// A single particle shared between `A` (weight `p`) and `B` has Schmidt
/// coefficients `√p, √(1-p)`, for either statistics.
pub fn steady_state_value(basis: &ModeBasis, part: &Partition, measure: Measure) -> f64 {
    let a0 = basis.edge_mode();
    let p: f64 = part.a().iter().map(|&i| a0[i] * a0[i]).sum::<f64>().clamp(0.0, 1.0);
    match measure {
        Measure::FermionicNegativity | Measure::ConventionalNegativity => {
            (1.0 + 2.0 * (p * (1.0 - p)).sqrt()).log2()
        }
        Measure::MutualInformation(order) => {
            2.0 * crate::entanglement::spectrum_entropy(&[p, 1.0 - p], order)
        }
    }
}

/// `∫|c1 - c2| / ∫ c2` over `Γt ∈ [0, horizon]`, trapezoidal.
pub fn curve_distance(
    c1: &EntanglementCurve,
    c2: &EntanglementCurve,
    crit: &UniversalityCriterion,
) -> Result<f64> {
    if c1.times.len() != c2.times.len()
        || c1
            .times
            .iter()
            .zip(&c2.times)
            .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    let n = c1
        .times
        .iter()
        .take_while(|&&t| t <= crit.horizon * (1.0 + 1e-12))
        .count();
    if n < 2 {
        return Err(Error::InvalidGrid("fewer than two points inside the horizon".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..n {
        let dt = c1.times[i] - c1.times[i - 1];
        let d0 = (c1.values[i - 1] - c2.values[i - 1]).abs();
        let d1 = (c1.values[i] - c2.values[i]).abs();
        num += 0.5 * dt * (d0 + d1);
        den += 0.5 * dt * (c2.values[i - 1] + c2.values[i]);
    }
    if num == 0.0 {
        return Ok(0.0);
    }
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

/// The part of a curve with `Γt ≤ horizon`.
pub fn within_horizon(curve: &EntanglementCurve, horizon: f64) -> EntanglementCurve {
    let n = curve
        .times
        .iter()
        .take_while(|&&t| t <= horizon * (1.0 + 1e-12))
        .count();
    EntanglementCurve {
        times: curve.times[..n].to_vec(),
        values: curve.values[..n].to_vec(),
        ..curve.clone()
    }
}

/// Largest of the two directed distances.
pub fn symmetric_distance(
    c1: &EntanglementCurve,
    c2: &EntanglementCurve,
    crit: &UniversalityCriterion,
) -> Result<f64> {
    Ok(curve_distance(c1, c2, crit)?.max(curve_distance(c2, c1, crit)?))
}

fn odd_lengths(upto: usize) -> Vec<usize> {
    (3..=upto).step_by(2).collect()
}

/// Distances of every odd length to the reference curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthScan {
    pub lengths: Vec<usize>,
    pub distances: Vec<f64>,
    pub result: Option<usize>,
}

/// Smallest odd `L` such that every odd `L' ≥ L` up to the reference size
/// is within `ε` of the reference curve.
pub fn crossover_length(
    ratio: f64,
    crit: &UniversalityCriterion,
    spec: &CurveSpec,
) -> Result<LengthScan> {
    check_ratio(ratio)?;
    crit.validate()?;
    let reference = gaussian_curve(crit.reference_length, ratio, spec, Measure::FermionicNegativity)?;
    let lengths = odd_lengths(crit.reference_length);
    let distances = lengths
        .par_iter()
        .map(|&l| {
            let c = gaussian_curve(l, ratio, spec, Measure::FermionicNegativity)?;
            curve_distance(&c, &reference, crit)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut result = None;
    for (i, &l) in lengths.iter().enumerate().rev() {
        if distances[i] <= crit.epsilon {
            result = Some(l);
        } else {
            break;
        }
    }
    Ok(LengthScan {
        lengths,
        distances,
        result,
    })
}

/// Smallest odd `j` whose first-`j`-sites reduction of the reference chain
/// reproduces the reference curve within `ε`.
pub fn effective_length(
    ratio: f64,
    crit: &UniversalityCriterion,
    spec: &CurveSpec,
) -> Result<LengthScan> {
    check_ratio(ratio)?;
    crit.validate()?;
    let reference = gaussian_curve(crit.reference_length, ratio, spec, Measure::FermionicNegativity)?;
    let min_j = spec.subsystem.iter().max().map_or(1, |&s| s + 1).max(3);
    let mut lengths = Vec::new();
    let mut distances = Vec::new();
    let mut result = None;
    let mut j = if min_j % 2 == 0 { min_j + 1 } else { min_j };
    while j <= crit.reference_length {
        let c = truncated_negativity_curve(crit.reference_length, j, ratio, spec)?;
        let d = curve_distance(&c, &reference, crit)?;
        lengths.push(j);
        distances.push(d);
        if d <= crit.epsilon {
            result = Some(j);
            break;
        }
        j += 2;
    }
    Ok(LengthScan {
        lengths,
        distances,
        result,
    })
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::OutOfRange {
            what: "g1/g2",
            value: ratio.to_string(),
            range: "(0, 1)".into(),
        });
    }
    Ok(())
}

/// Minimum, asymptote and their difference along one curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalSummary {
    pub minimum: f64,
    pub minimum_time: f64,
    pub asymptote: f64,
    pub visibility: f64,
}

pub fn revival_visibility(curve: &EntanglementCurve) -> Result<RevivalSummary> {
    if curve.is_empty() {
        return Err(Error::InvalidGrid("empty curve".into()));
    }
    let (idx, &minimum) = curve
        .values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let asymptote = *curve.values.last().expect("non-empty");
    Ok(RevivalSummary {
        minimum,
        minimum_time: curve.times[idx],
        asymptote,
        visibility: (asymptote - minimum).max(0.0),
    })
}

/// Visibility of the fermionic negativity revival at each ratio.
pub fn visibility_scan(
    length: usize,
    ratios: &[f64],
    spec: &CurveSpec,
) -> Result<Vec<(f64, RevivalSummary)>> {
    ratios
        .par_iter()
        .map(|&q| {
            let c = gaussian_curve(length, q, spec, Measure::FermionicNegativity)?;
            Ok((q, revival_visibility(&c)?))
        })
        .collect()
}
