//! Correlation measures: logarithmic negativities, Rényi and von Neumann
//! entropies, mutual information. All values are in bits.

mod closed_form;
mod dense;
mod ensemble;
mod gaussian;

pub use closed_form::entropy_density_closed_form;
pub use dense::{
    dense_log_negativity, dense_log_negativity_unblocked, reduced_density, NegativityFlavor,
    ReducedState,
};
pub use ensemble::EnsembleSpectra;
pub use gaussian::{
    fermionic_log_negativity, gaussian_entropy_of, GaussianEngine, GaussianSnapshot,
    ModeResolvedGaussian,
};

use std::fmt;

use crate::chain::ChainParams;
use crate::density::DensityOperator;
use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::semiclassical::GreenFunction;

/// Bipartition of the chain into `A` and its complement `B`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    length: usize,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Partition {
    pub fn new(length: usize, sites: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut a: Vec<usize> = sites.into_iter().collect();
        a.sort_unstable();
        if a.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition("repeated site".into()));
        }
        if let Some(&bad) = a.iter().find(|&&s| s >= length) {
            return Err(Error::InvalidPartition(format!(
                "site {bad} outside a chain of length {length}"
            )));
        }
        if a.is_empty() || a.len() == length {
            return Err(Error::InvalidPartition(
                "both subsystems must be non-empty".into(),
            ));
        }
        let b = (0..length).filter(|s| a.binary_search(s).is_err()).collect();
        Ok(Self { length, a, b })
    }

    /// The single-site subsystem `{2}`.
    pub fn default_for(length: usize) -> Result<Self> {
        Self::new(length, [2])
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn swapped(&self) -> Self {
        Self {
            length: self.length,
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Same `A` on a chain of another length.
    pub fn resized(&self, length: usize) -> Result<Self> {
        Self::new(length, self.a.iter().copied())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites: Vec<String> = self.a.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", sites.join(","))
    }
}

/// Order `γ` of a Rényi entropy; `γ = 1` is von Neumann.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyOrder {
    VonNeumann,
    Renyi(f64),
}

impl EntropyOrder {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::InvalidOrder(gamma));
        }
        Ok(if gamma == 1.0 {
            EntropyOrder::VonNeumann
        } else {
            EntropyOrder::Renyi(gamma)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            EntropyOrder::VonNeumann => 1.0,
            EntropyOrder::Renyi(g) => g,
        }
    }

    pub fn label(self) -> String {
        match self {
            EntropyOrder::VonNeumann => "vn".into(),
            EntropyOrder::Renyi(g) => format!("renyi{g}"),
        }
    }
}

/// Entropy (bits) of a probability vector, e.g. a density-matrix spectrum.
/// Tiny negative eigenvalues from round-off are ignored.
pub fn spectrum_entropy(probabilities: &[f64], order: EntropyOrder) -> f64 {
    let p = probabilities.iter().copied().filter(|&x| x > 0.0);
    match order {
        EntropyOrder::VonNeumann => -p.map(|x| x * x.log2()).sum::<f64>(),
        EntropyOrder::Renyi(g) => p.map(|x| x.powf(g)).sum::<f64>().log2() / (1.0 - g),
    }
}

/// Entropy (bits) of a fermionic Gaussian state from the eigenvalues of its
/// correlation matrix.
pub fn gaussian_entropy(eigenvalues: &[f64], order: EntropyOrder) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| mode_entropy(l.clamp(0.0, 1.0), order))
        .sum()
}

pub(crate) fn mode_entropy(l: f64, order: EntropyOrder) -> f64 {
    match order {
        EntropyOrder::VonNeumann => {
            let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
            term(l) + term(1.0 - l)
        }
        EntropyOrder::Renyi(g) => (l.powf(g) + (1.0 - l).powf(g)).log2() / (1.0 - g),
    }
}

/// Anything whose subsystem entropies can be evaluated.
pub trait EntropySource {
    fn sites(&self) -> usize;

    /// `S_γ` of the reduced state on `subsystem` (the whole system if
    /// `None`).
    fn entropy(&self, order: EntropyOrder, subsystem: Option<&[usize]>) -> Result<f64>;
}

impl EntropySource for GreenFunction {
    fn sites(&self) -> usize {
        GreenFunction::sites(self)
    }

    fn entropy(&self, order: EntropyOrder, subsystem: Option<&[usize]>) -> Result<f64> {
        let m = match subsystem {
            Some(s) => {
                check_sites(s, self.sites())?;
                self.restrict(s)
            }
            None => self.matrix().clone(),
        };
        gaussian_entropy_of(m, order)
    }
}

impl EntropySource for DensityOperator {
    fn sites(&self) -> usize {
        self.space().sites()
    }

    fn entropy(&self, order: EntropyOrder, subsystem: Option<&[usize]>) -> Result<f64> {
        let eig = match subsystem {
            Some(s) if s.len() < self.sites() => {
                check_sites(s, self.sites())?;
                reduced_density(self, s)?.eigenvalues()
            }
            _ => self.eigenvalues(),
        };
        Ok(spectrum_entropy(&eig, order))
    }
}

fn check_sites(sites: &[usize], length: usize) -> Result<()> {
    if sites.iter().any(|&s| s >= length) {
        return Err(Error::InvalidPartition(format!(
            "subsystem {sites:?} outside a chain of length {length}"
        )));
    }
    Ok(())
}

/// `S_γ(ρ)` or `S_γ(ρ_subsystem)`.
pub fn renyi_entropy<S: EntropySource + ?Sized>(
    state: &S,
    order: EntropyOrder,
    subsystem: Option<&[usize]>,
) -> Result<f64> {
    state.entropy(order, subsystem)
}

/// `I_γ = S_γ(ρ_A) + S_γ(ρ_B) - S_γ(ρ)`.
pub fn mutual_information<S: EntropySource + ?Sized>(
    state: &S,
    part: &Partition,
    order: EntropyOrder,
) -> Result<f64> {
    if part.length() != state.sites() {
        return Err(Error::InvalidPartition(format!(
            "partition is for {} sites, state has {}",
            part.length(),
            state.sites()
        )));
    }
    Ok(state.entropy(order, Some(part.a()))? + state.entropy(order, Some(part.b()))?
        - state.entropy(order, None)?)
}

/// Which quantity an [`EntanglementCurve`] holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// Partial time-reversal negativity.
    FermionicNegativity,
    /// Partial-transpose negativity.
    ConventionalNegativity,
    MutualInformation(EntropyOrder),
}

impl Measure {
    pub fn label(&self) -> String {
        match self {
            Measure::FermionicNegativity => "fermionic_negativity".into(),
            Measure::ConventionalNegativity => "conventional_negativity".into(),
            Measure::MutualInformation(o) => format!("mutual_information_{}", o.label()),
        }
    }

    pub fn is_negativity(&self) -> bool {
        !matches!(self, Measure::MutualInformation(_))
    }
}

/// A measure sampled on a grid of dimensionless times `Γt`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub measure: Measure,
    pub statistics: Statistics,
    pub partition: Partition,
    pub params: ChainParams,
}

impl EntanglementCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_value(&self) -> Option<f64> {
        self.values.last().copied()
    }
}
