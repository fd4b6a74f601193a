//! Closed-form dissipative dynamics.
//!
//! Loss on the odd sites empties every normal mode except the edge mode at
//! the same rate `Γ/2`, and never creates coherences between mode-occupation
//! states. Everything below is therefore a function of `e^{-Γt/2}` alone.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::chain::ModeBasis;
use crate::density::DensityOperator;
use crate::error::{Error, Result};
use crate::fock::{fock_dimension, FockSpace, Statistics};

/// Surviving fraction `e^{-Γt/2}` of an initially occupied bulk mode.
pub fn survival(gamma: f64, t: f64) -> f64 {
    (-0.5 * gamma * t).exp()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Per-eigenstate occupation probabilities for the default initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationLaw {
    cells: usize,
    gamma: f64,
}

impl PopulationLaw {
    pub fn new(cells: usize, gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidDecayRate(gamma));
        }
        Ok(Self { cells, gamma })
    }

    pub fn for_basis(basis: &ModeBasis) -> Self {
        Self {
            cells: basis.cells(),
            gamma: basis.params().gamma(),
        }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// `P_m(t)`: probability of one particular eigenstate holding the edge
    /// particle plus `m - 1` bulk particles, `m = 1..=n+1`.
    pub fn probability(&self, m: usize, t: f64) -> Result<f64> {
        if m == 0 || m > self.cells + 1 {
            return Err(Error::OutOfRange {
                what: "particle number m",
                value: m.to_string(),
                range: format!("1..={}", self.cells + 1),
            });
        }
        if t < 0.0 || !t.is_finite() {
            return Err(Error::OutOfRange {
                what: "time",
                value: t.to_string(),
                range: ">= 0".into(),
            });
        }
        let e = survival(self.gamma, t);
        Ok(e.powi(m as i32 - 1) * (1.0 - e).powi((self.cells + 1 - m) as i32))
    }

    /// Probability of finding `m` particles in total,
    /// `binom(n, m-1) P_m(t)`.
    pub fn aggregate(&self, m: usize, t: f64) -> Result<f64> {
        Ok(binomial(self.cells, m - 1) * self.probability(m, t)?)
    }
}

/// Initial occupation `n_k(0) ∈ {0, 1}` of every normal mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeOccupation {
    cells: usize,
    occupied: BTreeSet<isize>,
}

impl ModeOccupation {
    /// Edge mode plus every negative-energy mode.
    pub fn ground_state(cells: usize) -> Self {
        let n = cells as isize;
        Self {
            cells,
            occupied: (-n..=0).collect(),
        }
    }

    /// Every normal mode singly occupied.
    pub fn all_occupied(cells: usize) -> Self {
        let n = cells as isize;
        Self {
            cells,
            occupied: (-n..=n).collect(),
        }
    }

    pub fn from_modes(cells: usize, modes: impl IntoIterator<Item = isize>) -> Result<Self> {
        let n = cells as isize;
        let mut occupied = BTreeSet::new();
        for k in modes {
            if k.abs() > n {
                return Err(Error::InvalidOccupation(format!(
                    "mode {k} outside -{n}..={n}"
                )));
            }
            if !occupied.insert(k) {
                return Err(Error::InvalidOccupation(format!("mode {k} listed twice")));
            }
        }
        if !occupied.contains(&0) {
            return Err(Error::InvalidOccupation(
                "the edge mode k = 0 must be initially occupied".into(),
            ));
        }
        Ok(Self { cells, occupied })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn is_occupied(&self, k: isize) -> bool {
        self.occupied.contains(&k)
    }

    /// Initially occupied modes other than the edge mode, ascending.
    pub fn occupied_bulk(&self) -> Vec<isize> {
        self.occupied.iter().copied().filter(|&k| k != 0).collect()
    }

    /// Total initial particle number.
    pub fn particles(&self) -> usize {
        self.occupied.len()
    }
}

/// `χ_k(t)`: diagonal of `⟨C_k C_k†⟩` in the mode basis.
pub fn mode_correlation(k: isize, t: f64, gamma: f64, occ: &ModeOccupation) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if occ.is_occupied(k) {
        1.0 - survival(gamma, t)
    } else {
        1.0
    }
}

/// `χ_k(t)` for every mode, in row order of [`ModeBasis::transform`].
pub fn mode_correlations(basis: &ModeBasis, t: f64, occ: &ModeOccupation) -> Vec<f64> {
    let gamma = basis.params().gamma();
    basis
        .mode_indices()
        .map(|k| mode_correlation(k, t, gamma, occ))
        .collect()
}

/// `G_ij(t) = ⟨f_i f_j†⟩` of the semiclassical state.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenFunction {
    matrix: DMatrix<f64>,
    time: f64,
}

impl GreenFunction {
    /// Wraps a correlation matrix after checking symmetry and that its
    /// spectrum lies in `[0, 1]` up to `tol`.
    pub fn new(matrix: DMatrix<f64>, time: f64, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::OutOfRange {
                what: "Green's function shape",
                value: format!("{}x{}", matrix.nrows(), matrix.ncols()),
                range: "square, non-empty".into(),
            });
        }
        if (&matrix - matrix.transpose()).amax() > tol.max(1e-12) {
            return Err(Error::NonPhysical(f64::NAN));
        }
        let eig = matrix.clone().symmetric_eigenvalues();
        if let Some(&bad) = eig.iter().find(|&&x| x < -tol || x > 1.0 + tol) {
            return Err(Error::NonPhysical(bad));
        }
        Ok(Self { matrix, time })
    }

    pub(crate) fn from_trusted(matrix: DMatrix<f64>, time: f64) -> Self {
        Self { matrix, time }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn sites(&self) -> usize {
        self.matrix.nrows()
    }

    /// `L - Tr G`: mean particle number.
    pub fn particle_number(&self) -> f64 {
        self.sites() as f64 - self.matrix.trace()
    }

    /// Principal submatrix on the given sites.
    pub fn restrict(&self, sites: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(sites.len(), sites.len(), |r, c| {
            self.matrix[(sites[r], sites[c])]
        })
    }

    /// Green's function of the first `j` sites.
    pub fn truncate(&self, j: usize) -> GreenFunction {
        let j = j.min(self.sites());
        GreenFunction {
            matrix: self.matrix.view((0, 0), (j, j)).into_owned(),
            time: self.time,
        }
    }
}

/// `G(t) = Uᵀ diag(χ(t)) U`.
pub fn green_function(basis: &ModeBasis, t: f64, occ: &ModeOccupation) -> GreenFunction {
    let chi = mode_correlations(basis, t, occ);
    let u = basis.transform();
    let l = basis.length();
    let mut scaled = u.clone();
    for (r, c) in chi.iter().enumerate() {
        scaled.row_mut(r).scale_mut(*c);
    }
    let mut g = u.transpose() * scaled;
    for i in 0..l {
        for j in 0..i {
            let avg = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = avg;
            g[(j, i)] = avg;
        }
    }
    GreenFunction::from_trusted(g, t)
}

/// Applies `C_k† = Σ_i U_{k,i} f_i†` to a vector supported on the
/// `p`-particle sector, returning its image on sector `p + 1` (both stored
/// sector-local).
fn create_mode(space: &FockSpace, mode: &[f64], p: usize, x: &[f64]) -> Vec<f64> {
    let src = space.sector(p);
    let dst = space.sector(p + 1);
    let mut y = vec![0.0; dst.len()];
    for (offset, &amp) in x.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let s = src.start + offset;
        for (i, &u) in mode.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            if let Some((t, a)) = space.raise(i, s) {
                y[t - dst.start] += u * a * amp;
            }
        }
    }
    y
}

/// Normalized `Π_k C_k† |vac⟩` over the listed modes, as a full vector.
pub fn mode_state(basis: &ModeBasis, space: &FockSpace, modes: &[isize]) -> Result<Vec<f64>> {
    if modes.len() > space.max_total() {
        return Err(Error::OutOfRange {
            what: "particle number",
            value: modes.len().to_string(),
            range: format!("<= {}", space.max_total()),
        });
    }
    let mut x = vec![1.0];
    for (p, &k) in modes.iter().enumerate() {
        x = create_mode(space, &basis.mode(k), p, &x);
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidOccupation(format!(
            "modes {modes:?} give the zero vector"
        )));
    }
    let mut full = vec![0.0; space.dim()];
    let range = space.sector(modes.len());
    for (offset, v) in x.iter().enumerate() {
        full[range.start + offset] = v / norm;
    }
    Ok(full)
}

/// One mode-occupation state of the ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    /// Occupied bulk modes (the edge mode is always present as well).
    pub modes: Vec<isize>,
    /// Particle-number sector, `modes.len() + 1`.
    pub sector: usize,
    /// Amplitudes on that sector, sector-local indexing.
    pub amplitudes: Vec<f64>,
}

/// The mixture `Σ_S w_S(t) |S ∪ {0}⟩⟨S ∪ {0}|` with its time-independent
/// pure states built once.
#[derive(Debug, Clone)]
pub struct SemiclassicalEnsemble {
    space: Arc<FockSpace>,
    gamma: f64,
    bulk: Vec<isize>,
    members: Vec<EnsembleMember>,
}

impl SemiclassicalEnsemble {
    /// Builds all `2^{n_occ}` member states. `amplitude_cap` bounds the total
    /// number of stored amplitudes.
    pub fn new(
        basis: &ModeBasis,
        statistics: Statistics,
        occ: &ModeOccupation,
        amplitude_cap: usize,
    ) -> Result<Self> {
        check_cells(basis, occ)?;
        let bulk = occ.occupied_bulk();
        let max_total = occ.particles();
        let sites = basis.length();
        let stored = ensemble_amplitudes(statistics, sites, occ);
        let space_dim = fock_dimension(statistics, sites, max_total);
        if stored > amplitude_cap as f64 || space_dim > amplitude_cap {
            return Err(Error::DimensionCap {
                dim: stored.max(space_dim as f64) as usize,
                cap: amplitude_cap,
            });
        }
        let space = Arc::new(FockSpace::new(statistics, sites, max_total)?);
        let modes: Vec<Vec<f64>> = bulk.iter().map(|&k| basis.mode(k)).collect();
        let edge = create_mode(&space, &basis.mode(0), 0, &[1.0]);

        let mut members = Vec::with_capacity(1usize << bulk.len().min(40));
        let mut stack: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), edge)];
        // depth-first, children visited in ascending mode order
        while let Some((chosen, amps)) = stack.pop() {
            let next_from = chosen.last().map_or(0, |&i| i + 1);
            let sector = chosen.len() + 1;
            for j in (next_from..bulk.len()).rev() {
                let child = create_mode(&space, &modes[j], sector, &amps);
                let mut c = chosen.clone();
                c.push(j);
                stack.push((c, child));
            }
            let norm = amps.iter().map(|v| v * v).sum::<f64>().sqrt();
            members.push(EnsembleMember {
                modes: chosen.iter().map(|&j| bulk[j]).collect(),
                sector,
                amplitudes: amps.iter().map(|v| v / norm).collect(),
            });
        }
        Ok(Self {
            space,
            gamma: basis.params().gamma(),
            bulk,
            members,
        })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn bulk_modes(&self) -> &[isize] {
        &self.bulk
    }

    /// Weight `e^{-|S|Γt/2} (1 - e^{-Γt/2})^{n_occ - |S|}` of each member.
    pub fn weights(&self, t: f64) -> Vec<f64> {
        let e = survival(self.gamma, t);
        let n = self.bulk.len() as i32;
        self.members
            .iter()
            .map(|m| {
                let s = m.modes.len() as i32;
                e.powi(s) * (1.0 - e).powi(n - s)
            })
            .collect()
    }

    pub fn density_operator(&self, t: f64) -> DensityOperator {
        let dim = self.space.dim();
        let mut rho = DMatrix::<Complex<f64>>::zeros(dim, dim);
        for (member, w) in self.members.iter().zip(self.weights(t)) {
            if w == 0.0 {
                continue;
            }
            let start = self.space.sector(member.sector).start;
            let nz: Vec<(usize, f64)> = member
                .amplitudes
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (start + i, *v))
                .collect();
            for &(r, a) in &nz {
                for &(c, b) in &nz {
                    rho[(r, c)].re += w * a * b;
                }
            }
        }
        DensityOperator::new(self.space.clone(), rho, t).expect("shape matches space")
    }
}

fn check_cells(basis: &ModeBasis, occ: &ModeOccupation) -> Result<()> {
    if occ.cells() != basis.cells() {
        return Err(Error::InvalidOccupation(format!(
            "occupation is for {} cells, chain has {}",
            occ.cells(),
            basis.cells()
        )));
    }
    Ok(())
}

/// Number of amplitudes a [`SemiclassicalEnsemble`] on `sites` sites would
/// store.
pub fn ensemble_amplitudes(statistics: Statistics, sites: usize, occ: &ModeOccupation) -> f64 {
    let bulk = occ.occupied_bulk().len();
    (0..=bulk)
        .map(|s| {
            let sector =
                fock_dimension(statistics, sites, s + 1) - fock_dimension(statistics, sites, s);
            binomial(bulk, s) * sector as f64
        })
        .sum()
}

/// Dense semiclassical density operator at time `t`, refusing Fock spaces
/// larger than `cap`.
pub fn semiclassical_density_operator(
    basis: &ModeBasis,
    t: f64,
    statistics: Statistics,
    occ: &ModeOccupation,
    cap: usize,
) -> Result<DensityOperator> {
    check_cells(basis, occ)?;
    let dim = fock_dimension(statistics, basis.length(), occ.particles());
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    Ok(SemiclassicalEnsemble::new(basis, statistics, occ, usize::MAX)?.density_operator(t))
}

/// Clamp width used by [`gaussian_kernel`].
pub const KERNEL_CLAMP: f64 = 1e-12;

/// `K = ln[(1 - G) G⁻¹]`, with the spectrum of `G` clamped to
/// `[δ, 1 - δ]`.
pub fn gaussian_kernel(g: &GreenFunction) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(g.matrix().clone());
    let mut clamped = 0usize;
    let mut logs = Vec::with_capacity(eig.eigenvalues.len());
    for &lambda in eig.eigenvalues.iter() {
        if !(-1e-9..=1.0 + 1e-9).contains(&lambda) {
            return Err(Error::NonPhysical(lambda));
        }
        let x = lambda.clamp(KERNEL_CLAMP, 1.0 - KERNEL_CLAMP);
        if x != lambda {
            clamped += 1;
        }
        logs.push(((1.0 - x) / x).ln());
    }
    if clamped > 0 {
        log::warn!("gaussian kernel: clamped {clamped} eigenvalue(s) of G to [{KERNEL_CLAMP}, 1 - {KERNEL_CLAMP}]");
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (c, l) in logs.iter().enumerate() {
        scaled.column_mut(c).scale_mut(*l);
    }
    let k = scaled * v.transpose();
    Ok((&k + k.transpose()) * 0.5)
}
