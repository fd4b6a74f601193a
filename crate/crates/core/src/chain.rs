//! The half-SSH chain and its normal modes.
//!
//! The chain has `L = 2n + 1` sites labelled `0..L`. Bonds alternate between
//! the intra-cell coupling `g1` (sites `2i-2`, `2i-1`) and the inter-cell
//! coupling `g2` (sites `2i-1`, `2i`), so the last site is unpaired. The
//! single-particle spectrum is `{-ε_n..-ε_1, 0, ε_1..ε_n}`; the zero mode
//! lives on even sites only and decays into the bulk as `(-g1/g2)^i`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Physical scenario: chain length, couplings and the decay rate on odd sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    length: usize,
    g1: f64,
    g2: f64,
    gamma: f64,
}

impl ChainParams {
    /// Validates and builds a parameter set.
    ///
    /// `g1 = 0` is accepted as the decoupled-dimer limit; `g2` must be
    /// strictly positive.
    pub fn new(length: usize, g1: f64, g2: f64, gamma: f64) -> Result<Self> {
        if length < 3 || length % 2 == 0 {
            return Err(Error::InvalidLength(length));
        }
        if !g1.is_finite() || g1 < 0.0 {
            return Err(Error::InvalidCoupling {
                name: "g1",
                requirement: "non-negative",
                value: g1,
            });
        }
        if !g2.is_finite() || g2 <= 0.0 {
            return Err(Error::InvalidCoupling {
                name: "g2",
                requirement: "positive",
                value: g2,
            });
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidDecayRate(gamma));
        }
        Ok(Self {
            length,
            g1,
            g2,
            gamma,
        })
    }

    /// Parameters in units where `g2 = 1`.
    pub fn with_ratio(length: usize, ratio: f64, gamma_over_g2: f64) -> Result<Self> {
        Self::new(length, ratio, 1.0, gamma_over_g2)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of complete two-site unit cells, `(L - 1) / 2`.
    pub fn cells(&self) -> usize {
        (self.length - 1) / 2
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn ratio(&self) -> f64 {
        self.g1 / self.g2
    }

    /// Same couplings, different length.
    pub fn resized(&self, length: usize) -> Result<Self> {
        Self::new(length, self.g1, self.g2, self.gamma)
    }

    pub fn is_topological(&self) -> bool {
        self.g1 < self.g2
    }
}

/// Single-particle energies and the orthogonal site-to-mode transform.
///
/// Rows of [`ModeBasis::transform`] are indexed by mode `k ∈ {-n..=n}` at
/// row `k + n`; columns by site. For `k ≥ 1` the rows are
/// `U[±k, 2i] = A[k][i]` and `U[±k, 2i-1] = ±B[k][i]`; row `n` is the
/// zero-energy edge mode.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    params: ChainParams,
    energies: Vec<f64>,
    phases: Vec<f64>,
    even_amplitudes: DMatrix<f64>,
    odd_amplitudes: DMatrix<f64>,
    transform: DMatrix<f64>,
}

impl ModeBasis {
    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn cells(&self) -> usize {
        self.params.cells()
    }

    pub fn length(&self) -> usize {
        self.params.length()
    }

    /// `ε_k` for `k = 1..=n`, stored at index `k - 1`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `φ_k ∈ [0, π]` for `k = 1..=n`, stored at index `k - 1`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `A[k][i]` for `k, i = 0..=n`. Row 0 is the edge mode.
    pub fn even_amplitudes(&self) -> &DMatrix<f64> {
        &self.even_amplitudes
    }

    /// `B[k][i]` for `k, i = 1..=n`, stored at `(k - 1, i - 1)`.
    pub fn odd_amplitudes(&self) -> &DMatrix<f64> {
        &self.odd_amplitudes
    }

    /// The full `L × L` orthogonal transform `U`.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    /// All mode indices in row order, `-n..=n`.
    pub fn mode_indices(&self) -> impl Iterator<Item = isize> {
        let n = self.cells() as isize;
        -n..=n
    }

    pub fn row_of(&self, k: isize) -> usize {
        let n = self.cells() as isize;
        assert!(k.abs() <= n, "mode index {k} out of range for n = {n}");
        (k + n) as usize
    }

    /// Site amplitudes of mode `k`.
    pub fn mode(&self, k: isize) -> Vec<f64> {
        self.transform.row(self.row_of(k)).iter().copied().collect()
    }

    /// Signed single-particle energy of mode `k`.
    pub fn mode_energy(&self, k: isize) -> f64 {
        match k {
            0 => 0.0,
            k if k > 0 => self.energies[k as usize - 1],
            k => -self.energies[(-k) as usize - 1],
        }
    }

    pub fn edge_mode(&self) -> Vec<f64> {
        self.mode(0)
    }
}

/// Diagonalizes the chain in closed form.
pub fn build_mode_basis(params: &ChainParams) -> ModeBasis {
    let n = params.cells();
    let length = params.length();
    let (g1, g2) = (params.g1(), params.g2());
    let norm = (2.0 / (length as f64 + 1.0)).sqrt();

    let mut energies = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    let mut even = DMatrix::zeros(n + 1, n + 1);
    let mut odd = DMatrix::zeros(n, n);

    for k in 1..=n {
        let kt = 2.0 * PI * k as f64 / (length as f64 + 1.0);
        let eps = (g1 * g1 + g2 * g2 + 2.0 * g1 * g2 * kt.cos()).sqrt();
        let phi = ((g1 * kt.cos() + g2) / eps).clamp(-1.0, 1.0).acos();
        energies.push(eps);
        phases.push(phi);
        for i in 0..=n {
            even[(k, i)] = norm * (kt * i as f64 + phi).sin();
        }
        for i in 1..=n {
            odd[(k - 1, i - 1)] = norm * (kt * i as f64).sin();
        }
    }

    // Edge mode: (-g1/g2)^i, normalized by direct summation so that the
    // g1 = g2 limit needs no special case.
    let q = g1 / g2;
    let mut amp = 1.0;
    let mut sum = 0.0;
    for i in 0..=n {
        even[(0, i)] = amp;
        sum += amp * amp;
        amp *= -q;
    }
    let edge_norm = sum.sqrt();
    for i in 0..=n {
        even[(0, i)] /= edge_norm;
    }

    let mut transform = DMatrix::zeros(length, length);
    for i in 0..=n {
        transform[(n, 2 * i)] = even[(0, i)];
    }
    for k in 1..=n {
        for sign in [1.0, -1.0] {
            let row = if sign > 0.0 { n + k } else { n - k };
            for i in 0..=n {
                transform[(row, 2 * i)] = even[(k, i)];
            }
            for i in 1..=n {
                transform[(row, 2 * i - 1)] = sign * odd[(k - 1, i - 1)];
            }
        }
    }

    // Row 0 of `odd` is mode k = 1; keep the public layout documented above.
    ModeBasis {
        params: *params,
        energies,
        phases,
        even_amplitudes: even,
        odd_amplitudes: odd,
        transform,
    }
}

/// Localization length `ξ = 2 / ln(g2/g1) + 1` of the edge mode.
pub fn localization_length(params: &ChainParams) -> Result<f64> {
    if !params.is_topological() {
        return Err(Error::NotTopological {
            ratio: params.ratio(),
        });
    }
    Ok(2.0 / (params.g2() / params.g1()).ln() + 1.0)
}

/// Localization length for a bare coupling ratio `g1/g2`.
pub fn localization_length_for_ratio(ratio: f64) -> Result<f64> {
    localization_length(&ChainParams::with_ratio(3, ratio, 0.0)?)
}

/// The `L × L` hopping matrix.
pub fn single_particle_hamiltonian(params: &ChainParams) -> DMatrix<f64> {
    let length = params.length();
    let mut h = DMatrix::zeros(length, length);
    for i in 1..=params.cells() {
        h[(2 * i - 2, 2 * i - 1)] = params.g1();
        h[(2 * i - 1, 2 * i - 2)] = params.g1();
        h[(2 * i - 1, 2 * i)] = params.g2();
        h[(2 * i, 2 * i - 1)] = params.g2();
    }
    h
}

/// Sorted eigenvalues of the hopping matrix by dense diagonalization.
pub fn dense_spectrum(params: &ChainParams) -> Vec<f64> {
    let eig = SymmetricEigen::new(single_particle_hamiltonian(params));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Normalized kernel vector of the hopping matrix, sign-fixed so that the
/// amplitude on site 0 is positive.
pub fn dense_zero_mode(params: &ChainParams) -> DVector<f64> {
    let eig = SymmetricEigen::new(single_particle_hamiltonian(params));
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty spectrum");
    let mut v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    if v[0] < 0.0 {
        v.neg_mut();
    }
    v
}
