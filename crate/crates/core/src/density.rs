//! Dense many-body density operators on a [`FockSpace`].

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, SparseOp};

pub type Complex64 = Complex<f64>;

#[derive(Debug, Clone)]
pub struct DensityOperator {
    space: Arc<FockSpace>,
    matrix: DMatrix<Complex64>,
    time: f64,
}

impl DensityOperator {
    pub fn new(space: Arc<FockSpace>, matrix: DMatrix<Complex64>, time: f64) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::OutOfRange {
                what: "density matrix shape",
                value: format!("{}x{}", matrix.nrows(), matrix.ncols()),
                range: format!("{0}x{0}", space.dim()),
            });
        }
        Ok(Self {
            space,
            matrix,
            time,
        })
    }

    /// `|ψ⟩⟨ψ|` for a real amplitude vector (normalized here).
    pub fn pure(space: Arc<FockSpace>, psi: &[f64], time: f64) -> Result<Self> {
        let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if psi.len() != space.dim() || norm == 0.0 {
            return Err(Error::OutOfRange {
                what: "state vector",
                value: format!("length {} norm {norm}", psi.len()),
                range: format!("length {} and non-zero", space.dim()),
            });
        }
        let dim = space.dim();
        let mut matrix = DMatrix::zeros(dim, dim);
        let nz: Vec<usize> = (0..dim).filter(|&i| psi[i] != 0.0).collect();
        for &r in &nz {
            for &c in &nz {
                matrix[(r, c)] = Complex::new(psi[r] * psi[c] / (norm * norm), 0.0);
            }
        }
        Ok(Self {
            space,
            matrix,
            time,
        })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    /// Largest coherence between different particle-number sectors.
    pub fn sector_coherence(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for p in 0..=self.space.max_total() {
            let rows = self.space.sector(p);
            for q in 0..=self.space.max_total() {
                if q == p {
                    continue;
                }
                for r in rows.clone() {
                    for c in self.space.sector(q) {
                        worst = worst.max(self.matrix[(r, c)].norm());
                    }
                }
            }
        }
        worst
    }

    /// Total weight in each particle-number sector.
    pub fn sector_populations(&self) -> Vec<f64> {
        (0..=self.space.max_total())
            .map(|p| self.space.sector(p).map(|i| self.matrix[(i, i)].re).sum())
            .collect()
    }

    /// Eigenvalues, ascending. Particle-number sectors are diagonalized
    /// separately when the state has no coherences between them.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let blocks: Vec<std::ops::Range<usize>> = if self.sector_coherence() == 0.0 {
            (0..=self.space.max_total())
                .map(|p| self.space.sector(p))
                .filter(|r| !r.is_empty())
                .collect()
        } else {
            vec![0..self.dim()]
        };
        let mut values = Vec::with_capacity(self.dim());
        for block in blocks {
            values.extend(hermitian_eigenvalues(&self.matrix, block));
        }
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn expectation(&self, op: &SparseOp) -> Complex64 {
        op.entries()
            .iter()
            .map(|&(r, c, v)| self.matrix[(c, r)] * v)
            .sum()
    }

    /// `N_ij = Tr[ρ f_i† f_j]`.
    pub fn one_body_density(&self) -> DMatrix<Complex64> {
        let sites = self.space.sites();
        let mut n = DMatrix::zeros(sites, sites);
        let lowered: Vec<Vec<(usize, usize, f64)>> = (0..sites)
            .map(|j| {
                (0..self.dim())
                    .filter_map(|s| self.space.lower(j, s).map(|(t, a)| (s, t, a)))
                    .collect()
            })
            .collect();
        // ⟨f_i† f_j⟩ = Σ ρ_{s', s} ⟨s'| f_i† f_j |s⟩ = Σ conj(f_i)_{t,s'} (f_j)_{t,s} ρ_{s,s'}
        for i in 0..sites {
            for j in 0..sites {
                let mut acc = Complex::new(0.0, 0.0);
                for &(s, t, a) in &lowered[j] {
                    for &(sp, tp, b) in &lowered[i] {
                        if tp == t {
                            acc += self.matrix[(s, sp)] * (a * b);
                        }
                    }
                }
                n[(i, j)] = acc;
            }
        }
        n
    }

    /// `G_ij = Tr[ρ f_i f_j†] = δ_ij - N_ji` (fermions).
    pub fn green_matrix(&self) -> DMatrix<Complex64> {
        let n = self.one_body_density();
        let sites = n.nrows();
        DMatrix::from_fn(sites, sites, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex::new(delta, 0.0) - n[(j, i)]
        })
    }

    /// Overlap `⟨ψ|ρ|ψ⟩` with a real vector.
    pub fn fidelity_with_pure(&self, psi: &[f64]) -> f64 {
        let norm2: f64 = psi.iter().map(|x| x * x).sum();
        let nz: Vec<usize> = (0..psi.len()).filter(|&i| psi[i] != 0.0).collect();
        let mut acc = Complex::new(0.0, 0.0);
        for &r in &nz {
            for &c in &nz {
                acc += self.matrix[(r, c)] * (psi[r] * psi[c]);
            }
        }
        acc.re / norm2
    }
}

/// Eigenvalues of the principal block `range × range` of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(
    matrix: &DMatrix<Complex64>,
    range: std::ops::Range<usize>,
) -> Vec<f64> {
    let n = range.len();
    if n == 0 {
        return Vec::new();
    }
    let start = range.start;
    let real = (0..n).all(|r| (0..n).all(|c| matrix[(start + r, start + c)].im == 0.0));
    if real {
        let block = DMatrix::from_fn(n, n, |r, c| matrix[(start + r, start + c)].re);
        real_symmetric_eigenvalues(block)
    } else {
        let block = matrix.view((start, start), (n, n)).into_owned();
        SymmetricEigen::new(block).eigenvalues.iter().copied().collect()
    }
}

pub(crate) fn real_symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        _ => m.symmetric_eigenvalues().iter().copied().collect(),
    }
}
