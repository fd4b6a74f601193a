//! Subsystem spectra of the semiclassical mixture without a dense `ρ`.
//!
//! Every member `|ψ_S⟩` is reshaped into a matrix `Ψ_S[a, b]` over the two
//! subsystems. Then `ρ_A = Σ w_S Ψ_S Ψ_Sᵀ` is small, and the non-zero
//! spectrum of `ρ_B = Σ w_S Ψ_Sᵀ Ψ_S` equals that of the Gram matrix
//! `K = √w O √w` with `O` the overlaps of the rows of all `Ψ_S`. Both
//! `O` and the per-member `Ψ_S Ψ_Sᵀ` are time independent.

use nalgebra::DMatrix;

use super::dense::reorder_sign;
use super::{spectrum_entropy, EntropyOrder, Partition};
use crate::density::real_symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::fock::{FockSpace, Statistics};
use crate::semiclassical::SemiclassicalEnsemble;

/// One row `Ψ_S[a, ·]`, living in a fixed particle-number sector of `B`.
struct Row {
    member: usize,
}

struct GramBlock {
    rows: Vec<Row>,
    overlaps: DMatrix<f64>,
}

pub struct EnsembleSpectra<'e> {
    ensemble: &'e SemiclassicalEnsemble,
    a_dim: usize,
    /// `Ψ_S Ψ_Sᵀ` per member.
    local: Vec<DMatrix<f64>>,
    blocks: Vec<GramBlock>,
}

impl<'e> EnsembleSpectra<'e> {
    /// `scratch_cap` bounds the size of the dense per-sector row matrices.
    pub fn new(
        ensemble: &'e SemiclassicalEnsemble,
        part: &Partition,
        scratch_cap: usize,
    ) -> Result<Self> {
        let space = ensemble.space();
        if part.length() != space.sites() {
            return Err(Error::InvalidPartition(format!(
                "partition is for {} sites, state has {}",
                part.length(),
                space.sites()
            )));
        }
        let stats = space.statistics();
        let max_total = space.max_total();
        let a_space = FockSpace::new(stats, part.a().len(), max_total)?;
        let b_space = FockSpace::new(stats, part.b().len(), max_total)?;
        let a_dim = a_space.dim();

        // rows grouped by the particle number left in B
        let mut grouped: Vec<Vec<(Row, Vec<(usize, f64)>)>> =
            (0..=max_total).map(|_| Vec::new()).collect();
        let mut local = Vec::with_capacity(ensemble.members().len());
        let mut a_occ = vec![0u8; part.a().len()];
        let mut b_occ = vec![0u8; part.b().len()];
        for (mi, member) in ensemble.members().iter().enumerate() {
            let start = space.sector(member.sector).start;
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); a_dim];
            for (offset, &amp) in member.amplitudes.iter().enumerate() {
                if amp == 0.0 {
                    continue;
                }
                let occ = space.occupation(start + offset);
                for (k, &s) in part.a().iter().enumerate() {
                    a_occ[k] = occ[s];
                }
                for (k, &s) in part.b().iter().enumerate() {
                    b_occ[k] = occ[s];
                }
                let sign = if stats == Statistics::Fermi {
                    reorder_sign(occ, part.a(), part.b())
                } else {
                    1.0
                };
                let ia = a_space.index_of(&a_occ).expect("subsystem string fits");
                let ib = b_space.index_of(&b_occ).expect("subsystem string fits");
                rows[ia].push((ib, sign * amp));
            }
            for row in rows.iter_mut() {
                row.sort_unstable_by_key(|e| e.0);
            }
            let mut psi_psi = DMatrix::zeros(a_dim, a_dim);
            for i in 0..a_dim {
                for j in 0..=i {
                    let v = sparse_dot(&rows[i], &rows[j]);
                    psi_psi[(i, j)] = v;
                    psi_psi[(j, i)] = v;
                }
            }
            local.push(psi_psi);
            for row in rows {
                if row.is_empty() {
                    continue;
                }
                let q = b_space.particle_number(row[0].0);
                grouped[q].push((Row { member: mi }, row));
            }
        }

        let mut blocks = Vec::new();
        for (q, rows) in grouped.into_iter().enumerate() {
            if rows.is_empty() {
                continue;
            }
            let sector = b_space.sector(q);
            let cells = sector.len().saturating_mul(rows.len());
            if cells > scratch_cap {
                return Err(Error::DimensionCap {
                    dim: cells,
                    cap: scratch_cap,
                });
            }
            let mut dense = DMatrix::zeros(sector.len(), rows.len());
            for (c, (_, row)) in rows.iter().enumerate() {
                for &(ib, v) in row {
                    dense[(ib - sector.start, c)] = v;
                }
            }
            let overlaps = dense.transpose() * &dense;
            blocks.push(GramBlock {
                rows: rows.into_iter().map(|(r, _)| r).collect(),
                overlaps,
            });
        }
        Ok(Self {
            ensemble,
            a_dim,
            local,
            blocks,
        })
    }

    /// Spectrum of `ρ_A(t)`.
    pub fn spectrum_a(&self, t: f64) -> Vec<f64> {
        let mut rho_a = DMatrix::zeros(self.a_dim, self.a_dim);
        for (w, m) in self.ensemble.weights(t).iter().zip(&self.local) {
            if *w != 0.0 {
                rho_a += m * *w;
            }
        }
        real_symmetric_eigenvalues(rho_a)
    }

    /// Non-zero spectrum of `ρ_B(t)`.
    pub fn spectrum_b(&self, t: f64) -> Vec<f64> {
        let w = self.ensemble.weights(t);
        let mut out = Vec::new();
        for block in &self.blocks {
            let root: Vec<f64> = block.rows.iter().map(|r| w[r.member].sqrt()).collect();
            let n = root.len();
            let k = DMatrix::from_fn(n, n, |i, j| root[i] * block.overlaps[(i, j)] * root[j]);
            out.extend(real_symmetric_eigenvalues(k));
        }
        out
    }

    /// Spectrum of the full mixture: the member weights.
    pub fn spectrum(&self, t: f64) -> Vec<f64> {
        self.ensemble.weights(t)
    }

    pub fn mutual_information(&self, t: f64, order: EntropyOrder) -> f64 {
        let mi = spectrum_entropy(&self.spectrum_a(t), order)
            + spectrum_entropy(&self.spectrum_b(t), order)
            - spectrum_entropy(&self.spectrum(t), order);
        mi.max(0.0)
    }

    /// Dimension of the `A` Fock space.
    pub fn subsystem_dim(&self) -> usize {
        self.a_dim
    }
}

fn sparse_dot(x: &[(usize, f64)], y: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += x[i].1 * y[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}
