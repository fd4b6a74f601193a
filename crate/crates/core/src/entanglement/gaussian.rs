//! Fermionic Gaussian measures computed from the Green's function.
//!
//! The partial time-reversal negativity of a number-conserving Gaussian
//! state with `Γ = 2G - 1` and `P = diag(-1 on A, +1 on B)` is
//!
//! `ℰ = ½ Σ log₂(1 + σ_j(Z)) + ½ Σ log₂((1 + γ_j²)/2)`,
//! `Z = (P + Γ)(1 + Γ²)⁻¹(P - Γ)`,
//!
//! with `σ_j` the singular values of `Z` and `γ_j` the eigenvalues of `Γ`.
//! This is the same number as `log₂‖ρ^{R_A}‖₁` but avoids forming the
//! two non-commuting Gaussian operators explicitly.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{gaussian_entropy, mode_entropy, EntropyOrder, Partition};
use crate::chain::ModeBasis;
use crate::density::real_symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::semiclassical::{green_function, mode_correlations, survival, GreenFunction, ModeOccupation};

const PHYSICAL_TOL: f64 = 1e-9;

/// Fermionic logarithmic negativity from the full `L × L` Green's function.
pub fn fermionic_log_negativity(g: &GreenFunction, part: &Partition) -> Result<f64> {
    let l = g.sites();
    if part.length() != l {
        return Err(Error::InvalidPartition(format!(
            "partition is for {} sites, Green's function has {l}",
            part.length()
        )));
    }
    let gamma = g.matrix() * 2.0 - DMatrix::identity(l, l);
    let eig = SymmetricEigen::new(gamma.clone());
    for &x in eig.eigenvalues.iter() {
        let lambda = 0.5 * (x + 1.0);
        if !(-PHYSICAL_TOL..=1.0 + PHYSICAL_TOL).contains(&lambda) {
            return Err(Error::NonPhysical(lambda));
        }
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (c, &x) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(c).scale_mut(1.0 / (1.0 + x * x));
    }
    let w = scaled * v.transpose();
    let mut p = DMatrix::<f64>::identity(l, l);
    for &a in part.a() {
        p[(a, a)] = -1.0;
    }
    let z = (&p + &gamma) * w * (&p - &gamma);
    let first: f64 = z.singular_values().iter().map(|s| (1.0 + s).log2()).sum();
    let second: f64 = eig
        .eigenvalues
        .iter()
        .map(|x| ((1.0 + x * x) / 2.0).log2())
        .sum();
    Ok(0.5 * (first + second))
}

/// Gaussian entropy of a correlation (sub)matrix.
pub fn gaussian_entropy_of(m: DMatrix<f64>, order: EntropyOrder) -> Result<f64> {
    let eig = real_symmetric_eigenvalues(m);
    if let Some(&bad) = eig
        .iter()
        .find(|&&x| !(-PHYSICAL_TOL..=1.0 + PHYSICAL_TOL).contains(&x))
    {
        return Err(Error::NonPhysical(bad));
    }
    Ok(gaussian_entropy(&eig, order))
}

/// Everything needed for the negativity and the entropies at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSnapshot {
    pub negativity: f64,
    /// Eigenvalues of `G_AA`.
    pub spectrum_a: Vec<f64>,
    /// Eigenvalues of `G_BB`, except for whole classes listed in `classes`
    /// that were left out of the compressed problem.
    pub spectrum_b: Vec<f64>,
    /// `(χ, multiplicity, compressed rank)` of each eigenvalue class of `G`.
    pub classes: Vec<(f64, usize, usize)>,
}

impl GaussianSnapshot {
    pub fn entropy_a(&self, order: EntropyOrder) -> f64 {
        gaussian_entropy(&self.spectrum_a, order)
    }

    pub fn entropy_b(&self, order: EntropyOrder) -> f64 {
        gaussian_entropy(&self.spectrum_b, order)
            + self
                .classes
                .iter()
                .map(|&(chi, m, r)| (m - r) as f64 * mode_entropy(chi, order))
                .sum::<f64>()
    }

    pub fn entropy_total(&self, order: EntropyOrder) -> f64 {
        self.classes
            .iter()
            .map(|&(chi, m, _)| m as f64 * mode_entropy(chi, order))
            .sum()
    }

    /// `S_A + S_B - S`, with the class contributions cancelled analytically.
    pub fn mutual_information(&self, order: EntropyOrder) -> f64 {
        let mi = self.entropy_a(order) + gaussian_entropy(&self.spectrum_b, order)
            - self
                .classes
                .iter()
                .map(|&(chi, _, r)| r as f64 * mode_entropy(chi, order))
                .sum::<f64>();
        mi.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClassKind {
    Edge,
    Occupied,
    Empty,
}

#[derive(Debug, Clone)]
struct ModeClass {
    kind: ClassKind,
    multiplicity: usize,
    /// `g = Σ_{k∈class} U_{k,a} U_{k,b}` on `A × A`.
    g: DMatrix<f64>,
    /// `X = g R`, with `R` whitening the class image of the `A` sites.
    x: DMatrix<f64>,
}

impl ModeClass {
    fn rank(&self) -> usize {
        self.x.ncols()
    }
}

/// Time-independent reduction of the Gaussian measures to a problem of
/// size at most `3|A|`.
///
/// `G(t)` has only three distinct eigenvalues (edge, initially occupied
/// bulk, initially empty bulk), so the negativity and the subsystem
/// spectra only involve the projections of the `A` sites onto these three
/// eigenspaces. Cost per time is independent of `L`.
#[derive(Debug, Clone)]
pub struct ModeResolvedGaussian {
    gamma: f64,
    a_size: usize,
    classes: Vec<ModeClass>,
}

impl ModeResolvedGaussian {
    /// Returns `None` when a class Gram matrix is too ill-conditioned for
    /// the reduction to be accurate.
    pub fn new(basis: &ModeBasis, occ: &ModeOccupation, part: &Partition) -> Result<Option<Self>> {
        if part.length() != basis.length() {
            return Err(Error::InvalidPartition(format!(
                "partition is for {} sites, chain has {}",
                part.length(),
                basis.length()
            )));
        }
        let u = basis.transform();
        let a = part.a();
        let mut members: [(ClassKind, Vec<usize>); 3] = [
            (ClassKind::Edge, Vec::new()),
            (ClassKind::Occupied, Vec::new()),
            (ClassKind::Empty, Vec::new()),
        ];
        for (row, k) in basis.mode_indices().enumerate() {
            let slot = if k == 0 {
                0
            } else if occ.is_occupied(k) {
                1
            } else {
                2
            };
            members[slot].1.push(row);
        }
        let mut classes = Vec::new();
        for (kind, rows) in members {
            if rows.is_empty() {
                continue;
            }
            let g = DMatrix::from_fn(a.len(), a.len(), |i, j| {
                rows.iter().map(|&r| u[(r, a[i])] * u[(r, a[j])]).sum()
            });
            let eig = SymmetricEigen::new(g.clone());
            let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            let mut order: Vec<usize> = (0..a.len()).collect();
            order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
            let top = values[order[0]].max(0.0);
            let mut kept = Vec::new();
            for &i in order.iter().take(rows.len()) {
                let lambda = values[i];
                if lambda < 1e-28 {
                    continue;
                }
                if lambda < 1e-10 * top {
                    return Ok(None);
                }
                kept.push(i);
            }
            let mut r = DMatrix::zeros(a.len(), kept.len());
            for (c, &i) in kept.iter().enumerate() {
                let s = 1.0 / values[i].sqrt();
                for j in 0..a.len() {
                    r[(j, c)] = eig.eigenvectors[(j, i)] * s;
                }
            }
            let x = &g * r;
            classes.push(ModeClass {
                kind,
                multiplicity: rows.len(),
                g,
                x,
            });
        }
        Ok(Some(Self {
            gamma: basis.params().gamma(),
            a_size: a.len(),
            classes,
        }))
    }

    fn chi(&self, kind: ClassKind, t: f64) -> f64 {
        match kind {
            ClassKind::Edge => 0.0,
            ClassKind::Occupied => 1.0 - survival(self.gamma, t),
            ClassKind::Empty => 1.0,
        }
    }

    pub fn snapshot(&self, t: f64) -> GaussianSnapshot {
        let chi: Vec<f64> = self.classes.iter().map(|c| self.chi(c.kind, t)).collect();
        let gam: Vec<f64> = chi.iter().map(|c| 2.0 * c - 1.0).collect();
        let omega: Vec<f64> = gam.iter().map(|g| 1.0 / (1.0 + g * g)).collect();

        let na = self.a_size;
        let mut s_w = DMatrix::zeros(na, na);
        let mut g_aa = DMatrix::zeros(na, na);
        for (i, c) in self.classes.iter().enumerate() {
            s_w += &c.g * omega[i];
            g_aa += &c.g * chi[i];
        }
        let offsets: Vec<usize> = self
            .classes
            .iter()
            .scan(0, |acc, c| {
                let o = *acc;
                *acc += c.rank();
                Some(o)
            })
            .collect();
        let k: usize = self.classes.iter().map(|c| c.rank()).sum();
        let mut z = DMatrix::zeros(k, k);
        let mut y = DMatrix::zeros(k, k);
        for (f, cf) in self.classes.iter().enumerate() {
            for (d, cd) in self.classes.iter().enumerate() {
                let h = cf.x.transpose() * &cd.x;
                let zw = cf.x.transpose() * &s_w * &cd.x;
                let yg = cf.x.transpose() * &g_aa * &cd.x;
                for i in 0..cf.rank() {
                    for j in 0..cd.rank() {
                        let diag = f == d && i == j;
                        let mut zv = -2.0 * (1.0 - gam[d]) * omega[d] * h[(i, j)]
                            - 2.0 * (1.0 + gam[f]) * omega[f] * h[(i, j)]
                            + 4.0 * zw[(i, j)];
                        let mut yv = -(chi[d] + chi[f]) * h[(i, j)] + yg[(i, j)];
                        if diag {
                            zv += (1.0 - gam[d] * gam[d]) * omega[d];
                            yv += chi[d];
                        }
                        z[(offsets[f] + i, offsets[d] + j)] = zv;
                        y[(offsets[f] + i, offsets[d] + j)] = yv;
                    }
                }
            }
        }
        let first: f64 = if k > 0 {
            z.singular_values().iter().map(|s| (1.0 + s).log2()).sum()
        } else {
            0.0
        };
        let second: f64 = self
            .classes
            .iter()
            .zip(&gam)
            .map(|(c, g)| c.rank() as f64 * ((1.0 + g * g) / 2.0).log2())
            .sum();
        let y = (&y + y.transpose()) * 0.5;
        GaussianSnapshot {
            negativity: (0.5 * (first + second)).max(0.0),
            spectrum_a: real_symmetric_eigenvalues(g_aa),
            spectrum_b: real_symmetric_eigenvalues(y),
            classes: self
                .classes
                .iter()
                .zip(chi)
                .map(|(c, x)| (x, c.multiplicity, c.rank()))
                .collect(),
        }
    }
}

/// Gaussian measures along a trajectory, using the mode-resolved reduction
/// when it is well conditioned and the dense `L × L` path otherwise.
#[derive(Debug, Clone)]
pub enum GaussianEngine {
    Resolved(ModeResolvedGaussian),
    Dense {
        basis: ModeBasis,
        occ: ModeOccupation,
        part: Partition,
    },
}

impl GaussianEngine {
    pub fn new(basis: &ModeBasis, occ: &ModeOccupation, part: &Partition) -> Result<Self> {
        Ok(match ModeResolvedGaussian::new(basis, occ, part)? {
            Some(r) => GaussianEngine::Resolved(r),
            None => {
                log::debug!("mode-resolved reduction ill-conditioned; using dense path");
                Self::dense(basis, occ, part)
            }
        })
    }

    pub fn dense(basis: &ModeBasis, occ: &ModeOccupation, part: &Partition) -> Self {
        GaussianEngine::Dense {
            basis: basis.clone(),
            occ: occ.clone(),
            part: part.clone(),
        }
    }

    pub fn snapshot(&self, t: f64) -> Result<GaussianSnapshot> {
        match self {
            GaussianEngine::Resolved(r) => Ok(r.snapshot(t)),
            GaussianEngine::Dense { basis, occ, part } => {
                let g = green_function(basis, t, occ);
                let negativity = fermionic_log_negativity(&g, part)?;
                let spectrum_a = real_symmetric_eigenvalues(g.restrict(part.a()));
                let spectrum_b = real_symmetric_eigenvalues(g.restrict(part.b()));
                let classes = mode_correlations(basis, t, occ)
                    .into_iter()
                    .map(|c| (c, 1, 1))
                    .collect();
                Ok(GaussianSnapshot {
                    negativity,
                    spectrum_a,
                    spectrum_b,
                    classes,
                })
            }
        }
    }
}
