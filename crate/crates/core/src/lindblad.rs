//! Exact master-equation integration for small chains.
//!
//! `dρ/dt = -i[H, ρ] + Γ Σ_{j odd} (f_j ρ f_j† - ½{f_j† f_j, ρ})`.
//!
//! Loss only lowers the particle number and `H` conserves it, so a state
//! without coherences between particle-number sectors keeps that form. The
//! integrator therefore stores one dense block per sector.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DMatrixView};

use crate::chain::{single_particle_hamiltonian, ChainParams, ModeBasis};
use crate::density::DensityOperator;
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::ode::{integrate, Tolerances};
use crate::semiclassical::{mode_state, ModeOccupation};

/// Initial pure state with the edge mode and every negative-energy mode
/// occupied.
pub fn build_initial_state(basis: &ModeBasis, space: Arc<FockSpace>) -> Result<DensityOperator> {
    build_occupied_state(basis, space, &ModeOccupation::ground_state(basis.cells()))
}

/// Pure mode-occupation state for an arbitrary initial occupation.
pub fn build_occupied_state(
    basis: &ModeBasis,
    space: Arc<FockSpace>,
    occ: &ModeOccupation,
) -> Result<DensityOperator> {
    check_space(basis.length(), &space)?;
    let mut modes = occ.occupied_bulk();
    modes.push(0);
    let psi = mode_state(basis, &space, &modes)?;
    DensityOperator::pure(space, &psi, 0.0)
}

/// The pure edge state `C_0† |vac⟩`.
pub fn edge_state(basis: &ModeBasis, space: Arc<FockSpace>) -> Result<DensityOperator> {
    check_space(basis.length(), &space)?;
    let psi = mode_state(basis, &space, &[0])?;
    DensityOperator::pure(space, &psi, 0.0)
}

fn check_space(sites: usize, space: &FockSpace) -> Result<()> {
    if space.sites() != sites {
        return Err(Error::OutOfRange {
            what: "Fock space sites",
            value: space.sites().to_string(),
            range: format!("= {sites}"),
        });
    }
    Ok(())
}

struct Block {
    offset: usize,
    start: usize,
    dim: usize,
    hamiltonian: DMatrix<f64>,
    /// Σ_j over lossy sites of n_j, per basis state.
    lossy_occupation: Vec<f64>,
    /// Lowering maps into the next smaller sector: (source, target, amp),
    /// both sector-local, one list per lossy site.
    jumps: Vec<Vec<(usize, usize, f64)>>,
}

struct Generator {
    gamma: f64,
    blocks: Vec<Block>,
    len: usize,
}

impl Generator {
    fn new(space: &FockSpace, params: &ChainParams) -> Self {
        let h = space.one_body(&single_particle_hamiltonian(params));
        let lossy: Vec<usize> = (0..space.sites()).filter(|i| i % 2 == 1).collect();
        let mut blocks = Vec::new();
        let mut offset = 0;
        for p in 0..=space.max_total() {
            let range = space.sector(p);
            let dim = range.len();
            let mut hamiltonian = DMatrix::zeros(dim, dim);
            for &(r, c, v) in h.entries() {
                if range.contains(&r) {
                    hamiltonian[(r - range.start, c - range.start)] += v;
                }
            }
            let lossy_occupation = range
                .clone()
                .map(|s| {
                    let occ = space.occupation(s);
                    lossy.iter().map(|&j| occ[j] as f64).sum()
                })
                .collect();
            let below = if p > 0 { space.sector(p - 1).start } else { 0 };
            let jumps = lossy
                .iter()
                .map(|&j| {
                    range
                        .clone()
                        .filter_map(|s| {
                            space
                                .lower(j, s)
                                .map(|(t, a)| (s - range.start, t - below, a))
                        })
                        .collect()
                })
                .collect();
            blocks.push(Block {
                offset,
                start: range.start,
                dim,
                hamiltonian,
                lossy_occupation,
                jumps,
            });
            offset += 2 * dim * dim;
        }
        Self {
            gamma: params.gamma(),
            blocks,
            len: offset,
        }
    }

    fn pack(&self, rho: &DMatrix<Complex<f64>>) -> Vec<f64> {
        let mut y = vec![0.0; self.len];
        for b in &self.blocks {
            let d2 = b.dim * b.dim;
            for c in 0..b.dim {
                for r in 0..b.dim {
                    let z = rho[(b.start + r, b.start + c)];
                    y[b.offset + c * b.dim + r] = z.re;
                    y[b.offset + d2 + c * b.dim + r] = z.im;
                }
            }
        }
        y
    }

    fn unpack(&self, y: &[f64], dim: usize) -> DMatrix<Complex<f64>> {
        let mut rho = DMatrix::zeros(dim, dim);
        for b in &self.blocks {
            let d2 = b.dim * b.dim;
            for c in 0..b.dim {
                for r in 0..b.dim {
                    rho[(b.start + r, b.start + c)] = Complex::new(
                        y[b.offset + c * b.dim + r],
                        y[b.offset + d2 + c * b.dim + r],
                    );
                }
            }
        }
        rho
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let half_gamma = 0.5 * self.gamma;
        for (p, b) in self.blocks.iter().enumerate() {
            let d = b.dim;
            if d == 0 {
                continue;
            }
            let d2 = d * d;
            let x = DMatrixView::from_slice(&y[b.offset..b.offset + d2], d, d);
            let im = DMatrixView::from_slice(&y[b.offset + d2..b.offset + 2 * d2], d, d);
            let h = &b.hamiltonian;
            // -i[H, X + iY] = (HY - YH) + i(XH - HX)
            let re_part = h * im - im * h;
            let im_part = x * h - h * x;
            let (out_re, out_im) = dy[b.offset..b.offset + 2 * d2].split_at_mut(d2);
            for c in 0..d {
                for r in 0..d {
                    let decay = half_gamma * (b.lossy_occupation[r] + b.lossy_occupation[c]);
                    let i = c * d + r;
                    out_re[i] = re_part[(r, c)] - decay * x[(r, c)];
                    out_im[i] = im_part[(r, c)] - decay * im[(r, c)];
                }
            }
            // feeding from the sector above
            if let Some(upper) = self.blocks.get(p + 1) {
                let du = upper.dim;
                let du2 = du * du;
                let src = &y[upper.offset..upper.offset + 2 * du2];
                for jumps in &upper.jumps {
                    for &(s, t, a) in jumps {
                        for &(sp, tp, ap) in jumps {
                            let w = self.gamma * a * ap;
                            let i_src = sp * du + s;
                            let i_dst = tp * d + t;
                            out_re[i_dst] += w * src[i_src];
                            out_im[i_dst] += w * src[du2 + i_src];
                        }
                    }
                }
            }
        }
    }
}

/// Integrates the master equation, returning the state at each grid time.
pub fn evolve(
    rho0: &DensityOperator,
    params: &ChainParams,
    times: &[f64],
) -> Result<Vec<DensityOperator>> {
    evolve_with_tolerances(rho0, params, times, Tolerances::default())
}

pub fn evolve_with_tolerances(
    rho0: &DensityOperator,
    params: &ChainParams,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<DensityOperator>> {
    let mut out = Vec::with_capacity(times.len());
    evolve_streaming(rho0, params, times, tol, |rho| out.push(rho))?;
    Ok(out)
}

/// Like [`evolve`] but hands each snapshot to `observe` instead of
/// collecting them.
pub fn evolve_streaming<O>(
    rho0: &DensityOperator,
    params: &ChainParams,
    times: &[f64],
    tol: Tolerances,
    mut observe: O,
) -> Result<()>
where
    O: FnMut(DensityOperator),
{
    let space = rho0.space().clone();
    check_space(params.length(), &space)?;
    if times.first().is_some_and(|&t| t != 0.0) {
        return Err(Error::InvalidGrid("time grid must start at 0".into()));
    }
    if rho0.sector_coherence() > 0.0 {
        return Err(Error::Unsupported(
            "initial states with coherences between particle-number sectors".into(),
        ));
    }
    let generator = Generator::new(&space, params);
    let y0 = generator.pack(rho0.matrix());
    let dim = space.dim();
    integrate(
        |_, y, dy| generator.rhs(y, dy),
        &y0,
        times,
        tol,
        |_, t, y| {
            let rho = DensityOperator::new(space.clone(), generator.unpack(y, dim), t)
                .expect("shape matches space");
            observe(rho);
        },
    )
}

/// Total probability of each particle number `m`, keyed by `m`.
pub fn eigenstate_populations(rho: &DensityOperator) -> BTreeMap<usize, f64> {
    rho.sector_populations().into_iter().enumerate().collect()
}

/// `⟨C_0† C_0⟩`, the occupation of the edge mode.
pub fn edge_occupation(rho: &DensityOperator, basis: &ModeBasis) -> f64 {
    let n = rho.one_body_density();
    let a0 = basis.edge_mode();
    let mut acc = 0.0;
    for i in 0..a0.len() {
        for j in 0..a0.len() {
            acc += a0[i] * a0[j] * n[(i, j)].re;
        }
    }
    acc
}

/// Decay rates between mode-occupation eigenstates.
#[derive(Debug, Clone)]
pub struct TransitionRates {
    states: Vec<Vec<isize>>,
    rates: DMatrix<f64>,
}

impl TransitionRates {
    /// Occupied modes of each eigenstate, ascending.
    pub fn states(&self) -> &[Vec<isize>] {
        &self.states
    }

    /// `rates[(to, from)]`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn index_of(&self, modes: &[isize]) -> Option<usize> {
        let mut sorted = modes.to_vec();
        sorted.sort_unstable();
        self.states.iter().position(|s| *s == sorted)
    }

    pub fn rate(&self, from: &[isize], to: &[isize]) -> Option<f64> {
        Some(self.rates[(self.index_of(to)?, self.index_of(from)?)])
    }

    /// Total rate out of a state.
    pub fn total_out(&self, from: &[isize]) -> Option<f64> {
        let j = self.index_of(from)?;
        Some(self.rates.column(j).sum())
    }
}

/// Rates `Γ Σ_{j odd} |⟨α| f_j |β⟩|²` between every pair of singly occupied
/// mode-occupation states that fit in `space`.
pub fn transition_rates(basis: &ModeBasis, space: &FockSpace) -> Result<TransitionRates> {
    check_space(basis.length(), space)?;
    let modes: Vec<isize> = basis.mode_indices().collect();
    let cap = space.max_total().min(modes.len());
    let mut states: Vec<Vec<isize>> = Vec::new();
    for mask in 0u64..(1u64 << modes.len()) {
        if (mask.count_ones() as usize) <= cap {
            states.push(
                (0..modes.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| modes[b])
                    .collect(),
            );
        }
    }
    states.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let vectors: Vec<Vec<f64>> = states
        .iter()
        .map(|s| mode_state(basis, space, s))
        .collect::<Result<_>>()?;
    let lossy: Vec<usize> = (0..basis.length()).filter(|i| i % 2 == 1).collect();
    let gamma = basis.params().gamma();
    let n = states.len();
    let mut rates = DMatrix::zeros(n, n);
    for (b, vb) in vectors.iter().enumerate() {
        for &j in &lossy {
            let mut lowered = vec![0.0; space.dim()];
            for (s, &amp) in vb.iter().enumerate() {
                if amp != 0.0 {
                    if let Some((t, a)) = space.lower(j, s) {
                        lowered[t] += a * amp;
                    }
                }
            }
            for (a, va) in vectors.iter().enumerate() {
                if states[a].len() + 1 != states[b].len() {
                    continue;
                }
                let overlap: f64 = va.iter().zip(&lowered).map(|(x, y)| x * y).sum();
                rates[(a, b)] += gamma * overlap * overlap;
            }
        }
    }
    Ok(TransitionRates { states, rates })
}
