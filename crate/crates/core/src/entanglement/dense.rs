//! Negativities and reduced states of dense density operators.
//!
//! Basis states are split into `(a, b)` occupation strings on the two
//! subsystems. For fermions the Fock basis is first reordered so that all
//! `A` creation operators stand to the left of the `B` ones, which costs a
//! sign `(-1)^{#(b < a, both occupied)}`.
//!
//! The partial transpose and the partial time-reversal both map
//! `|a b⟩⟨a' b'|` to `|a' b⟩⟨a b'|`, the latter with the phase
//! `i^{(τ_a + τ_a') mod 2} (-1)^{(τ_a + τ_a')(τ_b + τ_b')}` (`τ` = particle
//! number). Either image commutes with `n_A - n_B` evaluated on the row
//! label, so the trace norm is accumulated block by block.

use std::collections::HashMap;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::Partition;
use crate::density::{hermitian_eigenvalues, Complex64, DensityOperator};
use crate::error::{Error, Result};
use crate::fock::{FockSpace, Statistics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NegativityFlavor {
    /// Partial transpose in the (A-first) occupation basis.
    Conventional,
    /// Partial time-reversal; fermions only.
    Fermionic,
}

impl NegativityFlavor {
    pub fn name(self) -> &'static str {
        match self {
            NegativityFlavor::Conventional => "conventional",
            NegativityFlavor::Fermionic => "fermionic",
        }
    }
}

/// Splits basis states into subsystem occupation strings.
struct Splitter {
    a_configs: Vec<Vec<u8>>,
    b_configs: Vec<Vec<u8>>,
    /// per basis state: (a index, b index, reorder sign)
    split: Vec<(usize, usize, f64)>,
}

impl Splitter {
    fn new(space: &FockSpace, a_sites: &[usize], b_sites: &[usize]) -> Self {
        let mut a_index: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut b_index: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut a_configs = Vec::new();
        let mut b_configs = Vec::new();
        let fermi = space.statistics() == Statistics::Fermi;
        let split = (0..space.dim())
            .map(|s| {
                let occ = space.occupation(s);
                let a: Vec<u8> = a_sites.iter().map(|&i| occ[i]).collect();
                let b: Vec<u8> = b_sites.iter().map(|&i| occ[i]).collect();
                let sign = if fermi {
                    reorder_sign(occ, a_sites, b_sites)
                } else {
                    1.0
                };
                let ia = *a_index.entry(a.clone()).or_insert_with(|| {
                    a_configs.push(a);
                    a_configs.len() - 1
                });
                let ib = *b_index.entry(b.clone()).or_insert_with(|| {
                    b_configs.push(b);
                    b_configs.len() - 1
                });
                (ia, ib, sign)
            })
            .collect();
        Self {
            a_configs,
            b_configs,
            split,
        }
    }
}

fn count(config: &[u8]) -> i64 {
    config.iter().map(|&n| n as i64).sum()
}

/// Sign of moving every occupied `A` site in front of every occupied `B`
/// site.
pub(crate) fn reorder_sign(occ: &[u8], a_sites: &[usize], b_sites: &[usize]) -> f64 {
    let mut swaps = 0usize;
    for &a in a_sites {
        if occ[a] == 0 {
            continue;
        }
        swaps += b_sites.iter().filter(|&&b| b < a && occ[b] > 0).count();
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check(rho: &DensityOperator, part: &Partition, flavor: NegativityFlavor) -> Result<()> {
    if part.length() != rho.space().sites() {
        return Err(Error::InvalidPartition(format!(
            "partition is for {} sites, state has {}",
            part.length(),
            rho.space().sites()
        )));
    }
    if flavor == NegativityFlavor::Fermionic && rho.space().statistics() != Statistics::Fermi {
        return Err(Error::Unsupported(
            "fermionic negativity of a bosonic state".into(),
        ));
    }
    Ok(())
}

/// Image entries `(row (a,b), col (a,b), value)` of the partial
/// transpose or time-reversal.
fn transformed_entries(
    rho: &DensityOperator,
    part: &Partition,
    flavor: NegativityFlavor,
) -> (Splitter, Vec<((usize, usize), (usize, usize), Complex64)>) {
    let splitter = Splitter::new(rho.space(), part.a(), part.b());
    let m = rho.matrix();
    let dim = rho.dim();
    let mut out = Vec::new();
    for c in 0..dim {
        for r in 0..dim {
            let v = m[(r, c)];
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let (ar, br, sr) = splitter.split[r];
            let (ac, bc, sc) = splitter.split[c];
            let mut value = v * (sr * sc);
            if flavor == NegativityFlavor::Fermionic {
                let ta = count(&splitter.a_configs[ar]) + count(&splitter.a_configs[ac]);
                let tb = count(&splitter.b_configs[br]) + count(&splitter.b_configs[bc]);
                if ta % 2 == 1 {
                    value *= Complex::new(0.0, 1.0);
                }
                if (ta * tb) % 2 == 1 {
                    value = -value;
                }
                // (-1)^{F_A} on the column label makes each block Hermitian
                if count(&splitter.a_configs[ar]) % 2 == 1 {
                    value = -value;
                }
            }
            out.push(((ac, br), (ar, bc), value));
        }
    }
    (splitter, out)
}

fn trace_norm(block: DMatrix<Complex64>) -> f64 {
    let n = block.nrows();
    let defect = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| (block[(r, c)] - block[(c, r)].conj()).norm())
        .fold(0.0, f64::max);
    let scale = block.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    if defect <= 1e-12 * scale {
        hermitian_eigenvalues(&block, 0..n).iter().map(|x| x.abs()).sum()
    } else {
        block.singular_values().iter().sum()
    }
}

/// `log₂ ‖ρ^{T_A}‖₁` (conventional) or `log₂ ‖ρ^{R_A}‖₁` (fermionic), with
/// the trace norm accumulated over blocks of fixed `n_A - n_B`.
pub fn dense_log_negativity(
    rho: &DensityOperator,
    part: &Partition,
    flavor: NegativityFlavor,
) -> Result<f64> {
    check(rho, part, flavor)?;
    if rho.sector_coherence() > 0.0 {
        return Err(Error::Unsupported(
            "block evaluation needs a state without coherences between particle-number sectors"
                .into(),
        ));
    }
    let (splitter, entries) = transformed_entries(rho, part, flavor);
    let charge = |(a, b): (usize, usize)| {
        count(&splitter.a_configs[a]) - count(&splitter.b_configs[b])
    };
    let mut blocks: HashMap<i64, (HashMap<(usize, usize), usize>, Vec<(usize, usize, Complex64)>)> =
        HashMap::new();
    for (row, col, v) in entries {
        let q = charge(row);
        debug_assert_eq!(q, charge(col));
        let (index, list) = blocks.entry(q).or_default();
        let n = index.len();
        let r = *index.entry(row).or_insert(n);
        let n = index.len();
        let c = *index.entry(col).or_insert(n);
        list.push((r, c, v));
    }
    let mut keys: Vec<i64> = blocks.keys().copied().collect();
    keys.sort_unstable();
    let mut norm = 0.0;
    for q in keys {
        let (index, list) = &blocks[&q];
        let n = index.len();
        let mut block = DMatrix::zeros(n, n);
        for &(r, c, v) in list {
            block[(r, c)] += v;
        }
        norm += trace_norm(block);
    }
    Ok(norm.log2().max(0.0))
}

/// Same quantity from a single unblocked matrix; brute-force reference for
/// the block decomposition.
pub fn dense_log_negativity_unblocked(
    rho: &DensityOperator,
    part: &Partition,
    flavor: NegativityFlavor,
) -> Result<f64> {
    check(rho, part, flavor)?;
    let (_, entries) = transformed_entries(rho, part, flavor);
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut list = Vec::with_capacity(entries.len());
    for (row, col, v) in entries {
        let n = index.len();
        let r = *index.entry(row).or_insert(n);
        let n = index.len();
        let c = *index.entry(col).or_insert(n);
        list.push((r, c, v));
    }
    let n = index.len();
    let mut full = DMatrix::<Complex64>::zeros(n, n);
    for (r, c, v) in list {
        full[(r, c)] += v;
    }
    let norm: f64 = full.singular_values().iter().sum();
    Ok(norm.log2().max(0.0))
}

/// Reduced density matrix on a set of kept sites.
#[derive(Debug, Clone)]
pub struct ReducedState {
    /// Occupation strings of the kept sites labelling rows and columns.
    pub configs: Vec<Vec<u8>>,
    pub matrix: DMatrix<Complex64>,
}

impl ReducedState {
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.matrix.nrows();
        if self.matrix.iter().all(|z| z.im == 0.0) {
            crate::density::real_symmetric_eigenvalues(self.matrix.map(|z| z.re))
        } else {
            SymmetricEigen::new(self.matrix.clone())
                .eigenvalues
                .iter()
                .copied()
                .take(n)
                .collect()
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows()).map(|i| self.matrix[(i, i)].re).sum()
    }
}

/// Partial trace over every site not in `kept`.
pub fn reduced_density(rho: &DensityOperator, kept: &[usize]) -> Result<ReducedState> {
    let sites = rho.space().sites();
    let mut a: Vec<usize> = kept.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.len() != kept.len() || a.iter().any(|&s| s >= sites) {
        return Err(Error::InvalidPartition(format!(
            "invalid kept sites {kept:?} for {sites} sites"
        )));
    }
    let b: Vec<usize> = (0..sites).filter(|s| a.binary_search(s).is_err()).collect();
    let splitter = Splitter::new(rho.space(), &a, &b);
    let n = splitter.a_configs.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    // group basis states by their traced-out string
    let mut by_b: HashMap<usize, Vec<(usize, usize, f64)>> = HashMap::new();
    for (s, &(ia, ib, sign)) in splitter.split.iter().enumerate() {
        by_b.entry(ib).or_default().push((s, ia, sign));
    }
    let m = rho.matrix();
    for group in by_b.values() {
        for &(s, ia, si) in group {
            for &(sp, iap, sj) in group {
                let v = m[(s, sp)];
                if v.re != 0.0 || v.im != 0.0 {
                    matrix[(ia, iap)] += v * (si * sj);
                }
            }
        }
    }
    Ok(ReducedState {
        configs: splitter.a_configs,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_mode_basis, ChainParams};
    use crate::semiclassical::{semiclassical_density_operator, ModeOccupation};
    use std::sync::Arc;

    fn dimer(stats: Statistics, t: f64) -> DensityOperator {
        let basis = build_mode_basis(&ChainParams::new(3, 0.0, 1.0, 0.1).unwrap());
        semiclassical_density_operator(&basis, t, stats, &ModeOccupation::ground_state(1), 4096)
            .unwrap()
    }

    #[test]
    fn decoupled_dimer_one_bit() {
        let part = Partition::new(3, [2]).unwrap();
        let f = dimer(Statistics::Fermi, 0.0);
        assert!((dense_log_negativity(&f, &part, NegativityFlavor::Fermionic).unwrap() - 1.0).abs() < 1e-12);
        assert!((dense_log_negativity(&f, &part, NegativityFlavor::Conventional).unwrap() - 1.0).abs() < 1e-12);
        let b = dimer(Statistics::Bose, 0.0);
        assert!((dense_log_negativity(&b, &part, NegativityFlavor::Conventional).unwrap() - 1.0).abs() < 1e-12);
        assert!(dense_log_negativity(&b, &part, NegativityFlavor::Fermionic).is_err());
        let late = dimer(Statistics::Bose, 1e4);
        assert!(dense_log_negativity(&late, &part, NegativityFlavor::Conventional).unwrap() < 1e-12);
    }

    #[test]
    fn product_state_has_zero_negativity() {
        let space = Arc::new(FockSpace::fermi(4).unwrap());
        let mut psi = vec![0.0; 16];
        psi[space.index_of(&[1, 0, 1, 0]).unwrap()] = 1.0;
        let rho = DensityOperator::pure(space, &psi, 0.0).unwrap();
        let part = Partition::new(4, [1, 2]).unwrap();
        for flavor in [NegativityFlavor::Conventional, NegativityFlavor::Fermionic] {
            assert!(dense_log_negativity(&rho, &part, flavor).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn reduced_state_of_dimer() {
        let rho = dimer(Statistics::Fermi, 0.0);
        let r = reduced_density(&rho, &[2]).unwrap();
        let mut eig = r.eigenvalues();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] - 0.5).abs() < 1e-12 && (eig[1] - 0.5).abs() < 1e-12);
        assert!((r.trace() - 1.0).abs() < 1e-12);
        assert!(reduced_density(&rho, &[3]).is_err());
    }
}
