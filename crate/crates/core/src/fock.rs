//! Occupation-number bases for fermions and bosons on a chain.
//!
//! States are graded by total particle number and ordered lexicographically
//! (ascending in `(n_0, n_1, ..)`) inside each grade, so every
//! particle-number sector is a contiguous index range. Lookup is by
//! combinatorial ranking; no hash maps are involved.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Fermi,
    Bose,
}

impl Statistics {
    pub fn name(self) -> &'static str {
        match self {
            Statistics::Fermi => "fermi",
            Statistics::Bose => "bose",
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fermi" | "fermion" | "fermions" | "fermionic" => Ok(Statistics::Fermi),
            "bose" | "boson" | "bosons" | "bosonic" => Ok(Statistics::Bose),
            other => Err(Error::OutOfRange {
                what: "statistics",
                value: other.to_string(),
                range: "{fermi, bose}".to_string(),
            }),
        }
    }
}

impl std::fmt::Display for Statistics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Counting table `ways[s][p]`: occupation vectors on `s` sites with total
/// `p`, each site holding at most `site_cap` particles.
#[derive(Debug, Clone)]
struct Ranker {
    ways: Vec<Vec<usize>>,
}

impl Ranker {
    fn new(sites: usize, max_total: usize, site_cap: usize) -> Self {
        let mut ways = vec![vec![0usize; max_total + 1]; sites + 1];
        ways[0][0] = 1;
        for s in 1..=sites {
            for p in 0..=max_total {
                let mut total = 0usize;
                for v in 0..=p.min(site_cap) {
                    total = total.saturating_add(ways[s - 1][p - v]);
                }
                ways[s][p] = total;
            }
        }
        Self { ways }
    }

    fn count(&self, sites: usize, total: usize) -> usize {
        self.ways[sites][total]
    }
}

/// Dimension of a Fock space without building it.
pub fn fock_dimension(statistics: Statistics, sites: usize, max_total: usize) -> usize {
    let (max_total, cap) = match statistics {
        Statistics::Fermi => (max_total.min(sites), 1),
        Statistics::Bose => (max_total, max_total),
    };
    let ranker = Ranker::new(sites, max_total, cap);
    (0..=max_total).fold(0usize, |acc, p| acc.saturating_add(ranker.count(sites, p)))
}

#[derive(Debug, Clone)]
pub struct FockSpace {
    statistics: Statistics,
    sites: usize,
    max_total: usize,
    site_cap: usize,
    ranker: Ranker,
    sector_starts: Vec<usize>,
    occupations: Vec<u8>,
}

impl FockSpace {
    /// Builds the space of all configurations with at most `max_total`
    /// particles. For fermions `max_total` is clipped to `sites`.
    pub fn new(statistics: Statistics, sites: usize, max_total: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::OutOfRange {
                what: "site count",
                value: "0".into(),
                range: ">= 1".into(),
            });
        }
        let (max_total, site_cap) = match statistics {
            Statistics::Fermi => (max_total.min(sites), 1),
            Statistics::Bose => (max_total, max_total),
        };
        if site_cap > u8::MAX as usize {
            return Err(Error::OutOfRange {
                what: "particle cap",
                value: site_cap.to_string(),
                range: "<= 255".into(),
            });
        }
        let ranker = Ranker::new(sites, max_total, site_cap);
        let mut sector_starts = Vec::with_capacity(max_total + 2);
        let mut start = 0usize;
        for p in 0..=max_total {
            sector_starts.push(start);
            start += ranker.count(sites, p);
        }
        sector_starts.push(start);

        let mut occupations = Vec::with_capacity(start * sites);
        let mut current = vec![0u8; sites];
        for p in 0..=max_total {
            enumerate(&mut current, 0, p, site_cap, &mut occupations);
        }
        debug_assert_eq!(occupations.len(), start * sites);
        Ok(Self {
            statistics,
            sites,
            max_total,
            site_cap,
            ranker,
            sector_starts,
            occupations,
        })
    }

    /// Complete fermionic space, dimension `2^sites`.
    pub fn fermi(sites: usize) -> Result<Self> {
        Self::new(Statistics::Fermi, sites, sites)
    }

    pub fn bose(sites: usize, max_total: usize) -> Result<Self> {
        Self::new(Statistics::Bose, sites, max_total)
    }

    /// Like [`FockSpace::new`] but refuses to build beyond `cap` states.
    pub fn with_cap(
        statistics: Statistics,
        sites: usize,
        max_total: usize,
        cap: usize,
    ) -> Result<Self> {
        let dim = fock_dimension(statistics, sites, max_total);
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        Self::new(statistics, sites, max_total)
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn max_total(&self) -> usize {
        self.max_total
    }

    pub fn dim(&self) -> usize {
        *self.sector_starts.last().unwrap()
    }

    /// Index range of the `p`-particle sector (empty if `p > max_total`).
    pub fn sector(&self, p: usize) -> Range<usize> {
        if p > self.max_total {
            let end = self.dim();
            return end..end;
        }
        self.sector_starts[p]..self.sector_starts[p + 1]
    }

    pub fn occupation(&self, index: usize) -> &[u8] {
        &self.occupations[index * self.sites..(index + 1) * self.sites]
    }

    pub fn particle_number(&self, index: usize) -> usize {
        self.occupation(index).iter().map(|&n| n as usize).sum()
    }

    /// Position of an occupation vector, if it belongs to the space.
    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        if occupation.len() != self.sites {
            return None;
        }
        let total: usize = occupation.iter().map(|&n| n as usize).sum();
        if total > self.max_total || occupation.iter().any(|&n| n as usize > self.site_cap) {
            return None;
        }
        let mut rank = 0usize;
        let mut remaining = total;
        for (i, &n) in occupation.iter().enumerate() {
            let rest = self.sites - i - 1;
            for v in 0..n as usize {
                rank += self.ranker.count(rest, remaining - v);
            }
            remaining -= n as usize;
        }
        Some(self.sector_starts[total] + rank)
    }

    /// `f_site |index⟩ = amp |target⟩`, or `None` if it vanishes.
    pub fn lower(&self, site: usize, index: usize) -> Option<(usize, f64)> {
        let occ = self.occupation(index);
        let n = occ[site];
        if n == 0 {
            return None;
        }
        let amp = self.amplitude(occ, site, n, false);
        self.shifted_index(occ, site, -1).map(|t| (t, amp))
    }

    /// `f_site† |index⟩ = amp |target⟩`, or `None` if it vanishes or leaves
    /// the truncated space.
    pub fn raise(&self, site: usize, index: usize) -> Option<(usize, f64)> {
        let occ = self.occupation(index);
        let n = occ[site];
        if n as usize >= self.site_cap {
            return None;
        }
        let amp = self.amplitude(occ, site, n, true);
        self.shifted_index(occ, site, 1).map(|t| (t, amp))
    }

    /// Index of `occ` with one particle added to or removed from `site`.
    fn shifted_index(&self, occ: &[u8], site: usize, delta: isize) -> Option<usize> {
        let total = (occ.iter().map(|&n| n as usize).sum::<usize>() as isize + delta) as usize;
        if total > self.max_total {
            return None;
        }
        let mut rank = 0usize;
        let mut remaining = total;
        for (i, &n) in occ.iter().enumerate() {
            let n = if i == site {
                (n as isize + delta) as usize
            } else {
                n as usize
            };
            let rest = self.sites - i - 1;
            for v in 0..n {
                rank += self.ranker.count(rest, remaining - v);
            }
            remaining -= n;
        }
        Some(self.sector_starts[total] + rank)
    }

    fn amplitude(&self, occ: &[u8], site: usize, n: u8, raising: bool) -> f64 {
        match self.statistics {
            Statistics::Fermi => {
                let before: u32 = occ[..site].iter().map(|&x| x as u32).sum();
                if before % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Statistics::Bose => {
                if raising {
                    (n as f64 + 1.0).sqrt()
                } else {
                    (n as f64).sqrt()
                }
            }
        }
    }

    /// Matrix of `f_site`.
    pub fn annihilation(&self, site: usize) -> SparseOp {
        let entries = (0..self.dim())
            .filter_map(|s| self.lower(site, s).map(|(t, a)| (t, s, a)))
            .collect();
        SparseOp::new(self.dim(), entries)
    }

    /// Matrix of `f_site† f_site`.
    pub fn number(&self, site: usize) -> SparseOp {
        let entries = (0..self.dim())
            .filter_map(|s| {
                let n = self.occupation(s)[site];
                (n > 0).then_some((s, s, n as f64))
            })
            .collect();
        SparseOp::new(self.dim(), entries)
    }

    /// Second quantization of a one-body matrix, `Σ h_ij f_i† f_j`.
    pub fn one_body(&self, h: &DMatrix<f64>) -> SparseOp {
        assert_eq!(h.nrows(), self.sites);
        let mut entries = Vec::new();
        for s in 0..self.dim() {
            for j in 0..self.sites {
                let Some((mid, a)) = self.lower(j, s) else {
                    continue;
                };
                for i in 0..self.sites {
                    let hij = h[(i, j)];
                    if hij == 0.0 {
                        continue;
                    }
                    if let Some((t, b)) = self.raise(i, mid) {
                        entries.push((t, s, hij * a * b));
                    }
                }
            }
        }
        SparseOp::new(self.dim(), entries).compressed()
    }
}

fn enumerate(current: &mut [u8], pos: usize, remaining: usize, cap: usize, out: &mut Vec<u8>) {
    let sites = current.len();
    if pos == sites - 1 {
        if remaining <= cap {
            current[pos] = remaining as u8;
            out.extend_from_slice(current);
        }
        return;
    }
    for v in 0..=remaining.min(cap) {
        current[pos] = v as u8;
        enumerate(current, pos + 1, remaining - v, cap, out);
    }
    current[pos] = 0;
}

/// Real sparse operator in coordinate form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseOp {
    pub fn new(dim: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Merges duplicate coordinates and drops exact zeros.
    pub fn compressed(mut self) -> Self {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Self {
            dim: self.dim,
            entries: merged,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }
}
