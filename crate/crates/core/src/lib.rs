//! Entanglement dynamics of lossy half-SSH chains.
//!
//! A chain of odd length `L = 2n + 1` with alternating hoppings `g1, g2`
//! hosts one zero-energy edge mode on the even sites. Particle loss on the
//! odd sites leaves that mode untouched, so every initial state relaxes to
//! the pure edge state while the bulk empties.
//!
//! * [`chain`]: parameters, normal modes, edge mode, localization length.
//! * [`fock`], [`density`]: truncated Fock spaces and dense density operators.
//! * [`semiclassical`]: closed-form populations, Green's functions and the
//!   mixture of mode-occupation states.
//! * [`lindblad`], [`ode`]: exact master-equation evolution for small chains.
//! * [`entanglement`]: negativities, entropies and mutual information.
//! * [`analysis`]: curve distances, crossover and effective lengths,
//!   revival visibility.
//!
//! ```
//! use ssh_revival::analysis::{gaussian_curve, revival_visibility, CurveSpec, TimeGrid};
//! use ssh_revival::entanglement::Measure;
//!
//! let spec = CurveSpec::new(0.1, vec![2], TimeGrid::new(20.0, 200)?);
//! let curve = gaussian_curve(51, 0.5, &spec, Measure::FermionicNegativity)?;
//! let revival = revival_visibility(&curve)?;
//! assert!(revival.visibility > 0.1);
//! # Ok::<(), ssh_revival::Error>(())
//! ```

pub mod analysis;
pub mod chain;
pub mod density;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod ode;
pub mod semiclassical;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chain.md")]
    mod chain {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/universality.md")]
    mod universality {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
