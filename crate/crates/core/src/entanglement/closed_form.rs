//! Entropy per unit cell of the semiclassical mixture.

use super::EntropyOrder;
use crate::error::{Error, Result};

/// Entropy density in bits per unit cell at time `t`, for the von Neumann
/// or the order-2 Rényi entropy. Independent of `L`, `g1` and `g2`; zero at
/// `t = 0` where the state is pure.
pub fn entropy_density_closed_form(t: f64, gamma: f64, order: EntropyOrder) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange {
            what: "time",
            value: t.to_string(),
            range: ">= 0".into(),
        });
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidDecayRate(gamma));
    }
    let x = 0.5 * gamma * t;
    if x == 0.0 {
        return Ok(0.0);
    }
    let e = (-x).exp();
    match order {
        EntropyOrder::VonNeumann => Ok(-(-(-x).exp_m1()).log2() + e * x.exp_m1().log2()),
        EntropyOrder::Renyi(2.0) => Ok(-(1.0 + 2.0 * (-2.0 * x).exp() - 2.0 * e).log2()),
        EntropyOrder::Renyi(g) => Err(Error::Unsupported(format!(
            "closed-form entropy density of order {g}"
        ))),
    }
}
