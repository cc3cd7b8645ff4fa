//! Topology bookkeeping: Euler characteristic, Betti numbers, the predicted
//! vanishing order of the Ruelle zeta at s = 0, the Fried leading-coefficient
//! magnitude, and the genus-inference inverse.
//!
//! For a compact oriented hyperbolic surface of genus g the unit tangent
//! bundle M has b1(M) = b1(Sigma) = 2g, and the predicted order is
//! -chi(Sigma) = 2g - 2 = b1(M) - 2. The stable/unstable bundles are assumed
//! orientable throughout (the standing assumption behind the zeta
//! factorization); the ledger records that assumption.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum TopologyError {
    /// The theorem needs negative curvature: chi < 0, so g >= 2.
    #[error("UnsupportedGenus: genus {genus} has chi >= 0")]
    UnsupportedGenus { genus: i64 },
    /// No compact oriented hyperbolic surface realizes this vanishing order.
    #[error("NotRealizable: order {order} is not a positive even integer")]
    NotRealizable { order: i64 },
}

/// Everything the vanishing-order prediction needs, derived from the genus
/// alone.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologyLedger {
    pub genus: u32,
    pub euler_characteristic: i64,
    pub betti_surface: u32,
    pub betti_unit_tangent: u32,
    pub predicted_order: u32,
    /// (2 pi)^{|chi|}: |leading coefficient| in the Fried model.
    pub fried_coefficient_magnitude: f64,
    /// Standing assumption recorded with every ledger.
    pub orientable_bundles_assumed: bool,
}

/// Resonance-multiplicity ledger at s = 0: m_R = m1 - m0 - m2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityLedger {
    pub m0: u32,
    pub m1: u32,
    pub m2: u32,
    pub m_r: i64,
}

pub fn ledger_for_genus(genus: u32) -> Result<TopologyLedger, TopologyError> {
    if genus < 2 {
        return Err(TopologyError::UnsupportedGenus {
            genus: genus as i64,
        });
    }
    let chi = 2 - 2 * genus as i64;
    let order = (-chi) as u32;
    Ok(TopologyLedger {
        genus,
        euler_characteristic: chi,
        betti_surface: 2 * genus,
        betti_unit_tangent: 2 * genus,
        predicted_order: order,
        fried_coefficient_magnitude: (2.0 * std::f64::consts::PI).powi(order as i32),
        orientable_bundles_assumed: true,
    })
}

pub fn multiplicity_balance(m0: u32, m1: u32, m2: u32) -> MultiplicityLedger {
    MultiplicityLedger {
        m0,
        m1,
        m2,
        m_r: m1 as i64 - m0 as i64 - m2 as i64,
    }
}

/// Invert the prediction: a measured vanishing order determines the genus,
/// g = order/2 + 1.
pub fn genus_from_order(order: i64) -> Result<u32, TopologyError> {
    if order <= 0 || order % 2 != 0 {
        return Err(TopologyError::NotRealizable { order });
    }
    Ok((order / 2 + 1) as u32)
}
