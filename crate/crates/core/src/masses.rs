//! Mass model with the pair symmetry `m1 = m3`, `m2 = m4`.

use crate::error::Error;
use serde::{Deserialize, Serialize};

/// The four masses, dimensionless with `G = 1`. The constructor enforces
/// `m1 = m3` and `m2 = m4` exactly; `mu = m2 / m1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassModel {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    /// Mass ratio `m2 / m1`.
    pub mu: f64,
    /// Total mass.
    pub total: f64,
}

impl MassModel {
    /// Build from the two independent masses; `m3` and `m4` mirror them.
    pub fn new(m1: f64, m2: f64) -> Result<Self, Error> {
        if !(m1 > 0.0 && m2 > 0.0) || !m1.is_finite() || !m2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "masses must be positive and finite, got m1 = {m1}, m2 = {m2}"
            )));
        }
        Ok(Self {
            m1,
            m2,
            m3: m1,
            m4: m2,
            mu: m2 / m1,
            total: 2.0 * (m1 + m2),
        })
    }

    /// Convenience constructor with `m1 = 1` and `m2 = mu`.
    pub fn from_ratio(mu: f64) -> Result<Self, Error> {
        Self::new(1.0, mu)
    }

    pub fn equal() -> Self {
        Self::new(1.0, 1.0).expect("unit masses are valid")
    }

    /// Mass of body `i` (zero-based).
    #[inline]
    pub fn mass(&self, i: usize) -> f64 {
        match i {
            0 => self.m1,
            1 => self.m2,
            2 => self.m3,
            3 => self.m4,
            _ => panic!("body index {i} out of range"),
        }
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 4] {
        [self.m1, self.m2, self.m3, self.m4]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_enforced() {
        let m = MassModel::new(1.0, 2.5).unwrap();
        assert_eq!(m.m1, m.m3);
        assert_eq!(m.m2, m.m4);
        assert_eq!(m.mu, 2.5);
        assert_eq!(m.total, 7.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(MassModel::new(0.0, 1.0).is_err());
        assert!(MassModel::new(1.0, -2.0).is_err());
        assert!(MassModel::new(f64::NAN, 1.0).is_err());
    }
}
