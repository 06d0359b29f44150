//! Finite discretization of the underlying space.
//!
//! The exchange axis is replaced by a finite set of distinct real sites with
//! counting measure, the transverse space by `internal_dim` points, and the
//! Fock space is truncated at a finite particle level. Dirac deltas become
//! Kronecker indicators and every integral becomes a finite sum, so the
//! algebraic identities of the continuum theory hold exactly here and
//! residual-zero checks are meaningful.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of complex entries in any single level tensor.
pub const DEFAULT_ENTRY_BUDGET: usize = 10_000_000;

/// A point on the (possibly doubled) exchange axis. `copy` is 1 for the base
/// model; the doubling construction uses copies 1 and 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SitePoint {
    pub y: f64,
    pub copy: u8,
}

impl SitePoint {
    pub fn base(y: f64) -> Self {
        SitePoint { y, copy: 1 }
    }
}

/// Compound one-particle index layout: `(site, component, internal)` packed
/// as `(site * r + component) * s + internal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotLayout {
    pub sites: usize,
    pub components: usize,
    pub internal: usize,
}

impl SlotLayout {
    pub fn dim(&self) -> usize {
        self.sites * self.components * self.internal
    }

    #[inline]
    pub fn decode(&self, a: usize) -> (usize, usize, usize) {
        let z = a % self.internal;
        let rest = a / self.internal;
        let c = rest % self.components;
        let t = rest / self.components;
        (t, c, z)
    }

    #[inline]
    pub fn encode(&self, t: usize, c: usize, z: usize) -> usize {
        (t * self.components + c) * self.internal + z
    }

    #[inline]
    pub fn site_of(&self, a: usize) -> usize {
        a / (self.components * self.internal)
    }
}

/// Finite site model: sites on the exchange axis, component count `r`,
/// internal dimension `s`, and the Fock truncation level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteModel {
    pub sites: Vec<f64>,
    pub components: usize,
    pub internal_dim: usize,
    pub truncation: usize,
    #[serde(default = "default_budget")]
    pub entry_budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_ENTRY_BUDGET
}

impl DiscreteModel {
    pub fn new(
        sites: Vec<f64>,
        components: usize,
        internal_dim: usize,
        truncation: usize,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Dimension("model needs at least one site".into()));
        }
        for w in sites.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Dimension(format!(
                    "sites must be strictly ascending, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if components == 0 || internal_dim == 0 {
            return Err(Error::Dimension(
                "component and internal dimensions must be positive".into(),
            ));
        }
        Ok(DiscreteModel {
            sites,
            components,
            internal_dim,
            truncation,
            entry_budget: DEFAULT_ENTRY_BUDGET,
        })
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    /// Dimension of the one-particle space: `sites * r * s`.
    pub fn one_particle_dim(&self) -> usize {
        self.sites.len() * self.components * self.internal_dim
    }

    pub fn layout(&self) -> SlotLayout {
        SlotLayout {
            sites: self.sites.len(),
            components: self.components,
            internal: self.internal_dim,
        }
    }

    pub fn site_points(&self) -> Vec<SitePoint> {
        self.sites.iter().map(|&y| SitePoint::base(y)).collect()
    }

    /// The doubled model: every site duplicated with copy tags 1 and 2
    /// (copy-1 block first). Site coordinates are shared between copies.
    pub fn doubled_site_points(&self) -> Vec<SitePoint> {
        let mut pts: Vec<SitePoint> = self
            .sites
            .iter()
            .map(|&y| SitePoint { y, copy: 1 })
            .collect();
        pts.extend(self.sites.iter().map(|&y| SitePoint { y, copy: 2 }));
        pts
    }

    pub fn validate_invariants(&self) -> Result<()> {
        Self::new(
            self.sites.clone(),
            self.components,
            self.internal_dim,
            self.truncation,
        )
        .map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_sites() {
        assert!(DiscreteModel::new(vec![1.0, 0.0], 1, 1, 2).is_err());
        assert!(DiscreteModel::new(vec![0.0, 0.0], 1, 1, 2).is_err());
        assert!(DiscreteModel::new(vec![], 1, 1, 2).is_err());
    }

    #[test]
    fn layout_roundtrip() {
        let m = DiscreteModel::new(vec![0.0, 1.0, 2.0], 2, 3, 2).unwrap();
        let l = m.layout();
        for a in 0..l.dim() {
            let (t, c, z) = l.decode(a);
            assert_eq!(l.encode(t, c, z), a);
        }
    }

    #[test]
    fn doubled_sites_carry_copy_tags() {
        let m = DiscreteModel::new(vec![0.0, 1.0], 2, 1, 2).unwrap();
        let d = m.doubled_site_points();
        assert_eq!(d.len(), 4);
        assert_eq!(d[0].copy, 1);
        assert_eq!(d[2].copy, 2);
        assert_eq!(d[0].y, d[2].y);
    }
}
