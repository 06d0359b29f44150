//! Scenario files: a JSON description of the model, the kernel, the
//! coefficient operator, and the verification suites to run.
//!
//! With a fixed seed an entire run is byte-reproducible: one seeded
//! generator serves all suites in declaration order, and every random
//! vector draw is counted so failures can name the draws they consumed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{ExchangeKernel, PhaseFn};
use crate::linalg::CMatrix;
use crate::model::DiscreteModel;
use num_complex::Complex64;

pub const SCHEMA_VERSION: u32 = 1;

/// Complex number as a `[re, im]` pair in JSON.
pub type JsonComplex = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Scalar kernel; `q == 1` is bosonic, `q == -1` fermionic.
    Abelian { q: PhaseFn },
    /// `r x r` phase table acting by plain index swap.
    Lifted { r: usize, phases: Vec<PhaseFn> },
    /// Two opposite types: `q1` same-type (flipping), `q2` distinct-type.
    TwoComponent { q1: PhaseFn, q2: PhaseFn },
    /// Two opposite types plus an abelian third component.
    ThreeComponent {
        q1: PhaseFn,
        q2: PhaseFn,
        q3: PhaseFn,
        q4: PhaseFn,
    },
    /// General involution with a symmetric, theta-invariant table
    /// (`theta` is 0-based).
    OppositeType {
        theta: Vec<usize>,
        phases: Vec<PhaseFn>,
    },
    /// Fusion of `k` two-component quasiparticles (`2^k` components).
    Fused { q1: PhaseFn, q2: PhaseFn, k: usize },
    /// Explicit matrices per ordered site pair, row-major `[re, im]` entries.
    Tabulated {
        r: usize,
        sites: Vec<f64>,
        matrices: Vec<Vec<Vec<JsonComplex>>>,
    },
}

impl KernelSpec {
    pub fn build(&self, model: &DiscreteModel) -> Result<ExchangeKernel> {
        match self {
            KernelSpec::Abelian { q } => ExchangeKernel::abelian(q.clone(), model),
            KernelSpec::Lifted { r, phases } => ExchangeKernel::lifted(*r, phases.clone(), model),
            KernelSpec::TwoComponent { q1, q2 } => {
                ExchangeKernel::two_component(q1.clone(), q2.clone(), model)
            }
            KernelSpec::ThreeComponent { q1, q2, q3, q4 } => ExchangeKernel::three_component(
                q1.clone(),
                q2.clone(),
                q3.clone(),
                q4.clone(),
                model,
            ),
            KernelSpec::OppositeType { theta, phases } => {
                ExchangeKernel::opposite_type(theta.clone(), phases.clone(), model)
            }
            KernelSpec::Fused { q1, q2, k } => {
                ExchangeKernel::fused(q1.clone(), q2.clone(), *k, model)
            }
            KernelSpec::Tabulated { r, sites, matrices } => {
                let n = sites.len();
                if matrices.len() != n * n {
                    return Err(Error::Scenario(format!(
                        "tabulated kernel needs {} matrices, got {}",
                        n * n,
                        matrices.len()
                    )));
                }
                let dim = r * r;
                let mut mats = Vec::with_capacity(matrices.len());
                for rows in matrices {
                    if rows.len() != dim || rows.iter().any(|row| row.len() != dim) {
                        return Err(Error::Scenario(format!(
                            "tabulated matrices must be {dim}x{dim}"
                        )));
                    }
                    let rows: Vec<Vec<Complex64>> = rows
                        .iter()
                        .map(|row| row.iter().map(|c| Complex64::new(c[0], c[1])).collect())
                        .collect();
                    mats.push(CMatrix::from_rows(&rows));
                }
                ExchangeKernel::tabulated(*r, sites.clone(), mats)
            }
        }
    }

    /// Expected component count, for model validation.
    pub fn components(&self) -> usize {
        match self {
            KernelSpec::Abelian { .. } => 1,
            KernelSpec::Lifted { r, .. } => *r,
            KernelSpec::TwoComponent { .. } => 2,
            KernelSpec::ThreeComponent { .. } => 3,
            KernelSpec::OppositeType { theta, .. } => theta.len(),
            KernelSpec::Fused { k, .. } => 1usize << k,
            KernelSpec::Tabulated { r, .. } => *r,
        }
    }

    pub fn family_name(&self) -> String {
        match self {
            KernelSpec::Abelian { .. } => "abelian".into(),
            KernelSpec::Lifted { .. } => "lifted".into(),
            KernelSpec::TwoComponent { .. } => "two_component".into(),
            KernelSpec::ThreeComponent { .. } => "three_component".into(),
            KernelSpec::OppositeType { .. } => "opposite_type".into(),
            KernelSpec::Fused { k, .. } => format!("fused(k={k})"),
            KernelSpec::Tabulated { .. } => "tabulated".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KOperatorSpec {
    ScaleIdentity { scale_identity: f64 },
    Matrix { matrix: Vec<Vec<JsonComplex>> },
}

impl KOperatorSpec {
    pub fn build(&self, internal_dim: usize) -> Result<CMatrix> {
        match self {
            KOperatorSpec::ScaleIdentity { scale_identity } => {
                Ok(CMatrix::identity(internal_dim).scale(Complex64::new(*scale_identity, 0.0)))
            }
            KOperatorSpec::Matrix { matrix } => {
                if matrix.len() != internal_dim
                    || matrix.iter().any(|row| row.len() != internal_dim)
                {
                    return Err(Error::Scenario(format!(
                        "K matrix must be {internal_dim}x{internal_dim}"
                    )));
                }
                let rows: Vec<Vec<Complex64>> = matrix
                    .iter()
                    .map(|row| row.iter().map(|c| Complex64::new(c[0], c[1])).collect())
                    .collect();
                Ok(CMatrix::from_rows(&rows))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            KOperatorSpec::ScaleIdentity { scale_identity } => format!("{scale_identity}*I"),
            KOperatorSpec::Matrix { matrix } => format!("matrix({}x{0})", matrix.len()),
        }
    }
}

fn default_fock_level() -> usize {
    4
}
fn default_pairing_len() -> usize {
    10
}
fn default_samples() -> usize {
    20
}
fn default_lengths() -> Vec<usize> {
    vec![2, 4, 6]
}
fn default_pairs() -> Vec<(usize, usize)> {
    vec![(1, 1), (2, 2), (2, 1), (1, 2)]
}
fn default_orders() -> Vec<usize> {
    vec![3, 4]
}
fn default_doubled_truncation() -> usize {
    4
}
fn default_mcr_level() -> usize {
    1
}
fn default_words() -> usize {
    50
}
fn default_word_len() -> usize {
    6
}
fn default_qf_samples() -> usize {
    5
}
fn default_grading_len() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SuiteSpec {
    /// Unitarity, adjoint exchange, and the braid consistency condition.
    KernelAxioms,
    /// Pointwise hypotheses of the phase-table families.
    FamilyHypotheses,
    /// The assumptions backing the quasi-free construction, including the
    /// doubled kernel and the diagonal trace constant.
    Assumptions,
    /// Symmetrizer projections, recursion identity, ladder adjointness.
    Fock {
        #[serde(default = "default_fock_level")]
        max_level: usize,
    },
    /// Commutation relations in the representation, exhaustive over basis
    /// vectors.
    Mcr,
    /// Partition combinatorics: counts and non-crossing shadows.
    Pairings {
        #[serde(default = "default_pairing_len")]
        max_len: usize,
    },
    /// Closed moment formula against the representation.
    Moments {
        #[serde(default = "default_lengths")]
        lengths: Vec<usize>,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Doubling construction: represented operator relations and the
    /// gauge-invariant moment identity.
    Quasifree {
        #[serde(default = "default_pairs")]
        pairs: Vec<(usize, usize)>,
        #[serde(default = "default_qf_samples")]
        samples: usize,
        #[serde(default = "default_doubled_truncation")]
        doubled_truncation: usize,
        #[serde(default = "default_mcr_level")]
        mcr_level: usize,
        #[serde(default = "default_grading_len")]
        grading_len: usize,
    },
    /// The full field-moment identity and the strong exchange condition.
    StronglyQuasifree {
        #[serde(default = "default_orders")]
        orders: Vec<usize>,
        #[serde(default = "default_qf_samples")]
        samples: usize,
        #[serde(default = "default_doubled_truncation")]
        doubled_truncation: usize,
    },
    /// Symbolic normal ordering against the representation, positivity,
    /// and rewrite-order independence.
    Wick {
        #[serde(default = "default_words")]
        words: usize,
        #[serde(default = "default_word_len")]
        max_len: usize,
    },
}

impl SuiteSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SuiteSpec::KernelAxioms => "kernel_axioms",
            SuiteSpec::FamilyHypotheses => "family_hypotheses",
            SuiteSpec::Assumptions => "assumptions",
            SuiteSpec::Fock { .. } => "fock",
            SuiteSpec::Mcr => "mcr",
            SuiteSpec::Pairings { .. } => "pairings",
            SuiteSpec::Moments { .. } => "moments",
            SuiteSpec::Quasifree { .. } => "quasifree",
            SuiteSpec::StronglyQuasifree { .. } => "strongly_quasifree",
            SuiteSpec::Wick { .. } => "wick",
        }
    }

    pub fn all_names() -> &'static [&'static str] {
        &[
            "kernel_axioms",
            "family_hypotheses",
            "assumptions",
            "fock",
            "mcr",
            "pairings",
            "moments",
            "quasifree",
            "strongly_quasifree",
            "wick",
        ]
    }
}

/// Tolerance classes: identities exact in exact arithmetic, operator
/// identities with roundoff accumulation, and long moment sums.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "tol_exact")]
    pub exact: f64,
    #[serde(default = "tol_operator")]
    pub operator: f64,
    #[serde(default = "tol_moment")]
    pub moment: f64,
}

fn tol_exact() -> f64 {
    crate::TOL_EXACT
}
fn tol_operator() -> f64 {
    crate::TOL_OP
}
fn tol_moment() -> f64 {
    crate::TOL_MOMENT
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: tol_exact(),
            operator: tol_operator(),
            moment: tol_moment(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub schema: u32,
    pub model: DiscreteModel,
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_operator: Option<KOperatorSpec>,
    pub suites: Vec<SuiteSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Scenario(format!("parse error: {e}")))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Scenario(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        self.model.validate_invariants()?;
        if self.kernel.components() != self.model.components {
            return Err(Error::Scenario(format!(
                "kernel family `{}` has {} components but the model declares {}",
                self.kernel.family_name(),
                self.kernel.components(),
                self.model.components
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario_parses() {
        let text = r#"{
            "schema": 1,
            "model": { "sites": [0.0, 1.0], "components": 1, "internal_dim": 1, "truncation": 3 },
            "kernel": { "family": "abelian", "q": { "kind": "minus_one" } },
            "suites": [ { "name": "kernel_axioms" }, { "name": "moments", "samples": 3 } ],
            "seed": 7
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.suites.len(), 2);
        assert_eq!(s.kernel.components(), 1);
    }

    #[test]
    fn component_mismatch_is_rejected() {
        let text = r#"{
            "schema": 1,
            "model": { "sites": [0.0], "components": 2, "internal_dim": 1, "truncation": 2 },
            "kernel": { "family": "abelian", "q": { "kind": "one" } },
            "suites": []
        }"#;
        assert!(Scenario::from_json(text).is_err());
    }

    #[test]
    fn bad_schema_version_is_rejected() {
        let text = r#"{
            "schema": 2,
            "model": { "sites": [0.0], "components": 1, "internal_dim": 1, "truncation": 2 },
            "kernel": { "family": "abelian", "q": { "kind": "one" } },
            "suites": []
        }"#;
        assert!(Scenario::from_json(text).is_err());
    }
}
