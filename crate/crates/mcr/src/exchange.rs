//! Exchange kernels and their validation.
//!
//! A kernel assigns to every pair of sites `(y1, y2)` a unitary operator
//! `Q(y1, y2)` on `V ⊗ V` (`V = C^r`) governing the exchange of two
//! quasiparticles. Three derived kernels enter the commutation relations:
//!
//! - the conjugate-swap transform governing annihilator exchange,
//!   `hat(Q)(y1, y2) = S Q(y2, y1) S` with `S(u ⊗ v) = (Jv) ⊗ (Ju)`;
//! - the index-permutation transform `tilde(Q)` defined entrywise by
//!   `<tilde(Q) e_i ⊗ e_j, e_k ⊗ e_l> = <Q e_k ⊗ e_i, e_l ⊗ e_j>`, which
//!   carries the operator part of the mixed relation;
//! - the doubled kernel on two tagged copies of the site set, equal to `Q`
//!   within a copy and to `tilde(Q)` with swapped arguments across copies.
//!
//! All example families act monomially on the product basis,
//! `Q e_i ⊗ e_j = q(y1, y2, i, j) e_{theta(j)} ⊗ e_{theta(i)}`, for an
//! involution `theta` and a table of unit-modulus phase functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::{conjugate_entrywise, CMatrix, QMatrix, C64, ONE, ZERO};
use crate::model::{DiscreteModel, SitePoint};
use crate::report::ValidationReport;
use crate::TOL_EXACT;

/// Closed-form unit-modulus phase function of two site coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseFn {
    /// `q == 1` (bosonic diagonal).
    One,
    /// `q == -1` (fermionic diagonal).
    MinusOne,
    /// `exp(i * alpha * sgn(y1 - y2))`; equals 1 on the diagonal.
    ExpSignDiff { alpha: f64 },
    /// `exp(i * alpha * (y1 - y2))`; equals 1 on the diagonal.
    ExpDiff { alpha: f64 },
    /// Negation of an inner phase (flips the diagonal sign).
    Neg { inner: Box<PhaseFn> },
    /// Pointwise product of phases (used by fused kernels).
    Product { factors: Vec<PhaseFn> },
}

impl PhaseFn {
    pub fn eval(&self, y1: f64, y2: f64) -> C64 {
        match self {
            PhaseFn::One => ONE,
            PhaseFn::MinusOne => -ONE,
            PhaseFn::ExpSignDiff { alpha } => {
                let s = if y1 > y2 {
                    1.0
                } else if y1 < y2 {
                    -1.0
                } else {
                    0.0
                };
                C64::from_polar(1.0, alpha * s)
            }
            PhaseFn::ExpDiff { alpha } => C64::from_polar(1.0, alpha * (y1 - y2)),
            PhaseFn::Neg { inner } => -inner.eval(y1, y2),
            PhaseFn::Product { factors } => factors.iter().map(|f| f.eval(y1, y2)).product(),
        }
    }

    pub fn negated(self) -> PhaseFn {
        PhaseFn::Neg {
            inner: Box::new(self),
        }
    }
}

/// Family metadata carried by a kernel for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Abelian,
    Lifted,
    TwoComponent,
    ThreeComponent,
    OppositeType,
    Fused { k: usize },
    Tabulated,
    Hat,
    Tilde,
    Doubled,
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::Abelian => write!(f, "abelian"),
            KernelFamily::Lifted => write!(f, "lifted"),
            KernelFamily::TwoComponent => write!(f, "two_component"),
            KernelFamily::ThreeComponent => write!(f, "three_component"),
            KernelFamily::OppositeType => write!(f, "opposite_type"),
            KernelFamily::Fused { k } => write!(f, "fused(k={k})"),
            KernelFamily::Tabulated => write!(f, "tabulated"),
            KernelFamily::Hat => write!(f, "hat"),
            KernelFamily::Tilde => write!(f, "tilde"),
            KernelFamily::Doubled => write!(f, "doubled"),
        }
    }
}

#[derive(Clone, Debug)]
enum KernelForm {
    /// `Q e_i ⊗ e_j = phases[i*r+j](y1,y2) e_{theta(j)} ⊗ e_{theta(i)}`.
    PhaseSwap {
        theta: Vec<usize>,
        phases: Vec<PhaseFn>,
    },
    /// Explicit matrices per ordered site pair, indexed `t1 * n + t2`.
    Tabulated {
        sites: Vec<f64>,
        mats: Vec<CMatrix>,
    },
    Hat(Box<KernelForm>),
    Tilde(Box<KernelForm>),
    Doubled(Box<KernelForm>),
}

/// An exchange kernel: component count, family tag, evaluator, and the
/// diagonal trace constant once the state assumptions have been validated.
#[derive(Clone, Debug)]
pub struct ExchangeKernel {
    r: usize,
    family: KernelFamily,
    form: KernelForm,
    kappa: Option<f64>,
}

/// Entrywise conjugate-swap transform of a dense exchange matrix evaluated
/// at swapped arguments: `hat(Q)(y1,y2)[(a,b),(i,j)] = conj(Q(y2,y1)[(b,a),(j,i)])`.
fn hat_entrywise(m_swapped: &CMatrix, r: usize) -> CMatrix {
    let mut out = CMatrix::zeros(r * r);
    for a in 0..r {
        for b in 0..r {
            for i in 0..r {
                for j in 0..r {
                    out[(a * r + b, i * r + j)] = m_swapped[(b * r + a, j * r + i)].conj();
                }
            }
        }
    }
    out
}

/// Entrywise index-permutation transform:
/// `tilde(Q)[(k,l),(i,j)] = Q[(l,j),(k,i)]`.
fn tilde_entrywise(m: &CMatrix, r: usize) -> CMatrix {
    let mut out = CMatrix::zeros(r * r);
    for k in 0..r {
        for l in 0..r {
            for i in 0..r {
                for j in 0..r {
                    out[(k * r + l, i * r + j)] = m[(l * r + j, k * r + i)];
                }
            }
        }
    }
    out
}

impl KernelForm {
    fn eval(&self, r: usize, p1: SitePoint, p2: SitePoint) -> Result<QMatrix> {
        match self {
            KernelForm::PhaseSwap { theta, phases } => {
                let dim = r * r;
                let mut fwd = vec![0usize; dim];
                let mut phase = vec![ZERO; dim];
                for i in 0..r {
                    for j in 0..r {
                        let col = i * r + j;
                        fwd[col] = theta[j] * r + theta[i];
                        phase[col] = phases[i * r + j].eval(p1.y, p2.y);
                    }
                }
                Ok(QMatrix::monomial(fwd, phase))
            }
            KernelForm::Tabulated { sites, mats } => {
                let t1 = lookup_site(sites, p1.y)?;
                let t2 = lookup_site(sites, p2.y)?;
                Ok(QMatrix::from_dense(mats[t1 * sites.len() + t2].clone()))
            }
            KernelForm::Hat(base) => {
                let m = base.eval(r, p2, p1)?.to_dense();
                Ok(QMatrix::from_dense(hat_entrywise(&m, r)))
            }
            KernelForm::Tilde(base) => {
                let m = base.eval(r, p1, p2)?.to_dense();
                Ok(QMatrix::from_dense(tilde_entrywise(&m, r)))
            }
            KernelForm::Doubled(base) => {
                if p1.copy == p2.copy {
                    base.eval(r, p1, p2)
                } else {
                    let m = base.eval(r, p2, p1)?.to_dense();
                    Ok(QMatrix::from_dense(tilde_entrywise(&m, r)))
                }
            }
        }
    }
}

fn lookup_site(sites: &[f64], y: f64) -> Result<usize> {
    sites
        .iter()
        .position(|&s| (s - y).abs() <= 1e-12 * (1.0 + y.abs()))
        .ok_or(Error::TableMiss(y, y))
}

fn check_unit_modulus_conj_swap(name: &str, q: &PhaseFn, sites: &[f64]) -> Result<()> {
    for &a in sites {
        for &b in sites {
            let v = q.eval(a, b);
            if (v.norm() - 1.0).abs() > TOL_EXACT {
                return Err(Error::Constraint(format!(
                    "{name}: |q({a},{b})| = {} is not 1",
                    v.norm()
                )));
            }
            if (v.conj() - q.eval(b, a)).norm() > TOL_EXACT {
                return Err(Error::Constraint(format!(
                    "{name}: conj(q({a},{b})) != q({b},{a})"
                )));
            }
        }
    }
    Ok(())
}

fn diagonal_sign(name: &str, q: &PhaseFn, sites: &[f64]) -> Result<f64> {
    let mut kappa = None;
    for &y in sites {
        let v = q.eval(y, y);
        if v.im.abs() > TOL_EXACT || (v.re.abs() - 1.0).abs() > TOL_EXACT {
            return Err(Error::Constraint(format!(
                "{name}: diagonal value q({y},{y}) = {v} is not in {{-1,+1}}"
            )));
        }
        let s = if v.re > 0.0 { 1.0 } else { -1.0 };
        match kappa {
            None => kappa = Some(s),
            Some(prev) if prev != s => {
                return Err(Error::Constraint(format!(
                    "{name}: diagonal sign is not constant across sites"
                )))
            }
            _ => {}
        }
    }
    Ok(kappa.unwrap())
}

fn check_involution(theta: &[usize]) -> Result<()> {
    let r = theta.len();
    for i in 0..r {
        if theta[i] >= r {
            return Err(Error::Constraint(
                "theta maps outside the component range".into(),
            ));
        }
        if theta[theta[i]] != i {
            return Err(Error::Constraint(format!(
                "theta is not an involution at component {i}"
            )));
        }
    }
    Ok(())
}

impl ExchangeKernel {
    pub fn components(&self) -> usize {
        self.r
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }

    /// Scalar anyon kernel (`r = 1`): bosons for `q == 1`, fermions for
    /// `q == -1`, generic abelian anyons otherwise.
    pub fn abelian(q: PhaseFn, model: &DiscreteModel) -> Result<Self> {
        check_unit_modulus_conj_swap("abelian q", &q, &model.sites)?;
        diagonal_sign("abelian q", &q, &model.sites)?;
        Ok(ExchangeKernel {
            r: 1,
            family: KernelFamily::Abelian,
            form: KernelForm::PhaseSwap {
                theta: vec![0],
                phases: vec![q],
            },
            kappa: None,
        })
    }

    /// Lifted kernel: `Q e_i ⊗ e_j = q(y1,y2,i,j) e_j ⊗ e_i` with
    /// `conj(q(y1,y2,i,j)) = q(y2,y1,j,i)`. `phases` is row-major `r x r`.
    pub fn lifted(r: usize, phases: Vec<PhaseFn>, model: &DiscreteModel) -> Result<Self> {
        if phases.len() != r * r {
            return Err(Error::Dimension(format!(
                "expected {} phase entries",
                r * r
            )));
        }
        for i in 0..r {
            for j in 0..r {
                let qij = &phases[i * r + j];
                let qji = &phases[j * r + i];
                for &a in &model.sites {
                    for &b in &model.sites {
                        let v = qij.eval(a, b);
                        if (v.norm() - 1.0).abs() > TOL_EXACT {
                            return Err(Error::Constraint(format!(
                                "lifted q({i},{j}) is not unit modulus at ({a},{b})"
                            )));
                        }
                        if (v.conj() - qji.eval(b, a)).norm() > TOL_EXACT {
                            return Err(Error::Constraint(format!(
                                "lifted: conj(q(y1,y2,{i},{j})) != q(y2,y1,{j},{i})"
                            )));
                        }
                    }
                }
            }
        }
        // Diagonal entries must be real signs; equality across components is
        // deliberately not required (a mixed diagonal is how the trace
        // constant check is expected to fail).
        for i in 0..r {
            diagonal_sign("lifted diagonal", &phases[i * r + i], &model.sites)?;
        }
        let theta = (0..r).collect();
        Ok(ExchangeKernel {
            r,
            family: KernelFamily::Lifted,
            form: KernelForm::PhaseSwap { theta, phases },
            kappa: None,
        })
    }

    /// Two-component opposite-type system: same-type exchange uses `q1` and
    /// flips both types, distinct-type exchange uses `q2`.
    pub fn two_component(q1: PhaseFn, q2: PhaseFn, model: &DiscreteModel) -> Result<Self> {
        check_unit_modulus_conj_swap("q1", &q1, &model.sites)?;
        check_unit_modulus_conj_swap("q2", &q2, &model.sites)?;
        diagonal_sign("q1", &q1, &model.sites)?;
        let phases = vec![q1.clone(), q2.clone(), q2, q1];
        let kernel = ExchangeKernel {
            r: 2,
            family: KernelFamily::TwoComponent,
            form: KernelForm::PhaseSwap {
                theta: vec![1, 0],
                phases,
            },
            kappa: None,
        };
        kernel.check_phase_swap_hypotheses(model)?.into_result()?;
        Ok(kernel)
    }

    /// Two-component system plus an abelian anyon of type 3.
    /// `q3` governs 3-3 exchange, `q4` the mixed 1/2-with-3 exchange.
    pub fn three_component(
        q1: PhaseFn,
        q2: PhaseFn,
        q3: PhaseFn,
        q4: PhaseFn,
        model: &DiscreteModel,
    ) -> Result<Self> {
        for (name, q) in [("q1", &q1), ("q2", &q2), ("q3", &q3), ("q4", &q4)] {
            check_unit_modulus_conj_swap(name, q, &model.sites)?;
        }
        let k1 = diagonal_sign("q1", &q1, &model.sites)?;
        let k3 = diagonal_sign("q3", &q3, &model.sites)?;
        if k1 != k3 {
            return Err(Error::Constraint(
                "three_component: q1 and q3 must share the diagonal sign".into(),
            ));
        }
        let mut phases = vec![PhaseFn::One; 9];
        let idx = |i: usize, j: usize| i * 3 + j;
        phases[idx(0, 0)] = q1.clone();
        phases[idx(1, 1)] = q1;
        phases[idx(0, 1)] = q2.clone();
        phases[idx(1, 0)] = q2;
        phases[idx(2, 2)] = q3;
        phases[idx(0, 2)] = q4.clone();
        phases[idx(2, 0)] = q4.clone();
        phases[idx(1, 2)] = q4.clone();
        phases[idx(2, 1)] = q4;
        let kernel = ExchangeKernel {
            r: 3,
            family: KernelFamily::ThreeComponent,
            form: KernelForm::PhaseSwap {
                theta: vec![1, 0, 2],
                phases,
            },
            kappa: None,
        };
        kernel.check_phase_swap_hypotheses(model)?.into_result()?;
        Ok(kernel)
    }

    /// General opposite-type kernel for an involution `theta` and a
    /// symmetric, theta-invariant phase table with constant diagonal sign.
    pub fn opposite_type(
        theta: Vec<usize>,
        phases: Vec<PhaseFn>,
        model: &DiscreteModel,
    ) -> Result<Self> {
        let r = theta.len();
        check_involution(&theta)?;
        if phases.len() != r * r {
            return Err(Error::Dimension(format!(
                "expected {} phase entries",
                r * r
            )));
        }
        let kernel = ExchangeKernel {
            r,
            family: KernelFamily::OppositeType,
            form: KernelForm::PhaseSwap { theta, phases },
            kappa: None,
        };
        kernel.check_phase_swap_hypotheses(model)?.into_result()?;
        Ok(kernel)
    }

    /// Fusion of `k` quasiparticles (odd `k >= 3`) of a two-component base
    /// system into one effective quasiparticle with `2^k` components.
    /// The fused phase is the product
    /// `prod_{l,m=1..k} q(y1, y2, theta^{m-1}(i_l), theta^{l-1}(j_m))`.
    pub fn fused(q1: PhaseFn, q2: PhaseFn, k: usize, model: &DiscreteModel) -> Result<Self> {
        if k < 3 || k.is_multiple_of(2) {
            return Err(Error::Constraint(format!(
                "fusion needs an odd particle count k >= 3, got {k}"
            )));
        }
        check_unit_modulus_conj_swap("q1", &q1, &model.sites)?;
        check_unit_modulus_conj_swap("q2", &q2, &model.sites)?;
        let k1 = diagonal_sign("q1", &q1, &model.sites)?;
        let k2 = diagonal_sign("q2", &q2, &model.sites)?;
        if k1 != k2 {
            return Err(Error::Constraint(
                "fusion requires q1 and q2 to share the diagonal sign".into(),
            ));
        }

        let r = 1usize << k;
        // Component index: bit (k-1-l) holds type of particle l (0-based),
        // so multi-index (i_1..i_k) reads off the bits most significant first.
        let bit = |idx: usize, l: usize| (idx >> (k - 1 - l)) & 1;
        let base = |a: usize, b: usize| if a == b { q1.clone() } else { q2.clone() };
        let mut phases = Vec::with_capacity(r * r);
        for bi in 0..r {
            for bj in 0..r {
                let mut factors = Vec::with_capacity(k * k);
                for l in 0..k {
                    for m in 0..k {
                        // theta^m(i_l) flips the type when m is odd.
                        let a = bit(bi, l) ^ (m & 1);
                        let b = bit(bj, m) ^ (l & 1);
                        factors.push(base(a, b));
                    }
                }
                phases.push(PhaseFn::Product { factors });
            }
        }
        let theta: Vec<usize> = (0..r).map(|i| i ^ (r - 1)).collect();
        let kernel = ExchangeKernel {
            r,
            family: KernelFamily::Fused { k },
            form: KernelForm::PhaseSwap { theta, phases },
            kappa: None,
        };
        kernel.check_phase_swap_hypotheses(model)?.into_result()?;
        Ok(kernel)
    }

    /// Kernel given by explicit matrices per ordered site pair
    /// (`mats[t1 * sites.len() + t2]`, each `r^2 x r^2`). No axioms are
    /// assumed; run [`ExchangeKernel::check_axioms`] to validate.
    pub fn tabulated(r: usize, sites: Vec<f64>, mats: Vec<CMatrix>) -> Result<Self> {
        let n = sites.len();
        if mats.len() != n * n {
            return Err(Error::Dimension(format!("expected {} matrices", n * n)));
        }
        for m in &mats {
            if m.n != r * r {
                return Err(Error::Dimension(format!(
                    "expected {0}x{0} matrices, got {1}x{1}",
                    r * r,
                    m.n
                )));
            }
        }
        Ok(ExchangeKernel {
            r,
            family: KernelFamily::Tabulated,
            form: KernelForm::Tabulated { sites, mats },
            kappa: None,
        })
    }

    /// Evaluate `Q(p1, p2)` as an `r^2 x r^2` operator in the lexicographic
    /// product basis `e_i ⊗ e_j -> i * r + j`.
    pub fn eval_at(&self, p1: SitePoint, p2: SitePoint) -> Result<QMatrix> {
        self.form.eval(self.r, p1, p2)
    }

    /// Evaluate at raw base-copy coordinates.
    pub fn eval(&self, y1: f64, y2: f64) -> Result<CMatrix> {
        Ok(self
            .eval_at(SitePoint::base(y1), SitePoint::base(y2))?
            .to_dense())
    }

    /// The conjugate-swap derived kernel governing annihilator exchange.
    pub fn derive_hat(&self) -> ExchangeKernel {
        ExchangeKernel {
            r: self.r,
            family: KernelFamily::Hat,
            form: KernelForm::Hat(Box::new(self.form.clone())),
            kappa: None,
        }
    }

    /// The index-permutation derived kernel entering the mixed relation.
    pub fn derive_tilde(&self) -> ExchangeKernel {
        ExchangeKernel {
            r: self.r,
            family: KernelFamily::Tilde,
            form: KernelForm::Tilde(Box::new(self.form.clone())),
            kappa: None,
        }
    }

    /// The doubled kernel on two tagged copies of the site set.
    pub fn doubled(&self) -> ExchangeKernel {
        ExchangeKernel {
            r: self.r,
            family: KernelFamily::Doubled,
            form: KernelForm::Doubled(Box::new(self.form.clone())),
            kappa: self.kappa,
        }
    }

    /// Pointwise hypotheses of the opposite-type construction: unit modulus,
    /// conjugate symmetry under argument swap, symmetry and theta-invariance
    /// of the table, and a constant diagonal sign. Only meaningful for
    /// phase-table kernels.
    pub fn check_phase_swap_hypotheses(&self, model: &DiscreteModel) -> Result<ValidationReport> {
        let KernelForm::PhaseSwap { theta, phases } = &self.form else {
            return Err(Error::Constraint(
                "hypothesis check applies to phase-table kernels only".into(),
            ));
        };
        let r = self.r;
        let mut report = ValidationReport::new("family_hypotheses", TOL_EXACT);
        let sites = &model.sites;

        let mut modulus = 0.0_f64;
        let mut conj_swap = 0.0_f64;
        let mut symmetry = 0.0_f64;
        let mut theta_inv = 0.0_f64;
        for i in 0..r {
            for j in 0..r {
                let q = &phases[i * r + j];
                for &a in sites.iter() {
                    for &b in sites.iter() {
                        let v = q.eval(a, b);
                        modulus = modulus.max((v.norm() - 1.0).abs());
                        conj_swap = conj_swap.max((v.conj() - q.eval(b, a)).norm());
                        symmetry = symmetry.max((v - phases[j * r + i].eval(a, b)).norm());
                        theta_inv =
                            theta_inv.max((v - phases[theta[i] * r + theta[j]].eval(a, b)).norm());
                    }
                }
            }
        }
        report.push("unit_modulus", modulus, None);
        report.push("conjugate_swap_symmetry", conj_swap, None);
        report.push("table_symmetry", symmetry, None);
        report.push("theta_invariance", theta_inv, None);

        let mut diag = 0.0_f64;
        let mut kappa: Option<f64> = None;
        for i in 0..r {
            for &y in sites.iter() {
                let v = phases[i * r + i].eval(y, y);
                let s = if v.re >= 0.0 { 1.0 } else { -1.0 };
                diag = diag.max((v - C64::new(s, 0.0)).norm());
                match kappa {
                    None => kappa = Some(s),
                    Some(prev) => diag = diag.max((prev - s).abs()),
                }
            }
        }
        report.push("diagonal_sign_constancy", diag, None);
        Ok(report)
    }

    /// Unitarity, the adjoint symmetry `Q(y1,y2)* = Q(y2,y1)`, and the
    /// functional Yang-Baxter equation, exhaustively over the model's sites.
    pub fn check_axioms(&self, model: &DiscreteModel) -> Result<ValidationReport> {
        let points = model.site_points();
        self.check_axioms_on(&points)
    }

    /// Same as [`check_axioms`](Self::check_axioms) over an explicit site
    /// point set (used for the doubled kernel).
    pub fn check_axioms_on(&self, points: &[SitePoint]) -> Result<ValidationReport> {
        let mut report = ValidationReport::new("kernel_axioms", TOL_EXACT);
        let n = points.len();
        let iden = CMatrix::identity(self.r * self.r);

        let mut unit = (0.0_f64, None);
        let mut adj = (0.0_f64, None);
        for t1 in 0..n {
            for t2 in 0..n {
                let q12 = self.eval_at(points[t1], points[t2])?.to_dense();
                let q21 = self.eval_at(points[t2], points[t1])?.to_dense();
                let (du, eu) = q12.mul(&q12.adjoint()).sup_distance(&iden);
                if du > unit.0 {
                    unit = (du, Some(((points[t1], points[t2]), eu)));
                }
                let (da, ea) = q12.adjoint().sup_distance(&q21);
                if da > adj.0 {
                    adj = (da, Some(((points[t1], points[t2]), ea)));
                }
            }
        }
        report.push("unitarity", unit.0, unit.1.map(format_pair_ce));
        report.push("adjoint_exchange", adj.0, adj.1.map(format_pair_ce));

        // Yang-Baxter residual over all site triples, parallel over t1.
        let per_t1 = exec::map_range(n, |t1| -> Result<(f64, Option<String>)> {
            let mut worst = (0.0_f64, None);
            for t2 in 0..n {
                for t3 in 0..n {
                    let (p1, p2, p3) = (points[t1], points[t2], points[t3]);
                    let q12 = self.eval_at(p1, p2)?;
                    let q13 = self.eval_at(p1, p3)?;
                    let q23 = self.eval_at(p2, p3)?;
                    let lhs = compose3(&[(&q12, 0), (&q13, 1), (&q23, 0)], self.r);
                    let rhs = compose3(&[(&q23, 1), (&q13, 0), (&q12, 1)], self.r);
                    let (d, entry) = lhs.sup_distance(&rhs);
                    if d > worst.0 {
                        worst = (
                            d,
                            Some(format!(
                                "sites ({}, {}, {}), entry ({}, {})",
                                fmt_pt(p1),
                                fmt_pt(p2),
                                fmt_pt(p3),
                                entry.0,
                                entry.1
                            )),
                        );
                    }
                }
            }
            Ok(worst)
        });
        let mut ybe = (0.0_f64, None);
        for item in per_t1 {
            let (d, ce) = item?;
            if d > ybe.0 {
                ybe = (d, ce);
            }
        }
        report.push("yang_baxter", ybe.0, ybe.1);
        Ok(report)
    }

    /// The assumptions required by the quasi-free state construction:
    ///
    /// (i) `tilde(Q)` unitary with the adjoint-swap symmetry;
    /// (ii) the tilde transform is an involution;
    /// (iii) `hat(Q) = Q` and the hat transform fixes `tilde(Q)`;
    /// (iv) a single real constant satisfies
    ///      `Tr(tilde(Q)(y,y) v) = kappa Tr v` on all of `V ⊗ V`;
    /// (v) the doubled kernel satisfies the exchange axioms on the doubled
    ///     site set.
    ///
    /// Failures are reported, not thrown; `kappa` is populated on success
    /// of (iv).
    pub fn check_assumptions(&self, model: &DiscreteModel) -> Result<ValidationReport> {
        let mut report = ValidationReport::new("state_assumptions", TOL_EXACT);
        let points = model.site_points();
        let n = points.len();
        let tilde = self.derive_tilde();
        let dd = self.r * self.r;
        let iden = CMatrix::identity(dd);

        let mut t_unit = 0.0_f64;
        let mut t_adj = 0.0_f64;
        let mut t_invol = 0.0_f64;
        let mut hat_eq = 0.0_f64;
        let mut hat_tilde = 0.0_f64;
        let tilde_tilde = tilde.derive_tilde();
        let hat = self.derive_hat();
        let tilde_hat = tilde.derive_hat();
        for t1 in 0..n {
            for t2 in 0..n {
                let (p1, p2) = (points[t1], points[t2]);
                let tq = tilde.eval_at(p1, p2)?.to_dense();
                t_unit = t_unit.max(tq.mul(&tq.adjoint()).sup_distance(&iden).0);
                t_adj = t_adj.max(
                    tq.adjoint()
                        .sup_distance(&tilde.eval_at(p2, p1)?.to_dense())
                        .0,
                );
                let q = self.eval_at(p1, p2)?.to_dense();
                t_invol = t_invol.max(tilde_tilde.eval_at(p1, p2)?.to_dense().sup_distance(&q).0);
                hat_eq = hat_eq.max(hat.eval_at(p1, p2)?.to_dense().sup_distance(&q).0);
                hat_tilde =
                    hat_tilde.max(tilde_hat.eval_at(p1, p2)?.to_dense().sup_distance(&tq).0);
            }
        }
        report.push("tilde_unitarity", t_unit, None);
        report.push("tilde_adjoint_exchange", t_adj, None);
        report.push("tilde_involution", t_invol, None);
        report.push("hat_fixes_kernel", hat_eq, None);
        report.push("hat_fixes_tilde", hat_tilde, None);

        // (iv) trace constant: Tr(tilde(Q)(y,y) e_k ⊗ e_l) must vanish for
        // k != l and take one real value for k == l, across all sites.
        let r = self.r;
        let mut off = 0.0_f64;
        let mut spread = 0.0_f64;
        let mut kappa_acc: Option<C64> = None;
        for point in &points {
            let tq = tilde.eval_at(*point, *point)?.to_dense();
            for kk in 0..r {
                for ll in 0..r {
                    let mut tr = ZERO;
                    for c in 0..r {
                        tr += tq[(c * r + c, kk * r + ll)];
                    }
                    if kk != ll {
                        off = off.max(tr.norm());
                    } else {
                        match kappa_acc {
                            None => kappa_acc = Some(tr),
                            Some(k0) => spread = spread.max((tr - k0).norm()),
                        }
                    }
                }
            }
        }
        let kappa0 = kappa_acc.unwrap_or(ZERO);
        let kappa_imag = kappa0.im.abs();
        let trace_residual = off.max(spread).max(kappa_imag);
        report.push("diagonal_trace_constant", trace_residual, None);
        if trace_residual <= TOL_EXACT {
            report.kappa = Some(kappa0.re);
        }

        // (v) doubled kernel axioms on the doubled site set.
        let doubled = self.doubled();
        let sub = doubled.check_axioms_on(&model.doubled_site_points())?;
        for check in sub.checks {
            report.push(
                &format!("doubled_{}", check.name),
                check.max_residual,
                check.counterexample,
            );
        }
        Ok(report)
    }

    /// Run both axiom and assumption checks and return the kernel with its
    /// trace constant populated; errors if any check fails.
    pub fn into_validated(mut self, model: &DiscreteModel) -> Result<Self> {
        self.check_axioms(model)?.into_result()?;
        let report = self.check_assumptions(model)?;
        report.clone().into_result()?;
        self.kappa = report.kappa;
        Ok(self)
    }
}

fn fmt_pt(p: SitePoint) -> String {
    if p.copy == 1 {
        format!("{}", p.y)
    } else {
        format!("{}#{}", p.y, p.copy)
    }
}

fn format_pair_ce(item: ((SitePoint, SitePoint), (usize, usize))) -> String {
    let ((p1, p2), (i, j)) = item;
    format!(
        "sites ({}, {}), entry ({}, {})",
        fmt_pt(p1),
        fmt_pt(p2),
        i,
        j
    )
}

/// Embed a two-slot operator into `V ⊗ V ⊗ V` on adjacent slots
/// `(pos, pos+1)` and compose the given factors left to right as an operator
/// product (the first listed factor is applied last).
fn compose3(factors: &[(&QMatrix, usize)], r: usize) -> CMatrix {
    let all_monomial = factors
        .iter()
        .all(|(m, _)| matches!(m, QMatrix::Monomial { .. }));
    let dim = r * r * r;
    if all_monomial {
        // Track column -> (row, phase) through the product.
        let mut fwd: Vec<usize> = (0..dim).collect();
        let mut phase: Vec<C64> = vec![ONE; dim];
        for &(m, pos) in factors.iter().rev() {
            let QMatrix::Monomial {
                fwd: mf, phase: mp, ..
            } = m
            else {
                unreachable!()
            };
            for col in 0..dim {
                let cur = fwd[col];
                let (a, b, c) = (cur / (r * r), (cur / r) % r, cur % r);
                let (pair, fixed) = if pos == 0 {
                    (a * r + b, c)
                } else {
                    (b * r + c, a)
                };
                let img = mf[pair];
                let (x, y) = (img / r, img % r);
                let nxt = if pos == 0 {
                    (x * r + y) * r + fixed
                } else {
                    (fixed * r + x) * r + y
                };
                fwd[col] = nxt;
                phase[col] *= mp[pair];
            }
        }
        let mut out = CMatrix::zeros(dim);
        for col in 0..dim {
            out[(fwd[col], col)] = phase[col];
        }
        return out;
    }
    // Dense fallback for small r: explicit embedding and matrix products.
    let embed = |m: &QMatrix, pos: usize| -> CMatrix {
        let md = m.to_dense();
        let mut out = CMatrix::zeros(dim);
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    let row3 = (a * r + b) * r + c;
                    for x in 0..r {
                        for y in 0..r {
                            if pos == 0 {
                                // acts on slots (0,1), slot 2 rides along
                                let col3 = (x * r + y) * r + c;
                                out[(row3, col3)] += md[(a * r + b, x * r + y)];
                            } else {
                                // acts on slots (1,2), slot 0 rides along
                                let col3 = (a * r + x) * r + y;
                                out[(row3, col3)] += md[(b * r + c, x * r + y)];
                            }
                        }
                    }
                }
            }
        }
        out
    };
    let mut acc = CMatrix::identity(dim);
    for &(m, pos) in factors.iter() {
        acc = acc.mul(&embed(m, pos));
    }
    acc
}

/// Precomputed kernel matrices for every ordered pair of a site table.
/// Index convention is `t1 * n + t2`.
pub struct KernelTable {
    pub n_sites: usize,
    pub q: Vec<QMatrix>,
    pub q_hat: Vec<QMatrix>,
    pub q_tilde: Vec<QMatrix>,
}

impl KernelTable {
    pub fn new(kernel: &ExchangeKernel, points: &[SitePoint]) -> Result<Self> {
        let n = points.len();
        let hat = kernel.derive_hat();
        let tilde = kernel.derive_tilde();
        let mut q = Vec::with_capacity(n * n);
        let mut q_hat = Vec::with_capacity(n * n);
        let mut q_tilde = Vec::with_capacity(n * n);
        for t1 in 0..n {
            for t2 in 0..n {
                q.push(kernel.eval_at(points[t1], points[t2])?);
                q_hat.push(hat.eval_at(points[t1], points[t2])?);
                q_tilde.push(tilde.eval_at(points[t1], points[t2])?);
            }
        }
        Ok(KernelTable {
            n_sites: n,
            q,
            q_hat,
            q_tilde,
        })
    }

    /// Inverse tilde matrices, plus the inverse-trace constant if one exists
    /// (required for anti-normal ordering).
    pub fn tilde_inverses(&self, r: usize) -> Result<(Vec<QMatrix>, f64)> {
        let mut inv = Vec::with_capacity(self.q_tilde.len());
        for m in &self.q_tilde {
            inv.push(m.inverse()?);
        }
        let mut kappa: Option<C64> = None;
        for t in 0..self.n_sites {
            let m = inv[t * self.n_sites + t].to_dense();
            for kk in 0..r {
                for ll in 0..r {
                    let mut tr = ZERO;
                    for c in 0..r {
                        tr += m[(c * r + c, kk * r + ll)];
                    }
                    let expect = if kk == ll { kappa.unwrap_or(tr) } else { ZERO };
                    if (tr - expect).norm() > TOL_EXACT {
                        return Err(Error::NoInverseTraceConstant);
                    }
                    if kk == ll && kappa.is_none() {
                        kappa = Some(tr);
                    }
                }
            }
        }
        let k = kappa.ok_or(Error::NoInverseTraceConstant)?;
        if k.im.abs() > TOL_EXACT {
            return Err(Error::NoInverseTraceConstant);
        }
        Ok((inv, k.re))
    }
}

/// Conjugation `J` on one-particle coefficient vectors.
pub fn conjugate_vector(v: &[C64]) -> Vec<C64> {
    v.iter().map(|c| c.conj()).collect()
}

/// Entrywise conjugate of a dense matrix, re-exported for the doubling
/// construction (`K' = J K J`).
pub fn matrix_conjugate(m: &CMatrix) -> CMatrix {
    conjugate_entrywise(m)
}
