//! Gauge-invariant quasi-free states via the doubling construction.
//!
//! Given a kernel passing the state assumptions with trace constant `kappa`
//! and a coefficient operator `K` on the transverse space (`K >= 0`, and
//! additionally `K <= -1/kappa` when `kappa < 0`), field operators are
//! represented on the Fock space over two tagged copies of the site set:
//! the creator mixes a copy-2 creation weighted by `sqrt(1 + kappa K)` with
//! a copy-1 annihilation weighted by `sqrt(K)`, and the annihilator is its
//! adjoint. The vacuum of the doubled space then restricts to a state whose
//! mixed moments close over the two-point function
//! `rho2[g1, g2] = sum_z (K g1)(z) g2(z)` on matched creator/annihilator
//! pairs, and whose full field moments close over
//! `lambda2[g1, g2] = (g2, g1) + (K g1, g2) + kappa (g2, K g1)` exactly when
//! the kernel satisfies `tilde(Q)(y1, y2) = Q(y2, y1)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exchange::{matrix_conjugate, ExchangeKernel, KernelTable};
use crate::exec;
use crate::fock::{FockSpace, FockVector};
use crate::linalg::{hermitian_eigen, hermitian_sqrt, CMatrix, C64, ONE, ZERO};
use crate::model::{DiscreteModel, SlotLayout};
use crate::pairings::{matched_pair_sum, partition_moment_sum};
use crate::report::ValidationReport;
use crate::rng::SeededRng;
use crate::tensor::Tensor;
use crate::{TOL_EXACT, TOL_MOMENT, TOL_OP};

/// Validated coefficient operator on the transverse space.
#[derive(Clone, Debug)]
pub struct KOperator {
    pub matrix: CMatrix,
    pub kappa: f64,
}

/// Check Hermiticity, the spectral bounds implied by the sign of `kappa`,
/// and non-degeneracy (`K != 0` and, for negative `kappa`, `K != -1/kappa`).
pub fn validate_k(matrix: CMatrix, kappa: f64) -> Result<KOperator> {
    let herm = matrix.hermitian_residual();
    if herm > TOL_EXACT {
        return Err(Error::NotHermitian(herm));
    }
    let (eigs, _) = hermitian_eigen(&matrix)?;
    let hi_bound = if kappa < 0.0 {
        -1.0 / kappa
    } else {
        f64::INFINITY
    };
    for &lam in &eigs {
        if lam < -TOL_EXACT || lam > hi_bound + TOL_EXACT {
            return Err(Error::EigenvalueOutOfRange {
                value: lam,
                lo: 0.0,
                hi: hi_bound,
            });
        }
    }
    if matrix.sup_norm() <= TOL_EXACT {
        return Err(Error::DegenerateK("K = 0 leaves no copy-1 mixing".into()));
    }
    if kappa < 0.0 {
        let top = CMatrix::identity(matrix.n).scale(C64::new(hi_bound, 0.0));
        if matrix.sub(&top).sup_norm() <= TOL_EXACT {
            return Err(Error::DegenerateK(format!(
                "K = {hi_bound} * I makes the copy-2 weight vanish"
            )));
        }
    }
    Ok(KOperator { matrix, kappa })
}

/// Field operator kinds accepted by the state evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    /// `A^+(f)`
    Create,
    /// `A^-(f)`
    Annihilate,
    /// `B(f) = A^+(f) + A^-(Jf)`
    Field,
}

/// Everything needed to evaluate the quasi-free state: the validated base
/// kernel and model, the doubled representation, and the mixing weights.
pub struct QuasiFreeContext {
    pub base_kernel: ExchangeKernel,
    pub base_model: DiscreteModel,
    pub base_layout: SlotLayout,
    base_table: KernelTable,
    pub doubled: FockSpace,
    pub k_op: KOperator,
    pub kappa: f64,
    k1: CMatrix,
    k2: CMatrix,
    k1_conj: CMatrix,
    k2_conj: CMatrix,
}

impl QuasiFreeContext {
    /// Validate everything and assemble the doubled representation with the
    /// given Fock truncation.
    pub fn new(
        kernel: &ExchangeKernel,
        model: &DiscreteModel,
        k_matrix: CMatrix,
        doubled_truncation: usize,
    ) -> Result<Self> {
        if k_matrix.n != model.internal_dim {
            return Err(Error::Dimension(format!(
                "K is {}x{0} but the transverse dimension is {}",
                k_matrix.n, model.internal_dim
            )));
        }
        let validated = kernel.clone().into_validated(model)?;
        let kappa = validated.kappa().expect("validated kernel carries kappa");
        let k_op = validate_k(k_matrix, kappa)?;
        let k1 = hermitian_sqrt(&k_op.matrix)?;
        let mut shifted = k_op.matrix.scale(C64::new(kappa, 0.0));
        shifted = shifted.add(&CMatrix::identity(k_op.matrix.n));
        let k2 = hermitian_sqrt(&shifted)?;
        let k1_conj = matrix_conjugate(&k1);
        let k2_conj = matrix_conjugate(&k2);

        let doubled_kernel = validated.doubled();
        let points = model.doubled_site_points();
        let doubled = FockSpace::over_points(&doubled_kernel, model, points, doubled_truncation)?;
        let base_table = KernelTable::new(&validated, &model.site_points())?;
        Ok(QuasiFreeContext {
            base_kernel: validated,
            base_model: model.clone(),
            base_layout: model.layout(),
            base_table,
            doubled,
            k_op,
            kappa,
            k1,
            k2,
            k1_conj,
            k2_conj,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.base_layout.dim()
    }

    /// Mixing weight `K_1 = sqrt(K)`.
    pub fn k1(&self) -> &CMatrix {
        &self.k1
    }

    /// Mixing weight `K_2 = sqrt(1 + kappa K)`.
    pub fn k2(&self) -> &CMatrix {
        &self.k2
    }

    /// Apply the transverse operator to a base one-particle vector and embed
    /// it into the requested copy block of the doubled space.
    fn lift(&self, f: &[C64], op: &CMatrix, copy: u8) -> Vec<C64> {
        let m = self.base_model.sites.len();
        let r = self.base_model.components;
        let s = self.base_model.internal_dim;
        assert_eq!(f.len(), m * r * s);
        let offset = if copy == 1 { 0 } else { m };
        let mut out = vec![ZERO; 2 * m * r * s];
        for t in 0..m {
            for c in 0..r {
                for z in 0..s {
                    let mut acc = ZERO;
                    for zp in 0..s {
                        acc += op[(z, zp)] * f[(t * r + c) * s + zp];
                    }
                    out[((t + offset) * r + c) * s + z] = acc;
                }
            }
        }
        out
    }

    fn apply_create_checked(&self, f: &[C64], fv: &FockVector) -> (FockVector, bool) {
        let up = self.lift(f, &self.k2, 2);
        let down = self.lift(f, &self.k1, 1);
        let (mut out, dropped) = self.doubled.create_checked(&up, fv);
        out.add_scaled(&self.doubled.annihilate(&down, fv), ONE);
        (out, dropped)
    }

    fn apply_annihilate_checked(&self, f: &[C64], fv: &FockVector) -> (FockVector, bool) {
        let up = self.lift(f, &self.k1_conj, 1);
        let down = self.lift(f, &self.k2_conj, 2);
        let (mut out, dropped) = self.doubled.create_checked(&up, fv);
        out.add_scaled(&self.doubled.annihilate(&down, fv), ONE);
        (out, dropped)
    }

    /// Represented creator `A^+(f)` on the doubled Fock space.
    pub fn apply_create(&self, f: &[C64], fv: &FockVector) -> FockVector {
        self.apply_create_checked(f, fv).0
    }

    /// Represented annihilator `A^-(f)`.
    pub fn apply_annihilate(&self, f: &[C64], fv: &FockVector) -> FockVector {
        self.apply_annihilate_checked(f, fv).0
    }

    /// Field operator `B(f) = A^+(f) + A^-(Jf)`.
    pub fn apply_field(&self, f: &[C64], fv: &FockVector) -> FockVector {
        let jf: Vec<C64> = f.iter().map(|c| c.conj()).collect();
        let mut out = self.apply_create(f, fv);
        out.add_scaled(&self.apply_annihilate(&jf, fv), ONE);
        out
    }

    /// Vacuum of the doubled representation.
    pub fn vacuum(&self) -> FockVector {
        self.doubled.vacuum()
    }

    /// State evaluation: apply the word right to left to the doubled vacuum
    /// and read off the scalar sector, with exact live-level pruning.
    pub fn tau(&self, word: &[(FieldOp, Vec<C64>)]) -> Result<C64> {
        let n_eff = self.doubled.truncation.min(word.len().div_ceil(2));
        let mut state = FockVector::vacuum(self.doubled.layout.dim(), n_eff);
        for (i, (op, f)) in word.iter().enumerate().rev() {
            let remaining = i;
            let (next, dropped) = match op {
                FieldOp::Create => self.apply_create_checked(f, &state),
                FieldOp::Annihilate => self.apply_annihilate_checked(f, &state),
                FieldOp::Field => {
                    let jf: Vec<C64> = f.iter().map(|c| c.conj()).collect();
                    let (mut out, d1) = self.apply_create_checked(f, &state);
                    let (ann, d2) = self.apply_annihilate_checked(&jf, &state);
                    out.add_scaled(&ann, ONE);
                    (out, d1 || d2)
                }
            };
            if dropped && remaining > n_eff {
                return Err(Error::TruncationOverflow {
                    needed: n_eff + 1,
                    max: self.doubled.truncation,
                });
            }
            let mut next = next;
            next.prune_above(remaining.min(n_eff));
            state = next;
        }
        Ok(state.scalar_part())
    }

    /// Matched-pair two-point density: `sum_z (K g1)(z) g2(z)`, bilinear.
    pub fn rho2(&self, g1: &[C64], g2: &[C64]) -> C64 {
        let kg1 = self.k_op.matrix.mul_vec(g1);
        kg1.iter().zip(g2).map(|(a, b)| a * b).sum()
    }

    /// Field two-point coefficient
    /// `(g2, g1) + (K g1, g2) + kappa (g2, K g1)`, conjugate-second inner
    /// products.
    pub fn lambda2(&self, g1: &[C64], g2: &[C64]) -> C64 {
        let dot =
            |u: &[C64], v: &[C64]| -> C64 { u.iter().zip(v).map(|(a, b)| a * b.conj()).sum() };
        let kg1 = self.k_op.matrix.mul_vec(g1);
        dot(g2, g1) + dot(&kg1, g2) + dot(g2, &kg1) * C64::new(self.kappa, 0.0)
    }

    /// Does the kernel satisfy `tilde(Q)(y1, y2) = Q(y2, y1)` on all site
    /// pairs? This is the exact criterion for the state to be strongly
    /// quasi-free.
    pub fn strong_condition_residual(&self) -> f64 {
        let n = self.base_table.n_sites;
        let mut worst = 0.0_f64;
        for t1 in 0..n {
            for t2 in 0..n {
                let tilde = self.base_table.q_tilde[t1 * n + t2].to_dense();
                let swapped = self.base_table.q[t2 * n + t1].to_dense();
                worst = worst.max(tilde.sup_distance(&swapped).0);
            }
        }
        worst
    }

    /// Check the three commutation relations for the represented field
    /// operators, exhaustively over base one-particle basis pairs and
    /// symmetrized doubled basis vectors up to `max_level`.
    pub fn verify_field_mcr(&self, max_level: usize) -> Result<ValidationReport> {
        let d = self.base_dim();
        let dd = self.doubled.layout.dim();
        // Two ladder steps on top of the deepest state level suffice; a
        // larger working truncation only drags zero levels through every
        // composite application.
        let nt = (max_level + 2).min(self.doubled.truncation.max(2));

        let mut states: Vec<FockVector> = vec![FockVector::vacuum(dd, nt)];
        for k in 1..=max_level.min(nt) {
            for w in 0..dd.pow(k as u32) {
                let mut t = Tensor::zeros(dd, k);
                t.data_mut()[w] = ONE;
                let sym = self.doubled.symmetrize(&t);
                if sym.sup_norm() > 1e-14 {
                    let mut fv = FockVector::zero(dd, nt);
                    fv.set_level(k, sym);
                    states.push(fv);
                }
            }
        }

        let basis = |idx: usize| -> Vec<C64> {
            let mut v = vec![ZERO; d];
            v[idx] = ONE;
            v
        };

        let worst_per_state = exec::map_range(states.len(), |si| {
            let fv = &states[si];
            let mut worst = [0.0_f64; 3];
            // cache single applications per basis index
            let created: Vec<FockVector> =
                (0..d).map(|b| self.apply_create(&basis(b), fv)).collect();
            let annihilated: Vec<FockVector> = (0..d)
                .map(|b| self.apply_annihilate(&basis(b), fv))
                .collect();
            for a in 0..d {
                for b in 0..d {
                    let mut t = Tensor::zeros(d, 2);
                    t.set(&[a, b], ONE);
                    let t_pp = t.exchange_adjacent(0, &self.base_table.q, &self.base_layout, false);
                    let t_mm =
                        t.exchange_adjacent(0, &self.base_table.q_hat, &self.base_layout, false);
                    let t_mp =
                        t.exchange_adjacent(0, &self.base_table.q_tilde, &self.base_layout, true);
                    let delta = t.delta_trace_adjacent(0).data()[0];

                    // creator-creator: A+(e_a) A+(e_b) = sum T'[a',b'] A+(e_a') A+(e_b')
                    let lhs = self.apply_create(&basis(a), &created[b]);
                    let rhs = self.apply_weighted(&t_pp, FieldOp::Create, &created);
                    worst[0] = worst[0].max(diff(&lhs, &rhs));

                    // annihilator-annihilator
                    let lhs = self.apply_annihilate(&basis(a), &annihilated[b]);
                    let rhs = self.apply_weighted(&t_mm, FieldOp::Annihilate, &annihilated);
                    worst[1] = worst[1].max(diff(&lhs, &rhs));

                    // mixed with the delta contraction
                    let lhs = self.apply_annihilate(&basis(a), &created[b]);
                    let mut rhs = self.apply_weighted(&t_mp, FieldOp::Create, &annihilated);
                    rhs.add_scaled(fv, delta);
                    worst[2] = worst[2].max(diff(&lhs, &rhs));
                }
            }
            worst
        });

        let mut total = [0.0_f64; 3];
        for w in worst_per_state {
            for i in 0..3 {
                total[i] = total[i].max(w[i]);
            }
        }
        let mut report = ValidationReport::new("field_mcr", TOL_OP);
        report.kappa = Some(self.kappa);
        report.push("create_create_exchange", total[0], None);
        report.push("annihilate_annihilate_exchange", total[1], None);
        report.push("mixed_exchange_contraction", total[2], None);
        Ok(report)
    }

    /// `sum_{a,b} T[a,b] A^{outer}(e_a) applied to inner[b]`, exploiting
    /// linearity of the represented operators in their argument.
    fn apply_weighted(&self, t: &Tensor, outer: FieldOp, inner: &[FockVector]) -> FockVector {
        let d = self.base_dim();
        let mut out = FockVector::zero(self.doubled.layout.dim(), inner[0].truncation());
        for (b, target) in inner.iter().enumerate() {
            let col: Vec<C64> = (0..d).map(|a| t.get(&[a, b])).collect();
            if col.iter().all(|c| *c == ZERO) {
                continue;
            }
            let applied = match outer {
                FieldOp::Create => self.apply_create(&col, target),
                FieldOp::Annihilate => self.apply_annihilate(&col, target),
                FieldOp::Field => unreachable!("field ops are not exchanged directly"),
            };
            out.add_scaled(&applied, ONE);
        }
        out
    }

    /// The gauge-invariant quasi-free identity: LHS creators-then-
    /// annihilators under the state, RHS the matched-pair sum over `rho2`
    /// (zero when the counts differ). Randomized over `samples` draws.
    pub fn verify_gauge_invariant(
        &self,
        m: usize,
        n: usize,
        samples: usize,
        rng: &mut SeededRng,
    ) -> Result<ValidationReport> {
        let mr = self.base_model.sites.len() * self.base_model.components;
        let s = self.base_model.internal_dim;
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let phis: Vec<Vec<C64>> = (0..m + n).map(|_| rng.complex_vector(mr)).collect();
            let gs: Vec<Vec<C64>> = (0..m + n).map(|_| rng.complex_vector(s)).collect();
            let mut word = Vec::new();
            for k in 0..m {
                word.push((
                    FieldOp::Create,
                    crate::pairings::product_vector(&phis[k], &gs[k], &self.base_model),
                ));
            }
            for k in m..m + n {
                word.push((
                    FieldOp::Annihilate,
                    crate::pairings::product_vector(&phis[k], &gs[k], &self.base_model),
                ));
            }
            let lhs = self.tau(&word)?;
            let rhs = if m == n {
                let weight = |i: usize, j: usize| -> C64 { self.rho2(&gs[i], &gs[j]) };
                matched_pair_sum(&self.base_kernel, &self.base_model, &phis, &weight)?
            } else {
                ZERO
            };
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
        let mut report = ValidationReport::new("gauge_invariant_quasifree", TOL_MOMENT);
        report.kappa = Some(self.kappa);
        report.push(&format!("moment_identity_m{m}_n{n}"), worst, None);
        Ok(report)
    }

    /// Particle-number grading: words with unequal creator/annihilator
    /// counts have vanishing expectation. Exhausts all sign words up to
    /// `max_len` with one random argument draw each.
    pub fn verify_gauge_grading(
        &self,
        max_len: usize,
        rng: &mut SeededRng,
    ) -> Result<ValidationReport> {
        let d = self.base_dim();
        let mut worst = 0.0_f64;
        for len in 1..=max_len {
            for mask in 0..(1usize << len) {
                let creators = (mask as u32).count_ones() as usize;
                if 2 * creators == len {
                    continue;
                }
                let word: Vec<(FieldOp, Vec<C64>)> = (0..len)
                    .map(|k| {
                        let op = if (mask >> k) & 1 == 1 {
                            FieldOp::Create
                        } else {
                            FieldOp::Annihilate
                        };
                        (op, rng.complex_vector(d))
                    })
                    .collect();
                worst = worst.max(self.tau(&word)?.norm());
            }
        }
        let mut report = ValidationReport::new("gauge_grading", TOL_OP);
        report.push(
            &format!("unequal_counts_vanish_len_le_{max_len}"),
            worst,
            None,
        );
        Ok(report)
    }

    /// The strongly quasi-free identity at order `n`: field moments against
    /// the full pair-partition sum over `lambda2`. Also records whether the
    /// kernel satisfies the strong exchange condition.
    pub fn verify_strongly_quasifree(
        &self,
        n: usize,
        samples: usize,
        rng: &mut SeededRng,
    ) -> Result<ValidationReport> {
        let mr = self.base_model.sites.len() * self.base_model.components;
        let s = self.base_model.internal_dim;
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let phis: Vec<Vec<C64>> = (0..n).map(|_| rng.real_vector(mr)).collect();
            let gs: Vec<Vec<C64>> = (0..n).map(|_| rng.complex_vector(s)).collect();
            let word: Vec<(FieldOp, Vec<C64>)> = (0..n)
                .map(|k| {
                    (
                        FieldOp::Field,
                        crate::pairings::product_vector(&phis[k], &gs[k], &self.base_model),
                    )
                })
                .collect();
            let lhs = self.tau(&word)?;
            let weight = |i: usize, j: usize| -> C64 { self.lambda2(&gs[i], &gs[j]) };
            let rhs = partition_moment_sum(&self.base_kernel, &self.base_model, &phis, &weight)?;
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
        let mut report = ValidationReport::new("strongly_quasifree", TOL_MOMENT);
        report.kappa = Some(self.kappa);
        report.push(&format!("field_moment_identity_n{n}"), worst, None);
        report.strong_condition_holds = Some(self.strong_condition_residual() <= TOL_EXACT);
        Ok(report)
    }
}

fn diff(a: &FockVector, b: &FockVector) -> f64 {
    let mut c = a.clone();
    c.add_scaled(b, Complex64::new(-1.0, 0.0));
    c.sup_norm()
}
