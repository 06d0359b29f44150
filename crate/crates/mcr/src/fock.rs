//! Truncated Q-symmetric Fock representation.
//!
//! Level-`n` vectors are stored as full (unsymmetrized) tensors over the
//! compound one-particle index; Q-symmetry is maintained by projecting with
//! the symmetrizer after every creation. The symmetrizer is the average of
//! the braid operators `U_pi` over the symmetric group; it is evaluated
//! through the recursion
//! `P_n = (1/n) (1 ⊗ P_{n-1}) (1 + U_1 + U_1 U_2 + ... + U_1 ... U_{n-1})`,
//! with the literal `n!`-term sum kept alongside as a test oracle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exchange::{ExchangeKernel, KernelTable};
use crate::exec;
use crate::linalg::{C64, ONE, ZERO};
use crate::model::{DiscreteModel, SitePoint, SlotLayout};
use crate::report::ValidationReport;
use crate::rng::SeededRng;
use crate::tensor::Tensor;
use crate::TOL_OP;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpSign {
    Create,
    Annihilate,
}

/// Element of the truncated Fock space: one dense tensor per particle level.
#[derive(Clone, Debug)]
pub struct FockVector {
    slot_dim: usize,
    levels: Vec<Tensor>,
}

impl FockVector {
    pub fn zero(slot_dim: usize, truncation: usize) -> Self {
        let levels = (0..=truncation)
            .map(|n| Tensor::zeros(slot_dim, n))
            .collect();
        FockVector { slot_dim, levels }
    }

    pub fn vacuum(slot_dim: usize, truncation: usize) -> Self {
        let mut v = Self::zero(slot_dim, truncation);
        v.levels[0] = Tensor::from_vec(slot_dim, 0, vec![ONE]);
        v
    }

    pub fn truncation(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn slot_dim(&self) -> usize {
        self.slot_dim
    }

    pub fn level(&self, n: usize) -> &Tensor {
        &self.levels[n]
    }

    pub fn set_level(&mut self, n: usize, t: Tensor) {
        assert_eq!(t.rank(), n);
        self.levels[n] = t;
    }

    pub fn scalar_part(&self) -> C64 {
        self.levels[0].data()[0]
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: C64) {
        assert_eq!(self.levels.len(), other.levels.len());
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            if b.sup_norm() > 0.0 {
                a.add_scaled(b, c);
            }
        }
    }

    pub fn scale_in_place(&mut self, c: C64) {
        for t in &mut self.levels {
            t.scale_in_place(c);
        }
    }

    /// Weighted inner product `sum_n n! <f_n, g_n>`, conjugating `other`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        let mut acc = ZERO;
        let mut fact = 1.0;
        for (n, (a, b)) in self.levels.iter().zip(&other.levels).enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            acc += a.inner(b) * fact;
        }
        acc
    }

    pub fn sup_norm(&self) -> f64 {
        self.levels.iter().map(|t| t.sup_norm()).fold(0.0, f64::max)
    }

    /// Drop levels above `keep` (exact when those levels can no longer
    /// influence a vacuum expectation).
    pub(crate) fn prune_above(&mut self, keep: usize) {
        for n in (keep + 1)..self.levels.len() {
            if self.levels[n].sup_norm() > 0.0 {
                self.levels[n] = Tensor::zeros(self.slot_dim, n);
            }
        }
    }
}

/// The representation context: kernel matrices tabulated over a site point
/// set, plus the slot layout and truncation.
pub struct FockSpace {
    pub layout: SlotLayout,
    pub points: Vec<SitePoint>,
    pub table: KernelTable,
    pub truncation: usize,
    pub budget: usize,
}

impl FockSpace {
    /// Representation over the model's own sites.
    pub fn new(kernel: &ExchangeKernel, model: &DiscreteModel) -> Result<Self> {
        let points = model.site_points();
        Self::over_points(kernel, model, points, model.truncation)
    }

    /// Representation over an explicit site point set (used by the doubling
    /// construction, where `kernel` is already the doubled kernel).
    pub fn over_points(
        kernel: &ExchangeKernel,
        model: &DiscreteModel,
        points: Vec<SitePoint>,
        truncation: usize,
    ) -> Result<Self> {
        if kernel.components() != model.components {
            return Err(Error::Dimension(format!(
                "kernel has {} components, model has {}",
                kernel.components(),
                model.components
            )));
        }
        let table = KernelTable::new(kernel, &points)?;
        let layout = SlotLayout {
            sites: points.len(),
            components: model.components,
            internal: model.internal_dim,
        };
        // refuse configurations whose top level cannot be stored
        let needed = layout.dim().checked_pow(truncation as u32);
        match needed {
            Some(n) if n <= model.entry_budget => {}
            _ => {
                return Err(Error::MemoryCap {
                    needed: needed.unwrap_or(usize::MAX),
                    budget: model.entry_budget,
                })
            }
        }
        Ok(FockSpace {
            layout,
            points,
            table,
            truncation,
            budget: model.entry_budget,
        })
    }

    pub fn one_particle_dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn vacuum(&self) -> FockVector {
        FockVector::vacuum(self.layout.dim(), self.truncation)
    }

    pub fn basis_vector(&self, idx: usize) -> Vec<C64> {
        let mut v = vec![ZERO; self.layout.dim()];
        v[idx] = ONE;
        v
    }

    /// Braid operator on adjacent slots `(slot, slot+1)`.
    pub fn exchange(&self, t: &Tensor, slot: usize) -> Tensor {
        t.exchange_adjacent(slot, &self.table.q, &self.layout, false)
    }

    /// Braid operator built from the conjugate-swap kernel (annihilator side).
    pub fn exchange_hat(&self, t: &Tensor, slot: usize) -> Tensor {
        t.exchange_adjacent(slot, &self.table.q_hat, &self.layout, false)
    }

    /// `U_w` for a word of adjacent transposition indices, rightmost applied
    /// first (operator-product order).
    pub fn exchange_word(&self, t: &Tensor, word: &[usize]) -> Tensor {
        let mut cur = t.clone();
        for &i in word.iter().rev() {
            cur = self.exchange(&cur, i);
        }
        cur
    }

    /// Symmetrizer via the product recursion; `O(n^2)` exchanges.
    pub fn symmetrize(&self, t: &Tensor) -> Tensor {
        self.symmetrize_range(t, 0, t.rank(), false)
    }

    /// Hat-kernel symmetrizer (projects onto the annihilator symmetry class).
    pub fn symmetrize_hat(&self, t: &Tensor) -> Tensor {
        self.symmetrize_range(t, 0, t.rank(), true)
    }

    /// Symmetrize slots `[start, start+len)` only. Uses the coset chain
    /// `P_n = (1/n) (1 + U_{n-1} + U_{n-2} U_{n-1} + ... + U_1 .. U_{n-1})
    /// (P_{n-1} ⊗ 1)` read right to left, so each extra term costs one
    /// exchange.
    pub fn symmetrize_range(&self, t: &Tensor, start: usize, len: usize, hat: bool) -> Tensor {
        if len <= 1 {
            return t.clone();
        }
        let mats = if hat {
            &self.table.q_hat
        } else {
            &self.table.q
        };
        let inner = self.symmetrize_range(t, start, len - 1, hat);
        let mut acc = inner.clone();
        let mut w = inner;
        for j in (0..len - 1).rev() {
            w = w.exchange_adjacent(start + j, mats, &self.layout, false);
            acc.add_scaled(&w, ONE);
        }
        acc.scale_in_place(C64::new(1.0 / len as f64, 0.0));
        acc
    }

    /// Literal `(1/n!) sum_pi U_pi` with one reduced word per permutation.
    /// Kept as an independent oracle for the recursion-based symmetrizer.
    pub fn symmetrize_perm_sum(&self, t: &Tensor) -> Tensor {
        let n = t.rank();
        if n <= 1 {
            return t.clone();
        }
        let mut out = Tensor::zeros(t.slot_dim(), n);
        let mut count = 0usize;
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let word = reduced_word(&perm);
            out.add_scaled(&self.exchange_word(t, &word), ONE);
            count += 1;
            if !next_permutation(&mut perm) {
                break;
            }
        }
        out.scale_in_place(C64::new(1.0 / count as f64, 0.0));
        out
    }

    /// Creation operator: level `n` of the input feeds level `n+1` of the
    /// output through the symmetrized tensor product; the level that would
    /// exceed the truncation is dropped.
    pub fn create(&self, f: &[C64], fv: &FockVector) -> FockVector {
        self.create_checked(f, fv).0
    }

    /// As [`create`](Self::create), also reporting whether nonzero mass was
    /// dropped at the truncation boundary.
    pub fn create_checked(&self, f: &[C64], fv: &FockVector) -> (FockVector, bool) {
        self.create_up_to(f, fv, fv.truncation())
    }

    /// Creation with an explicit cap on the target level; used by the
    /// expectation walkers to skip levels that can no longer reach the
    /// scalar sector.
    fn create_up_to(&self, f: &[C64], fv: &FockVector, max_target: usize) -> (FockVector, bool) {
        let nt = fv.truncation();
        let mut out = FockVector::zero(self.layout.dim(), nt);
        let top = max_target.min(nt);
        for n in 0..top {
            if fv.level(n).sup_norm() == 0.0 {
                continue;
            }
            let raw = fv.level(n).prepend(f);
            out.set_level(n + 1, self.symmetrize(&raw));
        }
        let dropped = fv.level(nt).sup_norm() > 0.0;
        (out, dropped)
    }

    /// Annihilation operator: bilinear contraction of the first slot with
    /// prefactor `n`; kills the vacuum.
    pub fn annihilate(&self, f: &[C64], fv: &FockVector) -> FockVector {
        let nt = fv.truncation();
        let mut out = FockVector::zero(self.layout.dim(), nt);
        for n in 1..=nt {
            if fv.level(n).sup_norm() == 0.0 {
                continue;
            }
            let mut t = fv.level(n).contract_slot0(f);
            t.scale_in_place(C64::new(n as f64, 0.0));
            out.set_level(n - 1, t);
        }
        out
    }

    /// Normal-ordered operator action: contract the trailing `n` slots of
    /// the coefficient tensor against the leading slots of each level in
    /// reversed order, then project. Levels pushed past the truncation are
    /// dropped, mirroring the creation policy.
    pub fn wick_apply(
        &self,
        coeff: &Tensor,
        m: usize,
        n: usize,
        fv: &FockVector,
    ) -> Result<FockVector> {
        assert_eq!(coeff.rank(), m + n);
        let d = self.layout.dim();
        let nt = fv.truncation();
        let mut out = FockVector::zero(d, nt);
        for k in n..=nt {
            let target = m + k - n;
            if target > nt {
                continue;
            }
            if fv.level(k).sup_norm() == 0.0 {
                continue;
            }
            Tensor::try_zeros(d, target, self.budget)?;
            let raw = coeff.contract_tail_reversed(fv.level(k), n);
            let mut t = self.symmetrize(&raw);
            t.add_scaled(out.level(target), ONE);
            out.set_level(target, t);
        }
        Ok(out)
    }

    /// Vacuum expectation of a word of creation/annihilation operators,
    /// applied right to left. Levels that can no longer reach the scalar
    /// sector are pruned exactly; an error is raised only if live mass would
    /// cross the truncation boundary.
    pub fn vacuum_expectation(&self, word: &[(OpSign, Vec<C64>)]) -> Result<C64> {
        // Live levels never exceed half the word length; storing more only
        // burns allocations on tensors that are pruned immediately.
        let n_eff = self.truncation.min(word.len() / 2);
        let mut state = FockVector::vacuum(self.layout.dim(), n_eff);
        for (i, (sign, f)) in word.iter().enumerate().rev() {
            let remaining = i;
            match sign {
                OpSign::Create => {
                    let (next, dropped) = self.create_up_to(f, &state, remaining.min(n_eff));
                    if dropped && remaining > n_eff {
                        return Err(Error::TruncationOverflow {
                            needed: n_eff + 1,
                            max: self.truncation,
                        });
                    }
                    state = next;
                }
                OpSign::Annihilate => {
                    state = self.annihilate(f, &state);
                }
            }
            // Levels above `remaining` cannot come back to the scalar
            // sector with the operators still ahead; drop them exactly.
            state.prune_above(remaining.min(n_eff));
        }
        Ok(state.scalar_part())
    }

    /// Vacuum expectation of a product of field-type sums
    /// `(a^+(f_k) + a^-(f'_k))`, applied right to left with the same exact
    /// pruning as [`vacuum_expectation`](Self::vacuum_expectation).
    pub fn field_sum_expectation(&self, terms: &[(Vec<C64>, Vec<C64>)]) -> Result<C64> {
        let n_eff = self.truncation.min(terms.len() / 2);
        let mut state = FockVector::vacuum(self.layout.dim(), n_eff);
        for (i, (f, fp)) in terms.iter().enumerate().rev() {
            let remaining = i;
            let (created, dropped) = self.create_up_to(f, &state, remaining.min(n_eff));
            if dropped && remaining > n_eff {
                return Err(Error::TruncationOverflow {
                    needed: n_eff + 1,
                    max: self.truncation,
                });
            }
            let mut next = created;
            next.add_scaled(&self.annihilate(fp, &state), ONE);
            next.prune_above(remaining.min(n_eff));
            state = next;
        }
        Ok(state.scalar_part())
    }

    /// Random Q-symmetric Fock vector (each level symmetrized).
    pub fn random_symmetric(&self, rng: &mut SeededRng, max_level: usize) -> FockVector {
        let d = self.layout.dim();
        let mut fv = FockVector::zero(d, self.truncation);
        fv.set_level(
            0,
            Tensor::from_vec(d, 0, vec![Complex64::new(rng.real_in(-1.0, 1.0), 0.0)]),
        );
        for n in 1..=max_level.min(self.truncation) {
            let flat = rng.complex_vector(d.pow(n as u32));
            let t = Tensor::from_vec(d, n, flat);
            fv.set_level(n, self.symmetrize(&t));
        }
        fv
    }

    /// Exhaustive check of the three commutation relations in smeared,
    /// discretized form: creator exchange against `Q`, annihilator exchange
    /// against the conjugate-swap kernel, and the mixed relation with its
    /// delta contraction and the index-permutation kernel. Runs over all
    /// one-particle basis pairs and all symmetrized basis vectors up to
    /// level `truncation - 2`.
    pub fn verify_mcr(&self) -> Result<ValidationReport> {
        if self.truncation < 3 {
            return Err(Error::TruncationOverflow {
                needed: 3,
                max: self.truncation,
            });
        }
        let d = self.layout.dim();
        let max_level = self.truncation - 2;

        // Symmetrized basis states (skip those projected to zero).
        let mut states: Vec<FockVector> = vec![self.vacuum()];
        for k in 1..=max_level {
            for w in 0..d.pow(k as u32) {
                let mut t = Tensor::zeros(d, k);
                t.data_mut()[w] = ONE;
                let sym = self.symmetrize(&t);
                if sym.sup_norm() > 1e-14 {
                    let mut fv = FockVector::zero(d, self.truncation);
                    fv.set_level(k, sym);
                    states.push(fv);
                }
            }
        }

        let residuals = exec::map_range(d * d, |pair| {
            let (a, b) = (pair / d, pair % d);
            let mut t = Tensor::zeros(d, 2);
            t.set(&[a, b], ONE);
            let t_pp = t.exchange_adjacent(0, &self.table.q, &self.layout, false);
            let t_mm = t.exchange_adjacent(0, &self.table.q_hat, &self.layout, false);
            let t_mp = t.exchange_adjacent(0, &self.table.q_tilde, &self.layout, true);
            let delta = t.delta_trace_adjacent(0).data()[0];

            let mut worst = [0.0_f64; 3];
            for fv in &states {
                let k = (0..=fv.truncation())
                    .rev()
                    .find(|&n| fv.level(n).sup_norm() > 0.0)
                    .unwrap_or(0);

                // creator-creator
                let lhs = self.two_slot_create(&t, fv.level(k));
                let rhs = self.two_slot_create(&t_pp, fv.level(k));
                worst[0] = worst[0].max(lhs.sup_distance(&rhs));

                // annihilator-annihilator
                if k >= 2 {
                    let lhs = self.two_slot_annihilate(&t, fv.level(k));
                    let rhs = self.two_slot_annihilate(&t_mm, fv.level(k));
                    worst[1] = worst[1].max(lhs.sup_distance(&rhs));
                }

                // mixed: ann-cre = delta * id + cre-ann with the tilde kernel
                let lhs = self.two_slot_ann_cre(&t, fv.level(k));
                let mut rhs = self.two_slot_cre_ann(&t_mp, fv.level(k));
                rhs.add_scaled(fv.level(k), delta);
                worst[2] = worst[2].max(lhs.sup_distance(&rhs));
            }
            worst
        });

        let mut total = [0.0_f64; 3];
        for w in residuals {
            for i in 0..3 {
                total[i] = total[i].max(w[i]);
            }
        }
        let mut report = ValidationReport::new("fock_mcr", TOL_OP);
        report.push("create_create_exchange", total[0], None);
        report.push("annihilate_annihilate_exchange", total[1], None);
        report.push("mixed_exchange_contraction", total[2], None);
        Ok(report)
    }

    /// `sum_{a,b} T[a,b] a^+(e_a) a^+(e_b)` applied to a level tensor:
    /// equals `P_{k+2}(T ⊗ F)`.
    fn two_slot_create(&self, t: &Tensor, level: &Tensor) -> Tensor {
        self.symmetrize(&t.outer(level))
    }

    /// `sum_{a,b} T[a,b] a^-(e_a) a^-(e_b)` on a level tensor:
    /// `k (k-1) sum_{a,b} T[a,b] F[b, a, ..]`.
    fn two_slot_annihilate(&self, t: &Tensor, level: &Tensor) -> Tensor {
        let k = level.rank();
        if k < 2 {
            return Tensor::zeros(level.slot_dim(), k.saturating_sub(2));
        }
        let mut out = t.contract_tail_reversed(level, 2);
        out.scale_in_place(C64::new((k * (k - 1)) as f64, 0.0));
        out
    }

    /// `sum_{a,b} T[a,b] a^-(e_a) a^+(e_b)` on a level tensor.
    fn two_slot_ann_cre(&self, t: &Tensor, level: &Tensor) -> Tensor {
        let d = self.layout.dim();
        let k = level.rank();
        let mut out = Tensor::zeros(d, k);
        for b in 0..d {
            let eb = self.basis_vector(b);
            let created = self.symmetrize(&level.prepend(&eb));
            // contract the leading slot of `created` against T[., b]
            let col: Vec<C64> = (0..d).map(|a| t.get(&[a, b])).collect();
            out.add_scaled(&created.contract_slot0(&col), ONE);
        }
        out.scale_in_place(C64::new((k + 1) as f64, 0.0));
        out
    }

    /// `sum_{a,b} S[a,b] a^+(e_a) a^-(e_b)` on a level tensor.
    fn two_slot_cre_ann(&self, s: &Tensor, level: &Tensor) -> Tensor {
        let d = self.layout.dim();
        let k = level.rank();
        let mut out = Tensor::zeros(d, k);
        if k == 0 {
            return out;
        }
        for a in 0..d {
            let row: Vec<C64> = (0..d).map(|b| s.get(&[a, b])).collect();
            let mut inner = level.contract_slot0(&row);
            inner.scale_in_place(C64::new(k as f64, 0.0));
            let ea = self.basis_vector(a);
            out.add_scaled(&self.symmetrize(&inner.prepend(&ea)), ONE);
        }
        out
    }
}

/// A reduced word for `perm`: adjacent transposition positions which, applied
/// in order to the one-line array, sort it to the identity. Applying the
/// corresponding braid operators rightmost-first realizes `U_perm`.
pub fn reduced_word(perm: &[usize]) -> Vec<usize> {
    let mut p = perm.to_vec();
    let mut word = Vec::new();
    let n = p.len();
    loop {
        let mut swapped = false;
        for i in 0..n.saturating_sub(1) {
            if p[i] > p[i + 1] {
                p.swap(i, i + 1);
                word.push(i);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    word
}

/// Lexicographic next permutation; false when wrapped around.
pub fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        p.sort_unstable();
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Falling factorial `(k)_n = k (k-1) ... (k-n+1)`.
pub fn falling_factorial(k: usize, n: usize) -> f64 {
    (0..n).map(|i| (k - i) as f64).product()
}
