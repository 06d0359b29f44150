//! Symbolic algebra of smeared creation/annihilation symbols.
//!
//! Elements are finite sums `c * 1 + sum_k coeff_k with sign word_k`, the
//! coefficient being a dense tensor over the compound one-particle index.
//! Products concatenate sign words and tensor coefficients; the star
//! operation reverses and conjugates. Normal ordering rewrites every
//! annihilator-before-creator inversion with the index-permutation kernel
//! plus a delta contraction; anti-normal ordering runs the rewrite the other
//! way using the inverse kernel and its own trace constant. The scalar part
//! of the normal form is the vacuum expectation, giving a route to the
//! moment values that never touches the Fock representation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exchange::{ExchangeKernel, KernelTable};
use crate::fock::OpSign;
use crate::linalg::{QMatrix, C64, ZERO};
use crate::model::{DiscreteModel, SitePoint, SlotLayout};
use crate::rng::SeededRng;
use crate::tensor::Tensor;
use crate::ZERO_PRUNE;

/// One summand: a sign word and its coefficient tensor (rank = word length).
#[derive(Clone, Debug)]
pub struct WickTerm {
    pub signs: Vec<OpSign>,
    pub coeff: Tensor,
}

/// Symbolic element: scalar plus sign-word terms, kept merged and pruned.
#[derive(Clone, Debug)]
pub struct FormalSum {
    pub scalar: C64,
    terms: Vec<WickTerm>,
}

impl FormalSum {
    pub fn scalar_element(c: C64) -> Self {
        FormalSum {
            scalar: c,
            terms: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::scalar_element(C64::new(1.0, 0.0))
    }

    pub fn terms(&self) -> &[WickTerm] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// All sign words normal (creators before annihilators)?
    pub fn is_normal(&self) -> bool {
        self.terms
            .iter()
            .all(|t| inversion_positions(&t.signs, OpSign::Annihilate).is_empty())
    }

    fn push_merged(&mut self, term: WickTerm) {
        if term.coeff.sup_norm() <= ZERO_PRUNE {
            return;
        }
        if term.signs.is_empty() {
            self.scalar += term.coeff.data()[0];
            return;
        }
        if let Some(existing) = self.terms.iter_mut().find(|t| t.signs == term.signs) {
            existing.coeff.add_scaled(&term.coeff, C64::new(1.0, 0.0));
            return;
        }
        self.terms.push(term);
    }

    fn normalize(&mut self) {
        self.terms.retain(|t| t.coeff.sup_norm() > ZERO_PRUNE);
        self.terms.sort_by(|a, b| {
            a.signs
                .len()
                .cmp(&b.signs.len())
                .then_with(|| sign_key(&a.signs).cmp(&sign_key(&b.signs)))
        });
    }

    /// Entrywise distance between two sums (a word missing on one side
    /// counts with its full magnitude).
    pub fn sup_distance(&self, other: &FormalSum) -> f64 {
        let mut worst = (self.scalar - other.scalar).norm();
        for t in &self.terms {
            match other.terms.iter().find(|o| o.signs == t.signs) {
                Some(o) => worst = worst.max(t.coeff.sup_distance(&o.coeff)),
                None => worst = worst.max(t.coeff.sup_norm()),
            }
        }
        for o in &other.terms {
            if !self.terms.iter().any(|t| t.signs == o.signs) {
                worst = worst.max(o.coeff.sup_norm());
            }
        }
        worst
    }
}

fn sign_key(signs: &[OpSign]) -> Vec<u8> {
    signs
        .iter()
        .map(|s| match s {
            OpSign::Create => 0u8,
            OpSign::Annihilate => 1u8,
        })
        .collect()
}

/// Positions `i` with `signs[i] == first` followed by the opposite sign.
fn inversion_positions(signs: &[OpSign], first: OpSign) -> Vec<usize> {
    let second = match first {
        OpSign::Annihilate => OpSign::Create,
        OpSign::Create => OpSign::Annihilate,
    };
    (0..signs.len().saturating_sub(1))
        .filter(|&i| signs[i] == first && signs[i + 1] == second)
        .collect()
}

/// Which inversion to rewrite next.
#[derive(Clone, Copy, Debug)]
pub enum RewriteStrategy {
    Leftmost,
    Seeded(u64),
}

/// Rewriting context: kernel matrices over the model sites plus the slot
/// layout used by exchange and contraction steps.
pub struct WickAlgebra {
    pub layout: SlotLayout,
    table: KernelTable,
    kernel: ExchangeKernel,
    points: Vec<SitePoint>,
    budget: usize,
}

impl WickAlgebra {
    pub fn new(kernel: &ExchangeKernel, model: &DiscreteModel) -> Result<Self> {
        if kernel.components() != model.components {
            return Err(Error::Dimension(format!(
                "kernel has {} components, model has {}",
                kernel.components(),
                model.components
            )));
        }
        let points = model.site_points();
        let table = KernelTable::new(kernel, &points)?;
        Ok(WickAlgebra {
            layout: SlotLayout {
                sites: points.len(),
                components: model.components,
                internal: model.internal_dim,
            },
            table,
            kernel: kernel.clone(),
            points,
            budget: model.entry_budget,
        })
    }

    pub fn one_particle_dim(&self) -> usize {
        self.layout.dim()
    }

    /// Single generator with one sign.
    pub fn generator(&self, sign: OpSign, f: &[C64]) -> FormalSum {
        assert_eq!(f.len(), self.layout.dim());
        FormalSum {
            scalar: ZERO,
            terms: vec![WickTerm {
                signs: vec![sign],
                coeff: Tensor::from_vec(self.layout.dim(), 1, f.to_vec()),
            }],
        }
    }

    /// General element from a coefficient tensor and a sign word.
    pub fn element(&self, coeff: Tensor, signs: Vec<OpSign>) -> FormalSum {
        assert_eq!(coeff.rank(), signs.len());
        let mut out = FormalSum::scalar_element(ZERO);
        out.push_merged(WickTerm { signs, coeff });
        out.normalize();
        out
    }

    /// Bilinear product: signature concatenation and coefficient outer
    /// products.
    pub fn product(&self, a: &FormalSum, b: &FormalSum) -> Result<FormalSum> {
        let d = self.layout.dim();
        let mut out = FormalSum::scalar_element(a.scalar * b.scalar);
        for t in &b.terms {
            let mut coeff = t.coeff.clone();
            coeff.scale_in_place(a.scalar);
            out.push_merged(WickTerm {
                signs: t.signs.clone(),
                coeff,
            });
        }
        for s in &a.terms {
            let mut coeff = s.coeff.clone();
            coeff.scale_in_place(b.scalar);
            out.push_merged(WickTerm {
                signs: s.signs.clone(),
                coeff,
            });
        }
        for s in &a.terms {
            for t in &b.terms {
                Tensor::try_zeros(d, s.signs.len() + t.signs.len(), self.budget)?;
                let mut signs = s.signs.clone();
                signs.extend_from_slice(&t.signs);
                out.push_merged(WickTerm {
                    signs,
                    coeff: s.coeff.outer(&t.coeff),
                });
            }
        }
        out.normalize();
        Ok(out)
    }

    /// The star operation: reversed, sign-flipped words with reversed and
    /// conjugated coefficients; the scalar conjugates.
    pub fn star(&self, a: &FormalSum) -> FormalSum {
        let mut out = FormalSum::scalar_element(a.scalar.conj());
        for t in &a.terms {
            let signs: Vec<OpSign> = t
                .signs
                .iter()
                .rev()
                .map(|s| match s {
                    OpSign::Create => OpSign::Annihilate,
                    OpSign::Annihilate => OpSign::Create,
                })
                .collect();
            out.push_merged(WickTerm {
                signs,
                coeff: t.coeff.reverse_slots_conj(),
            });
        }
        out.normalize();
        out
    }

    /// Rewrite until every word has creators before annihilators, then
    /// project each coefficient onto its symmetry class (plain symmetrizer
    /// on the creator block, hat symmetrizer on the annihilator block).
    pub fn normal_order(&self, a: &FormalSum, strategy: RewriteStrategy) -> Result<FormalSum> {
        let rewritten = self.rewrite(a, strategy, Direction::Normal)?;
        let mut out = FormalSum::scalar_element(rewritten.scalar);
        for term in rewritten.terms {
            let m = term
                .signs
                .iter()
                .take_while(|s| **s == OpSign::Create)
                .count();
            let n = term.signs.len() - m;
            let sym = self.project_block(&term.coeff, 0, m, false);
            let sym = self.project_block(&sym, m, n, true);
            out.push_merged(WickTerm {
                signs: term.signs,
                coeff: sym,
            });
        }
        out.normalize();
        Ok(out)
    }

    /// Rewrite until every word has annihilators before creators, using the
    /// inverse kernel and subtracting its trace constant per contraction.
    pub fn anti_normal_order(&self, a: &FormalSum) -> Result<FormalSum> {
        let mut out = self.rewrite(a, RewriteStrategy::Leftmost, Direction::AntiNormal)?;
        out.normalize();
        Ok(out)
    }

    /// Scalar part of the normal form: the vacuum expectation computed
    /// entirely inside the symbolic algebra.
    pub fn symbolic_vacuum(&self, a: &FormalSum) -> Result<C64> {
        Ok(self
            .rewrite(a, RewriteStrategy::Leftmost, Direction::Normal)?
            .scalar)
    }

    /// The inverse-kernel trace constant used by anti-normal ordering,
    /// extracted from a basis evaluation.
    pub fn inverse_trace_constant(&self) -> Result<f64> {
        let (_, kappa) = self.table.tilde_inverses(self.kernel.components())?;
        Ok(kappa)
    }

    fn project_block(&self, t: &Tensor, start: usize, len: usize, hat: bool) -> Tensor {
        if len <= 1 {
            return t.clone();
        }
        let mats = if hat {
            &self.table.q_hat
        } else {
            &self.table.q
        };
        symmetrize_block(t, start, len, mats, &self.layout)
    }

    fn rewrite(
        &self,
        a: &FormalSum,
        strategy: RewriteStrategy,
        dir: Direction,
    ) -> Result<FormalSum> {
        let tilde_inv_data = match dir {
            Direction::Normal => None,
            Direction::AntiNormal => Some(self.table.tilde_inverses(self.kernel.components())?),
        };
        let first_sign = match dir {
            Direction::Normal => OpSign::Annihilate,
            Direction::AntiNormal => OpSign::Create,
        };
        let budget = step_budget(a);
        let mut rng = match strategy {
            RewriteStrategy::Leftmost => None,
            RewriteStrategy::Seeded(seed) => Some(SeededRng::new(seed)),
        };

        let mut out = FormalSum::scalar_element(a.scalar);
        let mut queue: Vec<WickTerm> = a.terms.clone();
        let mut steps = 0usize;
        while let Some(term) = queue.pop() {
            if term.coeff.sup_norm() <= ZERO_PRUNE {
                continue;
            }
            let inversions = inversion_positions(&term.signs, first_sign);
            if inversions.is_empty() {
                out.push_merged(term);
                continue;
            }
            steps += 1;
            if steps > budget {
                return Err(Error::StepBudget(budget));
            }
            let i = match rng.as_mut() {
                None => inversions[0],
                Some(r) => inversions[r.index(inversions.len())],
            };

            // exchanged term with the two signs swapped in place
            let mut swapped_signs = term.signs.clone();
            swapped_signs.swap(i, i + 1);
            let (exchanged, contraction_scale) = match dir {
                Direction::Normal => (
                    term.coeff
                        .exchange_adjacent(i, &self.table.q_tilde, &self.layout, true),
                    C64::new(1.0, 0.0),
                ),
                Direction::AntiNormal => {
                    let (inv, kappa) = tilde_inv_data.as_ref().expect("computed above");
                    (
                        term.coeff.exchange_adjacent(i, inv, &self.layout, false),
                        C64::new(-kappa, 0.0),
                    )
                }
            };
            queue.push(WickTerm {
                signs: swapped_signs,
                coeff: exchanged,
            });

            // delta contraction dropping the two positions
            let mut contracted = term.coeff.delta_trace_adjacent(i);
            contracted.scale_in_place(contraction_scale);
            if contracted.sup_norm() > ZERO_PRUNE {
                let mut signs = term.signs.clone();
                signs.drain(i..=i + 1);
                queue.push(WickTerm {
                    signs,
                    coeff: contracted,
                });
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Site points of the underlying model (handy for tests).
    pub fn site_points(&self) -> &[SitePoint] {
        &self.points
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Normal,
    AntiNormal,
}

/// Worst-case rewrite step budget for the termination assertion:
/// `len! * 2^len` summed over the terms.
fn step_budget(a: &FormalSum) -> usize {
    let mut budget = 64usize;
    for t in &a.terms {
        let len = t.signs.len();
        let fact: usize = (1..=len).product();
        budget = budget.saturating_add(fact.saturating_mul(1usize << len));
    }
    budget
}

/// Symmetrize slots `[start, start+len)` of a tensor by the coset chain
/// (one exchange per additional term).
fn symmetrize_block(
    t: &Tensor,
    start: usize,
    len: usize,
    mats: &[QMatrix],
    layout: &SlotLayout,
) -> Tensor {
    if len <= 1 {
        return t.clone();
    }
    let inner = symmetrize_block(t, start, len - 1, mats, layout);
    let mut acc = inner.clone();
    let mut w = inner;
    for j in (0..len - 1).rev() {
        w = w.exchange_adjacent(start + j, mats, layout, false);
        acc.add_scaled(&w, C64::new(1.0, 0.0));
    }
    acc.scale_in_place(Complex64::new(1.0 / len as f64, 0.0));
    acc
}
