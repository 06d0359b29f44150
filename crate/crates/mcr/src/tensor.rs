//! Dense complex tensors with a uniform slot dimension.
//!
//! Level-`n` Fock coefficients live in `(m*r*s)^n`, pair-partition weights in
//! `r^(2n)`; both are small enough at desk scale that a flat row-major buffer
//! with explicit strides beats any clever index scheme. Slot 0 is the most
//! significant index.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{QMatrix, C64, ZERO};
use crate::model::SlotLayout;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    slot_dim: usize,
    rank: usize,
    data: Vec<C64>,
}

impl Tensor {
    pub fn zeros(slot_dim: usize, rank: usize) -> Tensor {
        let len = slot_dim.pow(rank as u32);
        Tensor {
            slot_dim,
            rank,
            data: vec![ZERO; len],
        }
    }

    /// Allocation guarded by the model's entry budget.
    pub fn try_zeros(slot_dim: usize, rank: usize, budget: usize) -> Result<Tensor> {
        let needed = slot_dim.checked_pow(rank as u32).ok_or(Error::MemoryCap {
            needed: usize::MAX,
            budget,
        })?;
        if needed > budget {
            return Err(Error::MemoryCap { needed, budget });
        }
        Ok(Self::zeros(slot_dim, rank))
    }

    pub fn scalar(value: C64) -> Tensor {
        Tensor {
            slot_dim: 1,
            rank: 0,
            data: vec![value],
        }
    }

    pub fn from_vec(slot_dim: usize, rank: usize, data: Vec<C64>) -> Tensor {
        assert_eq!(data.len(), slot_dim.pow(rank as u32));
        Tensor {
            slot_dim,
            rank,
            data,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn slot_dim(&self) -> usize {
        self.slot_dim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn stride(&self, slot: usize) -> usize {
        self.slot_dim.pow((self.rank - 1 - slot) as u32)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.data[self.flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: C64) {
        let f = self.flatten(idx);
        self.data[f] = v;
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank);
        let mut f = 0;
        for &i in idx {
            debug_assert!(i < self.slot_dim);
            f = f * self.slot_dim + i;
        }
        f
    }

    pub fn scale_in_place(&mut self, c: C64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn add_scaled(&mut self, other: &Tensor, c: C64) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Tensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Hilbert-space inner product, linear in `self`, conjugating `other`.
    pub fn inner(&self, other: &Tensor) -> C64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Tensor product with concatenated slots.
    pub fn outer(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.slot_dim, other.slot_dim);
        let mut out = Tensor::zeros(self.slot_dim, self.rank + other.rank);
        let blk = other.data.len();
        for (i, a) in self.data.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let base = i * blk;
            for (j, b) in other.data.iter().enumerate() {
                out.data[base + j] = a * b;
            }
        }
        out
    }

    /// `out[a, rest] = v[a] * self[rest]`.
    pub fn prepend(&self, v: &[C64]) -> Tensor {
        assert_eq!(v.len(), self.slot_dim);
        let mut out = Tensor::zeros(self.slot_dim, self.rank + 1);
        let blk = self.data.len();
        for (a, &va) in v.iter().enumerate() {
            if va == ZERO {
                continue;
            }
            for (j, b) in self.data.iter().enumerate() {
                out.data[a * blk + j] = va * b;
            }
        }
        out
    }

    /// `out[rest] = sum_a self[a, rest] * v[a]` (bilinear, no conjugation).
    pub fn contract_slot0(&self, v: &[C64]) -> Tensor {
        assert!(self.rank >= 1);
        assert_eq!(v.len(), self.slot_dim);
        let blk = self.data.len() / self.slot_dim;
        let mut out = Tensor::zeros(self.slot_dim, self.rank - 1);
        for (a, &va) in v.iter().enumerate() {
            if va == ZERO {
                continue;
            }
            let base = a * blk;
            for j in 0..blk {
                out.data[j] += va * self.data[base + j];
            }
        }
        out
    }

    /// Adjacent-slot exchange with a site-dependent matrix:
    ///
    /// `out[.., A=(t,c,z), B=(t',c',z'), ..] =
    ///     sum_{d,d'} M(t,t')[(c,c'),(d,d')] * self[.., (t',d,z'), (t,d',z), ..]`
    ///
    /// `mats` is the full `sites x sites` table, indexed `t * sites + t'`
    /// (or `t' * sites + t` when `reversed_args` is set, which is how the
    /// mixed commutation rule evaluates its kernel).
    pub fn exchange_adjacent(
        &self,
        slot: usize,
        mats: &[QMatrix],
        layout: &SlotLayout,
        reversed_args: bool,
    ) -> Tensor {
        assert!(slot + 1 < self.rank);
        assert_eq!(self.slot_dim, layout.dim());
        let d = self.slot_dim;
        let r = layout.components;
        let post = self.stride(slot + 1);
        let pre = self.data.len() / (post * d * d);
        let mut out = Tensor::zeros(d, self.rank);

        for a in 0..d {
            let (ta, ca, za) = layout.decode(a);
            for b in 0..d {
                let (tb, cb, zb) = layout.decode(b);
                let m = if reversed_args {
                    &mats[tb * layout.sites + ta]
                } else {
                    &mats[ta * layout.sites + tb]
                };
                match m {
                    QMatrix::Monomial { inv, phase, .. } => {
                        let row = ca * r + cb;
                        let col = inv[row];
                        let (dd, dp) = (col / r, col % r);
                        let u = layout.encode(tb, dd, zb);
                        let v = layout.encode(ta, dp, za);
                        let ph = phase[col];
                        for p in 0..pre {
                            let ob = ((p * d + a) * d + b) * post;
                            let ib = ((p * d + u) * d + v) * post;
                            for q in 0..post {
                                out.data[ob + q] = ph * self.data[ib + q];
                            }
                        }
                    }
                    QMatrix::Dense(mm) => {
                        let row = ca * r + cb;
                        for dd in 0..r {
                            for dp in 0..r {
                                let coef = mm[(row, dd * r + dp)];
                                if coef == ZERO {
                                    continue;
                                }
                                let u = layout.encode(tb, dd, zb);
                                let v = layout.encode(ta, dp, za);
                                for p in 0..pre {
                                    let ob = ((p * d + a) * d + b) * post;
                                    let ib = ((p * d + u) * d + v) * post;
                                    for q in 0..post {
                                        out.data[ob + q] += coef * self.data[ib + q];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Two-slot matrix action (no argument exchange): treats slots `(i, j)`
    /// of a pure component tensor as the two factors of `V ⊗ V` and applies
    /// `m` as a linear operator. Used for the pair-partition products.
    pub fn apply_two_slot(&self, i: usize, j: usize, m: &QMatrix) -> Tensor {
        assert!(i < j && j < self.rank);
        let d = self.slot_dim;
        assert_eq!(m.dim(), d * d);
        let si = self.stride(i);
        let sj = self.stride(j);
        let mut out = Tensor::zeros(d, self.rank);
        let len = self.data.len();
        match m {
            QMatrix::Monomial { inv, phase, .. } => {
                for flat in 0..len {
                    let ui = (flat / si) % d;
                    let uj = (flat / sj) % d;
                    let row = ui * d + uj;
                    let col = inv[row];
                    let (vi, vj) = (col / d, col % d);
                    let src = flat - ui * si - uj * sj + vi * si + vj * sj;
                    out.data[flat] = phase[col] * self.data[src];
                }
            }
            QMatrix::Dense(mm) => {
                for flat in 0..len {
                    let ui = (flat / si) % d;
                    let uj = (flat / sj) % d;
                    let base = flat - ui * si - uj * sj;
                    let row = ui * d + uj;
                    let mut acc = ZERO;
                    for vi in 0..d {
                        for vj in 0..d {
                            let coef = mm[(row, vi * d + vj)];
                            if coef == ZERO {
                                continue;
                            }
                            acc += coef * self.data[base + vi * si + vj * sj];
                        }
                    }
                    out.data[flat] = acc;
                }
            }
        }
        out
    }

    /// Bilinear contraction of slots `i` and `j` (`i < j`) against each
    /// other: `out[rest] = sum_c self[.., c at i, .., c at j, ..]`.
    pub fn contract_slot_pair(&self, i: usize, j: usize) -> Tensor {
        assert!(i < j && j < self.rank);
        let d = self.slot_dim;
        let mut out = Tensor::zeros(d, self.rank - 2);
        // Enumerate source indices with equal values at slots i and j and
        // map them to the index with those slots removed.
        let mut idx = vec![0usize; self.rank];
        for (flat, v) in self.data.iter().enumerate() {
            let mut f = flat;
            for k in (0..self.rank).rev() {
                idx[k] = f % d;
                f /= d;
            }
            if idx[i] != idx[j] {
                continue;
            }
            let mut of = 0;
            for (k, &val) in idx.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                of = of * d + val;
            }
            if self.rank == 2 {
                out.data[0] += v;
            } else {
                out.data[of] += v;
            }
        }
        out
    }

    /// Reversed partial contraction used by the normal-ordered operator
    /// action: contracts the last `n` slots of `self` against the first `n`
    /// slots of `other` in reversed order,
    ///
    /// `out[b.., rest..] = sum_{a_1..a_n} self[b.., a_1..a_n] * other[a_n..a_1, rest..]`.
    pub fn contract_tail_reversed(&self, other: &Tensor, n: usize) -> Tensor {
        assert!(n <= self.rank && n <= other.rank);
        assert_eq!(self.slot_dim, other.slot_dim);
        let d = self.slot_dim;
        let lead = self.rank - n;
        let tail = other.rank - n;
        let n_inner = d.pow(n as u32);
        let self_blk = n_inner;
        let other_blk = d.pow(tail as u32);
        let mut out = Tensor::zeros(d, lead + tail);
        let lead_count = d.pow(lead as u32);
        for lb in 0..lead_count {
            for a in 0..n_inner {
                let coeff = self.data[lb * self_blk + a];
                if coeff == ZERO {
                    continue;
                }
                // reverse the n-slot multi-index a
                let mut rev = 0usize;
                let mut tmp = a;
                for _ in 0..n {
                    rev = rev * d + tmp % d;
                    tmp /= d;
                }
                let ob = lb * other_blk;
                let src = rev * other_blk;
                for t in 0..other_blk {
                    out.data[ob + t] += coeff * other.data[src + t];
                }
            }
        }
        out
    }

    /// `out[a_1..a_n] = conj(self[a_n..a_1])` — slot reversal plus entrywise
    /// conjugation (the `*`-operation on coefficient tensors).
    pub fn reverse_slots_conj(&self) -> Tensor {
        let d = self.slot_dim;
        if self.rank == 0 {
            return Tensor::from_vec(d, 0, vec![self.data[0].conj()]);
        }
        let mut out = Tensor::zeros(d, self.rank);
        for (flat, v) in self.data.iter().enumerate() {
            let mut rev = 0usize;
            let mut tmp = flat;
            for _ in 0..self.rank {
                rev = rev * d + tmp % d;
                tmp /= d;
            }
            out.data[rev] = v.conj();
        }
        out
    }

    /// Entrywise complex conjugation.
    pub fn conj(&self) -> Tensor {
        Tensor {
            slot_dim: self.slot_dim,
            rank: self.rank,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Sum over adjacent slots `(i, i+1)` carrying the same compound index
    /// (same site, component, and internal coordinate) — the discrete form
    /// of the delta contraction `sum_x Tr_i f(.., x, x, ..)`.
    pub fn delta_trace_adjacent(&self, i: usize) -> Tensor {
        assert!(i + 1 < self.rank);
        let d = self.slot_dim;
        let post = self.stride(i + 1);
        let pre = self.data.len() / (post * d * d);
        let mut out = Tensor::zeros(d, self.rank - 2);
        for p in 0..pre {
            for a in 0..d {
                let ib = ((p * d + a) * d + a) * post;
                let ob = p * post;
                for q in 0..post {
                    out.data[ob + q] += self.data[ib + q];
                }
            }
        }
        out
    }
}

impl From<Complex64> for Tensor {
    fn from(v: Complex64) -> Self {
        Tensor::scalar(v)
    }
}
