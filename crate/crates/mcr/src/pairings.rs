//! Pair partitions and the closed-form moment sums.
//!
//! A word of `2n` field operators pairs up into `(2n-1)!!` two-point
//! partitions. Each partition, once put into canonical order (pairs sorted
//! by strictly descending left endpoint), determines
//!
//! - nested index sets `J^(k)` and `bold J^(k)` controlling which exchange
//!   factors appear,
//! - an exchange operator `Q(xi; x) = Q^(n) ... Q^(1)` on `V^{⊗2n}` built
//!   from two-slot factors, and
//! - a bilinear trace pairing the left endpoint of each pair with the first
//!   element of its `bold J` set (a non-crossing matching).
//!
//! The vacuum moment of the word is the sum over partitions and over one
//! free site per pair of the trace applied to the exchanged coefficient
//! tensor. This module evaluates those sums directly so the Fock-space
//! machinery can be checked against them.

use crate::error::{Error, Result};
use crate::exchange::ExchangeKernel;
use crate::exec;
use crate::fock::{next_permutation, FockSpace, OpSign};
use crate::linalg::{C64, ZERO};
use crate::model::{DiscreteModel, SitePoint};
use crate::tensor::Tensor;

/// Desk-scale cap on the word length for partition enumeration.
pub const MAX_PAIRING_LEN: usize = 12;

/// A partition of `{0, .., 2n-1}` into `n` two-point sets, canonicalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairPartition {
    /// `(left, right)` with `left < right`, sorted by descending `left`;
    /// the last pair has `left == 0`.
    pairs: Vec<(usize, usize)>,
    /// `J^(k)`, ascending.
    j_sets: Vec<Vec<usize>>,
    /// `bold J^(k)`, ascending.
    bold_j_sets: Vec<Vec<usize>>,
}

impl PairPartition {
    /// Canonicalize and derive the index sets. The input must partition
    /// `{0, .., 2n-1}` exactly.
    pub fn new(raw: &[(usize, usize)]) -> Result<Self> {
        let n = raw.len();
        let len = 2 * n;
        let mut seen = vec![false; len];
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n);
        for &(a, b) in raw {
            if a == b || a >= len || b >= len {
                return Err(Error::Dimension(format!("bad pair ({a}, {b})")));
            }
            if seen[a] || seen[b] {
                return Err(Error::Dimension(format!(
                    "position reused in pair ({a}, {b})"
                )));
            }
            seen[a] = true;
            seen[b] = true;
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_by_key(|p| std::cmp::Reverse(p.0));

        let rights: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let mut j_sets = Vec::with_capacity(n);
        let mut bold_j_sets = Vec::with_capacity(n);
        let mut bold_minima: Vec<usize> = Vec::new();
        for k in 0..n {
            let (left, right) = pairs[k];
            let mut j: Vec<usize> = rights
                .iter()
                .copied()
                .filter(|&p| p > left && p <= right && !rights[..k].contains(&p))
                .collect();
            j.sort_unstable();
            let mut bold: Vec<usize> = rights
                .iter()
                .copied()
                .filter(|&p| p > left && !bold_minima.contains(&p))
                .collect();
            bold.sort_unstable();
            bold_minima.push(bold[0]);
            j_sets.push(j);
            bold_j_sets.push(bold);
        }
        Ok(PairPartition {
            pairs,
            j_sets,
            bold_j_sets,
        })
    }

    /// Number of pairs `n`.
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    /// Word length `2n`.
    pub fn len(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Left endpoints (the annihilator positions in a field word).
    pub fn left_positions(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn j_set(&self, k: usize) -> &[usize] {
        &self.j_sets[k]
    }

    pub fn bold_j_set(&self, k: usize) -> &[usize] {
        &self.bold_j_sets[k]
    }

    /// The non-crossing shadow: each left endpoint repaired with the
    /// minimum of its `bold J` set.
    pub fn shadow(&self) -> PairPartition {
        let pairs: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .enumerate()
            .map(|(k, &(left, _))| (left, self.bold_j_sets[k][0]))
            .collect();
        PairPartition::new(&pairs).expect("shadow is a valid partition")
    }

    /// Number of crossings: pairs `{i,j}`, `{k,l}` with `i < k < j < l`.
    pub fn crossings(&self) -> usize {
        let mut count = 0;
        for (a, &(i, j)) in self.pairs.iter().enumerate() {
            for &(k, l) in &self.pairs[a + 1..] {
                let (i, j, k, l) = if i < k { (i, j, k, l) } else { (k, l, i, j) };
                if i < k && k < j && j < l {
                    count += 1;
                }
            }
        }
        count
    }

    /// Trace pairs `(left_k, min bold J^(k))` of the contraction functional.
    pub fn trace_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .enumerate()
            .map(|(k, &(left, _))| (left, self.bold_j_sets[k][0]))
            .collect()
    }
}

/// `(len-1)!!` as usize.
pub fn double_factorial_odd(len: usize) -> usize {
    if len == 0 {
        return 1;
    }
    let mut acc = 1usize;
    let mut k = len - 1;
    loop {
        acc *= k;
        if k <= 2 {
            break;
        }
        k -= 2;
    }
    acc
}

/// All partitions of `{0, .., len-1}` into two-point sets, in deterministic
/// order: the smallest unpaired position pairs with each larger position in
/// ascending order.
pub fn enumerate_pair_partitions(len: usize) -> Result<Vec<PairPartition>> {
    if !len.is_multiple_of(2) {
        return Err(Error::Dimension(format!("word length {len} is odd")));
    }
    if len > MAX_PAIRING_LEN {
        return Err(Error::MemoryCap {
            needed: len,
            budget: MAX_PAIRING_LEN,
        });
    }
    fn recurse(
        used: &mut Vec<bool>,
        stack: &mut Vec<(usize, usize)>,
        out: &mut Vec<PairPartition>,
    ) {
        let first = match used.iter().position(|u| !u) {
            None => {
                out.push(PairPartition::new(stack).expect("enumeration emits valid partitions"));
                return;
            }
            Some(f) => f,
        };
        used[first] = true;
        for partner in first + 1..used.len() {
            if used[partner] {
                continue;
            }
            used[partner] = true;
            stack.push((first, partner));
            recurse(used, stack, out);
            stack.pop();
            used[partner] = false;
        }
        used[first] = false;
    }
    let mut out = Vec::with_capacity(double_factorial_odd(len));
    let mut used = vec![false; len];
    let mut stack: Vec<(usize, usize)> = Vec::with_capacity(len / 2);
    recurse(&mut used, &mut stack, &mut out);
    Ok(out)
}

/// Apply the partition exchange operator `Q(xi; x)` to a tensor in
/// `V^{⊗2n}`. `pos_points` assigns a site point to every word position
/// (paired positions share theirs).
pub fn apply_partition_exchange(
    kernel: &ExchangeKernel,
    xi: &PairPartition,
    pos_points: &[SitePoint],
    v: &Tensor,
) -> Result<Tensor> {
    assert_eq!(pos_points.len(), xi.len());
    assert_eq!(v.rank(), xi.len());
    let mut cur = v.clone();
    for k in 0..xi.size() {
        let j = &xi.j_sets[k];
        let bold = &xi.bold_j_sets[k];
        let lk = j.len();
        if lk <= 1 {
            continue;
        }
        let left = xi.pairs[k].0;
        // factors are multiplied left to right, so apply right to left
        for t in (0..lk - 1).rev() {
            let m = kernel.eval_at(pos_points[left], pos_points[j[t]])?;
            cur = cur.apply_two_slot(bold[t], bold[t + 1], &m);
        }
    }
    Ok(cur)
}

/// The bilinear trace functional of a partition: contract slot pairs
/// `(left_k, min bold J^(k))` with `sum_c u^c v^c` and return the scalar.
pub fn partition_trace(xi: &PairPartition, v: &Tensor) -> C64 {
    contract_matching(&xi.trace_pairs(), v)
}

/// Nested trace pairing slot `i` with slot `2n-1-i` (the non-partition form
/// used by the annihilator/creator corollary).
pub fn nested_trace(v: &Tensor) -> C64 {
    let n2 = v.rank();
    let pairs: Vec<(usize, usize)> = (0..n2 / 2).map(|i| (i, n2 - 1 - i)).collect();
    contract_matching(&pairs, v)
}

fn contract_matching(pairs: &[(usize, usize)], v: &Tensor) -> C64 {
    let r = v.slot_dim();
    let n = pairs.len();
    let n2 = v.rank();
    assert_eq!(2 * n, n2);
    let mut idx = vec![0usize; n2];
    let mut acc = ZERO;
    let total = r.pow(n as u32);
    for mut code in 0..total {
        for &(a, b) in pairs {
            let c = code % r;
            code /= r;
            idx[a] = c;
            idx[b] = c;
        }
        acc += v.get(&idx);
    }
    acc
}

/// Outer product of component slices, filled directly.
fn product_tensor(slices: &[Vec<C64>], r: usize) -> Tensor {
    let len = slices.len();
    let total = r.pow(len as u32);
    let mut data = vec![ZERO; total];
    for (flat, slot) in data.iter_mut().enumerate() {
        let mut prod = C64::new(1.0, 0.0);
        let mut rem = flat;
        for k in (0..len).rev() {
            prod *= slices[k][rem % r];
            rem /= r;
        }
        *slot = prod;
    }
    Tensor::from_vec(r, len, data)
}

/// Evaluate a one-particle vector at a fixed X-point `(site, z)`, returning
/// the component vector in `V`.
fn component_slice(f: &[C64], t: usize, z: usize, r: usize, s: usize) -> Vec<C64> {
    (0..r).map(|c| f[(t * r + c) * s + z]).collect()
}

/// Moment of a product of field-type sums `(a^+(f_k) + a^-(f'_k))` in the
/// vacuum state, computed by the closed pair-partition formula: odd lengths
/// vanish; even lengths sum `T(xi) Q(xi; x) h_1(x_1) ⊗ .. ⊗ h_{2n}(x_{2n})`
/// over all partitions and one free X-point per pair, where `h_k` is the
/// annihilator argument on left endpoints and the creator argument on right
/// endpoints.
pub fn field_moment(
    kernel: &ExchangeKernel,
    model: &DiscreteModel,
    terms: &[(Vec<C64>, Vec<C64>)],
) -> Result<C64> {
    let len = terms.len();
    if len % 2 == 1 {
        return Ok(ZERO);
    }
    if len == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let partitions = enumerate_pair_partitions(len)?;
    let r = kernel.components();
    let s = model.internal_dim;
    let points = model.site_points();
    let n_x = points.len() * s;
    let n = len / 2;

    let per_partition = exec::map_vec(partitions, |xi| -> Result<C64> {
        let lefts = xi.left_positions();
        let mut is_left = vec![false; len];
        for &l in &lefts {
            is_left[l] = true;
        }
        let mut acc = ZERO;
        let total = n_x.pow(n as u32);
        let mut pos_points = vec![SitePoint::base(0.0); len];
        let mut pos_x = vec![(0usize, 0usize); len];
        for mut code in 0..total {
            for &(a, b) in xi.pairs() {
                let x = code % n_x;
                code /= n_x;
                let (t, z) = (x / s, x % s);
                pos_points[a] = points[t];
                pos_points[b] = points[t];
                pos_x[a] = (t, z);
                pos_x[b] = (t, z);
            }
            // component tensor h_1(x_1) ⊗ ... ⊗ h_{2n}(x_{2n})
            let slices: Vec<Vec<C64>> = (0..len)
                .map(|k| {
                    let (t, z) = pos_x[k];
                    let h = if is_left[k] { &terms[k].1 } else { &terms[k].0 };
                    component_slice(h, t, z, r, s)
                })
                .collect();
            let v = product_tensor(&slices, r);
            let w = apply_partition_exchange(kernel, &xi, &pos_points, &v)?;
            acc += partition_trace(&xi, &w);
        }
        Ok(acc)
    });

    let mut total = ZERO;
    for item in per_partition {
        total += item?;
    }
    Ok(total)
}

/// General pair-partition sum over `Y`-sites with factored per-pair weights:
///
/// `sum_xi prod_pairs weight(i, j) * sum_sites T(xi) Q(xi; y) phi_1(y_1) ⊗ ..`
///
/// `phis` are `(site, component)` vectors (length `m * r`); the weight
/// carries whatever the transverse factors contribute for pair `{i, j}`
/// (`i < j`). Used by the strongly quasi-free moment identity.
pub fn partition_moment_sum(
    kernel: &ExchangeKernel,
    model: &DiscreteModel,
    phis: &[Vec<C64>],
    weight: &dyn Fn(usize, usize) -> C64,
) -> Result<C64> {
    let len = phis.len();
    if len % 2 == 1 {
        return Ok(ZERO);
    }
    if len == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let partitions = enumerate_pair_partitions(len)?;
    let mut total = ZERO;
    for xi in partitions {
        let w: C64 = xi.pairs().iter().map(|&(a, b)| weight(a, b)).product();
        if w == ZERO {
            continue;
        }
        total += w * site_sum(kernel, model, phis, &xi)?;
    }
    Ok(total)
}

/// Corollary form of the mixed-moment sum: partitions restricted to those
/// matching positions `0..n` to positions `n..2n` (one permutation each),
/// with the adjacent-slot exchange product written out by the corollary and
/// the nested trace. Weights are factored per pair as above.
pub fn matched_pair_sum(
    kernel: &ExchangeKernel,
    model: &DiscreteModel,
    phis: &[Vec<C64>],
    weight: &dyn Fn(usize, usize) -> C64,
) -> Result<C64> {
    let len = phis.len();
    if len % 2 == 1 || len == 0 {
        return Ok(ZERO);
    }
    let n = len / 2;
    let r = kernel.components();
    let m = model.sites.len();
    let points = model.site_points();
    if len > MAX_PAIRING_LEN {
        return Err(Error::MemoryCap {
            needed: len,
            budget: MAX_PAIRING_LEN,
        });
    }

    let mut total = ZERO;
    let mut sigma: Vec<usize> = (0..n).collect();
    loop {
        // left position k pairs with right position n + sigma[k]
        let partner: Vec<usize> = (0..n).map(|k| n + sigma[k]).collect();
        let w: C64 = (0..n).map(|k| weight(k, partner[k])).product();
        if w != ZERO {
            // sum over one free site per pair
            let mut acc = ZERO;
            let total_sites = m.pow(n as u32);
            let mut pos_site = vec![0usize; len];
            for mut code in 0..total_sites {
                for k in 0..n {
                    let t = code % m;
                    code /= m;
                    pos_site[k] = t;
                    pos_site[partner[k]] = t;
                }
                let slices: Vec<Vec<C64>> = phis
                    .iter()
                    .enumerate()
                    .map(|(k, phi)| (0..r).map(|c| phi[pos_site[k] * r + c]).collect())
                    .collect();
                let v = product_tensor(&slices, r);
                // corollary exchange product: for 1-based k, the left
                // position is n-k; its J set collects unconsumed partners
                // not exceeding its own, and factor t acts on adjacent
                // slots (n+k+t-2, n+k+t-1).
                let mut cur = v;
                for k1 in 1..=n {
                    let left = n - k1;
                    let own = partner[left];
                    let prev: Vec<usize> = (0..k1 - 1).map(|a| partner[n - 1 - a]).collect();
                    let mut jset: Vec<usize> = partner
                        .iter()
                        .copied()
                        .filter(|&p| p <= own && !prev.contains(&p))
                        .collect();
                    jset.sort_unstable();
                    let lk = jset.len();
                    for t in (1..lk).rev() {
                        let mat = kernel
                            .eval_at(points[pos_site[left]], points[pos_site[jset[t - 1]]])?;
                        let slot = n + k1 + t - 2;
                        cur = cur.apply_two_slot(slot, slot + 1, &mat);
                    }
                }
                acc += nested_trace(&cur);
            }
            total += w * acc;
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    Ok(total)
}

fn site_sum(
    kernel: &ExchangeKernel,
    model: &DiscreteModel,
    phis: &[Vec<C64>],
    xi: &PairPartition,
) -> Result<C64> {
    let len = phis.len();
    let n = len / 2;
    let r = kernel.components();
    let m = model.sites.len();
    let points = model.site_points();
    let mut acc = ZERO;
    let total = m.pow(n as u32);
    let mut pos_points = vec![SitePoint::base(0.0); len];
    let mut pos_site = vec![0usize; len];
    for mut code in 0..total {
        for &(a, b) in xi.pairs() {
            let t = code % m;
            code /= m;
            pos_points[a] = points[t];
            pos_points[b] = points[t];
            pos_site[a] = t;
            pos_site[b] = t;
        }
        let slices: Vec<Vec<C64>> = phis
            .iter()
            .enumerate()
            .map(|(k, phi)| (0..r).map(|c| phi[pos_site[k] * r + c]).collect())
            .collect();
        let v = product_tensor(&slices, r);
        let w = apply_partition_exchange(kernel, xi, &pos_points, &v)?;
        acc += partition_trace(xi, &w);
    }
    Ok(acc)
}

/// Fock-state mixed moment by the corollary formula:
/// `tau(a^-(phi_1 ⊗ g_1) .. a^-(phi_n ⊗ g_n) a^+(phi_{n+1} ⊗ g_{n+1}) ..)`
/// with the bilinear transverse pairing `sum_z g_i(z) g_j(z)` per matched
/// pair.
pub fn npoint_function(
    kernel: &ExchangeKernel,
    model: &DiscreteModel,
    annihilated: &[(Vec<C64>, Vec<C64>)],
    created: &[(Vec<C64>, Vec<C64>)],
) -> Result<C64> {
    if annihilated.len() != created.len() {
        return Err(Error::Dimension(
            "mixed moment needs equal annihilator and creator counts".into(),
        ));
    }
    let phis: Vec<Vec<C64>> = annihilated
        .iter()
        .chain(created.iter())
        .map(|(phi, _)| phi.clone())
        .collect();
    let gs: Vec<Vec<C64>> = annihilated
        .iter()
        .chain(created.iter())
        .map(|(_, g)| g.clone())
        .collect();
    let weight =
        move |i: usize, j: usize| -> C64 { gs[i].iter().zip(&gs[j]).map(|(a, b)| a * b).sum() };
    matched_pair_sum(kernel, model, &phis, &weight)
}

/// Build the full one-particle vector `phi ⊗ g` from a `(site, component)`
/// vector and a transverse vector.
pub fn product_vector(phi: &[C64], g: &[C64], model: &DiscreteModel) -> Vec<C64> {
    let r = model.components;
    let s = model.internal_dim;
    let m = model.sites.len();
    assert_eq!(phi.len(), m * r);
    assert_eq!(g.len(), s);
    let mut out = vec![ZERO; m * r * s];
    for t in 0..m {
        for c in 0..r {
            for z in 0..s {
                out[(t * r + c) * s + z] = phi[t * r + c] * g[z];
            }
        }
    }
    out
}

/// Mixed-word oracle `tau(a^- .. a^- a^+ .. a^+)` via the representation.
pub fn npoint_oracle(
    space: &FockSpace,
    model: &DiscreteModel,
    annihilated: &[(Vec<C64>, Vec<C64>)],
    created: &[(Vec<C64>, Vec<C64>)],
) -> Result<C64> {
    let mut word: Vec<(OpSign, Vec<C64>)> = Vec::new();
    for (phi, g) in annihilated {
        word.push((OpSign::Annihilate, product_vector(phi, g, model)));
    }
    for (phi, g) in created {
        word.push((OpSign::Create, product_vector(phi, g, model)));
    }
    space.vacuum_expectation(&word)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(pairs: &[(usize, usize)]) -> PairPartition {
        PairPartition::new(pairs).unwrap()
    }

    #[test]
    fn enumeration_counts_match_double_factorial() {
        assert_eq!(enumerate_pair_partitions(2).unwrap().len(), 1);
        assert_eq!(enumerate_pair_partitions(4).unwrap().len(), 3);
        assert_eq!(enumerate_pair_partitions(6).unwrap().len(), 15);
        assert_eq!(enumerate_pair_partitions(8).unwrap().len(), 105);
        assert_eq!(enumerate_pair_partitions(10).unwrap().len(), 945);
        assert!(enumerate_pair_partitions(14).is_err());
        assert!(enumerate_pair_partitions(3).is_err());
    }

    #[test]
    fn four_point_partitions_in_order() {
        let parts = enumerate_pair_partitions(4).unwrap();
        let as_sets: Vec<Vec<(usize, usize)>> = parts
            .iter()
            .map(|p| {
                let mut v = p.pairs().to_vec();
                v.sort();
                v
            })
            .collect();
        assert_eq!(
            as_sets,
            vec![
                vec![(0, 1), (2, 3)],
                vec![(0, 2), (1, 3)],
                vec![(0, 3), (1, 2)],
            ]
        );
    }

    #[test]
    fn canonical_order_has_descending_lefts() {
        let xi = part(&[(0, 2), (1, 3)]);
        assert_eq!(xi.pairs(), &[(1, 3), (0, 2)]);
        assert_eq!(xi.pairs().last().unwrap().0, 0);
    }

    #[test]
    fn crossing_partition_shadow_frozen_case() {
        // positions 0..3; the crossing partition {{0,2},{1,3}}:
        // J^(1) = {2,3}, bold J^(1) = {2,3}; J^(2) = {2}, bold J^(2) = {3};
        // shadow = {{1,2},{0,3}} with zero crossings.
        let xi = part(&[(0, 2), (1, 3)]);
        assert_eq!(xi.j_set(0), &[2, 3]);
        assert_eq!(xi.bold_j_set(0), &[2, 3]);
        assert_eq!(xi.j_set(1), &[2]);
        assert_eq!(xi.bold_j_set(1), &[3]);
        assert_eq!(xi.crossings(), 1);
        let shadow = xi.shadow();
        let mut sp = shadow.pairs().to_vec();
        sp.sort();
        assert_eq!(sp, vec![(0, 3), (1, 2)]);
        assert_eq!(shadow.crossings(), 0);
    }

    #[test]
    fn noncrossing_partition_is_its_own_shadow() {
        let xi = part(&[(0, 3), (1, 2)]);
        assert_eq!(xi.shadow(), xi);
        let xi = part(&[(0, 1), (2, 3)]);
        assert_eq!(xi.shadow(), xi);
    }

    #[test]
    fn shadows_never_cross() {
        for len in [4usize, 6, 8] {
            for xi in enumerate_pair_partitions(len).unwrap() {
                assert_eq!(xi.shadow().crossings(), 0, "partition {:?}", xi.pairs());
            }
        }
    }

    #[test]
    fn trace_contracts_matched_slots() {
        // 2n = 2: v = u ⊗ w -> bilinear dot
        let u = Tensor::from_vec(2, 1, vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0)]);
        let w = Tensor::from_vec(2, 1, vec![C64::new(0.5, 0.0), C64::new(0.0, 3.0)]);
        let xi = part(&[(0, 1)]);
        let got = partition_trace(&xi, &u.outer(&w));
        let expect =
            C64::new(1.0, 1.0) * C64::new(0.5, 0.0) + C64::new(2.0, 0.0) * C64::new(0.0, 3.0);
        assert!((got - expect).norm() < 1e-15);
    }

    #[test]
    fn trace_uses_shadow_pairs_frozen_case() {
        // xi = {{0,2},{1,3}} traces <v1, v2><v0, v3>
        let vs: Vec<Tensor> = (0..4)
            .map(|k| {
                Tensor::from_vec(
                    2,
                    1,
                    vec![
                        C64::new(1.0 + k as f64, 0.2),
                        C64::new(-0.5, 0.3 * k as f64),
                    ],
                )
            })
            .collect();
        let v = vs[0].outer(&vs[1]).outer(&vs[2]).outer(&vs[3]);
        let xi = part(&[(0, 2), (1, 3)]);
        let dot = |a: &Tensor, b: &Tensor| -> C64 {
            a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
        };
        let expect = dot(&vs[1], &vs[2]) * dot(&vs[0], &vs[3]);
        assert!((partition_trace(&xi, &v) - expect).norm() < 1e-14);
    }
}
