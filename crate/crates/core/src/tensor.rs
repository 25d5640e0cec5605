//! Dense coefficient tensors `A = (a_i)_{i in [n]^d}` with values in `R^m`.
//!
//! Entries are stored row-major over the `d` index axes with the value axis
//! innermost, so entry `i = (i_1, .., i_d)` occupies
//! `values[flat(i) * m .. flat(i) * m + m]`. Axes are 0-based in code and
//! rendered 1-based in reports.

use crate::error::{dimension, invalid, Result};
use crate::space::ValueSpace;

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTensor {
    order: usize,
    dim: usize,
    value_dim: usize,
    values: Vec<f64>,
    space: ValueSpace,
}

/// How a block of axes is fed during contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRole {
    /// A unit vector `x_{i_I}` on `R^{n^|I|}`.
    Deterministic,
    /// A jointly indexed Gaussian array `g_{i_J}`.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub axes: Vec<usize>,
    pub role: BlockRole,
}

/// Disjoint blocks of axes, each contracted against one array.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BlockAssignment {
    pub blocks: Vec<Block>,
}

impl BlockAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, axes: &[usize], role: BlockRole) -> Self {
        let mut axes = axes.to_vec();
        axes.sort_unstable();
        self.blocks.push(Block { axes, role });
        self
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        let mut seen = vec![false; order];
        for b in &self.blocks {
            if b.axes.is_empty() {
                return Err(invalid("empty block in assignment"));
            }
            for &a in &b.axes {
                if a >= order {
                    return Err(invalid(format!("axis {} outside [{}]", a + 1, order)));
                }
                if seen[a] {
                    return Err(invalid(format!("axis {} appears in two blocks", a + 1)));
                }
                seen[a] = true;
            }
        }
        Ok(())
    }

    /// Axes not covered by any block, ascending.
    pub fn free_axes(&self, order: usize) -> Vec<usize> {
        (0..order)
            .filter(|a| !self.blocks.iter().any(|b| b.axes.contains(a)))
            .collect()
    }
}

/// One array contracted against a set of axes. Axes of different factors may
/// overlap; the kernel simply multiplies their entries.
pub(crate) struct Factor<'a> {
    pub axes: &'a [usize],
    pub weights: &'a [f64],
}

/// Row-major strides of `axes` inside an order-`order` index, for a sub-array
/// laid out over `axes` in the given order.
pub(crate) fn sub_strides(axes: &[usize], order: usize, dim: usize) -> Vec<usize> {
    let mut strides = vec![0usize; order];
    let mut s = 1usize;
    for &a in axes.iter().rev() {
        strides[a] += s;
        s *= dim;
    }
    strides
}

/// Calls `f(flat_entry, index)` for every multi-index in row-major order.
pub(crate) fn for_each_index(order: usize, dim: usize, mut f: impl FnMut(usize, &[usize])) {
    let total = dim.pow(order as u32);
    let mut idx = vec![0usize; order];
    for flat in 0..total {
        f(flat, &idx);
        for k in (0..order).rev() {
            idx[k] += 1;
            if idx[k] < dim {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Offsets of every entry inside the sub-array over `axes`.
pub(crate) fn offsets_table(axes: &[usize], order: usize, dim: usize) -> Vec<usize> {
    let strides = sub_strides(axes, order, dim);
    let mut out = Vec::with_capacity(dim.pow(order as u32));
    for_each_index(order, dim, |_, idx| {
        out.push(idx.iter().zip(&strides).map(|(i, s)| i * s).sum());
    });
    out
}

/// `out[i_out] += sum_i a_i * prod_f w_f(i_{axes_f})` over all entries.
///
/// `out` has length `dim^|out_axes| * m` and is overwritten.
pub(crate) fn contract_raw(
    values: &[f64],
    order: usize,
    dim: usize,
    m: usize,
    factors: &[Factor<'_>],
    out_axes: &[usize],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let fstrides: Vec<Vec<usize>> = factors
        .iter()
        .map(|f| sub_strides(f.axes, order, dim))
        .collect();
    let ostrides = sub_strides(out_axes, order, dim);
    for_each_index(order, dim, |flat, idx| {
        let mut w = 1.0;
        for (f, st) in factors.iter().zip(&fstrides) {
            let off: usize = f.axes.iter().map(|&a| idx[a] * st[a]).sum();
            w *= f.weights[off];
            if w == 0.0 {
                return;
            }
        }
        let o: usize = out_axes.iter().map(|&a| idx[a] * ostrides[a]).sum();
        let src = &values[flat * m..flat * m + m];
        let dst = &mut out[o * m..o * m + m];
        for (d, s) in dst.iter_mut().zip(src) {
            *d += w * s;
        }
    });
}

/// Contracts the leading axis: `out[r] = sum_i g_i * values[i * rest + r]`.
pub(crate) fn contract_leading(values: &[f64], g: &[f64]) -> Vec<f64> {
    let rest = values.len() / g.len();
    let mut out = vec![0.0; rest];
    for (gi, chunk) in g.iter().zip(values.chunks_exact(rest)) {
        if *gi == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(chunk) {
            *o += gi * v;
        }
    }
    out
}

impl CoeffTensor {
    pub fn new(
        order: usize,
        dim: usize,
        value_dim: usize,
        values: Vec<f64>,
        space: ValueSpace,
    ) -> Result<Self> {
        let t = CoeffTensor {
            order,
            dim,
            value_dim,
            values,
            space,
        };
        t.validate()?;
        Ok(t)
    }

    /// Real-valued tensor (`m = 1`) in the Euclidean value space.
    pub fn scalar(order: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(order, dim, 1, values, ValueSpace::euclidean(1))
    }

    pub fn zeros(order: usize, dim: usize, space: ValueSpace) -> Result<Self> {
        let m = space.dim();
        let len = dim.checked_pow(order as u32).unwrap_or(usize::MAX).saturating_mul(m);
        Self::new(order, dim, m, vec![0.0; len], space)
    }

    /// Builds a tensor entry by entry; `f` fills the `m` values of index `i`.
    pub fn from_fn(
        order: usize,
        dim: usize,
        space: ValueSpace,
        mut f: impl FnMut(&[usize], &mut [f64]),
    ) -> Result<Self> {
        let mut t = Self::zeros(order, dim, space)?;
        let m = t.value_dim;
        let values = &mut t.values;
        for_each_index(order, dim, |flat, idx| f(idx, &mut values[flat * m..flat * m + m]));
        Ok(t)
    }

    /// Checks the shape invariants.
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(invalid("d ≥ 1 required"));
        }
        if self.dim == 0 {
            return Err(invalid("n ≥ 1 required"));
        }
        if self.value_dim == 0 {
            return Err(invalid("m ≥ 1 required"));
        }
        let expected = self
            .dim
            .checked_pow(self.order as u32)
            .and_then(|e| e.checked_mul(self.value_dim))
            .ok_or_else(|| invalid("tensor too large"))?;
        if self.values.len() != expected {
            return Err(dimension(format!(
                "values length {} ≠ {}",
                self.values.len(),
                expected
            )));
        }
        self.space.validate()?;
        if self.space.dim() != self.value_dim {
            return Err(dimension(format!(
                "value space has dimension {} but m = {}",
                self.space.dim(),
                self.value_dim
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite coefficient {v}")));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn space(&self) -> &ValueSpace {
        &self.space
    }

    pub fn num_entries(&self) -> usize {
        self.dim.pow(self.order as u32)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// The `m` values of entry `idx`.
    pub fn entry(&self, idx: &[usize]) -> &[f64] {
        let f = self.flat_index(idx) * self.value_dim;
        &self.values[f..f + self.value_dim]
    }

    pub fn entry_mut(&mut self, idx: &[usize]) -> &mut [f64] {
        let f = self.flat_index(idx) * self.value_dim;
        &mut self.values[f..f + self.value_dim]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> CoeffTensor {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v *= c);
        t
    }

    /// `alpha * self + beta * other`; shapes must agree.
    pub fn combine(&self, alpha: f64, other: &CoeffTensor, beta: f64) -> Result<CoeffTensor> {
        if (self.order, self.dim, self.value_dim) != (other.order, other.dim, other.value_dim) {
            return Err(dimension("tensor shapes differ"));
        }
        let mut t = self.clone();
        for (a, b) in t.values.iter_mut().zip(&other.values) {
            *a = alpha * *a + beta * b;
        }
        Ok(t)
    }

    pub fn with_space(&self, space: ValueSpace) -> Result<CoeffTensor> {
        Self::new(self.order, self.dim, self.value_dim, self.values.clone(), space)
    }

    /// `sqrt(sum_i |a_i|_2^2)` over all entries and value coordinates.
    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Fixes the axes in `axes` to `fixed` and returns the tensor over the
    /// remaining axes (in ascending order). Fixing every axis yields an
    /// order-0 tensor holding a single value.
    pub fn slice_fix(&self, axes: &[usize], fixed: &[usize]) -> Result<CoeffTensor> {
        if axes.len() != fixed.len() {
            return Err(dimension("one fixed index per fixed axis required"));
        }
        let mut pinned: Vec<Option<usize>> = vec![None; self.order];
        for (&a, &i) in axes.iter().zip(fixed) {
            if a >= self.order {
                return Err(invalid(format!("axis {} outside [{}]", a + 1, self.order)));
            }
            if i >= self.dim {
                return Err(invalid(format!(
                    "index {} out of range for axis {} (n = {})",
                    i + 1,
                    a + 1,
                    self.dim
                )));
            }
            if pinned[a].replace(i).is_some() {
                return Err(invalid(format!("axis {} fixed twice", a + 1)));
            }
        }
        let free: Vec<usize> = (0..self.order).filter(|a| pinned[*a].is_none()).collect();
        let m = self.value_dim;
        let mut values = Vec::with_capacity(self.dim.pow(free.len() as u32) * m);
        let mut full = vec![0usize; self.order];
        for (a, p) in pinned.iter().enumerate() {
            if let Some(i) = p {
                full[a] = *i;
            }
        }
        for_each_index(free.len(), self.dim, |_, sub| {
            for (k, &a) in free.iter().enumerate() {
                full[a] = sub[k];
            }
            values.extend_from_slice(self.entry(&full));
        });
        Ok(CoeffTensor {
            order: free.len(),
            dim: self.dim,
            value_dim: m,
            values,
            space: self.space.clone(),
        })
    }

    /// Sums the tensor against one array per block and returns the tensor
    /// over the uncovered axes (ascending). Deterministic blocks take unit
    /// vectors and Gaussian blocks take sampled weights; the arithmetic is the
    /// same, only the shape is checked here.
    pub fn contract(&self, assignment: &BlockAssignment, arrays: &[&[f64]]) -> Result<CoeffTensor> {
        assignment.validate(self.order)?;
        if arrays.len() != assignment.blocks.len() {
            return Err(dimension(format!(
                "{} arrays supplied for {} blocks",
                arrays.len(),
                assignment.blocks.len()
            )));
        }
        for (b, arr) in assignment.blocks.iter().zip(arrays) {
            let want = self.dim.pow(b.axes.len() as u32);
            if arr.len() != want {
                return Err(dimension(format!(
                    "block {} needs an array of length {}, got {}",
                    crate::partitions::fmt_block(&b.axes),
                    want,
                    arr.len()
                )));
            }
        }
        let free = assignment.free_axes(self.order);
        let factors: Vec<Factor<'_>> = assignment
            .blocks
            .iter()
            .zip(arrays)
            .map(|(b, w)| Factor {
                axes: &b.axes,
                weights: w,
            })
            .collect();
        let m = self.value_dim;
        let mut out = vec![0.0; self.dim.pow(free.len() as u32) * m];
        contract_raw(&self.values, self.order, self.dim, m, &factors, &free, &mut out);
        Ok(CoeffTensor {
            order: free.len(),
            dim: self.dim,
            value_dim: m,
            values: out,
            space: self.space.clone(),
        })
    }

    /// Zeroes every entry whose multi-index has a repeated coordinate.
    pub fn mask_offdiagonal(&self) -> CoeffTensor {
        let mut t = self.clone();
        let m = self.value_dim;
        for_each_index(self.order, self.dim, |flat, idx| {
            if has_repeat(idx) {
                t.values[flat * m..flat * m + m].iter_mut().for_each(|v| *v = 0.0);
            }
        });
        t
    }

    /// Whether every entry with a repeated coordinate is zero.
    pub fn is_offdiagonal(&self) -> bool {
        let m = self.value_dim;
        let mut ok = true;
        for_each_index(self.order, self.dim, |flat, idx| {
            if ok && has_repeat(idx) && self.values[flat * m..flat * m + m].iter().any(|v| *v != 0.0)
            {
                ok = false;
            }
        });
        ok
    }

    /// Tensor with axis `k` taken from axis `perm[k]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<CoeffTensor> {
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..self.order).collect::<Vec<_>>() {
            return Err(invalid("not a permutation of the axes"));
        }
        let m = self.value_dim;
        let mut out = vec![0.0; self.values.len()];
        let mut src = vec![0usize; self.order];
        for_each_index(self.order, self.dim, |flat, idx| {
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            out[flat * m..flat * m + m].copy_from_slice(self.entry(&src));
        });
        Ok(CoeffTensor {
            values: out,
            ..self.clone()
        })
    }

    /// Average over all permutations of the index axes.
    pub fn symmetrize(&self) -> CoeffTensor {
        let perms = permutations(self.order);
        let mut acc = vec![0.0; self.values.len()];
        for p in &perms {
            let t = self.permute_axes(p).expect("valid permutation");
            for (a, v) in acc.iter_mut().zip(&t.values) {
                *a += v;
            }
        }
        let k = perms.len() as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        CoeffTensor {
            values: acc,
            ..self.clone()
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        permutations(self.order).iter().all(|p| {
            let t = self.permute_axes(p).expect("valid permutation");
            t.values
                .iter()
                .zip(&self.values)
                .all(|(a, b)| (a - b).abs() <= tol * (1.0 + b.abs()))
        })
    }
}

fn has_repeat(idx: &[usize]) -> bool {
    (0..idx.len()).any(|k| idx[k + 1..].contains(&idx[k]))
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(order: usize, dim: usize, v: Vec<f64>) -> CoeffTensor {
        CoeffTensor::scalar(order, dim, v).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(CoeffTensor::scalar(1, 2, vec![3.0, 4.0]).is_ok());
        let e = CoeffTensor::scalar(2, 2, vec![1.0; 3]).unwrap_err();
        assert!(e.to_string().contains("values length 3 ≠ 4"), "{e}");
        let e = CoeffTensor::scalar(0, 2, vec![1.0]).unwrap_err();
        assert!(e.to_string().contains("d ≥ 1 required"), "{e}");
        assert!(CoeffTensor::new(1, 2, 2, vec![0.0; 4], ValueSpace::euclidean(3)).is_err());
    }

    #[test]
    fn slice_examples() {
        let id = scalar(2, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        let row = id.slice_fix(&[0], &[0]).unwrap();
        assert_eq!(row.order(), 1);
        assert_eq!(row.values(), &[1.0, 0.0, 0.0]);
        assert_eq!(id.slice_fix(&[], &[]).unwrap(), id);
        let point = id.slice_fix(&[0, 1], &[1, 1]).unwrap();
        assert_eq!(point.order(), 0);
        assert_eq!(point.values(), &[1.0]);
        assert!(id.slice_fix(&[0], &[3]).is_err());
    }

    #[test]
    fn contract_examples() {
        let a = scalar(1, 2, vec![3.0, 4.0]);
        let asg = BlockAssignment::new().with(&[0], BlockRole::Deterministic);
        let r = a.contract(&asg, &[&[0.6, 0.8]]).unwrap();
        assert_eq!(r.order(), 0);
        assert!((r.values()[0] - 5.0).abs() < 1e-15);

        // rank one: u ⊗ v contracted on axis 2 with v/|v|
        let u = [1.0, -2.0, 0.5];
        let v = [3.0, 4.0, 0.0];
        let t = CoeffTensor::from_fn(2, 3, ValueSpace::euclidean(1), |i, out| {
            out[0] = u[i[0]] * v[i[1]]
        })
        .unwrap();
        let vn: Vec<f64> = v.iter().map(|x| x / 5.0).collect();
        let asg = BlockAssignment::new().with(&[1], BlockRole::Deterministic);
        let r = t.contract(&asg, &[&vn]).unwrap();
        for k in 0..3 {
            assert!((r.values()[k] - 5.0 * u[k]).abs() < 1e-12);
        }
        let bad = t.contract(&asg, &[&[1.0, 0.0]]);
        assert!(bad.is_err());
    }

    #[test]
    fn contract_order3_matches_triple_loop() {
        let n = 3;
        let m = 2;
        let t = CoeffTensor::from_fn(3, n, ValueSpace::euclidean(m), |i, out| {
            out[0] = (i[0] * 7 + i[1] * 3 + i[2]) as f64 * 0.1 - 0.9;
            out[1] = ((i[0] + 2 * i[1] * i[2]) % 5) as f64 - 2.0;
        })
        .unwrap();
        let w: Vec<f64> = (0..n * n).map(|k| (k as f64 * 0.37).sin()).collect();
        let x = [0.2, -0.5, 0.9];
        let asg = BlockAssignment::new()
            .with(&[0, 1], BlockRole::Gaussian)
            .with(&[2], BlockRole::Deterministic);
        let r = t.contract(&asg, &[&w, &x]).unwrap();
        for j in 0..m {
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        s += t.entry(&[a, b, c])[j] * w[a * n + b] * x[c];
                    }
                }
            }
            assert!((r.values()[j] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn mask_examples() {
        let t = scalar(2, 2, vec![1.0; 4]).mask_offdiagonal();
        assert_eq!(t.values(), &[0.0, 1.0, 1.0, 0.0]);
        let t1 = scalar(1, 3, vec![1.0, 2.0, 3.0]);
        assert_eq!(t1.mask_offdiagonal(), t1);
        let t3 = scalar(3, 2, vec![1.0; 8]).mask_offdiagonal();
        assert!(t3.is_zero());
    }

    #[test]
    fn basis_contraction_reproduces_slice() {
        let t = CoeffTensor::from_fn(3, 3, ValueSpace::euclidean(2), |i, out| {
            out[0] = (i[0] + 10 * i[1] + 100 * i[2]) as f64;
            out[1] = -(i[2] as f64);
        })
        .unwrap();
        let mut e = vec![0.0; 9];
        e[1 * 3 + 2] = 1.0;
        let asg = BlockAssignment::new().with(&[0, 2], BlockRole::Deterministic);
        let c = t.contract(&asg, &[&e]).unwrap();
        let s = t.slice_fix(&[0, 2], &[1, 2]).unwrap();
        assert_eq!(c, s);
    }

    fn tensor_strategy(order: usize, n: usize) -> impl Strategy<Value = CoeffTensor> {
        prop::collection::vec(-3.0f64..3.0, n.pow(order as u32) * 2).prop_map(move |v| {
            CoeffTensor::new(order, n, 2, v, ValueSpace::euclidean(2)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn contraction_is_linear(
            a in tensor_strategy(3, 2),
            b in tensor_strategy(3, 2),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
            x in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let asg = BlockAssignment::new().with(&[1, 2], BlockRole::Deterministic);
            let lhs = a.combine(alpha, &b, beta).unwrap().contract(&asg, &[&x]).unwrap();
            let ca = a.contract(&asg, &[&x]).unwrap();
            let cb = b.contract(&asg, &[&x]).unwrap();
            let rhs = ca.combine(alpha, &cb, beta).unwrap();
            for (l, r) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((l - r).abs() < 1e-12);
            }
        }

        #[test]
        fn symmetrize_idempotent_and_commutes_with_mask(a in tensor_strategy(3, 3)) {
            let s = a.symmetrize();
            prop_assert!(s.is_symmetric(1e-12));
            let ss = s.symmetrize();
            for (x, y) in s.values().iter().zip(ss.values()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let m1 = a.mask_offdiagonal().symmetrize();
            let m2 = a.symmetrize().mask_offdiagonal();
            for (x, y) in m1.values().iter().zip(m2.values()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
