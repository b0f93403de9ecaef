//! Tensor-valued differential forms on a coordinate chart.
//!
//! A `(k, l)`-tensor-valued `p`-form is stored as its antisymmetric
//! components `A^{u1..uk}_{l1..ll f1..fp}` for strictly increasing form
//! indices, so that `A = sum_{f1<..<fp} A_{..f} dx^f1 ^ .. ^ dx^fp`.
//! Indices are 0-based internally.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Rational, ScalarExpr};

/// Component key: upper indices, then lower indices, then increasing form
/// indices.
pub type Key = Vec<u8>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub upper: usize,
    pub lower: usize,
    pub degree: usize,
}

#[derive(Clone)]
pub struct TensorValuedForm {
    dim: usize,
    upper: usize,
    lower: usize,
    degree: usize,
    comps: BTreeMap<Key, ScalarExpr>,
}

/// Sorts form indices, returning the permutation sign, or `None` when an
/// index repeats.
pub fn sort_form_indices(idx: &mut [u8]) -> Option<i32> {
    let mut sign = 1;
    // insertion sort; the lists are tiny
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn accumulate(map: &mut BTreeMap<Key, ScalarExpr>, key: Key, value: ScalarExpr) {
    if value.is_zero() {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(value);
        }
        Entry::Occupied(mut e) => {
            let s = e.get().add(&value);
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

impl TensorValuedForm {
    pub fn zero(dim: usize, upper: usize, lower: usize, degree: usize) -> Self {
        TensorValuedForm {
            dim,
            upper,
            lower,
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn zero_like(&self) -> Self {
        Self::zero(self.dim, self.upper, self.lower, self.degree)
    }

    pub fn zero_shape(dim: usize, shape: Shape) -> Self {
        Self::zero(dim, shape.upper, shape.lower, shape.degree)
    }

    pub fn scalar(value: ScalarExpr) -> Self {
        let mut f = Self::zero(value.dimension(), 0, 0, 0);
        accumulate(&mut f.comps, Vec::new(), value);
        f
    }

    /// The one-form `dx^mu`.
    pub fn dx(dim: usize, mu: usize) -> Self {
        let mut f = Self::zero(dim, 0, 0, 1);
        f.comps.insert(vec![mu as u8], ScalarExpr::one(dim));
        f
    }

    /// The vector field `d/dx^mu` as a `(1,0)` zero-form.
    pub fn basis_vector(dim: usize, mu: usize) -> Self {
        let mut f = Self::zero(dim, 1, 0, 0);
        f.comps.insert(vec![mu as u8], ScalarExpr::one(dim));
        f
    }

    /// Canonicalizing constructor with 1-based indices. Form indices may be
    /// given in any order; repeated ones make the entry vanish. Entries
    /// with the same canonical key are summed.
    pub fn make_form(
        dim: usize,
        upper: usize,
        lower: usize,
        degree: usize,
        raw: impl IntoIterator<Item = (Vec<usize>, Vec<usize>, Vec<usize>, ScalarExpr)>,
    ) -> Result<Self> {
        if dim == 0 || dim > crate::scalar::MAX_VARS {
            return Err(Error::UnsupportedDimension(dim));
        }
        if degree > dim {
            return Err(Error::Shape(format!(
                "form degree {degree} exceeds dimension {dim}"
            )));
        }
        let mut f = Self::zero(dim, upper, lower, degree);
        for (u, l, fi, value) in raw {
            if u.len() != upper || l.len() != lower || fi.len() != degree {
                return Err(Error::Shape(format!(
                    "component has {} upper, {} lower and {} form indices, expected {upper}, {lower}, {degree}",
                    u.len(),
                    l.len(),
                    fi.len()
                )));
            }
            if value.dimension() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: value.dimension(),
                });
            }
            let mut idx = Vec::with_capacity(upper + lower + degree);
            for &i in u.iter().chain(&l).chain(&fi) {
                if i == 0 || i > dim {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        dimension: dim,
                    });
                }
                idx.push((i - 1) as u8);
            }
            f.add_term(
                &idx[..upper],
                &idx[upper..upper + lower],
                &idx[upper + lower..],
                value,
            );
        }
        Ok(f)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn upper_rank(&self) -> usize {
        self.upper
    }

    pub fn lower_rank(&self) -> usize {
        self.lower
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn shape(&self) -> Shape {
        Shape {
            upper: self.upper,
            lower: self.lower,
            degree: self.degree,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn is_scalar_function(&self) -> bool {
        self.upper == 0 && self.lower == 0 && self.degree == 0
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    /// Canonical components as `(key, value)`; split a key with
    /// [`TensorValuedForm::split_key`].
    pub fn components(&self) -> impl Iterator<Item = (&Key, &ScalarExpr)> {
        self.comps.iter()
    }

    pub fn split_key<'a>(&self, key: &'a [u8]) -> (&'a [u8], &'a [u8], &'a [u8]) {
        let (u, rest) = key.split_at(self.upper);
        let (l, f) = rest.split_at(self.lower);
        (u, l, f)
    }

    /// Adds `value` to the component with the given 0-based indices; form
    /// indices may be unordered.
    pub fn add_term(&mut self, upper: &[u8], lower: &[u8], form: &[u8], value: ScalarExpr) {
        debug_assert_eq!(upper.len(), self.upper);
        debug_assert_eq!(lower.len(), self.lower);
        debug_assert_eq!(form.len(), self.degree);
        let mut f = form.to_vec();
        let Some(sign) = sort_form_indices(&mut f) else {
            return;
        };
        let mut key = Vec::with_capacity(upper.len() + lower.len() + f.len());
        key.extend_from_slice(upper);
        key.extend_from_slice(lower);
        key.extend_from_slice(&f);
        let v = if sign < 0 { value.neg() } else { value };
        accumulate(&mut self.comps, key, v);
    }

    /// Adds to a canonical key.
    pub fn add_key(&mut self, key: Key, value: ScalarExpr) {
        debug_assert_eq!(key.len(), self.upper + self.lower + self.degree);
        accumulate(&mut self.comps, key, value);
    }

    /// Component for 0-based indices; form indices may be unordered.
    pub fn component(&self, upper: &[u8], lower: &[u8], form: &[u8]) -> ScalarExpr {
        let mut f = form.to_vec();
        let Some(sign) = sort_form_indices(&mut f) else {
            return ScalarExpr::zero(self.dim);
        };
        let mut key = upper.to_vec();
        key.extend_from_slice(lower);
        key.extend_from_slice(&f);
        match self.comps.get(&key) {
            None => ScalarExpr::zero(self.dim),
            Some(v) if sign < 0 => v.neg(),
            Some(v) => v.clone(),
        }
    }

    pub fn get(&self, key: &[u8]) -> Option<&ScalarExpr> {
        self.comps.get(key)
    }

    /// The value of a scalar function (0 when empty).
    pub fn scalar_value(&self) -> ScalarExpr {
        self.comps
            .get(&Vec::new())
            .cloned()
            .unwrap_or_else(|| ScalarExpr::zero(self.dim))
    }

    fn check_same_shape(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if !self.is_empty() && !other.is_empty() {
            assert_eq!(self.shape(), other.shape(), "shape mismatch");
        }
    }

    fn merged_shape(&self, other: &Self) -> Self {
        // Empty forms adopt the other operand's shape.
        if self.is_empty() && !other.is_empty() {
            other.zero_like()
        } else {
            self.zero_like()
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.shape() != other.shape() && !self.is_empty() && !other.is_empty() {
            return Err(Error::Shape(format!(
                "cannot add {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(self.add(other))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_shape(other);
        let mut out = self.merged_shape(other);
        out.comps = self.comps.clone();
        for (k, v) in &other.comps {
            accumulate(&mut out.comps, k.clone(), v.clone());
        }
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_same_shape(other);
        if self.is_empty() {
            *self = Self {
                comps: other.comps.clone(),
                ..other.clone()
            };
            return;
        }
        for (k, v) in &other.comps {
            accumulate(&mut self.comps, k.clone(), v.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|v| v.neg())
    }

    pub fn scale(&self, s: &ScalarExpr) -> Self {
        if s.is_zero() {
            return self.zero_like();
        }
        self.map(|v| v.mul(s))
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        self.map(|v| v.scale(c))
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.map(|v| v.scale_int(n))
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        let mut out = self.zero_like();
        for (k, v) in &self.comps {
            let w = f(v);
            if !w.is_zero() {
                out.comps.insert(k.clone(), w);
            }
        }
        out
    }

    /// Componentwise partial derivative.
    pub fn partial(&self, rho: usize) -> Self {
        self.map(|v| v.derivative(rho))
    }

    /// Exterior product with tensor blocks concatenated (`self` first).
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = Self::zero(
            self.dim,
            self.upper + other.upper,
            self.lower + other.lower,
            self.degree + other.degree,
        );
        if out.degree > self.dim {
            return out;
        }
        for (ka, va) in &self.comps {
            let (ua, la, fa) = self.split_key(ka);
            for (kb, vb) in &other.comps {
                let (ub, lb, fb) = other.split_key(kb);
                let Some((merged, sign)) = merge_form(fa, fb) else {
                    continue;
                };
                let mut key = Vec::with_capacity(ka.len() + kb.len());
                key.extend_from_slice(ua);
                key.extend_from_slice(ub);
                key.extend_from_slice(la);
                key.extend_from_slice(lb);
                key.extend_from_slice(&merged);
                let p = va.mul(vb);
                accumulate(&mut out.comps, key, if sign < 0 { p.neg() } else { p });
            }
        }
        out
    }

    pub fn try_wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(self.wedge(other))
    }

    /// Interior product with `d/dx^mu`, inserted into the first form slot.
    /// Zero-forms map to the zero form of the same type and degree 0.
    pub fn interior(&self, mu: usize) -> Self {
        if self.degree == 0 {
            return self.zero_like();
        }
        let mut out = Self::zero(self.dim, self.upper, self.lower, self.degree - 1);
        let t = self.upper + self.lower;
        for (k, v) in &self.comps {
            let f = &k[t..];
            if let Some(j) = f.iter().position(|&x| x as usize == mu) {
                let mut key = k.clone();
                key.remove(t + j);
                accumulate(
                    &mut out.comps,
                    key,
                    if j % 2 == 1 { v.neg() } else { v.clone() },
                );
            }
        }
        out
    }

    /// The exterior derivative acting on the form part componentwise.
    pub fn exterior_derivative(&self) -> Self {
        let mut out = Self::zero(self.dim, self.upper, self.lower, self.degree + 1);
        if out.degree > self.dim {
            return out;
        }
        let t = self.upper + self.lower;
        for (k, v) in &self.comps {
            let f = &k[t..];
            for s in 0..self.dim {
                if f.contains(&(s as u8)) {
                    continue;
                }
                let dv = v.derivative(s);
                if dv.is_zero() {
                    continue;
                }
                let pos = f.iter().filter(|&&x| (x as usize) < s).count();
                let mut key = k.clone();
                key.insert(t + pos, s as u8);
                accumulate(
                    &mut out.comps,
                    key,
                    if pos % 2 == 1 { dv.neg() } else { dv },
                );
            }
        }
        out
    }

    /// Permutes tensor indices: new upper slot `i` takes old slot
    /// `upper_perm[i]`, likewise for lower slots.
    pub fn permute_tensor(&self, upper_perm: &[usize], lower_perm: &[usize]) -> Self {
        assert_eq!(upper_perm.len(), self.upper);
        assert_eq!(lower_perm.len(), self.lower);
        let mut out = self.zero_like();
        for (k, v) in &self.comps {
            let (u, l, f) = self.split_key(k);
            let mut key = Vec::with_capacity(k.len());
            key.extend(upper_perm.iter().map(|&i| u[i]));
            key.extend(lower_perm.iter().map(|&i| l[i]));
            key.extend_from_slice(f);
            out.comps.insert(key, v.clone());
        }
        out
    }

    /// For a form whose tensor blocks are `(X, Y)` with `X` of type
    /// `(k1, l1)`, returns the same form with blocks ordered `(Y, X)`.
    pub fn swap_blocks(&self, k1: usize, l1: usize) -> Self {
        let up: Vec<usize> = (k1..self.upper).chain(0..k1).collect();
        let lo: Vec<usize> = (l1..self.lower).chain(0..l1).collect();
        self.permute_tensor(&up, &lo)
    }

    /// Reorders tensor blocks. `blocks` lists the `(upper, lower)` sizes of
    /// the current blocks in order; new block `i` is old block `order[i]`.
    pub fn reorder_blocks(&self, blocks: &[(usize, usize)], order: &[usize]) -> Self {
        let mut up_start = Vec::with_capacity(blocks.len());
        let mut lo_start = Vec::with_capacity(blocks.len());
        let (mut u, mut l) = (0, 0);
        for &(bu, bl) in blocks {
            up_start.push(u);
            lo_start.push(l);
            u += bu;
            l += bl;
        }
        assert_eq!(
            (u, l),
            (self.upper, self.lower),
            "block sizes do not match the form"
        );
        let mut up = Vec::with_capacity(u);
        let mut lo = Vec::with_capacity(l);
        for &b in order {
            up.extend(up_start[b]..up_start[b] + blocks[b].0);
            lo.extend(lo_start[b]..lo_start[b] + blocks[b].1);
        }
        self.permute_tensor(&up, &lo)
    }

    /// Fixes the first lower index to `idx`, giving a form with one lower
    /// index fewer.
    pub fn slice_first_lower(&self, idx: usize) -> Self {
        assert!(self.lower > 0);
        let mut out = Self::zero(self.dim, self.upper, self.lower - 1, self.degree);
        for (k, v) in &self.comps {
            if k[self.upper] as usize == idx {
                let mut key = k.clone();
                key.remove(self.upper);
                out.comps.insert(key, v.clone());
            }
        }
        out
    }

    /// Fixes the first upper index to `idx`.
    pub fn slice_first_upper(&self, idx: usize) -> Self {
        assert!(self.upper > 0);
        let mut out = Self::zero(self.dim, self.upper - 1, self.lower, self.degree);
        for (k, v) in &self.comps {
            if k[0] as usize == idx {
                out.comps.insert(k[1..].to_vec(), v.clone());
            }
        }
        out
    }

    /// Builds a form with a new first lower index from its slices.
    pub fn stack_first_lower(dim: usize, slices: &[Self]) -> Self {
        assert_eq!(slices.len(), dim);
        let s0 = &slices[0];
        let mut out = Self::zero(dim, s0.upper, s0.lower + 1, s0.degree);
        for (idx, s) in slices.iter().enumerate() {
            for (k, v) in &s.comps {
                let mut key = k.clone();
                key.insert(s.upper, idx as u8);
                out.comps.insert(key, v.clone());
            }
        }
        out
    }

    /// Semantic equality: same shape (or both zero) and vanishing difference.
    pub fn equals(&self, other: &Self) -> bool {
        if self.dim != other.dim {
            return false;
        }
        if self.is_empty() || other.is_empty() {
            return self.is_empty() && other.is_empty();
        }
        self.shape() == other.shape() && self.sub(other).is_empty()
    }

    /// Display with 1-based keys in the form-file format.
    pub fn key_string(&self, key: &[u8]) -> String {
        let (u, l, f) = self.split_key(key);
        let j = |s: &[u8]| {
            s.iter()
                .map(|x| (x + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{};{};{}", j(u), j(l), j(f))
    }
}

/// Merges two increasing index lists, returning the sign of the shuffle,
/// or `None` when they share an index.
pub fn merge_form(a: &[u8], b: &[u8]) -> Option<(Vec<u8>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut inversions = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                inversions += a.len() - i;
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, if inversions.is_multiple_of(2) { 1 } else { -1 }))
}

impl PartialEq for TensorValuedForm {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl fmt::Debug for TensorValuedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Form(d={}, type=({},{}), degree={}) {{",
            self.dim, self.upper, self.lower, self.degree
        )?;
        for (i, (k, v)) in self.comps.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, " {}: {}", self.key_string(k), v)?;
        }
        f.write_str(" }")
    }
}
