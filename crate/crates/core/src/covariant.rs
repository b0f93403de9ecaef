//! Covariant derivatives and exterior covariant derivatives of
//! tensor-valued forms.
//!
//! Form indices transform like lower indices under `nabla_rho`. When a
//! derivative is materialized (`nabla_full`), its index becomes the first
//! lower index, so a second derivative treats it as a genuine covariant
//! index.

use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Connection};
use crate::scalar::ScalarExpr;

impl ChartGeometry {
    /// `nabla_rho A` (or `nabla~_rho A`), same shape as `A`.
    pub fn nabla(&self, rho: usize, a: &TensorValuedForm, sel: Connection) -> TensorValuedForm {
        let mut out = a.partial(rho);
        if self.gamma_is_zero() {
            return out;
        }
        // entries Gamma^r_{rho n}
        let entries: Vec<(usize, usize, &ScalarExpr)> = self
            .gamma_support(sel)
            .filter(|&(_, m, _)| m == rho)
            .map(|(r, m, n)| (r, n, self.gamma(sel, r, m, n)))
            .collect();
        if entries.is_empty() {
            return out;
        }
        let (k, l) = (a.upper_rank(), a.lower_rank());
        for (key, v) in a.components() {
            for slot in 0..key.len() {
                let s = key[slot] as usize;
                for &(r, n, g) in &entries {
                    if slot < k {
                        // + Gamma^u_{rho s} A^{..s..}
                        if n != s {
                            continue;
                        }
                        let mut nk = key.clone();
                        nk[slot] = r as u8;
                        out.add_key(nk, g.mul(v));
                    } else {
                        // - Gamma^s_{rho n} A_{..s..}
                        if r != s {
                            continue;
                        }
                        let mut nk = key.clone();
                        nk[slot] = n as u8;
                        let val = g.mul(v).neg();
                        if slot < k + l {
                            out.add_key(nk, val);
                        } else {
                            let (u, lo, f) = a.split_key(&nk);
                            out.add_term(u, lo, f, val);
                        }
                    }
                }
            }
        }
        out
    }

    /// `nabla A` as a `(k, l+1)` form, the derivative index first among
    /// the lower indices.
    pub fn nabla_full(&self, a: &TensorValuedForm, sel: Connection) -> TensorValuedForm {
        let slices: Vec<TensorValuedForm> = (0..self.dimension())
            .map(|rho| self.nabla(rho, a, sel))
            .collect();
        TensorValuedForm::stack_first_lower(self.dimension(), &slices)
    }

    /// All slices `nabla_rho A`.
    pub fn nabla_all(&self, a: &TensorValuedForm, sel: Connection) -> Vec<TensorValuedForm> {
        (0..self.dimension())
            .map(|rho| self.nabla(rho, a, sel))
            .collect()
    }

    /// Second covariant derivatives `nabla_l nabla_t A` for all `(l, t)`,
    /// indexed `[l][t]`, with `t` treated as a covariant index.
    pub fn nabla2_all(&self, a: &TensorValuedForm, sel: Connection) -> Vec<Vec<TensorValuedForm>> {
        let first = self.nabla_full(a, sel);
        (0..self.dimension())
            .map(|l| {
                let d = self.nabla(l, &first, sel);
                (0..self.dimension())
                    .map(|t| d.slice_first_lower(t))
                    .collect()
            })
            .collect()
    }

    /// `nabla_l nabla_t A` for one pair.
    pub fn nabla2(
        &self,
        l: usize,
        t: usize,
        a: &TensorValuedForm,
        sel: Connection,
    ) -> TensorValuedForm {
        self.nabla(l, &self.nabla_full(a, sel), sel)
            .slice_first_lower(t)
    }

    /// `i A` as a `(k, l+1, p-1)` form, the contracted index first among the
    /// lower indices.
    pub fn interior_full(&self, a: &TensorValuedForm) -> TensorValuedForm {
        let slices: Vec<TensorValuedForm> =
            (0..self.dimension()).map(|mu| a.interior(mu)).collect();
        TensorValuedForm::stack_first_lower(self.dimension(), &slices)
    }

    /// Exterior covariant derivative `D A` (or `D~ A`).
    pub fn exterior_covariant(&self, a: &TensorValuedForm, sel: Connection) -> TensorValuedForm {
        let mut out = a.exterior_derivative();
        if self.gamma_is_zero() || out.degree() > self.dimension() {
            return out;
        }
        // connection one-forms Gamma^r_n = Gamma^r_{m n} dx^m
        let entries: Vec<(usize, usize, usize, &ScalarExpr)> = self
            .gamma_support(sel)
            .map(|(r, m, n)| (r, m, n, self.gamma(sel, r, m, n)))
            .collect();
        let k = a.upper_rank();
        let t = k + a.lower_rank();
        for (key, v) in a.components() {
            let f = &key[t..];
            for slot in 0..t {
                let s = key[slot] as usize;
                for &(r, m, n, g) in &entries {
                    if f.contains(&(m as u8)) {
                        continue;
                    }
                    let (target, val) = if slot < k {
                        if n != s {
                            continue;
                        }
                        (r, g.mul(v))
                    } else {
                        if r != s {
                            continue;
                        }
                        (n, g.mul(v).neg())
                    };
                    let mut tensor = key[..t].to_vec();
                    tensor[slot] = target as u8;
                    let mut form = Vec::with_capacity(f.len() + 1);
                    form.push(m as u8);
                    form.extend_from_slice(f);
                    out.add_term(&tensor[..k], &tensor[k..], &form, val);
                }
            }
        }
        out
    }

    /// Torsion of the selected connection: `T` for primary, `-T` for tilde.
    pub fn torsion_of(&self, sel: Connection, r: usize, m: usize, n: usize) -> ScalarExpr {
        let t = self.torsion_component(r, m, n);
        match sel {
            Connection::Primary => t,
            Connection::Tilde => t.neg(),
        }
    }

    /// Right-hand side of the commutator of second covariant derivatives:
    /// `-T^l_{rs} nabla_l A + sum_upper R^{u}_{l rs} A^{..l..}
    ///  - sum_lower R^l_{n rs} A_{..l..} - R^l_{t rs} dx^t ^ i_l A`.
    pub fn commutator_rhs(
        &self,
        rho: usize,
        sigma: usize,
        a: &TensorValuedForm,
        sel: Connection,
    ) -> TensorValuedForm {
        let d = self.dimension();
        let mut out = a.zero_like();
        for l in 0..d {
            let t = self.torsion_of(sel, l, rho, sigma);
            if !t.is_zero() {
                out.add_assign(&self.nabla(l, a, sel).scale(&t.neg()));
            }
        }
        let r = |m: usize, n: usize| self.curvature_component(sel, m, n, rho, sigma);
        let k = a.upper_rank();
        let t = k + a.lower_rank();
        for (key, v) in a.components() {
            for slot in 0..t {
                let s = key[slot] as usize;
                for x in 0..d {
                    let (c, target) = if slot < k {
                        (r(x, s), x)
                    } else {
                        (r(s, x).neg(), x)
                    };
                    if c.is_zero() {
                        continue;
                    }
                    let mut nk = key.clone();
                    nk[slot] = target as u8;
                    out.add_key(nk, c.mul(v));
                }
            }
        }
        if a.degree() > 0 {
            for l in 0..d {
                let il = a.interior(l);
                if il.is_zero() {
                    continue;
                }
                for tau in 0..d {
                    let c = r(l, tau);
                    if c.is_zero() {
                        continue;
                    }
                    let w = TensorValuedForm::dx(d, tau).wedge(&il);
                    out.add_assign(&w.scale(&c.neg()));
                }
            }
        }
        out
    }

    /// `[nabla_rho, nabla_sigma] A` from genuine second derivatives.
    pub fn commutator_direct(
        &self,
        rho: usize,
        sigma: usize,
        a: &TensorValuedForm,
        sel: Connection,
    ) -> TensorValuedForm {
        let first = self.nabla_full(a, sel);
        let ab = self.nabla(rho, &first, sel).slice_first_lower(sigma);
        let ba = self.nabla(sigma, &first, sel).slice_first_lower(rho);
        ab.sub(&ba)
    }
}
