//! Residuals of the local operator identities relating `D`, `nabla`, the
//! interior product, torsion and curvature. None of them needs any
//! constraint on the chart.

use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Connection};

/// Scalar-valued two-forms `T^m`.
pub fn torsion_forms(geom: &ChartGeometry) -> Vec<TensorValuedForm> {
    (0..geom.dimension())
        .map(|m| geom.torsion().slice_first_upper(m))
        .collect()
}

/// `T^m ^ i_m A`.
fn torsion_contraction(geom: &ChartGeometry, a: &TensorValuedForm) -> TensorValuedForm {
    let mut out = TensorValuedForm::zero(
        geom.dimension(),
        a.upper_rank(),
        a.lower_rank(),
        a.degree() + 1,
    );
    if a.degree() == 0 {
        return out;
    }
    for (m, t) in torsion_forms(geom).iter().enumerate() {
        if t.is_zero() {
            continue;
        }
        out.add_assign(&t.wedge(&a.interior(m)));
    }
    out
}

/// `D A - dx^m ^ nabla_m A - T^m ^ i_m A` (primary) or
/// `D~ A - dx^m ^ nabla~_m A + T^m ^ i_m A` (tilde).
pub fn d_nabla_relation(
    a: &TensorValuedForm,
    geom: &ChartGeometry,
    sel: Connection,
) -> TensorValuedForm {
    let d = geom.dimension();
    let mut r = geom.exterior_covariant(a, sel);
    for m in 0..d {
        r = r.sub(&TensorValuedForm::dx(d, m).wedge(&geom.nabla(m, a, sel)));
    }
    let tc = torsion_contraction(geom, a);
    match sel {
        Connection::Primary => r.sub(&tc),
        Connection::Tilde => r.add(&tc),
    }
}

/// `i_n nabla_m A - nabla_m i_n A`, where `i A` carries `n` as a lower index.
pub fn interior_nabla_commutator(
    a: &TensorValuedForm,
    geom: &ChartGeometry,
    m: usize,
    n: usize,
) -> TensorValuedForm {
    let sel = Connection::Primary;
    let lhs = geom.nabla(m, a, sel).interior(n);
    let rhs = geom
        .nabla(m, &geom.interior_full(a), sel)
        .slice_first_lower(n);
    lhs.sub(&rhs)
}

/// `D nabla_l A - nabla_l D A - dx^r ^ [nabla_r, nabla_l] A + nabla_l T^r ^ i_r A`.
pub fn d_nabla_exchange(a: &TensorValuedForm, geom: &ChartGeometry, l: usize) -> TensorValuedForm {
    let d = geom.dimension();
    let sel = Connection::Primary;
    let lhs = geom
        .exterior_covariant(&geom.nabla_full(a, sel), sel)
        .slice_first_lower(l);
    let mut r = lhs.sub(&geom.nabla(l, &geom.exterior_covariant(a, sel), sel));
    for rho in 0..d {
        let c = geom.commutator_direct(rho, l, a, sel);
        if !c.is_zero() {
            r = r.sub(&TensorValuedForm::dx(d, rho).wedge(&c));
        }
    }
    if a.degree() > 0 {
        let nt = geom.nabla(l, geom.torsion(), sel);
        for rho in 0..d {
            let t = nt.slice_first_upper(rho);
            if !t.is_zero() {
                r = r.add(&t.wedge(&a.interior(rho)));
            }
        }
    }
    r
}

/// `(D i_l + i_l D) A - nabla_l A - i_l T^r ^ i_r A`.
pub fn d_interior_relation(
    a: &TensorValuedForm,
    geom: &ChartGeometry,
    l: usize,
) -> TensorValuedForm {
    let sel = Connection::Primary;
    let mut r = geom.exterior_covariant(a, sel).interior(l);
    if a.degree() > 0 {
        r = r.add(
            &geom
                .exterior_covariant(&geom.interior_full(a), sel)
                .slice_first_lower(l),
        );
    }
    r = r.sub(&geom.nabla(l, a, sel));
    if a.degree() > 0 {
        for (rho, t) in torsion_forms(geom).iter().enumerate() {
            let it = t.interior(l);
            if !it.is_zero() {
                r = r.sub(&it.wedge(&a.interior(rho)));
            }
        }
    }
    r
}

/// `[nabla_r, nabla_s] A` computed directly minus its curvature and
/// torsion expansion.
pub fn commutator_residual(
    a: &TensorValuedForm,
    geom: &ChartGeometry,
    r: usize,
    s: usize,
    sel: Connection,
) -> TensorValuedForm {
    geom.commutator_direct(r, s, a, sel)
        .sub(&geom.commutator_rhs(r, s, a, sel))
}

/// `nabla_m nabla_n A - nabla_(m nabla_n) A - 1/2 ([nabla_m, nabla_n] A)`
/// with the antisymmetric part taken from the curvature and torsion
/// expansion. When `R = 0` the last term is `-1/2 T^r_{mn} nabla_r A`.
pub fn nabla2_decomposition(
    a: &TensorValuedForm,
    geom: &ChartGeometry,
    m: usize,
    n: usize,
) -> TensorValuedForm {
    let sel = Connection::Primary;
    let mn = geom.nabla2(m, n, a, sel);
    let nm = geom.nabla2(n, m, a, sel);
    let half = crate::scalar::Rational::new(1.into(), 2.into());
    let sym = mn.add(&nm).scale_rational(&half);
    let anti = geom.commutator_rhs(m, n, a, sel).scale_rational(&half);
    mn.sub(&sym).sub(&anti)
}

/// `D D A - sum_upper R^u_c ^ A^{..c..} + sum_lower R^c_b ^ A_{..c..}`.
pub fn d_squared_residual(
    a: &TensorValuedForm,
    geom: &ChartGeometry,
    sel: Connection,
) -> TensorValuedForm {
    let d = geom.dimension();
    let dd = geom.exterior_covariant(&geom.exterior_covariant(a, sel), sel);
    let mut rhs = dd.zero_like();
    if a.degree() + 2 <= d {
        let curv = geom.curvature(sel);
        let k = a.upper_rank();
        let t = k + a.lower_rank();
        for (key, v) in a.components() {
            let f = &key[t..];
            for slot in 0..t {
                let s = key[slot];
                for (ck, cv) in curv.components() {
                    // ck = [mu, nu, form a, form b]
                    let (target, val) = if slot < k {
                        if ck[1] != s {
                            continue;
                        }
                        (ck[0], cv.mul(v))
                    } else {
                        if ck[0] != s {
                            continue;
                        }
                        (ck[1], cv.mul(v).neg())
                    };
                    let mut tensor = key[..t].to_vec();
                    tensor[slot] = target;
                    let mut form = ck[2..].to_vec();
                    form.extend_from_slice(f);
                    rhs.add_term(&tensor[..k], &tensor[k..], &form, val);
                }
            }
        }
    }
    dd.sub(&rhs)
}

/// `D T^r - R^r_s ^ dx^s` for the primary connection, as a `(1,0)` 3-form.
pub fn bianchi_torsion(geom: &ChartGeometry) -> TensorValuedForm {
    let d = geom.dimension();
    let sel = Connection::Primary;
    let dt = geom.exterior_covariant(geom.torsion(), sel);
    let mut rhs = dt.zero_like();
    if d >= 3 {
        for (ck, cv) in geom.curvature(sel).components() {
            let form = [ck[2], ck[3], ck[1]];
            rhs.add_term(&ck[..1], &[], &form, cv.clone());
        }
    }
    dt.sub(&rhs)
}

/// `D R` for the selected connection.
pub fn bianchi_curvature(geom: &ChartGeometry, sel: Connection) -> TensorValuedForm {
    geom.exterior_covariant(geom.curvature(sel), sel)
}
