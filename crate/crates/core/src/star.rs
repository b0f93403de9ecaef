//! Star products as truncated series in hbar, and the residuals of their
//! algebraic properties.

use crate::bracket::{check_dim, poisson_bracket, raised_curvature_slices};
use crate::constraints::{self, ConstraintId};
use crate::error::{Error, Result};
use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Connection, Mode};
use crate::scalar::{Rational, ScalarExpr};

/// Coefficients of `hbar^n`, `n = 0..=max_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarSeries {
    pub coefficients: Vec<TensorValuedForm>,
}

impl StarSeries {
    pub fn max_order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, n: usize) -> &TensorValuedForm {
        &self.coefficients[n]
    }
}

fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn parity_sign(p: usize) -> i64 {
    if p % 2 == 1 {
        -1
    } else {
        1
    }
}

/// `nabla_m theta^{np}` for the primary connection, indexed `[m][n][p]`.
pub fn nabla_theta(geom: &ChartGeometry) -> Vec<Vec<Vec<ScalarExpr>>> {
    let d = geom.dimension();
    let t = geom.theta_form();
    (0..d)
        .map(|m| {
            let nt = geom.nabla(m, &t, Connection::Primary);
            (0..d)
                .map(|n| {
                    (0..d)
                        .map(|p| nt.component(&[n as u8, p as u8], &[], &[]))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn require_forms_mode(
    geom: &ChartGeometry,
    a: &TensorValuedForm,
    b: &TensorValuedForm,
) -> Result<()> {
    if (a.degree() > 0 || b.degree() > 0) && geom.mode() == Mode::Poisson {
        return Err(Error::Mode(
            "products of forms of positive degree need a symplectic chart".into(),
        ));
    }
    Ok(())
}

/// Tensor fields on a Poisson chart need the covariant Jacobi pair (both
/// cyclic sums vanish exactly when the two Poisson variants do) and
/// `theta theta R = 0`.
fn require_poisson_tensor_premises(geom: &ChartGeometry) -> Result<()> {
    for id in [
        ConstraintId::PoissonJacobiNo3,
        ConstraintId::PoissonAssocNo4,
        ConstraintId::Theta2RZero,
    ] {
        if !constraints::holds(geom, id)? {
            return Err(Error::Precondition(format!(
                "second-order product of tensors needs {}",
                id.name()
            )));
        }
    }
    Ok(())
}

/// Second-order coefficient for tensor-valued forms.
pub fn c2(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    check_dim(geom, &[a, b])?;
    require_forms_mode(geom, a, b)?;
    if geom.mode() == Mode::Poisson && !(a.is_scalar_function() && b.is_scalar_function()) {
        require_poisson_tensor_premises(geom)?;
    }
    let d = geom.dimension();
    let (p, q) = (a.degree(), b.degree());
    let mut out = TensorValuedForm::zero(
        d,
        a.upper_rank() + b.upper_rank(),
        a.lower_rank() + b.lower_rank(),
        p + q,
    );
    let sel = Connection::Primary;
    let na = geom.nabla_all(a, sel);
    let nb = geom.nabla_all(b, sel);
    let nna = geom.nabla2_all(a, sel);
    let nnb = geom.nabla2_all(b, sel);
    let th = |i: usize, j: usize| geom.theta(i, j);

    // 1/2 theta theta nabla nabla A ^ nabla nabla B
    let half = frac(1, 2);
    for l1 in 0..d {
        for t1 in 0..d {
            if th(l1, t1).is_zero() {
                continue;
            }
            for l2 in 0..d {
                if nna[l1][l2].is_zero() {
                    continue;
                }
                for t2 in 0..d {
                    if th(l2, t2).is_zero() || nnb[t1][t2].is_zero() {
                        continue;
                    }
                    let c = th(l1, t1).mul(th(l2, t2)).scale(&half);
                    out.add_assign(&nna[l1][l2].wedge(&nnb[t1][t2]).scale(&c));
                }
            }
        }
    }

    // 1/3 (theta^{l1 t1} nabla_{t1} theta^{l2 t2} + 1/2 theta^{l2 f} theta^{t2 c} T^{l1}_{fc})
    //     (nabla_{l1} nabla_{l2} A ^ nabla_{t2} B + nabla_{t2} A ^ nabla_{l1} nabla_{l2} B)
    let nt = nabla_theta(geom);
    let third = frac(1, 3);
    for l1 in 0..d {
        for l2 in 0..d {
            for t2 in 0..d {
                let mut k = ScalarExpr::zero(d);
                for t1 in 0..d {
                    if !th(l1, t1).is_zero() && !nt[t1][l2][t2].is_zero() {
                        k = k.add(&th(l1, t1).mul(&nt[t1][l2][t2]));
                    }
                }
                for f in 0..d {
                    if th(l2, f).is_zero() {
                        continue;
                    }
                    for c in 0..d {
                        if th(t2, c).is_zero() {
                            continue;
                        }
                        let t = geom.torsion_component(l1, f, c);
                        if !t.is_zero() {
                            k = k.add(&th(l2, f).mul(th(t2, c)).mul(&t).scale(&half));
                        }
                    }
                }
                if k.is_zero() {
                    continue;
                }
                let k = k.scale(&third);
                let mut s = nna[l1][l2].wedge(&nb[t2]);
                s.add_assign(&na[t2].wedge(&nnb[l1][l2]));
                out.add_assign(&s.scale(&k));
            }
        }
    }

    if p == 0 || q == 0 {
        return Ok(out);
    }
    let rs = raised_curvature_slices(geom)?;
    let sp = parity_sign(p);

    // (-1)^p theta^{l1 t1} R~^{l2 t2} ^ nabla_{l1} i_{l2} A ^ nabla_{t1} i_{t2} B
    for l1 in 0..d {
        for t1 in 0..d {
            if th(l1, t1).is_zero() {
                continue;
            }
            for l2 in 0..d {
                let ia = na[l1].interior(l2);
                if ia.is_zero() {
                    continue;
                }
                for t2 in 0..d {
                    if rs[l2][t2].is_zero() {
                        continue;
                    }
                    let ib = nb[t1].interior(t2);
                    if ib.is_zero() {
                        continue;
                    }
                    let w = rs[l2][t2].wedge(&ia).wedge(&ib);
                    out.add_assign(&w.scale(th(l1, t1)).scale_int(sp));
                }
            }
        }
    }

    let ia: Vec<TensorValuedForm> = (0..d).map(|l| a.interior(l)).collect();
    let ib: Vec<TensorValuedForm> = (0..d).map(|l| b.interior(l)).collect();
    let iia: Vec<Vec<TensorValuedForm>> = (0..d)
        .map(|l1| (0..d).map(|l2| ia[l2].interior(l1)).collect())
        .collect();
    let iib: Vec<Vec<TensorValuedForm>> = (0..d)
        .map(|l1| (0..d).map(|l2| ib[l2].interior(l1)).collect())
        .collect();

    // -1/2 R~^{l1 t1} ^ R~^{l2 t2} ^ i_{l1} i_{l2} A ^ i_{t1} i_{t2} B
    if p >= 2 && q >= 2 {
        for l1 in 0..d {
            for t1 in 0..d {
                if rs[l1][t1].is_zero() {
                    continue;
                }
                for l2 in 0..d {
                    if iia[l1][l2].is_zero() {
                        continue;
                    }
                    for t2 in 0..d {
                        if rs[l2][t2].is_zero() || iib[t1][t2].is_zero() {
                            continue;
                        }
                        let w = rs[l1][t1]
                            .wedge(&rs[l2][t2])
                            .wedge(&iia[l1][l2])
                            .wedge(&iib[t1][t2]);
                        out.add_assign(&w.scale_rational(&frac(-1, 2)));
                    }
                }
            }
        }
    }

    // -1/3 R~^{l1 t1} ^ i_{t1} R~^{l2 t2} ^
    //     ((-1)^p i_{l1} i_{l2} A ^ i_{t2} B + i_{l2} A ^ i_{l1} i_{t2} B)
    for l1 in 0..d {
        for t1 in 0..d {
            if rs[l1][t1].is_zero() {
                continue;
            }
            for l2 in 0..d {
                for t2 in 0..d {
                    let ir = rs[l2][t2].interior(t1);
                    if ir.is_zero() {
                        continue;
                    }
                    let mut inner = iia[l1][l2].wedge(&ib[t2]).scale_int(sp);
                    inner.add_assign(&ia[l2].wedge(&iib[l1][t2]));
                    if inner.is_zero() {
                        continue;
                    }
                    let w = rs[l1][t1].wedge(&ir).wedge(&inner);
                    out.add_assign(&w.scale_rational(&frac(-1, 3)));
                }
            }
        }
    }
    Ok(out)
}

/// Coefficient `C_n` for `n <= 2` (`C_0` is the wedge product).
pub fn coefficient(
    n: usize,
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    match n {
        0 => {
            check_dim(geom, &[a, b])?;
            Ok(a.wedge(b))
        }
        1 => poisson_bracket(a, b, geom),
        2 => c2(a, b, geom),
        _ => Err(Error::UnsupportedOrder {
            order: n,
            reason: "form products are defined through second order".into(),
        }),
    }
}

/// `A * B` through `hbar^order`. Orders above 2 are available only for
/// scalar functions on torsion-free charts.
pub fn star(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
    order: usize,
) -> Result<StarSeries> {
    check_dim(geom, &[a, b])?;
    if a.is_scalar_function() && b.is_scalar_function() && geom.is_torsion_free() {
        return star_functions(a, b, geom, order);
    }
    if order > 2 {
        return Err(Error::UnsupportedOrder {
            order,
            reason: "products of forms and tensors are defined through second order".into(),
        });
    }
    require_forms_mode(geom, a, b)?;
    let coefficients = (0..=order)
        .map(|n| coefficient(n, a, b, geom))
        .collect::<Result<Vec<_>>>()?;
    Ok(StarSeries { coefficients })
}

/// `A * (B * C) - (A * B) * C`, coefficient by coefficient.
pub fn associator(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    c: &TensorValuedForm,
    geom: &ChartGeometry,
    order: usize,
) -> Result<Vec<TensorValuedForm>> {
    if order > 2 {
        return Err(Error::UnsupportedOrder {
            order,
            reason: "form products are defined through second order".into(),
        });
    }
    let ab: Vec<TensorValuedForm> = (0..=order)
        .map(|n| coefficient(n, a, b, geom))
        .collect::<Result<_>>()?;
    let bc: Vec<TensorValuedForm> = (0..=order)
        .map(|n| coefficient(n, b, c, geom))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut r = TensorValuedForm::zero(
            a.dimension(),
            a.upper_rank() + b.upper_rank() + c.upper_rank(),
            a.lower_rank() + b.lower_rank() + c.lower_rank(),
            a.degree() + b.degree() + c.degree(),
        );
        for i in 0..=n {
            r.add_assign(&coefficient(n - i, a, &bc[i], geom)?);
            r.add_assign(&coefficient(n - i, &ab[i], c, geom)?.neg());
        }
        out.push(r);
    }
    Ok(out)
}

/// Premises of the torsion-free closed form: `T = 0`, `R = 0`, `nabla theta = 0`.
pub fn check_torsion_free_premises(geom: &ChartGeometry) -> Result<()> {
    if !geom.is_torsion_free() {
        return Err(Error::Precondition("torsion does not vanish".into()));
    }
    if !geom.curvature(Connection::Primary).is_zero() {
        return Err(Error::Precondition("curvature does not vanish".into()));
    }
    let nt = nabla_theta(geom);
    if nt.iter().flatten().flatten().any(|e| !e.is_zero()) {
        return Err(Error::Precondition(
            "theta is not covariantly constant".into(),
        ));
    }
    Ok(())
}

/// `sum_n hbar^n / n! theta..theta nabla^n A ^ nabla^n B`.
pub fn star_torsion_free(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
    order: usize,
) -> Result<StarSeries> {
    check_dim(geom, &[a, b])?;
    require_forms_mode(geom, a, b)?;
    check_torsion_free_premises(geom)?;
    let d = geom.dimension();
    let sel = Connection::Primary;
    let mut coefficients = vec![a.wedge(b)];
    // Materialized n-th derivatives: the first n lower indices are the
    // derivative indices, outermost first.
    let mut da = a.clone();
    let mut db = b.clone();
    let mut factorial = Rational::from_integer(1.into());
    for n in 1..=order {
        da = geom.nabla_full(&da, sel);
        db = geom.nabla_full(&db, sel);
        factorial *= Rational::from_integer((n as i64).into());
        let mut acc = a.wedge(b).zero_like();
        contract_theta(geom, &da, &db, n, &ScalarExpr::one(d), &mut acc);
        coefficients.push(acc.scale_rational(&factorial.recip()));
    }
    Ok(StarSeries { coefficients })
}

/// Contracts the first `n` derivative slots of `da` and `db` pairwise with
/// theta.
fn contract_theta(
    geom: &ChartGeometry,
    da: &TensorValuedForm,
    db: &TensorValuedForm,
    n: usize,
    weight: &ScalarExpr,
    acc: &mut TensorValuedForm,
) {
    if n == 0 {
        acc.add_assign(&da.wedge(db).scale(weight));
        return;
    }
    let d = geom.dimension();
    for l in 0..d {
        let sa = da.slice_first_lower(l);
        if sa.is_zero() {
            continue;
        }
        for t in 0..d {
            let th = geom.theta(l, t);
            if th.is_zero() {
                continue;
            }
            let sb = db.slice_first_lower(t);
            if sb.is_zero() {
                continue;
            }
            contract_theta(geom, &sa, &sb, n - 1, &weight.mul(th), acc);
        }
    }
}

fn require_scalar(f: &TensorValuedForm) -> Result<ScalarExpr> {
    if !f.is_scalar_function() {
        return Err(Error::Shape("expected a scalar function".into()));
    }
    Ok(f.scalar_value())
}

fn require_torsion_free(geom: &ChartGeometry) -> Result<()> {
    if geom.is_torsion_free() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "the function product needs a torsion-free connection".into(),
        ))
    }
}

/// Derivative data of a scalar function: gradient, genuine second and
/// third covariant derivatives (`[n][r][s] = nabla_n nabla_r nabla_s f`).
struct Jet {
    d1: Vec<ScalarExpr>,
    d2: Vec<Vec<ScalarExpr>>,
    d3: Option<Vec<Vec<Vec<ScalarExpr>>>>,
}

fn jet(f: &ScalarExpr, geom: &ChartGeometry, third: bool) -> Jet {
    let d = geom.dimension();
    let sel = Connection::Primary;
    let f1 = geom.nabla_full(&TensorValuedForm::scalar(f.clone()), sel);
    let f2 = geom.nabla_full(&f1, sel);
    let d1 = (0..d).map(|s| f1.component(&[], &[s as u8], &[])).collect();
    let d2 = (0..d)
        .map(|r| {
            (0..d)
                .map(|s| f2.component(&[], &[r as u8, s as u8], &[]))
                .collect()
        })
        .collect();
    let d3 = third.then(|| {
        let f3 = geom.nabla_full(&f2, sel);
        (0..d)
            .map(|n| {
                (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|s| f3.component(&[], &[n as u8, r as u8, s as u8], &[]))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    });
    Jet { d1, d2, d3 }
}

/// `{f, g}` for scalars.
fn c1_scalar(fj: &Jet, gj: &Jet, geom: &ChartGeometry) -> ScalarExpr {
    let d = geom.dimension();
    let mut acc = ScalarExpr::zero(d);
    for m in 0..d {
        for n in 0..d {
            let t = geom.theta(m, n);
            if !t.is_zero() && !fj.d1[m].is_zero() && !gj.d1[n].is_zero() {
                acc = acc.add(&t.mul(&fj.d1[m]).mul(&gj.d1[n]));
            }
        }
    }
    acc
}

/// Contraction used for the `nabla theta nabla theta nabla f nabla g` term of
/// the second-order function coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GradientTerm {
    /// `+1/6 nabla_r theta^{mn} nabla_m theta^{rs} nabla_n f nabla_s g`.
    AsPrinted,
    /// The same contraction with the second bivector transposed,
    /// `+1/6 nabla_r theta^{mn} nabla_m theta^{sr} nabla_n f nabla_s g`.
    /// Only this one keeps the third-order product associative on curved
    /// torsion-free charts.
    #[default]
    Transposed,
}

impl GradientTerm {
    pub fn name(self) -> &'static str {
        match self {
            GradientTerm::AsPrinted => "printed",
            GradientTerm::Transposed => "transposed",
        }
    }
}

impl std::str::FromStr for GradientTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(GradientTerm::AsPrinted),
            "transposed" => Ok(GradientTerm::Transposed),
            _ => Err(Error::Input(format!(
                "gradient term must be `printed` or `transposed`, not `{s}`"
            ))),
        }
    }
}

impl serde::Serialize for GradientTerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn c2_scalar(
    fj: &Jet,
    gj: &Jet,
    geom: &ChartGeometry,
    nt: &[Vec<Vec<ScalarExpr>>],
    conv: GradientTerm,
) -> ScalarExpr {
    let d = geom.dimension();
    let th = |i: usize, j: usize| geom.theta(i, j);
    let mut acc = ScalarExpr::zero(d);
    // 1/2 theta^{mn} theta^{rs} nabla_m nabla_r f nabla_n nabla_s g
    let mut t1 = ScalarExpr::zero(d);
    for m in 0..d {
        for n in 0..d {
            if th(m, n).is_zero() {
                continue;
            }
            for r in 0..d {
                if fj.d2[m][r].is_zero() {
                    continue;
                }
                for s in 0..d {
                    if th(r, s).is_zero() || gj.d2[n][s].is_zero() {
                        continue;
                    }
                    t1 = t1.add(&th(m, n).mul(th(r, s)).mul(&fj.d2[m][r]).mul(&gj.d2[n][s]));
                }
            }
        }
    }
    acc = acc.add(&t1.scale(&frac(1, 2)));
    // 1/3 theta^{ms} nabla_s theta^{nr} (nabla_m nabla_n f nabla_r g + nabla_r f nabla_m nabla_n g)
    let mut t2 = ScalarExpr::zero(d);
    for m in 0..d {
        for s in 0..d {
            if th(m, s).is_zero() {
                continue;
            }
            for n in 0..d {
                for r in 0..d {
                    let k = &nt[s][n][r];
                    if k.is_zero() {
                        continue;
                    }
                    let inner = fj.d2[m][n].mul(&gj.d1[r]).add(&fj.d1[r].mul(&gj.d2[m][n]));
                    if !inner.is_zero() {
                        t2 = t2.add(&th(m, s).mul(k).mul(&inner));
                    }
                }
            }
        }
    }
    acc = acc.add(&t2.scale(&frac(1, 3)));
    // 1/6 nabla_r theta^{mn} nabla_m theta^{rs} nabla_n f nabla_s g
    let mut t3 = ScalarExpr::zero(d);
    for r in 0..d {
        for m in 0..d {
            for n in 0..d {
                if nt[r][m][n].is_zero() || fj.d1[n].is_zero() {
                    continue;
                }
                for s in 0..d {
                    if nt[m][r][s].is_zero() || gj.d1[s].is_zero() {
                        continue;
                    }
                    t3 = t3.add(&nt[r][m][n].mul(&nt[m][r][s]).mul(&fj.d1[n]).mul(&gj.d1[s]));
                }
            }
        }
    }
    let c = match conv {
        GradientTerm::AsPrinted => frac(1, 6),
        GradientTerm::Transposed => frac(-1, 6),
    };
    acc.add(&t3.scale(&c))
}

/// `(L_{X_f} nabla)^m_{nr}`, indexed `[m][n][r]`.
pub fn lie_derivative_connection(
    f: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<Vec<Vec<Vec<ScalarExpr>>>> {
    let fv = require_scalar(f)?;
    let fj = jet(&fv, geom, true);
    Ok(lie_derivative_from_jet(&fj, geom, &theta_derivatives(geom)))
}

struct ThetaDerivatives {
    /// `[m][n][p] = nabla_m theta^{np}`
    first: Vec<Vec<Vec<ScalarExpr>>>,
    /// `[a][b][n][p] = nabla_a nabla_b theta^{np}`
    second: Vec<Vec<Vec<Vec<ScalarExpr>>>>,
}

fn theta_derivatives(geom: &ChartGeometry) -> ThetaDerivatives {
    let d = geom.dimension();
    let sel = Connection::Primary;
    let t1 = geom.nabla_full(&geom.theta_form(), sel);
    let t2 = geom.nabla_full(&t1, sel);
    let first = (0..d)
        .map(|m| {
            (0..d)
                .map(|n| {
                    (0..d)
                        .map(|p| t1.component(&[n as u8, p as u8], &[m as u8], &[]))
                        .collect()
                })
                .collect()
        })
        .collect();
    let second = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    (0..d)
                        .map(|n| {
                            (0..d)
                                .map(|p| {
                                    t2.component(&[n as u8, p as u8], &[a as u8, b as u8], &[])
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    ThetaDerivatives { first, second }
}

/// `(L_X nabla)^m_{nr} = nabla_n nabla_r X^m + R^m_{r s n} X^s` for the
/// Hamiltonian field of `f`, where `[nabla_a, nabla_b] V^m = R^m_{s ab} V^s`.
fn lie_derivative_from_jet(
    fj: &Jet,
    geom: &ChartGeometry,
    td: &ThetaDerivatives,
) -> Vec<Vec<Vec<ScalarExpr>>> {
    let d = geom.dimension();
    let d3 = fj.d3.as_ref().expect("third derivatives");
    let mut out = vec![vec![vec![ScalarExpr::zero(d); d]; d]; d];
    for m in 0..d {
        for n in 0..d {
            for r in 0..d {
                let mut v = ScalarExpr::zero(d);
                for s in 0..d {
                    // theta^{sm} nabla_n nabla_r nabla_s f
                    v = v.add(&geom.theta(s, m).mul(&d3[n][r][s]));
                    // nabla_n theta^{sm} nabla_r nabla_s f
                    v = v.add(&td.first[n][s][m].mul(&fj.d2[r][s]));
                    // nabla_r theta^{sm} nabla_n nabla_s f
                    v = v.add(&td.first[r][s][m].mul(&fj.d2[n][s]));
                    // nabla_n nabla_r theta^{sm} nabla_s f
                    v = v.add(&td.second[n][r][s][m].mul(&fj.d1[s]));
                    // R^m_{r s n} X^s with X^s = theta^{ls} nabla_l f
                    let rc = geom.curvature_component(Connection::Primary, m, r, s, n);
                    if !rc.is_zero() {
                        for l in 0..d {
                            v = v.add(&rc.mul(geom.theta(l, s)).mul(&fj.d1[l]));
                        }
                    }
                }
                out[m][n][r] = v;
            }
        }
    }
    out
}

fn c3_scalar(
    lf: &[Vec<Vec<ScalarExpr>>],
    lg: &[Vec<Vec<ScalarExpr>>],
    geom: &ChartGeometry,
) -> ScalarExpr {
    let d = geom.dimension();
    let mut acc = ScalarExpr::zero(d);
    for r in 0..d {
        for s in 0..d {
            let t = geom.theta(r, s);
            if t.is_zero() {
                continue;
            }
            for m in 0..d {
                for n in 0..d {
                    if lf[m][n][r].is_zero() || lg[n][m][s].is_zero() {
                        continue;
                    }
                    acc = acc.add(&t.mul(&lf[m][n][r]).mul(&lg[n][m][s]));
                }
            }
        }
    }
    acc.scale(&frac(-1, 6))
}

fn check_function_order(order: usize) -> Result<()> {
    if order > 3 {
        return Err(Error::UnsupportedOrder {
            order,
            reason: "the function product is defined through third order".into(),
        });
    }
    Ok(())
}

/// Coefficients of `f * g` on a Poisson chart with a torsion-free
/// connection, through `hbar^order` (`order <= 3`).
pub fn star_functions(
    f: &TensorValuedForm,
    g: &TensorValuedForm,
    geom: &ChartGeometry,
    order: usize,
) -> Result<StarSeries> {
    star_functions_with(f, g, geom, order, GradientTerm::default())
}

pub fn star_functions_with(
    f: &TensorValuedForm,
    g: &TensorValuedForm,
    geom: &ChartGeometry,
    order: usize,
    conv: GradientTerm,
) -> Result<StarSeries> {
    check_dim(geom, &[f, g])?;
    let fv = require_scalar(f)?;
    let gv = require_scalar(g)?;
    require_torsion_free(geom)?;
    check_function_order(order)?;
    let td = theta_derivatives(geom);
    let c = function_coefficients(&fv, &gv, geom, &td, order, conv);
    Ok(StarSeries {
        coefficients: c.into_iter().map(TensorValuedForm::scalar).collect(),
    })
}

fn function_coefficients(
    f: &ScalarExpr,
    g: &ScalarExpr,
    geom: &ChartGeometry,
    td: &ThetaDerivatives,
    order: usize,
    conv: GradientTerm,
) -> Vec<ScalarExpr> {
    let third = order >= 3;
    let fj = jet(f, geom, third);
    let gj = jet(g, geom, third);
    let mut out = vec![f.mul(g)];
    if order >= 1 {
        out.push(c1_scalar(&fj, &gj, geom));
    }
    if order >= 2 {
        out.push(c2_scalar(&fj, &gj, geom, &td.first, conv));
    }
    if third {
        let lf = lie_derivative_from_jet(&fj, geom, td);
        let lg = lie_derivative_from_jet(&gj, geom, td);
        out.push(c3_scalar(&lf, &lg, geom));
    }
    out
}

/// Single coefficient `C_n(f, g)` of the function product.
pub fn function_coefficient(
    n: usize,
    f: &ScalarExpr,
    g: &ScalarExpr,
    geom: &ChartGeometry,
) -> Result<ScalarExpr> {
    function_coefficient_with(n, f, g, geom, GradientTerm::default())
}

pub fn function_coefficient_with(
    n: usize,
    f: &ScalarExpr,
    g: &ScalarExpr,
    geom: &ChartGeometry,
    conv: GradientTerm,
) -> Result<ScalarExpr> {
    require_torsion_free(geom)?;
    check_function_order(n)?;
    let td = theta_derivatives(geom);
    Ok(single_function_coefficient(n, f, g, geom, &td, conv))
}

fn single_function_coefficient(
    n: usize,
    f: &ScalarExpr,
    g: &ScalarExpr,
    geom: &ChartGeometry,
    td: &ThetaDerivatives,
    conv: GradientTerm,
) -> ScalarExpr {
    let fj = jet(f, geom, n >= 3);
    let gj = jet(g, geom, n >= 3);
    match n {
        0 => f.mul(g),
        1 => c1_scalar(&fj, &gj, geom),
        2 => c2_scalar(&fj, &gj, geom, &td.first, conv),
        _ => {
            let lf = lie_derivative_from_jet(&fj, geom, td);
            let lg = lie_derivative_from_jet(&gj, geom, td);
            c3_scalar(&lf, &lg, geom)
        }
    }
}

/// `f * (g * h) - (f * g) * h` for the function product.
pub fn associator_functions(
    f: &ScalarExpr,
    g: &ScalarExpr,
    h: &ScalarExpr,
    geom: &ChartGeometry,
    order: usize,
) -> Result<Vec<ScalarExpr>> {
    associator_functions_with(f, g, h, geom, order, GradientTerm::default())
}

pub fn associator_functions_with(
    f: &ScalarExpr,
    g: &ScalarExpr,
    h: &ScalarExpr,
    geom: &ChartGeometry,
    order: usize,
    conv: GradientTerm,
) -> Result<Vec<ScalarExpr>> {
    require_torsion_free(geom)?;
    check_function_order(order)?;
    let td = theta_derivatives(geom);
    let fg = function_coefficients(f, g, geom, &td, order, conv);
    let gh = function_coefficients(g, h, geom, &td, order, conv);
    let mut out = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut r = ScalarExpr::zero(geom.dimension());
        for i in 0..=n {
            r = r.add(&single_function_coefficient(
                n - i,
                f,
                &gh[i],
                geom,
                &td,
                conv,
            ));
            r = r.sub(&single_function_coefficient(
                n - i,
                &fg[i],
                h,
                geom,
                &td,
                conv,
            ));
        }
        out.push(r);
    }
    Ok(out)
}

/// `{A,{B,C}} + (-1)^{p(q+r)} {B,{C,A}} + (-1)^{(p+q)r} {C,{A,B}}` with all
/// tensor blocks ordered `(A, B, C)`.
pub fn graded_jacobiator(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    c: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    let (p, q, r) = (a.degree(), b.degree(), c.degree());
    let ka = (a.upper_rank(), a.lower_rank());
    let kb = (b.upper_rank(), b.lower_rank());
    let kc = (c.upper_rank(), c.lower_rank());
    let t1 = poisson_bracket(a, &poisson_bracket(b, c, geom)?, geom)?;
    let t2 = poisson_bracket(b, &poisson_bracket(c, a, geom)?, geom)?
        .reorder_blocks(&[kb, kc, ka], &[2, 0, 1])
        .scale_int(parity_sign(p * (q + r)));
    let t3 = poisson_bracket(c, &poisson_bracket(a, b, geom)?, geom)?
        .reorder_blocks(&[kc, ka, kb], &[1, 2, 0])
        .scale_int(parity_sign((p + q) * r));
    let mut out = t1;
    out.add_assign(&t2);
    out.add_assign(&t3);
    Ok(out)
}

/// `D{A,B} - {DA,B} - (-1)^p {A,DB}`.
pub fn leibniz_residual(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    geom.require_symplectic("the Leibniz residual")?;
    let sel = Connection::Primary;
    let lhs = geom.exterior_covariant(&poisson_bracket(a, b, geom)?, sel);
    let r1 = poisson_bracket(&geom.exterior_covariant(a, sel), b, geom)?;
    let r2 = poisson_bracket(a, &geom.exterior_covariant(b, sel), geom)?
        .scale_int(parity_sign(a.degree()));
    Ok(lhs.sub(&r1).sub(&r2))
}
