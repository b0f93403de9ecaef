//! Covariant Poisson brackets.

use crate::error::{Error, Result};
use crate::form::TensorValuedForm;
use crate::geometry::{ChartGeometry, Connection};

pub(crate) fn check_dim(geom: &ChartGeometry, forms: &[&TensorValuedForm]) -> Result<()> {
    for f in forms {
        if f.dimension() != geom.dimension() {
            return Err(Error::DimensionMismatch {
                expected: geom.dimension(),
                found: f.dimension(),
            });
        }
    }
    Ok(())
}

/// `R~^{lt}` as scalar-valued 2-forms, indexed `[l][t]`.
pub fn raised_curvature_slices(geom: &ChartGeometry) -> Result<Vec<Vec<TensorValuedForm>>> {
    let d = geom.dimension();
    let r = geom.raised_curvature()?;
    let mut out = vec![vec![TensorValuedForm::zero(d, 0, 0, 2); d]; d];
    for (k, v) in r.components() {
        out[k[0] as usize][k[1] as usize].add_key(k[2..].to_vec(), v.clone());
    }
    Ok(out)
}

fn result_zero(a: &TensorValuedForm, b: &TensorValuedForm) -> TensorValuedForm {
    TensorValuedForm::zero(
        a.dimension(),
        a.upper_rank() + b.upper_rank(),
        a.lower_rank() + b.lower_rank(),
        a.degree() + b.degree(),
    )
}

/// `theta^{lt} nabla_l A ^ nabla_t B`.
pub(crate) fn theta_term(
    geom: &ChartGeometry,
    na: &[TensorValuedForm],
    nb: &[TensorValuedForm],
    out: &mut TensorValuedForm,
) {
    let d = geom.dimension();
    for l in 0..d {
        if na[l].is_zero() {
            continue;
        }
        for t in 0..d {
            let th = geom.theta(l, t);
            if th.is_zero() || nb[t].is_zero() {
                continue;
            }
            out.add_assign(&na[l].wedge(&nb[t]).scale(th));
        }
    }
}

/// `{A, B} = theta^{lt} nabla_l A ^ nabla_t B + (-1)^p R~^{lt} ^ i_l A ^ i_t B`,
/// the second term only when both degrees are positive.
pub fn poisson_bracket(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    check_dim(geom, &[a, b])?;
    if a.degree() > 0 || b.degree() > 0 {
        geom.require_symplectic("the bracket of forms of positive degree")?;
    }
    let mut out = result_zero(a, b);
    let na = geom.nabla_all(a, Connection::Primary);
    let nb = geom.nabla_all(b, Connection::Primary);
    theta_term(geom, &na, &nb, &mut out);
    if a.degree() > 0 && b.degree() > 0 {
        let rs = raised_curvature_slices(geom)?;
        let d = geom.dimension();
        let sign = if a.degree() % 2 == 1 { -1 } else { 1 };
        for l in 0..d {
            let ia = a.interior(l);
            if ia.is_zero() {
                continue;
            }
            for t in 0..d {
                if rs[l][t].is_zero() {
                    continue;
                }
                let ib = b.interior(t);
                if ib.is_zero() {
                    continue;
                }
                out.add_assign(&rs[l][t].wedge(&ia).wedge(&ib).scale_int(sign));
            }
        }
    }
    Ok(out)
}

fn parity(n: usize) -> i64 {
    if n % 2 == 1 {
        -1
    } else {
        1
    }
}

fn ranks(a: &TensorValuedForm) -> (usize, usize) {
    (a.upper_rank(), a.lower_rank())
}

/// `{A, B} - (-1)^{pq+1} {B, A}` with the tensor blocks of `{B, A}` put
/// back in the order `(A, B)`.
pub fn graded_symmetry_residual(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    let ab = poisson_bracket(a, b, geom)?;
    let ba = poisson_bracket(b, a, geom)?.swap_blocks(b.upper_rank(), b.lower_rank());
    Ok(ab.add(&ba.scale_int(parity(a.degree() * b.degree()))))
}

/// `{A ^ B, C} - A ^ {B, C} - (-1)^{qr} {A, C} ^ B`, blocks ordered `(A, B, C)`.
pub fn graded_product_residual(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    c: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    let lhs = poisson_bracket(&a.wedge(b), c, geom)?;
    let first = a.wedge(&poisson_bracket(b, c, geom)?);
    let second = poisson_bracket(a, c, geom)?
        .wedge(b)
        .reorder_blocks(&[ranks(a), ranks(c), ranks(b)], &[0, 2, 1])
        .scale_int(parity(b.degree() * c.degree()));
    Ok(lhs.sub(&first).sub(&second))
}

/// Whether `{A, B}` has degree `p + q` and type `(k + m, l + n)`.
pub fn bracket_degree_holds(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<bool> {
    let r = poisson_bracket(a, b, geom)?;
    Ok(r.degree() == a.degree() + b.degree()
        && r.upper_rank() == a.upper_rank() + b.upper_rank()
        && r.lower_rank() == a.lower_rank() + b.lower_rank()
        && r.components().all(|(k, _)| {
            let (_, _, f) = r.split_key(k);
            f.len() == r.degree()
        }))
}

/// Bracket of tensor fields (zero-forms), valid on Poisson charts.
pub fn pb_tensor_poisson(
    a: &TensorValuedForm,
    b: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    check_dim(geom, &[a, b])?;
    if a.degree() > 0 || b.degree() > 0 {
        return Err(Error::Shape(
            "the tensor bracket takes zero-form operands".into(),
        ));
    }
    let mut out = result_zero(a, b);
    let na = geom.nabla_all(a, Connection::Primary);
    let nb = geom.nabla_all(b, Connection::Primary);
    theta_term(geom, &na, &nb, &mut out);
    Ok(out)
}

/// `X_f^m = theta^{nm} d_n f` as a `(1,0)` zero-form.
pub fn hamiltonian_field(f: &TensorValuedForm, geom: &ChartGeometry) -> Result<TensorValuedForm> {
    check_dim(geom, &[f])?;
    if !f.is_scalar_function() {
        return Err(Error::Shape(
            "the Hamiltonian field needs a scalar function".into(),
        ));
    }
    let d = geom.dimension();
    let fv = f.scalar_value();
    let grad: Vec<_> = (0..d).map(|n| fv.derivative(n)).collect();
    let mut out = TensorValuedForm::zero(d, 1, 0, 0);
    for m in 0..d {
        for (n, g) in grad.iter().enumerate() {
            let th = geom.theta(n, m);
            if !th.is_zero() && !g.is_zero() {
                out.add_key(vec![m as u8], th.mul(g));
            }
        }
    }
    Ok(out)
}

/// `nabla_X A = X^n nabla_n A` for a vector field `X`.
pub fn directional_derivative(
    x: &TensorValuedForm,
    a: &TensorValuedForm,
    geom: &ChartGeometry,
) -> Result<TensorValuedForm> {
    check_dim(geom, &[x, a])?;
    if x.shape()
        != (crate::form::Shape {
            upper: 1,
            lower: 0,
            degree: 0,
        })
    {
        return Err(Error::Shape("direction must be a vector field".into()));
    }
    let mut out = a.zero_like();
    for n in 0..geom.dimension() {
        let c = x.component(&[n as u8], &[], &[]);
        if !c.is_zero() {
            out.add_assign(&geom.nabla(n, a, Connection::Primary).scale(&c));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mode, SpecialChartSpec};
    use crate::scalar::{parse_scalar, Rational, ScalarExpr};

    fn s(t: &str) -> ScalarExpr {
        parse_scalar(t, 2).unwrap()
    }

    fn moyal() -> ChartGeometry {
        let theta = vec![vec![s("0"), s("1")], vec![s("-1"), s("0")]];
        let gamma = vec![vec![vec![ScalarExpr::zero(2); 2]; 2]; 2];
        ChartGeometry::new(2, Mode::Symplectic, theta, gamma).unwrap()
    }

    fn f(t: &str) -> TensorValuedForm {
        TensorValuedForm::scalar(s(t))
    }

    #[test]
    fn moyal_brackets() {
        let g = moyal();
        assert_eq!(poisson_bracket(&f("x1"), &f("x2"), &g).unwrap(), f("1"));
        let dx1 = TensorValuedForm::dx(2, 0);
        let dx2 = TensorValuedForm::dx(2, 1);
        let b = poisson_bracket(&dx1, &dx2, &g).unwrap();
        assert!(b.is_zero());
        assert_eq!(b.degree(), 2);
    }

    #[test]
    fn special_chart_bracket_of_coordinates() {
        let mut spec = SpecialChartSpec::new(2);
        spec.g.insert((0, 1), Rational::from_integer(1.into()));
        spec.f.insert((0, 1, 0), Rational::from_integer(1.into()));
        let g = ChartGeometry::special(&spec).unwrap();
        assert_eq!(poisson_bracket(&f("x1"), &f("x2"), &g).unwrap(), f("1+x1"));
    }

    #[test]
    fn hamiltonian_field_signs() {
        let g = moyal();
        let x = hamiltonian_field(&f("x1"), &g).unwrap();
        assert_eq!(x.component(&[1], &[], &[]), s("1"));
        assert_eq!(x.component(&[0], &[], &[]), s("0"));
        let y = hamiltonian_field(&f("x2"), &g).unwrap();
        assert_eq!(y.component(&[0], &[], &[]), s("-1"));
    }
}
