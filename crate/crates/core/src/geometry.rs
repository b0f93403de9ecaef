//! Chart geometries: Poisson bivector, symplectic form, connection
//! coefficients, torsion and the two curvatures.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::form::TensorValuedForm;
use crate::scalar::{Rational, ScalarExpr, MAX_VARS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Symplectic,
    Poisson,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Symplectic => "symplectic",
            Mode::Poisson => "poisson",
        }
    }
}

/// Which of the two connections built from one coefficient array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connection {
    /// `Gamma^r_{mn}` as given.
    Primary,
    /// `Gamma^r_{nm}`: lower indices swapped.
    Tilde,
}

/// Constant data of a quadratic Poisson bivector
/// `theta^{ab} = 1/2 rtilde[a,b,c,e] x^c x^e + f[a,b,c] x^c + g[a,b]`.
/// Entries are completed antisymmetrically in `(a, b)`; indices 0-based.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecialChartSpec {
    pub dim: usize,
    pub g: BTreeMap<(usize, usize), Rational>,
    pub f: BTreeMap<(usize, usize, usize), Rational>,
    pub rtilde: BTreeMap<(usize, usize, usize, usize), Rational>,
}

impl SpecialChartSpec {
    pub fn new(dim: usize) -> Self {
        SpecialChartSpec {
            dim,
            ..Default::default()
        }
    }

    /// The bivector as a full antisymmetric matrix.
    pub fn theta(&self) -> Result<Vec<Vec<ScalarExpr>>> {
        let d = self.dim;
        check_dim(d)?;
        let mut t = vec![vec![ScalarExpr::zero(d); d]; d];
        let check = |i: usize| {
            if i >= d {
                Err(Error::IndexOutOfRange {
                    index: i + 1,
                    dimension: d,
                })
            } else {
                Ok(())
            }
        };
        let mut put = |a: usize, b: usize, e: ScalarExpr| -> Result<()> {
            check(a)?;
            check(b)?;
            if a == b {
                if e.is_zero() {
                    return Ok(());
                }
                return Err(Error::InvalidChart(format!(
                    "diagonal coefficient for ({}, {}) in an antisymmetric pair",
                    a + 1,
                    b + 1
                )));
            }
            t[a][b] = t[a][b].add(&e);
            t[b][a] = t[b][a].sub(&e);
            Ok(())
        };
        for (&(a, b), c) in &self.g {
            put(a, b, ScalarExpr::from_rational(d, c.clone()))?;
        }
        for (&(a, b, c), v) in &self.f {
            check(c)?;
            put(a, b, ScalarExpr::coordinate(d, c).scale(v))?;
        }
        let half = Rational::new(1.into(), 2.into());
        for (&(a, b, c, e), v) in &self.rtilde {
            check(c)?;
            check(e)?;
            let x = ScalarExpr::coordinate(d, c).mul(&ScalarExpr::coordinate(d, e));
            put(a, b, x.scale(&(v * &half)))?;
        }
        Ok(t)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_VARS {
        Err(Error::UnsupportedDimension(d))
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ChartGeometry {
    dim: usize,
    mode: Mode,
    theta: Vec<Vec<ScalarExpr>>,
    omega: Option<Vec<Vec<ScalarExpr>>>,
    gamma: Vec<ScalarExpr>,
    /// Nonzero entries `(r, m, n)` of the primary coefficient array.
    gamma_support: Vec<(usize, usize, usize)>,
    torsion: TensorValuedForm,
    curvature: TensorValuedForm,
    curvature_tilde: TensorValuedForm,
    raised_tilde: Option<TensorValuedForm>,
}

impl ChartGeometry {
    /// Builds a chart from a full bivector matrix and a coefficient array
    /// indexed `gamma[r][m][n] = Gamma^r_{mn}`.
    pub fn new(
        dim: usize,
        mode: Mode,
        theta: Vec<Vec<ScalarExpr>>,
        gamma: Vec<Vec<Vec<ScalarExpr>>>,
    ) -> Result<Self> {
        check_dim(dim)?;
        if theta.len() != dim || theta.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidChart(format!("theta must be {dim}x{dim}")));
        }
        if gamma.len() != dim
            || gamma
                .iter()
                .any(|a| a.len() != dim || a.iter().any(|b| b.len() != dim))
        {
            return Err(Error::InvalidChart(format!(
                "gamma must be {dim}x{dim}x{dim}"
            )));
        }
        for row in theta.iter().chain(gamma.iter().flatten()) {
            for e in row {
                if e.dimension() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: e.dimension(),
                    });
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                if !theta[i][j].add(&theta[j][i]).is_zero() {
                    return Err(Error::InvalidChart(format!(
                        "theta is not antisymmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let omega = match mode {
            Mode::Symplectic => Some(invert(&theta).ok_or_else(|| {
                Error::InvalidChart("theta is degenerate in symplectic mode".into())
            })?),
            Mode::Poisson => None,
        };
        let flat: Vec<ScalarExpr> = gamma.into_iter().flatten().flatten().collect();
        let mut gamma_support = Vec::new();
        for r in 0..dim {
            for m in 0..dim {
                for n in 0..dim {
                    if !flat[(r * dim + m) * dim + n].is_zero() {
                        gamma_support.push((r, m, n));
                    }
                }
            }
        }
        let mut g = ChartGeometry {
            dim,
            mode,
            theta,
            omega,
            gamma: flat,
            gamma_support,
            torsion: TensorValuedForm::zero(dim, 1, 0, 2),
            curvature: TensorValuedForm::zero(dim, 1, 1, 2),
            curvature_tilde: TensorValuedForm::zero(dim, 1, 1, 2),
            raised_tilde: None,
        };
        g.torsion = g.compute_torsion();
        g.curvature = g.compute_curvature(Connection::Primary);
        g.curvature_tilde = g.compute_curvature(Connection::Tilde);
        if mode == Mode::Symplectic {
            g.raised_tilde = Some(g.compute_raised_tilde());
        }
        Ok(g)
    }

    /// The chart of a quadratic bivector with `Gamma^a_{bc} = theta^{ae} d_b omega_{ec}`.
    pub fn special(spec: &SpecialChartSpec) -> Result<Self> {
        let d = spec.dim;
        let theta = spec.theta()?;
        let omega = invert(&theta)
            .ok_or_else(|| Error::InvalidChart("special chart theta is degenerate".into()))?;
        let gamma = special_gamma(&theta, &omega);
        ChartGeometry::new(d, Mode::Symplectic, theta, gamma)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn theta(&self, a: usize, b: usize) -> &ScalarExpr {
        &self.theta[a][b]
    }

    pub fn omega(&self, a: usize, b: usize) -> Option<&ScalarExpr> {
        self.omega.as_ref().map(|o| &o[a][b])
    }

    pub fn require_symplectic(&self, what: &str) -> Result<()> {
        match self.mode {
            Mode::Symplectic => Ok(()),
            Mode::Poisson => Err(Error::Mode(format!("{what} needs a symplectic chart"))),
        }
    }

    /// `Gamma^r_{mn}` for the primary selector, `Gamma^r_{nm}` for tilde.
    pub fn gamma(&self, sel: Connection, r: usize, m: usize, n: usize) -> &ScalarExpr {
        let d = self.dim;
        match sel {
            Connection::Primary => &self.gamma[(r * d + m) * d + n],
            Connection::Tilde => &self.gamma[(r * d + n) * d + m],
        }
    }

    /// Nonzero `(r, m, n)` with respect to the selector's index order.
    pub fn gamma_support(
        &self,
        sel: Connection,
    ) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.gamma_support.iter().map(move |&(r, m, n)| match sel {
            Connection::Primary => (r, m, n),
            Connection::Tilde => (r, n, m),
        })
    }

    pub fn gamma_is_zero(&self) -> bool {
        self.gamma_support.is_empty()
    }

    /// `T^r_{mn} = Gamma^r_{mn} - Gamma^r_{nm}`.
    pub fn torsion_component(&self, r: usize, m: usize, n: usize) -> ScalarExpr {
        self.gamma(Connection::Primary, r, m, n)
            .sub(self.gamma(Connection::Primary, r, n, m))
    }

    /// Torsion two-forms `T^r` as a `(1,0)`-valued 2-form.
    pub fn torsion(&self) -> &TensorValuedForm {
        &self.torsion
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.is_zero()
    }

    /// `R^m_n` (primary) or `R~^m_n` (tilde) as a `(1,1)`-valued 2-form.
    pub fn curvature(&self, sel: Connection) -> &TensorValuedForm {
        match sel {
            Connection::Primary => &self.curvature,
            Connection::Tilde => &self.curvature_tilde,
        }
    }

    /// `R~^{mn} = theta^{mr} R~^n_r` as a `(2,0)`-valued 2-form.
    pub fn raised_curvature(&self) -> Result<&TensorValuedForm> {
        self.raised_tilde
            .as_ref()
            .ok_or_else(|| Error::Mode("raised curvature needs a symplectic chart".into()))
    }

    /// `R^m_{n a b}` as a scalar.
    pub fn curvature_component(
        &self,
        sel: Connection,
        m: usize,
        n: usize,
        a: usize,
        b: usize,
    ) -> ScalarExpr {
        self.curvature(sel)
            .component(&[m as u8], &[n as u8], &[a as u8, b as u8])
    }

    /// The bivector as a `(2,0)` zero-form.
    pub fn theta_form(&self) -> TensorValuedForm {
        let mut f = TensorValuedForm::zero(self.dim, 2, 0, 0);
        for a in 0..self.dim {
            for b in 0..self.dim {
                f.add_key(vec![a as u8, b as u8], self.theta[a][b].clone());
            }
        }
        f
    }

    fn compute_torsion(&self) -> TensorValuedForm {
        let mut t = TensorValuedForm::zero(self.dim, 1, 0, 2);
        for r in 0..self.dim {
            for m in 0..self.dim {
                for n in m + 1..self.dim {
                    t.add_key(
                        vec![r as u8, m as u8, n as u8],
                        self.torsion_component(r, m, n),
                    );
                }
            }
        }
        t
    }

    /// `R^m_{n ab} = d_a G^m_{bn} - d_b G^m_{an} + G^m_{ar} G^r_{bn} - G^m_{br} G^r_{an}`.
    fn compute_curvature(&self, sel: Connection) -> TensorValuedForm {
        let d = self.dim;
        let g = |r, m, n| self.gamma(sel, r, m, n);
        let mut out = TensorValuedForm::zero(d, 1, 1, 2);
        for mu in 0..d {
            for nu in 0..d {
                for a in 0..d {
                    for b in a + 1..d {
                        let mut v = g(mu, b, nu).derivative(a).sub(&g(mu, a, nu).derivative(b));
                        for r in 0..d {
                            v = v.add(&g(mu, a, r).mul(g(r, b, nu)));
                            v = v.sub(&g(mu, b, r).mul(g(r, a, nu)));
                        }
                        out.add_key(vec![mu as u8, nu as u8, a as u8, b as u8], v);
                    }
                }
            }
        }
        out
    }

    fn compute_raised_tilde(&self) -> TensorValuedForm {
        let d = self.dim;
        let mut out = TensorValuedForm::zero(d, 2, 0, 2);
        for (k, v) in self.curvature_tilde.components() {
            // k = [nu, rho, a, b] holds R~^nu_rho
            let (nu, rho) = (k[0] as usize, k[1] as usize);
            for mu in 0..d {
                let t = &self.theta[mu][rho];
                if !t.is_zero() {
                    out.add_key(vec![mu as u8, nu as u8, k[2], k[3]], t.mul(v));
                }
            }
        }
        out
    }
}

/// `Gamma^a_{bc} = theta^{ae} d_b omega_{ec}`.
pub fn special_gamma(
    theta: &[Vec<ScalarExpr>],
    omega: &[Vec<ScalarExpr>],
) -> Vec<Vec<Vec<ScalarExpr>>> {
    let d = theta.len();
    let mut out = vec![vec![vec![ScalarExpr::zero(d); d]; d]; d];
    for b in 0..d {
        let domega: Vec<Vec<ScalarExpr>> = omega
            .iter()
            .map(|row| row.iter().map(|e| e.derivative(b)).collect())
            .collect();
        for a in 0..d {
            for c in 0..d {
                let mut v = ScalarExpr::zero(d);
                for e in 0..d {
                    if !theta[a][e].is_zero() && !domega[e][c].is_zero() {
                        v = v.add(&theta[a][e].mul(&domega[e][c]));
                    }
                }
                out[a][b][c] = v;
            }
        }
    }
    out
}

/// Exact inverse by Gauss-Jordan elimination, pivoting on the first entry
/// that is not identically zero. `None` for a singular matrix.
pub fn invert(m: &[Vec<ScalarExpr>]) -> Option<Vec<Vec<ScalarExpr>>> {
    let d = m.len();
    let mut a: Vec<Vec<ScalarExpr>> = m.to_vec();
    let mut inv: Vec<Vec<ScalarExpr>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        ScalarExpr::one(d)
                    } else {
                        ScalarExpr::zero(d)
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..d {
            a[col][j] = a[col][j].div(&p).ok()?;
            inv[col][j] = inv[col][j].div(&p).ok()?;
        }
        for r in 0..d {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..d {
                let x = a[r][j].sub(&factor.mul(&a[col][j]));
                a[r][j] = x;
                let y = inv[r][j].sub(&factor.mul(&inv[col][j]));
                inv[r][j] = y;
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_scalar;

    fn s(t: &str) -> ScalarExpr {
        parse_scalar(t, 2).unwrap()
    }

    fn zero_gamma(d: usize) -> Vec<Vec<Vec<ScalarExpr>>> {
        vec![vec![vec![ScalarExpr::zero(d); d]; d]; d]
    }

    fn theta2(t12: &str) -> Vec<Vec<ScalarExpr>> {
        vec![vec![s("0"), s(t12)], vec![s(t12).neg(), s("0")]]
    }

    #[test]
    fn moyal_is_flat() {
        let g = ChartGeometry::new(2, Mode::Symplectic, theta2("1"), zero_gamma(2)).unwrap();
        assert_eq!(g.omega(0, 1).unwrap(), &s("-1"));
        assert!(g.torsion().is_zero());
        assert!(g.curvature(Connection::Primary).is_zero());
        assert!(g.raised_curvature().unwrap().is_zero());
    }

    #[test]
    fn curved_chart_curvature() {
        let mut gamma = zero_gamma(2);
        gamma[0][0][1] = s("x2");
        let g = ChartGeometry::new(2, Mode::Symplectic, theta2("1"), gamma).unwrap();
        assert_eq!(
            g.curvature_component(Connection::Primary, 0, 1, 0, 1),
            s("-1")
        );
    }

    #[test]
    fn special_linear_chart() {
        let mut spec = SpecialChartSpec::new(2);
        spec.g.insert((0, 1), Rational::from_integer(1.into()));
        spec.f.insert((0, 1, 0), Rational::from_integer(1.into()));
        let g = ChartGeometry::special(&spec).unwrap();
        let m = s("-1/(1+x1)");
        assert_eq!(g.gamma(Connection::Primary, 0, 0, 0), &m);
        assert_eq!(g.gamma(Connection::Primary, 1, 0, 1), &m);
        assert_eq!(g.torsion_component(1, 0, 1), m);
        assert!(g.curvature(Connection::Primary).is_zero());
        assert!(g.curvature(Connection::Tilde).is_zero());
    }

    #[test]
    fn degenerate_theta_rejected_in_symplectic_mode() {
        let t = vec![vec![s("0"); 2]; 2];
        assert!(ChartGeometry::new(2, Mode::Symplectic, t.clone(), zero_gamma(2)).is_err());
        assert!(ChartGeometry::new(2, Mode::Poisson, t, zero_gamma(2)).is_ok());
    }

    #[test]
    fn non_antisymmetric_theta_rejected() {
        let t = vec![vec![s("0"), s("1")], vec![s("1"), s("0")]];
        assert!(matches!(
            ChartGeometry::new(2, Mode::Poisson, t, zero_gamma(2)),
            Err(Error::InvalidChart(_))
        ));
    }
}
