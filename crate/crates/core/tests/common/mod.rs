#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use covstar::geometry::{Connection, Mode};
use covstar::random::random_polynomial;
use covstar::scalar::{Rational, ScalarExpr};
use covstar::star::GradientTerm;
use covstar::{ChartGeometry, SpecialChartSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// `theta^{12} = g + f_c x^c + 1/2 r_{ce} x^c x^e` with `g != 0`.
pub fn planar_spec() -> impl Strategy<Value = SpecialChartSpec> {
    (
        1i64..=3,
        -2i64..=2,
        -2i64..=2,
        -2i64..=2,
        -2i64..=2,
        -2i64..=2,
    )
        .prop_map(|(g, f1, f2, r11, r12, r22)| {
            let mut spec = SpecialChartSpec::new(2);
            spec.g.insert((0, 1), rat(g));
            spec.f.insert((0, 1, 0), rat(f1));
            spec.f.insert((0, 1, 1), rat(f2));
            spec.rtilde.insert((0, 1, 0, 0), rat(r11));
            spec.rtilde.insert((0, 1, 0, 1), rat(r12));
            spec.rtilde.insert((0, 1, 1, 0), rat(r12));
            spec.rtilde.insert((0, 1, 1, 1), rat(r22));
            spec
        })
}

/// Four-dimensional quadratic bivectors around `theta^{12} = theta^{34} = 1`
/// with a few sparse linear and quadratic terms.
pub fn spec4() -> impl Strategy<Value = SpecialChartSpec> {
    (
        prop::collection::vec((0usize..6, 0usize..4, -1i64..=1), 0..3),
        prop::collection::vec((0usize..6, 0usize..4, 0usize..4, -1i64..=1), 0..2),
    )
        .prop_map(|(lin, quad)| {
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            let mut spec = SpecialChartSpec::new(4);
            spec.g.insert((0, 1), rat(1));
            spec.g.insert((2, 3), rat(1));
            for (p, c, v) in lin {
                let (a, b) = pairs[p];
                *spec.f.entry((a, b, c)).or_insert_with(|| rat(0)) += rat(v);
            }
            for (p, c, e, v) in quad {
                let (a, b) = pairs[p];
                *spec.rtilde.entry((a, b, c, e)).or_insert_with(|| rat(0)) += rat(v);
                *spec.rtilde.entry((a, b, e, c)).or_insert_with(|| rat(0)) += rat(v);
            }
            spec
        })
}

/// `theta^{12} = 1` with random polynomial connection coefficients, about
/// half of them zero.
pub fn random_gamma_chart(seed: u64) -> ChartGeometry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2;
    let mut theta = vec![vec![ScalarExpr::zero(d); d]; d];
    theta[0][1] = ScalarExpr::one(d);
    theta[1][0] = ScalarExpr::one(d).neg();
    let gamma = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            if rng.gen_bool(0.5) {
                                random_polynomial(&mut rng, d, 1)
                            } else {
                                ScalarExpr::zero(d)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    ChartGeometry::new(d, Mode::Symplectic, theta, gamma).unwrap()
}

/// For `theta^{12} = t` in two dimensions, `Gamma^a_{bc} = theta^{ae} d_b omega_{ec}`
/// reduces to `Gamma^1_{b1} = Gamma^2_{b2} = -d_b t / t`, all others zero.
pub fn planar_oracle(t: &ScalarExpr) -> Vec<Vec<Vec<ScalarExpr>>> {
    (0..2)
        .map(|r| {
            (0..2)
                .map(|m| {
                    (0..2)
                        .map(|n| {
                            if r == n {
                                t.derivative(m).div(t).unwrap().neg()
                            } else {
                                ScalarExpr::zero(2)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `nabla_m nabla_r f = d_m d_r f - Gamma^l_{mr} d_l f`.
pub fn hess(g: &ChartGeometry, f: &ScalarExpr, m: usize, r: usize) -> ScalarExpr {
    let mut v = f.derivative(r).derivative(m);
    for l in 0..g.dimension() {
        v = v.sub(&g.gamma(Connection::Primary, l, m, r).mul(&f.derivative(l)));
    }
    v
}

/// `nabla_s theta^{nr} = d_s theta^{nr} + Gamma^n_{sl} theta^{lr} + Gamma^r_{sl} theta^{nl}`.
pub fn ntheta(g: &ChartGeometry, s: usize, n: usize, r: usize) -> ScalarExpr {
    let mut v = g.theta(n, r).derivative(s);
    for l in 0..g.dimension() {
        v = v.add(&g.gamma(Connection::Primary, n, s, l).mul(g.theta(l, r)));
        v = v.add(&g.gamma(Connection::Primary, r, s, l).mul(g.theta(n, l)));
    }
    v
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Second-order function coefficient summed term by term.
pub fn c2_oracle(
    g: &ChartGeometry,
    f: &ScalarExpr,
    h: &ScalarExpr,
    conv: GradientTerm,
) -> ScalarExpr {
    let d = g.dimension();
    let th = |a: usize, b: usize| g.theta(a, b).clone();
    let mut t1 = ScalarExpr::zero(d);
    let mut t2 = ScalarExpr::zero(d);
    let mut t3 = ScalarExpr::zero(d);
    for m in 0..d {
        for n in 0..d {
            for r in 0..d {
                for s in 0..d {
                    t1 = t1.add(
                        &th(m, n)
                            .mul(&th(r, s))
                            .mul(&hess(g, f, m, r))
                            .mul(&hess(g, h, n, s)),
                    );
                    let k = th(m, s).mul(&ntheta(g, s, n, r));
                    let inner = hess(g, f, m, n)
                        .mul(&h.derivative(r))
                        .add(&f.derivative(r).mul(&hess(g, h, m, n)));
                    t2 = t2.add(&k.mul(&inner));
                    let second = match conv {
                        GradientTerm::AsPrinted => ntheta(g, m, r, s),
                        GradientTerm::Transposed => ntheta(g, m, s, r),
                    };
                    t3 = t3.add(
                        &ntheta(g, r, m, n)
                            .mul(&second)
                            .mul(&f.derivative(n))
                            .mul(&h.derivative(s)),
                    );
                }
            }
        }
    }
    t1.scale(&frac(1, 2))
        .add(&t2.scale(&frac(1, 3)))
        .add(&t3.scale(&frac(1, 6)))
}

/// `theta^{12} = 1` with a random symmetric connection.
pub fn torsion_free_chart(seed: u64) -> ChartGeometry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2;
    let mut theta = vec![vec![ScalarExpr::zero(d); d]; d];
    theta[0][1] = ScalarExpr::one(d);
    theta[1][0] = ScalarExpr::one(d).neg();
    let mut gamma = vec![vec![vec![ScalarExpr::zero(d); d]; d]; d];
    for r in 0..d {
        for m in 0..d {
            for n in m..d {
                if rng.gen_bool(0.6) {
                    let v = random_polynomial(&mut rng, d, 1);
                    gamma[r][m][n] = v.clone();
                    gamma[r][n][m] = v;
                }
            }
        }
    }
    ChartGeometry::new(d, Mode::Symplectic, theta, gamma).unwrap()
}

pub fn polys(seed: u64, d: usize, n: usize, deg: usize) -> Vec<ScalarExpr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_polynomial(&mut rng, d, deg))
        .collect()
}

/// Seeded counterpart of [`planar_spec`].
pub fn random_planar_spec<R: Rng>(rng: &mut R) -> SpecialChartSpec {
    let mut spec = SpecialChartSpec::new(2);
    spec.g.insert((0, 1), rat(rng.gen_range(1..=3)));
    for c in 0..2 {
        spec.f.insert((0, 1, c), rat(rng.gen_range(-2..=2)));
    }
    let r12 = rat(rng.gen_range(-2..=2));
    spec.rtilde.insert((0, 1, 0, 0), rat(rng.gen_range(-2..=2)));
    spec.rtilde.insert((0, 1, 0, 1), r12.clone());
    spec.rtilde.insert((0, 1, 1, 0), r12);
    spec.rtilde.insert((0, 1, 1, 1), rat(rng.gen_range(-2..=2)));
    spec
}
