mod common;

use common::{c2_oracle, polys, torsion_free_chart};

use covstar::geometry::Connection;
use covstar::io::fixture;
use covstar::scalar::{parse_scalar, ScalarExpr};
use covstar::star::{
    associator, associator_functions, function_coefficient_with, leibniz_residual, star,
    star_functions, GradientTerm,
};
use covstar::{Error, TensorValuedForm};
use proptest::prelude::*;

fn sc(text: &str, d: usize) -> TensorValuedForm {
    TensorValuedForm::scalar(parse_scalar(text, d).unwrap())
}

fn coeffs(a: &str, b: &str) -> Vec<ScalarExpr> {
    let g = fixture("moyal2").unwrap();
    star(&sc(a, 2), &sc(b, 2), &g, 2)
        .unwrap()
        .coefficients
        .iter()
        .map(|c| c.scalar_value())
        .collect()
}

fn p(text: &str) -> ScalarExpr {
    parse_scalar(text, 2).unwrap()
}

#[test]
fn moyal_goldens() {
    assert_eq!(coeffs("x1", "x2"), vec![p("x1*x2"), p("1"), p("0")]);
    assert_eq!(coeffs("x2", "x1"), vec![p("x1*x2"), p("-1"), p("0")]);
    assert_eq!(
        coeffs("x1^2", "x2^2"),
        vec![p("x1^2*x2^2"), p("4*x1*x2"), p("2")]
    );
}

#[test]
fn moyal_goldens_through_the_form_product() {
    let g = fixture("moyal2").unwrap();
    let dx1 = TensorValuedForm::dx(2, 0);
    let a = sc("x1^2", 2).wedge(&dx1);
    let b = sc("x2^2", 2);
    let s = star(&a, &b, &g, 2).unwrap();
    assert_eq!(s.coefficient(0), &sc("x1^2*x2^2", 2).wedge(&dx1));
    assert_eq!(s.coefficient(1), &sc("4*x1*x2", 2).wedge(&dx1));
    assert_eq!(s.coefficient(2), &sc("2", 2).wedge(&dx1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn c2_matches_termwise_oracle(chart_seed in any::<u64>(), seed in any::<u64>()) {
        let g = torsion_free_chart(chart_seed);
        let f = polys(seed, 2, 2, 3);
        for conv in [GradientTerm::AsPrinted, GradientTerm::Transposed] {
            let c2 = function_coefficient_with(2, &f[0], &f[1], &g, conv).unwrap();
            prop_assert_eq!(c2, c2_oracle(&g, &f[0], &f[1], conv));
        }
    }

    #[test]
    fn associative_to_second_order_on_torsion_free_charts(chart_seed in any::<u64>(), seed in any::<u64>()) {
        let g = torsion_free_chart(chart_seed);
        let f = polys(seed, 2, 3, 2);
        let r = associator_functions(&f[0], &f[1], &f[2], &g, 2).unwrap();
        prop_assert!(r.iter().all(|e| e.is_zero()), "{:?}", r);
    }

    #[test]
    fn associative_to_third_order_on_moyal2_and_lie3(seed in any::<u64>()) {
        for (name, d) in [("moyal2", 2), ("lie3", 3)] {
            let g = fixture(name).unwrap();
            let f = polys(seed, d, 3, 3);
            let r = associator_functions(&f[0], &f[1], &f[2], &g, 3).unwrap();
            prop_assert!(r.iter().all(|e| e.is_zero()), "{}: {:?}", name, r);
        }
    }

    #[test]
    fn first_order_is_the_bracket(seed in any::<u64>()) {
        let g = fixture("lie3").unwrap();
        let f = polys(seed, 3, 2, 3);
        let s = star_functions(&TensorValuedForm::scalar(f[0].clone()), &TensorValuedForm::scalar(f[1].clone()), &g, 1).unwrap();
        let b = covstar::bracket::poisson_bracket(
            &TensorValuedForm::scalar(f[0].clone()),
            &TensorValuedForm::scalar(f[1].clone()),
            &g,
        ).unwrap();
        prop_assert_eq!(s.coefficient(1), &b);
    }
}

#[test]
fn third_order_associative_on_curved_torsion_free_charts() {
    let mut curved = 0;
    for chart_seed in 0..6 {
        let g = torsion_free_chart(chart_seed);
        if !g.curvature(Connection::Primary).is_zero() {
            curved += 1;
        }
        let f = polys(chart_seed + 100, 2, 3, 2);
        let r = associator_functions(&f[0], &f[1], &f[2], &g, 3).unwrap();
        assert!(r.iter().all(|e| e.is_zero()), "chart {chart_seed}: {r:?}");
    }
    assert!(curved > 0);
    let torsionful = fixture("curved2").unwrap();
    let f = polys(0, 2, 3, 2);
    assert!(matches!(
        associator_functions(&f[0], &f[1], &f[2], &torsionful, 3),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn form_product_is_associative_on_flat_fixtures() {
    for name in ["moyal2", "linear2", "quad2"] {
        let g = fixture(name).unwrap();
        let a = sc("x1 + x2^2", 2).wedge(&TensorValuedForm::dx(2, 0));
        let b = TensorValuedForm::basis_vector(2, 1).scale(&p("x1*x2"));
        let c = sc("x2", 2).wedge(&TensorValuedForm::dx(2, 1));
        let r = associator(&a, &b, &c, &g, 2).unwrap();
        assert!(r.iter().all(|e| e.is_zero()), "{name}");
    }
}

#[test]
fn leibniz_fails_on_curved2() {
    let f = sc("x1^2", 2);
    let v = TensorValuedForm::basis_vector(2, 1).scale(&p("x1"));
    let g = fixture("curved2").unwrap();
    assert!(leibniz_residual(&f, &sc("x2^2", 2), &g).unwrap().is_zero());
    assert!(!leibniz_residual(&f, &v, &g).unwrap().is_zero());
    let flat = fixture("linear2").unwrap();
    assert!(leibniz_residual(&f, &v, &flat).unwrap().is_zero());
}

#[test]
fn order_and_premise_errors() {
    let g = fixture("moyal2").unwrap();
    let dx = TensorValuedForm::dx(2, 0);
    assert!(matches!(
        star(&dx, &dx, &g, 3),
        Err(Error::UnsupportedOrder { .. })
    ));
    assert!(matches!(
        star(&sc("x1", 2), &sc("x2", 2), &g, 4),
        Err(Error::UnsupportedOrder { .. })
    ));
    let linear = fixture("linear2").unwrap();
    assert!(
        function_coefficient_with(2, &p("x1"), &p("x2"), &linear, GradientTerm::default()).is_err()
    );
    let lie = fixture("lie3").unwrap();
    let dx3 = TensorValuedForm::dx(3, 0);
    assert!(matches!(star(&dx3, &dx3, &lie, 1), Err(Error::Mode(_))));
}
