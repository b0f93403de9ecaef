use covstar::random::{random_form, FormBounds};
use covstar::scalar::parse_scalar;
use covstar::{Error, TensorValuedForm};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const D: usize = 3;

fn forms(seed: u64, n: usize) -> Vec<TensorValuedForm> {
    let b = FormBounds {
        dimension: D,
        max_poly_degree: 2,
        max_form_degree: 3,
        max_rank: 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_form(&mut rng, &b)).collect()
}

fn sign(n: usize) -> i64 {
    if n % 2 == 1 {
        -1
    } else {
        1
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_associative(seed in any::<u64>()) {
        let f = forms(seed, 3);
        prop_assert_eq!(f[0].wedge(&f[1]).wedge(&f[2]), f[0].wedge(&f[1].wedge(&f[2])));
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>()) {
        let f = forms(seed, 2);
        let (a, b) = (&f[0], &f[1]);
        let ba = b.wedge(a).swap_blocks(b.upper_rank(), b.lower_rank());
        prop_assert_eq!(a.wedge(b), ba.scale_int(sign(a.degree() * b.degree())));
    }

    #[test]
    fn interior_is_an_antiderivation(seed in any::<u64>(), mu in 0usize..D) {
        let f = forms(seed, 2);
        let (a, b) = (&f[0], &f[1]);
        let lhs = a.wedge(b).interior(mu);
        let rhs = a.interior(mu).wedge(b).add(&a.wedge(&b.interior(mu)).scale_int(sign(a.degree())));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn interior_squares_to_zero(seed in any::<u64>(), mu in 0usize..D, nu in 0usize..D) {
        let a = &forms(seed, 1)[0];
        prop_assert_eq!(a.interior(mu).interior(nu), a.interior(nu).interior(mu).neg());
    }

    #[test]
    fn exterior_derivative_is_nilpotent_and_graded(seed in any::<u64>()) {
        let f = forms(seed, 2);
        let (a, b) = (&f[0], &f[1]);
        prop_assert!(a.exterior_derivative().exterior_derivative().is_zero());
        let lhs = a.wedge(b).exterior_derivative();
        let rhs = a.exterior_derivative().wedge(b)
            .add(&a.wedge(&b.exterior_derivative()).scale_int(sign(a.degree())));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn form_indices_are_antisymmetric() {
    let v = parse_scalar("x1", 2).unwrap();
    let a =
        TensorValuedForm::make_form(2, 0, 0, 2, [(vec![], vec![], vec![2, 1], v.clone())]).unwrap();
    let b =
        TensorValuedForm::make_form(2, 0, 0, 2, [(vec![], vec![], vec![1, 2], v.neg())]).unwrap();
    assert_eq!(a, b);
    let z = TensorValuedForm::make_form(2, 0, 0, 2, [(vec![], vec![], vec![1, 1], v)]).unwrap();
    assert!(z.is_zero());
}

#[test]
fn dx_wedge_and_interior() {
    let dx1 = TensorValuedForm::dx(2, 0);
    let dx2 = TensorValuedForm::dx(2, 1);
    let w = dx1.wedge(&dx2);
    assert_eq!(
        w.component(&[], &[], &[0, 1]),
        parse_scalar("1", 2).unwrap()
    );
    assert_eq!(w.interior(0), dx2);
    assert_eq!(w.interior(1), dx1.neg());
    assert!(dx1.wedge(&dx1).is_zero());
}

#[test]
fn interior_of_zero_form_keeps_shape() {
    let e = TensorValuedForm::basis_vector(2, 0);
    let i = e.interior(1);
    assert!(i.is_zero());
    assert_eq!((i.upper_rank(), i.lower_rank(), i.degree()), (1, 0, 0));
}

#[test]
fn shape_errors() {
    let v = parse_scalar("1", 2).unwrap();
    assert!(matches!(
        TensorValuedForm::make_form(2, 0, 0, 3, Vec::new()),
        Err(Error::Shape(_))
    ));
    assert!(matches!(
        TensorValuedForm::make_form(2, 1, 0, 0, [(vec![3], vec![], vec![], v.clone())]),
        Err(Error::IndexOutOfRange { .. })
    ));
    assert!(matches!(
        TensorValuedForm::make_form(2, 1, 0, 0, [(vec![], vec![], vec![], v)]),
        Err(Error::Shape(_))
    ));
    let a = TensorValuedForm::dx(2, 0);
    assert!(matches!(
        a.try_add(&TensorValuedForm::dx(3, 0)),
        Err(Error::DimensionMismatch { .. })
    ));
    let top = TensorValuedForm::dx(2, 0).wedge(&TensorValuedForm::dx(2, 1));
    assert!(a.try_wedge(&top).unwrap().is_zero());
}
