//! Property-based versions of the structural invariants.

use std::sync::Arc;

use num::complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xbiv::algebra::{FiniteAlgebra, TensorAlgebra};
use xbiv::fixtures::*;
use xbiv::forms::{Form, NCForm, Terms, Word};
use xbiv::goodwillie::{gamma, pi};
use xbiv::scalar::{Field, Gaussian, Rat, Sym};
use xbiv::spectral::{duhamel_integral, max_abs, CMat};

fn rat() -> impl Strategy<Value = Rat> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| Rat::new(n, d))
}

fn gaussian() -> impl Strategy<Value = Gaussian> {
    (rat(), rat()).prop_map(|(a, b)| Gaussian::new(a, b))
}

fn sym() -> impl Strategy<Value = Sym> {
    prop::collection::vec((gaussian(), -3i32..4, -3i32..4), 0..4).prop_map(|ms| ms.into_iter().fold(Sym::zero(), |acc, (c, p, q)| acc + Sym::monomial(c, p, q)))
}

fn algebra(which: usize) -> Arc<FiniteAlgebra<Gaussian>> {
    Arc::new(match which {
        0 => FiniteAlgebra::complex_numbers(),
        1 => FiniteAlgebra::clifford1(),
        _ => FiniteAlgebra::matrix_units(2),
    })
}

/// A form over one of `C`, `C1`, `M2`, given as raw words with small
/// Gaussian coefficients; degrees stay ≤ 4 so trunc 6 never overflows.
fn form() -> impl Strategy<Value = NCForm<Gaussian>> {
    (0usize..3).prop_flat_map(form_in)
}

fn form_pair() -> impl Strategy<Value = (NCForm<Gaussian>, NCForm<Gaussian>)> {
    (0usize..3).prop_flat_map(|w| (form_in(w), form_in(w)))
}

fn form_in(which: usize) -> impl Strategy<Value = NCForm<Gaussian>> {
    let dim = algebra(which).dim() as u16;
    let word = (prop::option::of(0..dim), prop::collection::vec(0..dim, 0..=4));
    prop::collection::vec((word, -3i64..=3, -2i64..=2), 1..5).prop_map(move |terms| {
        let alg = algebra(which);
        let mut t = Terms::new();
        for ((head, letters), re, im) in terms {
            let c = Gaussian::new(Rat::int(re), Rat::int(im));
            let w = Word::new(head, letters);
            let prev = t.remove(&w).unwrap_or_else(Gaussian::zero);
            let sum = prev + c;
            if !Field::is_zero(&sum) {
                t.insert(w, sum);
            }
        }
        Form::from_terms(&alg, 6, t)
    })
}

fn matrix(dim: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| CMat::from_iterator(dim, dim, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaussian_field_axioms(a in gaussian(), b in gaussian(), c in gaussian()) {
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        match a.inv() {
            Some(i) => prop_assert_eq!(a.clone() * i, Gaussian::one()),
            None => prop_assert!(Field::is_zero(&a)),
        }
    }

    #[test]
    fn gaussian_lowering_is_a_ring_map(a in gaussian(), b in gaussian()) {
        let prod = (a.clone() * b.clone()).to_c64();
        prop_assert!((prod - a.to_c64() * b.to_c64()).norm() < 1e-9);
    }

    #[test]
    fn sym_is_a_commutative_ring_and_lowers(a in sym(), b in sym(), c in sym()) {
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        let (p, l) = (std::f64::consts::PI, 1.7);
        let lhs = (a.clone() * b.clone()).lower(p, l);
        let rhs = a.lower(p, l) * b.lower(p, l);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn hochschild_and_connes_operators_square_to_zero(x in form()) {
        prop_assert!(x.b().b().is_zero());
        prop_assert!(x.connes_b().connes_b().is_zero());
        prop_assert!(x.b().connes_b().add(&x.connes_b().b()).unwrap().is_zero());
        prop_assert!(x.d().d().is_zero());
    }

    #[test]
    fn karoubi_operator_identities(x in form()) {
        // 1 − κ = db + bd and κB = B
        let lhs = x.sub(&x.kappa()).unwrap();
        let rhs = x.b().d().add(&x.d().b()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(x.connes_b().kappa(), x.connes_b());
        prop_assert_eq!(x.kappa().connes_b(), x.connes_b());
    }

    #[test]
    fn d_is_a_graded_derivation((x, y) in form_pair()) {
        let (x, y) = (x.with_trunc(9), y.with_trunc(9));
        let lhs = x.mul(&y).unwrap().d();
        let sign_dy = x.parity_part(0).mul(&y.d()).unwrap().sub(&x.parity_part(1).mul(&y.d()).unwrap()).unwrap();
        let rhs = x.d().mul(&y).unwrap().add(&sign_dy).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn text_and_json_notation_round_trip(x in form()) {
        let back = x.to_json().build(x.algebra()).unwrap();
        prop_assert_eq!(&back, &x);
    }

    #[test]
    fn pi_inverts_gamma(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = Arc::new(TensorAlgebra::new(Arc::new(FiniteAlgebra::<Gaussian>::matrix_units(2))));
        let x = random_tensor_x_chain(&mut rng, &t, 5, 2, 5);
        prop_assert_eq!(pi(&gamma(&x)).unwrap(), x);
    }

    #[test]
    fn duhamel_with_vanishing_laplacian(fs in prop::collection::vec(matrix(3), 1..4)) {
        let n = fs.len();
        let exact = duhamel_integral(&CMat::zeros(3, 3), &fs, 1.0).unwrap();
        let prod = fs.iter().fold(CMat::identity(3, 3), |a, f| a * f);
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        prop_assert!(max_abs(&(exact - prod * Complex64::new(1.0 / fact, 0.0))) < 1e-12);
    }

    #[test]
    fn duhamel_is_multilinear(a in matrix(2), b in matrix(2), c in matrix(2), h in matrix(2)) {
        let d2 = &h * h.adjoint();
        let sum = duhamel_integral(&d2, &[a.clone() + &c, b.clone()], 1.0).unwrap();
        let parts = duhamel_integral(&d2, &[a, b.clone()], 1.0).unwrap() + duhamel_integral(&d2, &[c, b], 1.0).unwrap();
        prop_assert!(max_abs(&(sum - parts)) < 1e-12);
    }

    #[test]
    fn gaussian_form_d_squared_and_leibniz(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_gaussian_form(&mut rng, n, &[0, 1], 1, 3);
        let y = random_gaussian_form(&mut rng, n, &[0, 1], 0, 3);
        prop_assert!(x.d().d().is_zero());
        let lhs = x.wedge(&y).unwrap().d();
        let even = x.part(0).d().wedge(&y).unwrap().add(&x.part(0).wedge(&y.d()).unwrap());
        let odd = x.part(1).d().wedge(&y).unwrap().sub(&x.part(1).wedge(&y.d()).unwrap());
        prop_assert_eq!(lhs, even.add(&odd));
    }
}
