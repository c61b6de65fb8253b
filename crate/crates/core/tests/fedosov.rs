use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xbiv::algebra::FiniteAlgebra;
use xbiv::fedosov::*;
use xbiv::forms::{basis_words, Form, NCForm, Word};
use xbiv::linalg::SMat;
use xbiv::scalar::{Field, Gaussian, Rat};
use xbiv::spectral::{ch_idempotent, Picture};
use xbiv::Error;

type G = Gaussian;

fn m2() -> Arc<FiniteAlgebra<G>> {
    Arc::new(FiniteAlgebra::matrix_units(2))
}

fn even_words(alg: &FiniteAlgebra<G>, max_deg: usize) -> Vec<Word<u16>> {
    (0..=max_deg).step_by(2).flat_map(|n| basis_words(alg, n)).collect()
}

fn random_even<R: Rng>(rng: &mut R, alg: &Arc<FiniteAlgebra<G>>, max_deg: usize, words: usize, trunc: usize) -> NCForm<G> {
    let all = even_words(alg, max_deg);
    let mut out = Form::zero(alg, trunc);
    for _ in 0..words {
        let w = &all[rng.gen_range(0..all.len())];
        let c = G::new(Rat::int(rng.gen_range(-3..=3)), Rat::int(rng.gen_range(-2..=2)));
        out = out.add(&single_word(alg, trunc, w).scale(&c)).unwrap();
    }
    out
}

#[test]
fn fedosov_product_is_associative_on_basis_words() {
    let alg = m2();
    let trunc = 8;
    let words: Vec<NCForm<G>> = even_words(&alg, 4).iter().map(|w| single_word(&alg, trunc, w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // All triples up to degree 2, and random triples reaching degree 4.
    let low: Vec<&NCForm<G>> = words.iter().filter(|w| w.max_degree().unwrap() <= 2).collect();
    for x in &low {
        for y in &low {
            for z in &low {
                let l = fedosov_product(&fedosov_product(x, y).unwrap(), z).unwrap();
                let r = fedosov_product(x, &fedosov_product(y, z).unwrap()).unwrap();
                assert_eq!(l.with_trunc(6), r.with_trunc(6));
            }
        }
    }
    for _ in 0..3000 {
        let pick = |rng: &mut ChaCha8Rng| &words[rng.gen_range(0..words.len())];
        let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let l = fedosov_product(&fedosov_product(x, y).unwrap(), z).unwrap();
        let r = fedosov_product(x, &fedosov_product(y, z).unwrap()).unwrap();
        assert_eq!(l, r);
    }
}

#[test]
fn fedosov_product_examples() {
    let alg = m2();
    let one = Form::unit(&alg, 8);
    let x = Form::parse(&alg, 8, "E12 d[E21] d[E11]").unwrap();
    assert_eq!(fedosov_product(&one, &x).unwrap(), x);
    // (da da) ⊙ (da da) = da da da da − d(a da da)... expanded by Leibniz.
    let dada = Form::parse(&alg, 8, "d[E12] d[E21]").unwrap();
    let expect = dada.mul(&dada).unwrap().sub(&dada.d().mul(&dada.d()).unwrap()).unwrap();
    assert_eq!(fedosov_product(&dada, &dada).unwrap(), expect);
    assert_eq!(fedosov_product(&dada, &dada).unwrap(), dada.mul(&dada).unwrap());
}

#[test]
fn mult_map_is_a_homomorphism() {
    let alg = m2();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let x = TensorElem::new(random_even(&mut rng, &alg, 4, 4, 8)).unwrap();
        let y = TensorElem::new(random_even(&mut rng, &alg, 4, 4, 8)).unwrap();
        let lhs = x.odot(&y).unwrap().mult_map();
        let rhs = x.mult_map().mul(&y.mult_map()).unwrap();
        assert_eq!(lhs, rhs.with_trunc(0).with_trunc(8));
    }
    assert!(TensorElem::new(Form::parse(&alg, 4, "E11 d[E12]").unwrap()).is_err());
    let words = TensorElem::new(Form::parse(&alg, 4, "E11 d[E12] d[E21]").unwrap()).unwrap();
    assert!(words.mult_map().is_zero());
}

#[test]
fn x_boundaries_square_to_zero() {
    let alg = m2();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let even = random_even(&mut rng, &alg, 4, 4, 8);
        assert!(b_bar(&natural_d(&even).unwrap()).unwrap().is_zero());
        let odd = natural_d(&random_even(&mut rng, &alg, 4, 4, 8)).unwrap();
        let odd = odd.add(&Form::parse(&alg, 8, "E12 d[E21] d[E22] d[E11]").unwrap()).unwrap();
        assert!(natural_d(&b_bar(&odd).unwrap()).unwrap().is_zero());
        let x = XChain::new(even, odd).unwrap();
        let bb = x.boundary().unwrap().boundary().unwrap();
        assert!(bb.even.is_zero() && bb.odd.is_zero());
    }
}

#[test]
fn x_boundary_examples() {
    let alg = m2();
    let a = Form::parse(&alg, 4, "E12").unwrap();
    assert_eq!(natural_d(&a).unwrap(), a.d());
    let w = Form::parse(&alg, 4, "E11 d[E12]").unwrap();
    let oracle = w.b().sub(&w.d()).unwrap().sub(&w.d().kappa()).unwrap();
    assert_eq!(b_bar(&w).unwrap(), oracle);
    assert_eq!(oracle.part(0), Form::parse(&alg, 4, "E12").unwrap());
    let top = Form::parse(&alg, 4, "d[E12] d[E21] d[E11] d[E22]").unwrap();
    assert!(matches!(natural_d(&top), Err(Error::TruncationOverflow { .. })));
}

#[test]
fn e_hat_is_an_idempotent_cycle() {
    let e = idempotent_e_hat::<G>(8);
    assert_eq!(fedosov_product(&e, &e).unwrap(), e);
    let cyc = natural_d(&e.with_trunc(9)).unwrap();
    assert!(cyc.with_trunc(8).is_zero());
    assert_eq!(e.with_trunc(0).to_string(), "e");
    let two = idempotent_e_hat::<G>(2);
    assert_eq!(two, Form::parse(two.algebra(), 2, "e + 2*e d[e] d[e] - 1*d[e] d[e]").unwrap());
    for n in 1..=4u32 {
        let word = Word::new(Some(0), vec![0; 2 * n as usize]);
        assert_eq!(e.terms()[&word], G::real(central_binomial(n)));
    }
}

#[test]
fn idempotent_lift_of_matrix_projector() {
    let alg = m2();
    let e = Form::parse(&alg, 6, "E11").unwrap();
    let lift = idempotent_lift(&e).unwrap();
    assert_eq!(fedosov_product(&lift, &lift).unwrap(), lift);
    assert!(matches!(idempotent_lift(&Form::parse(&alg, 6, "E12").unwrap()), Err(Error::NotIdempotent)));
}

fn ch_series(e: &NCForm<G>, trunc: usize, picture: Picture) -> NCForm<G> {
    let mut m = SMat::square_zeros(&[0]);
    m.set(0, 0, e.clone());
    ch_idempotent(&m, trunc, picture).unwrap()
}

#[test]
fn chern_character_coefficients_in_both_pictures() {
    let c = Arc::new(FiniteAlgebra::<G>::complex_numbers());
    let e = Form::parse(&c, 8, "e").unwrap();
    let x = ch_series(&e, 8, Picture::XComplex);
    let bb = ch_series(&e, 8, Picture::BB);
    assert_eq!(x, idempotent_e_hat::<G>(8));
    for n in 1..=4u32 {
        let word = Word::new(Some(0), vec![0; 2 * n as usize]);
        let fact = |k: u32| Rat::factorial(k);
        let xc = fact(2 * n) * fact(n).recip().unwrap() * fact(n).recip().unwrap();
        let mut bc = fact(2 * n) * fact(n).recip().unwrap();
        if n % 2 == 1 {
            bc = -bc;
        }
        assert_eq!(x.terms()[&word], G::real(xc.clone()));
        assert_eq!(bb.terms()[&word], G::real(bc));
        let unit_word = Word::new(None, vec![0; 2 * n as usize]);
        assert_eq!(x.terms()[&unit_word], G::real(-xc * Rat::new(1, 2)));
    }
    // The two pictures differ by the rescaling c, and ch in the bB picture is a (b+B)-cycle.
    assert_eq!(x.rescale_c(), bb);
    assert!(bb.with_trunc(9).b_plus_b().with_trunc(7).is_zero());
    assert!(natural_d(&x.with_trunc(9)).unwrap().with_trunc(8).is_zero());
}

#[test]
fn chern_character_of_a_rank_one_projector() {
    let alg = m2();
    let un = Arc::new(alg.unitalize());
    let _ = un;
    let mut m = SMat::square_zeros(&[0, 0]);
    // e = E₁₁ ⊗ 1 inside M₂(Ã) with Ã ⊃ M₂: the 1×1 block picks E₁₁.
    m.set(0, 0, Form::parse(&alg, 4, "E11").unwrap());
    m.set(1, 1, Form::parse(&alg, 4, "E22").unwrap());
    let bb = ch_idempotent(&m, 4, Picture::BB).unwrap();
    let x = ch_idempotent(&m, 4, Picture::XComplex).unwrap();
    assert_eq!(bb.part(2), x.part(2).scale(&G::from_i64(-1)));
    // degree-2 term: −2·tr((e − ½) de de)
    let e = m.clone();
    let half = SMat::identity(&[0, 0], Form::unit(&alg, 4).scale(&G::real(Rat::new(1, 2))));
    let de = e.d();
    let manual = e.sub(&half).mul(&de).mul(&de).trace().unwrap().scale(&G::from_i64(-2));
    assert_eq!(bb.part(2), manual);
    let mut not_idem = SMat::square_zeros(&[0]);
    not_idem.set(0, 0, Form::parse(&alg, 4, "E12").unwrap());
    assert!(matches!(ch_idempotent(&not_idem, 4, Picture::BB), Err(Error::NotIdempotent)));
    // ch(e₊) − ch(e₋) vanishes on degenerate pairs.
    assert!(bb.sub(&ch_idempotent(&m, 4, Picture::BB).unwrap()).unwrap().is_zero());
}

fn swap_rep(trunc: usize) -> FormRepresentation<FiniteAlgebra<G>, FiniteAlgebra<G>> {
    let a = m2();
    let swap = [3u16, 2, 1, 0];
    let mut images = BTreeMap::new();
    for i in 0..4u16 {
        let mut m = SMat::square_zeros(&[0, 1]);
        m.set(0, 0, Form::word(&a, trunc, Some(i), vec![], G::one()));
        m.set(1, 1, Form::word(&a, trunc, Some(swap[i as usize]), vec![], G::one()));
        images.insert(i, m);
    }
    FormRepresentation::new(a.clone(), vec![0, 1], images, Form::unit(&a, trunc)).unwrap()
}

#[test]
fn fedosov_lift_is_multiplicative() {
    let alg = m2();
    let rep = swap_rep(8);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..40 {
        let x = random_even(&mut rng, &alg, 2, 3, 8);
        let y = random_even(&mut rng, &alg, 2, 3, 8);
        let lhs = rep.lift(&fedosov_product(&x, &y).unwrap()).unwrap();
        let rhs = matrix_odot(&rep.lift(&x).unwrap(), &rep.lift(&y).unwrap());
        assert_eq!(lhs, rhs);
        assert_eq!(rep.lift(&x.part(0)).unwrap(), rep.lift(&x).unwrap().map(|f| f.part(0)));
    }
    let a = Form::parse(&alg, 8, "E12").unwrap();
    assert_eq!(rep.lift(&a).unwrap(), rep.image(&1));
    assert!(matches!(rep.lift(&Form::parse(&alg, 8, "E11 d[E12]").unwrap()), Err(Error::ParityError(_))));
}

#[test]
fn lift_of_e_hat_is_the_identity() {
    let c = Arc::new(FiniteAlgebra::<G>::complex_numbers());
    let b = m2();
    let trunc = 8;
    let mut images = BTreeMap::new();
    images.insert(0u16, SMat::identity(&[0, 0, 1], Form::unit(&b, trunc)));
    let rep = FormRepresentation::new(c, vec![0, 0, 1], images, Form::unit(&b, trunc)).unwrap();
    let lifted = rep.lift(&idempotent_e_hat::<G>(trunc)).unwrap();
    assert_eq!(lifted, SMat::identity(&[0, 0, 1], Form::unit(&b, trunc)));
}

#[test]
fn representation_validation() {
    let a = m2();
    let mut images = BTreeMap::new();
    let mut m = SMat::square_zeros(&[0, 1]);
    m.set(0, 1, Form::word(&a, 4, Some(0), vec![], G::one()));
    images.insert(0u16, m);
    assert!(matches!(FormRepresentation::new(a.clone(), vec![0, 1], images, Form::unit(&a, 4)), Err(Error::ParityError(_))));
    let mut images = BTreeMap::new();
    let mut m = SMat::square_zeros(&[0]);
    m.set(0, 0, Form::word(&a, 4, Some(1), vec![], G::one()));
    images.insert(0u16, m);
    assert!(matches!(FormRepresentation::new(a.clone(), vec![0], images, Form::unit(&a, 4)), Err(Error::NotAHomomorphism(..))));
}

#[test]
fn tensor_picture_is_a_bijection() {
    let alg = m2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let x = random_even(&mut rng, &alg, 4, 5, 6);
        let t = to_tensor(&x).unwrap();
        assert_eq!(from_tensor(&alg, 6, &t).unwrap(), x);
    }
    let w = Form::parse(&alg, 4, "E11 d[E12] d[E21]").unwrap();
    assert_eq!(render_tensor(&w), "E11 ⊗ w(E12,E21)");
}
