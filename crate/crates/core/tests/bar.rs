use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xbiv::algebra::FiniteAlgebra;
use xbiv::bar::*;
use xbiv::fixtures::*;
use xbiv::forms::{Form, NCForm};
use xbiv::linalg::SMat;
use xbiv::scalar::{Field, Gaussian};
use xbiv::Error;

type G = Gaussian;

fn setting() -> BarSetting<G> {
    BarSetting::new(Arc::new(FiniteAlgebra::matrix_units(2)), DEFAULT_TRUNC)
}

fn word(s: &BarSetting<G>, w: &[u16]) -> BarChain<G> {
    BarChain::word(&s.tilde, s.trunc, w.to_vec(), G::one()).unwrap()
}

fn bword(s: &BarSetting<G>, l: &[u16], m: u16, r: &[u16], c: i64) -> BarBimodElem<G> {
    BarBimodElem::word(&s.tilde, s.trunc, BimodWord::new(l.to_vec(), m, r.to_vec()), G::from_i64(c)).unwrap()
}

fn scalar_target() -> CochainTarget<G> {
    CochainTarget::new(vec![0, 1], G::one())
}

// Scalars are even: odd slots of the block structure stay empty.
fn scalar_entry(rng: &mut ChaCha8Rng, p: u8) -> G {
    if p == 1 {
        return G::zero();
    }
    small_gaussian(rng)
}

fn coeff_alg() -> Arc<FiniteAlgebra<G>> {
    Arc::new(FiniteAlgebra::truncated_polynomials(2))
}

fn form_target() -> CochainTarget<NCForm<G>> {
    CochainTarget::new(vec![0, 1], Form::unit(&coeff_alg(), 4))
}

#[test]
fn bprime_examples() {
    let s = setting();
    // E₁₂ = 1, E₂₁ = 2, E₁₁ = 0 in the matrix-unit basis.
    assert!(word(&s, &[1]).bprime().is_zero());
    assert!(word(&s, &[]).bprime().is_zero());
    assert_eq!(word(&s, &[1, 2]).bprime(), word(&s, &[0]));
    // (E₁₂, E₂₁, E₁₁) ↦ (E₁₁, E₁₁) − (E₁₂, E₂₁).
    assert_eq!(word(&s, &[1, 2, 0]).bprime(), word(&s, &[0, 0]).sub(&word(&s, &[1, 2])).unwrap());
    // (E₁₂, E₂₁, E₁₂) ↦ (E₁₁, E₁₂) − (E₁₂, E₂₂): E₂₁E₁₂ = E₂₂ = 3.
    let expect3 = word(&s, &[0, 1]).sub(&word(&s, &[1, 3])).unwrap();
    assert_eq!(word(&s, &[1, 2, 1]).bprime(), expect3);
}

#[test]
fn both_readings_of_bprime_agree() {
    let s = setting();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let c = random_bar_chain(&mut rng, &s, 0..=6, 5);
        assert_eq!(c.bprime(), c.bprime_alt());
    }
}

#[test]
fn bprime_and_bdprime_square_to_zero_exhaustively() {
    let s = setting();
    for n in 0..=5 {
        for w in s.words(n) {
            let c = BarChain::word(&s.tilde, 6, w, G::one()).unwrap();
            assert!(c.bprime().bprime().is_zero());
        }
        for w in s.bimod_words(n) {
            let e = BarBimodElem::word(&s.tilde, 6, w.clone(), G::one()).unwrap();
            assert!(e.bdprime().bdprime().is_zero(), "{w:?}");
        }
    }
}

#[test]
fn coproduct_examples_and_laws() {
    let s = setting();
    let d1 = word(&s, &[2]).coproduct();
    let mut expect = BTreeMap::new();
    expect.insert((vec![], vec![2]), G::one());
    expect.insert((vec![2], vec![]), G::one());
    assert_eq!(d1, expect);
    assert_eq!(word(&s, &[2, 1]).coproduct().len(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..60 {
        let c = random_bar_chain(&mut rng, &s, 0..=6, 4);
        let t = c.coproduct();
        assert_eq!(coproduct_left(&t), coproduct_right(&t));
        // counit laws
        let mut left = BTreeMap::new();
        let mut right = BTreeMap::new();
        for ((x, y), k) in &t {
            if x.is_empty() {
                *left.entry(y.clone()).or_insert(G::zero()) = left.get(y).cloned().unwrap_or(G::zero()) + k.clone();
            }
            if y.is_empty() {
                *right.entry(x.clone()).or_insert(G::zero()) = right.get(x).cloned().unwrap_or(G::zero()) + k.clone();
            }
        }
        assert_eq!(&left, c.terms());
        assert_eq!(&right, c.terms());
        assert!(c.bprime().counit().is_zero());
        assert_eq!(c.bprime().coproduct(), tensor_bprime(&s.tilde, &t));
    }
}

#[test]
fn coderivation_examples_and_laws() {
    let s = setting();
    assert_eq!(bword(&s, &[1], 2, &[3], 1).partial(), word(&s, &[1, 2, 3]));
    assert!(bword(&s, &[], 2, &[], 1).bdprime().is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let e = random_bimod_elem(&mut rng, &s, 4..=4, 4);
        assert_eq!(e.bdprime().partial(), e.partial().bprime());
        let e = random_bimod_elem(&mut rng, &s, 1..=6, 4);
        let (l, r) = coderivation_sides(&e);
        assert_eq!(l, r);
    }
}

fn bimod_bdprime_word(s: &BarSetting<G>, w: &BimodWord, c: &G) -> BTreeMap<BimodWord, G> {
    BarBimodElem::word(&s.tilde, s.trunc, w.clone(), c.clone()).unwrap().bdprime().terms().clone()
}

fn bar_bprime_word(s: &BarSetting<G>, w: &[u16], c: &G) -> BTreeMap<Vec<u16>, G> {
    BarChain::word(&s.tilde, s.trunc, w.to_vec(), c.clone()).unwrap().bprime().terms().clone()
}

fn acc<K: Ord>(m: &mut BTreeMap<K, G>, k: K, c: G) {
    let v = m.remove(&k).unwrap_or(G::zero()) + c;
    if !Field::is_zero(&v) {
        m.insert(k, v);
    }
}

#[test]
fn comodule_maps_are_chain_maps() {
    let s = setting();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..60 {
        let e = random_bimod_elem(&mut rng, &s, 1..=6, 4);
        // Δ_l b″ = (b′ ⊗ 1 + 1 ⊗ b″)Δ_l
        let mut rhs = BTreeMap::new();
        for ((x, y), c) in e.comodule_left() {
            for (bx, k) in bar_bprime_word(&s, &x, &c) {
                acc(&mut rhs, (bx, y.clone()), k);
            }
            let sg = if x.len() % 2 == 1 { -c.clone() } else { c.clone() };
            for (by, k) in bimod_bdprime_word(&s, &y, &sg) {
                acc(&mut rhs, (x.clone(), by), k);
            }
        }
        assert_eq!(e.bdprime().comodule_left(), rhs);
        // Δ_r b″ = (b″ ⊗ 1 + 1 ⊗ b′)Δ_r
        let mut rhs = BTreeMap::new();
        for ((x, y), c) in e.comodule_right() {
            for (bx, k) in bimod_bdprime_word(&s, &x, &c) {
                acc(&mut rhs, (bx, y.clone()), k);
            }
            let sg = if x.len() % 2 == 1 { -c.clone() } else { c.clone() };
            for (by, k) in bar_bprime_word(&s, &y, &sg) {
                acc(&mut rhs, (x.clone(), by), k);
            }
        }
        assert_eq!(e.bdprime().comodule_right(), rhs);
    }
}

#[test]
fn cotrace_examples() {
    let s = setting();
    let a = Form::parse(&s.base, 6, "E12").unwrap();
    assert_eq!(s.cotrace(&a).unwrap(), bword(&s, &[], 1, &[], 1));
    let w = Form::parse(&s.base, 6, "E11 d[E12]").unwrap();
    let expect = bword(&s, &[1], 0, &[], -1).add(&bword(&s, &[], 0, &[1], 1)).unwrap();
    assert_eq!(s.cotrace(&w).unwrap(), expect);
    let unit_head = Form::parse(&s.base, 6, "d[E12]").unwrap();
    assert_eq!(s.cotrace(&unit_head).unwrap(), bword(&s, &[1], 4, &[], -1).add(&bword(&s, &[], 4, &[1], 1)).unwrap());
    let top = Form::parse(&s.base, 8, "E11 d[E12] d[E12] d[E12] d[E12] d[E12] d[E12]").unwrap();
    assert!(matches!(s.cotrace(&top), Err(Error::TruncationOverflow { .. })));
}

#[test]
fn cotrace_intertwines_b_and_is_a_cotrace() {
    let s = setting();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 0..=5 {
        for _ in 0..15 {
            let w = random_form_of_degree(&mut rng, &s.base, n, 3, 6);
            let nat = s.cotrace(&w).unwrap();
            assert_eq!(s.cotrace(&w.b()).unwrap(), nat.bdprime(), "degree {n}");
            assert_eq!(nat.comodule_left(), flip_right(&nat.comodule_right()));
            assert_eq!(flip_left(&nat.comodule_left()), nat.comodule_right());
        }
    }
}

#[test]
fn convolution_unit_and_sign_examples() {
    let s = setting();
    let t = scalar_target();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let one = BarCochain::unit(&s.tilde, 6, t.clone());
    for deg in 0..2 {
        let f = random_bar_cochain(&mut rng, &s, &t, deg, 0..=4, 5, false, &mut scalar_entry);
        assert!(one.convolve(&f).unwrap().sub(&f).unwrap().is_zero());
        assert!(f.convolve(&one).unwrap().sub(&f).unwrap().is_zero());
    }
    // |f| = |g| = 1 on single letters: values are even matrices.
    let f = random_bar_cochain(&mut rng, &s, &t, 1, 1..=1, 3, false, &mut scalar_entry);
    let g = random_bar_cochain(&mut rng, &s, &t, 1, 1..=1, 3, false, &mut scalar_entry);
    let fg = f.convolve(&g).unwrap();
    for (u, fu) in f.table() {
        for (v, gv) in g.table() {
            let w = vec![u[0], v[0]];
            assert_eq!(fg.value(&w), fu.mul(gv).neg());
        }
    }
    let other = CochainTarget::new(vec![0], G::one());
    let h = BarCochain::unit(&s.tilde, 6, other);
    assert!(matches!(f.convolve(&h), Err(Error::TargetMismatch(_))));
}

#[test]
fn cochain_values_must_respect_parity() {
    let s = setting();
    let t = scalar_target();
    let mut m = SMat::square_zeros(&[0, 1]);
    m.set(0, 1, G::one());
    let mut table = BTreeMap::new();
    table.insert(vec![0u16, 1], m);
    // An odd value on a two-letter word: degree 1, not degree 0.
    assert!(matches!(BarCochain::new(&s.tilde, 6, t.clone(), 0, table.clone()), Err(Error::ParityError(_))));
    assert!(BarCochain::new(&s.tilde, 6, t, 1, table).is_ok());
}

fn form_entry(rng: &mut ChaCha8Rng, p: u8) -> NCForm<G> {
    random_coefficient_form(rng, &coeff_alg(), p, 4)
}

#[test]
fn convolution_algebra_axioms() {
    let s = setting();
    let t = form_target();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let dg = |rng: &mut ChaCha8Rng| rng.gen_range(0..2u8);
        let (a, b, c) = (dg(&mut rng), dg(&mut rng), dg(&mut rng));
        let f = random_bar_cochain(&mut rng, &s, &t, a, 0..=2, 3, false, &mut form_entry);
        let g = random_bar_cochain(&mut rng, &s, &t, b, 0..=2, 3, false, &mut form_entry);
        let h = random_bar_cochain(&mut rng, &s, &t, c, 0..=2, 3, false, &mut form_entry);
        let l = f.convolve(&g).unwrap().convolve(&h).unwrap();
        let r = f.convolve(&g.convolve(&h).unwrap()).unwrap();
        assert!(l.sub(&r).unwrap().is_zero());

        // δ and d: odd, square-zero, anticommuting derivations.
        assert!(f.delta_r().delta_r().is_zero());
        assert!(f.d_r().d_r().is_zero());
        assert!(f.delta_r().d_r().add(&f.d_r().delta_r()).unwrap().is_zero());
        let sign = |x: &BarCochain<G, NCForm<G>>, k: u8| if k % 2 == 1 { x.neg() } else { x.clone() };
        let fg = f.convolve(&g).unwrap();
        let lhs = fg.delta_r();
        let rhs = f.delta_r().convolve(&g).unwrap().add(&sign(&f.convolve(&g.delta_r()).unwrap(), a)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
        let lhs = fg.d_r();
        let rhs = f.d_r().convolve(&g).unwrap().add(&sign(&f.convolve(&g.d_r()).unwrap(), a)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());

        // ∂ is a derivation into ℳ and commutes with δ and d.
        let lhs = fg.partial_r();
        let rhs = f.partial_r().act(&g, Side::Right).unwrap().add(&g.partial_r().act(&f, Side::Left).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
        assert!(f.delta_r().partial_r().sub(&f.partial_r().delta_m()).unwrap().is_zero());
        assert!(f.d_r().partial_r().sub(&f.partial_r().d_m()).unwrap().is_zero());
    }
}

#[test]
fn bimodule_axioms() {
    let s = setting();
    let t = form_target();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let one = BarCochain::unit(&s.tilde, 6, t.clone());
    for _ in 0..25 {
        let dg = |rng: &mut ChaCha8Rng| rng.gen_range(0..2u8);
        let (a, b, c) = (dg(&mut rng), dg(&mut rng), dg(&mut rng));
        let f = random_bar_cochain(&mut rng, &s, &t, a, 0..=2, 3, false, &mut form_entry);
        let g = random_bar_cochain(&mut rng, &s, &t, b, 0..=2, 3, false, &mut form_entry);
        let m = random_bimod_cochain(&mut rng, &s, &t, c, 1..=3, 3, &mut form_entry);
        assert!(m.act(&one, Side::Left).unwrap().sub(&m).unwrap().is_zero());
        assert!(m.act(&one, Side::Right).unwrap().sub(&m).unwrap().is_zero());
        let fg = f.convolve(&g).unwrap();
        let l = m.act(&g, Side::Left).unwrap().act(&f, Side::Left).unwrap();
        assert!(l.sub(&m.act(&fg, Side::Left).unwrap()).unwrap().is_zero());
        let r = m.act(&f, Side::Right).unwrap().act(&g, Side::Right).unwrap();
        assert!(r.sub(&m.act(&fg, Side::Right).unwrap()).unwrap().is_zero());
        let lr = m.act(&f, Side::Left).unwrap().act(&g, Side::Right).unwrap();
        let rl = m.act(&g, Side::Right).unwrap().act(&f, Side::Left).unwrap();
        assert!(lr.sub(&rl).unwrap().is_zero());

        assert!(m.delta_m().delta_m().is_zero());
        assert!(m.delta_m().d_m().add(&m.d_m().delta_m()).unwrap().is_zero());
        let sign = |x: BimodCochain<G, NCForm<G>>, k: u8| if k % 2 == 1 { x.neg() } else { x };
        let lhs = m.act(&f, Side::Left).unwrap().delta_m();
        let rhs = m.act(&f.delta_r(), Side::Left).unwrap().add(&sign(m.delta_m().act(&f, Side::Left).unwrap(), a)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
        let lhs = m.act(&f, Side::Right).unwrap().delta_m();
        let rhs = m.delta_m().act(&f, Side::Right).unwrap().add(&sign(m.act(&f.delta_r(), Side::Right).unwrap(), c)).unwrap();
        assert!(lhs.sub(&rhs).unwrap().is_zero());
    }
}

#[test]
fn supertrace_of_the_cotrace_is_a_bimodule_trace() {
    let s = setting();
    let t = scalar_target();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let a = rng.gen_range(0..2u8);
        let c = rng.gen_range(0..2u8);
        let f = random_bar_cochain(&mut rng, &s, &t, a, 0..=3, 4, false, &mut scalar_entry);
        let m = random_bimod_cochain(&mut rng, &s, &t, c, 1..=3, 4, &mut scalar_entry);
        let n = rng.gen_range(0..=5);
        let w = random_form_of_degree(&mut rng, &s.base, n, 3, 6);
        let nat = s.cotrace(&w).unwrap();
        let left = m.act(&f, Side::Left).unwrap().eval(&nat).supertrace();
        let right = m.act(&f, Side::Right).unwrap().eval(&nat).supertrace();
        let sign = if a * c == 1 { -G::one() } else { G::one() };
        assert_eq!(right, sign * left);
    }
}

#[test]
fn lemma_a1_examples_and_random() {
    let s = setting();
    let t = scalar_target();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g1 = random_bimod_cochain(&mut rng, &s, &t, 1, 1..=1, 5, &mut scalar_entry);
    let w = Form::parse(&s.base, 6, "E11 d[E12]").unwrap();
    assert!(lemma_a1_check(&s, &g1, &w).unwrap());
    let ft = form_target();
    let mut nontrivial = 0;
    for _ in 0..40 {
        let deg = rng.gen_range(0..2u8);
        let gamma = random_bimod_cochain(&mut rng, &s, &ft, deg, 1..=6, 6, &mut form_entry);
        let n = rng.gen_range(1..=5);
        let w = random_form_of_degree(&mut rng, &s.base, n, 3, 6);
        let (l, r) = lemma_a1_sides(&s, &gamma, &w).unwrap();
        assert!(l.sub(&r).is_zero());
        nontrivial += usize::from(!l.is_zero());
    }
    assert!(nontrivial >= 5, "only {nontrivial} nontrivial instances");
}

#[test]
fn lemma_a2_examples_and_random() {
    let s = setting();
    let t = scalar_target();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = random_unital_rho(&mut rng, &s, &t, &mut scalar_entry);
    // f = g = ρ restricted to A.
    let mut table = rho.table().clone();
    table.remove(&vec![s.unit()]);
    let f = BarCochain::new(&s.tilde, 6, t.clone(), 1, table).unwrap();
    let w = Form::parse(&s.base, 6, "E11 d[E12] d[E21]").unwrap();
    assert!(lemma_a2_check(&s, &f, &f, &rho, &w).unwrap());

    let ft = form_target();
    let mut nontrivial = 0;
    for _ in 0..40 {
        let rho = random_unital_rho(&mut rng, &s, &ft, &mut form_entry);
        let (a, b) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8));
        let f = random_bar_cochain(&mut rng, &s, &ft, a, 1..=3, 4, true, &mut form_entry);
        let g = random_bar_cochain(&mut rng, &s, &ft, b, 1..=3, 4, true, &mut form_entry);
        let n = rng.gen_range(0..=4);
        let w = random_form_of_degree(&mut rng, &s.base, n, 3, 6);
        let (l, r) = lemma_a2_sides(&s, &f, &g, &rho, &w).unwrap();
        assert!(l.sub(&r).is_zero(), "n = {n}, |f| = {a}, |g| = {b}");
        nontrivial += usize::from(!l.is_zero());
    }
    assert!(nontrivial >= 5, "only {nontrivial} nontrivial instances");
}

#[test]
fn lemma_a2_preconditions() {
    let s = setting();
    let t = scalar_target();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rho = random_unital_rho(&mut rng, &s, &t, &mut scalar_entry);
    let mut table = rho.table().clone();
    table.insert(vec![s.unit()], t.identity().scale(&G::from_i64(2)));
    let bad = BarCochain::new(&s.tilde, 6, t.clone(), 1, table).unwrap();
    let f = random_bar_cochain(&mut rng, &s, &t, 0, 1..=2, 3, true, &mut scalar_entry);
    let w = Form::parse(&s.base, 6, "E11 d[E12]").unwrap();
    assert!(matches!(lemma_a2_check(&s, &f, &f, &bad, &w), Err(Error::PreconditionViolated(_))));
    let touching = BarCochain::new(&s.tilde, 6, t.clone(), 1, [(vec![s.unit()], t.identity())].into_iter().collect()).unwrap();
    assert!(matches!(lemma_a2_check(&s, &touching, &f, &rho, &w), Err(Error::PreconditionViolated(_))));
}
