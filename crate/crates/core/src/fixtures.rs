//! Seeded generators for test and suite inputs: random chains, random
//! triples over `M₂`, and the index-pairing fixtures.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::bott::GaussianForm;
use crate::bar::{BarBimodElem, BarChain, BarCochain, BarSetting, BarTarget, BimodCochain, BimodWord, CochainTarget};
use crate::algebra::{FiniteAlgebra, TensorAlgebra, TensorWord};
use crate::forms::{add_term, Form, NCForm, Terms, Word};
use crate::goodwillie::{OmegaTA, TensorXChain};
use crate::linalg::{block_parities, DgRing, SMat};
use crate::scalar::{Field, Gaussian, Rat, Sym};
use crate::spectral::{CMat, MatForm, SpectralTriple};
use crate::Result;

pub fn m2() -> Arc<FiniteAlgebra<Complex64>> {
    Arc::new(FiniteAlgebra::<Gaussian>::matrix_units(2).map_field(|g| g.to_c64()))
}

/// `ℂ[x]/x³` without unit: basis `x, x2`.
pub fn nilpotent_coefficients() -> Arc<FiniteAlgebra<Complex64>> {
    Arc::new(FiniteAlgebra::<Gaussian>::truncated_polynomials(2).map_field(|g| g.to_c64()))
}

fn cplx<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cplx(rng))
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let a = random_matrix(rng, n, n);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// A random chain of `ΩA` with `words` terms of degree `≤ max_deg`; heads
/// range over `Ã`.
pub fn random_chain<R: Rng>(rng: &mut R, alg: &Arc<FiniteAlgebra<Complex64>>, max_deg: usize, words: usize, trunc: usize) -> NCForm<Complex64> {
    let n = alg.dim() as u16;
    let mut t: Terms<u16, Complex64> = Terms::new();
    for _ in 0..words {
        let deg = rng.gen_range(0..=max_deg);
        let head = if deg > 0 && rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..n)) };
        let letters = (0..deg).map(|_| rng.gen_range(0..n)).collect();
        add_term(&mut t, Word::new(head, letters), cplx(rng));
    }
    NCForm::from_terms(alg, trunc, t)
}

/// As [`random_chain`], restricted to one degree parity.
pub fn random_chain_of_parity<R: Rng>(rng: &mut R, alg: &Arc<FiniteAlgebra<Complex64>>, max_deg: usize, words: usize, parity: usize, trunc: usize) -> NCForm<Complex64> {
    random_chain(rng, alg, max_deg, words, trunc).parity_part(parity)
}

fn embed(a: &CMat, copies: usize, size: usize) -> CMat {
    let k = a.nrows();
    let mut m = CMat::zeros(size, size);
    for c in 0..copies {
        m.view_mut((c * k, c * k), (k, k)).copy_from(a);
    }
    m
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (p, q) = (a.nrows(), b.nrows());
    let mut m = CMat::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(a);
    m.view_mut((p, p), (q, q)).copy_from(b);
    m
}

/// Random odd selfadjoint operator on `ℂ^{p|q}`.
pub fn random_odd_dirac<R: Rng>(rng: &mut R, p: usize, q: usize, scale: f64) -> CMat {
    let t = random_matrix(rng, p, q) * Complex64::new(scale, 0.0);
    let mut d = CMat::zeros(p + q, p + q);
    d.view_mut((0, p), (p, q)).copy_from(&t);
    d.view_mut((p, 0), (q, p)).copy_from(&t.adjoint());
    d
}

fn random_even_invertible<R: Rng>(rng: &mut R, p: usize, q: usize) -> CMat {
    let eps = Complex64::new(0.3, 0.0);
    block_diag(&(CMat::identity(p, p) + random_matrix(rng, p, p) * eps), &(CMat::identity(q, q) + random_matrix(rng, q, q) * eps))
}

/// `a ↦ U((a ⊗ 1_{m₊}) ⊕ 0 ⊕ (a ⊗ 1_{m₋}) ⊕ 0)U⁻¹` on `ℂ^{p|q}`, for a basis of `M₂`.
fn m2_representation<R: Rng>(rng: &mut R, p: usize, q: usize) -> Vec<CMat> {
    let alg = m2();
    let (mp, mq) = (p / 2, q / 2);
    let u = random_even_invertible(rng, p, q);
    let inv = u.clone().try_inverse().expect("near-identity matrices are invertible");
    (0..alg.dim())
        .map(|i| {
            let a = CMat::from_fn(2, 2, |r, s| if r * 2 + s == i { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            &u * block_diag(&embed(&a, mp, p), &embed(&a, mq, q)) * &inv
        })
        .collect()
}

/// A random even triple over `M₂` on `ℂ^{p|q}` with scalar coefficients.
pub fn random_even_triple<R: Rng>(rng: &mut R, p: usize, q: usize) -> SpectralTriple {
    let rho = m2_representation(rng, p, q);
    let d = random_odd_dirac(rng, p, q, 0.6);
    SpectralTriple::even_scalar(m2(), p, q, rho, d).expect("fixture triples are valid")
}

/// A random odd triple over `M₂` on `K = ℂᵏ`.
pub fn random_odd_triple<R: Rng>(rng: &mut R, k: usize) -> SpectralTriple {
    let alg = m2();
    let u = CMat::identity(k, k) + random_matrix(rng, k, k) * Complex64::new(0.3, 0.0);
    let inv = u.clone().try_inverse().expect("invertible");
    let alpha = (0..alg.dim())
        .map(|i| {
            let a = CMat::from_fn(2, 2, |r, s| if r * 2 + s == i { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
            &u * embed(&a, k / 2, k) * &inv
        })
        .collect();
    let q = random_hermitian(rng, k) * Complex64::new(0.6, 0.0);
    SpectralTriple::odd_scalar(alg, alpha, q).expect("fixture triples are valid")
}

/// Twist a scalar triple by `V = 1 + N x` with coefficients in `ℂ[x]/x³`:
/// `ρ'(a) = V ρ(a) V⁻¹`, which is a homomorphism with genuinely form-valued
/// entries.
pub fn with_nilpotent_coefficients<R: Rng>(rng: &mut R, t: &SpectralTriple, trunc: usize) -> SpectralTriple {
    let b = nilpotent_coefficients();
    let n = t.dim();
    let par = t.parities().to_vec();
    let mut nmat = random_matrix(rng, n, n) * Complex64::new(0.5, 0.0);
    for i in 0..n {
        for j in 0..n {
            if par[i] != par[j] {
                nmat[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    if t.parity() == crate::spectral::Parity::Odd {
        let k = n / 2;
        let top = nmat.view((0, 0), (k, k)).into_owned();
        nmat.view_mut((k, k), (k, k)).copy_from(&top);
    }
    let x = Word::new(Some(0), vec![]);
    let x2 = Word::new(Some(1), vec![]);
    let mut v = MatForm::scalar(CMat::identity(n, n));
    v.add_word(x.clone(), &nmat);
    let mut vinv = MatForm::scalar(CMat::identity(n, n));
    vinv.add_word(x, &(-&nmat));
    vinv.add_word(x2, &(&nmat * &nmat));
    let rho = (0..t.source().dim()).map(|i| v.mul(&b, &t.rho_basis(i).mul(&b, &vinv, 0), 0)).collect();
    SpectralTriple::new(t.source().clone(), b, trunc, par, t.parity(), rho, t.dirac().clone()).expect("conjugated representation is a homomorphism")
}

/// An index-pairing fixture: `ℂ^{p|q}` with `A = ℂ` acting by a projection,
/// exact data and the expected index.
#[derive(Debug, Clone)]
pub struct IndexFixture {
    pub name: &'static str,
    pub projection: SMat<Gaussian>,
    pub dirac: SMat<Gaussian>,
    pub expected: i64,
}

impl IndexFixture {
    pub fn triple(&self) -> Result<SpectralTriple> {
        let lower = |m: &SMat<Gaussian>| CMat::from_fn(m.rows, m.cols, |i, j| m.get(i, j).map(|g| g.to_c64()).unwrap_or_default());
        let p = self.projection.row_par.iter().filter(|&&x| x == 0).count();
        let alg = Arc::new(FiniteAlgebra::<Gaussian>::complex_numbers().map_field(|g| g.to_c64()));
        SpectralTriple::even_scalar(alg, p, self.projection.rows - p, vec![lower(&self.projection)], lower(&self.dirac))
    }
}

fn gmat(p: usize, q: usize, entries: &[(usize, usize, i64)]) -> SMat<Gaussian> {
    let par = block_parities(p, q);
    let mut m = SMat::square_zeros(&par);
    for &(i, j, v) in entries {
        m.set(i, j, Gaussian::from_i64(v));
    }
    m
}

fn symmetric(p: usize, q: usize, entries: &[(usize, usize, i64)]) -> SMat<Gaussian> {
    let mut all = entries.to_vec();
    all.extend(entries.iter().map(|&(i, j, v)| (j, i, v)));
    gmat(p, q, &all)
}

/// Fixtures with indices `-2, …, 2`, including one where `[D, e] ≠ 0`.
pub fn index_fixtures() -> Vec<IndexFixture> {
    vec![
        IndexFixture { name: "invertible C^{1|1}", projection: gmat(1, 1, &[(0, 0, 1), (1, 1, 1)]), dirac: symmetric(1, 1, &[(1, 0, 1)]), expected: 0 },
        IndexFixture { name: "C^{2|1}, D+ = [1 0]", projection: gmat(2, 1, &[(0, 0, 1), (1, 1, 1), (2, 2, 1)]), dirac: symmetric(2, 1, &[(2, 0, 1)]), expected: 1 },
        IndexFixture { name: "C^{1|2}, D+ = [1 0]^T", projection: gmat(1, 2, &[(0, 0, 1), (1, 1, 1), (2, 2, 1)]), dirac: symmetric(1, 2, &[(1, 0, 1)]), expected: -1 },
        IndexFixture { name: "C^{3|1} with D = 0", projection: gmat(3, 1, &[(0, 0, 1), (1, 1, 1), (2, 2, 1), (3, 3, 1)]), dirac: gmat(3, 1, &[]), expected: 2 },
        IndexFixture { name: "C^{1|3}, D+ = [1 1 0]^T", projection: gmat(1, 3, &[(0, 0, 1), (1, 1, 1), (2, 2, 1), (3, 3, 1)]), dirac: symmetric(1, 3, &[(1, 0, 1), (2, 0, 1)]), expected: -2 },
        IndexFixture {
            name: "compressed C^{2|2}, [D,e] != 0",
            projection: gmat(2, 2, &[(0, 0, 1), (2, 2, 1), (3, 3, 1)]),
            dirac: symmetric(2, 2, &[(2, 0, 1), (3, 1, 1), (3, 0, 1)]),
            expected: -1,
        },
    ]
}

/// A flattening fixture: the compressed `C^{2|2}` fixture with the coupling
/// that breaks `[D, e] = 0` halved, so the path to `eDe + (1-e)D(1-e)` is short.
pub fn flattening_fixture() -> IndexFixture {
    let mut dirac = symmetric(2, 2, &[(2, 0, 1), (3, 0, 1)]);
    let half = Gaussian::new(Rat::new(1, 2), Rat::int(0));
    dirac.set(3, 1, half.clone());
    dirac.set(1, 3, half);
    IndexFixture { name: "compressed C^{2|2}, coupling 1/2", projection: gmat(2, 2, &[(0, 0, 1), (2, 2, 1), (3, 3, 1)]), dirac, expected: -1 }
}

/// A nonzero Gaussian rational with small integer parts.
pub fn small_gaussian<R: Rng>(rng: &mut R) -> Gaussian {
    loop {
        let g = Gaussian::new(Rat::int(rng.gen_range(-3..=3)), Rat::int(rng.gen_range(-2..=2)));
        if !Field::is_zero(&g) {
            return g;
        }
    }
}

/// A random word of `ΩT̃A` of outer degree `n` and total tensor length `len ≥ n`.
pub fn random_omega_ta_word<R: Rng>(rng: &mut R, dim: usize, n: usize, len: usize) -> Word<TensorWord> {
    let mut lens = vec![0usize; n + 1];
    for l in lens.iter_mut().skip(1) {
        *l = 1;
    }
    for _ in n..len {
        let k = rng.gen_range(0..=n);
        lens[k] += 1;
    }
    let mut gen = |k: usize| (0..k).map(|_| rng.gen_range(0..dim as u16)).collect::<TensorWord>();
    let head = if lens[0] == 0 { None } else { Some(gen(lens[0])) };
    let letters = lens[1..].iter().map(|&k| gen(k)).collect();
    Word::new(head, letters)
}

/// A random element of `ΩT̃A` with small Gaussian-integer coefficients, every
/// word of total length `≤ max_len` and outer degree in `degrees`.
pub fn random_omega_ta<R: Rng>(rng: &mut R, ta: &Arc<TensorAlgebra<Gaussian>>, degrees: std::ops::RangeInclusive<usize>, max_len: usize, words: usize, trunc: usize) -> OmegaTA<Gaussian> {
    let dim = ta.base().dim();
    let mut t = Terms::new();
    for _ in 0..words {
        let n = rng.gen_range(degrees.clone());
        let len = rng.gen_range(n.max(1)..=max_len.max(n.max(1)));
        add_term(&mut t, random_omega_ta_word(rng, dim, n, len), small_gaussian(rng));
    }
    Form::from_terms(ta, trunc, t)
}

/// A random native X(TA) chain with tensor length `≤ max_len`.
pub fn random_tensor_x_chain<R: Rng>(rng: &mut R, ta: &Arc<TensorAlgebra<Gaussian>>, max_len: usize, words: usize, trunc: usize) -> TensorXChain<Gaussian> {
    let even = random_omega_ta(rng, ta, 0..=0, max_len, words, trunc);
    let odd = random_omega_ta(rng, ta, 1..=1, max_len, words, trunc);
    TensorXChain::new(even, odd).expect("degrees are right by construction")
}

// Bar-construction inputs over `Ã`, Gaussian coefficients.

fn random_letters<R: Rng>(rng: &mut R, dim: usize, len: usize, avoid: Option<u16>) -> Vec<u16> {
    (0..len)
        .map(|_| loop {
            let a = rng.gen_range(0..dim as u16);
            if Some(a) != avoid {
                break a;
            }
        })
        .collect()
}

pub fn random_bar_chain<R: Rng>(rng: &mut R, s: &BarSetting<Gaussian>, lens: std::ops::RangeInclusive<usize>, words: usize) -> BarChain<Gaussian> {
    let mut out = BarChain::zero(&s.tilde, s.trunc);
    for _ in 0..words {
        let len = rng.gen_range(lens.clone());
        let w = random_letters(rng, s.tilde.dim(), len, None);
        out = out.add(&BarChain::word(&s.tilde, s.trunc, w, small_gaussian(rng)).expect("within truncation")).expect("same algebra");
    }
    out
}

pub fn random_bimod_elem<R: Rng>(rng: &mut R, s: &BarSetting<Gaussian>, lens: std::ops::RangeInclusive<usize>, words: usize) -> BarBimodElem<Gaussian> {
    let mut out = BarBimodElem::zero(&s.tilde, s.trunc);
    for _ in 0..words {
        let len = rng.gen_range(lens.clone()).max(1);
        let w = random_letters(rng, s.tilde.dim(), len, None);
        let bw = BimodWord::from_flat(&w, rng.gen_range(0..len));
        out = out.add(&BarBimodElem::word(&s.tilde, s.trunc, bw, small_gaussian(rng)).expect("within truncation")).expect("same algebra");
    }
    out
}

/// A random value of parity `p` in the square matrices over `C` with row
/// parities `par`; `entry(rng, q)` draws a coefficient of parity `q`.
pub fn random_graded_value<R: Rng, C: DgRing>(rng: &mut R, par: &[u8], p: u8, entries: usize, entry: &mut impl FnMut(&mut R, u8) -> C) -> SMat<C> {
    let mut m = SMat::square_zeros(par);
    for _ in 0..entries {
        let (i, j) = (rng.gen_range(0..par.len()), rng.gen_range(0..par.len()));
        let q = (p + par[i] + par[j]) % 2;
        let c = entry(rng, q);
        m.add_entry(i, j, &c);
    }
    m
}

/// A random cochain of the given degree supported on `words` words with
/// lengths in `lens`; with `avoid_unit` no support word contains `1 ∈ Ã`.
#[allow(clippy::too_many_arguments)]
pub fn random_bar_cochain<R: Rng, C: BarTarget<Gaussian>>(
    rng: &mut R,
    s: &BarSetting<Gaussian>,
    target: &CochainTarget<C>,
    degree: u8,
    lens: std::ops::RangeInclusive<usize>,
    words: usize,
    avoid_unit: bool,
    entry: &mut impl FnMut(&mut R, u8) -> C,
) -> BarCochain<Gaussian, C> {
    let mut table = BTreeMap::new();
    let avoid = avoid_unit.then(|| s.unit());
    for _ in 0..words {
        let len = rng.gen_range(lens.clone());
        let w = random_letters(rng, s.tilde.dim(), len, avoid);
        let v = random_graded_value(rng, &target.par, (degree + len as u8) % 2, 2, entry);
        table.insert(w, v);
    }
    BarCochain::new(&s.tilde, s.trunc, target.clone(), degree, table).expect("well-formed cochain")
}

pub fn random_bimod_cochain<R: Rng, C: BarTarget<Gaussian>>(
    rng: &mut R,
    s: &BarSetting<Gaussian>,
    target: &CochainTarget<C>,
    degree: u8,
    lens: std::ops::RangeInclusive<usize>,
    words: usize,
    entry: &mut impl FnMut(&mut R, u8) -> C,
) -> BimodCochain<Gaussian, C> {
    let mut table = BTreeMap::new();
    for _ in 0..words {
        let len = rng.gen_range(lens.clone()).max(1);
        let w = random_letters(rng, s.tilde.dim(), len, None);
        let bw = BimodWord::from_flat(&w, rng.gen_range(0..len));
        let v = random_graded_value(rng, &target.par, (degree + len as u8) % 2, 2, entry);
        table.insert(bw, v);
    }
    BimodCochain::new(&s.tilde, s.trunc, target.clone(), degree, table).expect("well-formed cochain")
}

/// A unital linear map `ρ : Ã → L⁰` as a degree-one cochain on single letters.
pub fn random_unital_rho<R: Rng, C: BarTarget<Gaussian>>(rng: &mut R, s: &BarSetting<Gaussian>, target: &CochainTarget<C>, entry: &mut impl FnMut(&mut R, u8) -> C) -> BarCochain<Gaussian, C> {
    let mut table = BTreeMap::new();
    for a in 0..s.base.dim() as u16 {
        table.insert(vec![a], random_graded_value(rng, &target.par, 0, 3, entry));
    }
    table.insert(vec![s.unit()], target.identity());
    BarCochain::new(&s.tilde, s.trunc, target.clone(), 1, table).expect("well-formed cochain")
}

/// A Gaussian-coefficient form over `ℂ[x]/x³` (non-unital basis `x, x²`)
/// of the requested parity, as a coefficient with nontrivial `d`.
pub fn random_coefficient_form<R: Rng>(rng: &mut R, alg: &Arc<FiniteAlgebra<Gaussian>>, parity: u8, trunc: usize) -> NCForm<Gaussian> {
    let deg = if parity == 0 { [0usize, 2][rng.gen_range(0..2)] } else { 1 };
    let deg = deg.min(trunc);
    let n = alg.dim() as u16;
    let head = if deg > 0 && rng.gen_bool(0.4) { None } else { Some(rng.gen_range(0..n)) };
    let letters = (0..deg).map(|_| rng.gen_range(0..n)).collect();
    Form::word(alg, trunc, head, letters, small_gaussian(rng))
}

/// A random form over `A` with `words` terms of exactly degree `n`, letters in `A` and heads in `Ã`.
pub fn random_form_of_degree<R: Rng>(rng: &mut R, alg: &Arc<FiniteAlgebra<Gaussian>>, n: usize, words: usize, trunc: usize) -> NCForm<Gaussian> {
    let dim = alg.dim() as u16;
    let mut t: Terms<u16, Gaussian> = Terms::new();
    for _ in 0..words {
        let head = if rng.gen_bool(0.3) { None } else { Some(rng.gen_range(0..dim)) };
        let letters = (0..n).map(|_| rng.gen_range(0..dim)).collect();
        add_term(&mut t, Word::new(head, letters), small_gaussian(rng));
    }
    Form::from_terms(alg, trunc, t)
}

/// A random form on `ℝⁿ` with small monomials, damping at most `max_damp`,
/// and form degrees drawn from `degrees` (those above `n` are skipped).
pub fn random_gaussian_form<R: Rng>(rng: &mut R, n: usize, degrees: &[usize], max_damp: u32, terms: usize) -> GaussianForm {
    let degrees: Vec<usize> = degrees.iter().copied().filter(|&k| k <= n).collect();
    let mut out = GaussianForm::zero(n);
    for _ in 0..terms {
        let k = degrees[rng.gen_range(0..degrees.len())];
        let mono: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        idx.truncate(k);
        let c = Sym::monomial(small_gaussian(rng), 0, 2 * rng.gen_range(0..=1));
        let t = GaussianForm::monomial(n, c, rng.gen_range(0..=max_damp), &mono, &idx).expect("valid");
        out = out.add(&t);
    }
    out
}
