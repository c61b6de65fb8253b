//! The Goodwillie equivalence between `X(TA)` and the `(b+B)`-complex `ΩTA`.
//!
//! `ΩTA` is stored natively as forms over [`TensorAlgebra`]: a letter is a
//! whole tensor word, products are concatenations. Every operator here (`b`,
//! `B`, `𝐝`, `∇`, `φ`) preserves the total tensor length of a word, and each
//! letter has length ≥ 1, so an input of total length `L` never produces a word
//! of outer degree above `L`: with `trunc ≥ L` all identities are exact.
//!
//! `X₁(TA) = Ω¹TA_♮` is kept in the normal form `T̃A ⊗ A`, i.e. degree-one
//! words `♮x̃ 𝐝a` whose single letter has length one.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{AlgebraHom, FiniteAlgebra, TensorAlgebra, TensorWord};
use crate::error::{Error, Result};
use crate::fedosov::{from_tensor, to_tensor, XChain};
use crate::forms::{add_term, Form, Terms, Word};
use crate::scalar::Field;

/// An element of `ΩT̃A`, truncated in outer degree.
pub type OmegaTA<F> = Form<TensorAlgebra<F>>;

fn word<F: Field>(ta: &Arc<TensorAlgebra<F>>, trunc: usize, head: Option<TensorWord>, letters: Vec<TensorWord>, c: F) -> OmegaTA<F> {
    Form::word(ta, trunc, head, letters, c)
}

/// `φ : TA → Ω²TA`, from `φ(a) = 0` and `φ(a ⊗ x) = aφ(x) + 𝐝a 𝐝x`.
pub fn phi_word<F: Field>(ta: &Arc<TensorAlgebra<F>>, trunc: usize, x: &[u16]) -> OmegaTA<F> {
    if x.len() <= 1 {
        return Form::zero(ta, trunc);
    }
    let (a, rest) = (vec![x[0]], x[1..].to_vec());
    let tail = phi_word(ta, trunc, &rest);
    let left = word(ta, trunc, Some(a.clone()), vec![], F::one()).mul(&tail).expect("same tensor algebra");
    left.add(&word(ta, trunc, None, vec![a, rest], F::one())).expect("same tensor algebra")
}

fn map_words<F: Field>(w: &OmegaTA<F>, f: impl Fn(&Word<TensorWord>, &F) -> OmegaTA<F>) -> OmegaTA<F> {
    let mut out = Form::zero(w.algebra(), w.trunc());
    for (word, c) in w.terms() {
        out = out.add(&f(word, c)).expect("same tensor algebra");
    }
    out
}

/// `∇ : Ωⁿ → Ωⁿ⁺¹` for `n ≥ 1`, from `∇(x₀𝐝x₁) = x₀φ(x₁)` and
/// `∇(ω𝐝x) = (∇ω)𝐝x`.
pub fn nabla<F: Field>(w: &OmegaTA<F>) -> Result<OmegaTA<F>> {
    if w.terms().keys().any(|k| k.degree() == 0) {
        return Err(Error::DegreeZeroInput);
    }
    let ta = w.algebra().clone();
    let trunc = w.trunc();
    Ok(map_words(w, |k, c| {
        let head = Form::word(&ta, trunc, k.head.clone(), vec![], c.clone());
        let tail = word(&ta, trunc, None, k.letters[1..].to_vec(), F::one());
        head.mul(&phi_word(&ta, trunc, &k.letters[0])).and_then(|x| x.mul(&tail)).expect("same tensor algebra")
    }))
}

/// `φ = ∇B` on forms; on degree zero this is `φ(x₀)`.
pub fn phi<F: Field>(w: &OmegaTA<F>) -> OmegaTA<F> {
    let b = w.connes_b();
    if b.is_zero() {
        return Form::zero(w.algebra(), w.trunc());
    }
    nabla(&b).expect("B lands in degree ≥ 1")
}

/// `Σᵢ (−)^{ni} φ(xᵢ) 𝐝xᵢ₊₁ … 𝐝xᵢ₋₁`: the explicit form of `φ` on `Ωⁿ`.
pub fn phi_explicit<F: Field>(w: &OmegaTA<F>) -> OmegaTA<F> {
    let ta = w.algebra().clone();
    let trunc = w.trunc();
    map_words(w, |k, c| {
        let Some(h) = &k.head else { return Form::zero(&ta, trunc) };
        let mut all = vec![h.clone()];
        all.extend(k.letters.iter().cloned());
        let n = k.degree();
        let mut out = Form::zero(&ta, trunc);
        for i in 0..=n {
            let rest: Vec<TensorWord> = all[i + 1..].iter().chain(all[..i].iter()).cloned().collect();
            let sign = if (n * i) % 2 == 1 { -c.clone() } else { c.clone() };
            let term = phi_word(&ta, trunc, &all[i]).mul(&word(&ta, trunc, None, rest, sign)).expect("same tensor algebra");
            out = out.add(&term).expect("same tensor algebra");
        }
        out
    })
}

/// `(1 − φ)⁻¹ = Σₖ φᵏ`, a finite sum since `φ` raises outer degree by two at
/// fixed total length.
pub fn one_minus_phi_inv<F: Field>(w: &OmegaTA<F>) -> OmegaTA<F> {
    let mut out = w.clone();
    let mut p = w.clone();
    loop {
        p = phi(&p);
        if p.is_zero() {
            return out;
        }
        out = out.add(&p).expect("same tensor algebra");
    }
}

/// Total tensor length of a word of `ΩTA`.
pub fn total_length(w: &Word<TensorWord>) -> usize {
    w.head.as_ref().map_or(0, |h| h.len()) + w.letters.iter().map(|l| l.len()).sum::<usize>()
}

/// The smallest `k` with `φᵏ(x) = 0`.
pub fn phi_nilpotency<F: Field>(x: &OmegaTA<F>) -> usize {
    let mut k = 0;
    let mut p = x.clone();
    while !p.is_zero() {
        p = phi(&p);
        k += 1;
    }
    k
}

// ---------------------------------------------------------------------------
// X(TA) in its native normal form.

/// `X(TA) = TA ⊕ Ω¹TA_♮`: the even part has degree zero, the odd part is a
/// sum of `♮x̃ 𝐝a` with `a` a single basis letter.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorXChain<F: Field> {
    pub even: OmegaTA<F>,
    pub odd: OmegaTA<F>,
}

/// The normal form of a class `♮ω` for `ω ∈ Ω¹TA`:
/// `♮x 𝐝(b₁⊗…⊗bₖ) = Σᵢ ♮(bᵢ₊₁…bₖ x b₁…bᵢ₋₁) 𝐝bᵢ`.
pub fn natural<F: Field>(w: &OmegaTA<F>) -> Result<OmegaTA<F>> {
    if w.terms().keys().any(|k| k.degree() != 1) {
        return Err(Error::WrongDegree { expected: "1".into(), got: w.max_degree().unwrap_or(0) });
    }
    let mut out = Terms::new();
    for (k, c) in w.terms() {
        let y = &k.letters[0];
        for i in 0..y.len() {
            let mut head: TensorWord = y[i + 1..].to_vec();
            if let Some(h) = &k.head {
                head.extend_from_slice(h);
            }
            head.extend_from_slice(&y[..i]);
            let head = if head.is_empty() { None } else { Some(head) };
            add_term(&mut out, Word::new(head, vec![vec![y[i]]]), c.clone());
        }
    }
    Ok(Form::from_terms(w.algebra(), w.trunc(), out))
}

impl<F: Field> TensorXChain<F> {
    pub fn new(even: OmegaTA<F>, odd: OmegaTA<F>) -> Result<Self> {
        if even.terms().keys().any(|k| k.degree() != 0) {
            return Err(Error::WrongDegree { expected: "0".into(), got: even.max_degree().unwrap_or(0) });
        }
        let odd = natural(&odd)?;
        Ok(TensorXChain { even, odd })
    }

    pub fn zero(ta: &Arc<TensorAlgebra<F>>, trunc: usize) -> Self {
        TensorXChain { even: Form::zero(ta, trunc), odd: Form::zero(ta, trunc) }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(TensorXChain { even: self.even.add(&o.even)?, odd: self.odd.add(&o.odd)? })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(TensorXChain { even: self.even.sub(&o.even)?, odd: self.odd.sub(&o.odd)? })
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    /// `(♮𝐝, b̄)`: `x ↦ ♮𝐝x` and `♮x𝐝a ↦ [x, a]`.
    pub fn boundary(&self) -> Result<Self> {
        Ok(TensorXChain { even: self.odd.b(), odd: natural(&self.even.d())? })
    }
}

/// `π : ΩTA → X(TA)`: keep degree zero, take `♮` of degree one, drop the rest.
pub fn pi<F: Field>(w: &OmegaTA<F>) -> Result<TensorXChain<F>> {
    Ok(TensorXChain { even: w.part(0), odd: natural(&w.part(1))? })
}

/// `γ : X(TA) → ΩTA`: `x ↦ (1−φ)⁻¹x` and `♮x𝐝a ↦ (1−φ)⁻¹(x𝐝a)` (the
/// correction `b(xφ(a))` vanishes since `φ(a) = 0`).
pub fn gamma<F: Field>(x: &TensorXChain<F>) -> OmegaTA<F> {
    one_minus_phi_inv(&x.even.add(&x.odd).expect("same tensor algebra"))
}

/// `γ(♮x𝐝y) = (1−φ)⁻¹(x𝐝y + b(xφ(y)))` for any representative `x𝐝y`.
pub fn gamma_representative<F: Field>(w: &OmegaTA<F>) -> Result<OmegaTA<F>> {
    if w.terms().keys().any(|k| k.degree() != 1) {
        return Err(Error::WrongDegree { expected: "1".into(), got: w.max_degree().unwrap_or(0) });
    }
    let ta = w.algebra().clone();
    let trunc = w.trunc();
    let corr = map_words(w, |k, c| {
        let head = Form::word(&ta, trunc, k.head.clone(), vec![], c.clone());
        head.mul(&phi_word(&ta, trunc, &k.letters[0])).expect("same tensor algebra").b()
    });
    Ok(one_minus_phi_inv(&w.add(&corr)?))
}

/// `Q = γπ`.
pub fn q_projection<F: Field>(w: &OmegaTA<F>) -> Result<OmegaTA<F>> {
    Ok(gamma(&pi(w)?))
}

/// `h = (1−φ)⁻¹ ∇ (1 − Q)`. `(1 − Q)ω` lies in `Θ = bΩ² ⊕ Ω^{≥2}`, so it has
/// no degree-zero component.
pub fn homotopy_h<F: Field>(w: &OmegaTA<F>) -> Result<OmegaTA<F>> {
    let r = w.sub(&q_projection(w)?)?;
    debug_assert!(r.part(0).is_zero());
    if r.is_zero() {
        return Ok(r);
    }
    Ok(one_minus_phi_inv(&nabla(&r)?))
}

// ---------------------------------------------------------------------------
// Passage to the form picture `X(TA) ≅ ΩA`, `x ⊗ a ↔ x da`.

/// Send the native chain to even/odd forms over `A`.
pub fn to_form_picture<F: Field>(x: &TensorXChain<F>, alg: &Arc<FiniteAlgebra<F>>, trunc: usize) -> Result<XChain<FiniteAlgebra<F>>> {
    let even = from_tensor(alg, trunc, &tensor_terms(&x.even))?;
    let mut odd = Form::zero(alg, trunc);
    for (k, c) in x.odd.terms() {
        let mut t = BTreeMap::new();
        t.insert(k.head.clone().unwrap_or_default(), c.clone());
        let head = from_tensor(alg, trunc, &t)?;
        let da = Form::word(alg, trunc, None, vec![k.letters[0][0]], F::one());
        odd = odd.add(&head.mul(&da)?)?;
    }
    XChain::new(even, odd)
}

fn tensor_terms<F: Field>(w: &OmegaTA<F>) -> BTreeMap<Vec<u16>, F> {
    w.terms().iter().map(|(k, c)| (k.head.clone().unwrap_or_default(), c.clone())).collect()
}

/// The inverse of [`to_form_picture`].
pub fn from_form_picture<F: Field>(x: &XChain<FiniteAlgebra<F>>, ta: &Arc<TensorAlgebra<F>>, trunc: usize) -> Result<TensorXChain<F>> {
    let from_terms = |t: BTreeMap<Vec<u16>, F>| -> OmegaTA<F> {
        let mut out = Terms::new();
        for (w, c) in t {
            add_term(&mut out, Word::new(if w.is_empty() { None } else { Some(w) }, vec![]), c);
        }
        Form::from_terms(ta, trunc, out)
    };
    let even = from_terms(to_tensor(&x.even)?);
    let mut odd = Form::zero(ta, trunc);
    for (w, c) in x.odd.terms() {
        let (prefix, last) = w.letters.split_at(w.letters.len() - 1);
        let alg = x.odd.algebra();
        let head = Form::word(alg, x.odd.trunc(), w.head, prefix.to_vec(), c.clone());
        let tensor = from_terms(to_tensor(&head)?);
        let da = word(ta, trunc, None, vec![vec![last[0]]], F::one());
        odd = odd.add(&tensor.mul(&da)?)?;
    }
    Ok(TensorXChain { even, odd })
}

/// The form-picture XChain through `γ`.
pub fn gamma_forms<F: Field>(x: &XChain<FiniteAlgebra<F>>, ta: &Arc<TensorAlgebra<F>>, trunc: usize) -> Result<OmegaTA<F>> {
    Ok(gamma(&from_form_picture(x, ta, trunc)?))
}

// ---------------------------------------------------------------------------
// Homomorphisms.

/// `ρ* : ΩT̃A → ΩT̃B`, `a₁⊗…⊗aₙ ↦ ρ(a₁)⊗…⊗ρ(aₙ)` on every letter.
pub fn map_hom<F: Field>(w: &OmegaTA<F>, hom: &AlgebraHom<F>, target: &Arc<TensorAlgebra<F>>) -> OmegaTA<F> {
    let map_tensor = |t: &TensorWord| -> Vec<(TensorWord, F)> {
        let mut acc: Vec<(TensorWord, F)> = vec![(vec![], F::one())];
        for a in t {
            let img = hom.image(*a as usize);
            let mut next = Vec::new();
            for (w, c) in &acc {
                for (k, v) in img.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                    let mut w2 = w.clone();
                    w2.push(k as u16);
                    next.push((w2, c.clone() * v.clone()));
                }
            }
            acc = next;
        }
        acc
    };
    let mut out = Terms::new();
    for (k, c) in w.terms() {
        let mut acc: Vec<(Word<TensorWord>, F)> = match &k.head {
            None => vec![(Word::new(None, vec![]), c.clone())],
            Some(h) => map_tensor(h).into_iter().map(|(t, v)| (Word::new(Some(t), vec![]), c.clone() * v)).collect(),
        };
        for l in &k.letters {
            let img = map_tensor(l);
            let mut next = Vec::new();
            for (w, x) in &acc {
                for (t, v) in &img {
                    let mut w2 = w.clone();
                    w2.letters.push(t.clone());
                    next.push((w2, x.clone() * v.clone()));
                }
            }
            acc = next;
        }
        for (w, x) in acc {
            add_term(&mut out, w, x);
        }
    }
    Form::from_terms(target, w.trunc(), out)
}

/// `X(ρ*)`.
pub fn x_of_hom<F: Field>(x: &TensorXChain<F>, hom: &AlgebraHom<F>, target: &Arc<TensorAlgebra<F>>) -> Result<TensorXChain<F>> {
    Ok(TensorXChain { even: map_hom(&x.even, hom, target), odd: natural(&map_hom(&x.odd, hom, target))? })
}

/// `χ` of the bimodule `(T̃B, ρ*, 0)`: `x ↦ ρ*(x)`, `x𝐝y ↦ ♮ρ*(x)𝐝ρ*(y)`,
/// zero in degree ≥ 2.
pub fn chi_of_hom<F: Field>(w: &OmegaTA<F>, hom: &AlgebraHom<F>, target: &Arc<TensorAlgebra<F>>) -> Result<TensorXChain<F>> {
    Ok(TensorXChain { even: map_hom(&w.part(0), hom, target), odd: natural(&map_hom(&w.part(1), hom, target))? })
}

/// Every basis word of `ΩT̃A` with outer degree `n`, letters of length
/// `1..=max_letter` and head of length `0..=max_letter` (length 0 is `1̃`).
pub fn basis_words_omega_ta(dim: usize, n: usize, max_letter: usize) -> Vec<Word<TensorWord>> {
    let mut tensors: Vec<TensorWord> = vec![];
    let mut layer: Vec<TensorWord> = vec![vec![]];
    for _ in 0..max_letter {
        let mut next = vec![];
        for w in &layer {
            for a in 0..dim as u16 {
                let mut w2 = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        tensors.extend(next.iter().cloned());
        layer = next;
    }
    let mut out: Vec<Word<TensorWord>> = std::iter::once(None).chain(tensors.iter().cloned().map(Some)).map(|h| Word::new(h, vec![])).collect();
    for _ in 0..n {
        let mut next = vec![];
        for w in &out {
            for t in &tensors {
                let mut w2 = w.clone();
                w2.letters.push(t.clone());
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

/// Helper: the element of `ΩT̃A` of a single word.
pub fn omega_ta_word<F: Field>(ta: &Arc<TensorAlgebra<F>>, trunc: usize, w: &Word<TensorWord>, c: F) -> OmegaTA<F> {
    word(ta, trunc, w.head.clone(), w.letters.clone(), c)
}
