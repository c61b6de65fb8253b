//! Universal (noncommutative) differential forms `ΩA` over an algebra given by
//! a basis, with the Hochschild boundary `b`, the Karoubi operator `κ`, the
//! Connes operator `B`, the spectral projection onto the generalized
//! 1-eigenspace of `κ²`, and the commutator quotients.
//!
//! A basis word `ã₀ da₁ … daₙ` has `ã₀` in the unitalization; `head = None`
//! stands for the adjoined unit. The word with no head and no letters is the
//! unit of `Ω̃A`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraHom, BasisAlgebra, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{Poly, Subspace};
use crate::scalar::{Field, Gaussian, Rat};

/// A basis word `ã₀ da₁ … daₙ`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Word<I> {
    pub head: Option<I>,
    pub letters: Vec<I>,
}

impl<I: Ord> Ord for Word<I> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&o.letters.len())
            .then_with(|| self.head.cmp(&o.head))
            .then_with(|| self.letters.cmp(&o.letters))
    }
}
impl<I: Ord> PartialOrd for Word<I> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<I: Clone> Word<I> {
    pub fn new(head: Option<I>, letters: Vec<I>) -> Self {
        Word { head, letters }
    }
    pub fn unit() -> Self {
        Word { head: None, letters: vec![] }
    }
    pub fn degree(&self) -> usize {
        self.letters.len()
    }
    fn appended(&self, extra: &[I]) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(extra);
        Word { head: self.head.clone(), letters }
    }
}

/// Sparse linear combination of words.
pub type Terms<I, F> = BTreeMap<Word<I>, F>;

pub(crate) fn add_term<I: Ord, F: Field>(t: &mut Terms<I, F>, w: Word<I>, c: F) {
    if c.is_zero() {
        return;
    }
    match t.entry(w) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let v = e.get().clone() + c;
            if v.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = v;
            }
        }
    }
}

pub(crate) fn add_terms<I: Ord + Clone, F: Field>(t: &mut Terms<I, F>, o: &Terms<I, F>, scale: &F) {
    for (w, c) in o {
        add_term(t, w.clone(), c.clone() * scale.clone());
    }
}

fn sign<F: Field>(odd: bool) -> F {
    if odd {
        -F::one()
    } else {
        F::one()
    }
}

// ---------------------------------------------------------------------------
// Word-level operations. None of these truncate.

/// `a · w` for a basis element `a`.
pub fn left_mul_basis<A: BasisAlgebra>(alg: &A, a: &A::Idx, w: &Word<A::Idx>, c: &A::F, out: &mut Terms<A::Idx, A::F>) {
    match &w.head {
        None => add_term(out, Word { head: Some(a.clone()), letters: w.letters.clone() }, c.clone()),
        Some(h) => {
            for (k, s) in alg.mul_basis(a, h) {
                add_term(out, Word { head: Some(k), letters: w.letters.clone() }, c.clone() * s);
            }
        }
    }
}

/// `w · b` for a basis element `b`, moving `b` to the front with
/// `ω da · b = ω d(ab) - (ω a) db`.
pub fn right_mul_basis<A: BasisAlgebra>(alg: &A, w: &Word<A::Idx>, b: &A::Idx, c: &A::F, out: &mut Terms<A::Idx, A::F>) {
    let n = w.letters.len();
    if n == 0 {
        match &w.head {
            None => add_term(out, Word { head: Some(b.clone()), letters: vec![] }, c.clone()),
            Some(h) => {
                for (k, s) in alg.mul_basis(h, b) {
                    add_term(out, Word { head: Some(k), letters: vec![] }, c.clone() * s);
                }
            }
        }
        return;
    }
    let a = &w.letters[n - 1];
    let prefix = Word { head: w.head.clone(), letters: w.letters[..n - 1].to_vec() };
    for (k, s) in alg.mul_basis(a, b) {
        let mut letters = prefix.letters.clone();
        letters.push(k);
        add_term(out, Word { head: prefix.head.clone(), letters }, c.clone() * s);
    }
    let mut tmp = Terms::new();
    right_mul_basis(alg, &prefix, a, c, &mut tmp);
    for (u, s) in tmp {
        add_term(out, u.appended(std::slice::from_ref(b)), -s);
    }
}

/// Product of two words.
pub fn mul_words<A: BasisAlgebra>(alg: &A, w1: &Word<A::Idx>, w2: &Word<A::Idx>, c: &A::F, out: &mut Terms<A::Idx, A::F>) {
    match &w2.head {
        None => add_term(out, w1.appended(&w2.letters), c.clone()),
        Some(h) => {
            if w2.letters.is_empty() {
                right_mul_basis(alg, w1, h, c, out);
            } else {
                let mut tmp = Terms::new();
                right_mul_basis(alg, w1, h, c, &mut tmp);
                for (u, s) in tmp {
                    add_term(out, u.appended(&w2.letters), s);
                }
            }
        }
    }
}

pub fn mul_terms<A: BasisAlgebra>(alg: &A, x: &Terms<A::Idx, A::F>, y: &Terms<A::Idx, A::F>) -> Terms<A::Idx, A::F> {
    let mut out = Terms::new();
    for (w1, c1) in x {
        for (w2, c2) in y {
            mul_words(alg, w1, w2, &(c1.clone() * c2.clone()), &mut out);
        }
    }
    out
}

/// `d(ã₀ da₁…daₙ) = dã₀ da₁…daₙ`, zero on unit heads.
pub fn d_terms<I: Ord + Clone, F: Field>(x: &Terms<I, F>) -> Terms<I, F> {
    let mut out = Terms::new();
    for (w, c) in x {
        if let Some(h) = &w.head {
            let mut letters = Vec::with_capacity(w.letters.len() + 1);
            letters.push(h.clone());
            letters.extend_from_slice(&w.letters);
            add_term(&mut out, Word { head: None, letters }, c.clone());
        }
    }
    out
}

/// `b(ω da) = (-1)^{|ω|} [ω, a]`, zero on degree 0. Inhomogeneous input is
/// handled word by word, i.e. on each homogeneous component.
pub fn b_terms<A: BasisAlgebra>(alg: &A, x: &Terms<A::Idx, A::F>) -> Terms<A::Idx, A::F> {
    let mut out = Terms::new();
    for (w, c) in x {
        let n = w.letters.len();
        if n == 0 {
            continue;
        }
        let a = &w.letters[n - 1];
        let omega = Word { head: w.head.clone(), letters: w.letters[..n - 1].to_vec() };
        let s = c.clone() * sign::<A::F>((n - 1) % 2 == 1);
        right_mul_basis(alg, &omega, a, &s, &mut out);
        left_mul_basis(alg, a, &omega, &(-s), &mut out);
    }
    out
}

/// `κ = 1 - (db + bd)`.
pub fn kappa_terms<A: BasisAlgebra>(alg: &A, x: &Terms<A::Idx, A::F>) -> Terms<A::Idx, A::F> {
    let mut out = x.clone();
    let db = d_terms(&b_terms(alg, x));
    let bd = b_terms(alg, &d_terms(x));
    add_terms(&mut out, &db, &-A::F::one());
    add_terms(&mut out, &bd, &-A::F::one());
    out
}

/// `κ(ω da) = (-1)^{|ω|} da ω`, the closed formula; kept as an independent
/// route for testing.
pub fn kappa_direct<A: BasisAlgebra>(alg: &A, x: &Terms<A::Idx, A::F>) -> Terms<A::Idx, A::F> {
    let mut out = Terms::new();
    for (w, c) in x {
        let n = w.letters.len();
        if n == 0 {
            add_term(&mut out, w.clone(), c.clone());
            continue;
        }
        let a = w.letters[n - 1].clone();
        let omega = Word { head: w.head.clone(), letters: w.letters[..n - 1].to_vec() };
        let da = Word { head: None, letters: vec![a] };
        mul_words(alg, &da, &omega, &(c.clone() * sign::<A::F>((n - 1) % 2 == 1)), &mut out);
    }
    out
}

/// Split by degree.
pub fn by_degree<I: Ord + Clone, F: Field>(x: &Terms<I, F>) -> BTreeMap<usize, Terms<I, F>> {
    let mut m: BTreeMap<usize, Terms<I, F>> = BTreeMap::new();
    for (w, c) in x {
        m.entry(w.degree()).or_default().insert(w.clone(), c.clone());
    }
    m
}

/// `B = (1 + κ + … + κⁿ) d` on `Ωⁿ`.
pub fn connes_b_terms<A: BasisAlgebra>(alg: &A, x: &Terms<A::Idx, A::F>) -> Terms<A::Idx, A::F> {
    let mut out = Terms::new();
    for (n, part) in by_degree(x) {
        let mut y = d_terms(&part);
        add_terms(&mut out, &y, &A::F::one());
        for _ in 0..n {
            y = kappa_terms(alg, &y);
            add_terms(&mut out, &y, &A::F::one());
        }
    }
    out
}

/// Evaluate a polynomial in `κ` on `x` (Horner).
pub fn kappa_poly_terms<A: BasisAlgebra>(alg: &A, p: &Poly, x: &Terms<A::Idx, A::F>) -> Terms<A::Idx, A::F> {
    let mut acc = Terms::new();
    for c in p.0.iter().rev() {
        acc = kappa_terms(alg, &acc);
        add_terms(&mut acc, x, &A::F::from_rat(c));
    }
    acc
}

/// The idempotent polynomial `e` with `e(κ)` the projection of `Ωⁿ` onto the
/// generalized eigenspace of `κ²` at 1, along the complementary generalized
/// eigenspaces. Uses that `(κⁿ - 1)(κⁿ⁺¹ - 1) = 0` on `Ωⁿ`.
pub fn spectral_projector_poly(n: usize) -> Poly {
    if n == 0 {
        return Poly::one();
    }
    let p = Poly::x_pow_minus_one(n).mul(&Poly::x_pow_minus_one(n + 1));
    // (x-1)^2 (x+1) collects the roots ±1 with their multiplicities in p
    let f = Poly::linear(1).mul(&Poly::linear(1)).mul(&Poly::linear(-1));
    let (q, r) = p.divrem(&f);
    debug_assert!(r.is_zero());
    let (g, _u, v) = Poly::ext_gcd(&f, &q);
    debug_assert_eq!(g, Poly::one());
    v.mul(&q)
}

// ---------------------------------------------------------------------------
// The form type.

/// A truncated element of `Ω̃A`: words of degree above `trunc` are dropped and
/// `overflowed` records that this happened somewhere in its history.
pub struct Form<A: BasisAlgebra> {
    alg: Arc<A>,
    trunc: usize,
    terms: Terms<A::Idx, A::F>,
    overflowed: bool,
}

impl<A: BasisAlgebra> Clone for Form<A> {
    fn clone(&self) -> Self {
        Form { alg: self.alg.clone(), trunc: self.trunc, terms: self.terms.clone(), overflowed: self.overflowed }
    }
}

impl<A: BasisAlgebra> PartialEq for Form<A> {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

impl<A: BasisAlgebra> fmt::Debug for Form<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{}]", self)
    }
}

impl<A: BasisAlgebra> Form<A> {
    pub fn zero(alg: &Arc<A>, trunc: usize) -> Self {
        Form { alg: alg.clone(), trunc, terms: Terms::new(), overflowed: false }
    }

    pub fn from_terms(alg: &Arc<A>, trunc: usize, terms: Terms<A::Idx, A::F>) -> Self {
        let mut f = Form::zero(alg, trunc);
        f.absorb(terms);
        f
    }

    /// The single word `c · head d[letters…]`.
    pub fn word(alg: &Arc<A>, trunc: usize, head: Option<A::Idx>, letters: Vec<A::Idx>, c: A::F) -> Self {
        let mut t = Terms::new();
        add_term(&mut t, Word { head, letters }, c);
        Form::from_terms(alg, trunc, t)
    }

    /// The unit of `Ω̃A`.
    pub fn unit(alg: &Arc<A>, trunc: usize) -> Self {
        Form::word(alg, trunc, None, vec![], A::F::one())
    }

    /// A degree-zero element `Σ cᵢ eᵢ` with an optional unit component.
    pub fn element(alg: &Arc<A>, trunc: usize, coeffs: &[(A::Idx, A::F)], unit: Option<A::F>) -> Self {
        let mut t = Terms::new();
        for (i, c) in coeffs {
            add_term(&mut t, Word { head: Some(i.clone()), letters: vec![] }, c.clone());
        }
        if let Some(u) = unit {
            add_term(&mut t, Word::unit(), u);
        }
        Form::from_terms(alg, trunc, t)
    }

    fn absorb(&mut self, terms: Terms<A::Idx, A::F>) {
        let before = terms.len();
        let trunc = self.trunc;
        self.terms = terms.into_iter().filter(|(w, _)| w.degree() <= trunc).collect();
        if self.terms.len() != before {
            self.overflowed = true;
        }
    }

    fn derived(&self, terms: Terms<A::Idx, A::F>) -> Self {
        let mut f = Form { alg: self.alg.clone(), trunc: self.trunc, terms: Terms::new(), overflowed: self.overflowed };
        f.absorb(terms);
        f
    }

    fn same_algebra(&self, o: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.alg, &o.alg) || *self.alg == *o.alg {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub fn algebra(&self) -> &Arc<A> {
        &self.alg
    }
    pub fn trunc(&self) -> usize {
        self.trunc
    }
    pub fn terms(&self) -> &Terms<A::Idx, A::F> {
        &self.terms
    }
    pub fn into_terms(self) -> Terms<A::Idx, A::F> {
        self.terms
    }
    /// Whether terms beyond the truncation were dropped while producing this form.
    pub fn overflowed(&self) -> bool {
        self.overflowed
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.degree()).max()
    }
    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.degree()).min()
    }
    pub fn with_trunc(&self, trunc: usize) -> Self {
        let mut f = self.clone();
        f.trunc = trunc;
        let t = std::mem::take(&mut f.terms);
        f.absorb(t);
        f
    }

    /// The degree-`n` component.
    pub fn part(&self, n: usize) -> Self {
        self.derived(self.terms.iter().filter(|(w, _)| w.degree() == n).map(|(w, c)| (w.clone(), c.clone())).collect())
    }

    /// Components of even (`parity = 0`) or odd degree.
    pub fn parity_part(&self, parity: usize) -> Self {
        self.derived(self.terms.iter().filter(|(w, _)| w.degree() % 2 == parity).map(|(w, c)| (w.clone(), c.clone())).collect())
    }

    pub fn coeff(&self, head: Option<A::Idx>, letters: &[A::Idx]) -> A::F {
        self.terms.get(&Word { head, letters: letters.to_vec() }).cloned().unwrap_or_else(A::F::zero)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_algebra(o)?;
        let mut t = self.terms.clone();
        add_terms(&mut t, &o.terms, &A::F::one());
        let mut f = self.derived(t);
        f.overflowed |= o.overflowed;
        f.trunc = self.trunc.min(o.trunc);
        let t = std::mem::take(&mut f.terms);
        f.absorb(t);
        Ok(f)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-A::F::one())
    }

    pub fn scale(&self, c: &A::F) -> Self {
        let mut t = Terms::new();
        for (w, x) in &self.terms {
            add_term(&mut t, w.clone(), x.clone() * c.clone());
        }
        self.derived(t)
    }

    /// Product with the Leibniz rule. Terms above the truncation are dropped
    /// and flagged.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_algebra(o)?;
        let mut f = self.derived(mul_terms(&*self.alg, &self.terms, &o.terms));
        f.overflowed |= o.overflowed;
        Ok(f)
    }

    pub fn d(&self) -> Self {
        self.derived(d_terms(&self.terms))
    }

    pub fn b(&self) -> Self {
        self.derived(b_terms(&*self.alg, &self.terms))
    }

    pub fn kappa(&self) -> Self {
        self.derived(kappa_terms(&*self.alg, &self.terms))
    }

    pub fn connes_b(&self) -> Self {
        self.derived(connes_b_terms(&*self.alg, &self.terms))
    }

    /// `b + B`.
    pub fn b_plus_b(&self) -> Self {
        let mut t = b_terms(&*self.alg, &self.terms);
        add_terms(&mut t, &connes_b_terms(&*self.alg, &self.terms), &A::F::one());
        self.derived(t)
    }

    /// Projection onto the generalized eigenspace of `κ²` at 1, degree by degree.
    pub fn spectral_projection(&self) -> Self {
        let mut t = Terms::new();
        for (n, part) in by_degree(&self.terms) {
            let p = spectral_projector_poly(n);
            add_terms(&mut t, &kappa_poly_terms(&*self.alg, &p, &part), &A::F::one());
        }
        self.derived(t)
    }

    /// Multiply the degree-`n` part by `(-1)^{⌊n/2⌋} ⌊n/2⌋!`.
    pub fn rescale_c(&self) -> Self {
        self.rescale_by(|n| rescale_factor(n))
    }

    /// Inverse of [`Form::rescale_c`].
    pub fn rescale_c_inv(&self) -> Self {
        self.rescale_by(|n| rescale_factor(n).recip().expect("nonzero"))
    }

    fn rescale_by(&self, f: impl Fn(usize) -> Rat) -> Self {
        let mut t = Terms::new();
        for (w, c) in &self.terms {
            add_term(&mut t, w.clone(), c.clone() * A::F::from_rat(&f(w.degree())));
        }
        self.derived(t)
    }

    /// Fail when any component would be pushed above the truncation by an
    /// operator raising degree by `raise`.
    pub fn require_headroom(&self, raise: usize) -> Result<()> {
        if let Some(m) = self.max_degree() {
            if m + raise > self.trunc {
                return Err(Error::TruncationOverflow { needed: m + raise, trunc: self.trunc });
            }
        }
        Ok(())
    }

    /// Graded commutator `[x, y] = xy - (-1)^{|x||y|} yx`, computed word by word.
    pub fn graded_commutator(&self, o: &Self) -> Result<Self> {
        self.same_algebra(o)?;
        let mut t = Terms::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let c = c1.clone() * c2.clone();
                mul_words(&*self.alg, w1, w2, &c, &mut t);
                let s = sign::<A::F>(w1.degree() * w2.degree() % 2 == 1);
                mul_words(&*self.alg, w2, w1, &(-(c * s)), &mut t);
            }
        }
        Ok(self.derived(t))
    }

    /// Print with a custom label function.
    pub fn render(&self, label: impl Fn(&A::Idx) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let body = render_word(w, &label);
            let cs = format!("{c}");
            let (neg, mag) = match cs.strip_prefix('-') {
                Some(m) if !m.contains(['+', '-']) => (true, m.to_string()),
                _ => (false, cs.clone()),
            };
            if k > 0 {
                out.push_str(if neg { " - " } else { " + " });
            } else if neg {
                out.push('-');
            }
            if mag != "1" {
                out.push_str(&mag);
                out.push('*');
            }
            out.push_str(&body);
        }
        out
    }
}

fn render_word<I>(w: &Word<I>, label: &impl Fn(&I) -> String) -> String {
    let mut parts = Vec::new();
    match &w.head {
        Some(h) => parts.push(label(h)),
        None if w.letters.is_empty() => parts.push("1~".into()),
        None => {}
    }
    for a in &w.letters {
        parts.push(format!("d[{}]", label(a)));
    }
    parts.join(" ")
}

impl<A: BasisAlgebra> fmt::Display for Form<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alg = self.alg.clone();
        write!(f, "{}", self.render(|i| alg.label(i)))
    }
}

/// `(-1)^{⌊n/2⌋} ⌊n/2⌋!`.
pub fn rescale_factor(n: usize) -> Rat {
    let h = n / 2;
    let f = Rat::factorial(h as u32);
    if h % 2 == 1 {
        -f
    } else {
        f
    }
}

// ---------------------------------------------------------------------------
// Forms over a finite-dimensional algebra.

pub type NCForm<F> = Form<FiniteAlgebra<F>>;

/// All basis words of degree `n`; heads range over `Ã` (for `n ≥ 1`) or `A`.
pub fn basis_words<F: Field>(alg: &FiniteAlgebra<F>, n: usize) -> Vec<Word<u16>> {
    let d = alg.dim();
    let mut heads: Vec<Option<u16>> = (0..d as u16).map(Some).collect();
    if n > 0 {
        heads.insert(0, None);
    }
    let mut out = Vec::new();
    let total = d.pow(n as u32);
    for h in heads {
        for mut code in 0..total {
            let mut letters = vec![0u16; n];
            for k in (0..n).rev() {
                letters[k] = (code % d) as u16;
                code /= d;
            }
            out.push(Word { head: h, letters });
        }
    }
    out
}

impl<F: Field> Form<FiniteAlgebra<F>> {
    /// Parse the text notation, e.g. `2*E11 d[E12] - (1/2+i)*d[E21] d[E11] + 1~`.
    /// Coefficients are Gaussian rationals followed by `*`; a word without a
    /// head starts with `d[...]`, and `1~` is the adjoined unit.
    pub fn parse(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, s: &str) -> Result<Self> {
        let mut t = Terms::new();
        for (neg, term) in split_terms(s)? {
            let (coeff, body) = match term.rsplit_once('*') {
                Some((c, b)) => (Gaussian::parse(c)?, b.trim().to_string()),
                None => (Gaussian::one(), term.trim().to_string()),
            };
            let coeff = if neg { -coeff } else { coeff };
            let mut head = None;
            let mut letters = Vec::new();
            for (k, tok) in body.split_whitespace().enumerate() {
                if let Some(inner) = tok.strip_prefix("d[").and_then(|x| x.strip_suffix(']')) {
                    let i = alg.index_of(inner).ok_or_else(|| Error::Parse(format!("unknown basis label '{inner}'")))?;
                    letters.push(i as u16);
                } else if k == 0 && tok == "1~" {
                    head = None;
                } else if k == 0 {
                    let i = alg.index_of(tok).ok_or_else(|| Error::Parse(format!("unknown basis label '{tok}'")))?;
                    head = Some(i as u16);
                } else {
                    return Err(Error::Parse(format!("unexpected token '{tok}'")));
                }
            }
            if body.is_empty() {
                return Err(Error::Parse("empty term".into()));
            }
            add_term(&mut t, Word { head, letters }, F::from_gaussian(&coeff));
        }
        Ok(Form::from_terms(alg, trunc, t))
    }

    /// Apply an algebra homomorphism letter by letter:
    /// `ã₀ da₁…daₙ ↦ φ(ã₀) dφ(a₁)…dφ(aₙ)`.
    pub fn map_hom(&self, hom: &AlgebraHom<F>) -> Result<Self> {
        if !(Arc::ptr_eq(&self.alg, &hom.src) || *self.alg == *hom.src) {
            return Err(Error::AlgebraMismatch);
        }
        let mut t = Terms::new();
        for (w, c) in &self.terms {
            let mut partial: Vec<(Word<u16>, F)> = match w.head {
                None => vec![(Word::unit(), c.clone())],
                Some(h) => hom
                    .image(h as usize)
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(k, x)| (Word { head: Some(k as u16), letters: vec![] }, c.clone() * x.clone()))
                    .collect(),
            };
            for a in &w.letters {
                let mut next = Vec::new();
                for (u, s) in &partial {
                    for (k, x) in hom.image(*a as usize).iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                        next.push((u.appended(&[k as u16]), s.clone() * x.clone()));
                    }
                }
                partial = next;
            }
            for (u, s) in partial {
                add_term(&mut t, u, s);
            }
        }
        Ok(Form { alg: hom.dst.clone(), trunc: self.trunc, terms: t, overflowed: self.overflowed })
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| FormTermJson {
                    coeff: format!("{c}"),
                    head: w.head.map(|h| self.alg.labels()[h as usize].clone()),
                    letters: w.letters.iter().map(|a| self.alg.labels()[*a as usize].clone()).collect(),
                })
                .collect(),
        }
    }
}

fn split_terms(s: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    let chars: Vec<char> = s.chars().collect();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        let sign_here = depth == 0 && (ch == '+' || ch == '-') && {
            // a sign separates terms unless it sits inside a coefficient such as 1/2+i
            let prev = cur.trim_end();
            prev.is_empty() || prev.ends_with(']') || prev.ends_with('~') || chars.get(k.wrapping_sub(1)) == Some(&' ')
        };
        if sign_here {
            if !cur.trim().is_empty() {
                out.push((neg, cur.trim().to_string()));
            }
            cur.clear();
            neg = ch == '-';
        } else {
            cur.push(ch);
        }
        k += 1;
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced brackets".into()));
    }
    if !cur.trim().is_empty() {
        out.push((neg, cur.trim().to_string()));
    }
    if out.is_empty() && !s.trim().is_empty() && s.trim() != "0" {
        return Err(Error::Parse(format!("cannot parse '{s}'")));
    }
    Ok(out)
}

/// JSON mirror of the text notation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub trunc: usize,
    pub terms: Vec<FormTermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormTermJson {
    pub coeff: String,
    pub head: Option<String>,
    pub letters: Vec<String>,
}

impl FormJson {
    pub fn build(&self, alg: &Arc<FiniteAlgebra<Gaussian>>) -> Result<NCForm<Gaussian>> {
        let mut t = Terms::new();
        let idx = |l: &str| alg.index_of(l).map(|i| i as u16).ok_or_else(|| Error::Parse(format!("unknown basis label '{l}'")));
        for term in &self.terms {
            let head = match &term.head {
                None => None,
                Some(h) => Some(idx(h)?),
            };
            let letters = term.letters.iter().map(|l| idx(l)).collect::<Result<Vec<_>>>()?;
            add_term(&mut t, Word { head, letters }, Gaussian::parse(&term.coeff)?);
        }
        Ok(Form::from_terms(alg, self.trunc, t))
    }
}

// ---------------------------------------------------------------------------
// Commutator quotients.

/// `Ω¹A / b(Ω²A)`, the odd part of the X-complex of `A`, with a canonical
/// representative for every class.
#[derive(Debug, Clone)]
pub struct Omega1Quotient<F: Field> {
    alg: Arc<FiniteAlgebra<F>>,
    sub: Subspace<Word<u16>, F>,
}

impl<F: Field> Omega1Quotient<F> {
    pub fn new(alg: &Arc<FiniteAlgebra<F>>) -> Self {
        let mut sub = Subspace::new();
        for w in basis_words(alg, 2) {
            let mut t = Terms::new();
            add_term(&mut t, w, F::one());
            sub.insert(&b_terms(&**alg, &t));
        }
        Omega1Quotient { alg: alg.clone(), sub }
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra<F>> {
        &self.alg
    }

    /// Dimension of `b(Ω²A)`.
    pub fn relations(&self) -> usize {
        self.sub.dim()
    }

    /// Canonical representative of the class of the degree-1 part of `x`.
    pub fn reduce(&self, x: &NCForm<F>) -> NCForm<F> {
        let one = x.part(1);
        Form::from_terms(&self.alg, x.trunc().max(1), self.sub.reduce(one.terms()))
    }

    pub fn reduce_terms(&self, x: &Terms<u16, F>) -> Terms<u16, F> {
        let one: Terms<u16, F> = x.iter().filter(|(w, _)| w.degree() == 1).map(|(w, c)| (w.clone(), c.clone())).collect();
        self.sub.reduce(&one)
    }
}

/// `ΩⁿA / [ΩA, ΩA]ⁿ`. Graded commutators in degree `n` are spanned by
/// `b(Ωⁿ⁺¹) + (1 - κ)Ωⁿ`, since `[ω, a] = ±b(ω da)` and `[ω, da] = (1 - κ)(ω da)`.
#[derive(Debug, Clone)]
pub struct CommutatorQuotient<F: Field> {
    degree: usize,
    sub: Subspace<Word<u16>, F>,
}

impl<F: Field> CommutatorQuotient<F> {
    pub fn new(alg: &FiniteAlgebra<F>, degree: usize) -> Self {
        let mut sub = Subspace::new();
        for w in basis_words(alg, degree + 1) {
            let mut t = Terms::new();
            add_term(&mut t, w, F::one());
            sub.insert(&b_terms(alg, &t));
        }
        for w in basis_words(alg, degree) {
            let mut t = Terms::new();
            add_term(&mut t, w, F::one());
            let mut r = t.clone();
            add_terms(&mut r, &kappa_terms(alg, &t), &-F::one());
            sub.insert(&r);
        }
        CommutatorQuotient { degree, sub }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn reduce(&self, x: &Terms<u16, F>) -> Terms<u16, F> {
        let part: Terms<u16, F> = x.iter().filter(|(w, _)| w.degree() == self.degree).map(|(w, c)| (w.clone(), c.clone())).collect();
        self.sub.reduce(&part)
    }
}

/// An even form standing for its class in `ΩA / [ΩA, ΩA]`.
#[derive(Debug, Clone)]
pub struct CommutatorClass<F: Field> {
    pub rep: NCForm<F>,
}

impl<F: Field> CommutatorClass<F> {
    /// Canonical representative in degree `n` (builds the quotient on demand).
    pub fn normal_form(&self, n: usize) -> Terms<u16, F> {
        CommutatorQuotient::new(self.rep.algebra(), n).reduce(self.rep.terms())
    }
}

/// `♮ exp(F)` with `F = dA + A²` for a 1-form `A`, truncated at `trunc`.
pub fn chern_form<F: Field>(connection: &NCForm<F>, trunc: usize) -> Result<CommutatorClass<F>> {
    if connection.terms().keys().any(|w| w.degree() != 1) {
        return Err(Error::WrongDegree { expected: "1".into(), got: connection.max_degree().unwrap_or(0) });
    }
    let a = connection.with_trunc(trunc);
    let curv = a.d().add(&a.mul(&a)?)?;
    let mut acc = Form::unit(a.algebra(), trunc);
    let mut power = Form::unit(a.algebra(), trunc);
    let mut k = 1u32;
    while 2 * k as usize <= trunc {
        power = power.mul(&curv)?;
        acc = acc.add(&power.scale(&F::from_rat(&Rat::factorial(k).recip().expect("nonzero"))))?;
        k += 1;
    }
    Ok(CommutatorClass { rep: acc })
}

// Forms as coefficients of graded matrices.

impl<A: BasisAlgebra> crate::linalg::DgRing for Form<A> {
    fn add(&self, o: &Self) -> Self {
        Form::add(self, o).expect("coefficient forms share an algebra")
    }
    fn mul(&self, o: &Self) -> Self {
        Form::mul(self, o).expect("coefficient forms share an algebra")
    }
    fn neg(&self) -> Self {
        Form::neg(self)
    }
    fn is_zero(&self) -> bool {
        Form::is_zero(self)
    }
    fn d(&self) -> Self {
        Form::d(self)
    }
    fn twist(&self) -> Self {
        let mut t = Terms::new();
        for (w, c) in &self.terms {
            let c = if w.degree() % 2 == 1 { -c.clone() } else { c.clone() };
            add_term(&mut t, w.clone(), c);
        }
        self.derived(t)
    }
    fn scale_rat(&self, r: &Rat) -> Self {
        self.scale(&A::F::from_rat(r))
    }
    fn form_part(&self, k: usize) -> Self {
        self.part(k)
    }
}
