//! The bar coalgebra `B̄(Ã)`, its free bicomodule `Ω₁B̄`, and algebra cochains.
//!
//! Chains are finite sums of basis words over a unitalized algebra `Ã`. Cochains
//! are finitely supported tables from basis words to graded matrices over a DG
//! coefficient ring, so that two cochains can be compared exactly.
//!
//! Degrees: a bar word `(a₁,…,aₙ)` has degree `n`; a bimodule word
//! `(a₁,…,a_{i−1}|aᵢ|a_{i+1},…,aₙ)` has degree `n` as well (all arguments
//! counted). A cochain `f` has degree `|f|` when `f(w)` has parity
//! `|f| + deg w` for every word `w`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::complex::Complex64;

use crate::algebra::{BasisAlgebra, FiniteAlgebra};
use crate::forms::Form;
use crate::linalg::{DgRing, SMat};
use crate::scalar::{Field, Gaussian};
use crate::{Error, Result};

pub const DEFAULT_TRUNC: usize = 6;

pub type BarWord = Vec<u16>;

/// `(−1)^k` as a field element.
fn sign<F: Field>(k: usize) -> F {
    if k % 2 == 0 {
        F::one()
    } else {
        -F::one()
    }
}

/// The Koszul sign of moving an element of degree `p` past one of degree `q`.
/// Every sign in this module that comes from permuting graded symbols goes
/// through here.
pub fn koszul(p: usize, q: usize) -> usize {
    (p * q) % 2
}

fn add_to<K: Ord, F: Field>(m: &mut BTreeMap<K, F>, k: K, c: F) {
    if c.is_zero() {
        return;
    }
    match m.entry(k) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get().clone() + c;
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// Products `xᵢ xᵢ₊₁` of adjacent letters, each merged word with its coefficient.
fn merge_at<F: Field>(alg: &FiniteAlgebra<F>, w: &[u16], i: usize) -> Vec<(BarWord, F)> {
    alg.mul(w[i] as usize, w[i + 1] as usize)
        .iter()
        .map(|(k, c)| {
            let mut v = Vec::with_capacity(w.len() - 1);
            v.extend_from_slice(&w[..i]);
            v.push(*k as u16);
            v.extend_from_slice(&w[i + 2..]);
            (v, c.clone())
        })
        .collect()
}

fn bprime_word<F: Field>(alg: &FiniteAlgebra<F>, w: &[u16], c: &F, out: &mut BTreeMap<BarWord, F>) {
    for i in 0..w.len().saturating_sub(1) {
        // position i (0-based) is the product a_{i+1}a_{i+2}: sign (−1)^{i}
        for (v, k) in merge_at(alg, w, i) {
            add_to(out, v, sign::<F>(i) * k * c.clone());
        }
    }
}

/// The unitalization `Ã` of a base algebra together with a word-length cap.
#[derive(Debug, Clone)]
pub struct BarSetting<F: Field> {
    pub base: Arc<FiniteAlgebra<F>>,
    pub tilde: Arc<FiniteAlgebra<F>>,
    pub trunc: usize,
}

impl<F: Field> BarSetting<F> {
    pub fn new(base: Arc<FiniteAlgebra<F>>, trunc: usize) -> Self {
        let tilde = Arc::new(base.unitalize());
        BarSetting { base, tilde, trunc }
    }

    /// Index of the adjoined unit in `Ã`.
    pub fn unit(&self) -> u16 {
        self.base.dim() as u16
    }

    /// Every bar word of length `n` over `Ã`.
    pub fn words(&self, n: usize) -> Vec<BarWord> {
        let d = self.tilde.dim() as u16;
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w: BarWord| {
                    (0..d).map(move |a| {
                        let mut v = w.clone();
                        v.push(a);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Every bimodule word with `n` arguments.
    pub fn bimod_words(&self, n: usize) -> Vec<BimodWord> {
        if n == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        for w in self.words(n) {
            for i in 0..n {
                out.push(BimodWord::from_flat(&w, i));
            }
        }
        out
    }

    /// The cotrace `♮(ã₀da₁…daₙ) = Σᵢ (−1)^{n(i+1)} (a_{i+1},…,aₙ|ã₀|a₁,…,aᵢ)`.
    pub fn cotrace(&self, w: &Form<FiniteAlgebra<F>>) -> Result<BarBimodElem<F>> {
        if w.algebra().as_ref() != self.base.as_ref() {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = BTreeMap::new();
        for (word, c) in w.terms() {
            let n = word.degree();
            if n + 1 > self.trunc {
                return Err(Error::TruncationOverflow { needed: n + 1, trunc: self.trunc });
            }
            let head = word.head.map_or(self.unit(), |h| h as u16);
            let letters: Vec<u16> = word.letters.iter().map(|&a| a as u16).collect();
            for i in 0..=n {
                let bw = BimodWord { left: letters[i..].to_vec(), mid: head, right: letters[..i].to_vec() };
                add_to(&mut out, bw, sign::<F>(n * (i + 1)) * c.clone());
            }
        }
        Ok(BarBimodElem { alg: self.tilde.clone(), trunc: self.trunc, terms: out })
    }
}

// ---------------------------------------------------------------------------
// Chains.

/// A finite combination of bar words `(a₁,…,aₙ)`, `n ≤ trunc`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarChain<F: Field> {
    alg: Arc<FiniteAlgebra<F>>,
    trunc: usize,
    terms: BTreeMap<BarWord, F>,
}

/// An element of `B̄ ⊗ B̄`.
pub type BarTensor<F> = BTreeMap<(BarWord, BarWord), F>;
/// An element of `B̄ ⊗ B̄ ⊗ B̄`.
pub type BarTensor3<F> = BTreeMap<(BarWord, BarWord, BarWord), F>;

impl<F: Field> BarChain<F> {
    pub fn zero(alg: &Arc<FiniteAlgebra<F>>, trunc: usize) -> Self {
        BarChain { alg: alg.clone(), trunc, terms: BTreeMap::new() }
    }

    pub fn word(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, w: BarWord, c: F) -> Result<Self> {
        if w.len() > trunc {
            return Err(Error::TruncationOverflow { needed: w.len(), trunc });
        }
        if let Some(&a) = w.iter().find(|&&a| a as usize >= alg.dim()) {
            return Err(Error::DimensionMismatch(format!("letter {a} outside an algebra of dimension {}", alg.dim())));
        }
        let mut out = Self::zero(alg, trunc);
        add_to(&mut out.terms, w, c);
        Ok(out)
    }

    pub fn terms(&self) -> &BTreeMap<BarWord, F> {
        &self.terms
    }
    pub fn algebra(&self) -> &Arc<FiniteAlgebra<F>> {
        &self.alg
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.alg != o.alg {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = self.clone();
        for (w, c) in &o.terms {
            add_to(&mut out.terms, w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&-F::one()))
    }

    pub fn scale(&self, s: &F) -> Self {
        let mut out = Self::zero(&self.alg, self.trunc);
        for (w, c) in &self.terms {
            add_to(&mut out.terms, w.clone(), c.clone() * s.clone());
        }
        out
    }

    /// `b′(a₁,…,aₙ) = Σ_{i=1}^{n−1} (−1)^{i−1} (a₁,…,aᵢaᵢ₊₁,…,aₙ)`.
    pub fn bprime(&self) -> Self {
        let mut out = Self::zero(&self.alg, self.trunc);
        for (w, c) in &self.terms {
            bprime_word(&self.alg, w, c, &mut out.terms);
        }
        out
    }

    /// The same operator written with the sign `(−1)^{i+1}`, as it appears in
    /// the first description of the bar complex. Kept separate so the two
    /// readings can be compared.
    pub fn bprime_alt(&self) -> Self {
        let mut out = Self::zero(&self.alg, self.trunc);
        for (w, c) in &self.terms {
            for i in 1..w.len() {
                for (v, k) in merge_at(&self.alg, w, i - 1) {
                    add_to(&mut out.terms, v, sign::<F>(i + 1) * k * c.clone());
                }
            }
        }
        out
    }

    pub fn coproduct(&self) -> BarTensor<F> {
        let mut out = BTreeMap::new();
        for (w, c) in &self.terms {
            for i in 0..=w.len() {
                add_to(&mut out, (w[..i].to_vec(), w[i..].to_vec()), c.clone());
            }
        }
        out
    }

    /// Projection onto the empty word.
    pub fn counit(&self) -> F {
        self.terms.get(&vec![]).cloned().unwrap_or_else(F::zero)
    }
}

/// `(Δ ⊗ 1)Δ`.
pub fn coproduct_left<F: Field>(t: &BarTensor<F>) -> BarTensor3<F> {
    let mut out = BTreeMap::new();
    for ((x, y), c) in t {
        for i in 0..=x.len() {
            add_to(&mut out, (x[..i].to_vec(), x[i..].to_vec(), y.clone()), c.clone());
        }
    }
    out
}

/// `(1 ⊗ Δ)Δ`.
pub fn coproduct_right<F: Field>(t: &BarTensor<F>) -> BarTensor3<F> {
    let mut out = BTreeMap::new();
    for ((x, y), c) in t {
        for i in 0..=y.len() {
            add_to(&mut out, (x.clone(), y[..i].to_vec(), y[i..].to_vec()), c.clone());
        }
    }
    out
}

/// `(b′ ⊗ 1 + 1 ⊗ b′)` on `B̄ ⊗ B̄`, with `(1 ⊗ b′)(x ⊗ y) = (−1)^{|x|} x ⊗ b′y`.
pub fn tensor_bprime<F: Field>(alg: &FiniteAlgebra<F>, t: &BarTensor<F>) -> BarTensor<F> {
    let mut out = BTreeMap::new();
    for ((x, y), c) in t {
        let mut bx = BTreeMap::new();
        bprime_word(alg, x, c, &mut bx);
        for (v, k) in bx {
            add_to(&mut out, (v, y.clone()), k);
        }
        let mut by = BTreeMap::new();
        bprime_word(alg, y, &(sign::<F>(koszul(x.len(), 1)) * c.clone()), &mut by);
        for (v, k) in by {
            add_to(&mut out, (x.clone(), v), k);
        }
    }
    out
}

/// A bimodule word `(a₁,…,a_{i−1}|aᵢ|a_{i+1},…,aₙ)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BimodWord {
    pub left: BarWord,
    pub mid: u16,
    pub right: BarWord,
}

impl BimodWord {
    pub fn new(left: BarWord, mid: u16, right: BarWord) -> Self {
        BimodWord { left, mid, right }
    }
    /// Mark position `i` (0-based) of a flat word.
    pub fn from_flat(w: &[u16], i: usize) -> Self {
        BimodWord { left: w[..i].to_vec(), mid: w[i], right: w[i + 1..].to_vec() }
    }
    pub fn len(&self) -> usize {
        self.left.len() + 1 + self.right.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// 1-based position of the marked slot.
    pub fn slot(&self) -> usize {
        self.left.len() + 1
    }
    pub fn flat(&self) -> BarWord {
        let mut v = self.left.clone();
        v.push(self.mid);
        v.extend_from_slice(&self.right);
        v
    }
}

/// `B̄ ⊗ Ω₁B̄`, the target of the left coaction.
pub type LeftCoaction<F> = BTreeMap<(BarWord, BimodWord), F>;
/// `Ω₁B̄ ⊗ B̄`, the target of the right coaction.
pub type RightCoaction<F> = BTreeMap<(BimodWord, BarWord), F>;

/// A finite combination of bimodule words.
#[derive(Debug, Clone, PartialEq)]
pub struct BarBimodElem<F: Field> {
    alg: Arc<FiniteAlgebra<F>>,
    trunc: usize,
    terms: BTreeMap<BimodWord, F>,
}

impl<F: Field> BarBimodElem<F> {
    pub fn zero(alg: &Arc<FiniteAlgebra<F>>, trunc: usize) -> Self {
        BarBimodElem { alg: alg.clone(), trunc, terms: BTreeMap::new() }
    }

    pub fn word(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, w: BimodWord, c: F) -> Result<Self> {
        if w.len() > trunc {
            return Err(Error::TruncationOverflow { needed: w.len(), trunc });
        }
        if w.flat().iter().any(|&a| a as usize >= alg.dim()) {
            return Err(Error::DimensionMismatch("bimodule word letter outside the algebra".into()));
        }
        let mut out = Self::zero(alg, trunc);
        add_to(&mut out.terms, w, c);
        Ok(out)
    }

    pub fn terms(&self) -> &BTreeMap<BimodWord, F> {
        &self.terms
    }
    pub fn algebra(&self) -> &Arc<FiniteAlgebra<F>> {
        &self.alg
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.alg != o.alg {
            return Err(Error::AlgebraMismatch);
        }
        let mut out = self.clone();
        for (w, c) in &o.terms {
            add_to(&mut out.terms, w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let mut neg = o.clone();
        for c in neg.terms.values_mut() {
            *c = -c.clone();
        }
        self.add(&neg)
    }

    /// `b″`: `b′` on the left block, the two products touching the marked
    /// slot, and `b′` on the right block.
    pub fn bdprime(&self) -> Self {
        let mut out = Self::zero(&self.alg, self.trunc);
        for (w, c) in &self.terms {
            let i = w.slot();
            let mut left = BTreeMap::new();
            bprime_word(&self.alg, &w.left, c, &mut left);
            for (l, k) in left {
                add_to(&mut out.terms, BimodWord::new(l, w.mid, w.right.clone()), k);
            }
            if i >= 2 {
                let prev = *w.left.last().unwrap();
                for (m, k) in self.alg.mul(prev as usize, w.mid as usize) {
                    let l = w.left[..i - 2].to_vec();
                    add_to(&mut out.terms, BimodWord::new(l, *m as u16, w.right.clone()), sign::<F>(i) * k.clone() * c.clone());
                }
            }
            if let Some(&next) = w.right.first() {
                for (m, k) in self.alg.mul(w.mid as usize, next as usize) {
                    let r = w.right[1..].to_vec();
                    add_to(&mut out.terms, BimodWord::new(w.left.clone(), *m as u16, r), sign::<F>(i + 1) * k.clone() * c.clone());
                }
            }
            let mut right = BTreeMap::new();
            bprime_word(&self.alg, &w.right, &(sign::<F>(i) * c.clone()), &mut right);
            for (r, k) in right {
                add_to(&mut out.terms, BimodWord::new(w.left.clone(), w.mid, r), k);
            }
        }
        out
    }

    /// The coderivation `∂ : Ω₁B̄ → B̄` forgetting the mark.
    pub fn partial(&self) -> BarChain<F> {
        let mut out = BarChain::zero(&self.alg, self.trunc);
        for (w, c) in &self.terms {
            add_to(&mut out.terms, w.flat(), c.clone());
        }
        out
    }

    /// `Δ_l`: split the left block.
    pub fn comodule_left(&self) -> LeftCoaction<F> {
        let mut out = BTreeMap::new();
        for (w, c) in &self.terms {
            for j in 0..=w.left.len() {
                let rest = BimodWord::new(w.left[j..].to_vec(), w.mid, w.right.clone());
                add_to(&mut out, (w.left[..j].to_vec(), rest), c.clone());
            }
        }
        out
    }

    /// `Δ_r`: split the right block.
    pub fn comodule_right(&self) -> RightCoaction<F> {
        let mut out = BTreeMap::new();
        for (w, c) in &self.terms {
            for j in 0..=w.right.len() {
                let head = BimodWord::new(w.left.clone(), w.mid, w.right[..j].to_vec());
                add_to(&mut out, (head, w.right[j..].to_vec()), c.clone());
            }
        }
        out
    }
}

/// The graded flip `Ω₁B̄ ⊗ B̄ → B̄ ⊗ Ω₁B̄`.
pub fn flip_right<F: Field>(t: &RightCoaction<F>) -> LeftCoaction<F> {
    let mut out = BTreeMap::new();
    for ((x, y), c) in t {
        add_to(&mut out, (y.clone(), x.clone()), sign::<F>(koszul(x.len(), y.len())) * c.clone());
    }
    out
}

/// The graded flip `B̄ ⊗ Ω₁B̄ → Ω₁B̄ ⊗ B̄`.
pub fn flip_left<F: Field>(t: &LeftCoaction<F>) -> RightCoaction<F> {
    let mut out = BTreeMap::new();
    for ((x, y), c) in t {
        add_to(&mut out, (y.clone(), x.clone()), sign::<F>(koszul(x.len(), y.len())) * c.clone());
    }
    out
}

/// `Δ∂` and `(1⊗∂)Δ_l + (∂⊗1)Δ_r`, both in `B̄ ⊗ B̄`.
pub fn coderivation_sides<F: Field>(e: &BarBimodElem<F>) -> (BarTensor<F>, BarTensor<F>) {
    let lhs = e.partial().coproduct();
    let mut rhs = BTreeMap::new();
    for ((x, y), c) in e.comodule_left() {
        add_to(&mut rhs, (x, y.flat()), c);
    }
    for ((x, y), c) in e.comodule_right() {
        add_to(&mut rhs, (x.flat(), y), c);
    }
    (lhs, rhs)
}

// ---------------------------------------------------------------------------
// Cochains.

/// Coefficients a cochain table may take: a DG ring that can be scaled by
/// chain coefficients and has a parity on homogeneous elements.
pub trait BarTarget<F>: DgRing {
    fn scale_by(&self, c: &F) -> Self;
    /// `Some(p)` for a nonzero element homogeneous of parity `p`.
    fn parity(&self) -> Option<u8>;
}

impl BarTarget<Gaussian> for Gaussian {
    fn scale_by(&self, c: &Gaussian) -> Self {
        self.clone() * c.clone()
    }
    fn parity(&self) -> Option<u8> {
        Some(0)
    }
}

impl BarTarget<Complex64> for Complex64 {
    fn scale_by(&self, c: &Complex64) -> Self {
        self * c
    }
    fn parity(&self) -> Option<u8> {
        Some(0)
    }
}

impl<A: BasisAlgebra> BarTarget<A::F> for Form<A> {
    fn scale_by(&self, c: &A::F) -> Self {
        self.scale(c)
    }
    fn parity(&self) -> Option<u8> {
        let mut p = None;
        for w in self.terms().keys() {
            let q = (w.degree() % 2) as u8;
            match p {
                None => p = Some(q),
                Some(x) if x != q => return None,
                _ => {}
            }
        }
        p
    }
}

/// Parity of a graded matrix: row + column + entry parity, `Some(None)` for
/// the zero matrix, `None` when inhomogeneous.
fn matrix_parity<F, C: BarTarget<F>>(m: &SMat<C>) -> Option<Option<u8>> {
    let mut p = None;
    for (&(i, j), c) in &m.e {
        if c.is_zero() {
            continue;
        }
        let q = (m.row_par[i] + m.col_par[j] + c.parity()?) % 2;
        match p {
            None => p = Some(q),
            Some(x) if x != q => return None,
            _ => {}
        }
    }
    Some(p)
}

/// The unital graded algebra `L` cochains take values in: square matrices
/// with row parities `par` over the ring `C`.
#[derive(Debug, Clone)]
pub struct CochainTarget<C> {
    pub par: Vec<u8>,
    pub one: C,
}

impl<C: DgRing> CochainTarget<C> {
    pub fn new(par: Vec<u8>, one: C) -> Self {
        CochainTarget { par, one }
    }
    pub fn identity(&self) -> SMat<C> {
        SMat::identity(&self.par, self.one.clone())
    }
    pub fn zero(&self) -> SMat<C> {
        SMat::square_zeros(&self.par)
    }
}

fn neg_if<C: DgRing>(m: SMat<C>, odd: bool) -> SMat<C> {
    if odd {
        m.neg()
    } else {
        m
    }
}

fn put<K: Ord, C: DgRing>(t: &mut BTreeMap<K, SMat<C>>, k: K, m: SMat<C>) {
    if m.is_zero() {
        return;
    }
    let merged = match t.remove(&k) {
        Some(old) => old.add(&m),
        None => m,
    };
    if !merged.is_zero() {
        t.insert(k, merged);
    }
}

/// The letter splittings `(x, y)` whose product has a component along each
/// basis element, used to find all words a differential can reach a given
/// word from.
fn splittings<F: Field>(alg: &FiniteAlgebra<F>) -> Vec<Vec<(u16, u16)>> {
    let mut out = vec![Vec::new(); alg.dim()];
    for x in 0..alg.dim() {
        for y in 0..alg.dim() {
            for (k, _) in alg.mul(x, y) {
                out[*k].push((x as u16, y as u16));
            }
        }
    }
    out
}

/// A cochain on `B̄(Ã)`, an element of `ℛ = Hom(B̄, L)`.
#[derive(Debug, Clone)]
pub struct BarCochain<F: Field, C> {
    alg: Arc<FiniteAlgebra<F>>,
    trunc: usize,
    target: CochainTarget<C>,
    degree: u8,
    table: BTreeMap<BarWord, SMat<C>>,
}

/// A cochain on `Ω₁B̄(Ã)`, an element of `ℳ = Hom(Ω₁B̄, L)`.
#[derive(Debug, Clone)]
pub struct BimodCochain<F: Field, C> {
    alg: Arc<FiniteAlgebra<F>>,
    trunc: usize,
    target: CochainTarget<C>,
    degree: u8,
    table: BTreeMap<BimodWord, SMat<C>>,
}

/// Which side an `ℛ`-cochain acts on an `ℳ`-cochain from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn check_value<F, C: BarTarget<F>>(par: &[u8], len: usize, degree: u8, m: &SMat<C>) -> Result<()> {
    if m.row_par != par || m.col_par != par {
        return Err(Error::TargetMismatch("cochain value has the wrong block structure".into()));
    }
    match matrix_parity(m) {
        None => Err(Error::ParityError("cochain value is not homogeneous".into())),
        Some(Some(p)) if p as usize != (degree as usize + len) % 2 => {
            Err(Error::ParityError(format!("value on a word of length {len} has parity {p}, cochain degree {degree}")))
        }
        _ => Ok(()),
    }
}

impl<F: Field, C: BarTarget<F>> BarCochain<F, C> {
    pub fn new(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, target: CochainTarget<C>, degree: u8, table: BTreeMap<BarWord, SMat<C>>) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (w, m) in table {
            if w.len() > trunc {
                return Err(Error::TruncationOverflow { needed: w.len(), trunc });
            }
            if w.iter().any(|&a| a as usize >= alg.dim()) {
                return Err(Error::DimensionMismatch("cochain word letter outside the algebra".into()));
            }
            check_value(&target.par, w.len(), degree % 2, &m)?;
            put(&mut clean, w, m);
        }
        Ok(BarCochain { alg: alg.clone(), trunc, target, degree: degree % 2, table: clean })
    }

    /// The unit `1η`.
    pub fn unit(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, target: CochainTarget<C>) -> Self {
        let mut table = BTreeMap::new();
        table.insert(vec![], target.identity());
        BarCochain { alg: alg.clone(), trunc, target, degree: 0, table }
    }

    pub fn zero(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, target: CochainTarget<C>, degree: u8) -> Self {
        BarCochain { alg: alg.clone(), trunc, target, degree: degree % 2, table: BTreeMap::new() }
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }
    pub fn table(&self) -> &BTreeMap<BarWord, SMat<C>> {
        &self.table
    }
    pub fn target(&self) -> &CochainTarget<C> {
        &self.target
    }
    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    fn derived(&self, degree: u8, mut table: BTreeMap<BarWord, SMat<C>>) -> Self {
        table.retain(|_, m| !m.is_zero());
        BarCochain { alg: self.alg.clone(), trunc: self.trunc, target: self.target.clone(), degree: degree % 2, table }
    }

    fn compatible(&self, alg: &Arc<FiniteAlgebra<F>>, par: &[u8], trunc: usize) -> Result<()> {
        if &self.alg != alg {
            return Err(Error::AlgebraMismatch);
        }
        if self.target.par != par || self.trunc != trunc {
            return Err(Error::TargetMismatch("cochains have different targets or truncations".into()));
        }
        Ok(())
    }

    pub fn value(&self, w: &[u16]) -> SMat<C> {
        self.table.get(w).cloned().unwrap_or_else(|| self.target.zero())
    }

    pub fn eval(&self, x: &BarChain<F>) -> SMat<C> {
        let mut acc = self.target.zero();
        for (w, c) in x.terms() {
            if let Some(m) = self.table.get(w) {
                acc = acc.add(&m.map(|e| e.scale_by(c)));
            }
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        o.compatible(&self.alg, &self.target.par, self.trunc)?;
        if self.degree != o.degree && !self.is_zero() && !o.is_zero() {
            return Err(Error::ParityError("sum of cochains of different degrees".into()));
        }
        let degree = if self.is_zero() { o.degree } else { self.degree };
        let mut t = self.table.clone();
        for (w, m) in &o.table {
            put(&mut t, w.clone(), m.clone());
        }
        Ok(self.derived(degree, t))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.derived(self.degree, self.table.iter().map(|(w, m)| (w.clone(), m.neg())).collect())
    }

    /// `(fg)(a₁,…,aₙ) = Σᵢ (−1)^{|g|i} f(a₁,…,aᵢ) g(aᵢ₊₁,…,aₙ)`.
    pub fn convolve(&self, g: &Self) -> Result<Self> {
        g.compatible(&self.alg, &self.target.par, self.trunc)?;
        let mut t = BTreeMap::new();
        for (u, fu) in &self.table {
            for (v, gv) in &g.table {
                if u.len() + v.len() > self.trunc {
                    continue;
                }
                let mut w = u.clone();
                w.extend_from_slice(v);
                let odd = koszul(g.degree as usize, u.len()) == 1;
                put(&mut t, w, neg_if(fu.mul(gv), odd));
            }
        }
        Ok(self.derived(self.degree + g.degree, t))
    }

    /// `df = d ∘ f`.
    pub fn d_r(&self) -> Self {
        self.derived(self.degree + 1, self.table.iter().map(|(w, m)| (w.clone(), m.d())).collect())
    }

    /// `δf = −(−1)^{|f|} f ∘ b′`.
    pub fn delta_r(&self) -> Self {
        let split = splittings(&self.alg);
        let mut candidates = BTreeSet::new();
        for u in self.table.keys() {
            if u.len() + 1 > self.trunc {
                continue;
            }
            for (k, &a) in u.iter().enumerate() {
                for &(x, y) in &split[a as usize] {
                    let mut w = u[..k].to_vec();
                    w.push(x);
                    w.push(y);
                    w.extend_from_slice(&u[k + 1..]);
                    candidates.insert(w);
                }
            }
        }
        let odd = self.degree == 0;
        let mut t = BTreeMap::new();
        for w in candidates {
            let bw = BarChain::word(&self.alg, self.trunc, w.clone(), F::one()).expect("within truncation").bprime();
            put(&mut t, w, neg_if(self.eval(&bw), odd));
        }
        self.derived(self.degree + 1, t)
    }

    /// The transpose of `∂`: `(∂f)(x) = f(∂x)`.
    pub fn partial_r(&self) -> BimodCochain<F, C> {
        let mut t = BTreeMap::new();
        for (u, m) in &self.table {
            for i in 0..u.len() {
                put(&mut t, BimodWord::from_flat(u, i), m.clone());
            }
        }
        BimodCochain { alg: self.alg.clone(), trunc: self.trunc, target: self.target.clone(), degree: self.degree, table: t }
    }

    /// True when every word in the support avoids the letter `unit`.
    pub fn vanishes_on(&self, unit: u16) -> bool {
        self.table.keys().all(|w| !w.contains(&unit))
    }
}

impl<F: Field, C: BarTarget<F>> BimodCochain<F, C> {
    pub fn new(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, target: CochainTarget<C>, degree: u8, table: BTreeMap<BimodWord, SMat<C>>) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (w, m) in table {
            if w.len() > trunc {
                return Err(Error::TruncationOverflow { needed: w.len(), trunc });
            }
            if w.flat().iter().any(|&a| a as usize >= alg.dim()) {
                return Err(Error::DimensionMismatch("cochain word letter outside the algebra".into()));
            }
            check_value(&target.par, w.len(), degree % 2, &m)?;
            put(&mut clean, w, m);
        }
        Ok(BimodCochain { alg: alg.clone(), trunc, target, degree: degree % 2, table: clean })
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }
    pub fn table(&self) -> &BTreeMap<BimodWord, SMat<C>> {
        &self.table
    }
    pub fn is_zero(&self) -> bool {
        self.table.is_empty()
    }

    fn derived(&self, degree: u8, mut table: BTreeMap<BimodWord, SMat<C>>) -> Self {
        table.retain(|_, m| !m.is_zero());
        BimodCochain { alg: self.alg.clone(), trunc: self.trunc, target: self.target.clone(), degree: degree % 2, table }
    }

    pub fn value(&self, w: &BimodWord) -> SMat<C> {
        self.table.get(w).cloned().unwrap_or_else(|| self.target.zero())
    }

    pub fn eval(&self, x: &BarBimodElem<F>) -> SMat<C> {
        let mut acc = self.target.zero();
        for (w, c) in x.terms() {
            if let Some(m) = self.table.get(w) {
                acc = acc.add(&m.map(|e| e.scale_by(c)));
            }
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.alg != o.alg {
            return Err(Error::AlgebraMismatch);
        }
        if self.target.par != o.target.par || self.trunc != o.trunc {
            return Err(Error::TargetMismatch("cochains have different targets or truncations".into()));
        }
        if self.degree != o.degree && !self.is_zero() && !o.is_zero() {
            return Err(Error::ParityError("sum of cochains of different degrees".into()));
        }
        let degree = if self.is_zero() { o.degree } else { self.degree };
        let mut t = self.table.clone();
        for (w, m) in &o.table {
            put(&mut t, w.clone(), m.clone());
        }
        Ok(self.derived(degree, t))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.derived(self.degree, self.table.iter().map(|(w, m)| (w.clone(), m.neg())).collect())
    }

    pub fn d_m(&self) -> Self {
        self.derived(self.degree + 1, self.table.iter().map(|(w, m)| (w.clone(), m.d())).collect())
    }

    /// `δγ = −(−1)^{|γ|} γ ∘ b″`.
    pub fn delta_m(&self) -> Self {
        let split = splittings(&self.alg);
        let mut candidates = BTreeSet::new();
        for u in self.table.keys() {
            if u.len() + 1 > self.trunc {
                continue;
            }
            let flat = u.flat();
            let slot = u.left.len();
            for (k, &a) in flat.iter().enumerate() {
                for &(x, y) in &split[a as usize] {
                    let mut w = flat[..k].to_vec();
                    w.push(x);
                    w.push(y);
                    w.extend_from_slice(&flat[k + 1..]);
                    match k.cmp(&slot) {
                        std::cmp::Ordering::Less => {
                            candidates.insert(BimodWord::from_flat(&w, slot + 1));
                        }
                        std::cmp::Ordering::Greater => {
                            candidates.insert(BimodWord::from_flat(&w, slot));
                        }
                        std::cmp::Ordering::Equal => {
                            candidates.insert(BimodWord::from_flat(&w, slot));
                            candidates.insert(BimodWord::from_flat(&w, slot + 1));
                        }
                    }
                }
            }
        }
        let odd = self.degree == 0;
        let mut t = BTreeMap::new();
        for w in candidates {
            let bw = BarBimodElem::word(&self.alg, self.trunc, w.clone(), F::one()).expect("within truncation").bdprime();
            put(&mut t, w, neg_if(self.eval(&bw), odd));
        }
        self.derived(self.degree + 1, t)
    }

    /// `fγ = m(f ⊗ γ)Δ_l` or `γf = m(γ ⊗ f)Δ_r`.
    pub fn act(&self, f: &BarCochain<F, C>, side: Side) -> Result<Self> {
        f.compatible(&self.alg, &self.target.par, self.trunc)?;
        let mut t = BTreeMap::new();
        for (u, fu) in &f.table {
            for (w, gw) in &self.table {
                if u.len() + w.len() > self.trunc {
                    continue;
                }
                match side {
                    Side::Left => {
                        let mut left = u.clone();
                        left.extend_from_slice(&w.left);
                        let odd = koszul(self.degree as usize, u.len()) == 1;
                        put(&mut t, BimodWord::new(left, w.mid, w.right.clone()), neg_if(fu.mul(gw), odd));
                    }
                    Side::Right => {
                        let mut right = w.right.clone();
                        right.extend_from_slice(u);
                        let odd = koszul(f.degree as usize, w.len()) == 1;
                        put(&mut t, BimodWord::new(w.left.clone(), w.mid, right), neg_if(gw.mul(fu), odd));
                    }
                }
            }
        }
        Ok(self.derived(self.degree + f.degree, t))
    }
}

/// `f·γ` or `γ·f`.
pub fn bimod_act<F: Field, C: BarTarget<F>>(f: &BarCochain<F, C>, gamma: &BimodCochain<F, C>, side: Side) -> Result<BimodCochain<F, C>> {
    gamma.act(f, side)
}

/// Both sides of `δγ♮(ω) = −(−1)^{|γ|} γ♮(bω)`.
pub fn lemma_a1_sides<F: Field, C: BarTarget<F>>(
    setting: &BarSetting<F>,
    gamma: &BimodCochain<F, C>,
    w: &Form<FiniteAlgebra<F>>,
) -> Result<(SMat<C>, SMat<C>)> {
    let lhs = gamma.delta_m().eval(&setting.cotrace(w)?);
    let rhs = neg_if(gamma.eval(&setting.cotrace(&w.b())?), gamma.degree == 0);
    Ok((lhs, rhs))
}

pub fn lemma_a1_check<F: Field, C: BarTarget<F>>(setting: &BarSetting<F>, gamma: &BimodCochain<F, C>, w: &Form<FiniteAlgebra<F>>) -> Result<bool> {
    let (l, r) = lemma_a1_sides(setting, gamma, w)?;
    Ok(l.sub(&r).is_zero())
}

/// Both sides of `∂(fg)♮(ω) = (−1)^{|g|} (f·∂ρ·g)♮(Bω)` for a unital linear
/// `ρ : Ã → L⁰` (a degree-one cochain on one-letter words) and cochains `f`,
/// `g` vanishing whenever an argument is the unit of `Ã`.
pub fn lemma_a2_sides<F: Field, C: BarTarget<F>>(
    setting: &BarSetting<F>,
    f: &BarCochain<F, C>,
    g: &BarCochain<F, C>,
    rho: &BarCochain<F, C>,
    w: &Form<FiniteAlgebra<F>>,
) -> Result<(SMat<C>, SMat<C>)> {
    let unit = setting.unit();
    if rho.table.keys().any(|k| k.len() != 1) || rho.degree != 1 {
        return Err(Error::PreconditionViolated("ρ must be a linear map on single letters".into()));
    }
    if !rho.value(&[unit]).sub(&rho.target.identity()).is_zero() {
        return Err(Error::PreconditionViolated("ρ(1) ≠ 1".into()));
    }
    if !f.vanishes_on(unit) || !g.vanishes_on(unit) {
        return Err(Error::PreconditionViolated("cochains must vanish when an argument is 1".into()));
    }
    let n = w.max_degree().unwrap_or(0);
    let bw = w.with_trunc(w.trunc().max(n + 1)).connes_b();
    let lhs = f.convolve(g)?.partial_r().eval(&setting.cotrace(w)?);
    let middle = rho.partial_r().act(f, Side::Left)?.act(g, Side::Right)?;
    let rhs = neg_if(middle.eval(&setting.cotrace(&bw)?), g.degree == 1);
    Ok((lhs, rhs))
}

pub fn lemma_a2_check<F: Field, C: BarTarget<F>>(
    setting: &BarSetting<F>,
    f: &BarCochain<F, C>,
    g: &BarCochain<F, C>,
    rho: &BarCochain<F, C>,
    w: &Form<FiniteAlgebra<F>>,
) -> Result<bool> {
    let (l, r) = lemma_a2_sides(setting, f, g, rho, w)?;
    Ok(l.sub(&r).is_zero())
}
