//! The tensor algebra `TA` realised as even forms with the Fedosov product
//! `x ⊙ y = xy − dx dy`, the X-complex boundaries on `X(TA) ≅ ΩA`, the
//! idempotent lift `ê`, and the Fedosov action of a representation.
//!
//! `TA` is never stored as tensors. The map [`to_tensor`] gives the tensor
//! picture `ã₀ ⊗ ω(a₁,a₂) ⊗ …` (with `ω(a,b) = ab − a⊗b`) for printing and
//! testing only.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{BasisAlgebra, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::forms::{add_term, b_terms, by_degree, d_terms, kappa_terms, Form, NCForm, Terms, Word};
use crate::linalg::{DgRing, SMat};
use crate::scalar::{Field, Rat};
use crate::spectral::{duhamel_integral, CMat, MatForm};
use num::complex::Complex64;

/// `x ⊙ y = xy − dx dy`.
pub fn fedosov_product<A: BasisAlgebra>(x: &Form<A>, y: &Form<A>) -> Result<Form<A>> {
    let xy = x.mul(y)?;
    let dd = x.d().mul(&y.d())?;
    xy.sub(&dd)
}

fn ensure_parity<A: BasisAlgebra>(x: &Form<A>, parity: usize, what: &str) -> Result<()> {
    if x.terms().keys().any(|w| w.degree() % 2 != parity) {
        return Err(Error::ParityError(format!("{what} must have only {} components", if parity == 0 { "even" } else { "odd" })));
    }
    Ok(())
}

/// An element of `TA`: an even form multiplied with `⊙`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElem<A: BasisAlgebra> {
    form: Form<A>,
}

impl<A: BasisAlgebra> TensorElem<A> {
    pub fn new(form: Form<A>) -> Result<Self> {
        ensure_parity(&form, 0, "tensor algebra element")?;
        Ok(TensorElem { form })
    }
    pub fn form(&self) -> &Form<A> {
        &self.form
    }
    pub fn into_form(self) -> Form<A> {
        self.form
    }
    pub fn odot(&self, o: &Self) -> Result<Self> {
        Ok(TensorElem { form: fedosov_product(&self.form, &o.form)? })
    }
    /// The multiplication map `TA → Ã`: the degree-zero component.
    pub fn mult_map(&self) -> Form<A> {
        self.form.part(0)
    }
}

// ---------------------------------------------------------------------------
// X(TA) boundaries in the ΩA picture.

/// `♮𝐝 : X₀ → X₁`, acting on `Ω^{2n}` as `Σ_{i=0}^{2n} κⁱ d − Σ_{i=0}^{n−1} κ^{2i} b`.
pub fn natural_d<A: BasisAlgebra>(x: &Form<A>) -> Result<Form<A>> {
    ensure_parity(x, 0, "input of the even X boundary")?;
    x.require_headroom(1)?;
    let alg = x.algebra().clone();
    let mut out = Terms::new();
    for (deg, part) in by_degree(x.terms()) {
        let n = deg / 2;
        let mut t = d_terms(&part);
        for _ in 0..=deg {
            add_all(&mut out, &t, false);
            t = kappa_terms(&*alg, &t);
        }
        let mut t = b_terms(&*alg, &part);
        for _ in 0..n {
            add_all(&mut out, &t, true);
            t = kappa_terms(&*alg, &kappa_terms(&*alg, &t));
        }
    }
    Ok(Form::from_terms(&alg, x.trunc(), out))
}

/// `b̄ : X₁ → X₀`, acting on `Ω^{2n+1}` as `b − (1 + κ) d`.
pub fn b_bar<A: BasisAlgebra>(x: &Form<A>) -> Result<Form<A>> {
    ensure_parity(x, 1, "input of the odd X boundary")?;
    x.require_headroom(1)?;
    let alg = x.algebra().clone();
    let mut out = b_terms(&*alg, x.terms());
    let dx = d_terms(x.terms());
    add_all(&mut out, &dx, true);
    add_all(&mut out, &kappa_terms(&*alg, &dx), true);
    Ok(Form::from_terms(&alg, x.trunc(), out))
}

fn add_all<I: Ord + Clone, F: Field>(out: &mut Terms<I, F>, t: &Terms<I, F>, negate: bool) {
    for (w, c) in t {
        add_term(out, w.clone(), if negate { -c.clone() } else { c.clone() });
    }
}

/// An element of `X(TA) = TA ⊕ Ω¹TA_♮`, with the odd part stored as odd forms.
#[derive(Clone, Debug, PartialEq)]
pub struct XChain<A: BasisAlgebra> {
    pub even: Form<A>,
    pub odd: Form<A>,
}

impl<A: BasisAlgebra> XChain<A> {
    pub fn new(even: Form<A>, odd: Form<A>) -> Result<Self> {
        ensure_parity(&even, 0, "even part")?;
        ensure_parity(&odd, 1, "odd part")?;
        Ok(XChain { even, odd })
    }

    /// `∂ = ♮𝐝 + b̄`.
    pub fn boundary(&self) -> Result<Self> {
        Ok(XChain { even: b_bar(&self.odd)?, odd: natural_d(&self.even)? })
    }

    /// The same chain as a single inhomogeneous form.
    pub fn total(&self) -> Result<Form<A>> {
        self.even.add(&self.odd)
    }
}

// ---------------------------------------------------------------------------
// The idempotent lift.

/// `(2n)! / (n!)²`.
pub fn central_binomial(n: u32) -> Rat {
    Rat::factorial(2 * n) * { let r = Rat::factorial(n).recip().expect("nonzero"); r.clone() * r }
}

/// `ê = e + Σ_{n≥1} (2n)!/(n!)² (e − ½)(de de)ⁿ` for a degree-zero idempotent `e`,
/// truncated at the form's truncation.
pub fn idempotent_lift<A: BasisAlgebra>(e: &Form<A>) -> Result<Form<A>> {
    if e.terms().keys().any(|w| w.degree() != 0) {
        return Err(Error::WrongDegree { expected: "0".into(), got: e.max_degree().unwrap_or(0) });
    }
    let alg = e.algebra().clone();
    let trunc = e.trunc();
    if !e.mul(e)?.sub(e)?.with_trunc(0).is_zero() {
        return Err(Error::NotIdempotent);
    }
    let half = A::F::from_rat(&Rat::new(1, 2));
    let shifted = e.sub(&Form::unit(&alg, trunc).scale(&half))?;
    let dede = e.d().mul(&e.d())?;
    let mut out = e.clone();
    let mut power = shifted;
    let mut n = 1u32;
    while 2 * n as usize <= trunc {
        power = power.mul(&dede)?;
        out = out.add(&power.scale(&A::F::from_rat(&central_binomial(n))))?;
        n += 1;
    }
    Ok(out)
}

/// `ê` for the unit `e` of the algebra `ℂ`, truncated at `trunc`.
pub fn idempotent_e_hat<F: Field>(trunc: usize) -> NCForm<F> {
    let alg = Arc::new(FiniteAlgebra::<F>::complex_numbers());
    let e = Form::element(&alg, trunc, &[(0, F::one())], None);
    idempotent_lift(&e).expect("e is idempotent")
}

// ---------------------------------------------------------------------------
// The tensor picture.

/// Tensor words over the basis of `A`; the empty word is the unit of `T̃A`.
pub type TensorTerms<F> = BTreeMap<Vec<u16>, F>;

fn tensor_mul<F: Field>(x: &TensorTerms<F>, y: &TensorTerms<F>) -> TensorTerms<F> {
    let mut out = TensorTerms::new();
    for (u, a) in x {
        for (v, b) in y {
            let mut w = u.clone();
            w.extend_from_slice(v);
            let c = out.entry(w).or_insert_with(F::zero);
            *c = c.clone() + a.clone() * b.clone();
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// The image of an even form under `ã₀ da₁ da₂ … ↦ ã₀ ⊗ ω(a₁,a₂) ⊗ …`.
pub fn to_tensor<F: Field>(x: &NCForm<F>) -> Result<TensorTerms<F>> {
    ensure_parity(x, 0, "tensor picture input")?;
    let alg = x.algebra();
    let mut out = TensorTerms::new();
    for (w, c) in x.terms() {
        let mut acc: TensorTerms<F> = TensorTerms::new();
        acc.insert(w.head.map(|h| vec![h]).unwrap_or_default(), c.clone());
        for pair in w.letters.chunks(2) {
            let mut omega = TensorTerms::new();
            for (k, s) in alg.mul(pair[0] as usize, pair[1] as usize) {
                omega.insert(vec![*k as u16], s.clone());
            }
            omega.insert(vec![pair[0], pair[1]], -F::one());
            acc = tensor_mul(&acc, &omega);
        }
        for (t, c) in acc {
            let e = out.entry(t).or_insert_with(F::zero);
            *e = e.clone() + c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// The inverse of [`to_tensor`]: `a₁ ⊗ … ⊗ a_k ↦ a₁ ⊙ … ⊙ a_k`.
pub fn from_tensor<F: Field>(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, t: &TensorTerms<F>) -> Result<NCForm<F>> {
    let mut out = Form::zero(alg, trunc);
    for (w, c) in t {
        let mut acc = Form::unit(alg, trunc);
        for a in w {
            acc = fedosov_product(&acc, &Form::word(alg, trunc, Some(*a), vec![], F::one()))?;
        }
        out = out.add(&acc.scale(c))?;
    }
    Ok(out)
}

/// Print an even form in the tensor notation `c*a0 ⊗ w(a1,a2) ⊗ …`.
pub fn render_tensor<F: Field>(x: &NCForm<F>) -> String {
    let alg = x.algebra();
    let mut s = String::new();
    for (k, (w, c)) in x.terms().iter().enumerate() {
        let mut parts = Vec::new();
        if let Some(h) = w.head {
            parts.push(alg.labels()[h as usize].clone());
        }
        for pair in w.letters.chunks(2) {
            let l = |i: u16| alg.labels()[i as usize].clone();
            if pair.len() == 2 {
                parts.push(format!("w({},{})", l(pair[0]), l(pair[1])));
            } else {
                parts.push(format!("d[{}]", l(pair[0])));
            }
        }
        if parts.is_empty() {
            parts.push("1~".into());
        }
        let cs = c.to_string();
        if k > 0 {
            s.push_str(" + ");
        }
        if cs != "1" {
            s.push_str(&format!("({cs})*"));
        }
        s.push_str(&parts.join(" ⊗ "));
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

// ---------------------------------------------------------------------------
// Fedosov action of a representation.

/// Matrices with entries in a form algebra.
pub type FormMatrix<B> = SMat<Form<B>>;

/// `M ⊙ N = MN − dM dN`.
pub fn matrix_odot<C: DgRing>(m: &SMat<C>, n: &SMat<C>) -> SMat<C> {
    m.mul(n).sub(&m.d().mul(&n.d()))
}

/// A representation `ρ : A → End(H) ⊗ B̃` given by the images of the basis of
/// `A` as even matrices with degree-zero entries.
#[derive(Clone, Debug)]
pub struct FormRepresentation<A: BasisAlgebra, B: BasisAlgebra> {
    pub source: Arc<A>,
    pub par: Vec<u8>,
    pub images: BTreeMap<A::Idx, FormMatrix<B>>,
    pub unit: Form<B>,
}

impl<A: BasisAlgebra, B: BasisAlgebra<F = A::F>> FormRepresentation<A, B> {
    /// Validates degrees, evenness and multiplicativity on basis pairs.
    pub fn new(source: Arc<A>, par: Vec<u8>, images: BTreeMap<A::Idx, FormMatrix<B>>, unit: Form<B>) -> Result<Self> {
        for m in images.values() {
            if m.rows != par.len() || m.cols != par.len() {
                return Err(Error::DimensionMismatch("representation matrix size".into()));
            }
            for (&(i, j), c) in &m.e {
                if c.max_degree().unwrap_or(0) > 0 {
                    return Err(Error::WrongDegree { expected: "0".into(), got: c.max_degree().unwrap_or(0) });
                }
                if par[i] != par[j] {
                    return Err(Error::ParityError("representation must be even".into()));
                }
            }
        }
        let rep = FormRepresentation { source, par, images, unit };
        let keys: Vec<A::Idx> = rep.images.keys().cloned().collect();
        for (x, a) in keys.iter().enumerate() {
            for (y, b) in keys.iter().enumerate() {
                let lhs = rep.image(a).mul(&rep.image(b));
                let mut rhs = rep.zero();
                for (k, c) in rep.source.mul_basis(a, b) {
                    rhs = rhs.add(&rep.image(&k).map(|v| v.scale(&c)));
                }
                if !lhs.sub(&rhs).is_zero() {
                    return Err(Error::NotAHomomorphism(x, y));
                }
            }
        }
        Ok(rep)
    }

    fn zero(&self) -> FormMatrix<B> {
        SMat::square_zeros(&self.par)
    }

    pub fn image(&self, a: &A::Idx) -> FormMatrix<B> {
        self.images.get(a).cloned().unwrap_or_else(|| self.zero())
    }

    fn image_head(&self, h: &Option<A::Idx>) -> FormMatrix<B> {
        match h {
            Some(a) => self.image(a),
            None => SMat::identity(&self.par, self.unit.clone()),
        }
    }

    /// `ρ*(ã₀ da₁ … da₂ₖ) = ρ(ã₀) dρ(a₁) … dρ(a₂ₖ)`, the extension of `ρ` to a
    /// `⊙`-homomorphism `TA → End(H) ⊗ T̃B`.
    pub fn lift(&self, x: &Form<A>) -> Result<FormMatrix<B>> {
        ensure_parity(x, 0, "lifted element")?;
        if let Some(m) = x.max_degree() {
            if m > self.unit.trunc() {
                return Err(Error::TruncationOverflow { needed: m, trunc: self.unit.trunc() });
            }
        }
        let mut out = self.zero();
        for (w, c) in x.terms() {
            let mut acc = self.image_head(&w.head);
            for a in &w.letters {
                acc = acc.mul(&self.image(a).d());
            }
            out = out.add(&acc.map(|v| v.scale(c)));
        }
        Ok(out)
    }
}

/// Basis word helper used by tests and the CLI.
pub fn single_word<F: Field>(alg: &Arc<FiniteAlgebra<F>>, trunc: usize, w: &Word<u16>) -> NCForm<F> {
    Form::word(alg, trunc, w.head, w.letters.clone(), F::one())
}

// ---------------------------------------------------------------------------
// Fedosov exponential.
//
// Writing H = H₀ + V with H₀ a scalar matrix (so dH₀ = 0), every e^{sH} and
// d(e^{sH}) expands into Duhamel chains of V and dV between heat factors
// e^{σH₀}, and the nested simplices of the expansion merge into one uniform
// simplex. The result is a sum over words in {V, dV} with 2n letters dV,
// each weighted by (−1)ⁿ ∫_{Δ_K} e^{s₀H₀} X₁ e^{s₁H₀} … X_K e^{s_KH₀}.

/// Longest Duhamel chain explored before declaring the series non-terminating.
pub const MAX_CHAIN: usize = 48;

/// `exp_⊙ H` for a form-valued matrix over `Ω̃B` truncated at form degree
/// `trunc`. The unit-word matrix of `H` is the heat generator `H₀`; the rest
/// must be nilpotent (positive form degree or nilpotent coefficients).
pub fn fedosov_exp(h: &MatForm, par: &[u8], coeff: &FiniteAlgebra<Complex64>, trunc: usize) -> Result<MatForm> {
    let dim = h.dim();
    for (w, m) in h.terms() {
        for i in 0..dim {
            for j in 0..dim {
                if (w.degree() + (par[i] + par[j]) as usize) % 2 == 1 && m[(i, j)].norm() > 1e-14 {
                    return Err(Error::ParityError("Fedosov exponential needs an even generator".into()));
                }
            }
        }
    }
    let h0 = h.coeff(&Word::unit());
    let mut v = h.clone();
    v.add_word(Word::unit(), &(-&h0));
    let dv = v.d(par);
    let neg_h0 = -&h0;
    let mut out = MatForm::zero(dim);
    let mut start = Terms::new();
    add_term(&mut start, Word::unit(), Complex64::new(1.0, 0.0));
    let mut mats: Vec<&CMat> = Vec::new();
    let letters = [&v, &dv];
    fedosov_rec(&letters, coeff, &neg_h0, trunc, 0, 0, start, &mut mats, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fedosov_rec<'a>(
    letters: &[&'a MatForm; 2],
    coeff: &FiniteAlgebra<Complex64>,
    neg_h0: &CMat,
    trunc: usize,
    deg: usize,
    dcount: usize,
    acc: Terms<u16, Complex64>,
    mats: &mut Vec<&'a CMat>,
    out: &mut MatForm,
) -> Result<()> {
    if dcount % 2 == 0 {
        let m = duhamel_chain(neg_h0, mats)?;
        let s = if (dcount / 2) % 2 == 1 { -1.0 } else { 1.0 };
        for (w, z) in &acc {
            out.add_word(w.clone(), &(&m * (z * s)));
        }
    }
    for (which, f) in letters.iter().enumerate() {
        for (w, m) in f.terms() {
            if deg + w.degree() > trunc {
                continue;
            }
            let mut next = Terms::new();
            for (u, z) in &acc {
                crate::forms::mul_words(coeff, u, w, z, &mut next);
            }
            next.retain(|_, z: &mut Complex64| z.norm() > 1e-300);
            if next.is_empty() {
                continue;
            }
            if mats.len() == MAX_CHAIN {
                return Err(Error::Numerical(format!("Fedosov series does not terminate within {MAX_CHAIN} factors")));
            }
            mats.push(m);
            fedosov_rec(letters, coeff, neg_h0, trunc, deg + w.degree(), dcount + which, next, mats, out)?;
            mats.pop();
        }
    }
    Ok(())
}

fn duhamel_chain(neg_h0: &CMat, mats: &[&CMat]) -> Result<CMat> {
    let owned: Vec<CMat> = mats.iter().map(|m| (*m).clone()).collect();
    duhamel_integral(neg_h0, &owned, 1.0)
}

/// Reference solution of `E' = HE − dH dE`, `E(0) = 1`, by classical
/// Runge–Kutta with `steps` steps; an oracle for [`fedosov_exp`].
pub fn fedosov_exp_rk4(h: &MatForm, par: &[u8], coeff: &FiniteAlgebra<Complex64>, trunc: usize, steps: usize) -> MatForm {
    let dim = h.dim();
    let dh = h.d(par);
    let rhs = |e: &MatForm| h.mul(coeff, e, trunc).add(&dh.mul(coeff, &e.d(par), trunc).scale(Complex64::new(-1.0, 0.0)));
    let mut e = MatForm::scalar(CMat::identity(dim, dim));
    let dt = 1.0 / steps as f64;
    let half = Complex64::new(dt / 2.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    for _ in 0..steps {
        let k1 = rhs(&e);
        let k2 = rhs(&e.add(&k1.scale(half)));
        let k3 = rhs(&e.add(&k2.scale(half)));
        let k4 = rhs(&e.add(&k3.scale(full)));
        let incr = k1.add(&k2.scale(Complex64::new(2.0, 0.0))).add(&k3.scale(Complex64::new(2.0, 0.0))).add(&k4);
        e = e.add(&incr.scale(Complex64::new(dt / 6.0, 0.0)));
    }
    e
}

/// Exact Fedosov exponential for `H = h₀·1 + V` with `h₀` a central
/// degree-zero coefficient: returns `P` with `exp_⊙ H = e^{h₀} P`.
///
/// With `E(s) = Σ sᵐVᵐ/m!` one has `e^{sH} = e^{sh₀}E(s)` and
/// `d(e^{sH}) = e^{sh₀}(s·d(h₀)·E(s) + dE(s))`; the factors `e^{sᵢh₀}` collect
/// to `e^{h₀}` and the remaining monomials integrate over the simplex by
/// `∫_{Δₙ} Π sᵢ^{αᵢ} = Π αᵢ! / (|α| + n)!`.
pub fn fedosov_exp_scalar<C: DgRing>(one: &C, h0: &C, v: &SMat<C>) -> Result<SMat<C>> {
    let par = v.row_par.clone();
    // powers Vᵐ/m! until they vanish
    let mut powers: Vec<SMat<C>> = Vec::new();
    let mut p = SMat::identity(&par, one.clone());
    while !p.is_zero() {
        if powers.len() == MAX_CHAIN {
            return Err(Error::Numerical("V is not nilpotent".into()));
        }
        let m = powers.len() as i64;
        powers.push(p.clone());
        p = p.mul(v).scale_rat(&Rat::new(1, m + 1));
    }
    let dh0 = SMat::identity(&par, h0.clone()).d();
    let dh = dh0.add(&v.d());
    // segments as polynomials in their own simplex variable: exponent -> matrix
    let seg0: Vec<(u32, SMat<C>)> = powers.iter().enumerate().map(|(m, x)| (m as u32, x.clone())).collect();
    let mut dseg: BTreeMap<u32, SMat<C>> = BTreeMap::new();
    for (m, x) in powers.iter().enumerate() {
        let a = dh0.mul(x);
        if !a.is_zero() {
            let e = dseg.entry(m as u32 + 1).or_insert_with(|| SMat::square_zeros(&par));
            *e = e.add(&a);
        }
        let b = x.d();
        if !b.is_zero() {
            let e = dseg.entry(m as u32).or_insert_with(|| SMat::square_zeros(&par));
            *e = e.add(&b);
        }
    }
    let mut total: SMat<C> = SMat::square_zeros(&par);
    // chains: exponent vectors with their matrix products
    let mut chains: Vec<(Vec<u32>, SMat<C>)> = seg0.iter().map(|(m, x)| (vec![*m], x.clone())).collect();
    let mut n = 0usize;
    while !chains.is_empty() {
        for (alpha, x) in &chains {
            let total_deg: u32 = alpha.iter().sum();
            let mut w = Rat::factorial(total_deg + n as u32).recip().expect("nonzero");
            for a in alpha {
                w = w * Rat::factorial(*a);
            }
            if n % 2 == 1 {
                w = -w;
            }
            total = total.add(&x.scale_rat(&w));
        }
        let mut next = Vec::new();
        for (alpha, x) in &chains {
            let xd = x.mul(&dh);
            if xd.is_zero() {
                continue;
            }
            for (m, y) in &dseg {
                let prod = xd.mul(y);
                if !prod.is_zero() {
                    let mut a = alpha.clone();
                    a.push(*m);
                    next.push((a, prod));
                }
            }
        }
        n += 1;
        if n > MAX_CHAIN {
            return Err(Error::Numerical("Fedosov series does not terminate".into()));
        }
        chains = next;
    }
    Ok(total)
}

/// Split `H` into `h₀·1 + V` and apply [`fedosov_exp_scalar`]; `ModeError`
/// when the degree-zero part of `H` is not a scalar multiple of the identity.
pub fn fedosov_exp_exact<C: DgRing>(one: &C, h: &SMat<C>) -> Result<(C, SMat<C>)> {
    let h0m = h.map(|c| c.form_part(0));
    let diag = h0m.get(0, 0).cloned();
    let scalar = h0m.e.iter().all(|(&(i, j), c)| i == j && diag.as_ref().is_some_and(|d| d.sub(c).is_zero())) && (0..h.rows).all(|i| h0m.get(i, i).is_some());
    let Some(h0) = diag.filter(|_| scalar) else {
        return Err(Error::ModeError("exact Fedosov exponential needs a scalar degree-zero part".into()));
    };
    let v = h.sub(&h0m);
    Ok((h0.clone(), fedosov_exp_scalar(one, &h0, &v)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::basis_words;
    use crate::scalar::Gaussian;

    type G = Gaussian;

    fn m2() -> Arc<FiniteAlgebra<G>> {
        Arc::new(FiniteAlgebra::matrix_units(2))
    }

    #[test]
    fn e_hat_low_orders() {
        let e0 = idempotent_e_hat::<G>(0);
        assert_eq!(e0.to_string(), "e");
        let e2 = idempotent_e_hat::<G>(2);
        let alg = e2.algebra().clone();
        let expect = NCForm::parse(&alg, 2, "e + 2*e d[e] d[e] - 1*d[e] d[e]").unwrap();
        assert_eq!(e2, expect);
    }

    #[test]
    fn fedosov_product_of_idempotent() {
        let alg = Arc::new(FiniteAlgebra::<G>::complex_numbers());
        let e = Form::element(&alg, 4, &[(0, G::one())], None);
        let ee = fedosov_product(&e, &e).unwrap();
        assert_eq!(ee, NCForm::parse(&alg, 4, "e - 1*d[e] d[e]").unwrap());
    }

    #[test]
    fn tensor_picture_round_trip_and_homomorphism() {
        let alg = m2();
        let words: Vec<_> = (0..=4).step_by(2).flat_map(|n| basis_words(&alg, n)).collect();
        for w in words.iter().step_by(7) {
            let x = single_word(&alg, 10, w);
            let t = to_tensor(&x).unwrap();
            assert_eq!(from_tensor(&alg, 10, &t).unwrap(), x);
            for v in words.iter().step_by(11) {
                let y = single_word(&alg, 10, v);
                let lhs = to_tensor(&fedosov_product(&x, &y).unwrap()).unwrap();
                let rhs = tensor_mul(&t, &to_tensor(&y).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn tensor_rendering() {
        let alg = m2();
        let x = NCForm::parse(&alg, 4, "E11 d[E12] d[E21] + 2*d[E12] d[E22]").unwrap();
        assert_eq!(render_tensor(&x), "(2)*w(E12,E22) + E11 ⊗ w(E12,E21)");
    }

    fn smat_to_matform(m: &SMat<NCForm<Complex64>>) -> MatForm {
        let mut out = MatForm::zero(m.rows);
        for (&(i, j), f) in &m.e {
            for (w, z) in f.terms() {
                let mut e = CMat::zeros(m.rows, m.cols);
                e[(i, j)] = *z;
                out.add_word(w.clone(), &e);
            }
        }
        out
    }

    fn matform_dist(a: &MatForm, b: &MatForm) -> f64 {
        let diff = a.add(&b.scale(Complex64::new(-1.0, 0.0)));
        diff.terms().values().map(crate::spectral::max_abs).fold(0.0, f64::max)
    }

    /// Random even `H` over `ℂ[x]/x³` on `ℂ^{1|1}` up to form degree 2.
    fn random_nilpotent_h(rng: &mut rand_chacha::ChaCha8Rng, h0: CMat, heads_in_degree_zero: bool) -> MatForm {
        use crate::fixtures::random_matrix;
        let even = |m: CMat| CMat::from_fn(2, 2, |i, j| if i == j { m[(i, j)] } else { Complex64::new(0.0, 0.0) });
        let odd = |m: CMat| CMat::from_fn(2, 2, |i, j| if i != j { m[(i, j)] } else { Complex64::new(0.0, 0.0) });
        let mut h = MatForm::scalar(h0);
        if heads_in_degree_zero {
            h.add_word(Word::new(Some(0), vec![]), &even(random_matrix(rng, 2, 2)));
            h.add_word(Word::new(Some(1), vec![]), &even(random_matrix(rng, 2, 2)));
        }
        h.add_word(Word::new(None, vec![0]), &odd(random_matrix(rng, 2, 2)));
        h.add_word(Word::new(Some(0), vec![0]), &odd(random_matrix(rng, 2, 2)));
        h.add_word(Word::new(None, vec![0, 0]), &even(random_matrix(rng, 2, 2)));
        h
    }

    #[test]
    fn fedosov_exp_of_scalar_generator_is_matrix_exp() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let coeff = crate::fixtures::nilpotent_coefficients();
        let h0 = crate::fixtures::random_matrix(&mut rng, 2, 2);
        let bad = fedosov_exp(&MatForm::scalar(h0.clone()), &[0, 1], &coeff, 2);
        assert!(matches!(bad, Err(Error::ParityError(_))));
        let e = fedosov_exp(&MatForm::scalar(h0.clone()), &[0, 0], &coeff, 2).unwrap();
        let expect = MatForm::scalar(h0.exp());
        assert!(matform_dist(&e, &expect) < 1e-12);
    }

    #[test]
    fn fedosov_exp_matches_runge_kutta() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let coeff = crate::fixtures::nilpotent_coefficients();
        let h0 = crate::fixtures::random_matrix(&mut rng, 2, 2);
        let h = random_nilpotent_h(&mut rng, CMat::from_diagonal(&h0.diagonal()), true);
        let e = fedosov_exp(&h, &[0, 1], &coeff, 2).unwrap();
        let reference = fedosov_exp_rk4(&h, &[0, 1], &coeff, 2, 400);
        let err = matform_dist(&e, &reference);
        assert!(err < 1e-9, "error {err}");
    }

    #[test]
    fn exact_scalar_route_agrees_with_numeric() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let coeff = crate::fixtures::nilpotent_coefficients();
        let lambda = Complex64::new(0.7, -0.2);
        let h = random_nilpotent_h(&mut rng, CMat::identity(2, 2) * lambda, false);
        let mut sm: SMat<NCForm<Complex64>> = SMat::square_zeros(&[0, 1]);
        for (w, m) in h.terms() {
            for i in 0..2 {
                for j in 0..2 {
                    if m[(i, j)] != Complex64::new(0.0, 0.0) {
                        let f = Form::from_terms(&coeff, 2, [(w.clone(), m[(i, j)])].into_iter().collect());
                        sm.add_entry(i, j, &f);
                    }
                }
            }
        }
        let one = Form::unit(&coeff, 2);
        let (h0, p) = fedosov_exp_exact(&one, &sm).unwrap();
        assert_eq!(h0.coeff(None, &[]), lambda);
        let exact = smat_to_matform(&p).scale(lambda.exp());
        let numeric = fedosov_exp(&h, &[0, 1], &coeff, 2).unwrap();
        assert!(matform_dist(&exact, &numeric) < 1e-12);
    }

    #[test]
    fn exact_route_rejects_nonscalar_generator() {
        let coeff = crate::fixtures::nilpotent_coefficients();
        let mut sm: SMat<NCForm<Complex64>> = SMat::square_zeros(&[0, 1]);
        sm.add_entry(0, 0, &Form::unit(&coeff, 2));
        assert!(matches!(fedosov_exp_exact(&Form::unit(&coeff, 2), &sm), Err(Error::ModeError(_))));
    }
}
