//! Finite-dimensional spectral triples and their cochains: heat kernels,
//! simplex (Duhamel) integrals, the JLO cocycles, the bivariant chain map
//! `χ = (χ₀, χ₁)`, Chern–Simons transgressions along paths of Dirac
//! operators, Chern characters of idempotents and the index pairing.
//!
//! Everything here is `Complex64`. Operators on `H ⊗ Ω̃B` are [`MatForm`]s:
//! sums `Σ_w M_w ⊗ w` of complex matrices times basis words of `Ω̃B`, with
//! the same entry convention as [`SMat`] (entries act by left multiplication
//! on the form factor, `(dM)_ij = (-1)^{|i|} d m_ij`).

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num::complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraHom, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::forms::{add_term, mul_words, Form, NCForm, Omega1Quotient, Terms, Word};
use crate::linalg::{rank, SMat};
use crate::scalar::{sqrt_2i, Field, Gaussian, Rat};

pub type CMat = DMatrix<Complex64>;

type CTerms = Terms<u16, Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sign(odd: bool) -> f64 {
    if odd {
        -1.0
    } else {
        1.0
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

// ---------------------------------------------------------------------------
// Heat kernels and simplex integrals.

/// `exp(-t D²)` by scaling and squaring.
pub fn heat_kernel(d: &CMat, t: f64) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !d.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} Dirac operator", d.nrows(), d.ncols())));
    }
    Ok((d * d * c(-t)).exp())
}

/// `exp(-t D²)` for hermitian `D` through its eigen-decomposition; an
/// independent route to [`heat_kernel`].
pub fn heat_kernel_spectral(d: &CMat, t: f64) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let eig = d.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let diag = CMat::from_diagonal(&eig.eigenvalues.map(|l| c((-t * l * l).exp())));
    Ok(v * diag * v.adjoint())
}

/// `∫_{Δₙ} e^{-ts₀D2} A₁ e^{-ts₁D2} … Aₙ e^{-tsₙD2} ds` over the simplex of
/// total length `t`, read off the top-right block of one exponential of the
/// block-bidiagonal matrix with `-tD2` on the diagonal and `tAᵢ` above it.
pub fn duhamel_integral(d2: &CMat, factors: &[CMat], t: f64) -> Result<CMat> {
    let refs: Vec<&CMat> = factors.iter().collect();
    duhamel_refs(d2, &refs, t)
}

fn duhamel_refs(d2: &CMat, factors: &[&CMat], t: f64) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let n = d2.nrows();
    if !d2.is_square() || factors.iter().any(|a| a.nrows() != n || a.ncols() != n) {
        return Err(Error::DimensionMismatch("simplex integrand factors must be square of the heat operator's size".into()));
    }
    let k = factors.len();
    if k == 0 {
        return Ok((d2 * c(-t)).exp());
    }
    let big = (k + 1) * n;
    let mut m = CMat::zeros(big, big);
    let diag = d2 * c(-t);
    for b in 0..=k {
        m.view_mut((b * n, b * n), (n, n)).copy_from(&diag);
    }
    for (b, a) in factors.iter().enumerate() {
        m.view_mut((b * n, (b + 1) * n), (n, n)).copy_from(&(*a * c(t)));
    }
    let e = m.exp();
    Ok(e.view((0, k * n), (n, n)).into_owned())
}

/// Monte-Carlo estimate of the same simplex integral (uniform samples on the
/// simplex, scaled by its volume `tⁿ/n!`). `d2` must be hermitian.
pub fn duhamel_monte_carlo<R: Rng>(d2: &CMat, factors: &[CMat], t: f64, samples: usize, rng: &mut R) -> CMat {
    let n = d2.nrows();
    let k = factors.len();
    let eig = d2.clone().symmetric_eigen();
    let v = eig.eigenvectors.clone();
    let vh = v.adjoint();
    // work in the eigenbasis so every exponential is diagonal
    let conj: Vec<CMat> = factors.iter().map(|a| &vh * a * &v).collect();
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut acc = CMat::zeros(n, n);
    let mut s = vec![0.0; k + 1];
    for _ in 0..samples {
        let mut tot = 0.0;
        for x in s.iter_mut() {
            let u: f64 = rng.gen::<f64>();
            *x = -(1.0 - u).ln();
            tot += *x;
        }
        let expo = |si: f64| CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, lam.iter().map(|l| c((-t * si / tot * l).exp()))));
        let mut p = expo(s[0]);
        for (i, a) in conj.iter().enumerate() {
            p = p * a * expo(s[i + 1]);
        }
        acc += p;
    }
    let vol = t.powi(k as i32) / (1..=k).map(|x| x as f64).product::<f64>();
    &v * acc * &vh * c(vol / samples as f64)
}

// ---------------------------------------------------------------------------
// Form-valued matrices.

/// `Σ_w M_w ⊗ w`: a square complex matrix for every basis word of `Ω̃B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatForm {
    dim: usize,
    terms: BTreeMap<Word<u16>, CMat>,
}

impl MatForm {
    pub fn zero(dim: usize) -> Self {
        MatForm { dim, terms: BTreeMap::new() }
    }

    /// A matrix with scalar entries (coefficient `1̃`).
    pub fn scalar(m: CMat) -> Self {
        Self::single(Word::unit(), m)
    }

    pub fn single(w: Word<u16>, m: CMat) -> Self {
        let mut f = Self::zero(m.nrows());
        f.add_word(w, &m);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Word<u16>, CMat> {
        &self.terms
    }

    pub fn coeff(&self, w: &Word<u16>) -> CMat {
        self.terms.get(w).cloned().unwrap_or_else(|| CMat::zeros(self.dim, self.dim))
    }

    /// The matrix of the unit word, `None` unless that is the only word.
    pub fn as_scalar(&self) -> Option<CMat> {
        match self.terms.len() {
            0 => Some(CMat::zeros(self.dim, self.dim)),
            1 => self.terms.get(&Word::unit()).cloned(),
            _ => None,
        }
    }

    pub fn add_word(&mut self, w: Word<u16>, m: &CMat) {
        let e = self.terms.entry(w.clone()).or_insert_with(|| CMat::zeros(m.nrows(), m.ncols()));
        *e += m;
        if max_abs(e) == 0.0 {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, m) in &o.terms {
            r.add_word(w.clone(), m);
        }
        r
    }

    pub fn scale(&self, z: Complex64) -> Self {
        MatForm { dim: self.dim, terms: self.terms.iter().map(|(w, m)| (w.clone(), m * z)).collect() }
    }

    pub fn part(&self, deg: usize) -> Self {
        MatForm { dim: self.dim, terms: self.terms.iter().filter(|(w, _)| w.degree() == deg).map(|(w, m)| (w.clone(), m.clone())).collect() }
    }

    /// Left and right multiplication by a scalar matrix.
    pub fn conjugate_by(&self, left: &CMat, right: &CMat) -> Self {
        MatForm { dim: self.dim, terms: self.terms.iter().map(|(w, m)| (w.clone(), left * m * right)).collect() }
    }

    pub fn mul(&self, alg: &FiniteAlgebra<Complex64>, o: &Self, max_deg: usize) -> Self {
        let mut r = Self::zero(self.dim);
        for (w1, m1) in &self.terms {
            for (w2, m2) in &o.terms {
                if w1.degree() + w2.degree() > max_deg {
                    continue;
                }
                let mut t = CTerms::new();
                mul_words(alg, w1, w2, &Complex64::new(1.0, 0.0), &mut t);
                if t.is_empty() {
                    continue;
                }
                let p = m1 * m2;
                for (w, z) in t {
                    r.add_word(w, &(&p * z));
                }
            }
        }
        r
    }

    /// `(dM)_ij = (-1)^{|i|} d m_ij`.
    pub fn d(&self, par: &[u8]) -> Self {
        let s = parity_signs(par);
        let mut r = Self::zero(self.dim);
        for (w, m) in &self.terms {
            if let Some(h) = w.head {
                let mut l = vec![h];
                l.extend(w.letters.iter().copied());
                r.add_word(Word::new(None, l), &(&s * m));
            }
        }
        r
    }
}

fn parity_signs(par: &[u8]) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_iterator(par.len(), par.iter().map(|&p| c(sign(p == 1)))))
}

fn off_diagonal_only(m: &CMat, par: &[u8]) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| par[i] != par[j] || m[(i, j)].norm() < 1e-12))
}

fn diagonal_only(m: &CMat, par: &[u8]) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| par[i] == par[j] || m[(i, j)].norm() < 1e-12))
}

// ---------------------------------------------------------------------------
// Spectral triples.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// A representation `ρ` of `A` on `H ⊗ B̃` (matrices over `Ω̃B` in form
/// degree 0) together with an odd Dirac operator with scalar entries.
///
/// Odd triples live on the doubled space `K ⊗ ℂ^{1|1}`: `ρ = diag(α, α)` and
/// `D = [[0, Q], [Q, 0]]`.
#[derive(Debug, Clone)]
pub struct SpectralTriple {
    source: Arc<FiniteAlgebra<Complex64>>,
    coeff: Arc<FiniteAlgebra<Complex64>>,
    coeff_trunc: usize,
    par: Vec<u8>,
    parity: Parity,
    rho: Vec<MatForm>,
    dirac: CMat,
}

impl SpectralTriple {
    /// General constructor; validates shapes, parities and the homomorphism
    /// property on basis pairs.
    pub fn new(
        source: Arc<FiniteAlgebra<Complex64>>,
        coeff: Arc<FiniteAlgebra<Complex64>>,
        coeff_trunc: usize,
        par: Vec<u8>,
        parity: Parity,
        rho: Vec<MatForm>,
        dirac: CMat,
    ) -> Result<Self> {
        let n = par.len();
        if rho.len() != source.dim() {
            return Err(Error::MalformedTriple(format!("{} representing matrices for an algebra of dimension {}", rho.len(), source.dim())));
        }
        if dirac.nrows() != n || dirac.ncols() != n || rho.iter().any(|r| r.dim != n || r.terms.values().any(|m| m.nrows() != n || m.ncols() != n)) {
            return Err(Error::DimensionMismatch(format!("operators must be {n}x{n}")));
        }
        if !off_diagonal_only(&dirac, &par) {
            return Err(Error::MalformedTriple("Dirac operator is not odd".into()));
        }
        for (i, r) in rho.iter().enumerate() {
            if r.terms.iter().any(|(w, m)| w.degree() != 0 || !diagonal_only(m, &par)) {
                return Err(Error::MalformedTriple(format!("ρ({}) is not an even degree-zero operator", source.labels()[i])));
            }
        }
        if parity == Parity::Odd {
            let k = n / 2;
            let doubled = n % 2 == 0 && par.iter().enumerate().all(|(i, &p)| p == u8::from(i >= k));
            if !doubled {
                return Err(Error::MalformedTriple("odd triples live on K ⊗ ℂ^{1|1}".into()));
            }
            let tl = |m: &CMat| m.view((0, 0), (k, k)).into_owned();
            let br = |m: &CMat| m.view((k, k), (k, k)).into_owned();
            let q1 = dirac.view((0, k), (k, k)).into_owned();
            let q2 = dirac.view((k, 0), (k, k)).into_owned();
            if max_abs(&(q1 - q2)) > 1e-12 {
                return Err(Error::MalformedTriple("odd Dirac operator must be ε ⊗ Q".into()));
            }
            for r in &rho {
                if r.terms.values().any(|m| max_abs(&(tl(m) - br(m))) > 1e-12) {
                    return Err(Error::MalformedTriple("odd representation must be diag(α, α)".into()));
                }
            }
        }
        let t = SpectralTriple { source, coeff, coeff_trunc, par, parity, rho, dirac };
        t.check_homomorphism()?;
        Ok(t)
    }

    /// An even triple with scalar coefficients on `ℂ^{p|q}`.
    pub fn even_scalar(source: Arc<FiniteAlgebra<Complex64>>, p: usize, q: usize, rho: Vec<CMat>, dirac: CMat) -> Result<Self> {
        let par = crate::linalg::block_parities(p, q);
        let rho = rho.into_iter().map(MatForm::scalar).collect();
        Self::new(source, Arc::new(FiniteAlgebra::complex_numbers()), 0, par, Parity::Even, rho, dirac)
    }

    /// An odd triple from a representation `α` on `K` and a selfadjoint `Q`.
    pub fn odd_scalar(source: Arc<FiniteAlgebra<Complex64>>, alpha: Vec<CMat>, q: CMat) -> Result<Self> {
        let k = q.nrows();
        let par = crate::linalg::block_parities(k, k);
        let double = |m: &CMat, off: bool| {
            let mut d = CMat::zeros(2 * k, 2 * k);
            if off {
                d.view_mut((0, k), (k, k)).copy_from(m);
                d.view_mut((k, 0), (k, k)).copy_from(m);
            } else {
                d.view_mut((0, 0), (k, k)).copy_from(m);
                d.view_mut((k, k), (k, k)).copy_from(m);
            }
            d
        };
        let rho = alpha.iter().map(|a| MatForm::scalar(double(a, false))).collect();
        Self::new(source, Arc::new(FiniteAlgebra::complex_numbers()), 0, par, Parity::Odd, rho, double(&q, true))
    }

    fn check_homomorphism(&self) -> Result<()> {
        let alg = &self.source;
        let trunc = self.coeff_trunc.max(1);
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let lhs = self.rho[i].mul(&self.coeff, &self.rho[j], trunc);
                let mut rhs = MatForm::zero(self.dim());
                for (k, z) in alg.mul(i, j) {
                    rhs = rhs.add(&self.rho[*k].scale(*z));
                }
                let diff = lhs.add(&rhs.scale(c(-1.0)));
                if diff.terms.values().any(|m| max_abs(m) > 1e-9) {
                    return Err(Error::NotAHomomorphism(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Arc<FiniteAlgebra<Complex64>> {
        &self.source
    }
    pub fn coefficients(&self) -> &Arc<FiniteAlgebra<Complex64>> {
        &self.coeff
    }
    pub fn coeff_trunc(&self) -> usize {
        self.coeff_trunc
    }
    pub fn parities(&self) -> &[u8] {
        &self.par
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn dim(&self) -> usize {
        self.par.len()
    }
    pub fn dirac(&self) -> &CMat {
        &self.dirac
    }
    pub fn rho_basis(&self, i: usize) -> &MatForm {
        &self.rho[i]
    }

    /// `true` when every `ρ(a)` has scalar entries.
    pub fn is_scalar(&self) -> bool {
        self.rho.iter().all(|r| r.as_scalar().is_some())
    }

    /// `ρ(ã)` for a head of a word (`None` is the adjoined unit).
    pub fn rho_head(&self, h: Option<u16>) -> MatForm {
        match h {
            Some(i) => self.rho[i as usize].clone(),
            None => MatForm::scalar(CMat::identity(self.dim(), self.dim())),
        }
    }

    /// `ρ` of a degree-zero form (an element of `Ã`).
    pub fn rho_element(&self, x: &NCForm<Complex64>) -> Result<MatForm> {
        let mut r = MatForm::zero(self.dim());
        for (w, z) in x.terms() {
            if w.degree() != 0 {
                return Err(Error::WrongDegree { expected: "0".into(), got: w.degree() });
            }
            r = r.add(&self.rho_head(w.head).scale(*z));
        }
        Ok(r)
    }

    fn scalar_rho(&self, h: Option<u16>) -> Result<CMat> {
        self.rho_head(h).as_scalar().ok_or_else(|| Error::MalformedTriple("operation needs scalar coefficients".into()))
    }

    /// Same representation, new Dirac operator.
    pub fn with_dirac(&self, dirac: CMat) -> Result<Self> {
        Self::new(self.source.clone(), self.coeff.clone(), self.coeff_trunc, self.par.clone(), self.parity, self.rho.clone(), dirac)
    }

    /// `D ↦ √t D`, so that heat operators become `e^{-tD²}`.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        self.with_dirac(&self.dirac * c(t.sqrt()))
    }

    /// `(UρU⁻¹, UDU⁻¹)` for an even invertible scalar `U`.
    pub fn conjugate(&self, u: &CMat) -> Result<Self> {
        if !diagonal_only(u, &self.par) {
            return Err(Error::MalformedTriple("conjugating operator must be even".into()));
        }
        let inv = u.clone().try_inverse().ok_or_else(|| Error::Numerical("conjugating operator is singular".into()))?;
        let rho = self.rho.iter().map(|r| r.conjugate_by(u, &inv)).collect();
        Self::new(self.source.clone(), self.coeff.clone(), self.coeff_trunc, self.par.clone(), self.parity, rho, u * &self.dirac * &inv)
    }

    /// `[D, ρ(ã)]`, a degree-zero odd operator.
    fn commutator(&self, h: Option<u16>) -> MatForm {
        let r = self.rho_head(h);
        let mut out = MatForm::zero(self.dim());
        for (w, m) in &r.terms {
            out.add_word(w.clone(), &(&self.dirac * m - m * &self.dirac));
        }
        out
    }

    /// `Θ(a) = [D, ρ(a)] - dρ(a)`.
    fn curvature_letter(&self, a: u16) -> MatForm {
        self.commutator(Some(a)).add(&self.rho[a as usize].d(&self.par).scale(c(-1.0)))
    }

    fn d2(&self) -> CMat {
        &self.dirac * &self.dirac
    }

    /// The trace `τ`: the graded trace for even triples (sign `(-1)^{|i|(k+1)}`
    /// on a diagonal entry of row `i` and form degree `k`), and
    /// `√(2i)·Tr(lower-left block)` for odd triples.
    pub fn tau(&self, m: &MatForm) -> CTerms {
        let mut out = CTerms::new();
        for (w, mat) in &m.terms {
            let z = match self.parity {
                Parity::Even => (0..self.dim()).map(|i| mat[(i, i)] * sign(self.par[i] == 1 && w.degree() % 2 == 0)).sum(),
                Parity::Odd => {
                    let k = self.dim() / 2;
                    let tr: Complex64 = (0..k).map(|i| mat[(k + i, i)]).sum();
                    tr * sqrt_2i::<Complex64>()
                }
            };
            add_term(&mut out, w.clone(), z);
        }
        out
    }

    /// `∫_{Δ_m} e^{-s₀D²} X₁ e^{-s₁D²} … X_m e^{-s_mD²}` for form-valued
    /// factors, keeping form degrees `≤ max_deg`.
    fn simplex_integral(&self, seq: &[&MatForm], max_deg: usize) -> Result<MatForm> {
        let d2 = self.d2();
        let mut out = MatForm::zero(self.dim());
        let mut mats: Vec<&CMat> = Vec::with_capacity(seq.len());
        let mut start = CTerms::new();
        add_term(&mut start, Word::unit(), c(1.0));
        self.integrate_rec(&d2, seq, max_deg, 0, start, &mut mats, &mut out)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn integrate_rec<'a>(
        &self,
        d2: &CMat,
        seq: &[&'a MatForm],
        max_deg: usize,
        deg: usize,
        acc: CTerms,
        mats: &mut Vec<&'a CMat>,
        out: &mut MatForm,
    ) -> Result<()> {
        let k = mats.len();
        if k == seq.len() {
            let m = duhamel_refs(d2, mats, 1.0)?;
            for (w, z) in acc {
                out.add_word(w, &(&m * z));
            }
            return Ok(());
        }
        for (w, m) in &seq[k].terms {
            if deg + w.degree() > max_deg {
                continue;
            }
            let mut next = CTerms::new();
            for (u, z) in &acc {
                mul_words(&*self.coeff, u, w, z, &mut next);
            }
            next.retain(|_, z| z.norm() > 1e-300);
            if next.is_empty() {
                continue;
            }
            mats.push(m);
            self.integrate_rec(d2, seq, max_deg, deg + w.degree(), next, mats, out)?;
            mats.pop();
        }
        Ok(())
    }

    fn require_coeff_headroom(&self, raise: usize) -> Result<()> {
        if !self.is_scalar() && self.coeff_trunc < raise {
            return Err(Error::TruncationOverflow { needed: raise, trunc: self.coeff_trunc });
        }
        Ok(())
    }

    /// `τμ♮` on a chain, in form degrees `≤ max_deg` of `Ω̃B`.
    fn tau_mu(&self, chain: &NCForm<Complex64>, max_deg: usize) -> Result<CTerms> {
        let mut out = CTerms::new();
        for (w, z) in chain.terms() {
            let n = w.degree();
            let thetas: Vec<MatForm> = w.letters.iter().map(|&a| self.curvature_letter(a)).collect();
            let r0 = self.rho_head(w.head);
            let mut total = MatForm::zero(self.dim());
            for i in 0..=n {
                let mut seq: Vec<&MatForm> = thetas[i..].iter().collect();
                seq.push(&r0);
                seq.extend(thetas[..i].iter());
                // (-1)^{n(i+1)} from the cotrace, (-1)^{n-i} from the odd
                // ∂ρ crossing the leading letters, (-1)^n from the expansion
                let s = sign((n * (i + 1) + (n - i) + n) % 2 == 1);
                total = total.add(&self.simplex_integral(&seq, max_deg)?.scale(c(s)));
            }
            for (u, t) in self.tau(&total) {
                add_term(&mut out, u, t * z);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Bivariant chain map.

/// A value of `χ` in the X-complex of `B̃`: the degree-zero part of `τμ♮`
/// (unit component included) and the class in `Ω¹B_♮` of its degree-one part.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiValue {
    pub even: CTerms,
    pub odd: CTerms,
}

impl ChiValue {
    /// Coefficient of the adjoined unit: for `B = ℂ` this is the JLO value.
    pub fn unit_part(&self) -> Complex64 {
        self.even.get(&Word::unit()).copied().unwrap_or_default()
    }

    /// The projection onto `B`.
    pub fn b_part(&self) -> CTerms {
        self.even.iter().filter(|(w, _)| w.head.is_some()).map(|(w, z)| (w.clone(), *z)).collect()
    }

    pub fn sub(&self, o: &ChiValue) -> ChiValue {
        let mut even = self.even.clone();
        let mut odd = self.odd.clone();
        for (w, z) in &o.even {
            add_term(&mut even, w.clone(), -z);
        }
        for (w, z) in &o.odd {
            add_term(&mut odd, w.clone(), -z);
        }
        ChiValue { even, odd }
    }

    pub fn norm(&self) -> f64 {
        self.even.values().chain(self.odd.values()).fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// The bivariant cocycle of a triple, evaluated on chains of `ΩA`.
#[derive(Debug, Clone)]
pub struct BivariantCocycle {
    triple: SpectralTriple,
    quotient: Omega1Quotient<Complex64>,
}

impl BivariantCocycle {
    pub fn new(triple: SpectralTriple) -> Self {
        let quotient = Omega1Quotient::new(&triple.coeff);
        BivariantCocycle { triple, quotient }
    }

    pub fn triple(&self) -> &SpectralTriple {
        &self.triple
    }

    pub fn parity(&self) -> Parity {
        self.triple.parity
    }

    /// `χ₀ = p₀τμ♮` and `χ₁ = ♮p₁τμ♮`.
    pub fn eval(&self, chain: &NCForm<Complex64>) -> Result<ChiValue> {
        self.triple.require_coeff_headroom(1)?;
        let t = self.triple.tau_mu(chain, 1)?;
        let even: CTerms = t.iter().filter(|(w, _)| w.degree() == 0).map(|(w, z)| (w.clone(), *z)).collect();
        let odd = self.quotient.reduce_terms(&t);
        Ok(ChiValue { even, odd })
    }

    /// `χ₁ = ♮τμ₀dρ♮`, with `μ₀` built from `[D, ρ]` alone and the last letter
    /// of the right bar word carried by `dρ`.
    pub fn chi_one_via_mu0(&self, chain: &NCForm<Complex64>) -> Result<CTerms> {
        let tr = &self.triple;
        tr.require_coeff_headroom(1)?;
        let mut out = CTerms::new();
        for (w, z) in chain.terms() {
            let n = w.degree();
            let comms: Vec<MatForm> = w.letters.iter().map(|&a| tr.commutator(Some(a))).collect();
            let r0 = tr.rho_head(w.head);
            let mut total = MatForm::zero(tr.dim());
            for i in 1..=n {
                let mut seq: Vec<&MatForm> = comms[i..].iter().collect();
                seq.push(&r0);
                seq.extend(comms[..i - 1].iter());
                let s = sign((n * (i + 1) + (n - i) + (n - 1)) % 2 == 1);
                let integral = tr.simplex_integral(&seq, 0)?;
                let drho = tr.rho[w.letters[i - 1] as usize].d(&tr.par);
                total = total.add(&integral.mul(&tr.coeff, &drho, 1).scale(c(s)));
            }
            for (u, t) in tr.tau(&total) {
                add_term(&mut out, u, t * z);
            }
        }
        Ok(self.quotient.reduce_terms(&out))
    }

    /// `b̄` on the X-complex of `B̃`: `♮x dy ↦ [x, y]`.
    pub fn x_boundary_odd(&self, odd: &CTerms) -> CTerms {
        let alg = &*self.triple.coeff;
        let mut out = CTerms::new();
        for (w, z) in odd {
            if w.degree() != 1 {
                continue;
            }
            let x = Word::new(w.head, vec![]);
            let y = Word::new(Some(w.letters[0]), vec![]);
            mul_words(alg, &x, &y, z, &mut out);
            mul_words(alg, &y, &x, &-z, &mut out);
        }
        out.retain(|_, z| z.norm() > 1e-300);
        out
    }

    /// `♮d` on the X-complex of `B̃`, landing in canonical representatives.
    pub fn x_boundary_even(&self, even: &CTerms) -> CTerms {
        let mut out = CTerms::new();
        for (w, z) in even {
            if let Some(h) = w.head {
                add_term(&mut out, Word::new(None, vec![h]), *z);
            }
        }
        self.quotient.reduce_terms(&out)
    }

    pub fn reduce_odd(&self, x: &CTerms) -> CTerms {
        self.quotient.reduce_terms(x)
    }
}

// ---------------------------------------------------------------------------
// JLO cocycles.

fn check_chain_parity(chain: &NCForm<Complex64>, parity: Parity) -> Result<()> {
    let want = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    if let Some(w) = chain.terms().keys().find(|w| w.degree() % 2 != want) {
        return Err(Error::ParityMismatch(format!("{parity:?} cocycle evaluated on a degree-{} chain", w.degree())));
    }
    Ok(())
}

/// `Σ ∫_{Δₙ} Tr_s(ρ(a₀) e^{-s₀D²} [D,ρ(a₁)] … [D,ρ(aₙ)] e^{-sₙD²})`.
pub fn jlo_even(t: &SpectralTriple, chain: &NCForm<Complex64>) -> Result<Complex64> {
    if t.parity != Parity::Even {
        return Err(Error::ParityMismatch("even JLO formula on an odd triple".into()));
    }
    check_chain_parity(chain, Parity::Even)?;
    let d2 = t.d2();
    let s = parity_signs(&t.par);
    let mut acc = Complex64::default();
    for (w, z) in chain.terms() {
        let factors: Vec<CMat> = w.letters.iter().map(|&a| t.commutator(Some(a)).as_scalar()).collect::<Option<_>>().ok_or_else(|| Error::MalformedTriple("JLO needs scalar coefficients".into()))?;
        let prod = t.scalar_rho(w.head)? * duhamel_integral(&d2, &factors, 1.0)?;
        acc += (&s * prod).trace() * z;
    }
    Ok(acc)
}

/// `-√(2i) Σ ∫_{Δₙ} Tr(α(a₀) e^{-s₀Q²} [Q,α(a₁)] … e^{-sₙQ²})` on `K`.
pub fn jlo_odd(t: &SpectralTriple, chain: &NCForm<Complex64>) -> Result<Complex64> {
    if t.parity != Parity::Odd {
        return Err(Error::ParityMismatch("odd JLO formula on an even triple".into()));
    }
    check_chain_parity(chain, Parity::Odd)?;
    let k = t.dim() / 2;
    let q = t.dirac.view((0, k), (k, k)).into_owned();
    let q2 = &q * &q;
    let alpha = |h: Option<u16>| -> Result<CMat> { Ok(t.scalar_rho(h)?.view((0, 0), (k, k)).into_owned()) };
    let mut acc = Complex64::default();
    for (w, z) in chain.terms() {
        let mut factors = Vec::with_capacity(w.letters.len());
        for &a in &w.letters {
            let al = alpha(Some(a))?;
            factors.push(&q * &al - &al * &q);
        }
        let prod = alpha(w.head)? * duhamel_integral(&q2, &factors, 1.0)?;
        acc += prod.trace() * z;
    }
    Ok(-sqrt_2i::<Complex64>() * acc)
}

pub fn jlo(t: &SpectralTriple, chain: &NCForm<Complex64>) -> Result<Complex64> {
    match t.parity {
        Parity::Even => jlo_even(t, chain),
        Parity::Odd => jlo_odd(t, chain),
    }
}

// ---------------------------------------------------------------------------
// Chern–Simons transgression along a path of Dirac operators.

/// A path `t ↦ D_t`, `t ∈ [0,1]`, with the representation held fixed.
#[derive(Debug, Clone)]
pub enum DiracPath {
    /// `D_t = (1-t)D₀ + tD₁`.
    Linear { d0: CMat, d1: CMat },
    /// `D_t = D - t([D,P]P - P[D,P])` for a projection `P = ρ(e)`; at `t = 1`
    /// the operator commutes with `P`.
    Flattening { d: CMat, p: CMat },
}

impl DiracPath {
    pub fn at(&self, t: f64) -> CMat {
        match self {
            DiracPath::Linear { d0, d1 } => d0 * c(1.0 - t) + d1 * c(t),
            DiracPath::Flattening { d, p } => d - Self::flattening_direction(d, p) * c(t),
        }
    }

    pub fn velocity(&self, _t: f64) -> CMat {
        match self {
            DiracPath::Linear { d0, d1 } => d1 - d0,
            DiracPath::Flattening { d, p } => -Self::flattening_direction(d, p),
        }
    }

    fn flattening_direction(d: &CMat, p: &CMat) -> CMat {
        let comm = d * p - p * d;
        &comm * p - p * &comm
    }
}

/// Transgression cochain at time `t`: the `dt`-component of `τμ♮` for the
/// family, with scalar coefficients. Only chains of parity opposite to the
/// triple contribute.
pub fn chern_simons_density(triple: &SpectralTriple, path: &DiracPath, t: f64, chain: &NCForm<Complex64>) -> Result<Complex64> {
    if !triple.is_scalar() {
        return Err(Error::MalformedTriple("transgression is implemented for scalar coefficients".into()));
    }
    let tr = triple.with_dirac(path.at(t))?;
    let d2 = tr.d2();
    // -dD enters the heat expansion with a further minus sign
    let insert = parity_signs(&tr.par) * path.velocity(t);
    let mut acc = Complex64::default();
    for (w, z) in chain.terms() {
        let n = w.degree();
        let comms: Vec<CMat> = w.letters.iter().map(|&a| tr.commutator(Some(a)).as_scalar().expect("scalar")).collect();
        let r0 = tr.scalar_rho(w.head)?;
        let mut total = CMat::zeros(tr.dim(), tr.dim());
        for i in 0..=n {
            let mut seq: Vec<&CMat> = comms[i..].iter().collect();
            seq.push(&r0);
            seq.extend(comms[..i].iter());
            let s = sign((n * (i + 1) + (n - i) + n) % 2 == 1);
            for g in 0..=seq.len() {
                let mut with = seq.clone();
                with.insert(g, &insert);
                total += duhamel_refs(&d2, &with, 1.0)? * c(s);
            }
        }
        let val = match tr.parity {
            Parity::Even => total.trace(),
            Parity::Odd => {
                let k = tr.dim() / 2;
                (0..k).map(|i| total[(k + i, i)]).sum::<Complex64>() * sqrt_2i::<Complex64>()
            }
        };
        acc += val * z;
    }
    Ok(acc)
}

/// `∫₀¹ cs(t) dt` by the midpoint rule on `m` cells.
pub fn chern_simons(triple: &SpectralTriple, path: &DiracPath, chain: &NCForm<Complex64>, m: usize) -> Result<Complex64> {
    if m == 0 {
        return Err(Error::GridTooCoarse("empty grid".into()));
    }
    let h = 1.0 / m as f64;
    let mut acc = Complex64::default();
    for k in 0..m {
        acc += chern_simons_density(triple, path, (k as f64 + 0.5) * h, chain)?;
    }
    Ok(acc * h)
}

/// `χ(D₁)(c) - χ(D₀)(c) - ∫cs((b+B)c)`: zero up to quadrature error. For
/// scalar coefficients the X-complex of `ℂ` has no odd part, so only the
/// unit component of `χ₀` moves.
pub fn homotopy_residual(triple: &SpectralTriple, path: &DiracPath, chain: &NCForm<Complex64>, m: usize) -> Result<f64> {
    let start = jlo_unit(&triple.with_dirac(path.at(0.0))?, chain)?;
    let end = jlo_unit(&triple.with_dirac(path.at(1.0))?, chain)?;
    let cs = chern_simons(triple, path, &chain.b_plus_b(), m)?;
    Ok((end - start - cs).norm())
}

/// As [`homotopy_residual`], failing with `GridTooCoarse` above `tol`.
pub fn check_homotopy(triple: &SpectralTriple, path: &DiracPath, chain: &NCForm<Complex64>, m: usize, tol: f64) -> Result<f64> {
    let r = homotopy_residual(triple, path, chain, m)?;
    if r > tol {
        return Err(Error::GridTooCoarse(format!("residual {r:.3e} above {tol:.1e} at m = {m}")));
    }
    Ok(r)
}

fn jlo_unit(t: &SpectralTriple, chain: &NCForm<Complex64>) -> Result<Complex64> {
    Ok(BivariantCocycle::new(t.clone()).eval(chain)?.unit_part())
}

// ---------------------------------------------------------------------------
// Chern character of idempotents and the index pairing.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    XComplex,
    BB,
}

/// `tr(e) + Σ_{n≥1} cₙ tr((e - ½)(de de)ⁿ)` up to degree `trunc`, with
/// `cₙ = (2n)!/(n!)²` in the X-complex picture and `(-1)ⁿ(2n)!/n!` in the
/// `(b+B)` picture. `e` is a square matrix of degree-zero forms over `Ã`.
pub fn ch_idempotent<F: Field>(e: &SMat<NCForm<F>>, trunc: usize, picture: Picture) -> Result<NCForm<F>> {
    let Some(any) = e.e.values().next() else {
        return Err(Error::NotIdempotent);
    };
    let alg = any.algebra().clone();
    if e.rows != e.cols || e.row_par.iter().chain(&e.col_par).any(|&p| p != 0) {
        return Err(Error::DimensionMismatch("idempotent must be a square ungraded matrix".into()));
    }
    if e.e.values().any(|f| f.max_degree().unwrap_or(0) > 0) {
        return Err(Error::WrongDegree { expected: "0".into(), got: 1 });
    }
    let e = e.map(|f| f.with_trunc(trunc));
    if e.mul(&e) != e {
        return Err(Error::NotIdempotent);
    }
    let one = Form::unit(&alg, trunc);
    let half = SMat::identity(&e.row_par, one.scale(&F::from_rat(&Rat::new(1, 2))));
    let centered = e.sub(&half);
    let de = e.d();
    let curv = de.mul(&de);
    let trace = |m: &SMat<NCForm<F>>| m.trace().unwrap_or_else(|| Form::zero(&alg, trunc));
    let mut out = trace(&e);
    let mut term = centered;
    for n in 1..=trunc / 2 {
        term = term.mul(&curv);
        let central = Rat::factorial(2 * n as u32) * Rat::factorial(n as u32).recip().expect("nonzero");
        let coeff = match picture {
            Picture::XComplex => central * Rat::factorial(n as u32).recip().expect("nonzero"),
            Picture::BB => {
                if n % 2 == 1 {
                    -central
                } else {
                    central
                }
            }
        };
        out = out.add(&trace(&term).scale(&F::from_rat(&coeff)))?;
    }
    Ok(out)
}

/// `⟨ch(e), JLO⟩` at heat time `t`. When `[D, ρ(e)] ≠ 0` the Dirac operator
/// is first moved along the flattening path, after which only the
/// degree-zero pairing `Tr_s(ρ(e) e^{-tD²})` survives.
pub fn index_pairing(e: &NCForm<Complex64>, triple: &SpectralTriple, t: f64) -> Result<Complex64> {
    if triple.parity != Parity::Even {
        return Err(Error::ParityMismatch("index pairing needs an even triple".into()));
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let p = triple.rho_element(e)?.as_scalar().ok_or_else(|| Error::MalformedTriple("index pairing needs scalar coefficients".into()))?;
    if max_abs(&(&p * &p - &p)) > 1e-10 {
        return Err(Error::NotIdempotent);
    }
    let d = triple.dirac();
    let flat = if max_abs(&(d * &p - &p * d)) > 1e-14 { DiracPath::Flattening { d: d.clone(), p: p.clone() }.at(1.0) } else { d.clone() };
    let flat_triple = triple.with_dirac(flat)?.at_time(t)?;
    let ch = ch_idempotent(&SMat::identity(&[0], e.clone()), 2, Picture::BB)?;
    jlo_even(&flat_triple, &ch)
}

/// `dim ker(eD₊e) - dim ker(eD₋e)` on `eH`, by exact ranks. `p` is the
/// projection `ρ(e)` and `d` the Dirac operator, both on `ℂ^{p|q}`.
pub fn fredholm_index(p: &SMat<Gaussian>, d: &SMat<Gaussian>) -> Result<i64> {
    if p.mul(p) != *p {
        return Err(Error::NotIdempotent);
    }
    let par = &p.row_par;
    let even: Vec<usize> = (0..p.rows).filter(|&i| par[i] == 0).collect();
    let odd: Vec<usize> = (0..p.rows).filter(|&i| par[i] == 1).collect();
    let pdp = p.mul(d).mul(p).to_dense();
    let pd = p.to_dense();
    let block = |m: &Vec<Vec<Gaussian>>, r: &[usize], cidx: &[usize]| -> Vec<Vec<Gaussian>> { r.iter().map(|&i| cidx.iter().map(|&j| m[i][j].clone()).collect()).collect() };
    let rank_even = rank(&block(&pd, &even, &even)) as i64;
    let rank_odd = rank(&block(&pd, &odd, &odd)) as i64;
    // ker(eD₊e|_{eH₊}) has dimension rank(P₊) - rank(P₋DP₊)
    let plus = rank(&block(&pdp, &odd, &even)) as i64;
    let minus = rank(&block(&pdp, &even, &odd)) as i64;
    Ok((rank_even - plus) - (rank_odd - minus))
}

// ---------------------------------------------------------------------------
// Functoriality.

/// `φ·(H, ρ, D) = (H, ρ∘φ, D)` for a homomorphism `φ: A₁ → A₂`.
pub fn left_compose(phi: &AlgebraHom<Complex64>, t: &SpectralTriple) -> Result<SpectralTriple> {
    if *phi.dst != *t.source {
        return Err(Error::AlgebraMismatch);
    }
    let src = phi.src.clone();
    let rho = (0..src.dim())
        .map(|i| {
            phi.image(i).iter().enumerate().fold(MatForm::zero(t.dim()), |acc, (k, z)| if Field::is_zero(z) { acc } else { acc.add(&t.rho[k].scale(*z)) })
        })
        .collect();
    SpectralTriple::new(src, t.coeff.clone(), t.coeff_trunc, t.par.clone(), t.parity, rho, t.dirac.clone())
}

// ---------------------------------------------------------------------------
// JSON.

/// `[[[re, im], …], …]`, row-major.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(m: &MatrixJson, n: usize) -> Result<CMat> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("expected a {n}x{n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

/// `{"p","q","parity","rho":{label: matrix},"D","coeff_trunc"}`. Triples
/// with scalar coefficients only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleJson {
    pub p: usize,
    pub q: usize,
    pub parity: Parity,
    pub rho: BTreeMap<String, MatrixJson>,
    #[serde(rename = "D")]
    pub dirac: MatrixJson,
    #[serde(default)]
    pub coeff_trunc: Option<usize>,
}

impl TripleJson {
    pub fn build(&self, alg: &Arc<FiniteAlgebra<Complex64>>) -> Result<SpectralTriple> {
        let n = self.p + self.q;
        let mut rho = Vec::with_capacity(alg.dim());
        for label in alg.labels() {
            let m = self.rho.get(label).ok_or_else(|| Error::Resolution(format!("no matrix for basis element {label}")))?;
            rho.push(MatForm::scalar(matrix_from_json(m, n)?));
        }
        if let Some(extra) = self.rho.keys().find(|k| alg.index_of(k).is_none()) {
            return Err(Error::Resolution(format!("basis element {extra} is not in the algebra")));
        }
        let par = crate::linalg::block_parities(self.p, self.q);
        SpectralTriple::new(alg.clone(), Arc::new(FiniteAlgebra::complex_numbers()), self.coeff_trunc.unwrap_or(0), par, self.parity, rho, matrix_from_json(&self.dirac, n)?)
    }

    pub fn from_triple(t: &SpectralTriple) -> Result<Self> {
        let mut rho = BTreeMap::new();
        for (i, label) in t.source.labels().iter().enumerate() {
            let m = t.rho[i].as_scalar().ok_or_else(|| Error::MalformedTriple("only scalar triples serialize".into()))?;
            rho.insert(label.clone(), matrix_to_json(&m));
        }
        let p = t.par.iter().filter(|&&x| x == 0).count();
        Ok(TripleJson { p, q: t.dim() - p, parity: t.parity, rho, dirac: matrix_to_json(&t.dirac), coeff_trunc: Some(t.coeff_trunc) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duhamel_with_vanishing_heat_operator_is_a_volume() {
        let a = CMat::from_fn(2, 2, |i, j| z(i as f64 + 1.0, j as f64));
        let b = CMat::from_fn(2, 2, |i, j| z(j as f64 - i as f64, 1.0));
        let r = duhamel_integral(&CMat::zeros(2, 2), &[a.clone(), b.clone()], 2.0).unwrap();
        assert!(max_abs(&(r - &a * &b * z(2.0, 0.0))) < 1e-12);
    }

    #[test]
    fn scalar_heat_kernel() {
        let d = CMat::from_row_slice(2, 2, &[z(0.0, 0.0), z(1.0, 0.0), z(1.0, 0.0), z(0.0, 0.0)]);
        let h = heat_kernel(&d, 0.7).unwrap();
        assert!(max_abs(&(h - CMat::identity(2, 2) * z((-0.7f64).exp(), 0.0))) < 1e-14);
        assert!(matches!(heat_kernel(&d, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn index_one_fixture() {
        // ℂ^{2|1}, D₊ = [1 0]: (e^{-t} + 1) - e^{-t} = 1
        let alg = Arc::new(FiniteAlgebra::<Complex64>::complex_numbers());
        let mut d = CMat::zeros(3, 3);
        d[(2, 0)] = z(1.0, 0.0);
        d[(0, 2)] = z(1.0, 0.0);
        let t = SpectralTriple::even_scalar(alg.clone(), 2, 1, vec![CMat::identity(3, 3)], d).unwrap();
        let e = Form::unit(&alg, 0);
        for time in [0.5, 1.0, 2.0] {
            assert!((index_pairing(&e, &t, time).unwrap() - z(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
