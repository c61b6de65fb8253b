//! De Rham forms on `ℝⁿ` with polynomial-times-Gaussian coefficients, the
//! Fedosov algebra `Tₙ = (Ω⁺(ℝⁿ), ⊙)`, the Bott element and its pairing with
//! the fundamental class.
//!
//! Scalars are symbolic (`ℚ(i)·π^{p/2}·λ^{q/2}`), so the normalization of the
//! pairing is an exact identity rather than a numerical coincidence.

use std::collections::BTreeMap;
use std::fmt;

use crate::fedosov::fedosov_exp_exact;
use crate::linalg::{DgRing, SMat};
use crate::scalar::{sqrt_2i, Field, Gaussian, Rat, Sym};
use crate::{Error, Result};

/// One basis term `x^mono · e^{−damp·λx²} · dx_I` with `I` the set bits of `dx`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GTerm {
    pub damp: u32,
    pub mono: Vec<u32>,
    pub dx: u32,
}

impl GTerm {
    pub fn degree(&self) -> usize {
        self.dx.count_ones() as usize
    }
}

/// Sign of `dx_A ∧ dx_B` relative to the sorted product, `None` when they overlap.
fn wedge_sign(a: u32, b: u32) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    // each index of b passes every larger index of a
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (a >> (j + 1)).count_ones();
    }
    Some(swaps % 2 == 1)
}

/// A differential form on `ℝⁿ` whose coefficients are polynomials times powers
/// of the Gaussian `e^{−λx²}`.
#[derive(Clone, PartialEq)]
pub struct GaussianForm {
    n: usize,
    terms: BTreeMap<GTerm, Sym>,
}

impl fmt::Debug for GaussianForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaussianForm[{}]", self)
    }
}

impl fmt::Display for GaussianForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (u, &e) in t.mono.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " x{}", u + 1)?,
                    _ => write!(f, " x{}^{e}", u + 1)?,
                }
            }
            match t.damp {
                0 => {}
                1 => write!(f, " e^(-λx²)")?,
                m => write!(f, " e^(-{m}λx²)")?,
            }
            for u in 0..self.n {
                if t.dx >> u & 1 == 1 {
                    write!(f, " dx{}", u + 1)?;
                }
            }
        }
        Ok(())
    }
}

impl GaussianForm {
    pub fn zero(n: usize) -> Self {
        GaussianForm { n, terms: BTreeMap::new() }
    }

    /// `c · x^mono · e^{−damp·λx²} · dx_{i₁} ∧ … ∧ dx_{iₖ}` with 0-based,
    /// possibly unsorted indices; repeated indices give zero.
    pub fn monomial(n: usize, c: Sym, damp: u32, mono: &[u32], dx: &[usize]) -> Result<Self> {
        if mono.len() != n || dx.iter().any(|&u| u >= n) || n > 16 {
            return Err(Error::DimensionMismatch(format!("monomial does not live on ℝ^{n}")));
        }
        let mut mask = 0u32;
        let mut odd = false;
        for &u in dx {
            match wedge_sign(mask, 1 << u) {
                None => return Ok(Self::zero(n)),
                Some(s) => {
                    odd ^= s;
                    mask |= 1 << u;
                }
            }
        }
        let mut out = Self::zero(n);
        out.add_term(GTerm { damp, mono: mono.to_vec(), dx: mask }, if odd { -c } else { c });
        Ok(out)
    }

    pub fn constant(n: usize, c: Sym) -> Self {
        Self::monomial(n, c, 0, &vec![0; n], &[]).expect("valid")
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Sym::one())
    }

    /// The coordinate function `x_u` (0-based).
    pub fn coordinate(n: usize, u: usize) -> Self {
        let mut mono = vec![0; n];
        mono[u] = 1;
        Self::monomial(n, Sym::one(), 0, &mono, &[]).expect("valid")
    }

    /// `e^{−λx²}`.
    pub fn gaussian(n: usize) -> Self {
        Self::monomial(n, Sym::one(), 1, &vec![0; n], &[]).expect("valid")
    }

    /// `x² = Σ x_u²`.
    pub fn radius_squared(n: usize) -> Self {
        let mut out = Self::zero(n);
        for u in 0..n {
            let mut mono = vec![0; n];
            mono[u] = 2;
            out = out.add(&Self::monomial(n, Sym::one(), 0, &mono, &[]).expect("valid"));
        }
        out
    }

    /// `dx_{i₁} ∧ … ∧ dx_{iₖ}`.
    pub fn dx(n: usize, idx: &[usize]) -> Result<Self> {
        Self::monomial(n, Sym::one(), 0, &vec![0; n], idx)
    }

    fn add_term(&mut self, t: GTerm, c: Sym) {
        if Field::is_zero(&c) {
            return;
        }
        let e = self.terms.entry(t.clone()).or_insert_with(Sym::zero);
        *e = e.clone() + c;
        if Field::is_zero(e) {
            self.terms.remove(&t);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn terms(&self) -> &BTreeMap<GTerm, Sym> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(format!("forms on ℝ^{} and ℝ^{}", self.n, o.n)));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = self.clone();
        for (t, c) in &o.terms {
            out.add_term(t.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("forms on the same ℝⁿ")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Sym::one())
    }

    pub fn scale(&self, s: &Sym) -> Self {
        let mut out = Self::zero(self.n);
        for (t, c) in &self.terms {
            out.add_term(t.clone(), c.clone() * s.clone());
        }
        out
    }

    /// The component of form degree `k`.
    pub fn part(&self, k: usize) -> Self {
        GaussianForm { n: self.n, terms: self.terms.iter().filter(|(t, _)| t.degree() == k).map(|(t, c)| (t.clone(), c.clone())).collect() }
    }

    /// True when every term has even form degree.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|t| t.degree() % 2 == 0)
    }

    /// True when no term carries a Gaussian factor.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|t| t.damp == 0)
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let Some(odd) = wedge_sign(a.dx, b.dx) else { continue };
                let mono = a.mono.iter().zip(&b.mono).map(|(x, y)| x + y).collect();
                let c = ca.clone() * cb.clone();
                out.add_term(GTerm { damp: a.damp + b.damp, mono, dx: a.dx | b.dx }, if odd { -c } else { c });
            }
        }
        Ok(out)
    }

    /// Exterior derivative; `d(e^{−mλx²}) = −2mλ Σ x_u e^{−mλx²} dx_u`.
    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (t, c) in &self.terms {
            for u in 0..self.n {
                let Some(odd) = wedge_sign(1 << u, t.dx) else { continue };
                let dx = t.dx | 1 << u;
                let c = if odd { -c.clone() } else { c.clone() };
                if t.mono[u] > 0 {
                    let mut mono = t.mono.clone();
                    mono[u] -= 1;
                    out.add_term(GTerm { damp: t.damp, mono, dx }, c.clone() * Sym::from_i64(t.mono[u] as i64));
                }
                if t.damp > 0 {
                    let mut mono = t.mono.clone();
                    mono[u] += 1;
                    out.add_term(GTerm { damp: t.damp, mono, dx }, c * Sym::lambda() * Sym::from_i64(-2 * t.damp as i64));
                }
            }
        }
        out
    }

    /// The Fedosov product `ω₁ ⊙ ω₂ = ω₁ω₂ − dω₁ ∧ dω₂` on even forms.
    pub fn fedosov_t(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        if !self.is_even() || !o.is_even() {
            return Err(Error::ParityError("the Fedosov product of Tₙ is defined on even forms".into()));
        }
        Ok(self.wedge(o)?.sub(&self.d().wedge(&o.d())?))
    }

    /// `∫_{ℝⁿ} ω` for a top-degree form, each term carrying a Gaussian factor
    /// `e^{−mλx²}` with `m` a perfect square (so that `√m` stays rational).
    pub fn integrate_top(&self) -> Result<Sym> {
        let top = (1u32 << self.n) - 1;
        let mut total = Sym::zero();
        for (t, c) in &self.terms {
            if t.dx != top {
                return Err(Error::NotTopDegree { expected: self.n, got: t.degree() });
            }
            if t.damp == 0 {
                return Err(Error::NotIntegrable("polynomial term without a Gaussian factor".into()));
            }
            let root = (t.damp as f64).sqrt().round() as u32;
            if root * root != t.damp {
                return Err(Error::NotIntegrable(format!("damping e^(-{}λx²) needs an irrational normalization", t.damp)));
            }
            let mut v = c.clone();
            for &e in &t.mono {
                v = v * gaussian_moment(e, t.damp, root);
            }
            total = total + v;
        }
        Ok(total)
    }

    /// Evaluate the coefficient of `dx_I` at a point, for numeric oracles.
    pub fn lower_at(&self, dx: u32, x: &[f64], pi: f64, lambda: f64) -> num::complex::Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.terms
            .iter()
            .filter(|(t, _)| t.dx == dx)
            .map(|(t, c)| {
                let poly: f64 = t.mono.iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product();
                c.lower(pi, lambda) * poly * (-(t.damp as f64) * lambda * r2).exp()
            })
            .sum()
    }
}

/// `∫ x^e e^{−mλx²} dx = (e−1)!!/(2mλ)^{e/2} · √π/(√m·√λ)` for even `e`, zero for odd `e`.
pub fn gaussian_moment(e: u32, m: u32, root_m: u32) -> Sym {
    if e % 2 == 1 {
        return Sym::zero();
    }
    let j = e / 2;
    let mut dfact = Rat::int(1);
    for k in (1..e).step_by(2) {
        dfact = dfact * Rat::int(k as i64);
    }
    let mut denom = Rat::int(1);
    for _ in 0..j {
        denom = denom * Rat::int(2 * m as i64);
    }
    let c = dfact * denom.recip().expect("nonzero") * Rat::new(1, root_m as i64);
    Sym::monomial(Gaussian::real(c), 1, -1 - 2 * j as i32)
}

impl DgRing for GaussianForm {
    fn add(&self, o: &Self) -> Self {
        GaussianForm::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.wedge(o).expect("forms on the same ℝⁿ")
    }
    fn neg(&self) -> Self {
        GaussianForm::neg(self)
    }
    fn is_zero(&self) -> bool {
        GaussianForm::is_zero(self)
    }
    fn d(&self) -> Self {
        GaussianForm::d(self)
    }
    fn twist(&self) -> Self {
        let mut out = self.clone();
        for (t, c) in out.terms.iter_mut() {
            if t.degree() % 2 == 1 {
                *c = -c.clone();
            }
        }
        out
    }
    fn scale_rat(&self, r: &Rat) -> Self {
        self.scale(&Sym::from_rat(r))
    }
    fn form_part(&self, k: usize) -> Self {
        self.part(k)
    }
}

// ---------------------------------------------------------------------------
// Clifford data.

/// Hermitian generators `γ¹,…,γⁿ` of the complex Clifford algebra `Cₙ` on the
/// spinor space, `n ≤ 4`. For even `n` the spinor space is graded by
/// `Γ = (−i)^k γ¹⋯γⁿ`, which in the chosen basis is diagonal with the row
/// parities as signs; for odd `n` it is trivially graded.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub n: usize,
    pub par: Vec<u8>,
    pub gammas: Vec<SMat<Gaussian>>,
}

fn pauli(which: char) -> [[Gaussian; 2]; 2] {
    let z = Gaussian::zero;
    let o = Gaussian::one;
    let i = Gaussian::imag_unit;
    match which {
        'x' => [[z(), o()], [o(), z()]],
        'y' => [[z(), -i()], [i(), z()]],
        'z' => [[o(), z()], [z(), -o()]],
        _ => [[o(), z()], [z(), o()]],
    }
}

fn kron(a: &[[Gaussian; 2]; 2], b: &[[Gaussian; 2]; 2]) -> Vec<Vec<Gaussian>> {
    let mut out = vec![vec![Gaussian::zero(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j].clone() * b[k][l].clone();
                }
            }
        }
    }
    out
}

impl CliffordRep {
    pub fn new(n: usize) -> Result<Self> {
        let dense2 = |m: [[Gaussian; 2]; 2]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        let (par, mats): (Vec<u8>, Vec<Vec<Vec<Gaussian>>>) = match n {
            1 => (vec![0], vec![vec![vec![Gaussian::one()]]]),
            2 => (vec![0, 1], vec![dense2(pauli('x')), dense2(pauli('y'))]),
            3 => (vec![0, 0], vec![dense2(pauli('x')), dense2(pauli('y')), dense2(pauli('z'))]),
            4 => (
                vec![0, 1, 1, 0],
                vec![kron(&pauli('x'), &pauli('1')), kron(&pauli('y'), &pauli('1')), kron(&pauli('z'), &pauli('x')), kron(&pauli('z'), &pauli('y'))],
            ),
            _ => return Err(Error::UnsupportedDimension(n)),
        };
        let gammas = mats.iter().map(|m| SMat::from_dense(par.clone(), par.clone(), m)).collect();
        Ok(CliffordRep { n, par, gammas })
    }

    pub fn size(&self) -> usize {
        self.par.len()
    }

    pub fn identity(&self) -> SMat<Gaussian> {
        SMat::identity(&self.par, Gaussian::one())
    }

    /// `γ^{i₁}⋯γ^{iₖ}` (0-based indices).
    pub fn product(&self, idx: &[usize]) -> SMat<Gaussian> {
        idx.iter().fold(self.identity(), |acc, &i| acc.mul(&self.gammas[i]))
    }

    /// `Γ = (−i)^k γ¹⋯γⁿ` for even `n`.
    pub fn chirality(&self) -> Option<SMat<Gaussian>> {
        if self.n % 2 == 1 {
            return None;
        }
        let k = self.n / 2;
        let mut c = Gaussian::one();
        for _ in 0..k {
            c = c * -Gaussian::imag_unit();
        }
        let all: Vec<usize> = (0..self.n).collect();
        Some(self.product(&all).map(|e| e.clone() * c.clone()))
    }

    /// `tr_s = tr(Γ·)` for even `n`, the ordinary trace for odd `n`.
    pub fn trace(&self, m: &SMat<Gaussian>) -> Gaussian {
        if self.n % 2 == 0 {
            m.supertrace()
        } else {
            (0..m.rows).filter_map(|i| m.get(i, i).cloned()).fold(Gaussian::zero(), |a, b| a + b)
        }
    }
}

/// Embed a scalar matrix as constant forms.
fn constant_matrix(n: usize, m: &SMat<Gaussian>) -> SMat<GaussianForm> {
    m.map_to(|g| GaussianForm::constant(n, Sym::from_gaussian(g)))
}

/// `Q_λ = √λ Σ x_μ γ^μ` as a matrix of 0-forms.
pub fn clifford_multiplication(rep: &CliffordRep) -> SMat<GaussianForm> {
    let n = rep.n;
    let mut q = SMat::square_zeros(&rep.par);
    for (mu, g) in rep.gammas.iter().enumerate() {
        let x = GaussianForm::coordinate(n, mu).scale(&Sym::sqrt_lambda());
        for (&(i, j), c) in &g.e {
            q.add_entry(i, j, &x.scale(&Sym::from_gaussian(c)));
        }
    }
    q
}

/// An element of `X(Tₙ)`: an even form plus `Σ ♮ x 𝐝y`.
#[derive(Clone, Debug, PartialEq)]
pub struct TnChain {
    pub even: GaussianForm,
    pub odd: Vec<(GaussianForm, GaussianForm)>,
}

impl TnChain {
    pub fn even(x: GaussianForm) -> Self {
        TnChain { odd: vec![], even: x }
    }
    pub fn odd(n: usize, pairs: Vec<(GaussianForm, GaussianForm)>) -> Self {
        TnChain { even: GaussianForm::zero(n), odd: pairs }
    }

    /// Merge pairs with the same `y` and drop vanishing ones.
    pub fn normalized(&self) -> Self {
        let mut merged: Vec<(GaussianForm, GaussianForm)> = Vec::new();
        for (x, y) in &self.odd {
            match merged.iter_mut().find(|(_, yy)| yy == y) {
                Some(slot) => slot.0 = slot.0.add(x),
                None => merged.push((x.clone(), y.clone())),
            }
        }
        merged.retain(|(x, y)| !x.is_zero() && !y.d().is_zero());
        merged.sort_by(|a, b| format!("{}", a.1).cmp(&format!("{}", b.1)));
        TnChain { even: self.even.clone(), odd: merged }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BottMethod {
    ClosedForm,
    FedosovExp,
}

/// `(2i)^{n/2} λ^{n/2}` with `√(2i) = 1 + i`.
fn two_i_lambda_pow(n: usize) -> Sym {
    let mut c = Sym::one();
    for _ in 0..n {
        c = c * sqrt_2i::<Sym>();
    }
    c * Sym::monomial(Gaussian::one(), 0, n as i32)
}

fn factorial(k: usize) -> Sym {
    Sym::from_rat(&Rat::factorial(k as u32))
}

/// The Chern character of the Bott generator `βₙ` in `X(Tₙ)`.
pub fn bott_chern(n: usize, method: BottMethod) -> Result<TnChain> {
    if !(1..=4).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    match method {
        BottMethod::ClosedForm => Ok(bott_closed_form(n)),
        BottMethod::FedosovExp => bott_via_fedosov(n),
    }
}

fn bott_closed_form(n: usize) -> TnChain {
    let k = n / 2;
    let g = GaussianForm::gaussian(n);
    if n % 2 == 0 {
        let coeff = factorial(n) * factorial(k).inv().expect("nonzero") * two_i_lambda_pow(n);
        let all: Vec<usize> = (0..n).collect();
        TnChain::even(g.wedge(&GaussianForm::dx(n, &all).expect("valid")).expect("same n").scale(&coeff))
    } else {
        let coeff = -(factorial(2 * k) * factorial(k).inv().expect("nonzero") * two_i_lambda_pow(n));
        let pairs = (0..n)
            .map(|j| {
                let cyclic: Vec<usize> = (1..n).map(|s| (j + s) % n).collect();
                let x = g.wedge(&GaussianForm::dx(n, &cyclic).expect("valid")).expect("same n").scale(&coeff);
                (x, GaussianForm::coordinate(n, j))
            })
            .collect();
        TnChain::odd(n, pairs)
    }
}

/// The Fedosov exponential `exp_⊙(−D^{⊙2})` for the Bott Dirac operator,
/// computed by the general exact Duhamel expansion. Returns the matrix.
pub fn bott_heat_form(n: usize) -> Result<SMat<GaussianForm>> {
    let rep = CliffordRep::new(n)?;
    let q = clifford_multiplication(&rep);
    let dq = q.d();
    // even n: D = Q odd, D^{⊙2} = D² + dD dD; odd n: D = εQ with Q even on a
    // trivially graded space, and D^{⊙2} = Q² − dQ dQ.
    let square = if n % 2 == 0 { q.mul(&q).add(&dq.mul(&dq)) } else { q.mul(&q).sub(&dq.mul(&dq)) };
    let h = square.neg();
    let (h0, p) = fedosov_exp_exact(&GaussianForm::one(n), &h)?;
    let expect = GaussianForm::radius_squared(n).scale(&-Sym::lambda());
    if h0 != expect {
        return Err(Error::Numerical(format!("unexpected scalar part of the Bott Hamiltonian: {h0}")));
    }
    let g = GaussianForm::gaussian(n);
    Ok(p.map(|e| g.wedge(e).expect("same n")))
}

/// The collapsed form `e^{−λx²} Σ λᵏ/k! dx_{μ₁}⋯dx_{μ₂ₖ} γ^{μ₁}⋯γ^{μ₂ₖ}`.
pub fn bott_heat_form_collapsed(n: usize) -> Result<SMat<GaussianForm>> {
    let rep = CliffordRep::new(n)?;
    let g = GaussianForm::gaussian(n);
    let mut total = SMat::square_zeros(&rep.par);
    let mut lam_k = Sym::one();
    for k in 0..=n / 2 {
        let coeff = lam_k.clone() * factorial(k).inv().expect("nonzero");
        for idx in index_tuples(n, 2 * k) {
            let form = GaussianForm::dx(n, &idx)?;
            if form.is_zero() {
                continue;
            }
            let entry = g.wedge(&form)?.scale(&coeff);
            let gam = rep.product(&idx);
            for (&(i, j), c) in &gam.e {
                total.add_entry(i, j, &entry.scale(&Sym::from_gaussian(c)));
            }
        }
        lam_k = lam_k * Sym::lambda();
    }
    Ok(total)
}

fn index_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                (0..n).map(move |u| {
                    let mut w = v.clone();
                    w.push(u);
                    w
                })
            })
            .collect();
    }
    out
}

fn bott_via_fedosov(n: usize) -> Result<TnChain> {
    let rep = CliffordRep::new(n)?;
    let heat = bott_heat_form(n)?;
    let gamma_forms: Vec<SMat<GaussianForm>> = rep.gammas.iter().map(|g| constant_matrix(n, g)).collect();
    let trace = |m: &SMat<GaussianForm>| -> GaussianForm {
        let mut acc = GaussianForm::zero(n);
        for i in 0..m.rows {
            if let Some(c) = m.get(i, i) {
                let neg = n % 2 == 0 && rep.par[i] == 1;
                acc = if neg { acc.sub(c) } else { acc.add(c) };
            }
        }
        acc
    };
    if n % 2 == 0 {
        return Ok(TnChain::even(trace(&heat)));
    }
    // ch = −√(2i) ♮ tr(e^{−D^{⊙2}} 𝐝Q_λ) = Σ_ν ♮(−√(2i)√λ tr(E γ^ν)) 𝐝x_ν
    let coeff = -(sqrt_2i::<Sym>() * Sym::sqrt_lambda());
    let pairs = gamma_forms.iter().enumerate().map(|(nu, g)| (trace(&heat.mul(g)).scale(&coeff), GaussianForm::coordinate(n, nu))).collect();
    Ok(TnChain::odd(n, pairs))
}

/// `(−1)ⁿ [n/2]! / (n! (2πi)^{n/2})`.
pub fn fundamental_coefficient(n: usize) -> Sym {
    let two_pi_i = two_i_lambda_pow(n) * Sym::monomial(Gaussian::one(), n as i32, -(n as i32));
    let c = factorial(n / 2) * (factorial(n) * two_pi_i).inv().expect("monomial");
    if n % 2 == 1 {
        -c
    } else {
        c
    }
}

/// The fundamental-class cocycle `χ̂ⁿ = (−1)ⁿ [n/2]!/(n!(2πi)^{n/2}) [ℝⁿ]` on
/// `X(Tₙ)`: `∫ x` on the even part for even `n`, `Σ ∫ x ∧ dy` on the odd
/// part for odd `n`.
pub fn fundamental_cocycle(n: usize, chain: &TnChain) -> Result<Sym> {
    let raw = if n % 2 == 0 {
        if chain.even.dim() != n {
            return Err(Error::DimensionMismatch("chain lives on a different ℝⁿ".into()));
        }
        chain.even.integrate_top()?
    } else {
        let mut acc = Sym::zero();
        for (x, y) in &chain.odd {
            acc = acc + x.wedge(&y.d())?.integrate_top()?;
        }
        acc
    };
    Ok(raw * fundamental_coefficient(n))
}

/// `⟨ch(βₙ), ch(Dirac)⟩`, computed along the Fedosov-exponential route.
pub fn pair_bott_dirac(n: usize) -> Result<Sym> {
    fundamental_cocycle(n, &bott_chern(n, BottMethod::FedosovExp)?)
}

/// Both routes and their pairings, for reports.
pub fn pair_bott_dirac_both(n: usize) -> Result<(Sym, Sym, bool)> {
    let closed = bott_chern(n, BottMethod::ClosedForm)?;
    let fed = bott_chern(n, BottMethod::FedosovExp)?;
    let agree = closed.normalized() == fed.normalized();
    Ok((fundamental_cocycle(n, &closed)?, fundamental_cocycle(n, &fed)?, agree))
}
