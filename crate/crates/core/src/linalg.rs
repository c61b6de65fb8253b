//! Linear-algebra utilities shared across modules: canonical reduction modulo
//! a subspace, rational polynomials, and sparse graded matrices over a
//! differential graded coefficient ring.

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;

use crate::scalar::{Field, Gaussian, Rat, Sym};

// ---------------------------------------------------------------------------
// Reduction modulo a subspace.

/// A subspace of a coordinate space indexed by `K`, kept in reduced echelon
/// form with the largest key of each basis vector as its pivot. Reducing a
/// vector against it gives a canonical representative of its class in the
/// quotient.
#[derive(Debug, Clone)]
pub struct Subspace<K: Ord + Clone, F: Field> {
    pivots: BTreeMap<K, BTreeMap<K, F>>,
}

impl<K: Ord + Clone, F: Field> Default for Subspace<K, F> {
    fn default() -> Self {
        Subspace { pivots: BTreeMap::new() }
    }
}

impl<K: Ord + Clone, F: Field> Subspace<K, F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Canonical representative of `v` modulo the subspace.
    pub fn reduce(&self, v: &BTreeMap<K, F>) -> BTreeMap<K, F> {
        let mut work = v.clone();
        let mut out = BTreeMap::new();
        while let Some((k, c)) = work.pop_last() {
            if c.negligible() {
                continue;
            }
            match self.pivots.get(&k) {
                Some(b) => {
                    for (kk, bc) in b.range(..k.clone()) {
                        let e = work.entry(kk.clone()).or_insert_with(F::zero);
                        *e = e.clone() - c.clone() * bc.clone();
                    }
                }
                None => {
                    out.insert(k, c);
                }
            }
        }
        out
    }

    /// Add `v` to the spanning set; returns whether the dimension grew.
    pub fn insert(&mut self, v: &BTreeMap<K, F>) -> bool {
        let r = self.reduce(v);
        let Some((pk, pc)) = r.last_key_value() else {
            return false;
        };
        let pk = pk.clone();
        let inv = pc.inv().expect("pivot of a reduced vector is invertible");
        let normalized: BTreeMap<K, F> = r.into_iter().map(|(k, c)| (k, c * inv.clone())).collect();
        // keep the basis fully reduced so that `reduce` needs one pass per key
        for b in self.pivots.values_mut() {
            if let Some(c) = b.get(&pk).cloned() {
                for (k, nc) in &normalized {
                    let e = b.entry(k.clone()).or_insert_with(F::zero);
                    *e = e.clone() - c.clone() * nc.clone();
                }
                b.retain(|_, x| !x.negligible());
            }
        }
        self.pivots.insert(pk, normalized);
        true
    }

    pub fn contains(&self, v: &BTreeMap<K, F>) -> bool {
        self.reduce(v).is_empty()
    }
}

/// Rank of a dense matrix (rows of coordinates).
pub fn rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let mut s: Subspace<usize, F> = Subspace::new();
    for r in rows {
        let v: BTreeMap<usize, F> = r.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k, c.clone())).collect();
        s.insert(&v);
    }
    s.dim()
}

// ---------------------------------------------------------------------------
// Polynomials with rational coefficients.

/// Dense polynomial, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Rat>);

impl Poly {
    pub fn new(mut c: Vec<Rat>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }
    pub fn one() -> Poly {
        Poly(vec![Rat::int(1)])
    }
    /// `x^n - 1`.
    pub fn x_pow_minus_one(n: usize) -> Poly {
        let mut c = vec![Rat::int(0); n + 1];
        c[0] = Rat::int(-1);
        c[n] = c[n].clone() + Rat::int(1);
        Poly::new(c)
    }
    /// `x - r`.
    pub fn linear(r: i64) -> Poly {
        Poly::new(vec![Rat::int(-r), Rat::int(1)])
    }
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(vec![]);
        }
        let mut c = vec![Rat::int(0); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        Poly::new(c)
    }
    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let c = (0..n)
            .map(|k| {
                let a = self.0.get(k).cloned().unwrap_or(Rat::int(0));
                let b = o.0.get(k).cloned().unwrap_or(Rat::int(0));
                a - b
            })
            .collect();
        Poly::new(c)
    }
    /// Quotient and remainder.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = d.0[dd].recip().expect("nonzero leading coefficient");
        let mut r = self.0.clone();
        let mut q = vec![Rat::int(0); self.0.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let c = &r[top] * &lead_inv;
            let shift = top - dd;
            q[shift] = c.clone();
            for (k, dk) in d.0.iter().enumerate() {
                r[shift + k] = r[shift + k].clone() - &c * dk;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        (Poly::new(q), Poly::new(r))
    }
    /// Extended Euclid: `(g, u, v)` with `u·a + v·b = g`, `g` monic.
    pub fn ext_gcd(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly(vec![]));
        let (mut t0, mut t1) = (Poly(vec![]), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        let lead = r0.0.last().cloned().unwrap_or(Rat::int(1)).recip().unwrap_or(Rat::int(1));
        let sc = |p: &Poly| Poly::new(p.0.iter().map(|c| c * &lead).collect());
        (sc(&r0), sc(&s0), sc(&t0))
    }
    pub fn eval_rat(&self, x: &Rat) -> Rat {
        self.0.iter().rev().fold(Rat::int(0), |acc, c| &(&acc * x) + c)
    }
}

// ---------------------------------------------------------------------------
// Differential graded coefficient rings.

/// A coefficient ring with an odd derivation. Elements may be inhomogeneous;
/// `twist` multiplies the degree-`k` part by `(-1)^k`.
pub trait DgRing: Clone + fmt::Debug {
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn d(&self) -> Self;
    fn twist(&self) -> Self;
    fn scale_rat(&self, r: &Rat) -> Self;
    /// The component of form degree `k`.
    fn form_part(&self, k: usize) -> Self;
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

macro_rules! field_dg {
    ($($t:ty),*) => {$(
        impl DgRing for $t {
            fn add(&self, o: &Self) -> Self { self.clone() + o.clone() }
            fn mul(&self, o: &Self) -> Self { self.clone() * o.clone() }
            fn neg(&self) -> Self { -self.clone() }
            fn is_zero(&self) -> bool { Field::is_zero(self) }
            fn d(&self) -> Self { <$t as Field>::zero() }
            fn twist(&self) -> Self { self.clone() }
            fn scale_rat(&self, r: &Rat) -> Self { self.clone() * <$t as Field>::from_rat(r) }
            fn form_part(&self, k: usize) -> Self { if k == 0 { self.clone() } else { <$t as Field>::zero() } }
        }
    )*};
}
field_dg!(Gaussian, Sym, Complex64);

// ---------------------------------------------------------------------------
// Sparse graded matrices.

/// A matrix over a DG coefficient ring whose rows and columns carry a parity.
/// As an operator on `H ⊗ R` (with `H` the graded column space and `R` the
/// coefficient ring) the entry `m_ij` sends `h_j ⊗ r` to `h_i ⊗ m_ij r`;
/// composition is the ordinary matrix product and the differential acts by
/// `(dM)_ij = (-1)^{|i|} d(m_ij)`.
#[derive(Clone, PartialEq)]
pub struct SMat<C> {
    pub rows: usize,
    pub cols: usize,
    pub row_par: Vec<u8>,
    pub col_par: Vec<u8>,
    pub e: BTreeMap<(usize, usize), C>,
}

impl<C: fmt::Debug> fmt::Debug for SMat<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SMat{}x{}{:?}", self.rows, self.cols, self.e)
    }
}

impl<C: DgRing> SMat<C> {
    pub fn zeros(row_par: Vec<u8>, col_par: Vec<u8>) -> Self {
        SMat { rows: row_par.len(), cols: col_par.len(), row_par, col_par, e: BTreeMap::new() }
    }

    pub fn square_zeros(par: &[u8]) -> Self {
        Self::zeros(par.to_vec(), par.to_vec())
    }

    pub fn identity(par: &[u8], one: C) -> Self {
        let mut m = Self::square_zeros(par);
        for i in 0..par.len() {
            m.e.insert((i, i), one.clone());
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&C> {
        self.e.get(&(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        if c.is_zero() {
            self.e.remove(&(i, j));
        } else {
            self.e.insert((i, j), c);
        }
    }

    pub fn add_entry(&mut self, i: usize, j: usize, c: &C) {
        let v = match self.e.get(&(i, j)) {
            Some(x) => x.add(c),
            None => c.clone(),
        };
        self.set(i, j, v);
    }

    pub fn is_zero(&self) -> bool {
        self.e.values().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.clone();
        for (&(i, j), c) in &o.e {
            m.add_entry(i, j, c);
        }
        m
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut m = Self::zeros(self.row_par.clone(), self.col_par.clone());
        for (&(i, j), c) in &self.e {
            m.set(i, j, f(c));
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix shape mismatch");
        let mut by_row: Vec<Vec<(usize, &C)>> = vec![Vec::new(); o.rows];
        for (&(j, k), c) in &o.e {
            by_row[j].push((k, c));
        }
        let mut m = Self::zeros(self.row_par.clone(), o.col_par.clone());
        for (&(i, j), a) in &self.e {
            for (k, b) in &by_row[j] {
                m.add_entry(i, *k, &a.mul(b));
            }
        }
        m
    }

    /// Multiply every entry on the left by a coefficient that commutes with
    /// the row space (degree-zero scalars or scalar functions).
    pub fn scale(&self, c: &C) -> Self {
        self.map(|x| c.mul(x))
    }

    pub fn scale_rat(&self, r: &Rat) -> Self {
        self.map(|x| x.scale_rat(r))
    }

    pub fn d(&self) -> Self {
        let mut m = Self::zeros(self.row_par.clone(), self.col_par.clone());
        for (&(i, j), c) in &self.e {
            let dc = c.d();
            m.set(i, j, if self.row_par[i] == 1 { dc.neg() } else { dc });
        }
        m
    }

    /// The graded trace for an even pairing: on a diagonal entry of form
    /// degree `k` in row `i` the sign is `(-1)^{|i|(k+1)}`. For degree-zero
    /// entries this is the supertrace. `None` when every diagonal entry vanishes.
    pub fn trace_even(&self) -> Option<C> {
        let mut acc: Option<C> = None;
        for i in 0..self.rows.min(self.cols) {
            if let Some(c) = self.e.get(&(i, i)) {
                let t = if self.row_par[i] == 1 { c.twist().neg() } else { c.clone() };
                acc = Some(match acc {
                    Some(a) => a.add(&t),
                    None => t,
                });
            }
        }
        acc
    }

    /// Ordinary trace, ignoring the grading.
    pub fn trace(&self) -> Option<C> {
        let mut acc: Option<C> = None;
        for i in 0..self.rows.min(self.cols) {
            if let Some(c) = self.e.get(&(i, i)) {
                acc = Some(match acc {
                    Some(a) => a.add(c),
                    None => c.clone(),
                });
            }
        }
        acc
    }

    /// Trace of the block from the first half of the columns to the second
    /// half of the rows, the `y`-part of `x + εy` in the doubled picture.
    pub fn trace_lower_left(&self) -> Option<C> {
        let k = self.rows / 2;
        let mut acc: Option<C> = None;
        for i in 0..k {
            if let Some(c) = self.e.get(&(k + i, i)) {
                acc = Some(match acc {
                    Some(a) => a.add(c),
                    None => c.clone(),
                });
            }
        }
        acc
    }

    /// Parity of a matrix with degree-zero entries: `Some(p)` when every
    /// nonzero entry has `|i| + |j| = p`.
    pub fn block_parity(&self) -> Option<u8> {
        let mut p = None;
        for &(i, j) in self.e.keys() {
            let q = (self.row_par[i] + self.col_par[j]) % 2;
            match p {
                None => p = Some(q),
                Some(x) if x != q => return None,
                _ => {}
            }
        }
        Some(p.unwrap_or(0))
    }

    /// Graded commutator `[self, o] = self·o - (-1)^{|self||o|} o·self` for
    /// homogeneous block parities.
    pub fn supercommutator(&self, o: &Self) -> Self {
        let a = self.block_parity().unwrap_or(0);
        let b = o.block_parity().unwrap_or(0);
        let ab = self.mul(o);
        let ba = o.mul(self);
        if a * b == 1 {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    pub fn map_to<D: DgRing>(&self, f: impl Fn(&C) -> D) -> SMat<D> {
        let mut m = SMat::zeros(self.row_par.clone(), self.col_par.clone());
        for (&(i, j), c) in &self.e {
            m.set(i, j, f(c));
        }
        m
    }
}

impl<F: Field + DgRing> SMat<F> {
    pub fn from_dense(row_par: Vec<u8>, col_par: Vec<u8>, rows: &[Vec<F>]) -> Self {
        let mut m = Self::zeros(row_par, col_par);
        for (i, r) in rows.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                m.set(i, j, c.clone());
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let mut d = vec![vec![F::zero(); self.cols]; self.rows];
        for (&(i, j), c) in &self.e {
            d[i][j] = c.clone();
        }
        d
    }

    /// The supertrace of a matrix with scalar entries.
    pub fn supertrace(&self) -> F {
        self.trace_even().unwrap_or_else(F::zero)
    }
}

/// Block parity vector `0^p 1^q`.
pub fn block_parities(p: usize, q: usize) -> Vec<u8> {
    let mut v = vec![0u8; p];
    v.extend(std::iter::repeat(1u8).take(q));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(entries: &[(usize, i64)]) -> BTreeMap<usize, Gaussian> {
        entries.iter().map(|(k, c)| (*k, Gaussian::from_i64(*c))).collect()
    }

    #[test]
    fn reduction_is_canonical() {
        let mut s = Subspace::new();
        s.insert(&v(&[(0, 1), (2, 1)]));
        s.insert(&v(&[(1, 1), (2, 2)]));
        let a = s.reduce(&v(&[(2, 1)]));
        let b = s.reduce(&v(&[(0, -1)]));
        assert_eq!(a, b);
        assert!(s.contains(&v(&[(0, 2), (1, -1)])));
        assert_eq!(rank(&[vec![Gaussian::from_i64(1), Gaussian::from_i64(2)], vec![Gaussian::from_i64(2), Gaussian::from_i64(4)]]), 1);
    }

    #[test]
    fn polynomial_euclid() {
        // (x-1)^2 (x+1) and x^2 + x + 1 are coprime
        let f = Poly::linear(1).mul(&Poly::linear(1)).mul(&Poly::linear(-1));
        let g = Poly::new(vec![Rat::int(1), Rat::int(1), Rat::int(1)]);
        let (gcd, u, w) = Poly::ext_gcd(&f, &g);
        assert_eq!(gcd, Poly::one());
        assert_eq!(u.mul(&f).sub(&w.mul(&g).mul(&Poly(vec![Rat::int(-1)]))), Poly::one());
        let (q, r) = Poly::x_pow_minus_one(3).divrem(&Poly::linear(1));
        assert!(r.is_zero());
        assert_eq!(q, g);
    }

    #[test]
    fn supertrace_of_gamma_product() {
        // C_2 spinor rep: γ1 = σx, γ2 = σy, Γ = -i γ1 γ2 = σz; Str(X) = tr(Γ X).
        let z = Gaussian::zero();
        let o = Gaussian::one();
        let i = Gaussian::imag_unit();
        let par = vec![0u8, 1];
        let g1 = SMat::from_dense(par.clone(), par.clone(), &[vec![z.clone(), o.clone()], vec![o.clone(), z.clone()]]);
        let g2 = SMat::from_dense(par.clone(), par.clone(), &[vec![z.clone(), -i.clone()], vec![i.clone(), z.clone()]]);
        let gamma = g1.mul(&g2).scale(&(-i.clone()));
        assert_eq!(gamma, SMat::from_dense(par.clone(), par.clone(), &[vec![o.clone(), z.clone()], vec![z.clone(), -o.clone()]]));
        let p = g1.mul(&g2);
        assert_eq!(p.supertrace(), Gaussian::new(Rat::int(0), Rat::int(2)));
        assert_eq!(gamma.mul(&p).trace().unwrap(), Gaussian::new(Rat::int(0), Rat::int(2)));
        assert_eq!(g1.block_parity(), Some(1));
        assert_eq!(gamma.block_parity(), Some(0));
    }
}
