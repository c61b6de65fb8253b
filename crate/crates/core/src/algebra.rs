//! Finite-dimensional associative algebras given by structure constants,
//! plus the free (tensor) algebra on the basis of such an algebra.

use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Field, Gaussian, Rat};

/// An algebra presented by a basis and a product of basis elements.
pub trait BasisAlgebra: fmt::Debug + PartialEq + Send + Sync + 'static {
    type Idx: Clone + Ord + Hash + fmt::Debug + Send + Sync;
    type F: Field;
    /// `e_a · e_b` as a sparse combination of basis elements.
    fn mul_basis(&self, a: &Self::Idx, b: &Self::Idx) -> Vec<(Self::Idx, Self::F)>;
    fn label(&self, i: &Self::Idx) -> String;
}

/// An associative algebra over `F` with dense structure constants
/// `e_i e_j = Σ_k c[i][j][k] e_k`.
#[derive(Clone, PartialEq)]
pub struct FiniteAlgebra<F: Field> {
    dim: usize,
    labels: Vec<String>,
    table: Vec<Vec<(usize, F)>>,
    unit: Option<usize>,
    grading: Option<Vec<u8>>,
}

impl<F: Field> fmt::Debug for FiniteAlgebra<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteAlgebra(dim={}, basis={:?})", self.dim, self.labels)
    }
}

impl<F: Field> FiniteAlgebra<F> {
    /// Build from sparse structure constants `(i, j, k, c)`; repeated entries add.
    /// Associativity and the unit are checked exhaustively.
    pub fn new(
        labels: Vec<String>,
        constants: Vec<(usize, usize, usize, F)>,
        unit: Option<usize>,
        grading: Option<Vec<u8>>,
    ) -> Result<Self> {
        let dim = labels.len();
        let mut dense = vec![F::zero(); dim * dim * dim];
        for (i, j, k, c) in constants {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::DimensionMismatch(format!("structure constant index ({i},{j},{k}) out of range {dim}")));
            }
            let slot = &mut dense[(i * dim + j) * dim + k];
            *slot = slot.clone() + c;
        }
        let mut table = Vec::with_capacity(dim * dim);
        for ij in 0..dim * dim {
            let row: Vec<(usize, F)> = (0..dim)
                .filter_map(|k| {
                    let c = &dense[ij * dim + k];
                    (!c.is_zero()).then(|| (k, c.clone()))
                })
                .collect();
            table.push(row);
        }
        if let Some(g) = &grading {
            if g.len() != dim || g.iter().any(|&p| p > 1) {
                return Err(Error::DimensionMismatch("grading must list 0 or 1 for every basis element".into()));
            }
        }
        let alg = FiniteAlgebra { dim, labels, table, unit, grading };
        alg.check_associative()?;
        if let Some(u) = unit {
            alg.check_unit(u)?;
        }
        alg.check_grading()?;
        Ok(alg)
    }

    fn check_associative(&self) -> Result<()> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let mut lhs = vec![F::zero(); self.dim];
                    for (m, c) in self.mul(i, j) {
                        for (n, c2) in self.mul(*m, k) {
                            lhs[*n] = lhs[*n].clone() + c.clone() * c2.clone();
                        }
                    }
                    for (m, c) in self.mul(j, k) {
                        for (n, c2) in self.mul(i, *m) {
                            lhs[*n] = lhs[*n].clone() - c.clone() * c2.clone();
                        }
                    }
                    if lhs.iter().any(|x| !x.negligible()) {
                        return Err(Error::NonAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_unit(&self, u: usize) -> Result<()> {
        if u >= self.dim {
            return Err(Error::BadUnit(u));
        }
        for i in 0..self.dim {
            let is_e_i = |row: &[(usize, F)]| row.len() == 1 && row[0].0 == i && row[0].1 == F::one();
            if !is_e_i(self.mul(u, i)) || !is_e_i(self.mul(i, u)) {
                return Err(Error::BadUnit(u));
            }
        }
        Ok(())
    }

    fn check_grading(&self) -> Result<()> {
        if let Some(g) = &self.grading {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    for (k, _) in self.mul(i, j) {
                        if g[*k] != (g[i] + g[j]) % 2 {
                            return Err(Error::ParityError(format!(
                                "product of {} and {} leaves the grading",
                                self.labels[i], self.labels[j]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn unit(&self) -> Option<usize> {
        self.unit
    }
    pub fn grading(&self) -> Option<&[u8]> {
        self.grading.as_deref()
    }

    /// Sparse row of `e_i e_j`.
    #[inline]
    pub fn mul(&self, i: usize, j: usize) -> &[(usize, F)] {
        &self.table[i * self.dim + j]
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> F {
        self.mul(i, j).iter().find(|(m, _)| *m == k).map(|(_, c)| c.clone()).unwrap_or_else(F::zero)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Product of two coordinate vectors.
    pub fn mul_elems(&self, x: &[F], y: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in y.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                for (k, c) in self.mul(i, j) {
                    out[*k] = out[*k].clone() + a.clone() * b.clone() * c.clone();
                }
            }
        }
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim];
        v[i] = F::one();
        v
    }

    /// Adjoin a new unit, even when one already exists. The new unit is the
    /// last basis element, has even parity and is labelled `1`.
    pub fn unitalize(&self) -> Self {
        let n = self.dim;
        let mut labels = self.labels.clone();
        labels.push("1".into());
        let mut table = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                let row = if i == n {
                    vec![(j, F::one())]
                } else if j == n {
                    vec![(i, F::one())]
                } else {
                    self.mul(i, j).to_vec()
                };
                table.push(row);
            }
        }
        let grading = self.grading.as_ref().map(|g| {
            let mut g = g.clone();
            g.push(0);
            g
        });
        FiniteAlgebra { dim: n + 1, labels, table, unit: Some(n), grading }
    }

    /// Change of coefficient field along `f`.
    pub fn map_field<G: Field>(&self, f: impl Fn(&F) -> G) -> FiniteAlgebra<G> {
        FiniteAlgebra {
            dim: self.dim,
            labels: self.labels.clone(),
            table: self.table.iter().map(|row| row.iter().map(|(k, c)| (*k, f(c))).collect()).collect(),
            unit: self.unit,
            grading: self.grading.clone(),
        }
    }

    /// The same algebra with the grading forgotten.
    pub fn ungraded(&self) -> Self {
        let mut a = self.clone();
        a.grading = None;
        a
    }

    // --- standard fixtures -------------------------------------------------

    /// The complex numbers, basis `{e}` with `e² = e` the unit.
    pub fn complex_numbers() -> Self {
        Self::new(vec!["e".into()], vec![(0, 0, 0, F::one())], Some(0), None).expect("valid")
    }

    /// `M_n` on matrix units `E_ij`, ordered row-major.
    pub fn matrix_units(n: usize) -> Self {
        let mut labels = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                labels.push(format!("E{i}{j}"));
            }
        }
        let mut consts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    consts.push((i * n + j, j * n + l, i * n + l, F::one()));
                }
            }
        }
        Self::new(labels, consts, None, None).expect("valid")
    }

    /// The first Clifford algebra: basis `{1, ε}`, `ε² = 1`, `ε` odd.
    pub fn clifford1() -> Self {
        Self::new(
            vec!["1".into(), "eps".into()],
            vec![(0, 0, 0, F::one()), (0, 1, 1, F::one()), (1, 0, 1, F::one()), (1, 1, 0, F::one())],
            Some(0),
            Some(vec![0, 1]),
        )
        .expect("valid")
    }

    /// `ℂⁿ` with orthogonal idempotents `p_i`.
    pub fn diagonal(n: usize) -> Self {
        let labels = (1..=n).map(|i| format!("p{i}")).collect();
        let consts = (0..n).map(|i| (i, i, i, F::one())).collect();
        Self::new(labels, consts, None, None).expect("valid")
    }

    /// The non-unital algebra `x ℂ[x] / (x^{k+1})`, basis `x, …, x^k`.
    pub fn truncated_polynomials(k: usize) -> Self {
        let labels = (1..=k).map(|i| if i == 1 { "x".to_string() } else { format!("x{i}") }).collect();
        let mut consts = Vec::new();
        for i in 1..=k {
            for j in 1..=k {
                if i + j <= k {
                    consts.push((i - 1, j - 1, i + j - 1, F::one()));
                }
            }
        }
        Self::new(labels, consts, None, None).expect("valid")
    }
}

impl<F: Field> BasisAlgebra for FiniteAlgebra<F> {
    type Idx = u16;
    type F = F;
    fn mul_basis(&self, a: &u16, b: &u16) -> Vec<(u16, F)> {
        self.mul(*a as usize, *b as usize).iter().map(|(k, c)| (*k as u16, c.clone())).collect()
    }
    fn label(&self, i: &u16) -> String {
        self.labels[*i as usize].clone()
    }
}

// ---------------------------------------------------------------------------
// JSON exchange format.

/// `{"dim":n,"basis":[...],"constants":[[i,j,k,re_num,re_den,im_num,im_den],...],
///   "unit":idx|null,"grading":[0|1,...]|null}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub dim: usize,
    pub basis: Vec<String>,
    pub constants: Vec<[i64; 7]>,
    #[serde(default)]
    pub unit: Option<usize>,
    #[serde(default)]
    pub grading: Option<Vec<u8>>,
}

impl AlgebraJson {
    pub fn build(&self) -> Result<FiniteAlgebra<Gaussian>> {
        if self.basis.len() != self.dim {
            return Err(Error::DimensionMismatch(format!("dim {} but {} basis labels", self.dim, self.basis.len())));
        }
        let mut consts = Vec::with_capacity(self.constants.len());
        for c in &self.constants {
            if c[4] == 0 || c[6] == 0 {
                return Err(Error::Parse("zero denominator in structure constant".into()));
            }
            if c[0] < 0 || c[1] < 0 || c[2] < 0 {
                return Err(Error::DimensionMismatch("negative structure constant index".into()));
            }
            consts.push((
                c[0] as usize,
                c[1] as usize,
                c[2] as usize,
                Gaussian::new(Rat::new(c[3], c[4]), Rat::new(c[5], c[6])),
            ));
        }
        FiniteAlgebra::new(self.basis.clone(), consts, self.unit, self.grading.clone())
    }

    pub fn from_algebra(a: &FiniteAlgebra<Gaussian>) -> Result<Self> {
        let mut constants = Vec::new();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                for (k, c) in a.mul(i, j) {
                    let (rn, rd) = c.re.as_i64_pair().ok_or_else(|| Error::Parse("constant too large".into()))?;
                    let (inum, iden) = c.im.as_i64_pair().ok_or_else(|| Error::Parse("constant too large".into()))?;
                    constants.push([i as i64, j as i64, *k as i64, rn, rd, inum, iden]);
                }
            }
        }
        Ok(AlgebraJson {
            dim: a.dim(),
            basis: a.labels().to_vec(),
            constants,
            unit: a.unit(),
            grading: a.grading().map(|g| g.to_vec()),
        })
    }
}

pub fn algebra_from_json(s: &str) -> Result<FiniteAlgebra<Gaussian>> {
    let j: AlgebraJson = serde_json::from_str(s)?;
    j.build()
}

pub fn algebra_to_json(a: &FiniteAlgebra<Gaussian>) -> Result<String> {
    Ok(serde_json::to_string(&AlgebraJson::from_algebra(a)?)?)
}

// ---------------------------------------------------------------------------
// Homomorphisms.

/// A linear map between finite algebras given by the images of basis vectors,
/// verified to be multiplicative.
#[derive(Debug, Clone)]
pub struct AlgebraHom<F: Field> {
    pub src: Arc<FiniteAlgebra<F>>,
    pub dst: Arc<FiniteAlgebra<F>>,
    images: Vec<Vec<F>>,
}

impl<F: Field> AlgebraHom<F> {
    pub fn new(src: Arc<FiniteAlgebra<F>>, dst: Arc<FiniteAlgebra<F>>, images: Vec<Vec<F>>) -> Result<Self> {
        if images.len() != src.dim() || images.iter().any(|v| v.len() != dst.dim()) {
            return Err(Error::DimensionMismatch("homomorphism image table has the wrong shape".into()));
        }
        let h = AlgebraHom { src, dst, images };
        for i in 0..h.src.dim() {
            for j in 0..h.src.dim() {
                let mut lhs = vec![F::zero(); h.dst.dim()];
                for (k, c) in h.src.mul(i, j) {
                    for (m, v) in h.images[*k].iter().enumerate() {
                        lhs[m] = lhs[m].clone() + c.clone() * v.clone();
                    }
                }
                let rhs = h.dst.mul_elems(&h.images[i], &h.images[j]);
                if lhs.iter().zip(&rhs).any(|(a, b)| !(a.clone() - b.clone()).negligible()) {
                    return Err(Error::NotAHomomorphism(i, j));
                }
            }
        }
        Ok(h)
    }

    pub fn image(&self, i: usize) -> &[F] {
        &self.images[i]
    }

    pub fn apply(&self, x: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dst.dim()];
        for (i, a) in x.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (m, v) in self.images[i].iter().enumerate() {
                out[m] = out[m].clone() + a.clone() * v.clone();
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// The free algebra on the basis of A.

/// A non-empty tensor word `a_1 ⊗ … ⊗ a_n` of basis indices of A.
pub type TensorWord = Vec<u16>;

/// The tensor algebra `TA = ⊕_{n≥1} A^{⊗n}`; basis words multiply by
/// concatenation, so the product carries no structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorAlgebra<F: Field> {
    base: Arc<FiniteAlgebra<F>>,
}

impl<F: Field> TensorAlgebra<F> {
    pub fn new(base: Arc<FiniteAlgebra<F>>) -> Self {
        TensorAlgebra { base }
    }
    pub fn base(&self) -> &Arc<FiniteAlgebra<F>> {
        &self.base
    }
}

impl<F: Field> BasisAlgebra for TensorAlgebra<F> {
    type Idx = TensorWord;
    type F = F;
    fn mul_basis(&self, a: &TensorWord, b: &TensorWord) -> Vec<(TensorWord, F)> {
        let mut w = Vec::with_capacity(a.len() + b.len());
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        vec![(w, F::one())]
    }
    fn label(&self, w: &TensorWord) -> String {
        let parts: Vec<&str> = w.iter().map(|i| self.base.labels()[*i as usize].as_str()).collect();
        if parts.len() == 1 {
            parts[0].to_string()
        } else {
            format!("({})", parts.join("⊗"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Alg = FiniteAlgebra<Gaussian>;

    #[test]
    fn fixtures_are_associative() {
        for a in [Alg::complex_numbers(), Alg::matrix_units(2), Alg::clifford1(), Alg::diagonal(3), Alg::truncated_polynomials(3)] {
            assert!(a.check_associative().is_ok());
        }
    }

    #[test]
    fn non_associative_constants_are_rejected() {
        // a·a = b, a·b = a, b·a = 0: (aa)a = ba = 0 but a(aa) = ab = a.
        let r = Alg::new(
            vec!["a".into(), "b".into()],
            vec![(0, 0, 1, Gaussian::one()), (0, 1, 0, Gaussian::one())],
            None,
            None,
        );
        assert!(matches!(r, Err(Error::NonAssociative(_, _, _))));
    }

    #[test]
    fn bad_unit_is_rejected() {
        let r = Alg::new(vec!["e".into()], vec![(0, 0, 0, Gaussian::from_i64(2))], Some(0), None);
        assert_eq!(r.unwrap_err(), Error::BadUnit(0));
    }

    #[test]
    fn unitalize_adds_even_unit_even_when_unital() {
        let c = Alg::complex_numbers();
        let ct = c.unitalize();
        assert_eq!(ct.dim(), 2);
        assert_eq!(ct.unit(), Some(1));
        assert_eq!(ct.mul(0, 0), &[(0, Gaussian::one())]);
        let cl = Alg::clifford1().unitalize();
        assert_eq!(cl.grading().unwrap(), &[0, 1, 0]);
    }

    #[test]
    fn json_round_trip() {
        let a = Alg::matrix_units(2);
        let s = algebra_to_json(&a).unwrap();
        let b = algebra_from_json(&s).unwrap();
        assert_eq!(a, b);
        let j = r#"{"dim":1,"basis":["e"],"constants":[[0,0,0,1,1,0,1]],"unit":0,"grading":null}"#;
        assert_eq!(algebra_from_json(j).unwrap(), Alg::complex_numbers());
    }

    #[test]
    fn homomorphism_check() {
        let c = Arc::new(Alg::complex_numbers());
        let m2 = Arc::new(Alg::matrix_units(2));
        // e -> E11 is multiplicative
        let ok = AlgebraHom::new(c.clone(), m2.clone(), vec![m2.basis_vector(0)]);
        assert!(ok.is_ok());
        // e -> E12 is not
        let bad = AlgebraHom::new(c, m2.clone(), vec![m2.basis_vector(1)]);
        assert!(matches!(bad, Err(Error::NotAHomomorphism(0, 0))));
    }
}
