//! Problem files: named algebras, triples, idempotents and Dirac paths, plus
//! run parameters. References between entries are resolved eagerly, so a
//! loaded problem is always consistent.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraJson, FiniteAlgebra};
use crate::fixtures::index_fixtures;
use crate::forms::NCForm;
use crate::scalar::{Gaussian, Mode};
use crate::spectral::{matrix_from_json, CMat, DiracPath, MatrixJson, SpectralTriple, TripleJson};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub algebras: BTreeMap<String, AlgebraJson>,
    #[serde(default)]
    pub triples: BTreeMap<String, TripleEntry>,
    #[serde(default)]
    pub idempotents: BTreeMap<String, IdempotentEntry>,
    #[serde(default)]
    pub paths: BTreeMap<String, PathEntry>,
    #[serde(default)]
    pub trunc: Option<usize>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleEntry {
    pub algebra: String,
    #[serde(flatten)]
    pub triple: TripleJson,
}

/// An element `e = e²` of an algebra, optionally paired against a triple with
/// a known index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdempotentEntry {
    pub algebra: String,
    /// Text notation, e.g. `"E11"`.
    pub element: String,
    #[serde(default)]
    pub triple: Option<String>,
    #[serde(default)]
    pub expected_index: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathEntry {
    /// From the triple's operator to `d1`.
    Linear { triple: String, d1: MatrixJson, chain: String },
    /// Flatten the triple's operator against the projection `ρ(idempotent)`.
    Flattening { triple: String, idempotent: String, chain: String },
}

impl PartialEq for AlgebraJson {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.basis == o.basis && self.constants == o.constants && self.unit == o.unit && self.grading == o.grading
    }
}

/// A problem with every reference resolved to a built object.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: ProblemFile,
    pub algebras: BTreeMap<String, Arc<FiniteAlgebra<Gaussian>>>,
    pub triples: BTreeMap<String, SpectralTriple>,
    pub idempotents: BTreeMap<String, (String, NCForm<Complex64>)>,
    pub paths: BTreeMap<String, (String, DiracPath, NCForm<Complex64>)>,
}

/// Names that always resolve: `C`, `C1`, `M2`, and `fixture0…` for the
/// index-pairing fixtures (triples over `C`, idempotent `e`).
pub fn builtin_algebras() -> BTreeMap<String, Arc<FiniteAlgebra<Gaussian>>> {
    [("C", FiniteAlgebra::complex_numbers()), ("C1", FiniteAlgebra::clifford1()), ("M2", FiniteAlgebra::matrix_units(2))]
        .into_iter()
        .map(|(k, v)| (k.to_string(), Arc::new(v)))
        .collect()
}

fn lower(alg: &FiniteAlgebra<Gaussian>) -> Arc<FiniteAlgebra<Complex64>> {
    Arc::new(alg.map_field(|g| g.to_c64()))
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let p: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(v) = p.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::Config(format!("schema version {v} is not supported (expected {SCHEMA_VERSION})")));
            }
        }
        if p.tol.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::Config("tol must be non-negative".into()));
        }
        Ok(p)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let mut algebras = builtin_algebras();
        for (name, j) in &self.algebras {
            if algebras.contains_key(name) {
                return Err(Error::Config(format!("algebra name '{name}' shadows a built-in")));
            }
            algebras.insert(name.clone(), Arc::new(j.build()?));
        }
        let alg = |name: &str| algebras.get(name).cloned().ok_or_else(|| Error::Resolution(format!("unknown algebra '{name}'")));

        let mut triples = BTreeMap::new();
        for (i, f) in index_fixtures().iter().enumerate() {
            triples.insert(format!("fixture{i}"), f.triple()?);
        }
        for (name, t) in &self.triples {
            if triples.contains_key(name) {
                return Err(Error::Config(format!("triple name '{name}' shadows a built-in")));
            }
            triples.insert(name.clone(), t.triple.build(&lower(&*alg(&t.algebra)?))?);
        }
        let triple = |name: &str| triples.get(name).cloned().ok_or_else(|| Error::Resolution(format!("unknown triple '{name}'")));

        let mut idempotents = BTreeMap::new();
        for (name, e) in &self.idempotents {
            let a = lower(&*alg(&e.algebra)?);
            let x = NCForm::parse(&a, 0, &e.element)?;
            if x.mul(&x)?.sub(&x)?.terms().values().any(|c| c.norm() > 1e-12) {
                return Err(Error::NotIdempotent);
            }
            if let Some(t) = &e.triple {
                let t = triple(t)?;
                if t.source().labels() != a.labels() {
                    return Err(Error::Resolution(format!("idempotent '{name}' and its triple use different algebras")));
                }
            }
            idempotents.insert(name.clone(), (e.algebra.clone(), x));
        }

        let mut paths = BTreeMap::new();
        for (name, p) in &self.paths {
            let (tname, chain) = match p {
                PathEntry::Linear { triple, chain, .. } | PathEntry::Flattening { triple, chain, .. } => (triple, chain),
            };
            let t = triple(tname)?;
            let c = NCForm::parse(t.source(), 6, chain)?;
            let path = match p {
                PathEntry::Linear { d1, .. } => DiracPath::Linear { d0: t.dirac().clone(), d1: matrix_from_json(d1, t.dim())? },
                PathEntry::Flattening { idempotent, .. } => {
                    let (_, e) = idempotents.get(idempotent).ok_or_else(|| Error::Resolution(format!("unknown idempotent '{idempotent}'")))?;
                    let p = t.rho_element(&e.with_trunc(0))?.as_scalar().ok_or_else(|| Error::MalformedTriple("projection must be scalar".into()))?;
                    DiracPath::Flattening { d: t.dirac().clone(), p }
                }
            };
            paths.insert(name.clone(), (tname.clone(), path, c));
        }
        Ok(Resolved { file: self.clone(), algebras, triples, idempotents, paths })
    }
}

impl Resolved {
    pub fn builtin() -> Self {
        ProblemFile::default().resolve().expect("built-in names resolve")
    }

    pub fn triple(&self, name: &str) -> Result<&SpectralTriple> {
        self.triples.get(name).ok_or_else(|| Error::Resolution(format!("unknown triple '{name}'")))
    }

    pub fn algebra(&self, name: &str) -> Result<&Arc<FiniteAlgebra<Gaussian>>> {
        self.algebras.get(name).ok_or_else(|| Error::Resolution(format!("unknown algebra '{name}'")))
    }
}

/// Projection matrix of an element under a scalar triple.
pub fn scalar_image(t: &SpectralTriple, x: &NCForm<Complex64>) -> Result<CMat> {
    t.rho_element(&x.with_trunc(0))?.as_scalar().ok_or_else(|| Error::MalformedTriple("element has form-valued image".into()))
}
