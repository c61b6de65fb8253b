//! Single computations on a resolved problem, with JSON-serializable results.

use std::collections::BTreeMap;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bott::pair_bott_dirac_both;
use crate::fixtures::index_fixtures;
use crate::forms::{Form, FormJson, NCForm};
use crate::linalg::SMat;
use crate::problem::{Resolved, SCHEMA_VERSION};
use crate::scalar::Gaussian;
use crate::spectral::{ch_idempotent, fredholm_index, index_pairing, jlo, BivariantCocycle, Picture};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    ChIdempotent,
    Jlo,
    Chi,
    Pairing,
    Bott,
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| Error::Config(format!("unknown target '{s}'")))
    }
}

/// Target-specific arguments; which ones are required depends on the target.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeArgs {
    pub algebra: Option<String>,
    pub element: Option<String>,
    pub idempotent: Option<String>,
    pub triple: Option<String>,
    pub chain: Option<String>,
    pub trunc: Option<usize>,
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum ComputeValue {
    ChIdempotent { trunc: usize, x_complex: FormJson, bb: FormJson },
    Jlo { triple: String, chain: String, value: ComplexJson },
    Chi { triple: String, chain: String, even: FormJson, odd: FormJson },
    Pairing { triple: String, time: f64, value: ComplexJson, fredholm_index: Option<i64> },
    Bott { pairings: BTreeMap<String, String>, methods_agree: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeResult {
    pub schema_version: u32,
    #[serde(flatten)]
    pub value: ComputeValue,
}

fn need<'a>(x: &'a Option<String>, what: &str) -> Result<&'a str> {
    x.as_deref().ok_or_else(|| Error::Config(format!("missing argument --{what}")))
}

pub fn compute(problem: &Resolved, target: Target, args: &ComputeArgs) -> Result<ComputeResult> {
    let value = match target {
        Target::ChIdempotent => {
            let trunc = args.trunc.or(problem.file.trunc).unwrap_or(8);
            let (alg, text) = match &args.idempotent {
                Some(name) => {
                    let e = problem.file.idempotents.get(name).ok_or_else(|| Error::Resolution(format!("unknown idempotent '{name}'")))?;
                    (problem.algebra(&e.algebra)?.clone(), e.element.clone())
                }
                None => (problem.algebra(args.algebra.as_deref().unwrap_or("C"))?.clone(), args.element.clone().unwrap_or_else(|| "e".into())),
            };
            let e = NCForm::<Gaussian>::parse(&alg, trunc, &text)?;
            let mut m = SMat::square_zeros(&[0]);
            m.set(0, 0, e);
            let x = ch_idempotent(&m, trunc, Picture::XComplex)?;
            let bb = ch_idempotent(&m, trunc, Picture::BB)?;
            ComputeValue::ChIdempotent { trunc, x_complex: x.to_json(), bb: bb.to_json() }
        }
        Target::Jlo => {
            let name = need(&args.triple, "triple")?;
            let text = need(&args.chain, "chain")?;
            let t = problem.triple(name)?;
            let chain = NCForm::parse(t.source(), args.trunc.unwrap_or(6), text)?;
            ComputeValue::Jlo { triple: name.into(), chain: text.into(), value: jlo(t, &chain)?.into() }
        }
        Target::Chi => {
            let name = need(&args.triple, "triple")?;
            let text = need(&args.chain, "chain")?;
            let t = problem.triple(name)?;
            let chain = NCForm::parse(t.source(), args.trunc.unwrap_or(6), text)?;
            let v = BivariantCocycle::new(t.clone()).eval(&chain)?;
            let k = t.coefficients();
            let trunc = t.coeff_trunc() + 1;
            ComputeValue::Chi {
                triple: name.into(),
                chain: text.into(),
                even: Form::from_terms(k, trunc, v.even).to_json(),
                odd: Form::from_terms(k, trunc, v.odd).to_json(),
            }
        }
        Target::Pairing => {
            let time = args.time.unwrap_or(1.0);
            let (tname, e) = match &args.idempotent {
                Some(name) => {
                    let entry = problem.file.idempotents.get(name).ok_or_else(|| Error::Resolution(format!("unknown idempotent '{name}'")))?;
                    let tname = args.triple.clone().or_else(|| entry.triple.clone()).ok_or_else(|| Error::Config("missing argument --triple".into()))?;
                    (tname, problem.idempotents[name].1.clone())
                }
                None => {
                    let tname = need(&args.triple, "triple")?.to_string();
                    let t = problem.triple(&tname)?;
                    let e = NCForm::parse(t.source(), 0, args.element.as_deref().unwrap_or("e"))?;
                    (tname, e)
                }
            };
            let t = problem.triple(&tname)?;
            let value = index_pairing(&e, t, time)?;
            // exact index where the triple is one of the built-in fixtures
            let fredholm = match tname.strip_prefix("fixture").and_then(|i| i.parse::<usize>().ok()) {
                Some(i) if args.idempotent.is_none() && args.element.is_none() => {
                    let f = index_fixtures().into_iter().nth(i).ok_or_else(|| Error::Resolution(format!("unknown triple '{tname}'")))?;
                    Some(fredholm_index(&f.projection, &f.dirac)?)
                }
                _ => None,
            };
            ComputeValue::Pairing { triple: tname, time, value: value.into(), fredholm_index: fredholm }
        }
        Target::Bott => {
            let mut pairings = BTreeMap::new();
            let mut agree = true;
            for n in 1..=4 {
                let (closed, fed, same) = pair_bott_dirac_both(n)?;
                agree &= same && closed == fed;
                pairings.insert(n.to_string(), fed.to_string());
            }
            ComputeValue::Bott { pairings, methods_agree: agree }
        }
    };
    Ok(ComputeResult { schema_version: SCHEMA_VERSION, value })
}

fn render_form(f: &FormJson) -> String {
    if f.terms.is_empty() {
        return "0".into();
    }
    f.terms
        .iter()
        .map(|t| {
            let mut s = format!("({})", t.coeff);
            if let Some(h) = &t.head {
                s += &format!(" {h}");
            }
            for l in &t.letters {
                s += &format!(" d[{l}]");
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

impl ComputeResult {
    pub fn render_text(&self) -> String {
        match &self.value {
            ComputeValue::ChIdempotent { trunc, x_complex, bb } => {
                format!("ch(e) to degree {trunc}\n  X-complex picture: {}\n  bB picture:        {}\n", render_form(x_complex), render_form(bb))
            }
            ComputeValue::Jlo { triple, chain, value } => format!("JLO[{triple}]({chain}) = {} + {}i\n", value.re, value.im),
            ComputeValue::Chi { triple, chain, even, odd } => {
                format!("chi[{triple}]({chain})\n  even: {}\n  odd:  {}\n", render_form(even), render_form(odd))
            }
            ComputeValue::Pairing { triple, time, value, fredholm_index } => {
                let mut s = format!("<ch(e), JLO[{triple}]> at t = {time}: {} + {}i\n", value.re, value.im);
                if let Some(k) = fredholm_index {
                    s += &format!("  exact Fredholm index: {k}\n");
                }
                s
            }
            ComputeValue::Bott { pairings, methods_agree } => {
                let mut s = String::from("n  <ch(bott), [R^n]>\n");
                for (n, v) in pairings {
                    s += &format!("{n}  {v}\n");
                }
                s += &format!("closed form and Fedosov exponential agree: {methods_agree}\n");
                s
            }
        }
    }
}
