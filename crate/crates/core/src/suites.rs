//! Invariant suites: every structural identity of the crate as a named,
//! seeded check with a measured residual. The CLI and the acceptance test
//! both run these.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BasisAlgebra, FiniteAlgebra, TensorAlgebra};
use crate::bar::*;
use crate::bott::{bott_chern, pair_bott_dirac_both, BottMethod};
use crate::fedosov::{central_binomial, fedosov_product, idempotent_e_hat, natural_d};
use crate::fixtures::*;
use crate::forms::{basis_words, kappa_poly_terms, Form, NCForm, Terms, Word};
use crate::goodwillie::*;
use crate::linalg::{Poly, SMat};
use crate::problem::{scalar_image, Resolved, SCHEMA_VERSION};
use crate::scalar::{Field, Gaussian, Mode, Rat, Sym};
use crate::spectral::*;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Goodwillie,
    Bar,
    Jlo,
    Bivariant,
    Bott,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Identities, Suite::Goodwillie, Suite::Bar, Suite::Jlo, Suite::Bivariant, Suite::Bott];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Goodwillie => "goodwillie",
            Suite::Bar => "bar",
            Suite::Jlo => "jlo",
            Suite::Bivariant => "bivariant",
            Suite::Bott => "bott",
            Suite::All => "all",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.iter().copied().chain([Suite::All]).find(|x| x.name() == s).ok_or_else(|| Error::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    SkippedTruncation,
}

/// How a residual is measured: number of failing instances for exact checks,
/// largest absolute deviation for numeric ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    Failures,
    MaxAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub suite: Suite,
    pub criterion: u8,
    pub status: Status,
    pub residual_kind: ResidualKind,
    pub residual: f64,
    pub tolerance: f64,
    pub instances: usize,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub timestamp: u64,
}

impl Environment {
    pub fn capture() -> Self {
        Environment {
            crate_version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
            timestamp: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub seed: u64,
    pub mode: Mode,
    pub environment: Environment,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    /// The report with wall-clock fields zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.environment.timestamp = 0;
        r.environment.threads = 0;
        for c in &mut r.checks {
            c.seconds = 0.0;
        }
        r
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// `criterion → passed`, over the criteria this report touches.
    pub fn criteria(&self) -> BTreeMap<u8, bool> {
        let mut out = BTreeMap::new();
        for c in &self.checks {
            let e = out.entry(c.criterion).or_insert(true);
            *e &= c.status != Status::Fail;
        }
        out
    }

    pub fn render_text(&self) -> String {
        let mut s = format!("suite {} (seed {}, mode {})\n", self.suite.name(), self.seed, self.mode.name());
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::SkippedTruncation => "SKIP",
            };
            s += &format!("  [{status}] #{:<2} {:<44} residual {:.3e} (tol {:.1e}, n = {}, {:.2}s)\n", c.criterion, c.name, c.residual, c.tolerance, c.instances, c.seconds);
            if let Some(ce) = &c.counterexample {
                s += &format!("         counterexample: {ce}\n");
            }
        }
        let failed = self.failures().count();
        s += &format!("{} checks, {} failed: {}\n", self.checks.len(), failed, if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

/// Run parameters; `None` means the per-check default.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub mode: Mode,
    pub tol: Option<f64>,
    pub trunc: Option<usize>,
    /// Samples for the Monte-Carlo simplex-integral check.
    pub mc_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: 20_240_601, mode: Mode::Exact, tol: None, trunc: None, mc_samples: 1_000_000 }
    }
}

#[derive(Default)]
struct Outcome {
    residual: f64,
    instances: usize,
    skipped: usize,
    counterexample: Option<String>,
    detail: Option<serde_json::Value>,
}

impl Outcome {
    /// Record an exact instance.
    fn exact(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.residual += 1.0;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }

    /// Record a numeric instance.
    fn numeric(&mut self, err: f64, tol: f64, describe: impl FnOnce() -> String) {
        self.instances += 1;
        let bad = !(err <= tol);
        if bad && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
        self.residual = if err.is_nan() { f64::INFINITY } else { self.residual.max(err) };
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    problem: &'a Resolved,
    tol: f64,
    rng: ChaCha8Rng,
}

type CheckFn = Box<dyn Fn(&mut Ctx) -> Result<Outcome> + Send + Sync>;

struct Check {
    name: String,
    suite: Suite,
    criterion: u8,
    kind: ResidualKind,
    default_tol: f64,
    run: CheckFn,
}

fn exact_check(name: impl Into<String>, suite: Suite, criterion: u8, run: impl Fn(&mut Ctx) -> Result<Outcome> + Send + Sync + 'static) -> Check {
    Check { name: name.into(), suite, criterion, kind: ResidualKind::Failures, default_tol: 0.0, run: Box::new(run) }
}

fn numeric_check(name: impl Into<String>, suite: Suite, criterion: u8, tol: f64, run: impl Fn(&mut Ctx) -> Result<Outcome> + Send + Sync + 'static) -> Check {
    Check { name: name.into(), suite, criterion, kind: ResidualKind::MaxAbs, default_tol: tol, run: Box::new(run) }
}

fn name_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a, so check seeds do not depend on registration order
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64 ^ seed, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Run the named suite against a resolved problem.
pub fn run_suite(problem: &Resolved, suite: Suite, cfg: &RunConfig) -> SuiteReport {
    let checks: Vec<Check> = registry(problem, cfg).into_iter().filter(|c| suite.includes(c.suite)).collect();
    let results: Vec<CheckResult> = checks
        .par_iter()
        .map(|c| {
            let tol = match c.kind {
                ResidualKind::Failures if cfg.mode == Mode::Exact || cfg.mode == Mode::Symbolic => 0.0,
                _ => cfg.tol.unwrap_or(c.default_tol),
            };
            let mut ctx = Ctx { cfg, problem, tol, rng: ChaCha8Rng::seed_from_u64(name_seed(cfg.seed, &c.name)) };
            let start = Instant::now();
            let out = (c.run)(&mut ctx);
            let seconds = start.elapsed().as_secs_f64();
            let (status, out) = match out {
                Ok(o) if o.instances == 0 && o.skipped > 0 => (Status::SkippedTruncation, o),
                Ok(o) if o.residual <= tol && o.counterexample.is_none() => (Status::Pass, o),
                Ok(o) => (Status::Fail, o),
                Err(e) => (Status::Fail, Outcome { residual: f64::INFINITY, counterexample: Some(format!("error: {e}")), ..Default::default() }),
            };
            CheckResult {
                name: c.name.clone(),
                suite: c.suite,
                criterion: c.criterion,
                status,
                residual_kind: c.kind,
                residual: out.residual,
                tolerance: tol,
                instances: out.instances,
                seconds,
                counterexample: out.counterexample,
                detail: out.detail,
            }
        })
        .collect();
    let passed = results.iter().all(|c| c.status != Status::Fail);
    SuiteReport { schema_version: SCHEMA_VERSION, suite, seed: cfg.seed, mode: cfg.mode, environment: Environment::capture(), checks: results, passed }
}

/// Names of all registered checks, in report order.
pub fn registered_checks(problem: &Resolved, suite: Suite) -> Vec<(String, u8)> {
    registry(problem, &RunConfig::default()).into_iter().filter(|c| suite.includes(c.suite)).map(|c| (c.name, c.criterion)).collect()
}

fn registry(problem: &Resolved, cfg: &RunConfig) -> Vec<Check> {
    let mut v = Vec::new();
    identity_checks(problem, cfg, &mut v);
    idempotent_checks(&mut v);
    goodwillie_checks(&mut v);
    bar_checks(&mut v);
    jlo_checks(problem, &mut v);
    bivariant_checks(problem, &mut v);
    bott_checks(&mut v);
    v
}

fn magnitude<A: BasisAlgebra>(x: &Form<A>) -> f64 {
    x.terms().values().map(|c| c.magnitude()).fold(0.0, f64::max)
}

fn close<A: BasisAlgebra>(x: &Form<A>, ctx: &Ctx) -> bool {
    magnitude(x) <= ctx.tol
}

// ---------------------------------------------------------------------------
// Criterion 1: operator identities on ΩA, exhaustive over basis words.

const IDENTITIES: [&str; 7] = ["b_squared", "connes_b_squared", "b_connes_b_anticommute", "d_squared", "karoubi_homotopy", "kappa_connes_b", "kappa_polynomial"];

fn identity_instance<F: Field>(alg: &Arc<FiniteAlgebra<F>>, which: &str, w: &Word<u16>, ctx: &Ctx) -> Result<Option<bool>> {
    let n = w.degree();
    let trunc = n + 2;
    let mut t = Terms::new();
    t.insert(w.clone(), F::one());
    let x = Form::from_terms(alg, trunc, t);
    let res = match which {
        "b_squared" => x.b().b(),
        "connes_b_squared" => x.connes_b().connes_b(),
        "b_connes_b_anticommute" => x.b().connes_b().add(&x.connes_b().b())?,
        "d_squared" => x.d().d(),
        // 1 − κ = db + bd
        "karoubi_homotopy" => x.sub(&x.kappa())?.sub(&x.b().d().add(&x.d().b())?)?,
        // κB = Bκ = B
        "kappa_connes_b" => {
            let bx = x.connes_b();
            let l = bx.kappa().sub(&bx)?;
            let r = x.kappa().connes_b().sub(&bx)?;
            l.add(&r.scale(&F::imag_unit()))?
        }
        // (κⁿ − 1)(κⁿ⁺¹ − 1) = 0 on Ωⁿ
        "kappa_polynomial" => {
            let p = Poly::x_pow_minus_one(n).mul(&Poly::x_pow_minus_one(n + 1));
            Form::from_terms(alg, trunc, kappa_poly_terms(&**alg, &p, x.terms()))
        }
        _ => unreachable!(),
    };
    if res.overflowed() {
        return Ok(None);
    }
    Ok(Some(close(&res, ctx)))
}

fn identity_suite<F: Field>(alg: Arc<FiniteAlgebra<F>>, which: &str, max_degree: usize, ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    for n in 0..=max_degree {
        let words = basis_words(&alg, n);
        let results: Vec<(Word<u16>, Result<Option<bool>>)> = words.into_par_iter().map(|w| {
            let r = identity_instance(&alg, which, &w, ctx);
            (w, r)
        }).collect();
        for (w, r) in results {
            match r? {
                None => out.skipped += 1,
                Some(ok) => out.exact(ok, || format!("{}", Form::from_terms(&alg, n + 2, [(w.clone(), F::one())].into_iter().collect()))),
            }
        }
    }
    Ok(out)
}

fn identity_checks(problem: &Resolved, _cfg: &RunConfig, v: &mut Vec<Check>) {
    for (name, alg) in &problem.algebras {
        for which in IDENTITIES {
            let alg = alg.clone();
            let check = move |ctx: &mut Ctx| {
                let max_degree = ctx.cfg.trunc.unwrap_or(6);
                if ctx.cfg.mode == Mode::Float {
                    identity_suite(Arc::new(alg.map_field(|g| g.to_c64())), which, max_degree, ctx)
                } else {
                    identity_suite(alg.clone(), which, max_degree, ctx)
                }
            };
            let mut c = exact_check(format!("identities.{which}[{name}]"), Suite::Identities, 1, check);
            c.default_tol = 1e-12;
            v.push(c);
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 4: the idempotent ê and the Chern character series.

fn idempotent_checks(v: &mut Vec<Check>) {
    v.push(exact_check("idempotent.e_hat_idempotent", Suite::Identities, 4, |ctx| {
        let n = ctx.cfg.trunc.unwrap_or(8);
        let e = idempotent_e_hat::<Gaussian>(n);
        let mut out = Outcome::default();
        let sq = fedosov_product(&e, &e)?;
        out.exact(sq == e, || format!("ê⊙ê − ê = {}", sq.sub(&e).unwrap()));
        Ok(out)
    }));
    v.push(exact_check("idempotent.e_hat_cycle", Suite::Identities, 4, |ctx| {
        let n = ctx.cfg.trunc.unwrap_or(8);
        let e = idempotent_e_hat::<Gaussian>(n);
        let mut out = Outcome::default();
        let cyc = natural_d(&e.with_trunc(n + 1))?.with_trunc(n);
        out.exact(cyc.is_zero(), || format!("♮𝐝ê = {cyc}"));
        Ok(out)
    }));
    v.push(exact_check("idempotent.ch_series_coefficients", Suite::Identities, 4, |_ctx| {
        let c = Arc::new(FiniteAlgebra::<Gaussian>::complex_numbers());
        let e = Form::parse(&c, 8, "e")?;
        let mut m = SMat::square_zeros(&[0]);
        m.set(0, 0, e);
        let x = ch_idempotent(&m, 8, Picture::XComplex)?;
        let bb = ch_idempotent(&m, 8, Picture::BB)?;
        let mut out = Outcome::default();
        let fact = |k: u32| Rat::factorial(k);
        let mut table = Vec::new();
        for n in 1..=4u32 {
            let word = Word::new(Some(0), vec![0; 2 * n as usize]);
            let xc = fact(2 * n) * fact(n).recip().unwrap() * fact(n).recip().unwrap();
            let mut bc = fact(2 * n) * fact(n).recip().unwrap();
            if n % 2 == 1 {
                bc = -bc;
            }
            let got_x = x.coeff(Some(0), &word.letters);
            let got_b = bb.coeff(Some(0), &word.letters);
            out.exact(got_x == Gaussian::real(xc.clone()) && xc == central_binomial(n), || format!("X-picture coefficient at n = {n}: {got_x}"));
            out.exact(got_b == Gaussian::real(bc.clone()), || format!("bB-picture coefficient at n = {n}: {got_b}"));
            table.push(serde_json::json!({"n": n, "x_complex": got_x.to_string(), "bb": got_b.to_string()}));
        }
        out.detail = Some(serde_json::Value::Array(table));
        Ok(out)
    }));
}

// ---------------------------------------------------------------------------
// Criterion 2: the Goodwillie maps on ΩTA, A = M₂.

const GOODWILLIE_INSTANCES: usize = 200;

fn m2_tensor() -> Arc<TensorAlgebra<Gaussian>> {
    Arc::new(TensorAlgebra::new(Arc::new(FiniteAlgebra::matrix_units(2))))
}

fn b_plus_b_ta(w: &OmegaTA<Gaussian>) -> Result<OmegaTA<Gaussian>> {
    w.b().add(&w.connes_b())
}

fn goodwillie_checks(v: &mut Vec<Check>) {
    fn random_inputs(ctx: &mut Ctx, degrees: std::ops::RangeInclusive<usize>) -> (Arc<TensorAlgebra<Gaussian>>, usize, Vec<OmegaTA<Gaussian>>) {
        let trunc = ctx.cfg.trunc.unwrap_or(6);
        let t = m2_tensor();
        // total tensor length ≤ trunc keeps every operator inside the truncation
        let xs = (0..GOODWILLIE_INSTANCES).map(|_| random_omega_ta(&mut ctx.rng, &t, degrees.clone(), trunc, 4, trunc)).collect();
        (t, trunc, xs)
    }
    v.push(exact_check("goodwillie.nabla_homotopy", Suite::Goodwillie, 2, |ctx| {
        let trunc = ctx.cfg.trunc.unwrap_or(6);
        let (_, _, xs) = random_inputs(ctx, 2..=trunc.saturating_sub(1).max(2));
        let mut out = Outcome::default();
        for x in xs {
            // ∇b + b∇ = −Id on degree ≥ 2
            let lhs = nabla(&x.b())?.add(&nabla(&x)?.b())?.add(&x)?;
            out.exact(lhs.is_zero(), || format!("{x}"));
        }
        Ok(out)
    }));
    v.push(exact_check("goodwillie.phi_nilpotence", Suite::Goodwillie, 2, |ctx| {
        let (_, _, xs) = random_inputs(ctx, 0..=4);
        let mut out = Outcome::default();
        for x in xs {
            let bound = x.terms().keys().map(|w| (total_length(w) - w.degree().min(total_length(w))) / 2 + 1).max().unwrap_or(0);
            let k = phi_nilpotency(&x);
            out.exact(k <= bound, || format!("φ-nilpotency {k} exceeds {bound} on {x}"));
        }
        Ok(out)
    }));
    v.push(exact_check("goodwillie.intertwines_b", Suite::Goodwillie, 2, |ctx| {
        let (_, _, xs) = random_inputs(ctx, 1..=4);
        let mut out = Outcome::default();
        for x in xs {
            let lhs = b_plus_b_ta(&one_minus_phi_inv(&x))?;
            let rhs = one_minus_phi_inv(&x.b());
            out.exact(lhs == rhs, || format!("{x}"));
        }
        Ok(out)
    }));
    v.push(exact_check("goodwillie.gamma_chain_map", Suite::Goodwillie, 2, |ctx| {
        let trunc = ctx.cfg.trunc.unwrap_or(6);
        let t = m2_tensor();
        let mut out = Outcome::default();
        for _ in 0..GOODWILLIE_INSTANCES {
            let x = random_tensor_x_chain(&mut ctx.rng, &t, trunc, 3, trunc);
            let ok = b_plus_b_ta(&gamma(&x))? == gamma(&x.boundary()?);
            out.exact(ok, || format!("even {} | odd {}", x.even, x.odd));
        }
        Ok(out)
    }));
    v.push(exact_check("goodwillie.pi_gamma_identity", Suite::Goodwillie, 2, |ctx| {
        let trunc = ctx.cfg.trunc.unwrap_or(6);
        let t = m2_tensor();
        let mut out = Outcome::default();
        for _ in 0..GOODWILLIE_INSTANCES {
            let x = random_tensor_x_chain(&mut ctx.rng, &t, trunc, 3, trunc);
            let ok = pi(&gamma(&x))? == x;
            out.exact(ok, || format!("even {} | odd {}", x.even, x.odd));
        }
        Ok(out)
    }));
    v.push(exact_check("goodwillie.gamma_pi_homotopy", Suite::Goodwillie, 2, |ctx| {
        let (_, _, xs) = random_inputs(ctx, 0..=4);
        let mut out = Outcome::default();
        for x in xs {
            // γπ − Id = [(b+B), h]
            let lhs = q_projection(&x)?.sub(&x)?;
            let rhs = b_plus_b_ta(&homotopy_h(&x)?)?.add(&homotopy_h(&b_plus_b_ta(&x)?)?)?;
            out.exact(lhs == rhs, || format!("{x}"));
        }
        Ok(out)
    }));
}

// ---------------------------------------------------------------------------
// Criterion 3: bar construction, cochain algebra ℛ, Lemmas A1 and A2.

const BAR_INSTANCES: usize = 100;

fn bar_setting(ctx: &Ctx) -> BarSetting<Gaussian> {
    BarSetting::new(Arc::new(FiniteAlgebra::matrix_units(2)), ctx.cfg.trunc.unwrap_or(DEFAULT_TRUNC))
}

fn coeff_alg() -> Arc<FiniteAlgebra<Gaussian>> {
    Arc::new(FiniteAlgebra::truncated_polynomials(2))
}

fn form_entry(rng: &mut ChaCha8Rng, p: u8) -> NCForm<Gaussian> {
    random_coefficient_form(rng, &coeff_alg(), p, 4)
}

fn form_target() -> CochainTarget<NCForm<Gaussian>> {
    CochainTarget::new(vec![0, 1], Form::unit(&coeff_alg(), 4))
}

fn bar_checks(v: &mut Vec<Check>) {
    v.push(exact_check("bar.bprime_squared", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let c = random_bar_chain(&mut ctx.rng, &s, 0..=s.trunc, 5);
            out.exact(c.bprime().bprime().is_zero(), || format!("{:?}", c.terms()));
            out.exact(c.bprime() == c.bprime_alt(), || format!("readings differ on {:?}", c.terms()));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.bdprime_squared", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let e = random_bimod_elem(&mut ctx.rng, &s, 1..=s.trunc, 5);
            out.exact(e.bdprime().bdprime().is_zero(), || format!("{:?}", e.terms()));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.coassociativity", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let c = random_bar_chain(&mut ctx.rng, &s, 0..=s.trunc, 4);
            let t = c.coproduct();
            let ok = coproduct_left(&t) == coproduct_right(&t) && c.bprime().coproduct() == tensor_bprime(&s.tilde, &t) && Field::is_zero(&c.bprime().counit());
            out.exact(ok, || format!("{:?}", c.terms()));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.coderivation", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let e = random_bimod_elem(&mut ctx.rng, &s, 1..=s.trunc.saturating_sub(1).max(1), 4);
            let (l, r) = coderivation_sides(&e);
            let ok = e.bdprime().partial() == e.partial().bprime() && l == r;
            out.exact(ok, || format!("{:?}", e.terms()));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.cotrace_intertwines_b", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let n = ctx.rng.gen_range(0..s.trunc);
            let w = random_form_of_degree(&mut ctx.rng, &s.base, n, 3, s.trunc);
            let ok = s.cotrace(&w.b())? == s.cotrace(&w)?.bdprime();
            out.exact(ok, || format!("{w}"));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.cotrace_identities", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let n = ctx.rng.gen_range(0..s.trunc);
            let w = random_form_of_degree(&mut ctx.rng, &s.base, n, 3, s.trunc);
            let nat = s.cotrace(&w)?;
            let ok = nat.comodule_left() == flip_right(&nat.comodule_right()) && flip_left(&nat.comodule_left()) == nat.comodule_right();
            out.exact(ok, || format!("{w}"));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.convolution_algebra", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let t = form_target();
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let rng = &mut ctx.rng;
            let (a, b, c) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8), rng.gen_range(0..2u8));
            let f = random_bar_cochain(rng, &s, &t, a, 0..=2, 3, false, &mut form_entry);
            let g = random_bar_cochain(rng, &s, &t, b, 0..=2, 3, false, &mut form_entry);
            let h = random_bar_cochain(rng, &s, &t, c, 0..=2, 3, false, &mut form_entry);
            let sign = |x: &BarCochain<Gaussian, NCForm<Gaussian>>, k: u8| if k % 2 == 1 { x.neg() } else { x.clone() };
            let fg = f.convolve(&g)?;
            let mut ok = fg.convolve(&h)?.sub(&f.convolve(&g.convolve(&h)?)?)?.is_zero();
            ok &= f.delta_r().delta_r().is_zero() && f.d_r().d_r().is_zero();
            ok &= f.delta_r().d_r().add(&f.d_r().delta_r())?.is_zero();
            ok &= fg.delta_r().sub(&f.delta_r().convolve(&g)?.add(&sign(&f.convolve(&g.delta_r())?, a))?)?.is_zero();
            ok &= fg.d_r().sub(&f.d_r().convolve(&g)?.add(&sign(&f.convolve(&g.d_r())?, a))?)?.is_zero();
            ok &= fg.partial_r().sub(&f.partial_r().act(&g, Side::Right)?.add(&g.partial_r().act(&f, Side::Left)?)?)?.is_zero();
            ok &= f.delta_r().partial_r().sub(&f.partial_r().delta_m())?.is_zero();
            ok &= f.d_r().partial_r().sub(&f.partial_r().d_m())?.is_zero();
            out.exact(ok, || format!("degrees ({a}, {b}, {c})"));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.bimodule_axioms", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let t = form_target();
        let one = BarCochain::unit(&s.tilde, s.trunc, t.clone());
        let mut out = Outcome::default();
        for _ in 0..BAR_INSTANCES {
            let rng = &mut ctx.rng;
            let (a, b, c) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8), rng.gen_range(0..2u8));
            let f = random_bar_cochain(rng, &s, &t, a, 0..=2, 3, false, &mut form_entry);
            let g = random_bar_cochain(rng, &s, &t, b, 0..=2, 3, false, &mut form_entry);
            let m = random_bimod_cochain(rng, &s, &t, c, 1..=3, 3, &mut form_entry);
            let sign = |x: BimodCochain<Gaussian, NCForm<Gaussian>>, k: u8| if k % 2 == 1 { x.neg() } else { x };
            let fg = f.convolve(&g)?;
            let mut ok = m.act(&one, Side::Left)?.sub(&m)?.is_zero() && m.act(&one, Side::Right)?.sub(&m)?.is_zero();
            ok &= m.act(&g, Side::Left)?.act(&f, Side::Left)?.sub(&m.act(&fg, Side::Left)?)?.is_zero();
            ok &= m.act(&f, Side::Right)?.act(&g, Side::Right)?.sub(&m.act(&fg, Side::Right)?)?.is_zero();
            ok &= m.act(&f, Side::Left)?.act(&g, Side::Right)?.sub(&m.act(&g, Side::Right)?.act(&f, Side::Left)?)?.is_zero();
            ok &= m.delta_m().delta_m().is_zero();
            ok &= m.delta_m().d_m().add(&m.d_m().delta_m())?.is_zero();
            let rhs = m.act(&f.delta_r(), Side::Left)?.add(&sign(m.delta_m().act(&f, Side::Left)?, a))?;
            ok &= m.act(&f, Side::Left)?.delta_m().sub(&rhs)?.is_zero();
            let rhs = m.delta_m().act(&f, Side::Right)?.add(&sign(m.act(&f.delta_r(), Side::Right)?, c))?;
            ok &= m.act(&f, Side::Right)?.delta_m().sub(&rhs)?.is_zero();
            out.exact(ok, || format!("degrees ({a}, {b}, {c})"));
        }
        Ok(out)
    }));
    v.push(exact_check("bar.lemma_a1", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let t = form_target();
        let mut out = Outcome::default();
        let mut nontrivial = 0;
        for _ in 0..BAR_INSTANCES {
            let deg = ctx.rng.gen_range(0..2u8);
            let gamma = random_bimod_cochain(&mut ctx.rng, &s, &t, deg, 1..=s.trunc, 6, &mut form_entry);
            let n = ctx.rng.gen_range(1..s.trunc);
            let w = random_form_of_degree(&mut ctx.rng, &s.base, n, 3, s.trunc);
            let (l, r) = lemma_a1_sides(&s, &gamma, &w)?;
            nontrivial += usize::from(!l.is_zero());
            out.exact(l.sub(&r).is_zero(), || format!("|γ| = {deg}, ω = {w}"));
        }
        out.detail = Some(serde_json::json!({ "nontrivial": nontrivial }));
        Ok(out)
    }));
    v.push(exact_check("bar.lemma_a2", Suite::Bar, 3, |ctx| {
        let s = bar_setting(ctx);
        let t = form_target();
        let mut out = Outcome::default();
        let mut nontrivial = 0;
        for _ in 0..BAR_INSTANCES {
            let rho = random_unital_rho(&mut ctx.rng, &s, &t, &mut form_entry);
            let (a, b) = (ctx.rng.gen_range(0..2u8), ctx.rng.gen_range(0..2u8));
            let f = random_bar_cochain(&mut ctx.rng, &s, &t, a, 1..=3, 4, true, &mut form_entry);
            let g = random_bar_cochain(&mut ctx.rng, &s, &t, b, 1..=3, 4, true, &mut form_entry);
            let n = ctx.rng.gen_range(0..s.trunc.saturating_sub(1).max(1));
            let w = random_form_of_degree(&mut ctx.rng, &s.base, n, 3, s.trunc);
            let (l, r) = lemma_a2_sides(&s, &f, &g, &rho, &w)?;
            nontrivial += usize::from(!l.is_zero());
            out.exact(l.sub(&r).is_zero(), || format!("|f| = {a}, |g| = {b}, ω = {w}"));
        }
        out.detail = Some(serde_json::json!({ "nontrivial": nontrivial }));
        Ok(out)
    }));
}

// ---------------------------------------------------------------------------
// Criteria 5, 6, 10: JLO cocycle, index pairing, Duhamel integrals.

fn jlo_checks(problem: &Resolved, v: &mut Vec<Check>) {
    v.push(numeric_check("jlo.cocycle", Suite::Jlo, 5, 1e-9, |ctx| {
        let m = m2();
        let mut out = Outcome::default();
        let even_dims = [(2, 2), (4, 2), (2, 4), (4, 4), (6, 2)];
        let odd_dims = [2, 4];
        for i in 0..100 {
            if i % 2 == 0 {
                let (p, q) = even_dims[(i / 2) % even_dims.len()];
                let t = random_even_triple(&mut ctx.rng, p, q);
                let c = random_chain_of_parity(&mut ctx.rng, &m, 3, 3, 1, 6);
                let r = jlo_even(&t, &c.b_plus_b())?.norm();
                out.numeric(r, ctx.tol, || format!("even triple on C^{{{p}|{q}}}, chain {c}"));
            } else {
                let k = odd_dims[(i / 2) % odd_dims.len()];
                let t = random_odd_triple(&mut ctx.rng, k);
                let c = random_chain_of_parity(&mut ctx.rng, &m, 4, 3, 0, 6);
                let r = jlo_odd(&t, &c.b_plus_b())?.norm();
                out.numeric(r, ctx.tol, || format!("odd triple on C^{k}, chain {c}"));
            }
        }
        Ok(out)
    }));
    v.push(numeric_check("jlo.index_pairing", Suite::Jlo, 6, 1e-9, |ctx| {
        let mut out = Outcome::default();
        let mut table = Vec::new();
        for f in index_fixtures().into_iter().chain([flattening_fixture()]) {
            let t = f.triple()?;
            let exact = fredholm_index(&f.projection, &f.dirac)?;
            let e = NCForm::word(t.source(), 0, Some(0), vec![], Complex64::new(1.0, 0.0));
            let mut values = Vec::new();
            for time in [0.5, 1.0, 2.0] {
                let p = index_pairing(&e, &t, time)?;
                out.numeric((p - Complex64::new(exact as f64, 0.0)).norm(), ctx.tol, || format!("{} at t = {time}: {p} vs {exact}", f.name));
                values.push(p.re);
            }
            out.exact_index(exact == f.expected, || format!("{}: Fredholm index {exact}, expected {}", f.name, f.expected));
            table.push(serde_json::json!({"fixture": f.name, "index": exact, "pairing": values}));
        }
        out.detail = Some(serde_json::Value::Array(table));
        Ok(out)
    }));
    v.push(numeric_check("jlo.pairing_time_independence", Suite::Jlo, 6, 1e-9, |ctx| {
        let mut out = Outcome::default();
        for f in index_fixtures() {
            let t = f.triple()?;
            let e = NCForm::word(t.source(), 0, Some(0), vec![], Complex64::new(1.0, 0.0));
            let vals: Vec<Complex64> = [0.5, 1.0, 2.0].iter().map(|&s| index_pairing(&e, &t, s)).collect::<Result<_>>()?;
            let spread = vals.iter().map(|a| vals.iter().map(|b| (a - b).norm()).fold(0.0, f64::max)).fold(0.0, f64::max);
            out.numeric(spread, ctx.tol, || format!("{}: {vals:?}", f.name));
        }
        Ok(out)
    }));
    for (name, e) in problem.file.idempotents.iter().filter(|(_, e)| e.triple.is_some()) {
        let (tname, expected) = (e.triple.clone().unwrap(), e.expected_index);
        let name = name.clone();
        let check_name = format!("jlo.pairing[{name}]");
        v.push(numeric_check(check_name, Suite::Jlo, 6, 1e-9, move |ctx| {
            let t = ctx.problem.triple(&tname)?;
            let (_, x) = &ctx.problem.idempotents[&name];
            let mut out = Outcome::default();
            let vals: Vec<Complex64> = [0.5, 1.0, 2.0].iter().map(|&s| index_pairing(x, t, s)).collect::<Result<_>>()?;
            let target = expected.map(|k| Complex64::new(k as f64, 0.0)).unwrap_or(vals[1]);
            for v in &vals {
                out.numeric((v - target).norm(), ctx.tol, || format!("pairing {v} vs {target}"));
            }
            out.detail = Some(serde_json::json!({ "pairing": vals.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>() }));
            Ok(out)
        }));
    }
    for name in problem.file.triples.keys() {
        let name = name.clone();
        v.push(numeric_check(format!("jlo.cocycle[{name}]"), Suite::Jlo, 5, 1e-9, move |ctx| {
            let t = ctx.problem.triple(&name)?.clone();
            let alg = t.source().clone();
            let mut out = Outcome::default();
            for _ in 0..20 {
                let parity = if t.parity() == Parity::Even { 1 } else { 0 };
                let c = random_chain_of_parity(&mut ctx.rng, &alg, 3 + (1 - parity), 3, parity, 6);
                let r = jlo(&t, &c.b_plus_b())?.norm();
                out.numeric(r, ctx.tol, || format!("chain {c}"));
            }
            Ok(out)
        }));
    }
    v.push(numeric_check("duhamel.monte_carlo", Suite::Jlo, 10, 1e-3, |ctx| {
        let mut out = Outcome::default();
        let samples = ctx.cfg.mc_samples;
        for (n, dim) in [(1, 2), (2, 3), (3, 4)] {
            let d = random_hermitian(&mut ctx.rng, dim) * Complex64::new(0.8, 0.0);
            let d2 = &d * &d;
            let fs: Vec<CMat> = (0..n).map(|_| random_matrix(&mut ctx.rng, dim, dim) * Complex64::new(0.5, 0.0)).collect();
            let exact = duhamel_integral(&d2, &fs, 1.0)?;
            let mc = duhamel_monte_carlo(&d2, &fs, 1.0, samples, &mut ctx.rng);
            out.numeric(max_abs(&(exact - mc)), ctx.tol, || format!("n = {n}, dim = {dim}"));
        }
        Ok(out)
    }));
    v.push(numeric_check("duhamel.nilpotent_closed_form", Suite::Jlo, 10, 1e-12, |ctx| {
        let mut out = Outcome::default();
        for n in 1..=3usize {
            for dim in 1..=4usize {
                let fs: Vec<CMat> = (0..n).map(|_| random_matrix(&mut ctx.rng, dim, dim)).collect();
                let exact = duhamel_integral(&CMat::zeros(dim, dim), &fs, 1.0)?;
                let prod = fs.iter().fold(CMat::identity(dim, dim), |a, f| a * f);
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                out.numeric(max_abs(&(exact - prod * Complex64::new(1.0 / fact, 0.0))), ctx.tol, || format!("n = {n}, dim = {dim}"));
            }
        }
        Ok(out)
    }));
}

impl Outcome {
    /// An exact side-condition inside a numeric check.
    fn exact_index(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        if !ok {
            self.residual = f64::INFINITY;
            if self.counterexample.is_none() {
                self.counterexample = Some(describe());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Criteria 7, 8: the bivariant Chern character.

fn sub_terms(a: &Terms<u16, Complex64>, b: &Terms<u16, Complex64>, s: f64) -> Terms<u16, Complex64> {
    let mut out = a.clone();
    for (w, v) in b {
        *out.entry(w.clone()).or_default() -= v * s;
    }
    out
}

fn terms_norm(t: &Terms<u16, Complex64>) -> f64 {
    t.values().fold(0.0, |a, z| a.max(z.norm()))
}

fn bivariant_checks(problem: &Resolved, v: &mut Vec<Check>) {
    for parity in [Parity::Even, Parity::Odd] {
        let label = if parity == Parity::Even { "even" } else { "odd" };
        v.push(numeric_check(format!("bivariant.chain_map_{label}"), Suite::Bivariant, 7, 1e-9, move |ctx| {
            let m = m2();
            let mut out = Outcome::default();
            let sigma = if parity == Parity::Even { 1.0 } else { -1.0 };
            for _ in 0..4 {
                let base = match parity {
                    Parity::Even => random_even_triple(&mut ctx.rng, 2, 2),
                    Parity::Odd => random_odd_triple(&mut ctx.rng, 2),
                };
                let chi = BivariantCocycle::new(with_nilpotent_coefficients(&mut ctx.rng, &base, 4));
                for _ in 0..2 {
                    let c = random_chain(&mut ctx.rng, &m, 3, 3, 6);
                    let lhs = chi.eval(&c.b_plus_b())?;
                    let rhs = chi.eval(&c)?;
                    let even_res = terms_norm(&sub_terms(&lhs.even, &chi.x_boundary_odd(&rhs.odd), sigma));
                    let odd_res = terms_norm(&chi.reduce_odd(&sub_terms(&lhs.odd, &chi.x_boundary_even(&rhs.even), sigma)));
                    out.numeric(even_res.max(odd_res), ctx.tol, || format!("{label} triple, chain {c}"));
                }
            }
            Ok(out)
        }));
    }
    v.push(numeric_check("bivariant.homotopy_linear_path", Suite::Bivariant, 8, 1e-6, |ctx| {
        let m = m2();
        let t = random_even_triple(&mut ctx.rng, 2, 2);
        let d1 = t.dirac() + random_odd_dirac(&mut ctx.rng, 2, 2, 0.3);
        let path = DiracPath::Linear { d0: t.dirac().clone(), d1 };
        let mut out = Outcome::default();
        for _ in 0..3 {
            let c = random_chain_of_parity(&mut ctx.rng, &m, 2, 3, 0, 6);
            out.numeric(homotopy_residual(&t, &path, &c, 200)?, ctx.tol, || format!("chain {c}"));
        }
        Ok(out)
    }));
    v.push(numeric_check("bivariant.homotopy_flattening_path", Suite::Bivariant, 8, 1e-6, |ctx| {
        let t = flattening_fixture().triple()?;
        let e = NCForm::word(t.source(), 0, Some(0), vec![], Complex64::new(1.0, 0.0));
        let path = DiracPath::Flattening { d: t.dirac().clone(), p: scalar_image(&t, &e)? };
        let mut out = Outcome::default();
        for _ in 0..3 {
            let c = random_chain_of_parity(&mut ctx.rng, t.source(), 2, 3, 0, 6);
            out.numeric(homotopy_residual(&t, &path, &c, 200)?, ctx.tol, || format!("chain {c}"));
        }
        Ok(out)
    }));
    for name in problem.paths.keys() {
        let name = name.clone();
        v.push(numeric_check(format!("bivariant.homotopy[{name}]"), Suite::Bivariant, 8, 1e-6, move |ctx| {
            let (tname, path, chain) = &ctx.problem.paths[&name];
            let t = ctx.problem.triple(tname)?;
            let mut out = Outcome::default();
            out.numeric(homotopy_residual(t, path, chain, 200)?, ctx.tol, || format!("chain {chain}"));
            Ok(out)
        }));
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: the Bott element.

/// `n → pairing` for `n = 1..4`, as printed by the CLI.
pub fn bott_pairing_table() -> Result<BTreeMap<usize, Sym>> {
    (1..=4).map(|n| Ok((n, pair_bott_dirac_both(n)?.1))).collect()
}

fn bott_checks(v: &mut Vec<Check>) {
    v.push(exact_check("bott.pairing_normalized", Suite::Bott, 9, |ctx| {
        let mut out = Outcome::default();
        let mut table = serde_json::Map::new();
        for n in 1..=4 {
            let (closed, fed, _) = pair_bott_dirac_both(n)?;
            if ctx.cfg.mode == Mode::Float {
                let lowered = fed.lower(std::f64::consts::PI, 1.0);
                out.exact((lowered - Complex64::new(1.0, 0.0)).norm() < 1e-12, || format!("n = {n}: {lowered}"));
            } else {
                out.exact(fed == Sym::one() && closed == Sym::one(), || format!("n = {n}: closed {closed}, fedosov {fed}"));
            }
            table.insert(n.to_string(), serde_json::Value::String(fed.to_string()));
        }
        out.detail = Some(serde_json::Value::Object(table));
        Ok(out)
    }));
    v.push(exact_check("bott.methods_agree", Suite::Bott, 9, |_ctx| {
        let mut out = Outcome::default();
        for n in 1..=4 {
            let a = bott_chern(n, BottMethod::ClosedForm)?.normalized();
            let b = bott_chern(n, BottMethod::FedosovExp)?.normalized();
            out.exact(a == b, || format!("n = {n}: {a:?} vs {b:?}"));
        }
        Ok(out)
    }));
}
