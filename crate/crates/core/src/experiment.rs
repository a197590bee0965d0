//! Scenario runner: reproducible experiments driven by a JSON spec.
//!
//! Every scenario is a pure function of its [`ExperimentSpec`] (seed
//! included). Results come back as a JSON body, a CSV table and a status
//! whose exit code follows the contract 0 = all assertions passed,
//! 1 = falsification detected, 2 = inconclusive, 3 = usage or resource error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::concentration::{
    blowup_bound_check_exact, blowup_bound_check_sampled, deviation_point_exact,
    deviation_point_sampled, gcb_test, variance_bound_check, DeviationEvent, DeviationPoint,
    Observations, Verdict,
};
use crate::defaults::{
    BLOWUP_EXACT_CAP, BLOWUP_SAMPLED_SET_CAP, BURNIN_HIGH_TEMPERATURE, BURNIN_LOW_TEMPERATURE,
    DEFAULTS_VERSION, ENUMERATION_CAP, SIGMA_MULTIPLIER,
};
use crate::dobrushin::{gcb_certificate, DobrushinReport};
use crate::entropy::{per_site_entropy_sequence, MeasureSpec, Trend};
use crate::error::{invalid, Error, Result};
use crate::lattice::{
    ising_value, pattern_space_size, Boundary, Configuration, Geometry, Site, Symbol,
    Window,
};
use crate::observables::{
    n_breve, BoundObservable, LocalFunction, Observable,
};
use crate::potential::{ModelConfig, Potential};
use crate::sampler::{run_chains, run_chains_observe, ChainConfig, InitialState, Kernel, SweepOrder};
use crate::specification::FiniteGibbsMeasure;
use crate::stats::{batch_statistic, effective_sample_size, estimate_mean, variance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Certify,
    GcbTest,
    Blowup,
    FrequencyLemma,
    EntropyProbe,
    CriticalVariance,
    PhaseCoexistence,
    DeviationRates,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Certify,
        Scenario::GcbTest,
        Scenario::Blowup,
        Scenario::FrequencyLemma,
        Scenario::EntropyProbe,
        Scenario::CriticalVariance,
        Scenario::PhaseCoexistence,
        Scenario::DeviationRates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Certify => "certify",
            Scenario::GcbTest => "gcb-test",
            Scenario::Blowup => "blowup",
            Scenario::FrequencyLemma => "frequency-lemma",
            Scenario::EntropyProbe => "entropy-probe",
            Scenario::CriticalVariance => "critical-variance",
            Scenario::PhaseCoexistence => "phase-coexistence",
            Scenario::DeviationRates => "deviation-rates",
        }
    }

    /// Column schema of the scenario's CSV table.
    pub fn csv_header(self) -> &'static str {
        match self {
            Scenario::Certify => "y,value",
            Scenario::GcbTest => "side,lambda,lhs,stderr,rhs,verdict",
            Scenario::Blowup => "side,set,epsilon,mass_c,mass_blowup,stderr,bound,applicable,ok",
            Scenario::FrequencyLemma => "hamming,pairs,max_tv,bound",
            Scenario::EntropyProbe => "n,volume,H_n,per_site",
            Scenario::CriticalVariance => "side,volume,var_per_site,stderr,ess,ceiling",
            Scenario::PhaseCoexistence => "part,side,quantity,value,stderr",
            Scenario::DeviationRates => "side,volume,p,stderr,rate,floor,ok",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown scenario `{s}`")))
    }
}

/// Boundary condition and, through it, the window geometry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySpec {
    Plus,
    Minus,
    Free,
    #[default]
    Periodic,
}

impl BoundarySpec {
    pub fn geometry(self) -> Geometry {
        match self {
            BoundarySpec::Plus | BoundarySpec::Minus => Geometry::Fixed,
            BoundarySpec::Free => Geometry::Free,
            BoundarySpec::Periodic => Geometry::Torus,
        }
    }

    /// `plus` freezes the top symbol, `minus` symbol 0.
    pub fn boundary(self, alphabet: usize) -> Boundary {
        match self {
            BoundarySpec::Plus => Boundary::Uniform((alphabet - 1) as Symbol),
            BoundarySpec::Minus => Boundary::Uniform(0),
            _ => Boundary::None,
        }
    }
}

impl FromStr for BoundarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| invalid(format!("unknown boundary `{s}` (plus, minus, free, periodic)")))
    }
}

/// Observable of a scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    /// `Σ_{x∈Λ} ω_x`.
    #[default]
    Magnetization,
    /// `ω_0`.
    Spin,
    /// `ω_0 ω_{e₁}`.
    Pair,
    /// `Σ_{x∈Λ} ω_x ω_{x+e₁}`.
    PairSum,
    /// `1{ω_0 = +}`.
    IndicatorPlus,
}

impl ObservableKind {
    /// The local function `f` underlying the observable.
    pub fn local_function(self, dim: usize, alphabet: usize) -> Result<LocalFunction> {
        let o = Site::origin(dim);
        match self {
            ObservableKind::Magnetization | ObservableKind::Spin => {
                if alphabet != 2 {
                    return Err(invalid("spin observables need a two-symbol alphabet"));
                }
                Ok(LocalFunction::spin(o))
            }
            ObservableKind::Pair | ObservableKind::PairSum => {
                LocalFunction::product(vec![o, Site::unit(dim, 0)])
            }
            ObservableKind::IndicatorPlus => {
                LocalFunction::indicator(alphabet, vec![o], vec![(alphabet - 1) as Symbol])
            }
        }
    }

    pub fn observable(self, window: &Window) -> Result<Observable> {
        let f = self.local_function(window.dim(), window.alphabet())?;
        Ok(match self {
            ObservableKind::Magnetization | ObservableKind::PairSum => Observable::block(f, window),
            _ => Observable::local(f),
        })
    }
}

fn default_between() -> usize {
    1
}
fn default_samples() -> usize {
    1000
}
fn default_chains() -> usize {
    4
}
fn default_kernel() -> Kernel {
    Kernel::HeatBath
}
fn default_order() -> SweepOrder {
    SweepOrder::Lexicographic
}

/// Sampling budget of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// Defaults to 10^3 sweeps when the Dobrushin condition holds, 10^4
    /// otherwise.
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default = "default_between")]
    pub between: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default = "default_kernel")]
    pub kernel: Kernel,
    #[serde(default = "default_order")]
    pub order: SweepOrder,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            burn_in: None,
            between: default_between(),
            samples: default_samples(),
            chains: default_chains(),
            kernel: default_kernel(),
            order: default_order(),
        }
    }
}

/// Deviation event of the `deviation-rates` scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum EventSpec {
    /// Block mean `≥ base + ε/3`; `base` defaults to the exact or estimated
    /// finite-volume mean of `f`.
    Upper {
        #[serde(default)]
        base: Option<f64>,
    },
    /// Block mean in `]center - ε/3, center + ε/3[`.
    Interval { center: f64 },
    /// Block mean `≤ threshold`.
    AtMost { threshold: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Increasing,
    Decreasing,
    Flat,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub model: ModelConfig,
    #[serde(default)]
    pub boundary: BoundarySpec,
    /// Window side lengths (the `n` list, as `2n+1` for centred cubes).
    #[serde(default)]
    pub sides: Vec<usize>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub observable: ObservableKind,
    /// GCB constant to test; defaults to the Dobrushin certificate.
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Sampled configuration pairs (`frequency-lemma`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// Random sets `C` per window (`blowup`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    /// Enumerable windows for the exact parts of `phase-coexistence`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_sides: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Outputs>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn new(scenario: Scenario, model: ModelConfig) -> Self {
        ExperimentSpec {
            scenario,
            model,
            boundary: BoundarySpec::default(),
            sides: Vec::new(),
            sampling: Sampling::default(),
            seed: 0,
            observable: ObservableKind::default(),
            d: None,
            lambda: None,
            epsilon: None,
            k: None,
            pairs: None,
            sets: None,
            event: None,
            expect: None,
            exact_sides: None,
            outputs: None,
        }
    }

    /// A copy with one sweep parameter set and the seed replaced.
    pub fn with_param(&self, param: SweepParam, value: f64, seed: u64) -> Result<Self> {
        let mut s = self.clone();
        s.seed = seed;
        match param {
            SweepParam::Beta => s.model.beta = value,
            SweepParam::N => {
                // Half-integers select even sides, as in window headers.
                if value < 0.0 || (2.0 * value).fract() != 0.0 {
                    return Err(invalid(format!("n must be a non-negative multiple of 1/2, got {value}")));
                }
                s.sides = vec![(2.0 * value) as usize + 1];
                if let Some(e) = &mut s.exact_sides {
                    *e = s.sides.clone();
                }
            }
            SweepParam::Epsilon => s.epsilon = Some(vec![value]),
            SweepParam::Lambda => s.lambda = Some(vec![value]),
        }
        Ok(s)
    }

    fn window(&self, side: usize) -> Result<Window> {
        Window::with_side(self.model.d, side, self.boundary.geometry(), self.model.alphabet())
    }

    fn chain_config(&self, window: Window, boundary: Boundary, seed: u64, certified: bool) -> ChainConfig {
        let s = &self.sampling;
        ChainConfig {
            model: self.model.clone(),
            window,
            boundary,
            kernel: s.kernel,
            order: s.order,
            initial: InitialState::Random,
            burn_in: s.burn_in.unwrap_or(if certified {
                BURNIN_HIGH_TEMPERATURE
            } else {
                BURNIN_LOW_TEMPERATURE
            }),
            between: s.between,
            n_samples: s.samples,
            n_chains: s.chains,
            seed,
        }
    }
}

/// Parameters a sweep can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Beta,
    N,
    Epsilon,
    Lambda,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| invalid(format!("unknown sweep parameter `{s}` (beta, n, epsilon, lambda)")))
    }
}

/// Outcome class of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Falsified,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Falsified => 1,
            Status::Inconclusive => 2,
            Status::Error => 3,
        }
    }

    /// Error beats falsification beats inconclusive beats pass.
    pub fn combine(self, other: Status) -> Status {
        self.max(other)
    }

    fn from_verdict(v: Verdict) -> Status {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Falsified,
            Verdict::Inconclusive => Status::Inconclusive,
        }
    }
}

/// Result of one scenario run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    /// Deterministic report body.
    pub body: Value,
    /// CSV table including its header line.
    pub csv: String,
}

impl Outcome {
    fn error(scenario: Scenario, e: &Error) -> Outcome {
        Outcome {
            status: Status::Error,
            body: json!({ "scenario": scenario.name(), "status": Status::Error, "error": e.to_string() }),
            csv: format!("{}\n", scenario.csv_header()),
        }
    }

    /// The full report: a header (with the only non-deterministic field,
    /// the timestamp) and the body.
    pub fn report_json(&self, timestamp: Option<u64>) -> String {
        let header = json!({
            "tool": "gibbs-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "defaults_version": DEFAULTS_VERSION,
            "timestamp": timestamp,
        });
        let mut s = serde_json::to_string_pretty(&json!({ "header": header, "body": self.body }))
            .expect("report serializes");
        s.push('\n');
        s
    }

    /// The body alone, pretty-printed.
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("body serializes")
    }
}

/// SplitMix64 finalizer: derived seeds for grid points and sub-runs.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs a scenario; errors map to status 3 with the message in the body.
pub fn run(spec: &ExperimentSpec) -> Outcome {
    match run_inner(spec) {
        Ok(o) => o,
        Err(e) => Outcome::error(spec.scenario, &e),
    }
}

fn run_inner(spec: &ExperimentSpec) -> Result<Outcome> {
    let potential = spec.model.potential()?;
    let (status, results, rows) = match spec.scenario {
        Scenario::Certify => certify(&potential)?,
        Scenario::GcbTest => gcb_scenario(spec, &potential)?,
        Scenario::Blowup => blowup_scenario(spec, &potential)?,
        Scenario::FrequencyLemma => frequency_scenario(spec)?,
        Scenario::EntropyProbe => entropy_scenario(spec, &potential)?,
        Scenario::CriticalVariance => critical_variance(spec, &potential)?,
        Scenario::PhaseCoexistence => phase_coexistence(spec, &potential)?,
        Scenario::DeviationRates => deviation_scenario(spec, &potential)?,
    };
    let mut echo = spec.clone();
    echo.outputs = None;
    let body = json!({
        "scenario": spec.scenario.name(),
        "spec": echo,
        "status": status,
        "results": results,
    });
    let mut csv = format!("{}\n", spec.scenario.csv_header());
    for r in rows {
        csv.push_str(&r);
        csv.push('\n');
    }
    Ok(Outcome { status, body, csv })
}

type ScenarioResult = (Status, Value, Vec<String>);

fn certificate_d(spec: &ExperimentSpec, cert: &DobrushinReport) -> Option<f64> {
    spec.d.or(cert.d)
}

fn fmt_f(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f)
}

fn certify(potential: &Potential) -> Result<ScenarioResult> {
    let cert = gcb_certificate(potential)?;
    let rows = cert
        .row
        .iter()
        .map(|e| {
            let y: Vec<String> = e.y.iter().map(|c| c.to_string()).collect();
            format!("{},{}", y.join(" "), fmt_f(e.value))
        })
        .collect();
    let status = if cert.satisfied {
        Status::Pass
    } else {
        Status::Inconclusive
    };
    Ok((status, serde_json::to_value(&cert)?, rows))
}

fn enumerable(window: &Window) -> bool {
    pattern_space_size(window.volume(), window.alphabet()) <= u128::from(ENUMERATION_CAP)
}

fn sides_or(spec: &ExperimentSpec, default: &[usize]) -> Vec<usize> {
    if spec.sides.is_empty() {
        default.to_vec()
    } else {
        spec.sides.clone()
    }
}

fn gcb_scenario(spec: &ExperimentSpec, potential: &Potential) -> Result<ScenarioResult> {
    let cert = gcb_certificate(potential)?;
    let Some(d) = certificate_d(spec, &cert) else {
        return Ok((
            Status::Inconclusive,
            json!({ "certificate": cert, "note": "no certified D and none supplied; nothing to test" }),
            Vec::new(),
        ));
    };
    let mut status = Status::Pass;
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for (i, side) in sides_or(spec, &[5]).into_iter().enumerate() {
        let window = spec.window(side)?;
        let boundary = spec.boundary.boundary(window.alphabet());
        let obs = BoundObservable::new(&spec.observable.observable(&window)?, &window, &boundary)?;
        let osc = obs.oscillation()?;
        let data = if enumerable(&window) {
            Observations::exact(&FiniteGibbsMeasure::exact(potential, &window, &boundary)?, &obs)
        } else {
            let cfg = spec.chain_config(window.clone(), boundary, derive_seed(spec.seed, i as u64), cert.satisfied);
            Observations::sampled(&cfg, &obs)?
        };
        let report = gcb_test(&data, &osc, d, cert.d, spec.lambda.as_deref());
        let var = variance_bound_check(&data, d, osc.l2sq);
        status = status.combine(Status::from_verdict(report.verdict));
        if !var.ok {
            status = status.combine(Status::Falsified);
        }
        for p in &report.points {
            rows.push(format!(
                "{side},{},{},{},{},{}",
                fmt_f(p.lambda),
                fmt_f(p.lhs),
                fmt_f(p.stderr),
                fmt_f(p.rhs),
                serde_json::to_value(p.verdict)?.as_str().unwrap_or("")
            ));
        }
        results.push(json!({ "window": window.header(), "gcb": report, "variance": var }));
    }
    Ok((status, json!({ "certificate": cert, "windows": results }), rows))
}

fn blowup_scenario(spec: &ExperimentSpec, potential: &Potential) -> Result<ScenarioResult> {
    let cert = gcb_certificate(potential)?;
    let Some(d) = certificate_d(spec, &cert) else {
        return Ok((
            Status::Inconclusive,
            json!({ "certificate": cert, "note": "no certified D and none supplied; nothing to test" }),
            Vec::new(),
        ));
    };
    let epsilons = spec
        .epsilon
        .clone()
        .unwrap_or_else(|| (1..=10).map(|i| i as f64 / 10.0).collect());
    let sets = spec.sets.unwrap_or(20);
    let mut rows = Vec::new();
    let mut windows = Vec::new();
    let (mut checked, mut applicable, mut violations) = (0usize, 0usize, 0usize);
    for (wi, side) in sides_or(spec, &[7]).into_iter().enumerate() {
        let window = spec.window(side)?;
        let boundary = spec.boundary.boundary(window.alphabet());
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, wi as u64));
        let exact = pattern_space_size(window.volume(), window.alphabet())
            <= u128::from(BLOWUP_EXACT_CAP);
        let mut reports = Vec::new();
        if exact {
            let mu = FiniteGibbsMeasure::exact(potential, &window, &boundary)?;
            let states = mu.probs().len() as u64;
            for set in 0..sets {
                // Random set of random density in [0.05, 0.95].
                let density: f64 = rng.random_range(0.05..0.95);
                let mut c: Vec<u64> = (0..states).filter(|_| rng.random::<f64>() < density).collect();
                if c.is_empty() {
                    c.push(rng.random_range(0..states));
                }
                let mut r = blowup_bound_check_exact(&mu, &c, &epsilons, d)?;
                if c.len() > 256 {
                    r.iter_mut().for_each(|x| x.c.clear());
                }
                reports.push((set, r));
            }
        } else {
            let cfg = spec.chain_config(window.clone(), boundary, derive_seed(spec.seed, 1000 + wi as u64), cert.satisfied);
            let pilot_cfg = ChainConfig {
                seed: derive_seed(spec.seed, 2000 + wi as u64),
                ..cfg.clone()
            };
            let pilot = run_chains(&pilot_cfg)?;
            let main = run_chains(&cfg)?;
            for set in 0..sets {
                let mut c: Vec<Vec<Symbol>> = pilot
                    .samples
                    .iter()
                    .skip(set)
                    .step_by(sets.max(1))
                    .cloned()
                    .collect();
                c.sort();
                c.dedup();
                c.truncate(BLOWUP_SAMPLED_SET_CAP);
                if c.is_empty() {
                    continue;
                }
                match blowup_bound_check_sampled(&main, &c, &epsilons, d) {
                    Ok(r) => reports.push((set, r)),
                    Err(Error::ZeroMass) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
        for (set, r) in &reports {
            for x in r {
                checked += 1;
                applicable += usize::from(x.applicable);
                violations += usize::from(!x.ok);
                rows.push(format!(
                    "{side},{set},{},{},{},{},{},{},{}",
                    fmt_f(x.epsilon),
                    fmt_f(x.mass_c),
                    fmt_f(x.mass_blowup),
                    fmt_f(x.stderr),
                    fmt_f(x.bound),
                    x.applicable,
                    x.ok
                ));
            }
        }
        let reports: Vec<Value> = reports
            .into_iter()
            .map(|(set, r)| json!({ "set": set, "checks": r }))
            .collect();
        windows.push(json!({ "window": window.header(), "mode": if exact { "exact" } else { "sampled" }, "sets": reports }));
    }
    let status = if violations > 0 {
        Status::Falsified
    } else if applicable == 0 {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok((
        status,
        json!({
            "D": d,
            "certificate": cert,
            "checked": checked,
            "applicable": applicable,
            "violations": violations,
            "windows": windows,
        }),
        rows,
    ))
}

/// Per-Hamming-distance summary of frequency-bound checks.
#[derive(Clone, Copy, Debug, Default, Serialize)]
struct HammingBin {
    pairs: u64,
    max_tv: f64,
    bound: f64,
    violations: u64,
}

fn frequency_scenario(spec: &ExperimentSpec) -> Result<ScenarioResult> {
    let dim = spec.model.d;
    let q = spec.model.alphabet();
    let k = spec.k.unwrap_or(1);
    let eps = spec.epsilon.as_ref().and_then(|e| e.first().copied());
    let mut results = Vec::new();
    let mut rows = Vec::new();
    let mut status = Status::Pass;
    for (wi, side) in sides_or(spec, &[7]).into_iter().enumerate() {
        let window = Window::with_side(dim, side, Geometry::Free, q)?;
        let n = window
            .radius()
            .ok_or_else(|| invalid("frequency checks need odd window sides"))?;
        let volume = window.volume();
        let exhaustive = pattern_space_size(2 * volume, q) <= u128::from(ENUMERATION_CAP);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, wi as u64));
        let pairs: Vec<(Configuration, Configuration)> = if exhaustive {
            let states = pattern_space_size(volume, q) as u64;
            let configs: Vec<Configuration> = (0..states)
                .map(|c| Configuration::from_code(window.clone(), c, Boundary::None))
                .collect::<Result<_>>()?;
            let mut v = Vec::with_capacity(configs.len() * configs.len());
            for a in &configs {
                for b in &configs {
                    v.push((a.clone(), b.clone()));
                }
            }
            v
        } else {
            (0..spec.pairs.unwrap_or(100_000))
                .map(|_| {
                    let a: Vec<Symbol> = (0..volume).map(|_| rng.random_range(0..q) as Symbol).collect();
                    let mut b = a.clone();
                    // Mix of near and far pairs: flip a uniform number of sites.
                    let flips = rng.random_range(0..=volume);
                    for _ in 0..flips {
                        let i = rng.random_range(0..volume);
                        b[i] = ((b[i] as usize + rng.random_range(1..q)) % q) as Symbol;
                    }
                    Ok((
                        Configuration::new(window.clone(), a, Boundary::None)?,
                        Configuration::new(window.clone(), b, Boundary::None)?,
                    ))
                })
                .collect::<Result<_>>()?
        };
        let checks = pairs
            .par_iter()
            .map(|(a, b)| crate::observables::shields_bound_check(a, b, k, eps))
            .collect::<Result<Vec<_>>>()?;
        let mut bins: BTreeMap<usize, HammingBin> = BTreeMap::new();
        let (mut violations, mut half_checked, mut half_violations) = (0u64, 0u64, 0u64);
        for c in &checks {
            let bin = bins.entry(c.hamming).or_default();
            bin.pairs += 1;
            bin.max_tv = bin.max_tv.max(c.tv);
            bin.bound = c.bound;
            if !c.ok {
                bin.violations += 1;
                violations += 1;
            }
            if let Some(ok) = c.half_epsilon {
                half_checked += 1;
                half_violations += u64::from(!ok);
            }
        }
        if violations + half_violations > 0 {
            status = Status::Falsified;
        }
        for (h, b) in &bins {
            rows.push(format!("{h},{},{},{}", b.pairs, fmt_f(b.max_tv), fmt_f(b.bound)));
        }
        results.push(json!({
            "window": window.header(),
            "n": n,
            "k": k,
            "mode": if exhaustive { "exhaustive" } else { "sampled" },
            "pairs": checks.len(),
            "violations": violations,
            "n_breve": n_breve(dim, k),
            "epsilon": eps,
            "half_epsilon_checked": half_checked,
            "half_epsilon_violations": half_violations,
            "by_hamming": bins,
        }));
    }
    Ok((status, json!({ "windows": results }), rows))
}

fn entropy_scenario(spec: &ExperimentSpec, potential: &Potential) -> Result<ScenarioResult> {
    let q = potential.alphabet();
    let nu = MeasureSpec {
        potential,
        boundary: BoundarySpec::Minus.boundary(q),
    };
    let mu = MeasureSpec {
        potential,
        boundary: BoundarySpec::Plus.boundary(q),
    };
    let report = per_site_entropy_sequence(&nu, &mu, spec.model.d, Geometry::Fixed, &sides_or(spec, &[3, 4]))?;
    let want = spec.expect.unwrap_or(Expectation::Decreasing);
    let status = match (want, report.trend) {
        (Expectation::Decreasing, Trend::Decreasing)
        | (Expectation::Increasing, Trend::Increasing)
        | (Expectation::Flat, Trend::Constant) => Status::Pass,
        _ => Status::Inconclusive,
    };
    let rows = report.to_csv().lines().skip(1).map(str::to_string).collect();
    Ok((
        status,
        json!({
            "nu": "minus boundary",
            "mu": "plus boundary",
            "entropy": report,
            "note": "finite-volume surrogate measures; the sequence is a trend, not a limit",
        }),
        rows,
    ))
}

/// `Var(Σ ω_x)/|Λ|` per window from per-chain magnetization series.
#[derive(Clone, Debug, Serialize)]
struct VariancePoint {
    side: usize,
    volume: usize,
    var_per_site: f64,
    stderr: f64,
    ess: f64,
    samples: usize,
}

fn critical_variance(spec: &ExperimentSpec, potential: &Potential) -> Result<ScenarioResult> {
    let cert = gcb_certificate(potential)?;
    let d = certificate_d(spec, &cert);
    let ceiling = d.map(|d| 8.0 * d);
    let want = spec.expect.unwrap_or(if cert.satisfied {
        Expectation::Flat
    } else {
        Expectation::Increasing
    });
    let mut points = Vec::new();
    for (i, side) in sides_or(spec, &[9, 17, 33, 65]).into_iter().enumerate() {
        let window = spec.window(side)?;
        let boundary = spec.boundary.boundary(window.alphabet());
        let cfg = spec.chain_config(window.clone(), boundary, derive_seed(spec.seed, i as u64), cert.satisfied);
        let chains = run_chains_observe(&cfg, |s| s.iter().map(|&x| ising_value(x)).sum::<f64>())?;
        let v = window.volume() as f64;
        let all: Vec<f64> = chains.iter().flatten().copied().collect();
        let (_, se) = batch_statistic(&chains, variance);
        let squares: Vec<Vec<f64>> = chains.iter().map(|c| c.iter().map(|m| m * m).collect()).collect();
        points.push(VariancePoint {
            side,
            volume: window.volume(),
            var_per_site: variance(&all) / v,
            stderr: se / v,
            ess: squares.iter().map(|c| effective_sample_size(c)).sum(),
            samples: all.len(),
        });
    }
    let steps: Vec<Value> = points
        .windows(2)
        .map(|w| {
            let diff = w[1].var_per_site - w[0].var_per_site;
            let sigma = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            json!({ "from": w[0].side, "to": w[1].side, "diff": diff, "sigma": sigma, "z": diff / sigma })
        })
        .collect();
    let z: Vec<f64> = steps.iter().map(|s| s["z"].as_f64().unwrap_or(f64::NAN)).collect();
    let over_ceiling = ceiling.is_some_and(|c| {
        points
            .iter()
            .any(|p| p.var_per_site > c + SIGMA_MULTIPLIER * p.stderr)
    });
    let status = match want {
        Expectation::Increasing => {
            if z.iter().all(|&z| z > SIGMA_MULTIPLIER) {
                Status::Pass
            } else if z.iter().any(|&z| z < -SIGMA_MULTIPLIER) {
                Status::Falsified
            } else {
                Status::Inconclusive
            }
        }
        Expectation::Flat => {
            if over_ceiling {
                Status::Falsified
            } else if z.iter().all(|z| z.abs() <= SIGMA_MULTIPLIER) {
                Status::Pass
            } else {
                Status::Inconclusive
            }
        }
        Expectation::Decreasing => {
            if z.iter().all(|&z| z < -SIGMA_MULTIPLIER) {
                Status::Pass
            } else {
                Status::Inconclusive
            }
        }
    };
    let rows = points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{}",
                p.side,
                p.volume,
                fmt_f(p.var_per_site),
                fmt_f(p.stderr),
                fmt_f(p.ess),
                fmt_opt(ceiling)
            )
        })
        .collect();
    Ok((
        status,
        json!({
            "beta": spec.model.beta,
            "certificate": cert,
            "D": d,
            "ceiling_8D": ceiling,
            "expect": want,
            "over_ceiling": over_ceiling,
            "points": points,
            "steps": steps,
        }),
        rows,
    ))
}

fn phase_coexistence(spec: &ExperimentSpec, potential: &Potential) -> Result<ScenarioResult> {
    let q = potential.alphabet();
    if q != 2 {
        return Err(invalid("phase-coexistence uses ±1 magnetization"));
    }
    let dim = spec.model.d;
    let side = sides_or(spec, &[16])[0];
    let cert = gcb_certificate(potential)?;
    let mut rows = Vec::new();

    // (a) sampled magnetization under + and − boundaries.
    let mut phases = Vec::new();
    for (i, b) in [BoundarySpec::Plus, BoundarySpec::Minus].into_iter().enumerate() {
        let window = Window::with_side(dim, side, Geometry::Fixed, q)?;
        let cfg = spec.chain_config(window.clone(), b.boundary(q), derive_seed(spec.seed, i as u64), cert.satisfied);
        let v = window.volume() as f64;
        let chains = run_chains_observe(&cfg, |s| s.iter().map(|&x| ising_value(x)).sum::<f64>() / v)?;
        let est = estimate_mean(&chains);
        rows.push(format!(
            "a,{side},mean_magnetization_{},{},{}",
            if i == 0 { "plus" } else { "minus" },
            fmt_f(est.value),
            fmt_f(est.stderr)
        ));
        phases.push(est);
    }
    let (p, m) = (phases[0], phases[1]);
    let sigma = (p.stderr.powi(2) + m.stderr.powi(2)).sqrt();
    let separation = (p.value - m.value).abs() / sigma;
    let a_ok = p.value > 0.5 && m.value < -0.5 && separation > 6.0;

    // (b) exact per-site relative entropy between the boundary surrogates.
    let exact_sides = spec.exact_sides.clone().unwrap_or_else(|| vec![3, 4]);
    let entropy = per_site_entropy_sequence(
        &MeasureSpec {
            potential,
            boundary: BoundarySpec::Minus.boundary(q),
        },
        &MeasureSpec {
            potential,
            boundary: BoundarySpec::Plus.boundary(q),
        },
        dim,
        Geometry::Fixed,
        &exact_sides,
    )?;
    for pt in &entropy.points {
        rows.push(format!("b,{},per_site_entropy,{},0", pt.side, fmt_f(pt.per_site)));
    }
    let b_ok = entropy.trend == Trend::Decreasing;

    // (c) exact rates of {block mean ≤ 0} under the + boundary.
    let event = DeviationEvent::AtMost { threshold: 0.0 };
    let f = LocalFunction::spin(Site::origin(dim));
    let rates = exact_sides
        .iter()
        .map(|&s| {
            let window = Window::with_side(dim, s, Geometry::Fixed, q)?;
            let boundary = BoundarySpec::Plus.boundary(q);
            let mu = FiniteGibbsMeasure::exact(potential, &window, &boundary)?;
            let block = BoundObservable::new(&Observable::block(f.clone(), &window), &window, &boundary)?;
            Ok(deviation_point_exact(&mu, &block, &event, None))
        })
        .collect::<Result<Vec<DeviationPoint>>>()?;
    for (s, r) in exact_sides.iter().zip(&rates) {
        rows.push(format!("c,{s},rate_block_mean_le_0,{},0", fmt_opt(r.rate)));
    }
    let c_ok = strictly_decreasing(&rates);

    let status = if a_ok && b_ok && c_ok {
        Status::Pass
    } else {
        Status::Inconclusive
    };
    Ok((
        status,
        json!({
            "beta": spec.model.beta,
            "certificate": cert,
            "magnetization": {
                "side": side,
                "plus": p,
                "minus": m,
                "separation_sigma": separation,
                "ok": a_ok,
            },
            "entropy": { "report": entropy, "ok": b_ok },
            "rates": { "points": rates, "ok": c_ok },
            "note": "finite-volume trend signatures stand in for infinite-volume statements, which are not reproducible at desk scale",
        }),
        rows,
    ))
}

fn strictly_decreasing(points: &[DeviationPoint]) -> bool {
    points.windows(2).all(|w| match (w[0].rate, w[1].rate) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    })
}

fn deviation_scenario(spec: &ExperimentSpec, potential: &Potential) -> Result<ScenarioResult> {
    let cert = gcb_certificate(potential)?;
    let d = certificate_d(spec, &cert);
    let dim = spec.model.d;
    let f = spec.observable.local_function(dim, potential.alphabet())?;
    let l1 = crate::observables::oscillation_vector(&f).l1;
    let epsilon = spec.epsilon.as_ref().and_then(|e| e.first().copied()).unwrap_or(0.6);
    let event_spec = spec.event.unwrap_or(EventSpec::Upper { base: None });
    let mut points = Vec::new();
    for (i, side) in sides_or(spec, &[3, 5, 7]).into_iter().enumerate() {
        let window = spec.window(side)?;
        let boundary = spec.boundary.boundary(window.alphabet());
        let block = BoundObservable::new(&Observable::block(f.clone(), &window), &window, &boundary)?;
        let v = window.volume() as f64;
        let exact = enumerable(&window);
        let mu = if exact {
            Some(FiniteGibbsMeasure::exact(potential, &window, &boundary)?)
        } else {
            None
        };
        let cfg = spec.chain_config(window.clone(), boundary.clone(), derive_seed(spec.seed, i as u64), cert.satisfied);
        let mean_of_f = |cfg: &ChainConfig| -> Result<f64> {
            match &mu {
                Some(mu) => Ok(mu.expectation(|s| block.eval(s)) / v),
                None => Ok(estimate_mean(&run_chains_observe(cfg, |s| block.eval(s) / v)?).value),
            }
        };
        let (event, floor_inputs) = match event_spec {
            EventSpec::Upper { base } => {
                let base = match base {
                    Some(b) => b,
                    None => mean_of_f(&ChainConfig {
                        seed: derive_seed(spec.seed, 1000 + i as u64),
                        ..cfg.clone()
                    })?,
                };
                (DeviationEvent::Upper { base, epsilon }, d.map(|d| (d, l1)))
            }
            EventSpec::Interval { center } => {
                // The floor transfers only when the interval lies inside the
                // upper event.
                let base = mean_of_f(&ChainConfig {
                    seed: derive_seed(spec.seed, 1000 + i as u64),
                    ..cfg.clone()
                })?;
                let inside = center - epsilon / 3.0 >= base + epsilon / 3.0;
                (
                    DeviationEvent::Interval { center, epsilon },
                    d.filter(|_| inside).map(|d| (d, l1)),
                )
            }
            EventSpec::AtMost { threshold } => (DeviationEvent::AtMost { threshold }, None),
        };
        let point = match &mu {
            Some(mu) => deviation_point_exact(mu, &block, &event, floor_inputs),
            None => deviation_point_sampled(&cfg, &block, &event, floor_inputs)?,
        };
        points.push((side, exact, event, point));
    }
    let any_bad = points.iter().any(|p| p.3.ok == Some(false));
    let pts: Vec<DeviationPoint> = points.iter().map(|p| p.3.clone()).collect();
    let trend_ok = match spec.expect {
        Some(Expectation::Decreasing) => strictly_decreasing(&pts),
        Some(Expectation::Increasing) => pts.windows(2).all(|w| match (w[0].rate, w[1].rate) {
            (Some(a), Some(b)) => b > a,
            _ => false,
        }),
        _ => true,
    };
    let status = if any_bad {
        Status::Falsified
    } else if !trend_ok {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let rows = points
        .iter()
        .map(|(side, _, _, p)| {
            format!(
                "{side},{},{},{},{},{},{}",
                p.volume,
                fmt_f(p.p),
                fmt_f(p.stderr),
                p.rate.map_or_else(|| "inf".to_string(), fmt_f),
                fmt_opt(p.floor),
                p.ok.map_or_else(String::new, |b| b.to_string())
            )
        })
        .collect();
    let results: Vec<Value> = points
        .into_iter()
        .map(|(side, exact, event, p)| {
            json!({ "side": side, "mode": if exact { "exact" } else { "sampled" }, "event": event, "point": p })
        })
        .collect();
    Ok((
        status,
        json!({
            "function": f.name(),
            "l1": l1,
            "epsilon": epsilon,
            "D": d,
            "certificate": cert,
            "expect": spec.expect,
            "points": results,
        }),
        rows,
    ))
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Outcome,
}

/// Runs `spec` once per grid value of `param` with seeds derived from the
/// spec seed and the grid index; grid points run in parallel.
pub fn sweep(spec: &ExperimentSpec, param: SweepParam, grid: &[f64]) -> (Status, Vec<SweepPoint>) {
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let outcome = match spec.with_param(param, value, derive_seed(spec.seed, i as u64)) {
                Ok(s) => run(&s),
                Err(e) => Outcome::error(spec.scenario, &e),
            };
            SweepPoint { value, outcome }
        })
        .collect();
    let status = points
        .iter()
        .fold(Status::Pass, |acc, p| acc.combine(p.outcome.status));
    (status, points)
}

/// Concatenated sweep outputs: a JSON body listing every point and a CSV
/// with `param,value` prepended to each scenario row.
pub fn sweep_outcome(spec: &ExperimentSpec, param: SweepParam, grid: &[f64]) -> Outcome {
    let (status, points) = sweep(spec, param, grid);
    let name = serde_json::to_value(param)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let mut csv = format!("param,value,{}\n", spec.scenario.csv_header());
    for p in &points {
        for line in p.outcome.csv.lines().skip(1) {
            let _ = writeln!(csv, "{name},{},{line}", fmt_f(p.value));
        }
    }
    let body = json!({
        "sweep": { "param": name, "grid": grid },
        "status": status,
        "points": points
            .iter()
            .map(|p| json!({ "value": p.value, "exit": p.outcome.status.exit_code(), "report": p.outcome.body }))
            .collect::<Vec<_>>(),
    });
    Outcome { status, body, csv }
}
