//! Exact and Monte Carlo checks of the Gaussian concentration bound, its
//! tail and variance corollaries, Hamming blow-ups and volume deviation
//! rates.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::defaults::{
    BLOWUP_EXACT_CAP, BLOWUP_SAMPLED_SET_CAP, EVENT_MARGIN_DIVISOR, EXACT_TOLERANCE,
    LAMBDA_BASE_GRID, LAMBDA_OSCILLATION_CAP, SIGMA_MULTIPLIER, VOLUME_DEVIATION_CONSTANT,
};
use crate::error::{invalid, Error, Result};
use crate::lattice::{pattern_space_size, symbol_distance, Symbol, Window};
use crate::observables::{BoundObservable, OscillationVector};
use crate::sampler::{event_estimate, run_chains_observe, ChainConfig, SampleSet};
use crate::specification::{log_sum_exp, FiniteGibbsMeasure};
use crate::stats::{batch_statistic, effective_sample_size, mean, variance};

/// Values of an observable under a measure: an exact table or per-chain
/// Monte Carlo series.
#[derive(Clone, Debug, PartialEq)]
pub enum Observations {
    Exact { values: Vec<f64>, probs: Vec<f64> },
    Sampled { chains: Vec<Vec<f64>> },
}

impl Observations {
    pub fn exact(mu: &FiniteGibbsMeasure, obs: &BoundObservable) -> Self {
        let mut values = Vec::with_capacity(mu.probs().len());
        mu.for_each_state(|_, s, _| values.push(obs.eval(s)));
        Observations::Exact {
            values,
            probs: mu.probs().to_vec(),
        }
    }

    pub fn sampled(cfg: &ChainConfig, obs: &BoundObservable) -> Result<Self> {
        Ok(Observations::Sampled {
            chains: run_chains_observe(cfg, |s| obs.eval(s))?,
        })
    }

    pub fn from_samples(set: &SampleSet, obs: &BoundObservable) -> Self {
        Observations::Sampled {
            chains: set.series(|s| obs.eval(s)),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Observations::Exact { .. })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Observations::Exact { values, probs } => {
                let total: f64 = probs.iter().sum();
                values.iter().zip(probs).map(|(v, p)| v * p).sum::<f64>() / total
            }
            Observations::Sampled { chains } => {
                let n: usize = chains.iter().map(Vec::len).sum();
                chains.iter().flatten().sum::<f64>() / n as f64
            }
        }
    }

    /// Summed per-chain effective sample size (`None` when exact).
    pub fn ess(&self) -> Option<f64> {
        match self {
            Observations::Exact { .. } => None,
            Observations::Sampled { chains } => {
                Some(chains.iter().map(|c| effective_sample_size(c)).sum())
            }
        }
    }

    /// `E[g(F)]` with its batch-means standard error (0 when exact).
    fn expect(&self, g: impl Fn(f64) -> f64) -> (f64, f64) {
        match self {
            Observations::Exact { values, probs } => {
                (values.iter().zip(probs).map(|(v, p)| p * g(*v)).sum(), 0.0)
            }
            Observations::Sampled { chains } => {
                let mapped: Vec<Vec<f64>> =
                    chains.iter().map(|c| c.iter().map(|&v| g(v)).collect()).collect();
                let n: usize = mapped.iter().map(Vec::len).sum();
                let value = mapped.iter().flatten().sum::<f64>() / n as f64;
                (value, batch_statistic(&mapped, mean).1)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Worst of a list: any fail, else any inconclusive, else pass.
    pub fn combine(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        vs.into_iter().fold(Verdict::Pass, |acc, v| match (acc, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        })
    }

    /// Exact inequalities pass or fail; estimated ones fail only beyond
    /// three standard errors.
    fn judge(lhs: f64, rhs: f64, stderr: f64, exact: bool) -> Verdict {
        let tol = EXACT_TOLERANCE * rhs.abs().max(1.0);
        if lhs <= rhs + tol {
            Verdict::Pass
        } else if exact || lhs > rhs + SIGMA_MULTIPLIER * stderr {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

/// One λ of a GCB test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcbPoint {
    pub lambda: f64,
    /// `log E[exp(λ(F - E F))]` (empirical mean in sampled mode).
    pub lhs: f64,
    pub stderr: f64,
    /// `D λ² ‖δF‖₂²`.
    pub rhs: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcbTestReport {
    #[serde(rename = "D_certified")]
    pub d_certified: Option<f64>,
    #[serde(rename = "D")]
    pub d: f64,
    pub mode: String,
    pub mean: f64,
    pub l1: f64,
    pub l2sq: f64,
    pub oscillation_exact: bool,
    pub ess: Option<f64>,
    pub points: Vec<GcbPoint>,
    pub verdict: Verdict,
}

/// `±base/‖δF‖₂`, dropping points with `|λ| ‖δF‖₁ > 20`.
pub fn default_lambda_grid(osc: &OscillationVector) -> Vec<f64> {
    let scale = if osc.l2sq > 0.0 { osc.l2sq.sqrt() } else { 1.0 };
    let mut grid: Vec<f64> = LAMBDA_BASE_GRID
        .iter()
        .rev()
        .map(|b| -b / scale)
        .chain(LAMBDA_BASE_GRID.iter().map(|b| b / scale))
        .collect();
    grid.retain(|l| l.abs() * osc.l1 <= LAMBDA_OSCILLATION_CAP);
    grid
}

/// Tests `log E[exp(λ(F - EF))] ≤ D λ² ‖δF‖₂²` on a λ grid.
pub fn gcb_test(
    data: &Observations,
    osc: &OscillationVector,
    d: f64,
    d_certified: Option<f64>,
    grid: Option<&[f64]>,
) -> GcbTestReport {
    let grid = grid.map_or_else(|| default_lambda_grid(osc), <[f64]>::to_vec);
    let m = data.mean();
    let points: Vec<GcbPoint> = grid
        .iter()
        .map(|&lambda| {
            let rhs = d * lambda * lambda * osc.l2sq;
            let (lhs, stderr) = match data {
                Observations::Exact { values, probs } => {
                    let xs: Vec<f64> = values
                        .iter()
                        .zip(probs)
                        .filter(|(_, &p)| p > 0.0)
                        .map(|(v, p)| lambda * (v - m) + p.ln())
                        .collect();
                    let log_total = probs.iter().sum::<f64>().ln();
                    (log_sum_exp(&xs) - log_total, 0.0)
                }
                Observations::Sampled { .. } => {
                    let (mgf, se) = data.expect(|v| (lambda * (v - m)).exp());
                    // Delta method on the logarithm.
                    (mgf.ln(), se / mgf)
                }
            };
            let verdict = if osc.l2sq == 0.0 {
                Verdict::Pass
            } else {
                Verdict::judge(lhs, rhs, stderr, data.is_exact())
            };
            GcbPoint {
                lambda,
                lhs,
                stderr,
                rhs,
                verdict,
            }
        })
        .collect();
    let verdict = Verdict::combine(points.iter().map(|p| p.verdict));
    GcbTestReport {
        d_certified,
        d,
        mode: if data.is_exact() { "exact" } else { "sampled" }.into(),
        mean: m,
        l1: osc.l1,
        l2sq: osc.l2sq,
        oscillation_exact: osc.exact,
        ess: data.ess(),
        points,
        verdict,
    }
}

/// `exp(-u² / (4 D ‖δF‖₂²))`.
pub fn tail_bound(d: f64, u: f64, l2sq: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(invalid(format!("tail threshold must be positive, got {u}")));
    }
    if !(l2sq > 0.0) || !(d > 0.0) {
        return Err(invalid("tail bound needs D > 0 and ‖δF‖₂² > 0"));
    }
    Ok((-u * u / (4.0 * d * l2sq)).exp())
}

/// Union bound for `|F - EF| ≥ u`.
pub fn two_sided_tail_bound(d: f64, u: f64, l2sq: f64) -> Result<f64> {
    Ok(2.0 * tail_bound(d, u, l2sq)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub u: f64,
    pub exceedance: f64,
    pub stderr: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

/// Compares `P(F - EF ≥ u)` with the one-sided tail bound.
pub fn tail_check(data: &Observations, d: f64, l2sq: f64, u: f64) -> Result<TailCheck> {
    let bound = tail_bound(d, u, l2sq)?;
    let m = data.mean();
    let (exceedance, stderr) = data.expect(|v| if v - m >= u { 1.0 } else { 0.0 });
    Ok(TailCheck {
        u,
        exceedance,
        stderr,
        bound,
        verdict: Verdict::judge(exceedance, bound, stderr, data.is_exact()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub var: f64,
    pub stderr: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `Var(F) ≤ 2 D ‖δF‖₂²`, with `3σ` slack for estimates.
pub fn variance_bound_check(data: &Observations, d: f64, l2sq: f64) -> VarianceCheck {
    let bound = 2.0 * d * l2sq;
    let (var, stderr) = match data {
        Observations::Exact { .. } => {
            let m = data.mean();
            (data.expect(|v| (v - m) * (v - m)).0, 0.0)
        }
        Observations::Sampled { chains } => {
            let all: Vec<f64> = chains.iter().flatten().copied().collect();
            (variance(&all), batch_statistic(chains, variance).1)
        }
    };
    let ok = Verdict::judge(var, bound, stderr, data.is_exact()) != Verdict::Fail;
    VarianceCheck {
        var,
        stderr,
        bound,
        ok,
    }
}

/// Hamming distance from every configuration code of the window to the
/// set `C`, by multi-source breadth-first search over single-site changes.
pub fn hamming_distances_to_set(window: &Window, c: &[u64]) -> Result<Vec<u32>> {
    let m = window.volume();
    let q = window.alphabet() as u64;
    let states = pattern_space_size(m, q as usize);
    if states > u128::from(BLOWUP_EXACT_CAP) {
        return Err(Error::EnumerationCap {
            states,
            cap: u128::from(BLOWUP_EXACT_CAP),
        });
    }
    if c.is_empty() {
        return Err(Error::EmptySet);
    }
    let states = states as u64;
    let mut dist = vec![u32::MAX; states as usize];
    let mut queue = VecDeque::new();
    for &code in c {
        if code >= states {
            return Err(Error::CodeOutOfRange {
                code,
                size: u128::from(states),
            });
        }
        if dist[code as usize] != 0 {
            dist[code as usize] = 0;
            queue.push_back(code);
        }
    }
    while let Some(code) = queue.pop_front() {
        let next = dist[code as usize] + 1;
        let mut place = 1u64;
        for _ in 0..m {
            let digit = (code / place) % q;
            for b in 0..q {
                if b != digit {
                    let other = code - digit * place + b * place;
                    if dist[other as usize] == u32::MAX {
                        dist[other as usize] = next;
                        queue.push_back(other);
                    }
                }
            }
            place *= q;
        }
    }
    Ok(dist)
}

/// `⟨C⟩_ε = {ω : d̄(ω, C) < ε |Λ|}` as a sorted code list.
pub fn blowup_set(window: &Window, c: &[u64], epsilon: f64) -> Result<Vec<u64>> {
    let limit = epsilon * window.volume() as f64;
    Ok(hamming_distances_to_set(window, c)?
        .iter()
        .enumerate()
        .filter(|(_, &d)| (d as f64) < limit)
        .map(|(i, _)| i as u64)
        .collect())
}

/// `2 √(D log(1/μ([C])) / |Λ|)`: the bound applies for `ε` above this.
pub fn blowup_threshold(d: f64, volume: usize, mass_c: f64) -> f64 {
    2.0 * (d * (1.0 / mass_c).ln() / volume as f64).sqrt()
}

/// `1 - exp(-(|Λ|/4D)(ε - threshold)²)` and whether it applies.
pub fn blowup_bound(d: f64, volume: usize, mass_c: f64, epsilon: f64) -> (f64, bool) {
    let t = blowup_threshold(d, volume, mass_c);
    let gap = epsilon - t;
    let bound = 1.0 - (-(volume as f64) / (4.0 * d) * gap * gap).exp();
    (bound, epsilon > t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub window: String,
    pub c_size: usize,
    #[serde(rename = "C", skip_serializing_if = "Vec::is_empty", default)]
    pub c: Vec<u64>,
    pub epsilon: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub mass_c: f64,
    pub mass_blowup: f64,
    pub stderr: f64,
    pub bound: f64,
    pub threshold: f64,
    pub applicable: bool,
    pub ok: bool,
}

/// Exact blow-up check for every `ε` in `epsilons` (one BFS for all).
pub fn blowup_bound_check_exact(
    mu: &FiniteGibbsMeasure,
    c: &[u64],
    epsilons: &[f64],
    d: f64,
) -> Result<Vec<BlowupReport>> {
    let window = mu.window();
    let dist = hamming_distances_to_set(window, c)?;
    let probs = mu.probs();
    let mass_c: f64 = dist
        .iter()
        .zip(probs)
        .filter(|(&x, _)| x == 0)
        .map(|(_, p)| p)
        .sum();
    if !(mass_c > 0.0) {
        return Err(Error::ZeroMass);
    }
    let volume = window.volume();
    let mut sorted_c = c.to_vec();
    sorted_c.sort_unstable();
    sorted_c.dedup();
    Ok(epsilons
        .iter()
        .map(|&epsilon| {
            let limit = epsilon * volume as f64;
            let mass_blowup: f64 = dist
                .iter()
                .zip(probs)
                .filter(|(&x, _)| (x as f64) < limit)
                .map(|(_, p)| p)
                .sum();
            let (bound, applicable) = blowup_bound(d, volume, mass_c, epsilon);
            BlowupReport {
                window: window.header(),
                c_size: sorted_c.len(),
                c: sorted_c.clone(),
                epsilon,
                d,
                mass_c,
                mass_blowup,
                stderr: 0.0,
                bound,
                threshold: blowup_threshold(d, volume, mass_c),
                applicable,
                ok: !applicable || mass_blowup >= bound - EXACT_TOLERANCE,
            }
        })
        .collect())
}

/// Sampled blow-up check: `μ([C])` and `μ(⟨C⟩_ε)` are estimated from the
/// samples, `d̄(ω, C)` by scanning `C` (at most 2^16 configurations).
pub fn blowup_bound_check_sampled(
    set: &SampleSet,
    c: &[Vec<Symbol>],
    epsilons: &[f64],
    d: f64,
) -> Result<Vec<BlowupReport>> {
    if c.is_empty() {
        return Err(Error::EmptySet);
    }
    if c.len() > BLOWUP_SAMPLED_SET_CAP {
        return Err(Error::ResourceCap(format!(
            "sampled blow-up scans at most {BLOWUP_SAMPLED_SET_CAP} configurations"
        )));
    }
    let window = &set.config.window;
    let volume = window.volume();
    let dist: Vec<Vec<f64>> = set.series(|s| {
        c.iter()
            .map(|x| symbol_distance(s, x))
            .min()
            .expect("non-empty") as f64
    });
    let in_c: Vec<Vec<f64>> = dist
        .iter()
        .map(|ch| ch.iter().map(|&x| if x == 0.0 { 1.0 } else { 0.0 }).collect())
        .collect();
    let mass_c = event_estimate(&in_c).p;
    if mass_c == 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(epsilons
        .iter()
        .map(|&epsilon| {
            let limit = epsilon * volume as f64;
            let hits: Vec<Vec<f64>> = dist
                .iter()
                .map(|ch| ch.iter().map(|&x| if x < limit { 1.0 } else { 0.0 }).collect())
                .collect();
            let est = event_estimate(&hits);
            let (bound, applicable) = blowup_bound(d, volume, mass_c, epsilon);
            BlowupReport {
                window: window.header(),
                c_size: c.len(),
                c: Vec::new(),
                epsilon,
                d,
                mass_c,
                mass_blowup: est.p,
                stderr: est.stderr,
                bound,
                threshold: blowup_threshold(d, volume, mass_c),
                applicable,
                ok: !applicable || est.p >= bound - SIGMA_MULTIPLIER * est.stderr,
            }
        })
        .collect())
}

/// Volume deviation events on the block mean `S_Λ f / |Λ|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DeviationEvent {
    /// `mean ≥ base + ε/3`, with `base = E_μ f`.
    Upper { base: f64, epsilon: f64 },
    /// `mean ∈ ]center - ε/3, center + ε/3[`, with `center = E_μ' f`.
    Interval { center: f64, epsilon: f64 },
    /// `mean ≤ threshold`.
    AtMost { threshold: f64 },
}

impl DeviationEvent {
    pub fn contains(&self, block_mean: f64) -> bool {
        match *self {
            DeviationEvent::Upper { base, epsilon } => {
                block_mean >= base + epsilon / EVENT_MARGIN_DIVISOR
            }
            DeviationEvent::Interval { center, epsilon } => {
                let m = epsilon / EVENT_MARGIN_DIVISOR;
                block_mean > center - m && block_mean < center + m
            }
            DeviationEvent::AtMost { threshold } => block_mean <= threshold,
        }
    }

    fn epsilon(&self) -> Option<f64> {
        match *self {
            DeviationEvent::Upper { epsilon, .. } | DeviationEvent::Interval { epsilon, .. } => {
                Some(epsilon)
            }
            DeviationEvent::AtMost { .. } => None,
        }
    }
}

/// `ε² / (36 D ‖δf‖₁²)`.
pub fn volume_deviation_floor(epsilon: f64, d: f64, l1: f64) -> f64 {
    epsilon * epsilon / (VOLUME_DEVIATION_CONSTANT * d * l1 * l1)
}

/// One window of a deviation-rate scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub window: String,
    pub volume: usize,
    pub p: f64,
    pub stderr: f64,
    /// `-log p / |Λ|`; `None` encodes `+∞` (no configuration in the event).
    pub rate: Option<f64>,
    /// One-sided `3/n` bound on `p` when no sample hit the event.
    pub upper_bound: Option<f64>,
    /// `ε² / (36 D ‖δf‖₁²)` when a certified `D` is supplied.
    pub floor: Option<f64>,
    /// `rate ≥ floor` (minus slack for estimates), when the floor applies.
    pub ok: Option<bool>,
}

fn deviation_point(
    window: &Window,
    p: f64,
    stderr: f64,
    upper_bound: Option<f64>,
    event: &DeviationEvent,
    floor_inputs: Option<(f64, f64)>,
) -> DeviationPoint {
    let volume = window.volume() as f64;
    let rate = (p > 0.0).then(|| -p.ln() / volume);
    let floor = match (event, floor_inputs) {
        (DeviationEvent::Upper { .. } | DeviationEvent::Interval { .. }, Some((d, l1))) => {
            event.epsilon().map(|e| volume_deviation_floor(e, d, l1))
        }
        _ => None,
    };
    // The rate clears the floor iff p ≤ exp(-floor |Λ|); estimates may
    // exceed that by up to 3σ.
    let ok = floor.map(|fl| {
        p - SIGMA_MULTIPLIER * stderr <= (-fl * volume).exp() * (1.0 + EXACT_TOLERANCE)
    });
    DeviationPoint {
        window: window.header(),
        volume: window.volume(),
        p,
        stderr,
        rate,
        upper_bound,
        floor,
        ok,
    }
}

/// Exact event probability under `μ` for the block mean of `obs`, which
/// must be the block sum over the window.
pub fn deviation_point_exact(
    mu: &FiniteGibbsMeasure,
    block: &BoundObservable,
    event: &DeviationEvent,
    floor_inputs: Option<(f64, f64)>,
) -> DeviationPoint {
    let volume = mu.window().volume() as f64;
    let p = mu.expectation(|s| {
        if event.contains(block.eval(s) / volume) {
            1.0
        } else {
            0.0
        }
    });
    deviation_point(mu.window(), p, 0.0, None, event, floor_inputs)
}

/// Sampled event probability with batch-means error.
pub fn deviation_point_sampled(
    cfg: &ChainConfig,
    block: &BoundObservable,
    event: &DeviationEvent,
    floor_inputs: Option<(f64, f64)>,
) -> Result<DeviationPoint> {
    let volume = cfg.window.volume() as f64;
    let hits = run_chains_observe(cfg, |s| {
        if event.contains(block.eval(s) / volume) {
            1.0
        } else {
            0.0
        }
    })?;
    let est = event_estimate(&hits);
    Ok(deviation_point(
        &cfg.window,
        est.p,
        est.stderr,
        est.upper_bound,
        event,
        floor_inputs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dobrushin::gcb_certificate;
    use crate::lattice::{Boundary, Geometry, Site};
    use crate::observables::{LocalFunction, Observable};
    use crate::potential::Potential;

    fn measure(n: usize, beta: f64) -> FiniteGibbsMeasure {
        let w = Window::cube(1, n, Geometry::Fixed, 2).unwrap();
        FiniteGibbsMeasure::exact(&Potential::ising(1, beta, 0.0).unwrap(), &w, &Boundary::Uniform(1))
            .unwrap()
    }

    fn bind(mu: &FiniteGibbsMeasure, obs: &Observable) -> BoundObservable {
        BoundObservable::new(obs, mu.window(), mu.boundary()).unwrap()
    }

    #[test]
    fn fair_coin_mgf_matches_hoeffding() {
        let mu = measure(0, 0.0);
        let f = bind(&mu, &Observable::local(LocalFunction::spin(Site::origin(1))));
        let data = Observations::exact(&mu, &f);
        let osc = f.oscillation().unwrap();
        assert_eq!(osc.l2sq, 4.0);
        let r = gcb_test(&data, &osc, 0.125, None, None);
        assert_eq!(r.verdict, Verdict::Pass);
        for p in &r.points {
            // Independent oracle: log cosh λ ≤ λ²/2.
            assert!((p.lhs - p.lambda.cosh().ln()).abs() < 1e-14);
            assert!((p.rhs - 0.5 * p.lambda * p.lambda).abs() < 1e-14);
        }
        assert_eq!(r.points.len(), 10);
    }

    #[test]
    fn certified_constant_passes_exactly_on_short_chains() {
        for beta in [0.1, 0.2, 0.3] {
            let mu = measure(2, beta);
            let cert = gcb_certificate(&Potential::ising(1, beta, 0.0).unwrap()).unwrap();
            let d = cert.d.unwrap();
            let m = bind(&mu, &Observable::magnetization(mu.window()));
            let data = Observations::exact(&mu, &m);
            let osc = m.oscillation().unwrap();
            let r = gcb_test(&data, &osc, d, Some(d), None);
            assert_eq!(r.verdict, Verdict::Pass, "{beta}: {r:?}");
            assert!(variance_bound_check(&data, d, osc.l2sq).ok);
        }
    }

    #[test]
    fn constant_observable_is_trivial() {
        let mu = measure(1, 0.5);
        let c = bind(&mu, &Observable::local(LocalFunction::constant(1, 2, 3.0)));
        let data = Observations::exact(&mu, &c);
        let osc = c.oscillation().unwrap();
        let r = gcb_test(&data, &osc, 0.5, None, None);
        assert!(r.points.iter().all(|p| p.lhs.abs() < 1e-15 && p.verdict == Verdict::Pass), "{r:?}");
        let v = variance_bound_check(&data, 0.5, osc.l2sq);
        assert!(v.var.abs() < 1e-15 && v.bound == 0.0 && v.ok);
    }

    #[test]
    fn variance_equality_for_a_fair_coin() {
        let mu = measure(0, 0.0);
        let f = bind(&mu, &Observable::local(LocalFunction::spin(Site::origin(1))));
        let v = variance_bound_check(&Observations::exact(&mu, &f), 0.125, 4.0);
        assert!((v.var - 1.0).abs() < 1e-15 && v.bound == 1.0 && v.ok);
    }

    #[test]
    fn tail_bound_values() {
        assert!((tail_bound(0.125, 2.0, 4.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(
            two_sided_tail_bound(0.125, 2.0, 4.0).unwrap(),
            2.0 * tail_bound(0.125, 2.0, 4.0).unwrap()
        );
        let grid: Vec<f64> = [1.0, 5.0, 20.0, 80.0]
            .iter()
            .map(|&u| tail_bound(1.0, u, 1.0).unwrap())
            .collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]) && grid[3] < 1e-300);
        assert!(tail_bound(1.0, 0.0, 1.0).is_err());
        let mu = measure(0, 0.0);
        let f = bind(&mu, &Observable::local(LocalFunction::spin(Site::origin(1))));
        let t = tail_check(&Observations::exact(&mu, &f), 0.125, 4.0, 2.0).unwrap();
        assert_eq!(t.exceedance, 0.0);
        assert_eq!(t.verdict, Verdict::Pass);
    }

    #[test]
    fn blowup_set_examples() {
        let w = Window::cube(1, 1, Geometry::Free, 2).unwrap();
        assert!(blowup_set(&w, &[7], 0.0).unwrap().is_empty());
        assert_eq!(blowup_set(&w, &[7], 1e-9).unwrap(), vec![7]);
        assert_eq!(blowup_set(&w, &[7], 0.4).unwrap(), vec![3, 5, 6, 7]);
        // Strict inequality: the antipode sits at distance exactly |Λ|.
        assert_eq!(blowup_set(&w, &[7], 1.0).unwrap().len(), 7);
        assert_eq!(blowup_set(&w, &[7], 1.01).unwrap().len(), 8);
        assert!(matches!(blowup_set(&w, &[], 0.5), Err(Error::EmptySet)));
    }

    #[test]
    fn bfs_distances_match_direct_hamming() {
        let w = Window::cube(1, 2, Geometry::Free, 3).unwrap();
        let c = [5u64, 100, 200];
        let dist = hamming_distances_to_set(&w, &c).unwrap();
        for (code, &d) in dist.iter().enumerate() {
            let a = crate::lattice::decode(code as u64, 5, 3).unwrap();
            let direct = c
                .iter()
                .map(|&x| symbol_distance(&a, &crate::lattice::decode(x, 5, 3).unwrap()))
                .min()
                .unwrap();
            assert_eq!(d as usize, direct);
        }
    }

    #[test]
    fn full_space_blows_up_to_everything() {
        let mu = measure(1, 0.2);
        let all: Vec<u64> = (0..8).collect();
        let r = blowup_bound_check_exact(&mu, &all, &[0.1, 0.5], 1.0).unwrap();
        assert!(r.iter().all(|x| (x.mass_blowup - 1.0).abs() < 1e-12 && x.ok));
    }

    #[test]
    fn product_measure_half_set_blow_up() {
        let mu = measure(2, 0.0);
        let c: Vec<u64> = (0..32).filter(|x| x % 3 != 1).collect();
        let r = blowup_bound_check_exact(&mu, &c, &[0.9], 0.125).unwrap();
        assert!(r[0].applicable && r[0].ok, "{:?}", r[0]);
    }

    #[test]
    fn upper_deviation_rates_clear_the_floor_for_a_coin() {
        let f = LocalFunction::spin(Site::origin(1));
        let event = DeviationEvent::Upper {
            base: 0.0,
            epsilon: 0.6,
        };
        for n in 1..=3 {
            let mu = measure(n, 0.0);
            let block = bind(&mu, &Observable::block(f.clone(), mu.window()));
            let pt = deviation_point_exact(&mu, &block, &event, Some((0.125, 2.0)));
            // Binomial oracle: P(#plus ≥ m) with mean ≥ 0.2.
            let size = 2 * n + 1;
            let p: f64 = (0..=size)
                .filter(|&k| (2 * k) as f64 - size as f64 >= 0.2 * size as f64)
                .map(|k| binomial(size, k) / 2f64.powi(size as i32))
                .sum();
            assert!((pt.p - p).abs() < 1e-14);
            assert!((pt.floor.unwrap() - 0.02).abs() < 1e-15);
            assert_eq!(pt.ok, Some(true));
        }
        let mu = measure(1, 0.0);
        let c = bind(&mu, &Observable::block(LocalFunction::constant(1, 2, 0.0), mu.window()));
        let pt = deviation_point_exact(&mu, &c, &event, Some((0.125, 0.0)));
        assert_eq!((pt.p, pt.rate), (0.0, None));
    }

    fn binomial(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn interval_event_is_inside_upper_event() {
        let upper = DeviationEvent::Upper {
            base: 0.0,
            epsilon: 0.9,
        };
        let inner = DeviationEvent::Interval {
            center: 0.9,
            epsilon: 0.9,
        };
        for i in 0..=200 {
            let m = -1.0 + i as f64 / 100.0;
            assert!(!inner.contains(m) || upper.contains(m));
        }
    }
}
