//! Single-site MCMC (heat-bath and Metropolis) with reproducible parallel
//! chains.
//!
//! Randomness is counter based: every site visit consumes exactly four
//! 32-bit words of a ChaCha8 stream selected by `(seed, chain)`, positioned
//! at `(sweep · |Λ| + visit) · 4`. A chain's trajectory is therefore a pure
//! function of the configuration and independent of thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults::SAMPLER_BUDGET;
use crate::error::{invalid, Error, Result};
use crate::lattice::{Boundary, Configuration, Symbol, Window};
use crate::potential::{BoundPotential, ModelConfig, Potential};
use crate::specification::single_site_law;
use crate::stats::{batch_statistic, effective_sample_size, Estimate};

const WORDS_PER_VISIT: u128 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    HeatBath,
    Metropolis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOrder {
    Lexicographic,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Constant(Symbol),
    Random,
}

/// Everything that determines a sampler run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub model: ModelConfig,
    pub window: Window,
    pub boundary: Boundary,
    pub kernel: Kernel,
    pub order: SweepOrder,
    pub initial: InitialState,
    pub burn_in: usize,
    pub between: usize,
    pub n_samples: usize,
    pub n_chains: usize,
    pub seed: u64,
}

impl ChainConfig {
    /// Heat-bath, lexicographic sweeps, random start.
    pub fn new(model: ModelConfig, window: Window, boundary: Boundary, seed: u64) -> Self {
        ChainConfig {
            model,
            window,
            boundary,
            kernel: Kernel::HeatBath,
            order: SweepOrder::Lexicographic,
            initial: InitialState::Random,
            burn_in: crate::defaults::BURNIN_HIGH_TEMPERATURE,
            between: 1,
            n_samples: 1000,
            n_chains: 4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.between == 0 || self.n_samples == 0 || self.n_chains == 0 {
            return Err(invalid("sample, chain and thinning counts must be ≥ 1"));
        }
        if let InitialState::Constant(s) = self.initial {
            if s as usize >= self.window.alphabet() {
                return Err(invalid(format!("initial symbol {s} outside alphabet")));
            }
        }
        let sweeps = self.burn_in as u128 + self.n_samples as u128 * self.between as u128;
        let work = sweeps * self.window.volume() as u128 * self.n_chains as u128;
        if work > u128::from(SAMPLER_BUDGET) {
            return Err(Error::ResourceCap(format!(
                "{work} site updates exceed the budget of {SAMPLER_BUDGET}"
            )));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential> {
        self.model.potential()
    }
}

/// Counter-addressed random stream of one chain.
pub struct ChainRng {
    rng: ChaCha8Rng,
    volume: u128,
}

impl ChainRng {
    pub fn new(seed: u64, chain: u64, volume: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain);
        ChainRng {
            rng,
            volume: volume as u128,
        }
    }

    /// Positions the stream at the first visit of `sweep`.
    pub fn seek_sweep(&mut self, sweep: u64) {
        self.rng
            .set_word_pos(u128::from(sweep) * self.volume * WORDS_PER_VISIT);
    }

    #[inline]
    fn visit(&mut self) -> (u64, u64) {
        (self.rng.next_u64(), self.rng.next_u64())
    }
}

#[inline]
fn unit(u: u64) -> f64 {
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn below(u: u64, n: usize) -> usize {
    ((u128::from(u) * n as u128) >> 64) as usize
}

/// A bound potential plus scratch buffers; performs sweeps in place.
pub struct SweepEngine<'a> {
    bound: &'a BoundPotential,
    kernel: Kernel,
    order: SweepOrder,
    energies: Vec<f64>,
    law: Vec<f64>,
}

impl<'a> SweepEngine<'a> {
    pub fn new(bound: &'a BoundPotential, kernel: Kernel, order: SweepOrder) -> Self {
        let q = bound.window().alphabet();
        SweepEngine {
            bound,
            kernel,
            order,
            energies: vec![0.0; q],
            law: vec![0.0; q],
        }
    }

    #[inline]
    fn update(&mut self, spins: &mut [Symbol], site: usize, proposal: u64, u: u64) {
        let q = self.law.len();
        self.bound.local_energies(spins, site, &mut self.energies);
        match self.kernel {
            Kernel::HeatBath => {
                single_site_law(&self.energies, &mut self.law);
                let r = unit(u);
                let mut acc = 0.0;
                let mut pick = q - 1;
                for (a, p) in self.law.iter().enumerate() {
                    acc += p;
                    if r < acc {
                        pick = a;
                        break;
                    }
                }
                spins[site] = pick as Symbol;
            }
            Kernel::Metropolis => {
                let a = spins[site] as usize;
                let b = (a + 1 + below(proposal, q - 1)) % q;
                let delta = self.energies[b] - self.energies[a];
                if delta <= 0.0 || unit(u) < (-delta).exp() {
                    spins[site] = b as Symbol;
                }
            }
        }
    }

    /// One sweep (`|Λ|` site visits) from the current stream position.
    pub fn sweep(&mut self, spins: &mut [Symbol], rng: &mut ChainRng) {
        let volume = spins.len();
        for visit in 0..volume {
            let (u0, u1) = rng.visit();
            // Random order takes the site from the high bits of the first
            // word and the proposal from its low half.
            let (site, proposal) = match self.order {
                SweepOrder::Lexicographic => (visit, u0),
                SweepOrder::Random => (below(u0, volume), u0 << 32),
            };
            self.update(spins, site, proposal, u1);
        }
    }
}

/// One lexicographic heat-bath sweep of `omega` using sweep `sweep` of the
/// stream `(seed, chain)`.
pub fn heat_bath_sweep(
    omega: &Configuration,
    potential: &Potential,
    seed: u64,
    chain: u64,
    sweep: u64,
) -> Result<Configuration> {
    let bound = BoundPotential::new(potential, omega.window(), omega.boundary())?;
    let mut rng = ChainRng::new(seed, chain, omega.window().volume());
    rng.seek_sweep(sweep);
    let mut out = omega.clone();
    SweepEngine::new(&bound, Kernel::HeatBath, SweepOrder::Lexicographic)
        .sweep(out.spins_mut(), &mut rng);
    Ok(out)
}

fn run_one_chain<T>(
    cfg: &ChainConfig,
    bound: &BoundPotential,
    chain: usize,
    observe: &(impl Fn(&[Symbol]) -> T + Sync),
) -> Vec<T> {
    let volume = cfg.window.volume();
    let q = cfg.window.alphabet();
    let mut rng = ChainRng::new(cfg.seed, chain as u64, volume);
    // Sweep index 0 initializes; updates use indices 1, 2, ...
    rng.seek_sweep(0);
    let mut spins: Vec<Symbol> = match cfg.initial {
        InitialState::Constant(s) => vec![s; volume],
        InitialState::Random => (0..volume).map(|_| below(rng.visit().0, q) as Symbol).collect(),
    };
    let mut engine = SweepEngine::new(bound, cfg.kernel, cfg.order);
    let mut sweep = 1u64;
    let mut step = |spins: &mut Vec<Symbol>| {
        rng.seek_sweep(sweep);
        engine.sweep(spins, &mut rng);
        sweep += 1;
    };
    for _ in 0..cfg.burn_in {
        step(&mut spins);
    }
    let mut out = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        for _ in 0..cfg.between {
            step(&mut spins);
        }
        out.push(observe(&spins));
    }
    out
}

/// Runs all chains in parallel and returns `observe` applied to each
/// retained sample, grouped by chain index.
pub fn run_chains_observe<T: Send>(
    cfg: &ChainConfig,
    observe: impl Fn(&[Symbol]) -> T + Sync,
) -> Result<Vec<Vec<T>>> {
    cfg.validate()?;
    let potential = cfg.potential()?;
    let bound = BoundPotential::new(&potential, &cfg.window, &cfg.boundary)?;
    Ok((0..cfg.n_chains)
        .into_par_iter()
        .map(|c| run_one_chain(cfg, &bound, c, &observe))
        .collect())
}

/// Retained samples of a run, chain-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub config: ChainConfig,
    /// Interior spins, `n_samples` per chain, chain 0 first.
    pub samples: Vec<Vec<Symbol>>,
}

#[derive(Serialize, Deserialize)]
struct SampleSetHeader {
    config: ChainConfig,
    layout: String,
    count: usize,
}

impl SampleSet {
    pub fn chain_of(&self, index: usize) -> usize {
        index / self.config.n_samples
    }

    pub fn chain(&self, c: usize) -> &[Vec<Symbol>] {
        let n = self.config.n_samples;
        &self.samples[c * n..(c + 1) * n]
    }

    pub fn configuration(&self, index: usize) -> Result<Configuration> {
        Configuration::new(
            self.config.window.clone(),
            self.samples[index].clone(),
            self.config.boundary.clone(),
        )
    }

    /// Per-chain series of a scalar observable.
    pub fn series(&self, f: impl Fn(&[Symbol]) -> f64) -> Vec<Vec<f64>> {
        (0..self.config.n_chains)
            .map(|c| self.chain(c).iter().map(|s| f(s)).collect())
            .collect()
    }

    /// A JSON header line, then one spin line per sample.
    pub fn to_text(&self) -> Result<String> {
        let header = SampleSetHeader {
            config: self.config.clone(),
            layout: "chain-major".into(),
            count: self.samples.len(),
        };
        let mut out = serde_json::to_string(&header)?;
        out.push('\n');
        for i in 0..self.samples.len() {
            out.push_str(&self.configuration(i)?.spin_line());
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: SampleSetHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Parse("empty sample file".into()))?,
        )?;
        let samples = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                Configuration::parse_spin_line(&header.config.window, l)
                    .map(|c| c.spins().to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        if samples.len() != header.count
            || samples.len() != header.config.n_samples * header.config.n_chains
        {
            return Err(Error::Parse("sample count disagrees with header".into()));
        }
        Ok(SampleSet {
            config: header.config,
            samples,
        })
    }
}

pub fn run_chains(cfg: &ChainConfig) -> Result<SampleSet> {
    let chains = run_chains_observe(cfg, |s| s.to_vec())?;
    Ok(SampleSet {
        config: cfg.clone(),
        samples: chains.into_iter().flatten().collect(),
    })
}

/// Estimated probability of an event with batch-means error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventEstimate {
    pub p: f64,
    pub stderr: f64,
    pub ess: f64,
    pub n: usize,
    /// One-sided 95% upper bound `3/n`, reported when no hits were seen.
    pub upper_bound: Option<f64>,
}

/// Event probability from per-chain indicator series.
pub fn event_estimate(hits: &[Vec<f64>]) -> EventEstimate {
    let n: usize = hits.iter().map(Vec::len).sum();
    let total: f64 = hits.iter().flatten().sum();
    let (_, stderr) = batch_statistic(hits, crate::stats::mean);
    let ess = hits.iter().map(|c| effective_sample_size(c)).sum();
    EventEstimate {
        p: total / n as f64,
        stderr,
        ess,
        n,
        upper_bound: (total == 0.0).then(|| 3.0 / n as f64),
    }
}

pub fn estimate_event_probability(
    cfg: &ChainConfig,
    event: impl Fn(&[Symbol]) -> bool + Sync,
) -> Result<EventEstimate> {
    let hits = run_chains_observe(cfg, |s| if event(s) { 1.0 } else { 0.0 })?;
    Ok(event_estimate(&hits))
}

/// Mean of a scalar observable over all chains.
pub fn estimate_mean(cfg: &ChainConfig, f: impl Fn(&[Symbol]) -> f64 + Sync) -> Result<Estimate> {
    Ok(crate::stats::estimate_mean(&run_chains_observe(cfg, f)?))
}
