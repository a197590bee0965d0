//! Gibbsian specification kernels by exact enumeration.
//!
//! A [`FiniteGibbsMeasure`] is the kernel `γ_Λ(·|η) = exp(-H_Λ(·|η)) / Z_Λ(η)`
//! tabulated over all `|S|^|Λ|` configurations of a window, indexed by the
//! configuration code. All sums run in log space with max-subtraction.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::defaults::ENUMERATION_CAP;
use crate::distribution::PatternDistribution;
use crate::error::{invalid, Error, Result};
use crate::lattice::{
    box_sites, decode_into, pattern_space_size, Boundary, Configuration, Site, Symbol, Window,
};
use crate::potential::{BoundPotential, Potential};

/// Single-site law `p_a ∝ exp(-E_a)` from candidate energies, written to `out`.
#[inline]
pub fn single_site_law(energies: &[f64], out: &mut [f64]) {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (o, &e) in out.iter_mut().zip(energies) {
        *o = (min - e).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// `log Σ_i exp(x_i)`, summed in index order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn state_count(window: &Window) -> Result<u64> {
    let states = pattern_space_size(window.volume(), window.alphabet());
    if states > u128::from(ENUMERATION_CAP) {
        return Err(Error::EnumerationCap {
            states,
            cap: u128::from(ENUMERATION_CAP),
        });
    }
    Ok(states as u64)
}

/// Exact finite-volume Gibbs measure on a window.
#[derive(Clone, Debug)]
pub struct FiniteGibbsMeasure {
    bound: BoundPotential,
    boundary: Boundary,
    model: String,
    probs: Vec<f64>,
    log_z: f64,
}

impl FiniteGibbsMeasure {
    /// Enumerates `γ_Λ(·|η)`; fails above the enumeration cap.
    pub fn exact(potential: &Potential, window: &Window, boundary: &Boundary) -> Result<Self> {
        let states = state_count(window)?;
        let bound = BoundPotential::new(potential, window, boundary)?;
        let m = window.volume();
        let q = window.alphabet();
        let energies: Vec<f64> = (0..states)
            .into_par_iter()
            .map_init(
                || vec![0 as Symbol; m],
                |buf, code| {
                    decode_into(code, q, buf);
                    bound.energy(buf)
                },
            )
            .collect();
        let neg: Vec<f64> = energies.iter().map(|e| -e).collect();
        let log_z = log_sum_exp(&neg);
        let probs = neg.iter().map(|x| (x - log_z).exp()).collect();
        Ok(FiniteGibbsMeasure {
            bound,
            boundary: boundary.clone(),
            model: potential.name().to_string(),
            probs,
            log_z,
        })
    }

    pub fn window(&self) -> &Window {
        self.bound.window()
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn bound(&self) -> &BoundPotential {
        &self.bound
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Replaces the table (for corruption tests); renormalizes.
    pub fn with_probs(&self, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != self.probs.len() {
            return Err(invalid("table length mismatch"));
        }
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(FiniteGibbsMeasure {
            probs,
            ..self.clone()
        })
    }

    /// Calls `f(code, spins, probability)` for every configuration, in code order.
    pub fn for_each_state(&self, mut f: impl FnMut(u64, &[Symbol], f64)) {
        let w = self.window();
        let mut buf = vec![0 as Symbol; w.volume()];
        for (code, &p) in self.probs.iter().enumerate() {
            decode_into(code as u64, w.alphabet(), &mut buf);
            f(code as u64, &buf, p);
        }
    }

    /// `E[g]` for a function of the interior spins.
    pub fn expectation(&self, mut g: impl FnMut(&[Symbol]) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_state(|_, s, p| acc += p * g(s));
        acc
    }

    /// The configuration with the given code, carrying this measure's boundary.
    pub fn configuration(&self, code: u64) -> Result<Configuration> {
        Configuration::from_code(self.window().clone(), code, self.boundary.clone())
    }

    /// Text export: `# key=value` header echoing the model, window, boundary and
    /// `log Z`, then `code probability` rows in shortest round-trip form.
    pub fn to_text(&self, extra_header: &[(&str, String)]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# model={}", self.model);
        for (k, v) in extra_header {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# window={}", self.window().header());
        let _ = writeln!(out, "# boundary={}", boundary_token(&self.boundary));
        let _ = writeln!(out, "# log_z={}", self.log_z);
        for (i, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{i} {p}");
        }
        out
    }
}

fn boundary_token(b: &Boundary) -> String {
    match b {
        Boundary::None => "none".into(),
        Boundary::Uniform(s) => s.to_string(),
        Boundary::Collar { width, spins } => {
            let s: Vec<String> = spins.iter().map(|x| x.to_string()).collect();
            format!("collar {width} {}", s.join(" "))
        }
    }
}

/// A measure table read back from [`FiniteGibbsMeasure::to_text`].
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureTable {
    pub window: Window,
    pub header: Vec<(String, String)>,
    pub log_z: f64,
    pub probs: Vec<f64>,
}

impl MeasureTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut probs = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(h) = line.strip_prefix('#') {
                let (k, v) = h
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad header `{line}`")))?;
                header.push((k.to_string(), v.to_string()));
            } else {
                let (c, p) = line
                    .split_once(' ')
                    .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
                if c.parse::<usize>().ok() != Some(probs.len()) {
                    return Err(Error::Parse(format!("row `{line}` out of order")));
                }
                probs.push(
                    p.parse()
                        .map_err(|_| Error::Parse(format!("bad probability `{p}`")))?,
                );
            }
        }
        let get = |k: &str| {
            header
                .iter()
                .find(|(hk, _)| hk == k)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Parse(format!("missing header `{k}`")))
        };
        let window = Window::parse_header(&get("window")?)?;
        let log_z = get("log_z")?
            .parse()
            .map_err(|_| Error::Parse("bad log_z".into()))?;
        Ok(MeasureTable {
            window,
            header,
            log_z,
            probs,
        })
    }
}

/// `log Z_Λ(η)`.
pub fn partition_function(potential: &Potential, window: &Window, boundary: &Boundary) -> Result<f64> {
    Ok(FiniteGibbsMeasure::exact(potential, window, boundary)?.log_z())
}

/// The exact kernel `γ_Λ(·|η)` as a probability table.
pub fn gibbs_kernel(
    potential: &Potential,
    window: &Window,
    boundary: &Boundary,
) -> Result<FiniteGibbsMeasure> {
    FiniteGibbsMeasure::exact(potential, window, boundary)
}

/// Positions of the centred cube `Λ_k` in `window`, plus the place values of
/// every window site in the configuration code.
fn sub_cube_layout(window: &Window, k: usize) -> Result<(Vec<usize>, Vec<u64>)> {
    if window.collar_width(k).is_none() {
        return Err(Error::SubRadius {
            k,
            reason: format!("Λ_{k} does not fit in a window of side {}", window.side()),
        });
    }
    let inner = window.sub_cube_indices(k, &Site::origin(window.dim()))?;
    let m = window.volume();
    let q = window.alphabet() as u64;
    let mut place = vec![1u64; m];
    for i in (0..m.saturating_sub(1)).rev() {
        place[i] = place[i + 1] * q;
    }
    Ok((inner, place))
}

/// Maximal DLR violation of `μ` on the sub-cube `Λ_k`.
///
/// For each exterior assignment `ξ` on `Λ \ Λ_k` the kernel
/// `γ_{Λ_k}(·|ξ η)` is recomputed from the terms touching `Λ_k`, and both
/// families of events are checked: full cylinders on `Λ`
/// (`|μ(σξ) - μ(ξ) γ(σ|ξ)|`) and cylinders on `Λ_k`
/// (`|μ(σ) - Σ_ξ μ(ξ) γ(σ|ξ)|`).
pub fn dlr_check(mu: &FiniteGibbsMeasure, k: usize) -> Result<f64> {
    let window = mu.window();
    let range = mu.bound().range();
    let (inner, place) = sub_cube_layout(window, k)?;
    let collar = window.collar_width(k).unwrap_or(0);
    if collar < range {
        return Err(Error::CollarTooThin {
            width: collar,
            range,
        });
    }
    let q = window.alphabet() as u64;
    let m = window.volume();
    let outer: Vec<usize> = (0..m).filter(|i| !inner.contains(i)).collect();
    let parts = |sites: &[usize]| -> Vec<u64> {
        let count = q.pow(sites.len() as u32);
        let mut digits = vec![0 as Symbol; sites.len()];
        (0..count)
            .map(|c| {
                decode_into(c, q as usize, &mut digits);
                sites
                    .iter()
                    .zip(&digits)
                    .map(|(&s, &d)| place[s] * u64::from(d))
                    .sum()
            })
            .collect()
    };
    let inner_parts = parts(&inner);
    let outer_parts = parts(&outer);
    let terms = mu.bound().terms_touching(&inner);

    let per_outer: Vec<(f64, Vec<f64>, Vec<f64>)> = outer_parts
        .par_iter()
        .map_init(
            || vec![0 as Symbol; m],
            |buf, &op| {
                let energies: Vec<f64> = inner_parts
                    .iter()
                    .map(|&ip| {
                        decode_into(op + ip, q as usize, buf);
                        -mu.bound().partial_energy(buf, &terms)
                    })
                    .collect();
                let lz = log_sum_exp(&energies);
                let mass: Vec<f64> = inner_parts
                    .iter()
                    .map(|&ip| mu.probs()[(op + ip) as usize])
                    .collect();
                let outer_mass: f64 = mass.iter().sum();
                let predicted: Vec<f64> = energies
                    .iter()
                    .map(|e| outer_mass * (e - lz).exp())
                    .collect();
                let worst = mass
                    .iter()
                    .zip(&predicted)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                (worst, mass, predicted)
            },
        )
        .collect();

    let mut worst = 0.0f64;
    let mut lhs = vec![0.0; inner_parts.len()];
    let mut rhs = vec![0.0; inner_parts.len()];
    for (w, mass, pred) in &per_outer {
        worst = worst.max(*w);
        for i in 0..lhs.len() {
            lhs[i] += mass[i];
            rhs[i] += pred[i];
        }
    }
    let marginal = lhs
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(worst.max(marginal))
}

/// Marginal law of `μ` on the centred cube `Λ_k`.
pub fn exact_marginal(mu: &FiniteGibbsMeasure, k: usize) -> Result<PatternDistribution> {
    let window = mu.window();
    let (inner, place) = sub_cube_layout(window, k)?;
    let q = window.alphabet() as u64;
    let sub_size = q.pow(inner.len() as u32) as usize;
    let mut table = vec![0.0; sub_size];
    for (code, &p) in mu.probs().iter().enumerate() {
        let sub = inner
            .iter()
            .fold(0u64, |acc, &i| acc * q + (code as u64 / place[i]) % q);
        table[sub as usize] += p;
    }
    PatternDistribution::from_dense(window.dim(), k, window.alphabet(), table)
}

/// Marginal of a dense pattern table on the smaller cube `Λ_k`.
pub fn project(dist: &PatternDistribution, k: usize) -> Result<PatternDistribution> {
    if k > dist.radius() {
        return Err(Error::SubRadius {
            k,
            reason: format!("cannot project Λ_{} onto a larger cube", dist.radius()),
        });
    }
    let probs = dist
        .dense()
        .ok_or_else(|| invalid("projection needs a dense table"))?;
    let big = box_sites(dist.dim(), dist.radius());
    let positions: Vec<usize> = box_sites(dist.dim(), k)
        .iter()
        .map(|s| big.binary_search(s).expect("sub-cube site"))
        .collect();
    let q = dist.alphabet();
    let mut buf = vec![0 as Symbol; big.len()];
    let mut table = vec![0.0; q.pow(positions.len() as u32)];
    for (code, &p) in probs.iter().enumerate() {
        decode_into(code as u64, q, &mut buf);
        let sub = positions
            .iter()
            .fold(0usize, |acc, &i| acc * q + buf[i] as usize);
        table[sub] += p;
    }
    PatternDistribution::from_dense(dist.dim(), k, q, table)
}
