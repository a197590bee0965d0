//! Local functions, oscillation vectors, block sums, empirical pattern
//! frequencies and total-variation distances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::defaults::{
    ENUMERATION_CAP, EXACT_TOLERANCE, FREQUENCY_RHO_DENOMINATOR, FREQUENCY_RHO_NUMERATOR,
    FREQUENCY_VOLUME_RATIO, MAX_DEPENDENCE_SITES,
};
use crate::distribution::{PatternDistribution, PatternKey};
use crate::error::{invalid, Error, Result};
use crate::lattice::{
    box_sites, decode_into, hamming_distance, ising_value, pattern_space_size, Boundary,
    Configuration, Geometry, Site, Symbol, Window,
};

/// A function of the spins on a finite dependence set, stored as a dense
/// table indexed by the base-`|S|` code of those spins (first site most
/// significant).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFunction {
    name: String,
    dim: usize,
    alphabet: usize,
    sites: Vec<Site>,
    table: Vec<f64>,
}

fn check_dependence(sites: usize, alphabet: usize) -> Result<()> {
    if sites > MAX_DEPENDENCE_SITES {
        return Err(Error::DependenceTooLarge {
            sites,
            limit: MAX_DEPENDENCE_SITES,
        });
    }
    let states = pattern_space_size(sites, alphabet);
    if states > u128::from(ENUMERATION_CAP) {
        return Err(Error::EnumerationCap {
            states,
            cap: u128::from(ENUMERATION_CAP),
        });
    }
    Ok(())
}

impl LocalFunction {
    /// Tabulates `f`, which receives the spins on `sites` in the given order.
    pub fn from_fn(
        name: impl Into<String>,
        dim: usize,
        alphabet: usize,
        sites: Vec<Site>,
        mut f: impl FnMut(&[Symbol]) -> f64,
    ) -> Result<Self> {
        check_dependence(sites.len(), alphabet)?;
        if sites.iter().any(|s| s.dim() != dim) {
            return Err(invalid("dependence site of the wrong dimension"));
        }
        if sites.iter().collect::<BTreeSet<_>>().len() != sites.len() {
            return Err(invalid("dependence set lists a site twice"));
        }
        let states = pattern_space_size(sites.len(), alphabet) as u64;
        let mut buf = vec![0 as Symbol; sites.len()];
        let table = (0..states)
            .map(|code| {
                decode_into(code, alphabet, &mut buf);
                f(&buf)
            })
            .collect();
        Ok(LocalFunction {
            name: name.into(),
            dim,
            alphabet,
            sites,
            table,
        })
    }

    /// `ω_x` as a `±1` spin.
    pub fn spin(site: Site) -> Self {
        let dim = site.dim();
        Self::from_fn(format!("spin{site}"), dim, 2, vec![site], |s| ising_value(s[0]))
            .expect("single site")
    }

    /// `Π_i ω_{x_i}` as `±1` spins.
    pub fn product(sites: Vec<Site>) -> Result<Self> {
        let dim = sites.first().map_or(1, Site::dim);
        let name = format!(
            "product[{}]",
            sites.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        );
        Self::from_fn(name, dim, 2, sites, |s| s.iter().map(|&x| ising_value(x)).product())
    }

    /// Indicator that the spins on `sites` equal `pattern`.
    pub fn indicator(alphabet: usize, sites: Vec<Site>, pattern: Vec<Symbol>) -> Result<Self> {
        if pattern.len() != sites.len() {
            return Err(invalid("indicator pattern length differs from its site list"));
        }
        let dim = sites.first().map_or(1, Site::dim);
        Self::from_fn("indicator", dim, alphabet, sites, move |s| {
            if s == pattern.as_slice() {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn constant(dim: usize, alphabet: usize, c: f64) -> Self {
        LocalFunction {
            name: format!("constant {c}"),
            dim,
            alphabet,
            sites: Vec::new(),
            table: vec![c],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Value from the spins on the dependence set, in site-list order.
    pub fn value(&self, spins: &[Symbol]) -> f64 {
        let code = spins
            .iter()
            .fold(0usize, |acc, &s| acc * self.alphabet + s as usize);
        self.table[code]
    }

    /// `(f ∘ θ_x)(ω)`, i.e. `f` read at the translated sites `x + dep(f)`.
    pub fn eval_shifted(&self, omega: &Configuration, x: &Site) -> Result<f64> {
        let spins = self
            .sites
            .iter()
            .map(|s| omega.spin_at(&s.add(x)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.value(&spins))
    }

    pub fn eval(&self, omega: &Configuration) -> Result<f64> {
        self.eval_shifted(omega, &Site::origin(self.dim))
    }

    /// `sup |f|`.
    pub fn sup_norm(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Oscillations `δ_x(F)` over a set of sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationVector {
    pub entries: Vec<(Site, f64)>,
    pub l1: f64,
    pub l2sq: f64,
    /// False when entries are upper bounds rather than exact suprema.
    pub exact: bool,
}

impl OscillationVector {
    fn new(entries: Vec<(Site, f64)>, exact: bool) -> Self {
        let l1 = entries.iter().fold(0.0, |a, e| a + e.1);
        let l2sq = entries.iter().fold(0.0, |a, e| a + e.1 * e.1);
        OscillationVector {
            entries,
            l1,
            l2sq,
            exact,
        }
    }

    pub fn get(&self, site: &Site) -> f64 {
        self.entries
            .iter()
            .find(|e| &e.0 == site)
            .map_or(0.0, |e| e.1)
    }
}

/// Per-position oscillation of a dense table by exhaustive comparison of
/// every pair of codes that differ at one position.
fn table_oscillations(table: &[f64], positions: usize, alphabet: usize) -> Vec<f64> {
    let q = alphabet;
    let mut out = vec![0.0f64; positions];
    let mut buf = vec![0 as Symbol; positions];
    for (code, &v) in table.iter().enumerate() {
        decode_into(code as u64, q, &mut buf);
        let mut place = 1usize;
        for pos in (0..positions).rev() {
            let a = buf[pos] as usize;
            for b in (a + 1)..q {
                let other = table[code + (b - a) * place];
                out[pos] = out[pos].max((v - other).abs());
            }
            place *= q;
        }
    }
    out
}

/// Exact `δ_x(F)` for every dependence site.
pub fn oscillation_vector(f: &LocalFunction) -> OscillationVector {
    let osc = table_oscillations(&f.table, f.sites.len(), f.alphabet);
    OscillationVector::new(f.sites.iter().cloned().zip(osc).collect(), true)
}

/// `S_Λ f = Σ_{x∈Λ} f ∘ θ_x` on `Z^d`, with dependence set `Λ ⊕ dep(f)`.
///
/// Only the window's site set is used; its geometry is ignored.
pub fn block_sum(f: &LocalFunction, window: &Window) -> Result<LocalFunction> {
    if window.dim() != f.dim {
        return Err(invalid("window and function dimensions differ"));
    }
    let anchors = window.sites();
    if f.sites.is_empty() {
        return Ok(LocalFunction {
            name: format!("S[{}]", f.name),
            table: vec![f.table[0] * anchors.len() as f64],
            ..f.clone()
        });
    }
    let union: BTreeSet<Site> = anchors
        .iter()
        .flat_map(|a| f.sites.iter().map(move |s| s.add(a)))
        .collect();
    let union: Vec<Site> = union.into_iter().collect();
    check_dependence(union.len(), f.alphabet)?;
    let positions: Vec<Vec<usize>> = anchors
        .iter()
        .map(|a| {
            f.sites
                .iter()
                .map(|s| union.binary_search(&s.add(a)).expect("in union"))
                .collect()
        })
        .collect();
    let mut local = vec![0 as Symbol; f.sites.len()];
    LocalFunction::from_fn(
        format!("S[{}]", f.name),
        f.dim,
        f.alphabet,
        union,
        |spins| {
            positions
                .iter()
                .map(|pos| {
                    for (l, &p) in local.iter_mut().zip(pos) {
                        *l = spins[p];
                    }
                    f.value(&local)
                })
                .sum()
        },
    )
}

/// Both sides of `‖δ(S_Λ f)‖₂² ≤ |Λ| ‖δf‖₁²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn young_bound_check(f: &LocalFunction, window: &Window) -> Result<YoungCheck> {
    let lhs = oscillation_vector(&block_sum(f, window)?).l2sq;
    let l1 = oscillation_vector(f).l1;
    let rhs = window.volume() as f64 * l1 * l1;
    Ok(YoungCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + EXACT_TOLERANCE),
    })
}

/// `F = Σ_{a ∈ anchors} f ∘ θ_a`, to be evaluated on a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub f: LocalFunction,
    pub anchors: Vec<Site>,
}

impl Observable {
    /// `f` itself.
    pub fn local(f: LocalFunction) -> Self {
        let origin = Site::origin(f.dim);
        Observable {
            f,
            anchors: vec![origin],
        }
    }

    /// `S_Λ f` over the window's sites.
    pub fn block(f: LocalFunction, window: &Window) -> Self {
        Observable {
            f,
            anchors: window.sites(),
        }
    }

    /// Total magnetization `Σ_{x∈Λ} ω_x`.
    pub fn magnetization(window: &Window) -> Self {
        Self::block(LocalFunction::spin(Site::origin(window.dim())), window)
    }

    pub fn name(&self) -> String {
        if self.anchors.len() == 1 && self.anchors[0].is_origin() {
            self.f.name.clone()
        } else {
            format!("S[{}]", self.f.name)
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Slot {
    Site(u32),
    Fixed(Symbol),
}

/// An [`Observable`] resolved against a window and boundary: each term reads
/// interior indices (wrapped on tori) or frozen boundary spins.
#[derive(Clone, Debug)]
pub struct BoundObservable {
    window: Window,
    f: LocalFunction,
    slots: Vec<Slot>,
    exact_by_structure: bool,
}

impl BoundObservable {
    pub fn new(obs: &Observable, window: &Window, boundary: &Boundary) -> Result<Self> {
        if obs.f.alphabet != window.alphabet() || obs.f.dim != window.dim() {
            return Err(invalid("observable does not match the window"));
        }
        let mut slots = Vec::with_capacity(obs.anchors.len() * obs.f.sites.len());
        for a in &obs.anchors {
            for s in &obs.f.sites {
                let t = s.add(a);
                let slot = match window.index_of(&t) {
                    Some(i) => Slot::Site(i as u32),
                    None => match window.geometry() {
                        Geometry::Torus => Slot::Site(window.wrapped_index(&t) as u32),
                        Geometry::Fixed => Slot::Fixed(boundary.spin_at(window, &t)?),
                        Geometry::Free => return Err(Error::OutOfWindow { site: t.0 }),
                    },
                };
                slots.push(slot);
            }
        }
        Ok(BoundObservable {
            window: window.clone(),
            f: obs.f.clone(),
            slots,
            exact_by_structure: obs.f.sites.len() <= 1,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    #[inline]
    pub fn eval(&self, spins: &[Symbol]) -> f64 {
        let m = self.f.sites.len();
        if m == 0 {
            return self.f.table[0] * self.slots.len().max(1) as f64;
        }
        let q = self.f.alphabet;
        self.slots
            .chunks_exact(m)
            .map(|term| {
                let code = term.iter().fold(0usize, |acc, s| {
                    acc * q
                        + match *s {
                            Slot::Site(i) => spins[i as usize] as usize,
                            Slot::Fixed(v) => v as usize,
                        }
                });
                self.f.table[code]
            })
            .sum()
    }

    /// `δ_x(F)` for the window sites `F` depends on.
    ///
    /// Exact when `F` touches at most [`MAX_DEPENDENCE_SITES`] window sites
    /// or `f` is single-site; otherwise each entry is the triangle bound
    /// `Σ_terms δ(term)` and `exact` is false.
    pub fn oscillation(&self) -> Result<OscillationVector> {
        let m = self.f.sites.len();
        if m == 0 {
            return Ok(OscillationVector::new(Vec::new(), true));
        }
        let touched: BTreeSet<u32> = self
            .slots
            .iter()
            .filter_map(|s| match s {
                Slot::Site(i) => Some(*i),
                Slot::Fixed(_) => None,
            })
            .collect();
        let touched: Vec<u32> = touched.into_iter().collect();
        let q = self.f.alphabet;
        let enumerable = touched.len() <= MAX_DEPENDENCE_SITES
            && pattern_space_size(touched.len(), q) <= u128::from(ENUMERATION_CAP);
        let values: Vec<f64> = if enumerable {
            let mut spins = vec![0 as Symbol; self.window.volume()];
            let mut local = vec![0 as Symbol; touched.len()];
            let states = pattern_space_size(touched.len(), q) as u64;
            let table: Vec<f64> = (0..states)
                .map(|code| {
                    decode_into(code, q, &mut local);
                    for (&i, &s) in touched.iter().zip(&local) {
                        spins[i as usize] = s;
                    }
                    self.eval(&spins)
                })
                .collect();
            table_oscillations(&table, touched.len(), q)
        } else {
            let per_position = table_oscillations(&self.f.table, m, q);
            let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
            for term in self.slots.chunks_exact(m) {
                // Positions of one term that wrap onto the same site add up.
                for (slot, d) in term.iter().zip(&per_position) {
                    if let Slot::Site(i) = slot {
                        *acc.entry(*i).or_default() += d;
                    }
                }
            }
            touched.iter().map(|i| acc[i]).collect()
        };
        let entries = touched
            .iter()
            .zip(values)
            .map(|(&i, v)| (self.window.site_at(i as usize), v))
            .collect();
        Ok(OscillationVector::new(
            entries,
            enumerable || self.exact_by_structure,
        ))
    }
}

/// Translates `x` with `x + Λ_k` inside the window; `Λ_{n-k}` for the cube
/// `Λ_n`.
fn frequency_anchors(window: &Window, k: usize) -> Result<Vec<Site>> {
    if window.side() <= 2 * k + 1 {
        return Err(Error::SubRadius {
            k,
            reason: format!("need a window wider than Λ_{k}, got side {}", window.side()),
        });
    }
    let k = k as i32;
    Ok(window
        .sites()
        .into_iter()
        .filter(|s| s.coords().iter().all(|&c| c - k >= window.lo() && c + k <= window.hi()))
        .collect())
}

/// `f_{n,k}(ω; ·)`: frequencies of `Λ_k` patterns over the anchors whose
/// translate of `Λ_k` lies inside the window, without periodic wrapping.
pub fn empirical_frequency(omega: &Configuration, k: usize) -> Result<PatternDistribution> {
    let window = omega.window();
    let anchors = frequency_anchors(window, k)?;
    let cube = box_sites(window.dim(), k);
    let q = window.alphabet();
    let mut counts: BTreeMap<PatternKey, u64> = BTreeMap::new();
    let mut buf = vec![0 as Symbol; cube.len()];
    for a in &anchors {
        for (b, s) in buf.iter_mut().zip(&cube) {
            *b = omega.spins()[window.index_of(&s.add(a)).expect("anchor inside")];
        }
        *counts.entry(PatternKey::of(&buf, q)).or_default() += 1;
    }
    PatternDistribution::from_counts(window.dim(), k, q, &counts)
}

/// CSV rows `n,k,pattern_code,freq` for the support of a frequency table.
pub fn frequency_csv(n: &str, dist: &PatternDistribution, with_header: bool) -> String {
    let mut out = String::new();
    if with_header {
        out.push_str("n,k,pattern_code,freq\n");
    }
    for (key, p) in dist.support() {
        let code = match key {
            PatternKey::Code(c) => c.to_string(),
            PatternKey::Symbols(s) => {
                let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                format!("s:{}", parts.join("."))
            }
        };
        let _ = writeln!(out, "{n},{},{code},{p}", dist.radius());
    }
    out
}

/// `½ Σ_p |P(p) - Q(p)|`.
pub fn tv_distance(p: &PatternDistribution, q: &PatternDistribution) -> Result<f64> {
    p.check_same_shape(q)?;
    let sum: f64 = p
        .joint_keys(q)
        .iter()
        .map(|k| (p.prob(k) - q.prob(k)).abs())
        .sum();
    Ok((0.5 * sum).min(1.0))
}

/// `N̆`: the smallest `n > k` with `((2n+1)/(2(n-k)+1))^d ≤ 5/4`.
pub fn n_breve(dim: usize, k: usize) -> usize {
    (k + 1..)
        .find(|&n| {
            let ratio = (2 * n + 1) as f64 / (2 * (n - k) + 1) as f64;
            ratio.powi(dim as i32) <= FREQUENCY_VOLUME_RATIO
        })
        .expect("ratio tends to 1")
}

/// `ϱ = 2ε / (5 (2k+1)^d)`.
pub fn frequency_rho(dim: usize, k: usize, epsilon: f64) -> f64 {
    FREQUENCY_RHO_NUMERATOR * epsilon
        / (FREQUENCY_RHO_DENOMINATOR * ((2 * k + 1) as f64).powi(dim as i32))
}

/// Outcome of the frequency-difference check for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShieldsCheck {
    pub tv: f64,
    pub bound: f64,
    pub hamming: usize,
    pub ok: bool,
    /// `Some(tv ≤ ε/2)` when `n ≥ N̆` and `d̄ ≤ ϱ (2n+1)^d`.
    pub half_epsilon: Option<bool>,
}

/// `TV(f_{n,k}(ω), f_{n,k}(η)) ≤ (2k+1)^d / (2(n-k)+1)^d · d̄(ω, η)`, plus the
/// `ε/2` consequence when its hypotheses hold.
pub fn shields_bound_check(
    omega: &Configuration,
    eta: &Configuration,
    k: usize,
    epsilon: Option<f64>,
) -> Result<ShieldsCheck> {
    let window = omega.window();
    let n = window.radius().ok_or_else(|| {
        invalid("the frequency bound is stated for centred cubes of odd side")
    })?;
    let fo = empirical_frequency(omega, k)?;
    let fe = empirical_frequency(eta, k)?;
    let tv = tv_distance(&fo, &fe)?;
    let hamming = hamming_distance(omega, eta)?;
    let d = window.dim() as i32;
    let ratio = ((2 * k + 1) as f64).powi(d) / ((2 * (n - k) + 1) as f64).powi(d);
    let bound = ratio * hamming as f64;
    let half_epsilon = epsilon.and_then(|eps| {
        let applies = n >= n_breve(window.dim(), k)
            && (hamming as f64)
                <= frequency_rho(window.dim(), k, eps) * ((2 * n + 1) as f64).powi(d);
        applies.then_some(tv <= eps / 2.0 + EXACT_TOLERANCE)
    });
    Ok(ShieldsCheck {
        tv,
        bound,
        hamming,
        ok: tv <= bound + EXACT_TOLERANCE,
        half_epsilon,
    })
}
