//! Shift-invariant finite-range potentials and their finite-volume
//! Hamiltonians.
//!
//! A [`Potential`] is a list of term shapes. Each shape is a finite site set
//! anchored with its lexicographically smallest site at the origin, together
//! with a dense energy table over the restricted configurations. Shift
//! invariance is built in: the term on `shape + x` reads the table at the
//! spins of `shape + x`. Inverse temperature is folded into the tables.
//!
//! [`BoundPotential`] binds a potential to a window and boundary condition and
//! is the single code path for Hamiltonians, single-site kernels, exact
//! enumeration and MCMC.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{encode, Boundary, Configuration, Geometry, Site, Symbol, Window};

/// One interaction shape with its energy table.
#[derive(Clone, Debug, PartialEq)]
pub struct TermShape {
    sites: Vec<Site>,
    energies: Vec<f64>,
}

impl TermShape {
    /// Builds a shape from sites in any order and a table indexed by the
    /// base-`|S|` code of the symbols listed in that same order.
    pub fn new(sites: Vec<Site>, alphabet: usize, energies: Vec<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(invalid("term shape must contain at least one site"));
        }
        let m = sites.len();
        let expected = alphabet.pow(m as u32);
        if energies.len() != expected {
            return Err(invalid(format!(
                "shape with {m} sites needs {expected} energies, got {}",
                energies.len()
            )));
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| sites[a].cmp(&sites[b]));
        if order.windows(2).any(|w| sites[w[0]] == sites[w[1]]) {
            return Err(invalid("term shape has repeated sites"));
        }
        let anchor = sites[order[0]].clone();
        let canon: Vec<Site> = order.iter().map(|&i| sites[i].sub(&anchor)).collect();

        // Re-index the table from the caller's site order to sorted order.
        let mut table = vec![0.0; expected];
        let mut sorted_syms = vec![0 as Symbol; m];
        let mut orig_syms = vec![0 as Symbol; m];
        for (code, slot) in table.iter_mut().enumerate() {
            crate::lattice::decode_into(code as u64, alphabet, &mut sorted_syms);
            for (pos, &orig) in order.iter().enumerate() {
                orig_syms[orig] = sorted_syms[pos];
            }
            *slot = energies[encode(&orig_syms, alphabet)? as usize];
        }
        Ok(TermShape {
            sites: canon,
            energies: table,
        })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `‖Φ(shape, ·)‖_∞`, by scanning the whole table.
    pub fn sup_norm(&self) -> f64 {
        self.energies.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    fn diameter(&self) -> u32 {
        let mut d = 0;
        for a in &self.sites {
            for b in &self.sites {
                d = d.max(a.sub(b).linf());
            }
        }
        d
    }
}

/// A shift-invariant finite-range potential.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    name: String,
    dim: usize,
    alphabet: usize,
    shapes: Vec<TermShape>,
    truncation_tail: Option<f64>,
}

impl Potential {
    /// Assembles a potential; shapes covering the same site set are merged.
    pub fn from_shapes(
        name: impl Into<String>,
        dim: usize,
        alphabet: usize,
        shapes: Vec<TermShape>,
    ) -> Result<Self> {
        let mut merged: Vec<TermShape> = Vec::new();
        for s in shapes {
            if s.sites.iter().any(|x| x.dim() != dim) {
                return Err(invalid("term shape dimension mismatch"));
            }
            if s.energies.len() != alphabet.pow(s.sites.len() as u32) {
                return Err(invalid("term table does not match alphabet"));
            }
            match merged.iter_mut().find(|m| m.sites == s.sites) {
                Some(m) => m
                    .energies
                    .iter_mut()
                    .zip(&s.energies)
                    .for_each(|(a, b)| *a += b),
                None => merged.push(s),
            }
        }
        Ok(Potential {
            name: name.into(),
            dim,
            alphabet,
            shapes: merged,
            truncation_tail: None,
        })
    }

    /// Nearest-neighbour Ising model: pair energy `-β ω_x ω_y` for
    /// `‖x - y‖₁ = 1` and field energy `-β h ω_x`.
    pub fn ising(dim: usize, beta: f64, h: f64) -> Result<Self> {
        check_beta(beta)?;
        let mut shapes = Vec::new();
        for axis in 0..dim {
            let table = pair_table(2, |a, b| -beta * ising(a) * ising(b));
            shapes.push(TermShape::new(
                vec![Site::origin(dim), Site::unit(dim, axis)],
                2,
                table,
            )?);
        }
        if h != 0.0 {
            shapes.push(TermShape::new(
                vec![Site::origin(dim)],
                2,
                vec![beta * h, -beta * h],
            )?);
        }
        Self::from_shapes("ising", dim, 2, shapes)
    }

    /// Ferromagnetic `N`-state Potts model: pair energy `-β 1{ω_x = ω_y}`.
    pub fn potts(dim: usize, beta: f64, colors: usize) -> Result<Self> {
        check_beta(beta)?;
        if colors < 2 {
            return Err(invalid("Potts model needs N ≥ 2"));
        }
        let mut shapes = Vec::new();
        for axis in 0..dim {
            let table = pair_table(colors, |a, b| if a == b { -beta } else { 0.0 });
            shapes.push(TermShape::new(
                vec![Site::origin(dim), Site::unit(dim, axis)],
                colors,
                table,
            )?);
        }
        Self::from_shapes("potts", dim, colors, shapes)
    }

    /// One-dimensional Dyson model truncated at range `R`: pair energy
    /// `-β ω_x ω_y / |x - y|^α` for `1 ≤ |x - y| ≤ R`.
    pub fn dyson_truncated(beta: f64, alpha: f64, range: usize) -> Result<Self> {
        check_beta(beta)?;
        if alpha.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
            return Err(invalid("Dyson model needs α > 1"));
        }
        if range < 1 {
            return Err(invalid("Dyson truncation needs R ≥ 1"));
        }
        let mut shapes = Vec::new();
        for r in 1..=range {
            let w = beta / (r as f64).powf(alpha);
            shapes.push(TermShape::new(
                vec![Site::origin(1), Site::new([r as i32])],
                2,
                pair_table(2, |a, b| -w * ising(a) * ising(b)),
            )?);
        }
        let mut p = Self::from_shapes("dyson", 1, 2, shapes)?;
        p.truncation_tail = Some(zeta_tail(alpha, range));
        Ok(p)
    }

    /// Independent sites with single-site law `probs` (energy `-log p_a`).
    pub fn independent(dim: usize, probs: &[f64]) -> Result<Self> {
        if probs.len() < 2 || probs.iter().any(|&p| p <= 0.0) {
            return Err(invalid("independent potential needs ≥ 2 positive weights"));
        }
        let total: f64 = probs.iter().sum();
        let table = probs.iter().map(|p| -(p / total).ln()).collect();
        Self::from_shapes(
            "independent",
            dim,
            probs.len(),
            vec![TermShape::new(vec![Site::origin(dim)], probs.len(), table)?],
        )
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

    pub fn shapes(&self) -> &[TermShape] {
        &self.shapes
    }

    /// `Σ_{r>R} r^{-α}` for truncated Dyson potentials.
    pub fn truncation_tail(&self) -> Option<f64> {
        self.truncation_tail
    }

    /// Interaction radius: no term spans more than this in sup-norm.
    pub fn range(&self) -> usize {
        self.shapes.iter().map(|s| s.diameter()).max().unwrap_or(0) as usize
    }

    /// `Φ(Λ', ω)` for a finite site set given with its spins, in any order.
    pub fn term(&self, sites: &[Site], spins: &[Symbol]) -> Result<f64> {
        if sites.len() != spins.len() || sites.is_empty() {
            return Err(invalid("term needs one spin per site"));
        }
        let mut pairs: Vec<(&Site, Symbol)> = sites.iter().zip(spins.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let anchor = pairs[0].0.clone();
        let canon: Vec<Site> = pairs.iter().map(|(s, _)| s.sub(&anchor)).collect();
        match self.shapes.iter().find(|s| s.sites == canon) {
            Some(shape) => {
                let syms: Vec<Symbol> = pairs.iter().map(|p| p.1).collect();
                Ok(shape.energies[encode(&syms, self.alphabet)? as usize])
            }
            None => Ok(0.0),
        }
    }

    /// `Σ_{Λ' ∋ 0} ‖Φ(Λ', ·)‖_∞`: each shape has `|shape|` translates through
    /// the origin.
    pub fn summability_norm(&self) -> f64 {
        self.shapes
            .iter()
            .map(|s| s.sites.len() as f64 * s.sup_norm())
            .sum()
    }

    /// Every translate of every shape that contains the origin.
    pub fn terms_through_origin(&self) -> Vec<(usize, Vec<Site>)> {
        let mut out = Vec::new();
        for (i, s) in self.shapes.iter().enumerate() {
            for pivot in &s.sites {
                out.push((i, s.sites.iter().map(|x| x.sub(pivot)).collect()));
            }
        }
        out
    }

    /// Sites other than the origin that share a term with it.
    pub fn neighbourhood(&self) -> Vec<Site> {
        let set: BTreeSet<Site> = self
            .terms_through_origin()
            .into_iter()
            .flat_map(|(_, sites)| sites)
            .filter(|s| !s.is_origin())
            .collect();
        set.into_iter().collect()
    }
}

fn ising(s: usize) -> f64 {
    2.0 * s as f64 - 1.0
}

fn pair_table(q: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(q * q);
    for a in 0..q {
        for b in 0..q {
            t.push(f(a, b));
        }
    }
    t
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("inverse temperature {beta} must be finite and ≥ 0")))
    }
}

/// `Σ_{r>R} r^{-α}`: explicit sum to `R + 10^5`, Euler–Maclaurin beyond.
fn zeta_tail(alpha: f64, range: usize) -> f64 {
    let m = range + 100_000;
    let head: f64 = ((range + 1)..=m).map(|r| (r as f64).powf(-alpha)).sum();
    let mf = m as f64;
    head + mf.powf(1.0 - alpha) / (alpha - 1.0) - 0.5 * mf.powf(-alpha)
        + alpha / 12.0 * mf.powf(-alpha - 1.0)
}

/// Model family of a [`ModelConfig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ising,
    Potts,
    Dyson,
}

/// Structured model descriptor, as read from a JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub beta: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub range: Option<usize>,
    #[serde(default = "default_dim")]
    pub d: usize,
}

fn default_dim() -> usize {
    1
}

impl ModelConfig {
    pub fn ising(d: usize, beta: f64) -> Self {
        ModelConfig {
            model: ModelKind::Ising,
            beta,
            h: 0.0,
            colors: None,
            alpha: None,
            range: None,
            d,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn alphabet(&self) -> usize {
        match self.model {
            ModelKind::Potts => self.colors.unwrap_or(2),
            _ => 2,
        }
    }

    pub fn potential(&self) -> Result<Potential> {
        match self.model {
            ModelKind::Ising => Potential::ising(self.d, self.beta, self.h),
            ModelKind::Potts => {
                let n = self
                    .colors
                    .ok_or_else(|| invalid("Potts model needs `N`"))?;
                Potential::potts(self.d, self.beta, n)
            }
            ModelKind::Dyson => {
                if self.d != 1 {
                    return Err(invalid("Dyson model is one-dimensional"));
                }
                let alpha = self
                    .alpha
                    .ok_or_else(|| invalid("Dyson model needs `alpha`"))?;
                let r = self.range.ok_or_else(|| invalid("Dyson model needs `R`"))?;
                Potential::dyson_truncated(self.beta, alpha, r)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Slot {
    Site(u32),
    Fixed(Symbol),
}

/// A potential bound to a window and boundary condition: the explicit list
/// of contributing terms and, per site, the terms that touch it.
#[derive(Clone, Debug)]
pub struct BoundPotential {
    window: Window,
    alphabet: usize,
    range: usize,
    tables: Vec<Vec<f64>>,
    term_shape: Vec<u32>,
    term_start: Vec<u32>,
    slots: Vec<Slot>,
    site_start: Vec<u32>,
    site_terms: Vec<u32>,
}

impl BoundPotential {
    /// Enumerates the terms `Φ(Λ', ·)` with `Λ' ∩ Λ ≠ ∅`.
    ///
    /// Fixed geometry reads exterior spins from `boundary`; free geometry
    /// drops crossing terms; tori wrap and anchor one term per site and shape.
    pub fn new(potential: &Potential, window: &Window, boundary: &Boundary) -> Result<Self> {
        if potential.dim() != window.dim() {
            return Err(invalid("potential and window dimensions differ"));
        }
        if potential.alphabet() != window.alphabet() {
            return Err(invalid("potential and window alphabets differ"));
        }
        let mut term_shape = Vec::new();
        let mut term_start = vec![0u32];
        let mut slots = Vec::new();

        let range = potential.range() as i32;
        let anchors: Vec<Site> = match window.geometry() {
            Geometry::Torus => window.sites(),
            _ => {
                let ext = Window::with_side(
                    window.dim(),
                    window.side() + 2 * range as usize,
                    Geometry::Free,
                    window.alphabet(),
                )?;
                // `ext` is centred on the same lattice only when the side
                // parities agree, so shift explicitly.
                let offset = window.lo() - range - ext.lo();
                ext.sites()
                    .into_iter()
                    .map(|s| Site(s.0.iter().map(|c| c + offset).collect()))
                    .collect()
            }
        };

        for (si, shape) in potential.shapes().iter().enumerate() {
            for anchor in &anchors {
                let placed: Vec<Site> = shape.sites().iter().map(|s| s.add(anchor)).collect();
                let inside = placed.iter().filter(|s| window.contains(s)).count();
                let keep = match window.geometry() {
                    Geometry::Torus => true,
                    Geometry::Free => inside == placed.len(),
                    Geometry::Fixed => inside > 0,
                };
                if !keep {
                    continue;
                }
                for s in &placed {
                    let slot = match window.index_of(s) {
                        Some(i) => Slot::Site(i as u32),
                        None => match window.geometry() {
                            Geometry::Torus => Slot::Site(window.wrapped_index(s) as u32),
                            _ => Slot::Fixed(boundary.spin_at(window, s)?),
                        },
                    };
                    slots.push(slot);
                }
                term_shape.push(si as u32);
                term_start.push(slots.len() as u32);
            }
        }

        let volume = window.volume();
        let mut per_site: Vec<Vec<u32>> = vec![Vec::new(); volume];
        for t in 0..term_shape.len() {
            let (a, b) = (term_start[t] as usize, term_start[t + 1] as usize);
            for slot in &slots[a..b] {
                if let Slot::Site(i) = *slot {
                    let list = &mut per_site[i as usize];
                    if list.last() != Some(&(t as u32)) {
                        list.push(t as u32);
                    }
                }
            }
        }
        let mut site_start = Vec::with_capacity(volume + 1);
        let mut site_terms = Vec::new();
        site_start.push(0);
        for list in per_site {
            site_terms.extend(list);
            site_start.push(site_terms.len() as u32);
        }

        Ok(BoundPotential {
            window: window.clone(),
            alphabet: potential.alphabet(),
            range: potential.range(),
            tables: potential.shapes().iter().map(|s| s.energies.clone()).collect(),
            term_shape,
            term_start,
            slots,
            site_start,
            site_terms,
        })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Range of the underlying potential.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn term_count(&self) -> usize {
        self.term_shape.len()
    }

    #[inline]
    fn term_energy(&self, t: usize, spins: &[Symbol]) -> f64 {
        let q = self.alphabet;
        let (a, b) = (self.term_start[t] as usize, self.term_start[t + 1] as usize);
        let code = self.slots[a..b].iter().fold(0usize, |acc, s| {
            acc * q
                + match *s {
                    Slot::Site(i) => spins[i as usize] as usize,
                    Slot::Fixed(v) => v as usize,
                }
        });
        self.tables[self.term_shape[t] as usize][code]
    }

    /// `H_Λ(ω | η)`.
    pub fn energy(&self, spins: &[Symbol]) -> f64 {
        (0..self.term_shape.len())
            .map(|t| self.term_energy(t, spins))
            .sum()
    }

    /// Indices of the terms touching `site`.
    pub fn terms_at(&self, site: usize) -> &[u32] {
        &self.site_terms[self.site_start[site] as usize..self.site_start[site + 1] as usize]
    }

    /// Terms touching any of `sites`, each listed once.
    pub fn terms_touching(&self, sites: &[usize]) -> Vec<u32> {
        let set: BTreeSet<u32> = sites
            .iter()
            .flat_map(|&s| self.terms_at(s).iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Energy restricted to a list of terms.
    pub fn partial_energy(&self, spins: &[Symbol], terms: &[u32]) -> f64 {
        terms
            .iter()
            .map(|&t| self.term_energy(t as usize, spins))
            .sum()
    }

    /// Energies of the terms touching `site` for every candidate symbol at
    /// `site`, the rest of `spins` held fixed.
    #[inline]
    pub fn local_energies(&self, spins: &[Symbol], site: usize, out: &mut [f64]) {
        let q = self.alphabet;
        out[..q].iter_mut().for_each(|e| *e = 0.0);
        for &t in self.terms_at(site) {
            let t = t as usize;
            let (a, b) = (self.term_start[t] as usize, self.term_start[t + 1] as usize);
            let mut base = 0usize;
            let mut mult = 0usize;
            for s in &self.slots[a..b] {
                base *= q;
                mult *= q;
                match *s {
                    Slot::Site(i) if i as usize == site => mult += 1,
                    Slot::Site(i) => base += spins[i as usize] as usize,
                    Slot::Fixed(v) => base += v as usize,
                }
            }
            let table = &self.tables[self.term_shape[t] as usize];
            for (a, e) in out[..q].iter_mut().enumerate() {
                *e += table[base + a * mult];
            }
        }
    }
}

/// `H_Λ(ω | η)` for a configuration carrying its window and boundary.
pub fn hamiltonian(potential: &Potential, omega: &Configuration) -> Result<f64> {
    let bound = BoundPotential::new(potential, omega.window(), omega.boundary())?;
    Ok(bound.energy(omega.spins()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::lattice::Window;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn ising_pair_terms() {
        let p = Potential::ising(1, 1.0, 0.0).unwrap();
        let pair = [Site::new([0]), Site::new([1])];
        assert_eq!(p.term(&pair, &[1, 1]).unwrap(), -1.0);
        assert_eq!(p.term(&pair, &[1, 0]).unwrap(), 1.0);
        let p = Potential::ising(1, 0.5, 0.0).unwrap();
        assert_eq!(p.term(&[Site::new([0]), Site::new([2])], &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn ising_field_term() {
        let p = Potential::ising(2, 0.5, 0.4).unwrap();
        assert!(close(p.term(&[Site::origin(2)], &[1]).unwrap(), -0.2));
        assert!(close(p.term(&[Site::origin(2)], &[0]).unwrap(), 0.2));
    }

    #[test]
    fn potts_pair_terms() {
        let p = Potential::potts(2, 1.0, 3).unwrap();
        let pair = [Site::new([0, 0]), Site::new([0, 1])];
        assert_eq!(p.term(&pair, &[2, 2]).unwrap(), -1.0);
        assert_eq!(p.term(&pair, &[2, 0]).unwrap(), 0.0);
        assert!(Potential::potts(2, 1.0, 1).is_err());
    }

    #[test]
    fn two_color_potts_matches_ising_kernel() {
        // 1{a=b} = (1 + ab)/2, so Potts at 2β and Ising at β differ by a constant.
        let beta = 0.37;
        let potts = Potential::potts(2, 2.0 * beta, 2).unwrap();
        let ising = Potential::ising(2, beta, 0.0).unwrap();
        let w = Window::cube(2, 0, Geometry::Fixed, 2).unwrap();
        for code in 0..16u8 {
            let spins: Vec<Symbol> = (0..4).map(|i| (code >> i) & 1).collect();
            let boundary = Boundary::Collar {
                width: 1,
                spins: {
                    // collar order of Λ_1 \ {0}: 8 sites; put the four
                    // nearest neighbours from `spins` and corners arbitrary.
                    let sites = crate::lattice::collar_sites(&w, 1);
                    let mut it = spins.iter();
                    sites
                        .iter()
                        .map(|s| if s.l1() == 1 { *it.next().unwrap() } else { 0 })
                        .collect()
                },
            };
            let bp = BoundPotential::new(&potts, &w, &boundary).unwrap();
            let bi = BoundPotential::new(&ising, &w, &boundary).unwrap();
            let mut ep = [0.0; 2];
            let mut ei = [0.0; 2];
            bp.local_energies(&[0], 0, &mut ep);
            bi.local_energies(&[0], 0, &mut ei);
            assert!(close(ep[1] - ep[0], ei[1] - ei[0]));
        }
    }

    #[test]
    fn dyson_terms_and_norm() {
        let p = Potential::dyson_truncated(1.0, 2.0, 4).unwrap();
        assert!(close(
            p.term(&[Site::new([3]), Site::new([5])], &[1, 1]).unwrap(),
            -0.25
        ));
        assert_eq!(p.term(&[Site::new([0]), Site::new([5])], &[1, 1]).unwrap(), 0.0);
        let expected = 2.0 * (1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0);
        assert!(close(p.summability_norm(), expected));
        assert_eq!(p.range(), 4);
        // Σ_{r>4} r^-2 = π²/6 - (1 + 1/4 + 1/9 + 1/16)
        let tail = std::f64::consts::PI.powi(2) / 6.0 - (1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 16.0);
        assert!((p.truncation_tail().unwrap() - tail).abs() < 1e-10);
        assert!(Potential::dyson_truncated(1.0, 1.0, 4).is_err());
        let cfg = ModelConfig {
            model: ModelKind::Dyson,
            beta: 1.0,
            h: 0.0,
            colors: None,
            alpha: Some(2.0),
            range: Some(4),
            d: 2,
        };
        assert!(cfg.potential().is_err());
    }

    #[test]
    fn summability_norms() {
        assert!(close(Potential::ising(1, 1.0, 0.0).unwrap().summability_norm(), 2.0));
        assert!(close(Potential::ising(2, 1.0, 0.0).unwrap().summability_norm(), 4.0));
        assert_eq!(Potential::ising(3, 0.0, 0.0).unwrap().summability_norm(), 0.0);
    }

    #[test]
    fn hamiltonian_examples() {
        let p = Potential::ising(1, 1.0, 0.0).unwrap();
        let fixed = Window::cube(1, 1, Geometry::Fixed, 2).unwrap();
        let c = Configuration::constant(fixed.clone(), 1, Boundary::Uniform(1)).unwrap();
        assert!(close(hamiltonian(&p, &c).unwrap(), -4.0));
        let free = Window::cube(1, 1, Geometry::Free, 2).unwrap();
        let c = Configuration::constant(free, 1, Boundary::None).unwrap();
        assert!(close(hamiltonian(&p, &c).unwrap(), -2.0));
        let flipped = Configuration::constant(fixed, 0, Boundary::Uniform(0)).unwrap();
        assert!(close(hamiltonian(&p, &flipped).unwrap(), -4.0));
        let torus = Window::cube(1, 1, Geometry::Torus, 2).unwrap();
        let c = Configuration::constant(torus, 1, Boundary::None).unwrap();
        assert!(close(hamiltonian(&p, &c).unwrap(), -3.0));
    }

    #[test]
    fn missing_collar_spins_are_reported() {
        let p = Potential::dyson_truncated(1.0, 2.0, 3).unwrap();
        let w = Window::cube(1, 1, Geometry::Fixed, 2).unwrap();
        let thin = Boundary::Collar {
            width: 1,
            spins: vec![1, 1],
        };
        assert!(matches!(
            BoundPotential::new(&p, &w, &thin),
            Err(Error::MissingBoundary { .. })
        ));
        let wide = Boundary::Collar {
            width: 3,
            spins: vec![1; 6],
        };
        assert!(BoundPotential::new(&p, &w, &wide).is_ok());
    }

    #[test]
    fn model_config_parsing() {
        let cfg = ModelConfig::from_json(r#"{"model":"potts","beta":0.5,"N":3,"d":2}"#).unwrap();
        assert_eq!(cfg.alphabet(), 3);
        assert_eq!(cfg.potential().unwrap().name(), "potts");
        assert!(ModelConfig::from_json(r#"{"model":"ising","beta":0.5,"J":1}"#).is_err());
        assert!(ModelConfig::from_json(r#"{"model":"dyson","beta":0.5}"#)
            .unwrap()
            .potential()
            .is_err());
    }

    #[test]
    fn term_shape_reindexes_unsorted_sites() {
        // Same asymmetric pair table given in both site orders.
        let t = vec![0.0, 1.0, 2.0, 3.0]; // code = 2*s(first) + s(second)
        let a = TermShape::new(vec![Site::new([0]), Site::new([1])], 2, t.clone()).unwrap();
        let b = TermShape::new(vec![Site::new([1]), Site::new([0])], 2, t).unwrap();
        // In `b` the first listed site is x=1, so (x0=0, x1=1) has code 2*1+0.
        assert_eq!(a.energies(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(b.energies(), &[0.0, 2.0, 1.0, 3.0]);
    }
}
