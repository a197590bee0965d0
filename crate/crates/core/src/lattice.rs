//! Finite windows of `Z^d`: cubes `Λ_n`, tori, site enumeration, translations,
//! pattern codes and Hamming distance.
//!
//! Sites inside a window are enumerated lexicographically, first coordinate
//! most significant. Every table in the crate (configuration arrays, pattern
//! codes, probability tables) uses that order. A window of side `L` covers the
//! coordinates `-⌊L/2⌋ ..= ⌈L/2⌉ - 1` on every axis, so an odd side `2n + 1`
//! is exactly the centred cube `Λ_n`.
//!
//! Symbols are stored as indices `0..|S|`. For two-symbol models the physical
//! spin is `-1 ↔ 0` and `+1 ↔ 1` (see [`ising_value`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Index of a symbol of the single-site alphabet `S`.
pub type Symbol = u8;

/// Largest representable pattern code.
pub const MAX_PATTERN_CODE: u64 = (1u64 << 63) - 1;

/// Physical spin `±1` of a two-symbol configuration entry.
#[inline]
pub fn ising_value(s: Symbol) -> f64 {
    2.0 * f64::from(s) - 1.0
}

/// A point of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(pub Vec<i32>);

impl Site {
    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim])
    }

    /// The unit vector `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        Site(c)
    }

    pub fn new(coords: impl Into<Vec<i32>>) -> Self {
        Site(coords.into())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn add(&self, other: &Site) -> Site {
        Site(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Site) -> Site {
        Site(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Site {
        Site(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, k: i32) -> Site {
        Site(self.0.iter().map(|a| a * k).collect())
    }

    pub fn linf(&self) -> u32 {
        self.0.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn l1(&self) -> u32 {
        self.0.iter().map(|a| a.unsigned_abs()).sum()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The sites of the cube `Λ_n = {x : -n ≤ x_i ≤ n}` in lexicographic order.
pub fn box_sites(dim: usize, n: usize) -> Vec<Site> {
    lattice_box(dim, -(n as i32), 2 * n + 1)
}

/// All sites of `{lo, .., lo + side - 1}^dim` in lexicographic order.
fn lattice_box(dim: usize, lo: i32, side: usize) -> Vec<Site> {
    let count = side.pow(dim as u32);
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![lo; dim];
    for _ in 0..count {
        out.push(Site(cur.clone()));
        for axis in (0..dim).rev() {
            cur[axis] += 1;
            if cur[axis] < lo + side as i32 {
                break;
            }
            cur[axis] = lo;
        }
    }
    out
}

/// How the exterior of a window is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Exterior spins are frozen to a boundary condition.
    Fixed,
    /// Terms crossing the window edge are dropped.
    Free,
    /// Periodic wraparound in every axis.
    Torus,
}

impl Geometry {
    pub fn token(self) -> &'static str {
        match self {
            Geometry::Fixed => "fixed",
            Geometry::Free => "free",
            Geometry::Torus => "torus",
        }
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Geometry::Fixed),
            "free" => Ok(Geometry::Free),
            "torus" | "periodic" => Ok(Geometry::Torus),
            other => Err(Error::Parse(format!("unknown geometry `{other}`"))),
        }
    }
}

/// A finite window of `Z^d` together with its alphabet size.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    dim: usize,
    side: usize,
    geometry: Geometry,
    alphabet: usize,
}

impl Window {
    /// The centred cube `Λ_n`.
    pub fn cube(dim: usize, n: usize, geometry: Geometry, alphabet: usize) -> Result<Self> {
        Self::with_side(dim, 2 * n + 1, geometry, alphabet)
    }

    /// A window of arbitrary side length. Even sides are mostly useful for tori.
    pub fn with_side(dim: usize, side: usize, geometry: Geometry, alphabet: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if side == 0 {
            return Err(invalid("side must be at least 1"));
        }
        if !(2..=256).contains(&alphabet) {
            return Err(invalid(format!("alphabet size {alphabet} not in 2..=256")));
        }
        match (side as u64).checked_pow(dim as u32) {
            Some(v) if v <= 1 << 32 => {}
            _ => return Err(invalid(format!("window {side}^{dim} too large"))),
        }
        Ok(Window {
            dim,
            side,
            geometry,
            alphabet,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// `n` such that the window is `Λ_n`, when the side is odd.
    pub fn radius(&self) -> Option<usize> {
        (self.side % 2 == 1).then_some(self.side / 2)
    }

    pub fn volume(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Smallest coordinate on each axis.
    pub fn lo(&self) -> i32 {
        -((self.side / 2) as i32)
    }

    /// Largest coordinate on each axis.
    pub fn hi(&self) -> i32 {
        self.lo() + self.side as i32 - 1
    }

    /// Same window with a different geometry.
    pub fn with_geometry(&self, geometry: Geometry) -> Window {
        Window {
            geometry,
            ..self.clone()
        }
    }

    pub fn sites(&self) -> Vec<Site> {
        lattice_box(self.dim, self.lo(), self.side)
    }

    pub fn contains(&self, site: &Site) -> bool {
        site.dim() == self.dim && site.0.iter().all(|&c| c >= self.lo() && c <= self.hi())
    }

    /// Position of `site` in site order, if it lies inside the window.
    pub fn index_of(&self, site: &Site) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let lo = self.lo();
        Some(
            site.0
                .iter()
                .fold(0usize, |acc, &c| acc * self.side + (c - lo) as usize),
        )
    }

    /// Position of `site` after periodic wrapping (meaningful on any window).
    pub fn wrapped_index(&self, site: &Site) -> usize {
        let lo = self.lo();
        let side = self.side as i32;
        site.0.iter().fold(0usize, |acc, &c| {
            acc * self.side + (c - lo).rem_euclid(side) as usize
        })
    }

    pub fn site_at(&self, mut index: usize) -> Site {
        let mut coords = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            coords[axis] = self.lo() + (index % self.side) as i32;
            index /= self.side;
        }
        Site(coords)
    }

    /// Indices of `Λ_k + shift` in site order, wrapping on tori.
    pub fn sub_cube_indices(&self, k: usize, shift: &Site) -> Result<Vec<usize>> {
        box_sites(self.dim, k)
            .iter()
            .map(|s| {
                let t = s.add(shift);
                match self.geometry {
                    Geometry::Torus => Ok(self.wrapped_index(&t)),
                    _ => self.index_of(&t).ok_or(Error::OutOfWindow { site: t.0 }),
                }
            })
            .collect()
    }

    /// Distance from the centred cube `Λ_k` to the window edge, if `Λ_k` fits.
    pub fn collar_width(&self, k: usize) -> Option<usize> {
        let k = k as i32;
        let width = (self.hi() - k).min(-k - self.lo());
        (width >= 0).then_some(width as usize)
    }

    /// Header line of the text format: `d n geometry |S|`.
    ///
    /// `n` is `(side - 1) / 2`; even sides print as a half-integer.
    pub fn header(&self) -> String {
        let n = if self.side % 2 == 1 {
            format!("{}", self.side / 2)
        } else {
            format!("{}.5", (self.side - 1) / 2)
        };
        format!("{} {} {} {}", self.dim, n, self.geometry.token(), self.alphabet)
    }

    pub fn parse_header(line: &str) -> Result<Self> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(Error::Parse(format!("bad window header `{line}`")));
        }
        let dim = toks[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension `{}`", toks[0])))?;
        let side = match toks[1].strip_suffix(".5") {
            Some(half) => {
                let m: usize = half
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad radius `{}`", toks[1])))?;
                2 * m + 2
            }
            None => {
                let n: usize = toks[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad radius `{}`", toks[1])))?;
                2 * n + 1
            }
        };
        let geometry = toks[2].parse()?;
        let alphabet = toks[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad alphabet size `{}`", toks[3])))?;
        Window::with_side(dim, side, geometry, alphabet)
    }
}

/// Sites of the exterior collar of width `width` around `window`, in
/// lexicographic order.
pub fn collar_sites(window: &Window, width: usize) -> Vec<Site> {
    lattice_box(window.dim, window.lo() - width as i32, window.side + 2 * width)
        .into_iter()
        .filter(|s| !window.contains(s))
        .collect()
}

/// Exterior spins of a fixed-boundary window.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// No frozen exterior (free and torus geometries).
    None,
    /// Every exterior site carries the same symbol.
    Uniform(Symbol),
    /// Explicit spins on the collar of the given width, in [`collar_sites`] order.
    Collar { width: usize, spins: Vec<Symbol> },
}

impl Boundary {
    /// The exterior symbol at `site`, which must lie outside `window`.
    pub fn spin_at(&self, window: &Window, site: &Site) -> Result<Symbol> {
        match self {
            Boundary::None => Err(Error::MissingBoundary {
                site: site.0.clone(),
            }),
            Boundary::Uniform(s) => Ok(*s),
            Boundary::Collar { width, spins } => {
                let sites = collar_sites(window, *width);
                sites
                    .binary_search(site)
                    .map(|i| spins[i])
                    .map_err(|_| Error::MissingBoundary {
                        site: site.0.clone(),
                    })
            }
        }
    }

    fn validate(&self, window: &Window) -> Result<()> {
        let fixed = window.geometry == Geometry::Fixed;
        match self {
            Boundary::None if fixed => Err(invalid("fixed geometry requires boundary spins")),
            Boundary::None => Ok(()),
            _ if !fixed => Err(invalid(format!(
                "{} geometry takes no boundary spins",
                window.geometry.token()
            ))),
            Boundary::Uniform(s) if (*s as usize) >= window.alphabet => {
                Err(invalid(format!("boundary symbol {s} outside alphabet")))
            }
            Boundary::Uniform(_) => Ok(()),
            Boundary::Collar { width, spins } => {
                let expected = collar_sites(window, *width).len();
                if spins.len() != expected {
                    return Err(invalid(format!(
                        "collar of width {width} needs {expected} spins, got {}",
                        spins.len()
                    )));
                }
                if spins.iter().any(|&s| s as usize >= window.alphabet) {
                    return Err(invalid("collar symbol outside alphabet"));
                }
                Ok(())
            }
        }
    }

    /// The symbol-wise image under a permutation of the alphabet.
    pub fn map_symbols(&self, perm: impl Fn(Symbol) -> Symbol) -> Boundary {
        match self {
            Boundary::None => Boundary::None,
            Boundary::Uniform(s) => Boundary::Uniform(perm(*s)),
            Boundary::Collar { width, spins } => Boundary::Collar {
                width: *width,
                spins: spins.iter().map(|&s| perm(s)).collect(),
            },
        }
    }
}

/// A spin assignment on a window, plus frozen exterior spins when the
/// geometry is fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    window: Window,
    spins: Vec<Symbol>,
    boundary: Boundary,
}

impl Configuration {
    pub fn new(window: Window, spins: Vec<Symbol>, boundary: Boundary) -> Result<Self> {
        if spins.len() != window.volume() {
            return Err(invalid(format!(
                "expected {} spins, got {}",
                window.volume(),
                spins.len()
            )));
        }
        if let Some(bad) = spins.iter().find(|&&s| s as usize >= window.alphabet) {
            return Err(invalid(format!("symbol {bad} outside alphabet")));
        }
        boundary.validate(&window)?;
        Ok(Configuration {
            window,
            spins,
            boundary,
        })
    }

    /// Every site set to `symbol`.
    pub fn constant(window: Window, symbol: Symbol, boundary: Boundary) -> Result<Self> {
        let v = window.volume();
        Self::new(window, vec![symbol; v], boundary)
    }

    /// Configuration whose site-order digits spell `code` in base `|S|`.
    pub fn from_code(window: Window, code: u64, boundary: Boundary) -> Result<Self> {
        let spins = decode(code, window.volume(), window.alphabet)?;
        Self::new(window, spins, boundary)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn spins(&self) -> &[Symbol] {
        &self.spins
    }

    pub fn spins_mut(&mut self) -> &mut [Symbol] {
        &mut self.spins
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn code(&self) -> Result<u64> {
        encode(&self.spins, self.window.alphabet)
    }

    /// The spin at an arbitrary site: interior, wrapped (torus) or frozen
    /// exterior (fixed geometry). Free windows have no exterior.
    pub fn spin_at(&self, site: &Site) -> Result<Symbol> {
        if let Some(i) = self.window.index_of(site) {
            return Ok(self.spins[i]);
        }
        match self.window.geometry {
            Geometry::Torus => Ok(self.spins[self.window.wrapped_index(site)]),
            Geometry::Fixed => self.boundary.spin_at(&self.window, site),
            Geometry::Free => Err(Error::OutOfWindow {
                site: site.0.clone(),
            }),
        }
    }

    /// Sum of physical `±1` spins (two-symbol alphabets).
    pub fn magnetization(&self) -> f64 {
        self.spins.iter().map(|&s| ising_value(s)).sum()
    }

    /// Spin line of the text format: space-separated symbols, then
    /// `| b` for a uniform boundary or `| collar w s..` for an explicit one.
    pub fn spin_line(&self) -> String {
        let mut line = join(&self.spins);
        match &self.boundary {
            Boundary::None => {}
            Boundary::Uniform(s) => line.push_str(&format!(" | {s}")),
            Boundary::Collar { width, spins } => {
                line.push_str(&format!(" | collar {width} {}", join(spins)))
            }
        }
        line
    }

    pub fn parse_spin_line(window: &Window, line: &str) -> Result<Self> {
        let (spins_part, boundary_part) = match line.split_once('|') {
            Some((a, b)) => (a, Some(b)),
            None => (line, None),
        };
        let spins = parse_symbols(spins_part)?;
        let boundary = match boundary_part {
            None => Boundary::None,
            Some(b) => {
                let toks: Vec<&str> = b.split_whitespace().collect();
                match toks.as_slice() {
                    [s] => Boundary::Uniform(parse_symbol(s)?),
                    ["collar", w, rest @ ..] => Boundary::Collar {
                        width: w
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad collar width `{w}`")))?,
                        spins: rest.iter().map(|t| parse_symbol(t)).collect::<Result<_>>()?,
                    },
                    _ => return Err(Error::Parse(format!("bad boundary `{b}`"))),
                }
            }
        };
        Configuration::new(window.clone(), spins, boundary)
    }

    /// Flat text format: header line then the spin line.
    pub fn to_text(&self) -> String {
        format!("{}\n{}\n", self.window.header(), self.spin_line())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty configuration".into()))?;
        let window = Window::parse_header(header)?;
        let spins = lines
            .next()
            .ok_or_else(|| Error::Parse("missing spin line".into()))?;
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines after spin line".into()));
        }
        Configuration::parse_spin_line(&window, spins)
    }
}

fn join(symbols: &[Symbol]) -> String {
    symbols
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_symbol(tok: &str) -> Result<Symbol> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad symbol `{tok}`")))
}

fn parse_symbols(s: &str) -> Result<Vec<Symbol>> {
    s.split_whitespace().map(parse_symbol).collect()
}

/// Non-normalized Hamming distance `Σ_x 1{ω_x ≠ η_x}`.
pub fn hamming_distance(omega: &Configuration, eta: &Configuration) -> Result<usize> {
    if omega.window != eta.window {
        return Err(Error::WindowMismatch(format!(
            "`{}` vs `{}`",
            omega.window.header(),
            eta.window.header()
        )));
    }
    Ok(symbol_distance(&omega.spins, &eta.spins))
}

#[inline]
pub(crate) fn symbol_distance(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// A pattern on the cube `Λ_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    dim: usize,
    radius: usize,
    alphabet: usize,
    symbols: Vec<Symbol>,
}

impl Pattern {
    pub fn new(dim: usize, radius: usize, alphabet: usize, symbols: Vec<Symbol>) -> Result<Self> {
        let expected = (2 * radius + 1).pow(dim as u32);
        if symbols.len() != expected {
            return Err(invalid(format!(
                "pattern on Λ_{radius} needs {expected} symbols, got {}",
                symbols.len()
            )));
        }
        if symbols.iter().any(|&s| s as usize >= alphabet) {
            return Err(invalid("pattern symbol outside alphabet"));
        }
        Ok(Pattern {
            dim,
            radius,
            alphabet,
            symbols,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Canonical base-`|S|` code, first site most significant.
    pub fn code(&self) -> Result<u64> {
        encode(&self.symbols, self.alphabet)
    }

    pub fn decode(code: u64, dim: usize, radius: usize, alphabet: usize) -> Result<Self> {
        let m = (2 * radius + 1).pow(dim as u32);
        Pattern::new(dim, radius, alphabet, decode(code, m, alphabet)?)
    }
}

/// `|S|^sites`, saturating at `u128::MAX`.
pub fn pattern_space_size(sites: usize, alphabet: usize) -> u128 {
    (alphabet as u128)
        .checked_pow(sites as u32)
        .unwrap_or(u128::MAX)
}

/// Whether every pattern on `sites` sites has a code `≤ 2^63 - 1`.
pub fn codes_fit(sites: usize, alphabet: usize) -> bool {
    pattern_space_size(sites, alphabet) <= u128::from(MAX_PATTERN_CODE) + 1
}

/// Base-`|S|` positional code of a symbol array, first entry most significant.
pub fn encode(symbols: &[Symbol], alphabet: usize) -> Result<u64> {
    if !codes_fit(symbols.len(), alphabet) {
        return Err(Error::CodeOverflow {
            sites: symbols.len(),
            alphabet,
        });
    }
    Ok(symbols
        .iter()
        .fold(0u64, |acc, &s| acc * alphabet as u64 + u64::from(s)))
}

/// Inverse of [`encode`] for arrays of length `sites`.
pub fn decode(code: u64, sites: usize, alphabet: usize) -> Result<Vec<Symbol>> {
    if !codes_fit(sites, alphabet) {
        return Err(Error::CodeOverflow { sites, alphabet });
    }
    let size = pattern_space_size(sites, alphabet);
    if u128::from(code) >= size {
        return Err(Error::CodeOutOfRange { code, size });
    }
    let mut out = vec![0; sites];
    decode_into(code, alphabet, &mut out);
    Ok(out)
}

/// Unchecked decode into a preallocated buffer.
#[inline]
pub(crate) fn decode_into(mut code: u64, alphabet: usize, out: &mut [Symbol]) {
    let q = alphabet as u64;
    for slot in out.iter_mut().rev() {
        *slot = (code % q) as Symbol;
        code /= q;
    }
}

/// The pattern read off `Λ_k + x` (the `Λ_k` window of `θ_{-x} ω`).
///
/// On tori the coordinates wrap; elsewhere the shifted cube must lie inside
/// the window.
pub fn shift_window(omega: &Configuration, x: &Site, k: usize) -> Result<Pattern> {
    let w = omega.window();
    let idx = w.sub_cube_indices(k, x)?;
    Pattern::new(
        w.dim(),
        k,
        w.alphabet(),
        idx.into_iter().map(|i| omega.spins[i]).collect(),
    )
}
