//! Probability tables over patterns on `Λ_k`.
//!
//! Tables are dense (indexed by pattern code) up to
//! [`DENSE_TABLE_CAP`](crate::defaults::DENSE_TABLE_CAP) entries and sparse
//! above. Sparse tables key patterns by code while codes fit in 63 bits and by
//! the raw symbol array beyond.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::defaults::DENSE_TABLE_CAP;
use crate::error::{invalid, Error, Result};
use crate::lattice::{codes_fit, encode, pattern_space_size, Symbol};

/// Identifies a pattern inside a table.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternKey {
    Code(u64),
    Symbols(Vec<Symbol>),
}

impl PatternKey {
    /// Key for a symbol array: the code when it fits, the symbols otherwise.
    pub fn of(symbols: &[Symbol], alphabet: usize) -> PatternKey {
        match encode(symbols, alphabet) {
            Ok(c) => PatternKey::Code(c),
            Err(_) => PatternKey::Symbols(symbols.to_vec()),
        }
    }

    fn render(&self) -> String {
        match self {
            PatternKey::Code(c) => c.to_string(),
            PatternKey::Symbols(s) => {
                let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                format!("s:{}", parts.join("."))
            }
        }
    }

    fn parse(tok: &str) -> Result<PatternKey> {
        match tok.strip_prefix("s:") {
            Some(rest) => rest
                .split('.')
                .map(|t| {
                    t.parse::<Symbol>()
                        .map_err(|_| Error::Parse(format!("bad symbol in key `{tok}`")))
                })
                .collect::<Result<Vec<_>>>()
                .map(PatternKey::Symbols),
            None => tok
                .parse()
                .map(PatternKey::Code)
                .map_err(|_| Error::Parse(format!("bad pattern code `{tok}`"))),
        }
    }
}

/// Whether a table is an exact law or normalized sample counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Exact,
    Empirical { samples: u64 },
}

#[derive(Clone, Debug, PartialEq)]
enum Table {
    Dense(Vec<f64>),
    Sparse(BTreeMap<PatternKey, f64>),
}

/// A probability table over `S^{Λ_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternDistribution {
    dim: usize,
    radius: usize,
    alphabet: usize,
    kind: DistributionKind,
    table: Table,
}

impl PatternDistribution {
    /// Dense exact table indexed by pattern code; must sum to 1 within 1e-9.
    pub fn from_dense(dim: usize, radius: usize, alphabet: usize, probs: Vec<f64>) -> Result<Self> {
        let sites = cube_volume(dim, radius);
        if pattern_space_size(sites, alphabet) != probs.len() as u128 {
            return Err(invalid(format!(
                "dense table for Λ_{radius} in d={dim} over {alphabet} symbols has wrong length {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(invalid("negative or NaN probability"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("probabilities sum to {total}")));
        }
        Ok(PatternDistribution {
            dim,
            radius,
            alphabet,
            kind: DistributionKind::Exact,
            table: Table::Dense(probs),
        })
    }

    /// Normalized pattern counts.
    pub fn from_counts(
        dim: usize,
        radius: usize,
        alphabet: usize,
        counts: &BTreeMap<PatternKey, u64>,
    ) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(invalid("no counts"));
        }
        let sites = cube_volume(dim, radius);
        let size = pattern_space_size(sites, alphabet);
        let table = if codes_fit(sites, alphabet) && size <= DENSE_TABLE_CAP as u128 {
            let mut dense = vec![0.0; size as usize];
            for (k, &c) in counts {
                match k {
                    PatternKey::Code(code) if (*code as u128) < size => {
                        dense[*code as usize] = c as f64 / total as f64
                    }
                    other => return Err(invalid(format!("key {other:?} outside pattern space"))),
                }
            }
            Table::Dense(dense)
        } else {
            Table::Sparse(
                counts
                    .iter()
                    .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
                    .collect(),
            )
        };
        Ok(PatternDistribution {
            dim,
            radius,
            alphabet,
            kind: DistributionKind::Empirical { samples: total },
            table,
        })
    }

    /// An exact table given sparsely (missing keys have probability 0).
    pub fn from_sparse(
        dim: usize,
        radius: usize,
        alphabet: usize,
        entries: BTreeMap<PatternKey, f64>,
    ) -> Result<Self> {
        let total: f64 = entries.values().sum();
        if (total - 1.0).abs() > 1e-9 || entries.values().any(|&p| !(p >= 0.0)) {
            return Err(invalid(format!("sparse table is not a probability ({total})")));
        }
        Ok(PatternDistribution {
            dim,
            radius,
            alphabet,
            kind: DistributionKind::Exact,
            table: Table::Sparse(entries),
        })
    }

    pub fn uniform(dim: usize, radius: usize, alphabet: usize) -> Result<Self> {
        let size = pattern_space_size(cube_volume(dim, radius), alphabet);
        if size > DENSE_TABLE_CAP as u128 {
            return Err(invalid("uniform table too large"));
        }
        Self::from_dense(dim, radius, alphabet, vec![1.0 / size as f64; size as usize])
    }

    pub fn point_mass(dim: usize, radius: usize, alphabet: usize, key: PatternKey) -> Result<Self> {
        Self::from_sparse(dim, radius, alphabet, BTreeMap::from([(key, 1.0)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Number of sites of `Λ_k`.
    pub fn sites(&self) -> usize {
        cube_volume(self.dim, self.radius)
    }

    pub fn prob(&self, key: &PatternKey) -> f64 {
        match (&self.table, key) {
            (Table::Dense(v), PatternKey::Code(c)) => v.get(*c as usize).copied().unwrap_or(0.0),
            (Table::Dense(_), PatternKey::Symbols(s)) => match encode(s, self.alphabet) {
                Ok(c) => self.prob(&PatternKey::Code(c)),
                Err(_) => 0.0,
            },
            (Table::Sparse(m), k) => m.get(k).copied().unwrap_or(0.0),
        }
    }

    /// Entries with positive probability, in key order.
    pub fn support(&self) -> Vec<(PatternKey, f64)> {
        match &self.table {
            Table::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| (PatternKey::Code(i as u64), p))
                .collect(),
            Table::Sparse(m) => m
                .iter()
                .filter(|(_, &p)| p > 0.0)
                .map(|(k, &p)| (k.clone(), p))
                .collect(),
        }
    }

    /// The dense probability vector, when the table is dense.
    pub fn dense(&self) -> Option<&[f64]> {
        match &self.table {
            Table::Dense(v) => Some(v),
            Table::Sparse(_) => None,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match &self.table {
            Table::Dense(v) => v.iter().sum(),
            Table::Sparse(m) => m.values().sum(),
        }
    }

    /// Errors unless both tables live on the same pattern space.
    pub fn check_same_shape(&self, other: &PatternDistribution) -> Result<()> {
        if (self.dim, self.radius, self.alphabet) != (other.dim, other.radius, other.alphabet) {
            return Err(Error::ShapeMismatch(format!(
                "(d={}, k={}, |S|={}) vs (d={}, k={}, |S|={})",
                self.dim, self.radius, self.alphabet, other.dim, other.radius, other.alphabet
            )));
        }
        Ok(())
    }

    /// Keys in the union of both supports, in order.
    pub(crate) fn joint_keys(&self, other: &PatternDistribution) -> Vec<PatternKey> {
        let mut keys: Vec<PatternKey> = self
            .support()
            .into_iter()
            .chain(other.support())
            .map(|(k, _)| k)
            .map(|k| match k {
                PatternKey::Symbols(s) => PatternKey::of(&s, self.alphabet),
                c => c,
            })
            .collect();
        keys.sort();
        keys.dedup();
        keys
    }

    /// Two-column `code probability` table, preceded by `# key=value` header
    /// lines. Probabilities print in shortest round-trip form.
    pub fn to_text(&self, extra_header: &[(&str, String)]) -> String {
        let mut out = String::new();
        let kind = match self.kind {
            DistributionKind::Exact => "exact".to_string(),
            DistributionKind::Empirical { samples } => format!("empirical:{samples}"),
        };
        let _ = writeln!(out, "# d={}", self.dim);
        let _ = writeln!(out, "# k={}", self.radius);
        let _ = writeln!(out, "# alphabet={}", self.alphabet);
        let _ = writeln!(out, "# kind={kind}");
        for (k, v) in extra_header {
            let _ = writeln!(out, "# {k}={v}");
        }
        match &self.table {
            Table::Dense(v) => {
                let _ = writeln!(out, "# layout=dense");
                for (i, p) in v.iter().enumerate() {
                    let _ = writeln!(out, "{i} {p}");
                }
            }
            Table::Sparse(m) => {
                let _ = writeln!(out, "# layout=sparse");
                for (k, p) in m {
                    let _ = writeln!(out, "{} {p}", k.render());
                }
            }
        }
        out
    }

    /// Parses [`to_text`](Self::to_text) output; returns the table and the
    /// header entries it did not consume.
    pub fn from_text(text: &str) -> Result<(Self, Vec<(String, String)>)> {
        let mut header: BTreeMap<String, String> = BTreeMap::new();
        let mut order = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(h) = line.strip_prefix('#') {
                let (k, v) = h
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("bad header line `{line}`")))?;
                order.push(k.to_string());
                header.insert(k.to_string(), v.to_string());
            } else {
                let (k, p) = line
                    .split_once(' ')
                    .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad probability in `{line}`")))?;
                rows.push((PatternKey::parse(k)?, p));
            }
        }
        let field = |k: &str| -> Result<usize> {
            header
                .get(k)
                .ok_or_else(|| Error::Parse(format!("missing header `{k}`")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad header `{k}`")))
        };
        let (dim, radius, alphabet) = (field("d")?, field("k")?, field("alphabet")?);
        let kind = match header.get("kind").map(String::as_str) {
            Some("exact") => DistributionKind::Exact,
            Some(k) => match k.strip_prefix("empirical:") {
                Some(n) => DistributionKind::Empirical {
                    samples: n.parse().map_err(|_| Error::Parse("bad sample count".into()))?,
                },
                None => return Err(Error::Parse(format!("bad kind `{k}`"))),
            },
            None => return Err(Error::Parse("missing header `kind`".into())),
        };
        let table = match header.get("layout").map(String::as_str) {
            Some("dense") => {
                let mut v = vec![0.0; rows.len()];
                for (i, (k, p)) in rows.into_iter().enumerate() {
                    if k != PatternKey::Code(i as u64) {
                        return Err(Error::Parse("dense rows out of order".into()));
                    }
                    v[i] = p;
                }
                Table::Dense(v)
            }
            Some("sparse") => Table::Sparse(rows.into_iter().collect()),
            _ => return Err(Error::Parse("missing or bad `layout`".into())),
        };
        let consumed = ["d", "k", "alphabet", "kind", "layout"];
        let extra = order
            .into_iter()
            .filter(|k| !consumed.contains(&k.as_str()))
            .map(|k| {
                let v = header[&k].clone();
                (k, v)
            })
            .collect();
        Ok((
            PatternDistribution {
                dim,
                radius,
                alphabet,
                kind,
                table,
            },
            extra,
        ))
    }
}

pub(crate) fn cube_volume(dim: usize, radius: usize) -> usize {
    (2 * radius + 1).pow(dim as u32)
}
