//! Dobrushin interdependence matrix and the certified GCB constant.
//!
//! `C(0,y)` is the largest total-variation distance between the single-site
//! kernels at the origin under two boundary conditions that differ only at
//! `y`. By shift invariance the origin row determines the whole matrix, and
//! `c = Σ_y C(0,y)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults::ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::lattice::{pattern_space_size, Site, Symbol};
use crate::potential::Potential;
use crate::specification::single_site_law;

/// One entry `C(0,y)` of the origin row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowEntry {
    pub y: Vec<i32>,
    pub value: f64,
}

/// Result of a Dobrushin certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DobrushinReport {
    pub c: f64,
    pub satisfied: bool,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub row: Vec<RowEntry>,
}

/// `D = 1 / (2 (1 - c)²)` for `c < 1`.
pub fn gcb_constant(c: f64) -> Option<f64> {
    (0.0..1.0).contains(&c).then(|| 1.0 / (2.0 * (1.0 - c) * (1.0 - c)))
}

/// Local energy evaluator at the origin, driven by the spins on the
/// neighbourhood.
struct OriginKernel {
    q: usize,
    /// Per term: the shape table and, per slot, `None` for the origin or the
    /// neighbourhood index.
    terms: Vec<(usize, Vec<Option<usize>>)>,
}

impl OriginKernel {
    fn new(potential: &Potential, neighbourhood: &[Site]) -> Self {
        let terms = potential
            .terms_through_origin()
            .into_iter()
            .map(|(shape, sites)| {
                // Slots follow the canonical (sorted) shape order so table
                // codes line up with `TermShape::energies`.
                let slots = sites
                    .iter()
                    .map(|s| {
                        if s.is_origin() {
                            None
                        } else {
                            Some(neighbourhood.binary_search(s).expect("neighbour"))
                        }
                    })
                    .collect();
                (shape, slots)
            })
            .collect();
        OriginKernel {
            q: potential.alphabet(),
            terms,
        }
    }

    fn law(&self, potential: &Potential, nb: &[Symbol], energies: &mut [f64], out: &mut [f64]) {
        let q = self.q;
        energies.iter_mut().for_each(|e| *e = 0.0);
        for (shape, slots) in &self.terms {
            let table = potential.shapes()[*shape].energies();
            let (mut base, mut mult) = (0usize, 0usize);
            for slot in slots {
                base *= q;
                mult *= q;
                match slot {
                    None => mult += 1,
                    Some(i) => base += nb[*i] as usize,
                }
            }
            for (a, e) in energies.iter_mut().enumerate() {
                *e += table[base + a * mult];
            }
        }
        single_site_law(energies, out);
    }
}

fn total_variation(p: &[f64], r: &[f64]) -> f64 {
    0.5 * p.iter().zip(r).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// The origin row `y ↦ C(0,y)` over the interaction neighbourhood, by
/// exhaustive search over neighbourhood configurations. Entries beyond the
/// range are zero and omitted.
pub fn interdependence_row(potential: &Potential) -> Result<Vec<RowEntry>> {
    let neighbourhood = potential.neighbourhood();
    let q = potential.alphabet();
    let states = pattern_space_size(neighbourhood.len(), q);
    if states > u128::from(ENUMERATION_CAP) {
        return Err(Error::EnumerationCap {
            states,
            cap: u128::from(ENUMERATION_CAP),
        });
    }
    let states = states as u64;
    let kernel = OriginKernel::new(potential, &neighbourhood);
    let m = neighbourhood.len();

    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|y| {
            let mut nb = vec![0 as Symbol; m];
            let mut e = vec![0.0; q];
            let (mut p, mut r) = (vec![0.0; q], vec![0.0; q]);
            let mut worst = 0.0f64;
            for code in 0..states {
                crate::lattice::decode_into(code, q, &mut nb);
                let a = nb[y];
                kernel.law(potential, &nb, &mut e, &mut p);
                // Unordered pairs suffice: TV is symmetric.
                for b in (a as usize + 1)..q {
                    nb[y] = b as Symbol;
                    kernel.law(potential, &nb, &mut e, &mut r);
                    worst = worst.max(total_variation(&p, &r));
                }
                nb[y] = a;
            }
            worst.min(1.0)
        })
        .collect();

    Ok(neighbourhood
        .into_iter()
        .zip(values)
        .map(|(y, value)| RowEntry { y: y.0, value })
        .collect())
}

/// `c = Σ_{y≠0} C(0,y)`.
pub fn dobrushin_constant(potential: &Potential) -> Result<f64> {
    Ok(interdependence_row(potential)?.iter().map(|e| e.value).sum())
}

/// Row, constant and (when `c < 1`) the certified GCB constant.
pub fn gcb_certificate(potential: &Potential) -> Result<DobrushinReport> {
    let row = interdependence_row(potential)?;
    let c: f64 = row.iter().map(|e| e.value).sum();
    let d = gcb_constant(c);
    Ok(DobrushinReport {
        c,
        satisfied: d.is_some(),
        d,
        row,
    })
}
