//! Asteroid catalog ingestion, pruning, synthesis, persistence, and the Earth
//! ephemeris used for launch legs.
//!
//! File format (UTF-8 text): `#` starts a comment line; data lines are
//! whitespace-separated columns
//! `id epoch_mjd a_au e i_deg raan_deg argp_deg M_deg mass_kg`.

use crate::astro::{kep_to_cart, CartesianState, Constants, Epoch, KeplerianElements, TAU};
use crate::{Error, Result, V3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsteroidRecord {
    pub id: u64,
    pub elements: KeplerianElements,
    /// Initial mass, kg.
    pub m0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub records: Vec<AsteroidRecord>,
    /// Provenance label (file path or synthesis parameters).
    pub source: String,
    index: BTreeMap<u64, usize>,
}

impl Catalog {
    /// Build a catalog, rejecting duplicate ids.  Emptiness is allowed here;
    /// loaders enforce the non-empty invariant at the boundary.
    pub fn new(records: Vec<AsteroidRecord>, source: String) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (pos, rec) in records.iter().enumerate() {
            if index.insert(rec.id, pos).is_some() {
                return Err(Error::DuplicateId(rec.id));
            }
        }
        Ok(Catalog {
            records,
            source,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&AsteroidRecord> {
        self.index.get(&id).map(|&pos| &self.records[pos])
    }

    /// State of asteroid `id` at epoch `t`.
    pub fn state(&self, id: u64, t: Epoch, c: &Constants) -> Result<CartesianState> {
        let rec = self
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown asteroid id {id}")))?;
        kep_to_cart(&rec.elements, t, c)
    }
}

/// Parse catalog text (panic-free on arbitrary input).
pub fn parse_catalog(text: &str, source: &str) -> Result<Catalog> {
    let mut records = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 9 {
            return Err(Error::parse(
                source,
                lineno,
                format!("expected 9 columns, found {}", cols.len()),
            ));
        }
        let id: u64 = cols[0]
            .parse()
            .map_err(|e| Error::parse(source, lineno, format!("bad id {:?}: {e}", cols[0])))?;
        let mut f = [0.0f64; 8];
        for (k, (slot, col)) in f.iter_mut().zip(&cols[1..]).enumerate() {
            *slot = col.parse().map_err(|e| {
                Error::parse(source, lineno, format!("bad column {}: {e}", k + 2))
            })?;
        }
        let [epoch_mjd, a_au, e, i_deg, raan_deg, argp_deg, m_deg, mass_kg] = f;
        if !(mass_kg.is_finite() && mass_kg > 0.0) {
            return Err(Error::parse(
                source,
                lineno,
                format!("mass must be positive, found {mass_kg}"),
            ));
        }
        let elements = KeplerianElements {
            a_au,
            e,
            i: i_deg.to_radians(),
            raan: raan_deg.to_radians(),
            argp: argp_deg.to_radians(),
            m0: m_deg.to_radians(),
            ref_epoch: Epoch::new(epoch_mjd),
        };
        elements
            .validate()
            .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        records.push(AsteroidRecord {
            id,
            elements,
            m0: mass_kg,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyCatalog(source.to_string()));
    }
    Catalog::new(records, source.to_string())
}

pub fn load_catalog(path: &Path) -> Result<Catalog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_catalog(&text, &path.display().to_string())
}

/// Write the catalog in the documented text format.  Angles are stored in
/// degrees; the shortest round-trip float formatting keeps a reload faithful
/// to within one unit in the last place of the radian values.
pub fn save_catalog(cat: &Catalog, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("# asteroid catalog\n");
    out.push_str(&format!("# source: {}\n", cat.source));
    out.push_str("# id epoch_mjd a_au e i_deg raan_deg argp_deg M_deg mass_kg\n");
    for r in &cat.records {
        let el = &r.elements;
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {} {}\n",
            r.id,
            el.ref_epoch.mjd,
            el.a_au,
            el.e,
            el.i.to_degrees(),
            el.raan.to_degrees(),
            el.argp.to_degrees(),
            el.m0.to_degrees(),
            r.m0
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Selection box applied to a catalog.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PruneBounds {
    pub a_max_au: f64,
    pub e_max: f64,
    /// rad
    pub i_max: f64,
    pub m_min_kg: f64,
}

impl Default for PruneBounds {
    fn default() -> Self {
        PruneBounds {
            a_max_au: 2.8,
            e_max: 0.1584,
            i_max: 8.897f64.to_radians(),
            m_min_kg: 5.8497e13,
        }
    }
}

/// Keep exactly the records inside the closed box
/// a <= a_max, e <= e_max, i <= i_max, m0 >= m_min; order preserved.
/// Never fails; may return an empty catalog.
pub fn prune(cat: &Catalog, b: &PruneBounds) -> Catalog {
    let records: Vec<AsteroidRecord> = cat
        .records
        .iter()
        .filter(|r| {
            r.elements.a_au <= b.a_max_au
                && r.elements.e <= b.e_max
                && r.elements.i <= b.i_max
                && r.m0 >= b.m_min_kg
        })
        .copied()
        .collect();
    Catalog::new(records, format!("{} (pruned)", cat.source))
        .expect("pruning a unique-id catalog preserves uniqueness")
}

/// Element ranges for synthetic catalogs.  Masses are drawn log-uniformly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthRanges {
    pub a_au: (f64, f64),
    pub e: (f64, f64),
    /// rad
    pub i: (f64, f64),
    pub mass_kg: (f64, f64),
    pub epoch_mjd: f64,
}

impl Default for SynthRanges {
    fn default() -> Self {
        // Inside the default pruning box by construction.
        SynthRanges {
            a_au: (0.85, 2.8),
            e: (0.0, 0.1584),
            i: (0.0, 8.897f64.to_radians()),
            mass_kg: (5.8497e13, 1.0e17),
            epoch_mjd: 95739.0,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Deterministic synthetic catalog: ids 1..=n, elements uniform in the given
/// ranges (node/perihelion/anomaly over the full circle), masses log-uniform.
pub fn synth_catalog(n: usize, seed: u64, ranges: &SynthRanges) -> Result<Catalog> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one asteroid".into()));
    }
    for (name, (lo, hi)) in [
        ("a_au", ranges.a_au),
        ("e", ranges.e),
        ("i", ranges.i),
        ("mass_kg", ranges.mass_kg),
    ] {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi || (name != "e" && name != "i" && lo <= 0.0)
        {
            return Err(Error::DegenerateRanges(format!("{name}: [{lo}, {hi}]")));
        }
        if (name == "e" || name == "i") && lo < 0.0 {
            return Err(Error::DegenerateRanges(format!("{name}: [{lo}, {hi}]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for id in 1..=n as u64 {
        let a_au = draw(&mut rng, ranges.a_au.0, ranges.a_au.1);
        let e = draw(&mut rng, ranges.e.0, ranges.e.1);
        let i = draw(&mut rng, ranges.i.0, ranges.i.1);
        let raan = draw(&mut rng, 0.0, TAU);
        let argp = draw(&mut rng, 0.0, TAU);
        let m0 = draw(&mut rng, 0.0, TAU);
        let mass = draw(&mut rng, ranges.mass_kg.0.ln(), ranges.mass_kg.1.ln()).exp();
        records.push(AsteroidRecord {
            id,
            elements: KeplerianElements {
                a_au,
                e,
                i,
                raan,
                argp,
                m0,
                ref_epoch: Epoch::new(ranges.epoch_mjd),
            },
            m0: mass,
        });
    }
    Catalog::new(records, format!("synthetic(n={n}, seed={seed})"))
}

/// Earth's heliocentric orbit model for launch legs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EarthModel {
    pub elements: KeplerianElements,
}

impl Default for EarthModel {
    fn default() -> Self {
        EarthModel {
            elements: KeplerianElements {
                a_au: 1.0,
                e: 0.0167,
                i: 0.0,
                raan: 0.0,
                argp: 0.0,
                m0: 0.0,
                ref_epoch: Epoch::new(95739.0),
            },
        }
    }
}

impl EarthModel {
    pub fn state(&self, t: Epoch, c: &Constants) -> Result<CartesianState> {
        kep_to_cart(&self.elements, t, c)
    }

    pub fn position(&self, t: Epoch, c: &Constants) -> Result<V3> {
        Ok(self.state(t, c)?.r)
    }
}
