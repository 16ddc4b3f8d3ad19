//! Statistical energy: a centroid/backbone contact potential plus a torsion
//! potential of mean force. Totals are integers in units of 1/1000.

mod contact;
mod torsion;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use contact::{contact_pair_energy, ContactEnergyTable, ContactType, PairEnergy, MIN_RADIUS};
pub use torsion::{pmf_from_counts, torsion_bin, torsion_energy, TorsionPmf};

use crate::error::{Error, Result};
use crate::fragdb::{class_tuple, extract_occurrences, AminoAcid, CentroidGeometry, ClassCode};
use crate::geometry::{torsion_angle, Vec3};
use crate::io::ParsedChain;

/// Integer energy scale.
pub const ENERGY_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Shortest admissible distance, Å.
    pub d_min: f64,
    /// Contacts at or beyond this distance contribute nothing, Å.
    pub cutoff: f64,
    pub contact_weight: f64,
    pub torsion_weight: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            d_min: 3.2,
            cutoff: 12.0,
            contact_weight: 1.0,
            torsion_weight: 1.0,
        }
    }
}

/// Settings for deriving tables from a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfParams {
    pub bin_deg: f64,
    pub pseudocount: f64,
    pub k: f64,
    /// Class tuples with fewer samples use the pooled histogram.
    pub min_samples: usize,
}

impl Default for PmfParams {
    fn default() -> Self {
        PmfParams {
            bin_deg: 10.0,
            pseudocount: 1.0,
            k: 1.0,
            min_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTables {
    pub contact: ContactEnergyTable,
    pub pmf: TorsionPmf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub contact_total: i64,
    pub torsion_total: i64,
    pub total: i64,
    /// Pairs closer than `d_min`.
    pub clashes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyTerm {
    /// Side-chain centroid pair.
    Centroid { i: usize, j: usize, value: f64 },
    /// Backbone Cα pair.
    Backbone { i: usize, j: usize, value: f64 },
    /// Torsion of Cα i..i+3.
    Torsion { i: usize, value: f64 },
}

impl EnergyTerm {
    pub fn value(&self) -> f64 {
        match *self {
            EnergyTerm::Centroid { value, .. }
            | EnergyTerm::Backbone { value, .. }
            | EnergyTerm::Torsion { value, .. } => value,
        }
    }
}

fn check_input(seq: &[AminoAcid], ca: &[Vec3], centroids: &[Option<Vec3>]) -> Result<()> {
    let n = seq.len();
    if ca.len() != n || centroids.len() != n {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {n} residues, {} Cα, {} centroids",
            ca.len(),
            centroids.len()
        )));
    }
    if let Some(i) = ca.iter().position(|p| !p.is_finite()) {
        return Err(Error::InvalidInput(format!("Cα {} not placed", i + 1)));
    }
    for i in 1..n.saturating_sub(1) {
        match centroids[i] {
            Some(c) if c.is_finite() => {}
            _ => {
                return Err(Error::InvalidInput(format!(
                    "centroid {} not placed",
                    i + 1
                )))
            }
        }
    }
    Ok(())
}

/// Visits every energy term in a fixed order: for each i, the pairs (i, j)
/// with j ≥ i + 2 (centroid pair, then Cα pair), then all torsions. Only
/// interior centroids take part; terminal ones are output decoration.
fn for_each_term(
    seq: &[AminoAcid],
    ca: &[Vec3],
    centroids: &[Option<Vec3>],
    tables: &EnergyTables,
    params: &EnergyParams,
    mut visit: impl FnMut(EnergyTerm, bool),
) {
    let n = seq.len();
    let interior = |i: usize| i > 0 && i + 1 < n;
    for i in 0..n {
        for j in i + 2..n {
            if interior(i) && interior(j) {
                let (ci, cj) = (centroids[i].unwrap(), centroids[j].unwrap());
                let e = contact_pair_energy(
                    ContactType::Residue(seq[i]),
                    ContactType::Residue(seq[j]),
                    ci.distance(cj),
                    &tables.contact,
                    params.d_min,
                    params.cutoff,
                );
                visit(
                    EnergyTerm::Centroid {
                        i,
                        j,
                        value: e.value,
                    },
                    e.clash,
                );
            }
            let e = contact_pair_energy(
                ContactType::Backbone,
                ContactType::Backbone,
                ca[i].distance(ca[j]),
                &tables.contact,
                params.d_min,
                params.cutoff,
            );
            visit(
                EnergyTerm::Backbone {
                    i,
                    j,
                    value: e.value,
                },
                e.clash,
            );
        }
    }
    for i in 0..n.saturating_sub(3) {
        let g = class_tuple(&seq[i..i + 4]);
        let value = match torsion_angle(ca[i], ca[i + 1], ca[i + 2], ca[i + 3]) {
            Ok(t) => torsion_energy(&g, t, &tables.pmf),
            Err(_) => 0.0,
        };
        visit(EnergyTerm::Torsion { i, value }, false);
    }
}

/// Energy of a placed chain. `centroids[i]` must be set for every interior
/// residue. Rounding: total = round(1000·(w_c·Σcontact + w_t·Σtorsion)),
/// contact_total = round(1000·w_c·Σcontact), torsion_total = the rest.
pub fn evaluate(
    seq: &[AminoAcid],
    ca: &[Vec3],
    centroids: &[Option<Vec3>],
    tables: &EnergyTables,
    params: &EnergyParams,
) -> Result<EnergyBreakdown> {
    check_input(seq, ca, centroids)?;
    let (mut contact, mut torsion, mut clashes) = (0.0, 0.0, 0);
    for_each_term(seq, ca, centroids, tables, params, |t, clash| {
        match t {
            EnergyTerm::Torsion { value, .. } => torsion += value,
            _ => contact += t.value(),
        }
        clashes += usize::from(clash);
    });
    Ok(breakdown(contact, torsion, clashes, params))
}

pub(crate) fn breakdown(
    contact: f64,
    torsion: f64,
    clashes: usize,
    params: &EnergyParams,
) -> EnergyBreakdown {
    let c = params.contact_weight * contact;
    let t = params.torsion_weight * torsion;
    let total = (ENERGY_SCALE * (c + t)).round() as i64;
    let contact_total = (ENERGY_SCALE * c).round() as i64;
    EnergyBreakdown {
        contact_total,
        torsion_total: total - contact_total,
        total,
        clashes,
    }
}

/// Every individual contribution, unweighted.
pub fn evaluate_terms(
    seq: &[AminoAcid],
    ca: &[Vec3],
    centroids: &[Option<Vec3>],
    tables: &EnergyTables,
    params: &EnergyParams,
) -> Result<Vec<EnergyTerm>> {
    check_input(seq, ca, centroids)?;
    let mut out = Vec::new();
    for_each_term(seq, ca, centroids, tables, params, |t, _| out.push(t));
    Ok(out)
}

impl EnergyTables {
    pub fn neutral(geometry: &CentroidGeometry, bin_deg: f64) -> Self {
        EnergyTables {
            contact: ContactEnergyTable::neutral(geometry),
            pmf: TorsionPmf::flat(bin_deg),
        }
    }

    /// Placeholder tables from a corpus: log-odds contact energies and the
    /// torsion PMF of its 4-residue windows.
    pub fn derive(
        chains: &[ParsedChain],
        geometry: &CentroidGeometry,
        break_tolerance: f64,
        mass_weighted: bool,
        pmf: &PmfParams,
    ) -> Self {
        let (occurrences, _) = extract_occurrences(chains, break_tolerance, mass_weighted);
        EnergyTables {
            contact: ContactEnergyTable::from_corpus(chains, geometry, mass_weighted),
            pmf: TorsionPmf::from_occurrences(
                &occurrences,
                pmf.bin_deg,
                pmf.pseudocount,
                pmf.k,
                pmf.min_samples,
            ),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# contact energies: log-odds placeholder derived from the build corpus\n");
        for a in ContactType::all().filter(|&t| t != ContactType::Backbone) {
            writeln!(s, "radius {} {}", a.name(), self.contact.radius(a)).unwrap();
        }
        let types: Vec<ContactType> = ContactType::all()
            .filter(|&t| t != ContactType::Backbone)
            .collect();
        for (k, &a) in types.iter().enumerate() {
            for &b in &types[k..] {
                writeln!(
                    s,
                    "contact {} {} {}",
                    a.name(),
                    b.name(),
                    self.contact.energy(a, b)
                )
                .unwrap();
            }
        }
        let row = |s: &mut String, key: String, v: &[f64]| {
            write!(s, "pmf {key} {}", self.pmf.bin_deg()).unwrap();
            for x in v {
                write!(s, " {x}").unwrap();
            }
            s.push('\n');
        };
        row(&mut s, "*".into(), self.pmf.pooled());
        for (g, v) in self.pmf.class_tables() {
            row(&mut s, format!("{} {} {} {}", g[0], g[1], g[2], g[3]), v);
        }
        s
    }

    /// Parses `radius`, `contact` and `pmf` records. Contacts not listed are
    /// zero; `BB` entries alias the ASN row.
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Format {
            path: label.to_string(),
            line,
            msg,
        };
        let mut contact = ContactEnergyTable::neutral(&CentroidGeometry::default());
        let mut pooled: Option<(f64, Vec<f64>)> = None;
        let mut by_class = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.split('#').next().unwrap_or("");
            let f: Vec<&str> = raw.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(line, format!("bad number `{s}`")))
            };
            let ty = |s: &str| {
                ContactType::parse(s).ok_or_else(|| err(line, format!("unknown type `{s}`")))
            };
            match f[0] {
                "radius" if f.len() == 3 => {
                    let r = num(f[2])?;
                    if !(r > 0.0) {
                        return Err(err(line, "radius must be positive".into()));
                    }
                    contact.set_radius(ty(f[1])?, r);
                }
                "contact" if f.len() == 4 => contact.set_energy(ty(f[1])?, ty(f[2])?, num(f[3])?),
                "pmf" if f.len() >= 3 => {
                    let (key, rest) = if f[1] == "*" {
                        (None, &f[2..])
                    } else if f.len() >= 6 {
                        let mut g = [ClassCode::UNKNOWN; 4];
                        for k in 0..4 {
                            let v: i8 = f[1 + k]
                                .parse()
                                .map_err(|_| err(line, format!("bad class `{}`", f[1 + k])))?;
                            g[k] = ClassCode::new(v).map_err(|e| err(line, e.to_string()))?;
                        }
                        (Some(g), &f[5..])
                    } else {
                        return Err(err(line, "malformed pmf record".into()));
                    };
                    let bin = num(rest[0])?;
                    let vals = rest[1..]
                        .iter()
                        .map(|s| num(s))
                        .collect::<Result<Vec<f64>>>()?;
                    if bin <= 0.0 || (360.0 / bin).round() as usize != vals.len() {
                        return Err(err(
                            line,
                            format!("expected {} values for {bin}° bins", 360.0 / bin),
                        ));
                    }
                    if vals.iter().any(|v| !v.is_finite()) {
                        return Err(err(line, "non-finite pmf value".into()));
                    }
                    match key {
                        None => pooled = Some((bin, vals)),
                        Some(g) => {
                            by_class.insert(g, vals);
                        }
                    }
                }
                other => return Err(err(line, format!("malformed `{other}` record"))),
            }
        }
        let (bin, pooled) = pooled.unwrap_or((10.0, vec![0.0; 36]));
        if by_class
            .values()
            .any(|v: &Vec<f64>| v.len() != pooled.len())
        {
            return Err(err(0, "pmf tables use different bin widths".into()));
        }
        Ok(EnergyTables {
            contact,
            pmf: TorsionPmf::from_tables(bin, pooled, by_class),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::fragdb::write_atomic(path, self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ideal_chain;
    use AminoAcid::*;

    fn tables() -> EnergyTables {
        let mut t = EnergyTables::neutral(&CentroidGeometry::default(), 10.0);
        t.contact
            .set_energy(ContactType::Residue(Leu), ContactType::Residue(Leu), -1.25);
        t.contact
            .set_energy(ContactType::Residue(Asn), ContactType::Residue(Asn), -0.3);
        let mut counts = vec![1usize; 36];
        counts[23] = 20;
        t.pmf = TorsionPmf::from_tables(10.0, pmf_from_counts(&counts, 1.0, 1.0), BTreeMap::new());
        t
    }

    #[test]
    fn tiny_chains() {
        let t = tables();
        let p = EnergyParams::default();
        let e = evaluate(
            &[Ala, Leu],
            &ideal_chain(2, 3.8, 90.0, 0.0),
            &[None, None],
            &t,
            &p,
        )
        .unwrap();
        assert_eq!(e, EnergyBreakdown::default());
    }

    #[test]
    fn isolated_four_residue_chain_is_single_torsion() {
        let mut t = tables();
        t.contact = ContactEnergyTable::neutral(&CentroidGeometry::default());
        let p = EnergyParams::default();
        let ca = ideal_chain(4, 3.8, 100.0, 50.0);
        let cen = [
            None,
            Some(ca[1] + Vec3::new(0.0, 0.0, 2.0)),
            Some(ca[2] + Vec3::new(0.0, 0.0, 2.0)),
            None,
        ];
        let seq = [Leu, Leu, Leu, Leu];
        let e = evaluate(&seq, &ca, &cen, &t, &p).unwrap();
        let tors = torsion_angle(ca[0], ca[1], ca[2], ca[3]).unwrap();
        let expect = (1000.0 * t.pmf.energy(&class_tuple(&seq), tors)).round() as i64;
        assert_eq!(e.total, expect);
        assert_eq!(e.contact_total, 0);
        assert_eq!(e.total, e.contact_total + e.torsion_total);
    }

    #[test]
    fn missing_centroid_is_error() {
        let ca = ideal_chain(4, 3.8, 100.0, 50.0);
        let r = evaluate(
            &[Ala; 4],
            &ca,
            &[None; 4],
            &tables(),
            &EnergyParams::default(),
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn text_round_trip() {
        let t = tables();
        let back = EnergyTables::parse(&t.to_text(), "t").unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn parse_rejects_bad_records() {
        assert!(EnergyTables::parse("radius ALA -1", "t").is_err());
        assert!(EnergyTables::parse("contact ALA XYZ 1.0", "t").is_err());
        assert!(EnergyTables::parse("pmf * 10 1 2 3", "t").is_err());
    }
}
