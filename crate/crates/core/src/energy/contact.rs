use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fragdb::{AminoAcid, CentroidGeometry};
use crate::io::ParsedChain;

/// Floor for centroid radii; glycine's centroid sits on its Cα.
pub const MIN_RADIUS: f64 = 1.0;

/// Participant in a contact: a residue's side-chain centroid or a backbone Cα.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContactType {
    Residue(AminoAcid),
    Backbone,
}

impl ContactType {
    pub const COUNT: usize = 21;

    pub fn index(self) -> usize {
        match self {
            ContactType::Residue(a) => a.index(),
            ContactType::Backbone => 20,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContactType::Residue(a) => a.three_letter(),
            ContactType::Backbone => "BB",
        }
    }

    pub fn parse(s: &str) -> Option<ContactType> {
        if s == "BB" {
            return Some(ContactType::Backbone);
        }
        s.parse().ok().map(ContactType::Residue)
    }

    pub fn all() -> impl Iterator<Item = ContactType> {
        AminoAcid::ALL
            .into_iter()
            .map(ContactType::Residue)
            .chain(std::iter::once(ContactType::Backbone))
    }
}

/// Symmetric contact energies over the 20 residues plus the backbone
/// pseudo-type, and contact radii. The backbone row always mirrors ASN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactEnergyTable {
    e: Vec<[f64; 21]>,
    radii: [f64; 21],
}

const ASN: ContactType = ContactType::Residue(AminoAcid::Asn);

impl ContactEnergyTable {
    /// Table with every energy zero and radii taken from centroid geometry.
    pub fn neutral(geometry: &CentroidGeometry) -> Self {
        let mut t = ContactEnergyTable {
            e: vec![[0.0; 21]; 21],
            radii: [MIN_RADIUS; 21],
        };
        for a in AminoAcid::ALL {
            t.set_radius(ContactType::Residue(a), geometry.radius(a));
        }
        t
    }

    pub fn energy(&self, a: ContactType, b: ContactType) -> f64 {
        self.e[a.index()][b.index()]
    }

    pub fn radius(&self, a: ContactType) -> f64 {
        self.radii[a.index()]
    }

    pub fn set_energy(&mut self, a: ContactType, b: ContactType, v: f64) {
        let a = if a == ContactType::Backbone { ASN } else { a };
        let b = if b == ContactType::Backbone { ASN } else { b };
        let (i, j) = (a.index(), b.index());
        self.e[i][j] = v;
        self.e[j][i] = v;
        let bb = ContactType::Backbone.index();
        let n = ASN.index();
        for k in 0..21 {
            self.e[bb][k] = self.e[n][k];
            self.e[k][bb] = self.e[k][n];
        }
        self.e[bb][bb] = self.e[n][n];
    }

    /// Radii are floored at [`MIN_RADIUS`]; setting ASN also sets the backbone.
    pub fn set_radius(&mut self, a: ContactType, r: f64) {
        let r = r.max(MIN_RADIUS);
        self.radii[a.index()] = r;
        if a == ASN {
            self.radii[ContactType::Backbone.index()] = r;
        }
    }

    /// Log-odds placeholder from corpus statistics: a contact is a pair of
    /// side-chain centers (|i−j| ≥ 2) no farther apart than the sum of their
    /// radii; e_ab = −ln((obs_ab + 1) / (exp_ab + 1)) with the expected count
    /// from residue composition.
    pub fn from_corpus(
        chains: &[ParsedChain],
        geometry: &CentroidGeometry,
        mass_weighted: bool,
    ) -> Self {
        let mut table = ContactEnergyTable::neutral(geometry);
        let mut composition = [0usize; 20];
        let mut observed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut contacts = 0usize;
        for chain in chains {
            let centers: Vec<_> = chain
                .residues
                .iter()
                .map(|r| r.side_chain_center(mass_weighted))
                .collect();
            for (i, ri) in chain.residues.iter().enumerate() {
                composition[ri.amino.index()] += 1;
                for j in i + 2..chain.residues.len() {
                    let rj = &chain.residues[j];
                    let (ti, tj) = (
                        ContactType::Residue(ri.amino),
                        ContactType::Residue(rj.amino),
                    );
                    if centers[i].distance(centers[j]) <= table.radius(ti) + table.radius(tj) {
                        let key = (
                            ri.amino.index().min(rj.amino.index()),
                            ri.amino.index().max(rj.amino.index()),
                        );
                        *observed.entry(key).or_default() += 1;
                        contacts += 1;
                    }
                }
            }
        }
        let total: usize = composition.iter().sum();
        if total == 0 {
            return table;
        }
        for a in AminoAcid::ALL {
            for b in AminoAcid::ALL {
                let (i, j) = (a.index(), b.index());
                if j < i {
                    continue;
                }
                let fa = composition[i] as f64 / total as f64;
                let fb = composition[j] as f64 / total as f64;
                let mult = if i == j { 1.0 } else { 2.0 };
                let expected = contacts as f64 * fa * fb * mult;
                let obs = observed.get(&(i, j)).copied().unwrap_or(0) as f64;
                let v = -((obs + 1.0) / (expected + 1.0)).ln();
                table.set_energy(ContactType::Residue(a), ContactType::Residue(b), v);
            }
        }
        table
    }
}

/// One pair's contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEnergy {
    pub value: f64,
    /// Distance below the minimum; the constraint model forbids this.
    pub clash: bool,
}

/// Contact energy of two points at distance `d`: e_ij inside the contact
/// distance c = r_i + r_j, e_ij·(c/d)² beyond it, zero at or past `cutoff`.
/// Below `d_min` the value is clamped to e_ij and flagged.
pub fn contact_pair_energy(
    a: ContactType,
    b: ContactType,
    d: f64,
    table: &ContactEnergyTable,
    d_min: f64,
    cutoff: f64,
) -> PairEnergy {
    let e = table.energy(a, b);
    if d >= cutoff {
        return PairEnergy {
            value: 0.0,
            clash: false,
        };
    }
    let c = table.radius(a) + table.radius(b);
    let value = if d <= c { e } else { e * (c / d) * (c / d) };
    PairEnergy {
        value,
        clash: d < d_min,
    }
}
