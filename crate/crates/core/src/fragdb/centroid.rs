//! Per-residue centroid geometry: distance, bend and torsion of the side-chain
//! center relative to the Cα triple around it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fragdb::AminoAcid;
use crate::geometry::{place_centroid, CentroidParams, Vec3};

/// Centroid parameters for all 20 residues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidGeometry {
    params: BTreeMap<AminoAcid, CentroidParams>,
}

impl Default for CentroidGeometry {
    /// Generic starting values used for residues a corpus does not cover.
    /// Distances approximate side-chain center offsets; angles are shared.
    fn default() -> Self {
        use AminoAcid::*;
        let distances = [
            (Ala, 1.53),
            (Arg, 4.10),
            (Asn, 2.50),
            (Asp, 2.50),
            (Cys, 2.10),
            (Gln, 3.10),
            (Glu, 3.10),
            (Gly, 0.0),
            (His, 3.10),
            (Ile, 2.30),
            (Leu, 2.60),
            (Lys, 3.50),
            (Met, 3.00),
            (Phe, 3.40),
            (Pro, 1.90),
            (Ser, 1.90),
            (Thr, 1.95),
            (Trp, 3.90),
            (Tyr, 3.80),
            (Val, 1.95),
        ];
        CentroidGeometry {
            params: distances
                .into_iter()
                .map(|(a, d)| (a, CentroidParams::new(d, 110.0, -125.0)))
                .collect(),
        }
    }
}

impl CentroidGeometry {
    pub fn get(&self, a: AminoAcid) -> CentroidParams {
        self.params[&a]
    }

    pub fn set(&mut self, a: AminoAcid, p: CentroidParams) {
        self.params.insert(a, p);
    }

    pub fn iter(&self) -> impl Iterator<Item = (AminoAcid, CentroidParams)> + '_ {
        self.params.iter().map(|(&a, &p)| (a, p))
    }

    /// Average Cα–centroid distance, used as the contact radius.
    pub fn radius(&self, a: AminoAcid) -> f64 {
        self.params[&a].distance
    }

    pub fn place(&self, a: AminoAcid, prev: Vec3, cur: Vec3, next: Vec3) -> Result<Vec3> {
        place_centroid(prev, cur, next, &self.params[&a])
    }

    /// Averages measured parameters per residue type; residues without
    /// samples keep the values already in `self`. Torsions use the circular
    /// mean.
    pub fn fit(&mut self, samples: &[(AminoAcid, CentroidParams)]) {
        let mut acc: BTreeMap<AminoAcid, (usize, f64, f64, f64, f64)> = BTreeMap::new();
        for &(a, p) in samples {
            let e = acc.entry(a).or_default();
            let t = p.torsion.to_radians();
            e.0 += 1;
            e.1 += p.distance;
            e.2 += p.bend;
            e.3 += t.cos();
            e.4 += t.sin();
        }
        for (a, (n, d, b, c, s)) in acc {
            if a == AminoAcid::Gly {
                continue;
            }
            let n = n as f64;
            self.params.insert(
                a,
                CentroidParams::new(d / n, b / n, s.atan2(c).to_degrees()),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ideal_chain;

    #[test]
    fn defaults_cover_all_residues() {
        let g = CentroidGeometry::default();
        assert_eq!(g.iter().count(), 20);
        assert_eq!(g.radius(AminoAcid::Gly), 0.0);
    }

    #[test]
    fn fit_recovers_measured_values() {
        let ca = ideal_chain(3, 3.8, 93.8, 52.3);
        let truth = CentroidParams::new(1.53, 112.0, 170.0);
        let c1 = crate::geometry::place_centroid(ca[0], ca[1], ca[2], &truth).unwrap();
        let truth2 = CentroidParams::new(1.53, 108.0, -170.0);
        let c2 = crate::geometry::place_centroid(ca[0], ca[1], ca[2], &truth2).unwrap();
        let samples = vec![
            (
                AminoAcid::Ala,
                CentroidParams::measure(ca[0], ca[1], ca[2], c1).unwrap(),
            ),
            (
                AminoAcid::Ala,
                CentroidParams::measure(ca[0], ca[1], ca[2], c2).unwrap(),
            ),
        ];
        let mut g = CentroidGeometry::default();
        g.fit(&samples);
        let p = g.get(AminoAcid::Ala);
        assert!((p.distance - 1.53).abs() < 1e-9);
        assert!((p.bend - 110.0).abs() < 1e-9);
        // circular mean of 170 and -170 is 180, not 0
        assert!((p.torsion.abs() - 180.0).abs() < 1e-9);
        assert_eq!(
            g.get(AminoAcid::Leu),
            CentroidGeometry::default().get(AminoAcid::Leu)
        );
    }
}
