use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fragdb::{ClassTuple, TupleOccurrence};
use crate::geometry::torsion_angle;

/// Torsion potential of mean force over consecutive Cα 4-tuples: per class
/// tuple where the corpus has enough samples, pooled otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionPmf {
    bin_deg: f64,
    pooled: Vec<f64>,
    by_class: BTreeMap<ClassTuple, Vec<f64>>,
}

/// Bin of an angle in (−180°, 180°]; bin k covers (−180 + k·w, −180 + (k+1)·w].
pub fn torsion_bin(angle: f64, bin_deg: f64, bins: usize) -> usize {
    let mut a = angle;
    if a <= -180.0 {
        a += 360.0;
    }
    let k = ((a + 180.0) / bin_deg).ceil() as i64 - 1;
    k.clamp(0, bins as i64 - 1) as usize
}

/// Energies −k·ln(p_bin / p_uniform) with p_bin = (c + pc) / (N + K·pc).
pub fn pmf_from_counts(counts: &[usize], pseudocount: f64, k: f64) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    let bins = counts.len() as f64;
    counts
        .iter()
        .map(|&c| {
            let p = (c as f64 + pseudocount) / (n as f64 + bins * pseudocount);
            let v = -k * (p * bins).ln();
            // keep −0 out of files and comparisons
            v + 0.0
        })
        .collect()
}

impl TorsionPmf {
    /// A PMF that is zero everywhere.
    pub fn flat(bin_deg: f64) -> Self {
        let bins = (360.0 / bin_deg).round() as usize;
        TorsionPmf {
            bin_deg,
            pooled: vec![0.0; bins],
            by_class: BTreeMap::new(),
        }
    }

    pub fn from_tables(
        bin_deg: f64,
        pooled: Vec<f64>,
        by_class: BTreeMap<ClassTuple, Vec<f64>>,
    ) -> Self {
        TorsionPmf {
            bin_deg,
            pooled,
            by_class,
        }
    }

    /// Histograms the Cα torsion of every occurrence. Class tuples with fewer
    /// than `min_samples` occurrences use the pooled table.
    pub fn from_occurrences(
        occurrences: &[TupleOccurrence],
        bin_deg: f64,
        pseudocount: f64,
        k: f64,
        min_samples: usize,
    ) -> Self {
        let bins = (360.0 / bin_deg).round() as usize;
        let mut pooled = vec![0usize; bins];
        let mut by_class: BTreeMap<ClassTuple, Vec<usize>> = BTreeMap::new();
        for o in occurrences {
            let Ok(t) = torsion_angle(o.ca[0], o.ca[1], o.ca[2], o.ca[3]) else {
                continue;
            };
            let b = torsion_bin(t, bin_deg, bins);
            pooled[b] += 1;
            by_class.entry(o.classes).or_insert_with(|| vec![0; bins])[b] += 1;
        }
        TorsionPmf {
            bin_deg,
            pooled: pmf_from_counts(&pooled, pseudocount, k),
            by_class: by_class
                .into_iter()
                .filter(|(_, c)| c.iter().sum::<usize>() >= min_samples)
                .map(|(g, c)| (g, pmf_from_counts(&c, pseudocount, k)))
                .collect(),
        }
    }

    pub fn bin_deg(&self) -> f64 {
        self.bin_deg
    }

    pub fn bins(&self) -> usize {
        self.pooled.len()
    }

    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn class_tables(&self) -> &BTreeMap<ClassTuple, Vec<f64>> {
        &self.by_class
    }

    pub fn energy(&self, classes: &ClassTuple, angle: f64) -> f64 {
        let table = self.by_class.get(classes).unwrap_or(&self.pooled);
        table[torsion_bin(angle, self.bin_deg, table.len())]
    }
}

/// Energy of one torsion under `pmf`.
pub fn torsion_energy(classes: &ClassTuple, angle: f64, pmf: &TorsionPmf) -> f64 {
    pmf.energy(classes, angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragdb::{class_tuple, AminoAcid, ClassCode};
    use crate::geometry::{ideal_chain, Vec3};

    #[test]
    fn bins_cover_half_open_circle() {
        assert_eq!(torsion_bin(180.0, 10.0, 36), 35);
        assert_eq!(torsion_bin(-180.0, 10.0, 36), 35);
        assert_eq!(torsion_bin(-179.9, 10.0, 36), 0);
        assert_eq!(torsion_bin(-170.0, 10.0, 36), 0);
        assert_eq!(torsion_bin(-169.9, 10.0, 36), 1);
        assert_eq!(torsion_bin(0.0, 10.0, 36), 17);
    }

    #[test]
    fn uniform_histogram_is_zero() {
        assert!(pmf_from_counts(&[7; 36], 1.0, 1.0)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn doubled_bin_gives_minus_ln2() {
        let e = pmf_from_counts(&[5, 1, 1, 1], 1.0, 1.0);
        assert!((e[0] + 2f64.ln()).abs() < 1e-12);
        let e = pmf_from_counts(&[5, 1, 1, 1], 1.0, 2.5);
        assert!((e[0] + 2.5 * 2f64.ln()).abs() < 1e-12);
        assert!(e.iter().all(|v| v.is_finite()));
        assert!(pmf_from_counts(&[0, 0, 9, 0], 1.0, 1.0)
            .iter()
            .all(|v| v.is_finite()));
    }

    #[test]
    fn helix_minimum_at_modal_bin() {
        let res = [AminoAcid::Ala; 4];
        let occ = |t: f64| {
            let c = ideal_chain(4, 3.8, 93.8, t);
            TupleOccurrence {
                residues: res,
                classes: class_tuple(&res),
                ca: [c[0], c[1], c[2], c[3]],
                centroids: [Vec3::ZERO; 2],
                pid: "x".into(),
            }
        };
        let mut occs = Vec::new();
        for t in [52.3, 51.0, 55.0, 48.0, 53.5, 52.0, -60.0, 170.0, 58.5, 50.5] {
            occs.push(occ(t));
        }
        let pmf = TorsionPmf::from_occurrences(&occs, 10.0, 1.0, 1.0, 1);
        // histogram oracle
        let mut counts = [0usize; 36];
        for o in &occs {
            let t = torsion_angle(o.ca[0], o.ca[1], o.ca[2], o.ca[3]).unwrap();
            counts[((t + 180.0) / 10.0).ceil() as usize - 1] += 1;
        }
        let modal = (0..36)
            .max_by_key(|&b| (counts[b], std::cmp::Reverse(b)))
            .unwrap();
        let g = class_tuple(&res);
        let argmin = (0..3600)
            .map(|k| -180.0 + 0.1 * (k + 1) as f64)
            .min_by(|a, b| pmf.energy(&g, *a).partial_cmp(&pmf.energy(&g, *b)).unwrap())
            .unwrap();
        let center = -180.0 + 10.0 * modal as f64 + 5.0;
        assert!((argmin - center).abs() <= 10.0, "{argmin} vs {center}");
        // an unseen tuple falls back to the pooled table
        let other = [ClassCode::new(5).unwrap(); 4];
        assert_eq!(
            pmf.energy(&other, 52.3),
            pmf.pooled()[torsion_bin(52.3, 10.0, 36)]
        );
    }
}
