use serde::{Deserialize, Serialize};

use crate::fragdb::{class_tuple, AminoAcid, ClassTuple};
use crate::geometry::{canonical_frame, CentroidParams, Vec3};
use crate::io::ParsedChain;

/// Cα spacing every fragment is normalized to.
pub const CA_SPACING: f64 = 3.8;

/// One window of four consecutive residues taken from a corpus chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleOccurrence {
    pub residues: [AminoAcid; 4],
    pub classes: ClassTuple,
    /// Canonically oriented Cα trace with exact 3.8 Å spacing.
    pub ca: [Vec3; 4],
    /// Side-chain centers of window positions 2 and 3 in the same frame.
    pub centroids: [Vec3; 2],
    pub pid: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub chains: usize,
    pub residues: usize,
    pub windows: usize,
    /// Windows spanning a chain break (a Cα gap outside 3.8 Å ± tolerance).
    pub skipped_windows: usize,
    /// Largest |d − 3.8| over accepted consecutive Cα pairs.
    pub max_spacing_deviation: f64,
    /// Centroid geometry samples of interior residues, for fitting.
    #[serde(skip)]
    pub centroid_samples: Vec<(AminoAcid, CentroidParams)>,
}

/// Cuts every chain into overlapping 4-residue windows. Windows crossing a
/// chain break are skipped and counted. Each kept window is rescaled to
/// exact 3.8 Å spacing (bend and torsion angles preserved, centroids carried
/// along with their Cα) and put in canonical orientation.
pub fn extract_occurrences(
    chains: &[ParsedChain],
    break_tolerance: f64,
    mass_weighted: bool,
) -> (Vec<TupleOccurrence>, ExtractStats) {
    let mut stats = ExtractStats::default();
    let mut out = Vec::new();
    for chain in chains {
        stats.chains += 1;
        stats.residues += chain.residues.len();
        let n = chain.residues.len();
        let centers: Vec<Vec3> = chain
            .residues
            .iter()
            .map(|r| r.side_chain_center(mass_weighted))
            .collect();
        let bonded: Vec<bool> = chain
            .residues
            .windows(2)
            .map(|w| (w[0].ca.distance(w[1].ca) - CA_SPACING).abs() <= break_tolerance)
            .collect();
        for (w, ok) in chain.residues.windows(2).zip(&bonded) {
            if *ok {
                let dev = (w[0].ca.distance(w[1].ca) - CA_SPACING).abs();
                stats.max_spacing_deviation = stats.max_spacing_deviation.max(dev);
            }
        }
        for i in 1..n.saturating_sub(1) {
            let r = &chain.residues[i];
            if r.amino == AminoAcid::Gly || !bonded[i - 1] || !bonded[i] {
                continue;
            }
            let (p, c, nx) = (chain.residues[i - 1].ca, r.ca, chain.residues[i + 1].ca);
            if let Ok(m) = CentroidParams::measure(p, c, nx, centers[i]) {
                if m.distance > 1e-6 {
                    stats.centroid_samples.push((r.amino, m));
                }
            }
        }
        if n < 4 {
            continue;
        }
        for i in 0..n - 3 {
            stats.windows += 1;
            if !bonded[i..i + 3].iter().all(|&b| b) {
                stats.skipped_windows += 1;
                continue;
            }
            let res = &chain.residues[i..i + 4];
            match occurrence(res, &centers[i + 1..i + 3], &chain.pid()) {
                Some(o) => out.push(o),
                None => stats.skipped_windows += 1,
            }
        }
    }
    (out, stats)
}

fn occurrence(
    res: &[crate::io::ParsedResidue],
    centers: &[Vec3],
    pid: &str,
) -> Option<TupleOccurrence> {
    let mut ideal = [res[0].ca; 4];
    for k in 1..4 {
        let dir = (res[k].ca - res[k - 1].ca).normalized()?;
        ideal[k] = ideal[k - 1] + dir * CA_SPACING;
    }
    let cen = [
        centers[0] + (ideal[1] - res[1].ca),
        centers[1] + (ideal[2] - res[2].ca),
    ];
    let (rot, shift) = canonical_frame(ideal[0], ideal[1], ideal[2]).ok()?;
    let f = |p: Vec3| rot.apply(p) + shift;
    let residues = [res[0].amino, res[1].amino, res[2].amino, res[3].amino];
    Some(TupleOccurrence {
        residues,
        classes: class_tuple(&residues),
        ca: [f(ideal[0]), f(ideal[1]), f(ideal[2]), f(ideal[3])],
        centroids: [f(cen[0]), f(cen[1])],
        pid: pid.to_string(),
    })
}
