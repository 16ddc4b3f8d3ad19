use serde::{Deserialize, Serialize};

use crate::energy::MIN_RADIUS;
use crate::fragdb::{AminoAcid, CentroidGeometry};

/// Coordinates per Å.
pub const COORD_SCALE: f64 = 100.0;

/// Integer point in centi-Å.
pub type IPoint = [i32; 3];

pub fn quantize(v: crate::geometry::Vec3) -> IPoint {
    [
        (v.x * COORD_SCALE).round() as i32,
        (v.y * COORD_SCALE).round() as i32,
        (v.z * COORD_SCALE).round() as i32,
    ]
}

pub fn dist2(a: IPoint, b: IPoint) -> i64 {
    (0..3).map(|k| (a[k] as i64 - b[k] as i64).pow(2)).sum()
}

/// Default diameter bound 5.68·n^0.38 Å.
pub fn default_diameter(n: usize) -> f64 {
    5.68 * (n as f64).powf(0.38)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    CaCa,
    CaCentroid,
    CentroidCa,
    CentroidCentroid,
    Diameter,
}

/// A failed check between residues `i < j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub kind: ViolationKind,
}

/// Squared minimum distances in centi-Å² for every pair of point types:
/// index 0..20 are centroids by residue, 20 is a backbone Cα.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDistance {
    m: Vec<[i64; 21]>,
    d_min2: i64,
}

pub const CA_TYPE: usize = 20;

impl MinDistance {
    /// min(a, b) = max(d_min, factor·(r_a + r_b)); centroid radii come from
    /// the Cα–centroid distances of `geometry` (floored), the Cα radius is
    /// `backbone_radius`.
    pub fn new(geometry: &CentroidGeometry, d_min: f64, factor: f64, backbone_radius: f64) -> Self {
        let mut radii = [backbone_radius; 21];
        for a in AminoAcid::ALL {
            radii[a.index()] = geometry.radius(a).max(MIN_RADIUS);
        }
        let centi = |d: f64| (d * COORD_SCALE).round() as i64;
        let mut m = vec![[0i64; 21]; 21];
        for i in 0..21 {
            for j in 0..21 {
                let d = if i == CA_TYPE && j == CA_TYPE {
                    d_min
                } else {
                    d_min.max(factor * (radii[i] + radii[j]))
                };
                m[i][j] = centi(d).pow(2);
            }
        }
        MinDistance {
            m,
            d_min2: centi(d_min).pow(2),
        }
    }

    pub fn get2(&self, a: usize, b: usize) -> i64 {
        self.m[a][b]
    }

    pub fn ca_ca2(&self) -> i64 {
        self.d_min2
    }

    /// Minimum distance in Å for a pair of point types.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        (self.m[a][b] as f64).sqrt() / COORD_SCALE
    }
}

/// First steric violation among pairs (i, j) with `j ≥ i + 2`, in
/// (i, j, kind) order. Missing centroids are skipped; Cα beyond `ca.len()`
/// are not placed yet.
pub fn first_steric_violation(
    seq: &[AminoAcid],
    ca: &[IPoint],
    centroids: &[Option<IPoint>],
    min: &MinDistance,
) -> Option<Violation> {
    let n_ca = ca.len();
    let n = seq.len();
    let cen = |i: usize| centroids.get(i).copied().flatten();
    let ty = |i: usize| seq[i].index();
    for i in 0..n {
        for j in i + 2..n {
            if j < n_ca && dist2(ca[i], ca[j]) < min.ca_ca2() {
                return Some(Violation {
                    i,
                    j,
                    kind: ViolationKind::CaCa,
                });
            }
            if let (true, Some(c)) = (i < n_ca, cen(j)) {
                if dist2(ca[i], c) < min.get2(CA_TYPE, ty(j)) {
                    return Some(Violation {
                        i,
                        j,
                        kind: ViolationKind::CaCentroid,
                    });
                }
            }
            if let (true, Some(c)) = (j < n_ca, cen(i)) {
                if dist2(c, ca[j]) < min.get2(ty(i), CA_TYPE) {
                    return Some(Violation {
                        i,
                        j,
                        kind: ViolationKind::CentroidCa,
                    });
                }
            }
            if let (Some(a), Some(b)) = (cen(i), cen(j)) {
                if dist2(a, b) < min.get2(ty(i), ty(j)) {
                    return Some(Violation {
                        i,
                        j,
                        kind: ViolationKind::CentroidCentroid,
                    });
                }
            }
        }
    }
    None
}

/// Same result as [`first_steric_violation`] but only visits pairs that
/// involve a new point: Cα at index ≥ `from_ca` or centroid at index ≥
/// `from_cen`. Cost is proportional to (new points) × (all points).
pub fn incremental_steric_violation(
    seq: &[AminoAcid],
    ca: &[IPoint],
    centroids: &[Option<IPoint>],
    min: &MinDistance,
    from_ca: usize,
    from_cen: usize,
) -> Option<Violation> {
    let n_ca = ca.len();
    let cen = |i: usize| centroids.get(i).copied().flatten();
    let ty = |i: usize| seq[i].index();
    let far = |a: usize, b: usize| a.abs_diff(b) >= 2;
    let mut best: Option<Violation> = None;
    let mut note = |i: usize, j: usize, kind: ViolationKind| {
        let v = Violation {
            i: i.min(j),
            j: i.max(j),
            kind,
        };
        if best.map_or(true, |b| v < b) {
            best = Some(v);
        }
    };
    for p in from_ca..n_ca {
        for q in 0..n_ca {
            if far(p, q) && (q < from_ca || q < p) && dist2(ca[p], ca[q]) < min.ca_ca2() {
                note(p, q, ViolationKind::CaCa);
            }
        }
        for (q, c) in centroids.iter().enumerate() {
            let Some(c) = *c else { continue };
            if far(p, q) && dist2(ca[p], c) < min.get2(CA_TYPE, ty(q)) {
                let kind = if p < q {
                    ViolationKind::CaCentroid
                } else {
                    ViolationKind::CentroidCa
                };
                note(p, q, kind);
            }
        }
    }
    for (c_idx, c) in centroids.iter().enumerate().skip(from_cen) {
        let Some(c) = *c else { continue };
        for q in 0..n_ca.min(from_ca) {
            if far(c_idx, q) && dist2(ca[q], c) < min.get2(CA_TYPE, ty(c_idx)) {
                let kind = if q < c_idx {
                    ViolationKind::CaCentroid
                } else {
                    ViolationKind::CentroidCa
                };
                note(q, c_idx, kind);
            }
        }
        for q in 0..centroids.len() {
            if !far(c_idx, q) || !(q < from_cen || q < c_idx) {
                continue;
            }
            if let Some(o) = cen(q) {
                if dist2(c, o) < min.get2(ty(c_idx), ty(q)) {
                    note(c_idx, q, ViolationKind::CentroidCentroid);
                }
            }
        }
    }
    best
}

/// First Cα pair farther apart than the diameter, considering pairs with
/// `j ≥ from`.
pub fn first_diameter_violation(
    ca: &[IPoint],
    diameter_centi: i64,
    from: usize,
) -> Option<Violation> {
    let limit = diameter_centi * diameter_centi;
    for j in from.max(1)..ca.len() {
        for i in 0..j {
            if dist2(ca[i], ca[j]) > limit {
                return Some(Violation {
                    i,
                    j,
                    kind: ViolationKind::Diameter,
                });
            }
        }
    }
    None
}
