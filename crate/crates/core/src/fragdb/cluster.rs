use std::collections::BTreeMap;

use crate::fragdb::{AminoAcid, FragmentTemplate, TupleOccurrence};
use crate::geometry::{superpose, Vec3};

/// A template fresh out of clustering, before ids are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredTemplate {
    pub template: FragmentTemplate,
    /// Number of occurrences merged into this template.
    pub size: usize,
}

/// Greedy leader clustering of the occurrences of one class tuple.
///
/// Occurrences are visited in the given order; each joins the first cluster
/// whose representative superposes within `rmsd_thr`, otherwise it founds a
/// new cluster. The representative's coordinates become the template; the
/// centroid lists are per-residue means of member centroids mapped into the
/// representative frame. Coordinates are rounded to 0.001 Å. The returned
/// templates carry `id = 0`.
pub fn cluster(occurrences: &[&TupleOccurrence], rmsd_thr: f64) -> Vec<ClusteredTemplate> {
    struct Group<'a> {
        rep: &'a TupleOccurrence,
        sums: [BTreeMap<AminoAcid, (Vec3, usize)>; 2],
        size: usize,
    }

    let mut groups: Vec<Group> = Vec::new();
    for &occ in occurrences {
        let mut joined = false;
        for g in groups.iter_mut() {
            let Ok(fit) = superpose(&g.rep.ca, &occ.ca) else {
                continue;
            };
            if fit.rmsd <= rmsd_thr {
                for k in 0..2 {
                    let e = g.sums[k]
                        .entry(occ.residues[k + 1])
                        .or_insert((Vec3::ZERO, 0));
                    e.0 += fit.apply(occ.centroids[k]);
                    e.1 += 1;
                }
                g.size += 1;
                joined = true;
                break;
            }
        }
        if !joined {
            let mut sums: [BTreeMap<AminoAcid, (Vec3, usize)>; 2] = Default::default();
            for k in 0..2 {
                sums[k].insert(occ.residues[k + 1], (occ.centroids[k], 1));
            }
            groups.push(Group {
                rep: occ,
                sums,
                size: 1,
            });
        }
    }

    let sizes: Vec<usize> = groups.iter().map(|g| g.size).collect();
    let freqs = proportional_freqs(&sizes);
    groups
        .into_iter()
        .zip(freqs)
        .map(|(g, freq)| {
            let centroids = g.sums.map(|m| {
                m.into_iter()
                    .map(|(a, (sum, n))| (a, (sum / n as f64).quantize_milli()))
                    .collect()
            });
            ClusteredTemplate {
                template: FragmentTemplate {
                    id: 0,
                    classes: g.rep.classes,
                    ca: g.rep.ca.map(Vec3::quantize_milli),
                    centroids,
                    freq,
                    pid: g.rep.pid.clone(),
                },
                size: g.size,
            }
        })
        .collect()
}

/// Largest-remainder apportionment of 1000 over cluster sizes: each value
/// is ⌊1000·sᵢ/S⌋ or one more, and the values sum to exactly 1000. Ties on
/// the remainder go to the earlier cluster.
fn proportional_freqs(sizes: &[usize]) -> Vec<u16> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return vec![0; sizes.len()];
    }
    let mut out: Vec<u16> = sizes.iter().map(|&s| (1000 * s / total) as u16).collect();
    let assigned: usize = out.iter().map(|&f| f as usize).sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse((1000 * sizes[i]) % total), i));
    for &i in order.iter().take(1000 - assigned) {
        out[i] += 1;
    }
    out
}
