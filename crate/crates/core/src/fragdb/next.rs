use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::fragdb::{ClassCode, FragmentTemplate, NextLink, TemplateId};
use crate::geometry::superpose;

/// Computes every admissible succession between templates.
///
/// A pair `(a, b)` is a candidate when the class suffix of `a` equals the
/// class prefix of `b`, or when either side is a secondary-structure
/// template or a member of `fallback` (those stand in for windows whose
/// classes differ from their own). A candidate becomes a link when `b`'s
/// first three Cα superpose onto `a`'s last three within `rmsd_thr`.
pub fn compute_next(
    templates: &[FragmentTemplate],
    fallback: &[TemplateId],
    rmsd_thr: f64,
) -> Vec<NextLink> {
    let wildcard: BTreeSet<TemplateId> = templates
        .iter()
        .filter(|t| t.is_special())
        .map(|t| t.id)
        .chain(fallback.iter().copied())
        .collect();
    let mut by_prefix: BTreeMap<[ClassCode; 3], Vec<&FragmentTemplate>> = BTreeMap::new();
    for t in templates {
        by_prefix
            .entry([t.classes[0], t.classes[1], t.classes[2]])
            .or_default()
            .push(t);
    }
    let wildcards: Vec<&FragmentTemplate> = templates
        .iter()
        .filter(|t| wildcard.contains(&t.id))
        .collect();

    let mut links: Vec<NextLink> = templates
        .par_iter()
        .flat_map_iter(|a| {
            let candidates: Vec<&FragmentTemplate> = if wildcard.contains(&a.id) {
                templates.iter().collect()
            } else {
                let suffix = [a.classes[1], a.classes[2], a.classes[3]];
                let mut c: Vec<&FragmentTemplate> = by_prefix
                    .get(&suffix)
                    .map(|v| v.to_vec())
                    .unwrap_or_default();
                c.extend(wildcards.iter().copied());
                c.sort_by_key(|t| t.id);
                c.dedup_by_key(|t| t.id);
                c
            };
            candidates
                .into_iter()
                .filter_map(|b| link_between(a, b, rmsd_thr))
                .collect::<Vec<_>>()
        })
        .collect();
    links.sort_by_key(|l| (l.from, l.to));
    links
}

fn link_between(a: &FragmentTemplate, b: &FragmentTemplate, rmsd_thr: f64) -> Option<NextLink> {
    let fit = superpose(&a.ca[1..4], &b.ca[0..3]).ok()?;
    (fit.rmsd <= rmsd_thr).then(|| NextLink {
        from: a.id,
        to: b.id,
        mat: fit.rotation.to_milli(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragdb::{build_helix_template, class_tuple, AminoAcid, CentroidGeometry};
    use crate::geometry::{ideal_chain, Vec3};

    fn tpl(id: TemplateId, res: [AminoAcid; 4], bend: f64, tors: f64) -> FragmentTemplate {
        let c = ideal_chain(4, 3.8, bend, tors);
        FragmentTemplate {
            id,
            classes: class_tuple(&res),
            ca: [c[0], c[1], c[2], c[3]],
            centroids: Default::default(),
            freq: 1000,
            pid: "x".into(),
        }
    }

    #[test]
    fn helix_self_link() {
        let mut h = build_helix_template(&CentroidGeometry::default());
        h.id = 1;
        let links = compute_next(std::slice::from_ref(&h), &[], 1.0);
        assert_eq!(links.len(), 1);
        assert_eq!((links[0].from, links[0].to), (1, 1));
    }

    #[test]
    fn shape_mismatch_excluded() {
        use AminoAcid::*;
        // same classes all round, overlaps differ only through the bend angle
        let a = tpl(1, [Ala; 4], 60.0, 50.0);
        let b = tpl(2, [Ala; 4], 150.0, 50.0);
        let links = compute_next(&[a.clone(), b.clone()], &[], 0.5);
        let pairs: Vec<(u32, u32)> = links.iter().map(|l| (l.from, l.to)).collect();
        assert_eq!(pairs, vec![(1, 1), (2, 2)]);
        let fit = superpose(&a.ca[1..4], &b.ca[0..3]).unwrap();
        assert!(fit.rmsd > 0.5);
    }

    #[test]
    fn class_rule() {
        use AminoAcid::*;
        let a = tpl(1, [Ala, Leu, Ala, Leu], 95.0, 50.0);
        let b = tpl(2, [Leu, Ala, Leu, Gly], 95.0, 50.0);
        let c = tpl(3, [Gly, Gly, Gly, Gly], 95.0, 50.0);
        let links = compute_next(&[a.clone(), b.clone(), c.clone()], &[], 1.0);
        let pairs: Vec<(u32, u32)> = links.iter().map(|l| (l.from, l.to)).collect();
        assert_eq!(pairs, vec![(1, 2), (3, 3)]);
        // making `c` a fallback template lets it chain with anything
        let links = compute_next(&[a, b, c], &[3], 1.0);
        let pairs: Vec<(u32, u32)> = links.iter().map(|l| (l.from, l.to)).collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (2, 3), (3, 1), (3, 2), (3, 3)]);
    }

    #[test]
    fn link_rotation_aligns_overlap() {
        use AminoAcid::*;
        let a = tpl(1, [Ala; 4], 95.0, 50.0);
        let b = tpl(2, [Ala; 4], 97.0, -60.0);
        let links = compute_next(&[a.clone(), b.clone()], &[], 1.0);
        let l = links.iter().find(|l| l.from == 1 && l.to == 2).unwrap();
        let r = l.rotation();
        // after rotation the overlap differs from a's by a pure translation (up to fit error)
        let moved: Vec<Vec3> = b.ca[0..3].iter().map(|&p| r.apply(p)).collect();
        let d0 = a.ca[1] - moved[0];
        for k in 1..3 {
            assert!((a.ca[k + 1] - moved[k] - d0).norm() < 0.2);
        }
    }
}
