//! Random structures, corpora and small databases with known answers, for
//! tests and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::energy::{ContactEnergyTable, ContactType, EnergyTables, TorsionPmf};
use crate::fragdb::{
    build_helix_template, build_strand_template, class_tuple, compute_next, AminoAcid, BuildParams,
    BuildReport, CentroidGeometry, ClassTuple, DbContents, FragmentDatabase, FragmentTemplate,
    TemplateId,
};
use crate::geometry::{canonical_frame, extend_chain, ideal_chain, Vec3};
use crate::io::{ParsedChain, ParsedResidue, SideChainAtom};
use crate::model::{default_diameter, terminal_centroids, MinDistance, ModelParams, CA_TYPE};

pub fn random_sequence<R: Rng>(rng: &mut R, n: usize) -> Vec<AminoAcid> {
    (0..n)
        .map(|_| *AminoAcid::ALL.choose(rng).unwrap())
        .collect()
}

/// Residues whose class 4-tuples are pairwise distinct.
pub fn sequence_with_distinct_tuples<R: Rng>(rng: &mut R, n: usize) -> Vec<AminoAcid> {
    loop {
        let seq = random_sequence(rng, n);
        let tuples: BTreeSet<ClassTuple> = seq.windows(4).map(class_tuple).collect();
        if tuples.len() + 3 == n {
            return seq;
        }
    }
}

/// Centroids for every residue of a Cα trace, ends included.
pub fn chain_centroids(seq: &[AminoAcid], ca: &[Vec3], geometry: &CentroidGeometry) -> Vec<Vec3> {
    let n = ca.len();
    let (first, last) =
        terminal_centroids(seq, ca, geometry).expect("chain of at least 4 residues");
    (0..n)
        .map(|i| match i {
            0 => first,
            i if i == n - 1 => last,
            i => geometry
                .place(seq[i], ca[i - 1], ca[i], ca[i + 1])
                .expect("non-degenerate chain"),
        })
        .collect()
}

/// Whether a trace with its centroids keeps every minimum distance and the
/// diameter, each with `margin` Å to spare.
pub fn satisfies_constraints(
    seq: &[AminoAcid],
    ca: &[Vec3],
    centroids: &[Vec3],
    geometry: &CentroidGeometry,
    params: &ModelParams,
    margin: f64,
) -> bool {
    let n = ca.len();
    let min = MinDistance::new(
        geometry,
        params.d_min,
        params.centroid_factor,
        params.backbone_radius,
    );
    let diameter = params.diameter.unwrap_or_else(|| default_diameter(n));
    for i in 0..n {
        for j in i + 1..n {
            if ca[i].distance(ca[j]) > diameter - margin {
                return false;
            }
            if j < i + 2 {
                continue;
            }
            let (ti, tj) = (seq[i].index(), seq[j].index());
            let pairs = [
                (ca[i], ca[j], CA_TYPE, CA_TYPE),
                (ca[i], centroids[j], CA_TYPE, tj),
                (centroids[i], ca[j], ti, CA_TYPE),
                (centroids[i], centroids[j], ti, tj),
            ];
            if pairs
                .iter()
                .any(|&(a, b, x, y)| a.distance(b) < min.get(x, y) + margin)
            {
                return false;
            }
        }
    }
    true
}

/// A random self-avoiding Cα trace (3.8 Å spacing) for `seq` whose
/// centroids, placed with `geometry`, satisfy the model constraints with
/// `margin` Å to spare. Grown depth-first, trying candidate extensions
/// closest to the current center first so the chain stays compact.
pub fn random_compact_chain<R: Rng>(
    rng: &mut R,
    seq: &[AminoAcid],
    geometry: &CentroidGeometry,
    params: &ModelParams,
    margin: f64,
) -> Vec<Vec3> {
    let n = seq.len();
    assert!(n >= 4, "need at least 4 residues");
    let min = MinDistance::new(
        geometry,
        params.d_min,
        params.centroid_factor,
        params.backbone_radius,
    );
    let diameter = params.diameter.unwrap_or_else(|| default_diameter(n));
    loop {
        let start = ideal_chain(3, 3.8, rng.gen_range(85.0..125.0), 0.0);
        let mut ca = start.clone();
        let mut cen: Vec<Vec3> = vec![Vec3::ZERO; n];
        let mut nodes = 0usize;
        if grow(
            rng, seq, geometry, &min, diameter, margin, &mut ca, &mut cen, &mut nodes,
        ) {
            let all = chain_centroids(seq, &ca, geometry);
            if satisfies_constraints(seq, &ca, &all, geometry, params, margin) {
                return ca;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn grow<R: Rng>(
    rng: &mut R,
    seq: &[AminoAcid],
    geometry: &CentroidGeometry,
    min: &MinDistance,
    diameter: f64,
    margin: f64,
    ca: &mut Vec<Vec3>,
    cen: &mut [Vec3],
    nodes: &mut usize,
) -> bool {
    let n = seq.len();
    let i = ca.len();
    if i == n {
        return true;
    }
    *nodes += 1;
    if *nodes > 20_000 {
        return false;
    }
    let center = ca.iter().fold(Vec3::ZERO, |s, &p| s + p) / i as f64;
    let mut cands: Vec<Vec3> = (0..10)
        .map(|_| {
            let bend = rng.gen_range(85.0..125.0);
            let tors = rng.gen_range(-180.0..180.0);
            extend_chain(ca[i - 3], ca[i - 2], ca[i - 1], 3.8, bend, tors)
        })
        .collect();
    cands.sort_by(|a, b| a.distance(center).total_cmp(&b.distance(center)));
    for p in cands {
        let c = match geometry.place(seq[i - 1], ca[i - 2], ca[i - 1], p) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let far = |a: Vec3, b: Vec3, x: usize, y: usize| a.distance(b) >= min.get(x, y) + margin;
        let t = |k: usize| seq[k].index();
        let mut ok = ca.iter().all(|&q| p.distance(q) <= diameter - margin);
        // new Cα i against Cα and interior centroids up to i−2
        for j in 0..i.saturating_sub(1) {
            ok = ok && far(p, ca[j], CA_TYPE, CA_TYPE);
            if j >= 1 {
                ok = ok && far(p, cen[j], CA_TYPE, t(j));
            }
        }
        // new centroid i−1 against Cα and centroids up to i−3
        for j in 0..(i - 1).saturating_sub(1) {
            ok = ok && far(c, ca[j], t(i - 1), CA_TYPE);
            if j >= 1 {
                ok = ok && far(c, cen[j], t(i - 1), t(j));
            }
        }
        if !ok {
            continue;
        }
        ca.push(p);
        cen[i - 1] = c;
        if grow(rng, seq, geometry, min, diameter, margin, ca, cen, nodes) {
            return true;
        }
        ca.pop();
        if *nodes > 20_000 {
            return false;
        }
    }
    false
}

/// A corpus chain with one side-chain atom at each residue's centroid.
pub fn to_parsed_chain(
    seq: &[AminoAcid],
    ca: &[Vec3],
    centroids: &[Vec3],
    source: &str,
) -> ParsedChain {
    ParsedChain {
        source: source.to_string(),
        chain_id: 'A',
        residues: seq
            .iter()
            .zip(ca)
            .zip(centroids)
            .enumerate()
            .map(|(i, ((&amino, &ca), &c))| ParsedResidue {
                seq: i as i32 + 1,
                icode: ' ',
                amino,
                ca,
                side_chain: if amino == AminoAcid::Gly {
                    Vec::new()
                } else {
                    vec![SideChainAtom {
                        name: "CB".into(),
                        element: "C".into(),
                        pos: c,
                    }]
                },
            })
            .collect(),
    }
}

/// PDB text for a parsed chain: CA plus its side-chain atoms, ids from 1.
pub fn chain_to_pdb(chain: &ParsedChain) -> String {
    let mut s = String::new();
    let mut serial = 1;
    for r in &chain.residues {
        let atoms = std::iter::once(("CA", "C", r.ca)).chain(
            r.side_chain
                .iter()
                .map(|a| (a.name.as_str(), a.element.as_str(), a.pos)),
        );
        for (name, element, p) in atoms {
            s.push_str(&format!(
                "ATOM  {serial:>5}  {name:<3} {} {}{:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {element:>2}\n",
                r.amino.three_letter(),
                chain.chain_id,
                r.seq,
                p.x,
                p.y,
                p.z
            ));
            serial += 1;
        }
    }
    s.push_str("END\n");
    s
}

/// A structure whose class 4-tuples are all distinct, so a database built
/// from it alone has exactly one template per window.
#[derive(Debug, Clone)]
pub struct Planted {
    pub sequence: Vec<AminoAcid>,
    pub ca: Vec<Vec3>,
    pub centroids: Vec<Vec3>,
    pub chain: ParsedChain,
}

pub fn planted_structure<R: Rng>(rng: &mut R, n: usize) -> Planted {
    let geometry = CentroidGeometry::default();
    let sequence = sequence_with_distinct_tuples(rng, n);
    let ca = random_compact_chain(rng, &sequence, &geometry, &ModelParams::default(), 0.3);
    let centroids = chain_centroids(&sequence, &ca, &geometry);
    let chain = to_parsed_chain(&sequence, &ca, &centroids, "PLNT");
    Planted {
        sequence,
        ca,
        centroids,
        chain,
    }
}

/// Four Cα at 3.8 Å spacing with two bend angles and one torsion, in
/// canonical orientation, rounded to 0.001 Å.
pub fn window_shape(bend1: f64, bend2: f64, torsion: f64) -> [Vec3; 4] {
    let c = ideal_chain(3, 3.8, bend1, 0.0);
    let d = extend_chain(c[0], c[1], c[2], 3.8, bend2, torsion);
    let (rot, shift) = canonical_frame(c[0], c[1], c[2]).expect("non-degenerate window");
    [c[0], c[1], c[2], d].map(|p| (rot.apply(p) + shift).quantize_milli())
}

/// A small database for one query sequence, with the energy tables to
/// score it.
#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub sequence: Vec<AminoAcid>,
    pub db: FragmentDatabase,
    pub tables: EnergyTables,
}

/// Bends are drawn from a short list so that overlaps of different
/// templates often match and the next-link graph is not trivial.
const BENDS: [f64; 4] = [88.0, 95.0, 105.0, 118.0];

/// Random database of at most `max_templates` templates (helix and strand
/// included) covering every class 4-tuple of a random `n`-residue sequence,
/// with random contact energies and torsion tables.
pub fn random_case<R: Rng>(rng: &mut R, n: usize, max_templates: usize) -> SyntheticCase {
    assert!(n >= 4 && max_templates >= 2 + (n - 3));
    let geometry = CentroidGeometry::default();
    let sequence = random_sequence(rng, n);
    let tuples: Vec<ClassTuple> = {
        let set: BTreeSet<ClassTuple> = sequence.windows(4).map(class_tuple).collect();
        set.into_iter().collect()
    };
    let mut budget = max_templates - 2 - tuples.len();
    let mut templates = Vec::new();
    let mut next_id: TemplateId = 1;
    for g in &tuples {
        let extra = rng.gen_range(0..=budget.min(3));
        budget -= extra;
        let count = 1 + extra;
        let weights: Vec<u32> = (0..count).map(|_| rng.gen_range(1..10)).collect();
        let total: u32 = weights.iter().sum();
        let mut freqs: Vec<u16> = weights.iter().map(|&w| (1000 * w / total) as u16).collect();
        let short = 1000 - freqs.iter().map(|&f| f as u32).sum::<u32>();
        freqs[0] += short as u16;
        for f in freqs {
            let ca = window_shape(
                *BENDS.choose(rng).unwrap(),
                *BENDS.choose(rng).unwrap(),
                rng.gen_range(-180.0..180.0),
            );
            templates.push(FragmentTemplate {
                id: next_id,
                classes: *g,
                ca,
                centroids: Default::default(),
                freq: f,
                pid: format!("S{next_id:03}"),
            });
            next_id += 1;
        }
    }
    let mut helix = build_helix_template(&geometry);
    helix.id = next_id;
    let strand_params = BuildParams::default();
    let mut strand = build_strand_template(
        &geometry,
        strand_params.strand_bend,
        strand_params.strand_torsion,
    );
    strand.id = next_id + 1;
    for t in [&mut helix, &mut strand] {
        t.ca = t.ca.map(Vec3::quantize_milli);
        for list in t.centroids.iter_mut() {
            for v in list.values_mut() {
                *v = v.quantize_milli();
            }
        }
    }
    let (helix_id, strand_id) = (helix.id, strand.id);
    templates.push(helix);
    templates.push(strand);
    let params = BuildParams::default();
    let links = compute_next(&templates, &[], params.rmsd_thr);
    let report = BuildReport {
        templates: templates.len(),
        links: links.len(),
        class_tuples_covered: tuples.len(),
        ..Default::default()
    };
    let db = FragmentDatabase::from_contents(DbContents {
        params,
        manifest: vec!["synthetic".into()],
        geometry: geometry.clone(),
        templates,
        links,
        fallback: Vec::new(),
        helix_id,
        strand_id,
        report,
    });
    SyntheticCase {
        sequence,
        db,
        tables: random_tables(rng, &geometry),
    }
}

/// Contact energies uniform in [−1, 0.5], torsion tables uniform in [0, 2]
/// for the pooled and a few class-specific histograms.
pub fn random_tables<R: Rng>(rng: &mut R, geometry: &CentroidGeometry) -> EnergyTables {
    let mut contact = ContactEnergyTable::neutral(geometry);
    let types: Vec<ContactType> = ContactType::all().collect();
    for (i, &a) in types.iter().enumerate() {
        for &b in &types[i..] {
            contact.set_energy(a, b, rng.gen_range(-1.0..0.5));
        }
    }
    let bin_deg = 10.0;
    let bins = 36;
    let pooled: Vec<f64> = (0..bins).map(|_| rng.gen_range(0.0..2.0)).collect();
    let mut by_class = BTreeMap::new();
    for _ in 0..20 {
        let seq = random_sequence(rng, 4);
        by_class.insert(
            class_tuple(&seq),
            (0..bins).map(|_| rng.gen_range(0.0..2.0)).collect(),
        );
    }
    EnergyTables {
        contact,
        pmf: TorsionPmf::from_tables(bin_deg, pooled, by_class),
    }
}
