//! Clustered 4-residue fragment database: templates (`tuple` records),
//! admissible successions between them (`next` records), the fallback list
//! for unseen class tuples and the ideal secondary-structure templates.

mod amino;
mod build;
mod centroid;
mod cluster;
mod extract;
mod next;
mod store;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use amino::{
    class_tuple, classify, homogeneous, parse_sequence, AminoAcid, ClassCode, ClassTuple,
};
pub use build::{
    build_database, build_from_chains, build_helix_template, build_strand_template, load_corpus,
    read_manifest, BuildParams, BuildReport, Corpus, FetchText,
};
pub use centroid::CentroidGeometry;
pub use cluster::{cluster, ClusteredTemplate};
pub use extract::{extract_occurrences, ExtractStats, TupleOccurrence};
pub use next::compute_next;
pub(crate) use store::write_atomic;
pub use store::{load_database, save_database, DbFormat, FORMAT_VERSION};

use crate::error::Result;
use crate::geometry::{superpose, Rot3, Vec3};

pub type TemplateId = u32;

/// A clustered fragment: Cα shape of four consecutive residues plus the
/// mean side-chain centroids of the two interior positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentTemplate {
    pub id: TemplateId,
    pub classes: ClassTuple,
    /// Cα coordinates in Å; the first point is the origin.
    pub ca: [Vec3; 4],
    /// Centroid lists for window positions 2 and 3, keyed by residue type.
    pub centroids: [BTreeMap<AminoAcid, Vec3>; 2],
    /// Share of the class tuple's occurrences on a 0..=1000 scale.
    pub freq: u16,
    /// First source protein containing this template.
    pub pid: String,
}

impl FragmentTemplate {
    pub fn is_special(&self) -> bool {
        !self.classes[0].is_real()
    }

    /// Centroid of the residue at interior `position` (1 or 2, 0-based) when
    /// it has type `aa`. Types missing from the template's list are placed
    /// from `geometry` on the template's own Cα frame.
    pub fn centroid(&self, position: usize, aa: AminoAcid, geometry: &CentroidGeometry) -> Vec3 {
        debug_assert!(position == 1 || position == 2);
        if let Some(&c) = self.centroids[position - 1].get(&aa) {
            return c;
        }
        geometry
            .place(
                aa,
                self.ca[position - 1],
                self.ca[position],
                self.ca[position + 1],
            )
            .unwrap_or(self.ca[position])
    }
}

/// `next(id1, id2, mat)`: the last three Cα of `from` and the first three of
/// `to` agree within the clustering threshold; `mat` (×1000) rotates `to`'s
/// frame onto `from`'s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextLink {
    pub from: TemplateId,
    pub to: TemplateId,
    pub mat: [i32; 9],
}

impl NextLink {
    pub fn rotation(&self) -> Rot3 {
        Rot3::from_milli(&self.mat)
    }
}

/// Everything that is persisted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbContents {
    pub params: BuildParams,
    pub manifest: Vec<String>,
    pub geometry: CentroidGeometry,
    pub templates: Vec<FragmentTemplate>,
    pub links: Vec<NextLink>,
    pub fallback: Vec<TemplateId>,
    pub helix_id: TemplateId,
    pub strand_id: TemplateId,
    pub report: BuildReport,
}

#[derive(Debug, Clone, Default)]
struct DbIndex {
    by_id: HashMap<TemplateId, usize>,
    by_class: BTreeMap<ClassTuple, Vec<TemplateId>>,
    links: HashMap<(TemplateId, TemplateId), Rot3>,
    successors: HashMap<TemplateId, Vec<TemplateId>>,
}

#[derive(Debug, Clone)]
pub struct FragmentDatabase {
    contents: DbContents,
    index: DbIndex,
}

impl PartialEq for FragmentDatabase {
    fn eq(&self, other: &Self) -> bool {
        self.contents == other.contents
    }
}

impl FragmentDatabase {
    pub fn from_contents(mut contents: DbContents) -> Self {
        contents.templates.sort_by_key(|t| t.id);
        contents.links.sort_by_key(|l| (l.from, l.to));
        let mut index = DbIndex::default();
        for (i, t) in contents.templates.iter().enumerate() {
            index.by_id.insert(t.id, i);
            index.by_class.entry(t.classes).or_default().push(t.id);
        }
        for ids in index.by_class.values_mut() {
            ids.sort_by_key(|id| {
                let t = &contents.templates[index.by_id[id]];
                (std::cmp::Reverse(t.freq), t.id)
            });
        }
        // Placement composes full-precision rotations re-fitted from the stored
        // coordinates; the ×1000 matrices are the exchange format.
        let rotations: Vec<Rot3> = contents
            .links
            .par_iter()
            .map(|l| {
                let (a, b) = (index.by_id.get(&l.from), index.by_id.get(&l.to));
                match (a, b) {
                    (Some(&a), Some(&b)) => {
                        let (a, b) = (&contents.templates[a], &contents.templates[b]);
                        superpose(&a.ca[1..4], &b.ca[0..3])
                            .map(|f| f.rotation)
                            .unwrap_or_else(|_| l.rotation())
                    }
                    _ => l.rotation(),
                }
            })
            .collect();
        for (l, r) in contents.links.iter().zip(rotations) {
            index.links.insert((l.from, l.to), r);
            index.successors.entry(l.from).or_default().push(l.to);
        }
        FragmentDatabase { contents, index }
    }

    pub fn contents(&self) -> &DbContents {
        &self.contents
    }

    pub fn params(&self) -> &BuildParams {
        &self.contents.params
    }

    pub fn report(&self) -> &BuildReport {
        &self.contents.report
    }

    pub fn geometry(&self) -> &CentroidGeometry {
        &self.contents.geometry
    }

    pub fn templates(&self) -> &[FragmentTemplate] {
        &self.contents.templates
    }

    pub fn links(&self) -> &[NextLink] {
        &self.contents.links
    }

    pub fn template(&self, id: TemplateId) -> Option<&FragmentTemplate> {
        self.index
            .by_id
            .get(&id)
            .map(|&i| &self.contents.templates[i])
    }

    /// Templates of a class tuple ordered by frequency (desc) then id.
    pub fn templates_for(&self, classes: &ClassTuple) -> &[TemplateId] {
        self.index
            .by_class
            .get(classes)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn fallback(&self) -> &[TemplateId] {
        &self.contents.fallback
    }

    pub fn helix_id(&self) -> TemplateId {
        self.contents.helix_id
    }

    pub fn strand_id(&self) -> TemplateId {
        self.contents.strand_id
    }

    /// Rotation of the `from → to` link, if the link exists.
    pub fn link(&self, from: TemplateId, to: TemplateId) -> Option<&Rot3> {
        self.index.links.get(&(from, to))
    }

    pub fn successors(&self, from: TemplateId) -> &[TemplateId] {
        self.index
            .successors
            .get(&from)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn save(&self, path: &std::path::Path, format: DbFormat) -> Result<()> {
        save_database(self, path, format)
    }
}
