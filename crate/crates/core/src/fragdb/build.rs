use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragdb::extract::CA_SPACING;
use crate::fragdb::{
    cluster, compute_next, extract_occurrences, homogeneous, AminoAcid, CentroidGeometry,
    ClassCode, ClassTuple, DbContents, FragmentDatabase, FragmentTemplate, TemplateId,
    TupleOccurrence,
};
use crate::geometry::{ideal_chain, Vec3};
use crate::io::{parse_structure, ParsedChain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    /// Clustering and next-link threshold in Å.
    pub rmsd_thr: f64,
    /// Size of the fallback list for unseen class tuples.
    pub fallback_k: usize,
    /// Allowed |d − 3.8 Å| between consecutive Cα before a chain break.
    pub break_tolerance: f64,
    pub helix_bend: f64,
    pub helix_torsion: f64,
    /// Extended-strand geometry; these two are configuration defaults.
    pub strand_bend: f64,
    pub strand_torsion: f64,
    pub mass_weighted: bool,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            rmsd_thr: 1.0,
            fallback_k: 6,
            break_tolerance: 0.6,
            helix_bend: 93.8,
            helix_torsion: 52.3,
            strand_bend: 120.0,
            strand_torsion: 180.0,
            mass_weighted: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub files: usize,
    pub unreadable: Vec<String>,
    pub chains: usize,
    pub residues: usize,
    pub malformed_records: usize,
    pub nonstandard_residues: usize,
    pub residues_without_ca: usize,
    pub windows: usize,
    pub skipped_windows: usize,
    pub occurrences: usize,
    pub distinct_residue_tuples: usize,
    pub class_tuples_covered: usize,
    pub templates: usize,
    pub links: usize,
    /// Largest deviation from 3.8 Å among accepted consecutive Cα pairs.
    pub max_spacing_deviation: f64,
}

impl BuildReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k:<26}{v}\n"));
        line("files", self.files.to_string());
        line("unreadable files", self.unreadable.len().to_string());
        line("chains", self.chains.to_string());
        line("residues", self.residues.to_string());
        line("malformed records", self.malformed_records.to_string());
        line(
            "nonstandard residues",
            self.nonstandard_residues.to_string(),
        );
        line("residues without CA", self.residues_without_ca.to_string());
        line("windows", self.windows.to_string());
        line("skipped windows", self.skipped_windows.to_string());
        line("occurrences", self.occurrences.to_string());
        line(
            "distinct residue tuples",
            self.distinct_residue_tuples.to_string(),
        );
        line(
            "class tuples covered",
            format!("{} / {}", self.class_tuples_covered, 9usize.pow(4)),
        );
        line("templates", self.templates.to_string());
        line("next links", self.links.to_string());
        line(
            "max spacing deviation",
            format!("{:.3} A", self.max_spacing_deviation),
        );
        for u in &self.unreadable {
            s.push_str(&format!("unreadable: {u}\n"));
        }
        s
    }
}

fn ideal_template(
    classes: ClassTuple,
    bend: f64,
    torsion: f64,
    geometry: &CentroidGeometry,
    pid: &str,
) -> FragmentTemplate {
    let c = ideal_chain(4, CA_SPACING, bend, torsion);
    let ca = [c[0], c[1], c[2], c[3]];
    let mut centroids: [BTreeMap<AminoAcid, Vec3>; 2] = Default::default();
    for a in AminoAcid::ALL {
        for k in 0..2 {
            let pos = geometry
                .place(a, ca[k], ca[k + 1], ca[k + 2])
                .expect("ideal chain is not collinear");
            centroids[k].insert(a, pos);
        }
    }
    FragmentTemplate {
        id: 0,
        classes,
        ca,
        centroids,
        freq: 1000,
        pid: pid.to_string(),
    }
}

/// The ideal α-helix template (bend 93.8°, torsion 52.3°, 3.8 Å spacing).
pub fn build_helix_template(geometry: &CentroidGeometry) -> FragmentTemplate {
    let p = BuildParams::default();
    ideal_template(
        homogeneous(ClassCode::HELIX),
        p.helix_bend,
        p.helix_torsion,
        geometry,
        "IDEAL_HELIX",
    )
}

/// The extended-strand template with the given (configured) angles.
pub fn build_strand_template(
    geometry: &CentroidGeometry,
    bend: f64,
    torsion: f64,
) -> FragmentTemplate {
    ideal_template(
        homogeneous(ClassCode::STRAND),
        bend,
        torsion,
        geometry,
        "IDEAL_STRAND",
    )
}

fn quantized(mut t: FragmentTemplate) -> FragmentTemplate {
    t.ca = t.ca.map(Vec3::quantize_milli);
    for list in t.centroids.iter_mut() {
        for v in list.values_mut() {
            *v = v.quantize_milli();
        }
    }
    t
}

/// Adds geometry-placed centroids for class members the corpus never showed
/// at a position, so each list covers the whole class.
fn complete_centroid_lists(t: &mut FragmentTemplate, geometry: &CentroidGeometry) {
    for k in 0..2 {
        for a in t.classes[k + 1].members() {
            if t.centroids[k].contains_key(&a) {
                continue;
            }
            if let Ok(p) = geometry.place(a, t.ca[k], t.ca[k + 1], t.ca[k + 2]) {
                t.centroids[k].insert(a, p.quantize_milli());
            }
        }
    }
}

/// Manifest: one structure path (relative to the manifest) or PDB id per
/// line; `#` starts a comment.
pub fn read_manifest(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn source_name(entry: &str) -> String {
    let stem = Path::new(entry)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| entry.to_string());
    stem.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Resolves a manifest entry that is not a local file to file text.
pub type FetchText<'a> = dyn Fn(&str) -> Result<String> + Sync + 'a;

/// Parsed corpus of a manifest, ready for [`build_from_chains`].
#[derive(Debug, Clone)]
pub struct Corpus {
    pub entries: Vec<String>,
    pub chains: Vec<ParsedChain>,
    /// File-level counts; the rest is filled in by the build.
    pub report: BuildReport,
}

/// Reads and parses every manifest entry. Entries that cannot be read or
/// parsed are listed in the report; `fetch` resolves entries that are not
/// local files (e.g. PDB ids) when given.
pub fn load_corpus(manifest: &Path, fetch: Option<&FetchText<'_>>) -> Result<Corpus> {
    let entries = read_manifest(manifest)?;
    let base: PathBuf = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let parsed: Vec<std::result::Result<crate::io::ParsedStructure, String>> = entries
        .par_iter()
        .map(|entry| {
            let path = base.join(entry);
            let text = if path.is_file() {
                std::fs::read_to_string(&path).map_err(|e| format!("{entry}: {e}"))?
            } else if let Some(f) = fetch {
                f(entry).map_err(|e| format!("{entry}: {e}"))?
            } else {
                return Err(format!("{entry}: no such file"));
            };
            parse_structure(&text, &source_name(entry)).map_err(|e| format!("{entry}: {e}"))
        })
        .collect();

    let mut report = BuildReport {
        files: entries.len(),
        ..Default::default()
    };
    let mut chains = Vec::new();
    for p in parsed {
        match p {
            Ok(s) => {
                report.malformed_records += s.report.malformed_records;
                report.nonstandard_residues += s.report.nonstandard_residues;
                report.residues_without_ca += s.report.residues_without_ca;
                chains.extend(s.chains);
            }
            Err(msg) => report.unreadable.push(msg),
        }
    }
    Ok(Corpus {
        entries,
        chains,
        report,
    })
}

/// Reads every manifest entry and builds the database.
pub fn build_database(
    manifest: &Path,
    params: &BuildParams,
    fetch: Option<&FetchText<'_>>,
) -> Result<FragmentDatabase> {
    let corpus = load_corpus(manifest, fetch)?;
    build_from_chains(&corpus.chains, corpus.entries, params, corpus.report)
}

/// Builds the database from already parsed chains, in corpus order.
pub fn build_from_chains(
    chains: &[ParsedChain],
    manifest: Vec<String>,
    params: &BuildParams,
    mut report: BuildReport,
) -> Result<FragmentDatabase> {
    if !(params.rmsd_thr > 0.0) {
        return Err(Error::InvalidInput("rmsd_thr must be positive".into()));
    }
    let (occurrences, stats) =
        extract_occurrences(chains, params.break_tolerance, params.mass_weighted);
    if occurrences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut geometry = CentroidGeometry::default();
    geometry.fit(&stats.centroid_samples);

    let mut by_class: BTreeMap<ClassTuple, Vec<&TupleOccurrence>> = BTreeMap::new();
    for o in &occurrences {
        by_class.entry(o.classes).or_default().push(o);
    }
    let clustered: Vec<Vec<_>> = by_class
        .par_iter()
        .map(|(_, occs)| cluster(occs, params.rmsd_thr))
        .collect();

    let mut templates = Vec::new();
    let mut sizes: Vec<(usize, TemplateId)> = Vec::new();
    let mut next_id: TemplateId = 1;
    for group in clustered {
        for c in group {
            let mut t = c.template;
            t.id = next_id;
            complete_centroid_lists(&mut t, &geometry);
            sizes.push((c.size, t.id));
            templates.push(t);
            next_id += 1;
        }
    }
    sizes.sort_by_key(|&(size, id)| (std::cmp::Reverse(size), id));
    let fallback: Vec<TemplateId> = sizes
        .iter()
        .take(params.fallback_k)
        .map(|&(_, id)| id)
        .collect();

    let mut helix = quantized(ideal_template(
        homogeneous(ClassCode::HELIX),
        params.helix_bend,
        params.helix_torsion,
        &geometry,
        "IDEAL_HELIX",
    ));
    helix.id = next_id;
    let mut strand = quantized(build_strand_template(
        &geometry,
        params.strand_bend,
        params.strand_torsion,
    ));
    strand.id = next_id + 1;
    let (helix_id, strand_id) = (helix.id, strand.id);
    templates.push(helix);
    templates.push(strand);

    let links = compute_next(&templates, &fallback, params.rmsd_thr);

    report.chains = stats.chains;
    report.residues = stats.residues;
    report.windows = stats.windows;
    report.skipped_windows = stats.skipped_windows;
    report.occurrences = occurrences.len();
    report.distinct_residue_tuples = occurrences
        .iter()
        .map(|o| o.residues)
        .collect::<BTreeSet<_>>()
        .len();
    report.class_tuples_covered = by_class.len();
    report.templates = templates.len();
    report.links = links.len();
    report.max_spacing_deviation = (stats.max_spacing_deviation * 1000.0).round() / 1000.0;

    Ok(FragmentDatabase::from_contents(DbContents {
        params: params.clone(),
        manifest,
        geometry,
        templates,
        links,
        fallback,
        helix_id,
        strand_id,
        report,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bend_angle, torsion_angle};

    #[test]
    fn helix_template_angles() {
        let h = build_helix_template(&CentroidGeometry::default());
        let c = h.ca;
        assert!((torsion_angle(c[0], c[1], c[2], c[3]).unwrap() - 52.3).abs() < 1e-6);
        assert!((bend_angle(c[0], c[1], c[2]).unwrap() - 93.8).abs() < 1e-6);
        assert!((bend_angle(c[1], c[2], c[3]).unwrap() - 93.8).abs() < 1e-6);
        for k in 0..3 {
            assert!((c[k].distance(c[k + 1]) - 3.8).abs() < 1e-12);
        }
        assert_eq!(c[0], Vec3::ZERO);
        assert_eq!(h.centroids[0].len(), 20);
        assert_eq!(h.centroids[1].len(), 20);
    }

    #[test]
    fn strand_template_round_trip() {
        let s = build_strand_template(&CentroidGeometry::default(), 120.0, 180.0);
        let c = s.ca;
        assert!((bend_angle(c[0], c[1], c[2]).unwrap() - 120.0).abs() < 1e-6);
        let t = torsion_angle(c[0], c[1], c[2], c[3]).unwrap();
        assert!((t.abs() - 180.0).abs() < 1e-6);
    }

    #[test]
    fn empty_corpus_is_error() {
        let r = build_from_chains(&[], vec![], &BuildParams::default(), BuildReport::default());
        assert!(matches!(r, Err(Error::EmptyCorpus)));
    }

    #[test]
    fn class_tuple_space() {
        assert_eq!(9usize.pow(4), 6561);
    }
}
