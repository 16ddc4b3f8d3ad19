//! Database persistence. The text form is line-oriented and closes with a
//! SHA-256 of everything before the checksum line; the binary form is a
//! bincode payload behind a magic/version header with the same digest
//! appended.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fragdb::{
    AminoAcid, BuildParams, BuildReport, CentroidGeometry, ClassCode, DbContents, FragmentDatabase,
    FragmentTemplate, NextLink,
};
use crate::geometry::{CentroidParams, Vec3};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"FRAGDB\0B";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbFormat {
    Text,
    Binary,
}

impl DbFormat {
    /// `.bin` selects the binary cache, anything else the text form.
    pub fn from_path(path: &Path) -> DbFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => DbFormat::Binary,
            _ => DbFormat::Text,
        }
    }
}

pub fn save_database(db: &FragmentDatabase, path: &Path, format: DbFormat) -> Result<()> {
    let bytes = match format {
        DbFormat::Text => to_text(db.contents()).into_bytes(),
        DbFormat::Binary => to_binary(db.contents())?,
    };
    write_atomic(path, &bytes)
}

/// Loads either form, detected from the leading bytes.
pub fn load_database(path: &Path) -> Result<FragmentDatabase> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    let contents = if bytes.starts_with(MAGIC) {
        from_binary(&bytes, &label)?
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Format {
            path: label.clone(),
            line: 0,
            msg: "not UTF-8 text and no binary header".into(),
        })?;
        from_text(&text, &label)?
    };
    Ok(FragmentDatabase::from_contents(contents))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn to_binary(c: &DbContents) -> Result<Vec<u8>> {
    let payload =
        bincode::serialize(c).map_err(|e| Error::InvalidInput(format!("serialize: {e}")))?;
    let mut out = Vec::with_capacity(payload.len() + 52);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out.extend_from_slice(&Sha256::digest(&payload));
    Ok(out)
}

fn from_binary(bytes: &[u8], label: &str) -> Result<DbContents> {
    let header = MAGIC.len() + 12;
    if bytes.len() < header {
        return Err(Error::Checksum(label.to_string()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    if bytes.len() != header + len + 32 {
        return Err(Error::Checksum(label.to_string()));
    }
    let payload = &bytes[header..header + len];
    if Sha256::digest(payload).as_slice() != &bytes[header + len..] {
        return Err(Error::Checksum(label.to_string()));
    }
    bincode::deserialize(payload).map_err(|e| Error::Format {
        path: label.to_string(),
        line: 0,
        msg: format!("binary payload: {e}"),
    })
}

fn token(s: &str) -> String {
    if s.is_empty() {
        return "-".into();
    }
    s.split_whitespace().collect::<Vec<_>>().join("_")
}

fn to_text(c: &DbContents) -> String {
    let mut s = String::new();
    let p = &c.params;
    writeln!(s, "fragdb {FORMAT_VERSION}").unwrap();
    writeln!(s, "param rmsd_thr {}", p.rmsd_thr).unwrap();
    writeln!(s, "param fallback_k {}", p.fallback_k).unwrap();
    writeln!(s, "param break_tolerance {}", p.break_tolerance).unwrap();
    writeln!(s, "param helix_bend {}", p.helix_bend).unwrap();
    writeln!(s, "param helix_torsion {}", p.helix_torsion).unwrap();
    writeln!(s, "param strand_bend {}", p.strand_bend).unwrap();
    writeln!(s, "param strand_torsion {}", p.strand_torsion).unwrap();
    writeln!(s, "param mass_weighted {}", p.mass_weighted).unwrap();
    for m in &c.manifest {
        writeln!(s, "manifest {m}").unwrap();
    }
    let r = &c.report;
    for (k, v) in [
        ("files", r.files),
        ("chains", r.chains),
        ("residues", r.residues),
        ("malformed_records", r.malformed_records),
        ("nonstandard_residues", r.nonstandard_residues),
        ("residues_without_ca", r.residues_without_ca),
        ("windows", r.windows),
        ("skipped_windows", r.skipped_windows),
        ("occurrences", r.occurrences),
        ("distinct_residue_tuples", r.distinct_residue_tuples),
        ("class_tuples_covered", r.class_tuples_covered),
        ("templates", r.templates),
        ("links", r.links),
    ] {
        writeln!(s, "report {k} {v}").unwrap();
    }
    writeln!(
        s,
        "report max_spacing_deviation {}",
        r.max_spacing_deviation
    )
    .unwrap();
    for u in &r.unreadable {
        writeln!(s, "report unreadable {u}").unwrap();
    }
    for (a, g) in c.geometry.iter() {
        writeln!(s, "geometry {a} {} {} {}", g.distance, g.bend, g.torsion).unwrap();
    }
    for t in &c.templates {
        s.push_str("tuple");
        for g in t.classes {
            write!(s, " {g}").unwrap();
        }
        for v in t.ca {
            write!(s, " {:.3} {:.3} {:.3}", v.x, v.y, v.z).unwrap();
        }
        for list in &t.centroids {
            write!(s, " {}", list.len()).unwrap();
            for (a, v) in list {
                write!(s, " {a} {:.3} {:.3} {:.3}", v.x, v.y, v.z).unwrap();
            }
        }
        writeln!(s, " {} {} {}", t.freq, t.id, token(&t.pid)).unwrap();
    }
    for l in &c.links {
        write!(s, "next {} {}", l.from, l.to).unwrap();
        for m in l.mat {
            write!(s, " {m}").unwrap();
        }
        s.push('\n');
    }
    s.push_str("fallback");
    for id in &c.fallback {
        write!(s, " {id}").unwrap();
    }
    s.push('\n');
    writeln!(s, "special helix {}", c.helix_id).unwrap();
    writeln!(s, "special strand {}", c.strand_id).unwrap();
    let digest = hex::encode(Sha256::digest(s.as_bytes()));
    writeln!(s, "checksum {digest}").unwrap();
    s
}

struct Fields<'a> {
    it: std::str::SplitWhitespace<'a>,
    label: &'a str,
    line: usize,
}

impl<'a> Fields<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            path: self.label.to_string(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_str(&mut self) -> Result<&'a str> {
        self.it.next().ok_or_else(|| self.err("missing field"))
    }

    fn parse<T: FromStr>(&mut self) -> Result<T> {
        let s = self.next_str()?;
        s.parse().map_err(|_| self.err(format!("bad value `{s}`")))
    }

    fn vec3(&mut self) -> Result<Vec3> {
        Ok(Vec3::new(self.parse()?, self.parse()?, self.parse()?))
    }

    fn finish(&mut self) -> Result<()> {
        match self.it.next() {
            None => Ok(()),
            Some(x) => Err(self.err(format!("unexpected trailing field `{x}`"))),
        }
    }
}

fn from_text(text: &str, label: &str) -> Result<DbContents> {
    // the checksum line must be last and cover every byte before it
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| Error::Checksum(label.to_string()))?;
    let (body, tail) = text.split_at(body_end);
    let expected = tail
        .trim_end()
        .strip_prefix("checksum ")
        .ok_or_else(|| Error::Checksum(label.to_string()))?;
    if hex::encode(Sha256::digest(body.as_bytes())) != expected {
        return Err(Error::Checksum(label.to_string()));
    }

    let mut params = BuildParams::default();
    let mut manifest = Vec::new();
    let mut report = BuildReport::default();
    let mut geometry = CentroidGeometry::default();
    let mut templates = Vec::new();
    let mut links = Vec::new();
    let mut fallback = Vec::new();
    let (mut helix_id, mut strand_id) = (None, None);
    let mut saw_header = false;

    for (i, raw) in body.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut f = Fields {
            it: raw.split_whitespace(),
            label,
            line,
        };
        let kind = f.next_str()?;
        if !saw_header {
            if kind != "fragdb" {
                return Err(f.err("missing `fragdb` header"));
            }
            let v: u32 = f.parse()?;
            if v != FORMAT_VERSION {
                return Err(Error::Version {
                    found: v,
                    expected: FORMAT_VERSION,
                });
            }
            saw_header = true;
            continue;
        }
        match kind {
            "param" => {
                let key = f.next_str()?;
                match key {
                    "rmsd_thr" => params.rmsd_thr = f.parse()?,
                    "fallback_k" => params.fallback_k = f.parse()?,
                    "break_tolerance" => params.break_tolerance = f.parse()?,
                    "helix_bend" => params.helix_bend = f.parse()?,
                    "helix_torsion" => params.helix_torsion = f.parse()?,
                    "strand_bend" => params.strand_bend = f.parse()?,
                    "strand_torsion" => params.strand_torsion = f.parse()?,
                    "mass_weighted" => params.mass_weighted = f.parse()?,
                    _ => return Err(f.err(format!("unknown param `{key}`"))),
                }
                f.finish()?;
            }
            "manifest" => manifest.push(raw.trim_start()["manifest".len()..].trim().to_string()),
            "report" => {
                let key = f.next_str()?;
                if key == "unreadable" {
                    let rest = raw.trim_start()["report".len()..].trim_start();
                    report
                        .unreadable
                        .push(rest["unreadable".len()..].trim().to_string());
                    continue;
                }
                if key == "max_spacing_deviation" {
                    report.max_spacing_deviation = f.parse()?;
                    continue;
                }
                let v: usize = f.parse()?;
                let slot = match key {
                    "files" => &mut report.files,
                    "chains" => &mut report.chains,
                    "residues" => &mut report.residues,
                    "malformed_records" => &mut report.malformed_records,
                    "nonstandard_residues" => &mut report.nonstandard_residues,
                    "residues_without_ca" => &mut report.residues_without_ca,
                    "windows" => &mut report.windows,
                    "skipped_windows" => &mut report.skipped_windows,
                    "occurrences" => &mut report.occurrences,
                    "distinct_residue_tuples" => &mut report.distinct_residue_tuples,
                    "class_tuples_covered" => &mut report.class_tuples_covered,
                    "templates" => &mut report.templates,
                    "links" => &mut report.links,
                    _ => return Err(f.err(format!("unknown report key `{key}`"))),
                };
                *slot = v;
            }
            "geometry" => {
                let a: AminoAcid = f.parse()?;
                let p = CentroidParams::new(f.parse()?, f.parse()?, f.parse()?);
                geometry.set(a, p);
                f.finish()?;
            }
            "tuple" => templates.push(parse_tuple(&mut f)?),
            "next" => {
                let from = f.parse()?;
                let to = f.parse()?;
                let mut mat = [0i32; 9];
                for m in mat.iter_mut() {
                    *m = f.parse()?;
                }
                f.finish()?;
                links.push(NextLink { from, to, mat });
            }
            "fallback" => {
                while let Some(tok) = f.it.next() {
                    fallback.push(tok.parse().map_err(|_| f.err(format!("bad id `{tok}`")))?);
                }
            }
            "special" => {
                let which = f.next_str()?;
                let id = f.parse()?;
                match which {
                    "helix" => helix_id = Some(id),
                    "strand" => strand_id = Some(id),
                    _ => return Err(f.err(format!("unknown special `{which}`"))),
                }
            }
            _ => return Err(f.err(format!("unknown record `{kind}`"))),
        }
    }
    let missing = |what: &str| Error::Format {
        path: label.to_string(),
        line: 0,
        msg: format!("missing `special {what}` record"),
    };
    Ok(DbContents {
        params,
        manifest,
        geometry,
        templates,
        links,
        fallback,
        helix_id: helix_id.ok_or_else(|| missing("helix"))?,
        strand_id: strand_id.ok_or_else(|| missing("strand"))?,
        report,
    })
}

fn parse_tuple(f: &mut Fields<'_>) -> Result<FragmentTemplate> {
    let mut classes = [ClassCode::UNKNOWN; 4];
    for c in classes.iter_mut() {
        let v: i8 = f.parse()?;
        *c = ClassCode::new(v).map_err(|e| f.err(e.to_string()))?;
    }
    let mut ca = [Vec3::ZERO; 4];
    for v in ca.iter_mut() {
        *v = f.vec3()?;
    }
    let mut centroids: [BTreeMap<AminoAcid, Vec3>; 2] = Default::default();
    for list in centroids.iter_mut() {
        let n: usize = f.parse()?;
        for _ in 0..n {
            let a: AminoAcid = f.parse()?;
            list.insert(a, f.vec3()?);
        }
    }
    let freq = f.parse()?;
    let id = f.parse()?;
    let pid = f.next_str()?.to_string();
    f.finish()?;
    Ok(FragmentTemplate {
        id,
        classes,
        ca,
        centroids,
        freq,
        pid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragdb::{build_helix_template, compute_next, homogeneous};

    fn small_db() -> FragmentDatabase {
        let g = CentroidGeometry::default();
        let mut h = build_helix_template(&g);
        h.id = 1;
        h.ca = h.ca.map(Vec3::quantize_milli);
        for l in h.centroids.iter_mut() {
            for v in l.values_mut() {
                *v = v.quantize_milli();
            }
        }
        let mut s = h.clone();
        s.id = 2;
        s.classes = homogeneous(ClassCode::STRAND);
        s.pid = "IDEAL_STRAND".into();
        let templates = vec![h, s];
        let links = compute_next(&templates, &[], 1.0);
        FragmentDatabase::from_contents(DbContents {
            params: BuildParams::default(),
            manifest: vec!["a.pdb".into(), "dir/b c.pdb".into()],
            geometry: g,
            templates,
            links,
            fallback: vec![],
            helix_id: 1,
            strand_id: 2,
            report: BuildReport {
                unreadable: vec!["x.pdb: no such file".into()],
                max_spacing_deviation: 0.123,
                ..Default::default()
            },
        })
    }

    #[test]
    fn text_and_binary_round_trip() {
        let db = small_db();
        let dir = tempfile::tempdir().unwrap();
        let tp = dir.path().join("db.txt");
        let bp = dir.path().join("db.bin");
        db.save(&tp, DbFormat::Text).unwrap();
        db.save(&bp, DbFormat::Binary).unwrap();
        let a = load_database(&tp).unwrap();
        let b = load_database(&bp).unwrap();
        assert_eq!(a, db);
        assert_eq!(b, db);
    }

    #[test]
    fn truncated_files_fail_checksum() {
        let db = small_db();
        let dir = tempfile::tempdir().unwrap();
        for fmt in [DbFormat::Text, DbFormat::Binary] {
            let p = dir.path().join("db");
            db.save(&p, fmt).unwrap();
            let bytes = std::fs::read(&p).unwrap();
            std::fs::write(&p, &bytes[..bytes.len() * 2 / 3]).unwrap();
            assert!(
                matches!(load_database(&p), Err(Error::Checksum(_))),
                "{fmt:?}"
            );
        }
    }

    #[test]
    fn tampered_text_fails_checksum() {
        let text = to_text(small_db().contents());
        let bad = text.replacen("param rmsd_thr 1", "param rmsd_thr 2", 1);
        assert!(matches!(from_text(&bad, "t"), Err(Error::Checksum(_))));
    }

    #[test]
    fn version_mismatch() {
        let text = to_text(small_db().contents()).replacen("fragdb 1", "fragdb 9", 1);
        let body_end = text.trim_end_matches('\n').rfind('\n').unwrap() + 1;
        let body = &text[..body_end];
        let fixed = format!(
            "{body}checksum {}\n",
            hex::encode(Sha256::digest(body.as_bytes()))
        );
        assert!(matches!(
            from_text(&fixed, "t"),
            Err(Error::Version {
                found: 9,
                expected: 1
            })
        ));
        let mut bin = to_binary(small_db().contents()).unwrap();
        bin[8] = 7;
        assert!(matches!(
            from_binary(&bin, "b"),
            Err(Error::Version { found: 7, .. })
        ));
    }

    #[test]
    fn text_layout() {
        let text = to_text(small_db().contents());
        let tuple = text
            .lines()
            .find(|l| l.starts_with("tuple -2 -2 -2 -2 0.000 0.000 0.000 3.800 0.000 0.000"))
            .unwrap();
        assert!(tuple.ends_with(" 1000 1 IDEAL_HELIX"));
        let next = text.lines().find(|l| l.starts_with("next 1 1 ")).unwrap();
        assert_eq!(next.split_whitespace().count(), 12);
        assert!(text.lines().last().unwrap().starts_with("checksum "));
    }
}
