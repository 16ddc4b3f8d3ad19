//! Reader for the fixed-column PDB coordinate format.
//!
//! | Columns | Field                      |
//! |---------|----------------------------|
//! | 1-6     | record name                |
//! | 13-16   | atom name                  |
//! | 17      | altLoc                     |
//! | 18-20   | residue name               |
//! | 22      | chain id                   |
//! | 23-26   | residue sequence number    |
//! | 27      | insertion code             |
//! | 31-54   | x, y, z (8.3 each)         |
//! | 77-78   | element                    |
//!
//! Only the first MODEL is read and only blank or `A` alternate locations are
//! kept. HELIX and SHEET records become secondary-structure annotations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fragdb::AminoAcid;
use crate::geometry::Vec3;
use crate::io::ss::{SsAnnotation, SsKind, SsRange};

const BACKBONE: [&str; 5] = ["N", "CA", "C", "O", "OXT"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideChainAtom {
    pub name: String,
    pub element: String,
    pub pos: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedResidue {
    pub seq: i32,
    pub icode: char,
    pub amino: AminoAcid,
    pub ca: Vec3,
    pub side_chain: Vec<SideChainAtom>,
}

impl ParsedResidue {
    /// Side-chain center: mean of the heavy side-chain atoms, optionally
    /// mass-weighted. Glycine (or a residue with no side-chain atoms) uses Cα.
    pub fn side_chain_center(&self, mass_weighted: bool) -> Vec3 {
        if self.amino == AminoAcid::Gly || self.side_chain.is_empty() {
            return self.ca;
        }
        let mut total = 0.0;
        let mut acc = Vec3::ZERO;
        for atom in &self.side_chain {
            let w = if mass_weighted {
                element_mass(&atom.element)
            } else {
                1.0
            };
            acc += atom.pos * w;
            total += w;
        }
        acc / total
    }
}

fn element_mass(element: &str) -> f64 {
    match element {
        "N" => 14.007,
        "O" => 15.999,
        "S" => 32.06,
        "SE" => 78.971,
        _ => 12.011,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedChain {
    /// Source identifier, e.g. the file stem or PDB id.
    pub source: String,
    pub chain_id: char,
    pub residues: Vec<ParsedResidue>,
}

impl ParsedChain {
    pub fn sequence(&self) -> Vec<AminoAcid> {
        self.residues.iter().map(|r| r.amino).collect()
    }

    pub fn ca_trace(&self) -> Vec<Vec3> {
        self.residues.iter().map(|r| r.ca).collect()
    }

    /// Identifier used as template provenance: source plus chain letter.
    pub fn pid(&self) -> String {
        if self.chain_id == ' ' {
            self.source.clone()
        } else {
            format!("{}_{}", self.source, self.chain_id)
        }
    }
}

/// Raw HELIX/SHEET record before it is mapped onto residue indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsRecord {
    pub kind: SsKind,
    pub chain_id: char,
    pub start_seq: i32,
    pub end_seq: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub malformed_records: usize,
    pub nonstandard_residues: usize,
    pub residues_without_ca: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedStructure {
    pub source: String,
    pub chains: Vec<ParsedChain>,
    pub ss_records: Vec<SsRecord>,
    pub report: ParseReport,
}

impl ParsedStructure {
    /// Secondary-structure annotation of `chain` as 1-based residue indices.
    /// Records that overlap an earlier one are dropped.
    pub fn ss_for_chain(&self, chain: &ParsedChain) -> SsAnnotation {
        let index: BTreeMap<i32, usize> = chain
            .residues
            .iter()
            .enumerate()
            .map(|(i, r)| (r.seq, i + 1))
            .collect();
        let mut ranges: Vec<SsRange> = Vec::new();
        for rec in self
            .ss_records
            .iter()
            .filter(|r| r.chain_id == chain.chain_id)
        {
            let (Some(&start), Some(&end)) = (index.get(&rec.start_seq), index.get(&rec.end_seq))
            else {
                continue;
            };
            if end < start {
                continue;
            }
            let overlaps = ranges.iter().any(|r| start <= r.end && r.start <= end);
            if !overlaps {
                ranges.push(SsRange {
                    start,
                    end,
                    kind: rec.kind,
                });
            }
        }
        ranges.sort_by_key(|r| r.start);
        SsAnnotation { ranges }
    }
}

fn column(line: &str, from: usize, to: usize) -> Option<&str> {
    // 1-based inclusive columns
    line.get(from - 1..to.min(line.len()))
}

fn char_at(line: &str, col: usize) -> char {
    line.as_bytes()
        .get(col - 1)
        .map(|&b| b as char)
        .unwrap_or(' ')
}

struct AtomRecord {
    name: String,
    alt_loc: char,
    res_name: String,
    chain_id: char,
    seq: i32,
    icode: char,
    pos: Vec3,
    element: String,
}

fn parse_atom(line: &str) -> Option<AtomRecord> {
    let name = column(line, 13, 16)?.trim().to_string();
    let res_name = column(line, 18, 20)?.trim().to_string();
    let seq = column(line, 23, 26)?.trim().parse().ok()?;
    let x: f64 = column(line, 31, 38)?.trim().parse().ok()?;
    let y: f64 = column(line, 39, 46)?.trim().parse().ok()?;
    let z: f64 = column(line, 47, 54)?.trim().parse().ok()?;
    let pos = Vec3::new(x, y, z);
    if name.is_empty() || !pos.is_finite() {
        return None;
    }
    let element = column(line, 77, 78)
        .map(|e| e.trim().to_ascii_uppercase())
        .filter(|e| !e.is_empty())
        .unwrap_or_else(|| {
            name.trim_start_matches(|c: char| c.is_ascii_digit())
                .chars()
                .next()
                .map(|c| c.to_string())
                .unwrap_or_default()
        });
    Some(AtomRecord {
        name,
        alt_loc: char_at(line, 17),
        res_name,
        chain_id: char_at(line, 22),
        seq,
        icode: char_at(line, 27),
        pos,
        element,
    })
}

fn parse_ss(line: &str, kind: SsKind) -> Option<SsRecord> {
    // HELIX: chain 20, start 22-25, end chain 32, end 34-37.
    // SHEET: chain 22, start 23-26, end chain 33, end 34-37.
    let (chain_col, start) = match kind {
        SsKind::Helix => (20, column(line, 22, 25)?),
        SsKind::Strand => (22, column(line, 23, 26)?),
    };
    Some(SsRecord {
        kind,
        chain_id: char_at(line, chain_col),
        start_seq: start.trim().parse().ok()?,
        end_seq: column(line, 34, 37)?.trim().parse().ok()?,
    })
}

#[derive(Default)]
struct ResidueBuilder {
    amino: Option<AminoAcid>,
    res_name: String,
    ca: Option<Vec3>,
    side_chain: Vec<SideChainAtom>,
}

/// Parses PDB text into chains and secondary-structure records.
pub fn parse_structure(text: &str, source: &str) -> Result<ParsedStructure> {
    let mut report = ParseReport::default();
    let mut ss_records = Vec::new();
    // chain id -> (residue key -> builder), in order of first appearance
    let mut chain_order: Vec<char> = Vec::new();
    let mut residues: BTreeMap<char, Vec<((i32, char), ResidueBuilder)>> = BTreeMap::new();
    let mut seen_model = false;

    for line in text.lines() {
        let record = column(line, 1, 6).unwrap_or(line).trim_end();
        match record {
            "MODEL" => {
                if seen_model {
                    break;
                }
                seen_model = true;
            }
            "ENDMDL" => break,
            "HELIX" => match parse_ss(line, SsKind::Helix) {
                Some(r) => ss_records.push(r),
                None => report.malformed_records += 1,
            },
            "SHEET" => match parse_ss(line, SsKind::Strand) {
                Some(r) => ss_records.push(r),
                None => report.malformed_records += 1,
            },
            "ATOM" => {
                let Some(atom) = parse_atom(line) else {
                    report.malformed_records += 1;
                    continue;
                };
                if atom.alt_loc != ' ' && atom.alt_loc != 'A' {
                    continue;
                }
                if atom.element == "H" || atom.element == "D" {
                    continue;
                }
                let list = residues.entry(atom.chain_id).or_insert_with(|| {
                    chain_order.push(atom.chain_id);
                    Vec::new()
                });
                let key = (atom.seq, atom.icode);
                if list.last().map(|(k, _)| *k) != Some(key) {
                    list.push((
                        key,
                        ResidueBuilder {
                            amino: atom.res_name.parse().ok(),
                            res_name: atom.res_name.clone(),
                            ..Default::default()
                        },
                    ));
                }
                let builder = &mut list.last_mut().unwrap().1;
                if builder.res_name != atom.res_name {
                    continue;
                }
                if atom.name == "CA" {
                    builder.ca.get_or_insert(atom.pos);
                } else if !BACKBONE.contains(&atom.name.as_str()) {
                    builder.side_chain.push(SideChainAtom {
                        name: atom.name,
                        element: atom.element,
                        pos: atom.pos,
                    });
                }
            }
            _ => {}
        }
    }

    let mut chains = Vec::new();
    for chain_id in chain_order {
        let mut list = residues.remove(&chain_id).unwrap_or_default();
        list.sort_by_key(|(k, _)| *k);
        let mut out = Vec::new();
        for ((seq, icode), b) in list {
            let Some(amino) = b.amino else {
                report.nonstandard_residues += 1;
                continue;
            };
            let Some(ca) = b.ca else {
                report.residues_without_ca += 1;
                continue;
            };
            out.push(ParsedResidue {
                seq,
                icode,
                amino,
                ca,
                side_chain: b.side_chain,
            });
        }
        if !out.is_empty() {
            chains.push(ParsedChain {
                source: source.to_string(),
                chain_id,
                residues: out,
            });
        }
    }
    if chains.is_empty() {
        return Err(Error::NoResidues);
    }
    Ok(ParsedStructure {
        source: source.to_string(),
        chains,
        ss_records,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(
        serial: usize,
        name: &str,
        res: &str,
        chain: char,
        seq: i32,
        p: [f64; 3],
        el: &str,
    ) -> String {
        format!(
            "ATOM  {serial:>5} {name:<4} {res:>3} {chain}{seq:>4}    {:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {el:>2}",
            p[0], p[1], p[2]
        )
    }

    #[test]
    fn single_ca() {
        let text = atom(1, " CA", "ALA", 'A', 1, [1.0, 2.0, 3.0], "C");
        let s = parse_structure(&text, "t").unwrap();
        assert_eq!(s.chains.len(), 1);
        assert_eq!(s.chains[0].residues.len(), 1);
        assert_eq!(s.chains[0].residues[0].ca, Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn first_model_only() {
        let text = [
            "MODEL        1".to_string(),
            atom(1, " CA", "ALA", 'A', 1, [0.0, 0.0, 0.0], "C"),
            "ENDMDL".into(),
            "MODEL        2".into(),
            atom(1, " CA", "ALA", 'A', 1, [9.0, 0.0, 0.0], "C"),
            atom(2, " CA", "GLY", 'A', 2, [9.0, 3.8, 0.0], "C"),
            "ENDMDL".into(),
        ]
        .join("\n");
        let s = parse_structure(&text, "t").unwrap();
        assert_eq!(s.chains[0].residues.len(), 1);
        assert_eq!(s.chains[0].residues[0].ca.x, 0.0);
    }

    #[test]
    fn alt_loc_and_side_chain_center() {
        let mut lines = vec![
            atom(1, " N", "SER", 'A', 5, [0.0, 0.0, 0.0], "N"),
            atom(2, " CA", "SER", 'A', 5, [1.0, 0.0, 0.0], "C"),
            atom(3, " CB", "SER", 'A', 5, [1.0, 1.0, 0.0], "C"),
            atom(4, " OG", "SER", 'A', 5, [1.0, 3.0, 0.0], "O"),
            atom(5, " H", "SER", 'A', 5, [5.0, 5.0, 5.0], "H"),
        ];
        let mut alt = atom(6, " OG", "SER", 'A', 5, [9.0, 9.0, 9.0], "O");
        alt.replace_range(16..17, "B");
        lines.push(alt);
        let s = parse_structure(&lines.join("\n"), "t").unwrap();
        let r = &s.chains[0].residues[0];
        assert_eq!(r.side_chain.len(), 2);
        assert_eq!(r.side_chain_center(false), Vec3::new(1.0, 2.0, 0.0));
        let w = r.side_chain_center(true);
        assert!(w.y > 2.0);
    }

    #[test]
    fn malformed_and_nonstandard_counted() {
        let text = [
            "ATOM      1  CA  ALA A   1      garbage".to_string(),
            atom(2, " CA", "MSE", 'A', 2, [0.0, 0.0, 0.0], "C"),
            atom(3, " CB", "ALA", 'A', 3, [0.0, 0.0, 0.0], "C"),
            atom(4, " CA", "GLY", 'A', 4, [3.8, 0.0, 0.0], "C"),
        ]
        .join("\n");
        let s = parse_structure(&text, "t").unwrap();
        assert_eq!(s.report.malformed_records, 1);
        assert_eq!(s.report.nonstandard_residues, 1);
        assert_eq!(s.report.residues_without_ca, 1);
        assert_eq!(s.chains[0].residues.len(), 1);
    }

    #[test]
    fn no_residues_is_error() {
        assert!(matches!(
            parse_structure("HEADER x\nEND\n", "t"),
            Err(Error::NoResidues)
        ));
    }

    #[test]
    fn helix_and_sheet_records() {
        let mut lines: Vec<String> = (1..=10)
            .map(|i| {
                atom(
                    i,
                    " CA",
                    "ALA",
                    'A',
                    i as i32 + 10,
                    [3.8 * i as f64, 0.0, 0.0],
                    "C",
                )
            })
            .collect();
        lines.insert(
            0,
            "HELIX    1   1 ALA A   11  ALA A   15  1                                   5".into(),
        );
        lines.insert(1, "SHEET    1   A 2 ALA A  17  ALA A  19  0".into());
        let s = parse_structure(&lines.join("\n"), "t").unwrap();
        assert_eq!(s.ss_records.len(), 2);
        let ann = s.ss_for_chain(&s.chains[0]);
        assert_eq!(ann.ranges.len(), 2);
        assert_eq!(
            (ann.ranges[0].start, ann.ranges[0].end, ann.ranges[0].kind),
            (1, 5, SsKind::Helix)
        );
        assert_eq!(
            (ann.ranges[1].start, ann.ranges[1].end, ann.ranges[1].kind),
            (7, 9, SsKind::Strand)
        );
    }
}
