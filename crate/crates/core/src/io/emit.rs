//! Writer for predicted structures, and a reader for the files it writes.
//!
//! Each solution is one MODEL. Cα atoms are named `CA`, side-chain
//! centroids `CEN` (element C). REMARK 250 lines inside each model carry the
//! energy, the template chain and the source protein of every template.

use std::fmt::Write as _;

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::fragdb::{AminoAcid, FragmentDatabase, TemplateId};
use crate::model::{Conformation, IPoint};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmitOptions {
    /// Free text for a leading REMARK line.
    pub title: Option<String>,
    /// Written as a REMARK when set; left out for reproducible output.
    pub timestamp: Option<String>,
}

/// Centi-Å integer as Å with three decimals, without going through floats.
pub fn format_centi(v: i32) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:02}0", a / 100, a % 100)
}

const IDS_PER_LINE: usize = 12;

/// PDB text with one MODEL per conformation.
pub fn emit_structure(
    models: &[Conformation],
    db: &FragmentDatabase,
    opts: &EmitOptions,
) -> Result<String> {
    if models.is_empty() {
        return Err(Error::InvalidInput("no conformation to write".into()));
    }
    let mut s = String::new();
    if let Some(t) = &opts.title {
        writeln!(s, "REMARK   1 {t}").unwrap();
    }
    if let Some(t) = &opts.timestamp {
        writeln!(s, "REMARK   1 CREATED {t}").unwrap();
    }
    for (m, conf) in models.iter().enumerate() {
        let n = conf.len();
        if n < 4 || conf.ca.len() != n || conf.centroids.len() != n || conf.chain.len() + 3 != n {
            return Err(Error::InvalidInput(format!(
                "model {} is incomplete",
                m + 1
            )));
        }
        writeln!(s, "MODEL     {:>4}", m + 1).unwrap();
        let e = &conf.energy;
        writeln!(
            s,
            "REMARK 250 ENERGY {} CONTACT {} TORSION {} CLASHES {}",
            e.total, e.contact_total, e.torsion_total, e.clashes
        )
        .unwrap();
        for ids in conf.chain.chunks(IDS_PER_LINE) {
            let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
            writeln!(s, "REMARK 250 CHAIN {}", ids.join(" ")).unwrap();
        }
        for ids in conf.chain.chunks(IDS_PER_LINE) {
            let pids: Vec<&str> = ids
                .iter()
                .map(|&i| db.template(i).map_or("?", |t| t.pid.as_str()))
                .collect();
            writeln!(s, "REMARK 250 PIDS {}", pids.join(" ")).unwrap();
        }
        let mut serial = 1;
        for i in 0..n {
            let res = conf.sequence[i].three_letter();
            for (name, p) in [("CA", conf.ca[i]), ("CEN", conf.centroids[i])] {
                writeln!(s, "{}", atom_line(serial, name, res, i as i32 + 1, p)).unwrap();
                serial += 1;
            }
        }
        writeln!(
            s,
            "TER   {serial:>5}      {} A{:>4}",
            conf.sequence[n - 1].three_letter(),
            n
        )
        .unwrap();
        writeln!(s, "ENDMDL").unwrap();
    }
    writeln!(s, "END").unwrap();
    Ok(s)
}

fn atom_line(serial: usize, name: &str, res: &str, seq: i32, p: IPoint) -> String {
    format!(
        "ATOM  {serial:>5}  {name:<3} {res} A{seq:>4}    {:>8}{:>8}{:>8}  1.00  0.00           C",
        format_centi(p[0]),
        format_centi(p[1]),
        format_centi(p[2]),
    )
}

/// One model read back from an emitted file; coordinates in Å.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedModel {
    pub sequence: Vec<AminoAcid>,
    pub chain: Vec<TemplateId>,
    pub energy: EnergyBreakdown,
    pub ca: Vec<crate::geometry::Vec3>,
    pub centroids: Vec<crate::geometry::Vec3>,
}

/// Reads every model of a file written by [`emit_structure`].
pub fn read_emitted(text: &str) -> Result<Vec<EmittedModel>> {
    let bad = |line: usize, msg: &str| Error::Format {
        path: "structure".into(),
        line,
        msg: msg.to_string(),
    };
    let mut out = Vec::new();
    let mut cur: Option<(EmittedModel, bool)> = None;
    for (no, line) in text.lines().enumerate() {
        let no = no + 1;
        let rec = line.get(0..6).unwrap_or(line).trim_end();
        match rec {
            "MODEL" => {
                cur = Some((
                    EmittedModel {
                        sequence: Vec::new(),
                        chain: Vec::new(),
                        energy: EnergyBreakdown::default(),
                        ca: Vec::new(),
                        centroids: Vec::new(),
                    },
                    false,
                ))
            }
            "ENDMDL" => {
                let (m, has_energy) = cur
                    .take()
                    .ok_or_else(|| bad(no, "ENDMDL outside a model"))?;
                if !has_energy || m.chain.len() + 3 != m.ca.len() || m.ca.len() != m.centroids.len()
                {
                    return Err(bad(no, "model lacks energy, chain or atoms"));
                }
                out.push(m);
            }
            "REMARK" => {
                let Some((m, has_energy)) = cur.as_mut() else {
                    continue;
                };
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() < 3 || f[1] != "250" {
                    continue;
                }
                match f[2] {
                    "ENERGY" if f.len() == 10 => {
                        let num = |k: usize| f[k].parse::<i64>().map_err(|_| bad(no, "bad energy"));
                        m.energy = EnergyBreakdown {
                            total: num(3)?,
                            contact_total: num(5)?,
                            torsion_total: num(7)?,
                            clashes: num(9)? as usize,
                        };
                        *has_energy = true;
                    }
                    "CHAIN" => {
                        for t in &f[3..] {
                            m.chain
                                .push(t.parse().map_err(|_| bad(no, "bad template id"))?);
                        }
                    }
                    _ => {}
                }
            }
            "ATOM" => {
                let Some((m, _)) = cur.as_mut() else { continue };
                let name = line
                    .get(12..16)
                    .map(str::trim)
                    .ok_or_else(|| bad(no, "short ATOM record"))?;
                let coord = |a: usize, b: usize| {
                    line.get(a..b)
                        .and_then(|t| t.trim().parse::<f64>().ok())
                        .ok_or_else(|| bad(no, "bad coordinate"))
                };
                let p = crate::geometry::Vec3::new(coord(30, 38)?, coord(38, 46)?, coord(46, 54)?);
                match name {
                    "CA" => {
                        let res = line
                            .get(17..20)
                            .ok_or_else(|| bad(no, "short ATOM record"))?;
                        m.sequence
                            .push(res.parse().map_err(|_| bad(no, "unknown residue"))?);
                        m.ca.push(p);
                    }
                    "CEN" => m.centroids.push(p),
                    _ => {}
                }
            }
            _ => {}
        }
    }
    if cur.is_some() {
        return Err(bad(text.lines().count(), "unterminated model"));
    }
    if out.is_empty() {
        return Err(Error::NoResidues);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centi_formatting() {
        assert_eq!(format_centi(123), "1.230");
        assert_eq!(format_centi(-5), "-0.050");
        assert_eq!(format_centi(0), "0.000");
        assert_eq!(format_centi(-123456), "-1234.560");
    }

    #[test]
    fn atom_columns() {
        let l = atom_line(7, "CEN", "ALA", 12, [123, -4567, 0]);
        assert_eq!(&l[12..16], " CEN");
        assert_eq!(&l[17..20], "ALA");
        assert_eq!(&l[21..22], "A");
        assert_eq!(&l[22..26], "  12");
        assert_eq!(&l[30..38], "   1.230");
        assert_eq!(&l[38..46], " -45.670");
        assert_eq!(&l[76..78], " C");
    }
}
