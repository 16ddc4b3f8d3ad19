//! Independent checker for predicted structures.
//!
//! Re-derives coordinates from a template chain by fitting each template
//! onto its mapped predecessor (no accumulated rotation products), then
//! checks every constraint pair by pair.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::energy::{evaluate, EnergyBreakdown, EnergyParams, EnergyTables};
use crate::error::{Error, Result};
use crate::fragdb::{AminoAcid, FragmentDatabase, TemplateId};
use crate::geometry::{superpose, Vec3};
use crate::model::{
    default_diameter, quantize, terminal_centroids, Conformation, IPoint, MinDistance, CA_TYPE,
    COORD_SCALE,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationParams {
    pub d_min: f64,
    pub centroid_factor: f64,
    pub backbone_radius: f64,
    /// Å; `None` means 5.68·n^0.38.
    pub diameter: Option<f64>,
    /// Allowed |d − 3.8| between consecutive Cα, Å.
    pub spacing_tolerance: f64,
    pub energy: EnergyParams,
}

impl Default for ValidationParams {
    fn default() -> Self {
        ValidationParams {
            d_min: 3.2,
            centroid_factor: 0.75,
            backbone_radius: 1.9,
            diameter: None,
            spacing_tolerance: 0.05,
            energy: EnergyParams::default(),
        }
    }
}

impl ValidationParams {
    pub fn from_model(p: &crate::model::ModelParams) -> Self {
        ValidationParams {
            d_min: p.d_min,
            centroid_factor: p.centroid_factor,
            backbone_radius: p.backbone_radius,
            diameter: p.diameter,
            energy: p.energy.clone(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Issue {
    WrongLength {
        windows: usize,
        residues: usize,
    },
    UnknownTemplate {
        window: usize,
        id: TemplateId,
    },
    MissingLink {
        window: usize,
        from: TemplateId,
        to: TemplateId,
    },
    LinkRmsd {
        window: usize,
        rmsd: f64,
    },
    Spacing {
        i: usize,
        distance: f64,
    },
    TooClose {
        i: usize,
        j: usize,
        what: &'static str,
        distance: f64,
        min: f64,
    },
    Diameter {
        i: usize,
        j: usize,
        distance: f64,
        max: f64,
    },
    CoordinateMismatch {
        i: usize,
        what: &'static str,
    },
    EnergyMismatch {
        reported: i64,
        computed: i64,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::WrongLength { windows, residues } => {
                write!(f, "{windows} templates do not cover {residues} residues")
            }
            Issue::UnknownTemplate { window, id } => {
                write!(f, "window {}: unknown template {id}", window + 1)
            }
            Issue::MissingLink { window, from, to } => {
                write!(f, "window {}: no next link {from} -> {to}", window + 1)
            }
            Issue::LinkRmsd { window, rmsd } => {
                write!(f, "window {}: overlap rmsd {rmsd:.3}", window + 1)
            }
            Issue::Spacing { i, distance } => {
                write!(f, "residues {}-{}: Ca spacing {distance:.3}", i + 1, i + 2)
            }
            Issue::TooClose {
                i,
                j,
                what,
                distance,
                min,
            } => {
                write!(
                    f,
                    "residues {} and {}: {what} at {distance:.3} < {min:.3}",
                    i + 1,
                    j + 1
                )
            }
            Issue::Diameter {
                i,
                j,
                distance,
                max,
            } => {
                write!(
                    f,
                    "residues {} and {}: Ca distance {distance:.3} > {max:.3}",
                    i + 1,
                    j + 1
                )
            }
            Issue::CoordinateMismatch { i, what } => {
                write!(
                    f,
                    "residue {}: {what} differs from the re-derived position",
                    i + 1
                )
            }
            Issue::EnergyMismatch { reported, computed } => {
                write!(f, "energy {reported} reported, {computed} recomputed")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    pub energy: Option<EnergyBreakdown>,
    pub max_link_rmsd: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Coordinates of a template chain, interior centroids included.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePlacement {
    pub ca: Vec<Vec3>,
    /// Every residue; the chain ends use [`terminal_centroids`].
    pub centroids: Vec<Vec3>,
    /// Interior centroids only, as the energy function sees them.
    pub interior: Vec<Option<Vec3>>,
    pub link_rmsd: Vec<f64>,
}

/// Places `chain` from scratch: the first template as stored, every later
/// one rotated by superposing its first three Cα onto the previous
/// template's last three (as mapped into the global frame) and anchored so
/// its third Cα lands on the placed point.
pub fn reference_placement(
    db: &FragmentDatabase,
    seq: &[AminoAcid],
    chain: &[TemplateId],
) -> Result<ReferencePlacement> {
    let n = seq.len();
    if n < 4 || chain.len() + 3 != n {
        return Err(Error::InvalidInput(format!(
            "{} templates for {n} residues",
            chain.len()
        )));
    }
    let tpl = |id: TemplateId| {
        db.template(id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown template {id}")))
    };
    let mut ca: Vec<Vec3> = Vec::with_capacity(n);
    let mut interior = vec![None; n];
    let mut link_rmsd = Vec::new();
    // previous template's Cα mapped into the global frame
    let mut prev_mapped: [Vec3; 4] = [Vec3::ZERO; 4];
    for (k, &id) in chain.iter().enumerate() {
        let t = tpl(id)?;
        let (rot, shift) = if k == 0 {
            ca.extend_from_slice(&t.ca);
            (crate::geometry::Rot3::IDENTITY, Vec3::ZERO)
        } else {
            let prev = tpl(chain[k - 1])?;
            link_rmsd.push(superpose(&prev.ca[1..4], &t.ca[0..3])?.rmsd);
            let rot = superpose(&prev_mapped[1..4], &t.ca[0..3])?.rotation;
            let shift = ca[k + 2] - rot.apply(t.ca[2]);
            ca.push(shift + rot.apply(t.ca[3]));
            (rot, shift)
        };
        let map = |p: Vec3| rot.apply(p) + shift;
        prev_mapped = t.ca.map(map);
        interior[k + 1] = Some(map(t.centroid(1, seq[k + 1], db.geometry())));
        if k + 4 == n {
            interior[k + 2] = Some(map(t.centroid(2, seq[k + 2], db.geometry())));
        }
    }
    let (first, last) = terminal_centroids(seq, &ca, db.geometry())?;
    let centroids = (0..n)
        .map(|i| match i {
            0 => first,
            i if i == n - 1 => last,
            i => interior[i].expect("interior centroid"),
        })
        .collect();
    Ok(ReferencePlacement {
        ca,
        centroids,
        interior,
        link_rmsd,
    })
}

/// Checks spacing, minimum distances and diameter on integer coordinates.
pub fn check_geometry(
    seq: &[AminoAcid],
    ca: &[IPoint],
    centroids: &[IPoint],
    geometry: &crate::fragdb::CentroidGeometry,
    params: &ValidationParams,
) -> Vec<Issue> {
    let n = seq.len();
    let mut issues = Vec::new();
    let dist = |a: IPoint, b: IPoint| {
        let d2: f64 = (0..3).map(|k| ((a[k] - b[k]) as f64).powi(2)).sum();
        d2.sqrt() / COORD_SCALE
    };
    for i in 0..n.saturating_sub(1) {
        let d = dist(ca[i], ca[i + 1]);
        if (d - 3.8).abs() > params.spacing_tolerance {
            issues.push(Issue::Spacing { i, distance: d });
        }
    }
    let min = MinDistance::new(
        geometry,
        params.d_min,
        params.centroid_factor,
        params.backbone_radius,
    );
    let ty = |i: usize| seq[i].index();
    for i in 0..n {
        for j in i + 2..n {
            let pairs = [
                ("Ca-Ca", ca[i], ca[j], CA_TYPE, CA_TYPE),
                ("Ca-centroid", ca[i], centroids[j], CA_TYPE, ty(j)),
                ("centroid-Ca", centroids[i], ca[j], ty(i), CA_TYPE),
                (
                    "centroid-centroid",
                    centroids[i],
                    centroids[j],
                    ty(i),
                    ty(j),
                ),
            ];
            for (what, a, b, ta, tb) in pairs {
                let d = dist(a, b);
                let m = min.get(ta, tb);
                if d < m {
                    issues.push(Issue::TooClose {
                        i,
                        j,
                        what,
                        distance: d,
                        min: m,
                    });
                }
            }
        }
    }
    let diameter = params.diameter.unwrap_or_else(|| default_diameter(n));
    let max = (diameter * COORD_SCALE).round() / COORD_SCALE;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(ca[i], ca[j]);
            if d > max {
                issues.push(Issue::Diameter {
                    i,
                    j,
                    distance: d,
                    max,
                });
            }
        }
    }
    issues
}

/// Full check of a template chain: links exist and overlap within the
/// database threshold, and the re-derived structure satisfies every
/// constraint. Returns the re-derived energy.
pub fn check_chain(
    db: &FragmentDatabase,
    tables: &EnergyTables,
    seq: &[AminoAcid],
    chain: &[TemplateId],
    params: &ValidationParams,
) -> Result<(ValidationReport, Option<ReferencePlacement>)> {
    let mut issues = Vec::new();
    if chain.len() + 3 != seq.len() {
        issues.push(Issue::WrongLength {
            windows: chain.len(),
            residues: seq.len(),
        });
    }
    for (k, &id) in chain.iter().enumerate() {
        if db.template(id).is_none() {
            issues.push(Issue::UnknownTemplate { window: k, id });
        }
    }
    let linked = |a: TemplateId, b: TemplateId| db.links().iter().any(|l| l.from == a && l.to == b);
    for k in 1..chain.len() {
        if !linked(chain[k - 1], chain[k]) {
            issues.push(Issue::MissingLink {
                window: k,
                from: chain[k - 1],
                to: chain[k],
            });
        }
    }
    if !issues.is_empty() {
        return Ok((
            ValidationReport {
                issues,
                energy: None,
                max_link_rmsd: 0.0,
            },
            None,
        ));
    }
    let placed = reference_placement(db, seq, chain)?;
    let thr = db.params().rmsd_thr;
    for (k, &r) in placed.link_rmsd.iter().enumerate() {
        if r > thr + 1e-9 {
            issues.push(Issue::LinkRmsd {
                window: k + 1,
                rmsd: r,
            });
        }
    }
    let ca: Vec<IPoint> = placed.ca.iter().map(|&p| quantize(p)).collect();
    let cen: Vec<IPoint> = placed.centroids.iter().map(|&p| quantize(p)).collect();
    issues.extend(check_geometry(seq, &ca, &cen, db.geometry(), params));
    let energy = evaluate(seq, &placed.ca, &placed.interior, tables, &params.energy)?;
    let max_link_rmsd = placed.link_rmsd.iter().copied().fold(0.0, f64::max);
    Ok((
        ValidationReport {
            issues,
            energy: Some(energy),
            max_link_rmsd,
        },
        Some(placed),
    ))
}

/// Checks a conformation against its own template chain: coordinates must
/// equal the re-derived ones and the energy must match exactly.
pub fn check_conformation(
    db: &FragmentDatabase,
    tables: &EnergyTables,
    conf: &Conformation,
    params: &ValidationParams,
) -> Result<ValidationReport> {
    let (mut report, placed) = check_chain(db, tables, &conf.sequence, &conf.chain, params)?;
    let Some(placed) = placed else {
        return Ok(report);
    };
    for i in 0..conf.len() {
        if quantize(placed.ca[i]) != conf.ca[i] {
            report
                .issues
                .push(Issue::CoordinateMismatch { i, what: "Ca" });
        }
        if quantize(placed.centroids[i]) != conf.centroids[i] {
            report.issues.push(Issue::CoordinateMismatch {
                i,
                what: "centroid",
            });
        }
    }
    if let Some(e) = &report.energy {
        if e.total != conf.energy.total {
            report.issues.push(Issue::EnergyMismatch {
                reported: conf.energy.total,
                computed: e.total,
            });
        }
    }
    Ok(report)
}

/// Checks coordinates read back from a structure file (Å, 3 decimals)
/// against the re-derived chain: each must be within 0.0005 Å of the
/// centi-Å value.
pub fn check_file_coordinates(
    placed: &ReferencePlacement,
    ca: &[Vec3],
    centroids: &[Vec3],
) -> Vec<Issue> {
    let close = |a: Vec3, b: IPoint| {
        let b = Vec3::new(b[0] as f64, b[1] as f64, b[2] as f64) / COORD_SCALE;
        (a.x - b.x).abs() < 5e-4 && (a.y - b.y).abs() < 5e-4 && (a.z - b.z).abs() < 5e-4
    };
    let mut issues = Vec::new();
    if ca.len() != placed.ca.len() {
        issues.push(Issue::WrongLength {
            windows: placed.ca.len().saturating_sub(3),
            residues: ca.len(),
        });
        return issues;
    }
    for i in 0..ca.len() {
        if !close(ca[i], quantize(placed.ca[i])) {
            issues.push(Issue::CoordinateMismatch { i, what: "Ca" });
        }
        if let Some(&c) = centroids.get(i) {
            if !close(c, quantize(placed.centroids[i])) {
                issues.push(Issue::CoordinateMismatch {
                    i,
                    what: "centroid",
                });
            }
        }
    }
    issues
}

/// Checks one model read back from an emitted file: the template chain is
/// re-derived and validated, the file coordinates must match it, the file
/// coordinates themselves must satisfy the constraints, and the recorded
/// energy must equal the recomputed one.
pub fn check_emitted(
    db: &FragmentDatabase,
    tables: &EnergyTables,
    model: &crate::io::EmittedModel,
    params: &ValidationParams,
) -> Result<ValidationReport> {
    let (mut report, placed) = check_chain(db, tables, &model.sequence, &model.chain, params)?;
    let Some(placed) = placed else {
        return Ok(report);
    };
    report
        .issues
        .extend(check_file_coordinates(&placed, &model.ca, &model.centroids));
    let ca: Vec<IPoint> = model.ca.iter().map(|&p| quantize(p)).collect();
    let cen: Vec<IPoint> = model.centroids.iter().map(|&p| quantize(p)).collect();
    if cen.len() == ca.len() {
        for issue in check_geometry(&model.sequence, &ca, &cen, db.geometry(), params) {
            if !report.issues.contains(&issue) {
                report.issues.push(issue);
            }
        }
    }
    if let Some(e) = &report.energy {
        if e.total != model.energy.total {
            report.issues.push(Issue::EnergyMismatch {
                reported: model.energy.total,
                computed: e.total,
            });
        }
    }
    Ok(report)
}
