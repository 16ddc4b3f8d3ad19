//! Finite-domain model of one prediction: one code variable per 4-residue
//! window with a frequency-ordered template domain, next-link table
//! constraints between neighbours, incremental placement, steric and
//! diameter checks.

mod constraints;
mod placement;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use constraints::{
    default_diameter, dist2, first_diameter_violation, first_steric_violation,
    incremental_steric_violation, quantize, IPoint, MinDistance, Violation, ViolationKind, CA_TYPE,
    COORD_SCALE,
};
pub use placement::{terminal_centroids, Added, Conformation, PlacementState};

use crate::energy::{evaluate, EnergyParams, EnergyTables};
use crate::error::{Error, Result};
use crate::fragdb::{homogeneous, AminoAcid, ClassCode, FragmentDatabase, TemplateId};
use crate::geometry::Vec3;
use crate::io::{SsAnnotation, SsKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Minimum distance between non-consecutive Cα, Å.
    pub d_min: f64,
    /// Cα diameter bound in Å; `None` means 5.68·n^0.38.
    pub diameter: Option<f64>,
    /// Centroid minimum distances are max(d_min, factor·(r_a + r_b)).
    pub centroid_factor: f64,
    /// Radius given to a Cα in those minimum distances, Å.
    pub backbone_radius: f64,
    /// Re-orthonormalize the accumulated basis every this many windows.
    pub reortho_every: usize,
    pub energy: EnergyParams,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            d_min: 3.2,
            diameter: None,
            centroid_factor: 0.75,
            backbone_radius: 1.9,
            reortho_every: 16,
            energy: EnergyParams::default(),
        }
    }
}

/// The constraint-store view of one prediction.
#[derive(Debug, Clone)]
pub struct AssemblyModel<'a> {
    pub db: &'a FragmentDatabase,
    pub tables: &'a EnergyTables,
    pub sequence: Vec<AminoAcid>,
    /// Per-residue classes after secondary-structure substitution.
    pub classes: Vec<ClassCode>,
    /// Domains before next-link filtering.
    pub initial_domains: Vec<Vec<TemplateId>>,
    /// Arc-consistent domains; an empty one makes the model unsatisfiable.
    pub domains: Vec<Vec<TemplateId>>,
    /// Windows pinned to a single secondary-structure template.
    pub forced: Vec<bool>,
    pub params: ModelParams,
    pub min_distance: MinDistance,
    pub diameter_centi: i64,
}

/// Per-residue classes with annotated residues overwritten by −2 (helix)
/// or −3 (strand).
pub fn substituted_classes(seq: &[AminoAcid], ss: &SsAnnotation) -> Vec<ClassCode> {
    let mut classes: Vec<ClassCode> = seq.iter().map(|a| a.class()).collect();
    for r in &ss.ranges {
        let code = match r.kind {
            SsKind::Helix => ClassCode::HELIX,
            SsKind::Strand => ClassCode::STRAND,
        };
        for c in classes[r.start - 1..r.end].iter_mut() {
            *c = code;
        }
    }
    classes
}

pub fn build_model<'a>(
    sequence: &[AminoAcid],
    ss: &SsAnnotation,
    db: &'a FragmentDatabase,
    tables: &'a EnergyTables,
    params: ModelParams,
) -> Result<AssemblyModel<'a>> {
    let n = sequence.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "sequence of length {n}; at least 4 residues needed"
        )));
    }
    if !(params.d_min > 0.0) {
        return Err(Error::InvalidInput("d_min must be positive".into()));
    }
    ss.validate(n)?;
    let diameter = params.diameter.unwrap_or_else(|| default_diameter(n));
    if !(diameter > params.d_min) {
        return Err(Error::InvalidInput("diameter must exceed d_min".into()));
    }
    let classes = substituted_classes(sequence, ss);
    let mut initial_domains = Vec::with_capacity(n - 3);
    let mut forced = Vec::with_capacity(n - 3);
    for k in 0..n - 3 {
        let g = [classes[k], classes[k + 1], classes[k + 2], classes[k + 3]];
        let (dom, pinned) = if g == homogeneous(ClassCode::HELIX) {
            (vec![db.helix_id()], true)
        } else if g == homogeneous(ClassCode::STRAND) {
            (vec![db.strand_id()], true)
        } else {
            let t = db.templates_for(&g);
            if t.is_empty() {
                (db.fallback().to_vec(), false)
            } else {
                (t.to_vec(), false)
            }
        };
        initial_domains.push(dom);
        forced.push(pinned);
    }
    let domains = match next_consistency(&initial_domains, db) {
        Ok(d) => d,
        Err(k) => {
            let mut d = initial_domains.clone();
            d[k].clear();
            d
        }
    };
    Ok(AssemblyModel {
        db,
        tables,
        sequence: sequence.to_vec(),
        classes,
        min_distance: MinDistance::new(
            db.geometry(),
            params.d_min,
            params.centroid_factor,
            params.backbone_radius,
        ),
        diameter_centi: (diameter * COORD_SCALE).round() as i64,
        initial_domains,
        domains,
        forced,
        params,
    })
}

/// Arc consistency over the chain of next-link table constraints: a value
/// survives only with a successor in the next domain and a predecessor in
/// the previous one. Repeats to a fixpoint. On a wipe-out returns the
/// index of the emptied domain.
pub fn next_consistency(
    domains: &[Vec<TemplateId>],
    db: &FragmentDatabase,
) -> std::result::Result<Vec<Vec<TemplateId>>, usize> {
    let mut d = domains.to_vec();
    if let Some(k) = d.iter().position(Vec::is_empty) {
        return Err(k);
    }
    loop {
        let mut changed = false;
        for k in 0..d.len().saturating_sub(1) {
            let next: BTreeSet<TemplateId> = d[k + 1].iter().copied().collect();
            let before = d[k].len();
            d[k].retain(|&a| db.successors(a).iter().any(|b| next.contains(b)));
            if d[k].is_empty() {
                return Err(k);
            }
            changed |= d[k].len() != before;

            let prev: Vec<TemplateId> = d[k].clone();
            let before = d[k + 1].len();
            d[k + 1].retain(|&b| prev.iter().any(|&a| db.link(a, b).is_some()));
            if d[k + 1].is_empty() {
                return Err(k + 1);
            }
            changed |= d[k + 1].len() != before;
        }
        if !changed {
            return Ok(d);
        }
    }
}

impl<'a> AssemblyModel<'a> {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn variables(&self) -> usize {
        self.domains.len()
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.domains.iter().any(Vec::is_empty)
    }

    pub fn new_state(&self) -> PlacementState {
        PlacementState::new(self.len(), self.params.reortho_every)
    }

    /// Places window `state.windows()` with template `id` and runs the
    /// incremental checks. On a violation the window is removed again.
    pub fn try_place(
        &self,
        state: &mut PlacementState,
        id: TemplateId,
    ) -> std::result::Result<(), Option<Violation>> {
        let k = state.windows();
        if k > 0 && self.db.link(state.chain()[k - 1], id).is_none() {
            return Err(None);
        }
        let Some(t) = self.db.template(id) else {
            return Err(None);
        };
        let added = state.push(&self.sequence, self.db, t).map_err(|_| None)?;
        let v = incremental_steric_violation(
            &self.sequence,
            state.ca(),
            state.centroids(),
            &self.min_distance,
            added.first_ca,
            added.first_centroid,
        )
        .or_else(|| first_diameter_violation(state.ca(), self.diameter_centi, added.first_ca));
        match v {
            Some(v) => {
                state.pop();
                Err(Some(v))
            }
            None => Ok(()),
        }
    }

    /// Places a whole template chain, checking every constraint.
    pub fn place_chain(
        &self,
        chain: &[TemplateId],
    ) -> std::result::Result<PlacementState, Option<Violation>> {
        let mut s = self.new_state();
        for &id in chain {
            self.try_place(&mut s, id)?;
        }
        Ok(s)
    }

    /// Real centroid positions for every residue, the chain ends filled in
    /// by [`terminal_centroids`].
    fn all_centroids(&self, state: &PlacementState) -> Result<Vec<Vec3>> {
        if !state.is_complete() {
            return Err(Error::InvalidInput("incomplete placement".into()));
        }
        let (first, last) =
            terminal_centroids(&self.sequence, state.ca_real(), self.db.geometry())?;
        let n = self.len();
        Ok((0..n)
            .map(|i| match i {
                0 => first,
                i if i == n - 1 => last,
                i => state.centroids_real()[i].expect("interior centroid placed"),
            })
            .collect())
    }

    /// Steric check of a complete placement including the two terminal
    /// centroids, which the incremental checks never see.
    pub fn terminal_violation(&self, state: &PlacementState) -> Option<Violation> {
        let Ok(cen) = self.all_centroids(state) else {
            return Some(Violation {
                i: 0,
                j: self.len() - 1,
                kind: ViolationKind::CentroidCentroid,
            });
        };
        let n = self.len();
        let ints: Vec<Option<IPoint>> = cen.iter().map(|&c| Some(quantize(c))).collect();
        let only_ends: Vec<Option<IPoint>> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { ints[i] } else { None })
            .collect();
        // pairs with an end centroid: against every Cα, and against all centroids
        if let Some(v) =
            first_steric_violation(&self.sequence, state.ca(), &only_ends, &self.min_distance)
        {
            return Some(v);
        }
        first_steric_violation(&self.sequence, &[], &ints, &self.min_distance)
            .filter(|v| v.i == 0 || v.j == n - 1)
    }

    /// Turns a complete placement into a conformation with energy.
    pub fn conformation(&self, state: &PlacementState) -> Result<Conformation> {
        let cen_real = self.all_centroids(state)?;
        let energy = evaluate(
            &self.sequence,
            state.ca_real(),
            state.centroids_real(),
            self.tables,
            &self.params.energy,
        )?;
        Ok(Conformation {
            sequence: self.sequence.clone(),
            chain: state.chain().to_vec(),
            ca: state.ca().to_vec(),
            centroids: cen_real.iter().map(|&c| quantize(c)).collect(),
            ca_real: state.ca_real().to_vec(),
            centroids_real: cen_real,
            energy,
        })
    }
}
