use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::fragdb::{AminoAcid, CentroidGeometry, FragmentDatabase, FragmentTemplate, TemplateId};
use crate::geometry::{bend_angle, extend_chain, torsion_angle, Rot3, Vec3};
use crate::model::constraints::{quantize, IPoint};

/// Incremental coordinates of a partially assigned template chain.
///
/// Positions are computed in double precision (the real shadow) and each
/// integer coordinate is the shadow rounded half away from zero, so integer
/// and real pipelines never drift apart by more than half a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementState {
    n: usize,
    ca: Vec<Vec3>,
    ca_i: Vec<IPoint>,
    cen: Vec<Option<Vec3>>,
    cen_i: Vec<Option<IPoint>>,
    /// Per placed window: basis R_k and shift s_k mapping template-local
    /// coordinates to the global frame.
    frames: Vec<(Rot3, Vec3)>,
    chain: Vec<TemplateId>,
    reortho_every: usize,
}

/// What one placement added, for incremental checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Added {
    pub first_ca: usize,
    pub first_centroid: usize,
}

impl PlacementState {
    pub fn new(n: usize, reortho_every: usize) -> Self {
        PlacementState {
            n,
            ca: Vec::with_capacity(n),
            ca_i: Vec::with_capacity(n),
            cen: vec![None; n],
            cen_i: vec![None; n],
            frames: Vec::with_capacity(n.saturating_sub(3)),
            chain: Vec::with_capacity(n.saturating_sub(3)),
            reortho_every: reortho_every.max(1),
        }
    }

    pub fn windows(&self) -> usize {
        self.frames.len()
    }

    pub fn is_complete(&self) -> bool {
        self.frames.len() + 3 == self.n
    }

    pub fn chain(&self) -> &[TemplateId] {
        &self.chain
    }

    pub fn ca(&self) -> &[IPoint] {
        &self.ca_i
    }

    pub fn ca_real(&self) -> &[Vec3] {
        &self.ca
    }

    pub fn centroids(&self) -> &[Option<IPoint>] {
        &self.cen_i
    }

    pub fn centroids_real(&self) -> &[Option<Vec3>] {
        &self.cen
    }

    /// Basis of window `k` (real shadow).
    pub fn frame(&self, k: usize) -> &Rot3 {
        &self.frames[k].0
    }

    /// Places window `k = windows()` with `template`. For k ≥ 1 the basis is
    /// R_k = R_{k−1}·M with M the rotation of next(prev, template); then
    /// s = P_{k+2} − R_k·V₃ and P_{k+3} = s + R_k·V₄. The centroid of
    /// residue k+1 (and of k+2 on the last window) comes from the template's
    /// list for the actual residue type, mapped by (R_k, s).
    pub fn push(
        &mut self,
        seq: &[AminoAcid],
        db: &FragmentDatabase,
        template: &FragmentTemplate,
    ) -> Result<Added> {
        let k = self.frames.len();
        if k + 3 >= self.n {
            return Err(Error::InvalidInput("all windows already placed".into()));
        }
        let added = Added {
            first_ca: self.ca.len(),
            first_centroid: k + 1,
        };
        let (rot, shift) = if k == 0 {
            for &v in &template.ca {
                self.push_ca(v);
            }
            (Rot3::IDENTITY, Vec3::ZERO)
        } else {
            let prev = self.chain[k - 1];
            let m = db.link(prev, template.id).ok_or_else(|| {
                Error::InvalidInput(format!("no next link {prev} -> {}", template.id))
            })?;
            let mut rot = self.frames[k - 1].0.compose(m);
            if k % self.reortho_every == 0 {
                rot = rot.orthonormalized();
            }
            let shift = self.ca[k + 2] - rot.apply(template.ca[2]);
            self.push_ca(shift + rot.apply(template.ca[3]));
            (rot, shift)
        };
        let geometry = db.geometry();
        self.set_centroid(
            k + 1,
            rot.apply(template.centroid(1, seq[k + 1], geometry)) + shift,
        );
        if k + 4 == self.n {
            self.set_centroid(
                k + 2,
                rot.apply(template.centroid(2, seq[k + 2], geometry)) + shift,
            );
        }
        self.frames.push((rot, shift));
        self.chain.push(template.id);
        Ok(added)
    }

    /// Undoes the last `push`.
    pub fn pop(&mut self) {
        let Some(_) = self.frames.pop() else { return };
        self.chain.pop();
        let k = self.frames.len();
        if k + 4 == self.n {
            self.cen[k + 2] = None;
            self.cen_i[k + 2] = None;
        }
        self.cen[k + 1] = None;
        self.cen_i[k + 1] = None;
        let keep = if k == 0 { 0 } else { k + 3 };
        self.ca.truncate(keep);
        self.ca_i.truncate(keep);
    }

    /// Keeps the first `windows` placed windows.
    pub fn truncate(&mut self, windows: usize) {
        while self.frames.len() > windows {
            self.pop();
        }
    }

    fn push_ca(&mut self, v: Vec3) {
        self.ca.push(v);
        self.ca_i.push(quantize(v));
    }

    fn set_centroid(&mut self, i: usize, v: Vec3) {
        self.cen[i] = Some(v);
        self.cen_i[i] = Some(quantize(v));
    }
}

/// Centroids for the two chain ends, which no window covers as an interior
/// position. A virtual Cα is added beyond each end by continuing the chain
/// with the bend and torsion of the nearest window, and the residue's own
/// centroid geometry is applied on that frame.
pub fn terminal_centroids(
    seq: &[AminoAcid],
    ca: &[Vec3],
    geometry: &CentroidGeometry,
) -> Result<(Vec3, Vec3)> {
    let n = ca.len();
    if n < 4 || seq.len() != n {
        return Err(Error::InvalidInput(
            "terminal centroids need a complete chain of ≥ 4 residues".into(),
        ));
    }
    let spacing = ca[0].distance(ca[1]);
    let bend = bend_angle(ca[0], ca[1], ca[2])?;
    let tors = torsion_angle(ca[0], ca[1], ca[2], ca[3])?;
    let before = extend_chain(ca[2], ca[1], ca[0], spacing, bend, tors);
    let first = geometry.place(seq[0], before, ca[0], ca[1])?;

    let spacing = ca[n - 1].distance(ca[n - 2]);
    let bend = bend_angle(ca[n - 3], ca[n - 2], ca[n - 1])?;
    let tors = torsion_angle(ca[n - 4], ca[n - 3], ca[n - 2], ca[n - 1])?;
    let after = extend_chain(ca[n - 3], ca[n - 2], ca[n - 1], spacing, bend, tors);
    // the virtual successor plays the role of "next", the real predecessor "prev"
    let last = geometry.place(seq[n - 1], ca[n - 2], ca[n - 1], after)?;
    Ok((first, last))
}

/// A complete solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conformation {
    pub sequence: Vec<AminoAcid>,
    pub chain: Vec<TemplateId>,
    /// Cα coordinates, centi-Å.
    pub ca: Vec<IPoint>,
    /// Centroids of all residues, centi-Å; the two ends are post-processed.
    pub centroids: Vec<IPoint>,
    pub ca_real: Vec<Vec3>,
    pub centroids_real: Vec<Vec3>,
    pub energy: EnergyBreakdown,
}

impl Conformation {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Cα in Å as stored (from the integer coordinates).
    pub fn ca_angstrom(&self) -> Vec<Vec3> {
        self.ca
            .iter()
            .map(|p| {
                Vec3::new(
                    p[0] as f64 / 100.0,
                    p[1] as f64 / 100.0,
                    p[2] as f64 / 100.0,
                )
            })
            .collect()
    }
}
