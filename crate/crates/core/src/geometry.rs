//! 3D primitives for the Cα/centroid model: vectors, rotations, bend and
//! torsion angles, optimal superposition and centroid placement.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this length a difference vector is treated as zero.
const DEGENERATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > DEGENERATE_EPS).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    /// Rounds every component to the nearest 1/1000 (the text precision of
    /// the fragment database).
    pub fn quantize_milli(self) -> Vec3 {
        let q = |v: f64| (v * 1000.0).round() / 1000.0 + 0.0;
        Vec3::new(q(self.x), q(self.y), q(self.z))
    }

    fn to_na(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    fn from_na(v: Vector3<f64>) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Mean of a nonempty point set.
pub fn centroid_of(points: &[Vec3]) -> Vec3 {
    let sum = points.iter().fold(Vec3::ZERO, |acc, &p| acc + p);
    sum / points.len() as f64
}

/// A 3×3 rotation matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rot3(pub [[f64; 3]; 3]);

impl Default for Rot3 {
    fn default() -> Self {
        Rot3::IDENTITY
    }
}

impl Rot3 {
    pub const IDENTITY: Rot3 = Rot3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Matrix product `self × rhs`.
    pub fn compose(&self, rhs: &Rot3) -> Rot3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Rot3(out)
    }

    pub fn transpose(&self) -> Rot3 {
        let m = &self.0;
        Rot3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        self.to_na().determinant()
    }

    /// ‖RᵀR − I‖∞ (largest entry magnitude).
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose().compose(self);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.0[i][j] - target).abs());
            }
        }
        worst
    }

    /// Nearest proper rotation in the Frobenius sense (polar decomposition).
    pub fn orthonormalized(&self) -> Rot3 {
        let svd = self.to_na().svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            // The smallest singular direction absorbs the reflection.
            let idx = smallest_index(&svd.singular_values);
            let mut u2 = u;
            for row in 0..3 {
                u2[(row, idx)] = -u2[(row, idx)];
            }
            r = u2 * v_t;
        }
        Rot3::from_na(r)
    }

    /// Entries scaled by 1000 and rounded, the storage form of link matrices.
    pub fn to_milli(&self) -> [i32; 9] {
        let mut out = [0; 9];
        for i in 0..3 {
            for j in 0..3 {
                out[i * 3 + j] = (self.0[i][j] * 1000.0).round() as i32;
            }
        }
        out
    }

    /// Inverse of [`Rot3::to_milli`] followed by projection back onto SO(3).
    pub fn from_milli(m: &[i32; 9]) -> Rot3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = m[i * 3 + j] as f64 / 1000.0;
            }
        }
        Rot3(out).orthonormalized()
    }

    /// Rotation by `angle` radians about a unit `axis` (right-hand rule).
    pub fn about_axis(axis: Vec3, angle: f64) -> Rot3 {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let Vec3 { x, y, z } = axis;
        Rot3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Z-Y-Z Euler angles in radians.
    pub fn from_euler_zyz(alpha: f64, beta: f64, gamma: f64) -> Rot3 {
        let z = Vec3::new(0.0, 0.0, 1.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        Rot3::about_axis(z, alpha)
            .compose(&Rot3::about_axis(y, beta))
            .compose(&Rot3::about_axis(z, gamma))
    }

    /// Rotation angle in radians (distance from the identity on SO(3)).
    pub fn angle(&self) -> f64 {
        let tr = self.0[0][0] + self.0[1][1] + self.0[2][2];
        ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }

    fn to_na(self) -> Matrix3<f64> {
        let m = &self.0;
        Matrix3::new(
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        )
    }

    fn from_na(m: Matrix3<f64>) -> Rot3 {
        Rot3([
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ])
    }
}

fn smallest_index(v: &Vector3<f64>) -> usize {
    let mut idx = 0;
    for i in 1..3 {
        if v[i] < v[idx] {
            idx = i;
        }
    }
    idx
}

fn degenerate(msg: &str) -> Error {
    Error::Geometry(msg.to_string())
}

/// Angle at vertex `b` between rays b→a and b→c, in degrees.
pub fn bend_angle(a: Vec3, b: Vec3, c: Vec3) -> Result<f64> {
    let u = (a - b)
        .normalized()
        .ok_or_else(|| degenerate("bend angle: coincident points"))?;
    let v = (c - b)
        .normalized()
        .ok_or_else(|| degenerate("bend angle: coincident points"))?;
    Ok(u.dot(v).clamp(-1.0, 1.0).acos().to_degrees())
}

/// Signed dihedral a1-a2-a3-a4 in degrees, range (−180, 180].
///
/// Built from the plane normals n1 = (a3−a2)×(a2−a1) and n2 = (a4−a3)×(a3−a2).
/// The sign follows the IUPAC convention: positive when, looking down a2→a3,
/// the near bond a2–a1 turns clockwise onto the far bond a3–a4. A right-handed
/// α-helix has a Cα pseudo-torsion near +50°.
pub fn torsion_angle(a1: Vec3, a2: Vec3, a3: Vec3, a4: Vec3) -> Result<f64> {
    let b2 = a3 - a2;
    let n1 = b2.cross(a2 - a1);
    let n2 = (a4 - a3).cross(b2);
    let axis = b2
        .normalized()
        .ok_or_else(|| degenerate("torsion angle: coincident axis points"))?;
    if n1.norm() <= DEGENERATE_EPS || n2.norm() <= DEGENERATE_EPS {
        return Err(degenerate("torsion angle: collinear triple"));
    }
    let deg = n1.cross(n2).dot(axis).atan2(n1.dot(n2)).to_degrees();
    Ok(if deg <= -180.0 { 180.0 } else { deg })
}

/// Result of an optimal rigid superposition: `rotation · q + translation ≈ p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superposition {
    pub rotation: Rot3,
    pub translation: Vec3,
    pub rmsd: f64,
    /// Set when the optimum is not unique (rank-deficient covariance). The
    /// rotation is then the smallest-angle one among the optimal set.
    pub ambiguous: bool,
}

impl Superposition {
    pub fn apply(&self, q: Vec3) -> Vec3 {
        self.rotation.apply(q) + self.translation
    }
}

/// Kabsch superposition of `q` onto `p` with reflection correction.
pub fn superpose(p: &[Vec3], q: &[Vec3]) -> Result<Superposition> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "superpose: size mismatch ({} vs {})",
            p.len(),
            q.len()
        )));
    }
    if p.len() < 3 {
        return Err(Error::InvalidInput(
            "superpose: at least 3 points required".into(),
        ));
    }
    if p.iter().chain(q).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "superpose: non-finite coordinate".into(),
        ));
    }
    let pc = centroid_of(p);
    let qc = centroid_of(q);
    let mut h = Matrix3::zeros();
    for (&pi, &qi) in p.iter().zip(q) {
        h += (qi - qc).to_na() * (pi - pc).to_na().transpose();
    }
    let scale = p
        .iter()
        .chain(q)
        .map(|v| (*v - pc).norm_sq().max((*v - qc).norm_sq()))
        .fold(0.0, f64::max)
        .max(1.0);

    let svd = h.svd(true, true);
    let mut s: Vec<(f64, usize)> = (0..3).map(|i| (svd.singular_values[i], i)).collect();
    s.sort_by(|a, b| b.0.total_cmp(&a.0));
    let rank_tol = 1e-10 * scale * p.len() as f64;

    let (rotation, ambiguous) = if s[0].0 <= rank_tol {
        (Rot3::IDENTITY, true)
    } else if s[1].0 <= rank_tol {
        // Rank one: any rotation carrying the dominant Q direction onto the
        // dominant P direction is optimal; take the shortest arc.
        let u = svd.u.unwrap().column(s[0].1).into_owned();
        let v = svd.v_t.unwrap().row(s[0].1).transpose();
        (shortest_arc(Vec3::from_na(u), Vec3::from_na(v)), true)
    } else {
        let u = svd.u.unwrap();
        let v = svd.v_t.unwrap().transpose();
        let mut r = v * u.transpose();
        if r.determinant() < 0.0 {
            let k = s[2].1;
            let mut v2 = v;
            for row in 0..3 {
                v2[(row, k)] = -v2[(row, k)];
            }
            r = v2 * u.transpose();
        }
        (Rot3::from_na(r), false)
    };

    let translation = pc - rotation.apply(qc);
    let sum_sq: f64 = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| (rotation.apply(qi) + translation - pi).norm_sq())
        .sum();
    Ok(Superposition {
        rotation,
        translation,
        rmsd: (sum_sq / p.len() as f64).sqrt(),
        ambiguous,
    })
}

/// Smallest rotation carrying unit vector `from` onto unit vector `to`.
fn shortest_arc(from: Vec3, to: Vec3) -> Rot3 {
    let cos = from.dot(to).clamp(-1.0, 1.0);
    match from.cross(to).normalized() {
        Some(axis) => Rot3::about_axis(axis, cos.acos()),
        None if cos > 0.0 => Rot3::IDENTITY,
        None => {
            let helper = if from.x.abs() < 0.9 {
                Vec3::new(1.0, 0.0, 0.0)
            } else {
                Vec3::new(0.0, 1.0, 0.0)
            };
            let axis = from.cross(helper).normalized().unwrap();
            Rot3::about_axis(axis, std::f64::consts::PI)
        }
    }
}

/// RMSD after optimal superposition.
pub fn rmsd(p: &[Vec3], q: &[Vec3]) -> Result<f64> {
    superpose(p, q).map(|s| s.rmsd)
}

/// Internal coordinates of a side-chain centroid relative to its Cα frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentroidParams {
    /// Cα–centroid distance in Å. Zero means the centroid sits on the Cα.
    pub distance: f64,
    /// Angle centroid–Cαᵢ–Cαᵢ₊₁ in degrees.
    pub bend: f64,
    /// Torsion Cαᵢ₋₁–Cαᵢ–Cαᵢ₊₁–centroid in degrees.
    pub torsion: f64,
}

impl CentroidParams {
    pub fn new(distance: f64, bend: f64, torsion: f64) -> Self {
        CentroidParams {
            distance,
            bend,
            torsion,
        }
    }

    /// Measures the parameters of `centroid` in the frame of (prev, cur, next).
    pub fn measure(prev: Vec3, cur: Vec3, next: Vec3, centroid: Vec3) -> Result<Self> {
        Ok(CentroidParams {
            distance: centroid.distance(cur),
            bend: bend_angle(centroid, cur, next)?,
            torsion: torsion_angle(prev, cur, next, centroid)?,
        })
    }
}

/// Places a centroid from three consecutive Cα positions so that measuring it
/// back reproduces `geom`.
pub fn place_centroid(prev: Vec3, cur: Vec3, next: Vec3, geom: &CentroidParams) -> Result<Vec3> {
    let u = (next - cur)
        .normalized()
        .ok_or_else(|| degenerate("centroid frame: coincident points"))?;
    let back = prev - cur;
    let w = (back - u * back.dot(u))
        .normalized()
        .ok_or_else(|| degenerate("centroid frame: collinear reference triple"))?;
    if geom.distance == 0.0 {
        return Ok(cur);
    }
    let v = u.cross(w);
    let (sb, cb) = geom.bend.to_radians().sin_cos();
    let (st, ct) = geom.torsion.to_radians().sin_cos();
    Ok(cur + (u * cb + (w * ct + v * st) * sb) * geom.distance)
}

/// Cα positions of an ideal chain with uniform spacing, bend and torsion.
/// The first three points lie in the xy-plane starting at the origin.
pub fn ideal_chain(n: usize, spacing: f64, bend_deg: f64, torsion_deg: f64) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(n);
    if n == 0 {
        return pts;
    }
    pts.push(Vec3::ZERO);
    if n > 1 {
        pts.push(Vec3::new(spacing, 0.0, 0.0));
    }
    if n > 2 {
        let t = (180.0 - bend_deg).to_radians();
        pts.push(pts[1] + Vec3::new(t.cos(), t.sin(), 0.0) * spacing);
    }
    for i in 3..n {
        pts.push(extend_chain(
            pts[i - 3],
            pts[i - 2],
            pts[i - 1],
            spacing,
            bend_deg,
            torsion_deg,
        ));
    }
    pts
}

/// Next chain point after (a, b, c) with |d−c| = spacing, angle b-c-d = bend
/// and torsion a-b-c-d = torsion.
pub fn extend_chain(
    a: Vec3,
    b: Vec3,
    c: Vec3,
    spacing: f64,
    bend_deg: f64,
    torsion_deg: f64,
) -> Vec3 {
    let bc = (c - b).normalized().expect("distinct chain points");
    let n = (b - a).cross(bc).normalized().expect("non-collinear chain");
    let m = n.cross(bc);
    let (sb, cb) = (180.0 - bend_deg).to_radians().sin_cos();
    let (st, ct) = torsion_deg.to_radians().sin_cos();
    let local = Vec3::new(cb, sb * ct, sb * st);
    c + (bc * local.x + m * local.y + n * local.z) * spacing
}

/// Rigid transform placing the first point at the origin, the second on +x
/// and the third in the y ≥ 0 half of the xy-plane.
pub fn canonical_frame(a: Vec3, b: Vec3, c: Vec3) -> Result<(Rot3, Vec3)> {
    let ex = (b - a)
        .normalized()
        .ok_or_else(|| degenerate("canonical frame: coincident points"))?;
    let ac = c - a;
    let ey = (ac - ex * ac.dot(ex))
        .normalized()
        .ok_or_else(|| degenerate("canonical frame: collinear points"))?;
    let ez = ex.cross(ey);
    let rot = Rot3([ex.to_array(), ey.to_array(), ez.to_array()]);
    let shift = -rot.apply(a);
    Ok((rot, shift))
}
