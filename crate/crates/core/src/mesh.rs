//! Structured polar triangulation of the unit disk.
//!
//! The mesh is a tensor product of an angular node set (shared by every
//! ring) and a radial node set, closed at the origin by a fan. Every
//! junction angle of the boundary partition is an angular node, and
//! junctions are resolved by graded zones in both directions.
//!
//! Quad cells between rings are split by a diagonal whose direction
//! alternates with the sector index counted from θ = 0. Since 0 and π are
//! always nodes, the triangulation (not just the vertex set) is mapped
//! onto itself by any reflection that preserves the angular node set.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Angle, Boundary, Condition};

const TWO_PI: f64 = 2.0 * PI;

/// Upper bound on the vertex count of a single mesh.
pub const MAX_VERTICES: usize = 2_000_000;

/// Largest accepted number of grading levels.
pub const MAX_GRADING_LEVELS: usize = 12;

pub const DEFAULT_GRADING_RATIO: f64 = 0.5;
pub const DEFAULT_GRADING_LEVELS: usize = 6;

/// Node angles closer than this are merged.
const NODE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh would need {needed} vertices (cap {cap})")]
    TooLarge { needed: usize, cap: usize },
    #[error("symmetrization produced a sector of {min_sector:.3e} rad; lower grading_levels")]
    IncompatibleGrading { min_sector: f64 },
}

/// Condition carried by a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub label: EdgeLabel,
    /// Index of the Dirichlet arc or Neumann gap the edge lies in, in the
    /// order the labels occur counterclockwise from θ = 0.
    pub arc_id: usize,
}

#[derive(Clone, Debug)]
pub struct MeshParams {
    /// Nominal element size; rings are `1/⌈1/h⌉` apart.
    pub h: f64,
    pub grading_levels: usize,
    pub grading_ratio: f64,
    /// Angles that must be mesh nodes in addition to the partition
    /// junctions. They are graded like junctions.
    pub extra_angles: Vec<Angle>,
}

impl MeshParams {
    pub fn new(h: f64, grading_levels: usize) -> MeshParams {
        MeshParams {
            h,
            grading_levels,
            grading_ratio: DEFAULT_GRADING_RATIO,
            extra_angles: Vec::new(),
        }
    }

    pub fn with_extra_angles(mut self, angles: impl IntoIterator<Item = Angle>) -> MeshParams {
        self.extra_angles.extend(angles);
        self
    }

    fn validate(&self) -> Result<(), MeshError> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(MeshError::InvalidParameter(format!("h = {} outside (0, 1]", self.h)));
        }
        if self.grading_levels > MAX_GRADING_LEVELS {
            return Err(MeshError::InvalidParameter(format!(
                "grading_levels = {} exceeds {MAX_GRADING_LEVELS}",
                self.grading_levels
            )));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(MeshError::InvalidParameter(format!(
                "grading_ratio = {} outside (0, 1)",
                self.grading_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DiskMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    junction_vertices: Vec<usize>,
    /// Condition at each boundary node, indexed by sector.
    boundary_conditions: Vec<Condition>,
    angles: Vec<f64>,
    radii: Vec<f64>,
    boundary: Boundary,
    params: MeshParams,
}

/// Builds the polar mesh for `boundary`.
pub fn triangulate(boundary: &Boundary, params: &MeshParams) -> Result<DiskMesh, MeshError> {
    params.validate()?;
    let mut graded: Vec<f64> = boundary
        .junctions()
        .into_iter()
        .chain(params.extra_angles.iter().copied())
        .map(|a| a.normalized().to_radians())
        .collect();
    graded.sort_by(f64::total_cmp);
    dedup_angles(&mut graded);

    let angles = angular_nodes(&graded, params);
    let radii = radial_nodes(params, !graded.is_empty());
    build(boundary.clone(), params.clone(), angles, radii)
}

/// Returns a mesh whose vertex set is invariant under rotation by `2π/n`
/// and reflection across the x-axis. The angular node set is replaced by
/// its orbit under that dihedral group; the radial nodes are kept.
pub fn symmetrize_angular(mesh: &DiskMesh, n: usize) -> Result<DiskMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter("n must be positive".into()));
    }
    let period = TWO_PI / n as f64;
    let half = period / 2.0;
    let mut reps: Vec<f64> = mesh
        .angles
        .iter()
        .copied()
        .chain([0.0, PI])
        .map(|t| {
            let r = t.rem_euclid(period);
            let r = if r > half { period - r } else { r };
            r.clamp(0.0, half)
        })
        .collect();
    reps.sort_by(f64::total_cmp);
    dedup_angles(&mut reps);
    // Snap representatives that sit on the fundamental-domain edges.
    for r in reps.iter_mut() {
        if r.abs() < NODE_TOL {
            *r = 0.0;
        } else if (*r - half).abs() < NODE_TOL {
            *r = half;
        }
    }

    let mut angles = Vec::with_capacity(2 * n * reps.len());
    for k in 0..n {
        let base = period * k as f64;
        for &r in &reps {
            angles.push(base + r);
            angles.push(base - r);
        }
    }
    for a in angles.iter_mut() {
        *a = a.rem_euclid(TWO_PI);
        if *a >= TWO_PI - NODE_TOL {
            *a = 0.0;
        }
    }
    angles.sort_by(f64::total_cmp);
    dedup_angles(&mut angles);

    let min_before = min_gap(&mesh.angles);
    let min_after = min_gap(&angles);
    if min_after < 0.25 * min_before {
        return Err(MeshError::IncompatibleGrading {
            min_sector: min_after,
        });
    }
    build(
        mesh.boundary.clone(),
        mesh.params.clone(),
        angles,
        mesh.radii.clone(),
    )
}

fn min_gap(angles: &[f64]) -> f64 {
    let n = angles.len();
    (0..n)
        .map(|j| {
            let next = if j + 1 < n { angles[j + 1] } else { angles[0] + TWO_PI };
            next - angles[j]
        })
        .fold(f64::INFINITY, f64::min)
}

fn dedup_angles(v: &mut Vec<f64>) {
    v.dedup_by(|b, a| (*b - *a).abs() < NODE_TOL);
    if v.len() > 1 && (v[0] + TWO_PI - v[v.len() - 1]).abs() < NODE_TOL {
        v.pop();
    }
}

/// Width of the graded zone on each side of a junction, angularly and
/// radially. Fixed in physical units so refinement in `h` keeps the
/// grading profile.
pub const GRADING_ZONE: f64 = 0.25;

/// Offsets in `(0, w)` from a junction. The zone is split into `L`
/// geometric layers `[w·rᵏ⁺¹, w·rᵏ]` plus a core `[0, w·rᴸ]`; layer `k`
/// uses elements of size at most `h·rᵏᐟ²`, so element size scales like
/// `h·√(distance/w)`, the radical profile that suits an `r^{1/2}`
/// singularity. `L` is `grading_levels`, raised until the core is below
/// `h²/w`; a fixed core would leave an O(h) error.
fn graded_offsets(w: f64, params: &MeshParams) -> Vec<f64> {
    let r = params.grading_ratio;
    let needed = ((params.h * params.h / (w * w)).ln() / r.ln()).ceil().max(0.0) as usize;
    let levels = params.grading_levels.max(needed).min(MAX_GRADING_LEVELS + 8) as i32;
    let mut out = Vec::new();
    let split = |out: &mut Vec<f64>, a: f64, b: f64, size: f64| {
        let m = (((b - a) / size) - 1e-9).ceil().max(1.0) as usize;
        out.extend((1..m).map(|q| a + (b - a) * q as f64 / m as f64));
    };
    split(&mut out, 0.0, w * r.powi(levels), params.h * r.powf(0.5 * levels as f64));
    for k in (0..levels).rev() {
        let (a, b) = (w * r.powi(k + 1), w * r.powi(k));
        out.push(a);
        split(&mut out, a, b, params.h * r.powf(0.5 * k as f64));
    }
    out
}

/// Angular nodes: `graded` junctions plus 0 and π split the circle into
/// segments. Ends of a segment at a graded junction get a graded zone;
/// the rest is divided into `⌈len/h⌉` equal pieces.
fn angular_nodes(graded: &[f64], params: &MeshParams) -> Vec<f64> {
    let mut required: Vec<f64> = graded.iter().copied().chain([0.0, PI]).collect();
    required.sort_by(f64::total_cmp);
    dedup_angles(&mut required);
    let is_graded = |t: f64| {
        params.grading_levels > 0
            && graded.iter().any(|&g| {
                let d = (t - g).rem_euclid(TWO_PI);
                d < NODE_TOL || TWO_PI - d < NODE_TOL
            })
    };

    let mut nodes = Vec::new();
    let count = required.len();
    for i in 0..count {
        let t0 = required[i];
        let t1 = if i + 1 < count { required[i + 1] } else { required[0] + TWO_PI };
        let len = t1 - t0;
        let (g0, g1) = (is_graded(t0), is_graded(t1));
        let w = match (g0, g1) {
            (true, true) => GRADING_ZONE.min(0.5 * len),
            (true, false) | (false, true) => GRADING_ZONE.min(len),
            _ => 0.0,
        };
        let (a, b) = (t0 + if g0 { w } else { 0.0 }, t1 - if g1 { w } else { 0.0 });
        nodes.push(t0);
        if g0 {
            nodes.extend(graded_offsets(w, params).into_iter().map(|d| t0 + d));
            nodes.push(a);
        }
        if g1 {
            nodes.extend(graded_offsets(w, params).into_iter().map(|d| t1 - d));
            nodes.push(b);
        }
        if b - a > NODE_TOL {
            let m = (((b - a) / params.h) - 1e-9).ceil().max(1.0) as usize;
            nodes.extend((1..m).map(|q| a + (b - a) * q as f64 / m as f64));
        }
    }
    for a in nodes.iter_mut() {
        if *a >= TWO_PI {
            *a -= TWO_PI;
        }
    }
    nodes.sort_by(f64::total_cmp);
    dedup_angles(&mut nodes);
    nodes
}

fn radial_nodes(params: &MeshParams, has_junctions: bool) -> Vec<f64> {
    if !has_junctions || params.grading_levels == 0 {
        let rings = ((1.0 / params.h) - 1e-9).ceil().max(1.0) as usize;
        let dr = 1.0 / rings as f64;
        let mut radii: Vec<f64> = (1..=rings).map(|i| i as f64 * dr).collect();
        *radii.last_mut().unwrap() = 1.0;
        return radii;
    }
    let inner = 1.0 - GRADING_ZONE;
    let rings = ((inner / params.h) - 1e-9).ceil().max(1.0) as usize;
    let mut radii: Vec<f64> = (1..=rings).map(|i| inner * i as f64 / rings as f64).collect();
    let mut zone: Vec<f64> = graded_offsets(GRADING_ZONE, params).into_iter().map(|d| 1.0 - d).collect();
    zone.reverse();
    radii.extend(zone);
    radii.push(1.0);
    radii
}

fn build(
    boundary: Boundary,
    params: MeshParams,
    angles: Vec<f64>,
    radii: Vec<f64>,
) -> Result<DiskMesh, MeshError> {
    let na = angles.len();
    let nr = radii.len();
    let needed = 1 + na * nr;
    if needed > MAX_VERTICES {
        return Err(MeshError::TooLarge {
            needed,
            cap: MAX_VERTICES,
        });
    }

    let sin_cos: Vec<(f64, f64)> = angles.iter().map(|t| t.sin_cos()).collect();
    let mut vertices = Vec::with_capacity(needed);
    vertices.push([0.0, 0.0]);
    for &r in &radii {
        for &(s, c) in &sin_cos {
            vertices.push([r * c, r * s]);
        }
    }
    let v = |ring: usize, sector: usize| 1 + ring * na + sector % na;

    let mut triangles = Vec::with_capacity(na * (2 * nr - 1));
    for j in 0..na {
        triangles.push([0, v(0, j), v(0, j + 1)]);
    }
    for i in 0..nr - 1 {
        for j in 0..na {
            let (a, b) = (v(i, j), v(i, j + 1));
            let (c, d) = (v(i + 1, j), v(i + 1, j + 1));
            if j % 2 == 0 {
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            } else {
                triangles.push([a, c, b]);
                triangles.push([c, d, b]);
            }
        }
    }

    let boundary_conditions: Vec<Condition> = angles
        .iter()
        .map(|&t| boundary.classify(Angle::radians(t)))
        .collect();
    let junction_vertices = (0..na)
        .filter(|&j| boundary_conditions[j] == Condition::Endpoint)
        .map(|j| v(nr - 1, j))
        .collect();

    let mut boundary_edges = Vec::with_capacity(na);
    let mut arc_id = 0;
    let mut prev: Option<EdgeLabel> = None;
    for j in 0..na {
        let t0 = angles[j];
        let t1 = if j + 1 < na { angles[j + 1] } else { angles[0] + TWO_PI };
        let label = match boundary.classify(Angle::radians(0.5 * (t0 + t1))) {
            Condition::Neumann => EdgeLabel::Neumann,
            _ => EdgeLabel::Dirichlet,
        };
        if let Some(p) = prev {
            if p != label {
                arc_id += 1;
            }
        }
        prev = Some(label);
        boundary_edges.push(BoundaryEdge {
            vertices: [v(nr - 1, j), v(nr - 1, j + 1)],
            label,
            arc_id,
        });
    }
    // The run crossing θ = 0 is one arc or gap.
    if na > 1 && arc_id > 0 && boundary_edges[0].label == boundary_edges[na - 1].label {
        let last = arc_id;
        for e in boundary_edges.iter_mut().filter(|e| e.arc_id == last) {
            e.arc_id = 0;
        }
    }

    Ok(DiskMesh {
        vertices,
        triangles,
        boundary_edges,
        junction_vertices,
        boundary_conditions,
        angles,
        radii,
        boundary,
        params,
    })
}

impl DiskMesh {
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn junction_vertices(&self) -> &[usize] {
        &self.junction_vertices
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn params(&self) -> &MeshParams {
        &self.params
    }

    pub fn h(&self) -> f64 {
        self.params.h
    }

    pub fn grading_ratio(&self) -> f64 {
        self.params.grading_ratio
    }

    /// Angular node set shared by every ring, sorted in `[0, 2π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vertex index at `ring` (0 = innermost) and angular `sector`.
    pub fn vertex_at(&self, ring: usize, sector: usize) -> usize {
        1 + ring * self.angles.len() + sector % self.angles.len()
    }

    /// `(ring, sector)` of a vertex, `None` for the centre.
    pub fn polar_index(&self, vertex: usize) -> Option<(usize, usize)> {
        if vertex == 0 {
            None
        } else {
            let na = self.angles.len();
            Some(((vertex - 1) / na, (vertex - 1) % na))
        }
    }

    pub fn is_boundary_vertex(&self, vertex: usize) -> bool {
        matches!(self.polar_index(vertex), Some((r, _)) if r + 1 == self.radii.len())
    }

    /// Boundary vertices in counterclockwise order from θ = 0.
    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        let ring = self.radii.len() - 1;
        (0..self.angles.len()).map(move |j| self.vertex_at(ring, j))
    }

    /// Condition at a boundary vertex; `None` for interior vertices.
    pub fn boundary_condition(&self, vertex: usize) -> Option<Condition> {
        if self.is_boundary_vertex(vertex) {
            self.polar_index(vertex).map(|(_, j)| self.boundary_conditions[j])
        } else {
            None
        }
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    /// Interior angles of triangle `t`, in degrees.
    pub fn triangle_angles(&self, t: usize) -> [f64; 3] {
        let idx = self.triangles[t];
        let mut out = [0.0; 3];
        for k in 0..3 {
            let p = self.vertices[idx[k]];
            let q = self.vertices[idx[(k + 1) % 3]];
            let r = self.vertices[idx[(k + 2) % 3]];
            let (u, w) = ([q[0] - p[0], q[1] - p[1]], [r[0] - p[0], r[1] - p[1]]);
            let cos = (u[0] * w[0] + u[1] * w[1]) / (u[0].hypot(u[1]) * w[0].hypot(w[1]));
            out[k] = cos.clamp(-1.0, 1.0).acos().to_degrees();
        }
        out
    }

    /// Map `v ↦ σ(v)` for the isometry that sends angle θ to
    /// `sign·θ + shift` (sign = ±1), if it maps the vertex set onto itself.
    pub fn vertex_map(&self, sign: f64, shift: f64) -> Option<Vec<usize>> {
        let na = self.angles.len();
        let mut sector_map = Vec::with_capacity(na);
        for &t in &self.angles {
            let target = (sign * t + shift).rem_euclid(TWO_PI);
            sector_map.push(self.find_angle(target)?);
        }
        let mut map = Vec::with_capacity(self.vertices.len());
        map.push(0);
        for i in 0..self.radii.len() {
            for &s in &sector_map {
                map.push(self.vertex_at(i, s));
            }
        }
        Some(map)
    }

    /// Sector index of the node at angle `t`, within 1e-9 rad.
    pub fn find_angle(&self, t: f64) -> Option<usize> {
        let t = t.rem_euclid(TWO_PI);
        let pos = self.angles.partition_point(|&a| a < t);
        let na = self.angles.len();
        [pos.checked_sub(1), Some(pos % na), Some(0), Some(na - 1)]
            .into_iter()
            .flatten()
            .find(|&j| {
                let d = (self.angles[j] - t).rem_euclid(TWO_PI);
                d < 1e-9 || TWO_PI - d < 1e-9
            })
    }

    /// True when every angular node is `k·2π/N` for the node count `N`.
    pub fn has_uniform_angles(&self) -> bool {
        let n = self.angles.len();
        let step = TWO_PI / n as f64;
        self.angles
            .iter()
            .enumerate()
            .all(|(j, &a)| (a - step * j as f64).abs() < 1e-9)
    }

    /// Gmsh 2.2 ASCII export. Nodes are numbered from 1 in vertex order;
    /// boundary edges are line elements (type 1) with physical tag 1 for
    /// Dirichlet or 2 for Neumann and geometric tag `arc_id + 1`;
    /// triangles are type 2 with tags `0 0`.
    pub fn to_msh(&self) -> String {
        let mut s = String::new();
        s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
        let _ = writeln!(s, "{}", self.vertices.len());
        for (i, p) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "{} {:.16e} {:.16e} 0", i + 1, p[0], p[1]);
        }
        s.push_str("$EndNodes\n$Elements\n");
        let _ = writeln!(s, "{}", self.boundary_edges.len() + self.triangles.len());
        let mut id = 1;
        for e in &self.boundary_edges {
            let phys = match e.label {
                EdgeLabel::Dirichlet => 1,
                EdgeLabel::Neumann => 2,
            };
            let _ = writeln!(
                s,
                "{id} 1 2 {phys} {} {} {}",
                e.arc_id + 1,
                e.vertices[0] + 1,
                e.vertices[1] + 1
            );
            id += 1;
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{id} 2 2 0 0 {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            id += 1;
        }
        s.push_str("$EndElements\n");
        s
    }
}
