//! Nodal structure, x-axis symmetry and the angular rearrangement of
//! eigenfunctions. All vectors here are indexed by mesh vertex, with zeros
//! on eliminated vertices (see [`OperatorPair::extend`]).
//!
//! [`OperatorPair::extend`]: crate::fem::OperatorPair::extend

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::geometry::{Angle, Arc, BoundaryPartition, Condition};
use crate::mesh::{DiskMesh, EdgeLabel};
use crate::sparse::CsrMatrix;

/// Vertices with `|u| ≤ ZERO_THRESHOLD·‖u‖∞` are treated as zero.
pub const ZERO_THRESHOLD: f64 = 1e-9;
/// Relative M-norm distance below which `u` counts as (anti)symmetric.
pub const SYMMETRY_THRESHOLD: f64 = 1e-6;
/// Relative gap `(λ₃ − λ₂)/λ₂` below which λ₂ is treated as double.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("vector is identically zero")]
    ZeroVector,
    #[error("vector length {got} does not match {expected} mesh vertices")]
    LengthMismatch { got: usize, expected: usize },
    #[error("expected two nodal domains, found {0}")]
    DomainCount(usize),
    #[error("mesh is not invariant under the reflection θ ↦ −θ")]
    NonSymmetricMesh,
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Behaviour under the reflection `(x, y) ↦ (x, −y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Symmetric,
    Antisymmetric,
    Neither,
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryClass::Symmetric => "symmetric",
            SymmetryClass::Antisymmetric => "antisymmetric",
            SymmetryClass::Neither => "neither",
        })
    }
}

#[derive(Clone, Debug)]
pub struct NodalReport {
    pub domain_count: usize,
    /// Per vertex: `1`, `-1`, or `0` on eliminated Dirichlet vertices.
    pub vertex_labels: Vec<i8>,
    /// Radians of Neumann boundary on which the function is positive.
    pub neumann_measure_plus: f64,
    pub neumann_measure_minus: f64,
    /// Half the smaller of the two Neumann measures.
    pub beta_u2: f64,
    /// Angles in `[0, 2π)`, ascending, where the nodal line meets ∂B.
    pub nodal_endpoints: Vec<f64>,
    pub is_closed: bool,
    /// Filled in by the caller when the mesh is reflection-invariant.
    pub symmetry_class: Option<SymmetryClass>,
    /// The nodal line ends at a junction vertex, where the measure-based
    /// β_{u₂} is ambiguous.
    pub touches_junction: bool,
    /// Zero level set as straight segments, one per crossed triangle.
    pub nodal_line: Vec<[[f64; 2]; 2]>,
}

impl NodalReport {
    /// Column names of [`NodalReport::csv_fields`].
    pub const CSV_HEADER: &'static str = "domain_count,neumann_plus,neumann_minus,beta_u2,\
        endpoint_count,endpoints,is_closed,symmetry,touches_junction";

    /// One CSV fragment in the order of [`NodalReport::CSV_HEADER`];
    /// endpoint angles are joined with `;`.
    pub fn csv_fields(&self) -> String {
        let endpoints: Vec<String> = self.nodal_endpoints.iter().map(|t| format!("{t:.9}")).collect();
        format!(
            "{},{:.12},{:.12},{:.12},{},{},{},{},{}",
            self.domain_count,
            self.neumann_measure_plus,
            self.neumann_measure_minus,
            self.beta_u2,
            self.nodal_endpoints.len(),
            endpoints.join(";"),
            self.is_closed,
            self.symmetry_class.map_or("na".to_string(), |c| c.to_string()),
            self.touches_junction,
        )
    }
}

fn check_len(mesh: &DiskMesh, u: &[f64]) -> Result<(), AnalysisError> {
    if u.len() != mesh.vertex_count() {
        return Err(AnalysisError::LengthMismatch {
            got: u.len(),
            expected: mesh.vertex_count(),
        });
    }
    Ok(())
}

fn is_eliminated(mesh: &DiskMesh, v: usize, value: f64) -> bool {
    match mesh.boundary_condition(v) {
        Some(Condition::Dirichlet) => true,
        Some(Condition::Endpoint) => value == 0.0,
        _ => false,
    }
}

fn vertex_neighbours(mesh: &DiskMesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.vertex_count()];
    for t in mesh.triangles() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn vertex_angle(mesh: &DiskMesh, v: usize) -> f64 {
    mesh.polar_index(v).map_or(0.0, |(_, s)| mesh.angles()[s])
}

/// Sign labels, nodal domains, Neumann measures and the nodal line of `u`.
///
/// Components of `{u > 0}` for a P1 function are exactly the components of
/// the positive vertices under mesh edges (each triangle's positive part is
/// convex and contains its positive vertices), so domains are counted on
/// the vertex graph.
pub fn nodal_domains(mesh: &DiskMesh, u: &[f64]) -> Result<NodalReport, AnalysisError> {
    check_len(mesh, u)?;
    let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if sup == 0.0 {
        return Err(AnalysisError::ZeroVector);
    }
    let eps = ZERO_THRESHOLD * sup;
    let adj = vertex_neighbours(mesh);
    let nv = mesh.vertex_count();

    let mut labels = vec![0i8; nv];
    let mut undecided = Vec::new();
    for v in 0..nv {
        if is_eliminated(mesh, v, u[v]) {
            continue;
        }
        if u[v] > eps {
            labels[v] = 1;
        } else if u[v] < -eps {
            labels[v] = -1;
        } else {
            undecided.push(v);
        }
    }
    // Near-zero vertices join the side whose strictly signed neighbours are
    // larger in mean magnitude; ties go to '+'.
    let strict = labels.clone();
    for v in undecided {
        let (mut sp, mut np, mut sm, mut nm) = (0.0, 0usize, 0.0, 0usize);
        for &w in &adj[v] {
            match strict[w] {
                1 => {
                    sp += u[w];
                    np += 1;
                }
                -1 => {
                    sm -= u[w];
                    nm += 1;
                }
                _ => {}
            }
        }
        let mp = if np > 0 { sp / np as f64 } else { 0.0 };
        let mm = if nm > 0 { sm / nm as f64 } else { 0.0 };
        labels[v] = if mm > mp { -1 } else { 1 };
    }

    let domain_count = count_components(&labels, &adj);

    let mut plus = 0.0;
    let mut minus = 0.0;
    for e in mesh.boundary_edges() {
        if e.label != EdgeLabel::Neumann {
            continue;
        }
        let [a, b] = e.vertices;
        let span = (vertex_angle(mesh, b) - vertex_angle(mesh, a)).rem_euclid(TAU);
        let (la, lb) = (labels[a], labels[b]);
        let side = |l: i8, len: f64, plus: &mut f64, minus: &mut f64| match l {
            1 => *plus += len,
            -1 => *minus += len,
            _ => {}
        };
        if la == lb || la == 0 || lb == 0 {
            let l = if la != 0 { la } else { lb };
            side(l, span, &mut plus, &mut minus);
        } else {
            let t = crossing(u[a], u[b]);
            side(la, t * span, &mut plus, &mut minus);
            side(lb, (1.0 - t) * span, &mut plus, &mut minus);
        }
    }

    let (nodal_line, endpoint_vertices, endpoint_edges) = extract_nodal_line(mesh, u, &labels);
    let junctions: HashSet<usize> = mesh.junction_vertices().iter().copied().collect();
    let touches_junction = endpoint_vertices.keys().any(|v| junctions.contains(v));
    let mut nodal_endpoints: Vec<f64> = endpoint_vertices
        .values()
        .chain(endpoint_edges.values())
        .map(|p| p[1].atan2(p[0]).rem_euclid(TAU))
        .collect();
    nodal_endpoints.sort_by(f64::total_cmp);

    Ok(NodalReport {
        domain_count,
        vertex_labels: labels,
        neumann_measure_plus: plus,
        neumann_measure_minus: minus,
        beta_u2: plus.min(minus) / 2.0,
        is_closed: nodal_endpoints.is_empty(),
        nodal_endpoints,
        symmetry_class: None,
        touches_junction,
        nodal_line,
    })
}

/// Fraction along `a → b` where the linear interpolant vanishes.
fn crossing(ua: f64, ub: f64) -> f64 {
    let d = ua - ub;
    if d == 0.0 {
        0.5
    } else {
        (ua / d).clamp(0.0, 1.0)
    }
}

fn count_components(labels: &[i8], adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; labels.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..labels.len() {
        if labels[s] == 0 || seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] && labels[w] == labels[s] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

type Point = [f64; 2];

/// Per-triangle zero segments plus the boundary points where they end,
/// keyed by vertex or by boundary edge.
fn extract_nodal_line(
    mesh: &DiskMesh,
    u: &[f64],
    labels: &[i8],
) -> (Vec<[Point; 2]>, BTreeMap<usize, Point>, BTreeMap<(usize, usize), Point>) {
    let verts = mesh.vertices();
    let mut segments = Vec::new();
    let mut at_vertices = BTreeMap::new();
    let mut on_edges = BTreeMap::new();
    for tri in mesh.triangles() {
        let l = tri.map(|v| labels[v]);
        if !(l.contains(&1) && l.contains(&-1)) {
            continue;
        }
        let mut pts: Vec<Point> = Vec::with_capacity(2);
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if labels[a] * labels[b] < 0 {
                let t = crossing(u[a], u[b]);
                let (p, q) = (verts[a], verts[b]);
                let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
                pts.push(x);
                if mesh.is_boundary_vertex(a) && mesh.is_boundary_vertex(b) {
                    on_edges.insert((a.min(b), a.max(b)), x);
                }
            }
        }
        for &v in tri {
            if labels[v] == 0 {
                pts.push(verts[v]);
                at_vertices.insert(v, verts[v]);
            }
        }
        if pts.len() == 2 {
            segments.push([pts[0], pts[1]]);
        }
    }
    (segments, at_vertices, on_edges)
}

/// β_{u₂} of a two-domain report.
pub fn beta_of(report: &NodalReport) -> Result<f64, AnalysisError> {
    if report.domain_count != 2 {
        return Err(AnalysisError::DomainCount(report.domain_count));
    }
    Ok(report.beta_u2)
}

/// True when λ₂ and λ₃ agree to [`DEGENERACY_TOL`] relative.
pub fn is_degenerate(lambda2: f64, lambda3: f64) -> bool {
    (lambda3 - lambda2).abs() <= DEGENERACY_TOL * lambda2.abs().max(1.0)
}

/// Reflection `θ ↦ −θ` as a vertex map, if the mesh (vertices and
/// triangles) is invariant under it.
pub fn reflection_map(mesh: &DiskMesh) -> Option<Vec<usize>> {
    isometry_map(mesh, -1.0, 0.0)
}

/// Vertex map of `θ ↦ sign·θ + shift`, checked to carry triangles onto
/// triangles.
pub fn isometry_map(mesh: &DiskMesh, sign: f64, shift: f64) -> Option<Vec<usize>> {
    let map = mesh.vertex_map(sign, shift)?;
    let key = |t: [usize; 3]| {
        let mut k = t;
        k.sort_unstable();
        k
    };
    let tris: HashSet<[usize; 3]> = mesh.triangles().iter().map(|&t| key(t)).collect();
    mesh.triangles()
        .iter()
        .all(|t| tris.contains(&key(t.map(|v| map[v]))))
        .then_some(map)
}

/// Relative M-norm distances `(‖u − u∘R‖, ‖u + u∘R‖)/‖u‖` for the x-axis
/// reflection `R`.
pub fn symmetry_distances(
    mesh: &DiskMesh,
    mass: &CsrMatrix,
    u: &[f64],
) -> Result<(f64, f64), AnalysisError> {
    check_len(mesh, u)?;
    let map = reflection_map(mesh).ok_or(AnalysisError::NonSymmetricMesh)?;
    let norm = mass.quadratic(u).max(0.0).sqrt();
    if norm == 0.0 {
        return Err(AnalysisError::ZeroVector);
    }
    let pulled: Vec<f64> = map.iter().map(|&w| u[w]).collect();
    let diff: Vec<f64> = u.iter().zip(&pulled).map(|(a, b)| a - b).collect();
    let sum: Vec<f64> = u.iter().zip(&pulled).map(|(a, b)| a + b).collect();
    Ok((
        mass.quadratic(&diff).max(0.0).sqrt() / norm,
        mass.quadratic(&sum).max(0.0).sqrt() / norm,
    ))
}

/// Class of `u` under the x-axis reflection, measured in the mass norm.
pub fn symmetry_class(
    mesh: &DiskMesh,
    mass: &CsrMatrix,
    u: &[f64],
) -> Result<SymmetryClass, AnalysisError> {
    let (d_sym, d_anti) = symmetry_distances(mesh, mass, u)?;
    Ok(if d_sym.min(d_anti) > SYMMETRY_THRESHOLD {
        SymmetryClass::Neither
    } else if d_sym <= d_anti {
        SymmetryClass::Symmetric
    } else {
        SymmetryClass::Antisymmetric
    })
}

/// Parameters of the rearrangement onto a target with at most two arcs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rearrangement {
    pub ell: f64,
    /// Length of the shorter Dirichlet arc (0 for a single arc).
    pub a: f64,
    /// Length of the shorter Neumann gap (0 for a single arc).
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Rearrangement {
    pub fn new(ell: f64, a: f64, b: f64) -> Result<Rearrangement, AnalysisError> {
        if !(ell > 0.0 && ell < TAU) {
            return Err(AnalysisError::Precondition(format!("ell = {ell} outside (0, 2pi)")));
        }
        let tol = 1e-12;
        if !(-tol..=ell / 2.0 + tol).contains(&a) || !(-tol..=(TAU - ell) / 2.0 + tol).contains(&b) {
            return Err(AnalysisError::Precondition(format!(
                "(a, b) = ({a}, {b}) outside [0, ell/2] x [0, (2pi - ell)/2]"
            )));
        }
        Ok(Rearrangement {
            ell,
            a,
            b,
            alpha: (ell / 2.0 - a) / 2.0,
            beta: ((TAU - ell) / 2.0 - b) / 2.0,
        })
    }

    /// Reads `a` and `b` off a partition with one or two arcs.
    pub fn for_target(target: &BoundaryPartition) -> Result<Rearrangement, AnalysisError> {
        let ell = target.dirichlet_measure();
        match target.component_count() {
            1 => Rearrangement::new(ell, 0.0, 0.0),
            2 => {
                let a = target
                    .arcs()
                    .iter()
                    .map(|x| x.length().to_radians())
                    .fold(f64::INFINITY, f64::min);
                let b = target
                    .gaps()
                    .iter()
                    .map(|g| g.to_radians())
                    .fold(f64::INFINITY, f64::min);
                Rearrangement::new(ell, a, b)
            }
            n => Err(AnalysisError::Precondition(format!("target has {n} components"))),
        }
    }

    /// Cut points of the four angular branches, counterclockwise.
    pub fn cuts(&self) -> [f64; 4] {
        let (al, be) = (self.alpha, self.beta);
        [al, PI / 2.0 - be, PI - al, 1.5 * PI + be]
    }

    /// Angular shift applied on the branch starting at each cut:
    /// `ũ(θ) = u(θ + shift)`.
    pub fn shifts(&self) -> [f64; 4] {
        let (al, be) = (self.alpha, self.beta);
        [-al + be, al + be, al - be, -al - be]
    }

    /// Partition on which the rearranged first eigenfunction of Γ₂
    /// vanishes: an arc of length `a` around π/2 and one of length `ℓ − a`
    /// around 3π/2, with the gap `b` between the second and the first.
    pub fn canonical_target(&self) -> BoundaryPartition {
        let (al, be, q) = (self.alpha, self.beta, self.ell / 4.0);
        let mut arcs = Vec::with_capacity(2);
        if self.a > 1e-12 {
            arcs.push(Arc::new(Angle::radians(PI / 2.0 - q + al - be), Angle::radians(self.a)).unwrap());
        }
        arcs.push(
            Arc::new(
                Angle::radians(1.5 * PI - q - al + be),
                Angle::radians(self.ell - self.a),
            )
            .unwrap(),
        );
        BoundaryPartition::from_arcs(arcs).expect("canonical layout is a valid partition")
    }
}

fn same_layout(p: &BoundaryPartition, q: &BoundaryPartition) -> bool {
    let tol = 1e-9;
    let close = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(TAU);
        d < tol || TAU - d < tol
    };
    p.component_count() == q.component_count()
        && p.arcs().iter().all(|x| {
            q.arcs().iter().any(|y| {
                close(x.start().to_radians(), y.start().to_radians())
                    && (x.length().to_radians() - y.length().to_radians()).abs() < tol
            })
        })
}

/// Test function for `target` built from the first eigenfunction `u` of
/// Γ₂ by four angular shifts.
///
/// `u` is first averaged over the symmetry group of Γ₂ so the branches
/// agree exactly at the cuts. Each branch is then a relabeling of vertices,
/// and the result is moved onto `target` by a grid rotation or reflection.
/// Needs a uniform angular grid of `N ≡ 0 (mod 4)` nodes on which α, β are
/// nodes and α + β is an even number of steps.
pub fn rearrange_test_function(
    mesh: &DiskMesh,
    u: &[f64],
    target: &BoundaryPartition,
) -> Result<Vec<f64>, AnalysisError> {
    check_len(mesh, u)?;
    let n = mesh.angles().len();
    if !mesh.has_uniform_angles() || n % 4 != 0 {
        return Err(AnalysisError::Precondition(
            "needs a uniform angular grid with a multiple of 4 nodes".into(),
        ));
    }
    let step = TAU / n as f64;
    let r = Rearrangement::for_target(target)?;
    let steps = |x: f64| -> Option<i64> {
        let k = (x / step).round();
        ((x / step - k).abs() < 1e-6).then_some(k as i64)
    };
    let (Some(ka), Some(kb)) = (steps(r.alpha), steps(r.beta)) else {
        return Err(AnalysisError::Precondition(format!(
            "shift angles alpha = {}, beta = {} are not on the angular grid",
            r.alpha, r.beta
        )));
    };
    if (ka + kb) % 2 != 0 {
        return Err(AnalysisError::Precondition(
            "alpha + beta must be an even number of angular steps".into(),
        ));
    }

    let sym = symmetrize_d2(mesh, u)?;

    // Branch boundaries and shifts in grid steps.
    let n_i = n as i64;
    let cuts = [ka, n_i / 4 - kb, n_i / 2 - ka, 3 * n_i / 4 + kb];
    let shifts = [-ka + kb, ka + kb, ka - kb, -ka - kb];
    let mut sector_map = vec![0usize; n];
    for (s, slot) in sector_map.iter_mut().enumerate() {
        let rel = (s as i64 - ka).rem_euclid(n_i) + ka;
        let branch = (0..4).rev().find(|&i| rel >= cuts[i]).unwrap_or(3);
        *slot = (s as i64 + shifts[branch]).rem_euclid(n_i) as usize;
    }
    let rings = mesh.radii().len();
    let mut rearranged = vec![0.0; u.len()];
    rearranged[0] = sym[0];
    for ring in 0..rings {
        for s in 0..n {
            rearranged[mesh.vertex_at(ring, s)] = sym[mesh.vertex_at(ring, sector_map[s])];
        }
    }

    // Carry the canonical layout onto the target.
    let canonical = r.canonical_target();
    let mut transform = None;
    'search: for sign in [1.0, -1.0] {
        let base = if sign > 0.0 { canonical.clone() } else { canonical.reflected() };
        for k in 0..n / 2 {
            let rot = 2.0 * step * k as f64;
            if same_layout(&base.rotated(Angle::radians(rot)), target) {
                transform = Some((sign, rot));
                break 'search;
            }
        }
    }
    let Some((sign, rot)) = transform else {
        return Err(AnalysisError::Precondition(
            "target is not a grid rotation or reflection of the canonical layout".into(),
        ));
    };
    let map = isometry_map(mesh, sign, rot).ok_or(AnalysisError::NonSymmetricMesh)?;
    let mut out = vec![0.0; u.len()];
    for (v, &w) in map.iter().enumerate() {
        out[w] = rearranged[v];
    }

    let sup = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for v in mesh.boundary_vertices() {
        let theta = Angle::radians(vertex_angle(mesh, v));
        if target.contains(theta) != Condition::Neumann && out[v].abs() > 1e-12 * sup {
            return Err(AnalysisError::Precondition(
                "u does not vanish on the Dirichlet arcs of Γ₂".into(),
            ));
        }
    }
    Ok(out)
}

/// Average over the reflections in both axes, summed in sorted order so
/// the result is exactly invariant.
fn symmetrize_d2(mesh: &DiskMesh, u: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    let maps: Vec<Vec<usize>> = [(-1.0, 0.0), (-1.0, PI), (1.0, PI)]
        .iter()
        .map(|&(s, t)| isometry_map(mesh, s, t))
        .collect::<Option<_>>()
        .ok_or(AnalysisError::NonSymmetricMesh)?;
    Ok((0..u.len())
        .map(|v| {
            let mut vals = [u[v], u[maps[0][v]], u[maps[1][v]], u[maps[2][v]]];
            vals.sort_by(f64::total_cmp);
            vals.iter().sum::<f64>() / 4.0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::solve_smallest;
    use crate::fem::assemble;
    use crate::geometry::{make_gamma, make_two_component, make_uniform, Boundary, GammaParams};
    use crate::mesh::{triangulate, MeshParams};

    #[test]
    fn dirichlet_disk_nodal_structure() {
        let m = triangulate(&Boundary::Dirichlet, &MeshParams::new(0.1, 0)).unwrap();
        let pair = assemble(&m).unwrap();
        let r = solve_smallest(&pair, 3, 1e-9).unwrap();
        let u1 = pair.extend(&r.eigenvectors[0]);
        let rep = nodal_domains(&m, &u1).unwrap();
        assert_eq!(rep.domain_count, 1);
        assert!(rep.is_closed);
        assert!(matches!(beta_of(&rep), Err(AnalysisError::DomainCount(1))));
        let u2 = pair.extend(&r.eigenvectors[1]);
        let rep2 = nodal_domains(&m, &u2).unwrap();
        assert_eq!(rep2.domain_count, 2);
        // A diameter through the Dirichlet circle.
        assert_eq!(rep2.nodal_endpoints.len(), 2);
        assert!(is_degenerate(r.eigenvalues[1], r.eigenvalues[2]));
    }

    #[test]
    fn gamma2_second_eigenfunction_splits_neumann_equally() {
        let ell = Angle::PI;
        let b: Boundary = make_uniform(2, ell).unwrap().into();
        let m = triangulate(&b, &MeshParams::new(0.08, 3)).unwrap();
        let pair = assemble(&m).unwrap();
        let r = solve_smallest(&pair, 3, 1e-9).unwrap();
        let u2 = pair.extend(&r.eigenvectors[1]);
        let rep = nodal_domains(&m, &u2).unwrap();
        assert_eq!(rep.domain_count, 2);
        assert!(!rep.is_closed);
        let beta = beta_of(&rep).unwrap();
        assert!((beta - PI / 4.0).abs() < 2.0 * m.h(), "beta_u2 = {beta}");
        assert!(rep.neumann_measure_plus + rep.neumann_measure_minus <= PI + 1e-9);
        // Past the crossing the nodal line is the y-axis, through the
        // middle of both Dirichlet arcs.
        let class = symmetry_class(&m, pair.full_mass(), &u2).unwrap();
        assert_eq!(class, SymmetryClass::Symmetric);
        assert_eq!(rep.nodal_endpoints.len(), 2);
        assert!((rep.nodal_endpoints[0] - PI / 2.0).abs() < 2.0 * m.h());
        assert!((rep.nodal_endpoints[1] - 1.5 * PI).abs() < 2.0 * m.h());
        let u1 = pair.extend(&r.eigenvectors[0]);
        assert_eq!(symmetry_class(&m, pair.full_mass(), &u1).unwrap(), SymmetryClass::Symmetric);
    }

    #[test]
    fn neither_and_errors() {
        let b: Boundary = make_gamma(GammaParams::new(Angle::PI, Angle::pi_frac(1, 8)).unwrap()).into();
        let m = triangulate(&b, &MeshParams::new(0.2, 2)).unwrap();
        let pair = assemble(&m).unwrap();
        let mut u = vec![0.0; m.vertex_count()];
        assert_eq!(nodal_domains(&m, &u).unwrap_err(), AnalysisError::ZeroVector);
        for (v, p) in m.vertices().iter().enumerate() {
            u[v] = 1.0 + p[1] + p[0];
        }
        assert_eq!(symmetry_class(&m, pair.full_mass(), &u).unwrap(), SymmetryClass::Neither);
        assert!(matches!(nodal_domains(&m, &[1.0]), Err(AnalysisError::LengthMismatch { .. })));
    }

    #[test]
    fn csv_fields_match_header() {
        let m = triangulate(&Boundary::Dirichlet, &MeshParams::new(0.25, 0)).unwrap();
        let u: Vec<f64> = m.vertices().iter().map(|p| p[0]).collect();
        let rep = nodal_domains(&m, &u).unwrap();
        assert_eq!(
            rep.csv_fields().split(',').count(),
            NodalReport::CSV_HEADER.split(',').count()
        );
    }

    fn uniform_gamma2_mesh(pieces: usize) -> DiskMesh {
        let b: Boundary = make_uniform(2, Angle::PI).unwrap().into();
        let h = (PI / 2.0) / (pieces as f64 - 0.5);
        let m = triangulate(&b, &MeshParams::new(h.min(1.0), 0)).unwrap();
        assert!(m.has_uniform_angles());
        m
    }

    #[test]
    fn rearrangement_identity_on_gamma2() {
        let m = uniform_gamma2_mesh(8);
        let pair = assemble(&m).unwrap();
        let r = solve_smallest(&pair, 1, 1e-10).unwrap();
        let u = pair.extend(&r.eigenvectors[0]);
        let target = make_uniform(2, Angle::PI).unwrap();
        let ut = rearrange_test_function(&m, &u, &target).unwrap();
        let diff = u.iter().zip(&ut).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    #[test]
    fn rearrangement_preserves_forms() {
        let m = uniform_gamma2_mesh(8);
        let n = m.angles().len();
        assert_eq!(n, 32);
        let pair = assemble(&m).unwrap();
        let r = solve_smallest(&pair, 1, 1e-10).unwrap();
        let u = pair.extend(&r.eigenvectors[0]);
        let (k, mm) = (pair.full_stiffness(), pair.full_mass());
        // a and b as multiples of four steps keep every shift on the grid.
        for (ia, ib) in [(0, 4), (4, 4), (4, 0), (8, 4), (0, 0)] {
            let target = make_two_component(
                Angle::pi_frac(ia, 16),
                Angle::pi_frac(ib, 16),
                Angle::PI,
            )
            .unwrap();
            let ut = rearrange_test_function(&m, &u, &target).unwrap();
            let (ku, kt) = (k.quadratic(&u), k.quadratic(&ut));
            let (mu, mt) = (mm.quadratic(&u), mm.quadratic(&ut));
            assert!((ku - kt).abs() <= 1e-10 * ku, "{ia} {ib}: {ku} vs {kt}");
            assert!((mu - mt).abs() <= 1e-10 * mu);
        }
    }

    #[test]
    fn rearrangement_rejects_off_grid_shifts() {
        let m = uniform_gamma2_mesh(8);
        let u: Vec<f64> = vec![1.0; m.vertex_count()];
        let target = make_two_component(Angle::pi_frac(1, 16), Angle::pi_frac(4, 16), Angle::PI).unwrap();
        assert!(matches!(
            rearrange_test_function(&m, &u, &target),
            Err(AnalysisError::Precondition(_))
        ));
    }
}
