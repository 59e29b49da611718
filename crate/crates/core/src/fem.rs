//! P1 stiffness and mass assembly with Dirichlet elimination.
//!
//! The Neumann condition is natural: Neumann edges contribute nothing.
//! Vertices on closed Dirichlet arcs are removed from the unknowns; the
//! junction endpoints go with them unless [`AssemblyOptions`] says
//! otherwise.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::Condition;
use crate::mesh::DiskMesh;
use crate::sparse::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("triangle {triangle} is degenerate (signed area {area:.3e})")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("vector has zero mass norm")]
    ZeroNorm,
    #[error("vector length {got} does not match {expected} degrees of freedom")]
    LengthMismatch { got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct AssemblyOptions {
    /// Eliminate the arc endpoints together with the open Dirichlet arcs.
    pub junctions_dirichlet: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            junctions_dirichlet: true,
        }
    }
}

pub type ElementMatrix = [[f64; 3]; 3];

/// Exact P1 stiffness and consistent mass matrices of one triangle, plus
/// its signed area.
pub fn element_matrices(p: [[f64; 2]; 3]) -> (ElementMatrix, ElementMatrix, f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
        - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            me[i][j] = area / if i == j { 6.0 } else { 12.0 };
        }
    }
    (ke, me, area)
}

/// Stiffness and mass matrices on the free degrees of freedom.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    stiffness: CsrMatrix,
    mass: CsrMatrix,
    full_stiffness: CsrMatrix,
    full_mass: CsrMatrix,
    /// Vertex → free DOF.
    free_map: Vec<Option<usize>>,
    /// Free DOF → vertex.
    dof_vertex: Vec<usize>,
    dirichlet_vertices: Vec<usize>,
}

pub fn assemble(mesh: &DiskMesh) -> Result<OperatorPair, FemError> {
    assemble_with(mesh, AssemblyOptions::default())
}

pub fn assemble_with(mesh: &DiskMesh, opts: AssemblyOptions) -> Result<OperatorPair, FemError> {
    let nv = mesh.vertex_count();
    let dirichlet: Vec<bool> = (0..nv)
        .map(|v| match mesh.boundary_condition(v) {
            Some(Condition::Dirichlet) => true,
            Some(Condition::Endpoint) => opts.junctions_dirichlet,
            _ => false,
        })
        .collect();
    assemble_masked(mesh, &dirichlet)
}

/// Assembly with an explicit per-vertex elimination mask.
pub fn assemble_masked(mesh: &DiskMesh, dirichlet: &[bool]) -> Result<OperatorPair, FemError> {
    let nv = mesh.vertex_count();
    assert_eq!(dirichlet.len(), nv);
    let verts = mesh.vertices();

    // Element matrices are independent; the scatter below runs in triangle
    // order so the sums do not depend on the thread count.
    let elements: Vec<(ElementMatrix, ElementMatrix, f64)> = mesh
        .triangles()
        .par_iter()
        .map(|t| element_matrices([verts[t[0]], verts[t[1]], verts[t[2]]]))
        .collect();

    let mut kt = Vec::with_capacity(9 * elements.len());
    let mut mt = Vec::with_capacity(9 * elements.len());
    for (t, (tri, (ke, me, area))) in mesh.triangles().iter().zip(&elements).enumerate() {
        if !(*area > 0.0) {
            return Err(FemError::DegenerateTriangle {
                triangle: t,
                area: *area,
            });
        }
        for i in 0..3 {
            for j in 0..3 {
                kt.push((tri[i], tri[j], ke[i][j]));
                mt.push((tri[i], tri[j], me[i][j]));
            }
        }
    }
    let full_stiffness = CsrMatrix::from_triplets(nv, kt);
    let full_mass = CsrMatrix::from_triplets(nv, mt);

    let mut free_map = vec![None; nv];
    let mut dof_vertex = Vec::new();
    let mut dirichlet_vertices = Vec::new();
    for v in 0..nv {
        if dirichlet[v] {
            dirichlet_vertices.push(v);
        } else {
            free_map[v] = Some(dof_vertex.len());
            dof_vertex.push(v);
        }
    }
    let restrict = |a: &CsrMatrix| {
        let mut t = Vec::with_capacity(a.nnz());
        for (i, &vi) in dof_vertex.iter().enumerate() {
            for (vj, val) in a.row(vi) {
                if let Some(j) = free_map[vj] {
                    t.push((i, j, val));
                }
            }
        }
        CsrMatrix::from_triplets(dof_vertex.len(), t)
    };

    Ok(OperatorPair {
        stiffness: restrict(&full_stiffness),
        mass: restrict(&full_mass),
        full_stiffness,
        full_mass,
        free_map,
        dof_vertex,
        dirichlet_vertices,
    })
}

impl OperatorPair {
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Stiffness over all mesh vertices, before elimination.
    pub fn full_stiffness(&self) -> &CsrMatrix {
        &self.full_stiffness
    }

    pub fn full_mass(&self) -> &CsrMatrix {
        &self.full_mass
    }

    pub fn dim(&self) -> usize {
        self.dof_vertex.len()
    }

    pub fn free_dof(&self, vertex: usize) -> Option<usize> {
        self.free_map[vertex]
    }

    pub fn dof_vertex(&self) -> &[usize] {
        &self.dof_vertex
    }

    pub fn dirichlet_vertices(&self) -> &[usize] {
        &self.dirichlet_vertices
    }

    /// Vertex values from free-DOF coefficients, zero on eliminated
    /// vertices.
    pub fn extend(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.free_map.len()];
        for (i, &v) in self.dof_vertex.iter().enumerate() {
            full[v] = u[i];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.dof_vertex.iter().map(|&v| full[v]).collect()
    }

    /// `(uᵀKu)/(uᵀMu)` for free-DOF coefficients.
    pub fn rayleigh(&self, u: &[f64]) -> Result<f64, FemError> {
        if u.len() != self.dim() {
            return Err(FemError::LengthMismatch {
                got: u.len(),
                expected: self.dim(),
            });
        }
        let den = self.mass.quadratic(u);
        if !(den > 0.0) {
            return Err(FemError::ZeroNorm);
        }
        Ok(self.stiffness.quadratic(u) / den)
    }
}

/// Rayleigh quotient of a free-DOF vector; see [`OperatorPair::rayleigh`].
pub fn rayleigh(pair: &OperatorPair, u: &[f64]) -> Result<f64, FemError> {
    pair.rayleigh(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_gamma, Angle, Boundary, GammaParams};
    use crate::mesh::{triangulate, MeshParams};

    #[test]
    fn reference_triangle_stiffness() {
        let (ke, me, area) = element_matrices([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((ke[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        assert_eq!(area, 0.5);
        let total: f64 = me.iter().flatten().sum();
        assert!((total - 0.5).abs() < 1e-15);
    }

    #[test]
    fn neumann_constants_in_kernel() {
        let m = triangulate(&Boundary::Neumann, &MeshParams::new(0.2, 0)).unwrap();
        let pair = assemble(&m).unwrap();
        assert_eq!(pair.dim(), m.vertex_count());
        let ones = vec![1.0; pair.dim()];
        let r = pair.stiffness().mul_vec(&ones);
        assert!(r.iter().all(|x| x.abs() <= 1e-12));
        assert!(pair.rayleigh(&ones).unwrap().abs() < 1e-12);
        assert!((pair.mass().quadratic(&ones) - m.total_area()).abs() < 1e-12);
    }

    #[test]
    fn mass_row_sums_match_quadrature() {
        let b: Boundary = make_gamma(GammaParams::new(Angle::PI, Angle::pi_frac(1, 8)).unwrap()).into();
        let m = triangulate(&b, &MeshParams::new(0.3, 2)).unwrap();
        let pair = assemble(&m).unwrap();
        // ∫φᵢ by the edge-midpoint rule, exact for quadratics: φᵢ is 1/2 at
        // the two adjacent midpoints and 0 at the opposite one.
        let mut integral = vec![0.0; m.vertex_count()];
        for (t, tri) in m.triangles().iter().enumerate() {
            let area = m.signed_area(t);
            for &v in tri {
                integral[v] += area / 3.0 * (0.5 + 0.5 + 0.0);
            }
        }
        for v in 0..m.vertex_count() {
            let row: f64 = pair.full_mass().row(v).map(|(_, x)| x).sum();
            assert!((row - integral[v]).abs() < 1e-14);
        }
    }

    #[test]
    fn elimination_counts_and_symmetry() {
        let b: Boundary = make_gamma(GammaParams::new(Angle::PI, Angle::pi_frac(1, 4)).unwrap()).into();
        let m = triangulate(&b, &MeshParams::new(0.2, 3)).unwrap();
        let pair = assemble(&m).unwrap();
        let boundary_dirichlet = m
            .boundary_vertices()
            .filter(|&v| matches!(m.boundary_condition(v), Some(Condition::Dirichlet | Condition::Endpoint)))
            .count();
        assert_eq!(pair.dim(), m.vertex_count() - boundary_dirichlet);
        assert!(pair.stiffness().asymmetry() < 1e-14);
        assert!(pair.mass().asymmetry() < 1e-14);
        for &j in m.junction_vertices() {
            assert!(pair.free_dof(j).is_none());
        }
        let keep = assemble_with(&m, AssemblyOptions { junctions_dirichlet: false }).unwrap();
        assert_eq!(keep.dim(), pair.dim() + m.junction_vertices().len());
    }

    #[test]
    fn rayleigh_errors() {
        let m = triangulate(&Boundary::Dirichlet, &MeshParams::new(0.5, 0)).unwrap();
        let pair = assemble(&m).unwrap();
        assert_eq!(pair.rayleigh(&vec![0.0; pair.dim()]), Err(FemError::ZeroNorm));
        assert!(matches!(pair.rayleigh(&[1.0]), Err(FemError::LengthMismatch { .. })));
    }

    #[test]
    fn extend_restrict_round_trip() {
        let b: Boundary = make_gamma(GammaParams::new(Angle::PI, Angle::ZERO).unwrap()).into();
        let m = triangulate(&b, &MeshParams::new(0.25, 1)).unwrap();
        let pair = assemble(&m).unwrap();
        let u: Vec<f64> = (0..pair.dim()).map(|i| i as f64).collect();
        let full = pair.extend(&u);
        assert_eq!(pair.restrict(&full), u);
        for &v in pair.dirichlet_vertices() {
            assert_eq!(full[v], 0.0);
        }
        let ku = pair.stiffness().quadratic(&u);
        assert!((pair.full_stiffness().quadratic(&full) - ku).abs() <= 1e-9 * ku.abs());
    }
}
