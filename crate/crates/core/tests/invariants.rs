//! Property tests for the mesh, assembly, eigensolver and nodal analysis.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zaremba::analysis::{nodal_domains, symmetry_class, SymmetryClass};
use zaremba::eig::{self, solve_dense_reference, solve_smallest, EigenOptions};
use zaremba::experiments::{gamma_boundary, random_partition, shared_mesh_eigenvalues, solve_boundary, SolveConfig};
use zaremba::fem::{assemble, rayleigh};
use zaremba::geometry::{Angle, Arc, Boundary, BoundaryPartition, Condition};
use zaremba::mesh::{triangulate, EdgeLabel, MeshParams};

fn partition(seed: u64, m: usize, ell: f64) -> BoundaryPartition {
    random_partition(&mut ChaCha8Rng::seed_from_u64(seed), m, ell)
}

fn cfg(h: f64) -> SolveConfig {
    SolveConfig {
        h,
        ..SolveConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn meshes_have_positive_areas_and_consistent_labels(
        seed in any::<u64>(), m in 1usize..5, ell in 0.6f64..5.6, h in 0.12f64..0.4,
    ) {
        let b = Boundary::Mixed(partition(seed, m, ell));
        let mesh = triangulate(&b, &MeshParams::new(h, 6)).unwrap();
        for t in 0..mesh.triangles().len() {
            prop_assert!(mesh.signed_area(t) > 0.0);
        }
        prop_assert!((mesh.total_area() - std::f64::consts::PI).abs() < 0.2);
        for e in mesh.boundary_edges() {
            let [p, q] = e.vertices.map(|v| mesh.vertices()[v]);
            let mid = (p[1] + q[1]).atan2(p[0] + q[0]);
            let expected = match b.classify(Angle::radians(mid)) {
                Condition::Dirichlet => EdgeLabel::Dirichlet,
                Condition::Neumann => EdgeLabel::Neumann,
                Condition::Endpoint => unreachable!("junctions are mesh vertices"),
            };
            prop_assert_eq!(e.label, expected);
        }
        let again = triangulate(&b, &MeshParams::new(h, 6)).unwrap();
        prop_assert_eq!(mesh.to_msh(), again.to_msh());
    }

    #[test]
    fn sparse_and_dense_solvers_agree(seed in any::<u64>(), m in 1usize..4, ell in 0.8f64..5.4) {
        let b = Boundary::Mixed(partition(seed, m, ell));
        let mesh = triangulate(&b, &MeshParams::new(0.3, 2)).unwrap();
        let pair = assemble(&mesh).unwrap();
        prop_assume!(pair.dim() <= eig::DENSE_CAP);
        let sparse = solve_smallest(&pair, 5, 1e-9).unwrap();
        let dense = solve_dense_reference(&pair, 5).unwrap();
        for (s, d) in sparse.eigenvalues.iter().zip(&dense.eigenvalues) {
            prop_assert!((s - d).abs() <= 1e-8 * d.max(1.0), "{s} vs {d}");
        }
        // M-orthonormality.
        let mass = pair.mass();
        for i in 0..5 {
            for j in 0..5 {
                let g = mass.bilinear(&sparse.eigenvectors[i], &sparse.eigenvectors[j]);
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - delta).abs() < 1e-8, "gram ({i}, {j}) = {g}");
            }
        }
        prop_assert!(sparse.residuals.iter().all(|&r| r <= 1e-9));
    }

    #[test]
    fn shift_does_not_change_eigenvalues(seed in any::<u64>(), ell in 0.8f64..5.4) {
        let b = Boundary::Mixed(partition(seed, 2, ell));
        let mesh = triangulate(&b, &MeshParams::new(0.2, 4)).unwrap();
        let pair = assemble(&mesh).unwrap();
        let at = |shift: f64| {
            let opts = EigenOptions { shift, ..EigenOptions::default() };
            eig::solve_smallest_with(pair.stiffness(), pair.mass(), 4, 1e-8, &opts).unwrap().eigenvalues
        };
        for (a, b) in at(-1.0).iter().zip(at(-2.0)) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn rayleigh_quotient_bounds_the_first_eigenvalue(seed in any::<u64>(), ell in 0.8f64..5.4, coeffs in prop::collection::vec(-1.0f64..1.0, 8)) {
        let b = Boundary::Mixed(partition(seed, 2, ell));
        let mesh = triangulate(&b, &MeshParams::new(0.25, 3)).unwrap();
        let pair = assemble(&mesh).unwrap();
        let r = solve_smallest(&pair, 1, 1e-8).unwrap();
        // Smooth-ish trial functions built from a few polar modes.
        let full: Vec<f64> = mesh.vertices().iter().map(|&[x, y]| {
            let (rho, t) = ((x * x + y * y).sqrt(), y.atan2(x));
            coeffs.iter().enumerate().map(|(k, c)| c * rho.powi(k as i32 / 2) * ((k / 2) as f64 * t + (k % 2) as f64).cos()).sum::<f64>() + 1e-3
        }).collect();
        let u = pair.restrict(&full);
        prop_assume!(pair.mass().quadratic(&u) > 1e-12);
        prop_assert!(rayleigh(&pair, &u).unwrap() >= r.eigenvalues[0] * (1.0 - 1e-10));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn eigenvalues_grow_with_the_dirichlet_set(seed in any::<u64>(), m in 2usize..4, ell in 1.0f64..5.0, drop in 0usize..3) {
        let larger = partition(seed, m, ell);
        let arcs = larger.arcs();
        let kept: Vec<Arc> = arcs.iter().enumerate().filter(|(i, _)| *i != drop % m).map(|(_, a)| *a).collect();
        let smaller = BoundaryPartition::from_arcs(kept).unwrap();
        let (small, large) = shared_mesh_eigenvalues(
            &Boundary::Mixed(smaller), &Boundary::Mixed(larger), &cfg(0.15), 4,
        ).unwrap();
        for (s, l) in small.iter().zip(&large) {
            prop_assert!(*s <= l + 1e-9, "{s} > {l}");
        }
    }

    #[test]
    fn spectrum_is_positive_and_ordered_with_two_nodal_domains(seed in any::<u64>(), m in 1usize..5, ell in 0.6f64..5.6) {
        let b = Boundary::Mixed(partition(seed, m, ell));
        let s = solve_boundary(&b, &cfg(0.1), 3).unwrap();
        let l = &s.eig.eigenvalues;
        prop_assert!(0.0 < l[0] && l[0] < l[1] && l[1] <= l[2], "{l:?}");
        prop_assert!(l[1] - l[0] > 1e-6);
        let u1 = nodal_domains(&s.mesh, &s.vertex_values(0)).unwrap();
        prop_assert_eq!(u1.domain_count, 1);
        let u2 = nodal_domains(&s.mesh, &s.vertex_values(1)).unwrap();
        prop_assert_eq!(u2.domain_count, 2);
    }

    #[test]
    fn gamma_eigenfunctions_have_a_reflection_class(k in 1i64..31) {
        // Stay away from the crossing near beta = 0.25, where the class
        // flips and u2 is nearly degenerate.
        let beta = Angle::pi_frac(k, 128);
        prop_assume!((beta.to_radians() - 0.249).abs() > 0.03);
        let b = gamma_boundary(Angle::PI, beta).unwrap();
        let s = solve_boundary(&b, &cfg(0.1), 3).unwrap();
        let class = symmetry_class(&s.mesh, s.pair.full_mass(), &s.vertex_values(1)).unwrap();
        prop_assert_ne!(class, SymmetryClass::Neither);
        let report = nodal_domains(&s.mesh, &s.vertex_values(1)).unwrap();
        prop_assert!(report.beta_u2 <= (std::f64::consts::TAU - std::f64::consts::PI) / 4.0 + 0.2);
        prop_assert!(!report.is_closed);
    }
}

#[test]
fn eigenvalues_decrease_under_refinement() {
    for b in [
        Boundary::Dirichlet,
        Boundary::Neumann,
        gamma_boundary(Angle::PI, Angle::pi_frac(1, 4)).unwrap(),
        gamma_boundary(Angle::PI, Angle::pi_frac(1, 16)).unwrap(),
    ] {
        let mut prev: Option<Vec<f64>> = None;
        for h in [0.2, 0.1, 0.05, 0.025] {
            let l = solve_boundary(&b, &cfg(h), 3).unwrap().eig.eigenvalues;
            if let Some(p) = &prev {
                for (a, c) in l.iter().zip(p) {
                    assert!(*a <= c + 1e-9, "{b:?} h = {h}: {a} > {c}");
                }
            }
            prev = Some(l);
        }
    }
}

#[test]
fn rearranged_functions_keep_both_quadratic_forms() {
    let ctx = zaremba::experiments::RearrangementContext::new(Angle::PI, &SolveConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        use rand::Rng;
        let a = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
        let b = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
        let rot = rng.random::<f64>() * std::f64::consts::TAU;
        let c = ctx.check(a, b, rot, &SolveConfig::default()).unwrap();
        assert!((c.rayleigh_rearranged - c.rayleigh_u).abs() <= 1e-10 * c.rayleigh_u);
        assert!(c.lambda_target <= c.rayleigh_rearranged + 1e-9);
    }
}

#[test]
fn graded_meshes_converge_at_nearly_second_order() {
    let b = gamma_boundary(Angle::PI, Angle::pi_frac(1, 4)).unwrap();
    let hs = [0.025, 0.0125, 0.00625];
    let l: Vec<f64> = hs.iter().map(|&h| solve_boundary(&b, &cfg(h), 1).unwrap().lambda(0)).collect();
    let r = zaremba::experiments::richardson(hs, [l[0], l[1], l[2]]);
    assert!(r.order >= 1.5, "order {}", r.order);
}
