//! Experiment drivers: β sweeps over the Γ(β) family, the β_c search,
//! random scans for the minimizer and maximizer statements, the smearing
//! limit, the nodal-line audit and mesh convergence studies.
//!
//! Independent solves run on the rayon pool and are gathered in input
//! order, so every output is identical for any thread count.
//!
//! Inequalities between discrete eigenvalues are checked against a
//! tolerance `tol_λ`: twice the Richardson estimate of the discretization
//! error at the working `h`, from solves at `4h`, `2h` and `h`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{
    self, is_degenerate, nodal_domains, symmetry_distances, AnalysisError, NodalReport, SymmetryClass,
};
use crate::bessel;
use crate::eig::{self, EigError, EigenOptions, EigenResult};
use crate::fem::{assemble_masked, assemble_with, AssemblyOptions, FemError, OperatorPair};
use crate::geometry::{
    beta_max, make_gamma, make_two_component, make_uniform, Angle, Arc, Boundary, BoundaryPartition,
    Condition, GammaParams, GeometryError,
};
use crate::mesh::{triangulate, DiskMesh, MeshError, MeshParams, DEFAULT_GRADING_LEVELS, DEFAULT_GRADING_RATIO};
use crate::plot::{nodal_overlay_svg, LinePlot, Series};

/// Default residual target of the drivers.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-8;

/// Shortest arc or gap drawn by the random scans, in radians.
pub const MIN_PIECE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("at beta = {beta}: {source}")]
    AtBeta {
        beta: f64,
        source: Box<ExperimentError>,
    },
    #[error("no symmetry flip between beta = {lo} ({class_lo}) and beta = {hi} ({class_hi})")]
    NoFlip {
        lo: f64,
        hi: f64,
        class_lo: SymmetryClass,
        class_hi: SymmetryClass,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Discretization and solver settings shared by all drivers.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub h: f64,
    pub grading_levels: usize,
    pub grading_ratio: f64,
    /// Eigenpairs requested per solve; drivers raise it to what they need.
    pub k: usize,
    /// Residual target per eigenpair. Graded meshes put a roundoff floor
    /// near 1e-9 on `‖Ku − λMu‖/‖Mu‖`; eigenvalue error is quadratic in it.
    pub tol: f64,
    pub seed: u64,
    pub junctions_dirichlet: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            h: 0.05,
            grading_levels: DEFAULT_GRADING_LEVELS,
            grading_ratio: DEFAULT_GRADING_RATIO,
            k: 4,
            tol: DEFAULT_SOLVE_TOL,
            seed: eig::DEFAULT_SEED,
            junctions_dirichlet: true,
        }
    }
}

impl SolveConfig {
    pub fn with_h(&self, h: f64) -> SolveConfig {
        SolveConfig { h, ..self.clone() }
    }

    fn mesh_params(&self) -> MeshParams {
        let mut p = MeshParams::new(self.h, self.grading_levels);
        p.grading_ratio = self.grading_ratio;
        p
    }

    fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            seed: self.seed,
            ..EigenOptions::default()
        }
    }
}

/// Mesh, operators and eigenpairs of one boundary condition.
#[derive(Clone, Debug)]
pub struct Solved {
    pub mesh: DiskMesh,
    pub pair: OperatorPair,
    pub eig: EigenResult,
}

impl Solved {
    /// Eigenvector `i` as vertex values.
    pub fn vertex_values(&self, i: usize) -> Vec<f64> {
        self.pair.extend(&self.eig.eigenvectors[i])
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.eig.eigenvalues[i]
    }
}

pub fn solve_boundary(boundary: &Boundary, cfg: &SolveConfig, k: usize) -> Result<Solved> {
    let mesh = triangulate(boundary, &cfg.mesh_params())?;
    let pair = assemble_with(
        &mesh,
        AssemblyOptions {
            junctions_dirichlet: cfg.junctions_dirichlet,
        },
    )?;
    let k = k.min(pair.dim());
    let eig = eig::solve_smallest_with(pair.stiffness(), pair.mass(), k, cfg.tol, &cfg.eigen_options())?;
    log::debug!(
        "solved {} dof, h = {}, eigenvalues {:?}",
        pair.dim(),
        cfg.h,
        eig.eigenvalues
    );
    Ok(Solved { mesh, pair, eig })
}

/// Richardson extrapolation from three mesh sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Richardson {
    pub limit: f64,
    /// Observed order; NaN when the differences are not monotone.
    pub order: f64,
    /// Estimated error of the finest value, with the order clamped to
    /// `[1, 2]`.
    pub error: f64,
}

/// Fits `λ(h) = L + C·h^p` to `(h[i], l[i])`, `h` decreasing.
pub fn richardson(h: [f64; 3], l: [f64; 3]) -> Richardson {
    let d0 = l[0] - l[1];
    let d1 = l[1] - l[2];
    let order = if d0 * d1 > 0.0 && d1 != 0.0 {
        let target = d0 / d1;
        let g = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p)) - target;
        let (mut lo, mut hi) = (0.05, 8.0);
        if g(lo) > 0.0 {
            lo
        } else if g(hi) < 0.0 {
            hi
        } else {
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    } else {
        f64::NAN
    };
    let p = if order.is_nan() { 1.0 } else { order.clamp(1.0, 2.0) };
    let c = d1 / (h[1].powf(p) - h[2].powf(p));
    Richardson {
        limit: l[2] - c * h[2].powf(p),
        order,
        error: (c * h[2].powf(p)).abs(),
    }
}

/// Solve at `h` plus the per-eigenvalue tolerance `tol_λ` from coarser
/// solves at `2h` and `4h`.
pub fn solve_with_tolerance(boundary: &Boundary, cfg: &SolveConfig, k: usize) -> Result<(Solved, Vec<f64>)> {
    if cfg.h > 0.25 {
        return Err(ExperimentError::Invalid(format!(
            "h = {} too coarse for the tolerance estimate (needs 4h <= 1)",
            cfg.h
        )));
    }
    let fine = solve_boundary(boundary, cfg, k)?;
    let mid = solve_boundary(boundary, &cfg.with_h(2.0 * cfg.h), k)?;
    let coarse = solve_boundary(boundary, &cfg.with_h(4.0 * cfg.h), k)?;
    let kk = fine.eig.eigenvalues.len().min(mid.eig.eigenvalues.len()).min(coarse.eig.eigenvalues.len());
    let tol = (0..kk)
        .map(|i| {
            let r = richardson(
                [4.0 * cfg.h, 2.0 * cfg.h, cfg.h],
                [coarse.lambda(i), mid.lambda(i), fine.lambda(i)],
            );
            (2.0 * r.error).max(1e-9 * fine.lambda(i).abs().max(1.0))
        })
        .collect();
    Ok((fine, tol))
}

pub fn gamma_boundary(ell: Angle, beta: Angle) -> Result<Boundary> {
    Ok(make_gamma(GammaParams::new(ell, beta)?).into())
}

/// `{iπ/den : i = 0..=max}`.
pub fn beta_grid(den: i64, max: i64) -> Vec<Angle> {
    (0..=max).map(|i| Angle::pi_frac(i, den)).collect()
}

/// The standard grid `iπ/512, i = 0..=128` for ℓ = π; otherwise 129
/// equally spaced points on `[0, (2π − ℓ)/4]`.
pub fn default_grid(ell: Angle) -> Vec<Angle> {
    if ell.eq_tol(Angle::PI) {
        beta_grid(512, 128)
    } else {
        let top = beta_max(ell);
        (0..=128).map(|i| top * i / 128).collect()
    }
}

/// One point of a β sweep.
#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub beta: f64,
    pub lambda: [f64; 3],
    /// `λ₃ − λ₂`.
    pub gap: f64,
    pub symmetry: SymmetryClass,
    pub beta_u2: Option<f64>,
    pub domain_count: usize,
    pub nodal_endpoints: Vec<f64>,
    pub is_closed: bool,
    /// λ₂ numerically double; the `u3_*` fields then describe the other
    /// basis vector of the eigenspace.
    pub degenerate: bool,
    pub u3_symmetry: Option<SymmetryClass>,
    pub u3_is_closed: Option<bool>,
    pub touches_junction: bool,
    pub h: f64,
    pub residuals: [f64; 3],
    /// Largest `tol_λ` over λ₁..λ₃; NaN when not estimated.
    pub tol_lambda: f64,
}

fn report_with_class(solved: &Solved, i: usize) -> Result<NodalReport> {
    let u = solved.vertex_values(i);
    let mut report = nodal_domains(&solved.mesh, &u)?;
    report.symmetry_class = Some(analysis::symmetry_class(&solved.mesh, solved.pair.full_mass(), &u)?);
    Ok(report)
}

fn sweep_point(ell: Angle, beta: Angle, cfg: &SolveConfig, estimate_tol: bool) -> Result<SweepRecord> {
    let boundary = gamma_boundary(ell, beta)?;
    let k = cfg.k.max(3);
    let (solved, tol) = if estimate_tol {
        let (s, t) = solve_with_tolerance(&boundary, cfg, k)?;
        let worst = t.iter().take(3).copied().fold(0.0, f64::max);
        (s, worst)
    } else {
        (solve_boundary(&boundary, cfg, k)?, f64::NAN)
    };
    let l = [solved.lambda(0), solved.lambda(1), solved.lambda(2)];
    let rep = report_with_class(&solved, 1)?;
    let degenerate = is_degenerate(l[1], l[2]);
    let (u3_symmetry, u3_is_closed) = if degenerate {
        let r3 = report_with_class(&solved, 2)?;
        (r3.symmetry_class, Some(r3.is_closed))
    } else {
        (None, None)
    };
    Ok(SweepRecord {
        beta: beta.to_radians(),
        lambda: l,
        gap: l[2] - l[1],
        symmetry: rep.symmetry_class.unwrap_or(SymmetryClass::Neither),
        beta_u2: analysis::beta_of(&rep).ok(),
        domain_count: rep.domain_count,
        is_closed: rep.is_closed,
        touches_junction: rep.touches_junction,
        nodal_endpoints: rep.nodal_endpoints,
        degenerate,
        u3_symmetry,
        u3_is_closed,
        h: cfg.h,
        residuals: [solved.eig.residuals[0], solved.eig.residuals[1], solved.eig.residuals[2]],
        tol_lambda: tol,
    })
}

/// λ₁..λ₃ and the u₂ nodal data for each β of `grid`, sorted by β.
pub fn sweep_beta(ell: Angle, grid: &[Angle], cfg: &SolveConfig, estimate_tol: bool) -> Result<Vec<SweepRecord>> {
    let top = beta_max(ell);
    let mut grid = grid.to_vec();
    grid.sort_by(|a, b| a.cmp_tol(*b));
    if let Some(bad) = grid
        .iter()
        .find(|b| b.cmp_tol(Angle::ZERO).is_lt() || b.cmp_tol(top).is_gt())
    {
        return Err(ExperimentError::Invalid(format!(
            "beta = {} outside [0, (2pi - ell)/4]",
            bad.to_radians()
        )));
    }
    grid.par_iter()
        .map(|&b| {
            sweep_point(ell, b, cfg, estimate_tol).map_err(|e| ExperimentError::AtBeta {
                beta: b.to_radians(),
                source: Box::new(e),
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str = "beta,lambda1,lambda2,lambda3,gap,symmetry_u2,beta_u2,domain_count,\
    endpoint_count,is_closed,degenerate,symmetry_u3,touches_junction,h,tol_lambda,res1,res2,res3";

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from(SWEEP_CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{:.12},{:.12},{:.12},{:.12},{:.12},{},{},{},{},{},{},{},{},{},{:.3e},{:.3e},{:.3e},{:.3e}",
            r.beta,
            r.lambda[0],
            r.lambda[1],
            r.lambda[2],
            r.gap,
            r.symmetry,
            r.beta_u2.map_or(String::new(), |b| format!("{b:.12}")),
            r.domain_count,
            r.nodal_endpoints.len(),
            r.is_closed,
            r.degenerate,
            r.u3_symmetry.map_or(String::new(), |c| c.to_string()),
            r.touches_junction,
            r.h,
            r.tol_lambda,
            r.residuals[0],
            r.residuals[1],
            r.residuals[2],
        );
    }
    s
}

pub fn sweep_svg(records: &[SweepRecord], ell: Angle) -> String {
    let series = (0..3)
        .map(|k| Series {
            name: format!("lambda{}", k + 1),
            points: records.iter().map(|r| (r.beta, r.lambda[k])).collect(),
        })
        .collect();
    LinePlot {
        title: format!("First three eigenvalues over Gamma(beta), ell = {ell}"),
        x_label: "beta (rad)".into(),
        y_label: "eigenvalue".into(),
        series,
        references: Vec::new(),
    }
    .to_svg()
}

/// Index of the smallest λ₂ (first on ties).
pub fn argmin_lambda2(records: &[SweepRecord]) -> Option<usize> {
    (0..records.len()).min_by(|&i, &j| records[i].lambda[1].total_cmp(&records[j].lambda[1]))
}

/// Indices `i` with `λ₁(β_{i+1}) < λ₁(β_i) − tol`, where `tol` is the
/// larger of the two records' `tol_λ` (0 when not estimated).
pub fn lambda1_drops(records: &[SweepRecord]) -> Vec<usize> {
    records
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let tol = w[0].tol_lambda.max(w[1].tol_lambda);
            let tol = if tol.is_nan() { 0.0 } else { tol };
            w[1].lambda[0] < w[0].lambda[0] - tol
        })
        .map(|(i, _)| i)
        .collect()
}

/// `(record, eigenvalue)` pairs whose slope to the next record exceeds
/// five times the median slope of that curve (at least 1). Flags possible
/// mis-ordering; the crossing itself only produces a kink.
pub fn continuity_flags(records: &[SweepRecord]) -> Vec<(usize, usize)> {
    let mut flags = Vec::new();
    for k in 0..3 {
        let slopes: Vec<f64> = records
            .windows(2)
            .map(|w| ((w[1].lambda[k] - w[0].lambda[k]) / (w[1].beta - w[0].beta)).abs())
            .collect();
        if slopes.is_empty() {
            continue;
        }
        let mut sorted = slopes.clone();
        sorted.sort_by(f64::total_cmp);
        let c = (5.0 * sorted[sorted.len() / 2]).max(1.0);
        flags.extend(slopes.iter().enumerate().filter(|(_, &s)| s > c).map(|(i, _)| (i, k)));
    }
    flags.sort_unstable();
    flags
}

/// Result of the β_c bisection.
#[derive(Clone, Debug)]
pub struct BetaC {
    pub beta_c: f64,
    /// Final bracket `(lo, hi)` with `lo < hi`.
    pub bracket: (f64, f64),
    pub class_lo: SymmetryClass,
    pub class_hi: SymmetryClass,
    pub gap_at_c: f64,
    pub gap_lo: f64,
    pub gap_hi: f64,
    pub evaluations: usize,
}

/// Class of u₂ by the nearer of the two reflection distances, plus
/// `λ₃ − λ₂`. Near-double λ₂ mixes the eigenvectors, so the strict
/// threshold of [`analysis::symmetry_class`] is not used here.
fn dominant_class(ell: f64, beta: f64, cfg: &SolveConfig) -> Result<(SymmetryClass, f64)> {
    let b = gamma_boundary(Angle::radians(ell), Angle::radians(beta))?;
    let s = solve_boundary(&b, cfg, cfg.k.max(3))?;
    let (d_sym, d_anti) = symmetry_distances(&s.mesh, s.pair.full_mass(), &s.vertex_values(1))?;
    let class = if d_sym <= d_anti {
        SymmetryClass::Symmetric
    } else {
        SymmetryClass::Antisymmetric
    };
    Ok((class, s.lambda(2) - s.lambda(1)))
}

/// Bisection on the symmetry class of u₂ over Γ(β).
pub fn find_beta_c(ell: Angle, bracket: (f64, f64), tol_beta: f64, cfg: &SolveConfig) -> Result<BetaC> {
    let ell_r = ell.to_radians();
    let top = beta_max(ell).to_radians();
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    if lo < -1e-12 || hi > top + 1e-12 {
        return Err(ExperimentError::Invalid(format!(
            "bracket ({lo}, {hi}) outside [0, {top}]"
        )));
    }
    if !(tol_beta > 0.0) {
        return Err(ExperimentError::Invalid("tol_beta must be positive".into()));
    }
    lo = lo.max(0.0);
    hi = hi.min(top);
    let (class_lo, gap_lo) = dominant_class(ell_r, lo, cfg)?;
    let (class_hi, gap_hi) = dominant_class(ell_r, hi, cfg)?;
    if class_lo == class_hi {
        return Err(ExperimentError::NoFlip {
            lo,
            hi,
            class_lo,
            class_hi,
        });
    }
    let mut evaluations = 2;
    while hi - lo > tol_beta {
        let mid = 0.5 * (lo + hi);
        let (c, _) = dominant_class(ell_r, mid, cfg)?;
        evaluations += 1;
        if c == class_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta_c = 0.5 * (lo + hi);
    let (_, gap_at_c) = dominant_class(ell_r, beta_c, cfg)?;
    Ok(BetaC {
        beta_c,
        bracket: (lo, hi),
        class_lo,
        class_hi,
        gap_at_c,
        gap_lo,
        gap_hi,
        evaluations: evaluations + 1,
    })
}

/// One sampled partition in a scan. `margin ≥ −tol` means the asserted
/// inequality holds; its sign convention is set by each driver.
#[derive(Clone, Debug)]
pub struct ScanRecord {
    pub label: String,
    pub partition: String,
    pub components: usize,
    /// Shorter Dirichlet arc and shorter Neumann gap (0 for one arc).
    pub a: f64,
    pub b: f64,
    /// Uniform partition index for the smearing scan.
    pub n: usize,
    pub value: f64,
    pub baseline: f64,
    pub margin: f64,
    pub tol: f64,
    pub beta_u2: Option<f64>,
    /// λ₂(Γ(β_{u₂})) and `λ₂(sample) − λ₂(Γ(β_{u₂}))`.
    pub lemma_value: Option<f64>,
    pub lemma_margin: Option<f64>,
    pub lemma_tol: Option<f64>,
    pub rearrangement: Option<RearrangementCheck>,
    pub violation: bool,
}

impl ScanRecord {
    fn new(label: &str, partition: Option<&BoundaryPartition>) -> ScanRecord {
        let (components, a, b, text) = match partition {
            Some(p) => {
                let a = if p.component_count() > 1 {
                    p.arcs().iter().map(|x| x.length().to_radians()).fold(f64::INFINITY, f64::min)
                } else {
                    0.0
                };
                let b = if p.component_count() > 1 {
                    p.gaps().iter().map(|x| x.to_radians()).fold(f64::INFINITY, f64::min)
                } else {
                    0.0
                };
                let text: Vec<String> = p
                    .arcs()
                    .iter()
                    .map(|x| format!("{:.9}:{:.9}", x.start().to_radians(), x.length().to_radians()))
                    .collect();
                (p.component_count(), a, b, text.join(";"))
            }
            None => (0, 0.0, 0.0, String::new()),
        };
        ScanRecord {
            label: label.to_string(),
            partition: text,
            components,
            a,
            b,
            n: 0,
            value: f64::NAN,
            baseline: f64::NAN,
            margin: f64::NAN,
            tol: f64::NAN,
            beta_u2: None,
            lemma_value: None,
            lemma_margin: None,
            lemma_tol: None,
            rearrangement: None,
            violation: false,
        }
    }
}

/// Discrete form of the rearrangement argument on one target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RearrangementCheck {
    /// Grid-snapped `(a, b)` actually used.
    pub a: f64,
    pub b: f64,
    pub rayleigh_u: f64,
    pub rayleigh_rearranged: f64,
    /// λ₁ of the target on the same mesh.
    pub lambda_target: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ScanReport {
    pub records: Vec<ScanRecord>,
    /// Violated inequalities.
    pub findings: Vec<String>,
    /// Limitations of the run that are not violations.
    pub notes: Vec<String>,
}

pub const SCAN_CSV_HEADER: &str = "label,components,a,b,n,value,baseline,margin,tol,beta_u2,lemma_value,\
    lemma_margin,lemma_tol,rq_u,rq_rearranged,lambda_same_mesh,violation,partition";

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.12}"))
}

pub fn scan_csv(records: &[ScanRecord]) -> String {
    let mut s = String::from(SCAN_CSV_HEADER);
    s.push('\n');
    for r in records {
        let re = r.rearrangement;
        let _ = writeln!(
            s,
            "{},{},{:.12},{:.12},{},{:.12},{:.12},{:.12},{:.3e},{},{},{},{},{},{},{},{},{}",
            r.label,
            r.components,
            r.a,
            r.b,
            r.n,
            r.value,
            r.baseline,
            r.margin,
            r.tol,
            opt(r.beta_u2),
            opt(r.lemma_value),
            opt(r.lemma_margin),
            r.lemma_tol.map_or(String::new(), |x| format!("{x:.3e}")),
            opt(re.map(|c| c.rayleigh_u)),
            opt(re.map(|c| c.rayleigh_rearranged)),
            opt(re.map(|c| c.lambda_target)),
            r.violation,
            r.partition,
        );
    }
    s
}

fn random_simplex(rng: &mut ChaCha8Rng, parts: usize, total: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..parts).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| total * x / s).collect()
}

/// Eigenvalues of `first` and `second` on one mesh that carries the
/// junctions of both, so nested Dirichlet sets give nested discrete spaces.
pub fn shared_mesh_eigenvalues(
    first: &Boundary,
    second: &Boundary,
    cfg: &SolveConfig,
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let params = cfg.mesh_params().with_extra_angles(first.junctions());
    let mesh = triangulate(second, &params)?;
    let solve = |b: &Boundary| -> Result<Vec<f64>> {
        let mask: Vec<bool> = (0..mesh.vertex_count())
            .map(|v| {
                if !mesh.is_boundary_vertex(v) {
                    return false;
                }
                let (_, s) = mesh.polar_index(v).expect("boundary vertex");
                match b.classify(Angle::radians(mesh.angles()[s])) {
                    Condition::Dirichlet => true,
                    Condition::Endpoint => cfg.junctions_dirichlet,
                    Condition::Neumann => false,
                }
            })
            .collect();
        let pair = assemble_masked(&mesh, &mask)?;
        let r = eig::solve_smallest_with(pair.stiffness(), pair.mass(), k, cfg.tol, &cfg.eigen_options())?;
        Ok(r.eigenvalues)
    };
    Ok((solve(first)?, solve(second)?))
}

/// Random partition with `m` arcs of total length `ℓ`: arc and gap
/// lengths uniform on their simplices, uniformly random rotation, every
/// piece at least [`MIN_PIECE`].
pub fn random_partition(rng: &mut ChaCha8Rng, m: usize, ell: f64) -> BoundaryPartition {
    loop {
        let arcs = random_simplex(rng, m, ell);
        let gaps = random_simplex(rng, m, TAU - ell);
        let rot = rng.random::<f64>() * TAU;
        if arcs.iter().chain(&gaps).any(|&x| x < MIN_PIECE) {
            continue;
        }
        let mut t = rot;
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            out.push(Arc::new(Angle::radians(t), Angle::radians(arcs[i])).expect("positive length"));
            t += arcs[i] + gaps[i];
        }
        // Tiny float overlaps are impossible: every gap is ≥ MIN_PIECE.
        return BoundaryPartition::from_arcs(out).expect("disjoint arcs");
    }
}

fn lemma_comparison(ell: Angle, beta: f64, cfg: &SolveConfig) -> Result<(f64, f64)> {
    let top = beta_max(ell).to_radians();
    let b = gamma_boundary(ell, Angle::radians(beta.clamp(0.0, top)))?;
    let (s, tol) = solve_with_tolerance(&b, cfg, cfg.k.max(3))?;
    Ok((s.lambda(1), tol[1]))
}

/// λ₂ over random two-arc partitions against the Γ(β) minimum and against
/// λ₂(Γ(β_{u₂})). Margins are `λ₂(sample) − baseline`.
pub fn minimizer_scan(
    ell: Angle,
    samples: usize,
    cfg: &SolveConfig,
    seed: u64,
    baseline_grid: &[Angle],
) -> Result<ScanReport> {
    if samples == 0 {
        return Err(ExperimentError::Invalid("samples must be at least 1".into()));
    }
    let ell_r = ell.to_radians();
    let sweep = sweep_beta(ell, baseline_grid, cfg, true)?;
    let best = argmin_lambda2(&sweep).ok_or_else(|| ExperimentError::Invalid("empty baseline grid".into()))?;
    let (baseline, baseline_tol) = (sweep[best].lambda[1], sweep[best].tol_lambda);

    let half = ell / 2;
    let b_max = (Angle::TWO_PI - ell) / 2;
    let mut cases: Vec<(String, BoundaryPartition)> = vec![
        ("uniform2".into(), make_two_component(half, b_max, ell)?),
        ("equal-arcs-unequal-gaps".into(), make_two_component(half, b_max / 2, ell)?),
        ("single-arc".into(), make_two_component(Angle::ZERO, Angle::ZERO, ell)?),
        ("short-arc".into(), make_two_component(ell / 8, b_max, ell)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..samples {
        cases.push((format!("random{i}"), random_partition(&mut rng, 2, ell_r)));
    }

    let results: Vec<Result<(ScanRecord, Vec<String>)>> = cases
        .par_iter()
        .map(|(label, p)| {
            let boundary = Boundary::Mixed(p.clone());
            let (solved, tol) = solve_with_tolerance(&boundary, cfg, cfg.k.max(3))?;
            let mut rec = ScanRecord::new(label, Some(p));
            let mut findings = Vec::new();
            rec.value = solved.lambda(1);
            rec.baseline = baseline;
            rec.margin = rec.value - baseline;
            rec.tol = tol[1] + baseline_tol;
            if rec.margin < -rec.tol {
                rec.violation = true;
                findings.push(format!(
                    "{label}: lambda2 = {:.9} below the Gamma(beta) minimum {baseline:.9} by more than {:.3e}",
                    rec.value, rec.tol
                ));
            }
            let mut vectors = vec![1];
            if is_degenerate(solved.lambda(1), solved.lambda(2)) {
                vectors.push(2);
            }
            for (n, &i) in vectors.iter().enumerate() {
                let report = nodal_domains(&solved.mesh, &solved.vertex_values(i))?;
                let Ok(beta) = analysis::beta_of(&report) else {
                    findings.push(format!(
                        "{label}: second eigenfunction has {} nodal domains",
                        report.domain_count
                    ));
                    rec.violation = true;
                    continue;
                };
                let (lemma_value, lemma_tol) = lemma_comparison(ell, beta, cfg)?;
                let lemma_margin = rec.value - lemma_value;
                let lt = tol[1] + lemma_tol;
                if lemma_margin < -lt {
                    rec.violation = true;
                    findings.push(format!(
                        "{label}: lambda2 = {:.9} < lambda2(Gamma({beta:.6})) = {lemma_value:.9} beyond {lt:.3e}",
                        rec.value
                    ));
                }
                if n == 0 {
                    rec.beta_u2 = Some(beta);
                    rec.lemma_value = Some(lemma_value);
                    rec.lemma_margin = Some(lemma_margin);
                    rec.lemma_tol = Some(lt);
                }
            }
            Ok((rec, findings))
        })
        .collect();

    let mut report = ScanReport::default();
    for r in results {
        let (rec, f) = r?;
        report.records.push(rec);
        report.findings.extend(f);
    }
    Ok(report)
}

/// Uniform-angle Γ₂ mesh and its first eigenfunction, on which the
/// rearrangement is an exact vertex relabeling.
#[derive(Clone, Debug)]
pub struct RearrangementContext {
    pub ell: f64,
    pub mesh: DiskMesh,
    pub pair: OperatorPair,
    pub u: Vec<f64>,
    pub rayleigh_u: f64,
    /// Angular step `2π/N`.
    pub step: f64,
}

impl RearrangementContext {
    /// Picks `N ≡ 0 (mod 16)` near `2π/h` with `ℓ/2` a multiple of `4·2π/N`,
    /// so every `(a, b)` on the `4·2π/N` grid is admissible.
    pub fn new(ell: Angle, cfg: &SolveConfig) -> Result<RearrangementContext> {
        let ell_r = ell.to_radians();
        let n0 = (TAU / cfg.h / 16.0).ceil().max(1.0) as usize * 16;
        let n = (0..64)
            .map(|i| n0 + 16 * i)
            .find(|&n| {
                let m = ell_r * n as f64 / (4.0 * PI);
                (m - m.round()).abs() < 1e-9 && (m.round() as i64) % 4 == 0
            })
            .ok_or_else(|| ExperimentError::Invalid(format!("no uniform angular grid fits ell = {ell}")))?;
        let step = TAU / n as f64;
        let boundary: Boundary = make_uniform(2, ell)?.into();
        let mesh = triangulate(&boundary, &MeshParams::new(step * (1.0 + 1e-6), 0))?;
        if !mesh.has_uniform_angles() || mesh.angles().len() != n {
            return Err(ExperimentError::Invalid("could not build a uniform angular mesh".into()));
        }
        let pair = assemble_with(&mesh, AssemblyOptions::default())?;
        let r = eig::solve_smallest_with(pair.stiffness(), pair.mass(), 1, cfg.tol, &cfg.eigen_options())?;
        let u = pair.extend(&r.eigenvectors[0]);
        let rayleigh_u = pair.full_stiffness().quadratic(&u) / pair.full_mass().quadratic(&u);
        Ok(RearrangementContext {
            ell: ell_r,
            mesh,
            pair,
            u,
            rayleigh_u,
            step,
        })
    }

    /// Snaps `(a, b, rotation)` to the admissible grid and runs the check.
    pub fn check(&self, a: f64, b: f64, rotation: f64, cfg: &SolveConfig) -> Result<RearrangementCheck> {
        let q = 4.0 * self.step;
        let snap = |x: f64, max: f64| ((x / q).round() * q).clamp(0.0, (max / q + 1e-9).floor() * q);
        let a = snap(a, self.ell / 2.0);
        let b = snap(b, (TAU - self.ell) / 2.0);
        let rot = (rotation / (2.0 * self.step)).round() * 2.0 * self.step;
        let target = make_two_component(Angle::radians(a), Angle::radians(b), Angle::radians(self.ell))?
            .rotated(Angle::radians(rot));
        let ut = analysis::rearrange_test_function(&self.mesh, &self.u, &target)?;
        let rq = self.pair.full_stiffness().quadratic(&ut) / self.pair.full_mass().quadratic(&ut);
        let mask: Vec<bool> = (0..self.mesh.vertex_count())
            .map(|v| {
                self.mesh.is_boundary_vertex(v) && {
                    let (_, s) = self.mesh.polar_index(v).expect("boundary vertex");
                    target.contains(Angle::radians(self.mesh.angles()[s])) != Condition::Neumann
                }
            })
            .collect();
        let pair = assemble_masked(&self.mesh, &mask)?;
        let r = eig::solve_smallest_with(pair.stiffness(), pair.mass(), 1, cfg.tol, &cfg.eigen_options())?;
        Ok(RearrangementCheck {
            a,
            b,
            rayleigh_u: self.rayleigh_u,
            rayleigh_rearranged: rq,
            lambda_target: r.eigenvalues[0],
        })
    }
}

/// λ₁ over random partitions with at most `n` arcs against λ₁(Γₙ).
/// Margins are `λ₁(Γₙ) − λ₁(sample)`. For `n = 2` each sample also runs
/// the rearrangement check on a grid-snapped copy.
pub fn maximizer_scan(n: usize, ell: Angle, samples: usize, cfg: &SolveConfig, seed: u64) -> Result<ScanReport> {
    if !(1..=6).contains(&n) {
        return Err(ExperimentError::Invalid(format!("n = {n} outside 1..=6")));
    }
    let ell_r = ell.to_radians();
    let uniform = make_uniform(n, ell)?;
    let (base, base_tol) = solve_with_tolerance(&Boundary::Mixed(uniform.clone()), cfg, 1)?;
    let baseline = base.lambda(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases: Vec<(String, BoundaryPartition, f64)> = vec![("uniform".into(), uniform, 0.0)];
    for i in 0..samples {
        let m = rng.random_range(1..=n);
        let p = random_partition(&mut rng, m, ell_r);
        let rot = p.arcs()[0].start().to_radians();
        cases.push((format!("random{i}"), p, rot));
    }
    let context = if n == 2 { Some(RearrangementContext::new(ell, cfg)?) } else { None };

    let results: Vec<Result<(ScanRecord, Vec<String>)>> = cases
        .par_iter()
        .map(|(label, p, rot)| {
            let (solved, tol) = solve_with_tolerance(&Boundary::Mixed(p.clone()), cfg, 1)?;
            let mut rec = ScanRecord::new(label, Some(p));
            let mut findings = Vec::new();
            rec.value = solved.lambda(0);
            rec.baseline = baseline;
            rec.margin = baseline - rec.value;
            rec.tol = tol[0] + base_tol[0];
            if rec.margin < -rec.tol {
                rec.violation = true;
                findings.push(format!(
                    "{label}: lambda1 = {:.9} exceeds lambda1(Gamma_{n}) = {baseline:.9} beyond {:.3e}",
                    rec.value, rec.tol
                ));
            }
            if let Some(ctx) = &context {
                let check = ctx.check(rec.a, rec.b, *rot, cfg)?;
                if (check.rayleigh_rearranged - check.rayleigh_u).abs() > 1e-10 {
                    rec.violation = true;
                    findings.push(format!(
                        "{label}: rearrangement changed the Rayleigh quotient by {:.3e}",
                        check.rayleigh_rearranged - check.rayleigh_u
                    ));
                }
                if check.lambda_target > check.rayleigh_rearranged + 1e-9 {
                    rec.violation = true;
                    findings.push(format!(
                        "{label}: lambda1 of the snapped target {:.12} exceeds the rearranged quotient {:.12}",
                        check.lambda_target, check.rayleigh_rearranged
                    ));
                }
                rec.rearrangement = Some(check);
            }
            Ok((rec, findings))
        })
        .collect();

    let mut report = ScanReport::default();
    for r in results {
        let (rec, f) = r?;
        report.records.push(rec);
        report.findings.extend(f);
    }
    Ok(report)
}

/// λ₁(Γₙ) for each `n` of `ns` (ascending) against the Dirichlet value
/// `j₀,₁²`. Margins are `j₀,₁² − λ₁(Γₙ)`, the gap that should shrink.
/// Stops at the first `n` whose arcs or gaps are shorter than `4h`.
pub fn smearing_limit(ell: Angle, ns: &[usize], cfg: &SolveConfig) -> Result<ScanReport> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.first() == Some(&0) || ns.last().is_some_and(|&n| n > 64) {
        return Err(ExperimentError::Invalid("n must lie in 1..=64".into()));
    }
    let ell_r = ell.to_radians();
    let mut report = ScanReport::default();
    let valid: Vec<usize> = ns
        .iter()
        .copied()
        .take_while(|&n| (ell_r / n as f64).min((TAU - ell_r) / n as f64) >= 4.0 * cfg.h)
        .collect();
    if valid.len() < ns.len() {
        report.notes.push(format!(
            "mesh too coarse beyond n = {}: arcs or gaps shorter than 4h = {}",
            valid.last().map_or("none".to_string(), |n| n.to_string()),
            4.0 * cfg.h
        ));
    }
    let target = bessel::dirichlet_lambda1();
    let solved: Vec<Result<(usize, f64, f64)>> = valid
        .par_iter()
        .map(|&n| {
            let (s, tol) = solve_with_tolerance(&Boundary::Mixed(make_uniform(n, ell)?), cfg, 1)?;
            Ok((n, s.lambda(0), tol[0]))
        })
        .collect();
    for r in solved {
        let (n, value, tol) = r?;
        let mut rec = ScanRecord::new(&format!("uniform{n}"), None);
        rec.n = n;
        rec.components = n;
        rec.value = value;
        rec.baseline = target;
        rec.margin = target - value;
        rec.tol = tol;
        if rec.margin < -tol {
            rec.violation = true;
            report
                .findings
                .push(format!("n = {n}: lambda1 = {value:.9} above the Dirichlet value {target:.9}"));
        }
        report.records.push(rec);
    }
    for i in 1..report.records.len() {
        let (prev, cur) = (&report.records[i - 1], &report.records[i]);
        if cur.value < prev.value - cur.tol.max(prev.tol) {
            let msg = format!(
                "lambda1 decreases from n = {} ({:.9}) to n = {} ({:.9})",
                prev.n, prev.value, cur.n, cur.value
            );
            report.records[i].violation = true;
            report.findings.push(msg);
        }
    }
    Ok(report)
}

pub fn smearing_svg(report: &ScanReport) -> String {
    LinePlot {
        title: "lambda1 of the uniform n-partition".into(),
        x_label: "n".into(),
        y_label: "lambda1".into(),
        series: vec![Series {
            name: "lambda1(Gamma_n)".into(),
            points: report.records.iter().map(|r| (r.n as f64, r.value)).collect(),
        }],
        references: vec![("j01^2".into(), bessel::dirichlet_lambda1())],
    }
    .to_svg()
}

/// One β of the nodal-line audit.
#[derive(Clone, Debug)]
pub struct AuditRow {
    pub beta: f64,
    pub endpoints: Vec<f64>,
    pub is_closed: bool,
    /// Closedness after halving `h`, when a closed line was seen.
    pub recheck_closed: Option<bool>,
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub findings: Vec<String>,
}

impl AuditReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("beta,endpoint_count,endpoints,is_closed,recheck_closed\n");
        for r in &self.rows {
            let e: Vec<String> = r.endpoints.iter().map(|t| format!("{t:.9}")).collect();
            let _ = writeln!(
                s,
                "{:.12},{},{},{},{}",
                r.beta,
                r.endpoints.len(),
                e.join(";"),
                r.is_closed,
                r.recheck_closed.map_or(String::new(), |c| c.to_string())
            );
        }
        s
    }
}

/// Checks that every u₂ nodal line over Γ(β) reaches ∂B.
pub fn nodal_line_audit(ell: Angle, grid: &[Angle], cfg: &SolveConfig) -> Result<AuditReport> {
    let records = sweep_beta(ell, grid, cfg, false)?;
    nodal_line_audit_from(ell, &records, cfg)
}

/// Audit from existing sweep records; closed lines (of u₂, or of u₃ when
/// λ₂ is double) are re-solved at `h/2` and reported only if they persist.
pub fn nodal_line_audit_from(ell: Angle, records: &[SweepRecord], cfg: &SolveConfig) -> Result<AuditReport> {
    let rows: Vec<Result<(AuditRow, Option<String>)>> = records
        .par_iter()
        .map(|r| {
            let closed = r.is_closed || r.u3_is_closed == Some(true) || r.domain_count != 2;
            let mut row = AuditRow {
                beta: r.beta,
                endpoints: r.nodal_endpoints.clone(),
                is_closed: closed,
                recheck_closed: None,
            };
            let mut finding = None;
            if closed {
                let fine = cfg.with_h(r.h / 2.0);
                let again = sweep_point(ell, Angle::radians(r.beta), &fine, false)?;
                let still = again.is_closed || again.u3_is_closed == Some(true) || again.domain_count != 2;
                row.recheck_closed = Some(still);
                if still {
                    finding = Some(format!(
                        "beta = {:.9}: closed nodal line persists at h = {}",
                        r.beta, fine.h
                    ));
                }
            }
            Ok((row, finding))
        })
        .collect();
    let mut report = AuditReport::default();
    for r in rows {
        let (row, f) = r?;
        report.rows.push(row);
        report.findings.extend(f);
    }
    Ok(report)
}

/// Nodal-line overlay of u₂ for Γ(β), for plotting.
pub fn nodal_overlay(ell: Angle, beta: Angle, cfg: &SolveConfig) -> Result<String> {
    let boundary = gamma_boundary(ell, beta)?;
    let s = solve_boundary(&boundary, cfg, cfg.k.max(3))?;
    let rep = nodal_domains(&s.mesh, &s.vertex_values(1))?;
    Ok(nodal_overlay_svg(
        &format!("u2 nodal line, beta = {beta}"),
        boundary.partition(),
        false,
        &rep.nodal_line,
    ))
}

/// Eigenvalues against `h`, with Richardson limits and analytic values
/// where known.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    /// `(h, dof, eigenvalues)` in the order of the input `h` list.
    pub rows: Vec<(f64, usize, Vec<f64>)>,
    /// From the three finest meshes; empty with fewer than three.
    pub extrapolation: Vec<Richardson>,
    pub reference: Vec<Option<f64>>,
}

impl ConvergenceReport {
    pub fn csv(&self) -> String {
        let k = self.rows.first().map_or(0, |r| r.2.len());
        let mut s = String::from("h,dof");
        for i in 0..k {
            let _ = write!(s, ",lambda{}", i + 1);
        }
        s.push('\n');
        for (h, dof, ls) in &self.rows {
            let _ = write!(s, "{h},{dof}");
            for l in ls {
                let _ = write!(s, ",{l:.12}");
            }
            s.push('\n');
        }
        s
    }

    /// Human-readable table with limits, orders and reference values.
    pub fn table(&self) -> String {
        let mut s = self.csv();
        for (i, r) in self.extrapolation.iter().enumerate() {
            let reference = self.reference.get(i).copied().flatten();
            let _ = writeln!(
                s,
                "lambda{}: limit {:.10} order {:.3} error {:.3e}{}",
                i + 1,
                r.limit,
                r.order,
                r.error,
                reference.map_or(String::new(), |v| format!(" reference {v:.10}"))
            );
        }
        s
    }

    pub fn svg(&self, title: &str) -> String {
        let k = self.rows.first().map_or(0, |r| r.2.len());
        LinePlot {
            title: title.to_string(),
            x_label: "h".into(),
            y_label: "eigenvalue".into(),
            series: (0..k)
                .map(|i| Series {
                    name: format!("lambda{}", i + 1),
                    points: self.rows.iter().map(|r| (r.0, r.2[i])).collect(),
                })
                .collect(),
            references: self
                .reference
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (format!("exact lambda{}", i + 1), v)))
                .collect(),
        }
        .to_svg()
    }
}

/// Analytic low eigenvalues of the pure Dirichlet and pure Neumann disk.
pub fn reference_eigenvalues(boundary: &Boundary) -> Vec<Option<f64>> {
    match boundary {
        Boundary::Dirichlet => {
            let (a, b) = (bessel::dirichlet_lambda1(), bessel::dirichlet_lambda2());
            vec![Some(a), Some(b), Some(b)]
        }
        Boundary::Neumann => {
            let b = bessel::neumann_lambda2();
            vec![Some(0.0), Some(b), Some(b)]
        }
        Boundary::Mixed(_) => vec![None, None, None],
    }
}

pub fn convergence_study(boundary: &Boundary, h_list: &[f64], cfg: &SolveConfig) -> Result<ConvergenceReport> {
    if h_list.is_empty() || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ExperimentError::Invalid("h list must be nonempty and decreasing".into()));
    }
    let k = cfg.k.max(3);
    let solved: Vec<Result<(f64, usize, Vec<f64>)>> = h_list
        .par_iter()
        .map(|&h| {
            let s = solve_boundary(boundary, &cfg.with_h(h), k)?;
            Ok((h, s.pair.dim(), s.eig.eigenvalues))
        })
        .collect();
    let rows = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let extrapolation = if rows.len() >= 3 {
        let t = &rows[rows.len() - 3..];
        let kk = t.iter().map(|r| r.2.len()).min().unwrap_or(0);
        (0..kk)
            .map(|i| richardson([t[0].0, t[1].0, t[2].0], [t[0].2[i], t[1].2[i], t[2].2[i]]))
            .collect()
    } else {
        Vec::new()
    };
    Ok(ConvergenceReport {
        rows,
        extrapolation,
        reference: reference_eigenvalues(boundary),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_quadratic_model() {
        let f = |h: f64| 3.0 + 0.7 * h * h;
        let r = richardson([0.4, 0.2, 0.1], [f(0.4), f(0.2), f(0.1)]);
        assert!((r.order - 2.0).abs() < 1e-9);
        assert!((r.limit - 3.0).abs() < 1e-12);
        assert!((r.error - 0.007).abs() < 1e-12);
        let g = |h: f64| 1.0 + h;
        let r = richardson([0.3, 0.2, 0.1], [g(0.3), g(0.2), g(0.1)]);
        assert!((r.order - 1.0).abs() < 1e-9);
        let flat = richardson([0.3, 0.2, 0.1], [1.0, 1.0, 1.0]);
        assert!(flat.order.is_nan());
        assert_eq!(flat.error, 0.0);
    }

    #[test]
    fn random_partitions_respect_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 1..=4 {
            for _ in 0..20 {
                let p = random_partition(&mut rng, m, PI);
                assert_eq!(p.component_count(), m);
                assert!((p.dirichlet_measure() - PI).abs() < 1e-9);
                assert!(p.gaps().iter().all(|g| g.to_radians() >= MIN_PIECE - 1e-12));
            }
        }
    }

    #[test]
    fn default_grid_is_the_129_point_grid() {
        let g = default_grid(Angle::PI);
        assert_eq!(g.len(), 129);
        assert!(g[128].eq_tol(Angle::pi_frac(1, 4)));
        let g = default_grid(Angle::pi_frac(1, 2));
        assert!(g[128].eq_tol(beta_max(Angle::pi_frac(1, 2))));
    }

    #[test]
    fn sweep_rejects_out_of_range_beta() {
        let cfg = SolveConfig::default().with_h(0.2);
        let err = sweep_beta(Angle::PI, &[Angle::pi_frac(1, 2)], &cfg, false).unwrap_err();
        assert!(matches!(err, ExperimentError::Invalid(_)));
    }

    #[test]
    fn coarse_sweep_shape() {
        let cfg = SolveConfig::default().with_h(0.1);
        let grid = beta_grid(16, 4);
        let recs = sweep_beta(Angle::PI, &grid, &cfg, false).unwrap();
        assert_eq!(recs.len(), 5);
        for r in &recs {
            assert!(r.lambda[0] < r.lambda[1] && r.lambda[1] <= r.lambda[2]);
            assert_eq!(r.domain_count, 2);
            assert!(!r.is_closed);
        }
        assert_eq!(argmin_lambda2(&recs), Some(4));
        assert!(lambda1_drops(&recs).is_empty());
        let csv = sweep_csv(&recs);
        assert_eq!(csv.lines().count(), 6);
        assert_eq!(
            csv.lines().nth(1).unwrap().split(',').count(),
            SWEEP_CSV_HEADER.split(',').count()
        );
        assert_eq!(csv, sweep_csv(&sweep_beta(Angle::PI, &grid, &cfg, false).unwrap()));
    }

    #[test]
    fn rearrangement_context_grid() {
        let cfg = SolveConfig::default().with_h(0.1);
        let ctx = RearrangementContext::new(Angle::PI, &cfg).unwrap();
        assert_eq!(ctx.mesh.angles().len() % 16, 0);
        let c = ctx.check(0.7, 0.4, 1.0, &cfg).unwrap();
        assert!((c.rayleigh_rearranged - c.rayleigh_u).abs() <= 1e-10);
        assert!(c.lambda_target <= c.rayleigh_rearranged + 1e-9);
    }
}
