//! Executes one resolved [`RunConfig`] and writes its artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use zaremba::analysis::NodalReport;
use zaremba::experiments::{
    self, argmin_lambda2, beta_grid, continuity_flags, default_grid, lambda1_drops, scan_csv, ExperimentError,
};
use zaremba::geometry::{Angle, Boundary};
use zaremba::plot::nodal_overlay_svg;

use crate::config::{Command, ConfigError, RunConfig};

#[derive(Debug)]
pub enum RunError {
    Usage(ConfigError),
    Experiment(ExperimentError),
    Io(io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "{e}"),
            RunError::Experiment(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Usage(e)
    }
}

impl From<ExperimentError> for RunError {
    fn from(e: ExperimentError) -> Self {
        RunError::Experiment(e)
    }
}

impl From<zaremba::analysis::AnalysisError> for RunError {
    fn from(e: zaremba::analysis::AnalysisError) -> Self {
        RunError::Experiment(e.into())
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Violated inequality checks found by the run; empty means success.
pub type Findings = Vec<String>;

fn write(dir: &Path, name: &str, body: &str) -> io::Result<()> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn grid(cfg: &RunConfig) -> Vec<Angle> {
    match cfg.grid {
        Some((den, max)) => beta_grid(den, max),
        None => default_grid(cfg.ell),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Findings, RunError> {
    fs::create_dir_all(&cfg.out)?;
    write(&cfg.out, "manifest.txt", &cfg.raw.manifest())?;
    let out = cfg.out.as_path();
    match cfg.command {
        Command::Solve => solve(cfg, out),
        Command::Sweep => sweep(cfg, out),
        Command::BetaC => beta_c(cfg, out),
        Command::Minimize => {
            let r = experiments::minimizer_scan(cfg.ell, cfg.samples, &cfg.solve, cfg.sample_seed, &grid(cfg))?;
            write(out, "minimize.csv", &scan_csv(&r.records))?;
            println!("{} partitions checked, {} findings", r.records.len(), r.findings.len());
            Ok(r.findings)
        }
        Command::Maximize => {
            let r = experiments::maximizer_scan(cfg.n, cfg.ell, cfg.samples, &cfg.solve, cfg.sample_seed)?;
            write(out, "maximize.csv", &scan_csv(&r.records))?;
            println!(
                "lambda1(Gamma_{}) = {:.10}; {} partitions checked, {} findings",
                cfg.n,
                r.records[0].baseline,
                r.records.len(),
                r.findings.len()
            );
            Ok(r.findings)
        }
        Command::Smear => {
            let r = experiments::smearing_limit(cfg.ell, &cfg.ns, &cfg.solve)?;
            write(out, "smear.csv", &scan_csv(&r.records))?;
            write(out, "smear.svg", &experiments::smearing_svg(&r))?;
            for note in &r.notes {
                log::warn!("{note}");
            }
            for rec in &r.records {
                println!("n = {:>2}  lambda1 = {:.10}  gap = {:.3e}", rec.n, rec.value, rec.margin);
            }
            Ok(r.findings)
        }
        Command::NodalAudit => {
            let r = experiments::nodal_line_audit(cfg.ell, &grid(cfg), &cfg.solve)?;
            write(out, "nodal_audit.csv", &r.csv())?;
            let closed = r.rows.iter().filter(|x| x.is_closed).count();
            println!("{} betas audited, {} closed before recheck, {} findings", r.rows.len(), closed, r.findings.len());
            Ok(r.findings)
        }
        Command::Converge => {
            let boundary = cfg.boundary()?;
            let r = experiments::convergence_study(&boundary, &cfg.h_list, &cfg.solve)?;
            let table = r.table();
            write(out, "converge.csv", &r.csv())?;
            write(out, "converge.txt", &table)?;
            write(out, "converge.svg", &r.svg("eigenvalues against h"))?;
            print!("{table}");
            Ok(Vec::new())
        }
    }
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<Findings, RunError> {
    let boundary = cfg.boundary()?;
    let s = experiments::solve_boundary(&boundary, &cfg.solve, cfg.solve.k)?;
    let mut csv = String::from("index,lambda,residual\n");
    for (i, (l, r)) in s.eig.eigenvalues.iter().zip(&s.eig.residuals).enumerate() {
        let _ = writeln!(csv, "{},{l:.12},{r:.3e}", i + 1);
        println!("lambda{} = {l:.10}", i + 1);
    }
    write(out, "solve.csv", &csv)?;
    if s.eig.eigenvalues.len() >= 2 {
        let u = s.vertex_values(1);
        let report = zaremba::analysis::nodal_domains(&s.mesh, &u)?;
        write(
            out,
            "nodal.csv",
            &format!("{}\n{}\n", NodalReport::CSV_HEADER, report.csv_fields()),
        )?;
        write(
            out,
            "nodal_u2.svg",
            &nodal_overlay_svg(
                "u2 nodal line",
                boundary.partition(),
                matches!(boundary, Boundary::Dirichlet),
                &report.nodal_line,
            ),
        )?;
    }
    Ok(Vec::new())
}

fn sweep(cfg: &RunConfig, out: &Path) -> Result<Findings, RunError> {
    let records = experiments::sweep_beta(cfg.ell, &grid(cfg), &cfg.solve, cfg.estimate_tol)?;
    write(out, "sweep.csv", &experiments::sweep_csv(&records))?;
    write(out, "sweep.svg", &experiments::sweep_svg(&records, cfg.ell))?;
    let mut findings = Vec::new();
    for i in lambda1_drops(&records) {
        findings.push(format!(
            "lambda1 decreases between beta = {:.9} and {:.9}",
            records[i].beta,
            records[i + 1].beta
        ));
    }
    for r in records.iter().filter(|r| r.domain_count != 2) {
        findings.push(format!("beta = {:.9}: u2 has {} nodal domains", r.beta, r.domain_count));
    }
    for (i, k) in continuity_flags(&records) {
        log::warn!(
            "lambda{} changes steeply between beta = {:.9} and {:.9}",
            k + 1,
            records[i].beta,
            records[i + 1].beta
        );
    }
    if let Some(i) = argmin_lambda2(&records) {
        println!(
            "{} betas; min lambda2 = {:.10} at beta = {:.9}",
            records.len(),
            records[i].lambda[1],
            records[i].beta
        );
    }
    Ok(findings)
}

fn beta_c(cfg: &RunConfig, out: &Path) -> Result<Findings, RunError> {
    let r = experiments::find_beta_c(
        cfg.ell,
        (cfg.lo.to_radians(), cfg.hi.to_radians()),
        cfg.tol_beta,
        &cfg.solve,
    )?;
    let text = format!(
        "beta_c = {:.12}\nbracket_lo = {:.12}\nbracket_hi = {:.12}\nclass_lo = {}\nclass_hi = {}\n\
         gap_at_c = {:.6e}\ngap_lo = {:.6e}\ngap_hi = {:.6e}\nevaluations = {}\n",
        r.beta_c,
        r.bracket.0,
        r.bracket.1,
        r.class_lo,
        r.class_hi,
        r.gap_at_c,
        r.gap_lo,
        r.gap_hi,
        r.evaluations
    );
    write(out, "beta_c.txt", &text)?;
    print!("{text}");
    Ok(Vec::new())
}
