//! Flat `key = value` run configuration: defaults, then the config file,
//! then command-line flags. The resolved map is what the manifest records.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use zaremba::experiments::SolveConfig;
use zaremba::geometry::{
    make_gamma, make_two_component, make_uniform, Angle, Arc, Boundary, BoundaryPartition, GammaParams,
};
use zaremba::mesh::MAX_GRADING_LEVELS;

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("command", "", "solve | sweep | beta-c | minimize | maximize | smear | nodal-audit | converge"),
    ("family", "auto", "gamma | uniform | two | arcs | dirichlet | neumann (auto: gamma, or dirichlet for converge)"),
    ("ell", "pi", "total Dirichlet length"),
    ("beta", "1/4pi", "Gamma(beta) parameter"),
    ("n", "2", "arc count for the uniform family and the maximizer scan"),
    ("a", "1/2pi", "shorter arc of the two-arc family"),
    ("b", "1/2pi", "shorter gap of the two-arc family"),
    ("rotation", "0", "rotation applied to the two-arc family"),
    ("arcs", "", "explicit arcs as start:length;start:length"),
    ("h", "0.05", "nominal mesh size"),
    ("grading_levels", "6", "minimum geometric layers toward each junction"),
    ("grading_ratio", "0.5", "layer ratio of the junction grading"),
    ("k", "4", "eigenpairs per solve"),
    ("tol", "1e-8", "eigen residual tolerance"),
    ("seed", "20180706", "seed of the eigensolver starting block"),
    ("junctions_dirichlet", "true", "treat junction vertices as Dirichlet"),
    ("grid_den", "", "beta grid i*pi/grid_den (empty: the 129-point default)"),
    ("grid_max", "", "largest i of the beta grid"),
    ("estimate_tol", "true", "Richardson tolerance on sweep records"),
    ("lo", "0", "lower end of the beta_c bracket"),
    ("hi", "1/4pi", "upper end of the beta_c bracket"),
    ("tol_beta", "1e-3", "bisection width for beta_c"),
    ("samples", "50", "random partitions per scan"),
    ("sample_seed", "1", "seed of the random partitions"),
    ("n_max", "16", "largest n of the smearing scan"),
    ("ns", "", "explicit n list for the smearing scan, comma separated"),
    ("h_list", "0.1,0.05,0.025", "decreasing mesh sizes for converge"),
    ("out", "zaremba-out", "output directory"),
    ("workers", "0", "worker threads (0: one per core)"),
];

/// Keys a manifest may carry besides [`KEYS`].
const INFORMATIONAL: &[&str] = &["version"];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    BetaC,
    Minimize,
    Maximize,
    Smear,
    NodalAudit,
    Converge,
}

impl Command {
    pub const ALL: [(&'static str, Command); 8] = [
        ("solve", Command::Solve),
        ("sweep", Command::Sweep),
        ("beta-c", Command::BetaC),
        ("minimize", Command::Minimize),
        ("maximize", Command::Maximize),
        ("smear", Command::Smear),
        ("nodal-audit", Command::NodalAudit),
        ("converge", Command::Converge),
    ];

    pub fn parse(s: &str) -> Result<Command, ConfigError> {
        Command::ALL
            .iter()
            .find(|(n, _)| *n == s)
            .map(|&(_, c)| c)
            .ok_or_else(|| bad(format!("unknown command `{s}`")))
    }
}

/// Resolved `key -> value` strings.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn defaults() -> RawConfig {
        RawConfig {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }

    /// Overlays a config file. Unknown and repeated keys are errors.
    pub fn merge_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", no + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(bad(format!("line {}: repeated key `{k}`", no + 1)));
            }
            if INFORMATIONAL.contains(&k) {
                continue;
            }
            self.set(k, v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            return Err(bad(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    /// Manifest text: every resolved key plus the crate version.
    pub fn manifest(&self) -> String {
        let mut s = format!("version = {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gamma,
    Uniform,
    Two,
    Arcs,
    Dirichlet,
    Neumann,
}

/// Typed view of a [`RawConfig`].
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub family: Family,
    pub ell: Angle,
    pub beta: Angle,
    pub n: usize,
    pub a: Angle,
    pub b: Angle,
    pub rotation: Angle,
    pub arcs: String,
    pub solve: SolveConfig,
    pub grid: Option<(i64, i64)>,
    pub estimate_tol: bool,
    pub lo: Angle,
    pub hi: Angle,
    pub tol_beta: f64,
    pub samples: usize,
    pub sample_seed: u64,
    pub ns: Vec<usize>,
    pub h_list: Vec<f64>,
    pub out: PathBuf,
    pub workers: usize,
    pub raw: RawConfig,
}

fn num<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<T, ConfigError> {
    raw.get(key)
        .parse()
        .map_err(|_| bad(format!("`{key}`: cannot parse `{}`", raw.get(key))))
}

fn angle(raw: &RawConfig, key: &str) -> Result<Angle, ConfigError> {
    raw.get(key)
        .parse()
        .map_err(|_| bad(format!("`{key}`: cannot parse angle `{}`", raw.get(key))))
}

fn boolean(raw: &RawConfig, key: &str) -> Result<bool, ConfigError> {
    match raw.get(key) {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        v => Err(bad(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn list<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<Vec<T>, ConfigError> {
    raw.get(key)
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad(format!("`{key}`: cannot parse `{s}`"))))
        .collect()
}

impl RunConfig {
    /// Resolves `auto` values in `raw` and checks every range.
    pub fn from_raw(mut raw: RawConfig) -> Result<RunConfig, ConfigError> {
        if raw.get("command").is_empty() {
            return Err(bad("no command given (positional argument or `command` key)"));
        }
        let command = Command::parse(raw.get("command"))?;
        if raw.get("family") == "auto" {
            let f = if command == Command::Converge { "dirichlet" } else { "gamma" };
            raw.set("family", f)?;
        }
        let family = match raw.get("family") {
            "gamma" => Family::Gamma,
            "uniform" => Family::Uniform,
            "two" => Family::Two,
            "arcs" => Family::Arcs,
            "dirichlet" => Family::Dirichlet,
            "neumann" => Family::Neumann,
            f => return Err(bad(format!("unknown family `{f}`"))),
        };

        let h: f64 = num(&raw, "h")?;
        if !(h > 0.0 && h <= 1.0) {
            return Err(bad(format!("`h` = {h} outside (0, 1]")));
        }
        let grading_levels: usize = num(&raw, "grading_levels")?;
        if grading_levels > MAX_GRADING_LEVELS {
            return Err(bad(format!("`grading_levels` exceeds {MAX_GRADING_LEVELS}")));
        }
        let grading_ratio: f64 = num(&raw, "grading_ratio")?;
        if !(grading_ratio > 0.0 && grading_ratio < 1.0) {
            return Err(bad("`grading_ratio` outside (0, 1)"));
        }
        let k: usize = num(&raw, "k")?;
        if k == 0 {
            return Err(bad("`k` must be at least 1"));
        }
        let tol: f64 = num(&raw, "tol")?;
        if !(1e-12..=1e-4).contains(&tol) {
            return Err(bad("`tol` outside [1e-12, 1e-4]"));
        }
        let solve = SolveConfig {
            h,
            grading_levels,
            grading_ratio,
            k,
            tol,
            seed: num(&raw, "seed")?,
            junctions_dirichlet: boolean(&raw, "junctions_dirichlet")?,
        };

        let grid = match (raw.get("grid_den"), raw.get("grid_max")) {
            ("", "") => None,
            ("", _) | (_, "") => return Err(bad("`grid_den` and `grid_max` go together")),
            _ => {
                let den: i64 = num(&raw, "grid_den")?;
                let max: i64 = num(&raw, "grid_max")?;
                if den <= 0 || max < 0 {
                    return Err(bad("`grid_den` must be positive and `grid_max` nonnegative"));
                }
                Some((den, max))
            }
        };
        let tol_beta: f64 = num(&raw, "tol_beta")?;
        if !(tol_beta > 0.0) {
            return Err(bad("`tol_beta` must be positive"));
        }
        let samples: usize = num(&raw, "samples")?;
        let n: usize = num(&raw, "n")?;
        if n == 0 {
            return Err(bad("`n` must be at least 1"));
        }
        let ns: Vec<usize> = if raw.get("ns").is_empty() {
            let n_max: usize = num(&raw, "n_max")?;
            if !(1..=64).contains(&n_max) {
                return Err(bad("`n_max` outside 1..=64"));
            }
            (1..=n_max).collect()
        } else {
            list(&raw, "ns")?
        };
        let h_list: Vec<f64> = list(&raw, "h_list")?;
        if h_list.is_empty() || h_list.iter().any(|&x| !(x > 0.0 && x <= 1.0)) || h_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("`h_list` must be decreasing values in (0, 1]"));
        }

        Ok(RunConfig {
            command,
            family,
            ell: angle(&raw, "ell")?,
            beta: angle(&raw, "beta")?,
            n,
            a: angle(&raw, "a")?,
            b: angle(&raw, "b")?,
            rotation: angle(&raw, "rotation")?,
            arcs: raw.get("arcs").to_string(),
            solve,
            grid,
            estimate_tol: boolean(&raw, "estimate_tol")?,
            lo: angle(&raw, "lo")?,
            hi: angle(&raw, "hi")?,
            tol_beta,
            samples,
            sample_seed: num(&raw, "sample_seed")?,
            ns,
            h_list,
            out: PathBuf::from(raw.get("out")),
            workers: num(&raw, "workers")?,
            raw,
        })
    }

    /// Boundary selected by `family`. Geometry errors are usage errors.
    pub fn boundary(&self) -> Result<Boundary, ConfigError> {
        let g = |e: zaremba::geometry::GeometryError| bad(e.to_string());
        Ok(match self.family {
            Family::Dirichlet => Boundary::Dirichlet,
            Family::Neumann => Boundary::Neumann,
            Family::Gamma => make_gamma(GammaParams::new(self.ell, self.beta).map_err(g)?).into(),
            Family::Uniform => make_uniform(self.n, self.ell).map_err(g)?.into(),
            Family::Two => make_two_component(self.a, self.b, self.ell)
                .map_err(g)?
                .rotated(self.rotation)
                .into(),
            Family::Arcs => {
                let mut arcs = Vec::new();
                for part in self.arcs.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (s, l) = part
                        .split_once(':')
                        .ok_or_else(|| bad(format!("`arcs`: expected start:length, got `{part}`")))?;
                    let s: Angle = s.trim().parse().map_err(g)?;
                    let l: Angle = l.trim().parse().map_err(g)?;
                    arcs.push(Arc::new(s, l).map_err(g)?);
                }
                BoundaryPartition::from_arcs(arcs).map_err(g)?.into()
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use zaremba::eig::DEFAULT_SEED;
    use zaremba::experiments::DEFAULT_SOLVE_TOL;
    use zaremba::mesh::{DEFAULT_GRADING_LEVELS, DEFAULT_GRADING_RATIO};

    #[test]
    fn defaults_match_library_constants() {
        let raw = RawConfig::defaults();
        assert_eq!(raw.get("seed"), DEFAULT_SEED.to_string());
        assert_eq!(raw.get("grading_levels"), DEFAULT_GRADING_LEVELS.to_string());
        assert_eq!(raw.get("grading_ratio").parse::<f64>().unwrap(), DEFAULT_GRADING_RATIO);
        assert_eq!(raw.get("tol").parse::<f64>().unwrap(), DEFAULT_SOLVE_TOL);
    }

    #[test]
    fn file_then_override() {
        let mut raw = RawConfig::defaults();
        raw.merge_text("# comment\ncommand = sweep\nh = 0.1  # coarse\n").unwrap();
        raw.set("h", "0.2").unwrap();
        let cfg = RunConfig::from_raw(raw).unwrap();
        assert_eq!(cfg.command, Command::Sweep);
        assert_eq!(cfg.solve.h, 0.2);
        assert_eq!(cfg.family, Family::Gamma);
    }

    #[test]
    fn rejects_unknown_and_repeated_keys() {
        let mut raw = RawConfig::defaults();
        assert!(raw.merge_text("colour = red\n").is_err());
        assert!(raw.merge_text("h = 0.1\nh = 0.2\n").is_err());
        assert!(raw.merge_text("just text\n").is_err());
        assert!(raw.merge_text("version = 9.9.9\n").is_ok());
    }

    #[test]
    fn manifest_round_trips() {
        let mut raw = RawConfig::defaults();
        raw.set("command", "smear").unwrap();
        raw.set("ell", "3/4pi").unwrap();
        let mut again = RawConfig::defaults();
        again.merge_text(&raw.manifest()).unwrap();
        assert_eq!(again.manifest(), raw.manifest());
    }

    #[test]
    fn range_checks() {
        for (k, v) in [("h", "0"), ("h", "2"), ("tol", "1e-2"), ("k", "0"), ("grading_levels", "13"), ("h_list", "0.1,0.2")] {
            let mut raw = RawConfig::defaults();
            raw.set("command", "solve").unwrap();
            raw.set(k, v).unwrap();
            assert!(RunConfig::from_raw(raw).is_err(), "{k} = {v}");
        }
    }

    #[test]
    fn families() {
        let mut raw = RawConfig::defaults();
        raw.set("command", "solve").unwrap();
        raw.set("family", "arcs").unwrap();
        raw.set("arcs", "0:1/2pi; pi:1/2pi").unwrap();
        let cfg = RunConfig::from_raw(raw).unwrap();
        let b = cfg.boundary().unwrap();
        assert_eq!(b.partition().unwrap().component_count(), 2);

        let mut raw = RawConfig::defaults();
        raw.set("command", "converge").unwrap();
        let cfg = RunConfig::from_raw(raw).unwrap();
        assert_eq!(cfg.family, Family::Dirichlet);
    }
}
