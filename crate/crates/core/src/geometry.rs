//! Dirichlet arcs on the unit circle and the named partition families.
//!
//! Angles are carried as exact rational multiples of π whenever every input
//! to a constructor is exact, so endpoint classification for the standard
//! families never suffers from mod-2π drift. Scanned and random parameters
//! fall back to plain radians.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, ToPrimitive, Zero};
use thiserror::Error;

/// Two float angles closer than this are the same point of the circle.
pub const ANGLE_TOL: f64 = 1e-12;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("arcs overlap near angle {0}")]
    Overlap(f64),
    #[error("cannot parse angle {0:?}")]
    Parse(String),
}

/// An angle, either an exact multiple of π or a float in radians.
#[derive(Clone, Copy, Debug)]
pub enum Angle {
    /// `Exact(r)` is the angle `r·π`.
    Exact(Ratio<i64>),
    Radians(f64),
}

impl Angle {
    pub const ZERO: Angle = Angle::Exact(Ratio::new_raw(0, 1));
    pub const PI: Angle = Angle::Exact(Ratio::new_raw(1, 1));
    pub const TWO_PI: Angle = Angle::Exact(Ratio::new_raw(2, 1));

    /// `num/den · π`.
    pub fn pi_frac(num: i64, den: i64) -> Angle {
        Angle::Exact(Ratio::new(num, den))
    }

    pub fn radians(value: f64) -> Angle {
        Angle::Radians(value)
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Angle::Exact(_))
    }

    pub fn to_radians(self) -> f64 {
        match self {
            Angle::Exact(r) => r.to_f64().unwrap_or(f64::NAN) * PI,
            Angle::Radians(x) => x,
        }
    }

    /// Representative in `[0, 2π)`.
    pub fn normalized(self) -> Angle {
        match self {
            Angle::Exact(r) => {
                let two = Ratio::from_integer(2);
                let k = (r / two).floor();
                match k.checked_mul(&two).and_then(|m| r.checked_sub(&m)) {
                    Some(v) => Angle::Exact(v),
                    None => Angle::Radians(wrap(self.to_radians())),
                }
            }
            Angle::Radians(x) => Angle::Radians(wrap(x)),
        }
    }

    /// Three-way comparison; float comparisons treat values within
    /// [`ANGLE_TOL`] as equal.
    pub fn cmp_tol(self, other: Angle) -> Ordering {
        if let (Angle::Exact(a), Angle::Exact(b)) = (self, other) {
            return a.cmp(&b);
        }
        let (a, b) = (self.to_radians(), other.to_radians());
        if (a - b).abs() <= ANGLE_TOL {
            Ordering::Equal
        } else if a < b {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn eq_tol(self, other: Angle) -> bool {
        self.cmp_tol(other) == Ordering::Equal
    }

    /// Same point on the circle (equality mod 2π).
    pub fn same_point(self, other: Angle) -> bool {
        let d = (self - other).normalized();
        d.eq_tol(Angle::ZERO) || d.eq_tol(Angle::TWO_PI)
    }

    pub fn is_zero(self) -> bool {
        self.eq_tol(Angle::ZERO)
    }

    fn combine(
        self,
        other: Angle,
        exact: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        float: impl Fn(f64, f64) -> f64,
    ) -> Angle {
        if let (Angle::Exact(a), Angle::Exact(b)) = (self, other) {
            if let Some(r) = exact(&a, &b) {
                return Angle::Exact(r);
            }
        }
        Angle::Radians(float(self.to_radians(), other.to_radians()))
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TWO_PI);
    if y >= TWO_PI {
        0.0
    } else {
        y
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        self.combine(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        self.combine(rhs, |a, b| a.checked_sub(b), |a, b| a - b)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        match self {
            Angle::Exact(r) => Angle::Exact(-r),
            Angle::Radians(x) => Angle::Radians(-x),
        }
    }
}

impl Mul<i64> for Angle {
    type Output = Angle;
    fn mul(self, rhs: i64) -> Angle {
        match self {
            Angle::Exact(r) => match r.checked_mul(&Ratio::from_integer(rhs)) {
                Some(v) => Angle::Exact(v),
                None => Angle::Radians(self.to_radians() * rhs as f64),
            },
            Angle::Radians(x) => Angle::Radians(x * rhs as f64),
        }
    }
}

impl Div<i64> for Angle {
    type Output = Angle;
    fn div(self, rhs: i64) -> Angle {
        match self {
            Angle::Exact(r) => match r.checked_mul(&Ratio::new(1, rhs)) {
                Some(v) => Angle::Exact(v),
                None => Angle::Radians(self.to_radians() / rhs as f64),
            },
            Angle::Radians(x) => Angle::Radians(x / rhs as f64),
        }
    }
}

impl From<f64> for Angle {
    fn from(x: f64) -> Angle {
        Angle::Radians(x)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Exact(r) if r.is_zero() => write!(f, "0"),
            Angle::Exact(r) if *r.denom() == 1 => write!(f, "{}pi", r.numer()),
            Angle::Exact(r) => write!(f, "{}/{}pi", r.numer(), r.denom()),
            Angle::Radians(x) => write!(f, "{x:.16e}"),
        }
    }
}

/// Parses `1.25`, `pi`, `-pi`, `3pi`, `0.25pi`, `350/1024pi`, `pi/4`.
/// Anything carrying a `pi` suffix with a finite decimal or fractional
/// coefficient becomes exact.
impl FromStr for Angle {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Angle, GeometryError> {
        let err = || GeometryError::Parse(s.to_string());
        let t = s.trim();
        if let Some(idx) = t.find("pi") {
            let (coef, rest) = (&t[..idx], &t[idx + 2..]);
            let mut r = match coef {
                "" | "+" => Ratio::from_integer(1),
                "-" => Ratio::from_integer(-1),
                c => parse_ratio(c).ok_or_else(err)?,
            };
            if !rest.is_empty() {
                let den = rest.strip_prefix('/').ok_or_else(err)?;
                let den: i64 = den.parse().map_err(|_| err())?;
                if den == 0 {
                    return Err(err());
                }
                r /= Ratio::from_integer(den);
            }
            Ok(Angle::Exact(r))
        } else {
            let x: f64 = t.parse().map_err(|_| err())?;
            if !x.is_finite() {
                return Err(err());
            }
            Ok(Angle::Radians(x))
        }
    }
}

fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_ratio(p)?;
        let q = parse_ratio(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(p / q);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 15 {
        return None;
    }
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let int_v: i64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    let num = int_v.checked_mul(den)?.checked_add(frac_v)?;
    Some(Ratio::new(if neg { -num } else { num }, den))
}

/// Which boundary condition holds at a point of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    Dirichlet,
    Neumann,
    /// An endpoint of a Dirichlet arc.
    Endpoint,
}

/// An arc of the unit circle running counterclockwise from `start`.
#[derive(Clone, Copy, Debug)]
pub struct Arc {
    start: Angle,
    length: Angle,
}

impl Arc {
    pub fn new(start: Angle, length: Angle) -> Result<Arc, GeometryError> {
        if length.cmp_tol(Angle::ZERO) != Ordering::Greater
            || length.cmp_tol(Angle::TWO_PI) == Ordering::Greater
        {
            return Err(GeometryError::Domain(format!(
                "arc length {} outside (0, 2pi]",
                length.to_radians()
            )));
        }
        Ok(Arc {
            start: start.normalized(),
            length,
        })
    }

    pub fn start(&self) -> Angle {
        self.start
    }

    pub fn length(&self) -> Angle {
        self.length
    }

    /// End angle, not reduced mod 2π (may exceed 2π).
    pub fn end(&self) -> Angle {
        self.start + self.length
    }

    pub fn midpoint(&self) -> Angle {
        (self.start + self.length / 2).normalized()
    }

    fn classify(&self, theta: Angle) -> Condition {
        let t = (theta - self.start).normalized();
        if t.is_zero() || t.eq_tol(self.length) || t.eq_tol(Angle::TWO_PI) {
            Condition::Endpoint
        } else if t.cmp_tol(self.length) == Ordering::Less {
            Condition::Dirichlet
        } else {
            Condition::Neumann
        }
    }
}

/// A Dirichlet set made of finitely many disjoint open arcs, stored in
/// canonical form: arcs sorted by normalized start, touching arcs merged.
#[derive(Clone, Debug)]
pub struct BoundaryPartition {
    arcs: Vec<Arc>,
    total: Angle,
}

impl BoundaryPartition {
    /// Builds a canonical partition. Zero-length pieces are dropped and
    /// arcs whose closures touch are merged.
    pub fn from_arcs(arcs: impl IntoIterator<Item = Arc>) -> Result<Self, GeometryError> {
        let mut arcs: Vec<Arc> = arcs.into_iter().collect();
        arcs.sort_by(|a, b| a.start.cmp_tol(b.start));

        let mut merged: Vec<Arc> = Vec::with_capacity(arcs.len());
        for arc in arcs {
            if let Some(last) = merged.last_mut() {
                match arc.start.cmp_tol(last.end()) {
                    Ordering::Less => return Err(GeometryError::Overlap(arc.start.to_radians())),
                    Ordering::Equal => {
                        last.length = last.length + arc.length;
                        continue;
                    }
                    Ordering::Greater => {}
                }
            }
            merged.push(arc);
        }
        // Wrap-around: the last arc may run past 2π into the first one.
        if merged.len() > 1 {
            let first_start = merged[0].start + Angle::TWO_PI;
            let last = *merged.last().unwrap();
            match last.end().cmp_tol(first_start) {
                Ordering::Greater => {
                    return Err(GeometryError::Overlap(merged[0].start.to_radians()))
                }
                Ordering::Equal => {
                    let first = merged.remove(0);
                    let last = merged.last_mut().unwrap();
                    last.length = last.length + first.length;
                }
                Ordering::Less => {}
            }
        }

        let total = merged
            .iter()
            .fold(Angle::ZERO, |acc, a| acc + a.length);
        if total.cmp_tol(Angle::ZERO) != Ordering::Greater
            || total.cmp_tol(Angle::TWO_PI) != Ordering::Less
        {
            return Err(GeometryError::Domain(format!(
                "total Dirichlet length {} outside (0, 2pi)",
                total.to_radians()
            )));
        }
        Ok(BoundaryPartition {
            arcs: merged,
            total,
        })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn component_count(&self) -> usize {
        self.arcs.len()
    }

    /// The stored total length ℓ.
    pub fn total_length(&self) -> Angle {
        self.total
    }

    /// Sum of the arc lengths.
    pub fn dirichlet_measure(&self) -> f64 {
        self.arcs.iter().map(|a| a.length.to_radians()).sum()
    }

    pub fn neumann_measure(&self) -> f64 {
        TWO_PI - self.dirichlet_measure()
    }

    pub fn contains(&self, theta: impl Into<Angle>) -> Condition {
        let theta = theta.into();
        let mut result = Condition::Neumann;
        for arc in &self.arcs {
            match arc.classify(theta) {
                Condition::Endpoint => return Condition::Endpoint,
                Condition::Dirichlet => result = Condition::Dirichlet,
                Condition::Neumann => {}
            }
        }
        result
    }

    /// All arc endpoints, normalized to `[0, 2π)`.
    pub fn junctions(&self) -> Vec<Angle> {
        let mut out = Vec::with_capacity(2 * self.arcs.len());
        for a in &self.arcs {
            out.push(a.start);
            out.push(a.end().normalized());
        }
        out
    }

    /// Lengths of the Neumann gaps; gap `i` follows arc `i`.
    pub fn gaps(&self) -> Vec<Angle> {
        let n = self.arcs.len();
        (0..n)
            .map(|i| {
                let next = if i + 1 < n {
                    self.arcs[i + 1].start
                } else {
                    self.arcs[0].start + Angle::TWO_PI
                };
                next - self.arcs[i].end()
            })
            .collect()
    }

    pub fn rotated(&self, by: Angle) -> BoundaryPartition {
        Self::from_arcs(self.arcs.iter().map(|a| Arc {
            start: (a.start + by).normalized(),
            length: a.length,
        }))
        .expect("rotation preserves validity")
    }

    /// Image under the reflection θ ↦ −θ.
    pub fn reflected(&self) -> BoundaryPartition {
        Self::from_arcs(self.arcs.iter().map(|a| Arc {
            start: (-a.end()).normalized(),
            length: a.length,
        }))
        .expect("reflection preserves validity")
    }

    /// Pointwise comparison on `samples` equally spaced angles.
    pub fn agrees_on_grid(&self, other: &BoundaryPartition, samples: usize) -> bool {
        (0..samples).all(|i| {
            let t = Angle::radians(TWO_PI * i as f64 / samples as f64);
            self.contains(t) == other.contains(t)
        })
    }

    /// Plain-text form: one `start length` pair per line, radians, 17
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for a in &self.arcs {
            s.push_str(&format!(
                "{:.16e} {:.16e}\n",
                a.start.to_radians(),
                a.length.to_radians()
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<BoundaryPartition, GeometryError> {
        let mut arcs = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(s), Some(l), None) = (it.next(), it.next(), it.next()) else {
                return Err(GeometryError::Parse(line.to_string()));
            };
            let s: Angle = s.parse()?;
            let l: Angle = l.parse()?;
            arcs.push(Arc::new(s, l)?);
        }
        Self::from_arcs(arcs)
    }
}

/// Boundary condition on the whole circle.
#[derive(Clone, Debug)]
pub enum Boundary {
    Dirichlet,
    Neumann,
    Mixed(BoundaryPartition),
}

impl Boundary {
    pub fn classify(&self, theta: impl Into<Angle>) -> Condition {
        match self {
            Boundary::Dirichlet => Condition::Dirichlet,
            Boundary::Neumann => Condition::Neumann,
            Boundary::Mixed(p) => p.contains(theta),
        }
    }

    pub fn junctions(&self) -> Vec<Angle> {
        match self {
            Boundary::Mixed(p) => p.junctions(),
            _ => Vec::new(),
        }
    }

    pub fn dirichlet_measure(&self) -> f64 {
        match self {
            Boundary::Dirichlet => TWO_PI,
            Boundary::Neumann => 0.0,
            Boundary::Mixed(p) => p.dirichlet_measure(),
        }
    }

    pub fn partition(&self) -> Option<&BoundaryPartition> {
        match self {
            Boundary::Mixed(p) => Some(p),
            _ => None,
        }
    }
}

impl From<BoundaryPartition> for Boundary {
    fn from(p: BoundaryPartition) -> Boundary {
        Boundary::Mixed(p)
    }
}

/// Parameters of the symmetric two-arc family Γ(β).
#[derive(Clone, Copy, Debug)]
pub struct GammaParams {
    ell: Angle,
    beta: Angle,
}

impl GammaParams {
    pub fn new(ell: Angle, beta: Angle) -> Result<GammaParams, GeometryError> {
        check_ell(ell)?;
        let max = beta_max(ell);
        if beta.cmp_tol(Angle::ZERO) == Ordering::Less || beta.cmp_tol(max) == Ordering::Greater {
            return Err(GeometryError::Domain(format!(
                "beta = {} outside [0, {}]",
                beta.to_radians(),
                max.to_radians()
            )));
        }
        Ok(GammaParams { ell, beta })
    }

    pub fn ell(&self) -> Angle {
        self.ell
    }

    pub fn beta(&self) -> Angle {
        self.beta
    }
}

/// Upper end `(2π − ℓ)/4` of the Γ(β) parameter interval.
pub fn beta_max(ell: Angle) -> Angle {
    (Angle::TWO_PI - ell) / 4
}

fn check_ell(ell: Angle) -> Result<(), GeometryError> {
    if ell.cmp_tol(Angle::ZERO) != Ordering::Greater
        || ell.cmp_tol(Angle::TWO_PI) != Ordering::Less
    {
        return Err(GeometryError::Domain(format!(
            "ell = {} outside (0, 2pi)",
            ell.to_radians()
        )));
    }
    Ok(())
}

/// Γ(β): Dirichlet on `[β, ℓ/2 + β]` and its mirror `[−ℓ/2 − β, −β]`.
/// The Neumann gaps are `(−β, β)` and the arc of length `2π − ℓ − 2β`
/// centred at π.
pub fn make_gamma(params: GammaParams) -> BoundaryPartition {
    let GammaParams { ell, beta } = params;
    let half = ell / 2;
    let upper = Arc {
        start: beta.normalized(),
        length: half,
    };
    let lower = Arc {
        start: (-(half + beta)).normalized(),
        length: half,
    };
    BoundaryPartition::from_arcs([upper, lower]).expect("Γ(β) is a valid partition")
}

/// Γₙ: `n` arcs of length `ℓ/n` centred at `(2k + 1)π/n`.
pub fn make_uniform(n: usize, ell: Angle) -> Result<BoundaryPartition, GeometryError> {
    check_ell(ell)?;
    if n == 0 {
        return Err(GeometryError::Domain("n must be positive".into()));
    }
    let n = n as i64;
    let piece = ell / n;
    let arcs = (0..n).map(|k| Arc {
        start: (Angle::PI * (2 * k + 1) / n - piece / 2).normalized(),
        length: piece,
    });
    BoundaryPartition::from_arcs(arcs)
}

/// Two arcs of lengths `a` and `ℓ − a` separated by gaps `gap_b` and
/// `2π − ℓ − gap_b`: the arc of length `a` is `[0, a]`, the other starts
/// at `a + gap_b`.
pub fn make_two_component(
    a: Angle,
    gap_b: Angle,
    ell: Angle,
) -> Result<BoundaryPartition, GeometryError> {
    check_ell(ell)?;
    let a_max = ell / 2;
    let b_max = (Angle::TWO_PI - ell) / 2;
    if a.cmp_tol(Angle::ZERO) == Ordering::Less || a.cmp_tol(a_max) == Ordering::Greater {
        return Err(GeometryError::Domain(format!(
            "a = {} outside [0, ell/2]",
            a.to_radians()
        )));
    }
    if gap_b.cmp_tol(Angle::ZERO) == Ordering::Less || gap_b.cmp_tol(b_max) == Ordering::Greater {
        return Err(GeometryError::Domain(format!(
            "gap_b = {} outside [0, (2pi - ell)/2]",
            gap_b.to_radians()
        )));
    }
    let mut arcs = Vec::with_capacity(2);
    if a.cmp_tol(Angle::ZERO) == Ordering::Greater {
        arcs.push(Arc {
            start: Angle::ZERO,
            length: a,
        });
    }
    arcs.push(Arc {
        start: (a + gap_b).normalized(),
        length: ell - a,
    });
    BoundaryPartition::from_arcs(arcs)
}
