//! Scheme configuration and the flat key-value config file format.
//!
//! ```text
//! # comment
//! variant = repb            # epb | repb
//! lambda = 1e-4
//! cfl = 0.5
//! n_cells = 2000
//! x_min = -0.2
//! x_max = 0.2
//! t_end = 0.2
//! boundary = fictitious 1 1 1 -1   # or: periodic, outflow   (n_l q_l n_r q_r)
//! newton.tol = 1e-12
//! newton.max_iter = 50
//! dissipation = subsystem   # or: acoustic
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::state::Conserved;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Pressureless transport with the implicit electric force `n D phi`.
    Epb,
    /// Isothermal transport with the `lambda^2` dispersive stress.
    Repb,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Epb, Variant::Repb];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Epb => "epb",
            Variant::Repb => "repb",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "epb" => Ok(Variant::Epb),
            "repb" => Ok(Variant::Repb),
            other => Err(format!("unknown variant `{other}` (expected epb or repb)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Constant ghost states outside the left and right ends.
    FictitiousStates {
        left: Conserved,
        right: Conserved,
    },
    /// Ghost density extrapolated in `ln n`, ghost velocity linearly.
    /// The potential uses `FieldBoundary::Extrapolated`.
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessPolicy {
    PreviousPotential,
    QuasiNeutral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonParams {
    /// Max-norm residual tolerance.
    pub tol_residual: f64,
    pub max_iter: usize,
    pub guess_policy: GuessPolicy,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            tol_residual: 1e-12,
            max_iter: 50,
            guess_policy: GuessPolicy::PreviousPotential,
        }
    }
}

/// Sound speed entering the Rusanov dissipation.
///
/// `Subsystem` uses the transport system's own speed: unit for the isothermal
/// (REPB) fluxes, zero for the pressureless (EPB) ones. `Acoustic` uses the
/// unit sound speed for both. The time step always uses the unit speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissipation {
    #[default]
    Subsystem,
    Acoustic,
}

impl Dissipation {
    pub fn sound_speed(self, variant: Variant) -> f64 {
        match (self, variant) {
            (Dissipation::Subsystem, Variant::Epb) => 0.0,
            _ => 1.0,
        }
    }
}

impl FromStr for Dissipation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "subsystem" => Ok(Dissipation::Subsystem),
            "acoustic" => Ok(Dissipation::Acoustic),
            other => Err(format!(
                "unknown dissipation `{other}` (expected subsystem or acoustic)"
            )),
        }
    }
}

/// Whether the momentum source stage runs after the Poisson solve.
///
/// `Disabled` with the REPB variant is the plain isothermal Euler scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceTreatment {
    Coupled,
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub variant: Variant,
    /// Scaled Debye length.
    pub lambda: f64,
    pub cfl: f64,
    pub boundary: Boundary,
    pub newton: NewtonParams,
    pub sources: SourceTreatment,
    pub dissipation: Dissipation,
}

pub const DEFAULT_CFL: f64 = 0.5;

impl SchemeConfig {
    pub fn new(variant: Variant, lambda: f64, boundary: Boundary) -> Self {
        Self {
            variant,
            lambda,
            cfl: DEFAULT_CFL,
            boundary,
            newton: NewtonParams::default(),
            sources: SourceTreatment::Coupled,
            dissipation: Dissipation::default(),
        }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_newton(mut self, newton: NewtonParams) -> Self {
        self.newton = newton;
        self
    }

    pub fn with_dissipation(mut self, dissipation: Dissipation) -> Self {
        self.dissipation = dissipation;
        self
    }

    pub fn without_sources(mut self) -> Self {
        self.sources = SourceTreatment::Disabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        if let Boundary::FictitiousStates { left, right } = self.boundary {
            for (side, s) in [("left", left), ("right", right)] {
                if !(s.n > 0.0 && s.n.is_finite() && s.q.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "{side} fictitious state must have positive density, got {s:?}"
                    )));
                }
            }
        }
        if !(self.newton.tol_residual > 0.0) {
            return Err(Error::InvalidConfig("newton.tol must be positive".into()));
        }
        if self.newton.max_iter == 0 {
            return Err(Error::InvalidConfig("newton.max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything a config file can set. Absent keys are `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub variant: Option<Variant>,
    pub lambda: Option<f64>,
    pub cfl: Option<f64>,
    pub n_cells: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub t_end: Option<f64>,
    pub boundary: Option<Boundary>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub dissipation: Option<Dissipation>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    /// Applies the scheme-level keys on top of `base`.
    pub fn apply_to(&self, mut base: SchemeConfig) -> SchemeConfig {
        if let Some(v) = self.variant {
            base.variant = v;
        }
        if let Some(l) = self.lambda {
            base.lambda = l;
        }
        if let Some(c) = self.cfl {
            base.cfl = c;
        }
        if let Some(b) = self.boundary {
            base.boundary = b;
        }
        if let Some(t) = self.newton_tol {
            base.newton.tol_residual = t;
        }
        if let Some(m) = self.newton_max_iter {
            base.newton.max_iter = m;
        }
        if let Some(d) = self.dissipation {
            base.dissipation = d;
        }
        base
    }
}

impl FromStr for ConfigFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let err = |message: String| Error::Parse { line: line_no, message };
            match key {
                "variant" => cfg.variant = Some(value.parse().map_err(err)?),
                "lambda" => cfg.lambda = Some(parse_num(value).map_err(err)?),
                "cfl" => cfg.cfl = Some(parse_num(value).map_err(err)?),
                "n_cells" => cfg.n_cells = Some(parse_num(value).map_err(err)?),
                "x_min" => cfg.x_min = Some(parse_num(value).map_err(err)?),
                "x_max" => cfg.x_max = Some(parse_num(value).map_err(err)?),
                "t_end" => cfg.t_end = Some(parse_num(value).map_err(err)?),
                "boundary" => cfg.boundary = Some(parse_boundary(value).map_err(err)?),
                "newton.tol" => cfg.newton_tol = Some(parse_num(value).map_err(err)?),
                "newton.max_iter" => cfg.newton_max_iter = Some(parse_num(value).map_err(err)?),
                "dissipation" => cfg.dissipation = Some(value.parse().map_err(err)?),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }
}

fn parse_num<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("bad number `{s}`: {e}"))
}

fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    let mut words = s.split_whitespace();
    match words.next().map(str::to_ascii_lowercase).as_deref() {
        Some("periodic") => Ok(Boundary::Periodic),
        Some("outflow") => Ok(Boundary::Outflow),
        Some("fictitious") => {
            let v: Vec<f64> = words.map(parse_num::<f64>).collect::<std::result::Result<_, _>>()?;
            if v.len() != 4 {
                return Err(format!(
                    "fictitious boundary needs 4 numbers (n_l q_l n_r q_r), got {}",
                    v.len()
                ));
            }
            Ok(Boundary::FictitiousStates {
                left: Conserved::new(v[0], v[1]),
                right: Conserved::new(v[2], v[3]),
            })
        }
        _ => Err(format!(
            "unknown boundary `{s}` (expected periodic, fictitious or outflow)"
        )),
    }
}
