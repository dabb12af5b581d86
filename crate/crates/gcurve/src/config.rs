//! JSON run configuration: parsing, validation, and default filling.
//!
//! A config names a problem (periodic or radial), the numerical parameters,
//! and an output directory. Coefficient fields are either expression
//! strings over the mini-language (`sin cos exp abs min max`, `pi`,
//! variables `x1..xn` or `r`) or inline sample arrays. Unknown keys are
//! rejected.

use crate::error::{Error, Result};
use crate::model::{
    build_periodic, build_radial, BoundaryMode, FieldSpec, PeriodicConfig, PeriodicProblem,
    RadialConfig, RadialProblem, TAIL_TOL_DEFAULT,
};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Periodic,
    Radial,
    Value,
    Limit,
    Verify,
    Study,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Periodic => "periodic",
            Mode::Radial => "radial",
            Mode::Value => "value",
            Mode::Limit => "limit",
            Mode::Verify => "verify",
            Mode::Study => "study",
        }
    }

    pub fn needs_radial(&self) -> bool {
        matches!(self, Mode::Value | Mode::Limit)
    }
}

/// A coefficient field in a config file: a number, an expression string,
/// or an inline sample array.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawField {
    Number(f64),
    Expr(String),
    Samples(Vec<f64>),
}

impl From<&RawField> for FieldSpec {
    fn from(raw: &RawField) -> FieldSpec {
        match raw {
            RawField::Number(c) => FieldSpec::Constant(*c),
            RawField::Expr(s) => FieldSpec::Expr(s.clone()),
            RawField::Samples(v) => FieldSpec::Samples(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProblem {
    /// "periodic" or "radial".
    pub kind: String,
    /// Dimension n >= 2.
    pub n: usize,
    /// Source field: f on the torus, F(r) on the half-line.
    #[serde(alias = "F")]
    pub f: RawField,
    /// Initial datum: g on the torus, G(r) on the half-line.
    #[serde(alias = "G")]
    pub g: RawField,
    /// Wind components (periodic only; defaults to zero).
    #[serde(default)]
    pub wind: Option<Vec<RawField>>,
    /// Tail value c_F (radial only).
    #[serde(default, alias = "c_F")]
    pub c_f: Option<f64>,
    /// Whether the standing ergodic assumptions are enforced at build time.
    #[serde(default)]
    pub ergodic: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNumerics {
    /// Torus resolution per axis (periodic).
    #[serde(default, rename = "N")]
    pub n: Option<usize>,
    /// Radial node count.
    #[serde(default)]
    pub grid_n: Option<usize>,
    #[serde(default)]
    pub eps_reg: Option<f64>,
    #[serde(default)]
    pub cfl_safety: Option<f64>,
    /// Explicit time step override (must respect the stability bound).
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub r_min: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub snapshot_every: Option<f64>,
    #[serde(default)]
    pub velocity_samples: Option<usize>,
    #[serde(default)]
    pub cone_tol: Option<f64>,
    #[serde(default)]
    pub conv_tol: Option<f64>,
    #[serde(default)]
    pub limit_tol: Option<f64>,
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Oscillation window length; defaults to 20% of the horizon.
    #[serde(default)]
    pub window: Option<f64>,
    #[serde(default)]
    pub aubry_tol: Option<f64>,
    #[serde(default)]
    pub tail_tol: Option<f64>,
    #[serde(default)]
    pub divergence_factor: Option<f64>,
    /// Right-boundary closure: "clamped-slope" (default) or
    /// "extrapolate-free".
    #[serde(default)]
    pub boundary: Option<String>,
    /// Amplification constant of the uniqueness-set diagnostic.
    #[serde(default)]
    pub kappa_amp: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    pub problem: RawProblem,
    #[serde(default)]
    pub numerics: Option<RawNumerics>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// The problem half of a resolved config.
#[derive(Debug, Clone)]
pub enum Problem {
    Periodic(PeriodicProblem),
    Radial(RadialProblem),
}

/// Fully resolved numerics with defaults filled in.
#[derive(Debug, Clone)]
pub struct Numerics {
    pub eps_reg: f64,
    pub cfl_safety: f64,
    pub dt_override: Option<f64>,
    pub t_max: f64,
    pub snapshot_every: f64,
    pub velocity_samples: usize,
    pub cone_tol: f64,
    pub conv_tol: f64,
    pub limit_tol: Option<f64>,
    pub alphas: Vec<f64>,
    pub window: f64,
    pub divergence_factor: f64,
    pub kappa_amp: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub problem: Problem,
    pub numerics: Numerics,
    pub output_dir: PathBuf,
    /// The raw bytes the config was parsed from (persisted for the
    /// manifest hash).
    pub source_bytes: Vec<u8>,
}

impl RunConfig {
    pub fn grid_h(&self) -> f64 {
        match &self.problem {
            Problem::Periodic(p) => p.grid.h,
            Problem::Radial(p) => p.grid.h,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::validation(field, format!("must be positive, got {v}")));
    }
    Ok(v)
}

/// Parse and validate a JSON config, filling defaults.
pub fn parse_config(bytes: &[u8]) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_slice(bytes).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            // serde reports unknown/invalid fields as data errors
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(|s| s.to_string())
                .unwrap_or_else(|| "config".into());
            Error::Validation {
                field,
                message: if msg.contains("unknown field") {
                    "unknown".into()
                } else {
                    msg
                },
            }
        }
    })?;
    resolve(raw, bytes)
}

fn resolve(raw: RawConfig, bytes: &[u8]) -> Result<RunConfig> {
    let num = raw.numerics.clone().unwrap_or_default();
    let dim = raw.problem.n;

    // validate the simple numeric fields that only need positivity
    for (name, v) in [
        ("numerics.eps_reg", num.eps_reg),
        ("numerics.cfl_safety", num.cfl_safety),
        ("numerics.dt", num.dt),
        ("numerics.snapshot_every", num.snapshot_every),
        ("numerics.cone_tol", num.cone_tol),
        ("numerics.conv_tol", num.conv_tol),
        ("numerics.limit_tol", num.limit_tol),
        ("numerics.window", num.window),
        ("numerics.aubry_tol", num.aubry_tol),
        ("numerics.tail_tol", num.tail_tol),
        ("numerics.divergence_factor", num.divergence_factor),
        ("numerics.kappa_amp", num.kappa_amp),
        ("numerics.t_max", num.t_max),
    ] {
        if let Some(v) = v {
            positive(name, v)?;
        }
    }

    let boundary = match num.boundary.as_deref() {
        None | Some("clamped-slope") => BoundaryMode::ClampedSlope,
        Some("extrapolate-free") => BoundaryMode::ExtrapolateFree,
        Some(other) => {
            return Err(Error::validation(
                "numerics.boundary",
                format!("unknown boundary mode `{other}`"),
            ))
        }
    };

    let (problem, h, default_safety) = match raw.problem.kind.as_str() {
        "periodic" => {
            let resolution = num.n.ok_or_else(|| {
                Error::validation("numerics.N", "periodic problems need a torus resolution")
            })?;
            let wind = match &raw.problem.wind {
                Some(w) => w.iter().map(FieldSpec::from).collect(),
                None => vec![FieldSpec::Constant(0.0); dim],
            };
            if raw.problem.c_f.is_some() {
                return Err(Error::validation(
                    "problem.c_F",
                    "tail value only applies to radial problems",
                ));
            }
            let p = build_periodic(&PeriodicConfig {
                dim,
                resolution,
                source: FieldSpec::from(&raw.problem.f),
                wind,
                initial: FieldSpec::from(&raw.problem.g),
                ergodic: raw.problem.ergodic,
                aubry_tol: num.aubry_tol,
            })?;
            let h = p.grid.h;
            (Problem::Periodic(p), h, 0.5)
        }
        "radial" => {
            if raw.problem.wind.is_some() {
                return Err(Error::validation(
                    "problem.wind",
                    "the radial problem is wind-free",
                ));
            }
            let grid_n = num.grid_n.ok_or_else(|| {
                Error::validation("numerics.grid_n", "radial problems need a node count")
            })?;
            let r_max = num.r_max.ok_or_else(|| {
                Error::validation("numerics.r_max", "radial problems need a truncation radius")
            })?;
            let c_f = raw.problem.c_f.ok_or_else(|| {
                Error::validation("problem.c_F", "radial problems need the tail value")
            })?;
            let p = build_radial(&RadialConfig {
                dim,
                source: FieldSpec::from(&raw.problem.f),
                initial: FieldSpec::from(&raw.problem.g),
                c_f,
                r_min: num.r_min.unwrap_or_else(|| RadialConfig::default_r_min(dim)),
                r_max,
                grid_n,
                ergodic: raw.problem.ergodic,
                aubry_tol: num.aubry_tol,
                tail_tol: num.tail_tol.unwrap_or(TAIL_TOL_DEFAULT),
                boundary,
            })?;
            let h = p.grid.h;
            (Problem::Radial(p), h, 0.9)
        }
        other => {
            return Err(Error::validation(
                "problem.kind",
                format!("must be `periodic` or `radial`, got `{other}`"),
            ))
        }
    };

    let t_max = num.t_max.unwrap_or(10.0);
    let interface = dim as f64 - 1.0;
    let numerics = Numerics {
        eps_reg: num.eps_reg.unwrap_or(h),
        cfl_safety: num.cfl_safety.unwrap_or(default_safety),
        dt_override: num.dt,
        t_max,
        snapshot_every: num.snapshot_every.unwrap_or(t_max / 20.0),
        velocity_samples: num.velocity_samples.unwrap_or(33),
        cone_tol: num.cone_tol.unwrap_or(h),
        conv_tol: num.conv_tol.unwrap_or(1e-3),
        limit_tol: num.limit_tol,
        alphas: num
            .alphas
            .unwrap_or_else(|| vec![1.25 * interface, 1.5 * interface, 2.0 * interface]),
        window: num.window.unwrap_or(0.2 * t_max),
        divergence_factor: num.divergence_factor.unwrap_or(1e6),
        kappa_amp: num.kappa_amp.unwrap_or(10.0),
    };

    // mode-specific structural requirements
    if let Some(mode) = raw.mode {
        check_mode(mode, &problem)?;
    }

    Ok(RunConfig {
        mode: raw.mode,
        problem,
        numerics,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        source_bytes: bytes.to_vec(),
    })
}

/// Structural compatibility of a mode with the configured problem.
pub fn check_mode(mode: Mode, problem: &Problem) -> Result<()> {
    match (mode, problem) {
        (Mode::Periodic, Problem::Radial(_)) => Err(Error::validation(
            "mode",
            "periodic mode needs a periodic problem",
        )),
        (Mode::Radial | Mode::Value | Mode::Limit, Problem::Periodic(_)) => Err(Error::validation(
            "mode",
            format!("{} mode needs a radial problem", mode.as_str()),
        )),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_radial_config_fills_defaults() {
        let cfg = parse_config(
            br#"{
            "problem": {"kind": "radial", "n": 2, "F": "min(1,(r-2)^2)", "G": 5, "c_F": 1.0},
            "numerics": {"grid_n": 240, "r_min": 0.05, "r_max": 12.0, "t_max": 4.0}
        }"#,
        )
        .unwrap();
        match &cfg.problem {
            Problem::Radial(p) => {
                assert_eq!(p.grid.len, 240);
                assert_eq!(p.dim, 2);
            }
            _ => panic!("expected radial"),
        }
        assert_eq!(cfg.numerics.t_max, 4.0);
        assert_eq!(cfg.numerics.velocity_samples, 33);
        assert!((cfg.numerics.window - 0.8).abs() < 1e-12);
        assert_eq!(cfg.numerics.alphas, vec![1.25, 1.5, 2.0]);
        assert_eq!(cfg.numerics.conv_tol, 1e-3);
        // cone_tol defaults to the grid spacing
        assert!((cfg.numerics.cone_tol - cfg.grid_h()).abs() < 1e-15);
    }

    #[test]
    fn negative_tolerance_names_the_field() {
        let err = parse_config(
            br#"{
            "problem": {"kind": "radial", "n": 2, "F": "1", "G": 0, "c_F": 1.0},
            "numerics": {"grid_n": 64, "r_max": 6.0, "t_max": 1.0, "conv_tol": -0.1}
        }"#,
        )
        .unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "numerics.conv_tol"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(
            br#"{
            "problem": {"kind": "radial", "n": 2, "F": "1", "G": 0, "c_F": 1.0},
            "numerics": {"grid_n": 64, "r_max": 6.0, "t_max": 1.0},
            "foo": 1
        }"#,
        )
        .unwrap_err();
        match err {
            Error::Validation { field, message } => {
                assert_eq!(field, "foo");
                assert_eq!(message, "unknown");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_config(b"{ not json").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn periodic_config_builds_with_wind() {
        let cfg = parse_config
            (br#"{
            "mode": "periodic",
            "problem": {
                "kind": "periodic", "n": 2,
                "f": "sin(2*pi*x1)^2 + sin(2*pi*x2)^2",
                "g": "cos(2*pi*x1)*cos(2*pi*x2)",
                "wind": ["0.25*(sin(2*pi*x1)^2 + sin(2*pi*x2)^2)", "0.15*(sin(2*pi*x1)^2 + sin(2*pi*x2)^2)"],
                "ergodic": true
            },
            "numerics": {"N": 16, "t_max": 1.0}
        }"#)
        .unwrap();
        match &cfg.problem {
            Problem::Periodic(p) => {
                assert_eq!(p.grid.n, 16);
                assert!(p.ergodic);
            }
            _ => panic!("expected periodic"),
        }
        assert!((cfg.numerics.eps_reg - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(cfg.numerics.cfl_safety, 0.5);
    }

    #[test]
    fn mode_problem_mismatch_is_rejected() {
        let err = parse_config(
            br#"{
            "mode": "value",
            "problem": {"kind": "periodic", "n": 2, "f": 0, "g": 0},
            "numerics": {"N": 8, "t_max": 1.0}
        }"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }

    #[test]
    fn sample_arrays_are_accepted() {
        let samples: Vec<String> = (0..64).map(|i| format!("{}", (i % 8) as f64 * 0.1)).collect();
        let json = format!(
            r#"{{
            "problem": {{"kind": "periodic", "n": 2, "f": [{s}], "g": 0}},
            "numerics": {{"N": 8, "t_max": 1.0}}
        }}"#,
            s = samples.join(",")
        );
        let cfg = parse_config(json.as_bytes()).unwrap();
        match &cfg.problem {
            Problem::Periodic(p) => {
                // sampled source defaults aubry_tol to h^2
                assert!((p.aubry_tol - p.grid.h * p.grid.h).abs() < 1e-15);
            }
            _ => panic!(),
        }
    }
}
