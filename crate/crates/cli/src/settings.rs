//! Run configuration: one flat set of keys shared by the config file and the
//! command-line flags. Flags override file values; keys a command does not
//! use are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use rosenau::elliptic::EllipticCase;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Solve,
    Profile,
    Exact,
    CheckIdentities,
    ConvergeTime,
    ConvergeSpace,
    Collide,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Solve => "solve",
            CommandKind::Profile => "profile",
            CommandKind::Exact => "exact",
            CommandKind::CheckIdentities => "check-identities",
            CommandKind::ConvergeTime => "converge-time",
            CommandKind::ConvergeSpace => "converge-space",
            CommandKind::Collide => "collide",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every configurable key. All are optional here; [`Settings::resolve`] fills
/// in defaults for the keys a command uses.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Config file (TOML, or JSON such as an echoed config.json).
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<String>,

    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,

    /// Directory for artifacts.
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,

    /// Left end of the periodic domain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,

    /// Right end of the periodic domain.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,

    /// Number of grid points (even).
    #[arg(long = "N", visible_alias = "n")]
    #[serde(rename = "N", alias = "n", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    /// Number of time steps.
    #[arg(long = "M", visible_alias = "m")]
    #[serde(rename = "M", alias = "m", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,

    /// Final time.
    #[arg(long = "T", visible_alias = "t-final")]
    #[serde(rename = "T", alias = "t_final", skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,

    /// Nonlinearity exponent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,

    /// Wave speed.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,

    /// Speed of the trailing wave (collide).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,

    /// Speed of the leading wave (collide), or the c₂ coefficient (exact).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,

    /// Initial position of the trailing wave.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,

    /// Initial position of the leading wave.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,

    /// Closed-form case: I, IIa, IIb, IIc, IId, IIe or IIf.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,

    /// Wavenumber of the traveling-wave ansatz.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,

    /// c₄ coefficient of the quartic.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c4: Option<f64>,

    /// Phase ξ₀.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi0: Option<f64>,

    /// Sign ε = ±1 (Case I).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,

    /// Time at which a closed-form curve is evaluated.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,

    /// Number of curve samples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,

    /// Petviashvili exponent ν (default (p+1)/p).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_error: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_factor: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_residual: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,

    /// Steps between stored snapshots.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,

    /// Steps between peak-tracking samples (collide).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_stride: Option<usize>,

    /// Profile CSV (x, Q) used as initial data or initial guess.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_profile_path: Option<PathBuf>,

    /// Initial condition for solve: profile, gaussian or zero.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,

    /// Gaussian amplitude (solve --initial gaussian).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,

    /// Gaussian width (solve --initial gaussian).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,

    /// Apply the 2/3 dealiasing rule.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,

    /// Step counts for converge-time, or for tail refinement in collide.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<usize>>,

    /// Reference step count for converge-time.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_ref: Option<usize>,

    /// Grid sizes for converge-space.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,

    /// Rerun the collision with M, 2M, 4M steps and compare the tails.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_tail: Option<bool>,
}

/// Applies `$body` to each optional key with its name.
macro_rules! for_each_key {
    ($m:ident) => {
        $m!(
            output_dir, a, b, n, m, t_final, p, c, c1, c2, x1, x2, case, k, c4, xi0, epsilon, time, x_min,
            x_max, samples, nu, tol_error, tol_factor, tol_residual, max_iters, snapshot_stride, track_stride,
            seed_profile_path, initial, amplitude, width, dealias, m_list, m_ref, n_list, refine_tail
        )
    };
}

const PETVIASHVILI_KEYS: &[&str] = &["nu", "tol_error", "tol_factor", "tol_residual", "max_iters"];

fn allowed(kind: CommandKind) -> Vec<&'static str> {
    let mut keys = vec!["output_dir"];
    let grid = ["a", "b", "N"];
    match kind {
        CommandKind::Solve => {
            keys.extend(grid);
            keys.extend(["M", "T", "p", "c", "snapshot_stride", "seed_profile_path", "initial", "amplitude", "width", "dealias"]);
            keys.extend(PETVIASHVILI_KEYS);
        }
        CommandKind::Profile | CommandKind::CheckIdentities => {
            keys.extend(grid);
            keys.extend(["c", "p", "seed_profile_path"]);
            keys.extend(PETVIASHVILI_KEYS);
        }
        CommandKind::Exact => {
            keys.extend(["case", "c", "k", "c2", "c4", "xi0", "epsilon", "time", "x_min", "x_max", "samples"]);
        }
        CommandKind::ConvergeTime => {
            keys.extend(grid);
            keys.extend(["c", "p", "T", "m_list", "m_ref", "seed_profile_path"]);
            keys.extend(PETVIASHVILI_KEYS);
        }
        CommandKind::ConvergeSpace => {
            keys.extend(grid);
            keys.extend(["c", "p", "T", "M", "n_list", "seed_profile_path"]);
            keys.extend(PETVIASHVILI_KEYS);
        }
        CommandKind::Collide => {
            keys.extend(grid);
            keys.extend(["M", "T", "p", "c1", "c2", "x1", "x2", "snapshot_stride", "track_stride", "refine_tail", "m_list"]);
        }
    }
    keys
}

/// External name of a field (the config-file key).
fn key_name(field: &str) -> &str {
    match field {
        "n" => "N",
        "m" => "M",
        "t_final" => "T",
        other => other,
    }
}

impl Settings {
    /// Reads a config file; `.json` is parsed as JSON, anything else as TOML.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!(
                "cannot read config file {}: {e}; check the --config path",
                path.display()
            ))
        })?;
        let parsed: Settings = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("{}: {e}; keys are the long flag names with `_` for `-`", path.display()))
            })?
        } else {
            toml::from_str(&text).map_err(|e| {
                CliError::Config(format!(
                    "{}: {}; keys are the long flag names with `_` for `-`",
                    path.display(),
                    e.message()
                ))
            })?
        };
        if let Some(v) = &parsed.schema_version {
            if v != rosenau::io::SCHEMA_VERSION {
                return Err(CliError::Config(format!(
                    "{}: schema_version {v} is not supported (expected {})",
                    path.display(),
                    rosenau::io::SCHEMA_VERSION
                )));
            }
        }
        Ok(parsed)
    }

    /// `self` with every unset key taken from `base`.
    pub fn over(self, base: Settings) -> Settings {
        let mut out = self;
        macro_rules! merge {
            ($($f:ident),*) => { $( if out.$f.is_none() { out.$f = base.$f; } )* };
        }
        for_each_key!(merge);
        out.command = out.command.or(base.command);
        out.schema_version = base.schema_version;
        out
    }

    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! collect {
            ($($f:ident),*) => { $( if self.$f.is_some() { keys.push(key_name(stringify!($f))); } )* };
        }
        for_each_key!(collect);
        keys
    }

    /// Checks that every set key is used by `kind` and fills in defaults.
    pub fn resolve(mut self, kind: CommandKind) -> Result<Settings, CliError> {
        if let Some(file_kind) = self.command {
            if file_kind != kind {
                return Err(CliError::Config(format!(
                    "config file is for `{file_kind}` but the command is `{kind}`; run `rosenau {file_kind}` or drop the `command` key"
                )));
            }
        }
        let ok = allowed(kind);
        for key in self.set_keys() {
            if !ok.contains(&key) {
                return Err(CliError::Config(format!(
                    "`{key}` is not used by `{kind}`; remove it (accepted keys: {})",
                    ok.join(", ")
                )));
            }
        }
        self.command = Some(kind);
        // Written by the sidecar wrapper.
        self.schema_version = None;
        self.config = None;
        self.output_dir.get_or_insert_with(|| PathBuf::from("output"));

        let paper_grid = |s: &mut Settings| {
            s.a.get_or_insert(-50.0);
            s.b.get_or_insert(50.0);
            s.n.get_or_insert(1024);
        };
        let petviashvili = |s: &mut Settings| {
            let p = s.p.unwrap_or(1.0);
            s.nu.get_or_insert((p + 1.0) / p);
            s.tol_error.get_or_insert(1e-12);
            s.tol_factor.get_or_insert(1e-12);
            s.tol_residual.get_or_insert(1e-10);
            s.max_iters.get_or_insert(1000);
        };
        match kind {
            CommandKind::Solve => {
                paper_grid(&mut self);
                self.m.get_or_insert(10_000);
                self.t_final.get_or_insert(10.0);
                self.p.get_or_insert(1.0);
                self.snapshot_stride.get_or_insert(100);
                self.dealias.get_or_insert(false);
                let initial = match (&self.initial, &self.seed_profile_path) {
                    (None, Some(_)) => "file".to_string(),
                    (None, None) => "profile".to_string(),
                    (Some(i), _) => i.clone(),
                };
                match initial.as_str() {
                    "profile" => {
                        self.c.get_or_insert(2.0);
                        petviashvili(&mut self);
                    }
                    "gaussian" => {
                        self.amplitude.get_or_insert(1.0);
                        self.width.get_or_insert(1.0);
                    }
                    "zero" => {}
                    "file" if self.seed_profile_path.is_some() => {}
                    "file" => {
                        return Err(CliError::Config(
                            "initial = file needs seed_profile_path; pass --seed-profile-path FILE".into(),
                        ))
                    }
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown initial condition `{other}`; use profile, gaussian, zero or file"
                        )))
                    }
                }
                if initial != "file" && self.seed_profile_path.is_some() {
                    return Err(CliError::Config(format!(
                        "seed_profile_path conflicts with initial = {initial}; drop one of them"
                    )));
                }
                let unused: Vec<&str> = [
                    ("c", self.c.is_some() && initial != "profile"),
                    ("amplitude", self.amplitude.is_some() && initial != "gaussian"),
                    ("width", self.width.is_some() && initial != "gaussian"),
                ]
                .into_iter()
                .filter_map(|(k, bad)| bad.then_some(k))
                .collect();
                if let Some(k) = unused.first() {
                    return Err(CliError::Config(format!("`{k}` has no effect with initial = {initial}; remove it")));
                }
                if initial != "profile" && PETVIASHVILI_KEYS.iter().any(|k| self.set_keys().contains(k)) {
                    return Err(CliError::Config(format!(
                        "Petviashvili settings have no effect with initial = {initial}; remove them"
                    )));
                }
                self.initial = Some(initial);
            }
            CommandKind::Profile | CommandKind::CheckIdentities => {
                paper_grid(&mut self);
                self.c.get_or_insert(2.0);
                self.p.get_or_insert(1.0);
                petviashvili(&mut self);
            }
            CommandKind::Exact => {
                if self.case.is_none() {
                    return Err(CliError::Config("exact needs --case (I, IIa, IIb, IIc, IId, IIe or IIf)".into()));
                }
                let case: EllipticCase = self.case.as_deref().unwrap().parse()?;
                // Unit-magnitude coefficients with the signs each case needs.
                let (c2, c4) = match case {
                    EllipticCase::I => (0.0, 1.0),
                    EllipticCase::IIa | EllipticCase::IIb | EllipticCase::IIc => (-1.0, 1.0),
                    EllipticCase::IId | EllipticCase::IIe => (1.0, -1.0),
                    EllipticCase::IIf => (1.0, 1.0),
                };
                self.c.get_or_insert(1.0);
                self.k.get_or_insert(1.0);
                self.c2.get_or_insert(c2);
                self.c4.get_or_insert(c4);
                self.xi0.get_or_insert(0.0);
                self.epsilon.get_or_insert(1.0);
                self.time.get_or_insert(0.0);
                self.x_min.get_or_insert(-10.0);
                self.x_max.get_or_insert(10.0);
                self.samples.get_or_insert(2001);
            }
            CommandKind::ConvergeTime => {
                paper_grid(&mut self);
                self.c.get_or_insert(2.0);
                self.p.get_or_insert(1.0);
                self.t_final.get_or_insert(10.0);
                self.m_list.get_or_insert_with(|| vec![125, 250, 500, 1000]);
                self.m_ref.get_or_insert(10_000);
                petviashvili(&mut self);
            }
            CommandKind::ConvergeSpace => {
                paper_grid(&mut self);
                self.c.get_or_insert(2.0);
                self.p.get_or_insert(1.0);
                self.t_final.get_or_insert(10.0);
                self.m.get_or_insert(10_000);
                self.n_list.get_or_insert_with(|| vec![32, 64, 128, 256]);
                petviashvili(&mut self);
            }
            CommandKind::Collide => {
                self.a.get_or_insert(-200.0);
                self.b.get_or_insert(200.0);
                self.n.get_or_insert(1 << 14);
                self.m.get_or_insert(10_000);
                self.t_final.get_or_insert(100.0);
                self.p.get_or_insert(1.0);
                self.c1.get_or_insert(2.0);
                self.c2.get_or_insert(1.2);
                self.x1.get_or_insert(-60.0);
                self.x2.get_or_insert(-20.0);
                self.snapshot_stride.get_or_insert(100);
                self.track_stride.get_or_insert(10);
                self.refine_tail.get_or_insert(false);
                if self.refine_tail == Some(true) {
                    let m = self.m.unwrap_or(10_000);
                    self.m_list.get_or_insert_with(|| vec![m, 2 * m, 4 * m]);
                } else if self.m_list.is_some() {
                    return Err(CliError::Config("m_list is only used with refine_tail = true".into()));
                }
            }
        }
        if let Some(path) = &self.seed_profile_path {
            if !path.is_file() {
                return Err(CliError::Config(format!(
                    "seed profile {} does not exist; write one with `rosenau profile` or fix the path",
                    path.display()
                )));
            }
        }
        Ok(self)
    }

    pub fn output_dir(&self) -> &Path {
        self.output_dir.as_deref().expect("resolved")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = Settings { c: Some(3.0), p: Some(2.0), ..Default::default() };
        let cli = Settings { c: Some(2.5), ..Default::default() };
        let merged = cli.over(file).resolve(CommandKind::Profile).unwrap();
        assert_eq!(merged.c, Some(2.5));
        assert_eq!(merged.p, Some(2.0));
        assert_eq!(merged.nu, Some(1.5));
        assert_eq!(merged.n, Some(1024));
    }

    #[test]
    fn foreign_keys_are_rejected() {
        let s = Settings { c1: Some(2.0), ..Default::default() };
        let err = s.resolve(CommandKind::Profile).unwrap_err();
        assert!(err.to_string().contains("`c1` is not used by `profile`"));
    }

    #[test]
    fn toml_uses_flag_names() {
        let s: Settings = toml::from_str("N = 256\nT = 5.0\nc = 2\ntol_error = 1e-9\nm_list = [10, 20]\n").unwrap();
        assert_eq!(s.n, Some(256));
        assert_eq!(s.t_final, Some(5.0));
        assert_eq!(s.m_list, Some(vec![10, 20]));
        assert!(toml::from_str::<Settings>("bogus = 1\n").is_err());
    }

    #[test]
    fn resolved_settings_round_trip_through_json() {
        let s = Settings::default().resolve(CommandKind::Collide).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: Settings = serde_json::from_str(&text).unwrap();
        assert_eq!(back.resolve(CommandKind::Collide).unwrap(), s);
    }
}
