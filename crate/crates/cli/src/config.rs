//! Flat `key = value` run configuration.
//!
//! Values are layered: preset, then the config file, then `--set` flags.

use std::fmt::Write as _;
use std::path::Path;

use bindet::closedform::default_order;
use bindet::{DetectorConfig, FieldConfig, TargetParams};

use crate::CliError;

pub const KEYS: [&str; 16] = [
    "tau",
    "sigma2",
    "T",
    "alpha",
    "P",
    "xT",
    "yT",
    "rho",
    "trials",
    "seed",
    "region_radius",
    "m",
    "methods",
    "sweep.start",
    "sweep.stop",
    "sweep.step",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MethodKind {
    ClosedForm,
    Quadrature,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::ClosedForm => "closed-form",
            MethodKind::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub preset: String,
    pub tau: f64,
    pub sigma2: f64,
    pub t_obs: f64,
    pub alpha: f64,
    pub power: f64,
    pub x_t: f64,
    pub y_t: f64,
    pub rho: f64,
    pub trials: usize,
    pub seed: u64,
    /// `None` means the default truncation radius.
    pub region_radius: Option<f64>,
    /// `None` means the default series order for `alpha`.
    pub m: Option<usize>,
    /// Sorted, without duplicates.
    pub methods: Vec<MethodKind>,
    /// `None` means a single point at `tau`.
    pub sweep: Option<(f64, f64, f64)>,
}

impl Config {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        match name {
            "paper-sec5" => Ok(Self {
                preset: name.to_string(),
                tau: 0.4,
                sigma2: 0.25,
                t_obs: 1.0,
                alpha: 2.0,
                power: 2.0,
                x_t: 0.0,
                y_t: 0.0,
                rho: 0.05,
                trials: 500,
                seed: 1,
                region_radius: None,
                m: None,
                methods: vec![MethodKind::ClosedForm, MethodKind::Quadrature],
                sweep: Some((0.1, 2.0, 0.02)),
            }),
            other => Err(CliError::Config(format!(
                "unknown preset '{other}' (available: paper-sec5)"
            ))),
        }
    }

    /// Preset, then `file`, then each `KEY=VALUE` of `overrides`.
    pub fn resolve(
        preset: &str,
        file: Option<&Path>,
        overrides: &[String],
    ) -> Result<Self, CliError> {
        let mut cfg = Self::preset(preset)?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for item in overrides {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                CliError::Config(format!("--set expects KEY=VALUE, got '{item}'"))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{origin}:{}: expected KEY = VALUE", n + 1))
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let real = || {
            value
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("{key}: '{value}' is not a number")))
        };
        let int = || {
            value
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("{key}: '{value}' is not an integer")))
        };
        let auto = value.eq_ignore_ascii_case("auto");
        match key {
            "tau" => self.tau = real()?,
            "sigma2" => self.sigma2 = real()?,
            "T" => self.t_obs = real()?,
            "alpha" => self.alpha = real()?,
            "P" => self.power = real()?,
            "xT" => self.x_t = real()?,
            "yT" => self.y_t = real()?,
            "rho" => self.rho = real()?,
            "trials" => self.trials = int()? as usize,
            "seed" => self.seed = int()?,
            "region_radius" => self.region_radius = if auto { None } else { Some(real()?) },
            "m" => self.m = if auto { None } else { Some(int()? as usize) },
            "methods" => self.methods = parse_methods(value)?,
            "sweep.start" | "sweep.stop" | "sweep.step" => {
                let (mut a, mut b, mut s) = self.sweep.unwrap_or((self.tau, self.tau, 0.02));
                if value.eq_ignore_ascii_case("none") {
                    self.sweep = None;
                    return Ok(());
                }
                let v = real()?;
                match key {
                    "sweep.start" => a = v,
                    "sweep.stop" => b = v,
                    _ => s = v,
                }
                self.sweep = Some((a, b, s));
            }
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key '{key}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.detector()?;
        self.field()?;
        self.truth()?;
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must not be empty".into()));
        }
        if let Some(r) = self.region_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(CliError::Config(format!(
                    "region_radius must be positive, got {r}"
                )));
            }
        }
        if let Some((a, b, s)) = self.sweep {
            let ok = a.is_finite() && b.is_finite() && s.is_finite() && a > 0.0 && s > 0.0;
            if !ok || b < a {
                return Err(CliError::Config(format!(
                    "sweep needs 0 < start <= stop and step > 0, got start={a} stop={b} step={s}"
                )));
            }
        }
        Ok(())
    }

    pub fn detector(&self) -> Result<DetectorConfig, CliError> {
        DetectorConfig::new(self.tau, self.sigma2, self.t_obs, self.alpha)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn field(&self) -> Result<FieldConfig, CliError> {
        FieldConfig::new(self.rho).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn truth(&self) -> Result<TargetParams, CliError> {
        TargetParams::new(self.power, self.x_t, self.y_t)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn order(&self) -> usize {
        self.m.unwrap_or_else(|| default_order(self.alpha))
    }

    pub fn has(&self, method: MethodKind) -> bool {
        self.methods.contains(&method)
    }

    /// `#`-prefixed echo of every effective setting.
    pub fn header(&self, command: &str, region_radius: Option<f64>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# bindet {command} {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# preset = {}", self.preset);
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "# {k} = {v}");
        };
        kv("tau", num(self.tau));
        kv("sigma2", num(self.sigma2));
        kv("T", num(self.t_obs));
        kv("alpha", num(self.alpha));
        kv("P", num(self.power));
        kv("xT", num(self.x_t));
        kv("yT", num(self.y_t));
        kv("rho", num(self.rho));
        kv("trials", self.trials.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "region_radius",
            region_radius
                .or(self.region_radius)
                .map_or_else(|| "auto".to_string(), num),
        );
        kv("m", self.order().to_string());
        kv(
            "methods",
            self.methods
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(","),
        );
        match self.sweep {
            Some((a, b, st)) => {
                kv("sweep.start", num(a));
                kv("sweep.stop", num(b));
                kv("sweep.step", num(st));
            }
            None => kv("sweep", "none".to_string()),
        }
        s
    }
}

fn parse_methods(value: &str) -> Result<Vec<MethodKind>, CliError> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        out.push(match part {
            "quadrature" => MethodKind::Quadrature,
            "closed-form" => MethodKind::ClosedForm,
            other => {
                return Err(CliError::Config(format!(
                    "unknown method '{other}' (quadrature, closed-form)"
                )))
            }
        });
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Round-trip exact float text: 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}
