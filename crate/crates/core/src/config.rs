//! Run configuration: defaults, a flat `key = value` file format and
//! validation. Command-line flags are applied on top through [`RunConfig::set`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{NlkgError, Result};
use crate::params::{P_MAX, P_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    FgrScan,
    Evolve,
    Shoot,
    Virial,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::FgrScan => "fgr-scan",
            Command::Evolve => "evolve",
            Command::Shoot => "shoot",
            Command::Virial => "virial",
            Command::Selftest => "selftest",
        }
    }
}

impl FromStr for Command {
    type Err = NlkgError;

    fn from_str(s: &str) -> Result<Command> {
        Ok(match s {
            "spectrum" => Command::Spectrum,
            "fgr-scan" => Command::FgrScan,
            "evolve" => Command::Evolve,
            "shoot" => Command::Shoot,
            "virial" => Command::Virial,
            "selftest" => Command::Selftest,
            other => return Err(NlkgError::Config(format!("unknown command '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub p: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: usize,
    pub half_length: f64,
    pub n_points: usize,
    pub sponge_width: f64,
    pub sponge_strength: f64,
    pub dt_factor: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub delta: f64,
    pub delta_esc: f64,
    pub z_radius: f64,
    /// Initial mode amplitudes for `evolve`: `Φ[(z₁, z₂)] + y_plus·Y₊`.
    pub z1: f64,
    pub z2: f64,
    pub y_plus: f64,
    /// Size of the shooting perturbation `ε = eps_amp·(φ₂, 0)/‖(φ₂, 0)‖`.
    pub eps_amp: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub segment: f64,
    pub a_scale: f64,
    pub b_scale: f64,
    pub kappa: f64,
    pub epsilon: f64,
    /// Rate of the `H¹_{−a}` weight; `None` means `(p−1)/2`.
    pub a_weight: Option<f64>,
    pub checkpoint_every: usize,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Keys accepted by [`RunConfig::set`], in echo order.
pub const KEYS: [&str; 30] = [
    "p",
    "p_min",
    "p_max",
    "p_count",
    "half_length",
    "n_points",
    "sponge_width",
    "sponge_strength",
    "dt_factor",
    "t_final",
    "record_stride",
    "delta",
    "delta_esc",
    "z_radius",
    "z1",
    "z2",
    "y_plus",
    "eps_amp",
    "a_min",
    "a_max",
    "segment",
    "a_scale",
    "b_scale",
    "kappa",
    "epsilon",
    "a_weight",
    "checkpoint_every",
    "input",
    "out_dir",
    "seed",
];

impl RunConfig {
    pub fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            p: 2.0,
            p_min: 1.7,
            p_max: 2.0,
            p_count: 50,
            half_length: 100.0,
            n_points: 4096,
            sponge_width: 20.0,
            sponge_strength: 2.0,
            dt_factor: 0.25,
            t_final: 50.0,
            record_stride: 10,
            delta: 0.5,
            delta_esc: 0.05,
            z_radius: crate::profile::DEFAULT_Z_RADIUS,
            z1: 0.0,
            z2: 0.01,
            y_plus: 0.0,
            eps_amp: 0.01,
            a_min: -0.01,
            a_max: 0.01,
            segment: 10.0,
            a_scale: 40.0,
            b_scale: 10.0,
            kappa: 0.1,
            epsilon: 0.3,
            a_weight: None,
            checkpoint_every: 0,
            input: None,
            out_dir: PathBuf::from("out"),
            seed: 1,
        }
    }

    pub fn a_weight(&self) -> f64 {
        self.a_weight.unwrap_or(0.5 * (self.p - 1.0))
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim().parse().map_err(|_| NlkgError::Config(format!("malformed value for {key}: '{v}'")))
        }
        match key {
            "p" => self.p = num(key, value)?,
            "p_min" => self.p_min = num(key, value)?,
            "p_max" => self.p_max = num(key, value)?,
            "p_count" => self.p_count = num(key, value)?,
            "half_length" => self.half_length = num(key, value)?,
            "n_points" => self.n_points = num(key, value)?,
            "sponge_width" => self.sponge_width = num(key, value)?,
            "sponge_strength" => self.sponge_strength = num(key, value)?,
            "dt_factor" => self.dt_factor = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "record_stride" => self.record_stride = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "delta_esc" => self.delta_esc = num(key, value)?,
            "z_radius" => self.z_radius = num(key, value)?,
            "z1" => self.z1 = num(key, value)?,
            "z2" => self.z2 = num(key, value)?,
            "y_plus" => self.y_plus = num(key, value)?,
            "eps_amp" => self.eps_amp = num(key, value)?,
            "a_min" => self.a_min = num(key, value)?,
            "a_max" => self.a_max = num(key, value)?,
            "segment" => self.segment = num(key, value)?,
            "a_scale" => self.a_scale = num(key, value)?,
            "b_scale" => self.b_scale = num(key, value)?,
            "kappa" => self.kappa = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "a_weight" => self.a_weight = Some(num(key, value)?),
            "checkpoint_every" => self.checkpoint_every = num(key, value)?,
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "seed" => self.seed = num(key, value)?,
            other => return Err(NlkgError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Apply a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| NlkgError::Config(format!("line {}: expected 'key = value'", no + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NlkgError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NlkgError::Config(m));
        let in_range = |p: f64| p > P_MIN && p <= P_MAX;
        if !in_range(self.p) {
            return bad(format!("p = {} out of (5/3, 2]", self.p));
        }
        if self.command == Command::FgrScan || self.command == Command::Spectrum {
            if !(in_range(self.p_min) && in_range(self.p_max) && self.p_min <= self.p_max) {
                return bad(format!("p range [{}, {}] must lie in (5/3, 2]", self.p_min, self.p_max));
            }
            if self.p_count == 0 {
                return bad("p_count must be >= 1".into());
            }
        }
        if self.n_points < 64 || !(self.half_length > 0.0) {
            return bad("grid needs n_points >= 64 and half_length > 0".into());
        }
        if !(self.sponge_width >= 0.0 && self.sponge_width < 0.5 * self.half_length) {
            return bad("sponge_width must lie in [0, L/2)".into());
        }
        if !(self.dt_factor > 0.0 && self.dt_factor <= 0.5) {
            return bad(format!("dt_factor = {} violates dt <= 0.5 dx", self.dt_factor));
        }
        if !(self.t_final >= 0.0) || self.record_stride == 0 {
            return bad("t_final must be >= 0 and record_stride >= 1".into());
        }
        if !(self.delta > 0.0 && self.delta_esc > 0.0 && self.z_radius > 0.0 && self.segment > 0.0) {
            return bad("delta, delta_esc, z_radius and segment must be positive".into());
        }
        if !(self.a_min < self.a_max) {
            return bad("a_min must be < a_max".into());
        }
        if !(self.a_scale > 0.0 && self.b_scale > 0.0 && self.kappa > 0.0 && self.epsilon >= 0.0) {
            return bad("A, B, kappa must be positive and epsilon >= 0".into());
        }
        if self.a_weight.is_some_and(|a| !(a > 0.0)) {
            return bad("a_weight must be positive".into());
        }
        Ok(())
    }

    /// `# key = value` lines echoing every setting.
    pub fn header(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# nlkg-lab {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "# command = {}", self.command.name()).unwrap();
        let f = |v: f64| format!("{v:.17e}");
        let rows: Vec<(&str, String)> = vec![
            ("p", f(self.p)),
            ("p_min", f(self.p_min)),
            ("p_max", f(self.p_max)),
            ("p_count", self.p_count.to_string()),
            ("half_length", f(self.half_length)),
            ("n_points", self.n_points.to_string()),
            ("sponge_width", f(self.sponge_width)),
            ("sponge_strength", f(self.sponge_strength)),
            ("dt_factor", f(self.dt_factor)),
            ("t_final", f(self.t_final)),
            ("record_stride", self.record_stride.to_string()),
            ("delta", f(self.delta)),
            ("delta_esc", f(self.delta_esc)),
            ("z_radius", f(self.z_radius)),
            ("z1", f(self.z1)),
            ("z2", f(self.z2)),
            ("y_plus", f(self.y_plus)),
            ("eps_amp", f(self.eps_amp)),
            ("a_min", f(self.a_min)),
            ("a_max", f(self.a_max)),
            ("segment", f(self.segment)),
            ("a_scale", f(self.a_scale)),
            ("b_scale", f(self.b_scale)),
            ("kappa", f(self.kappa)),
            ("epsilon", f(self.epsilon)),
            ("a_weight", f(self.a_weight())),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("input", self.input.as_ref().map_or("-".into(), |p| p.display().to_string())),
            ("seed", self.seed.to_string()),
        ];
        for (k, v) in rows {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        writeln!(s, "# regime = qualitative (A, B, epsilon are desk defaults)").unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::new(Command::Spectrum);
        c.apply_text("# comment\np = 1.8\nn_points = 2048  # trailing\n").unwrap();
        assert_eq!((c.p, c.n_points), (1.8, 2048));
        c.set("p", "1.9").unwrap();
        assert_eq!(c.p, 1.9);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut c = RunConfig::new(Command::Evolve);
        assert!(matches!(c.apply_text("colour = red"), Err(NlkgError::Config(_))));
        assert!(matches!(c.set("p", "two"), Err(NlkgError::Config(_))));
        assert!(matches!(c.apply_text("p 2.0"), Err(NlkgError::Config(_))));
    }

    #[test]
    fn p_range_gate() {
        let mut c = RunConfig::new(Command::Evolve);
        c.p = 1.5;
        let e = c.validate().unwrap_err();
        assert!(e.to_string().contains("out of (5/3, 2]"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn header_echoes_every_key() {
        let c = RunConfig::new(Command::Shoot);
        let h = c.header();
        for k in KEYS.iter().filter(|k| **k != "out_dir") {
            assert!(h.contains(&format!("# {k} = ")), "missing {k}");
        }
    }
}
