//! Experiment configuration: defaults per study, a `key = value` file
//! format with `#` comments, and flag-style overrides.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Keys understood by every experiment; unknown keys are rejected so typos
/// fail loudly. Values echo into the report provenance.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub grid_sizes: Vec<usize>,
    /// Obstacle level (the floor sits at `-k`).
    pub k: f64,
    /// Location of the singular atom.
    pub atom: (f64, f64),
    /// Location of the obstacle-shaping atom.
    pub tau_atom: (f64, f64),
    pub coeff: String,
    pub radii: Vec<f64>,
    pub seed: u64,
    pub domain: Rect,
    /// Relaxation factor; `None` tunes it per level.
    pub omega: Option<f64>,
    /// Amplitude of the smooth nonnegative density in the invariance study.
    pub density_amp: f64,
    pub disk_radius: f64,
    pub out: Option<PathBuf>,
}

pub const EXPERIMENTS: [&str; 4] = ["delta", "invariance", "ratio", "capacity"];

impl ExperimentConfig {
    pub fn default_for(name: &str) -> Result<Self> {
        let base = ExperimentConfig {
            experiment: name.to_string(),
            grid_sizes: vec![33, 65, 129],
            k: 0.35,
            atom: (0.5, 0.5),
            tau_atom: (0.25, 0.25),
            coeff: "identity".into(),
            radii: (2..=10).map(|k| 2f64.powi(-k)).collect(),
            seed: 7,
            domain: Rect::unit_square(),
            omega: None,
            density_amp: 8.0,
            disk_radius: 0.2,
            out: None,
        };
        match name {
            "delta" => Ok(ExperimentConfig {
                grid_sizes: vec![33, 65, 129, 257, 385, 513],
                ..base
            }),
            "invariance" => Ok(base),
            "ratio" => Ok(ExperimentConfig {
                grid_sizes: vec![16, 32, 64, 128],
                ..base
            }),
            "capacity" => Ok(ExperimentConfig {
                grid_sizes: vec![16, 32, 64, 128, 256],
                ..base
            }),
            other => Err(Error::Config(format!(
                "unknown experiment {other:?}; expected one of {EXPERIMENTS:?}"
            ))),
        }
    }

    /// Reads a `key = value` file; the file must name the experiment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut pairs = Vec::new();
        let mut experiment = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key == "experiment" {
                experiment = Some(value);
            } else {
                pairs.push((key, value));
            }
        }
        let name = experiment
            .ok_or_else(|| Error::Config(format!("{}: missing experiment key", path.display())))?;
        let mut cfg = ExperimentConfig::default_for(&name)?;
        for (k, v) in pairs {
            cfg.apply(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad value for {what}: {value:?}"));
        match key {
            "experiment" => self.experiment = value.to_string(),
            "grid_sizes" => {
                self.grid_sizes = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(key))?;
            }
            "k" => self.k = value.parse().map_err(|_| bad(key))?,
            "atom" => self.atom = parse_pair(value).ok_or_else(|| bad(key))?,
            "tau_atom" => self.tau_atom = parse_pair(value).ok_or_else(|| bad(key))?,
            "coeff" => self.coeff = value.to_string(),
            "radii" => {
                self.radii = parse_radii(value).ok_or_else(|| bad(key))?;
            }
            "seed" => self.seed = value.parse().map_err(|_| bad(key))?,
            "domain" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(key))?;
                if parts.len() != 4 {
                    return Err(bad(key));
                }
                self.domain = Rect::new(parts[0], parts[1], parts[2], parts[3])?;
            }
            "omega" => {
                self.omega = if value == "auto" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad(key))?)
                };
            }
            "density_amp" => self.density_amp = value.parse().map_err(|_| bad(key))?,
            "disk_radius" => self.disk_radius = value.parse().map_err(|_| bad(key))?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Config(format!("unknown configuration key {other:?}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_sizes.is_empty() {
            return Err(Error::Config("grid_sizes must be nonempty".into()));
        }
        if !self.grid_sizes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "grid sizes must be strictly increasing".into(),
            ));
        }
        if !(self.k > 0.0) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        if !self.domain.contains_open(self.atom.0, self.atom.1) {
            return Err(Error::Config(
                "the atom must lie strictly inside the domain".into(),
            ));
        }
        if !self.radii.is_empty() && !self.radii.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::Config("radii must be strictly decreasing".into()));
        }
        if let Some(w) = self.omega {
            if !(w > 0.0 && w < 2.0) {
                return Err(Error::Config(format!("omega must lie in (0, 2), got {w}")));
            }
        }
        Ok(())
    }

    /// Relaxation factor for a level: configured value or the tuned default.
    pub fn omega_for(&self, n: usize) -> f64 {
        self.omega
            .unwrap_or_else(|| 2.0 / (1.0 + (std::f64::consts::PI / n as f64).sin()))
    }

    /// Deterministic key/value echo for report provenance.
    pub fn echo(&self) -> Vec<(String, String)> {
        let sizes = self
            .grid_sizes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let radii = self
            .radii
            .iter()
            .map(|r| format!("{r}"))
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("experiment".into(), self.experiment.clone()),
            ("grid_sizes".into(), sizes),
            ("k".into(), format!("{}", self.k)),
            ("atom".into(), format!("{},{}", self.atom.0, self.atom.1)),
            (
                "tau_atom".into(),
                format!("{},{}", self.tau_atom.0, self.tau_atom.1),
            ),
            ("coeff".into(), self.coeff.clone()),
            ("radii".into(), radii),
            ("seed".into(), format!("{}", self.seed)),
            (
                "domain".into(),
                format!(
                    "{},{},{},{}",
                    self.domain.x0, self.domain.y0, self.domain.x1, self.domain.y1
                ),
            ),
            (
                "omega".into(),
                self.omega.map_or("auto".into(), |w| format!("{w}")),
            ),
            ("density_amp".into(), format!("{}", self.density_amp)),
            ("disk_radius".into(), format!("{}", self.disk_radius)),
        ]
    }
}

fn parse_pair(value: &str) -> Option<(f64, f64)> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return None;
    }
    Some((parts[0].parse().ok()?, parts[1].parse().ok()?))
}

/// Either a comma list or `geo:<start>:<factor>:<count>`.
pub fn parse_radii(value: &str) -> Option<Vec<f64>> {
    if let Some(geo) = value.strip_prefix("geo:") {
        let parts: Vec<&str> = geo.split(':').collect();
        if parts.len() != 3 {
            return None;
        }
        let start: f64 = parts[0].parse().ok()?;
        let factor: f64 = parts[1].parse().ok()?;
        let count: usize = parts[2].parse().ok()?;
        let mut out = Vec::with_capacity(count);
        let mut r = start;
        for _ in 0..count {
            out.push(r);
            r *= factor;
        }
        return Some(out);
    }
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for name in EXPERIMENTS {
            let cfg = ExperimentConfig::default_for(name).unwrap();
            cfg.validate().unwrap();
        }
        assert!(ExperimentConfig::default_for("bogus").is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = std::env::temp_dir().join("oplab-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("delta.cfg");
        std::fs::write(
            &path,
            "# study\nexperiment = delta\nk = 0.2\ngrid_sizes = 17, 33\nomega = auto\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        assert_eq!(cfg.experiment, "delta");
        assert_eq!(cfg.k, 0.2);
        assert_eq!(cfg.grid_sizes, vec![17, 33]);
        assert!(cfg.omega.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = ExperimentConfig::default_for("delta").unwrap();
        assert!(cfg.apply("bogus_key", "1").is_err());
        assert!(cfg.apply("k", "not-a-number").is_err());
        cfg.apply("k", "-1").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg2 = ExperimentConfig::default_for("delta").unwrap();
        cfg2.apply("grid_sizes", "64,32").unwrap();
        assert!(cfg2.validate().is_err());
    }

    #[test]
    fn radii_specs() {
        assert_eq!(parse_radii("0.5, 0.25").unwrap(), vec![0.5, 0.25]);
        let geo = parse_radii("geo:0.25:0.5:3").unwrap();
        assert_eq!(geo, vec![0.25, 0.125, 0.0625]);
        assert!(parse_radii("geo:1:2").is_none());
    }

    #[test]
    fn tuned_omega_tracks_level() {
        let cfg = ExperimentConfig::default_for("delta").unwrap();
        assert!(cfg.omega_for(33) < cfg.omega_for(513));
        assert!(cfg.omega_for(513) < 2.0);
        let mut fixed = cfg.clone();
        fixed.apply("omega", "1.8").unwrap();
        assert_eq!(fixed.omega_for(513), 1.8);
    }
}
