//! Experiment configuration file: TOML, every length in meters.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ndgi_core::psf::matched_reference_distance;
use ndgi_core::{Aperture, ExperimentConfig, GeometryParams, Grid, SpeckleParams, TurbulenceSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub geometry: GeometrySection,
    #[serde(default)]
    pub turbulence: TurbulenceSection,
    pub grid: Option<GridSection>,
    pub object: Option<ObjectSection>,
    pub run: Option<RunSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub lambda_s: f64,
    pub lambda_r: f64,
    pub z1: f64,
    /// Defaults to `z1`.
    pub z2: Option<f64>,
    /// Defaults to the matched distance `lambda_s z1 / lambda_r`.
    pub z3: Option<f64>,
    pub omega: f64,
    pub l_c: f64,
}

/// One structure constant or a list; a list repeats a sweep once per value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cn2 {
    One(f64),
    Many(Vec<f64>),
}

impl Default for Cn2 {
    fn default() -> Self {
        Cn2::One(0.0)
    }
}

impl Cn2 {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Cn2::One(v) => vec![*v],
            Cn2::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceSection {
    #[serde(default)]
    pub cn2: Cn2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub pitch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectSection {
    Open,
    Pinhole {
        #[serde(default)]
        x: f64,
        #[serde(default)]
        y: f64,
    },
    Disk {
        radius: f64,
    },
    DoubleSlit {
        width: f64,
        separation: f64,
        length: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub realizations: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rough_surface: bool,
    #[serde(default)]
    pub detector_propagation: bool,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Copy with every default filled in.
    pub fn resolved(&self) -> Self {
        let mut r = self.clone();
        let g = &mut r.geometry;
        g.z2 = Some(g.z2.unwrap_or(g.z1));
        g.z3 = Some(g.z3.unwrap_or_else(|| matched_reference_distance(g.lambda_s, g.z1, g.lambda_r)));
        r
    }

    /// SHA-256 of the resolved configuration, with `seed` substituted.
    pub fn digest(&self, seed: Option<u64>) -> String {
        let mut r = self.resolved();
        if let (Some(run), Some(seed)) = (r.run.as_mut(), seed) {
            run.seed = seed;
        }
        let text = toml::to_string(&r).expect("configuration serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn geometry(&self) -> Result<GeometryParams> {
        let r = self.resolved();
        let g = r.geometry;
        GeometryParams::new(
            g.lambda_s,
            g.lambda_r,
            g.z1,
            g.z2.unwrap_or(g.z1),
            g.z3.unwrap_or(g.z1),
            g.omega,
            g.l_c,
        )
        .map_err(|e| CliError::Config(format!("[geometry] {e}")))
    }

    /// Turbulence over the signal path, one per configured `cn2`.
    pub fn turbulence(&self) -> Result<Vec<TurbulenceSpec>> {
        let values = self.turbulence.cn2.values();
        if values.is_empty() {
            return Err(CliError::Config("[turbulence] cn2 list is empty".into()));
        }
        values
            .into_iter()
            .map(|cn2| {
                TurbulenceSpec::new(cn2, self.geometry.z1, self.geometry.lambda_s)
                    .map_err(|e| CliError::Config(format!("[turbulence] {e}")))
            })
            .collect()
    }

    pub fn experiment(&self, seed_override: Option<u64>) -> Result<ExperimentConfig> {
        let section = |name: &str| CliError::Config(format!("simulation needs a [{name}] section"));
        let grid_s = self.grid.as_ref().ok_or_else(|| section("grid"))?;
        let object_s = self.object.as_ref().ok_or_else(|| section("object"))?;
        let run = self.run.as_ref().ok_or_else(|| section("run"))?;
        let grid = Grid::new(grid_s.n, grid_s.pitch).map_err(|e| CliError::Config(format!("[grid] {e}")))?;
        let speckle = SpeckleParams::new(self.geometry.omega, self.geometry.l_c, grid)
            .map_err(|e| CliError::Config(format!("[geometry]/[grid] {e}")))?;
        let object = match *object_s {
            ObjectSection::Open => Ok(Aperture::ones(grid)),
            ObjectSection::Pinhole { x, y } => Aperture::pinhole(grid, x, y),
            ObjectSection::Disk { radius } => Aperture::disk(grid, radius),
            ObjectSection::DoubleSlit {
                width,
                separation,
                length,
            } => Aperture::double_slit(grid, width, separation, length),
        }
        .map_err(|e| CliError::Config(format!("[object] {e}")))?;
        let turbulence = match self.turbulence()?.as_slice() {
            [one] => *one,
            _ => return Err(CliError::Config("simulation takes a single [turbulence] cn2".into())),
        };
        ExperimentConfig::new(
            self.geometry()?,
            speckle,
            Some(turbulence),
            object,
            run.realizations,
            seed_override.unwrap_or(run.seed),
        )
        .map(|c| {
            c.with_rough_surface(run.rough_surface)
                .with_detector_propagation(run.detector_propagation)
        })
        .map_err(|e| CliError::Config(format!("[run] {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DESK: &str = include_str!("../../../configs/desk.toml");

    #[test]
    fn shipped_desk_profile_parses() {
        let cfg = FileConfig::parse(DESK).unwrap();
        let exp = cfg.experiment(None).unwrap();
        assert_eq!(exp.realizations, 5000);
        assert_eq!(exp.speckle.grid().n(), 1024);
        assert!(exp.geometry.is_matched());
        assert_eq!(exp.geometry.z2, exp.geometry.z1);
    }

    #[test]
    fn unknown_field_is_reported_with_location() {
        let text = DESK.replace("l_c =", "lc =");
        let err = FileConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("lc"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn cn2_accepts_list() {
        let text = DESK.replace("cn2 = 0.0", "cn2 = [1e-15, 1e-12]");
        let cfg = FileConfig::parse(&text).unwrap();
        assert_eq!(cfg.turbulence().unwrap().len(), 2);
        assert!(cfg.experiment(None).is_err());
    }

    #[test]
    fn digest_tracks_resolved_values() {
        let a = FileConfig::parse(DESK).unwrap();
        let mut b = a.clone();
        b.geometry.z2 = Some(b.geometry.z1);
        assert_eq!(a.digest(None), b.digest(None));
        assert_ne!(a.digest(None), a.digest(Some(99)));
        assert_eq!(a.digest(None).len(), 64);
        b.geometry.omega *= 2.0;
        assert_ne!(a.digest(None), b.digest(None));
    }

    #[test]
    fn sweep_config_needs_no_grid() {
        let text = "[geometry]\nlambda_s = 800e-9\nlambda_r = 400e-9\nz1 = 1000.0\nomega = 0.05\nl_c = 1e-3\n";
        let cfg = FileConfig::parse(text).unwrap();
        assert!((cfg.geometry().unwrap().z3 - 2000.0).abs() < 1e-9);
        assert!(matches!(cfg.experiment(None), Err(CliError::Config(_))));
    }
}
