//! What to run: the config file, with command-line flags layered on top.

use anyhow::{bail, Context, Result};
use regroup_core::sim::{SimConfig, Strategy};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub map: Option<PathBuf>,
    /// Scenario file; when absent the scenario is generated from `sim.seed`.
    pub scenario: Option<PathBuf>,
    pub strategies: Vec<Strategy>,
    pub trials: usize,
    pub out: PathBuf,
    /// Worker threads for batches, 0 for one per core.
    pub jobs: usize,
    pub dump_fields: bool,
    pub sim: SimConfig,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            map: None,
            scenario: None,
            strategies: Strategy::ALL.to_vec(),
            trials: 100,
            out: PathBuf::from("out"),
            jobs: 0,
            dump_fields: false,
            sim: SimConfig::default(),
        }
    }
}

impl Manifest {
    /// Reads a TOML manifest. Relative paths in it are taken from the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut m: Manifest = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let Some(p) = m.map.as_mut() {
            rebase(p);
        }
        if let Some(p) = m.scenario.as_mut() {
            rebase(p);
        }
        rebase(&mut m.out);
        Ok(m)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn map_path(&self) -> Result<&Path> {
        match &self.map {
            Some(p) => Ok(p),
            None => bail!("no map given (use --map or `map` in the config file)"),
        }
    }

    pub fn strategies(&self) -> Result<Vec<Strategy>> {
        let mut out = Vec::new();
        for &s in &self.strategies {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            bail!("no strategy selected");
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let m = Manifest::default();
        let back: Manifest = toml::from_str(&m.to_toml()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let m: Manifest = toml::from_str("trials = 3\n[sim]\ndt = 0.5\n").unwrap();
        assert_eq!(m.trials, 3);
        assert_eq!(m.sim.dt, 0.5);
        assert_eq!(m.sim.speed, SimConfig::default().speed);
        assert_eq!(m.strategies, Strategy::ALL.to_vec());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Manifest>("trails = 3\n").is_err());
        assert!(toml::from_str::<Manifest>("[sim]\nspeeed = 1.0\n").is_err());
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "map = \"m.map\"\nout = \"res\"\n").unwrap();
        let m = Manifest::load(&path).unwrap();
        assert_eq!(m.map.unwrap(), dir.path().join("m.map"));
        assert_eq!(m.out, dir.path().join("res"));
    }
}
