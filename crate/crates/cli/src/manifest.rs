//! Bench suite manifests.
//!
//! ```toml
//! master_seed = 1
//! runs = 3
//! oracle = false
//!
//! [budget]
//! restarts = 20        # or: time_s = 10.0
//!
//! [[instance]]
//! path = "tiny_a.ttp"  # relative to the manifest
//!
//! [[solver]]
//! variant = "s4"
//! alpha = 1e-4         # optional
//! neighbors = "knn:8"  # optional, default delaunay
//! label = "coco"       # optional, default the variant name
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use coco_ttp::bench::{ExperimentConfig, SolverSpec, SuiteEntry};
use coco_ttp::{Budget, NeighborBackend, Variant};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub oracle: bool,
    pub budget: Option<BudgetSpec>,
    #[serde(default, rename = "instance")]
    pub instances: Vec<InstanceEntry>,
    #[serde(default, rename = "solver")]
    pub solvers: Vec<SolverEntry>,
}

fn default_runs() -> usize {
    10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub restarts: Option<usize>,
    pub time_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceEntry {
    pub path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    pub variant: String,
    pub alpha: Option<f64>,
    pub neighbors: Option<String>,
    pub label: Option<String>,
}

/// A manifest resolved into the bench inputs.
pub struct Suite {
    pub entries: Vec<SuiteEntry>,
    pub solvers: Vec<SolverSpec>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Validates the manifest and loads its instances. Paths are taken
    /// relative to `base`. Instances that fail to load stay in the suite and
    /// are reported as failures by the experiment.
    pub fn resolve(self, base: &Path) -> Result<Suite> {
        if self.instances.is_empty() {
            bail!("manifest lists no instances");
        }
        if self.solvers.is_empty() && !self.oracle {
            bail!("manifest lists no solvers");
        }
        if self.runs == 0 {
            bail!("runs must be positive");
        }
        let budget = match self.budget {
            None => Budget::default(),
            Some(BudgetSpec { restarts: Some(r), time_s: None }) => {
                if r == 0 {
                    bail!("budget.restarts must be positive");
                }
                Budget::Restarts(r)
            }
            Some(BudgetSpec { restarts: None, time_s: Some(t) }) => {
                if !(t.is_finite() && t > 0.0) {
                    bail!("budget.time_s must be positive");
                }
                Budget::Time(Duration::from_secs_f64(t))
            }
            Some(_) => bail!("budget needs exactly one of restarts, time_s"),
        };

        let mut solvers = Vec::with_capacity(self.solvers.len());
        for s in self.solvers {
            let variant: Variant = s.variant.parse()?;
            let mut spec = SolverSpec::new(variant);
            if let Some(a) = s.alpha {
                if !(a > 0.0) {
                    bail!("alpha must be positive, got {a}");
                }
                spec.alpha = a;
            }
            if let Some(nb) = s.neighbors {
                spec.neighbors = nb.parse::<NeighborBackend>()?;
            }
            if let Some(label) = s.label {
                spec.label = label;
            }
            if solvers.iter().any(|o: &SolverSpec| o.label == spec.label) {
                bail!("duplicate solver label '{}'", spec.label);
            }
            solvers.push(spec);
        }

        let entries = self
            .instances
            .iter()
            .map(|e| SuiteEntry::from_path(&base.join(&e.path)))
            .collect();
        Ok(Suite {
            entries,
            solvers,
            config: ExperimentConfig {
                runs: self.runs,
                budget,
                master_seed: self.master_seed,
                oracle: self.oracle,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Suite> {
        let m: Manifest = toml::from_str(text)?;
        m.resolve(Path::new("."))
    }

    #[test]
    fn empty_manifest_rejected() {
        assert!(parse("").is_err());
        assert!(parse("runs = 3\n[[solver]]\nvariant = \"s4\"\n").is_err());
        assert!(parse("[[instance]]\npath = \"a.ttp\"\n").is_err());
    }

    #[test]
    fn oracle_alone_is_a_solver() {
        let s = parse("oracle = true\n[[instance]]\npath = \"a.ttp\"\n").unwrap();
        assert!(s.solvers.is_empty());
        assert!(s.config.oracle);
    }

    #[test]
    fn fields_resolve() {
        let s = parse(
            r#"
master_seed = 9
runs = 2
[budget]
restarts = 4
[[instance]]
path = "a.ttp"
[[solver]]
variant = "s1"
[[solver]]
variant = "coco"
alpha = 0.01
neighbors = "knn:5"
label = "full"
"#,
        )
        .unwrap();
        assert_eq!(s.config.runs, 2);
        assert_eq!(s.config.master_seed, 9);
        assert_eq!(s.config.budget, Budget::Restarts(4));
        assert_eq!(s.solvers[0].label, "s1");
        assert_eq!(s.solvers[1].variant, Variant::S4);
        assert_eq!(s.solvers[1].neighbors, NeighborBackend::Knn(5));
        assert_eq!(s.solvers[1].label, "full");
        assert!(s.entries[0].instance.is_err());
    }

    #[test]
    fn bad_budgets() {
        let inst = "[[instance]]\npath = \"a\"\n[[solver]]\nvariant = \"s4\"\n";
        assert!(parse(&format!("[budget]\n{inst}")).is_err());
        assert!(parse(&format!("[budget]\nrestarts = 1\ntime_s = 1.0\n{inst}")).is_err());
        assert!(parse(&format!("[budget]\ntime_s = -1.0\n{inst}")).is_err());
        assert!(parse(&format!("[budget]\nrestarts = 0\n{inst}")).is_err());
        assert!(parse(&format!("[budget]\ntime_s = 0.5\n{inst}")).is_ok());
    }

    #[test]
    fn duplicate_labels_and_unknown_fields() {
        let base = "[[instance]]\npath = \"a\"\n";
        assert!(parse(&format!("{base}[[solver]]\nvariant = \"s4\"\n[[solver]]\nvariant = \"s4\"\n")).is_err());
        assert!(parse(&format!("{base}[[solver]]\nvariant = \"s4\"\nspeed = 1\n")).is_err());
        assert!(parse(&format!("{base}[[solver]]\nvariant = \"s9\"\n")).is_err());
    }
}
