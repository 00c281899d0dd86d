//! Flat `key = value` experiment files with `#` comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::ca::Topology;
use crate::error::{Error, Result};
use crate::evolve::{EaConfig, LatticeSpec};

/// Everything `evolve` needs besides the output directory and worker count.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ea: EaConfig,
    /// Set when the lattice is one of the canonical topologies.
    pub topology: Option<Topology>,
    pub replicates: usize,
    /// Updates between checkpoints; 0 disables checkpointing.
    pub checkpoint_every: usize,
    /// `None` until a seed is given or generated.
    pub seed: Option<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ea: EaConfig::default(),
            topology: Some(Topology::D1),
            replicates: 1,
            checkpoint_every: 100,
            seed: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "topology",
    "dims",
    "radius",
    "population_size",
    "replacement_rate",
    "samples_per_eval",
    "updates",
    "fitness_window",
    "initial_genome_len",
    "initial_genes",
    "point_rate",
    "indel_rate",
    "indel_size",
    "ic_scheme",
    "seed",
    "replicates",
    "checkpoint_every",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::invalid(format!("`{v}` is not a valid value for {key}")))
}

/// `35`, `7x7` or `3x3x5`.
pub fn parse_dims(v: &str) -> Result<Vec<usize>> {
    v.split(['x', 'X', ','])
        .map(|p| num::<usize>("dims", p.trim()))
        .collect()
}

pub fn format_dims(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
}

/// `16..512` (half-open).
fn parse_range(v: &str) -> Result<std::ops::Range<usize>> {
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| Error::invalid(format!("`{v}` is not a range like 16..512")))?;
    Ok(num("indel_size", a.trim())?..num("indel_size", b.trim())?)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let ea = &mut self.ea;
        match key.trim() {
            "topology" => {
                let t: Topology = v.parse()?;
                ea.lattice = t.into();
                self.topology = Some(t);
            }
            "dims" => {
                ea.lattice.dims = parse_dims(v)?;
                self.topology = None;
            }
            "radius" => {
                ea.lattice.radius = num("radius", v)?;
                self.topology = None;
            }
            "population_size" => ea.population_size = num("population_size", v)?,
            "replacement_rate" => ea.replacement_rate = num("replacement_rate", v)?,
            "samples_per_eval" => ea.samples_per_eval = num("samples_per_eval", v)?,
            "updates" => ea.updates = num("updates", v)?,
            "fitness_window" => ea.fitness_window = num("fitness_window", v)?,
            "initial_genome_len" => ea.initial_genome_len = num("initial_genome_len", v)?,
            "initial_genes" => ea.initial_genes = num("initial_genes", v)?,
            "point_rate" => ea.mutation.point_rate = num("point_rate", v)?,
            "indel_rate" => ea.mutation.indel_rate = num("indel_rate", v)?,
            "indel_size" => ea.mutation.indel_size = parse_range(v)?,
            "ic_scheme" => ea.ic_scheme = v.parse()?,
            "seed" => self.seed = Some(num("seed", v)?),
            "replicates" => self.replicates = num("replicates", v)?,
            "checkpoint_every" => self.checkpoint_every = num("checkpoint_every", v)?,
            other => {
                return Err(Error::invalid(format!(
                    "unknown key `{other}` (known keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        if self.topology.is_some_and(|t| LatticeSpec::from(t) != self.ea.lattice) {
            self.topology = None;
        }
        if self.topology.is_none() {
            self.topology = [Topology::D1, Topology::D2, Topology::D3]
                .into_iter()
                .find(|&t| LatticeSpec::from(t) == self.ea.lattice);
        }
        Ok(())
    }

    /// Applies `key=value` text on top of `self`. Errors carry the line.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, format!("expected `key = value`, found `{line}`")))?;
            self.set(k, v).map_err(|e| Error::parse(origin, i + 1, strip_kind(e)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ea.validate()?;
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        Ok(())
    }

    /// Config for replicate `r`: seed `master + r`.
    pub fn replicate(&self, r: usize) -> Result<EaConfig> {
        let master = self.seed.ok_or_else(|| Error::invalid("no seed set"))?;
        Ok(EaConfig {
            seed: master.wrapping_add(r as u64),
            ..self.ea.clone()
        })
    }

    /// Every key with its resolved value; parsing the text back gives `self`.
    pub fn to_text(&self) -> String {
        let ea = &self.ea;
        let mut s = String::new();
        if let Some(t) = self.topology {
            let _ = writeln!(s, "topology = {t}");
        }
        let _ = writeln!(s, "dims = {}", format_dims(&ea.lattice.dims));
        let _ = writeln!(s, "radius = {}", ea.lattice.radius);
        let _ = writeln!(s, "population_size = {}", ea.population_size);
        let _ = writeln!(s, "replacement_rate = {}", ea.replacement_rate);
        let _ = writeln!(s, "samples_per_eval = {}", ea.samples_per_eval);
        let _ = writeln!(s, "updates = {}", ea.updates);
        let _ = writeln!(s, "fitness_window = {}", ea.fitness_window);
        let _ = writeln!(s, "initial_genome_len = {}", ea.initial_genome_len);
        let _ = writeln!(s, "initial_genes = {}", ea.initial_genes);
        let _ = writeln!(s, "point_rate = {}", ea.mutation.point_rate);
        let _ = writeln!(s, "indel_rate = {}", ea.mutation.indel_rate);
        let _ = writeln!(
            s,
            "indel_size = {}..{}",
            ea.mutation.indel_size.start, ea.mutation.indel_size.end
        );
        let _ = writeln!(s, "ic_scheme = {}", ea.ic_scheme);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        let _ = writeln!(s, "replicates = {}", self.replicates);
        let _ = writeln!(s, "checkpoint_every = {}", self.checkpoint_every);
        s
    }
}

fn strip_kind(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_standard_parameters() {
        let c = ExperimentConfig::default();
        assert_eq!(c.ea.population_size, 500);
        assert_eq!(c.ea.replacement_count(), 50);
        assert_eq!(c.ea.samples_per_eval, 100);
        assert_eq!(c.ea.updates, 10_000);
        assert_eq!(c.ea.fitness_window, 10);
        assert_eq!(c.ea.initial_genome_len, 10_000);
        assert_eq!(c.ea.initial_genes, 16);
        assert_eq!(c.ea.mutation.point_rate, 0.01);
        assert_eq!(c.ea.lattice.dims, vec![35]);
        assert_eq!(c.ea.lattice.radius, 2);
    }

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::default();
        c.apply_text(
            "topology = 3d\nupdates=7 # short\n\nseed = 9\nindel_size = 20..40\nic_scheme=binomial\n",
            "t",
        )
        .unwrap();
        assert_eq!(c.topology, Some(Topology::D3));
        assert_eq!(c.ea.lattice.dims, vec![3, 3, 5]);
        let mut back = ExperimentConfig::default();
        back.apply_text(&c.to_text(), "t").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn custom_lattice_drops_topology_name() {
        let mut c = ExperimentConfig::default();
        c.apply_text("dims = 49\nradius = 3\n", "t").unwrap();
        assert_eq!(c.topology, None);
        c.apply_text("dims = 35\nradius = 2\n", "t").unwrap();
        assert_eq!(c.topology, Some(Topology::D1));
    }

    #[test]
    fn errors_name_the_line() {
        let mut c = ExperimentConfig::default();
        let err = c
            .apply_text("updates = 5\n\npopulation_size = lots\n", "smoke.cfg")
            .unwrap_err();
        assert!(err.to_string().starts_with("smoke.cfg:3:"), "{err}");
        let err = c.apply_text("# ok\nbogus = 1\n", "smoke.cfg").unwrap_err();
        assert!(err.to_string().contains("smoke.cfg:2: unknown key `bogus`"), "{err}");
        let err = c.apply_text("no equals sign\n", "x").unwrap_err();
        assert!(err.to_string().starts_with("x:1:"), "{err}");
    }

    #[test]
    fn replicate_seeds_are_offsets() {
        let c = ExperimentConfig {
            seed: Some(40),
            ..Default::default()
        };
        assert_eq!(c.replicate(2).unwrap().seed, 42);
        assert!(ExperimentConfig::default().replicate(0).is_err());
    }
}
