//! Resumable run state.
//!
//! A checkpoint is a directory:
//!
//! ```text
//! manifest.json          config, counters, run log, per-individual metadata
//! genomes/<id>.genome    one genome file per individual (and the best snapshot)
//! ```
//!
//! Every random stream is derived from the master seed and the update index,
//! so no generator state needs saving.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EaConfig, Individual, Population, RunLog};
use crate::ca::{Lattice, NEIGHBOR_ORDER};
use crate::error::{Error, Result};
use crate::genome::{Genome, GenomeFile};

pub const CHECKPOINT_MANIFEST: &str = "manifest.json";
const FORMAT: &str = "sasoca-checkpoint v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct IndividualMeta {
    id: u64,
    parent_id: Option<u64>,
    raw_fitness: Option<f64>,
    lineage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    format: String,
    neighbor_order: String,
    config: EaConfig,
    next_update: usize,
    next_id: u64,
    individuals: Vec<IndividualMeta>,
    best: Option<IndividualMeta>,
    log: RunLog,
}

/// Everything needed to continue a run exactly where it stopped.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: EaConfig,
    pub log: RunLog,
    pub next_update: usize,
    next_id: u64,
    individuals: Vec<(IndividualMeta, Genome)>,
    best: Option<(IndividualMeta, Genome)>,
}

fn meta(ind: &Individual) -> IndividualMeta {
    IndividualMeta {
        id: ind.id,
        parent_id: ind.parent_id,
        raw_fitness: ind.raw_fitness,
        lineage: ind.lineage.iter().copied().collect(),
    }
}

fn rebuild(m: &IndividualMeta, genome: &Genome, lattice: &Lattice) -> Individual {
    let mut ind = Individual::new(
        m.id,
        m.parent_id,
        genome.clone(),
        lattice,
        VecDeque::from(m.lineage.clone()),
    );
    ind.raw_fitness = m.raw_fitness;
    ind
}

fn genome_path(dir: &Path, name: &str) -> PathBuf {
    dir.join("genomes").join(format!("{name}.genome"))
}

impl Checkpoint {
    pub fn capture(
        config: &EaConfig,
        pop: &Population,
        log: &RunLog,
        next_update: usize,
        best: Option<&Individual>,
    ) -> Self {
        Checkpoint {
            config: config.clone(),
            log: log.clone(),
            next_update,
            next_id: pop.next_id,
            individuals: pop.individuals.iter().map(|i| (meta(i), i.genome.clone())).collect(),
            best: best.map(|b| (meta(b), b.genome.clone())),
        }
    }

    pub fn restore(&self, lattice: &Lattice) -> Result<(Population, Option<Individual>)> {
        if self.individuals.len() != self.config.population_size {
            return Err(Error::Data(format!(
                "checkpoint holds {} individuals but the config asks for {}",
                self.individuals.len(),
                self.config.population_size
            )));
        }
        let individuals = self.individuals.iter().map(|(m, g)| rebuild(m, g, lattice)).collect();
        let best = self.best.as_ref().map(|(m, g)| rebuild(m, g, lattice));
        Ok((
            Population {
                individuals,
                next_id: self.next_id,
            },
            best,
        ))
    }

    /// Writes the checkpoint next to `dir` and then swaps it into place, so
    /// an interrupted save leaves the previous checkpoint intact.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let total = self.config.lattice.build()?.layout().total();
        let staging = sibling(dir, "partial");
        let old = sibling(dir, "old");
        for d in [&staging, &old] {
            if d.exists() {
                fs::remove_dir_all(d).map_err(|e| Error::io(d, e))?;
            }
        }
        let genomes = staging.join("genomes");
        fs::create_dir_all(&genomes).map_err(|e| Error::io(&genomes, e))?;
        let write_genome = |name: &str, g: &Genome| {
            GenomeFile {
                genome: g.clone(),
                total_states: total,
            }
            .write(&genome_path(&staging, name))
        };
        for (m, g) in &self.individuals {
            write_genome(&m.id.to_string(), g)?;
        }
        if let Some((_, g)) = &self.best {
            write_genome("best", g)?;
        }
        let manifest = Manifest {
            format: FORMAT.into(),
            neighbor_order: NEIGHBOR_ORDER.into(),
            config: self.config.clone(),
            next_update: self.next_update,
            next_id: self.next_id,
            individuals: self.individuals.iter().map(|(m, _)| m.clone()).collect(),
            best: self.best.as_ref().map(|(m, _)| m.clone()),
            log: self.log.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Data(e.to_string()))?;
        let mpath = staging.join(CHECKPOINT_MANIFEST);
        fs::write(&mpath, json).map_err(|e| Error::io(&mpath, e))?;

        if dir.exists() {
            fs::rename(dir, &old).map_err(|e| Error::io(dir, e))?;
        }
        fs::rename(&staging, dir).map_err(|e| Error::io(dir, e))?;
        if old.exists() {
            fs::remove_dir_all(&old).map_err(|e| Error::io(&old, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let mpath = dir.join(CHECKPOINT_MANIFEST);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::parse(mpath.display().to_string(), e.line(), e.to_string()))?;
        if m.format != FORMAT {
            return Err(Error::Data(format!(
                "{}: unsupported format `{}`",
                mpath.display(),
                m.format
            )));
        }
        if m.neighbor_order != NEIGHBOR_ORDER {
            return Err(Error::Data(format!(
                "{}: neighbor order `{}` differs from this build's `{NEIGHBOR_ORDER}`",
                mpath.display(),
                m.neighbor_order
            )));
        }
        let total = m.config.lattice.build()?.layout().total();
        let read_genome = |name: &str| -> Result<Genome> {
            let f = GenomeFile::read(&genome_path(dir, name))?;
            if f.total_states != total {
                return Err(Error::Data(format!(
                    "genome {name} has total_states={} but the checkpoint lattice needs {total}",
                    f.total_states
                )));
            }
            Ok(f.genome)
        };
        let individuals = m
            .individuals
            .iter()
            .map(|im| Ok((im.clone(), read_genome(&im.id.to_string())?)))
            .collect::<Result<Vec<_>>>()?;
        let best = match &m.best {
            Some(bm) => Some((bm.clone(), read_genome("best")?)),
            None => None,
        };
        Ok(Checkpoint {
            config: m.config,
            log: m.log,
            next_update: m.next_update,
            next_id: m.next_id,
            individuals,
            best,
        })
    }
}

fn sibling(dir: &Path, suffix: &str) -> PathBuf {
    let mut name = dir
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "checkpoint".into());
    name.push(format!(".{suffix}"));
    dir.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::super::{run_ea, CheckpointPolicy, Evolver, Jobs};
    use super::*;

    fn cfg() -> EaConfig {
        EaConfig {
            population_size: 10,
            samples_per_eval: 8,
            updates: 6,
            initial_genome_len: 1_000,
            seed: 17,
            ..Default::default()
        }
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let tmp = tempfile::tempdir().unwrap();
        let ckdir = tmp.path().join("ck");
        let (full_log, full_dom) = run_ea(cfg(), Jobs(1)).unwrap();

        let mut ev = Evolver::new(cfg(), Jobs(1))
            .unwrap()
            .with_checkpoints(CheckpointPolicy {
                dir: ckdir.clone(),
                every: 2,
            });
        for _ in 0..3 {
            ev.step().unwrap();
        }
        // last checkpoint was after update 2; updates after it are lost
        drop(ev);
        let ck = Checkpoint::load(&ckdir).unwrap();
        assert_eq!(ck.next_update, 2);
        let (log, dom) = Evolver::resume(ck, Jobs(2)).unwrap().run().unwrap();
        assert_eq!(log, full_log);
        assert_eq!(dom.genome, full_dom.genome);
        assert_eq!(dom.id, full_dom.id);
        assert!(!sibling(&ckdir, "partial").exists());
        assert!(!sibling(&ckdir, "old").exists());
    }

    #[test]
    fn resume_after_finish_returns_saved_dominant() {
        let tmp = tempfile::tempdir().unwrap();
        let ckdir = tmp.path().join("ck");
        let ev = Evolver::new(cfg(), Jobs(1))
            .unwrap()
            .with_checkpoints(CheckpointPolicy {
                dir: ckdir.clone(),
                every: 4,
            });
        let (log, dom) = ev.run().unwrap();
        let ck = Checkpoint::load(&ckdir).unwrap();
        assert_eq!(ck.next_update, 6);
        let (log2, dom2) = Evolver::resume(ck, Jobs(1)).unwrap().run().unwrap();
        assert_eq!(log, log2);
        assert_eq!(dom.genome, dom2.genome);
        assert_eq!(dom.lineage, dom2.lineage);
    }

    #[test]
    fn corrupt_manifest_is_a_parse_error() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join(CHECKPOINT_MANIFEST), "{ not json").unwrap();
        assert!(matches!(Checkpoint::load(tmp.path()), Err(Error::Parse { .. })));
        assert!(matches!(
            Checkpoint::load(&tmp.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }
}
