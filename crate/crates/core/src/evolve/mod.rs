//! The evolutionary algorithm.
//!
//! One *update*: re-evaluate every individual on a fresh IC set shared by the
//! whole population, push the result onto each lineage window, cull the
//! lowest-ranked tenth, and refill by fitness-proportional asexual
//! reproduction with mutation. Ten updates are roughly one generation.

mod checkpoint;
mod log;

pub use checkpoint::{Checkpoint, CHECKPOINT_MANIFEST};
pub use log::{RunLog, UpdateRecord, RUN_LOG_HEADER};

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ca::{count_correct, gen_ic, Configuration, IcScheme, Lattice};
use crate::error::{Error, Result};
use crate::fsm::{Fsm, KnockoutMask, SlicedFsm};
use crate::genome::{indel_mutate, point_mutate, random_genome, Genome, MutationConfig};
use crate::seed::{self, tag};

/// Lattice choice for a run: extents and Moore radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dims: Vec<usize>,
    pub radius: usize,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Lattice> {
        Lattice::new(&self.dims, self.radius)
    }
}

impl From<crate::ca::Topology> for LatticeSpec {
    fn from(t: crate::ca::Topology) -> Self {
        LatticeSpec {
            dims: t.dims().to_vec(),
            radius: t.radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EaConfig {
    pub population_size: usize,
    pub replacement_rate: f64,
    pub samples_per_eval: usize,
    pub updates: usize,
    pub fitness_window: usize,
    pub initial_genome_len: usize,
    pub initial_genes: usize,
    pub mutation: MutationConfig,
    pub lattice: LatticeSpec,
    pub ic_scheme: IcScheme,
    pub seed: u64,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            population_size: 500,
            replacement_rate: 0.1,
            samples_per_eval: 100,
            updates: 10_000,
            fitness_window: 10,
            initial_genome_len: 10_000,
            initial_genes: 16,
            mutation: MutationConfig::default(),
            lattice: crate::ca::Topology::D1.into(),
            ic_scheme: IcScheme::UniformDensityFull,
            seed: 0,
        }
    }
}

impl EaConfig {
    /// Individuals replaced per update.
    pub fn replacement_count(&self) -> usize {
        (self.replacement_rate * self.population_size as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.mutation.validate()?;
        self.lattice.build()?;
        if self.population_size < 2 {
            return Err(Error::invalid("population_size must be at least 2"));
        }
        if !(0.0..1.0).contains(&self.replacement_rate) {
            return Err(Error::invalid("replacement_rate must be in [0, 1)"));
        }
        let k = self.replacement_count();
        if k < 1 || k >= self.population_size {
            return Err(Error::invalid(format!(
                "replacement_rate {} replaces {k} of {} individuals; need at least 1 and fewer than all",
                self.replacement_rate, self.population_size
            )));
        }
        if self.samples_per_eval == 0 {
            return Err(Error::invalid("samples_per_eval must be positive"));
        }
        if self.fitness_window == 0 {
            return Err(Error::invalid("fitness_window must be positive"));
        }
        crate::genome::check_len(self.initial_genome_len)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub genome: Genome,
    /// Latest evaluation; `None` until first evaluated.
    pub raw_fitness: Option<f64>,
    /// Raw fitness along the ancestor chain, oldest first.
    pub lineage: VecDeque<f64>,
    fsm: Arc<Fsm>,
    sliced: Arc<SlicedFsm>,
}

impl Individual {
    pub fn new(id: u64, parent_id: Option<u64>, genome: Genome, lattice: &Lattice, lineage: VecDeque<f64>) -> Self {
        let fsm = Fsm::compile(&genome, lattice.layout());
        let sliced = SlicedFsm::new(&fsm, KnockoutMask::NONE);
        Individual {
            id,
            parent_id,
            genome,
            raw_fitness: None,
            lineage,
            fsm: Arc::new(fsm),
            sliced: Arc::new(sliced),
        }
    }

    pub fn fsm(&self) -> &Fsm {
        &self.fsm
    }

    /// Mean of the lineage window (0 when empty).
    pub fn effective_fitness(&self) -> f64 {
        if self.lineage.is_empty() {
            0.0
        } else {
            self.lineage.iter().sum::<f64>() / self.lineage.len() as f64
        }
    }

    fn record(&mut self, raw: f64, window: usize) {
        self.raw_fitness = Some(raw);
        self.lineage.push_back(raw);
        while self.lineage.len() > window {
            self.lineage.pop_front();
        }
    }
}

/// Fraction of `n_samples` fresh ICs classified correctly. Unsettled and
/// wrong-homogeneous outcomes both score 0.
pub fn evaluate<R: Rng + ?Sized>(
    fsm: &Fsm,
    lattice: &Lattice,
    scheme: IcScheme,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be at least 1"));
    }
    let ics: Vec<Configuration> = (0..n_samples).map(|_| gen_ic(lattice, scheme, rng)).collect();
    let prog = SlicedFsm::new(fsm, KnockoutMask::NONE);
    Ok(count_correct(&prog, lattice, &ics)? as f64 / n_samples as f64)
}

/// IC `index` of a seeded test set. The stream depends only on `(seed,
/// index)` so sets can be generated piecewise or in parallel.
pub fn seeded_ic(lattice: &Lattice, scheme: IcScheme, seed: u64, index: usize) -> Configuration {
    gen_ic(lattice, scheme, &mut seed::stream(&[seed, tag::TEST_IC, index as u64]))
}

pub fn seeded_ics(lattice: &Lattice, scheme: IcScheme, seed: u64, n: usize) -> Vec<Configuration> {
    (0..n).map(|i| seeded_ic(lattice, scheme, seed, i)).collect()
}

/// Accuracy of `fsm` on `n` seeded ICs (binomial by default for testing
/// dominants).
pub fn test_dominant(fsm: &Fsm, lattice: &Lattice, n: usize, scheme: IcScheme, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let ics = seeded_ics(lattice, scheme, seed, n);
    let prog = SlicedFsm::new(fsm, KnockoutMask::NONE);
    Ok(count_correct(&prog, lattice, &ics)? as f64 / n as f64)
}

/// Population plus the counters needed to continue a run.
#[derive(Debug, Clone)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub next_id: u64,
}

impl Population {
    /// Random initial population: each genome is `initial_genome_len` codons
    /// seeded with `initial_genes` genes.
    pub fn initial(cfg: &EaConfig, lattice: &Lattice) -> Result<Self> {
        let total = lattice.layout().total();
        let individuals = (0..cfg.population_size as u64)
            .map(|id| {
                let mut rng = seed::stream(&[cfg.seed, tag::INITIAL_GENOME, id]);
                let g = random_genome(cfg.initial_genome_len, cfg.initial_genes, total, &mut rng)?;
                Ok(Individual::new(id, None, g, lattice, VecDeque::new()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Population {
            individuals,
            next_id: cfg.population_size as u64,
        })
    }

    /// Index of the best individual by effective fitness; ties go to the
    /// higher raw fitness, then the older individual.
    pub fn best_index(&self) -> Option<usize> {
        (0..self.individuals.len()).max_by(|&a, &b| {
            let (x, y) = (&self.individuals[a], &self.individuals[b]);
            x.effective_fitness()
                .total_cmp(&y.effective_fitness())
                .then(x.raw_fitness.unwrap_or(0.0).total_cmp(&y.raw_fitness.unwrap_or(0.0)))
                .then(y.id.cmp(&x.id))
        })
    }
}

/// Controls evaluation parallelism. Results never depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jobs(pub usize);

impl Default for Jobs {
    fn default() -> Self {
        Jobs(1)
    }
}

fn thread_pool(jobs: Jobs) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.0.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

/// Evaluates every individual on the update's shared IC set and appends the
/// result to its lineage window.
pub fn evaluate_population(
    pop: &mut Population,
    cfg: &EaConfig,
    lattice: &Lattice,
    update_index: usize,
    pool: &rayon::ThreadPool,
) -> Result<()> {
    let ics: Vec<Configuration> = (0..cfg.samples_per_eval)
        .map(|i| {
            let mut rng = seed::stream(&[cfg.seed, tag::EVOLUTION_IC, update_index as u64, i as u64]);
            gen_ic(lattice, cfg.ic_scheme, &mut rng)
        })
        .collect();
    let scores: Vec<usize> = pool.install(|| {
        pop.individuals
            .par_iter()
            .map(|ind| count_correct(&ind.sliced, lattice, &ics))
            .collect::<Result<Vec<_>>>()
    })?;
    for (ind, correct) in pop.individuals.iter_mut().zip(scores) {
        ind.record(correct as f64 / cfg.samples_per_eval as f64, cfg.fitness_window);
    }
    Ok(())
}

/// Culls the lowest-ranked individuals (older first among equals) and
/// refills by fitness-proportional selection among the survivors.
pub fn cull_and_refill(pop: &mut Population, cfg: &EaConfig, lattice: &Lattice, update_index: usize) -> Result<()> {
    let k = cfg.replacement_count();
    let mut order: Vec<usize> = (0..pop.individuals.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&pop.individuals[a], &pop.individuals[b]);
        x.effective_fitness()
            .total_cmp(&y.effective_fitness())
            .then(x.id.cmp(&y.id))
    });
    let mut doomed = vec![false; pop.individuals.len()];
    for &i in &order[..k] {
        doomed[i] = true;
    }
    let mut survivors = Vec::with_capacity(cfg.population_size);
    for (ind, dead) in std::mem::take(&mut pop.individuals).into_iter().zip(doomed) {
        if !dead {
            survivors.push(ind);
        }
    }

    let weights: Vec<f64> = survivors.iter().map(|i| i.effective_fitness()).collect();
    let mut sel_rng = seed::stream(&[cfg.seed, tag::SELECTION, update_index as u64]);
    let weighted = if weights.iter().any(|&w| w > 0.0) {
        Some(WeightedIndex::new(&weights).map_err(|e| Error::invalid(format!("selection weights: {e}")))?)
    } else {
        None
    };
    let parents: Vec<usize> = (0..cfg.population_size - survivors.len())
        .map(|_| match &weighted {
            Some(w) => w.sample(&mut sel_rng),
            None => sel_rng.gen_range(0..survivors.len()),
        })
        .collect();

    let first_id = pop.next_id;
    let offspring: Vec<Individual> = parents
        .iter()
        .enumerate()
        .map(|(slot, &p)| {
            let parent = &survivors[p];
            let id = first_id + slot as u64;
            let mut rng = seed::stream(&[cfg.seed, tag::OFFSPRING, update_index as u64, id]);
            let g = point_mutate(&parent.genome, &cfg.mutation, &mut rng);
            let g = indel_mutate(&g, &cfg.mutation, &mut rng);
            Individual::new(id, Some(parent.id), g, lattice, parent.lineage.clone())
        })
        .collect();
    pop.next_id += offspring.len() as u64;
    survivors.extend(offspring);
    pop.individuals = survivors;
    Ok(())
}

/// Summary of the population right after evaluation in an update.
pub fn summarize(pop: &Population, update_index: usize) -> UpdateRecord {
    let n = pop.individuals.len() as f64;
    let eff: Vec<f64> = pop.individuals.iter().map(|i| i.effective_fitness()).collect();
    UpdateRecord {
        update: update_index,
        max_eff_fitness: eff.iter().copied().fold(0.0, f64::max),
        mean_eff_fitness: eff.iter().sum::<f64>() / n,
        max_raw_fitness: pop.individuals.iter().filter_map(|i| i.raw_fitness).fold(0.0, f64::max),
        mean_genome_len: pop.individuals.iter().map(|i| i.genome.len() as f64).sum::<f64>() / n,
    }
}

/// One full update; returns the log record and a snapshot of the best
/// individual as evaluated this update.
pub fn ea_update(
    pop: &mut Population,
    cfg: &EaConfig,
    lattice: &Lattice,
    update_index: usize,
    pool: &rayon::ThreadPool,
) -> Result<(UpdateRecord, Individual)> {
    evaluate_population(pop, cfg, lattice, update_index, pool)?;
    let record = summarize(pop, update_index);
    let best = pop.individuals[pop.best_index().expect("population is never empty")].clone();
    cull_and_refill(pop, cfg, lattice, update_index)?;
    Ok((record, best))
}

/// Where and how often [`Evolver`] writes checkpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointPolicy {
    pub dir: PathBuf,
    pub every: usize,
}

/// A resumable evolution run.
pub struct Evolver {
    cfg: EaConfig,
    lattice: Lattice,
    pop: Population,
    log: RunLog,
    next_update: usize,
    best: Option<Individual>,
    pool: rayon::ThreadPool,
    checkpoint: Option<CheckpointPolicy>,
}

impl Evolver {
    pub fn new(cfg: EaConfig, jobs: Jobs) -> Result<Self> {
        cfg.validate()?;
        let lattice = cfg.lattice.build()?;
        let pop = Population::initial(&cfg, &lattice)?;
        Ok(Evolver {
            cfg,
            lattice,
            pop,
            log: RunLog::default(),
            next_update: 0,
            best: None,
            pool: thread_pool(jobs)?,
            checkpoint: None,
        })
    }

    /// Continues from a checkpoint. The resumed run is identical to one that
    /// was never interrupted.
    pub fn resume(ck: Checkpoint, jobs: Jobs) -> Result<Self> {
        ck.config.validate()?;
        let lattice = ck.config.lattice.build()?;
        let (pop, best) = ck.restore(&lattice)?;
        Ok(Evolver {
            cfg: ck.config,
            lattice,
            pop,
            log: ck.log,
            next_update: ck.next_update,
            best,
            pool: thread_pool(jobs)?,
            checkpoint: None,
        })
    }

    pub fn with_checkpoints(mut self, policy: CheckpointPolicy) -> Self {
        self.checkpoint = Some(policy);
        self
    }

    pub fn config(&self) -> &EaConfig {
        &self.cfg
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn next_update(&self) -> usize {
        self.next_update
    }

    pub fn is_done(&self) -> bool {
        self.next_update >= self.cfg.updates
    }

    pub fn step(&mut self) -> Result<&UpdateRecord> {
        let (record, best) = ea_update(&mut self.pop, &self.cfg, &self.lattice, self.next_update, &self.pool)?;
        self.log.records.push(record);
        self.best = Some(best);
        self.next_update += 1;
        if let Some(policy) = &self.checkpoint {
            if policy.every > 0 && (self.next_update.is_multiple_of(policy.every) || self.is_done()) {
                self.snapshot().save(&policy.dir)?;
            }
        }
        Ok(self.log.records.last().expect("just pushed"))
    }

    /// Runs the remaining updates and returns the dominant: the best
    /// individual of the final update's evaluation. With zero updates the
    /// initial population is evaluated once to pick it.
    pub fn run(mut self) -> Result<(RunLog, Individual)> {
        while !self.is_done() {
            self.step()?;
        }
        let dominant = match self.best.take() {
            Some(b) => b,
            None => {
                evaluate_population(&mut self.pop, &self.cfg, &self.lattice, 0, &self.pool)?;
                self.pop.individuals[self.pop.best_index().expect("population is never empty")].clone()
            }
        };
        Ok((self.log, dominant))
    }

    pub fn snapshot(&self) -> Checkpoint {
        Checkpoint::capture(&self.cfg, &self.pop, &self.log, self.next_update, self.best.as_ref())
    }
}

/// Runs `cfg.updates` updates from a fresh random population.
pub fn run_ea(cfg: EaConfig, jobs: Jobs) -> Result<(RunLog, Individual)> {
    Evolver::new(cfg, jobs)?.run()
}
