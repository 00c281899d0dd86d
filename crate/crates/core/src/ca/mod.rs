//! Lattices, initial configurations and synchronous CA runs.
//!
//! Two execution paths exist. [`CaState`] / [`run_ic`] step one configuration
//! cell by cell through [`Fsm::step`], and can record the trajectory.
//! [`run_batch`] / [`count_correct`] pack up to 64 configurations into the
//! lanes of a [`SlicedFsm`] and are what evolution and the analyses use.
//! Both produce identical outcomes.

mod config;
mod lattice;
pub mod render;

pub use config::{gen_ic, ic_with_density, majority, Configuration, IcScheme};
pub use lattice::{Lattice, Topology, NEIGHBOR_ORDER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsm::{Fsm, KnockoutMask, SlicedFsm, N_HIDDEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    AllOnes,
    AllZeros,
    Unsettled,
}

impl Verdict {
    pub fn of(config: &Configuration) -> Verdict {
        if config.is_uniform(true) {
            Verdict::AllOnes
        } else if config.is_uniform(false) {
            Verdict::AllZeros
        } else {
            Verdict::Unsettled
        }
    }

    /// Whether this verdict is the right answer for an IC with the given
    /// majority. `None` (a tied IC) is never answered correctly.
    pub fn is_correct(self, majority: Option<bool>) -> bool {
        matches!(
            (self, majority),
            (Verdict::AllOnes, Some(true)) | (Verdict::AllZeros, Some(false))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaOutcome {
    /// Configuration after the full step budget.
    pub final_config: Configuration,
    /// Steps actually computed. Fewer than the budget only when the joint
    /// cell-and-memory state reached a fixed point, after which every further
    /// step is identical.
    pub steps_run: usize,
    pub verdict: Verdict,
    pub correct: bool,
}

fn check_compatible(fsm: &Fsm, lattice: &Lattice) -> Result<()> {
    let n = fsm.layout().n_inputs();
    if n != lattice.neighborhood_size() {
        return Err(Error::invalid(format!(
            "FSM expects {n} neighborhood inputs but the lattice {:?} (r={}) provides {}",
            lattice.dims(),
            lattice.radius(),
            lattice.neighborhood_size()
        )));
    }
    Ok(())
}

fn check_ic(ic: &Configuration, lattice: &Lattice) -> Result<()> {
    if ic.dims() != lattice.dims() {
        return Err(Error::invalid(format!(
            "configuration dims {:?} do not match lattice dims {:?}",
            ic.dims(),
            lattice.dims()
        )));
    }
    Ok(())
}

/// Cell states plus each cell's 16 hidden bits, stepped one cell at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaState {
    config: Configuration,
    hidden: Vec<u16>,
}

impl CaState {
    /// Starts from `ic` with all hidden state zero.
    pub fn new(ic: Configuration) -> Self {
        let hidden = vec![0; ic.len()];
        CaState { config: ic, hidden }
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn hidden(&self) -> &[u16] {
        &self.hidden
    }

    pub fn step(&mut self, fsm: &Fsm, lattice: &Lattice, mask: KnockoutMask) -> Result<()> {
        let order: Vec<usize> = (0..lattice.cells()).collect();
        self.step_in_order(fsm, lattice, mask, &order)
    }

    /// Synchronous step visiting cells in `order`; every cell reads the
    /// previous configuration, so the order has no effect on the result.
    pub fn step_in_order(&mut self, fsm: &Fsm, lattice: &Lattice, mask: KnockoutMask, order: &[usize]) -> Result<()> {
        check_compatible(fsm, lattice)?;
        check_ic(&self.config, lattice)?;
        let prev = self.config.bits();
        let mut next_bits = prev.to_vec();
        let mut next_hidden = self.hidden.clone();
        let mut inputs = vec![false; lattice.neighborhood_size()];
        for &cell in order {
            for (slot, &n) in inputs.iter_mut().zip(lattice.neighbors(cell)) {
                *slot = prev[n as usize];
            }
            let (out, h) = fsm.step(&inputs, self.hidden[cell], mask)?;
            next_bits[cell] = out;
            next_hidden[cell] = h;
        }
        self.config = Configuration::new(lattice.dims(), next_bits)?;
        self.hidden = next_hidden;
        Ok(())
    }
}

/// Runs `fsm` on `ic` for `2 * cells` steps. With `record_trajectory` the
/// returned list holds every configuration from t = 0 to t = M.
pub fn run_ic(
    fsm: &Fsm,
    lattice: &Lattice,
    ic: &Configuration,
    mask: KnockoutMask,
    record_trajectory: bool,
) -> Result<(CaOutcome, Option<Vec<Configuration>>)> {
    check_compatible(fsm, lattice)?;
    check_ic(ic, lattice)?;
    let steps = lattice.max_steps();
    let mut trajectory = record_trajectory.then(|| {
        let mut t = Vec::with_capacity(steps + 1);
        t.push(ic.clone());
        t
    });
    let mut state = CaState::new(ic.clone());
    for _ in 0..steps {
        state.step(fsm, lattice, mask)?;
        if let Some(t) = trajectory.as_mut() {
            t.push(state.config.clone());
        }
    }
    let verdict = Verdict::of(&state.config);
    let outcome = CaOutcome {
        correct: verdict.is_correct(majority(ic).ok()),
        final_config: state.config,
        steps_run: steps,
        verdict,
    };
    Ok((outcome, trajectory))
}

/// Lane-packed simulation of up to 64 configurations. Returns the final
/// configuration words (bit `l` of word `c` is cell `c` of lane `l`) and the
/// number of steps computed.
fn simulate_lanes(prog: &SlicedFsm, lattice: &Lattice, ics: &[Configuration]) -> (Vec<u64>, usize) {
    debug_assert!(ics.len() <= 64);
    let cells = lattice.cells();
    let nsize = lattice.neighborhood_size();
    let table = lattice.neighbor_table();
    let mut config = vec![0u64; cells];
    for (lane, ic) in ics.iter().enumerate() {
        for (word, &b) in config.iter_mut().zip(ic.bits()) {
            *word |= (b as u64) << lane;
        }
    }
    let mut hidden = vec![0u64; cells * N_HIDDEN];
    let mut next_config = vec![0u64; cells];
    let mut next_hidden = vec![0u64; cells * N_HIDDEN];
    let mut read = vec![0u64; prog.read_len()];
    let n_inputs = prog.layout().n_inputs();
    let used_inputs = prog.used_inputs();
    let used_hidden = prog.used_hidden();
    let written_hidden = prog.written_hidden();

    let steps = lattice.max_steps();
    for t in 0..steps {
        for cell in 0..cells {
            let nbrs = &table[cell * nsize..(cell + 1) * nsize];
            for &i in used_inputs {
                read[i] = config[nbrs[i] as usize];
            }
            let h = &hidden[cell * N_HIDDEN..(cell + 1) * N_HIDDEN];
            for &k in used_hidden {
                read[n_inputs + 1 + k] = h[k];
            }
            let mut next = [0u64; 1 + N_HIDDEN];
            prog.eval(&read, &mut next);
            next_config[cell] = next[0];
            let nh = &mut next_hidden[cell * N_HIDDEN..(cell + 1) * N_HIDDEN];
            for &k in written_hidden {
                nh[k] = next[1 + k];
            }
        }
        let fixed = next_config == config && next_hidden == hidden;
        std::mem::swap(&mut config, &mut next_config);
        std::mem::swap(&mut hidden, &mut next_hidden);
        if fixed {
            return (config, t + 1);
        }
    }
    (config, steps)
}

fn lane_verdicts(words: &[u64]) -> (u64, u64) {
    let all_ones = words.iter().fold(!0u64, |acc, &w| acc & w);
    let any_one = words.iter().fold(0u64, |acc, &w| acc | w);
    (all_ones, !any_one)
}

/// Same results as calling [`run_ic`] on each configuration, computed 64 at
/// a time. No trajectories.
pub fn run_batch(fsm: &Fsm, lattice: &Lattice, ics: &[Configuration], mask: KnockoutMask) -> Result<Vec<CaOutcome>> {
    check_compatible(fsm, lattice)?;
    for ic in ics {
        check_ic(ic, lattice)?;
    }
    let prog = SlicedFsm::new(fsm, mask);
    let mut out = Vec::with_capacity(ics.len());
    for chunk in ics.chunks(64) {
        let (words, steps_run) = simulate_lanes(&prog, lattice, chunk);
        for (lane, ic) in chunk.iter().enumerate() {
            let bits = words.iter().map(|&w| w >> lane & 1 == 1).collect();
            let final_config = Configuration::new(lattice.dims(), bits)?;
            let verdict = Verdict::of(&final_config);
            out.push(CaOutcome {
                correct: verdict.is_correct(majority(ic).ok()),
                final_config,
                steps_run,
                verdict,
            });
        }
    }
    Ok(out)
}

/// Number of `ics` that a compiled FSM classifies correctly.
pub fn count_correct(prog: &SlicedFsm, lattice: &Lattice, ics: &[Configuration]) -> Result<usize> {
    if prog.layout().n_inputs() != lattice.neighborhood_size() {
        return Err(Error::invalid(format!(
            "FSM expects {} neighborhood inputs but the lattice provides {}",
            prog.layout().n_inputs(),
            lattice.neighborhood_size()
        )));
    }
    let mut correct = 0;
    for chunk in ics.chunks(64) {
        for ic in chunk {
            check_ic(ic, lattice)?;
        }
        let (words, _) = simulate_lanes(prog, lattice, chunk);
        let (all_ones, all_zeros) = lane_verdicts(&words);
        for (lane, ic) in chunk.iter().enumerate() {
            correct += match majority(ic) {
                Ok(true) => (all_ones >> lane & 1) as usize,
                Ok(false) => (all_zeros >> lane & 1) as usize,
                Err(_) => 0,
            };
        }
    }
    Ok(correct)
}
