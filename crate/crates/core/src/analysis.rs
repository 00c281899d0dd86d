//! Post-hoc analyses of evolved machines: rule density, hidden-state
//! knockout, operational self-organization and scaling.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ca::{count_correct, Configuration, IcScheme, Lattice};
use crate::error::{Error, Result};
use crate::evolve::{seeded_ics, Jobs};
use crate::fsm::{Fsm, KnockoutMask, Purpose, SlicedFsm, N_HIDDEN};
use crate::seed::{self, tag};

/// Largest state-variable count [`DensityMode::Exact`] accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityMode {
    /// Enumerate every assignment; refused when the layout has more than
    /// `cap` state variables.
    Exact { cap: usize },
    /// Uniformly sample this many assignments.
    Sampled(u64),
}

impl DensityMode {
    pub fn exact() -> Self {
        DensityMode::Exact { cap: DEFAULT_EXACT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDensityReport {
    pub mode: DensityMode,
    pub total_states: usize,
    pub states_evaluated: u64,
    pub ones: u64,
    pub density: f64,
    /// Binomial standard error of a sampled estimate; 0 for exact counts.
    pub std_error: f64,
}

impl RuleDensityReport {
    pub const CSV_HEADER: &'static str = "mode,total_states,states_evaluated,ones,density,std_error";

    pub fn to_csv(&self) -> String {
        let mode = match self.mode {
            DensityMode::Exact { .. } => "exact",
            DensityMode::Sampled(_) => "sampled",
        };
        format!(
            "{}\n{mode},{},{},{},{},{}\n",
            Self::CSV_HEADER,
            self.total_states,
            self.states_evaluated,
            self.ones,
            self.density,
            self.std_error
        )
    }
}

/// Lane pattern for state-index bit `b` (< 6) across the 64 lanes of a word.
const LANE_BITS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Fraction of full state-variable assignments (inputs, output slot and
/// hidden variables, all read as given) whose one-step output is 1.
pub fn rule_density(fsm: &Fsm, mode: DensityMode, seed: u64) -> Result<RuleDensityReport> {
    let layout = *fsm.layout();
    let total = layout.total();
    let prog = SlicedFsm::compile(fsm, KnockoutMask::NONE, Purpose::OneStepOutput);
    let mut read = vec![0u64; prog.read_len()];
    let mut next = [0u64; 1 + N_HIDDEN];
    let (states, ones) = match mode {
        DensityMode::Exact { cap } => {
            if total > cap {
                return Err(Error::invalid(format!(
                    "exact enumeration of {total} state variables (2^{total} states) exceeds the cap of {cap}; \
                     use sampling instead (e.g. --samples 1000000)"
                )));
            }
            // Slots 0..6 vary across lanes; the rest come from the batch index.
            let lane_slots = total.min(6);
            let batches = 1u64 << (total - lane_slots);
            let lane_mask = if lane_slots == 6 {
                !0
            } else {
                (1u64 << (1 << lane_slots)) - 1
            };
            for (slot, &bits) in LANE_BITS.iter().enumerate().take(lane_slots) {
                read[slot] = bits;
            }
            let mut ones = 0u64;
            for batch in 0..batches {
                for (bit, word) in read[lane_slots..total].iter_mut().enumerate() {
                    *word = if batch >> bit & 1 == 1 { !0 } else { 0 };
                }
                next.fill(0);
                prog.eval(&read, &mut next);
                ones += (next[0] & lane_mask).count_ones() as u64;
            }
            (1u64 << total, ones)
        }
        DensityMode::Sampled(n) => {
            if n == 0 {
                return Err(Error::invalid("sample count must be positive"));
            }
            let mut rng = seed::stream(&[seed, tag::DENSITY]);
            let mut ones = 0u64;
            let mut left = n;
            while left > 0 {
                let lanes = left.min(64);
                for r in read.iter_mut().take(total) {
                    *r = rng.gen();
                }
                next.fill(0);
                prog.eval(&read, &mut next);
                let mask = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
                ones += (next[0] & mask).count_ones() as u64;
                left -= lanes;
            }
            (n, ones)
        }
    };
    let density = ones as f64 / states as f64;
    let std_error = match mode {
        DensityMode::Exact { .. } => 0.0,
        DensityMode::Sampled(n) => (density * (1.0 - density) / n as f64).sqrt(),
    };
    Ok(RuleDensityReport {
        mode,
        total_states: total,
        states_evaluated: states,
        ones,
        density,
        std_error,
    })
}

/// How an accuracy measurement draws its ICs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestProtocol {
    pub n: usize,
    pub scheme: IcScheme,
    pub seed: u64,
}

impl TestProtocol {
    pub fn binomial(n: usize, seed: u64) -> Self {
        TestProtocol {
            n,
            scheme: IcScheme::Binomial,
            seed,
        }
    }
}

/// Correct count of `fsm` under `mask` on `ics`, spread over `jobs` workers
/// in 64-IC blocks.
pub fn correct_count(
    fsm: &Fsm,
    lattice: &Lattice,
    ics: &[Configuration],
    mask: KnockoutMask,
    jobs: Jobs,
) -> Result<usize> {
    let prog = SlicedFsm::new(fsm, mask);
    if jobs.0 <= 1 {
        return count_correct(&prog, lattice, ics);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.0)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        ics.par_chunks(64)
            .map(|c| count_correct(&prog, lattice, c))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: TestProtocol,
    pub correct: usize,
    pub accuracy: f64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "n,correct,accuracy";

    pub fn to_csv(&self) -> String {
        format!(
            "{}\n{},{},{}\n",
            Self::CSV_HEADER,
            self.protocol.n,
            self.correct,
            self.accuracy
        )
    }
}

/// Accuracy on the seeded IC set; the same number
/// [`test_dominant`](crate::evolve::test_dominant) reports.
pub fn evaluate_dominant(fsm: &Fsm, lattice: &Lattice, p: &TestProtocol, jobs: Jobs) -> Result<EvalReport> {
    check_protocol(p)?;
    let ics = seeded_ics(lattice, p.scheme, p.seed, p.n);
    let correct = correct_count(fsm, lattice, &ics, KnockoutMask::NONE, jobs)?;
    Ok(EvalReport {
        protocol: *p,
        correct,
        accuracy: correct as f64 / p.n as f64,
    })
}

fn check_protocol(p: &TestProtocol) -> Result<()> {
    if p.n == 0 {
        Err(Error::invalid("IC count must be positive"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnockoutReport {
    pub protocol: TestProtocol,
    pub w_normal: f64,
    pub w_knockout: f64,
    pub delta_w: f64,
}

impl KnockoutReport {
    pub const CSV_HEADER: &'static str = "condition,n,accuracy";

    pub fn to_csv(&self) -> String {
        let n = self.protocol.n;
        format!(
            "{}\nnormal,{n},{}\nhidden_knockout,{n},{}\n",
            Self::CSV_HEADER,
            self.w_normal,
            self.w_knockout
        )
    }
}

/// Accuracy with and without hidden variables held at 0, on one shared IC
/// set.
pub fn knockout_hidden(fsm: &Fsm, lattice: &Lattice, p: &TestProtocol, jobs: Jobs) -> Result<KnockoutReport> {
    check_protocol(p)?;
    let ics = seeded_ics(lattice, p.scheme, p.seed, p.n);
    let w_normal = correct_count(fsm, lattice, &ics, KnockoutMask::NONE, jobs)? as f64 / p.n as f64;
    let w_knockout = correct_count(fsm, lattice, &ics, KnockoutMask::HIDDEN, jobs)? as f64 / p.n as f64;
    Ok(KnockoutReport {
        protocol: *p,
        w_normal,
        w_knockout,
        delta_w: w_normal - w_knockout,
    })
}

/// `(f - f_nc) / (f + f_nc)`, taken as 0 when both are 0.
pub fn s_op_value(f: f64, f_nc: f64) -> f64 {
    if f + f_nc == 0.0 {
        0.0
    } else {
        (f - f_nc) / (f + f_nc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SopReport {
    pub protocol: TestProtocol,
    pub f: f64,
    pub f_nc: f64,
    pub s_op: f64,
}

impl SopReport {
    pub const CSV_HEADER: &'static str = "condition,n,accuracy";

    pub fn to_csv(&self) -> String {
        let n = self.protocol.n;
        format!(
            "{}\nnormal,{n},{}\nneighbor_knockout,{n},{}\n",
            Self::CSV_HEADER,
            self.f,
            self.f_nc
        )
    }
}

/// Accuracy with and without neighbor (non-self) inputs held at 0.
pub fn s_op(fsm: &Fsm, lattice: &Lattice, p: &TestProtocol, jobs: Jobs) -> Result<SopReport> {
    check_protocol(p)?;
    let ics = seeded_ics(lattice, p.scheme, p.seed, p.n);
    let f = correct_count(fsm, lattice, &ics, KnockoutMask::NONE, jobs)? as f64 / p.n as f64;
    let f_nc = correct_count(fsm, lattice, &ics, KnockoutMask::NEIGHBORS, jobs)? as f64 / p.n as f64;
    Ok(SopReport {
        protocol: *p,
        f,
        f_nc,
        s_op: s_op_value(f, f_nc),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub s: usize,
    pub cells: usize,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub protocol: TestProtocol,
    pub base_dims: Vec<usize>,
    pub radius: usize,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    pub const CSV_HEADER: &'static str = "s,cells,n,correct,accuracy";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.s, r.cells, r.n, r.correct, r.accuracy);
        }
        out
    }
}

/// Accuracy on lattices with every extent multiplied by each `s`. Each scale
/// draws its own seeded IC set, so `s = 1` repeats
/// [`test_dominant`](crate::evolve::test_dominant) exactly.
pub fn scaling_sweep(
    fsm: &Fsm,
    base: &Lattice,
    scales: &[usize],
    p: &TestProtocol,
    jobs: Jobs,
) -> Result<ScalingReport> {
    check_protocol(p)?;
    if scales.is_empty() {
        return Err(Error::invalid("no scale factors given"));
    }
    let rows = scales
        .iter()
        .map(|&s| {
            let lattice = base.scaled(s)?;
            let ics = seeded_ics(&lattice, p.scheme, p.seed, p.n);
            let correct = correct_count(fsm, &lattice, &ics, KnockoutMask::NONE, jobs)?;
            Ok(ScalingRow {
                s,
                cells: lattice.cells(),
                n: p.n,
                correct,
                accuracy: correct as f64 / p.n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport {
        protocol: *p,
        base_dims: base.dims().to_vec(),
        radius: base.radius(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::Topology;
    use crate::evolve::test_dominant;
    use crate::fsm::{elementary_rule_table, majority_table, rule_table_fsm, LogicGate, StateLayout};
    use proptest::prelude::*;

    fn constant_one(layout: StateLayout) -> Fsm {
        let g = LogicGate::new(vec![0], vec![layout.output_slot()], vec![1, 1], &layout).unwrap();
        Fsm::new(layout, vec![g]).unwrap()
    }

    #[test]
    fn constant_one_has_density_one() {
        let l = StateLayout::new(5).unwrap();
        let f = constant_one(l);
        let e = rule_density(&f, DensityMode::exact(), 0).unwrap();
        assert_eq!(e.density, 1.0);
        assert_eq!(e.states_evaluated, 1 << 22);
        let s = rule_density(&f, DensityMode::Sampled(1_000), 0).unwrap();
        assert_eq!(s.density, 1.0);
        assert_eq!(s.states_evaluated, 1_000);
    }

    #[test]
    fn rule110_density_is_five_eighths() {
        let l = StateLayout::new(3).unwrap();
        let f = rule_table_fsm(&elementary_rule_table(110), 3, l).unwrap();
        let e = rule_density(&f, DensityMode::exact(), 0).unwrap();
        assert_eq!(e.ones * 8, 5 * e.states_evaluated);
    }

    #[test]
    fn density_reads_the_output_slot() {
        // output' = output: density exactly 1/2 only if the slot is read
        let l = StateLayout::new(1).unwrap();
        let g = LogicGate::new(vec![l.output_slot()], vec![l.output_slot()], vec![0, 1], &l).unwrap();
        let f = Fsm::new(l, vec![g]).unwrap();
        assert_eq!(rule_density(&f, DensityMode::exact(), 0).unwrap().density, 0.5);
    }

    #[test]
    fn small_layout_exact_counts_all_states() {
        // 1 input + output + 16 hidden = 18 variables
        let l = StateLayout::new(1).unwrap();
        let e = rule_density(&constant_one(l), DensityMode::exact(), 0).unwrap();
        assert_eq!(e.states_evaluated, 1 << 18);
    }

    #[test]
    fn exact_refuses_wide_layouts() {
        let f = Fsm::new(Topology::D2.lattice().layout(), vec![]).unwrap();
        let err = rule_density(&f, DensityMode::exact(), 0).unwrap_err();
        assert!(err.to_string().contains("--samples"), "{err}");
        let s = rule_density(&f, DensityMode::Sampled(100), 0).unwrap();
        assert_eq!(s.density, 0.0);
    }

    #[test]
    fn sampled_density_is_seeded() {
        let l = Topology::D1.lattice();
        let f = rule_table_fsm(&majority_table(5), 5, l.layout()).unwrap();
        let a = rule_density(&f, DensityMode::Sampled(10_000), 3).unwrap();
        let b = rule_density(&f, DensityMode::Sampled(10_000), 3).unwrap();
        assert_eq!(a, b);
        assert!((a.density - 0.5).abs() < 4.0 * a.std_error);
    }

    #[test]
    fn majority_rule_has_no_memory_effect() {
        let l = Topology::D1.lattice();
        let f = rule_table_fsm(&majority_table(5), 5, l.layout()).unwrap();
        let r = knockout_hidden(&f, &l, &TestProtocol::binomial(300, 1), Jobs(1)).unwrap();
        assert_eq!(r.delta_w, 0.0);
        let zero = Fsm::new(l.layout(), vec![]).unwrap();
        assert_eq!(
            knockout_hidden(&zero, &l, &TestProtocol::binomial(300, 1), Jobs(1))
                .unwrap()
                .delta_w,
            0.0
        );
    }

    #[test]
    fn parallel_counts_match_serial() {
        let l = Topology::D1.lattice();
        let f = rule_table_fsm(&majority_table(5), 5, l.layout()).unwrap();
        let ics = seeded_ics(&l, IcScheme::Binomial, 4, 500);
        let a = correct_count(&f, &l, &ics, KnockoutMask::NONE, Jobs(1)).unwrap();
        let b = correct_count(&f, &l, &ics, KnockoutMask::NONE, Jobs(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn s_op_examples() {
        assert!((s_op_value(0.9, 0.3) - 0.5).abs() < 1e-12);
        assert_eq!(s_op_value(0.4, 0.4), 0.0);
        assert_eq!(s_op_value(0.0, 0.0), 0.0);
    }

    #[test]
    fn scaling_unit_scale_equals_test_dominant() {
        let l = Topology::D1.lattice();
        let f = rule_table_fsm(&majority_table(5), 5, l.layout()).unwrap();
        let r = scaling_sweep(&f, &l, &[1, 2, 9], &TestProtocol::binomial(200, 8), Jobs(1)).unwrap();
        let td = test_dominant(&f, &l, 200, IcScheme::Binomial, 8).unwrap();
        assert_eq!(r.rows[0].accuracy, td);
        let e = evaluate_dominant(&f, &l, &TestProtocol::binomial(200, 8), Jobs(2)).unwrap();
        assert_eq!(e.accuracy, td);
        assert_eq!(r.rows.iter().map(|r| r.cells).collect::<Vec<_>>(), vec![35, 70, 315]);
        assert!(r.to_csv().starts_with("s,cells,n,correct,accuracy\n1,35,200,"));
    }

    proptest! {
        #[test]
        fn s_op_is_bounded_and_antisymmetric(f in 0.0f64..=1.0, g in 0.0f64..=1.0) {
            let s = s_op_value(f, g);
            prop_assert!((-1.0..=1.0).contains(&s));
            prop_assert_eq!(s, -s_op_value(g, f));
        }
    }
}
