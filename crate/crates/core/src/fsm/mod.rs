//! Gate-network finite state machines.
//!
//! Every FSM works over one table of binary state variables:
//!
//! ```text
//! [0, n_inputs)            neighborhood inputs, raster order
//! n_inputs                 output (the cell's next state)
//! n_inputs + 1 ..= +16     hidden (per-cell memory)
//! ```
//!
//! A step reads the time-t table, runs every gate against it and ORs the gate
//! outputs into a zeroed time-(t+1) table. The output slot is write-only: it
//! always reads as 0 during a step.

mod encode;
mod sliced;

pub use encode::{encode_gates, majority_gates, rule_table_gate};
pub(crate) use sliced::Purpose;
pub use sliced::SlicedFsm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{GeneSpan, Genome};

pub const N_HIDDEN: usize = 16;

/// Widest truth table a single gate may carry (directly built gates only;
/// decoded genes are capped at 4 inputs).
pub const MAX_GATE_FAN_IN: usize = 30;
pub const MAX_GATE_FAN_OUT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLayout {
    n_inputs: usize,
}

impl StateLayout {
    pub fn new(n_inputs: usize) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::invalid("a layout needs at least one input"));
        }
        Ok(StateLayout { n_inputs })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn output_slot(&self) -> usize {
        self.n_inputs
    }

    pub fn hidden_slot(&self, h: usize) -> usize {
        debug_assert!(h < N_HIDDEN);
        self.n_inputs + 1 + h
    }

    pub fn is_hidden(&self, slot: usize) -> bool {
        slot > self.n_inputs && slot < self.total()
    }

    /// Input index carrying the cell's own state: the centre of the raster
    /// neighborhood.
    pub fn self_input(&self) -> usize {
        self.n_inputs / 2
    }

    pub fn total(&self) -> usize {
        self.n_inputs + 1 + N_HIDDEN
    }
}

/// Which state reads are forced to 0 during a step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KnockoutMask {
    pub hold_hidden_zero: bool,
    pub hold_neighbor_inputs_zero: bool,
}

impl KnockoutMask {
    pub const NONE: KnockoutMask = KnockoutMask {
        hold_hidden_zero: false,
        hold_neighbor_inputs_zero: false,
    };
    pub const HIDDEN: KnockoutMask = KnockoutMask {
        hold_hidden_zero: true,
        hold_neighbor_inputs_zero: false,
    };
    pub const NEIGHBORS: KnockoutMask = KnockoutMask {
        hold_hidden_zero: false,
        hold_neighbor_inputs_zero: true,
    };

    fn masks_read(&self, layout: &StateLayout, slot: usize) -> bool {
        (self.hold_hidden_zero && layout.is_hidden(slot))
            || (self.hold_neighbor_inputs_zero && slot < layout.n_inputs() && slot != layout.self_input())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicGate {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    table: Vec<u8>,
}

impl LogicGate {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>, table: Vec<u8>, layout: &StateLayout) -> Result<Self> {
        if inputs.is_empty() || inputs.len() > MAX_GATE_FAN_IN {
            return Err(Error::invalid(format!("gate fan-in {} out of range", inputs.len())));
        }
        if outputs.is_empty() || outputs.len() > MAX_GATE_FAN_OUT {
            return Err(Error::invalid(format!("gate fan-out {} out of range", outputs.len())));
        }
        if table.len() != 1 << inputs.len() {
            return Err(Error::invalid(format!(
                "truth table has {} rows, expected {}",
                table.len(),
                1usize << inputs.len()
            )));
        }
        if let Some(&bad) = inputs.iter().chain(&outputs).find(|&&id| id >= layout.total()) {
            return Err(Error::invalid(format!(
                "state id {bad} out of range for {} state variables",
                layout.total()
            )));
        }
        Ok(LogicGate { inputs, outputs, table })
    }

    pub fn from_gene(gene: &GeneSpan) -> Self {
        LogicGate {
            inputs: gene.input_ids.clone(),
            outputs: gene.output_ids.clone(),
            table: gene.table_codons.clone(),
        }
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// Bit written to `outputs[j]` when the table row is `row`.
    pub fn output_bit(&self, row: usize, j: usize) -> bool {
        let n_out = self.outputs.len();
        (self.table[row] >> (n_out - 1 - j)) & 1 == 1
    }

    /// Reads inputs from `read` (first input is the most significant bit of
    /// the row index) and ORs the selected row's low-order bits into `next`.
    fn fire(&self, read: &[bool], next: &mut [bool]) {
        let row = self.inputs.iter().fold(0usize, |acc, &i| (acc << 1) | read[i] as usize);
        for (j, &o) in self.outputs.iter().enumerate() {
            if self.output_bit(row, j) {
                next[o] = true;
            }
        }
    }
}

/// An ordered gate network over a [`StateLayout`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fsm {
    layout: StateLayout,
    gates: Vec<LogicGate>,
}

impl Fsm {
    pub fn new(layout: StateLayout, gates: Vec<LogicGate>) -> Result<Self> {
        let total = layout.total();
        if let Some(g) = gates
            .iter()
            .find(|g| g.inputs.iter().chain(&g.outputs).any(|&id| id >= total))
        {
            return Err(Error::invalid(format!(
                "gate {g:?} references ids beyond {total} states"
            )));
        }
        Ok(Fsm { layout, gates })
    }

    /// Decodes every gene of `genome` into a gate, in scan order.
    pub fn compile(genome: &Genome, layout: StateLayout) -> Self {
        let gates = genome.genes(layout.total()).iter().map(LogicGate::from_gene).collect();
        Fsm { layout, gates }
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[LogicGate] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<LogicGate> {
        self.gates
    }

    /// True if any gate reads a hidden state variable.
    pub fn reads_hidden(&self) -> bool {
        self.gates
            .iter()
            .any(|g| g.inputs.iter().any(|&i| self.layout.is_hidden(i)))
    }

    /// One synchronous step for a single cell. Bit `h` of `hidden` is hidden
    /// variable `h`. Returns the cell's next state and next hidden bits.
    pub fn step(&self, inputs: &[bool], hidden: u16, mask: KnockoutMask) -> Result<(bool, u16)> {
        if inputs.len() != self.layout.n_inputs() {
            return Err(Error::invalid(format!(
                "expected {} input bits, got {}",
                self.layout.n_inputs(),
                inputs.len()
            )));
        }
        let total = self.layout.total();
        let mut read = vec![false; total];
        read[..inputs.len()].copy_from_slice(inputs);
        for h in 0..N_HIDDEN {
            read[self.layout.hidden_slot(h)] = hidden >> h & 1 == 1;
        }
        for (slot, bit) in read.iter_mut().enumerate() {
            if mask.masks_read(&self.layout, slot) {
                *bit = false;
            }
        }
        let next = self.step_raw(&read);
        let out = next[self.layout.output_slot()];
        let next_hidden = (0..N_HIDDEN)
            .filter(|&h| next[self.layout.hidden_slot(h)])
            .fold(0u16, |acc, h| acc | 1 << h);
        Ok((out, next_hidden))
    }

    /// Runs every gate against the full state table `read` exactly as given
    /// (including the output slot) and returns the freshly ORed next table.
    pub fn step_raw(&self, read: &[bool]) -> Vec<bool> {
        assert_eq!(read.len(), self.layout.total(), "state table length");
        let mut next = vec![false; read.len()];
        for g in &self.gates {
            g.fire(read, &mut next);
        }
        next
    }
}

/// Table for an elementary (radius-1) rule number: entry `i` is bit `i` of
/// `rule`, where `i` packs `(left, centre, right)` most significant first.
pub fn elementary_rule_table(rule: u8) -> Vec<bool> {
    (0..8).map(|i| rule >> i & 1 == 1).collect()
}

/// Majority-vote table over `k` inputs (`k` odd).
pub fn majority_table(k: usize) -> Vec<bool> {
    (0..1usize << k).map(|i| i.count_ones() as usize * 2 > k).collect()
}

/// Builds a memoryless FSM with `output = table[neighborhood]` using a single
/// wide gate. The gate reads the `k` inputs centred in the raster
/// neighborhood, first input as the most significant index bit.
pub fn rule_table_fsm(table: &[bool], k: usize, layout: StateLayout) -> Result<Fsm> {
    if k == 0 || k > layout.n_inputs() {
        return Err(Error::invalid(format!(
            "rule over {k} inputs does not fit a layout with {} inputs",
            layout.n_inputs()
        )));
    }
    if table.len() != 1 << k {
        return Err(Error::invalid(format!(
            "rule table has {} entries, expected {}",
            table.len(),
            1usize << k
        )));
    }
    let first = (layout.n_inputs() - k) / 2;
    let gate = LogicGate::new(
        (first..first + k).collect(),
        vec![layout.output_slot()],
        table.iter().map(|&b| b as u8).collect(),
        &layout,
    )?;
    Fsm::new(layout, vec![gate])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layout(n: usize) -> StateLayout {
        StateLayout::new(n).unwrap()
    }

    #[test]
    fn layout_sizes() {
        assert_eq!(layout(5).total(), 22);
        assert_eq!(layout(25).total(), 42);
        assert_eq!(layout(27).total(), 44);
        assert_eq!(layout(5).self_input(), 2);
        assert_eq!(layout(25).self_input(), 12);
        assert_eq!(layout(27).self_input(), 13);
        assert!(layout(5).is_hidden(6) && layout(5).is_hidden(21));
        assert!(!layout(5).is_hidden(5) && !layout(5).is_hidden(22));
    }

    #[test]
    fn zero_gate_machine_outputs_zero() {
        let f = Fsm::new(layout(5), vec![]).unwrap();
        for bits in 0..32u32 {
            let inputs: Vec<bool> = (0..5).map(|i| bits >> i & 1 == 1).collect();
            assert_eq!(f.step(&inputs, 0xFFFF, KnockoutMask::NONE).unwrap(), (false, 0));
        }
    }

    #[test]
    fn evolved_example_gate_is_x_or_not_y() {
        // X = input 0, Y = input 1, Z -> output slot
        let l = layout(5);
        let gate = LogicGate::new(vec![0, 1], vec![5], vec![1, 0, 1, 1], &l).unwrap();
        let f = Fsm::new(l, vec![gate]).unwrap();
        let z = |x: bool, y: bool| f.step(&[x, y, false, false, false], 0, KnockoutMask::NONE).unwrap().0;
        assert!(z(false, false));
        assert!(!z(false, true));
        assert!(z(true, false));
        assert!(z(true, true));
    }

    #[test]
    fn rule_110_gate() {
        let l = layout(3);
        let gate = LogicGate::new(vec![0, 1, 2], vec![3], vec![0, 1, 1, 1, 0, 1, 1, 0], &l).unwrap();
        let f = Fsm::new(l, vec![gate]).unwrap();
        assert!(f.step(&[true, true, false], 0, KnockoutMask::NONE).unwrap().0);
        assert_eq!(
            elementary_rule_table(110),
            vec![false, true, true, true, false, true, true, false]
        );
    }

    #[test]
    fn output_bits_msb_to_first_output() {
        let l = layout(5);
        // row 0 -> 0b10: first output (hidden 0) gets 1, second (hidden 1) gets 0
        let gate = LogicGate::new(vec![0], vec![6, 7], vec![0b10, 0b01], &l).unwrap();
        let f = Fsm::new(l, vec![gate]).unwrap();
        assert_eq!(f.step(&[false; 5], 0, KnockoutMask::NONE).unwrap(), (false, 0b01));
        assert_eq!(
            f.step(&[true, false, false, false, false], 0, KnockoutMask::NONE)
                .unwrap(),
            (false, 0b10)
        );
        // only the n_out low-order bits are used
        let gate = LogicGate::new(vec![0], vec![5], vec![0b1110, 0b0001], &l).unwrap();
        let f = Fsm::new(l, vec![gate]).unwrap();
        assert!(!f.step(&[false; 5], 0, KnockoutMask::NONE).unwrap().0);
    }

    #[test]
    fn output_slot_reads_zero() {
        let l = layout(3);
        // copies output slot into hidden 0; output slot must read 0
        let gate = LogicGate::new(vec![3], vec![4], vec![1, 0], &l).unwrap();
        let f = Fsm::new(l, vec![gate]).unwrap();
        assert_eq!(f.step(&[true; 3], 0, KnockoutMask::NONE).unwrap().1, 1);
    }

    #[test]
    fn hidden_knockout_masks_reads_not_writes() {
        let l = layout(5);
        // out = hidden0; hidden0' = 1 always (input 0 -> table [1,1])
        let read_hidden = LogicGate::new(vec![6], vec![5], vec![0, 1], &l).unwrap();
        let set_hidden = LogicGate::new(vec![0], vec![6], vec![1, 1], &l).unwrap();
        let f = Fsm::new(l, vec![read_hidden, set_hidden]).unwrap();
        assert_eq!(f.step(&[false; 5], 1, KnockoutMask::NONE).unwrap(), (true, 1));
        assert_eq!(f.step(&[false; 5], 1, KnockoutMask::HIDDEN).unwrap(), (false, 1));
    }

    #[test]
    fn neighbor_knockout_keeps_self() {
        let l = layout(5);
        let gate = LogicGate::new(vec![2], vec![5], vec![0, 1], &l).unwrap();
        let other = LogicGate::new(vec![0], vec![6], vec![0, 1], &l).unwrap();
        let f = Fsm::new(l, vec![gate, other]).unwrap();
        let inputs = [true, false, true, false, false];
        assert_eq!(f.step(&inputs, 0, KnockoutMask::NEIGHBORS).unwrap(), (true, 0));
        assert_eq!(f.step(&inputs, 0, KnockoutMask::NONE).unwrap(), (true, 1));
    }

    #[test]
    fn wrong_input_length_is_rejected() {
        let f = Fsm::new(layout(5), vec![]).unwrap();
        assert!(matches!(
            f.step(&[false; 4], 0, KnockoutMask::NONE),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gate_validation() {
        let l = layout(5);
        assert!(LogicGate::new(vec![0, 1], vec![5], vec![0; 3], &l).is_err());
        assert!(LogicGate::new(vec![0], vec![22], vec![0; 2], &l).is_err());
        assert!(LogicGate::new(vec![], vec![5], vec![0], &l).is_err());
    }

    #[test]
    fn rule_table_fsm_rejects_oversized_rule() {
        assert!(rule_table_fsm(&majority_table(5), 5, layout(3)).is_err());
        assert!(rule_table_fsm(&[true; 4], 3, layout(3)).is_err());
    }

    #[test]
    fn rule_table_fsm_majority_matches_popcount() {
        let f = rule_table_fsm(&majority_table(5), 5, layout(5)).unwrap();
        for bits in 0..32u32 {
            // first input is the most significant bit
            let inputs: Vec<bool> = (0..5).map(|i| bits >> (4 - i) & 1 == 1).collect();
            let (out, hidden) = f.step(&inputs, 0, KnockoutMask::NONE).unwrap();
            assert_eq!(out, bits.count_ones() >= 3);
            assert_eq!(hidden, 0);
        }
    }

    #[test]
    fn rule_table_fsm_centres_narrow_rules() {
        // Rule 110 on a radius-2 layout reads inputs 1..4
        let f = rule_table_fsm(&elementary_rule_table(110), 3, layout(5)).unwrap();
        assert_eq!(f.gates()[0].inputs(), &[1, 2, 3]);
        // identity table: output = centre
        let f = rule_table_fsm(&[false, true], 1, layout(5)).unwrap();
        assert_eq!(f.gates()[0].inputs(), &[2]);
    }

    fn arb_fsm() -> impl Strategy<Value = Fsm> {
        let l = layout(5);
        let gate = (1usize..=4, 1usize..=4).prop_flat_map(move |(n_in, n_out)| {
            (
                proptest::collection::vec(0..l.total(), n_in),
                proptest::collection::vec(0..l.total(), n_out),
                proptest::collection::vec(any::<u8>(), 1 << n_in),
            )
        });
        proptest::collection::vec(gate, 0..12).prop_map(move |gs| {
            let gates = gs
                .into_iter()
                .map(|(i, o, t)| LogicGate::new(i, o, t, &l).unwrap())
                .collect();
            Fsm::new(l, gates).unwrap()
        })
    }

    proptest! {
        #[test]
        fn gate_order_is_irrelevant(f in arb_fsm(), bits in any::<u32>(), hidden in any::<u16>(), seed in any::<u64>()) {
            let inputs: Vec<bool> = (0..5).map(|i| bits >> i & 1 == 1).collect();
            let mut gates = f.gates().to_vec();
            // deterministic shuffle
            let n = gates.len();
            for i in (1..n).rev() {
                let j = (crate::seed::derive(&[seed, i as u64]) % (i as u64 + 1)) as usize;
                gates.swap(i, j);
            }
            let g = Fsm::new(*f.layout(), gates).unwrap();
            for mask in [KnockoutMask::NONE, KnockoutMask::HIDDEN, KnockoutMask::NEIGHBORS] {
                prop_assert_eq!(f.step(&inputs, hidden, mask).unwrap(), g.step(&inputs, hidden, mask).unwrap());
            }
        }

        #[test]
        fn all_zero_gate_is_inert(f in arb_fsm(), bits in any::<u32>(), hidden in any::<u16>(), ids in proptest::collection::vec(0usize..22, 3)) {
            let inputs: Vec<bool> = (0..5).map(|i| bits >> i & 1 == 1).collect();
            let mut gates = f.gates().to_vec();
            gates.push(LogicGate::new(ids[..2].to_vec(), vec![ids[2], 5], vec![0; 4], f.layout()).unwrap());
            let g = Fsm::new(*f.layout(), gates).unwrap();
            prop_assert_eq!(f.step(&inputs, hidden, KnockoutMask::NONE).unwrap(), g.step(&inputs, hidden, KnockoutMask::NONE).unwrap());
        }

        #[test]
        fn hidden_free_machines_ignore_hidden_knockout(f in arb_fsm(), bits in any::<u32>(), hidden in any::<u16>()) {
            // rewire every hidden read to an input
            let l = *f.layout();
            let gates = f.gates().iter().map(|g| {
                let ins = g.inputs().iter().map(|&i| if l.is_hidden(i) { i % 5 } else { i }).collect();
                LogicGate::new(ins, g.outputs().to_vec(), g.table().to_vec(), &l).unwrap()
            }).collect();
            let f = Fsm::new(l, gates).unwrap();
            prop_assert!(!f.reads_hidden());
            let inputs: Vec<bool> = (0..5).map(|i| bits >> i & 1 == 1).collect();
            prop_assert_eq!(
                f.step(&inputs, hidden, KnockoutMask::NONE).unwrap(),
                f.step(&inputs, hidden, KnockoutMask::HIDDEN).unwrap()
            );
        }
    }
}
