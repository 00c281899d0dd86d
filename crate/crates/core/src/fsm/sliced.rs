//! Bit-sliced evaluation: every state variable is a `u64` whose 64 bits are
//! 64 independent lanes (usually 64 initial configurations run side by side).
//!
//! Compilation resolves knockout masks into reads of a constant-zero slot and
//! drops every gate that cannot influence the output slot, directly or
//! through a chain of hidden variables.

use super::{Fsm, KnockoutMask, StateLayout, N_HIDDEN};

/// Largest fan-in evaluated with a packed truth mask; wider gates fall back
/// to per-lane table lookup.
const PACKED_FAN_IN: usize = 6;

#[derive(Debug, Clone)]
enum Truth {
    /// Bit `r` is the output for row `r`.
    Packed(u64),
    Wide(Vec<bool>),
}

#[derive(Debug, Clone)]
struct SlicedGate {
    /// Slot indices into the read buffer.
    reads: Vec<usize>,
    /// (index into the next-state buffer, truth function)
    writes: Vec<(usize, Truth)>,
}

impl SlicedGate {
    #[inline]
    fn write_packed(&self, n: usize, rows: &[u64], next: &mut [u64; 1 + N_HIDDEN]) {
        for (t, truth) in &self.writes {
            if let Truth::Packed(mask) = truth {
                next[*t] |= select_rows(*mask, n, rows);
            }
        }
    }
}

/// What the compiled program is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Purpose {
    /// Repeated CA stepping: output slot reads 0 and only gates that
    /// eventually reach the output are kept.
    Simulate,
    /// A single step from an arbitrary full state table (output slot read as
    /// given); only gates writing the output slot are kept.
    OneStepOutput,
}

/// An [`Fsm`] compiled for 64-lane evaluation under a fixed knockout mask.
///
/// The next-state buffer has 17 entries: index 0 is the output, `1 + h` is
/// hidden variable `h`.
#[derive(Debug, Clone)]
pub struct SlicedFsm {
    layout: StateLayout,
    gates: Vec<SlicedGate>,
    used_inputs: Vec<usize>,
    used_hidden: Vec<usize>,
    written_hidden: Vec<usize>,
}

impl SlicedFsm {
    /// Compiles `fsm` for CA simulation under `mask`.
    pub fn new(fsm: &Fsm, mask: KnockoutMask) -> Self {
        Self::compile(fsm, mask, Purpose::Simulate)
    }

    pub(crate) fn compile(fsm: &Fsm, mask: KnockoutMask, purpose: Purpose) -> Self {
        let layout = *fsm.layout();
        let zero = layout.total();
        let resolve = |slot: usize| -> usize {
            let output_masked = purpose == Purpose::Simulate && slot == layout.output_slot();
            if output_masked || mask.masks_read(&layout, slot) {
                zero
            } else {
                slot
            }
        };
        let target = |slot: usize| -> Option<usize> {
            if slot == layout.output_slot() {
                Some(0)
            } else if layout.is_hidden(slot) {
                Some(slot - layout.n_inputs())
            } else {
                None
            }
        };

        // live[0] = output, live[1 + h] = hidden h
        let mut live = [false; 1 + N_HIDDEN];
        live[0] = true;
        if purpose == Purpose::Simulate {
            loop {
                let mut changed = false;
                for g in fsm.gates() {
                    if !g.outputs().iter().any(|&o| target(o).is_some_and(|t| live[t])) {
                        continue;
                    }
                    for &i in g.inputs() {
                        let r = resolve(i);
                        if r != zero && layout.is_hidden(r) && !live[r - layout.n_inputs()] {
                            live[r - layout.n_inputs()] = true;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }

        let mut gates = Vec::new();
        for g in fsm.gates() {
            // Reads of the zero slot are folded into the truth table.
            let n = g.inputs().len();
            let resolved: Vec<usize> = g.inputs().iter().map(|&i| resolve(i)).collect();
            let kept: Vec<usize> = (0..n).filter(|&k| resolved[k] != zero).collect();
            let reads: Vec<usize> = kept.iter().map(|&k| resolved[k]).collect();
            let full_row = |reduced: usize| -> usize {
                kept.iter().enumerate().fold(0usize, |acc, (pos, &k)| {
                    let bit = reduced >> (kept.len() - 1 - pos) & 1;
                    acc | bit << (n - 1 - k)
                })
            };
            let writes: Vec<(usize, Truth)> = g
                .outputs()
                .iter()
                .enumerate()
                .filter_map(|(j, &o)| {
                    let t = target(o).filter(|&t| live[t])?;
                    let truth = truth_for(1 << kept.len(), |row| g.output_bit(full_row(row), j));
                    if matches!(truth, Truth::Packed(0)) {
                        return None;
                    }
                    Some((t, truth))
                })
                .collect();
            if !writes.is_empty() {
                gates.push(SlicedGate { reads, writes });
            }
        }

        let mut used = vec![false; layout.total() + 1];
        for g in &gates {
            for &r in &g.reads {
                used[r] = true;
            }
        }
        let used_inputs = (0..layout.n_inputs()).filter(|&i| used[i]).collect();
        let used_hidden = (0..N_HIDDEN).filter(|&h| used[layout.hidden_slot(h)]).collect();
        let mut written = [false; N_HIDDEN];
        for g in &gates {
            for &(t, _) in &g.writes {
                if t > 0 {
                    written[t - 1] = true;
                }
            }
        }
        let written_hidden = (0..N_HIDDEN).filter(|&h| written[h]).collect();
        SlicedFsm {
            layout,
            gates,
            used_inputs,
            used_hidden,
            written_hidden,
        }
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    /// Number of gates that survived pruning.
    pub fn live_gates(&self) -> usize {
        self.gates.len()
    }

    /// Input slots any live gate reads.
    pub fn used_inputs(&self) -> &[usize] {
        &self.used_inputs
    }

    /// Hidden variables any live gate reads.
    pub fn used_hidden(&self) -> &[usize] {
        &self.used_hidden
    }

    /// Hidden variables any live gate writes.
    pub fn written_hidden(&self) -> &[usize] {
        &self.written_hidden
    }

    /// Length of the read buffer: the full state table plus a trailing
    /// constant-zero slot that must stay 0.
    pub fn read_len(&self) -> usize {
        self.layout.total() + 1
    }

    /// Evaluates all live gates on `read` and ORs results into `next`
    /// (which the caller zeroes).
    #[inline]
    pub fn eval(&self, read: &[u64], next: &mut [u64; 1 + N_HIDDEN]) {
        let mut ins = [0u64; PACKED_FAN_IN];
        for g in &self.gates {
            let n = g.reads.len();
            if n <= PACKED_FAN_IN {
                for (dst, &r) in ins.iter_mut().zip(&g.reads) {
                    *dst = read[r];
                }
                // evolved gates have at most four inputs; keep their row
                // table small
                if n <= 4 {
                    let rows = minterms::<16>(&ins[..n]);
                    g.write_packed(n, &rows, next);
                } else {
                    let rows = minterms::<{ 1 << PACKED_FAN_IN }>(&ins[..n]);
                    g.write_packed(n, &rows, next);
                }
            } else {
                for (t, truth) in &g.writes {
                    if let Truth::Wide(table) = truth {
                        next[*t] |= wide_lookup(table, &g.reads, read);
                    }
                }
            }
        }
    }
}

fn truth_for(rows: usize, bit: impl Fn(usize) -> bool) -> Truth {
    if rows <= 1 << PACKED_FAN_IN {
        Truth::Packed((0..rows).filter(|&r| bit(r)).fold(0u64, |acc, r| acc | 1 << r))
    } else {
        Truth::Wide((0..rows).map(bit).collect())
    }
}

/// All-ones mask over `2^n` truth rows.
#[inline]
fn full(n: usize) -> u64 {
    if n >= 6 {
        !0
    } else {
        (1u64 << (1 << n)) - 1
    }
}

/// Shannon expansion on the most significant input; the reference the
/// minterm evaluator is checked against.
#[cfg(test)]
fn mux(truth: u64, n: usize, ins: &[u64]) -> u64 {
    if truth == 0 {
        return 0;
    }
    if truth == full(n) {
        return !0;
    }
    let half = 1usize << (n - 1);
    let low_mask = full(n - 1);
    let lo = truth & low_mask;
    let hi = (truth >> half) & low_mask;
    if lo == hi {
        return mux(lo, n - 1, &ins[1..]);
    }
    let x = ins[0];
    (x & mux(hi, n - 1, &ins[1..])) | (!x & mux(lo, n - 1, &ins[1..]))
}

/// Lane masks of every truth row: entry `r` is set in lanes whose inputs
/// spell `r` (first input most significant).
#[inline]
fn minterms<const R: usize>(ins: &[u64]) -> [u64; R] {
    let mut m = [0u64; R];
    m[0] = !0;
    let mut len = 1;
    for &x in ins {
        for i in (0..len).rev() {
            let v = m[i];
            m[2 * i + 1] = v & x;
            m[2 * i] = v & !x;
        }
        len *= 2;
    }
    m
}

/// ORs the minterms of the set rows, or complements the unset ones when
/// that is shorter.
#[inline]
fn select_rows(truth: u64, n: usize, rows: &[u64]) -> u64 {
    let all = full(n);
    let (mut bits, invert) = if truth.count_ones() * 2 > all.count_ones() {
        (!truth & all, true)
    } else {
        (truth, false)
    };
    let mut out = 0u64;
    while bits != 0 {
        out |= rows[bits.trailing_zeros() as usize];
        bits &= bits - 1;
    }
    if invert {
        !out
    } else {
        out
    }
}

fn wide_lookup(table: &[bool], reads: &[usize], read: &[u64]) -> u64 {
    let mut out = 0u64;
    for lane in 0..64 {
        let row = reads
            .iter()
            .fold(0usize, |acc, &r| (acc << 1) | (read[r] >> lane & 1) as usize);
        if table[row] {
            out |= 1 << lane;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::{majority_table, rule_table_fsm, LogicGate};
    use proptest::prelude::*;

    /// Runs the sliced program on one lane and unpacks it like `Fsm::step`.
    fn sliced_step(s: &SlicedFsm, inputs: &[bool], hidden: u16) -> (bool, u16) {
        let l = s.layout();
        let mut read = vec![0u64; s.read_len()];
        for (i, &b) in inputs.iter().enumerate() {
            read[i] = b as u64;
        }
        for h in 0..N_HIDDEN {
            read[l.hidden_slot(h)] = (hidden >> h & 1) as u64;
        }
        let mut next = [0u64; 1 + N_HIDDEN];
        s.eval(&read, &mut next);
        let hidden = (0..N_HIDDEN).fold(0u16, |acc, h| acc | ((next[1 + h] & 1) as u16) << h);
        (next[0] & 1 == 1, hidden)
    }

    #[test]
    fn mux_matches_table_for_every_row() {
        for n in 1..=6usize {
            for seed in 0..20u64 {
                let truth = crate::seed::derive(&[n as u64, seed]) & full(n);
                for row in 0..1usize << n {
                    let ins: Vec<u64> = (0..n)
                        .map(|i| if row >> (n - 1 - i) & 1 == 1 { !0 } else { 0 })
                        .collect();
                    let expect = if truth >> row & 1 == 1 { !0 } else { 0 };
                    assert_eq!(mux(truth, n, &ins), expect, "n={n} row={row}");
                }
            }
        }
    }

    #[test]
    fn minterm_selection_matches_mux() {
        for n in 1..=PACKED_FAN_IN {
            for seed in 0..20u64 {
                let truth = crate::seed::derive(&[n as u64, seed, 1]) & full(n);
                let ins: Vec<u64> = (0..n).map(|i| crate::seed::derive(&[seed, i as u64])).collect();
                assert_eq!(
                    select_rows(truth, n, &minterms::<64>(&ins)),
                    mux(truth, n, &ins),
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn wide_gate_uses_lookup() {
        let l = StateLayout::new(9).unwrap();
        let f = rule_table_fsm(&majority_table(9), 9, l).unwrap();
        let s = SlicedFsm::new(&f, KnockoutMask::NONE);
        for bits in [0u32, 0b1_1111_0000, 0b1_0101_0101, 0b0_1010_1010] {
            let inputs: Vec<bool> = (0..9).map(|i| bits >> i & 1 == 1).collect();
            assert_eq!(
                sliced_step(&s, &inputs, 0),
                f.step(&inputs, 0, KnockoutMask::NONE).unwrap()
            );
        }
    }

    #[test]
    fn dead_gates_are_pruned() {
        let l = StateLayout::new(5).unwrap();
        let gates = vec![
            // writes an input slot only
            LogicGate::new(vec![0], vec![1], vec![1, 0], &l).unwrap(),
            // writes hidden 3, which nobody reads
            LogicGate::new(vec![0], vec![9], vec![1, 0], &l).unwrap(),
            // hidden 0 -> output, hidden 0 <- input 2
            LogicGate::new(vec![6], vec![5], vec![0, 1], &l).unwrap(),
            LogicGate::new(vec![2], vec![6], vec![0, 1], &l).unwrap(),
        ];
        let f = Fsm::new(l, gates).unwrap();
        let s = SlicedFsm::new(&f, KnockoutMask::NONE);
        assert_eq!(s.live_gates(), 2);
        assert_eq!(s.used_hidden(), &[0]);
        assert_eq!(s.written_hidden(), &[0]);
        // knocking out hidden reads leaves nothing reachable
        let s = SlicedFsm::new(&f, KnockoutMask::HIDDEN);
        assert_eq!(s.live_gates(), 0);
    }

    fn arb_fsm(n_inputs: usize) -> impl Strategy<Value = Fsm> {
        let l = StateLayout::new(n_inputs).unwrap();
        let gate = (1usize..=4, 1usize..=4).prop_flat_map(move |(n_in, n_out)| {
            (
                proptest::collection::vec(0..l.total(), n_in),
                proptest::collection::vec(0..l.total(), n_out),
                proptest::collection::vec(any::<u8>(), 1 << n_in),
            )
        });
        proptest::collection::vec(gate, 0..16).prop_map(move |gs| {
            let gates = gs
                .into_iter()
                .map(|(i, o, t)| LogicGate::new(i, o, t, &l).unwrap())
                .collect();
            Fsm::new(l, gates).unwrap()
        })
    }

    proptest! {
        /// Output always agrees with the scalar step; live hidden writes agree too.
        #[test]
        fn sliced_agrees_with_scalar(f in arb_fsm(5), bits in any::<u32>(), hidden in any::<u16>(), m in 0usize..3) {
            let mask = [KnockoutMask::NONE, KnockoutMask::HIDDEN, KnockoutMask::NEIGHBORS][m];
            let inputs: Vec<bool> = (0..5).map(|i| bits >> i & 1 == 1).collect();
            let s = SlicedFsm::new(&f, mask);
            let (out, next_hidden) = f.step(&inputs, hidden, mask).unwrap();
            let (s_out, s_hidden) = sliced_step(&s, &inputs, hidden);
            prop_assert_eq!(out, s_out);
            for &h in s.written_hidden() {
                prop_assert_eq!(next_hidden >> h & 1, s_hidden >> h & 1);
            }
        }
    }
}
