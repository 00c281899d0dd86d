//! Writing gate networks back into genomes.

use super::{LogicGate, StateLayout};
use crate::error::{Error, Result};
use crate::genome::{scan_genes, Genome, MAX_GENE_FAN, MIN_GENOME_LEN, START_CODON};

/// Encodes `gates` as consecutive genes followed by zero padding up to
/// `length` codons. Fails if a gate cannot be expressed as a gene or if the
/// encoded genome would decode to anything other than exactly `gates`.
pub fn encode_gates(gates: &[LogicGate], layout: &StateLayout, length: usize) -> Result<Genome> {
    let total = layout.total();
    if total > 256 {
        return Err(Error::invalid(format!("{total} state ids do not fit in byte codons")));
    }
    let mut codons = Vec::with_capacity(length.max(MIN_GENOME_LEN));
    for g in gates {
        let (n_in, n_out) = (g.inputs().len(), g.outputs().len());
        if n_in > MAX_GENE_FAN || n_out > MAX_GENE_FAN {
            return Err(Error::invalid(format!(
                "gate with fan-in {n_in} / fan-out {n_out} exceeds the gene limit of {MAX_GENE_FAN}"
            )));
        }
        codons.extend_from_slice(&START_CODON);
        codons.push((n_in - 1) as u8);
        codons.push((n_out - 1) as u8);
        codons.extend(g.inputs().iter().chain(g.outputs()).map(|&id| id as u8));
        codons.extend_from_slice(g.table());
    }
    if codons.len() > length {
        return Err(Error::invalid(format!(
            "{} codons of genes exceed the requested length {length}",
            codons.len()
        )));
    }
    codons.resize(length, 0);
    let genome = Genome::new(codons)?;
    let decoded: Vec<LogicGate> = scan_genes(genome.codons(), total)
        .iter()
        .map(LogicGate::from_gene)
        .collect();
    if decoded != gates {
        return Err(Error::invalid(
            "encoded genes contain an accidental start codon; the genome would not decode to the given gates",
        ));
    }
    Ok(genome)
}

/// A gene-sized gate computing `table[inputs]` into `output`.
pub fn rule_table_gate(table: &[bool], inputs: Vec<usize>, output: usize, layout: &StateLayout) -> Result<LogicGate> {
    LogicGate::new(inputs, vec![output], table.iter().map(|&b| b as u8).collect(), layout)
}

/// Majority vote over `inputs` built only from gene-sized gates: one AND gate
/// per subset of `(k + 1) / 2` inputs, ORed together on the output slot.
pub fn majority_gates(inputs: &[usize], layout: &StateLayout) -> Result<Vec<LogicGate>> {
    let k = inputs.len();
    let quorum = k.div_ceil(2);
    if k.is_multiple_of(2) || quorum > MAX_GENE_FAN {
        return Err(Error::invalid(format!(
            "majority over {k} inputs is not expressible with gene-sized gates"
        )));
    }
    let mut gates = Vec::new();
    for subset in 0u32..1 << k {
        if subset.count_ones() as usize != quorum {
            continue;
        }
        let ids: Vec<usize> = (0..k).filter(|&i| subset >> i & 1 == 1).map(|i| inputs[i]).collect();
        let mut table = vec![0u8; 1 << quorum];
        *table.last_mut().unwrap() = 1;
        gates.push(LogicGate::new(ids, vec![layout.output_slot()], table, layout)?);
    }
    Ok(gates)
}
