//! Decodes a genome into its logic gates and shows what survives
//! compilation.
//!
//!     cargo run --release --example decode_genome -- [file.genome]
//!
//! Without a file, a majority-of-5 network is encoded into a fresh genome.

use sasoca::ca::Topology;
use sasoca::fsm::{encode_gates, majority_gates, Fsm, KnockoutMask, SlicedFsm};
use sasoca::genome::GenomeFile;

fn main() -> sasoca::Result<()> {
    let file = match std::env::args().nth(1) {
        Some(path) => GenomeFile::read(path.as_ref())?,
        None => {
            let layout = Topology::D1.lattice().layout();
            let gates = majority_gates(&[0, 1, 2, 3, 4], &layout)?;
            GenomeFile {
                genome: encode_gates(&gates, &layout, 1_000)?,
                total_states: layout.total(),
            }
        }
    };
    let topology = Topology::from_total_states(file.total_states).ok_or_else(|| {
        sasoca::Error::InvalidArgument(format!("no topology has {} state variables", file.total_states))
    })?;
    let layout = topology.lattice().layout();
    println!(
        "{} codons, {} state variables ({topology}: inputs 0..{}, output {}, hidden {}..={})",
        file.genome.len(),
        layout.total(),
        layout.n_inputs(),
        layout.output_slot(),
        layout.hidden_slot(0),
        layout.hidden_slot(15)
    );
    for gene in file.genome.genes(layout.total()) {
        println!(
            "gene @{:<6} in {:?} -> out {:?}  table {:?}",
            gene.start_index, gene.input_ids, gene.output_ids, gene.table_codons
        );
    }
    let fsm = Fsm::compile(&file.genome, layout);
    let live = SlicedFsm::new(&fsm, KnockoutMask::NONE);
    println!(
        "{} gates decoded, {} reach the output; reads memory: {}; live memory slots {:?}",
        fsm.gates().len(),
        live.live_gates(),
        fsm.reads_hidden(),
        live.used_hidden()
    );
    Ok(())
}
