//! Runs one machine on lattices scaled up from its training size and prints
//! accuracy per scale factor as CSV.
//!
//!     cargo run --release --example scaling -- [genome]
//!
//! Without a genome the majority-of-5 rule on the 1D lattice is used.

use sasoca::analysis::{scaling_sweep, TestProtocol};
use sasoca::ca::Topology;
use sasoca::evolve::Jobs;
use sasoca::fsm::{majority_table, rule_table_fsm, Fsm};
use sasoca::genome::GenomeFile;

fn main() -> sasoca::Result<()> {
    let (fsm, base) = match std::env::args().nth(1) {
        Some(path) => {
            let file = GenomeFile::read(path.as_ref())?;
            let t = Topology::from_total_states(file.total_states)
                .ok_or_else(|| sasoca::Error::InvalidArgument("genome matches no standard topology".into()))?;
            let lattice = t.lattice();
            (Fsm::compile(&file.genome, lattice.layout()), lattice)
        }
        None => {
            let lattice = Topology::D1.lattice();
            (rule_table_fsm(&majority_table(5), 5, lattice.layout())?, lattice)
        }
    };
    let scales: Vec<usize> = (1..=9).collect();
    let report = scaling_sweep(&fsm, &base, &scales, &TestProtocol::binomial(1_000, 5), Jobs(1))?;
    print!("{}", report.to_csv());
    Ok(())
}
