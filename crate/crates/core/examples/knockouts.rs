//! Memory knockout and neighbor knockout on a few machines: the change in
//! accuracy when hidden state or the neighborhood is held at zero.
//!
//!     cargo run --release --example knockouts -- [genome]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasoca::analysis::{knockout_hidden, s_op, TestProtocol};
use sasoca::ca::{Lattice, Topology};
use sasoca::evolve::Jobs;
use sasoca::fsm::{majority_table, rule_table_fsm, Fsm};
use sasoca::genome::{random_genome, GenomeFile};

fn report(name: &str, fsm: &Fsm, lattice: &Lattice) -> sasoca::Result<()> {
    let p = TestProtocol::binomial(1_000, 11);
    let k = knockout_hidden(fsm, lattice, &p, Jobs(1))?;
    let s = s_op(fsm, lattice, &p, Jobs(1))?;
    println!(
        "{name:<22} W {:.3}  W(no memory) {:.3}  dW {:+.3}  | F {:.3}  F(no neighbors) {:.3}  S_op {:+.3}",
        k.w_normal, k.w_knockout, k.delta_w, s.f, s.f_nc, s.s_op
    );
    Ok(())
}

fn main() -> sasoca::Result<()> {
    let lattice = Topology::D1.lattice();
    let layout = lattice.layout();
    report(
        "majority of 5",
        &rule_table_fsm(&majority_table(5), 5, layout)?,
        &lattice,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..3 {
        let g = random_genome(10_000, 16, layout.total(), &mut rng)?;
        report(&format!("random genome {i}"), &Fsm::compile(&g, layout), &lattice)?;
    }
    if let Some(path) = std::env::args().nth(1) {
        let file = GenomeFile::read(path.as_ref())?;
        let t = Topology::from_total_states(file.total_states)
            .ok_or_else(|| sasoca::Error::InvalidArgument("genome matches no standard topology".into()))?;
        let lattice = t.lattice();
        report(&path, &Fsm::compile(&file.genome, lattice.layout()), &lattice)?;
    }
    Ok(())
}
