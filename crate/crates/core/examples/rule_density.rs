//! Fraction of state-table rows that set the output: exact for small
//! neighborhoods, sampled for large ones.
//!
//!     cargo run --release --example rule_density

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasoca::analysis::{rule_density, DensityMode};
use sasoca::ca::Topology;
use sasoca::fsm::{elementary_rule_table, majority_table, rule_table_fsm, Fsm, StateLayout};
use sasoca::genome::random_genome;

fn main() -> sasoca::Result<()> {
    let l1 = StateLayout::new(3)?;
    let rule110 = rule_table_fsm(&elementary_rule_table(110), 3, l1)?;
    let r = rule_density(&rule110, DensityMode::exact(), 0)?;
    println!(
        "rule 110, exact over 2^{}: {} (5/8 expected)",
        r.total_states, r.density
    );

    let l5 = Topology::D1.lattice().layout();
    let majority = rule_table_fsm(&majority_table(5), 5, l5)?;
    let r = rule_density(&majority, DensityMode::exact(), 0)?;
    println!("majority of 5, exact over 2^{}: {}", r.total_states, r.density);

    // 2D machines have 42 state variables: only sampling is feasible
    let layout = Topology::D2.lattice().layout();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fsm = Fsm::compile(&random_genome(10_000, 16, layout.total(), &mut rng)?, layout);
    match rule_density(&fsm, DensityMode::exact(), 0) {
        Err(e) => println!("random 2D FSM, exact: {e}"),
        Ok(r) => println!("random 2D FSM, exact: {}", r.density),
    }
    let r = rule_density(&fsm, DensityMode::Sampled(1_000_000), 1)?;
    println!(
        "random 2D FSM, {} samples: {:.4} +- {:.4}",
        r.states_evaluated, r.density, r.std_error
    );
    Ok(())
}
