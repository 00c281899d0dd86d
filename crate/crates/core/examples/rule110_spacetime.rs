//! Rule 110 from a single live cell, written as a one-gate FSM and rendered
//! as a space-time diagram.
//!
//!     cargo run --release --example rule110_spacetime -- [out.pgm]

use sasoca::ca::render::{ascii, spacetime};
use sasoca::ca::{run_ic, Configuration, Lattice};
use sasoca::fsm::{elementary_rule_table, rule_table_fsm, KnockoutMask};

fn main() -> sasoca::Result<()> {
    let lattice = Lattice::new(&[64], 1)?;
    let fsm = rule_table_fsm(&elementary_rule_table(110), 3, lattice.layout())?;
    let mut bits = vec![false; lattice.cells()];
    bits[lattice.cells() - 1] = true;
    let ic = Configuration::new(lattice.dims(), bits)?;
    let (outcome, trajectory) = run_ic(&fsm, &lattice, &ic, KnockoutMask::NONE, true)?;
    let trajectory = trajectory.expect("trajectory was requested");
    print!("{}", ascii(&trajectory[..32]));
    println!(
        "... {} steps, final density {:.3}",
        outcome.steps_run,
        outcome.final_config.density()
    );
    if let Some(path) = std::env::args().nth(1) {
        spacetime(&trajectory, 4)?.write_pgm(path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
