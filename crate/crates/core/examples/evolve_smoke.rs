//! Short evolution run on the 1D lattice, printing the fitness curve and the
//! dominant's accuracy on 1,000 binomial ICs.
//!
//!     cargo run --release --example evolve_smoke -- [seed] [updates]

use std::time::Instant;

use sasoca::ca::IcScheme;
use sasoca::evolve::{run_ea, test_dominant, EaConfig, Jobs};

fn main() -> sasoca::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let updates = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = EaConfig {
        population_size: 100,
        samples_per_eval: 20,
        updates,
        seed,
        ..EaConfig::default()
    };
    let lattice = cfg.lattice.build()?;
    let start = Instant::now();
    let (log, dominant) = run_ea(cfg, Jobs(1))?;
    for r in log.records.iter().step_by(20) {
        println!(
            "update {:>5}  max eff {:.3}  mean eff {:.3}  max raw {:.3}  mean len {:.0}",
            r.update, r.max_eff_fitness, r.mean_eff_fitness, r.max_raw_fitness, r.mean_genome_len
        );
    }
    let acc = test_dominant(dominant.fsm(), &lattice, 1_000, IcScheme::Binomial, seed)?;
    println!(
        "dominant #{}: {} genes, {} codons, test accuracy {acc:.3} ({:.1?})",
        dominant.id,
        dominant.fsm().gates().len(),
        dominant.genome.len(),
        start.elapsed()
    );
    Ok(())
}
