use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Genome;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    /// Per-codon probability of replacement by a uniform random codon.
    pub point_rate: f64,
    /// Per-offspring probability of an insertion, and independently of a deletion.
    pub indel_rate: f64,
    /// Half-open range of segment lengths for insertions and deletions.
    pub indel_size: Range<usize>,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            point_rate: 0.01,
            indel_rate: 0.05,
            indel_size: 16..512,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [("point_rate", self.point_rate), ("indel_rate", self.indel_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::invalid(format!("{name} = {rate} is not in [0, 1]")));
            }
        }
        if self.indel_size.is_empty() || self.indel_size.start == 0 {
            return Err(Error::invalid(format!(
                "indel size range {:?} must be non-empty and positive",
                self.indel_size
            )));
        }
        Ok(())
    }
}

/// Replaces each codon with a uniform random codon with probability `point_rate`.
pub fn point_mutate<R: Rng + ?Sized>(g: &Genome, cfg: &MutationConfig, rng: &mut R) -> Genome {
    if cfg.point_rate <= 0.0 {
        return g.clone();
    }
    let codons = g
        .codons()
        .iter()
        .map(|&c| if rng.gen_bool(cfg.point_rate) { rng.gen() } else { c })
        .collect();
    Genome { codons }
}

/// One insertion draw followed by one deletion draw. An event that would take
/// the length out of bounds is skipped.
pub fn indel_mutate<R: Rng + ?Sized>(g: &Genome, cfg: &MutationConfig, rng: &mut R) -> Genome {
    let mut out = g.clone();
    if cfg.indel_rate <= 0.0 {
        return out;
    }
    if rng.gen_bool(cfg.indel_rate) {
        let size = rng.gen_range(cfg.indel_size.clone());
        let src = rng.gen_range(0..out.len());
        let at = rng.gen_range(0..=out.len());
        if let Some(next) = out.insert_duplicate(src, size, at) {
            out = next;
        }
    }
    if rng.gen_bool(cfg.indel_rate) {
        let size = rng.gen_range(cfg.indel_size.clone());
        let start = rng.gen_range(0..out.len());
        if let Some(next) = out.delete_segment(start, size) {
            out = next;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{random_genome, MAX_GENOME_LEN, MIN_GENOME_LEN};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn base(len: usize, seed: u64) -> Genome {
        random_genome(len, 0, 22, &mut rng(seed)).unwrap()
    }

    #[test]
    fn zero_rates_are_identity() {
        let g = base(2_000, 1);
        let cfg = MutationConfig {
            point_rate: 0.0,
            indel_rate: 0.0,
            ..Default::default()
        };
        assert_eq!(point_mutate(&g, &cfg, &mut rng(2)), g);
        assert_eq!(indel_mutate(&g, &cfg, &mut rng(2)), g);
    }

    #[test]
    fn full_point_rate_rerolls_everything() {
        let g = base(10_000, 3);
        let cfg = MutationConfig {
            point_rate: 1.0,
            ..Default::default()
        };
        let m = point_mutate(&g, &cfg, &mut rng(4));
        let same = g.codons().iter().zip(m.codons()).filter(|(a, b)| a == b).count();
        // Binomial(10000, 1/256): mean 39.06, sd 6.24
        let (mean, sd) = (10_000.0 / 256.0, (10_000.0f64 * (1.0 / 256.0) * (255.0 / 256.0)).sqrt());
        assert!((same as f64 - mean).abs() < 4.0 * sd, "{same} coincidences");
    }

    #[test]
    fn point_mutation_count_matches_binomial() {
        let g = base(10_000, 5);
        let cfg = MutationConfig::default();
        let mut r = rng(6);
        let trials = 1_000;
        let total: usize = (0..trials)
            .map(|_| {
                let m = point_mutate(&g, &cfg, &mut r);
                g.codons().iter().zip(m.codons()).filter(|(a, b)| a != b).count()
            })
            .sum();
        // a replaced codon differs with probability 255/256
        let p = 0.01 * 255.0 / 256.0;
        let per_trial_var = 10_000.0 * p * (1.0 - p);
        let mean = total as f64 / trials as f64;
        let sigma_of_mean = (per_trial_var / trials as f64).sqrt();
        assert!((mean - 10_000.0 * p).abs() < 3.0 * sigma_of_mean, "mean {mean}");
    }

    #[test]
    fn insertion_near_max_is_skipped() {
        let g = Genome::new(vec![7; 39_900]).unwrap();
        let cfg = MutationConfig {
            point_rate: 0.0,
            indel_rate: 1.0,
            indel_size: 100..512,
        };
        for seed in 0..20 {
            let m = indel_mutate(&g, &cfg, &mut rng(seed));
            // insertion always skipped; deletion always applies
            assert!(m.len() < 39_900);
        }
    }

    #[test]
    fn validate_rejects_bad_config() {
        let mut cfg = MutationConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.point_rate = 1.5;
        assert!(cfg.validate().is_err());
        cfg = MutationConfig {
            indel_size: 16..16,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn mutation_keeps_bounds(seed in any::<u64>(), len in 1_000usize..1_600, rounds in 1usize..40) {
            let cfg = MutationConfig { point_rate: 0.05, indel_rate: 0.9, indel_size: 16..512 };
            let mut r = rng(seed);
            let mut g = base(len, seed ^ 1);
            for _ in 0..rounds {
                g = indel_mutate(&point_mutate(&g, &cfg, &mut r), &cfg, &mut r);
                prop_assert!((MIN_GENOME_LEN..MAX_GENOME_LEN).contains(&g.len()));
            }
        }

        #[test]
        fn mutation_is_reproducible(seed in any::<u64>()) {
            let cfg = MutationConfig { point_rate: 0.02, indel_rate: 0.5, indel_size: 16..512 };
            let g = base(1_500, seed);
            let a = indel_mutate(&point_mutate(&g, &cfg, &mut rng(seed)), &cfg, &mut rng(seed + 1));
            let b = indel_mutate(&point_mutate(&g, &cfg, &mut rng(seed)), &cfg, &mut rng(seed + 1));
            prop_assert_eq!(a, b);
        }
    }
}
