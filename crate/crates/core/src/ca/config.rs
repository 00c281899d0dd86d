use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Lattice;
use crate::error::{Error, Result};

/// Joint state of all cells, in the lattice's raster order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    dims: Vec<usize>,
    bits: Vec<bool>,
}

impl Configuration {
    pub fn new(dims: &[usize], bits: Vec<bool>) -> Result<Self> {
        let cells: usize = dims.iter().product();
        if bits.len() != cells {
            return Err(Error::invalid(format!(
                "configuration has {} bits, lattice {dims:?} has {cells} cells",
                bits.len()
            )));
        }
        Ok(Configuration {
            dims: dims.to_vec(),
            bits,
        })
    }

    pub fn filled(lattice: &Lattice, value: bool) -> Self {
        Configuration {
            dims: lattice.dims().to_vec(),
            bits: vec![value; lattice.cells()],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn density(&self) -> f64 {
        self.ones() as f64 / self.len() as f64
    }

    pub fn is_uniform(&self, value: bool) -> bool {
        self.bits.iter().all(|&b| b == value)
    }

    /// Cyclic shift by `shift[i]` cells along dimension `i`: the bit at
    /// coordinate `c` moves to `c + shift`.
    pub fn shifted(&self, shift: &[usize]) -> Configuration {
        assert_eq!(shift.len(), self.dims.len(), "one shift per dimension");
        let mut bits = vec![false; self.bits.len()];
        let mut coords = vec![0usize; self.dims.len()];
        for (idx, &b) in self.bits.iter().enumerate() {
            let mut rem = idx;
            for d in (0..self.dims.len()).rev() {
                coords[d] = (rem % self.dims[d] + shift[d]) % self.dims[d];
                rem /= self.dims[d];
            }
            let target = coords.iter().zip(&self.dims).fold(0, |acc, (&c, &e)| acc * e + c);
            bits[target] = b;
        }
        Configuration {
            dims: self.dims.clone(),
            bits,
        }
    }

    /// Parses `0`/`1` characters (whitespace ignored) in raster order.
    pub fn parse(text: &str, lattice: &Lattice) -> Result<Self> {
        let bits = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' | '.' => Ok(false),
                '1' | '#' => Ok(true),
                other => Err(Error::invalid(format!(
                    "unexpected character `{other}` in configuration"
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Configuration::new(lattice.dims(), bits)
    }
}

impl fmt::Display for Configuration {
    /// Raster-order `0`/`1` string, one line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// How initial configurations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IcScheme {
    /// Density uniform on [0, 1].
    UniformDensityFull,
    /// Density uniform on [0, 0.5).
    UniformDensityLow,
    /// Density uniform on (0.5, 1].
    UniformDensityHigh,
    /// Each cell independently 1 with probability 1/2.
    Binomial,
}

impl fmt::Display for IcScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IcScheme::UniformDensityFull => "uniform",
            IcScheme::UniformDensityLow => "uniform-low",
            IcScheme::UniformDensityHigh => "uniform-high",
            IcScheme::Binomial => "binomial",
        })
    }
}

impl FromStr for IcScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform-full" => Ok(IcScheme::UniformDensityFull),
            "uniform-low" | "low" => Ok(IcScheme::UniformDensityLow),
            "uniform-high" | "high" => Ok(IcScheme::UniformDensityHigh),
            "binomial" => Ok(IcScheme::Binomial),
            other => Err(Error::invalid(format!(
                "unknown IC scheme `{other}` (expected uniform, uniform-low, uniform-high or binomial)"
            ))),
        }
    }
}

/// `round(rho * cells)` ones at uniformly shuffled positions. May produce an
/// exact tie on even-sized lattices.
pub fn ic_with_density<R: Rng + ?Sized>(lattice: &Lattice, rho: f64, rng: &mut R) -> Configuration {
    let cells = lattice.cells();
    let ones = ((rho.clamp(0.0, 1.0) * cells as f64).round() as usize).min(cells);
    let mut bits = vec![false; cells];
    bits[..ones].fill(true);
    bits.shuffle(rng);
    Configuration {
        dims: lattice.dims().to_vec(),
        bits,
    }
}

/// Draws an initial configuration; configurations with exactly half ones are
/// rejected and redrawn.
pub fn gen_ic<R: Rng + ?Sized>(lattice: &Lattice, scheme: IcScheme, rng: &mut R) -> Configuration {
    let cells = lattice.cells();
    loop {
        let ic = match scheme {
            IcScheme::Binomial => Configuration {
                dims: lattice.dims().to_vec(),
                bits: (0..cells).map(|_| rng.gen::<bool>()).collect(),
            },
            _ => {
                let rho = loop {
                    let rho: f64 = rng.gen();
                    let ok = match scheme {
                        IcScheme::UniformDensityLow => rho < 0.5,
                        IcScheme::UniformDensityHigh => rho > 0.5,
                        _ => true,
                    };
                    if ok {
                        break rho;
                    }
                };
                ic_with_density(lattice, rho, rng)
            }
        };
        if ic.ones() * 2 != cells {
            return ic;
        }
    }
}

/// 1 if strictly more than half the cells are 1, 0 if strictly fewer.
pub fn majority(ic: &Configuration) -> Result<bool> {
    let (ones, cells) = (ic.ones(), ic.len());
    match (ones * 2).cmp(&cells) {
        std::cmp::Ordering::Greater => Ok(true),
        std::cmp::Ordering::Less => Ok(false),
        std::cmp::Ordering::Equal => Err(Error::Tie { ones, cells }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::Topology;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_rounding() {
        let l = Topology::D1.lattice();
        let ic = ic_with_density(&l, 0.2, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(ic.ones(), 7);
        let ic = ic_with_density(&l, 0.5, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(ic.ones(), 18); // 17.5 rounds away from zero
    }

    #[test]
    fn majority_cases() {
        let l = Topology::D1.lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(majority(&ic_with_density(&l, 18.0 / 35.0, &mut rng)).unwrap());
        assert!(!majority(&ic_with_density(&l, 17.0 / 35.0, &mut rng)).unwrap());
        let l3 = Topology::D3.lattice();
        assert!(majority(&ic_with_density(&l3, 23.0 / 45.0, &mut rng)).unwrap());
        let even = Lattice::new(&[10], 1).unwrap();
        assert!(matches!(
            majority(&ic_with_density(&even, 0.5, &mut rng)),
            Err(Error::Tie { ones: 5, cells: 10 })
        ));
    }

    #[test]
    fn schemes_respect_density_side() {
        let l = Topology::D1.lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            assert!(gen_ic(&l, IcScheme::UniformDensityLow, &mut rng).ones() < 18);
            assert!(gen_ic(&l, IcScheme::UniformDensityHigh, &mut rng).ones() > 17);
        }
    }

    #[test]
    fn even_lattices_never_tie() {
        let l = Lattice::new(&[10], 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for scheme in [IcScheme::Binomial, IcScheme::UniformDensityFull] {
            for _ in 0..2_000 {
                assert_ne!(gen_ic(&l, scheme, &mut rng).ones(), 5);
            }
        }
    }

    #[test]
    fn binomial_moments() {
        let l = Topology::D1.lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let total: usize = (0..n).map(|_| gen_ic(&l, IcScheme::Binomial, &mut rng).ones()).sum();
        let mean = total as f64 / n as f64;
        // sd of Binomial(35, 1/2) is sqrt(8.75); sd of the mean over n draws
        let sd_mean = (8.75f64 / n as f64).sqrt();
        assert!((mean - 17.5).abs() < 3.0 * sd_mean, "mean ones {mean}");
    }

    #[test]
    fn shift_and_parse() {
        let l = Lattice::new(&[3, 5], 1).unwrap();
        let ic = Configuration::parse("10000 00000 00001", &l).unwrap();
        let s = ic.shifted(&[1, 1]);
        assert_eq!(s.to_string(), "100000100000000");
        assert!(Configuration::parse("1012", &Lattice::new(&[4], 1).unwrap()).is_err());
        assert!(Configuration::parse("101", &Lattice::new(&[4], 1).unwrap()).is_err());
    }
}
