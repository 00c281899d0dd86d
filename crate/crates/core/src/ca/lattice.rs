use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsm::StateLayout;

/// Periodic d-dimensional lattice (d = 1..=3) with a Moore neighborhood of
/// radius `r`.
///
/// Cells are indexed in raster order with the last dimension fastest. Each
/// cell's neighbor list enumerates offsets from `(-r, .., -r)` to
/// `(+r, .., +r)`, again last dimension fastest, so the cell itself sits at
/// the centre of the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dims: Vec<usize>,
    radius: usize,
    nsize: usize,
    neighbors: Vec<u32>,
}

/// Name of the neighbor ordering, recorded alongside persisted genomes.
pub const NEIGHBOR_ORDER: &str = "moore-raster-last-fastest";

impl Lattice {
    pub fn new(dims: &[usize], radius: usize) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::invalid(format!(
                "lattices have 1 to 3 dimensions, got {}",
                dims.len()
            )));
        }
        if radius == 0 {
            return Err(Error::invalid("radius must be positive"));
        }
        let span = 2 * radius + 1;
        if let Some(&e) = dims.iter().find(|&&e| e < span) {
            return Err(Error::invalid(format!(
                "extent {e} is smaller than the neighborhood width {span} for radius {radius}"
            )));
        }
        let cells: usize = dims.iter().product();
        if cells > u32::MAX as usize {
            return Err(Error::invalid("lattice too large"));
        }
        let d = dims.len();
        let nsize = span.pow(d as u32);
        let offsets: Vec<Vec<isize>> = (0..nsize)
            .map(|k| {
                raster_coords(k, &vec![span; d])
                    .iter()
                    .map(|&c| c as isize - radius as isize)
                    .collect()
            })
            .collect();
        let mut neighbors = Vec::with_capacity(cells * nsize);
        for cell in 0..cells {
            let here = raster_coords(cell, dims);
            for off in &offsets {
                let coords: Vec<usize> = here
                    .iter()
                    .zip(off)
                    .zip(dims)
                    .map(|((&c, &o), &e)| (c as isize + o).rem_euclid(e as isize) as usize)
                    .collect();
                neighbors.push(raster_index(&coords, dims) as u32);
            }
        }
        Ok(Lattice {
            dims: dims.to_vec(),
            radius,
            nsize,
            neighbors,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn cells(&self) -> usize {
        self.neighbors.len() / self.nsize
    }

    pub fn neighborhood_size(&self) -> usize {
        self.nsize
    }

    /// Position of the cell itself within every neighbor list.
    pub fn self_slot(&self) -> usize {
        self.nsize / 2
    }

    pub fn neighbors(&self, cell: usize) -> &[u32] {
        &self.neighbors[cell * self.nsize..(cell + 1) * self.nsize]
    }

    pub(crate) fn neighbor_table(&self) -> &[u32] {
        &self.neighbors
    }

    /// State layout of FSMs that run on this lattice.
    pub fn layout(&self) -> StateLayout {
        StateLayout::new(self.nsize).expect("neighborhood is never empty")
    }

    /// Simulation budget: twice the number of cells.
    pub fn max_steps(&self) -> usize {
        2 * self.cells()
    }

    /// The same topology with every extent multiplied by `s`.
    pub fn scaled(&self, s: usize) -> Result<Lattice> {
        if s == 0 {
            return Err(Error::invalid("scale factor must be at least 1"));
        }
        let dims: Vec<usize> = self.dims.iter().map(|&e| e * s).collect();
        Lattice::new(&dims, self.radius)
    }

    pub fn coords(&self, cell: usize) -> Vec<usize> {
        raster_coords(cell, &self.dims)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        raster_index(coords, &self.dims)
    }
}

fn raster_coords(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut coords = vec![0; dims.len()];
    for (c, &e) in coords.iter_mut().zip(dims).rev() {
        *c = index % e;
        index /= e;
    }
    coords
}

fn raster_index(coords: &[usize], dims: &[usize]) -> usize {
    coords.iter().zip(dims).fold(0, |acc, (&c, &e)| acc * e + c)
}

/// The three canonical topologies used for evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    /// N = 35, r = 2
    D1,
    /// 7 x 7, r = 2
    D2,
    /// 3 x 3 x 5, r = 1
    D3,
}

impl Topology {
    pub fn dims(&self) -> &'static [usize] {
        match self {
            Topology::D1 => &[35],
            Topology::D2 => &[7, 7],
            Topology::D3 => &[3, 3, 5],
        }
    }

    pub fn radius(&self) -> usize {
        match self {
            Topology::D1 | Topology::D2 => 2,
            Topology::D3 => 1,
        }
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.dims(), self.radius()).expect("canonical lattices are valid")
    }

    /// Identifies the canonical topology whose FSMs have `total` state variables.
    pub fn from_total_states(total: usize) -> Option<Topology> {
        [Topology::D1, Topology::D2, Topology::D3]
            .into_iter()
            .find(|t| t.lattice().layout().total() == total)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::D1 => "1d",
            Topology::D2 => "2d",
            Topology::D3 => "3d",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1d" | "1" => Ok(Topology::D1),
            "2d" | "2" => Ok(Topology::D2),
            "3d" | "3" => Ok(Topology::D3),
            other => Err(Error::invalid(format!(
                "unknown topology `{other}` (expected 1d, 2d or 3d)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn one_dimensional_wrap() {
        let l = Lattice::new(&[35], 2).unwrap();
        assert_eq!(l.neighbors(0), &[33, 34, 0, 1, 2]);
        assert_eq!(l.neighbors(34), &[32, 33, 34, 0, 1]);
        assert_eq!(l.self_slot(), 2);
        assert_eq!(l.layout().total(), 22);
        assert_eq!(l.max_steps(), 70);
    }

    #[test]
    fn two_dimensional_neighbors_distinct() {
        let l = Topology::D2.lattice();
        assert_eq!(l.cells(), 49);
        for cell in 0..l.cells() {
            let n = l.neighbors(cell);
            assert_eq!(n.len(), 25);
            assert_eq!(n.iter().collect::<HashSet<_>>().len(), 25);
            assert_eq!(n[l.self_slot()] as usize, cell);
        }
        assert_eq!(l.layout().total(), 42);
    }

    #[test]
    fn three_dimensional_matches_nested_loops() {
        let l = Topology::D3.lattice();
        assert_eq!(l.cells(), 45);
        assert_eq!(l.layout().total(), 44);
        for cell in [0usize, 7, 44] {
            let (x, y, z) = (cell / 15, cell / 5 % 3, cell % 5);
            let mut expect = Vec::new();
            for dx in -1i32..=1 {
                for dy in -1i32..=1 {
                    for dz in -1i32..=1 {
                        let nx = (x as i32 + dx).rem_euclid(3) as u32;
                        let ny = (y as i32 + dy).rem_euclid(3) as u32;
                        let nz = (z as i32 + dz).rem_euclid(5) as u32;
                        expect.push(nx * 15 + ny * 5 + nz);
                    }
                }
            }
            assert_eq!(l.neighbors(cell), &expect[..]);
        }
    }

    #[test]
    fn rejects_self_overlapping_neighborhoods() {
        assert!(Lattice::new(&[4], 2).is_err());
        assert!(Lattice::new(&[7, 4], 2).is_err());
        assert!(Lattice::new(&[5], 2).is_ok());
        assert!(Lattice::new(&[], 1).is_err());
        assert!(Lattice::new(&[3, 3, 3, 3], 1).is_err());
        assert!(Lattice::new(&[9], 0).is_err());
    }

    #[test]
    fn scaling_multiplies_every_extent() {
        assert_eq!(Topology::D1.lattice().scaled(9).unwrap().cells(), 315);
        assert_eq!(Topology::D2.lattice().scaled(4).unwrap().cells(), 784);
        assert_eq!(Topology::D3.lattice().scaled(2).unwrap().dims(), &[6, 6, 10]);
    }

    #[test]
    fn topology_round_trip() {
        for t in [Topology::D1, Topology::D2, Topology::D3] {
            assert_eq!(t.to_string().parse::<Topology>().unwrap(), t);
            assert_eq!(Topology::from_total_states(t.lattice().layout().total()), Some(t));
        }
        assert!("4d".parse::<Topology>().is_err());
    }
}
