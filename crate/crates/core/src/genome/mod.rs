//! Circular integer genomes and gene decoding.
//!
//! A gene starts at every occurrence of the start codon `(42, 213)` and is
//! laid out as
//!
//! ```text
//! 42 213 | fan-in fan-out | input ids (n_in) | output ids (n_out) | table (2^n_in)
//! ```
//!
//! Numeric codons are mapped into range with a modulus: `n_in = 1 + c % 4`,
//! `n_out = 1 + c % 4`, `id = c % total_states`. Indices wrap around the end
//! of the genome, and genes may overlap.

mod io;
mod mutation;

pub use io::{GenomeFile, GENOME_HEADER};
pub use mutation::{indel_mutate, point_mutate, MutationConfig};

use rand::Rng;

use crate::error::{Error, Result};

pub const START_CODON: [u8; 2] = [42, 213];

/// Smallest legal genome length.
pub const MIN_GENOME_LEN: usize = 1_000;
/// Exclusive upper bound on genome length.
pub const MAX_GENOME_LEN: usize = 40_000;

/// Largest fan-in or fan-out a gene can encode.
pub const MAX_GENE_FAN: usize = 4;

/// A circular sequence of byte codons with length in
/// `[MIN_GENOME_LEN, MAX_GENOME_LEN)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    codons: Vec<u8>,
}

impl Genome {
    pub fn new(codons: Vec<u8>) -> Result<Self> {
        check_len(codons.len())?;
        Ok(Genome { codons })
    }

    pub fn codons(&self) -> &[u8] {
        &self.codons
    }

    pub fn into_codons(self) -> Vec<u8> {
        self.codons
    }

    pub fn len(&self) -> usize {
        self.codons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codons.is_empty()
    }

    pub fn genes(&self, total_states: usize) -> Vec<GeneSpan> {
        scan_genes(&self.codons, total_states)
    }

    /// Random codons with `n_seed_genes` well-formed genes written at
    /// non-overlapping offsets.
    pub fn random<R: Rng + ?Sized>(
        length: usize,
        n_seed_genes: usize,
        total_states: usize,
        rng: &mut R,
    ) -> Result<Self> {
        random_genome(length, n_seed_genes, total_states, rng)
    }

    /// Returns a copy with the circular segment `[src, src + size)` duplicated
    /// and inserted before position `at`, or `None` if the result would be too
    /// long.
    pub fn insert_duplicate(&self, src: usize, size: usize, at: usize) -> Option<Genome> {
        let n = self.codons.len();
        let new_len = n + size;
        if new_len >= MAX_GENOME_LEN || at > n {
            return None;
        }
        let segment: Vec<u8> = (0..size).map(|k| self.codons[(src + k) % n]).collect();
        let mut codons = Vec::with_capacity(new_len);
        codons.extend_from_slice(&self.codons[..at]);
        codons.extend_from_slice(&segment);
        codons.extend_from_slice(&self.codons[at..]);
        Some(Genome { codons })
    }

    /// Returns a copy with the circular segment `[start, start + size)`
    /// removed, or `None` if the result would be too short.
    pub fn delete_segment(&self, start: usize, size: usize) -> Option<Genome> {
        let n = self.codons.len();
        if size > n || n - size < MIN_GENOME_LEN || start >= n {
            return None;
        }
        let end = start + size;
        let codons = if end <= n {
            let mut c = Vec::with_capacity(n - size);
            c.extend_from_slice(&self.codons[..start]);
            c.extend_from_slice(&self.codons[end..]);
            c
        } else {
            // wraps: keep [end - n, start)
            self.codons[end - n..start].to_vec()
        };
        Some(Genome { codons })
    }
}

pub(crate) fn check_len(len: usize) -> Result<()> {
    if !(MIN_GENOME_LEN..MAX_GENOME_LEN).contains(&len) {
        return Err(Error::invalid(format!(
            "genome length {len} outside [{MIN_GENOME_LEN}, {MAX_GENOME_LEN})"
        )));
    }
    Ok(())
}

/// One decoded gene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneSpan {
    /// Index of the `42` of the start codon.
    pub start_index: usize,
    pub n_in: usize,
    pub n_out: usize,
    pub input_ids: Vec<usize>,
    pub output_ids: Vec<usize>,
    pub table_codons: Vec<u8>,
}

impl GeneSpan {
    /// Number of codons the gene occupies, start codon included.
    pub fn encoded_len(&self) -> usize {
        4 + self.n_in + self.n_out + self.table_codons.len()
    }
}

/// Decodes one gene per start codon, in ascending start position.
///
/// `codons` is treated as circular; the slice may be of any length, which
/// lets callers scan fragments that are not valid genomes.
///
/// # Panics
///
/// If `total_states` is zero.
pub fn scan_genes(codons: &[u8], total_states: usize) -> Vec<GeneSpan> {
    assert!(total_states > 0, "total_states must be positive");
    let n = codons.len();
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .filter(|&i| codons[i] == START_CODON[0] && codons[(i + 1) % n] == START_CODON[1])
        .map(|i| decode_at(codons, i, total_states))
        .collect()
}

fn decode_at(codons: &[u8], start: usize, total_states: usize) -> GeneSpan {
    let n = codons.len();
    let mut pos = start + 2;
    let mut next = || {
        let c = codons[pos % n];
        pos += 1;
        c
    };
    let n_in = 1 + next() as usize % MAX_GENE_FAN;
    let n_out = 1 + next() as usize % MAX_GENE_FAN;
    let input_ids = (0..n_in).map(|_| next() as usize % total_states).collect();
    let output_ids = (0..n_out).map(|_| next() as usize % total_states).collect();
    let table_codons = (0..1usize << n_in).map(|_| next()).collect();
    GeneSpan {
        start_index: start,
        n_in,
        n_out,
        input_ids,
        output_ids,
        table_codons,
    }
}

/// Longest possible gene: start codon, fan codons, 4 + 4 ids, 16 table entries.
const MAX_GENE_LEN: usize = 4 + 2 * MAX_GENE_FAN + (1 << MAX_GENE_FAN);

pub fn random_genome<R: Rng + ?Sized>(
    length: usize,
    n_seed_genes: usize,
    total_states: usize,
    rng: &mut R,
) -> Result<Genome> {
    check_len(length)?;
    if total_states == 0 {
        return Err(Error::invalid("total_states must be positive"));
    }
    if n_seed_genes * MAX_GENE_LEN > length / 2 {
        return Err(Error::invalid(format!(
            "{n_seed_genes} seed genes do not fit in a genome of length {length}"
        )));
    }
    let mut codons: Vec<u8> = (0..length).map(|_| rng.gen()).collect();
    let mut placed: Vec<(usize, usize)> = Vec::with_capacity(n_seed_genes);
    for _ in 0..n_seed_genes {
        let gene = random_gene_codons(rng);
        let offset = loop {
            let candidate = rng.gen_range(0..=length - gene.len());
            let end = candidate + gene.len();
            if placed.iter().all(|&(s, e)| end <= s || candidate >= e) {
                break candidate;
            }
        };
        codons[offset..offset + gene.len()].copy_from_slice(&gene);
        placed.push((offset, offset + gene.len()));
    }
    Ok(Genome { codons })
}

fn random_gene_codons<R: Rng + ?Sized>(rng: &mut R) -> Vec<u8> {
    let fan_in: u8 = rng.gen();
    let fan_out: u8 = rng.gen();
    let n_in = 1 + fan_in as usize % MAX_GENE_FAN;
    let n_out = 1 + fan_out as usize % MAX_GENE_FAN;
    let body = n_in + n_out + (1 << n_in);
    let mut gene = Vec::with_capacity(4 + body);
    gene.extend_from_slice(&START_CODON);
    gene.push(fan_in);
    gene.push(fan_out);
    gene.extend((0..body).map(|_| rng.gen::<u8>()));
    gene
}
