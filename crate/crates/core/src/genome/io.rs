//! Plain-text genome files.
//!
//! ```text
//! sasoca-genome v1 total_states=22
//! 12 42 213 0 ...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{check_len, Genome};
use crate::error::{Error, Result};

pub const GENOME_HEADER: &str = "sasoca-genome v1";

/// A genome together with the state-variable count it was evolved against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenomeFile {
    pub genome: Genome,
    pub total_states: usize,
}

impl GenomeFile {
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.genome.len() * 4 + 48);
        let _ = writeln!(s, "{GENOME_HEADER} total_states={}", self.total_states);
        for (i, c) in self.genome.codons().iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{c}");
        }
        s.push('\n');
        s
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "empty genome file"))?;
        let rest = header
            .strip_prefix(GENOME_HEADER)
            .ok_or_else(|| Error::parse(origin, 1, format!("expected header `{GENOME_HEADER}`")))?;
        let total_states = rest
            .trim()
            .strip_prefix("total_states=")
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::parse(origin, 1, "missing or invalid total_states"))?;
        let body = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 2, "missing codon line"))?;
        let codons = body
            .split_ascii_whitespace()
            .enumerate()
            .map(|(i, tok)| {
                tok.parse::<u8>()
                    .map_err(|_| Error::parse(origin, 2, format!("codon #{i} `{tok}` is not an integer in [0, 255]")))
            })
            .collect::<Result<Vec<u8>>>()?;
        if let Some(extra) = lines.position(|l| !l.trim().is_empty()) {
            return Err(Error::parse(origin, 3 + extra, "unexpected content after codon line"));
        }
        check_len(codons.len()).map_err(|e| Error::parse(origin, 2, e.to_string()))?;
        Ok(GenomeFile {
            genome: Genome { codons },
            total_states,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn text(codons: &[u32]) -> String {
        let body: Vec<String> = codons.iter().map(|c| c.to_string()).collect();
        format!("{GENOME_HEADER} total_states=22\n{}\n", body.join(" "))
    }

    #[test]
    fn rejects_out_of_range_codon() {
        let mut codons = vec![0u32; 1_000];
        codons[10] = 256;
        let err = GenomeFile::parse(&text(&codons), "g").unwrap_err();
        assert!(err.to_string().contains("codon #10"), "{err}");
    }

    #[test]
    fn rejects_bad_length() {
        assert!(GenomeFile::parse(&text(&[1, 2, 3]), "g").is_err());
        assert!(GenomeFile::parse(&text(&vec![0; 40_000]), "g").is_err());
        assert!(GenomeFile::parse(&text(&vec![0; 1_000]), "g").is_ok());
    }

    #[test]
    fn rejects_bad_header() {
        assert!(GenomeFile::parse("genome v2\n1 2\n", "g").is_err());
        assert!(GenomeFile::parse(&format!("{GENOME_HEADER} total_states=0\n1\n"), "g").is_err());
        assert!(GenomeFile::parse("", "g").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn text_roundtrip(codons in proptest::collection::vec(any::<u8>(), 1_000..1_300), total in 1usize..64) {
            let f = GenomeFile { genome: Genome::new(codons).unwrap(), total_states: total };
            prop_assert_eq!(GenomeFile::parse(&f.to_text(), "rt").unwrap(), f);
        }
    }
}
