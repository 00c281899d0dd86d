use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RUN_LOG_HEADER: &str = "update,max_eff_fitness,mean_eff_fitness,max_raw_fitness,mean_genome_len";

/// Population statistics taken right after an update's evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord {
    pub update: usize,
    pub max_eff_fitness: f64,
    pub mean_eff_fitness: f64,
    pub max_raw_fitness: f64,
    pub mean_genome_len: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<UpdateRecord>,
}

impl RunLog {
    /// Floats use the shortest representation that parses back exactly.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(RUN_LOG_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.update, r.max_eff_fitness, r.mean_eff_fitness, r.max_raw_fitness, r.mean_genome_len
            );
        }
        s
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == RUN_LOG_HEADER => {}
            _ => return Err(Error::parse(origin, 1, format!("expected header `{RUN_LOG_HEADER}`"))),
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("expected 5 fields, got {}", fields.len()),
                ));
            }
            let num = |k: usize| -> Result<f64> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| Error::parse(origin, i + 1, format!("`{}` is not a number", fields[k])))
            };
            let update = fields[0]
                .parse::<usize>()
                .map_err(|_| Error::parse(origin, i + 1, format!("`{}` is not an update index", fields[0])))?;
            records.push(UpdateRecord {
                update,
                max_eff_fitness: num(1)?,
                mean_eff_fitness: num(2)?,
                max_raw_fitness: num(3)?,
                mean_genome_len: num(4)?,
            });
        }
        Ok(RunLog { records })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }

    /// Highest raw fitness seen in updates `0..=update`.
    pub fn best_raw_by(&self, update: usize) -> f64 {
        self.records
            .iter()
            .filter(|r| r.update <= update)
            .map(|r| r.max_raw_fitness)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_is_checked() {
        assert!(RunLog::parse_csv("update,foo\n", "x").is_err());
        let log = RunLog::parse_csv(&format!("{RUN_LOG_HEADER}\n"), "x").unwrap();
        assert!(log.records.is_empty());
        let err = RunLog::parse_csv(&format!("{RUN_LOG_HEADER}\n0,1,2,3\n"), "x").unwrap_err();
        assert!(err.to_string().contains("x:2"), "{err}");
    }

    #[test]
    fn best_raw_by_is_a_running_max() {
        let rec = |update, raw| UpdateRecord {
            update,
            max_eff_fitness: 0.0,
            mean_eff_fitness: 0.0,
            max_raw_fitness: raw,
            mean_genome_len: 1000.0,
        };
        let log = RunLog {
            records: vec![rec(0, 0.5), rec(1, 0.7), rec(2, 0.6)],
        };
        assert_eq!(log.best_raw_by(0), 0.5);
        assert_eq!(log.best_raw_by(2), 0.7);
    }

    proptest! {
        #[test]
        fn csv_round_trips_exactly(rows in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 1000.0f64..40000.0), 0..20)) {
            let log = RunLog {
                records: rows.iter().enumerate().map(|(i, &(a, b, c, d))| UpdateRecord {
                    update: i,
                    max_eff_fitness: a,
                    mean_eff_fitness: b,
                    max_raw_fitness: c,
                    mean_genome_len: d,
                }).collect(),
            };
            prop_assert_eq!(RunLog::parse_csv(&log.to_csv(), "t").unwrap(), log);
        }
    }
}
