//! `<genome>.meta` sidecars and lattice resolution for genome-consuming
//! commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{format_dims, parse_dims};
use crate::ca::{Lattice, Topology, NEIGHBOR_ORDER};
use crate::error::{Error, Result};
use crate::genome::GenomeFile;

/// Ordered `key=value` pairs written next to a genome file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenomeMeta {
    pub entries: BTreeMap<String, String>,
}

impl GenomeMeta {
    pub fn for_lattice(lattice: &Lattice) -> Self {
        let mut m = GenomeMeta::default();
        if let Some(t) = canonical(lattice) {
            m.insert("topology", t);
        }
        m.insert("dims", format_dims(lattice.dims()));
        m.insert("radius", lattice.radius());
        m.insert("neighbor_order", NEIGHBOR_ORDER);
        m.insert("total_states", lattice.layout().total());
        m.insert("tool", super::tool_version());
        m
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn path_for(genome: &Path) -> PathBuf {
        let mut name = genome.as_os_str().to_os_string();
        name.push(".meta");
        PathBuf::from(name)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# sasoca genome metadata\n");
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut m = GenomeMeta::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, format!("expected `key=value`, found `{line}`")))?;
            m.insert(k.trim(), v.trim());
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn lattice(&self, origin: &str) -> Result<Option<Lattice>> {
        if let Some(order) = self.get("neighbor_order") {
            if order != NEIGHBOR_ORDER {
                return Err(Error::Data(format!(
                    "{origin}: genome was evolved with neighbor order `{order}`, this build uses `{NEIGHBOR_ORDER}`"
                )));
            }
        }
        let dims = match self.get("dims") {
            Some(d) => parse_dims(d).map_err(|e| Error::Data(format!("{origin}: {e}")))?,
            None => return Ok(None),
        };
        let radius = self
            .get("radius")
            .and_then(|r| r.parse().ok())
            .ok_or_else(|| Error::Data(format!("{origin}: `dims` given without a valid `radius`")))?;
        Lattice::new(&dims, radius)
            .map(Some)
            .map_err(|e| Error::Data(format!("{origin}: {e}")))
    }
}

fn canonical(lattice: &Lattice) -> Option<Topology> {
    [Topology::D1, Topology::D2, Topology::D3]
        .into_iter()
        .find(|t| t.dims() == lattice.dims() && t.radius() == lattice.radius())
}

/// Human-readable lattice name: `1d (35, r=2)` or `dims 9x9, r=1`.
pub fn describe(lattice: &Lattice) -> String {
    match canonical(lattice) {
        Some(t) => format!("{t} ({}, r={})", format_dims(lattice.dims()), lattice.radius()),
        None => format!("dims {}, r={}", format_dims(lattice.dims()), lattice.radius()),
    }
}

/// A genome file plus the lattice it runs on.
#[derive(Debug, Clone)]
pub struct LoadedGenome {
    pub file: GenomeFile,
    pub lattice: Lattice,
    pub meta: Option<GenomeMeta>,
}

/// Reads `path` and settles its lattice: an explicit request wins, then the
/// sidecar, then the canonical topology with a matching state count. Any
/// disagreement is a data error naming both sides.
pub fn load_genome(path: &Path, requested: Option<Lattice>) -> Result<LoadedGenome> {
    let file = GenomeFile::read(path)?;
    let meta_path = GenomeMeta::path_for(path);
    let meta = if meta_path.exists() {
        Some(GenomeMeta::read(&meta_path)?)
    } else {
        None
    };
    let origin = meta_path.display().to_string();
    let from_meta = match &meta {
        Some(m) => m.lattice(&origin)?,
        None => None,
    };
    let lattice = match (requested, from_meta) {
        (Some(req), Some(recorded)) => {
            if req.dims() != recorded.dims() || req.radius() != recorded.radius() {
                return Err(Error::Data(format!(
                    "genome {} was evolved on {} but {} was requested",
                    path.display(),
                    describe(&recorded),
                    describe(&req)
                )));
            }
            req
        }
        (Some(req), None) => req,
        (None, Some(recorded)) => recorded,
        (None, None) => Topology::from_total_states(file.total_states)
            .map(|t| t.lattice())
            .ok_or_else(|| {
                Error::Data(format!(
                    "genome {} has total_states={}, which matches no standard topology; pass --topology or --dims/--radius",
                    path.display(),
                    file.total_states
                ))
            })?,
    };
    let need = lattice.layout().total();
    if file.total_states != need {
        let evolved_on = Topology::from_total_states(file.total_states)
            .map(|t| format!(" ({t})"))
            .unwrap_or_default();
        return Err(Error::Data(format!(
            "genome {} has total_states={}{evolved_on} but lattice {} needs {need} state variables",
            path.display(),
            file.total_states,
            describe(&lattice)
        )));
    }
    Ok(LoadedGenome { file, lattice, meta })
}
