//! Tree and sample file formats, and all-or-nothing output directories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use besov_robust::points::PointSet;
use besov_robust::tree::{CoefficientTree, Provenance};
use besov_robust::wavelet::{FamilyKind, WaveletIndex};
use serde::{Deserialize, Serialize};

use crate::error::{config_error, io_error, CliError};

pub const TREE_FORMAT: &str = "besov-robust-tree";
pub const TREE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TreeHeader {
    format: String,
    version: u32,
    family: FamilyKind,
    dim: usize,
    j_max: u32,
    provenance: Provenance,
    nnz: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeEntry {
    level: i32,
    k: Vec<u64>,
    orientation: u32,
    value: f64,
}

/// JSON lines: one header object, then one object per stored coefficient.
pub fn tree_to_jsonl(tree: &CoefficientTree) -> String {
    let header = TreeHeader {
        format: TREE_FORMAT.into(),
        version: TREE_FORMAT_VERSION,
        family: tree.family(),
        dim: tree.dim(),
        j_max: tree.j_max(),
        provenance: tree.provenance(),
        nnz: tree.nnz(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for (idx, value) in tree.entries() {
        let e = TreeEntry { level: idx.level, k: idx.k, orientation: idx.orientation, value };
        out.push_str(&serde_json::to_string(&e).expect("entry serializes"));
        out.push('\n');
    }
    out
}

pub fn tree_from_jsonl(text: &str) -> Result<CoefficientTree, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| config_error("empty tree file"))?;
    let header: TreeHeader = serde_json::from_str(first).map_err(|e| config_error(format!("tree header: {e}")))?;
    if header.format != TREE_FORMAT || header.version != TREE_FORMAT_VERSION {
        return Err(config_error(format!("unsupported tree format {} v{}", header.format, header.version)));
    }
    let mut entries = Vec::with_capacity(header.nnz);
    for (i, line) in lines.enumerate() {
        let e: TreeEntry =
            serde_json::from_str(line).map_err(|err| config_error(format!("tree entry {}: {err}", i + 1)))?;
        entries.push((WaveletIndex { level: e.level, k: e.k, orientation: e.orientation }, e.value));
    }
    if entries.len() != header.nnz {
        return Err(config_error(format!("tree header declares {} entries, found {}", header.nnz, entries.len())));
    }
    Ok(CoefficientTree::from_entries(header.family, header.dim, header.j_max, header.provenance, entries)?)
}

/// Headerless CSV, one point per row.
pub fn read_points(path: &Path, dim: usize) -> Result<PointSet, CliError> {
    let file = fs::File::open(path).map_err(|e| io_error(&path.display().to_string(), e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut flat = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        if rec.len() != dim {
            return Err(config_error(format!("{} row {}: expected {dim} columns, got {}", path.display(), i + 1, rec.len())));
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| config_error(format!("{} row {}: '{field}' is not a number", path.display(), i + 1)))?;
            flat.push(v);
        }
    }
    Ok(PointSet::from_flat(dim, flat)?)
}

pub fn points_to_csv(points: &PointSet) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for p in points.iter() {
        w.write_record(p.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Files collected in memory and written together, so a failed run leaves nothing behind.
#[derive(Debug, Default, Clone)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every file to a temporary name, then renames them into place.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_error(&dir.display().to_string(), e))?;
        let mut staged = Vec::new();
        for (name, bytes) in &self.files {
            let tmp = dir.join(format!(".{name}.partial"));
            let res = fs::File::create(&tmp).and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()));
            if let Err(e) = res {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(io_error(&tmp.display().to_string(), e));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut done = Vec::new();
        for (tmp, dest) in staged {
            fs::rename(&tmp, &dest).map_err(|e| io_error(&dest.display().to_string(), e))?;
            done.push(dest);
        }
        Ok(done)
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(&path.display().to_string(), e))
}
