//! Memory banks of normal patch features and their local densities.
//!
//! Bank files reuse the tensor format: an `N x D` record, optionally
//! followed by a `u32` little-endian `k_used` and a length-`N` density record.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::PatchFeatureSet;
use crate::neighbors::k_nearest;
use crate::tensor_io::{read_raw, with_path, write_raw, RawTensor};

/// `N` normal patch vectors of width `dim`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryBank {
    dim: usize,
    data: Vec<f32>,
}

impl MemoryBank {
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("bank dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::Empty("memory bank has no entries".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Dimension(format!(
                "{} values do not split into rows of {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite bank value".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    /// A new bank holding the given rows in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Parameter(format!(
                    "row index {i} out of range for bank of {}",
                    self.len()
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(self.dim, data)
    }

    pub(crate) fn check_query(&self, f: &[f32]) -> Result<()> {
        if f.len() != self.dim {
            return Err(Error::Dimension(format!(
                "query has {} dims, bank has {}",
                f.len(),
                self.dim
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite query value".into()));
        }
        Ok(())
    }

    fn to_raw(&self) -> RawTensor {
        RawTensor::new(vec![self.len(), self.dim], self.data.clone())
            .expect("bank invariants imply a valid tensor")
    }
}

/// Concatenates patch sets image-major, row-major within an image.
pub fn build_memory_bank<'a, I>(sets: I) -> Result<MemoryBank>
where
    I: IntoIterator<Item = &'a PatchFeatureSet>,
{
    let mut dim = None;
    let mut data = Vec::new();
    for (i, set) in sets.into_iter().enumerate() {
        match dim {
            None => dim = Some(set.dim()),
            Some(d) if d != set.dim() => {
                return Err(Error::Dimension(format!(
                    "patch set {i} has dim {}, expected {d}",
                    set.dim()
                )))
            }
            Some(_) => {}
        }
        data.extend_from_slice(set.data());
    }
    let dim = dim.ok_or_else(|| Error::Empty("no patch sets supplied".into()))?;
    MemoryBank::new(dim, data)
}

/// A bank whose entries carry the mean distance to their `k_used` nearest
/// other entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDensityBank {
    bank: MemoryBank,
    densities: Vec<f32>,
    k_used: usize,
}

impl LocalDensityBank {
    pub fn new(bank: MemoryBank, densities: Vec<f32>, k_used: usize) -> Result<Self> {
        if densities.len() != bank.len() {
            return Err(Error::Consistency(format!(
                "{} densities for a bank of {} entries",
                densities.len(),
                bank.len()
            )));
        }
        if let Some(i) = densities.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Consistency(format!(
                "density {i} is negative or non-finite"
            )));
        }
        if k_used == 0 || k_used >= bank.len() {
            return Err(Error::Consistency(format!(
                "k_used {k_used} outside 1..{}",
                bank.len()
            )));
        }
        Ok(Self {
            bank,
            densities,
            k_used,
        })
    }

    pub fn bank(&self) -> &MemoryBank {
        &self.bank
    }

    pub fn densities(&self) -> &[f32] {
        &self.densities
    }

    pub fn density(&self, i: usize) -> f32 {
        self.densities[i]
    }

    pub fn k_used(&self) -> usize {
        self.k_used
    }

    pub fn len(&self) -> usize {
        self.bank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bank.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bank.dim()
    }

    pub fn into_parts(self) -> (MemoryBank, Vec<f32>, usize) {
        (self.bank, self.densities, self.k_used)
    }
}

/// Mean distance from every entry to its `k` nearest other entries.
///
/// The entry itself is skipped by index; duplicates of it still count.
pub fn learn_local_density(bank: &MemoryBank, k: usize) -> Result<LocalDensityBank> {
    let n = bank.len();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "K must satisfy 1 <= K <= N-1 (N = {n}), got {k}"
        )));
    }
    let dim = bank.dim();
    let densities: Vec<f32> = (0..n)
        .into_par_iter()
        .map(|i| {
            let hits = k_nearest(bank.row(i), bank.data(), dim, k, Some(i));
            (hits.iter().map(|h| h.distance).sum::<f64>() / k as f64) as f32
        })
        .collect();
    LocalDensityBank::new(bank.clone(), densities, k)
}

pub fn save_memory_bank<W: Write>(bank: &MemoryBank, sink: &mut W) -> Result<()> {
    write_raw(&bank.to_raw(), sink)
}

pub fn save_bank<W: Write>(b: &LocalDensityBank, sink: &mut W) -> Result<()> {
    save_memory_bank(&b.bank, sink)?;
    sink.write_all(&(b.k_used as u32).to_le_bytes())
        .map_err(|e| Error::io("<stream>", e))?;
    let dens = RawTensor::new(vec![b.densities.len()], b.densities.clone())?;
    write_raw(&dens, sink)
}

fn bank_from_raw(raw: RawTensor) -> Result<MemoryBank> {
    match *raw.dims() {
        [_, d] => MemoryBank::new(d, raw.into_parts().1),
        ref dims => Err(Error::Dimension(format!(
            "expected an N x D bank tensor, found {dims:?}"
        ))),
    }
}

/// Reads a bank file, returning its densities and `k_used` when present.
pub fn load_bank_any<R: Read>(source: &mut R) -> Result<(MemoryBank, Option<(Vec<f32>, usize)>)> {
    let bank = bank_from_raw(read_raw(source)?)?;
    let mut k_buf = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match source.read(&mut k_buf[got..]) {
            Ok(0) => break,
            Ok(n) => got += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(Error::io("<stream>", e)),
        }
    }
    match got {
        0 => return Ok((bank, None)),
        4 => {}
        _ => return Err(Error::Format("truncated density metadata".into())),
    }
    let k_used = u32::from_le_bytes(k_buf) as usize;
    let dens = read_raw(source)?;
    if dens.dims().len() != 1 {
        return Err(Error::Consistency(format!(
            "density record must be 1-d, found {:?}",
            dens.dims()
        )));
    }
    Ok((bank, Some((dens.into_parts().1, k_used))))
}

pub fn load_memory_bank<R: Read>(source: &mut R) -> Result<MemoryBank> {
    bank_from_raw(read_raw(source)?)
}

pub fn load_bank<R: Read>(source: &mut R) -> Result<LocalDensityBank> {
    match load_bank_any(source)? {
        (bank, Some((densities, k))) => LocalDensityBank::new(bank, densities, k),
        (_, None) => Err(Error::Consistency(
            "bank file carries no local densities".into(),
        )),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn save_memory_bank_file(bank: &MemoryBank, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut sink = create(path)?;
    with_path(path, save_memory_bank(bank, &mut sink))?;
    sink.flush().map_err(|e| Error::io(path, e))
}

pub fn save_bank_file(b: &LocalDensityBank, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut sink = create(path)?;
    with_path(path, save_bank(b, &mut sink))?;
    sink.flush().map_err(|e| Error::io(path, e))
}

pub fn load_bank_any_file(
    path: impl AsRef<Path>,
) -> Result<(MemoryBank, Option<(Vec<f32>, usize)>)> {
    let path = path.as_ref();
    with_path(path, load_bank_any(&mut open(path)?))
}

pub fn load_memory_bank_file(path: impl AsRef<Path>) -> Result<MemoryBank> {
    let path = path.as_ref();
    with_path(path, load_memory_bank(&mut open(path)?))
}

pub fn load_bank_file(path: impl AsRef<Path>) -> Result<LocalDensityBank> {
    let path = path.as_ref();
    with_path(path, load_bank(&mut open(path)?))
}
