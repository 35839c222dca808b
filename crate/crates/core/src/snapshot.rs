//! Binary snapshot files.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "MFUQSNAP" | version u32 | N_h u32 | count u32 | nx u32 | ny u32 | spacing f64
//! generator seed u64 | solver tag (u32 length + UTF-8) | physical dim u32 | network dim u32
//! count x [ id u64 | stream seed u64 | stream label | physical f64s | network f64s | field f64s ]
//! ```

use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{FieldSolution, Grid, ParameterSample, Provenance, Snapshot, SnapshotSet};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"MFUQSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;

pub(crate) struct BinWriter<W: Write> {
    inner: W,
    path: PathBuf,
}

impl<W: Write> BinWriter<W> {
    pub(crate) fn new(inner: W, path: &Path) -> Self {
        Self {
            inner,
            path: path.to_path_buf(),
        }
    }

    pub(crate) fn bytes(&mut self, b: &[u8]) -> Result<()> {
        self.inner.write_all(b).map_err(|e| Error::io(&self.path, e))
    }

    pub(crate) fn u32(&mut self, v: u32) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    pub(crate) fn u64(&mut self, v: u64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    pub(crate) fn f64(&mut self, v: f64) -> Result<()> {
        self.bytes(&v.to_le_bytes())
    }

    pub(crate) fn f64s(&mut self, v: &[f64]) -> Result<()> {
        for x in v {
            self.f64(*x)?;
        }
        Ok(())
    }

    pub(crate) fn string(&mut self, s: &str) -> Result<()> {
        self.u32(s.len() as u32)?;
        self.bytes(s.as_bytes())
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub(crate) struct BinReader<R: Read> {
    inner: R,
    path: PathBuf,
}

impl<R: Read> BinReader<R> {
    pub(crate) fn new(inner: R, path: &Path) -> Self {
        Self {
            inner,
            path: path.to_path_buf(),
        }
    }

    pub(crate) fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::Corrupt {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.inner.read_exact(buf).map_err(|e| {
            if e.kind() == ErrorKind::UnexpectedEof {
                self.corrupt("unexpected end of file")
            } else {
                Error::io(&self.path, e)
            }
        })
    }

    pub(crate) fn magic(&mut self, expected: &[u8; 8]) -> Result<()> {
        let mut m = [0u8; 8];
        self.fill(&mut m)?;
        if &m != expected {
            return Err(self.corrupt(format!("bad magic {:?}", String::from_utf8_lossy(&m))));
        }
        Ok(())
    }

    pub(crate) fn version(&mut self, expected: u32) -> Result<()> {
        let found = self.u32()?;
        if found != expected {
            return Err(Error::FormatVersion { found, expected });
        }
        Ok(())
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        // grow as data arrives so a corrupt length cannot force a huge allocation
        let mut out = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }

    pub(crate) fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let mut buf = Vec::with_capacity(len.min(1 << 16));
        let mut chunk = [0u8; 4096];
        let mut left = len;
        while left > 0 {
            let take = left.min(chunk.len());
            self.fill(&mut chunk[..take])?;
            buf.extend_from_slice(&chunk[..take]);
            left -= take;
        }
        String::from_utf8(buf).map_err(|_| self.corrupt("string is not UTF-8"))
    }
}

pub fn snapshot_store_write(set: &SnapshotSet, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BinWriter::new(BufWriter::new(file), path);
    let grid = set.grid().unwrap_or(Grid::new(0, 0, 0.0));
    let (pd, nd) = set
        .records()
        .first()
        .map_or((0, 0), |r| (r.sample.physical.len(), r.sample.network_params.len()));
    w.bytes(SNAPSHOT_MAGIC)?;
    w.u32(SNAPSHOT_VERSION)?;
    w.u32(grid.len() as u32)?;
    w.u32(set.len() as u32)?;
    w.u32(grid.nx as u32)?;
    w.u32(grid.ny as u32)?;
    w.f64(grid.spacing)?;
    w.u64(set.provenance.generator_seed)?;
    w.string(&set.provenance.solver_tag)?;
    w.u32(pd as u32)?;
    w.u32(nd as u32)?;
    for r in set.records() {
        w.u64(r.sample.id)?;
        w.u64(r.sample.stream_seed)?;
        w.string(&r.sample.stream_label)?;
        w.f64s(&r.sample.physical)?;
        w.f64s(&r.sample.network_params)?;
        w.f64s(&r.field.values)?;
    }
    w.finish()
}

/// Reads a snapshot file. Runtime handles such as vascular layouts are not
/// stored; restore them with [`crate::model::ForwardModel::rehydrate`].
pub fn snapshot_store_read(path: &Path) -> Result<SnapshotSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BinReader::new(BufReader::new(file), path);
    r.magic(SNAPSHOT_MAGIC)?;
    r.version(SNAPSHOT_VERSION)?;
    let n_h = r.u32()? as usize;
    let count = r.u32()? as usize;
    let nx = r.u32()? as usize;
    let ny = r.u32()? as usize;
    let spacing = r.f64()?;
    if nx * ny != n_h {
        return Err(r.corrupt(format!("grid {nx}x{ny} does not hold {n_h} values")));
    }
    let grid = Grid::new(nx, ny, spacing);
    let provenance = Provenance {
        generator_seed: r.u64()?,
        solver_tag: r.string()?,
    };
    let pd = r.u32()? as usize;
    let nd = r.u32()? as usize;
    let mut set = SnapshotSet::new(provenance);
    for _ in 0..count {
        let id = r.u64()?;
        let stream_seed = r.u64()?;
        let stream_label = r.string()?;
        let physical = r.f64s(pd)?;
        let network_params = r.f64s(nd)?;
        let values = r.f64s(n_h)?;
        let sample = ParameterSample {
            id,
            physical,
            network_params,
            stream_seed,
            stream_label,
            network: None,
        };
        let field = FieldSolution::new(values, grid).map_err(|e| r.corrupt(e.to_string()))?;
        set.push(Snapshot { sample, field })
            .map_err(|e| r.corrupt(e.to_string()))?;
    }
    let mut extra = [0u8; 1];
    if r.inner.read(&mut extra).map_err(|e| Error::io(path, e))? != 0 {
        return Err(r.corrupt("trailing bytes after last record"));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngStream;

    fn set(count: usize) -> SnapshotSet {
        let grid = Grid::square(6, 1.0);
        let mut rng = RngStream::new(4, "snap");
        let mut s = SnapshotSet::new(Provenance {
            generator_seed: 99,
            solver_tag: "test/1".into(),
        });
        for i in 0..count {
            let mut mu = ParameterSample::new(i as u64 * 2 + 1, vec![rng.uniform(), rng.uniform(), rng.uniform()], &rng.child(i));
            mu.network_params = vec![rng.uniform(), rng.uniform()];
            let values = (0..grid.len()).map(|_| rng.standard_normal()).collect();
            s.push(Snapshot {
                sample: mu,
                field: FieldSolution::new(values, grid).unwrap(),
            })
            .unwrap();
        }
        s
    }

    #[test]
    fn empty_set_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.snap");
        let s = set(0);
        snapshot_store_write(&s, &p).unwrap();
        assert_eq!(snapshot_store_read(&p).unwrap(), s);
    }

    #[test]
    fn large_set_round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("big.snap");
        let s = set(300);
        snapshot_store_write(&s, &p).unwrap();
        let back = snapshot_store_read(&p).unwrap();
        for (a, b) in s.records().iter().zip(back.records()) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.field.values), bits(&b.field.values));
        }
        assert_eq!(back, s);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cut.snap");
        snapshot_store_write(&set(5), &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        for cut in [3, 10, 40, bytes.len() - 1] {
            std::fs::write(&p, &bytes[..cut]).unwrap();
            assert!(matches!(snapshot_store_read(&p), Err(Error::Corrupt { .. })), "cut {cut}");
        }
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.snap");
        snapshot_store_write(&set(1), &p).unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
        std::fs::write(&p, &bytes).unwrap();
        assert!(matches!(
            snapshot_store_read(&p),
            Err(Error::FormatVersion { found: 7, expected: 1 })
        ));
    }

    #[test]
    fn missing_file_carries_path() {
        let err = snapshot_store_read(Path::new("/nonexistent/x.snap")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.snap"));
    }
}
