//! Raw waveform files: `f_s` (f64), sample count (u64), then the samples (f64),
//! all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_waveform<S: Scalar>(path: &Path, fs: S, samples: &[S]) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| io_err(path, e));
    put(&fs.as_f64().to_le_bytes())?;
    put(&(samples.len() as u64).to_le_bytes())?;
    for s in samples {
        put(&s.as_f64().to_le_bytes())?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_waveform(path: &Path) -> Result<(f64, Vec<f64>)> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut word = [0u8; 8];
    r.read_exact(&mut word).map_err(|e| io_err(path, e))?;
    let fs = f64::from_le_bytes(word);
    r.read_exact(&mut word).map_err(|e| io_err(path, e))?;
    let n = u64::from_le_bytes(word) as usize;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut word).map_err(|e| io_err(path, e))?;
        samples.push(f64::from_le_bytes(word));
    }
    Ok((fs, samples))
}
