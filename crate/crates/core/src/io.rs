//! Matrix Market coordinate files for [`SparseSymMatrix`] and plain-text /
//! binary vector dumps. Floats are written with Rust's shortest round-trip
//! formatting, so a write/read cycle reproduces values bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::sparse::SparseSymMatrix;
use crate::vector::ComplexVector;
use crate::{Error, Result};

/// Write the lower triangle as `matrix coordinate real symmetric`.
pub fn write_matrix_market(a: &SparseSymMatrix, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let n = a.order();
    let mut lower = 0usize;
    for i in 0..n {
        lower += a.row(i).filter(|&(j, _)| j <= i).count();
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", n, n, lower)?;
    for i in 0..n {
        for (j, v) in a.row(i) {
            if j <= i {
                writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

/// Read a coordinate-format Matrix Market file. Symmetric storage is
/// expanded to the full pattern; general storage must already be symmetric
/// or the construction fails.
pub fn read_matrix_market(path: &Path) -> Result<SparseSymMatrix> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedFile("empty file".into()))??;
    let lower = header.to_ascii_lowercase();
    let fields: Vec<&str> = lower.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::MalformedFile(format!("bad header: {header}")));
    }
    if fields[2] != "coordinate" || fields[3] != "real" {
        return Err(Error::MalformedFile(format!(
            "unsupported format: {header}"
        )));
    }
    let symmetric = match fields[4] {
        "symmetric" => true,
        "general" => false,
        other => {
            return Err(Error::MalformedFile(format!(
                "unsupported qualifier: {other}"
            )))
        }
    };
    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::MalformedFile("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::MalformedFile(size_line.clone())))
        .collect::<Result<_>>()?;
    if dims.len() != 3 || dims[0] != dims[1] {
        return Err(Error::MalformedFile(format!("bad size line: {size_line}")));
    }
    let (n, nnz) = (dims[0], dims[2]);
    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::MalformedFile(format!("bad entry: {line}")));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| Error::MalformedFile(line.clone()))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| Error::MalformedFile(line.clone()))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| Error::MalformedFile(line.clone()))?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::MalformedFile(format!("index out of range: {line}")));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::MalformedFile(format!(
            "expected {nnz} entries, found {seen}"
        )));
    }
    SparseSymMatrix::from_triplets(n, &triplets)
}

/// Text dump of a real vector: a `n` header line, then one entry per line.
pub fn write_real_vector_text(v: &[f64], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", v.len())?;
    for x in v {
        writeln!(w, "{}", x)?;
    }
    Ok(())
}

pub fn read_real_vector_text(path: &Path) -> Result<Vec<f64>> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let n: usize = parse_header(&mut lines)?;
    let mut v = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        v.push(
            line.trim()
                .parse()
                .map_err(|_| Error::MalformedFile(line.clone()))?,
        );
    }
    if v.len() != n {
        return Err(Error::MalformedFile(format!(
            "expected {n} entries, found {}",
            v.len()
        )));
    }
    Ok(v)
}

/// Text dump of a complex vector: a `n` header line, then `re im` per line.
pub fn write_complex_vector_text(v: &ComplexVector, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", v.len())?;
    for i in 0..v.len() {
        writeln!(w, "{} {}", v.re[i], v.im[i])?;
    }
    Ok(())
}

pub fn read_complex_vector_text(path: &Path) -> Result<ComplexVector> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let n: usize = parse_header(&mut lines)?;
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::MalformedFile(format!("bad entry: {line}")));
        }
        re.push(
            toks[0]
                .parse()
                .map_err(|_| Error::MalformedFile(line.clone()))?,
        );
        im.push(
            toks[1]
                .parse()
                .map_err(|_| Error::MalformedFile(line.clone()))?,
        );
    }
    if re.len() != n {
        return Err(Error::MalformedFile(format!(
            "expected {n} entries, found {}",
            re.len()
        )));
    }
    ComplexVector::new(re, im)
}

/// Binary dump: `n` as little-endian u64, then the entries as little-endian
/// f64 (interleaved `re, im` for complex vectors).
pub fn write_real_vector_bin(v: &[f64], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_real_vector_bin(path: &Path) -> Result<Vec<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    let n = read_u64(&mut r)? as usize;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(read_f64(&mut r)?);
    }
    Ok(v)
}

pub fn write_complex_vector_bin(v: &ComplexVector, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for i in 0..v.len() {
        w.write_all(&v.re[i].to_le_bytes())?;
        w.write_all(&v.im[i].to_le_bytes())?;
    }
    Ok(())
}

pub fn read_complex_vector_bin(path: &Path) -> Result<ComplexVector> {
    let mut r = BufReader::new(File::open(path)?);
    let n = read_u64(&mut r)? as usize;
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for _ in 0..n {
        re.push(read_f64(&mut r)?);
        im.push(read_f64(&mut r)?);
    }
    ComplexVector::new(re, im)
}

fn parse_header(lines: &mut std::io::Lines<BufReader<File>>) -> Result<usize> {
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedFile("empty vector file".into()))??;
    header
        .trim()
        .parse()
        .map_err(|_| Error::MalformedFile(format!("bad vector header: {header}")))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
