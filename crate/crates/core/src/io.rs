//! Binary field snapshots and the CSV exports.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{IpmError, Result};
use crate::spectral::{Domain, DomainKind, ScalarField};
use crate::tracking::MarkerCurve;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"IPMS";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNAPSHOT_HEADER_LEN: usize = 25;

fn domain_tag(kind: DomainKind) -> u8 {
    match kind {
        DomainKind::Torus => 0,
        DomainKind::Strip => 1,
    }
}

pub fn encode_snapshot(field: &ScalarField, t: f64) -> Vec<u8> {
    let d = field.domain();
    let mut buf = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * d.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.push(domain_tag(d.kind()));
    buf.extend_from_slice(&(d.nx() as u32).to_le_bytes());
    buf.extend_from_slice(&(d.ny() as u32).to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

/// Parse a snapshot. Strip snapshots get the default mode count for their `ny`.
pub fn decode_snapshot(bytes: &[u8]) -> Result<(ScalarField, f64)> {
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(IpmError::Snapshot(format!(
            "truncated header: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[0..4] != SNAPSHOT_MAGIC {
        return Err(IpmError::Snapshot("bad magic bytes".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != SNAPSHOT_VERSION {
        return Err(IpmError::Snapshot(format!(
            "unsupported version {version} (expected {SNAPSHOT_VERSION})"
        )));
    }
    let (nx, ny) = (u32_at(9) as usize, u32_at(13) as usize);
    let domain = match bytes[8] {
        0 => Domain::torus(nx, ny)?,
        1 => Domain::strip(nx, ny)?,
        tag => return Err(IpmError::Snapshot(format!("unknown domain tag {tag}"))),
    };
    let t = f64::from_le_bytes(bytes[17..25].try_into().unwrap());
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if body.len() != 8 * nx * ny {
        return Err(IpmError::Snapshot(format!(
            "expected {} value bytes for {nx}x{ny}, got {}",
            8 * nx * ny,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((ScalarField::new(domain, values)?, t))
}

/// Parse a snapshot and require the given domain kind.
pub fn decode_snapshot_as(bytes: &[u8], kind: DomainKind) -> Result<(ScalarField, f64)> {
    if bytes.len() >= 9 && &bytes[0..4] == SNAPSHOT_MAGIC && bytes[8] != domain_tag(kind) {
        return Err(IpmError::Snapshot(format!(
            "domain tag {} does not denote a {} field",
            bytes[8],
            kind.name()
        )));
    }
    decode_snapshot(bytes)
}

pub fn write_snapshot(path: impl AsRef<Path>, field: &ScalarField, t: f64) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(&encode_snapshot(field, t))?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<(ScalarField, f64)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_snapshot(&bytes)
}

pub fn read_snapshot_as(path: impl AsRef<Path>, kind: DomainKind) -> Result<(ScalarField, f64)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_snapshot_as(&bytes, kind)
}

/// Snapshot file name of sample `index`.
pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:05}.ipms")
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn series_header(requested_s: &[f64]) -> String {
    let mut s: Vec<f64> = requested_s.to_vec();
    s.sort_by(f64::total_cmp);
    let mut cols = vec!["t".to_string(), "E".into(), "delta".into(), "l2".into()];
    for v in &s {
        cols.push(format!("hs_rho_{v}"));
        cols.push(format!("hs_drho_{v}"));
    }
    cols.extend(["grad_sup_rho".into(), "grad_sup_u".into(), "tail_fraction".into()]);
    cols.join(",")
}

pub fn series_row(r: &DiagnosticsRecord) -> String {
    let mut cols = vec![num(r.t), num(r.energy), num(r.delta), num(r.l2)];
    for e in &r.hs {
        cols.push(num(e.rho));
        cols.push(num(e.drho));
    }
    cols.extend([num(r.grad_sup_rho), num(r.grad_sup_u), num(r.tail_fraction)]);
    cols.join(",")
}

/// Line-buffered series writer (one row per sample, flushed as it goes).
pub struct SeriesWriter {
    out: BufWriter<File>,
}

impl SeriesWriter {
    pub fn create(path: impl AsRef<Path>, requested_s: &[f64]) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", series_header(requested_s))?;
        Ok(SeriesWriter { out })
    }

    pub fn push(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        writeln!(self.out, "{}", series_row(r))?;
        self.out.flush()?;
        Ok(())
    }
}

/// Parsed `series.csv`: header and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_series(path: impl AsRef<Path>) -> Result<SeriesTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| IpmError::InvalidArgument("empty series file".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| IpmError::InvalidArgument(format!("series row {}: {e}", i + 2)))?;
        if row.len() != columns.len() {
            return Err(IpmError::DimensionMismatch {
                expected: columns.len(),
                got: row.len(),
            });
        }
        rows.push(row);
    }
    Ok(SeriesTable { columns, rows })
}

pub const CURVES_HEADER: &str = "t,curve,marker,x1,x2";

pub fn write_curves_rows(out: &mut impl Write, t: f64, curves: &[MarkerCurve]) -> Result<()> {
    for (c, curve) in curves.iter().enumerate() {
        for (m, p) in curve.points().iter().enumerate() {
            writeln!(out, "{},{c},{m},{},{}", num(t), num(p.0), num(p.1))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_25_bytes() {
        let d = Domain::torus(8, 8).unwrap();
        let f = ScalarField::zeros(d);
        assert_eq!(encode_snapshot(&f, 0.0).len(), SNAPSHOT_HEADER_LEN + 8 * 64);
        assert_eq!(SNAPSHOT_HEADER_LEN, 4 + 4 + 1 + 4 + 4 + 8);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let d = Domain::strip(8, 9).unwrap();
        let f = ScalarField::from_fn(d, |x, y| (3.0 * x).sin() / 7.0 + y.exp());
        let (g, t) = decode_snapshot(&encode_snapshot(&f, 0.1)).unwrap();
        assert_eq!(t.to_bits(), 0.1f64.to_bits());
        assert_eq!(g.domain().kind(), DomainKind::Strip);
        for (a, b) in f.values().iter().zip(g.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn torus_read_as_strip_fails() {
        let d = Domain::torus(8, 8).unwrap();
        let bytes = encode_snapshot(&ScalarField::zeros(d), 0.0);
        assert!(decode_snapshot_as(&bytes, DomainKind::Torus).is_ok());
        assert!(matches!(
            decode_snapshot_as(&bytes, DomainKind::Strip),
            Err(IpmError::Snapshot(_))
        ));
    }

    #[test]
    fn corrupt_headers() {
        let d = Domain::torus(8, 8).unwrap();
        let bytes = encode_snapshot(&ScalarField::zeros(d), 0.0);
        assert!(decode_snapshot(&bytes[..20]).is_err());
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut b = bytes.clone();
        b[0] = b'X';
        assert!(decode_snapshot(&b).is_err());
        let mut b = bytes;
        b[4] = 9;
        assert!(decode_snapshot(&b).is_err());
    }

    #[test]
    fn series_header_sorts_exponents() {
        assert_eq!(
            series_header(&[2.0, 0.5]),
            "t,E,delta,l2,hs_rho_0.5,hs_drho_0.5,hs_rho_2,hs_drho_2,grad_sup_rho,grad_sup_u,tail_fraction"
        );
    }
}
