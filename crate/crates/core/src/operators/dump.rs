//! CSV dumps: one header line `# n=<n> N=<N> provenance=<tag>`, then one row
//! per matrix row with interleaved real and imaginary parts.

use super::{Provenance, TruncatedOperator};
use crate::error::{Error, Result};
use crate::scalar::*;
use std::io::{BufRead, Write};

pub fn write_csv<T: Real, W: Write>(op: &TruncatedOperator<T>, mut out: W) -> Result<()> {
    writeln!(out, "# n={} N={} provenance={}", op.n(), op.len(), op.provenance().tag())?;
    let d = op.dim();
    let mut line = String::new();
    for i in 0..d {
        line.clear();
        for j in 0..d {
            let z = op.data()[(i, j)];
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:e},{:e}", z.re, z.im));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn header_field<'a>(parts: &[&'a str], key: &str) -> Result<&'a str> {
    parts
        .iter()
        .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("header is missing `{key}=`")))
}

pub fn read_csv<T: Real, R: BufRead>(input: R) -> Result<TruncatedOperator<T>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dump".into()))??;
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("dump must start with a `#` header".into()))?;
    let parts: Vec<&str> = body.split_whitespace().collect();
    let n: usize = header_field(&parts, "n")?
        .parse()
        .map_err(|_| Error::Parse("bad n".into()))?;
    let len: usize = header_field(&parts, "N")?
        .parse()
        .map_err(|_| Error::Parse("bad N".into()))?;
    let tag = header_field(&parts, "provenance")?;
    let prov = Provenance::from_tag(tag).ok_or_else(|| Error::Parse(format!("unknown provenance `{tag}`")))?;
    let d = n * len;
    let mut data = zeros::<T>(d, d);
    let mut row = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if row >= d {
            return Err(Error::Parse("too many rows".into()));
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if vals.len() != 2 * d {
            return Err(Error::Parse(format!("row {row} has {} values, expected {}", vals.len(), 2 * d)));
        }
        for j in 0..d {
            data[(row, j)] = cx(vals[2 * j], vals[2 * j + 1]);
        }
        row += 1;
    }
    if row != d {
        return Err(Error::Parse(format!("expected {d} rows, found {row}")));
    }
    TruncatedOperator::from_matrix(n, len, data, prov)
}
