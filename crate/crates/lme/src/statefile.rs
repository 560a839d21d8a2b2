//! Line-oriented text format for state tensors.
//!
//! ```text
//! dims: 2x3x4
//! 1 1 1 0.5 0
//! 2 3 4 -0.5 0.25
//! ```
//!
//! The header names the factor dimensions; each remaining line holds one
//! nonzero coefficient as 1-based indices followed by the real and imaginary
//! parts. Values are written in Rust's shortest round-trip decimal form, so a
//! write/read cycle reproduces every `f64` bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::tensor::StateTensor;
use crate::{Error, Result};

pub fn write_state<W: Write>(s: &StateTensor, w: &mut W) -> Result<()> {
    let dims: Vec<String> = s.dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "dims: {}", dims.join("x"))?;
    let mut idx = vec![0usize; s.n_factors()];
    for &c in s.coeffs() {
        if c.re != 0.0 || c.im != 0.0 {
            for (k, &i) in idx.iter().enumerate() {
                if k > 0 {
                    write!(w, " ")?;
                }
                write!(w, "{}", i + 1)?;
            }
            writeln!(w, " {} {}", c.re, c.im)?;
        }
        // advance mixed-radix index, last fastest
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < s.dims()[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(())
}

pub fn read_state<R: BufRead>(r: R) -> Result<StateTensor> {
    let mut lines = r.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Parse("missing `dims:` header".into())),
        }
    };
    let rest = header
        .trim()
        .strip_prefix("dims:")
        .ok_or_else(|| Error::Parse(format!("expected `dims:` header, got `{header}`")))?;
    let dims: Vec<usize> = rest
        .trim()
        .split('x')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad dimension `{tok}`")))
        })
        .collect::<Result<_>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Parse("dimensions must be positive".into()));
    }

    let n = dims.len();
    let total: usize = dims.iter().product();
    let mut coeffs = vec![C64::new(0.0, 0.0); total];
    let mut filled = vec![false; total];
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n + 2 {
            return Err(Error::Parse(format!(
                "expected {} fields, got {} in `{line}`",
                n + 2,
                toks.len()
            )));
        }
        let mut flat = 0usize;
        for (k, tok) in toks[..n].iter().enumerate() {
            let i: usize = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad index `{tok}`")))?;
            if i < 1 || i > dims[k] {
                return Err(Error::Parse(format!(
                    "index {i} out of range 1..={} in `{line}`",
                    dims[k]
                )));
            }
            flat = flat * dims[k] + (i - 1);
        }
        let re: f64 = toks[n]
            .parse()
            .map_err(|_| Error::Parse(format!("bad real part `{}`", toks[n])))?;
        let im: f64 = toks[n + 1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad imaginary part `{}`", toks[n + 1])))?;
        if filled[flat] {
            return Err(Error::Parse(format!("duplicate coefficient in `{line}`")));
        }
        filled[flat] = true;
        coeffs[flat] = C64::new(re, im);
    }
    StateTensor::new(dims, coeffs)
}

pub fn save(s: &StateTensor, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_state(s, &mut w)
}

pub fn load(path: &Path) -> Result<StateTensor> {
    read_state(BufReader::new(File::open(path)?))
}
