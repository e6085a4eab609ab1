//! Plain-text actor files:
//!
//! ```text
//! riskctl-actor v1
//! layers 2 10 100 2
//! <one parameter per line, flat layout of `Mlp::params`>
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a save/load
//! cycle reproduces the network bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::mlp::Mlp;
use crate::{Error, Result};

pub const ACTOR_MAGIC: &str = "riskctl-actor v1";

pub fn write_actor<W: Write>(mlp: &Mlp, mut out: W) -> Result<()> {
    writeln!(out, "{ACTOR_MAGIC}")?;
    let sizes: Vec<String> = mlp.sizes().iter().map(usize::to_string).collect();
    writeln!(out, "layers {}", sizes.join(" "))?;
    for p in mlp.params() {
        writeln!(out, "{p:?}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_actor<R: BufRead>(input: R) -> Result<Mlp> {
    let mut lines = input.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, line)) => Ok((i + 1, line?)),
            None => Err(Error::Format(format!("unexpected end of file, expected {what}"))),
        }
    };
    let (_, magic) = next_line("header")?;
    if magic.trim_end() != ACTOR_MAGIC {
        return Err(Error::Format(format!("line 1: expected '{ACTOR_MAGIC}', found '{magic}'")));
    }
    let (_, layers) = next_line("layer sizes")?;
    let sizes = layers
        .strip_prefix("layers ")
        .ok_or_else(|| Error::Format("line 2: expected 'layers <sizes>'".into()))?
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|e| Error::Format(format!("line 2: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut net = Mlp::zeros(&sizes).map_err(|e| Error::Format(format!("line 2: {e}")))?;
    for slot in net.params_mut() {
        let (n, line) = next_line("parameter")?;
        *slot = line
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("line {n}: {e}")))?;
    }
    if let Ok((n, extra)) = next_line("") {
        if !extra.trim().is_empty() {
            return Err(Error::Format(format!("line {n}: trailing data")));
        }
    }
    Ok(net)
}

pub fn save_actor(mlp: &Mlp, path: &Path) -> Result<()> {
    write_actor(mlp, BufWriter::new(File::create(path)?))
}

pub fn load_actor(path: &Path) -> Result<Mlp> {
    read_actor(BufReader::new(File::open(path)?))
}
