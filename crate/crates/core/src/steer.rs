//! Sequences of two-tone one-period unitaries that create, move and undo
//! correlated spin pairs.
//!
//! A sequence is written in temporal order: `"1,2"` applies `U₁^m` first
//! and `U₂^m` second, so the resulting operator is `U₂^m · U₁^m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::drive::LatticeConfig;
use crate::error::{Error, Result};
use crate::observables::ObservableSeries;
use crate::propagator::UnitaryMatrix;
use crate::spin::{check_dims, StateVector};

/// Default five-step creation followed by its mirror image.
pub const DEFAULT_SEQUENCE: &str = "1,2,1,2,1,1,2,1,2,1";
/// Allowed distance of `Ω₀/(2J0)` from an integer in strict mode.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;
/// Allowed unitarity deviation of the block operators.
pub const PROTOCOL_UNITARITY_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// `U₁`: odd bonds at `2Ω₀`, even bonds at `Ω₀`.
    One,
    /// `U₂`: odd bonds at `Ω₀`, even bonds at `2Ω₀`.
    Two,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::One => "1",
            Block::Two => "2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolSequence {
    blocks: Vec<Block>,
    periods_per_block: u32,
}

impl ProtocolSequence {
    pub fn new(blocks: Vec<Block>, periods_per_block: u32) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptySequence);
        }
        if periods_per_block == 0 {
            return Err(Error::InvalidParameter("periods per block must be at least 1".into()));
        }
        Ok(Self {
            blocks,
            periods_per_block,
        })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn periods_per_block(&self) -> u32 {
        self.periods_per_block
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Total number of driving periods.
    pub fn total_periods(&self) -> usize {
        self.blocks.len() * self.periods_per_block as usize
    }

    /// Total duration in units of `g⁻¹`.
    pub fn duration(&self, period: f64) -> f64 {
        self.total_periods() as f64 * period
    }

    /// Operator string with the earliest block rightmost.
    pub fn operator_string(&self) -> String {
        self.blocks
            .iter()
            .rev()
            .map(|b| format!("U{b}^{}", self.periods_per_block))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for ProtocolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self.blocks.iter().map(Block::to_string).collect();
        write!(f, "{} (m={})", text.join(","), self.periods_per_block)
    }
}

fn parse_blocks(spec: &str) -> Result<Vec<Block>> {
    let tokens: Vec<&str> = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(Error::EmptySequence);
    }
    tokens
        .iter()
        .enumerate()
        .map(|(position, tok)| match *tok {
            "1" => Ok(Block::One),
            "2" => Ok(Block::Two),
            other => Err(Error::BadToken {
                token: other.to_string(),
                position,
            }),
        })
        .collect()
}

/// Parses a comma- or whitespace-separated list over `{1, 2}`.
pub fn compile_sequence(spec: &str, m: u32) -> Result<ProtocolSequence> {
    ProtocolSequence::new(parse_blocks(spec)?, m)
}

impl FromStr for ProtocolSequence {
    type Err = Error;

    /// Accepts `"<blocks>"` (with `m = 1`) or `"<blocks>;m=<m>"`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(';') {
            Some((blocks, m)) => {
                let m = m
                    .trim()
                    .strip_prefix("m=")
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("bad block length in {s:?}")))?;
                compile_sequence(blocks, m)
            }
            None => compile_sequence(s, 1),
        }
    }
}

/// `Ω₀/(2J0)` rounded to the nearest integer. With `strict`, a ratio further
/// than `INTEGRALITY_TOLERANCE` from an integer is an error; otherwise it is
/// rounded with a warning.
pub fn default_m(cfg: &LatticeConfig, strict: bool) -> Result<u32> {
    cfg.validate()?;
    if !(cfg.coupling > 0.0) {
        return Err(Error::InvalidParameter(
            "periods per block need a positive coupling".into(),
        ));
    }
    let ratio = cfg.fundamental() / (2.0 * cfg.coupling);
    let rounded = ratio.round();
    if (ratio - rounded).abs() > INTEGRALITY_TOLERANCE {
        if strict {
            return Err(Error::NonIntegerRatio { ratio });
        }
        log::warn!(
            "block length ratio {ratio:.6} is not an integer; rounding to {} lets phase shifts accumulate from block to block",
            rounded.max(1.0)
        );
    }
    Ok(rounded.max(1.0) as u32)
}

/// Applies the blocks of `seq` in temporal order, sampling after every
/// period. The series has `seq.total_periods() + 1` entries and carries the
/// fidelity to `psi0`.
pub fn run_protocol(
    psi0: &StateVector,
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
    seq: &ProtocolSequence,
    period: f64,
) -> Result<ObservableSeries> {
    check_dims(u1.dim(), u2.dim())?;
    check_dims(u1.dim(), psi0.dim())?;
    for u in [u1, u2] {
        let dev = u.unitarity_deviation();
        if dev > PROTOCOL_UNITARITY_TOLERANCE {
            return Err(Error::Integrity(format!(
                "block operator {} deviates from unitarity by {dev:.3e}",
                u.label()
            )));
        }
    }
    let mut series = ObservableSeries::empty(psi0.num_sites(), true);
    let mut state = psi0.clone();
    let mut n = 0usize;
    let record = |series: &mut ObservableSeries, state: &StateVector, n: usize| -> Result<()> {
        series.times.push(n as f64 * period);
        if let Some(p) = series.periods.as_mut() {
            p.push(n);
        }
        series.push(state, Some(psi0))
    };
    record(&mut series, &state, n)?;
    for block in seq.blocks() {
        let u = match block {
            Block::One => u1,
            Block::Two => u2,
        };
        for _ in 0..seq.periods_per_block() {
            state = u.apply(&state)?;
            n += 1;
            record(&mut series, &state, n)?;
        }
    }
    let drift = (state.norm() - psi0.norm()).abs();
    if drift > PROTOCOL_UNITARITY_TOLERANCE {
        return Err(Error::Integrity(format!(
            "norm drifted by {drift:.3e} over {n} periods"
        )));
    }
    Ok(series)
}

/// Largest `|C_{j,j+1}(a) − C_{L−j,L−j+1}(b)|` over all samples and bonds.
pub fn mirror_check(a: &ObservableSeries, b: &ObservableSeries, num_sites: usize) -> Result<f64> {
    if a.len() != b.len() || a.num_sites != num_sites || b.num_sites != num_sites {
        return Err(Error::InvalidParameter(format!(
            "series shapes differ: {}x{} vs {}x{} (expected {num_sites} sites)",
            a.len(),
            a.num_sites,
            b.len(),
            b.num_sites
        )));
    }
    let bonds = num_sites.saturating_sub(1);
    let mut worst: f64 = 0.0;
    for (ca, cb) in a.correlations.iter().zip(&b.correlations) {
        for j in 0..bonds {
            worst = worst.max((ca[j] - cb[bonds - 1 - j]).abs());
        }
    }
    Ok(worst)
}
