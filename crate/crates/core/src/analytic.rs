//! Closed-form three-spin dynamics under the resonant pair-creation model,
//! restricted to the two-level space `{|↓↓↓⟩, |↑↑↓⟩}`.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::StateVector;

/// Basis index of `|↑↑↓⟩` (sites 1 and 2 up).
pub const PAIR_INDEX: usize = 0b011;

/// `cos θ |↓↓↓⟩ − i sin θ |↑↑↓⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelState {
    pub theta: f64,
}

impl TwoLevelState {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    /// State after time `t` under coupling `J0`.
    pub fn at_time(t: f64, coupling: f64) -> Self {
        Self::new(coupling * t / 2.0)
    }

    pub fn amplitudes(&self) -> (C64, C64) {
        let (s, c) = self.theta.sin_cos();
        (C64::new(c, 0.0), C64::new(0.0, -s))
    }

    pub fn to_state(&self) -> StateVector {
        let (a0, a1) = self.amplitudes();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0] = a0;
        amps[PAIR_INDEX] = a1;
        StateVector::from_amplitudes(amps).expect("eight amplitudes form a three-site state")
    }
}

/// `(⟨σ^z_1⟩, ⟨σ^z_2⟩, ⟨σ^z_3⟩)` at `t = nT`.
pub fn analytic_magnetizations(n: u32, coupling: f64, omega0: f64) -> [f64; 3] {
    let m = -(TAU * coupling * n as f64 / omega0).cos();
    [m, m, -1.0]
}

/// `(C₁₂, C₂₃)` at time `t`.
pub fn analytic_correlation(t: f64, coupling: f64) -> (f64, f64) {
    ((coupling * t).sin().powi(2), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicPeriod {
    /// `T′ = 2π/J0`, units of `g⁻¹`.
    pub period: f64,
    /// `T′/T`.
    pub ratio: f64,
}

pub fn subharmonic_period(coupling: f64, omega0: f64) -> Result<SubharmonicPeriod> {
    if !(coupling > 0.0) || !(omega0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coupling {coupling} and frequency {omega0} must be positive"
        )));
    }
    Ok(SubharmonicPeriod {
        period: TAU / coupling,
        ratio: omega0 / coupling,
    })
}
