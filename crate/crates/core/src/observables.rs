//! Local and two-point observables, fidelity, and fidelity-susceptibility
//! scans over the drive frequency.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{DriveAssignment, LatticeConfig};
use crate::error::{Error, Result};
use crate::propagator::{Propagator, PropagatorOptions};
use crate::spin::{check_dims, inner_product, StateVector};

/// Lower bound tolerated on χ_F from rounding.
pub const CHI_FLOOR: f64 = -1e-12;
/// Default central-difference step in Ω, units of `g`.
pub const DEFAULT_DELTA_OMEGA: f64 = 1e-3;
/// Default peak prominence, as a fraction of the global maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

fn site_check(state: &StateVector, site: usize) -> Result<()> {
    if site == 0 || site > state.num_sites() {
        Err(Error::SiteOutOfRange {
            site,
            len: state.num_sites(),
        })
    } else {
        Ok(())
    }
}

/// `⟨σ^z_j⟩` for 1-based site `j`.
pub fn magnetization(state: &StateVector, site: usize) -> Result<f64> {
    site_check(state, site)?;
    let bit = 1usize << (site - 1);
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if i & bit != 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum())
}

/// All `⟨σ^z_j⟩`, `j = 1..L`.
pub fn magnetizations(state: &StateVector) -> Vec<f64> {
    let l = state.num_sites();
    let mut out = vec![0.0; l];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        for (j, m) in out.iter_mut().enumerate() {
            if i >> j & 1 == 1 {
                *m += p;
            } else {
                *m -= p;
            }
        }
    }
    out
}

fn zz(state: &StateVector, bond: usize) -> f64 {
    let mask = 0b11usize << (bond - 1);
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            // σ^z σ^z = +1 when the two bits agree
            let bits = (i & mask).count_ones();
            if bits == 1 {
                -a.norm_sqr()
            } else {
                a.norm_sqr()
            }
        })
        .sum()
}

/// Connected correlator `C_{j,j+1} = ⟨σ^z_j σ^z_{j+1}⟩ − ⟨σ^z_j⟩⟨σ^z_{j+1}⟩`.
pub fn correlation(state: &StateVector, bond: usize) -> Result<f64> {
    if bond == 0 || bond >= state.num_sites() {
        return Err(Error::BondOutOfRange {
            bond,
            max: state.num_sites().saturating_sub(1),
        });
    }
    Ok(zz(state, bond) - magnetization(state, bond)? * magnetization(state, bond + 1)?)
}

/// All nearest-neighbor correlators `C_{j,j+1}`, `j = 1..L-1`.
pub fn correlations(state: &StateVector) -> Vec<f64> {
    let mz = magnetizations(state);
    (1..state.num_sites())
        .map(|b| zz(state, b) - mz[b - 1] * mz[b])
        .collect()
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// `⟨Π_j σ^z_j⟩`.
pub fn parity(state: &StateVector) -> f64 {
    let l = state.num_sites() as u32;
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let downs = l - (i as u32).count_ones();
            if downs % 2 == 0 {
                a.norm_sqr()
            } else {
                -a.norm_sqr()
            }
        })
        .sum()
}

/// Time-indexed `⟨σ^z_j⟩`, `C_{j,j+1}` and optional fidelity records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub num_sites: usize,
    /// Sample times in units of `g⁻¹`.
    pub times: Vec<f64>,
    /// Period index per sample for stroboscopic series.
    pub periods: Option<Vec<usize>>,
    /// `[sample][site]`.
    pub magnetizations: Vec<Vec<f64>>,
    /// `[sample][bond]`.
    pub correlations: Vec<Vec<f64>>,
    /// Fidelity to the reference state, per sample.
    pub fidelity: Option<Vec<f64>>,
}

impl ObservableSeries {
    pub fn from_states(
        times: Vec<f64>,
        states: &[StateVector],
        reference: Option<&StateVector>,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::InvalidParameter(format!(
                "{} times for {} states",
                times.len(),
                states.len()
            )));
        }
        let num_sites = states.first().map_or(0, StateVector::num_sites);
        let mut series = Self {
            num_sites,
            times,
            periods: None,
            magnetizations: Vec::with_capacity(states.len()),
            correlations: Vec::with_capacity(states.len()),
            fidelity: reference.map(|_| Vec::with_capacity(states.len())),
        };
        for st in states {
            series.push(st, reference)?;
        }
        Ok(series)
    }

    /// Stroboscopic series sampled at `t = nT`, `n = 0, 1, …`.
    pub fn stroboscopic(period: f64, states: &[StateVector], reference: Option<&StateVector>) -> Result<Self> {
        let times = (0..states.len()).map(|n| n as f64 * period).collect();
        let mut s = Self::from_states(times, states, reference)?;
        s.periods = Some((0..states.len()).collect());
        Ok(s)
    }

    pub(crate) fn empty(num_sites: usize, with_fidelity: bool) -> Self {
        Self {
            num_sites,
            times: Vec::new(),
            periods: Some(Vec::new()),
            magnetizations: Vec::new(),
            correlations: Vec::new(),
            fidelity: with_fidelity.then(Vec::new),
        }
    }

    pub(crate) fn push(&mut self, state: &StateVector, reference: Option<&StateVector>) -> Result<()> {
        if self.num_sites != state.num_sites() {
            return Err(Error::LengthMismatch {
                expected: self.num_sites,
                found: state.num_sites(),
            });
        }
        self.magnetizations.push(magnetizations(state));
        self.correlations.push(correlations(state));
        if let (Some(f), Some(r)) = (self.fidelity.as_mut(), reference) {
            f.push(fidelity(r, state)?);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.magnetizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnetizations.is_empty()
    }

    /// `⟨σ^z_j⟩` over time for 1-based site `j`.
    pub fn site(&self, site: usize) -> Vec<f64> {
        self.magnetizations.iter().map(|m| m[site - 1]).collect()
    }

    /// `C_{j,j+1}` over time for 1-based bond `j`.
    pub fn bond(&self, bond: usize) -> Vec<f64> {
        self.correlations.iter().map(|c| c[bond - 1]).collect()
    }

    /// Checks range and alignment invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let aligned = self.magnetizations.len() == n
            && self.correlations.len() == n
            && self.fidelity.as_ref().is_none_or(|f| f.len() == n)
            && self.periods.as_ref().is_none_or(|p| p.len() == n);
        if !aligned {
            return Err(Error::Integrity("series columns have different lengths".into()));
        }
        let tol = 1e-9;
        if self.magnetizations.iter().flatten().any(|m| m.abs() > 1.0 + tol) {
            return Err(Error::Integrity("magnetization outside [-1, 1]".into()));
        }
        if self.correlations.iter().flatten().any(|c| c.abs() > 2.0 + tol) {
            return Err(Error::Integrity("correlation outside [-2, 2]".into()));
        }
        if let Some(f) = &self.fidelity {
            if f.iter().any(|x| *x < -tol || *x > 1.0 + tol) {
                return Err(Error::Integrity("fidelity outside [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// Period, in samples, of the strongest non-constant discrete Fourier
/// component of `signal`.
pub fn dominant_period(signal: &[f64]) -> Option<f64> {
    let n = signal.len();
    if n < 3 {
        return None;
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    (1..=n / 2)
        .map(|k| {
            let amp: C64 = signal
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    (x - mean) * C64::from_polar(1.0, -std::f64::consts::TAU * (k * j) as f64 / n as f64)
                })
                .sum();
            (k, amp.norm())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| n as f64 / k as f64)
}

/// `⟨d|(1 − |ψ⟩⟨ψ|)|d⟩` for `d = ∂_Ω ψ`, evaluated as `‖d − ψ⟨ψ|d⟩‖²`.
pub fn susceptibility_from_derivative(psi: &StateVector, derivative: &StateVector) -> Result<f64> {
    check_dims(psi.dim(), derivative.dim())?;
    let norm_sqr = psi.norm_sqr();
    let overlap = inner_product(psi, derivative)? / norm_sqr;
    Ok(derivative
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(d, p)| (d - p * overlap).norm_sqr())
        .sum())
}

/// Finite-difference χ_F from the states at `Ω − δ`, `Ω`, `Ω + δ`. With
/// `minus = None` a forward difference is used.
pub fn susceptibility_from_states(
    minus: Option<&StateVector>,
    center: &StateVector,
    plus: &StateVector,
    delta: f64,
) -> Result<f64> {
    let derivative = match minus {
        Some(m) => plus.clone().add_scaled(C64::new(-1.0, 0.0), m)?.scaled(C64::new(0.5 / delta, 0.0)),
        None => plus
            .clone()
            .add_scaled(C64::new(-1.0, 0.0), center)?
            .scaled(C64::new(1.0 / delta, 0.0)),
    };
    susceptibility_from_derivative(center, &derivative)
}

/// χ_F at one `(Ω, t)` with a flag for one-sided differencing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityPoint {
    pub value: f64,
    pub one_sided: bool,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency step {delta} must be positive"
        )));
    }
    Ok(())
}

/// Trajectories from `|↓…↓⟩` at `Ω − δ` (when positive), `Ω`, `Ω + δ`, each
/// sampled on `times`.
fn trajectories(
    cfg: &LatticeConfig,
    template: &DriveAssignment,
    omega: f64,
    times: &[f64],
    delta: f64,
    opts: &PropagatorOptions,
) -> Result<(Option<Vec<StateVector>>, Vec<StateVector>, Vec<StateVector>)> {
    let psi0 = StateVector::all_down(cfg.num_sites)?;
    let run = |w: f64| -> Result<Vec<StateVector>> {
        let drive = template.with_base_frequency(w)?;
        Propagator::new(cfg, &drive, *opts)?.evolve_sampled(&psi0, times)
    };
    let minus = if omega - delta > 0.0 {
        Some(run(omega - delta)?)
    } else {
        None
    };
    Ok((minus, run(omega)?, run(omega + delta)?))
}

/// `χ_F(Ω, t)` for evolution from `|↓…↓⟩` under `template` with base
/// frequency `Ω`.
pub fn fidelity_susceptibility(
    cfg: &LatticeConfig,
    template: &DriveAssignment,
    omega: f64,
    t: f64,
    delta: f64,
    opts: &PropagatorOptions,
) -> Result<SusceptibilityPoint> {
    check_delta(delta)?;
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("frequency {omega} must be positive")));
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time {t} is negative")));
    }
    let (minus, center, plus) = trajectories(cfg, template, omega, &[t], delta, opts)?;
    let value = susceptibility_from_states(
        minus.as_ref().map(|m| &m[0]),
        &center[0],
        &plus[0],
        delta,
    )?;
    Ok(SusceptibilityPoint {
        value,
        one_sided: minus.is_none(),
    })
}

/// `χ_F` on an `(Ω, t)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusceptibilityMap {
    pub omegas: Vec<f64>,
    pub times: Vec<f64>,
    /// `[omega][time]`.
    pub values: Vec<Vec<f64>>,
    pub delta_omega: f64,
    /// Frequencies where only a forward difference was available.
    pub one_sided: Vec<bool>,
}

impl SusceptibilityMap {
    /// `max_t χ_F(Ω, t)` per frequency.
    pub fn profile(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Uniform grid `start, start + step, …` up to and including `stop` (within
/// rounding).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "cannot build a grid from {start} to {stop} with step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

/// χ_F over every `(Ω, t)` pair. Each frequency is an independent work item
/// owning its three trajectories, sampled once along `times`.
pub fn fs_scan(
    cfg: &LatticeConfig,
    template: &DriveAssignment,
    omegas: &[f64],
    times: &[f64],
    delta: f64,
    opts: &PropagatorOptions,
) -> Result<SusceptibilityMap> {
    check_delta(delta)?;
    if omegas.is_empty() || times.is_empty() {
        return Err(Error::InvalidGrid("frequency and time grids must be nonempty".into()));
    }
    if !strictly_increasing(omegas) || !strictly_increasing(times) {
        return Err(Error::InvalidGrid("grids must be strictly increasing".into()));
    }
    if omegas[0] <= 0.0 || times[0] < 0.0 {
        return Err(Error::InvalidGrid(
            "frequencies must be positive and times non-negative".into(),
        ));
    }
    let rows: Vec<(Vec<f64>, bool)> = omegas
        .par_iter()
        .map(|&omega| {
            let (minus, center, plus) = trajectories(cfg, template, omega, times, delta, opts)?;
            let row = (0..times.len())
                .map(|k| {
                    susceptibility_from_states(
                        minus.as_ref().map(|m| &m[k]),
                        &center[k],
                        &plus[k],
                        delta,
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((row, minus.is_none()))
        })
        .collect::<Result<_>>()?;
    let (values, one_sided): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    if one_sided.iter().any(|&b| b) {
        log::warn!("frequencies at or below delta-omega used one-sided differences");
    }
    Ok(SusceptibilityMap {
        omegas: omegas.to_vec(),
        times: times.to_vec(),
        values,
        delta_omega: delta,
        one_sided,
    })
}

/// A resonance line in `max_t χ_F` over Ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Center of the contiguous region at or above half the peak height.
    pub omega: f64,
    /// Grid frequency of the highest point.
    pub argmax: f64,
    pub height: f64,
    pub prominence: f64,
    /// Full width at half height.
    pub width: f64,
}

/// Topographic prominence of the local maximum at `i`: its height above the
/// higher of the two lowest points reached before meeting higher ground (or
/// the grid edge) on either side.
fn prominence(profile: &[f64], i: usize) -> f64 {
    let h = profile[i];
    let mut left_min = h;
    for &x in profile[..i].iter().rev() {
        if x > h {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = h;
    for &x in &profile[i + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}

fn local_maxima(profile: &[f64]) -> Vec<usize> {
    let n = profile.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if profile[i] > profile[i - 1] {
            // walk across a plateau
            let mut j = i;
            while j + 1 < n && profile[j + 1] == profile[i] {
                j += 1;
            }
            if j + 1 < n && profile[j + 1] < profile[i] {
                out.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Resonance lines of the frequency profile; see [`detect_profile_peaks`].
pub fn detect_peaks(map: &SusceptibilityMap, min_prominence: f64) -> Vec<Peak> {
    detect_profile_peaks(&map.omegas, &map.profile(), min_prominence)
}

/// Local maxima whose prominence is at least `min_prominence` times the
/// global maximum, ranked by height. Each maximum claims the contiguous
/// span where the profile stays at or above half its height; a lower
/// maximum whose span overlaps an accepted one (a fringe of the same line)
/// is absorbed, and each line is located at the center of its span.
pub fn detect_profile_peaks(omegas: &[f64], profile: &[f64], min_prominence: f64) -> Vec<Peak> {
    if profile.len() < 3 || omegas.len() != profile.len() {
        return Vec::new();
    }
    let global = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let mut candidates: Vec<(usize, f64)> = local_maxima(profile)
        .into_iter()
        .map(|i| (i, prominence(profile, i)))
        .filter(|&(_, p)| p >= min_prominence * global)
        .collect();
    candidates.sort_by(|a, b| profile[b.0].total_cmp(&profile[a.0]));

    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut peaks = Vec::new();
    for (i, prom) in candidates {
        let half = profile[i] / 2.0;
        let mut lo = i;
        while lo > 0 && profile[lo - 1] >= half {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < profile.len() && profile[hi + 1] >= half {
            hi += 1;
        }
        if spans.iter().any(|&(a, b)| lo <= b && hi >= a) {
            continue;
        }
        spans.push((lo, hi));
        peaks.push(Peak {
            omega: 0.5 * (omegas[lo] + omegas[hi]),
            argmax: omegas[i],
            height: profile[i],
            prominence: prom,
            width: omegas[hi] - omegas[lo],
        });
    }
    peaks
}
