//! Time-ordered evolution under `H(t)`, one-period unitaries and
//! stroboscopic iteration.
//!
//! The default integrator applies `exp(-i H(t + dt/2) dt)` per step through a
//! truncated power series. Steps are never renormalized; norm drift is checked
//! after every propagation and reported as an integrity failure.

use std::fmt;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{DriveAssignment, DrivenChain, LatticeConfig, Sector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::spin::{check_dims, StateVector};

/// Largest step accepted for reproduction runs.
pub const REFERENCE_MAX_DT: f64 = 0.01;
/// Per-propagation tolerance on `| ‖ψ(t)‖ − ‖ψ(0)‖ |`.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-8;
/// Tolerance on `max |U†U − I|` for a freshly built one-period unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-8;

/// Truncation target for the per-step power series.
const SERIES_TARGET: f64 = 1e-16;
/// The series is refused when the first dropped term could exceed this.
const SERIES_REFUSE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    MidpointExponential,
    Rk4,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MidpointExponential => "midpoint-exponential",
            Self::Rk4 => "rk4",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint-exponential" | "midpoint" => Ok(Self::MidpointExponential),
            "rk4" => Ok(Self::Rk4),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorOptions {
    /// Maximum step, units of `g⁻¹`. Spans are split into equal steps no larger.
    pub dt: f64,
    /// Highest power kept in the per-step exponential series.
    pub series_order: usize,
    pub method: Method,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            series_order: 12,
            method: Method::MidpointExponential,
        }
    }
}

impl PropagatorOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step {} must be positive",
                self.dt
            )));
        }
        if self.series_order == 0 {
            return Err(Error::InvalidParameter("series order must be at least 1".into()));
        }
        Ok(())
    }

    /// Stricter check for runs meant to reproduce the reference results.
    pub fn validate_for_reproduction(&self) -> Result<()> {
        self.validate()?;
        if self.dt > REFERENCE_MAX_DT {
            return Err(Error::InvalidParameter(format!(
                "time step {} exceeds {REFERENCE_MAX_DT} g^-1",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Splits `span` into the smallest number of equal steps no longer than `dt`.
pub fn step_count(span: f64, dt: f64) -> usize {
    if span <= 0.0 {
        return 0;
    }
    ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Number of series terms needed for `x = ‖H‖ dt`, or a refusal.
fn series_terms(norm_dt: f64, order: usize) -> Result<usize> {
    for k in 1..=order {
        if norm_dt.powi(k as i32 + 1) / factorial(k + 1) < SERIES_TARGET {
            return Ok(k);
        }
    }
    if norm_dt.powi(order as i32 + 1) / factorial(order + 1) > SERIES_REFUSE {
        // largest x with x^(n+1)/(n+1)! below the refusal threshold
        let x_max = (SERIES_REFUSE * factorial(order + 1)).powf(1.0 / (order as f64 + 1.0));
        return Err(Error::SeriesNonConvergence {
            norm_dt,
            suggested_dt: x_max / norm_dt * 0.9,
        });
    }
    Ok(order)
}

/// Reusable propagation engine for one `(lattice, drive, options)` triple.
#[derive(Debug, Clone)]
pub struct Propagator {
    chain: DrivenChain,
    opts: PropagatorOptions,
}

/// Columns propagated together in one interleaved block.
const BLOCK_WIDTH: usize = 32;

struct Scratch {
    a: Vec<C64>,
    b: Vec<C64>,
    c: Vec<C64>,
    d: Vec<C64>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); len];
        Self {
            a: z.clone(),
            b: z.clone(),
            c: z.clone(),
            d: z,
        }
    }
}

impl Propagator {
    pub fn new(cfg: &LatticeConfig, drive: &DriveAssignment, opts: PropagatorOptions) -> Result<Self> {
        opts.validate()?;
        let chain = DrivenChain::new(cfg, drive)?;
        Ok(Self { chain, opts })
    }

    pub fn chain(&self) -> &DrivenChain {
        &self.chain
    }

    pub fn options(&self) -> &PropagatorOptions {
        &self.opts
    }

    pub fn dim(&self) -> usize {
        self.chain.dim()
    }

    fn terms_for(&self, h: f64) -> Result<usize> {
        series_terms(self.chain.norm_bound() * h, self.opts.series_order)
    }

    /// `V ← exp(-i H(t + h/2) h) V` for a block of `width` states.
    fn midpoint_step(&self, v: &mut [C64], width: usize, sector: &Sector, t: f64, h: f64, n_terms: usize, s: &mut Scratch) {
        let coeffs = self.chain.bond_coefficients(t + 0.5 * h);
        // accumulated sum in `v`, current term in `a`, next term in `b`
        s.a.copy_from_slice(v);
        for k in 1..=n_terms {
            self.chain.apply_block_into(&coeffs, &s.a, &mut s.b, width, sector);
            let f = h / k as f64;
            for (acc, (next, cur)) in v.iter_mut().zip(s.b.iter().zip(s.a.iter_mut())) {
                // cur = -i f next
                cur.re = f * next.im;
                cur.im = -f * next.re;
                *acc += *cur;
            }
        }
    }

    fn rk4_step(&self, v: &mut [C64], width: usize, sector: &Sector, t: f64, h: f64, s: &mut Scratch) {
        let minus_i = C64::new(0.0, -1.0);
        let c0 = self.chain.bond_coefficients(t);
        let c1 = self.chain.bond_coefficients(t + 0.5 * h);
        let c2 = self.chain.bond_coefficients(t + h);
        let len = v.len();
        // stage derivative in a/b, stage input in c, weighted sum in d
        self.chain.apply_block_into(&c0, v, &mut s.a, width, sector);
        for i in 0..len {
            s.a[i] *= minus_i;
            s.d[i] = s.a[i];
            s.c[i] = v[i] + s.a[i] * (0.5 * h);
        }
        self.chain.apply_block_into(&c1, &s.c, &mut s.b, width, sector);
        for i in 0..len {
            s.b[i] *= minus_i;
            s.d[i] += s.b[i] * 2.0;
            s.c[i] = v[i] + s.b[i] * (0.5 * h);
        }
        self.chain.apply_block_into(&c1, &s.c, &mut s.a, width, sector);
        for i in 0..len {
            s.a[i] *= minus_i;
            s.d[i] += s.a[i] * 2.0;
            s.c[i] = v[i] + s.a[i] * h;
        }
        self.chain.apply_block_into(&c2, &s.c, &mut s.b, width, sector);
        for i in 0..len {
            s.b[i] *= minus_i;
            s.d[i] += s.b[i];
            v[i] += s.d[i] * (h / 6.0);
        }
    }

    /// Evolves `v` in place from `t0` to `t1` in equal steps no longer than `dt`.
    fn evolve_slice(&self, v: &mut [C64], t0: f64, t1: f64, s: &mut Scratch) -> Result<()> {
        let n = step_count(t1 - t0, self.opts.dt);
        if n == 0 {
            return Ok(());
        }
        self.evolve_steps(v, 1, &Sector::full(self.dim()), t0, (t1 - t0) / n as f64, n, s)
    }

    /// `n` steps of length `h` starting at `t0`.
    fn evolve_steps(
        &self,
        v: &mut [C64],
        width: usize,
        sector: &Sector,
        t0: f64, h: f64, n: usize, s: &mut Scratch) -> Result<()> {
        match self.opts.method {
            Method::MidpointExponential => {
                let terms = self.terms_for(h)?;
                for k in 0..n {
                    self.midpoint_step(v, width, sector, t0 + k as f64 * h, h, terms, s);
                }
            }
            Method::Rk4 => {
                for k in 0..n {
                    self.rk4_step(v, width, sector, t0 + k as f64 * h, h, s);
                }
            }
        }
        Ok(())
    }

    /// A single step of length `dt` starting at `t`.
    pub fn step(&self, state: &StateVector, t: f64, dt: f64) -> Result<StateVector> {
        check_dims(self.dim(), state.dim())?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("step {dt} must be positive")));
        }
        let mut v = state.amplitudes().to_vec();
        let mut s = Scratch::new(self.dim());
        match self.opts.method {
            Method::MidpointExponential => {
                let terms = self.terms_for(dt)?;
                self.midpoint_step(&mut v, 1, &Sector::full(self.dim()), t, dt, terms, &mut s);
            }
            Method::Rk4 => self.rk4_step(&mut v, 1, &Sector::full(self.dim()), t, dt, &mut s),
        }
        StateVector::from_amplitudes(v)
    }

    /// `ψ(t1)` from `ψ(t0)`.
    pub fn evolve(&self, state: &StateVector, t0: f64, t1: f64) -> Result<StateVector> {
        check_dims(self.dim(), state.dim())?;
        if t1 < t0 {
            return Err(Error::InvalidParameter(format!(
                "cannot evolve backwards from {t0} to {t1}"
            )));
        }
        let mut v = state.amplitudes().to_vec();
        let mut s = Scratch::new(self.dim());
        self.evolve_slice(&mut v, t0, t1, &mut s)?;
        let out = StateVector::from_amplitudes(v)?;
        check_norm(state, &out)?;
        Ok(out)
    }

    /// States at every time of `times` (non-decreasing, first entry ≥ 0),
    /// evolved from `state0` given at `t = 0`.
    pub fn evolve_sampled(&self, state0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_dims(self.dim(), state0.dim())?;
        let mut v = state0.amplitudes().to_vec();
        let mut s = Scratch::new(self.dim());
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            if target < t {
                return Err(Error::InvalidGrid(format!(
                    "sample times must be non-decreasing and start at or after 0 (got {target} after {t})"
                )));
            }
            self.evolve_slice(&mut v, t, target, &mut s)?;
            t = target;
            let snap = StateVector::from_amplitudes(v.clone())?;
            check_norm(state0, &snap)?;
            out.push(snap);
        }
        Ok(out)
    }

    /// Propagates the basis columns `cols` (all inside `sector`) through `n`
    /// steps of length `h` from `t = 0`. Returns the block as
    /// `[sector row][column]`.
    fn propagate_block(&self, cols: &[usize], sector: &Sector, h: f64, n: usize) -> Result<Vec<C64>> {
        let width = cols.len();
        let mut v = vec![C64::new(0.0, 0.0); sector.len() * width];
        for (k, &c) in cols.iter().enumerate() {
            v[sector.position[c] * width + k] = C64::new(1.0, 0.0);
        }
        let mut s = Scratch::new(v.len());
        self.evolve_steps(&mut v, width, sector, 0.0, h, n, &mut s)?;
        for (k, &c) in cols.iter().enumerate() {
            let norm = (0..sector.len())
                .map(|r| v[r * width + k].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if (norm - 1.0).abs() > NORM_DRIFT_TOLERANCE {
                return Err(Error::Integrity(format!("column {c} norm drifted to {norm}")));
            }
        }
        Ok(v)
    }

    /// Every column of the evolution operator over `n` steps of length `h`.
    /// `H` conserves parity, so columns are batched per parity sector.
    fn propagate_columns(&self, h: f64, n: usize) -> Result<CMatrix> {
        let dim = self.dim();
        let sectors = [Sector::parity(dim, 0), Sector::parity(dim, 1)];
        let jobs: Vec<(usize, Vec<usize>)> = sectors
            .iter()
            .enumerate()
            .flat_map(|(p, sec)| {
                sec.rows
                    .chunks(BLOCK_WIDTH)
                    .map(move |cols| (p, cols.to_vec()))
            })
            .collect();
        let blocks: Vec<Vec<C64>> = jobs
            .par_iter()
            .map(|(p, cols)| self.propagate_block(cols, &sectors[*p], h, n))
            .collect::<Result<_>>()?;
        let mut m = Array2::zeros((dim, dim));
        for ((p, cols), block) in jobs.iter().zip(blocks) {
            let width = cols.len();
            for (r, &row) in sectors[*p].rows.iter().enumerate() {
                for (k, &c) in cols.iter().enumerate() {
                    m[(row, c)] = block[r * width + k];
                }
            }
        }
        Ok(m)
    }

    /// Steps per period; even for the midpoint integrator.
    fn period_steps(&self) -> usize {
        let n = step_count(self.chain.drive().period(), self.opts.dt);
        match self.opts.method {
            Method::MidpointExponential => n + n % 2,
            Method::Rk4 => n,
        }
    }

    /// `U(T, 0)` for `T = 2π/Ω`.
    ///
    /// With the midpoint integrator and an even step count the second half
    /// period is obtained from the first: `H` is real in the computational
    /// basis and `H(T − t) = H(t)`, so the reflected step sequence gives
    /// `U(T, T/2) = U(T/2, 0)ᵀ` exactly at the discrete level.
    pub fn one_period(&self) -> Result<UnitaryMatrix> {
        let period = self.chain.drive().period();
        let n = self.period_steps();
        let matrix = match self.opts.method {
            Method::MidpointExponential => {
                let u_half = self.propagate_columns(period / n as f64, n / 2)?;
                u_half.t().dot(&u_half)
            }
            Method::Rk4 => self.propagate_columns(period / n as f64, n)?,
        };
        let u = UnitaryMatrix::new(matrix, "U(T)");
        let dev = u.unitarity_deviation();
        if dev > UNITARITY_TOLERANCE {
            return Err(Error::Integrity(format!(
                "one-period operator deviates from unitarity by {dev:.3e}"
            )));
        }
        Ok(u)
    }

    /// `U(T, 0)` built from full-period column propagations, without the
    /// half-period reflection.
    pub fn one_period_direct(&self) -> Result<UnitaryMatrix> {
        let period = self.chain.drive().period();
        let n = self.period_steps();
        Ok(UnitaryMatrix::new(
            self.propagate_columns(period / n as f64, n)?,
            "U(T)",
        ))
    }
}

fn check_norm(reference: &StateVector, state: &StateVector) -> Result<()> {
    let drift = (state.norm() - reference.norm()).abs();
    if drift > NORM_DRIFT_TOLERANCE {
        return Err(Error::Integrity(format!(
            "state norm drifted by {drift:.3e}"
        )));
    }
    Ok(())
}

/// Dense evolution operator with a display label.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: CMatrix,
    label: String,
}

impl UnitaryMatrix {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Self {
        Self {
            matrix,
            label: label.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(linalg::identity(dim), "I")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_dims(self.dim(), state.dim())?;
        let v = Array1::from(state.amplitudes().to_vec());
        StateVector::from_amplitudes(self.matrix.dot(&v).to_vec())
    }

    /// `self · other` (other acts first).
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::new(
            self.matrix.dot(&other.matrix),
            format!("{}·{}", self.label, other.label),
        ))
    }

    /// `U^m` by repeated squaring.
    pub fn pow(&self, m: u32) -> UnitaryMatrix {
        let mut result = linalg::identity(self.dim());
        let mut base = self.matrix.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = result.dot(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.dot(&base);
            }
        }
        Self::new(result, format!("{}^{m}", self.label))
    }

    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> Result<f64> {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }
}

/// One step of `opts.method` from `t` to `t + dt`.
pub fn step(
    state: &StateVector,
    t: f64,
    dt: f64,
    cfg: &LatticeConfig,
    drive: &DriveAssignment,
    opts: &PropagatorOptions,
) -> Result<StateVector> {
    Propagator::new(cfg, drive, *opts)?.step(state, t, dt)
}

pub fn one_period_operator(
    cfg: &LatticeConfig,
    drive: &DriveAssignment,
    opts: &PropagatorOptions,
) -> Result<UnitaryMatrix> {
    Propagator::new(cfg, drive, *opts)?.one_period()
}

/// `[ψ0, Uψ0, U²ψ0, …, Uⁿψ0]`.
pub fn stroboscopic_evolve(
    state0: &StateVector,
    u: &UnitaryMatrix,
    n_periods: usize,
) -> Result<Vec<StateVector>> {
    check_dims(u.dim(), state0.dim())?;
    let mut out = Vec::with_capacity(n_periods + 1);
    out.push(state0.clone());
    for _ in 0..n_periods {
        let next = u.apply(out.last().expect("nonempty"))?;
        out.push(next);
    }
    let drift = (out.last().expect("nonempty").norm() - state0.norm()).abs();
    if drift > NORM_DRIFT_TOLERANCE {
        return Err(Error::Integrity(format!(
            "stroboscopic norm drifted by {drift:.3e} over {n_periods} periods"
        )));
    }
    Ok(out)
}

/// States sampled every `sample_every` from `t = 0` to `t_end`; the last
/// sample lands exactly on `t_end`.
pub fn continuous_evolve(
    state0: &StateVector,
    t_end: f64,
    cfg: &LatticeConfig,
    drive: &DriveAssignment,
    opts: &PropagatorOptions,
    sample_every: f64,
) -> Result<Vec<(f64, StateVector)>> {
    if t_end < 0.0 {
        return Err(Error::InvalidParameter(format!("end time {t_end} is negative")));
    }
    if !(sample_every > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample stride {sample_every} must be positive"
        )));
    }
    let samples = step_count(t_end, sample_every);
    let times: Vec<f64> = (0..=samples)
        .map(|k| if k == samples { t_end } else { k as f64 * sample_every })
        .collect();
    let prop = Propagator::new(cfg, drive, *opts)?;
    let states = prop.evolve_sampled(state0, &times)?;
    Ok(times.into_iter().zip(states).collect())
}

/// `exp(+i H0 T) U(T)`, the one-period operator in the frame rotating with
/// `H0 = g Σ σ^z`.
pub fn rotating_frame(u: &UnitaryMatrix, cfg: &LatticeConfig, period: f64) -> Result<UnitaryMatrix> {
    let chain = DrivenChain::new(cfg, &DriveAssignment::uniform(cfg.num_sites, 1.0)?)?;
    let undo = linalg::diagonal_phase(&chain.diagonal, -period);
    check_dims(u.dim(), undo.nrows())?;
    Ok(UnitaryMatrix::new(undo.dot(u.matrix()), format!("{} (rotating)", u.label())))
}

/// `max |e^{iH0 T} U(T) − exp(−i H_F⁽⁰⁾ T)|`.
pub fn magnus_residual(
    cfg: &LatticeConfig,
    drive: &DriveAssignment,
    u: &UnitaryMatrix,
) -> Result<f64> {
    let eff = crate::drive::magnus_zeroth(cfg, drive)?;
    let h_eff = linalg::dense(&eff.operator()?);
    let period = drive.period();
    let predicted = linalg::expm_i(&h_eff, period);
    let rotated = rotating_frame(u, cfg, period)?;
    linalg::max_abs_diff(rotated.matrix(), &predicted)
}
