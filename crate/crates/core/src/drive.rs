//! Lattice and drive declarations, the lab-frame Hamiltonian
//!
//! ```text
//! H(t) = g Σ_j σ^z_j + J0 Σ_b cos(k_b Ω t) σ^x_j σ^x_{j+1}
//! ```
//!
//! its rotating-frame term list, and the zeroth-order Magnus average.
//!
//! Energies are in units of the transverse field `g` and `ħ = 1`.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{check_dims, check_length, inner_product, PauliAction, SparsePauliOperator, StateVector};

/// Tolerance (in units of `g`) for an exactly vanishing frequency component.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;
/// Detunings below this (in units of `g`) but above [`RESONANCE_TOLERANCE`]
/// are near-resonant and rejected by [`magnus_zeroth`].
pub const NEAR_RESONANCE_BAND: f64 = 1e-3;

/// Open chain of `num_sites` spins with transverse field `field` and bare
/// exchange `coupling`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub num_sites: usize,
    pub field: f64,
    pub coupling: f64,
}

impl LatticeConfig {
    pub fn new(num_sites: usize, field: f64, coupling: f64) -> Result<Self> {
        let cfg = Self {
            num_sites,
            field,
            coupling,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `g = 1`, the unit convention used throughout.
    pub fn in_field_units(num_sites: usize, coupling: f64) -> Result<Self> {
        Self::new(num_sites, 1.0, coupling)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sites < 2 {
            return Err(Error::UnsupportedLength(self.num_sites));
        }
        check_length(self.num_sites)?;
        if !(self.field > 0.0 && self.field.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "field g = {} must be positive",
                self.field
            )));
        }
        // J0 = 0 is the decoupled limit used by the trivial checks.
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling J0 = {} must be non-negative",
                self.coupling
            )));
        }
        Ok(())
    }

    pub fn num_bonds(&self) -> usize {
        self.num_sites - 1
    }

    pub fn dim(&self) -> usize {
        1 << self.num_sites
    }

    pub fn field_to_coupling_ratio(&self) -> f64 {
        self.field / self.coupling
    }

    /// The effective-Hamiltonian picture needs `g/J0 ≫ 1`; flagged below 5.
    pub fn in_high_frequency_regime(&self) -> bool {
        self.field_to_coupling_ratio() >= 5.0
    }

    /// Pair-creation resonance `Ω₁ = 4g`.
    pub fn first_harmonic(&self) -> f64 {
        4.0 * self.field
    }

    /// Fundamental resonance `Ω₀ = 2g`.
    pub fn fundamental(&self) -> f64 {
        2.0 * self.field
    }
}

/// Named bond-frequency patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrivePreset {
    /// Every bond at the base frequency.
    Uniform,
    /// Odd bonds at `2Ω`, even bonds at `Ω`.
    OddOmega1EvenOmega0,
    /// Odd bonds at `Ω`, even bonds at `2Ω`.
    OddOmega0EvenOmega1,
}

impl DrivePreset {
    pub fn multipliers(self, num_bonds: usize) -> Vec<u32> {
        (1..=num_bonds)
            .map(|b| match self {
                Self::Uniform => 1,
                Self::OddOmega1EvenOmega0 => {
                    if b % 2 == 1 {
                        2
                    } else {
                        1
                    }
                }
                Self::OddOmega0EvenOmega1 => {
                    if b % 2 == 1 {
                        1
                    } else {
                        2
                    }
                }
            })
            .collect()
    }
}

impl std::str::FromStr for DrivePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "odd-omega1-even-omega0" => Ok(Self::OddOmega1EvenOmega0),
            "odd-omega0-even-omega1" => Ok(Self::OddOmega0EvenOmega1),
            other => Err(Error::InvalidParameter(format!(
                "unknown drive preset {other:?}"
            ))),
        }
    }
}

/// Bond `b = (b, b+1)` is modulated as `cos(k_b Ω t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveAssignment {
    base_frequency: f64,
    multipliers: Vec<u32>,
}

impl DriveAssignment {
    pub fn new(base_frequency: f64, multipliers: Vec<u32>) -> Result<Self> {
        if !(base_frequency > 0.0 && base_frequency.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "base frequency {base_frequency} must be positive"
            )));
        }
        if multipliers.is_empty() {
            return Err(Error::InvalidParameter("drive has no bonds".into()));
        }
        if let Some(pos) = multipliers.iter().position(|&k| k == 0) {
            return Err(Error::InvalidParameter(format!(
                "bond {} has multiplier 0",
                pos + 1
            )));
        }
        let drive = Self {
            base_frequency,
            multipliers,
        };
        if drive.beyond_two_tone() {
            log::warn!(
                "drive multipliers {:?} include values outside {{1, 2}}; results are beyond the validated two-tone protocols",
                drive.multipliers
            );
        }
        Ok(drive)
    }

    pub fn preset(preset: DrivePreset, num_sites: usize, base_frequency: f64) -> Result<Self> {
        if num_sites < 2 {
            return Err(Error::UnsupportedLength(num_sites));
        }
        Self::new(base_frequency, preset.multipliers(num_sites - 1))
    }

    pub fn uniform(num_sites: usize, base_frequency: f64) -> Result<Self> {
        Self::preset(DrivePreset::Uniform, num_sites, base_frequency)
    }

    /// Same multipliers at a different base frequency.
    pub fn with_base_frequency(&self, base_frequency: f64) -> Result<Self> {
        if !(base_frequency > 0.0 && base_frequency.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "base frequency {base_frequency} must be positive"
            )));
        }
        Ok(Self {
            base_frequency,
            multipliers: self.multipliers.clone(),
        })
    }

    /// Multipliers relabeled under `j → L + 1 - j`.
    pub fn mirrored(&self) -> Self {
        Self {
            base_frequency: self.base_frequency,
            multipliers: self.multipliers.iter().rev().copied().collect(),
        }
    }

    pub fn base_frequency(&self) -> f64 {
        self.base_frequency
    }

    pub fn multipliers(&self) -> &[u32] {
        &self.multipliers
    }

    pub fn num_bonds(&self) -> usize {
        self.multipliers.len()
    }

    pub fn period(&self) -> f64 {
        TAU / self.base_frequency
    }

    /// `k_b Ω` for 1-based bond `b`.
    pub fn bond_frequency(&self, bond: usize) -> Result<f64> {
        bond.checked_sub(1)
            .and_then(|i| self.multipliers.get(i))
            .map(|&k| k as f64 * self.base_frequency)
            .ok_or(Error::BondOutOfRange {
                bond,
                max: self.multipliers.len(),
            })
    }

    pub fn beyond_two_tone(&self) -> bool {
        self.multipliers.iter().any(|&k| k > 2)
    }

    pub(crate) fn check_lattice(&self, cfg: &LatticeConfig) -> Result<()> {
        if self.multipliers.len() != cfg.num_bonds() {
            return Err(Error::InvalidParameter(format!(
                "drive declares {} bonds but the chain has {}",
                self.multipliers.len(),
                cfg.num_bonds()
            )));
        }
        Ok(())
    }

    /// `cos(k_b Ω t)` per bond, with the phase reduced modulo the period so
    /// that `t` and `t + T` give identical coefficients.
    pub fn modulations(&self, t: f64) -> Vec<f64> {
        let period = self.period();
        let reduced = t.rem_euclid(period);
        let phase = self.base_frequency * reduced;
        self.multipliers
            .iter()
            .map(|&k| (k as f64 * phase).cos())
            .collect()
    }
}

fn bond_check(cfg: &LatticeConfig, bond: usize) -> Result<()> {
    if bond == 0 || bond > cfg.num_bonds() {
        Err(Error::BondOutOfRange {
            bond,
            max: cfg.num_bonds(),
        })
    } else {
        Ok(())
    }
}

/// Lab-frame Hamiltonian at time `t`.
pub fn hamiltonian_at(t: f64, cfg: &LatticeConfig, drive: &DriveAssignment) -> Result<SparsePauliOperator> {
    cfg.validate()?;
    drive.check_lattice(cfg)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time {t} is negative")));
    }
    let mut op = SparsePauliOperator::new(cfg.num_sites)?;
    for site in 1..=cfg.num_sites {
        op = op.with_term(C64::new(cfg.field, 0.0), [(site, PauliAction::Z)])?;
    }
    for (b, m) in drive.modulations(t).into_iter().enumerate() {
        let bond = b + 1;
        op = op.with_term(
            C64::new(cfg.coupling * m, 0.0),
            [(bond, PauliAction::X), (bond + 1, PauliAction::X)],
        )?;
    }
    Ok(op)
}

/// Dense-vector form of `H(t)` used by the propagation kernels: a static
/// diagonal plus one `σ^x σ^x` bit-flip per bond.
#[derive(Debug, Clone)]
pub struct DrivenChain {
    pub(crate) cfg: LatticeConfig,
    pub(crate) drive: DriveAssignment,
    pub(crate) diagonal: Vec<f64>,
}

impl DrivenChain {
    pub fn new(cfg: &LatticeConfig, drive: &DriveAssignment) -> Result<Self> {
        cfg.validate()?;
        drive.check_lattice(cfg)?;
        let l = cfg.num_sites;
        let diagonal = (0..cfg.dim())
            .map(|i: usize| {
                let up = i.count_ones() as f64;
                cfg.field * (2.0 * up - l as f64)
            })
            .collect();
        Ok(Self {
            cfg: *cfg,
            drive: drive.clone(),
            diagonal,
        })
    }

    pub fn lattice(&self) -> &LatticeConfig {
        &self.cfg
    }

    pub fn drive(&self) -> &DriveAssignment {
        &self.drive
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Bond coefficients `J0 cos(k_b Ω t)`.
    pub fn bond_coefficients(&self, t: f64) -> Vec<f64> {
        self.drive
            .modulations(t)
            .into_iter()
            .map(|m| self.cfg.coupling * m)
            .collect()
    }

    /// Upper bound on `‖H(t)‖` valid for every `t`.
    pub fn norm_bound(&self) -> f64 {
        self.cfg.num_sites as f64 * self.cfg.field + self.cfg.num_bonds() as f64 * self.cfg.coupling
    }

    /// `H(t) |ψ⟩`.
    pub fn apply(&self, t: f64, state: &StateVector) -> Result<StateVector> {
        check_dims(self.dim(), state.dim())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply_block_into(&self.bond_coefficients(t), state.amplitudes(), &mut out, 1, &Sector::full(self.dim()));
        StateVector::from_amplitudes(out)
    }

    /// `out = H V` for a block of `width` states stored row-major as
    /// `[row][state]`, where the rows enumerate `sector`. Row `i` receives
    /// `d_i V_i + Σ_b c_b V_{i ^ m_b}` with `m_b` the bit mask of bond `b`.
    pub(crate) fn apply_block_into(
        &self,
        coeffs: &[f64],
        v: &[C64],
        out: &mut [C64],
        width: usize,
        sector: &Sector,
    ) {
        let active: Vec<(usize, f64)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(b, &c)| (0b11usize << b, c))
            .collect();
        for (r, orow) in out.chunks_exact_mut(width).enumerate() {
            let i = sector.rows[r];
            let d = self.diagonal[i];
            let vrow = &v[r * width..(r + 1) * width];
            for (o, &x) in orow.iter_mut().zip(vrow) {
                o.re = d * x.re;
                o.im = d * x.im;
            }
            for &(mask, c) in &active {
                let j = sector.position[i ^ mask];
                axpy_real(c, &v[j * width..(j + 1) * width], orow);
            }
        }
    }
}

/// Basis states closed under every bond flip: the whole space or one
/// eigenspace of the parity `Π_j σ^z_j`.
#[derive(Debug, Clone)]
pub(crate) struct Sector {
    /// Basis index of each compact row.
    pub(crate) rows: Vec<usize>,
    /// Compact row of each basis index (unused entries are 0).
    pub(crate) position: Vec<usize>,
}

impl Sector {
    pub(crate) fn full(dim: usize) -> Self {
        Self {
            rows: (0..dim).collect(),
            position: (0..dim).collect(),
        }
    }

    /// States with `popcount(index) ≡ parity (mod 2)`; bond flips change two
    /// bits and stay inside.
    pub(crate) fn parity(dim: usize, parity: u32) -> Self {
        let rows: Vec<usize> = (0..dim).filter(|i| i.count_ones() % 2 == parity).collect();
        let mut position = vec![0; dim];
        for (r, &i) in rows.iter().enumerate() {
            position[i] = r;
        }
        Self { rows, position }
    }

    pub(crate) fn len(&self) -> usize {
        self.rows.len()
    }
}

#[inline(always)]
fn axpy_real(c: f64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        yi.re += c * xi.re;
        yi.im += c * xi.im;
    }
}

/// Rotating-frame operator type on a bond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermKind {
    /// `σ⁺_j σ⁺_{j+1}`
    PairCreate,
    /// `σ⁻_j σ⁻_{j+1}`
    PairAnnihilate,
    /// `σ⁺_j σ⁻_{j+1}` (`raising_left`) or `σ⁻_j σ⁺_{j+1}`.
    FlipFlop { raising_left: bool },
}

impl TermKind {
    fn actions(self) -> (PauliAction, PauliAction) {
        use PauliAction::{Lower, Raise};
        match self {
            Self::PairCreate => (Raise, Raise),
            Self::PairAnnihilate => (Lower, Lower),
            Self::FlipFlop { raising_left: true } => (Raise, Lower),
            Self::FlipFlop {
                raising_left: false,
            } => (Lower, Raise),
        }
    }

    const ALL: [TermKind; 4] = [
        TermKind::PairCreate,
        TermKind::PairAnnihilate,
        TermKind::FlipFlop { raising_left: true },
        TermKind::FlipFlop {
            raising_left: false,
        },
    ];
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PairCreate => "pair-create",
            Self::PairAnnihilate => "pair-annihilate",
            Self::FlipFlop { .. } => "flip-flop",
        })
    }
}

/// One rotating-frame term `J0 cos(ω_d t) e^{i ω_p t} O_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub bond: usize,
    pub kind: TermKind,
    /// `ω_p`, from the rotation by `g Σ σ^z`.
    pub phase_frequency: f64,
    /// `ω_d = k_b Ω`.
    pub drive_frequency: f64,
    pub amplitude: f64,
}

impl InteractionTerm {
    /// Bare bond operator `O_b`, unit coefficient.
    pub fn operator(&self, num_sites: usize) -> Result<SparsePauliOperator> {
        let (left, right) = self.kind.actions();
        SparsePauliOperator::new(num_sites)?
            .with_term(C64::new(1.0, 0.0), [(self.bond, left), (self.bond + 1, right)])
    }

    /// Value of the scalar prefactor at time `t`.
    pub fn prefactor(&self, t: f64) -> C64 {
        self.amplitude * (self.drive_frequency * t).cos() * C64::from_polar(1.0, self.phase_frequency * t)
    }
}

/// Rotating-frame decomposition of `H(t) - g Σ σ^z`: four terms per bond.
pub fn interaction_picture_terms(cfg: &LatticeConfig, drive: &DriveAssignment) -> Result<Vec<InteractionTerm>> {
    cfg.validate()?;
    drive.check_lattice(cfg)?;
    let mut terms = Vec::with_capacity(4 * cfg.num_bonds());
    for bond in 1..=cfg.num_bonds() {
        let drive_frequency = drive.bond_frequency(bond)?;
        for kind in TermKind::ALL {
            // σ⁺ picks up e^{+2igt} under e^{iH0 t} · e^{-iH0 t}, σ⁻ the conjugate.
            let (l, r) = kind.actions();
            let charge = [l, r]
                .iter()
                .map(|a| match a {
                    PauliAction::Raise => 1.0,
                    PauliAction::Lower => -1.0,
                    _ => 0.0,
                })
                .sum::<f64>();
            terms.push(InteractionTerm {
                bond,
                kind,
                phase_frequency: 2.0 * cfg.field * charge,
                drive_frequency,
                amplitude: cfg.coupling,
            });
        }
    }
    Ok(terms)
}

/// Classification of one frequency component `e^{iωt}` over a period.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Component {
    Resonant,
    Vanishing,
    Residual(C64),
}

fn classify_component(omega: f64, cfg: &LatticeConfig, drive: &DriveAssignment) -> Result<Component> {
    let g = cfg.field;
    if omega.abs() <= RESONANCE_TOLERANCE * g {
        return Ok(Component::Resonant);
    }
    if omega.abs() < NEAR_RESONANCE_BAND * g {
        return Err(Error::IncommensurateDrive(format!(
            "frequency component detuned by {omega:.3e} g from resonance"
        )));
    }
    let cycles = omega / drive.base_frequency();
    if (cycles - cycles.round()).abs() <= RESONANCE_TOLERANCE {
        return Ok(Component::Vanishing);
    }
    Ok(Component::Residual(period_average(omega, drive.period())))
}

/// `(1/T) ∫_0^T e^{iωt} dt` in closed form.
pub fn period_average(omega: f64, period: f64) -> C64 {
    if omega == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let x = omega * period;
    (C64::from_polar(1.0, x) - 1.0) / C64::new(0.0, x)
}

/// One-period average of a rotating-frame term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermAverage {
    pub term: InteractionTerm,
    /// `(1/T) ∫_0^T J0 cos(ω_d t) e^{iω_p t} dt`.
    pub average: C64,
    /// Part of `average` carried by exactly resonant components.
    pub secular: C64,
}

impl TermAverage {
    /// Non-secular remainder of the one-period average.
    pub fn residual(&self) -> C64 {
        self.average - self.secular
    }
}

/// Closed-form one-period averages of every rotating-frame term, using
/// `cos(at) e^{ibt} = ½ (e^{i(b+a)t} + e^{i(b-a)t})`.
pub fn term_averages(cfg: &LatticeConfig, drive: &DriveAssignment) -> Result<Vec<TermAverage>> {
    let terms = interaction_picture_terms(cfg, drive)?;
    terms
        .into_iter()
        .map(|term| {
            let half = 0.5 * term.amplitude;
            let mut average = C64::new(0.0, 0.0);
            let mut secular = C64::new(0.0, 0.0);
            for omega in [
                term.phase_frequency + term.drive_frequency,
                term.phase_frequency - term.drive_frequency,
            ] {
                match classify_component(omega, cfg, drive)? {
                    Component::Resonant => {
                        average += half;
                        secular += half;
                    }
                    Component::Vanishing => {}
                    Component::Residual(r) => average += half * r,
                }
            }
            let residual = (average - secular).norm();
            if term.amplitude > 0.0
                && residual > RESONANCE_TOLERANCE * term.amplitude
                && residual < NEAR_RESONANCE_BAND * term.amplitude
            {
                return Err(Error::IncommensurateDrive(format!(
                    "bond {} {} term has an ambiguous period average {residual:.3e}",
                    term.bond, term.kind
                )));
            }
            Ok(TermAverage {
                term,
                average,
                secular,
            })
        })
        .collect()
}

/// Zeroth-order Magnus (period-averaged, rotating-frame) Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    num_sites: usize,
    coupling: f64,
    pair_bonds: Vec<usize>,
    flipflop_bonds: Vec<usize>,
    residuals: Vec<TermAverage>,
}

impl EffectiveHamiltonian {
    /// Explicit construction from bond sets; coefficients are `J0/2`.
    pub fn from_bonds(
        cfg: &LatticeConfig,
        pair_bonds: Vec<usize>,
        flipflop_bonds: Vec<usize>,
    ) -> Result<Self> {
        for &b in pair_bonds.iter().chain(&flipflop_bonds) {
            bond_check(cfg, b)?;
        }
        Ok(Self {
            num_sites: cfg.num_sites,
            coupling: cfg.coupling,
            pair_bonds,
            flipflop_bonds,
            residuals: Vec::new(),
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn pair_bonds(&self) -> &[usize] {
        &self.pair_bonds
    }

    pub fn flipflop_bonds(&self) -> &[usize] {
        &self.flipflop_bonds
    }

    /// Non-secular one-period averages left over by incommensurate drives.
    pub fn residuals(&self) -> &[TermAverage] {
        &self.residuals
    }

    pub fn is_empty(&self) -> bool {
        self.pair_bonds.is_empty() && self.flipflop_bonds.is_empty()
    }

    pub fn coefficient(&self) -> f64 {
        0.5 * self.coupling
    }

    /// `(J0/2) Σ (σ⁺σ⁺ + σ⁻σ⁻)` on pair bonds plus `(J0/2) Σ (σ⁺σ⁻ + σ⁻σ⁺)` on
    /// flip-flop bonds.
    pub fn operator(&self) -> Result<SparsePauliOperator> {
        use PauliAction::{Lower, Raise};
        let c = C64::new(self.coefficient(), 0.0);
        let mut op = SparsePauliOperator::new(self.num_sites)?;
        for &b in &self.pair_bonds {
            op = op
                .with_term(c, [(b, Raise), (b + 1, Raise)])?
                .with_term(c, [(b, Lower), (b + 1, Lower)])?;
        }
        for &b in &self.flipflop_bonds {
            op = op
                .with_term(c, [(b, Raise), (b + 1, Lower)])?
                .with_term(c, [(b, Lower), (b + 1, Raise)])?;
        }
        Ok(op)
    }
}

/// Zeroth-order Magnus term of the rotating-frame Hamiltonian. A bond keeps
/// its pair term iff `k_b Ω = 4g` and its flip-flop term iff `k_b Ω = 0`.
pub fn magnus_zeroth(cfg: &LatticeConfig, drive: &DriveAssignment) -> Result<EffectiveHamiltonian> {
    let averages = term_averages(cfg, drive)?;
    let mut pair_bonds = Vec::new();
    let mut flipflop_bonds = Vec::new();
    let mut residuals = Vec::new();
    for avg in averages {
        let resonant = avg.secular.norm() > 0.0;
        match avg.term.kind {
            TermKind::PairCreate if resonant => pair_bonds.push(avg.term.bond),
            TermKind::FlipFlop { raising_left: true } if resonant => {
                flipflop_bonds.push(avg.term.bond)
            }
            _ => {}
        }
        if avg.residual().norm() > 0.0 {
            residuals.push(avg);
        }
    }
    Ok(EffectiveHamiltonian {
        num_sites: cfg.num_sites,
        coupling: cfg.coupling,
        pair_bonds,
        flipflop_bonds,
        residuals,
    })
}

/// `⟨ψ_a|H_eff|ψ_b⟩` on a two-state basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelMatrix {
    pub elements: [[C64; 2]; 2],
    /// False when the off-diagonal elements vanish.
    pub coupled: bool,
}

pub fn two_level_matrix(
    eff: &EffectiveHamiltonian,
    basis: (&StateVector, &StateVector),
) -> Result<TwoLevelMatrix> {
    let op = eff.operator()?;
    let states = [basis.0, basis.1];
    let images = [op.apply(basis.0)?, op.apply(basis.1)?];
    let mut elements = [[C64::new(0.0, 0.0); 2]; 2];
    for (a, bra) in states.iter().enumerate() {
        for (b, ket) in images.iter().enumerate() {
            elements[a][b] = inner_product(bra, ket)?;
        }
    }
    let coupled = elements[0][1].norm() > 0.0 || elements[1][0].norm() > 0.0;
    if !coupled {
        log::warn!("effective Hamiltonian does not couple the chosen two-level basis");
    }
    Ok(TwoLevelMatrix { elements, coupled })
}
