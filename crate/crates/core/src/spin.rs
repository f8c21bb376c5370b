//! Computational basis bookkeeping for a chain of spin-1/2 sites.
//!
//! Site `j` (1-based) is stored in bit `j - 1` of the basis index, with
//! spin-down as bit 0. The all-down product state is therefore index 0.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest chain handled with dense amplitude storage.
pub const MAX_SITES: usize = 14;

pub(crate) fn check_length(len: usize) -> Result<()> {
    if (1..=MAX_SITES).contains(&len) {
        Ok(())
    } else {
        Err(Error::UnsupportedLength(len))
    }
}

/// z-eigenvalues `m_j = ±1` for every site of the chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        check_length(spins.len())?;
        if let Some(bad) = spins.iter().find(|&&m| m != 1 && m != -1) {
            return Err(Error::InvalidParameter(format!(
                "spin value {bad} is not +1 or -1"
            )));
        }
        Ok(Self(spins))
    }

    pub fn all_down(len: usize) -> Result<Self> {
        Self::new(vec![-1; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `m_j` for 1-based site `j`.
    pub fn spin(&self, site: usize) -> Result<i8> {
        site.checked_sub(1)
            .and_then(|i| self.0.get(i).copied())
            .ok_or(Error::SiteOutOfRange {
                site,
                len: self.0.len(),
            })
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }
}

impl fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &m in &self.0 {
            f.write_str(if m > 0 { "↑" } else { "↓" })?;
        }
        Ok(())
    }
}

/// Index of `config` in a basis of `len` sites: `Σ_j b_j 2^(j-1)`, `b_j = (1 + m_j)/2`.
pub fn basis_index(config: &SpinConfiguration, len: usize) -> Result<usize> {
    if config.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: config.len(),
        });
    }
    Ok(config
        .0
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .fold(0usize, |acc, (bit, _)| acc | (1 << bit)))
}

pub fn index_to_config(index: usize, len: usize) -> Result<SpinConfiguration> {
    check_length(len)?;
    if index >= 1 << len {
        return Err(Error::InvalidParameter(format!(
            "basis index {index} out of range for {len} sites"
        )));
    }
    Ok(SpinConfiguration(
        (0..len)
            .map(|bit| if index >> bit & 1 == 1 { 1 } else { -1 })
            .collect(),
    ))
}

/// Dense amplitude vector over the `2^L` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_sites: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        let num_sites = dim.trailing_zeros() as usize;
        check_length(num_sites)?;
        Ok(Self { num_sites, amps })
    }

    pub fn basis(num_sites: usize, index: usize) -> Result<Self> {
        check_length(num_sites)?;
        let dim = 1usize << num_sites;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {num_sites} sites"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { num_sites, amps })
    }

    /// `|↓↓…↓⟩`, the initial state of every experiment here.
    pub fn all_down(num_sites: usize) -> Result<Self> {
        Self::basis(num_sites, 0)
    }

    pub fn from_config(config: &SpinConfiguration) -> Result<Self> {
        Self::basis(config.len(), basis_index(config, config.len())?)
    }

    pub fn zeros(num_sites: usize) -> Result<Self> {
        check_length(num_sites)?;
        Ok(Self {
            num_sites,
            amps: vec![C64::new(0.0, 0.0); 1 << num_sites],
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero state".into()));
        }
        self.amps.iter_mut().for_each(|a| *a /= n);
        Ok(self)
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        self.amps.iter_mut().for_each(|a| *a *= factor);
        self
    }

    /// `self + factor * other`.
    pub fn add_scaled(mut self, factor: C64, other: &StateVector) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        self.amps
            .iter_mut()
            .zip(&other.amps)
            .for_each(|(a, b)| *a += factor * b);
        Ok(self)
    }

    /// Probability of basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps.get(index).map_or(0.0, |a| a.norm_sqr())
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// `⟨a|b⟩`, antilinear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Single-site operator acting in a Pauli term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAction {
    Identity,
    X,
    Z,
    /// `σ⁺ = |↑⟩⟨↓|`
    Raise,
    /// `σ⁻ = |↓⟩⟨↑|`
    Lower,
}

impl PauliAction {
    pub fn adjoint(self) -> Self {
        match self {
            Self::Raise => Self::Lower,
            Self::Lower => Self::Raise,
            other => other,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Self::Identity => "I",
            Self::X => "X",
            Self::Z => "Z",
            Self::Raise => "+",
            Self::Lower => "-",
        }
    }
}

/// Coefficient times a tensor product of single-site actions. Sites not in
/// the map carry the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub sites: BTreeMap<usize, PauliAction>,
}

impl PauliTerm {
    pub fn new(coeff: C64, actions: impl IntoIterator<Item = (usize, PauliAction)>) -> Self {
        let sites = actions
            .into_iter()
            .filter(|(_, a)| *a != PauliAction::Identity)
            .collect();
        Self { coeff, sites }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coeff: self.coeff.conj(),
            sites: self.sites.iter().map(|(&s, a)| (s, a.adjoint())).collect(),
        }
    }

    /// Bit masks describing the action on a basis index.
    fn masks(&self) -> TermMasks {
        let mut m = TermMasks::default();
        for (&site, &action) in &self.sites {
            let bit = 1usize << (site - 1);
            match action {
                PauliAction::Identity => {}
                PauliAction::X => m.flip |= bit,
                PauliAction::Z => m.sign |= bit,
                PauliAction::Raise => {
                    m.flip |= bit;
                    m.need_mask |= bit;
                }
                PauliAction::Lower => {
                    m.flip |= bit;
                    m.need_mask |= bit;
                    m.need_value |= bit;
                }
            }
        }
        m
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct TermMasks {
    flip: usize,
    /// σ^z sites: factor `+1` on up (bit set), `-1` on down.
    sign: usize,
    /// Ladder operators annihilate inputs whose bits under `need_mask`
    /// differ from `need_value`.
    need_mask: usize,
    need_value: usize,
}

/// Sum of Pauli terms on a chain of `num_sites` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePauliOperator {
    num_sites: usize,
    terms: Vec<PauliTerm>,
}

impl SparsePauliOperator {
    pub fn new(num_sites: usize) -> Result<Self> {
        check_length(num_sites)?;
        Ok(Self {
            num_sites,
            terms: Vec::new(),
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if let Some(&site) = term
            .sites
            .keys()
            .find(|&&s| s == 0 || s > self.num_sites)
        {
            return Err(Error::SiteOutOfRange {
                site,
                len: self.num_sites,
            });
        }
        self.terms.push(term);
        Ok(())
    }

    pub fn with_term(
        mut self,
        coeff: C64,
        actions: impl IntoIterator<Item = (usize, PauliAction)>,
    ) -> Result<Self> {
        self.push(PauliTerm::new(coeff, actions))?;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            num_sites: self.num_sites,
            terms: self.terms.iter().map(PauliTerm::adjoint).collect(),
        }
    }

    /// Exact linear action on `state`; the result is not normalized.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_dims(1 << self.num_sites, state.dim())?;
        let mut out = vec![C64::new(0.0, 0.0); state.dim()];
        for term in &self.terms {
            let m = term.masks();
            for (i, &amp) in state.amps.iter().enumerate() {
                if i & m.need_mask != m.need_value {
                    continue;
                }
                let neg = ((!i & m.sign).count_ones() & 1) == 1;
                let v = term.coeff * amp;
                out[i ^ m.flip] += if neg { -v } else { v };
            }
        }
        StateVector::from_amplitudes(out)
    }

    /// Dense row-major matrix, for small chains.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let dim = 1usize << self.num_sites;
        let mut mat = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        for term in &self.terms {
            let m = term.masks();
            for col in 0..dim {
                if col & m.need_mask != m.need_value {
                    continue;
                }
                let neg = ((!col & m.sign).count_ones() & 1) == 1;
                let v = if neg { -term.coeff } else { term.coeff };
                mat[col ^ m.flip][col] += v;
            }
        }
        mat
    }
}

impl fmt::Display for SparsePauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, term) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", term.coeff.re, term.coeff.im)?;
            for (site, action) in &term.sites {
                write!(f, " {}{}", action.symbol(), site)?;
            }
        }
        Ok(())
    }
}

/// `op |state⟩`.
pub fn apply_operator(op: &SparsePauliOperator, state: &StateVector) -> Result<StateVector> {
    op.apply(state)
}
