//! Bare bases, mode operators and the system Hamiltonian.
//!
//! Each mode is a truncated anharmonic oscillator
//! `H_l = ω_l n_l + (α_l / 2) n_l (n_l − 1)`. Two qubit modes either couple
//! directly through `g (q_a† q_b + h.c.)` or both couple to a harmonic bus
//! resonator. Only excitation-conserving terms are kept.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Complex64, Error, Result};

pub(crate) const MHZ_PER_GHZ: f64 = 1000.0;

/// One anharmonic oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    /// Linear frequency ν = ω/2π in GHz.
    pub freq_ghz: f64,
    /// Signed anharmonicity α/2π in MHz. Negative for a transmon, positive for
    /// a C-shunt flux qubit.
    pub anharm_mhz: f64,
    /// Number of retained levels.
    pub levels: usize,
}

impl ModeSpec {
    pub fn new(freq_ghz: f64, anharm_mhz: f64) -> Self {
        Self { freq_ghz, anharm_mhz, levels: 3 }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_ghz.is_finite() && self.freq_ghz > 0.0) {
            return Err(Error::InvalidParameter(format!("mode frequency must be positive, got {} GHz", self.freq_ghz)));
        }
        if !self.anharm_mhz.is_finite() {
            return Err(Error::InvalidParameter("anharmonicity must be finite".into()));
        }
        if self.levels < 3 {
            return Err(Error::InvalidDimension(format!("a qubit mode needs at least 3 levels, got {}", self.levels)));
        }
        Ok(())
    }
}

/// How the two qubit modes talk to each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSpec {
    Direct { g_mhz: f64 },
    ViaResonator { freq_ghz: f64, g_a_mhz: f64, g_b_mhz: f64, levels: usize },
}

impl CouplingSpec {
    /// Bus defaults used when a resonator topology is requested without parameters.
    pub const DEFAULT_RESONATOR_GHZ: f64 = 6.5;
    pub const DEFAULT_RESONATOR_G_MHZ: f64 = 60.0;

    pub fn resonator_default() -> Self {
        CouplingSpec::ViaResonator {
            freq_ghz: Self::DEFAULT_RESONATOR_GHZ,
            g_a_mhz: Self::DEFAULT_RESONATOR_G_MHZ,
            g_b_mhz: Self::DEFAULT_RESONATOR_G_MHZ,
            levels: 3,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CouplingSpec::Direct { g_mhz } => {
                if !g_mhz.is_finite() {
                    return Err(Error::InvalidParameter("coupling g must be finite".into()));
                }
            }
            CouplingSpec::ViaResonator { freq_ghz, g_a_mhz, g_b_mhz, levels } => {
                if !(g_a_mhz.is_finite() && g_b_mhz.is_finite()) {
                    return Err(Error::InvalidParameter("resonator couplings must be finite".into()));
                }
                if !(freq_ghz.is_finite() && freq_ghz > 0.0) {
                    return Err(Error::InvalidParameter("resonator frequency must be positive".into()));
                }
                if levels < 2 {
                    return Err(Error::InvalidDimension(format!("resonator needs at least 2 levels, got {levels}")));
                }
            }
        }
        Ok(())
    }
}

/// Two qubit modes plus their coupling topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub mode_a: ModeSpec,
    pub mode_b: ModeSpec,
    pub coupling: CouplingSpec,
}

impl DeviceSpec {
    pub fn direct(mode_a: ModeSpec, mode_b: ModeSpec, g_mhz: f64) -> Self {
        Self { mode_a, mode_b, coupling: CouplingSpec::Direct { g_mhz } }
    }

    pub fn validate(&self) -> Result<()> {
        self.mode_a.validate()?;
        self.mode_b.validate()?;
        self.coupling.validate()
    }

    /// Mode dimensions, qubit a first. A resonator, when present, is the last mode.
    pub fn dims(&self) -> Vec<usize> {
        match self.coupling {
            CouplingSpec::Direct { .. } => vec![self.mode_a.levels, self.mode_b.levels],
            CouplingSpec::ViaResonator { levels, .. } => vec![self.mode_a.levels, self.mode_b.levels, levels],
        }
    }

    pub fn dimension(&self) -> usize {
        self.dims().iter().product()
    }

    /// Qubit detuning Δ/2π = ν_a − ν_b in MHz.
    pub fn detuning_mhz(&self) -> f64 {
        (self.mode_a.freq_ghz - self.mode_b.freq_ghz) * MHZ_PER_GHZ
    }

    /// Anharmonicity asymmetry δ_α = |α_b| − |α_a| in MHz.
    pub fn asymmetry_mhz(&self) -> f64 {
        self.mode_b.anharm_mhz.abs() - self.mode_a.anharm_mhz.abs()
    }

    /// Copy with mode a moved to `freq_ghz`.
    pub fn with_freq_a(mut self, freq_ghz: f64) -> Self {
        self.mode_a.freq_ghz = freq_ghz;
        self
    }

    /// Copy with |α_a| = |α_b| − δ_α, keeping the sign of α_a.
    pub fn with_asymmetry_on_a(mut self, delta_alpha_mhz: f64) -> Self {
        let sign = if self.mode_a.anharm_mhz < 0.0 { -1.0 } else { 1.0 };
        self.mode_a.anharm_mhz = sign * (self.mode_b.anharm_mhz.abs() - delta_alpha_mhz);
        self
    }

    /// Copy with |α_b| = |α_a| + δ_α, keeping the sign of α_b.
    pub fn with_asymmetry_on_b(mut self, delta_alpha_mhz: f64) -> Self {
        let sign = if self.mode_b.anharm_mhz < 0.0 { -1.0 } else { 1.0 };
        self.mode_b.anharm_mhz = sign * (self.mode_a.anharm_mhz.abs() + delta_alpha_mhz);
        self
    }

    pub fn has_resonator(&self) -> bool {
        matches!(self.coupling, CouplingSpec::ViaResonator { .. })
    }
}

/// Occupation numbers of a bare product state, qubit a first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BareLabel(pub Vec<usize>);

impl BareLabel {
    /// Two-qubit label with every further mode (the resonator) in its ground state.
    pub fn qubits(na: usize, nb: usize, dims: &[usize]) -> Self {
        let mut occ = vec![0; dims.len()];
        occ[0] = na;
        occ[1] = nb;
        BareLabel(occ)
    }

    /// Linear index with mode a most significant.
    pub fn index(&self, dims: &[usize]) -> usize {
        self.0.iter().zip(dims).fold(0, |acc, (&n, &d)| acc * d + n)
    }

    pub fn from_index(mut index: usize, dims: &[usize]) -> Self {
        let mut occ = vec![0; dims.len()];
        for (slot, &d) in occ.iter_mut().zip(dims).rev() {
            *slot = index % d;
            index /= d;
        }
        BareLabel(occ)
    }

    pub fn excitations(&self) -> usize {
        self.0.iter().sum()
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.0 {
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Truncated annihilation operator with `⟨n−1|q|n⟩ = √n`.
pub fn lowering_operator(levels: usize) -> Result<DMatrix<Complex64>> {
    if levels < 2 {
        return Err(Error::InvalidDimension(format!("lowering operator needs at least 2 levels, got {levels}")));
    }
    let mut q = DMatrix::zeros(levels, levels);
    for n in 1..levels {
        q[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(q)
}

/// Bare energy of level `n` in GHz: `ν n + (α/2) n (n − 1)`.
pub fn bare_energy(mode: &ModeSpec, n: usize) -> Result<f64> {
    if n >= mode.levels {
        return Err(Error::LevelOutOfRange { n, levels: mode.levels });
    }
    let n = n as f64;
    Ok(mode.freq_ghz * n + 0.5 * (mode.anharm_mhz / MHZ_PER_GHZ) * n * (n - 1.0))
}

/// Full Hamiltonian in rad/ns. `freq_override_a` replaces mode a's frequency,
/// which is how a flux pulse enters the propagation.
pub fn build_hamiltonian(device: &DeviceSpec, freq_override_a: Option<f64>) -> Result<DMatrix<Complex64>> {
    device.validate()?;
    let mut mode_a = device.mode_a;
    if let Some(f) = freq_override_a {
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::InvalidParameter(format!("override frequency must be positive, got {f} GHz")));
        }
        mode_a.freq_ghz = f;
    }
    let dims = device.dims();
    let dim: usize = dims.iter().product();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);

    for idx in 0..dim {
        let label = BareLabel::from_index(idx, &dims);
        let mut e = bare_energy(&mode_a, label.0[0])? + bare_energy(&device.mode_b, label.0[1])?;
        if let CouplingSpec::ViaResonator { freq_ghz, .. } = device.coupling {
            e += freq_ghz * label.0[2] as f64;
        }
        h[(idx, idx)] = Complex64::new(TAU * e, 0.0);
    }

    match device.coupling {
        CouplingSpec::Direct { g_mhz } => add_exchange(&mut h, &dims, 0, 1, TAU * g_mhz / MHZ_PER_GHZ),
        CouplingSpec::ViaResonator { g_a_mhz, g_b_mhz, .. } => {
            add_exchange(&mut h, &dims, 0, 2, TAU * g_a_mhz / MHZ_PER_GHZ);
            add_exchange(&mut h, &dims, 1, 2, TAU * g_b_mhz / MHZ_PER_GHZ);
        }
    }
    Ok(h)
}

/// Adds `c (q_i† q_j + q_j† q_i)` between modes `i` and `j`.
fn add_exchange(h: &mut DMatrix<Complex64>, dims: &[usize], i: usize, j: usize, c: f64) {
    if c == 0.0 {
        return;
    }
    let dim = h.nrows();
    for col in 0..dim {
        let from = BareLabel::from_index(col, dims);
        // q_i† q_j |.., n_i, .., n_j, ..> = sqrt((n_i+1) n_j) |.., n_i+1, .., n_j−1, ..>
        if from.0[j] == 0 || from.0[i] + 1 >= dims[i] {
            continue;
        }
        let amp = ((from.0[i] + 1) as f64 * from.0[j] as f64).sqrt() * c;
        let mut to = from.clone();
        to.0[i] += 1;
        to.0[j] -= 1;
        let row = to.index(dims);
        h[(row, col)] += Complex64::new(amp, 0.0);
        h[(col, row)] += Complex64::new(amp, 0.0);
    }
}
