//! Labeled spectra and the static ZZ interaction.
//!
//! Eigenstates are tagged with the bare product state they overlap most with,
//! using an optimal one-to-one assignment inside each excitation block so the
//! labeling stays a bijection through avoided crossings.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{blocks, eigh, hungarian, max_abs, submatrix};
use crate::model::{build_hamiltonian, BareLabel, CouplingSpec, DeviceSpec, MHZ_PER_GHZ};
use crate::{Complex64, Error, Result};

/// Overlap² gap below which a label is considered resolved by tie-break.
pub const DEGENERACY_GAP: f64 = 1e-6;

/// Weight of the lower-energy preference relative to total overlap².
const TIE_BREAK_WEIGHT: f64 = 1e-9;

/// Closest distance (MHz) to a pole of the closed-form ZZ expressions.
pub const POLE_TOLERANCE_MHZ: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct LabeledState {
    pub label: BareLabel,
    pub energy_ghz: f64,
    pub vector: DVector<Complex64>,
    /// |⟨label|vector⟩|².
    pub overlap_sq: f64,
    /// Difference between the two largest overlaps² of this bare state with
    /// any eigenvector. Near zero means the label was decided by tie-break.
    pub tie_gap: f64,
    /// Set when the best overlap² is below 1/2.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub dims: Vec<usize>,
    /// One entry per bare state, in linear-index order.
    pub entries: Vec<LabeledState>,
}

impl LabeledSpectrum {
    pub fn state(&self, label: &BareLabel) -> &LabeledState {
        &self.entries[label.index(&self.dims)]
    }

    /// Dressed state |~ij> with every other mode in its ground state.
    pub fn qubit_state(&self, na: usize, nb: usize) -> &LabeledState {
        self.state(&BareLabel::qubits(na, nb, &self.dims))
    }

    pub fn ambiguous_labels(&self) -> impl Iterator<Item = &LabeledState> {
        self.entries.iter().filter(|e| e.ambiguous)
    }
}

/// Diagonalizes `h` (rad/ns) and labels every eigenpair by maximum overlap.
pub fn eigensolve_labeled(h: &DMatrix<Complex64>, dims: &[usize]) -> Result<LabeledSpectrum> {
    let n = h.nrows();
    if h.ncols() != n || dims.iter().product::<usize>() != n {
        return Err(Error::InvalidDimension(format!(
            "matrix is {}x{} but mode dimensions {:?} multiply to {}",
            h.nrows(),
            h.ncols(),
            dims,
            dims.iter().product::<usize>()
        )));
    }
    let scale = max_abs(h.iter()).max(1.0);
    if max_abs((h - h.adjoint()).iter()) > 1e-12 * scale {
        return Err(Error::InvalidParameter("matrix is not Hermitian".into()));
    }

    let mut entries: Vec<Option<LabeledState>> = vec![None; n];
    for block in blocks(h) {
        let (values, vectors) = eigh(submatrix(h, &block));
        let k = block.len();
        let overlap: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| vectors[(i, j)].norm_sqr()).collect()).collect();

        let spread = values[k - 1] - values[0];
        let cost: Vec<Vec<f64>> = overlap
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &ov)| {
                        let rank = if spread > 0.0 { (values[j] - values[0]) / spread } else { 0.0 };
                        -ov * (1.0 - TIE_BREAK_WEIGHT * rank)
                    })
                    .collect()
            })
            .collect();
        let assignment = hungarian(&cost);

        for (i, &j) in assignment.iter().enumerate() {
            let mut sorted = overlap[i].clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let tie_gap = if k > 1 { sorted[0] - sorted[1] } else { 1.0 };
            let mut vector = DVector::zeros(n);
            for (r, &global) in block.iter().enumerate() {
                vector[global] = vectors[(r, j)];
            }
            let overlap_sq = overlap[i][j];
            entries[block[i]] = Some(LabeledState {
                label: BareLabel::from_index(block[i], dims),
                energy_ghz: values[j] / TAU,
                vector,
                overlap_sq,
                tie_gap,
                ambiguous: overlap_sq < 0.5,
            });
        }
    }
    Ok(LabeledSpectrum { dims: dims.to_vec(), entries: entries.into_iter().map(|e| e.expect("every row assigned")).collect() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZzMethod {
    Numeric,
    Analytic,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZzResult {
    /// Signed ζ/2π in MHz.
    pub zeta_mhz: f64,
    pub method: ZzMethod,
    pub degenerate: bool,
}

/// ζ = (E~11 − E~01) − (E~10 − E~00) from the labeled spectrum of the full Hamiltonian.
pub fn zz_numeric(device: &DeviceSpec) -> Result<ZzResult> {
    let h = build_hamiltonian(device, None)?;
    let spec = eigensolve_labeled(&h, &device.dims())?;
    Ok(zz_from_spectrum(&spec))
}

pub(crate) fn zz_from_spectrum(spec: &LabeledSpectrum) -> ZzResult {
    let s00 = spec.qubit_state(0, 0);
    let s01 = spec.qubit_state(0, 1);
    let s10 = spec.qubit_state(1, 0);
    let s11 = spec.qubit_state(1, 1);
    let zeta_ghz = (s11.energy_ghz - s01.energy_ghz) - (s10.energy_ghz - s00.energy_ghz);
    let degenerate = [s00, s01, s10, s11].iter().any(|s| s.tie_gap < DEGENERACY_GAP);
    ZzResult { zeta_mhz: zeta_ghz * MHZ_PER_GHZ, method: ZzMethod::Numeric, degenerate }
}

fn check_poles(delta: f64, alpha_a: f64, alpha_b: f64) -> Result<()> {
    if (delta + alpha_a).abs() < POLE_TOLERANCE_MHZ {
        return Err(Error::Pole(format!("|11>-|20> resonance: Δ + α_a = {:e} MHz", delta + alpha_a)));
    }
    if (delta - alpha_b).abs() < POLE_TOLERANCE_MHZ {
        return Err(Error::Pole(format!("|11>-|02> resonance: Δ − α_b = {:e} MHz", delta - alpha_b)));
    }
    Ok(())
}

/// Two-avoided-crossing closed form `J (tan(θ_b/2) − tan(θ_a/2))` with
/// `tan θ_a = 2J/(Δ + α_a)`, `tan θ_b = 2J/(Δ − α_b)` and `J = √2 g`.
/// All arguments in MHz, anharmonicities signed.
pub fn zz_analytic(delta_mhz: f64, alpha_a_mhz: f64, alpha_b_mhz: f64, g_mhz: f64) -> Result<ZzResult> {
    check_poles(delta_mhz, alpha_a_mhz, alpha_b_mhz)?;
    let j = 2f64.sqrt() * g_mhz;
    let theta_a = (2.0 * j / (delta_mhz + alpha_a_mhz)).atan();
    let theta_b = (2.0 * j / (delta_mhz - alpha_b_mhz)).atan();
    let zeta = j * ((0.5 * theta_b).tan() - (0.5 * theta_a).tan());
    Ok(ZzResult { zeta_mhz: zeta, method: ZzMethod::Analytic, degenerate: false })
}

/// Second-order limit `J²/(Δ − α_b) − J²/(Δ + α_a)`, `J² = 2g²`.
pub fn zz_perturbative(delta_mhz: f64, alpha_a_mhz: f64, alpha_b_mhz: f64, g_mhz: f64) -> Result<ZzResult> {
    check_poles(delta_mhz, alpha_a_mhz, alpha_b_mhz)?;
    let j2 = 2.0 * g_mhz * g_mhz;
    let zeta = j2 / (delta_mhz - alpha_b_mhz) - j2 / (delta_mhz + alpha_a_mhz);
    Ok(ZzResult { zeta_mhz: zeta, method: ZzMethod::Perturbative, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Δ/2π in MHz, applied by moving mode a.
    DeltaMhz,
    /// δ_α in MHz, applied as |α_b| = |α_a| + δ_α.
    DeltaAlphaMhz,
    /// Direct coupling g/2π in MHz.
    GMhz,
}

impl SweepParam {
    pub fn column(&self) -> &'static str {
        match self {
            SweepParam::DeltaMhz => "delta_mhz",
            SweepParam::DeltaAlphaMhz => "delta_alpha_mhz",
            SweepParam::GMhz => "g_mhz",
        }
    }

    pub fn apply(&self, device: &DeviceSpec, value: f64) -> Result<DeviceSpec> {
        let dev = match self {
            SweepParam::DeltaMhz => device.with_freq_a(device.mode_b.freq_ghz + value / MHZ_PER_GHZ),
            SweepParam::DeltaAlphaMhz => device.with_asymmetry_on_b(value),
            SweepParam::GMhz => match device.coupling {
                CouplingSpec::Direct { .. } => DeviceSpec { coupling: CouplingSpec::Direct { g_mhz: value }, ..*device },
                CouplingSpec::ViaResonator { .. } => {
                    return Err(Error::InvalidGrid("g sweeps need a directly coupled device".into()))
                }
            },
        };
        dev.validate()?;
        Ok(dev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn new(param: SweepParam, start: f64, stop: f64, points: usize) -> Self {
        Self { param, start, stop, points }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidGrid(format!("{} axis has no points", self.param.column())));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidGrid(format!("{} axis bounds must be finite", self.param.column())));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.start + step * k as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZzSweepRow {
    pub params: Vec<f64>,
    pub numeric_mhz: f64,
    /// Absent for resonator-coupled devices; NaN at a pole.
    pub analytic_mhz: Option<f64>,
    pub perturbative_mhz: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZzSweep {
    pub axes: Vec<SweepParam>,
    pub rows: Vec<ZzSweepRow>,
}

/// Grid of all three ZZ evaluators, row-major with `axis1` outermost.
pub fn sweep_zz(template: &DeviceSpec, axis1: &SweepAxis, axis2: Option<&SweepAxis>) -> Result<ZzSweep> {
    let v1 = axis1.values()?;
    let v2 = match axis2 {
        Some(ax) => ax.values()?,
        None => vec![f64::NAN],
    };
    let points: Vec<(f64, f64)> = v1.iter().flat_map(|&a| v2.iter().map(move |&b| (a, b))).collect();

    let rows = points
        .par_iter()
        .map(|&(x1, x2)| {
            let mut dev = axis1.param.apply(template, x1)?;
            let mut params = vec![x1];
            if let Some(ax) = axis2 {
                dev = ax.param.apply(&dev, x2)?;
                params.push(x2);
            }
            zz_row(&dev, params)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut axes = vec![axis1.param];
    axes.extend(axis2.map(|a| a.param));
    Ok(ZzSweep { axes, rows })
}

fn zz_row(dev: &DeviceSpec, params: Vec<f64>) -> Result<ZzSweepRow> {
    let numeric = zz_numeric(dev)?;
    let (analytic, perturbative) = match dev.coupling {
        CouplingSpec::Direct { g_mhz } => {
            let (d, aa, ab) = (dev.detuning_mhz(), dev.mode_a.anharm_mhz, dev.mode_b.anharm_mhz);
            let or_nan = |r: Result<ZzResult>| r.map(|z| z.zeta_mhz).unwrap_or(f64::NAN);
            (Some(or_nan(zz_analytic(d, aa, ab, g_mhz))), Some(or_nan(zz_perturbative(d, aa, ab, g_mhz))))
        }
        CouplingSpec::ViaResonator { .. } => (None, None),
    };
    Ok(ZzSweepRow {
        params,
        numeric_mhz: numeric.zeta_mhz,
        analytic_mhz: analytic,
        perturbative_mhz: perturbative,
        degenerate: numeric.degenerate,
    })
}

/// Labeled eigenenergies along one axis, for energy-level diagrams.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSweep {
    pub param: SweepParam,
    pub labels: Vec<BareLabel>,
    /// (axis value, energies in GHz in `labels` order).
    pub rows: Vec<(f64, Vec<f64>)>,
}

pub fn sweep_levels(template: &DeviceSpec, axis: &SweepAxis) -> Result<LevelSweep> {
    let dims = template.dims();
    let labels: Vec<BareLabel> = (0..template.dimension()).map(|i| BareLabel::from_index(i, &dims)).collect();
    let rows = axis
        .values()?
        .par_iter()
        .map(|&x| {
            let dev = axis.param.apply(template, x)?;
            let spec = eigensolve_labeled(&build_hamiltonian(&dev, None)?, &dims)?;
            Ok((x, spec.entries.iter().map(|e| e.energy_ghz).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSweep { param: axis.param, labels, rows })
}
