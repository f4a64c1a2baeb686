//! Time-ordered propagation under a flux pulse and projection onto the
//! logical (dressed, parking-point) basis.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::linalg::{blocks, expm_hermitian, submatrix, unitarity_deviation};
use crate::model::{build_hamiltonian, BareLabel, DeviceSpec};
use crate::pulse::{step_count, PulseSpec};
use crate::spectrum::eigensolve_labeled;
use crate::{Complex64, Error, Gate4, Result};

/// Unitarity deviation above which propagation is rejected.
pub const UNITARITY_LIMIT: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: DMatrix<Complex64>,
    pub time_step_used: f64,
}

impl Propagator {
    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), time_step_used: 0.0 }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }
}

/// Propagator over the whole pulse.
pub fn propagate(device: &DeviceSpec, pulse: &PulseSpec) -> Result<Propagator> {
    propagate_interval(device, pulse, 0.0, pulse.total_duration())
}

/// Product of fourth-order Magnus step exponentials over `[t0, t1]`, sampling
/// the pulse at the two Gauss-Legendre nodes of each step. Consecutive steps
/// with a constant mode-a frequency (padding and plateau) are merged into one
/// exponential.
pub fn propagate_interval(device: &DeviceSpec, pulse: &PulseSpec, t0: f64, t1: f64) -> Result<Propagator> {
    device.validate()?;
    pulse.validate()?;
    let total = pulse.total_duration();
    if !(0.0..=total + 1e-12).contains(&t0) || !(t0..=total + 1e-12).contains(&t1) {
        return Err(Error::Domain { t: if t0 < 0.0 || t0 > total { t0 } else { t1 }, total });
    }
    let dim = device.dimension();
    if t1 == t0 {
        return Ok(Propagator::identity(dim));
    }

    let n = step_count(t1 - t0, pulse.time_step_ns);
    let dt = (t1 - t0) / n as f64;
    let offset = 3f64.sqrt() / 6.0;
    // detuning of mode a from parking (rad/ns) at both nodes of every step
    let detuning = |t: f64| TAU * (pulse.frequency_unchecked(t) - pulse.parking_ghz);
    let nodes: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let start = t0 + k as f64 * dt;
            (detuning(start + (0.5 - offset) * dt), detuning(start + (0.5 + offset) * dt))
        })
        .collect();

    let base = build_hamiltonian(device, Some(pulse.parking_ghz))?;
    let dims = device.dims();
    let mode_a_occupation: Vec<f64> = (0..dim).map(|i| BareLabel::from_index(i, &dims).0[0] as f64).collect();

    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for block in blocks(&base) {
        let h_block = submatrix(&base, &block);
        let occ: Vec<f64> = block.iter().map(|&i| mode_a_occupation[i]).collect();
        let m = block.len();
        // [H0, N_a] for the Magnus commutator term
        let commutator = DMatrix::from_fn(m, m, |r, c| h_block[(r, c)] * (occ[c] - occ[r]));
        let shifted = |s: f64| {
            let mut h = h_block.clone();
            for (r, &o) in occ.iter().enumerate() {
                h[(r, r)] += Complex64::new(s * o, 0.0);
            }
            h
        };
        let mut u = DMatrix::<Complex64>::identity(m, m);
        let mut k = 0;
        while k < n {
            let (s1, s2) = nodes[k];
            if s1 == s2 {
                let mut run = 1;
                while k + run < n && nodes[k + run] == (s1, s1) {
                    run += 1;
                }
                u = expm_hermitian(&shifted(s1), dt * run as f64) * u;
                k += run;
                continue;
            }
            // K = dt (H1 + H2)/2 − i (√3/12) dt² [H2, H1], [H2, H1] = (s1 − s2)[H0, N_a]
            let mut kmat = shifted(0.5 * (s1 + s2)) * Complex64::new(dt, 0.0);
            let weight = Complex64::new(0.0, -(3f64.sqrt() / 12.0) * dt * dt * (s1 - s2));
            kmat += &commutator * weight;
            u = expm_hermitian(&kmat, 1.0) * u;
            k += 1;
        }
        for (r, &gr) in block.iter().enumerate() {
            for (c, &gc) in block.iter().enumerate() {
                matrix[(gr, gc)] = u[(r, c)];
            }
        }
    }

    let deviation = unitarity_deviation(&matrix);
    if deviation > UNITARITY_LIMIT {
        return Err(Error::StepSize { deviation, dt });
    }
    Ok(Propagator { matrix, time_step_used: dt })
}

/// Computational basis states in |00>, |01>, |10>, |11> order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Logical {
    L00 = 0,
    L01 = 1,
    L10 = 2,
    L11 = 3,
}

impl Logical {
    pub const ALL: [Logical; 4] = [Logical::L00, Logical::L01, Logical::L10, Logical::L11];

    pub fn occupations(self) -> (usize, usize) {
        let i = self as usize;
        (i >> 1, i & 1)
    }

    pub fn name(self) -> &'static str {
        ["00", "01", "10", "11"][self as usize]
    }
}

/// Dressed eigenvectors at the parking point used as the computational frame.
#[derive(Debug, Clone)]
pub struct LogicalFrame {
    pub basis: [DVector<Complex64>; 4],
    pub overlaps: [f64; 4],
}

/// Labels the parking-point eigenstates |~00>, |~01>, |~10>, |~11> and fixes
/// each one's phase so its largest component is real and positive.
pub fn logical_frame(device: &DeviceSpec, parking_freq_a: f64) -> Result<LogicalFrame> {
    let parked = device.with_freq_a(parking_freq_a);
    let h = build_hamiltonian(&parked, None)?;
    let spec = eigensolve_labeled(&h, &parked.dims())?;
    let mut overlaps = [0.0; 4];
    let basis = Logical::ALL.map(|l| {
        let (na, nb) = l.occupations();
        let s = spec.qubit_state(na, nb);
        overlaps[l as usize] = s.overlap_sq;
        let mut v = s.vector.clone();
        let pivot = v.iter().enumerate().fold(0, |best, (i, z)| if z.norm() > v[best].norm() { i } else { best });
        let phase = v[pivot].conj() / v[pivot].norm();
        v *= phase;
        v
    });
    if let Some(l) = Logical::ALL.iter().find(|l| overlaps[**l as usize] < 0.5) {
        return Err(Error::Frame(format!(
            "|{}> has overlap² {:.4} with its bare state at {parking_freq_a} GHz; parking point is too close to a crossing",
            l.name(),
            overlaps[*l as usize]
        )));
    }
    Ok(LogicalFrame { basis, overlaps })
}

/// Propagator restricted to the logical subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub matrix: Gate4,
    /// `1 − Σ_i |P_ij|²` per input column.
    pub leakage: [f64; 4],
}

pub fn project_logical(u: &Propagator, frame: &LogicalFrame) -> Result<Projection> {
    let dim = u.matrix.nrows();
    if frame.basis[0].len() != dim {
        return Err(Error::InvalidDimension(format!(
            "propagator is {dim}-dimensional but the frame lives in {}",
            frame.basis[0].len()
        )));
    }
    let images: Vec<DVector<Complex64>> = frame.basis.iter().map(|b| &u.matrix * b).collect();
    let matrix = Gate4::from_fn(|i, j| frame.basis[i].dotc(&images[j]));
    let leakage = std::array::from_fn(|j| {
        let kept: f64 = (0..4).map(|i| matrix[(i, j)].norm_sqr()).sum();
        (1.0 - kept).clamp(0.0, 1.0)
    });
    Ok(Projection { matrix, leakage })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    /// Probability in |~00>, |~01>, |~10>, |~11>.
    pub logical: [f64; 4],
    pub non_logical: f64,
}

pub fn populations(u: &Propagator, frame: &LogicalFrame, initial: Logical) -> Result<Populations> {
    let psi = &u.matrix * &frame.basis[initial as usize];
    let logical = frame.basis.clone().map(|b| b.dotc(&psi).norm_sqr());
    let total = psi.norm_squared();
    let non_logical = (total - logical.iter().sum::<f64>()).max(0.0);
    Ok(Populations { logical, non_logical })
}
