//! Target unitaries of the `U(θ, φ)` family, state-averaged fidelity, virtual-Z
//! canonicalization and angle extraction.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::{logical_frame, project_logical, propagate, LogicalFrame, Projection, Propagator};
use crate::model::DeviceSpec;
use crate::optimize::golden_section;
use crate::pulse::PulseSpec;
use crate::{Complex64, Error, Gate4, Result};

/// Grid resolution per angle of the coarse virtual-Z search.
const VZ_GRID: usize = 64;
const VZ_TOLERANCE: f64 = 1e-10;
/// Smallest matrix-element magnitude accepted by an angle-extraction branch.
const BRANCH_FLOOR: f64 = 1e-3;

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// `exp(−iθ(|01><10| + |10><01|)) · exp(−iφ|11><11|)`.
pub fn target_unitary(theta: f64, phi: f64) -> Gate4 {
    let (s, c) = theta.sin_cos();
    let mut u = Gate4::zeros();
    u[(0, 0)] = Complex64::new(1.0, 0.0);
    u[(1, 1)] = Complex64::new(c, 0.0);
    u[(2, 2)] = Complex64::new(c, 0.0);
    u[(1, 2)] = Complex64::new(0.0, -s);
    u[(2, 1)] = Complex64::new(0.0, -s);
    u[(3, 3)] = Complex64::from_polar(1.0, -phi);
    u
}

/// `[Tr(U†U) + |Tr(U_t† U)|²] / 20`. `actual` may be sub-unitary.
pub fn average_fidelity(actual: &Gate4, target: &Gate4) -> f64 {
    let norm = (actual.adjoint() * actual).trace().re;
    let overlap = (target.adjoint() * actual).trace().norm_sqr();
    (norm + overlap) / 20.0
}

/// `Z_a(φ_a) ⊗ Z_b(φ_b)` with `Z(φ) = diag(1, e^{iφ})`.
pub fn virtual_z(phi_a: f64, phi_b: f64) -> Gate4 {
    Gate4::from_diagonal(&nalgebra::Vector4::new(
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, phi_b),
        Complex64::from_polar(1.0, phi_a),
        Complex64::from_polar(1.0, phi_a + phi_b),
    ))
}

/// Finds single-qubit frame phases maximizing the fidelity of
/// `Z_a(φ_a) ⊗ Z_b(φ_b) · actual` against `target`.
pub fn canonicalize_virtual_z(actual: &Gate4, target: &Gate4) -> (Gate4, (f64, f64)) {
    // Tr(T† D A) = Σ_i d_i c_i with c_i = Σ_j conj(T_ij) A_ij
    let c: [Complex64; 4] = std::array::from_fn(|i| (0..4).map(|j| target[(i, j)].conj() * actual[(i, j)]).sum());
    let value = |a: f64, b: f64| {
        (c[0] + c[1] * Complex64::from_polar(1.0, b) + c[2] * Complex64::from_polar(1.0, a)
            + c[3] * Complex64::from_polar(1.0, a + b))
        .norm()
    };

    let mut best = (0.0, 0.0, value(0.0, 0.0));
    for ia in 0..VZ_GRID {
        let a = TAU * ia as f64 / VZ_GRID as f64;
        for ib in 0..VZ_GRID {
            let b = TAU * ib as f64 / VZ_GRID as f64;
            let v = value(a, b);
            if v > best.2 {
                best = (a, b, v);
            }
        }
    }

    // For fixed φ_a the best φ_b is closed-form: |A + B e^{ib}| peaks at arg A − arg B.
    let split = |a: f64| {
        let ea = Complex64::from_polar(1.0, a);
        (c[0] + c[2] * ea, c[1] + c[3] * ea)
    };
    let profile = |a: f64| {
        let (x, y) = split(a);
        -(x.norm() + y.norm())
    };
    let h = TAU / VZ_GRID as f64;
    let refined = golden_section(profile, best.0 - h, best.0 + h, VZ_TOLERANCE);
    let a = refined.x;
    let (x, y) = split(a);
    let b = if y.norm() > 0.0 && x.norm() > 0.0 { x.arg() - y.arg() } else { best.1 };

    let (a, b) = if value(a, b) >= best.2 { (a, b) } else { (best.0, best.1) };
    let (a, b) = (wrap_angle(a), wrap_angle(b));
    (virtual_z(a, b) * actual, (a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleBranch {
    /// CZ-like, diagonal-dominant.
    Diagonal,
    /// iSWAP-like, exchange-dominant.
    Swap,
}

impl AngleBranch {
    fn name(self) -> &'static str {
        match self {
            AngleBranch::Diagonal => "diagonal",
            AngleBranch::Swap => "swap",
        }
    }

    fn other(self) -> Self {
        match self {
            AngleBranch::Diagonal => AngleBranch::Swap,
            AngleBranch::Swap => AngleBranch::Diagonal,
        }
    }
}

/// Reads `(θ, φ)` off a (canonicalized) gate. Both phase combinations are
/// invariant under single-qubit Z rotations on either side and global phase.
pub fn extract_angles(u: &Gate4, branch: AngleBranch) -> Result<(f64, f64)> {
    let theta = u[(1, 2)].norm().atan2(u[(1, 1)].norm());
    let (p, q) = match branch {
        AngleBranch::Diagonal => (u[(1, 1)], u[(2, 2)]),
        AngleBranch::Swap => (u[(1, 2)], u[(2, 1)]),
    };
    if p.norm() <= BRANCH_FLOOR || q.norm() <= BRANCH_FLOOR {
        return Err(Error::Branch { requested: branch.name(), other: branch.other().name() });
    }
    let ratio = u[(0, 0)] * u[(3, 3)] / (p * q);
    let phi = match branch {
        AngleBranch::Diagonal => -ratio.arg(),
        AngleBranch::Swap => PI - ratio.arg(),
    };
    Ok((theta, wrap_angle(phi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Cz,
    #[serde(rename = "iswap")]
    ISwap,
    /// Partial swap `U(θ, 0)`.
    Xy { theta: f64 },
    /// Controlled phase `U(0, φ)`.
    CPhase { phi: f64 },
}

impl GateKind {
    /// Ideal `(θ, φ)`.
    pub fn ideal(&self) -> (f64, f64) {
        match *self {
            GateKind::Cz => (0.0, PI),
            GateKind::ISwap => (FRAC_PI_2, 0.0),
            GateKind::Xy { theta } => (theta, 0.0),
            GateKind::CPhase { phi } => (0.0, phi),
        }
    }

    pub fn target(&self) -> Gate4 {
        let (t, p) = self.ideal();
        target_unitary(t, p)
    }

    pub fn branch(&self) -> AngleBranch {
        if self.ideal().0 < FRAC_PI_4 {
            AngleBranch::Diagonal
        } else {
            AngleBranch::Swap
        }
    }

    /// Exchange-type gates are driven at the |01>-|10> resonance; phase-type
    /// gates at the |11>-|20> resonance `ν_b − α_a`.
    pub fn interaction_ghz(&self, device: &DeviceSpec) -> f64 {
        match self.branch() {
            AngleBranch::Swap => device.mode_b.freq_ghz,
            AngleBranch::Diagonal => device.mode_b.freq_ghz - device.mode_a.anharm_mhz / 1000.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GateKind::Cz => "cz".into(),
            GateKind::ISwap => "iswap".into(),
            GateKind::Xy { theta } => format!("xy({theta})"),
            GateKind::CPhase { phi } => format!("cphase({phi})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateMetrics {
    pub kind: GateKind,
    pub fidelity: f64,
    /// `1 − P(|~11> → |~11>)`.
    pub epsilon_leak: f64,
    /// `|P(|~01> → |~01>) − cos²θ_ideal|`: `1 − P_01` for CZ, `P_01` for iSWAP.
    pub epsilon_swap: f64,
    pub theta_measured: f64,
    pub phi_measured: f64,
    pub delta_theta: f64,
    pub delta_phi: f64,
    /// Frame phases `(φ_a, φ_b)` applied by canonicalization.
    pub virtual_z: (f64, f64),
}

impl GateMetrics {
    /// Infidelity of the ideal gate carrying only the measured swap-angle error.
    pub fn theta_error_contribution(&self) -> f64 {
        let (t, p) = self.kind.ideal();
        1.0 - average_fidelity(&target_unitary(t + self.delta_theta, p), &self.kind.target())
    }

    /// Infidelity of the ideal gate carrying only the measured conditional-phase error.
    pub fn phi_error_contribution(&self) -> f64 {
        let (t, p) = self.kind.ideal();
        1.0 - average_fidelity(&target_unitary(t, p + self.delta_phi), &self.kind.target())
    }

    /// Infidelity of the ideal gate whose |11> column lost `epsilon_leak` population.
    pub fn leak_error_contribution(&self) -> f64 {
        let mut leaky = self.kind.target();
        let keep = (1.0 - self.epsilon_leak).max(0.0).sqrt();
        for r in 0..4 {
            leaky[(r, 3)] *= keep;
        }
        1.0 - average_fidelity(&leaky, &self.kind.target())
    }
}

/// Metrics of a projected gate. Angles fall back to the other extraction
/// branch when the natural one is degenerate, and are NaN if both are.
pub fn gate_metrics(projection: &Projection, kind: GateKind) -> GateMetrics {
    let target = kind.target();
    let (canonical, vz) = canonicalize_virtual_z(&projection.matrix, &target);
    let fidelity = average_fidelity(&canonical, &target);
    let (theta, phi) = extract_angles(&canonical, kind.branch())
        .or_else(|_| extract_angles(&canonical, kind.branch().other()))
        .unwrap_or((f64::NAN, f64::NAN));
    let (theta_ideal, phi_ideal) = kind.ideal();
    let p11 = projection.matrix[(3, 3)].norm_sqr();
    let p01 = projection.matrix[(1, 1)].norm_sqr();
    GateMetrics {
        kind,
        fidelity,
        epsilon_leak: (1.0 - p11).clamp(0.0, 1.0),
        epsilon_swap: (p01 - theta_ideal.cos().powi(2)).abs().clamp(0.0, 1.0),
        theta_measured: theta,
        phi_measured: phi,
        delta_theta: wrap_angle(theta - theta_ideal),
        delta_phi: wrap_angle(phi - phi_ideal),
        virtual_z: vz,
    }
}

pub fn metrics_from_propagator(u: &Propagator, frame: &LogicalFrame, kind: GateKind) -> Result<GateMetrics> {
    Ok(gate_metrics(&project_logical(u, frame)?, kind))
}

/// Propagate → project → canonicalize → score.
pub fn simulate_gate(device: &DeviceSpec, pulse: &PulseSpec, kind: GateKind) -> Result<GateMetrics> {
    let u = propagate(device, pulse)?;
    let frame = logical_frame(device, pulse.parking_ghz)?;
    metrics_from_propagator(&u, &frame, kind)
}
