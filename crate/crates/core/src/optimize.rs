//! Deterministic pulse calibration: overshoot by coarse scan plus golden-section
//! refinement, hold time by grid search, and anharmonicity-asymmetry sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{logical_frame, project_logical, propagate, LogicalFrame};
use crate::gates::{gate_metrics, GateKind, GateMetrics};
use crate::model::DeviceSpec;
use crate::pulse::{PulseSpec, DEFAULT_PADDING_NS, DEFAULT_RAMP_NS, DEFAULT_TIME_STEP_NS};
use crate::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

pub const COARSE_POINTS: usize = 17;
pub const OVERSHOOT_RESOLUTION_MHZ: f64 = 0.01;
pub const HOLD_STEP_NS: f64 = 0.1;
/// Objective values closer than this are ties, resolved toward smaller |x|.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct GoldenResult {
    pub x: f64,
    /// Every evaluation in order.
    pub evaluations: Vec<(f64, f64)>,
    /// Best point after each bracket update.
    pub incumbents: Vec<(f64, f64)>,
}

fn improves(candidate: (f64, f64), incumbent: (f64, f64), tie: f64) -> bool {
    let (x, fx) = candidate;
    let (xi, fi) = incumbent;
    if !fx.is_finite() {
        return false;
    }
    !fi.is_finite() || fx < fi - tie || ((fx - fi).abs() <= tie && x.abs() < xi.abs())
}

/// Golden-section minimization on `[lo, hi]` until the bracket is narrower than `tol`.
pub(crate) fn golden_section(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> GoldenResult {
    golden_section_with_tie(f, lo, hi, tol, 0.0)
}

fn golden_section_with_tie(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, tie: f64) -> GoldenResult {
    let mut evaluations = Vec::new();
    let mut incumbents = Vec::new();
    let eval = |x: f64, evals: &mut Vec<(f64, f64)>| {
        let fx = f(x);
        evals.push((x, fx));
        fx
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut evaluations);
    let mut fd = eval(d, &mut evaluations);
    let mut best = (f64::NAN, f64::INFINITY);
    for &(x, fx) in &evaluations {
        if improves((x, fx), best, tie) {
            best = (x, fx);
        }
    }
    incumbents.push(best);
    while (b - a).abs() > tol {
        let left = fc < fd || (!fd.is_finite() && fc.is_finite());
        if left {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut evaluations);
            if improves((c, fc), best, tie) {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut evaluations);
            if improves((d, fd), best, tie) {
                best = (d, fd);
            }
        }
        incumbents.push(best);
    }
    GoldenResult { x: best.0, evaluations, incumbents }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `1 − P(|~11> → |~11>)`.
    Leakage,
    /// `1 − F` after virtual-Z canonicalization.
    Infidelity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub hold_ns: f64,
    pub overshoot_mhz: f64,
    pub objective: f64,
}

/// Best overshoot found at one hold time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoldPoint {
    pub hold_ns: f64,
    pub overshoot_mhz: f64,
    pub objective: f64,
    pub metrics: GateMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub kind: GateKind,
    pub objective: Objective,
    pub best_hold: f64,
    pub best_overshoot: f64,
    pub objective_value: f64,
    pub metrics_at_optimum: GateMetrics,
    /// Every objective evaluation.
    pub trace: Vec<TracePoint>,
    /// Incumbent after each golden-section update of the final overshoot search.
    pub refinement: Vec<TracePoint>,
    /// Per-hold optimum, empty for single-hold calibrations.
    pub hold_profile: Vec<HoldPoint>,
}

/// Evaluates objectives for one device and gate with a cached logical frame.
struct GateObjective<'a> {
    device: &'a DeviceSpec,
    frame: LogicalFrame,
    kind: GateKind,
    objective: Objective,
}

impl<'a> GateObjective<'a> {
    fn new(device: &'a DeviceSpec, parking_ghz: f64, kind: GateKind, objective: Objective) -> Result<Self> {
        Ok(Self { device, frame: logical_frame(device, parking_ghz)?, kind, objective })
    }

    fn metrics(&self, pulse: &PulseSpec) -> Result<GateMetrics> {
        let u = propagate(self.device, pulse)?;
        Ok(gate_metrics(&project_logical(&u, &self.frame)?, self.kind))
    }

    fn value(&self, pulse: &PulseSpec) -> f64 {
        let eval = || -> Result<f64> {
            let u = propagate(self.device, pulse)?;
            let proj = project_logical(&u, &self.frame)?;
            Ok(match self.objective {
                Objective::Leakage => (1.0 - proj.matrix[(3, 3)].norm_sqr()).clamp(0.0, 1.0),
                Objective::Infidelity => 1.0 - gate_metrics(&proj, self.kind).fidelity,
            })
        };
        eval().unwrap_or(f64::NAN)
    }

    fn optimize_overshoot(&self, template: &PulseSpec, bounds: (f64, f64)) -> Result<CalibrationResult> {
        let (lo, hi) = bounds;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!("overshoot bounds [{lo}, {hi}] are empty")));
        }
        template.validate()?;
        let hold = template.hold_ns;
        let at = |o: f64| self.value(&template.with_overshoot(o));

        let mut trace = Vec::new();
        let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
        let coarse: Vec<f64> = (0..COARSE_POINTS).map(|k| if k + 1 == COARSE_POINTS { hi } else { lo + step * k as f64 }).collect();
        let mut best: Option<(usize, f64)> = None;
        for (k, &o) in coarse.iter().enumerate() {
            let v = at(o);
            trace.push(TracePoint { hold_ns: hold, overshoot_mhz: o, objective: v });
            let better = match best {
                None => v.is_finite(),
                Some((kb, vb)) => improves((o, v), (coarse[kb], vb), TIE),
            };
            if better {
                best = Some((k, v));
            }
        }
        let (kb, vb) = best.ok_or_else(|| Error::Calibration(format!("objective is non-finite at every coarse point (hold {hold} ns)")))?;

        let (a, b) = (coarse[kb.saturating_sub(1)], coarse[(kb + 1).min(COARSE_POINTS - 1)]);
        let mut incumbent = (coarse[kb], vb);
        let mut refinement = vec![TracePoint { hold_ns: hold, overshoot_mhz: incumbent.0, objective: incumbent.1 }];
        if b - a > OVERSHOOT_RESOLUTION_MHZ {
            let g = golden_section_with_tie(at, a, b, OVERSHOOT_RESOLUTION_MHZ, TIE);
            trace.extend(g.evaluations.iter().map(|&(o, v)| TracePoint { hold_ns: hold, overshoot_mhz: o, objective: v }));
            for &(o, v) in &g.incumbents {
                if improves((o, v), incumbent, TIE) {
                    incumbent = (o, v);
                }
                refinement.push(TracePoint { hold_ns: hold, overshoot_mhz: incumbent.0, objective: incumbent.1 });
            }
        }

        let pulse = template.with_overshoot(incumbent.0);
        Ok(CalibrationResult {
            kind: self.kind,
            objective: self.objective,
            best_hold: hold,
            best_overshoot: incumbent.0,
            objective_value: incumbent.1,
            metrics_at_optimum: self.metrics(&pulse)?,
            trace,
            refinement,
            hold_profile: Vec::new(),
        })
    }
}

/// Minimizes `objective` over the overshoot within `bounds` (MHz): a 17-point
/// scan, then golden-section refinement to 0.01 MHz around the best scan point.
pub fn optimize_overshoot(
    device: &DeviceSpec,
    pulse_template: &PulseSpec,
    kind: GateKind,
    bounds: (f64, f64),
    objective: Objective,
) -> Result<CalibrationResult> {
    GateObjective::new(device, pulse_template.parking_ghz, kind, objective)?.optimize_overshoot(pulse_template, bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSettings {
    pub hold_bounds: (f64, f64),
    pub hold_step_ns: f64,
    pub overshoot_bounds: (f64, f64),
    pub objective: Objective,
    pub ramp_ns: f64,
    pub time_step_ns: f64,
    pub padding_ns: f64,
    /// Defaults to the device's mode a frequency.
    pub parking_ghz: Option<f64>,
    /// Defaults to the gate kind's resonance.
    pub interaction_ghz: Option<f64>,
}

impl CalibrationSettings {
    pub fn new(hold_bounds: (f64, f64)) -> Self {
        Self {
            hold_bounds,
            hold_step_ns: HOLD_STEP_NS,
            overshoot_bounds: (-10.0, 10.0),
            objective: Objective::Leakage,
            ramp_ns: DEFAULT_RAMP_NS,
            time_step_ns: DEFAULT_TIME_STEP_NS,
            padding_ns: DEFAULT_PADDING_NS,
            parking_ghz: None,
            interaction_ghz: None,
        }
    }

    pub fn template(&self, device: &DeviceSpec, kind: GateKind, hold_ns: f64) -> PulseSpec {
        PulseSpec {
            parking_ghz: self.parking_ghz.unwrap_or(device.mode_a.freq_ghz),
            interaction_ghz: self.interaction_ghz.unwrap_or_else(|| kind.interaction_ghz(device)),
            overshoot_mhz: 0.0,
            hold_ns,
            ramp_ns: self.ramp_ns,
            time_step_ns: self.time_step_ns,
            padding_ns: self.padding_ns,
        }
    }

    pub fn hold_grid(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.hold_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || !(self.hold_step_ns > 0.0) {
            return Err(Error::InvalidParameter(format!("hold bounds [{lo}, {hi}] are empty")));
        }
        let n = ((hi - lo) / self.hold_step_ns + 1e-9).floor() as usize;
        // round to the grid so holds are exact multiples of the step from lo
        Ok((0..=n).map(|k| ((lo + self.hold_step_ns * k as f64) * 1e9).round() / 1e9).collect())
    }
}

/// Calibrates hold and overshoot with the default pulse settings.
pub fn calibrate_gate(device: &DeviceSpec, kind: GateKind, hold_bounds: (f64, f64)) -> Result<CalibrationResult> {
    calibrate_gate_with(device, kind, &CalibrationSettings::new(hold_bounds))
}

/// For every hold on the grid, optimizes the overshoot; keeps the hold with the
/// lowest objective.
pub fn calibrate_gate_with(device: &DeviceSpec, kind: GateKind, settings: &CalibrationSettings) -> Result<CalibrationResult> {
    device.validate()?;
    let holds = settings.hold_grid()?;
    let parking = settings.parking_ghz.unwrap_or(device.mode_a.freq_ghz);
    let evaluator = GateObjective::new(device, parking, kind, settings.objective)?;

    let per_hold = holds
        .par_iter()
        .map(|&h| evaluator.optimize_overshoot(&settings.template(device, kind, h), settings.overshoot_bounds))
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (k, r) in per_hold.iter().enumerate() {
        let vb = per_hold[best].objective_value;
        if r.objective_value.is_finite() && (!vb.is_finite() || r.objective_value < vb - TIE) {
            best = k;
        }
    }
    let hold_profile = per_hold
        .iter()
        .map(|r| HoldPoint {
            hold_ns: r.best_hold,
            overshoot_mhz: r.best_overshoot,
            objective: r.objective_value,
            metrics: r.metrics_at_optimum,
        })
        .collect();
    let trace = per_hold.iter().flat_map(|r| r.trace.iter().copied()).collect();
    let chosen = &per_hold[best];
    Ok(CalibrationResult {
        kind,
        objective: settings.objective,
        best_hold: chosen.best_hold,
        best_overshoot: chosen.best_overshoot,
        objective_value: chosen.objective_value,
        metrics_at_optimum: chosen.metrics_at_optimum,
        trace,
        refinement: chosen.refinement.clone(),
        hold_profile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorChannel {
    SwapAngle,
    ConditionalPhase,
    Leakage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetryRow {
    pub delta_alpha_mhz: f64,
    pub best_hold: f64,
    pub best_overshoot: f64,
    pub metrics: GateMetrics,
    /// Infidelity-equivalent contributions of δθ, δφ and leakage.
    pub contributions: [f64; 3],
    pub dominant: ErrorChannel,
}

/// Recalibrates the gate at each δ_α (|α_a| = |α_b| − δ_α) and reports which
/// error channel limits it.
pub fn asymmetry_sweep(
    template: &DeviceSpec,
    kind: GateKind,
    delta_alpha_range: (f64, f64),
    points: usize,
    settings: &CalibrationSettings,
) -> Result<Vec<AsymmetryRow>> {
    if points == 0 {
        return Err(Error::InvalidGrid("asymmetry sweep has no points".into()));
    }
    let (lo, hi) = delta_alpha_range;
    let values: Vec<f64> = if points == 1 {
        vec![lo]
    } else {
        (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
    };
    values
        .iter()
        .map(|&da| {
            let dev = template.with_asymmetry_on_a(da);
            let cal = calibrate_gate_with(&dev, kind, settings)?;
            let m = cal.metrics_at_optimum;
            let contributions = [m.theta_error_contribution(), m.phi_error_contribution(), m.leak_error_contribution()];
            let channels = [ErrorChannel::SwapAngle, ErrorChannel::ConditionalPhase, ErrorChannel::Leakage];
            let dominant = channels[(0..3).fold(0, |b, k| if contributions[k] > contributions[b] { k } else { b })];
            Ok(AsymmetryRow {
                delta_alpha_mhz: da,
                best_hold: cal.best_hold,
                best_overshoot: cal.best_overshoot,
                metrics: m,
                contributions,
                dominant,
            })
        })
        .collect()
}
