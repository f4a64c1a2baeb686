//! JSON run configuration. Every physical key carries its unit as a suffix and
//! unknown keys are rejected.

use std::path::PathBuf;

use serde::Deserialize;

use super::CliError;
use crate::gates::GateKind;
use crate::model::{CouplingSpec, DeviceSpec, ModeSpec};
use crate::optimize::{CalibrationSettings, Objective};
use crate::pulse::{PulseSpec, DEFAULT_PADDING_NS, DEFAULT_RAMP_NS, DEFAULT_TIME_STEP_NS};
use crate::spectrum::{SweepAxis, SweepParam};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; must match the subcommand when given.
    pub task: Option<String>,
    pub device: DeviceConfig,
    pub sweep: Option<SweepConfig>,
    pub pulse: Option<PulseConfig>,
    pub gate: Option<GateConfig>,
    pub calibration: Option<CalibrationConfig>,
    pub asymmetry: Option<AsymmetryConfig>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub mode_a: ModeConfig,
    pub mode_b: ModeConfig,
    pub coupling: CouplingConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub freq_ghz: f64,
    pub anharm_mhz: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    3
}

/// Either `{"g_mhz": ...}` or `{"resonator": {...}}`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub g_mhz: Option<f64>,
    pub resonator: Option<ResonatorConfig>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    pub freq_ghz: Option<f64>,
    pub g_a_mhz: Option<f64>,
    pub g_b_mhz: Option<f64>,
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis1: AxisConfig,
    pub axis2: Option<AxisConfig>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub parking_ghz: Option<f64>,
    pub interaction_ghz: Option<f64>,
    pub overshoot_mhz: Option<f64>,
    pub hold_ns: Option<f64>,
    pub ramp_ns: Option<f64>,
    pub time_step_ns: Option<f64>,
    pub padding_ns: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateName {
    Cz,
    Iswap,
    Xy,
    Cphase,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub kind: GateName,
    pub theta_rad: Option<f64>,
    pub phi_rad: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub hold_min_ns: f64,
    pub hold_max_ns: f64,
    pub hold_step_ns: Option<f64>,
    pub overshoot_min_mhz: Option<f64>,
    pub overshoot_max_mhz: Option<f64>,
    pub objective: Option<Objective>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymmetryConfig {
    pub delta_alpha_min_mhz: f64,
    pub delta_alpha_max_mhz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub svg: Option<SvgConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvgConfig {
    pub path: Option<PathBuf>,
    pub x_column: Option<String>,
    pub y_columns: Option<Vec<String>>,
    #[serde(default)]
    pub log_y: bool,
    /// Plot magnitudes.
    #[serde(default)]
    pub abs: bool,
}

/// Parses a config, reporting the offending key path on failure.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // serde reports a missing key at its parent; name the key itself
        if let Some(field) = inner.strip_prefix("missing field `").and_then(|r| r.split('`').next()) {
            let full = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            return CliError::Config(format!("{full}: missing field"));
        }
        CliError::Config(format!("{path}: {inner}"))
    })
}

fn bad(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

impl ModeConfig {
    fn spec(&self) -> ModeSpec {
        ModeSpec::new(self.freq_ghz, self.anharm_mhz).with_levels(self.levels)
    }
}

impl DeviceConfig {
    pub fn spec(&self) -> Result<DeviceSpec, CliError> {
        let coupling = match (self.coupling.g_mhz, self.coupling.resonator) {
            (Some(g), None) => CouplingSpec::Direct { g_mhz: g },
            (None, Some(r)) => {
                let CouplingSpec::ViaResonator { freq_ghz, g_a_mhz, g_b_mhz, levels } = CouplingSpec::resonator_default()
                else {
                    unreachable!()
                };
                CouplingSpec::ViaResonator {
                    freq_ghz: r.freq_ghz.unwrap_or(freq_ghz),
                    g_a_mhz: r.g_a_mhz.unwrap_or(g_a_mhz),
                    g_b_mhz: r.g_b_mhz.unwrap_or(g_b_mhz),
                    levels: r.levels.unwrap_or(levels),
                }
            }
            (None, None) => return Err(bad("device.coupling.g_mhz", "missing field")),
            (Some(_), Some(_)) => return Err(bad("device.coupling", "give either g_mhz or resonator, not both")),
        };
        let device = DeviceSpec { mode_a: self.mode_a.spec(), mode_b: self.mode_b.spec(), coupling };
        device.validate().map_err(|e| bad("device", e))?;
        Ok(device)
    }
}

impl AxisConfig {
    pub fn axis(&self) -> SweepAxis {
        SweepAxis::new(self.param, self.start, self.stop, self.points)
    }
}

impl GateConfig {
    pub fn kind(&self) -> Result<GateKind, CliError> {
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| bad(&format!("gate.{key}"), "missing field"));
        Ok(match self.kind {
            GateName::Cz => GateKind::Cz,
            GateName::Iswap => GateKind::ISwap,
            GateName::Xy => GateKind::Xy { theta: need(self.theta_rad, "theta_rad")? },
            GateName::Cphase => GateKind::CPhase { phi: need(self.phi_rad, "phi_rad")? },
        })
    }
}

impl RunConfig {
    pub fn section<'a, T>(&'a self, value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| bad(name, "missing section"))
    }

    pub fn gate_kind(&self) -> Result<GateKind, CliError> {
        self.section(&self.gate, "gate")?.kind()
    }

    /// Pulse for a single simulation. The interaction point defaults to the
    /// gate's resonance.
    pub fn pulse(&self, device: &DeviceSpec, kind: Option<GateKind>) -> Result<PulseSpec, CliError> {
        let p = self.section(&self.pulse, "pulse")?;
        let hold = p.hold_ns.ok_or_else(|| bad("pulse.hold_ns", "missing field"))?;
        let interaction = match (p.interaction_ghz, kind) {
            (Some(f), _) => f,
            (None, Some(k)) => k.interaction_ghz(device),
            (None, None) => return Err(bad("pulse.interaction_ghz", "missing field")),
        };
        let pulse = PulseSpec {
            parking_ghz: p.parking_ghz.unwrap_or(device.mode_a.freq_ghz),
            interaction_ghz: interaction,
            overshoot_mhz: p.overshoot_mhz.unwrap_or(0.0),
            hold_ns: hold,
            ramp_ns: p.ramp_ns.unwrap_or(DEFAULT_RAMP_NS),
            time_step_ns: p.time_step_ns.unwrap_or(DEFAULT_TIME_STEP_NS),
            padding_ns: p.padding_ns.unwrap_or(DEFAULT_PADDING_NS),
        };
        pulse.validate().map_err(|e| bad("pulse", e))?;
        Ok(pulse)
    }

    pub fn calibration(&self) -> Result<CalibrationSettings, CliError> {
        let c = self.section(&self.calibration, "calibration")?;
        let p = self.pulse.unwrap_or_default();
        let mut s = CalibrationSettings::new((c.hold_min_ns, c.hold_max_ns));
        if let Some(step) = c.hold_step_ns {
            s.hold_step_ns = step;
        }
        s.overshoot_bounds = (
            c.overshoot_min_mhz.unwrap_or(s.overshoot_bounds.0),
            c.overshoot_max_mhz.unwrap_or(s.overshoot_bounds.1),
        );
        if let Some(o) = c.objective {
            s.objective = o;
        }
        s.ramp_ns = p.ramp_ns.unwrap_or(s.ramp_ns);
        s.time_step_ns = p.time_step_ns.unwrap_or(s.time_step_ns);
        s.padding_ns = p.padding_ns.unwrap_or(s.padding_ns);
        s.parking_ghz = p.parking_ghz;
        s.interaction_ghz = p.interaction_ghz;
        if p.hold_ns.is_some() || p.overshoot_mhz.is_some() {
            return Err(bad("pulse", "hold_ns and overshoot_mhz are calibrated, not configured"));
        }
        s.hold_grid().map_err(|e| bad("calibration", e))?;
        let (lo, hi) = s.overshoot_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad("calibration", format!("overshoot bounds [{lo}, {hi}] are empty")));
        }
        if s.hold_bounds.0 < s.ramp_ns {
            return Err(bad("calibration.hold_min_ns", format!("must be at least the ramp ({} ns)", s.ramp_ns)));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "device": {
            "mode_a": {"freq_ghz": 5.35, "anharm_mhz": -250},
            "mode_b": {"freq_ghz": 5.5, "anharm_mhz": 250},
            "coupling": {"g_mhz": 15}
        }
    }"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        let dev = cfg.device.spec().unwrap();
        assert_eq!(dev.mode_a.levels, 3);
        assert_eq!(dev.coupling, CouplingSpec::Direct { g_mhz: 15.0 });
    }

    #[test]
    fn unknown_key_names_path() {
        let text = MINIMAL.replace("\"anharm_mhz\": -250", "\"anharm_mhz\": -250, \"alpha\": 1");
        let CliError::Config(msg) = parse_config(&text).unwrap_err() else { panic!() };
        assert!(msg.starts_with("device.mode_a"), "{msg}");
        assert!(msg.contains("alpha"));
    }

    #[test]
    fn missing_nested_field_is_named() {
        let text = MINIMAL.replace("\"freq_ghz\": 5.35, ", "");
        let CliError::Config(msg) = parse_config(&text).unwrap_err() else { panic!() };
        assert!(msg.starts_with("device.mode_a.freq_ghz"), "{msg}");
    }

    #[test]
    fn missing_coupling_strength() {
        let text = MINIMAL.replace("\"g_mhz\": 15", "");
        let cfg = parse_config(&text).unwrap();
        let CliError::Config(msg) = cfg.device.spec().unwrap_err() else { panic!() };
        assert!(msg.contains("coupling.g_mhz"));
    }

    #[test]
    fn resonator_defaults_fill_in() {
        let text = MINIMAL.replace("\"g_mhz\": 15", "\"resonator\": {\"g_a_mhz\": 50}");
        let dev = parse_config(&text).unwrap().device.spec().unwrap();
        assert_eq!(
            dev.coupling,
            CouplingSpec::ViaResonator { freq_ghz: 6.5, g_a_mhz: 50.0, g_b_mhz: 60.0, levels: 3 }
        );
    }

    #[test]
    fn xy_needs_angle() {
        let g = GateConfig { kind: GateName::Xy, theta_rad: None, phi_rad: None };
        assert!(g.kind().is_err());
        let g = GateConfig { kind: GateName::Xy, theta_rad: Some(0.4), phi_rad: None };
        assert_eq!(g.kind().unwrap(), GateKind::Xy { theta: 0.4 });
    }
}
