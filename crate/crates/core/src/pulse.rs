//! Flat-top flux pulse on qubit a.
//!
//! The excursion rises from the parking frequency with a cosine ramp, holds,
//! and falls back symmetrically. The shape reaches one half at the middle of
//! each ramp, so the full width at half maximum equals `hold_ns`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::MHZ_PER_GHZ;
use crate::{Error, Result};

pub const DEFAULT_RAMP_NS: f64 = 2.5;
pub const DEFAULT_TIME_STEP_NS: f64 = 0.01;
pub const DEFAULT_PADDING_NS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub parking_ghz: f64,
    pub interaction_ghz: f64,
    /// Extra excursion beyond the interaction frequency, away from parking.
    pub overshoot_mhz: f64,
    /// FWHM of the excursion.
    pub hold_ns: f64,
    pub ramp_ns: f64,
    pub time_step_ns: f64,
    /// Idle time at the parking frequency before and after the excursion.
    pub padding_ns: f64,
}

impl PulseSpec {
    pub fn new(parking_ghz: f64, interaction_ghz: f64, hold_ns: f64) -> Self {
        Self {
            parking_ghz,
            interaction_ghz,
            overshoot_mhz: 0.0,
            hold_ns,
            ramp_ns: DEFAULT_RAMP_NS,
            time_step_ns: DEFAULT_TIME_STEP_NS,
            padding_ns: DEFAULT_PADDING_NS,
        }
    }

    pub fn with_overshoot(mut self, overshoot_mhz: f64) -> Self {
        self.overshoot_mhz = overshoot_mhz;
        self
    }

    pub fn with_hold(mut self, hold_ns: f64) -> Self {
        self.hold_ns = hold_ns;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.parking_ghz,
            self.interaction_ghz,
            self.overshoot_mhz,
            self.hold_ns,
            self.ramp_ns,
            self.time_step_ns,
            self.padding_ns,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("pulse fields must be finite".into()));
        }
        if self.parking_ghz <= 0.0 || self.target_ghz() <= 0.0 {
            return Err(Error::InvalidParameter("pulse frequencies must be positive".into()));
        }
        if self.ramp_ns <= 0.0 || self.time_step_ns <= 0.0 || self.padding_ns < 0.0 {
            return Err(Error::InvalidParameter("ramp and time step must be positive, padding non-negative".into()));
        }
        if self.hold_ns < self.ramp_ns {
            return Err(Error::InvalidParameter(format!(
                "hold {} ns shorter than ramp {} ns",
                self.hold_ns, self.ramp_ns
            )));
        }
        Ok(())
    }

    /// Plateau frequency, interaction point plus overshoot.
    pub fn target_ghz(&self) -> f64 {
        let direction = if self.interaction_ghz < self.parking_ghz { -1.0 } else { 1.0 };
        self.interaction_ghz + direction * self.overshoot_mhz / MHZ_PER_GHZ
    }

    pub fn total_duration(&self) -> f64 {
        self.hold_ns + self.ramp_ns + 2.0 * self.padding_ns
    }

    /// Excursion envelope in [0, 1].
    pub fn shape(&self, t: f64) -> f64 {
        let x = t - self.padding_ns;
        let r = self.ramp_ns;
        if x <= 0.0 || x >= self.hold_ns + r {
            0.0
        } else if x < r {
            0.5 * (1.0 - (PI * x / r).cos())
        } else if x <= self.hold_ns {
            1.0
        } else {
            0.5 * (1.0 + (PI * (x - self.hold_ns) / r).cos())
        }
    }

    pub(crate) fn frequency_unchecked(&self, t: f64) -> f64 {
        let s = self.shape(t);
        if s == 1.0 {
            return self.target_ghz();
        }
        self.parking_ghz + (self.target_ghz() - self.parking_ghz) * s
    }
}

/// Mode a frequency (GHz) at time `t` (ns).
pub fn frequency_at(pulse: &PulseSpec, t: f64) -> Result<f64> {
    let total = pulse.total_duration();
    if !(t >= -1e-12 && t <= total + 1e-12) {
        return Err(Error::Domain { t, total });
    }
    Ok(pulse.frequency_unchecked(t.clamp(0.0, total)))
}

/// Uniform samples `(t, ν_a)` covering both endpoints. The spacing is the
/// largest value not above `time_step_ns` that divides the duration evenly
/// (to rounding).
pub fn sample_pulse(pulse: &PulseSpec) -> Result<Vec<(f64, f64)>> {
    pulse.validate()?;
    let total = pulse.total_duration();
    let n = step_count(total, pulse.time_step_ns);
    let dt = total / n as f64;
    Ok((0..=n)
        .map(|k| {
            let t = if k == n { total } else { k as f64 * dt };
            (t, pulse.frequency_unchecked(t))
        })
        .collect())
}

pub(crate) fn step_count(duration: f64, dt: f64) -> usize {
    let n = duration / dt;
    // absorb representation error such as 20 / 0.01 = 1999.9999999999998
    let rounded = n.round();
    if (n - rounded).abs() < 1e-9 * rounded.max(1.0) {
        (rounded as usize).max(1)
    } else {
        (n.ceil() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cz_pulse() -> PulseSpec {
        PulseSpec::new(6.1, 5.75, 17.3).with_overshoot(3.0)
    }

    /// Half-maximum crossings by bisection on a dense sample grid.
    fn measured_fwhm(samples: &[(f64, f64)], p: &PulseSpec) -> f64 {
        let half = 0.5 * (p.parking_ghz + p.target_ghz());
        let above = |f: f64| (f - p.parking_ghz).abs() >= (half - p.parking_ghz).abs();
        let first = samples.iter().position(|s| above(s.1)).unwrap();
        let last = samples.iter().rposition(|s| above(s.1)).unwrap();
        let bisect = |mut lo: f64, mut hi: f64, rising: bool| {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if above(frequency_at(p, mid).unwrap()) == rising {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let t_rise = bisect(samples[first - 1].0, samples[first].0, true);
        let t_fall = bisect(samples[last].0, samples[last + 1].0, false);
        t_fall - t_rise
    }

    #[test]
    fn boundary_and_plateau() {
        let p = cz_pulse();
        assert!((frequency_at(&p, 0.0).unwrap() - 6.1).abs() < 1e-9);
        assert!((frequency_at(&p, p.total_duration()).unwrap() - 6.1).abs() < 1e-9);
        let mid = frequency_at(&p, 0.5 * p.total_duration()).unwrap();
        assert!((mid - (5.75 - 0.003)).abs() < 1e-12);
        assert!(matches!(frequency_at(&p, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(frequency_at(&p, p.total_duration() + 0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn overshoot_points_away_from_parking() {
        let up = PulseSpec::new(5.0, 5.5, 10.0).with_overshoot(2.0);
        assert!((up.target_ghz() - 5.502).abs() < 1e-12);
        let down = PulseSpec::new(6.1, 5.5, 10.0).with_overshoot(2.0);
        assert!((down.target_ghz() - 5.498).abs() < 1e-12);
    }

    #[test]
    fn ramp_midpoint_is_half() {
        let p = cz_pulse();
        assert!((p.shape(p.padding_ns + 0.5 * p.ramp_ns) - 0.5).abs() < 1e-15);
        assert!((p.shape(p.padding_ns + p.hold_ns + 0.5 * p.ramp_ns) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sample_count_and_bounds() {
        let p = PulseSpec::new(6.1, 5.5, 15.5);
        assert_eq!(p.total_duration(), 20.0);
        let s = sample_pulse(&p).unwrap();
        assert_eq!(s.len(), 2001);
        assert_eq!(s[2000].0, 20.0);
        for &(_, f) in &s {
            assert!(f >= 5.5 - 1e-12 && f <= 6.1 + 1e-12);
        }
    }

    #[test]
    fn sampled_fwhm_matches_hold() {
        for hold in [2.5, 7.0, 17.3, 23.95] {
            let p = cz_pulse().with_hold(hold);
            let s = sample_pulse(&p).unwrap();
            assert!((measured_fwhm(&s, &p) - hold).abs() < p.time_step_ns, "hold {hold}");
        }
    }

    #[test]
    fn symmetric_and_continuous() {
        let p = cz_pulse();
        let total = p.total_duration();
        let s = sample_pulse(&p).unwrap();
        for &(t, f) in &s {
            assert!((f - frequency_at(&p, total - t).unwrap()).abs() < 1e-12);
        }
        let bound = (p.target_ghz() - p.parking_ghz).abs() * PI * p.time_step_ns / (2.0 * p.ramp_ns) + 1e-12;
        for w in s.windows(2) {
            assert!((w[1].1 - w[0].1).abs() < bound);
        }
    }

    #[test]
    fn invalid_pulses() {
        assert!(PulseSpec::new(6.1, 5.5, 1.0).validate().is_err());
        let mut p = PulseSpec::new(6.1, 5.5, 10.0);
        p.time_step_ns = 0.0;
        assert!(sample_pulse(&p).is_err());
    }
}
