use serde::{Deserialize, Serialize};

use super::{GuidanceError, ZoneGrid};
use crate::geometry::Point;

/// Linear distance-to-tone mapping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SonificationConfig {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    /// Distance at which the tone bottoms out; half the frame diagonal when unset.
    pub d_max_px: Option<f64>,
    pub period_max_ms: f64,
    pub period_min_ms: f64,
}

impl Default for SonificationConfig {
    fn default() -> Self {
        Self {
            f_min_hz: 220.0,
            f_max_hz: 880.0,
            d_max_px: None,
            period_max_ms: 400.0,
            period_min_ms: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SonificationParams {
    /// Stereo pan, −1 is fully left.
    pub pan: f64,
    pub pitch_hz: f64,
    pub beep_period_ms: f64,
}

/// Maps the fingertip-to-target displacement onto pan, pitch and beep rate.
pub fn sonification_params(
    fingertip: Point,
    target_center: Point,
    frame: &ZoneGrid,
    cfg: &SonificationConfig,
) -> Result<SonificationParams, GuidanceError> {
    for p in [fingertip, target_center] {
        if !frame.contains(p) {
            return Err(GuidanceError::OutOfFrame { x: p.x, y: p.y });
        }
    }
    let dx = target_center.x - fingertip.x;
    let pan = (dx / (frame.width / 2.0)).clamp(-1.0, 1.0);
    let d_max = cfg
        .d_max_px
        .unwrap_or_else(|| frame.width.hypot(frame.height) / 2.0);
    let closeness = 1.0 - fingertip.distance(&target_center).min(d_max) / d_max;
    Ok(SonificationParams {
        pan,
        pitch_hz: cfg.f_min_hz + (cfg.f_max_hz - cfg.f_min_hz) * closeness,
        beep_period_ms: cfg.period_max_ms - (cfg.period_max_ms - cfg.period_min_ms) * closeness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FRAME: ZoneGrid = ZoneGrid { width: 1280.0, height: 720.0 };

    #[test]
    fn worked_examples() {
        let cfg = SonificationConfig::default();
        let on = sonification_params(Point::new(300.0, 200.0), Point::new(300.0, 200.0), &FRAME, &cfg).unwrap();
        assert_eq!(on, SonificationParams { pan: 0.0, pitch_hz: 880.0, beep_period_ms: 100.0 });

        let left = sonification_params(Point::new(700.0, 300.0), Point::new(500.0, 300.0), &FRAME, &cfg).unwrap();
        assert!((left.pan + 0.3125).abs() < 1e-12);

        let far = sonification_params(Point::new(0.0, 0.0), Point::new(1280.0, 720.0), &FRAME, &cfg).unwrap();
        assert!((far.pitch_hz - 220.0).abs() < 1e-9, "{far:?}");
        assert!((far.beep_period_ms - 400.0).abs() < 1e-9);

        assert!(sonification_params(Point::new(2000.0, 0.0), Point::new(1.0, 1.0), &FRAME, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn pan_is_odd_and_pitch_monotone(fx in 0.0f64..1280.0, fy in 0.0f64..720.0, dx in 0.0f64..600.0, extra in 0.0f64..300.0) {
            let cfg = SonificationConfig::default();
            let finger = Point::new(640.0, fy);
            let right = sonification_params(finger, Point::new(640.0 + dx, fy), &FRAME, &cfg).unwrap();
            let left = sonification_params(finger, Point::new(640.0 - dx, fy), &FRAME, &cfg).unwrap();
            prop_assert!((right.pan + left.pan).abs() < 1e-12);
            prop_assert!(right.pan >= 0.0);
            let near = sonification_params(Point::new(fx, fy), Point::new(fx, fy), &FRAME, &cfg).unwrap();
            let target = Point::new((fx + dx).min(1280.0), fy);
            let farther = Point::new((fx + dx + extra).min(1280.0), fy);
            let a = sonification_params(Point::new(fx, fy), target, &FRAME, &cfg).unwrap();
            let b = sonification_params(Point::new(fx, fy), farther, &FRAME, &cfg).unwrap();
            prop_assert!(near.pitch_hz >= a.pitch_hz && a.pitch_hz >= b.pitch_hz);
            prop_assert!((220.0..=880.0).contains(&b.pitch_hz));
        }
    }
}
