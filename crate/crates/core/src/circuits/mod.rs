//! Behavioural LNA and PA analyses built on the junction model.

mod lna;
mod pa;

pub use lna::*;
pub use pa::*;

use crate::junction::{critical_current, iv_voltage, normal_resistance, JunctionDevice, QPoint};
use crate::error::{Error, Result};

/// One approximation or model check applied during an analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub name: String,
    /// Relative error against the exact path, when one exists.
    pub relative_error: Option<f64>,
    pub detail: String,
}

impl Diagnostic {
    pub fn new(name: impl Into<String>, relative_error: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            relative_error,
            detail: detail.into(),
        }
    }
}

/// Conduction-loss comparison between MOSFET switches and the junction bridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyNote {
    pub p_load: f64,
    pub p_loss_mosfet: f64,
    pub p_loss_junction: f64,
    pub efficiency_mosfet: f64,
    pub efficiency_junction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AmplifierResult {
    pub gain_exact: Option<f64>,
    pub gain_closed_form: Option<f64>,
    /// V_A − V_B for the LNA two-level analysis.
    pub output_delta: Option<f64>,
    pub f_3db: Option<f64>,
    pub p_out: Option<f64>,
    pub efficiency: Option<EfficiencyNote>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Intersection of the horizontal load line I = I_bias with the device curve.
pub fn loadline_qpoint(device: &JunctionDevice, v_gs: f64, e0: f64, i_bias: f64) -> Result<QPoint> {
    if !(i_bias >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "I_bias",
            value: i_bias,
            reason: "must be >= 0",
        });
    }
    let ic = critical_current(device, v_gs, e0)?;
    let r_n = normal_resistance(ic.value, device.sc.tau_n)?;
    iv_voltage(i_bias, ic.value, r_n, device.sc.delta_sc, device.gap_charge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{niobium, BarrierParams, E};
    use crate::junction::{gap_voltage, Branch, GapCharge};

    fn device() -> JunctionDevice {
        JunctionDevice::new(niobium(), BarrierParams::silicon(1e-9, 2.0 * E), 1e-12)
            .with_pair_density(1e26)
    }

    #[test]
    fn below_ic_sits_at_zero_volts() {
        let q = loadline_qpoint(&device(), 0.0, 0.0, 1e-4).unwrap();
        assert_eq!((q.voltage, q.branch), (0.0, Branch::Supercurrent));
    }

    #[test]
    fn gate_step_moves_qpoint_onto_normal_branch() {
        let dev = device();
        let ic_a = critical_current(&dev, 0.05, 0.0).unwrap().value;
        let qa = loadline_qpoint(&dev, 0.05, 0.0, ic_a).unwrap();
        assert_eq!(qa.voltage, 0.0);
        let icb = critical_current(&dev, -0.05, 0.0).unwrap().value;
        assert!(icb < ic_a);
        let rb = normal_resistance(icb, dev.sc.tau_n).unwrap();
        let qb = loadline_qpoint(&dev, -0.05, 0.0, ic_a).unwrap();
        let expected = gap_voltage(dev.sc.delta_sc, GapCharge::Electron) + (ic_a - icb) * rb;
        assert_eq!(qb.branch, Branch::Normal);
        assert!((qb.voltage - expected).abs() < 1e-15);
    }

    #[test]
    fn gate_sweep_gives_monotone_vds() {
        let dev = device();
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let v = -0.2 + 0.004 * k as f64;
            let q = loadline_qpoint(&dev, v, 0.0, 5e-3).unwrap();
            assert_eq!(q.branch, Branch::Normal);
            assert!(q.voltage < prev);
            prev = q.voltage;
        }
    }
}
