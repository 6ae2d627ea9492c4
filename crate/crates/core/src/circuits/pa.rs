use crate::constants::{BarrierParams, SuperconductorParams};
use crate::error::{ensure_positive, Error, Result};
use crate::junction::{critical_current, junction_capacitance, JunctionDevice};

use super::{AmplifierResult, Diagnostic, EfficiencyNote};

/// Reference PA operating point (dBm, Hz) that trade-off reports compare against.
pub const REFERENCE_PA_POINT: (f64, f64) = (-10.0, 350e9);

/// Bridge arm positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::TopLeft, Arm::TopRight, Arm::BottomLeft, Arm::BottomRight];

    pub fn name(self) -> &'static str {
        match self {
            Arm::TopLeft => "top-left",
            Arm::TopRight => "top-right",
            Arm::BottomLeft => "bottom-left",
            Arm::BottomRight => "bottom-right",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Plus,
    Zero,
    Minus,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Plus, Polarity::Zero, Polarity::Minus];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Plus => "plus",
            Polarity::Zero => "zero",
            Polarity::Minus => "minus",
        }
    }

    /// Arms held at the high gate level (high I_C) in this state.
    pub fn on_arms(self) -> &'static [Arm] {
        match self {
            Polarity::Plus => &[Arm::TopRight, Arm::BottomLeft],
            Polarity::Minus => &[Arm::TopLeft, Arm::BottomRight],
            Polarity::Zero => &Arm::ALL,
        }
    }
}

/// Four-junction H-bridge steering a bias current through a load.
#[derive(Debug, Clone, PartialEq)]
pub struct PaConfig {
    /// Indexed top-left, top-right, bottom-left, bottom-right.
    pub devices: [JunctionDevice; 4],
    pub z_load: f64,
    pub i_bias: f64,
    pub gate_high: f64,
    pub gate_low: f64,
    pub e0: f64,
}

impl PaConfig {
    pub fn uniform(device: JunctionDevice, z_load: f64, i_bias: f64, gate_high: f64, gate_low: f64) -> Self {
        Self {
            devices: [device.clone(), device.clone(), device.clone(), device],
            z_load,
            i_bias,
            gate_high,
            gate_low,
            e0: 0.0,
        }
    }

    pub fn device(&self, arm: Arm) -> &JunctionDevice {
        &self.devices[arm.index()]
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        ensure_positive("Z_load", self.z_load)?;
        ensure_positive("I_bias", self.i_bias)?;
        let mut warnings = Vec::new();
        for d in &self.devices {
            for w in d.validate()? {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaOutput {
    pub polarity: Polarity,
    pub v_load: f64,
    pub i_load: f64,
    pub p_load: f64,
    pub warnings: Vec<String>,
}

/// Quasi-static bridge state.
///
/// ON arms carry their current at zero voltage; OFF arms are driven to the
/// low gate level. In the balanced state the bias splits evenly and the load
/// sees no current.
pub fn pa_output(cfg: &PaConfig, polarity: Polarity) -> Result<PaOutput> {
    ensure_positive("Z_load", cfg.z_load)?;
    ensure_positive("I_bias", cfg.i_bias)?;
    for &arm in polarity.on_arms() {
        let ic = critical_current(cfg.device(arm), cfg.gate_high, cfg.e0)?;
        if ic.value < cfg.i_bias {
            return Err(Error::SteeringFailure {
                device: arm.name(),
                i_c: ic.value,
                i_bias: cfg.i_bias,
            });
        }
    }
    let mut warnings = Vec::new();
    for arm in Arm::ALL {
        if polarity.on_arms().contains(&arm) {
            continue;
        }
        let ic = critical_current(cfg.device(arm), cfg.gate_low, cfg.e0)?;
        if ic.value >= cfg.i_bias {
            warnings.push(format!(
                "{} at gate_low still has I_C = {:e} A >= I_bias; it would not block",
                arm.name(),
                ic.value
            ));
        }
    }
    let i_load = match polarity {
        Polarity::Plus => cfg.i_bias,
        Polarity::Zero => 0.0,
        Polarity::Minus => -cfg.i_bias,
    };
    let v_load = i_load * cfg.z_load;
    Ok(PaOutput {
        polarity,
        v_load,
        i_load,
        p_load: v_load * i_load,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaBandwidth {
    pub c_jn: f64,
    pub tau_rc: f64,
    pub f_3db: f64,
    pub warnings: Vec<String>,
}

/// f_3dB = 1/(2π·Z_load·C_jn/2), two junctions in series with the load.
/// Mismatched devices use the largest capacitance.
pub fn pa_bandwidth(cfg: &PaConfig) -> Result<PaBandwidth> {
    ensure_positive("Z_load", cfg.z_load)?;
    let caps = cfg
        .devices
        .iter()
        .map(JunctionDevice::capacitance)
        .collect::<Result<Vec<_>>>()?;
    let c_jn = caps.iter().copied().fold(0.0, f64::max);
    ensure_positive("C_jn", c_jn)?;
    let mut warnings = Vec::new();
    if caps.iter().any(|&c| c != c_jn) {
        warnings.push(format!(
            "bridge devices differ in capacitance; using worst case C_jn = {c_jn:e} F"
        ));
    }
    let tau_rc = cfg.z_load * c_jn / 2.0;
    Ok(PaBandwidth {
        c_jn,
        tau_rc,
        f_3db: 1.0 / (2.0 * std::f64::consts::PI * tau_rc),
        warnings,
    })
}

/// Conduction loss of a MOSFET bridge (2·R_on·I²) against the junction
/// bridge, whose ON arms drop no voltage.
pub fn pa_efficiency_advantage(cfg: &PaConfig, r_on_mosfet: f64) -> Result<EfficiencyNote> {
    if !(r_on_mosfet >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "R_on",
            value: r_on_mosfet,
            reason: "must be >= 0",
        });
    }
    ensure_positive("Z_load", cfg.z_load)?;
    let p_load = cfg.i_bias * cfg.i_bias * cfg.z_load;
    let p_loss_mosfet = 2.0 * r_on_mosfet * cfg.i_bias * cfg.i_bias;
    Ok(EfficiencyNote {
        p_load,
        p_loss_mosfet,
        p_loss_junction: 0.0,
        efficiency_mosfet: p_load / (p_load + p_loss_mosfet),
        efficiency_junction: 1.0,
    })
}

/// All PA figures in one result.
pub fn pa_analysis(cfg: &PaConfig, r_on_mosfet: f64) -> Result<AmplifierResult> {
    let bw = pa_bandwidth(cfg)?;
    let plus = pa_output(cfg, Polarity::Plus)?;
    let eff = pa_efficiency_advantage(cfg, r_on_mosfet)?;
    let mut diagnostics: Vec<Diagnostic> = bw
        .warnings
        .iter()
        .chain(&plus.warnings)
        .map(|w| Diagnostic::new("pa_warning", None, w.clone()))
        .collect();
    diagnostics.push(Diagnostic::new(
        "quasi_static_switching",
        None,
        "bridge modelled as three static states with no overlap interval",
    ));
    Ok(AmplifierResult {
        f_3db: Some(bw.f_3db),
        p_out: Some(plus.p_load),
        efficiency: Some(eff),
        diagnostics,
        ..Default::default()
    })
}

/// How a target output power maps to the switched current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerConvention {
    /// P = (I·Z)²/Z, full-swing square wave.
    #[default]
    SquareWave,
    /// P = I²·Z/2, sinusoid of peak I.
    Rms,
}

impl PowerConvention {
    pub fn current_for_power(self, p_watts: f64, z_load: f64) -> f64 {
        match self {
            PowerConvention::SquareWave => (p_watts / z_load).sqrt(),
            PowerConvention::Rms => (2.0 * p_watts / z_load).sqrt(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PowerConvention::SquareWave => "square",
            PowerConvention::Rms => "rms",
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub p_dbm: f64,
    pub p_watts: f64,
    pub current: f64,
    pub area: f64,
    pub c_jn: f64,
    pub f_3db: f64,
}

/// Bridge sized at J_C_max for a given switched current.
pub fn pa_sized_point(
    current: f64,
    z_load: f64,
    sc: &SuperconductorParams,
    barrier: &BarrierParams,
    convention: PowerConvention,
) -> Result<TradeoffPoint> {
    ensure_positive("Z_load", z_load)?;
    ensure_positive("J_C_max", sc.j_c_max)?;
    ensure_positive("current", current)?;
    let p_watts = match convention {
        PowerConvention::SquareWave => current * current * z_load,
        PowerConvention::Rms => current * current * z_load / 2.0,
    };
    let area = current / sc.j_c_max;
    let c_jn = junction_capacitance(barrier.eps_r, area, barrier.d)?;
    Ok(TradeoffPoint {
        p_dbm: watts_to_dbm(p_watts),
        p_watts,
        current,
        area,
        c_jn,
        f_3db: 1.0 / (2.0 * std::f64::consts::PI * z_load * c_jn / 2.0),
    })
}

/// Junction sized at J_C_max for each target power, and the resulting
/// bridge bandwidth.
pub fn pa_power_frequency_tradeoff(
    targets_dbm: &[f64],
    z_load: f64,
    sc: &SuperconductorParams,
    barrier: &BarrierParams,
    convention: PowerConvention,
) -> Result<Vec<TradeoffPoint>> {
    ensure_positive("Z_load", z_load)?;
    targets_dbm
        .iter()
        .map(|&p_dbm| {
            let p_watts = dbm_to_watts(p_dbm);
            let current = convention.current_for_power(p_watts, z_load);
            Ok(TradeoffPoint {
                p_dbm,
                p_watts,
                ..pa_sized_point(current, z_load, sc, barrier, convention)?
            })
        })
        .collect()
}
