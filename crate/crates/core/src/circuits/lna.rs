use crate::constants::{E, HBAR, PHI0};
use crate::error::{ensure_positive, Error, Result};
use crate::junction::{critical_current, normal_resistance, JunctionDevice};
use crate::numerics::{log_sinh, relative_error};

use super::{AmplifierResult, Diagnostic};

/// Smallest 2a/ζ_avg for which the closed-form gain is considered in regime.
pub const CLOSED_FORM_MIN_THICKNESS_RATIO: f64 = 5.0;

/// Relative tolerance of the V_A − V_B = I_B·(R_n1 − R_n2) identity.
const NUMERATOR_IDENTITY_TOL: f64 = 1e-10;

/// Single current-biased junction driven between two gate levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LnaConfig {
    pub device: JunctionDevice,
    pub i_bias: f64,
    /// Gate level producing Q-point A (V).
    pub v_ai: f64,
    /// Gate level producing Q-point B (V).
    pub v_bi: f64,
    pub e0: f64,
}

/// Q-point data for one gate level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPoint {
    pub v_in: f64,
    pub zeta: f64,
    pub i_c: f64,
    pub r_n: f64,
    pub v_out: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LnaOperatingPoints {
    pub a: LevelPoint,
    pub b: LevelPoint,
    pub gap_voltage: f64,
}

impl LnaOperatingPoints {
    pub fn output_delta(&self) -> f64 {
        self.a.v_out - self.b.v_out
    }

    pub fn input_delta(&self) -> f64 {
        self.a.v_in - self.b.v_in
    }
}

fn level_point(cfg: &LnaConfig, v_in: f64, gap_voltage: f64) -> Result<LevelPoint> {
    let ic = critical_current(&cfg.device, v_in, cfg.e0)?;
    if !(cfg.i_bias > ic.value) {
        return Err(Error::BranchViolation {
            i_bias: cfg.i_bias,
            i_c: ic.value,
        });
    }
    let r_n = normal_resistance(ic.value, cfg.device.sc.tau_n)?;
    Ok(LevelPoint {
        v_in,
        zeta: ic.zeta,
        i_c: ic.value,
        r_n,
        v_out: gap_voltage + (cfg.i_bias - ic.value) * r_n,
        clamped: ic.clamped,
    })
}

/// Normal-branch Q-point of one input level at the configured bias.
pub fn lna_level_point(cfg: &LnaConfig, v_in: f64) -> Result<LevelPoint> {
    ensure_positive("I_bias", cfg.i_bias)?;
    level_point(cfg, v_in, cfg.device.gap_voltage())
}

/// Solves both Q-points; both must sit on the normal branch.
pub fn lna_operating_points(cfg: &LnaConfig) -> Result<LnaOperatingPoints> {
    ensure_positive("I_bias", cfg.i_bias)?;
    let gap_voltage = cfg.device.gap_voltage();
    Ok(LnaOperatingPoints {
        a: level_point(cfg, cfg.v_ai, gap_voltage)?,
        b: level_point(cfg, cfg.v_bi, gap_voltage)?,
        gap_voltage,
    })
}

fn exact_chain(cfg: &LnaConfig) -> Result<(LnaOperatingPoints, AmplifierResult)> {
    let ops = lna_operating_points(cfg)?;
    let numerator = ops.output_delta();
    let via_rn = cfg.i_bias * (ops.a.r_n - ops.b.r_n);
    let scale = ops.a.v_out.abs().max(ops.b.v_out.abs());
    let residual = (numerator - via_rn).abs();
    assert!(
        residual <= NUMERATOR_IDENTITY_TOL * numerator.abs().max(via_rn.abs()) + 1e-15 * scale,
        "I_C·R_n cancellation broken: V_A − V_B = {numerator:e}, I_B·ΔR_n = {via_rn:e}"
    );

    let mut diagnostics = vec![Diagnostic::new(
        "ic_rn_cancellation",
        Some(if via_rn == 0.0 { residual } else { residual / via_rn.abs() }),
        "V_A - V_B against I_B (R_n1 - R_n2)",
    )];
    if ops.a.clamped || ops.b.clamped {
        diagnostics.push(Diagnostic::new(
            "critical_current_clamped",
            None,
            "J_C reached J_C_max at one or both gate levels; R_n no longer tracks the gate there",
        ));
    }
    let gain = if ops.input_delta() != 0.0 {
        Some(numerator / ops.input_delta())
    } else {
        None
    };
    Ok((
        ops,
        AmplifierResult {
            gain_exact: gain,
            output_delta: Some(numerator),
            diagnostics,
            ..Default::default()
        },
    ))
}

/// Two-point gain (V_A − V_B)/(V_Ai − V_Bi) from the full junction model.
pub fn lna_gain_exact(cfg: &LnaConfig) -> Result<AmplifierResult> {
    exact_chain(cfg).map(|(_, result)| result)
}

/// Parts that enter Γ_Rn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaComponents {
    pub phi0: f64,
    pub m_star: f64,
    pub tau_n: f64,
    pub sqrt_n1n2: f64,
    pub area: f64,
    pub a: f64,
    /// J_C prefactor of the active convention (A·m).
    pub jc_prefactor: f64,
    /// √(ħ²/(2·m*·e)), converts 1/√volts into metres.
    pub length_scale: f64,
}

/// Γ_Rn = R_n-coefficient × sinh(2a/ζ_avg) × √(ħ²/(2m*e)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRn {
    pub value: f64,
    pub ln_value: f64,
    pub zeta_avg: f64,
    pub components: GammaComponents,
}

impl GammaRn {
    /// 2a/ζ_avg.
    pub fn thickness_ratio(&self) -> f64 {
        2.0 * self.components.a / self.zeta_avg
    }
}

/// Coefficient c with R_n = c·ζ·sinh(2a/ζ).
pub fn resistance_coefficient(device: &JunctionDevice) -> f64 {
    let k = device.convention.prefactor(device.barrier.m_star);
    let sqrt_n = (device.state.n1 * device.state.n2).sqrt();
    PHI0 / (2.0 * std::f64::consts::PI * device.sc.tau_n * device.area * k * sqrt_n)
}

pub fn gamma_rn(device: &JunctionDevice, zeta1: f64, zeta2: f64) -> Result<GammaRn> {
    ensure_positive("zeta1", zeta1)?;
    ensure_positive("zeta2", zeta2)?;
    let zeta_avg = (0.5 * (zeta1 * zeta1 + zeta2 * zeta2)).sqrt();
    let a = device.barrier.half_width();
    let m_star = device.barrier.m_star;
    let length_scale = HBAR / (2.0 * m_star * E).sqrt();
    let coeff = resistance_coefficient(device);
    let ln_value = coeff.ln() + log_sinh(2.0 * a / zeta_avg)? + length_scale.ln();
    Ok(GammaRn {
        value: ln_value.exp(),
        ln_value,
        zeta_avg,
        components: GammaComponents {
            phi0: PHI0,
            m_star,
            tau_n: device.sc.tau_n,
            sqrt_n1n2: (device.state.n1 * device.state.n2).sqrt(),
            area: device.area,
            a,
            jc_prefactor: device.convention.prefactor(m_star),
            length_scale,
        },
    })
}

/// Resistance difference R_n1 − R_n2 two ways: exactly, and with the sinh
/// factor pulled out at ζ_avg. Returns (exact, factored).
pub fn sinh_factoring_pair(device: &JunctionDevice, zeta1: f64, zeta2: f64) -> Result<(f64, f64)> {
    let gamma = gamma_rn(device, zeta1, zeta2)?;
    let a = device.barrier.half_width();
    let c = resistance_coefficient(device);
    let r = |z: f64| c * z * (2.0 * a / z).sinh();
    let exact = r(zeta1) - r(zeta2);
    let factored = c * (2.0 * a / gamma.zeta_avg).sinh() * (zeta1 - zeta2);
    Ok((exact, factored))
}

/// Closed-form small-signal gain A_V = I_B·Γ_Rn/(2·V0^{3/2}), with V0 the
/// zero-gate barrier height in volts.
///
/// The diagnostics measure each stacked approximation against the exact
/// chain: sinh factoring at ζ_avg, the square-root form of ζ, the binomial
/// expansion as written ((1 + V/V0) rather than (1 + V/2V0)), and the final
/// gain against the two-point gain.
pub fn lna_gain_closed_form(cfg: &LnaConfig) -> Result<AmplifierResult> {
    let (ops, mut result) = exact_chain(cfg)?;
    let device = &cfg.device;
    let gamma = gamma_rn(device, ops.a.zeta, ops.b.zeta)?;
    let v0 = (device.barrier.v0_base - cfg.e0) / E;
    ensure_positive("V0 - E0", v0)?;
    let gain = cfg.i_bias * gamma.value / (2.0 * v0.powf(1.5));
    result.gain_closed_form = Some(gain);

    let ratio = gamma.thickness_ratio();
    if ratio < CLOSED_FORM_MIN_THICKNESS_RATIO {
        result.diagnostics.push(Diagnostic::new(
            "thin_barrier_warning",
            None,
            format!("2a/zeta_avg = {ratio:.3} < {CLOSED_FORM_MIN_THICKNESS_RATIO}; sinh factoring outside its stated regime"),
        ));
    }
    if device.barrier.gate_lever != 1.0 {
        result.diagnostics.push(Diagnostic::new(
            "gate_lever_ignored",
            None,
            format!(
                "closed form assumes the full gate voltage reaches the barrier; gate_lever = {}",
                device.barrier.gate_lever
            ),
        ));
    }

    let swing = ops.input_delta();
    let step_error = |approx: f64, exact: f64| {
        if exact == 0.0 {
            None
        } else {
            Some(relative_error(approx, exact))
        }
    };

    let (exact_dr, factored_dr) = sinh_factoring_pair(device, ops.a.zeta, ops.b.zeta)?;
    result.diagnostics.push(Diagnostic::new(
        "sinh_factoring",
        step_error(factored_dr, exact_dr),
        format!(
            "zeta1 sinh(2a/zeta1) - zeta2 sinh(2a/zeta2) replaced by sinh(2a/zeta_avg)(zeta1 - zeta2); 2a/zeta_avg = {ratio:.4}"
        ),
    ));

    let ls = gamma.components.length_scale;
    let inv_sqrt = |v: f64| 1.0 / (v0 - v).sqrt();
    let sqrt_form = ls * (inv_sqrt(cfg.v_ai) - inv_sqrt(cfg.v_bi));
    result.diagnostics.push(Diagnostic::new(
        "square_root_form",
        step_error(sqrt_form, ops.a.zeta - ops.b.zeta),
        "zeta1 - zeta2 written as sqrt(hbar^2/2m*)(1/sqrt(V0 - V_Ai) - 1/sqrt(V0 - V_Bi))",
    ));

    let bracket = inv_sqrt(cfg.v_ai) - inv_sqrt(cfg.v_bi);
    let binomial = swing / v0.powf(1.5);
    result.diagnostics.push(Diagnostic::new(
        "binomial_expansion",
        step_error(binomial, bracket),
        "(1 + V_Ai/V0) - (1 + V_Bi/V0) over sqrt(V0); first-order term of (1 - V/V0)^(-1/2) is 1 + V/(2 V0)",
    ));

    if let Some(exact) = result.gain_exact {
        result.diagnostics.push(Diagnostic::new(
            "closed_form_vs_exact",
            Some(relative_error(gain, exact)),
            format!("closed form {gain:e}, two-point gain {exact:e}, ratio {:.6}", gain / exact),
        ));
    }
    Ok(result)
}
