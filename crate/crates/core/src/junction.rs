//! Gate-modulated SC–Sm–SC junction: barrier decay length, boundary-matched
//! wavefunction, supercurrent density, critical current, piecewise I-V law,
//! normal-channel conductance and junction capacitance.

use num_complex::Complex64;

use crate::constants::{
    BarrierParams, SuperconductorParams, E, EPS0, E_STAR, HBAR, M_E, PHI0,
};
use crate::error::{ensure_positive, Error, Result};
use crate::numerics::{find_root, log_sinh, Tolerance};

/// Charge/mass pair used in the closed-form supercurrent prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurrentConvention {
    /// |e*|·ħ/m* with the barrier's m*; consistent with the coefficient route.
    #[default]
    Pair,
    /// e·ħ/(2·m_e), the prefactor as usually transcribed.
    Bare,
}

impl CurrentConvention {
    /// Prefactor K with J_C = K·√(n1·n2)/(ζ·sinh(2a/ζ)).
    pub fn prefactor(self, m_star: f64) -> f64 {
        match self {
            CurrentConvention::Pair => E_STAR * HBAR / m_star,
            CurrentConvention::Bare => E * HBAR / (2.0 * M_E),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurrentConvention::Pair => "pair",
            CurrentConvention::Bare => "bare",
        }
    }
}

/// Charge used to turn the gap energy 2Δ_SC into a voltage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapCharge {
    #[default]
    Electron,
    Pair,
}

impl GapCharge {
    pub fn charge(self) -> f64 {
        match self {
            GapCharge::Electron => E,
            GapCharge::Pair => E_STAR,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GapCharge::Electron => "e",
            GapCharge::Pair => "e_star",
        }
    }
}

/// Boson density and phase on each electrode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionState {
    pub n1: f64,
    pub theta1: f64,
    pub n2: f64,
    pub theta2: f64,
}

impl WavefunctionState {
    pub fn uniform(n: f64) -> Self {
        Self {
            n1: n,
            theta1: 0.0,
            n2: n,
            theta2: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("n1", self.n1)?;
        ensure_positive("n2", self.n2)
    }

    pub fn phase_difference(&self) -> f64 {
        self.theta1 - self.theta2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionDevice {
    pub sc: SuperconductorParams,
    pub barrier: BarrierParams,
    /// Junction area A_jn (m²).
    pub area: f64,
    pub state: WavefunctionState,
    pub convention: CurrentConvention,
    pub gap_charge: GapCharge,
}

impl JunctionDevice {
    /// Device with both electrodes at the material's boson density.
    pub fn new(sc: SuperconductorParams, barrier: BarrierParams, area: f64) -> Self {
        let state = WavefunctionState::uniform(sc.n_star);
        Self {
            sc,
            barrier,
            area,
            state,
            convention: CurrentConvention::default(),
            gap_charge: GapCharge::default(),
        }
    }

    pub fn with_pair_density(mut self, n: f64) -> Self {
        self.state.n1 = n;
        self.state.n2 = n;
        self
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = self.sc.validate()?;
        warnings.extend(self.barrier.validate()?);
        ensure_positive("area", self.area)?;
        self.state.validate()?;
        Ok(warnings)
    }

    pub fn gap_voltage(&self) -> f64 {
        gap_voltage(self.sc.delta_sc, self.gap_charge)
    }

    pub fn capacitance(&self) -> Result<f64> {
        junction_capacitance(self.barrier.eps_r, self.area, self.barrier.d)
    }

    /// Decay length at gate drive `v_gs` for carrier energy `e0`.
    pub fn decay_length(&self, v_gs: f64, e0: f64) -> Result<f64> {
        let v0 = effective_barrier(&self.barrier, v_gs)?;
        decay_length(v0, e0, self.barrier.m_star)
    }

    /// I_C·R_n, fixed by τ_n alone.
    pub fn ic_rn_product(&self) -> f64 {
        PHI0 / (2.0 * std::f64::consts::PI * self.sc.tau_n)
    }
}

/// V0_eff = V0_base − η·e·V_GS.
pub fn effective_barrier(barrier: &BarrierParams, v_gs: f64) -> Result<f64> {
    let height = barrier.v0_base - barrier.gate_lever * E * v_gs;
    if height > 0.0 {
        Ok(height)
    } else {
        Err(Error::BarrierCollapse {
            height_j: height,
            v_gs,
        })
    }
}

/// ζ = √(ħ²/(2·m*·(V0_eff − E0))).
pub fn decay_length(v0_eff: f64, e0: f64, m_star: f64) -> Result<f64> {
    ensure_positive("m_star", m_star)?;
    let gap = v0_eff - e0;
    if !(gap > 0.0) {
        return Err(Error::AboveBarrier {
            v0_j: v0_eff,
            e0_j: e0,
        });
    }
    Ok(HBAR / (2.0 * m_star * gap).sqrt())
}

fn check_geometry(a: f64, zeta: f64) -> Result<()> {
    ensure_positive("a", a)?;
    ensure_positive("zeta", zeta)
}

/// Coefficients of Ψ(x) = C1·cosh(x/ζ) + C2·sinh(x/ζ) matching Ψ(−a) to
/// electrode 1 and Ψ(+a) to electrode 2.
pub fn wavefunction_coeffs(
    state: &WavefunctionState,
    a: f64,
    zeta: f64,
) -> Result<(Complex64, Complex64)> {
    check_geometry(a, zeta)?;
    let psi1 = Complex64::from_polar(state.n1.sqrt(), state.theta1);
    let psi2 = Complex64::from_polar(state.n2.sqrt(), state.theta2);
    let x = a / zeta;
    let c1 = (psi1 + psi2) / (2.0 * x.cosh());
    let c2 = -(psi1 - psi2) / (2.0 * x.sinh());
    Ok((c1, c2))
}

/// Current density from the coefficient route,
/// J = (q*·ħ/(m*·ζ))·Im(C1*·C2) with the signed pair charge q* = −2e.
pub fn current_density_from_coeffs(c1: Complex64, c2: Complex64, zeta: f64, m_star: f64) -> f64 {
    let q_star = -E_STAR;
    q_star * HBAR / (m_star * zeta) * (c1.conj() * c2).im
}

/// A current density that may lie below the f64 range for thick barriers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupercurrentDensity {
    /// A/m²; 0 when `underflow` is set.
    pub value: f64,
    /// ln|J|, always finite unless J is exactly zero.
    pub ln_magnitude: f64,
    pub underflow: bool,
}

const SINH_LOG_SPACE: f64 = 700.0;

fn density_with_sine(
    state: &WavefunctionState,
    a: f64,
    zeta: f64,
    m_star: f64,
    convention: CurrentConvention,
    sine: f64,
) -> Result<SupercurrentDensity> {
    check_geometry(a, zeta)?;
    state.validate()?;
    let k = convention.prefactor(m_star);
    let x = 2.0 * a / zeta;
    if x <= SINH_LOG_SPACE {
        let value = k * (state.n1 * state.n2).sqrt() / (zeta * x.sinh()) * sine;
        return Ok(SupercurrentDensity {
            value,
            ln_magnitude: value.abs().ln(),
            underflow: false,
        });
    }
    let ln_magnitude =
        k.ln() + 0.5 * (state.n1.ln() + state.n2.ln()) - zeta.ln() - log_sinh(x)? + sine.abs().ln();
    let value = ln_magnitude.exp().copysign(sine);
    Ok(SupercurrentDensity {
        value,
        ln_magnitude,
        underflow: value == 0.0 && sine != 0.0,
    })
}

/// J_S = K·√(n1·n2)/(ζ·sinh(2a/ζ))·sin(θ1 − θ2).
pub fn supercurrent_density(
    state: &WavefunctionState,
    a: f64,
    zeta: f64,
    m_star: f64,
    convention: CurrentConvention,
) -> Result<SupercurrentDensity> {
    let sine = state.phase_difference().sin();
    density_with_sine(state, a, zeta, m_star, convention, sine)
}

/// The supercurrent prefactor: J_S at θ1 − θ2 = π/2.
pub fn critical_current_density(
    state: &WavefunctionState,
    a: f64,
    zeta: f64,
    m_star: f64,
    convention: CurrentConvention,
) -> Result<SupercurrentDensity> {
    density_with_sine(state, a, zeta, m_star, convention, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalCurrent {
    /// I_C (A), after clamping to J_C_max·area.
    pub value: f64,
    /// Tunnelling J_C before clamping (A/m²).
    pub j_c_unclamped: f64,
    pub clamped: bool,
    pub zeta: f64,
    pub v0_eff: f64,
}

/// I_C = min(J_C(ζ(V_GS)), J_C_max)·area.
pub fn critical_current(device: &JunctionDevice, v_gs: f64, e0: f64) -> Result<CriticalCurrent> {
    ensure_positive("area", device.area)?;
    let v0_eff = effective_barrier(&device.barrier, v_gs)?;
    let zeta = decay_length(v0_eff, e0, device.barrier.m_star)?;
    let j = critical_current_density(
        &device.state,
        device.barrier.half_width(),
        zeta,
        device.barrier.m_star,
        device.convention,
    )?;
    let clamped = j.value > device.sc.j_c_max;
    let j_eff = if clamped { device.sc.j_c_max } else { j.value };
    Ok(CriticalCurrent {
        value: j_eff * device.area,
        j_c_unclamped: j.value,
        clamped,
        zeta,
        v0_eff,
    })
}

/// Gate voltage in `[v_lo, v_hi]` at which the unclamped I_C equals `target`.
pub fn gate_for_critical_current(
    device: &JunctionDevice,
    target: f64,
    e0: f64,
    v_lo: f64,
    v_hi: f64,
    tol: &Tolerance,
) -> Result<f64> {
    ensure_positive("target", target)?;
    // log residual keeps the bracket well scaled across decades of I_C
    let residual = |v: f64| match critical_current(device, v, e0) {
        Ok(ic) => (ic.j_c_unclamped * device.area).ln() - target.ln(),
        Err(_) => f64::NAN,
    };
    find_root(residual, v_lo, v_hi, tol)
}

/// R_n = Φ₀/(2π·τ_n·I_C).
pub fn normal_resistance(i_c: f64, tau_n: f64) -> Result<f64> {
    ensure_positive("I_C", i_c)?;
    ensure_positive("tau_n", tau_n)?;
    Ok(PHI0 / (2.0 * std::f64::consts::PI * tau_n * i_c))
}

/// G_n(ω) = (2π·I_C/Φ₀)/(jω + 1/τ_n).
pub fn normal_conductance(omega: f64, i_c: f64, tau_n: f64) -> Result<Complex64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain {
            what: "normal_conductance",
            value: omega,
            domain: "omega >= 0",
        });
    }
    ensure_positive("tau_n", tau_n)?;
    let inductive = 2.0 * std::f64::consts::PI * i_c / PHI0;
    Ok(inductive / Complex64::new(1.0 / tau_n, omega))
}

/// 2Δ_SC converted to volts with the chosen charge.
pub fn gap_voltage(delta_sc: f64, gap_charge: GapCharge) -> f64 {
    2.0 * delta_sc / gap_charge.charge()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Supercurrent,
    Normal,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Supercurrent => "supercurrent",
            Branch::Normal => "normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub current: f64,
    pub voltage: f64,
    pub branch: Branch,
}

/// Piecewise I-V law: zero voltage up to and including I_C, then the gap
/// voltage plus the ohmic normal branch.
pub fn iv_voltage(
    i: f64,
    i_c: f64,
    r_n: f64,
    delta_sc: f64,
    gap_charge: GapCharge,
) -> Result<QPoint> {
    if !(i >= 0.0) {
        return Err(Error::Domain {
            what: "iv_voltage",
            value: i,
            domain: "I >= 0",
        });
    }
    if i <= i_c {
        Ok(QPoint {
            current: i,
            voltage: 0.0,
            branch: Branch::Supercurrent,
        })
    } else {
        Ok(QPoint {
            current: i,
            voltage: gap_voltage(delta_sc, gap_charge) + (i - i_c) * r_n,
            branch: Branch::Normal,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IVCurve {
    pub samples: Vec<QPoint>,
    pub i_c: f64,
    pub r_n: f64,
    pub v_gap: f64,
    pub clamped: bool,
}

impl IVCurve {
    /// Least-squares slope of the normal-branch samples, if there are two.
    pub fn normal_branch_slope(&self) -> Option<f64> {
        let pts: Vec<_> = self
            .samples
            .iter()
            .filter(|q| q.branch == Branch::Normal)
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mean_i = pts.iter().map(|q| q.current).sum::<f64>() / n;
        let mean_v = pts.iter().map(|q| q.voltage).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for q in &pts {
            let di = q.current - mean_i;
            sxy += di * (q.voltage - mean_v);
            sxx += di * di;
        }
        Some(sxy / sxx)
    }
}

/// Current-biased sweep over a uniform grid on [0, I_max].
pub fn iv_sweep(
    device: &JunctionDevice,
    v_gs: f64,
    e0: f64,
    i_max: f64,
    n_points: usize,
) -> Result<IVCurve> {
    ensure_positive("I_max", i_max)?;
    if n_points < 2 {
        return Err(Error::InvalidParameter {
            name: "n_points",
            value: n_points as f64,
            reason: "need at least 2 points",
        });
    }
    let ic = critical_current(device, v_gs, e0)?;
    let r_n = normal_resistance(ic.value, device.sc.tau_n)?;
    let step = i_max / (n_points - 1) as f64;
    let samples = (0..n_points)
        .map(|k| {
            let i = if k == n_points - 1 { i_max } else { k as f64 * step };
            iv_voltage(i, ic.value, r_n, device.sc.delta_sc, device.gap_charge)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IVCurve {
        samples,
        i_c: ic.value,
        r_n,
        v_gap: device.gap_voltage(),
        clamped: ic.clamped,
    })
}

/// C_jn = ε_r·ε₀·A/d.
pub fn junction_capacitance(eps_r: f64, area: f64, d: f64) -> Result<f64> {
    ensure_positive("eps_r", eps_r)?;
    ensure_positive("d", d)?;
    if !(area >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "area",
            value: area,
            reason: "must be >= 0",
        });
    }
    Ok(eps_r * EPS0 * area / d)
}
