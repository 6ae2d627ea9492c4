//! Boson tunnelling-noise carrier counts.
//!
//! The carrier count is an integral over the band just above ε_F + Δ_SC of
//! density of states × occupancy × barrier transmission. This module
//! evaluates it by quadrature with the exact transmission coefficient and
//! alongside the closed-form chain (constant Bose-Einstein overestimate,
//! linearised transmission, approximate antiderivative), reporting how far
//! each shortcut moves the answer.

use crate::constants::{critical_frequency, BarrierParams, SuperconductorParams, HBAR, K_B};
use crate::error::{ensure_positive, Error, Result};
use crate::numerics::{integrate, log_sinh, relative_error, QuadratureResult, Tolerance};

/// Exponent used in the constant Bose-Einstein overestimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentMode {
    /// f_c/f_min.
    #[default]
    Computed,
    /// The rounded value 200.
    Fixed,
}

impl ExponentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExponentMode::Computed => "computed",
            ExponentMode::Fixed => "fixed",
        }
    }
}

pub const FIXED_BOSE_EXPONENT: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupancyMode {
    Exact,
    Overestimate,
}

/// Transmission model used inside the carrier integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionModel {
    Exact,
    /// 16·(ε/V₀)·(1 − ε/V₀)·e^{−2β}.
    Reference,
    /// 16·(ε − V₀)/V₀ as written; negative below the barrier top.
    Literal,
}

/// Smallest β treated as "large" by the transmission asymptotes.
pub const LARGE_BETA: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseParams {
    pub sc: SuperconductorParams,
    /// Height `v0_base` measured from the band bottom (J), width `d` = L.
    pub barrier: BarrierParams,
    /// Level degeneracy g at ε_F + Δ_SC.
    pub g_degeneracy: f64,
    /// Band Δ above ε_F + Δ_SC (J).
    pub energy_window: f64,
    pub f_min: f64,
    /// Operating temperature (K).
    pub temperature: f64,
    pub directional_third: bool,
    pub exponent_mode: ExponentMode,
    pub tolerance: Tolerance,
}

impl NoiseParams {
    pub fn new(sc: SuperconductorParams, barrier: BarrierParams) -> Self {
        Self {
            sc,
            barrier,
            g_degeneracy: 1.0,
            energy_window: 3.313e-23,
            f_min: 1e9,
            temperature: 4.2,
            directional_third: false,
            exponent_mode: ExponentMode::default(),
            tolerance: Tolerance::default(),
        }
    }

    pub fn v0(&self) -> f64 {
        self.barrier.v0_base
    }

    /// Lower integration limit ε_F + Δ_SC.
    pub fn band_floor(&self) -> f64 {
        self.sc.eps_f + self.sc.delta_sc
    }

    pub fn band_ceiling(&self) -> f64 {
        self.band_floor() + self.energy_window
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = self.sc.validate()?;
        ensure_positive("L", self.barrier.d)?;
        ensure_positive("m_star", self.barrier.m_star)?;
        ensure_positive("V0", self.barrier.v0_base)?;
        ensure_positive("g", self.g_degeneracy)?;
        ensure_positive("window", self.energy_window)?;
        ensure_positive("f_min", self.f_min)?;
        ensure_positive("T", self.temperature)?;
        self.tolerance.validate()?;
        if !(self.temperature < self.sc.t_c) {
            return Err(Error::InvalidParameter {
                name: "T",
                value: self.temperature,
                reason: "operating temperature must be below T_C",
            });
        }
        if !(self.band_ceiling() < self.v0()) {
            return Err(Error::InvalidParameter {
                name: "V0",
                value: self.v0(),
                reason: "must exceed eps_F + Delta_SC + window for sub-barrier tunnelling",
            });
        }
        if self.f_min > critical_frequency(&self.sc) {
            warnings.push(format!(
                "f_min = {:e} Hz is above f_c; the occupancy overestimate no longer bounds anything",
                self.f_min
            ));
        }
        Ok(warnings)
    }

    /// Exponent of the constant occupancy 1/(e^x − 1).
    pub fn bose_exponent(&self) -> f64 {
        match self.exponent_mode {
            ExponentMode::Computed => critical_frequency(&self.sc) / self.f_min,
            ExponentMode::Fixed => FIXED_BOSE_EXPONENT,
        }
    }

    /// 1/3 when only carriers moving toward the junction are counted.
    pub fn directional_factor(&self) -> f64 {
        if self.directional_third {
            1.0 / 3.0
        } else {
            1.0
        }
    }

    fn beta(&self, eps: f64) -> f64 {
        self.barrier.d / HBAR * (2.0 * self.barrier.m_star * (self.v0() - eps)).sqrt()
    }
}

/// 2ρ_F·ε/√(ε² − Δ_SC²), for ε > Δ_SC.
pub fn dos_sc(eps: f64, p: &NoiseParams) -> Result<f64> {
    let d = p.sc.delta_sc;
    if !(eps > d) {
        return Err(Error::Domain {
            what: "dos_sc",
            value: eps,
            domain: "eps > Delta_SC",
        });
    }
    Ok(2.0 * p.sc.rho_f * eps / ((eps - d) * (eps + d)).sqrt())
}

/// Boson occupancy: g/(e^{(ε−ε_F)/k_BT} − 1), or the constant
/// 1/(e^{x} − 1) with x from [`NoiseParams::bose_exponent`].
pub fn be_occupancy(eps: f64, p: &NoiseParams, mode: OccupancyMode) -> Result<f64> {
    match mode {
        OccupancyMode::Exact => {
            let x = (eps - p.sc.eps_f) / (K_B * p.temperature);
            if !(x > 0.0) {
                return Err(Error::Domain {
                    what: "be_occupancy",
                    value: eps,
                    domain: "eps > eps_F",
                });
            }
            Ok(p.g_degeneracy / x.exp_m1())
        }
        OccupancyMode::Overestimate => Ok(1.0 / p.bose_exponent().exp_m1()),
    }
}

fn check_sub_barrier(what: &'static str, eps: f64, v0: f64) -> Result<()> {
    if eps > 0.0 && eps < v0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: eps,
            domain: "0 < eps < V0",
        })
    }
}

/// Rectangular-barrier transmission
/// 1/(1 + V₀²/(4ε(V₀−ε))·sinh²β), β = (L/ħ)√(2m*(V₀−ε)).
pub fn transmission_exact(eps: f64, p: &NoiseParams) -> Result<f64> {
    let v0 = p.v0();
    check_sub_barrier("transmission_exact", eps, v0)?;
    let beta = p.beta(eps);
    if beta == 0.0 {
        return Ok(1.0);
    }
    let ln_prefactor = 2.0 * v0.ln() - (4.0 * eps * (v0 - eps)).ln();
    let ln_term = ln_prefactor + 2.0 * log_sinh(beta)?;
    // 1/(1 + e^t) without overflow
    Ok(if ln_term > 0.0 {
        let s = (-ln_term).exp();
        s / (1.0 + s)
    } else {
        1.0 / (1.0 + ln_term.exp())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionApprox {
    /// 16·(ε − V₀)/V₀.
    pub literal: f64,
    /// 16·(ε/V₀)·(1 − ε/V₀)·e^{−2β}.
    pub reference: f64,
    pub beta: f64,
    pub warning: Option<String>,
}

impl TransmissionApprox {
    /// The linearised form has the wrong sign below the barrier top.
    pub fn literal_sign_mismatch(&self) -> bool {
        self.literal.signum() != self.reference.signum()
    }
}

pub fn transmission_approx(eps: f64, p: &NoiseParams) -> Result<TransmissionApprox> {
    let v0 = p.v0();
    check_sub_barrier("transmission_approx", eps, v0)?;
    let beta = p.beta(eps);
    let r = eps / v0;
    let warning = (beta < LARGE_BETA)
        .then(|| format!("beta = {beta:.3} < {LARGE_BETA}; large-argument sinh asymptote is poor"));
    Ok(TransmissionApprox {
        literal: 16.0 * (eps - v0) / v0,
        reference: 16.0 * r * (1.0 - r) * (-2.0 * beta).exp(),
        beta,
        warning,
    })
}

fn transmission(model: TransmissionModel, eps: f64, p: &NoiseParams) -> Result<f64> {
    match model {
        TransmissionModel::Exact => transmission_exact(eps, p),
        TransmissionModel::Reference => transmission_approx(eps, p).map(|t| t.reference),
        TransmissionModel::Literal => transmission_approx(eps, p).map(|t| t.literal),
    }
}

/// Integral of `f` over the band [ε_F+Δ_SC, ε_F+Δ_SC+Δ], computed in the
/// normalised variable u = (ε − floor)/Δ so the tolerances act on O(1)
/// numbers. The result is rescaled back to energy units.
fn integrate_band<F: Fn(f64) -> Result<f64>>(f: F, p: &NoiseParams) -> Result<QuadratureResult> {
    let lo = p.band_floor();
    let width = p.energy_window;
    let failure = std::cell::Cell::new(None);
    let g = |u: f64| match f(lo + width * u) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let r = integrate(g, 0.0, 1.0, &p.tolerance);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = r?;
    Ok(QuadratureResult {
        value: r.value * width,
        error_estimate: r.error_estimate * width,
        ..r
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub closed_form: f64,
    pub quadrature: QuadratureResult,
}

/// Degenerate-level capacity: closed form
/// 2ρ_F·g·(Δ/Δ_SC)·[1 − ½(Δ_SC/(ε_F+Δ_SC))²], and the defining integral
/// ∫ 2ρ_F·g·ε/√(ε²−Δ_SC²) dε by quadrature.
pub fn n1_star_capacity(p: &NoiseParams) -> Result<CapacityReport> {
    let d = p.sc.delta_sc;
    let floor = p.band_floor();
    let closed_form = 2.0
        * p.sc.rho_f
        * p.g_degeneracy
        * (p.energy_window / d)
        * (1.0 - 0.5 * (d / floor).powi(2));
    let quadrature = integrate_band(|eps| Ok(dos_sc(eps, p)? * p.g_degeneracy), p)?;
    Ok(CapacityReport {
        closed_form,
        quadrature,
    })
}

/// 2ρ_F·g/(e^x − 1), the common prefactor of the carrier integral.
pub fn carrier_prefactor(p: &NoiseParams) -> f64 {
    2.0 * p.sc.rho_f * p.g_degeneracy / p.bose_exponent().exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierEstimate {
    /// n* (m⁻³), including the directional factor when enabled.
    pub value: f64,
    pub error_estimate: f64,
    /// ∫ ε/√(ε²−Δ_SC²)·T_r dε (J).
    pub integral: f64,
    pub evaluations: usize,
}

/// n* = prefactor × ∫ ε/√(ε²−Δ_SC²)·T_r(ε) dε over the band, with the
/// chosen transmission model.
pub fn noise_carriers_with(p: &NoiseParams, model: TransmissionModel) -> Result<CarrierEstimate> {
    p.validate()?;
    let r = integrate_band(
        |eps| Ok(dos_sc(eps, p)? / (2.0 * p.sc.rho_f) * transmission(model, eps, p)?),
        p,
    )?;
    if !r.converged {
        return Err(Error::NonConvergence {
            value: r.value,
            error_estimate: r.error_estimate,
        });
    }
    let scale = carrier_prefactor(p) * p.directional_factor();
    Ok(CarrierEstimate {
        value: scale * r.value,
        error_estimate: scale.abs() * r.error_estimate,
        integral: r.value,
        evaluations: r.evaluations,
    })
}

/// n* by adaptive quadrature with the exact transmission coefficient.
pub fn noise_carriers_quadrature(p: &NoiseParams) -> Result<CarrierEstimate> {
    noise_carriers_with(p, TransmissionModel::Exact)
}

/// ε(ε − V₀)/√(ε² − Δ_SC²): the carrier integrand once the linearised
/// transmission's 16/V₀ is pulled into the prefactor.
pub fn linearised_integrand(eps: f64, p: &NoiseParams) -> f64 {
    let d = p.sc.delta_sc;
    eps * (eps - p.v0()) / ((eps - d) * (eps + d)).sqrt()
}

/// ((ε − V₀)/2)·√(ε²−Δ²) − (Δ²/3)·ln(ε + √(ε²−Δ²)), as written.
pub fn written_antiderivative(eps: f64, p: &NoiseParams) -> f64 {
    let d = p.sc.delta_sc;
    let root = ((eps - d) * (eps + d)).sqrt();
    0.5 * (eps - p.v0()) * root - d * d / 3.0 * (eps + root).ln()
}

/// ((ε − 2V₀)/2)·√(ε²−Δ²) + (Δ²/2)·ln(ε + √(ε²−Δ²)), a true antiderivative
/// of [`linearised_integrand`].
pub fn true_antiderivative(eps: f64, p: &NoiseParams) -> f64 {
    let d = p.sc.delta_sc;
    let root = ((eps - d) * (eps + d)).sqrt();
    0.5 * (eps - 2.0 * p.v0()) * root + 0.5 * d * d * (eps + root).ln()
}

/// (Δ/2)·√((ε_F+Δ_SC)² − Δ_SC²) − Δ_SC²/3.
pub fn closed_form_bracket(p: &NoiseParams) -> f64 {
    let d = p.sc.delta_sc;
    let floor = p.band_floor();
    0.5 * p.energy_window * ((floor - d) * (floor + d)).sqrt() - d * d / 3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCarriers {
    pub value: f64,
    pub bracket: f64,
    /// 32·ρ_F·g/(V₀·(e^x − 1)).
    pub prefactor: f64,
    pub warnings: Vec<String>,
}

/// n* = 32·ρ_F·g/(V₀·(e^x − 1)) × [(Δ/2)·√((ε_F+Δ_SC)² − Δ_SC²) − Δ_SC²/3].
pub fn noise_carriers_closed_form(p: &NoiseParams) -> Result<ClosedFormCarriers> {
    let mut warnings = p.validate()?;
    if !(p.v0() >= 10.0 * p.energy_window) {
        warnings.push("V0 >> window assumption not met (V0 < 10 window)".to_string());
    }
    if !(p.band_floor() > p.energy_window) {
        warnings.push("eps_F + Delta_SC > window assumption not met".to_string());
    }
    let bracket = closed_form_bracket(p);
    if !(bracket > 0.0) {
        return Err(Error::NegativeBracket { value: bracket });
    }
    let prefactor = 16.0 / p.v0() * carrier_prefactor(p);
    Ok(ClosedFormCarriers {
        value: prefactor * bracket * p.directional_factor(),
        bracket,
        prefactor,
        warnings,
    })
}

/// Relative accuracy demanded of the antiderivative spot check.
pub const ANTIDERIVATIVE_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AntiderivativeSample {
    pub eps: f64,
    pub integrand: f64,
    pub written_derivative: f64,
    pub true_derivative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiderivativeCheck {
    pub samples: Vec<AntiderivativeSample>,
    /// max |d/dε written − integrand| / |integrand|.
    pub written_max_error: f64,
    /// The same for the true antiderivative; validates the differencing.
    pub true_max_error: f64,
    pub passed: bool,
    pub note: String,
}

/// Central-difference derivative of both antiderivatives at `n` points
/// spread over the band, compared with the integrand.
pub fn antiderivative_check(p: &NoiseParams, n: usize) -> Result<AntiderivativeCheck> {
    p.validate()?;
    let n = n.max(2);
    let lo = p.band_floor();
    let h = lo * 1e-5;
    let diff = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let written = |x| written_antiderivative(x, p);
    let truth = |x| true_antiderivative(x, p);
    let samples: Vec<_> = (0..n)
        .map(|k| {
            let eps = lo + p.energy_window * k as f64 / (n - 1) as f64;
            AntiderivativeSample {
                eps,
                integrand: linearised_integrand(eps, p),
                written_derivative: diff(&written, eps),
                true_derivative: diff(&truth, eps),
            }
        })
        .collect();
    let max_err = |pick: fn(&AntiderivativeSample) -> f64| {
        samples
            .iter()
            .map(|s| relative_error(pick(s), s.integrand))
            .fold(0.0, f64::max)
    };
    let written_max_error = max_err(|s| s.written_derivative);
    let true_max_error = max_err(|s| s.true_derivative);
    let passed = written_max_error <= ANTIDERIVATIVE_CHECK_TOL;
    let note = if passed {
        "written antiderivative reproduces the integrand".to_string()
    } else {
        format!(
            "written antiderivative fails (max rel. error {written_max_error:.3e}); \
             a true antiderivative has algebraic factor (eps - 2 V0)/2 where (eps - V0)/2 is written, \
             and log coefficient +Delta_SC^2/2 where -Delta_SC^2/3 is written"
        )
    };
    Ok(AntiderivativeCheck {
        samples,
        written_max_error,
        true_max_error,
        passed,
        note,
    })
}

/// The linearised-transmission integral four ways (J²).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralFactors {
    pub quadrature: QuadratureResult,
    pub true_antiderivative: f64,
    pub written_antiderivative: f64,
    pub closed_form_bracket: f64,
}

pub fn integral_factors(p: &NoiseParams) -> Result<IntegralFactors> {
    p.validate()?;
    let (lo, hi) = (p.band_floor(), p.band_ceiling());
    Ok(IntegralFactors {
        quadrature: integrate_band(|eps| Ok(linearised_integrand(eps, p)), p)?,
        true_antiderivative: true_antiderivative(hi, p) - true_antiderivative(lo, p),
        written_antiderivative: written_antiderivative(hi, p) - written_antiderivative(lo, p),
        closed_form_bracket: closed_form_bracket(p),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub n_star_quadrature: f64,
    pub n_star_quadrature_error: f64,
    pub n_star_closed_form: f64,
    /// Quadrature with the linearised transmission: the closed form's own integrand.
    pub n_star_linearised_quadrature: f64,
    pub n1_star_capacity: f64,
    pub n1_star_capacity_quadrature: f64,
    pub directional_fraction_applied: bool,
    pub bose_exponent: f64,
    /// |quadrature − closed form| / quadrature.
    pub relative_error: f64,
    pub quadrature_abs_tol: f64,
    pub quadrature_rel_tol: f64,
    pub integrals: IntegralFactors,
    pub antiderivative: AntiderivativeCheck,
    /// Mid-band transmission, exact / reference asymptote / literal.
    pub midband_transmission: (f64, f64, f64),
    pub warnings: Vec<String>,
}

pub fn noise_report(p: &NoiseParams) -> Result<NoiseReport> {
    let mut warnings = p.validate()?;
    let q = noise_carriers_quadrature(p)?;
    let lin = noise_carriers_with(p, TransmissionModel::Literal)?;
    let cf = noise_carriers_closed_form(p)?;
    warnings.extend(cf.warnings.iter().cloned());
    let cap = n1_star_capacity(p)?;
    let mid = p.band_floor() + 0.5 * p.energy_window;
    let approx = transmission_approx(mid, p)?;
    warnings.extend(approx.warning.clone());
    Ok(NoiseReport {
        n_star_quadrature: q.value,
        n_star_quadrature_error: q.error_estimate,
        n_star_closed_form: cf.value,
        n_star_linearised_quadrature: lin.value,
        n1_star_capacity: cap.closed_form,
        n1_star_capacity_quadrature: cap.quadrature.value,
        directional_fraction_applied: p.directional_third,
        bose_exponent: p.bose_exponent(),
        relative_error: (q.value - cf.value).abs() / q.value.abs().max(f64::MIN_POSITIVE),
        quadrature_abs_tol: p.tolerance.abs_tol,
        quadrature_rel_tol: p.tolerance.rel_tol,
        integrals: integral_factors(p)?,
        antiderivative: antiderivative_check(p, 20)?,
        midband_transmission: (transmission_exact(mid, p)?, approx.reference, approx.literal),
        warnings,
    })
}
