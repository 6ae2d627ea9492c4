//! Physical constants and superconductor / barrier material records.
//!
//! Everything is strict SI: energies in joules, lengths in metres, densities
//! in m⁻³. Values are CODATA 2018 (the SI-exact ones where defined).

use crate::error::{ensure_positive, Error, Result};

/// Planck constant (J·s), exact.
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = H / (2.0 * std::f64::consts::PI);
/// Elementary charge (C), exact.
pub const E: f64 = 1.602_176_634e-19;
/// Cooper-pair charge magnitude 2e (C).
pub const E_STAR: f64 = 2.0 * E;
/// Electron mass (kg).
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Cooper-pair mass 2m_e (kg).
pub const M_STAR: f64 = 2.0 * M_E;
/// Boltzmann constant (J/K), exact.
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Superconducting flux quantum h/2e (Wb).
pub const PHI0: f64 = H / E_STAR;

/// BCS weak-coupling ratio Δ/(k_B·T_C).
pub const BCS_RATIO: f64 = 1.764;

/// The constant set as a value, for code that wants to pass it around or print it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub h: f64,
    pub e: f64,
    pub e_star: f64,
    pub m_e: f64,
    pub m_star_default: f64,
    pub k_b: f64,
    pub eps0: f64,
    pub phi0: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    h: H,
    e: E,
    e_star: E_STAR,
    m_e: M_E,
    m_star_default: M_STAR,
    k_b: K_B,
    eps0: EPS0,
    phi0: PHI0,
};

/// Superconducting electrode parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperconductorParams {
    pub name: String,
    /// Critical temperature (K).
    pub t_c: f64,
    /// Gap energy Δ_SC (J).
    pub delta_sc: f64,
    /// Density of states at the Fermi level, states/(J·m³).
    pub rho_f: f64,
    /// Boson (Cooper-pair) density (m⁻³).
    pub n_star: f64,
    /// Maximum sustainable critical current density (A/m²).
    pub j_c_max: f64,
    /// Ensemble relaxation time of the normal channel (s).
    pub tau_n: f64,
    /// Fermi energy (J).
    pub eps_f: f64,
}

impl SuperconductorParams {
    /// Checks the hard invariants and returns soft-regime warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        ensure_positive("T_C", self.t_c)?;
        ensure_positive("Delta_SC", self.delta_sc)?;
        ensure_positive("rho_F", self.rho_f)?;
        ensure_positive("n_star", self.n_star)?;
        ensure_positive("J_C_max", self.j_c_max)?;
        ensure_positive("tau_n", self.tau_n)?;
        ensure_positive("eps_F", self.eps_f)?;
        if self.delta_sc >= self.eps_f {
            return Err(Error::InvalidParameter {
                name: "Delta_SC",
                value: self.delta_sc,
                reason: "must be below eps_F",
            });
        }
        let mut warnings = Vec::new();
        if self.delta_sc > self.eps_f / 10.0 {
            warnings.push(format!(
                "{}: Delta_SC = {:e} J exceeds eps_F/10; eps_F >> Delta_SC approximations degrade",
                self.name, self.delta_sc
            ));
        }
        Ok(warnings)
    }

    /// Gap energy from the BCS weak-coupling relation, Δ = 1.764·k_B·T_C.
    pub fn bcs_gap(t_c: f64) -> f64 {
        BCS_RATIO * K_B * t_c
    }
}

/// Semiconductor barrier parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierParams {
    /// Relative permittivity.
    pub eps_r: f64,
    /// Tunnelling carrier mass (kg).
    pub m_star: f64,
    /// Full barrier thickness 2a (m).
    pub d: f64,
    /// Barrier height at zero gate drive (J).
    pub v0_base: f64,
    /// Fraction of e·V_GS that reaches the barrier, in (0, 1].
    pub gate_lever: f64,
}

impl BarrierParams {
    /// Silicon barrier with Cooper-pair mass.
    pub fn silicon(d: f64, v0_base: f64) -> Self {
        Self {
            eps_r: 11.68,
            m_star: M_STAR,
            d,
            v0_base,
            gate_lever: 1.0,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.d / 2.0
    }

    pub fn validate(&self) -> Result<Vec<String>> {
        ensure_positive("d", self.d)?;
        ensure_positive("m_star", self.m_star)?;
        ensure_positive("V0", self.v0_base)?;
        if !(self.eps_r >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "eps_r",
                value: self.eps_r,
                reason: "must be >= 1",
            });
        }
        if !(self.gate_lever > 0.0 && self.gate_lever <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "gate_lever",
                value: self.gate_lever,
                reason: "must lie in (0, 1]",
            });
        }
        let mut warnings = Vec::new();
        // thin-barrier regime; 1 nm plus rounding slack
        if self.d > 1.05e-9 {
            warnings.push(format!(
                "barrier thickness {:e} m is above the ~1 nm tunnelling regime",
                self.d
            ));
        }
        Ok(warnings)
    }
}

/// Provenance note attached to each registry entry.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialEntry {
    pub params: SuperconductorParams,
    pub notes: Vec<(&'static str, String)>,
}

pub const BUILTIN_NAMES: &[&str] = &["niobium"];

/// Looks up a built-in superconductor by (case-insensitive) name.
pub fn builtin_material(name: &str) -> Result<SuperconductorParams> {
    match name.to_ascii_lowercase().as_str() {
        "niobium" | "nb" => Ok(niobium()),
        _ => Err(Error::UnknownMaterial {
            name: name.to_string(),
            known: BUILTIN_NAMES.join(", "),
        }),
    }
}

/// Niobium defaults.
///
/// T_C is 10 K rather than the literature 9.25 K so that k_B·T_C/h lands on
/// the 208 GHz soft operating limit. Δ_SC follows BCS. τ_n puts R_n at 1 Ω
/// for I_C = 20 mA.
pub fn niobium() -> SuperconductorParams {
    let t_c = 10.0;
    SuperconductorParams {
        name: "niobium".to_string(),
        t_c,
        delta_sc: SuperconductorParams::bcs_gap(t_c),
        rho_f: 5.2e47,
        n_star: 1e20,
        j_c_max: 2e10,
        tau_n: PHI0 / (2.0 * std::f64::consts::PI * 0.020 * 1.0),
        eps_f: 5.32 * E,
    }
}

pub fn builtin_entries() -> Vec<MaterialEntry> {
    vec![MaterialEntry {
        params: niobium(),
        notes: vec![
            ("T_C", "10 K; back-solved from f_c = 208.27 GHz (literature 9.25 K)".into()),
            ("Delta_SC", "BCS 1.764 k_B T_C".into()),
            ("rho_F", "~1.5 states/(eV atom) x 5.56e28 atoms/m^3".into()),
            ("n_star", "nominal 1e20 m^-3".into()),
            ("J_C_max", "2e6 A/cm^2".into()),
            ("tau_n", "R_n = 1 ohm at I_C = 20 mA".into()),
            ("eps_F", "5.32 eV (Nb literature)".into()),
        ],
    }]
}

/// Soft operating frequency f_c = k_B·T_C/h.
pub fn critical_frequency(sc: &SuperconductorParams) -> f64 {
    K_B * sc.t_c / H
}
