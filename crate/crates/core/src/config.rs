//! Run configuration: a line-oriented `key = value` format with `[section]`
//! headers and unit-suffixed quantities.
//!
//! ```text
//! [material]
//! name = niobium
//!
//! [barrier]
//! V0 = 0.3 eV
//!
//! [device]
//! area = 1 um^2
//! d = 1 nm
//!
//! [iv]
//! I_max = 40 mA
//! V_GS = 0, 0.1, 0.2 V
//! ```
//!
//! Parsing is strict: unknown sections, unknown keys, unknown units and
//! duplicated keys are all errors, and exactly one analysis section
//! (`[iv]`, `[lna]`, `[pa]`, `[noise]` or `[tradeoff]`) must be present.
//! Keys are matched case-insensitively. `#` starts a comment.

use std::fmt::Write as _;

use crate::circuits::{LnaConfig, PaConfig, PowerConvention};
use crate::constants::{
    builtin_material, BarrierParams, SuperconductorParams, BUILTIN_NAMES, E, M_E, M_STAR,
};
use crate::error::{Error, Result};
use crate::junction::{CurrentConvention, GapCharge, JunctionDevice, WavefunctionState};
use crate::noise::{ExponentMode, NoiseParams};
use crate::numerics::Tolerance;

/// Physical dimension of a config value, and the units accepted for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    None,
    Length,
    Area,
    Current,
    Voltage,
    Energy,
    Resistance,
    Frequency,
    Time,
    Temperature,
    Density,
    CurrentDensity,
    DensityOfStates,
    Mass,
    PowerDbm,
}

impl Dimension {
    /// Accepted units with their SI scale factors; the first is canonical.
    pub fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::None => &[],
            Dimension::Length => &[
                ("m", 1.0),
                ("cm", 1e-2),
                ("mm", 1e-3),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("nm", 1e-9),
                ("pm", 1e-12),
                ("angstrom", 1e-10),
            ],
            Dimension::Area => &[
                ("m^2", 1.0),
                ("cm^2", 1e-4),
                ("mm^2", 1e-6),
                ("um^2", 1e-12),
                ("µm^2", 1e-12),
                ("nm^2", 1e-18),
            ],
            Dimension::Current => &[("A", 1.0), ("mA", 1e-3), ("uA", 1e-6), ("µA", 1e-6), ("nA", 1e-9)],
            Dimension::Voltage => &[("V", 1.0), ("mV", 1e-3), ("uV", 1e-6), ("µV", 1e-6), ("kV", 1e3)],
            Dimension::Energy => &[
                ("J", 1.0),
                ("eV", E),
                ("meV", 1e-3 * E),
                ("ueV", 1e-6 * E),
                ("µeV", 1e-6 * E),
                ("keV", 1e3 * E),
            ],
            Dimension::Resistance => &[("ohm", 1.0), ("Ohm", 1.0), ("Ω", 1.0), ("mohm", 1e-3), ("kohm", 1e3)],
            Dimension::Frequency => &[
                ("Hz", 1.0),
                ("kHz", 1e3),
                ("MHz", 1e6),
                ("GHz", 1e9),
                ("THz", 1e12),
            ],
            Dimension::Time => &[
                ("s", 1.0),
                ("ms", 1e-3),
                ("us", 1e-6),
                ("µs", 1e-6),
                ("ns", 1e-9),
                ("ps", 1e-12),
                ("fs", 1e-15),
            ],
            Dimension::Temperature => &[("K", 1.0), ("mK", 1e-3)],
            Dimension::Density => &[("m^-3", 1.0), ("cm^-3", 1e6)],
            Dimension::CurrentDensity => &[("A/m^2", 1.0), ("A/cm^2", 1e4)],
            Dimension::DensityOfStates => &[
                ("J^-1 m^-3", 1.0),
                ("/J/m^3", 1.0),
                ("eV^-1 m^-3", 1.0 / E),
                ("/eV/m^3", 1.0 / E),
            ],
            Dimension::Mass => &[("kg", 1.0), ("m_e", M_E)],
            Dimension::PowerDbm => &[("dBm", 1.0)],
        }
    }

    pub fn canonical_unit(self) -> &'static str {
        self.units().first().map_or("", |u| u.0)
    }

    fn unit_list(self) -> String {
        self.units().iter().map(|u| u.0).collect::<Vec<_>>().join(", ")
    }
}

pub const ANALYSIS_SECTIONS: &[&str] = &["iv", "lna", "pa", "noise", "tradeoff"];
const PLAIN_SECTIONS: &[&str] = &["material", "barrier", "device", "output"];

const MATERIAL_KEYS: &[&str] = &["T_C", "Delta_SC", "rho_F", "n_star", "J_C_max", "tau_n", "eps_F"];

/// Keys accepted in a section (besides the material keys where relevant).
fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "material" => &["name"],
        "barrier" => &["V0", "eps_r", "m_star", "gate_lever"],
        "device" => &["area", "d", "n1", "n2", "E0", "convention", "gap_charge"],
        "iv" => &["I_max", "points", "V_GS"],
        "lna" => &["I_bias", "V_Ai", "V_Bi", "points"],
        "pa" => &["Z_load", "I_bias", "gate_high", "gate_low", "R_on_mosfet"],
        "noise" => &[
            "V0", "L", "g", "window", "f_min", "T", "directional_third", "exponent", "abs_tol",
            "rel_tol", "max_depth", "points",
        ],
        "tradeoff" => &["Z_load", "P_out", "convention", "I_anchor"],
        "output" => &["dir", "prefix"],
        _ => &["base"],
    }
}

pub const DEFAULT_PREFIX: &str = "sssim";

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    pub area: f64,
    pub n1: f64,
    pub n2: f64,
    /// Carrier energy E0 under the barrier (J).
    pub e0: f64,
    pub convention: CurrentConvention,
    pub gap_charge: GapCharge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvSpec {
    pub i_max: f64,
    pub points: usize,
    /// One curve per gate level.
    pub v_gs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LnaSpec {
    pub i_bias: f64,
    pub v_ai: f64,
    pub v_bi: f64,
    /// Input levels in the V_Bi → V_Ai sweep written to CSV.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaSpec {
    pub z_load: f64,
    pub i_bias: f64,
    pub gate_high: f64,
    pub gate_low: f64,
    pub r_on_mosfet: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// Barrier height from the band bottom (J).
    pub v0: f64,
    /// Barrier width; the device `d` when absent.
    pub l: Option<f64>,
    pub g: f64,
    pub window: f64,
    pub f_min: f64,
    pub temperature: f64,
    pub directional_third: bool,
    pub exponent: ExponentMode,
    pub tolerance: Tolerance,
    /// Integrand samples written to CSV.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffSpec {
    pub z_load: f64,
    pub p_dbm: Vec<f64>,
    pub convention: PowerConvention,
    /// Bias of the anchor point (sized at J_C_max like the rest).
    pub i_anchor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Iv(IvSpec),
    Lna(LnaSpec),
    Pa(PaSpec),
    Noise(NoiseSpec),
    Tradeoff(TradeoffSpec),
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Iv(_) => "iv",
            Analysis::Lna(_) => "lna",
            Analysis::Pa(_) => "pa",
            Analysis::Noise(_) => "noise",
            Analysis::Tradeoff(_) => "tradeoff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub prefix: String,
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: SuperconductorParams,
    /// Materials registered by `[material.<name>]` sections.
    pub custom_materials: Vec<SuperconductorParams>,
    /// Barrier, with `d` taken from `[device]`.
    pub barrier: BarrierParams,
    pub device: DeviceConfig,
    pub analysis: Analysis,
    pub output: OutputConfig,
}

/// Parse result plus bookkeeping for the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: RunConfig,
    /// `section.key = value` for every value filled from a default.
    pub defaulted: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn junction(&self) -> JunctionDevice {
        JunctionDevice {
            sc: self.material.clone(),
            barrier: self.barrier.clone(),
            area: self.device.area,
            state: WavefunctionState {
                n1: self.device.n1,
                theta1: 0.0,
                n2: self.device.n2,
                theta2: 0.0,
            },
            convention: self.device.convention,
            gap_charge: self.device.gap_charge,
        }
    }

    pub fn lna_config(&self) -> Option<LnaConfig> {
        match &self.analysis {
            Analysis::Lna(s) => Some(LnaConfig {
                device: self.junction(),
                i_bias: s.i_bias,
                v_ai: s.v_ai,
                v_bi: s.v_bi,
                e0: self.device.e0,
            }),
            _ => None,
        }
    }

    pub fn pa_config(&self) -> Option<PaConfig> {
        match &self.analysis {
            Analysis::Pa(s) => {
                let mut cfg = PaConfig::uniform(self.junction(), s.z_load, s.i_bias, s.gate_high, s.gate_low);
                cfg.e0 = self.device.e0;
                Some(cfg)
            }
            _ => None,
        }
    }

    pub fn noise_params(&self) -> Option<NoiseParams> {
        match &self.analysis {
            Analysis::Noise(s) => {
                let mut barrier = self.barrier.clone();
                barrier.v0_base = s.v0;
                barrier.d = s.l.unwrap_or(self.barrier.d);
                let mut p = NoiseParams::new(self.material.clone(), barrier);
                p.g_degeneracy = s.g;
                p.energy_window = s.window;
                p.f_min = s.f_min;
                p.temperature = s.temperature;
                p.directional_third = s.directional_third;
                p.exponent_mode = s.exponent;
                p.tolerance = s.tolerance;
                Some(p)
            }
            _ => None,
        }
    }

    /// Registry visible to this run: built-ins followed by custom entries.
    pub fn registry(&self) -> Vec<SuperconductorParams> {
        let mut all: Vec<_> = BUILTIN_NAMES
            .iter()
            .filter_map(|n| builtin_material(n).ok())
            .collect();
        all.extend(self.custom_materials.iter().cloned());
        all
    }

    /// Checks every physical precondition the chosen analysis relies on.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = self.material.validate()?;
        for m in &self.custom_materials {
            warnings.extend(m.validate()?);
        }
        let device = self.junction();
        warnings.extend(device.validate()?);
        let positive_count = |name: &'static str, n: usize, min: usize| {
            if n < min {
                Err(Error::InvalidParameter {
                    name,
                    value: n as f64,
                    reason: "too few points",
                })
            } else {
                Ok(())
            }
        };
        match &self.analysis {
            Analysis::Iv(s) => {
                crate::error::ensure_positive("I_max", s.i_max)?;
                positive_count("points", s.points, 2)?;
                if s.v_gs.is_empty() {
                    return Err(Error::Config("[iv] V_GS needs at least one gate level".into()));
                }
            }
            Analysis::Lna(s) => {
                crate::error::ensure_positive("I_bias", s.i_bias)?;
                positive_count("points", s.points, 2)?;
            }
            Analysis::Pa(_) => {
                warnings.extend(self.pa_config().expect("pa analysis").validate()?);
            }
            Analysis::Noise(s) => {
                positive_count("points", s.points, 2)?;
                warnings.extend(self.noise_params().expect("noise analysis").validate()?);
            }
            Analysis::Tradeoff(s) => {
                crate::error::ensure_positive("Z_load", s.z_load)?;
                crate::error::ensure_positive("I_anchor", s.i_anchor)?;
                if s.p_dbm.is_empty() {
                    return Err(Error::Config("[tradeoff] P_out needs at least one power".into()));
                }
            }
        }
        Ok(warnings)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let q = |v: f64, d: Dimension| format!("{v:e} {}", d.canonical_unit());
        let list = |vs: &[f64], d: Dimension| {
            let items: Vec<_> = vs.iter().map(|v| format!("{v:e}")).collect();
            format!("{} {}", items.join(", "), d.canonical_unit())
        };
        let write_material = |out: &mut String, m: &SuperconductorParams| {
            let _ = writeln!(out, "T_C = {}", q(m.t_c, Dimension::Temperature));
            let _ = writeln!(out, "Delta_SC = {}", q(m.delta_sc, Dimension::Energy));
            let _ = writeln!(out, "rho_F = {}", q(m.rho_f, Dimension::DensityOfStates));
            let _ = writeln!(out, "n_star = {}", q(m.n_star, Dimension::Density));
            let _ = writeln!(out, "J_C_max = {}", q(m.j_c_max, Dimension::CurrentDensity));
            let _ = writeln!(out, "tau_n = {}", q(m.tau_n, Dimension::Time));
            let _ = writeln!(out, "eps_F = {}", q(m.eps_f, Dimension::Energy));
        };
        for m in &self.custom_materials {
            let _ = writeln!(out, "[material.{}]", m.name);
            write_material(&mut out, m);
            out.push('\n');
        }
        let _ = writeln!(out, "[material]\nname = {}", self.material.name);
        write_material(&mut out, &self.material);

        let b = &self.barrier;
        let _ = writeln!(out, "\n[barrier]");
        let _ = writeln!(out, "V0 = {}", q(b.v0_base, Dimension::Energy));
        let _ = writeln!(out, "eps_r = {:e}", b.eps_r);
        let _ = writeln!(out, "m_star = {}", q(b.m_star, Dimension::Mass));
        let _ = writeln!(out, "gate_lever = {:e}", b.gate_lever);

        let d = &self.device;
        let _ = writeln!(out, "\n[device]");
        let _ = writeln!(out, "area = {}", q(d.area, Dimension::Area));
        let _ = writeln!(out, "d = {}", q(b.d, Dimension::Length));
        let _ = writeln!(out, "n1 = {}", q(d.n1, Dimension::Density));
        let _ = writeln!(out, "n2 = {}", q(d.n2, Dimension::Density));
        let _ = writeln!(out, "E0 = {}", q(d.e0, Dimension::Energy));
        let _ = writeln!(out, "convention = {}", d.convention.as_str());
        let _ = writeln!(out, "gap_charge = {}", d.gap_charge.as_str());

        let _ = writeln!(out, "\n[{}]", self.analysis.name());
        match &self.analysis {
            Analysis::Iv(s) => {
                let _ = writeln!(out, "I_max = {}", q(s.i_max, Dimension::Current));
                let _ = writeln!(out, "points = {}", s.points);
                let _ = writeln!(out, "V_GS = {}", list(&s.v_gs, Dimension::Voltage));
            }
            Analysis::Lna(s) => {
                let _ = writeln!(out, "I_bias = {}", q(s.i_bias, Dimension::Current));
                let _ = writeln!(out, "V_Ai = {}", q(s.v_ai, Dimension::Voltage));
                let _ = writeln!(out, "V_Bi = {}", q(s.v_bi, Dimension::Voltage));
                let _ = writeln!(out, "points = {}", s.points);
            }
            Analysis::Pa(s) => {
                let _ = writeln!(out, "Z_load = {}", q(s.z_load, Dimension::Resistance));
                let _ = writeln!(out, "I_bias = {}", q(s.i_bias, Dimension::Current));
                let _ = writeln!(out, "gate_high = {}", q(s.gate_high, Dimension::Voltage));
                let _ = writeln!(out, "gate_low = {}", q(s.gate_low, Dimension::Voltage));
                let _ = writeln!(out, "R_on_mosfet = {}", q(s.r_on_mosfet, Dimension::Resistance));
            }
            Analysis::Noise(s) => {
                let _ = writeln!(out, "V0 = {}", q(s.v0, Dimension::Energy));
                if let Some(l) = s.l {
                    let _ = writeln!(out, "L = {}", q(l, Dimension::Length));
                }
                let _ = writeln!(out, "g = {:e}", s.g);
                let _ = writeln!(out, "window = {}", q(s.window, Dimension::Energy));
                let _ = writeln!(out, "f_min = {}", q(s.f_min, Dimension::Frequency));
                let _ = writeln!(out, "T = {}", q(s.temperature, Dimension::Temperature));
                let _ = writeln!(out, "directional_third = {}", s.directional_third);
                let _ = writeln!(out, "exponent = {}", s.exponent.as_str());
                let _ = writeln!(out, "abs_tol = {:e}", s.tolerance.abs_tol);
                let _ = writeln!(out, "rel_tol = {:e}", s.tolerance.rel_tol);
                let _ = writeln!(out, "max_depth = {}", s.tolerance.max_depth);
                let _ = writeln!(out, "points = {}", s.points);
            }
            Analysis::Tradeoff(s) => {
                let _ = writeln!(out, "Z_load = {}", q(s.z_load, Dimension::Resistance));
                let _ = writeln!(out, "P_out = {}", list(&s.p_dbm, Dimension::PowerDbm));
                let _ = writeln!(out, "convention = {}", s.convention.as_str());
                let _ = writeln!(out, "I_anchor = {}", q(s.i_anchor, Dimension::Current));
            }
        }

        let _ = writeln!(out, "\n[output]");
        if let Some(dir) = &self.output.dir {
            let _ = writeln!(out, "dir = {dir}");
        }
        let _ = writeln!(out, "prefix = {}", self.output.prefix);
        out
    }
}

// ---------------------------------------------------------------------------
// lexing

#[derive(Debug, Clone)]
struct RawEntry {
    key: String,
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

#[derive(Debug, Clone)]
struct RawSection {
    name: String,
    line: usize,
    entries: Vec<RawEntry>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// 1-based character column of byte offset `byte` in `s`.
fn column(s: &str, byte: usize) -> usize {
    s[..byte].chars().count() + 1
}

fn lex(text: &str) -> Result<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(parse_err(line, column(content, lead), "unterminated section header"));
            };
            let name = name.trim();
            let valid = !name.is_empty()
                && name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'));
            if !valid {
                return Err(parse_err(line, column(content, lead + 1), format!("bad section name `{name}`")));
            }
            sections.push(RawSection {
                name: name.to_string(),
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(parse_err(line, column(content, lead), "expected `key = value` or `[section]`"));
        };
        let key = content[..eq].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(parse_err(line, column(content, lead), format!("bad key `{key}`")));
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_col = column(content, eq + 1 + (after.len() - after.trim_start().len()));
        if value.is_empty() {
            return Err(parse_err(line, value_col, format!("`{key}` has no value")));
        }
        let Some(section) = sections.last_mut() else {
            return Err(parse_err(line, column(content, lead), format!("`{key}` appears before any [section]")));
        };
        if let Some(prev) = section.entries.iter().find(|e| e.key.eq_ignore_ascii_case(key)) {
            return Err(parse_err(
                line,
                column(content, lead),
                format!("duplicate key `{key}` in [{}] (first on line {})", section.name, prev.line),
            ));
        }
        section.entries.push(RawEntry {
            key: key.to_string(),
            value: value.to_string(),
            line,
            key_col: column(content, lead),
            value_col,
        });
    }
    Ok(sections)
}

// ---------------------------------------------------------------------------
// typed extraction

/// Splits `"1.5e-3 mA"` into the number and the (possibly empty) unit.
fn split_number(s: &str) -> Option<(f64, &str)> {
    let numeric_len = s
        .char_indices()
        .take_while(|(_, c)| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
        .map(|(i, c)| i + c.len_utf8())
        .last()?;
    (1..=numeric_len)
        .rev()
        .find_map(|end| s[..end].parse::<f64>().ok().map(|v| (v, s[end..].trim())))
}

struct Reader<'a> {
    section: &'a RawSection,
    used: Vec<bool>,
    label: String,
    defaulted: &'a mut Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(section: &'a RawSection, defaulted: &'a mut Vec<String>) -> Self {
        Self {
            used: vec![false; section.entries.len()],
            label: section.name.clone(),
            section,
            defaulted,
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a RawEntry> {
        let section = self.section;
        let idx = section.entries.iter().position(|e| e.key.eq_ignore_ascii_case(key))?;
        self.used[idx] = true;
        Some(&section.entries[idx])
    }

    fn note_default(&mut self, key: &str, shown: String) {
        self.defaulted.push(format!("{}.{key} = {shown}", self.label));
    }

    fn convert(e: &RawEntry, text: &str, offset: usize, dim: Dimension, inherited: Option<&str>) -> Result<f64> {
        let col = e.value_col + e.value[..offset].chars().count();
        let Some((number, unit)) = split_number(text) else {
            return Err(parse_err(e.line, col, format!("`{}`: `{text}` is not a number", e.key)));
        };
        if !number.is_finite() {
            return Err(parse_err(e.line, col, format!("`{}` is not finite", e.key)));
        }
        let (unit, unit_col) = if unit.is_empty() {
            (inherited.unwrap_or(""), col)
        } else {
            let byte = unit.as_ptr() as usize - text.as_ptr() as usize;
            (unit, col + text[..byte].chars().count())
        };
        if dim == Dimension::None {
            if !unit.is_empty() {
                return Err(parse_err(e.line, unit_col, format!("`{}` is dimensionless; unexpected unit `{unit}`", e.key)));
            }
            return Ok(number);
        }
        if unit.is_empty() {
            return Err(parse_err(
                e.line,
                col,
                format!("`{}` needs a unit (one of {})", e.key, dim.unit_list()),
            ));
        }
        match dim.units().iter().find(|(name, _)| *name == unit) {
            Some((_, scale)) => Ok(number * scale),
            None => Err(parse_err(
                e.line,
                unit_col,
                format!("unknown unit `{unit}` for `{}` (expected one of {})", e.key, dim.unit_list()),
            )),
        }
    }

    fn quantity(&mut self, key: &str, dim: Dimension) -> Result<Option<f64>> {
        match self.take(key) {
            Some(e) => Self::convert(e, &e.value, 0, dim, None).map(Some),
            None => Ok(None),
        }
    }

    fn quantity_or(&mut self, key: &str, dim: Dimension, default: f64) -> Result<f64> {
        match self.quantity(key, dim)? {
            Some(v) => Ok(v),
            None => {
                self.note_default(key, format!("{default:e} {}", dim.canonical_unit()));
                Ok(default)
            }
        }
    }

    fn required(&mut self, key: &str, dim: Dimension) -> Result<f64> {
        self.quantity(key, dim)?.ok_or_else(|| {
            Error::Config(format!(
                "missing required field `{key}` in [{}] (line {})",
                self.label, self.section.line
            ))
        })
    }

    /// Comma-separated list; a unit on the last item applies to unitless items.
    fn list(&mut self, key: &str, dim: Dimension) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.take(key) else { return Ok(None) };
        let mut items = Vec::new();
        let mut offset = 0;
        for piece in e.value.split(',') {
            items.push((offset, piece));
            offset += piece.len() + 1;
        }
        let shared = items
            .last()
            .and_then(|(_, p)| split_number(p.trim()))
            .map(|(_, u)| u)
            .filter(|u| !u.is_empty());
        items
            .iter()
            .map(|(off, piece)| {
                let lead = piece.len() - piece.trim_start().len();
                Self::convert(e, piece.trim(), off + lead, dim, shared)
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn count_or(&mut self, key: &str, default: usize) -> Result<usize> {
        let Some(e) = self.take(key) else {
            self.note_default(key, default.to_string());
            return Ok(default);
        };
        e.value
            .parse::<usize>()
            .map_err(|_| parse_err(e.line, e.value_col, format!("`{}` must be a non-negative integer", e.key)))
    }

    fn number_or(&mut self, key: &str, default: f64) -> Result<f64> {
        self.quantity_or(key, Dimension::None, default)
    }

    fn word(&mut self, key: &str, allowed: &[&str]) -> Result<Option<String>> {
        let Some(e) = self.take(key) else { return Ok(None) };
        let v = e.value.to_ascii_lowercase();
        if allowed.contains(&v.as_str()) {
            Ok(Some(v))
        } else {
            Err(parse_err(
                e.line,
                e.value_col,
                format!("`{}` must be one of {} (got `{}`)", e.key, allowed.join(", "), e.value),
            ))
        }
    }

    fn word_or(&mut self, key: &str, allowed: &[&str], default: &str) -> Result<String> {
        match self.word(key, allowed)? {
            Some(v) => Ok(v),
            None => {
                self.note_default(key, default.to_string());
                Ok(default.to_string())
            }
        }
    }

    fn flag_or(&mut self, key: &str, default: bool) -> Result<bool> {
        Ok(match self.word(key, &["true", "false"])? {
            Some(v) => v == "true",
            None => {
                self.note_default(key, default.to_string());
                default
            }
        })
    }

    fn text(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|e| e.value.trim_matches('"').to_string())
    }

    /// Rejects whatever was not consumed.
    fn finish(self) -> Result<()> {
        match self.used.iter().position(|u| !u) {
            Some(i) => {
                let e = &self.section.entries[i];
                Err(parse_err(e.line, e.key_col, format!("unknown key `{}` in [{}]", e.key, self.label)))
            }
            None => Ok(()),
        }
    }
}

/// Reads the material keys over `base`. Returns whether T_C was given
/// without Δ_SC (so the gap follows BCS).
fn read_material(r: &mut Reader, base: &SuperconductorParams) -> Result<SuperconductorParams> {
    let mut m = base.clone();
    let t_c = r.quantity("T_C", Dimension::Temperature)?;
    let gap = r.quantity("Delta_SC", Dimension::Energy)?;
    if let Some(t) = t_c {
        m.t_c = t;
        m.delta_sc = SuperconductorParams::bcs_gap(t);
    }
    if let Some(g) = gap {
        m.delta_sc = g;
    } else if t_c.is_some() {
        r.note_default("Delta_SC", format!("{:e} J (BCS from T_C)", m.delta_sc));
    }
    let mut set = |key: &str, dim: Dimension, field: &mut f64| -> Result<()> {
        if let Some(v) = r.quantity(key, dim)? {
            *field = v;
        }
        Ok(())
    };
    set("rho_F", Dimension::DensityOfStates, &mut m.rho_f)?;
    set("n_star", Dimension::Density, &mut m.n_star)?;
    set("J_C_max", Dimension::CurrentDensity, &mut m.j_c_max)?;
    set("tau_n", Dimension::Time, &mut m.tau_n)?;
    set("eps_F", Dimension::Energy, &mut m.eps_f)?;
    Ok(m)
}

fn lookup(name: &str, custom: &[SuperconductorParams]) -> Result<SuperconductorParams> {
    if let Some(m) = custom.iter().find(|m| m.name.eq_ignore_ascii_case(name)) {
        return Ok(m.clone());
    }
    builtin_material(name).map_err(|_| {
        let mut known: Vec<String> = BUILTIN_NAMES.iter().map(|s| s.to_string()).collect();
        known.extend(custom.iter().map(|m| m.name.clone()));
        Error::UnknownMaterial {
            name: name.to_string(),
            known: known.join(", "),
        }
    })
}

fn read_custom_materials(sections: &[RawSection], defaulted: &mut Vec<String>) -> Result<Vec<SuperconductorParams>> {
    let mut custom: Vec<SuperconductorParams> = Vec::new();
    for s in sections.iter().filter(|s| s.name.to_ascii_lowercase().starts_with("material.")) {
        let name = &s.name["material.".len()..];
        if name.is_empty() || name.contains('.') {
            return Err(parse_err(s.line, 1, format!("bad material section [{}]", s.name)));
        }
        if builtin_material(name).is_ok() || custom.iter().any(|m| m.name.eq_ignore_ascii_case(name)) {
            return Err(parse_err(s.line, 1, format!("material `{name}` is already registered")));
        }
        let mut r = Reader::new(s, defaulted);
        let base_name = r.text("base").unwrap_or_else(|| {
            r.note_default("base", "niobium".into());
            "niobium".into()
        });
        let base = lookup(&base_name, &custom)?;
        let mut m = read_material(&mut r, &base)?;
        r.finish()?;
        m.name = name.to_string();
        m.validate()?;
        custom.push(m);
    }
    Ok(custom)
}

/// Material registry defined by a config file: built-ins plus every
/// `[material.<name>]` section. Other sections are not interpreted.
pub fn parse_registry(text: &str) -> Result<Vec<SuperconductorParams>> {
    let sections = lex(text)?;
    let mut all: Vec<_> = BUILTIN_NAMES
        .iter()
        .filter_map(|n| builtin_material(n).ok())
        .collect();
    all.extend(read_custom_materials(&sections, &mut Vec::new())?);
    Ok(all)
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_detailed(text).map(|p| p.config)
}

pub fn parse_config_detailed(text: &str) -> Result<ParsedConfig> {
    let sections = lex(text)?;
    let mut seen: Vec<&RawSection> = Vec::new();
    for s in &sections {
        let lname = s.name.to_ascii_lowercase();
        let known = PLAIN_SECTIONS.contains(&lname.as_str())
            || ANALYSIS_SECTIONS.contains(&lname.as_str())
            || lname.starts_with("material.");
        if !known {
            return Err(parse_err(s.line, 1, format!("unknown section [{}]", s.name)));
        }
        if let Some(prev) = seen.iter().find(|p| p.name.eq_ignore_ascii_case(&s.name)) {
            return Err(parse_err(
                s.line,
                1,
                format!("duplicate section [{}] (first on line {})", s.name, prev.line),
            ));
        }
        seen.push(s);
        let material_like = lname == "material" || lname.starts_with("material.");
        for e in &s.entries {
            let known = known_keys(&lname)
                .iter()
                .chain(if material_like { MATERIAL_KEYS } else { &[] })
                .any(|k| k.eq_ignore_ascii_case(&e.key));
            if !known {
                return Err(parse_err(e.line, e.key_col, format!("unknown key `{}` in [{}]", e.key, s.name)));
            }
        }
    }
    let find = |name: &str| sections.iter().find(|s| s.name.eq_ignore_ascii_case(name));
    let analyses: Vec<&RawSection> = sections
        .iter()
        .filter(|s| ANALYSIS_SECTIONS.contains(&s.name.to_ascii_lowercase().as_str()))
        .collect();
    let analysis_section = match analyses.as_slice() {
        [one] => *one,
        [] => {
            return Err(Error::Config(format!(
                "no analysis section; exactly one of {} is required",
                ANALYSIS_SECTIONS.iter().map(|s| format!("[{s}]")).collect::<Vec<_>>().join(", ")
            )))
        }
        many => {
            let found: Vec<_> = many.iter().map(|s| format!("[{}] (line {})", s.name, s.line)).collect();
            return Err(Error::Config(format!(
                "exactly one analysis section allowed, found {}",
                found.join(" and ")
            )));
        }
    };
    let kind = analysis_section.name.to_ascii_lowercase();
    let junction_analysis = matches!(kind.as_str(), "iv" | "lna" | "pa");

    let mut defaulted = Vec::new();
    let empty = |name: &str| RawSection {
        name: name.to_string(),
        line: 0,
        entries: Vec::new(),
    };

    let custom = read_custom_materials(&sections, &mut defaulted)?;

    let material_raw = find("material").cloned().unwrap_or_else(|| empty("material"));
    let mut r = Reader::new(&material_raw, &mut defaulted);
    let name = r.text("name").unwrap_or_else(|| {
        r.note_default("name", "niobium".into());
        "niobium".into()
    });
    let base = lookup(&name, &custom)?;
    let material = read_material(&mut r, &base)?;
    r.finish()?;

    let barrier_raw = find("barrier").cloned().unwrap_or_else(|| empty("barrier"));
    let mut r = Reader::new(&barrier_raw, &mut defaulted);
    let v0 = if junction_analysis {
        r.required("V0", Dimension::Energy)?
    } else {
        r.quantity_or("V0", Dimension::Energy, 0.3 * E)?
    };
    let eps_r = r.number_or("eps_r", 11.68)?;
    let m_star = r.quantity_or("m_star", Dimension::Mass, M_STAR)?;
    let gate_lever = r.number_or("gate_lever", 1.0)?;
    r.finish()?;

    let device_raw = find("device").cloned().unwrap_or_else(|| empty("device"));
    let mut r = Reader::new(&device_raw, &mut defaulted);
    let area = if junction_analysis {
        r.required("area", Dimension::Area)?
    } else {
        r.quantity_or("area", Dimension::Area, 1e-12)?
    };
    let d = r.required("d", Dimension::Length)?;
    let n1 = r.quantity_or("n1", Dimension::Density, material.n_star)?;
    let n2 = r.quantity_or("n2", Dimension::Density, material.n_star)?;
    let e0 = r.quantity_or("E0", Dimension::Energy, 0.0)?;
    let convention = match r.word_or("convention", &["pair", "bare"], "pair")?.as_str() {
        "bare" => CurrentConvention::Bare,
        _ => CurrentConvention::Pair,
    };
    let gap_charge = match r.word_or("gap_charge", &["electron", "pair", "e", "e_star"], "electron")?.as_str() {
        "pair" | "e_star" => GapCharge::Pair,
        _ => GapCharge::Electron,
    };
    r.finish()?;

    let mut r = Reader::new(analysis_section, &mut defaulted);
    r.label = kind.clone();
    let analysis = match kind.as_str() {
        "iv" => {
            let i_max = r.required("I_max", Dimension::Current)?;
            let points = r.count_or("points", 201)?;
            let v_gs = match r.list("V_GS", Dimension::Voltage)? {
                Some(v) => v,
                None => {
                    r.note_default("V_GS", "0 V".into());
                    vec![0.0]
                }
            };
            Analysis::Iv(IvSpec { i_max, points, v_gs })
        }
        "lna" => Analysis::Lna(LnaSpec {
            i_bias: r.required("I_bias", Dimension::Current)?,
            v_ai: r.required("V_Ai", Dimension::Voltage)?,
            v_bi: r.required("V_Bi", Dimension::Voltage)?,
            points: r.count_or("points", 21)?,
        }),
        "pa" => Analysis::Pa(PaSpec {
            z_load: r.required("Z_load", Dimension::Resistance)?,
            i_bias: r.required("I_bias", Dimension::Current)?,
            gate_high: r.required("gate_high", Dimension::Voltage)?,
            gate_low: r.required("gate_low", Dimension::Voltage)?,
            r_on_mosfet: r.quantity_or("R_on_mosfet", Dimension::Resistance, 5.0)?,
        }),
        "noise" => {
            let defaults = Tolerance::default();
            Analysis::Noise(NoiseSpec {
                v0: r.quantity_or("V0", Dimension::Energy, 6.0 * E)?,
                l: r.quantity("L", Dimension::Length)?,
                g: r.number_or("g", 1.0)?,
                window: r.quantity_or("window", Dimension::Energy, 3.313e-23)?,
                f_min: r.quantity_or("f_min", Dimension::Frequency, 1e9)?,
                temperature: r.quantity_or("T", Dimension::Temperature, 4.2)?,
                directional_third: r.flag_or("directional_third", false)?,
                exponent: match r
                    .word_or("exponent", &["computed", "fixed"], "computed")?
                    .as_str()
                {
                    "fixed" => ExponentMode::Fixed,
                    _ => ExponentMode::Computed,
                },
                tolerance: Tolerance {
                    abs_tol: r.number_or("abs_tol", defaults.abs_tol)?,
                    rel_tol: r.number_or("rel_tol", defaults.rel_tol)?,
                    max_depth: r.count_or("max_depth", defaults.max_depth as usize)? as u32,
                },
                points: r.count_or("points", 41)?,
            })
        }
        _ => Analysis::Tradeoff(TradeoffSpec {
            z_load: r.required("Z_load", Dimension::Resistance)?,
            p_dbm: match r.list("P_out", Dimension::PowerDbm)? {
                Some(v) => v,
                None => {
                    let v = vec![-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0];
                    r.note_default("P_out", "-20, -15, -10, -5, 0, 5, 10 dBm".into());
                    v
                }
            },
            convention: match r.word_or("convention", &["square", "rms"], "square")?.as_str() {
                "rms" => PowerConvention::Rms,
                _ => PowerConvention::SquareWave,
            },
            i_anchor: r.quantity_or("I_anchor", Dimension::Current, 0.020)?,
        }),
    };
    r.finish()?;

    let output_raw = find("output").cloned().unwrap_or_else(|| empty("output"));
    let mut r = Reader::new(&output_raw, &mut defaulted);
    let dir = r.text("dir");
    let prefix = r.text("prefix").unwrap_or_else(|| {
        r.note_default("prefix", DEFAULT_PREFIX.into());
        DEFAULT_PREFIX.into()
    });
    r.finish()?;
    if prefix.is_empty() || prefix.contains(['/', '\\']) {
        return Err(Error::Config(format!("[output] prefix `{prefix}` must be a plain file-name stem")));
    }

    let config = RunConfig {
        material,
        custom_materials: custom,
        barrier: BarrierParams {
            eps_r,
            m_star,
            d,
            v0_base: v0,
            gate_lever,
        },
        device: DeviceConfig {
            area,
            n1,
            n2,
            e0,
            convention,
            gap_charge,
        },
        analysis,
        output: OutputConfig { dir, prefix },
    };
    let warnings = config.validate()?;
    Ok(ParsedConfig {
        config,
        defaulted,
        warnings,
    })
}
