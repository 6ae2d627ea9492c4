//! Executes a [`RunConfig`]: computes the analysis, renders CSV curves and
//! the summary report, and writes them out.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::circuits::{
    lna_gain_closed_form, lna_gain_exact, lna_level_point, lna_operating_points, pa_analysis,
    pa_bandwidth, pa_output, pa_power_frequency_tradeoff, pa_sized_point, Diagnostic, Polarity,
    REFERENCE_PA_POINT,
};
use crate::config::{Analysis, ParsedConfig, RunConfig};
use crate::constants::{builtin_entries, critical_frequency, SuperconductorParams};
use crate::error::{Error, Result};
use crate::junction::{critical_current, iv_sweep};
use crate::noise::{
    be_occupancy, dos_sc, linearised_integrand, noise_report, transmission_approx, transmission_exact,
    OccupancyMode,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SSSIM_OUT";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // `{:e}` is the shortest representation that parses back exactly
            Cell::Num(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A rectangular CSV table with `#` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CurveFile {
    pub fn new(columns: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), columns.len(), "row {i} is not rectangular");
        }
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<_> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// The rendered file without metadata lines.
    pub fn body(&self) -> String {
        self.render()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

/// SHA-256 of the canonical config text.
pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.to_config_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `--out` wins over `[output] dir`, which wins over `SSSIM_OUT`; the
/// current directory is the fallback.
pub fn resolve_output_dir(flag: Option<&Path>, cfg: &RunConfig, env: Option<&str>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Everything a run produces, before it touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub curves: Vec<(String, CurveFile)>,
    pub summary: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub artifacts: Artifacts,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn fmt_diagnostics(out: &mut String, diags: &[Diagnostic]) {
    let _ = writeln!(out, "\n## diagnostics");
    if diags.is_empty() {
        let _ = writeln!(out, "(none)");
    }
    for d in diags {
        match d.relative_error {
            Some(e) => {
                let _ = writeln!(out, "{}: relative_error = {e:e}; {}", d.name, d.detail);
            }
            None => {
                let _ = writeln!(out, "{}: {}", d.name, d.detail);
            }
        }
    }
}

/// Computes the analysis on a pool of `jobs` workers (0 = rayon default).
pub fn compute(parsed: &ParsedConfig, jobs: usize) -> Result<Artifacts> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| compute_inner(parsed))
}

fn compute_inner(parsed: &ParsedConfig) -> Result<Artifacts> {
    let cfg = &parsed.config;
    let hash = config_hash(cfg);
    let prefix = &cfg.output.prefix;
    let analysis = cfg.analysis.name();
    let stamp = |c: CurveFile| {
        c.meta("tool", format!("sssim {TOOL_VERSION}"))
            .meta("analysis", analysis)
            .meta("config_sha256", hash.clone())
    };
    let mut warnings = parsed.warnings.clone();
    let mut curves = Vec::new();
    let mut results = String::new();
    let mut diagnostics: Vec<Diagnostic> = Vec::new();
    let device = cfg.junction();
    let e0 = cfg.device.e0;
    let r = &mut results;

    if matches!(cfg.analysis, Analysis::Iv(_) | Analysis::Lna(_) | Analysis::Pa(_)) {
        let _ = writeln!(r, "C_jn = {:e} F", device.capacitance()?);
        let _ = writeln!(r, "I_C*R_n = {:e} V (gate invariant)", device.ic_rn_product());
        let _ = writeln!(r, "V_gap = {:e} V", device.gap_voltage());
    }

    match &cfg.analysis {
        Analysis::Iv(s) => {
            let sweeps = s
                .v_gs
                .par_iter()
                .map(|&v| iv_sweep(&device, v, e0, s.i_max, s.points))
                .collect::<Result<Vec<_>>>()?;
            let single = sweeps.len() == 1;
            for (k, (curve, &v_gs)) in sweeps.iter().zip(&s.v_gs).enumerate() {
                let rows = curve
                    .samples
                    .iter()
                    .map(|q| vec![q.current.into(), q.voltage.into(), q.branch.as_str().into()])
                    .collect();
                let file = stamp(CurveFile::new(&["I_A", "V_V", "branch"], rows))
                    .meta("V_GS_V", format!("{v_gs:e}"))
                    .meta("I_C_A", format!("{:e}", curve.i_c))
                    .meta("R_n_ohm", format!("{:e}", curve.r_n));
                let name = if single {
                    format!("{prefix}_iv.csv")
                } else {
                    format!("{prefix}_iv_{k}.csv")
                };
                let _ = writeln!(
                    r,
                    "V_GS = {v_gs:e} V: I_C = {:e} A, R_n = {:e} ohm, clamped = {}, normal-branch slope = {} ohm -> {name}",
                    curve.i_c,
                    curve.r_n,
                    curve.clamped,
                    curve.normal_branch_slope().map_or("n/a".to_string(), |v| format!("{v:e}")),
                );
                if curve.clamped {
                    diagnostics.push(Diagnostic::new(
                        "critical_current_clamped",
                        None,
                        format!("J_C reached J_C_max at V_GS = {v_gs:e} V"),
                    ));
                }
                curves.push((name, file));
            }
        }
        Analysis::Lna(s) => {
            let lna = cfg.lna_config().expect("lna analysis");
            let ops = lna_operating_points(&lna)?;
            let exact = lna_gain_exact(&lna)?;
            let closed = lna_gain_closed_form(&lna)?;
            let levels = linspace(s.v_bi, s.v_ai, s.points)
                .par_iter()
                .map(|&v| lna_level_point(&lna, v))
                .collect::<Result<Vec<_>>>()?;
            let rows = levels
                .iter()
                .map(|p| {
                    vec![
                        p.v_in.into(),
                        p.zeta.into(),
                        p.i_c.into(),
                        p.r_n.into(),
                        p.v_out.into(),
                        (if p.clamped { "clamped" } else { "free" }).into(),
                    ]
                })
                .collect();
            curves.push((
                format!("{prefix}_lna.csv"),
                stamp(CurveFile::new(&["V_in_V", "zeta_m", "I_C_A", "R_n_ohm", "V_out_V", "J_C_state"], rows))
                    .meta("I_bias_A", format!("{:e}", s.i_bias)),
            ));
            let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:e}"));
            for (tag, p) in [("A", &ops.a), ("B", &ops.b)] {
                let _ = writeln!(
                    r,
                    "level {tag}: V_in = {:e} V, zeta = {:e} m, I_C = {:e} A, R_n = {:e} ohm, V_out = {:e} V",
                    p.v_in, p.zeta, p.i_c, p.r_n, p.v_out
                );
            }
            let _ = writeln!(r, "output_delta = {} V", opt(exact.output_delta));
            let _ = writeln!(r, "gain_exact = {}", opt(exact.gain_exact));
            let _ = writeln!(r, "gain_closed_form = {}", opt(closed.gain_closed_form));
            for d in exact.diagnostics.into_iter().chain(closed.diagnostics) {
                if !diagnostics.contains(&d) {
                    diagnostics.push(d);
                }
            }
        }
        Analysis::Pa(s) => {
            let pa = cfg.pa_config().expect("pa analysis");
            let result = pa_analysis(&pa, s.r_on_mosfet)?;
            let bw = pa_bandwidth(&pa)?;
            let states = [Polarity::Plus, Polarity::Zero, Polarity::Minus]
                .iter()
                .map(|&p| pa_output(&pa, p))
                .collect::<Result<Vec<_>>>()?;
            let rows = states
                .iter()
                .map(|o| {
                    vec![
                        o.polarity.as_str().into(),
                        o.v_load.into(),
                        o.i_load.into(),
                        o.p_load.into(),
                    ]
                })
                .collect();
            curves.push((
                format!("{prefix}_pa.csv"),
                stamp(CurveFile::new(&["polarity", "V_load_V", "I_load_A", "P_load_W"], rows)),
            ));
            for o in &states {
                warnings.extend(o.warnings.iter().cloned());
                let _ = writeln!(r, "state {}: V_load = {:e} V", o.polarity.as_str(), o.v_load);
            }
            let _ = writeln!(r, "tau_RC = {:e} s", bw.tau_rc);
            let _ = writeln!(r, "f_3dB = {:e} Hz", bw.f_3db);
            if let Some(p) = result.p_out {
                let _ = writeln!(r, "P_out = {p:e} W");
            }
            if let Some(e) = result.efficiency {
                let _ = writeln!(
                    r,
                    "MOSFET bridge (R_on = {:e} ohm): P_loss = {:e} W, efficiency = {:e}; junction bridge: P_loss = {:e} W, efficiency = {:e}",
                    s.r_on_mosfet, e.p_loss_mosfet, e.efficiency_mosfet, e.p_loss_junction, e.efficiency_junction
                );
            }
            diagnostics.extend(result.diagnostics);
        }
        Analysis::Noise(s) => {
            let p = cfg.noise_params().expect("noise analysis");
            let report = noise_report(&p)?;
            let rows = linspace(p.band_floor(), p.band_ceiling(), s.points)
                .par_iter()
                .map(|&eps| -> Result<Vec<Cell>> {
                    let dos = dos_sc(eps, &p)?;
                    let t = transmission_exact(eps, &p)?;
                    let approx = transmission_approx(eps, &p)?;
                    Ok(vec![
                        eps.into(),
                        dos.into(),
                        be_occupancy(eps, &p, OccupancyMode::Exact)?.into(),
                        t.into(),
                        approx.reference.into(),
                        approx.literal.into(),
                        (dos / (2.0 * p.sc.rho_f) * t).into(),
                        linearised_integrand(eps, &p).into(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            curves.push((
                format!("{prefix}_noise.csv"),
                stamp(CurveFile::new(
                    &[
                        "eps_J",
                        "dos_per_J_m3",
                        "occupancy_exact",
                        "T_exact",
                        "T_reference",
                        "T_linearised",
                        "integrand_exact",
                        "integrand_linearised_J",
                    ],
                    rows,
                )),
            ));
            let f = &report.integrals;
            let (t_ex, t_ref, t_lin) = report.midband_transmission;
            let lines = [
                format!("bose_exponent = {:e}", report.bose_exponent),
                format!("f_c = {:e} Hz", critical_frequency(&p.sc)),
                format!(
                    "n_star_quadrature = {:e} m^-3 (error estimate {:e}; abs_tol {:e}, rel_tol {:e})",
                    report.n_star_quadrature,
                    report.n_star_quadrature_error,
                    report.quadrature_abs_tol,
                    report.quadrature_rel_tol
                ),
                format!("n_star_closed_form = {:e} m^-3", report.n_star_closed_form),
                format!(
                    "n_star_linearised_quadrature = {:e} m^-3",
                    report.n_star_linearised_quadrature
                ),
                format!("relative_error (closed form vs quadrature) = {:e}", report.relative_error),
                format!("directional_fraction_applied = {}", report.directional_fraction_applied),
                format!("n1_star_capacity = {:e} (closed form)", report.n1_star_capacity),
                format!("n1_star_capacity_quadrature = {:e} m^-3", report.n1_star_capacity_quadrature),
                format!("midband transmission: exact = {t_ex:e}, reference = {t_ref:e}, linearised = {t_lin:e}"),
                format!(
                    "linearised integral: quadrature = {:e}, true antiderivative = {:e}, written antiderivative = {:e}, closed-form bracket = {:e} (J^2)",
                    f.quadrature.value, f.true_antiderivative, f.written_antiderivative, f.closed_form_bracket
                ),
                format!(
                    "antiderivative check: passed = {}, written max error = {:e}, true max error = {:e}",
                    report.antiderivative.passed,
                    report.antiderivative.written_max_error,
                    report.antiderivative.true_max_error
                ),
            ];
            for l in lines {
                let _ = writeln!(r, "{l}");
            }
            diagnostics.push(Diagnostic::new(
                "closed_form_vs_quadrature",
                Some(report.relative_error),
                "closed form (constant occupancy, linearised transmission) against exact-transmission quadrature",
            ));
            diagnostics.push(Diagnostic::new(
                "antiderivative_check",
                Some(report.antiderivative.written_max_error),
                report.antiderivative.note.clone(),
            ));
            diagnostics.push(Diagnostic::new(
                "bracket_vs_integral",
                Some(crate::numerics::relative_error(f.closed_form_bracket, f.quadrature.value)),
                "closed-form bracket against quadrature of the linearised integrand",
            ));
            warnings.extend(report.warnings);
        }
        Analysis::Tradeoff(s) => {
            let mut targets = s.p_dbm.clone();
            let (reference_dbm, reference_hz) = REFERENCE_PA_POINT;
            if !targets.contains(&reference_dbm) {
                targets.push(reference_dbm);
                let _ = writeln!(r, "note: {reference_dbm} dBm added to the requested powers");
            }
            targets.sort_by(f64::total_cmp);
            let points = pa_power_frequency_tradeoff(&targets, s.z_load, &cfg.material, &cfg.barrier, s.convention)?;
            let anchor = pa_sized_point(s.i_anchor, s.z_load, &cfg.material, &cfg.barrier, s.convention)?;
            let rows = points
                .iter()
                .map(|p| {
                    vec![
                        p.p_dbm.into(),
                        p.p_watts.into(),
                        p.current.into(),
                        p.area.into(),
                        p.c_jn.into(),
                        p.f_3db.into(),
                    ]
                })
                .collect();
            curves.push((
                format!("{prefix}_tradeoff.csv"),
                stamp(CurveFile::new(&["P_dBm", "P_W", "I_A", "area_m2", "C_jn_F", "f_3dB_Hz"], rows))
                    .meta("convention", s.convention.as_str()),
            ));
            let _ = writeln!(
                r,
                "anchor: I = {:e} A, Z_load = {:e} ohm, area = {:e} m^2, C_jn = {:e} F, f_3dB = {:e} Hz, P = {:e} dBm",
                anchor.current, s.z_load, anchor.area, anchor.c_jn, anchor.f_3db, anchor.p_dbm
            );
            let reference = points
                .iter()
                .find(|p| p.p_dbm == reference_dbm)
                .expect("reference power is in the target list");
            let _ = writeln!(
                r,
                "{reference_dbm} dBm: f_3dB = {:e} Hz; ratio to the {reference_hz:e} Hz reference point = {:e}",
                reference.f_3db,
                reference.f_3db / reference_hz
            );
            diagnostics.push(Diagnostic::new(
                "power_convention",
                None,
                format!("P = I^2 Z{} ({})", if s.convention.as_str() == "rms" { "/2" } else { "" }, s.convention.as_str()),
            ));
        }
    }

    if let Analysis::Iv(s) = &cfg.analysis {
        for &v in &s.v_gs {
            let ic = critical_current(&device, v, e0)?;
            if s.i_max < ic.value {
                let _ = writeln!(results, "V_GS = {v:e} V: I_max below I_C, curve is entirely supercurrent");
            }
        }
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "sssim {TOOL_VERSION} summary");
    let _ = writeln!(summary, "analysis: {analysis}");
    let _ = writeln!(summary, "config_sha256: {hash}");
    let _ = writeln!(summary, "\n## resolved config\n{}", cfg.to_config_text().trim_end());
    let _ = writeln!(summary, "\n## defaults applied");
    if parsed.defaulted.is_empty() {
        let _ = writeln!(summary, "(none)");
    }
    for d in &parsed.defaulted {
        let _ = writeln!(summary, "{d}");
    }
    let _ = writeln!(summary, "\n## results\n{}", results.trim_end());
    fmt_diagnostics(&mut summary, &diagnostics);
    let _ = writeln!(summary, "\n## warnings");
    if warnings.is_empty() {
        let _ = writeln!(summary, "(none)");
    }
    for w in &warnings {
        let _ = writeln!(summary, "{w}");
    }
    let _ = writeln!(summary, "\n## files");
    for (name, _) in &curves {
        let _ = writeln!(summary, "{name}");
    }
    Ok(Artifacts {
        curves,
        summary,
        warnings,
    })
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Computes and writes the CSV curves and `<prefix>_<analysis>_summary.txt`.
pub fn run(parsed: &ParsedConfig, out_dir: &Path, jobs: usize) -> Result<RunOutcome> {
    let artifacts = compute(parsed, jobs)?;
    std::fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    let mut files = Vec::new();
    for (name, curve) in &artifacts.curves {
        let path = out_dir.join(name);
        std::fs::write(&path, curve.render()).map_err(|e| io_err(&path, e))?;
        files.push(path);
    }
    let path = out_dir.join(format!(
        "{}_{}_summary.txt",
        parsed.config.output.prefix,
        parsed.config.analysis.name()
    ));
    std::fs::write(&path, &artifacts.summary).map_err(|e| io_err(&path, e))?;
    files.push(path);
    Ok(RunOutcome { files, artifacts })
}

/// Text table of a material registry with provenance notes.
pub fn list_materials(registry: &[SuperconductorParams]) -> String {
    let builtin = builtin_entries();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>12} {:>12} {:>10} {:>12} {:>12} {:>10}  notes",
        "name", "T_C[K]", "Delta_SC[J]", "rho_F[/Jm3]", "n*[m-3]", "J_Cmax[A/m2]", "tau_n[s]", "eps_F[J]"
    );
    for m in registry {
        let notes = builtin
            .iter()
            .find(|b| b.params == *m)
            .map(|b| {
                b.notes
                    .iter()
                    .map(|(k, v)| format!("{k}: {v}"))
                    .collect::<Vec<_>>()
                    .join("; ")
            })
            .unwrap_or_else(|| "registered from config".to_string());
        let _ = writeln!(
            out,
            "{:<12} {:>8.3} {:>12.4e} {:>12.3e} {:>10.2e} {:>12.2e} {:>12.4e} {:>10.4e}  {notes}",
            m.name, m.t_c, m.delta_sc, m.rho_f, m.n_star, m.j_c_max, m.tau_n, m.eps_f
        );
    }
    out
}
