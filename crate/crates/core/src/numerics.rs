//! Numerical kernels: adaptive Gauss–Kronrod quadrature, bracketed root
//! finding and overflow-free `ln(sinh x)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Tolerance {
    pub const MAX_DEPTH_LIMIT: u32 = 80;

    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        let tol = Self {
            abs_tol,
            rel_tol,
            max_depth,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.abs_tol >= 0.0) {
            return bad("abs_tol", self.abs_tol, "must be >= 0");
        }
        if !(self.rel_tol >= 0.0) {
            return bad("rel_tol", self.rel_tol, "must be >= 0");
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return bad("rel_tol", 0.0, "abs_tol and rel_tol cannot both be zero");
        }
        if self.max_depth < 1 || self.max_depth > Self::MAX_DEPTH_LIMIT {
            return bad("max_depth", self.max_depth as f64, "must lie in [1, 80]");
        }
        Ok(())
    }

    /// Target error for a result of magnitude `value`.
    pub fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-30,
            rel_tol: 1e-9,
            max_depth: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

// 15-point Kronrod abscissae on [-1, 1] (non-negative half), with the
// embedded 7-point Gauss rule on the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval(f, center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let sum = eval(f, center - dx)? + eval(f, center + dx)?;
        kronrod += w * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    Ok(Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        depth,
    })
}

const PANEL_EVALS: usize = 15;
/// Upper bound on live panels; a divergent integrand would otherwise be
/// refined until every panel hits `max_depth`.
const MAX_PANELS: usize = 4096;

/// Adaptive bisection with a Gauss 7 / Kronrod 15 pair.
///
/// The panel with the largest error estimate is split until the summed
/// estimate meets `tol`, or no panel can be split without exceeding
/// `tol.max_depth`. Non-convergence is reported through `converged`, not as
/// an error; a non-finite integrand value is an error.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: &Tolerance,
) -> Result<QuadratureResult> {
    tol.validate()?;
    if !(lo < hi) {
        return Err(Error::Domain {
            what: "integrate",
            value: hi - lo,
            domain: "lo < hi",
        });
    }
    let mut panels = vec![gauss_kronrod(&f, lo, hi, 0)?];
    let mut evaluations = PANEL_EVALS;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= tol.target(value) {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
                converged: true,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < tol.max_depth)
            .max_by(|(_, a), (_, b)| a.error.total_cmp(&b.error))
            .map(|(i, _)| i);
        let Some(idx) = worst.filter(|_| panels.len() < MAX_PANELS) else {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
                converged: false,
            });
        };
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            // interval exhausted at machine precision
            panels.push(Panel {
                depth: tol.max_depth,
                ..p
            });
            continue;
        }
        panels.push(gauss_kronrod(&f, p.lo, mid, p.depth + 1)?);
        panels.push(gauss_kronrod(&f, mid, p.hi, p.depth + 1)?);
        evaluations += 2 * PANEL_EVALS;
    }
}

const LOG_SINH_SWITCH: f64 = 20.0;

/// `ln(sinh x)` for x > 0, finite for any finite x.
pub fn log_sinh(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            what: "log_sinh",
            value: x,
            domain: "x > 0",
        });
    }
    if x < LOG_SINH_SWITCH {
        Ok(x.sinh().ln())
    } else {
        Ok(x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p())
    }
}

/// Bracketed root finder.
///
/// Each iteration tries a secant step inside the bracket and then bisects,
/// so the bracket at least halves per iteration. Stops when the bracket is
/// narrower than `abs_tol + rel_tol·|x|`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64> {
    tol.validate()?;
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let width_ok = |a: f64, b: f64| (b - a) <= tol.abs_tol + tol.rel_tol * a.abs().max(b.abs());
    for _ in 0..tol.max_depth {
        if width_ok(a, b) {
            return Ok(0.5 * (a + b));
        }
        // secant
        let s = b - fb * (b - a) / (fb - fa);
        if s > a && s < b {
            let fs = f(s);
            if fs == 0.0 {
                return Ok(s);
            }
            if fs.signum() == fa.signum() {
                a = s;
                fa = fs;
            } else {
                b = s;
                fb = fs;
            }
        }
        // bisection
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if width_ok(a, b) {
        Ok(0.5 * (a + b))
    } else {
        Err(Error::NonConvergence {
            value: 0.5 * (a + b),
            error_estimate: b - a,
        })
    }
}

/// |value − reference| / max(|reference|, f64::MIN_POSITIVE).
pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}
