//! Invariant checks shared by the property tests and the acceptance runner.
//!
//! Each [`Invariant`] draws random valid parameters and checks one model
//! property, so the same code runs at a few hundred cases under
//! `cargo test` and at 1000 cases in the acceptance suite.

#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use sssim_core::circuits::{
    lna_gain_closed_form, lna_gain_exact, pa_bandwidth, pa_output, LnaConfig, PaConfig, Polarity,
};
use sssim_core::config::{parse_config, parse_config_detailed};
use sssim_core::constants::{
    builtin_material, critical_frequency, niobium, BarrierParams, BUILTIN_NAMES, E, M_STAR,
};
use sssim_core::junction::{
    critical_current, current_density_from_coeffs, iv_voltage, normal_resistance,
    supercurrent_density, wavefunction_coeffs, CurrentConvention, JunctionDevice, WavefunctionState,
};
use sssim_core::noise::{
    carrier_prefactor, dos_sc, noise_carriers_closed_form, noise_carriers_quadrature,
    noise_carriers_with, noise_report, transmission_exact, true_antiderivative, NoiseParams,
    TransmissionModel,
};
use sssim_core::numerics::{integrate, log_sinh, find_root, relative_error, Tolerance};
use sssim_core::run::{compute, config_hash};
use sssim_core::{Error, ErrorClass};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        max_global_rejects: cases * 20,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub struct Invariant {
    pub name: &'static str,
    pub run: fn(&mut TestRunner) -> Result<(), String>,
}

/// Every invariant, in module order.
pub fn invariants() -> Vec<Invariant> {
    macro_rules! inv {
        ($($f:ident),* $(,)?) => { vec![$(Invariant { name: stringify!($f), run: $f }),*] };
    }
    inv![
        critical_frequency_linear_in_tc,
        builtin_materials_validate,
        supercurrent_bounded_by_critical,
        supercurrent_odd_in_phase,
        barrier_height_orders_zeta_and_jc,
        ic_rn_gate_invariant,
        iv_gap_jump_exact,
        coefficient_route_matches_closed_form,
        lna_gain_sign_fixed_by_lever,
        lna_numerator_identity,
        pa_power_bookkeeping,
        pa_bandwidth_identity,
        lna_closed_form_error_shrinks_with_swing,
        transmission_in_unit_interval_and_decreasing_in_width,
        dos_at_least_normal_state,
        carriers_nondecreasing_in_window,
        noise_prefactor_identity,
        noise_error_estimates_finite,
        quadrature_exact_on_polynomials,
        quadrature_additive,
        log_sinh_increasing_across_switch,
        root_inside_bracket,
        config_round_trip,
        exit_codes_partition_classes,
        summary_echoes_config,
    ]
}

pub fn run_invariant(name: &str, cases: u32) -> Result<(), String> {
    let inv = invariants()
        .into_iter()
        .find(|i| i.name == name)
        .unwrap_or_else(|| panic!("no invariant `{name}`"));
    (inv.run)(&mut runner(cases))
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn convention() -> impl Strategy<Value = CurrentConvention> {
    prop_oneof![Just(CurrentConvention::Pair), Just(CurrentConvention::Bare)]
}

/// Niobium junction with random barrier, geometry and pair density.
pub fn device() -> impl Strategy<Value = JunctionDevice> {
    (
        log_uniform(1e24, 1e28),
        0.1f64..3.0,
        0.5e-9f64..1.0e-9,
        log_uniform(1e-13, 1e-11),
        0.5f64..1.5,
        convention(),
    )
        .prop_map(|(n, v0_ev, d, area, eta, conv)| {
            let mut barrier = BarrierParams::silicon(d, v0_ev * E);
            barrier.gate_lever = eta;
            let mut dev = JunctionDevice::new(niobium(), barrier, area).with_pair_density(n);
            dev.convention = conv;
            dev
        })
}

/// A gate voltage in [−1 V, half-way to barrier collapse].
fn gate_for(dev: &JunctionDevice, u: f64) -> f64 {
    let hi = 0.5 * dev.barrier.v0_base / (E * dev.barrier.gate_lever.abs());
    -1.0 + u * (hi + 1.0)
}

// ---------------------------------------------------------------------------
// constants

fn critical_frequency_linear_in_tc(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(log_uniform(0.1, 100.0), log_uniform(1e-3, 1e3)), |(t, alpha)| {
        let mut a = niobium();
        a.t_c = t;
        let mut b = niobium();
        b.t_c = alpha * t;
        let err = relative_error(critical_frequency(&b), alpha * critical_frequency(&a));
        check(err < 1e-12, || format!("f_c(aT) vs a f_c(T): {err:e}"))
    }))
}

fn builtin_materials_validate(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(0..BUILTIN_NAMES.len(), any::<bool>()), |(i, upper)| {
        let name = if upper {
            BUILTIN_NAMES[i].to_ascii_uppercase()
        } else {
            BUILTIN_NAMES[i].to_string()
        };
        let m = ok(builtin_material(&name))?;
        ok(m.validate()).map(|_| ())
    }))
}

// ---------------------------------------------------------------------------
// junction

fn supercurrent_bounded_by_critical(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(device(), 0f64..1.0, -10f64..10.0), |(dev, u, dtheta)| {
        let ic = ok(critical_current(&dev, gate_for(&dev, u), 0.0))?;
        let a = dev.barrier.half_width();
        let mut state = dev.state;
        state.theta1 = dtheta;
        let js = ok(supercurrent_density(&state, a, ic.zeta, dev.barrier.m_star, dev.convention))?.value;
        let jc = ic.j_c_unclamped;
        check(js.abs() <= jc * (1.0 + 1e-15), || format!("|J_S| {js:e} > J_C {jc:e}"))?;
        if (dtheta.sin().abs() - 1.0).abs() > 1e-9 {
            check(js.abs() < jc, || format!("|J_S| = J_C away from pi/2 at {dtheta}"))?;
        }
        state.theta1 = PI / 2.0;
        let peak = ok(supercurrent_density(&state, a, ic.zeta, dev.barrier.m_star, dev.convention))?.value;
        check(relative_error(peak, jc) < 1e-12, || format!("J_S(pi/2) {peak:e} != J_C {jc:e}"))
    }))
}

fn supercurrent_odd_in_phase(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(device(), 0f64..1.0, -10f64..10.0), |(dev, u, dtheta)| {
        let ic = ok(critical_current(&dev, gate_for(&dev, u), 0.0))?;
        let a = dev.barrier.half_width();
        let at = |theta1: f64, theta2: f64| {
            let state = WavefunctionState {
                theta1,
                theta2,
                ..dev.state
            };
            supercurrent_density(&state, a, ic.zeta, dev.barrier.m_star, dev.convention).map(|j| j.value)
        };
        let plus = ok(at(dtheta, 0.0))?;
        let minus = ok(at(0.0, dtheta))?;
        check(plus == -minus, || format!("J({dtheta}) = {plus:e}, J(-{dtheta}) = {minus:e}"))
    }))
}

fn barrier_height_orders_zeta_and_jc(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(device(), 0f64..1.0, 0f64..1.0), |(dev, u1, u2)| {
        let (v1, v2) = (gate_for(&dev, u1.min(u2)), gate_for(&dev, u1.max(u2)));
        prop_assume!(v2 - v1 > 1e-6);
        // raising V_GS lowers the barrier for a positive lever
        let lo = ok(critical_current(&dev, v1, 0.0))?;
        let hi = ok(critical_current(&dev, v2, 0.0))?;
        check(hi.v0_eff < lo.v0_eff, || "barrier did not drop".into())?;
        check(hi.zeta > lo.zeta, || format!("zeta {:e} !> {:e}", hi.zeta, lo.zeta))?;
        check(hi.j_c_unclamped > lo.j_c_unclamped, || {
            format!("J_C {:e} !> {:e}", hi.j_c_unclamped, lo.j_c_unclamped)
        })
    }))
}

fn ic_rn_gate_invariant(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(device(), 0f64..1.0, 0f64..1.0), |(dev, u1, u2)| {
        let product = |u: f64| -> Result<f64, Error> {
            let ic = critical_current(&dev, gate_for(&dev, u), 0.0)?.value;
            Ok(ic * normal_resistance(ic, dev.sc.tau_n)?)
        };
        let (p1, p2) = (ok(product(u1))?, ok(product(u2))?);
        let err = relative_error(p1, p2);
        check(err < 1e-12, || format!("I_C R_n differs by {err:e}"))
    }))
}

fn iv_gap_jump_exact(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(device(), 0f64..1.0), |(dev, u)| {
        let ic = ok(critical_current(&dev, gate_for(&dev, u), 0.0))?.value;
        let rn = ok(normal_resistance(ic, dev.sc.tau_n))?;
        let above = ic.next_up();
        let v_at = ok(iv_voltage(ic, ic, rn, dev.sc.delta_sc, dev.gap_charge))?.voltage;
        let v_above = ok(iv_voltage(above, ic, rn, dev.sc.delta_sc, dev.gap_charge))?.voltage;
        let gap = dev.gap_voltage();
        check(v_at == 0.0, || format!("V(I_C) = {v_at:e}"))?;
        let jump = v_above - v_at;
        check((jump - gap).abs() <= (above - ic) * rn + 4.0 * f64::EPSILON * gap, || {
            format!("jump {jump:e} vs gap {gap:e}")
        })
    }))
}

fn coefficient_route_matches_closed_form(r: &mut TestRunner) -> Result<(), String> {
    let inputs = (
        log_uniform(1e24, 1e28),
        log_uniform(1e24, 1e28),
        -PI..PI,
        -PI..PI,
        0.25e-9f64..1e-9,
        log_uniform(0.01, 100.0),
    );
    report(r.run(&inputs, |(n1, n2, t1, t2, a, x)| {
        let state = WavefunctionState {
            n1,
            theta1: t1,
            n2,
            theta2: t2,
        };
        let zeta = 2.0 * a / x;
        let (c1, c2) = ok(wavefunction_coeffs(&state, a, zeta))?;
        let coeff = current_density_from_coeffs(c1, c2, zeta, M_STAR);
        let closed = ok(supercurrent_density(&state, a, zeta, M_STAR, CurrentConvention::Pair))?.value;
        let jc = closed.abs().max(coeff.abs()) / (t1 - t2).sin().abs().max(1e-300);
        check((coeff - closed).abs() <= 1e-10 * jc, || {
            format!("coefficient route {coeff:e} vs closed form {closed:e}")
        })
    }))
}

// ---------------------------------------------------------------------------
// circuits

/// Unclamped LNA draw: (config, swing) with the bias 1.5× the larger I_C.
fn lna_case() -> impl Strategy<Value = LnaConfig> {
    (
        log_uniform(1e25, 1e27),
        0.5f64..3.0,
        0.6e-9f64..1.0e-9,
        log_uniform(1e-13, 1e-11),
        prop_oneof![0.5f64..1.5, -1.5f64..-0.5],
        convention(),
        -0.02f64..0.02,
        log_uniform(1e-4, 1.0 / 50.0),
    )
        .prop_map(|(n, v0_ev, d, area, eta, conv, centre, frac)| {
            let mut barrier = BarrierParams::silicon(d, v0_ev * E);
            barrier.gate_lever = eta;
            let mut dev = JunctionDevice::new(niobium(), barrier, area).with_pair_density(n);
            dev.convention = conv;
            let half = 0.5 * frac * v0_ev;
            LnaConfig {
                device: dev,
                i_bias: 0.0,
                v_ai: centre + half,
                v_bi: centre - half,
                e0: 0.0,
            }
        })
}

fn biased(mut cfg: LnaConfig) -> Result<LnaConfig, TestCaseError> {
    let a = ok(critical_current(&cfg.device, cfg.v_ai, cfg.e0))?;
    let b = ok(critical_current(&cfg.device, cfg.v_bi, cfg.e0))?;
    if a.clamped || b.clamped {
        return Err(TestCaseError::reject("critical current clamped"));
    }
    cfg.i_bias = 1.5 * a.value.max(b.value);
    Ok(cfg)
}

fn lna_gain_sign_fixed_by_lever(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&lna_case(), |cfg| {
        let cfg = biased(cfg)?;
        let gain = ok(lna_gain_exact(&cfg))?.gain_exact.expect("nonzero swing");
        let eta = cfg.device.barrier.gate_lever;
        check(gain != 0.0 && gain.signum() == -eta.signum(), || {
            format!("gain {gain:e} with lever {eta}")
        })
    }))
}

fn lna_numerator_identity(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&lna_case(), |cfg| {
        let cfg = biased(cfg)?;
        let res = ok(lna_gain_exact(&cfg))?;
        let d = res
            .diagnostics
            .iter()
            .find(|d| d.name == "ic_rn_cancellation")
            .expect("identity diagnostic");
        let err = d.relative_error.unwrap_or(f64::NAN);
        check(err <= 1e-10, || format!("V_A - V_B vs I_B dR_n: {err:e}"))
    }))
}

fn lna_closed_form_error_shrinks_with_swing(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&lna_case(), |cfg| {
        let cfg = biased(cfg)?;
        let centre = 0.5 * (cfg.v_ai + cfg.v_bi);
        let mut swing = cfg.v_ai - cfg.v_bi;
        let mut errors = Vec::new();
        for _ in 0..5 {
            let c = LnaConfig {
                v_ai: centre + swing / 2.0,
                v_bi: centre - swing / 2.0,
                ..cfg.clone()
            };
            let exact = ok(lna_gain_exact(&c))?.gain_exact.expect("nonzero swing");
            let closed = ok(lna_gain_closed_form(&c))?.gain_closed_form.expect("closed form");
            errors.push(relative_error(closed, exact));
            swing /= 2.0;
        }
        check(errors.windows(2).all(|w| w[1] <= w[0]), || {
            format!("closed-form error over halving swings: {errors:?}")
        })
    }))
}

/// Bridge with the bias at a random fraction of the ON-arm I_C.
fn pa_case() -> impl Strategy<Value = PaConfig> {
    (
        log_uniform(1e25, 1e27),
        0.2f64..1.0,
        0.6e-9f64..1.0e-9,
        log_uniform(1e-13, 1e-11),
        log_uniform(1.0, 1e3),
        0.05f64..1.0,
        0f64..0.1,
        -2f64..-0.5,
    )
        .prop_map(|(n, v0_ev, d, area, z, frac, high, low)| {
            let dev = JunctionDevice::new(niobium(), BarrierParams::silicon(d, v0_ev * E), area)
                .with_pair_density(n);
            let ic = critical_current(&dev, high, 0.0).map(|c| c.value).unwrap_or(0.0);
            PaConfig::uniform(dev, z, frac * ic, high, low)
        })
}

fn pa_power_bookkeeping(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&pa_case(), |cfg| {
        prop_assume!(cfg.i_bias > 0.0);
        for p in [Polarity::Plus, Polarity::Zero, Polarity::Minus] {
            let o = ok(pa_output(&cfg, p))?;
            let expect = if p == Polarity::Zero {
                0.0
            } else {
                cfg.i_bias * cfg.i_bias * cfg.z_load
            };
            check(relative_error(o.p_load, expect) < 1e-12 || (expect == 0.0 && o.p_load == 0.0), || {
                format!("{p:?}: P_load {:e} vs {expect:e}", o.p_load)
            })?;
            check(relative_error(o.p_load, o.v_load * o.i_load) < 1e-12 || o.p_load == 0.0, || {
                format!("{p:?}: P_load != V I")
            })?;
        }
        Ok(())
    }))
}

fn pa_bandwidth_identity(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&pa_case(), |cfg| {
        prop_assume!(cfg.i_bias > 0.0);
        let bw = ok(pa_bandwidth(&cfg))?;
        let product = bw.f_3db * (cfg.z_load * bw.c_jn / 2.0) * 2.0 * PI;
        check((product - 1.0).abs() < 1e-12, || format!("f_3dB identity off by {:e}", product - 1.0))
    }))
}

// ---------------------------------------------------------------------------
// noise

/// Noise parameters with a random barrier, width and window.
pub fn noise_case() -> impl Strategy<Value = NoiseParams> {
    (6f64..10.0, 0.3e-9f64..1.5e-9, log_uniform(1e-24, 1e-21), log_uniform(1e8, 1e11), any::<bool>())
        .prop_map(|(v0_ev, l, window, f_min, third)| {
            let mut p = NoiseParams::new(niobium(), BarrierParams::silicon(l, v0_ev * E));
            p.energy_window = window;
            p.f_min = f_min;
            p.directional_third = third;
            p
        })
}

fn transmission_in_unit_interval_and_decreasing_in_width(r: &mut TestRunner) -> Result<(), String> {
    let inputs = (1f64..10.0, 0.01f64..0.99, 0.05e-9f64..2e-9, 0.05e-9f64..2e-9);
    report(r.run(&inputs, |(v0_ev, frac, l1, l2)| {
        let mut p = NoiseParams::new(niobium(), BarrierParams::silicon(l1.min(l2), v0_ev * E));
        let eps = frac * p.v0();
        let thin = ok(transmission_exact(eps, &p))?;
        p.barrier.d = l1.max(l2);
        let thick = ok(transmission_exact(eps, &p))?;
        check(thin > 0.0 && thin <= 1.0 && thick > 0.0 && thick <= 1.0, || {
            format!("T outside (0,1]: {thin:e}, {thick:e}")
        })?;
        check(thick <= thin, || format!("T(thick) {thick:e} > T(thin) {thin:e}"))
    }))
}

fn dos_at_least_normal_state(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&log_uniform(1e-12, 1e6), |u| {
        let p = NoiseParams::new(niobium(), BarrierParams::silicon(1e-9, 6.0 * E));
        let eps = p.sc.delta_sc * (1.0 + u);
        let dos = ok(dos_sc(eps, &p))?;
        check(dos >= 2.0 * p.sc.rho_f, || format!("dos {dos:e} below 2 rho_F at u = {u:e}"))
    }))
}

fn carriers_nondecreasing_in_window(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&(noise_case(), 0f64..1.0), |(p, shrink)| {
        let big = ok(noise_carriers_quadrature(&p))?;
        let mut q = p.clone();
        q.energy_window *= shrink;
        prop_assume!(q.energy_window > 0.0);
        let small = ok(noise_carriers_quadrature(&q))?;
        check(big.value >= small.value - (big.error_estimate + small.error_estimate), || {
            format!("n*({:e}) = {:e} < n*({:e}) = {:e}", p.energy_window, big.value, q.energy_window, small.value)
        })
    }))
}

fn noise_prefactor_identity(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&noise_case(), |p| {
        let scale = carrier_prefactor(&p) * p.directional_factor();
        let cf = ok(noise_carriers_closed_form(&p));
        if let Ok(cf) = cf {
            let expect = 16.0 / p.v0() * scale * cf.bracket;
            check(relative_error(cf.value, expect) < 1e-12, || "closed form != prefactor x bracket".into())?;
        }
        let lin = ok(noise_carriers_with(&p, TransmissionModel::Literal))?;
        let (lo, hi) = (p.band_floor(), p.band_ceiling());
        let (f_lo, f_hi) = (true_antiderivative(lo, &p), true_antiderivative(hi, &p));
        let integral = f_hi - f_lo;
        let expect = 16.0 / p.v0() * scale * integral;
        let slack = lin.error_estimate + 8.0 * f64::EPSILON * (f_hi.abs() + f_lo.abs()) * (16.0 / p.v0() * scale).abs();
        check((lin.value - expect).abs() <= slack + 1e-9 * expect.abs(), || {
            format!("quadrature {:e} vs prefactor x integral {expect:e}", lin.value)
        })
    }))
}

fn noise_error_estimates_finite(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&noise_case(), |p| {
        let rep = match noise_report(&p) {
            Ok(rep) => rep,
            // windows too narrow for the closed form are rejected by design
            Err(Error::NegativeBracket { .. }) => return Err(TestCaseError::reject("negative bracket")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for (name, e) in [
            ("n_star", rep.n_star_quadrature_error),
            ("linearised", rep.integrals.quadrature.error_estimate),
        ] {
            check(e.is_finite() && e >= 0.0, || format!("{name} error estimate {e:e}"))?;
        }
        Ok(())
    }))
}

// ---------------------------------------------------------------------------
// numerics

fn quadrature_exact_on_polynomials(r: &mut TestRunner) -> Result<(), String> {
    let inputs = (prop::collection::vec(-10f64..10.0, 1..=13), -5f64..5.0, -5f64..5.0);
    report(r.run(&inputs, |(c, x, y)| {
        prop_assume!((y - x).abs() > 1e-3);
        let (a, b) = (x.min(y), x.max(y));
        let p = |x: f64| c.iter().rev().fold(0.0, |acc, &k| acc * x + k);
        let anti = |x: f64| {
            c.iter()
                .enumerate()
                .map(|(k, &ck)| ck * x.powi(k as i32 + 1) / (k as f64 + 1.0))
                .sum::<f64>()
        };
        let exact = anti(b) - anti(a);
        let scale: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck.abs() * a.abs().max(b.abs()).powi(k as i32) * (b - a).abs())
            .sum();
        let got = ok(integrate(p, a, b, &Tolerance::default()))?;
        check((got.value - exact).abs() <= 1e-12 * scale, || {
            format!("degree {}: {:e} vs {exact:e}", c.len() - 1, got.value)
        })
    }))
}

fn quadrature_additive(r: &mut TestRunner) -> Result<(), String> {
    let inputs = (0.1f64..20.0, -2f64..2.0, -3f64..3.0, -3f64..3.0, -3f64..3.0);
    report(r.run(&inputs, |(k, c, x1, x2, x3)| {
        let mut xs = [x1, x2, x3];
        xs.sort_by(f64::total_cmp);
        let f = |x: f64| (k * x).sin() + (c * x).exp();
        let tol = Tolerance::default();
        let ab = ok(integrate(f, xs[0], xs[1], &tol))?;
        let bc = ok(integrate(f, xs[1], xs[2], &tol))?;
        let ac = ok(integrate(f, xs[0], xs[2], &tol))?;
        let gap = (ab.value + bc.value - ac.value).abs();
        let rounding = 64.0 * f64::EPSILON * (ab.value.abs() + bc.value.abs() + ac.value.abs());
        check(gap <= ab.error_estimate + bc.error_estimate + ac.error_estimate + rounding, || {
            format!("additivity gap {gap:e}")
        })
    }))
}

fn log_sinh_increasing_across_switch(r: &mut TestRunner) -> Result<(), String> {
    let near = prop_oneof![19.0f64..21.0, 1e-3f64..50.0];
    report(r.run(&(near.clone(), near), |(x, y)| {
        let (lo, hi) = (x.min(y), x.max(y));
        prop_assume!(hi - lo > 1e-9 * hi);
        let (a, b) = (ok(log_sinh(lo))?, ok(log_sinh(hi))?);
        check(a < b, || format!("log_sinh({lo}) = {a} !< log_sinh({hi}) = {b}"))?;
        let below = ok(log_sinh(20f64.next_down()))?;
        let at = ok(log_sinh(20.0))?;
        check((at - below).abs() < 1e-13, || format!("jump at the switch: {:e}", at - below))
    }))
}

fn root_inside_bracket(r: &mut TestRunner) -> Result<(), String> {
    let inputs = (-10f64..10.0, 0.01f64..5.0, 0.01f64..5.0, log_uniform(1e-3, 1e3), 0f64..10.0);
    report(r.run(&inputs, |(r0, left, right, k, m)| {
        let (lo, hi) = (r0 - left, r0 + right);
        let f = |x: f64| k * (x - r0) + m * (x - r0).powi(3);
        let tol = Tolerance::new(1e-12, 1e-12, 60).expect("valid tolerance");
        let root = ok(find_root(f, lo, hi, &tol))?;
        check((lo..=hi).contains(&root), || format!("root {root} outside [{lo}, {hi}]"))?;
        check(f(root).abs() <= f(lo).abs().max(f(hi).abs()), || "residual grew".into())?;
        check((root - r0).abs() <= 2.0 * (1e-12 + 1e-12 * r0.abs()), || {
            format!("root {root} vs {r0}")
        })
    }))
}

// ---------------------------------------------------------------------------
// configuration and run plumbing

/// Text of a random valid config for any analysis.
pub fn config_text() -> impl Strategy<Value = String> {
    let analysis = prop_oneof![
        (log_uniform(1e-4, 0.1), 2usize..50, prop::collection::vec(-1f64..0.1, 1..4)).prop_map(
            |(i_max, points, gates)| {
                let g: Vec<_> = gates.iter().map(|v| format!("{v}")).collect();
                format!("[iv]\nI_max = {} mA\npoints = {points}\nV_GS = {} V\n", i_max * 1e3, g.join(", "))
            }
        ),
        (log_uniform(1e-4, 1e-1), -0.05f64..0.05, 1e-4f64..0.01).prop_map(|(i, c, s)| format!(
            "[lna]\nI_bias = {i} A\nV_Ai = {} mV\nV_Bi = {} mV\npoints = 5\n",
            (c + s) * 1e3,
            (c - s) * 1e3
        )),
        (log_uniform(1.0, 1e3), log_uniform(1e-4, 0.1)).prop_map(|(z, i)| format!(
            "[pa]\nZ_load = {z} ohm\nI_bias = {i} A\ngate_high = 0.1 V\ngate_low = -0.8 V\n"
        )),
        (6f64..9.0, any::<bool>(), any::<bool>()).prop_map(|(v0, third, lit)| format!(
            "[noise]\nV0 = {v0} eV\ndirectional_third = {third}\nexponent = {}\n",
            if lit { "fixed" } else { "computed" }
        )),
        (log_uniform(1.0, 1e3), prop::collection::vec(-30f64..20.0, 1..5)).prop_map(|(z, p)| {
            let p: Vec<_> = p.iter().map(|v| format!("{v}")).collect();
            format!("[tradeoff]\nZ_load = {z} ohm\nP_out = {} dBm\n", p.join(", "))
        }),
    ];
    (log_uniform(0.1, 10.0), 0.5f64..1.0, 0.1f64..3.0, log_uniform(1e24, 1e28), 5f64..15.0, analysis).prop_map(
        |(area, d, v0, n, t_c, block)| {
            format!(
                "[material.custom]\nT_C = {t_c} K\n\n[material]\nname = niobium\n\n[barrier]\nV0 = {v0} eV\n\n\
                 [device]\narea = {area} um^2\nd = {d} nm\nn1 = {n} m^-3\nn2 = {n} m^-3\n\n{block}"
            )
        },
    )
}

fn config_round_trip(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&config_text(), |text| {
        let a = ok(parse_config(&text))?;
        let b = ok(parse_config(&a.to_config_text()))?;
        check(a == b, || format!("round trip changed the config:\n{text}"))
    }))
}

fn sample_error() -> impl Strategy<Value = (Error, ErrorClass)> {
    prop_oneof![
        "[a-z]{1,8}".prop_map(|s| (Error::Config(s), ErrorClass::Config)),
        (1usize..100, 1usize..80).prop_map(|(line, column)| (
            Error::Parse { line, column, message: "x".into() },
            ErrorClass::Config
        )),
        "[a-z]{1,8}".prop_map(|s| (Error::UnknownMaterial { name: s, known: "niobium".into() }, ErrorClass::Config)),
        any::<f64>().prop_map(|v| (Error::BarrierCollapse { height_j: v, v_gs: 1.0 }, ErrorClass::Physics)),
        any::<f64>().prop_map(|v| (Error::NegativeBracket { value: v }, ErrorClass::Physics)),
        any::<f64>().prop_map(|v| (Error::BranchViolation { i_bias: v, i_c: 1.0 }, ErrorClass::Physics)),
        any::<f64>().prop_map(|v| (Error::NonConvergence { value: v, error_estimate: 1.0 }, ErrorClass::Numerical)),
        any::<f64>().prop_map(|v| (Error::NonFinite { at: v }, ErrorClass::Numerical)),
        any::<f64>().prop_map(|v| (Error::NoBracket { lo: v, hi: 1.0, f_lo: 1.0, f_hi: 1.0 }, ErrorClass::Numerical)),
        "[a-z]{1,8}".prop_map(|s| (Error::Io { path: s, message: "denied".into() }, ErrorClass::Io)),
    ]
}

fn exit_codes_partition_classes(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&sample_error(), |(err, class)| {
        check(err.class() == class, || format!("{err:?} classed as {:?}", err.class()))?;
        let code = class.exit_code();
        let others = ErrorClass::ALL.iter().filter(|c| **c != class);
        check(code != 0 && others.clone().all(|c| c.exit_code() != code), || {
            format!("exit code {code} shared")
        })?;
        check(err.to_string().lines().count() == 1, || "multi-line error message".into())
    }))
}

fn summary_echoes_config(r: &mut TestRunner) -> Result<(), String> {
    report(r.run(&config_text(), |text| {
        let parsed = ok(parse_config_detailed(&text))?;
        let art = match compute(&parsed, 1) {
            Ok(a) => a,
            // random biases may violate analysis preconditions; those are
            // reported as errors, not summaries
            Err(e) if e.class() == ErrorClass::Physics => return Err(TestCaseError::reject("physics precondition")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let echo = art
            .summary
            .split("## resolved config\n")
            .nth(1)
            .and_then(|s| s.split("\n## ").next())
            .expect("resolved config section");
        let back = ok(parse_config(echo))?;
        check(back == parsed.config, || "summary echo does not reproduce the config".into())?;
        let hash = config_hash(&parsed.config);
        check(art.summary.contains(&hash), || "summary lacks the config hash".into())?;
        check(art.curves.iter().all(|(_, c)| c.render().contains(&hash)), || "csv lacks the config hash".into())
    }))
}
