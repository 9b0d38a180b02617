//! Closed-form traveling waves `u(x, t) = F(kx − ct)` of the quadratic Rosenau
//! equation `u_t + u_x + (u²)_x + u_xxxxt = 0`.
//!
//! The profile is `F = a₀ + a₂φ² + a₄φ⁴` where `φ` solves
//! `(φ′)² = c₀ + c₂φ² + c₄φ⁴ = P(φ)` and
//!
//! ```text
//! a₀ = (112 c c₂² k⁴ + c − k) / (2k)    a₂ = 560 c c₂ c₄ k³
//! a₄ = 840 c c₄² k³                      c₀ = 2c₂² / (9c₄)
//! ```
//!
//! Each case picks the interval between roots of `P` on which `φ` lives.
//! Jacobi functions take the modulus as second argument (see [`jacobi`]).

pub mod jacobi;

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use jacobi::{
    agm, ellip_f, ellip_k, jacobi_cn, jacobi_dn, jacobi_sn, jacobi_tn, sncndn, Eval, JacobiArgs,
    SnCnDn,
};

/// Denominators of the rational sn² forms below this magnitude are poles.
pub const POLE_TOL: f64 = 1e-12;

/// Step of the 5-point first-derivative stencil in [`ode_residual_phi`].
pub const ODE_FD_STEP: f64 = 1e-5;

/// Default stencil step, in units of `ξ`, for [`pde_residual`].
pub const PDE_FD_STEP: f64 = 0.04;

/// Accuracy order of the centered stencils in [`pde_residual`].
pub const PDE_FD_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EllipticCase {
    I,
    IIa,
    IIb,
    IIc,
    IId,
    IIe,
    IIf,
}

impl EllipticCase {
    pub const ALL: [EllipticCase; 7] = [
        EllipticCase::I,
        EllipticCase::IIa,
        EllipticCase::IIb,
        EllipticCase::IIc,
        EllipticCase::IId,
        EllipticCase::IIe,
        EllipticCase::IIf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EllipticCase::I => "I",
            EllipticCase::IIa => "IIa",
            EllipticCase::IIb => "IIb",
            EllipticCase::IIc => "IIc",
            EllipticCase::IId => "IId",
            EllipticCase::IIe => "IIe",
            EllipticCase::IIf => "IIf",
        }
    }

    /// Whether `φ` is a rational function of `sn²`.
    fn is_sn_squared(self) -> bool {
        !matches!(self, EllipticCase::I | EllipticCase::IIf)
    }
}

impl fmt::Display for EllipticCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EllipticCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.trim().chars().filter(|c| *c != '.').collect();
        EllipticCase::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(&t))
            .ok_or_else(|| Error::Config(format!("unknown case `{s}`; expected one of I, IIa, IIb, IIc, IId, IIe, IIf")))
    }
}

/// Parameters of one closed-form solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticCaseParams {
    pub case: EllipticCase,
    pub c: f64,
    pub k: f64,
    pub c2: f64,
    pub c4: f64,
    pub xi0: f64,
    /// Sign `ε = ±1`; only Case I depends on it.
    pub epsilon: f64,
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
    pub c0: f64,
    /// Roots of `P`, ordered `φ₁ > φ₂ > φ₃ > φ₄` when real; `±i√(2c₂/3c₄)`,
    /// `±i√(c₂/3c₄)` in Case II.f; all zero in Case I.
    pub roots: [Complex64; 4],
    pub modulus: Option<f64>,
    pub g: Option<f64>,
    pub r: Option<f64>,
    /// Coefficient `λ` in the Jacobi argument `λ(ξ − ξ₀)`.
    pub rate: Option<f64>,
}

fn constraint(case: EllipticCase, message: String) -> Error {
    Error::CaseConstraint { case: case.name(), message }
}

/// Fills in every derived constant and checks the sign constraints of `case`.
pub fn derive_case_params(case: EllipticCase, c: f64, k: f64, c2: f64, c4: f64, xi0: f64) -> Result<EllipticCaseParams> {
    for (name, v) in [("c", c), ("k", k), ("c2", c2), ("c4", c4), ("xi0", xi0)] {
        if !v.is_finite() {
            return Err(constraint(case, format!("{name} = {v} is not finite")));
        }
    }
    if k == 0.0 {
        return Err(constraint(case, "k must be nonzero".into()));
    }
    let sign_error = |need: &str| {
        constraint(case, format!("requires {need}, got c2 = {c2}, c4 = {c4}"))
    };
    match case {
        EllipticCase::I if !(c2 == 0.0 && c4 > 0.0) => return Err(sign_error("c2 = 0 and c4 > 0")),
        EllipticCase::IIa | EllipticCase::IIb | EllipticCase::IIc if !(c4 > 0.0 && c2 < 0.0) => {
            return Err(sign_error("c4 > 0 and c2 < 0"))
        }
        EllipticCase::IId | EllipticCase::IIe if !(c4 < 0.0 && c2 > 0.0) => {
            return Err(sign_error("c4 < 0 and c2 > 0"))
        }
        EllipticCase::IIf if !(c4 > 0.0 && c2 > 0.0) => return Err(sign_error("c4 > 0 and c2 > 0")),
        _ => {}
    }

    let a0 = (112.0 * c * c2 * c2 * k.powi(4) + c - k) / (2.0 * k);
    let a2 = 560.0 * c * c2 * c4 * k.powi(3);
    let a4 = 840.0 * c * c4 * c4 * k.powi(3);
    let c0 = 2.0 * c2 * c2 / (9.0 * c4);

    let zero = Complex64::new(0.0, 0.0);
    let (roots, modulus, g, r, rate) = match case {
        EllipticCase::I => ([zero; 4], None, None, None, None),
        EllipticCase::IIf => {
            let a = (2.0 * c2 / (3.0 * c4)).sqrt();
            let b = (c2 / (3.0 * c4)).sqrt();
            let roots = [
                Complex64::new(0.0, a),
                Complex64::new(0.0, b),
                Complex64::new(0.0, -b),
                Complex64::new(0.0, -a),
            ];
            let g = (3.0 * c4 / (2.0 * c2)).sqrt();
            (roots, Some(std::f64::consts::FRAC_1_SQRT_2), Some(g), None, Some((2.0 * c2 / 3.0).sqrt()))
        }
        _ => {
            let phi1 = (-2.0 * c2 / (3.0 * c4)).sqrt();
            let phi2 = (-c2 / (3.0 * c4)).sqrt();
            let roots = [phi1, phi2, -phi2, -phi1].map(|v| Complex64::new(v, 0.0));
            let g = 2.0 * (SQRT_2 - 1.0) * (-3.0 * c4 / c2).sqrt();
            let (m, r) = match case {
                EllipticCase::IIa | EllipticCase::IIc => (2.0 * (3.0 * SQRT_2 - 4.0).sqrt(), 4.0 - 2.0 * SQRT_2),
                EllipticCase::IIb => (2.0 * (3.0 * SQRT_2 - 4.0).sqrt(), 2.0 * (SQRT_2 - 1.0)),
                _ => (3.0 - 2.0 * SQRT_2, 3.0 - 2.0 * SQRT_2),
            };
            (roots, Some(m), Some(g), Some(r), Some(c4.abs().sqrt() / g))
        }
    };

    let params = EllipticCaseParams {
        case,
        c,
        k,
        c2,
        c4,
        xi0,
        epsilon: 1.0,
        a0,
        a2,
        a4,
        c0,
        roots,
        modulus,
        g,
        r,
        rate,
    };
    let lhs = params.c0 * params.c4;
    let rhs = 2.0 * c2 * c2 / 9.0;
    assert!(
        (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE),
        "c0·c4 = {lhs} differs from 2c2²/9 = {rhs}"
    );
    Ok(params)
}

impl EllipticCaseParams {
    /// Same parameters with the sign `ε` of Case I set to `±1`.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if epsilon != 1.0 && epsilon != -1.0 {
            return Err(constraint(self.case, format!("epsilon must be ±1, got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// Real roots `φ₁ > φ₂ > φ₃ > φ₄`, or `None` in Cases I and II.f.
    pub fn real_roots(&self) -> Option<[f64; 4]> {
        self.case.is_sn_squared().then(|| self.roots.map(|z| z.re))
    }

    /// `P(φ) = c₀ + c₂φ² + c₄φ⁴`.
    pub fn quartic(&self, phi: f64) -> f64 {
        let z = phi * phi;
        self.c0 + self.c2 * z + self.c4 * z * z
    }

    fn jacobi(&self, xi: f64) -> SnCnDn {
        let m = self.modulus.expect("set for every case but I");
        let rate = self.rate.expect("set for every case but I");
        sncndn(JacobiArgs { u: rate * (xi - self.xi0), modulus: m })
    }

    /// Period of `φ` in `ξ`, `2K(m)/λ`; `None` in Case I.
    pub fn period(&self) -> Option<f64> {
        let m = self.modulus?;
        let rate = self.rate?;
        Some(2.0 * ellip_k(m).expect("modulus in range") / rate)
    }

    /// Poles of `φ` in `[ξ₀, ξ₀ + period)`, located analytically.
    pub fn poles_in_period(&self) -> Vec<f64> {
        let (Some(m), Some(rate)) = (self.modulus, self.rate) else {
            return vec![self.xi0];
        };
        let big_k = ellip_k(m).expect("modulus in range");
        match self.case {
            EllipticCase::IIf => vec![self.xi0 + big_k / rate],
            _ => {
                let r = self.r.expect("set for sn² cases");
                if self.has_sign_change_denominator() && r > 1.0 {
                    let u = ellip_f((1.0 / r.sqrt()).asin(), m).expect("modulus in range");
                    vec![self.xi0 + u / rate, self.xi0 + (2.0 * big_k - u) / rate]
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Cases whose denominator is `1 − R sn²` rather than `1 + R sn²`.
    fn has_sign_change_denominator(&self) -> bool {
        matches!(self.case, EllipticCase::IIa | EllipticCase::IIb | EllipticCase::IIc)
    }
}

/// `φ(ξ)`, or a pole tag where the closed form is singular.
///
/// Cases II.d and II.e use `1 + R sn²` denominators. In Case II.e this is the
/// form `(φ₁ + φ₄R sn²)/(1 + R sn²)` spanning `[φ₂, φ₁]`; the variant with
/// numerator `φ₂ + φ₃R sn²` over `1 − R sn²` reduces to the constant `φ₂`
/// because `φ₃ = −φ₂`.
pub fn evaluate_phi(params: &EllipticCaseParams, xi: f64) -> Eval {
    let d = xi - params.xi0;
    if params.case == EllipticCase::I {
        let den = params.c4.sqrt() * d;
        if den.abs() < POLE_TOL {
            return Eval::Pole;
        }
        return Eval::Finite(params.epsilon / den);
    }
    if params.case == EllipticCase::IIf {
        let b = params.roots[1].im;
        let v = params.jacobi(xi);
        if v.cn.abs() < jacobi::TN_POLE_TOL {
            return Eval::Pole;
        }
        return Eval::Finite(b * v.sn / v.cn);
    }
    let [p1, p2, p3, p4] = params.real_roots().expect("sn² case");
    let r = params.r.expect("sn² case");
    let s2 = params.jacobi(xi).sn.powi(2);
    let (num, den) = match params.case {
        EllipticCase::IIa => (p1 - p2 * r * s2, 1.0 - r * s2),
        EllipticCase::IIb => (p2 - p1 * r * s2, 1.0 - r * s2),
        EllipticCase::IIc => (p4 - p3 * r * s2, 1.0 - r * s2),
        EllipticCase::IId => (p4 + p1 * r * s2, 1.0 + r * s2),
        EllipticCase::IIe => (p1 + p4 * r * s2, 1.0 + r * s2),
        EllipticCase::I | EllipticCase::IIf => unreachable!(),
    };
    if den.abs() < POLE_TOL {
        Eval::Pole
    } else {
        Eval::Finite(num / den)
    }
}

/// `u(x, t) = a₀ + a₂φ² + a₄φ⁴` at `ξ = kx − ct`.
pub fn evaluate_solution(params: &EllipticCaseParams, x: f64, t: f64) -> Eval {
    evaluate_phi(params, params.k * x - params.c * t).map(|phi| {
        let z = phi * phi;
        params.a0 + params.a2 * z + params.a4 * z * z
    })
}

/// `max |(φ′)² − P(φ)|` over `samples`, with `φ′` from the 5-point centered
/// difference at step `1e−5`. A pole on any stencil point is an error.
pub fn ode_residual_phi(params: &EllipticCaseParams, samples: &[f64]) -> Result<f64> {
    let h = ODE_FD_STEP;
    let mut worst = 0.0f64;
    for &xi in samples {
        let mut f = [0.0; 5];
        for (slot, j) in f.iter_mut().zip(-2..=2) {
            let at = xi + j as f64 * h;
            *slot = evaluate_phi(params, at).finite().ok_or(Error::Pole { xi: at })?;
        }
        let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
        worst = worst.max((d1 * d1 - params.quartic(f[2])).abs());
    }
    Ok(worst)
}

/// Weights of the derivative of order `d` at 0 on the nodes `xs`, by
/// Fornberg's recursion.
fn fd_weights(xs: &[f64], d: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; d + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0];
    for i in 1..n {
        let mn = i.min(d);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i];
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[d]).collect()
}

/// Centered stencil `(offsets, weights)` for derivative `d` at accuracy `order`.
fn centered_stencil(d: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let half = (d + order - 1) / 2;
    let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|j| j as f64).collect();
    let weights = fd_weights(&offsets, d);
    (offsets, weights)
}

/// Window of `(x, t)` samples for [`pde_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub samples: usize,
}

/// `max |u_t + u_x + (u²)_x + u_xxxxt|` over the window at time `t`.
///
/// Every term is a centered finite difference of [`evaluate_solution`]
/// (order 10, step `0.04/|k|` in `x` and `0.04/|c|` in `t`), the mixed
/// derivative as a `t`-difference of `x`-differences. A pole on any stencil
/// point is an error.
pub fn pde_residual(params: &EllipticCaseParams, window: Window, t: f64) -> Result<f64> {
    pde_residual_with(params, window, t, PDE_FD_STEP, PDE_FD_ORDER)
}

/// [`pde_residual`] with an explicit `ξ`-step and stencil order.
pub fn pde_residual_with(params: &EllipticCaseParams, window: Window, t: f64, step: f64, order: usize) -> Result<f64> {
    let hx = step / params.k.abs();
    let ht = if params.c == 0.0 { step } else { step / params.c.abs() };
    pde_residual_of(|x, t| evaluate_solution(params, x, t), window, t, (hx, ht), order)
}

/// The finite-difference residual of `u_t + u_x + (u²)_x + u_xxxxt` for any
/// field `u(x, t)`, with steps `(hx, ht)`.
pub fn pde_residual_of(
    u: impl Fn(f64, f64) -> Eval,
    window: Window,
    t: f64,
    (hx, ht): (f64, f64),
    order: usize,
) -> Result<f64> {
    if window.samples == 0 || !(window.x_max >= window.x_min) {
        return Err(Error::Config("window needs x_min ≤ x_max and at least one sample".into()));
    }
    if order < 2 || order % 2 != 0 {
        return Err(Error::Config(format!("stencil order must be even and at least 2, got {order}")));
    }
    let (o1, w1) = centered_stencil(1, order);
    let (o4, w4) = centered_stencil(4, order);
    let u = |x: f64, t: f64| -> Result<f64> { u(x, t).finite().ok_or(Error::Pole { xi: x }) };
    let mut worst = 0.0f64;
    for i in 0..window.samples {
        let x = if window.samples == 1 {
            window.x_min
        } else {
            window.x_min + (window.x_max - window.x_min) * i as f64 / (window.samples - 1) as f64
        };
        let mut ux = 0.0;
        let mut u2x = 0.0;
        let mut ut = 0.0;
        for (o, w) in o1.iter().zip(&w1) {
            let v = u(x + o * hx, t)?;
            ux += w * v;
            u2x += w * v * v;
            ut += w * u(x, t + o * ht)?;
        }
        let mut u4t = 0.0;
        for (ot, wt) in o1.iter().zip(&w1) {
            let mut d4 = 0.0;
            for (ox, wx) in o4.iter().zip(&w4) {
                d4 += wx * u(x + ox * hx, t + ot * ht)?;
            }
            u4t += wt * d4;
        }
        let res = ut / ht + ux / hx + u2x / hx + u4t / (ht * hx.powi(4));
        worst = worst.max(res.abs());
    }
    Ok(worst)
}
