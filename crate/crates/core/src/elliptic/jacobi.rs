//! Jacobi elliptic functions and the complete/incomplete integrals of the
//! first kind.
//!
//! The second argument is the *modulus* `k`; the parameter is `k²`. This is
//! the convention of most handbooks of formulas but not of every library
//! (SciPy's `ellipj`, for one, takes the parameter).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|cn|` below which `tn` reports a pole.
pub const TN_POLE_TOL: f64 = 1e-12;

const MAX_LADDER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiArgs {
    pub u: f64,
    pub modulus: f64,
}

impl JacobiArgs {
    pub fn new(u: f64, modulus: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&modulus) {
            return Err(Error::Modulus(modulus));
        }
        if !u.is_finite() {
            return Err(Error::Config(format!("Jacobi argument u = {u} is not finite")));
        }
        Ok(JacobiArgs { u, modulus })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnCnDn {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// A value that may instead be a pole of the function being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eval {
    Finite(f64),
    Pole,
}

impl Eval {
    pub fn finite(self) -> Option<f64> {
        match self {
            Eval::Finite(v) => Some(v),
            Eval::Pole => None,
        }
    }

    pub fn is_pole(self) -> bool {
        matches!(self, Eval::Pole)
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Eval {
        match self {
            Eval::Finite(v) => Eval::Finite(f(v)),
            Eval::Pole => Eval::Pole,
        }
    }
}

/// Arithmetic-geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_LADDER {
        if (a - b).abs() <= 1e-16 * a.abs() {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    a
}

/// Complete integral `K(k) = π / (2 agm(1, √(1−k²)))`.
pub fn ellip_k(modulus: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&modulus) {
        return Err(Error::Modulus(modulus));
    }
    Ok(FRAC_PI_2 / agm(1.0, (1.0 - modulus * modulus).sqrt()))
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    for _ in 0..64 {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        let e = dx.abs().max(dy.abs()).max(dz.abs());
        if e < 1e-4 {
            // Series is exact to O(e⁶) ≈ 1e−24.
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
    let mu = (x + y + z) / 3.0;
    1.0 / mu.sqrt()
}

/// Incomplete integral `F(φ, k) = ∫₀^φ dθ / √(1 − k² sin²θ)` for any real `φ`.
pub fn ellip_f(phi: f64, modulus: f64) -> Result<f64> {
    let big_k = ellip_k(modulus)?;
    // Reduce to |φ| ≤ π/2 using F(φ + jπ) = F(φ) + 2jK.
    let j = (phi / std::f64::consts::PI).round();
    let r = phi - j * std::f64::consts::PI;
    let (s, c) = r.sin_cos();
    let m = modulus * modulus;
    Ok(s * carlson_rf(c * c, 1.0 - m * s * s, 1.0) + 2.0 * j * big_k)
}

/// `sn`, `cn`, `dn` by the descending Landen (AGM) ladder.
pub fn sncndn(args: JacobiArgs) -> SnCnDn {
    let k = args.modulus;
    if k == 0.0 {
        let (sn, cn) = args.u.sin_cos();
        return SnCnDn { sn, cn, dn: 1.0 };
    }
    // Reduce by the real period 4K so the ladder never sees a large argument.
    let big_k = FRAC_PI_2 / agm(1.0, (1.0 - k * k).sqrt());
    let period = 4.0 * big_k;
    let u = args.u - period * (args.u / period).round();

    let mut a = [0.0f64; MAX_LADDER + 1];
    let mut c = [0.0f64; MAX_LADDER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    c[0] = k;
    let mut n = 0;
    while c[n].abs() > 1e-16 && n < MAX_LADDER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn ≥ √(1−k²) > 0 on the real line.
    let dn = (1.0 - k * k * sn * sn).sqrt();
    SnCnDn { sn, cn, dn }
}

pub fn jacobi_sn(args: JacobiArgs) -> f64 {
    sncndn(args).sn
}

pub fn jacobi_cn(args: JacobiArgs) -> f64 {
    sncndn(args).cn
}

pub fn jacobi_dn(args: JacobiArgs) -> f64 {
    sncndn(args).dn
}

/// `tn = sn/cn`, tagged as a pole where `|cn| < 1e−12`.
pub fn jacobi_tn(args: JacobiArgs) -> Eval {
    let v = sncndn(args);
    if v.cn.abs() < TN_POLE_TOL {
        Eval::Pole
    } else {
        Eval::Finite(v.sn / v.cn)
    }
}
