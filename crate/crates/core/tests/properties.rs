use std::sync::Arc;

use proptest::prelude::*;
use rosenau::elliptic::jacobi::{ellip_k, jacobi_cn, jacobi_dn, jacobi_sn, JacobiArgs};
use rosenau::elliptic::{derive_case_params, evaluate_phi, EllipticCase};
use rosenau::solver::{energy, Rosenau};
use rosenau::spectral::{forward_dft, inverse_dft, spectral_derivative, Field, Grid};

fn grid(n: usize) -> Arc<Grid> {
    Grid::new(-10.0, 10.0, n).unwrap()
}

fn field_strategy(n: usize) -> impl Strategy<Value = Field> {
    prop::collection::vec(-5.0f64..5.0, n).prop_map(move |v| Field::new(grid(n), v).unwrap())
}

fn without_nyquist(u: Field) -> Field {
    let mut spec = forward_dft(&u);
    let nyq = u.grid().nyquist_index();
    spec.coeffs_mut()[nyq] = Default::default();
    inverse_dft(&spec).unwrap()
}

fn sizes() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 64, 256])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_round_trip(u in sizes().prop_flat_map(field_strategy)) {
        let back = inverse_dft(&forward_dft(&u)).unwrap();
        prop_assert!(back.max_diff(&u) <= 1e-12 * u.max_abs().max(1.0));
    }

    #[test]
    fn parseval(u in sizes().prop_flat_map(field_strategy)) {
        let n = u.values().len() as f64;
        let physical: f64 = u.values().iter().map(|v| v * v).sum::<f64>() / n;
        let spectral: f64 = forward_dft(&u).coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1.0));
    }

    #[test]
    fn transform_is_linear(
        (u, v) in sizes().prop_flat_map(|n| (field_strategy(n), field_strategy(n))),
        alpha in -3.0f64..3.0,
    ) {
        let w = Field::new(u.grid().clone(), u.values().iter().zip(v.values()).map(|(a, b)| a + alpha * b).collect()).unwrap();
        let (fu, fv, fw) = (forward_dft(&u), forward_dft(&v), forward_dft(&w));
        for i in 0..fw.coeffs().len() {
            let expect = fu.coeffs()[i] + fv.coeffs()[i] * alpha;
            prop_assert!((fw.coeffs()[i] - expect).norm() <= 1e-13 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn derivative_of_a_resolved_mode(k in 1i64..30, order in 1u32..=4) {
        let g = grid(64);
        let s = g.scale();
        let u = Field::from_fn(g.clone(), |x| (s * k as f64 * (x - g.a())).sin()).unwrap();
        let d = spectral_derivative(&u, order).unwrap();
        let kk = s * k as f64;
        let expect = Field::from_fn(g.clone(), |x| {
            let ph = kk * (x - g.a());
            let v = match order % 4 { 0 => ph.sin(), 1 => ph.cos(), 2 => -ph.sin(), _ => -ph.cos() };
            kk.powi(order as i32) * v
        }).unwrap();
        prop_assert!(d.max_diff(&expect) <= 1e-11 * kk.powi(order as i32).max(1.0));
    }

    /// The Nyquist mode translates as a real cosine projection, so only fields
    /// without it form a group under translation.
    #[test]
    fn translation_composes(u in field_strategy(64).prop_map(without_nyquist), s1 in -20.0f64..20.0, s2 in -20.0f64..20.0) {
        let twice = u.translate(s1).unwrap().translate(s2).unwrap();
        let once = u.translate(s1 + s2).unwrap();
        prop_assert!(twice.max_diff(&once) <= 1e-11 * u.max_abs().max(1.0));
    }

    #[test]
    fn evolution_commutes_with_whole_cell_shifts(cells in -32isize..32, amp in 0.1f64..1.0) {
        let g = Grid::new(-20.0, 20.0, 128).unwrap();
        let u0 = Field::from_fn(g, |x| amp * (-x * x / 4.0).exp()).unwrap();
        let solver = Rosenau::new(1.0).unwrap();
        let run = |u: &Field| solver.evolve(u, 0.5, 50, 50).unwrap().final_field().clone();
        let a = run(&u0).roll(cells);
        let b = run(&u0.roll(cells));
        prop_assert!(a.max_diff(&b) <= 1e-13);
    }

    #[test]
    fn constant_states_are_steady(value in -2.0f64..2.0, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
        let g = grid(32);
        let u0 = Field::from_fn(g, |_| value).unwrap();
        let out = Rosenau::new(p).unwrap().evolve(&u0, 1.0, 20, 20).unwrap();
        prop_assert!(out.final_field().max_diff(&u0) <= 1e-13);
    }

    #[test]
    fn jacobi_identities(u in -50.0f64..50.0, k in 0.0f64..0.999) {
        let a = JacobiArgs::new(u, k).unwrap();
        let (sn, cn, dn) = (jacobi_sn(a), jacobi_cn(a), jacobi_dn(a));
        prop_assert!((sn * sn + cn * cn - 1.0).abs() <= 1e-12);
        prop_assert!((dn * dn + k * k * sn * sn - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn jacobi_periodicity(u in -5.0f64..5.0, k in 0.0f64..0.99) {
        let big_k = ellip_k(k).unwrap();
        let sn = |v: f64| jacobi_sn(JacobiArgs::new(v, k).unwrap());
        let cn = |v: f64| jacobi_cn(JacobiArgs::new(v, k).unwrap());
        prop_assert!((sn(u + 4.0 * big_k) - sn(u)).abs() <= 1e-11);
        prop_assert!((sn(u + 2.0 * big_k) + sn(u)).abs() <= 1e-11);
        prop_assert!((cn(u + 4.0 * big_k) - cn(u)).abs() <= 1e-11);
    }

    #[test]
    fn bounded_cases_stay_between_their_roots(xi in -30.0f64..30.0) {
        let cases = [
            (EllipticCase::IIb, -1.0, 1.0, 2usize, 1usize),
            (EllipticCase::IId, 1.0, -1.0, 3, 2),
            (EllipticCase::IIe, 1.0, -1.0, 1, 0),
        ];
        for (case, c2, c4, lo, hi) in cases {
            let params = derive_case_params(case, 1.0, 1.0, c2, c4, 0.0).unwrap();
            let roots = params.real_roots().unwrap();
            let phi = evaluate_phi(&params, xi).finite().unwrap();
            let tol = 1e-9 * roots[0].abs();
            prop_assert!(roots[lo] - tol <= phi && phi <= roots[hi] + tol, "{case}: {phi} outside [{}, {}]", roots[lo], roots[hi]);
        }
    }
}

/// `sn(u) = sin φ` where `u = ∫₀^φ dθ / √(1 − k² sin²θ)`, the integral taken
/// by composite Simpson.
#[test]
fn sn_inverts_the_incomplete_integral() {
    let k: f64 = 0.985171;
    for phi in [0.3, 0.9, 1.4] {
        let n = 20_000;
        let h = phi / n as f64;
        let f = |t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt();
        let mut sum = f(0.0) + f(phi);
        for i in 1..n {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let u = sum * h / 3.0;
        let sn = jacobi_sn(JacobiArgs::new(u, k).unwrap());
        assert!((sn - phi.sin()).abs() < 1e-12, "phi = {phi}: sn = {sn}, sin φ = {}", phi.sin());
    }
}

/// Halving the step cuts the RK4 difference between successive runs by 2⁴.
#[test]
fn step_halving_ratio_is_sixteen() {
    let g = Grid::new(-30.0, 30.0, 256).unwrap();
    let u0 = Field::from_fn(g, |x| 1.5 / (x / 2.0).cosh().powi(2)).unwrap();
    let solver = Rosenau::new(1.0).unwrap();
    let run = |m: usize| solver.evolve(&u0, 4.0, m, m).unwrap().final_field().clone();
    let (a, b, c) = (run(50), run(100), run(200));
    let ratio = a.max_diff(&b) / b.max_diff(&c);
    assert!((ratio - 16.0).abs() <= 0.15 * 16.0, "ratio {ratio}");
}

#[test]
fn energy_of_a_single_mode() {
    let g = grid(64);
    let kk = g.scale() * 3.0;
    let u = Field::from_fn(g.clone(), |x| (kk * x).cos()).unwrap();
    let expect = 0.5 * g.length() * (1.0 + kk.powi(4));
    assert!((energy(&u).unwrap() - expect).abs() < 1e-12 * expect);
}
