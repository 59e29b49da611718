//! Disk eigenvalue constants checked against an independent evaluation of
//! Bessel's integral `J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ`.

use std::f64::consts::PI;

use zaremba::bessel::{dirichlet_lambda1, dirichlet_lambda2, neumann_lambda2};

/// Trapezoid rule on the periodic integrand, exponentially accurate.
fn j_integral(n: u32, x: f64) -> f64 {
    let m = 400;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..m).map(|i| f(i as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

fn j_prime_integral(n: u32, x: f64) -> f64 {
    // d/dx of the integrand: sin τ · sin(nτ − x sin τ).
    let m = 400;
    let h = PI / m as f64;
    let f = |t: f64| t.sin() * (n as f64 * t - x * t.sin()).sin();
    let inner: f64 = (1..m).map(|i| f(i as f64 * h)).sum();
    inner * h / PI
}

fn secant(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..60 {
        let (fa, fb) = (f(a), f(b));
        if fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        a = b;
        b = c;
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    b
}

#[test]
fn dirichlet_first_eigenvalue() {
    let j01 = secant(|x| j_integral(0, x), 2.3, 2.5);
    assert!((j01 * j01 - 5.7831859629).abs() < 1e-9);
    assert!((dirichlet_lambda1() - j01 * j01).abs() < 1e-11);
}

#[test]
fn dirichlet_second_eigenvalue() {
    let j11 = secant(|x| j_integral(1, x), 3.8, 3.9);
    assert!((j11 * j11 - 14.6819706422).abs() < 1e-9);
    assert!((dirichlet_lambda2() - j11 * j11).abs() < 1e-10);
}

#[test]
fn neumann_first_nonzero_eigenvalue() {
    let jp11 = secant(|x| j_prime_integral(1, x), 1.8, 1.9);
    assert!((jp11 * jp11 - 3.3899577167).abs() < 1e-9);
    assert!((neumann_lambda2() - jp11 * jp11).abs() < 1e-11);
}
