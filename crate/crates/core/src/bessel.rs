//! Bessel functions of the first kind and their zeros, for the analytic
//! disk eigenvalues: `j₀,₁²` and `j₁,₁²` (Dirichlet), `(j′₁,₁)²` (Neumann).

/// `J_n(x)` by its power series. Accurate to ~1e-13 for `x ≤ 15`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    let q = -half * half;
    for m in 1..200u32 {
        term *= q / (f64::from(m) * f64::from(m + n));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_n′(x)`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// `k`-th positive zero (k ≥ 1) of `f`, by scanning and bisection.
fn kth_zero(f: impl Fn(f64) -> f64, k: usize) -> f64 {
    let step = 0.05;
    let mut count = 0;
    let mut a = 1e-6;
    let mut fa = f(a);
    loop {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            count += 1;
            if count == k {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

/// `j_{n,k}`.
pub fn bessel_zero(n: u32, k: usize) -> f64 {
    kth_zero(|x| bessel_j(n, x), k)
}

/// `j′_{n,k}`, the `k`-th positive critical point of `J_n`.
pub fn bessel_prime_zero(n: u32, k: usize) -> f64 {
    kth_zero(|x| bessel_j_prime(n, x), k)
}

/// First Dirichlet eigenvalue of the unit disk, `j₀,₁²`.
pub fn dirichlet_lambda1() -> f64 {
    bessel_zero(0, 1).powi(2)
}

/// Second (double) Dirichlet eigenvalue, `j₁,₁²`.
pub fn dirichlet_lambda2() -> f64 {
    bessel_zero(1, 1).powi(2)
}

/// First nonzero (double) Neumann eigenvalue, `(j′₁,₁)²`.
pub fn neumann_lambda2() -> f64 {
    bessel_prime_zero(1, 1).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_values() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        // Tabulated: J₀(1) = 0.7651976865579666, J₁(1) = 0.4400505857449335.
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn zeros_are_ordered() {
        assert!(bessel_prime_zero(1, 1) < bessel_zero(0, 1));
        assert!(bessel_zero(0, 1) < bessel_zero(1, 1));
        assert!(bessel_zero(0, 1) < bessel_zero(0, 2));
    }
}
