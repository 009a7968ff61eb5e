//! Fibonacci and binomial sums behind the cost theorems.
//!
//! Closed forms use exact integers. Binet's formula is kept only as a
//! floating-point cross-check.

use crate::math;

/// `F(n)` with `F(1) = F(2) = 1`, `F(0) = 0`.
pub fn fibonacci(n: u32) -> i128 {
    let (mut a, mut b) = (0i128, 1i128);
    for _ in 0..n {
        let t = a + b;
        a = b;
        b = t;
    }
    a
}

/// `C(n, k)`.
pub fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

/// Binet's formula `F(n) = (φ^n - ψ^n)/√5`.
pub fn fibonacci_binet(n: u32) -> f64 {
    let s5 = math::sqrt(5.0);
    let phi = (1.0 + s5) / 2.0;
    let psi = (1.0 - s5) / 2.0;
    (math::pow(phi, n as f64) - math::pow(psi, n as f64)) / s5
}

/// The four sums used by the cost theorems, for fixed `m`, `α`, `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FibSums {
    /// `Σ_{b=2}^{m+2} F(b+1)`.
    pub sum_f: i128,
    /// `Σ_{b=2}^{m+2} b F(b+1)`.
    pub sum_bf: i128,
    /// `Σ_{b=2}^{m+2} F(b+1)(αb + β)`.
    pub affine_fib: i128,
    /// `Σ_{b=0}^{m} C(m,b)(αb + β)`.
    pub affine_binom: i128,
}

/// [`FibSums`] evaluated in floating point from Binet's formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinetSums {
    pub sum_f: f64,
    pub sum_bf: f64,
    pub affine_fib: f64,
    pub affine_binom: f64,
}

/// Closed forms:
/// `F(m+5) - 3`, `(m+2)F(m+5) - F(m+6) + 2`,
/// `αmF(m+5) - αF(m+6) + (2α+β)F(m+5) + (2α - 3β)` and `αm2^{m-1} + β2^m`.
pub fn closed_form_sums(m: u32, alpha: i64, beta: i64) -> FibSums {
    let (a, b, mm) = (alpha as i128, beta as i128, m as i128);
    let f5 = fibonacci(m + 5);
    let f6 = fibonacci(m + 6);
    let pow = 1i128 << m;
    FibSums {
        sum_f: f5 - 3,
        sum_bf: (mm + 2) * f5 - f6 + 2,
        affine_fib: a * mm * f5 - a * f6 + (2 * a + b) * f5 + (2 * a - 3 * b),
        affine_binom: a * mm * pow / 2 + b * pow,
    }
}

/// The same closed forms with Binet Fibonacci numbers.
pub fn closed_form_sums_binet(m: u32, alpha: f64, beta: f64) -> BinetSums {
    let f5 = fibonacci_binet(m + 5);
    let f6 = fibonacci_binet(m + 6);
    let mm = m as f64;
    let pow = math::pow(2.0, mm);
    BinetSums {
        sum_f: f5 - 3.0,
        sum_bf: (mm + 2.0) * f5 - f6 + 2.0,
        affine_fib: alpha * mm * f5 - alpha * f6 + (2.0 * alpha + beta) * f5 + (2.0 * alpha - 3.0 * beta),
        affine_binom: alpha * mm * pow / 2.0 + beta * pow,
    }
}

/// Term-by-term evaluation of the same four sums.
pub fn direct_sums(m: u32, alpha: i64, beta: i64) -> FibSums {
    let (a, b) = (alpha as i128, beta as i128);
    let mut out = FibSums {
        sum_f: 0,
        sum_bf: 0,
        affine_fib: 0,
        affine_binom: 0,
    };
    for w in 2..=m + 2 {
        let f = fibonacci(w + 1);
        out.sum_f += f;
        out.sum_bf += w as i128 * f;
        out.affine_fib += f * (a * w as i128 + b);
    }
    for w in 0..=m {
        out.affine_binom += binomial(m, w) * (a * w as i128 + b);
    }
    out
}
