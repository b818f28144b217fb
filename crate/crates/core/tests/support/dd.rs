//! Double-double arithmetic (~106-bit significand) and a finite-difference
//! oracle for mixed derivatives of the squared-exponential kernel.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Multiplication by an exact power of two.
    fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::from_f64(b) * Dd::from_f64(q1);
        let q2 = r.hi / b;
        let r = r - Dd::from_f64(b) * Dd::from_f64(q2);
        let q3 = r.hi / b;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }

    pub fn exp(self) -> Self {
        if self.hi < -700.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from_f64(k)).scale_pow2(-10);
        let mut p = Dd::ONE;
        for i in (1..=14).rev() {
            p = Dd::ONE + (r * p).div_f64(i as f64);
        }
        for _ in 0..10 {
            p = p * p;
        }
        p.scale_pow2(k as i32)
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// σ²·exp(−(x − x' + shift)²/(2ℓ²)) evaluated in double-double.
fn se_dd(sigma_s: f64, ell: f64, diff: Dd, shift: Dd) -> Dd {
    let tau = (diff + shift).div_f64(ell);
    let s2 = Dd::from_f64(sigma_s) * Dd::from_f64(sigma_s);
    s2 * (-(tau * tau).scale_pow2(-1)).exp()
}

/// Tensor-product central difference of order (m, n) with step `h`.
fn central_difference(sigma_s: f64, ell: f64, diff: Dd, m: usize, n: usize, h: f64) -> Dd {
    let mut acc = Dd::ZERO;
    for i in 0..=m {
        for j in 0..=n {
            // ∂/∂x' acts on x − x' with a sign flip, hence the opposite offsets
            let off_x = (m as f64 / 2.0 - i as f64) * h;
            let off_xp = (n as f64 / 2.0 - j as f64) * h;
            let w = binomial(m, i) * binomial(n, j) * if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let shift = Dd::from_f64(off_x) - Dd::from_f64(off_xp);
            acc = acc + Dd::from_f64(w) * se_dd(sigma_s, ell, diff, shift);
        }
    }
    let mut hp = Dd::ONE;
    for _ in 0..m + n {
        hp = hp * Dd::from_f64(h);
    }
    // acc / h^(m+n)
    let q = acc.hi / hp.hi;
    let r = acc - hp * Dd::from_f64(q);
    Dd::from_f64(q) + Dd::from_f64(r.hi / hp.hi)
}

/// ∂^m/∂x^m ∂^n/∂x'^n of the SE kernel by central differences with
/// Richardson extrapolation over `levels` halvings of `h0`. `h0` must be a
/// power of two so every stencil offset is exact.
pub fn se_derivative_fd(
    sigma_s: f64,
    ell: f64,
    m: usize,
    n: usize,
    x: f64,
    xp: f64,
    h0: f64,
    levels: usize,
) -> f64 {
    assert_eq!(h0.log2().fract(), 0.0, "step must be a power of two");
    let (d, e) = two_sum(x, -xp);
    let diff = Dd { hi: d, lo: e };
    let mut table: Vec<Dd> = (0..levels)
        .map(|l| central_difference(sigma_s, ell, diff, m, n, h0 / 2f64.powi(l as i32)))
        .collect();
    // error expansion in even powers of h
    for k in 1..levels {
        let factor = 4f64.powi(k as i32);
        table = table
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]).div_f64(factor - 1.0))
            .collect();
    }
    table[0].to_f64()
}
