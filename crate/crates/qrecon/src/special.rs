//! Special functions used across the crate.

use gauss_quad::GaussLegendre;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

/// Oscillator eigenfunctions ψ_0..=ψ_n_max at `x` (ħ = m = ω = 1).
///
/// Three-term recurrence on the normalized functions; stays finite up to
/// n ~ 1000 for moderate |x|.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n_max >= 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for n in 1..n_max {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
    out
}

pub fn ln_factorial(n: usize) -> f64 {
    // exact summation is fine for the sizes used here
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let v = (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp();
    // binomials below 2^52 are integers; snap away the log round-off
    if v < 4.0e15 {
        v.round()
    } else {
        v
    }
}

/// Normalized Laguerre functions
/// ℓ_j^{(d)}(y) = √(j!/(j+d)!) · y^{d/2} · e^{−y/2} · L_j^{(d)}(y), j = 0..=j_max.
///
/// |ℓ| ≤ 1 for all arguments, so products with large Laguerre polynomials
/// never overflow.
pub fn laguerre_fns(j_max: usize, d: usize, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; j_max + 1];
    let l0 = if y == 0.0 {
        if d == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 * d as f64 * y.ln() - 0.5 * y - 0.5 * ln_factorial(d)).exp()
    };
    out[0] = l0;
    if j_max == 0 {
        return out;
    }
    let df = d as f64;
    out[1] = (1.0 + df - y) * l0 / (1.0 + df).sqrt();
    for j in 1..j_max {
        let jf = j as f64;
        let a = (2.0 * jf + 1.0 + df - y) * out[j];
        let b = (jf * (jf + df)).sqrt() * out[j - 1];
        out[j + 1] = (a - b) / ((jf + 1.0) * (jf + 1.0 + df)).sqrt();
    }
    out
}

/// J_0(x) = (1/π) ∫_0^π cos(x sin t) dt.
///
/// Trapezoidal rule on the periodic integrand converges geometrically once the
/// node count exceeds |x|.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 48 + 2 * x.abs().ceil() as usize;
    let h = PI / n as f64;
    let s: f64 = (0..2 * n).map(|k| (x * (k as f64 * h).sin()).cos()).sum();
    s / (2 * n) as f64
}

/// e^{−|x|} I_0(x), finite for any x.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    let n = 48 + 2 * ax.sqrt().ceil() as usize * 8;
    let h = PI / n as f64;
    let s: f64 = (0..2 * n).map(|k| (ax * ((k as f64 * h).cos() - 1.0)).exp()).sum();
    s / (2 * n) as f64
}

pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0_scaled(x) * x.abs().exp()
}

/// Gauss–Legendre nodes and weights on [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("at least one node"));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter().map(|(x, w)| (mid + half * x, half * w)).unzip()
}

/// Composite Gauss–Legendre rule: `panels` equal panels, `order` nodes each.
pub fn composite_gauss_legendre(order: usize, panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (base_x, base_w) = gauss_legendre(order, -1.0, 1.0);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(order * panels);
    let mut ws = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in base_x.iter().zip(&base_w) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Entropy of a two-outcome distribution with Bloch length `r`: H((1+r)/2, (1−r)/2).
pub fn binary_entropy_bloch(r: f64) -> f64 {
    let p = 0.5 * (1.0 + r);
    let q = 0.5 * (1.0 - r);
    xlnx_neg(p) + xlnx_neg(q)
}

/// −x ln x with the 0 ln 0 = 0 convention.
pub fn xlnx_neg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}
