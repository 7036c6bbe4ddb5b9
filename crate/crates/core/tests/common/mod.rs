//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use statrs::function::gamma::gamma;

/// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth >= 50 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(&f, a, b, tol, 0)
}

/// `(1/Γ(1−α)) ∫₀^t g'(s)(t−s)^{−α} ds`. The substitution `w = (t−s)^{1−α}`
/// removes the endpoint singularity before quadrature.
pub fn caputo_oracle(dg: impl Fn(f64) -> f64, t: f64, alpha: f64) -> f64 {
    let p = 1.0 - alpha;
    let upper = t.powf(p);
    integrate(|w| dg(t - w.powf(1.0 / p)), 0.0, upper, 1e-12) / (p * gamma(p))
}

/// `(1/Γ(α)) ∫₀^t g(s)(t−s)^{α−1} ds` via `w = (t−s)^α`.
pub fn integral_oracle(g: impl Fn(f64) -> f64, t: f64, alpha: f64) -> f64 {
    let upper = t.powf(alpha);
    integrate(|w| g(t - w.powf(1.0 / alpha)), 0.0, upper, 1e-12) / (alpha * gamma(alpha))
}

/// Caputo derivative of `t^k`: `Γ(k+1)/Γ(k+1−α) t^{k−α}`.
pub fn power_rule(k: f64, alpha: f64, t: f64) -> f64 {
    gamma(k + 1.0) / gamma(k + 1.0 - alpha) * t.powf(k - alpha)
}

/// Richardson-extrapolated central difference of `f` at `x`.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
