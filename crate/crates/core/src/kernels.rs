//! Radial kernel profiles φ and the multiscale kernels built from them.
//!
//! A smooth profile is written φ(x) = g(|x|²). With u = x/t the dilates are
//! φ_t(x) = t^{-n} g(|u|²). The operator θ = t∂_t acts on t^{-n} H(|x|²/t²)
//! as t^{-n} (L H) with L H = −n H − 2 s H'(s), so
//! t^k ∂_t^k = θ(θ−1)⋯(θ−k+1) is evaluated exactly by expanding
//! (L)(L−1)⋯(L−k+1) g into Σ_m P_m(s) g^{(m)}(s) with polynomial P_m.

use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use core::fmt;
use core::str::FromStr;


use crate::error::{invalid, Error, Result};
use crate::quadrature::{graded_breaks, GaussLegendre};

pub const MAX_DERIVATIVE_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    /// φ(x) = exp(−|x|^{2N})
    GaussianPower { power: u32 },
    /// φ(x) = (1 + |x|²)^{−a}
    InversePower { a: f64 },
    /// φ_r = r^{−n} χ_{B(0,r)}, closed ball
    HardIndicator,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelFamily::GaussianPower { power } => write!(f, "gauss:N={power}"),
            KernelFamily::InversePower { a } => write!(f, "invpow:a={a}"),
            KernelFamily::HardIndicator => write!(f, "hard"),
        }
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    /// Parses `gauss:N=<int>`, `invpow:a=<real>` or `hard`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "hard" {
            return Ok(KernelFamily::HardIndicator);
        }
        let (name, arg) = s
            .split_once(':')
            .ok_or_else(|| invalid("kernel must be `gauss:N=<int>`, `invpow:a=<real>` or `hard`"))?;
        let (key, value) = arg
            .split_once('=')
            .ok_or_else(|| invalid("kernel parameter must be written key=value"))?;
        match (name, key) {
            ("gauss", "N") => {
                let power: i64 = value
                    .parse()
                    .map_err(|_| invalid("gauss kernel needs N∈N, N≥1 (an integer)"))?;
                if power < 1 {
                    return Err(invalid("gauss kernel needs N∈N, N≥1"));
                }
                Ok(KernelFamily::GaussianPower { power: power as u32 })
            }
            ("invpow", "a") => {
                let a: f64 = value.parse().map_err(|_| invalid("invpow kernel needs a real a > n/2"))?;
                if !a.is_finite() || a <= 0.0 {
                    return Err(invalid("invpow kernel needs a real a > n/2"));
                }
                Ok(KernelFamily::InversePower { a })
            }
            _ => Err(invalid("unknown kernel; expected gauss:N=<int>, invpow:a=<real> or hard")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    n: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("target dimension must be positive"));
        }
        match family {
            KernelFamily::GaussianPower { power } if power == 0 => {
                Err(invalid("gauss kernel needs N∈N, N≥1"))
            }
            KernelFamily::InversePower { a } if !(a > n as f64 / 2.0) => {
                Err(invalid(alloc::format!("invpow kernel needs a > n/2 = {}", n as f64 / 2.0)))
            }
            _ => Ok(KernelSpec { family, n }),
        }
    }

    pub fn parse(s: &str, n: usize) -> Result<Self> {
        Self::new(s.parse()?, n)
    }

    pub fn gaussian(power: u32, n: usize) -> Result<Self> {
        Self::new(KernelFamily::GaussianPower { power }, n)
    }

    pub fn inverse_power(a: f64, n: usize) -> Result<Self> {
        Self::new(KernelFamily::InversePower { a }, n)
    }

    pub fn hard(n: usize) -> Self {
        KernelSpec { family: KernelFamily::HardIndicator, n }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn target_dim(&self) -> usize {
        self.n
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self.family, KernelFamily::HardIndicator)
    }

    /// Radius beyond which smooth sums are truncated, in units of t.
    pub fn truncation_factor(&self) -> f64 {
        match self.family {
            KernelFamily::GaussianPower { .. } => 12.0,
            KernelFamily::InversePower { .. } => 1.0e3,
            KernelFamily::HardIndicator => 1.0,
        }
    }

    /// Radius m (in units of t) with ∫_{|u|>m} φ ≤ tol·∫φ, from the bounds
    /// e^{-m^{2N}} for the Gaussian family and m^{n-2a}/(2a-n) against
    /// ∫_{|u|≤1} φ ≥ 2^{-a}/n for the inverse power.
    pub fn tail_radius(&self, tol: f64) -> f64 {
        let n = self.n as f64;
        match self.family {
            KernelFamily::GaussianPower { power } => (1.0 / tol).ln().max(0.0).powf(0.5 / power as f64),
            KernelFamily::InversePower { a } => {
                ((2.0 * a - n) * tol * 2f64.powf(-a) / n).powf(1.0 / (n - 2.0 * a))
            }
            KernelFamily::HardIndicator => 1.0,
        }
    }

    /// g(s) for the smooth profiles (φ(x) = g(|x|²)); for the hard
    /// indicator the closed-ball indicator of s ≤ 1.
    pub fn profile(&self, s: f64) -> f64 {
        match self.family {
            KernelFamily::GaussianPower { power } => (-s.powi(power as i32)).exp(),
            KernelFamily::InversePower { a } => (1.0 + s).powf(-a),
            KernelFamily::HardIndicator => {
                if s <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// φ_t at a point with |x|² = `r2`.
    pub fn phi_t_r2(&self, r2: f64, t: f64) -> f64 {
        let n = self.n as i32;
        match self.family {
            KernelFamily::HardIndicator => {
                if r2 <= t * t {
                    t.powi(-n)
                } else {
                    0.0
                }
            }
            _ => t.powi(-n) * self.profile(r2 / (t * t)),
        }
    }

    fn require_smooth(&self) -> Result<()> {
        if self.is_smooth() {
            Ok(())
        } else {
            Err(Error::UnsupportedKernel("the hard indicator has no t-derivative".to_string()))
        }
    }

    /// g^{(m)}(s), m ≥ 0.
    fn profile_derivative(&self, m: usize, s: f64) -> f64 {
        match self.family {
            KernelFamily::GaussianPower { power } => {
                let q = gaussian_power_derivative_poly(power, m);
                eval_poly(&q, s) * (-s.powi(power as i32)).exp()
            }
            KernelFamily::InversePower { a } => {
                let c: f64 = (0..m).map(|i| -a - i as f64).product();
                c * (1.0 + s).powf(-a - m as f64)
            }
            KernelFamily::HardIndicator => f64::NAN,
        }
    }

    /// t^k ∂_t^k φ_t at |x|² = r2, via the polynomial expansion.
    pub fn dk_phi_r2(&self, r2: f64, t: f64, k: usize) -> Result<f64> {
        self.require_smooth()?;
        if k == 0 {
            return Ok(self.phi_t_r2(r2, t));
        }
        if k > MAX_DERIVATIVE_ORDER {
            return Err(invalid(alloc::format!("derivative order must be in 1..={MAX_DERIVATIVE_ORDER}")));
        }
        let s = r2 / (t * t);
        let expansion = theta_expansion(self.n, k);
        let value: f64 = expansion
            .iter()
            .enumerate()
            .map(|(m, p)| if p.is_empty() { 0.0 } else { eval_poly(p, s) * self.profile_derivative(m, s) })
            .sum();
        Ok(t.powi(-(self.n as i32)) * value)
    }

    /// Σ_{i=0..k} (−1)^i C(k,i) φ_{2^i t} at |x|² = r2.
    pub fn difference_kernel_r2(&self, r2: f64, t: f64, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(invalid("difference order must be at least 1"));
        }
        if !self.is_smooth() && k != 1 {
            return Err(Error::UnsupportedKernel("the hard indicator supports only first differences".to_string()));
        }
        let mut acc = 0.0;
        let mut binom = 1.0;
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * self.phi_t_r2(r2, t * (1u64 << i) as f64);
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        Ok(acc)
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("scale t must be positive"));
    }
    Ok(())
}

/// φ_t(x) = t^{−n} φ(x/t).
pub fn phi_t(spec: &KernelSpec, x: &[f64], t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(spec.phi_t_r2(norm2(x), t))
}

/// ∂_φ(x,t) = t ∂_t φ_t(x).
pub fn d_phi(spec: &KernelSpec, x: &[f64], t: f64) -> Result<f64> {
    check_t(t)?;
    spec.dk_phi_r2(norm2(x), t, 1)
}

/// t^k ∂_t^k φ_t(x), 1 ≤ k ≤ 4.
pub fn dk_phi(spec: &KernelSpec, x: &[f64], t: f64, k: usize) -> Result<f64> {
    check_t(t)?;
    if k == 0 || k > MAX_DERIVATIVE_ORDER {
        return Err(invalid(alloc::format!("derivative order must be in 1..={MAX_DERIVATIVE_ORDER}")));
    }
    spec.dk_phi_r2(norm2(x), t, k)
}

/// D^k[φ_t](x) with D φ_t = φ_t − φ_{2t}.
pub fn discrete_difference_kernel(spec: &KernelSpec, x: &[f64], t: f64, k: usize) -> Result<f64> {
    check_t(t)?;
    spec.difference_kernel_r2(norm2(x), t, k)
}

/// φ̃_R(s) = 2 s^{n+1} / R^{n+2} · exp(−s²/R²).
pub fn convex_weight(radius: f64, s: f64, n: usize) -> f64 {
    let u = s / radius;
    2.0 * u.powi(n as i32 + 1) * (-u * u).exp() / radius
}

fn eval_poly(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect()
}

fn poly_add_scaled(target: &mut Vec<f64>, p: &[f64], scale: f64, shift: usize) {
    if target.len() < p.len() + shift {
        target.resize(p.len() + shift, 0.0);
    }
    for (i, c) in p.iter().enumerate() {
        target[i + shift] += scale * c;
    }
}

/// Q_m with g^{(m)}(s) = Q_m(s) e^{−s^N}: Q_{m+1} = Q_m' − N s^{N−1} Q_m.
fn gaussian_power_derivative_poly(power: u32, m: usize) -> Vec<f64> {
    let mut q = alloc::vec![1.0];
    for _ in 0..m {
        let mut next = poly_derivative(&q);
        poly_add_scaled(&mut next, &q, -(power as f64), power as usize - 1);
        q = next;
    }
    q
}

/// Coefficients P_m of (L)(L−1)⋯(L−k+1) g = Σ_m P_m(s) g^{(m)}(s),
/// where L H = −n H − 2 s H'.
fn theta_expansion(n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut terms: Vec<Vec<f64>> = alloc::vec![alloc::vec![1.0]];
    for i in 0..k {
        let mut next: Vec<Vec<f64>> = alloc::vec![Vec::new(); terms.len() + 1];
        for (m, p) in terms.iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            // (−n − i) P_m g^{(m)}
            poly_add_scaled(&mut next[m], p, -(n as f64) - i as f64, 0);
            // −2 s (P_m' g^{(m)} + P_m g^{(m+1)})
            poly_add_scaled(&mut next[m], &poly_derivative(p), -2.0, 1);
            poly_add_scaled(&mut next[m + 1], p, -2.0, 1);
        }
        terms = next;
    }
    terms
}

/// How the integrals over R^n in [`plane_annihilation_defect`] are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureSpec {
    /// Tensor Gauss–Legendre on [−T, T]^n with panels graded towards the
    /// origin. `truncation` is T in units of the largest dilation appearing
    /// in the integrand divided by two for differences (so T = 10t for a
    /// first difference of the Gaussian), or in units of t for derivatives.
    /// `None` picks 10 for Gaussian powers and 100 for inverse powers. The
    /// neglected tail is exp(−(T/2^k t)^{2N}) scale for Gaussians and
    /// ~(t/T)^{2a−n} for inverse powers.
    Tensor { truncation: Option<f64>, order: usize },
    /// Radial integration over all of R^n: graded panels on [0, R0] plus the
    /// tail [R0, ∞) mapped onto (0, 1] by ρ = R0/u. No truncation error.
    Radial { order: usize },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::Tensor { truncation: None, order: 16 }
    }
}

/// Surface area of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * core::f64::consts::PI.powf(h) / libm::tgamma(h)
}

/// max(|∫_{R^n} D^k[φ_t]|, |∫_{R^n} t^k∂_t^kφ_t|) for a smooth profile (the
/// second term only when k ≤ 4), or |∫ D φ_t| for the hard indicator.
/// Both integrals vanish identically, which is what makes every square
/// function zero on flat measures.
pub fn plane_annihilation_defect(spec: &KernelSpec, t: f64, k: usize, quad: QuadratureSpec) -> Result<f64> {
    check_t(t)?;
    let n = spec.target_dim();
    if !spec.is_smooth() {
        if k != 1 {
            return Err(Error::UnsupportedKernel("the hard indicator supports only first differences".to_string()));
        }
        // radial integration with the jumps at t and 2t as panel breaks is
        // exact for the piecewise polynomial integrand
        let rule = GaussLegendre::new(order_of(quad));
        let breaks = [0.0, t, 2.0 * t, 3.0 * t];
        let radial = rule.integrate_panels(&breaks, |rho| {
            rho.powi(n as i32 - 1) * spec.difference_kernel_r2(rho * rho, t, 1).unwrap_or(0.0)
        });
        return Ok((sphere_area(n) * radial).abs());
    }
    let largest = t * (1u64 << k) as f64;
    let diff = integrate_radial_function(n, quad, spec, largest / 2.0, t, |r2| {
        spec.difference_kernel_r2(r2, t, k).unwrap_or(f64::NAN)
    });
    let mut defect = diff.abs();
    if k <= MAX_DERIVATIVE_ORDER {
        let deriv = integrate_radial_function(n, quad, spec, t, t, |r2| spec.dk_phi_r2(r2, t, k).unwrap_or(f64::NAN));
        defect = defect.max(deriv.abs());
    }
    Ok(defect)
}

fn order_of(quad: QuadratureSpec) -> usize {
    match quad {
        QuadratureSpec::Tensor { order, .. } | QuadratureSpec::Radial { order } => order,
    }
}

fn integrate_radial_function<F: Fn(f64) -> f64>(
    n: usize,
    quad: QuadratureSpec,
    spec: &KernelSpec,
    unit: f64,
    t: f64,
    f: F,
) -> f64 {
    match quad {
        QuadratureSpec::Tensor { truncation, order } => {
            let factor = truncation.unwrap_or(match spec.family() {
                KernelFamily::InversePower { .. } => 100.0,
                _ => 10.0,
            });
            let half = factor * unit;
            let rule = GaussLegendre::new(order);
            let positive = graded_breaks(0.125 * t, 1.5, half);
            let mut axis: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
            axis.extend_from_slice(&positive[1..]);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for w in axis.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (mid, hw) = (0.5 * (a + b), 0.5 * (b - a));
                for (x, wt) in rule.nodes().iter().zip(rule.weights()) {
                    nodes.push(mid + hw * x);
                    weights.push(wt * hw);
                }
            }
            tensor_sum(n, &nodes, &weights, &f)
        }
        QuadratureSpec::Radial { order } => {
            let rule = GaussLegendre::new(order);
            let r0 = 8.0 * unit;
            let inner = graded_breaks(0.125 * t, 1.5, r0);
            let body = rule.integrate_panels(&inner, |rho| rho.powi(n as i32 - 1) * f(rho * rho));
            let tail_breaks = graded_breaks(1e-4, 1.5, 1.0);
            let tail = rule.integrate_panels(&tail_breaks, |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                let rho = r0 / u;
                rho.powi(n as i32 - 1) * f(rho * rho) * r0 / (u * u)
            });
            sphere_area(n) * (body + tail)
        }
    }
}

fn tensor_sum<F: Fn(f64) -> f64>(n: usize, nodes: &[f64], weights: &[f64], f: &F) -> f64 {
    let m = nodes.len();
    let total = m.pow(n as u32);
    let mut acc = 0.0;
    let mut idx = alloc::vec![0usize; n];
    for _ in 0..total {
        let mut r2 = 0.0;
        let mut w = 1.0;
        for &i in &idx {
            r2 += nodes[i] * nodes[i];
            w *= weights[i];
        }
        acc += w * f(r2);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    acc
}
