//! Gauss-Legendre rules mapped onto a circle and the scalar filter they
//! induce.
//!
//! For a disk with center `c` and radius `ρ`, node `t_j ∈ (-1, 1)` maps to
//! `θ_j = (1 + t_j)π` and `z_j = c + ρ e^{iθ_j}`. The filter
//!
//! ```text
//! ψ̃(μ) = ½ Σ_j ω_j (z_j - c) / (z_j - μ)
//! ```
//!
//! is the quadrature image of the indicator of the disk. Its real part is
//! strictly above ½ inside the circle and strictly below ½ outside, for any
//! number of nodes, because each term satisfies
//! `g_j - ½ = (ρ² - r²) / (2 |ρ + r e^{i(θ - φ_j)}|²)` and `Σ ω_j = 2`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 512;

/// Relative distance (in units of `ρ`) below which `μ` is treated as sitting
/// on a node.
pub const NODE_COLLISION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disk {
    center: Complex64,
    radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if !center.re.is_finite() || !center.im.is_finite() {
            return Err(Error::InvalidArgument("center must be finite".into()));
        }
        Ok(Disk { center, radius })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Strictly inside the circle.
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Gauss-Legendre nodes on `[-1, 1]` (strictly increasing) and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// q-point Gauss-Legendre rule by Newton iteration from Chebyshev-like
/// initial guesses, exploiting the symmetry `t_{q+1-j} = -t_j`.
pub fn gauss_legendre(q: usize) -> Result<GaussLegendre> {
    if q == 0 || q > MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "node count must be in 1..={MAX_NODES}, got {q}"
        )));
    }
    if q == 1 {
        return Ok(GaussLegendre {
            nodes: vec![0.0],
            weights: vec![2.0],
        });
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let half = q.div_ceil(2);
    for i in 0..half {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        // refresh the derivative at the converged root
        let (_, d) = legendre_with_derivative(q, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[q - 1 - i] = w;
        weights[i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    Ok(GaussLegendre { nodes, weights })
}

/// A Gauss-Legendre rule mapped onto the boundary of a disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourRule {
    disk: Disk,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    thetas: Vec<f64>,
    points: Vec<Complex64>,
}

impl ContourRule {
    /// Convenience: `gauss_legendre(q)` mapped onto `disk`.
    pub fn new(disk: Disk, q: usize) -> Result<Self> {
        Ok(map_to_circle(&gauss_legendre(q)?, disk))
    }

    pub fn disk(&self) -> Disk {
        self.disk
    }

    pub fn q(&self) -> usize {
        self.nodes.len()
    }

    /// `t_j`
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `ω_j`
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `θ_j = (1 + t_j)π`
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// `z_j = c + ρ e^{iθ_j}`
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Per-node coefficient `½ ω_j (z_j - c)` of the projector sum.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| (z - self.disk.center) * (0.5 * w))
            .collect()
    }

    /// Index of the node mirrored through the real axis about `c`
    /// (`t_{q+1-j} = -t_j`).
    pub fn mirror_index(&self, j: usize) -> usize {
        self.q() - 1 - j
    }
}

pub fn map_to_circle(rule: &GaussLegendre, disk: Disk) -> ContourRule {
    let thetas: Vec<f64> = rule.nodes.iter().map(|&t| (1.0 + t) * PI).collect();
    let points = thetas
        .iter()
        .map(|&th| disk.center + Complex64::from_polar(disk.radius, th))
        .collect();
    ContourRule {
        disk,
        nodes: rule.nodes.clone(),
        weights: rule.weights.clone(),
        thetas,
        points,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterValue {
    pub value: Complex64,
    pub real_part: f64,
    /// `g_j(r, θ)` per node; `real_part = ½ Σ ω_j g_j`.
    pub terms: Vec<f64>,
}

/// Evaluates `ψ̃(μ)` for the rule's disk.
pub fn filter_value(rule: &ContourRule, mu: Complex64) -> Result<FilterValue> {
    let c = rule.disk.center;
    let rho = rule.disk.radius;
    let mut value = Complex64::new(0.0, 0.0);
    for (j, (&z, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let gap = z - mu;
        if gap.norm() <= NODE_COLLISION_TOL * rho {
            return Err(Error::NodeCollision { index: j, mu });
        }
        value += (z - c) / gap * (0.5 * w);
    }
    let d = mu - c;
    let (r, theta) = (d.norm(), d.arg());
    let terms = rule
        .nodes
        .iter()
        .map(|&t| {
            let cs = (t * PI - theta).cos();
            (rho * rho + rho * r * cs) / (rho * rho + r * r + 2.0 * rho * r * cs)
        })
        .collect();
    Ok(FilterValue {
        value,
        real_part: value.re,
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub r: f64,
    pub theta: f64,
    pub re_psi: f64,
}

/// Samples `Re ψ̃(c + r e^{iθ})` on an `n_samples × n_samples` polar grid with
/// `r ∈ [0, r_max]` and `θ ∈ (-π, π]`.
pub fn emit_filter_profile(rule: &ContourRule, r_max: f64, n_samples: usize) -> Result<Vec<ProfileSample>> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let c = rule.disk.center;
    let mut out = Vec::with_capacity(n_samples * n_samples);
    for i in 0..n_samples {
        let r = r_max * i as f64 / (n_samples - 1) as f64;
        for k in 0..n_samples {
            let theta = -PI + 2.0 * PI * (k + 1) as f64 / n_samples as f64;
            let mu = c + Complex64::from_polar(r, theta);
            let re_psi = filter_value(rule, mu)?.real_part;
            out.push(ProfileSample { r, theta, re_psi });
        }
    }
    Ok(out)
}

/// CSV with header `r,theta,re_psi` and 17 significant digits.
pub fn write_profile_csv<W: Write>(mut w: W, samples: &[ProfileSample]) -> std::io::Result<()> {
    writeln!(w, "r,theta,re_psi")?;
    for s in samples {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", s.r, s.theta, s.re_psi)?;
    }
    Ok(())
}
