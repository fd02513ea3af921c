//! Divergences: trace distance, hockey-stick, relative entropy, max relative
//! entropy / Thompson, χ² (closed form and integral), and general
//! integral-form f-divergences built from a convex generator.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{CMat, DensityMatrix, SUPPORT_CUTOFF, eigh, eigvalsh};
use crate::quad;

/// A divergence value; +∞ is a distinct marker, never a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivValue {
    Finite(f64),
    Infinite,
}

impl DivValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, DivValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            DivValue::Finite(x) => Some(*x),
            DivValue::Infinite => None,
        }
    }

    pub fn expect_finite(&self) -> f64 {
        self.finite().expect("divergence value is infinite")
    }
}

/// D_Tr(ρ, σ) = ½‖ρ − σ‖₁, via the eigenvalues of the Hermitian difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    assert_eq!(rho.dim(), sigma.dim(), "trace distance needs equal dimensions");
    let diff = rho.matrix() - sigma.matrix();
    let vals = eigvalsh(&diff).expect("difference of states is Hermitian");
    let td = 0.5 * vals.iter().map(|x| x.abs()).sum::<f64>();
    td.clamp(0.0, 1.0)
}

/// Hockey-stick divergence E_γ(ρ‖σ) = Tr(ρ − γσ)₊ for γ > 0.
pub fn hockey_stick(rho: &DensityMatrix, sigma: &DensityMatrix, gamma: f64) -> f64 {
    assert!(gamma > 0.0, "hockey-stick needs gamma > 0");
    assert_eq!(rho.dim(), sigma.dim());
    hockey_stick_raw(rho.matrix(), sigma.matrix(), gamma)
}

fn hockey_stick_raw(rho: &CMat, sigma: &CMat, gamma: f64) -> f64 {
    let diff = rho - &sigma.scale_re(gamma);
    let vals = eigvalsh(&diff).expect("Hermitian difference");
    vals.into_iter().filter(|&x| x > 0.0).sum()
}

struct SupportView {
    /// eigenvalues above the support cutoff
    lambdas: Vec<f64>,
    /// ⟨v_i|ρ|v_i⟩ for support eigenvectors
    overlaps: Vec<f64>,
    /// ρ-mass outside the support of σ
    leak: f64,
    /// V†ρV restricted to the support indices
    rho_in_basis: CMat,
}

/// Diagonalize σ and express ρ in its eigenbasis, splitting on/off support.
fn support_view(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<SupportView> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let dec = eigh(sigma.matrix())?;
    let top = dec.values.iter().cloned().fold(0.0f64, f64::max);
    let cut = SUPPORT_CUTOFF * top.max(f64::MIN_POSITIVE);
    let support: Vec<usize> = (0..dec.values.len())
        .filter(|&i| dec.values[i] > cut)
        .collect();
    let d = rho.dim();
    // W = V† ρ V on support columns
    let mut w = CMat::zeros(support.len(), support.len());
    let mut overlaps = Vec::with_capacity(support.len());
    let rho_m = rho.matrix();
    // precompute ρ·v_i for support vectors
    let cols: Vec<Vec<num_complex::Complex64>> = support
        .iter()
        .map(|&i| rho_m.matvec(&dec.vectors.column(i)))
        .collect();
    for (a, &i) in support.iter().enumerate() {
        let vi = dec.vectors.column(i);
        for (b, col) in cols.iter().enumerate() {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += vi[k].conj() * col[k];
            }
            w[(a, b)] = acc;
        }
        overlaps.push(w[(a, a)].re.max(0.0));
    }
    let on_support: f64 = overlaps.iter().sum();
    let leak = (1.0 - on_support).max(0.0);
    Ok(SupportView {
        lambdas: support.iter().map(|&i| dec.values[i]).collect(),
        overlaps,
        leak,
        rho_in_basis: w,
    })
}

const SUPPORT_LEAK_TOL: f64 = 1e-10;

/// Umegaki relative entropy Tr ρ(ln ρ − ln σ), natural log; +∞ when the
/// support condition supp(ρ) ⊆ supp(σ) fails numerically.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivValue> {
    let view = support_view(rho, sigma)?;
    if view.leak > SUPPORT_LEAK_TOL {
        return Ok(DivValue::Infinite);
    }
    let rho_vals = eigvalsh(rho.matrix())?;
    let s_rho: f64 = rho_vals
        .iter()
        .filter(|&&x| x > 1e-15)
        .map(|&x| x * x.ln())
        .sum();
    let cross: f64 = view
        .lambdas
        .iter()
        .zip(&view.overlaps)
        .map(|(&l, &o)| o * l.ln())
        .sum();
    let val = s_rho - cross;
    Ok(DivValue::Finite(if val > -1e-9 { val.max(0.0) } else { val }))
}

/// D_max(ρ‖σ) = ln λ_max(σ^{-1/2} ρ σ^{-1/2}) on the support of σ;
/// +∞ when ρ has weight outside that support.
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivValue> {
    let view = support_view(rho, sigma)?;
    if view.leak > SUPPORT_LEAK_TOL {
        return Ok(DivValue::Infinite);
    }
    let r = view.lambdas.len();
    let mut m = CMat::zeros(r, r);
    for a in 0..r {
        for b in 0..r {
            m[(a, b)] = view.rho_in_basis[(a, b)]
                / (view.lambdas[a].sqrt() * view.lambdas[b].sqrt());
        }
    }
    let vals = eigvalsh(&m)?;
    let lmax = vals.iter().cloned().fold(0.0f64, f64::max);
    if lmax <= 0.0 {
        return Ok(DivValue::Finite(0.0));
    }
    Ok(DivValue::Finite(lmax.ln().max(0.0)))
}

/// Thompson distance: max of the two max-relative-entropy orders.
pub fn thompson(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivValue> {
    let a = max_relative_entropy(rho, sigma)?;
    let b = max_relative_entropy(sigma, rho)?;
    Ok(match (a, b) {
        (DivValue::Finite(x), DivValue::Finite(y)) => DivValue::Finite(x.max(y)),
        _ => DivValue::Infinite,
    })
}

/// Generator of an f-divergence: a twice differentiable convex f on (0, ∞)
/// with f(1) = 0, plus the data the integral form and the Pinsker-type
/// coefficients need.
#[derive(Clone)]
pub struct FSpec {
    pub name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    f2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// lim_{x→0⁺} f(x); +∞ allowed.
    pub f0: DivValue,
    /// f'(1), used to stabilize coefficients near x = 1.
    pub fprime_at_1: f64,
    /// f''(1).
    pub f2_at_1: f64,
    /// lim_{x→∞} f(x)/x; +∞ means the divergence blows up off-support.
    pub slope_at_inf: DivValue,
}

impl std::fmt::Debug for FSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FSpec({})", self.name)
    }
}

impl FSpec {
    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn f2(&self, x: f64) -> f64 {
        (self.f2)(x)
    }

    /// Convenience evaluation f(d) for integer arguments.
    pub fn f_at(&self, d: usize) -> f64 {
        (self.f)(d as f64)
    }

    /// f(x) = x ln x: relative entropy.
    pub fn x_ln_x() -> Self {
        FSpec {
            name: "xlnx".into(),
            f: Arc::new(|x| x * x.ln()),
            f2: Arc::new(|x| 1.0 / x),
            f0: DivValue::Finite(0.0),
            fprime_at_1: 1.0,
            f2_at_1: 1.0,
            slope_at_inf: DivValue::Infinite,
        }
    }

    /// f(x) = x² − 1: χ² divergence.
    pub fn chi_squared() -> Self {
        FSpec {
            name: "x2".into(),
            f: Arc::new(|x| x * x - 1.0),
            f2: Arc::new(|_| 2.0),
            f0: DivValue::Finite(-1.0),
            fprime_at_1: 2.0,
            f2_at_1: 2.0,
            slope_at_inf: DivValue::Infinite,
        }
    }

    /// Hellinger generator f(x) = (x^α − 1)/(α − 1), α ∈ (0,1)∪(1,∞).
    pub fn hellinger(alpha: f64) -> Result<Self> {
        if alpha <= 0.0 || (alpha - 1.0).abs() < 1e-12 {
            return Err(Error::Domain(format!("hellinger alpha {alpha} invalid")));
        }
        Ok(FSpec {
            name: format!("hellinger:{alpha}"),
            f: Arc::new(move |x| (x.powf(alpha) - 1.0) / (alpha - 1.0)),
            f2: Arc::new(move |x| alpha * x.powf(alpha - 2.0)),
            f0: DivValue::Finite(1.0 / (1.0 - alpha)),
            fprime_at_1: alpha / (alpha - 1.0),
            f2_at_1: alpha,
            slope_at_inf: if alpha > 1.0 {
                DivValue::Infinite
            } else {
                DivValue::Finite(0.0)
            },
        })
    }

    /// f(1) = 0 and sampled convexity on a log grid over (1e-6, 1e6).
    pub fn validate(&self) -> Result<()> {
        if self.f(1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "{}: f(1) = {} is not 0",
                self.name,
                self.f(1.0)
            )));
        }
        for k in 0..=120 {
            let x = 10f64.powf(-6.0 + 0.1 * k as f64);
            if self.f2(x) < -1e-12 {
                return Err(Error::Domain(format!(
                    "{}: f''({x}) = {} < 0",
                    self.name,
                    self.f2(x)
                )));
            }
        }
        Ok(())
    }
}

/// Largest γ at which E_γ is evaluated by eigendecomposition. Beyond it the
/// scale split between ρ and γσ exceeds floating precision and the computed
/// positive part is noise, so the tail uses E frozen at the cap (the
/// approximation error is O(1/GAMMA_CAP), below every tolerance we accept).
const GAMMA_CAP: f64 = 1e9;

/// D_f by the integral formulation: the γ-domain of each term is exactly
/// [1, exp(D_max)] for the matching argument order; when that D_max is
/// infinite the term is mapped to (0, 1] by γ → 1/γ, and the whole
/// divergence is +∞ if additionally lim f(x)/x = ∞.
pub fn f_divergence_integral(
    spec: &FSpec,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<DivValue> {
    let dmax_rs = max_relative_entropy(rho, sigma)?;
    let dmax_sr = max_relative_entropy(sigma, rho)?;
    let half = 0.5 * tol;
    let gamma_lo = GAMMA_CAP.ln();

    let term1 = match dmax_rs {
        DivValue::Finite(a) if a <= gamma_lo => {
            quad_checked(|g| spec.f2(g) * hockey_stick(rho, sigma, g), 1.0, a.exp(), half)?
        }
        _ => {
            if !spec.slope_at_inf.is_finite() {
                return Ok(DivValue::Infinite);
            }
            let lo = match dmax_rs {
                DivValue::Finite(a) => (-a).exp(),
                DivValue::Infinite => 0.0,
            };
            capped_u_integral(
                |u| spec.f2(1.0 / u) / (u * u),
                |g| hockey_stick(rho, sigma, g),
                lo,
                half,
            )?
        }
    };

    let term2 = match dmax_sr {
        DivValue::Finite(b) if b <= gamma_lo => quad_checked(
            |g| spec.f2(1.0 / g) * hockey_stick(sigma, rho, g) / (g * g * g),
            1.0,
            b.exp(),
            half,
        )?,
        _ => {
            let lo = match dmax_sr {
                DivValue::Finite(b) => (-b).exp(),
                DivValue::Infinite => 0.0,
            };
            capped_u_integral(
                |u| u * spec.f2(u),
                |g| hockey_stick(sigma, rho, g),
                lo,
                half,
            )?
        }
    };

    Ok(DivValue::Finite((term1 + term2).max(0.0)))
}

/// ∫_{lo}^{1} kernel(u)·E(1/u) du with the E factor frozen at E(GAMMA_CAP)
/// below u = 1/GAMMA_CAP. E_γ is monotone in γ and converges at rate O(1/γ),
/// so the freeze keeps the result within O(1/GAMMA_CAP) of the true value
/// while all eigendecompositions stay at benign scales.
fn capped_u_integral(
    kernel: impl Fn(f64) -> f64,
    e_of_gamma: impl Fn(f64) -> f64,
    lo: f64,
    tol: f64,
) -> Result<f64> {
    let u_cap = 1.0 / GAMMA_CAP;
    let mut total = 0.0;
    let main_lo = lo.max(u_cap);
    if main_lo < 1.0 {
        total += quad_checked(|u| kernel(u) * e_of_gamma(1.0 / u), main_lo, 1.0, 0.5 * tol)?;
    }
    if lo < u_cap {
        let e_tail = e_of_gamma(GAMMA_CAP).max(0.0);
        if e_tail > 0.0 {
            let t = quad_checked(&kernel, lo, u_cap, 0.5 * tol / e_tail)?;
            total += e_tail * t;
        }
    }
    Ok(total)
}

fn quad_checked(
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    let r = quad::integrate(f, a, b, tol);
    if !r.converged {
        return Err(Error::Quadrature {
            value: r.value,
            achieved: r.error,
            requested: tol,
        });
    }
    Ok(r.value)
}

/// χ² divergence in spectral closed form:
/// Σ_{ij} k(λ_i, λ_j) |⟨v_i|ρ|v_j⟩|² − 1 with k(λ,λ) = 1/λ and
/// k(λ₁,λ₂) = ln(λ₁/λ₂)/(λ₁−λ₂); +∞ when σ is not full rank.
pub fn chi2_closed_form(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivValue> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let dec = eigh(sigma.matrix())?;
    let top = dec.values.iter().cloned().fold(0.0f64, f64::max);
    let cut = SUPPORT_CUTOFF * top.max(f64::MIN_POSITIVE);
    if dec.values.iter().any(|&l| l <= cut) {
        return Ok(DivValue::Infinite);
    }
    let d = rho.dim();
    // overlaps[i][j] = ⟨v_i|ρ|v_j⟩
    let cols: Vec<Vec<num_complex::Complex64>> = (0..d)
        .map(|j| rho.matrix().matvec(&dec.vectors.column(j)))
        .collect();
    let mut total = 0.0;
    for i in 0..d {
        let vi = dec.vectors.column(i);
        for j in 0..d {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += vi[k].conj() * cols[j][k];
            }
            total += chi2_kernel(dec.values[i], dec.values[j]) * acc.norm_sqr();
        }
    }
    Ok(DivValue::Finite((total - 1.0).max(0.0)))
}

/// Continuous extension of ln(λ₁/λ₂)/(λ₁−λ₂); equals 1/λ on the diagonal.
fn chi2_kernel(l1: f64, l2: f64) -> f64 {
    let s = l1 + l2;
    let t = (l1 - l2) / s;
    if t.abs() < 1e-5 {
        // artanh(t)/t = 1 + t²/3 + t⁴/5 + ...
        (2.0 / s) * (1.0 + t * t / 3.0)
    } else {
        (l1 / l2).ln() / (l1 - l2)
    }
}

/// The coefficient of the reverse Pinsker-type bound:
/// f(e^a)/(e^a − 1) + e^b f(e^{-b})/(e^b − 1), evaluated by series near 0.
pub fn reverse_pinsker_coefficient(spec: &FSpec, dmax_rs: f64, dmax_sr: f64) -> f64 {
    assert!(dmax_rs >= 0.0 && dmax_sr >= 0.0);
    let term1 = {
        let x = dmax_rs.exp();
        if x - 1.0 < 1e-8 {
            spec.fprime_at_1 + 0.5 * spec.f2_at_1 * (x - 1.0)
        } else {
            spec.f(x) / (x - 1.0)
        }
    };
    let term2 = {
        let y = dmax_sr.exp();
        if y - 1.0 < 1e-8 {
            -spec.fprime_at_1 + 0.5 * spec.f2_at_1 * (y - 1.0)
        } else {
            y * spec.f(1.0 / y) / (y - 1.0)
        }
    };
    term1 + term2
}

/// K_f(x) = (f(x) + x f(1/x))/(x − 1) for x ≥ 1.
pub fn k_f(spec: &FSpec, x: f64) -> f64 {
    assert!(x >= 1.0);
    reverse_pinsker_coefficient(spec, x.ln(), x.ln())
}

/// Divergence selector used by the estimator and the CLI.
#[derive(Clone, Debug)]
pub enum Divergence {
    TraceDistance,
    HockeyStick { gamma: f64 },
    RelativeEntropy,
    MaxRelativeEntropy,
    ChiSquaredClosed,
    FIntegral { spec: FSpec, tol: f64 },
}

impl Divergence {
    pub fn evaluate(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<DivValue> {
        match self {
            Divergence::TraceDistance => Ok(DivValue::Finite(trace_distance(rho, sigma))),
            Divergence::HockeyStick { gamma } => {
                if *gamma <= 0.0 {
                    return Err(Error::Domain("hockey-stick gamma must be > 0".into()));
                }
                Ok(DivValue::Finite(hockey_stick(rho, sigma, *gamma)))
            }
            Divergence::RelativeEntropy => relative_entropy(rho, sigma),
            Divergence::MaxRelativeEntropy => max_relative_entropy(rho, sigma),
            Divergence::ChiSquaredClosed => chi2_closed_form(rho, sigma),
            Divergence::FIntegral { spec, tol } => f_divergence_integral(spec, rho, sigma, *tol),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Divergence::TraceDistance => "tr".into(),
            Divergence::HockeyStick { gamma } => format!("hs:{gamma}"),
            Divergence::RelativeEntropy => "re".into(),
            Divergence::MaxRelativeEntropy => "maxre".into(),
            Divergence::ChiSquaredClosed => "chi2".into(),
            Divergence::FIntegral { spec, .. } => format!("f:{}", spec.name),
        }
    }
}
