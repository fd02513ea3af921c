//! Seeded, parallel Monte Carlo estimation of the moments of contraction
//! η_p(T, D, ν), with collision accounting, numerical-DPI bookkeeping and
//! exact-denominator shortcuts for pure-vs-maximally-mixed pairs.

use crate::channels::Channel;
use crate::divergences::{DivValue, Divergence};
use crate::ensembles::{EnsembleSpec, PairDistribution, SeedSpec};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, mean_stderr};

/// Ratios above 1 by more than this are counted as numerical DPI violations;
/// anything smaller is floating-point noise and silently clamped.
pub const DPI_CLAMP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenominatorMode {
    Sampled,
    ExactWhenAvailable,
}

/// One estimation request: channel, divergence, pair distribution, the list
/// of moment orders, sample budget and seed.
#[derive(Clone, Debug)]
pub struct MomentRequest {
    pub channel: Channel,
    pub divergence: Divergence,
    pub pairs: PairDistribution,
    pub p_list: Vec<f64>,
    pub n_samples: usize,
    pub seed: SeedSpec,
    pub denominator_mode: DenominatorMode,
}

/// A finished estimate of η_p for one p.
#[derive(Clone, Debug)]
pub struct MomentEstimate {
    pub p: f64,
    /// Mean of ratio^p.
    pub mean_ratio_p: f64,
    /// η_p = mean^{1/p}.
    pub eta_p: f64,
    /// Delta-method standard error of η_p.
    pub stderr: f64,
    pub n_used: usize,
    pub n_skipped_denominator: usize,
    pub n_collisions: usize,
    pub n_dpi_violations: usize,
}

#[derive(Clone, Copy, Debug)]
enum SampleOutcome {
    Ratio { value: f64, dpi_violation: bool },
    SkippedDenominator,
    SkippedCollision,
}

/// Estimate η_p for every p in the request. The per-sample ratio is computed
/// once and reused across the p list; samples whose denominator is 0 or +∞
/// are skipped and counted.
pub fn estimate_moments(req: &MomentRequest) -> Result<Vec<MomentEstimate>> {
    if req.n_samples == 0 {
        return Err(Error::Domain("n_samples must be >= 1".into()));
    }
    if req.p_list.is_empty() || req.p_list.iter().any(|&p| p < 1.0 || !p.is_finite()) {
        return Err(Error::Domain("moment orders must satisfy p >= 1".into()));
    }
    if req.pairs.dim() != req.channel.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "pair distribution dim {} vs channel input dim {}",
            req.pairs.dim(),
            req.channel.d_in()
        )));
    }

    let exact_den = match req.denominator_mode {
        DenominatorMode::ExactWhenAvailable => denominator_exact(&req.pairs, &req.divergence),
        DenominatorMode::Sampled => None,
    };

    let outcomes: Vec<SampleOutcome> = map_indexed(req.n_samples, |i| {
        sample_ratio(req, exact_den, i as u64)
    });

    let mut ratios = Vec::with_capacity(req.n_samples);
    let mut n_skipped_denominator = 0;
    let mut n_collisions = 0;
    let mut n_dpi_violations = 0;
    for o in &outcomes {
        match o {
            SampleOutcome::Ratio { value, dpi_violation } => {
                ratios.push(*value);
                if *dpi_violation {
                    n_dpi_violations += 1;
                }
            }
            SampleOutcome::SkippedDenominator => n_skipped_denominator += 1,
            SampleOutcome::SkippedCollision => n_collisions += 1,
        }
    }
    if ratios.is_empty() {
        return Err(Error::EmptyEstimate(req.n_samples));
    }

    let n_used = ratios.len();
    let mut estimates = Vec::with_capacity(req.p_list.len());
    for &p in &req.p_list {
        let powers: Vec<f64> = if (p - 1.0).abs() < 1e-15 {
            ratios.clone()
        } else {
            ratios.iter().map(|&r| r.powf(p)).collect()
        };
        let (mean, se_mean) = mean_stderr(&powers);
        let eta_p = if mean > 0.0 { mean.powf(1.0 / p) } else { 0.0 };
        // delta method for the 1/p-th root
        let stderr = if mean > 0.0 {
            se_mean * mean.powf(1.0 / p - 1.0) / p
        } else {
            se_mean
        };
        estimates.push(MomentEstimate {
            p,
            mean_ratio_p: mean,
            eta_p,
            stderr,
            n_used,
            n_skipped_denominator,
            n_collisions,
            n_dpi_violations,
        });
    }
    Ok(estimates)
}

fn sample_ratio(
    req: &MomentRequest,
    exact_den: Option<f64>,
    index: u64,
) -> SampleOutcome {
    let mut rng = req.seed.stream(index);
    let pair = req.pairs.sample(&mut rng);
    if pair.collided {
        return SampleOutcome::SkippedCollision;
    }
    let den = match exact_den {
        Some(v) => DivValue::Finite(v),
        None => match req.divergence.evaluate(&pair.rho, &pair.sigma) {
            Ok(v) => v,
            Err(_) => return SampleOutcome::SkippedDenominator,
        },
    };
    let den = match den {
        DivValue::Finite(v) if v > 0.0 => v,
        _ => return SampleOutcome::SkippedDenominator,
    };
    let out_rho = match req.channel.apply(&pair.rho) {
        Ok(v) => v,
        Err(_) => return SampleOutcome::SkippedDenominator,
    };
    let out_sigma = match req.channel.apply(&pair.sigma) {
        Ok(v) => v,
        Err(_) => return SampleOutcome::SkippedDenominator,
    };
    let num = match req.divergence.evaluate(&out_rho, &out_sigma) {
        Ok(DivValue::Finite(v)) => v.max(0.0),
        // an infinite numerator over a finite denominator is a numerical
        // support artifact; record it as a DPI violation and drop the sample
        Ok(DivValue::Infinite) => {
            return SampleOutcome::Ratio { value: 1.0, dpi_violation: true };
        }
        Err(_) => return SampleOutcome::SkippedDenominator,
    };
    let raw = num / den;
    let dpi_violation = raw > 1.0 + DPI_CLAMP_TOL;
    SampleOutcome::Ratio { value: raw.clamp(0.0, 1.0), dpi_violation }
}

/// Analytic denominator for (HaarPure vs I/d) pairs, when one exists:
/// 1 − 1/d for the trace distance, ln d for relative and max relative
/// entropy, f(d)/d + (1 − 1/d) f(0) for finite-f(0) f-divergences (and its
/// χ² instance d − 1), max(1 − γ/d, 0) for the hockey-stick.
pub fn denominator_exact(pairs: &PairDistribution, divergence: &Divergence) -> Option<f64> {
    let d = match pairs {
        PairDistribution::VsMaximallyMixed { ensemble: EnsembleSpec::HaarPure { dim } } => {
            *dim as f64
        }
        _ => return None,
    };
    match divergence {
        Divergence::TraceDistance => Some(1.0 - 1.0 / d),
        Divergence::RelativeEntropy | Divergence::MaxRelativeEntropy => Some(d.ln()),
        Divergence::ChiSquaredClosed => Some(d - 1.0),
        Divergence::HockeyStick { gamma } => Some((1.0 - gamma / d).max(0.0)),
        Divergence::FIntegral { spec, .. } => {
            let f0 = spec.f0.finite()?;
            Some(spec.f(d) / d + (1.0 - 1.0 / d) * f0)
        }
    }
}

/// Monte Carlo estimate of E[‖T(ρ)−T(σ)‖₂² / ‖ρ−σ‖₂²] over the induced
/// measure with rank parameter r, next to its analytic target
/// (d/(d²−1))·[d·Trτ² − Trπ²].
#[derive(Clone, Debug)]
pub struct SecondMomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub exact: f64,
    pub n_samples: usize,
}

pub fn estimate_2norm_second_moment(
    channel: &Channel,
    d: usize,
    rank: usize,
    n_samples: usize,
    seed: SeedSpec,
) -> Result<SecondMomentEstimate> {
    if channel.d_in() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel input dim {} vs requested d {}",
            channel.d_in(),
            d
        )));
    }
    let ens = EnsembleSpec::InducedMixed { dim: d, rank };
    let ratios: Vec<f64> = map_indexed(n_samples, |i| {
        let mut rng = seed.stream(i as u64);
        let rho = ens.sample(&mut rng);
        let sigma = ens.sample(&mut rng);
        let den = (rho.matrix() - sigma.matrix()).frobenius_norm();
        if den <= 1e-12 {
            return f64::NAN;
        }
        let num = (channel.apply(&rho).unwrap().matrix()
            - channel.apply(&sigma).unwrap().matrix())
        .frobenius_norm();
        (num / den) * (num / den)
    })
    .into_iter()
    .filter(|x| x.is_finite())
    .collect();
    if ratios.is_empty() {
        return Err(Error::EmptyEstimate(n_samples));
    }
    let (mean, stderr) = mean_stderr(&ratios);
    let (tr_tau2, tr_pi2) = channel.purity_pair()?;
    let df = d as f64;
    let exact = df / (df * df - 1.0) * (df * tr_tau2 - tr_pi2);
    Ok(SecondMomentEstimate { mean, stderr, exact, n_samples: ratios.len() })
}
