//! The experimental commands behind the CLI: sweeps, bound reports, circuit
//! studies, phase diagrams, LDP audits and the selftest. All emitters are
//! deterministic functions of (config bytes, seed).

use std::fmt::Write as _;

use serde_json::json;

use crate::bounds::{self, CircuitNoise};
use crate::channels::{Channel, choi_functionals};
use crate::circuits;
use crate::config::{
    BoundsConfig, CircuitConfigFile, LdpConfig, PhaseDiagramConfig, SweepConfig,
    parse_divergence,
};
use crate::divergences::DivValue;
use crate::ensembles::SeedSpec;
use crate::error::{Error, Result};
use crate::estimator::{MomentRequest, estimate_moments};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a 64-bit hash of the raw config bytes, for the CSV provenance header.
pub fn config_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn csv_header(out: &mut String, config_bytes: &[u8], seed: u64) {
    let _ = writeln!(out, "# contractio {TOOL_VERSION}");
    let _ = writeln!(out, "# config_hash: {:016x}", config_hash(config_bytes));
    let _ = writeln!(out, "# seed: {seed}");
}

/// Parameter sweep over (param, n) cells; one CSV row per (param, n, p).
pub fn cmd_sweep(config_bytes: &[u8], seed_override: Option<u64>) -> Result<String> {
    let mut cfg: SweepConfig = serde_json::from_slice(config_bytes)?;
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    let divergence = parse_divergence(&cfg.divergence)?;
    let params = cfg.param_grid.values()?;
    let denominator_mode = cfg.denominator_mode()?;

    let mut out = String::new();
    csv_header(&mut out, config_bytes, cfg.seed);
    let _ = writeln!(
        out,
        "channel_family,param_value,n,divergence,p,eta_p,stderr,n_samples,seed"
    );

    let mut task = 0u64;
    for &param in &params {
        for &n in &cfg.n_list {
            task += 1;
            let channel = cfg.channel_at(param, n)?;
            let pairs = cfg.pair_distribution(channel.d_in())?;
            let n_samples = cfg.samples_for(n);
            let req = MomentRequest {
                channel,
                divergence: divergence.clone(),
                pairs,
                p_list: cfg.p_moments.clone(),
                n_samples,
                seed: SeedSpec::with_task(cfg.seed, task),
                denominator_mode,
            };
            let estimates = estimate_moments(&req)?;
            for est in estimates {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    cfg.channel_family,
                    param,
                    n,
                    cfg.divergence,
                    est.p,
                    est.eta_p,
                    est.stderr,
                    est.n_used,
                    cfg.seed
                );
            }
        }
    }
    Ok(out)
}

/// Every applicable analytic bound for the configured channel, as JSON.
pub fn cmd_bounds(config_bytes: &[u8]) -> Result<String> {
    let cfg: BoundsConfig = serde_json::from_slice(config_bytes)?;
    let ch = cfg.channel.build_single()?;
    let n = cfg.tensor_n.unwrap_or(1);
    let f = choi_functionals(&ch)?;

    let mut reports = vec![
        bounds::hs_upper(&ch)?,
        bounds::hs_dim_reduction(&ch)?,
        bounds::hs_second_moment(&ch)?,
        bounds::design2_upper(&ch)?,
        bounds::design2_vs_mixed(&ch)?,
    ];
    if ch.d_in() == ch.d_out() {
        reports.push(bounds::hs_upper_product(&ch, n)?);
        reports.push(bounds::hs_upper_product_simplified(&ch, n)?);
        reports.push(bounds::design2_upper_product(&ch, n)?);
        reports.push(bounds::design2_upper_product_simplified(&ch, n)?);
        reports.push(bounds::design2_vs_mixed_product(&ch, n)?);
        reports.push(bounds::typicality_lower(&ch, n, cfg.epsilon, cfg.delta)?);
        reports.push(bounds::chi2_unital_avg(&ch)?);
        if let Some(depth) = cfg.depth {
            let nq = cfg.n_qubits.unwrap_or(n);
            reports.push(bounds::circuit_lower(
                &CircuitNoise::Local(&ch),
                nq,
                depth,
                cfg.epsilon,
                cfg.delta,
            )?);
        }
    }

    let mut extras = serde_json::Map::new();
    match cfg.channel.family.as_deref() {
        Some("depolarizing") => {
            extras.insert("depolarizing_thresholds".into(), json!(bounds::depol_thresholds()));
        }
        Some("amplitude_damping") => {
            extras.insert(
                "amplitude_damping_thresholds".into(),
                json!(bounds::amplitude_damping_thresholds()),
            );
        }
        Some("partial_trace") => {
            if let Some(params) = &cfg.channel.params {
                let nq = params.get("n_qubits").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
                let m = params.get("discard").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
                extras.insert(
                    "partial_trace_verdict".into(),
                    json!(bounds::partial_trace_verdict(nq, m)?),
                );
            }
        }
        _ => {}
    }

    let verdict = bounds::typicality_verdict(&f);
    let doc = json!({
        "tool": format!("contractio {TOOL_VERSION}"),
        "config_hash": format!("{:016x}", config_hash(config_bytes)),
        "channel": ch.label().unwrap_or("unnamed"),
        "d_in": ch.d_in(),
        "d_out": ch.d_out(),
        "choi": {
            "purity": f.purity,
            "entropy_bits": f.entropy_bits,
            "sqrt_trace": f.sqrt_trace,
            "pi_purity": f.pi_purity,
            "pi_infnorm": f.pi_infnorm,
        },
        "typicality_verdict": verdict,
        "reports": reports,
        "extras": extras,
    });
    Ok(format!("{:#}\n", doc))
}

/// Circuit study: CSV of depth, mode, mean, stderr, n_samples.
pub fn cmd_circuit(config_bytes: &[u8], seed_override: Option<u64>) -> Result<String> {
    let mut file: CircuitConfigFile = serde_json::from_slice(config_bytes)?;
    if let Some(s) = seed_override {
        file.seed = s;
    }
    let (config, depths) = file.build()?;
    let rows = circuits::avg_contraction_vs_depth(&config, &depths)?;
    let mut out = String::new();
    csv_header(&mut out, config_bytes, file.seed);
    let _ = writeln!(out, "depth,mode,mean,stderr,n_samples");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.depth,
            row.mode.label(),
            row.mean,
            row.stderr,
            row.n_samples
        );
    }
    Ok(out)
}

/// Analytic phase diagram of the Pauli channel over the (p, q) simplex.
pub fn cmd_phase_diagram(config_bytes: &[u8]) -> Result<String> {
    let cfg: PhaseDiagramConfig = serde_json::from_slice(config_bytes)?;
    if cfg.resolution < 2 {
        return Err(Error::Config("resolution must be >= 2".into()));
    }
    let mut out = String::new();
    csv_header(&mut out, config_bytes, 0);
    let _ = writeln!(out, "p,q,region");
    let m = cfg.resolution - 1;
    for i in 0..cfg.resolution {
        let p = i as f64 / m as f64;
        for j in 0..cfg.resolution {
            let q = j as f64 / m as f64;
            if p + q > 1.0 + 1e-12 {
                continue;
            }
            let label = match bounds::pauli_region(p, q.min(1.0 - p))? {
                bounds::Verdict::ToOne => "to_one",
                bounds::Verdict::ToZero => "to_zero",
                _ => "undetermined",
            };
            let _ = writeln!(out, "{p},{q},{label}");
        }
    }
    Ok(out)
}

/// LDP audit: epsilon estimate, purity check, contraction bound, minimum
/// depolarizing noise and optional classifier limits, as JSON.
pub fn cmd_ldp(config_bytes: &[u8], seed_override: Option<u64>) -> Result<String> {
    let mut cfg: LdpConfig = serde_json::from_slice(config_bytes)?;
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    if cfg.epsilon < 0.0 {
        return Err(Error::Config("epsilon must be >= 0".into()));
    }
    let ch = cfg.channel.build_single()?;
    let eps_est = bounds::ldp_epsilon(&ch, cfg.sample_pairs, SeedSpec::new(cfg.seed))?;
    let (eps_value, eps_status) = match eps_est {
        DivValue::Finite(v) => {
            let status = if v > cfg.epsilon + 1e-9 {
                "certified-violation"
            } else {
                "heuristic-satisfaction"
            };
            (json!(v), status)
        }
        DivValue::Infinite => (json!("infinite"), "certified-violation"),
    };
    let purity_ok = bounds::ldp_choi_purity_check(&ch, cfg.epsilon)?;
    let avc = bounds::ldp_avc_upper(&ch, cfg.epsilon)?;
    let min_noise = cfg
        .n_qubits
        .map(|n| bounds::ldp_min_noise_depolarizing(cfg.epsilon, n))
        .transpose()?;
    let classifier = cfg
        .classifier
        .as_ref()
        .map(|c| bounds::classifier_bounds(&c.p, &c.q, cfg.epsilon))
        .transpose()?;

    let doc = json!({
        "tool": format!("contractio {TOOL_VERSION}"),
        "config_hash": format!("{:016x}", config_hash(config_bytes)),
        "epsilon": cfg.epsilon,
        "epsilon_estimate": eps_value,
        "epsilon_estimate_kind": eps_status,
        "choi_purity_check": purity_ok,
        "avc_upper": avc,
        "min_noise_depolarizing": min_noise,
        "classifier": classifier,
    });
    Ok(format!("{:#}\n", doc))
}

/// One selftest check.
pub struct SelfTestResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Fast invariant suite: linalg anchors, sampler moments, Choi facts,
/// Pinsker, constants and estimator determinism. Designed to finish in well
/// under a minute.
pub fn cmd_selftest(seed: u64) -> Vec<SelfTestResult> {
    use crate::channels::{depolarizing, global_depolarizing, random_channel};
    use crate::divergences::{
        FSpec, f_divergence_integral, max_relative_entropy, reverse_pinsker_coefficient,
        trace_distance,
    };
    use crate::ensembles::{EnsembleSpec, PairDistribution, sample_induced_mixed};
    use crate::estimator::DenominatorMode;
    use crate::linalg::{CMat, eigh, eigvalsh};

    let mut results = Vec::new();
    let mut check = |name: &'static str, pass: bool, detail: String| {
        results.push(SelfTestResult { name, pass, detail });
    };

    // eigendecomposition residual
    {
        let mut r = SeedSpec::new(seed).stream(1);
        let g = crate::testutil::random_ginibre(64, 64, &mut r);
        let a = g.hermitize();
        let dec = eigh(&a).unwrap();
        let res = (&dec.apply(|x| x) - &a).frobenius_norm() / a.frobenius_norm().max(1.0);
        check("linalg-eig-residual", res <= 1e-10, format!("relative residual {res:.3e}"));
    }

    // Schatten norm chain
    {
        let mut r = SeedSpec::new(seed).stream(2);
        let mut ok = true;
        for _ in 0..50 {
            let a = crate::testutil::random_ginibre(6, 6, &mut r);
            let n1 = crate::linalg::schatten_norm(&a, crate::linalg::SchattenP::One);
            let n2 = crate::linalg::schatten_norm(&a, crate::linalg::SchattenP::Two);
            let ni = crate::linalg::schatten_norm(&a, crate::linalg::SchattenP::Inf);
            ok &= ni <= n2 + 1e-10 && n2 <= n1 + 1e-10;
        }
        check("schatten-norm-chain", ok, "‖X‖∞ ≤ ‖X‖₂ ≤ ‖X‖₁ on 50 draws".into());
    }

    // Haar first moment
    {
        let s = SeedSpec::with_task(seed, 3);
        let mut mean = CMat::zeros(2, 2);
        let n = 2000;
        for i in 0..n {
            let mut r = s.stream(i);
            mean = &mean + crate::ensembles::sample_haar_pure(2, &mut r).matrix();
        }
        mean = mean.scale_re(1.0 / n as f64);
        let dist = (&mean - &CMat::identity(2).scale_re(0.5)).frobenius_norm();
        check("haar-1design-mean", dist <= 0.05, format!("deviation {dist:.4}"));
    }

    // induced-measure purity law
    {
        let s = SeedSpec::with_task(seed, 4);
        let n = 2000;
        let purities: Vec<f64> = (0..n)
            .map(|i| {
                let mut r = s.stream(i);
                sample_induced_mixed(2, 2, &mut r).purity()
            })
            .collect();
        let (mean, stderr) = crate::exec::mean_stderr(&purities);
        let target = 0.8;
        check(
            "induced-purity-law",
            (mean - target).abs() <= 4.0 * stderr,
            format!("mean {mean:.4} vs 4/5 (stderr {stderr:.2e})"),
        );
    }

    // Choi facts on random channels
    {
        let mut r = SeedSpec::new(seed).stream(5);
        let mut ok = true;
        let mut worst = String::new();
        for _ in 0..5 {
            let ch = random_channel(3, 2, 2, &mut r);
            let f = choi_functionals(&ch).unwrap();
            let tau = ch.choi();
            let marg = tau.output_marginal().unwrap();
            let d = 3.0;
            let marg_err = (&marg - ch.pi().matrix()).frobenius_norm();
            ok &= marg_err <= 1e-10;
            ok &= f.purity >= f.pi_purity / d - 1e-12 && f.purity <= d * f.pi_purity + 1e-12;
            let pi_sq = ch.pi().matrix().matmul(ch.pi().matrix());
            let m = &f.tr2_choi_sq.scale_re(d) - &pi_sq;
            let min = eigvalsh(&m).unwrap()[0];
            ok &= min >= -1e-10;
            if !ok && worst.is_empty() {
                worst = format!("marginal residual {marg_err:.2e}, min eig {min:.2e}");
            }
        }
        check("choi-facts", ok, if worst.is_empty() { "marginal + purity + PSD facts".into() } else { worst });
    }

    // purity equals mean squared singular value of the transfer matrix
    {
        let mut r = SeedSpec::new(seed).stream(6);
        let mut worst = 0.0f64;
        for _ in 0..3 {
            let ch = random_channel(2, 2, 2, &mut r);
            let f = choi_functionals(&ch).unwrap();
            let m = ch.transfer_matrix();
            let mean_sq = m.frobenius_norm().powi(2) / 4.0;
            worst = worst.max((f.purity - mean_sq).abs());
        }
        check("choi-purity-singvals", worst <= 1e-9, format!("max deviation {worst:.2e}"));
    }

    // constants: alpha must equal 1/(√2 D) with D = 1/4 + 1/π
    {
        let alpha = bounds::alpha();
        let rebuilt = 1.0 / (std::f64::consts::SQRT_2 * bounds::trace_distance_concentration());
        check(
            "constant-alpha",
            (alpha - rebuilt).abs() <= 1e-12,
            format!("alpha {alpha:.12} vs 1/(sqrt2·D) {rebuilt:.12}"),
        );
    }

    // Pinsker both ways on random qubit pairs
    {
        let s = SeedSpec::with_task(seed, 7);
        let specs = [FSpec::x_ln_x(), FSpec::chi_squared(), FSpec::hellinger(0.5).unwrap()];
        let mut ok = true;
        for i in 0..30u64 {
            let mut r = s.stream(i);
            let rho = sample_induced_mixed(2, 2, &mut r);
            let sig = sample_induced_mixed(2, 2, &mut r);
            let td = trace_distance(&rho, &sig);
            let a = max_relative_entropy(&rho, &sig).unwrap().expect_finite();
            let b = max_relative_entropy(&sig, &rho).unwrap().expect_finite();
            for spec in &specs {
                let df = f_divergence_integral(spec, &rho, &sig, 1e-8)
                    .unwrap()
                    .expect_finite();
                ok &= df >= 0.5 * spec.f2_at_1 * td * td - 1e-8;
                ok &= df <= reverse_pinsker_coefficient(spec, a, b) * td + 1e-8;
            }
        }
        check("pinsker-suite", ok, "direct + reverse on 30 pairs × 3 generators".into());
    }

    // exact global-depolarizing contraction
    {
        let req = MomentRequest {
            channel: Channel::Single(global_depolarizing(0.3, 2).unwrap()),
            divergence: crate::divergences::Divergence::TraceDistance,
            pairs: PairDistribution::ProductDistinct {
                ensemble: EnsembleSpec::HaarPure { dim: 4 },
            },
            p_list: vec![1.0],
            n_samples: 100,
            seed: SeedSpec::with_task(seed, 8),
            denominator_mode: DenominatorMode::Sampled,
        };
        let est = &estimate_moments(&req).unwrap()[0];
        check(
            "global-depolarizing-exact",
            (est.eta_p - 0.7).abs() <= 1e-9,
            format!("eta_1 {:.12} vs 0.7", est.eta_p),
        );
    }

    // estimator determinism across thread counts
    {
        let req = MomentRequest {
            channel: Channel::Single(depolarizing(0.4, 2).unwrap()),
            divergence: crate::divergences::Divergence::TraceDistance,
            pairs: PairDistribution::ProductDistinct {
                ensemble: EnsembleSpec::HaarPure { dim: 2 },
            },
            p_list: vec![1.0],
            n_samples: 200,
            seed: SeedSpec::with_task(seed, 9),
            denominator_mode: DenominatorMode::Sampled,
        };
        let a = crate::exec::with_threads(Some(1), || estimate_moments(&req).unwrap());
        let b = crate::exec::with_threads(Some(4), || estimate_moments(&req).unwrap());
        check(
            "estimator-determinism",
            a[0].eta_p.to_bits() == b[0].eta_p.to_bits(),
            format!("eta_1 {:.12} on 1 and 4 threads", a[0].eta_p),
        );
    }

    results
}
