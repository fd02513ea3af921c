//! Density-matrix simulation of noisy layered circuits: random unitary
//! layers drawn from 1-designs interleaved with unital noise, and the
//! average contraction of the trace distance as a function of depth.

use rand::Rng;

use crate::channels::{KrausChannel, apply_local_kraus};
use crate::divergences::trace_distance;
use crate::ensembles::{SeedSpec, sample_haar_pure_vector, sample_haar_unitary};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, mean_stderr};
use crate::linalg::{C64, CMat, DensityMatrix, ZERO};

/// Desk-scale guard on the qubit count.
pub const MAX_QUBITS: usize = 12;

/// Unitality tolerance on the noise channel: ‖T(I) − I‖_F.
pub const UNITALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerEnsemble {
    /// One Haar-random unitary on all n qubits per layer.
    HaarGlobal,
    /// Independent uniform single-qubit Paulis per site (the cheapest
    /// 1-design).
    RandomPauliLayer,
    /// Alternating even/odd nearest-neighbor Haar 2-qubit gates.
    Brickwork2qHaar,
}

#[derive(Clone, Debug)]
pub enum NoiseModel {
    /// A single-qubit channel applied to every qubit each layer.
    LocalPerQubit(KrausChannel),
    /// An n-qubit channel applied once per layer.
    Global(KrausChannel),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputEnsemble {
    HaarPure,
    ComputationalBasisUniform,
}

#[derive(Clone, Debug)]
pub struct CircuitConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub layer_ensemble: LayerEnsemble,
    pub noise: NoiseModel,
    pub input_ensemble: InputEnsemble,
    pub n_samples: usize,
    pub seed: SeedSpec,
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}"
            )));
        }
        match &self.noise {
            NoiseModel::LocalPerQubit(ch) => {
                if ch.d_in() != 2 || ch.d_out() != 2 {
                    return Err(Error::Config("local noise must be a qubit channel".into()));
                }
                if !ch.is_unital(UNITALITY_TOL) {
                    return Err(Error::Config("noise channel must be unital".into()));
                }
            }
            NoiseModel::Global(ch) => {
                let d = 1usize << self.n_qubits;
                if ch.d_in() != d || ch.d_out() != d {
                    return Err(Error::Config(format!(
                        "global noise must act on dimension {d}"
                    )));
                }
                if !ch.is_unital(UNITALITY_TOL) {
                    return Err(Error::Config("noise channel must be unital".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }
}

fn pauli_gate(which: u8) -> CMat {
    match which {
        0 => CMat::identity(2),
        1 => CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
        2 => {
            let mut m = CMat::zeros(2, 2);
            m[(0, 1)] = C64::new(0.0, -1.0);
            m[(1, 0)] = C64::new(0.0, 1.0);
            m
        }
        _ => CMat::diag_real(&[1.0, -1.0]),
    }
}

/// Apply a k-qubit unitary on adjacent sites [first, first+k) of an n-qubit
/// density matrix, by index reshaping.
fn apply_local_unitary(rho: &CMat, u: &CMat, first: usize, n_qubits: usize) -> CMat {
    // treat the k adjacent qubits as one fused site of dimension 2^k
    let site_dim = u.rows();
    let k = site_dim.trailing_zeros() as usize;
    let pre = 1usize << first;
    let post = 1usize << (n_qubits - first - k);
    debug_assert_eq!(pre * site_dim * post, rho.rows());
    apply_local_kraus_fused(rho, u, pre, site_dim, post)
}

/// Single-Kraus specialization of the site application with explicit
/// (pre, site, post) factorization.
fn apply_local_kraus_fused(rho: &CMat, e: &CMat, pre: usize, site: usize, post: usize) -> CMat {
    let total = rho.rows();
    let mut left = CMat::zeros(total, total);
    for a in 0..pre {
        for sp in 0..site {
            for s in 0..site {
                let esc = e[(sp, s)];
                if esc == ZERO {
                    continue;
                }
                for b in 0..post {
                    let ri = (a * site + sp) * post + b;
                    let si = (a * site + s) * post + b;
                    let src = rho.row(si);
                    let dst = left.row_mut(ri);
                    for j in 0..total {
                        dst[j] += esc * src[j];
                    }
                }
            }
        }
    }
    let mut out = CMat::zeros(total, total);
    for c in 0..pre {
        for tp in 0..site {
            for t in 0..site {
                let esc = e[(tp, t)].conj();
                if esc == ZERO {
                    continue;
                }
                for b in 0..post {
                    let cj = (c * site + tp) * post + b;
                    let sj = (c * site + t) * post + b;
                    for i in 0..total {
                        out[(i, cj)] += left[(i, sj)] * esc;
                    }
                }
            }
        }
    }
    out
}

/// Sample and apply one unitary layer.
fn apply_layer(
    rho: &CMat,
    ensemble: LayerEnsemble,
    layer_index: usize,
    n_qubits: usize,
    rng: &mut impl Rng,
) -> CMat {
    match ensemble {
        LayerEnsemble::HaarGlobal => {
            let u = sample_haar_unitary(1 << n_qubits, rng);
            u.matmul(rho).matmul(&u.adjoint())
        }
        LayerEnsemble::RandomPauliLayer => {
            let mut out = rho.clone();
            for q in 0..n_qubits {
                let which: u8 = rng.random_range(0..4);
                if which == 0 {
                    continue;
                }
                let g = pauli_gate(which);
                out = apply_local_unitary(&out, &g, q, n_qubits);
            }
            out
        }
        LayerEnsemble::Brickwork2qHaar => {
            let mut out = rho.clone();
            let offset = layer_index % 2;
            let mut q = offset;
            while q + 1 < n_qubits {
                let u = sample_haar_unitary(4, rng);
                out = apply_local_unitary(&out, &u, q, n_qubits);
                q += 2;
            }
            out
        }
    }
}

fn apply_noise(rho: &CMat, noise: &NoiseModel, n_qubits: usize) -> CMat {
    match noise {
        NoiseModel::LocalPerQubit(ch) => {
            let mut out = rho.clone();
            for q in 0..n_qubits {
                out = apply_local_kraus(&out, ch.kraus(), q, n_qubits, 2);
            }
            out
        }
        NoiseModel::Global(ch) => ch.apply_raw(rho),
    }
}

/// Run D rounds of (fresh layer unitary, then noise) on ρ₀.
pub fn run_noisy_circuit(
    config: &CircuitConfig,
    rho0: &DensityMatrix,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    config.validate()?;
    if rho0.dim() != config.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs circuit dim {}",
            rho0.dim(),
            config.dim()
        )));
    }
    let mut m = rho0.matrix().clone();
    for layer in 0..config.depth {
        m = apply_layer(&m, config.layer_ensemble, layer, config.n_qubits, rng);
        m = apply_noise(&m, &config.noise, config.n_qubits);
    }
    Ok(DensityMatrix::from_trusted(m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContractionMode {
    /// Ratio between two random inputs sharing the circuit.
    Pair,
    /// Ratio against I/2ⁿ, whose denominator is exactly 1 − 2⁻ⁿ.
    VsMaximallyMixed,
}

impl ContractionMode {
    pub fn label(&self) -> &'static str {
        match self {
            ContractionMode::Pair => "pair",
            ContractionMode::VsMaximallyMixed => "vs_mixed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DepthRow {
    pub depth: usize,
    pub mode: ContractionMode,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    /// Largest ‖E(I/2ⁿ) − I/2ⁿ‖₁ observed across the sampled circuits.
    pub max_fixed_point_residual: f64,
}

fn sample_input(config: &CircuitConfig, rng: &mut impl Rng) -> DensityMatrix {
    match config.input_ensemble {
        InputEnsemble::HaarPure => {
            DensityMatrix::pure(&sample_haar_pure_vector(config.dim(), rng))
        }
        InputEnsemble::ComputationalBasisUniform => {
            let k = rng.random_range(0..config.dim());
            DensityMatrix::basis_state(config.dim(), k)
        }
    }
}

/// Average contraction ratio per depth, in both pair mode and
/// vs-maximally-mixed mode. Within one sample ψ, φ and the circuit layers
/// are drawn from a single stream, so the circuit is shared by the pair.
pub fn avg_contraction_vs_depth(
    config: &CircuitConfig,
    depths: &[usize],
) -> Result<Vec<DepthRow>> {
    config.validate()?;
    let mm = DensityMatrix::maximally_mixed(config.dim());
    let denominator_mm = 1.0 - 1.0 / config.dim() as f64;
    let mut rows = Vec::new();
    for (di, &depth) in depths.iter().enumerate() {
        let cfg = CircuitConfig { depth, ..config.clone() };
        let seed = config.seed.for_task(config.seed.task ^ (0x5eed_0000 + di as u64));
        let samples: Vec<(f64, f64, f64)> = map_indexed(config.n_samples, |i| {
            let mut rng = seed.stream(i as u64);
            let psi = sample_input(&cfg, &mut rng);
            let phi = {
                // redraw until distinct for discrete input ensembles
                let mut tries = 0;
                loop {
                    let cand = sample_input(&cfg, &mut rng);
                    if (cand.matrix() - psi.matrix()).frobenius_norm() > 1e-12 {
                        break cand;
                    }
                    tries += 1;
                    if tries > 100 {
                        break cand;
                    }
                }
            };
            // one circuit per sample: replay the same layer stream for each input
            let mut rng_a = seed.stream(i as u64 + (config.n_samples as u64) * 7919);
            let out_psi = run_noisy_circuit(&cfg, &psi, &mut rng_a).expect("validated config");
            let mut rng_b = seed.stream(i as u64 + (config.n_samples as u64) * 7919);
            let out_phi = run_noisy_circuit(&cfg, &phi, &mut rng_b).expect("validated config");
            let mut rng_c = seed.stream(i as u64 + (config.n_samples as u64) * 7919);
            let out_mm = run_noisy_circuit(&cfg, &mm, &mut rng_c).expect("validated config");

            let den_pair = trace_distance(&psi, &phi);
            let pair_ratio = if den_pair > 0.0 {
                (trace_distance(&out_psi, &out_phi) / den_pair).clamp(0.0, 1.0)
            } else {
                f64::NAN
            };
            let vs_ratio =
                (trace_distance(&out_psi, &mm) / denominator_mm).clamp(0.0, 1.0);
            let residual = trace_distance(&out_mm, &mm) * 2.0; // ‖·‖₁ = 2·D_Tr
            (pair_ratio, vs_ratio, residual)
        });
        let pair: Vec<f64> = samples.iter().map(|s| s.0).filter(|x| x.is_finite()).collect();
        let vs: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let residual = samples.iter().map(|s| s.2).fold(0.0f64, f64::max);
        let (mean, stderr) = mean_stderr(&pair);
        rows.push(DepthRow {
            depth,
            mode: ContractionMode::Pair,
            mean,
            stderr,
            n_samples: pair.len(),
            max_fixed_point_residual: residual,
        });
        let (mean, stderr) = mean_stderr(&vs);
        rows.push(DepthRow {
            depth,
            mode: ContractionMode::VsMaximallyMixed,
            mean,
            stderr,
            n_samples: vs.len(),
            max_fixed_point_residual: residual,
        });
    }
    Ok(rows)
}
