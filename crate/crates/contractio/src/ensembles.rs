//! Seeded random generation of pure and mixed quantum states and Haar
//! unitaries, plus the pair distributions consumed by the estimator.
//!
//! All sampling flows through counter-based ChaCha streams keyed by
//! (master seed, task, sample index), so a run is reproducible regardless
//! of how samples are scheduled across worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{C64, CMat, DensityMatrix, qr_thin};

/// How many redraws `ProductDistinct` attempts before giving up on a sample.
pub const MAX_COLLISION_REDRAWS: u32 = 100;

/// Frobenius-distance threshold below which two sampled states collide.
pub const COLLISION_TOL: f64 = 1e-12;

/// Master seed plus stream-derivation rule: sample `i` of task `t` uses the
/// counter (master_seed, t, i). Identical triples give identical samples,
/// independent of thread count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub task: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec { master_seed, task: 0 }
    }

    pub fn with_task(master_seed: u64, task: u64) -> Self {
        SeedSpec { master_seed, task }
    }

    pub fn for_task(&self, task: u64) -> Self {
        SeedSpec { master_seed: self.master_seed, task }
    }

    /// RNG for one sample: key derived from (master_seed, task) via a
    /// splitmix chain, stream set to the sample index.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut state = self.master_seed ^ 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^ (z >> 31)
        };
        let mut key = [0u8; 32];
        let words = [next(), next() ^ self.task, next(), next().wrapping_add(self.task)];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}

fn normal(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

fn ginibre(rows: usize, cols: usize, r: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(normal(r), normal(r)))
}

/// Haar-random pure state as a normalized Ginibre vector.
pub fn sample_haar_pure_vector(d: usize, r: &mut impl Rng) -> Vec<C64> {
    assert!(d >= 1);
    loop {
        let v: Vec<C64> = (0..d).map(|_| C64::new(normal(r), normal(r))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// |ψ⟩⟨ψ| for a Haar-random |ψ⟩.
pub fn sample_haar_pure(d: usize, r: &mut impl Rng) -> DensityMatrix {
    DensityMatrix::pure(&sample_haar_pure_vector(d, r))
}

/// Mixed state from the induced measure: G G†/Tr(G G†) with G a d×r Ginibre
/// matrix. r = d is the Hilbert-Schmidt measure; r = 1 reduces to Haar pure.
pub fn sample_induced_mixed(d: usize, rank: usize, r: &mut impl Rng) -> DensityMatrix {
    assert!(d >= 1 && rank >= 1);
    let g = ginibre(d, rank, r);
    let gg = g.matmul(&g.adjoint());
    let tr = gg.trace().re;
    DensityMatrix::from_trusted(gg.scale_re(1.0 / tr))
}

/// Haar-random unitary: QR of a Ginibre matrix with the R-diagonal phase
/// correction.
pub fn sample_haar_unitary(d: usize, r: &mut impl Rng) -> CMat {
    assert!(d >= 1);
    let g = ginibre(d, d, r);
    let (mut q, rr) = qr_thin(&g);
    for j in 0..d {
        let rjj = rr[(j, j)];
        let ph = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Single-state ensembles.
#[derive(Clone, Debug)]
pub enum EnsembleSpec {
    HaarPure { dim: usize },
    /// Induced measure with Schmidt-rank parameter `rank`; `rank == dim`
    /// is the Hilbert-Schmidt measure.
    InducedMixed { dim: usize, rank: usize },
    Fixed(DensityMatrix),
    BasisUniform { dim: usize },
}

impl EnsembleSpec {
    pub fn dim(&self) -> usize {
        match self {
            EnsembleSpec::HaarPure { dim } => *dim,
            EnsembleSpec::InducedMixed { dim, .. } => *dim,
            EnsembleSpec::Fixed(rho) => rho.dim(),
            EnsembleSpec::BasisUniform { dim } => *dim,
        }
    }

    pub fn sample(&self, r: &mut impl Rng) -> DensityMatrix {
        match self {
            EnsembleSpec::HaarPure { dim } => sample_haar_pure(*dim, r),
            EnsembleSpec::InducedMixed { dim, rank } => sample_induced_mixed(*dim, *rank, r),
            EnsembleSpec::Fixed(rho) => rho.clone(),
            EnsembleSpec::BasisUniform { dim } => {
                let k = r.random_range(0..*dim);
                DensityMatrix::basis_state(*dim, k)
            }
        }
    }
}

/// Distributions over pairs (ρ, σ).
#[derive(Clone, Debug)]
pub enum PairDistribution {
    /// Independent draws from two ensembles.
    Product { left: EnsembleSpec, right: EnsembleSpec },
    /// Independent identical draws conditioned on ρ ≠ σ.
    ProductDistinct { ensemble: EnsembleSpec },
    /// ρ from the ensemble, σ = I/d.
    VsMaximallyMixed { ensemble: EnsembleSpec },
    /// ρ from the ensemble, σ fixal.
    VsFixed { ensemble: EnsembleSpec, sigma: DensityMatrix },
}

/// One sampled pair with collision accounting.
#[derive(Clone, Debug)]
pub struct PairSample {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    /// Redraws performed by `ProductDistinct`.
    pub rejections: u32,
    /// True when the returned pair still collides (degenerate input or
    /// redraw budget exhausted).
    pub collided: bool,
}

impl PairDistribution {
    pub fn dim(&self) -> usize {
        match self {
            PairDistribution::Product { left, .. } => left.dim(),
            PairDistribution::ProductDistinct { ensemble } => ensemble.dim(),
            PairDistribution::VsMaximallyMixed { ensemble } => ensemble.dim(),
            PairDistribution::VsFixed { ensemble, .. } => ensemble.dim(),
        }
    }

    pub fn sample(&self, r: &mut impl Rng) -> PairSample {
        match self {
            PairDistribution::Product { left, right } => {
                let rho = left.sample(r);
                let sigma = right.sample(r);
                let collided = frobenius_distance(&rho, &sigma) <= COLLISION_TOL;
                PairSample { rho, sigma, rejections: 0, collided }
            }
            PairDistribution::ProductDistinct { ensemble } => {
                let rho = ensemble.sample(r);
                let mut rejections = 0;
                loop {
                    let sigma = ensemble.sample(r);
                    if frobenius_distance(&rho, &sigma) > COLLISION_TOL {
                        return PairSample { rho, sigma, rejections, collided: false };
                    }
                    rejections += 1;
                    if rejections >= MAX_COLLISION_REDRAWS {
                        return PairSample { rho, sigma, rejections, collided: true };
                    }
                }
            }
            PairDistribution::VsMaximallyMixed { ensemble } => {
                let rho = ensemble.sample(r);
                let sigma = DensityMatrix::maximally_mixed(ensemble.dim());
                let collided = frobenius_distance(&rho, &sigma) <= COLLISION_TOL;
                PairSample { rho, sigma, rejections: 0, collided }
            }
            PairDistribution::VsFixed { ensemble, sigma } => {
                let rho = ensemble.sample(r);
                let collided = frobenius_distance(&rho, sigma) <= COLLISION_TOL;
                PairSample { rho, sigma: sigma.clone(), rejections: 0, collided }
            }
        }
    }
}

fn frobenius_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix()).frobenius_norm()
}

/// Mean purity of the induced measure: (d + r)/(d r + 1).
pub fn induced_mean_purity(d: usize, rank: usize) -> f64 {
    (d + rank) as f64 / ((d * rank) as f64 + 1.0)
}
