//! JSON configuration schemas for the experiment runner. Unknown fields are
//! rejected everywhere; channel specs accept either a named family with
//! parameters or raw Kraus matrices as [re, im] entry pairs.

use serde::Deserialize;
use serde_json::Value;

use crate::channels::{
    self, Channel, KrausChannel, ProductChannelSpec,
};
use crate::circuits::{CircuitConfig, InputEnsemble, LayerEnsemble, NoiseModel};
use crate::divergences::{Divergence, FSpec};
use crate::ensembles::{EnsembleSpec, PairDistribution, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat, DensityMatrix};

/// A matrix in JSON: rows of [re, im] pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_json(m: &JsonMatrix) -> Result<CMat> {
    let rows = m.len();
    if rows == 0 {
        return Err(Error::Config("empty matrix".into()));
    }
    let cols = m[0].len();
    let mut out = CMat::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Config("ragged matrix rows".into()));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            out[(i, j)] = C64::new(re, im);
        }
    }
    Ok(out)
}

/// Channel spec: {"family": name, "params": {...}} or {"kraus": [...]},
/// optionally wrapped as an n-fold tensor power.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecConfig {
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub params: Option<serde_json::Map<String, Value>>,
    #[serde(default)]
    pub kraus: Option<Vec<JsonMatrix>>,
    #[serde(default)]
    pub tensor_power: Option<usize>,
}

fn param_f64(params: &Option<serde_json::Map<String, Value>>, key: &str) -> Result<f64> {
    params
        .as_ref()
        .and_then(|m| m.get(key))
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Config(format!("missing numeric parameter '{key}'")))
}

fn param_usize(params: &Option<serde_json::Map<String, Value>>, key: &str) -> Result<usize> {
    params
        .as_ref()
        .and_then(|m| m.get(key))
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::Config(format!("missing integer parameter '{key}'")))
}

fn param_usize_or(
    params: &Option<serde_json::Map<String, Value>>,
    key: &str,
    default: usize,
) -> Result<usize> {
    match params.as_ref().and_then(|m| m.get(key)) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| Error::Config(format!("parameter '{key}' must be an integer"))),
    }
}

impl ChannelSpecConfig {
    /// Build the single (unexpanded) channel.
    pub fn build_single(&self) -> Result<KrausChannel> {
        if let Some(kraus) = &self.kraus {
            if self.family.is_some() || self.params.is_some() {
                return Err(Error::Config(
                    "give either 'kraus' or 'family', not both".into(),
                ));
            }
            let ops = kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
            return KrausChannel::new(ops, Some("kraus".into()));
        }
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| Error::Config("channel needs 'family' or 'kraus'".into()))?;
        let p = &self.params;
        match family {
            "identity" => Ok(channels::identity_channel(param_usize_or(p, "d", 2)?)),
            "depolarizing" => {
                channels::depolarizing(param_f64(p, "p")?, param_usize_or(p, "d", 2)?)
            }
            "global_depolarizing" => {
                channels::global_depolarizing(param_f64(p, "p")?, param_usize(p, "n")?)
            }
            "dephasing" => channels::dephasing(param_f64(p, "gamma")?),
            "schur_dephasing" => {
                let m = p
                    .as_ref()
                    .and_then(|m| m.get("gamma_matrix"))
                    .ok_or_else(|| Error::Config("missing 'gamma_matrix'".into()))?;
                let jm: JsonMatrix = serde_json::from_value(m.clone())?;
                channels::schur_dephasing(&matrix_from_json(&jm)?)
            }
            "amplitude_damping" => channels::amplitude_damping(param_f64(p, "lambda")?),
            "partial_trace" => channels::partial_trace_channel(
                param_usize(p, "n_qubits")?,
                param_usize(p, "discard")?,
            ),
            "pauli" => channels::pauli_channel(param_f64(p, "p")?, param_f64(p, "q")?),
            "mixture_of_unitaries" => {
                let w = p
                    .as_ref()
                    .and_then(|m| m.get("weights"))
                    .ok_or_else(|| Error::Config("missing 'weights'".into()))?;
                let weights: Vec<f64> = serde_json::from_value(w.clone())?;
                let u = p
                    .as_ref()
                    .and_then(|m| m.get("unitaries"))
                    .ok_or_else(|| Error::Config("missing 'unitaries'".into()))?;
                let jms: Vec<JsonMatrix> = serde_json::from_value(u.clone())?;
                let us = jms.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                channels::mixture_of_unitaries(&weights, &us)
            }
            "replacer" => {
                let d = param_usize_or(p, "d", 2)?;
                match p.as_ref().and_then(|m| m.get("sigma")) {
                    Some(v) => {
                        let jm: JsonMatrix = serde_json::from_value(v.clone())?;
                        let sigma = DensityMatrix::new(matrix_from_json(&jm)?)?;
                        channels::replacer(&sigma, d)
                    }
                    None => channels::replacer(&DensityMatrix::maximally_mixed(d), d),
                }
            }
            "unitary" => {
                let m = p
                    .as_ref()
                    .and_then(|m| m.get("matrix"))
                    .ok_or_else(|| Error::Config("missing 'matrix'".into()))?;
                let jm: JsonMatrix = serde_json::from_value(m.clone())?;
                channels::unitary_channel(&matrix_from_json(&jm)?)
            }
            other => Err(Error::Config(format!("unknown channel family '{other}'"))),
        }
    }

    /// Build the channel including any tensor power.
    pub fn build(&self) -> Result<Channel> {
        let single = self.build_single()?;
        match self.tensor_power {
            None | Some(1) => Ok(Channel::Single(single)),
            Some(n) => Ok(Channel::Product(ProductChannelSpec::new(single, n)?)),
        }
    }
}

/// Divergence names: "tr", "re", "maxre", "hs:<gamma>", "chi2", "f:<name>"
/// with f names "xlnx", "x2", "hellinger:<alpha>".
pub fn parse_divergence(s: &str) -> Result<Divergence> {
    const DEFAULT_TOL: f64 = 1e-8;
    if s == "tr" {
        return Ok(Divergence::TraceDistance);
    }
    if s == "re" {
        return Ok(Divergence::RelativeEntropy);
    }
    if s == "maxre" {
        return Ok(Divergence::MaxRelativeEntropy);
    }
    if s == "chi2" {
        return Ok(Divergence::ChiSquaredClosed);
    }
    if let Some(g) = s.strip_prefix("hs:") {
        let gamma: f64 = g
            .parse()
            .map_err(|_| Error::Config(format!("bad hockey-stick gamma '{g}'")))?;
        if gamma <= 0.0 {
            return Err(Error::Config("hockey-stick gamma must be > 0".into()));
        }
        return Ok(Divergence::HockeyStick { gamma });
    }
    if let Some(f) = s.strip_prefix("f:") {
        let spec = match f {
            "xlnx" => FSpec::x_ln_x(),
            "x2" => FSpec::chi_squared(),
            other => match other.strip_prefix("hellinger:") {
                Some(a) => {
                    let alpha: f64 = a
                        .parse()
                        .map_err(|_| Error::Config(format!("bad hellinger alpha '{a}'")))?;
                    FSpec::hellinger(alpha)?
                }
                None => return Err(Error::Config(format!("unknown generator 'f:{other}'"))),
            },
        };
        return Ok(Divergence::FIntegral { spec, tol: DEFAULT_TOL });
    }
    Err(Error::Config(format!("unknown divergence '{s}'")))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl ParamGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            return Ok(v.clone());
        }
        match (self.start, self.stop, self.step) {
            (Some(a), Some(b), Some(s)) if s > 0.0 && b >= a => {
                let mut out = Vec::new();
                let n = ((b - a) / s).round() as usize;
                for k in 0..=n {
                    let v = a + s * k as f64;
                    if v <= b + 1e-12 {
                        out.push(v.min(b));
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Config(
                "param_grid needs either 'values' or start/stop/step".into(),
            )),
        }
    }
}

fn default_p_moments() -> Vec<f64> {
    vec![1.0]
}

fn default_seed() -> u64 {
    0
}

/// Sample schedule: 2100 for n ≤ 3, 600 for n ≤ 6, 100 beyond, unless
/// overridden per n.
pub fn default_samples_for(n: usize) -> usize {
    if n <= 3 {
        2100
    } else if n <= 6 {
        600
    } else {
        100
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub channel_family: String,
    #[serde(default)]
    pub channel_params: Option<serde_json::Map<String, Value>>,
    pub param_grid: ParamGrid,
    pub n_list: Vec<usize>,
    pub divergence: String,
    pub pairs: String,
    #[serde(default)]
    pub induced_rank: Option<usize>,
    #[serde(default = "default_p_moments")]
    pub p_moments: Vec<f64>,
    #[serde(default)]
    pub samples_per_n: Option<std::collections::BTreeMap<String, usize>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub denominator: Option<String>,
}

impl SweepConfig {
    pub fn samples_for(&self, n: usize) -> usize {
        if let Some(map) = &self.samples_per_n {
            if let Some(&v) = map.get(&n.to_string()) {
                return v;
            }
        }
        default_samples_for(n)
    }

    /// Channel for one grid cell (parameter value, tensor power n).
    pub fn channel_at(&self, param: f64, n: usize) -> Result<Channel> {
        let local = match self.channel_family.as_str() {
            "depolarizing" => channels::depolarizing(param, 2)?,
            "dephasing" => channels::dephasing(param)?,
            "amplitude_damping" => channels::amplitude_damping(param)?,
            "global_depolarizing" => {
                return Ok(Channel::Single(channels::global_depolarizing(param, n)?));
            }
            "partial_trace" => {
                if n != 1 {
                    return Err(Error::Config(
                        "partial_trace sweeps support n = 1 only".into(),
                    ));
                }
                let nq = param_usize(&self.channel_params, "n_qubits")?;
                let m = param as usize;
                if (param - m as f64).abs() > 1e-9 {
                    return Err(Error::Config(
                        "partial_trace sweeps take integer discard counts".into(),
                    ));
                }
                return Ok(Channel::Single(channels::partial_trace_channel(nq, m)?));
            }
            other => {
                return Err(Error::Config(format!(
                    "channel family '{other}' is not sweepable"
                )));
            }
        };
        if n == 1 {
            Ok(Channel::Single(local))
        } else {
            Ok(Channel::Product(ProductChannelSpec::new(local, n)?))
        }
    }

    pub fn pair_distribution(&self, dim: usize) -> Result<PairDistribution> {
        match self.pairs.as_str() {
            "haar_haar" => Ok(PairDistribution::ProductDistinct {
                ensemble: EnsembleSpec::HaarPure { dim },
            }),
            "haar_vs_mixed" => Ok(PairDistribution::VsMaximallyMixed {
                ensemble: EnsembleSpec::HaarPure { dim },
            }),
            "induced_induced" => {
                let rank = self.induced_rank.unwrap_or(dim);
                Ok(PairDistribution::ProductDistinct {
                    ensemble: EnsembleSpec::InducedMixed { dim, rank },
                })
            }
            other => Err(Error::Config(format!("unknown pair mode '{other}'"))),
        }
    }

    pub fn denominator_mode(&self) -> Result<crate::estimator::DenominatorMode> {
        match self.denominator.as_deref() {
            None | Some("exact") => Ok(crate::estimator::DenominatorMode::ExactWhenAvailable),
            Some("sampled") => Ok(crate::estimator::DenominatorMode::Sampled),
            Some(other) => Err(Error::Config(format!("unknown denominator mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub channel: ChannelSpecConfig,
    #[serde(default)]
    pub tensor_n: Option<usize>,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub n_qubits: Option<usize>,
}

fn default_eps() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.05
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub scope: String,
    pub channel: ChannelSpecConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfigFile {
    pub n_qubits: usize,
    pub depths: Vec<usize>,
    pub layer_ensemble: String,
    pub noise: NoiseConfig,
    #[serde(default = "default_input_ensemble")]
    pub input_ensemble: String,
    pub n_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_input_ensemble() -> String {
    "haar".into()
}

impl CircuitConfigFile {
    pub fn build(&self) -> Result<(CircuitConfig, Vec<usize>)> {
        let layer = match self.layer_ensemble.as_str() {
            "haar_global" => LayerEnsemble::HaarGlobal,
            "random_pauli" => LayerEnsemble::RandomPauliLayer,
            "brickwork" => LayerEnsemble::Brickwork2qHaar,
            other => return Err(Error::Config(format!("unknown layer ensemble '{other}'"))),
        };
        let noise_channel = self.noise.channel.build_single()?;
        let noise = match self.noise.scope.as_str() {
            "local" => NoiseModel::LocalPerQubit(noise_channel),
            "global" => NoiseModel::Global(noise_channel),
            other => return Err(Error::Config(format!("unknown noise scope '{other}'"))),
        };
        let input = match self.input_ensemble.as_str() {
            "haar" => InputEnsemble::HaarPure,
            "basis" => InputEnsemble::ComputationalBasisUniform,
            other => return Err(Error::Config(format!("unknown input ensemble '{other}'"))),
        };
        let config = CircuitConfig {
            n_qubits: self.n_qubits,
            depth: 0,
            layer_ensemble: layer,
            noise,
            input_ensemble: input,
            n_samples: self.n_samples,
            seed: SeedSpec::new(self.seed),
        };
        config.validate()?;
        Ok((config, self.depths.clone()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    101
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpConfig {
    pub channel: ChannelSpecConfig,
    pub epsilon: f64,
    #[serde(default)]
    pub n_qubits: Option<usize>,
    #[serde(default = "default_sample_pairs")]
    pub sample_pairs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub classifier: Option<ClassifierConfig>,
}

fn default_sample_pairs() -> usize {
    64
}
