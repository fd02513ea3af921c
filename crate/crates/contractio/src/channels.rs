//! Quantum channels as Kraus families: named constructors, product-channel
//! application by tensor reshaping, Choi-state functionals and the canonical
//! Kraus representation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    C64, CMat, DensityMatrix, ONE, SUPPORT_CUTOFF, ZERO, eigh, eigvalsh, partial_trace, qr_thin,
};

/// Trace-preservation tolerance: ‖Σ E†E − I‖_F.
pub const TP_TOL: f64 = 1e-10;

/// Choi eigenvalues at or below this are dropped by `canonical_kraus`.
pub const CHOI_RANK_CUTOFF: f64 = 1e-12;

/// A channel given by Kraus factors of shape d_out × d_in.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
    label: Option<String>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>, label: Option<String>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidShape("channel needs at least one Kraus factor".into()));
        }
        let d_out = kraus[0].rows();
        let d_in = kraus[0].cols();
        for e in &kraus {
            if e.rows() != d_out || e.cols() != d_in {
                return Err(Error::InvalidShape("Kraus factors must share one shape".into()));
            }
        }
        let ch = KrausChannel { kraus, d_in, d_out, label };
        let res = ch.trace_preservation_residual();
        if res > TP_TOL {
            return Err(Error::Domain(format!(
                "channel is not trace preserving: residual {res:.3e}"
            )));
        }
        Ok(ch)
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    /// ‖Σ E†E − I‖_F.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut acc = CMat::zeros(self.d_in, self.d_in);
        for e in &self.kraus {
            acc = &acc + &e.adjoint().matmul(e);
        }
        (&acc - &CMat::identity(self.d_in)).frobenius_norm()
    }

    /// T(ρ) = Σ E ρ E†.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs channel input dim {}",
                rho.dim(),
                self.d_in
            )));
        }
        Ok(DensityMatrix::from_trusted(self.apply_raw(rho.matrix())))
    }

    pub(crate) fn apply_raw(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for e in &self.kraus {
            let t = e.matmul(rho).matmul(&e.adjoint());
            out = &out + &t;
        }
        out
    }

    /// Whether T(I/d) = I/d (requires d_in == d_out).
    pub fn is_unital(&self, tol: f64) -> bool {
        if self.d_in != self.d_out {
            return false;
        }
        let pi = self.pi();
        (pi.matrix() - &CMat::identity(self.d_out).scale_re(1.0 / self.d_out as f64))
            .frobenius_norm()
            <= tol
    }

    /// π = T(I/d).
    pub fn pi(&self) -> DensityMatrix {
        let mut acc = CMat::zeros(self.d_out, self.d_out);
        for e in &self.kraus {
            acc = &acc + &e.matmul(&e.adjoint());
        }
        DensityMatrix::from_trusted(acc.scale_re(1.0 / self.d_in as f64))
    }

    /// Choi state τ = (T ⊗ id)(|Ω⟩⟨Ω|), subsystem order (output ⊗ input).
    pub fn choi(&self) -> ChoiState {
        let d = self.d_in;
        let dp = self.d_out;
        let dim = d * dp;
        let mut tau = CMat::zeros(dim, dim);
        let scale = 1.0 / d as f64;
        // (E ⊗ I)|Ω⟩ is the row-major flattening of E/√d in (out, in) order
        for e in &self.kraus {
            for i_out in 0..dp {
                for i_in in 0..d {
                    let vi = e[(i_out, i_in)];
                    if vi == ZERO {
                        continue;
                    }
                    let row = i_out * d + i_in;
                    for j_out in 0..dp {
                        for j_in in 0..d {
                            let vj = e[(j_out, j_in)];
                            if vj == ZERO {
                                continue;
                            }
                            tau[(row, j_out * d + j_in)] += vi * vj.conj() * scale;
                        }
                    }
                }
            }
        }
        ChoiState {
            matrix: DensityMatrix::from_trusted(tau),
            d_in: d,
            d_out: dp,
        }
    }

    /// The d'²×d² transfer matrix M[(i',j'),(i,j)] = ⟨i'|T(|i⟩⟨j|)|j'⟩.
    pub fn transfer_matrix(&self) -> CMat {
        let d = self.d_in;
        let dp = self.d_out;
        let mut m = CMat::zeros(dp * dp, d * d);
        for e in &self.kraus {
            for ip in 0..dp {
                for jp in 0..dp {
                    for i in 0..d {
                        for j in 0..d {
                            m[(ip * dp + jp, i * d + j)] += e[(ip, i)] * e[(jp, j)].conj();
                        }
                    }
                }
            }
        }
        m
    }

    /// Minimal Kraus family with pairwise Hilbert-Schmidt-orthogonal factors,
    /// obtained from the spectral decomposition of the Choi state.
    pub fn canonical_kraus(&self) -> Result<KrausChannel> {
        let choi = self.choi();
        let d = self.d_in;
        let dp = self.d_out;
        let dec = eigh(choi.matrix.matrix())?;
        let mut ops = Vec::new();
        for (k, &w) in dec.values.iter().enumerate() {
            if w <= CHOI_RANK_CUTOFF {
                continue;
            }
            let scale = (w * d as f64).sqrt();
            let mut e = CMat::zeros(dp, d);
            for i_out in 0..dp {
                for i_in in 0..d {
                    e[(i_out, i_in)] = dec.vectors[(i_out * d + i_in, k)] * scale;
                }
            }
            ops.push(e);
        }
        KrausChannel::new(ops, self.label.clone())
    }
}

/// Choi state with its dimensions.
#[derive(Clone, Debug)]
pub struct ChoiState {
    pub matrix: DensityMatrix,
    pub d_in: usize,
    pub d_out: usize,
}

impl ChoiState {
    /// Tr₂ τ, which must equal π.
    pub fn output_marginal(&self) -> Result<CMat> {
        partial_trace(self.matrix.matrix(), &[self.d_out, self.d_in], &[0])
    }
}

/// Scalar and matrix functionals of the Choi state used by the bounds.
#[derive(Clone, Debug)]
pub struct ChoiFunctionals {
    /// Tr τ².
    pub purity: f64,
    /// Von Neumann entropy of τ in bits.
    pub entropy_bits: f64,
    /// The d'×d' matrix Tr₂ τ².
    pub tr2_choi_sq: CMat,
    /// Tr √(Tr₂ τ²).
    pub sqrt_trace: f64,
    /// Tr π².
    pub pi_purity: f64,
    /// ‖π‖_∞.
    pub pi_infnorm: f64,
}

pub fn choi_functionals(ch: &KrausChannel) -> Result<ChoiFunctionals> {
    let choi = ch.choi();
    let tau = choi.matrix.matrix();
    let tau_sq = tau.matmul(tau);
    let purity = tau_sq.trace().re;
    let vals = eigvalsh(tau)?;
    let entropy_bits = entropy_bits_of(&vals);
    let tr2 = partial_trace(&tau_sq, &[ch.d_out(), ch.d_in()], &[0])?;
    let sq_vals = eigvalsh(&tr2)?;
    let sqrt_trace: f64 = sq_vals.iter().map(|&x| x.max(0.0).sqrt()).sum();
    let pi = ch.pi();
    let pi_purity = pi.purity();
    let pi_vals = eigvalsh(pi.matrix())?;
    let pi_infnorm = pi_vals.iter().cloned().fold(0.0f64, f64::max);
    Ok(ChoiFunctionals {
        purity,
        entropy_bits,
        tr2_choi_sq: tr2,
        sqrt_trace,
        pi_purity,
        pi_infnorm,
    })
}

/// Shannon/von-Neumann entropy in bits of a spectrum (negatives clamped).
pub fn entropy_bits_of(vals: &[f64]) -> f64 {
    -vals
        .iter()
        .filter(|&&x| x > 1e-15)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

/// A local channel applied to each of `n` tensor factors. The tensor power
/// is never materialized: `apply` reshapes the state site by site.
#[derive(Clone, Debug)]
pub struct ProductChannelSpec {
    pub local: KrausChannel,
    pub n: usize,
}

impl ProductChannelSpec {
    pub fn new(local: KrausChannel, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("tensor power must be >= 1".into()));
        }
        if local.d_in() != local.d_out() {
            return Err(Error::InvalidShape(
                "product channels need a square local channel".into(),
            ));
        }
        Ok(ProductChannelSpec { local, n })
    }

    pub fn dim(&self) -> usize {
        self.local.d_in().pow(self.n as u32)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} vs product channel dim {}",
                rho.dim(),
                self.dim()
            )));
        }
        let mut m = rho.matrix().clone();
        for site in 0..self.n {
            m = apply_local_kraus(&m, self.local.kraus(), site, self.n, self.local.d_in());
        }
        Ok(DensityMatrix::from_trusted(m))
    }
}

/// Apply a local Kraus family on one tensor factor of a multi-site state.
pub fn apply_local_kraus(
    rho: &CMat,
    kraus: &[CMat],
    site: usize,
    n_sites: usize,
    site_dim: usize,
) -> CMat {
    let total = rho.rows();
    let post: usize = site_dim.pow((n_sites - site - 1) as u32);
    let pre: usize = total / (site_dim * post);
    debug_assert_eq!(pre * site_dim * post, total);

    let mut out = CMat::zeros(total, total);
    let mut left = CMat::zeros(total, total);
    for e in kraus {
        // left[(a,s',b), j] = Σ_s E[s',s] · rho[(a,s,b), j]
        left.fill_zero();
        for a in 0..pre {
            for sp in 0..site_dim {
                for s in 0..site_dim {
                    let esc = e[(sp, s)];
                    if esc == ZERO {
                        continue;
                    }
                    for b in 0..post {
                        let ri = (a * site_dim + sp) * post + b;
                        let si = (a * site_dim + s) * post + b;
                        let src = rho.row(si);
                        let dst = left.row_mut(ri);
                        for j in 0..total {
                            dst[j] += esc * src[j];
                        }
                    }
                }
            }
        }
        // out[i, (c,t',b)] += Σ_t left[i, (c,t,b)] · conj(E[t',t])
        for c in 0..pre {
            for tp in 0..site_dim {
                for t in 0..site_dim {
                    let esc = e[(tp, t)].conj();
                    if esc == ZERO {
                        continue;
                    }
                    for b in 0..post {
                        let cj = (c * site_dim + tp) * post + b;
                        let sj = (c * site_dim + t) * post + b;
                        for i in 0..total {
                            let v = left[(i, sj)] * esc;
                            out[(i, cj)] += v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Either a plain channel or a lazily applied tensor power.
#[derive(Clone, Debug)]
pub enum Channel {
    Single(KrausChannel),
    Product(ProductChannelSpec),
}

impl Channel {
    pub fn d_in(&self) -> usize {
        match self {
            Channel::Single(ch) => ch.d_in(),
            Channel::Product(p) => p.dim(),
        }
    }

    pub fn d_out(&self) -> usize {
        match self {
            Channel::Single(ch) => ch.d_out(),
            Channel::Product(p) => p.dim(),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            Channel::Single(ch) => ch.apply(rho),
            Channel::Product(p) => p.apply(rho),
        }
    }

    /// (Tr τ², Tr π²) of the full channel; product channels use
    /// multiplicativity of the Choi state.
    pub fn purity_pair(&self) -> Result<(f64, f64)> {
        match self {
            Channel::Single(ch) => {
                let f = choi_functionals(ch)?;
                Ok((f.purity, f.pi_purity))
            }
            Channel::Product(p) => {
                let f = choi_functionals(&p.local)?;
                Ok((f.purity.powi(p.n as i32), f.pi_purity.powi(p.n as i32)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// constructors

fn pauli_x() -> CMat {
    CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

fn pauli_y() -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(0.0, -1.0);
    m[(1, 0)] = C64::new(0.0, 1.0);
    m
}

fn pauli_z() -> CMat {
    CMat::diag_real(&[1.0, -1.0])
}

/// The single-qubit Pauli basis [I, X, Y, Z].
pub fn pauli_matrices() -> [CMat; 4] {
    [CMat::identity(2), pauli_x(), pauli_y(), pauli_z()]
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::Domain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Weyl shift/clock unitaries W_{a,b} = X^a Z^b on dimension d.
fn weyl(d: usize, a: usize, b: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    let tau = 2.0 * std::f64::consts::PI / d as f64;
    for j in 0..d {
        let phase = C64::from_polar(1.0, tau * (b * j) as f64);
        m[((j + a) % d, j)] = phase;
    }
    m
}

/// (1-p)ρ + p·I/d via the Weyl mixture Kraus family (d² factors).
pub fn depolarizing(p: f64, d: usize) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    if d < 1 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let q = p / (d * d) as f64;
    let mut ops = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = (if (a, b) == (0, 0) { 1.0 - p + q } else { q }).max(0.0);
            if w == 0.0 {
                continue;
            }
            ops.push(weyl(d, a, b).scale_re(w.sqrt()));
        }
    }
    KrausChannel::new(ops, Some(format!("depolarizing(p={p}, d={d})")))
}

/// Global n-qubit depolarizing channel on dimension 2^n.
pub fn global_depolarizing(p: f64, n_qubits: usize) -> Result<KrausChannel> {
    let ch = depolarizing(p, 1 << n_qubits)?;
    Ok(KrausChannel {
        label: Some(format!("global_depolarizing(p={p}, n={n_qubits})")),
        ..ch
    })
}

/// Single-qubit dephasing with strength γ, as a phase flip.
pub fn dephasing(gamma: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    let ops = vec![
        CMat::identity(2).scale_re((1.0 - gamma / 2.0).sqrt()),
        pauli_z().scale_re((gamma / 2.0).sqrt()),
    ];
    KrausChannel::new(ops, Some(format!("dephasing(gamma={gamma})")))
}

/// Entrywise damping of off-diagonal terms: T(ρ) = Γ ⋆ ρ for PSD Γ with
/// unit diagonal.
pub fn schur_dephasing(gamma: &CMat) -> Result<KrausChannel> {
    if !gamma.is_square() {
        return Err(Error::InvalidShape("Γ must be square".into()));
    }
    let d = gamma.rows();
    if !gamma.is_hermitian() {
        return Err(Error::Domain("Γ must be Hermitian".into()));
    }
    for i in 0..d {
        if (gamma[(i, i)] - ONE).norm() > 1e-10 {
            return Err(Error::Domain("Γ must have unit diagonal".into()));
        }
    }
    let dec = eigh(gamma)?;
    if dec.values.first().copied().unwrap_or(0.0) < -1e-10 {
        return Err(Error::Domain("Γ must be PSD".into()));
    }
    let mut ops = Vec::new();
    for (k, &g) in dec.values.iter().enumerate() {
        if g <= 1e-14 {
            continue;
        }
        let scale = g.sqrt();
        let diag: Vec<C64> = (0..d).map(|i| dec.vectors[(i, k)] * scale).collect();
        ops.push(CMat::diag(&diag));
    }
    KrausChannel::new(ops, Some("schur_dephasing".into()))
}

/// Single-qubit amplitude damping with strength λ.
pub fn amplitude_damping(lambda: f64) -> Result<KrausChannel> {
    check_unit_interval("lambda", lambda)?;
    let k0 = CMat::from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - lambda).sqrt()]).unwrap();
    let mut k1 = CMat::zeros(2, 2);
    k1[(0, 1)] = C64::new(lambda.sqrt(), 0.0);
    KrausChannel::new(vec![k0, k1], Some(format!("amplitude_damping(lambda={lambda})")))
}

/// N-to-(N-M)-qubit channel discarding the first M qubits.
pub fn partial_trace_channel(n_qubits: usize, discard: usize) -> Result<KrausChannel> {
    if discard > n_qubits {
        return Err(Error::Domain(format!(
            "cannot discard {discard} of {n_qubits} qubits"
        )));
    }
    let d_in = 1usize << n_qubits;
    let d_out = 1usize << (n_qubits - discard);
    let env = 1usize << discard;
    let mut ops = Vec::with_capacity(env);
    for k in 0..env {
        let mut e = CMat::zeros(d_out, d_in);
        for j in 0..d_out {
            e[(j, k * d_out + j)] = ONE;
        }
        ops.push(e);
    }
    KrausChannel::new(
        ops,
        Some(format!("partial_trace(N={n_qubits}, M={discard})")),
    )
}

/// Σ p_i U_i ρ U_i†.
pub fn mixture_of_unitaries(weights: &[f64], unitaries: &[CMat]) -> Result<KrausChannel> {
    if weights.len() != unitaries.len() || weights.is_empty() {
        return Err(Error::InvalidShape("weights and unitaries must pair up".into()));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -1e-12) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("weights must form a probability vector".into()));
    }
    let d = unitaries[0].rows();
    for u in unitaries {
        if u.rows() != d || u.cols() != d {
            return Err(Error::InvalidShape("unitaries must share one dimension".into()));
        }
        let res = (&u.adjoint().matmul(u) - &CMat::identity(d)).frobenius_norm();
        if res > 1e-9 {
            return Err(Error::Domain(format!("matrix is not unitary: residual {res:.2e}")));
        }
    }
    let ops: Vec<CMat> = weights
        .iter()
        .zip(unitaries)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, u)| u.scale_re(w.sqrt()))
        .collect();
    KrausChannel::new(ops, Some("mixture_of_unitaries".into()))
}

/// (1-p-q)ρ + p XρX + q ZρZ.
pub fn pauli_channel(p: f64, q: f64) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    if p + q > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("p + q = {} exceeds 1", p + q)));
    }
    mixture_of_unitaries(
        &[(1.0 - p - q).max(0.0), p, q],
        &[CMat::identity(2), pauli_x(), pauli_z()],
    )
    .map(|ch| KrausChannel {
        label: Some(format!("pauli(p={p}, q={q})")),
        ..ch
    })
}

/// T(ρ) = Tr(ρ)·σ.
pub fn replacer(sigma: &DensityMatrix, d_in: usize) -> Result<KrausChannel> {
    let dec = eigh(sigma.matrix())?;
    let d_out = sigma.dim();
    let mut ops = Vec::new();
    for (k, &s) in dec.values.iter().enumerate() {
        if s <= SUPPORT_CUTOFF {
            continue;
        }
        let root = s.sqrt();
        for i in 0..d_in {
            let mut e = CMat::zeros(d_out, d_in);
            for r in 0..d_out {
                e[(r, i)] = dec.vectors[(r, k)] * root;
            }
            ops.push(e);
        }
    }
    KrausChannel::new(ops, Some("replacer".into()))
}

/// ρ ↦ U ρ U†.
pub fn unitary_channel(u: &CMat) -> Result<KrausChannel> {
    if !u.is_square() {
        return Err(Error::InvalidShape("unitary must be square".into()));
    }
    let res = (&u.adjoint().matmul(u) - &CMat::identity(u.rows())).frobenius_norm();
    if res > 1e-9 {
        return Err(Error::Domain(format!("matrix is not unitary: residual {res:.2e}")));
    }
    KrausChannel::new(vec![u.clone()], Some("unitary".into()))
}

pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel::new(vec![CMat::identity(d)], Some("identity".into()))
        .expect("identity is trace preserving")
}

/// second ∘ first.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<KrausChannel> {
    if first.d_out() != second.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: {} -> {} then {} -> {}",
            first.d_in(),
            first.d_out(),
            second.d_in(),
            second.d_out()
        )));
    }
    let mut ops = Vec::with_capacity(first.kraus_count() * second.kraus_count());
    for f in second.kraus() {
        for e in first.kraus() {
            ops.push(f.matmul(e));
        }
    }
    KrausChannel::new(ops, Some("compose".into()))
}

/// Uniform-over-channels test generator: stack K Ginibre blocks, orthonormalize
/// the d_out·K × d_in stack into an isometry, slice back into Kraus blocks.
pub fn random_channel(d_in: usize, d_out: usize, kraus_rank: usize, r: &mut impl Rng) -> KrausChannel {
    assert!(d_out * kraus_rank >= d_in, "isometry needs d_out*K >= d_in");
    let g = CMat::from_fn(d_out * kraus_rank, d_in, |_, _| {
        C64::new(
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, r),
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, r),
        )
    });
    let (v, _) = qr_thin(&g);
    let ops: Vec<CMat> = (0..kraus_rank)
        .map(|k| {
            CMat::from_fn(d_out, d_in, |i, j| v[(k * d_out + i, j)])
        })
        .collect();
    KrausChannel::new(ops, Some("random".into())).expect("isometry slices are trace preserving")
}
