//! Reproducible Monte Carlo for the six ensembles: matrix samplers,
//! polynomial assembly, operator norms, empirical spectral statistics, and
//! tail/concentration probes. All randomness flows through counter-based
//! streams keyed by (seed, replica, matrix index).

use crate::linalg::{kron, op_norm_detailed, trace_stat, CMat, C64};
use crate::ncpoly::NCPoly;
use crate::rat::rat_to_f64;
use crate::rng::Stream;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum EnsembleId {
    Gue,
    Goe,
    Gse,
    HaarU,
    HaarO,
    HaarSp,
    HayesGue,
}

impl EnsembleId {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gue" => Ok(EnsembleId::Gue),
            "goe" => Ok(EnsembleId::Goe),
            "gse" => Ok(EnsembleId::Gse),
            "haar-u" | "haaru" | "u" => Ok(EnsembleId::HaarU),
            "haar-o" | "haaro" | "o" => Ok(EnsembleId::HaarO),
            "haar-sp" | "haarsp" | "sp" => Ok(EnsembleId::HaarSp),
            "hayes" | "hayes-gue" => Ok(EnsembleId::HayesGue),
            other => Err(Error::Parse(format!("unknown ensemble {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleId::Gue => "gue",
            EnsembleId::Goe => "goe",
            EnsembleId::Gse => "gse",
            EnsembleId::HaarU => "haar-u",
            EnsembleId::HaarO => "haar-o",
            EnsembleId::HaarSp => "haar-sp",
            EnsembleId::HayesGue => "hayes-gue",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GaussKind {
    Gue,
    Goe,
    Gse,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HaarKind {
    Unitary,
    Orthogonal,
    Symplectic,
}

/// Self-adjoint Gaussian matrix with the standard entry conventions:
/// GUE N_C(0,1/N) off-diagonal and N(0,1/N) diagonal; GOE N(0,1/N) and
/// N(0,2/N); GSE quaternionic with component variance 1/(4N) off-diagonal
/// and N(0,1/(2N)) diagonal, returned in the 2N-dimensional complex
/// representation.
pub fn sample_gaussian(kind: GaussKind, n: usize, stream: &mut Stream) -> CMat {
    match kind {
        GaussKind::Gue => {
            let mut m = CMat::zeros(n, n);
            let s_off = (1.0 / (2.0 * n as f64)).sqrt();
            let s_diag = (1.0 / n as f64).sqrt();
            for i in 0..n {
                m[(i, i)] = C64::new(s_diag * stream.next_normal(), 0.0);
                for j in i + 1..n {
                    let z = C64::new(
                        s_off * stream.next_normal(),
                        s_off * stream.next_normal(),
                    );
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
            m
        }
        GaussKind::Goe => {
            let mut m = CMat::zeros(n, n);
            let s_off = (1.0 / n as f64).sqrt();
            let s_diag = (2.0 / n as f64).sqrt();
            for i in 0..n {
                m[(i, i)] = C64::new(s_diag * stream.next_normal(), 0.0);
                for j in i + 1..n {
                    let v = C64::new(s_off * stream.next_normal(), 0.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        }
        GaussKind::Gse => {
            let s_off = (1.0 / (4.0 * n as f64)).sqrt();
            let s_diag = (1.0 / (2.0 * n as f64)).sqrt();
            let mut q = vec![Quat::ZERO; n * n];
            for i in 0..n {
                q[i * n + i] = Quat {
                    w: s_diag * stream.next_normal(),
                    x: 0.0,
                    y: 0.0,
                    z: 0.0,
                };
                for j in i + 1..n {
                    let v = Quat {
                        w: s_off * stream.next_normal(),
                        x: s_off * stream.next_normal(),
                        y: s_off * stream.next_normal(),
                        z: s_off * stream.next_normal(),
                    };
                    q[i * n + j] = v;
                    q[j * n + i] = v.conj();
                }
            }
            embed_quaternion_matrix(&q, n)
        }
    }
}

/// Haar-distributed element of U(N), O(N), or Sp(N); the symplectic case is
/// returned in the 2N-dimensional complex representation. QR of a Ginibre
/// matrix with diagonal phase correction (quaternionic Gram-Schmidt for Sp).
pub fn sample_haar(kind: HaarKind, n: usize, stream: &mut Stream) -> CMat {
    match kind {
        HaarKind::Unitary => {
            let z = CMat::from_fn(n, n, |_, _| {
                C64::new(stream.next_normal(), stream.next_normal())
            });
            haar_from_ginibre(z)
        }
        HaarKind::Orthogonal => {
            let z = CMat::from_fn(n, n, |_, _| C64::new(stream.next_normal(), 0.0));
            haar_from_ginibre(z)
        }
        HaarKind::Symplectic => {
            let mut q = vec![Quat::ZERO; n * n];
            for entry in q.iter_mut() {
                *entry = Quat {
                    w: stream.next_normal(),
                    x: stream.next_normal(),
                    y: stream.next_normal(),
                    z: stream.next_normal(),
                };
            }
            let ortho = quaternion_gram_schmidt(q, n);
            embed_quaternion_matrix(&ortho, n)
        }
    }
}

fn haar_from_ginibre(z: CMat) -> CMat {
    let n = z.nrows();
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[derive(Clone, Copy, Debug)]
struct Quat {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Quat {
    const ZERO: Quat = Quat {
        w: 0.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    fn conj(self) -> Quat {
        Quat {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    fn mul(self, o: Quat) -> Quat {
        Quat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    fn add_assign(&mut self, o: Quat) {
        self.w += o.w;
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }

    fn scale(self, s: f64) -> Quat {
        Quat {
            w: self.w * s,
            x: self.x * s,
            y: self.y * s,
            z: self.z * s,
        }
    }

    fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }
}

/// Modified Gram-Schmidt over the right quaternionic module H^n.
fn quaternion_gram_schmidt(mut a: Vec<Quat>, n: usize) -> Vec<Quat> {
    for k in 0..n {
        for j in 0..k {
            // c = <q_j, a_k> = sum_i conj(q[i,j]) a[i,k]
            let mut c = Quat::ZERO;
            for i in 0..n {
                c.add_assign(a[i * n + j].conj().mul(a[i * n + k]));
            }
            for i in 0..n {
                let sub = a[i * n + j].mul(c).scale(-1.0);
                a[i * n + k].add_assign(sub);
            }
        }
        let norm = (0..n)
            .map(|i| a[i * n + k].norm_sqr())
            .sum::<f64>()
            .sqrt();
        let inv = 1.0 / norm;
        for i in 0..n {
            a[i * n + k] = a[i * n + k].scale(inv);
        }
    }
    a
}

/// M_N(H) -> M_{2N}(C) via 1 -> I, i -> diag(i,-i), j -> [[0,1],[-1,0]],
/// k -> [[0,i],[i,0]].
fn embed_quaternion_matrix(q: &[Quat], n: usize) -> CMat {
    let mut m = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = q[i * n + j];
            m[(2 * i, 2 * j)] = C64::new(v.w, v.x);
            m[(2 * i, 2 * j + 1)] = C64::new(v.y, v.z);
            m[(2 * i + 1, 2 * j)] = C64::new(-v.y, v.z);
            m[(2 * i + 1, 2 * j + 1)] = C64::new(v.w, -v.x);
        }
    }
    m
}

/// P(matrices): sum over terms of coefficient ⊗ word product. The adjoint
/// letter applies the conjugate transpose.
pub fn assemble(p: &NCPoly, mats: &[CMat]) -> Result<CMat> {
    if mats.len() != p.alphabet_size as usize {
        return Err(Error::DimensionMismatch(format!(
            "polynomial over {} generators, got {} matrices",
            p.alphabet_size,
            mats.len()
        )));
    }
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    for m in mats {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(
                "all generator matrices must share one square dimension".into(),
            ));
        }
    }
    let d = p.coeff_dim;
    let mut out = CMat::zeros(d * n, d * n);
    for (w, b) in &p.terms {
        let mut word_mat = CMat::identity(n, n);
        for l in &w.0 {
            let g = &mats[(l.gen - 1) as usize];
            if l.star {
                word_mat = word_mat * g.adjoint();
            } else {
                word_mat = word_mat * g;
            }
        }
        let bc = CMat::from_fn(d, d, |i, j| {
            let c = b.get(i, j);
            C64::new(rat_to_f64(&c.re), rat_to_f64(&c.im))
        });
        out += kron(&bc, &word_mat);
    }
    Ok(out)
}

/// Normalized trace of a word in sampled matrices.
pub fn word_trace(mats: &[CMat], word: &crate::ncpoly::Word) -> C64 {
    let n = mats.first().map(|m| m.nrows()).unwrap_or(0);
    let mut acc = CMat::identity(n, n);
    for l in &word.0 {
        let g = &mats[(l.gen - 1) as usize];
        if l.star {
            acc = acc * g.adjoint();
        } else {
            acc = acc * g;
        }
    }
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        tr += acc[(i, i)];
    }
    tr / C64::new(n as f64, 0.0)
}

/// G_i ⊗ I and I ⊗ G~_i from independent GUE draws: 2r matrices of
/// dimension N^2.
pub fn hayes_sample(r: usize, n: usize, seed: u64, replica: u64) -> Result<Vec<CMat>> {
    if n * n > crate::linalg::DENSE_DIM_CAP {
        return Err(Error::SizeCap(format!(
            "hayes dimension {} exceeds the cap",
            n * n
        )));
    }
    let eye = CMat::identity(n, n);
    let mut out = Vec::with_capacity(2 * r);
    for idx in 0..r {
        let mut s = Stream::new(seed, replica, idx as u64);
        let g = sample_gaussian(GaussKind::Gue, n, &mut s);
        out.push(kron(&g, &eye));
    }
    for idx in 0..r {
        let mut s = Stream::new(seed, replica, (r + idx) as u64);
        let g = sample_gaussian(GaussKind::Gue, n, &mut s);
        out.push(kron(&eye, &g));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// experiment plumbing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSpec {
    pub ensemble: EnsembleId,
    pub n: usize,
    /// None means the raw single-matrix ensemble (alphabet size 1).
    pub poly: Option<NCPoly>,
    pub replicas: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn alphabet(&self) -> usize {
        self.poly
            .as_ref()
            .map(|p| p.alphabet_size as usize)
            .unwrap_or(1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCount {
    pub threshold: f64,
    pub hits: usize,
    pub replicas: usize,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalStats {
    pub mean: f64,
    pub variance: f64,
    pub median: f64,
    pub quantiles: Vec<(f64, f64)>,
    pub standard_error: f64,
    pub tail_counts: Vec<TailCount>,
}

/// Wilson 95% interval for a binomial proportion.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl EmpiricalStats {
    pub fn from_samples(samples: &[f64], thresholds: &[f64]) -> EmpiricalStats {
        let n = samples.len().max(1);
        let mean = samples.iter().sum::<f64>() / n as f64;
        let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / (n as f64 - 1.0).max(1.0);
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantile = |p: f64| -> f64 {
            if sorted.is_empty() {
                return f64::NAN;
            }
            let idx = ((sorted.len() as f64 - 1.0) * p).round() as usize;
            sorted[idx]
        };
        let tail_counts = thresholds
            .iter()
            .map(|&t| {
                let hits = samples.iter().filter(|&&x| x >= t).count();
                let (lo, hi) = wilson_interval(hits, samples.len());
                TailCount {
                    threshold: t,
                    hits,
                    replicas: samples.len(),
                    frequency: hits as f64 / samples.len().max(1) as f64,
                    wilson_lo: lo,
                    wilson_hi: hi,
                }
            })
            .collect();
        EmpiricalStats {
            mean,
            variance,
            median: quantile(0.5),
            quantiles: [0.05, 0.25, 0.5, 0.75, 0.95]
                .iter()
                .map(|&p| (p, quantile(p)))
                .collect(),
            standard_error: (variance / n as f64).sqrt(),
            tail_counts,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplicaOutput {
    pub replica: u64,
    pub norm: f64,
    pub iterative_norm: bool,
    pub stat: Option<f64>,
}

fn sample_ensemble_matrices(
    ensemble: EnsembleId,
    alphabet: usize,
    n: usize,
    seed: u64,
    replica: u64,
) -> Result<Vec<CMat>> {
    let mut out = Vec::with_capacity(alphabet);
    match ensemble {
        EnsembleId::Gue | EnsembleId::Goe | EnsembleId::Gse => {
            let kind = match ensemble {
                EnsembleId::Gue => GaussKind::Gue,
                EnsembleId::Goe => GaussKind::Goe,
                _ => GaussKind::Gse,
            };
            for idx in 0..alphabet {
                let mut s = Stream::new(seed, replica, idx as u64);
                out.push(sample_gaussian(kind, n, &mut s));
            }
        }
        EnsembleId::HaarU | EnsembleId::HaarO | EnsembleId::HaarSp => {
            let kind = match ensemble {
                EnsembleId::HaarU => HaarKind::Unitary,
                EnsembleId::HaarO => HaarKind::Orthogonal,
                _ => HaarKind::Symplectic,
            };
            for idx in 0..alphabet {
                let mut s = Stream::new(seed, replica, idx as u64);
                out.push(sample_haar(kind, n, &mut s));
            }
        }
        EnsembleId::HayesGue => {
            if alphabet % 2 != 0 {
                return Err(Error::Domain(
                    "hayes model needs an even alphabet (r pairs)".into(),
                ));
            }
            return hayes_sample(alphabet / 2, n, seed, replica);
        }
    }
    Ok(out)
}

/// Sample matrices for every replica, assemble X = P(matrices), and record
/// the operator norm plus an optional polynomial spectral statistic.
pub fn run_samples(spec: &SampleSpec, stat: Option<&crate::poly::Poly>) -> Result<Vec<ReplicaOutput>> {
    if spec.replicas < 1 {
        return Err(Error::Domain("replicas must be >= 1".into()));
    }
    let alphabet = spec.alphabet();
    let outputs: Vec<Result<ReplicaOutput>> = (0..spec.replicas as u64)
        .into_par_iter()
        .map(|replica| {
            let mats =
                sample_ensemble_matrices(spec.ensemble, alphabet, spec.n, spec.seed, replica)?;
            let x = match &spec.poly {
                Some(p) => assemble(p, &mats)?,
                None => mats[0].clone(),
            };
            let norm = op_norm_detailed(&x)?;
            let stat_value = match stat {
                Some(h) => Some(trace_stat(|t| h.eval_f64(t), &x)?),
                None => None,
            };
            Ok(ReplicaOutput {
                replica,
                norm: norm.value,
                iterative_norm: norm.iterative,
                stat: stat_value,
            })
        })
        .collect();
    outputs.into_iter().collect()
}

/// Empirical frequency of ||X|| >= (1+eps) * norm_target, with Wilson CI.
pub fn tail_probability(
    spec: &SampleSpec,
    eps: f64,
    norm_target: f64,
) -> Result<EmpiricalStats> {
    let outputs = run_samples(spec, None)?;
    let norms: Vec<f64> = outputs.iter().map(|o| o.norm).collect();
    Ok(EmpiricalStats::from_samples(
        &norms,
        &[(1.0 + eps) * norm_target],
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub replicas: usize,
    pub median: f64,
    pub rows: Vec<TailCount>,
    /// fitted b in log freq = a - b eps^2 over nonzero frequencies
    pub fitted_exponent: Option<f64>,
}

/// Deviation frequencies |norm - median| > eps over a grid, plus a
/// Gaussian-tail exponent fit.
pub fn concentration_probe(spec: &SampleSpec, eps_grid: &[f64]) -> Result<ConcentrationReport> {
    if spec.replicas < 1000 {
        return Err(Error::Domain(
            "concentration probe needs >= 1000 replicas".into(),
        ));
    }
    let outputs = run_samples(spec, None)?;
    let norms: Vec<f64> = outputs.iter().map(|o| o.norm).collect();
    let stats = EmpiricalStats::from_samples(&norms, &[]);
    let median = stats.median;
    let rows: Vec<TailCount> = eps_grid
        .iter()
        .map(|&eps| {
            let hits = norms.iter().filter(|&&x| (x - median).abs() > eps).count();
            let (lo, hi) = wilson_interval(hits, norms.len());
            TailCount {
                threshold: eps,
                hits,
                replicas: norms.len(),
                frequency: hits as f64 / norms.len() as f64,
                wilson_lo: lo,
                wilson_hi: hi,
            }
        })
        .collect();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.hits > 0 && r.frequency < 1.0)
        .map(|r| (r.threshold * r.threshold, r.frequency.ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let det = n * sxx - sx * sx;
        if det.abs() > 1e-30 {
            Some(-(n * sxy - sx * sy) / det)
        } else {
            None
        }
    } else {
        None
    };
    Ok(ConcentrationReport {
        n: spec.n,
        replicas: spec.replicas,
        median,
        rows,
        fitted_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::Word;

    #[test]
    fn gaussian_matrices_self_adjoint() {
        for kind in [GaussKind::Gue, GaussKind::Goe, GaussKind::Gse] {
            let mut s = Stream::new(1, 0, 0);
            let m = sample_gaussian(kind, 20, &mut s);
            assert!(
                crate::linalg::hermitian_deviation(&m) < 1e-14,
                "{kind:?}"
            );
        }
    }

    #[test]
    fn gse_spectrum_doubled() {
        let mut s = Stream::new(5, 0, 0);
        let m = sample_gaussian(GaussKind::Gse, 12, &mut s);
        let vals = crate::linalg::spectrum(&m).unwrap();
        for pair in vals.chunks(2) {
            assert!((pair[0] - pair[1]).abs() < 1e-8, "{pair:?}");
        }
    }

    #[test]
    fn haar_matrices_unitary() {
        for kind in [HaarKind::Unitary, HaarKind::Orthogonal, HaarKind::Symplectic] {
            let mut s = Stream::new(2, 0, 0);
            let u = sample_haar(kind, 12, &mut s);
            let dim = u.nrows();
            let gram = u.adjoint() * &u;
            let eye = CMat::identity(dim, dim);
            let dev = (gram - eye).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-12, "{kind:?}: {dev}");
        }
    }

    #[test]
    fn symplectic_preserves_quaternion_structure() {
        // J conj(M) J^{-1} = M for the 2N complex representation
        let n = 8;
        let mut s = Stream::new(9, 0, 0);
        let m = sample_haar(HaarKind::Symplectic, n, &mut s);
        let mut j = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(2 * i, 2 * i + 1)] = C64::new(1.0, 0.0);
            j[(2 * i + 1, 2 * i)] = C64::new(-1.0, 0.0);
        }
        let conj = m.map(|c| c.conj());
        let recovered = &j * conj * -&j; // J^{-1} = -J
        let dev = (&recovered - &m).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn assemble_identity_and_self_adjointness() {
        let p = NCPoly::identity(1, 2);
        let mut s = Stream::new(3, 0, 0);
        let g = sample_gaussian(GaussKind::Gue, 6, &mut s);
        let x = assemble(&p, std::slice::from_ref(&g)).unwrap();
        let eye = CMat::identity(12, 12);
        let dev = (&x - &eye).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-14);
        // self-adjoint polynomial assembles to a self-adjoint matrix
        let sa = NCPoly::gaussian_generator(1, 1, 1);
        let y = assemble(&sa, std::slice::from_ref(&g)).unwrap();
        assert!(crate::linalg::hermitian_deviation(&y) < 1e-13);
    }

    #[test]
    fn determinism_same_spec() {
        let spec = SampleSpec {
            ensemble: EnsembleId::Gue,
            n: 24,
            poly: None,
            replicas: 8,
            seed: 11,
        };
        let a = run_samples(&spec, None).unwrap();
        let b = run_samples(&spec, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.norm.to_bits(), y.norm.to_bits());
        }
    }

    #[test]
    fn hayes_tensor_legs_commute() {
        let mats = hayes_sample(1, 8, 7, 0).unwrap();
        let comm = &mats[0] * &mats[1] - &mats[1] * &mats[0];
        let dev = comm.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-13, "{dev}");
        // tr((G ⊗ I)(I ⊗ H)) = tr G tr H exactly (normalized)
        let prod_tr = word_trace(&mats, &Word::parse("1,2").unwrap());
        let t1 = word_trace(&mats[..1], &Word::parse("1").unwrap());
        let m2 = [mats[1].clone()];
        let t2 = word_trace(&m2, &Word::parse("1").unwrap());
        assert!((prod_tr - t1 * t2).norm() < 1e-12);
    }

    #[test]
    fn wilson_basic() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo < 1e-12 && hi < 0.05, "({lo}, {hi})");
        let (lo2, hi2) = wilson_interval(50, 100);
        assert!(lo2 < 0.5 && 0.5 < hi2);
    }
}
