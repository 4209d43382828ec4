//! Exact genus expansion for the Gaussian ensembles: expected normalized
//! traces of words and of polynomial spectral statistics as exact
//! polynomials in x = 1/N, with GSE obtained from GOE through duality at
//! x = -1/(2N).
//!
//! Loop counting runs on half-edge identifications: every word position
//! carries a left and a right index slot, the trace chains right slots to
//! the next left slot, and each Wick pair identifies slots straight
//! (unitary case) or with a twist (orthogonal case). The number of free
//! index loops is the number of connected classes.

use crate::ncpoly::{ncp_apply_poly, free_semicircular_moment, NCPoly};
use crate::poly::Poly;
use crate::rat::{rat_frac, CRat, Rat};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

/// Hard cap on word length for gluing enumeration.
pub const WORD_LEN_CAP: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub enum Gaussian {
    Gue,
    Goe,
}

#[derive(Clone, Debug)]
pub struct GenusPoly {
    pub poly: Poly,
    pub ensemble: Gaussian,
}

struct UnionFind {
    parent: [u8; 2 * WORD_LEN_CAP],
}

impl UnionFind {
    fn new(n: usize) -> Self {
        let mut parent = [0u8; 2 * WORD_LEN_CAP];
        for (i, p) in parent.iter_mut().enumerate().take(n) {
            *p = i as u8;
        }
        UnionFind { parent }
    }

    fn find(&mut self, mut i: u8) -> u8 {
        while self.parent[i as usize] != i {
            let up = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = up;
            i = up;
        }
        i
    }

    fn union(&mut self, a: u8, b: u8) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Count index loops for a complete gluing. `pairs` entries are
/// (position s, position t, twisted).
fn loop_count(k: usize, pairs: &[(u8, u8, bool)]) -> usize {
    // slots: 2t = left index of position t, 2t+1 = right index
    let mut uf = UnionFind::new(2 * k);
    for t in 0..k {
        uf.union(2 * t as u8 + 1, (2 * ((t + 1) % k)) as u8);
    }
    for &(s, t, twisted) in pairs {
        if twisted {
            uf.union(2 * s, 2 * t);
            uf.union(2 * s + 1, 2 * t + 1);
        } else {
            uf.union(2 * s, 2 * t + 1);
            uf.union(2 * s + 1, 2 * t);
        }
    }
    let mut roots = [false; 2 * WORD_LEN_CAP];
    let mut count = 0;
    for i in 0..2 * k as u8 {
        let r = uf.find(i);
        if !roots[r as usize] {
            roots[r as usize] = true;
            count += 1;
        }
    }
    count
}

fn enumerate_gluings(
    labels: &[u32],
    twists: bool,
    matched: &mut Vec<bool>,
    pairs: &mut Vec<(u8, u8, bool)>,
    counts: &mut Vec<BigInt>,
) {
    let k = labels.len();
    let first = match matched.iter().position(|&m| !m) {
        Some(i) => i,
        None => {
            let loops = loop_count(k, pairs);
            let exponent = k / 2 + 1 - loops;
            counts[exponent] += 1u32;
            return;
        }
    };
    matched[first] = true;
    for j in first + 1..k {
        if matched[j] || labels[j] != labels[first] {
            continue;
        }
        matched[j] = true;
        for &tw in if twists { &[false, true][..] } else { &[false][..] } {
            pairs.push((first as u8, j as u8, tw));
            enumerate_gluings(labels, twists, matched, pairs, counts);
            pairs.pop();
        }
        matched[j] = false;
    }
    matched[first] = false;
}

fn word_polynomial(labels: &[u32], ensemble: Gaussian) -> Result<Poly> {
    let k = labels.len();
    if k > WORD_LEN_CAP {
        return Err(Error::SizeCap(format!(
            "word length {k} exceeds the gluing cap {WORD_LEN_CAP}"
        )));
    }
    if k % 2 == 1 {
        return Ok(Poly::zero());
    }
    if k == 0 {
        return Ok(Poly::one());
    }
    let mut counts = vec![BigInt::zero(); k / 2 + 1];
    let mut matched = vec![false; k];
    let mut pairs = Vec::with_capacity(k / 2);
    enumerate_gluings(
        labels,
        ensemble == Gaussian::Goe,
        &mut matched,
        &mut pairs,
        &mut counts,
    );
    Ok(Poly::from_coeffs(
        counts.into_iter().map(Rat::from_integer).collect(),
    ))
}

/// Canonical form under cyclic rotation, reversal, and generator
/// relabeling; expected traces of Gaussian words are invariant under all
/// three.
fn canonical_labels(labels: &[u32]) -> Vec<u32> {
    let k = labels.len();
    if k == 0 {
        return vec![];
    }
    let relabel = |seq: &[u32]| -> Vec<u32> {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut next = 1u32;
        seq.iter()
            .map(|&g| {
                *map.entry(g).or_insert_with(|| {
                    let v = next;
                    next += 1;
                    v
                })
            })
            .collect()
    };
    let mut best: Option<Vec<u32>> = None;
    let mut consider = |seq: Vec<u32>| {
        let c = relabel(&seq);
        if best.as_ref().map(|b| c < *b).unwrap_or(true) {
            best = Some(c);
        }
    };
    let rev: Vec<u32> = labels.iter().rev().copied().collect();
    for rot in 0..k {
        let mut a = labels.to_vec();
        a.rotate_left(rot);
        consider(a);
        let mut b = rev.clone();
        b.rotate_left(rot);
        consider(b);
    }
    best.unwrap()
}

fn word_poly_cache() -> &'static Mutex<HashMap<(Vec<u32>, Gaussian), Poly>> {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<u32>, Gaussian), Poly>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_word_polynomial(labels: &[u32], ensemble: Gaussian) -> Result<Poly> {
    let key = (canonical_labels(labels), ensemble);
    if let Some(p) = word_poly_cache().lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let p = word_polynomial(&key.0, ensemble)?;
    word_poly_cache()
        .lock()
        .unwrap()
        .insert(key, p.clone());
    Ok(p)
}

/// E[tr G_{i1} ... G_{ik}] for GUE as an exact polynomial in x = 1/N.
pub fn gue_word_polynomial(labels: &[u32]) -> Result<GenusPoly> {
    Ok(GenusPoly {
        poly: cached_word_polynomial(labels, Gaussian::Gue)?,
        ensemble: Gaussian::Gue,
    })
}

/// E[tr G_{i1} ... G_{ik}] for GOE as an exact polynomial in x = 1/N.
pub fn goe_word_polynomial(labels: &[u32]) -> Result<GenusPoly> {
    Ok(GenusPoly {
        poly: cached_word_polynomial(labels, Gaussian::Goe)?,
        ensemble: Gaussian::Goe,
    })
}

/// GSE expectation by supersymmetric duality: the GOE polynomial evaluated
/// at x = -1/(2N).
pub fn gse_expectation(labels: &[u32], n: u64) -> Result<Rat> {
    if n < 1 {
        return Err(Error::Domain("N must be >= 1".into()));
    }
    let phi = goe_word_polynomial(labels)?;
    Ok(phi.poly.eval(&rat_frac(-1, 2 * n as i64)))
}

/// Phi_h with E[tr h(P(G))] = Phi_h(1/N) (GUE, where also Phi_h(-1/N)
/// matches) or Phi_h(1/N) (GOE, with the GSE value at -1/(2N)).
pub fn spectral_statistic_poly(
    ensemble: Gaussian,
    p: &NCPoly,
    h: &Poly,
) -> Result<GenusPoly> {
    if p.has_star() {
        return Err(Error::Domain(
            "Gaussian ensembles take star-free polynomials".into(),
        ));
    }
    let hp = ncp_apply_poly(h, p)?;
    let mut acc_re = Poly::zero();
    let mut acc_im = Poly::zero();
    for (w, m) in &hp.terms {
        let labels = w.labels()?;
        let wp = cached_word_polynomial(&labels, ensemble)?;
        if wp.is_zero() {
            continue;
        }
        let t: CRat = m.ntrace();
        if !t.re.is_zero() {
            acc_re = acc_re.add(&wp.scale(&t.re));
        }
        if !t.im.is_zero() {
            acc_im = acc_im.add(&wp.scale(&t.im));
        }
    }
    if !acc_im.is_zero() {
        return Err(Error::NotSelfAdjoint(
            "spectral statistic has nonzero imaginary part".into(),
        ));
    }
    Ok(GenusPoly {
        poly: acc_re,
        ensemble,
    })
}

/// Constant term of the GUE encoding against the free-probability engine;
/// the two must agree exactly.
pub fn nu0_crosscheck(p: &NCPoly, h: &Poly) -> Result<Rat> {
    let phi = spectral_statistic_poly(Gaussian::Gue, p, h)?;
    let genus_value = phi.poly.coeff(0);
    let hp = ncp_apply_poly(h, p)?;
    let mut free_value = Rat::zero();
    for (w, m) in &hp.terms {
        let tau = free_semicircular_moment(w)?;
        if !tau.is_zero() {
            let t = m.ntrace();
            free_value += t.re * tau;
        }
    }
    if genus_value != free_value {
        return Err(Error::Inconsistency(format!(
            "nu_0 mismatch: genus constant {} vs free moment {}",
            genus_value, free_value
        )));
    }
    Ok(genus_value)
}

/// Exact E[tr G_{i1} ... G_{ik}] by brute-force summation over all index
/// tuples with the ensemble's entry covariances. Independent of the gluing
/// route; used as an oracle.
pub fn entry_level_expectation(ensemble: Gaussian, labels: &[u32], n: u64) -> Result<Rat> {
    let k = labels.len();
    if k == 0 {
        return Ok(Rat::one());
    }
    if k % 2 == 1 {
        return Ok(Rat::zero());
    }
    if n.pow(k as u32) > 4_000_000 {
        return Err(Error::SizeCap(format!(
            "entry-level oracle needs N^k <= 4e6, got {n}^{k}"
        )));
    }
    // collect label-matching pairings of positions
    let mut matchings: Vec<Vec<(usize, usize)>> = vec![];
    let mut matched = vec![false; k];
    let mut current = vec![];
    collect_matchings(labels, &mut matched, &mut current, &mut matchings);
    let nn = n as usize;
    let mut tuple = vec![0usize; k];
    let mut total = BigInt::zero();
    loop {
        // entries: position t has (row, col) = (a_t, a_{t+1})
        for m in &matchings {
            let mut weight = BigInt::one();
            for &(s, t) in m {
                let (rs, cs) = (tuple[s], tuple[(s + 1) % k]);
                let (rt, ct) = (tuple[t], tuple[(t + 1) % k]);
                let straight = (rs == ct && cs == rt) as u32;
                let w = match ensemble {
                    Gaussian::Gue => straight,
                    Gaussian::Goe => straight + ((rs == rt && cs == ct) as u32),
                };
                if w == 0 {
                    weight = BigInt::zero();
                    break;
                }
                weight *= w;
            }
            total += weight;
        }
        // next tuple
        let mut pos = 0;
        loop {
            if pos == k {
                let denom = BigInt::from(n).pow(k as u32 / 2 + 1);
                return Ok(Rat::new(total, denom));
            }
            tuple[pos] += 1;
            if tuple[pos] < nn {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

fn collect_matchings(
    labels: &[u32],
    matched: &mut Vec<bool>,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    let first = match matched.iter().position(|&m| !m) {
        Some(i) => i,
        None => {
            out.push(current.clone());
            return;
        }
    };
    matched[first] = true;
    for j in first + 1..labels.len() {
        if matched[j] || labels[j] != labels[first] {
            continue;
        }
        matched[j] = true;
        current.push((first, j));
        collect_matchings(labels, matched, current, out);
        current.pop();
        matched[j] = false;
    }
    matched[first] = false;
}

/// E[tr G^{2p}] for a single GUE matrix as a polynomial in x = 1/N, by the
/// Harer-Zagier three-term recurrence:
/// (p+2) m_{p+1} = (4p+2) m_p + p (4p^2 - 1) x^2 m_{p-1}.
pub fn gue_power_trace_polys(p_max: usize) -> Vec<Poly> {
    let mut out = Vec::with_capacity(p_max + 1);
    out.push(Poly::one());
    if p_max == 0 {
        return out;
    }
    out.push(Poly::one());
    for p in 1..p_max {
        let a = out[p].scale(&rat_frac(4 * p as i64 + 2, p as i64 + 2));
        let b = out[p - 1]
            .mul(&Poly::monomial(Rat::one(), 2))
            .scale(&rat_frac(
                p as i64 * (4 * (p as i64) * (p as i64) - 1),
                p as i64 + 2,
            ));
        out.push(a.add(&b));
    }
    out
}

/// Phi_h for the canonical single-GUE statistic P = 1 ⊗ x_1, valid for any
/// polynomial degree (no gluing enumeration).
pub fn gue_single_generator_stat_poly(h: &Poly) -> Poly {
    let deg = h.degree();
    let hz = gue_power_trace_polys(deg / 2);
    let mut acc = Poly::zero();
    for (k, c) in h.coeffs().iter().enumerate() {
        if c.is_zero() || k % 2 == 1 {
            continue;
        }
        acc = acc.add(&hz[k / 2].scale(c));
    }
    // constant term of h contributes E tr(c I) = c
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::{NCPoly, Word};
    use crate::rat::rat_i64;

    #[test]
    fn gue_basic_words() {
        assert_eq!(gue_word_polynomial(&[1, 1]).unwrap().poly, Poly::one());
        assert_eq!(
            gue_word_polynomial(&[1, 1, 1, 1]).unwrap().poly,
            Poly::from_i64(&[2, 0, 1])
        );
        assert_eq!(
            gue_word_polynomial(&[1, 2, 1, 2]).unwrap().poly,
            Poly::from_i64(&[0, 0, 1])
        );
        assert!(gue_word_polynomial(&[1, 1, 1]).unwrap().poly.is_zero());
    }

    #[test]
    fn goe_basic_words() {
        assert_eq!(
            goe_word_polynomial(&[1, 1]).unwrap().poly,
            Poly::from_i64(&[1, 1])
        );
        assert!(goe_word_polynomial(&[1]).unwrap().poly.is_zero());
    }

    #[test]
    fn gse_duality_values() {
        // [1,1] at N=4: 1 - 1/8
        let v = gse_expectation(&[1, 1], 4).unwrap();
        assert_eq!(v, rat_frac(7, 8));
        assert_eq!(gse_expectation(&[1, 1, 1], 10).unwrap(), rat_i64(0));
    }

    #[test]
    fn entry_level_oracle_matches_gluings() {
        // every word of length <= 6 over two letters, N in {2, 3}
        for len in [2usize, 4, 6] {
            for code in 0..(1u32 << len.min(6)) {
                let labels: Vec<u32> =
                    (0..len).map(|i| 1 + ((code >> i) & 1)).collect();
                for n in [2u64, 3] {
                    let x = rat_frac(1, n as i64);
                    for ens in [Gaussian::Gue, Gaussian::Goe] {
                        let poly = cached_word_polynomial(&labels, ens).unwrap();
                        let direct = entry_level_expectation(ens, &labels, n).unwrap();
                        assert_eq!(
                            poly.eval(&x),
                            direct,
                            "{labels:?} {ens:?} N={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gue_parity_of_word_polys() {
        for labels in [
            vec![1, 1, 1, 1, 1, 1],
            vec![1, 2, 1, 2, 2, 2],
            vec![1, 2, 2, 1, 2, 2, 1, 1],
        ] {
            let p = gue_word_polynomial(&labels).unwrap().poly;
            assert!(p.is_even(), "{labels:?} -> {p:?}");
        }
    }

    #[test]
    fn constant_terms_are_free_moments() {
        for labels in [vec![1, 1, 1, 1], vec![1, 2, 1, 2], vec![1, 2, 2, 1]] {
            let w = Word(
                labels
                    .iter()
                    .map(|&g| crate::ncpoly::Letter::new(g, false))
                    .collect(),
            );
            let free = free_semicircular_moment(&w).unwrap();
            for ens in [Gaussian::Gue, Gaussian::Goe] {
                let p = cached_word_polynomial(&labels, ens).unwrap();
                assert_eq!(p.coeff(0), free, "{labels:?} {ens:?}");
            }
        }
    }

    #[test]
    fn statistic_poly_examples() {
        let p = NCPoly::gaussian_generator(1, 1, 1);
        let h2 = Poly::from_i64(&[0, 0, 1]);
        let phi = spectral_statistic_poly(Gaussian::Gue, &p, &h2).unwrap();
        assert_eq!(phi.poly, Poly::one());
        let h4 = Poly::from_i64(&[0, 0, 0, 0, 1]);
        let phi4 = spectral_statistic_poly(Gaussian::Gue, &p, &h4).unwrap();
        assert_eq!(phi4.poly, Poly::from_i64(&[2, 0, 1]));
        let phig = spectral_statistic_poly(Gaussian::Goe, &p, &h2).unwrap();
        assert_eq!(phig.poly, Poly::from_i64(&[1, 1]));
    }

    #[test]
    fn nu0_crosscheck_examples() {
        let p = NCPoly::gaussian_generator(1, 1, 1);
        let h4 = Poly::from_i64(&[0, 0, 0, 0, 1]);
        assert_eq!(nu0_crosscheck(&p, &h4).unwrap(), rat_i64(2));
    }

    #[test]
    fn harer_zagier_matches_enumeration() {
        let hz = gue_power_trace_polys(5);
        for p in 1..=5usize {
            let labels = vec![1u32; 2 * p];
            let direct = gue_word_polynomial(&labels).unwrap().poly;
            assert_eq!(hz[p], direct, "p={p}");
        }
    }

    #[test]
    fn single_generator_stat_matches_general_path() {
        let p = NCPoly::gaussian_generator(1, 1, 1);
        let h = Poly::from_i64(&[3, 0, -2, 0, 1, 0, 5]);
        let fast = gue_single_generator_stat_poly(&h);
        let slow = spectral_statistic_poly(Gaussian::Gue, &p, &h).unwrap().poly;
        assert_eq!(fast, slow);
    }

    #[test]
    fn length_cap_enforced() {
        let labels = vec![1u32; 18];
        assert!(matches!(
            gue_word_polynomial(&labels),
            Err(Error::SizeCap(_))
        ));
    }
}
