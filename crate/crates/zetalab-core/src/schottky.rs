//! Three-funnel Schottky surfaces and their zeta functions via dynamical
//! Fredholm determinants.
//!
//! The group is free on two hyperbolic generators in a reflection-symmetric
//! configuration on the real line, so every nontrivial cyclically reduced
//! word is hyperbolic and conjugacy classes are plain necklaces — no Dehn
//! machinery needed. The Selberg zeta Z(s) comes out of the Plemelj-Smithies
//! cycle expansion det(1 - L_s) = sum b_k, whose coefficients decay
//! superexponentially, so Z is evaluable far outside the Euler-product
//! half-plane — in particular at s = 0 where the order finder runs.

use crate::group::{translation_length, GroupElement, GroupError, Letter, Word};
use crate::hp::{tol_quarter, Cplx, Mat2};
use crate::spectrum::{cluster_classes, LengthSpectrum, SpectrumError};
use crate::zeta::{ZetaEvaluation, ZetaKind};
use rayon::prelude::*;
use rug::Float;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

pub const DEFAULT_WORD_BUDGET: u64 = 5_000_000;
pub const DEFAULT_MAX_ORDER: u32 = 12;

#[derive(Error, Debug)]
pub enum SchottkyError {
    #[error("NotHyperbolic: trace parameter {t} needs |t| > 2")]
    NotHyperbolic { t: f64 },
    #[error("DisksOverlap: minimal disk gap {gap} is not positive at t = {t}")]
    DisksOverlap { t: f64, gap: f64 },
    #[error("ConstructionFailed: {detail}")]
    ConstructionFailed { detail: String },
    #[error("BudgetExceeded: period-{n} enumeration passed {budget} words")]
    BudgetExceeded { n: u32, budget: u64 },
    #[error("NonDecayingTail: |b_{n}| has not decayed below |b_{half}|")]
    NonDecayingTail { n: u32, half: u32 },
    #[error("PoleAtPoint: |Z(s+1)| below tolerance, ratio undefined")]
    PoleAtPoint,
    #[error("ZeroNotFound: Z has no sign change on [{lo}, {hi}]")]
    ZeroNotFound { lo: f64, hi: f64 },
    #[error("BadConfig: {detail}")]
    BadConfig { detail: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// One necklace of admissible symbols with its geodesic data. `rotations`
/// counts the distinct cyclic rotations, so summing it over all necklaces of
/// period n reproduces the fixed-point count of the n-th shift power.
#[derive(Clone, Debug)]
pub struct PeriodicOrbitDatum {
    pub word: Word,
    pub rotations: u32,
    /// Translation length of the word's matrix, repetitions included.
    pub displacement: Float,
}

#[derive(Clone, Debug)]
struct CachedOrbit {
    rotations: u32,
    displacement: Float,
    /// 1 / (1 - e^{-displacement}), the s-independent part of a trace term.
    boost: Float,
}

/// Free two-generator Schottky group uniformized by four disjoint isometric
/// disks on the real line; the quotient is a three-funneled sphere.
#[derive(Debug)]
pub struct SchottkyGroup {
    pub name: String,
    pub trace_parameter: f64,
    pub generators: Vec<GroupElement>,
    /// Letter matrices indexed like `Letter`: a1, A1, b1, B1.
    pub letter_mats: Vec<Mat2>,
    /// Isometric disk (center, radius) on the real line per letter index.
    pub disks: Vec<(Float, Float)>,
    pub min_gap: Float,
    pub precision_bits: u32,
    pub word_budget: u64,
    /// Lazily grown per-period orbit tables shared across evaluations.
    orbit_cache: Mutex<Vec<Arc<Vec<CachedOrbit>>>>,
}

fn letter_of_symbol(sym: u8) -> Letter {
    Letter::new(sym / 2, sym % 2 == 1)
}

fn word_of_symbols(syms: &[u8]) -> Word {
    Word(syms.iter().map(|&s| letter_of_symbol(s)).collect())
}

impl SchottkyGroup {
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.name.as_bytes());
        h.update(format!("{}", self.trace_parameter).as_bytes());
        for m in &self.letter_mats {
            for c in [&m.a, &m.b, &m.c, &m.d] {
                h.update(c.re.to_string_radix(16, None).as_bytes());
            }
        }
        let out = h.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn symbol_matrix(&self, sym: u8) -> &Mat2 {
        &self.letter_mats[sym as usize]
    }

    fn word_matrix(&self, syms: &[u8]) -> Mat2 {
        let mut m = self.symbol_matrix(syms[0]).clone();
        for &s in &syms[1..] {
            m = m.mul(self.symbol_matrix(s));
        }
        m
    }
}

fn mobius(m: &Mat2, z: &Cplx) -> Cplx {
    m.a.mul(z).add(&m.b).div(&m.c.mul(z).add(&m.d))
}

/// Build the symmetric three-funnel group with both generator traces equal
/// to t. The first generator has fixed points -3 and -1, the second (its
/// mirror image) 1 and 3; isometric disks shrink toward the fixed points as
/// t grows and collide below t = 10/3.
pub fn build_schottky(t: f64, precision_bits: u32) -> Result<SchottkyGroup, SchottkyError> {
    if !(t > 2.0) {
        return Err(SchottkyError::NotHyperbolic { t });
    }
    let prec = precision_bits;
    let p = Float::with_val(prec, t) / 2u32;
    let q = (p.clone() * &p - 1u32).sqrt();
    let re = |f: Float| Cplx::from_real(f);
    // a = S m S^{-1} with m = [[p,q],[q,p]] and S the translation z -> z - 2
    let a = Mat2::new(
        re(p.clone() - 2u32 * q.clone()),
        re(q.clone() * -3),
        re(q.clone()),
        re(p.clone() + 2u32 * q.clone()),
    );
    // mirror image under z -> -z
    let b = Mat2::new(a.a.clone(), a.b.neg(), a.c.neg(), a.d.clone());
    let letter_mats = vec![
        a.clone(),
        a.inverse_unit_det(),
        b.clone(),
        b.inverse_unit_det(),
    ];
    // isometric circle of [[a,b],[c,d]]: center -d/c, radius 1/|c|
    let mut disks = Vec::new();
    for m in &letter_mats {
        let c = m.c.re.clone();
        if c.is_zero() {
            return Err(SchottkyError::ConstructionFailed {
                detail: "letter acts affinely, no isometric disk".into(),
            });
        }
        let center = -(m.d.re.clone() / &c);
        let radius = c.abs().recip();
        disks.push((center, radius));
    }
    let mut min_gap: Option<Float> = None;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let gap = (disks[i].0.clone() - &disks[j].0).abs() - &disks[i].1 - &disks[j].1;
            if min_gap.as_ref().is_none_or(|g| gap < *g) {
                min_gap = Some(gap);
            }
        }
    }
    let min_gap = min_gap.unwrap();
    if !(min_gap.clone().signum() == 1u32) {
        return Err(SchottkyError::DisksOverlap {
            t,
            gap: min_gap.to_f64(),
        });
    }
    let group = SchottkyGroup {
        name: "schottky-three-funnel".into(),
        trace_parameter: t,
        generators: vec![GroupElement::new(a.clone()), GroupElement::new(b.clone())],
        letter_mats,
        disks,
        min_gap,
        precision_bits: prec,
        word_budget: DEFAULT_WORD_BUDGET,
        orbit_cache: Mutex::new(Vec::new()),
    };
    // each letter maps the boundary of its disk onto the boundary of its
    // inverse's disk; spot-check on sampled boundary points
    let tol = tol_quarter(prec);
    for sym in 0..4u8 {
        let m = group.symbol_matrix(sym);
        let (c, r) = &group.disks[sym as usize];
        let (ci, ri) = &group.disks[(sym ^ 1) as usize];
        for k in 0..12 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
            let z = Cplx::new(
                c.clone() + r.clone() * Float::with_val(prec, theta.cos()),
                r.clone() * Float::with_val(prec, theta.sin()),
            );
            let w = mobius(m, &z);
            let dist = w.sub(&Cplx::from_real(ci.clone())).abs();
            if Float::with_val(prec, dist - ri) .abs() > tol {
                return Err(SchottkyError::ConstructionFailed {
                    detail: format!("boundary map check failed for letter {sym}"),
                });
            }
        }
    }
    // free group sanity: the commutator must itself be hyperbolic
    let comm = a
        .mul(&b)
        .mul(&a.inverse_unit_det())
        .mul(&b.inverse_unit_det());
    if comm.trace().abs() <= Float::with_val(prec, 2) {
        return Err(SchottkyError::ConstructionFailed {
            detail: "commutator is not hyperbolic".into(),
        });
    }
    Ok(group)
}

/// Cyclically admissible symbol strings of length n, keyed by their minimal
/// rotation, with the number of distinct rotations of each.
fn enumerate_necklaces(n: u32, budget: u64) -> Result<BTreeMap<Vec<u8>, u32>, SchottkyError> {
    let n = n as usize;
    let mut counts: BTreeMap<Vec<u8>, u32> = BTreeMap::new();
    let mut stack: Vec<u8> = Vec::with_capacity(n);
    let mut seen: u64 = 0;
    fn min_rotation(w: &[u8]) -> Vec<u8> {
        let n = w.len();
        let mut best = 0usize;
        for i in 1..n {
            for k in 0..n {
                let (x, y) = (w[(i + k) % n], w[(best + k) % n]);
                if x != y {
                    if x < y {
                        best = i;
                    }
                    break;
                }
            }
        }
        (0..n).map(|k| w[(best + k) % n]).collect()
    }
    fn dfs(
        stack: &mut Vec<u8>,
        n: usize,
        seen: &mut u64,
        budget: u64,
        counts: &mut BTreeMap<Vec<u8>, u32>,
    ) -> Result<(), SchottkyError> {
        if stack.len() == n {
            // wrap-around admissibility makes the word cyclic
            if stack[0] != stack[n - 1] ^ 1 {
                *seen += 1;
                if *seen > budget {
                    return Err(SchottkyError::BudgetExceeded {
                        n: n as u32,
                        budget,
                    });
                }
                *counts.entry(min_rotation(stack)).or_insert(0) += 1;
            }
            return Ok(());
        }
        for sym in 0..4u8 {
            if let Some(&last) = stack.last() {
                if sym == last ^ 1 {
                    continue;
                }
            }
            stack.push(sym);
            dfs(stack, n, seen, budget, counts)?;
            stack.pop();
        }
        Ok(())
    }
    dfs(&mut stack, n, &mut seen, budget, &mut counts)?;
    Ok(counts)
}

/// All period-n orbits of the shift (fixed points of sigma^n grouped by
/// necklace), including repetitions of shorter words.
pub fn periodic_words(
    group: &SchottkyGroup,
    n: u32,
) -> Result<Vec<PeriodicOrbitDatum>, SchottkyError> {
    assert!(n >= 1);
    let necklaces = enumerate_necklaces(n, group.word_budget)?;
    necklaces
        .into_iter()
        .map(|(syms, rotations)| {
            let g = GroupElement::new(group.word_matrix(&syms));
            Ok(PeriodicOrbitDatum {
                word: word_of_symbols(&syms),
                rotations,
                displacement: translation_length(&g)?,
            })
        })
        .collect()
}

impl SchottkyGroup {
    /// Snapshot of the period-n orbit table, built on first use.
    fn orbit_level(&self, n: u32) -> Result<Arc<Vec<CachedOrbit>>, SchottkyError> {
        let mut cache = self.orbit_cache.lock().unwrap();
        while (cache.len() as u32) < n {
            let level = cache.len() as u32 + 1;
            let necklaces = enumerate_necklaces(level, self.word_budget)?;
            let prec = self.precision_bits;
            let entries: Result<Vec<CachedOrbit>, SchottkyError> = necklaces
                .into_iter()
                .map(|(syms, rotations)| {
                    let g = GroupElement::new(self.word_matrix(&syms));
                    let ell = translation_length(&g)?;
                    let boost = (Float::with_val(prec, 1)
                        - (-ell.clone()).exp())
                    .recip();
                    Ok(CachedOrbit {
                        rotations,
                        displacement: ell,
                        boost,
                    })
                })
                .collect();
            cache.push(Arc::new(entries?));
        }
        Ok(cache[n as usize - 1].clone())
    }
}

/// Transfer-operator trace t_n(s) = sum over fixed points w of sigma^n of
/// e^{-s l(w)} / (1 - e^{-l(w)}).
pub fn transfer_trace(group: &SchottkyGroup, s: &Cplx, n: u32) -> Result<Cplx, SchottkyError> {
    assert!(n >= 1);
    let level = group.orbit_level(n)?;
    let prec = s.prec();
    // parallel map, strictly ordered reduction for determinism
    let terms: Vec<Cplx> = level
        .par_iter()
        .map(|o| {
            let w = s.mul_real(&o.displacement).neg().exp();
            let scale = Float::with_val(prec, o.rotations) * &o.boost;
            w.mul_real(&scale)
        })
        .collect();
    let mut total = Cplx::zero(prec);
    for t in terms {
        total = total.add(&t);
    }
    Ok(total)
}

/// Plemelj-Smithies coefficients b_0..b_N of det(1 - L_s):
/// b_0 = 1, b_k = -(1/k) sum_{j=1}^{k} t_j(s) b_{k-j}.
pub fn fredholm_coefficients(
    group: &SchottkyGroup,
    s: &Cplx,
    n_max: u32,
) -> Result<Vec<Cplx>, SchottkyError> {
    let prec = s.prec();
    let traces: Vec<Cplx> = (1..=n_max)
        .map(|n| transfer_trace(group, s, n))
        .collect::<Result<_, _>>()?;
    let mut b = vec![Cplx::one(prec)];
    for k in 1..=n_max as usize {
        let mut acc = Cplx::zero(prec);
        for j in 1..=k {
            acc = acc.add(&traces[j - 1].mul(&b[k - j]));
        }
        let scale = Float::with_val(prec, -1) / Float::with_val(prec, k);
        b.push(acc.mul_real(&scale));
    }
    Ok(b)
}

/// Selberg zeta Z(s) of the Schottky quotient as the order-N cycle
/// expansion of det(1 - L_s).
pub fn fredholm_determinant(
    group: &SchottkyGroup,
    s: &Cplx,
    n_max: u32,
) -> Result<ZetaEvaluation, SchottkyError> {
    assert!(n_max >= 1);
    let prec = s.prec();
    let b = fredholm_coefficients(group, s, n_max)?;
    let n = n_max as usize;
    if n_max >= 2 && b[n].abs() >= b[n / 2].abs() {
        return Err(SchottkyError::NonDecayingTail {
            n: n_max,
            half: n_max / 2,
        });
    }
    let mut value = Cplx::zero(prec);
    for bk in &b {
        value = value.add(bk);
    }
    let bound = Float::with_val(prec, b[n].abs() + b[n - 1].abs());
    Ok(ZetaEvaluation {
        s: s.clone(),
        log_value: value.ln(),
        value,
        truncation_bound: bound,
        kind: ZetaKind::SchottkyDeterminant(n_max),
        source: group.digest(),
        skipped_factors: 0,
    })
}

/// Ruelle zeta of the Schottky flow via zeta_R(s) = Z(s)/Z(s+1), defined
/// wherever the denominator determinant is nonzero.
pub fn schottky_ruelle(
    group: &SchottkyGroup,
    s: &Cplx,
    n_max: u32,
) -> Result<ZetaEvaluation, SchottkyError> {
    let prec = s.prec();
    let zs = fredholm_determinant(group, s, n_max)?;
    let s1 = s.add(&Cplx::one(prec));
    let zs1 = fredholm_determinant(group, &s1, n_max)?;
    if zs1.value.abs() < tol_quarter(prec) {
        return Err(SchottkyError::PoleAtPoint);
    }
    let value = zs.value.div(&zs1.value);
    let log_value = zs.log_value.sub(&zs1.log_value);
    // log-domain errors of numerator and denominator add
    let bound = zs.truncation_bound / zs.value.abs() + zs1.truncation_bound / zs1.value.abs();
    Ok(ZetaEvaluation {
        s: s.clone(),
        value,
        log_value,
        truncation_bound: bound,
        kind: ZetaKind::Ruelle,
        source: group.digest(),
        skipped_factors: zs.skipped_factors + zs1.skipped_factors,
    })
}

/// Primitive conjugacy classes of word length <= max_word_len as a length
/// spectrum, the Euler-product oracle for the determinants. Per-depth
/// minimal displacements increase with depth in this family, so the listing
/// is complete for every length up to the deepest level's minimum; entries
/// above that are still exact, the spectrum is just marked incomplete.
pub fn primitive_spectrum(
    group: &SchottkyGroup,
    max_word_len: u32,
) -> Result<LengthSpectrum, SchottkyError> {
    let prec = group.precision_bits;
    let mut classes: Vec<(Float, Word)> = Vec::new();
    for n in 1..=max_word_len {
        for orbit in periodic_words(group, n)? {
            if orbit.word.is_proper_power() {
                continue;
            }
            classes.push((orbit.displacement, orbit.word));
        }
    }
    let entries = cluster_classes(classes, prec)?;
    let cutoff = entries.last().map(|e| e.length.to_f64()).unwrap_or(0.0);
    Ok(LengthSpectrum {
        entries,
        cutoff,
        group_name: group.name.clone(),
        group_id: group.digest(),
        precision_bits: prec,
        complete: false,
    })
}

/// Largest real zero of Z on [lo, hi] (the first one met coming down from
/// hi), by scan and bisection on the real axis where Z is real-valued.
pub fn first_real_zero(
    group: &SchottkyGroup,
    n_max: u32,
    lo: f64,
    hi: f64,
) -> Result<Float, SchottkyError> {
    assert!(lo < hi);
    let prec = group.precision_bits;
    let z_re = |x: &Float| -> Result<Float, SchottkyError> {
        let s = Cplx::from_real(x.clone());
        Ok(fredholm_determinant(group, &s, n_max)?.value.re)
    };
    let step = 0.02f64.min((hi - lo) / 8.0);
    let mut a = Float::with_val(prec, hi);
    let mut fa = z_re(&a)?;
    let mut bracket = None;
    while a.to_f64() - step >= lo - 1e-12 {
        let b = a.clone() - Float::with_val(prec, step);
        let fb = z_re(&b)?;
        if (fa.clone() * &fb).signum() < 0u32 {
            bracket = Some((b, a));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut left, mut right) = bracket.ok_or(SchottkyError::ZeroNotFound { lo, hi })?;
    let f_right = z_re(&right)?;
    for _ in 0..80 {
        let mid = (left.clone() + &right) / 2u32;
        let fm = z_re(&mid)?;
        if (fm * &f_right).signum() < 0u32 {
            left = mid;
        } else {
            right = mid;
        }
    }
    Ok((left + &right) / 2u32)
}

/// Plain-text `key = value` run configuration for the Schottky pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct SchottkyConfig {
    pub trace_parameter: f64,
    pub precision_bits: u32,
    pub max_order: u32,
    pub word_budget: u64,
}

impl Default for SchottkyConfig {
    fn default() -> Self {
        SchottkyConfig {
            trace_parameter: 6.0,
            precision_bits: 200,
            max_order: DEFAULT_MAX_ORDER,
            word_budget: DEFAULT_WORD_BUDGET,
        }
    }
}

pub fn parse_config(text: &str) -> Result<SchottkyConfig, SchottkyError> {
    let mut cfg = SchottkyConfig::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| SchottkyError::BadConfig {
            detail: format!("line {}: expected `key = value`", lineno + 1),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |detail: String| SchottkyError::BadConfig { detail };
        match key {
            "trace_parameter" => {
                cfg.trace_parameter = value
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad real `{value}`", lineno + 1)))?
            }
            "precision_bits" => {
                cfg.precision_bits = value
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad integer `{value}`", lineno + 1)))?
            }
            "max_order" => {
                cfg.max_order = value
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad integer `{value}`", lineno + 1)))?
            }
            "word_budget" => {
                cfg.word_budget = value
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad integer `{value}`", lineno + 1)))?
            }
            other => {
                return Err(bad(format!("line {}: unknown key `{other}`", lineno + 1)));
            }
        }
    }
    Ok(cfg)
}

pub fn build_from_config(cfg: &SchottkyConfig) -> Result<SchottkyGroup, SchottkyError> {
    let mut group = build_schottky(cfg.trace_parameter, cfg.precision_bits)?;
    group.word_budget = cfg.word_budget;
    Ok(group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::selberg_product;

    const PREC: u32 = 200;

    fn t6() -> SchottkyGroup {
        build_schottky(6.0, PREC).unwrap()
    }

    #[test]
    fn t6_geometry_against_fixed_points() {
        let g = t6();
        assert!(g.min_gap.to_f64() > 1.0);
        // generator a: fixed points are exactly -1 and -3 by construction;
        // solve c z^2 + (d - a) z - b = 0 independently
        let m = &g.letter_mats[0];
        let (a, b, c, d) = (
            m.a.re.to_f64(),
            m.b.re.to_f64(),
            m.c.re.to_f64(),
            m.d.re.to_f64(),
        );
        let disc = ((d - a) * (d - a) + 4.0 * c * b).sqrt();
        let mut fps = [((a - d) + disc) / (2.0 * c), ((a - d) - disc) / (2.0 * c)];
        fps.sort_by(f64::total_cmp);
        assert!((fps[0] + 3.0).abs() < 1e-12 && (fps[1] + 1.0).abs() < 1e-12);
        // repelling fixed point (|derivative| > 1) sits inside the letter's
        // own isometric disk, the attracting one inside its partner's
        let deriv = |z: f64| 1.0 / ((c * z + d) * (c * z + d));
        let (repel, attract) = if deriv(fps[0]).abs() > 1.0 {
            (fps[0], fps[1])
        } else {
            (fps[1], fps[0])
        };
        let inside = |disk: &(Float, Float), z: f64| (z - disk.0.to_f64()).abs() < disk.1.to_f64();
        assert!(inside(&g.disks[0], repel));
        assert!(inside(&g.disks[1], attract));
        // mirror symmetry of the second generator's disks
        assert!((g.disks[2].0.to_f64() + g.disks[0].0.to_f64()).abs() < 1e-30);
    }

    #[test]
    fn parabolic_and_overlapping_rejected() {
        assert!(matches!(
            build_schottky(2.0, PREC),
            Err(SchottkyError::NotHyperbolic { .. })
        ));
        assert!(matches!(
            build_schottky(3.0, PREC),
            Err(SchottkyError::DisksOverlap { .. })
        ));
        // the symmetric family closes up exactly at t = 10/3
        assert!(build_schottky(10.0 / 3.0 + 1e-6, PREC).is_ok());
        assert!(build_schottky(10.0 / 3.0 - 1e-6, PREC).is_err());
    }

    #[test]
    fn commutator_is_hyperbolic() {
        let g = t6();
        let a = &g.letter_mats[0];
        let b = &g.letter_mats[2];
        let comm = a
            .mul(b)
            .mul(&a.inverse_unit_det())
            .mul(&b.inverse_unit_det());
        assert!(comm.trace().abs().to_f64() > 2.0);
    }

    #[test]
    fn fixed_point_counts_match_admissibility_matrix() {
        // trace of the n-th power of the 4x4 admissibility matrix is
        // 3^n + (-1)^n + 2
        let g = t6();
        for n in 1..=6u32 {
            let words = periodic_words(&g, n).unwrap();
            let total: u64 = words.iter().map(|w| w.rotations as u64).sum();
            let expect = 3u64.pow(n) as i64 + (-1i64).pow(n) + 2;
            assert_eq!(total as i64, expect, "period {n}");
        }
        assert_eq!(periodic_words(&g, 1).unwrap().len(), 4);
        assert_eq!(
            periodic_words(&g, 2)
                .unwrap()
                .iter()
                .map(|w| w.rotations as u64)
                .sum::<u64>(),
            12
        );
    }

    #[test]
    fn period_one_words_are_the_letters() {
        let g = t6();
        let words = periodic_words(&g, 1).unwrap();
        let toks: Vec<String> = words.iter().map(|w| w.word.tokens()).collect();
        assert_eq!(toks, ["a1", "A1", "b1", "B1"]);
        // all four letters share the displacement 2 arccosh(t/2)
        let ell = Float::with_val(PREC, 3).acosh() * 2u32;
        for w in &words {
            assert!((w.displacement.clone() - &ell).abs().to_f64() < 1e-50);
        }
    }

    #[test]
    fn displacement_is_rotation_invariant() {
        let g = t6();
        let syms = [0u8, 0, 2, 1, 2];
        let base = translation_length(&GroupElement::new(g.word_matrix(&syms))).unwrap();
        for r in 1..syms.len() {
            let rot: Vec<u8> = (0..syms.len()).map(|i| syms[(i + r) % syms.len()]).collect();
            let ell = translation_length(&GroupElement::new(g.word_matrix(&rot))).unwrap();
            assert!((ell - &base).abs().to_f64() < 1e-50);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut g = t6();
        g.word_budget = 10;
        assert!(matches!(
            periodic_words(&g, 5),
            Err(SchottkyError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn trace_formula_spot_checks() {
        // single hypothetical fixed point with l = 1 at s = 0
        let v = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((v - 1.5819767).abs() < 1e-7);
        // t_1 at s = 1 against a hand summation: all four letters have
        // l = 2 ln(3 + 2 sqrt 2), so e^{-l} = 17 - 12 sqrt 2
        let g = t6();
        let s = Cplx::one(PREC);
        let t1 = transfer_trace(&g, &s, 1).unwrap();
        let e = Float::with_val(PREC, 17) - Float::with_val(PREC, 2).sqrt() * 12u32;
        let hand = 4u32 * e.clone() / (Float::with_val(PREC, 1) - &e);
        assert!((t1.re - hand).abs().to_f64() < 1e-50);
        assert!(t1.im.to_f64().abs() < 1e-50);
    }

    #[test]
    fn trace_conjugate_symmetry() {
        let g = t6();
        let s = Cplx::with_val(PREC, 0.7, 1.3);
        for n in 1..=4 {
            let t = transfer_trace(&g, &s, n).unwrap();
            let tc = transfer_trace(&g, &s.conj(), n).unwrap();
            assert!(t.conj().sub(&tc).abs().to_f64() < 1e-50);
        }
    }

    #[test]
    fn low_order_determinants_by_hand() {
        let g = t6();
        let s = Cplx::with_val(PREC, 1.2, 0.4);
        let t1 = transfer_trace(&g, &s, 1).unwrap();
        let t2 = transfer_trace(&g, &s, 2).unwrap();
        let d1 = fredholm_determinant(&g, &s, 1).unwrap();
        assert!(d1.value.sub(&Cplx::one(PREC).sub(&t1)).abs().to_f64() < 1e-55);
        let d2 = fredholm_determinant(&g, &s, 2).unwrap();
        let hand = Cplx::one(PREC)
            .sub(&t1)
            .add(&t1.mul(&t1).sub(&t2).mul_real(&Float::with_val(PREC, 0.5)));
        assert!(d2.value.sub(&hand).abs().to_f64() < 1e-55);
    }

    #[test]
    fn coefficients_decay_superexponentially() {
        let g = t6();
        let s = Cplx::with_val(PREC, 1.5, 0.0);
        let b = fredholm_coefficients(&g, &s, 12).unwrap();
        let logs: Vec<f64> = b[1..].iter().map(|x| x.abs().to_f64().log10()).collect();
        for w in logs.windows(2) {
            assert!(w[1] < w[0], "|b_k| must decrease: {logs:?}");
        }
        // much faster than exponential: log10|b_N| < -N^2/8 + C with C
        // anchored at N = 4 plus unit margin
        let c = logs[3] + 16.0 / 8.0 + 1.0;
        for (i, l) in logs.iter().enumerate().skip(3) {
            let n = (i + 1) as f64;
            assert!(*l < -n * n / 8.0 + c, "N={n}: {l}");
        }
    }

    #[test]
    fn determinant_euler_product_cross_check() {
        let g = t6();
        let spec = primitive_spectrum(&g, 8).unwrap();
        for (re, im) in [(1.5, 0.0), (2.0, 0.0), (1.5, 0.5)] {
            let s = Cplx::with_val(PREC, re, im);
            let det = fredholm_determinant(&g, &s, 8).unwrap();
            let euler = selberg_product(&spec, &s, 40);
            let diff = det.log_value.sub(&euler.log_value).abs().to_f64();
            let allowed = det.truncation_bound.to_f64() + 1e-20;
            assert!(diff <= allowed, "s=({re},{im}): diff {diff} > {allowed}");
        }
    }

    #[test]
    fn ruelle_matches_euler_product_and_conjugates() {
        let g = t6();
        let spec = primitive_spectrum(&g, 8).unwrap();
        let s = Cplx::with_val(PREC, 1.5, 0.3);
        let zr = schottky_ruelle(&g, &s, 8).unwrap();
        let euler = crate::zeta::ruelle_product(&spec, &s);
        let diff = zr.log_value.sub(&euler.log_value).abs().to_f64();
        assert!(diff <= zr.truncation_bound.to_f64() + 1e-18, "diff {diff}");
        let zc = schottky_ruelle(&g, &s.conj(), 8).unwrap();
        assert!(zr.value.conj().sub(&zc.value).abs().to_f64() < 1e-40);
    }

    #[test]
    fn real_point_above_delta_is_real_nonzero() {
        let g = t6();
        let delta = first_real_zero(&g, 10, 0.05, 1.4).unwrap();
        let d = delta.to_f64();
        assert!(d > 0.1 && d < 0.5, "delta = {d}");
        let s = Cplx::with_val(PREC, d + 0.2, 0.0);
        let zr = schottky_ruelle(&g, &s, 10).unwrap();
        assert!(zr.value.im.to_f64().abs() < 1e-40);
        assert!(zr.value.re.to_f64().abs() > 1e-6);
    }

    #[test]
    fn zero_location_stable_in_truncation_order() {
        let g = t6();
        let d8 = first_real_zero(&g, 8, 0.05, 1.4).unwrap();
        let d10 = first_real_zero(&g, 10, 0.05, 1.4).unwrap();
        let shift = (d8 - &d10).abs().to_f64();
        // the zero moves by far less than ten times the truncation bound
        // ratio between the two expansions
        let s = Cplx::new(d10.clone(), Float::new(PREC));
        let b8 = fredholm_determinant(&g, &s, 8).unwrap().truncation_bound;
        assert!(shift < 10.0 * b8.to_f64(), "shift {shift}");
    }

    #[test]
    fn config_round_trip_and_errors() {
        let cfg = parse_config(
            "# three funnels\ntrace_parameter = 6.0\nprecision_bits = 160\nmax_order = 10\nword_budget = 100000\n",
        )
        .unwrap();
        assert_eq!(
            cfg,
            SchottkyConfig {
                trace_parameter: 6.0,
                precision_bits: 160,
                max_order: 10,
                word_budget: 100000,
            }
        );
        assert_eq!(parse_config("").unwrap(), SchottkyConfig::default());
        assert!(matches!(
            parse_config("trace_parameter: 6"),
            Err(SchottkyError::BadConfig { .. })
        ));
        assert!(matches!(
            parse_config("unknown_key = 1"),
            Err(SchottkyError::BadConfig { .. })
        ));
        let g = build_from_config(&cfg).unwrap();
        assert_eq!(g.precision_bits, 160);
        assert_eq!(g.word_budget, 100000);
    }
}
