//! Primitive length-spectrum enumeration with pruned word search, a
//! brute-force oracle, geodesic counting, and file persistence.
//!
//! The enumeration is two-stage: a fast f64 depth-first scan over cyclically
//! reduced words collects candidates below the cutoff (with a conservative
//! margin), and survivors are recomputed at full precision. Deduplication is
//! group-aware: candidates are normalized by Dehn reduction plus the closure
//! under rotations and half-relator swaps, which identifies free-cyclic words
//! that are conjugate through the surface relator.

use crate::group::{
    conjugacy_orbit, dehn_reduce, orbit_primitive, translation_length,
    FuchsianGroup, GroupElement, GroupError, Letter, RelatorTable, Word,
};
use crate::hp::{tol_half, tol_quarter, Mat2};
use rayon::prelude::*;
use rug::Float;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write as _};
use std::path::Path;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum SpectrumError {
    /// Two distinct canonical words have lengths too close to certify equal
    /// or distinct at the working precision.
    #[error("PrecisionExhausted: lengths {l1} and {l2} cannot be certified equal or distinct")]
    PrecisionExhausted { l1: f64, l2: f64 },
    /// Brute-force word budget exhausted.
    #[error("BudgetExceeded: more than {budget} words required")]
    BudgetExceeded { budget: u64 },
    /// counting_function called beyond the spectrum cutoff.
    #[error("CutoffExceeded: L = {l} exceeds spectrum cutoff {cutoff}")]
    CutoffExceeded { l: f64, cutoff: f64 },
    /// Malformed spectrum file.
    #[error("FormatError: {0}")]
    FormatError(String),
    /// Spectrum file belongs to a different group (strict load).
    #[error("DigestMismatch: file digest {found} != group digest {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One clustered spectrum line: a geodesic length, how many primitive
/// conjugacy classes share it, and a canonical representative word.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub length: Float,
    pub multiplicity: u32,
    pub word: Word,
}

/// Sorted primitive length spectrum up to a cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthSpectrum {
    pub entries: Vec<SpectrumEntry>,
    pub cutoff: f64,
    pub group_name: String,
    pub group_id: String,
    pub precision_bits: u32,
    pub complete: bool,
}

impl LengthSpectrum {
    pub fn systole(&self) -> Option<&Float> {
        self.entries.first().map(|e| &e.length)
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity as u64).sum()
    }
}

/// Number of primitive classes (with multiplicity) of length <= L.
pub fn counting_function(spec: &LengthSpectrum, l: f64) -> Result<u64, SpectrumError> {
    if l > spec.cutoff {
        return Err(SpectrumError::CutoffExceeded {
            l,
            cutoff: spec.cutoff,
        });
    }
    Ok(spec
        .entries
        .iter()
        .filter(|e| e.length.to_f64() <= l)
        .map(|e| e.multiplicity as u64)
        .sum())
}

// ---------------------------------------------------------------------------
// f64 scan stage
// ---------------------------------------------------------------------------

/// 2x2 complex matrix as [are, aim, bre, bim, cre, cim, dre, dim].
type M8 = [f64; 8];

fn m8_mul(p: &M8, q: &M8) -> M8 {
    #[inline]
    fn cm(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
        (xr * yr - xi * yi, xr * yi + xi * yr)
    }
    let (aa, ab) = (cm(p[0], p[1], q[0], q[1]), cm(p[2], p[3], q[4], q[5]));
    let (ba, bb) = (cm(p[0], p[1], q[2], q[3]), cm(p[2], p[3], q[6], q[7]));
    let (ca, cb) = (cm(p[4], p[5], q[0], q[1]), cm(p[6], p[7], q[4], q[5]));
    let (da, db) = (cm(p[4], p[5], q[2], q[3]), cm(p[6], p[7], q[6], q[7]));
    [
        aa.0 + ab.0,
        aa.1 + ab.1,
        ba.0 + bb.0,
        ba.1 + bb.1,
        ca.0 + cb.0,
        ca.1 + cb.1,
        da.0 + db.0,
        da.1 + db.1,
    ]
}

/// Largest singular value of a unit-determinant matrix:
/// sigma^2 = (E + sqrt(E^2 - 4))/2 with E the squared Frobenius norm.
fn sigma_max(m: &M8) -> f64 {
    let e: f64 = m.iter().map(|x| x * x).sum();
    let disc = (e * e - 4.0).max(0.0);
    (0.5 * (e + disc.sqrt())).sqrt()
}

fn letter_mats_f64(group: &FuchsianGroup) -> Vec<M8> {
    let n = group.generators.len() * 2;
    (0..n)
        .map(|i| {
            let l = Letter::new((i / 2) as u8, i % 2 == 1);
            let e = group.letter_matrix(l).to_f64();
            [
                e[0].0, e[0].1, e[1].0, e[1].1, e[2].0, e[2].1, e[3].0, e[3].1,
            ]
        })
        .collect()
}

struct ScanParams {
    nmax: usize,
    /// |trace| acceptance threshold (cutoff plus margin).
    tmax: f64,
    /// Some((displacement budget, log Lambda)) enables the certified prune.
    prune: Option<(f64, f64)>,
    node_budget: Option<u64>,
}

struct Shard {
    words: Vec<(f64, Vec<u8>)>,
    nodes: u64,
}

fn dfs(
    mats: &[M8],
    p: &ScanParams,
    path: &mut Vec<u8>,
    m: M8,
    out: &mut Shard,
) -> Result<(), SpectrumError> {
    out.nodes += 1;
    if let Some(b) = p.node_budget {
        if out.nodes > b {
            return Err(SpectrumError::BudgetExceeded { budget: b });
        }
    }
    let n = path.len();
    // cyclically reduced leaves only: first letter must not cancel the last
    if path[0] != path[n - 1] ^ 1 {
        let t = (m[0] + m[6]).abs();
        if t > 2.0 && t <= p.tmax {
            out.words.push((2.0 * (t / 2.0).acosh(), path.clone()));
        }
    }
    if n < p.nmax {
        if let Some((budget, log_lam)) = p.prune {
            // every completion of k more letters keeps displacement at least
            // 2(ln sigma_max - k ln Lambda); prune when that exceeds budget
            let k = (p.nmax - n) as f64;
            if 2.0 * (sigma_max(&m).ln() - k * log_lam) > budget {
                return Ok(());
            }
        }
        let forbid = path[n - 1] ^ 1;
        for l in 0..mats.len() as u8 {
            if l != forbid {
                path.push(l);
                let r = dfs(mats, p, path, m8_mul(&m, &mats[l as usize]), out);
                path.pop();
                r?;
            }
        }
    }
    Ok(())
}

/// Scan all cyclically reduced words up to depth nmax, sharded by first
/// letter and merged in letter order (deterministic regardless of
/// scheduling).
fn scan(mats: &[M8], p: &ScanParams) -> Result<(Vec<(f64, Vec<u8>)>, u64), SpectrumError> {
    let shards: Vec<Result<Shard, SpectrumError>> = (0..mats.len() as u8)
        .into_par_iter()
        .map(|l0| {
            let mut shard = Shard {
                words: Vec::new(),
                nodes: 0,
            };
            let mut path = vec![l0];
            dfs(mats, p, &mut path, mats[l0 as usize], &mut shard)?;
            Ok(shard)
        })
        .collect();
    let mut words = Vec::new();
    let mut nodes = 0;
    for s in shards {
        let s = s?;
        words.extend(s.words);
        nodes += s.nodes;
    }
    Ok((words, nodes))
}

fn word_from_indices(idx: &[u8]) -> Word {
    Word(
        idx.iter()
            .map(|&i| Letter::new(i / 2, i % 2 == 1))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// shared enumeration pipeline
// ---------------------------------------------------------------------------

/// Displacement budget: a class of length <= cutoff has a representative
/// whose axis meets the fundamental polygon, so some rotation of some
/// minimal word moves the origin by at most cutoff + 2 R + 2 ln 2, with R
/// the circumradius of the regular 4g-gon.
fn displacement_budget(genus: u32, cutoff: f64) -> f64 {
    let r = {
        let t = (std::f64::consts::PI / (4.0 * genus as f64)).tan();
        (1.0 / (t * t)).acosh()
    };
    cutoff + 2.0 * r + 2.0 * std::f64::consts::LN_2 + 0.25
}

fn log_lambda(mats: &[M8]) -> f64 {
    mats.iter()
        .map(|m| sigma_max(m).ln())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Run the adaptive-depth scan. The depth is increased until the three
/// deepest levels contain no in-range geodesic word (a word whose cyclic
/// Dehn-reduced length equals its own length), which empirically bounds the
/// word length needed at this cutoff with a three-level safety margin.
fn adaptive_scan(
    group: &FuchsianGroup,
    rt: &RelatorTable,
    cutoff: f64,
    pruned: bool,
    node_budget: Option<u64>,
) -> Result<Vec<(f64, Vec<u8>)>, SpectrumError> {
    let mats = letter_mats_f64(group);
    let tmax = 2.0 * (cutoff / 2.0).cosh() * (1.0 + 1e-9) + 1e-9;
    let prune = pruned.then(|| (displacement_budget(group.genus, cutoff), log_lambda(&mats)));
    let mut nmax = (cutoff.ceil() as usize).max(1) + 3;
    loop {
        let p = ScanParams {
            nmax,
            tmax,
            prune,
            node_budget,
        };
        let (words, _) = scan(&mats, &p)?;
        // deepest word length that still carries an in-range geodesic word
        let mut needed = 0usize;
        for (ell, idx) in &words {
            if *ell <= cutoff + 1e-9 && idx.len() > needed {
                let w = word_from_indices(idx);
                if dehn_reduce(&w, rt).len() == idx.len() {
                    needed = idx.len();
                }
            }
        }
        if nmax >= needed + 3 {
            return Ok(words);
        }
        nmax = needed + 3;
    }
}

fn word_matrix_at(group: &FuchsianGroup, w: &Word, prec: u32) -> Mat2 {
    let mut m = Mat2::identity(prec);
    for &l in &w.0 {
        m = m.mul(&group.letter_matrix(l).to_prec(prec));
    }
    m
}

/// Cluster sorted (length, word) classes into multiplicity buckets.
/// Lengths within 2^(-prec/2) are certified equal; gaps above 2^(-prec/4)
/// are certified distinct; anything between is ambiguous.
pub(crate) fn cluster_classes(
    mut classes: Vec<(Float, Word)>,
    prec: u32,
) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    classes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    let equal = tol_half(prec);
    let distinct = tol_quarter(prec);
    let mut entries: Vec<SpectrumEntry> = Vec::new();
    for (len, word) in classes {
        match entries.last_mut() {
            Some(e) => {
                let diff = len.clone() - &e.length;
                if diff <= equal {
                    e.multiplicity += 1;
                    if word < e.word {
                        e.word = word;
                    }
                } else if diff <= distinct {
                    return Err(SpectrumError::PrecisionExhausted {
                        l1: e.length.to_f64(),
                        l2: len.to_f64(),
                    });
                } else {
                    entries.push(SpectrumEntry {
                        length: len,
                        multiplicity: 1,
                        word,
                    });
                }
            }
            None => entries.push(SpectrumEntry {
                length: len,
                multiplicity: 1,
                word,
            }),
        }
    }
    Ok(entries)
}

fn spectrum_from_candidates(
    group: &FuchsianGroup,
    rt: &RelatorTable,
    candidates: Vec<(f64, Vec<u8>)>,
    cutoff: f64,
    prec: u32,
) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    // free-cyclic dedup first (cheap), then group-conjugacy dedup
    let mut rot_reps: BTreeSet<Word> = BTreeSet::new();
    for (_, idx) in &candidates {
        rot_reps.insert(word_from_indices(idx).min_rotation());
    }
    let mut orbits: BTreeMap<Word, BTreeSet<Word>> = BTreeMap::new();
    for rep in &rot_reps {
        let (key, orbit) = conjugacy_orbit(rep, rt);
        if key.is_empty() {
            continue;
        }
        orbits.entry(key).or_insert(orbit);
    }
    let cutoff_hp = Float::with_val(prec, cutoff);
    let mut classes: Vec<(Float, Word)> = Vec::new();
    for (key, orbit) in &orbits {
        if !orbit_primitive(orbit) {
            continue;
        }
        let g = GroupElement::new(word_matrix_at(group, key, prec));
        let ell = translation_length(&g)?;
        if ell <= cutoff_hp {
            classes.push((ell, key.clone()));
        }
    }
    cluster_classes(classes, prec)
}

// ---------------------------------------------------------------------------
// public enumeration entry points
// ---------------------------------------------------------------------------

/// Pruned, certified-complete enumeration of the primitive length spectrum.
pub fn enumerate_spectrum(
    group: &FuchsianGroup,
    cutoff: f64,
    precision_bits: u32,
) -> Result<LengthSpectrum, SpectrumError> {
    let rt = group.relator_table();
    let entries = if cutoff > 0.0 {
        let candidates = adaptive_scan(group, &rt, cutoff, true, None)?;
        spectrum_from_candidates(group, &rt, candidates, cutoff, precision_bits)?
    } else {
        Vec::new()
    };
    Ok(LengthSpectrum {
        entries,
        cutoff,
        group_name: group.name.clone(),
        group_id: group.digest(),
        precision_bits,
        complete: true,
    })
}

/// Default node budget of the brute-force oracle.
pub const BRUTE_FORCE_BUDGET: u64 = 400_000_000;

/// Unpruned oracle: identical pipeline, but the scan visits every reduced
/// word up to the adaptive depth bound.
pub fn brute_force_spectrum(
    group: &FuchsianGroup,
    cutoff: f64,
) -> Result<LengthSpectrum, SpectrumError> {
    let prec = group.precision_bits;
    let rt = group.relator_table();
    let entries = if cutoff > 0.0 {
        let candidates = adaptive_scan(group, &rt, cutoff, false, Some(BRUTE_FORCE_BUDGET))?;
        spectrum_from_candidates(group, &rt, candidates, cutoff, prec)?
    } else {
        Vec::new()
    };
    Ok(LengthSpectrum {
        entries,
        cutoff,
        group_name: group.name.clone(),
        group_id: group.digest(),
        precision_bits: prec,
        complete: true,
    })
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

fn format_length(f: &Float, prec: u32) -> String {
    f.to_string_radix(10, Some(decimal_digits(prec)))
}

/// Write the spectrum in the `zetalab-spectrum v1` text format. Output is
/// byte-deterministic for identical inputs.
pub fn save_spectrum(spec: &LengthSpectrum, path: &Path) -> Result<(), SpectrumError> {
    let mut out = String::new();
    out.push_str("# zetalab-spectrum v1\n");
    out.push_str(&format!("# group: {}\n", spec.group_name));
    out.push_str(&format!("# digest: {}\n", spec.group_id));
    out.push_str(&format!("# cutoff: {}\n", spec.cutoff));
    out.push_str(&format!("# precision_bits: {}\n", spec.precision_bits));
    out.push_str(&format!("# complete: {}\n", spec.complete));
    for e in &spec.entries {
        out.push_str(&format!(
            "{} {} {}\n",
            format_length(&e.length, spec.precision_bits),
            e.multiplicity,
            e.word.tokens()
        ));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str, SpectrumError> {
    let prefix = format!("# {key}: ");
    line.and_then(|l| l.strip_prefix(prefix.as_str()))
        .ok_or_else(|| SpectrumError::FormatError(format!("missing or misplaced header `{key}`")))
}

pub fn load_spectrum(path: &Path) -> Result<LengthSpectrum, SpectrumError> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let mut next = || lines.next().transpose().map_err(SpectrumError::from);

    let version = next()?;
    if version.as_deref() != Some("# zetalab-spectrum v1") {
        return Err(SpectrumError::FormatError("bad version line".into()));
    }
    let group_name = header_value(next()?.as_deref(), "group")?.to_owned();
    let group_id = header_value(next()?.as_deref(), "digest")?.to_owned();
    let cutoff: f64 = header_value(next()?.as_deref(), "cutoff")?
        .parse()
        .map_err(|_| SpectrumError::FormatError("bad cutoff".into()))?;
    let precision_bits: u32 = header_value(next()?.as_deref(), "precision_bits")?
        .parse()
        .map_err(|_| SpectrumError::FormatError("bad precision_bits".into()))?;
    let complete: bool = header_value(next()?.as_deref(), "complete")?
        .parse()
        .map_err(|_| SpectrumError::FormatError("bad complete flag".into()))?;

    let mut entries = Vec::new();
    while let Some(line) = next()? {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ' ');
        let (ls, ms, ws) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(SpectrumError::FormatError(format!("bad body line: {line}"))),
        };
        let length = Float::parse(ls)
            .map(|inc| Float::with_val(precision_bits, inc))
            .map_err(|_| SpectrumError::FormatError(format!("bad length: {ls}")))?;
        let multiplicity: u32 = ms
            .parse()
            .map_err(|_| SpectrumError::FormatError(format!("bad multiplicity: {ms}")))?;
        if multiplicity == 0 {
            return Err(SpectrumError::FormatError("zero multiplicity".into()));
        }
        let word = Word::parse_tokens(ws)
            .ok_or_else(|| SpectrumError::FormatError(format!("bad word: {ws}")))?;
        if length.to_f64() > cutoff + 1e-9 {
            return Err(SpectrumError::FormatError(format!(
                "body length {} exceeds header cutoff {}",
                length.to_f64(),
                cutoff
            )));
        }
        if let Some(prev) = entries.last() {
            let prev: &SpectrumEntry = prev;
            if length <= prev.length {
                return Err(SpectrumError::FormatError(
                    "body lengths not strictly increasing".into(),
                ));
            }
        }
        entries.push(SpectrumEntry {
            length,
            multiplicity,
            word,
        });
    }
    Ok(LengthSpectrum {
        entries,
        cutoff,
        group_name,
        group_id,
        precision_bits,
        complete,
    })
}

/// Strict load: additionally require the file digest to match the group.
pub fn load_spectrum_checked(
    path: &Path,
    group: &FuchsianGroup,
) -> Result<LengthSpectrum, SpectrumError> {
    let spec = load_spectrum(path)?;
    let expected = group.digest();
    if spec.group_id != expected {
        return Err(SpectrumError::DigestMismatch {
            expected,
            found: spec.group_id,
        });
    }
    Ok(spec)
}
