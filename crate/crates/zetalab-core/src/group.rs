//! Cocompact Fuchsian group arithmetic: matrix isometries of the disk model,
//! free/cyclic word reduction, conjugacy canonicalization, translation
//! lengths, and the Bolza genus-2 group constructor.
//!
//! Conventions. Generators of a genus-g surface group are indexed 0..2g-1 and
//! serialized as `a1 b1 a2 b2 ...` with uppercase meaning inverse. A geodesic
//! and its orientation reversal are distinct conjugacy classes; both are
//! counted (this is the convention under which the Selberg relation
//! telescopes).

use crate::hp::{tol_half, Cplx, Mat2};
use rug::Float;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum GroupError {
    /// |trace| <= 2 + slack: identity, elliptic, or parabolic input.
    #[error("NotHyperbolic: |trace| = {trace_abs} is not > 2 beyond precision slack")]
    NotHyperbolic { trace_abs: f64 },
    /// No candidate relator shape had a residual below tolerance.
    #[error("ConstructionFailed: best relator residual {residual} exceeds tolerance")]
    ConstructionFailed { residual: f64 },
    /// Cyclic reduction emptied the word.
    #[error("TrivialWord: word reduces to the identity")]
    TrivialWord,
}

/// One symbol of a surface-group word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub gen_index: u8,
    pub inverted: bool,
}

impl Letter {
    pub fn new(gen_index: u8, inverted: bool) -> Self {
        Letter { gen_index, inverted }
    }

    pub fn inverse(self) -> Self {
        Letter {
            gen_index: self.gen_index,
            inverted: !self.inverted,
        }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.gen_index == other.gen_index && self.inverted != other.inverted
    }

    /// Token like `a1`, `B2`: pair index 1-based, `a`/`b` alternating,
    /// uppercase = inverse.
    pub fn token(self) -> String {
        let pair = self.gen_index / 2 + 1;
        let ch = if self.gen_index % 2 == 0 { 'a' } else { 'b' };
        let ch = if self.inverted {
            ch.to_ascii_uppercase()
        } else {
            ch
        };
        format!("{ch}{pair}")
    }

    pub fn parse_token(tok: &str) -> Option<Letter> {
        let mut chars = tok.chars();
        let ch = chars.next()?;
        let pair: u8 = chars.as_str().parse().ok()?;
        if pair == 0 {
            return None;
        }
        let low = ch.to_ascii_lowercase();
        let off = match low {
            'a' => 0,
            'b' => 1,
            _ => return None,
        };
        Some(Letter {
            gen_index: (pair - 1) * 2 + off,
            inverted: ch.is_ascii_uppercase(),
        })
    }
}

/// A word in the group generators. Not automatically reduced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self.tokens())
    }
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| !p[0].cancels(p[1]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && (self.len() < 2 || !self.0[0].cancels(*self.0.last().unwrap()))
    }

    /// Free reduction (cancel adjacent inverse pairs until stable).
    pub fn reduced(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len());
        for &l in &self.0 {
            if out.last().is_some_and(|&t| t.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Cyclic reduction: free reduction plus cancellation across the seam.
    pub fn cyclically_reduced(&self) -> Word {
        let mut w = self.reduced().0;
        while w.len() >= 2 && w[0].cancels(*w.last().unwrap()) {
            w.pop();
            w.remove(0);
        }
        Word(w)
    }

    pub fn rotation(&self, i: usize) -> Word {
        let n = self.len();
        if n == 0 {
            return Word::empty();
        }
        let mut v = Vec::with_capacity(n);
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&self.0[..i]);
        Word(v)
    }

    /// Minimal cyclic rotation under the derived lexicographic Letter order.
    pub fn min_rotation(&self) -> Word {
        (0..self.len().max(1))
            .map(|i| self.rotation(i))
            .min()
            .unwrap_or_else(Word::empty)
    }

    /// True iff the word is w0^k for some k >= 2.
    pub fn is_proper_power(&self) -> bool {
        let n = self.len();
        for d in 1..n {
            if n % d == 0 && (0..n).all(|i| self.0[i] == self.0[i % d]) {
                return true;
            }
        }
        false
    }

    /// Shortest w0 with self = w0^k; self itself when primitive.
    pub fn primitive_root(&self) -> Word {
        let n = self.len();
        for d in 1..n {
            if n % d == 0 && (0..n).all(|i| self.0[i] == self.0[i % d]) {
                return Word(self.0[..d].to_vec());
            }
        }
        self.clone()
    }

    pub fn pow(&self, k: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn tokens(&self) -> String {
        self.0
            .iter()
            .map(|l| l.token())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_tokens(s: &str) -> Option<Word> {
        let mut v = Vec::new();
        for tok in s.split_whitespace() {
            v.push(Letter::parse_token(tok)?);
        }
        Some(Word(v))
    }
}

/// A hyperbolic isometry as a unit-determinant 2x2 complex matrix.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub m: Mat2,
    pub precision_bits: u32,
}

impl GroupElement {
    pub fn new(m: Mat2) -> Self {
        let precision_bits = m.prec();
        GroupElement { m, precision_bits }
    }

    pub fn identity(prec: u32) -> Self {
        GroupElement {
            m: Mat2::identity(prec),
            precision_bits: prec,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            m: self.m.inverse_unit_det(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn trace(&self) -> Cplx {
        self.m.trace()
    }
}

pub fn compose(a: &GroupElement, b: &GroupElement) -> GroupElement {
    debug_assert_eq!(a.precision_bits, b.precision_bits);
    GroupElement {
        m: a.m.mul(&b.m),
        precision_bits: a.precision_bits,
    }
}

/// Translation length 2 arccosh(|tr|/2) of a hyperbolic element.
pub fn translation_length(g: &GroupElement) -> Result<Float, GroupError> {
    let prec = g.precision_bits;
    let t = g.trace().abs();
    let slack = tol_half(prec);
    if t.clone() - 2u32 <= slack {
        return Err(GroupError::NotHyperbolic {
            trace_abs: t.to_f64(),
        });
    }
    Ok((t / 2u32).acosh() * 2u32)
}

/// Canonical conjugacy-class data of a cyclically reduced word in the FREE
/// group on the generators: minimal rotation, symbolic primitivity, geodesic
/// length from the matrix trace.
#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub canonical_word: Word,
    pub length: Float,
    pub primitive: bool,
    pub word_length: usize,
}

/// A cocompact Fuchsian group presented by 2g generator matrices and one
/// relator whose matrix product is +/- identity within tolerance.
#[derive(Clone, Debug)]
pub struct FuchsianGroup {
    pub name: String,
    pub generators: Vec<GroupElement>,
    pub genus: u32,
    pub relation_residual: Float,
    pub relator: Word,
    pub precision_bits: u32,
    letter_mats: Vec<Mat2>,
}

impl FuchsianGroup {
    fn from_generators(
        name: &str,
        generators: Vec<GroupElement>,
        genus: u32,
        relator: Word,
        relation_residual: Float,
    ) -> Self {
        let precision_bits = generators[0].precision_bits;
        let mut letter_mats = Vec::with_capacity(generators.len() * 2);
        for g in &generators {
            letter_mats.push(g.m.clone());
            letter_mats.push(g.m.inverse_unit_det());
        }
        FuchsianGroup {
            name: name.to_owned(),
            generators,
            genus,
            relation_residual,
            relator,
            precision_bits,
            letter_mats,
        }
    }

    pub fn letter_matrix(&self, l: Letter) -> &Mat2 {
        &self.letter_mats[l.gen_index as usize * 2 + l.inverted as usize]
    }

    pub fn word_element(&self, w: &Word) -> GroupElement {
        let mut m = Mat2::identity(self.precision_bits);
        for &l in &w.0 {
            m = m.mul(self.letter_matrix(l));
        }
        GroupElement::new(m)
    }

    /// Hex digest of the generator matrices at full precision; identifies the
    /// group in spectrum files.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for g in &self.generators {
            for e in [&g.m.a, &g.m.b, &g.m.c, &g.m.d] {
                h.update(e.re.to_string_radix(16, None).as_bytes());
                h.update(b",");
                h.update(e.im.to_string_radix(16, None).as_bytes());
                h.update(b";");
            }
        }
        let out = h.finalize();
        out.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn relator_table(&self) -> RelatorTable {
        RelatorTable::new(&self.relator)
    }
}

/// Build the Bolza genus-2 group in the disk model: g_k = R_{k pi/4} g0
/// R_{k pi/4}^{-1} where g0 is the hyperbolic translation with trace
/// 2(1+sqrt2) pairing opposite sides of the regular octagon.
///
/// The surface-group relator is not hard-coded: a finite list of standard
/// genus-2 relator shapes is tried and the first with residual below
/// 2^(-prec/2) is recorded. Matrix conventions differ across the literature;
/// the numerical check is authoritative.
pub fn build_bolza_group(precision_bits: u32) -> Result<FuchsianGroup, GroupError> {
    assert!(precision_bits >= 64, "need at least 64 bits");
    let prec = precision_bits;

    // g0 = [[1+sqrt2, s],[s, 1+sqrt2]] with s^2 = tr^2/4 - 1
    let c = Float::with_val(prec, 2u32).sqrt() + 1u32;
    let s = (c.clone().square() - 1u32).sqrt();
    let g0 = Mat2::new(
        Cplx::from_real(c.clone()),
        Cplx::from_real(s.clone()),
        Cplx::from_real(s),
        Cplx::from_real(c),
    );

    let mut gens = Vec::with_capacity(4);
    for k in 0..4u32 {
        // rotation by k pi/4 about the disk center is diagonal in SU(1,1)
        let phi = Float::with_val(prec, rug::float::Constant::Pi) * k / 4u32;
        let half = phi / 2u32;
        let (sin, cos) = half.sin_cos(Float::new(prec));
        let r = Mat2::new(
            Cplx::new(cos.clone(), sin.clone()),
            Cplx::zero(prec),
            Cplx::zero(prec),
            Cplx::new(cos, -sin),
        );
        let m = r.mul(&g0).mul(&r.inverse_unit_det());
        gens.push(GroupElement::new(m));
    }

    // candidate relator shapes over generator indices 0..3
    let w = |idx: &[(u8, bool)]| Word(idx.iter().map(|&(g, i)| Letter::new(g, i)).collect());
    let side_pairing = w(&[
        (0, false),
        (1, true),
        (2, false),
        (3, true),
        (0, true),
        (1, false),
        (2, true),
        (3, false),
    ]);
    let commutator = w(&[
        (0, false),
        (1, false),
        (0, true),
        (1, true),
        (2, false),
        (3, false),
        (2, true),
        (3, true),
    ]);
    let mut candidates = Vec::new();
    for base in [side_pairing, commutator] {
        let rev = Word(base.0.iter().rev().copied().collect());
        candidates.push(base.inverse());
        candidates.push(base);
        candidates.push(rev.inverse());
        candidates.push(rev);
    }

    let tol = tol_half(prec);
    let identity = Mat2::identity(prec);
    let neg_identity = Mat2::new(
        Cplx::with_val(prec, -1.0, 0.0),
        Cplx::zero(prec),
        Cplx::zero(prec),
        Cplx::with_val(prec, -1.0, 0.0),
    );

    let mut best = Float::with_val(prec, rug::float::Special::Infinity);
    for cand in candidates {
        let mut m = Mat2::identity(prec);
        for &l in &cand.0 {
            let gm = &gens[l.gen_index as usize].m;
            let gm = if l.inverted { gm.inverse_unit_det() } else { gm.clone() };
            m = m.mul(&gm);
        }
        let res = m.max_dist(&identity).min(&m.max_dist(&neg_identity));
        if res < tol {
            for g in &gens {
                let t = g.trace().abs();
                if t.clone() - 2u32 <= tol {
                    return Err(GroupError::NotHyperbolic {
                        trace_abs: t.to_f64(),
                    });
                }
            }
            return Ok(FuchsianGroup::from_generators("bolza", gens, 2, cand, res));
        }
        if res < best {
            best = res;
        }
    }
    Err(GroupError::ConstructionFailed {
        residual: best.to_f64(),
    })
}

/// Conjugacy class of a word in the free group on the generators (cyclic
/// reduction + minimal rotation). This is canonical for FREE cyclic words;
/// group-level conjugacy (relator coincidences) is handled by
/// [`conjugacy_orbit`].
pub fn canonical_class(w: &Word, group: &FuchsianGroup) -> Result<ConjugacyClass, GroupError> {
    let cyc = w.cyclically_reduced();
    if cyc.is_empty() {
        return Err(GroupError::TrivialWord);
    }
    let canonical_word = cyc.min_rotation();
    let primitive = !canonical_word.is_proper_power();
    let length = translation_length(&group.word_element(&canonical_word))?;
    let word_length = canonical_word.len();
    Ok(ConjugacyClass {
        canonical_word,
        length,
        primitive,
        word_length,
    })
}

/// Precomputed cyclic shifts of the relator and its inverse, used for Dehn
/// reduction and conjugacy normalization in the surface group.
pub struct RelatorTable {
    shifts: Vec<Vec<Letter>>,
    len: usize,
    half: usize,
}

impl RelatorTable {
    pub fn new(relator: &Word) -> Self {
        let len = relator.len();
        assert!(len >= 4 && len % 2 == 0);
        let mut shifts = Vec::with_capacity(2 * len);
        for base in [relator.clone(), relator.inverse()] {
            for i in 0..len {
                shifts.push(base.rotation(i).0);
            }
        }
        shifts.sort();
        shifts.dedup();
        RelatorTable {
            shifts,
            len,
            half: len / 2,
        }
    }
}

fn cyclic_match(w: &[Letter], i: usize, pat: &[Letter]) -> bool {
    let n = w.len();
    pat.iter().enumerate().all(|(j, &p)| w[(i + j) % n] == p)
}

/// Replace the cyclic subword w[i..i+m] (which equals shift[..m]) by the
/// inverse of shift[m..], keeping the rest of the cyclic word.
fn apply_replacement(w: &[Letter], i: usize, m: usize, shift: &[Letter]) -> Word {
    let n = w.len();
    let mut v: Vec<Letter> = shift[m..].iter().rev().map(|l| l.inverse()).collect();
    for j in m..n {
        v.push(w[(i + j) % n]);
    }
    Word(v).cyclically_reduced()
}

/// Dehn's algorithm on cyclic words: repeatedly replace any cyclic subword
/// matching more than half of a relator shift by the shorter complement.
/// For the (small-cancellation) surface relator this yields a cyclic word of
/// minimal length in its conjugacy class.
pub fn dehn_reduce(w: &Word, rt: &RelatorTable) -> Word {
    let mut w = w.cyclically_reduced();
    'outer: loop {
        let n = w.len();
        if n <= rt.half {
            return w;
        }
        for shift in &rt.shifts {
            for m in (rt.half + 1..rt.len).rev() {
                if m > n {
                    continue;
                }
                for i in 0..n {
                    if cyclic_match(&w.0, i, &shift[..m]) {
                        w = apply_replacement(&w.0, i, m, shift);
                        continue 'outer;
                    }
                }
            }
        }
        return w;
    }
}

/// Closure of a Dehn-reduced cyclic word under rotations and exactly-half
/// relator swaps, all of which are explicit conjugacies. Returns the orbit of
/// minimal-length representatives; the canonical conjugacy key is the
/// lexicographic minimum of the orbit. Distinct free-group cyclic words can
/// be conjugate in the surface group; this closure identifies them.
pub fn conjugacy_orbit(w: &Word, rt: &RelatorTable) -> (Word, BTreeSet<Word>) {
    let mut w = dehn_reduce(w, rt);
    'restart: loop {
        let n = w.len();
        let start = w.min_rotation();
        let mut seen: BTreeSet<Word> = BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            if n < rt.half {
                continue;
            }
            for shift in &rt.shifts {
                for i in 0..n {
                    if cyclic_match(&u.0, i, &shift[..rt.half]) {
                        let v = dehn_reduce(&apply_replacement(&u.0, i, rt.half, shift), rt);
                        if v.len() < n {
                            w = v;
                            continue 'restart;
                        }
                        let c = v.min_rotation();
                        if seen.insert(c.clone()) {
                            queue.push(c);
                        }
                    }
                }
            }
        }
        let key = seen.iter().next().cloned().unwrap_or_else(Word::empty);
        return (key, seen);
    }
}

/// Primitivity of a surface-group conjugacy class: no orbit member is a
/// proper power.
pub fn orbit_primitive(orbit: &BTreeSet<Word>) -> bool {
    !orbit.iter().any(|u| u.is_proper_power())
}
