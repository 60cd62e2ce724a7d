//! Free-group combinatorics over the generators of a Schottky-type surface group.
//!
//! Letters are encoded as `2 * generator + inverted`, so `letter ^ 1` is the
//! inverse letter and the natural order is `a < A < b < B < ...`. Words print
//! with lowercase for generators and uppercase for inverses; the identity
//! prints as `1`.
//!
//! Enumeration prunes with a length bound coming from the ping-pong domain of
//! the surface: every letter `x` has a half-plane `H_x` and `x` maps the
//! complement of `H_{x^-1}` into `H_x`. For a cyclically reduced word
//! `w = x_1 ... x_N` the geodesics `B_i = x_1 ... x_{i-1} ∂H_{x_i}` are nested
//! and `w B_1 = B_{N+1}`, so
//!
//! ```text
//! length(w) >= dist(B_1, B_{N+1}) >= dist(B_1, B_n) + dist(B_n, B_{n+1}) + ...
//! ```
//!
//! and each step `dist(B_i, B_{i+1}) = dist(∂H_{x_i^-1}, ∂H_{x_{i+1}})` is at
//! least the smallest gap. A prefix whose `dist(B_1, B_n)` plus that gap
//! already exceeds the cutoff cannot be completed. Prefixes that cannot start
//! a least rotation (of the word or of its inverse) are dropped as well.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::fmt17;
use crate::moebius::{
    self, axis_frame, BoundaryArc, HPoint, Isometry, ProductChain, ProjPoint, NEAR_PARABOLIC_TOL,
};

/// Signed generator: `2 * index` for `g_index`, `2 * index + 1` for its inverse.
pub type Letter = u8;

/// Largest supported rank (letters must print as `a..z`).
pub const MAX_RANK: usize = 26;

/// Tolerance of the boundary-length checks in [`build_pants`].
pub const BOUNDARY_TOL: f64 = 1e-9;

#[inline]
pub fn inverse_letter(x: Letter) -> Letter {
    x ^ 1
}

fn letter_char(x: Letter) -> char {
    let base = b'a' + (x >> 1);
    if x & 1 == 0 {
        base as char
    } else {
        base.to_ascii_uppercase() as char
    }
}

/// Freely reduced word in the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Self { letters: Vec::new() }
    }

    /// Freely reduces the given letter sequence.
    pub fn new<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for x in letters {
            if out.last() == Some(&inverse_letter(x)) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Self { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: invert_letters(&self.letters) }
    }

    /// Free product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// `g^k` for the generator with the given index (negative `k` for inverses).
    pub fn generator_power(generator: usize, k: i32) -> Word {
        let x = (2 * generator) as Letter + u8::from(k < 0);
        Word { letters: vec![x; k.unsigned_abs() as usize] }
    }

    /// Largest generator index used plus one.
    pub fn rank_used(&self) -> usize {
        self.letters.iter().map(|&x| (x >> 1) as usize + 1).max().unwrap_or(0)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != inverse_letter(l),
            _ => true,
        }
    }

    /// Product of the generator matrices along the word.
    pub fn evaluate(&self, generators: &[Isometry]) -> Isometry {
        let inverses: Vec<Isometry> = generators.iter().map(Isometry::inverse).collect();
        let mut chain = ProductChain::new();
        for &x in &self.letters {
            let g = (x >> 1) as usize;
            chain.push(if x & 1 == 0 { &generators[g] } else { &inverses[g] });
        }
        chain.value()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for &x in &self.letters {
            write!(f, "{}", letter_char(x))?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses `a`..`z` (generators) and `A`..`Z` (inverses); `1` or the empty
    /// string denote the identity. The result is freely reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            let x = match ch {
                'a'..='z' => 2 * (ch as u8 - b'a'),
                'A'..='Z' => 2 * (ch as u8 - b'A') + 1,
                _ => return Err(Error::domain(format!("invalid letter {ch:?} in word {s:?}"))),
            };
            letters.push(x);
        }
        Ok(Word::new(letters))
    }
}

fn invert_letters(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&x| inverse_letter(x)).collect()
}

/// Lexicographically least rotation of `w`.
fn least_rotation(w: &[Letter]) -> Vec<Letter> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0usize;
    for start in 1..n {
        let ord = (0..n).map(|i| w[(start + i) % n]).cmp((0..n).map(|i| w[(best + i) % n]));
        if ord == Ordering::Less {
            best = start;
        }
    }
    (0..n).map(|i| w[(best + i) % n]).collect()
}

/// Canonical representative of the unoriented conjugacy class of a cyclically
/// reduced word: least over all rotations of the word and of its inverse.
pub fn canonical_cyclic(w: &[Letter]) -> Vec<Letter> {
    let fwd = least_rotation(w);
    let bwd = least_rotation(&invert_letters(w));
    fwd.min(bwd)
}

/// Smallest `p` dividing `len` with `w` invariant under rotation by `p`.
pub fn primitive_period(w: &[Letter]) -> usize {
    let n = w.len();
    (1..=n)
        .filter(|&p| n.is_multiple_of(p))
        .find(|&p| (0..n).all(|i| w[i] == w[(i + p) % n]))
        .unwrap_or(n)
}

/// Unoriented conjugacy class of a hyperbolic element.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjClass {
    /// Canonical cyclically reduced word.
    pub word: Word,
    pub primitive: bool,
    /// Geodesic length `2 arccosh(|trace| / 2)`.
    pub length: f64,
    /// `|tr|` of the representing matrix.
    pub trace: f64,
}

impl ConjClass {
    fn order(&self, other: &Self) -> Ordering {
        self.length.total_cmp(&other.length).then_with(|| self.word.cmp(&other.word))
    }
}

/// Ping-pong data: one half-plane per letter and the gap matrix used for pruning.
#[derive(Clone, Debug)]
struct PingPong {
    arcs: Vec<BoundaryArc>,
    /// `gap[x][y] = dist(∂H_{x^-1}, ∂H_y)`, only meaningful for `y != x^-1`.
    gap: Vec<Vec<f64>>,
    min_gap: f64,
}

impl PingPong {
    fn new(arcs: Vec<BoundaryArc>) -> Result<Self> {
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                if !arcs[i].is_disjoint(&arcs[j]) {
                    return Err(Error::Construction(format!(
                        "ping-pong half-planes {} and {} overlap; group is not Schottky",
                        letter_char(i as Letter),
                        letter_char(j as Letter)
                    )));
                }
            }
        }
        let n = arcs.len();
        let mut gap = vec![vec![f64::INFINITY; n]; n];
        let mut min_gap = f64::INFINITY;
        for x in 0..n {
            for y in 0..n {
                if y == (x ^ 1) {
                    continue;
                }
                let d = arcs[x ^ 1].chord().distance(&arcs[y].chord());
                gap[x][y] = d;
                min_gap = min_gap.min(d);
            }
        }
        if !(min_gap > 0.0) {
            return Err(Error::Construction("ping-pong geodesics touch".into()));
        }
        Ok(Self { arcs, gap, min_gap })
    }
}

/// Lengths of one cutoff: `δ` fitted from the primitive length spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Standard error of the fitted slope.
    pub uncertainty: f64,
    /// Intercept `c` of `log N(T) + log T ≈ δ T + c`.
    pub log_scale: f64,
    pub classes_used: usize,
    pub cutoff: f64,
}

/// A Schottky surface group together with its geometric data.
#[derive(Debug)]
pub struct SurfaceSpec {
    /// Boundary (funnel) lengths: `(l1, l2, l3)` for pants, `(l)` for the cylinder.
    pub boundary_lengths: Vec<f64>,
    pub generators: Vec<Isometry>,
    pub euler_characteristic: i32,
    /// Index into `boundary_lengths` of the pinching geodesic; its class is generator `g1`.
    pub pinching_index: usize,
    pingpong: PingPong,
    delta: OnceLock<Option<DeltaEstimate>>,
}

impl Clone for SurfaceSpec {
    fn clone(&self) -> Self {
        Self {
            boundary_lengths: self.boundary_lengths.clone(),
            generators: self.generators.clone(),
            euler_characteristic: self.euler_characteristic,
            pinching_index: self.pinching_index,
            pingpong: self.pingpong.clone(),
            delta: OnceLock::new(),
        }
    }
}

impl SurfaceSpec {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// `σ_l = g1`, the hyperbolic element translating along the imaginary axis.
    pub fn sigma(&self) -> Isometry {
        self.generators[0]
    }

    /// Length `l` of the pinching geodesic.
    pub fn pinching_length(&self) -> f64 {
        self.boundary_lengths[self.pinching_index]
    }

    /// Smallest per-letter length increment of the pruning bound.
    pub fn min_gap(&self) -> f64 {
        self.pingpong.min_gap
    }

    /// Word length beyond which no class can have length `<= max_length`.
    pub fn complete_word_len(&self, max_length: f64) -> usize {
        (max_length / self.pingpong.min_gap).floor() as usize
    }

    /// Lower bound `Σ gap(x_i, x_{i+1})` (cyclically) on the length of a cyclically reduced word.
    pub fn length_lower_bound(&self, w: &Word) -> f64 {
        let l = w.letters();
        let n = l.len();
        (0..n).map(|i| self.pingpong.gap[l[i] as usize][l[(i + 1) % n] as usize]).sum()
    }

    /// Half-plane `H_x` of the ping-pong domain, as its boundary arc.
    pub fn pingpong_arc(&self, x: Letter) -> BoundaryArc {
        self.pingpong.arcs[x as usize]
    }

    /// Short label such as `pants(1,1,1)`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.boundary_lengths.iter().map(|l| format!("{l}")).collect();
        let kind = if self.rank() == 1 { "cylinder" } else { "pants" };
        format!("{kind}({})", parts.join(","))
    }

    /// Exponent of convergence estimated with an automatically grown cutoff,
    /// or `None` when too few classes are reachable.
    ///
    /// The cutoff grows in unit steps from 6 until at least 400 primitive
    /// classes are found or the cutoff reaches 24; the result is cached.
    pub fn delta(&self) -> Option<DeltaEstimate> {
        self.delta.get_or_init(|| auto_delta(self).ok()).clone()
    }
}

/// Word-length ceiling of the automatic `δ` estimate.
const MAX_DELTA_WORD_LEN: usize = 400;

fn auto_delta(spec: &SurfaceSpec) -> Result<DeltaEstimate> {
    if spec.rank() == 1 {
        return estimate_delta(spec, &EnumBudget::new(1, f64::INFINITY));
    }
    let mut cutoff = 6.0;
    loop {
        let budget = EnumBudget::new(spec.complete_word_len(cutoff).clamp(1, MAX_DELTA_WORD_LEN), cutoff);
        let classes = enumerate_conj_classes(spec, &budget)?;
        if classes.classes.len() >= 400 || cutoff >= 24.0 {
            return fit_delta(&classes.classes, cutoff);
        }
        cutoff += 1.0;
    }
}

/// Three-funnel pair of pants with boundary lengths `(l1, l2, l3)`.
///
/// `g1 = diag(e^{l1/2}, e^{-l1/2})`; `g2` solves `tr g2 = 2cosh(l2/2)` and
/// `tr(g1 g2) = -2cosh(l3/2)` (the pants sign branch). The three lengths are
/// re-measured and the ping-pong half-planes built from the seams of the
/// right-angled hexagon are checked for disjointness.
pub fn build_pants(l1: f64, l2: f64, l3: f64) -> Result<SurfaceSpec> {
    for (name, l) in [("l1", l1), ("l2", l2), ("l3", l3)] {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Construction(format!("{name} = {l} must be a positive length")));
        }
    }
    let lam = (0.5 * l1).exp();
    let x2 = 2.0 * (0.5 * l2).cosh();
    let x3 = 2.0 * (0.5 * l3).cosh();
    // a λ + d / λ = -x3, a + d = x2
    let a = (-x3 - x2 / lam) / (lam - 1.0 / lam);
    let d = x2 - a;
    let bc = a * d - 1.0;
    let (b, c) = if bc >= 0.0 { (bc.sqrt(), bc.sqrt()) } else { ((-bc).sqrt(), -(-bc).sqrt()) };
    let g1 = Isometry::axial(l1);
    let g2 = Isometry::new(a, b, c, d)?;

    for (label, g, want) in [("g1", g1, l1), ("g2", g2, l2), ("g1g2", g1 * g2, l3)] {
        let got = moebius::translation_length(&g)
            .map_err(|e| Error::Construction(format!("{label}: {e}")))?;
        if (got - want).abs() > BOUNDARY_TOL {
            return Err(Error::Construction(format!("{label} has length {got}, expected {want}")));
        }
    }

    let (u, v) = g2.fixed_points().map_err(|e| Error::Construction(e.to_string()))?;
    let (uv, uvsum) = (u.value() * v.value(), u.value() + v.value());
    if !(uv > 0.0) || !uv.is_finite() {
        return Err(Error::Construction("axis of g2 meets the axis of g1".into()));
    }
    // common perpendicular of the two axes: |z| = r
    let r = uv.sqrt();
    let foot_x = 2.0 * uv / uvsum;
    let foot = HPoint::new(foot_x, (r * r - foot_x * foot_x).max(0.0).sqrt())
        .map_err(|_| Error::Construction("degenerate common perpendicular".into()))?;
    let frame = axis_frame(u, v)?;
    let t = {
        let w = frame.inverse().apply(foot);
        w.x.hypot(w.y)
    };

    let (r_out, r_in) = (r * (0.5 * l1).exp(), r * (-0.5 * l1).exp());
    let (t_out, t_in) = (t * (0.5 * l2).exp(), t * (-0.5 * l2).exp());
    let arcs = vec![
        BoundaryArc { start: ProjPoint::real(r_out), end: ProjPoint::real(-r_out) },
        BoundaryArc { start: ProjPoint::real(-r_in), end: ProjPoint::real(r_in) },
        BoundaryArc { start: ProjPoint::real(t_out), end: ProjPoint::real(-t_out) }.image(&frame),
        BoundaryArc { start: ProjPoint::real(-t_in), end: ProjPoint::real(t_in) }.image(&frame),
    ];
    let pingpong = PingPong::new(arcs)?;
    Ok(SurfaceSpec {
        boundary_lengths: vec![l1, l2, l3],
        generators: vec![g1, g2],
        euler_characteristic: -1,
        pinching_index: 0,
        pingpong,
        delta: OnceLock::new(),
    })
}

/// Hyperbolic cylinder `⟨σ_l⟩ \ H`: the elementary group generated by `z ↦ e^l z`.
pub fn build_cylinder(l: f64) -> Result<SurfaceSpec> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Construction(format!("l = {l} must be a positive length")));
    }
    let arcs = vec![
        BoundaryArc { start: ProjPoint::real(1.0), end: ProjPoint::real(-1.0) },
        BoundaryArc { start: ProjPoint::real(-(-l).exp()), end: ProjPoint::real((-l).exp()) },
    ];
    Ok(SurfaceSpec {
        boundary_lengths: vec![l],
        generators: vec![Isometry::axial(l)],
        euler_characteristic: 0,
        pinching_index: 0,
        pingpong: PingPong::new(arcs)?,
        delta: OnceLock::new(),
    })
}

/// Enumeration limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumBudget {
    pub max_word_len: usize,
    pub max_length: f64,
    /// Abort with [`Error::BudgetExceeded`] above this many classes.
    pub class_cap: usize,
}

impl EnumBudget {
    pub const DEFAULT_CLASS_CAP: usize = 2_000_000;

    pub fn new(max_word_len: usize, max_length: f64) -> Self {
        Self { max_word_len, max_length, class_cap: Self::DEFAULT_CLASS_CAP }
    }
}

/// Result of a conjugacy-class enumeration.
#[derive(Clone, Debug)]
pub struct LengthSpectrum {
    /// Sorted by length, ties by canonical word.
    pub classes: Vec<ConjClass>,
    pub budget: EnumBudget,
    /// True when the word-length budget provably reaches every class below the cutoff.
    pub complete: bool,
    pub warnings: Vec<Warning>,
}

/// Every primitive class with word length `<= max_word_len` and geodesic
/// length `<= max_length`, each exactly once.
pub fn enumerate_conj_classes(spec: &SurfaceSpec, budget: &EnumBudget) -> Result<LengthSpectrum> {
    enumerate_classes(spec, budget, false)
}

/// Like [`enumerate_conj_classes`] but also lists proper powers.
pub fn enumerate_all_classes(spec: &SurfaceSpec, budget: &EnumBudget) -> Result<LengthSpectrum> {
    enumerate_classes(spec, budget, true)
}

fn enumerate_classes(spec: &SurfaceSpec, budget: &EnumBudget, with_powers: bool) -> Result<LengthSpectrum> {
    if budget.max_word_len == 0 {
        return Err(Error::domain("max_word_len must be at least 1"));
    }
    let n_letters = 2 * spec.rank();
    let mats: Vec<Isometry> = (0..n_letters)
        .map(|x| {
            let g = spec.generators[x >> 1];
            if x & 1 == 0 {
                g
            } else {
                g.inverse()
            }
        })
        .collect();
    let search = ClassSearch { spec, budget, mats: &mats, with_powers };

    // breadth-first down to SPLIT_DEPTH, then independent depth-first subtrees
    const SPLIT_DEPTH: usize = 4;
    let mut classes = Vec::new();
    let mut frontier: Vec<Node> = (0..n_letters as Letter)
        .step_by(2)
        .map(|x| {
            let mut chain = ProductChain::new();
            chain.push(&mats[x as usize]);
            Node { word: vec![x], chain, period: 1 }
        })
        .collect();
    while frontier.first().is_some_and(|n| n.word.len() < SPLIT_DEPTH) {
        let mut next = Vec::new();
        for node in &frontier {
            search.consider(node, &mut classes);
            next.extend(search.children(node));
        }
        frontier = next;
    }
    let results: Vec<Result<Vec<ConjClass>>> = frontier
        .into_par_iter()
        .map(|node| {
            let mut out = Vec::new();
            search.visit(node, &mut out)?;
            Ok(out)
        })
        .collect();
    for r in results {
        classes.extend(r?);
        if classes.len() > budget.class_cap {
            return Err(Error::BudgetExceeded { cap: budget.class_cap });
        }
    }
    classes.sort_by(ConjClass::order);
    let mut warnings = Vec::new();
    if classes.iter().any(|c| c.trace - 2.0 < NEAR_PARABOLIC_TOL) {
        warnings.push(Warning::NearParabolic);
    }
    let complete = spec.rank() == 1
        || !budget.max_length.is_finite()
        || budget.max_word_len >= spec.complete_word_len(budget.max_length);
    if !complete {
        warnings.push(Warning::IncompleteSpectrum);
    }
    Ok(LengthSpectrum { classes, budget: *budget, complete, warnings })
}

struct ClassSearch<'a> {
    spec: &'a SurfaceSpec,
    budget: &'a EnumBudget,
    mats: &'a [Isometry],
    with_powers: bool,
}

struct Node {
    word: Vec<Letter>,
    chain: ProductChain,
    /// Period of the word as a prenecklace (length of its longest Lyndon prefix).
    period: usize,
}

impl ClassSearch<'_> {
    fn children<'n>(&'n self, node: &'n Node) -> impl Iterator<Item = Node> + 'n {
        let first = node.word[0];
        let last = *node.word.last().unwrap();
        let n = node.word.len();
        let open = n < self.budget.max_word_len;
        let current = node.chain.value();
        let start = self.spec.pingpong.arcs[first as usize].chord();
        (0..self.mats.len() as Letter).filter_map(move |y| {
            if !open || y == inverse_letter(last) {
                return None;
            }
            // prefixes of a least rotation are prenecklaces
            let period = match y.cmp(&node.word[n - node.period]) {
                Ordering::Less => return None,
                Ordering::Equal => node.period,
                Ordering::Greater => n + 1,
            };
            if !self.inverse_pieces_ok(&node.word, y) {
                return None;
            }
            // dist(∂H_{x_1}, x_1 ⋯ x_n ∂H_y) plus at least one more gap
            let reach = start.distance(&self.spec.pingpong.arcs[y as usize].chord().image(&current));
            if reach + self.spec.pingpong.min_gap > self.budget.max_length {
                return None;
            }
            let mut chain = node.chain;
            chain.push(&self.mats[y as usize]);
            let mut word = node.word.clone();
            word.push(y);
            Some(Node { word, chain, period })
        })
    }

    /// Every piece of a canonical word, read backwards with inverted letters,
    /// is a prefix of a rotation of the inverse word and so compares `>=` the
    /// word itself. Checks the pieces ending with the appended letter `y`.
    fn inverse_pieces_ok(&self, word: &[Letter], y: Letter) -> bool {
        let n = word.len();
        let at = |i: usize| if i == n { y } else { word[i] };
        'pieces: for m in 1..=n + 1 {
            for i in 0..m {
                match inverse_letter(at(n - i)).cmp(&at(i)) {
                    Ordering::Less => return false,
                    Ordering::Greater => continue 'pieces,
                    Ordering::Equal => {}
                }
            }
        }
        true
    }

    fn visit(&self, node: Node, out: &mut Vec<ConjClass>) -> Result<()> {
        self.consider(&node, out);
        if out.len() > self.budget.class_cap {
            return Err(Error::BudgetExceeded { cap: self.budget.class_cap });
        }
        for child in self.children(&node) {
            self.visit(child, out)?;
        }
        Ok(())
    }

    fn consider(&self, node: &Node, out: &mut Vec<ConjClass>) {
        let word = &node.word[..];
        if word.len() > 1 && word[word.len() - 1] == inverse_letter(word[0]) {
            return;
        }
        if canonical_cyclic(word) != word {
            return;
        }
        let primitive = primitive_period(word) == word.len();
        if !primitive && !self.with_powers {
            return;
        }
        let trace = node.chain.value().trace().abs();
        let length = moebius::length_from_trace(trace);
        if length <= self.budget.max_length {
            out.push(ConjClass { word: Word { letters: word.to_vec() }, primitive, length, trace });
        }
    }
}

/// Right coset representatives of `⟨g_excluded⟩` in the free group: the
/// identity and every reduced word of length `<= max_word_len` not starting
/// with `g_excluded^{±1}`, sorted by (length, word).
pub fn coset_words(rank: usize, excluded: usize, max_word_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let n_letters = (2 * rank) as Letter;
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_word_len {
        let mut next = Vec::new();
        for w in &frontier {
            for x in 0..n_letters {
                if w.is_empty() && (x >> 1) as usize == excluded {
                    continue;
                }
                if w.last() == Some(&inverse_letter(x)) {
                    continue;
                }
                let mut v = w.clone();
                v.push(x);
                next.push(v);
            }
        }
        out.extend(next.iter().map(|l| Word { letters: l.clone() }));
        frontier = next;
    }
    out
}

/// Representatives of `⟨σ_l⟩ \ Γ_l` with `σ_l = g1`.
pub fn coset_reps(spec: &SurfaceSpec, max_word_len: usize) -> Vec<Word> {
    coset_words(spec.rank(), 0, max_word_len)
}

/// Matrices of the coset representatives grouped into word-length shells;
/// `shells[n]` lists the words of length `n` in lexicographic order.
pub fn coset_shells(generators: &[Isometry], excluded: usize, max_word_len: usize) -> Vec<Vec<Isometry>> {
    let n_letters = 2 * generators.len();
    let mats: Vec<Isometry> = (0..n_letters)
        .map(|x| if x & 1 == 0 { generators[x >> 1] } else { generators[x >> 1].inverse() })
        .collect();
    let mats = &mats;
    let mut shells = vec![vec![Isometry::identity()]];
    let mut frontier: Vec<(Letter, ProductChain)> = vec![(u8::MAX, ProductChain::new())];
    for depth in 0..max_word_len {
        let next: Vec<(Letter, ProductChain)> = frontier
            .par_iter()
            .flat_map_iter(|(last, chain)| {
                (0..n_letters as Letter)
                    .filter(move |&x| {
                        !(depth == 0 && (x >> 1) as usize == excluded) && *last != inverse_letter(x)
                    })
                    .map(move |x| {
                        let mut c = *chain;
                        c.push(&mats[x as usize]);
                        (x, c)
                    })
            })
            .collect();
        shells.push(next.iter().map(|(_, c)| c.value()).collect());
        frontier = next;
    }
    shells
}

/// Fits `δ` from the primitive classes of `spec` below `budget.max_length`.
///
/// Rank-one (cyclic) groups return the degenerate answer `δ = 0`.
pub fn estimate_delta(spec: &SurfaceSpec, budget: &EnumBudget) -> Result<DeltaEstimate> {
    if spec.rank() == 1 {
        return Ok(DeltaEstimate {
            delta: 0.0,
            uncertainty: 0.0,
            log_scale: f64::NEG_INFINITY,
            classes_used: 1,
            cutoff: budget.max_length,
        });
    }
    let spectrum = enumerate_conj_classes(spec, budget)?;
    fit_delta(&spectrum.classes, budget.max_length)
}

/// Least squares of `log N(T) + log T` against `T` over the upper half of the
/// observed length range, i.e. `N(T) ≈ C e^{δT} / T`.
pub fn fit_delta(classes: &[ConjClass], cutoff: f64) -> Result<DeltaEstimate> {
    const MIN_CLASSES: usize = 50;
    let primitive: Vec<f64> = classes.iter().filter(|c| c.primitive).map(|c| c.length).collect();
    if primitive.len() < MIN_CLASSES {
        return Err(Error::InsufficientData { found: primitive.len(), needed: MIN_CLASSES });
    }
    let top = primitive[primitive.len() - 1];
    let lo = 0.5 * (primitive[0] + top);
    let pts: Vec<(f64, f64)> = primitive
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= lo)
        .map(|(i, &t)| (t, ((i + 1) as f64).ln() + t.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { found: pts.len(), needed: 3 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData { found: 1, needed: 3 });
    }
    let delta = sxy / sxx;
    let intercept = my - delta * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - delta * p.0).powi(2)).sum();
    let uncertainty = (rss / (n - 2.0).max(1.0) / sxx).sqrt();
    Ok(DeltaEstimate {
        delta,
        uncertainty,
        log_scale: intercept,
        classes_used: primitive.len(),
        cutoff,
    })
}

/// Writes the length spectrum as CSV with 17 significant digits.
pub fn write_spectrum_csv<W: std::io::Write>(classes: &[ConjClass], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["canonical_word", "trace", "length", "primitive", "word_len"]).map_err(io)?;
    for c in classes {
        w.write_record([
            c.word.to_string(),
            fmt17(c.trace),
            fmt17(c.length),
            c.primitive.to_string(),
            c.word.len().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
