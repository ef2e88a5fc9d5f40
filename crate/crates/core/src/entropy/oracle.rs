//! Length oracles: groups with a length function, and closed-form volume growth.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};
use crate::quadrature::integrate;
use crate::surgery::unit_sphere_area;

/// Default cap on the number of enumerated elements.
pub const DEFAULT_BUDGET: usize = 1_000_000;

fn within(len: f64, cutoff: f64) -> bool {
    len <= cutoff + 1e-12 * cutoff.abs().max(1.0)
}

/// Group element produced by an enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub id: String,
    pub length: f64,
}

/// Multiset of lengths as sorted `(length, count)` pairs.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Spectrum {
    pub levels: Vec<(f64, f64)>,
}

impl Spectrum {
    /// Sort and merge equal lengths.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut levels: Vec<(f64, f64)> = Vec::new();
        for (l, c) in pairs {
            if c == 0.0 {
                continue;
            }
            match levels.last_mut() {
                Some(last) if (l - last.0).abs() <= 1e-12 * l.abs().max(1.0) => last.1 += c,
                _ => levels.push((l, c)),
            }
        }
        Spectrum { levels }
    }

    /// `#{elements with length <= r}`.
    pub fn count(&self, r: f64) -> f64 {
        self.levels.iter().take_while(|l| within(l.0, r)).map(|l| l.1).sum()
    }

    pub fn total(&self) -> f64 {
        self.levels.iter().map(|l| l.1).sum()
    }

    /// `sum e^{-s length}` over lengths `<= cutoff`, accumulated in length order.
    pub fn poincare(&self, s: f64, cutoff: f64) -> f64 {
        self.levels
            .iter()
            .take_while(|l| within(l.0, cutoff))
            .map(|&(l, c)| c * (-s * l).exp())
            .sum()
    }
}

/// Free group with a length per generator (inverses have the same length).
#[derive(Clone, Debug, PartialEq)]
pub struct FreeGroup {
    pub lengths: Vec<f64>,
}

const MAX_DP_CELLS: usize = 50_000_000;

/// Word counts per distinct length. Each length gets a slot, and the slot reached
/// by appending a generator is cached, so counting a word costs one increment.
struct LengthTally {
    lengths: Vec<f64>,
    counts: Vec<f64>,
    index: HashMap<u64, usize>,
    next: Vec<Vec<usize>>,
    rank: usize,
}

impl LengthTally {
    fn new(rank: usize) -> Self {
        Self { lengths: Vec::new(), counts: Vec::new(), index: HashMap::new(), next: Vec::new(), rank }
    }

    fn slot(&mut self, len: f64) -> usize {
        if let Some(&i) = self.index.get(&len.to_bits()) {
            return i;
        }
        let i = self.lengths.len();
        self.index.insert(len.to_bits(), i);
        self.lengths.push(len);
        self.counts.push(0.0);
        self.next.push(vec![usize::MAX; self.rank]);
        i
    }

    /// Slot of `len`, which is the length of `slot` plus generator `g`.
    fn step(&mut self, slot: usize, g: usize, len: f64) -> usize {
        let cached = self.next[slot][g];
        if cached != usize::MAX {
            return cached;
        }
        let s = self.slot(len);
        self.next[slot][g] = s;
        s
    }
}

impl FreeGroup {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(invalid(format!("generator lengths must be positive, got {lengths:?}")));
        }
        Ok(FreeGroup { lengths })
    }

    /// Free group of rank `k` with unit generator lengths.
    pub fn unit(rank: usize) -> Self {
        FreeGroup { lengths: vec![1.0; rank] }
    }

    pub fn rank(&self) -> usize {
        self.lengths.len()
    }

    /// Length spectrum up to `cutoff`, counting reduced words by how often each
    /// generator is used and by their last letter.
    pub fn spectrum(&self, cutoff: f64) -> Result<Spectrum> {
        let k = self.rank();
        if k == 0 || cutoff < 0.0 {
            return Ok(Spectrum::from_pairs(vec![(0.0, if cutoff >= 0.0 { 1.0 } else { 0.0 })]));
        }
        let dims: Vec<usize> = self
            .lengths
            .iter()
            .map(|&l| (cutoff / l + 1e-12).floor() as usize + 1)
            .collect();
        let mut strides = vec![1usize; k];
        for i in (0..k - 1).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let cells = strides[0] * dims[0];
        let letters = 2 * k;
        if cells.saturating_mul(letters + 1) > MAX_DP_CELLS {
            return Err(LabError::BudgetExceeded { budget: MAX_DP_CELLS, depth: 0 });
        }
        // Last letter 2i is generator i, 2i + 1 its inverse, `letters` the empty word.
        let width = letters + 1;
        let mut cnt = vec![0.0f64; cells * width];
        cnt[letters] = 1.0;
        let mut usage = vec![0usize; k];
        let mut pairs = Vec::new();
        for idx in 0..cells {
            let mut rem = idx;
            for i in 0..k {
                usage[i] = rem / strides[i];
                rem %= strides[i];
            }
            let len: f64 = usage.iter().zip(&self.lengths).map(|(&u, &l)| u as f64 * l).sum();
            if !within(len, cutoff) {
                continue;
            }
            let row: Vec<f64> = cnt[idx * width..(idx + 1) * width].to_vec();
            let total: f64 = row.iter().sum();
            if total == 0.0 {
                continue;
            }
            pairs.push((len, total));
            for (last, &c) in row.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for g in 0..k {
                    if usage[g] + 1 >= dims[g] || !within(len + self.lengths[g], cutoff) {
                        continue;
                    }
                    let j = idx + strides[g];
                    for letter in [2 * g, 2 * g + 1] {
                        if last != letters && last / 2 == g && last != letter {
                            continue;
                        }
                        cnt[j * width + letter] += c;
                    }
                }
            }
        }
        Ok(Spectrum::from_pairs(pairs))
    }

    /// Length spectrum by explicit depth-first enumeration of reduced words.
    pub fn spectrum_by_enumeration(&self, cutoff: f64) -> Result<Spectrum> {
        let k = self.rank();
        let letters: Vec<usize> = (0..2 * k).collect();
        let mut pairs: Vec<(f64, f64)> = letters
            .par_iter()
            .map(|&first| {
                let mut acc = LengthTally::new(k);
                let l0 = self.lengths[first / 2];
                if within(l0, cutoff) {
                    let slot = acc.slot(l0);
                    self.dfs(first, slot, l0, cutoff, &mut acc);
                }
                acc.lengths.into_iter().zip(acc.counts).collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        if cutoff >= 0.0 {
            pairs.push((0.0, 1.0));
        }
        Ok(Spectrum::from_pairs(pairs))
    }

    fn dfs(&self, last: usize, slot: usize, len: f64, cutoff: f64, acc: &mut LengthTally) {
        acc.counts[slot] += 1.0;
        for next in 0..2 * self.rank() {
            if next / 2 == last / 2 && next != last {
                continue;
            }
            let g = next / 2;
            let l = len + self.lengths[g];
            if within(l, cutoff) {
                let s = acc.step(slot, g, l);
                self.dfs(next, s, l, cutoff, acc);
            }
        }
    }

    /// Reduced words of length `<= cutoff`, as strings over `a, b, ...` with capitals
    /// for inverses.
    pub fn elements(&self, cutoff: f64, budget: usize) -> Result<Vec<Element>> {
        let mut out = vec![Element { id: "e".into(), length: 0.0 }];
        let mut stack: Vec<(String, Option<usize>, f64)> = vec![(String::new(), None, 0.0)];
        while let Some((word, last, len)) = stack.pop() {
            for next in 0..2 * self.rank() {
                if let Some(l) = last {
                    if next / 2 == l / 2 && next != l {
                        continue;
                    }
                }
                let nl = len + self.lengths[next / 2];
                if !within(nl, cutoff) {
                    continue;
                }
                let mut w = word.clone();
                w.push(letter_char(next));
                if out.len() >= budget {
                    return Err(LabError::BudgetExceeded { budget, depth: w.len() - 1 });
                }
                out.push(Element { id: w.clone(), length: nl });
                stack.push((w, Some(next), nl));
            }
        }
        out.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.id.cmp(&b.id)));
        Ok(out)
    }
}

fn letter_char(letter: usize) -> char {
    let base = b'a' + (letter / 2) as u8;
    if letter.is_multiple_of(2) {
        base as char
    } else {
        base.to_ascii_uppercase() as char
    }
}

/// Finitely presented group given by a confluent rewriting system on reduced words,
/// with the word metric of unit generator lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub generators: usize,
    /// Rules `lhs -> rhs` on letters `+g` / `-g` (1-based).
    pub rules: Vec<(Vec<i32>, Vec<i32>)>,
}

const MAX_REWRITES: usize = 100_000;

impl Presentation {
    /// Parse generators `a, b, ...` (capitals are inverses) and rules such as `ba->ab`.
    pub fn parse(generators: usize, rules: &[&str]) -> Result<Self> {
        if generators == 0 || generators > 26 {
            return Err(invalid(format!("need 1 to 26 generators, got {generators}")));
        }
        let word = |s: &str| -> Result<Vec<i32>> {
            s.trim()
                .chars()
                .map(|c| {
                    let g = (c.to_ascii_lowercase() as i32) - ('a' as i32) + 1;
                    if !c.is_ascii_alphabetic() || g < 1 || g > generators as i32 {
                        return Err(LabError::InvalidWord(format!("unknown letter {c:?} in {s:?}")));
                    }
                    Ok(if c.is_ascii_uppercase() { -g } else { g })
                })
                .collect()
        };
        let mut parsed = Vec::new();
        for r in rules {
            let (l, rhs) = r
                .split_once("->")
                .ok_or_else(|| LabError::InvalidWord(format!("rule {r:?} lacks '->'")))?;
            let l = word(l)?;
            if l.is_empty() {
                return Err(LabError::InvalidWord(format!("rule {r:?} has an empty left side")));
            }
            parsed.push((l, word(rhs)?));
        }
        Ok(Presentation { generators, rules: parsed })
    }

    /// Free abelian group `Z^2` with its commutation rules.
    pub fn z2() -> Self {
        Self::parse(2, &["ba->ab", "bA->Ab", "Ba->aB", "BA->AB"]).expect("valid rules")
    }

    /// Normal form of `w`: free reduction plus leftmost rule application until stable.
    pub fn reduce(&self, w: &[i32]) -> Result<Vec<i32>> {
        let mut cur = free_reduce(w);
        for _ in 0..MAX_REWRITES {
            let hit = self.rules.iter().find_map(|(l, r)| {
                cur.windows(l.len()).position(|win| win == l.as_slice()).map(|p| (p, l.len(), r))
            });
            let Some((p, n, r)) = hit else {
                return Ok(cur);
            };
            let mut next = cur[..p].to_vec();
            next.extend_from_slice(r);
            next.extend_from_slice(&cur[p + n..]);
            cur = free_reduce(&next);
        }
        Err(LabError::Degenerate(format!(
            "rewriting did not terminate within {MAX_REWRITES} steps"
        )))
    }

    /// Breadth-first exploration of the Cayley graph up to word length `radius`.
    pub fn elements(&self, radius: f64, budget: usize) -> Result<Vec<Element>> {
        let mut seen: HashMap<Vec<i32>, usize> = HashMap::new();
        seen.insert(Vec::new(), 0);
        let mut frontier: Vec<Vec<i32>> = vec![Vec::new()];
        let mut depth = 0usize;
        while !frontier.is_empty() && within(depth as f64 + 1.0, radius) {
            let mut next = Vec::new();
            for w in &frontier {
                for g in 1..=self.generators as i32 {
                    for x in [g, -g] {
                        let mut v = w.clone();
                        v.push(x);
                        let v = self.reduce(&v)?;
                        if !seen.contains_key(&v) {
                            if seen.len() >= budget {
                                return Err(LabError::BudgetExceeded { budget, depth });
                            }
                            seen.insert(v.clone(), depth + 1);
                            next.push(v);
                        }
                    }
                }
            }
            next.sort();
            frontier = next;
            depth += 1;
        }
        let mut out: Vec<Element> = seen
            .into_iter()
            .map(|(w, d)| Element { id: word_string(&w), length: d as f64 })
            .collect();
        out.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.id.cmp(&b.id)));
        Ok(out)
    }
}

fn free_reduce(w: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn word_string(w: &[i32]) -> String {
    if w.is_empty() {
        return "e".into();
    }
    w.iter()
        .map(|&x| {
            let c = (b'a' + (x.unsigned_abs() - 1) as u8) as char;
            if x < 0 {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}

/// Source of lengths for Poincaré series and growth estimates.
#[derive(Clone, Debug, PartialEq)]
pub enum LengthOracle {
    /// The trivial group.
    Trivial,
    Free(FreeGroup),
    Presented(Presentation),
    /// Ball volumes of real hyperbolic space of the given dimension.
    HyperbolicGrowth { dimension: u32 },
    /// All lengths multiplied by `factor`.
    Rescaled { factor: f64, inner: Box<LengthOracle> },
}

impl LengthOracle {
    pub fn rescaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(invalid(format!("rescaling factor must be positive, got {factor}")));
        }
        Ok(LengthOracle::Rescaled { factor, inner: Box::new(self) })
    }

    pub fn is_discrete(&self) -> bool {
        match self {
            LengthOracle::HyperbolicGrowth { .. } => false,
            LengthOracle::Rescaled { inner, .. } => inner.is_discrete(),
            _ => true,
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            LengthOracle::Trivial => true,
            LengthOracle::Free(f) => f.rank() == 0,
            LengthOracle::Rescaled { inner, .. } => inner.is_trivial(),
            _ => false,
        }
    }

    /// Enumerated elements of length `<= cutoff`, sorted by length.
    pub fn elements(&self, cutoff: f64, budget: usize) -> Result<Vec<Element>> {
        match self {
            LengthOracle::Trivial => Ok(vec![Element { id: "e".into(), length: 0.0 }]),
            LengthOracle::Free(f) => f.elements(cutoff, budget),
            LengthOracle::Presented(p) => p.elements(cutoff, budget),
            LengthOracle::HyperbolicGrowth { .. } => {
                Err(invalid("a volume-growth oracle has no elements to enumerate"))
            }
            LengthOracle::Rescaled { factor, inner } => Ok(inner
                .elements(cutoff / factor, budget)?
                .into_iter()
                .map(|e| Element { id: e.id, length: e.length * factor })
                .collect()),
        }
    }

    /// Length spectrum up to `cutoff`; `None` for volume-growth oracles.
    pub fn spectrum(&self, cutoff: f64) -> Result<Option<Spectrum>> {
        Ok(Some(match self {
            LengthOracle::Trivial => Spectrum::from_pairs(vec![(0.0, 1.0)]),
            LengthOracle::Free(f) => f.spectrum(cutoff)?,
            LengthOracle::Presented(p) => Spectrum::from_pairs(
                p.elements(cutoff, DEFAULT_BUDGET)?.into_iter().map(|e| (e.length, 1.0)).collect(),
            ),
            LengthOracle::HyperbolicGrowth { .. } => return Ok(None),
            LengthOracle::Rescaled { factor, inner } => match inner.spectrum(cutoff / factor)? {
                Some(s) => Spectrum {
                    levels: s.levels.into_iter().map(|(l, c)| (l * factor, c)).collect(),
                },
                None => return Ok(None),
            },
        }))
    }

    /// Counting function `N(R)`.
    pub fn count(&self, r: f64) -> Result<f64> {
        match self {
            LengthOracle::HyperbolicGrowth { dimension } => hyperbolic_ball_volume(*dimension, r),
            LengthOracle::Rescaled { factor, inner } if !inner.is_discrete() => inner.count(r / factor),
            _ => Ok(self.spectrum(r)?.map(|s| s.count(r)).unwrap_or(0.0)),
        }
    }
}

/// Volume of a ball of radius `r` in real hyperbolic `n`-space.
pub fn hyperbolic_ball_volume(n: u32, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("hyperbolic dimension must be at least 2, got {n}")));
    }
    if r <= 0.0 {
        return Ok(0.0);
    }
    use std::f64::consts::PI;
    Ok(match n {
        2 => 2.0 * PI * (r.cosh() - 1.0),
        3 => PI * ((2.0 * r).sinh() - 2.0 * r),
        _ => {
            let k = n - 1;
            unit_sphere_area(k) * integrate(|x| x.sinh().powi(k as i32), 0.0, r, 1e-13, 0.0)?.value
        }
    })
}

/// `sum e^{-s |g|}` over elements with `|g| <= cutoff`; for a volume-growth oracle the
/// Stieltjes integral `int_0^cutoff e^{-s R} dN(R)`.
pub fn poincare_partial(oracle: &LengthOracle, s: f64, cutoff: f64) -> Result<f64> {
    if !cutoff.is_finite() {
        return Err(invalid("cutoff must be finite"));
    }
    match oracle {
        LengthOracle::HyperbolicGrowth { dimension } => {
            if *dimension < 2 {
                return Err(invalid(format!("hyperbolic dimension must be at least 2, got {dimension}")));
            }
            if cutoff <= 0.0 {
                return Ok(0.0);
            }
            let k = (dimension - 1) as i32;
            let omega = unit_sphere_area(dimension - 1);
            Ok(omega * integrate(|x| (-s * x).exp() * x.sinh().powi(k), 0.0, cutoff, 1e-13, 0.0)?.value)
        }
        LengthOracle::Rescaled { factor, inner } if !inner.is_discrete() => {
            poincare_partial(inner, s * factor, cutoff / factor)
        }
        _ => Ok(oracle.spectrum(cutoff)?.map(|sp| sp.poincare(s, cutoff)).unwrap_or(0.0)),
    }
}

/// Growth-rate estimate from a least-squares fit of `ln N(R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// `|slope - slope over the upper half of the window|`.
    pub stability: f64,
    /// Whether `stability <= tol`.
    pub converged: bool,
}

fn fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of `ln N(R)` over `[R_max/2, R_max]`.
///
/// Discrete oracles are sampled at the lengths they attain, volume-growth oracles on
/// a uniform grid of 1001 points.
pub fn critical_exponent(oracle: &LengthOracle, tol: f64, r_max: f64) -> Result<ExponentEstimate> {
    if !(r_max > 0.0) || !r_max.is_finite() || !(tol > 0.0) {
        return Err(invalid(format!("need positive tol and finite R_max, got {tol}, {r_max}")));
    }
    let (lo, hi) = (r_max / 2.0, r_max);
    let points: Vec<(f64, f64)> = match oracle.spectrum(hi)? {
        Some(sp) => {
            let mut cum = 0.0;
            let mut pts = Vec::new();
            for &(l, c) in &sp.levels {
                cum += c;
                if l >= lo - 1e-12 * lo.max(1.0) && within(l, hi) {
                    pts.push((l, cum.ln()));
                }
            }
            pts
        }
        None => (0..=1000)
            .map(|i| {
                let r = lo + (hi - lo) * i as f64 / 1000.0;
                oracle.count(r).map(|n| (r, n.ln()))
            })
            .collect::<Result<_>>()?,
    };
    let points: Vec<(f64, f64)> = points.into_iter().filter(|p| p.1.is_finite()).collect();
    if points.len() < 3 {
        return Err(LabError::Inconclusive(format!(
            "only {} growth samples in [{lo}, {hi}]",
            points.len()
        )));
    }
    let (slope, intercept) = fit(&points);
    let upper: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= 0.75 * hi).collect();
    let stability = if upper.len() >= 3 { (fit(&upper).0 - slope).abs() } else { f64::INFINITY };
    Ok(ExponentEstimate {
        slope,
        intercept,
        window: (lo, hi),
        samples: points.len(),
        stability,
        converged: stability <= tol,
    })
}
