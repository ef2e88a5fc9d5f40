//! Free products joined by a long tube: syllable lengths and the geometric bound on
//! their Poincaré series.

use std::fmt::Write as _;

use crate::error::{invalid, LabError, Result};

use super::oracle::{critical_exponent, poincare_partial, Element, LengthOracle};

/// Which factor of `G1 * G2` a syllable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// One syllable: an element of a factor with its length there.
#[derive(Clone, Debug, PartialEq)]
pub struct Syllable {
    pub factor: Factor,
    /// Element label; `"e"` is the identity.
    pub element: String,
    pub length: f64,
}

impl Syllable {
    pub fn new(factor: Factor, element: impl Into<String>, length: f64) -> Self {
        Syllable { factor, element: element.into(), length }
    }

    pub fn identity(factor: Factor) -> Self {
        Syllable::new(factor, "e", 0.0)
    }

    pub fn is_identity(&self) -> bool {
        self.element == "e"
    }
}

/// Alternating product of syllables. Identity syllables may only pad the two ends.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SyllableWord {
    pub syllables: Vec<Syllable>,
}

impl SyllableWord {
    pub fn new(syllables: Vec<Syllable>) -> Result<Self> {
        let w = SyllableWord { syllables };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.syllables.len();
        for (i, s) in self.syllables.iter().enumerate() {
            if !(s.length >= 0.0) || !s.length.is_finite() {
                return Err(LabError::InvalidWord(format!("syllable {i} has length {}", s.length)));
            }
            if s.is_identity() && i != 0 && i + 1 != n {
                return Err(LabError::InvalidWord(format!("identity syllable at interior position {i}")));
            }
            if s.is_identity() && s.length != 0.0 {
                return Err(LabError::InvalidWord(format!("identity syllable {i} has nonzero length")));
            }
            if i > 0 && self.syllables[i - 1].factor == s.factor {
                return Err(LabError::InvalidWord(format!(
                    "syllables {} and {i} lie in the same factor",
                    i - 1
                )));
            }
        }
        Ok(())
    }
}

/// `sum over syllables of (factor length + 2L)`: each syllable crosses the tube once
/// in each direction.
pub fn syllable_lower_bound(w: &SyllableWord, l: f64) -> Result<f64> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(invalid(format!("L must be positive, got {l}")));
    }
    w.validate()?;
    Ok(w.syllables.iter().map(|s| s.length + 2.0 * l).sum())
}

/// Closed-form bound on the free-product series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeBound {
    /// `e^{-4 s L} P1*(s) P2*(s)`.
    pub q: f64,
    /// `1 + 4q/(1-q)`, `None` when `q >= 1` (the bound diverges).
    pub bound: Option<f64>,
    /// `ln(P1* P2*)/(4s)`: the bound is finite exactly for `L` above this.
    pub threshold_l: f64,
}

/// Bound `1 + 4q/(1-q)` on the padded free-product series, from the identity-free
/// factor series `P1*`, `P2*` at `s`. It is valid when both factor series are at least 1.
pub fn tube_series_bound(
    p1_star: impl Fn(f64) -> f64,
    p2_star: impl Fn(f64) -> f64,
    l: f64,
    s: f64,
) -> Result<TubeBound> {
    if !(l > 0.0) || !(s > 0.0) {
        return Err(invalid(format!("L and s must be positive, got {l}, {s}")));
    }
    let (p1, p2) = (p1_star(s), p2_star(s));
    if !(p1 > 0.0 && p2 > 0.0) || !p1.is_finite() || !p2.is_finite() {
        return Err(invalid(format!("factor series must be positive and finite, got {p1}, {p2}")));
    }
    let q = (-4.0 * s * l).exp() * p1 * p2;
    Ok(TubeBound {
        q,
        bound: (q < 1.0).then(|| 1.0 + 4.0 * q / (1.0 - q)),
        threshold_l: (p1 * p2).ln() / (4.0 * s),
    })
}

/// Free-product elements in padded normal form `h'_1 h''_1 ... h'_k h''_k`, where only
/// `h'_1` and `h''_k` may be trivial, with modeled length `syllable_lower_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeProductEnumeration {
    /// Words with their modeled lengths, by pair count then length.
    pub words: Vec<(SyllableWord, f64)>,
    /// Largest pair count enumerated completely.
    pub complete_pairs: usize,
    pub truncated: bool,
}

impl FreeProductEnumeration {
    /// `1 + sum e^{-s length}` over the enumerated words.
    pub fn partial_sum(&self, s: f64) -> f64 {
        1.0 + self.words.iter().map(|(_, l)| (-s * l).exp()).sum::<f64>()
    }
}

struct PairSearch<'a> {
    first: &'a [Element],
    second: &'a [Element],
    l: f64,
    cutoff: f64,
    budget: usize,
    out: Vec<(SyllableWord, f64)>,
    overflow: bool,
}

impl PairSearch<'_> {
    fn extend(&mut self, pos: usize, pairs: usize, cur: &mut Vec<Syllable>, len: f64) {
        if self.overflow {
            return;
        }
        let last = pos + 1 == 2 * pairs;
        // Every later syllable costs at least 2L, and interior ones at least one more unit
        // of factor length; only the tube part is used for pruning.
        let rest = (2 * pairs - pos - 1) as f64 * 2.0 * self.l;
        let (factor, pool) = if pos.is_multiple_of(2) {
            (Factor::First, self.first)
        } else {
            (Factor::Second, self.second)
        };
        let may_pad = pos == 0 || last;
        let all_trivial_so_far = cur.iter().all(Syllable::is_identity);
        if may_pad && !(last && all_trivial_so_far) {
            let nl = len + 2.0 * self.l;
            if nl + rest <= self.cutoff * (1.0 + 1e-12) {
                cur.push(Syllable::identity(factor));
                self.visit(pos, pairs, cur, nl);
                cur.pop();
            }
        }
        for e in pool {
            let nl = len + e.length + 2.0 * self.l;
            if nl + rest > self.cutoff * (1.0 + 1e-12) {
                break;
            }
            cur.push(Syllable::new(factor, e.id.clone(), e.length));
            self.visit(pos, pairs, cur, nl);
            cur.pop();
            if self.overflow {
                return;
            }
        }
    }

    fn visit(&mut self, pos: usize, pairs: usize, cur: &mut Vec<Syllable>, len: f64) {
        if pos + 1 == 2 * pairs {
            if self.out.len() >= self.budget {
                self.overflow = true;
                return;
            }
            self.out.push((SyllableWord { syllables: cur.clone() }, len));
        } else {
            self.extend(pos + 1, pairs, cur, len);
        }
    }
}

/// Enumerate the padded normal forms of `G1 * G2` with modeled length `<= cutoff`,
/// pair-count major and length minor, keeping only complete pair counts within `budget`.
pub fn enumerate_free_product(
    first: &[Element],
    second: &[Element],
    l: f64,
    cutoff: f64,
    budget: usize,
) -> Result<FreeProductEnumeration> {
    if !(l > 0.0) {
        return Err(invalid(format!("L must be positive, got {l}")));
    }
    let nontrivial = |els: &[Element]| -> Vec<Element> {
        let mut v: Vec<Element> = els.iter().filter(|e| e.id != "e").cloned().collect();
        v.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.id.cmp(&b.id)));
        v
    };
    let (n1, n2) = (nontrivial(first), nontrivial(second));
    let mut words = Vec::new();
    let mut complete_pairs = 0;
    let mut truncated = false;
    let mut pairs = 1;
    while 4.0 * l * pairs as f64 <= cutoff * (1.0 + 1e-12) {
        let mut search = PairSearch {
            first: &n1,
            second: &n2,
            l,
            cutoff,
            budget: budget.saturating_sub(words.len()),
            out: Vec::new(),
            overflow: false,
        };
        search.extend(0, pairs, &mut Vec::new(), 0.0);
        if search.overflow {
            truncated = true;
            break;
        }
        let mut level = search.out;
        level.sort_by(|a, b| a.1.total_cmp(&b.1));
        words.extend(level);
        complete_pairs = pairs;
        pairs += 1;
    }
    Ok(FreeProductEnumeration { words, complete_pairs, truncated })
}

/// One `s` value of a free-product check.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeProductRow {
    pub s: f64,
    pub partial_sum: f64,
    pub cutoff: f64,
    pub p1_star: f64,
    pub p2_star: f64,
    pub bound: Option<TubeBound>,
    /// `s` exceeds both factor exponents and `L` exceeds the threshold.
    pub applicable: bool,
    /// Whether the partial sum respects the finite bound.
    pub within_bound: Option<bool>,
    pub converged: bool,
}

/// Result of [`free_product_exponent_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct FreeProductReport {
    pub l: f64,
    pub cutoff: f64,
    pub factor_exponents: (f64, f64),
    pub elements: usize,
    pub complete_pairs: usize,
    pub truncated: bool,
    /// One factor is trivial, so the product is the other factor with no tube crossings.
    pub degenerate: bool,
    /// Every enumerated modeled length equals the syllable bound of its word.
    pub lengths_match_model: bool,
    pub rows: Vec<FreeProductRow>,
}

impl FreeProductReport {
    /// Whether every applicable row respects its bound.
    pub fn passed(&self) -> bool {
        self.lengths_match_model && self.rows.iter().all(|r| !r.applicable || r.within_bound == Some(true))
    }

    /// `s,partial_sum,cutoff,converged` followed by the bound columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,partial_sum,cutoff,converged,q,bound,threshold_L,applicable,within_bound\n");
        for r in &self.rows {
            let (q, b, t) = match r.bound {
                Some(b) => (
                    format!("{:.16e}", b.q),
                    b.bound.map_or("inf".to_string(), |v| format!("{v:.16e}")),
                    format!("{:.16e}", b.threshold_l),
                ),
                None => ("nan".into(), "nan".into(), "nan".into()),
            };
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{},{q},{b},{t},{},{}",
                r.s,
                r.partial_sum,
                r.cutoff,
                r.converged,
                r.applicable,
                r.within_bound.map_or("na".to_string(), |w| w.to_string())
            );
        }
        out
    }
}

fn exponent_or_zero(o: &LengthOracle, r_max: f64) -> Result<f64> {
    if o.is_trivial() {
        return Ok(0.0);
    }
    match critical_exponent(o, 1e-3, r_max) {
        Ok(e) => Ok(e.slope.max(0.0)),
        Err(LabError::Inconclusive(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Enumerate `G1 * G2` under the tube length model up to `cutoff` and compare the
/// partial Poincaré sums with [`tube_series_bound`] for each `s`.
pub fn free_product_exponent_check(
    factor1: &LengthOracle,
    factor2: &LengthOracle,
    l: f64,
    s_grid: &[f64],
    cutoff: f64,
    budget: usize,
) -> Result<FreeProductReport> {
    if !(l > 0.0) || !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(invalid(format!("L and cutoff must be positive, got {l}, {cutoff}")));
    }
    if s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(invalid("s values must be positive"));
    }
    let exps = (exponent_or_zero(factor1, cutoff)?, exponent_or_zero(factor2, cutoff)?);
    let degenerate = factor1.is_trivial() || factor2.is_trivial();
    let mut rows = Vec::new();
    let (elements, complete_pairs, truncated, lengths_match_model);
    if degenerate {
        let other = if factor1.is_trivial() { factor2 } else { factor1 };
        elements = other.elements(cutoff, budget)?.len();
        complete_pairs = 0;
        truncated = false;
        lengths_match_model = true;
        for &s in s_grid {
            let partial_sum = poincare_partial(other, s, cutoff)?;
            rows.push(FreeProductRow {
                s,
                partial_sum,
                cutoff,
                p1_star: poincare_partial(factor1, s, cutoff)? - 1.0,
                p2_star: poincare_partial(factor2, s, cutoff)? - 1.0,
                bound: None,
                applicable: false,
                within_bound: None,
                converged: true,
            });
        }
    } else {
        let e1 = factor1.elements(cutoff, budget)?;
        let e2 = factor2.elements(cutoff, budget)?;
        let en = enumerate_free_product(&e1, &e2, l, cutoff, budget)?;
        elements = en.words.len() + 1;
        complete_pairs = en.complete_pairs;
        truncated = en.truncated;
        lengths_match_model = en
            .words
            .iter()
            .all(|(w, len)| syllable_lower_bound(w, l).is_ok_and(|b| (b - len).abs() <= 1e-12 * b.max(1.0)));
        for &s in s_grid {
            let p1 = poincare_partial(factor1, s, cutoff)? - 1.0;
            let p2 = poincare_partial(factor2, s, cutoff)? - 1.0;
            let b = tube_series_bound(|_| p1, |_| p2, l, s)?;
            let partial_sum = en.partial_sum(s);
            let converged = b.bound.is_some();
            let applicable = converged && s > exps.0.max(exps.1);
            rows.push(FreeProductRow {
                s,
                partial_sum,
                cutoff,
                p1_star: p1,
                p2_star: p2,
                within_bound: b.bound.map(|v| partial_sum <= v),
                bound: Some(b),
                applicable,
                converged,
            });
        }
    }
    Ok(FreeProductReport {
        l,
        cutoff,
        factor_exponents: exps,
        elements,
        complete_pairs,
        truncated,
        degenerate,
        lengths_match_model,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::oracle::{FreeGroup, DEFAULT_BUDGET};

    fn z() -> LengthOracle {
        LengthOracle::Free(FreeGroup::unit(1))
    }

    #[test]
    fn syllable_bound_examples() {
        let one = SyllableWord::new(vec![Syllable::new(Factor::First, "aaa", 3.0)]).unwrap();
        assert_eq!(syllable_lower_bound(&one, 5.0).unwrap(), 13.0);
        let two = SyllableWord::new(vec![
            Syllable::new(Factor::First, "a", 1.0),
            Syllable::new(Factor::Second, "bb", 2.0),
        ])
        .unwrap();
        assert_eq!(syllable_lower_bound(&two, 5.0).unwrap(), 23.0);
        assert_eq!(syllable_lower_bound(&SyllableWord::default(), 5.0).unwrap(), 0.0);
    }

    #[test]
    fn malformed_words_are_rejected() {
        let same = SyllableWord {
            syllables: vec![Syllable::new(Factor::First, "a", 1.0), Syllable::new(Factor::First, "b", 1.0)],
        };
        assert!(matches!(syllable_lower_bound(&same, 1.0), Err(LabError::InvalidWord(_))));
        let inner_identity = SyllableWord {
            syllables: vec![
                Syllable::new(Factor::First, "a", 1.0),
                Syllable::identity(Factor::Second),
                Syllable::new(Factor::First, "a", 1.0),
            ],
        };
        assert!(inner_identity.validate().is_err());
    }

    #[test]
    fn bound_examples() {
        let b = tube_series_bound(|_| 0.5 * 1f64.exp(), |_| 1.0, 1.0, 0.25).unwrap();
        assert!((b.q - 0.5).abs() < 1e-15);
        assert!((b.bound.unwrap() - 5.0).abs() < 1e-14);
        let e2 = 2f64.exp();
        let t = tube_series_bound(|_| e2, |_| e2, 0.5, 1.0).unwrap();
        assert!((t.threshold_l - 1.0).abs() < 1e-15);
        assert!(t.bound.is_none());
        assert!(tube_series_bound(|_| 0.0, |_| 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn padded_forms_are_counted_once() {
        // Z * Z with L = 1 and cutoff 5: a single pair costs 4L = 4 plus factor lengths,
        // so only words padded at one end fit.
        let e1 = z().elements(10.0, DEFAULT_BUDGET).unwrap();
        let en = enumerate_free_product(&e1, &e1, 1.0, 5.0, DEFAULT_BUDGET).unwrap();
        // (a^{+-1}, e) and (e, b^{+-1}) at length 5.
        assert_eq!(en.words.len(), 4);
        assert!(en.words.iter().all(|(_, l)| *l == 5.0));
    }

    #[test]
    fn zz_series_below_bound() {
        let r = free_product_exponent_check(&z(), &z(), 3.0, &[0.5, 1.0], 30.0, DEFAULT_BUDGET).unwrap();
        assert!(r.lengths_match_model);
        assert!(!r.truncated);
        assert!(r.passed());
        assert!(r.rows.iter().all(|row| row.applicable));
    }

    #[test]
    fn trivial_factor_gives_other_series() {
        let r = free_product_exponent_check(&z(), &LengthOracle::Trivial, 3.0, &[0.7], 20.0, DEFAULT_BUDGET)
            .unwrap();
        assert!(r.degenerate);
        assert_eq!(r.rows[0].partial_sum, poincare_partial(&z(), 0.7, 20.0).unwrap());
    }
}
