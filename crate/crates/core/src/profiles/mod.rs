//! One-dimensional warping profiles.
//!
//! A [`Profile`] is a piecewise function on an interval, stored as contiguous
//! [`Segment`]s. Each segment holds an analytic [`Piece`] plus an additive offset.
//! Evaluation is right-continuous; [`Profile::eval_side`] gives one-sided values at
//! breakpoints.
//!
//! Profiles can be evaluated in log form ([`LogJet`]). This keeps values such as
//! `e^{-2000}` usable: curvatures only need `phi'/phi` and `phi''/phi`.

mod bump;
pub(crate) mod cap;
mod corner;
mod table;

use std::sync::Arc;

use crate::error::{invalid, precondition, LabError, Result};

pub use bump::{bump, bump_jet, scan_bump_d2, BUMP_D2_MAX, BUMP_D2_MIN, BUMP_SCAN_POINTS};
pub use cap::{
    cusp_cap_profile, exp_profile, ode_min_location, ode_min_value, ode_profile, CapParameters,
};
pub use corner::{c1_interpolate, c2_flatten};
pub use table::ProfileTable;

/// Value and first two derivatives at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    /// Log form. Nonpositive values give a non-finite `ln_value`.
    pub fn to_log(self) -> LogJet {
        LogJet {
            ln_value: self.value.ln(),
            log_d1: self.d1 / self.value,
            ratio_d2: self.d2 / self.value,
        }
    }
}

/// `ln(value)`, `d1/value` and `d2/value` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogJet {
    pub ln_value: f64,
    pub log_d1: f64,
    pub ratio_d2: f64,
}

impl LogJet {
    pub fn to_jet(self) -> Jet {
        let v = self.ln_value.exp();
        Jet::new(v, self.log_d1 * v, self.ratio_d2 * v)
    }

    fn shifted(self, ln_scale: f64) -> Self {
        Self {
            ln_value: self.ln_value + ln_scale,
            ..self
        }
    }
}

/// Smoothness class, ordered from weakest to strongest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    C0,
    C1,
    C2,
    Cinf,
}

/// Which one-sided limit to take at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Exact behaviour of a profile from some point to the end of its domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// `phi(t) = phi(from) * e^{-rate (t - from)}` for `t >= from`.
    Exponential { from: f64, rate: f64 },
    /// `phi` is constant for `t >= from`.
    Constant { from: f64 },
    /// Nothing known.
    Open,
}

/// Corner-smoothing window. `x = t - origin`, `u = x / width`.
///
/// The smoothed quantity has derivative `a + (b - a) S(u)`, with `S` a monotone
/// step from 0 to 1 whose mean matches the required increment.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub origin: f64,
    pub width: f64,
    pub v0: f64,
    pub s0: f64,
    pub a: f64,
    pub b: f64,
    pub step: Step,
    pub order: WindowOrder,
}

/// `Power(p)`: `S = u^p`. `Reflected(q)`: `S = 1 - (1-u)^q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Power(f64),
    Reflected(f64),
}

/// Whether the window smooths a kink of the value or of the first derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowOrder {
    First,
    Second,
}

impl Step {
    /// Step with the given mean over [0, 1]; `mean` must lie in (0, 1).
    pub fn with_mean(mean: f64) -> Self {
        if mean <= 0.5 {
            Step::Power(1.0 / mean - 1.0)
        } else {
            Step::Reflected(mean / (1.0 - mean))
        }
    }

    /// `(S, S', I1, I2)` at `u`, with `I1 = int_0^u S` and `I2 = int_0^u I1`.
    pub fn eval(self, u: f64) -> (f64, f64, f64, f64) {
        let u = u.clamp(0.0, 1.0);
        match self {
            Step::Power(p) => {
                let up = u.powf(p);
                let ds = if p == 1.0 { 1.0 } else { p * u.powf(p - 1.0) };
                (
                    up,
                    ds,
                    up * u / (p + 1.0),
                    up * u * u / ((p + 1.0) * (p + 2.0)),
                )
            }
            Step::Reflected(q) => {
                let v = 1.0 - u;
                let vq = v.powf(q);
                let ds = if q == 1.0 { 1.0 } else { q * v.powf(q - 1.0) };
                let i1 = u - (1.0 - vq * v) / (q + 1.0);
                let i2 = u * u / 2.0 - u / (q + 1.0) + (1.0 - vq * v * v) / ((q + 1.0) * (q + 2.0));
                (1.0 - vq, ds, i1, i2)
            }
        }
    }

    /// `I2(1)`.
    pub fn double_integral(self) -> f64 {
        match self {
            Step::Power(p) => 1.0 / ((p + 1.0) * (p + 2.0)),
            Step::Reflected(q) => 0.5 - 1.0 / (q + 1.0) + 1.0 / ((q + 1.0) * (q + 2.0)),
        }
    }
}

impl Window {
    fn jet(&self, t: f64) -> Jet {
        let w = self.width;
        let x = t - self.origin;
        let (s, ds, i1, i2) = self.step.eval(x / w);
        let db = self.b - self.a;
        match self.order {
            WindowOrder::First => Jet::new(
                self.v0 + self.a * x + db * w * i1,
                self.a + db * s,
                db * ds / w,
            ),
            WindowOrder::Second => Jet::new(
                self.v0 + self.s0 * x + 0.5 * self.a * x * x + db * w * w * i2,
                self.s0 + self.a * x + db * w * i1,
                self.a + db * s,
            ),
        }
    }
}

/// Collar blend of a radius: `sqrt(bump(u) r_end^2 + (1 - bump(u)) r_mid^2)` with
/// `u = (t - origin) / width`; `width` may be negative for a mirrored blend.
#[derive(Clone, Debug, PartialEq)]
pub struct Blend {
    pub origin: f64,
    pub width: f64,
    pub r_mid: f64,
    pub r_end: f64,
}

impl Blend {
    fn jet(&self, t: f64) -> Jet {
        let u = (t - self.origin) / self.width;
        let b = bump_jet(u);
        let diff = self.r_end * self.r_end - self.r_mid * self.r_mid;
        let q = self.r_mid * self.r_mid + b.value * diff;
        let q1 = b.d1 * diff / self.width;
        let q2 = b.d2 * diff / (self.width * self.width);
        let r = q.sqrt();
        let r1 = q1 / (2.0 * r);
        let r2 = (2.0 * q * q2 - q1 * q1) / (4.0 * q * r);
        Jet::new(r, r1, r2)
    }
}

/// Analytic building block of a segment. All pieces take absolute `t`.
#[derive(Clone, Debug)]
pub enum Piece {
    /// `e^{ln_amp - rate t}`.
    Exp { ln_amp: f64, rate: f64 },
    /// `a e^{-k t} + b e^{k t}`.
    TwoExp { a: f64, b: f64, k: f64 },
    /// `sum_i coeffs[i] (t - origin)^i`.
    Poly { origin: f64, coeffs: Vec<f64> },
    /// Corner-smoothing window.
    Window(Window),
    /// `e^{-t} (bump(u) + (1 - bump(u)) terminal)` with `u = (t - t_big) / t_big`.
    Conformal { t_big: f64, terminal: f64 },
    /// Radius blend on a tube collar.
    Blend(Blend),
    /// `e^{ln_scale} inner(t - shift)`.
    Scaled {
        ln_scale: f64,
        shift: f64,
        inner: Arc<Profile>,
    },
}

impl Piece {
    pub fn constant(value: f64) -> Self {
        Piece::Poly {
            origin: 0.0,
            coeffs: vec![value],
        }
    }

    fn jet(&self, t: f64, side: Side) -> Jet {
        match self {
            Piece::Exp { .. } | Piece::Conformal { .. } | Piece::Scaled { .. } => {
                self.log_jet(t, side).to_jet()
            }
            Piece::TwoExp { a, b, k } => {
                let em = a * (-k * t).exp();
                let ep = b * (k * t).exp();
                Jet::new(em + ep, k * (ep - em), k * k * (em + ep))
            }
            Piece::Poly { origin, coeffs } => {
                let x = t - origin;
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    d2 = d2 * x + 2.0 * d1;
                    d1 = d1 * x + v;
                    v = v * x + c;
                }
                Jet::new(v, d1, d2)
            }
            Piece::Window(w) => w.jet(t),
            Piece::Blend(b) => b.jet(t),
        }
    }

    fn log_jet(&self, t: f64, side: Side) -> LogJet {
        match self {
            Piece::Exp { ln_amp, rate } => LogJet {
                ln_value: ln_amp - rate * t,
                log_d1: -rate,
                ratio_d2: rate * rate,
            },
            Piece::Conformal { t_big, terminal } => {
                let b = bump_jet((t - t_big) / t_big);
                let g = terminal + (1.0 - terminal) * b.value;
                let g1 = (1.0 - terminal) * b.d1 / t_big;
                let g2 = (1.0 - terminal) * b.d2 / (t_big * t_big);
                LogJet {
                    ln_value: -t + g.ln(),
                    log_d1: -1.0 + g1 / g,
                    ratio_d2: 1.0 - 2.0 * g1 / g + g2 / g,
                }
            }
            Piece::Scaled {
                ln_scale,
                shift,
                inner,
            } => {
                // `t - shift` carries the rounding of `t`; an outer breakpoint must map
                // onto the inner breakpoint it came from, not just beside it.
                let mut x = t - shift;
                let slack = 4.0 * f64::EPSILON * t.abs().max(shift.abs());
                if let Some(&b) = inner.breakpoints().iter().find(|&&b| (x - b).abs() <= slack) {
                    x = b;
                }
                inner.log_eval_unchecked(x, side).shifted(*ln_scale)
            }
            _ => self.jet(t, side).to_log(),
        }
    }
}

/// A piece restricted to `[start, end]` with an additive offset.
#[derive(Clone, Debug)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub piece: Piece,
    pub offset: f64,
}

impl Segment {
    pub fn new(start: f64, end: f64, piece: Piece) -> Self {
        Self {
            start,
            end,
            piece,
            offset: 0.0,
        }
    }

    fn jet(&self, t: f64, side: Side) -> Jet {
        let mut j = self.piece.jet(t, side);
        j.value += self.offset;
        j
    }

    fn log_jet(&self, t: f64, side: Side) -> LogJet {
        if self.offset == 0.0 {
            self.piece.log_jet(t, side)
        } else {
            self.jet(t, side).to_log()
        }
    }
}

/// Piecewise warping profile.
#[derive(Clone, Debug)]
pub struct Profile {
    name: String,
    segments: Vec<Segment>,
    breakpoints: Vec<f64>,
    smoothness: Smoothness,
    tail: Tail,
}

const MATCH_TOL: f64 = 1e-10;

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= MATCH_TOL * x.abs().max(y.abs()).max(1.0)
}

impl Profile {
    /// Build from contiguous segments. Smoothness is detected from the one-sided
    /// jets at the breakpoints; a value jump is rejected.
    pub fn from_segments(name: &str, segments: Vec<Segment>, tail: Tail) -> Result<Self> {
        if segments.is_empty() {
            return Err(invalid("profile needs at least one segment"));
        }
        for s in &segments {
            if s.start.is_nan() || s.end.is_nan() || s.start >= s.end {
                return Err(invalid(format!("empty segment [{}, {}]", s.start, s.end)));
            }
        }
        for pair in segments.windows(2) {
            if pair[0].end != pair[1].start {
                return Err(invalid(format!(
                    "segments not contiguous at {} / {}",
                    pair[0].end, pair[1].start
                )));
            }
        }
        let mut breakpoints: Vec<f64> = segments[1..].iter().map(|s| s.start).collect();
        let mut smoothness = Smoothness::Cinf;
        for s in &segments {
            if let Piece::Scaled { shift, inner, .. } = &s.piece {
                smoothness = smoothness.min(inner.smoothness);
                breakpoints.extend(
                    inner
                        .breakpoints
                        .iter()
                        .map(|b| b + shift)
                        .filter(|&b| b > s.start && b < s.end),
                );
            }
        }
        for pair in segments.windows(2) {
            let t = pair[0].end;
            let l = pair[0].jet(t, Side::Left);
            let r = pair[1].jet(t, Side::Right);
            let level = if !close(l.value, r.value) {
                return Err(precondition(format!(
                    "value jumps from {} to {} at t = {t}",
                    l.value, r.value
                )));
            } else if !close(l.d1, r.d1) {
                Smoothness::C0
            } else if !close(l.d2, r.d2) {
                Smoothness::C1
            } else {
                Smoothness::C2
            };
            smoothness = smoothness.min(level);
        }
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Self {
            name: name.split_whitespace().collect::<Vec<_>>().join("_"),
            segments,
            breakpoints,
            smoothness,
            tail,
        })
    }

    /// Single analytic piece on `[lo, hi]`.
    pub fn analytic(name: &str, lo: f64, hi: f64, piece: Piece, tail: Tail) -> Result<Self> {
        Self::from_segments(name, vec![Segment::new(lo, hi, piece)], tail)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        (
            self.segments[0].start,
            self.segments[self.segments.len() - 1].end,
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Sorted interior points where smoothness may drop.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub(crate) fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if t.is_nan() || t < lo || t > hi {
            return Err(LabError::OutOfRange { t, lo, hi });
        }
        Ok(())
    }

    fn segment_at(&self, t: f64, side: Side) -> &Segment {
        let n = self.segments.len();
        let idx = match side {
            Side::Right => self.segments.partition_point(|s| s.start <= t).max(1) - 1,
            Side::Left => self.segments.partition_point(|s| s.end < t).min(n - 1),
        };
        &self.segments[idx]
    }

    /// Right-continuous jet at `t`.
    pub fn eval(&self, t: f64) -> Result<Jet> {
        self.eval_side(t, Side::Right)
    }

    /// One-sided jet at `t`; the two sides differ only at breakpoints.
    pub fn eval_side(&self, t: f64, side: Side) -> Result<Jet> {
        self.check_domain(t)?;
        Ok(self.segment_at(t, side).jet(t, side))
    }

    pub fn eval0(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.value)
    }

    pub fn eval1(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.d1)
    }

    pub fn eval2(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.d2)
    }

    /// Right-continuous log jet at `t`.
    pub fn log_eval(&self, t: f64) -> Result<LogJet> {
        self.log_eval_side(t, Side::Right)
    }

    pub fn log_eval_side(&self, t: f64, side: Side) -> Result<LogJet> {
        self.check_domain(t)?;
        Ok(self.log_eval_unchecked(t, side))
    }

    fn log_eval_unchecked(&self, t: f64, side: Side) -> LogJet {
        self.segment_at(t, side).log_jet(t, side)
    }

    /// Keep the parts outside `(lo, hi)`, insert `piece` on `[lo, hi]`, and add
    /// `right_offset` to everything right of `hi`.
    pub(crate) fn splice(
        &self,
        lo: f64,
        hi: f64,
        piece: Piece,
        right_offset: f64,
        tail: Tail,
    ) -> Result<Self> {
        let mut out = Vec::new();
        for s in &self.segments {
            if s.start < lo {
                let mut c = s.clone();
                c.end = c.end.min(lo);
                out.push(c);
            }
        }
        out.push(Segment::new(lo, hi, piece));
        for s in &self.segments {
            if s.end > hi {
                let mut c = s.clone();
                c.start = c.start.max(hi);
                c.offset += right_offset;
                out.push(c);
            }
        }
        Self::from_segments(&self.name, out, tail)
    }
}
