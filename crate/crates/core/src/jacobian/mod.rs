//! Eigenvalue, Jacobi-field and Jacobian estimates used by the barycenter method.

mod ode;

pub use ode::{integrate, StepStats};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};

/// Eigenvalues in `[0, 1]` summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPoint {
    eigenvalues: Vec<f64>,
}

impl SpectrumPoint {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(invalid("spectrum is empty"));
        }
        if let Some(h) = eigenvalues.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            return Err(invalid(format!("eigenvalue {h} lies outside [0, 1]")));
        }
        let s: f64 = eigenvalues.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("eigenvalues sum to {s}, not 1")));
        }
        Ok(SpectrumPoint { eigenvalues })
    }

    pub fn uniform(n: usize) -> Self {
        SpectrumPoint { eigenvalues: vec![1.0 / n as f64; n] }
    }

    /// Uniformly distributed point of the simplex.
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = e.iter().sum();
        SpectrumPoint { eigenvalues: e.into_iter().map(|x| x / s).collect() }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// `prod h_i^{1/2} / prod (1 - h_i)`; an eigenvalue equal to 1 is a pole and gives `+inf`.
pub fn phi_of_spectrum(p: &SpectrumPoint) -> f64 {
    ln_phi(p.eigenvalues()).exp()
}

fn ln_phi(h: &[f64]) -> f64 {
    if h.iter().any(|&x| x >= 1.0) {
        return f64::INFINITY;
    }
    // Summing in sorted order makes the value independent of the eigenvalue order.
    let mut sorted = h.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().map(|&x| 0.5 * x.ln() - (-x).ln_1p()).sum()
}

/// `n^{n/2} / (n-1)^n`, the maximum of [`phi_of_spectrum`] on the simplex.
pub fn algebraic_bound(n: usize) -> f64 {
    let nf = n as f64;
    (0.5 * nf * nf.ln() - nf * (nf - 1.0).ln()).exp()
}

/// Result of a numerical maximization of `phi` over the simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicMax {
    pub max_found: f64,
    pub argmax: Vec<f64>,
    pub bound: f64,
    /// Largest `phi` among the random samples alone.
    pub best_sample: f64,
}

impl AlgebraicMax {
    /// Euclidean distance from the argmax to the uniform point.
    pub fn distance_to_uniform(&self) -> f64 {
        let u = 1.0 / self.argmax.len() as f64;
        self.argmax.iter().map(|x| (x - u).powi(2)).sum::<f64>().sqrt()
    }
}

/// Random search over the simplex followed by pairwise mass-transfer hill climbing.
pub fn algebraic_max(n: usize, samples: usize, seed: u64) -> Result<AlgebraicMax> {
    if n < 3 {
        return Err(invalid(format!("dimension must be at least 3, got {n}")));
    }
    if samples == 0 {
        return Err(invalid("at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = SpectrumPoint::random(n, &mut rng).eigenvalues;
    let mut best_ln = ln_phi(&best);
    for _ in 1..samples {
        let p = SpectrumPoint::random(n, &mut rng).eigenvalues;
        let v = ln_phi(&p);
        if v > best_ln {
            best = p;
            best_ln = v;
        }
    }
    let best_sample = best_ln.exp();
    let mut step = 0.1;
    while step > 1e-14 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || best[j] < step {
                    continue;
                }
                let mut cand = best.clone();
                cand[i] += step;
                cand[j] -= step;
                if cand[i] >= 1.0 {
                    continue;
                }
                let v = ln_phi(&cand);
                if v > best_ln {
                    best = cand;
                    best_ln = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(AlgebraicMax { max_found: best_ln.exp(), argmax: best, bound: algebraic_bound(n), best_sample })
}

/// Piecewise-constant curvature on `[0, ell]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSchedule {
    /// Interior breakpoints, strictly increasing inside `(0, ell)`.
    pub breakpoints: Vec<f64>,
    /// One value per piece: `breakpoints.len() + 1` entries.
    pub kappas: Vec<f64>,
    pub ell: f64,
}

impl CurvatureSchedule {
    pub fn new(breakpoints: Vec<f64>, kappas: Vec<f64>, ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(invalid(format!("length must be positive, got {ell}")));
        }
        if kappas.len() != breakpoints.len() + 1 {
            return Err(invalid("need exactly one curvature value per piece"));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b > prev && b < ell) {
                return Err(invalid(format!("breakpoint {b} is out of order or outside (0, {ell})")));
            }
            prev = b;
        }
        if kappas.iter().any(|k| !k.is_finite()) {
            return Err(invalid("curvature values must be finite"));
        }
        Ok(CurvatureSchedule { breakpoints, kappas, ell })
    }

    pub fn constant(kappa: f64, ell: f64) -> Result<Self> {
        Self::new(vec![], vec![kappa], ell)
    }

    /// `prefix` pieces `(end, kappa)` up to `ell - r`, then curvature -1 on `[ell - r, ell]`.
    pub fn with_hyperbolic_end(prefix: &[(f64, f64)], r: f64, ell: f64) -> Result<Self> {
        if !(r > 0.0 && r <= ell) {
            return Err(invalid(format!("hyperbolic radius {r} must lie in (0, {ell}]")));
        }
        let mut breaks = Vec::new();
        let mut kappas = Vec::new();
        for &(end, k) in prefix {
            if end < ell - r {
                breaks.push(end);
                kappas.push(k);
            }
        }
        if r < ell {
            kappas.push(prefix.last().map_or(0.0, |p| p.1));
            breaks.push(ell - r);
        }
        kappas.push(-1.0);
        Self::new(breaks, kappas, ell)
    }

    pub fn kappa(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= t);
        self.kappas[i]
    }

    /// Pieces `(start, end, kappa)`.
    pub fn pieces(&self) -> Vec<(f64, f64, f64)> {
        let mut edges = vec![0.0];
        edges.extend(&self.breakpoints);
        edges.push(self.ell);
        edges.windows(2).zip(&self.kappas).map(|(w, &k)| (w[0], w[1], k)).collect()
    }

    /// Length `R` of the final stretch with curvature -1, provided every earlier
    /// piece has curvature `<= 0`; `None` when the contract fails.
    pub fn hyperbolic_tail(&self) -> Option<f64> {
        let pieces = self.pieces();
        let mut start = self.ell;
        let mut i = pieces.len();
        while i > 0 && pieces[i - 1].2 == -1.0 {
            start = pieces[i - 1].0;
            i -= 1;
        }
        if start == self.ell || pieces[..i].iter().any(|p| p.2 > 0.0) {
            return None;
        }
        Some(self.ell - start)
    }
}

/// Random schedule obeying the contract: a prefix of up to four pieces with curvature
/// in `[-3, 0]` over a length in `[0, 6)`, then curvature -1 on a final stretch of
/// length `R` in `[0.5, 5)`. Returns the schedule, `R` and a random `J'(0)` in `[0.01, 10)`.
pub fn random_contract_schedule<R: Rng>(rng: &mut R) -> Result<(CurvatureSchedule, f64, f64)> {
    let r = rng.gen_range(0.5..5.0);
    let prefix_len = rng.gen_range(0.0..6.0);
    let pieces = rng.gen_range(1..5);
    let prefix: Vec<(f64, f64)> = (1..=pieces)
        .map(|i| (prefix_len * i as f64 / pieces as f64, -rng.gen_range(0.0..3.0)))
        .collect();
    let schedule = CurvatureSchedule::with_hyperbolic_end(&prefix, r, prefix_len + r)?;
    Ok((schedule, r, rng.gen_range(0.01..10.0)))
}

/// `1 - 2 e^{-2R}`.
pub fn ii_lower_bound(r: f64) -> f64 {
    1.0 - 2.0 * (-2.0 * r).exp()
}

/// One sample of a Jacobi field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiSample {
    pub t: f64,
    pub j: f64,
    pub jp: f64,
    /// `J'/J`, absent where `J = 0`.
    pub ii: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobiProfile {
    pub ii_at_ell: f64,
    pub samples: Vec<JacobiSample>,
    pub stats: StepStats,
}

const JACOBI_TOL: f64 = 1e-12;

/// Integrate `J'' = -kappa(t) J` on `[0, ell]` and report `J' J / J^2` at `ell`.
pub fn jacobi_ii(schedule: &CurvatureSchedule, j0: f64, j0p: f64) -> Result<JacobiProfile> {
    if j0 == 0.0 && j0p == 0.0 {
        return Err(invalid("initial data give the zero field"));
    }
    let sample = |t: f64, y: &[f64; 2]| JacobiSample {
        t,
        j: y[0],
        jp: y[1],
        ii: if y[0] != 0.0 { Some(y[1] / y[0]) } else { None },
    };
    let mut samples = vec![sample(0.0, &[j0, j0p])];
    let mut y = [j0, j0p];
    let mut stats = StepStats::default();
    for (a, b, k) in schedule.pieces() {
        let (yb, s) = integrate(|_, y: &[f64; 2]| [y[1], -k * y[0]], a, b, y, JACOBI_TOL, |t, y| {
            samples.push(sample(t, y))
        })?;
        y = yb;
        stats.accepted += s.accepted;
        stats.rejected += s.rejected;
    }
    // Integration error is relative to the largest |J| seen, so J(ell) below that level is zero.
    let scale = samples.iter().map(|s| s.j.abs()).fold(0.0, f64::max);
    if y[0].abs() <= 1e-9 * scale {
        return Err(LabError::Degenerate(format!("J vanishes at t = {}", schedule.ell)));
    }
    Ok(JacobiProfile { ii_at_ell: y[1] / y[0], samples, stats })
}

/// `R_eps = ln sqrt(2 / eps)`, so that `2 e^{-2 R_eps} = eps`.
pub fn radius_for_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(invalid(format!("eps must lie in (0, 2), got {eps}")));
    }
    Ok(0.5 * (2.0 / eps).ln())
}

/// `(c / (n-1))^n / (1 - eps)^n`.
pub fn jacobian_bound(c: f64, n: usize, eps: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(invalid(format!("c must be positive, got {c}")));
    }
    if n < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {n}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid(format!("eps must lie in [0, 1), got {eps}")));
    }
    let nf = n as f64;
    Ok((nf * ((c / (nf - 1.0)).ln() - (1.0 - eps).ln())).exp())
}

/// `c^n / n^{n/2} * phi(h) / (1 - eps)^n`, the Jacobian estimate before the eigenvalue bound.
pub fn jacobian_chain_value(spectrum: &SpectrumPoint, c: f64, eps: f64) -> Result<f64> {
    let n = spectrum.dimension();
    let nf = n as f64;
    let lp = ln_phi(spectrum.eigenvalues());
    if lp.is_infinite() {
        return Err(LabError::Degenerate("eigenvalue 1 is a pole of phi".into()));
    }
    Ok((nf * c.ln() - 0.5 * nf * nf.ln() + lp - nf * (1.0 - eps).ln()).exp())
}

/// Whether `c^n / n^{n/2} * phi(h) / (1 - eps)^n <= jacobian_bound(c, n, eps) + 1e-9`.
pub fn jacobian_chain_check(spectrum: &SpectrumPoint, c: f64, eps: f64) -> Result<bool> {
    let bound = jacobian_bound(c, spectrum.dimension(), eps)?;
    Ok(jacobian_chain_value(spectrum, c, eps)? <= bound + 1e-9)
}

/// One Monte Carlo draw of the Jacobian chain check.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub n: usize,
    pub c: f64,
    pub eps: f64,
    pub phi: f64,
    pub bound: f64,
    pub ok: bool,
}

pub const SWEEP_CSV_HEADER: &str = "seed,n,c,eps,phi,bound,ok";

impl SweepRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{}",
            self.seed, self.n, self.c, self.eps, self.phi, self.bound, self.ok
        )
    }
}

/// Per-draw seed derived from the master seed (SplitMix64 finalizer).
pub fn draw_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random spectra for every `(n, c, eps)` combination, `draws` each, in parallel.
/// The row order depends only on the inputs.
pub fn jacobian_sweep(master: u64, ns: &[usize], cs: &[f64], epss: &[f64], draws: usize) -> Result<Vec<SweepRow>> {
    let mut combos = Vec::new();
    for &n in ns {
        for &c in cs {
            for &eps in epss {
                jacobian_bound(c, n, eps)?;
                combos.push((n, c, eps));
            }
        }
    }
    let total = combos.len() * draws;
    (0..total)
        .into_par_iter()
        .map(|i| {
            let (n, c, eps) = combos[i / draws];
            let seed = draw_seed(master, i as u64);
            let p = SpectrumPoint::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
            let value = jacobian_chain_value(&p, c, eps)?;
            let bound = jacobian_bound(c, n, eps)?;
            Ok(SweepRow { seed, n, c, eps, phi: phi_of_spectrum(&p), bound, ok: value <= bound + 1e-9 })
        })
        .collect()
}
