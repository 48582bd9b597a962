//! Closed-form reduction for interior stationary points of single-segment
//! games.
//!
//! Equal partial derivatives within a firm force its strategy onto a line
//! `σ_is = a_is + b_is τ_i`, where `τ_i` is the mass on a reference product
//! `t*`. With `C = Σ_p 1/(β_p e_p)` and `T = Σ_p 1/β_p` the line is built
//! from
//!
//! * `E_it = Σ_p (e_p − e_t)/(β_p e_p) = T − e_t C`
//! * `B_it = β_t e_t Σ_p 1/(β_p e_p) = β_t e_t C`
//! * `a_is = (E_t* − E_is)/(E_t* B_is)`, `b_is = E_is B_t* /(E_t* B_is)`.
//!
//! Substituting every firm's line into the payoff gives the reduced objective
//! `v_i(τ) = Q Σ_p β_p e_p (a_ip + b_ip τ_i)² / (a + Σ_r b_r τ_r)`, and
//! simultaneous stationarity of the `v_i` in their own `τ_i` is the system
//! solved here. Firms whose products all share one attractiveness have no
//! line: their only stationary strategy is the fixed point `β_s σ_s = const`,
//! and they enter the reduction as constants.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Game, StrategyProfile};
use crate::payoff::{self, ResponseObjective};

/// Interiority margin: a coordinate counts as interior inside `(ε, 1 − ε)`.
pub const INTERIOR_MARGIN: f64 = 1e-7;
/// Candidates closer than this (∞-norm on `τ`) are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Smallest usable `|E_it|` for a reference product.
pub const MIN_REFERENCE_GAP: f64 = 1e-12;
/// Relative spread of attractiveness below which a firm is degenerate.
const EQUAL_ATTRACTION_TOL: f64 = 1e-12;

/// The affine family of one firm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirmFamily {
    /// Catalog position of the reference product; `None` for a firm pinned to
    /// its equal-attractiveness point.
    pub reference: Option<usize>,
    /// `E_it` by catalog position.
    pub gap: Vec<f64>,
    /// `B_it` by catalog position.
    pub scale: Vec<f64>,
    /// `a_is`.
    pub intercept: Vec<f64>,
    /// `b_is`.
    pub slope: Vec<f64>,
}

impl FirmFamily {
    pub fn is_pinned(&self) -> bool {
        self.reference.is_none()
    }

    /// `σ_is = a_is + b_is τ`.
    pub fn reconstruct(&self, tau: f64) -> Vec<f64> {
        self.intercept
            .iter()
            .zip(&self.slope)
            .map(|(a, b)| a + b * tau)
            .collect()
    }

    /// `k_i = (1 − τ B_t*)/E_t*`; `None` for pinned firms.
    pub fn k_value(&self, tau: f64) -> Option<f64> {
        self.reference
            .map(|t| (1.0 - tau * self.scale[t]) / self.gap[t])
    }

    /// Open interval of `τ` whose reconstruction keeps every coordinate in
    /// `(margin, 1 − margin)`. `None` if that set is empty.
    pub fn tau_interval(&self, margin: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (&a, &b) in self.intercept.iter().zip(&self.slope) {
            let (low_bound, high_bound) = (margin, 1.0 - margin);
            if b.abs() < 1e-15 {
                if !(a > low_bound && a < high_bound) {
                    return None;
                }
                continue;
            }
            let (x, y) = ((low_bound - a) / b, (high_bound - a) / b);
            let (l, h) = if b > 0.0 { (x, y) } else { (y, x) };
            lo = lo.max(l);
            hi = hi.min(h);
        }
        (lo < hi).then_some((lo, hi))
    }
}

/// Reduction constants for a single-segment game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorConstants {
    pub firms: Vec<FirmFamily>,
    /// `a = Σ_r Σ_p a_rp e_rp`.
    pub market_intercept: f64,
    /// `b_r = Σ_p b_rp e_rp`.
    pub market_slopes: Vec<f64>,
}

/// Constants with the default reference (largest `|E_it|`) for every firm.
pub fn compute_interior_constants(game: &Game) -> Result<InteriorConstants> {
    build_constants(game, None, false)
}

/// Constants with caller-chosen reference products (catalog positions).
pub fn compute_interior_constants_with_references(
    game: &Game,
    references: &[usize],
) -> Result<InteriorConstants> {
    if references.len() != game.n_firms() {
        return Err(Error::TauArity {
            got: references.len(),
            expected: game.n_firms(),
        });
    }
    build_constants(game, Some(references), false)
}

fn build_constants(
    game: &Game,
    references: Option<&[usize]>,
    pin_degenerate: bool,
) -> Result<InteriorConstants> {
    if game.n_segments() != 1 {
        return Err(Error::MultiSegmentUnsupported(game.n_segments()));
    }
    let mut firms = Vec::with_capacity(game.n_firms());
    for i in 0..game.n_firms() {
        let family = if is_degenerate(game.attractions(i, 0)) {
            if !pin_degenerate {
                return Err(Error::DegenerateAttractiveness(game.firm_id(i).to_string()));
            }
            pinned_family(game, i)
        } else {
            free_family(game, i, references.map(|r| r[i]))?
        };
        firms.push(family);
    }
    let mut market_intercept = 0.0;
    let mut market_slopes = Vec::with_capacity(firms.len());
    for (i, fam) in firms.iter().enumerate() {
        let e = game.attractions(i, 0);
        market_intercept += payoff::dot(&fam.intercept, e);
        market_slopes.push(payoff::dot(&fam.slope, e));
    }
    Ok(InteriorConstants {
        firms,
        market_intercept,
        market_slopes,
    })
}

fn is_degenerate(e: &[f64]) -> bool {
    let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    hi - lo <= EQUAL_ATTRACTION_TOL * hi
}

fn gaps_and_scales(game: &Game, firm: usize) -> (Vec<f64>, Vec<f64>) {
    let beta = game.prices(firm, 0);
    let e = game.attractions(firm, 0);
    let c: f64 = beta.iter().zip(e).map(|(b, e)| 1.0 / (b * e)).sum();
    // Σ_p (e_p − e_t)/(β_p e_p), summed directly rather than as T − e_t C
    let gap = e
        .iter()
        .map(|&et| beta.iter().zip(e).map(|(b, ep)| (ep - et) / (b * ep)).sum())
        .collect();
    let scale = beta.iter().zip(e).map(|(b, e)| b * e * c).collect();
    (gap, scale)
}

fn free_family(game: &Game, firm: usize, reference: Option<usize>) -> Result<FirmFamily> {
    let (gap, scale): (Vec<f64>, Vec<f64>) = gaps_and_scales(game, firm);
    let t = match reference {
        Some(t) => {
            if t >= gap.len() || gap[t].abs() < MIN_REFERENCE_GAP {
                return Err(Error::NoValidReference(game.firm_id(firm).to_string()));
            }
            t
        }
        None => {
            let (t, g) = gap.iter().enumerate().fold((0, 0.0f64), |best, (k, &g)| {
                if g.abs() > best.1.abs() {
                    (k, g)
                } else {
                    best
                }
            });
            if g.abs() < MIN_REFERENCE_GAP {
                return Err(Error::NoValidReference(game.firm_id(firm).to_string()));
            }
            t
        }
    };
    let (et, bt) = (gap[t], scale[t]);
    let mut intercept: Vec<f64> = gap
        .iter()
        .zip(&scale)
        .map(|(es, bs)| (et - es) / (et * bs))
        .collect();
    let mut slope: Vec<f64> = gap
        .iter()
        .zip(&scale)
        .map(|(es, bs)| es * bt / (et * bs))
        .collect();
    intercept[t] = 0.0;
    slope[t] = 1.0;
    Ok(FirmFamily {
        reference: Some(t),
        gap,
        scale,
        intercept,
        slope,
    })
}

fn pinned_family(game: &Game, firm: usize) -> FirmFamily {
    let (gap, scale) = gaps_and_scales(game, firm);
    let sigma = equal_attractiveness_point(game.prices(firm, 0));
    FirmFamily {
        reference: None,
        gap,
        scale,
        slope: vec![0.0; sigma.len()],
        intercept: sigma,
    }
}

fn equal_attractiveness_point(beta: &[f64]) -> Vec<f64> {
    let total: f64 = beta.iter().map(|b| 1.0 / b).sum();
    beta.iter().map(|b| (1.0 / b) / total).collect()
}

/// Quadratic coefficients of `N_i(τ) = Q Σ_p β_p e_p (a_p + b_p τ)²`.
#[derive(Debug, Clone, Copy)]
struct Surplus {
    c0: f64,
    c1: f64,
    c2: f64,
}

impl Surplus {
    fn value(&self, tau: f64) -> f64 {
        self.c0 + tau * (self.c1 + tau * self.c2)
    }

    fn derivative(&self, tau: f64) -> f64 {
        self.c1 + 2.0 * self.c2 * tau
    }
}

/// Precomputed data for evaluating the reduced system quickly.
struct Reduced<'a> {
    constants: &'a InteriorConstants,
    surplus: Vec<Surplus>,
}

impl<'a> Reduced<'a> {
    fn new(constants: &'a InteriorConstants, game: &Game) -> Self {
        let q = game.demand(0);
        let surplus = constants
            .firms
            .iter()
            .enumerate()
            .map(|(i, fam)| {
                let (mut c0, mut c1, mut c2) = (0.0, 0.0, 0.0);
                for (((b, e), a), s) in game
                    .prices(i, 0)
                    .iter()
                    .zip(game.attractions(i, 0))
                    .zip(&fam.intercept)
                    .zip(&fam.slope)
                {
                    let w = q * b * e;
                    c0 += w * a * a;
                    c1 += 2.0 * w * a * s;
                    c2 += w * s * s;
                }
                Surplus { c0, c1, c2 }
            })
            .collect();
        Self { constants, surplus }
    }

    fn denominator(&self, tau: &[f64]) -> f64 {
        self.constants.market_intercept
            + self
                .constants
                .market_slopes
                .iter()
                .zip(tau)
                .map(|(b, t)| b * t)
                .sum::<f64>()
    }

    fn value(&self, tau: &[f64], firm: usize) -> f64 {
        self.surplus[firm].value(tau[firm]) / self.denominator(tau)
    }

    fn residual(&self, tau: &[f64]) -> Vec<f64> {
        let den = self.denominator(tau);
        self.surplus
            .iter()
            .zip(&self.constants.market_slopes)
            .zip(tau)
            .map(|((s, b), &t)| s.derivative(t) * den - b * s.value(t))
            .collect()
    }

    /// `∂F_i/∂τ_r`.
    fn jacobian(&self, tau: &[f64], free: &[usize]) -> DMatrix<f64> {
        let den = self.denominator(tau);
        let b = &self.constants.market_slopes;
        DMatrix::from_fn(free.len(), free.len(), |row, col| {
            let (i, r) = (free[row], free[col]);
            let s = &self.surplus[i];
            if i == r {
                2.0 * s.c2 * den
            } else {
                b[r] * s.derivative(tau[i])
            }
        })
    }

    /// `∂²v_i/∂τ_i²`.
    fn curvature(&self, tau: &[f64], firm: usize) -> f64 {
        let den = self.denominator(tau);
        let s = &self.surplus[firm];
        let b = self.constants.market_slopes[firm];
        let t = tau[firm];
        let f = s.derivative(t) * den - b * s.value(t);
        let df = 2.0 * s.c2 * den;
        (df * den - 2.0 * b * f) / (den * den * den)
    }
}

fn check_tau(constants: &InteriorConstants, tau: &[f64], game: &Game) -> Result<()> {
    if tau.len() != constants.firms.len() {
        return Err(Error::TauArity {
            got: tau.len(),
            expected: constants.firms.len(),
        });
    }
    for (i, (fam, &t)) in constants.firms.iter().zip(tau).enumerate() {
        if fam.is_pinned() {
            continue;
        }
        let inside = fam.reconstruct(t).iter().all(|&s| s > 0.0 && s < 1.0);
        if !inside {
            return Err(Error::OutsideFamilyDomain(game.firm_id(i).to_string()));
        }
    }
    Ok(())
}

impl InteriorConstants {
    /// Per-firm masses on the affine families at `τ`.
    pub fn reconstruct(&self, tau: &[f64]) -> Vec<Vec<f64>> {
        self.firms
            .iter()
            .zip(tau)
            .map(|(fam, &t)| fam.reconstruct(t))
            .collect()
    }

    /// Reconstructs and validates a strategy profile.
    pub fn profile(&self, game: &Game, tau: &[f64]) -> Result<StrategyProfile> {
        check_tau(self, tau, game)?;
        StrategyProfile::from_catalog_masses(game, self.reconstruct(tau))
    }

    /// Value of `τ_i` that a pinned firm reports: its mass on catalog position 0.
    fn pinned_tau(&self, firm: usize) -> f64 {
        self.firms[firm].intercept[0]
    }
}

fn checked_denominator(reduced: &Reduced<'_>, tau: &[f64]) -> Result<f64> {
    let den = reduced.denominator(tau);
    if den > 1e-12 {
        Ok(den)
    } else {
        Err(Error::DenominatorNonpositive(den))
    }
}

/// `v_i(τ)`, firm `i`'s payoff with every firm on its affine family.
pub fn restricted_payoff_v(
    constants: &InteriorConstants,
    game: &Game,
    tau: &[f64],
    firm: usize,
) -> Result<f64> {
    game.check_firm(firm)?;
    check_tau(constants, tau, game)?;
    let reduced = Reduced::new(constants, game);
    checked_denominator(&reduced, tau)?;
    Ok(reduced.value(tau, firm))
}

/// `F_i(τ) = N_i'(τ_i)·(a + Σ_r b_r τ_r) − b_i N_i(τ_i)`, the numerator of
/// `∂v_i/∂τ_i`. Identically zero for pinned firms.
pub fn stationarity_residual(
    constants: &InteriorConstants,
    game: &Game,
    tau: &[f64],
) -> Result<Vec<f64>> {
    check_tau(constants, tau, game)?;
    let reduced = Reduced::new(constants, game);
    checked_denominator(&reduced, tau)?;
    Ok(reduced.residual(tau))
}

/// Local shape of a firm's payoff at a stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondOrder {
    Maximum,
    Minimum,
    Saddle,
    Flat,
}

/// A simultaneous stationary point of the reduced objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryCandidate {
    /// Reference masses; for pinned firms the mass on catalog position 0.
    pub tau: Vec<f64>,
    /// Catalog position of each firm's reference product; `None` for pinned firms.
    pub reference: Vec<Option<usize>>,
    pub profile: StrategyProfile,
    /// `|F_i|` per firm.
    pub residual: Vec<f64>,
    /// `∂²v_i/∂τ_i²` per firm; `None` for pinned firms.
    pub curvature: Vec<Option<f64>>,
    /// Sign of the curvature for free firms; definiteness of the payoff
    /// Hessian on the simplex tangent space for pinned firms.
    pub second_order: Vec<SecondOrder>,
    pub interior: bool,
}

impl StationaryCandidate {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub seed: u64,
    pub starts: usize,
    /// Residual tolerance relative to `Q · max β · max e`.
    pub tol: f64,
    pub max_iter: usize,
    pub execution: Execution,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 32,
            tol: 1e-10,
            max_iter: 200,
            execution: Execution::default(),
        }
    }
}

/// Finds stationary points of the reduced system from `starts` seeded initial
/// points, each refined by closed-form Gauss–Seidel sweeps and a Newton polish
/// (plus an independent Newton run from the raw start). Candidates are
/// deduplicated and returned in lexicographic order of `τ`. Nothing here
/// claims a candidate is an equilibrium.
pub fn solve_interior(game: &Game, options: &SolveOptions) -> Result<Vec<StationaryCandidate>> {
    if game.n_segments() != 1 {
        return Err(Error::MultiSegmentUnsupported(game.n_segments()));
    }
    for i in 0..game.n_firms() {
        let size = game.catalog_len(i);
        if size < 2 {
            return Err(Error::InteriorNeedsTwoProducts {
                firm: game.firm_id(i).to_string(),
                size,
            });
        }
    }
    let constants = build_constants(game, None, true)?;
    let reduced = Reduced::new(&constants, game);
    let free: Vec<usize> = (0..game.n_firms())
        .filter(|&i| !constants.firms[i].is_pinned())
        .collect();

    let mut intervals = vec![(0.0, 0.0); game.n_firms()];
    for (fam, interval) in constants.firms.iter().zip(&mut intervals) {
        let found = fam
            .tau_interval(INTERIOR_MARGIN)
            .ok_or(Error::NoInteriorCandidate)?;
        if !fam.is_pinned() {
            *interval = found;
        }
    }

    let threshold = options.tol * game.demand(0) * game.max_price() * game.max_attraction();
    let base: Vec<f64> = (0..game.n_firms())
        .map(|i| {
            if constants.firms[i].is_pinned() {
                constants.pinned_tau(i)
            } else {
                0.0
            }
        })
        .collect();

    let search = Search {
        reduced: &reduced,
        free: &free,
        intervals: &intervals,
        threshold,
        max_iter: options.max_iter.max(1),
    };
    let starts = options.starts.max(1);
    let found: Vec<Vec<Vec<f64>>> = options.execution.map_range(starts, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        rng.set_stream(k as u64);
        let mut start = base.clone();
        for &i in &free {
            let (lo, hi) = intervals[i];
            start[i] = lo + (hi - lo) * rng.random::<f64>();
        }
        let mut roots = Vec::new();
        if let Some(t) = search
            .gauss_seidel(start.clone())
            .and_then(|t| search.newton(t))
        {
            roots.push(t);
        }
        if let Some(t) = search.newton(start) {
            roots.push(t);
        }
        roots
    });

    let mut unique: Vec<(Vec<f64>, f64)> = Vec::new();
    for tau in found.into_iter().flatten() {
        let norm = inf_norm(&reduced.residual(&tau));
        match unique
            .iter_mut()
            .find(|(u, _)| inf_distance(u, &tau) <= DEDUP_RADIUS)
        {
            Some(existing) if norm < existing.1 => *existing = (tau, norm),
            Some(_) => {}
            None => unique.push((tau, norm)),
        }
    }
    if unique.is_empty() {
        return Err(Error::NoInteriorCandidate);
    }
    unique.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(unique
        .into_iter()
        .map(|(tau, _)| annotate(game, &constants, &reduced, tau))
        .collect())
}

struct Search<'a> {
    reduced: &'a Reduced<'a>,
    free: &'a [usize],
    intervals: &'a [(f64, f64)],
    threshold: f64,
    max_iter: usize,
}

impl Search<'_> {
    fn inside(&self, tau: &[f64]) -> bool {
        self.free.iter().all(|&i| {
            let (lo, hi) = self.intervals[i];
            tau[i] > lo && tau[i] < hi
        })
    }

    /// Sweeps firms in order, each jumping to the best interior root of its
    /// own quadratic `F_i(·, τ_{-i}) = 0`.
    fn gauss_seidel(&self, mut tau: Vec<f64>) -> Option<Vec<f64>> {
        let b = &self.reduced.constants.market_slopes;
        for _ in 0..self.max_iter {
            let mut moved = 0.0f64;
            for &i in self.free {
                let s = self.reduced.surplus[i];
                let rest = self.reduced.denominator(&tau) - b[i] * tau[i];
                let roots =
                    quadratic_roots(s.c2 * b[i], 2.0 * s.c2 * rest, s.c1 * rest - b[i] * s.c0);
                let (lo, hi) = self.intervals[i];
                let best = roots
                    .into_iter()
                    .filter(|&t| t > lo && t < hi)
                    .map(|t| (t, s.value(t) / (rest + b[i] * t)))
                    .max_by(|x, y| x.1.total_cmp(&y.1))?;
                moved = moved.max((best.0 - tau[i]).abs());
                tau[i] = best.0;
            }
            if moved <= 1e-15 {
                break;
            }
        }
        Some(tau)
    }

    /// Damped Newton on the free coordinates; `Some` only if it ends inside
    /// the domain with residual below threshold.
    fn newton(&self, mut tau: Vec<f64>) -> Option<Vec<f64>> {
        let norm_of = |t: &[f64]| inf_norm(&self.reduced.residual(t));
        let mut norm = norm_of(&tau);
        for _ in 0..100 {
            if norm <= 1e-6 * self.threshold {
                break;
            }
            let f = self.reduced.residual(&tau);
            let rhs = DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| -f[i]));
            let Some(step) = self.reduced.jacobian(&tau, self.free).lu().solve(&rhs) else {
                break;
            };
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let mut trial = tau.clone();
                for (k, &i) in self.free.iter().enumerate() {
                    trial[i] += scale * step[k];
                }
                if self.inside(&trial) {
                    let n = norm_of(&trial);
                    if n < norm {
                        tau = trial;
                        norm = n;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (self.inside(&tau) && norm <= self.threshold).then_some(tau)
    }
}

/// Real roots of `a x² + b x + c`, degrading gracefully to the linear case.
pub(crate) fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let size = a.abs().max(b.abs()).max(c.abs());
    if size == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * size {
        return if b.abs() > 1e-14 * size {
            vec![-c / b]
        } else {
            Vec::new()
        };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-14 * b * b {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.max(0.0).sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

fn annotate(
    game: &Game,
    constants: &InteriorConstants,
    reduced: &Reduced<'_>,
    tau: Vec<f64>,
) -> StationaryCandidate {
    let masses = constants.reconstruct(&tau);
    let interior = masses
        .iter()
        .flatten()
        .all(|&s| s > INTERIOR_MARGIN && s < 1.0 - INTERIOR_MARGIN);
    let residual = reduced.residual(&tau).iter().map(|f| f.abs()).collect();
    let mut curvature = Vec::with_capacity(tau.len());
    let mut second_order = Vec::with_capacity(tau.len());
    for (i, fam) in constants.firms.iter().enumerate() {
        if fam.is_pinned() {
            curvature.push(None);
            second_order.push(tangent_shape(game, &masses, i));
        } else {
            let c = reduced.curvature(&tau, i);
            let size = reduced.surplus[i].c2 / reduced.denominator(&tau);
            curvature.push(Some(c));
            second_order.push(classify(&[c], size));
        }
    }
    StationaryCandidate {
        profile: StrategyProfile::from_masses_unchecked(masses),
        tau,
        reference: constants.firms.iter().map(|f| f.reference).collect(),
        residual,
        curvature,
        second_order,
        interior,
    }
}

/// Definiteness of firm `i`'s payoff Hessian restricted to `Σ dσ = 0`.
pub fn tangent_shape(game: &Game, masses: &[Vec<f64>], firm: usize) -> SecondOrder {
    let sigma = &masses[firm];
    let k = sigma.len();
    if k < 2 {
        return SecondOrder::Flat;
    }
    let h = ResponseObjective::new(game, masses, firm).hessian(sigma);
    // tangent basis d_s = e_s − e_{k−1}
    let reduced = DMatrix::from_fn(k - 1, k - 1, |s, t| {
        h[s][t] - h[s][k - 1] - h[k - 1][t] + h[k - 1][k - 1]
    });
    let size = reduced.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let eig = SymmetricEigen::new(reduced).eigenvalues;
    classify(eig.as_slice(), size)
}

fn classify(eigenvalues: &[f64], size: f64) -> SecondOrder {
    let tol = 1e-10 * size.max(f64::MIN_POSITIVE);
    let pos = eigenvalues.iter().any(|&v| v > tol);
    let neg = eigenvalues.iter().any(|&v| v < -tol);
    match (pos, neg) {
        (true, true) => SecondOrder::Saddle,
        (false, true) => SecondOrder::Maximum,
        (true, false) => SecondOrder::Minimum,
        (false, false) => SecondOrder::Flat,
    }
}

/// The stationary strategy of a firm whose products share one attractiveness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualAttractivenessPoint {
    pub firm: usize,
    /// `σ_s = (1/β_s) / Σ_p 1/β_p`, by catalog position.
    pub sigma: Vec<f64>,
    /// Always true: only first-order conditions hold here.
    pub stationary_only: bool,
}

pub fn solve_equal_attractiveness(game: &Game, firm: usize) -> Result<EqualAttractivenessPoint> {
    game.check_firm(firm)?;
    if game.n_segments() != 1 {
        return Err(Error::MultiSegmentUnsupported(game.n_segments()));
    }
    if !is_degenerate(game.attractions(firm, 0)) {
        return Err(Error::NotDegenerate(game.firm_id(firm).to_string()));
    }
    Ok(EqualAttractivenessPoint {
        firm,
        sigma: equal_attractiveness_point(game.prices(firm, 0)),
        stationary_only: true,
    })
}

/// `max_{s,t} |∂u_i/∂σ_is − ∂u_i/∂σ_it| / |∂u_i/∂σ_i,ref|`.
pub fn equal_partials_spread(
    game: &Game,
    masses: &[Vec<f64>],
    firm: usize,
    reference: usize,
) -> f64 {
    let g = payoff::gradient_at(game, masses, firm);
    let (lo, hi) = g
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    (hi - lo) / g[reference].abs()
}

/// `k_i = Σ_p β_p e_p σ_p² / (2 D)` evaluated from the profile itself.
pub fn k_from_profile(game: &Game, masses: &[Vec<f64>], firm: usize) -> f64 {
    let den = payoff::segment_denominators(game, masses)[0];
    let surplus: f64 = game
        .prices(firm, 0)
        .iter()
        .zip(game.attractions(firm, 0))
        .zip(&masses[firm])
        .map(|((b, e), s)| b * e * s * s)
        .sum();
    surplus / (2.0 * den)
}

/// `(1 − σ_t B_t)/E_t` for every product whose gap is usable (`|E_t|` at
/// least `1e-6` of the largest gap); others are `None`.
pub fn k_from_gaps(family: &FirmFamily, sigma: &[f64]) -> Vec<Option<f64>> {
    let largest = family.gap.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    family
        .gap
        .iter()
        .zip(&family.scale)
        .zip(sigma)
        .map(|((&e, &b), &s)| (e.abs() >= 1e-6 * largest && e != 0.0).then(|| (1.0 - s * b) / e))
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn inf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
