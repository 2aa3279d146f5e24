//! Engines for left sequences `F_n = f_n ∘ … ∘ f_1` and right sequences
//! `G_n = g_1 ∘ … ∘ g_n`, normalized variants, deviation series and
//! convergence detection on sample grids.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::holomap::{invert, HoloMap, Mat2, Model};
use crate::hypgeom::{hyp_dist_disc_raw, hyp_dist_halfplane_raw, sample_hyp_disc, HyperbolicDisc};
use crate::{grammar, Error, Result};

/// Hard cap on the step count of right sequences with non-Möbius schedules;
/// those re-evaluate a growing chain, which is quadratic overall.
pub const GENERAL_RIGHT_MAX_N: usize = 100_000;

/// Which way a composition sequence grows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `F_n = f_n ∘ f_{n-1} ∘ … ∘ f_1`: the newest map is outermost.
    Left,
    /// `G_n = g_1 ∘ g_2 ∘ … ∘ g_n`: the newest map is innermost.
    Right,
}

/// A rule `n ↦ map` for `n = 1, 2, …`, with a printable description.
#[derive(Clone)]
pub struct Schedule {
    desc: String,
    gen: Arc<dyn Fn(usize) -> HoloMap + Send + Sync>,
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Schedule({})", self.desc)
    }
}

impl Schedule {
    pub fn from_fn<F>(desc: impl Into<String>, gen: F) -> Schedule
    where
        F: Fn(usize) -> HoloMap + Send + Sync + 'static,
    {
        Schedule {
            desc: desc.into(),
            gen: Arc::new(gen),
        }
    }

    pub fn constant(m: HoloMap) -> Schedule {
        let desc = format!("const({})", grammar::print_map(&m));
        Schedule::from_fn(desc, move |_| m.clone())
    }

    /// Finite list of maps; the last one repeats as the tail.
    pub fn from_list(maps: Vec<HoloMap>) -> Result<Schedule> {
        if maps.is_empty() {
            return Err(Error::InvalidConfig("schedule list must be non-empty".into()));
        }
        let desc = format!(
            "list({})",
            maps.iter().map(grammar::print_map).collect::<Vec<_>>().join(";")
        );
        Ok(Schedule::from_fn(desc, move |n| {
            maps[(n - 1).min(maps.len() - 1)].clone()
        }))
    }

    /// Finite list with an explicit tail map.
    pub fn list_with_tail(maps: Vec<HoloMap>, tail: HoloMap) -> Schedule {
        let desc = format!(
            "list({};tail={})",
            maps.iter().map(grammar::print_map).collect::<Vec<_>>().join(";"),
            grammar::print_map(&tail)
        );
        Schedule::from_fn(desc, move |n| {
            if n <= maps.len() {
                maps[n - 1].clone()
            } else {
                tail.clone()
            }
        })
    }

    /// `f_n(z) = e^{i/n} z`: rotations with harmonic, non-summable angles.
    pub fn harmonic_rotation() -> Schedule {
        Schedule::from_fn("harmonic_rotation", |n| HoloMap::rotation(1.0 / n as f64))
    }

    /// `f_n = rotation(base + 2^{-n})`: geometric approach to a base rotation.
    pub fn rotation_approach(base: f64) -> Schedule {
        Schedule::from_fn(format!("rotation_approach({base})"), move |n| {
            HoloMap::rotation(base + 0.5f64.powi(n as i32))
        })
    }

    /// `f_n(z) = (1 - 1/(n+1)) z`: contractions approaching the identity.
    pub fn shrink_to_zero() -> Schedule {
        Schedule::from_fn("shrink_to_zero", |n| {
            HoloMap::affine(
                Complex64::new(1.0 - 1.0 / (n as f64 + 1.0), 0.0),
                Complex64::new(0.0, 0.0),
            )
            .expect("coefficients satisfy |a|+|b| <= 1")
        })
    }

    /// `f_n(z) = z/2 + 1/(n+2)²`: vanishing (and summable) deviations from z/2.
    pub fn contract_decay() -> Schedule {
        Schedule::from_fn("contract_decay", |n| {
            let d = 1.0 / ((n as f64 + 2.0) * (n as f64 + 2.0));
            HoloMap::affine(Complex64::new(0.5, 0.0), Complex64::new(d, 0.0))
                .expect("coefficients satisfy |a|+|b| <= 1")
        })
    }

    /// `f_n(z) = z/2 + (-1)^n/(n+2)`: vanishing but non-summable deviations.
    pub fn contract_alternating() -> Schedule {
        Schedule::from_fn("contract_alternating", |n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let d = sign / (n as f64 + 2.0);
            HoloMap::affine(Complex64::new(0.5, 0.0), Complex64::new(d, 0.0))
                .expect("coefficients satisfy |a|+|b| <= 1")
        })
    }

    /// The adversarial block schedule `f_n(z) = z/2 + δe^{iθ_n}` where the
    /// phases alternate between 0 and π, each held until the orbit of 0 is
    /// within δ/10 of the corresponding fixed point ±2δ.
    pub fn adversarial_blocks(delta: f64, max_n: usize) -> Result<Schedule> {
        if !(0.0..=0.5).contains(&delta) {
            return Err(Error::InvalidConfig(
                "block schedule needs 0 <= delta <= 1/2".into(),
            ));
        }
        let mut phases = Vec::with_capacity(max_n);
        let mut state = Complex64::new(0.0, 0.0);
        let mut aiming_positive = true;
        for _ in 0..max_n {
            let theta = if aiming_positive { 0.0 } else { std::f64::consts::PI };
            phases.push(theta);
            state = state / 2.0 + delta * Complex64::from_polar(1.0, theta);
            let target = if aiming_positive { 2.0 * delta } else { -2.0 * delta };
            if delta > 0.0 && (state - Complex64::new(target, 0.0)).norm() < delta / 10.0 {
                aiming_positive = !aiming_positive;
            }
        }
        let desc = format!("adversarial_blocks({delta})");
        Ok(Schedule::from_fn(desc, move |n| {
            let theta = phases[(n - 1).min(phases.len() - 1)];
            HoloMap::affine(
                Complex64::new(0.5, 0.0),
                delta * Complex64::from_polar(1.0, theta),
            )
            .expect("|1/2| + delta <= 1")
        }))
    }

    /// Drop the first `n0` maps and relabel: entry `n` becomes entry `n + n0`.
    pub fn shifted(&self, n0: usize) -> Schedule {
        let inner = self.gen.clone();
        Schedule {
            desc: format!("{}<<{}", self.desc, n0),
            gen: Arc::new(move |n| inner(n + n0)),
        }
    }

    pub fn map_at(&self, n: usize) -> HoloMap {
        assert!(n >= 1, "schedules are indexed from 1");
        (self.gen)(n)
    }

    pub fn describe(&self) -> &str {
        &self.desc
    }

    /// Parse a schedule expression:
    /// `const(MAP)`, `list(MAP;MAP;...)`, `harmonic_rotation`,
    /// `rotation_approach(base)`, `shrink_to_zero`, `contract_decay`,
    /// `contract_alternating`, `adversarial_blocks(delta)`.
    pub fn parse(s: &str, max_n: usize) -> Result<Schedule> {
        let s = s.trim();
        if let Some(body) = strip_call(s, "const") {
            return Ok(Schedule::constant(grammar::parse_map(body)?));
        }
        if let Some(body) = strip_call(s, "list") {
            let maps: Vec<HoloMap> = grammar::split_top_level(body, ';')
                .iter()
                .map(|p| grammar::parse_map(p))
                .collect::<Result<_>>()?;
            return Schedule::from_list(maps);
        }
        if s == "harmonic_rotation" {
            return Ok(Schedule::harmonic_rotation());
        }
        if let Some(body) = strip_call(s, "rotation_approach") {
            let base: f64 = body
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad base angle {body:?}")))?;
            return Ok(Schedule::rotation_approach(base));
        }
        if s == "shrink_to_zero" {
            return Ok(Schedule::shrink_to_zero());
        }
        if s == "contract_decay" {
            return Ok(Schedule::contract_decay());
        }
        if s == "contract_alternating" {
            return Ok(Schedule::contract_alternating());
        }
        if let Some(body) = strip_call(s, "adversarial_blocks") {
            let delta: f64 = body
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad delta {body:?}")))?;
            return Schedule::adversarial_blocks(delta, max_n);
        }
        Err(Error::Parse(format!("unknown schedule expression {s:?}")))
    }
}

fn strip_call<'a>(s: &'a str, head: &str) -> Option<&'a str> {
    s.strip_prefix(head)
        .and_then(|rest| rest.trim().strip_prefix('('))
        .and_then(|rest| rest.strip_suffix(')'))
}

/// How the raw sequence is normalized before reporting.
#[derive(Clone, Debug)]
pub enum Normalization {
    None,
    /// Report `base^{-n} ∘ F_n`; base must be the identity or an automorphism.
    ConjugateLeft(HoloMap),
    /// Report `G_n ∘ base^{-n}`; base must be the identity or an automorphism.
    ConjugateRight(HoloMap),
}

/// Full description of a composition-sequence run.
#[derive(Clone, Debug)]
pub struct SequenceSpec {
    pub side: Side,
    pub schedule: Schedule,
    pub normalization: Normalization,
    pub max_n: usize,
    pub model: Model,
}

impl SequenceSpec {
    pub fn new(side: Side, schedule: Schedule, max_n: usize) -> SequenceSpec {
        SequenceSpec {
            side,
            schedule,
            normalization: Normalization::None,
            max_n,
            model: Model::Disc,
        }
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> SequenceSpec {
        self.normalization = normalization;
        self
    }

    pub fn with_model(mut self, model: Model) -> SequenceSpec {
        self.model = model;
        self
    }

    /// JSON summary used as the trajectory-dump header.
    pub fn describe_json(&self) -> serde_json::Value {
        let norm = match &self.normalization {
            Normalization::None => "none".to_string(),
            Normalization::ConjugateLeft(m) => {
                format!("conjugate_left({})", grammar::print_map(m))
            }
            Normalization::ConjugateRight(m) => {
                format!("conjugate_right({})", grammar::print_map(m))
            }
        };
        serde_json::json!({
            "side": match self.side { Side::Left => "left", Side::Right => "right" },
            "schedule": self.schedule.describe(),
            "normalization": norm,
            "max_n": self.max_n,
            "model": format!("{}", self.model),
        })
    }
}

/// Per-point trajectories: `rows[n-1][i]` is the (normalized) sequence value
/// at `points[i]` after `n` steps.
#[derive(Clone, Debug)]
pub struct Trajectories {
    pub model: Model,
    pub points: Vec<Complex64>,
    pub rows: Vec<Vec<Complex64>>,
}

fn check_in_model(model: Model, z: Complex64, step: usize) -> Result<()> {
    let ok = z.re.is_finite()
        && z.im.is_finite()
        && match model {
            Model::Disc => z.norm() <= 1.0 + 1e-9,
            // Boundary Denjoy-Wolff orbits may approach the real axis or
            // escape toward infinity; only a crossing is an error.
            Model::HalfPlane => z.im >= -1e-9 * (1.0 + z.norm()),
        };
    if ok {
        Ok(())
    } else {
        Err(Error::Escape {
            step,
            detail: format!("value {z} left the {model} model"),
        })
    }
}

fn normalization_matrix(base: &HoloMap) -> Result<Option<Mat2>> {
    match base {
        HoloMap::Identity => Ok(None),
        _ => {
            let inv = invert(base)?;
            Ok(inv.to_mobius())
        }
    }
}

/// Run a left-composition sequence. The state advances incrementally — one
/// map application per step per point — and `conjugate_left` normalization
/// post-applies fused Möbius powers of the inverse base.
pub fn run_left(spec: &SequenceSpec, points: &[Complex64]) -> Result<Trajectories> {
    if spec.side != Side::Left {
        return Err(Error::InvalidConfig("run_left needs a left-sided spec".into()));
    }
    let inv_base = match &spec.normalization {
        Normalization::None => None,
        Normalization::ConjugateLeft(base) => normalization_matrix(base)?,
        Normalization::ConjugateRight(_) => {
            return Err(Error::InvalidConfig(
                "conjugate_right normalization applies to right sequences".into(),
            ))
        }
    };
    for p in points {
        check_in_model(spec.model, *p, 0)?;
    }
    let mut state: Vec<Complex64> = points.to_vec();
    let mut inv_pow = Mat2::IDENTITY;
    let mut rows = Vec::with_capacity(spec.max_n);
    for n in 1..=spec.max_n {
        let f = spec.schedule.map_at(n);
        for z in state.iter_mut() {
            *z = f.eval_unchecked(*z);
            check_in_model(spec.model, *z, n)?;
        }
        let row = match inv_base {
            None => state.clone(),
            Some(inv) => {
                inv_pow = inv_pow.mul(&inv).normalized().rescaled();
                state.iter().map(|z| inv_pow.apply(*z)).collect()
            }
        };
        rows.push(row);
    }
    Ok(Trajectories {
        model: spec.model,
        points: points.to_vec(),
        rows,
    })
}

/// Run a right-composition sequence. All-Möbius schedules extend a fused
/// matrix on the right (constant work per step); general schedules keep the
/// chain and re-evaluate, which costs O(n) per step and is capped.
pub fn run_right(spec: &SequenceSpec, points: &[Complex64]) -> Result<Trajectories> {
    if spec.side != Side::Right {
        return Err(Error::InvalidConfig("run_right needs a right-sided spec".into()));
    }
    let inv_base = match &spec.normalization {
        Normalization::None => None,
        Normalization::ConjugateRight(base) => normalization_matrix(base)?.map(Some),
        Normalization::ConjugateLeft(_) => {
            return Err(Error::InvalidConfig(
                "conjugate_left normalization applies to left sequences".into(),
            ))
        }
    };
    for p in points {
        check_in_model(spec.model, *p, 0)?;
    }
    // Composition state: `head` holds maps up to and including the last
    // non-Möbius one (outer first); `tail` fuses everything after it.
    let mut head: Vec<HoloMap> = Vec::new();
    let mut tail = Mat2::IDENTITY;
    // Normalized inputs g^{-n}(z_i), advanced one inverse application per step.
    let mut inputs: Vec<Complex64> = points.to_vec();
    let mut rows = Vec::with_capacity(spec.max_n);
    for n in 1..=spec.max_n {
        let g = spec.schedule.map_at(n);
        match g.to_mobius() {
            Some(mat) => {
                tail = tail.mul(&mat).normalized().rescaled();
            }
            None => {
                if spec.max_n > GENERAL_RIGHT_MAX_N {
                    return Err(Error::InvalidConfig(format!(
                        "general right schedules are capped at max_n = {GENERAL_RIGHT_MAX_N}"
                    )));
                }
                if tail != Mat2::IDENTITY {
                    head.push(HoloMap::Mobius {
                        mat: tail,
                        model: spec.model,
                    });
                    tail = Mat2::IDENTITY;
                }
                head.push(g);
            }
        }
        if let Some(Some(inv)) = &inv_base {
            for w in inputs.iter_mut() {
                *w = inv.apply(*w);
                check_in_model(spec.model, *w, n)?;
            }
        }
        let mut row = Vec::with_capacity(inputs.len());
        for w in &inputs {
            let mut v = tail.apply(*w);
            for m in head.iter().rev() {
                v = m.eval_unchecked(v);
            }
            check_in_model(spec.model, v, n)?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Trajectories {
        model: spec.model,
        points: points.to_vec(),
        rows,
    })
}

/// Per-step sup deviation of a schedule from a base map over a sampled
/// region, with running partial sums and a summability heuristic.
#[derive(Clone, Debug)]
pub struct DeviationSeries {
    pub sup_devs: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub summable: bool,
}

/// Deviation series: entry `n` is `sup_z ρ(schedule(n)(z), base(z))` over a
/// sample of the region. Summability is judged by comparing tail growth
/// against the partial-sum plateau: if the second-half tail shrinks by a
/// clear geometric factor relative to the previous half (or is negligible
/// outright), the series is flagged summable.
pub fn deviation_series(
    schedule: &Schedule,
    base: &HoloMap,
    region: &HyperbolicDisc,
    grid: usize,
    n_terms: usize,
) -> DeviationSeries {
    assert!(n_terms >= 1);
    let pts = sample_hyp_disc(region, grid.max(4), 0xD15C);
    let mut sup_devs = Vec::with_capacity(n_terms);
    let mut partial_sums = Vec::with_capacity(n_terms);
    let mut acc = 0.0f64;
    for n in 1..=n_terms {
        let f = schedule.map_at(n);
        let mut sup = 0.0f64;
        for p in &pts {
            let z = p.get();
            sup = sup.max(hyp_dist_disc_raw(f.eval_unchecked(z), base.eval_unchecked(z)));
        }
        acc += sup;
        sup_devs.push(sup);
        partial_sums.push(acc);
    }
    let total = acc;
    let summable = if n_terms < 8 {
        total < 1e-9
    } else {
        let half = partial_sums[n_terms / 2 - 1];
        let quarter = partial_sums[n_terms / 4 - 1];
        let tail1 = total - half;
        let tail2 = half - quarter;
        tail1 <= 1e-12 * (1.0 + total) || (tail2 > 0.0 && tail1 / tail2 <= 0.9)
    };
    DeviationSeries {
        sup_devs,
        partial_sums,
        summable,
    }
}

/// Convergence verdicts. `Inconclusive` is a verdict, not an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ConstantLimit,
    NonconstantLimit,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::ConstantLimit => "constant_limit",
            Verdict::NonconstantLimit => "nonconstant_limit",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Outcome of convergence detection, including the grid and tolerances
/// used — "locally uniform" has no canonical numeric criterion, so verdicts
/// must state theirs.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub verdict: Verdict,
    pub limit_point: Option<Complex64>,
    pub limit_grid: Option<Vec<(Complex64, Complex64)>>,
    /// Per-step sup over points of Euclidean distance to the final row.
    pub deviation_series: Vec<f64>,
    pub witness: Option<String>,
    pub witness_values: Option<(Complex64, Complex64)>,
    pub tol: f64,
    pub window: usize,
    pub nonconst_threshold: f64,
}

/// Detect the limiting behaviour of trajectories over a trailing window.
///
/// Constant limits are judged in the Euclidean metric (valid up to the
/// closed disc), non-constant limits in the hyperbolic metric (those limits
/// are interior). Divergence requires recurrence: two separated cluster
/// values each visited at least 3 times in the window.
pub fn detect_convergence(
    traj: &Trajectories,
    tol: f64,
    window: usize,
    nonconst_threshold: f64,
) -> ConvergenceReport {
    let n_rows = traj.rows.len();
    let n_pts = traj.points.len();
    assert!(n_rows >= 1 && n_pts >= 2, "need trajectories on >= 2 points");
    let w = window.clamp(1, n_rows);
    let tail = &traj.rows[n_rows - w..];
    let last = &traj.rows[n_rows - 1];

    let deviation_series: Vec<f64> = traj
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(last)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max)
        })
        .collect();

    let mut report = ConvergenceReport {
        verdict: Verdict::Inconclusive,
        limit_point: None,
        limit_grid: None,
        deviation_series,
        witness: None,
        witness_values: None,
        tol,
        window: w,
        nonconst_threshold,
    };

    // Constant limit: every value in the window near one common point.
    let candidate = last.iter().sum::<Complex64>() / n_pts as f64;
    if tail
        .iter()
        .all(|row| row.iter().all(|v| (v - candidate).norm() <= tol))
    {
        report.verdict = Verdict::ConstantLimit;
        report.limit_point = Some(candidate);
        return report;
    }

    // Per-point Cauchy within the window?
    let cauchy = (0..n_pts).all(|i| {
        let col: Vec<Complex64> = tail.iter().map(|row| row[i]).collect();
        max_pairwise(&col) <= tol
    });
    if cauchy {
        let dist = |a: Complex64, b: Complex64| match traj.model {
            Model::Disc => {
                if a.norm() < 1.0 && b.norm() < 1.0 {
                    hyp_dist_disc_raw(a, b)
                } else {
                    f64::NAN
                }
            }
            Model::HalfPlane => {
                if a.im > 0.0 && b.im > 0.0 {
                    hyp_dist_halfplane_raw(a, b)
                } else {
                    f64::NAN
                }
            }
        };
        let mut separated = false;
        'outer: for i in 0..n_pts {
            for j in i + 1..n_pts {
                let d = dist(last[i], last[j]);
                if d.is_finite() && d > nonconst_threshold {
                    separated = true;
                    break 'outer;
                }
            }
        }
        if separated {
            report.verdict = Verdict::NonconstantLimit;
            report.limit_grid = Some(traj.points.iter().copied().zip(last.iter().copied()).collect());
            return report;
        }
        return report; // per-point Cauchy but neither constant nor separated
    }

    // Divergence with recurrence.
    for i in 0..n_pts {
        let col: Vec<Complex64> = tail.iter().map(|row| row[i]).collect();
        if let Some((p, q)) = recurrent_clusters(&col, 10.0 * tol) {
            report.verdict = Verdict::Divergent;
            report.witness = Some(format!(
                "point {} ({}) oscillates between {} and {} in the trailing window",
                i, traj.points[i], p, q
            ));
            report.witness_values = Some((p, q));
            return report;
        }
    }
    report
}

fn max_pairwise(values: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            d = d.max((values[i] - values[j]).norm());
        }
    }
    d
}

/// Find two values separated by more than `min_sep` such that the window
/// visits a neighbourhood (quarter of the separation) of each at least 3
/// times.
fn recurrent_clusters(values: &[Complex64], min_sep: f64) -> Option<(Complex64, Complex64)> {
    let (mut best_i, mut best_j, mut best) = (0, 0, 0.0f64);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if d > best {
                best = d;
                best_i = i;
                best_j = j;
            }
        }
    }
    if best <= min_sep {
        return None;
    }
    let (p, q) = (values[best_i], values[best_j]);
    let radius = best / 4.0;
    let near_p = values.iter().filter(|v| (*v - p).norm() <= radius).count();
    let near_q = values.iter().filter(|v| (*v - q).norm() <= radius).count();
    if near_p >= 3 && near_q >= 3 {
        Some((p, q))
    } else {
        None
    }
}

/// Write a trajectory dump: a JSON header line carrying the spec, then CSV
/// columns `n, point_index, re, im`.
pub fn write_trajectory_csv(
    traj: &Trajectories,
    spec: &SequenceSpec,
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(out, "# {}", spec.describe_json())?;
    writeln!(out, "n,point_index,re,im")?;
    for (n, row) in traj.rows.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            writeln!(out, "{},{},{},{}", n + 1, i, v.re, v.im)?;
        }
    }
    Ok(())
}
