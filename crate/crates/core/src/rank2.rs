//! Serial sweeps for rank-2 factors.
//!
//! With `c(phi) = (sin phi, cos phi)` every row defines a curve
//! `|u_n(phi)| = |V_{n,1} sin phi + V_{n,2} cos phi|` on `(-pi/2, pi/2]`. The
//! top-`K` support only changes where two curves cross. [`solve_sorted`] visits
//! every crossing in angular order and updates the support in O(1) per event;
//! [`solve_lazy`] follows only the current K-th order curve and computes a
//! curve's crossings the first time it reaches that rank.
//!
//! Rows that coincide up to sign have identical curves; their mutual crossings
//! are dropped and their relative order is fixed by index. Several crossings at
//! (numerically) the same angle form a cluster, after which the support is
//! recomputed from the ordering just right of the cluster.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;

use crate::combinatorics::{binomial, Combinations};
use crate::error::{Error, Result};
use crate::linalg::top_k_indices;
use crate::model::{FactorMatrix, Support, Tolerances};
use crate::rankd::CandidateSet;

const STRADDLE_CAP: u128 = 64;

/// Which equation an intersection solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    /// `u_i = u_j`
    Difference,
    /// `u_i = -u_j`
    Sum,
}

/// A crossing of curves `pair.0 < pair.1` at `angle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionEvent {
    pub angle: f64,
    pub pair: (usize, usize),
    pub branch: Branch,
}

/// Crossings of one pair of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct PairIntersections {
    pub events: Vec<IntersectionEvent>,
    /// Set when one branch vanishes identically, i.e. the rows coincide up to
    /// sign and the curves are the same.
    pub coincident: bool,
}

/// Counters of a sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepCounters {
    pub intersections_computed: u64,
    pub intersections_visited: u64,
    pub distinct_supports: u64,
    /// Clustered crossings resolved by recomputing the support.
    pub fallbacks: u64,
}

/// One recorded support along a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// Angle of the event (the last one of a cluster); `-pi/2` for the start.
    pub angle: f64,
    pub support: Support,
    pub kth_curve: usize,
    pub fallback: bool,
}

/// Current support with O(1) membership tests and swaps.
#[derive(Debug, Clone)]
pub struct SweepState {
    members: Vec<usize>,
    slot: Vec<usize>,
    kth_curve: usize,
    position: f64,
    counters: SweepCounters,
}

const ABSENT: usize = usize::MAX;

impl SweepState {
    fn new(n: usize, selection: &RightLimit, position: f64) -> Self {
        let mut state = SweepState {
            members: Vec::new(),
            slot: vec![ABSENT; n],
            kth_curve: selection.kth,
            position,
            counters: SweepCounters::default(),
        };
        state.reset(selection, position);
        state
    }

    fn reset(&mut self, selection: &RightLimit, position: f64) {
        for &m in &self.members {
            self.slot[m] = ABSENT;
        }
        self.members.clear();
        for (s, &m) in selection.support.iter().enumerate() {
            self.members.push(m);
            self.slot[m] = s;
        }
        self.kth_curve = selection.kth;
        self.position = position;
    }

    #[inline]
    pub fn contains(&self, n: usize) -> bool {
        self.slot[n] != ABSENT
    }

    fn swap(&mut self, leaving: usize, joining: usize) {
        let s = self.slot[leaving];
        self.members[s] = joining;
        self.slot[leaving] = ABSENT;
        self.slot[joining] = s;
    }

    pub fn support(&self) -> Support {
        Support::from_unsorted(self.members.clone())
    }

    pub fn kth_curve(&self) -> usize {
        self.kth_curve
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn counters(&self) -> SweepCounters {
        self.counters
    }

    /// Applies a lone crossing of `a` and `b`. Returns whether the support changed.
    fn cross(&mut self, a: usize, b: usize) -> bool {
        match (self.contains(a), self.contains(b)) {
            (true, false) => {
                self.swap(a, b);
                self.kth_curve = b;
                true
            }
            (false, true) => {
                self.swap(b, a);
                self.kth_curve = a;
                true
            }
            (true, true) => {
                if self.kth_curve == a {
                    self.kth_curve = b;
                } else if self.kth_curve == b {
                    self.kth_curve = a;
                }
                false
            }
            (false, false) => false,
        }
    }
}

/// Support of the top-`k` curves just right of an angle.
#[derive(Debug, Clone)]
struct RightLimit {
    support: Vec<usize>,
    kth: usize,
    /// Every completion of a straddling tie (only when few).
    straddling: Vec<Support>,
}

/// Orders curves by magnitude at `c` and breaks ties by the right derivative
/// of `|u|` along `dc`, then by index.
fn right_limit(v: &FactorMatrix, k: usize, c: [f64; 2], dc: [f64; 2], tau_tie: f64) -> RightLimit {
    let u = v.mul_vec(&c);
    let du = v.mul_vec(&dc);
    let top = top_k_indices(&u, k, tau_tie).expect("sparsity validated by caller");
    let need = k - top.strict.len();
    let zero = tau_tie * u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let slope = |n: usize| {
        if u[n].abs() <= zero {
            du[n].abs()
        } else {
            u[n].signum() * du[n]
        }
    };
    let mut tied = top.tied.clone();
    tied.sort_by(|&a, &b| slope(b).total_cmp(&slope(a)).then(a.cmp(&b)));
    let kth = tied[need - 1];
    let mut support = top.strict.clone();
    support.extend_from_slice(&tied[..need]);
    let mut straddling = Vec::new();
    if top.len() > k && binomial(top.tied.len(), need) <= STRADDLE_CAP {
        for pick in Combinations::new(top.tied.len(), need) {
            let mut s = top.strict.clone();
            s.extend(pick.iter().map(|&p| top.tied[p]));
            straddling.push(Support::from_unsorted(s));
        }
    }
    RightLimit {
        support,
        kth,
        straddling,
    }
}

fn at_angle(angle: f64) -> ([f64; 2], [f64; 2]) {
    let (s, c) = angle.sin_cos();
    ([s, c], [c, -s])
}

/// Start of the sweep: `c(-pi/2) = (-1, 0)`, moving along `(0, 1)`.
fn initial(v: &FactorMatrix, k: usize, tol: &Tolerances) -> RightLimit {
    right_limit(v, k, [-1.0, 0.0], [0.0, 1.0], tol.tie)
}

/// Support just right of `angle`, recomputed from scratch in O(N).
pub fn coincident_event_fallback(v: &FactorMatrix, k: usize, angle: f64, tol: &Tolerances) -> Result<Support> {
    validate(v, k)?;
    let (c, dc) = at_angle(angle);
    Ok(Support::from_unsorted(right_limit(v, k, c, dc, tol.tie).support))
}

/// Root of `a sin phi + b cos phi = 0` in `(-pi/2, pi/2]`, or `None` when the
/// form vanishes identically.
#[inline]
fn branch_angle(a: f64, b: f64, tau_zero: f64) -> Option<f64> {
    if a.abs() <= tau_zero && b.abs() <= tau_zero {
        return None;
    }
    let mut phi = (-b).atan2(a);
    if phi > FRAC_PI_2 {
        phi -= std::f64::consts::PI;
    } else if phi <= -FRAC_PI_2 {
        phi += std::f64::consts::PI;
    }
    Some(phi.clamp(-FRAC_PI_2, FRAC_PI_2))
}

#[inline]
fn pair_angles(v: &FactorMatrix, i: usize, j: usize, tau_zero: f64) -> [Option<f64>; 2] {
    let (ri, rj) = (v.row(i), v.row(j));
    [
        branch_angle(ri[0] - rj[0], ri[1] - rj[1], tau_zero),
        branch_angle(ri[0] + rj[0], ri[1] + rj[1], tau_zero),
    ]
}

/// Crossings of curves `i` and `j`: `u_i = u_j` and `u_i = -u_j`.
pub fn intersections_of_pair(v: &FactorMatrix, i: usize, j: usize, tau_zero: f64) -> Result<PairIntersections> {
    if v.cols() != 2 {
        return Err(Error::AlgorithmMismatch {
            algorithm: "intersections_of_pair",
            rank: v.cols(),
        });
    }
    if i == j || i >= v.rows() || j >= v.rows() {
        return Err(Error::InvalidInput(format!("invalid curve pair ({i}, {j})")));
    }
    let angles = pair_angles(v, i, j, tau_zero);
    let pair = (i.min(j), i.max(j));
    let events = angles
        .iter()
        .zip([Branch::Difference, Branch::Sum])
        .filter_map(|(a, branch)| a.map(|angle| IntersectionEvent { angle, pair, branch }))
        .collect();
    Ok(PairIntersections {
        events,
        coincident: angles.iter().any(Option::is_none),
    })
}

fn validate(v: &FactorMatrix, k: usize) -> Result<()> {
    if v.cols() != 2 {
        return Err(Error::AlgorithmMismatch {
            algorithm: "rank2",
            rank: v.cols(),
        });
    }
    if k == 0 || k > v.rows() {
        return Err(Error::InvalidSparsity { k, n: v.rows() });
    }
    Ok(())
}

/// Packed event: the branch rides in the top bit of `hi`.
#[derive(Clone, Copy)]
struct PackedEvent {
    angle: f64,
    lo: u32,
    hi: u32,
}

impl PackedEvent {
    const BRANCH_BIT: u32 = 1 << 31;

    fn new(angle: f64, a: usize, b: usize, branch: Branch) -> Self {
        let (lo, hi) = (a.min(b) as u32, a.max(b) as u32);
        let hi = if branch == Branch::Sum {
            hi | Self::BRANCH_BIT
        } else {
            hi
        };
        PackedEvent { angle, lo, hi }
    }

    fn pair(&self) -> (usize, usize) {
        (self.lo as usize, (self.hi & !Self::BRANCH_BIT) as usize)
    }

    fn order(&self, other: &Self) -> std::cmp::Ordering {
        self.angle
            .total_cmp(&other.angle)
            .then(self.lo.cmp(&other.lo))
            .then((self.hi & !Self::BRANCH_BIT).cmp(&(other.hi & !Self::BRANCH_BIT)))
            .then(self.hi.cmp(&other.hi))
    }
}

struct Recorder<'t> {
    seen: HashSet<Support>,
    trace: Option<&'t mut Vec<TraceStep>>,
}

impl Recorder<'_> {
    fn record(&mut self, state: &SweepState, fallback: bool, changed: bool) {
        if !changed && self.trace.is_none() {
            return;
        }
        let support = state.support();
        if let Some(trace) = self.trace.as_deref_mut() {
            trace.push(TraceStep {
                angle: state.position,
                support: support.clone(),
                kth_curve: state.kth_curve,
                fallback,
            });
        }
        self.seen.insert(support);
    }
}

/// Sorted sweep over all `2 C(N, 2)` crossings.
pub fn solve_sorted(v: &FactorMatrix, k: usize) -> Result<(CandidateSet, SweepCounters)> {
    solve_sorted_with(v, k, &Tolerances::default())
}

pub fn solve_sorted_with(v: &FactorMatrix, k: usize, tol: &Tolerances) -> Result<(CandidateSet, SweepCounters)> {
    run_sorted(v, k, tol, None)
}

/// Supports recorded at every step of the sorted sweep, in angular order.
pub fn sorted_trace(v: &FactorMatrix, k: usize, tol: &Tolerances) -> Result<Vec<TraceStep>> {
    let mut trace = Vec::new();
    run_sorted(v, k, tol, Some(&mut trace))?;
    Ok(trace)
}

fn run_sorted(
    v: &FactorMatrix,
    k: usize,
    tol: &Tolerances,
    trace: Option<&mut Vec<TraceStep>>,
) -> Result<(CandidateSet, SweepCounters)> {
    validate(v, k)?;
    let n = v.rows();
    let tau_zero = tol.zero * v.max_abs();
    let mut counters = SweepCounters::default();
    let mut events = Vec::with_capacity(n * n.saturating_sub(1));
    for i in 0..n {
        for j in i + 1..n {
            let [diff, sum] = pair_angles(v, i, j, tau_zero);
            counters.intersections_computed += u64::from(diff.is_some()) + u64::from(sum.is_some());
            if let (Some(d), Some(s)) = (diff, sum) {
                events.push(PackedEvent::new(d, i, j, Branch::Difference));
                events.push(PackedEvent::new(s, i, j, Branch::Sum));
            }
        }
    }
    events.sort_unstable_by(|a, b| a.order(b));

    let start = initial(v, k, tol);
    let mut state = SweepState::new(n, &start, -FRAC_PI_2);
    let mut rec = Recorder {
        seen: start.straddling.iter().cloned().collect(),
        trace,
    };
    rec.record(&state, false, true);

    let mut idx = 0;
    while idx < events.len() {
        let mut end = idx + 1;
        while end < events.len() && events[end].angle - events[end - 1].angle <= tol.angle {
            end += 1;
        }
        let angle = events[end - 1].angle;
        let fallback = end - idx > 1;
        let changed = if fallback {
            let (c, dc) = at_angle(angle);
            let before = state.support();
            state.reset(&right_limit(v, k, c, dc, tol.tie), angle);
            counters.fallbacks += 1;
            state.support() != before
        } else {
            let (a, b) = events[idx].pair();
            state.position = angle;
            state.cross(a, b)
        };
        counters.intersections_visited += (end - idx) as u64;
        #[cfg(debug_assertions)]
        if n <= 64 {
            let next = events.get(end).map_or(FRAC_PI_2, |e| e.angle);
            debug_check_kth(v, &state, 0.5 * (angle + next), tol);
        }
        rec.record(&state, fallback, changed);
        idx = end;
    }
    counters.distinct_supports = rec.seen.len() as u64;
    state.counters = counters;
    Ok((CandidateSet::from_supports(rec.seen), counters))
}

/// The K-th curve must be the smallest member just right of the last event.
#[cfg(debug_assertions)]
fn debug_check_kth(v: &FactorMatrix, state: &SweepState, probe: f64, tol: &Tolerances) {
    let (c, _) = at_angle(probe);
    let u = v.mul_vec(&c);
    let slack = 1e-9 * u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let kth = u[state.kth_curve].abs();
    debug_assert!(state.contains(state.kth_curve));
    debug_assert!(
        state.members.iter().all(|&m| kth <= u[m].abs() + slack + tol.tie),
        "K-th curve {} is not the smallest member at {probe}",
        state.kth_curve
    );
}

/// Event of a single curve in the lazy sweep.
#[derive(Clone, Copy)]
struct CurveEvent {
    angle: f64,
    partner: usize,
    key: (usize, usize, Branch),
}

/// Lazily computed crossings of each curve.
struct LazyEvents {
    /// Per pair: `[difference, sum]`, `INFINITY` until computed, `NaN` when
    /// dropped (coincident rows).
    angles: Vec<[f64; 2]>,
    lists: Vec<Option<(Vec<CurveEvent>, usize)>>,
    /// Curve shares its graph with another row.
    twinned: Vec<bool>,
    tau_zero: f64,
    computed: u64,
}

impl LazyEvents {
    fn new(n: usize, tau_zero: f64) -> Self {
        LazyEvents {
            angles: vec![[f64::INFINITY; 2]; n * n.saturating_sub(1) / 2],
            lists: vec![None; n],
            twinned: vec![false; n],
            tau_zero,
            computed: 0,
        }
    }

    #[inline]
    fn pair_index(a: usize, b: usize) -> usize {
        let (lo, hi) = (a.min(b), a.max(b));
        hi * (hi - 1) / 2 + lo
    }

    fn pair(&mut self, v: &FactorMatrix, a: usize, b: usize) -> [f64; 2] {
        let idx = Self::pair_index(a, b);
        if self.angles[idx][0] == f64::INFINITY {
            let [diff, sum] = pair_angles(v, a.min(b), a.max(b), self.tau_zero);
            self.computed += u64::from(diff.is_some()) + u64::from(sum.is_some());
            self.angles[idx] = match (diff, sum) {
                (Some(d), Some(s)) => [d, s],
                _ => [f64::NAN; 2],
            };
        }
        self.angles[idx]
    }

    fn ensure(&mut self, v: &FactorMatrix, curve: usize) {
        if self.lists[curve].is_some() {
            return;
        }
        let mut list = Vec::with_capacity(2 * v.rows());
        for other in (0..v.rows()).filter(|&o| o != curve) {
            let angles = self.pair(v, curve, other);
            let key = (curve.min(other), curve.max(other));
            self.twinned[curve] |= angles[0].is_nan();
            for (angle, branch) in angles.into_iter().zip([Branch::Difference, Branch::Sum]) {
                if angle.is_finite() && angle < FRAC_PI_2 {
                    list.push(CurveEvent {
                        angle,
                        partner: other,
                        key: (key.0, key.1, branch),
                    });
                }
            }
        }
        list.sort_unstable_by(|a, b| a.angle.total_cmp(&b.angle).then(a.key.cmp(&b.key)));
        self.lists[curve] = Some((list, 0));
    }
}

/// Lazy sweep that only tracks crossings of the K-th order curve.
pub fn solve_lazy(v: &FactorMatrix, k: usize) -> Result<(CandidateSet, SweepCounters)> {
    solve_lazy_with(v, k, &Tolerances::default())
}

pub fn solve_lazy_with(v: &FactorMatrix, k: usize, tol: &Tolerances) -> Result<(CandidateSet, SweepCounters)> {
    run_lazy(v, k, tol, None)
}

/// Supports recorded at every step of the lazy sweep.
pub fn lazy_trace(v: &FactorMatrix, k: usize, tol: &Tolerances) -> Result<Vec<TraceStep>> {
    let mut trace = Vec::new();
    run_lazy(v, k, tol, Some(&mut trace))?;
    Ok(trace)
}

fn run_lazy(
    v: &FactorMatrix,
    k: usize,
    tol: &Tolerances,
    trace: Option<&mut Vec<TraceStep>>,
) -> Result<(CandidateSet, SweepCounters)> {
    validate(v, k)?;
    let n = v.rows();
    let mut events = LazyEvents::new(n, tol.zero * v.max_abs());
    let mut counters = SweepCounters::default();

    let start = initial(v, k, tol);
    let mut state = SweepState::new(n, &start, -FRAC_PI_2);
    let mut rec = Recorder {
        seen: start.straddling.iter().cloned().collect(),
        trace,
    };
    rec.record(&state, false, true);

    // Events at or before `bound` are already accounted for.
    let mut bound = -FRAC_PI_2;
    loop {
        let curve = state.kth_curve;
        events.ensure(v, curve);
        let (list, cursor) = events.lists[curve].as_mut().expect("ensured above");
        while *cursor < list.len() && list[*cursor].angle <= bound {
            *cursor += 1;
        }
        if *cursor == list.len() {
            break;
        }
        let first = *cursor;
        let mut end = first + 1;
        while end < list.len() && list[end].angle - list[end - 1].angle <= tol.angle {
            end += 1;
        }
        *cursor = end;
        let angle = list[end - 1].angle;
        // A twin's crossings coincide with this curve's but are not in its list.
        let fallback = end - first > 1 || events.twinned[curve];
        let changed = if fallback {
            let (c, dc) = at_angle(angle);
            let before = state.support();
            state.reset(&right_limit(v, k, c, dc, tol.tie), angle);
            counters.fallbacks += 1;
            bound = angle + tol.angle;
            state.support() != before
        } else {
            let partner = list[first].partner;
            state.position = angle;
            bound = angle;
            let changed = !state.contains(partner);
            if changed {
                state.swap(curve, partner);
            }
            state.kth_curve = partner;
            changed
        };
        counters.intersections_visited += (end - first) as u64;
        rec.record(&state, fallback, changed);
    }
    counters.intersections_computed = events.computed;
    counters.distinct_supports = rec.seen.len() as u64;
    state.counters = counters;
    Ok((CandidateSet::from_supports(rec.seen), counters))
}
