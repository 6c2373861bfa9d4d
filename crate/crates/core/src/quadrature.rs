//! Integration kernels: Gauss rules, adaptive Gauss–Kronrod in one dimension,
//! a cubature that refines dyadically toward a point singularity, and a
//! randomly shifted Halton scheme with power grading near the singularity.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub target_met: bool,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    GaussRule { nodes, weights }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_W[7] * fc;
    let mut gauss = G_W[3] * fc;
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK_W[i] * s;
        if i % 2 == 1 {
            gauss += G_W[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

#[derive(PartialEq)]
struct Keyed {
    err: f64,
    seq: usize,
}

impl Eq for Keyed {}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) on `[a, b]`.
pub fn integrate_1d(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Estimate {
    if !(b > a) {
        return Estimate {
            value: 0.0,
            abs_error: 0.0,
            target_met: true,
        };
    }
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut heap = BinaryHeap::new();
    let (v, e) = gk15(f, a, b);
    intervals.push((a, b, v, e));
    heap.push(Keyed { err: e, seq: 0 });
    let (mut total, mut err) = (v, e);
    while err > abs_tol.max(rel_tol * total.abs()) && intervals.len() < max_intervals {
        let Some(Keyed { seq, .. }) = heap.pop() else {
            break;
        };
        let (lo, hi, v0, e0) = intervals[seq];
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            continue;
        }
        let (vl, el) = gk15(f, lo, mid);
        let (vr, er) = gk15(f, mid, hi);
        total += vl + vr - v0;
        err += el + er - e0;
        intervals[seq] = (lo, mid, vl, el);
        heap.push(Keyed { err: el, seq });
        intervals.push((mid, hi, vr, er));
        heap.push(Keyed {
            err: er,
            seq: intervals.len() - 1,
        });
    }
    let value = intervals.iter().map(|i| i.2).sum::<f64>();
    let abs_error = intervals.iter().map(|i| i.3).sum::<f64>();
    Estimate {
        value,
        abs_error,
        target_met: abs_error <= abs_tol.max(rel_tol * value.abs()),
    }
}

/// An integral over an axis-aligned box, possibly singular at `focus`.
pub(crate) struct Problem<'a> {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Interior coordinates per axis where the integrand has kinks.
    pub splits: Vec<Vec<f64>>,
    pub focus: Option<Vec<f64>>,
    /// Homogeneity degree of the kernel singularity at `focus`.
    pub kernel_degree: f64,
    pub integrand: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AdaptiveSettings {
    pub max_depth: u32,
    pub rule_order: usize,
    pub target_rel_err: f64,
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuasiRandomSettings {
    pub samples: u64,
    pub replicates: usize,
    pub seed: u64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn breakpoints(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|j| {
                let (lo, hi) = (self.lower[j], self.upper[j]);
                let mut pts = vec![lo, hi];
                let extra = self.splits.get(j).into_iter().flatten().copied();
                let focus = self.focus.as_ref().map(|f| f[j]);
                pts.extend(extra.chain(focus).filter(|&v| v > lo && v < hi));
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts
            })
            .collect()
    }

    /// Initial cells from the tensor product of breakpoint intervals.
    fn initial_cells(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        let bp = self.breakpoints();
        let d = self.dim();
        let counts: Vec<usize> = bp.iter().map(|b| b.len() - 1).collect();
        let total: usize = counts.iter().product();
        let mut cells = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let lo = (0..d).map(|j| bp[j][idx[j]]).collect();
            let hi = (0..d).map(|j| bp[j][idx[j] + 1]).collect();
            cells.push((lo, hi));
            for j in (0..d).rev() {
                idx[j] += 1;
                if idx[j] < counts[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        cells
    }

    fn focus_corner(&self, lo: &[f64], hi: &[f64]) -> Option<Vec<f64>> {
        let f = self.focus.as_ref()?;
        (0..lo.len())
            .all(|j| f[j] == lo[j] || f[j] == hi[j])
            .then(|| f.clone())
    }

    fn degenerate(&self) -> bool {
        (0..self.dim()).any(|j| !(self.upper[j] > self.lower[j]))
    }
}

struct Tensor<'r> {
    rule: &'r GaussRule,
    point: Vec<f64>,
    idx: Vec<usize>,
}

impl<'r> Tensor<'r> {
    fn new(rule: &'r GaussRule, d: usize) -> Self {
        Self {
            rule,
            point: vec![0.0; d],
            idx: vec![0; d],
        }
    }

    fn integrate(&mut self, f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64]) -> f64 {
        let d = lo.len();
        let g = self.rule.nodes.len();
        let mut vol = 1.0;
        for j in 0..d {
            vol *= 0.5 * (hi[j] - lo[j]);
        }
        self.idx.iter_mut().for_each(|i| *i = 0);
        let total = g.pow(d as u32);
        let mut sum = 0.0;
        for _ in 0..total {
            let mut w = 1.0;
            for j in 0..d {
                let t = self.rule.nodes[self.idx[j]];
                self.point[j] = 0.5 * (lo[j] + hi[j]) + 0.5 * (hi[j] - lo[j]) * t;
                w *= self.rule.weights[self.idx[j]];
            }
            let v = f(&self.point);
            if v != 0.0 {
                sum += w * v;
            }
            for j in (0..d).rev() {
                self.idx[j] += 1;
                if self.idx[j] < g {
                    break;
                }
                self.idx[j] = 0;
            }
        }
        sum * vol
    }
}

/// Inflation of the split-difference estimate, which tracks the true error of
/// unresolved cells without margin.
const CELL_SAFETY: f64 = 2.0;

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    err: f64,
    axis: usize,
    halves: [f64; 2],
    shell: Option<(usize, usize)>,
    live: bool,
}

fn evaluate_cell(
    t: &mut Tensor,
    f: &dyn Fn(&[f64]) -> f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    base: Option<f64>,
    shell: Option<(usize, usize)>,
) -> Cell {
    let base = base.unwrap_or_else(|| t.integrate(f, &lo, &hi));
    let d = lo.len();
    let mut best = (0usize, -1.0f64, [0.0, 0.0]);
    let mut err = 0.0;
    for j in 0..d {
        let mid = 0.5 * (lo[j] + hi[j]);
        let mut h = hi.clone();
        h[j] = mid;
        let a = t.integrate(f, &lo, &h);
        let mut l = lo.clone();
        l[j] = mid;
        let b = t.integrate(f, &l, &hi);
        let diff = (a + b - base).abs();
        err += CELL_SAFETY * diff;
        if diff > best.1 {
            best = (j, diff, [a, b]);
        }
    }
    Cell {
        value: best.2[0] + best.2[1],
        err,
        axis: best.0,
        halves: best.2,
        lo,
        hi,
        shell,
        live: true,
    }
}

/// Geometric extrapolation of the shells left out below the deepest level.
fn chain_tail(shells: &[f64], fallback_ratio: f64) -> (f64, f64) {
    let k = shells.len();
    if k == 0 {
        return (0.0, 0.0);
    }
    let last = shells[k - 1];
    if k >= 3 {
        let rho = shells[k - 1] / shells[k - 2];
        let rho_prev = shells[k - 2] / shells[k - 3];
        let ok = |r: f64| r.is_finite() && r > 0.0 && r < 0.999;
        if ok(rho) && ok(rho_prev) {
            let tail = last * rho / (1.0 - rho);
            let tail_prev = shells[k - 2] * rho_prev / (1.0 - rho_prev);
            return (tail, (last + tail - tail_prev).abs());
        }
    }
    if last == 0.0 {
        return (0.0, 0.0);
    }
    let r = fallback_ratio.clamp(0.0, 0.999);
    let tail = last * r / (1.0 - r);
    (tail, tail.abs() + last.abs())
}

/// Adaptive cubature with a dyadic chain toward the singular point.
pub(crate) fn adaptive(problem: &Problem, s: AdaptiveSettings) -> Estimate {
    if problem.degenerate() {
        return Estimate {
            value: 0.0,
            abs_error: 0.0,
            target_met: true,
        };
    }
    let d = problem.dim();
    let f = problem.integrand;
    let rule = gauss_legendre(s.rule_order);
    let mut t = Tensor::new(&rule, d);
    let mut cells: Vec<Cell> = Vec::new();
    let mut chains: Vec<Vec<f64>> = Vec::new();

    for (lo, hi) in problem.initial_cells() {
        match problem.focus_corner(&lo, &hi) {
            Some(corner) => {
                let chain = chains.len();
                chains.push(vec![0.0; s.max_depth as usize]);
                let (mut blo, mut bhi) = (lo, hi);
                for level in 0..s.max_depth as usize {
                    let mid: Vec<f64> = (0..d).map(|j| 0.5 * (blo[j] + bhi[j])).collect();
                    let mut next = None;
                    for mask in 0..(1usize << d) {
                        let mut clo = Vec::with_capacity(d);
                        let mut chi = Vec::with_capacity(d);
                        for j in 0..d {
                            if mask >> j & 1 == 0 {
                                clo.push(blo[j]);
                                chi.push(mid[j]);
                            } else {
                                clo.push(mid[j]);
                                chi.push(bhi[j]);
                            }
                        }
                        let touches = (0..d).all(|j| corner[j] == clo[j] || corner[j] == chi[j]);
                        if touches && next.is_none() {
                            next = Some((clo, chi));
                        } else {
                            let c = evaluate_cell(&mut t, f, clo, chi, None, Some((chain, level)));
                            chains[chain][level] += c.value;
                            cells.push(c);
                        }
                    }
                    let (nlo, nhi) = next.expect("a child touches the corner");
                    blo = nlo;
                    bhi = nhi;
                }
            }
            None => cells.push(evaluate_cell(&mut t, f, lo, hi, None, None)),
        }
    }

    let fallback = 2f64.powf(problem.kernel_degree - d as f64);
    let tails = |chains: &[Vec<f64>]| -> (f64, f64) {
        chains
            .iter()
            .map(|c| chain_tail(c, fallback))
            .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    };

    let mut heap: BinaryHeap<Keyed> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| Keyed { err: c.err, seq: i })
        .collect();
    let mut cell_value: f64 = cells.iter().map(|c| c.value).sum();
    let mut cell_err: f64 = cells.iter().map(|c| c.err).sum();
    let (mut tail_value, mut tail_err) = tails(&chains);
    let mut subdivisions = 0usize;

    loop {
        let total = cell_value + tail_value;
        let goal = s.target_rel_err * total.abs();
        let cell_goal = if tail_err < 0.5 * goal {
            goal - tail_err
        } else {
            0.5 * goal
        };
        if cell_err <= cell_goal || subdivisions >= s.max_subdivisions {
            break;
        }
        let Some(Keyed { seq, .. }) = heap.pop() else {
            break;
        };
        let (axis, lo, hi, halves, shell, value, err) = {
            let c = &cells[seq];
            (c.axis, c.lo.clone(), c.hi.clone(), c.halves, c.shell, c.value, c.err)
        };
        let mid = 0.5 * (lo[axis] + hi[axis]);
        if !(mid > lo[axis] && mid < hi[axis]) {
            continue;
        }
        cells[seq].live = false;
        let mut h = hi.clone();
        h[axis] = mid;
        let mut l = lo.clone();
        l[axis] = mid;
        let a = evaluate_cell(&mut t, f, lo, h, Some(halves[0]), shell);
        let b = evaluate_cell(&mut t, f, l, hi, Some(halves[1]), shell);
        let delta = a.value + b.value - value;
        cell_value += delta;
        cell_err += a.err + b.err - err;
        if let Some((ch, lv)) = shell {
            chains[ch][lv] += delta;
            let tv = tails(&chains);
            tail_value = tv.0;
            tail_err = tv.1;
        }
        for c in [a, b] {
            heap.push(Keyed {
                err: c.err,
                seq: cells.len(),
            });
            cells.push(c);
        }
        subdivisions += 1;
    }

    // Deterministic final sums in creation order.
    let mut shells = vec![Vec::new(); chains.len()];
    for (ch, c) in chains.iter().enumerate() {
        shells[ch] = vec![0.0; c.len()];
    }
    let mut value = 0.0;
    let mut err = 0.0;
    for c in cells.iter().filter(|c| c.live) {
        value += c.value;
        err += c.err;
        if let Some((ch, lv)) = c.shell {
            shells[ch][lv] += c.value;
        }
    }
    let (tv, te) = tails(&shells);
    value += tv;
    err += te;
    Estimate {
        value,
        abs_error: err,
        target_met: err <= s.target_rel_err * value.abs() || err == 0.0,
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Randomly shifted Halton points; cells meeting the singular point are mapped
/// by `y = c + (b - c)·u^κ` with `κ = d/(d - λ) + 1`.  The reported error is two
/// standard errors over the independent shifts.
pub(crate) fn quasi_random(problem: &Problem, s: QuasiRandomSettings) -> Estimate {
    if problem.degenerate() {
        return Estimate {
            value: 0.0,
            abs_error: 0.0,
            target_met: true,
        };
    }
    let d = problem.dim();
    assert!(d <= PRIMES.len(), "quasi-random scheme supports up to 8 dimensions");
    let f = problem.integrand;
    let cells = problem.initial_cells();
    let reps = s.replicates.max(2);
    let per = ((s.samples as usize / cells.len().max(1)) / reps).max(8) as u64;
    let kappa = if problem.focus.is_some() && problem.kernel_degree < d as f64 {
        d as f64 / (d as f64 - problem.kernel_degree.max(0.0)) + 1.0
    } else {
        1.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut replicate = vec![0.0; reps];
    let mut y = vec![0.0; d];
    let mut u = vec![0.0; d];
    for (lo, hi) in &cells {
        let corner = problem.focus_corner(lo, hi);
        // Map origin `c` and far corner `b` per axis.
        let (c, b): (Vec<f64>, Vec<f64>) = match &corner {
            Some(cc) => (0..d)
                .map(|j| {
                    if cc[j] == lo[j] {
                        (lo[j], hi[j])
                    } else {
                        (hi[j], lo[j])
                    }
                })
                .unzip(),
            None => (lo.clone(), hi.clone()),
        };
        let k = if corner.is_some() { kappa } else { 1.0 };
        let vol: f64 = (0..d).map(|j| (hi[j] - lo[j]).abs()).product();
        for r in replicate.iter_mut() {
            let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let mut acc = 0.0;
            for i in 1..=per {
                let mut jac = 1.0;
                let mut skip = false;
                for j in 0..d {
                    let mut v = radical_inverse(i, PRIMES[j]) + shift[j];
                    if v >= 1.0 {
                        v -= 1.0;
                    }
                    if v <= 0.0 {
                        skip = true;
                        break;
                    }
                    u[j] = v;
                    y[j] = c[j] + (b[j] - c[j]) * v.powf(k);
                    jac *= k * v.powf(k - 1.0);
                }
                if skip {
                    continue;
                }
                let fv = f(&y);
                if fv != 0.0 {
                    acc += fv * jac;
                }
            }
            *r += vol * acc / per as f64;
        }
    }
    let mean = replicate.iter().sum::<f64>() / reps as f64;
    let var = replicate.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let err = 2.0 * (var / reps as f64).sqrt();
    Estimate {
        value: mean,
        abs_error: err,
        target_met: true,
    }
}
