//! Probabilistic guarantees for near-perfect matchings in random bipartite
//! graphs: the Walkup counting bound for Erdős–Rényi bipartite graphs, and a
//! trim-then-match argument for threshold graphs where an edge `(i, j)` is
//! present exactly when `U_i <= W_ij <= V_j`.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use statrs::function::gamma::ln_gamma;

use crate::net_model::Matrix;
use crate::snr_matching::{max_matching, BipartiteGraph};
use crate::{derive_seed, Error, Result};

fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn logsumexp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Walkup's bound on the probability that a random `N x N` bipartite graph
/// with independent edge probability `p` has **no** perfect matching:
/// `2 · Σ_{k=1}^{⌊(N+1)/2⌋} C(N,k) · C(N,k-1) · (1-p)^{k(N-k+1)}`.
///
/// Evaluated in log space so it stays finite for large `N`.
pub fn walkup_no_matching_bound(n: u64, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    if n == 0 {
        return 0.0;
    }
    let ln_q = (1.0 - p).ln(); // -inf at p = 1 is fine: terms vanish
    let terms: Vec<f64> = (1..=(n + 1) / 2)
        .map(|k| {
            ln_choose(n, k) + ln_choose(n, k - 1) + (k * (n - k + 1)) as f64 * ln_q
        })
        .collect();
    2.0 * logsumexp(&terms).exp()
}

/// Closed-form relaxation of the Walkup bound:
/// `2·√N·N^{2√N}·e^{-p(N+1)/2} + 2^{2N}·e^{-p·N^{3/2}/2}`.
pub fn walkup_split_bound(n: u64, p: f64) -> f64 {
    let nf = n as f64;
    let s = nf.sqrt();
    2.0 * s * nf.powf(2.0 * s) * (-p * (nf + 1.0) / 2.0).exp()
        + (2.0 * nf * 2.0f64.ln() - p * nf * s / 2.0).exp()
}

/// Random threshold bipartite model on `n + n` vertices: left weight `U_i`,
/// right weight `V_j`, edge weight `W_ij`, all i.i.d. Uniform(0, 1); the edge
/// `(i, j)` exists iff `U_i <= W_ij <= V_j`.
#[derive(Debug, Clone)]
pub struct ThresholdBipartiteSample {
    pub n: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Matrix,
}

pub fn sample_threshold_bipartite(n: usize, seed: u64) -> ThresholdBipartiteSample {
    let unit = Uniform::new(0.0f64, 1.0);
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "threshold-uv", 0));
    let u: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
    let v: Vec<f64> = (0..n).map(|_| unit.sample(&mut rng)).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "threshold-w", 0));
    let mut w = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            w.set(i, j, unit.sample(&mut rng));
        }
    }
    ThresholdBipartiteSample { n, u, v, w }
}

impl ThresholdBipartiteSample {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.u[i] <= self.w.get(i, j) && self.w.get(i, j) <= self.v[j]
    }
}

/// Vertices kept after trimming the threshold extremes.
#[derive(Debug, Clone)]
pub struct TrimReport {
    /// `⌈3·n^gamma⌉`, removed from each side.
    pub trim_count: usize,
    /// Left vertices kept (the `n - trim_count` smallest `U_i`).
    pub kept_left: Vec<usize>,
    /// Right vertices kept (the `n - trim_count` largest `V_j`).
    pub kept_right: Vec<usize>,
}

/// Drop the `⌈3·n^gamma⌉` left vertices with the largest thresholds `U_i` and
/// as many right vertices with the smallest thresholds `V_j`. Requires
/// `gamma >= 2/3` and a trim small enough to leave somebody behind.
pub fn trim_extremes(sample: &ThresholdBipartiteSample, gamma: f64) -> Result<TrimReport> {
    if gamma < 2.0 / 3.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma = {gamma} is below the 2/3 needed for the trim argument"
        )));
    }
    let n = sample.n;
    let trim_count = (3.0 * (n as f64).powf(gamma)).ceil() as usize;
    if trim_count >= n {
        return Err(Error::InvalidArgument(format!(
            "trim of {trim_count} vertices exhausts a side of size {n}"
        )));
    }
    let mut by_u: Vec<usize> = (0..n).collect();
    by_u.sort_by(|&a, &b| sample.u[a].total_cmp(&sample.u[b]));
    let mut kept_left = by_u[..n - trim_count].to_vec();
    kept_left.sort_unstable();

    let mut by_v: Vec<usize> = (0..n).collect();
    by_v.sort_by(|&a, &b| sample.v[b].total_cmp(&sample.v[a]));
    let mut kept_right = by_v[..n - trim_count].to_vec();
    kept_right.sort_unstable();

    Ok(TrimReport { trim_count, kept_left, kept_right })
}

/// One-sample Dvoretzky–Kiefer–Wolfowitz statistic against Uniform(0, 1):
/// `max_i max(x_(i) - (i-1)/n, i/n - x_(i))` over the sorted sample.
pub fn dkw_statistic(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let below = x - i as f64 / n;
            let above = (i + 1) as f64 / n - x;
            below.max(above)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct DeficiencyReport {
    pub n: usize,
    pub trim_count: usize,
    /// Left vertices of the trimmed graph left uncovered by a maximum
    /// matching.
    pub deficiency_after_trim: usize,
    /// Uncovered vertices of the original graph chargeable to the argument:
    /// the deficiency plus both trimmed sides.
    pub total_unmatched: usize,
}

/// Trim the extremes, then measure how far the remaining threshold graph is
/// from a perfect matching.
pub fn matching_deficiency(sample: &ThresholdBipartiteSample, gamma: f64) -> Result<DeficiencyReport> {
    let trim = trim_extremes(sample, gamma)?;
    let mut graph = BipartiteGraph::new(trim.kept_left.len(), trim.kept_right.len());
    for (a, &i) in trim.kept_left.iter().enumerate() {
        for (b, &j) in trim.kept_right.iter().enumerate() {
            if sample.has_edge(i, j) {
                graph.add_edge(a, b);
            }
        }
    }
    let matched = max_matching(&graph).size();
    let deficiency_after_trim = trim.kept_left.len() - matched;
    Ok(DeficiencyReport {
        n: sample.n,
        trim_count: trim.trim_count,
        deficiency_after_trim,
        total_unmatched: deficiency_after_trim + 2 * trim.trim_count,
    })
}
