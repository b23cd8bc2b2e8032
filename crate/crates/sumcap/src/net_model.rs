//! Random network generation: spatial domains, node placement, attenuation,
//! fading and the resulting SNR/INR gain matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::seeding::derive_seed;
use crate::{Error, Result};

/// Dense row-major `k × k` matrix of link gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    k: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(k: usize) -> Self {
        Matrix { k, data: vec![0.0; k * k] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for row in &rows {
            assert_eq!(row.len(), k, "matrix rows must be square");
            data.extend_from_slice(row);
        }
        Matrix { k, data }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.k + j] = value;
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// A monotone map `[0,1] -> R`, used as a per-coordinate quantile function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuantileFn {
    /// `q(t) = t` (uniform marginal on `[0,1]`).
    Identity,
    /// `q(t) = t^exponent` with `exponent > 0`.
    Power { exponent: f64 },
    /// Piecewise-linear interpolation through `(x, q(x))` knots; `x` must be
    /// increasing and cover `[0,1]`.
    PiecewiseLinear { xs: Vec<f64>, ys: Vec<f64> },
}

impl QuantileFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            QuantileFn::Identity => t,
            QuantileFn::Power { exponent } => t.powf(*exponent),
            QuantileFn::PiecewiseLinear { xs, ys } => {
                if t <= xs[0] {
                    return ys[0];
                }
                if t >= xs[xs.len() - 1] {
                    return ys[ys.len() - 1];
                }
                let hi = xs.partition_point(|&x| x <= t);
                let (x0, x1) = (xs[hi - 1], xs[hi]);
                let (y0, y1) = (ys[hi - 1], ys[hi]);
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// Sampled monotonicity check on a fixed grid.
    fn validate(&self) -> Result<()> {
        match self {
            QuantileFn::Power { exponent } if *exponent <= 0.0 => {
                return Err(Error::Config(format!(
                    "power quantile exponent must be positive, got {exponent}"
                )));
            }
            QuantileFn::PiecewiseLinear { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 {
                    return Err(Error::Config(
                        "piecewise quantile needs matching xs/ys with at least 2 knots".into(),
                    ));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("quantile knot xs must be increasing".into()));
                }
            }
            _ => {}
        }
        const GRID: usize = 101;
        let mut prev = self.eval(0.0);
        for i in 1..GRID {
            let cur = self.eval(i as f64 / (GRID - 1) as f64);
            if cur < prev {
                return Err(Error::Config(
                    "quantile function is not nondecreasing on [0,1]".into(),
                ));
            }
            prev = cur;
        }
        if self.eval(0.0) < 0.0 {
            return Err(Error::Config("quantile functions must map into [0, L]^D".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    UnitCube,
    UnitBall,
    ProductQuantile,
}

/// Spatial region the nodes are dropped into.
///
/// `unit_cube` is `[0,1]^D`, `unit_ball` the Euclidean ball of radius 1
/// shifted to fit inside `[0,2]^D`, and `product_quantile` a product
/// distribution given by per-coordinate quantile functions (possibly distinct
/// for receivers and transmitters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub dimension: usize,
    pub volume: f64,
    pub bounding_side: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rx_quantiles: Vec<QuantileFn>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tx_quantiles: Vec<QuantileFn>,
    /// Required for `product_quantile` if separation parameters are needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_override: Option<SeparationParams>,
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

impl Domain {
    pub fn unit_cube(dimension: usize) -> Self {
        Domain {
            kind: DomainKind::UnitCube,
            dimension,
            volume: 1.0,
            bounding_side: 1.0,
            rx_quantiles: Vec::new(),
            tx_quantiles: Vec::new(),
            separation_override: None,
        }
    }

    pub fn unit_ball(dimension: usize) -> Self {
        Domain {
            kind: DomainKind::UnitBall,
            dimension,
            volume: unit_ball_volume(dimension),
            bounding_side: 2.0,
            rx_quantiles: Vec::new(),
            tx_quantiles: Vec::new(),
            separation_override: None,
        }
    }

    /// Product-quantile domain with per-coordinate marginals; `rx` and `tx`
    /// may differ. The recorded `volume`/`bounding_side` describe the bounding
    /// box of the two supports.
    pub fn product_quantile(rx: Vec<QuantileFn>, tx: Vec<QuantileFn>) -> Result<Self> {
        if rx.is_empty() || rx.len() != tx.len() {
            return Err(Error::Config(
                "product_quantile needs one rx and one tx quantile per coordinate".into(),
            ));
        }
        for q in rx.iter().chain(tx.iter()) {
            q.validate()?;
        }
        let mut volume = 1.0;
        let mut side = 0.0f64;
        for (qr, qt) in rx.iter().zip(tx.iter()) {
            let lo = qr.eval(0.0).min(qt.eval(0.0));
            let hi = qr.eval(1.0).max(qt.eval(1.0));
            if !(hi > lo) {
                return Err(Error::Config("degenerate quantile range".into()));
            }
            volume *= hi - lo;
            side = side.max(hi);
        }
        Ok(Domain {
            kind: DomainKind::ProductQuantile,
            dimension: rx.len(),
            volume,
            bounding_side: side,
            rx_quantiles: rx,
            tx_quantiles: tx,
            separation_override: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("domain dimension must be positive".into()));
        }
        if self.kind == DomainKind::ProductQuantile {
            if self.rx_quantiles.len() != self.dimension || self.tx_quantiles.len() != self.dimension
            {
                return Err(Error::Config(
                    "product_quantile needs one quantile function per coordinate and side".into(),
                ));
            }
            for q in self.rx_quantiles.iter().chain(self.tx_quantiles.iter()) {
                q.validate()?;
            }
        }
        Ok(())
    }

    pub(crate) fn sample_point<R: Rng>(&self, rng: &mut R, quantiles: &[QuantileFn]) -> Vec<f64> {
        match self.kind {
            DomainKind::UnitCube => (0..self.dimension).map(|_| rng.gen::<f64>()).collect(),
            DomainKind::UnitBall => loop {
                let p: Vec<f64> = (0..self.dimension)
                    .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                    .collect();
                if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    // shift so the ball sits inside [0,2]^D
                    return p.into_iter().map(|x| x + 1.0).collect();
                }
            },
            DomainKind::ProductQuantile => quantiles
                .iter()
                .map(|q| q.eval(rng.gen::<f64>()))
                .collect(),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self.kind {
            DomainKind::UnitCube => p.iter().all(|&x| (0.0..=1.0).contains(&x)),
            DomainKind::UnitBall => {
                p.iter().map(|&x| (x - 1.0) * (x - 1.0)).sum::<f64>() <= 1.0
            }
            DomainKind::ProductQuantile => p
                .iter()
                .zip(self.rx_quantiles.iter().zip(self.tx_quantiles.iter()))
                .all(|(&x, (qr, qt))| {
                    let lo = qr.eval(0.0).min(qt.eval(0.0));
                    let hi = qr.eval(1.0).max(qt.eval(1.0));
                    (lo..=hi).contains(&x)
                }),
        }
    }
}

/// Path-loss model `f(d) = min(P0, C_dec · d^{-alpha})`.
///
/// The near-field cap `P0` keeps the received power finite at `d = 0` while
/// preserving `f(d) <= C_dec · d^{-alpha}` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenuationModel {
    pub alpha: f64,
    pub c_dec: f64,
    #[serde(default = "default_near_field_cap")]
    pub near_field_cap: f64,
}

fn default_near_field_cap() -> f64 {
    1e6
}

impl AttenuationModel {
    pub fn new(alpha: f64, c_dec: f64) -> Self {
        AttenuationModel { alpha, c_dec, near_field_cap: default_near_field_cap() }
    }

    /// Received power at distance `d`.
    #[inline]
    pub fn value(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return self.near_field_cap;
        }
        (self.c_dec * d.powf(-self.alpha)).min(self.near_field_cap)
    }
}

/// Multiplicative fading on each link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingModel {
    /// Multiplier exactly 1 on every link.
    Deterministic,
    /// IID `Uniform(low, high)` multipliers, independent across all `(i,j)`.
    IidMultiplier { low: f64, high: f64 },
}

impl FadingModel {
    /// The built-in random fading model: `Uniform(0, 2)` (mean 1).
    pub fn uniform_default() -> Self {
        FadingModel::IidMultiplier { low: 0.0, high: 2.0 }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, FadingModel::IidMultiplier { .. })
    }

    /// Draw one multiplier.
    pub fn draw_multiplier<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            FadingModel::Deterministic => 1.0,
            FadingModel::IidMultiplier { low, high } => rng.gen::<f64>() * (high - low) + low,
        }
    }

    /// Mean of the multiplier distribution.
    pub fn mean(&self) -> f64 {
        match self {
            FadingModel::Deterministic => 1.0,
            FadingModel::IidMultiplier { low, high } => 0.5 * (low + high),
        }
    }
}

/// Spatial separation parameters: `P(d(T,R) <= s) <= c_sep · s^{d_sep}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationParams {
    pub c_sep: f64,
    pub d_sep: f64,
}

/// Everything needed to draw a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub domain: Domain,
    pub attenuation: AttenuationModel,
    pub fading: FadingModel,
    pub k: usize,
}

/// A realized network: node positions, gain matrix and the seed that made it.
///
/// Immutable after construction; `(config, seed)` regenerates it bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pub k: usize,
    pub dimension: usize,
    pub tx_positions: Vec<Vec<f64>>,
    pub rx_positions: Vec<Vec<f64>>,
    /// `gains.get(i, j)` is the received power of transmitter `i` at
    /// receiver `j` (`INR_ij`; the diagonal holds the `SNR_i`).
    pub gains: Matrix,
    pub fading_multipliers: Option<Matrix>,
    pub seed: u64,
}

impl NetworkInstance {
    #[inline]
    pub fn snr(&self, i: usize) -> f64 {
        self.gains.get(i, i)
    }

    /// JSON document with reals printed to 17 significant digits.
    pub fn to_json(&self) -> String {
        fn num(x: f64) -> String {
            format!("{x:.16e}")
        }
        fn points(ps: &[Vec<f64>]) -> String {
            let rows: Vec<String> = ps
                .iter()
                .map(|p| format!("[{}]", p.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",")))
                .collect();
            format!("[{}]", rows.join(","))
        }
        let gains: Vec<String> = self.gains.as_slice().iter().map(|&x| num(x)).collect();
        format!(
            "{{\"k\":{},\"dimension\":{},\"tx\":{},\"rx\":{},\"gains\":[{}],\"seed\":{}}}",
            self.k,
            self.dimension,
            points(&self.tx_positions),
            points(&self.rx_positions),
            gains.join(","),
            self.seed
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            k: usize,
            dimension: usize,
            tx: Vec<Vec<f64>>,
            rx: Vec<Vec<f64>>,
            gains: Vec<f64>,
            seed: u64,
        }
        let doc: Doc = serde_json::from_str(text)?;
        if doc.gains.len() != doc.k * doc.k || doc.tx.len() != doc.k || doc.rx.len() != doc.k {
            return Err(Error::Config("network document has inconsistent sizes".into()));
        }
        Ok(NetworkInstance {
            k: doc.k,
            dimension: doc.dimension,
            tx_positions: doc.tx,
            rx_positions: doc.rx,
            gains: Matrix { k: doc.k, data: doc.gains },
            fading_multipliers: None,
            seed: doc.seed,
        })
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sample only the `(tx, rx)` position lists of a network — useful when the
/// `K x K` gain matrix is not needed (e.g. occupancy studies at large `K`).
pub fn sample_positions(
    config: &NetworkConfig,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    config.domain.validate()?;
    let mut tx_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "tx-positions", 0));
    let mut rx_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, "rx-positions", 0));
    let tx: Vec<Vec<f64>> = (0..config.k)
        .map(|_| config.domain.sample_point(&mut tx_rng, &config.domain.tx_quantiles))
        .collect();
    let rx: Vec<Vec<f64>> = (0..config.k)
        .map(|_| config.domain.sample_point(&mut rx_rng, &config.domain.rx_quantiles))
        .collect();
    Ok((tx, rx))
}

/// Draw a network: `k` transmitters from `P_T`, `k` receivers from `P_R`,
/// gains via [`compute_gains`]. Deterministic given `(config, seed)`.
pub fn sample_network(config: &NetworkConfig, seed: u64) -> Result<NetworkInstance> {
    let (tx, rx) = sample_positions(config, seed)?;
    let (gains, fading) = compute_gains(
        &tx,
        &rx,
        &config.attenuation,
        &config.fading,
        derive_seed(seed, "fading", 0),
    )?;
    Ok(NetworkInstance {
        k: config.k,
        dimension: config.domain.dimension,
        tx_positions: tx,
        rx_positions: rx,
        gains,
        fading_multipliers: fading,
        seed,
    })
}

/// Gain matrix from positions: `gains[i][j] = M_ij · f(d(T_i, R_j))` with
/// `M_ij ≡ 1` under deterministic fading.
pub fn compute_gains(
    tx: &[Vec<f64>],
    rx: &[Vec<f64>],
    attenuation: &AttenuationModel,
    fading: &FadingModel,
    seed: u64,
) -> Result<(Matrix, Option<Matrix>)> {
    if tx.len() != rx.len() {
        return Err(Error::Config("tx/rx position lists must have equal length".into()));
    }
    let k = tx.len();
    let mut gains = Matrix::zeros(k);
    let multipliers = match fading {
        FadingModel::Deterministic => None,
        FadingModel::IidMultiplier { low, high } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut m = Matrix::zeros(k);
            for i in 0..k {
                for j in 0..k {
                    m.set(i, j, rng.gen::<f64>() * (high - low) + low);
                }
            }
            Some(m)
        }
    };
    for i in 0..k {
        for j in 0..k {
            let base = attenuation.value(euclidean(&tx[i], &rx[j]));
            let mult = multipliers.as_ref().map_or(1.0, |m| m.get(i, j));
            gains.set(i, j, mult * base);
        }
    }
    Ok((gains, multipliers))
}

/// Separation parameters for the built-in uniform domains.
///
/// A density bounded by `C = 1/V` gives `c_sep = C · V_D` and `d_sep = D`,
/// where `V_D` is the unit-ball volume. Product-quantile domains must supply
/// an override.
pub fn derive_separation_params(domain: &Domain) -> Result<SeparationParams> {
    match domain.kind {
        DomainKind::UnitCube | DomainKind::UnitBall => {
            let density_bound = 1.0 / domain.volume;
            Ok(SeparationParams {
                c_sep: density_bound * unit_ball_volume(domain.dimension),
                d_sep: domain.dimension as f64,
            })
        }
        DomainKind::ProductQuantile => domain.separation_override.ok_or_else(|| {
            Error::UnsupportedDomain(
                "separation parameters for product_quantile domains must be supplied".into(),
            )
        }),
    }
}
