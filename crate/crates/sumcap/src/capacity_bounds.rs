//! Closed-form per-link rates and the elementary lower/upper bound formulas
//! shared by both matching engines.
//!
//! All rates and capacities are in bits per channel use (log base 2). The
//! analytic tail bounds keep their thresholds in nats, matching the natural
//! exponentials in their derivation; see [`tail_bound`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::net_model::{AttenuationModel, Matrix, NetworkInstance, SeparationParams};
use crate::{Error, Result};

/// Per-link rate `S_ij = ½·log₂(1 + 2·INR_ij)` for every link of a network.
#[derive(Debug, Clone)]
pub struct LinkRates {
    pub s: Matrix,
}

impl LinkRates {
    pub fn from_network(net: &NetworkInstance) -> Self {
        let k = net.k;
        let mut s = Matrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                s.set(i, j, 0.5 * (1.0 + 2.0 * net.gains.get(i, j)).log2());
            }
        }
        LinkRates { s }
    }

    /// Diagonal view: the direct-link rates `S_ii`.
    pub fn direct(&self) -> Vec<f64> {
        (0..self.s.size()).map(|i| self.s.get(i, i)).collect()
    }
}

/// `½·log₂(1 + 2·inr)` in bits per use.
pub fn per_link_rate(inr: f64) -> Result<f64> {
    if inr < 0.0 {
        return Err(Error::InvalidArgument(format!("negative gain {inr}")));
    }
    Ok(0.5 * (1.0 + 2.0 * inr).log2())
}

/// Which assembly produced a [`BoundsReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    /// Interference-alignment achievability; the report's `lower` is the
    /// bound and `upper` is unconstrained (+inf, serialized as null).
    IaLower,
    Box,
    SnrCategories,
    SingleUser,
}

/// One summand of a bound: a matched pair or a singleton link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    /// One index (singleton) or two (matched pair).
    pub members: Vec<usize>,
    pub value: f64,
}

/// A sum-capacity bound with its per-pair/per-link breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub lower: f64,
    #[serde(serialize_with = "serialize_maybe_infinite")]
    pub upper: f64,
    pub method: BoundMethod,
    pub parameters: BTreeMap<String, f64>,
    /// Sorted by members; sums to `upper` (to `lower` for `IaLower`).
    pub contributions: Vec<Contribution>,
    /// The matching used, as `(i, j)` network index pairs.
    pub certificate: Option<Vec<(usize, usize)>>,
}

fn serialize_maybe_infinite<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

impl BoundsReport {
    /// The principal value: `lower` for the achievability report, `upper`
    /// otherwise.
    pub fn bound(&self) -> f64 {
        match self.method {
            BoundMethod::IaLower => self.lower,
            _ => self.upper,
        }
    }

    pub fn sort_contributions(&mut self) {
        self.contributions
            .sort_by(|a, b| a.members.cmp(&b.members));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Interference-alignment achievable lower bound `Σ_i ½·log₂(1 + 2·SNR_i)`.
pub fn lower_bound_ia(net: &NetworkInstance) -> BoundsReport {
    let contributions: Vec<Contribution> = (0..net.k)
        .map(|i| Contribution {
            members: vec![i],
            value: per_link_rate(net.snr(i)).expect("SNR is nonnegative"),
        })
        .collect();
    let lower = contributions.iter().map(|c| c.value).sum();
    BoundsReport {
        lower,
        upper: f64::INFINITY,
        method: BoundMethod::IaLower,
        parameters: BTreeMap::new(),
        contributions,
        certificate: None,
    }
}

/// Two-user bottleneck bound: if `INR_ji >= SNR_j` then
/// `R_i + R_j <= log₂(1 + INR_ji + SNR_i)`.
///
/// Errors when the hypothesis fails; the bound is simply not valid then and
/// must not be returned.
pub fn two_user_bottleneck_bound(snr_i: f64, snr_j: f64, inr_ji: f64) -> Result<f64> {
    if inr_ji < snr_j {
        return Err(Error::HypothesisNotMet { snr_j, inr_ji });
    }
    Ok((1.0 + inr_ji + snr_i).log2())
}

/// Single-user capacity bound `log₂(1 + snr)`.
pub fn single_user_bound(snr: f64) -> f64 {
    (1.0 + snr).log2()
}

/// Does the cross-link `(j -> i)` put the two-user channel within `epsilon`
/// bits of the exact bottleneck sum capacity `log₂(1 + 2·SNR_i)`?
pub fn is_epsilon_bottleneck(snr_i: f64, snr_j: f64, inr_ji: f64, epsilon: f64) -> bool {
    inr_ji >= snr_j
        && (1.0 + inr_ji + snr_i).log2() <= (1.0 + 2.0 * snr_i).log2() + epsilon
}

/// Analytic bound on `P(S_ii >= u)` for deterministic fading:
/// `c_sep · (3·C_dec)^{d_sep/alpha} · exp(-2·u·d_sep/alpha)`.
///
/// The threshold `u >= 1` is in nats (`S_ii = ½·ln(1 + 2·SNR)` here); callers
/// working in bits convert with `u_nats = u_bits · ln 2`. The chain is
/// `P(S >= u) <= P(SNR >= e^{2u}/3) <= P(d <= (3·C_dec)^{1/alpha} e^{-2u/alpha})`
/// followed by the spatial separation inequality.
pub fn tail_bound(u_nats: f64, sep: &SeparationParams, atten: &AttenuationModel) -> f64 {
    let ratio = sep.d_sep / atten.alpha;
    sep.c_sep * (3.0 * atten.c_dec).powf(ratio) * (-2.0 * u_nats * ratio).exp()
}

/// Analytic tail bound under random fading with multiplier mean `E[M]`:
/// `√3·E[M]·e^{-u} + c_sep·(√3·C_dec)^{d_sep/alpha}·e^{-u·d_sep/alpha}`,
/// `u` in nats.
pub fn fading_tail_bound(
    u_nats: f64,
    mean_multiplier: f64,
    sep: &SeparationParams,
    atten: &AttenuationModel,
) -> f64 {
    let sqrt3 = 3.0f64.sqrt();
    let ratio = sep.d_sep / atten.alpha;
    sqrt3 * mean_multiplier * (-u_nats).exp()
        + sep.c_sep * (sqrt3 * atten.c_dec).powf(ratio) * (-u_nats * ratio).exp()
}
