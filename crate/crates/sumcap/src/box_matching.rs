//! Geometric upper bound from a grid partition of the joint TX--RX domain.
//!
//! Each link `i` is a point `(R_i, T_i)` in `D × D`. A grid of spacing `1/M`
//! cuts the joint domain into boxes labelled by integer corners `(u, v)`
//! (receiver cube `u`, transmitter cube `v`). Boxes on the diagonal in any
//! coordinate form the *spine*; boxes whose pairing partner `(u-e, v+e)` is
//! unavailable are *edge*; the rest pair up into *body* representative/partner
//! couples. Links in paired boxes can be matched into two-user bottleneck
//! channels, bounding their rate sum; everything else pays the single-user
//! bound. The total is `I_M + J_M`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::capacity_bounds::{single_user_bound, two_user_bottleneck_bound};
use crate::net_model::{AttenuationModel, Domain, DomainKind, NetworkInstance};
use crate::snr_matching::{max_matching, BipartiteGraph};
use crate::{Error, Result};

/// Grid box in the joint domain: receiver cube `u`, transmitter cube `v`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoxIndex {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

impl BoxIndex {
    pub fn new(u: Vec<i64>, v: Vec<i64>) -> Self {
        BoxIndex { u, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxLabel {
    Spine,
    Edge,
    BodyRepresentative,
    BodyPartner,
}

/// Grid partition with spine/edge/body labels and the box -> links map.
#[derive(Debug, Clone)]
pub struct BoxPartition {
    pub m: u32,
    pub dimension: usize,
    /// Occupied boxes only.
    pub boxes: BTreeMap<BoxIndex, Vec<usize>>,
    /// Labels for every grid box intersecting the joint domain.
    pub labels: BTreeMap<BoxIndex, BoxLabel>,
    /// BodyRepresentative -> BodyPartner.
    pub pairing: BTreeMap<BoxIndex, BoxIndex>,
}

/// Orthant vector `e` with `e^(l) = sign(v^(l) - u^(l))`.
pub fn orthant_vector(u: &[i64], v: &[i64]) -> Vec<i64> {
    u.iter().zip(v).map(|(&a, &b)| (b - a).signum()).collect()
}

fn partner_of(idx: &BoxIndex, e: &[i64]) -> BoxIndex {
    BoxIndex {
        u: idx.u.iter().zip(e).map(|(&a, &x)| a - x).collect(),
        v: idx.v.iter().zip(e).map(|(&a, &x)| a + x).collect(),
    }
}

/// Does the point-space cell `[c/m, (c+1)/m)^D` lie entirely inside the domain?
fn cell_inside(domain: &Domain, c: &[i64], m: u32) -> bool {
    let m = i64::from(m);
    match domain.kind {
        // cells of the aligned grid are inside iff their index is in range;
        // the same holds in rank space for quantile domains
        DomainKind::UnitCube | DomainKind::ProductQuantile => {
            c.iter().all(|&x| (0..m).contains(&x))
        }
        DomainKind::UnitBall => {
            // farthest corner from the centre (1,...,1) must be within radius 1
            let mf = m as f64;
            let r2: f64 = c
                .iter()
                .map(|&x| {
                    let lo = x as f64 / mf - 1.0;
                    let hi = (x + 1) as f64 / mf - 1.0;
                    lo.abs().max(hi.abs()).powi(2)
                })
                .sum();
            r2 <= 1.0
        }
    }
}

/// Does the cell intersect the domain at all?
fn cell_intersects(domain: &Domain, c: &[i64], m: u32) -> bool {
    let m = i64::from(m);
    match domain.kind {
        DomainKind::UnitCube | DomainKind::ProductQuantile => {
            c.iter().all(|&x| (0..m).contains(&x))
        }
        DomainKind::UnitBall => {
            let mf = m as f64;
            let r2: f64 = c
                .iter()
                .map(|&x| {
                    let lo = x as f64 / mf - 1.0;
                    let hi = (x + 1) as f64 / mf - 1.0;
                    // nearest point of [lo, hi] to 0
                    if lo > 0.0 {
                        lo * lo
                    } else if hi < 0.0 {
                        hi * hi
                    } else {
                        0.0
                    }
                })
                .sum();
            r2 < 1.0
        }
    }
}

fn box_inside(domain: &Domain, idx: &BoxIndex, m: u32) -> bool {
    cell_inside(domain, &idx.u, m) && cell_inside(domain, &idx.v, m)
}

fn box_intersects(domain: &Domain, idx: &BoxIndex, m: u32) -> bool {
    cell_intersects(domain, &idx.u, m) && cell_intersects(domain, &idx.v, m)
}

/// Number of grid cells per axis covering the domain.
fn cells_per_axis(domain: &Domain, m: u32) -> i64 {
    match domain.kind {
        DomainKind::UnitCube | DomainKind::ProductQuantile => i64::from(m),
        DomainKind::UnitBall => (domain.bounding_side * f64::from(m)).ceil() as i64,
    }
}

/// Map one coordinate to its cell index.
fn coordinate_cell(domain: &Domain, x: f64, axis: usize, receiver: bool, m: u32) -> i64 {
    match domain.kind {
        DomainKind::UnitCube | DomainKind::UnitBall => (x * f64::from(m)).floor() as i64,
        DomainKind::ProductQuantile => {
            // rank-space bucket: largest k with q(k/m) <= x
            let q = if receiver {
                &domain.rx_quantiles[axis]
            } else {
                &domain.tx_quantiles[axis]
            };
            let m = i64::from(m);
            let mut k = 0;
            for cand in 1..m {
                if q.eval(cand as f64 / m as f64) <= x {
                    k = cand;
                } else {
                    break;
                }
            }
            k
        }
    }
}

/// Place every link `(R_i, T_i)` into its half-open grid box. Labels are
/// filled by [`classify_boxes`].
pub fn assign_boxes(net: &NetworkInstance, domain: &Domain, m: u32) -> BoxPartition {
    assign_boxes_points(&net.rx_positions, &net.tx_positions, domain, m)
}

/// Position-only variant of [`assign_boxes`] (no gain matrix required).
pub fn assign_boxes_points(
    rx: &[Vec<f64>],
    tx: &[Vec<f64>],
    domain: &Domain,
    m: u32,
) -> BoxPartition {
    assert!(m >= 1, "grid resolution must be at least 1");
    let dimension = domain.dimension;
    let mut boxes: BTreeMap<BoxIndex, Vec<usize>> = BTreeMap::new();
    for i in 0..rx.len() {
        let u = (0..dimension)
            .map(|l| coordinate_cell(domain, rx[i][l], l, true, m))
            .collect();
        let v = (0..dimension)
            .map(|l| coordinate_cell(domain, tx[i][l], l, false, m))
            .collect();
        boxes.entry(BoxIndex::new(u, v)).or_default().push(i);
    }
    BoxPartition { m, dimension, boxes, labels: BTreeMap::new(), pairing: BTreeMap::new() }
}

/// Classify every grid box intersecting the joint domain.
///
/// Spine: some orthant coordinate is zero. Boundary boxes (region not fully
/// inside `D × D`) become Edge. The rest are processed greedily in ascending
/// projection `(v - u)·e` (lexicographic tie-break): a box whose partner
/// `(u-e, v+e)` is present and still unlabelled becomes a
/// `BodyRepresentative` with that partner; otherwise it becomes Edge.
pub fn classify_grid(
    domain: &Domain,
    dimension: usize,
    m: u32,
) -> (BTreeMap<BoxIndex, BoxLabel>, BTreeMap<BoxIndex, BoxIndex>) {
    let side = cells_per_axis(domain, m);
    let total_axes = 2 * dimension;

    // enumerate all (u, v) index tuples intersecting the joint domain
    let mut indices: Vec<BoxIndex> = Vec::new();
    let mut counter = vec![0i64; total_axes];
    'outer: loop {
        let idx = BoxIndex::new(
            counter[..dimension].to_vec(),
            counter[dimension..].to_vec(),
        );
        if box_intersects(domain, &idx, m) {
            indices.push(idx);
        }
        for axis in (0..total_axes).rev() {
            counter[axis] += 1;
            if counter[axis] < side {
                continue 'outer;
            }
            counter[axis] = 0;
        }
        break;
    }

    let mut labels: BTreeMap<BoxIndex, BoxLabel> = BTreeMap::new();
    let mut pairing = BTreeMap::new();
    let mut candidates: Vec<(i64, BoxIndex, Vec<i64>)> = Vec::new();
    for idx in indices {
        let e = orthant_vector(&idx.u, &idx.v);
        if e.contains(&0) {
            labels.insert(idx, BoxLabel::Spine);
        } else if !box_inside(domain, &idx, m) {
            labels.insert(idx, BoxLabel::Edge);
        } else {
            let projection: i64 = idx
                .v
                .iter()
                .zip(&idx.u)
                .zip(&e)
                .map(|((&v, &u), &x)| (v - u) * x)
                .sum();
            candidates.push((projection, idx, e));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    for (_, idx, e) in candidates {
        if labels.contains_key(&idx) {
            continue;
        }
        let partner = partner_of(&idx, &e);
        let eligible = box_intersects(domain, &partner, m)
            && box_inside(domain, &partner, m)
            && !labels.contains_key(&partner);
        if eligible {
            labels.insert(idx.clone(), BoxLabel::BodyRepresentative);
            labels.insert(partner.clone(), BoxLabel::BodyPartner);
            pairing.insert(idx, partner);
        } else {
            labels.insert(idx, BoxLabel::Edge);
        }
    }
    (labels, pairing)
}

/// Fill labels and pairing on an assigned partition.
pub fn classify_boxes(mut partition: BoxPartition, domain: &Domain) -> BoxPartition {
    let (labels, pairing) = classify_grid(domain, partition.dimension, partition.m);
    partition.labels = labels;
    partition.pairing = pairing;
    partition
}

/// Minimum Euclidean distance between a transmitter in cube `v` and a
/// receiver in cube `u` of a grid with spacing `1/m`.
pub fn box_min_distance(u: &[i64], v: &[i64], m: u32) -> f64 {
    let mf = f64::from(m);
    u.iter()
        .zip(v)
        .map(|(&a, &b)| {
            let gap = ((a - b).abs() - 1).max(0) as f64 / mf;
            gap * gap
        })
        .sum::<f64>()
        .sqrt()
}

/// Minimum TX--RX distance within a box, domain-aware (quantile domains use
/// the real-space rectangles behind the rank indices).
fn min_link_distance(domain: &Domain, idx: &BoxIndex, m: u32) -> f64 {
    match domain.kind {
        DomainKind::UnitCube | DomainKind::UnitBall => box_min_distance(&idx.u, &idx.v, m),
        DomainKind::ProductQuantile => {
            let mf = f64::from(m);
            idx.u
                .iter()
                .zip(&idx.v)
                .enumerate()
                .map(|(l, (&uc, &vc))| {
                    let qr = &domain.rx_quantiles[l];
                    let qt = &domain.tx_quantiles[l];
                    let (r_lo, r_hi) = (qr.eval(uc as f64 / mf), qr.eval((uc + 1) as f64 / mf));
                    let (t_lo, t_hi) = (qt.eval(vc as f64 / mf), qt.eval((vc + 1) as f64 / mf));
                    let gap = (t_lo - r_hi).max(r_lo - t_hi).max(0.0);
                    gap * gap
                })
                .sum::<f64>()
                .sqrt()
        }
    }
}

/// Matched (`i_m`) and unmatched (`j_m`) contributions to the upper bound.
#[derive(Debug, Clone)]
pub struct BoxBoundReport {
    pub i_m: f64,
    pub j_m: f64,
    /// `(link in representative box, link in partner box, pair bound)`.
    pub matched_pairs: Vec<(usize, usize, f64)>,
    pub unmatched_links: Vec<usize>,
    pub m: u32,
}

impl BoxBoundReport {
    pub fn total(&self) -> f64 {
        self.i_m + self.j_m
    }
}

/// Match links across paired boxes and assemble `I_M + J_M`.
///
/// Deterministic fading: `min(N, N')` links are drawn at random (seeded) from
/// each side and paired one-to-one; each pair `(i, j)` is charged the tighter
/// of the box-level bound `log₂(1 + 2·f(d(u,v)))` and the exact two-user
/// bound. Random fading: a pair is admissible only when
/// `M_jj <= M_ji <= M_ii`, realized as a maximum bipartite matching per box
/// pair; admissible pairs are charged the two-user bound. Unmatched links pay
/// the single-user bound.
pub fn pair_and_bound(
    partition: &BoxPartition,
    net: &NetworkInstance,
    domain: &Domain,
    attenuation: &AttenuationModel,
    seed: u64,
) -> BoxBoundReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut in_pair = vec![false; net.k];
    let mut matched_pairs = Vec::new();
    let mut i_m = 0.0;

    let empty: Vec<usize> = Vec::new();
    for (rep, partner) in &partition.pairing {
        let side_i = partition.boxes.get(rep).unwrap_or(&empty);
        let side_j = partition.boxes.get(partner).unwrap_or(&empty);
        if side_i.is_empty() || side_j.is_empty() {
            continue;
        }
        let pairs: Vec<(usize, usize)> = match &net.fading_multipliers {
            None => {
                let mut a = side_i.clone();
                let mut b = side_j.clone();
                a.shuffle(&mut rng);
                b.shuffle(&mut rng);
                let c = a.len().min(b.len());
                a.truncate(c);
                b.truncate(c);
                a.into_iter().zip(b).collect()
            }
            Some(mult) => {
                // fading edge rule: M_jj <= M_ji <= M_ii
                let mut graph = BipartiteGraph::new(side_i.len(), side_j.len());
                for (l, &i) in side_i.iter().enumerate() {
                    for (r, &j) in side_j.iter().enumerate() {
                        let m_ji = mult.get(j, i);
                        if mult.get(j, j) <= m_ji && m_ji <= mult.get(i, i) {
                            graph.add_edge(l, r);
                        }
                    }
                }
                max_matching(&graph)
                    .pairs
                    .into_iter()
                    .map(|(l, r)| (side_i[l], side_j[r]))
                    .collect()
            }
        };

        let box_bound = (1.0 + 2.0 * attenuation.value(min_link_distance(domain, rep, partition.m))).log2();
        for (i, j) in pairs {
            let two_user = two_user_bottleneck_bound(net.snr(i), net.snr(j), net.gains.get(j, i))
                .expect("box geometry (and the fading edge rule) guarantee INR_ji >= SNR_j");
            let value = if net.fading_multipliers.is_some() {
                two_user
            } else {
                box_bound.min(two_user)
            };
            i_m += value;
            matched_pairs.push((i, j, value));
            in_pair[i] = true;
            in_pair[j] = true;
        }
    }

    let unmatched_links: Vec<usize> = (0..net.k).filter(|&i| !in_pair[i]).collect();
    let j_m = unmatched_links.iter().map(|&i| single_user_bound(net.snr(i))).sum();
    BoxBoundReport { i_m, j_m, matched_pairs, unmatched_links, m: partition.m }
}

/// Occupancy concentration report for the unit cube.
#[derive(Debug, Clone)]
pub struct OccupancyStats {
    pub max_abs_deviation: f64,
    /// `K^eta`.
    pub threshold: f64,
    /// `K^{1 - 2·eta}`.
    pub chebyshev_bound: f64,
    pub box_probabilities: BTreeMap<BoxIndex, f64>,
}

/// Max deviation of per-box counts from their binomial means `K·p_{u,v}`.
/// Unit-cube domains only (closed-form box probabilities).
pub fn occupancy_stats(
    partition: &BoxPartition,
    net: &NetworkInstance,
    domain: &Domain,
    eta: f64,
) -> Result<OccupancyStats> {
    occupancy_stats_with_k(partition, net.k, domain, eta)
}

/// [`occupancy_stats`] given only the link count.
pub fn occupancy_stats_with_k(
    partition: &BoxPartition,
    link_count: usize,
    domain: &Domain,
    eta: f64,
) -> Result<OccupancyStats> {
    if domain.kind != DomainKind::UnitCube {
        return Err(Error::UnsupportedDomain(
            "occupancy statistics need closed-form box probabilities (unit cube)".into(),
        ));
    }
    let m = f64::from(partition.m);
    let axes = 2 * partition.dimension;
    // per-axis overlap of [c/m, (c+1)/m) with [0,1] is 1/m for in-range cells
    let per_box = (1.0 / m).powi(axes as i32);
    let k = link_count as f64;
    let mut max_abs_deviation = 0.0f64;
    let mut box_probabilities = BTreeMap::new();
    for (idx, links) in &partition.boxes {
        let dev = (links.len() as f64 - k * per_box).abs();
        max_abs_deviation = max_abs_deviation.max(dev);
        box_probabilities.insert(idx.clone(), per_box);
    }
    Ok(OccupancyStats {
        max_abs_deviation,
        threshold: k.powf(eta),
        chebyshev_bound: k.powf(1.0 - 2.0 * eta),
        box_probabilities,
    })
}

/// Grid-limit value of the matched-pair sum, per link:
/// `Σ over representative boxes of p_{u,v} · log₂(1 + 2·f(d(u,v)))` with
/// `p_{u,v} = 1/(V²·M^{2D})`. Converges to `E[S_ii]` as `m` grows.
pub fn analytic_matched_sum_per_link(
    domain: &Domain,
    dimension: usize,
    attenuation: &AttenuationModel,
    m: u32,
) -> f64 {
    let (_, pairing) = classify_grid(domain, dimension, m);
    let p = 1.0
        / (domain.volume * domain.volume * f64::from(m).powi(2 * dimension as i32));
    pairing
        .keys()
        .map(|rep| p * (1.0 + 2.0 * attenuation.value(min_link_distance(domain, rep, m))).log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::{
        sample_network, AttenuationModel, Domain, FadingModel, Matrix, NetworkConfig,
        NetworkInstance,
    };

    fn net_1d(positions: &[(f64, f64)]) -> NetworkInstance {
        // (rx, tx) pairs on the unit interval
        let k = positions.len();
        let tx: Vec<Vec<f64>> = positions.iter().map(|&(_, t)| vec![t]).collect();
        let rx: Vec<Vec<f64>> = positions.iter().map(|&(r, _)| vec![r]).collect();
        let atten = AttenuationModel::new(1.0, 1.0);
        let (gains, _) =
            crate::net_model::compute_gains(&tx, &rx, &atten, &FadingModel::Deterministic, 0)
                .unwrap();
        NetworkInstance {
            k,
            dimension: 1,
            tx_positions: tx,
            rx_positions: rx,
            gains,
            fading_multipliers: None,
            seed: 0,
        }
    }

    #[test]
    fn orthant_vectors() {
        assert_eq!(orthant_vector(&[1, 2], &[3, 2]), vec![1, 0]);
        assert_eq!(orthant_vector(&[2, 2], &[2, 2]), vec![0, 0]);
        assert_eq!(orthant_vector(&[5, 0], &[0, 5]), vec![-1, 1]);
    }

    #[test]
    fn box_assignment_floor_rule() {
        let domain = Domain::unit_cube(2);
        let mut net = sample_network(
            &NetworkConfig {
                domain: domain.clone(),
                attenuation: AttenuationModel::new(4.0, 1.0),
                fading: FadingModel::Deterministic,
                k: 1,
            },
            0,
        )
        .unwrap();
        net.rx_positions[0] = vec![0.3, 0.9];
        net.tx_positions[0] = vec![0.1, 0.2];
        let p = assign_boxes(&net, &domain, 4);
        let (idx, links) = p.boxes.iter().next().unwrap();
        assert_eq!(idx, &BoxIndex::new(vec![1, 3], vec![0, 0]));
        assert_eq!(links, &vec![0]);

        // boundary point goes to the upper half-open box
        net.rx_positions[0] = vec![0.25, 0.0];
        let p = assign_boxes(&net, &domain, 4);
        assert_eq!(p.boxes.keys().next().unwrap().u[0], 1);

        // m = 1: everything in the single box
        let p = assign_boxes(&net, &domain, 1);
        assert_eq!(p.boxes.keys().next().unwrap(), &BoxIndex::new(vec![0, 0], vec![0, 0]));
    }

    #[test]
    fn box_min_distances() {
        assert_eq!(box_min_distance(&[2], &[2], 4), 0.0);
        assert_eq!(box_min_distance(&[1], &[3], 4), 0.25);
        let d = box_min_distance(&[0, 0], &[2, 3], 4);
        assert!((d - 5.0f64.sqrt() / 4.0).abs() < 1e-12);
    }

    fn labels_1d(m: u32) -> (BTreeMap<BoxIndex, BoxLabel>, BTreeMap<BoxIndex, BoxIndex>) {
        classify_grid(&Domain::unit_cube(1), 1, m)
    }

    #[test]
    fn interval_m6_classification() {
        let (labels, pairing) = labels_1d(6);
        let get = |u: i64, v: i64| labels[&BoxIndex::new(vec![u], vec![v])];
        for i in 0..6 {
            assert_eq!(get(i, i), BoxLabel::Spine);
        }
        let reps = [(2, 1), (3, 2), (4, 3), (3, 1), (4, 2)];
        let partners = [(3, 0), (4, 1), (5, 2), (4, 0), (5, 1)];
        for &(u, v) in &reps {
            assert_eq!(get(u, v), BoxLabel::BodyRepresentative, "({u},{v})");
        }
        for &(u, v) in &partners {
            assert_eq!(get(u, v), BoxLabel::BodyPartner, "({u},{v})");
        }
        for &(u, v) in &[(1, 0), (2, 0), (5, 0), (5, 3), (5, 4)] {
            assert_eq!(get(u, v), BoxLabel::Edge, "({u},{v})");
        }
        for (&(ru, rv), &(pu, pv)) in reps.iter().zip(&partners) {
            assert_eq!(
                pairing[&BoxIndex::new(vec![ru], vec![rv])],
                BoxIndex::new(vec![pu], vec![pv])
            );
        }
    }

    #[test]
    fn interval_m2_has_no_body() {
        let (labels, pairing) = labels_1d(2);
        assert!(pairing.is_empty());
        assert_eq!(labels[&BoxIndex::new(vec![1], vec![0])], BoxLabel::Edge);
        assert_eq!(labels[&BoxIndex::new(vec![0], vec![1])], BoxLabel::Edge);
    }

    #[test]
    fn classification_partitions_labels() {
        // representatives and partners are distinct, pairing injective,
        // every representative's orthant vector has no zero component
        let (labels, pairing) = classify_grid(&Domain::unit_cube(2), 2, 5);
        let mut seen = std::collections::BTreeSet::new();
        for (rep, partner) in &pairing {
            assert_ne!(rep, partner);
            assert!(seen.insert(partner.clone()), "pairing must be injective");
            assert_eq!(labels[rep], BoxLabel::BodyRepresentative);
            assert_eq!(labels[partner], BoxLabel::BodyPartner);
            assert!(!orthant_vector(&rep.u, &rep.v).contains(&0));
        }
        // body boxes cover exactly the representative/partner label set
        let body = labels
            .values()
            .filter(|l| matches!(l, BoxLabel::BodyRepresentative | BoxLabel::BodyPartner))
            .count();
        assert_eq!(body, 2 * pairing.len());
    }

    #[test]
    fn partition_is_complete() {
        let domain = Domain::unit_cube(2);
        let net = sample_network(
            &NetworkConfig {
                domain: domain.clone(),
                attenuation: AttenuationModel::new(4.0, 1.0),
                fading: FadingModel::Deterministic,
                k: 200,
            },
            13,
        )
        .unwrap();
        let p = assign_boxes(&net, &domain, 5);
        let total: usize = p.boxes.values().map(Vec::len).sum();
        assert_eq!(total, 200);
        let mut seen = vec![false; 200];
        for links in p.boxes.values() {
            for &i in links {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
    }

    #[test]
    fn forced_matching_of_two_links() {
        // one link in representative (2,1), one in partner (3,0), m = 6
        let net = net_1d(&[(0.4, 0.25), (0.55, 0.05)]);
        let domain = Domain::unit_cube(1);
        let p = classify_boxes(assign_boxes(&net, &domain, 6), &domain);
        let atten = AttenuationModel::new(1.0, 1.0);
        let report = pair_and_bound(&p, &net, &domain, &atten, 1);
        assert_eq!(report.matched_pairs.len(), 1);
        assert!(report.unmatched_links.is_empty());
        assert_eq!(report.j_m, 0.0);
        let (i, j, val) = report.matched_pairs[0];
        assert_eq!((i, j), (0, 1));
        assert!(val > 0.0);
    }

    #[test]
    fn spine_only_gives_single_user_sum() {
        // both links sit on the diagonal boxes
        let net = net_1d(&[(0.1, 0.12), (0.7, 0.72)]);
        let domain = Domain::unit_cube(1);
        let p = classify_boxes(assign_boxes(&net, &domain, 6), &domain);
        let atten = AttenuationModel::new(1.0, 1.0);
        let report = pair_and_bound(&p, &net, &domain, &atten, 1);
        assert_eq!(report.i_m, 0.0);
        let expect: f64 = (0..2).map(|i| single_user_bound(net.snr(i))).sum();
        assert!((report.j_m - expect).abs() < 1e-12);
    }

    #[test]
    fn edge_boxes_stay_unmatched() {
        // two links in box (1,0) (Edge at m = 2) and two spine links
        let net = net_1d(&[(0.6, 0.1), (0.9, 0.4), (0.2, 0.3), (0.8, 0.6)]);
        let domain = Domain::unit_cube(1);
        let p = classify_boxes(assign_boxes(&net, &domain, 2), &domain);
        let atten = AttenuationModel::new(1.0, 1.0);
        let report = pair_and_bound(&p, &net, &domain, &atten, 9);
        assert_eq!(report.i_m, 0.0);
        let expect: f64 = (0..4).map(|i| single_user_bound(net.snr(i))).sum();
        assert!((report.j_m - expect).abs() < 1e-12);
        assert_eq!(report.unmatched_links, vec![0, 1, 2, 3]);
    }

    #[test]
    fn matched_pairs_satisfy_distance_ordering() {
        let domain = Domain::unit_cube(2);
        let cfg = NetworkConfig {
            domain: domain.clone(),
            attenuation: AttenuationModel::new(4.0, 1.0),
            fading: FadingModel::Deterministic,
            k: 400,
        };
        for seed in 0..5 {
            let net = sample_network(&cfg, seed).unwrap();
            let p = classify_boxes(assign_boxes(&net, &domain, 4), &domain);
            let report = pair_and_bound(&p, &net, &domain, &cfg.attenuation, seed);
            assert!(!report.matched_pairs.is_empty());
            for &(i, j, _) in &report.matched_pairs {
                let d = crate::net_model::euclidean;
                let d_jj = d(&net.tx_positions[j], &net.rx_positions[j]);
                let d_ji = d(&net.tx_positions[j], &net.rx_positions[i]);
                let d_ii = d(&net.tx_positions[i], &net.rx_positions[i]);
                assert!(d_jj >= d_ji && d_ji >= d_ii, "ordering violated");
                assert!(net.gains.get(j, i) >= net.snr(j));
            }
            // upper bound dominates the achievable lower bound
            let lower = crate::capacity_bounds::lower_bound_ia(&net).lower;
            assert!(report.total() >= lower);
        }
    }

    #[test]
    fn random_fading_pairs_respect_multiplier_ordering() {
        let domain = Domain::unit_cube(2);
        let cfg = NetworkConfig {
            domain: domain.clone(),
            attenuation: AttenuationModel::new(4.0, 1.0),
            fading: FadingModel::uniform_default(),
            k: 300,
        };
        let net = sample_network(&cfg, 5).unwrap();
        let p = classify_boxes(assign_boxes(&net, &domain, 4), &domain);
        let report = pair_and_bound(&p, &net, &domain, &cfg.attenuation, 5);
        let mult = net.fading_multipliers.as_ref().unwrap();
        for &(i, j, _) in &report.matched_pairs {
            assert!(mult.get(j, j) <= mult.get(j, i));
            assert!(mult.get(j, i) <= mult.get(i, i));
        }
        let lower = crate::capacity_bounds::lower_bound_ia(&net).lower;
        assert!(report.total() >= lower);
    }

    #[test]
    fn pair_and_bound_is_deterministic() {
        let domain = Domain::unit_cube(2);
        let cfg = NetworkConfig {
            domain: domain.clone(),
            attenuation: AttenuationModel::new(4.0, 1.0),
            fading: FadingModel::Deterministic,
            k: 150,
        };
        let net = sample_network(&cfg, 77).unwrap();
        let p = classify_boxes(assign_boxes(&net, &domain, 3), &domain);
        let a = pair_and_bound(&p, &net, &domain, &cfg.attenuation, 42);
        let b = pair_and_bound(&p, &net, &domain, &cfg.attenuation, 42);
        assert_eq!(a.matched_pairs, b.matched_pairs);
        assert_eq!(a.total(), b.total());
    }

    #[test]
    fn occupancy_unit_interval() {
        let domain = Domain::unit_cube(1);
        // 4 links, one per box of the m=2 joint grid
        let net = net_1d(&[(0.2, 0.3), (0.2, 0.7), (0.7, 0.3), (0.7, 0.8)]);
        let p = assign_boxes(&net, &domain, 2);
        let stats = occupancy_stats(&p, &net, &domain, 0.75).unwrap();
        for prob in stats.box_probabilities.values() {
            assert!((prob - 0.25).abs() < 1e-12);
        }
        assert_eq!(stats.max_abs_deviation, 0.0);
        // K=100-style arithmetic
        assert!((100f64.powf(0.75) - 31.6227766).abs() < 1e-6);
        assert!((100f64.powf(-0.5) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn occupancy_rejects_non_cube() {
        let domain = Domain::unit_ball(2);
        let cfg = NetworkConfig {
            domain: domain.clone(),
            attenuation: AttenuationModel::new(4.0, 1.0),
            fading: FadingModel::Deterministic,
            k: 10,
        };
        let net = sample_network(&cfg, 0).unwrap();
        let p = assign_boxes(&net, &domain, 2);
        assert!(occupancy_stats(&p, &net, &domain, 0.75).is_err());
    }
}
