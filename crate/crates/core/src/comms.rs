//! RF relay model: free-space link budget, disk connectivity, minimum-delay
//! routing and store-and-forward transmission time.
//!
//! Distances here are meters. Antenna gain is counted once per link. Pointing
//! loss only enters the SNR used for the Shannon rate, not the range.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::geometry::Point;
use crate::math;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CommsError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("invalid comm parameter `{0}`")]
    InvalidParam(&'static str),
    #[error("link budget does not close: {margin_at_1m:.2} dB margin at 1 m")]
    BudgetDoesNotClose { margin_at_1m: f64 },
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("no route from node {src} to node {dst}")]
    Disconnected { src: usize, dst: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommParams {
    pub tx_power_dbm: f64,
    /// Gain applied once per link.
    pub antenna_gain_db: f64,
    pub rx_sensitivity_dbm: f64,
    pub frequency_hz: f64,
    /// Cable plus cave channel losses.
    pub fixed_losses_db: f64,
    /// Additional in-cave loss on top of `fixed_losses_db`.
    pub excess_loss_db: f64,
    pub bandwidth_hz: f64,
    pub noise_temperature_k: f64,
    pub pointing_loss_db: f64,
    /// Minimum Eb/No for a link to count as usable.
    pub min_eb_no_db: f64,
    pub packet_size_bits: u64,
    pub data_size_bits: u64,
}

impl Default for CommParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 25.0,
            antenna_gain_db: 1.0,
            rx_sensitivity_dbm: -80.0,
            frequency_hz: 2.4e9,
            fixed_losses_db: 12.0,
            excess_loss_db: 0.0,
            bandwidth_hz: 20e3,
            noise_temperature_k: 200.0,
            pointing_loss_db: 18.0,
            min_eb_no_db: 10.0,
            packet_size_bits: 1024,
            data_size_bits: 8_000_000,
        }
    }
}

impl CommParams {
    pub fn validate(&self) -> Result<(), CommsError> {
        if !(self.frequency_hz > 0.0) {
            return Err(CommsError::NonPositiveFrequency(self.frequency_hz));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(CommsError::InvalidParam("bandwidth_hz"));
        }
        if !(self.noise_temperature_k > 0.0) {
            return Err(CommsError::InvalidParam("noise_temperature_k"));
        }
        if self.packet_size_bits == 0 {
            return Err(CommsError::InvalidParam("packet_size_bits"));
        }
        for (name, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("antenna_gain_db", self.antenna_gain_db),
            ("rx_sensitivity_dbm", self.rx_sensitivity_dbm),
            ("fixed_losses_db", self.fixed_losses_db),
            ("excess_loss_db", self.excess_loss_db),
            ("pointing_loss_db", self.pointing_loss_db),
            ("min_eb_no_db", self.min_eb_no_db),
        ] {
            if !v.is_finite() {
                return Err(CommsError::InvalidParam(name));
            }
        }
        Ok(())
    }

    /// Bits actually sent for one message: whole packets.
    pub fn padded_data_bits(&self) -> f64 {
        let packets = self.data_size_bits.div_ceil(self.packet_size_bits.max(1));
        (packets * self.packet_size_bits) as f64
    }

    /// EIRP minus fixed losses; what is left to be eaten by path loss.
    fn power_before_path_loss(&self) -> f64 {
        self.tx_power_dbm + self.antenna_gain_db - self.fixed_losses_db - self.excess_loss_db
    }
}

pub fn free_space_path_loss(d: f64, f: f64) -> Result<f64, CommsError> {
    if !(d > 0.0) {
        return Err(CommsError::NonPositiveDistance(d));
    }
    if !(f > 0.0) {
        return Err(CommsError::NonPositiveFrequency(f));
    }
    Ok(20.0 * math::log10(4.0 * core::f64::consts::PI * d * f / SPEED_OF_LIGHT))
}

pub fn received_power(params: &CommParams, d: f64) -> Result<f64, CommsError> {
    Ok(params.power_before_path_loss() - free_space_path_loss(d, params.frequency_hz)?)
}

/// Distance at which received power falls to the receiver sensitivity.
pub fn max_range(params: &CommParams) -> Result<f64, CommsError> {
    params.validate()?;
    let allowed_path_loss = params.power_before_path_loss() - params.rx_sensitivity_dbm;
    let fspl_1m = free_space_path_loss(1.0, params.frequency_hz)?;
    if allowed_path_loss < fspl_1m {
        return Err(CommsError::BudgetDoesNotClose {
            margin_at_1m: allowed_path_loss - fspl_1m,
        });
    }
    let wavelength_factor = SPEED_OF_LIGHT / (4.0 * core::f64::consts::PI * params.frequency_hz);
    Ok(wavelength_factor * math::pow10(allowed_path_loss / 20.0))
}

/// Itemized link budget at a given distance. All terms in dB/dBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub tx_power_dbm: f64,
    pub antenna_gain_db: f64,
    pub fixed_losses_db: f64,
    pub excess_loss_db: f64,
    pub path_loss_db: f64,
    pub received_power_dbm: f64,
    pub rx_sensitivity_dbm: f64,
    pub margin_db: f64,
}

impl LinkBudget {
    pub fn at(params: &CommParams, d: f64) -> Result<Self, CommsError> {
        let path_loss_db = free_space_path_loss(d, params.frequency_hz)?;
        let received_power_dbm = params.tx_power_dbm + params.antenna_gain_db
            - params.fixed_losses_db
            - params.excess_loss_db
            - path_loss_db;
        Ok(Self {
            distance_m: d,
            tx_power_dbm: params.tx_power_dbm,
            antenna_gain_db: params.antenna_gain_db,
            fixed_losses_db: params.fixed_losses_db,
            excess_loss_db: params.excess_loss_db,
            path_loss_db,
            received_power_dbm,
            rx_sensitivity_dbm: params.rx_sensitivity_dbm,
            margin_db: received_power_dbm - params.rx_sensitivity_dbm,
        })
    }

    /// Signed terms whose sum is the received power.
    pub fn terms(&self) -> [(&'static str, f64); 5] {
        [
            ("tx_power_dbm", self.tx_power_dbm),
            ("antenna_gain_db", self.antenna_gain_db),
            ("fixed_losses_db", -self.fixed_losses_db),
            ("excess_loss_db", -self.excess_loss_db),
            ("path_loss_db", -self.path_loss_db),
        ]
    }
}

/// Thermal noise floor `10 log10(k T B / 1 mW)`.
pub fn noise_floor_dbm(params: &CommParams) -> f64 {
    10.0 * math::log10(BOLTZMANN * params.noise_temperature_k * params.bandwidth_hz * 1000.0)
}

pub fn snr_db(params: &CommParams, d: f64) -> Result<f64, CommsError> {
    Ok(received_power(params, d)? - params.pointing_loss_db - noise_floor_dbm(params))
}

/// Shannon capacity of a link of length `d`, bits/s.
pub fn shannon_rate(params: &CommParams, d: f64) -> Result<f64, CommsError> {
    let snr = math::pow10(snr_db(params, d)? / 10.0);
    Ok(params.bandwidth_hz * math::log2(1.0 + snr))
}

/// Eb/No when signalling at the Shannon rate, dB.
pub fn eb_no_at_capacity_db(params: &CommParams, d: f64) -> Result<f64, CommsError> {
    let snr_db = snr_db(params, d)?;
    let rate = shannon_rate(params, d)?;
    Ok(snr_db + 10.0 * math::log10(params.bandwidth_hz / rate))
}

/// Store-and-forward time to push one message over a single link.
pub fn link_time(params: &CommParams, d: f64) -> Result<f64, CommsError> {
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(params.padded_data_bits() / shannon_rate(params, d)?)
}

fn link_usable(params: &CommParams, d: f64) -> bool {
    if d == 0.0 {
        return true;
    }
    match (received_power(params, d), eb_no_at_capacity_db(params, d)) {
        (Ok(p), Ok(eb_no)) => p >= params.rx_sensitivity_dbm && eb_no >= params.min_eb_no_db,
        _ => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub received_power_dbm: f64,
    /// Seconds to move one message across the link.
    pub cost: f64,
}

/// Undirected weighted connectivity graph over robot positions (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    positions: Vec<Point>,
    edges: Vec<Edge>,
    neighbours: Vec<Vec<(usize, usize)>>,
}

impl CommGraph {
    fn from_pairs<I>(positions: &[Point], params: &CommParams, pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = Vec::new();
        let mut neighbours = vec![Vec::new(); positions.len()];
        for (a, b) in pairs {
            let distance = positions[a].distance(positions[b]);
            if !link_usable(params, distance) {
                continue;
            }
            let received_power_dbm = if distance == 0.0 {
                f64::INFINITY
            } else {
                received_power(params, distance).unwrap_or(f64::NEG_INFINITY)
            };
            let Ok(cost) = link_time(params, distance) else {
                continue;
            };
            let e = edges.len();
            edges.push(Edge {
                a,
                b,
                distance,
                received_power_dbm,
                cost,
            });
            neighbours[a].push((b, e));
            neighbours[b].push((a, e));
        }
        Self {
            positions: positions.to_vec(),
            edges,
            neighbours,
        }
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        self.neighbours
            .get(a)?
            .iter()
            .find(|(n, _)| *n == b)
            .map(|(_, e)| &self.edges[*e])
    }

    pub fn neighbours(&self, node: usize) -> impl Iterator<Item = (usize, &Edge)> + '_ {
        self.neighbours[node].iter().map(|(n, e)| (*n, &self.edges[*e]))
    }
}

/// Graph with an edge between every pair of nodes whose link closes.
pub fn build_adjacency(positions: &[Point], params: &CommParams) -> CommGraph {
    let n = positions.len();
    CommGraph::from_pairs(
        positions,
        params,
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))),
    )
}

/// Bucket-brigade graph: each node may only talk to its chain neighbours.
pub fn build_chain(positions: &[Point], params: &CommParams) -> CommGraph {
    CommGraph::from_pairs(positions, params, (1..positions.len()).map(|b| (b - 1, b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub nodes: Vec<usize>,
    pub cost: f64,
}

#[derive(PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost route by Dijkstra. `Ok(None)` when `dst` is unreachable.
pub fn shortest_path(graph: &CommGraph, src: usize, dst: usize) -> Result<Option<Route>, CommsError> {
    let n = graph.node_count();
    for node in [src, dst] {
        if node >= n {
            return Err(CommsError::UnknownNode(node));
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<usize>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Frontier { cost: 0.0, node: src });
    while let Some(Frontier { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if node == dst {
            break;
        }
        for (next, edge) in graph.neighbours(node) {
            let candidate = cost + edge.cost;
            if candidate < dist[next] {
                dist[next] = candidate;
                prev[next] = Some(node);
                heap.push(Frontier {
                    cost: candidate,
                    node: next,
                });
            }
        }
    }
    if !dist[dst].is_finite() {
        return Ok(None);
    }
    let mut nodes = vec![dst];
    let mut cur = dst;
    while let Some(p) = prev[cur] {
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    Ok(Some(Route {
        nodes,
        cost: dist[dst],
    }))
}

/// Sum of per-link store-and-forward times along a route.
pub fn route_time(graph: &CommGraph, route: &Route) -> f64 {
    route
        .nodes
        .windows(2)
        .map(|w| graph.edge_between(w[0], w[1]).map_or(f64::INFINITY, |e| e.cost))
        .sum()
}

/// Seconds to deliver one message from `src` to `dst` over the
/// minimum-delay relay path.
pub fn transmission_time(
    positions: &[Point],
    params: &CommParams,
    src: usize,
    dst: usize,
) -> Result<f64, CommsError> {
    params.validate()?;
    let graph = build_adjacency(positions, params);
    let route = shortest_path(&graph, src, dst)?.ok_or(CommsError::Disconnected { src, dst })?;
    Ok(route_time(&graph, &route))
}

/// `hops + 1` equally spaced nodes along a straight line of `total_length`.
pub fn equally_spaced_chain(total_length: f64, hops: usize) -> Vec<Point> {
    (0..=hops)
        .map(|i| Point::new(total_length * i as f64 / hops.max(1) as f64, 0.0))
        .collect()
}

/// Bucket-brigade time for one message across an equally spaced chain.
pub fn chain_transmission_time(
    total_length: f64,
    hops: usize,
    params: &CommParams,
) -> Result<f64, CommsError> {
    params.validate()?;
    if hops == 0 {
        return Ok(0.0);
    }
    let positions = equally_spaced_chain(total_length, hops);
    let graph = build_chain(&positions, params);
    let route = shortest_path(&graph, 0, hops)?.ok_or(CommsError::Disconnected { src: 0, dst: hops })?;
    Ok(route_time(&graph, &route))
}
