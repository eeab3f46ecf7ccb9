//! Mode bookkeeping for the optical frequency comb.
//!
//! Comb modes are labelled by an integer frequency index `n`
//! (ω_n = ω_0 + n·Δω) and a polarization. Before the polarization beam
//! splitter the label is the physical polarization; afterwards the same
//! label names the rail of the dual-rail wire.
//!
//! A pump with index `p` phasematches the pairs `(k, p - k)`. Two pumps
//! `p_z`, `p_y` with `|p_y - p_z| = 2m` chain the pairs into `m` disjoint
//! frequency sequences, each of which becomes one dual-rail quantum wire.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeTuple;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Polarization before the beam splitter, rail label after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pol {
    Z,
    Y,
}

impl Pol {
    pub fn other(self) -> Pol {
        match self {
            Pol::Z => Pol::Y,
            Pol::Y => Pol::Z,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pol::Z => "z",
            Pol::Y => "y",
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Pol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "z" | "Z" => Ok(Pol::Z),
            "y" | "Y" => Ok(Pol::Y),
            other => Err(format!("unknown polarization '{other}' (expected z or y)")),
        }
    }
}

/// One comb mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeLabel {
    pub n: i64,
    pub pol: Pol,
}

impl ModeLabel {
    pub const fn new(n: i64, pol: Pol) -> Self {
        Self { n, pol }
    }

    pub const fn z(n: i64) -> Self {
        Self { n, pol: Pol::Z }
    }

    pub const fn y(n: i64) -> Self {
        Self { n, pol: Pol::Y }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.pol)
    }
}

/// The simulated window of the comb.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombSpec {
    /// Free spectral range in Hz.
    pub delta_omega: f64,
    /// Frequency origin in Hz.
    pub omega0: f64,
    pub n_min: i64,
    pub n_max: i64,
}

/// FSR of the experimental OPO, in Hz.
pub const DEFAULT_FSR_HZ: f64 = 945.66e6;

impl CombSpec {
    pub fn new(delta_omega: f64, omega0: f64, n_min: i64, n_max: i64) -> Result<Self> {
        let spec = Self { delta_omega, omega0, n_min, n_max };
        spec.validate()?;
        Ok(spec)
    }

    /// Comb window `[n_min, n_max]` with the default FSR and a zero origin.
    pub fn with_range(n_min: i64, n_max: i64) -> Result<Self> {
        Self::new(DEFAULT_FSR_HZ, 0.0, n_min, n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_omega > 0.0) || !self.delta_omega.is_finite() {
            return Err(Error::InvalidComb(format!(
                "delta_omega must be positive, got {}",
                self.delta_omega
            )));
        }
        if !self.omega0.is_finite() {
            return Err(Error::InvalidComb("omega0 must be finite".into()));
        }
        if self.n_min >= self.n_max {
            return Err(Error::InvalidComb(format!(
                "n_min ({}) must be smaller than n_max ({})",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, n: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    pub fn check(&self, n: i64) -> Result<()> {
        if self.contains(n) {
            Ok(())
        } else {
            Err(Error::OutOfRange(n, self.n_min, self.n_max))
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// ω_n in Hz.
    pub fn frequency(&self, n: i64) -> f64 {
        self.omega0 + n as f64 * self.delta_omega
    }

    /// All modes of the window, ordered by frequency then polarization.
    pub fn modes(&self) -> Vec<ModeLabel> {
        self.indices()
            .flat_map(|n| [ModeLabel::z(n), ModeLabel::y(n)])
            .collect()
    }
}

/// The two pumps of the OPO and their squeezing parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    pub p_z: i64,
    pub p_y: i64,
    pub r_z: f64,
    pub r_y: f64,
}

impl PumpConfig {
    pub fn new(p_z: i64, p_y: i64, r_z: f64, r_y: f64) -> Result<Self> {
        let cfg = Self { p_z, p_y, r_z, r_y };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Equal squeezing on both pumps.
    pub fn balanced(p_z: i64, p_y: i64, r: f64) -> Result<Self> {
        Self::new(p_z, p_y, r, r)
    }

    pub fn validate(&self) -> Result<()> {
        let spacing = (self.p_y - self.p_z).abs();
        if spacing < 2 || spacing % 2 != 0 {
            return Err(Error::InvalidPumps(format!(
                "|p_y - p_z| must be even and at least 2, got {spacing}"
            )));
        }
        for (name, r) in [("r_z", self.r_z), ("r_y", self.r_y)] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::InvalidPumps(format!(
                    "{name} must be a finite non-negative number, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Number of independent wires.
    pub fn wire_count(&self) -> usize {
        ((self.p_y - self.p_z).abs() / 2) as usize
    }

    pub fn pump(&self, pol: Pol) -> i64 {
        match pol {
            Pol::Z => self.p_z,
            Pol::Y => self.p_y,
        }
    }

    pub fn squeezing(&self, pol: Pol) -> f64 {
        match pol {
            Pol::Z => self.r_z,
            Pol::Y => self.r_y,
        }
    }

    /// Which pump (if any) phasematches the pair `(a, b)`.
    pub fn matching_pump(&self, a: i64, b: i64) -> Option<Pol> {
        if a == b {
            None
        } else if a + b == self.p_z {
            Some(Pol::Z)
        } else if a + b == self.p_y {
            Some(Pol::Y)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: i64) -> Parity {
        if n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn contains(self, n: i64) -> bool {
        Parity::of(n) == self
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// ⌈p/2⌉ for any sign of `p`.
pub fn ceil_half(p: i64) -> i64 {
    p.div_euclid(2) + p.rem_euclid(2)
}

/// Parity class that receives the local π/2 phase shift turning the
/// beam-splitter nullifiers into canonical graph nullifiers: the class of
/// ⌈p_z/2⌉.
pub fn shifted_parity(pumps: &PumpConfig) -> Parity {
    Parity::of(ceil_half(pumps.p_z))
}

/// The graph picture needs each pump partner on the opposite parity
/// class, which holds only for odd pump indices.
pub fn require_odd_pumps(pumps: &PumpConfig) -> Result<()> {
    if pumps.p_z.rem_euclid(2) == 0 {
        return Err(Error::InvalidPumps(format!(
            "graph form needs odd pump indices, got p_z = {}, p_y = {}",
            pumps.p_z, pumps.p_y
        )));
    }
    Ok(())
}

/// All phasematched pairs `(k, p - k)` with `k ≥ ⌈p/2⌉` and both indices
/// inside the comb, ordered by `k`. A degenerate self-pair is skipped.
pub fn epr_pairs(pump_index: i64, comb: &CombSpec) -> Vec<(i64, i64)> {
    let start = ceil_half(pump_index).max(pump_index - comb.n_max);
    let mut pairs = Vec::new();
    for k in start..=comb.n_max {
        let partner = pump_index - k;
        if partner == k {
            log::warn!("pump {pump_index}: degenerate self-pair at n = {k} excluded");
            continue;
        }
        if comb.contains(k) && comb.contains(partner) {
            pairs.push((k, partner));
        }
    }
    pairs
}

mod dsu {
    /// Path-compressing union-find over dense indices.
    pub(super) struct DisjointSet {
        parent: Vec<usize>,
        rank: Vec<u8>,
    }

    impl DisjointSet {
        pub(super) fn new(n: usize) -> Self {
            Self { parent: (0..n).collect(), rank: vec![0; n] }
        }

        pub(super) fn find(&mut self, mut node: usize) -> usize {
            let mut root = node;
            while self.parent[root] != root {
                root = self.parent[root];
            }
            while self.parent[node] != node {
                let next = self.parent[node];
                self.parent[node] = root;
                node = next;
            }
            root
        }

        pub(super) fn union(&mut self, a: usize, b: usize) {
            let (mut a, mut b) = (self.find(a), self.find(b));
            if a == b {
                return;
            }
            if self.rank[a] < self.rank[b] {
                std::mem::swap(&mut a, &mut b);
            }
            self.parent[b] = a;
            if self.rank[a] == self.rank[b] {
                self.rank[a] = self.rank[a].saturating_add(1);
            }
        }
    }
}

fn partner(pump: i64, n: i64, comb: &CombSpec) -> Option<i64> {
    let k = pump - n;
    (k != n && comb.contains(k)).then_some(k)
}

/// Splits the comb window into the frequency chains formed by the two
/// pumps' EPR pairs.
///
/// Each chain is emitted end to end, oriented so that its anchor (the
/// member with the smallest `|n|`, negative first on ties) is preceded by
/// its z-pump partner and followed by its y-pump partner. Chains are
/// ordered by anchor. Chains cut by the window boundary are returned as-is.
pub fn extract_wires(pumps: &PumpConfig, comb: &CombSpec) -> Vec<Vec<i64>> {
    let offset = comb.n_min;
    let idx = |n: i64| (n - offset) as usize;
    let mut sets = dsu::DisjointSet::new(comb.len());
    for n in comb.indices() {
        for pump in [pumps.p_z, pumps.p_y] {
            if let Some(k) = partner(pump, n, comb) {
                sets.union(idx(n), idx(k));
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for n in comb.indices() {
        components.entry(sets.find(idx(n))).or_default().push(n);
    }

    let mut chains: Vec<(i64, i64, Vec<i64>)> = components
        .into_values()
        .map(|members| {
            let anchor = *members
                .iter()
                .min_by_key(|&&n| (n.abs(), n))
                .expect("components are nonempty");
            let chain = walk_chain(anchor, pumps, comb);
            debug_assert_eq!(chain.len(), members.len());
            (anchor.abs(), anchor, chain)
        })
        .collect();
    chains.sort_by_key(|(abs, anchor, _)| (*abs, *anchor));
    chains.into_iter().map(|(_, _, c)| c).collect()
}

/// Follows alternating pump edges away from `anchor` in both directions.
fn walk_chain(anchor: i64, pumps: &PumpConfig, comb: &CombSpec) -> Vec<i64> {
    let walk = |first: Pol| {
        let mut out = Vec::new();
        let mut current = anchor;
        let mut pol = first;
        while let Some(next) = partner(pumps.pump(pol), current, comb) {
            out.push(next);
            current = next;
            pol = pol.other();
        }
        out
    };
    let mut backward = walk(Pol::Z);
    backward.reverse();
    backward.push(anchor);
    backward.extend(walk(Pol::Y));
    backward
}

/// Edge weight of the dual-rail graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeWeight {
    PlusHalf,
    MinusHalf,
}

impl EdgeWeight {
    pub fn value(self) -> f64 {
        match self {
            EdgeWeight::PlusHalf => 0.5,
            EdgeWeight::MinusHalf => -0.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeWeight::PlusHalf => "1/2",
            EdgeWeight::MinusHalf => "-1/2",
        }
    }

    pub fn negate(self) -> Self {
        match self {
            EdgeWeight::PlusHalf => EdgeWeight::MinusHalf,
            EdgeWeight::MinusHalf => EdgeWeight::PlusHalf,
        }
    }
}

impl Serialize for EdgeWeight {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Undirected weighted edge, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: ModeLabel,
    pub b: ModeLabel,
    pub weight: EdgeWeight,
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(5)?;
        t.serialize_element(&self.a.n)?;
        t.serialize_element(&self.a.pol)?;
        t.serialize_element(&self.b.n)?;
        t.serialize_element(&self.b.pol)?;
        t.serialize_element(&self.weight)?;
        t.end()
    }
}

/// Graph neighbours of a node as read off the canonical nullifiers:
/// `(pump partner, rail, weight)` before range filtering.
pub fn graph_neighbors(node: ModeLabel, pumps: &PumpConfig) -> [(ModeLabel, EdgeWeight); 4] {
    use EdgeWeight::{MinusHalf as M, PlusHalf as P};
    let zn = pumps.p_z - node.n;
    let yn = pumps.p_y - node.n;
    match node.pol {
        Pol::Z => [
            (ModeLabel::y(zn), P),
            (ModeLabel::z(zn), P),
            (ModeLabel::z(yn), P),
            (ModeLabel::y(yn), M),
        ],
        Pol::Y => [
            (ModeLabel::y(zn), P),
            (ModeLabel::z(zn), P),
            (ModeLabel::z(yn), M),
            (ModeLabel::y(yn), P),
        ],
    }
}

/// One dual-rail cluster state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WireGraph {
    #[serde(skip)]
    pub nodes: Vec<ModeLabel>,
    pub sequence: Vec<i64>,
    pub edges: Vec<Edge>,
}

impl WireGraph {
    pub fn degree(&self, node: ModeLabel) -> usize {
        self.edges.iter().filter(|e| e.a == node || e.b == node).count()
    }

    pub fn weight(&self, a: ModeLabel, b: ModeLabel) -> Option<EdgeWeight> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.edges
            .iter()
            .find(|e| e.a == lo && e.b == hi)
            .map(|e| e.weight)
    }

    pub fn neighbors(&self, node: ModeLabel) -> Vec<(ModeLabel, EdgeWeight)> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.a == node {
                    Some((e.b, e.weight))
                } else if e.b == node {
                    Some((e.a, e.weight))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn contains_frequency(&self, n: i64) -> bool {
        self.sequence.contains(&n)
    }
}

/// Builds the dual-rail graph of every wire.
pub fn wire_graph(pumps: &PumpConfig, comb: &CombSpec) -> Vec<WireGraph> {
    extract_wires(pumps, comb)
        .into_iter()
        .map(|sequence| {
            let mut freqs = sequence.clone();
            freqs.sort_unstable();
            let nodes: Vec<ModeLabel> = freqs
                .iter()
                .flat_map(|&n| [ModeLabel::z(n), ModeLabel::y(n)])
                .collect();
            let mut edges = Vec::new();
            for &node in &nodes {
                for (other, weight) in graph_neighbors(node, pumps) {
                    if other.n == node.n || !comb.contains(other.n) || node >= other {
                        continue;
                    }
                    edges.push(Edge { a: node, b: other, weight });
                }
            }
            edges.sort_by_key(|e| (e.a, e.b));
            WireGraph { nodes, sequence, edges }
        })
        .collect()
}

#[derive(Serialize)]
struct WireExport<'a> {
    wires: &'a [WireGraph],
}

/// `{"wires":[{"sequence":[...],"edges":[[n,pol,n',pol',w],...]}]}`
pub fn wires_to_json(wires: &[WireGraph]) -> String {
    serde_json::to_string_pretty(&WireExport { wires }).expect("wire export is plain data")
}
