use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{Debug, Write};
use std::hash::Hash;

use crate::driver::Level;
use crate::supervisor::ControlAction;

use super::GameError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Controller,
    Environment,
}

/// Edge label. Controllable and uncontrollable moves are different types,
/// so the two action sets are disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Control(ControlAction),
    Sensor(Level),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub label: Move,
    pub target: usize,
    /// |applied − driver| acceleration for control edges.
    pub deviation: u32,
    /// Environment edges: the driver answered with a full deliberation.
    pub full_deliberation: bool,
}

impl Edge {
    pub fn control(action: ControlAction, target: usize, deviation: u32) -> Self {
        Self {
            label: Move::Control(action),
            target,
            deviation,
            full_deliberation: false,
        }
    }

    pub fn sensor(level: Level, target: usize, full_deliberation: bool) -> Self {
        Self {
            label: Move::Sensor(level),
            target,
            deviation: 0,
            full_deliberation,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArenaNode<K> {
    pub key: K,
    pub owner: Player,
    pub bad: bool,
    pub goal: bool,
    /// Controller nodes: SafeNow holds and RiskWarn does not.
    pub calm: bool,
    pub edges: Vec<Edge>,
}

impl<K> ArenaNode<K> {
    pub fn new(key: K, owner: Player) -> Self {
        Self {
            key,
            owner,
            bad: false,
            goal: false,
            calm: false,
            edges: Vec::new(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Finite turn-based game graph with an initial node.
#[derive(Clone, Debug)]
pub struct GameArena<K> {
    nodes: Vec<ArenaNode<K>>,
    index: HashMap<K, usize>,
    initial: usize,
}

impl<K: Clone + Eq + Hash + Debug> GameArena<K> {
    /// Checks edge targets, key uniqueness and label/owner agreement.
    pub fn new(nodes: Vec<ArenaNode<K>>, initial: usize) -> Result<Self, GameError> {
        if initial >= nodes.len() {
            return Err(GameError::Malformed(format!("initial node {initial} out of range")));
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.key.clone(), i).is_some() {
                return Err(GameError::Malformed(format!("duplicate key {:?}", n.key)));
            }
            for e in &n.edges {
                if e.target >= nodes.len() {
                    return Err(GameError::Malformed(format!("edge from {i} to missing node {}", e.target)));
                }
                let ok = matches!(
                    (n.owner, e.label),
                    (Player::Controller, Move::Control(_)) | (Player::Environment, Move::Sensor(_))
                );
                if !ok {
                    return Err(GameError::Malformed(format!("node {i} has an edge of the other player")));
                }
            }
        }
        Ok(Self { nodes, index, initial })
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<ArenaNode<K>>, index: HashMap<K, usize>, initial: usize) -> Self {
        Self { nodes, index, initial }
    }

    pub fn nodes(&self) -> &[ArenaNode<K>] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &ArenaNode<K> {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn index_of(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    /// Nodes reachable from the initial node along any edge.
    pub fn reachable(&self) -> Vec<bool> {
        self.reach_with(|_, _| true)
    }

    fn reach_with(&self, follow: impl Fn(usize, &Edge) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(n) = queue.pop_front() {
            for e in &self.nodes[n].edges {
                if follow(n, e) && !seen[e.target] {
                    seen[e.target] = true;
                    queue.push_back(e.target);
                }
            }
        }
        seen
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinningRegion {
    pub member: Vec<bool>,
    /// Backward propagation rounds until the losing set stabilised.
    pub iterations: usize,
}

impl WinningRegion {
    pub fn contains(&self, n: usize) -> bool {
        self.member[n]
    }

    pub fn size(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }
}

/// Weak-until safety game: goal nodes win outright, bad nodes lose, other
/// terminal nodes win (safety held until play ended). A controller node
/// loses once all its successors lose; an environment node loses once any
/// successor loses. The winning region is the complement of the losing
/// attractor, computed layer by layer.
pub fn solve<K>(arena: &GameArena<K>) -> WinningRegion {
    let nodes = &arena.nodes;
    let n = nodes.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, node) in nodes.iter().enumerate() {
        for e in &node.edges {
            preds[e.target].push(i);
        }
    }
    for p in &mut preds {
        p.dedup();
    }
    let mut remaining: Vec<usize> = nodes.iter().map(|node| node.edges.len()).collect();
    let mut losing = vec![false; n];
    let mut layer: Vec<usize> = (0..n).filter(|&i| nodes[i].bad && !nodes[i].goal).collect();
    for &i in &layer {
        losing[i] = true;
    }
    let mut iterations = 0;
    while !layer.is_empty() {
        iterations += 1;
        let mut next = Vec::new();
        for &t in &layer {
            for &p in &preds[t] {
                if losing[p] || nodes[p].goal {
                    continue;
                }
                // One decrement per parallel edge into `t`.
                let hits = nodes[p].edges.iter().filter(|e| e.target == t).count();
                let lost = match nodes[p].owner {
                    Player::Environment => true,
                    Player::Controller => {
                        remaining[p] -= hits;
                        remaining[p] == 0
                    }
                };
                if lost {
                    losing[p] = true;
                    next.push(p);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        layer = next;
    }
    WinningRegion {
        member: losing.into_iter().map(|l| !l).collect(),
        iterations,
    }
}

pub fn realizable<K>(arena: &GameArena<K>, w: &WinningRegion) -> bool {
    w.contains(arena.initial)
}

/// Memoryless controller strategy keyed by node key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy<K: Ord> {
    pub actions: BTreeMap<K, ControlAction>,
}

impl<K: Ord> Default for Strategy<K> {
    fn default() -> Self {
        Self {
            actions: BTreeMap::new(),
        }
    }
}

impl<K: Ord> Strategy<K> {
    pub fn get(&self, key: &K) -> Option<ControlAction> {
        self.actions.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Picks, for every winning controller node, the winning move of lowest
/// severity, then smallest deviation from the driver, then action order.
pub fn extract_strategy<K>(arena: &GameArena<K>, w: &WinningRegion) -> Result<Strategy<K>, GameError>
where
    K: Clone + Eq + Hash + Debug + Ord,
{
    if !realizable(arena, w) {
        return Err(GameError::Unrealizable);
    }
    let mut actions = BTreeMap::new();
    for (i, node) in arena.nodes.iter().enumerate() {
        if node.owner != Player::Controller || !w.contains(i) {
            continue;
        }
        let best = node
            .edges
            .iter()
            .filter(|e| w.contains(e.target))
            .filter_map(|e| match e.label {
                Move::Control(a) => Some((a.severity(), e.deviation, a)),
                Move::Sensor(_) => None,
            })
            .min();
        if let Some((_, _, a)) = best {
            actions.insert(node.key.clone(), a);
        }
    }
    Ok(Strategy { actions })
}

/// Results of exhaustively checking strategy-consistent plays.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TemplateReport {
    /// Nodes visited by strategy-consistent plays.
    pub visited: usize,
    /// First bad node reached, if any.
    pub safety_witness: Option<usize>,
    /// Plays that ended (horizon) without reaching the goal.
    pub stalled_ends: usize,
    /// A strategy-consistent cycle avoiding the goal exists.
    pub goal_avoiding_cycle: bool,
    /// Controller node with no strategy entry, if any.
    pub missing_witness: Option<usize>,
    /// Calm controller node where the strategy overrides.
    pub min_intervention_witness: Option<usize>,
    /// Hinted node after which the driver may skip deliberation.
    pub response_witness: Option<usize>,
}

impl TemplateReport {
    pub fn safety_ok(&self) -> bool {
        self.safety_witness.is_none() && self.missing_witness.is_none()
    }

    pub fn reachability_ok(&self) -> bool {
        self.stalled_ends == 0 && !self.goal_avoiding_cycle
    }

    pub fn min_intervention_ok(&self) -> bool {
        self.min_intervention_witness.is_none()
    }

    pub fn response_ok(&self) -> bool {
        self.response_witness.is_none()
    }

    pub fn all_ok(&self) -> bool {
        self.safety_ok() && self.reachability_ok() && self.min_intervention_ok() && self.response_ok()
    }
}

/// Explores every play that follows `strategy` at controller nodes and any
/// move at environment nodes, and checks the four objective templates.
pub fn check_templates<K>(arena: &GameArena<K>, strategy: &Strategy<K>) -> TemplateReport
where
    K: Clone + Eq + Hash + Debug + Ord,
{
    let nodes = &arena.nodes;
    let mut report = TemplateReport::default();
    let chosen = |i: usize| strategy.get(&nodes[i].key);
    let follow = |i: usize, e: &Edge| match (nodes[i].owner, e.label) {
        (Player::Controller, Move::Control(a)) => chosen(i) == Some(a),
        (Player::Environment, _) => !nodes[i].goal && !nodes[i].bad,
        _ => false,
    };
    let seen = arena.reach_with(|i, e| !nodes[i].goal && !nodes[i].bad && follow(i, e));
    report.visited = seen.iter().filter(|&&s| s).count();

    for (i, node) in nodes.iter().enumerate() {
        if !seen[i] {
            continue;
        }
        if node.bad && !node.goal {
            report.safety_witness.get_or_insert(i);
            continue;
        }
        if node.goal {
            continue;
        }
        if node.is_terminal() {
            report.stalled_ends += 1;
            continue;
        }
        if node.owner == Player::Controller {
            match chosen(i) {
                None => {
                    report.missing_witness.get_or_insert(i);
                }
                Some(a) => {
                    if !node.edges.iter().any(|e| e.label == Move::Control(a)) {
                        report.missing_witness.get_or_insert(i);
                    }
                    if node.calm && a == ControlAction::Override {
                        report.min_intervention_witness.get_or_insert(i);
                    }
                    if a == ControlAction::Hint {
                        let skips = node
                            .edges
                            .iter()
                            .filter(|e| e.label == Move::Control(a))
                            .flat_map(|e| nodes[e.target].edges.iter())
                            .any(|e| matches!(e.label, Move::Sensor(_)) && !e.full_deliberation);
                        if skips {
                            report.response_witness.get_or_insert(i);
                        }
                    }
                }
            }
        }
    }
    report.goal_avoiding_cycle = has_cycle(nodes, &seen, |i, e| !nodes[i].goal && follow(i, e));
    report
}

/// Iterative three-colour DFS over the visited sub-graph.
fn has_cycle<K>(nodes: &[ArenaNode<K>], within: &[bool], follow: impl Fn(usize, &Edge) -> bool) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let mut colour = vec![Colour::White; nodes.len()];
    for start in 0..nodes.len() {
        if !within[start] || colour[start] != Colour::White {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        colour[start] = Colour::Grey;
        while let Some(&mut (n, ref mut next)) = stack.last_mut() {
            let edges = &nodes[n].edges;
            if *next < edges.len() {
                let e = edges[*next];
                *next += 1;
                if !within[e.target] || !follow(n, &e) {
                    continue;
                }
                match colour[e.target] {
                    Colour::Grey => return true,
                    Colour::White => {
                        colour[e.target] = Colour::Grey;
                        stack.push((e.target, 0));
                    }
                    Colour::Black => {}
                }
            } else {
                colour[n] = Colour::Black;
                stack.pop();
            }
        }
    }
    false
}

/// DOT rendering for small arenas: boxes are controller nodes, ellipses
/// environment nodes; bad nodes are red and goal nodes doubled.
pub fn arena_to_dot<K: Debug>(arena: &GameArena<K>, w: Option<&WinningRegion>) -> String {
    let mut out = String::from("digraph arena {\n  __start [shape=point];\n");
    for (i, n) in arena.nodes.iter().enumerate() {
        let shape = match (n.owner, n.goal) {
            (_, true) => "doublecircle",
            (Player::Controller, false) => "box",
            (Player::Environment, false) => "ellipse",
        };
        let mut attrs = format!("shape={shape}, label=\"{}\"", format!("{:?}", n.key).replace('"', "\\\""));
        if n.bad {
            attrs.push_str(", color=red");
        }
        if w.is_some_and(|w| w.contains(i)) {
            attrs.push_str(", style=filled, fillcolor=lightgrey");
        }
        writeln!(out, "  n{i} [{attrs}];").unwrap();
    }
    writeln!(out, "  __start -> n{};", arena.initial).unwrap();
    for (i, n) in arena.nodes.iter().enumerate() {
        for e in &n.edges {
            let label = match e.label {
                Move::Control(a) => a.to_string(),
                Move::Sensor(l) => format!("sense {l}"),
            };
            writeln!(out, "  n{i} -> n{} [label=\"{label}\"];", e.target).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
