//! Hand-built arenas of a few nodes and a brute-force reference solver.

use std::collections::HashMap;

use hcps_synth::driver::Level;
use hcps_synth::game::{ArenaNode, Edge, GameArena, Player};
use hcps_synth::supervisor::ControlAction;

pub const C: Player = Player::Controller;
pub const E: Player = Player::Environment;

pub fn node(key: u32, owner: Player) -> ArenaNode<u32> {
    ArenaNode::new(key, owner)
}

pub fn with_edges(mut n: ArenaNode<u32>, edges: Vec<Edge>) -> ArenaNode<u32> {
    n.edges = edges;
    n
}

pub fn goal(key: u32) -> ArenaNode<u32> {
    let mut n = node(key, E);
    n.goal = true;
    n
}

pub fn bad(key: u32) -> ArenaNode<u32> {
    let mut n = node(key, E);
    n.bad = true;
    n
}

pub fn ctl(a: ControlAction, t: usize) -> Edge {
    Edge::control(a, t, 0)
}

pub fn env(l: u8, t: usize) -> Edge {
    Edge::sensor(Level(l), t, true)
}

pub fn micro(nodes: Vec<ArenaNode<u32>>) -> GameArena<u32> {
    GameArena::new(nodes, 0).unwrap()
}

/// Can the environment force a bad node within `k` moves from `v`?
fn loses(arena: &GameArena<u32>, v: usize, k: usize, memo: &mut HashMap<(usize, usize), bool>) -> bool {
    if let Some(&r) = memo.get(&(v, k)) {
        return r;
    }
    let n = arena.node(v);
    let r = if n.goal {
        false
    } else if n.bad {
        true
    } else if k == 0 || n.edges.is_empty() {
        false
    } else {
        let targets: Vec<usize> = n.edges.iter().map(|e| e.target).collect();
        match n.owner {
            Player::Controller => targets.into_iter().all(|t| loses(arena, t, k - 1, memo)),
            Player::Environment => targets.into_iter().any(|t| loses(arena, t, k - 1, memo)),
        }
    };
    memo.insert((v, k), r);
    r
}

/// Winning nodes by backward induction over plays of at most |V| moves;
/// a longer play revisits a node, so the bound is exact.
pub fn brute_winning(arena: &GameArena<u32>) -> Vec<bool> {
    let mut memo = HashMap::new();
    (0..arena.len()).map(|v| !loses(arena, v, arena.len(), &mut memo)).collect()
}

use ControlAction::{Hint, None as Keep, Override};

pub fn direct_arrival() -> GameArena<u32> {
    micro(vec![with_edges(node(0, C), vec![ctl(Keep, 1)]), goal(1)])
}

/// The only controller moves lead to a sensor choice between arrival and a
/// collision.
pub fn adversarial_sensor() -> GameArena<u32> {
    micro(vec![
        with_edges(node(0, C), vec![ctl(Keep, 1), ctl(Hint, 1)]),
        with_edges(node(1, E), vec![env(1, 2), env(4, 3)]),
        goal(2),
        bad(3),
    ])
}

pub fn override_only() -> GameArena<u32> {
    micro(vec![
        with_edges(node(0, C), vec![ctl(Keep, 1), ctl(Hint, 1), ctl(Override, 2)]),
        with_edges(node(1, E), vec![env(1, 3), env(2, 4)]),
        with_edges(node(2, E), vec![env(1, 3), env(2, 3)]),
        goal(3),
        bad(4),
    ])
}

pub fn hint_or_override() -> GameArena<u32> {
    micro(vec![
        with_edges(node(0, C), vec![ctl(Override, 2), ctl(Hint, 2), ctl(Keep, 1)]),
        with_edges(node(1, E), vec![env(1, 3), env(3, 4)]),
        with_edges(node(2, E), vec![env(1, 3)]),
        goal(3),
        bad(4),
    ])
}

/// Safety holds forever on the loop.
pub fn safe_loop() -> GameArena<u32> {
    micro(vec![
        with_edges(node(0, C), vec![ctl(Keep, 1)]),
        with_edges(node(1, E), vec![env(1, 0)]),
    ])
}

/// Two controller rounds, each followed by a sensor move that can force
/// the collision two epochs later.
pub fn layered_loss() -> GameArena<u32> {
    micro(vec![
        with_edges(node(0, C), vec![ctl(Keep, 1)]),
        with_edges(node(1, E), vec![env(1, 2), env(2, 5)]),
        with_edges(node(2, C), vec![ctl(Keep, 3), ctl(Hint, 3)]),
        with_edges(node(3, E), vec![env(1, 4), env(2, 5)]),
        bad(4),
        goal(5),
    ])
}

/// A 41-node chain of epochs; every sensor node can send play to a shared
/// collision unless the controller overrides.
pub fn long_chain() -> GameArena<u32> {
    let epochs = 20;
    let sink = 2 * epochs;
    let crash = sink + 1;
    let mut nodes = Vec::new();
    for i in 0..epochs {
        let c = 2 * i;
        nodes.push(with_edges(
            node(c as u32, C),
            vec![ctl(Keep, c + 1), ctl(Override, c + 1)],
        ));
        let next = if i + 1 == epochs { sink } else { c + 2 };
        nodes.push(with_edges(node((c + 1) as u32, E), vec![env(1, next), env(2, next)]));
    }
    nodes.push(goal(sink as u32));
    nodes.push(bad(crash as u32));
    // The controller at epoch 10 can pick a move into the collision; it
    // should avoid it.
    nodes[20].edges.push(ctl(Hint, crash));
    micro(nodes)
}

/// Fixtures with their expected realizability.
pub fn fixtures() -> Vec<(&'static str, GameArena<u32>, bool)> {
    vec![
        ("direct-arrival", direct_arrival(), true),
        ("adversarial-sensor", adversarial_sensor(), false),
        ("override-only", override_only(), true),
        ("hint-or-override", hint_or_override(), true),
        ("safe-loop", safe_loop(), true),
        ("layered-loss", layered_loss(), false),
        ("long-chain", long_chain(), true),
    ]
}
