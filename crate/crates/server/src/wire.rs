//! JSON wire schema. Every response carries `"v": 1`; nodes are referenced
//! by their generator labels (`d`, `W3_a1`, `W0_La2_4`, ...).

use serde::{Deserialize, Serialize};
use treehom_core::game::{FamilyGame, FinalVerdict, GamePosition, LocalPairing, Move, Pending, Phase, Player, Side};
use treehom_core::tripleu::Family;
use treehom_core::{ConstraintStructure, NodeId, NodeSubset};

pub const WIRE_VERSION: u32 = 1;

/// A family side: E is the left structure, U the right one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireSide {
    #[serde(alias = "left", alias = "e")]
    E,
    #[serde(alias = "right", alias = "u")]
    U,
}

impl From<WireSide> for Side {
    fn from(s: WireSide) -> Side {
        match s {
            WireSide::E => Side::Left,
            WireSide::U => Side::Right,
        }
    }
}

impl From<Side> for WireSide {
    fn from(s: Side) -> WireSide {
        match s {
            Side::Left => WireSide::E,
            Side::Right => WireSide::U,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameConfig {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub multiplicity: usize,
    /// Defaults to `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
}

/// Spoiler's moves as sent by the client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SpoilerMove {
    Element { side: WireSide, node: String },
    Set { side: WireSide, nodes: Vec<String> },
    Bound { side: WireSide, l: usize },
    BoundedSet { nodes: Vec<String> },
}

/// Duplicator's replies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum DuplicatorMove {
    Element { side: WireSide, node: String },
    Set { side: WireSide, nodes: Vec<String> },
    BoundReply { m: usize },
    BoundedSet { side: WireSide, nodes: Vec<String> },
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentSummary {
    pub name: String,
    /// Length of the chain below `a1`.
    pub n: usize,
    /// Length of the chain below `a2`.
    pub m: usize,
    /// Name of the paired component on the other side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paired_with: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilySummary {
    pub kind: WireSide,
    pub node_count: usize,
    pub final_node: String,
    pub components: Vec<ComponentSummary>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WirePhase {
    AwaitingSpoiler,
    AwaitingBoundReply { side: WireSide, l: usize },
    AwaitingBoundedSet { side: WireSide, l: usize, m: usize },
    AwaitingDuplicator,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WireVerdict {
    pub duplicator_wins: bool,
    /// First violation of each clause; `null` when the clause holds.
    pub membership: Option<String>,
    pub equality: Option<String>,
    pub relations: Option<String>,
}

impl From<FinalVerdict> for WireVerdict {
    fn from(v: FinalVerdict) -> Self {
        WireVerdict {
            duplicator_wins: v.duplicator_wins(),
            membership: v.membership,
            equality: v.equality,
            relations: v.relations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderedPosition {
    pub rounds_left: usize,
    pub phase: WirePhase,
    pub e: FamilySummary,
    pub u: FamilySummary,
    pub e_elems: Vec<String>,
    pub u_elems: Vec<String>,
    pub e_sets: Vec<Vec<String>>,
    pub u_sets: Vec<Vec<String>>,
    /// Winner once the game is decided, including a stuck spoiler.
    pub winner: Option<&'static str>,
}

fn player_name(p: Player) -> &'static str {
    match p {
        Player::Spoiler => "spoiler",
        Player::Duplicator => "duplicator",
    }
}

pub fn component_name(c: usize) -> String {
    format!("W{c}")
}

fn family_summary(f: &Family, kind: WireSide, pairing: &LocalPairing) -> FamilySummary {
    let side: Side = kind.into();
    FamilySummary {
        kind,
        node_count: f.structure.len(),
        final_node: f.structure.label(f.final_node).to_string(),
        components: f
            .components
            .iter()
            .enumerate()
            .map(|(c, w)| ComponentSummary {
                name: component_name(c),
                n: w.spec.n,
                m: w.spec.m,
                paired_with: pairing.partner(side, c).map(component_name),
            })
            .collect(),
    }
}

pub fn labels(s: &ConstraintStructure, set: &NodeSubset) -> Vec<String> {
    set.iter().map(|i| s.label(NodeId(i)).to_string()).collect()
}

pub fn render(game: &FamilyGame, p: &GamePosition, pairing: &LocalPairing) -> RenderedPosition {
    let (es, us) = (&game.e.structure, &game.u.structure);
    let phase = match &p.phase {
        Phase::AwaitingSpoiler => WirePhase::AwaitingSpoiler,
        Phase::AwaitingBoundReply { side, l } => WirePhase::AwaitingBoundReply {
            side: (*side).into(),
            l: *l,
        },
        Phase::AwaitingBoundedSet { side, l, m } => WirePhase::AwaitingBoundedSet {
            side: (*side).into(),
            l: *l,
            m: *m,
        },
        Phase::AwaitingDuplicator(_) => WirePhase::AwaitingDuplicator,
    };
    RenderedPosition {
        rounds_left: p.rounds_left,
        phase,
        e: family_summary(&game.e, WireSide::E, pairing),
        u: family_summary(&game.u, WireSide::U, pairing),
        e_elems: p.left_elems.iter().map(|&x| es.label(x).to_string()).collect(),
        u_elems: p.right_elems.iter().map(|&x| us.label(x).to_string()).collect(),
        e_sets: p.left_sets.iter().map(|s| labels(es, s)).collect(),
        u_sets: p.right_sets.iter().map(|s| labels(us, s)).collect(),
        winner: p.outcome().map(player_name),
    }
}

/// Resolves labels into a core move. Unknown labels are reported as the
/// error string.
pub fn to_core_move(game: &FamilyGame, p: &GamePosition, mv: &SpoilerMove) -> Result<Move, String> {
    let structure = |side: WireSide| match side {
        WireSide::E => &game.e.structure,
        WireSide::U => &game.u.structure,
    };
    let subset = |side: WireSide, nodes: &[String]| -> Result<NodeSubset, String> {
        let s = structure(side);
        let ids = nodes
            .iter()
            .map(|l| s.node(l).map(|n| n.0).map_err(|_| format!("no node `{l}` in {side:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NodeSubset::from_indices(s.len(), ids))
    };
    Ok(match mv {
        SpoilerMove::Element { side, node } => Move::Element {
            side: (*side).into(),
            node: structure(*side).node(node).map_err(|_| format!("no node `{node}` in {side:?}"))?,
        },
        SpoilerMove::Set { side, nodes } => Move::SetMove {
            side: (*side).into(),
            subset: subset(*side, nodes)?,
        },
        SpoilerMove::Bound { side, l } => Move::Bound {
            side: (*side).into(),
            l: *l,
        },
        SpoilerMove::BoundedSet { nodes } => {
            let side = match &p.phase {
                Phase::AwaitingBoundedSet { side, .. } => (*side).into(),
                _ => return Err("no bound move is in progress".into()),
            };
            Move::BoundedSet {
                subset: subset(side, nodes)?,
            }
        }
    })
}

/// Renders duplicator's reply; `q` is the position the reply was played in.
pub fn from_core_reply(game: &FamilyGame, q: &GamePosition, mv: &Move) -> Option<DuplicatorMove> {
    let pending_side = match &q.phase {
        Phase::AwaitingDuplicator(Pending::Element { side, .. })
        | Phase::AwaitingDuplicator(Pending::Set { side, .. })
        | Phase::AwaitingDuplicator(Pending::BoundedSet { side, .. }) => Some(side.other()),
        _ => None,
    };
    let structure = |side: Side| match side {
        Side::Left => &game.e.structure,
        Side::Right => &game.u.structure,
    };
    Some(match mv {
        Move::DupElement { node } => {
            let side = pending_side?;
            DuplicatorMove::Element {
                side: side.into(),
                node: structure(side).label(*node).to_string(),
            }
        }
        Move::DupSet { subset } => {
            let side = pending_side?;
            DuplicatorMove::Set {
                side: side.into(),
                nodes: labels(structure(side), subset),
            }
        }
        Move::BoundReply { m } => DuplicatorMove::BoundReply { m: *m },
        Move::BoundedDupSet { subset } => {
            let side = pending_side?;
            DuplicatorMove::BoundedSet {
                side: side.into(),
                nodes: labels(structure(side), subset),
            }
        }
        _ => return None,
    })
}

/// What spoiler may do in the current phase, for 409 responses.
pub fn legal_move_hints(p: &GamePosition) -> Vec<String> {
    match &p.phase {
        _ if p.outcome().is_some() => vec!["the game is over".into()],
        Phase::AwaitingSpoiler => vec![
            "element: {\"type\":\"element\",\"side\":\"E\"|\"U\",\"node\":label}".into(),
            "set: {\"type\":\"set\",\"side\":\"E\"|\"U\",\"nodes\":[label,...]}".into(),
            format!("bound: {{\"type\":\"bound\",\"side\":\"E\"|\"U\",\"l\":0..={}}}", p.bound_cap()),
        ],
        Phase::AwaitingBoundedSet { side, m, .. } => vec![format!(
            "boundedSet: {{\"type\":\"boundedSet\",\"nodes\":[...]}} with at least {m} nodes of {:?}",
            WireSide::from(*side)
        )],
        _ => vec!["waiting for duplicator".into()],
    }
}
