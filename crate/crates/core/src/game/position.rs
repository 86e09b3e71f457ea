//! Positions and moves of the WMSO+B Ehrenfeucht-Fraisse game.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{ConstraintStructure, NodeId};
use crate::subset::NodeSubset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Spoiler,
    Duplicator,
}

/// A spoiler move waiting for duplicator's answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pending {
    Element { side: Side, node: NodeId },
    Set { side: Side, subset: NodeSubset },
    /// Spoiler's set in a bound move; duplicator must answer with at least
    /// `l` elements.
    BoundedSet { side: Side, subset: NodeSubset, l: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitingSpoiler,
    AwaitingBoundReply { side: Side, l: usize },
    AwaitingBoundedSet { side: Side, l: usize, m: usize },
    AwaitingDuplicator(Pending),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Element { side: Side, node: NodeId },
    DupElement { node: NodeId },
    SetMove { side: Side, subset: NodeSubset },
    DupSet { subset: NodeSubset },
    Bound { side: Side, l: usize },
    BoundReply { m: usize },
    BoundedSet { subset: NodeSubset },
    BoundedDupSet { subset: NodeSubset },
}

impl Move {
    pub fn player(&self) -> Player {
        match self {
            Move::Element { .. } | Move::SetMove { .. } | Move::Bound { .. } | Move::BoundedSet { .. } => {
                Player::Spoiler
            }
            _ => Player::Duplicator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("the game is over")]
    GameOver,
    #[error("the game is not over yet")]
    GameNotOver,
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("too many moves to enumerate: a structure has {0} nodes")]
    EnumerationTooLarge(usize),
    #[error("position is not locally winning: {0}")]
    NotLocallyWinning(String),
    #[error("not enough fresh triple-u's; multiplicity {needed} would be required")]
    InsufficientFreshComponents { needed: usize },
    #[error(transparent)]
    Core(#[from] crate::error::Error),
}

/// Full game state. The structures are shared so positions clone cheaply.
#[derive(Debug, Clone)]
pub struct GamePosition {
    pub left: Arc<ConstraintStructure>,
    pub right: Arc<ConstraintStructure>,
    pub left_elems: Vec<NodeId>,
    pub right_elems: Vec<NodeId>,
    pub left_sets: Vec<NodeSubset>,
    pub right_sets: Vec<NodeSubset>,
    pub rounds_left: usize,
    pub phase: Phase,
}

impl GamePosition {
    pub fn new(left: Arc<ConstraintStructure>, right: Arc<ConstraintStructure>, rounds: usize) -> Self {
        GamePosition {
            left,
            right,
            left_elems: Vec::new(),
            right_elems: Vec::new(),
            left_sets: Vec::new(),
            right_sets: Vec::new(),
            rounds_left: rounds,
            phase: Phase::AwaitingSpoiler,
        }
    }

    pub fn structure(&self, side: Side) -> &ConstraintStructure {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn elems(&self, side: Side) -> &[NodeId] {
        match side {
            Side::Left => &self.left_elems,
            Side::Right => &self.right_elems,
        }
    }

    pub fn sets(&self, side: Side) -> &[NodeSubset] {
        match side {
            Side::Left => &self.left_sets,
            Side::Right => &self.right_sets,
        }
    }

    /// Largest bound worth enumerating: any bound beyond the larger
    /// universe admits exactly the same (empty) family of sets.
    pub fn bound_cap(&self) -> usize {
        self.left.len().max(self.right.len()) + 1
    }

    pub fn is_over(&self) -> bool {
        self.rounds_left == 0 && self.phase == Phase::AwaitingSpoiler
    }

    pub fn to_move(&self) -> Option<Player> {
        match self.phase {
            Phase::AwaitingSpoiler if self.rounds_left == 0 => None,
            Phase::AwaitingSpoiler | Phase::AwaitingBoundedSet { .. } => Some(Player::Spoiler),
            Phase::AwaitingBoundReply { .. } | Phase::AwaitingDuplicator(_) => Some(Player::Duplicator),
        }
    }

    /// The player to move has no legal move at all. Only possible when a
    /// size demand exceeds the structure.
    pub fn is_stuck(&self) -> bool {
        match &self.phase {
            Phase::AwaitingBoundedSet { side, m, .. } => *m > self.structure(*side).len(),
            Phase::AwaitingDuplicator(Pending::BoundedSet { side, l, .. }) => *l > self.structure(side.other()).len(),
            _ => false,
        }
    }

    /// Winner of a finished game. A player who cannot move loses.
    pub fn outcome(&self) -> Option<Player> {
        if self.is_over() {
            let v = final_verdict(self).expect("game is over");
            return Some(if v.duplicator_wins() { Player::Duplicator } else { Player::Spoiler });
        }
        if self.is_stuck() {
            return self.to_move().map(|p| match p {
                Player::Spoiler => Player::Duplicator,
                Player::Duplicator => Player::Spoiler,
            });
        }
        None
    }

    fn push_elements(&mut self, side: Side, a: NodeId, b: NodeId) {
        let (l, r) = if side == Side::Left { (a, b) } else { (b, a) };
        self.left_elems.push(l);
        self.right_elems.push(r);
    }

    fn push_sets(&mut self, side: Side, a: NodeSubset, b: NodeSubset) {
        let (l, r) = if side == Side::Left { (a, b) } else { (b, a) };
        self.left_sets.push(l);
        self.right_sets.push(r);
    }
}

fn illegal(msg: impl Into<String>) -> GameError {
    GameError::IllegalMove(msg.into())
}

fn check_node(p: &GamePosition, side: Side, node: NodeId) -> Result<(), GameError> {
    if node.0 < p.structure(side).len() {
        Ok(())
    } else {
        Err(illegal(format!("node {node} is not in the {side:?} structure")))
    }
}

fn check_subset(p: &GamePosition, side: Side, subset: &NodeSubset) -> Result<(), GameError> {
    if subset.universe() == p.structure(side).len() {
        Ok(())
    } else {
        Err(illegal(format!("set is not a subset of the {side:?} structure")))
    }
}

/// Applies `mv`, returning the successor position.
pub fn apply_move(p: &GamePosition, mv: &Move) -> Result<GamePosition, GameError> {
    if p.is_over() {
        return Err(GameError::GameOver);
    }
    let mut q = p.clone();
    match (&p.phase, mv) {
        (Phase::AwaitingSpoiler, Move::Element { side, node }) => {
            check_node(p, *side, *node)?;
            q.phase = Phase::AwaitingDuplicator(Pending::Element { side: *side, node: *node });
        }
        (Phase::AwaitingSpoiler, Move::SetMove { side, subset }) => {
            check_subset(p, *side, subset)?;
            q.phase = Phase::AwaitingDuplicator(Pending::Set {
                side: *side,
                subset: subset.clone(),
            });
        }
        (Phase::AwaitingSpoiler, Move::Bound { side, l }) => {
            q.phase = Phase::AwaitingBoundReply { side: *side, l: *l };
        }
        (Phase::AwaitingBoundReply { side, l }, Move::BoundReply { m }) => {
            q.phase = Phase::AwaitingBoundedSet {
                side: *side,
                l: *l,
                m: *m,
            };
        }
        (Phase::AwaitingBoundedSet { side, l, m }, Move::BoundedSet { subset }) => {
            check_subset(p, *side, subset)?;
            if subset.len() < *m {
                return Err(illegal(format!("set has {} elements, at least {m} required", subset.len())));
            }
            q.phase = Phase::AwaitingDuplicator(Pending::BoundedSet {
                side: *side,
                subset: subset.clone(),
                l: *l,
            });
        }
        (Phase::AwaitingDuplicator(Pending::Element { side, node }), Move::DupElement { node: reply }) => {
            check_node(p, side.other(), *reply)?;
            q.push_elements(*side, *node, *reply);
            q.rounds_left -= 1;
            q.phase = Phase::AwaitingSpoiler;
        }
        (Phase::AwaitingDuplicator(Pending::Set { side, subset }), Move::DupSet { subset: reply }) => {
            check_subset(p, side.other(), reply)?;
            q.push_sets(*side, subset.clone(), reply.clone());
            q.rounds_left -= 1;
            q.phase = Phase::AwaitingSpoiler;
        }
        (Phase::AwaitingDuplicator(Pending::BoundedSet { side, subset, l }), Move::BoundedDupSet { subset: reply }) => {
            check_subset(p, side.other(), reply)?;
            if reply.len() < *l {
                return Err(illegal(format!("set has {} elements, at least {l} required", reply.len())));
            }
            q.push_sets(*side, subset.clone(), reply.clone());
            q.rounds_left -= 1;
            q.phase = Phase::AwaitingSpoiler;
        }
        (phase, mv) => return Err(illegal(format!("{mv:?} is not allowed in phase {phase:?}"))),
    }
    Ok(q)
}

pub const ENUMERATION_LIMIT: usize = 16;

fn all_subsets(n: usize) -> Result<impl Iterator<Item = NodeSubset>, GameError> {
    if n > ENUMERATION_LIMIT {
        return Err(GameError::EnumerationTooLarge(n));
    }
    Ok((0u64..1 << n).map(move |m| NodeSubset::from_mask(n, m)))
}

/// Every legal move of the player to act. Bounds are enumerated up to
/// [`GamePosition::bound_cap`].
pub fn legal_moves(p: &GamePosition) -> Result<Vec<Move>, GameError> {
    if p.is_over() {
        return Err(GameError::GameOver);
    }
    let cap = p.bound_cap();
    let mut out = Vec::new();
    match &p.phase {
        Phase::AwaitingSpoiler => {
            for side in [Side::Left, Side::Right] {
                out.extend(p.structure(side).nodes().map(|node| Move::Element { side, node }));
            }
            for side in [Side::Left, Side::Right] {
                out.extend(all_subsets(p.structure(side).len())?.map(|subset| Move::SetMove { side, subset }));
            }
            for side in [Side::Left, Side::Right] {
                out.extend((0..=cap).map(|l| Move::Bound { side, l }));
            }
        }
        Phase::AwaitingBoundReply { .. } => out.extend((0..=cap).map(|m| Move::BoundReply { m })),
        Phase::AwaitingBoundedSet { side, m, .. } => out.extend(
            all_subsets(p.structure(*side).len())?
                .filter(|s| s.len() >= *m)
                .map(|subset| Move::BoundedSet { subset }),
        ),
        Phase::AwaitingDuplicator(Pending::Element { side, .. }) => {
            out.extend(p.structure(side.other()).nodes().map(|node| Move::DupElement { node }))
        }
        Phase::AwaitingDuplicator(Pending::Set { side, .. }) => {
            out.extend(all_subsets(p.structure(side.other()).len())?.map(|subset| Move::DupSet { subset }))
        }
        Phase::AwaitingDuplicator(Pending::BoundedSet { side, l, .. }) => out.extend(
            all_subsets(p.structure(side.other()).len())?
                .filter(|s| s.len() >= *l)
                .map(|subset| Move::BoundedDupSet { subset }),
        ),
    }
    Ok(out)
}

/// The three winning clauses, each with its first violation if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinalVerdict {
    pub membership: Option<String>,
    pub equality: Option<String>,
    pub relations: Option<String>,
}

impl FinalVerdict {
    pub fn duplicator_wins(&self) -> bool {
        self.membership.is_none() && self.equality.is_none() && self.relations.is_none()
    }
}

impl fmt::Display for FinalVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let clause = |c: &Option<String>| c.clone().unwrap_or_else(|| "ok".into());
        write!(
            f,
            "membership: {}; equality: {}; relations: {}",
            clause(&self.membership),
            clause(&self.equality),
            clause(&self.relations)
        )
    }
}

/// Checks the winning condition clause by clause.
pub fn final_verdict(p: &GamePosition) -> Result<FinalVerdict, GameError> {
    if !p.is_over() {
        return Err(GameError::GameNotOver);
    }
    Ok(committed_verdict(p))
}

/// The winning clauses evaluated on the committed elements and sets,
/// ignoring any pending move.
pub fn committed_verdict(p: &GamePosition) -> FinalVerdict {
    let (a, b) = (&p.left_elems, &p.right_elems);
    let (sa, sb) = (&p.left_sets, &p.right_sets);
    let mut membership = None;
    'm: for j in 0..a.len() {
        for k in 0..sa.len() {
            if sa[k].contains(a[j].0) != sb[k].contains(b[j].0) {
                membership = Some(format!("element {} vs set {}", j + 1, k + 1));
                break 'm;
            }
        }
    }
    let mut equality = None;
    'e: for j in 0..a.len() {
        for k in j + 1..a.len() {
            if (a[j] == a[k]) != (b[j] == b[k]) {
                equality = Some(format!("elements {} and {}", j + 1, k + 1));
                break 'e;
            }
        }
    }
    let mut relations = None;
    'r: for j in 0..a.len() {
        for k in 0..a.len() {
            if p.left.has_lt(a[j], a[k]) != p.right.has_lt(b[j], b[k]) {
                relations = Some(format!("< between elements {} and {}", j + 1, k + 1));
                break 'r;
            }
            if p.left.has_inc(a[j], a[k]) != p.right.has_inc(b[j], b[k]) {
                relations = Some(format!("inc between elements {} and {}", j + 1, k + 1));
                break 'r;
            }
        }
    }
    FinalVerdict {
        membership,
        equality,
        relations,
    }
}

pub fn duplicator_wins_final(p: &GamePosition) -> Result<bool, GameError> {
    Ok(final_verdict(p)?.duplicator_wins())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<ConstraintStructure> {
        let labels: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let lt: Vec<(&str, &str)> = refs.windows(2).map(|w| (w[0], w[1])).collect();
        Arc::new(ConstraintStructure::from_labels(&refs, &lt, &[]).unwrap())
    }

    fn set(n: usize, xs: &[usize]) -> NodeSubset {
        NodeSubset::from_indices(n, xs.iter().copied())
    }

    #[test]
    fn element_round() {
        let p = GamePosition::new(chain(2), chain(3), 2);
        let q = apply_move(&p, &Move::Element { side: Side::Left, node: NodeId(1) }).unwrap();
        assert_eq!(q.to_move(), Some(Player::Duplicator));
        let r = apply_move(&q, &Move::DupElement { node: NodeId(2) }).unwrap();
        assert_eq!((r.left_elems.clone(), r.right_elems.clone()), (vec![NodeId(1)], vec![NodeId(2)]));
        assert_eq!(r.rounds_left, 1);
        assert_eq!(r.phase, Phase::AwaitingSpoiler);
    }

    #[test]
    fn bound_round_on_the_right() {
        let p = GamePosition::new(chain(3), chain(4), 1);
        let p = apply_move(&p, &Move::Bound { side: Side::Right, l: 2 }).unwrap();
        let p = apply_move(&p, &Move::BoundReply { m: 3 }).unwrap();
        assert!(apply_move(&p, &Move::BoundedSet { subset: set(4, &[0, 1]) }).is_err());
        let p = apply_move(&p, &Move::BoundedSet { subset: set(4, &[0, 1, 3]) }).unwrap();
        assert!(apply_move(&p, &Move::BoundedDupSet { subset: set(3, &[2]) }).is_err());
        let p = apply_move(&p, &Move::BoundedDupSet { subset: set(3, &[0, 2]) }).unwrap();
        assert_eq!(p.right_sets, vec![set(4, &[0, 1, 3])]);
        assert_eq!(p.left_sets, vec![set(3, &[0, 2])]);
        assert!(p.is_over());
    }

    #[test]
    fn wrong_phase_and_game_over() {
        let p = GamePosition::new(chain(1), chain(1), 1);
        assert!(matches!(
            apply_move(&p, &Move::DupSet { subset: set(1, &[]) }),
            Err(GameError::IllegalMove(_))
        ));
        let done = GamePosition::new(chain(1), chain(1), 0);
        assert_eq!(legal_moves(&done), Err(GameError::GameOver));
        assert_eq!(duplicator_wins_final(&done), Ok(true));
        assert_eq!(duplicator_wins_final(&p), Err(GameError::GameNotOver));
    }

    #[test]
    fn foreign_sets_are_rejected() {
        let p = GamePosition::new(chain(2), chain(3), 1);
        assert!(apply_move(&p, &Move::SetMove { side: Side::Left, subset: set(3, &[0]) }).is_err());
        assert!(apply_move(&p, &Move::Element { side: Side::Left, node: NodeId(2) }).is_err());
    }

    #[test]
    fn legal_move_counts() {
        let p = GamePosition::new(chain(2), chain(3), 2);
        let moves = legal_moves(&p).unwrap();
        let cap = 4;
        assert_eq!(moves.len(), 5 + (4 + 8) + 2 * (cap + 1));
        let q = apply_move(&p, &Move::Bound { side: Side::Left, l: 1 }).unwrap();
        let q = apply_move(&q, &Move::BoundReply { m: 2 }).unwrap();
        let bounded = legal_moves(&q).unwrap();
        assert_eq!(bounded.len(), 1);
        assert!(bounded.iter().all(|m| matches!(m, Move::BoundedSet { subset } if subset.len() >= 2)));
    }

    #[test]
    fn stuck_players_lose() {
        let p = GamePosition::new(chain(2), chain(2), 1);
        let q = apply_move(&p, &Move::Bound { side: Side::Left, l: 0 }).unwrap();
        let q = apply_move(&q, &Move::BoundReply { m: 3 }).unwrap();
        assert!(q.is_stuck());
        assert_eq!(q.outcome(), Some(Player::Duplicator));
        let r = apply_move(&p, &Move::Bound { side: Side::Left, l: 5 }).unwrap();
        let r = apply_move(&r, &Move::BoundReply { m: 0 }).unwrap();
        let r = apply_move(&r, &Move::BoundedSet { subset: set(2, &[]) }).unwrap();
        assert_eq!(r.outcome(), Some(Player::Spoiler));
    }

    #[test]
    fn verdict_clauses() {
        let loop_ = Arc::new(ConstraintStructure::from_labels(&["x"], &[("x", "x")], &[]).unwrap());
        let plain = chain(1);
        let p = GamePosition::new(loop_, plain.clone(), 1);
        let p = apply_move(&p, &Move::Element { side: Side::Left, node: NodeId(0) }).unwrap();
        let p = apply_move(&p, &Move::DupElement { node: NodeId(0) }).unwrap();
        let v = final_verdict(&p).unwrap();
        assert!(v.relations.is_some() && v.membership.is_none() && v.equality.is_none());

        let p = GamePosition::new(plain.clone(), plain, 2);
        let p = apply_move(&p, &Move::Element { side: Side::Left, node: NodeId(0) }).unwrap();
        let p = apply_move(&p, &Move::DupElement { node: NodeId(0) }).unwrap();
        let p = apply_move(&p, &Move::SetMove { side: Side::Left, subset: set(1, &[0]) }).unwrap();
        let p = apply_move(&p, &Move::DupSet { subset: set(1, &[]) }).unwrap();
        let v = final_verdict(&p).unwrap();
        assert!(v.membership.is_some());
        assert!(!v.duplicator_wins());
    }
}
