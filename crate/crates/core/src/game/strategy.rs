//! Duplicator's compositional strategy on truncated E and U families.
//!
//! The E family is always the left structure and the U family the right
//! one. A [`LocalPairing`] records which E triple-u is played against which
//! U triple-u. Named nodes of paired triple-u's are copied; chains of equal
//! length are copied; chains of different lengths are answered by the chain
//! solver. Pairings always match left chain with left chain: the edge
//! `W.l < d` rules out swapping `l` and `r`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::chains::{ChainBank, ChainView};
use super::position::{apply_move, GameError, GamePosition, Move, Pending, Phase, Player, Side};
use crate::structure::NodeId;
use crate::subset::NodeSubset;
use crate::tripleu::{gen_family, Family, FamilyConfig, FamilyKind, Role, TripleUSpec};

/// Partial bijection from E components to U components.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalPairing {
    forward: BTreeMap<usize, usize>,
}

impl LocalPairing {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `(E component, U component)` pairs in ascending E order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.forward.iter().map(|(&e, &u)| (e, u))
    }

    pub fn image(&self, e: usize) -> Option<usize> {
        self.forward.get(&e).copied()
    }

    pub fn preimage(&self, u: usize) -> Option<usize> {
        self.forward.iter().find(|(_, &v)| v == u).map(|(&e, _)| e)
    }

    /// Partner of a component on the given side.
    pub fn partner(&self, side: Side, c: usize) -> Option<usize> {
        match side {
            Side::Left => self.image(c),
            Side::Right => self.preimage(c),
        }
    }

    /// Adds a pair; returns false (and changes nothing) if either
    /// component is already paired.
    pub fn insert(&mut self, e: usize, u: usize) -> bool {
        if self.forward.contains_key(&e) || self.preimage(u).is_some() {
            return false;
        }
        self.forward.insert(e, u);
        true
    }
}

/// The two families of one game plus the chain solver backing the local
/// strategies.
#[derive(Debug, Clone)]
pub struct FamilyGame {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub multiplicity: usize,
    pub e: Arc<Family>,
    pub u: Arc<Family>,
    bank: Arc<ChainBank>,
}

impl FamilyGame {
    pub fn new(k: usize, sizes: &[usize], multiplicity: usize) -> Result<Self, GameError> {
        Self::with_bank(k, sizes, multiplicity, ChainBank::new())
    }

    /// Shares `bank` (and its memo tables) with other games.
    pub fn with_bank(k: usize, sizes: &[usize], multiplicity: usize, bank: Arc<ChainBank>) -> Result<Self, GameError> {
        let cfg = |kind| FamilyConfig {
            kind,
            sizes: sizes.to_vec(),
            multiplicity,
        };
        let e = gen_family(&cfg(FamilyKind::E))?;
        let u = gen_family(&cfg(FamilyKind::U))?;
        for &s in sizes {
            bank.solver(s)?;
        }
        Ok(FamilyGame {
            k,
            sizes: sizes.to_vec(),
            multiplicity,
            e: Arc::new(e),
            u: Arc::new(u),
            bank,
        })
    }

    /// True iff the anchor chain is rank-`k` equivalent to every other
    /// size, which is what the local strategies need.
    pub fn sizes_equivalent(&self) -> Result<bool, GameError> {
        let anchor = ChainView {
            len: self.sizes[0],
            ..Default::default()
        };
        for &s in &self.sizes[1..] {
            let other = ChainView {
                len: s,
                ..Default::default()
            };
            if !self.bank.equivalent(&anchor, &other, self.k)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn family(&self, side: Side) -> &Family {
        match side {
            Side::Left => &self.e,
            Side::Right => &self.u,
        }
    }

    pub fn initial_position(&self) -> GamePosition {
        self.position_with_rounds(self.k)
    }

    /// Starting position of a game with `rounds <= k` rounds.
    pub fn position_with_rounds(&self, rounds: usize) -> GamePosition {
        GamePosition::new(
            Arc::new(self.e.structure.clone()),
            Arc::new(self.u.structure.clone()),
            rounds,
        )
    }

    fn anchor(&self) -> usize {
        self.sizes[0]
    }

    fn component_spec(&self, side: Side, c: usize) -> TripleUSpec {
        self.family(side).components[c].spec
    }

    /// Spec of the components that may be paired with `c` on `side`.
    fn partner_spec(&self, side: Side, c: usize, left_heavy: bool) -> TripleUSpec {
        let spec = self.component_spec(side, c);
        let s0 = self.anchor();
        match side {
            Side::Right => {
                if left_heavy {
                    TripleUSpec { n: spec.n, m: s0 }
                } else {
                    TripleUSpec { n: s0, m: spec.n }
                }
            }
            Side::Left => {
                let n = if spec.n == s0 { spec.m } else { spec.n };
                TripleUSpec { n, m: n }
            }
        }
    }
}

fn is_paired(pairing: &LocalPairing, side: Side, c: usize) -> bool {
    pairing.partner(side, c).is_some()
}

/// Pairs the fresh component `c` with the first fresh component of the
/// matching shape on the other side.
fn pair_fresh(game: &FamilyGame, pairing: &mut LocalPairing, side: Side, c: usize, left_heavy: bool) -> Result<usize, GameError> {
    let want = game.partner_spec(side, c, left_heavy);
    let other = side.other();
    let candidates: Vec<usize> = game
        .family(other)
        .components
        .iter()
        .enumerate()
        .filter(|(_, w)| w.spec == want)
        .map(|(i, _)| i)
        .collect();
    let free = candidates.iter().copied().find(|&d| !is_paired(pairing, other, d));
    let Some(d) = free else {
        return Err(GameError::InsufficientFreshComponents {
            needed: candidates.len() + 1,
        });
    };
    let (e, u) = if side == Side::Left { (c, d) } else { (d, c) };
    pairing.insert(e, u);
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Left,
    Right,
}

fn column_of(role: Role) -> Option<(Column, usize)> {
    match role {
        Role::LeftChain(j) => Some((Column::Left, j)),
        Role::RightChain(j) => Some((Column::Right, j)),
        _ => None,
    }
}

fn column_len(spec: TripleUSpec, col: Column) -> usize {
    match col {
        Column::Left => spec.n,
        Column::Right => spec.m,
    }
}

fn column_node(family: &Family, c: usize, col: Column, j: usize) -> NodeId {
    let w = &family.components[c];
    match col {
        Column::Left => w.left_chain[j],
        Column::Right => w.right_chain[j],
    }
}

/// Restriction of the committed position on `side` to one chain of
/// component `c`.
fn chain_view(p: &GamePosition, family: &Family, side: Side, c: usize, col: Column) -> ChainView {
    let len = column_len(family.components[c].spec, col);
    let elems = p
        .elems(side)
        .iter()
        .filter_map(|&x| match family.locate(x) {
            Some((cc, role)) if cc == c => column_of(role).filter(|(k, _)| *k == col).map(|(_, j)| j as u8),
            _ => None,
        })
        .collect();
    let sets = p.sets(side).iter().map(|s| chain_mask(family, s, c, col)).collect();
    ChainView { len, elems, sets }
}

fn chain_mask(family: &Family, s: &NodeSubset, c: usize, col: Column) -> u64 {
    let len = column_len(family.components[c].spec, col);
    (0..len)
        .filter(|&j| s.contains(column_node(family, c, col, j).0))
        .fold(0u64, |m, j| m | 1 << j)
}

fn element_reply(
    game: &FamilyGame,
    p: &GamePosition,
    side: Side,
    c: usize,
    d: usize,
    role: Role,
    rank: usize,
) -> Result<NodeId, GameError> {
    let (src, dst) = (game.family(side), game.family(side.other()));
    match column_of(role) {
        None => Ok(dst.components[d].node(role)),
        Some((col, j)) => {
            let sv = chain_view(p, src, side, c, col);
            let dv = chain_view(p, dst, side.other(), d, col);
            let y = if sv.len == dv.len {
                Some(j as u8)
            } else {
                game.bank.element_reply(&sv, j as u8, &dv, rank)?
            };
            let y = y.ok_or_else(|| {
                GameError::NotLocallyWinning(format!(
                    "no local answer to {} in chains of lengths {} and {}",
                    src.structure.label(src.components[c].node(role)),
                    sv.len,
                    dv.len
                ))
            })?;
            Ok(column_node(dst, d, col, y as usize))
        }
    }
}

fn set_reply(game: &FamilyGame, p: &GamePosition, pairing: &LocalPairing, side: Side, subset: &NodeSubset, rank: usize) -> Result<NodeSubset, GameError> {
    let (src, dst) = (game.family(side), game.family(side.other()));
    let mut reply = NodeSubset::empty(dst.structure.len());
    if subset.contains(src.final_node.0) {
        reply.insert(dst.final_node.0);
    }
    for (e, u) in pairing.pairs() {
        let (c, d) = if side == Side::Left { (e, u) } else { (u, e) };
        for role in Role::NAMED {
            if subset.contains(src.components[c].node(role).0) {
                reply.insert(dst.components[d].node(role).0);
            }
        }
        for col in [Column::Left, Column::Right] {
            let sv = chain_view(p, src, side, c, col);
            let dv = chain_view(p, dst, side.other(), d, col);
            let x = chain_mask(src, subset, c, col);
            let y = if sv.len == dv.len {
                Some(x)
            } else {
                game.bank.set_reply(&sv, x, &dv, rank)?
            };
            let y = y.ok_or_else(|| {
                GameError::NotLocallyWinning(format!(
                    "no local answer to a set move in chains of lengths {} and {}",
                    sv.len, dv.len
                ))
            })?;
            for j in 0..dv.len {
                if y >> j & 1 == 1 {
                    reply.insert(column_node(dst, d, col, j).0);
                }
            }
        }
    }
    Ok(reply)
}

/// Pairs every fresh component that `subset` touches. On the U side the
/// orientation of the new E partner follows the heavier chain.
fn pair_touched(game: &FamilyGame, pairing: &mut LocalPairing, side: Side, subset: &NodeSubset) -> Result<(), GameError> {
    let fam = game.family(side);
    for (c, w) in fam.components.iter().enumerate() {
        if is_paired(pairing, side, c) || !w.all().any(|x| subset.contains(x.0)) {
            continue;
        }
        let count = |col: &[NodeId]| col.iter().filter(|x| subset.contains(x.0)).count();
        let left_heavy = count(&w.left_chain) >= count(&w.right_chain);
        pair_fresh(game, pairing, side, c, left_heavy)?;
    }
    Ok(())
}

/// Duplicator's answer at a position where it is duplicator's turn,
/// together with the updated pairing.
pub fn duplicator_strategy(p: &GamePosition, pairing: &LocalPairing, game: &FamilyGame) -> Result<(Move, LocalPairing), GameError> {
    let mut pairing = pairing.clone();
    let rank = p.rounds_left;
    let mv = match &p.phase {
        Phase::AwaitingDuplicator(Pending::Element { side, node }) => {
            let src = game.family(*side);
            let reply = match src.locate(*node) {
                None => game.family(side.other()).final_node,
                Some((c, role)) => {
                    let d = match pairing.partner(*side, c) {
                        Some(d) => d,
                        None => pair_fresh(game, &mut pairing, *side, c, !matches!(role, Role::RightChain(_)))?,
                    };
                    element_reply(game, p, *side, c, d, role, rank)?
                }
            };
            Move::DupElement { node: reply }
        }
        Phase::AwaitingDuplicator(Pending::Set { side, subset }) => {
            pair_touched(game, &mut pairing, *side, subset)?;
            Move::DupSet {
                subset: set_reply(game, p, &pairing, *side, subset, rank)?,
            }
        }
        Phase::AwaitingDuplicator(Pending::BoundedSet { side, subset, l }) => {
            pair_touched(game, &mut pairing, *side, subset)?;
            let reply = set_reply(game, p, &pairing, *side, subset, rank)?;
            if reply.len() < *l {
                return Err(GameError::NotLocallyWinning(format!(
                    "bounded answer has {} elements, {l} required",
                    reply.len()
                )));
            }
            Move::BoundedDupSet { subset: reply }
        }
        Phase::AwaitingBoundReply { side, l } => Move::BoundReply {
            m: bound_reply(game, &pairing, *side, *l),
        },
        phase => return Err(GameError::IllegalMove(format!("duplicator does not move in phase {phase:?}"))),
    };
    Ok((mv, pairing))
}

/// `m = m1 + 2l` for a bound on the U side and `m = m1 + l*n1 + l` on the
/// E side, where `m1` counts the nodes of already paired triple-u's on
/// spoiler's side and `n1` is the anchor length.
pub fn bound_reply(game: &FamilyGame, pairing: &LocalPairing, side: Side, l: usize) -> usize {
    let fam = game.family(side);
    let m1: usize = fam
        .components
        .iter()
        .enumerate()
        .filter(|(c, _)| is_paired(pairing, side, *c))
        .map(|(_, w)| w.len())
        .sum();
    match side {
        Side::Right => m1 + 2 * l,
        Side::Left => m1 + l * game.anchor() + l,
    }
}

/// First violated condition of a locally-winning position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalFailure {
    pub condition: &'static str,
    pub detail: String,
}

impl std::fmt::Display for LocalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.condition, self.detail)
    }
}

fn fail(condition: &'static str, detail: String) -> Result<(), LocalFailure> {
    Err(LocalFailure { condition, detail })
}

/// Checks that the committed part of `p` is locally-`i`-winning with
/// witness `pairing`. Chain positions are checked with the solver.
pub fn locally_winning_check(p: &GamePosition, pairing: &LocalPairing, i: usize, game: &FamilyGame) -> Result<(), LocalFailure> {
    let (e, u) = (&*game.e, &*game.u);
    for (a, b) in pairing.pairs() {
        if a >= e.components.len() || b >= u.components.len() {
            return fail("finite domain", format!("pair ({a}, {b}) names a missing triple-u"));
        }
    }
    let elems = p.left_elems.iter().zip(&p.right_elems);
    for (j, (&x, &y)) in elems.clone().enumerate() {
        let (lx, ly) = (e.locate(x), u.locate(y));
        if let Some((c, _)) = lx {
            match pairing.image(c) {
                Some(d) if ly.map(|t| t.0) == Some(d) => {}
                _ => return fail("element coverage", format!("element {} lies in E triple-u {c}", j + 1)),
            }
        }
        if let Some((d, _)) = ly {
            match pairing.preimage(d) {
                Some(c) if lx.map(|t| t.0) == Some(c) => {}
                _ => return fail("element coverage", format!("element {} lies in U triple-u {d}", j + 1)),
            }
        }
        if (x == e.final_node) != (y == u.final_node) {
            return fail("final node", format!("element {} is the final node on one side only", j + 1));
        }
    }
    for (k, (s, t)) in p.left_sets.iter().zip(&p.right_sets).enumerate() {
        for (c, w) in e.components.iter().enumerate() {
            if w.all().any(|x| s.contains(x.0)) && pairing.image(c).is_none() {
                return fail("set coverage", format!("set {} meets unpaired E triple-u {c}", k + 1));
            }
        }
        for (d, w) in u.components.iter().enumerate() {
            if w.all().any(|x| t.contains(x.0)) && pairing.preimage(d).is_none() {
                return fail("set coverage", format!("set {} meets unpaired U triple-u {d}", k + 1));
            }
        }
        if s.contains(e.final_node.0) != t.contains(u.final_node.0) {
            return fail("final node", format!("set {} contains the final node on one side only", k + 1));
        }
    }
    for (c, d) in pairing.pairs() {
        let (we, wu) = (&e.components[c], &u.components[d]);
        for role in Role::NAMED {
            let (x, y) = (we.node(role), wu.node(role));
            for (j, (&a, &b)) in elems.clone().enumerate() {
                if (a == x) != (b == y) {
                    return fail(
                        "named nodes",
                        format!("element {} and {} of pair ({c}, {d})", j + 1, role.name()),
                    );
                }
            }
            for (k, (s, t)) in p.left_sets.iter().zip(&p.right_sets).enumerate() {
                if s.contains(x.0) != t.contains(y.0) {
                    return fail(
                        "named nodes",
                        format!("set {} and {} of pair ({c}, {d})", k + 1, role.name()),
                    );
                }
            }
        }
        for (j, (&a, &b)) in elems.clone().enumerate() {
            let col = |loc: Option<(usize, Role)>, comp: usize| loc.filter(|t| t.0 == comp).and_then(|t| column_of(t.1)).map(|t| t.0);
            if col(e.locate(a), c) != col(u.locate(b), d) {
                return fail(
                    "chain membership",
                    format!("element {} lies in different chains of pair ({c}, {d})", j + 1),
                );
            }
        }
        for col in [Column::Left, Column::Right] {
            let ve = chain_view(p, e, Side::Left, c, col);
            let vu = chain_view(p, u, Side::Right, d, col);
            if ve == vu {
                continue;
            }
            match game.bank.equivalent(&ve, &vu, i) {
                Ok(true) => {}
                Ok(false) => {
                    return fail(
                        "local games",
                        format!("{col:?} chains of pair ({c}, {d}) are not {i}-round equivalent"),
                    )
                }
                Err(err) => return fail("local games", err.to_string()),
            }
        }
    }
    Ok(())
}

/// Applies spoiler's move and, when it is then duplicator's turn, the
/// strategy's answer. Once a round is complete the locally-winning
/// invariant is asserted.
pub fn play_spoiler_move(
    game: &FamilyGame,
    p: &GamePosition,
    pairing: &LocalPairing,
    spoiler: &Move,
) -> Result<(GamePosition, LocalPairing, Option<Move>), GameError> {
    if spoiler.player() != Player::Spoiler {
        return Err(GameError::IllegalMove("expected a spoiler move".into()));
    }
    let q = apply_move(p, spoiler)?;
    if q.to_move() != Some(Player::Duplicator) || q.is_stuck() {
        return Ok((q, pairing.clone(), None));
    }
    let (reply, pairing) = duplicator_strategy(&q, pairing, game)?;
    let r = apply_move(&q, &reply)?;
    if r.phase == Phase::AwaitingSpoiler {
        locally_winning_check(&r, &pairing, r.rounds_left, game).map_err(|f| GameError::NotLocallyWinning(f.to_string()))?;
    }
    Ok((r, pairing, Some(reply)))
}
