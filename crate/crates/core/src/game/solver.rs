//! Exhaustive solver for the game on small structures.
//!
//! Positions are compared through rank-`r` types: the atomic type of the
//! chosen elements and sets, together with the sets of rank-`(r-1)` types
//! reachable by one element move and by one set move. Duplicator wins the
//! `r`-round game from a pair of positions iff their rank-`r` types agree.
//!
//! Bound moves do not enter the types. On finite structures duplicator can
//! answer any bound with `m = |universe| + 1`, after which spoiler has no
//! set of the required size and, being unable to move, loses. So bound
//! moves never help spoiler here; this is the point where the finite game
//! is weaker than its infinite counterpart. A naive game-tree search that
//! does enumerate bounds checks this in the tests.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use super::position::{apply_move, GameError, GamePosition, Move, Pending, Phase, Player, Side};
use crate::error::check_limit;
use crate::structure::{ConstraintStructure, NodeId};
use crate::subset::NodeSubset;
use crate::text::write_structure;

pub const SOLVER_NODE_LIMIT: usize = 8;
pub const SOLVER_ROUND_LIMIT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TypeKey {
    rank: u8,
    atomic: Vec<u8>,
    elem_children: Vec<u32>,
    set_children: Vec<u32>,
}

/// Shared table assigning ids to types. Solvers that share an interner
/// produce comparable type ids.
#[derive(Debug, Default)]
pub struct TypeInterner {
    ids: DashMap<TypeKey, u32>,
    next: AtomicU32,
}

impl TypeInterner {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn intern(&self, key: TypeKey) -> u32 {
        if let Some(id) = self.ids.get(&key) {
            return *id;
        }
        *self.ids.entry(key).or_insert_with(|| self.next.fetch_add(1, Ordering::Relaxed))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Computes rank-`r` types of positions in one structure.
#[derive(Debug)]
pub struct TypeSolver {
    structure: Arc<ConstraintStructure>,
    lt: Vec<u64>,
    inc: Vec<u64>,
    interner: Arc<TypeInterner>,
    memo: DashMap<(u8, Vec<u8>, Vec<u64>), u32>,
}

impl TypeSolver {
    pub fn new(structure: Arc<ConstraintStructure>, interner: Arc<TypeInterner>) -> Result<Self, GameError> {
        check_limit("node count", structure.len(), SOLVER_NODE_LIMIT)?;
        let lt = structure.nodes().map(|v| structure.lt_successors(v).to_mask()).collect();
        let inc = structure
            .nodes()
            .map(|v| {
                let mut m = 0u64;
                for w in structure.nodes() {
                    if structure.has_inc(v, w) {
                        m |= 1 << w.0;
                    }
                }
                m
            })
            .collect();
        Ok(TypeSolver {
            structure,
            lt,
            inc,
            interner,
            memo: DashMap::new(),
        })
    }

    pub fn structure(&self) -> &Arc<ConstraintStructure> {
        &self.structure
    }

    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    fn atomic(&self, elems: &[u8], sets: &[u64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + elems.len() * (elems.len() + sets.len()));
        out.push(elems.len() as u8);
        out.push(sets.len() as u8);
        for &a in elems {
            for &b in elems {
                let (a, b) = (a as usize, b as usize);
                out.push((a == b) as u8 | ((self.lt[a] >> b & 1) as u8) << 1 | ((self.inc[a] >> b & 1) as u8) << 2);
            }
            for &s in sets {
                out.push((s >> a & 1) as u8);
            }
        }
        out
    }

    /// Rank-`rank` type of the position with the given elements and sets
    /// (sets as bit masks over the structure's nodes).
    pub fn type_of(&self, elems: &[u8], sets: &[u64], rank: usize) -> u32 {
        if rank == 0 {
            return self.interner.intern(TypeKey {
                rank: 0,
                atomic: self.atomic(elems, sets),
                elem_children: Vec::new(),
                set_children: Vec::new(),
            });
        }
        let key = (rank as u8, elems.to_vec(), sets.to_vec());
        if let Some(id) = self.memo.get(&key) {
            return *id;
        }
        let n = self.len();
        let mut e = elems.to_vec();
        let mut elem_children: Vec<u32> = (0..n as u8)
            .map(|a| {
                e.push(a);
                let t = self.type_of(&e, sets, rank - 1);
                e.pop();
                t
            })
            .collect();
        elem_children.sort_unstable();
        elem_children.dedup();
        let mut s = sets.to_vec();
        let mut set_children: Vec<u32> = self
            .relevant_sets(elems, rank)
            .into_iter()
            .map(|x| {
                s.push(x);
                let t = self.type_of(elems, &s, rank - 1);
                s.pop();
                t
            })
            .collect();
        set_children.sort_unstable();
        set_children.dedup();
        let id = self.interner.intern(TypeKey {
            rank: rank as u8,
            atomic: self.atomic(elems, sets),
            elem_children,
            set_children,
        });
        self.memo.insert(key, id);
        id
    }

    /// Sets worth trying as the next set move. With one round left only
    /// membership of already chosen elements can matter.
    fn relevant_sets(&self, elems: &[u8], rank: usize) -> Vec<u64> {
        if rank == 1 {
            let mut chosen: Vec<u8> = elems.to_vec();
            chosen.sort_unstable();
            chosen.dedup();
            (0u64..1 << chosen.len())
                .map(|pick| {
                    chosen
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| pick >> i & 1 == 1)
                        .fold(0u64, |m, (_, &c)| m | 1 << c)
                })
                .collect()
        } else {
            (0u64..1 << self.len()).collect()
        }
    }

    pub fn position_type(&self, elems: &[NodeId], sets: &[NodeSubset], rank: usize) -> u32 {
        let e: Vec<u8> = elems.iter().map(|x| x.0 as u8).collect();
        let s: Vec<u64> = sets.iter().map(NodeSubset::to_mask).collect();
        self.type_of(&e, &s, rank)
    }
}

/// Type solvers for both structures of a game.
#[derive(Debug)]
pub struct GameSolver {
    left: TypeSolver,
    right: TypeSolver,
}

impl GameSolver {
    pub fn new(left: Arc<ConstraintStructure>, right: Arc<ConstraintStructure>) -> Result<Self, GameError> {
        let interner = TypeInterner::new();
        Ok(GameSolver {
            left: TypeSolver::new(left, interner.clone())?,
            right: TypeSolver::new(right, interner)?,
        })
    }

    pub fn solver(&self, side: Side) -> &TypeSolver {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn side_type(&self, p: &GamePosition, side: Side, extra: Option<NodeId>, set: Option<&NodeSubset>, rank: usize) -> u32 {
        let mut e = p.elems(side).to_vec();
        e.extend(extra);
        let mut s = p.sets(side).to_vec();
        s.extend(set.cloned());
        self.solver(side).position_type(&e, &s, rank)
    }

    fn subsets(&self, side: Side) -> impl Iterator<Item = NodeSubset> {
        let n = self.solver(side).len();
        (0u64..1 << n).map(move |m| NodeSubset::from_mask(n, m))
    }

    /// Duplicator's first winning answer to the pending move, if any.
    fn winning_reply(&self, p: &GamePosition, pending: &Pending) -> Option<Move> {
        let r = p.rounds_left - 1;
        match pending {
            Pending::Element { side, node } => {
                let target = self.side_type(p, *side, Some(*node), None, r);
                self.solver(side.other())
                    .structure()
                    .nodes()
                    .find(|&b| self.side_type(p, side.other(), Some(b), None, r) == target)
                    .map(|node| Move::DupElement { node })
            }
            Pending::Set { side, subset } => {
                let target = self.side_type(p, *side, None, Some(subset), r);
                self.subsets(side.other())
                    .find(|y| self.side_type(p, side.other(), None, Some(y), r) == target)
                    .map(|subset| Move::DupSet { subset })
            }
            Pending::BoundedSet { side, subset, l } => {
                let target = self.side_type(p, *side, None, Some(subset), r);
                self.subsets(side.other())
                    .filter(|y| y.len() >= *l)
                    .find(|y| self.side_type(p, side.other(), None, Some(y), r) == target)
                    .map(|subset| Move::BoundedDupSet { subset })
            }
        }
    }

    /// Spoiler's first winning challenge from a position where it is his
    /// turn to start a round, if any.
    fn winning_challenge(&self, p: &GamePosition) -> Option<Move> {
        let r = p.rounds_left;
        if self.side_type(p, Side::Left, None, None, r) == self.side_type(p, Side::Right, None, None, r) {
            return None;
        }
        for side in [Side::Left, Side::Right] {
            for node in self.solver(side).structure().nodes() {
                let mv = Move::Element { side, node };
                let q = apply_move(p, &mv).expect("element move is legal");
                if self.value(&q) == Player::Spoiler {
                    return Some(mv);
                }
            }
        }
        for side in [Side::Left, Side::Right] {
            for subset in self.subsets(side) {
                let mv = Move::SetMove { side, subset };
                let q = apply_move(p, &mv).expect("set move is legal");
                if self.value(&q) == Player::Spoiler {
                    return Some(mv);
                }
            }
        }
        // the atomic types already differ: any move keeps the win
        Some(Move::SetMove {
            side: Side::Left,
            subset: NodeSubset::empty(self.left.len()),
        })
    }

    /// Winner under optimal play from any position.
    pub fn value(&self, p: &GamePosition) -> Player {
        if let Some(w) = p.outcome() {
            return w;
        }
        let dup = |b: bool| if b { Player::Duplicator } else { Player::Spoiler };
        match &p.phase {
            Phase::AwaitingSpoiler => {
                let r = p.rounds_left;
                dup(self.side_type(p, Side::Left, None, None, r) == self.side_type(p, Side::Right, None, None, r))
            }
            // the reply `m = |universe| + 1` leaves spoiler without a legal set
            Phase::AwaitingBoundReply { .. } => Player::Duplicator,
            Phase::AwaitingBoundedSet { side, m, l } => {
                let r = p.rounds_left - 1;
                let spoiler_wins = self.subsets(*side).filter(|x| x.len() >= *m).any(|x| {
                    let target = self.side_type(p, *side, None, Some(&x), r);
                    !self
                        .subsets(side.other())
                        .filter(|y| y.len() >= *l)
                        .any(|y| self.side_type(p, side.other(), None, Some(&y), r) == target)
                });
                dup(!spoiler_wins)
            }
            Phase::AwaitingDuplicator(pending) => dup(self.winning_reply(p, pending).is_some()),
        }
    }

    /// A move for the player to act that wins if a win is available,
    /// otherwise some legal move.
    pub fn best_move(&self, p: &GamePosition) -> Option<Move> {
        if p.outcome().is_some() {
            return None;
        }
        match &p.phase {
            Phase::AwaitingSpoiler => Some(self.winning_challenge(p).unwrap_or(Move::SetMove {
                side: Side::Left,
                subset: NodeSubset::empty(self.left.len()),
            })),
            Phase::AwaitingBoundReply { side, .. } => Some(Move::BoundReply {
                m: self.solver(*side).len() + 1,
            }),
            Phase::AwaitingBoundedSet { side, m, .. } => {
                let mut fallback = None;
                for x in self.subsets(*side).filter(|x| x.len() >= *m) {
                    let mv = Move::BoundedSet { subset: x };
                    let q = apply_move(p, &mv).expect("large enough set is legal");
                    if self.value(&q) == Player::Spoiler {
                        return Some(mv);
                    }
                    fallback.get_or_insert(mv);
                }
                fallback
            }
            Phase::AwaitingDuplicator(pending) => self.winning_reply(p, pending).or_else(|| match pending {
                Pending::Element { side, .. } => Some(Move::DupElement { node: NodeId(0) }).filter(|_| !self.solver(side.other()).is_empty()),
                Pending::Set { side, .. } => Some(Move::DupSet {
                    subset: NodeSubset::empty(self.solver(side.other()).len()),
                }),
                Pending::BoundedSet { side, .. } => Some(Move::BoundedDupSet {
                    subset: NodeSubset::full(self.solver(side.other()).len()),
                }),
            }),
        }
    }
}

/// Stable 64-bit FNV-1a hash.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn structure_hash(s: &ConstraintStructure) -> u64 {
    fnv1a(write_structure(s).as_bytes())
}

fn encode_side(side: Side) -> u8 {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

fn encode_subset(out: &mut Vec<u8>, s: &NodeSubset) {
    out.extend((s.universe() as u32).to_le_bytes());
    out.extend(s.to_mask().to_le_bytes());
}

fn encode_move(out: &mut Vec<u8>, mv: &Move) {
    match mv {
        Move::Element { side, node } => {
            out.extend([0, encode_side(*side)]);
            out.extend((node.0 as u32).to_le_bytes());
        }
        Move::DupElement { node } => {
            out.push(1);
            out.extend((node.0 as u32).to_le_bytes());
        }
        Move::SetMove { side, subset } => {
            out.extend([2, encode_side(*side)]);
            encode_subset(out, subset);
        }
        Move::DupSet { subset } => {
            out.push(3);
            encode_subset(out, subset);
        }
        Move::Bound { side, l } => {
            out.extend([4, encode_side(*side)]);
            out.extend((*l as u32).to_le_bytes());
        }
        Move::BoundReply { m } => {
            out.push(5);
            out.extend((*m as u32).to_le_bytes());
        }
        Move::BoundedSet { subset } => {
            out.push(6);
            encode_subset(out, subset);
        }
        Move::BoundedDupSet { subset } => {
            out.push(7);
            encode_subset(out, subset);
        }
    }
}

/// Stable fingerprint of a position's chosen elements, sets, round count
/// and phase.
pub fn position_fingerprint(p: &GamePosition) -> u64 {
    let mut bytes = Vec::new();
    bytes.extend((p.rounds_left as u32).to_le_bytes());
    for side in [Side::Left, Side::Right] {
        bytes.extend((p.elems(side).len() as u32).to_le_bytes());
        for e in p.elems(side) {
            bytes.extend((e.0 as u32).to_le_bytes());
        }
        bytes.extend((p.sets(side).len() as u32).to_le_bytes());
        for s in p.sets(side) {
            for w in s.iter() {
                bytes.extend((w as u32).to_le_bytes());
            }
            bytes.push(0xff);
        }
    }
    match &p.phase {
        Phase::AwaitingSpoiler => bytes.push(0),
        Phase::AwaitingBoundReply { side, l } => {
            bytes.extend([1, encode_side(*side)]);
            bytes.extend((*l as u32).to_le_bytes());
        }
        Phase::AwaitingBoundedSet { side, l, m } => {
            bytes.extend([2, encode_side(*side)]);
            bytes.extend((*l as u32).to_le_bytes());
            bytes.extend((*m as u32).to_le_bytes());
        }
        Phase::AwaitingDuplicator(pending) => {
            bytes.push(3);
            let mv = match pending {
                Pending::Element { side, node } => Move::Element { side: *side, node: *node },
                Pending::Set { side, subset } => Move::SetMove {
                    side: *side,
                    subset: subset.clone(),
                },
                Pending::BoundedSet { side, subset, l } => {
                    bytes.extend((*l as u32).to_le_bytes());
                    Move::SetMove {
                        side: *side,
                        subset: subset.clone(),
                    }
                }
            };
            encode_move(&mut bytes, &mv);
        }
    }
    fnv1a(&bytes)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CacheError {
    #[error("not a strategy cache file")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    UnsupportedVersion(u16),
    #[error("cache was built for different structures")]
    StructureMismatch,
    #[error("cache file is truncated or corrupt")]
    Corrupt,
}

const CACHE_MAGIC: &[u8; 8] = b"THSTRAT\0";
const CACHE_VERSION: u16 = 1;

/// Lazily filled table `position fingerprint -> move` for the winner.
#[derive(Debug)]
pub struct StrategyTable {
    solver: Arc<GameSolver>,
    winner: Player,
    rounds: usize,
    entries: DashMap<u64, Move>,
}

impl StrategyTable {
    pub fn winner(&self) -> Player {
        self.winner
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The winner's move at `p`, or `None` when the winner is not to move.
    pub fn move_at(&self, p: &GamePosition) -> Option<Move> {
        if p.to_move() != Some(self.winner) || p.outcome().is_some() {
            return None;
        }
        let key = position_fingerprint(p);
        if let Some(mv) = self.entries.get(&key) {
            return Some(mv.clone());
        }
        let mv = self.solver.best_move(p)?;
        self.entries.insert(key, mv.clone());
        Some(mv)
    }

    /// Versioned binary image: header, structure hashes, then the entries
    /// sorted by fingerprint.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(CACHE_MAGIC);
        out.extend(CACHE_VERSION.to_le_bytes());
        out.extend(structure_hash(self.solver.left.structure()).to_le_bytes());
        out.extend(structure_hash(self.solver.right.structure()).to_le_bytes());
        out.push(self.rounds as u8);
        out.push(matches!(self.winner, Player::Duplicator) as u8);
        let mut entries: Vec<(u64, Move)> = self.entries.iter().map(|e| (*e.key(), e.value().clone())).collect();
        entries.sort_by_key(|(k, _)| *k);
        out.extend((entries.len() as u32).to_le_bytes());
        for (k, mv) in entries {
            out.extend(k.to_le_bytes());
            encode_move(&mut out, &mv);
        }
        out
    }

    /// Restores a table for the same pair of structures.
    pub fn from_bytes(bytes: &[u8], left: Arc<ConstraintStructure>, right: Arc<ConstraintStructure>) -> Result<Self, CacheError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != CACHE_MAGIC {
            return Err(CacheError::BadMagic);
        }
        let version = r.u16()?;
        if version != CACHE_VERSION {
            return Err(CacheError::UnsupportedVersion(version));
        }
        if r.u64()? != structure_hash(&left) || r.u64()? != structure_hash(&right) {
            return Err(CacheError::StructureMismatch);
        }
        let rounds = r.u8()? as usize;
        let winner = if r.u8()? == 1 { Player::Duplicator } else { Player::Spoiler };
        let count = r.u32()?;
        let entries = DashMap::new();
        for _ in 0..count {
            let key = r.u64()?;
            entries.insert(key, r.mv()?);
        }
        if r.pos != bytes.len() {
            return Err(CacheError::Corrupt);
        }
        let solver = GameSolver::new(left, right).map_err(|_| CacheError::StructureMismatch)?;
        Ok(StrategyTable {
            solver: Arc::new(solver),
            winner,
            rounds,
            entries,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CacheError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(CacheError::Corrupt)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CacheError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CacheError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn side(&mut self) -> Result<Side, CacheError> {
        match self.u8()? {
            0 => Ok(Side::Left),
            1 => Ok(Side::Right),
            _ => Err(CacheError::Corrupt),
        }
    }

    fn subset(&mut self) -> Result<NodeSubset, CacheError> {
        let universe = self.u32()? as usize;
        let mask = self.u64()?;
        if universe > 64 || (universe < 64 && mask >> universe != 0) {
            return Err(CacheError::Corrupt);
        }
        Ok(NodeSubset::from_mask(universe, mask))
    }

    fn mv(&mut self) -> Result<Move, CacheError> {
        Ok(match self.u8()? {
            0 => Move::Element {
                side: self.side()?,
                node: NodeId(self.u32()? as usize),
            },
            1 => Move::DupElement {
                node: NodeId(self.u32()? as usize),
            },
            2 => Move::SetMove {
                side: self.side()?,
                subset: self.subset()?,
            },
            3 => Move::DupSet { subset: self.subset()? },
            4 => Move::Bound {
                side: self.side()?,
                l: self.u32()? as usize,
            },
            5 => Move::BoundReply { m: self.u32()? as usize },
            6 => Move::BoundedSet { subset: self.subset()? },
            7 => Move::BoundedDupSet { subset: self.subset()? },
            _ => return Err(CacheError::Corrupt),
        })
    }
}

#[derive(Debug)]
pub struct GameSolution {
    pub winner: Player,
    pub table: StrategyTable,
}

/// Solves the `k`-round game on two structures with at most
/// [`SOLVER_NODE_LIMIT`] nodes each.
pub fn solve_game(left: &ConstraintStructure, right: &ConstraintStructure, k: usize) -> Result<GameSolution, GameError> {
    check_limit("rounds", k, SOLVER_ROUND_LIMIT)?;
    let solver = GameSolver::new(Arc::new(left.clone()), Arc::new(right.clone()))?;
    let start = GamePosition::new(solver.left.structure().clone(), solver.right.structure().clone(), k);
    let winner = solver.value(&start);
    Ok(GameSolution {
        winner,
        table: StrategyTable {
            solver: Arc::new(solver),
            winner,
            rounds: k,
            entries: DashMap::new(),
        },
    })
}
