//! Finite linear orders, their rank-k game equivalence, and local replies
//! on pairs of chains.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::position::GameError;
use super::solver::{TypeInterner, TypeSolver, SOLVER_NODE_LIMIT, SOLVER_ROUND_LIMIT};
use crate::error::check_limit;
use crate::structure::{ConstraintStructure, NodeId, StructureBuilder};

/// Transitive linear order `c0 < c1 < ... < c(n-1)` without `inc` edges.
pub fn chain(n: usize) -> ConstraintStructure {
    let mut b = StructureBuilder::new();
    let ids: Vec<NodeId> = (0..n).map(|i| b.add_node(&format!("c{i}")).expect("fresh label")).collect();
    for i in 0..n {
        for j in i + 1..n {
            b.add_lt(ids[i], ids[j]);
        }
    }
    b.build()
}

/// Chosen elements (as chain positions) and sets (as masks) of one chain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChainView {
    pub len: usize,
    pub elems: Vec<u8>,
    pub sets: Vec<u64>,
}

/// Type solvers for the chains `0..=SOLVER_NODE_LIMIT`, sharing one
/// interner so that types of different lengths compare.
#[derive(Debug)]
pub struct ChainBank {
    interner: Arc<TypeInterner>,
    solvers: Vec<OnceLock<TypeSolver>>,
}

impl Default for ChainBank {
    fn default() -> Self {
        ChainBank {
            interner: TypeInterner::new(),
            solvers: (0..=SOLVER_NODE_LIMIT).map(|_| OnceLock::new()).collect(),
        }
    }
}

impl ChainBank {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn solver(&self, len: usize) -> Result<&TypeSolver, GameError> {
        check_limit("chain length", len, SOLVER_NODE_LIMIT)?;
        Ok(self.solvers[len].get_or_init(|| {
            TypeSolver::new(Arc::new(chain(len)), self.interner.clone()).expect("length is within the limit")
        }))
    }

    pub fn view_type(&self, v: &ChainView, rank: usize) -> Result<u32, GameError> {
        Ok(self.solver(v.len)?.type_of(&v.elems, &v.sets, rank))
    }

    /// Duplicator wins the `rank`-round game between the two views.
    pub fn equivalent(&self, a: &ChainView, b: &ChainView, rank: usize) -> Result<bool, GameError> {
        Ok(self.view_type(a, rank)? == self.view_type(b, rank)?)
    }

    /// Smallest position in `dst` answering spoiler's element `x` in `src`
    /// so that the views stay `(rank-1)`-equivalent.
    pub fn element_reply(&self, src: &ChainView, x: u8, dst: &ChainView, rank: usize) -> Result<Option<u8>, GameError> {
        let mut s = src.clone();
        s.elems.push(x);
        let target = self.view_type(&s, rank - 1)?;
        let solver = self.solver(dst.len)?;
        let mut e = dst.elems.clone();
        e.push(0);
        for y in 0..dst.len as u8 {
            *e.last_mut().expect("pushed") = y;
            if solver.type_of(&e, &dst.sets, rank - 1) == target {
                return Ok(Some(y));
            }
        }
        Ok(None)
    }

    /// A set in `dst` answering spoiler's set `x` in `src` so that the views
    /// stay `(rank-1)`-equivalent: the largest such set if `x` is
    /// non-empty, the smallest otherwise, ties by smallest mask.
    pub fn set_reply(&self, src: &ChainView, x: u64, dst: &ChainView, rank: usize) -> Result<Option<u64>, GameError> {
        let mut s = src.clone();
        s.sets.push(x);
        let target = self.view_type(&s, rank - 1)?;
        let solver = self.solver(dst.len)?;
        let mut candidates: Vec<u64> = (0u64..1 << dst.len).collect();
        if x == 0 {
            candidates.sort_by_key(|m| (m.count_ones(), *m));
        } else {
            candidates.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
        }
        let mut sets = dst.sets.clone();
        sets.push(0);
        for y in candidates {
            *sets.last_mut().expect("pushed") = y;
            if solver.type_of(&dst.elems, &sets, rank - 1) == target {
                return Ok(Some(y));
            }
        }
        Ok(None)
    }
}

/// Groups the chains `1..=max_len` by rank-`k` type and returns the largest
/// class in increasing order; ties go to the lexicographically smallest
/// class. Every pair in the result is duplicator-winning at rank `k`.
pub fn find_equivalent_chain_lengths(k: usize, max_len: usize) -> Result<Vec<usize>, GameError> {
    check_limit("rounds", k, SOLVER_ROUND_LIMIT)?;
    check_limit("chain length", max_len, SOLVER_NODE_LIMIT)?;
    let bank = ChainBank::default();
    let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for n in 1..=max_len {
        let t = bank.view_type(&ChainView { len: n, ..Default::default() }, k)?;
        classes.entry(t).or_default().push(n);
    }
    Ok(classes
        .into_values()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .unwrap_or_default())
}
