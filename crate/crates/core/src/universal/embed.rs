use serde::Serialize;

use super::dyadic::Dyadic;
use super::infima::{close_under_infima, infima_closed_enumeration, InfimaClosedOrder};
use super::word::{uword_add, uword_compare, UWord, WordOrdering};
use crate::error::Result;
use crate::structure::{ConstraintStructure, NodeId};

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingResult {
    pub closed: InfimaClosedOrder,
    pub enumeration: Vec<NodeId>,
    /// Images of all closed-order nodes.
    pub closed_phi: Vec<UWord>,
    /// Images of the original nodes.
    pub phi: Vec<UWord>,
    /// Number of placement steps; every rational has a denominator
    /// dividing `2^dyadic_depth_bound`.
    pub dyadic_depth_bound: usize,
}

/// Injective homomorphism of a finite semi-linear order into the universal
/// order, built node by node along an infima-closed enumeration.
///
/// A node below something already placed goes just under the infimum `u`
/// of the placed nodes above it: `phi(u) + (-1/2^(i+1))` for the
/// `(i+1)`-th placement. Any other node opens the smallest free branch
/// `phi(u)(n,0)` above the greatest placed node `u` below it.
pub fn embed_universal(s: &ConstraintStructure) -> Result<EmbeddingResult> {
    let closed = close_under_infima(s)?;
    let enumeration = infima_closed_enumeration(&closed);
    let mut phi: Vec<Option<UWord>> = vec![None; closed.len()];
    let mut placed: Vec<NodeId> = Vec::with_capacity(closed.len());

    for (step, &b) in enumeration.iter().enumerate() {
        let word = if step == 0 {
            UWord::letter(0, Dyadic::ZERO)
        } else {
            let above: Vec<NodeId> = placed.iter().copied().filter(|&p| closed.less(b, p)).collect();
            if !above.is_empty() {
                let u = closed.inf_of(&above).expect("nodes above b have b as a lower bound");
                let pu = phi[u.0].as_ref().expect("prefixes are closed under infima");
                uword_add(pu, Dyadic::neg_unit(step as u32 + 1)).expect("images are non-empty")
            } else {
                let below: Vec<NodeId> = placed.iter().copied().filter(|&p| closed.less(p, b)).collect();
                let u = *below
                    .iter()
                    .find(|&&m| below.iter().all(|&x| closed.leq(x, m)))
                    .expect("inf with the first placed node lies strictly below b");
                let pu = phi[u.0].clone().expect("u is placed");
                let others: Vec<&UWord> = placed
                    .iter()
                    .filter(|&&p| !closed.leq(p, u))
                    .map(|p| phi[p.0].as_ref().expect("placed"))
                    .collect();
                (0u64..)
                    .map(|n| pu.extended(n, Dyadic::ZERO))
                    .find(|w| others.iter().all(|o| uword_compare(w, o) == WordOrdering::Incomparable))
                    .expect("only finitely many branches are occupied")
            }
        };
        phi[b.0] = Some(word);
        placed.push(b);
    }

    let closed_phi: Vec<UWord> = phi.into_iter().map(|w| w.expect("enumeration covers all nodes")).collect();
    let phi = closed.injection.iter().map(|&x| closed_phi[x.0].clone()).collect();
    Ok(EmbeddingResult {
        dyadic_depth_bound: enumeration.len(),
        closed,
        enumeration,
        closed_phi,
        phi,
    })
}

/// Injective, sends `lt` to strictly-below and `inc` to incomparable.
pub fn verify_universal_embedding(s: &ConstraintStructure, e: &EmbeddingResult) -> bool {
    if e.phi.len() != s.len() {
        return false;
    }
    for a in s.nodes() {
        for b in s.nodes() {
            if a == b {
                continue;
            }
            let ord = uword_compare(&e.phi[a.0], &e.phi[b.0]);
            if ord == WordOrdering::Equal
                || (s.has_lt(a, b) && ord != WordOrdering::Less)
                || (s.has_inc(a, b) && ord != WordOrdering::Incomparable)
            {
                return false;
            }
        }
    }
    true
}

/// One line per original node: `label -> (n1,p1)(n2,p2)...`.
pub fn write_embedding(s: &ConstraintStructure, e: &EmbeddingResult) -> String {
    let mut out = String::new();
    for v in s.nodes() {
        out.push_str(&format!("{} -> {}\n", s.label(v), e.phi[v.0]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> UWord {
        s.parse().unwrap()
    }

    #[test]
    fn single_node_maps_to_zero_zero() {
        let s = ConstraintStructure::from_labels(&["v"], &[], &[]).unwrap();
        let e = embed_universal(&s).unwrap();
        assert_eq!(e.phi, vec![w("(0,0)")]);
        assert_eq!(e.dyadic_depth_bound, 1);
        assert!(verify_universal_embedding(&s, &e));
    }

    #[test]
    fn two_chain_opens_branch_zero() {
        let s = ConstraintStructure::from_labels(&["a", "b"], &[("a", "b")], &[]).unwrap();
        let e = embed_universal(&s).unwrap();
        assert_eq!(e.phi, vec![w("(0,0)"), w("(0,0)(0,0)")]);
        assert!(verify_universal_embedding(&s, &e));
    }

    #[test]
    fn upper_node_first_uses_the_downward_shift() {
        let s = ConstraintStructure::from_labels(&["b", "a"], &[("a", "b")], &[]).unwrap();
        let e = embed_universal(&s).unwrap();
        assert_eq!(e.phi, vec![w("(0,0)"), w("(0,-1/2^2)")]);
        assert!(verify_universal_embedding(&s, &e));
    }

    #[test]
    fn antichain_uses_the_bottom() {
        let s = ConstraintStructure::from_labels(&["a", "b"], &[], &[("a", "b"), ("b", "a")]).unwrap();
        let e = embed_universal(&s).unwrap();
        // enumeration a, bottom, b
        assert_eq!(e.closed_phi[2], w("(0,-1/2^2)"));
        assert_eq!(e.phi, vec![w("(0,0)"), w("(0,-1/2^2)(0,0)")]);
        assert!(verify_universal_embedding(&s, &e));
        assert_eq!(write_embedding(&s, &e), "a -> (0,0/2^0)\nb -> (0,-1/2^2)(0,0/2^0)\n");
    }

    #[test]
    fn verify_rejects_swaps_and_collapses() {
        let chain = ConstraintStructure::from_labels(&["a", "b"], &[("a", "b")], &[]).unwrap();
        let mut e = embed_universal(&chain).unwrap();
        e.phi.swap(0, 1);
        assert!(!verify_universal_embedding(&chain, &e));
        let anti = ConstraintStructure::from_labels(&["a", "b"], &[], &[("a", "b"), ("b", "a")]).unwrap();
        let mut e = embed_universal(&anti).unwrap();
        e.phi[1] = e.phi[0].clone();
        assert!(!verify_universal_embedding(&anti, &e));
    }
}
