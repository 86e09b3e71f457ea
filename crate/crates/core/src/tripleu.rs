//! Generators for (n,m)-triple-u's and finite truncations of the E and U
//! families, with named access to the gadget nodes.
//!
//! The chain below `a1` is stored as a transitively closed linear order
//! `La1_1 < La1_2 < ... < La1_n < a1` (likewise for `a2`), so a chain
//! together with its top restricts to a plain linear order.

use serde::{Deserialize, Serialize};

use crate::decision::fixpoint_levels;
use crate::error::{Error, Result};
use crate::structure::{ConstraintStructure, EdgeKind, NodeId, StructureBuilder};
use crate::subset::NodeSubset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripleUSpec {
    pub n: usize,
    pub m: usize,
}

/// Position of a node inside one triple-u.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    L,
    R,
    A1,
    A2,
    B1,
    B2,
    B3,
    /// 0-based position in the chain below `a1`, bottom first.
    LeftChain(usize),
    /// 0-based position in the chain below `a2`, bottom first.
    RightChain(usize),
}

impl Role {
    pub const NAMED: [Role; 7] = [Role::L, Role::R, Role::A1, Role::A2, Role::B1, Role::B2, Role::B3];

    pub fn name(self) -> String {
        match self {
            Role::L => "l".into(),
            Role::R => "r".into(),
            Role::A1 => "a1".into(),
            Role::A2 => "a2".into(),
            Role::B1 => "b1".into(),
            Role::B2 => "b2".into(),
            Role::B3 => "b3".into(),
            Role::LeftChain(j) => format!("La1_{}", j + 1),
            Role::RightChain(j) => format!("La2_{}", j + 1),
        }
    }

    pub fn is_named(self) -> bool {
        !matches!(self, Role::LeftChain(_) | Role::RightChain(_))
    }
}

/// Node ids of one triple-u inside some structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleUNodes {
    pub spec: TripleUSpec,
    pub l: NodeId,
    pub r: NodeId,
    pub a1: NodeId,
    pub a2: NodeId,
    pub b1: NodeId,
    pub b2: NodeId,
    pub b3: NodeId,
    /// Bottom first.
    pub left_chain: Vec<NodeId>,
    pub right_chain: Vec<NodeId>,
}

impl TripleUNodes {
    pub fn node(&self, role: Role) -> NodeId {
        match role {
            Role::L => self.l,
            Role::R => self.r,
            Role::A1 => self.a1,
            Role::A2 => self.a2,
            Role::B1 => self.b1,
            Role::B2 => self.b2,
            Role::B3 => self.b3,
            Role::LeftChain(j) => self.left_chain[j],
            Role::RightChain(j) => self.right_chain[j],
        }
    }

    pub fn len(&self) -> usize {
        7 + self.spec.n + self.spec.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn roles(&self) -> impl Iterator<Item = Role> + '_ {
        Role::NAMED
            .into_iter()
            .chain((0..self.spec.n).map(Role::LeftChain))
            .chain((0..self.spec.m).map(Role::RightChain))
    }

    pub fn all(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roles().map(|r| self.node(r))
    }

    /// The left chain together with `a1`.
    pub fn left_column(&self) -> Vec<NodeId> {
        let mut v = self.left_chain.clone();
        v.push(self.a1);
        v
    }

    pub fn right_column(&self) -> Vec<NodeId> {
        let mut v = self.right_chain.clone();
        v.push(self.a2);
        v
    }
}

/// A stand-alone triple-u.
#[derive(Debug, Clone, Serialize)]
pub struct NamedTripleU {
    pub structure: ConstraintStructure,
    pub nodes: TripleUNodes,
}

fn add_tripleu(b: &mut StructureBuilder, prefix: &str, spec: TripleUSpec) -> TripleUNodes {
    let mut add = |role: Role| {
        b.add_node(&format!("{prefix}{}", role.name()))
            .expect("generated labels are unique")
    };
    let l = add(Role::L);
    let r = add(Role::R);
    let a1 = add(Role::A1);
    let a2 = add(Role::A2);
    let b1 = add(Role::B1);
    let b2 = add(Role::B2);
    let b3 = add(Role::B3);
    let left_chain: Vec<NodeId> = (0..spec.n).map(|j| add(Role::LeftChain(j))).collect();
    let right_chain: Vec<NodeId> = (0..spec.m).map(|j| add(Role::RightChain(j))).collect();
    for (x, y) in [(l, b1), (a1, b1), (a1, b2), (a2, b2), (a2, b3), (r, b3)] {
        b.add_lt(x, y);
    }
    b.add_inc(l, r);
    b.add_inc(r, l);
    let nodes = TripleUNodes {
        spec,
        l,
        r,
        a1,
        a2,
        b1,
        b2,
        b3,
        left_chain,
        right_chain,
    };
    for column in [nodes.left_column(), nodes.right_column()] {
        for i in 0..column.len() {
            for j in i + 1..column.len() {
                b.add_edge(EdgeKind::Lt, column[i], column[j]);
            }
        }
    }
    nodes
}

/// The standard (n,m)-triple-u with labels `l, r, a1, a2, b1, b2, b3,
/// La1_1..La1_n, La2_1..La2_m`.
pub fn gen_tripleu(spec: TripleUSpec) -> NamedTripleU {
    let mut b = StructureBuilder::new();
    let nodes = add_tripleu(&mut b, "", spec);
    NamedTripleU {
        structure: b.build(),
        nodes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    E,
    U,
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "E" | "e" => Ok(FamilyKind::E),
            "U" | "u" => Ok(FamilyKind::U),
            _ => Err(Error::InvalidConfig(format!("unknown family kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    /// Strictly increasing; `sizes[0]` is the anchor length.
    pub sizes: Vec<usize>,
    pub multiplicity: usize,
}

impl FamilyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig("sizes must be non-empty".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("sizes must be strictly increasing".into()));
        }
        if self.kind == FamilyKind::E && self.sizes.len() < 2 {
            return Err(Error::InvalidConfig("an E family needs at least two sizes".into()));
        }
        if self.multiplicity == 0 {
            return Err(Error::InvalidConfig("multiplicity must be at least 1".into()));
        }
        Ok(())
    }

    /// Chain-length pairs of the components, in generation order.
    pub fn component_specs(&self) -> Vec<TripleUSpec> {
        let mut out = Vec::new();
        let s0 = self.sizes[0];
        for &s in &self.sizes[1..] {
            match self.kind {
                FamilyKind::U => out.extend(std::iter::repeat_n(TripleUSpec { n: s, m: s }, self.multiplicity)),
                FamilyKind::E => {
                    out.extend(std::iter::repeat_n(TripleUSpec { n: s0, m: s }, self.multiplicity));
                    out.extend(std::iter::repeat_n(TripleUSpec { n: s, m: s0 }, self.multiplicity));
                }
            }
        }
        out
    }
}

/// A generated family: disjoint triple-u's plus a final node `d` above
/// every `W.l`.
#[derive(Debug, Clone, Serialize)]
pub struct Family {
    pub config: FamilyConfig,
    pub structure: ConstraintStructure,
    pub components: Vec<TripleUNodes>,
    pub final_node: NodeId,
    #[serde(skip)]
    locator: Vec<Option<(usize, Role)>>,
}

impl Family {
    /// Component index and role of a node; `None` for the final node.
    pub fn locate(&self, node: NodeId) -> Option<(usize, Role)> {
        self.locator[node.0]
    }

    pub fn component_subset(&self, c: usize) -> NodeSubset {
        NodeSubset::from_indices(self.structure.len(), self.components[c].all().map(NodeId::index))
    }
}

/// Builds the truncated family described by `cfg`, labelling the nodes of
/// component `i` as `W<i>_<name>`.
pub fn gen_family(cfg: &FamilyConfig) -> Result<Family> {
    cfg.validate()?;
    let mut b = StructureBuilder::new();
    let mut components = Vec::new();
    for (i, spec) in cfg.component_specs().into_iter().enumerate() {
        components.push(add_tripleu(&mut b, &format!("W{i}_"), spec));
    }
    let d = b.add_node("d").expect("`d` is not a generated component label");
    for w in &components {
        b.add_lt(w.l, d);
    }
    let structure = b.build();
    let mut locator = vec![None; structure.len()];
    for (i, w) in components.iter().enumerate() {
        for role in w.roles() {
            locator[w.node(role).0] = Some((i, role));
        }
    }
    Ok(Family {
        config: cfg.clone(),
        structure,
        components,
        final_node: d,
        locator,
    })
}

/// Fixpoint stage (0-based) of the labelled node.
pub fn placement_stage(s: &ConstraintStructure, label: &str) -> Result<usize> {
    let node = s.node(label)?;
    let fp = fixpoint_levels(s)?;
    if !fp.exhausted {
        return Err(Error::NotExhausted);
    }
    Ok(fp.stage_of(node).expect("exhausted fixpoint stages every node"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::decide_tree;

    fn family(kind: FamilyKind, sizes: &[usize], t: usize) -> Family {
        gen_family(&FamilyConfig {
            kind,
            sizes: sizes.to_vec(),
            multiplicity: t,
        })
        .unwrap()
    }

    #[test]
    fn node_counts() {
        assert_eq!(gen_tripleu(TripleUSpec { n: 5, m: 3 }).structure.len(), 15);
        assert_eq!(gen_tripleu(TripleUSpec { n: 0, m: 0 }).structure.len(), 7);
        let one = gen_tripleu(TripleUSpec { n: 1, m: 0 });
        assert_eq!(one.structure.len(), 8);
        assert!(one.structure.has_lt(one.structure.node("La1_1").unwrap(), one.nodes.a1));
        assert_eq!(family(FamilyKind::E, &[1, 2], 1).structure.len(), 21);
        assert_eq!(family(FamilyKind::U, &[1, 2], 1).structure.len(), 12);
    }

    #[test]
    fn plain_tripleu_has_exactly_the_standard_edges() {
        let s = gen_tripleu(TripleUSpec { n: 0, m: 0 }).structure;
        let expected = ConstraintStructure::from_labels(
            &["l", "r", "a1", "a2", "b1", "b2", "b3"],
            &[("l", "b1"), ("a1", "b1"), ("a1", "b2"), ("a2", "b2"), ("a2", "b3"), ("r", "b3")],
            &[("l", "r"), ("r", "l")],
        )
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn chains_are_transitively_closed() {
        let t = gen_tripleu(TripleUSpec { n: 3, m: 2 });
        let col = t.nodes.left_column();
        for i in 0..col.len() {
            for j in 0..col.len() {
                assert_eq!(t.structure.has_lt(col[i], col[j]), i < j);
            }
        }
        assert_eq!(t.structure.lt_count(), 6 + 6 + 3);
    }

    #[test]
    fn family_labels_and_locator() {
        let f = family(FamilyKind::E, &[1, 3], 2);
        assert_eq!(f.components.len(), 4);
        assert_eq!(f.components[0].spec, TripleUSpec { n: 1, m: 3 });
        assert_eq!(f.components[2].spec, TripleUSpec { n: 3, m: 1 });
        let x = f.structure.node("W2_La1_3").unwrap();
        assert_eq!(f.locate(x), Some((2, Role::LeftChain(2))));
        assert_eq!(f.locate(f.final_node), None);
        assert!(f.structure.has_lt(f.components[3].l, f.final_node));
        assert_eq!(f.structure.label(f.final_node), "d");
    }

    #[test]
    fn invalid_configs() {
        let bad = |kind, sizes: &[usize], t| {
            gen_family(&FamilyConfig {
                kind,
                sizes: sizes.to_vec(),
                multiplicity: t,
            })
            .is_err()
        };
        assert!(bad(FamilyKind::U, &[], 1));
        assert!(bad(FamilyKind::U, &[2, 2], 1));
        assert!(bad(FamilyKind::E, &[2], 1));
        assert!(bad(FamilyKind::U, &[1, 2], 0));
        assert!(!bad(FamilyKind::U, &[2], 1));
    }

    #[test]
    fn families_map_into_trees() {
        for t in 1..=3 {
            assert!(decide_tree(&family(FamilyKind::E, &[1, 3], t).structure).unwrap());
            assert!(decide_tree(&family(FamilyKind::U, &[1, 3], t).structure).unwrap());
        }
    }

    #[test]
    fn placement_of_final_node() {
        let e = |s| placement_stage(&family(FamilyKind::E, &[2, s], 1).structure, "d").unwrap();
        let u = |s| placement_stage(&family(FamilyKind::U, &[2, s], 1).structure, "d").unwrap();
        assert_eq!(e(5), e(9));
        assert_eq!(e(5), 2 + 2);
        assert!(u(5) < u(9));
        assert_eq!(u(5), 5 + 2);
    }

    #[test]
    fn placement_errors() {
        let chain = ConstraintStructure::from_labels(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")], &[])
            .unwrap();
        assert_eq!(placement_stage(&chain, "d"), Ok(3));
        assert_eq!(placement_stage(&chain, "zz"), Err(Error::UnknownLabel("zz".into())));
        let cyc = ConstraintStructure::from_labels(&["a", "b"], &[("a", "b"), ("b", "a")], &[]).unwrap();
        assert_eq!(placement_stage(&cyc, "a"), Err(Error::NotExhausted));
    }
}
