//! Adversarial sweep: spoiler tries every move from a capped alphabet
//! against [`duplicator_strategy`](super::duplicator_strategy).
//!
//! Unpaired triple-u's of the same shape are interchangeable, so element
//! moves into fresh components use the first unpaired copy of each shape.
//! A set move is built from: the final node (in or out); one focus
//! component (named part all or nothing; one chain any subset with the
//! other empty or full, or both chains intervals); the other paired
//! components with a coarse pattern; and a bounded number of fresh
//! components taken whole, no two with the same long chain length. In the
//! last round only components holding a chosen element are a focus, and
//! the other paired components are all empty or all full: with no round
//! left the verdict depends only on membership of chosen elements.

use serde::Serialize;

use super::position::{duplicator_wins_final, GameError, GamePosition, Move, Phase, Side};
use super::strategy::{play_spoiler_move, FamilyGame, LocalPairing};
use crate::subset::NodeSubset;
use crate::tripleu::{Family, Role};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepLimits {
    /// Fresh triple-u's (of distinct shapes) a set move may touch.
    pub max_fresh: usize,
    /// Fresh components taken whole besides the focus, in the last round.
    pub last_round_extra_fresh: usize,
    /// Bound values spoiler tries, each on both sides.
    pub bounds: Vec<usize>,
    /// Failures kept in the report.
    pub max_failures: usize,
}

impl Default for SweepLimits {
    fn default() -> Self {
        SweepLimits {
            max_fresh: 2,
            last_round_extra_fresh: 1,
            bounds: vec![1, 3, 40],
            max_failures: 16,
        }
    }
}

/// A playout duplicator lost or an invariant breach.
#[derive(Debug, Clone, Serialize)]
pub struct SweepFailure {
    pub moves: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepReport {
    /// Completed playouts, including those where spoiler got stuck.
    pub playouts: u64,
    pub spoiler_stuck: u64,
    /// Positions after a completed round at which the invariant was checked.
    pub positions_checked: u64,
    pub duplicator_losses: u64,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn clean(&self) -> bool {
        self.duplicator_losses == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pattern {
    named: bool,
    left: u64,
    right: u64,
}

impl Pattern {
    const EMPTY: Pattern = Pattern {
        named: false,
        left: 0,
        right: 0,
    };

    fn full(n: usize, m: usize) -> Pattern {
        Pattern {
            named: true,
            left: (1 << n) - 1,
            right: (1 << m) - 1,
        }
    }

    fn coarse(n: usize, m: usize) -> [Pattern; 5] {
        let full = Pattern::full(n, m);
        [
            Pattern::EMPTY,
            full,
            Pattern {
                named: true,
                left: 0,
                right: 0,
            },
            Pattern { named: false, right: 0, ..full },
            Pattern { named: false, left: 0, ..full },
        ]
    }

    fn apply(self, family: &Family, c: usize, out: &mut NodeSubset) {
        let w = &family.components[c];
        if self.named {
            for role in Role::NAMED {
                out.insert(w.node(role).0);
            }
        }
        for (j, x) in w.left_chain.iter().enumerate() {
            if self.left >> j & 1 == 1 {
                out.insert(x.0);
            }
        }
        for (j, x) in w.right_chain.iter().enumerate() {
            if self.right >> j & 1 == 1 {
                out.insert(x.0);
            }
        }
    }
}

fn paired_components(pairing: &LocalPairing, side: Side) -> Vec<usize> {
    let mut v: Vec<usize> = pairing
        .pairs()
        .map(|(e, u)| if side == Side::Left { e } else { u })
        .collect();
    v.sort_unstable();
    v
}

/// First unpaired component of every shape, in generation order.
fn fresh_representatives(family: &Family, pairing: &LocalPairing, side: Side) -> Vec<usize> {
    let mut seen = Vec::new();
    let mut reps = Vec::new();
    for (c, w) in family.components.iter().enumerate() {
        if pairing.partner(side, c).is_some() || seen.contains(&w.spec) {
            continue;
        }
        seen.push(w.spec);
        reps.push(c);
    }
    reps
}

fn element_moves(game: &FamilyGame, pairing: &LocalPairing) -> Vec<Move> {
    let mut out = Vec::new();
    for side in [Side::Left, Side::Right] {
        let fam = game.family(side);
        out.push(Move::Element {
            side,
            node: fam.final_node,
        });
        let mut comps = paired_components(pairing, side);
        comps.extend(fresh_representatives(fam, pairing, side));
        for c in comps {
            out.extend(fam.components[c].all().map(|node| Move::Element { side, node }));
        }
    }
    out
}

/// Focus patterns: every subset of one chain with the other chain empty or
/// full, plus every pair of intervals; named part all or nothing.
fn focus_patterns(n: usize, m: usize) -> Vec<Pattern> {
    let intervals = |len: usize| {
        let mut v = vec![0u64];
        for a in 0..len {
            for b in a + 1..=len {
                v.push(((1u64 << b) - 1) & !((1u64 << a) - 1));
            }
        }
        v
    };
    let (full_l, full_r) = ((1u64 << n) - 1, (1u64 << m) - 1);
    let mut chains: Vec<(u64, u64)> = Vec::new();
    for left in 0..=full_l {
        chains.push((left, 0));
        chains.push((left, full_r));
    }
    for right in 0..=full_r {
        chains.push((0, right));
        chains.push((full_l, right));
    }
    for &left in &intervals(n) {
        for &right in &intervals(m) {
            chains.push((left, right));
        }
    }
    chains.sort_unstable();
    chains.dedup();
    [false, true]
        .into_iter()
        .flat_map(|named| chains.iter().map(move |&(left, right)| Pattern { named, left, right }))
        .collect()
}

fn subsets_up_to<T: Copy>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for &x in items {
        let more: Vec<Vec<T>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut t = s.clone();
                t.push(x);
                t
            })
            .collect();
        out.extend(more);
    }
    out
}

/// Calls `f` on every set of the capped alphabet on `side`.
fn for_each_set(game: &FamilyGame, p: &GamePosition, pairing: &LocalPairing, side: Side, limits: &SweepLimits, f: &mut dyn FnMut(NodeSubset)) {
    let fam = game.family(side);
    let touched = paired_components(pairing, side);
    let fresh = fresh_representatives(fam, pairing, side);
    let last_round = p.rounds_left == 1;
    let holds_element = |c: usize| {
        p.elems(side)
            .iter()
            .any(|&x| fam.locate(x).is_some_and(|(cc, _)| cc == c))
    };
    let focuses: Vec<usize> = if last_round {
        touched.iter().copied().filter(|&c| holds_element(c)).collect()
    } else {
        touched.iter().chain(&fresh).copied().collect()
    };
    let spec = |c: usize| fam.components[c].spec;
    let mut focus_options: Vec<Option<usize>> = focuses.iter().map(|&c| Some(c)).collect();
    if focus_options.is_empty() {
        focus_options.push(None);
    }
    for focus in focus_options {
        let rich: Vec<Pattern> = match focus {
            None => vec![Pattern::EMPTY],
            Some(c) => focus_patterns(spec(c).n, spec(c).m),
        };
        let others: Vec<usize> = touched.iter().copied().filter(|&c| Some(c) != focus).collect();
        let focus_fresh = focus.is_some_and(|c| fresh.contains(&c));
        let extra_cap = if last_round {
            limits.last_round_extra_fresh
        } else {
            limits.max_fresh.saturating_sub(focus_fresh as usize)
        };
        let extra_pool: Vec<usize> = fresh.iter().copied().filter(|&c| Some(c) != focus).collect();
        let class = |c: usize| spec(c).n.max(spec(c).m);
        let extras: Vec<Vec<usize>> = subsets_up_to(&extra_pool, extra_cap)
            .into_iter()
            .filter(|set| {
                let mut classes: Vec<usize> = set.iter().map(|&c| class(c)).collect();
                classes.extend(focus.filter(|_| focus_fresh).map(class));
                let n = classes.len();
                classes.sort_unstable();
                classes.dedup();
                classes.len() == n
            })
            .collect();
        let other_choices: Vec<Vec<Pattern>> = if last_round {
            let all = |full: bool| {
                others
                    .iter()
                    .map(|&c| if full { Pattern::full(spec(c).n, spec(c).m) } else { Pattern::EMPTY })
                    .collect()
            };
            if others.is_empty() {
                vec![all(false)]
            } else {
                vec![all(false), all(true)]
            }
        } else {
            // coarse patterns of the other paired components, as a product
            let mut choices: Vec<Vec<Pattern>> = vec![Vec::new()];
            for &c in &others {
                let s = spec(c);
                choices = choices
                    .into_iter()
                    .flat_map(|prefix| {
                        Pattern::coarse(s.n, s.m).into_iter().map(move |pat| {
                            let mut v = prefix.clone();
                            v.push(pat);
                            v
                        })
                    })
                    .collect();
            }
            choices
        };
        for other in &other_choices {
            for extra in &extras {
                let mut base = NodeSubset::empty(fam.structure.len());
                for (&c, pat) in others.iter().zip(other) {
                    pat.apply(fam, c, &mut base);
                }
                for &c in extra {
                    let s = spec(c);
                    Pattern::full(s.n, s.m).apply(fam, c, &mut base);
                }
                for pat in &rich {
                    let mut set = base.clone();
                    if let Some(c) = focus {
                        pat.apply(fam, c, &mut set);
                    }
                    f(set.clone());
                    set.insert(fam.final_node.0);
                    f(set);
                }
            }
        }
    }
}

struct Sweeper<'a> {
    game: &'a FamilyGame,
    progress: &'a mut dyn FnMut(usize, usize, &SweepReport),
    limits: &'a SweepLimits,
    report: SweepReport,
    trail: Vec<Move>,
}

impl Sweeper<'_> {
    fn fail(&mut self, reason: String) {
        self.report.duplicator_losses += 1;
        if self.report.failures.len() < self.limits.max_failures {
            let moves = self.trail.iter().map(|m| format!("{m:?}")).collect();
            self.report.failures.push(SweepFailure { moves, reason });
        }
    }

    /// Plays `mv` for spoiler and continues the playout below it.
    fn step(&mut self, p: &GamePosition, pairing: &LocalPairing, mv: Move) {
        let depth = self.trail.len();
        self.trail.push(mv.clone());
        match play_spoiler_move(self.game, p, pairing, &mv) {
            Err(e) => self.fail(e.to_string()),
            Ok((q, pairing, reply)) => {
                self.trail.extend(reply);
                self.explore(&q, &pairing);
            }
        }
        self.trail.truncate(depth);
    }

    fn explore(&mut self, p: &GamePosition, pairing: &LocalPairing) {
        match &p.phase {
            Phase::AwaitingSpoiler => {
                self.report.positions_checked += 1;
                if p.rounds_left == 0 {
                    self.report.playouts += 1;
                    match duplicator_wins_final(p) {
                        Ok(true) => {}
                        Ok(false) => self.fail("final position is lost for duplicator".into()),
                        Err(e) => self.fail(e.to_string()),
                    }
                    return;
                }
                let mut moves = element_moves(self.game, pairing);
                for side in [Side::Left, Side::Right] {
                    for_each_set(self.game, p, pairing, side, self.limits, &mut |subset| {
                        moves.push(Move::SetMove { side, subset })
                    });
                    for &l in &self.limits.bounds {
                        if l <= p.bound_cap() {
                            moves.push(Move::Bound { side, l });
                        }
                    }
                }
                let top = self.trail.is_empty();
                let total = moves.len();
                for (i, mv) in moves.into_iter().enumerate() {
                    self.step(p, pairing, mv);
                    if top {
                        (self.progress)(i + 1, total, &self.report);
                    }
                }
            }
            Phase::AwaitingBoundedSet { side, m, .. } => {
                let mut sets = Vec::new();
                for_each_set(self.game, p, pairing, *side, self.limits, &mut |s| {
                    if s.len() >= *m {
                        sets.push(s)
                    }
                });
                if sets.is_empty() {
                    self.report.playouts += 1;
                    self.report.spoiler_stuck += 1;
                }
                for subset in sets {
                    self.step(p, pairing, Move::BoundedSet { subset });
                }
            }
            phase => self.fail(format!("spoiler cannot move in phase {phase:?}")),
        }
    }
}

/// Runs every capped spoiler line of the `game.k`-round game against the
/// duplicator strategy. Every position after a completed round is checked
/// to be locally winning (inside [`play_spoiler_move`]), and every final
/// position to be won by duplicator.
pub fn adversarial_sweep(game: &FamilyGame, limits: &SweepLimits) -> SweepReport {
    adversarial_sweep_with_progress(game, limits, &mut |_, _, _| {})
}

/// As [`adversarial_sweep`], calling `progress(done, total, report)` after
/// each of spoiler's first moves.
pub fn adversarial_sweep_with_progress(
    game: &FamilyGame,
    limits: &SweepLimits,
    progress: &mut dyn FnMut(usize, usize, &SweepReport),
) -> SweepReport {
    let mut s = Sweeper {
        game,
        progress,
        limits,
        report: SweepReport::default(),
        trail: Vec::new(),
    };
    s.explore(&game.initial_position(), &LocalPairing::new());
    s.report
}

/// Plays a fixed spoiler line; used to replay a reported failure.
pub fn replay(game: &FamilyGame, spoiler: &[Move]) -> Result<(GamePosition, LocalPairing, Vec<Option<Move>>), GameError> {
    let mut p = game.initial_position();
    let mut pairing = LocalPairing::new();
    let mut replies = Vec::new();
    for mv in spoiler {
        let (q, next, reply) = play_spoiler_move(game, &p, &pairing, mv)?;
        p = q;
        pairing = next;
        replies.push(reply);
    }
    Ok((p, pairing, replies))
}
