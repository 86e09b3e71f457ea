//! Ehrenfeucht-Fraisse games with element, set and bounded-set moves.

mod chains;
mod position;
mod solver;
mod strategy;
mod sweep;

pub use chains::{chain, find_equivalent_chain_lengths, ChainBank, ChainView};
pub use position::{
    apply_move, committed_verdict, duplicator_wins_final, final_verdict, legal_moves, FinalVerdict, GameError,
    GamePosition, Move, Pending, Phase, Player, Side, ENUMERATION_LIMIT,
};
pub use solver::{
    position_fingerprint, solve_game, structure_hash, CacheError, GameSolution, GameSolver, StrategyTable,
    TypeInterner, TypeSolver, SOLVER_NODE_LIMIT, SOLVER_ROUND_LIMIT,
};
pub use strategy::{
    bound_reply, duplicator_strategy, locally_winning_check, play_spoiler_move, FamilyGame, LocalFailure,
    LocalPairing,
};
pub use sweep::{adversarial_sweep, adversarial_sweep_with_progress, replay, SweepFailure, SweepLimits, SweepReport};
