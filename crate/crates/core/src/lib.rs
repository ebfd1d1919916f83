//! Variable-processor cup games with exact rational fills.
//!
//! Cups are always kept sorted by fill, highest first, and indexed from 0.

pub mod emptiers;
pub mod engine;
pub mod error;
pub mod fillers;
pub mod game;
pub mod order;
pub mod rational;
pub mod stonegame;

pub use engine::{
    play_moves, play_round, run_game, EmptierStrategy, FillerStrategy, Game, GameTrace,
    RecordLevel, RoundRecord,
};
pub use error::{GameError, MoveViolation, Result};
pub use game::{
    apply_emptier_move, apply_filler_move, backlog, normalize_filler_move, validate_filler_move,
    CupState, EmptierMove, FillerMove, GameVariant, PostFill, PostSegment, VariantKind,
};
pub use rational::{rat, Rational};
pub use stonegame::{apply_stone_move, StoneMove, StoneState};
