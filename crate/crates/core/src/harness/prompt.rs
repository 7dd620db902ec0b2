//! Prompt text handed to external agents.

use crate::board::{BoardState, Player};

/// Rules, board encoding and answer format for the side `player`.
pub fn system_prompt(player: Player) -> String {
    format!(
        "You are playing four-in-a-row as {player} ({sym}).\n\
         \n\
         Rules: the board has 4 rows and 9 columns. Players take turns placing one mark \
         (W or B) on any empty square; there is no gravity. White moves first. Four marks of \
         one colour in an unbroken horizontal, vertical or diagonal line win. A full board \
         with no line is a draw.\n\
         \n\
         Board encoding: rows are listed top to bottom and separated by '/'. Within a row, \
         W and B are pieces and a digit gives a run of empty squares. The empty board is 9/9/9/9.\n\
         \n\
         Moves: write m <row> <col> with zero-based indices, so m 0 0 is the top-left square \
         and m 3 8 the bottom-right one. You may reason first. Only the move inside the last \
         <next_move></next_move> tags is played.",
        sym = player.symbol()
    )
}

pub fn user_prompt(state: &BoardState) -> String {
    let p = state.to_move();
    format!(
        "The current board state is:\nFEN: {}\n\nCurrent player: {p} ({})",
        state.to_fen(),
        p.symbol()
    )
}
