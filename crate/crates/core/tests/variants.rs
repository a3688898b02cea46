mod common;

use common::c;
use qgo_core::rules::SetupError;
use qgo_core::{
    ChoiceRequest, Color, CollapseStep, FirstOption, GameConfig, GameState, IllegalReason, Move, MoveError, RuleFlags,
    Ruleset,
};

fn game(size: usize, ruleset: Ruleset) -> GameState {
    GameState::new(GameConfig::new(size, 0.0, ruleset)).unwrap()
}

#[test]
fn symmetric_moves() {
    let g = game(19, Ruleset::Symmetric);
    assert!(g.is_legal(Move::PlacePair(c("C6"), c("R14"))));
    assert!(!g.is_legal(Move::PlacePair(c("C6"), c("R13"))));
    assert!(!g.is_legal(Move::PlaceSingle(c("C6"))));
    assert!(g.is_legal(Move::PlaceSingle(c("K10"))));
    let moves = g.legal_moves();
    // 180 symmetric pairs, the centre single, pass, resign
    assert_eq!(moves.len(), 183);

    let mut g = game(19, Ruleset::Symmetric);
    g.apply_move(Move::PlacePair(c("R14"), c("C6")), &mut FirstOption).unwrap();
    g.apply_move(Move::PlacePair(c("Q14"), c("D6")), &mut FirstOption).unwrap();
    // one of R14/C6 now holds a stone, the other is free
    let free = if g.board().is_empty_at(c("C6")) { c("C6") } else { c("R14") };
    assert!(g.is_legal(Move::PlaceSingle(free)));
}

#[test]
fn symmetric_rejects_even_boards() {
    let err = GameState::new(GameConfig::new(8, 0.0, Ruleset::Symmetric)).unwrap_err();
    assert!(matches!(err, SetupError::Variant(_)), "{err:?}");
}

#[test]
fn semi_quantum_white_plays_singles() {
    let mut g = game(5, Ruleset::SemiQuantum(Color::Black));
    let black = g.legal_moves();
    assert!(black.iter().all(|m| !matches!(m, Move::PlaceSingle(_))));
    g.apply_move(Move::PlacePair(c("A1"), c("E5")), &mut FirstOption).unwrap();
    let white = g.legal_moves();
    assert!(white.iter().all(|m| matches!(m, Move::PlaceSingle(_) | Move::Pass | Move::Resign)));
    assert_eq!(white.len(), 23 + 2);
    assert_eq!(
        g.begin_move(Move::PlacePair(c("B2"), c("C3"))).unwrap_err(),
        MoveError::Illegal(IllegalReason::PairsNotAllowed)
    );
}

#[test]
fn single_stone_on_empty_board_collapses_nothing() {
    let mut g = game(5, Ruleset::SemiQuantum(Color::White));
    let out = g.apply_move(Move::PlaceSingle(c("C3")), &mut FirstOption).unwrap();
    assert!(out.events.is_empty());
}

#[test]
fn single_stone_collapses_the_touched_pair() {
    let mut g = game(5, Ruleset::SemiQuantum(Color::Black));
    g.apply_move(Move::PlacePair(c("B2"), c("D4")), &mut FirstOption).unwrap();
    let mut asked = Vec::new();
    let out = g
        .apply_move(Move::PlaceSingle(c("B3")), &mut |r: &ChoiceRequest| {
            asked.push(r.clone());
            c("D4")
        })
        .unwrap();
    assert_eq!(asked.len(), 1);
    assert_eq!((asked[0].chooser, asked[0].step), (Color::Black, CollapseStep::Opponent));
    assert_eq!(out.events.len(), 1);
    assert!(g.board().is_empty_at(c("B2")));
}

#[test]
fn single_stone_resolves_mover_pairs_first() {
    // White entangles; Black's lone stone meets one pair of each colour.
    let mut board = qgo_core::BoardState::new(5).unwrap();
    board
        .place_pair(qgo_core::PairId(1), Color::Black, c("B3"), c("E5"), 1)
        .unwrap();
    board
        .place_pair(qgo_core::PairId(2), Color::White, c("D3"), c("A5"), 2)
        .unwrap();
    let mut g = GameState::from_position(
        board,
        Color::Black,
        GameConfig::new(5, 0.0, Ruleset::SemiQuantum(Color::White)),
    )
    .unwrap();
    let out = g.apply_move(Move::PlaceSingle(c("C3")), &mut FirstOption).unwrap();
    let order: Vec<_> = out.events.iter().map(|e| (e.step, e.chooser)).collect();
    assert_eq!(
        order,
        vec![(CollapseStep::Mover, Color::Black), (CollapseStep::Opponent, Color::White)]
    );
}

#[test]
fn weak_contact_includes_diagonals() {
    let mut g = game(9, Ruleset::Weak);
    g.apply_move(Move::PlacePair(c("C3"), c("H8")), &mut FirstOption).unwrap();
    let out = g.apply_move(Move::PlacePair(c("D4"), c("A9")), &mut FirstOption).unwrap();
    assert!(!out.pair_survived);
    let step3 = out.events.last().unwrap();
    assert_eq!(step3.step, CollapseStep::Placed);
    // C3 kept, but only diagonal to D4: the keep rule stays orthogonal
    assert_eq!(out.events[0].kept, c("C3"));
    assert_eq!(step3.forced, None);

    let mut g = GameState::new(GameConfig {
        flags: RuleFlags {
            weak_diagonal_forcing: true,
            ..RuleFlags::default()
        },
        ..GameConfig::new(9, 0.0, Ruleset::Weak)
    })
    .unwrap();
    g.apply_move(Move::PlacePair(c("C3"), c("H8")), &mut FirstOption).unwrap();
    let out = g.apply_move(Move::PlacePair(c("D4"), c("A9")), &mut FirstOption).unwrap();
    assert_eq!(out.events.last().unwrap().forced, Some(vec![c("D4")]));
}

#[test]
fn standard_ignores_diagonal_contact() {
    let mut g = game(9, Ruleset::Standard);
    g.apply_move(Move::PlacePair(c("C3"), c("H8")), &mut FirstOption).unwrap();
    let out = g.apply_move(Move::PlacePair(c("D4"), c("A9")), &mut FirstOption).unwrap();
    assert!(out.pair_survived);
    assert!(out.events.is_empty());
}
