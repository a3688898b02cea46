mod common;

use common::{c, fixture, fixture_path};
use qgo_core::qstate::{marginal, LocalState};
use qgo_core::record::{replay_prefix, Divergence, EntryBody};
use qgo_core::scoring::{area_counts, score};
use qgo_core::{
    parse_record, render_ascii, replay, serialize_record, state_expression, BoardState, Color, Coord, ReplayError,
};

fn example1_text() -> String {
    std::fs::read_to_string(fixture_path("example1.qgr")).unwrap()
}

#[test]
fn example1_round_trips_canonically() {
    let record = fixture("example1.qgr");
    let text = serialize_record(&record);
    assert_eq!(parse_record(&text).unwrap(), record);
    assert_eq!(serialize_record(&parse_record(&text).unwrap()), text);
    let without_comments: String = example1_text()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(text, without_comments);
}

#[test]
fn example1_entries_read_as_written() {
    let record = fixture("example1.qgr");
    assert_eq!(
        record.entries[0].body,
        EntryBody::Pair {
            p1: c("D3"),
            p2: c("C2"),
            kept: 1
        }
    );
    assert_eq!(record.entries[28].body, EntryBody::Pass);
    assert_eq!(record.entries[29].color, Color::White);
}

#[test]
fn example1_captures_match_flood_fill() {
    let out = replay(&fixture("example1.qgr")).unwrap();
    let captured: Vec<(u32, Vec<Coord>)> = out
        .outcomes
        .iter()
        .filter(|o| !o.captured.is_empty())
        .map(|o| {
            let mut v = o.captured.clone();
            v.sort();
            (o.number, v)
        })
        .collect();
    assert_eq!(
        captured,
        vec![(23, vec![c("F6")]), (26, vec![c("D6"), c("E6"), c("F5")])]
    );
    let board = out.game.board();
    assert_eq!(board.captures(Color::Black), 1);
    assert_eq!(board.captures(Color::White), 3);
    assert_eq!(board.group_of(c("F6")).unwrap(), vec![c("F6")]);
    assert_eq!(area_counts(board), (20, 16, 0));
    let s = score(&out.game).unwrap();
    assert_eq!(s.signed_margin(), 4.0);
}

#[test]
fn example1_move_16_is_forced() {
    let out = replay(&fixture("example1.qgr")).unwrap();
    let m16 = out.outcomes.iter().find(|o| o.number == 16).unwrap();
    let last = m16.events.last().unwrap();
    assert_eq!(last.kept, c("E5"));
    assert_eq!(last.forced, Some(vec![c("E5")]));
    assert!(m16.events.iter().any(|e| e.kept == c("E6") && e.chooser == Color::Black));
}

#[test]
fn flipped_marker_at_move_16_diverges() {
    let text = example1_text().replace("W 16: E5* B4", "W 16: E5 B4*");
    let record = parse_record(&text).unwrap();
    let err = replay(&record).unwrap_err();
    assert!(
        matches!(
            &err,
            ReplayError::Diverged {
                move_number: 16,
                reason: Divergence::ForcedViolation { pair: 16, .. }
            }
        ),
        "{err:?}"
    );
    assert!(err.to_string().starts_with("move 16:"), "{err}");
}

#[test]
fn occupied_point_in_record_diverges() {
    let record = parse_record("size=9\nB 1: C3* G7\nW 2: C3* A1\n").unwrap();
    let err = replay(&record).unwrap_err();
    assert!(err.to_string().contains("move 2"), "{err}");
}

#[test]
fn example2_lone_stones_collapse_on_the_spot() {
    let record = fixture("example2.qgr");
    let out = replay_prefix(&record, record.entries.len(), false).unwrap();
    for (entry, outcome) in record.entries.iter().zip(&out.outcomes) {
        if let EntryBody::Pair { p2, .. } = entry.body {
            if p2 == c("A1") {
                assert!(!outcome.pair_survived, "move {}", entry.number);
                assert!(out.game.board().is_empty_at(c("A1")));
            }
        }
    }
    assert!(out.outcomes.iter().all(|o| o.captured.is_empty()));
}

#[test]
fn every_prefix_expression_covers_the_board() {
    let record = fixture("example2.qgr");
    let all: Vec<Coord> = BoardState::new(19).unwrap().coords().collect();
    for n in [0, 1, 9, 10, 16, 29, 43, 53, 78, 97, 100] {
        let out = replay_prefix(&record, n, false).unwrap();
        let expr = state_expression(out.game.board());
        let mut covered: Vec<Coord> = expr.factors.iter().flat_map(|f| f.coords()).collect();
        covered.sort();
        assert_eq!(covered, all, "after {n} moves");
    }
    let start = replay_prefix(&record, 0, false).unwrap();
    assert_eq!(state_expression(start.game.board()).factors.len(), 1);
}

#[test]
fn collapsed_stones_have_definite_marginals() {
    let record = fixture("example1.qgr");
    for n in 1..=record.entries.len() {
        let out = replay_prefix(&record, n, false).unwrap();
        let board = out.game.board();
        for e in &out.outcomes[n - 1].events {
            if !out.outcomes[n - 1].captured.contains(&e.kept) {
                assert_eq!(marginal(board, e.kept).unwrap(), LocalState::Stone(e.chooser));
            }
            assert!(!matches!(marginal(board, e.removed).unwrap(), LocalState::Mixed(_)));
        }
    }
}

#[test]
fn figure_2_diagram() {
    let out = replay(&fixture("figure1.qgr")).unwrap();
    assert_eq!(out.game.board().stone_count(), 2);
    let text = render_ascii(out.game.board());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0], "   A B C D E F G H J K L M N O P Q R S T");
    assert_eq!(lines[20], lines[0]);
    let row = |n: usize, stone: Option<(usize, char)>| {
        let mut cells = ['.'; 19];
        if let Some((col, ch)) = stone {
            cells[col] = ch;
        }
        let body: Vec<String> = cells.iter().map(|ch| ch.to_string()).collect();
        format!("{n:>2} {} {n}", body.join(" "))
    };
    assert_eq!(lines[19 - 3 + 1], row(3, Some((3, 'X'))));
    assert_eq!(lines[19 - 2 + 1], row(2, Some((3, 'O'))));
    assert_eq!(lines[19 - 5 + 1], row(5, None));
    let stones: usize = lines[1..20]
        .iter()
        .map(|l| l[3..40].chars().filter(|ch| *ch == 'X' || *ch == 'O').count())
        .sum();
    assert_eq!(stones, 2);
}
