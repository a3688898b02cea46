//! Plays one seeded self-play game and audits it move by move.

use std::collections::{HashMap, HashSet};

use qgo_core::experiment::play_game;
use qgo_core::record::replay;
use qgo_core::rules::GameEnd;
use qgo_core::scoring::{area_counts, finalize_pairs};
use qgo_core::variants::{point_symmetric, trigger_neighborhood};
use qgo_core::{
    parse_record, serialize_record, ChoiceRequest, CollapseStep, ExperimentConfig, GameRecord, GameState, GameStatus,
    Move, Ruleset,
};

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub games: u64,
    pub moves: u64,
    pub collapses: u64,
    pub forced: u64,
}

impl Tally {
    pub fn add(self, o: Tally) -> Tally {
        Tally {
            games: self.games + o.games,
            moves: self.moves + o.moves,
            collapses: self.collapses + o.collapses,
            forced: self.forced + o.forced,
        }
    }
}

pub fn audit_game(cfg: &ExperimentConfig, index: usize) -> Result<Tally, String> {
    let (game, _) = play_game(cfg, index).map_err(|e| e.to_string())?;
    let mut tally = Tally {
        games: 1,
        ..Tally::default()
    };
    let fail = |what: String| format!("{} game {index}: {what}", cfg.ruleset);

    // superko: every recorded position distinct
    let hashes = game.history().hashes();
    let distinct: HashSet<u64> = hashes.iter().copied().collect();
    if distinct.len() != hashes.len() {
        return Err(fail("a position repeated".into()));
    }

    // record round trip
    let record = GameRecord::from_game(&game);
    let text = serialize_record(&record);
    let parsed = parse_record(&text).map_err(|e| fail(format!("reparse: {e}")))?;
    if parsed != record {
        return Err(fail("record changed on round trip".into()));
    }
    if serialize_record(&parsed) != text {
        return Err(fail("serializer not canonical".into()));
    }
    let replayed = replay(&parsed).map_err(|e| fail(format!("replay: {e}")))?;
    if replayed.game.position_hash() != game.position_hash() || replayed.game.board() != game.board() {
        return Err(fail("replay reached a different position".into()));
    }

    // step-by-step audit
    let kept: HashMap<u32, _> = record
        .entries
        .iter()
        .filter_map(|e| e.kept_point().map(|k| (e.number, k)))
        .collect();
    let ruleset = cfg.ruleset;
    let size = cfg.size;
    let mut g = GameState::new(record.header.game_config()).map_err(|e| e.to_string())?;
    for entry in &record.entries {
        let before = g.board().clone();
        let mut asked: Vec<ChoiceRequest> = Vec::new();
        let outcome = g
            .apply_move(entry.to_move(), &mut |req: &ChoiceRequest| {
                asked.push(req.clone());
                kept[&req.pair_id.0]
            })
            .map_err(|e| fail(format!("move {}: {e}", entry.number)))?;
        tally.moves += 1;
        tally.collapses += outcome.events.len() as u64;
        g.board()
            .check_integrity()
            .map_err(|e| fail(format!("move {}: integrity: {e}", entry.number)))?;

        let placed = entry.to_move().placed();
        if let Move::PlacePair(a, b) = entry.to_move() {
            let touched = placed.iter().any(|&p| {
                trigger_neighborhood(ruleset, p, size)
                    .unwrap()
                    .into_iter()
                    .any(|n| !before.is_empty_at(n) || n == if p == a { b } else { a })
            });
            if outcome.pair_survived == touched {
                return Err(fail(format!(
                    "move {}: pair survived={} but contact={touched}",
                    entry.number, outcome.pair_survived
                )));
            }
        }

        // step ordering
        let steps: Vec<u8> = outcome.events.iter().map(|e| e.step.number()).collect();
        if steps.windows(2).any(|w| w[0] > w[1]) {
            return Err(fail(format!("move {}: steps out of order {steps:?}", entry.number)));
        }
        for step in [CollapseStep::Mover, CollapseStep::Opponent] {
            let ids: Vec<u32> = outcome
                .events
                .iter()
                .filter(|e| e.step == step)
                .map(|e| e.pair_id.0)
                .collect();
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(fail(format!("move {}: pairs out of order {ids:?}", entry.number)));
            }
        }
        let placed_events: Vec<_> = outcome.events.iter().filter(|e| e.step == CollapseStep::Placed).collect();
        if placed_events.len() > 1 || placed_events.iter().any(|e| e.pair_id.0 != entry.number) {
            return Err(fail(format!("move {}: bad step-3 event", entry.number)));
        }

        // forcing
        for e in &outcome.events {
            if let Some(forced) = &e.forced {
                tally.forced += 1;
                if forced.is_empty() || !forced.contains(&e.kept) {
                    return Err(fail(format!("move {}: kept {} outside {forced:?}", entry.number, e.kept)));
                }
            }
            if e.step == CollapseStep::Placed {
                let kept_earlier: Vec<_> = outcome
                    .events
                    .iter()
                    .filter(|x| x.step != CollapseStep::Placed)
                    .map(|x| x.kept)
                    .collect();
                let adjacent: Vec<_> = placed
                    .iter()
                    .copied()
                    .filter(|p| g.board().neighbors(*p).iter().any(|n| kept_earlier.contains(n)))
                    .collect();
                let expect = (!adjacent.is_empty()).then_some(adjacent);
                if e.forced != expect {
                    return Err(fail(format!("move {}: forced {:?} expected {expect:?}", entry.number, e.forced)));
                }
            }
        }

        // variant shape
        for pair in g.board().pairs() {
            match ruleset {
                Ruleset::Symmetric if point_symmetric(pair.stones[0], size).ok() != Some(pair.stones[1]) => {
                    return Err(fail(format!("move {}: asymmetric pair {:?}", entry.number, pair.stones)));
                }
                Ruleset::SemiQuantum(c) if pair.color != c => {
                    return Err(fail(format!("move {}: {} owns a pair", entry.number, pair.color)));
                }
                _ => {}
            }
        }
    }
    if g.status() == GameStatus::Finished(GameEnd::TwoPasses) {
        let mut pick = |req: &ChoiceRequest| kept[&req.pair_id.0];
        let mut pick_white = |req: &ChoiceRequest| kept[&req.pair_id.0];
        finalize_pairs(&mut g, &mut pick, &mut pick_white).map_err(|e| fail(e.to_string()))?;
    }
    if g.position_hash() != game.position_hash() {
        return Err(fail("audit replay hash differs".into()));
    }

    let (b, w, d) = area_counts(game.board());
    if (b + w + d) as usize != size * size {
        return Err(fail(format!("area {b}+{w}+{d} != {}", size * size)));
    }
    Ok(tally)
}
