"""Exercises the quantum_go extension module end to end.

Build and run from the workspace root:

    cargo build -p qgo-python --release
    cp target/release/libquantum_go.so crates/python/python/quantum_go.so
    python3 crates/python/python/smoke_test.py
"""

import pathlib
import sys

import quantum_go as qg

FIXTURES = pathlib.Path(__file__).resolve().parents[3] / "fixtures"


def forced_choice():
    game = qg.Game(size=19, komi=7.5)
    game.play("D3", "C5")
    seen = []

    def keep(request):
        seen.append(request)
        return request["allowed"][0]

    out = game.play("D2", "E6", choose=keep)
    assert [(r["chooser"], r["pair"]) for r in seen] == [("black", 1), ("white", 2)], seen
    assert seen[1]["forced"] == ["D2"]
    assert sorted(game.stones()) == [("D2", "white"), ("D3", "black")]
    assert len(out["events"]) == 2
    assert game.to_move == "black"


def staged_move():
    game = qg.Game(size=5, komi=0.5)
    game.play("B2", "D4")
    pending = game.begin_move("B3", "C3")
    request = pending.request
    assert request is not None and request["pair"] == 1, request
    while pending.request is not None:
        pending.answer(pending.request["allowed"][-1])
    game.commit(pending)
    assert sorted(game.stones()) == [("C3", "white"), ("D4", "black")], game.stones()


def illegal_moves():
    game = qg.Game(size=5)
    game.play("A1", "B2")
    assert not game.is_legal("A1", "C3")
    try:
        game.play("A1", "C3")
    except qg.IllegalMoveError as err:
        assert err.args[1] == "occupied", err.args
    else:
        raise AssertionError("occupied point accepted")
    assert game.move_number == 2


def passed_out_game():
    game = qg.Game(size=5, komi=0.5)
    game.play("C2", "C4")
    game.play("B3", "D3")
    game.play("pass")
    game.play("pass")
    assert game.is_over
    events = game.finalize(choose=lambda r: r["options"][0])
    assert len(events) == 2
    assert game.pairs() == []
    score = game.score()
    assert score["result"] == game.result(), (score, game.result())
    again = qg.replay(game.record())
    assert again.result() == game.result()


def records():
    text = (FIXTURES / "example1.qgr").read_text()
    game = qg.replay(text)
    assert game.result() == "B+4", game.result()
    start = qg.replay(text, moves=0)
    assert start.stones() == []
    try:
        qg.replay("size=5\nB 1: Z9 A1\n")
    except qg.RecordError:
        pass
    else:
        raise AssertionError("bad record accepted")
    figure = qg.replay((FIXTURES / "figure7.qgr").read_text())
    assert figure.state_expression().startswith("(|0>_{A1,A3,B2,B3,C1,C3})")


def experiment():
    csv, summary = qg.run_experiment(variant="semi-quantum", size=5, komi=0.5, games=6, seed=3)
    again, _ = qg.run_experiment(variant="semi-quantum", size=5, komi=0.5, games=6, seed=3)
    assert csv == again
    assert summary["black_wins"] + summary["white_wins"] + summary["draws"] == 6


def main():
    checks = [forced_choice, staged_move, illegal_moves, passed_out_game, records, experiment]
    failed = 0
    for check in checks:
        try:
            check()
            print(f"ok   {check.__name__}")
        except Exception as err:  # noqa: BLE001
            failed += 1
            print(f"FAIL {check.__name__}: {err!r}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
