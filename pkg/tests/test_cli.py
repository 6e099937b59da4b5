import json

import pytest

import convoforge as cf
from convoforge.cli import main


def test_validate_default_fixtures(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "ok:" in out and "assembly" in out


def test_validate_reports_dangling_slot(tmp_path, capsys):
    doc = json.loads(cf.default_schema_text())
    doc["dialogues"][0]["utterances"].append("hand me the {tool}")
    bad = tmp_path / "bad.schema.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", "--schema", str(bad)]) == 1
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert payload["error"]["code"] == "VALIDATION"
    assert "tool" in payload["error"]["message"]


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", "--schema", str(tmp_path / "none.json")]) == 1
    assert json.loads(capsys.readouterr().err)["error"]["code"] == "IO"


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["experiment"])  # missing required flags
    assert exc.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["dance"])
    assert exc.value.code == 2


def test_experiment_smoke_and_determinism(tmp_path, capsys):
    args = ["experiment", "--n", "2", "--error-rate", "0.2", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    out = capsys.readouterr().out
    assert "relative_time_delta" in out
    assert (tmp_path / "a_transcripts" / "conversation-7.jsonl").exists()


def test_replay_renders_transcript(tmp_path, capsys):
    assert (
        main(
            ["experiment", "--n", "1", "--error-rate", "0", "--seed", "3",
             "--out", str(tmp_path / "r.csv")]
        )
        == 0
    )
    capsys.readouterr()
    transcript = tmp_path / "r_transcripts" / "conversation-3.jsonl"
    assert main(["replay", str(transcript)]) == 0
    out = capsys.readouterr().out
    assert "user: could you bring me the base plate" in out
    assert "total_time_s=" in out


def test_replay_corrupt_file(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert main(["replay", str(bad)]) == 1
    assert json.loads(capsys.readouterr().err)["error"]["code"] == "REPLAY"
