import json

import pytest

import fixtures
from sqlgrow.cli import main
from sqlgrow.instances import read_jsonl


@pytest.fixture()
def workspace(tmp_path):
    dbs = tmp_path / "dbs"
    fixtures.build_all(dbs)
    seeds = tmp_path / "seeds.json"
    records = [
        {"question": q, "evidence": "", "SQL": sql, "db_id": "olympics"}
        for q, sql in fixtures.SEED_QUESTIONS["olympics"][:3]
    ]
    seeds.write_text(json.dumps(records))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "seeds": str(seeds),
        "db_dir": str(dbs),
        "out_dir": str(tmp_path / "out"),
        "rounds": 1,
        "global_seed": 5,
    }))
    return tmp_path, cfg


def test_run_subcommand(workspace, capsys):
    tmp_path, cfg = workspace
    assert main(["run", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    assert (out / "dataset.jsonl").is_file()
    assert (out / "manifest.json").is_file()
    assert (out / "feature_report.txt").is_file()
    assert "dataset:" in capsys.readouterr().out


def test_stats_subcommand(workspace, capsys):
    tmp_path, cfg = workspace
    main(["run", "--config", str(cfg)])
    code = main(["stats", "--dataset", str(tmp_path / "out" / "dataset.jsonl")])
    assert code == 0
    text = capsys.readouterr().out
    assert "Tables" in text and "Nest." in text
    assert "Dedup removed" in text


def test_verify_subcommand(workspace):
    tmp_path, cfg = workspace
    main(["run", "--config", str(cfg)])
    code = main(["verify", "--dataset", str(tmp_path / "out" / "dataset.jsonl"),
                 "--db-dir", str(tmp_path / "dbs")])
    assert code == 0


def test_ingest_subcommand(workspace):
    tmp_path, cfg = workspace
    assert main(["ingest", "--config", str(cfg)]) == 0
    seeds = read_jsonl(tmp_path / "out" / "seeds.jsonl")
    assert len(seeds) == 3


def test_staged_eqe_then_oge(workspace):
    tmp_path, cfg = workspace
    main(["ingest", "--config", str(cfg)])
    assert main(["eqe", "--config", str(cfg),
                 "--in", str(tmp_path / "out" / "seeds.jsonl")]) == 0
    assert main(["oge", "--config", str(cfg),
                 "--in", str(tmp_path / "out" / "eqe.jsonl"), "--round", "1"]) == 0
    evolved = read_jsonl(tmp_path / "out" / "oge-1.jsonl")
    assert all(i.stage == "OGE-1" for i in evolved)
    assert (tmp_path / "out" / "state-1.json").is_file()


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rounds": -3}))
    assert main(["run", "--config", str(bad)]) == 1


def test_stage_failure_exit_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "seeds": str(tmp_path / "missing.json"),
        "db_dir": str(tmp_path),  # exists but holds no databases
        "out_dir": str(tmp_path / "out"),
    }))
    assert main(["run", "--config", str(cfg)]) == 2


def test_staged_cot_then_dedup(workspace):
    tmp_path, cfg = workspace
    main(["ingest", "--config", str(cfg)])
    main(["eqe", "--config", str(cfg),
          "--in", str(tmp_path / "out" / "seeds.jsonl")])
    assert main(["cot", "--config", str(cfg),
                 "--in", str(tmp_path / "out" / "eqe.jsonl")]) == 0
    kept = read_jsonl(tmp_path / "out" / "cot.jsonl")
    assert kept and all(i.cot for i in kept)
    assert main(["dedup", "--config", str(cfg),
                 "--in", str(tmp_path / "out" / "cot.jsonl")]) == 0
    deduped = read_jsonl(tmp_path / "out" / "dedup.jsonl")
    assert 0 < len(deduped) <= len(kept)
