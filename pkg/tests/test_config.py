"""Config file handling, flag precedence, run manifests."""

import argparse
import json

import pytest

from ca_harvest.config import (
    OptionRegistry,
    find_config_path,
    load_config_file,
    manifest_path_for,
    write_manifest,
)
from ca_harvest.errors import DataFormatError


def test_load_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("# comment\nlexicon = words.txt\nthreads=4\n\nthreshold = 0.9\n")
    assert load_config_file(path) == {
        "lexicon": "words.txt",
        "threads": "4",
        "threshold": "0.9",
    }


def test_load_config_file_rejects_bad_lines(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("just a value\n")
    with pytest.raises(DataFormatError):
        load_config_file(path)


def test_find_config_path_prefers_argv_over_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CA_HARVEST_CONFIG", "/env/path.conf")
    assert find_config_path(["ingest", "--config", "cli.conf"]) == "cli.conf"
    assert find_config_path(["ingest", "--config=cli.conf"]) == "cli.conf"
    assert find_config_path(["ingest"]) == "/env/path.conf"
    monkeypatch.delenv("CA_HARVEST_CONFIG")
    assert find_config_path(["ingest"]) is None


def registry_and_args(argv, config):
    parser = argparse.ArgumentParser()
    registry = OptionRegistry()
    registry.add(parser, "--lexicon", help="")
    registry.add(parser, "--threads", type=int, default=2, help="")
    registry.add(parser, "--threshold", type=float, default=0.95, help="")
    args = parser.parse_args(argv)
    registry.resolve(args, config)
    return args


def test_flag_beats_config_beats_default():
    args = registry_and_args(
        ["--threads", "8"], {"threads": "3", "threshold": "0.5"}
    )
    assert args.threads == 8  # flag wins
    assert args.threshold == 0.5  # config fills the gap
    assert args.lexicon is None  # nothing anywhere

    args = registry_and_args([], {})
    assert args.threads == 2  # built-in default survives


def test_config_conversion_errors_are_data_errors():
    with pytest.raises(DataFormatError):
        registry_and_args([], {"threads": "many"})


def test_manifest_path_for():
    assert manifest_path_for("out.jsonl", None) == "out.jsonl.manifest.json"
    assert manifest_path_for("out.jsonl", "m.json") == "m.json"
    assert manifest_path_for("-", None) is None
    assert manifest_path_for(None, None) is None
    assert manifest_path_for("-", "m.json") == "m.json"


def test_write_manifest_contents(tmp_path):
    data = tmp_path / "input.jsonl"
    data.write_text('{"id":"a","body":"text"}\n')
    out = tmp_path / "m.json"
    args = argparse.Namespace(
        threads=4, lexicon=str(data), func=lambda: None, flag=True
    )
    write_manifest(out, "ingest", args, [str(data)], ["out.jsonl"], {"lines": 1})
    manifest = json.loads(out.read_text())
    assert manifest["subcommand"] == "ingest"
    assert manifest["counts"] == {"lines": 1}
    assert manifest["config"]["threads"] == 4
    assert "func" not in manifest["config"]
    assert len(manifest["inputs"][str(data)]) == 64
    assert manifest["outputs"] == ["out.jsonl"]
    assert manifest["timestamp"].endswith("+00:00")


def test_write_manifest_is_deterministic_apart_from_timestamp(tmp_path):
    data = tmp_path / "input.jsonl"
    data.write_text("payload\n")
    args = argparse.Namespace(x=1)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_manifest(a, "cmd", args, [str(data)], [], {})
    write_manifest(b, "cmd", args, [str(data)], [], {})
    ma, mb = json.loads(a.read_text()), json.loads(b.read_text())
    ma.pop("timestamp"), mb.pop("timestamp")
    assert ma == mb
