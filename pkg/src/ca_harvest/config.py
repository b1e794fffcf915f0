"""Flat key=value configuration files and run manifests.

Precedence for every registered option: command-line flag, then config
file, then the built-in default. Config keys are the option's dest
name (`lexicon=...`, `threads=4`). The config file is named by
--config or the CA_HARVEST_CONFIG environment variable.

Each run that writes to a real output path also writes a manifest
echoing the resolved configuration plus sha256 digests of its file
inputs, so a replication run can be checked input-by-input. The
timestamp is the one manifest field excluded from reproducibility
guarantees.
"""

from __future__ import annotations

import argparse
import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from ca_harvest.errors import DataFormatError
from ca_harvest.util import sha256_file

ENV_CONFIG = "CA_HARVEST_CONFIG"


def load_config_file(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DataFormatError(
                        f"{path}: line {lineno}: expected key=value"
                    )
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise DataFormatError(f"cannot read config file {path}: {exc}") from None
    return values


def find_config_path(argv: list[str]) -> str | None:
    """Locate --config in raw argv (before real parsing), falling back
    to the CA_HARVEST_CONFIG environment variable."""
    for i, arg in enumerate(argv):
        if arg == "--config":
            if i + 1 < len(argv):
                return argv[i + 1]
            return None
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return os.environ.get(ENV_CONFIG) or None


class OptionRegistry:
    """Tracks which options may be filled from the config file.

    Registered options parse with a None sentinel default so an
    explicit flag always wins; resolve() then fills the gaps from the
    config dict (converting with the option's type) and finally from
    the built-in default.
    """

    def __init__(self):
        self._options: dict[str, tuple[Callable[[str], Any], Any]] = {}

    def add(
        self,
        parser: argparse.ArgumentParser,
        *flags: str,
        dest: str | None = None,
        type: Callable[[str], Any] = str,
        default: Any = None,
        help: str = "",
        **kwargs: Any,
    ) -> None:
        action = parser.add_argument(
            *flags, dest=dest, type=type, default=None, help=help, **kwargs
        )
        self._options[action.dest] = (type, default)

    def resolve(self, args: argparse.Namespace, config: dict[str, str]) -> None:
        for dest, (convert, default) in self._options.items():
            if getattr(args, dest, None) is not None:
                continue
            if dest in config:
                try:
                    setattr(args, dest, convert(config[dest]))
                except (TypeError, ValueError) as exc:
                    raise DataFormatError(
                        f"config key {dest!r}: {exc}"
                    ) from None
            else:
                setattr(args, dest, default)


def manifest_path_for(output: str | None, explicit: str | None) -> str | None:
    if explicit:
        return explicit
    if output and output != "-":
        return output + ".manifest.json"
    return None


def write_manifest(
    path: str,
    subcommand: str,
    args: argparse.Namespace,
    inputs: list[str],
    outputs: list[str],
    counts: dict[str, Any],
) -> None:
    config_echo = {
        key: value
        for key, value in sorted(vars(args).items())
        if key != "func" and isinstance(value, (str, int, float, bool, type(None)))
    }
    digests = {}
    for input_path in inputs:
        if input_path and input_path != "-" and os.path.exists(input_path):
            digests[input_path] = sha256_file(input_path)
    manifest = {
        "subcommand": subcommand,
        "config": config_echo,
        "inputs": digests,
        "outputs": [p for p in outputs if p and p != "-"],
        "counts": counts,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
