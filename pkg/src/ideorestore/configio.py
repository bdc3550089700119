"""Declarative run configs and run manifests.

One YAML file per run; flags override top-level keys and environment
variables with the ``IDEORESTORE_`` prefix override nested keys
(``IDEORESTORE_TRAIN__ALPHA=50`` sets ``train.alpha``). Every artifact
directory gets a manifest recording the command, seed, and a content hash
of its inputs: identical manifests mean identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import yaml

ENV_PREFIX = "IDEORESTORE_"


def load_config(path: str | Path) -> dict:
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        cfg = yaml.safe_load(f) or {}
    if not isinstance(cfg, dict):
        raise ValueError(f"config root must be a mapping: {path}")
    cfg["_config_dir"] = str(path.parent.resolve())
    cfg["_config_path"] = str(path.resolve())
    return apply_env_overrides(cfg)


def apply_env_overrides(cfg: dict, environ: dict | None = None) -> dict:
    env = environ if environ is not None else os.environ
    for key, raw in env.items():
        if not key.startswith(ENV_PREFIX):
            continue
        dotted = key[len(ENV_PREFIX) :].lower().split("__")
        node = cfg
        for part in dotted[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"cannot override non-mapping config key via {key}")
        node[dotted[-1]] = yaml.safe_load(raw)
    return cfg


def resolve_path(cfg: dict, p: str | Path) -> Path:
    """Resolve a path from the config; relative paths follow the working directory."""
    return Path(p).resolve()


def _file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: str
    seed: int
    inputs_hash: str
    out_dir: str

    @classmethod
    def build(cls, command: str, cfg: dict, seed: int, out_dir: str | Path, input_files: list[Path] = ()) -> "RunManifest":
        public = {k: v for k, v in sorted(cfg.items()) if not k.startswith("_")}
        h = hashlib.sha256()
        h.update(json.dumps(public, sort_keys=True, ensure_ascii=False, default=str).encode("utf-8"))
        for p in sorted(Path(f) for f in input_files):
            h.update(str(p.name).encode())
            if p.exists():
                h.update(_file_digest(p).encode())
        return cls(
            command=command,
            config_path=cfg.get("_config_path", ""),
            seed=seed,
            inputs_hash=h.hexdigest(),
            out_dir=str(out_dir),
        )

    def write(self) -> Path:
        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "manifest.json"
        path.write_text(
            json.dumps(
                {
                    "command": self.command,
                    "config_path": self.config_path,
                    "seed": self.seed,
                    "inputs_hash": self.inputs_hash,
                    "out_dir": self.out_dir,
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        return path
