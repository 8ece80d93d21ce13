#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

import os
import platform
import subprocess
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import yaml


MANIFEST_NAME = "manifest.yaml"


def source_revision():
    """git revision of the source tree, or the package version outside a checkout"""
    from .. import __version__

    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    try:
        revision = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=root,
            capture_output=True,
            text=True,
            check=True,
            timeout=5,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        revision = ""
    return revision or f"asvplan-{__version__}"


@dataclass
class RunManifest:
    command: str
    config_path: Optional[str]
    seed: int
    out_dir: str
    revision: str = field(default_factory=source_revision)
    argv: list = field(default_factory=lambda: list(sys.argv[1:]))
    threads: str = field(default_factory=lambda: os.environ.get("ASVPLAN_THREADS", "0"))
    host: str = field(default_factory=platform.platform)
    wall_clock_s: float = 0.0
    exit_code: Optional[int] = None
    outcome: Optional[str] = None
    outputs: list = field(default_factory=list)

    def write(self):
        os.makedirs(self.out_dir, exist_ok=True)
        path = os.path.join(self.out_dir, MANIFEST_NAME)
        with open(path, "w", encoding="utf-8", newline="\n") as stream:
            yaml.safe_dump(asdict(self), stream, sort_keys=False)
        return path


def load_manifest(path):
    with open(path, encoding="utf-8") as stream:
        return RunManifest(**yaml.safe_load(stream))
