#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .launcher import get_args, main
from .manifest import MANIFEST_NAME, RunManifest, load_manifest


__all__ = ["MANIFEST_NAME", "RunManifest", "get_args", "load_manifest", "main"]
