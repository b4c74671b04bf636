#!/usr/bin/env python3
"""Prepend the Apache-2.0 header to every C++ source and header in the repository.

Files that already carry the header are left untouched, so the script is safe to re-run.
"""
import pathlib
import sys

HEADER = """/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
"""

ROOTS = ("core", "tools", "tests", "benchmarks")
SUFFIXES = {".hpp", ".cpp"}


def main() -> int:
    repo = pathlib.Path(__file__).resolve().parent.parent
    changed = 0
    for root in ROOTS:
        for path in sorted((repo / root).rglob("*")):
            if path.suffix not in SUFFIXES or not path.is_file():
                continue
            text = path.read_text(encoding="utf-8")
            if text.startswith("/* Copyright"):
                continue
            path.write_text(HEADER + "\n" + text, encoding="utf-8")
            changed += 1
    print(f"added header to {changed} file(s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
