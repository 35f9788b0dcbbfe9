# Copyright 2024-2025 NetCracker Technology Corporation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import json
import logging
import os
import sys
from enum import Enum
from pathlib import Path

from robot.api import ExecutionResult

separator = "\n" + "*" * 100 + "\n"

log = logging.getLogger("AcceptanceReport")


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"


def collect_tests(suite, prefix=""):
    """Flatten a result suite into (suite path, test) pairs."""
    path = f'{prefix}.{suite.name}' if prefix else suite.name
    rows = [(path, test) for test in suite.tests]
    for child in suite.suites:
        rows += collect_tests(child, path)
    return rows


def format_report(suite, rows) -> str:
    stats = suite.statistics
    text = (f'Acceptance: {suite.name}\t|\tPassed: {stats.passed}\t|\tFailed: {stats.failed}'
            f'\t|\tSkipped: {stats.skipped}\n')
    text += separator
    for path, test in rows:
        text += f'{path} :: {test.name}\t|\tStatus: {test.status}\t|\tTags: {", ".join(test.tags)}\n'
        if test.status == Status.FAIL and test.message:
            text += f'\t{test.message.replace(chr(10), " ")}\n'
    text += separator
    text += "RESULT: ACCEPTANCE FAILED\n" if suite.status == Status.FAIL else "RESULT: ACCEPTANCE PASSED\n"
    return text


def analyze_result(output_dir) -> int:
    output_dir = Path(output_dir)
    try:
        result = ExecutionResult(str(output_dir / "output.xml"))
    except Exception as e:
        log.error(f'Cannot open acceptance results in {output_dir}: {e}')
        return 2
    suite = result.suite
    rows = collect_tests(suite)
    (output_dir / "result.txt").write_text(format_report(suite, rows))
    checks = [{"suite": path, "test": test.name, "status": test.status, "tags": list(test.tags),
               "message": test.message} for path, test in rows]
    (output_dir / "result.json").write_text(json.dumps(checks, indent=2) + "\n")
    log.debug(f'Acceptance report written to {output_dir}')
    return 1 if suite.status == Status.FAIL else 0


if __name__ == "__main__":
    logging.basicConfig(level=os.getenv("LANDAU_LOG_LEVEL", "INFO"))
    sys.exit(analyze_result(sys.argv[1] if len(sys.argv) > 1 else os.getenv("LANDAU_OUTPUT_DIR", "./output")))
