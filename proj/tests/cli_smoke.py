# Copyright The carray Authors.
# SPDX-License-Identifier: Apache-2.0
"""Exit codes, outputs and warm-cache behaviour of the carray command."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

failures = []


def run(*args):
    return subprocess.run([CARRAY, *map(str, args)], capture_output=True, text=True)


def check(name, ok, detail=""):
    print("%s  %s %s" % ("ok  " if ok else "FAIL", name, detail))
    if not ok:
        failures.append(name)


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cache = tmp / "cache"
        cold = run("simulate", "--config", QUICK, "--out", tmp / "a", "--cache", cache)
        check("simulate exits 0", cold.returncode == 0, cold.stderr)
        for f in ("sparams.s4p", "sparams.csv", "summary.svg", "metadata.json"):
            check("simulate writes " + f, (tmp / "a" / f).is_file())
        meta = json.loads((tmp / "a" / "metadata.json").read_text())
        check("cold run calls the solver", meta["solver_calls"] == 21, str(meta["solver_calls"]))

        warm = run("simulate", "--config", QUICK, "--out", tmp / "b", "--cache", cache)
        meta = json.loads((tmp / "b" / "metadata.json").read_text())
        check("warm run makes no solver calls", warm.returncode == 0 and meta["solver_calls"] == 0)
        check("warm run reports cache hits", meta["cache"]["hits"] == 21)
        for f in ("sparams.s4p", "summary.svg"):
            same = (tmp / "a" / f).read_bytes() == (tmp / "b" / f).read_bytes()
            check("warm " + f + " byte-identical", same)

        bad = tmp / "bad.json"
        cases = {
            "unknown key": '{"design": {"Wx": 1}}',
            "wrong type": '{"ga": {"population": "many"}}',
            "notch too deep": '{"design": {"h1": 4.725}}',
            "broken json": '{"design": ',
        }
        for name, text in cases.items():
            bad.write_text(text)
            r = run("simulate", "--config", bad, "--out", tmp / "x")
            check(name + " exits 2", r.returncode == 2, r.stderr.strip())
            check(name + " writes nothing", not (tmp / "x").exists())
        check("missing config exits 2", run("simulate", "--config", tmp / "none.json").returncode == 2)
        check("unknown study exits 2", run("sweep", "depth", "--config", QUICK).returncode == 2)
        check("unknown flag exits 2", run("simulate", "--colour").returncode == 2)
        check("no subcommand exits 2", run().returncode == 2)
        check("empty report dir exits 2", run("report", tmp / "a").returncode == 2)
    return 1 if failures else 0


if __name__ == "__main__":
    CARRAY, QUICK = sys.argv[1], sys.argv[2]
    sys.exit(main())
