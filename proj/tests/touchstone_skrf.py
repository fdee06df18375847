# Copyright The carray Authors.
# SPDX-License-Identifier: Apache-2.0
"""Reads .s4p files with scikit-rf and checks every number survives.

Arguments: either the carray binary and a config to simulate, or .s4p paths.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

SKIP = 77


def tokens(path):
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("!", 1)[0]
        if line.strip() and not line.startswith("#"):
            out.extend(line.split())
    return out


def check(s4p):
    import skrf
    net = skrf.Network(str(s4p))
    got = []
    for k, f in enumerate(net.f):
        got.append("%.12e" % (f / 1e9))
        for i in range(4):
            for j in range(4):
                v = net.s[k, i, j]
                got.append("%.12e" % v.real)
                got.append("%.12e" % v.imag)
    if net.nports != 4 or net.z0[0, 0] != 50:
        print("FAIL: %s: unexpected ports or reference impedance" % s4p)
        return False
    expected = tokens(s4p)
    if got != expected:
        print("FAIL: %s: scikit-rf values differ from the file" % s4p)
        return False
    print("ok  %s: %d frequencies, %d numbers identical" % (s4p, len(net.f), len(got)))
    return True


def main():
    try:
        import skrf  # noqa: F401
    except ImportError:
        print("scikit-rf not installed")
        return SKIP
    if sys.argv[1].endswith(".s4p"):
        return 0 if all([check(p) for p in sys.argv[1:]]) else 1
    carray, config = sys.argv[1], sys.argv[2]
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([carray, "simulate", "--config", config, "--out", tmp, "--cache", ""],
                       check=True, stdout=subprocess.DEVNULL)
        return 0 if check(Path(tmp) / "sparams.s4p") else 1

if __name__ == "__main__":
    sys.exit(main())
