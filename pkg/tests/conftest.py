import os
import time

import pytest

from cqd.generate import generate
from cqd.tablebase import SubModelSet

THREE_PIECE = ("KQvK", "KRvK", "KBvK", "KNvK", "KPvK")
ACCEPTANCE_TARGETS = ("KQvK", "KRvK", "KBvK", "KNvK", "KPvK",
                      "KQvKR", "KQvKQ", "KRvKR", "KRvKN", "KQQvK")


@pytest.fixture(scope="session")
def small_chain():
    """KvK and every 3-piece table, generated in memory."""
    sub = SubModelSet()
    stats = {}
    for name in ("KvK",) + THREE_PIECE:
        t, st = generate(name, sub)
        sub.add(t)
        stats[name] = st
    return sub, stats


@pytest.fixture(scope="session")
def full_chain(tmp_path_factory):
    """The acceptance target closure built on disk by the chain builder.

    Takes several minutes per 4-piece table on a single core; every test
    that needs 4-piece tables shares this one build.
    """
    from pathlib import Path

    from cqd.chain import build_chain, load_manifest

    prebuilt = os.environ.get("CQD_ACCEPTANCE_TB")
    if prebuilt:
        # Reuse an earlier build of the same targets (development shortcut).
        return Path(prebuilt), load_manifest(prebuilt), None
    out = tmp_path_factory.mktemp("chain")
    t0 = time.perf_counter()
    manifest = build_chain(ACCEPTANCE_TARGETS, out)
    return out, manifest, time.perf_counter() - t0


CRITERIA = {}


def record(n: int, ok: bool, detail: str) -> None:
    CRITERIA[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
