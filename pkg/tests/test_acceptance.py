"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run with pytest (the lines are collected in a summary section) or directly
with ``python3 tests/test_acceptance.py``.
"""

import itertools
import json
import math
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES  # noqa: E402
from corpus import CORPUS, EVEN, N, N2, NUM23, ZERO, over_n, over_trivial  # noqa: E402
from katofan import serialize as ser  # noqa: E402
from katofan.abelian import FGAbelianGroup, GroupHom, IntMatrix, cokernel  # noqa: E402
from katofan.charts import (  # noqa: E402
    ChartDatum,
    construct_neat_chart,
    gp_cokernel,
    log_etale_condition,
    log_smooth_condition,
    neatness_check,
    torsion_invertible,
)
from katofan.cli import main  # noqa: E402
from katofan.dsl import MonoidDecl, parse, unparse  # noqa: E402
from katofan.fan import fan_isomorphic, spec  # noqa: E402
from katofan.groupoid import build_truncation, facelem_check, join, verify_groupoid  # noqa: E402
from katofan.monoid import FineMonoid, MonoidHom, faces, is_isomorphic, is_saturated, membership, saturate, sharpen  # noqa: E402
from katofan.oracles import coset_cokernel, membership_exhaustive  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


def record(n: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_face_lattices():
    start = time.perf_counter()
    counts = [len(faces(FineMonoid.free(k))) for k in range(5)]
    elapsed = time.perf_counter() - start
    ok = counts == [2 ** k for k in range(5)] and elapsed < 1
    record(1, ok, f"faces(N^k) sizes {counts} for k=0..4 in {elapsed:.3f}s (limit 1s)")


def test_2_spec_sharpening_invariance():
    bad = [n for n, m in CORPUS.items() if fan_isomorphic(spec(m), spec(sharpen(m)[0])) is None]
    record(2, not bad, f"spec(P) ~ spec(sharpen(P)) on {len(CORPUS) - len(bad)}/{len(CORPUS)} corpus monoids")


def test_3_join_of_one():
    bad = [n for n, m in CORPUS.items() if fan_isomorphic(join([over_trivial(m)]).fan, spec(m)) is None]
    record(3, not bad, f"join(Q) ~ spec(Q) on {len(CORPUS) - len(bad)}/{len(CORPUS)} corpus monoids")


def test_4_facelem():
    start = time.perf_counter()
    members = {n: over_trivial(m) for n, m in CORPUS.items()}
    checks = failures = 0
    for length in (1, 2, 3):
        for names in itertools.product(sorted(members), repeat=length):
            for split in range(length):
                checks += 1
                r = facelem_check([members[n] for n in names], split)
                if not (r.passed and r.witness is not None):
                    failures += 1
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 300
    record(4, ok, f"facelem_check {checks - failures}/{checks} tuple/split pairs in {elapsed:.1f}s (limit 300s)")


def _chart_sets(make):
    charts = [make(m) for _, m in sorted(CORPUS.items())]
    for size in (1, 2):
        yield from itertools.combinations(charts, size)


def test_5_groupoid_axioms():
    results = []
    for base, make in ((ZERO, over_trivial), (N, over_n)):
        for charts in _chart_sets(make):
            rep = verify_groupoid(build_truncation(base, list(charts)))
            lifts_one = all(v == 1 for v in rep.unique_lift_counts.values())
            results.append(rep.passed and lifts_one)
    ok = all(results)
    record(5, ok, f"verify_groupoid passes on {sum(results)}/{len(results)} chart sets of size <= 2 over 0 and N")


def test_6_cokernel_oracle():
    rng = random.Random(20260101)
    agree = 0
    for _ in range(1000):
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
        h = GroupHom.between(FGAbelianGroup.free(n), FGAbelianGroup.free(m), IntMatrix.from_rows(rows, n))
        agree += cokernel(h) == coset_cokernel(rows)
    record(6, agree == 1000, f"cokernel equals the coset oracle on {agree}/1000 seeded matrices")


def test_7_saturation():
    a = is_isomorphic(saturate(NUM23), N) is not None
    b = is_isomorphic(saturate(EVEN), N2) is not None
    c = all(saturate(saturate(m)) == saturate(m) for m in CORPUS.values())
    detail = (f"sat<2,3> ~ N: {a}; sat<(2,0),(1,1),(0,2)> ~ N^2: {b} "
              f"(it is saturated already: {is_saturated(EVEN)}); idempotent: {c}")
    record(7, a and b and c, detail)


def test_8_chart_arithmetic():
    ok = True
    for n in range(1, 7):
        for p in (0, 2, 3, 5):
            u = MonoidHom(N, N, [(n,)])
            ok &= torsion_invertible(u, p) == (p == 0 or math.gcd(n, p) == 1)
    homs = [MonoidHom(N, N, [(n,)]) for n in range(1, 7)] + [
        MonoidHom(ZERO, N, []),
        MonoidHom(N, N2, [(1, 1)]),
        MonoidHom(N, N2, [(2, 0)]),
        MonoidHom(N2, N2, [(2, 1), (0, 3)]),
        MonoidHom.identity(N2),
    ]
    fired = set()
    for i, u in enumerate(homs):
        for p in (0, 2, 3, 5):
            r = log_smooth_condition(u, p)
            if log_etale_condition(u, p):
                ok &= r.strict and r.kato
            ok &= r.discrepancy == (not gp_cokernel(u).is_finite)
            if r.discrepancy:
                fired.add(i)
    detail = (f"torsion_invertible(xn, p) matches gcd rule for n=1..6, p in 0,2,3,5; "
              f"etale => smooth on {len(homs)} homs; discrepancy fired on exactly the {len(fired)} infinite-cokernel homs")
    record(8, ok, detail)


def _fs_data():
    out = []
    for m in CORPUS.values():
        if m.ambient.torsion or not is_saturated(m):
            continue
        z = MonoidHom(ZERO, m, [])
        ident = MonoidHom.identity(m)
        out.append(ChartDatum(z, MonoidHom.identity(ZERO), ident, z))
        out.append(ChartDatum(ident, ident, ident, ident))
        for g in m.generators:
            phi = MonoidHom(N, m, [g])
            out.append(ChartDatum(phi, MonoidHom.identity(N), ident, phi))
    return out


def test_9_neatness():
    data = _fs_data()
    good = sum(neatness_check(construct_neat_chart(d)).neat for d in data)
    idn = MonoidHom.identity(N)
    times2 = ChartDatum(MonoidHom(N, N, [(2,)]), MonoidHom(N, N, [(2,)]), idn, idn)
    r = neatness_check(times2)
    diag_ok = not r.neat and "cokernel mismatch Z/2 vs 0" in r.diagnostics
    record(9, good == len(data) and diag_ok,
           f"constructed charts neat on {good}/{len(data)} fs corpus data; x2 diagnostic: {'; '.join(r.diagnostics)}")


def _ambient_points(amb: FGAbelianGroup):
    ranges = [range(-6, 7)] * amb.rank + [range(-6, 7)] * len(amb.torsion)
    for x in itertools.product(*ranges):
        yield x


def test_10_membership():
    checked = disagree = unknown_bad = 0
    for m in CORPUS.values():
        amb = m.ambient
        seen = set()
        for x in _ambient_points(amb):
            x = amb.reduce(x)
            if x in seen:
                continue
            seen.add(x)
            checked += 1
            got = membership(m, x, bound=12)
            oracle = membership_exhaustive(amb, m.generators, x, bound=12)
            if got.status == "true":
                valid = amb.combination(got.certificate, m.generators) == x
                disagree += not valid or oracle is False
            elif got.status == "false":
                disagree += oracle is True
            else:
                unknown_bad += oracle is not None
    ok = not disagree and not unknown_bad
    record(10, ok, f"membership agrees with the exhaustive oracle on {checked - disagree} of {checked} points; "
                   f"unknown where the oracle decides: {unknown_bad}")


def _cli(*argv):
    import contextlib
    import io
    buf, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, buf.getvalue()


def test_11_cli(tmp_path):
    scripts = sorted(GOLDEN.glob("*.kf"))
    round_trips = 0
    emitted = 0
    for path in scripts:
        script = parse(path.read_text())
        text = unparse(script)
        round_trips += parse(text) == script and unparse(parse(text)) == text
        for st in script.statements:
            if isinstance(st, MonoidDecl):
                m = FineMonoid(FGAbelianGroup(st.rank, st.torsion), st.gens)
                doc = json.loads(json.dumps(ser.document("emit", ser.monoid_tree(m))))
                ser.validate(doc)
                emitted += ser.ingest(doc["result"]) == m
    decls = sum(isinstance(s, MonoidDecl) for p in scripts for s in parse(p.read_text()).statements)
    bad = tmp_path / "bad.kf"
    bad.write_text("monoid M in Z^2 { gens (1,0,0) }\n")
    dom = tmp_path / "dom.kf"
    dom.write_text("monoid N in Z { gens (1) }\nhom u : N -> N { gen (1) -> (-1) }\n")
    codes = (_cli("run", GOLDEN / "homs.kf")[0], _cli("snf", dom)[0], _cli("faces", bad)[0])
    ok = round_trips == len(scripts) and emitted == decls and codes == (0, 1, 2)
    record(11, ok, f"parse/unparse {round_trips}/{len(scripts)} scripts; emit/ingest {emitted}/{decls} monoids; "
                   f"exit codes ok/domain/parse = {codes}")


if __name__ == "__main__":
    import tempfile
    for name, fn in sorted(globals().items(), key=lambda kv: int(kv[0].split("_")[1]) if kv[0].startswith("test_") else 0):
        if name.startswith("test_"):
            try:
                fn(Path(tempfile.mkdtemp())) if name == "test_11_cli" else fn()
            except AssertionError:
                pass
