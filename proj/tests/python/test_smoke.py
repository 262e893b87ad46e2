import collections
import os
import random
import subprocess

import pytest

import sketchloop


MINI_CONFIG = """
[topology]
switches = 2
nodes_per_switch = 1

[sketch]
depth = 3
width = 256
levels = 8
track_k = 16

[workload]
dimensions = 1
records = 8000
epoch_records = 100
dim0.dist = zipf
dim0.keys = 200
dim0.s = 1.1

[api]
watch.attributes = dim0
watch.metrics = entropy,cardinality
watch.timing = loose

[run]
seed = 5
sync_period = 4
hh_threshold = 0.05
histogram_buckets = 32
"""


def test_version():
    assert sketchloop.__version__ == "0.1.0"


def test_sketch_estimates_track_exact_counts():
    rng = random.Random(1)
    g = sketchloop.Geometry(depth=4, width=1024, levels=12, dimensions=2, track_k=32, seed=9)
    sk = sketchloop.Sketch(g)
    exact = collections.Counter()
    for _ in range(50000):
        key = min(int(rng.paretovariate(1.2)), 500)
        sk.update(0, key)
        exact[key] += 1
        sk.update(1, rng.randrange(1000))

    assert sk.stream_length(0) == 50000
    top_key, top_count = exact.most_common(1)[0]
    assert abs(sk.estimate(0, top_key) - top_count) / top_count < 0.05

    hh = sk.heavy_hitters(0, 0.02)
    assert hh and hh[0][0] == top_key
    assert [e for _, e in hh] == sorted((e for _, e in hh), reverse=True)

    assert 0.8 * len(exact) < sk.cardinality(0) < 1.2 * len(exact)
    assert sk.entropy(0) > 0


def test_merge_matches_whole_stream():
    # universe within track_k, so merged trackers hold exactly the whole-stream
    # keys and every estimator degenerates to the whole-stream value
    g = sketchloop.Geometry(depth=3, width=512, levels=10, dimensions=1, track_k=16, seed=3)
    whole, a, b = (sketchloop.Sketch(g) for _ in range(3))
    rng = random.Random(7)
    stream = [rng.randrange(14) for _ in range(20000)]
    for i, key in enumerate(stream):
        whole.update(0, key)
        (a if i < 11111 else b).update(0, key)
    a.merge(b)
    assert a.entropy(0) == whole.entropy(0)
    assert a.cardinality(0) == whole.cardinality(0)
    assert a.heavy_hitters(0, 0.01) == whole.heavy_hitters(0, 0.01)
    assert all(a.estimate(0, k) == whole.estimate(0, k) for k in range(14))


def test_serialize_roundtrip():
    g = sketchloop.Geometry(depth=3, width=256, levels=8, dimensions=1, track_k=8, seed=2)
    sk = sketchloop.Sketch(g)
    for key in range(1000):
        sk.update(0, key % 37)
    blob = sk.to_bytes()
    back = sketchloop.Sketch.from_bytes(blob)
    assert back.to_bytes() == blob
    assert back.heavy_hitters(0, 0.01) == sk.heavy_hitters(0, 0.01)


def test_config_parse_and_errors():
    cfg = sketchloop.parse_config(MINI_CONFIG)
    assert cfg.switches == 2 and cfg.seed == 5
    assert cfg.epochs() == 40 and cfg.records_per_epoch() == 200
    with pytest.raises(ValueError):
        sketchloop.parse_config("[workload]\ndimensions = 1\nbogus_key = 1\n")


def test_simulate_deterministic_and_schema():
    t1 = sketchloop.simulate(MINI_CONFIG)
    t2 = sketchloop.simulate(MINI_CONFIG)
    assert t1 == t2
    lines = t1.strip().splitlines()
    assert lines[0] == "epoch,scope,switch,dimension,metric,value,staleness"
    assert len(lines) > 40
    assert sketchloop.simulate(MINI_CONFIG, seed=99) != t1


def test_oracle_rows_align_with_simulate():
    sim = sketchloop.simulate(MINI_CONFIG)
    orc = sketchloop.oracle(MINI_CONFIG)

    def entropy_keys(text):
        rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
        return {tuple(r[:5]) for r in rows if r[4] == "entropy"}

    sim_keys, orc_keys = entropy_keys(sim), entropy_keys(orc)
    assert sim_keys and sim_keys == {k[:4] + ("entropy",) for k in orc_keys}


def test_manifest_echoes_config():
    mf = sketchloop.manifest(MINI_CONFIG, "simulate")
    assert '"command": "simulate"' in mf and '"seed": 5' in mf
    assert mf == sketchloop.manifest(MINI_CONFIG, "simulate")


def test_cli_binary(tmp_path):
    cli = os.environ.get("SKETCHLOOP_CLI")
    if not cli:
        pytest.skip("SKETCHLOOP_CLI not set")
    cfg = tmp_path / "mini.cfg"
    cfg.write_text(MINI_CONFIG)
    out = tmp_path / "run"
    r = subprocess.run(
        [cli, "simulate", "--config", str(cfg), "--out", str(out), "--quiet"],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0, r.stderr
    trace = (out / "trace.csv").read_text()
    assert trace == sketchloop.simulate(MINI_CONFIG)
    assert (out / "manifest.json").read_text() == sketchloop.manifest(MINI_CONFIG, "simulate")
