"""Smoke test for the socratic_py extension module.

Run after `pip install --no-build-isolation -e crates/python`:

    python python/smoke_test.py
"""

import json
import tempfile

import socratic_py as sm


def main() -> None:
    backend = sm.MockBackend(seed=0)

    moment = backend.caption("synth:kitchen;coffee maker;mug;making coffee", t_ms=5)
    assert moment["caption"].startswith("I am "), moment
    assert moment["places"]["items"][0]["label"] == "kitchen"

    web = backend.caption_internet("synth:kitchen;mug", candidates=1, temperature=0.0)
    assert len(web["candidates"]) == 1 and web["caption"] == web["candidates"][0]["text"]

    day = backend.demo_day(frames_per_scene=2, audio=True)
    assert len(day) == 24
    assert sm.FrameStream.from_jsonl(day.to_jsonl()).timestamps() == day.timestamps()

    log = backend.history(day, mode="uniform", interval_ms=300_000)
    assert len(log) == 24
    assert log.render().splitlines()[0].startswith("8:00 AM: I am making coffee")
    again = sm.History.from_json(log.to_json())
    assert again.render("24") == log.render("24")

    answer = backend.ask("did I drink coffee today?", history=log, explain=True)
    assert answer["modality"] == "text_answer" and answer["text"].startswith("yes"), answer
    found = backend.ask("where did I leave my mug?", stream=day)
    assert found["modality"] == "image_search" and found["retrieved"][0]["frame"] == 0, found

    rows = [backend.embed_image(f"synth:{p}") for p in ("kitchen", "porch", "park")]
    for algo in ("exact", "lsh"):
        index = sm.Index.build(rows, algo=algo)
        assert index.search(rows[1], k=1)[0][0] == 1
    with tempfile.TemporaryDirectory() as d:
        sm.Index.build(rows).save(d)
        assert len(sm.Index.load(d)) == 3
    assert abs(sm.cosine(rows[0], rows[0]) - 1.0) < 1e-6

    videos = [("v0", backend.embed_image("synth:kitchen")), ("v1", backend.embed_image("synth:porch"))]
    captions = [("c0", "v0", "making coffee in the kitchen"), ("c1", "v1", "receiving a package on the porch")]
    metrics = backend.v2t(videos, captions)
    assert metrics["r_at"]["1"] == 100.0 and metrics["n_fused"] == 0, metrics

    report = backend.select(sm.graded_frames()[:6], {"a": 0.0, "b": 0.2}, baseline="a")
    excluded = {r["vlm"]: r["excluded"] for r in report["rows"]}
    assert excluded == {"a": True, "b": False}, report

    try:
        backend.ask("where did I leave my mug?", modality="image")
    except sm.SocraticError as e:
        assert "index" in str(e).lower(), e
    else:
        raise AssertionError("image search without frames must fail")

    print(json.dumps({"ok": True, "events": len(log), "answer": answer["text"]}))


if __name__ == "__main__":
    main()
