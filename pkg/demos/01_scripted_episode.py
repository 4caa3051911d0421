"""Run one full scripted episode and inspect its trace.

Shows the whole pipeline end to end with the deterministic playback
provider: five construction stages, a ten-exchange turn loop (choices and
free text), an artifact drop, an explicit ending, and the per-session trace
with its replay hash.
"""

import json
import tempfile
from pathlib import Path

from storyloop.architect import EmotionalSeed
from storyloop.config import EngineConfig
from storyloop.engine.replay import replay_trace
from storyloop.engine.session import EpisodeSession
from storyloop.engine.trace import read_trace, trace_hash
from storyloop.gateway import ModelProfile

SCRIPT = json.loads((Path(__file__).parent / "data" / "demo_script.json").read_text())

INPUTS = [
    {"choice": 1},
    {"text": "I lean closer and listen"},
    {"choice": 2},
    {"choice": 1},
    {"text": "what is mara not saying"},
    {"choice": 3},
    {"choice": 1},
    {"choice": 2},
    {"choice": 1},
    {"choice": 2},
]


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="storyloop-demo-"))
    config = EngineConfig(generator=ModelProfile(provider_id="scripted", model_name="demo"))
    session = EpisodeSession(
        "demo-episode",
        EmotionalSeed(free_text="the days have started to blur together"),
        config,
        base_dir=workdir,
        scripts=SCRIPT,
    )
    session.start()
    print(f"status: {session.status}")
    print(f"title:  {session.blueprint.foundation.title}")
    print(f"cast:   {', '.join(c.name for c in session.blueprint.cast)}")
    print()

    for item in INPUTS:
        response = session.advance(**item)
        label = item.get("text") or f"choice {item['choice']}"
        print(f"> {label}")
        for seg in response.segments:
            if seg.tag in ("narration", "dialogue"):
                who = seg.speaker or "narrator"
                print(f"  [{who}] {seg.payload.splitlines()[0]}")
            elif seg.tag == "artifact_ref":
                print(f"  [artifact] {seg.payload}")
        print(f"  choices: {list(response.choices)}")
    session.advance(text="end the story")
    print(f"\nstatus after ending: {session.status}")

    records = read_trace(session.trace_path)
    kinds = {}
    for rec in records:
        kinds[rec["kind"]] = kinds.get(rec["kind"], 0) + 1
    print(f"trace records by kind: {kinds}")
    original = trace_hash(session.trace_path)
    replayed = replay_trace(session.trace_path, workdir / "replay")
    print(f"trace hash:      {original}")
    print(f"replayed hash:   {trace_hash(replayed)}")
    print(f"replay identical: {trace_hash(replayed) == original}")


if __name__ == "__main__":
    main()
