"""Serve the HTTP API with the scripted demo story.

    python demos/serve.py [--port 8077]

Every session created through POST /sessions replays the same canned story,
which is enough to drive the browser console end to end without any live
provider.  Point the frontend at http://127.0.0.1:8077.
"""

import argparse
import tempfile
from pathlib import Path

import uvicorn

from storyloop.config import EngineConfig
from storyloop.engine.service import create_app
from storyloop.engine.session import SessionManager
from storyloop.gateway import ModelProfile

SCRIPT_PATH = Path(__file__).parent / "data" / "demo_script.json"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8077)
    parser.add_argument(
        "--sessions-dir",
        default=None,
        help="where traces/artifacts are written (default: a temp dir)",
    )
    args = parser.parse_args()

    base_dir = args.sessions_dir or tempfile.mkdtemp(prefix="storyloop-serve-")
    config = EngineConfig(
        generator=ModelProfile(
            provider_id="scripted", model_name="demo", endpoint=str(SCRIPT_PATH)
        )
    )
    manager = SessionManager(base_dir, config)
    app = create_app(manager)
    print(f"sessions dir: {base_dir}")
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
