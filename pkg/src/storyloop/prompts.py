"""Prompt template loading.

Templates are plain text data files using ``$name`` substitution (literal
JSON braces stay untouched).  Each session records the sha256 of every
template it may use, so a trace pins the exact prompt wording it ran with.
"""

from __future__ import annotations

import hashlib
from importlib import resources
from pathlib import Path
from string import Template


class PromptLibrary:
    def __init__(self, root: Path | None = None) -> None:
        if root is None:
            root = Path(str(resources.files("storyloop"))) / "data" / "prompts"
        self._root = Path(root)
        self._cache: dict[str, str] = {}

    def raw(self, name: str) -> str:
        if name not in self._cache:
            self._cache[name] = (self._root / f"{name}.txt").read_text(encoding="utf-8")
        return self._cache[name]

    def render(self, name: str, **values: object) -> str:
        return Template(self.raw(name)).safe_substitute(**{k: str(v) for k, v in values.items()})

    def manifest(self) -> dict[str, str]:
        """name -> sha256 of template text, recorded in the session trace."""
        out = {}
        for path in sorted(self._root.glob("*.txt")):
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            out[path.stem] = digest
        return out


_DEFAULT: PromptLibrary | None = None


def default_prompts() -> PromptLibrary:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = PromptLibrary()
    return _DEFAULT
