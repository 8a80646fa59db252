from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
PROGRAMS = Path(__file__).resolve().parent / "programs"

sys.path.insert(0, str(Path(__file__).resolve().parent))


def source(*names: str) -> str:
    """Concatenate corpus files (``s4_p``) and test programs (``lists_main``)."""
    parts = []
    for n in names:
        p = PROGRAMS / f"{n}.aw"
        if not p.exists():
            p = CORPUS / f"{n}.aw"
        parts.append(p.read_text())
    return "\n".join(parts)


def compile_names(*names: str):
    from aldwych import compile_source

    res = compile_source(source(*names))
    assert res.ok, [d.format() for d in res.diagnostics if d.is_error]
    return res.core


def lenient_core(text: str):
    """Lower and convert without the mode check (for core-level listings)."""
    from aldwych.desugar import lower_surface
    from aldwych.desugar.handles import convert_handles_to_streams
    from aldwych.parser import parse

    return convert_handles_to_streams(lower_surface(parse(text)).declarations)


@pytest.fixture
def corpus_text():
    return lambda name: (CORPUS / f"{name}.aw").read_text()
