"""MiniOO contract verifier and interpreter.

A small object-oriented language with requires/ensures/decreases
contracts, ghost code, and four selectable termination policies. The
bundled corpus demonstrates how a partial-correctness verifier that
erases ghost code can be made to prove `false` — and how a decreases
discipline over an over-approximated call graph closes the hole.
"""

from __future__ import annotations

from pathlib import Path

__version__ = "0.1.0"


def corpus_dir() -> Path:
    """Directory holding the bundled .moo corpus and expected.json."""
    return Path(__file__).resolve().parent / "corpus"
