"""Bundled signatures and fixture snapshots, addressable by bare name."""

from importlib.resources import files

__all__ = ["fixture_text", "signature_text"]


def signature_text(name: str) -> str:
    """Raw text of a bundled signature file, e.g. ``ie8_open``."""
    return (files(__name__) / "signatures" / f"{name}.sig").read_text(encoding="utf-8")


def fixture_text(name: str) -> str:
    """Raw text of a bundled fixture file, by full file name."""
    return (files(__name__) / "fixtures" / name).read_text(encoding="utf-8")
