"""Portable path patterns with variable capture.

A template is a Windows path in which the machine-specific parts have been
replaced by variables, so a pattern learned on one system matches the
equivalent artifact on another:

    %SystemRoot%            the Windows directory, from snapshot metadata
    %HomeDrive%\\%HomePath%  the user profile location, from metadata
    %InstallPath.<name>%    a published application install prefix
    %SID%                   a user security identifier; binds to one value
                            per match attempt
    %s                      a run of letters, digits and dashes (hashes,
                            GUIDs and similar generated tokens)
    %i                      a run of digits (log rotation counters)

Literal text matches case-insensitively (ASCII), mirroring Windows path
identity; the original spelling of matched records is preserved.  A literal
percent sign cannot appear in a template.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .evidence import ArtifactRecord, RecordKind, Snapshot, SnapshotMeta, fold_path

__all__ = [
    "Binding",
    "PathTemplate",
    "TemplateSyntaxError",
    "Var",
    "generalize_path",
    "instantiate",
    "parse_template",
]


class TemplateSyntaxError(ValueError):
    """A template string that cannot be parsed into tokens."""


@dataclass(frozen=True)
class Var:
    name: str  # SystemRoot, HomeDrive, HomePath, SID, s, i, or InstallPath.<name>


Token = Union[str, Var]

_CLOSED_VARS = ("SystemRoot", "HomeDrive", "HomePath", "SID")
_INLINE_VARS = ("s", "i")


def parse_template(text: str) -> tuple[Token, ...]:
    """Split template text into literal and variable tokens.

    Raises TemplateSyntaxError on an unknown variable, a stray percent sign,
    or two variables with no literal separator between them; a corrupted
    template must fail loudly rather than quietly match something else.
    """
    if not text:
        raise TemplateSyntaxError("empty template")
    tokens: list[Token] = []
    literal: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch != "%":
            literal.append(ch)
            i += 1
            continue
        var = None
        for name in _CLOSED_VARS:
            if text.startswith(f"%{name}%", i):
                var = Var(name)
                i += len(name) + 2
                break
        if var is None and text.startswith("%InstallPath.", i):
            end = text.find("%", i + 1)
            name = text[i + len("%InstallPath."):end] if end != -1 else ""
            if end == -1 or not name or "%" in name:
                raise TemplateSyntaxError(
                    f"malformed install-path variable at position {i} in {text!r}"
                )
            var = Var(f"InstallPath.{name}")
            i = end + 1
        if var is None:
            for name in _INLINE_VARS:
                if text.startswith(f"%{name}", i):
                    var = Var(name)
                    i += 2
                    break
        if var is None:
            raise TemplateSyntaxError(
                f"unknown variable at position {i} in template {text!r}"
            )
        if literal:
            tokens.append("".join(literal))
            literal = []
        elif tokens and isinstance(tokens[-1], Var):
            raise TemplateSyntaxError(
                f"adjacent variables without a separator in template {text!r}"
            )
        tokens.append(var)
    if literal:
        tokens.append("".join(literal))
    return tuple(tokens)


@dataclass(frozen=True)
class PathTemplate:
    """A parsed template plus the record kind it applies to."""

    text: str
    kind: RecordKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "_tokens", parse_template(self.text))

    @property
    def tokens(self) -> tuple[Token, ...]:
        return self._tokens  # type: ignore[attr-defined]

    def variables(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.tokens if isinstance(t, Var))

    @property
    def uses_sid(self) -> bool:
        return "SID" in self.variables()


@dataclass(frozen=True)
class Binding:
    """Variable values captured by one template match.

    ``sid`` holds the single SID bound for the attempt; ``captures`` lists
    every variable occurrence in template order with its matched text.
    """

    sid: str | None = None
    captures: tuple[tuple[str, str], ...] = ()


# --- generalization -------------------------------------------------------

# A replaceable token in the last path segment: six or more hex-or-dash
# characters delimited by - { } . or the segment edges.  Long enough to spare
# ordinary words while catching hashes and GUIDs.
_HEX_RUN = re.compile(r"(?:(?<=[-{}.])|^)([0-9A-Fa-f](?:[0-9A-Fa-f-]*[0-9A-Fa-f])?)(?=[-{}.]|$)")
_MIN_HEX_RUN = 6

_BRACED_GUID = re.compile(
    r"\{[0-9A-Fa-f]{8}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{4}-[0-9A-Fa-f]{12}\}"
)

# A rotation counter in a log-style file name: digits between a dash and the
# final extension, where the extension says "log" somewhere.
_LOG_COUNTER = re.compile(r"(?<=-)\d+(?=\.[^.]*log[^.]*$)", re.IGNORECASE)


def _home_prefix(meta: SnapshotMeta) -> str | None:
    drive = meta.home_drive.rstrip("\\")
    rel = meta.home_path.strip("\\")
    if not drive or not rel:
        return None
    return f"{drive}\\{rel}"


def _prefix_candidates(meta: SnapshotMeta) -> list[tuple[str, str]]:
    candidates: list[tuple[str, str]] = []
    home = _home_prefix(meta)
    if home:
        candidates.append((home, "%HomeDrive%\\%HomePath%"))
    root = meta.system_root.rstrip("\\")
    if root:
        candidates.append((root, "%SystemRoot%"))
    for name, prefix in meta.install_paths.items():
        prefix = prefix.rstrip("\\")
        if prefix:
            candidates.append((prefix, f"%InstallPath.{name}%"))
    candidates.sort(key=lambda c: len(c[0]), reverse=True)
    return candidates


def _sub_hex_runs(segment: str) -> str:
    def repl(match: re.Match[str]) -> str:
        return "%s" if len(match.group(1)) >= _MIN_HEX_RUN else match.group(0)

    return _HEX_RUN.sub(repl, segment)


def generalize_path(path: str, meta: SnapshotMeta, kind: RecordKind | None = None) -> PathTemplate:
    """Replace the machine-specific pieces of a concrete path with variables.

    The longest matching prefix out of the profile directory, the system root
    and any published install paths becomes its variable; whole segments equal
    to a known user SID become %SID%; brace-wrapped GUIDs anywhere become
    {%s}; in the final segment, rotation counters in log-style names become
    %i and hex runs of six or more characters become %s.  Paths with nothing
    machine-specific come back as all-literal templates.
    """
    if kind is None:
        kind = RecordKind.REGKEY if fold_path(path).startswith("hkey_") else RecordKind.FILE

    working = path
    folded = fold_path(path)
    for prefix, replacement in _prefix_candidates(meta):
        fp = fold_path(prefix)
        if folded.startswith(fp) and (len(path) == len(prefix) or path[len(prefix)] == "\\"):
            working = replacement + working[len(prefix):]
            break

    segments = working.split("\\")
    folded_sids = {fold_path(s) for s in meta.sids}
    out = []
    for pos, segment in enumerate(segments):
        if "%" in segment:
            out.append(segment)  # placeholder from the prefix step
            continue
        if fold_path(segment) in folded_sids:
            out.append("%SID%")
            continue
        segment = _BRACED_GUID.sub("{%s}", segment)
        if pos == len(segments) - 1 and "%" not in segment:
            segment = _LOG_COUNTER.sub("%i", segment)
            if "%" not in segment:
                segment = _sub_hex_runs(segment)
        out.append(segment)
    return PathTemplate("\\".join(out), kind)


# --- instantiation --------------------------------------------------------

_SID_SHAPE = r"S-\d+(?:-\d+)+"


def _compile(
    tpl: PathTemplate, meta: SnapshotMeta, fixed_sid: str | None
) -> tuple[re.Pattern[str], list[tuple[str, int]]] | None:
    """Build a regex for the template under this snapshot's metadata.

    Returns None when the template cannot be expanded here at all (an
    install-path variable the snapshot does not define).  The second element
    maps each capturing variable occurrence to its regex group index.
    """
    parts: list[str] = []
    slots: list[tuple[str, int]] = []
    group = 0
    sid_seen = False
    for token in tpl.tokens:
        if isinstance(token, str):
            parts.append(re.escape(token))
            continue
        name = token.name
        if name == "SystemRoot":
            parts.append(re.escape(meta.system_root.rstrip("\\")))
        elif name == "HomeDrive":
            parts.append(re.escape(meta.home_drive.rstrip("\\")))
        elif name == "HomePath":
            parts.append(re.escape(meta.home_path.strip("\\")))
        elif name.startswith("InstallPath."):
            prefix = meta.install_paths.get(name[len("InstallPath."):])
            if prefix is None:
                return None
            parts.append(re.escape(prefix.rstrip("\\")))
        elif name == "SID":
            if fixed_sid is not None:
                parts.append(re.escape(fixed_sid))
            elif sid_seen:
                parts.append(r"(?P=sid)")
            else:
                group += 1
                parts.append(rf"(?P<sid>{_SID_SHAPE})")
                slots.append(("SID", group))
                sid_seen = True
        elif name == "s":
            group += 1
            parts.append(r"([0-9A-Za-z-]+)")
            slots.append(("s", group))
        elif name == "i":
            group += 1
            parts.append(r"([0-9]+)")
            slots.append(("i", group))
        else:  # unreachable once parse_template has accepted the text
            raise TemplateSyntaxError(f"unknown variable {name!r}")
    return re.compile("".join(parts), re.IGNORECASE | re.ASCII), slots


def instantiate(
    tpl: PathTemplate, snap: Snapshot, fixed: Binding | None = None
) -> list[tuple[ArtifactRecord, Binding]]:
    """All records in the snapshot whose path matches the template.

    Matching is greedy with backtracking and ASCII-case-insensitive.  An
    unbound %SID% may take any SID listed in the snapshot metadata but binds
    to a single value within one match; a pre-bound SID in ``fixed`` pins it.
    Results never cross record kinds and come back sorted by folded path.
    """
    fixed_sid = fixed.sid if fixed is not None else None
    compiled = _compile(tpl, snap.meta, fixed_sid)
    if compiled is None:
        return []
    pattern, slots = compiled
    folded_sids = {fold_path(s) for s in snap.meta.sids}

    out = []
    for rec in snap.records.values():
        if rec.kind is not tpl.kind:
            continue
        match = pattern.fullmatch(rec.path)
        if match is None:
            continue
        captures = tuple((name, match.group(idx)) for name, idx in slots)
        sid = fixed_sid
        if sid is None:
            bound = match.groupdict().get("sid")
            if bound is not None:
                if fold_path(bound) not in folded_sids:
                    continue
                sid = bound
        out.append((rec, Binding(sid=sid, captures=captures)))
    out.sort(key=lambda pair: fold_path(pair[0].path))
    return out
