"""Versioned JSON artifacts for builder states, regions and reports.

Why this exists
---------------
Every builder is deterministic, so a state plus the cursor into its
requirement stream is enough to resume a run: N steps saved and M more steps
resumed must give the same bytes as N+M steps straight through. That only
holds if the artifact is itself canonical, so everything here is plain JSON
with sorted keys, and states are stored as the sequence of placements that
rebuilt them.

Design notes
------------
- Every document carries ``format_version`` and an ``artifact`` kind; a
  mismatch on load raises ``ArtifactError``.
- Files are written to a ``.tmp`` next to the target, reloaded and
  re-checked (the state's own invariant checker must pass), then
  ``replace``-published. A failed check deletes the tmp and raises.
- Relative ``--out`` paths are taken as given; without ``--out`` artifacts go
  to ``LATININF_HOME`` (per-OS app dir by default).
"""

import json
import os
import platform
from pathlib import Path

from latininf.errors import ArtifactError, LatinInfError
from latininf.groups import parse_group
from latininf.index import parse_index
from latininf.models import BuildLog, VerificationReport
from latininf.utils.constants import ARTIFACT_KINDS, FORMAT_VERSION
from latininf.utils.formatting import format_rational, parse_rational


def _app_dir() -> Path:
    """Per-OS app data directory."""
    system = platform.system()
    if system == "Darwin":
        return Path.home() / "Library" / "Application Support" / "LatinInf"
    if system == "Windows":
        return Path.home() / "AppData" / "Local" / "LatinInf"
    return Path.home() / ".local" / "share" / "LatinInf"


def home_dir() -> Path:
    """Default artifact directory (LATININF_HOME wins)."""
    override = os.environ.get("LATININF_HOME")
    return Path(override).expanduser() if override else _app_dir()


def default_path(kind: str, *parts) -> Path:
    """home_dir()/<kind>-<parts>.json with characters unsafe in file names replaced."""
    name = "-".join([kind, *(str(p) for p in parts)])
    safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)
    return home_dir() / f"{safe}.json"


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# ─── state codecs ────────────────────────────────────────────────────

def encode_terrace(t) -> dict:
    enc = t.group.encode
    return {
        "group": t.group.descriptor,
        "index": t.index.kind,
        "kind": t.kind,
        "points": [[format_rational(i), enc(g)] for i, g in t.forward.items()],
    }


def decode_terrace(doc: dict):
    from latininf.services.terrace_service import PartialTerrace

    group = parse_group(doc["group"])
    t = PartialTerrace(group, parse_index(doc["index"]), doc["kind"])
    for i, g in doc["points"]:
        t.assign(parse_rational(i), group.decode(g))
    return t


def encode_immune(state) -> dict:
    return {
        "cells": _cells(state.region),
        "ledger": [[*triple, gamma] for triple, gamma in sorted(state.ledger.items())],
    }


def decode_immune(doc: dict):
    from latininf.services.construct_service import ImmuneRegion
    from latininf.services.square_service import LatinRegion

    region = LatinRegion.from_cells([tuple(c) for c in doc["cells"]], enforce=True)
    ledger = {tuple(entry[:3]): entry[3] for entry in doc["ledger"]}
    return ImmuneRegion(region, ledger)


def encode_vatican(state) -> dict:
    return {"semi": state.semi, "cells": _cells(state.region)}


def decode_vatican(doc: dict):
    from latininf.services.construct_service import NonGroupVaticanState

    state = NonGroupVaticanState(semi=bool(doc["semi"]))
    for row, col, symbol in doc["cells"]:
        state.place(row, col, symbol)
    return state


def _cells(region) -> list:
    return [[r, c, s] for (r, c), s in sorted(region.cells.items())]


def encode_mapping(m) -> dict:
    return m.to_dict()


def decode_mapping(doc: dict):
    from latininf.services.ortho_service import PartialMapping

    return PartialMapping.from_dict(doc)


def encode_family(f) -> dict:
    return f.to_dict()


def decode_family(doc: dict):
    from latininf.services.ortho_service import OrthomorphismFamily

    return OrthomorphismFamily.from_dict(doc)


def encode_region(r) -> dict:
    from latininf.services.square_service import render

    return json.loads(render(r, "json"))


def decode_region(doc: dict):
    from latininf.services.square_service import parse_region

    return parse_region(json.dumps(doc), "json")


def encode_report(report: VerificationReport) -> dict:
    return report.to_dict()


def decode_report(doc: dict) -> VerificationReport:
    return VerificationReport(doc["property"], doc["passed"], doc["witnesses"], doc["statistics"])


CODECS = {
    "terrace": (encode_terrace, decode_terrace),
    "mapping": (encode_mapping, decode_mapping),
    "family": (encode_family, decode_family),
    "immune-region": (encode_immune, decode_immune),
    "vatican-region": (encode_vatican, decode_vatican),
    "region": (encode_region, decode_region),
    "report": (encode_report, decode_report),
}


# ─── documents ───────────────────────────────────────────────────────

def build_document(kind: str, state, cursor: int | None = None,
                   log: BuildLog | None = None, extra: dict | None = None) -> dict:
    if kind not in ARTIFACT_KINDS:
        raise ArtifactError(f"Unknown artifact kind '{kind}'")
    doc = {
        "format_version": FORMAT_VERSION,
        "artifact": kind,
        "state": CODECS[kind][0](state),
    }
    if cursor is not None:
        doc["cursor"] = cursor
    if log is not None:
        doc["log"] = log.to_list()
    if extra:
        doc.update(extra)
    return doc


def parse_document(text: str, kind: str | None = None) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ArtifactError(f"artifact is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise ArtifactError("artifact must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ArtifactError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    found = doc.get("artifact")
    if found not in ARTIFACT_KINDS:
        raise ArtifactError(f"unknown artifact kind {found!r}")
    if kind is not None and found != kind:
        raise ArtifactError(f"expected a {kind} artifact, got {found}")
    if "state" not in doc:
        raise ArtifactError("artifact has no state")
    return doc


def decode_state(doc: dict):
    try:
        return CODECS[doc["artifact"]][1](doc["state"])
    except ArtifactError:
        raise
    except (LatinInfError, KeyError, TypeError, IndexError) as e:
        raise ArtifactError(f"{doc['artifact']} artifact does not rebuild: {e}")


def _verify(doc: dict, text: str) -> None:
    """The written text parses back to the same document and a state that checks."""
    again = parse_document(text, doc["artifact"])
    if again != doc:
        raise ArtifactError("artifact changed on reload")
    state = decode_state(again)
    if hasattr(state, "check"):
        report = state.check()
        if not report.passed:
            raise ArtifactError(f"reloaded state fails its check: {report.witnesses[0]}")


def save_artifact(path, kind: str, state, cursor: int | None = None,
                  log: BuildLog | None = None, extra: dict | None = None) -> Path:
    """Write one artifact atomically; returns the published path."""
    final = Path(path)
    final.parent.mkdir(parents=True, exist_ok=True)
    doc = build_document(kind, state, cursor, log, extra)
    text = dumps(doc)
    tmp = final.with_name(final.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    try:
        _verify(doc, tmp.read_text(encoding="utf-8"))
    except ArtifactError:
        tmp.unlink(missing_ok=True)
        raise
    tmp.replace(final)
    return final


def load_artifact(path, kind: str | None = None) -> tuple:
    """(state, cursor, BuildLog, document) from an artifact file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"artifact not found: {path}")
    doc = parse_document(path.read_text(encoding="utf-8"), kind)
    state = decode_state(doc)
    log = BuildLog.from_list(doc.get("log", []))
    return state, doc.get("cursor", 0), log, doc
