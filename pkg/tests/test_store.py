"""Artifact persistence: canonical bytes, resume equivalence, atomic writes."""

import json

import pytest

from latininf.errors import ArtifactError
from latininf.groups import parse_group
from latininf.index import parse_index
from latininf.models import VerificationReport
from latininf.services.construct_service import seed_rowcomplete
from latininf.services.ortho_service import PartialMapping, build_scm_greedy
from latininf.services.scheduler_service import run
from latininf.services.terrace_service import PartialTerrace, requirement_stream
from latininf.store import (
    build_document, default_path, dumps, home_dir, load_artifact, parse_document,
    save_artifact,
)
from latininf.utils.constants import FORMAT_VERSION


def _terrace():
    return PartialTerrace(parse_group("Z"), parse_index("Z"), "T")


def _build(steps, state=None, start=0):
    state = state if state is not None else _terrace()
    return run(state, requirement_stream(state), steps, start=start)


class TestRoundTrip:
    def test_terrace(self, tmp_path):
        t, log = _build(120)
        path = save_artifact(tmp_path / "t.json", "terrace", t, cursor=120, log=log)
        again, cursor, log2, doc = load_artifact(path, "terrace")
        assert cursor == 120
        assert again.forward == t.forward
        assert log2.to_list() == log.to_list()
        assert doc["format_version"] == FORMAT_VERSION
        assert again.check().passed

    def test_resave_is_byte_identical(self, tmp_path):
        t, log = _build(80)
        first = save_artifact(tmp_path / "a.json", "terrace", t, cursor=80, log=log)
        again, cursor, log2, _ = load_artifact(first)
        second = save_artifact(tmp_path / "b.json", "terrace", again, cursor=cursor, log=log2)
        assert first.read_bytes() == second.read_bytes()

    def test_mapping(self, tmp_path):
        m, log = build_scm_greedy(parse_group("Q"), 60)
        path = save_artifact(tmp_path / "m.json", "mapping", m, cursor=60, log=log)
        again, _, _, _ = load_artifact(path, "mapping")
        assert again.theta == m.theta

    def test_immune_keeps_its_ledger(self, tmp_path):
        state = seed_rowcomplete()
        state.meet_row(3, 0)
        path = save_artifact(tmp_path / "i.json", "immune-region", state)
        again, _, _, _ = load_artifact(path, "immune-region")
        assert again.ledger == state.ledger
        assert again.region.cells == state.region.cells

    def test_report(self, tmp_path):
        report = VerificationReport("latin", False, [{"cells": [[0, 0], [0, 1]]}], {"cells": 2})
        path = save_artifact(tmp_path / "r.json", "report", report)
        again, _, _, _ = load_artifact(path, "report")
        assert again == report

    def test_canonical_json(self):
        text = dumps({"b": 1, "a": [1, 2]})
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("\n")


@pytest.mark.parametrize("first,second", [(100, 100), (1, 499), (250, 250)])
def test_resume_matches_straight_run(tmp_path, first, second):
    straight, log = _build(first + second)
    expected = save_artifact(tmp_path / "straight.json", "terrace", straight,
                             cursor=first + second, log=log)

    partial, log = _build(first)
    save_artifact(tmp_path / "resumed.json", "terrace", partial, cursor=first, log=log)
    state, cursor, log, _ = load_artifact(tmp_path / "resumed.json", "terrace")
    state, more = _build(second, state=state, start=cursor)
    log.extend(more)
    resumed = save_artifact(tmp_path / "resumed.json", "terrace", state,
                            cursor=cursor + second, log=log)

    assert resumed.read_bytes() == expected.read_bytes()


class TestRejection:
    def _write(self, path, doc):
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path

    def test_bad_version(self, tmp_path):
        t, _ = _build(10)
        doc = build_document("terrace", t)
        doc["format_version"] = FORMAT_VERSION + 1
        with pytest.raises(ArtifactError, match="format_version"):
            load_artifact(self._write(tmp_path / "x.json", doc))

    def test_wrong_kind(self, tmp_path):
        t, _ = _build(10)
        path = save_artifact(tmp_path / "t.json", "terrace", t)
        with pytest.raises(ArtifactError, match="expected a mapping"):
            load_artifact(path, "mapping")

    def test_unknown_kind(self):
        with pytest.raises(ArtifactError):
            build_document("spreadsheet", None)
        with pytest.raises(ArtifactError, match="unknown artifact kind"):
            parse_document(json.dumps({"format_version": FORMAT_VERSION, "artifact": "x", "state": {}}))

    def test_not_json(self):
        with pytest.raises(ArtifactError, match="not valid JSON"):
            parse_document("{")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_artifact(tmp_path / "missing.json")

    def test_corrupted_state_does_not_rebuild(self, tmp_path):
        t, _ = _build(10)
        doc = build_document("terrace", t)
        doc["state"]["points"].append(list(doc["state"]["points"][1]))
        with pytest.raises(ArtifactError, match="does not rebuild"):
            load_artifact(self._write(tmp_path / "x.json", doc))

    def test_failing_state_is_not_published(self, tmp_path):
        bad = PartialMapping.from_pairs(parse_group("Z"), [(0, 1), (2, 3)], enforce=False)
        target = tmp_path / "bad.json"
        with pytest.raises(ArtifactError):
            save_artifact(target, "mapping", bad)
        assert not target.exists()
        assert not list(tmp_path.glob("*.tmp"))


class TestPaths:
    def test_home_follows_env(self, tmp_home):
        assert home_dir() == tmp_home

    def test_default_path(self, tmp_home):
        path = default_path("terrace", "sum(Z,Zn:3)", "Z", "T")
        assert path.parent == tmp_home
        assert path.name == "terrace-sum_Z_Zn_3_-Z-T.json"

    def test_save_creates_parent(self, tmp_home):
        t, _ = _build(5)
        path = save_artifact(default_path("terrace", "Z"), "terrace", t)
        assert path.exists()
        assert not path.with_name(path.name + ".tmp").exists()
