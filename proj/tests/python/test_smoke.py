# Copyright (C) 2026 The csreply Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Smoke tests for the Python bindings."""

import json
import math
import os
import pathlib

import pytest

import csreply

DATA = pathlib.Path(
    os.environ.get("CSREPLY_DATA",
                   pathlib.Path(__file__).resolve().parents[2] / "data"))


def load_sample():
    with open(DATA / "sample_en.jsonl", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def test_tokenize_and_segment():
    assert csreply.tokenize("Hello, World!") == ["hello", ",", "world", "!"]
    assert csreply.tokenize("chai पसंद है") == ["chai", "पसंद", "है"]
    assert csreply.normalize("  Sure ,  THING ") == "sure , thing"
    clauses = csreply.segment_clauses(
        ["i", "am", "tired", ",", "but", "i", "will", "come"])
    assert clauses == [["i", "am", "tired", ","], ["but", "i", "will", "come"]]


def test_symmetric_loss_and_mrr():
    assert csreply.symmetric_loss([[2.0]]) == 0.0
    assert csreply.symmetric_loss([[1.5, 1.5], [1.5, 1.5]]) == pytest.approx(
        math.log(3.0), abs=1e-12)
    assert csreply.mrr([1, 2, 4]) == pytest.approx(1.75 / 3)
    assert csreply.random_baseline_mrr(4) == pytest.approx(25 / 48)


def test_errors_are_raised():
    with pytest.raises(csreply.Error):
        csreply.mrr([])
    with pytest.raises(csreply.Error):
        csreply.segment_clauses([])


def test_synthesize_pair():
    pair = load_sample()[3]
    table = str(DATA / "phrase_table.tsv")
    same = csreply.synthesize_pair(pair, table, p_switch=0.0)
    assert same["message"] == pair["message"]
    assert same["lang"] == "cs"
    switched = csreply.synthesize_pair(pair, table, p_switch=1.0)
    assert switched["reply"] != pair["reply"]
    assert "main thak gaya hoon" in switched["reply"]


def test_fit_suggest_evaluate_save(tmp_path):
    corpus = load_sample()
    engine = csreply.Engine.fit(corpus, epochs=20, batch_size=8, lr=5e-3,
                                d_emb=16, d_hid=32, d_out=16, k_intents=4)
    assert engine.response_set_size > 10
    suggestions = engine.suggest("want pizza tonight?", n2=3)
    assert 1 <= len(suggestions) <= 3
    scores = [s["score"] for s in suggestions]
    assert scores == sorted(scores, reverse=True)

    report = engine.evaluate(corpus)
    assert report["mrr"] > report["baseline_mrr_closed_form"]
    assert report["tie_rule"] == "optimistic"

    model, responses = tmp_path / "m.json", tmp_path / "r.json"
    engine.save(str(model), str(responses))
    again = csreply.Engine.load(str(model), str(responses))
    assert again.suggest("want pizza tonight?", n2=3) == suggestions
    with pytest.raises(csreply.Error):
        again.suggest("   ")
