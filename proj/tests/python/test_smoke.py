import itertools
import os
import pathlib

import pytest

import scamlens

FIXTURES = pathlib.Path(os.environ.get("SCAMLENS_FIXTURE_DIR", pathlib.Path(__file__).resolve().parents[2] / "fixtures"))


def fixture(name):
    return (FIXTURES / name).read_text(encoding="utf-8")


def test_phishing_fixture_flags_and_verdict():
    flags = scamlens.detect_flags(fixture("rackspace_phish.eml"))
    pairs = {(f["category"], f["evidence"]) for f in flags}
    assert ("suspicious_link", "wwwthefitdollar.com/gabbyr") in pairs
    assert ("grammar_spelling", "have suspend") in pairs
    assert ("generic_signoff", "Online Email Team") in pairs
    verdict = scamlens.classify(fixture("rackspace_phish.eml"))
    assert verdict["decision"] == "scam"
    assert verdict["confidence"] == pytest.approx(scamlens.heuristic_score([(f["category"], f["weight"]) for f in flags]))


def test_clean_control():
    assert scamlens.detect_flags(fixture("clean.eml")) == []
    assert scamlens.classify(fixture("clean.eml"))["decision"] == "legitimate"


def test_parsing_helpers():
    doc = scamlens.parse_email(fixture("rackspace_phish.eml"))
    assert doc["sender"]["registrable_domain"] == "inha.ac.kr"
    assert doc["salutation"]["text"] == "Dear Customer"
    urls = scamlens.extract_urls("go to https://Example.com/x now")
    assert urls[0]["host"] == "example.com"
    assert urls[0]["offset"] == 6
    assert scamlens.tokenize("Hello, world") == ["Hello", ",", "world"]
    with pytest.raises(scamlens.MalformedMessage):
        scamlens.parse_email("no headers here")


def test_metrics_against_direct_counts():
    m = scamlens.metrics(2, 1, 1, 6)
    assert m["precision"] == pytest.approx(2 / 3, abs=1e-12)
    assert m["accuracy"] == pytest.approx(0.8, abs=1e-12)
    cm = scamlens.confusion(["scam", "scam", "legitimate"], ["scam", "legitimate", "scam"])
    assert (cm["tp"], cm["fp"], cm["fn"], cm["tn"]) == (1, 1, 1, 0)


def test_auc_matches_pair_enumeration():
    scores = [0.9, 0.4, 0.8, 0.3, 0.4]
    truth = ["scam", "scam", "legitimate", "legitimate", "legitimate"]
    pos = [s for s, t in zip(scores, truth) if t == "scam"]
    neg = [s for s, t in zip(scores, truth) if t == "legitimate"]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    assert scamlens.auc(scores, truth) == pytest.approx(wins / (len(pos) * len(neg)), abs=1e-12)
    with pytest.raises(scamlens.OneClassOnly):
        scamlens.auc([0.1, 0.2], ["scam", "scam"])
    with pytest.raises(ValueError):
        scamlens.auc([0.1], ["maybe"])


def test_kappa_and_sweep():
    a = ["scam"] * 5 + ["legitimate"] * 5
    b = ["scam"] * 4 + ["legitimate", "scam"] + ["legitimate"] * 4
    assert scamlens.cohen_kappa(a, b) == pytest.approx(0.6, abs=1e-12)
    curve = scamlens.threshold_sweep([0.9, 0.6, 0.2], ["scam", "scam", "legitimate"], [0.1, 0.5, 0.95])
    tps = [p["matrix"]["tp"] for p in curve["points"]]
    assert tps == sorted(tps, reverse=True)
    assert scamlens.decide(0.5, 0.5) == "legitimate"


def test_tune_synthetic_corpus():
    result = scamlens.tune_corpus(str(FIXTURES / "synthetic.corpus"))
    assert result["report"]["f1"] == 1.0
    assert result == scamlens.tune_corpus(str(FIXTURES / "synthetic.corpus"))
