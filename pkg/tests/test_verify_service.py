import json

from softq.services import VerifyOptions, verify
from softq.services import bounds_service


def test_quick_subset_passes():
    report = verify(VerifyOptions(quick=True, only=frozenset({1, 4, 6, 7, 10, 11, 12})))
    ids = [item.id for item in report.criteria]
    assert ids == [1, 4, 6, 7, 10, 11, 12]
    assert report.passed, f"Criterios fallidos: {[item.to_dict() for item in report.failures()]}"


def test_report_is_json_serializable():
    report = verify(VerifyOptions(quick=True, only=frozenset({6})))
    payload = json.loads(json.dumps(report.to_dict()))
    assert payload["criteria"][0]["name"] == "q-star-ground-truth"
    assert payload["quick"] is True


def test_mutated_decay_rate_is_detected(monkeypatch):
    original = bounds_service.decay_rate
    monkeypatch.setattr(bounds_service, "decay_rate", lambda p: original(p) * (1.0 - 1e-6))
    report = verify(VerifyOptions(quick=True, only=frozenset({11})))
    assert not report.passed, "Una tasa rho alterada debe romper la concordancia de cotas"


def test_exceptions_become_failures(monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("sin solucion")

    monkeypatch.setattr("softq.services.verify_service.policy_enumeration_q", broken)
    report = verify(VerifyOptions(quick=True, only=frozenset({6})))
    assert not report.passed
    assert "RuntimeError" in report.criteria[0].detail
