import random
import xml.etree.ElementTree as ET

import pytest

from cantorgh.metric import validate
from cantorgh.verify import (
    SUITES, junit_xml, random_composition, random_metric, random_ultrametric, run_suites,
)


@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes_alone(suite):
    results = run_suites([suite], seed=7, cases=30)
    assert results and all(r.suite == suite for r in results)
    assert all(r.passed for r in results), [r.detail for r in results if not r.passed]


def test_same_seed_same_details():
    a = run_suites(["metric"], seed=3, cases=20)
    b = run_suites(["metric"], seed=3, cases=20)
    assert [r.detail for r in a] == [r.detail for r in b]


def test_fault_is_reported_with_triple():
    results = run_suites(["metric"], seed=1, cases=10, inject_fault=True)
    failed = [r for r in results if not r.passed]
    assert len(failed) == 1 and "triple" in failed[0].detail


def test_junit_counts_failures():
    results = run_suites(["metric"], seed=1, cases=10, inject_fault=True)
    root = ET.fromstring(junit_xml(results))
    (suite,) = root.findall("testsuite")
    assert suite.get("failures") == "1"
    assert len(suite.findall("testcase")) == len(results)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suites(["nope"])


def test_generators_produce_declared_kinds():
    rng = random.Random(0)
    for _ in range(20):
        assert validate(random_ultrametric(rng, 6)).is_ultrametric
        assert validate(random_metric(rng, 6)).is_metric
        space, kind = random_composition(rng)
        rep = validate(space)
        assert rep.is_pseudo_metric
        if kind == "ultrametric":
            assert rep.is_ultrametric
