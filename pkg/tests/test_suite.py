import json

import pytest

from tre_kit.ensembles import EnsembleSpec
from tre_kit.errors import InvalidSpec
from tre_kit.suite import (
    CHECKS,
    _aggregate,
    SuiteConfig,
    check_aux_lemmas,
    dump_trial,
    run_check,
    run_suite,
    run_trial,
    suite_document,
    suite_passed,
)
from tre_kit.matrix_io import read_matrix


def test_empty_check_list_passes():
    reports = run_suite(SuiteConfig(checks=(), trials=5))
    assert reports == []
    assert suite_passed(reports)


@pytest.mark.parametrize("kwargs", [
    {"tol": -1}, {"tol": 0.0}, {"tol": float("nan")}, {"trials": 0}, {"seed": -3}, {"dims": (1,)},
    {"a_values": (0.0,)}, {"a_values": ()}, {"t_values": (1.5,)}, {"checks": ("nope",)},
    {"rank_profiles": ("odd",)}, {"rank_tol": 2.0},
])
def test_invalid_config(kwargs):
    with pytest.raises(InvalidSpec):
        SuiteConfig(**kwargs)


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(InvalidSpec):
        SuiteConfig.from_dict({"trials": 3, "colour": "red"})


def test_config_round_trip():
    config = SuiteConfig(checks=("rbts",), trials=7, dims=(2, 5))
    assert SuiteConfig.from_dict(config.to_dict()) == config
    assert SuiteConfig.from_dict(config.to_dict()).digest() == config.digest()


def test_trial_parameters_cycle():
    config = SuiteConfig(dims=(2, 3), a_values=(0.1, 0.9), rank_profiles=("full", "pure"))
    trials = [config.trial("triangle1", i) for i in range(8)]
    assert [t.dim for t in trials] == [2, 3] * 4
    assert [t.a for t in trials] == [0.1, 0.1, 0.9, 0.9] * 2
    assert [t.rank for t in trials] == [2, 3, 2, 3, 1, 1, 1, 1]
    assert config.trial("triangle2_equality", 4).t == config.t_values[1]


def test_same_seed_same_report():
    config = SuiteConfig(checks=("triangle2", "aux"), trials=40, seed=11)
    first = json.dumps(suite_document(config, run_suite(config)))
    second = json.dumps(suite_document(config, run_suite(config)))
    assert first == second


def test_workers_do_not_change_report():
    config = SuiteConfig(checks=("rbts",), trials=30, seed=2, keep_per_trial=True)
    serial = run_check(config, "rbts", workers=1).to_dict()
    parallel = run_check(config, "rbts", workers=2).to_dict()
    assert serial == parallel


@pytest.mark.parametrize("check", sorted(CHECKS))
def test_every_check_runs_clean(check):
    report = run_check(SuiteConfig(checks=(check,), trials=36, seed=9), check)
    assert report.failures == 0
    assert report.passed, report.to_dict()
    assert report.min_margin <= report.margin_quantiles[1] <= report.max_margin


def test_report_schema():
    report = run_check(SuiteConfig(checks=("tderiv",), trials=10, keep_per_trial=True), "tderiv")
    d = report.to_dict()
    for key in ("check_name", "trials", "violations", "min_margin", "quantiles", "seed", "tol"):
        assert key in d
    assert set(d["quantiles"]) == {"p1", "p50", "p99"}
    assert set(d["sub_min_margins"]) == {"lower", "upper"}
    assert len(d["per_trial"]) == 10
    assert d["per_trial"][3][0] == "0:3"


def test_violations_and_failures_counted():
    config = SuiteConfig(checks=("triangle1",), trials=4, tol=1e-9)
    results = [
        (0, {"margin": 0.5}, ""),
        (1, {"margin": -5e-10}, ""),
        (2, {"margin": -2e-9}, ""),
        (3, None, "SupportMismatch: leak"),
    ]
    report = _aggregate(config, "triangle1", results, None)
    assert report.violations == 2
    assert report.failures == 1
    assert report.worst_trial == 2
    assert report.min_margin == -2e-9
    assert not report.passed


def test_dump_trial_round_trip(tmp_path):
    config = SuiteConfig(checks=("rbts",), trials=3, seed=4)
    paths = dump_trial(config, "rbts", 2, str(tmp_path))
    assert len(paths) == 3
    inputs, _ = run_trial(config, "rbts", 2)
    for path in paths:
        name = path.rsplit("_", 1)[1].removesuffix(".json")
        assert read_matrix(path).tobytes() == inputs[name].astype(complex).tobytes()


def test_aux_lemmas_entry_point():
    report = check_aux_lemmas(EnsembleSpec(3, "deficient", seed=1, trials=20))
    assert report.passed
    assert set(report.sub_min_margins) == {"lemma_f", "lieb1", "lieb2", "s0_linearity"}
