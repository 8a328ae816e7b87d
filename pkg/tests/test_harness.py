"""Experiment harness: estimators, trajectory comparison, sweeps, emitters.

Fast desk-scale versions of the acceptance experiments, plus the seed
bookkeeping laws that make sweeps reproducible regardless of worker count.
"""

import json
import math

import pytest

from biasedgraph import ModelKind
from biasedgraph.harness import (
    ComparisonReport,
    SweepConfig,
    SweepTarget,
    ThresholdEstimate,
    Timescale,
    compare_trajectory,
    comparison_to_csv,
    estimate_connectivity_threshold,
    estimate_giant_threshold,
    fmt9,
    sampler_selftest,
    sweep,
    sweep_to_csv,
    sweep_to_json,
)

AND = ModelKind.AND
OR = ModelKind.OR


# -- formatting ----------------------------------------------------------------


def test_fmt9_fixed_nine_significant_digits():
    assert fmt9(1.0) == "1.00000000"
    assert fmt9(0.5) == "0.500000000"
    assert fmt9(2.0 / 3.0) == "0.666666667"
    assert fmt9(1e-5) == "1.00000000e-05"
    assert fmt9(1234567.89) == "1234567.89"


# -- threshold estimators --------------------------------------------------------


def test_giant_estimator_reproducible_and_seed_split():
    est = estimate_giant_threshold(AND, 1.0, 2000, alpha=0.02, trials=3, base_seed=100)
    assert est.trials == 3
    assert est.timescale is Timescale.GIANT
    assert est.mean == pytest.approx(sum(est.values) / 3)
    singles = [
        estimate_giant_threshold(AND, 1.0, 2000, alpha=0.02, trials=1, base_seed=100 + i)
        for i in range(3)
    ]
    assert est.values == tuple(s.values[0] for s in singles)
    assert all(s.stddev == 0.0 for s in singles)
    again = estimate_giant_threshold(AND, 1.0, 2000, alpha=0.02, trials=3, base_seed=100)
    assert again == est


def test_connectivity_estimator_timescale_and_units():
    est = estimate_connectivity_threshold(OR, 1.0, 500, trials=2, base_seed=5)
    assert est.timescale is Timescale.CONNECTIVITY
    assert est.trials == 2
    # connected at n-1 edges at the very least
    assert all(v >= 2.0 * 499 / (500 * math.log(500)) for v in est.values)


def test_giant_emerges_before_connectivity_per_trial():
    n, trials = 2000, 3
    g = estimate_giant_threshold(AND, 1.0, n, alpha=0.01, trials=trials, base_seed=0)
    c = estimate_connectivity_threshold(AND, 1.0, n, trials=trials, base_seed=0)
    for tg, tc in zip(g.values, c.values):
        # same seeds, so per trial: edges at giant hit < edges at connectivity
        assert tg * n / 2 < tc * (n / 2) * math.log(n)


def test_giant_threshold_decreases_with_bias():
    means = {}
    for bias in (0.5, 1.0, 2.0):
        est = estimate_giant_threshold(AND, bias, 5000, alpha=0.01, trials=3, base_seed=7)
        means[bias] = est.mean
        assert 0.3 < est.mean < 1.5
    assert means[0.5] > means[1.0] > means[2.0]


def test_estimator_validation():
    with pytest.raises(ValueError):
        estimate_giant_threshold(AND, 1.0, 100, alpha=0.0)
    with pytest.raises(ValueError):
        estimate_giant_threshold(AND, 1.0, 100, alpha=1.0)
    with pytest.raises(ValueError):
        estimate_giant_threshold(AND, 1.0, 100, trials=0)
    with pytest.raises(ValueError):
        estimate_connectivity_threshold(AND, 1.0, 100, trials=0)
    with pytest.raises(ValueError):
        estimate_giant_threshold(AND, -2.0, 100)


# -- trajectory comparison -------------------------------------------------------


def test_compare_at_time_zero_is_exact():
    rep = compare_trajectory(AND, 1.0, 1000, [0.0], seed=4)
    row = rep.rows[0]
    assert row.m == 0 and row.t == 0.0
    assert row.iso_sim == row.iso_ode == 1.0
    assert row.pair_sim == row.pair_ode == 0.0
    assert row.sus_sim == row.sus_ode == 1.0
    assert rep.max_dev_iso == rep.max_dev_pair == rep.max_dev_sus == 0.0


def test_compare_bias_one_tracks_closed_forms():
    rep = compare_trajectory(AND, 1.0, 20_000, [0.0, 0.2, 0.5], seed=3)
    assert isinstance(rep, ComparisonReport)
    assert rep.max_dev_iso <= 0.02
    assert rep.max_dev_pair <= 0.03
    assert rep.max_dev_sus <= 0.2
    for row in rep.rows:
        assert row.iso_ode == pytest.approx(math.exp(-row.t), abs=1e-6)
        assert row.m == round(row.t * 20_000 / 2)


def test_compare_zero_bias_tracks_closed_forms():
    rep = compare_trajectory(AND, 0.0, 20_000, [0.5, 1.0, 1.4], seed=2)
    assert rep.max_dev_iso <= 0.02
    assert rep.max_dev_sus <= 0.3
    for row in rep.rows:
        expected_y = 2.0 - math.sqrt(1.0 + 2.0 * row.t)
        assert row.iso_ode == pytest.approx(expected_y, abs=1e-6)


def test_compare_grid_sorted_and_rows_align():
    rep = compare_trajectory(AND, 1.0, 2000, [0.5, 0.1, 0.3], seed=0)
    ts = [row.t for row in rep.rows]
    assert ts == sorted(ts)
    assert [row.m for row in rep.rows] == [100, 300, 500]


def test_compare_rejects_points_past_blowup_margin():
    # bias 1 blows up at 1: the window ends at 0.8
    with pytest.raises(ValueError, match="safe comparison bound"):
        compare_trajectory(AND, 1.0, 1000, [0.9])
    compare_trajectory(AND, 1.0, 1000, [0.79])


def test_compare_rejects_points_past_y_floor():
    # bias 0: x_c - 0.2 = 1.489 but y hits the 0.02 floor at 1.4602 first
    with pytest.raises(ValueError, match="safe comparison bound"):
        compare_trajectory(AND, 0.0, 1000, [1.47])
    compare_trajectory(AND, 0.0, 1000, [1.40])


def test_compare_rejects_or_model():
    with pytest.raises(ValueError, match="'and' model only"):
        compare_trajectory(OR, 1.0, 1000, [0.2])


def test_compare_validation():
    with pytest.raises(ValueError):
        compare_trajectory(AND, 1.0, 3, [0.2])
    with pytest.raises(ValueError):
        compare_trajectory(AND, 1.0, 1000, [])
    with pytest.raises(ValueError):
        compare_trajectory(AND, 1.0, 1000, [-0.1, 0.2])


def test_compare_deterministic():
    a = compare_trajectory(AND, 2.0, 5000, [0.2, 0.4], seed=9)
    b = compare_trajectory(AND, 2.0, 5000, [0.2, 0.4], seed=9)
    assert a == b


# -- sweeps ----------------------------------------------------------------------


def _small_config(**overrides):
    base = dict(
        models=(OR, AND),
        biases=(0.5, 1.0),
        n=500,
        trials=2,
        target=SweepTarget.GIANT,
        alpha=0.05,
        base_seed=11,
    )
    base.update(overrides)
    return SweepConfig(**base)


def test_sweep_grid_shape_and_seed_law():
    report = sweep(_small_config())
    assert len(report.estimates) == 4
    assert report.failures == ()
    # cell order is models x biases; cell j uses seeds base + j*trials + i
    cells = [(e.kind, e.bias) for e in report.estimates]
    assert cells == [(OR, 0.5), (OR, 1.0), (AND, 0.5), (AND, 1.0)]
    direct0 = estimate_giant_threshold(OR, 0.5, 500, alpha=0.05, trials=2, base_seed=11)
    direct3 = estimate_giant_threshold(AND, 1.0, 500, alpha=0.05, trials=2, base_seed=17)
    assert report.estimates[0].values == direct0.values
    assert report.estimates[3].values == direct3.values


def test_sweep_deterministic_across_thread_counts():
    cfg = _small_config()
    assert sweep(cfg, threads=1) == sweep(cfg, threads=2) == sweep(cfg, threads=1)


def test_sweep_connectivity_target():
    cfg = _small_config(target=SweepTarget.CONNECTIVITY, models=(OR,), biases=(1.0,))
    report = sweep(cfg)
    assert len(report.estimates) == 1
    assert report.estimates[0].timescale is Timescale.CONNECTIVITY


def test_sweep_empty_bias_list_gives_empty_report():
    report = sweep(_small_config(biases=()))
    assert report.estimates == ()
    assert report.failures == ()


def test_sweep_collects_cell_failures_and_continues():
    report = sweep(_small_config(models=(AND,), biases=(1.0, -1.0)))
    assert len(report.estimates) == 1
    assert report.estimates[0].bias == 1.0
    assert len(report.failures) == 1
    kind_value, bias, message = report.failures[0]
    assert (kind_value, bias) == ("and", -1.0)
    assert "bias" in message


def test_sweep_rejects_trajectory_target_and_bad_threads():
    cfg = _small_config(target=SweepTarget.TRAJECTORY)
    with pytest.raises(ValueError):
        sweep(cfg)
    with pytest.raises(ValueError):
        sweep(_small_config(), threads=0)


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        _small_config(n=3)
    with pytest.raises(ValueError):
        _small_config(trials=0)
    with pytest.raises(ValueError):
        _small_config(alpha=1.0)
    with pytest.raises(TypeError):
        _small_config(models=("or",))
    with pytest.raises(TypeError):
        _small_config(target="giant")


# -- emitters --------------------------------------------------------------------


def test_sweep_csv_layout():
    report = sweep(_small_config(models=(AND,), biases=(1.0,)))
    text = sweep_to_csv(report)
    lines = text.strip().split("\n")
    assert lines[0] == "model,K,n,trials,mean,stddev,timescale"
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "and"
    assert fields[1] == "1.00000000"
    assert fields[2] == "500" and fields[3] == "2"
    assert fields[6] == "giant"
    assert float(fields[4]) == pytest.approx(report.estimates[0].mean, rel=1e-8)


def test_sweep_json_round_trip():
    report = sweep(_small_config(models=(AND,), biases=(1.0, -1.0)))
    payload = json.loads(sweep_to_json(report))
    assert set(payload) == {"estimates", "failures"}
    (est,) = payload["estimates"]
    assert est["model"] == "and" and est["K"] == 1.0
    assert est["trials"] == 2 and len(est["values"]) == 2
    assert est["mean"] == pytest.approx(sum(est["values"]) / 2)
    (fail,) = payload["failures"]
    assert fail["model"] == "and" and fail["K"] == -1.0


def test_comparison_csv_layout():
    rep = compare_trajectory(AND, 1.0, 2000, [0.0, 0.4], seed=1)
    lines = comparison_to_csv(rep).strip().split("\n")
    assert lines[0] == "t,m,I,y,dev_I,I2,w,dev_I2,S,z,dev_S"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "0.00000000" and first[1] == "0"
    assert first[4] == "0.00000000"    # dev_I at t=0
    devs = [float(line.split(",")[4]) for line in lines[1:]]
    assert max(devs) == pytest.approx(rep.max_dev_iso, abs=1e-9)


# -- sampler selftest --------------------------------------------------------------


@pytest.mark.parametrize("kind", [OR, AND])
@pytest.mark.parametrize("bias", [0.0, 0.5, 1.0, 2.0])
def test_selftest_passes_on_mixed_fixture(kind, bias):
    rep = sampler_selftest(kind, bias, 6, edges=((0, 1), (1, 2)), draws=20_000, seed=5)
    assert rep.passed
    assert rep.p_value > 0.001
    assert rep.draws == 20_000
    # 13 missing pairs; zero-weight ones drop out of the support
    if kind is AND and bias == 0.0:
        assert rep.support_size == 12     # the covered-covered pair drops
    elif kind is OR and bias == 0.0:
        assert rep.support_size == 3      # only the isolated-isolated pairs stay
    else:
        assert rep.support_size == 13


def test_selftest_guards():
    with pytest.raises(ValueError):
        sampler_selftest(AND, 1.0, 9)
    with pytest.raises(ValueError):
        sampler_selftest(AND, 1.0, 6, draws=10)
