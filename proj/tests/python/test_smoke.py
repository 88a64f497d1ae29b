"""Smoke tests for the python bindings."""

import json
import math

import pytest

import perfshift as ps


def test_odds_multiply():
    assert ps.odds_multiply(0.3, 1.0) == 0.3
    assert math.isclose(ps.odds_multiply(0.3, 10.0), 0.8108108108108108, abs_tol=1e-15)
    assert ps.odds_multiply(0.0, 123.0) == 0.0
    assert ps.odds_multiply(1.0, 123.0) == 1.0
    with pytest.raises(ValueError):
        ps.odds_multiply(0.5, 0.0)


def test_population_and_cells():
    spec = ps.PopulationSpec()
    cells = ps.build_example_population(spec)
    assert len(cells) == 8
    assert math.isclose(sum(c.mass for c in cells.cells), 1.0, abs_tol=1e-12)
    cell = cells.at(ps.CellKey(1, 0, 0))
    assert math.isclose(cell.mass, 0.1382924922548026, abs_tol=1e-12)
    assert cell.mu0 == 0.3


def test_sampling_and_consistency():
    spec = ps.PopulationSpec()
    cells = ps.build_example_population(spec)
    policy = ps.baseline_policy(cells)
    sample = ps.sample_individuals(spec, 1000, 42)
    again = ps.sample_individuals(spec, 1000, 42)
    assert all(a.x2 == b.x2 for a, b in zip(sample, again))
    for i, ind in enumerate(sample[:200]):
        d = ps.decide(policy, ind, ps.DrawKey(42, 16, i))
        obs = ps.observe(ind, d)
        assert obs.y == (1 - d) * obs.y0 + d * obs.y1


def test_oracle_values():
    cells = ps.build_example_population(ps.PopulationSpec())
    pred = ps.Predictor.make_plugin(
        ps.FeatureSet(use_a=False, use_x1=True), {(0, 0): 0, (0, 1): 1}
    )
    ctx = ps.OracleContext.make(cells, ps.baseline_policy(cells), pred)
    for group in (0, 1):
        ppv, npv = ps.predictive_values(ctx, group)
        assert math.isclose(ppv, 0.9404878048780488, abs_tol=1e-12)
        assert math.isclose(npv, 0.5467567567567568, abs_tol=1e-12)
    assert math.isclose(ps.prediction_rate(ctx, 0), 0.8, abs_tol=1e-12)


def test_run_scenario_and_csv(tmp_path):
    cfg = ps.ScenarioConfig.from_json(
        json.dumps(
            {
                "population": {},
                "predictor": {
                    "kind": "plugin_table",
                    "features": ["x1"],
                    "table": [{"x1": 0, "r": 0}, {"x1": 1, "r": 1}],
                },
                "intervention": {
                    "select_a": 1,
                    "select_r": 0,
                    "odds_factor_grid": [1.0, 100.0, 10000.0],
                },
                "eval": {"mode": "oracle", "seed": 3},
            }
        )
    )
    result = ps.run_scenario(cfg)
    assert len(result.rows) == 6  # 3 grid points x 2 variants

    row = result.find(10000.0, ps.OutcomeVariant.observable, ps.SweepPath.oracle)
    assert row is not None
    assert row.abs_diff.npv > 0.35

    cf_rows = [r for r in result.rows if r.variant == ps.OutcomeVariant.counterfactual]
    assert all(r.group[0].ppv == cf_rows[0].group[0].ppv for r in cf_rows)

    csv_path = tmp_path / "sweep.csv"
    ps.write_sweep_csv(result, str(csv_path))
    parsed = ps.read_sweep_csv(str(csv_path))
    assert parsed.to_csv() == result.to_csv()

    svg_path = tmp_path / "sweep.svg"
    ps.emit_plot(result, ["npv", "accuracy"], str(svg_path))
    assert svg_path.read_text().startswith("<svg")


def test_empirical_metrics_and_criteria():
    spec = ps.PopulationSpec()
    cells = ps.build_example_population(spec)
    policy = ps.baseline_policy(cells)
    sample = ps.sample_individuals(spec, 5000, 7)
    observed = [
        ps.observe(ind, ps.decide(policy, ind, ps.DrawKey(7, 16, i)))
        for i, ind in enumerate(sample)
    ]
    pred = ps.Predictor.make_threshold(0.5)
    report = ps.empirical_metrics(observed, pred, ps.OutcomeVariant.observable)
    assert 0.0 <= report.group[0].accuracy <= 1.0
    check = ps.check_criterion(
        report, ps.Criterion.equalized_odds, ps.default_tolerance(report)
    )
    assert check.status == ps.CheckStatus.passed


def test_builtin_configs():
    assert ps.builtin_config_text("predictor1.json")
    cfg = ps.load_scenario("predictor2.json")
    assert len(cfg.odds_grid) == 50
