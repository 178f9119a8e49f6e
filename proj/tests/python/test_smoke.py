"""Smoke tests for the python bindings: construct a space, run a small
profile and the UNI baseline, check evaluation plumbing."""

import json

import pytest

import dta


@pytest.fixture
def space():
    levels = [float(i) for i in range(1, 21)]
    return dta.DeploymentSpace([("x1", levels), ("x2", levels)])


@pytest.fixture
def deployer(space):
    spec = {"kind": "synthetic", "synthetic": {"kind": "HAT", "seed": 7}}
    return dta.make_deployer(space, json.dumps(spec))


def test_space_basics(space):
    assert space.cardinality == 400
    assert space.num_dims == 2
    assert space.dimension_names() == ["x1", "x2"]
    p = space.point_at(0)
    assert space.rank_of(p) == 0
    reloaded = dta.DeploymentSpace.from_json(space.to_json())
    assert reloaded.cardinality == 400


def test_deployer_evaluate(space, deployer):
    v = deployer.evaluate(space.point_at(3))
    assert v == deployer.evaluate(space.point_at(3))
    assert deployer.deterministic


def test_profile_run_and_eval(space, deployer):
    cfg = {"budget_B": 40, "batch_b": 10, "seed": 1, "sa": {"max_iters": 120}}
    result = dta.run_profile(space, deployer, json.dumps(cfg))
    assert len(result.samples) == 40
    ranks = {space.rank_of(p) for p, _ in result.samples}
    assert len(ranks) == 40  # no duplicate points
    assert result.chosen_kind in ("tree", "global-ols", "bagged-linear")

    mse, mae = dta.evaluate_full_grid(result.model, space, deployer)
    assert mse >= 0.0 and mae >= 0.0

    model = dta.FinalModel.from_json(result.model.to_json())
    probe = space.point_at(17)
    assert model.predict(probe) == result.model.predict(probe)


def test_determinism(space, deployer):
    cfg = json.dumps({"budget_B": 30, "batch_b": 10, "seed": 5, "sa": {"max_iters": 100}})
    a = dta.run_profile(space, deployer, cfg)
    b = dta.run_profile(space, deployer, cfg)
    assert a.log_jsonl(include_timing=False) == b.log_jsonl(include_timing=False)


def test_uni_baseline(space, deployer):
    cfg = json.dumps({"budget_B": 30, "batch_b": 30, "seed": 5, "sa": {"max_iters": 100}})
    uni = dta.run_uni_baseline(space, deployer, cfg)
    prof = dta.run_profile(space, deployer, cfg)  # B = b degenerates into UNI
    assert sorted(space.rank_of(p) for p, _ in uni.samples) == sorted(
        space.rank_of(p) for p, _ in prof.samples
    )


def test_complexity_and_dump(space, deployer, tmp_path):
    lin = dta.make_deployer(
        space, json.dumps({"kind": "synthetic", "synthetic": {"kind": "LIN", "seed": 1}})
    )
    assert dta.complexity_r2(space, lin) > 0.99
    csv = tmp_path / "grid.csv"
    assert dta.dump_grid_csv(space, lin, str(csv)) == 400
    replay = dta.make_deployer(
        space, json.dumps({"kind": "replay", "replay": {"path": str(csv)}})
    )
    p = space.point_at(123)
    assert replay.evaluate(p) == lin.evaluate(p)
