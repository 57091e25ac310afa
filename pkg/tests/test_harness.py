import math

import numpy as np
import pytest

from dbcare import core, harness
from dbcare.core import InvalidParameter
from dbcare.harness import RiskConfig, SweepConfig, evaluate_risk, run_sweep, simulate
from dbcare.policies import MI, SR, Dbcare, Guess, SequentialHalving


def test_risk_identity_and_se():
    inst = core.make_gaussian_two_arm(0.3)
    for kind in (MI, SR):
        risk = RiskConfig(kind, 1e-3)
        out = simulate(inst, Dbcare(kind, 1e-3, 1.0, B=1.0), 200, 1)
        est = harness.aggregate(out, risk)
        penalty = est.misid_rate if kind == MI else est.mean_simple_regret
        assert abs(est.mean_risk - (penalty + 1e-3 * est.mean_tau)) <= 1e-12
        per_run = (out.misid if kind == MI else out.regret) + 1e-3 * out.tau
        assert est.se_risk == pytest.approx(np.std(per_run, ddof=1) / math.sqrt(200), rel=1e-12)
        assert est.max_tau == out.tau.max()


def test_guess_risks():
    est = evaluate_risk(core.make_gaussian_two_arm(1.0), Guess(), RiskConfig(SR, 1e-4), 4000, 2)
    assert est.mean_tau == 0
    assert abs(est.mean_simple_regret - 0.5) <= 4 * est.se_risk
    assert est.mean_risk == est.mean_simple_regret


def test_sequential_halving_tau_exact():
    est = evaluate_risk(core.make_gaussian_two_arm(1.0), SequentialHalving(10), RiskConfig(MI, 1e-4), 50, 3)
    assert est.mean_tau == 10


def test_ties_count_as_correct():
    est = evaluate_risk(core.make_gaussian_two_arm(0.0), Guess(), RiskConfig(MI, 1e-4), 100, 4)
    assert est.misid_rate == 0 and est.mean_risk == 0


def test_simulation_independent_of_workers():
    inst = core.make_one_sparse(4, 0.5)
    spec = Dbcare(MI, 1e-3, 1.0)
    a = simulate(inst, spec, 40, 9, workers=1)
    b = simulate(inst, spec, 40, 9, workers=2)
    for x, y in zip(a.__dict__.values(), b.__dict__.values()):
        np.testing.assert_array_equal(x, y)


def test_drug_instances():
    binary, leveled = harness.drug_instances()
    np.testing.assert_allclose(binary.means, harness.BINARY_MEANS, rtol=0, atol=1e-15)
    np.testing.assert_allclose(leveled.means, harness.LEVELED_MEANS, rtol=0, atol=1e-12)
    assert binary.sigma == leveled.sigma == 0.5
    assert core.gap_profile(binary).gaps[0] == pytest.approx(0.068, abs=1e-12)
    assert core.gap_profile(leveled).best_mean == pytest.approx(0.230, abs=1e-12)
    for arm in leveled.arms:
        assert arm.support == harness.LEVELS
        assert min(arm.probs) >= 0 and sum(arm.probs) == pytest.approx(1.0)


def test_drug_arm_order_is_shuffled_per_run():
    cfg = SweepConfig("DrugBinary", (1e-3,), ({"name": "guess"},), runs=10)
    assert cfg.shuffle
    binary, _ = harness.drug_instances()
    out = simulate(binary, Guess(), 400, 5, shuffle_arms=True)
    # With shuffling the recommended index is not tied to the best mean.
    assert 0.1 < np.mean(out.recommended == 0) < 0.3


def test_sweep_rows_and_seeding():
    cfg = SweepConfig("TwoArmGaussian", (1.0,), ({"name": "guess"},), runs=100, master_seed=7)
    rows = run_sweep(cfg)
    assert len(rows) == 1 and rows[0].mean_tau == 0 and rows[0].policy == "guess"
    cfg2 = SweepConfig("TwoArmGaussian", (0.5, 1.0),
                       ({"name": "dbcare"}, {"name": "sequential_halving", "budget": 10}), runs=30)
    rows2 = run_sweep(cfg2)
    assert [(r.policy, r.grid_value) for r in rows2] == [
        ("dbcare", 0.5), ("sequential_halving[T=10]", 0.5), ("dbcare", 1.0), ("sequential_halving[T=10]", 1.0)]
    assert run_sweep(cfg2) == rows2


def test_linear_decay_needs_three_arms():
    cfg = SweepConfig("LinearDecay", (0.5,), ({"name": "dbcare"},), K=2, runs=5)
    with pytest.raises(InvalidParameter):
        run_sweep(cfg)


@pytest.mark.parametrize("kwargs", [
    dict(setting="Nope"),
    dict(grid=()),
    dict(runs=0),
    dict(policies=({"name": "racing"},)),
    dict(policies=({"name": "racing", "delta": 1.5},)),
    dict(policies=({"name": "guess", "extra": 1},)),
    dict(policies=({"name": "sequential_halving"},)),
])
def test_sweep_config_validation(kwargs):
    base = dict(setting="TwoArmGaussian", grid=(1.0,), policies=({"name": "guess"},))
    with pytest.raises(InvalidParameter):
        SweepConfig(**{**base, **kwargs})


def test_policy_labels():
    assert harness.policy_label({"name": "sequential_halving", "budget_per_arm": 5}) == "sequential_halving[T=5K]"
    assert harness.policy_label({"name": "racing", "delta": 0.01}) == "racing[delta=0.01]"
    assert harness.policy_label({"name": "dbcare"}) == "dbcare"


def test_csv_header_and_roundtrip(tmp_path):
    cfg = SweepConfig("TwoArmGaussian", (0.5, 1.5), ({"name": "dbcare"}, {"name": "guess"}), runs=20,
                      cost=1e-3)
    rows = run_sweep(cfg)
    path = tmp_path / "out.csv"
    harness.write_csv(rows, path)
    raw = path.read_bytes()
    assert raw.split(b"\n")[0] == \
        b"setting,policy,grid_value,K,runs,mean_risk,se_risk,mean_tau,misid_rate,mean_simple_regret"
    assert b"\r" not in raw and raw.endswith(b"\n")
    back = harness.read_csv(path)
    for row, rec in zip(rows, back):
        assert float(rec["mean_risk"]) == row.mean_risk
        assert float(rec["se_risk"]) == row.se_risk
    harness.write_csv(rows, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == raw


def test_plot_is_deterministic_svg(tmp_path):
    cfg = SweepConfig("TwoArmGaussian", (0.5, 1.0, 1.5), ({"name": "dbcare"}, {"name": "guess"}), runs=20,
                      cost=1e-3)
    rows = run_sweep(cfg)
    harness.emit_plot(rows, tmp_path / "a.svg")
    harness.emit_plot(rows, tmp_path / "b.svg")
    a = (tmp_path / "a.svg").read_bytes()
    assert a.lstrip().startswith(b"<?xml") and b"<svg" in a
    assert a == (tmp_path / "b.svg").read_bytes()


def test_write_errors(tmp_path):
    with pytest.raises(OSError):
        harness.write_csv([harness.SweepRow("TwoArmGaussian", "guess", 1.0, 2, 1, 0.5, 0, 0, 0.5, 0.5)],
                          tmp_path / "missing" / "x.csv")
    with pytest.raises(ValueError):
        harness.write_csv([], tmp_path / "x.csv")


def test_risk_bounds_property():
    inst = core.make_one_sparse(5, 0.8)
    out = simulate(inst, Dbcare(MI, 1e-3, 1.0), 100, 6)
    per_run = out.misid + 1e-3 * out.tau
    assert np.all(per_run >= 0) and np.all(per_run <= 1 + 1e-3 * out.tau.max())


def test_shared_cache_does_not_change_rows():
    base = dict(setting="TwoArmGaussian", grid=(0.3, 1.0), runs=40, cost=1e-3, B=1.0,
                policies=({"name": "dbcare"}, {"name": "racing", "delta": 0.1}, {"name": "guess"}))
    cache = {}
    cached = [run_sweep(SweepConfig(risk=r, **base), cache=cache) for r in (MI, SR)]
    fresh = [run_sweep(SweepConfig(risk=r, **base)) for r in (MI, SR)]
    assert cached == fresh
    # dbcare differs by risk kind; racing and guess are shared
    assert len(cache) == 2 * 4
