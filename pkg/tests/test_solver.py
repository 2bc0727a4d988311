import math

import numpy as np
import pytest

from conefix import (
    ConstraintError,
    ContractionSpec,
    DomainError,
    Family,
    MappingPair,
    StopConfig,
    apriori_bound,
    certify_fixed_point,
    check_uniqueness,
    contraction_rate,
    get_entry,
    is_converged,
    pcm_eval,
    solve,
    trace_records,
)
from conefix.spaces_catalog import identity, make_r2_max_space, scale_map, sin_third

QPI = math.pi / 4.0


def half_sin_maps():
    return MappingPair(T=scale_map(0.5), S=sin_third)


def test_apriori_bound_values():
    assert apriori_bound(0.5, 1.0, 1.0, 10) == 0.001953125  # 0.5**10 / 0.5, by hand
    assert apriori_bound(0.7, 1.0, 0.0, 0) == 0.0
    assert apriori_bound(0.0, 1.0, 5.0, 1) == 0.0
    with pytest.raises(ConstraintError):
        apriori_bound(1.0, 1.0, 1.0, 0)
    with pytest.raises(ConstraintError):
        apriori_bound(0.5, 0.5, 1.0, 0)


def test_solve_half_sin_reaches_zero():
    space = make_r2_max_space(1.0)
    res = solve(space, half_sin_maps(), [0.7])
    assert res.converged
    assert abs(res.x_star[0]) <= 1e-10
    assert res.residual_T <= 1e-10 and res.residual_S <= 1e-10
    assert res.self_distance <= 1e-10


def test_solve_from_fixed_point_reports_zero_iterations():
    space = make_r2_max_space(1.0)
    res = solve(space, half_sin_maps(), [0.0])
    assert res.converged and res.iterations == 0
    assert np.array_equal(res.x_star, [0.0])
    # the two certifying map applications are still on the trace
    assert len(res.trace) == 2


def test_solve_l1_entry_converges():
    entry = get_entry("l1-tan-quarter")
    res = solve(entry.space, entry.maps, np.full(8, QPI))
    assert res.converged
    assert np.all(np.abs(res.x_star) <= 1e-10)


def test_solve_is_deterministic():
    entry = get_entry("l1-tan-quarter")
    a = solve(entry.space, entry.maps, np.full(8, QPI))
    b = solve(entry.space, entry.maps, np.full(8, QPI))
    assert a.status == b.status and len(a.trace) == len(b.trace)
    for sa, sb in zip(a.trace, b.trace):
        assert sa.step_norm == sb.step_norm and sa.self_norm == sb.self_norm
        assert np.array_equal(sa.point, sb.point)
    assert np.array_equal(a.x_star, b.x_star)


def test_solve_applies_each_map_once_per_step():
    entry = get_entry("interval-cos-half")
    calls = {"n": 0}

    def count(fn):
        def wrapped(x):
            calls["n"] += 1
            return fn(x)

        return wrapped

    maps = MappingPair(T=count(entry.maps.T), S=count(entry.maps.S))
    res = solve(entry.space, maps, [0.6])
    assert calls["n"] == len(res.trace)


def test_solve_max_iters_exceeded_with_hand_checked_trace():
    entry = get_entry("l1-tan-quarter")
    x0 = np.full(8, QPI)
    res = solve(entry.space, entry.maps, x0, StopConfig(tol=1e-12, max_iters=3))
    assert res.status == "max_iters_exceeded"
    assert len(res.trace) == 3
    # oracle: run the three alternating steps by hand
    x1 = x0 * np.tan(x0) / 3.0
    x2 = 0.25 * x1
    norm1 = float(np.sum(np.maximum(x1, x0)))
    norm2 = float(np.sum(np.maximum(x2, x1)))
    assert res.trace.steps[0].step_norm == norm1
    assert res.trace.steps[1].step_norm == norm2
    assert res.trace.steps[2].step_norm > 1e-12


def test_trace_indices_contiguous_and_records_schema():
    entry = get_entry("interval-half-sin")
    res = solve(entry.space, entry.maps, [0.7])
    assert [st.n for st in res.trace.steps] == list(range(len(res.trace)))
    for rec in trace_records(res):
        assert set(rec) == {"n", "step_norm", "self_norm", "point"}
        assert len(rec["point"]) == 1


def test_geometric_decay_and_cauchy_envelope():
    for entry_id in ("l1-tan-quarter", "interval-half-sin", "interval-cos-half"):
        entry = get_entry(entry_id)
        rate = contraction_rate(entry.spec)
        res = solve(entry.space, entry.maps, entry.space.upper.copy())
        norms = res.trace.step_norms()
        for n in range(len(norms)):
            assert norms[n] <= rate**n * norms[0] * (1.0 + 1e-9)
        pts = [st.point for st in res.trace.steps]
        rng = np.random.default_rng(3)
        for _ in range(20):
            n, m = sorted(rng.choice(len(pts), size=2, replace=False))
            if n == m:
                continue
            val = entry.space.ambient.norm(pcm_eval(entry.space, pts[m], pts[n]))
            assert val <= apriori_bound(rate, 1.0, norms[0], n) * (1.0 + 1e-9)


def test_converged_result_satisfies_limit_test():
    entry = get_entry("interval-cos-half")
    res = solve(entry.space, entry.maps, [0.7])
    tail = [st.point for st in res.trace.steps[-3:]] + [res.x_star]
    assert is_converged(entry.space, tail, res.x_star, tol=1e-10)


def test_solve_domain_escape_names_the_step():
    space = make_r2_max_space(1.0)
    runaway = MappingPair(T=lambda x: x + 1.0, S=identity)
    with pytest.raises(DomainError) as err:
        solve(space, runaway, [0.1])
    assert "step 0" in str(err.value)


def test_certify_fixed_point_examples():
    entry = get_entry("interval-cos-half")
    assert certify_fixed_point(entry.space, entry.maps, [0.0], tol=1e-8).ok

    space = make_r2_max_space(1.0)
    halves = MappingPair(T=scale_map(0.5), S=scale_map(0.5))
    report = certify_fixed_point(space, halves, [0.5], tol=1e-8)
    assert not report.ok and report.residual_T >= 0.5

    # a genuinely fixed point with nonzero self-distance still fails
    ident = MappingPair(T=identity, S=identity)
    report = certify_fixed_point(space, ident, [0.5], tol=1e-8)
    assert not report.ok
    assert report.induced_T == 0.0 and report.induced_S == 0.0
    assert report.self_distance == 0.5  # p(x,x) = x under the max metric


def test_check_uniqueness_agrees_on_zero():
    space = make_r2_max_space(1.0)
    report = check_uniqueness(space, half_sin_maps(), [[0.1], [0.4], [QPI]])
    assert report.agree is True and report.max_gap <= 1e-9
    halves = MappingPair(T=scale_map(0.5), S=scale_map(0.5))
    report = check_uniqueness(space, halves, [[0.0], [0.7]])
    assert report.agree is True


def test_check_uniqueness_implicit_linear_not_asserted():
    space = make_r2_max_space(1.0)
    spec = ContractionSpec(
        Family.IMPLICIT_LINEAR, alpha=1.0, beta=0.0, gamma=0.5, s=0.5, r=0.0
    )
    halves = MappingPair(T=scale_map(0.5), S=scale_map(0.5))
    report = check_uniqueness(space, halves, [[0.1], [0.6]], spec=spec)
    assert not report.asserted and report.agree is None
    assert "not asserted" in report.note
    assert report.ok


def test_check_uniqueness_requires_two_seeds():
    space = make_r2_max_space(1.0)
    with pytest.raises(ConstraintError):
        check_uniqueness(space, half_sin_maps(), [[0.1]])


def test_check_uniqueness_skips_divergent_runs():
    space = make_r2_max_space(1.0)
    ident = MappingPair(T=identity, S=identity)
    stop = StopConfig(tol=1e-10, max_iters=5)
    report = check_uniqueness(space, ident, [[0.3], [0.5]], stop)
    assert report.skipped == (0, 1)
    assert report.agree is True  # nothing left to compare


def test_use_apriori_stop_with_certified_rate():
    entry = get_entry("interval-cos-half")
    stop = StopConfig(tol=1e-6, max_iters=1000, use_apriori=True)
    res = solve(entry.space, entry.maps, [0.7], stop, entry.spec)
    assert res.converged
