import math
import mpmath
import numpy as np
import pytest

from gswap import core
from gswap.errors import AsymmetricChannelWarning, InvalidInputError, NotEntangledError
from gswap.measurements import heterodyne_update
from gswap.optomech import OptomechParams, drift_matrix, extract_coefficients, propagate
from gswap.protocol import (
    DEFAULT_TEMPERATURES,
    Strategy,
    SweepResult,
    SweepRow,
    decoherence_time,
    detection_variances,
    heterodyned_stokes_mechanical,
    default_time_grid,
    reduce_strategy,
    run_strategy,
    run_strategy_bruteforce,
    swapped_state,
    sweep,
    xrel_variance,
)
from gswap.swapping import eta_io, swap_symmetric

OP = OptomechParams.operating_point()
STRATEGIES = list(Strategy)


class TestReduceStrategy:
    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_initial_time_is_separable(self, strategy):
        p = OP.at_temperature(5e-3)
        nf = reduce_strategy(propagate(p, 0.0), strategy)
        assert (nf.a, nf.c, nf.d, nf.d_prime) == pytest.approx((p.n_bar + 0.5, 0.5, 0, 0), abs=1e-15)
        eta_minus, _ = eta_io(nf)
        assert core.log_negativity(eta_minus) == 0.0

    @pytest.mark.parametrize("T", [0.0, 5e-3])
    def test_non_assisted_matches_trace_and_normal_form(self, T):
        state = propagate(OP.at_temperature(T), 0.8e-6)
        nf = reduce_strategy(state, Strategy.NON_ASSISTED)
        # oracle ordering (a, c): mechanical first
        reduced = core.partial_trace(state.as_gaussian(), [1, 0]).cm
        ref, _ = core.normal_form(reduced)
        assert (nf.a, nf.c, nf.d, nf.d_prime) == pytest.approx(
            (ref.a, ref.c, ref.d, ref.d_prime), rel=1e-9
        )

    @pytest.mark.parametrize("T", [0.0, 5e-3])
    def test_assisted_matches_heterodyne(self, T):
        state = propagate(OP.at_temperature(T), 1.0e-6)
        nf = reduce_strategy(state, Strategy.ASSISTED)
        V = heterodyne_update(state.as_gaussian(), 2).cm
        assert nf.a == pytest.approx(V[2, 2], rel=1e-9)
        assert nf.c == pytest.approx(V[0, 0], rel=1e-9)
        assert nf.d == pytest.approx(abs(V[0, 2]), rel=1e-9)
        k = extract_coefficients(state)
        assert nf.d == pytest.approx(abs(k.C + k.D * k.F / (k.E + 1)), rel=1e-9)

    def test_woodbury_path_matches_naive_at_low_temperature(self):
        state = propagate(OP.at_temperature(5e-3), 1.3e-6)
        bare = type(state)(state.cm, state.t, state.scaled_time, state.n_bar)
        np.testing.assert_allclose(
            heterodyned_stokes_mechanical(state), heterodyned_stokes_mechanical(bare), rtol=1e-10
        )

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            reduce_strategy(propagate(OP, 1e-6), "both")


def mp_assisted_eta(params, t, dps=50):
    """High-precision reference: exact propagator, heterodyne and swap in mpmath."""
    with mpmath.workdps(dps):
        n = mpmath.mpf(0)
        if params.temperature > 0:
            x = (mpmath.mpf("1.054571817e-34") * mpmath.mpf(params.omega_m)
                 / (mpmath.mpf("1.380649e-23") * mpmath.mpf(params.temperature)))
            n = 1 / mpmath.expm1(x)
        S = mpmath.expm(mpmath.matrix(drift_matrix(params).tolist()) * mpmath.mpf(t))
        V = S * mpmath.diag([0.5, 0.5, n + 0.5, n + 0.5, 0.5, 0.5]) * S.T
        A, B, C = V[0, 0] - 0.5, V[2, 2] - 0.5, V[0, 2]
        D, E, F = -V[2, 4], V[4, 4] - 0.5, V[0, 4]
        a = B + 0.5 - D ** 2 / (E + 1)
        c = A + 0.5 - F ** 2 / (E + 1)
        d = C + D * F / (E + 1)
        return float(abs(a * c - d ** 2) / c)


class TestRunStrategy:
    @pytest.mark.parametrize("strategy", STRATEGIES)
    def test_zero_time(self, strategy):
        assert run_strategy(OP, 0.0, strategy)[1] == 0.0

    def test_non_assisted_operating_point(self):
        eta, e_n = run_strategy(OP, 0.8e-6, Strategy.NON_ASSISTED)
        assert e_n == pytest.approx(0.88, abs=0.01)
        assert 2 * eta == pytest.approx(math.exp(-0.88), abs=0.01)
        assert xrel_variance(swapped_state(OP, 0.8e-6, Strategy.NON_ASSISTED)) == pytest.approx(
            2 * eta, abs=1e-12
        )

    def test_assisted_operating_point(self):
        _, e_n = run_strategy(OP, 1.0e-6, Strategy.ASSISTED)
        assert e_n == pytest.approx(1.1, abs=0.01)

    @pytest.mark.parametrize("strategy", STRATEGIES)
    @pytest.mark.parametrize("T", [0.0, 5e-3])
    @pytest.mark.parametrize("t", [0.2e-6, 0.84e-6, 1.0e-6, 2.4e-6])
    def test_closed_form_matches_bruteforce(self, strategy, T, t):
        p = OP.at_temperature(T)
        closed = run_strategy(p, t, strategy)
        brute = run_strategy_bruteforce(p, t, strategy)
        assert closed[0] == pytest.approx(brute[0], abs=1e-9)

    @pytest.mark.parametrize("strategy", STRATEGIES)
    @pytest.mark.parametrize("t", [0.5e-6, 1.0e-6, 2.0e-6])
    def test_closed_form_matches_bruteforce_room_temperature(self, strategy, t):
        # the six-mode brute-force heterodyne itself loses ~1e-9 at this n_bar
        p = OP.at_temperature(300.0)
        assert run_strategy(p, t, strategy)[0] == pytest.approx(
            run_strategy_bruteforce(p, t, strategy)[0], abs=1e-8
        )

    @pytest.mark.parametrize("t", [0.3e-6, 1.0e-6, 2.7e-6])
    def test_assisted_room_temperature_against_high_precision(self, t):
        p = OP.at_temperature(300.0)
        assert run_strategy(p, t, Strategy.ASSISTED)[0] == pytest.approx(mp_assisted_eta(p, t), abs=1e-9)

    def test_high_precision_reference_at_zero_temperature(self):
        assert run_strategy(OP, 1e-6, Strategy.ASSISTED)[0] == pytest.approx(
            mp_assisted_eta(OP, 1e-6), abs=1e-12
        )


class TestDecoherence:
    @pytest.mark.parametrize("eta", [0.0, 0.1, 0.3, 0.49])
    def test_zero_temperature_limit(self, eta):
        assert decoherence_time(0.0, eta, 1.0) == pytest.approx(1.0, rel=1e-12)
        assert decoherence_time(0.0, eta, 4.0) == pytest.approx(0.25, rel=1e-12)

    def test_formula(self):
        n, eta = 3.0, 0.2
        expected = math.log((2 * n + 1 - 2 * eta) / (2 * n + math.exp(-1) * (1 - 2 * eta)))
        assert decoherence_time(n, eta, 1.0) == pytest.approx(expected, rel=1e-13)

    def test_high_temperature_is_accurate(self):
        n, eta = 7.8e4, 0.2
        with mpmath.workdps(40):
            ref = mpmath.log((2 * n + 1 - 2 * mpmath.mpf(eta)) / (2 * n + mpmath.e ** -1 * (1 - 2 * mpmath.mpf(eta))))
        assert decoherence_time(n, eta, 1.0) == pytest.approx(float(ref), rel=1e-13)

    def test_monotone_in_temperature(self):
        times = [decoherence_time(OP.at_temperature(T).n_bar, 0.2, 1.0) for T in (1e-3, 0.1, 1, 300)]
        assert all(x > y for x, y in zip(times, times[1:]))

    def test_not_entangled(self):
        with pytest.raises(NotEntangledError):
            decoherence_time(1.0, 0.5, 1.0)

    def test_bad_inputs(self):
        with pytest.raises(InvalidInputError):
            decoherence_time(-1.0, 0.2, 1.0)
        with pytest.raises(InvalidInputError):
            decoherence_time(1.0, 0.2, 0.0)


class TestDetection:
    def test_vacuum(self):
        assert xrel_variance(0.5 * np.eye(4)) == pytest.approx(1.0)

    def test_tms_swap(self):
        s = 0.5
        ch, sh = math.cosh(2 * s) / 2, math.sinh(2 * s) / 2
        out = swap_symmetric(core.NormalFormBlocks(ch, ch, sh, -sh))
        assert xrel_variance(out) == pytest.approx(1 / math.cosh(1.0), rel=1e-12)
        xrel, ptot = detection_variances(out)
        assert xrel == pytest.approx(ptot, rel=1e-12)

    def test_asymmetric_warns(self):
        V = np.diag([0.5, 0.5, 2.0, 2.0])
        with pytest.warns(AsymmetricChannelWarning):
            assert xrel_variance(V) == pytest.approx(2.5)

    def test_wrong_shape(self):
        with pytest.raises(InvalidInputError):
            detection_variances(np.eye(6))


class TestSweep:
    def test_single_zero_row(self):
        (result,) = sweep(OP, [0.0], [0.0], Strategy.NON_ASSISTED)
        (row,) = result.rows
        assert row.log_negativity == 0.0 and row.error is None
        assert row.xrel_variance == pytest.approx(2 * row.eta_minus)

    def test_one_result_per_temperature_sorted(self):
        results = sweep(OP, [2e-6, 1e-6, 0.0], DEFAULT_TEMPERATURES, "assisted")
        assert [r.temperature for r in results] == list(DEFAULT_TEMPERATURES)
        for r in results:
            np.testing.assert_array_equal(r.column("t"), [0.0, 1e-6, 2e-6])
            r.check()

    def test_parallel_equals_serial(self):
        grid = default_time_grid(3e-6, 40)
        serial = sweep(OP, grid, [0.0, 300.0], Strategy.ASSISTED, workers=1)
        parallel = sweep(OP, grid, [0.0, 300.0], Strategy.ASSISTED, workers=4)
        for a, b in zip(serial, parallel):
            assert a.rows == b.rows

    def test_env_worker_cap(self, monkeypatch):
        monkeypatch.setenv("GSWAP_THREADS", "nope")
        with pytest.raises(InvalidInputError):
            sweep(OP, [0.0], [0.0], Strategy.ASSISTED)

    def test_failing_row_is_recorded(self, monkeypatch):
        import gswap.protocol as protocol

        def broken(state, strategy):
            raise protocol.ModelInconsistencyError("injected")

        monkeypatch.setattr(protocol, "reduce_strategy", broken)
        (result,) = sweep(OP, [1e-6], [0.0], Strategy.ASSISTED)
        assert len(result.errors) == 1 and "injected" in result.errors[0].error
        assert math.isnan(result.rows[0].eta_minus)

    def test_empty_grids(self):
        with pytest.raises(InvalidInputError):
            sweep(OP, [], [0.0], Strategy.ASSISTED)
        with pytest.raises(InvalidInputError):
            sweep(OP, [0.0], [], Strategy.ASSISTED)

    def test_non_entangled_rows_have_nan_lifetime(self):
        (result,) = sweep(OP, [0.0, 0.84e-6], [300.0], Strategy.NON_ASSISTED)
        assert math.isnan(result.rows[0].decoherence_time)
        assert result.rows[1].decoherence_time > 0

    def test_check_catches_corruption(self):
        (result,) = sweep(OP, [0.8e-6], [0.0], Strategy.NON_ASSISTED)
        row = result.rows[0]
        bad = SweepResult(OP, Strategy.NON_ASSISTED, 0.0, [
            SweepRow(row.t, row.eta_minus, row.log_negativity, row.xrel_variance + 1e-6, row.decoherence_time)
        ])
        with pytest.raises(Exception, match="x_rel"):
            bad.check()
