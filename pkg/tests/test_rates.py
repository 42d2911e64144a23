import numpy as np
import pytest

from mustab.rates import (
    BoundedDelay,
    ExponentialMu,
    LogFractionDelay,
    LogLogMu,
    LogMu,
    PowerLagDelay,
    PowerMu,
    ProportionalDelay,
    RateError,
    TabulatedDelay,
    TabulatedMu,
    make_delay,
    make_mu,
)


class TestMuFamilies:
    def test_values(self):
        assert ExponentialMu(0.5).value(2.0) == pytest.approx(np.e)
        assert PowerMu(2.0).value(3.0) == pytest.approx(16.0)
        assert LogMu().value(np.e - 1.0) == pytest.approx(1.0)
        assert LogLogMu().value(np.e ** np.e - 3.0) == pytest.approx(1.0)

    def test_derivatives_match_finite_differences(self):
        mus = [ExponentialMu(0.3), PowerMu(1.7), LogMu(), LogLogMu()]
        for mu in mus:
            for t in (0.5, 3.0, 50.0):
                fd = (mu.value(t + 1e-6) - mu.value(t - 1e-6)) / 2e-6
                assert mu.derivative(t) == pytest.approx(fd, rel=1e-5)

    def test_log_value_consistent(self):
        for mu in (ExponentialMu(0.3), PowerMu(1.7), LogMu(), LogLogMu()):
            for t in (1.0, 10.0, 200.0):
                assert mu.log_value(t) == pytest.approx(np.log(mu.value(t)), rel=1e-12)

    def test_log_value_reaches_huge_times(self):
        # the whole point of log_value: no overflow at t = 10^250
        v = ExponentialMu(1.0).log_value(1e250)
        assert v == pytest.approx(1e250)

    def test_parameter_validation(self):
        with pytest.raises(RateError):
            ExponentialMu(0.0)
        with pytest.raises(RateError):
            PowerMu(-1.0)

    def test_negative_time_rejected(self):
        with pytest.raises(RateError):
            LogMu().value(-1.0)


class TestTabulatedMu:
    def test_interpolates_samples(self):
        t = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        v = np.log1p(t)
        mu = TabulatedMu(t, v)
        assert mu.value(2.0) == pytest.approx(np.log(3.0))
        assert mu.value(3.0) == pytest.approx(np.log(4.0), rel=1e-2)

    def test_rejects_bad_tables(self):
        with pytest.raises(RateError):
            TabulatedMu([1, 2, 3], [1, 2, 3])  # too short
        with pytest.raises(RateError):
            TabulatedMu([1, 2, 2, 4], [1, 2, 3, 4])  # not increasing
        with pytest.raises(RateError):
            TabulatedMu([1, 2, 3, 4], [1, 2, 1.5, 3])  # not monotone
        with pytest.raises(RateError):
            TabulatedMu([1, 2, 30, 40], [1, 2, 3, 3])  # flat tail

    def test_domain_enforced(self):
        mu = TabulatedMu([1, 2, 4, 8], [1, 2, 3, 4])
        with pytest.raises(RateError):
            mu.value(9.0)


class TestDelayFamilies:
    def test_bounded(self):
        d = BoundedDelay(2.0)
        assert d.delayed_time(5.0) == pytest.approx(3.0)

    def test_proportional(self):
        d = ProportionalDelay(0.25)
        assert d.delayed_time(8.0) == pytest.approx(2.0)
        assert d.tau(8.0) == pytest.approx(6.0)
        with pytest.raises(RateError):
            ProportionalDelay(1.0)

    def test_logfraction_validity_window(self):
        d = LogFractionDelay()
        assert d.delayed_time(np.e) == pytest.approx(np.e)
        assert d.delayed_time(np.e ** 2) == pytest.approx(np.e ** 2 / 2.0)
        # below t = e the delay would be negative
        with pytest.raises(RateError):
            d.tau(2.0)

    def test_powerlag_validity_window(self):
        d = PowerLagDelay(0.5)
        assert d.delayed_time(9.0) == pytest.approx(3.0)
        with pytest.raises(RateError):
            d.tau(0.5)

    def test_delay_is_unbounded_for_unbounded_families(self):
        for d in (ProportionalDelay(0.5), LogFractionDelay(), PowerLagDelay(0.5)):
            lo = max(d.t_min, 10.0)
            assert d.tau(lo * 1e6) > d.tau(lo) * 100


class TestTabulatedDelay:
    def test_basic(self):
        t = np.array([0.0, 1.0, 2.0, 4.0])
        d = TabulatedDelay(t, 0.5 * t)
        assert d.tau(2.0) == pytest.approx(1.0)
        assert d.delayed_time_monotone

    def test_nonmonotone_delayed_time_flagged(self):
        t = np.array([0.0, 1.0, 2.0, 3.0])
        tau = np.array([0.0, 0.0, 1.9, 0.0])
        d = TabulatedDelay(t, tau)
        assert not d.delayed_time_monotone

    def test_negative_tau_rejected(self):
        with pytest.raises(RateError):
            TabulatedDelay([0, 1, 2, 3], [0, -0.1, 0, 0])


class TestFactories:
    def test_round_trip_specs(self):
        specs = [
            {"family": "exp", "eps": 0.2},
            {"family": "power", "beta": 1.5},
            {"family": "log"},
            {"family": "loglog"},
        ]
        for spec in specs:
            mu = make_mu(spec)
            assert mu.to_dict()["family"] == spec["family"]

    def test_delay_specs(self):
        assert isinstance(make_delay({"family": "bounded", "tau_max": 1.0}), BoundedDelay)
        assert isinstance(make_delay({"family": "proportional", "q": 0.5}), ProportionalDelay)
        assert isinstance(make_delay({"family": "logfraction"}), LogFractionDelay)
        assert isinstance(make_delay({"family": "powerlag", "alpha": 0.5}), PowerLagDelay)

    def test_unknown_family(self):
        with pytest.raises(RateError):
            make_mu({"family": "quadratic"})
        with pytest.raises(RateError):
            make_delay({"family": "sawtooth"})
