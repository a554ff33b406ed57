import pytest

from hawkes import performance
from hawkes.performance import batched, log_slow_operation, parallel_map, resolve_workers, timed


def _square(x):
    return x * x


@pytest.mark.unit
class TestWorkers:
    def test_default_uses_settings(self, testing_settings):
        testing_settings.threads = 3
        assert resolve_workers() == 3

    def test_zero_means_all_physical_cores(self, mocker):
        mocker.patch("hawkes.performance.psutil.cpu_count", return_value=6)
        assert resolve_workers(0) == 6

    def test_at_least_one_worker(self, mocker):
        mocker.patch("hawkes.performance.psutil.cpu_count", return_value=None)
        assert resolve_workers(0) == 1

    def test_serial_map(self):
        assert parallel_map(_square, range(5), workers=1) == [0, 1, 4, 9, 16]

    @pytest.mark.integration
    def test_parallel_map_keeps_input_order(self):
        assert parallel_map(_square, range(20), workers=2) == [x * x for x in range(20)]


@pytest.mark.unit
class TestHelpers:
    def test_batched(self):
        assert list(batched(list(range(5)), 2)) == [[0, 1], [2, 3], [4]]
        assert [list(b) for b in batched(range(3), 250)] == [[0, 1, 2]]

    def test_slow_operation_warns(self, mocker):
        warning = mocker.patch.object(performance.logger, "warning")
        log_slow_operation("fixed point", 2.0, threshold=1.0)
        warning.assert_called_once()
        assert "SLOW OPERATION: fixed point" in warning.call_args[0][0]

    def test_fast_operation_is_quiet(self, mocker):
        warning = mocker.patch.object(performance.logger, "warning")
        log_slow_operation("fixed point", 0.5, threshold=1.0)
        warning.assert_not_called()

    def test_timed_reports_through_slow_log(self, mocker):
        slow = mocker.patch("hawkes.performance.log_slow_operation")
        with timed("stencils", threshold=0.0):
            pass
        description, elapsed, threshold = slow.call_args[0]
        assert description == "stencils"
        assert elapsed >= 0
        assert threshold == 0.0
