import pytest

from hinfdelay.envelope import build_envelope, select_alpha1
from hinfdelay.sensopt import PlantSpec, WeightSpec, solve_optimal_sensitivity
from hinfdelay.strongstab import DeviationParams, solve_deviation
from hinfdelay.winding import FrequencyGrid

REF = dict(h=1.0, alpha=0.1, beta=0.2)


class Reference:
    """Pipeline products for one (h, alpha, beta) instance with N_p = 1."""

    def __init__(self, h, alpha, beta):
        self.h, self.alpha, self.beta = h, alpha, beta
        self.plant = PlantSpec(h)
        self.weight = WeightSpec(alpha, beta)
        self.grid = FrequencyGrid.for_delay(h)
        self.stage1 = solve_optimal_sensitivity(self.plant, self.weight, grid=self.grid)
        self.gamma0 = self.stage1.gamma_opt
        self.omegas = self.grid.omegas(h, exclude=(self.stage1.omega_gamma,))
        self.alpha1 = select_alpha1(self.stage1.n_c * self.gamma0, self.gamma0, alpha, beta,
                                    self.grid, h=h, exclude=(self.stage1.omega_gamma,))
        self.env = build_envelope(self.gamma0, alpha, beta, self.alpha1)
        self.params = DeviationParams.from_envelope(self.env, h, alpha, beta)
        self.stage2 = solve_deviation(self.params, self.stage1, self.plant)


@pytest.fixture(scope="session")
def ref():
    return Reference(**REF)


@pytest.fixture(scope="session")
def small_delay():
    # short delay: the closed loop built from the stage-2 controller is stable
    return Reference(h=0.05, alpha=0.1, beta=0.2)


# acceptance reporting ------------------------------------------------------

def pytest_configure(config):
    config._criteria = {}


@pytest.fixture
def criterion(request):
    """Record a criterion's sub-checks, then assert them all."""
    log = request.config._criteria

    def check(number, checks):
        failed = [name for name, ok in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        log[number] = (status, ", ".join(failed))
        print(f"criterion {number}: {status}" + (f" ({'; '.join(failed)})" if failed else ""))
        assert not failed, f"criterion {number} failed: {failed}"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_criteria", {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log):
        status, failed = log[n]
        line = f"criterion {n:2d}: {status}"
        if failed:
            line += f"  failing checks: {failed}"
        terminalreporter.write_line(line)
