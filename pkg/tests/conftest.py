import pytest

from pipedrive.model import LoadPulse, PipeSpec, SoilSpec

# reference set: steel pipe in sandy loam
E_REF = 2.1e11
RHO_REF = 7530.0
H_REF = 0.003
R_REF = 0.045
A_REF = 611.0
B_REF = 357.0
GAMMA_REF = 2000.0
P0_REF = 88e3


def ref_pipe(L=7.5, L1=4.0) -> PipeSpec:
    return PipeSpec(E=E_REF, rho=RHO_REF, h=H_REF, R=R_REF, L=L, L1=L1)


def ref_soil(R2=0.8, tau0=0.1e6) -> SoilSpec:
    return SoilSpec.from_speeds(A_REF, B_REF, GAMMA_REF, R2, tau0)


def field_pulse() -> LoadPulse:
    """Half-sine used in the friction runs."""
    return LoadPulse.half_sine(P0_REF, 0.22e-3)


@pytest.fixture
def pipe():
    return ref_pipe()


@pytest.fixture
def soil():
    return ref_soil()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
