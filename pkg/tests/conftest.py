from hypothesis import settings

# first calls compile numba kernels, so per-example timing is meaningless
settings.register_profile("randldc", deadline=None)
settings.load_profile("randldc")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
