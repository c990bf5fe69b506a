import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=100,
    suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# {{{ acceptance report

ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record the outcome of an acceptance criterion; repeated calls add parts to its line."""
    parts = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number: int, ok: bool, detail: str):
        parts.setdefault(number, []).append((ok, detail))
        print(_line(number, parts[number]))

    return record


def _line(number, parts):
    ok = all(p for p, _ in parts)
    return f"criterion {number}: {'PASS' if ok else 'FAIL'}  " + " | ".join(d for _, d in parts)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    parts = config.stash.get(ACCEPTANCE_KEY, {})
    if parts:
        terminalreporter.section("acceptance criteria")
        for k in sorted(parts):
            terminalreporter.write_line(_line(k, parts[k]))

# }}}
