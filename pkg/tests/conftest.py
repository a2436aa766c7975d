import pytest

_VERDICTS = []


class Criterion:
    """Collects the verdict of one acceptance criterion."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.ok = None
        self.detail = "raised before a verdict"

    def verdict(self, ok, detail):
        self.ok = bool(ok)
        self.detail = detail
        line = self.line()
        print(line)
        assert self.ok, line

    def line(self):
        tag = "PASS" if self.ok else "FAIL"
        return f"[{tag}] criterion {self.number:>2}: {self.title} ({self.detail})"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    rec = Criterion(*marker.args)
    yield rec
    _VERDICTS.append(rec)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(_VERDICTS, key=lambda r: r.number):
        terminalreporter.write_line(rec.line())
