def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=_order):
        terminalreporter.write_line(line)


def _order(line):
    # "[PASS] C12 ..." -> 12
    tag = line.split()[1]
    return int(tag[1:]) if tag[1:].isdigit() else 99
