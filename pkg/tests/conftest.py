import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).parent))


def pytest_runtest_logreport(report):
    # One visible line per acceptance criterion, pass or fail.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::", 1)[-1]
        print(f"\n[ACCEPTANCE {status}] {name}", flush=True)
