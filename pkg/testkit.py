#!/usr/bin/env python3
"""
SpilloverScope - Shared Test Runner
===================================

Every root test module holds plain ``test_*`` functions (collectable by
pytest) and ends with ``run_module(globals())`` so it can also run standalone:

    python test_core.py [test_name ...] [--verbose] [--json]

Exit codes: 0 all passed, 1 failures, 2 runner crash.
"""

import sys
import json
import time
import argparse
import traceback
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))


class TestResult:
    """Container for test results"""
    __test__ = False  # not a pytest class

    def __init__(self, name: str):
        self.name = name
        self.passed = False
        self.error: Optional[BaseException] = None
        self.details: Dict[str, Any] = {}
        self.duration = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "error": f"{type(self.error).__name__}: {self.error}" if self.error else None,
            "duration": round(self.duration, 3),
            "details": self.details,
        }


class ModuleRunner:
    """Runs the test functions of one module and reports"""

    def __init__(self, title: str, tests: Dict[str, Callable[[], Any]], verbose: bool = False):
        self.title = title
        self.tests = tests
        self.verbose = verbose
        self.results: List[TestResult] = []

    def run_test(self, name: str, test_func: Callable[[], Any]) -> TestResult:
        """Run a single test with error handling"""
        result = TestResult(name)
        started = time.time()
        try:
            if self.verbose:
                print(f"\n{'=' * 60}\nRunning: {name}\n{'=' * 60}")
            test_func()
            result.passed = True
            print(f"PASSED: {name}")
        except Exception as e:
            result.error = e
            result.details["traceback"] = traceback.format_exc()
            print(f"FAILED: {name}")
            print(f"  Error: {type(e).__name__}: {e}")
            if self.verbose:
                traceback.print_exc()
        result.duration = time.time() - started
        self.results.append(result)
        return result

    def run(self, selected: List[str]) -> int:
        names = selected or list(self.tests)
        unknown = [n for n in names if n not in self.tests]
        if unknown:
            print(f"Unknown test(s): {', '.join(unknown)}")
            print(f"Available: {', '.join(self.tests)}")
            return 2

        print("\n" + "=" * 70)
        print(self.title)
        print("=" * 70)
        for name in names:
            self.run_test(name, self.tests[name])

        passed = sum(1 for r in self.results if r.passed)
        failed = len(self.results) - passed
        print("=" * 70)
        print(f"SUMMARY: {passed} passed, {failed} failed")
        print("=" * 70)
        return 0 if failed == 0 else 1


def run_module(namespace: Dict[str, Any]) -> None:
    """Standalone entry point for a test module"""
    parser = argparse.ArgumentParser(description=namespace.get("__doc__", "").strip().splitlines()[0]
                                     if namespace.get("__doc__") else "tests")
    parser.add_argument("tests", nargs="*", help="Test function names (default: all)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    parser.add_argument("--json", action="store_true", help="Print results as JSON")
    args = parser.parse_args()

    tests = {name: obj for name, obj in namespace.items() if name.startswith("test_") and callable(obj)}
    title = (namespace.get("__doc__") or "Tests").strip().splitlines()[0]
    runner = ModuleRunner(title, tests, verbose=args.verbose)
    try:
        code = runner.run(args.tests)
    except Exception as e:
        print(f"\nFATAL ERROR: {e}")
        traceback.print_exc()
        sys.exit(2)
    if args.json:
        print(json.dumps([r.to_dict() for r in runner.results], indent=2))
    sys.exit(code)


@contextmanager
def time_budget(seconds: float, label: str) -> Iterator[None]:
    """Fail the enclosing test when the block runs longer than ``seconds``"""
    started = time.perf_counter()
    yield
    elapsed = time.perf_counter() - started
    assert elapsed < seconds, f"{label} took {elapsed:.1f}s (budget {seconds:.0f}s)"
