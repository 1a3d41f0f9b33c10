LINES: list[str] = []


def record(number: int, title: str, passed: bool, detail: str, seconds: float) -> None:
    LINES.append(f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail} [{seconds:.1f}s]")
