"""The command-line surface, driven in-process.

Equivalent shell session:

    vsep gen two_blobs 6 6 2 > g.txt
    vsep solve --input g.txt | vsep validate --graph g.txt
    vsep brute --input g.txt
    vsep bench --input g.txt --epsilons 0.5,1.0

Run with: python3 demos/05_cli_tour.py
"""

import contextlib
import io
import sys
import tempfile
from pathlib import Path

from vsep.cli import main


def run(argv, stdin: str = "") -> tuple[int, str]:
    out = io.StringIO()
    old_stdin = sys.stdin
    sys.stdin = io.StringIO(stdin)
    try:
        with contextlib.redirect_stdout(out):
            code = main(argv)
    finally:
        sys.stdin = old_stdin
    return code, out.getvalue()


def tour() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        graph_file = str(Path(tmp) / "g.txt")

        code, graph_text = run(["gen", "two_blobs", "6", "6", "2"])
        Path(graph_file).write_text(graph_text)
        print(f"$ vsep gen two_blobs 6 6 2        (exit {code})")
        print(graph_text.splitlines()[0], "...")

        code, solve_text = run(["solve", "--input", graph_file])
        print(f"\n$ vsep solve --input g.txt        (exit {code})")
        print(solve_text.rstrip())

        code, verdict = run(["validate", "--graph", graph_file], stdin=solve_text)
        print(f"\n$ ... | vsep validate --graph g.txt   (exit {code})")
        print(verdict.rstrip())

        code, brute_text = run(["brute", "--input", graph_file])
        print(f"\n$ vsep brute --input g.txt        (exit {code})")
        print(brute_text.splitlines()[0])

        code, bench_text = run(
            ["bench", "--input", graph_file, "--epsilons", "0.5,1.0"]
        )
        print(f"\n$ vsep bench --input g.txt --epsilons 0.5,1.0   (exit {code})")
        print(bench_text.rstrip())


if __name__ == "__main__":
    tour()
