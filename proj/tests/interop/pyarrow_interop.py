"""Reads the CLI's parquet output with pyarrow and compares it with the jsonl output."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import pyarrow.parquet as pq
except ImportError:
    print("pyarrow not installed; skipping")
    sys.exit(77)


def main() -> int:
    cli, source = sys.argv[1], Path(sys.argv[2])
    corpus = source / "samples" / "multilang"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for fmt in ("parquet", "jsonl"):
            subprocess.run([cli, "profile", "--input", str(corpus), "--out", str(tmp / fmt), "--format", fmt],
                           check=True)
        failures = 0
        for name in ("nodes", "edges", "metrics"):
            table = pq.read_table(tmp / "parquet" / f"{name}.parquet").to_pylist()
            lines = (tmp / "jsonl" / f"{name}.jsonl").read_text().splitlines()
            rows = [json.loads(line) for line in lines if line.strip()]
            if table != rows:
                failures += 1
                print(f"{name}: parquet and jsonl disagree ({len(table)} vs {len(rows)} rows)")
            else:
                print(f"{name}: {len(rows)} rows agree")
        return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
