"""Planted-relation study: gas is a strictly increasing function of GV.

Runs the full corpus -> join -> stats pipeline on synthetic contracts and
prints the correlation summary. Spearman's rho between GV and gas must be 1.

    python3 scripts/planted_study.py --n 300 --jobs 4 --workdir /tmp/planted
"""

from __future__ import annotations

import argparse
import tempfile
import time
from pathlib import Path

from gasmet.cli import main as gasmet_main
from gasmet.synthetic import write_planted_corpus


def run(workdir: Path, n: int, seed: int, jobs: int) -> int:
    corpus = workdir / "contracts"
    rows = write_planted_corpus(corpus, n, seed)
    gas_csv = workdir / "gas.csv"
    gas_csv.write_text("id,gas_used,gas_price_wei\n" + "".join(f"{i},{g},1\n" for i, g in rows))
    metrics_csv = workdir / "metrics.csv"
    code = gasmet_main(["corpus", str(corpus), "--out", str(metrics_csv), "--jobs", str(jobs)])
    if code:
        return code
    return gasmet_main(["stats", "--metrics", str(metrics_csv), "--gas", str(gas_csv), "--out", str(workdir / "report.json")])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--workdir", type=Path, default=None)
    args = ap.parse_args()
    start = time.perf_counter()
    if args.workdir is None:
        with tempfile.TemporaryDirectory() as tmp:
            code = run(Path(tmp), args.n, args.seed, args.jobs)
    else:
        code = run(args.workdir, args.n, args.seed, args.jobs)
    print(f"elapsed {time.perf_counter() - start:.1f}s")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
