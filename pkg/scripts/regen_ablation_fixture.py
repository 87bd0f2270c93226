"""Regenerate tests/fixtures/ablation_seeds_1_10.json.

Run only after an intentional change to the needle suite or scoring; the
acceptance suite compares against the committed file exactly.
"""

import json
from pathlib import Path

from rankmem.harness.needle import NeedleConfig, run_ablation

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "ablation_seeds_1_10.json"


def main():
    cfg = NeedleConfig(n_docs=210, n_needles=10, k=8)
    rows = []
    for seed in range(1, 11):
        for r in run_ablation(seed, cfg):
            rows.append({"seed": seed, "mode": r.name,
                         "precision_at_k": r.precision_at_k, "recall_at_k": r.recall_at_k})
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"config": {"n_distractors": 200, "n_needles": 10, "k": 8},
                               "rows": rows}, indent=1) + "\n")
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
