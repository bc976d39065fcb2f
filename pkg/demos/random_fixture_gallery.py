"""Seeded random bundles: partial-bijection semigroups with exact coboundary
twists, pushed through the full verification pipeline.

Every fixture is reproducible from its seed; the pipeline report records
per-stage verdicts and witnesses.
"""

from germlab.cli import run_pipeline, seeded_random_fixture

for seed in range(8):
    doc = seeded_random_fixture(seed)
    n_elems = len(doc["semigroup"]["elements"])
    n_pts = len(doc["space"]["points"])
    twisted = any(
        any(v != [1.0, 0.0] for v in entry[2].values()) for entry in doc["omega"]
    )
    report = run_pipeline(doc, {"n_random": 25})
    stages = " ".join(f"{s['name']}={s['verdict']}" for s in report.stages)
    print(f"seed {seed}: |S|={n_elems} |X|={n_pts} twisted={twisted}")
    print(f"    {stages}")
