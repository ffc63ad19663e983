"""Project embeddings onto a social dimension and score pairwise ranking
agreement against synthetic survey ratings."""

import numpy as np

from personae.eval_dimension import (
    DimensionSpec,
    SurveyRating,
    bootstrap_ci,
    build_dimension,
    project,
    race_aggregate,
    ranking_agreement,
)
from personae.store import TableProvider

# a toy embedding space with one meaningful axis plus noise
rng = np.random.default_rng(0)
names = [f"identity {i:02d}" for i in range(25)]
position = np.linspace(-1.0, 1.0, 25)          # ground-truth placement
vectors = np.c_[position, rng.normal(0, 0.15, (25, 3))]
phrases = ["pole high", "pole low"] + names
matrix = np.vstack([[1.0, 0, 0, 0], [-1.0, 0, 0, 0], vectors])
provider = TableProvider(phrases, matrix)

spec = DimensionSpec("axis", (("pole high", "pole low"),), high_pole="a")
direction = build_dimension(provider, spec)
print(f"dimension vector built from seed pairs, norm = {np.linalg.norm(direction):.3f}")
print(f"projection of extremes: {project(provider, names[0], direction):+.3f} "
      f"vs {project(provider, names[-1], direction):+.3f}")

# survey means that track the ground truth, with rating noise
survey = [
    SurveyRating(n, "axis", mean=float(3 + 2 * position[i] + rng.normal(0, 0.2)),
                 sd=float(rng.uniform(0.2, 0.6)), n_raters=5)
    for i, n in enumerate(names)
]

report = ranking_agreement(provider, spec, survey)
lo, hi = bootstrap_ci(report, n_resamples=1000, seed=1)
print(f"\nranking agreement: {report.score:.3f}  (95% CI [{lo:.3f}, {hi:.3f}])")
print(f"identities scored: {report.n_identities_scored}")
worst = sorted(report.per_identity.items(), key=lambda kv: kv[1])[:3]
print("hardest identities:", ", ".join(f"{n} ({v:.2f})" for n, v in worst))

# race-style category averaging over several subdimension reports
categories = []
for shift in (0.0, 0.1, -0.1, 0.05, -0.05):
    noisy = [
        SurveyRating(r.identity, "axis", r.mean + shift, r.sd, r.n_raters) for r in survey
    ]
    categories.append(ranking_agreement(provider, spec, noisy))
print(f"\ncategory-averaged score over {len(categories)} subdimensions: "
      f"{race_aggregate(categories):.3f}")
