#!/usr/bin/env python3
# Copyright 2026 The Credence Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes a small synthetic survey + cohort bundle under data/example/.

The numbers are made up. They exist so the CLI can be exercised end to end
against the mock backend without the real survey or study files.
"""

import csv
import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "data" / "example"

GROUPS = {
    "gender": ["female", "male"],
    "age": ["younger", "older"],
    "education": ["completed_hs", "not_completed_hs"],
    "living_area": ["rural", "urban"],
}

CLAIMS = [
    ("c1", "Drinking bleach cures viral infections within a day.", "fake"),
    ("c2", "Regular handwashing reduces the spread of common colds.", "true"),
    ("c3", "Vaccines contain microchips used to track citizens.", "fake"),
    ("c4", "Measles vaccination campaigns cut child mortality worldwide.", "true"),
    ("c5", "The national election was decided by millions of fake ballots.", "fake"),
    ("c6", "Parliament passed the annual budget after a public vote.", "true"),
    ("c7", "Senators secretly own the companies that print ballots.", "fake"),
    ("c8", "Voter turnout rose in the last election compared to the previous one.", "true"),
    ("c9", "Global temperatures have not changed in the past century.", "fake"),
    ("c10", "Arctic sea ice extent has declined over recent decades.", "true"),
    ("c11", "Wind turbines cause cancer in nearby residents.", "fake"),
    ("c12", "Solar panel prices have fallen sharply over the last decade.", "true"),
    ("c13", "Mobile phone towers spread viral diseases.", "fake"),
    ("c14", "Smartphones can be used to access online banking services.", "true"),
    ("c15", "Social media apps listen to every conversation to sell ads.", "fake"),
    ("c16", "Password managers store credentials in encrypted form.", "true"),
    ("c17", "Banks will confiscate all savings accounts next month.", "fake"),
    ("c18", "Central banks raise interest rates to slow inflation.", "true"),
    ("c19", "A secret cryptocurrency guarantees tripled savings in a week.", "fake"),
    ("c20", "Inflation reduces the purchasing power of cash savings.", "true"),
]


def distributions(rng, taxonomy):
    lines = []
    for row in taxonomy:
        k = int(row["scale_size"])
        base = rng.dirichlet(np.ones(k) * 2.0)
        for axis, groups in GROUPS.items():
            for group in groups:
                p = rng.dirichlet(base * 30.0 + 0.1)
                counts = np.maximum(np.round(p * 400), 0).astype(int).tolist()
                if sum(counts) == 0:
                    counts[0] = 1
                lines.append(json.dumps({"qid": row["qid"], "axis": axis,
                                         "group": group, "counts": counts}))
    return lines


def cohort(rng, n_participants, claims_per_person, with_living_area):
    rows = []
    susceptibility = {"female": 0.0, "male": 0.05, "younger": 0.08, "older": -0.04,
                      "completed_hs": -0.08, "not_completed_hs": 0.1,
                      "rural": 0.05, "urban": -0.03}
    for i in range(1, n_participants + 1):
        gender = rng.choice(GROUPS["gender"])
        age = int(rng.choice([22, 28, 33, 45, 64, 71]))
        education = rng.choice(GROUPS["education"])
        living = rng.choice(GROUPS["living_area"]) if with_living_area else ""
        picks = rng.choice(len(CLAIMS), size=claims_per_person, replace=False)
        bias = susceptibility[gender] + susceptibility[education]
        bias += susceptibility["younger"] if age <= 35 else susceptibility["older"]
        if living:
            bias += susceptibility[living]
        for idx in sorted(picks):
            cid, text, gold = CLAIMS[idx]
            p_true = (0.8 if gold == "true" else 0.3) + bias
            choice = "true" if rng.random() < p_true else "fake"
            rows.append({"pid": f"p{i}", "claim_id": cid, "claim_text": text,
                         "gold_label": gold, "participant_choice": choice,
                         "gender": gender, "age": age, "education": education,
                         "living_area": living})
    return rows


def write_csv(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def main():
    rng = np.random.default_rng(20261018)
    OUT.mkdir(parents=True, exist_ok=True)
    with open(ROOT / "data" / "wvs_taxonomy.csv") as f:
        taxonomy = list(csv.DictReader(f))
    (OUT / "distributions.ndjson").write_text("\n".join(distributions(rng, taxonomy)) + "\n")
    write_csv(OUT / "pandora.csv", cohort(rng, 24, 6, True))
    mist = cohort(rng, 24, 6, False)
    for r in mist:
        del r["living_area"]
    write_csv(OUT / "mist2.csv", mist)
    config = {
        "version": 1,
        "seed": 7,
        "datasets": [{"kind": "pandora", "path": "pandora.csv"},
                     {"kind": "mist2", "path": "mist2.csv"}],
        "survey": {"questions": "../wvs_taxonomy.csv",
                   "distributions": ["distributions.ndjson"]},
        "endpoints": [{"name": "mock-blind", "model": "mock-blind",
                       "mock": "demographics_blind", "max_inflight": 4},
                      {"name": "mock-keyed", "model": "mock-keyed",
                       "mock": "keyed:female", "max_inflight": 4}],
        "settings": ["zero-shot", "demo-only", "imputed", "imputed+demo",
                     "observed", "imputed+observed"],
        "axes": ["gender", "age", "education", "living_area"],
        "runs": 3,
        "temperature": 0.0,
        "output_dir": "../../out/example",
        "cache_dir": "../../out/example-cache",
        "adapter": {"phase1": {"lr": 0.0005, "batch": 16, "epochs": 2, "seed": 7},
                    "phase2": {"lr": 0.0005, "batch": 8, "epochs": 2, "seed": 7},
                    "mock_embedding_dim": 32},
        "thematic": {"k": 5, "iterations": 200, "seed": 7},
    }
    (OUT / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
