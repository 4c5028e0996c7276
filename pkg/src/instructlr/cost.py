"""Production-cost model: LLM token spend vs human review labor.

Three quality-control modes are compared per model: no review at all,
reviewing every pair, and reviewing only the pairs the automated filter
flags.  Error rates ride along for reporting; the dollar arithmetic
depends only on prices, token volume, and how many pairs humans touch.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import QC_MODES, CostBreakdown, CostScenario
from .resources import data_path


@dataclass(frozen=True)
class ModelPreset:
    """Per-model pricing and the observed raw-draft error rate."""

    name: str
    price_per_million_tokens: float
    error_rate: float

    def __post_init__(self) -> None:
        if self.price_per_million_tokens < 0:
            raise ValueError("price_per_million_tokens must be non-negative")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error_rate must be within [0, 1]")


def scenario_cost(scenario: CostScenario) -> CostBreakdown:
    """Price one scenario; dollar figures are rounded to cents.

    The saving is measured against reviewing every pair with the same
    model, so qc_mode=full_human always yields 0.  A degenerate baseline
    of $0 (free model, free labor) reports 0 saving.
    """
    llm = (
        scenario.total_pairs
        * scenario.tokens_per_pair
        / 1_000_000
        * scenario.price_per_million_tokens
    )
    human = scenario.reviewed_pairs * scenario.human_rate_per_pair
    total = llm + human
    baseline = llm + scenario.total_pairs * scenario.human_rate_per_pair
    saving = 0.0 if baseline == 0 else 1.0 - total / baseline
    return CostBreakdown(
        llm_cost=round(llm, 2),
        human_cost=round(human, 2),
        total_cost=round(total, 2),
        saving_vs_full_human=saving,
    )


def build_scenarios(
    models: Sequence[ModelPreset],
    qc_modes: Sequence[str] = QC_MODES,
    total_pairs: int = 50_000,
    tokens_per_pair: float = 75.0,
    human_rate_per_pair: float = 0.40,
    reviewed_pairs: int = 6_000,
) -> list[CostScenario]:
    """Cross models with QC modes; ``reviewed_pairs`` applies to the
    filtered mode only (none reviews nothing, full_human everything)."""
    scenarios = []
    for model in models:
        for mode in qc_modes:
            if mode == "none":
                reviewed = 0
            elif mode == "full_human":
                reviewed = total_pairs
            else:
                reviewed = reviewed_pairs
            scenarios.append(
                CostScenario(
                    model_name=model.name,
                    price_per_million_tokens=model.price_per_million_tokens,
                    tokens_per_pair=tokens_per_pair,
                    total_pairs=total_pairs,
                    error_rate=model.error_rate,
                    qc_mode=mode,
                    human_rate_per_pair=human_rate_per_pair,
                    reviewed_pairs=reviewed,
                )
            )
    return scenarios


def scenario_table(
    scenarios: Iterable[CostScenario],
) -> list[tuple[CostScenario, CostBreakdown]]:
    return [(s, scenario_cost(s)) for s in scenarios]


def load_scenarios(path: str | Path | None = None) -> list[CostScenario]:
    """Build the scenario grid from a JSON preset file.

    Defaults to the shipped presets.  The file carries the model list
    plus the shared volume and labor parameters; an optional
    ``reviewed_pairs_alternatives`` map documents other defensible
    review counts without changing the default grid.
    """
    if path is None:
        path = data_path("scenarios.json")
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    models = [
        ModelPreset(
            name=entry["name"],
            price_per_million_tokens=entry["price_per_million_tokens"],
            error_rate=entry["error_rate"],
        )
        for entry in config["models"]
    ]
    return build_scenarios(
        models,
        qc_modes=tuple(config.get("qc_modes", QC_MODES)),
        total_pairs=config["total_pairs"],
        tokens_per_pair=config["tokens_per_pair"],
        human_rate_per_pair=config["human_rate_per_pair"],
        reviewed_pairs=config["reviewed_pairs"],
    )


_CSV_HEADER = (
    "model",
    "qc_mode",
    "error_rate",
    "price_per_million_tokens",
    "total_pairs",
    "reviewed_pairs",
    "llm_cost",
    "human_cost",
    "total_cost",
    "saving_vs_full_human_pct",
)


def table_to_csv(
    rows: Sequence[tuple[CostScenario, CostBreakdown]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for scenario, cost in rows:
            writer.writerow(
                [
                    scenario.model_name,
                    scenario.qc_mode,
                    f"{scenario.error_rate:.2f}",
                    f"{scenario.price_per_million_tokens:.2f}",
                    scenario.total_pairs,
                    scenario.reviewed_pairs,
                    f"{cost.llm_cost:.2f}",
                    f"{cost.human_cost:.2f}",
                    f"{cost.total_cost:.2f}",
                    f"{cost.saving_vs_full_human * 100:.2f}",
                ]
            )


def format_table(rows: Sequence[tuple[CostScenario, CostBreakdown]]) -> str:
    """Aligned text table for terminal display."""
    header = ("Model", "QC mode", "Err%", "LLM $", "Human $", "Total $", "Saving %")
    body = [
        (
            s.model_name,
            s.qc_mode,
            f"{s.error_rate * 100:.0f}",
            f"{c.llm_cost:,.2f}",
            f"{c.human_cost:,.2f}",
            f"{c.total_cost:,.2f}",
            f"{c.saving_vs_full_human * 100:.2f}",
        )
        for s, c in rows
    ]
    widths = [
        max(len(header[i]), *(len(row[i]) for row in body)) if body else len(header[i])
        for i in range(len(header))
    ]
    def fmt(row):
        cells = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        cells += [row[i].rjust(widths[i]) for i in range(2, len(row))]
        return "  ".join(cells).rstrip()
    lines = [fmt(header), "  ".join("-" * w for w in widths)]
    lines.extend(fmt(row) for row in body)
    return "\n".join(lines)
