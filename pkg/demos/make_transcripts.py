"""Regenerate the committed demo transcripts.

Runs the full pipeline once against a small scripted model and records
every completion into demos/transcripts/, keyed by request content.  The
committed transcripts let `instructlr run --config demos/config.toml`
work offline; rerunning this script after a prompt change refreshes them.
"""

import json
import shutil
import sys
from pathlib import Path

from instructlr.config import load_config
from instructlr.core import NO_COT
from instructlr.gateway import CallableBackend, Gateway, RecordingBackend
from instructlr.pipeline import format_run_report, run_pipeline
from instructlr.resources import load_topics

HERE = Path(__file__).parent

TOPIC_NAMES = {t.id: t.name_fr for t in load_topics()}

# (topic id, slot) -> French seed instruction
SEEDS = {
    (1, 1): "Quelle est la capitale du Niger ?",
    (1, 2): "Citez un fleuve qui traverse le Niger.",
    (4, 1): "Pourquoi met-on la viande au frais ?",
    (4, 2): "S'il pleut, pourquoi se met-on à l'abri ?",
    (6, 1): "Combien font 3 plus 4 ?",
    (6, 2): "Combien font 5 fois 2 ?",
}

# draft id -> (instruction, response, chain of thought)
DRAFTS = {
    "d-01-0001": ("Ifo no ga ti Niger birni beero?", "Niamey no.", NO_COT),
    "d-01-0002": (
        "Ci isa fo kaŋ ga gana Niger laabo ra.",
        "Isa Beeri no ga gana laabo ra.",
        NO_COT,
    ),
    "d-04-0001": (
        "Ifo se no iri ga ham jisi yeeno ra?",
        "Zama a ma si sara.",
        "Ham ga sara nda dungay. Yeeno ga a gaay. "
        "Woodin se no iri ga a jisi yeeno ra.",
    ),
    "d-04-0002": (
        "Da beene hari ga kaŋ, ifo se no boro ga tugu?",
        "Boro tugu zama.",
        "Beene hari ga boro tayandi. Tuguyaŋ ga boro gaay. "
        "Woodin se no boro ga tugu.",
    ),
    "d-06-0001": ("3 nda 4 margu, ifo no ga fatta?", "7 no.", NO_COT),
    "d-06-0002": ("5 margu sorro hinka, ifo no ga fatta?", "10 yo.", NO_COT),
}

# One response the checker can fix in place, one it can only reject.
LOW_FIX = {"d-06-0002": "10 no."}
TOP_DRAFT = "d-04-0002"

_YES = "Is the sentence correct? Yes"


def scripted_model(request):
    parts = request.request_tag.split(":")
    if parts[0] == "seed":
        topic_id, slot = int(parts[1]), int(parts[2])
        return json.dumps(
            {
                "instruction_fr": SEEDS[(topic_id, slot)],
                "context_fr": TOPIC_NAMES[topic_id],
            },
            ensure_ascii=False,
        )
    if parts[0] == "draft":
        draft_id = "d" + parts[1][1:]
        seed_key = (int(parts[1].split("-")[1]), int(parts[1].split("-")[2]))
        instr, resp, cot = DRAFTS[draft_id]
        return json.dumps(
            {
                "instr_fr": SEEDS[seed_key],
                "instr_lrl": instr,
                "resp_lrl": resp,
                "CoT_lrl": cot,
                "lang": "dje",
            },
            ensure_ascii=False,
        )
    if parts[0] == "check":
        draft_id, field = parts[1], parts[2]
        if field == "resp_lrl" and draft_id in LOW_FIX:
            return (
                "Is the sentence correct? No\n"
                "Reason: the final copula is misspelled.\n"
                "Corrections (if incorrect):\n"
                f'Option 1: "{LOW_FIX[draft_id]}" (copula restored)'
            )
        if field == "resp_lrl" and draft_id == TOP_DRAFT:
            return (
                "Is the sentence correct? No\n"
                "Reason: the response does not answer the instruction."
            )
        return _YES
    raise AssertionError(f"unexpected request tag: {request.request_tag}")


def main() -> int:
    config = load_config(HERE / "config.toml")
    store = config.paths.transcript_dir
    if store.exists():
        shutil.rmtree(store)
    backend = RecordingBackend(CallableBackend(scripted_model), store)
    gateway = Gateway(backend, requests_per_minute=1e9, sleep=lambda s: None)
    report = run_pipeline(config, gateway=gateway)
    print(format_run_report(report))
    # The recording run leaves pipeline output behind; the walkthrough
    # should start from a clean slate.
    shutil.rmtree(config.paths.work_dir, ignore_errors=True)
    count = len(list(store.glob("*.txt")))
    print(f"recorded {count} transcript(s) -> {store}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
