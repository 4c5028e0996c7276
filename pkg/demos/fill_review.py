"""Fill the exported review sheet like two annotators would.

Reads demos/work/review/review_001.csv and writes one filled copy per
annotator into demos/work/.  Both agree on the verdicts (so the demo's
agreement score is 1.0); they differ only in free-text comments.
"""

import csv
import sys
from pathlib import Path

HERE = Path(__file__).parent
SHEET = HERE / "work" / "review" / "review_001.csv"

# draft id -> (is_correct, corrected_response, category)
VERDICTS = {
    "d-04-0002": ("No", "Zama boro ma si tay.", "Fluency"),
    "d-06-0002": ("No", "10 no.", "Orthography"),
}

COMMENTS = {
    "a1": "rewrote the response to answer the question",
    "a2": "agree with the suggested fix",
}


def fill(annotator: str) -> Path:
    with open(SHEET, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    col = {name: header.index(name) for name in header}
    for row in body:
        verdict = VERDICTS.get(row[col["draft_id"]])
        if verdict is None:
            row[col["is_correct"]] = "Yes"
            continue
        row[col["is_correct"]] = verdict[0]
        row[col["corrected_response"]] = verdict[1]
        row[col["error_category"]] = verdict[2]
        row[col["comments"]] = COMMENTS[annotator]
    out = HERE / "work" / f"filled-{annotator}.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        writer.writerows(body)
    return out


def main() -> int:
    if not SHEET.exists():
        print(
            "run `instructlr export-review --config demos/config.toml` first",
            file=sys.stderr,
        )
        return 2
    for annotator in ("a1", "a2"):
        print(f"filled sheet for {annotator} -> {fill(annotator)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
