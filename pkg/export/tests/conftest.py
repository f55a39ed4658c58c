import json

import pytest


@pytest.fixture
def three_docs(tmp_path):
    path = tmp_path / "docs.jsonl"
    rows = [
        {"id": "d1", "lang": "en", "title": "Vote counted in France",
         "text": "The 3rd round ended on 2021-05-01 with 42 districts reporting.",
         "publish_date": "2021-05-01"},
        {"id": "d2", "lang": "de", "title": "Secondary article",
         "text": "completely different words here", "publish_date": None},
        {"id": "d3", "lang": "en", "title": "Vote counted in France",
         "text": "The 3rd round ended on 2021-05-01 with 42 districts reporting.",
         "publish_date": "2021-05-01"},
    ]
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path
