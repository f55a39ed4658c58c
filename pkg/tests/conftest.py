import json

import pytest

from newsim.corpus import ArticlePair, Document


def write_docs(path, docs):
    """docs: list of dicts with id/lang/title/text[/publish_date]."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record = {"publish_date": None, **doc}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_pairs(path, rows):
    """rows: list of CSV-cell lists matching the pairs header."""
    header = "pair_id,lang1,lang2,overall,geography,entities,time,narrative,style,tone"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(cell) for cell in row) + "\n")


def pair_row(pair_id, lang1="en", lang2="en", overall=""):
    return [pair_id, lang1, lang2, overall, "", "", "", "", "", ""]


def make_doc(doc_id, body="one two three four five six seven eight nine ten",
             lang="en", title="a title", publish_date=None):
    return Document(id=doc_id, lang=lang, title=title, body=body,
                    publish_date=publish_date)


def make_pair(pair_id, overall=2.0, lang1="en", lang2="en", split="train"):
    doc_a, doc_b = pair_id.split("_")
    return ArticlePair(pair_id=pair_id, doc_a=doc_a, doc_b=doc_b,
                       lang_pair=(lang1, lang2), overall_raw=overall, split=split)


@pytest.fixture
def tiny_corpus_files(tmp_path):
    """Two well-formed pairs over four documents."""
    docs_path = tmp_path / "docs.jsonl"
    pairs_path = tmp_path / "pairs.csv"
    write_docs(docs_path, [
        {"id": f"d{i}", "lang": "en", "title": f"title {i}",
         "text": "alpha beta gamma delta epsilon zeta eta theta iota kappa"}
        for i in range(1, 5)
    ])
    write_pairs(pairs_path, [
        pair_row("d1_d2", overall=1.5),
        pair_row("d3_d4", overall=3.0),
    ])
    return pairs_path, docs_path
