import json

from newsim_export.cli import main
from newsim_export.formats import PlanEntry, read_plan, write_plan
from newsim_export.translate import fulfill_translations


def write_docs(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def sample_inputs(tmp_path, plan_entries):
    docs = tmp_path / "docs.jsonl"
    write_docs(docs, [
        {"id": "a1", "lang": "en", "title": "title one",
         "text": "body one", "publish_date": "2021-02-03"},
        {"id": "b1", "lang": "en", "title": "title two",
         "text": "body two", "publish_date": None},
    ])
    plan = tmp_path / "plan.csv"
    write_plan(plan, plan_entries)
    return docs, plan


class TestFulfill:
    def test_empty_plan(self, tmp_path):
        docs, plan = sample_inputs(tmp_path, [])
        out = tmp_path / "translated.jsonl"
        result = fulfill_translations(str(plan), str(docs), "echo", str(out))
        assert result == {"entries": 0, "fulfilled": 0, "documents": 0}
        assert out.read_text() == ""

    def test_one_entry_two_documents(self, tmp_path):
        docs, plan = sample_inputs(
            tmp_path, [PlanEntry("a1_b1", "de", "fr", "planned")])
        out = tmp_path / "translated.jsonl"
        result = fulfill_translations(str(plan), str(docs), "echo", str(out))
        assert result["fulfilled"] == 1
        rows = [json.loads(line) for line in out.read_text().strip().splitlines()]
        assert len(rows) == 2
        assert {r["id"] for r in rows} == {"a1-de", "b1-fr"}
        assert {r["lang"] for r in rows} == {"de", "fr"}
        assert rows[0]["publish_date"] == "2021-02-03"
        assert read_plan(plan)[0].status == "fulfilled"

    def test_plan_out_redirect_keeps_input(self, tmp_path):
        docs, plan = sample_inputs(
            tmp_path, [PlanEntry("a1_b1", "de", "fr", "planned")])
        before = plan.read_bytes()
        out = tmp_path / "translated.jsonl"
        plan_out = tmp_path / "plan_updated.csv"
        fulfill_translations(str(plan), str(docs), "echo", str(out), str(plan_out))
        assert plan.read_bytes() == before
        assert read_plan(plan_out)[0].status == "fulfilled"

    def test_missing_document_left_planned(self, tmp_path, caplog):
        docs, plan = sample_inputs(
            tmp_path, [PlanEntry("a1_zz", "de", "fr", "planned")])
        out = tmp_path / "translated.jsonl"
        with caplog.at_level("WARNING"):
            result = fulfill_translations(str(plan), str(docs), "echo", str(out))
        assert result["fulfilled"] == 0
        assert read_plan(plan)[0].status == "planned"
        assert "left planned" in caplog.text

    def test_translation_failure_left_planned(self, tmp_path, caplog):
        docs, plan = sample_inputs(
            tmp_path, [PlanEntry("a1_b1", "de", "fr", "planned")])
        out = tmp_path / "translated.jsonl"

        class Broken:
            def translate(self, text, source_lang, target_lang):
                raise RuntimeError("model exploded")

        with caplog.at_level("WARNING"):
            result = fulfill_translations(str(plan), str(docs), "echo", str(out),
                                          translator=Broken())
        assert result["fulfilled"] == 0
        assert read_plan(plan)[0].status == "planned"

    def test_already_fulfilled_skipped(self, tmp_path):
        docs, plan = sample_inputs(
            tmp_path, [PlanEntry("a1_b1", "de", "fr", "fulfilled")])
        out = tmp_path / "translated.jsonl"
        result = fulfill_translations(str(plan), str(docs), "echo", str(out))
        assert result == {"entries": 1, "fulfilled": 0, "documents": 0}

    def test_cli(self, tmp_path):
        docs, plan = sample_inputs(
            tmp_path, [PlanEntry("a1_b1", "de", "fr", "planned")])
        out = tmp_path / "translated.jsonl"
        assert main(["fulfill-translations", "--model", "echo",
                     "--in", str(docs), "--out", str(out),
                     "--plan", str(plan)]) == 0
        assert out.exists()
        assert read_plan(plan)[0].status == "fulfilled"
