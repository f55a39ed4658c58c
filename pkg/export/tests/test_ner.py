import json

import pytest

from newsim_export.cli import main
from newsim_export.embed import ModelLoadError
from newsim_export.ner import PUBLISHED_LABELS, PatternTagger, export_entities, load_tagger
from newsim_export.translate import EchoTranslator


class TestPatternTagger:
    def test_country_mention(self):
        tagger = PatternTagger()
        mentions = tagger.tag("Officials in France announced new rules")
        assert ("France", "GPE") in mentions

    def test_dates_numbers_ordinals(self):
        tagger = PatternTagger()
        mentions = dict(tagger.tag("the 3rd meeting on 2021-05-01 drew 42 people"))
        assert mentions["3rd"] == "ORDINAL"
        assert mentions["2021-05-01"] == "DATE"
        assert mentions["42"] == "CARDINAL"

    def test_custom_lexicon(self, tmp_path):
        lex = tmp_path / "lex.csv"
        lex.write_text("surface,label\nAcme Corp,ORG\n", encoding="utf-8")
        tagger = load_tagger(f"pattern:{lex}")
        assert ("Acme Corp", "ORG") in tagger.tag("report about Acme Corp today")

    def test_missing_lexicon_fails_fast(self, tmp_path):
        with pytest.raises(ModelLoadError, match="not found"):
            load_tagger(f"pattern:{tmp_path / 'nope.csv'}")

    def test_bad_lexicon_label_rejected(self, tmp_path):
        lex = tmp_path / "lex.csv"
        lex.write_text("Acme,WIDGET\n", encoding="utf-8")
        with pytest.raises(ModelLoadError, match="WIDGET"):
            load_tagger(f"pattern:{lex}")


class TestExportEntities:
    def test_country_document_gets_gpe(self, three_docs, tmp_path):
        out = tmp_path / "ents.jsonl"
        count = export_entities(str(three_docs), "pattern", str(out))
        assert count == 3
        rows = {json.loads(line)["id"]: json.loads(line)["mentions"]
                for line in out.read_text().strip().splitlines()}
        labels_d1 = {(m["surface"], m["label"]) for m in rows["d1"]}
        assert ("France", "GPE") in labels_d1

    def test_empty_document_empty_mentions(self, tmp_path):
        docs = tmp_path / "docs.jsonl"
        docs.write_text('{"id": "e1", "lang": "en", "title": "", "text": ""}\n',
                        encoding="utf-8")
        out = tmp_path / "ents.jsonl"
        export_entities(str(docs), "pattern", str(out))
        row = json.loads(out.read_text())
        assert row == {"id": "e1", "mentions": []}

    def test_labels_within_published_set(self, three_docs, tmp_path):
        out = tmp_path / "ents.jsonl"
        export_entities(str(three_docs), "pattern", str(out))
        for line in out.read_text().strip().splitlines():
            for mention in json.loads(line)["mentions"]:
                assert mention["label"] in PUBLISHED_LABELS

    def test_translate_first_uses_translator(self, tmp_path):
        docs = tmp_path / "docs.jsonl"
        docs.write_text(json.dumps({"id": "g1", "lang": "de", "title": "Bericht",
                                    "text": "France 2021-05-01"}) + "\n",
                        encoding="utf-8")
        out = tmp_path / "ents.jsonl"

        class Recorder(EchoTranslator):
            calls = []

            def translate(self, text, source_lang, target_lang):
                self.calls.append((source_lang, target_lang))
                return super().translate(text, source_lang, target_lang)

        translator = Recorder()
        export_entities(str(docs), "pattern", str(out), translate_first=True,
                        translator=translator)
        assert translator.calls == [("de", "en")]

    def test_cli(self, three_docs, tmp_path):
        out = tmp_path / "ents.jsonl"
        assert main(["export-entities", "--model", "pattern",
                     "--in", str(three_docs), "--out", str(out)]) == 0
        assert out.exists()
