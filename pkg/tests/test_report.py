import json

from newsim.augment import distribution_report
from newsim.evaluation import EvalReport, SeriousMistake
from newsim.report import (
    render_text_table,
    save_histogram,
    save_loss_curve,
    save_per_language_chart,
    save_scatter,
    write_eval_outputs,
    write_histogram_csv,
    write_loss_csv,
    write_mistakes_csv,
)


def sample_report():
    return EvalReport(
        overall_pearson=0.91,
        n=40,
        per_lang={("en", "en"): (0.95, 20), ("de", "en"): (0.85, 15)},
        mono_avg=0.95,
        cross_avg=0.85,
        flagged={("ar", "ar"): "only 1 pair(s)"},
    )


class TestTextAndJson:
    def test_table_contents(self):
        text = render_text_table(sample_report())
        assert "en-en" in text
        assert "cross" in text
        assert "skipped: only 1 pair(s)" in text
        assert "0.95000" in text

    def test_written_outputs(self, tmp_path):
        paths = write_eval_outputs(sample_report(), tmp_path)
        data = json.loads(paths["json"].read_text())
        assert data["overall_pearson"] == 0.91
        assert {row["langs"] for row in data["per_language"]} == {"en-en", "de-en"}
        lines = paths["csv"].read_text().strip().splitlines()
        assert lines[0] == "lang1,lang2,pearson,n,mono"
        assert len(lines) == 3

    def test_mistakes_csv(self, tmp_path):
        path = write_mistakes_csv(
            [SeriousMistake("a_b", 1.0, 3.5, -2.5)], tmp_path / "m.csv")
        lines = path.read_text().strip().splitlines()
        assert lines[1].startswith("a_b,1.0,3.5,-2.5")


class TestFigures:
    def test_figures_written_and_deterministic(self, tmp_path):
        report = sample_report()
        p1 = save_per_language_chart(report, tmp_path / "a.png")
        p2 = save_per_language_chart(report, tmp_path / "b.png")
        assert p1.stat().st_size > 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_scatter_and_loss(self, tmp_path):
        scatter = save_scatter([0.1, 0.9], [0.2, 0.8], tmp_path / "s.png")
        loss = save_loss_curve([0.5, 0.25, 0.12], tmp_path / "l.png")
        assert scatter.stat().st_size > 0
        assert loss.stat().st_size > 0

    def test_histogram_outputs(self, tmp_path):
        dist = distribution_report([0.1, 0.5, 0.9, 0.95], bins=5)
        png = save_histogram(dist, tmp_path / "h.png")
        csv_path = write_histogram_csv(dist, tmp_path / "h.csv")
        assert png.stat().st_size > 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "bin_low,bin_high,count"
        assert len(lines) == 6

    def test_loss_csv(self, tmp_path):
        path = write_loss_csv([0.5, 0.2], tmp_path / "loss.csv")
        assert path.read_text().strip().splitlines() == [
            "epoch,loss", "1,0.5", "2,0.2"]
