import json

import pytest

from sortclust.cli import main


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def fixture_csv(tmp_path, name="data.csv"):
    # two tight 1-D clusters
    rows = [0.0, 0.1, 0.2, 5.0, 5.1, 5.2]
    return write(tmp_path / name, "\n".join(str(v) for v in rows) + "\n")


class TestFit:
    def test_writes_labels(self, tmp_path, capsys):
        data = fixture_csv(tmp_path)
        out = tmp_path / "labels.txt"
        assert main(["fit", "--input", data, "--output", str(out),
                     "--radius", "0.3"]) == 0
        labels = [int(v) for v in out.read_text().split()]
        assert len(labels) == 6
        assert labels[0] == labels[1] == labels[2]
        assert labels[3] == labels[4] == labels[5]
        assert labels[0] != labels[3]

    def test_refit_byte_identical(self, tmp_path):
        data = fixture_csv(tmp_path)
        out1, out2 = tmp_path / "a.txt", tmp_path / "b.txt"
        main(["fit", "--input", data, "--output", str(out1), "--radius", "0.3"])
        main(["fit", "--input", data, "--output", str(out2), "--radius", "0.3"])
        assert out1.read_bytes() == out2.read_bytes()

    def test_empty_input(self, tmp_path, capsys):
        empty = write(tmp_path / "empty.csv", "")
        assert main(["fit", "--input", empty]) == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_row_reports_line(self, tmp_path, capsys):
        bad = write(tmp_path / "bad.csv", "1.0,2.0\n3.0,oops\n")
        out = tmp_path / "labels.txt"
        assert main(["fit", "--input", bad, "--output", str(out)]) == 2
        assert "row 2" in capsys.readouterr().err
        assert not out.exists()

    def test_drop_bad_rows(self, tmp_path):
        bad = write(tmp_path / "bad.csv", "1.0\nnope\n2.0\n\n3.0\n")
        out = tmp_path / "labels.txt"
        assert main(["fit", "--input", bad, "--output", str(out),
                     "--drop-bad-rows"]) == 0
        assert len(out.read_text().split()) == 3

    def test_header_flag(self, tmp_path):
        data = write(tmp_path / "h.csv", "f0\n1.0\n2.0\n")
        out = tmp_path / "labels.txt"
        assert main(["fit", "--input", data, "--output", str(out), "--header"]) == 0
        assert len(out.read_text().split()) == 2

    def test_bad_radius(self, tmp_path, capsys):
        data = fixture_csv(tmp_path)
        assert main(["fit", "--input", data, "--radius", "-1"]) == 2

    def test_stats_block(self, tmp_path, capsys):
        data = fixture_csv(tmp_path)
        out = tmp_path / "labels.txt"
        assert main(["fit", "--input", data, "--output", str(out),
                     "--radius", "0.3", "--stats"]) == 0
        text = capsys.readouterr().out
        assert "The 6 data points with 1 features were aggregated into" in text
        assert "comparisons were required" in text

    def test_plot_data(self, tmp_path):
        data = fixture_csv(tmp_path)
        plot = tmp_path / "plot.csv"
        assert main(["fit", "--input", data, "--output", str(tmp_path / "l.txt"),
                     "--radius", "0.3", "--plot-data", str(plot)]) == 0
        lines = plot.read_text().strip().split("\n")
        assert lines[0] == "pc1,pc2,group,cluster"
        assert len(lines) == 7
        for line in lines[1:]:
            pc1, pc2, group, cluster = line.split(",")
            float(pc1), float(pc2), int(group), int(cluster)


class TestBlobPipeline:
    def test_generate_fit_eval_end_to_end(self, tmp_path, capsys):
        data = tmp_path / "blobs.csv"
        truth = tmp_path / "truth.txt"
        labels = tmp_path / "labels.txt"
        assert main(["blobs", "--n", "1000", "--d", "2", "--k", "4",
                     "--std", "0.5", "--seed", "7", "--output", str(data),
                     "--truth", str(truth)]) == 0
        assert main(["fit", "--input", str(data), "--output", str(labels),
                     "--radius", "0.3", "--minpts", "5"]) == 0
        fitted = [int(v) for v in labels.read_text().split()]
        assert len(set(fitted)) == 4
        assert main(["eval", "--truth", str(truth), "--pred", str(labels),
                     "--metric", "ari"]) == 0
        score = float(capsys.readouterr().out.split()[-1])
        assert score >= 0.95

    def test_labels_to_stdout_without_output_flag(self, tmp_path, capsys):
        data = fixture_csv(tmp_path)
        assert main(["fit", "--input", data, "--radius", "0.3"]) == 0
        out = capsys.readouterr().out.split()
        assert len(out) == 6 and all(v.lstrip("-").isdigit() for v in out)


class TestPredict:
    def test_round_trip(self, tmp_path):
        data = fixture_csv(tmp_path)
        model = tmp_path / "model.json"
        fitted = tmp_path / "fit_labels.txt"
        main(["fit", "--input", data, "--output", str(fitted), "--radius", "0.3",
              "--model", str(model)])
        out = tmp_path / "pred.txt"
        assert main(["predict", "--input", data, "--model", str(model),
                     "--output", str(out)]) == 0
        assert out.read_text() == fitted.read_text()

    def test_dimension_mismatch(self, tmp_path, capsys):
        data = fixture_csv(tmp_path)
        model = tmp_path / "model.json"
        main(["fit", "--input", data, "--output", str(tmp_path / "l.txt"),
              "--radius", "0.3", "--model", str(model)])
        wide = write(tmp_path / "wide.csv", "1.0,2.0\n")
        assert main(["predict", "--input", wide, "--model", str(model)]) == 2

    def test_missing_model_file(self, tmp_path):
        data = fixture_csv(tmp_path)
        assert main(["predict", "--input", data,
                     "--model", str(tmp_path / "nope.json")]) == 2


class TestExplain:
    @pytest.fixture()
    def model_path(self, tmp_path):
        # three singleton groups chained into one cluster
        data = write(tmp_path / "chain.csv", "0.0\n1.2\n2.4\n")
        model = tmp_path / "model.json"
        main(["fit", "--input", data, "--output", str(tmp_path / "l.txt"),
              "--radius", "0.8", "--scale", "1.3", "--model", str(model)])
        return str(model)

    def test_summary(self, model_path, capsys):
        assert main(["explain", "--model", model_path]) == 0
        out = capsys.readouterr().out
        assert "3 groups were subsequently merged into 1 clusters" in out

    def test_point(self, model_path, capsys):
        assert main(["explain", "--model", model_path, "--index", "1"]) == 0
        assert "group 1" in capsys.readouterr().out

    def test_pair_path(self, model_path, capsys):
        assert main(["explain", "--model", model_path, "--index", "0",
                     "--index2", "2"]) == 0
        assert "0 <-> 1 <-> 2" in capsys.readouterr().out

    def test_json_payload(self, model_path, capsys):
        assert main(["explain", "--model", model_path, "--index", "0",
                     "--index2", "2", "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["path"] == [0, 1, 2]

    def test_bad_index(self, model_path, capsys):
        assert main(["explain", "--model", model_path, "--index", "9"]) == 2

    def test_index2_requires_index(self, model_path):
        assert main(["explain", "--model", model_path, "--index2", "1"]) == 2


class TestEval:
    def test_self_comparison(self, tmp_path, capsys):
        labels = write(tmp_path / "l.txt", "0\n0\n1\n1\n")
        assert main(["eval", "--truth", labels, "--pred", labels]) == 0
        out = capsys.readouterr().out
        assert "ari 1.000000" in out and "ami 1.000000" in out

    def test_known_negative_value(self, tmp_path, capsys):
        truth = write(tmp_path / "t.txt", "0\n1\n0\n1\n")
        pred = write(tmp_path / "p.txt", "0\n0\n1\n1\n")
        assert main(["eval", "--truth", truth, "--pred", pred,
                     "--metric", "ari"]) == 0
        assert "ari -0.500000" in capsys.readouterr().out

    def test_length_mismatch(self, tmp_path, capsys):
        truth = write(tmp_path / "t.txt", "0\n1\n")
        pred = write(tmp_path / "p.txt", "0\n1\n1\n")
        assert main(["eval", "--truth", truth, "--pred", pred]) == 2


class TestProbe:
    def test_monotone_in_dimension(self, capsys):
        assert main(["probe", "--grid-c", "0", "--grid-r", "0.5",
                     "--grid-s", "0.3", "--grid-d", "2,5,10"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")[1:]
        ratios = [float(line.split()[-1]) for line in lines]
        assert all(b <= a + 1e-9 for a, b in zip(ratios, ratios[1:]))

    def test_large_radius_saturates(self, capsys):
        assert main(["probe", "--grid-c", "0", "--grid-r", "20",
                     "--grid-s", "0.3", "--grid-d", "10"]) == 0
        line = capsys.readouterr().out.strip().split("\n")[-1]
        assert float(line.split()[-1]) >= 0.999

    def test_tiny_s_saturates(self, capsys):
        assert main(["probe", "--grid-c", "0.5", "--grid-r", "0.5",
                     "--grid-s", "0.004", "--grid-d", "3"]) == 0
        line = capsys.readouterr().out.strip().split("\n")[-1]
        assert float(line.split()[-1]) >= 0.999

    def test_dimension_below_two(self, capsys):
        assert main(["probe", "--grid-d", "1"]) == 2


class TestBlobs:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert main(["blobs", "--n", "30", "--d", "3", "--k", "3",
                         "--std", "0.5", "--seed", "5", "--output", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_truth_and_header(self, tmp_path):
        data, truth = tmp_path / "d.csv", tmp_path / "t.txt"
        assert main(["blobs", "--n", "10", "--d", "2", "--k", "2", "--seed", "1",
                     "--output", str(data), "--truth", str(truth), "--header"]) == 0
        lines = data.read_text().strip().split("\n")
        assert lines[0] == "f0,f1"
        assert len(lines) == 11
        assert len(truth.read_text().split()) == 10

    def test_n_below_k(self, tmp_path, capsys):
        assert main(["blobs", "--n", "2", "--d", "2", "--k", "5",
                     "--output", str(tmp_path / "x.csv")]) == 2


class TestThreadCap:
    def test_invalid_env_value(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("SORTCLUST_THREADS", "many")
        data = fixture_csv(tmp_path)
        assert main(["fit", "--input", data]) == 2

    def test_zero_is_sequential(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SORTCLUST_THREADS", "0")
        data = fixture_csv(tmp_path)
        assert main(["fit", "--input", data, "--output",
                     str(tmp_path / "l.txt"), "--radius", "0.3"]) == 0
