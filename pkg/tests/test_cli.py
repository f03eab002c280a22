import json

import pytest

from ranklens.cli import main

CORPUS = """d1\tThe cabinet consists of ministers appointed by the king
d2\tA cabinet is a piece of furniture with doors and drawers
d3\tDogs run fast in the park
d4\tThe king appointed new ministers yesterday
"""

QUERIES = "q1\twhat is a cabinet\nq2\tking ministers\n"

QRELS = """q1 0 d1 3
q1 0 d2 2
q1 0 d3 0
q2 0 d4 2
q2 0 d1 1
"""


@pytest.fixture()
def workdir(tmp_path):
    (tmp_path / "corpus.tsv").write_text(CORPUS, encoding="utf-8")
    (tmp_path / "queries.tsv").write_text(QUERIES, encoding="utf-8")
    (tmp_path / "qrels.txt").write_text(QRELS, encoding="utf-8")
    return tmp_path


def run_cli(*args):
    return main([str(a) for a in args])


class TestPipeline:
    def test_end_to_end(self, workdir, capsys):
        idx = workdir / "idx.rlix"
        run = workdir / "run.trec"
        assert run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx) == 0
        assert idx.exists()
        assert (
            run_cli(
                "retrieve",
                "--index", idx,
                "--queries", workdir / "queries.tsv",
                "--out", run,
                "--k", 10,
            )
            == 0
        )
        lines = run.read_text(encoding="utf-8").splitlines()
        assert lines and all(len(l.split()) == 6 for l in lines)

        assert run_cli("evaluate", "--run", run, "--qrels", workdir / "qrels.txt") == 0
        out = capsys.readouterr().out
        assert "ndcg_cut_10" in out and "map" in out and "recip_rank" in out

        prefix = workdir / "prov"
        assert (
            run_cli(
                "provenance",
                "--base", run,
                "--target", run,
                "--out-prefix", prefix,
            )
            == 0
        )
        for suffix in (".counts.csv", ".ratios.csv", ".json", ".svg"):
            assert (workdir / f"prov{suffix}").exists()
        data = json.loads((workdir / "prov.json").read_text(encoding="utf-8"))
        for i, total in enumerate(data["row_totals"]):
            if total:
                assert data["ratios"][i][i] == 1.0

        pairs = workdir / "pairs.tsv"
        assert (
            run_cli(
                "mask",
                "--run", run,
                "--queries", workdir / "queries.tsv",
                "--corpus", workdir / "corpus.tsv",
                "--mode", "only_q",
                "--out", pairs,
            )
            == 0
        )
        pair_lines = pairs.read_text(encoding="utf-8").splitlines()
        assert len(pair_lines) == len(lines)
        assert all(len(l.split("\t")) == 4 for l in pair_lines)

    def test_deterministic_outputs(self, workdir):
        idx1, idx2 = workdir / "a.rlix", workdir / "b.rlix"
        run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx1)
        run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx2)
        assert idx1.read_bytes() == idx2.read_bytes()
        r1, r2 = workdir / "r1.trec", workdir / "r2.trec"
        for out in (r1, r2):
            run_cli(
                "retrieve",
                "--index", idx1,
                "--queries", workdir / "queries.tsv",
                "--out", out,
            )
        assert r1.read_bytes() == r2.read_bytes()

    def test_retrieve_threads_same_output(self, workdir):
        idx = workdir / "idx.rlix"
        run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx)
        r1, r2 = workdir / "r1.trec", workdir / "r2.trec"
        run_cli("retrieve", "--index", idx, "--queries", workdir / "queries.tsv",
                "--out", r1, "--threads", 1)
        run_cli("retrieve", "--index", idx, "--queries", workdir / "queries.tsv",
                "--out", r2, "--threads", 3)
        assert r1.read_bytes() == r2.read_bytes()


class TestEvaluateOutput:
    def make_run(self, workdir):
        idx = workdir / "idx.rlix"
        run = workdir / "run.trec"
        run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx)
        run_cli("retrieve", "--index", idx, "--queries", workdir / "queries.tsv",
                "--out", run, "--k", 10)
        return run

    def test_tsv_format(self, workdir, capsys):
        run = self.make_run(workdir)
        assert run_cli("evaluate", "--run", run, "--qrels", workdir / "qrels.txt",
                       "--tsv") == 0
        lines = capsys.readouterr().out.splitlines()
        triples = [l.split("\t") for l in lines]
        assert all(len(t) == 3 for t in triples)
        assert ["num_q", "all", "2"] in triples
        assert any(t[0] == "ndcg_cut_10" and t[1] == "all" for t in triples)

    def test_per_query_rows(self, workdir, capsys):
        run = self.make_run(workdir)
        run_cli("evaluate", "--run", run, "--qrels", workdir / "qrels.txt",
                "--tsv", "--per-query")
        lines = capsys.readouterr().out.splitlines()
        assert any(l.split("\t")[1] == "q1" for l in lines)
        assert any(l.split("\t")[1] == "q2" for l in lines)

    def test_perfect_run_all_ones(self, workdir, capsys):
        perfect = workdir / "perfect.trec"
        perfect.write_text(
            "q1 Q0 d1 1 3.0 t\nq1 Q0 d2 2 2.0 t\nq2 Q0 d4 1 2.0 t\nq2 Q0 d1 2 1.0 t\n",
            encoding="utf-8",
        )
        assert run_cli("evaluate", "--run", perfect, "--qrels",
                       workdir / "qrels.txt") == 0
        out = capsys.readouterr().out
        assert "ndcg_cut_10    1.0000" in out
        assert "map            1.0000" in out
        assert "recip_rank     1.0000" in out


class TestExitCodes:
    def test_usage_error_is_1(self, workdir):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("retrieve", "--no-such-flag")
        assert excinfo.value.code == 1

    def test_unknown_command_is_1(self):
        with pytest.raises(SystemExit) as excinfo:
            run_cli("frobnicate")
        assert excinfo.value.code == 1

    def test_data_error_is_2(self, workdir):
        bad = workdir / "bad.tsv"
        bad.write_text("no tab on this line\n", encoding="utf-8")
        assert run_cli("index", "--corpus", bad, "--index", workdir / "x.rlix") == 2

    def test_io_error_is_3(self, workdir):
        assert (
            run_cli("index", "--corpus", workdir / "missing.tsv",
                    "--index", workdir / "x.rlix")
            == 3
        )

    def test_corrupt_index_is_2(self, workdir):
        idx = workdir / "idx.rlix"
        run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx)
        data = bytearray(idx.read_bytes())
        data[-1] ^= 0xFF
        idx.write_bytes(bytes(data))
        assert (
            run_cli("retrieve", "--index", idx, "--queries",
                    workdir / "queries.tsv", "--out", workdir / "r.trec")
            == 2
        )

    def test_provenance_stratum_without_qrels_is_2(self, workdir):
        run = workdir / "run.trec"
        run.write_text("q1 Q0 d1 1 1.0 t\n", encoding="utf-8")
        assert (
            run_cli("provenance", "--base", run, "--target", run,
                    "--stratum", "relevant", "--out-prefix", workdir / "p")
            == 2
        )

    def test_bad_bm25_params_is_1(self, workdir):
        idx = workdir / "idx.rlix"
        run_cli("index", "--corpus", workdir / "corpus.tsv", "--index", idx)
        assert (
            run_cli("retrieve", "--index", idx, "--queries", workdir / "queries.tsv",
                    "--out", workdir / "r.trec", "--b", "1.5")
            == 1
        )
