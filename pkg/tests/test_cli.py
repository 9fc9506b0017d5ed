from __future__ import annotations

from pathlib import Path

from chlab.cli import main

TINY = "experiments = e1\nladder.lambdas = 8,16\n"


def run_cli(tmp_path: Path, config_text: str, extra: list[str] | None = None, out: str | None = "out"):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(config_text)
    argv = ["run", "--config", str(cfg_path)]
    if out is not None:
        argv += ["--out", str(tmp_path / out)]
    argv += extra or []
    return main(argv)


class TestRunE1:
    def test_smoke_outputs(self, tmp_path):
        rc = run_cli(tmp_path, TINY)
        assert rc == 0
        out = tmp_path / "out"
        assert (out / "e1.csv").exists()
        assert (out / "summary.csv").exists()
        assert (out / "MANIFEST").exists()
        assert (out / "config.txt").exists()
        assert list((out / "curves").glob("*.txt"))
        assert (out / "figures" / "e1.png").exists()

    def test_summary_schema(self, tmp_path):
        run_cli(tmp_path, TINY)
        lines = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        assert lines[0] == "verdict_id,measured,threshold,comparator,pass"
        for line in lines[1:]:
            parts = line.split(",")
            assert len(parts) == 5
            assert parts[3] in ("<=", ">=")
            assert parts[4] in ("true", "false")

    def test_exit_zero_iff_all_pass(self, tmp_path):
        run_cli(tmp_path, TINY)
        lines = (tmp_path / "out" / "summary.csv").read_text().splitlines()[1:]
        assert all(line.endswith(",true") for line in lines)

    def test_deterministic_reruns(self, tmp_path):
        run_cli(tmp_path, TINY, out="a")
        run_cli(tmp_path, TINY, out="b")
        for name in ("e1.csv", "summary.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for p in sorted((tmp_path / "a" / "curves").glob("*.txt")):
            q = tmp_path / "b" / "curves" / p.name
            assert p.read_bytes() == q.read_bytes()
        # config echo matches apart from the output location itself
        ca = [l for l in (tmp_path / "a" / "config.txt").read_text().splitlines() if not l.startswith("output.dir")]
        cb = [l for l in (tmp_path / "b" / "config.txt").read_text().splitlines() if not l.startswith("output.dir")]
        assert ca == cb

    def test_failed_verdict_gives_exit_one(self, tmp_path):
        # a ladder far outside the asymptotic regime misses the 2% target
        rc = run_cli(tmp_path, "experiments = e1\nladder.lambdas = 1,2\n")
        assert rc == 1
        lines = (tmp_path / "out" / "summary.csv").read_text().splitlines()[1:]
        assert any(line.endswith(",false") for line in lines)


class TestConfigHandling:
    def test_bad_config_exits_two(self, tmp_path):
        rc = run_cli(tmp_path, "ladder.delta = 2.5\n")
        assert rc == 2
        assert not (tmp_path / "out").exists() or not list((tmp_path / "out").iterdir())

    def test_missing_config_file(self, tmp_path):
        rc = main(["run", "--config", str(tmp_path / "absent.cfg"), "--out", str(tmp_path / "o")])
        assert rc == 2

    def test_experiments_flag_overrides(self, tmp_path):
        rc = run_cli(tmp_path, "experiments = e2\nladder.lambdas = 8,16\n", extra=["--experiments", "e1"])
        assert rc == 0
        assert (tmp_path / "out" / "e1.csv").exists()
        assert not (tmp_path / "out" / "e2.csv").exists()

    def test_env_var_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CHLAB_OUT", str(tmp_path / "env-out"))
        rc = run_cli(tmp_path, TINY, out=None)
        assert rc == 0
        assert (tmp_path / "env-out" / "e1.csv").exists()

    def test_unwritable_out_dir(self, tmp_path):
        # a path below a regular file can never be created
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        rc = run_cli(tmp_path, TINY, out=None, extra=["--out", str(blocker / "sub")])
        assert rc == 2
        assert not (blocker / "sub").exists()

    def test_resolution_flag(self, tmp_path):
        rc = run_cli(tmp_path, TINY, extra=["--resolution-x2"])
        assert rc == 0
        text = (tmp_path / "out" / "config.txt").read_text()
        assert "resolution_multiplier = 2" in text


class TestManifest:
    def test_manifest_lists_files(self, tmp_path):
        run_cli(tmp_path, TINY)
        man = (tmp_path / "out" / "MANIFEST").read_text().splitlines()
        assert man[0].startswith("generated_at:")
        assert "complete: true" in man[1]
        listed = {l.split("file: ")[1] for l in man if l.startswith("file: ")}
        assert "e1.csv" in listed and "summary.csv" in listed
