import subprocess


def run(cli, *args, cwd=None):
    return subprocess.run([cli, *args], capture_output=True, text=True, cwd=cwd)


def test_help_lists_stages(cli):
    r = run(cli, "--help")
    assert r.returncode == 0
    for stage in ["ingest", "train-doc", "extract", "match", "featurize", "annotate", "train-word", "select", "report"]:
        assert stage in r.stdout


def test_usage_errors_exit_1(cli, tmp_path):
    assert run(cli, "no-such-command").returncode == 1
    r = run(cli, "--set", "bogus=1", "ingest", cwd=tmp_path)
    assert r.returncode == 1
    assert "unknown setting" in r.stderr


def test_data_errors_exit_2_and_name_the_stage(cli, small_bundle, tmp_path):
    r = run(cli, "--config", str(small_bundle), "--out", str(tmp_path / "o"), "match")
    assert r.returncode == 2
    assert "run the 'ingest' stage first" in r.stderr


def test_stage_by_stage_run(cli, small_bundle, tmp_path):
    out = tmp_path / "o"
    common = ["--config", str(small_bundle), "--out", str(out), "--set", "embedding_dim=16", "--set", "folds=3"]
    for stage in ["ingest", "train-doc", "extract", "match", "featurize", "train-word", "select", "report"]:
        r = run(cli, *common, stage)
        assert r.returncode == 0, (stage, r.stderr)
    assert (out / "report.txt").exists()
    first = (out / "report.txt").read_bytes()
    assert run(cli, *common, "report").returncode == 0
    assert (out / "report.txt").read_bytes() == first
    r = run(cli, *common, "--seed", "5", "report")
    assert r.returncode == 2
    assert "seed 5" in r.stderr


def test_synth_writes_bundle(cli, tmp_path):
    r = run(cli, "synth", "--dir", str(tmp_path), "--domain", "z", "--sentences", "100")
    assert r.returncode == 0
    assert (tmp_path / "z.tsv").exists()
    assert (tmp_path / "z.conf").exists()
