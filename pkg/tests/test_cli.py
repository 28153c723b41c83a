"""Command-line behavior: subcommands, exit codes, error lines, determinism."""

import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from mapforge.cli import main
from mapforge.geo import FeatureRecord, Polygon, Polyline, serialize_feature_collection
from mapforge.pngio import read_map_png, read_mask_png, read_rgba_png, write_mask_png


@pytest.fixture()
def features_file(tmp_path):
    feats = [
        FeatureRecord(Polygon([[(10, 10), (60, 10), (60, 50), (10, 50)]]), 1, 4),
        FeatureRecord(Polygon([[(70, 70), (120, 70), (120, 120), (70, 120)]]), 5, 2),
        FeatureRecord(Polyline([(0, 64), (128, 64)]), 2, 3),
    ]
    path = tmp_path / "features.json"
    path.write_text(serialize_feature_collection(feats))
    return path


def render_args(features_file, out_dir, *extra):
    return [
        "render",
        "--features", str(features_file),
        "--out", str(out_dir),
        "--bbox", "0", "0", "128", "128",
        "--patch", "64", "64",
        *extra,
    ]


def tree_digest(root: Path) -> dict:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestRenderCommand:
    def test_renders_dataset(self, tmp_path, features_file, capsys):
        out = tmp_path / "ds"
        assert main(render_args(features_file, out)) == 0
        err = capsys.readouterr().err
        assert "rendered 4 pairs" in err
        assert (out / "manifest.txt").exists()
        assert len(list((out / "maps").glob("*.png"))) == 4
        mask = read_mask_png(out / "masks" / "000000.png")
        assert mask.shape == (64, 64)

    def test_jobs_flag_does_not_change_bytes(self, tmp_path, features_file):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(render_args(features_file, a, "--jobs", "1")) == 0
        assert main(render_args(features_file, b, "--jobs", "3")) == 0
        assert tree_digest(a) == tree_digest(b)

    def test_missing_features_file_exits_1(self, tmp_path, capsys):
        rc = main(render_args(tmp_path / "ghost.json", tmp_path / "o"))
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: asset:")

    def test_unknown_flag_exits_2(self, features_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(render_args(features_file, tmp_path / "o") + ["--bogus"])
        assert exc.value.code == 2

    def test_class_map_classification(self, tmp_path, capsys):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[0, 0], [40, 0], [40, 40], [0, 40], [0, 0]]],
                    },
                    "properties": {"building": "yes"},
                }
            ],
        }
        fpath = tmp_path / "f.json"
        fpath.write_text(json.dumps(doc))
        cmap = tmp_path / "rules.json"
        cmap.write_text(json.dumps({"default_class": None, "rules": [
            {"key": "building", "pattern": "*", "class": 1},
        ]}))
        out = tmp_path / "ds"
        rc = main([
            "render", "--features", str(fpath), "--out", str(out),
            "--class-map", str(cmap), "--bbox", "0", "0", "64", "64",
            "--patch", "64", "64",
        ])
        assert rc == 0
        mask = read_mask_png(out / "masks" / "000000.png")
        assert 1 in np.unique(mask)

    def test_unclassifiable_feature_exits_1(self, tmp_path, capsys):
        doc = {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [[[0, 0], [8, 0], [8, 8], [0, 8], [0, 0]]],
                    },
                    "properties": {"mystery": "thing"},
                }
            ],
        }
        fpath = tmp_path / "f.json"
        fpath.write_text(json.dumps(doc))
        rc = main(["render", "--features", str(fpath), "--out", str(tmp_path / "o"),
                   "--bbox", "0", "0", "8", "8", "--patch", "8", "8"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: classification:")


class TestDegradeCommand:
    def test_degrade_writes_variant(self, tmp_path, features_file):
        src, dst = tmp_path / "clean", tmp_path / "dirty"
        assert main(render_args(features_file, src)) == 0
        rc = main(["degrade", "--manifest", str(src / "manifest.txt"),
                   "--out", str(dst), "--seed", "42"])
        assert rc == 0
        assert len(list((dst / "maps").glob("*.png"))) == 4
        # Masks travel byte-identically.
        for name in ("000000.png", "000003.png"):
            assert (dst / "masks" / name).read_bytes() == (src / "masks" / name).read_bytes()
        # Maps actually changed.
        assert (dst / "maps" / "000000.png").read_bytes() != (src / "maps" / "000000.png").read_bytes()

    def test_deterministic_across_runs(self, tmp_path, features_file):
        src = tmp_path / "clean"
        assert main(render_args(features_file, src)) == 0
        a, b = tmp_path / "a", tmp_path / "b"
        for dst in (a, b):
            rc = main(["degrade", "--manifest", str(src / "manifest.txt"),
                       "--out", str(dst), "--seed", "7", "--jobs", "2"])
            assert rc == 0
        assert tree_digest(a) == tree_digest(b)

    def test_same_out_dir_rejected(self, tmp_path, features_file, capsys):
        src = tmp_path / "clean"
        assert main(render_args(features_file, src)) == 0
        rc = main(["degrade", "--manifest", str(src / "manifest.txt"), "--out", str(src)])
        assert rc == 1
        assert "error: validation:" in capsys.readouterr().err


class TestSplitCommand:
    def test_split_twice_identical(self, tmp_path, features_file):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        s1, s2 = tmp_path / "s1.txt", tmp_path / "s2.txt"
        for out in (s1, s2):
            rc = main(["split", "--manifest", str(src / "manifest.txt"),
                       "--ratio", "0.75", "--seed", "7", "--out", str(out)])
            assert rc == 0
        assert s1.read_bytes() == s2.read_bytes()
        text = s1.read_text()
        assert text.count("\ttrain") == 3
        assert text.count("\tval") == 1

    def test_default_output_beside_manifest(self, tmp_path, features_file):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        rc = main(["split", "--manifest", str(src / "manifest.txt"), "--seed", "1"])
        assert rc == 0
        assert (src / "split.txt").exists()

    def test_bad_ratio_exits_1(self, tmp_path, features_file, capsys):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        capsys.readouterr()
        rc = main(["split", "--manifest", str(src / "manifest.txt"), "--ratio", "1.5"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: validation:")


class TestFidCommand:
    def test_self_fid_prints_zero(self, tmp_path, features_file, capsys):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        rc = main(["fid", "--features-a", str(src / "maps"), "--features-b", str(src / "maps")])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "0.000000"

    def test_fvec_file_input(self, tmp_path, capsys):
        from mapforge.fvec import FeatureSet, write_feature_file

        rng = np.random.default_rng(3)
        path = tmp_path / "x.fvec"
        write_feature_file(FeatureSet(rng.normal(size=(8, 5))), path)
        rc = main(["fid", "--features-a", str(path), "--features-b", str(path)])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "0.000000"

    def test_missing_file_exits_1(self, tmp_path, capsys):
        rc = main(["fid", "--features-a", str(tmp_path / "no.fvec"),
                   "--features-b", str(tmp_path / "no.fvec")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: asset:")


class TestEvalCommand:
    def test_identical_dirs_accuracy_one(self, tmp_path, features_file, capsys):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        json_out = tmp_path / "report.json"
        rc = main(["eval", "--pred", str(src / "masks"), "--truth", str(src / "masks"),
                   "--json", str(json_out)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "accuracy      1.0000" in out
        report = json.loads(json_out.read_text())
        assert report["accuracy"] == 1.0
        assert report["kappa"] == 1.0

    def test_mismatched_names_exit_1(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir()
        b.mkdir()
        write_mask_png(np.ones((4, 4), dtype=np.uint8), a / "x.png")
        write_mask_png(np.ones((4, 4), dtype=np.uint8), b / "y.png")
        rc = main(["eval", "--pred", str(a), "--truth", str(b)])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: validation:")


class TestMosaicCommand:
    def test_stitch_rgb_with_worldfile(self, tmp_path, features_file):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        out_png = tmp_path / "mosaic.png"
        world = tmp_path / "mosaic.pgw"
        rc = main(["mosaic", "--manifest", str(src / "manifest.txt"),
                   "--out", str(out_png), "--worldfile", str(world)])
        assert rc == 0
        img = read_map_png(out_png)
        assert img.shape == (128, 128, 3)
        lines = world.read_text().splitlines()
        assert lines == ["1.0", "0.0", "0.0", "-1.0", "0.5", "127.5"]

    def test_stitch_mask_matches_whole_render(self, tmp_path, features_file):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        out_png = tmp_path / "mask.png"
        rc = main(["mosaic", "--manifest", str(src / "manifest.txt"),
                   "--kind", "mask", "--out", str(out_png)])
        assert rc == 0
        mask = read_mask_png(out_png)
        assert mask.shape == (128, 128)


class TestProbeAndDust:
    def test_probe_color_constant_region(self, tmp_path, features_file, capsys):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        # Tile 2 is the bottom-left patch (rows scan top-down), which holds
        # the class-1 rectangle; pixel (30, 30) sits in its constant fill.
        rc = main(["probe-color", "--image", str(src / "maps" / "000002.png"),
                   "--x", "30", "--y", "30"])
        assert rc == 0
        r, g, b = (int(v) for v in capsys.readouterr().out.split())
        assert (r, g, b) == (170, 60, 50)

    def test_probe_out_of_range_exits_1(self, tmp_path, features_file, capsys):
        src = tmp_path / "ds"
        assert main(render_args(features_file, src)) == 0
        capsys.readouterr()
        rc = main(["probe-color", "--image", str(src / "maps" / "000000.png"),
                   "--x", "999", "--y", "0"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: range:")

    def test_dust_gen_deterministic(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            rc = main(["dust-gen", "--out", str(out), "--width", "64",
                       "--height", "64", "--seed", "5"])
            assert rc == 0
        assert a.read_bytes() == b.read_bytes()
        asset = read_rgba_png(a)
        assert asset.shape == (64, 64, 4)


class TestHelp:
    def test_every_subcommand_has_help(self, capsys):
        for cmd in ["render", "degrade", "split", "fid", "eval", "mosaic",
                    "probe-color", "dust-gen", "serve"]:
            with pytest.raises(SystemExit) as exc:
                main([cmd, "--help"])
            assert exc.value.code == 0
            assert "usage" in capsys.readouterr().out
