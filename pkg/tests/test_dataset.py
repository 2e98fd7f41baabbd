import numpy as np
import pytest

from voxsel.catalog import N_FEATURES
from voxsel.dataset import (CANONICAL_EMOTIONS, CorpusManifest,
                            DEFAULT_SYNTH_CLASSES, LabeledDataset,
                            build_dataset, dataset_to_csv, load_dataset_csv,
                            load_manifest, save_dataset_csv, save_manifest,
                            synth_corpus)
from voxsel.errors import DataError


class TestDatasetCsv:
    def make(self, n=7, seed=0):
        rng = np.random.default_rng(seed)
        return LabeledDataset(
            X=rng.normal(scale=100, size=(n, N_FEATURES)),
            labels=[CANONICAL_EMOTIONS[i % 5] for i in range(n)],
            corpora=["test"] * n,
            sample_ids=[f"s{i:02d}.wav" for i in range(n)],
        )

    def test_roundtrip_bytes(self, tmp_path):
        ds = self.make()
        path = tmp_path / "d.csv"
        save_dataset_csv(path, ds)
        first = path.read_text()
        back = load_dataset_csv(path)
        save_dataset_csv(path, back)
        assert path.read_text() == first

    def test_roundtrip_metadata(self, tmp_path):
        ds = self.make()
        path = tmp_path / "d.csv"
        save_dataset_csv(path, ds)
        back = load_dataset_csv(path)
        assert back.labels == ds.labels
        assert back.sample_ids == ds.sample_ids
        assert back.corpus_id == "test"

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(DataError):
            load_dataset_csv(path)

    def test_wrong_width_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset(X=np.ones((3, 10)), labels=["a"] * 3,
                           corpora=["t"] * 3, sample_ids=["1", "2", "3"])


class TestManifest:
    def test_roundtrip(self, tmp_path):
        man = CorpusManifest(entries=[("a.wav", "anger"), ("b.wav", "fear")],
                             corpus_id="demo", root=tmp_path)
        path = tmp_path / "manifest.csv"
        save_manifest(path, man)
        back = load_manifest(path, corpus_id="demo")
        assert back.entries == man.entries
        assert back.root == tmp_path

    def test_duplicate_paths_rejected(self):
        with pytest.raises(DataError):
            CorpusManifest(entries=[("a.wav", "x"), ("a.wav", "y")],
                           corpus_id="d")


class TestSynthCorpus:
    def test_file_count_matches_polish_shape(self, tmp_path):
        man = synth_corpus(tmp_path / "c", n_per_class=40, seed=0)
        assert len(man.entries) == 200
        labels = [l for _, l in man.entries]
        assert sorted(set(labels)) == sorted(CANONICAL_EMOTIONS)

    def test_seed_determinism_byte_identical(self, tmp_path):
        d1, d2 = tmp_path / "c1", tmp_path / "c2"
        synth_corpus(d1, classes=DEFAULT_SYNTH_CLASSES[:2], n_per_class=3, seed=5)
        synth_corpus(d2, classes=DEFAULT_SYNTH_CLASSES[:2], n_per_class=3, seed=5)
        for f1 in sorted(d1.glob("*.wav")):
            f2 = d2 / f1.name
            assert f1.read_bytes() == f2.read_bytes()

    def test_jobs_do_not_change_bytes(self, tmp_path):
        d1, d2 = tmp_path / "j1", tmp_path / "j2"
        synth_corpus(d1, classes=DEFAULT_SYNTH_CLASSES[:2], n_per_class=4,
                     seed=9, jobs=1)
        synth_corpus(d2, classes=DEFAULT_SYNTH_CLASSES[:2], n_per_class=4,
                     seed=9, jobs=3)
        for f1 in sorted(d1.glob("*.wav")):
            assert f1.read_bytes() == (d2 / f1.name).read_bytes()

    def test_disjoint_pitch_bands(self):
        bands = [spec.f0_hz for spec in DEFAULT_SYNTH_CLASSES]
        for (_, hi), (lo, _) in zip(bands, bands[1:]):
            assert lo > hi * 1.06  # gaps comfortably above 3 percent


class TestBuildDataset:
    def test_cardinality_and_order(self, tmp_path):
        man = synth_corpus(tmp_path / "c", classes=DEFAULT_SYNTH_CLASSES[:2],
                           n_per_class=5, seed=1)
        ds, errors = build_dataset(man)
        assert not errors and len(ds) == 10
        assert ds.sample_ids == [p for p, _ in man.entries]

    def test_unreadable_file_skipped(self, tmp_path):
        root = tmp_path / "c"
        man = synth_corpus(root, classes=DEFAULT_SYNTH_CLASSES[:2],
                           n_per_class=3, seed=2)
        entries = man.entries + [("missing.wav", "anger")]
        man2 = CorpusManifest(entries=entries, corpus_id="c", root=root)
        ds, errors = build_dataset(man2)
        assert len(ds) == 6
        assert len(errors) == 1 and errors[0][1] == "missing-file"

    def test_rebuild_identical_csv(self, tmp_path):
        root = tmp_path / "c"
        man = synth_corpus(root, classes=DEFAULT_SYNTH_CLASSES[:2],
                           n_per_class=3, seed=4)
        ds1, _ = build_dataset(man)
        ds2, _ = build_dataset(man)
        assert dataset_to_csv(ds1) == dataset_to_csv(ds2)

    def test_jobs_match_serial(self, tmp_path):
        root = tmp_path / "c"
        man = synth_corpus(root, classes=DEFAULT_SYNTH_CLASSES[:2],
                           n_per_class=3, seed=6)
        ds1, _ = build_dataset(man, jobs=1)
        ds2, _ = build_dataset(man, jobs=2)
        assert dataset_to_csv(ds1) == dataset_to_csv(ds2)
