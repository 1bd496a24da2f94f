import os
from pathlib import Path

import numpy as np
import pytest

import ndjv

DATA = Path(os.environ.get("NDV_TEST_DATA", Path(__file__).resolve().parents[1] / "data"))


def toy_articles():
    return [
        {"id": "a1", "source": "herald", "date": "1931-04-02",
         "text": "the farmers voted against the railroad rates said John Smith in Iowa"},
        {"id": "a2", "source": "herald", "date": "1931-04-03",
         "text": "a winter storm closed the schools in Chicago said Mary Baker", "headline": "Storm"},
        {"id": "a3", "source": "courier", "date": "1931-04-04",
         "text": "butter and milk prices rose sharply after the strike in Ohio"},
    ]


def test_staged_pipeline_matches_fused():
    corpus = toy_articles()
    ner_outputs = ndjv.ner(corpus, "historical_newspaper_ner")
    assert len(ner_outputs) == 3
    assert any(t.tag == "B-PER" for t in ner_outputs[0].annotations)

    masked = ndjv.mask(ner_outputs)
    assert "[MASK]" in masked[0].masked_text
    assert "John" not in masked[0].masked_text

    staged = ndjv.embed(masked, "same-story")
    assert staged.dim == 256 and staged.count == 3
    assert staged == ndjv.mask_and_embed(ner_outputs)
    assert staged == ndjv.mask_and_embed(corpus)
    norms = np.linalg.norm(staged.matrix, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-5)
    assert not staged.matrix.flags.writeable


def test_nearest_neighbours_and_search():
    corpus = toy_articles()
    store = ndjv.mask_and_embed(corpus)
    dist_list, nn_list = ndjv.find_nearest_neighbours(store, store, k=1)
    assert [ids[0] for ids in nn_list] == ["a1", "a2", "a3"]
    assert all(abs(d[0] - 1.0) < 1e-5 for d in dist_list)

    hits = ndjv.search_nearest_story(corpus, "historical_newspaper_ner", "same-story",
                                     corpus_embed=store, k=2)
    assert [h[0]["id"] for h in hits] == ["a1", "a2", "a3"]
    assert len(hits[0]) == 2


def test_store_round_trip(tmp_path):
    m = np.eye(3, 4, dtype=np.float32)
    store = ndjv.EmbeddingStore(m, ["x", "y", "z"])
    path = tmp_path / "s.ndjv"
    ndjv.write_store(store, path)
    back = ndjv.read_store(path)
    assert back == store
    assert back.ids == ["x", "y", "z"]
    np.testing.assert_array_equal(back.matrix, m)
    with pytest.raises(ndjv.FormatError):
        ndjv.read_store(DATA / "golden_3x4_bad_magic.ndjv")
    with pytest.raises(ndjv.Error):
        ndjv.EmbeddingStore(np.full((1, 2), 0.5, dtype=np.float32), ["bad"])


def test_download_and_eval():
    corpus = ndjv.download("american stories:1900:Alabama", manifest=DATA / "manifest" / "manifest.json")
    assert len(corpus) == 4
    assert all(a.date.startswith("1900") for a in corpus)
    assert abs(ndjv.f1_from_pr(87.9, 93.1) - 90.4) <= 0.05
    assert ndjv.topic_match_rate_from_sheet(DATA / "judged_sheet.csv") == pytest.approx(0.6)


def test_bad_article_rejected():
    with pytest.raises(ndjv.Error):
        ndjv.ner([{"id": "x", "source": "s", "date": "not a date", "text": "t"}])
    with pytest.raises(TypeError):
        ndjv.ner([42])
