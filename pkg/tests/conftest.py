import numpy as np
import pytest

from qtriage.corpus import Corpus, HierLabel, Question, SyntheticSpec, gen_synthetic
from qtriage.features import SparseVector


def make_corpus(rows):
    """rows: (id, text, leaf-or-None) triples."""
    questions = []
    for qid, text, leaf in rows:
        gold = HierLabel.from_leaf(leaf) if leaf is not None else None
        questions.append(Question(id=qid, text=text, gold=gold))
    return Corpus(tuple(questions))


def sv(dense, dim=None):
    """SparseVector from a dense list."""
    arr = np.asarray(dense, dtype=np.float64)
    idx = np.flatnonzero(arr).astype(np.int64)
    return SparseVector(idx, arr[idx], dim or len(arr))


@pytest.fixture
def separable_corpus():
    spec = SyntheticSpec(
        counts={"Irrelevant": 24, "Effective": 36, "Ineffective": 40},
        vocab_size=90,
        separation=1.0,
    )
    return gen_synthetic(spec, seed=1234)
