import random
from pathlib import Path

import pytest

from divkit.corpus import Corpus, Document

DATA_DIR = Path(__file__).parent / "data"

_VOCAB = (
    "alder birch cedar dahlia elder fennel ginkgo hazel ivy juniper kelp larch "
    "mallow nettle oak poplar quince rowan sorrel tansy ulex vetch willow yarrow "
    "reef tide delta marsh basin ridge"
).split()


def random_documents(rng: random.Random, n_docs: int, min_len: int = 1, max_len: int = 50) -> list[Document]:
    docs = []
    for i in range(n_docs):
        length = rng.randint(min_len, max_len)
        text = " ".join(rng.choice(_VOCAB) for _ in range(length))
        docs.append(Document(id=f"d{i}", text=text))
    return docs


def random_corpus(seed: int, n_docs: int, **kwargs) -> Corpus:
    return Corpus.from_documents(random_documents(random.Random(seed), n_docs, **kwargs))


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def tiny_corpus() -> Corpus:
    return Corpus.from_documents(
        [
            Document(id="a", text="the tide rises over the reef"),
            Document(id="b", text="cedar and birch line the ridge"),
            Document(id="c", text="the tide falls in the basin"),
        ]
    )
