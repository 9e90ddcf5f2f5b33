import pytest

from inplace_nets import corpus
from inplace_nets.check import validate


@pytest.fixture(params=sorted(corpus.FILES))
def corpus_program(request):
    return getattr(corpus, "corpus_" + request.param)()


@pytest.fixture
def ackermann_checked():
    return validate(corpus.corpus_ackermann())
