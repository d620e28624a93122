from fractions import Fraction

from hypothesis import strategies as st

from algebroid_index.homalg import Chain
from algebroid_index.scalar import Poly

small_q = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


def monomials(names, max_degree):
    return st.dictionaries(st.sampled_from(names), st.integers(1, max_degree), max_size=len(names)).filter(
        lambda d: sum(d.values()) <= max_degree
    )


def polys(names, max_degree=3, max_terms=3):
    term = st.builds(lambda exps, c: Poly.monomial(exps, c), monomials(names, max_degree), small_q)
    return st.lists(term, min_size=0, max_size=max_terms).map(lambda ts: sum(ts, Poly()))


def chains(alg, names, max_len=4, max_degree=2):
    entry = polys(names, max_degree, 2)
    tensor = st.builds(
        lambda ents, c, u: Chain.from_tensor(alg, ents, c, u),
        st.lists(entry, min_size=1, max_size=max_len),
        st.integers(-2, 2).filter(bool),
        st.integers(-1, 1),
    )
    return st.lists(tensor, min_size=1, max_size=2).map(lambda cs: sum(cs[1:], cs[0]))
