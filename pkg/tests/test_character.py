import pytest

from algebroid_index.algebroid import Connection
from algebroid_index.character import (
    CharacterMap,
    NonBaseEntry,
    chain_map_check,
    hkr,
    hkr_compat_check,
    index_check,
    u_positivity_check,
)
from algebroid_index.io import load_chain, load_presentation, parse_chain


@pytest.fixture(scope="module")
def derx():
    pf = load_presentation("derx")
    return pf, CharacterMap(pf.pres, Connection.zero(1, 1), None, 1)


def test_fundamental_cycle_maps_to_one(derx):
    pf, cm = derx
    out = cm(load_chain("c2_derx", pf.pres).chain)
    assert out.to_json() == {"deg0,u^1": {"-": "1"}}


def test_unit_on_flat_line_maps_to_one(derx):
    pf, cm = derx
    assert cm(load_chain("one", pf.pres).chain).to_json() == {"deg0,u^0": {"-": "1"}}


@pytest.mark.parametrize("chain", ["derx_corpus1", "derx_corpus2", "derx_corpus3"])
def test_chain_map_on_line(derx, chain):
    pf, cm = derx
    assert chain_map_check(cm, load_chain(chain, pf.pres).chain, chain).equal


def test_hkr_examples():
    pres = load_presentation("derxy").pres
    one = parse_chain("algebra base\nterm u^0 : 1\n", pres).chain
    assert hkr(one, pres).to_json() == {"deg0,u^0": {"-": "1"}}
    df = parse_chain("algebra base\nterm u^0 : 1 | x*y\n", pres).chain
    assert hkr(df, pres).to_json() == {"deg1,u^0": {"1": "y", "2": "x"}}
    f0df1 = parse_chain("algebra base\nterm u^0 : y | x\n", pres).chain
    assert hkr(f0df1, pres).to_json() == {"deg1,u^0": {"1": "y"}}


def test_hkr_bundled_chain():
    pres = load_presentation("derxy_curved").pres
    out = hkr(load_chain("base_xy", pres).chain, pres)
    assert out.to_json() == {"deg1,u^0": {"2": "x*y"}, "deg2,u^0": {"1,2": "1/2"}}


def test_hkr_refuses_non_base_slots():
    pres = load_presentation("derxy").pres
    chain = parse_chain("algebra U\nterm u^0 : 1 | e1\n", pres).chain
    with pytest.raises(NonBaseEntry):
        hkr(chain, pres)


def test_index_and_compatibility_on_curved_plane():
    pf = load_presentation("derxy_curved")
    w = pf.pres.rank
    assert index_check(pf.pres, pf.conn, pf.econn, w).equal
    chain = load_chain("base_xy", pf.pres).chain
    assert hkr_compat_check(pf.pres, pf.conn, chain, pf.econn, w).equal


def test_u_positivity_on_curved_plane():
    pf = load_presentation("derxy_curved")
    cm = CharacterMap(pf.pres, pf.conn, pf.econn, pf.pres.rank)
    chain = load_chain("derxy_corpus1", pf.pres).chain.truncate("negative")
    assert u_positivity_check(cm, chain).equal
