import pytest

from algebroid_index.io import (
    ChainFormatError,
    bundled_names,
    data_file,
    format_u,
    load_chain,
    load_presentation,
    parse_chain,
    parse_u_expr,
    roundtrip_presentation,
    serialize_chain,
)
from algebroid_index.envelope import Envelope

CHAINS = [n.removesuffix(".chain") for n in bundled_names(".chain")]
PRES = [n.removesuffix(".pres") for n in bundled_names(".pres")]


def _pres_for(name):
    if name.startswith("derxy") or name.startswith("base"):
        return load_presentation("derxy_curved").pres
    return load_presentation("derx").pres


@pytest.mark.parametrize("name", CHAINS)
def test_chain_roundtrip(name):
    pres = _pres_for(name)
    cf = load_chain(name, pres)
    again = parse_chain(serialize_chain(cf), pres)
    assert again.kind == cf.kind
    assert again.chain == cf.chain
    assert serialize_chain(again) == serialize_chain(cf)


@pytest.mark.parametrize("name", PRES)
def test_presentation_roundtrip(name):
    text = data_file(f"{name}.pres").read_text()
    assert roundtrip_presentation(text)


def test_garbage_presentation_does_not_roundtrip():
    assert not roundtrip_presentation("m 1\nr banana\n")


def test_u_elements_are_normal_ordered_on_input():
    env = Envelope(load_presentation("derx").pres)
    assert format_u(parse_u_expr("e1*x", env)) == format_u(parse_u_expr("x*e1 + 1", env))


@pytest.mark.parametrize(
    "text",
    [
        "term u^0 : 1\n",
        "algebra U\nalgebra U\n",
        "algebra banana\n",
        "algebra weyl 1\nterm 0 : p1\n",
        "algebra weyl 1\nterm u^0 p1\n",
        "algebra weyl 1\nfoo\n",
        "# nothing\n",
    ],
)
def test_malformed_chains(text):
    with pytest.raises(ChainFormatError):
        parse_chain(text, load_presentation("derx").pres)


def test_u_chain_needs_presentation():
    with pytest.raises(ChainFormatError):
        parse_chain("algebra U\nterm u^0 : 1\n")


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_chain("no_such_chain")
