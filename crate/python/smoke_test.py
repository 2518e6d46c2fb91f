"""Smoke test for the Python bindings: build with
`pip install --no-build-isolation ./crates/py` and run this file."""

from pathlib import Path

import regcover

CORPUS = Path(__file__).resolve().parent.parent / "crates" / "core" / "corpus"


def load(name):
    return regcover.Graph.parse((CORPUS / name).read_text())


def main():
    cube, k4 = load("cube.graph"), load("k4.graph")
    r = regcover.regular_cover(cube, k4)
    assert r["answer"] and r["k"] == 2 and r["path"] == "meta", r
    assert regcover.verify_certificate(cube, k4, r["certificate"])
    assert regcover.oracle_cover(cube, k4)["answer"]

    c5, c3 = regcover.Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)]), load("c3.graph")
    assert not regcover.regular_cover(c5, c3)["answer"]

    pet = regcover.regular_cover(load("petersen.graph"), load("petersen_base.graph"))
    assert pet["answer"] and pet["path"] == "oracle" and pet["k"] == 5, pet

    assert regcover.automorphism_order(load("dodecahedron.graph")) == 120
    qs = regcover.quotients(cube, 2)
    assert len(qs) == 4 and all(regcover.regular_cover(cube, q)["answer"] for q in qs)

    sol = regcover.ivmatch((CORPUS / "ivmatch_comb.iv").read_text())
    assert sol is not None and len(sol) == 9, sol

    try:
        regcover.Graph.parse("not a graph")
    except regcover.RegcoverError:
        pass
    else:
        raise AssertionError("bad input accepted")
    print("python bindings ok")


if __name__ == "__main__":
    main()
