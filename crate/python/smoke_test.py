"""Smoke test for the Python bindings.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, then run
`python python/smoke_test.py`.
"""

import json
import pathlib

import ormspace_py as orm

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"


def main():
    person = orm.Model.parse((MODELS / "person.om").read_text())
    assert person.classes == ["Person", "Student", "Employee", "Manager", "Clerk"]

    everything = orm.synthesize(person)
    assert len(everything) == 81, len(everything)
    assert all(orm.check(person, c) for c in everything)

    pins = (MODELS / "person-mixed.pins.json").read_text()
    (mixed,) = orm.synthesize(person, pins)
    assert mixed.tables == ["T_Person", "T_Student", "T_Manager", "T_Clerk"]
    assert sorted(mixed.stored("T_Person")) == ["Employee", "Person"]
    assert mixed.foreign_keys == [("T_Clerk", "clerkID", "T_Person", "personID")]
    assert "DType VARCHAR(64)" in mixed.sql()
    m = orm.metrics(person, mixed)
    assert [m[k] for k in ("TATI", "NCT", "NCRF", "ANV", "NIC", "RIM")] == [11, 6, 8, 1, 7, 1]

    report, svg = orm.pareto(person, everything)
    report = json.loads(report)
    assert len(report["classes"]) == 49
    assert report["front"]
    assert svg.startswith("<svg")

    shop = orm.Model.parse((MODELS / "ecommerce.om").read_text())
    parts, bridges = orm.split(shop)
    assert [p.name for p in parts] == ["ecommerce_Product", "ecommerce_Asset", "ecommerce_Order"]
    assert bridges == ["ProductAsset", "ItemProduct"]

    try:
        orm.Model.parse("model m; class A extends Ghost { attrs: k: Integer; id: k; }")
    except ValueError as e:
        assert "unknown-parent" in str(e)
    else:
        raise AssertionError("invalid model accepted")

    print("python smoke test ok")


if __name__ == "__main__":
    main()
