"""Quick check of the compiled bindings. Build first with `maturin develop` in crates/py."""
import json

import meandim_py as md


def main():
    c = md.Cover(4, [[0, 1], [1, 2], [2, 3]])
    assert c.order() == 1, c
    assert c.nerve_dimension() == c.order()
    d = md.Cover(4, [[0, 1, 2], [2, 3]])
    j = c.join(d)
    assert j.refines(c) and j.refines(d)
    back = md.Cover.from_json(j.to_json())
    assert back.order() == j.order()

    s = md.BlockSystem("1/2", stages=2, alphabet=2)
    assert s.a_sequence == [1]
    assert s.lower_bound() == "1/2"
    assert s.free_dim_ratio(len(s.periods) - 1) == "1/2"
    again = md.BlockSystem.from_json(s.to_json())
    assert again.periods == s.periods
    ok, trials, _ = s.probe(0, 10, 3)
    assert ok == trials == 10

    brick = md.brick_cover(2, "1/2")
    assert md.box_cover_order(brick) == 2
    assert md.perdim(json.dumps({"dims_H": {"1": 1, "2": 3}, "rule": "linear:d=2"}), 12) == "2"

    system = json.dumps({"points": ["a", "b", "c", "d"], "T": {"a": "b", "b": "c", "c": "d", "d": "a"}})
    assert md.find_marker(system, 2) is not None
    assert md.find_marker(system, 5) is None

    try:
        md.BlockSystem("3/2")
    except ValueError:
        pass
    else:
        raise AssertionError("r outside (0,1) accepted")

    rows = md.run_verify([1, 2])
    assert all(passed for _, _, passed, _ in rows), rows
    print("smoke test ok")


if __name__ == "__main__":
    main()
