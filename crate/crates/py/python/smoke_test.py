"""Smoke test for the `eci` Python extension.

Uses an installed `eci` module when there is one (e.g. after `maturin develop`);
otherwise loads the library built by `cargo build -p eci-py`.
"""

import importlib.util
import json
import pathlib
import sys


def load():
    try:
        import eci

        return eci
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parents[3]
    for profile in ("debug", "release"):
        lib = root / "target" / profile / "libeci.so"
        if lib.exists():
            spec = importlib.util.spec_from_file_location("eci", lib)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("eci extension not found; run `cargo build -p eci-py` first")


def main():
    eci = load()

    proof = eci.derive("X, Z _||_ Y | Z", ["X _||_ Y | Z"])
    assert proof is not None and proof.splitlines()[-1].endswith("X, Z _||_ Y | Z [P1: 4]"), proof
    assert eci.derive("X _||_ Y", ["X _||_ Y | Z"]) is None
    assert "Y _||_ X" in eci.closure(["X _||_ Y"])

    model = eci.search_counterexample(["X _||_ Y | Z"], "X _||_ Y", seed=3)
    assert model is not None
    assert eci.check(model, "X _||_ Y | Z")
    assert not eci.check(model, "X _||_ Y")
    assert json.loads(model)["report"]["goal"]["holds"] is False

    family = {
        "regimes": ["obs", "do0", "do1"],
        "variables": {"T": ["0", "1"], "Y": ["0", "1"]},
        "distributions": {
            "obs": [{"assign": {"T": "0", "Y": "0"}, "p": "1/2"}, {"assign": {"T": "1", "Y": "1"}, "p": "1/2"}],
            "do0": [{"assign": {"T": "0", "Y": "0"}, "p": "1/2"}, {"assign": {"T": "0", "Y": "1"}, "p": "1/2"}],
            "do1": [{"assign": {"T": "1", "Y": "0"}, "p": "1/2"}, {"assign": {"T": "1", "Y": "1"}, "p": "1/2"}],
        },
    }
    report = json.loads(eci.ace(json.dumps(family)))
    assert report["transfer_valid"] is False
    assert report["ace_interventional"] == "0" and report["ace_observational"] == "1"

    joint = json.loads(eci.product(json.dumps(family), json.dumps({"obs": "1/2", "do0": "1/4", "do1": "1/4"})))
    assert "__regime" in joint["variables"]

    try:
        eci.derive("X _||_ Y |", [])
    except ValueError as e:
        assert "parse error" in str(e)
    else:
        raise AssertionError("trailing bar accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
