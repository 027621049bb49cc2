"""Write the model specifications of the twelve scatter-matrix panels.

Two groups of six five-dimensional models, ``fig1_*`` (Clayton frailties
with Gumbel-type EVCs) and ``fig2_*`` (Clayton frailties with extremal t
EVCs).  All share ``seed`` so that panels reuse each other's realizations
wherever the ingredients coincide: the samplers draw the EVC and the
frailties from two fixed child streams.

    python demos/make_specs.py            # writes demos/specs/*.json
    haxc sample --spec demos/specs/fig1_c_nac.json --n 1000 --out nac.csv
"""
import json
from pathlib import Path

SEED = 20181016
D = 5


def clayton(tau):
    return {"family": "clayton", "tau": tau}


def two_level(sizes, root, sectors):
    nodes = [{"id": "root", "parent": None, "params": root}]
    order = []
    for s, (k, par) in enumerate(zip(sizes, sectors)):
        nodes.append({"id": f"s{s}", "parent": "root", "params": par})
        for j in range(k):
            nodes.append({"id": f"s{s}_{j}", "parent": f"s{s}", "params": {}})
            order.append(f"s{s}_{j}")
    return {"nodes": nodes, "leaf_order": order}


def nested_gumbel_evc(sizes):
    tree = two_level(sizes, {"tau": 0.2}, [{"tau": 0.5}, {"tau": 0.7}])
    return {"type": "nested_gumbel", "tree": tree}


def block_corr(sizes, between, within):
    lab = [s for s, k in enumerate(sizes) for _ in range(k)]
    return [[1.0 if i == j else (within[lab[i]] if lab[i] == lab[j] else between)
             for j in range(D)] for i in range(D)]


def extremal_t_evc(corr):
    return {"type": "spectral", "policy": "fixed", "n_points": 1000,
            "generator": {"variant": "extremal_t", "nu": 3.5, "corr": corr}}


FRAILTY_23 = two_level([2, 3], clayton(0.2), [clayton(0.4), clayton(0.6)])
FRAILTY_32 = two_level([3, 2], clayton(0.2), [clayton(0.4), clayton(0.6)])
ET_FLAT = extremal_t_evc([[1.0 if i == j else 0.7 for j in range(D)] for i in range(D)])
ET_HIER = extremal_t_evc(block_corr([2, 3], 0.2, [0.5, 0.7]))

SPECS = {
    "fig1_a_clayton": {"kind": "AC", "dimension": D, "generator": clayton(0.4)},
    "fig1_b_axc_gumbel": {"kind": "AXC", "dimension": D, "generator": clayton(0.4),
                          "evc": {"type": "gumbel", "tau": 0.5}},
    "fig1_c_nac": {"kind": "HAXC", "frailty_tree": FRAILTY_23, "evc": {"type": "independence"}},
    "fig1_d_haxc_gumbel": {"kind": "HAXC", "frailty_tree": FRAILTY_23,
                           "evc": {"type": "gumbel", "tau": 0.5}},
    "fig1_e_haxc_matched": {"kind": "HAXC", "frailty_tree": FRAILTY_23,
                            "evc": nested_gumbel_evc([2, 3])},
    "fig1_f_haxc_mismatched": {"kind": "HAXC", "frailty_tree": FRAILTY_32,
                               "evc": nested_gumbel_evc([2, 3])},
    "fig2_a_extremal_t": {"kind": "EVC", "dimension": D, "evc": ET_FLAT},
    "fig2_b_extremal_t_hier": {"kind": "EVC", "dimension": D, "evc": ET_HIER},
    "fig2_c_axc_hier": {"kind": "AXC", "dimension": D, "generator": clayton(0.4), "evc": ET_HIER},
    "fig2_d_haxc_flat_evc": {"kind": "HAXC", "frailty_tree": FRAILTY_23, "evc": ET_FLAT},
    "fig2_e_haxc_matched": {"kind": "HAXC", "frailty_tree": FRAILTY_23, "evc": ET_HIER},
    "fig2_f_haxc_mismatched": {"kind": "HAXC", "frailty_tree": FRAILTY_32, "evc": ET_HIER},
}


def main(outdir=Path(__file__).parent / "specs"):
    outdir.mkdir(parents=True, exist_ok=True)
    for name, spec in SPECS.items():
        spec = {**spec, "seed": SEED}
        (outdir / f"{name}.json").write_text(json.dumps(spec, indent=2) + "\n")
    print(f"wrote {len(SPECS)} specifications to {outdir}")


if __name__ == "__main__":
    main()
