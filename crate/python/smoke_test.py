"""Smoke test for the mdsfit_py extension.

Build and install first:
    pip install maturin
    cd crates/py && maturin build --release -o dist && pip install dist/*.whl
"""

import mdsfit_py as mf


def main():
    mat = mf.SupportMatrix(["110", "011"])
    assert (mat.m, mat.n) == (2, 3)
    assert mat.mds_condition() == (True, None)

    code = mat.build_code(q=5)
    assert code["G"] == [[3, 4, 0], [0, 1, 2]]
    assert code["T"] == [[3, 1], [0, 1]]
    assert code["verification"]["passed"]

    bad = mf.SupportMatrix(["110", "110"])
    assert bad.mds_condition() == (False, [1, 2])
    try:
        bad.build_code(q=5)
    except mf.MdsfitError:
        pass
    else:
        raise AssertionError("expected MdsfitError")

    fam = mat.root_family()
    assert fam.sets == [[3], [1]]
    assert fam.wdet() == "+1*a1 -1*a3"
    assert not fam.w_is_zero()
    assert fam.support_matrix() == mat

    same = mf.RootFamily(2, [[1], [1]])
    assert same.wdet() == "0"
    assert same.has_grp() == ([1, 2], [1])
    assert same.classify() == "consistent-zero-grp"

    tri = mf.RootFamily(3, [[1, 2], [1, 3], [2, 3]])
    assert tri.has_rp() is None
    trace = tri.reduce()
    assert trace["reduction_set"] == [1]
    assert trace["final_degrees"] == [1, 1, 2]
    assert len(tri.reduce_all()) == 3
    assert tri.classify(exact=False) == "consistent-nonzero-gnrp"

    report = mf.run_suite(3, 6, profile=[2, 2, 2])
    assert report["passed"] and report["counts"]["counterexamples"] == 0

    assert mf.check_fact1(2, 3)["violations"] == []
    assert mf.check_lemmas(3, 6, profile=[2, 2, 2], lemma1=True)["passed"]

    print("smoke test ok")


if __name__ == "__main__":
    main()
