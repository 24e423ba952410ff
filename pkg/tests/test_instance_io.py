import re
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings

from qapfn.errors import (
    ChecksumMismatch,
    DimensionMismatch,
    InstanceNotFound,
    MissingBestKnown,
    NonFiniteEntry,
    NonSquareData,
    NonzeroDiagonal,
    NotAPermutation,
    TruncatedFile,
)
from qapfn.feasible_core import objective
from qapfn.instance_io import (
    BEST_KNOWN,
    VENDORED,
    Instance,
    ReferenceSolution,
    Symmetry,
    best_known,
    classify_symmetry,
    fetch_instances,
    load_instance,
    load_solution,
    mirror_url,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
)

from conftest import EX_D, EX_F, instances


def test_parse_smallest_symmetric():
    inst = parse_instance("2\n0 3\n3 0\n0 5\n5 0", name="toy")
    assert inst.n == 2
    np.testing.assert_array_equal(inst.F, [[0, 3], [3, 0]])
    np.testing.assert_array_equal(inst.D, [[0, 5], [5, 0]])
    assert inst.symmetry is Symmetry.Symmetric


def test_trailing_whitespace_tolerated():
    inst = parse_instance("  2\n\n0 3\n3 0\n\n0 5\n5 0\n\n\n")
    assert inst.n == 2


def test_truncated_file():
    with pytest.raises(TruncatedFile):
        parse_instance("3\n0 1\n")
    with pytest.raises(TruncatedFile):
        parse_instance("")


def test_extra_values_rejected():
    with pytest.raises(NonSquareData):
        parse_instance("2\n0 3\n3 0\n0 5\n5 0 7")


def test_nonfinite_rejected():
    with pytest.raises(NonFiniteEntry):
        parse_instance("2\n0 nan\n3 0\n0 5\n5 0")
    with pytest.raises(NonFiniteEntry):
        parse_instance("2\n0 x\n3 0\n0 5\n5 0")


def test_diagonal_zeroed_with_warning_or_rejected():
    text = "2\n1 3\n3 0\n0 5\n5 2"
    with pytest.warns(UserWarning):
        inst = parse_instance(text)
    assert inst.F[0, 0] == 0 and inst.D[1, 1] == 0
    with pytest.raises(NonzeroDiagonal):
        parse_instance(text, strict=True)


def test_instance_is_read_only():
    inst = parse_instance("2\n0 3\n3 0\n0 5\n5 0")
    with pytest.raises(ValueError):
        inst.F[0, 1] = 9


@pytest.mark.parametrize("name", VENDORED)
def test_vendored_instances_load(name):
    inst = load_instance(name)
    assert inst.name == name
    assert inst.n == int(re.search(r"\d+", name).group())
    assert not np.diagonal(inst.F).any()


def test_chr12a_reference_solution_matches_objective():
    inst = load_instance("chr12a")
    sol = load_solution("chr12a")
    assert sol.n == 12 and sol.objective == 9552
    assert objective(inst, sol.permutation) == sol.objective
    # the QAPLIB line for chr12a, one-indexed
    assert [p + 1 for p in sol.permutation] == [7, 5, 12, 2, 1, 3, 9, 11, 10, 6, 8, 4]


@pytest.mark.parametrize("name", [n for n in VENDORED
                                  if (Path(__file__).parents[1] / "src/qapfn/data" / f"{n}.sln").exists()])
def test_every_shipped_solution_attains_its_value(name):
    inst = load_instance(name)
    sol = load_solution(name)
    assert objective(inst, sol.permutation) == sol.objective == BEST_KNOWN[name]


def test_classify_all_classes():
    S = np.array([[0, 1], [1, 0]], float)
    A = np.array([[0, 1], [2, 0]], float)
    assert classify_symmetry(S, S) is Symmetry.Symmetric
    assert classify_symmetry(S, A) is Symmetry.SemiSymmetricFsym
    assert classify_symmetry(A, S) is Symmetry.SemiSymmetricDsym
    assert classify_symmetry(A, A) is Symmetry.Asymmetric
    with pytest.raises(DimensionMismatch):
        classify_symmetry(S, np.zeros((3, 3)))


def test_worked_example_is_fsym():
    assert classify_symmetry(EX_F, EX_D) is Symmetry.SemiSymmetricFsym


_SWAP = {Symmetry.Symmetric: Symmetry.Symmetric, Symmetry.Asymmetric: Symmetry.Asymmetric,
         Symmetry.SemiSymmetricFsym: Symmetry.SemiSymmetricDsym,
         Symmetry.SemiSymmetricDsym: Symmetry.SemiSymmetricFsym}


@given(instances())
def test_classification_is_transpose_invariant(inst):
    assert classify_symmetry(inst.F.T, inst.D.T) is inst.symmetry
    assert classify_symmetry(inst.D, inst.F) is _SWAP[inst.symmetry]


@given(instances(max_n=7))
def test_instance_round_trip(inst):
    again = parse_instance(serialize_instance(inst), name=inst.name)
    assert again == inst
    assert again.symmetry is inst.symmetry


def test_non_integral_round_trip():
    F = np.array([[0, 0.1], [1 / 3, 0]])
    inst = Instance("f", F, F.T.copy())
    assert parse_instance(serialize_instance(inst), "f") == inst


def test_parse_solution_examples():
    sol = parse_solution("2 10\n2 1")
    assert (sol.n, sol.objective, sol.permutation) == (2, 10, (1, 0))
    with pytest.raises(NotAPermutation):
        parse_solution("3 5\n1 1 2")
    with pytest.raises(DimensionMismatch):
        parse_solution("3 5\n1 2")
    # some QAPLIB solution files separate entries with commas
    assert parse_solution("3 7\n2,3,1").permutation == (1, 2, 0)


@given(instances(min_n=2, max_n=9))
def test_solution_round_trip(inst):
    perm = tuple(int(p) for p in np.random.default_rng(inst.n).permutation(inst.n))
    sol = ReferenceSolution(inst.n, objective(inst, perm), perm)
    assert parse_solution(serialize_solution(sol)) == sol


def test_best_known_lookup(tmp_path):
    assert best_known("chr12a") == 9552
    assert best_known("tai50a") == 4938796
    (tmp_path / "custom.sln").write_text("2 11\n1 2\n")
    assert best_known("custom", tmp_path) == 11
    with pytest.raises(MissingBestKnown):
        best_known("nosuchinstance")


def test_load_by_path(tmp_path):
    p = tmp_path / "tiny.dat"
    p.write_text("2\n0 3\n3 0\n0 5\n5 0\n")
    assert load_instance(p).name == "tiny"
    with pytest.raises(InstanceNotFound):
        load_instance("no_such_instance")


# ---------------------------------------------------------------- fetching

def _mirror(tmp_path, names=("chr12a", "had12"), checksums=False, corrupt=None):
    import hashlib
    root = tmp_path / "mirror"
    (root / "data.d").mkdir(parents=True)
    (root / "soln.d").mkdir()
    lines = []
    for name in names:
        dat = load_instance(name)
        body = serialize_instance(dat).encode()
        (root / "data.d" / f"{name}.dat").write_bytes(body)
        lines.append(f"{hashlib.sha256(body).hexdigest()}  data.d/{name}.dat")
        sln = serialize_solution(load_solution(name)).encode()
        (root / "soln.d" / f"{name}.sln").write_bytes(sln)
        lines.append(f"{hashlib.sha256(sln).hexdigest()}  soln.d/{name}.sln")
    if checksums:
        if corrupt:
            lines = [("0" * 64 + line[64:]) if corrupt in line else line for line in lines]
        (root / "SHA256SUMS").write_text("\n".join(lines) + "\n")
    return root


def test_fetch_round_trip(tmp_path):
    root = _mirror(tmp_path, checksums=True)
    dest = tmp_path / "out"
    manifest = fetch_instances(["chr12a"], dest, mirror=str(root))
    assert manifest["chr12a"]["dat"] == dest / "chr12a.dat"
    assert load_instance(dest / "chr12a.dat") == load_instance("chr12a")
    assert load_solution(dest / "chr12a.sln").objective == 9552
    # idempotent: a second call leaves existing files alone
    mtime = (dest / "chr12a.dat").stat().st_mtime_ns
    fetch_instances(["chr12a"], dest, mirror=root.as_uri())
    assert (dest / "chr12a.dat").stat().st_mtime_ns == mtime


def test_fetch_empty_and_unknown(tmp_path):
    root = _mirror(tmp_path)
    assert fetch_instances([], tmp_path / "out", mirror=str(root)) == {}
    with pytest.raises(InstanceNotFound) as err:
        fetch_instances(["chr12a", "bogus1", "bogus2"], tmp_path / "out", mirror=str(root))
    assert err.value.names == ["bogus1", "bogus2"]
    assert "bogus1" in str(err.value)


def test_fetch_checksum_mismatch(tmp_path):
    root = _mirror(tmp_path, checksums=True, corrupt="had12.dat")
    with pytest.raises(ChecksumMismatch):
        fetch_instances(["had12"], tmp_path / "out", mirror=str(root))


def test_mirror_from_env_and_config(tmp_path, monkeypatch):
    monkeypatch.delenv("QAPFN_MIRROR", raising=False)
    cfg = tmp_path / "cfg"
    cfg.write_text("mirror = https://example.org/qaplib\n")
    monkeypatch.setenv("QAPFN_CONFIG", str(cfg))
    assert mirror_url() == "https://example.org/qaplib/"
    monkeypatch.setenv("QAPFN_MIRROR", "file:///srv/qap")
    assert mirror_url() == "file:///srv/qap/"


def test_fetch_uses_env_mirror(tmp_path, monkeypatch):
    root = _mirror(tmp_path, names=("had12",))
    monkeypatch.setenv("QAPFN_MIRROR", str(root))
    manifest = fetch_instances(["had12"], tmp_path / "out")
    assert manifest["had12"]["sln"] is not None
