import math

import pytest

import perceptron_bounds as pb


def contradictory():
    return pb.make_stream([[1.0]] * 4, [1, -1, 1, -1])


def separable_1d():
    return pb.make_stream([[2.0], [-2.0], [2.0], [-2.0]], [1, -1, 1, -1])


def test_run_primal():
    tr = pb.run_primal(separable_1d())
    assert tr.mistake_count == 1
    assert tr.update_rounds == [0]
    assert tr.final_weights == [2.0]
    assert pb.run_primal(contradictory()).mistake_count == 4


def test_kernel_matches_primal():
    s = pb.generate(pb.parse_generator_spec("noise:N=3,T=60,p=0.1,seed=4")).stream
    assert pb.run_kernel(s, pb.KernelSpec.linear()).update_rounds == pb.run_primal(s).update_rounds


def test_bounds():
    s = contradictory()
    tr = pb.run_primal(s)
    assert pb.l1_bound(tr, s, pb.make_hinge(1.0), [1.0]).value == pytest.approx(6.0)
    assert pb.l2_bound(tr, s, 1.0, [1.0]).value == pytest.approx(11.656854249492380)
    assert pb.l2_bound(tr, s, 1.0, [1.0], pb.L2Form.RadiusForm).value == pytest.approx(14.656854249492380)
    rep = pb.optimize_bound(tr, s, pb.BoundName.l1_hinge)
    assert rep.valid and rep.value >= 4
    assert pb.compare_norms(tr, s, 1.0, [1.0]).regime == pb.NormRegime.L1Tighter


def test_novikoff_and_infeasible():
    s = separable_1d()
    tr = pb.run_primal(s)
    assert pb.novikoff_bound(tr, s, [1.0], 2.0).value == 1.0
    c = contradictory()
    with pytest.raises(pb.InfeasibleWitness):
        pb.novikoff_bound(pb.run_primal(c), c, [1.0], 1.0)


def test_admissibility():
    assert pb.check_admissibility(pb.make_hinge(1.0), pb.Interval(-2, 2)).all_pass()
    signed = pb.AdmissibleLoss.custom("signed", 1.0, lambda x: x)
    assert not pb.check_admissibility(signed, pb.Interval(-2, 2)).non_negative.passed


def test_online_to_batch():
    res = pb.select_from_losses([[0.0, 0.0], [0.0]], 0.5)
    assert res.chosen_index == 0
    assert res.objective_per_index[0] == pytest.approx(math.sqrt(math.log(12) / 4))
    assert 0.1 + pb.confidence_term(100, 0.05) == pytest.approx(1.8289997077917253)
    cov = pb.coverage_experiment(pb.parse_generator_spec("sep:N=1,r=1,rho=0.1"), 30, 0.1, 2, 50, 1)
    assert cov.violation_fraction == 0.0


def test_data_round_trip(tmp_path):
    s = pb.generate(pb.parse_generator_spec("sep:N=3,T=20,seed=1")).stream
    for fmt in (pb.FileFormat.CSV, pb.FileFormat.SparseIndexValue):
        path = tmp_path / "data.txt"
        pb.save(s, path, fmt)
        assert pb.load(path, fmt) == s
    with pytest.raises(pb.ParseError):
        pb.parse_stream("2,1.0\n")


def test_parameter_errors():
    with pytest.raises(pb.ParameterError):
        pb.make_hinge(0.0)
    with pytest.raises(pb.ParameterError):
        pb.parse_generator_spec("sep:r=1,rho=2")
    with pytest.raises(ValueError):
        pb.make_stream([[1.0]], [1, -1])
