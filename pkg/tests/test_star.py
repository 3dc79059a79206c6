from wickstar.fedosov import FedosovStar
from wickstar.sov_oracle import FormalPotential, OracleStar
from wickstar.star import bidifferential_table, is_separated_slot, multi_indices

from conftest import FS, kaehler


def test_multi_indices_graded():
    idx = multi_indices(2, 2)
    assert idx[0] == (0, 0)
    assert len(idx) == 6
    assert [sum(a) for a in idx] == sorted(sum(a) for a in idx)


def test_c0_is_pointwise():
    K = kaehler(FS, 1, 10, 8)
    table = bidifferential_table(FedosovStar(K, T=8), 0, 2)
    for (a, b), c in table.items():
        if a == (0, 0) and b == (0, 0):
            assert c.agrees_with(K.ctx.one())
        else:
            assert c.is_zero()


def test_c1_is_inverse_metric_in_separated_slot():
    K = kaehler(FS, 1, 10, 8)
    for engine in (FedosovStar(K, T=8), OracleStar(FormalPotential.trivial(K.potential))):
        table = bidifferential_table(engine, 1, 2)
        assert table[((0, 1), (1, 0))].agrees_with(K.ginv[0][0])
        for (a, b), c in table.items():
            if not is_separated_slot(a, b, 1):
                assert c.is_zero()


def test_star_series_exposes_table():
    K = kaehler(FS, 1, 10, 8)
    s = FedosovStar(K, T=8).star(K.ctx.local(1), K.ctx.local(0), 2)
    assert s.C(1).agrees_with(s[1])
    assert s.bidifferential(0, 1)[((0, 0), (0, 0))].agrees_with(K.ctx.one())
