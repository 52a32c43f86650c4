import numpy as np
import pytest

from steklov.errors import ConfigError, InputError
from steklov.signals import CATALOG, load_csv_signal, make_signal, signal_eval


def test_examples():
    hat = make_signal("hat:B=1")
    assert hat(0.0) == 1.0 and hat(1.0) == 0.0 and hat(-1.0) == 0.0
    assert signal_eval(hat, 0.5) == 0.5
    step = make_signal("step")
    assert signal_eval(step, 2.0) == 0.0 and step(0.5) == 1.0
    assert step.breakpoints == (0.0, 1.0)
    assert not step.is_continuous_at(0.0) and step.is_continuous_at(0.5)
    bump = make_signal("bump:B=1")
    assert bump.sup_norm == 1.0 and bump(0.0) == 1.0 and bump(1.5) == 0.0
    assert hat.breakpoints == (-1.0, 0.0, 1.0)


@pytest.mark.parametrize("sid", CATALOG)
def test_support_honesty(sid):
    f = make_signal(sid)
    B = f.support_bound
    rng = np.random.default_rng(0)
    x = rng.uniform(B, 2 * B + 1, 100) * rng.choice([-1, 1], 100)
    x = x[np.abs(x) > B]
    assert np.max(np.abs(f(x))) == 0.0


@pytest.mark.parametrize("sid", CATALOG)
def test_sup_norm_honesty(sid):
    f = make_signal(sid)
    x = np.linspace(-f.support_bound - 1, f.support_bound + 1, 1001)
    assert np.max(np.abs(f(x))) <= f.sup_norm + 1e-12


@pytest.mark.parametrize("bad", ["hat", "hat:B=-1", "wave:B=1", "const:B=1", "step:B=2", "hat:B"])
def test_malformed(bad):
    with pytest.raises(ConfigError):
        make_signal(bad)


def test_csv_zero_signal(tmp_path):
    p = tmp_path / "z.csv"
    p.write_text("x,value\n0,0\n1,0\n")
    f = load_csv_signal(str(p))
    assert np.all(f(np.linspace(-1, 2, 31)) == 0.0)


def test_csv_hat_interpolation(tmp_path):
    xs = np.linspace(-1, 1, 101)
    hat = make_signal("hat:B=1")
    p = tmp_path / "h.csv"
    p.write_text("x,value\n" + "".join(f"{x!r},{y!r}\n" for x, y in zip(xs.tolist(), hat(xs).tolist())))
    f = load_csv_signal(str(p))
    mids = 0.5 * (xs[1:] + xs[:-1])
    assert np.max(np.abs(f(mids) - hat(mids))) < 1e-2
    assert f.support_bound == 1.0 and len(f.breakpoints) == 101


@pytest.mark.parametrize("body,line", [("", None), ("x,value\n0,1\n0,2\n", 3),
                                       ("x,value\n0,1\n1,abc\n", 3), ("a,b\n0,1\n", 1)])
def test_csv_errors(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(InputError) as info:
        load_csv_signal(str(p))
    if line is not None:
        assert f":{line}:" in str(info.value)
