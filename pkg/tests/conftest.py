import pytest

from pathga.cfg import build_cfg, enumerate_basis_paths
from pathga.lang import bundled, load_program

ATM_SOURCE = """\
input wd_amt in [0, 32767];
net_amt := 25000;
min_bal := 1000;
bal := net_amt - wd_amt;
if wd_amt < net_amt {
    if bal < min_bal {
        record fail bal;
    } else {
        record success bal;
    }
}
"""


@pytest.fixture(scope="session")
def atm():
    return load_program(bundled("atm"))


@pytest.fixture(scope="session")
def atm_cfg(atm):
    return build_cfg(atm)


@pytest.fixture(scope="session")
def atm_paths(atm_cfg):
    return enumerate_basis_paths(atm_cfg)


@pytest.fixture(scope="session")
def inner_pred(atm_cfg):
    # second decision in source order: bal < min_bal
    return atm_cfg.predicates[1]
