import numpy as np
import pytest

from aoiipoll.estimation import SinkRecord


@pytest.fixture
def record():
    def make(x1=0.0, x2=0.0, u=0, rho_hat=1.0, last_poll=0):
        return SinkRecord(x1=np.asarray(x1, dtype=float), x2=np.asarray(x2, dtype=float),
                          u=np.asarray(u), rho_hat=np.asarray(rho_hat, dtype=float),
                          last_poll=np.asarray(last_poll))
    return make
